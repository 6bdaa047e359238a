//! Analytic test fields `u = L ψ = x × ∇ψ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::SpherePoint;
use crate::harmonics::{scalar_y, vsh_vector, HarmonicIndex};

/// Name of a builtin target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    PaperGaussians,
    VshLowDegree,
}

impl TargetKind {
    pub fn name(self) -> &'static str {
        match self {
            TargetKind::PaperGaussians => "paper-gaussians",
            TargetKind::VshLowDegree => "vsh-lowdegree",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-gaussians" => Ok(TargetKind::PaperGaussians),
            "vsh-lowdegree" => Ok(TargetKind::VshLowDegree),
            other => Err(Error::UnknownTarget(other.to_string())),
        }
    }
}

/// One bump `amp · exp(-a((x-x0)² + (y-y0)²) - 8 q(z))`.
struct Bump {
    amp: f64,
    a: f64,
    x0: f64,
    y0: f64,
    z0: f64,
}

const BUMPS: [Bump; 4] = [
    Bump { amp: 2.0, a: 1.5, x0: 0.9, y0: -0.1, z0: 0.2 },
    Bump { amp: 3.0, a: 2.0, x0: -0.7, y0: 0.2, z0: 0.25 },
    Bump { amp: -2.5, a: 1.1, x0: -0.2, y0: 0.8, z0: -0.19 },
    Bump { amp: -2.0, a: 2.2, x0: -0.2, y0: -1.0, z0: -0.21 },
];

/// A tangent field with a known stream function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetField {
    kind: TargetKind,
    literal_typo: bool,
}

/// Looks a builtin target up by name.
pub fn builtin_target(name: &str) -> Result<TargetField> {
    Ok(TargetField::new(name.parse()?))
}

impl TargetField {
    pub fn new(kind: TargetKind) -> Self {
        Self {
            kind,
            literal_typo: false,
        }
    }

    /// Reads the last Gaussian's z-exponent as the linear `8(z + 0.21²)`
    /// instead of `8(z + 0.21)²`. Only affects `paper-gaussians`.
    pub fn with_literal_typo(mut self, on: bool) -> Self {
        self.literal_typo = on;
        self
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn literal_typo(&self) -> bool {
        self.literal_typo
    }

    /// `ψ` and its Cartesian gradient at `p`.
    fn gaussians(&self, v: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let mut psi = -3.0 * v.z;
        let mut grad = Vector3::new(0.0, 0.0, -3.0);
        for (k, b) in BUMPS.iter().enumerate() {
            let (dx, dy, dz) = (v.x - b.x0, v.y - b.y0, v.z - b.z0);
            let (qz, dqz) = if self.literal_typo && k == BUMPS.len() - 1 {
                (v.z + b.z0 * b.z0, 1.0)
            } else {
                (dz * dz, 2.0 * dz)
            };
            let e = b.amp * (-b.a * (dx * dx + dy * dy) - 8.0 * qz).exp();
            psi += e;
            grad += Vector3::new(-2.0 * b.a * dx, -2.0 * b.a * dy, -8.0 * dqz) * e;
        }
        (psi, grad)
    }

    fn low_degree() -> [(HarmonicIndex, f64); 2] {
        [
            (HarmonicIndex { mu: 1, nu: 0 }, 1.0),
            (HarmonicIndex { mu: 2, nu: 1 }, 0.5),
        ]
    }

    pub fn stream(&self, p: &SpherePoint) -> f64 {
        match self.kind {
            TargetKind::PaperGaussians => self.gaussians(p.vector()).0,
            TargetKind::VshLowDegree => Self::low_degree().iter().map(|&(h, w)| w * scalar_y(h, p)).sum(),
        }
    }

    pub fn field(&self, p: &SpherePoint) -> Vector3<f64> {
        match self.kind {
            TargetKind::PaperGaussians => p.vector().cross(&self.gaussians(p.vector()).1),
            TargetKind::VshLowDegree => Self::low_degree()
                .iter()
                .map(|&(h, w)| vsh_vector(h, p) * w)
                .sum(),
        }
    }
}
