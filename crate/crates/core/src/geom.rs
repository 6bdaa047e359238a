//! Points on the unit sphere, cross-product matrices and tangent frames.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Inputs whose norm is this close to one are silently renormalized.
const NORM_SLACK: f64 = 1e-8;

/// Above this |z| the meridional/zonal formula is replaced by a fixed frame.
pub const POLE_THRESHOLD: f64 = 1.0 - 1e-12;

/// A point on the unit sphere S².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    v: Vector3<f64>,
}

impl SpherePoint {
    /// Builds a point from Cartesian coordinates, renormalizing small deviations
    /// from unit length and rejecting anything further off.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_SLACK {
            return Err(Error::NotOnSphere { x, y, z, norm });
        }
        // already unit to rounding: keep the bits so text round trips are exact
        if (norm - 1.0).abs() <= 2.0 * f64::EPSILON {
            return Ok(Self { v: Vector3::new(x, y, z) });
        }
        Ok(Self {
            v: Vector3::new(x / norm, y / norm, z / norm),
        })
    }

    /// Projects any nonzero vector radially onto the sphere.
    pub fn from_direction(v: &Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotOnSphere {
                x: v.x,
                y: v.y,
                z: v.z,
                norm,
            });
        }
        Ok(Self { v: v / norm })
    }

    /// Colatitude `theta` in [0, π], longitude `lambda` in radians.
    pub fn from_spherical(theta: f64, lambda: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sl, cl) = lambda.sin_cos();
        let v = Vector3::new(st * cl, st * sl, ct);
        Self { v: v / v.norm() }
    }

    pub fn x(&self) -> f64 {
        self.v.x
    }
    pub fn y(&self) -> f64 {
        self.v.y
    }
    pub fn z(&self) -> f64 {
        self.v.z
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.v
    }

    /// Distance from the polar axis, `sqrt(x² + y²)`.
    pub fn axis_distance(&self) -> f64 {
        self.v.x.hypot(self.v.y)
    }

    /// Longitude `atan2(y, x)`; zero on the polar axis.
    pub fn longitude(&self) -> f64 {
        if self.v.x == 0.0 && self.v.y == 0.0 {
            0.0
        } else {
            self.v.y.atan2(self.v.x)
        }
    }

    /// Chordal (Euclidean) distance between two points.
    pub fn chord(&self, other: &SpherePoint) -> f64 {
        (self.v - other.v).norm()
    }

    /// Moves `angle` radians along the great circle leaving `self` in tangent
    /// direction `t` (which must be a unit tangent vector at `self`).
    pub fn geodesic_step(&self, t: &Vector3<f64>, angle: f64) -> SpherePoint {
        let (s, c) = angle.sin_cos();
        let v = self.v * c + t * s;
        Self { v: v / v.norm() }
    }
}

/// Orthonormal frame at a sphere point: meridional `a`, zonal `b`, normal `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub n: Vector3<f64>,
}

impl TangentFrame {
    /// Components `(aᵀv, bᵀv)` of a vector in this frame.
    pub fn components(&self, v: &Vector3<f64>) -> (f64, f64) {
        (self.a.dot(v), self.b.dot(v))
    }

    /// True when the fixed polar frame was used instead of the meridional/zonal pair.
    pub fn is_polar(&self) -> bool {
        self.n.z.abs() > POLE_THRESHOLD
    }
}

/// The matrix `Q(p)` with `Q(p) v = p × v`.
pub fn cross_matrix(p: &SpherePoint) -> Matrix3<f64> {
    let (x, y, z) = (p.x(), p.y(), p.z());
    Matrix3::new(0.0, -z, y, z, 0.0, -x, -y, x, 0.0)
}

/// Meridional/zonal frame at `p`. At (or within 1e-12 of) the poles the zonal
/// vector is fixed to (0, 1, 0) and the meridional vector is `n × b`.
pub fn tangent_frame(p: &SpherePoint) -> TangentFrame {
    let n = *p.vector();
    if n.z.abs() > POLE_THRESHOLD {
        // Exactly (0, 1, 0) on the pole; off it, the y axis with its normal part removed.
        let b = Vector3::new(-n.y * n.x, 1.0 - n.y * n.y, -n.y * n.z);
        let b = b / b.norm();
        let a = n.cross(&b);
        return TangentFrame { a, b, n };
    }
    // sqrt(x² + y²) equals sqrt(1 - z²) on the sphere and does not lose digits
    // near the poles.
    let s = p.axis_distance();
    let a = Vector3::new(-n.z * n.x / s, -n.z * n.y / s, s);
    let b = Vector3::new(-n.y / s, n.x / s, 0.0);
    TangentFrame { a, b, n }
}

/// `first · a + second · b`.
pub fn reconstruct_vector(frame: &TangentFrame, comp: (f64, f64)) -> Vector3<f64> {
    frame.a * comp.0 + frame.b * comp.1
}

/// Base-2 van der Corput radical inverse of `i`.
pub fn van_der_corput(mut i: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 0.5;
    while i > 0 {
        if i & 1 == 1 {
            result += f;
        }
        i >>= 1;
        f *= 0.5;
    }
    result
}

/// Deterministic quasi-uniform Hammersley set: `z_i = 1 - (2i+1)/n`,
/// longitude `2π·vdc₂(i)`.
pub fn hammersley_nodes(n: usize) -> Vec<SpherePoint> {
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let s = ((1.0 - z) * (1.0 + z)).sqrt();
            let lambda = 2.0 * PI * van_der_corput(i as u64);
            let (sl, cl) = lambda.sin_cos();
            SpherePoint {
                v: Vector3::new(s * cl, s * sl, z),
            }
        })
        .collect()
}

/// Smallest pairwise chordal distance; `f64::INFINITY` for fewer than two points.
pub fn min_separation(points: &[SpherePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.min(p.chord(q));
        }
    }
    best
}
