//! Smooth radial kernels, the radial factors of their Hessians, and the
//! spherical-harmonic expansion coefficients `c_{μ,ε}`.
//!
//! Coefficients are evaluated in log-magnitude form so that both `c_{μ,ε}` and
//! the scaled `c_{μ,ε} ε^{2μ}` come out without cancellation and without
//! spurious overflow for `ε ∈ (0, 10]`, `μ ≤ 300`. A value is reported as zero
//! only when the true magnitude is below the smallest subnormal.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Term cap for the inverse-quadratic hypergeometric series.
pub const HYPERGEOMETRIC_TERM_CAP: usize = 100_000;

/// Default relative tolerance for truncating the harmonic expansion.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-16;

/// Default hard cap on the truncation degree.
pub const DEFAULT_MU_MAX: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Multiquadric `sqrt(1 + (εr)²)`.
    Mq,
    /// Inverse multiquadric `1 / sqrt(1 + (εr)²)`.
    Imq,
    /// Inverse quadratic `1 / (1 + (εr)²)`.
    Iq,
    /// Gaussian `exp(-(εr)²)`.
    Ga,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [KernelKind::Mq, KernelKind::Imq, KernelKind::Iq, KernelKind::Ga];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Mq => "mq",
            KernelKind::Imq => "imq",
            KernelKind::Iq => "iq",
            KernelKind::Ga => "ga",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mq" => Ok(KernelKind::Mq),
            "imq" => Ok(KernelKind::Imq),
            "iq" => Ok(KernelKind::Iq),
            "ga" | "gaussian" => Ok(KernelKind::Ga),
            other => Err(Error::InvalidArgument(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Kernel choice plus shape parameter. `ε = 0` is rejected; the flat limit is
/// reached by taking `ε` small.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    kind: KernelKind,
    epsilon: f64,
}

impl KernelConfig {
    pub fn new(kind: KernelKind, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Sign applied to `φ` when building the matrix-valued kernel. The
    /// multiquadric's expansion coefficients are negative for every `μ ≥ 1`, so
    /// `-φ` is the positive definite choice there; the interpolant itself does
    /// not depend on this sign.
    pub fn definiteness_sign(&self) -> f64 {
        match self.kind {
            KernelKind::Mq => -1.0,
            _ => 1.0,
        }
    }

    /// `φ(r)`.
    pub fn phi(&self, r: f64) -> f64 {
        let u = (self.epsilon * r).powi(2);
        match self.kind {
            KernelKind::Mq => (1.0 + u).sqrt(),
            KernelKind::Imq => 1.0 / (1.0 + u).sqrt(),
            KernelKind::Iq => 1.0 / (1.0 + u),
            KernelKind::Ga => (-u).exp(),
        }
    }

    /// `(F, G2)` with `∇∇ᵀ φ(‖d‖) = F I + G2 d dᵀ`, i.e. `F = φ'/r` and
    /// `G2 = (φ'' - φ'/r)/r²`, in closed forms that are regular at `r = 0`.
    pub fn radial_factors(&self, r: f64) -> (f64, f64) {
        let e2 = self.epsilon * self.epsilon;
        let u = e2 * r * r;
        // With φ = g(u), u = ε²r²: F = 2ε² g'(u), G2 = 4ε⁴ g''(u).
        match self.kind {
            KernelKind::Mq => {
                let q = 1.0 / (1.0 + u).sqrt();
                (e2 * q, -e2 * e2 * q * q * q)
            }
            KernelKind::Imq => {
                let q = 1.0 / (1.0 + u).sqrt();
                let q3 = q * q * q;
                (-e2 * q3, 3.0 * e2 * e2 * q3 * q * q)
            }
            KernelKind::Iq => {
                let q = 1.0 / (1.0 + u);
                (-2.0 * e2 * q * q, 8.0 * e2 * e2 * q * q * q)
            }
            KernelKind::Ga => {
                let g = (-u).exp();
                (-2.0 * e2 * g, 4.0 * e2 * e2 * g)
            }
        }
    }

    /// `c_{μ,ε}`.
    pub fn expansion_coeff(&self, mu: usize) -> Result<f64> {
        let (sign, ln_abs) = self.ln_coeff(mu)?;
        Ok(sign * ln_abs.exp())
    }

    /// `c_{μ,ε} ε^{2μ}`, computed without forming either factor separately.
    pub fn scaled_coeff(&self, mu: usize) -> Result<f64> {
        let (sign, ln_abs) = self.ln_coeff(mu)?;
        Ok(sign * (ln_abs + 2.0 * mu as f64 * self.epsilon.ln()).exp())
    }

    /// Sign and natural log of `|c_{μ,ε}|`.
    fn ln_coeff(&self, mu: usize) -> Result<(f64, f64)> {
        let eps = self.epsilon;
        let e2 = eps * eps;
        let m = mu as f64;
        let root = (1.0 + 4.0 * e2).sqrt();
        // ln(2 / (1 + sqrt(1 + 4ε²))) = -ln(1 + δ), δ = 2ε² / (1 + sqrt(1 + 4ε²))
        let ln_rho = -(2.0 * e2 / (1.0 + root)).ln_1p();
        match self.kind {
            KernelKind::Mq => {
                let num = 2.0 * PI * (2.0 * e2 + 1.0 + (m + 0.5) * root);
                let den = (m + 1.5) * (m + 0.5) * (m - 0.5);
                let sign = -den.signum();
                Ok((sign, num.ln() - den.abs().ln() + (2.0 * m + 1.0) * ln_rho))
            }
            KernelKind::Imq => Ok((1.0, (4.0 * PI / (m + 0.5)).ln() + (2.0 * m + 1.0) * ln_rho)),
            KernelKind::Iq => {
                let ln_ratio = ln_factorial_over_gamma_half(mu);
                let w = 4.0 * e2 / (1.0 + 4.0 * e2);
                let ln_f = ln_hypergeometric_equal(mu, w).ok_or(Error::SeriesNonconvergence {
                    mu,
                    epsilon: eps,
                    terms: HYPERGEOMETRIC_TERM_CAP,
                })?;
                Ok((
                    1.0,
                    (4.0 * PI.powf(1.5)).ln() + ln_ratio - (m + 1.0) * (4.0 * e2).ln_1p() + ln_f,
                ))
            }
            KernelKind::Ga => {
                // c ε^{2μ} = 4π^{3/2} e^{-2ε²} Σ_k ε^{4k+2μ} / (k! Γ(k+μ+3/2))
                let ln_t0 = 2.0 * m * eps.ln() - ln_gamma_half_integer(mu);
                let e4 = e2 * e2;
                let mut sum = 1.0;
                let mut term = 1.0;
                let mut ln_scale = 0.0;
                let mut k = 0usize;
                loop {
                    let kf = k as f64;
                    term *= e4 / ((kf + 1.0) * (kf + m + 1.5));
                    sum += term;
                    k += 1;
                    if sum > 1e250 {
                        sum *= 1e-250;
                        term *= 1e-250;
                        ln_scale += 250.0 * std::f64::consts::LN_10;
                    }
                    if term < sum * 1e-18 && (k as f64) * (k as f64 + m) > e4 {
                        break;
                    }
                }
                let ln_scaled = (4.0 * PI.powf(1.5)).ln() - 2.0 * e2 + ln_t0 + sum.ln() + ln_scale;
                Ok((1.0, ln_scaled - 2.0 * m * eps.ln()))
            }
        }
    }
}

/// `ln Γ(μ + 3/2)`.
fn ln_gamma_half_integer(mu: usize) -> f64 {
    let mut acc = (PI.sqrt() / 2.0).ln();
    for j in 1..=mu {
        acc += (j as f64 + 0.5).ln();
    }
    acc
}

/// `ln(μ! / Γ(μ + 3/2))`.
fn ln_factorial_over_gamma_half(mu: usize) -> f64 {
    let mut acc = -(PI.sqrt() / 2.0).ln();
    for j in 1..=mu {
        let jf = j as f64;
        acc += (jf / (jf + 0.5)).ln();
    }
    acc
}

/// `ln ₂F₁(μ+1, μ+1; 2μ+2; w)` by its defining series, `None` past the term cap.
fn ln_hypergeometric_equal(mu: usize, w: f64) -> Option<f64> {
    let a = mu as f64 + 1.0;
    let c = 2.0 * a;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut ln_scale = 0.0;
    for k in 0..HYPERGEOMETRIC_TERM_CAP {
        let kf = k as f64;
        let ratio = (a + kf) * (a + kf) / ((c + kf) * (kf + 1.0)) * w;
        term *= ratio;
        sum += term;
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            ln_scale += 250.0 * std::f64::consts::LN_10;
        }
        if ratio < 1.0 && term < sum * 1e-18 {
            return Some(sum.ln() + ln_scale);
        }
    }
    None
}

/// Expansion coefficients for `μ = 0..=mu_max`.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub config: KernelConfig,
    /// `c_{μ,ε}`; zero where the magnitude underflows.
    pub values: Vec<f64>,
    /// `c_{μ,ε} ε^{2μ}`.
    pub scaled: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(config: KernelConfig, mu_max: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(mu_max + 1);
        let mut scaled = Vec::with_capacity(mu_max + 1);
        let ln_eps = config.epsilon().ln();
        for mu in 0..=mu_max {
            let (sign, ln_abs) = config.ln_coeff(mu)?;
            values.push(sign * ln_abs.exp());
            scaled.push(sign * (ln_abs + 2.0 * mu as f64 * ln_eps).exp());
        }
        Ok(Self { config, values, scaled })
    }

    pub fn mu_max(&self) -> usize {
        self.values.len() - 1
    }
}

/// Options for choosing the truncation degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationOptions {
    pub tol: f64,
    pub mu_max: usize,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TRUNCATION_TOL,
            mu_max: DEFAULT_MU_MAX,
        }
    }
}

/// Truncation degrees for a node count and kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationPlan {
    pub n: usize,
    /// Smallest degree whose vector harmonics number at least `2n`.
    pub mu0: usize,
    /// Degree at which the expansion tail falls below tolerance.
    pub mu_eps: usize,
    pub mu_trunc: usize,
    /// `mu_trunc (mu_trunc + 2)`.
    pub m: usize,
    /// Degree of each enumerated vector harmonic (column of `B`).
    pub degree_of_column: Vec<usize>,
}

/// `⌈sqrt(2n+1) - 1⌉`, computed in integers.
pub fn min_degree(n: usize) -> usize {
    let mut mu = 0usize;
    while mu * (mu + 2) < 2 * n {
        mu += 1;
    }
    mu
}

/// Neglected-term bound for degree `mu`: `|c ε^{2μ}| μ(μ+1)(2μ+1)/(8π)`.
fn tail_bound(config: &KernelConfig, mu: usize) -> Result<f64> {
    let m = mu as f64;
    Ok(config.scaled_coeff(mu)?.abs() * m * (m + 1.0) * (2.0 * m + 1.0) / (8.0 * PI))
}

pub fn build_truncation_plan(
    config: &KernelConfig,
    n: usize,
    opts: TruncationOptions,
) -> Result<TruncationPlan> {
    if n == 0 {
        return Err(Error::InvalidArgument("node count must be positive".into()));
    }
    if !(opts.tol > 0.0 && opts.tol <= 1e-8) {
        return Err(Error::InvalidArgument(format!(
            "truncation tolerance {} outside (0, 1e-8]",
            opts.tol
        )));
    }
    let mu0 = min_degree(n);
    if mu0 > opts.mu_max {
        return Err(Error::TruncationCap {
            cap: opts.mu_max,
            epsilon: config.epsilon(),
        });
    }
    let mut running_max = 0.0f64;
    for mu in 1..=mu0 {
        running_max = running_max.max(tail_bound(config, mu)?);
    }
    let mut mu_eps = mu0;
    loop {
        let next = tail_bound(config, mu_eps + 1)?;
        if next < opts.tol * running_max {
            break;
        }
        mu_eps += 1;
        if mu_eps >= opts.mu_max {
            return Err(Error::TruncationCap {
                cap: opts.mu_max,
                epsilon: config.epsilon(),
            });
        }
        running_max = running_max.max(next);
    }
    let mu_trunc = mu0.max(mu_eps);
    let degree_of_column = (1..=mu_trunc)
        .flat_map(|mu| std::iter::repeat_n(mu, 2 * mu + 1))
        .collect();
    Ok(TruncationPlan {
        n,
        mu0,
        mu_eps,
        mu_trunc,
        m: mu_trunc * (mu_trunc + 2),
        degree_of_column,
    })
}
