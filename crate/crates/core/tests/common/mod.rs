//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use divrbf::geom::SpherePoint;
use divrbf::kernels::KernelKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::Float;

/// Uniformly distributed points (uniform z and longitude).
pub fn random_points(n: usize, seed: u64) -> Vec<SpherePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let lam: f64 = rng.random_range(0.0..2.0 * PI);
            let s = (1.0 - z * z).sqrt();
            SpherePoint::new(s * lam.cos(), s * lam.sin(), z).unwrap()
        })
        .collect()
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton's method.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = gauss_legendre_seed(n, i);
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * d * d);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (t * p - p0) / (t * t - 1.0);
    (p, d)
}

/// Product rule on the sphere: Gauss–Legendre in z times the trapezoid rule in
/// longitude. Exact for polynomials of degree < min(2 nz, nlon).
pub fn sphere_quadrature(nz: usize, nlon: usize) -> Vec<(SpherePoint, f64)> {
    let (z, wz) = gauss_legendre(nz);
    let mut out = Vec::with_capacity(nz * nlon);
    for (zi, wi) in z.iter().zip(&wz) {
        for j in 0..nlon {
            let lam = 2.0 * PI * j as f64 / nlon as f64;
            let theta = zi.acos();
            out.push((SpherePoint::from_spherical(theta, lam), wi * 2.0 * PI / nlon as f64));
        }
    }
    out
}

/// Working precision for the coefficient oracle, in bits.
pub const ORACLE_PREC: u32 = 256;

/// Gauss–Legendre rule in MPFR arithmetic.
pub fn gauss_legendre_mp(n: usize) -> (Vec<Float>, Vec<Float>) {
    let prec = ORACLE_PREC;
    let tol = Float::with_val(prec, 2.0).pow(-(prec as i32) + 8);
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        let t0 = gauss_legendre_seed(n, i);
        let mut t = Float::with_val(prec, t0);
        for _ in 0..60 {
            let (p, d) = legendre_mp(n, &t);
            let dt = Float::with_val(prec, &p / &d);
            t -= &dt;
            if dt.abs() < tol {
                break;
            }
        }
        let (_, d) = legendre_mp(n, &t);
        let one_minus = Float::with_val(prec, 1) - Float::with_val(prec, &t * &t);
        let w = Float::with_val(prec, 2) / (one_minus * Float::with_val(prec, &d * &d));
        xs.push(t);
        ws.push(w);
    }
    (xs, ws)
}

fn gauss_legendre_seed(n: usize, i: usize) -> f64 {
    (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos()
}

/// `P_n(t)` and `P_n'(t)` in MPFR.
fn legendre_mp(n: usize, t: &Float) -> (Float, Float) {
    let prec = ORACLE_PREC;
    let all = legendre_all_mp(n, t);
    let p = all[n].clone();
    let p0 = if n >= 1 { all[n - 1].clone() } else { Float::with_val(prec, 0) };
    let num = Float::with_val(prec, t * &p) - p0;
    let den = Float::with_val(prec, t * t) - 1u32;
    let d = Float::with_val(prec, num * n as u32) / den;
    (p, d)
}

/// `P_0(t), …, P_n(t)` in MPFR.
pub fn legendre_all_mp(n: usize, t: &Float) -> Vec<Float> {
    let prec = ORACLE_PREC;
    let mut out = Vec::with_capacity(n + 1);
    out.push(Float::with_val(prec, 1));
    if n >= 1 {
        out.push(t.clone());
    }
    for k in 2..=n {
        let a = Float::with_val(prec, t * &out[k - 1]) * (2 * k - 1) as u32;
        let b = Float::with_val(prec, &out[k - 2] * (k - 1) as u32);
        out.push((a - b) / k as u32);
    }
    out
}

/// `φ` as a function of `t = xᵀy` (so `r² = 2 - 2t`), in MPFR.
pub fn phi_mp(kind: KernelKind, eps: f64, t: &Float) -> Float {
    let prec = ORACLE_PREC;
    let e2 = Float::with_val(prec, eps) * eps;
    let r2 = Float::with_val(prec, 2) - Float::with_val(prec, t * 2u32);
    let u = Float::with_val(prec, &e2 * &r2);
    let one_plus = Float::with_val(prec, &u + 1u32);
    match kind {
        KernelKind::Mq => one_plus.sqrt(),
        KernelKind::Imq => one_plus.sqrt().recip(),
        KernelKind::Iq => one_plus.recip(),
        KernelKind::Ga => (-u).exp(),
    }
}

/// `K_μ = ∫_{-1}^{1} φ(t) P_μ(t) dt` for `μ = 0..=mu_max`, by an `npts`-point
/// Gauss–Legendre rule in extended precision.
pub fn legendre_projections(kind: KernelKind, eps: f64, mu_max: usize, npts: usize) -> Vec<f64> {
    let (xs, ws) = gauss_legendre_mp(npts);
    let mut acc: Vec<Float> = (0..=mu_max).map(|_| Float::with_val(ORACLE_PREC, 0)).collect();
    for (x, w) in xs.iter().zip(&ws) {
        let f = Float::with_val(ORACLE_PREC, phi_mp(kind, eps, x) * w);
        for (mu, p) in legendre_all_mp(mu_max, x).iter().enumerate() {
            acc[mu] += Float::with_val(ORACLE_PREC, &f * p);
        }
    }
    acc.iter().map(|a| a.to_f64()).collect()
}
