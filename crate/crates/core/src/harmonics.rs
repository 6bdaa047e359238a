//! Real scalar spherical harmonics and the meridional/zonal components of the
//! divergence-free vector spherical harmonics `w = L Y`.
//!
//! The real harmonics use the normalization
//!
//! ```text
//! Y_μ^ν = sqrt((2μ+1)/4π) sqrt((μ-ν)!/(μ+ν)!) P_μ^ν(z) cos(νλ),   ν ≥ 0
//! Y_μ^ν = sqrt((2μ+1)/4π) sqrt((μ-ν)!/(μ+ν)!) P_μ^ν(z) sin(-νλ),  ν < 0
//! ```
//!
//! with the Condon–Shortley phase in `P_μ^ν` and negative orders resolved by
//! `P_μ^{-m} = (-1)^m (μ-m)!/(μ+m)! P_μ^m`. Note there is no `sqrt(2)` for
//! `ν ≠ 0`; kernel expansions compensate by halving the `ν = 0` term.
//!
//! Internally everything runs on fully normalized Legendre values
//! `P̄_l^m = N_l^m P_l^m`, so degrees up to several hundred never touch a
//! factorial. For `m ≥ 1` the recurrence carries `P̄_l^m / sinθ`, which gives the
//! `G = (1/sinθ) ∂Y/∂λ` component, and its pole limit, without a division.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};

use crate::error::{Error, Result};
use crate::geom::{tangent_frame, SpherePoint};
use crate::par;

/// Degree `mu` and order `nu` of a real spherical harmonic, `|nu| ≤ mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    pub mu: usize,
    pub nu: i64,
}

impl HarmonicIndex {
    pub fn new(mu: usize, nu: i64) -> Result<Self> {
        if nu.unsigned_abs() as usize > mu {
            return Err(Error::InvalidArgument(format!(
                "order {nu} exceeds degree {mu}"
            )));
        }
        Ok(Self { mu, nu })
    }
}

/// Harmonics of degrees `mu_min..=mu_max`, ordered by ascending degree and,
/// within a degree, `ν = -μ, …, μ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicEnumeration {
    mu_min: usize,
    mu_max: usize,
}

impl HarmonicEnumeration {
    pub fn new(mu_min: usize, mu_max: usize) -> Self {
        Self { mu_min, mu_max }
    }

    pub fn mu_min(&self) -> usize {
        self.mu_min
    }

    pub fn mu_max(&self) -> usize {
        self.mu_max
    }

    pub fn len(&self) -> usize {
        if self.mu_max < self.mu_min {
            0
        } else {
            (self.mu_max + 1).pow(2) - self.mu_min.pow(2)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of `(mu, nu)` in the ordering.
    pub fn position(&self, idx: HarmonicIndex) -> Option<usize> {
        if idx.mu < self.mu_min || idx.mu > self.mu_max {
            return None;
        }
        Some(idx.mu * idx.mu - self.mu_min * self.mu_min + (idx.nu + idx.mu as i64) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = HarmonicIndex> + '_ {
        (self.mu_min..=self.mu_max).flat_map(|mu| {
            let m = mu as i64;
            (-m..=m).map(move |nu| HarmonicIndex { mu, nu })
        })
    }

    /// Degree of each enumerated harmonic.
    pub fn degrees(&self) -> Vec<usize> {
        self.iter().map(|h| h.mu).collect()
    }
}

/// Associated Legendre function `P_μ^ν(z)`, Condon–Shortley phase included,
/// by upward recurrence in degree from the diagonal term. Large orders
/// overflow for the same reason the function itself is huge.
pub fn assoc_legendre(mu: usize, nu: usize, z: f64) -> Result<f64> {
    if nu > mu {
        return Err(Error::InvalidArgument(format!(
            "order {nu} exceeds degree {mu}"
        )));
    }
    if !(z.abs() <= 1.0 + 1e-12) {
        return Err(Error::LegendreDomain(z));
    }
    let z = z.clamp(-1.0, 1.0);
    let s = ((1.0 - z) * (1.0 + z)).sqrt();
    // P_m^m = (-1)^m (2m-1)!! s^m
    let mut pmm = 1.0;
    for k in 1..=nu {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    if mu == nu {
        return Ok(pmm);
    }
    let mut prev = pmm;
    let mut cur = z * (2 * nu + 1) as f64 * pmm;
    for l in (nu + 2)..=mu {
        let next = (z * (2 * l - 1) as f64 * cur - (l + nu - 1) as f64 * prev) / (l - nu) as f64;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Precomputed recurrence and derivative factors up to a maximum degree.
/// Cheap to clone; build once per truncation degree and reuse for many points.
#[derive(Debug, Clone)]
pub struct HarmonicEvaluator {
    lmax: usize,
    rec_a: Vec<f64>,
    rec_b: Vec<f64>,
    // d/dθ P̄_l^m = ½ (up · P̄_l^{m+1} - down · P̄_l^{m-1})
    up: Vec<f64>,
    down: Vec<f64>,
}

/// Normalized Legendre values at one point.
struct LegendreColumn {
    z: f64,
    s: f64,
    // P̄_l^0
    zonal: Vec<f64>,
    // P̄_l^m / s for m ≥ 1 (entry m = 0 unused)
    over_s: Vec<f64>,
}

impl LegendreColumn {
    #[inline]
    fn pbar(&self, l: usize, m: usize) -> f64 {
        if m == 0 {
            self.zonal[l]
        } else if m > l {
            0.0
        } else {
            self.s * self.over_s[tri(l, m)]
        }
    }
}

impl HarmonicEvaluator {
    pub fn new(lmax: usize) -> Self {
        let size = tri(lmax, lmax) + 1;
        let mut rec_a = vec![0.0; size];
        let mut rec_b = vec![0.0; size];
        let mut up = vec![0.0; size];
        let mut down = vec![0.0; size];
        for l in 0..=lmax {
            for m in 0..=l {
                let (lf, mf) = (l as f64, m as f64);
                let i = tri(l, m);
                if l >= m + 2 {
                    rec_a[i] = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let lm1 = lf - 1.0;
                    rec_b[i] = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
                }
                up[i] = ((lf + mf + 1.0) * (lf - mf)).sqrt();
                down[i] = ((lf + mf) * (lf - mf + 1.0)).sqrt();
            }
        }
        Self {
            lmax,
            rec_a,
            rec_b,
            up,
            down,
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    fn legendre(&self, z: f64, s: f64) -> LegendreColumn {
        let lmax = self.lmax;
        let mut zonal = vec![0.0; lmax + 1];
        zonal[0] = 1.0 / (4.0 * PI).sqrt();
        if lmax >= 1 {
            zonal[1] = 3f64.sqrt() * z * zonal[0];
        }
        for l in 2..=lmax {
            let i = tri(l, 0);
            zonal[l] = self.rec_a[i] * (z * zonal[l - 1] - self.rec_b[i] * zonal[l - 2]);
        }
        let mut over_s = vec![0.0; tri(lmax, lmax) + 1];
        let mut diag = -(3.0 / (8.0 * PI)).sqrt();
        for m in 1..=lmax {
            if m > 1 {
                diag *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
            }
            over_s[tri(m, m)] = diag;
            if m < lmax {
                over_s[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * z * diag;
            }
            for l in (m + 2)..=lmax {
                let i = tri(l, m);
                over_s[i] =
                    self.rec_a[i] * (z * over_s[tri(l - 1, m)] - self.rec_b[i] * over_s[tri(l - 2, m)]);
            }
        }
        LegendreColumn { z, s, zonal, over_s }
    }

    fn column_at(&self, p: &SpherePoint) -> (LegendreColumn, f64) {
        (self.legendre(p.z(), p.axis_distance()), p.longitude())
    }

    /// Scalar harmonics for every degree `mu_min..=lmax`, in enumeration order.
    pub fn scalar_all(&self, p: &SpherePoint, mu_min: usize, out: &mut [f64]) {
        let (col, lambda) = self.column_at(p);
        let (sin_m, cos_m) = trig_table(lambda, self.lmax);
        let mut k = 0;
        for l in mu_min..=self.lmax {
            for nu in -(l as i64)..=(l as i64) {
                let m = nu.unsigned_abs() as usize;
                let pb = col.pbar(l, m);
                out[k] = if nu >= 0 {
                    pb * cos_m[m]
                } else {
                    parity(m) * pb * sin_m[m]
                };
                k += 1;
            }
        }
    }

    /// `(G, H)` for every degree `1..=lmax` in enumeration order, expressed in
    /// `tangent_frame(p)`.
    pub fn vsh_all(&self, p: &SpherePoint, g: &mut [f64], h: &mut [f64]) {
        let (col, lambda) = self.column_at(p);
        let (sin_m, cos_m) = trig_table(lambda, self.lmax);
        let mut k = 0;
        for l in 1..=self.lmax {
            for nu in -(l as i64)..=(l as i64) {
                let m = nu.unsigned_abs() as usize;
                let dtheta = self.dtheta(&col, l, m);
                let ps = if m == 0 { 0.0 } else { col.over_s[tri(l, m)] };
                let mf = m as f64;
                let (gv, hv) = if nu >= 0 {
                    (-mf * ps * sin_m[m], dtheta * cos_m[m])
                } else {
                    let sign = parity(m);
                    (sign * mf * ps * cos_m[m], sign * dtheta * sin_m[m])
                };
                g[k] = gv;
                h[k] = hv;
                k += 1;
            }
        }
        let frame = tangent_frame(p);
        if frame.is_polar() {
            // Spherical frame at this longitude, rotated into the fixed polar frame.
            let (sl, cl) = lambda.sin_cos();
            let a_s = Vector3::new(-col.z * cl, -col.z * sl, col.s);
            let b_s = Vector3::new(-sl, cl, 0.0);
            let (r00, r01) = (frame.a.dot(&a_s), frame.a.dot(&b_s));
            let (r10, r11) = (frame.b.dot(&a_s), frame.b.dot(&b_s));
            for i in 0..k {
                let (gs, hs) = (g[i], h[i]);
                g[i] = r00 * gs + r01 * hs;
                h[i] = r10 * gs + r11 * hs;
            }
        }
    }

    #[inline]
    fn dtheta(&self, col: &LegendreColumn, l: usize, m: usize) -> f64 {
        let i = tri(l, m);
        if m == 0 {
            self.up[i] * col.pbar(l, 1)
        } else {
            0.5 * (self.up[i] * col.pbar(l, m + 1) - self.down[i] * col.pbar(l, m - 1))
        }
    }
}

#[inline]
fn parity(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn trig_table(lambda: f64, lmax: usize) -> (Vec<f64>, Vec<f64>) {
    (0..=lmax).map(|m| (m as f64 * lambda).sin_cos()).unzip()
}

/// Real spherical harmonic `Y_μ^ν(p)`.
pub fn scalar_y(idx: HarmonicIndex, p: &SpherePoint) -> f64 {
    let ev = HarmonicEvaluator::new(idx.mu);
    let mut out = vec![0.0; 2 * idx.mu + 1];
    ev.scalar_all(p, idx.mu, &mut out);
    out[(idx.nu + idx.mu as i64) as usize]
}

/// Meridional and zonal components `(G, H) = (aᵀ L Y, bᵀ L Y)` in `tangent_frame(p)`.
pub fn vsh_components(idx: HarmonicIndex, p: &SpherePoint) -> (f64, f64) {
    assert!(idx.mu >= 1, "vector harmonics start at degree 1");
    let ev = HarmonicEvaluator::new(idx.mu);
    let n = idx.mu * (idx.mu + 2);
    let (mut g, mut h) = (vec![0.0; n], vec![0.0; n]);
    ev.vsh_all(p, &mut g, &mut h);
    let k = idx.mu * idx.mu - 1 + (idx.nu + idx.mu as i64) as usize;
    (g[k], h[k])
}

/// The divergence-free vector harmonic `w_μ^ν(p) = L_p Y_μ^ν(p)`.
pub fn vsh_vector(idx: HarmonicIndex, p: &SpherePoint) -> Vector3<f64> {
    let (g, h) = vsh_components(idx, p);
    let f = tangent_frame(p);
    f.a * g + f.b * h
}

/// Matrix with one row per enumerated harmonic (degrees from 1) and, for point
/// `k`, the `G` values in column `2k` and `H` values in column `2k+1`.
pub fn y_matrix(enumeration: &HarmonicEnumeration, points: &[SpherePoint]) -> DMatrix<f64> {
    assert_eq!(enumeration.mu_min(), 1, "vector harmonic enumeration starts at degree 1");
    let rows = enumeration.len();
    let ev = HarmonicEvaluator::new(enumeration.mu_max());
    let mut data = vec![0.0; rows * 2 * points.len()];
    // column-major: each point owns a contiguous block of 2·rows entries
    par::for_each_chunk_mut(&mut data, 2 * rows, |k, chunk| {
        let (g, h) = chunk.split_at_mut(rows);
        ev.vsh_all(&points[k], g, h);
    });
    DMatrix::from_vec(rows, 2 * points.len(), data)
}

/// Scalar harmonics of degrees `mu_min..=mu_max` at each point, one column per point.
pub fn scalar_matrix(enumeration: &HarmonicEnumeration, points: &[SpherePoint]) -> DMatrix<f64> {
    let rows = enumeration.len();
    let ev = HarmonicEvaluator::new(enumeration.mu_max());
    let mut data = vec![0.0; rows * points.len()];
    par::for_each_chunk_mut(&mut data, rows.max(1), |k, chunk| {
        ev.scalar_all(&points[k], enumeration.mu_min(), chunk);
    });
    DMatrix::from_vec(rows, points.len(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::SpherePoint;

    fn pt(x: f64, y: f64, z: f64) -> SpherePoint {
        SpherePoint::new(x, y, z).unwrap()
    }

    fn idx(mu: usize, nu: i64) -> HarmonicIndex {
        HarmonicIndex::new(mu, nu).unwrap()
    }

    #[test]
    fn legendre_base_cases() {
        for z in [-1.0, 0.0, 0.5] {
            assert_eq!(assoc_legendre(1, 0, z).unwrap(), z);
        }
        assert_eq!(assoc_legendre(1, 1, 0.0).unwrap(), -1.0);
        assert!(assoc_legendre(2, 1, 1.5).is_err());
        assert!(assoc_legendre(1, 2, 0.1).is_err());
    }

    #[test]
    fn legendre_p53_closed_form() {
        // P_5^3(x) = -(105/2) (9x² - 1) (1 - x²)^{3/2}
        let x: f64 = 0.3;
        let exact = -52.5 * (9.0 * x * x - 1.0) * (1.0 - x * x).powf(1.5);
        let got = assoc_legendre(5, 3, x).unwrap();
        assert!(((got - exact) / exact).abs() < 1e-13, "{got} vs {exact}");
    }

    #[test]
    fn low_degree_values() {
        let c00 = (1.0 / (4.0 * PI)).sqrt();
        for p in [pt(1.0, 0.0, 0.0), pt(0.0, 0.6, 0.8), pt(0.0, 0.0, -1.0)] {
            assert!((scalar_y(idx(0, 0), &p) - c00).abs() < 1e-15);
        }
        let y10 = scalar_y(idx(1, 0), &pt(0.0, 0.0, 1.0));
        assert!((y10 - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((y10 - 0.4886025).abs() < 1e-7);
    }

    #[test]
    fn normalized_matches_unnormalized() {
        let p = pt(0.48, -0.6, 0.64);
        let lam = p.longitude();
        for mu in 0..8usize {
            for nu in -(mu as i64)..=(mu as i64) {
                let m = nu.unsigned_abs() as usize;
                let mut fac = 1.0;
                for k in (mu - m + 1)..=(mu + m) {
                    fac *= k as f64;
                }
                let norm = ((2 * mu + 1) as f64 / (4.0 * PI) / fac).sqrt();
                let p_um = assoc_legendre(mu, m, p.z()).unwrap();
                let expected = if nu >= 0 {
                    norm * p_um * (m as f64 * lam).cos()
                } else {
                    // P^{-m} reflection folded into the sign
                    parity(m) * norm * p_um * (m as f64 * lam).sin()
                };
                let got = scalar_y(idx(mu, nu), &p);
                assert!((got - expected).abs() < 1e-13, "mu={mu} nu={nu}");
            }
        }
    }

    #[test]
    fn y21_depends_on_cos_lambda() {
        let theta: f64 = 1.1;
        let base = scalar_y(idx(2, 1), &SpherePoint::from_spherical(theta, 0.0));
        for lam in [0.3, 1.2, 2.5, -0.7] {
            let v = scalar_y(idx(2, 1), &SpherePoint::from_spherical(theta, lam));
            assert!((v - base * lam.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn vsh_degree_one_zonal() {
        let p = pt(1.0, 0.0, 0.0);
        let (g, h) = vsh_components(idx(1, 0), &p);
        let c = (3.0 / (4.0 * PI)).sqrt();
        assert!(g.abs() < 1e-15);
        assert!((h + c).abs() < 1e-15);
        let w = vsh_vector(idx(1, 0), &p);
        assert!((w - Vector3::new(0.0, -c, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn enumeration_layout() {
        let e = HarmonicEnumeration::new(1, 3);
        assert_eq!(e.len(), 15);
        let all: Vec<_> = e.iter().collect();
        assert_eq!(all[0], idx(1, -1));
        assert_eq!(all[3], idx(2, -2));
        assert_eq!(all[14], idx(3, 3));
        for (k, h) in all.iter().enumerate() {
            assert_eq!(e.position(*h), Some(k));
        }
        let e2 = HarmonicEnumeration::new(2, 5);
        assert_eq!(e2.len(), 5 * 7 - 3);
    }

    #[test]
    fn y_matrix_shape_and_values() {
        let e = HarmonicEnumeration::new(1, 1);
        let p = pt(1.0, 0.0, 0.0);
        let y = y_matrix(&e, &[p]);
        assert_eq!(y.shape(), (3, 2));
        assert!(y[(1, 0)].abs() < 1e-15);
        assert!((y[(1, 1)] + 0.4886025).abs() < 1e-7);
        let y2 = y_matrix(&HarmonicEnumeration::new(1, 4), &[p, p]);
        assert_eq!(y2.column(0), y2.column(2));
        assert_eq!(y2.column(1), y2.column(3));
    }
}
