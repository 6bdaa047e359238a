//! Vector RBF-QR.
//!
//! The kernel expansion `Φ(x, y_j) c_j` is written as `Ψ(x) = B E Y(x)` with
//! `B` holding the expansion coefficients times the vector harmonics at the
//! nodes, `E` the powers `ε^{2μ}` and `Y(x)` the harmonics at `x`. A QR
//! factorization of `B` lets the ill-conditioned `E` be removed analytically:
//! the same span is generated by `B̃ Y(x)` with
//!
//! ```text
//! B̃ = [ I | (R₁⁻¹ R₂) ∘ Ẽ ],   Ẽ_ij = ε^{2(deg(2n+j) - deg(i))}
//! ```
//!
//! Every exponent in `Ẽ` is a nonnegative degree difference, so nothing here
//! divides by a power of `ε`.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::direct::TangentFieldSamples;
use crate::error::{Error, Result};
use crate::geom::{reconstruct_vector, tangent_frame, SpherePoint, TangentFrame};
use crate::harmonics::{y_matrix, HarmonicEnumeration, HarmonicEvaluator};
use crate::kernels::{build_truncation_plan, CoefficientTable, KernelConfig, TruncationOptions, TruncationPlan};
use crate::linalg;
use crate::par;

/// `R₁` diagonal entries relative to their column norms below this mark the
/// node set as not unisolvent.
pub const UNISOLVENCY_TOL: f64 = 1e-13;

/// Column scale of `B`: `c_{μ,ε}`, halved for `ν = 0`.
fn column_scales(table: &CoefficientTable, enumeration: &HarmonicEnumeration) -> Vec<f64> {
    enumeration
        .iter()
        .map(|h| {
            let c = table.values[h.mu];
            if h.nu == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// The `2n × m` matrix `B`: row pair `(2i, 2i+1)` holds `(G, H)` at node `i`
/// and the column of harmonic `(μ, ν)` is scaled by `c_{μ,ε}` (`c_{μ,ε}/2` when
/// `ν = 0`). No `ε^{2μ}` factors are included.
pub fn assemble_b(config: &KernelConfig, nodes: &[SpherePoint], plan: &TruncationPlan) -> Result<DMatrix<f64>> {
    let enumeration = HarmonicEnumeration::new(1, plan.mu_trunc);
    let table = CoefficientTable::new(*config, plan.mu_trunc)?;
    let scales = column_scales(&table, &enumeration);
    let y = y_matrix(&enumeration, nodes);
    Ok(DMatrix::from_fn(2 * nodes.len(), enumeration.len(), |r, k| scales[k] * y[(k, r)]))
}

/// Exponents of `ε` in `Ẽ`: entry `(i, j)` is `2 (deg(2n+j) - deg(i))` where
/// `deg` is the degree of a column of `B`.
pub fn epsilon_exponents(plan: &TruncationPlan, n: usize) -> DMatrix<u32> {
    let deg = &plan.degree_of_column;
    let lead = 2 * n;
    assert!(deg.len() >= lead, "truncation leaves fewer than 2n columns");
    DMatrix::from_fn(lead, deg.len() - lead, |i, j| {
        let (dr, dc) = (deg[i], deg[lead + j]);
        debug_assert!(dc >= dr);
        2 * (dc - dr) as u32
    })
}

/// `ε^{2k}` for `k = 0..=kmax`, with `k = 0` exactly one.
fn even_powers(epsilon: f64, kmax: usize) -> Vec<f64> {
    let ln_eps = epsilon.ln();
    (0..=kmax)
        .map(|k| if k == 0 { 1.0 } else { (2.0 * k as f64 * ln_eps).exp() })
        .collect()
}

/// The stable basis `B̃ Y(x)`. Only the trailing block of `B̃` is stored; the
/// leading `2n × 2n` block is the identity.
#[derive(Debug, Clone)]
pub struct StableBasis {
    config: KernelConfig,
    nodes: Vec<SpherePoint>,
    frames: Vec<TangentFrame>,
    plan: TruncationPlan,
    enumeration: HarmonicEnumeration,
    evaluator: HarmonicEvaluator,
    trailing: DMatrix<f64>,
    r1_diag_ratio: f64,
    unisolvency_ratio: f64,
}

impl StableBasis {
    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn frames(&self) -> &[TangentFrame] {
        &self.frames
    }

    pub fn plan(&self) -> &TruncationPlan {
        &self.plan
    }

    pub fn enumeration(&self) -> &HarmonicEnumeration {
        &self.enumeration
    }

    /// Number of stable basis functions, `2n`.
    pub fn dim(&self) -> usize {
        2 * self.nodes.len()
    }

    /// `(R₁⁻¹ R₂) ∘ Ẽ`.
    pub fn trailing_block(&self) -> &DMatrix<f64> {
        &self.trailing
    }

    /// The full `2n × m` matrix `[I | trailing]`.
    pub fn bt(&self) -> DMatrix<f64> {
        let lead = self.dim();
        let mut out = DMatrix::zeros(lead, lead + self.trailing.ncols());
        out.view_mut((0, 0), (lead, lead)).fill_with_identity();
        out.view_mut((0, lead), self.trailing.shape()).copy_from(&self.trailing);
        out
    }

    /// `min |R₁_kk| / max |R₁_kk|`, a cheap reciprocal condition indicator.
    pub fn r1_diag_ratio(&self) -> f64 {
        self.r1_diag_ratio
    }

    /// `min_k |R₁_kk| / ‖B_{:,k}‖`, the quantity the unisolvency check uses.
    pub fn unisolvency_ratio(&self) -> f64 {
        self.unisolvency_ratio
    }

    /// `B̃ v` for an `m`-vector `v`.
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let lead = self.dim();
        let mut out = v.rows(0, lead).into_owned();
        out.gemv(1.0, &self.trailing, &v.rows(lead, v.len() - lead), 1.0);
        out
    }

    /// `B̃ᵀ u` for a `2n`-vector `u`.
    fn apply_transpose(&self, u: &DVector<f64>) -> DVector<f64> {
        let lead = self.dim();
        let mut out = DVector::zeros(lead + self.trailing.ncols());
        out.rows_mut(0, lead).copy_from(u);
        out.rows_mut(lead, self.trailing.ncols())
            .gemv_tr(1.0, &self.trailing, u, 0.0);
        out
    }

    fn harmonics_at(&self, x: &SpherePoint) -> (DVector<f64>, DVector<f64>) {
        let m = self.enumeration.len();
        let mut g = DVector::zeros(m);
        let mut h = DVector::zeros(m);
        self.evaluator.vsh_all(x, g.as_mut_slice(), h.as_mut_slice());
        (g, h)
    }

    fn scalar_harmonics_at(&self, x: &SpherePoint) -> DVector<f64> {
        let mut y = DVector::zeros(self.enumeration.len());
        self.evaluator.scalar_all(x, 1, y.as_mut_slice());
        y
    }
}

/// Builds the stable basis with the default truncation options.
pub fn build_stable_basis(config: &KernelConfig, nodes: &[SpherePoint]) -> Result<StableBasis> {
    build_stable_basis_with(config, nodes, TruncationOptions::default())
}

pub fn build_stable_basis_with(
    config: &KernelConfig,
    nodes: &[SpherePoint],
    opts: TruncationOptions,
) -> Result<StableBasis> {
    let n = nodes.len();
    let plan = build_truncation_plan(config, n, opts)?;
    let lead = 2 * n;
    let enumeration = HarmonicEnumeration::new(1, plan.mu_trunc);
    let m = enumeration.len();
    let table = CoefficientTable::new(*config, plan.mu_trunc)?;
    let scales = column_scales(&table, &enumeration);

    // B split into its leading and trailing column blocks, built straight from Yᵀ.
    let (b1, mut x) = {
        let y = y_matrix(&enumeration, nodes);
        let b1 = DMatrix::from_fn(lead, lead, |r, k| scales[k] * y[(k, r)]);
        let b2 = DMatrix::from_fn(lead, m - lead, |r, k| scales[lead + k] * y[(lead + k, r)]);
        (b1, b2)
    };
    let col_norms: Vec<f64> = b1.column_iter().map(|c| c.norm()).collect();

    let qr = b1.qr();
    let r1 = qr.r();
    let q = qr.q();
    drop(qr);

    let diag: Vec<f64> = (0..lead).map(|k| r1[(k, k)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let r1_diag_ratio = if dmax > 0.0 { dmin / dmax } else { 0.0 };
    let unisolvency_ratio = diag
        .iter()
        .zip(&col_norms)
        .map(|(&d, &c)| if c > 0.0 { d / c } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    if !(unisolvency_ratio >= UNISOLVENCY_TOL) {
        return Err(Error::NotUnisolvent {
            ratio: unisolvency_ratio,
        });
    }

    if m > lead {
        // R₂ = Qᵀ B₂, then X = R₁⁻¹ R₂ in place.
        x = linalg::matmul(&q.transpose(), &x);
        drop(q);
        linalg::solve_upper_in_place(&r1, &mut x);

        let deg = &plan.degree_of_column;
        let powers = even_powers(config.epsilon(), plan.mu_trunc);
        let rows = lead;
        par::for_each_chunk_mut(x.as_mut_slice(), rows, |j, col| {
            let dc = deg[lead + j];
            for (i, v) in col.iter_mut().enumerate() {
                let e = powers[dc - deg[i]];
                // 0 · ∞ cannot arise: powers are finite for the degrees in play
                *v *= e;
            }
        });
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
    }

    Ok(StableBasis {
        config: *config,
        nodes: nodes.to_vec(),
        frames: nodes.iter().map(tangent_frame).collect(),
        evaluator: HarmonicEvaluator::new(plan.mu_trunc),
        plan,
        enumeration,
        trailing: x,
        r1_diag_ratio,
        unisolvency_ratio,
    })
}

/// `B̃ Y(x)`: row `k` holds the tangent-frame components of the `k`-th stable
/// basis function at `x`.
pub fn basis_eval(basis: &StableBasis, x: &SpherePoint) -> DMatrix<f64> {
    let (g, h) = basis.harmonics_at(x);
    let mut out = DMatrix::zeros(basis.dim(), 2);
    out.set_column(0, &basis.apply(&g));
    out.set_column(1, &basis.apply(&h));
    out
}

/// A fitted vector RBF-QR interpolant.
#[derive(Debug, Clone)]
pub struct QRInterpolant {
    basis: StableBasis,
    coeffs: DVector<f64>,
    // B̃ᵀ coeffs: weights on the raw harmonics
    weights: DVector<f64>,
    residual: f64,
}

impl QRInterpolant {
    pub fn basis(&self) -> &StableBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    /// `max_i |(M c - rhs)_i| / max_i |rhs_i|` at fit time (absolute when the
    /// right-hand side vanishes).
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn eval_many(&self, points: &[SpherePoint]) -> Vec<Vector3<f64>> {
        par::map(points, |p| eval_qr(self, p))
    }

    pub fn stream_many(&self, points: &[SpherePoint]) -> Vec<f64> {
        par::map(points, |p| stream_qr(self, p))
    }
}

/// Fits the stable-basis coefficients by a partially pivoted LU solve of the
/// `2n × 2n` collocation matrix.
pub fn fit_qr(basis: StableBasis, samples: &TangentFieldSamples) -> Result<QRInterpolant> {
    if samples.len() != basis.nodes.len() {
        return Err(Error::InvalidArgument(format!(
            "{} samples for a basis on {} nodes",
            samples.len(),
            basis.nodes.len()
        )));
    }
    if samples.nodes().iter().zip(&basis.nodes).any(|(a, b)| a != b) {
        return Err(Error::InvalidArgument("samples are not on the basis nodes".into()));
    }
    let lead = basis.dim();
    // Mᵀ = B̃ Y(nodes) = Y₁ + T Y₂
    let y = y_matrix(&basis.enumeration, &basis.nodes);
    let mut mt = y.rows(0, lead).into_owned();
    if y.nrows() > lead {
        let y2 = y.rows(lead, y.nrows() - lead).into_owned();
        drop(y);
        let prod = linalg::matmul(&basis.trailing, &y2);
        mt += prod;
    }
    let m = mt.transpose();
    let rhs = samples.interleaved();
    let lu = m.clone().lu();
    let sol = lu.solve(&rhs).ok_or(Error::Singular)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    let scale = rhs.amax();
    let res = (&m * &sol - &rhs).amax();
    let weights = basis.apply_transpose(&sol);
    Ok(QRInterpolant {
        basis,
        coeffs: sol,
        weights,
        residual: if scale > 0.0 { res / scale } else { res },
    })
}

/// Interpolant value at `x`, tangent by construction.
pub fn eval_qr(interp: &QRInterpolant, x: &SpherePoint) -> Vector3<f64> {
    let (g, h) = interp.basis.harmonics_at(x);
    let comps = (interp.weights.dot(&g), interp.weights.dot(&h));
    reconstruct_vector(&tangent_frame(x), comps)
}

/// Stream function: the same combination of scalar harmonics, since each
/// vector harmonic is `L` applied to its scalar counterpart.
pub fn stream_qr(interp: &QRInterpolant, x: &SpherePoint) -> f64 {
    interp.weights.dot(&interp.basis.scalar_harmonics_at(x))
}
