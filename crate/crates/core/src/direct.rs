//! RBF-Direct: the matrix-valued divergence-free kernel and its `2n × 2n`
//! tangent-frame interpolation system.
//!
//! The kernel is `Φ(x, y) = σ Q(x) (F I + G2 d dᵀ) Q(y)` with `d = x - y`,
//! `(F, G2)` the radial Hessian factors of `φ` and `σ` the kernel's
//! definiteness sign. Unknowns are the tangent-frame components `(α_j, β_j)`
//! of the coefficient vectors `c_j = α_j a_j + β_j b_j`.

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};

use crate::error::{Error, Result};
use crate::geom::{min_separation, reconstruct_vector, tangent_frame, SpherePoint, TangentFrame};
use crate::kernels::KernelConfig;
use crate::linalg;
use crate::par;

/// Nodes closer than this (chordal) are considered duplicates.
pub const MIN_NODE_SEPARATION: f64 = 1e-10;

/// Relative tangency slack for sampled vectors.
pub const TANGENCY_TOL: f64 = 1e-8;

/// Power/inverse iterations used for the condition estimate.
const CONDITION_ITERATIONS: usize = 60;

/// Nodes with sampled tangent vectors in meridional/zonal components.
#[derive(Debug, Clone)]
pub struct TangentFieldSamples {
    nodes: Vec<SpherePoint>,
    comps: Vec<(f64, f64)>,
}

impl TangentFieldSamples {
    pub fn new(nodes: Vec<SpherePoint>, comps: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("no sample nodes".into()));
        }
        if nodes.len() != comps.len() {
            return Err(Error::InvalidArgument(format!(
                "{} nodes but {} sampled vectors",
                nodes.len(),
                comps.len()
            )));
        }
        if min_separation(&nodes) <= MIN_NODE_SEPARATION {
            return Err(Error::InvalidArgument("duplicate sample nodes".into()));
        }
        Ok(Self { nodes, comps })
    }

    /// Samples from Cartesian vectors, which must be tangent within
    /// `TANGENCY_TOL` relative to their length.
    pub fn from_vectors(nodes: Vec<SpherePoint>, vectors: &[Vector3<f64>]) -> Result<Self> {
        let mut comps = Vec::with_capacity(vectors.len());
        for (i, (p, u)) in nodes.iter().zip(vectors).enumerate() {
            let normal = p.vector().dot(u).abs();
            if normal > TANGENCY_TOL * u.norm() {
                return Err(Error::InvalidArgument(format!(
                    "sample {i} is not tangent (normal component {normal:e})"
                )));
            }
            comps.push(tangent_frame(p).components(u));
        }
        Self::new(nodes, comps)
    }

    /// Samples a tangent field given as a function of position.
    pub fn from_field<F>(nodes: Vec<SpherePoint>, field: F) -> Result<Self>
    where
        F: Fn(&SpherePoint) -> Vector3<f64> + Sync + Send,
    {
        let comps = par::map(&nodes, |p| tangent_frame(p).components(&field(p)));
        Self::new(nodes, comps)
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn comps(&self) -> &[(f64, f64)] {
        &self.comps
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Right-hand side `[γ_1, δ_1, γ_2, δ_2, …]`.
    pub fn interleaved(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.len(), self.comps.iter().flat_map(|&(g, d)| [g, d]))
    }

    /// The sampled vectors in Cartesian form.
    pub fn vectors(&self) -> Vec<Vector3<f64>> {
        self.nodes
            .iter()
            .zip(&self.comps)
            .map(|(p, &c)| reconstruct_vector(&tangent_frame(p), c))
            .collect()
    }
}

/// Row/column vectors such that the tangent block is `p_iᵀ (F I + G2 d dᵀ) q_j`:
/// `[aᵀ; bᵀ] Q(x) = [bᵀ; -aᵀ]` and `Q(y) [a b] = [-b a]`.
#[inline]
fn block_from_frames(
    sign: f64,
    (f, g2): (f64, f64),
    d: &Vector3<f64>,
    fx: &TangentFrame,
    fy: &TangentFrame,
) -> Matrix2<f64> {
    let p = [fx.b, -fx.a];
    let q = [-fy.b, fy.a];
    let pd = [p[0].dot(d), p[1].dot(d)];
    let qd = [q[0].dot(d), q[1].dot(d)];
    Matrix2::from_fn(|i, j| sign * (f * p[i].dot(&q[j]) + g2 * pd[i] * qd[j]))
}

/// The 2×2 tangent-frame block `[a_x b_x]ᵀ Φ(x, y) [a_y b_y]`.
pub fn kernel_block(config: &KernelConfig, x: &SpherePoint, y: &SpherePoint) -> Matrix2<f64> {
    let d = x.vector() - y.vector();
    block_from_frames(
        config.definiteness_sign(),
        config.radial_factors(d.norm()),
        &d,
        &tangent_frame(x),
        &tangent_frame(y),
    )
}

/// The full 3×3 kernel `Φ(x, y)`.
pub fn kernel_matrix(config: &KernelConfig, x: &SpherePoint, y: &SpherePoint) -> nalgebra::Matrix3<f64> {
    let d = x.vector() - y.vector();
    let (f, g2) = config.radial_factors(d.norm());
    let hess = nalgebra::Matrix3::identity() * f + d * d.transpose() * g2;
    config.definiteness_sign() * crate::geom::cross_matrix(x) * hess * crate::geom::cross_matrix(y)
}

/// The `2n × 2n` interpolation matrix with block `(i, j)` equal to
/// `kernel_block(nodes[i], nodes[j])`.
pub fn assemble_system(config: &KernelConfig, nodes: &[SpherePoint]) -> DMatrix<f64> {
    let n = nodes.len();
    let frames: Vec<TangentFrame> = nodes.iter().map(tangent_frame).collect();
    let sign = config.definiteness_sign();
    let mut data = vec![0.0; 4 * n * n];
    // column-major: node j owns columns 2j and 2j+1, i.e. 4n contiguous entries
    par::for_each_chunk_mut(&mut data, 4 * n, |j, cols| {
        let (c0, c1) = cols.split_at_mut(2 * n);
        for i in 0..n {
            let d = nodes[i].vector() - nodes[j].vector();
            let blk = block_from_frames(sign, config.radial_factors(d.norm()), &d, &frames[i], &frames[j]);
            c0[2 * i] = blk[(0, 0)];
            c0[2 * i + 1] = blk[(1, 0)];
            c1[2 * i] = blk[(0, 1)];
            c1[2 * i + 1] = blk[(1, 1)];
        }
    });
    DMatrix::from_vec(2 * n, 2 * n, data)
}

/// A fitted RBF-Direct interpolant.
#[derive(Debug, Clone)]
pub struct DirectInterpolant {
    config: KernelConfig,
    nodes: Vec<SpherePoint>,
    frames: Vec<TangentFrame>,
    coeffs: Vec<(f64, f64)>,
    // y_j × c_j, reused by evaluation and the stream function
    rotated: Vec<Vector3<f64>>,
    residual: f64,
    condition: f64,
}

impl DirectInterpolant {
    fn from_coeffs(config: KernelConfig, nodes: Vec<SpherePoint>, coeffs: Vec<(f64, f64)>) -> Self {
        let frames: Vec<TangentFrame> = nodes.iter().map(tangent_frame).collect();
        let rotated = nodes
            .iter()
            .zip(&frames)
            .zip(&coeffs)
            .map(|((y, f), &c)| y.vector().cross(&reconstruct_vector(f, c)))
            .collect();
        Self {
            config,
            nodes,
            frames,
            coeffs,
            rotated,
            residual: 0.0,
            condition: f64::NAN,
        }
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn frames(&self) -> &[TangentFrame] {
        &self.frames
    }

    /// Tangent-frame coefficients `(α_j, β_j)`.
    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    /// `max_i |(A c - rhs)_i| / max_i |rhs_i|` at fit time (absolute when the
    /// right-hand side vanishes).
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Estimated 2-norm condition number of the interpolation matrix.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }
}

/// Solves the tangent-frame system by Cholesky. Loss of positive
/// definiteness in floating point surfaces as [`Error::NotPositiveDefinite`].
pub fn fit_direct(config: &KernelConfig, samples: &TangentFieldSamples) -> Result<DirectInterpolant> {
    let a = assemble_system(config, samples.nodes());
    let rhs = samples.interleaved();
    let chol = a.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let sol = chol.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let scale = rhs.amax();
    let res = (&a * &sol - &rhs).amax();
    let coeffs = sol.as_slice().chunks(2).map(|c| (c[0], c[1])).collect();
    let mut interp = DirectInterpolant::from_coeffs(*config, samples.nodes().to_vec(), coeffs);
    interp.residual = if scale > 0.0 { res / scale } else { res };
    interp.condition = linalg::spd_condition_estimate(&a, &chol, CONDITION_ITERATIONS);
    Ok(interp)
}

/// `s(x) = Σ_j Φ(x, y_j) c_j`.
pub fn eval_direct(interp: &DirectInterpolant, x: &SpherePoint) -> Vector3<f64> {
    let xv = x.vector();
    let mut acc = Vector3::zeros();
    for (y, r) in interp.nodes.iter().zip(&interp.rotated) {
        let d = xv - y.vector();
        let (f, g2) = interp.config.radial_factors(d.norm());
        acc += r * f + d * (g2 * d.dot(r));
    }
    interp.config.definiteness_sign() * xv.cross(&acc)
}

/// Stream function `ψ(x) = Σ_j ∇ₓφ(‖x - y_j‖)ᵀ Q(y_j) c_j`, so that `L ψ = s`.
pub fn stream_direct(interp: &DirectInterpolant, x: &SpherePoint) -> f64 {
    let xv = x.vector();
    let mut acc = 0.0;
    for (y, r) in interp.nodes.iter().zip(&interp.rotated) {
        let d = xv - y.vector();
        let (f, _) = interp.config.radial_factors(d.norm());
        acc += f * d.dot(r);
    }
    interp.config.definiteness_sign() * acc
}

impl DirectInterpolant {
    /// Field values at many points.
    pub fn eval_many(&self, points: &[SpherePoint]) -> Vec<Vector3<f64>> {
        par::map(points, |p| eval_direct(self, p))
    }

    /// Stream function values at many points.
    pub fn stream_many(&self, points: &[SpherePoint]) -> Vec<f64> {
        par::map(points, |p| stream_direct(self, p))
    }
}
