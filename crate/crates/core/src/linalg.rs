//! Dense kernels that the solvers share: column-chunked products and a blocked
//! upper-triangular solve, both split across the thread pool, plus extreme
//! eigenvalue estimates for SPD matrices.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::par;

/// Columns per work item in the chunked kernels.
const COLUMN_CHUNK: usize = 256;
/// Diagonal block size for the blocked triangular solve.
const TRI_BLOCK: usize = 96;

/// Splits `cols` columns into contiguous ranges of at most `COLUMN_CHUNK`.
fn column_ranges(cols: usize) -> Vec<(usize, usize)> {
    (0..cols)
        .step_by(COLUMN_CHUNK)
        .map(|start| (start, (start + COLUMN_CHUNK).min(cols)))
        .collect()
}

fn assemble_columns(rows: usize, cols: usize, pieces: Vec<DMatrix<f64>>) -> DMatrix<f64> {
    let mut data = Vec::with_capacity(rows * cols);
    for p in pieces {
        data.extend_from_slice(p.as_slice());
    }
    DMatrix::from_vec(rows, cols, data)
}

/// `a * b`, computed one block of `b`'s columns per work item.
pub fn matmul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.nrows());
    let ranges = column_ranges(b.ncols());
    let pieces = par::map(&ranges, |&(s, e)| a * b.columns(s, e - s));
    assemble_columns(a.nrows(), b.ncols(), pieces)
}

/// Solves `r x = rhs` in place for upper-triangular `r`.
///
/// Work is split across column blocks of `rhs`; inside a block the solve runs
/// bottom-up over `TRI_BLOCK`-sized diagonal blocks with matrix-product updates.
pub fn solve_upper_in_place(r: &DMatrix<f64>, rhs: &mut DMatrix<f64>) {
    let n = r.nrows();
    assert_eq!(r.ncols(), n);
    assert_eq!(rhs.nrows(), n);
    if rhs.ncols() == 0 || n == 0 {
        return;
    }
    let chunk_len = COLUMN_CHUNK * n;
    par::for_each_chunk_mut(rhs.as_mut_slice(), chunk_len, |_, chunk| {
        let cols = chunk.len() / n;
        let mut x = DMatrix::from_column_slice(n, cols, chunk);
        let mut end = n;
        while end > 0 {
            let start = end.saturating_sub(TRI_BLOCK);
            let size = end - start;
            let diag = r.view((start, start), (size, size));
            {
                let mut xb = x.rows_mut(start, size);
                let ok = diag.solve_upper_triangular_mut(&mut xb);
                debug_assert!(ok);
            }
            if start > 0 {
                let solved = x.rows(start, size).into_owned();
                let above = r.view((0, start), (start, size));
                x.rows_mut(0, start).gemm(-1.0, &above, &solved, 1.0);
            }
            end = start;
        }
        chunk.copy_from_slice(x.as_slice());
    });
}

/// Deterministic, non-symmetric start vector for power iterations.
fn start_vector(n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 113) as f64 / 113.0);
    let norm = v.norm();
    v / norm
}

/// Estimates `λ_max / λ_min` of an SPD matrix from power and inverse
/// iterations (the latter through its Cholesky factor). The estimate
/// approaches the 2-norm condition number from below.
pub fn spd_condition_estimate(a: &DMatrix<f64>, chol: &Cholesky<f64, Dyn>, iterations: usize) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    let mut v = start_vector(n);
    let mut lmax = 0.0;
    for _ in 0..iterations {
        let w = a * &v;
        lmax = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        v = w / norm;
    }
    let mut v = start_vector(n);
    let mut inv_max = 0.0;
    for _ in 0..iterations {
        let w = chol.solve(&v);
        inv_max = v.dot(&w);
        let norm = w.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return f64::INFINITY;
        }
        v = w / norm;
    }
    if inv_max <= 0.0 {
        return f64::INFINITY;
    }
    lmax * inv_max
}
