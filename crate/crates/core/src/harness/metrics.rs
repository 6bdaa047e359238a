//! Error metrics over a set of evaluation points.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::{tangent_frame, SpherePoint};

/// Truth magnitudes below this make a relative error meaningless.
pub const DEGENERATE_TRUTH: f64 = 1e-300;

/// `max ‖approx - truth‖ / max ‖truth‖` over paired values.
pub fn relative_max_error_values(approx: &[Vector3<f64>], truth: &[Vector3<f64>]) -> Result<f64> {
    check_lengths(approx.len(), truth.len())?;
    let denom = truth.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if !(denom >= DEGENERATE_TRUTH) {
        return Err(Error::DegenerateTruth);
    }
    let num = approx
        .iter()
        .zip(truth)
        .map(|(a, t)| (a - t).norm())
        .fold(0.0, f64::max);
    Ok(num / denom)
}

/// Relative max-norm field error of `approx` against `truth` at `points`.
pub fn relative_max_error<A, T>(approx: A, truth: T, points: &[SpherePoint]) -> Result<f64>
where
    A: Fn(&SpherePoint) -> Vector3<f64>,
    T: Fn(&SpherePoint) -> Vector3<f64>,
{
    let a: Vec<_> = points.iter().map(approx).collect();
    let t: Vec<_> = points.iter().map(truth).collect();
    relative_max_error_values(&a, &t)
}

/// Stream-function error after aligning the means: `approx` is shifted by
/// `mean(truth) - mean(approx)` and the max deviation is divided by
/// `max |truth - mean(truth)|`.
pub fn stream_error_values(approx: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(approx.len(), truth.len())?;
    let n = truth.len() as f64;
    let mean_t = truth.iter().sum::<f64>() / n;
    let mean_a = approx.iter().sum::<f64>() / n;
    let denom = truth.iter().map(|t| (t - mean_t).abs()).fold(0.0, f64::max);
    if !(denom >= DEGENERATE_TRUTH) {
        return Err(Error::DegenerateTruth);
    }
    let shift = mean_t - mean_a;
    let num = approx
        .iter()
        .zip(truth)
        .map(|(a, t)| (a + shift - t).abs())
        .fold(0.0, f64::max);
    Ok(num / denom)
}

pub fn stream_error<A, T>(approx: A, truth: T, points: &[SpherePoint]) -> Result<f64>
where
    A: Fn(&SpherePoint) -> f64,
    T: Fn(&SpherePoint) -> f64,
{
    let a: Vec<_> = points.iter().map(approx).collect();
    let t: Vec<_> = points.iter().map(truth).collect();
    stream_error_values(&a, &t)
}

/// `L ψ = x × ∇ψ` at `p` from central differences of `ψ` along geodesics in
/// the two tangent-frame directions, with arc step `h`.
pub fn surface_curl_fd<F>(psi: F, p: &SpherePoint, h: f64) -> Vector3<f64>
where
    F: Fn(&SpherePoint) -> f64,
{
    let frame = tangent_frame(p);
    let d = |t: &Vector3<f64>| (psi(&p.geodesic_step(t, h)) - psi(&p.geodesic_step(t, -h))) / (2.0 * h);
    let (da, db) = (d(&frame.a), d(&frame.b));
    frame.a * db - frame.b * da
}

fn check_lengths(a: usize, t: usize) -> Result<()> {
    if a != t {
        return Err(Error::InvalidArgument(format!("{a} approximations for {t} reference values")));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    Ok(())
}
