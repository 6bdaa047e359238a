//! ε-sweeps comparing RBF-Direct against vector RBF-QR on one node set.

use std::fmt;
use std::str::FromStr;

use crate::direct::{fit_direct, TangentFieldSamples};
use crate::error::{Error, Result};
use crate::geom::{hammersley_nodes, SpherePoint};
use crate::harness::metrics::{relative_max_error_values, stream_error_values};
use crate::harness::target::TargetField;
use crate::kernels::{KernelConfig, KernelKind, TruncationOptions};
use crate::rbfqr::{build_stable_basis_with, fit_qr};

/// Which solvers a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Qr,
    Both,
}

impl Method {
    pub fn runs_direct(self) -> bool {
        matches!(self, Method::Direct | Method::Both)
    }

    pub fn runs_qr(self) -> bool {
        matches!(self, Method::Qr | Method::Both)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "qr" => Ok(Method::Qr),
            "both" => Ok(Method::Both),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Where interpolants are compared against the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPoints {
    /// `hammersley_nodes(4n)`.
    Hammersley4n,
    /// Cell-centred latitude/longitude grid.
    Grid { nlat: usize, nlon: usize },
}

impl EvalPoints {
    pub fn points(&self, n: usize) -> Vec<SpherePoint> {
        match *self {
            EvalPoints::Hammersley4n => hammersley_nodes(4 * n),
            EvalPoints::Grid { nlat, nlon } => {
                let mut pts = Vec::with_capacity(nlat * nlon);
                for i in 0..nlat {
                    let theta = (i as f64 + 0.5) * std::f64::consts::PI / nlat as f64;
                    for j in 0..nlon {
                        let lambda = 2.0 * std::f64::consts::PI * j as f64 / nlon as f64;
                        pts.push(SpherePoint::from_spherical(theta, lambda));
                    }
                }
                pts
            }
        }
    }
}

impl fmt::Display for EvalPoints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalPoints::Hammersley4n => f.write_str("hammersley4n"),
            EvalPoints::Grid { nlat, nlon } => write!(f, "grid:{nlat}x{nlon}"),
        }
    }
}

impl FromStr for EvalPoints {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "hammersley4n" {
            return Ok(EvalPoints::Hammersley4n);
        }
        let bad = || Error::InvalidArgument(format!("bad evaluation set `{s}`"));
        let dims = s.strip_prefix("grid:").ok_or_else(bad)?;
        let (a, b) = dims.split_once('x').ok_or_else(bad)?;
        let nlat: usize = a.parse().map_err(|_| bad())?;
        let nlon: usize = b.parse().map_err(|_| bad())?;
        if nlat == 0 || nlon == 0 {
            return Err(bad());
        }
        Ok(EvalPoints::Grid { nlat, nlon })
    }
}

/// Parses `a,b,c` or the geometric range `lo:hi:count`, returned in
/// descending order.
pub fn parse_epsilons(s: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::InvalidArgument(format!("bad epsilon list `{s}`: {m}"));
    let mut eps: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:count"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad("lo"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad("hi"))?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad("count"))?;
        if !(lo > 0.0 && hi >= lo) || count == 0 {
            return Err(bad("need 0 < lo <= hi and count >= 1"));
        }
        geometric_grid(lo, hi, count)
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad(t)))
            .collect::<Result<_>>()?
    };
    if let Some(&e) = eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidEpsilon(e));
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    Ok(eps)
}

/// `count` values from `hi` down to `lo`, equally spaced in `ln ε`. The end
/// points are exact.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..count)
        .map(|k| match k {
            0 => hi,
            k if k == count - 1 => lo,
            k => (a + (b - a) * k as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// Outcome of one solver at one ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotSpd,
    NotUnisolvent,
    Singular,
    TruncationCap,
    NonFinite,
    Skipped,
    Failed,
}

impl Status {
    pub fn code(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NotSpd => "not_spd",
            Status::NotUnisolvent => "not_unisolvent",
            Status::Singular => "singular",
            Status::TruncationCap => "truncation_cap",
            Status::NonFinite => "nonfinite",
            Status::Skipped => "skipped",
            Status::Failed => "failed",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        [
            Status::Ok,
            Status::NotSpd,
            Status::NotUnisolvent,
            Status::Singular,
            Status::TruncationCap,
            Status::NonFinite,
            Status::Skipped,
            Status::Failed,
        ]
        .into_iter()
        .find(|st| st.code() == s)
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::NotPositiveDefinite => Status::NotSpd,
            Error::NotUnisolvent { .. } => Status::NotUnisolvent,
            Error::Singular => Status::Singular,
            Error::TruncationCap { .. } => Status::TruncationCap,
            _ => Status::Failed,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Errors of one solver at one ε. Numbers are present only when `status` is `Ok`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOutcome {
    pub status: Status,
    pub err_field: Option<f64>,
    pub err_stream: Option<f64>,
    pub residual: Option<f64>,
}

impl MethodOutcome {
    fn failed(status: Status) -> Self {
        Self {
            status,
            err_field: None,
            err_stream: None,
            residual: None,
        }
    }

    fn from_values(
        residual: f64,
        field: &[nalgebra::Vector3<f64>],
        stream: &[f64],
        truth: &Truth,
    ) -> Result<Self> {
        let ef = relative_max_error_values(field, &truth.field)?;
        let es = stream_error_values(stream, &truth.stream)?;
        if !(ef.is_finite() && es.is_finite() && residual.is_finite()) {
            return Ok(Self::failed(Status::NonFinite));
        }
        Ok(Self {
            status: Status::Ok,
            err_field: Some(ef),
            err_stream: Some(es),
            residual: Some(residual),
        })
    }
}

/// One ε of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub direct: MethodOutcome,
    pub qr: MethodOutcome,
    pub cond_direct: Option<f64>,
}

/// Settings recorded alongside the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMeta {
    pub kernel: KernelKind,
    pub n: usize,
    pub node_source: String,
    pub eval_source: String,
    pub eval_count: usize,
    pub target: String,
    pub tol: f64,
    pub mu_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub meta: SweepMeta,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// True when no requested solver produced a row with status `Ok`.
    pub fn all_failed(&self) -> bool {
        !self
            .rows
            .iter()
            .any(|r| r.direct.status == Status::Ok || r.qr.status == Status::Ok)
    }
}

/// Inputs to [`run_sweep`] beyond the node set and target.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub kernel: KernelKind,
    pub epsilons: Vec<f64>,
    pub method: Method,
    pub truncation: TruncationOptions,
    pub node_source: String,
    pub eval_source: String,
}

impl SweepSettings {
    pub fn new(kernel: KernelKind, epsilons: Vec<f64>) -> Self {
        Self {
            kernel,
            epsilons,
            method: Method::Both,
            truncation: TruncationOptions::default(),
            node_source: "custom".into(),
            eval_source: "custom".into(),
        }
    }
}

struct Truth {
    field: Vec<nalgebra::Vector3<f64>>,
    stream: Vec<f64>,
}

/// Fits both solvers for each ε and scores them against `target` at
/// `eval_points`. Solver failures become row statuses; only invalid inputs
/// (empty sets, a degenerate target) are errors.
pub fn run_sweep(
    settings: &SweepSettings,
    nodes: &[SpherePoint],
    target: &TargetField,
    eval_points: &[SpherePoint],
) -> Result<SweepReport> {
    if eval_points.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    let samples = TangentFieldSamples::from_field(nodes.to_vec(), |p| target.field(p))?;
    let truth = Truth {
        field: eval_points.iter().map(|p| target.field(p)).collect(),
        stream: eval_points.iter().map(|p| target.stream(p)).collect(),
    };
    // Validates the target before any solver runs.
    relative_max_error_values(&truth.field, &truth.field)?;
    stream_error_values(&truth.stream, &truth.stream)?;

    let mut epsilons = settings.epsilons.clone();
    epsilons.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in &epsilons {
        let config = KernelConfig::new(settings.kernel, eps)?;
        let mut cond_direct = None;
        let direct = if settings.method.runs_direct() {
            match fit_direct(&config, &samples) {
                Ok(fit) => {
                    let c = fit.condition_estimate();
                    cond_direct = c.is_finite().then_some(c);
                    MethodOutcome::from_values(
                        fit.residual(),
                        &fit.eval_many(eval_points),
                        &fit.stream_many(eval_points),
                        &truth,
                    )?
                }
                Err(e) => MethodOutcome::failed(Status::from_error(&e)),
            }
        } else {
            MethodOutcome::failed(Status::Skipped)
        };
        let qr = if settings.method.runs_qr() {
            match build_stable_basis_with(&config, nodes, settings.truncation).and_then(|b| fit_qr(b, &samples)) {
                Ok(fit) => MethodOutcome::from_values(
                    fit.residual(),
                    &fit.eval_many(eval_points),
                    &fit.stream_many(eval_points),
                    &truth,
                )?,
                Err(e) => MethodOutcome::failed(Status::from_error(&e)),
            }
        } else {
            MethodOutcome::failed(Status::Skipped)
        };
        rows.push(SweepRow {
            epsilon: eps,
            direct,
            qr,
            cond_direct,
        });
    }
    Ok(SweepReport {
        meta: SweepMeta {
            kernel: settings.kernel,
            n: nodes.len(),
            node_source: settings.node_source.clone(),
            eval_source: settings.eval_source.clone(),
            eval_count: eval_points.len(),
            target: target.name().to_string(),
            tol: settings.truncation.tol,
            mu_max: settings.truncation.mu_max,
        },
        rows,
    })
}
