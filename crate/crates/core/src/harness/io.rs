//! Flat-file formats: node lists, sampled fields, sweep reports and
//! evaluated interpolants.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::Vector3;

use crate::direct::TangentFieldSamples;
use crate::error::{Error, Result};
use crate::geom::SpherePoint;
use crate::harness::sweep::{Status, SweepReport, SweepRow};

pub const REPORT_HEADER: &str =
    "epsilon,err_field_direct,err_field_qr,err_stream_direct,err_stream_qr,cond_direct,status_direct,status_qr";

const NA: &str = "NA";

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Non-comment, non-blank lines with 1-based line numbers, `#` starting a comment.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_fields(path: &Path, line: usize, text: &str, want: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(path, line, format!("not a number: `{t}`"))))
        .collect::<Result<_>>()?;
    if vals.len() != want {
        return Err(parse_err(path, line, format!("expected {want} values, found {}", vals.len())));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(parse_err(path, line, "non-finite value"));
    }
    Ok(vals)
}

fn point(path: &Path, line: usize, v: &[f64]) -> Result<SpherePoint> {
    SpherePoint::new(v[0], v[1], v[2]).map_err(|e| parse_err(path, line, e.to_string()))
}

/// Reads `x y z` per line.
pub fn read_nodes(path: &Path) -> Result<Vec<SpherePoint>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (line, l) in data_lines(&text) {
        let v = parse_fields(path, line, l, 3)?;
        out.push(point(path, line, &v)?);
    }
    if out.is_empty() {
        return Err(parse_err(path, 0, "no nodes"));
    }
    Ok(out)
}

pub fn write_nodes(path: &Path, nodes: &[SpherePoint]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_nodes_to(&mut w, nodes)?;
    w.flush()?;
    Ok(())
}

pub fn write_nodes_to<W: Write>(w: &mut W, nodes: &[SpherePoint]) -> Result<()> {
    for p in nodes {
        writeln!(w, "{:?} {:?} {:?}", p.x(), p.y(), p.z())?;
    }
    Ok(())
}

/// Reads `x y z ux uy uz` per line. Vectors must be tangent within
/// `1e-8` relative to their length.
pub fn read_samples(path: &Path) -> Result<TangentFieldSamples> {
    let text = fs::read_to_string(path)?;
    let mut nodes = Vec::new();
    let mut vecs = Vec::new();
    for (line, l) in data_lines(&text) {
        let v = parse_fields(path, line, l, 6)?;
        let p = point(path, line, &v)?;
        let u = Vector3::new(v[3], v[4], v[5]);
        let normal = p.vector().dot(&u).abs();
        if normal > crate::direct::TANGENCY_TOL * u.norm() {
            return Err(parse_err(path, line, format!("vector is not tangent (normal part {normal:e})")));
        }
        nodes.push(p);
        vecs.push(u);
    }
    if nodes.is_empty() {
        return Err(parse_err(path, 0, "no samples"));
    }
    TangentFieldSamples::from_vectors(nodes, &vecs)
}

pub fn write_samples(path: &Path, nodes: &[SpherePoint], vectors: &[Vector3<f64>]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for (p, u) in nodes.iter().zip(vectors) {
        writeln!(w, "{:?} {:?} {:?} {:?} {:?} {:?}", p.x(), p.y(), p.z(), u.x, u.y, u.z)?;
    }
    w.flush()?;
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_else(|| NA.to_string())
}

/// CSV report; settings go in leading `#` comment lines.
pub fn write_report_to<W: Write>(w: &mut W, report: &SweepReport) -> Result<()> {
    let m = &report.meta;
    writeln!(w, "# kernel={}", m.kernel)?;
    writeln!(w, "# n={}", m.n)?;
    writeln!(w, "# nodes={}", m.node_source)?;
    writeln!(w, "# eval={} count={}", m.eval_source, m.eval_count)?;
    writeln!(w, "# target={}", m.target)?;
    writeln!(w, "# tol={} mu_max={}", format_float(m.tol), m.mu_max)?;
    writeln!(w, "{REPORT_HEADER}")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            format_float(r.epsilon),
            cell(r.direct.err_field),
            cell(r.qr.err_field),
            cell(r.direct.err_stream),
            cell(r.qr.err_stream),
            cell(r.cond_direct),
            r.direct.status,
            r.qr.status
        )?;
    }
    Ok(())
}

pub fn write_report(path: &Path, report: &SweepReport) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_report_to(&mut w, report)?;
    w.flush()?;
    Ok(())
}

/// One parsed report line. Residuals are not part of the file format.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub epsilon: f64,
    pub err_field_direct: Option<f64>,
    pub err_field_qr: Option<f64>,
    pub err_stream_direct: Option<f64>,
    pub err_stream_qr: Option<f64>,
    pub cond_direct: Option<f64>,
    pub status_direct: Status,
    pub status_qr: Status,
}

impl ReportLine {
    pub fn from_row(r: &SweepRow) -> Self {
        Self {
            epsilon: r.epsilon,
            err_field_direct: r.direct.err_field,
            err_field_qr: r.qr.err_field,
            err_stream_direct: r.direct.err_stream,
            err_stream_qr: r.qr.err_stream,
            cond_direct: r.cond_direct,
            status_direct: r.direct.status,
            status_qr: r.qr.status,
        }
    }
}

/// Parses the rows of a report written by [`write_report`].
pub fn read_report(path: &Path) -> Result<Vec<ReportLine>> {
    let text = fs::read_to_string(path)?;
    let mut lines = data_lines(&text);
    match lines.next() {
        Some((_, h)) if h == REPORT_HEADER => {}
        Some((line, _)) => return Err(parse_err(path, line, "unexpected header")),
        None => return Err(parse_err(path, 0, "empty report")),
    }
    let mut out = Vec::new();
    for (line, l) in lines {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 8 {
            return Err(parse_err(path, line, format!("expected 8 columns, found {}", f.len())));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s == NA {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| parse_err(path, line, format!("not a number: `{s}`")))
            }
        };
        let status = |s: &str| Status::from_code(s).ok_or_else(|| parse_err(path, line, format!("unknown status `{s}`")));
        out.push(ReportLine {
            epsilon: num(f[0])?.ok_or_else(|| parse_err(path, line, "missing epsilon"))?,
            err_field_direct: num(f[1])?,
            err_field_qr: num(f[2])?,
            err_stream_direct: num(f[3])?,
            err_stream_qr: num(f[4])?,
            cond_direct: num(f[5])?,
            status_direct: status(f[6])?,
            status_qr: status(f[7])?,
        });
    }
    Ok(out)
}

/// Evaluated interpolant: `x,y,z,ux,uy,uz,psi` per point.
pub fn write_field(path: &Path, points: &[SpherePoint], field: &[Vector3<f64>], stream: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,y,z,ux,uy,uz,psi")?;
    for ((p, u), s) in points.iter().zip(field).zip(stream) {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            format_float(p.x()),
            format_float(p.y()),
            format_float(p.z()),
            format_float(u.x),
            format_float(u.y),
            format_float(u.z),
            format_float(*s)
        )?;
    }
    w.flush()?;
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::hammersley_nodes;

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, 1.0, 0.1, 2.0 / 3.0, 1e-10, 3.4e-300, 1e20, -7.25e-5, f64::MIN_POSITIVE] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn nodes_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nodes.txt");
        let nodes = hammersley_nodes(10);
        write_nodes(&path, &nodes).unwrap();
        let back = read_nodes(&path).unwrap();
        for (a, b) in nodes.iter().zip(&back) {
            assert_eq!(a.vector(), b.vector());
        }
    }

    #[test]
    fn malformed_line_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nodes.txt");
        fs::write(&path, "# header\n1 0 0\n0 1\n").unwrap();
        match read_nodes(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        fs::write(&path, "1 0 0\n0 2 0\n").unwrap();
        assert!(matches!(read_nodes(&path), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn non_tangent_sample_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        fs::write(&path, "0 0 1 1 0 0\n1 0 0 0.001 1 0\n").unwrap();
        assert!(matches!(read_samples(&path), Err(Error::Parse { line: 2, .. })));
        fs::write(&path, "0 0 1 1 0 0\n1 0 0 0 1 0\n").unwrap();
        let s = read_samples(&path).unwrap();
        assert_eq!(s.len(), 2);
    }
}
