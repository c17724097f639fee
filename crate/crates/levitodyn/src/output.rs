//! CSV persistence and self-contained SVG line plots. All floats are
//! written with 17 significant digits so that files round-trip bit-exactly.

use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use crate::dynamics::ParticleState;
use crate::error::Error;
use crate::kinematics::{AngularMomenta, EulerAngles};
use crate::Result;

/// One emitted sample of a classical run: full phase-space point, the
/// homodyne current sample and the total energy.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub state: ParticleState,
    pub j: f64,
    pub energy: f64,
}

pub const TRACE_HEADER: &str =
    "t,x,y,z,px,py,pz,alpha,beta,gamma,pi_alpha,pi_beta,pi_gamma,J,energy";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_data(msg: impl Into<String>) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg.into()))
}

pub fn write_trace_csv(path: &Path, records: &[TraceRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(io_data("refusing to write an empty trace"));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{TRACE_HEADER}")?;
    for rec in records {
        let s = &rec.state;
        let cols = [
            rec.t, s.r.x, s.r.y, s.r.z, s.p.x, s.p.y, s.p.z, s.phi.alpha, s.phi.beta,
            s.phi.gamma, s.pi.pi_alpha, s.pi.pi_beta, s.pi.pi_gamma, rec.j, rec.energy,
        ];
        let line: Vec<String> = cols.iter().map(|v| fmt(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| io_data(format!("{}: empty trace file", path.display())))?;
    if header != TRACE_HEADER {
        return Err(io_data(format!(
            "{}: unexpected trace header '{header}'",
            path.display()
        )));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| io_data(format!("{}:{}: {e}", path.display(), lineno + 2)))?;
        if cols.len() != 15 {
            return Err(io_data(format!(
                "{}:{}: expected 15 columns, got {}",
                path.display(),
                lineno + 2,
                cols.len()
            )));
        }
        records.push(TraceRecord {
            t: cols[0],
            state: ParticleState {
                r: Vector3::new(cols[1], cols[2], cols[3]),
                p: Vector3::new(cols[4], cols[5], cols[6]),
                phi: EulerAngles::new(cols[7], cols[8], cols[9]),
                pi: AngularMomenta::new(cols[10], cols[11], cols[12]),
            },
            j: cols[13],
            energy: cols[14],
        });
    }
    if records.is_empty() {
        return Err(io_data(format!("{}: trace has no data rows", path.display())));
    }
    Ok(records)
}

/// Write a generic CSV with one header row and f64 columns.
pub fn write_columns_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    if rows.is_empty() {
        return Err(io_data("refusing to write an empty table"));
    }
    let n_cols = header.split(',').count();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        if row.len() != n_cols {
            return Err(io_data(format!(
                "row width {} does not match header width {n_cols}",
                row.len()
            )));
        }
        let line: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Read a CSV written by [`write_columns_csv`]; returns the header fields
/// and the rows.
pub fn read_columns_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| io_data(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| io_data(format!("{}:{}: {e}", path.display(), lineno + 2)))?;
        if row.len() != header.len() {
            return Err(io_data(format!(
                "{}:{}: expected {} columns, got {}",
                path.display(),
                lineno + 2,
                header.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(io_data(format!("{}: no data rows", path.display())));
    }
    Ok((header, rows))
}

/// Axis scaling for [`svg_line_plot`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotScale {
    Linear,
    LogLog,
}

/// Self-contained single-polyline SVG with axes and tick labels.
pub fn svg_line_plot(
    path: &Path,
    xs: &[f64],
    ys: &[f64],
    x_label: &str,
    y_label: &str,
    scale: PlotScale,
) -> Result<()> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(io_data("plot needs equally sized, non-empty x and y"));
    }
    let map = |v: f64| -> Option<f64> {
        match scale {
            PlotScale::Linear => Some(v),
            PlotScale::LogLog => {
                if v > 0.0 {
                    Some(v.log10())
                } else {
                    None
                }
            }
        }
    };
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter_map(|(x, y)| Some((map(*x)?, map(*y)?)))
        .collect();
    if pts.len() < 2 {
        return Err(io_data("fewer than two plottable points"));
    }
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        x_lo = x_lo.min(*x);
        x_hi = x_hi.max(*x);
        y_lo = y_lo.min(*y);
        y_hi = y_hi.max(*y);
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0; // margins
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 50.0;
    let sx = |x: f64| ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB);

    let mut poly = String::new();
    for (x, y) in &pts {
        poly.push_str(&format!("{:.2},{:.2} ", sx(*x), sy(*y)));
    }
    let tick = |v: f64| -> String {
        match scale {
            PlotScale::Linear => format!("{v:.3e}"),
            PlotScale::LogLog => format!("1e{v:.1}"),
        }
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"black\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n",
        poly.trim_end()
    ));
    for frac in [0.0, 0.5, 1.0] {
        let xv = x_lo + frac * (x_hi - x_lo);
        let yv = y_lo + frac * (y_hi - y_lo);
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            sx(xv),
            H - MB + 18.0,
            tick(xv)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            ML - 6.0,
            sy(yv) + 4.0,
            tick(yv)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 10.0,
        x_label
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 14 {:.1})\">{}</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        y_label
    ));
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}
