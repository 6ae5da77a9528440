//! Deterministic SVG figures: boundary conic, confocal caustics and the
//! projection of a trajectory or impact sequence.

use std::fmt::Write as _;
use std::path::Path;

use super::config::{config_error, PlotSection, RunConfig};
use super::output::{io_error, read_csv};
use super::CliError;
use crate::billiard::{caustic_parameters, BilliardSpec, ImpactState};

const SIZE: f64 = 600.0;
const HALF: f64 = SIZE / 2.0;
const INNER: f64 = 270.0;
const CONIC_SAMPLES: usize = 400;

struct Frame {
    scale: f64,
}

impl Frame {
    fn px(&self, u: f64, v: f64) -> (f64, f64) {
        (HALF + self.scale * u, HALF - self.scale * v)
    }

    fn point(&self, u: f64, v: f64) -> String {
        let (a, b) = self.px(u, v);
        format!("{a:.3},{b:.3}")
    }
}

fn polyline(frame: &Frame, pts: &[(f64, f64)], style: &str) -> String {
    let coords: Vec<String> = pts.iter().map(|(u, v)| frame.point(*u, *v)).collect();
    format!("<polyline points=\"{}\" fill=\"none\" {style}/>\n", coords.join(" "))
}

/// Pieces of the confocal conic `u²/(a0-η) + v²/(a1-η) = 1` inside the
/// ellipse with semi-axes `sqrt(a0)`, `sqrt(a1)`.
fn caustic_pieces(a: [f64; 2], eta: f64) -> Vec<Vec<(f64, f64)>> {
    let (d0, d1) = (a[0] - eta, a[1] - eta);
    let inside = |u: f64, v: f64| u * u / a[0] + v * v / a[1] <= 1.0 + 1e-12;
    let mut pieces = vec![];
    let branch = |param: &dyn Fn(f64) -> (f64, f64), t_max: f64, pieces: &mut Vec<Vec<(f64, f64)>>| {
        let mut run = vec![];
        for k in 0..=CONIC_SAMPLES {
            let t = -t_max + 2.0 * t_max * k as f64 / CONIC_SAMPLES as f64;
            let (u, v) = param(t);
            if inside(u, v) {
                run.push((u, v));
            } else if run.len() > 1 {
                pieces.push(std::mem::take(&mut run));
            } else {
                run.clear();
            }
        }
        if run.len() > 1 {
            pieces.push(run);
        }
    };
    if d0 > 0.0 && d1 > 0.0 {
        let (r0, r1) = (d0.sqrt(), d1.sqrt());
        branch(&|t: f64| (r0 * t.cos(), r1 * t.sin()), std::f64::consts::PI, &mut pieces);
    } else if d0 * d1 < 0.0 {
        // real semi-axis along the coordinate with positive denominator
        let (re, im) = (d0.abs().sqrt(), d1.abs().sqrt());
        let t_max = (a[0].max(a[1]).sqrt() / re.min(im) + 2.0).asinh();
        for sign in [1.0, -1.0] {
            if d0 > 0.0 {
                branch(&|t: f64| (sign * re * t.cosh(), im * t.sinh()), t_max, &mut pieces);
            } else {
                branch(&|t: f64| (re * t.sinh(), sign * im * t.cosh()), t_max, &mut pieces);
            }
        }
    } else {
        log::warn!("caustic parameter {eta} gives no real conic");
    }
    pieces
}

fn column(header: &[String], name: &str) -> Option<usize> {
    header.iter().position(|h| h == name)
}

/// Caustic parameters of a planar billiard orbit read from an impacts file.
fn orbit_caustics(cfg: &RunConfig, header: &[String], rows: &[Vec<f64>]) -> Vec<f64> {
    let (Some(b), Some(row)) = (&cfg.billiard, rows.first()) else {
        return vec![];
    };
    if b.axes.len() != 2 {
        return vec![];
    }
    let col = |name: &str| column(header, name).map(|i| row[i]);
    let (Some(x0), Some(x1), Some(y0), Some(y1)) = (col("x_0"), col("x_1"), col("y_0"), col("y_1")) else {
        return vec![];
    };
    BilliardSpec::new(b.axes.clone(), b.sigma, b.mu.clone())
        .and_then(|spec| caustic_parameters(&spec, &ImpactState::new(vec![x0, x1], vec![y0, y1])))
        .unwrap_or_default()
}

/// Render the figure described by `plot` (axes default to the billiard or
/// system axes of `cfg`).
pub fn render(cfg: &RunConfig, plot: &PlotSection) -> Result<String, CliError> {
    let [d0, d1] = plot.dims;
    let axes: Option<Vec<f64>> = plot
        .axes
        .clone()
        .or_else(|| cfg.billiard.as_ref().map(|b| b.axes.clone()))
        .or_else(|| cfg.system.as_ref().map(|s| s.axes.clone()));
    let conic = match &axes {
        Some(a) => {
            let pick = |d: usize| a.get(d).copied().ok_or_else(|| config_error("plot.dims", format!("index {d} out of range")));
            Some([pick(d0)?, pick(d1)?])
        }
        None => None,
    };
    let (header, rows) = match &plot.input {
        Some(p) if p.as_os_str().is_empty() => (vec![], vec![]),
        Some(p) => read_csv(p)?,
        None => (vec![], vec![]),
    };
    let path: Vec<(f64, f64)> = if rows.is_empty() {
        vec![]
    } else {
        let (c0, c1) = (format!("x_{d0}"), format!("x_{d1}"));
        let (i0, i1) = match (column(&header, &c0), column(&header, &c1)) {
            (Some(i), Some(j)) => (i, j),
            _ => return Err(config_error("plot.input", format!("missing columns {c0}, {c1}"))),
        };
        rows.iter().map(|r| (r[i0], r[i1])).collect()
    };
    let mut extent: f64 = conic.map_or(0.0, |a| a[0].sqrt().max(a[1].sqrt()));
    for (u, v) in &path {
        extent = extent.max(u.abs()).max(v.abs());
    }
    if !(extent > 0.0 && extent.is_finite()) {
        extent = 1.0;
    }
    let frame = Frame { scale: INNER / (1.08 * extent) };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(svg, "<rect x=\"0\" y=\"0\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<g stroke=\"#999999\" stroke-width=\"1\"><line x1=\"0\" y1=\"{HALF}\" x2=\"{SIZE}\" y2=\"{HALF}\"/><line x1=\"{HALF}\" y1=\"0\" x2=\"{HALF}\" y2=\"{SIZE}\"/></g>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\">x_{d0}</text><text x=\"{}\" y=\"14\" font-size=\"12\" font-family=\"sans-serif\">x_{d1}</text>",
        SIZE - 28.0,
        HALF - 6.0,
        HALF + 6.0
    );
    if let Some(a) = conic {
        let (r0, r1) = (a[0].sqrt(), a[1].sqrt());
        if plot.quarter {
            let (o, e0, e1) = (frame.point(0.0, 0.0), frame.point(r0, 0.0), frame.point(0.0, r1));
            let _ = writeln!(
                svg,
                "<path d=\"M {o} L {e0} A {:.3} {:.3} 0 0 0 {e1} Z\" fill=\"#eef3fb\" stroke=\"black\" stroke-width=\"1.5\"/>",
                frame.scale * r0,
                frame.scale * r1
            );
        } else {
            let (cx, cy) = frame.px(0.0, 0.0);
            let _ = writeln!(
                svg,
                "<ellipse cx=\"{cx:.3}\" cy=\"{cy:.3}\" rx=\"{:.3}\" ry=\"{:.3}\" fill=\"#eef3fb\" stroke=\"black\" stroke-width=\"1.5\"/>",
                frame.scale * r0,
                frame.scale * r1
            );
        }
        let caustics = if plot.caustics.is_empty() { orbit_caustics(cfg, &header, &rows) } else { plot.caustics.clone() };
        for eta in &caustics {
            for piece in caustic_pieces(a, *eta) {
                let piece: Vec<(f64, f64)> = if plot.quarter {
                    piece.into_iter().filter(|(u, v)| *u >= 0.0 && *v >= 0.0).collect()
                } else {
                    piece
                };
                if piece.len() > 1 {
                    svg.push_str(&polyline(&frame, &piece, "stroke=\"#c0392b\" stroke-width=\"1.2\" stroke-dasharray=\"5,3\""));
                }
            }
        }
    }
    if path.len() > 1 {
        svg.push_str(&polyline(&frame, &path, "stroke=\"#1f4e9c\" stroke-width=\"0.8\""));
    }
    if column(&header, "k").is_some() {
        for (u, v) in &path {
            let (a, b) = frame.px(*u, *v);
            let _ = writeln!(svg, "<circle cx=\"{a:.3}\" cy=\"{b:.3}\" r=\"2\" fill=\"#1f4e9c\"/>");
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn default_section() -> PlotSection {
    PlotSection { input: None, output: "plot.svg".into(), dims: [0, 1], caustics: vec![], axes: None, quarter: false }
}

pub fn plot(cfg: &RunConfig, out: &Path) -> Result<std::path::PathBuf, CliError> {
    let section = cfg.plot.clone().unwrap_or_else(default_section);
    let svg = render(cfg, &section)?;
    let path = out.join(&section.output);
    std::fs::write(&path, svg).map_err(|e| io_error(&path, e))?;
    Ok(path)
}
