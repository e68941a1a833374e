//! Flat-file artifacts: trajectory CSV, per-step structure CSV, and a static
//! SVG plot built from a trajectory export.
//!
//! Every writer here is deterministic: the same inputs produce byte-identical
//! text, so exports can be diffed and committed.

use crate::model::Trajectory;
use crate::rational::{decimal_string, parse_rational, render_rational, Rational};
use crate::structure::SidePartition;
use crate::verify::TrajectoryAnalysis;
use num_traits::ToPrimitive;
use std::fmt::Write as _;
use thiserror::Error;

/// How numbers are written. `Exact` is the canonical `p/q` form and round
/// trips; `Decimal` keeps 12 significant digits and is lossy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumberFormat {
    #[default]
    Exact,
    Decimal,
}

impl NumberFormat {
    fn render(&self, r: &Rational) -> String {
        match self {
            NumberFormat::Exact => render_rational(r),
            NumberFormat::Decimal => decimal_string(r, 12),
        }
    }
}

/// One row per step: `t,x_1,...,x_n`, preceded by `# truth` / `# epsilon`
/// metadata lines (always exact so nothing is lost even in decimal mode).
pub fn trajectory_csv(traj: &Trajectory, format: NumberFormat) -> String {
    let n = traj.config.n;
    let mut out = String::new();
    let _ = writeln!(out, "# truth = {}", render_rational(&traj.config.truth));
    let _ = writeln!(out, "# epsilon = {}", render_rational(&traj.config.epsilon));
    out.push('t');
    for i in 1..=n {
        let _ = write!(out, ",x_{i}");
    }
    out.push('\n');
    for state in &traj.states {
        let _ = write!(out, "{}", state.t);
        for v in &state.x {
            let _ = write!(out, ",{}", format.render(v));
        }
        out.push('\n');
    }
    out
}

fn side_counts(p: &SidePartition) -> String {
    format!("{},{},{}", p.near.len(), p.mid.len(), p.far.len())
}

/// Per-step interval structure: end vertices and values, side lengths,
/// membership, and the scaled near/mid/far occupancy of both sides.
pub fn analysis_csv(
    traj: &Trajectory,
    analysis: &TrajectoryAnalysis,
    format: NumberFormat,
) -> String {
    let cfg = &traj.config;
    let mut out = String::new();
    let _ = writeln!(out, "# truth = {}", render_rational(&cfg.truth));
    let _ = writeln!(out, "# epsilon = {}", render_rational(&cfg.epsilon));
    out.push_str(
        "t,lower_vertex,upper_vertex,lower_value,upper_value,lower_len,upper_len,\
         members,lost,lower_near,lower_mid,lower_far,upper_near,upper_mid,upper_far\n",
    );
    for (t, step) in analysis.steps.iter().enumerate() {
        let hope = &step.hope;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            t,
            hope.extremes.hope_lower,
            hope.extremes.hope_upper,
            format.render(&analysis.lower_value(cfg, t)),
            format.render(&analysis.upper_value(cfg, t)),
            format.render(&hope.lower_len),
            format.render(&hope.upper_len),
            hope.members.len(),
            hope.lost.len(),
            side_counts(&step.partitions.scaled_lower),
            side_counts(&step.partitions.scaled_upper),
        );
    }
    out
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("line {line}: {problem}")]
    BadLine { line: usize, problem: String },
    #[error("missing `t,x_1,...` header row")]
    MissingHeader,
    #[error("missing `# {0} = ...` metadata line")]
    MissingMetadata(&'static str),
    #[error("no data rows after the header")]
    NoRows,
}

/// Numeric data lifted out of a trajectory CSV, in plot-ready floats.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub truth: f64,
    pub epsilon: f64,
    /// `series[i]` is agent i+1's opinion at t = 0, 1, ...
    pub series: Vec<Vec<f64>>,
}

impl PlotData {
    pub fn steps(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }
}

fn parse_value(s: &str, line: usize) -> Result<f64, ExportError> {
    let exact = parse_rational(s).ok().and_then(|r| r.to_f64());
    exact.or_else(|| s.trim().parse::<f64>().ok()).ok_or_else(|| ExportError::BadLine {
        line,
        problem: format!("unreadable number `{s}`"),
    })
}

/// Read back what [`trajectory_csv`] wrote (either number format).
pub fn read_trajectory_csv(text: &str) -> Result<PlotData, ExportError> {
    let mut truth = None;
    let mut epsilon = None;
    let mut columns = None;
    let mut series: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((key, value)) = rest.split_once('=') {
                match key.trim() {
                    "truth" => truth = Some(parse_value(value, line_no)?),
                    "epsilon" => epsilon = Some(parse_value(value, line_no)?),
                    _ => {}
                }
            }
            continue;
        }
        if line.starts_with('t') {
            if columns.is_some() {
                return Err(ExportError::BadLine { line: line_no, problem: "second header".into() });
            }
            let cols = line.split(',').count();
            if cols < 2 || !line.starts_with("t,") {
                return Err(ExportError::MissingHeader);
            }
            columns = Some(cols);
            series = vec![Vec::new(); cols - 1];
            continue;
        }
        let Some(cols) = columns else {
            return Err(ExportError::MissingHeader);
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(ExportError::BadLine {
                line: line_no,
                problem: format!("expected {cols} fields, got {}", fields.len()),
            });
        }
        for (agent, field) in fields[1..].iter().enumerate() {
            series[agent].push(parse_value(field, line_no)?);
        }
    }
    if columns.is_none() {
        return Err(ExportError::MissingHeader);
    }
    if series.first().is_none_or(|s| s.is_empty()) {
        return Err(ExportError::NoRows);
    }
    Ok(PlotData {
        truth: truth.ok_or(ExportError::MissingMetadata("truth"))?,
        epsilon: epsilon.ok_or(ExportError::MissingMetadata("epsilon"))?,
        series,
    })
}

const PALETTE: [&str; 10] = [
    "#e63946", "#2a9d8f", "#457b9d", "#f4a261", "#8338ec", "#06d6a0", "#b08968", "#d62828",
    "#6a994e", "#3a0ca3",
];

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 48.0;

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

/// Opinion-vs-time polylines over a shaded ε band around the dashed truth
/// line. Pure function of the data; no external assets.
pub fn plot_svg(data: &PlotData) -> String {
    let steps = data.steps();
    let t_max = (steps.saturating_sub(1)).max(1) as f64;
    let mut lo = data.truth - data.epsilon;
    let mut hi = data.truth + data.epsilon;
    for s in &data.series {
        for &v in s {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = ((hi - lo) * 0.06).max(0.01);
    let (lo, hi) = (lo - pad, hi + pad);

    let x = |t: f64| MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) * t / t_max;
    let y = |v: f64| {
        MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) * (hi - v) / (hi - lo)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");

    // confidence band and truth line
    let band_top = y(data.truth + data.epsilon);
    let band_bottom = y(data.truth - data.epsilon);
    let _ = writeln!(
        svg,
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#8ecae6\" opacity=\"0.25\"/>",
        fmt2(MARGIN_LEFT),
        fmt2(band_top),
        fmt2(WIDTH - MARGIN_LEFT - MARGIN_RIGHT),
        fmt2(band_bottom - band_top),
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#023047\" \
         stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>",
        fmt2(MARGIN_LEFT),
        fmt2(y(data.truth)),
        fmt2(WIDTH - MARGIN_RIGHT),
        fmt2(y(data.truth)),
    );

    // axes
    let _ = writeln!(
        svg,
        "  <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"#222\"/>",
        l = fmt2(MARGIN_LEFT),
        t = fmt2(MARGIN_TOP),
        b = fmt2(HEIGHT - MARGIN_BOTTOM),
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#222\"/>",
        l = fmt2(MARGIN_LEFT),
        r = fmt2(WIDTH - MARGIN_RIGHT),
        b = fmt2(HEIGHT - MARGIN_BOTTOM),
    );
    for (v, label) in [(lo, fmt2(lo)), (hi, fmt2(hi)), (data.truth, format!("h = {}", fmt2(data.truth)))] {
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            fmt2(MARGIN_LEFT - 6.0),
            fmt2(y(v) + 4.0),
            label,
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t</text>",
        fmt2((MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0),
        fmt2(HEIGHT - 12.0),
    );
    for t in [0.0, t_max] {
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt2(x(t)),
            fmt2(HEIGHT - MARGIN_BOTTOM + 16.0),
            t as usize,
        );
    }

    for (idx, s) in data.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> =
            s.iter().enumerate().map(|(t, &v)| format!("{},{}", fmt2(x(t as f64)), fmt2(y(v)))).collect();
        let _ = writeln!(
            svg,
            "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"><title>x_{}</title></polyline>",
            color,
            points.join(" "),
            idx + 1,
        );
    }
    svg.push_str("</svg>\n");
    svg
}
