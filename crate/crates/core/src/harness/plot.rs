//! SVG regret plots from aggregate or per-run CSV files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::experiment::log10_regret;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub iters: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Last evaluation index of the initial design.
    pub init_end: Option<f64>,
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn field_f64(rec: &csv::StringRecord, idx: usize, name: &str, path: &Path) -> Result<Option<f64>> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec
        .get(idx)
        .ok_or_else(|| parse_err(path, line, format!("missing field '{name}'")))?
        .trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<f64>()
        .map(Some)
        .map_err(|_| parse_err(path, line, format!("field '{name}' is not a number: '{raw}'")))
}

/// Reads one series from an `aggregate.csv` or a `run_XXX.csv` file.
/// Per-run files plot `log10` regret with no error band.
pub fn load_series(path: &Path) -> Result<PlotSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(path, 1, format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let iter_col = column(&headers, "iter").ok_or_else(|| parse_err(path, 1, "no 'iter' column"))?;
    let phase_col = column(&headers, "phase");
    let (value_col, se_col, per_run) = if let Some(c) = column(&headers, "mean_log10_regret") {
        (c, column(&headers, "stderr"), false)
    } else if let Some(c) = column(&headers, "regret") {
        (c, None, true)
    } else {
        return Err(parse_err(path, 1, "no 'mean_log10_regret' or 'regret' column"));
    };
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let mut s = PlotSeries {
        label,
        iters: Vec::new(),
        mean: Vec::new(),
        stderr: Vec::new(),
        init_end: None,
    };
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let iter = field_f64(&rec, iter_col, "iter", path)?
            .ok_or_else(|| parse_err(path, line, "empty 'iter'"))?;
        let Some(mut v) = field_f64(&rec, value_col, &headers[value_col], path)? else {
            continue;
        };
        if per_run {
            v = log10_regret(v);
        }
        if !v.is_finite() {
            continue;
        }
        let se = match se_col {
            Some(c) => field_f64(&rec, c, "stderr", path)?.filter(|x| x.is_finite()).unwrap_or(0.0),
            None => 0.0,
        };
        if let Some(pc) = phase_col {
            if rec.get(pc).map(str::trim) == Some("init") {
                s.init_end = Some(s.init_end.map_or(iter, |e: f64| e.max(iter)));
            }
        }
        s.iters.push(iter);
        s.mean.push(v);
        s.stderr.push(se);
    }
    if s.iters.is_empty() {
        return Err(parse_err(path, 1, "no plottable rows"));
    }
    Ok(s)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders mean log10 regret with ±1 standard error bands.
pub fn render_svg(series: &[PlotSeries]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const L: f64 = 70.0;
    const R: f64 = 180.0;
    const T: f64 = 30.0;
    const B: f64 = 50.0;

    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in series {
        for i in 0..s.iters.len() {
            x_lo = x_lo.min(s.iters[i]);
            x_hi = x_hi.max(s.iters[i]);
            y_lo = y_lo.min(s.mean[i] - s.stderr[i]);
            y_hi = y_hi.max(s.mean[i] + s.stderr[i]);
        }
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let pad = ((y_hi - y_lo) * 0.05).max(1e-3);
    y_lo -= pad;
    y_hi += pad;
    let px = |x: f64| L + (x - x_lo) / (x_hi - x_lo) * (W - L - R);
    let py = |y: f64| T + (y_hi - y) / (y_hi - y_lo) * (H - T - B);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    out.push_str(
        "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n",
    );
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let (ax0, ax1, ay0, ay1) = (px(x_lo), px(x_hi), py(y_lo), py(y_hi));
    let _ = writeln!(
        out,
        "<rect x=\"{ax0:.2}\" y=\"{ay1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        ax1 - ax0,
        ay0 - ay1
    );
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{:.0}</text>",
            px(xv),
            ay0 + 16.0,
            xv
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{:.2}</text>",
            ax0 - 6.0,
            py(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">evaluation</text>",
        (ax0 + ax1) / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">log10 regret</text>",
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0
    );
    if let Some(m) = series.iter().filter_map(|s| s.init_end).reduce(f64::max) {
        let x = px((m + 0.5).min(x_hi));
        let _ = writeln!(
            out,
            "<line class=\"init-boundary\" x1=\"{x:.2}\" y1=\"{ay1:.2}\" x2=\"{x:.2}\" y2=\"{ay0:.2}\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>"
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if s.stderr.iter().any(|e| *e > 0.0) {
            let mut pts: Vec<String> = (0..s.iters.len())
                .map(|i| format!("{:.2},{:.2}", px(s.iters[i]), py(s.mean[i] + s.stderr[i])))
                .collect();
            pts.extend(
                (0..s.iters.len())
                    .rev()
                    .map(|i| format!("{:.2},{:.2}", px(s.iters[i]), py(s.mean[i] - s.stderr[i]))),
            );
            let _ = writeln!(
                out,
                "<polygon class=\"band\" points=\"{}\" fill=\"{color}\" fill-opacity=\"0.2\" stroke=\"none\"/>",
                pts.join(" ")
            );
        }
        let line: Vec<String> = (0..s.iters.len())
            .map(|i| format!("{:.2},{:.2}", px(s.iters[i]), py(s.mean[i])))
            .collect();
        let _ = writeln!(
            out,
            "<polyline class=\"mean\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            line.join(" ")
        );
        let ly = T + 16.0 + 20.0 * k as f64;
        let lx = W - R + 15.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 20.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            lx + 26.0,
            ly + 4.0,
            xml_escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Loads each CSV and writes one SVG to `out`.
pub fn plot(inputs: &[PathBuf], out: &Path) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::Config("plot needs at least one CSV file".into()));
    }
    let series = inputs.iter().map(|p| load_series(p)).collect::<Result<Vec<_>>>()?;
    std::fs::write(out, render_svg(&series)).map_err(|e| Error::io(out, e))
}
