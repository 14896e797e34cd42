//! Self-contained SVG regret plots: one polyline per policy with error bars
//! from the standard-error columns, optionally on log-log axes. Output is a
//! pure function of the input rows, so identical input gives identical bytes.

use std::collections::BTreeMap;
use std::io::Write;

use super::csvio::{parse_csv, CsvRow};
use super::runner::{Axis, Metric};
use super::HarnessError;

#[derive(Debug, Clone, Copy)]
pub struct PlotOptions {
    pub x_axis: Axis,
    pub metric: Metric,
    pub log_log: bool,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 70.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

fn tick_label(v: f64, log_log: bool) -> String {
    let value = if log_log { 10f64.powf(v) } else { v };
    if value != 0.0 && (value.abs() >= 10_000.0 || value.abs() < 0.01) {
        format!("{value:.2e}")
    } else {
        format!("{value:.3}")
    }
}

struct Series {
    name: String,
    /// (x, y, optional se) already in plot coordinates' data space.
    points: Vec<(f64, f64, Option<f64>)>,
}

/// Renders rows to an SVG document. With `log_log`, points whose metric is
/// not strictly positive are skipped (their error bars are clamped).
pub fn render_svg(rows: &[CsvRow], opts: PlotOptions) -> Result<String, HarnessError> {
    let mut grouped: BTreeMap<String, Vec<&CsvRow>> = BTreeMap::new();
    for row in rows {
        grouped.entry(row.policy.clone()).or_default().push(row);
    }

    let mut series: Vec<Series> = Vec::new();
    for (name, group) in grouped {
        let mut points: Vec<(f64, f64, Option<f64>)> = Vec::new();
        for row in group {
            let x = match opts.x_axis {
                Axis::N => row.n as f64,
                Axis::D => row.d as f64,
            };
            let (y, se) = match opts.metric {
                Metric::Cumulative => (row.mean_cum_regret, row.se_cum_regret),
                Metric::Simple => (row.mean_simple_regret, row.se_simple_regret),
            };
            if opts.log_log {
                if x <= 0.0 || y <= 0.0 {
                    continue;
                }
                points.push((
                    x.log10(),
                    y.log10(),
                    se.map(|s| s / (y * std::f64::consts::LN_10)),
                ));
            } else {
                points.push((x, y, se));
            }
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite coordinates"));
        series.push(Series { name, points });
    }

    // Data ranges with padding; a fallback window when there is no data.
    let all: Vec<&(f64, f64, Option<f64>)> = series.iter().flat_map(|s| s.points.iter()).collect();
    let (mut x_min, mut x_max, mut y_min, mut y_max) = if all.is_empty() {
        (0.0, 1.0, 0.0, 1.0)
    } else {
        let xs: Vec<f64> = all.iter().map(|p| p.0).collect();
        let lows: Vec<f64> = all.iter().map(|p| p.1 - p.2.unwrap_or(0.0)).collect();
        let highs: Vec<f64> = all.iter().map(|p| p.1 + p.2.unwrap_or(0.0)).collect();
        (
            xs.iter().cloned().fold(f64::INFINITY, f64::min),
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            lows.iter().cloned().fold(f64::INFINITY, f64::min),
            highs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    if x_max - x_min < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_max - y_min < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let x_pad = 0.05 * (x_max - x_min);
    let y_pad = 0.05 * (y_max - y_min);
    let (x_min, x_max) = (x_min - x_pad, x_max + x_pad);
    let (y_min, y_max) = (y_min - y_pad, y_max + y_pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w,
            MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h,
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(x0),
        fmt(y0),
        fmt(x0 + plot_w),
        fmt(y0)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(x0),
        fmt(MARGIN_TOP),
        fmt(x0),
        fmt(y0)
    ));

    // Ticks and labels.
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x_min + t * (x_max - x_min);
        let (px, _) = to_px(xv, y_min);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(px),
            fmt(y0),
            fmt(px),
            fmt(y0 + 5.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            fmt(px),
            fmt(y0 + 20.0),
            tick_label(xv, opts.log_log)
        ));
        let yv = y_min + t * (y_max - y_min);
        let (_, py) = to_px(x_min, yv);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(x0 - 5.0),
            fmt(py),
            fmt(x0),
            fmt(py)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            fmt(x0 - 8.0),
            fmt(py + 4.0),
            tick_label(yv, opts.log_log)
        ));
    }

    let x_name = match opts.x_axis {
        Axis::N => "n",
        Axis::D => "d",
    };
    let y_name = match opts.metric {
        Metric::Cumulative => "mean cumulative regret",
        Metric::Simple => "mean simple regret",
    };
    let scale_note = if opts.log_log { " (log-log)" } else { "" };
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{x_name}{scale_note}</text>\n",
        fmt(x0 + plot_w / 2.0),
        fmt(HEIGHT - 20.0)
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" font-size=\"13\" transform=\"rotate(-90 20 {})\" text-anchor=\"middle\">{y_name}{scale_note}</text>\n",
        fmt(MARGIN_TOP + plot_h / 2.0),
        fmt(MARGIN_TOP + plot_h / 2.0)
    ));

    // Series: error bars, polyline, markers.
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        for &(x, y, se) in &s.points {
            if let Some(se) = se {
                let (px, p_low) = to_px(x, y - se);
                let (_, p_high) = to_px(x, y + se);
                svg.push_str(&format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\"/>\n",
                    fmt(px),
                    fmt(p_low),
                    fmt(px),
                    fmt(p_high)
                ));
                for py in [p_low, p_high] {
                    svg.push_str(&format!(
                        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\"/>\n",
                        fmt(px - 3.0),
                        fmt(py),
                        fmt(px + 3.0),
                        fmt(py)
                    ));
                }
            }
        }
        if !s.points.is_empty() {
            let coords: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y, _)| {
                    let (px, py) = to_px(x, y);
                    format!("{},{}", fmt(px), fmt(py))
                })
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                coords.join(" ")
            ));
            for &(x, y, _) in &s.points {
                let (px, py) = to_px(x, y);
                svg.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                    fmt(px),
                    fmt(py)
                ));
            }
        }
    }

    // Legend.
    let legend_x = WIDTH - MARGIN_RIGHT + 20.0;
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-weight=\"bold\">policies</text>\n",
        fmt(legend_x),
        fmt(MARGIN_TOP + 10.0)
    ));
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = MARGIN_TOP + 30.0 + 18.0 * idx as f64;
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n",
            fmt(legend_x),
            fmt(y - 10.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            fmt(legend_x + 18.0),
            fmt(y),
            s.name
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Reads a summary CSV and writes the rendered SVG.
pub fn emit_plot(csv_path: &str, opts: PlotOptions, out_path: &str) -> Result<(), HarnessError> {
    let text = std::fs::read_to_string(csv_path).map_err(|source| HarnessError::Io {
        op: "read",
        path: csv_path.to_string(),
        source,
    })?;
    let rows = parse_csv(&text)?;
    let svg = render_svg(&rows, opts)?;
    let mut file = std::fs::File::create(out_path).map_err(|source| HarnessError::Io {
        op: "create",
        path: out_path.to_string(),
        source,
    })?;
    file.write_all(svg.as_bytes())
        .map_err(|source| HarnessError::Io {
            op: "write",
            path: out_path.to_string(),
            source,
        })
}
