//! Minimal self-contained SVG line charts: axes, tick labels, a legend,
//! and one polyline per series. No external assets and no timestamps, so
//! regenerated files are byte-identical.

use std::fs;
use std::path::Path;

use crate::error::PipelineError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 76.0;
const PLOT_RIGHT: f64 = 616.0;
const PLOT_TOP: f64 = 44.0;
const PLOT_BOTTOM: f64 = 420.0;

/// Values below this are clamped before log scaling (exact zeros appear in
/// rank-deficient spectra).
const LOG_FLOOR: f64 = 1e-18;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Chart {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn with_series(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.2e}")
    }
}

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the chart to an SVG string; charts with no finite points are
/// rejected.
pub fn render_svg(chart: &Chart) -> Result<String, PipelineError> {
    let transform = |y: f64| -> f64 {
        if chart.log_y {
            y.max(LOG_FLOOR).log10()
        } else {
            y
        }
    };

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in &chart.series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                xs.push(x);
                ys.push(transform(y));
            }
        }
    }
    if xs.is_empty() {
        return Err(PipelineError::EmptyChart {
            path: Path::new("<unwritten>").to_path_buf(),
        });
    }

    let (mut x_min, mut x_max) = bounds(&xs);
    let (mut y_min, mut y_max) = bounds(&ys);
    pad_range(&mut x_min, &mut x_max);
    pad_range(&mut y_min, &mut y_max);

    let px = |x: f64| PLOT_LEFT + (x - x_min) / (x_max - x_min) * (PLOT_RIGHT - PLOT_LEFT);
    let py = |y: f64| PLOT_BOTTOM - (y - y_min) / (y_max - y_min) * (PLOT_BOTTOM - PLOT_TOP);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{PLOT_LEFT}\" y=\"{PLOT_TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333333\"/>\n",
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        escape_text(&chart.title)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        HEIGHT - 14.0,
        escape_text(&chart.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        escape_text(&chart.y_label)
    ));

    // Ticks: 5 per axis; in log mode the y labels show powers of ten.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x_min + f * (x_max - x_min);
        let xp = px(xv);
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#333333\"/>\n",
            fmt_coord(xp),
            fmt_coord(PLOT_BOTTOM),
            fmt_coord(PLOT_BOTTOM + 5.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            fmt_coord(xp),
            fmt_coord(PLOT_BOTTOM + 20.0),
            fmt_tick(xv)
        ));

        let yv = y_min + f * (y_max - y_min);
        let yp = py(yv);
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#333333\"/>\n",
            fmt_coord(PLOT_LEFT - 5.0),
            fmt_coord(PLOT_LEFT),
            fmt_coord(yp)
        ));
        let label = if chart.log_y {
            format!("1e{:.1}", yv)
        } else {
            fmt_tick(yv)
        };
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            fmt_coord(PLOT_LEFT - 9.0),
            fmt_coord(yp + 4.0),
            label
        ));
    }

    for (idx, s) in chart.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{},{}", fmt_coord(px(x)), fmt_coord(py(transform(y)))))
            .collect();
        if pts.is_empty() {
            continue;
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\"/>\n",
            pts.join(" ")
        ));
    }

    // Legend, top-right corner of the plot area.
    for (idx, s) in chart.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = PLOT_TOP + 16.0 + 16.0 * idx as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            fmt_coord(PLOT_RIGHT - 150.0),
            fmt_coord(y - 4.0),
            fmt_coord(PLOT_RIGHT - 126.0),
            fmt_coord(y - 4.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            fmt_coord(PLOT_RIGHT - 120.0),
            fmt_coord(y),
            escape_text(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_svg(chart: &Chart, path: &Path) -> Result<(), PipelineError> {
    let svg = render_svg(chart).map_err(|e| match e {
        PipelineError::EmptyChart { .. } => PipelineError::EmptyChart {
            path: path.to_path_buf(),
        },
        other => other,
    })?;
    fs::write(path, svg).map_err(|e| PipelineError::io(path, e))
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

fn pad_range(min: &mut f64, max: &mut f64) {
    if min == max {
        let pad = if *min == 0.0 { 0.5 } else { min.abs() * 0.05 };
        *min -= pad;
        *max += pad;
    }
}
