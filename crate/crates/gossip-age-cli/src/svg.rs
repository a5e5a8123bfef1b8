//! Deterministic SVG line plots for sweep results. No clock, no randomness,
//! no external assets: the same rows always serialize to the same bytes.

use std::fmt::Write as _;

use crate::{Engine, HarnessError, SweepResult};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 640.0;
const TOP: f64 = 52.0;
const BOTTOM: f64 = 478.0;
const LEGEND_X: f64 = 662.0;
const LEGEND_MAX: usize = 16;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
}

struct Series {
    engine: Engine,
    target: String,
    points: Vec<(f64, f64, Option<f64>)>,
}

fn dash_for(engine: Engine) -> &'static str {
    match engine {
        Engine::Exact | Engine::Simulate => "",
        Engine::Bounds => "7 4",
        Engine::NoMobilityReference => "2 3",
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 1e5 || v.abs() < 1e-4 {
        return format!("{v:e}");
    }
    let mut s = format!("{v:.6}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let unit = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    unit * mag
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one polyline per (engine, target) pair, in first-appearance
/// order. Error bars are drawn where a row carries a standard error.
pub fn emit_plot(result: &SweepResult, style: &PlotStyle) -> Result<String, HarnessError> {
    let mut series: Vec<Series> = Vec::new();
    for row in &result.rows {
        let Some(value) = row.value else { continue };
        if !value.is_finite() {
            continue;
        }
        let slot = series
            .iter_mut()
            .find(|s| s.engine == row.engine && s.target == row.target);
        let slot = match slot {
            Some(s) => s,
            None => {
                series.push(Series {
                    engine: row.engine,
                    target: row.target.clone(),
                    points: Vec::new(),
                });
                series.last_mut().expect("just pushed")
            }
        };
        slot.points.push((row.sweep_value, value, row.stderr));
    }
    if series.is_empty() {
        return Err(HarnessError::EmptyResult);
    }
    for s in &mut series {
        s.points
            .sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite sweep values"));
    }

    let tx = |x: f64| if style.log_x { x.log10() } else { x };
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &series {
        for &(x, y, se) in &s.points {
            let t = tx(x);
            x_min = x_min.min(t);
            x_max = x_max.max(t);
            let half = se.unwrap_or(0.0).max(0.0);
            y_min = y_min.min(y - half);
            y_max = y_max.max(y + half);
        }
    }
    if x_max - x_min < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_max - y_min < 1e-12 {
        let pad = (y_max.abs() * 0.1).max(0.5);
        y_min -= pad;
        y_max += pad;
    } else {
        let pad = 0.06 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;
    }
    let px = |x: f64| LEFT + (tx(x) - x_min) / (x_max - x_min) * (RIGHT - LEFT);
    let py = |y: f64| BOTTOM - (y - y_min) / (y_max - y_min) * (BOTTOM - TOP);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"Helvetica, Arial, sans-serif\">\n"
    );
    let _ = write!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n");
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"26\" font-size=\"16\" text-anchor=\"middle\" fill=\"#202020\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        escape(&style.title)
    );

    // x ticks sit on the distinct sweep values; sweeps are short enough
    let mut x_ticks: Vec<f64> = Vec::new();
    for s in &series {
        for &(x, _, _) in &s.points {
            if !x_ticks.iter().any(|&t| t == x) {
                x_ticks.push(x);
            }
        }
    }
    x_ticks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if x_ticks.len() > 12 {
        let keep = x_ticks.len().div_ceil(12);
        x_ticks = x_ticks
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| i % keep == 0)
            .map(|(_, v)| v)
            .collect();
    }
    for &t in &x_ticks {
        let x = px(t);
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{BOTTOM}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#c8c8c8\" stroke-width=\"0.6\"/>\n",
            TOP
        );
        let _ = write!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#404040\">{}</text>\n",
            BOTTOM + 18.0,
            fmt_tick(t)
        );
    }

    let step = nice_step((y_max - y_min) / 5.0);
    let mut yt = (y_min / step).ceil() * step;
    while yt <= y_max + 1e-12 * step {
        let y = py(yt);
        let _ = write!(
            svg,
            "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{RIGHT}\" y2=\"{y:.2}\" stroke=\"#c8c8c8\" stroke-width=\"0.6\"/>\n"
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\" fill=\"#404040\">{}</text>\n",
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(yt)
        );
        yt += step;
    }

    let _ = write!(
        svg,
        "<line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" stroke=\"#202020\" stroke-width=\"1\"/>\n"
    );
    let _ = write!(
        svg,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" stroke=\"#202020\" stroke-width=\"1\"/>\n"
    );
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#202020\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 42.0,
        escape(&style.x_label)
    );
    let _ = write!(
        svg,
        "<text x=\"20\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#202020\" transform=\"rotate(-90 20 {:.2})\">{}</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(&style.y_label)
    );

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let dash = dash_for(s.engine);
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let mut pts = String::new();
        for &(x, y, _) in &s.points {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash_attr}/>\n",
            pts.trim_end()
        );
        for &(x, y, se) in &s.points {
            if let Some(se) = se {
                if se > 0.0 {
                    let _ = write!(
                        svg,
                        "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"{color}\" stroke-width=\"1\"/>\n",
                        px(x),
                        py(y - se),
                        py(y + se)
                    );
                }
            }
            let r = if s.engine == Engine::Simulate { 3.0 } else { 2.2 };
            let _ = write!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r}\" fill=\"{color}\"/>\n",
                px(x),
                py(y)
            );
        }
    }

    for (k, s) in series.iter().take(LEGEND_MAX).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let y = 60.0 + 20.0 * k as f64;
        let dash = dash_for(s.engine);
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let _ = write!(
            svg,
            "<line x1=\"{LEGEND_X}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"1.8\"{dash_attr}/>\n",
            LEGEND_X + 26.0
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#202020\">{}</text>\n",
            LEGEND_X + 32.0,
            y + 4.0,
            escape(&format!("{} {}", s.engine, s.target))
        );
    }
    if series.len() > LEGEND_MAX {
        let y = 60.0 + 20.0 * LEGEND_MAX as f64;
        let _ = write!(
            svg,
            "<text x=\"{LEGEND_X}\" y=\"{y:.2}\" font-size=\"11\" fill=\"#606060\">and {} more</text>\n",
            series.len() - LEGEND_MAX
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
