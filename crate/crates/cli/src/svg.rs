//! Minimal hand-rolled SVG histograms. The renderer only draws numbers it
//! is handed — it never recomputes statistics from raw samples.

use std::fmt::Write as _;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 55.0;

/// A bar chart over numeric x positions with an optional overlay polyline
/// (drawn point-to-point) and optional dashed vertical reference lines.
pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub bars: &'a [(f64, f64)],
    pub overlay: &'a [(f64, f64)],
    pub overlay_label: &'a str,
    pub vlines: &'a [f64],
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1000.0 || v.abs() < 0.01 {
        format!("{v:.1e}")
    } else if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.3}")
    }
}

pub fn render(chart: &Chart) -> String {
    let xs: Vec<f64> = chart
        .bars
        .iter()
        .chain(chart.overlay.iter())
        .map(|&(x, _)| x)
        .chain(chart.vlines.iter().copied())
        .collect();
    let (mut x_min, mut x_max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !x_min.is_finite() || x_min == x_max {
        x_min -= 1.0;
        x_max += 1.0;
    }
    // Leave one bar slot of padding on each side.
    let min_gap = min_spacing(chart.bars).unwrap_or((x_max - x_min) / 20.0);
    x_min -= min_gap;
    x_max += min_gap;
    let y_max = chart
        .bars
        .iter()
        .chain(chart.overlay.iter())
        .map(|&(_, y)| y)
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.08;

    let px = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y / y_max) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"13\">"
    );
    let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        escape(chart.title)
    );

    // Axes.
    let (x0, y0) = (MARGIN_L, HEIGHT - MARGIN_B);
    let _ = writeln!(
        s,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"black\"/>",
        WIDTH - MARGIN_R
    );
    let _ = writeln!(
        s,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{MARGIN_T}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(chart.x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(chart.y_label)
    );

    // Ticks.
    for i in 0..=5 {
        let xv = x_min + (x_max - x_min) * i as f64 / 5.0;
        let yv = y_max * i as f64 / 5.0;
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{y0}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\
             <text x=\"{0}\" y=\"{2}\" text-anchor=\"middle\">{3}</text>",
            px(xv),
            y0 + 5.0,
            y0 + 20.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\
             <text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5}</text>",
            x0 - 5.0,
            py(yv),
            x0,
            x0 - 8.0,
            py(yv) + 4.0,
            fmt_tick(yv)
        );
    }

    // Dashed reference lines (lattice overlay).
    for &x in chart.vlines {
        if x < x_min || x > x_max {
            continue;
        }
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{MARGIN_T}\" x2=\"{0}\" y2=\"{y0}\" stroke=\"#888\" \
             stroke-dasharray=\"4 4\"/>",
            px(x)
        );
    }

    // Bars.
    let bar_w = (min_gap * 0.8 / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R)).max(1.0);
    for &(x, y) in chart.bars {
        let top = py(y);
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"#4878a8\" fill-opacity=\"0.8\"/>",
            px(x) - bar_w / 2.0,
            top,
            bar_w,
            (y0 - top).max(0.0)
        );
    }

    // Overlay polyline with point markers.
    if !chart.overlay.is_empty() {
        let pts: Vec<String> = chart
            .overlay
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c03020\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
        for &(x, y) in chart.overlay {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#c03020\"/>",
                px(x),
                py(y)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"#c03020\" text-anchor=\"end\">{}</text>",
            WIDTH - MARGIN_R - 6.0,
            MARGIN_T + 16.0,
            escape(chart.overlay_label)
        );
    }

    s.push_str("</svg>\n");
    s
}

fn min_spacing(bars: &[(f64, f64)]) -> Option<f64> {
    let mut xs: Vec<f64> = bars.iter().map(|&(x, _)| x).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).min_by(f64::total_cmp)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
