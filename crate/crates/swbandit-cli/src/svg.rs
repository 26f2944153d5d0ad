//! Native SVG rendering of regret curves: axes, optional log scale, legend,
//! standard-error bands. No external plotting process, byte-deterministic
//! output.

use std::fmt::Write as _;

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 52.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// One decimated curve: `(round, mean, stderr)` triples.
pub struct Curve {
    pub label: String,
    pub points: Vec<(usize, f64, f64)>,
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

/// Tick positions covering `[lo, hi]` at a round step size.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw_step = span / 5.0;
    let magnitude = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|&s| span / s <= 6.0)
        .unwrap_or(magnitude * 10.0);
    let mut ticks = Vec::new();
    let mut tick = (lo / step).ceil() * step;
    while tick <= hi + 1e-9 * span {
        ticks.push(tick);
        tick += step;
    }
    ticks
}

/// Render curves to an SVG document.
///
/// With `log_y`, values are drawn on a log10 axis; non-positive values are
/// clamped to half the smallest positive value on display (an all-zero
/// oracle curve stays a flat floor line).
pub fn render_regret_svg(curves: &[Curve], log_y: bool) -> String {
    let x_max = curves
        .iter()
        .flat_map(|c| c.points.last())
        .map(|&(t, _, _)| t as f64)
        .fold(1.0f64, f64::max);
    let y_raw_max = curves
        .iter()
        .flat_map(|c| &c.points)
        .map(|&(_, m, s)| m + s)
        .fold(0.0f64, f64::max);

    let min_positive = curves
        .iter()
        .flat_map(|c| &c.points)
        .map(|&(_, m, _)| m)
        .filter(|&m| m > 0.0)
        .fold(f64::INFINITY, f64::min);
    let log_floor = if min_positive.is_finite() {
        (min_positive / 2.0).max(1e-12)
    } else {
        1e-3
    };

    let (y_lo, y_hi) = if log_y {
        let hi = if y_raw_max > 0.0 { y_raw_max } else { 1.0 };
        (log_floor.log10(), hi.log10().max(log_floor.log10() + 1.0))
    } else {
        (0.0, if y_raw_max > 0.0 { y_raw_max * 1.05 } else { 1.0 })
    };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_pos = |t: f64| MARGIN_LEFT + (t / x_max) * plot_w;
    let y_value = |v: f64| if log_y { v.max(log_floor).log10() } else { v };
    let y_pos = |v: f64| {
        let clamped = y_value(v).clamp(y_lo, y_hi);
        MARGIN_TOP + plot_h - (clamped - y_lo) / (y_hi - y_lo) * plot_h
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );

    // Axes.
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"black\"/>",
        MARGIN_LEFT + plot_w
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{MARGIN_TOP}\" stroke=\"black\"/>"
    );

    for tick in linear_ticks(0.0, x_max) {
        let x = x_pos(tick);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{y0}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            fmt2(x),
            fmt2(x),
            fmt2(y0 + 5.0)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            fmt2(x),
            fmt2(y0 + 20.0),
            tick as u64
        );
    }
    for tick in linear_ticks(y_lo, y_hi) {
        let y = MARGIN_TOP + plot_h - (tick - y_lo) / (y_hi - y_lo) * plot_h;
        let label = if log_y {
            format!("1e{tick:.0}")
        } else if tick.abs() >= 1000.0 {
            format!("{tick:.0}")
        } else {
            format!("{tick:.6}")
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        };
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{x0}\" y2=\"{}\" stroke=\"black\"/>",
            fmt2(x0 - 5.0),
            fmt2(y),
            fmt2(y)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{label}</text>",
            fmt2(x0 - 8.0),
            fmt2(y + 4.0)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">round</text>",
        fmt2(MARGIN_LEFT + plot_w / 2.0),
        fmt2(HEIGHT - 12.0)
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {})\">mean regret</text>",
        fmt2(MARGIN_TOP + plot_h / 2.0),
        fmt2(MARGIN_TOP + plot_h / 2.0)
    );

    // Bands first so every curve stays visible on top of them.
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if curve.points.iter().any(|&(_, _, s)| s > 0.0) {
            let mut path = String::from("M");
            for &(t, m, s) in &curve.points {
                let _ = write!(path, " {} {}", fmt2(x_pos(t as f64)), fmt2(y_pos(m + s)));
            }
            for &(t, m, s) in curve.points.iter().rev() {
                let _ = write!(path, " L {} {}", fmt2(x_pos(t as f64)), fmt2(y_pos(m - s)));
            }
            let _ = writeln!(
                svg,
                "<path d=\"{path} Z\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>"
            );
        }
    }
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for &(t, m, _) in &curve.points {
            let _ = write!(points, "{},{} ", fmt2(x_pos(t as f64)), fmt2(y_pos(m)));
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            points.trim_end()
        );
    }

    // Legend.
    let legend_x = MARGIN_LEFT + 12.0;
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{legend_x}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>",
            fmt2(y),
            fmt2(legend_x + 22.0),
            fmt2(y)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>",
            fmt2(legend_x + 28.0),
            fmt2(y + 4.0),
            curve.label
        );
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_curves() -> Vec<Curve> {
        vec![
            Curve {
                label: "a".to_string(),
                points: (1..=100).map(|t| (t, t as f64 * 0.5, 1.0)).collect(),
            },
            Curve {
                label: "oracle".to_string(),
                points: (1..=100).map(|t| (t, 0.0, 0.0)).collect(),
            },
        ]
    }

    #[test]
    fn renders_curves_and_legend() {
        let svg = render_regret_svg(&sample_curves(), false);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">a</text>"));
        assert!(svg.contains(">oracle</text>"));
        assert!(svg.contains("mean regret"));
        // Exactly one band: the oracle curve has zero stderr.
        assert_eq!(svg.matches("fill-opacity").count(), 1);
    }

    #[test]
    fn log_scale_handles_zeros() {
        let svg = render_regret_svg(&sample_curves(), true);
        assert!(svg.contains("1e"));
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }

    #[test]
    fn deterministic_output() {
        let a = render_regret_svg(&sample_curves(), false);
        let b = render_regret_svg(&sample_curves(), false);
        assert_eq!(a, b);
    }
}
