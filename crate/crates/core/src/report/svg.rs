//! SVG 1.1 heatmap and trend charts, written by hand so output bytes depend
//! only on the data.

use std::fmt::Write as _;

use crate::proxy::{FieldMeans, LearnerRow, TrendPoint};

/// Colour at value 0 (lightest).
const RAMP_LOW: (f64, f64, f64) = (247.0, 251.0, 255.0);
/// Colour at value 1 (darkest).
const RAMP_HIGH: (f64, f64, f64) = (8.0, 48.0, 107.0);

const CELL: f64 = 28.0;
const LABEL_WIDTH: f64 = 110.0;
const TOP: f64 = 20.0;
const ID_BAND: f64 = 70.0;

type Measure = (&'static str, fn(&FieldMeans) -> f64);

/// Heatmap rows, top to bottom.
pub const HEATMAP_MEASURES: [Measure; 4] = [
    ("diff_std", |m| m.diff_std),
    ("il_reported", |m| m.il_reported),
    ("cl_reported", |m| m.cl_reported),
    ("combined_std", |m| m.combined_std),
];

/// Column name, stroke colour, accessor.
type Series = (&'static str, &'static str, fn(&FieldMeans) -> f64);

const TREND_SERIES: [Series; 5] = [
    ("diff_std_mean", "#1b6ca8", |m| m.diff_std),
    ("il_mean", "#e08a00", |m| m.il_reported),
    ("cl_mean", "#c0392b", |m| m.cl_reported),
    ("el_mean", "#6c757d", |m| m.el_std),
    ("combined_std_mean", "#2e8b57", |m| m.combined_std),
];

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Linear interpolation between [`RAMP_LOW`] and [`RAMP_HIGH`]; values are
/// clamped to `[0, 1]`.
pub fn ramp_colour(value: f64) -> String {
    let t = if value.is_finite() { value.clamp(0.0, 1.0) } else { 0.0 };
    let channel = |lo: f64, hi: f64| (lo + (hi - lo) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        channel(RAMP_LOW.0, RAMP_HIGH.0),
        channel(RAMP_LOW.1, RAMP_HIGH.1),
        channel(RAMP_LOW.2, RAMP_HIGH.2)
    )
}

/// One row per measure in [`HEATMAP_MEASURES`], one column per learner in
/// the given order, learner ids along the bottom edge. Emits exactly one
/// `<rect>` per cell.
pub fn heatmap_svg(rows: &[LearnerRow]) -> String {
    let width = LABEL_WIDTH + CELL * rows.len() as f64 + 10.0;
    let height = TOP + CELL * HEATMAP_MEASURES.len() as f64 + ID_BAND;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(
        "<!-- Per-learner averages; columns sorted ascending by mean cl_reported. \
Cell fill is a linear RGB ramp from #f7fbff (value 0) to #08306b (value 1). -->\n",
    );
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" \
viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    for (r, (name, value_of)) in HEATMAP_MEASURES.iter().enumerate() {
        let y = TOP + CELL * r as f64;
        let _ = writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{name}</text>",
            LABEL_WIDTH - 6.0,
            y + CELL / 2.0 + 4.0
        );
        for (c, row) in rows.iter().enumerate() {
            let v = value_of(&row.means);
            let _ = writeln!(
                s,
                "  <rect x=\"{}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\"><title>{} {name} {v}</title></rect>",
                LABEL_WIDTH + CELL * c as f64,
                ramp_colour(v),
                escape(&row.learner_id)
            );
        }
    }
    let label_y = TOP + CELL * HEATMAP_MEASURES.len() as f64 + 6.0;
    for (c, row) in rows.iter().enumerate() {
        let x = LABEL_WIDTH + CELL * c as f64 + CELL / 2.0 + 4.0;
        let _ = writeln!(
            s,
            "  <text x=\"{x}\" y=\"{label_y}\" transform=\"rotate(90 {x} {label_y})\">{}</text>",
            escape(&row.learner_id)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Line chart of the trend series against administration index. The y axis
/// spans `[0, 1]`.
pub fn trend_svg(points: &[TrendPoint]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const LEFT: f64 = 50.0;
    const RIGHT: f64 = 170.0;
    const PAD: f64 = 20.0;
    const BOTTOM: f64 = 40.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - PAD - BOTTOM;

    let lo = points.iter().map(|p| p.administration_index).min().unwrap_or(1) as f64;
    let hi = points.iter().map(|p| p.administration_index).max().unwrap_or(1) as f64;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x_of = |index: usize| LEFT + plot_w * (index as f64 - lo) / span;
    let y_of = |v: f64| PAD + plot_h * (1.0 - v.clamp(0.0, 1.0));

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<!-- Cross-learner means per administration index; y axis fixed to [0, 1]. -->\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" \
viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let (x0, x1, y0, y1) = (LEFT, LEFT + plot_w, PAD, PAD + plot_h);
    let _ = writeln!(
        s,
        "  <line x1=\"{x0}\" y1=\"{y1}\" x2=\"{x1}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = y_of(tick);
        let _ = writeln!(
            s,
            "  <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{tick}</text>",
            x0 - 6.0,
            y + 4.0
        );
    }
    for p in points {
        let x = x_of(p.administration_index);
        let _ = writeln!(
            s,
            "  <text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            y1 + 16.0,
            p.administration_index
        );
    }
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">administration index</text>",
        LEFT + plot_w / 2.0,
        H - 6.0
    );
    for (k, (name, colour, value_of)) in TREND_SERIES.iter().enumerate() {
        let coords: Vec<String> = points
            .iter()
            .map(|p| format!("{:.2},{:.2}", x_of(p.administration_index), y_of(value_of(&p.means))))
            .collect();
        let _ = writeln!(
            s,
            "  <polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\" points=\"{}\"><title>{name}</title></polyline>",
            coords.join(" ")
        );
        let ly = PAD + 16.0 * k as f64 + 4.0;
        let _ = writeln!(
            s,
            "  <line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{colour}\" stroke-width=\"2\"/>",
            x1 + 12.0,
            x1 + 30.0
        );
        let _ = writeln!(s, "  <text x=\"{}\" y=\"{}\">{name}</text>", x1 + 36.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}
