//! Minimal SVG line plots and heat maps.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = write!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Line plot of one or more series, with an optional labelled horizontal line.
pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(&str, &[(f64, f64)])],
    hline: Option<(&str, f64)>,
) -> String {
    let all = || series.iter().flat_map(|(_, pts)| pts.iter());
    let (x0, x1) = range(all().map(|p| p.0));
    let (y0, y1) = range(all().map(|p| p.1).chain(hline.map(|h| h.1)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, title);
    let _ = write!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (v, anchor_x) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = write!(
            out,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN + 16.0,
            tick(v)
        );
    }
    for v in [y0, y1] {
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            sy(v) + 4.0,
            tick(v)
        );
    }
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let _ = write!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = write!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 120.0,
            MARGIN + 16.0 + 14.0 * i as f64,
            escape(name)
        );
    }
    if let Some((label, y)) = hline {
        let _ = write!(
            out,
            r##"<line x1="{MARGIN}" x2="{0}" y1="{1}" y2="{1}" stroke="#555" stroke-dasharray="4 3"/>"##,
            WIDTH - MARGIN,
            sy(y)
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            MARGIN + 4.0,
            sy(y) - 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heat map of `rows × columns` values on a log colour scale, rows drawn top
/// to bottom.
pub fn heat_map(title: &str, xlabel: &str, ylabel: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let n_rows = rows.len().max(1);
    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let (lo, hi) = range(rows.iter().flatten().filter(|v| **v > 0.0).map(|v| v.ln()));
    let cw = (WIDTH - 2.0 * MARGIN) / n_cols as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / n_rows as f64;
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let t = if *v > 0.0 {
                ((v.ln() - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let _ = write!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                MARGIN + j as f64 * cw,
                MARGIN + i as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                colour(t)
            );
        }
    }
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let _ = write!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Dark blue through yellow.
fn colour(t: f64) -> String {
    let stops = [
        (13.0, 8.0, 135.0),
        (204.0, 71.0, 120.0),
        (240.0, 249.0, 33.0),
    ];
    let (a, b, u) = if t < 0.5 {
        (stops[0], stops[1], 2.0 * t)
    } else {
        (stops[1], stops[2], 2.0 * t - 1.0)
    };
    let mix = |x: f64, y: f64| (x + (y - x) * u).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let pts = [(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)];
        let svg = line_plot("a < b", "x", "y", &[("s", &pts)], Some(("thr", 2.5)));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn heat_map_has_one_cell_per_value() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.0, 4.0]];
        let svg = heat_map("h", "f", "cell", &rows);
        assert_eq!(svg.matches("<rect").count(), 1 + 6);
        assert_eq!(colour(0.0), "#0d0887");
        assert_eq!(colour(1.0), "#f0f921");
    }
}
