//! Static SVG rendering of rate regions. Output depends only on the input
//! numbers (fixed formatting, no timestamps), so it can be hashed.

use std::fmt::Write;

use crate::regions::{RatePoint, RateRegion};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;
const TICKS: usize = 4;

fn axis_max(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        1.0
    } else {
        (v * 4.0 - 1e-9).ceil().max(1.0) / 4.0
    }
}

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        LEFT + v / self.x_max * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - v / self.y_max * (HEIGHT - TOP - BOTTOM)
    }

    fn points(&self, pts: &[RatePoint]) -> String {
        pts.iter()
            .map(|p| format!("{:.2},{:.2}", self.x(p.0), self.y(p.1)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Figure with the region's frontier (shaded underneath) and an optional
/// oracle curve drawn dashed.
pub fn render_svg(region: &RateRegion, oracle: Option<(&str, &RateRegion)>, title: &str) -> String {
    let all = region
        .frontier
        .iter()
        .chain(oracle.map(|o| o.1.frontier.iter()).into_iter().flatten());
    let (mx, my) = all.fold((0.0f64, 0.0f64), |(a, b), p| (a.max(p.0), b.max(p.1)));
    let f = Frame {
        x_max: axis_max(mx),
        y_max: axis_max(my),
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="16" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // grid and ticks
    for i in 0..=TICKS {
        let vx = f.x_max * i as f64 / TICKS as f64;
        let vy = f.y_max * i as f64 / TICKS as f64;
        let (px, py) = (f.x(vx), f.y(vy));
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            f.y(0.0),
            f.y(f.y_max)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##,
            f.x(0.0),
            f.x(f.x_max)
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{vx:.2}</text>"#,
            f.y(0.0) + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{vy:.2}</text>"#,
            f.x(0.0) - 6.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/>"#,
        f.x(0.0),
        f.y(0.0),
        f.x(f.x_max)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#,
        f.x(0.0),
        f.y(0.0),
        f.y(f.y_max)
    );
    let (first, second) = match region.metadata.kind.as_str() {
        "qq" | "analytic_phase_flip" => ("R (qubits per use)", "S (qubits per use)"),
        _ => ("r (bits per use)", "S (qubits per use)"),
    };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{first}</text>"#,
        (f.x(0.0) + f.x(f.x_max)) / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">{second}</text>"#,
        (f.y(0.0) + f.y(f.y_max)) / 2.0
    );

    if !region.frontier.is_empty() {
        let mut poly = vec![RatePoint(0.0, 0.0)];
        poly.extend(region.frontier.iter().copied());
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="#4477aa" fill-opacity="0.15" stroke="none"/>"##,
            f.points(&poly)
        );
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#4477aa" stroke-width="2"/>"##,
            f.points(&region.frontier)
        );
    }
    if let Some((_, o)) = oracle {
        if !o.frontier.is_empty() {
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#cc3311" stroke-width="1.5" stroke-dasharray="6,4"/>"##,
                f.points(&o.frontier)
            );
        }
    }

    // legend
    let lx = f.x(f.x_max) - 150.0;
    let ly = TOP + 16.0;
    let _ = writeln!(
        s,
        r##"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="#4477aa" stroke-width="2"/>"##,
        lx + 24.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}">computed (k = {})</text>"#,
        lx + 30.0,
        ly + 4.0,
        region.k
    );
    if let Some((name, _)) = oracle {
        let ly = ly + 18.0;
        let _ = writeln!(
            s,
            r##"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="#cc3311" stroke-width="1.5" stroke-dasharray="6,4"/>"##,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::{analytic_erasure_region, RegionMetadata};

    #[test]
    fn empty_region_draws_axes_only() {
        let svg = render_svg(&RateRegion::empty(RegionMetadata::default()), None, "empty");
        assert!(svg.starts_with("<?xml"));
        assert!(!svg.contains("<polyline"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn oracle_overlay_is_dashed() {
        let r = analytic_erasure_region(2, 11).unwrap();
        let svg = render_svg(&r, Some(("analytic", &r)), "erasure");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg, render_svg(&r, Some(("analytic", &r)), "erasure"));
    }
}
