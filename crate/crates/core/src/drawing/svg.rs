use std::fmt::Write;

use super::OrthogonalDrawing;

const PX: f64 = 40.0;
const MARGIN: f64 = 20.0;

/// SVG with one `<line>` per segment, a dot per vertex, and a small square
/// at each bend. The grid's y axis points up, so rows are flipped.
pub fn render_svg(d: &OrthogonalDrawing) -> String {
    let (lo, hi) = if d.coords.is_empty() {
        (super::GridPoint::new(0, 0), super::GridPoint::new(0, 0))
    } else {
        d.bounds()
    };
    let width = (hi.x - lo.x) as f64 * PX + 2.0 * MARGIN;
    let height = (hi.y - lo.y) as f64 * PX + 2.0 * MARGIN;
    let sx = |x: i64| (x - lo.x) as f64 * PX + MARGIN;
    let sy = |y: i64| (hi.y - y) as f64 * PX + MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    for e in 0..d.edges.len() {
        for s in d.segments(e) {
            let _ = writeln!(
                out,
                r#"  <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2"/>"#,
                sx(s.a.x),
                sy(s.a.y),
                sx(s.b.x),
                sy(s.b.y)
            );
        }
        if let Some(b) = d.edges[e].bend {
            let _ = writeln!(out, r#"  <rect x="{}" y="{}" width="6" height="6" fill="gray"/>"#, sx(b.x) - 3.0, sy(b.y) - 3.0);
        }
    }
    for (v, p) in d.coords.iter().enumerate() {
        let _ = writeln!(out, r#"  <circle cx="{}" cy="{}" r="6" fill="steelblue"><title>{v}</title></circle>"#, sx(p.x), sy(p.y));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drawing::tests::square;

    #[test]
    fn square_has_four_lines() {
        let (_, d) = square();
        let svg = render_svg(&d);
        assert_eq!(svg.matches("<line").count(), 4);
        assert_eq!(svg.matches("<circle").count(), 4);
    }
}
