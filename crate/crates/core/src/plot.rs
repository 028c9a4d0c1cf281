//! Static SVG rendering of a traced curve with its cone.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::flow::TracedCurve;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 420.0;
pub const MARGIN: f64 = 24.0;

/// Screen placement: origin at bottom center, equal scale on both axes,
/// screen `y` pointing down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: (f64, f64),
    pub scale: f64,
}

impl Frame {
    pub fn fit(points: &[Complex64], cone: Option<f64>) -> Frame {
        let mut half_w: f64 = 0.0;
        let mut top: f64 = 0.0;
        for p in points {
            half_w = half_w.max(p.re.abs());
            top = top.max(p.im);
        }
        if let Some(m) = cone {
            half_w = half_w.max(m * top);
        }
        let avail_x = WIDTH / 2.0 - MARGIN;
        let avail_y = HEIGHT - 2.0 * MARGIN;
        let sx = if half_w > 0.0 {
            avail_x / half_w
        } else {
            f64::INFINITY
        };
        let sy = if top > 0.0 {
            avail_y / top
        } else {
            f64::INFINITY
        };
        let scale = sx.min(sy);
        Frame {
            origin: (WIDTH / 2.0, HEIGHT - MARGIN),
            scale: if scale.is_finite() { scale } else { 1.0 },
        }
    }

    pub fn map(&self, z: Complex64) -> (f64, f64) {
        (
            self.origin.0 + self.scale * z.re,
            self.origin.1 - self.scale * z.im,
        )
    }
}

/// End points of the two cone rays `|Re z| = m·Im z`, clipped to the plot
/// area. Both rays have screen slope `∓1/m`.
pub fn cone_rays(frame: &Frame, m: f64) -> [(f64, f64); 2] {
    let (cx, cy) = frame.origin;
    let rise = cy - MARGIN;
    let run = WIDTH / 2.0 - MARGIN;
    let len = if m > 0.0 { rise.min(run / m) } else { rise };
    [(cx + m * len, cy - len), (cx - m * len, cy - len)]
}

/// SVG document with the curve polyline (starting at `γ(0) = 0`) and, when
/// `cone` is given, the rays of the cone `|Re z| = m·Im z`.
pub fn render_svg(curve: &TracedCurve, cone: Option<f64>, title: &str) -> String {
    let mut points = vec![Complex64::new(0.0, 0.0)];
    points.extend(curve.points());
    let frame = Frame::fit(&points, cone);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ox, oy) = frame.origin;
    let _ = writeln!(
        s,
        r##"<line id="axis" x1="{}" y1="{oy}" x2="{}" y2="{oy}" stroke="#999" stroke-width="1"/>"##,
        MARGIN,
        WIDTH - MARGIN
    );
    if let Some(m) = cone {
        for (id, (x, y)) in ["cone-right", "cone-left"].iter().zip(cone_rays(&frame, m)) {
            let _ = writeln!(
                s,
                r##"<line id="{id}" x1="{ox}" y1="{oy}" x2="{x}" y2="{y}" stroke="#c33" stroke-width="1" stroke-dasharray="6 4"/>"##
            );
        }
    }
    let mut poly = String::new();
    for p in &points {
        let (x, y) = frame.map(*p);
        let _ = write!(poly, "{x},{y} ");
    }
    let _ = writeln!(
        s,
        r##"<polyline id="curve" points="{}" fill="none" stroke="#136" stroke-width="1.5"/>"##,
        poly.trim_end()
    );
    let label = match cone {
        Some(m) => format!("{title}  m = {m:.5}"),
        None => title.to_string(),
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13">{}</text>"#,
        MARGIN,
        MARGIN - 6.0,
        escape(&label)
    );
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
