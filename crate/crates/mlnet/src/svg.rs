//! Minimal static SVG plots: axes, histogram bars and polylines.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Rectangular bars `(left, right, height)`.
pub struct Bars {
    pub bins: Vec<(f64, f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub bars: Option<Bars>,
    pub series: Vec<Series>,
    /// Mark each data point with a dot.
    pub markers: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_max(v: f64) -> f64 {
    if !(v > 0.0) || !v.is_finite() {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for f in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if v <= f * mag {
            return f * mag;
        }
    }
    10.0 * mag
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            bars: None,
            series: Vec::new(),
            markers: false,
        }
    }

    fn extent(&self) -> (f64, f64, f64, f64) {
        let mut xs = Vec::new();
        let mut ys = vec![0.0];
        if let Some(b) = &self.bars {
            for &(l, r, h) in &b.bins {
                xs.extend([l, r]);
                ys.push(h);
            }
        }
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        let x0 = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let x1 = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (x0, x1) = if x0.is_finite() && x1 > x0 { (x0, x1) } else { (0.0, 1.0) };
        let y1 = nice_max(ys.iter().copied().fold(0.0, f64::max) * 1.05);
        (x0, x1, 0.0, y1)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.extent();
        let pw = WIDTH - 2.0 * MARGIN;
        let ph = HEIGHT - 2.0 * MARGIN;
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| HEIGHT - MARGIN - (y.clamp(y0, y1) - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        )
        .unwrap();

        if let Some(b) = &self.bars {
            for &(l, r, h) in &b.bins {
                if h > 0.0 {
                    writeln!(
                        s,
                        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#c7d4e8" stroke="#7f93b5" stroke-width="0.5"/>"##,
                        sx(l),
                        sy(h),
                        sx(r) - sx(l),
                        sy(0.0) - sy(h)
                    )
                    .unwrap();
                }
            }
        }

        for (i, series) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.6" points="{}"/>"#,
                pts.join(" ")
            )
            .unwrap();
            if self.markers {
                for p in &pts {
                    let (x, y) = p.split_once(',').unwrap();
                    writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{colour}"/>"#).unwrap();
                }
            }
            let ly = MARGIN + 8.0 + 16.0 * i as f64;
            writeln!(
                s,
                r#"<line x1="{:.1}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{:.1}" y="{}">{}</text>"#,
                WIDTH - MARGIN - 110.0,
                WIDTH - MARGIN - 90.0,
                WIDTH - MARGIN - 85.0,
                ly + 4.0,
                escape(&series.label)
            )
            .unwrap();
        }

        // axes and ticks
        let (bx, by) = (sx(x0), sy(y0));
        writeln!(
            s,
            r#"<path d="M{bx:.2},{:.2} V{by:.2} H{:.2}" fill="none" stroke="black"/>"#,
            sy(y1),
            sx(x1)
        )
        .unwrap();
        for t in 0..=5 {
            let fx = x0 + (x1 - x0) * t as f64 / 5.0;
            let fy = y0 + (y1 - y0) * t as f64 / 5.0;
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(fx),
                by + 16.0,
                trim(fx)
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                bx - 6.0,
                sy(fy) + 4.0,
                trim(fy)
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        s.push_str("</svg>\n");
        s
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}
