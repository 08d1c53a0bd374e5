//! Static SVG line plots of boundary curves.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Data window; each side defaults to the extent of the data.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub width: f64,
    pub height: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: String::new(),
            x_label: "R1".into(),
            y_label: "R2".into(),
            x_range: None,
            y_range: None,
            width: 640.0,
            height: 480.0,
        }
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 55.0); // left, right, top, bottom

fn extent(series: &[Series], pick: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in series.iter().flat_map(|s| &s.points) {
        lo = lo.min(pick(p));
        hi = hi.max(pick(p));
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * (1.0 + hi.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Tick step of the form 1, 2 or 5 times a power of ten, about five ticks.
fn tick_step(lo: f64, hi: f64) -> f64 {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(lo, hi);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(x: f64) -> String {
    let s = format!("{:.6}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Liang-Barsky clipping of the segment `a → b` to `[x0, x1] × [y0, y1]`.
fn clip(a: (f64, f64), b: (f64, f64), (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-dx, a.0 - x0), (dx, x1 - a.0), (-dy, a.1 - y0), (dy, y1 - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some(((a.0 + t0 * dx, a.1 + t0 * dy), (a.0 + t1 * dx, a.1 + t1 * dy)))
}

/// Pieces of a curve inside the window.
fn visible_runs(points: &[(f64, f64)], xr: (f64, f64), yr: (f64, f64)) -> Vec<Vec<(f64, f64)>> {
    let mut runs: Vec<Vec<(f64, f64)>> = Vec::new();
    let inside = |p: (f64, f64)| p.0 >= xr.0 && p.0 <= xr.1 && p.1 >= yr.0 && p.1 <= yr.1;
    if points.len() == 1 {
        if inside(points[0]) {
            runs.push(points.to_vec());
        }
        return runs;
    }
    let mut open = false;
    for w in points.windows(2) {
        match clip(w[0], w[1], xr, yr) {
            Some((a, b)) => {
                let run_continues = open && a == w[0];
                if !run_continues {
                    runs.push(vec![a]);
                }
                runs.last_mut().unwrap().push(b);
                open = b == w[1];
            }
            None => open = false,
        }
    }
    runs
}

pub fn render(series: &[Series], opts: &PlotOptions) -> String {
    let xr = opts.x_range.unwrap_or_else(|| extent(series, |p| p.0));
    let yr = opts.y_range.unwrap_or_else(|| extent(series, |p| p.1));
    let (w, h) = (opts.width, opts.height);
    let (ml, mr, mt, mb) = MARGIN;
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let sx = |x: f64| ml + (x - xr.0) / (xr.1 - xr.0) * pw;
    let sy = |y: f64| mt + ph - (y - yr.0) / (yr.1 - yr.0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if !opts.title.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            w / 2.0,
            escape(&opts.title)
        );
    }

    // grid and ticks
    for t in ticks(xr.0, xr.1) {
        let x = sx(t);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{mt:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##, mt + ph);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            mt + ph + 16.0,
            tick_label(t)
        );
    }
    for t in ticks(yr.0, yr.1) {
        let y = sy(t);
        let _ = writeln!(out, r##"<line x1="{ml:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, ml + pw);
        let _ =
            writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, ml - 6.0, y + 4.0, tick_label(t));
    }
    let _ =
        writeln!(out, r#"<rect x="{ml:.2}" y="{mt:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        h - 12.0,
        escape(&opts.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(&opts.y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pieces = Vec::new();
        for run in visible_runs(&s.points, xr, yr) {
            if run.len() == 1 {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    sx(run[0].0),
                    sy(run[0].1)
                );
                continue;
            }
            let coords: Vec<String> = run.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            pieces.push(format!("M{}", coords.join(" L")));
        }
        if !pieces.is_empty() {
            let _ =
                writeln!(out, r#"<path fill="none" stroke="{color}" stroke-width="1.8" d="{}"/>"#, pieces.join(" "));
        }
    }

    // legend, top right
    if series.iter().any(|s| !s.label.is_empty()) {
        let longest = series.iter().map(|s| s.label.chars().count()).max().unwrap_or(0) as f64;
        let (lw, lh) = (longest * 7.0 + 40.0, series.len() as f64 * 18.0 + 8.0);
        let (lx, ly) = (ml + pw - lw - 8.0, mt + 8.0);
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{ly:.2}" width="{lw:.2}" height="{lh:.2}" fill="white" stroke="gray"/>"#
        );
        for (i, s) in series.iter().enumerate() {
            let y = ly + 16.0 + i as f64 * 18.0;
            let color = PALETTE[i % PALETTE.len()];
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                lx + 6.0,
                y - 4.0,
                lx + 26.0,
                y - 4.0
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, lx + 32.0, escape(&s.label));
        }
    }
    out.push_str("</svg>\n");
    out
}
