//! Minimal hand-written SVG charts. Output is plain text and stable for
//! identical input, so plots diff cleanly between runs.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        esc(title)
    );
}

fn labels(out: &mut String, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 12.0,
        esc(xlabel)
    );
    let cy = TOP + (H - TOP - BOTTOM) / 2.0;
    let _ = write!(
        out,
        r#"<text x="16" y="{cy}" text-anchor="middle" transform="rotate(-90 16 {cy})">{}</text>"#,
        esc(ylabel)
    );
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Axis mapping, linear or log10.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool, from: f64, to: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        Self { lo, hi, log, from, to }
    }

    fn map(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some(self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from))
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            (self.lo as i32..=self.hi as i32).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=5)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 5.0)
                .collect()
        }
    }
}

fn frame(out: &mut String, x: &Axis, y: &Axis) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = write!(
        out,
        r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        x1 - x0,
        y0 - y1
    );
    for t in x.ticks() {
        if let Some(px) = x.map(t) {
            let _ = write!(
                out,
                r##"<line x1="{px:.1}" y1="{y0}" x2="{px:.1}" y2="{}" stroke="#333"/>"##,
                y0 + 5.0
            );
            let _ = write!(
                out,
                r#"<text x="{px:.1}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 18.0,
                fmt_tick(t)
            );
        }
    }
    for t in y.ticks() {
        if let Some(py) = y.map(t) {
            let _ = write!(
                out,
                r##"<line x1="{}" y1="{py:.1}" x2="{x0}" y2="{py:.1}" stroke="#333"/>"##,
                x0 - 5.0
            );
            let _ = write!(
                out,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 - 8.0,
                py + 4.0,
                fmt_tick(t)
            );
        }
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * i as f64;
        let c = PALETTE[i % PALETTE.len()];
        let _ = write!(
            out,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{c}"/>"#,
            W - RIGHT - 150.0,
            y - 9.0
        );
        let _ = write!(out, r#"<text x="{}" y="{y}">{}</text>"#, W - RIGHT - 135.0, esc(name));
    }
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_x: bool, log_y: bool) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let x = Axis::new(
        series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
        log_x,
        LEFT,
        W - RIGHT,
    );
    let y = Axis::new(
        series.iter().flat_map(|s| s.points.iter().map(|p| p.1)),
        log_y,
        H - BOTTOM,
        TOP,
    );
    frame(&mut out, &x, &y);
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter_map(|&(a, b)| Some(format!("{:.1},{:.1}", x.map(a)?, y.map(b)?)))
            .collect();
        let _ = write!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.3" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            pts.join(" ")
        );
    }
    legend(&mut out, &series.iter().map(|s| s.label.as_str()).collect::<Vec<_>>());
    labels(&mut out, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

/// Mean curve with a ±SD band.
pub fn ribbon_plot(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], mean: &[f64], sd: &[f64]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let x = Axis::new(xs.iter().copied(), false, LEFT, W - RIGHT);
    let envelope = mean.iter().zip(sd).flat_map(|(m, s)| [m - s, m + s]);
    let y = Axis::new(envelope, false, H - BOTTOM, TOP);
    frame(&mut out, &x, &y);
    let mut band: Vec<String> = Vec::new();
    for i in 0..xs.len() {
        if let (Some(a), Some(b)) = (x.map(xs[i]), y.map(mean[i] + sd[i])) {
            band.push(format!("{a:.1},{b:.1}"));
        }
    }
    for i in (0..xs.len()).rev() {
        if let (Some(a), Some(b)) = (x.map(xs[i]), y.map(mean[i] - sd[i])) {
            band.push(format!("{a:.1},{b:.1}"));
        }
    }
    let _ = write!(
        out,
        r#"<polygon fill="{}" fill-opacity="0.25" stroke="none" points="{}"/>"#,
        PALETTE[0],
        band.join(" ")
    );
    let line: Vec<String> = xs
        .iter()
        .zip(mean)
        .filter_map(|(&a, &b)| Some(format!("{:.1},{:.1}", x.map(a)?, y.map(b)?)))
        .collect();
    let _ = write!(
        out,
        r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
        PALETTE[0],
        line.join(" ")
    );
    labels(&mut out, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

fn heat_colour(v: f64, lo: f64, hi: f64) -> String {
    let t = if v.is_finite() {
        ((v - lo) / (hi - lo).max(1e-12)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    // White to dark blue.
    let r = (255.0 * (1.0 - 0.85 * t)) as u8;
    let g = (255.0 * (1.0 - 0.6 * t)) as u8;
    let b = (255.0 * (1.0 - 0.2 * t)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Grid of values with row labels on the left and column labels below;
/// the colour scale spans `[min(0, lowest), 1]`.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    cols: &[String],
    rows: &[String],
    values: &[Vec<f64>],
) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let lo = values
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::min);
    let hi = 1.0;
    let cw = (W - LEFT - RIGHT) / cols.len().max(1) as f64;
    let rh = (H - TOP - BOTTOM) / rows.len().max(1) as f64;
    for (r, row) in values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let (x, y) = (LEFT + c as f64 * cw, TOP + r as f64 * rh);
            let _ = write!(
                out,
                r##"<rect x="{x:.1}" y="{y:.1}" width="{cw:.1}" height="{rh:.1}" fill="{}" stroke="#fff"/>"##,
                heat_colour(v, lo, hi)
            );
            let ink = if v.is_finite() && (v - lo) / (hi - lo) > 0.55 {
                "white"
            } else {
                "black"
            };
            let txt = if v.is_finite() { format!("{v:.2}") } else { "n/a".into() };
            let _ = write!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" fill="{ink}">{txt}</text>"#,
                x + cw / 2.0,
                y + rh / 2.0 + 4.0
            );
        }
    }
    for (c, name) in cols.iter().enumerate() {
        let _ = write!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + (c as f64 + 0.5) * cw,
            H - BOTTOM + 16.0,
            esc(name)
        );
    }
    for (r, name) in rows.iter().enumerate() {
        let _ = write!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            TOP + (r as f64 + 0.5) * rh + 4.0,
            esc(name)
        );
    }
    labels(&mut out, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

/// Bars with optional symmetric error whiskers.
pub fn bar_chart(title: &str, ylabel: &str, names: &[String], values: &[f64], errors: Option<&[f64]>) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let tops = values.iter().zip(0..).map(|(v, i)| v + errors.map_or(0.0, |e| e[i]));
    let y = Axis::new(tops.chain([0.0]), false, H - BOTTOM, TOP);
    let x = Axis {
        lo: 0.0,
        hi: names.len().max(1) as f64,
        log: false,
        from: LEFT,
        to: W - RIGHT,
    };
    frame(&mut out, &Axis { lo: 0.0, hi: 0.0, ..x }, &y);
    let bw = (W - LEFT - RIGHT) / names.len().max(1) as f64;
    let base = y.map(0.0).unwrap_or(H - BOTTOM);
    for (i, (&v, name)) in values.iter().zip(names).enumerate() {
        let Some(top) = y.map(v) else { continue };
        let x0 = LEFT + i as f64 * bw + bw * 0.2;
        let _ = write!(
            out,
            r#"<rect x="{x0:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
            top.min(base),
            bw * 0.6,
            (base - top).abs(),
            PALETTE[i % PALETTE.len()]
        );
        if let Some(e) = errors.and_then(|e| e.get(i)) {
            if let (Some(a), Some(b)) = (y.map(v - e), y.map(v + e)) {
                let cx = x0 + bw * 0.3;
                let _ = write!(
                    out,
                    r##"<line x1="{cx:.1}" y1="{a:.1}" x2="{cx:.1}" y2="{b:.1}" stroke="#000"/>"##
                );
            }
        }
        let _ = write!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + bw * 0.3,
            H - BOTTOM + 16.0,
            esc(name)
        );
    }
    labels(&mut out, "", ylabel);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed_and_stable() {
        let s = vec![Series {
            label: "a<b".into(),
            points: vec![(0.1, 1.0), (1.0, 0.1), (10.0, 0.01)],
        }];
        let a = line_plot("psd", "f", "P", &s, true, true);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("a&lt;b"));
        assert_eq!(a, line_plot("psd", "f", "P", &s, true, true));
        let h = heatmap(
            "r2",
            "h",
            "mux",
            &["0".into(), "1".into()],
            &["x".into()],
            &[vec![0.5, f64::NAN]],
        );
        assert!(h.contains("n/a") && h.contains("0.50"));
        let r = ribbon_plot(
            "phase",
            "phase",
            "z",
            &[0.0, 0.5, 1.0],
            &[0.0, 1.0, 0.0],
            &[0.1, 0.1, 0.1],
        );
        assert!(r.contains("<polygon"));
        let b = bar_chart(
            "esp",
            "index",
            &["a".into(), "b".into()],
            &[1.0, 2.0],
            Some(&[0.1, 0.2]),
        );
        assert_eq!(b.matches("<rect").count(), 4);
    }
}
