//! Standalone SVG figures rendered from precomputed geometry. The CSV
//! tables carry the same content; these are for eyeballing.

use std::fmt::Write;

use crate::bias::FunnelPoint;
use crate::effect::{EffectEstimate, Level};
use crate::pipeline::{ChasingRun, UpperBoundRow};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;

/// Papers at or above this total N are left off the power scatter so the
/// bulk of the field stays readable; the CSV keeps them.
pub const POWER_PLOT_MAX_N: u64 = 1250;

const PALETTE: [&str; 6] = ["#1b6ca8", "#d1495b", "#edae49", "#00798c", "#6a4c93", "#30638e"];

#[derive(Debug, Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    r0: f64,
    r1: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, r0: f64, r1: f64) -> Self {
        let (lo, hi) = if !(lo.is_finite() && hi.is_finite()) {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        };
        Scale { d0: lo, d1: hi, r0, r1 }
    }

    fn padded(lo: f64, hi: f64, r0: f64, r1: f64) -> Self {
        let pad = (hi - lo).abs() * 0.05;
        Scale::new(lo - pad, hi + pad, r0, r1)
    }

    fn at(&self, x: f64) -> f64 {
        self.r0 + (x - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)
    }

    /// About five round-numbered ticks.
    fn ticks(&self) -> Vec<f64> {
        let span = self.d1 - self.d0;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| span / s <= 6.0)
            .unwrap_or(10.0 * mag);
        let first = (self.d0 / step).ceil() as i64;
        let last = (self.d1 / step).floor() as i64;
        (first..=last).map(|i| i as f64 * step).collect()
    }
}

fn label(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Canvas {
    body: String,
    x: Scale,
    y: Scale,
}

impl Canvas {
    fn new(title: &str, xlab: &str, ylab: &str, x: (f64, f64), y: (f64, f64), pad: bool) -> Self {
        let mk = if pad { Scale::padded } else { Scale::new };
        let x = mk(x.0, x.1, LEFT, W - RIGHT);
        let y = mk(y.0, y.1, H - BOTTOM, TOP);
        let mut c = Canvas { body: String::new(), x, y };
        c.frame(title, xlab, ylab);
        c
    }

    fn frame(&mut self, title: &str, xlab: &str, ylab: &str) {
        let b = &mut self.body;
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
        let _ = writeln!(b, r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#444"/>"##, x1 - x0, y0 - y1);
        for t in self.x.ticks() {
            let px = self.x.at(t);
            let _ = writeln!(b, r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="#444"/>"##, y0 + 4.0);
            let _ = writeln!(b, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 18.0, label(t));
        }
        for t in self.y.ticks() {
            let py = self.y.at(t);
            let _ = writeln!(b, r##"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#444"/>"##, x0 - 4.0);
            let _ = writeln!(b, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 7.0, py + 4.0, label(t));
        }
        let _ = writeln!(b, r#"<text x="{}" y="22" text-anchor="middle" font-weight="bold">{}</text>"#, W / 2.0, escape(title));
        let _ = writeln!(b, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(xlab));
        let _ = writeln!(
            b,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(ylab)
        );
    }

    fn hline(&mut self, y: f64, colour: &str) {
        if (self.y.d0.min(self.y.d1)..=self.y.d0.max(self.y.d1)).contains(&y) {
            let py = self.y.at(y);
            let _ = writeln!(self.body, r#"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="{colour}" stroke-dasharray="4 3"/>"#, W - RIGHT);
        }
    }

    fn vline(&mut self, x: f64, colour: &str) {
        if (self.x.d0..=self.x.d1).contains(&x) {
            let px = self.x.at(x);
            let _ = writeln!(self.body, r#"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{}" stroke="{colour}" stroke-dasharray="4 3"/>"#, H - BOTTOM);
        }
    }

    fn dot(&mut self, x: f64, y: f64, r: f64, colour: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{colour}" fill-opacity="0.75"/>"#, self.x.at(x), self.y.at(y));
    }

    fn segment(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, colour: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="{width}"/>"#,
            self.x.at(x0), self.y.at(y0), self.x.at(x1), self.y.at(y1)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], colour: &str) {
        let mut d = String::new();
        for (x, y) in pts {
            let _ = write!(d, "{:.2},{:.2} ", self.x.at(*x), self.y.at(*y));
        }
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, d.trim_end());
    }

    fn legend(&mut self, entries: &[(String, &str)]) {
        for (i, (name, colour)) in entries.iter().enumerate() {
            let y = TOP + 14.0 + 16.0 * i as f64;
            let x = W - RIGHT - 150.0;
            let _ = writeln!(self.body, r#"<rect x="{x}" y="{}" width="10" height="10" fill="{colour}"/>"#, y - 9.0);
            let _ = writeln!(self.body, r#"<text x="{}" y="{y}">{}</text>"#, x + 15.0, escape(name));
        }
    }

    fn finish(self) -> String {
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
                "\n",
                r#"<rect width="{w}" height="{h}" fill="white"/>"#,
                "\n{body}</svg>\n"
            ),
            w = W,
            h = H,
            body = self.body
        )
    }
}

fn extent(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn empty(title: &str) -> String {
    let mut c = Canvas::new(title, "", "", (0.0, 1.0), (0.0, 1.0), false);
    let _ = writeln!(c.body, r#"<text x="{}" y="{}" text-anchor="middle">no data</text>"#, W / 2.0, H / 2.0);
    c.finish()
}

/// Estimates ranked by log OR with their intervals; the MCC-widened
/// interval is drawn underneath in a lighter tone.
pub fn caterpillar(estimates: &[EffectEstimate]) -> String {
    let title = "Effect sizes with 95% and MCC-adjusted intervals";
    if estimates.is_empty() {
        return empty(title);
    }
    let mut order: Vec<&EffectEstimate> = estimates.iter().collect();
    order.sort_by(|a, b| a.log_or.total_cmp(&b.log_or).then(a.test_id.cmp(&b.test_id)));
    let y = extent(order.iter().flat_map(|e| [e.ci_mcc.lo, e.ci_mcc.hi, e.log_or]));
    let n = order.len() as f64;
    let mut c = Canvas::new(title, "rank", "log OR", (0.0, n + 1.0), y, true);
    c.hline(0.0, "#888");
    for (i, e) in order.iter().enumerate() {
        let x = i as f64 + 1.0;
        c.segment(x, e.ci_mcc.lo, x, e.ci_mcc.hi, "#b8c7d9", 1.0);
        c.segment(x, e.ci.lo, x, e.ci.hi, PALETTE[0], 1.0);
        c.dot(x, e.log_or, 1.8, "#222");
    }
    c.finish()
}

/// Effect against precision (1/SE), so the most precise studies sit on top.
pub fn funnel(points: &[FunnelPoint]) -> String {
    let title = "Funnel plot";
    if points.is_empty() {
        return empty(title);
    }
    let x = extent(points.iter().map(|p| p.log_or));
    let y = extent(points.iter().map(|p| 1.0 / p.se));
    let mut c = Canvas::new(title, "log OR", "1 / SE", x, (0.0, y.1), true);
    c.vline(0.0, "#888");
    for p in points {
        c.dot(p.log_or, 1.0 / p.se, 3.0, PALETTE[0]);
    }
    c.finish()
}

/// Upper-bound power of each paper by total sample size, one colour per
/// threshold.
pub fn power(rows: &[UpperBoundRow]) -> String {
    let title = "Upper-bound power by sample size";
    let shown: Vec<&UpperBoundRow> = rows.iter().filter(|r| r.total_n < POWER_PLOT_MAX_N).collect();
    if shown.is_empty() {
        return empty(title);
    }
    let x = extent(shown.iter().map(|r| r.total_n as f64));
    let mut c = Canvas::new(title, "total N", "power", x, (0.0, 1.0), true);
    c.hline(0.8, "#888");
    let mut legend = Vec::new();
    for (i, level) in Level::ALL.iter().enumerate() {
        let colour = PALETTE[i];
        let mut pts: Vec<(f64, f64)> =
            shown.iter().filter(|r| r.level == *level).map(|r| (r.total_n as f64, r.power)).collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(n, p) in &pts {
            c.dot(n, p, 2.5, colour);
        }
        legend.push((level.as_str().to_string(), colour));
    }
    c.legend(&legend);
    c.finish()
}

/// p of the excess-significance test across the alpha grid.
pub fn chasing(runs: &[ChasingRun]) -> String {
    let title = "Excess significance across alpha";
    let curves: Vec<(&ChasingRun, Vec<(f64, f64)>)> = runs
        .iter()
        .map(|r| {
            let pts = r
                .curve
                .alpha_grid
                .iter()
                .zip(&r.curve.p_values)
                .filter_map(|(a, p)| p.map(|p| (*a, p)))
                .collect();
            (r, pts)
        })
        .collect();
    if curves.iter().all(|(_, p)| p.is_empty()) {
        return empty(title);
    }
    let x = extent(runs.iter().flat_map(|r| r.curve.alpha_grid.iter().copied()));
    let mut c = Canvas::new(title, "alpha", "p", x, (0.0, 1.0), true);
    c.hline(0.05, "#d1495b");
    c.vline(0.05, "#888");
    let mut legend = Vec::new();
    for (i, (run, pts)) in curves.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let colour = PALETTE[i % PALETTE.len()];
        c.polyline(pts, colour);
        let mcc = if run.curve.mcc_applied { "MCC" } else { "no MCC" };
        legend.push((format!("{}, {mcc}", run.level.as_str()), colour));
    }
    c.legend(&legend);
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_inside() {
        let s = Scale::new(0.013, 0.2, 0.0, 1.0);
        let t = s.ticks();
        assert!(t.len() >= 3 && t.len() <= 7);
        assert!(t.iter().all(|v| (0.013..=0.2).contains(v)));
        assert_eq!(label(0.05), "0.05");
        assert_eq!(label(-0.0), "0");
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let s = Scale::new(2.0, 2.0, 0.0, 100.0);
        assert!(s.at(2.0).is_finite());
        assert!(empty("x").contains("no data"));
        assert!(funnel(&[]).starts_with("<svg"));
    }

    #[test]
    fn funnel_has_one_circle_per_point() {
        let pts: Vec<FunnelPoint> = (0..7)
            .map(|i| FunnelPoint {
                paper_id: format!("P{i}"),
                log_or: i as f64 * 0.1,
                se: 0.1 + i as f64 * 0.05,
                aggregated: true,
                n_tests: 1,
            })
            .collect();
        let svg = funnel(&pts);
        assert_eq!(svg.matches("<circle").count(), 7);
        assert!(svg.ends_with("</svg>\n"));
    }
}
