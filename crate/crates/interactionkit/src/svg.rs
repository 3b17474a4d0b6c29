//! Self-contained SVG line charts of aggregated sweep results.
//!
//! MSE charts use a logarithmic y axis, Prec@10 charts a linear one. Each
//! method gets one `<path class="series">` and a translucent standard-error
//! band.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::sweep::AggregateRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Prec,
}

impl Metric {
    fn label(self) -> &'static str {
        match self {
            Metric::Mse => "MSE (log scale)",
            Metric::Prec => "Prec@10",
        }
    }

    fn file_prefix(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Prec => "prec",
        }
    }

    fn value(self, r: &AggregateRow) -> (f64, f64) {
        match self {
            Metric::Mse => (r.mse_mean, r.mse_se),
            Metric::Prec => (r.prec_mean, r.prec_se),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Maps data values to pixel rows.
struct YAxis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl YAxis {
    fn new(metric: Metric, values: impl Iterator<Item = (f64, f64)>) -> Self {
        match metric {
            Metric::Prec => YAxis { log: false, lo: 0.0, hi: 1.0 },
            Metric::Mse => {
                let mut lo = f64::INFINITY;
                let mut hi: f64 = 0.0;
                for (m, se) in values {
                    for v in [m - se, m, m + se] {
                        if v > 0.0 {
                            lo = lo.min(v);
                            hi = hi.max(v);
                        }
                    }
                }
                if !lo.is_finite() {
                    lo = 1e-3;
                    hi = 1.0;
                }
                let lo = 10f64.powf(lo.log10().floor());
                let hi = 10f64.powf(hi.log10().ceil().max(lo.log10() + 1.0));
                YAxis { log: true, lo, hi }
            }
        }
    }

    fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    fn y(&self, v: f64) -> f64 {
        let v = self.clamp(v);
        let t = if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        };
        TOP + (1.0 - t) * (HEIGHT - TOP - BOTTOM)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
            (a..=b).map(|e| (10f64.powi(e), format!("1e{e}"))).collect()
        } else {
            (0..=5).map(|i| (i as f64 / 5.0, format!("{:.1}", i as f64 / 5.0))).collect()
        }
    }
}

/// One chart for the rows of a single `(kind, order)`.
pub fn chart(rows: &[AggregateRow], kind: &str, order: usize, metric: Metric) -> String {
    let rows: Vec<&AggregateRow> = rows.iter().filter(|r| r.kind == kind && r.order == order).collect();
    let mut methods: Vec<&str> = Vec::new();
    for r in &rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let budgets: BTreeSet<u64> = rows.iter().map(|r| r.budget).collect();
    let (bmin, bmax) = match (budgets.first(), budgets.last()) {
        (Some(&a), Some(&b)) if a < b => (a as f64, b as f64),
        (Some(&a), _) => (a as f64 - 1.0, a as f64 + 1.0),
        _ => (0.0, 1.0),
    };
    let x = |b: u64| LEFT + (b as f64 - bmin) / (bmax - bmin) * (WIDTH - LEFT - RIGHT);
    let axis = YAxis::new(metric, rows.iter().map(|r| metric.value(r)));
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text class="title" x="{}" y="22" text-anchor="middle" font-size="15">{} for {} order {order}</text>"#,
        (x0 + x1) / 2.0,
        escape(metric.label()),
        escape(kind)
    );
    let _ = writeln!(s, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(s, "</g>");
    for (v, label) in axis.ticks() {
        let y = axis.y(v);
        let _ = writeln!(s, r##"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"##, x0 - 5.0);
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#e0e0e0"/>"##);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 8.0, y + 4.0);
    }
    for &b in &budgets {
        let xb = x(b);
        let _ = writeln!(s, r#"<line x1="{xb:.2}" y1="{y1}" x2="{xb:.2}" y2="{}" stroke="black"/>"#, y1 + 5.0);
        let _ = writeln!(s, r#"<text x="{xb:.2}" y="{}" text-anchor="middle">{b}</text>"#, y1 + 20.0);
    }
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">budget</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(metric.label())
    );

    for (i, method) in methods.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<&AggregateRow> = rows.iter().copied().filter(|r| r.method == *method).collect();
        pts.sort_by_key(|r| r.budget);
        let upper: Vec<String> = pts
            .iter()
            .map(|r| {
                let (m, se) = metric.value(r);
                format!("{:.2},{:.2}", x(r.budget), axis.y(m + se))
            })
            .collect();
        let lower: Vec<String> = pts
            .iter()
            .rev()
            .map(|r| {
                let (m, se) = metric.value(r);
                format!("{:.2},{:.2}", x(r.budget), axis.y(m - se))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let d: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let cmd = if j == 0 { 'M' } else { 'L' };
                format!("{cmd}{:.2},{:.2}", x(r.budget), axis.y(metric.value(r).0))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<path class="series" data-method="{0}" d="{1}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            escape(method),
            d.join(" ")
        );
        let ly = y0 + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            x1 + 15.0,
            x1 + 35.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x1 + 40.0, ly + 4.0, escape(method));
    }
    s.push_str("</svg>\n");
    s
}

/// Writes an MSE and a Prec@10 chart for every `(kind, order)` in `rows`.
pub fn write_charts(dir: &Path, rows: &[AggregateRow]) -> Result<Vec<PathBuf>> {
    let groups: BTreeSet<(usize, String)> = rows.iter().map(|r| (r.order, r.kind.clone())).collect();
    let mut paths = Vec::new();
    for (order, kind) in groups {
        for metric in [Metric::Mse, Metric::Prec] {
            let path = dir.join(format!("{}_{kind}_k{order}.svg", metric.file_prefix()));
            fs::write(&path, chart(rows, &kind, order, metric)).with_context(|| format!("cannot write {}", path.display()))?;
            paths.push(path);
        }
    }
    Ok(paths)
}
