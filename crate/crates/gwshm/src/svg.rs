//! Overlaid reconstruction-error histograms, one outline per evaluation group,
//! on a log10 error axis with the detection threshold marked.

use std::fmt::Write;

use gwshm_core::detector::{EvalReport, Outcome};
use gwshm_core::signal::Condition;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const BINS: usize = 40;
const COLORS: [&str; 10] =
    ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"];

fn label(condition: Condition, size: Option<f64>) -> String {
    match size {
        Some(s) => format!("{} {s} mm", condition.as_str()),
        None => condition.as_str().to_string(),
    }
}

pub fn error_histogram(report: &EvalReport, outcomes: &[Outcome]) -> String {
    let floor = 1e-12;
    let log = |e: f64| e.max(floor).log10();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for o in outcomes {
        lo = lo.min(log(o.error));
        hi = hi.max(log(o.error));
    }
    let t = log(report.threshold.threshold);
    lo = lo.min(t);
    hi = hi.max(t);
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let bin_w = (hi - lo) / BINS as f64;
    let bin = |e: f64| (((log(e) - lo) / bin_w) as usize).min(BINS - 1);

    let groups: Vec<(String, Vec<usize>)> = report
        .distributions
        .iter()
        .map(|d| {
            let mut counts = vec![0usize; BINS];
            for o in outcomes
                .iter()
                .filter(|o| o.condition == d.condition && (d.size_mm.is_none() || Some(o.size_mm) == d.size_mm))
            {
                counts[bin(o.error)] += 1;
            }
            (label(d.condition, d.size_mm), counts)
        })
        .collect();
    // Each group is normalized to its own peak so small groups stay visible.
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let x = |v: f64| LEFT + (v - lo) / (hi - lo) * plot_w;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<path d="M{LEFT:.1} {TOP:.1} V{:.1} H{:.1}" fill="none" stroke="#000"/>"##,
        TOP + plot_h,
        LEFT + plot_w
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">1e{v:.2}</text>"#,
            x(v),
            TOP + plot_h + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">reconstruction error (MSE, log scale)</text>"#,
        LEFT + plot_w / 2.0,
        H - 12.0
    );
    for (g, (name, counts)) in groups.iter().enumerate() {
        let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let color = COLORS[g % COLORS.len()];
        let mut d = format!("M{:.1} {:.1}", x(lo), TOP + plot_h);
        for (b, &c) in counts.iter().enumerate() {
            let y = TOP + plot_h - c as f64 / peak * plot_h;
            let _ = write!(d, " V{y:.1} H{:.1}", x(lo + (b + 1) as f64 * bin_w));
        }
        let _ = write!(d, " V{:.1}", TOP + plot_h);
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let ly = TOP + 14.0 + 16.0 * g as f64;
        let lx = LEFT + plot_w + 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="3"/>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" font-size="11">{name}</text>"#, lx + 24.0);
    }
    let _ = writeln!(
        s,
        r##"<line x1="{0:.1}" y1="{TOP:.1}" x2="{0:.1}" y2="{1:.1}" stroke="#c00" stroke-dasharray="4 3"/>"##,
        x(t),
        TOP + plot_h
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="{:.1}" font-size="11" fill="#c00">threshold</text>"##,
        x(t) + 4.0,
        TOP + 12.0
    );
    s.push_str("</svg>\n");
    s
}
