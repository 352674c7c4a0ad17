//! SVG rendering of hull forests.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::forest::HullForest;
use crate::halfplane::SlitChain;

/// Points sampled along each branch.
pub const TRACE_POINTS: usize = 64;
/// Fraction of the bounding box added on every side.
pub const MARGIN: f64 = 0.05;

/// Generator line embedded in every rendered document.
pub fn generator() -> String {
    format!("dle {}", env!("CARGO_PKG_VERSION"))
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Render the branches of `forest` (built from `chain`) as polylines, one
/// colour per tree, above the real axis.
pub fn render_forest(chain: &SlitChain, forest: &HullForest) -> String {
    let traces: Vec<(usize, Vec<Complex64>)> = forest
        .trees
        .iter()
        .enumerate()
        .flat_map(|(t, tree)| {
            tree.branches
                .iter()
                .map(move |b| (t, chain.boundary_trace(b.step, TRACE_POINTS)))
        })
        .collect();

    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for p in traces.iter().flat_map(|(_, pts)| pts) {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y1 = y1.max(p.im);
    }
    for tree in &forest.trees {
        x0 = x0.min(tree.root);
        x1 = x1.max(tree.root);
    }
    if !x0.is_finite() {
        (x0, x1) = (-1.0, 1.0);
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    let (w, h) = ((x1 - x0).max(1e-9), y1);
    let (mx, my) = (MARGIN * w, MARGIN * h);
    let (vx, vy, vw, vh) = (x0 - mx, -(y1 + my), w + 2.0 * mx, h + 2.0 * my);
    let stroke = 0.004 * vw.max(vh);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}" width="800" height="{:.0}">"#,
        (800.0 * vh / vw).clamp(100.0, 4000.0)
    );
    let _ = writeln!(out, "<!-- generator: {} -->", generator());
    let _ = writeln!(
        out,
        r#"<desc>n={} steps={} trees={}</desc>"#,
        forest.n,
        forest.steps,
        forest.trees.len()
    );
    let _ = writeln!(
        out,
        r##"<line x1="{vx:.6}" y1="0" x2="{:.6}" y2="0" stroke="#444" stroke-width="{stroke:.6}"/>"##,
        vx + vw
    );
    for (t, pts) in &traces {
        let colour = PALETTE[t % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.6},{:.6}", p.re, -p.im)).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="{stroke:.6}" points="{}"/>"#,
            coords.join(" ")
        );
    }
    for (t, tree) in forest.trees.iter().enumerate() {
        let colour = PALETTE[t % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<circle cx="{:.6}" cy="0" r="{:.6}" fill="{colour}"/>"#,
            tree.root,
            2.0 * stroke
        );
    }
    out.push_str("</svg>\n");
    out
}
