//! SVG rendering of planar packings with their contact edges overlaid.

use std::collections::BTreeSet;
use std::fmt::Write;

use compact_packing::packing::{canonical_labeling, contact_hypergraph, verify_compact_2d, Node, SpherePacking};
use compact_packing::{Error, Result};

/// Fill colors by label rank, smallest discs first.
const PALETTE: &[&str] = &["#d62728", "#ff7f0e", "#2ca02c", "#1f77b4", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Pixels per unit length.
const SCALE: f64 = 60.0;

fn position(p: &SpherePacking, n: &Node) -> [f64; 2] {
    let c = &p.spheres[n.sphere].center;
    let mut out = [c[0], c[1]];
    if let Some(l) = &p.lattice {
        for (k, &o) in n.offset.iter().enumerate() {
            out[0] += o as f64 * l[k][0];
            out[1] += o as f64 * l[k][1];
        }
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Render `p`: every disc of the fundamental domain once, colored by label,
/// the lattice cell outline, and the packing-complex edges (or the contact
/// edges when the packing is not compact). Returns the document and the
/// number of overlay edges drawn.
pub fn render(p: &SpherePacking) -> Result<(String, usize)> {
    if p.dim != 2 {
        return Err(Error::Precondition(format!("only planar packings can be drawn, got dimension {}", p.dim)));
    }
    let labeling = canonical_labeling(p);
    let edges: Vec<(Node, Node)> = match p.is_periodic().then(|| verify_compact_2d(p)).transpose()? {
        Some(report) if report.compact => {
            let complex = report.complex.expect("compact packings carry their complex");
            let mut set = BTreeSet::new();
            for t in &complex.triangles {
                for k in 0..3 {
                    let (a, b) = (t[k].clone(), t[(k + 1) % 3].clone());
                    set.insert(if a <= b { (a, b) } else { (b, a) });
                }
            }
            set.into_iter().collect()
        }
        _ => match contact_hypergraph(p) {
            Ok(c) => c.of_size(2).map(|e| (e[0].clone(), e[1].clone())).collect(),
            Err(_) => Vec::new(),
        },
    };

    let mut segments: Vec<([f64; 2], [f64; 2])> = edges.iter().map(|(a, b)| (position(p, a), position(p, b))).collect();
    // Edges leaving the cell are also drawn from the partner's side so the
    // overlay is symmetric around the fundamental domain.
    let mut mirrored = Vec::new();
    for (a, b) in &edges {
        if a.offset.iter().any(|&o| o != 0) || b.offset.iter().any(|&o| o != 0) {
            let shift: Vec<i64> = b.offset.iter().map(|o| -o).collect();
            let a2 = Node {
                sphere: a.sphere,
                offset: a.offset.iter().zip(&shift).map(|(x, y)| x + y).collect(),
            };
            let b2 = Node {
                sphere: b.sphere,
                offset: vec![0; b.offset.len()],
            };
            mirrored.push((position(p, &a2), position(p, &b2)));
        }
    }
    segments.extend(mirrored);

    let mut cell = Vec::new();
    if let Some(l) = &p.lattice {
        cell = vec![[0.0, 0.0], [l[0][0], l[0][1]], [l[0][0] + l[1][0], l[0][1] + l[1][1]], [l[1][0], l[1][1]]];
    }

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    let mut grow = |pt: [f64; 2], r: f64| {
        for k in 0..2 {
            lo[k] = lo[k].min(pt[k] - r);
            hi[k] = hi[k].max(pt[k] + r);
        }
    };
    for s in &p.spheres {
        grow([s.center[0], s.center[1]], s.radius);
    }
    for (a, b) in &segments {
        grow(*a, 0.0);
        grow(*b, 0.0);
    }
    for c in &cell {
        grow(*c, 0.0);
    }
    let margin = 0.25;
    let (x0, y0) = (lo[0] - margin, lo[1] - margin);
    let (w, h) = ((hi[0] - lo[0] + 2.0 * margin) * SCALE, (hi[1] - lo[1] + 2.0 * margin) * SCALE);
    // SVG y grows downwards; flip so the picture matches the coordinates.
    let tx = |x: f64| (x - x0) * SCALE;
    let ty = |y: f64| h - (y - y0) * SCALE;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(svg, "  <title>{}</title>", escape(&p.label()));
    if !cell.is_empty() {
        let pts: Vec<String> = cell.iter().map(|c| format!("{:.3},{:.3}", tx(c[0]), ty(c[1]))).collect();
        let _ = writeln!(
            svg,
            r##"  <polygon class="cell" points="{}" fill="none" stroke="#999999" stroke-dasharray="6 4"/>"##,
            pts.join(" ")
        );
    }
    let _ = writeln!(svg, r#"  <g class="discs">"#);
    for (i, s) in p.spheres.iter().enumerate() {
        let label = labeling.labels[i];
        let _ = writeln!(
            svg,
            r##"    <circle id="disc-{}" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="{}" fill-opacity="0.35" stroke="#222222"/>"##,
            s.id,
            tx(s.center[0]),
            ty(s.center[1]),
            s.radius * SCALE,
            PALETTE[label % PALETTE.len()]
        );
        let _ = writeln!(
            svg,
            r#"    <text x="{:.3}" y="{:.3}" font-size="{:.1}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            tx(s.center[0]),
            ty(s.center[1]),
            (s.radius * SCALE * 0.6).clamp(6.0, 18.0),
            label
        );
    }
    let _ = writeln!(svg, "  </g>");
    let _ = writeln!(svg, r##"  <g class="complex" stroke="#000000" stroke-width="1.2">"##);
    for (a, b) in &segments {
        let _ = writeln!(
            svg,
            r#"    <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            tx(a[0]),
            ty(a[1]),
            tx(b[0]),
            ty(b[1])
        );
    }
    let _ = writeln!(svg, "  </g>");
    let _ = writeln!(svg, "</svg>");
    Ok((svg, edges.len()))
}
