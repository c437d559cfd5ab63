//! Labeled spherical triangulations of the unit sphere.
//!
//! A triangulation carries unit vertex vectors with labels, facets of `d`
//! vertex ids and the label of the (implicit) central sphere. The module
//! validates triangulations, compares edge lengths between combinatorially
//! equivalent triangulations, decides membership in `Q` and `W`, evaluates
//! the `◁`/`⊴` relations against realized codes, decides witness existence
//! for circle triangulations and builds two counterexample constructions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::f64::consts::{PI, TAU};

use crate::angle_core::{angle_from_radii, Label, Realizer};
use crate::codes::{labeled_isomorphisms, NeighborComplex, PackingCode};
use crate::error::{Error, Result};
use crate::LENGTH_TOL;

const UNIT_TOL: f64 = 1e-10;
const COINCIDE_TOL: f64 = 1e-9;
const ARC_SUM_TOL: f64 = 1e-9;
const AREA_SUM_TOL: f64 = 1e-8;
const HULL_TOL: f64 = 1e-10;

/// A geometric triangulation of the unit sphere in `ℝ^d` with labeled
/// vertices and a labeled center.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSphericalTriangulation {
    dim: usize,
    center_label: Label,
    coords: Vec<Vec<f64>>,
    labels: Vec<Label>,
    facets: Vec<Vec<usize>>,
}

impl LabeledSphericalTriangulation {
    /// Build and validate a triangulation.
    pub fn new(
        dim: usize,
        center_label: Label,
        coords: Vec<Vec<f64>>,
        labels: Vec<Label>,
        facets: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let t = Self::new_unchecked(dim, center_label, coords, labels, facets);
        t.validate()?;
        Ok(t)
    }

    /// Build without validation. Useful for deliberately invalid inputs.
    pub fn new_unchecked(
        dim: usize,
        center_label: Label,
        coords: Vec<Vec<f64>>,
        labels: Vec<Label>,
        facets: Vec<Vec<usize>>,
    ) -> Self {
        let facets = facets
            .into_iter()
            .map(|mut f| {
                f.sort_unstable();
                f
            })
            .collect();
        LabeledSphericalTriangulation {
            dim,
            center_label,
            coords,
            labels,
            facets,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center_label(&self) -> Label {
        self.center_label
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    /// Geodesic length between vertices `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        arc(&self.coords[i], &self.coords[j])
    }

    /// Check every structural invariant. Dimensions 2 and 3 get the full
    /// covering check; higher dimensions get the generic checks only.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d < 2 {
            return Err(Error::Validation(format!("dimension must be at least 2, got {d}")));
        }
        if self.coords.len() != self.labels.len() {
            return Err(Error::Validation(format!(
                "{} coordinates but {} labels",
                self.coords.len(),
                self.labels.len()
            )));
        }
        for (i, c) in self.coords.iter().enumerate() {
            if c.len() != d {
                return Err(Error::Validation(format!(
                    "vertex {i} has {} coordinates, expected {d}",
                    c.len()
                )));
            }
            let norm = dot(c, c).sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::Validation(format!("vertex {i} has norm {norm}, not 1")));
            }
        }
        for i in 0..self.vertex_count() {
            for j in i + 1..self.vertex_count() {
                if self.distance(i, j) <= COINCIDE_TOL {
                    return Err(Error::Validation(format!("vertices {i} and {j} coincide")));
                }
            }
        }
        // Homogeneity, facet sizes and (for d = 2) the single-cycle shape.
        let scheme = NeighborComplex::from_facets(d, self.labels.clone(), self.facets.clone())?;
        for f in &self.facets {
            let rows: Vec<&[f64]> = f.iter().map(|&v| self.coords[v].as_slice()).collect();
            if rank(&rows) < d {
                return Err(Error::Validation(format!(
                    "facet {f:?} is degenerate: its vertices and the origin are affinely dependent"
                )));
            }
        }
        match d {
            2 => self.validate_circle(&scheme),
            3 => self.validate_sphere(),
            _ => Ok(()),
        }
    }

    fn validate_circle(&self, scheme: &NeighborComplex) -> Result<()> {
        let order = scheme.cycle_order().expect("validated as a cycle");
        let m = order.len();
        let steps: Vec<f64> = (0..m)
            .map(|i| ccw_angle(&self.coords[order[i]], &self.coords[order[(i + 1) % m]]))
            .collect();
        let forward: f64 = steps.iter().sum();
        let backward: f64 = steps.iter().map(|s| TAU - s).sum();
        let ok = |total: f64, arcs: Vec<f64>| {
            (total - TAU).abs() <= ARC_SUM_TOL && arcs.iter().all(|&a| a > 0.0 && a < PI)
        };
        if ok(forward, steps.clone()) || ok(backward, steps.iter().map(|s| TAU - s).collect()) {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "arcs do not tile the circle: consecutive arcs sum to {forward} (or {backward})"
            )))
        }
    }

    fn validate_sphere(&self) -> Result<()> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.facets {
            for (a, b) in [(f[0], f[1]), (f[0], f[2]), (f[1], f[2])] {
                *edge_count.entry((a, b)).or_default() += 1;
            }
        }
        if let Some(((a, b), c)) = edge_count.iter().find(|(_, &c)| c != 2) {
            return Err(Error::Validation(format!(
                "edge ({a},{b}) lies in {c} facets, expected 2"
            )));
        }
        for v in 0..self.vertex_count() {
            if !link_is_cycle(v, &self.facets) {
                return Err(Error::Validation(format!("link of vertex {v} is not a single cycle")));
            }
        }
        let euler = self.vertex_count() as i64 - edge_count.len() as i64 + self.facets.len() as i64;
        if euler != 2 {
            return Err(Error::Validation(format!("Euler characteristic {euler}, expected 2")));
        }
        let area: f64 = self
            .facets
            .iter()
            .map(|f| triangle_area(&self.coords[f[0]], &self.coords[f[1]], &self.coords[f[2]]))
            .sum();
        if (area - 2.0 * TAU).abs() > AREA_SUM_TOL {
            return Err(Error::Validation(format!(
                "spherical triangle areas sum to {area}, expected 4π"
            )));
        }
        Ok(())
    }

    /// Parse the triangulation JSON document; coordinates are re-normalized
    /// before validation.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TriangulationDoc = serde_json::from_str(text)?;
        let m = doc.vertices.len();
        let mut coords = vec![Vec::new(); m];
        let mut labels = vec![0; m];
        let mut seen = vec![false; m];
        for v in doc.vertices {
            if v.id >= m || seen[v.id] {
                return Err(Error::Validation(format!(
                    "vertex ids must be 0..{m} without repeats, got {}",
                    v.id
                )));
            }
            seen[v.id] = true;
            let norm = dot(&v.coords, &v.coords).sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::Validation(format!("vertex {} has no direction", v.id)));
            }
            coords[v.id] = v.coords.iter().map(|x| x / norm).collect();
            labels[v.id] = v.label;
        }
        Self::new(doc.dim, doc.center_label, coords, labels, doc.facets)
    }

    pub fn to_json(&self) -> String {
        let doc = TriangulationDoc {
            dim: self.dim,
            center_label: self.center_label,
            vertices: self
                .coords
                .iter()
                .zip(&self.labels)
                .enumerate()
                .map(|(id, (c, &label))| VertexDoc {
                    id,
                    label,
                    coords: c.clone(),
                })
                .collect(),
            facets: self.facets.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("triangulations serialize") + "\n"
    }

    /// A copy with every vertex mapped through the orthogonal matrix `r`
    /// (row-major, `d × d`).
    pub fn rotated(&self, r: &[Vec<f64>]) -> Self {
        let coords = self
            .coords
            .iter()
            .map(|c| r.iter().map(|row| dot(row, c)).collect())
            .collect();
        LabeledSphericalTriangulation {
            coords,
            ..self.clone()
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TriangulationDoc {
    dim: usize,
    center_label: Label,
    vertices: Vec<VertexDoc>,
    facets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct VertexDoc {
    id: usize,
    label: Label,
    coords: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn arc(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).clamp(-1.0, 1.0).acos()
}

fn ccw_angle(u: &[f64], v: &[f64]) -> f64 {
    let a = (u[0] * v[1] - u[1] * v[0]).atan2(dot(u, v));
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

fn rank(rows: &[&[f64]]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let d = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    m.svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > 1e-10)
        .count()
}

/// Area of the spherical triangle spanned by unit vectors (Girard's excess),
/// evaluated with the stable half-angle formula.
fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let triple = dot(a, &cross(b, c)).abs();
    let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * triple.atan2(denom)
}

fn link_is_cycle(v: usize, facets: &[Vec<usize>]) -> bool {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for f in facets.iter().filter(|f| f.contains(&v)) {
        let others: Vec<usize> = f.iter().copied().filter(|&u| u != v).collect();
        adj.entry(others[0]).or_default().push(others[1]);
        adj.entry(others[1]).or_default().push(others[0]);
    }
    if adj.len() < 3 || adj.values().any(|a| a.len() != 2) {
        return false;
    }
    let start = *adj.keys().next().expect("nonempty");
    let (mut prev, mut cur) = (usize::MAX, start);
    let mut steps = 0;
    loop {
        let next = if adj[&cur][0] != prev { adj[&cur][0] } else { adj[&cur][1] };
        prev = cur;
        cur = next;
        steps += 1;
        if cur == start || steps > adj.len() {
            break;
        }
    }
    cur == start && steps == adj.len()
}

/// Geodesic distance `arccos⟨u, v⟩` between unit vectors.
pub fn geodesic_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Domain("vectors of different dimension".into()));
    }
    for w in [u, v] {
        let norm = dot(w, w).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!("vector of norm {norm} is not a unit vector")));
        }
    }
    Ok(arc(u, v))
}

/// The abstract labeled complex of a triangulation, with the same vertex ids.
pub fn vertex_scheme(p: &LabeledSphericalTriangulation) -> NeighborComplex {
    NeighborComplex::from_facets(p.dim, p.labels.clone(), p.facets.clone())
        .expect("a validated triangulation has a valid scheme")
}

/// The code `c:T` read off a triangulation.
pub fn code_of(p: &LabeledSphericalTriangulation) -> PackingCode {
    PackingCode::new(p.center_label, vertex_scheme(p))
}

/// Edges of `P` sorted by how their counterparts in `Q` compare.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct EdgeComparison {
    /// Edges (as vertex pairs of `P`) strictly longer in `Q`.
    pub grow: Vec<(usize, usize)>,
    /// Edges strictly shorter in `Q`.
    pub shrink: Vec<(usize, usize)>,
    /// Edges of equal length within tolerance.
    pub equal: Vec<(usize, usize)>,
}

impl EdgeComparison {
    pub fn is_isometric(&self) -> bool {
        self.grow.is_empty() && self.shrink.is_empty()
    }

    /// Both some edge grows and some edge shrinks.
    pub fn is_two_sided(&self) -> bool {
        !self.grow.is_empty() && !self.shrink.is_empty()
    }
}

/// Compare corresponding edge lengths, where `matching[v]` is the vertex of
/// `Q` corresponding to vertex `v` of `P`.
pub fn compare_edges(
    p: &LabeledSphericalTriangulation,
    q: &LabeledSphericalTriangulation,
    matching: &[usize],
) -> Result<EdgeComparison> {
    check_matching(p, q, matching)?;
    Ok(compare_unchecked(p, q, matching))
}

fn compare_unchecked(
    p: &LabeledSphericalTriangulation,
    q: &LabeledSphericalTriangulation,
    matching: &[usize],
) -> EdgeComparison {
    let mut out = EdgeComparison::default();
    for (a, b) in vertex_scheme(p).edges() {
        let lp = p.distance(a, b);
        let lq = q.distance(matching[a], matching[b]);
        if lq > lp + LENGTH_TOL {
            out.grow.push((a, b));
        } else if lq < lp - LENGTH_TOL {
            out.shrink.push((a, b));
        } else {
            out.equal.push((a, b));
        }
    }
    out
}

fn check_matching(
    p: &LabeledSphericalTriangulation,
    q: &LabeledSphericalTriangulation,
    matching: &[usize],
) -> Result<()> {
    let m = p.vertex_count();
    if matching.len() != m || q.vertex_count() != m {
        return Err(Error::Precondition("matching is not a bijection of vertices".into()));
    }
    let image: HashSet<usize> = matching.iter().copied().collect();
    if image.len() != m || matching.iter().any(|&w| w >= m) {
        return Err(Error::Precondition("matching is not a bijection of vertices".into()));
    }
    if (0..m).any(|v| p.labels[v] != q.labels[matching[v]]) {
        return Err(Error::Precondition("matching does not preserve labels".into()));
    }
    let qf: HashSet<Vec<usize>> = q.facets.iter().cloned().collect();
    if p.facets.len() != q.facets.len() {
        return Err(Error::Precondition("different numbers of facets".into()));
    }
    for f in &p.facets {
        let mut img: Vec<usize> = f.iter().map(|&v| matching[v]).collect();
        img.sort_unstable();
        if !qf.contains(&img) {
            return Err(Error::Precondition(format!(
                "facet {f:?} is not mapped onto a facet"
            )));
        }
    }
    Ok(())
}

/// Whether the pair `(P, Q)` shows that a set containing both is not
/// heteroperturbative.
///
/// That is the case if some label-preserving combinatorial equivalence
/// makes `Q` differ from `P` (not edge-isometric) with only growing or only
/// shrinking edges. Every equivalence is enumerated.
pub fn heteroperturbative_violation(
    p: &LabeledSphericalTriangulation,
    q: &LabeledSphericalTriangulation,
) -> Result<bool> {
    let matchings = equivalences(p, q);
    if matchings.is_empty() {
        return Err(Error::Precondition(
            "triangulations are not combinatorially equivalent with identical labels".into(),
        ));
    }
    Ok(matchings.iter().any(|m| {
        let c = compare_unchecked(p, q, m);
        !c.is_isometric() && !c.is_two_sided()
    }))
}

/// All label-preserving combinatorial equivalences `P → Q`.
pub fn equivalences(
    p: &LabeledSphericalTriangulation,
    q: &LabeledSphericalTriangulation,
) -> Vec<Vec<usize>> {
    if p.center_label != q.center_label || p.dim != q.dim {
        return Vec::new();
    }
    labeled_isomorphisms(&vertex_scheme(p), &vertex_scheme(q))
}

/// Whether the origin lies strictly inside the convex hull of the vertices.
pub fn center_in_interior(p: &LabeledSphericalTriangulation) -> bool {
    origin_in_hull_interior(&p.coords)
}

/// Whether the origin lies strictly inside the convex hull of `points`.
///
/// The origin fails to be interior exactly when some nonzero `w` has
/// `⟨w, v⟩ ≤ 0` for every point. If the points span the space that cone of
/// `w` is pointed, so it is nonzero iff it has an extreme ray; extreme rays
/// are orthogonal to `d − 1` independent points, which are enumerated.
pub fn origin_in_hull_interior(points: &[Vec<f64>]) -> bool {
    let Some(d) = points.first().map(|p| p.len()) else {
        return false;
    };
    let rows: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    if d == 0 || rank(&rows) < d {
        return false;
    }
    let separates = |w: &[f64]| {
        let norm = dot(w, w).sqrt();
        if norm < 1e-12 {
            return false;
        }
        for sign in [1.0, -1.0] {
            if points.iter().all(|v| sign * dot(w, v) / norm <= HULL_TOL) {
                return true;
            }
        }
        false
    };
    let m = points.len();
    match d {
        1 => !(points.iter().any(|p| p[0] > HULL_TOL) && points.iter().any(|p| p[0] < -HULL_TOL)),
        2 => !points.iter().any(|v| separates(&[-v[1], v[0]])),
        3 => {
            for i in 0..m {
                for j in i + 1..m {
                    if separates(&cross(&points[i], &points[j])) {
                        return false;
                    }
                }
            }
            true
        }
        _ => {
            let mut subset: Vec<usize> = (0..d - 1).collect();
            loop {
                let a = DMatrix::from_fn(d, d, |r, c| if r < d - 1 { points[subset[r]][c] } else { 0.0 });
                let svd = a.svd(false, true);
                let vt = svd.v_t.expect("requested");
                let (k, smallest) = svd
                    .singular_values
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.total_cmp(y.1))
                    .expect("nonempty");
                let second = svd
                    .singular_values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != k)
                    .map(|(_, s)| *s)
                    .fold(f64::INFINITY, f64::min);
                if *smallest < 1e-12 && second > 1e-10 {
                    let w: Vec<f64> = vt.row(k).iter().copied().collect();
                    if separates(&w) {
                        return false;
                    }
                }
                if !next_combination(&mut subset, m) {
                    return true;
                }
            }
        }
    }
}

fn next_combination(c: &mut [usize], m: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < m - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Which pair condition of `Q` failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QViolationKind {
    /// An edge is not exactly the realized symbol.
    Edge,
    /// A vertex pair is closer than the realized symbol.
    Pair,
}

/// The worst violation found by [`in_q`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QViolation {
    pub kind: QViolationKind,
    pub u: usize,
    pub v: usize,
    pub distance: f64,
    pub realized: f64,
}

/// Result of [`in_q`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QReport {
    pub member: bool,
    /// Largest `|distance − realized|` over edges.
    pub max_edge_error: f64,
    /// Smallest `distance − realized` over all vertex pairs.
    pub min_pair_slack: f64,
    pub worst: Option<QViolation>,
}

fn realized_pair(p: &LabeledSphericalTriangulation, rho: &Realizer, u: usize, v: usize) -> Result<f64> {
    Ok(angle_from_radii(
        rho.value(p.center_label)?,
        rho.value(p.labels[u])?,
        rho.value(p.labels[v])?,
    ))
}

/// Membership in `Q` for the monotone realizer `rho`: every edge has exactly
/// the realized length and every vertex pair is at least that far apart.
pub fn in_q(p: &LabeledSphericalTriangulation, rho: &Realizer) -> Result<QReport> {
    if !rho.is_monotone() {
        return Err(Error::Precondition(format!("realizer {rho} is not monotone")));
    }
    let edges: BTreeSet<(usize, usize)> = vertex_scheme(p).edges().into_iter().collect();
    let mut report = QReport {
        member: true,
        max_edge_error: 0.0,
        min_pair_slack: f64::INFINITY,
        worst: None,
    };
    let mut worst_amount = 0.0;
    for u in 0..p.vertex_count() {
        for v in u + 1..p.vertex_count() {
            let distance = p.distance(u, v);
            let realized = realized_pair(p, rho, u, v)?;
            let slack = distance - realized;
            report.min_pair_slack = report.min_pair_slack.min(slack);
            let mut consider = |kind, amount: f64| {
                if amount > LENGTH_TOL && amount > worst_amount {
                    worst_amount = amount;
                    report.worst = Some(QViolation {
                        kind,
                        u,
                        v,
                        distance,
                        realized,
                    });
                }
            };
            consider(QViolationKind::Pair, -slack);
            if edges.contains(&(u, v)) {
                report.max_edge_error = report.max_edge_error.max(slack.abs());
                consider(QViolationKind::Edge, slack.abs());
            }
        }
    }
    report.member = report.worst.is_none();
    Ok(report)
}

/// Result of [`in_w`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WReport {
    pub member: bool,
    /// Facets of the convex hull (vertex ids), when it is simplicial.
    pub hull_facets: Vec<Vec<usize>>,
    pub diagnostic: Option<String>,
}

/// Membership in `W`: the convex hull of the vertices is a simplicial
/// polytope whose facets are exactly the facets of the triangulation.
///
/// Hull facets are found by testing every `d`-subset of vertices for a
/// supporting hyperplane; coplanar extra vertices on a supporting plane make
/// the hull non-simplicial.
pub fn in_w(p: &LabeledSphericalTriangulation) -> Result<WReport> {
    let fail = |hull_facets, msg: String| {
        Ok(WReport {
            member: false,
            hull_facets,
            diagnostic: Some(msg),
        })
    };
    let rows: Vec<&[f64]> = p.coords.iter().map(|c| c.as_slice()).collect();
    if rank(&rows) < p.dim {
        return fail(Vec::new(), "hull is degenerate (vertices lie in a hyperplane through the origin)".into());
    }
    let m = p.vertex_count();
    let mut hull = Vec::new();
    match p.dim {
        2 => {
            for i in 0..m {
                for j in i + 1..m {
                    let (a, b) = (&p.coords[i], &p.coords[j]);
                    let normal = [b[1] - a[1], a[0] - b[0]];
                    let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
                    let side = |k: usize| {
                        let c = &p.coords[k];
                        (normal[0] * (c[0] - a[0]) + normal[1] * (c[1] - a[1])) / len
                    };
                    match support(m, &[i, j], side) {
                        Support::Facet => hull.push(vec![i, j]),
                        Support::Coplanar(k) => {
                            return fail(hull, format!("vertices {i}, {j}, {k} are collinear on the hull"))
                        }
                        Support::None => {}
                    }
                }
            }
        }
        3 => {
            for i in 0..m {
                for j in i + 1..m {
                    for k in j + 1..m {
                        let (a, b, c) = (&p.coords[i], &p.coords[j], &p.coords[k]);
                        let ab: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
                        let ac: Vec<f64> = c.iter().zip(a).map(|(x, y)| x - y).collect();
                        let n = cross(&ab, &ac);
                        let len = dot(&n, &n).sqrt();
                        if len < 1e-14 {
                            continue;
                        }
                        let side = |l: usize| {
                            let q: Vec<f64> = p.coords[l].iter().zip(a).map(|(x, y)| x - y).collect();
                            dot(&n, &q) / len
                        };
                        match support(m, &[i, j, k], side) {
                            Support::Facet => hull.push(vec![i, j, k]),
                            Support::Coplanar(l) => {
                                return fail(
                                    hull,
                                    format!("vertices {i}, {j}, {k}, {l} are coplanar on the hull; it is not simplicial"),
                                )
                            }
                            Support::None => {}
                        }
                    }
                }
            }
        }
        d => {
            return Err(Error::Domain(format!(
                "hull comparison is implemented for dimensions 2 and 3, got {d}"
            )))
        }
    }
    let ours: BTreeSet<Vec<usize>> = p.facets.iter().cloned().collect();
    let theirs: BTreeSet<Vec<usize>> = hull.iter().cloned().collect();
    if ours == theirs {
        Ok(WReport {
            member: true,
            hull_facets: hull,
            diagnostic: None,
        })
    } else {
        let missing: Vec<_> = ours.difference(&theirs).cloned().collect();
        let extra: Vec<_> = theirs.difference(&ours).cloned().collect();
        fail(
            hull,
            format!("hull facets differ: triangulation facets {missing:?} are not hull facets; hull facets {extra:?} are not triangulation facets"),
        )
    }
}

enum Support {
    Facet,
    Coplanar(usize),
    None,
}

fn support(m: usize, members: &[usize], side: impl Fn(usize) -> f64) -> Support {
    let mut pos = false;
    let mut neg = false;
    let mut flat = None;
    for l in (0..m).filter(|l| !members.contains(l)) {
        let s = side(l);
        if s > HULL_TOL {
            pos = true;
        } else if s < -HULL_TOL {
            neg = true;
        } else {
            flat = Some(l);
        }
        if pos && neg {
            return Support::None;
        }
    }
    match flat {
        Some(l) => Support::Coplanar(l),
        None => Support::Facet,
    }
}

/// Whether `P` is combinatorially equivalent to the code's neighbor complex
/// with identical labels (including the center label).
pub fn equivalent_to_code(code: &PackingCode, p: &LabeledSphericalTriangulation) -> bool {
    code.center == p.center_label
        && crate::codes::labeled_isomorphic(&code.neighbors, &vertex_scheme(p)).is_some()
}

// Because an equivalence preserves labels and maps edges onto edges, the
// length conditions of the relations can be read off `P` directly once an
// equivalence exists.
fn bound_holds(
    p: &LabeledSphericalTriangulation,
    rho: &Realizer,
    edges_only: bool,
    lower: bool,
) -> Result<bool> {
    let edges: BTreeSet<(usize, usize)> = vertex_scheme(p).edges().into_iter().collect();
    for u in 0..p.vertex_count() {
        for v in u + 1..p.vertex_count() {
            if edges_only && !edges.contains(&(u, v)) {
                continue;
            }
            let d = p.distance(u, v);
            let r = realized_pair(p, rho, u, v)?;
            let ok = if lower { d >= r - LENGTH_TOL } else { d <= r + LENGTH_TOL };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `ρ ◁ P`: equivalent to the code and every vertex pair at least the
/// realized symbol apart.
pub fn blacktriangle_lower(rho: &Realizer, code: &PackingCode, p: &LabeledSphericalTriangulation) -> Result<bool> {
    Ok(equivalent_to_code(code, p) && bound_holds(p, rho, false, true)?)
}

/// `P ◁ σ`: equivalent to the code and every vertex pair at most the
/// realized symbol apart.
pub fn blacktriangle_upper(p: &LabeledSphericalTriangulation, code: &PackingCode, sigma: &Realizer) -> Result<bool> {
    Ok(equivalent_to_code(code, p) && bound_holds(p, sigma, false, false)?)
}

/// `ρ ⊴ P`: equivalent to the code and every edge at least the realized symbol.
pub fn vartriangle_lower(rho: &Realizer, code: &PackingCode, p: &LabeledSphericalTriangulation) -> Result<bool> {
    Ok(equivalent_to_code(code, p) && bound_holds(p, rho, true, true)?)
}

/// `P ⊴ σ`: equivalent to the code and every edge at most the realized symbol.
pub fn vartriangle_upper(p: &LabeledSphericalTriangulation, code: &PackingCode, sigma: &Realizer) -> Result<bool> {
    Ok(equivalent_to_code(code, p) && bound_holds(p, sigma, true, false)?)
}

/// Decide whether a circle triangulation `P` with `ρ ◁ P ⊴ σ` exists for a
/// planar code.
pub fn witness_exists_2d(code: &PackingCode, rho: &Realizer, sigma: &Realizer) -> Result<bool> {
    let order = code
        .neighbors
        .cycle_order()
        .ok_or_else(|| Error::Domain("witness search needs a planar (cycle) code".into()))?;
    let labels: Vec<Label> = order.iter().map(|&v| code.neighbors.label(v)).collect();
    let m = labels.len();
    if m < 3 {
        return Err(Error::Domain(format!("cycle length must be at least 3, got {m}")));
    }
    let c = code.center;
    let mut lower = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                lower[i][j] = angle_from_radii(rho.value(c)?, rho.value(labels[i])?, rho.value(labels[j])?);
            }
        }
    }
    let upper = (0..m)
        .map(|i| Ok(angle_from_radii(sigma.value(c)?, sigma.value(labels[i])?, sigma.value(labels[(i + 1) % m])?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(circle_positions_feasible(&lower, &upper))
}

/// Feasibility of placing `m` points in this cyclic order on the circle with
/// circular distance between points `i`, `j` at least `lower[i][j]` and the
/// arc from point `i` to point `i+1` at most `upper[i]`.
///
/// With prefix positions `P_0 = 0 ≤ P_1 ≤ … ≤ P_m = 2π` this is the
/// difference-constraint system `L_ij ≤ P_j − P_i ≤ 2π − L_ij`,
/// `P_{i+1} − P_i ≤ U_i`, decided by Bellman–Ford negative-cycle detection
/// with `1e-9` slack per constraint.
#[allow(clippy::needless_range_loop)] // reads lower[i][j] and lower[j][i]
pub fn circle_positions_feasible(lower: &[Vec<f64>], upper: &[f64]) -> bool {
    let m = upper.len();
    // Edge (from, to, w) encodes P_to − P_from ≤ w.
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let l = lower[i][j].max(lower[j][i]);
            edges.push((i, j, TAU - l + LENGTH_TOL));
            edges.push((j, i, -l + LENGTH_TOL));
        }
        edges.push((i, i + 1, upper[i] + LENGTH_TOL));
        edges.push((i + 1, i, LENGTH_TOL));
    }
    edges.push((0, m, TAU + LENGTH_TOL));
    edges.push((m, 0, -TAU + LENGTH_TOL));
    let nodes = m + 1;
    let mut dist = vec![0.0f64; nodes];
    for round in 0..=nodes {
        let mut changed = false;
        for &(a, b, w) in &edges {
            if dist[a] + w < dist[b] - 1e-15 {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
        if round == nodes {
            break;
        }
    }
    false
}

fn unit(lat: f64, lon: f64) -> Vec<f64> {
    vec![lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

/// Latitude of the two vertex rings of the dart strip.
pub const DART_RING_LATITUDE: f64 = PI / 4.0;

/// The sphere triangulated with an equatorial strip of bisected darts.
///
/// Vertices: north pole `N` (id 0), south pole `S` (id 1), an upper ring
/// `U_j` at latitude `+h` and longitude `2πj/k` (ids `2..2+k`), a lower ring
/// `D_j` at latitude `−h` (ids `2+k..2+2k`) and equator vertices `E_j` at
/// longitude `2πj/k + φ` (ids `2+2k..2+3k`). Each dart `U_j E_{j+1} D_j E_j`
/// is bisected along the equator edge `E_j E_{j+1}`; the gaps between darts
/// are the triangles `U_j E_{j+1} U_{j+1}` and `D_j E_{j+1} D_{j+1}`; polar
/// caps are fans. All labels are 0. Rotating the equator by `φ > 0` lengthens
/// every edge at an equator vertex and keeps every other edge.
pub fn build_darts_triangulation(k: usize, phi: f64) -> Result<LabeledSphericalTriangulation> {
    if k < 3 {
        return Err(Error::Domain(format!("darts need k >= 3 segments, got {k}")));
    }
    if phi.is_nan() || phi.abs() >= PI / k as f64 {
        return Err(Error::Domain(format!(
            "rotation must satisfy |phi| < pi/k = {}, got {phi}",
            PI / k as f64
        )));
    }
    let h = DART_RING_LATITUDE;
    let (n, s) = (0, 1);
    let u = |j: usize| 2 + j % k;
    let d = |j: usize| 2 + k + j % k;
    let e = |j: usize| 2 + 2 * k + j % k;
    let mut coords = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]];
    let lon = |j: usize| TAU * j as f64 / k as f64;
    coords.extend((0..k).map(|j| unit(h, lon(j))));
    coords.extend((0..k).map(|j| unit(-h, lon(j))));
    coords.extend((0..k).map(|j| unit(0.0, lon(j) + phi)));
    let mut facets = Vec::new();
    for j in 0..k {
        facets.push(vec![n, u(j), u(j + 1)]);
        facets.push(vec![s, d(j), d(j + 1)]);
        facets.push(vec![u(j), e(j), e(j + 1)]);
        facets.push(vec![u(j), e(j + 1), u(j + 1)]);
        facets.push(vec![d(j), e(j), e(j + 1)]);
        facets.push(vec![d(j), e(j + 1), d(j + 1)]);
    }
    let labels = vec![0; coords.len()];
    LabeledSphericalTriangulation::new(3, 0, coords, labels, facets)
}

/// An octahedral triangulation in which the meridian arc from the north pole
/// `N` to the equator vertex `E = (1,0,0)` gains two extra vertices `X` and
/// `Y`, both near the midpoint of that arc and displaced by `δ` to either
/// side of it. The two octahedral faces along the arc are split so that the
/// arc `NE` remains an edge, flanked by the skinny triangles `N E X` and
/// `N E Y`.
///
/// `X` and `Y` lie outside the chord `NE`, so in the convex hull they see
/// each other across it: the hull has the edge `XY` where the triangulation
/// has `NE`, and the triangulation is not in `W`.
///
/// Vertex ids: `N`=0, `S`=1, `E`=2, `F=(0,1,0)`=3, `W=(−1,0,0)`=4,
/// `K=(0,−1,0)`=5, `X`=6, `Y`=7. All labels 0.
pub fn build_split_meridian_octahedron(delta: f64) -> Result<LabeledSphericalTriangulation> {
    if !(delta > 0.0 && delta < PI / 8.0) {
        return Err(Error::Domain(format!(
            "delta must satisfy 0 < delta < pi/8, got {delta}"
        )));
    }
    split_meridian_unchecked(delta).validate_into()
}

fn split_meridian_unchecked(delta: f64) -> LabeledSphericalTriangulation {
    let mid = PI / 4.0;
    let coords = vec![
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![-1.0, 0.0, 0.0],
        vec![0.0, -1.0, 0.0],
        unit(mid, delta),
        unit(mid, -delta),
    ];
    let (n, s, e, f, w, k, x, y) = (0, 1, 2, 3, 4, 5, 6, 7);
    let facets = vec![
        vec![n, e, x],
        vec![n, f, x],
        vec![x, f, e],
        vec![n, e, y],
        vec![n, y, k],
        vec![y, k, e],
        vec![n, f, w],
        vec![n, w, k],
        vec![s, e, f],
        vec![s, f, w],
        vec![s, w, k],
        vec![s, k, e],
    ];
    LabeledSphericalTriangulation::new_unchecked(3, 0, coords, vec![0; 8], facets)
}

/// The split-meridian construction without the parameter range check, so
/// degenerate limits can be fed to validation.
pub fn split_meridian_raw(delta: f64) -> LabeledSphericalTriangulation {
    split_meridian_unchecked(delta)
}

impl LabeledSphericalTriangulation {
    fn validate_into(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }
}

/// The regular octahedron with all vertex labels `label` around a center
/// labeled `center_label`.
pub fn regular_octahedron(center_label: Label, label: Label) -> LabeledSphericalTriangulation {
    let coords = vec![
        vec![1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ];
    let mut facets = Vec::new();
    for a in [0, 1] {
        for b in [2, 3] {
            for c in [4, 5] {
                facets.push(vec![a, b, c]);
            }
        }
    }
    LabeledSphericalTriangulation::new(3, center_label, coords, vec![label; 6], facets)
        .expect("the octahedron is a valid triangulation")
}

/// A circle triangulation with vertices at the given angles (radians, in
/// cyclic order) and labels.
pub fn circle_triangulation(
    center_label: Label,
    angles: &[f64],
    labels: Vec<Label>,
) -> Result<LabeledSphericalTriangulation> {
    let m = angles.len();
    let coords = angles.iter().map(|a| vec![a.cos(), a.sin()]).collect();
    let facets = (0..m).map(|i| vec![i, (i + 1) % m]).collect();
    LabeledSphericalTriangulation::new(2, center_label, coords, labels, facets)
}
