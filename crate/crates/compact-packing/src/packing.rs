//! Concrete sphere packings.
//!
//! A [`SpherePacking`] is a finite list of spheres, optionally repeated by a
//! lattice. Spheres are addressed internally by their index in the list; a
//! [`Node`] is a sphere together with the lattice translate it sits in.
//! From the geometry this module derives the contact hypergraph, verifies
//! compactness of planar periodic packings, and reads off canonical labels,
//! triangulations and codes.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::TAU;
use std::fmt;

use crate::angle_core::{angle_from_radii, Label, Realizer};
use crate::codes::{is_fundamental, CodeSet};
use crate::error::{Error, Result};
use crate::spherical::{code_of, LabeledSphericalTriangulation};

/// Relative tolerance for tangency and overlap.
pub const TANGENCY_TOL: f64 = 1e-9;
/// Absolute slack for the convex-hull clause.
pub const HULL_SLACK: f64 = 1e-9;
/// Tolerance on the angle sum around a disc.
pub const ANGLE_SUM_TOL: f64 = 1e-8;
/// Relative tolerance for treating radii as one size class.
pub const RADIUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub id: usize,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// A declared neighbor triangulation around one sphere, used for
/// three-dimensional corona fixtures. Facets name sphere ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclaredLink {
    pub center: usize,
    pub facets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePacking {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    #[serde(default)]
    pub lattice: Option<Vec<Vec<f64>>>,
    pub spheres: Vec<Sphere>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<DeclaredLink>,
    /// Free-form metadata kept for round trips.
    #[serde(flatten)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

/// A sphere in a particular lattice translate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    /// Index into [`SpherePacking::spheres`].
    pub sphere: usize,
    /// Lattice coefficients of the translate (empty or all zero for a
    /// non-periodic packing).
    pub offset: Vec<i64>,
}

impl Node {
    pub fn base(sphere: usize, dim: usize) -> Self {
        Node {
            sphere,
            offset: vec![0; dim],
        }
    }

    fn unshifted(&self, by: &[i64]) -> Node {
        Node {
            sphere: self.sphere,
            offset: self.offset.iter().zip(by).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.offset.iter().all(|&o| o == 0) {
            write!(f, "#{}", self.sphere)
        } else {
            write!(f, "#{}{:?}", self.sphere, self.offset)
        }
    }
}

impl SpherePacking {
    /// Parse and validate a packing document.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: SpherePacking = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    /// Parse a packing document with structural checks only, so that
    /// overlapping spheres reach [`verify_compact_2d`] and are reported there
    /// rather than rejected up front.
    pub fn from_json_allow_overlaps(text: &str) -> Result<Self> {
        let p: SpherePacking = serde_json::from_str(text)?;
        p.validate_structure()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("packings serialize") + "\n"
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "unnamed".into())
    }

    pub fn is_periodic(&self) -> bool {
        self.lattice.is_some()
    }

    /// Index of the sphere with the given id.
    pub fn index_of(&self, id: usize) -> Result<usize> {
        self.spheres
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::Domain(format!("no sphere with id {id}")))
    }

    /// Structural checks plus disjoint interiors.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        let geo = Geometry::new(self)?;
        if let Some(o) = geo.overlaps().into_iter().next() {
            return Err(Error::InvalidPacking(o.to_string()));
        }
        Ok(())
    }

    fn validate_structure(&self) -> Result<()> {
        let d = self.dim;
        if d < 1 {
            return Err(Error::InvalidPacking("dimension must be positive".into()));
        }
        if self.spheres.is_empty() {
            return Err(Error::InvalidPacking("packing has no spheres".into()));
        }
        let mut ids = BTreeSet::new();
        for s in &self.spheres {
            if s.center.len() != d {
                return Err(Error::InvalidPacking(format!(
                    "sphere {} has a {}-dimensional center in dimension {d}",
                    s.id,
                    s.center.len()
                )));
            }
            if !(s.radius.is_finite() && s.radius > 0.0) || s.center.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidPacking(format!("sphere {} has invalid geometry", s.id)));
            }
            if !ids.insert(s.id) {
                return Err(Error::InvalidPacking(format!("sphere id {} repeated", s.id)));
            }
        }
        if let Some(lattice) = &self.lattice {
            if lattice.len() != d || lattice.iter().any(|v| v.len() != d) {
                return Err(Error::InvalidPacking(format!("lattice must have {d} vectors of dimension {d}")));
            }
            let m = DMatrix::from_fn(d, d, |r, c| lattice[c][r]);
            let inv = m
                .clone()
                .try_inverse()
                .filter(|_| m.determinant().abs() > 1e-12)
                .ok_or_else(|| Error::InvalidPacking("lattice vectors are linearly dependent".into()))?;
            for s in &self.spheres {
                let frac = &inv * DVector::from_column_slice(&s.center);
                if frac.iter().any(|&f| !(-1e-9..1.0 + 1e-9).contains(&f)) {
                    return Err(Error::InvalidPacking(format!(
                        "sphere {} lies outside the fundamental domain (lattice coordinates {:?})",
                        s.id,
                        frac.as_slice()
                    )));
                }
            }
        }
        if let Some(link) = &self.link {
            self.index_of(link.center)?;
            for f in &link.facets {
                for &id in f {
                    self.index_of(id)?;
                }
            }
        }
        Ok(())
    }

    /// The packing repeated `counts[k]` times along lattice vector `k`, as a
    /// periodic packing with the enlarged lattice. Ids are renumbered
    /// `0..`, in translate-major order.
    pub fn supercell(&self, counts: &[usize]) -> Result<SpherePacking> {
        let lattice = self
            .lattice
            .as_ref()
            .ok_or_else(|| Error::Precondition("supercell needs a periodic packing".into()))?;
        if counts.len() != self.dim || counts.contains(&0) {
            return Err(Error::Domain("one positive count per lattice vector required".into()));
        }
        let mut spheres = Vec::new();
        let mut offset = vec![0usize; self.dim];
        loop {
            for s in &self.spheres {
                let mut center = s.center.clone();
                for (k, &o) in offset.iter().enumerate() {
                    for (c, l) in center.iter_mut().zip(&lattice[k]) {
                        *c += o as f64 * l;
                    }
                }
                spheres.push(Sphere {
                    id: spheres.len(),
                    center,
                    radius: s.radius,
                });
            }
            let mut k = 0;
            while k < self.dim {
                offset[k] += 1;
                if offset[k] < counts[k] {
                    break;
                }
                offset[k] = 0;
                k += 1;
            }
            if k == self.dim {
                break;
            }
        }
        Ok(SpherePacking {
            name: self.name.as_ref().map(|n| format!("{n}-supercell")),
            dim: self.dim,
            lattice: Some(
                lattice
                    .iter()
                    .zip(counts)
                    .map(|(v, &c)| v.iter().map(|x| x * c as f64).collect())
                    .collect(),
            ),
            spheres,
            link: None,
            metadata: BTreeMap::new(),
        })
    }
}

/// A pair of spheres whose interiors intersect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlap {
    pub a: Node,
    pub b: Node,
    pub distance: f64,
    pub radius_sum: f64,
}

impl fmt::Display for Overlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "spheres {} and {} overlap: center distance {} < radius sum {}",
            self.a, self.b, self.distance, self.radius_sum
        )
    }
}

/// Periodic-image bookkeeping shared by the geometric routines.
struct Geometry<'a> {
    p: &'a SpherePacking,
    /// Lattice translates to search around the fundamental domain.
    shell: Vec<Vec<i64>>,
    /// Maximal distance at which two spheres can touch.
    reach: f64,
}

impl<'a> Geometry<'a> {
    fn new(p: &'a SpherePacking) -> Result<Self> {
        let rmax = p.spheres.iter().map(|s| s.radius).fold(0.0, f64::max);
        let reach = 2.0 * rmax * (1.0 + 1e-6);
        let d = p.dim;
        let shell = match &p.lattice {
            None => vec![vec![0; d]],
            Some(lattice) => {
                // A translate t can matter only if |t| ≤ reach + diameter of
                // the fundamental domain; bound each coefficient through the
                // heights of the cell.
                let m = DMatrix::from_fn(d, d, |r, c| lattice[c][r]);
                let inv = m
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidPacking("singular lattice".into()))?;
                let diam: f64 = lattice.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).sum();
                let bounds: Vec<i64> = (0..d)
                    .map(|k| {
                        let row_norm = inv.row(k).norm();
                        ((reach + diam) * row_norm).ceil() as i64 + 1
                    })
                    .collect();
                let mut shell = Vec::new();
                let mut cur: Vec<i64> = bounds.iter().map(|b| -b).collect();
                loop {
                    shell.push(cur.clone());
                    let mut k = 0;
                    while k < d {
                        cur[k] += 1;
                        if cur[k] <= bounds[k] {
                            break;
                        }
                        cur[k] = -bounds[k];
                        k += 1;
                    }
                    if k == d {
                        break;
                    }
                }
                shell
            }
        };
        Ok(Geometry { p, shell, reach })
    }

    fn position(&self, node: &Node) -> Vec<f64> {
        let mut c = self.p.spheres[node.sphere].center.clone();
        if let Some(lattice) = &self.p.lattice {
            for (k, &o) in node.offset.iter().enumerate() {
                if o != 0 {
                    for (x, l) in c.iter_mut().zip(&lattice[k]) {
                        *x += o as f64 * l;
                    }
                }
            }
        }
        c
    }

    fn radius(&self, node: &Node) -> f64 {
        self.p.spheres[node.sphere].radius
    }

    /// All nodes other than the base node of sphere `i` whose centers lie
    /// within `radius` of it, with their distances.
    fn around(&self, i: usize, radius: f64) -> Vec<(Node, f64)> {
        let base = Node::base(i, self.p.dim);
        let ci = self.position(&base);
        let mut out = Vec::new();
        for off in &self.shell {
            for j in 0..self.p.spheres.len() {
                let node = Node {
                    sphere: j,
                    offset: off.clone(),
                };
                if node == base {
                    continue;
                }
                let d = dist(&ci, &self.position(&node));
                if d <= radius {
                    out.push((node, d));
                }
            }
        }
        out
    }

    /// Tangent neighbors and overlapping neighbors of the base copy of `i`.
    fn contacts(&self, i: usize) -> (Vec<Node>, Vec<Overlap>) {
        let mut tangent = Vec::new();
        let mut overlaps = Vec::new();
        let ri = self.p.spheres[i].radius;
        for (node, d) in self.around(i, self.reach) {
            let s = ri + self.radius(&node);
            if (d - s).abs() <= TANGENCY_TOL * s {
                tangent.push(node);
            } else if d < s {
                overlaps.push(Overlap {
                    a: Node::base(i, self.p.dim),
                    b: node,
                    distance: d,
                    radius_sum: s,
                });
            }
        }
        (tangent, overlaps)
    }

    fn overlaps(&self) -> Vec<Overlap> {
        let mut out: Vec<Overlap> = (0..self.p.spheres.len())
            .flat_map(|i| self.contacts(i).1)
            .filter(|o| (o.a.sphere, &o.a.offset) < (o.b.sphere, &o.b.offset) || o.a.sphere < o.b.sphere)
            .collect();
        out.sort_by_key(|x| (x.a.sphere, x.b.sphere));
        out
    }

    fn tangent(&self, a: &Node, b: &Node) -> bool {
        let d = dist(&self.position(a), &self.position(b));
        let s = self.radius(a) + self.radius(b);
        (d - s).abs() <= TANGENCY_TOL * s
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Whether `x` lies in the convex hull of `simplex` (affinely independent
/// points) up to absolute slack.
fn in_simplex(x: &[f64], simplex: &[Vec<f64>], slack: f64) -> bool {
    let k = simplex.len();
    if k == 1 {
        return dist(x, &simplex[0]) <= slack;
    }
    let d = x.len();
    let a = DMatrix::from_fn(d, k - 1, |r, c| simplex[c + 1][r] - simplex[0][r]);
    let b = DVector::from_fn(d, |r, _| x[r] - simplex[0][r]);
    let svd = a.clone().svd(true, true);
    let Ok(lambda) = svd.solve(&b, 1e-14) else {
        return false;
    };
    let residual = (&a * &lambda - &b).norm();
    if residual > slack {
        return false;
    }
    let scale = simplex
        .iter()
        .map(|p| dist(p, &simplex[0]))
        .fold(1.0, f64::max);
    let tol = slack / scale;
    let sum: f64 = lambda.iter().sum();
    lambda.iter().all(|&l| l >= -tol) && sum <= 1.0 + tol
}

/// The contact hypergraph of a packing, on the quotient by the lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactComplex {
    /// Sphere indices (one vertex per sphere of the fundamental domain).
    pub vertices: Vec<usize>,
    /// Hyperedges in canonical translate, sorted by cardinality then content.
    /// Singletons are included.
    pub hyperedges: Vec<Vec<Node>>,
}

impl ContactComplex {
    pub fn of_size(&self, k: usize) -> impl Iterator<Item = &Vec<Node>> {
        self.hyperedges.iter().filter(move |e| e.len() == k)
    }
}

/// Canonical translate of a set of nodes: among the translates that put a
/// member with the smallest sphere index at offset zero, the
/// lexicographically smallest sorted list.
fn canonical_set(nodes: &[Node]) -> Vec<Node> {
    let min_sphere = nodes.iter().map(|n| n.sphere).min().expect("nonempty");
    nodes
        .iter()
        .filter(|n| n.sphere == min_sphere)
        .map(|anchor| {
            let mut v: Vec<Node> = nodes.iter().map(|n| n.unshifted(&anchor.offset)).collect();
            v.sort();
            v
        })
        .min()
        .expect("nonempty")
}

fn build_contacts(p: &SpherePacking, geo: &Geometry) -> (ContactComplex, Vec<Overlap>) {
    let d = p.dim;
    let per_sphere: Vec<(Vec<Node>, Vec<Overlap>)> =
        (0..p.spheres.len()).into_par_iter().map(|i| geo.contacts(i)).collect();
    let mut edges: BTreeSet<Vec<Node>> = BTreeSet::new();
    for i in 0..p.spheres.len() {
        edges.insert(vec![Node::base(i, d)]);
    }
    let reach = geo.reach;
    let found: Vec<Vec<Vec<Node>>> = (0..p.spheres.len())
        .into_par_iter()
        .map(|i| {
            let base = Node::base(i, d);
            let tangent = &per_sphere[i].0;
            let candidates: Vec<(Node, Vec<f64>)> = geo
                .around(i, reach)
                .into_iter()
                .map(|(n, _)| {
                    let x = geo.position(&n);
                    (n, x)
                })
                .chain(std::iter::once((base.clone(), geo.position(&base))))
                .collect();
            let mut out = Vec::new();
            // Grow cliques containing the base node, keeping members sorted to
            // avoid revisiting permutations.
            let mut stack: Vec<Vec<Node>> = tangent.iter().map(|t| vec![base.clone(), t.clone()]).collect();
            while let Some(clique) = stack.pop() {
                let pts: Vec<Vec<f64>> = clique.iter().map(|n| geo.position(n)).collect();
                let hull_clean = candidates.iter().all(|(n, x)| clique.contains(n) || !in_simplex(x, &pts, HULL_SLACK));
                if hull_clean {
                    out.push(clique.clone());
                }
                if clique.len() < d + 1 {
                    let last = clique.last().expect("nonempty").clone();
                    for t in tangent.iter().filter(|t| **t > last) {
                        if clique[1..].iter().all(|m| geo.tangent(m, t)) {
                            let mut next = clique.clone();
                            next.push(t.clone());
                            stack.push(next);
                        }
                    }
                }
            }
            out
        })
        .collect();
    for list in found {
        for e in list {
            edges.insert(canonical_set(&e));
        }
    }
    let mut hyperedges: Vec<Vec<Node>> = edges.into_iter().collect();
    hyperedges.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut overlaps: Vec<Overlap> = per_sphere.into_iter().flat_map(|(_, o)| o).collect();
    overlaps.retain(|o| canonical_set(&[o.a.clone(), o.b.clone()])[0] == o.a);
    (
        ContactComplex {
            vertices: (0..p.spheres.len()).collect(),
            hyperedges,
        },
        overlaps,
    )
}

/// The contact hypergraph: every set of at most `d + 1` mutually tangent
/// spheres whose convex hull contains no other sphere center.
pub fn contact_hypergraph(p: &SpherePacking) -> Result<ContactComplex> {
    p.validate_structure()?;
    let geo = Geometry::new(p)?;
    let (complex, overlaps) = build_contacts(p, &geo);
    if let Some(o) = overlaps.first() {
        return Err(Error::InvalidPacking(o.to_string()));
    }
    Ok(complex)
}

/// Distinct radii in increasing order, merged with relative tolerance.
pub fn radii_of(p: &SpherePacking) -> Vec<f64> {
    let mut r: Vec<f64> = p.spheres.iter().map(|s| s.radius).collect();
    r.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in r {
        match out.last() {
            Some(&last) if x <= last * (1.0 + RADIUS_TOL) => {}
            _ => out.push(x),
        }
    }
    out
}

/// Labels by radius rank together with the distinct radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Labeling {
    pub radii: Vec<f64>,
    /// Label of each sphere, by index.
    pub labels: Vec<Label>,
}

impl Labeling {
    pub fn n(&self) -> usize {
        self.radii.len()
    }
}

/// Attach to each sphere the rank of its radius among the distinct radii.
pub fn canonical_labeling(p: &SpherePacking) -> Labeling {
    let radii = radii_of(p);
    let labels = p
        .spheres
        .iter()
        .map(|s| {
            radii
                .iter()
                .rposition(|&r| s.radius >= r * (1.0 - RADIUS_TOL))
                .unwrap_or(0)
        })
        .collect();
    Labeling { radii, labels }
}

/// `ρ(j) = r_j`, the `j`-th smallest radius.
pub fn canonical_realizer(p: &SpherePacking) -> Realizer {
    Realizer::new(radii_of(p)).expect("radii are positive")
}

/// One reason a planar packing is not compact.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerifyFailure {
    Overlap {
        a: Node,
        b: Node,
        distance: f64,
        radius_sum: f64,
    },
    /// The disc lies in no contact triangle.
    Uncovered { sphere: usize, id: usize },
    /// An edge from the disc lies in a number of triangles other than two.
    NonManifoldEdge {
        sphere: usize,
        id: usize,
        neighbor: Node,
        triangles: usize,
    },
    /// A tangent neighbor is not in any triangle of the fan.
    DanglingContact { sphere: usize, id: usize, neighbor: Node },
    /// The triangles around the disc do not close up into one cycle.
    BrokenFan { sphere: usize, id: usize, detail: String },
    /// The triangle angles around the disc do not sum to 2π.
    AngleSum { sphere: usize, id: usize, sum: f64 },
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyFailure::Overlap { a, b, distance, radius_sum } => {
                write!(f, "spheres {a} and {b} overlap (distance {distance}, radius sum {radius_sum})")
            }
            VerifyFailure::Uncovered { id, .. } => write!(f, "sphere {id} lies in no contact triangle"),
            VerifyFailure::NonManifoldEdge { id, neighbor, triangles, .. } => write!(
                f,
                "fan of sphere {id}: edge to {neighbor} lies in {triangles} triangles"
            ),
            VerifyFailure::DanglingContact { id, neighbor, .. } => {
                write!(f, "fan of sphere {id}: contact with {neighbor} lies in no triangle")
            }
            VerifyFailure::BrokenFan { id, detail, .. } => write!(f, "fan of sphere {id} is broken: {detail}"),
            VerifyFailure::AngleSum { id, sum, .. } => {
                write!(f, "fan of sphere {id}: angles sum to {sum}, not 2π")
            }
        }
    }
}

/// The cyclic fan of triangles around one disc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fan {
    pub sphere: usize,
    /// Neighbors in counterclockwise order.
    pub neighbors: Vec<Node>,
    /// Neighbor labels in the same order.
    pub word: Vec<Label>,
    pub angle_sum: f64,
}

/// The packing complex of a verified planar packing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingComplex {
    pub labeling: Labeling,
    /// Contact triangles in canonical translate.
    pub triangles: Vec<Vec<Node>>,
    /// One fan per sphere of the fundamental domain, by index.
    pub fans: Vec<Fan>,
}

/// Outcome of [`verify_compact_2d`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub compact: bool,
    pub failures: Vec<VerifyFailure>,
    /// Present exactly when `compact` holds.
    pub complex: Option<PackingComplex>,
}

/// Verify that a planar periodic packing is compact: the contact triangles
/// tile the torus, i.e. around every disc the incident triangles form a
/// single cyclic fan whose realized angles sum to 2π.
///
/// Geometric defects are reported, not raised; errors are reserved for
/// inputs outside the scope of the check.
pub fn verify_compact_2d(p: &SpherePacking) -> Result<VerifyReport> {
    if p.dim != 2 {
        return Err(Error::Precondition(format!("planar verification needs dim 2, got {}", p.dim)));
    }
    if p.lattice.is_none() {
        return Err(Error::Precondition("planar verification needs a periodic lattice".into()));
    }
    p.validate_structure()?;
    let geo = Geometry::new(p)?;
    let (complex, overlaps) = build_contacts(p, &geo);
    let labeling = canonical_labeling(p);
    let mut failures: Vec<VerifyFailure> = overlaps
        .into_iter()
        .map(|o| VerifyFailure::Overlap {
            a: o.a,
            b: o.b,
            distance: o.distance,
            radius_sum: o.radius_sum,
        })
        .collect();
    let triangles: Vec<Vec<Node>> = complex.of_size(3).cloned().collect();
    let mut incident: Vec<Vec<(Node, Node)>> = vec![Vec::new(); p.spheres.len()];
    for t in &triangles {
        for (k, corner) in t.iter().enumerate() {
            let others: Vec<Node> = (0..3)
                .filter(|&m| m != k)
                .map(|m| t[m].unshifted(&corner.offset))
                .collect();
            incident[corner.sphere].push((others[0].clone(), others[1].clone()));
        }
    }
    let fans: Vec<std::result::Result<Fan, Vec<VerifyFailure>>> = (0..p.spheres.len())
        .into_par_iter()
        .map(|i| build_fan(p, &geo, &labeling, i, &incident[i]))
        .collect();
    let mut ok_fans = Vec::new();
    for f in fans {
        match f {
            Ok(fan) => ok_fans.push(fan),
            Err(mut errs) => failures.append(&mut errs),
        }
    }
    let compact = failures.is_empty();
    Ok(VerifyReport {
        name: p.label(),
        compact,
        failures,
        complex: compact.then_some(PackingComplex {
            labeling,
            triangles,
            fans: ok_fans,
        }),
    })
}

fn build_fan(
    p: &SpherePacking,
    geo: &Geometry,
    labeling: &Labeling,
    i: usize,
    incident: &[(Node, Node)],
) -> std::result::Result<Fan, Vec<VerifyFailure>> {
    let id = p.spheres[i].id;
    if incident.is_empty() {
        return Err(vec![VerifyFailure::Uncovered { sphere: i, id }]);
    }
    let mut failures = Vec::new();
    let mut adj: HashMap<Node, Vec<Node>> = HashMap::new();
    for (u, v) in incident {
        adj.entry(u.clone()).or_default().push(v.clone());
        adj.entry(v.clone()).or_default().push(u.clone());
    }
    let mut nbrs: Vec<&Node> = adj.keys().collect();
    nbrs.sort();
    for u in nbrs {
        let count = adj[u].len();
        if count != 2 {
            failures.push(VerifyFailure::NonManifoldEdge {
                sphere: i,
                id,
                neighbor: u.clone(),
                triangles: count,
            });
        }
    }
    let (tangent, _) = geo.contacts(i);
    for t in &tangent {
        if !adj.contains_key(t) {
            failures.push(VerifyFailure::DanglingContact {
                sphere: i,
                id,
                neighbor: t.clone(),
            });
        }
    }
    let ri = labeling.radii[labeling.labels[i]];
    let sum: f64 = incident
        .iter()
        .map(|(u, v)| {
            angle_from_radii(
                ri,
                labeling.radii[labeling.labels[u.sphere]],
                labeling.radii[labeling.labels[v.sphere]],
            )
        })
        .sum();
    if !failures.is_empty() {
        if (sum - TAU).abs() > ANGLE_SUM_TOL {
            failures.push(VerifyFailure::AngleSum { sphere: i, id, sum });
        }
        return Err(failures);
    }
    // Every neighbor has degree two; check the neighbors form one cycle.
    let start = adj.keys().min().expect("nonempty").clone();
    let mut cycle = vec![start.clone()];
    let (mut prev, mut cur) = (start.clone(), adj[&start][0].clone());
    while cur != start {
        cycle.push(cur.clone());
        let next = if adj[&cur][0] != prev { adj[&cur][0].clone() } else { adj[&cur][1].clone() };
        prev = cur;
        cur = next;
        if cycle.len() > adj.len() {
            break;
        }
    }
    if cycle.len() != adj.len() {
        failures.push(VerifyFailure::BrokenFan {
            sphere: i,
            id,
            detail: format!(
                "the {} neighbors split into several cycles (one has length {})",
                adj.len(),
                cycle.len()
            ),
        });
    }
    if (sum - TAU).abs() > ANGLE_SUM_TOL {
        failures.push(VerifyFailure::AngleSum { sphere: i, id, sum });
    }
    if !failures.is_empty() {
        return Err(failures);
    }
    // Counterclockwise order by polar angle about the disc center.
    let c = geo.position(&Node::base(i, 2));
    let mut ordered: Vec<(f64, Node)> = cycle
        .into_iter()
        .map(|n| {
            let x = geo.position(&n);
            ((x[1] - c[1]).atan2(x[0] - c[0]), n)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let neighbors: Vec<Node> = ordered.into_iter().map(|(_, n)| n).collect();
    let word = neighbors.iter().map(|n| labeling.labels[n.sphere]).collect();
    Ok(Fan {
        sphere: i,
        neighbors,
        word,
        angle_sum: sum,
    })
}

/// The canonical triangulation around the sphere with id `sphere_id`: the
/// directions from its center to its tangent neighbors, labeled, with the
/// facets of the packing complex's link (planar) or of the declared link
/// (three-dimensional corona fixtures).
pub fn canonical_triangulation(p: &SpherePacking, sphere_id: usize) -> Result<LabeledSphericalTriangulation> {
    let i = p.index_of(sphere_id)?;
    match p.dim {
        2 => {
            let report = verify_compact_2d(p)?;
            let complex = report.complex.ok_or_else(|| {
                let named: Vec<String> = report
                    .failures
                    .iter()
                    .filter(|f| failure_sphere(f) == Some(i))
                    .map(|f| f.to_string())
                    .collect();
                Error::Precondition(if named.is_empty() {
                    format!("packing is not compact: {}", report.failures[0])
                } else {
                    format!("incomplete corona around sphere {sphere_id}: {}", named.join("; "))
                })
            })?;
            fan_triangulation(p, &complex, i)
        }
        3 => declared_link_triangulation(p, i),
        d => Err(Error::Domain(format!("canonical triangulations are built for d = 2, 3; got {d}"))),
    }
}

fn failure_sphere(f: &VerifyFailure) -> Option<usize> {
    match f {
        VerifyFailure::Overlap { a, .. } => Some(a.sphere),
        VerifyFailure::Uncovered { sphere, .. }
        | VerifyFailure::NonManifoldEdge { sphere, .. }
        | VerifyFailure::DanglingContact { sphere, .. }
        | VerifyFailure::BrokenFan { sphere, .. }
        | VerifyFailure::AngleSum { sphere, .. } => Some(*sphere),
    }
}

/// Canonical triangulation of sphere index `i` from a verified complex.
pub fn fan_triangulation(
    p: &SpherePacking,
    complex: &PackingComplex,
    i: usize,
) -> Result<LabeledSphericalTriangulation> {
    let geo = Geometry::new(p)?;
    let fan = &complex.fans[i];
    let c = geo.position(&Node::base(i, 2));
    let coords: Vec<Vec<f64>> = fan
        .neighbors
        .iter()
        .map(|n| {
            let x = geo.position(n);
            let v = [x[0] - c[0], x[1] - c[1]];
            let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
            vec![v[0] / len, v[1] / len]
        })
        .collect();
    let m = coords.len();
    let facets = (0..m).map(|k| vec![k, (k + 1) % m]).collect();
    LabeledSphericalTriangulation::new(
        2,
        complex.labeling.labels[i],
        coords,
        fan.word.clone(),
        facets,
    )
}

fn declared_link_triangulation(p: &SpherePacking, i: usize) -> Result<LabeledSphericalTriangulation> {
    let link = p
        .link
        .as_ref()
        .filter(|l| l.center == p.spheres[i].id)
        .ok_or_else(|| {
            Error::Precondition(format!(
                "sphere {} has no declared link triangulation",
                p.spheres[i].id
            ))
        })?;
    let labeling = canonical_labeling(p);
    let mut ids: Vec<usize> = link.facets.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    let center = &p.spheres[i];
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for &id in &ids {
        let s = &p.spheres[p.index_of(id)?];
        let v: Vec<f64> = s.center.iter().zip(&center.center).map(|(a, b)| a - b).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sum = s.radius + center.radius;
        if (len - sum).abs() > TANGENCY_TOL * sum {
            return Err(Error::Precondition(format!(
                "incomplete corona: sphere {id} in the link of {} is not tangent to it",
                center.id
            )));
        }
        coords.push(v.iter().map(|x| x / len).collect());
        labels.push(labeling.labels[p.index_of(id)?]);
    }
    let facets = link
        .facets
        .iter()
        .map(|f| f.iter().map(|id| ids.binary_search(id).expect("collected")).collect())
        .collect();
    LabeledSphericalTriangulation::new(3, labeling.labels[i], coords, labels, facets)
}

/// Canonical triangulations of every sphere of the fundamental domain
/// (planar), or of the declared link center (three-dimensional).
pub fn canonical_triangulations(p: &SpherePacking) -> Result<Vec<(usize, LabeledSphericalTriangulation)>> {
    match p.dim {
        2 => {
            let report = verify_compact_2d(p)?;
            let complex = report.complex.ok_or_else(|| {
                Error::Precondition(format!("packing is not compact: {}", report.failures[0]))
            })?;
            (0..p.spheres.len())
                .map(|i| Ok((p.spheres[i].id, fan_triangulation(p, &complex, i)?)))
                .collect()
        }
        3 => {
            let link = p
                .link
                .as_ref()
                .ok_or_else(|| Error::Precondition("three-dimensional packing without a declared link".into()))?;
            Ok(vec![(link.center, canonical_triangulation(p, link.center)?)])
        }
        d => Err(Error::Domain(format!("canonical triangulations are built for d = 2, 3; got {d}"))),
    }
}

/// `codes(p)`: the codes of all canonical triangulations, deduplicated.
pub fn codes_of(p: &SpherePacking) -> Result<CodeSet> {
    let n = radii_of(p).len();
    let codes = canonical_triangulations(p)?
        .into_iter()
        .map(|(_, t)| code_of(&t))
        .collect::<Vec<_>>();
    CodeSet::from_codes(n, codes)
}

/// The codes of `p` centered at labels `≤ n − 2`, which form a fundamental
/// set for every compact packing with `n ≥ 2` sizes.
pub fn fundamental_subset(p: &SpherePacking) -> Result<CodeSet> {
    let codes = codes_of(p)?;
    let n = codes.n();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "fundamental subsets need n >= 2 sizes; packing {} has {n}",
            p.label()
        )));
    }
    let subset = codes.filter_centers(|c| c + 2 <= n);
    let check = is_fundamental(&subset);
    if !check.fundamental {
        return Err(Error::Consistency(format!(
            "codes of {} with center <= n-2 are not fundamental ({}); this indicates a verification bug",
            p.label(),
            check.certificate.expect("failure carries a certificate")
        )));
    }
    Ok(subset)
}
