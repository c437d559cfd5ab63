//! Packing codes, code sets, fundamental sets and the `↓` relabeling.
//!
//! A packing code `c:T` pairs the label `c` of a central sphere with the
//! labeled abstract complex `T` formed by its neighbors. In the plane `T` is
//! a cycle, written as a digit string read around the disc (`0:43142`); in
//! higher dimensions it is a facet list.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::angle_core::Label;
use crate::error::{Error, Result};

/// A labeled, homogeneous abstract simplicial `(d−1)`-complex.
///
/// Only facets are stored; lower-dimensional faces are derived. For `d = 2`
/// the complex is a single cycle of length at least 3.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NeighborComplex {
    dim: usize,
    labels: Vec<Label>,
    facets: Vec<Vec<usize>>,
}

impl NeighborComplex {
    /// A cycle whose vertices `0..m` carry `labels` in cyclic order.
    pub fn cycle(labels: Vec<Label>) -> Result<Self> {
        let m = labels.len();
        if m < 3 {
            return Err(Error::Validation(format!(
                "a neighbor cycle needs at least 3 vertices, got {m}"
            )));
        }
        let facets = (0..m).map(|i| sorted_pair(i, (i + 1) % m)).collect();
        Ok(NeighborComplex {
            dim: 2,
            labels,
            facets,
        })
    }

    /// A complex of dimension `dim − 1` given by its facets (each of `dim`
    /// vertex ids). Vertex `i` carries `labels[i]`.
    pub fn from_facets(dim: usize, labels: Vec<Label>, facets: Vec<Vec<usize>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Validation(format!("dimension must be at least 2, got {dim}")));
        }
        let m = labels.len();
        let mut seen = HashSet::new();
        let mut covered = vec![false; m];
        let mut normalized = Vec::with_capacity(facets.len());
        for f in facets {
            let mut f = f;
            f.sort_unstable();
            if f.len() != dim {
                return Err(Error::Validation(format!(
                    "facet {f:?} has {} vertices, expected {dim}",
                    f.len()
                )));
            }
            if f.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Validation(format!("facet {f:?} repeats a vertex")));
            }
            if let Some(&v) = f.iter().find(|&&v| v >= m) {
                return Err(Error::Validation(format!("facet {f:?} names unknown vertex {v}")));
            }
            if !seen.insert(f.clone()) {
                return Err(Error::Validation(format!("facet {f:?} listed twice")));
            }
            for &v in &f {
                covered[v] = true;
            }
            normalized.push(f);
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(Error::Validation(format!(
                "vertex {v} lies in no facet (complex not homogeneous)"
            )));
        }
        let complex = NeighborComplex {
            dim,
            labels,
            facets: normalized,
        };
        if dim == 2 && complex.cycle_order().is_none() {
            return Err(Error::Validation(
                "a planar neighbor complex must be a single cycle of length at least 3".into(),
            ));
        }
        Ok(complex)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> Label {
        self.labels[v]
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn max_label(&self) -> Label {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// The distinct labels present.
    pub fn label_set(&self) -> BTreeSet<Label> {
        self.labels.iter().copied().collect()
    }

    /// All edges (2-element faces), sorted and deduplicated.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = BTreeSet::new();
        for f in &self.facets {
            for i in 0..f.len() {
                for j in i + 1..f.len() {
                    out.insert((f[i], f[j]));
                }
            }
        }
        out.into_iter().collect()
    }

    /// For `d = 2`: vertex ids in cyclic order starting from vertex 0, or
    /// `None` if the facets do not form one cycle through every vertex.
    pub fn cycle_order(&self) -> Option<Vec<usize>> {
        if self.dim != 2 {
            return None;
        }
        let m = self.labels.len();
        if m < 3 || self.facets.len() != m {
            return None;
        }
        let mut adj = vec![Vec::with_capacity(2); m];
        for f in &self.facets {
            adj[f[0]].push(f[1]);
            adj[f[1]].push(f[0]);
        }
        if adj.iter().any(|a| a.len() != 2) {
            return None;
        }
        let mut order = Vec::with_capacity(m);
        let (mut prev, mut cur) = (usize::MAX, 0usize);
        for _ in 0..m {
            order.push(cur);
            let next = if adj[cur][0] != prev { adj[cur][0] } else { adj[cur][1] };
            prev = cur;
            cur = next;
        }
        if cur != 0 {
            return None;
        }
        let distinct: HashSet<usize> = order.iter().copied().collect();
        (distinct.len() == m).then_some(order)
    }

    /// For `d = 2`: labels read around the cycle in canonical form.
    pub fn cycle_word(&self) -> Option<Vec<Label>> {
        let order = self.cycle_order()?;
        Some(canonical_cycle(
            &order.iter().map(|&v| self.labels[v]).collect::<Vec<_>>(),
        ))
    }

    /// The same complex with every label replaced by `f(label)`.
    pub fn relabel(&self, f: impl Fn(Label) -> Label) -> NeighborComplex {
        NeighborComplex {
            dim: self.dim,
            labels: self.labels.iter().map(|&l| f(l)).collect(),
            facets: self.facets.clone(),
        }
    }

    /// Canonical representative: for cycles, the canonical word on vertices
    /// `0..m`; otherwise facets sorted.
    pub fn canonical(&self) -> NeighborComplex {
        if let Some(word) = self.cycle_word() {
            return NeighborComplex::cycle(word).expect("cycle already validated");
        }
        let mut c = self.clone();
        c.facets.sort();
        c
    }
}

fn sorted_pair(a: usize, b: usize) -> Vec<usize> {
    if a < b {
        vec![a, b]
    } else {
        vec![b, a]
    }
}

/// The lexicographically least rotation of the word or of its reversal.
pub fn canonical_cycle(word: &[Label]) -> Vec<Label> {
    let m = word.len();
    let mut best: Option<Vec<Label>> = None;
    let mut reversed = word.to_vec();
    reversed.reverse();
    for w in [word, reversed.as_slice()] {
        for s in 0..m {
            let cand: Vec<Label> = (0..m).map(|i| w[(s + i) % m]).collect();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

/// A packing code `c:T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PackingCode {
    pub center: Label,
    pub neighbors: NeighborComplex,
}

impl PackingCode {
    pub fn new(center: Label, neighbors: NeighborComplex) -> Self {
        PackingCode { center, neighbors }
    }

    /// A planar code from its center and cyclic neighbor labels.
    pub fn cycle(center: Label, word: Vec<Label>) -> Result<Self> {
        Ok(PackingCode {
            center,
            neighbors: NeighborComplex::cycle(word)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.neighbors.dim()
    }

    pub fn max_label(&self) -> Label {
        self.center.max(self.neighbors.max_label())
    }

    pub fn canonical(&self) -> PackingCode {
        PackingCode {
            center: self.center,
            neighbors: self.neighbors.canonical(),
        }
    }
}

impl fmt::Display for PackingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.neighbors.cycle_word() {
            Some(word) => write!(f, "{}:{}", self.center, format_word(&word)),
            None => write!(
                f,
                "{}:{{{} vertices, {} facets}}",
                self.center,
                self.neighbors.vertex_count(),
                self.neighbors.facets().len()
            ),
        }
    }
}

/// Digits when every label is below 10, otherwise a bracketed list.
pub fn format_word(word: &[Label]) -> String {
    if word.iter().all(|&l| l < 10) {
        word.iter().map(|l| char::from(b'0' + *l as u8)).collect()
    } else {
        let parts: Vec<String> = word.iter().map(|l| l.to_string()).collect();
        format!("[{}]", parts.join(","))
    }
}

/// A finite set of codes over the labels `0..n`, deduplicated up to labeled
/// isomorphism and kept in a canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSet {
    n: usize,
    dim: usize,
    codes: Vec<PackingCode>,
}

impl CodeSet {
    pub fn new(n: usize, dim: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Validation("a code set needs at least one label".into()));
        }
        Ok(CodeSet {
            n,
            dim,
            codes: Vec::new(),
        })
    }

    /// Collect codes into a set over labels `0..n`.
    pub fn from_codes(n: usize, codes: impl IntoIterator<Item = PackingCode>) -> Result<Self> {
        let mut iter = codes.into_iter().peekable();
        let dim = iter.peek().map(|c| c.dim()).unwrap_or(2);
        let mut set = CodeSet::new(n, dim)?;
        for c in iter {
            set.insert(c)?;
        }
        Ok(set)
    }

    /// Insert a code; returns `false` if an isomorphic code was present.
    pub fn insert(&mut self, code: PackingCode) -> Result<bool> {
        if code.dim() != self.dim {
            return Err(Error::Validation(format!(
                "code of dimension {} in a set of dimension {}",
                code.dim(),
                self.dim
            )));
        }
        if code.max_label() >= self.n {
            return Err(Error::Validation(format!(
                "code {code} uses label {} but the label set has n = {}",
                code.max_label(),
                self.n
            )));
        }
        let code = code.canonical();
        let duplicate = self.codes.iter().any(|c| {
            c.center == code.center
                && labeled_isomorphic(&c.neighbors, &code.neighbors).is_some()
        });
        if duplicate {
            return Ok(false);
        }
        self.codes.push(code);
        self.codes.sort_by_key(code_key);
        Ok(true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codes(&self) -> &[PackingCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Distinct center labels.
    pub fn centers(&self) -> BTreeSet<Label> {
        self.codes.iter().map(|c| c.center).collect()
    }

    /// Codes whose center satisfies `keep`, over the same label set.
    pub fn filter_centers(&self, keep: impl Fn(Label) -> bool) -> CodeSet {
        CodeSet {
            n: self.n,
            dim: self.dim,
            codes: self.codes.iter().filter(|c| keep(c.center)).cloned().collect(),
        }
    }
}

impl fmt::Display for CodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.codes.iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn code_key(c: &PackingCode) -> (Label, usize, Vec<Label>, Vec<Vec<usize>>) {
    match c.neighbors.cycle_word() {
        Some(w) => (c.center, w.len(), w, Vec::new()),
        None => (
            c.center,
            c.neighbors.vertex_count(),
            c.neighbors.labels().to_vec(),
            c.neighbors.facets().to_vec(),
        ),
    }
}

/// Why a code set is not fundamental.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// The set has no codes at all.
    NoCenters,
    /// No code is centered at this label.
    MissingCenter(Label),
    /// A code is centered at the largest label (or beyond).
    UnexpectedCenter(Label),
    /// A nonempty `K ⊆ {0,…,n−2}` such that every code centered in `K` only
    /// sees labels in `K`. The reported `K` is the largest such set.
    Closed(Vec<Label>),
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::NoCenters => write!(f, "no centers"),
            Certificate::MissingCenter(l) => write!(f, "no code centered at label {l}"),
            Certificate::UnexpectedCenter(l) => {
                write!(f, "code centered at label {l}, outside 0..n-2")
            }
            Certificate::Closed(k) => {
                let parts: Vec<String> = k.iter().map(|l| l.to_string()).collect();
                write!(f, "K = {{{}}} has no code escaping it", parts.join(","))
            }
        }
    }
}

/// Outcome of [`is_fundamental`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fundamentality {
    pub fundamental: bool,
    pub certificate: Option<Certificate>,
}

/// Decide whether `C` is fundamental: its centers are exactly `0..n−1`
/// (excluding the largest label `n−1`), and every nonempty `K ⊆ {0,…,n−2}`
/// contains the center of some code that has a neighbor label outside `K`.
///
/// All `2^(n−1) − 1` subsets are checked.
pub fn is_fundamental(c: &CodeSet) -> Fundamentality {
    let fail = |cert| Fundamentality {
        fundamental: false,
        certificate: Some(cert),
    };
    if c.is_empty() {
        return fail(Certificate::NoCenters);
    }
    let n = c.n();
    let centers = c.centers();
    if let Some(&l) = centers.iter().find(|&&l| l + 1 >= n) {
        return fail(Certificate::UnexpectedCenter(l));
    }
    if let Some(l) = (0..n - 1).find(|l| !centers.contains(l)) {
        return fail(Certificate::MissingCenter(l));
    }
    let bits = n - 1;
    assert!(bits < 64, "fundamentality check supports at most 64 labels");
    // Per code: center bit and the bitmask of neighbor labels (the largest
    // label is always outside every K, so it gets a bit beyond `bits`).
    let masks: Vec<(u64, u128)> = c
        .codes()
        .iter()
        .map(|code| {
            let nb = code
                .neighbors
                .labels()
                .iter()
                .fold(0u128, |m, &l| m | (1u128 << l));
            (1u64 << code.center, nb)
        })
        .collect();
    // Scanning masks downward finds the largest closed K first: the union of
    // closed sets is closed, so the maximum is also numerically largest.
    let full: u64 = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut k = full;
    loop {
        let escapes = masks
            .iter()
            .any(|&(cm, nb)| cm & k != 0 && nb & !(k as u128) != 0);
        if !escapes {
            let labels = (0..bits).filter(|&l| k & (1 << l) != 0).collect();
            return fail(Certificate::Closed(labels));
        }
        if k == 1 {
            break;
        }
        k -= 1;
    }
    Fundamentality {
        fundamental: true,
        certificate: None,
    }
}

/// `x ↓ s`: every label larger than `s` becomes `s`.
pub fn downarrow_complex(t: &NeighborComplex, s: Label) -> NeighborComplex {
    t.relabel(|l| l.min(s))
}

/// `c:T ↓ s`, applied to the center and all neighbor labels.
pub fn downarrow_code(code: &PackingCode, s: Label) -> PackingCode {
    PackingCode {
        center: code.center.min(s),
        neighbors: downarrow_complex(&code.neighbors, s),
    }
}

/// `C_k = { c:T↓_{k−1} : c:T ∈ C, c ≤ k−2 }` over the labels `0..k`.
///
/// `C` must be fundamental and `2 ≤ k ≤ n`.
pub fn downarrow_codeset(c: &CodeSet, k: usize) -> Result<CodeSet> {
    if k < 2 || k > c.n() {
        return Err(Error::Domain(format!(
            "k must satisfy 2 <= k <= n = {}, got {k}",
            c.n()
        )));
    }
    let check = is_fundamental(c);
    if !check.fundamental {
        return Err(Error::Precondition(format!(
            "code set is not fundamental: {}",
            check.certificate.expect("failure carries a certificate")
        )));
    }
    let mut out = CodeSet::new(k, c.dim())?;
    for code in c.codes().iter().filter(|code| code.center + 2 <= k) {
        out.insert(downarrow_code(code, k - 1))?;
    }
    Ok(out)
}

/// All label-preserving simplicial isomorphisms `T1 → T2`, each given as the
/// image of every vertex of `T1`.
pub fn labeled_isomorphisms(t1: &NeighborComplex, t2: &NeighborComplex) -> Vec<Vec<usize>> {
    isomorphism_search(t1, t2, usize::MAX)
}

/// One label-preserving simplicial isomorphism `T1 → T2`, if any.
pub fn labeled_isomorphic(t1: &NeighborComplex, t2: &NeighborComplex) -> Option<Vec<usize>> {
    isomorphism_search(t1, t2, 1).into_iter().next()
}

fn isomorphism_search(t1: &NeighborComplex, t2: &NeighborComplex, limit: usize) -> Vec<Vec<usize>> {
    if t1.dim() != t2.dim()
        || t1.vertex_count() != t2.vertex_count()
        || t1.facets().len() != t2.facets().len()
    {
        return Vec::new();
    }
    let mut l1 = t1.labels().to_vec();
    let mut l2 = t2.labels().to_vec();
    l1.sort_unstable();
    l2.sort_unstable();
    if l1 != l2 {
        return Vec::new();
    }
    if t1.dim() == 2 {
        cycle_isomorphisms(t1, t2, limit)
    } else {
        Backtrack::new(t1, t2, limit).run()
    }
}

fn cycle_isomorphisms(t1: &NeighborComplex, t2: &NeighborComplex, limit: usize) -> Vec<Vec<usize>> {
    let (Some(o1), Some(o2)) = (t1.cycle_order(), t2.cycle_order()) else {
        return Vec::new();
    };
    let m = o1.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for reflect in [false, true] {
        for shift in 0..m {
            let image = |i: usize| {
                if reflect {
                    o2[(shift + m - i) % m]
                } else {
                    o2[(shift + i) % m]
                }
            };
            if (0..m).all(|i| t1.label(o1[i]) == t2.label(image(i))) {
                let mut map = vec![0; m];
                for i in 0..m {
                    map[o1[i]] = image(i);
                }
                if !out.contains(&map) {
                    out.push(map);
                    if out.len() >= limit {
                        return out;
                    }
                }
            }
        }
    }
    out
}

struct Backtrack<'a> {
    t1: &'a NeighborComplex,
    t2: &'a NeighborComplex,
    limit: usize,
    order: Vec<usize>,
    facets2: HashSet<Vec<usize>>,
    adj1: Vec<BTreeSet<usize>>,
    adj2: Vec<BTreeSet<usize>>,
    facets_of1: Vec<Vec<usize>>,
    degree1: Vec<usize>,
    degree2: Vec<usize>,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
}

impl<'a> Backtrack<'a> {
    fn new(t1: &'a NeighborComplex, t2: &'a NeighborComplex, limit: usize) -> Self {
        let m = t1.vertex_count();
        let adjacency = |t: &NeighborComplex| {
            let mut adj = vec![BTreeSet::new(); m];
            for (a, b) in t.edges() {
                adj[a].insert(b);
                adj[b].insert(a);
            }
            adj
        };
        let degree = |t: &NeighborComplex| {
            let mut d = vec![0; m];
            for f in t.facets() {
                for &v in f {
                    d[v] += 1;
                }
            }
            d
        };
        let mut facets_of1 = vec![Vec::new(); m];
        for (i, f) in t1.facets().iter().enumerate() {
            for &v in f {
                facets_of1[v].push(i);
            }
        }
        let adj1 = adjacency(t1);
        // Breadth-first order so each vertex after the first in its component
        // is adjacent to an already assigned vertex.
        let mut order = Vec::with_capacity(m);
        let mut seen = vec![false; m];
        for start in 0..m {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &u in &adj1[v] {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        Backtrack {
            t1,
            t2,
            limit,
            order,
            facets2: t2.facets().iter().cloned().collect(),
            adj2: adjacency(t2),
            adj1,
            facets_of1,
            degree1: degree(t1),
            degree2: degree(t2),
            map: vec![None; m],
            used: vec![false; m],
            found: Vec::new(),
        }
    }

    fn run(mut self) -> Vec<Vec<usize>> {
        self.extend(0);
        self.found
    }

    fn extend(&mut self, depth: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        if depth == self.order.len() {
            self.found
                .push(self.map.iter().map(|x| x.expect("complete map")).collect());
            return;
        }
        let v = self.order[depth];
        for w in 0..self.t2.vertex_count() {
            if self.used[w]
                || self.t2.label(w) != self.t1.label(v)
                || self.degree2[w] != self.degree1[v]
            {
                continue;
            }
            self.map[v] = Some(w);
            if self.consistent(v) {
                self.used[w] = true;
                self.extend(depth + 1);
                self.used[w] = false;
            }
            self.map[v] = None;
            if self.found.len() >= self.limit {
                return;
            }
        }
    }

    fn consistent(&self, v: usize) -> bool {
        let w = self.map[v].expect("just assigned");
        for &u in &self.adj1[v] {
            if let Some(x) = self.map[u] {
                if !self.adj2[w].contains(&x) {
                    return false;
                }
            }
        }
        for &fi in &self.facets_of1[v] {
            let f = &self.t1.facets()[fi];
            let image: Option<Vec<usize>> = f.iter().map(|&u| self.map[u]).collect();
            if let Some(mut image) = image {
                image.sort_unstable();
                if !self.facets2.contains(&image) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Deserialize, Serialize)]
struct JsonCodeSet {
    dim: usize,
    n: usize,
    codes: Vec<JsonCode>,
}

#[derive(Deserialize, Serialize)]
struct JsonCode {
    center: Label,
    vertices: Vec<JsonVertex>,
    facets: Vec<Vec<usize>>,
}

#[derive(Deserialize, Serialize)]
struct JsonVertex {
    id: usize,
    label: Label,
}

/// Parse a code-set file.
///
/// Text form: `#` comments, an optional header `dim=2 n=<n>`, then codes
/// `<center>:<digits>` separated by newlines, commas or whitespace. Without a
/// header `n` is one more than the largest label used. A document starting
/// with `{` is read as the JSON facet-list form.
pub fn parse_codes(text: &str) -> Result<CodeSet> {
    if text.trim_start().starts_with('{') {
        return parse_codes_json(text);
    }
    let mut declared_n: Option<usize> = None;
    let mut parsed: Vec<(usize, usize, PackingCode)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if line.contains('=') {
            if !parsed.is_empty() || declared_n.is_some() {
                return Err(parse_err(line_no, 0, "header must precede all codes"));
            }
            declared_n = Some(parse_header(line, line_no)?);
            continue;
        }
        let mut offset = 0;
        for token in line.split(|ch: char| ch == ',' || ch.is_whitespace()) {
            if !token.is_empty() {
                let start = offset;
                parsed.push((line_no, start, parse_cycle_token(token, line_no, start)?));
            }
            offset += token.chars().count() + 1;
        }
    }
    let n = match declared_n {
        Some(n) => n,
        None => parsed.iter().map(|(_, _, c)| c.max_label()).max().map_or(1, |m| m + 1),
    };
    let mut set = CodeSet::new(n, 2)?;
    for (line, _, code) in parsed {
        if code.max_label() >= n {
            return Err(Error::Validation(format!(
                "line {line}: code {code} uses label {} but n = {n}",
                code.max_label()
            )));
        }
        set.insert(code)?;
    }
    Ok(set)
}

fn parse_err(line: usize, character: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        character,
        message: message.into(),
    }
}

fn parse_header(line: &str, line_no: usize) -> Result<usize> {
    let mut dim = None;
    let mut n = None;
    for part in line.split_whitespace() {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, 0, format!("malformed header field `{part}`")))?;
        let value: usize = value
            .parse()
            .map_err(|_| parse_err(line_no, 0, format!("header value `{value}` is not a number")))?;
        match key {
            "dim" => dim = Some(value),
            "n" => n = Some(value),
            _ => return Err(parse_err(line_no, 0, format!("unknown header field `{key}`"))),
        }
    }
    if dim.unwrap_or(2) != 2 {
        return Err(parse_err(
            line_no,
            0,
            "the digit-string form is only for dim=2; use the JSON form",
        ));
    }
    n.ok_or_else(|| parse_err(line_no, 0, "header lacks n=<labels>"))
}

fn parse_cycle_token(token: &str, line: usize, start: usize) -> Result<PackingCode> {
    let (center, word) = token
        .split_once(':')
        .ok_or_else(|| parse_err(line, start, format!("expected <center>:<labels>, got `{token}`")))?;
    let center: Label = center
        .parse()
        .map_err(|_| parse_err(line, start, format!("center `{center}` is not a label")))?;
    let word_start = start + token.find(':').expect("split succeeded") + 1;
    let mut labels = Vec::with_capacity(word.len());
    for (i, ch) in word.chars().enumerate() {
        let d = ch
            .to_digit(10)
            .ok_or_else(|| parse_err(line, word_start + i, format!("invalid label digit `{ch}`")))?;
        labels.push(d as Label);
    }
    PackingCode::cycle(center, labels).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("line {line}: {msg}")),
        other => other,
    })
}

fn parse_codes_json(text: &str) -> Result<CodeSet> {
    let doc: JsonCodeSet = serde_json::from_str(text)?;
    let mut set = CodeSet::new(doc.n, doc.dim)?;
    for code in doc.codes {
        let m = code.vertices.len();
        let mut labels = vec![None; m];
        for v in &code.vertices {
            if v.id >= m || labels[v.id].is_some() {
                return Err(Error::Validation(format!(
                    "vertex ids must be 0..{m} without repeats, got {}",
                    v.id
                )));
            }
            labels[v.id] = Some(v.label);
        }
        let labels: Vec<Label> = labels.into_iter().map(|l| l.expect("filled")).collect();
        let complex = NeighborComplex::from_facets(doc.dim, labels, code.facets)?;
        set.insert(PackingCode::new(code.center, complex))?;
    }
    Ok(set)
}

/// Serialize a code set in canonical form. Planar sets with single-digit
/// labels use the text form; everything else uses the JSON form.
pub fn serialize_codes(c: &CodeSet) -> String {
    if c.dim() == 2 && c.n() <= 10 {
        let mut out = format!("dim=2 n={}\n", c.n());
        for code in c.codes() {
            out.push_str(&code.to_string());
            out.push('\n');
        }
        return out;
    }
    let doc = JsonCodeSet {
        dim: c.dim(),
        n: c.n(),
        codes: c
            .codes()
            .iter()
            .map(|code| JsonCode {
                center: code.center,
                vertices: code
                    .neighbors
                    .labels()
                    .iter()
                    .enumerate()
                    .map(|(id, &label)| JsonVertex { id, label })
                    .collect(),
                facets: code.neighbors.facets().to_vec(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("code sets serialize") + "\n"
}

/// Parse a single planar word such as `43142` into labels.
pub fn parse_word(word: &str) -> Result<Vec<Label>> {
    word.chars()
        .enumerate()
        .map(|(i, ch)| {
            ch.to_digit(10)
                .map(|d| d as Label)
                .ok_or_else(|| parse_err(1, i, format!("invalid label digit `{ch}`")))
        })
        .collect()
}
