//! Numeric solvers over realizers.
//!
//! * corona equations in the plane: the angles around a disc must sum to 2π;
//! * the two-size candidate enumeration with its CANDIDATE / VERIFIED /
//!   UNRESOLVED tiers;
//! * damped Newton on a whole system of corona equations, with the Jacobian
//!   assembled from [`crate::angle_core::gradient`];
//! * seeded harnesses exercising uniqueness of the normalized realizer and
//!   the bootstrapping inequality.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt;

use crate::angle_core::{angle_from_radii, gradient, AngleSymbol, Label, Realizer};
use crate::codes::{canonical_cycle, downarrow_codeset, format_word, is_fundamental, CodeSet, PackingCode};
use crate::error::{Error, Result};
use crate::packing::{radii_of, verify_compact_2d, SpherePacking};

/// Number of grid cells scanned for sign changes.
pub const SCAN_CELLS: usize = 10_000;
/// Open interval searched for two-size radii.
pub const SCAN_MIN: f64 = 1e-6;
pub const SCAN_MAX: f64 = 1.0 - 1e-6;
/// Residual target for bisection and Newton.
pub const ROOT_TOL: f64 = 1e-12;
/// Radii closer than this are reported as one candidate.
pub const DEDUP_TOL: f64 = 1e-8;
/// Maximum Newton iterations.
pub const MAX_NEWTON_ITERS: usize = 200;
/// Slack for the bootstrapping inequalities.
pub const BOOTSTRAP_SLACK: f64 = 1e-9;
/// Per-coordinate agreement required between multistart solutions.
pub const AGREEMENT_TOL: f64 = 1e-8;

/// A planar corona: a center label and its cyclic neighbor word, stored in
/// canonical rotation/reflection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CoronaWord {
    pub center: Label,
    pub word: Vec<Label>,
}

impl CoronaWord {
    pub fn new(center: Label, word: Vec<Label>) -> Result<Self> {
        if word.len() < 3 {
            return Err(Error::Domain(format!(
                "a corona word needs at least 3 labels, got {}",
                word.len()
            )));
        }
        Ok(CoronaWord {
            center,
            word: canonical_cycle(&word),
        })
    }

    /// The corona of a planar code.
    pub fn from_code(code: &PackingCode) -> Result<Self> {
        let word = code
            .neighbors
            .cycle_word()
            .ok_or_else(|| Error::Domain(format!("code {code} is not a planar cycle")))?;
        CoronaWord::new(code.center, word)
    }

    /// Whether the word contains a label other than the center.
    pub fn mixes_labels(&self) -> bool {
        self.word.iter().any(|&l| l != self.center)
    }

    pub fn max_label(&self) -> Label {
        self.word.iter().copied().chain([self.center]).max().expect("nonempty")
    }

    /// Consecutive cyclic pairs `(u, v)` of the word.
    fn pairs(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        let m = self.word.len();
        (0..m).map(move |k| (self.word[k], self.word[(k + 1) % m]))
    }
}

impl fmt::Display for CoronaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.center, format_word(&self.word))
    }
}

/// Sum of the realized angles at the center over consecutive neighbor pairs.
pub fn angle_sum(w: &CoronaWord, rho: &Realizer) -> Result<f64> {
    let c = rho.value(w.center)?;
    let mut sum = 0.0;
    for (u, v) in w.pairs() {
        sum += angle_from_radii(c, rho.value(u)?, rho.value(v)?);
    }
    Ok(sum)
}

fn two_size_residual(w: &CoronaWord, r: f64) -> f64 {
    let radius = |l: Label| if l == 0 { r } else { 1.0 };
    let c = radius(w.center);
    w.pairs().map(|(u, v)| angle_from_radii(c, radius(u), radius(v))).sum::<f64>() - TAU
}

/// All roots of one two-size corona equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoronaRoots {
    pub word: CoronaWord,
    pub roots: Vec<f64>,
    /// The residual vanishes identically on the scanned interval, so no
    /// root is isolated.
    pub degenerate: bool,
}

/// Solve `angle_sum(w, (r, 1)) = 2π` for `r` in `(10⁻⁶, 1 − 10⁻⁶)` by a
/// sign scan over [`SCAN_CELLS`] cells followed by bisection.
pub fn solve_corona_two_size(w: &CoronaWord) -> CoronaRoots {
    let f = |r: f64| two_size_residual(w, r);
    let grid: Vec<f64> = (0..=SCAN_CELLS)
        .map(|k| SCAN_MIN + (SCAN_MAX - SCAN_MIN) * k as f64 / SCAN_CELLS as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&r| f(r)).collect();
    if values.iter().all(|v| v.abs() <= ROOT_TOL) {
        return CoronaRoots {
            word: w.clone(),
            roots: Vec::new(),
            degenerate: true,
        };
    }
    let mut roots: Vec<f64> = Vec::new();
    for k in 0..SCAN_CELLS {
        let (a, b) = (grid[k], grid[k + 1]);
        let (fa, fb) = (values[k], values[k + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        roots.push(bisect(&f, a, b, fa));
    }
    if values[SCAN_CELLS] == 0.0 {
        roots.push(grid[SCAN_CELLS]);
    }
    CoronaRoots {
        word: w.clone(),
        roots,
        degenerate: false,
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() <= ROOT_TOL * 1e-2 || m <= a || m >= b {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Reliability tier of a two-size candidate radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tier {
    /// A root of some corona equation, not yet compared with fixtures.
    Candidate,
    /// A bundled packing with this radius passes compactness verification.
    Verified,
    /// No verified packing with this radius is known to the pipeline.
    Unresolved,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Candidate => "CANDIDATE",
            Tier::Verified => "VERIFIED",
            Tier::Unresolved => "UNRESOLVED",
        })
    }
}

/// A candidate small radius (large radius 1) with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub radius: f64,
    /// Canonical words (center 0) having this radius as a root.
    pub words: Vec<String>,
    /// Largest residual over the generating words.
    pub residual: f64,
    pub tier: Tier,
    /// Name of the verified packing, if any.
    pub fixture: Option<String>,
}

/// All canonical binary cyclic words of length `len` containing a 1.
pub fn canonical_binary_words(len: usize) -> Vec<Vec<Label>> {
    let mut seen = BTreeSet::new();
    for mask in 1u32..(1u32 << len) {
        let word: Vec<Label> = (0..len).map(|k| ((mask >> k) & 1) as Label).collect();
        seen.insert(canonical_cycle(&word));
    }
    seen.into_iter().collect()
}

/// Enumerate candidate small radii from all canonical corona words of
/// length `3..=max_len` around a small disc. The result is a superset of
/// the radii of compact two-size packings; every entry has tier
/// [`Tier::Candidate`].
pub fn enumerate_two_size_candidates(max_len: usize) -> Result<Vec<Candidate>> {
    if !(3..=12).contains(&max_len) {
        return Err(Error::Domain(format!("max_len must lie in 3..=12, got {max_len}")));
    }
    let words: Vec<CoronaWord> = (3..=max_len)
        .flat_map(canonical_binary_words)
        .map(|w| CoronaWord { center: 0, word: w })
        .collect();
    let solved: Vec<CoronaRoots> = words.par_iter().map(solve_corona_two_size).collect();
    let mut hits: Vec<(f64, String, f64)> = solved
        .iter()
        .flat_map(|s| {
            s.roots
                .iter()
                .map(move |&r| (r, format_word(&s.word.word), two_size_residual(&s.word, r).abs()))
        })
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut out: Vec<Candidate> = Vec::new();
    for (r, word, residual) in hits {
        match out.last_mut() {
            Some(last) if (r - last.radius).abs() <= DEDUP_TOL => {
                if !last.words.contains(&word) {
                    last.words.push(word);
                }
                last.residual = last.residual.max(residual);
            }
            _ => out.push(Candidate {
                radius: r,
                words: vec![word],
                residual,
                tier: Tier::Candidate,
                fixture: None,
            }),
        }
    }
    Ok(out)
}

/// Mark candidates VERIFIED when one of `packings` is a compact two-size
/// packing with that radius ratio, UNRESOLVED otherwise.
pub fn assign_tiers(candidates: &mut [Candidate], packings: &[SpherePacking]) -> Result<()> {
    let mut verified: Vec<(f64, String)> = Vec::new();
    for p in packings {
        let radii = radii_of(p);
        if radii.len() != 2 || p.dim != 2 || p.lattice.is_none() {
            continue;
        }
        if verify_compact_2d(p)?.compact {
            verified.push((radii[0] / radii[1], p.label()));
        }
    }
    for c in candidates.iter_mut() {
        match verified.iter().find(|(r, _)| (r - c.radius).abs() <= DEDUP_TOL) {
            Some((_, name)) => {
                c.tier = Tier::Verified;
                c.fixture = Some(name.clone());
            }
            None => {
                c.tier = Tier::Unresolved;
                c.fixture = None;
            }
        }
    }
    Ok(())
}

/// The full two-size pipeline against the bundled fixtures.
pub fn two_size_pipeline(max_len: usize) -> Result<Vec<Candidate>> {
    let mut candidates = enumerate_two_size_candidates(max_len)?;
    assign_tiers(&mut candidates, &crate::fixtures::two_size_packings()?)?;
    Ok(candidates)
}

/// CSV table `word,root,residual,tier`; words generating the same radius
/// are joined with `|`.
pub fn candidates_csv(candidates: &[Candidate]) -> String {
    let mut s = String::from("word,root,residual,tier\n");
    for c in candidates {
        s.push_str(&format!("{},{:.12},{:.3e},{}\n", c.words.join("|"), c.radius, c.residual, c.tier));
    }
    s
}

/// Corona equations for labels `0..n−1`, unknowns `r_0..r_{n−2}`, and
/// `r_{n−1} = 1`. The equation centered at the largest label is optional
/// and only used as a residual check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoronaSystem {
    n: usize,
    equations: Vec<CoronaWord>,
    top: Option<CoronaWord>,
}

impl CoronaSystem {
    /// `equations[j]` must be centered at `j` for `j < n − 1`.
    pub fn new(n: usize, equations: Vec<CoronaWord>, top: Option<CoronaWord>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition(format!("a corona system needs n >= 2 labels, got {n}")));
        }
        if equations.len() != n - 1 {
            return Err(Error::Domain(format!(
                "expected {} equations (one per label below the largest), got {}",
                n - 1,
                equations.len()
            )));
        }
        for (j, e) in equations.iter().enumerate().chain(top.iter().map(|t| (n - 1, t))) {
            if e.center != j {
                return Err(Error::Domain(format!("equation {e} should be centered at {j}")));
            }
            if e.max_label() >= n {
                return Err(Error::Domain(format!("equation {e} uses a label outside 0..{n}")));
            }
        }
        if !equations.iter().chain(top.iter()).any(CoronaWord::mixes_labels) {
            return Err(Error::Domain("at least one equation must mix labels".into()));
        }
        Ok(CoronaSystem { n, equations, top })
    }

    /// Build a system from a planar code set. For each label the first code
    /// whose word mixes labels is used, falling back to the first code.
    pub fn from_codes(c: &CodeSet) -> Result<Self> {
        if c.dim() != 2 {
            return Err(Error::Domain("corona systems are planar".into()));
        }
        let n = c.n();
        if n < 2 {
            return Err(Error::Precondition(format!("a corona system needs n >= 2 labels, got {n}")));
        }
        let pick = |j: Label| -> Result<Option<CoronaWord>> {
            let words: Vec<CoronaWord> = c
                .codes()
                .iter()
                .filter(|code| code.center == j)
                .map(CoronaWord::from_code)
                .collect::<Result<_>>()?;
            Ok(words
                .iter()
                .find(|w| w.mixes_labels())
                .or(words.first())
                .cloned())
        };
        let mut equations = Vec::new();
        for j in 0..n - 1 {
            equations.push(pick(j)?.ok_or_else(|| {
                Error::Precondition(format!("no code centered at label {j}; the system is underdetermined"))
            })?);
        }
        CoronaSystem::new(n, equations, pick(n - 1)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn equations(&self) -> &[CoronaWord] {
        &self.equations
    }

    pub fn top(&self) -> Option<&CoronaWord> {
        self.top.as_ref()
    }

    fn realizer(&self, x: &[f64]) -> Result<Realizer> {
        Realizer::new(x.iter().copied().chain([1.0]).collect())
    }

    /// `F_j(ρ) = angle_sum(eq_j, ρ) − 2π` for `j < n − 1`.
    pub fn residuals(&self, rho: &Realizer) -> Result<Vec<f64>> {
        self.equations.iter().map(|e| Ok(angle_sum(e, rho)? - TAU)).collect()
    }

    /// Residual of the equation centered at the largest label, if present.
    pub fn top_residual(&self, rho: &Realizer) -> Result<Option<f64>> {
        self.top.as_ref().map(|t| Ok(angle_sum(t, rho)? - TAU)).transpose()
    }

    /// Jacobian of [`Self::residuals`] with respect to `r_0..r_{n−2}`.
    pub fn jacobian(&self, rho: &Realizer) -> Result<DMatrix<f64>> {
        let m = self.n - 1;
        let mut j = DMatrix::zeros(m, m);
        for (row, e) in self.equations.iter().enumerate() {
            for (u, v) in e.pairs() {
                let g = gradient(&AngleSymbol::new(e.center, u, v), rho)?;
                for col in 0..m {
                    j[(row, col)] += g[col];
                }
            }
        }
        Ok(j)
    }
}

/// A converged Newton solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizerSolution {
    pub realizer: Realizer,
    pub iterations: usize,
    pub residual: f64,
    /// Residual of the largest-label equation, when the system has one.
    pub top_residual: Option<f64>,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton on a corona system from `start` (with `start(n−1) = 1`).
pub fn solve_realizer(system: &CoronaSystem, start: &Realizer) -> Result<RealizerSolution> {
    let n = system.n();
    if start.n() != n {
        return Err(Error::Domain(format!("start has {} values, system has {n} labels", start.n())));
    }
    if (start.values()[n - 1] - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition("the start must satisfy start(n-1) = 1".into()));
    }
    let mut x: Vec<f64> = start.values()[..n - 1].to_vec();
    let mut f = system.residuals(&system.realizer(&x)?)?;
    let mut norm = sup_norm(&f);
    let mut iterations = 0;
    while norm > ROOT_TOL {
        if iterations == MAX_NEWTON_ITERS {
            return Err(Error::Solver(format!(
                "iteration cap {MAX_NEWTON_ITERS} reached with residual {norm:e} at {x:?}"
            )));
        }
        iterations += 1;
        let jac = system.jacobian(&system.realizer(&x)?)?;
        let rhs = -DVector::from_column_slice(&f);
        let step = jac
            .lu()
            .solve(&rhs)
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Solver(format!("singular Jacobian at {x:?}")))?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            if trial.iter().all(|&v| v > 0.0) {
                let ft = system.residuals(&system.realizer(&trial)?)?;
                let nt = sup_norm(&ft);
                if nt < norm {
                    accepted = Some((trial, ft, nt));
                    break;
                }
            }
            t *= 0.5;
        }
        let (nx, nf, nn) = accepted.ok_or_else(|| {
            if x.iter().zip(step.iter()).any(|(a, s)| a + s <= 0.0) && norm > 1e-6 {
                Error::Solver(format!("out-of-domain iterate: Newton step from {x:?} leaves the positive orthant"))
            } else {
                Error::Solver(format!("divergence: damping failed to decrease residual {norm:e} at {x:?}"))
            }
        })?;
        x = nx;
        f = nf;
        norm = nn;
    }
    if x.iter().any(|&v| !(v > 0.0 && v <= 1.0 + 1e-12)) {
        return Err(Error::Solver(format!("solution {x:?} lies outside (0,1]^{}", n - 1)));
    }
    let realizer = system.realizer(&x)?;
    if !realizer.is_monotone() {
        return Err(Error::Solver(format!("solution {:?} is not monotone", realizer.values())));
    }
    let top_residual = system.top_residual(&realizer)?;
    Ok(RealizerSolution {
        realizer,
        iterations,
        residual: norm,
        top_residual,
    })
}

/// A random monotone normalized realizer: `n − 1` sorted uniform draws from
/// `[0.05, 1)` followed by 1.
pub fn random_monotone_realizer(rng: &mut impl Rng, n: usize) -> Realizer {
    let mut v: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(0.05..1.0)).collect();
    v.sort_by(f64::total_cmp);
    v.push(1.0);
    Realizer::new(v).expect("positive draws")
}

/// For planar code sets: every corona closes with angle sum at most 2π
/// under `rho` and at least 2π under `sigma`.
pub fn bootstrap_hypothesis_2d(c: &CodeSet, rho: &Realizer, sigma: &Realizer) -> Result<bool> {
    if c.dim() != 2 {
        return Err(Error::Domain("the circle-triangulation hypothesis is planar".into()));
    }
    for code in c.codes() {
        let w = CoronaWord::from_code(code)?;
        if angle_sum(&w, rho)? > TAU + BOOTSTRAP_SLACK || angle_sum(&w, sigma)? < TAU - BOOTSTRAP_SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `σ(n−2)/σ(n−1) ≤ ρ(n−2)/ρ(n−1)` for a fundamental `C` satisfying the
/// hypothesis of [`bootstrap_hypothesis_2d`].
pub fn bootstrap_conclusion_check(c: &CodeSet, rho: &Realizer, sigma: &Realizer) -> Result<bool> {
    let check = is_fundamental(c);
    if !check.fundamental {
        return Err(Error::Precondition(format!(
            "code set is not fundamental ({})",
            check.certificate.expect("failure carries a certificate")
        )));
    }
    if !bootstrap_hypothesis_2d(c, rho, sigma)? {
        return Err(Error::Precondition("the bootstrapping hypothesis does not hold".into()));
    }
    let n = c.n();
    let lhs = sigma.value(n - 2)? / sigma.value(n - 1)?;
    let rhs = rho.value(n - 2)? / rho.value(n - 1)?;
    Ok(lhs <= rhs + BOOTSTRAP_SLACK)
}

/// One randomized instance violating the bootstrapping conclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapFailure {
    pub code_set: String,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Outcome of [`bootstrap_harness`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub seed: u64,
    /// Requested number of hypothesis-passing pairs.
    pub instances: usize,
    /// Random `(ρ, σ)` pairs drawn in total.
    pub draws: usize,
    /// Pairs passing the hypothesis filter (and therefore checked); equals
    /// `instances` unless the draw budget ran out.
    pub checked: usize,
    /// Checked pairs per number of sizes `n`.
    pub checked_by_n: Vec<(usize, usize)>,
    pub failures: Vec<BootstrapFailure>,
}

/// The fundamental planar code sets used by the bootstrapping harness:
/// the fundamental subsets of the bundled two-size packings (`n = 2`) and
/// the five-size codes relabeled down to three sizes (`n = 3`).
pub fn bootstrap_code_sets() -> Result<Vec<CodeSet>> {
    let mut sets = Vec::new();
    for p in crate::fixtures::two_size_packings()? {
        sets.push(crate::packing::fundamental_subset(&p)?);
    }
    sets.push(downarrow_codeset(&crate::fixtures::load_codes("fig4-fundamental")?, 3)?);
    Ok(sets)
}

/// Upper bound on random draws per requested instance before the harness
/// gives up on reaching the requested count.
pub const BOOTSTRAP_MAX_DRAWS_PER_INSTANCE: usize = 1000;

/// Draw random monotone pairs `(ρ, σ)`, cycling through the code sets, until
/// `instances` pairs satisfy the hypothesis; check the conclusion on each of
/// them and record every violation.
///
/// Draws happen sequentially from one seeded stream and are evaluated in
/// parallel batches, so the report depends only on `seed`. If fewer than
/// `instances` pairs pass within [`BOOTSTRAP_MAX_DRAWS_PER_INSTANCE`] draws
/// per instance, the report carries the smaller `checked` count.
pub fn bootstrap_harness(code_sets: &[CodeSet], instances: usize, seed: u64) -> Result<BootstrapReport> {
    if code_sets.is_empty() {
        return Err(Error::Domain("no code sets supplied".into()));
    }
    for c in code_sets {
        let check = is_fundamental(c);
        if !check.fundamental {
            return Err(Error::Precondition(format!("code set {c} is not fundamental")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_draws = instances.saturating_mul(BOOTSTRAP_MAX_DRAWS_PER_INSTANCE);
    let mut draws = 0;
    let mut checked = 0;
    let mut by_n: std::collections::BTreeMap<usize, usize> = Default::default();
    let mut failures = Vec::new();
    while checked < instances && draws < max_draws {
        let batch = ((instances - checked) * 8).clamp(1024, max_draws - draws);
        let pairs: Vec<(usize, Realizer, Realizer)> = (draws..draws + batch)
            .map(|k| {
                let idx = k % code_sets.len();
                let n = code_sets[idx].n();
                let rho = random_monotone_realizer(&mut rng, n);
                let sigma = random_monotone_realizer(&mut rng, n);
                (idx, rho, sigma)
            })
            .collect();
        draws += batch;
        let outcomes: Vec<Option<Result<bool>>> = pairs
            .par_iter()
            .map(|(idx, rho, sigma)| {
                let c = &code_sets[*idx];
                match bootstrap_hypothesis_2d(c, rho, sigma) {
                    Ok(true) => Some(bootstrap_conclusion_check(c, rho, sigma)),
                    Ok(false) => None,
                    Err(e) => Some(Err(e)),
                }
            })
            .collect();
        for ((idx, rho, sigma), outcome) in pairs.iter().zip(outcomes) {
            if checked == instances {
                break;
            }
            let Some(result) = outcome else { continue };
            checked += 1;
            *by_n.entry(code_sets[*idx].n()).or_default() += 1;
            if !result? {
                failures.push(BootstrapFailure {
                    code_set: code_sets[*idx].to_string(),
                    rho: rho.values().to_vec(),
                    sigma: sigma.values().to_vec(),
                });
            }
        }
    }
    Ok(BootstrapReport {
        seed,
        instances,
        draws,
        checked,
        checked_by_n: by_n.into_iter().collect(),
        failures,
    })
}

/// Outcome of [`uniqueness_harness`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub seed: u64,
    pub starts: usize,
    pub successes: usize,
    /// Diagnostics of failed runs, by start index.
    pub failures: Vec<(usize, String)>,
    /// Fewer than two runs succeeded, so agreement is untested.
    pub inconclusive: bool,
    /// All successful runs agree within [`AGREEMENT_TOL`] per coordinate.
    pub agree: bool,
    /// Largest per-coordinate spread among successful runs.
    pub max_spread: f64,
    /// The first successful solution.
    pub solution: Option<Vec<f64>>,
}

/// Run [`solve_realizer`] from `starts` random normalized monotone starts
/// and check that every successful run finds the same realizer.
pub fn uniqueness_harness(c: &CodeSet, starts: usize, seed: u64) -> Result<UniquenessReport> {
    if c.n() < 2 {
        return Err(Error::Precondition(format!(
            "uniqueness needs n >= 2 sizes; the code set has n = {}",
            c.n()
        )));
    }
    let system = CoronaSystem::from_codes(c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inits: Vec<Realizer> = (0..starts).map(|_| random_monotone_realizer(&mut rng, c.n())).collect();
    let runs: Vec<Result<RealizerSolution>> = inits.par_iter().map(|s| solve_realizer(&system, s)).collect();
    let mut solutions: Vec<Vec<f64>> = Vec::new();
    let mut failures = Vec::new();
    for (k, run) in runs.into_iter().enumerate() {
        match run {
            Ok(s) => solutions.push(s.realizer.values().to_vec()),
            Err(e) => failures.push((k, e.to_string())),
        }
    }
    let max_spread = match solutions.first() {
        Some(first) => solutions
            .iter()
            .flat_map(|s| s.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    Ok(UniquenessReport {
        seed,
        starts,
        successes: solutions.len(),
        failures,
        inconclusive: solutions.len() < 2,
        agree: max_spread <= AGREEMENT_TOL,
        max_spread,
        solution: solutions.into_iter().next(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(center: Label, w: &str) -> CoronaWord {
        CoronaWord::new(center, crate::codes::parse_word(w).unwrap()).unwrap()
    }

    #[test]
    fn equilateral_corona_is_exactly_closed() {
        let rho = Realizer::new(vec![0.37, 1.0]).unwrap();
        assert!((angle_sum(&word(0, "000000"), &rho).unwrap() - TAU).abs() < 1e-12);
    }

    #[test]
    fn constant_residual_is_degenerate() {
        let roots = solve_corona_two_size(&word(0, "000000"));
        assert!(roots.degenerate);
        assert!(roots.roots.is_empty());
    }

    #[test]
    fn short_word_is_rejected() {
        assert!(CoronaWord::new(0, vec![1, 1]).is_err());
    }

    #[test]
    fn binary_word_counts_match_bracelet_numbers() {
        // Binary bracelets of length 3..6 minus the all-zero word.
        let counts: Vec<usize> = (3..=6).map(|l| canonical_binary_words(l).len()).collect();
        assert_eq!(counts, vec![3, 5, 7, 12]);
    }

    #[test]
    fn system_requires_mixing() {
        let e = CoronaSystem::new(2, vec![word(0, "000000")], None);
        assert!(e.is_err());
    }
}
