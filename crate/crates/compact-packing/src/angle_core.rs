//! Angle symbols and their realization.
//!
//! For three mutually tangent discs (or spheres) with radii `a`, `b`, `c`, the
//! angle at the center of the `c` disc subtended by the other two centers is
//!
//! ```text
//! c_b^a = arccos(((c+a)² + (c+b)² − (a+b)²) / (2(c+a)(c+b)))
//! ```
//!
//! A symbol is purely formal (three labels); a [`Realizer`] turns it into a
//! number by substituting a radius for each label.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Labels are the integers `0..n`; larger labels denote larger sizes.
pub type Label = usize;

/// The label alphabet `{0, …, n−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelSet {
    n: usize,
}

impl LabelSet {
    /// A label set with `n ≥ 2` labels.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("a label set needs n >= 2, got {n}")));
        }
        Ok(LabelSet { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The distinguished label of the largest size class.
    pub fn largest(&self) -> Label {
        self.n - 1
    }

    pub fn contains(&self, l: Label) -> bool {
        l < self.n
    }
}

/// The formal angle symbol `vertex_{flank_b}^{flank_a}`.
///
/// Flanks are stored sorted, so two symbols that differ only by swapping
/// flanks compare equal and realize through the identical float computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AngleSymbol {
    vertex: Label,
    flank_a: Label,
    flank_b: Label,
}

impl AngleSymbol {
    pub fn new(vertex: Label, flank_a: Label, flank_b: Label) -> Self {
        let (flank_a, flank_b) = if flank_a <= flank_b {
            (flank_a, flank_b)
        } else {
            (flank_b, flank_a)
        };
        AngleSymbol {
            vertex,
            flank_a,
            flank_b,
        }
    }

    pub fn vertex(&self) -> Label {
        self.vertex
    }

    pub fn flanks(&self) -> (Label, Label) {
        (self.flank_a, self.flank_b)
    }

    /// Labels occurring in the symbol, deduplicated and sorted.
    pub fn labels(&self) -> Vec<Label> {
        let mut v = vec![self.vertex, self.flank_a, self.flank_b];
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn max_label(&self) -> Label {
        self.vertex.max(self.flank_b)
    }
}

impl fmt::Display for AngleSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}^{}", self.vertex, self.flank_b, self.flank_a)
    }
}

/// An assignment of a positive radius to every label `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realizer {
    values: Vec<f64>,
}

impl Realizer {
    /// Build a realizer from per-label radii. Every value must be finite and
    /// strictly positive. A single-label realizer is allowed so that
    /// single-size packings have a canonical realizer.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("a realizer needs at least one label".into()));
        }
        for (l, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "realizer value for label {l} must be positive, got {v}"
                )));
            }
        }
        Ok(Realizer { values })
    }

    /// Number of labels covered.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, l: Label) -> Result<f64> {
        self.values
            .get(l)
            .copied()
            .ok_or_else(|| Error::Domain(format!("realizer has no value for label {l}")))
    }

    pub fn label_set(&self) -> Result<LabelSet> {
        LabelSet::new(self.n())
    }

    /// The largest label maps to 1 (within `tol`).
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.values[self.n() - 1] - 1.0).abs() <= tol
    }

    /// `i < j ⇒ value(i) ≤ value(j)`.
    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// `i < j ⇒ value(i) < value(j)`.
    pub fn is_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    /// Divide by the largest label's value.
    pub fn normalized(&self) -> Realizer {
        let top = self.values[self.n() - 1];
        Realizer {
            values: self.values.iter().map(|v| v / top).collect(),
        }
    }
}

impl fmt::Display for Realizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| format!("{v}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// The angle at a disc of radius `c` between tangent discs of radii `a` and
/// `b`, for raw radii. The arccos argument is clamped to `[−1, 1]`.
pub fn angle_from_radii(c: f64, a: f64, b: f64) -> f64 {
    let ca = c + a;
    let cb = c + b;
    let ab = a + b;
    let cos = (ca * ca + cb * cb - ab * ab) / (2.0 * ca * cb);
    cos.clamp(-1.0, 1.0).acos()
}

fn radii_of(symbol: &AngleSymbol, rho: &Realizer) -> Result<(f64, f64, f64)> {
    Ok((
        rho.value(symbol.vertex)?,
        rho.value(symbol.flank_a)?,
        rho.value(symbol.flank_b)?,
    ))
}

/// Realize `symbol` under `rho`. The result lies in `(0, π)`.
pub fn realize(symbol: &AngleSymbol, rho: &Realizer) -> Result<f64> {
    let (c, a, b) = radii_of(symbol, rho)?;
    Ok(angle_from_radii(c, a, b))
}

// Partial derivative with respect to flank `a` when `a`, `b`, `c` are distinct.
fn d_flank(c: f64, a: f64, b: f64) -> f64 {
    (b * c).sqrt() / ((c + a) * a.sqrt() * (a + b + c).sqrt())
}

// Partial derivative with respect to the vertex `c` when `a`, `b`, `c` are distinct.
fn d_vertex(c: f64, a: f64, b: f64) -> f64 {
    -(a + b + 2.0 * c) * (a * b).sqrt()
        / ((c * c + a * b + a * c + b * c) * c.sqrt() * (a + b + c).sqrt())
}

/// Partial derivatives of the realized symbol with respect to every label's
/// radius, as a dense vector indexed by label.
///
/// The closed form is chosen by which *labels* of the symbol coincide, never
/// by comparing radii: when a label occurs several times in the symbol its
/// radius moves all occurrences at once.
pub fn gradient(symbol: &AngleSymbol, rho: &Realizer) -> Result<Vec<f64>> {
    let (c, a, b) = radii_of(symbol, rho)?;
    let mut g = vec![0.0; rho.n()];
    let (lc, la, lb) = (symbol.vertex, symbol.flank_a, symbol.flank_b);
    if la == lb && lb == lc {
        // c_c^c is the constant π/3.
        return Ok(g);
    }
    if la == lb {
        // c_a^a
        g[la] = 2.0 * c.sqrt() / ((c + a) * (2.0 * a + c).sqrt());
        g[lc] = -2.0 * a / ((c + a) * c.sqrt() * (2.0 * a + c).sqrt());
        return Ok(g);
    }
    if la == lc || lb == lc {
        // c_c^x: one flank shares the vertex label.
        let (lx, x) = if la == lc { (lb, b) } else { (la, a) };
        let root = (x * x + 2.0 * x * c).sqrt();
        g[lx] = c / ((c + x) * root);
        g[lc] = -x / ((c + x) * root);
        return Ok(g);
    }
    g[la] = d_flank(c, a, b);
    g[lb] = d_flank(c, b, a);
    g[lc] = d_vertex(c, a, b);
    Ok(g)
}

/// Pointwise multiplication `t·ρ`.
pub fn scale(rho: &Realizer, t: f64) -> Result<Realizer> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("scale factor must be positive, got {t}")));
    }
    Realizer::new(rho.values.iter().map(|v| v * t).collect())
}

/// The realizer `ρ + t·ν`. `nu` is indexed by label; missing entries count as 0.
pub fn perturb(rho: &Realizer, nu: &[f64], t: f64) -> Result<Realizer> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("perturbation time must be nonnegative, got {t}")));
    }
    if let Some((l, v)) = nu.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Domain(format!(
            "perturbation direction must be nonnegative, label {l} has {v}"
        )));
    }
    if nu.len() > rho.n() {
        return Err(Error::Domain(format!(
            "perturbation direction has {} labels, realizer only {}",
            nu.len(),
            rho.n()
        )));
    }
    let values = rho
        .values
        .iter()
        .enumerate()
        .map(|(l, v)| v + t * nu.get(l).copied().unwrap_or(0.0))
        .collect();
    Realizer::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn rho(v: &[f64]) -> Realizer {
        Realizer::new(v.to_vec()).unwrap()
    }

    #[test]
    fn equilateral_is_third_of_pi() {
        for r in [0.01, 1.0, 37.0] {
            let s = AngleSymbol::new(0, 0, 0);
            assert!((realize(&s, &rho(&[r])).unwrap() - FRAC_PI_3).abs() < 1e-15);
        }
    }

    #[test]
    fn square_hole_gives_right_angle() {
        let s = AngleSymbol::new(0, 1, 1);
        let v = realize(&s, &rho(&[2f64.sqrt() - 1.0, 1.0])).unwrap();
        assert!((v - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn small_flanks_shrink_angle_to_zero() {
        let s = AngleSymbol::new(1, 0, 0);
        let vals: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&t| realize(&s, &rho(&[t, 1.0])).unwrap())
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2] && vals[2] > 0.0);
        assert!(vals[2] < 0.1);
    }

    #[test]
    fn flank_order_is_irrelevant() {
        assert_eq!(AngleSymbol::new(2, 0, 1), AngleSymbol::new(2, 1, 0));
    }

    #[test]
    fn distinct_unit_gradient() {
        let s = AngleSymbol::new(2, 0, 1);
        let g = gradient(&s, &rho(&[1.0, 1.0, 1.0, 0.5])).unwrap();
        assert!((g[0] - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!((g[0] - 0.288675).abs() < 1e-6);
        assert_eq!(g[3], 0.0);
    }

    #[test]
    fn all_equal_gradient_vanishes() {
        let g = gradient(&AngleSymbol::new(1, 1, 1), &rho(&[0.2, 0.7])).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn missing_label_is_domain_error() {
        let e = realize(&AngleSymbol::new(3, 0, 0), &rho(&[1.0, 1.0]));
        assert!(matches!(e, Err(Error::Domain(_))));
        assert!(Realizer::new(vec![1.0, 0.0]).is_err());
        assert!(Realizer::new(vec![-1.0]).is_err());
    }

    #[test]
    fn scale_rejects_nonpositive() {
        assert!(scale(&rho(&[1.0]), 0.0).is_err());
        assert!(scale(&rho(&[1.0]), -2.0).is_err());
        assert_eq!(scale(&rho(&[0.3, 1.0]), 1.0).unwrap(), rho(&[0.3, 1.0]));
    }

    #[test]
    fn perturb_adds_direction() {
        let p = perturb(&rho(&[0.5, 1.0]), &[1.0], 0.25).unwrap();
        assert_eq!(p.values(), &[0.75, 1.0]);
        assert!(perturb(&rho(&[0.5, 1.0]), &[-1.0], 1.0).is_err());
    }
}
