use std::f64::consts::PI;

use compact_packing::angle_core::{gradient, perturb, realize, scale, AngleSymbol, Realizer};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rho(v: &[f64]) -> Realizer {
    Realizer::new(v.to_vec()).unwrap()
}

/// Symbols over labels 0..3 covering every coincidence pattern.
fn symbol_shapes() -> Vec<AngleSymbol> {
    vec![
        AngleSymbol::new(0, 1, 2),
        AngleSymbol::new(0, 1, 1),
        AngleSymbol::new(0, 0, 1),
        AngleSymbol::new(1, 0, 1),
        AngleSymbol::new(0, 0, 0),
        AngleSymbol::new(2, 0, 1),
    ]
}

/// Central finite difference of `realize` in the radius of `label`.
fn finite_difference(sym: &AngleSymbol, values: &[f64], label: usize) -> f64 {
    let h = 1e-6 * values[label];
    let mut plus = values.to_vec();
    let mut minus = values.to_vec();
    plus[label] += h;
    minus[label] -= h;
    (realize(sym, &rho(&plus)).unwrap() - realize(sym, &rho(&minus)).unwrap()) / (2.0 * h)
}

#[test]
fn gradient_matches_finite_differences_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..1000 {
        let values: Vec<f64> = (0..4).map(|_| rng.gen_range(0.05..1.0)).collect();
        let r = rho(&values);
        for sym in symbol_shapes() {
            let g = gradient(&sym, &r).unwrap();
            for label in 0..4 {
                let fd = finite_difference(&sym, &values, label);
                if sym.labels().contains(&label) && g[label] != 0.0 {
                    let rel = (fd - g[label]).abs() / g[label].abs();
                    assert!(rel < 1e-5, "{sym} label {label} at {values:?}: {} vs {fd}", g[label]);
                } else {
                    assert_eq!(g[label], 0.0, "{sym} label {label}");
                    assert!(fd.abs() < 1e-7, "{sym} label {label}: fd {fd}");
                }
            }
        }
    }
}

#[test]
fn distinct_unit_radii_gradient_value() {
    let g = gradient(&AngleSymbol::new(2, 0, 1), &rho(&[1.0, 1.0, 1.0])).unwrap();
    assert!((g[0] - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
    assert!((g[0] - 0.288675).abs() < 1e-6);
    assert!((finite_difference(&AngleSymbol::new(2, 0, 1), &[1.0, 1.0, 1.0], 0) - g[0]).abs() < 1e-6);
}

#[test]
fn realized_angles_stay_strictly_inside_zero_pi() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10_000 {
        let values: Vec<f64> = (0..3).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
        let a = realize(&AngleSymbol::new(0, 1, 2), &rho(&values)).unwrap();
        assert!(a > 0.0 && a < PI, "{values:?}: {a}");
    }
}

#[test]
fn scale_invariance_on_random_symbols() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..1000 {
        let values: Vec<f64> = (0..5).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sym = AngleSymbol::new(rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5));
        let r = rho(&values);
        let base = realize(&sym, &r).unwrap();
        for t in [1e-2, 1.0, 1e2] {
            let scaled = realize(&sym, &scale(&r, t).unwrap()).unwrap();
            assert!((scaled - base).abs() <= 1e-12, "{sym} t={t}");
        }
    }
}

#[test]
fn scale_identity_and_ratios() {
    let r = rho(&[0.2, 0.5, 1.0]);
    assert_eq!(scale(&r, 1.0).unwrap(), r);
    let s = scale(&r, 3.5).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((s.values()[i] / s.values()[j] - r.values()[i] / r.values()[j]).abs() < 1e-15);
        }
    }
    assert!(s.is_monotone());
    assert!(!s.is_normalized(1e-12));
}

#[test]
fn flank_growth_is_strictly_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut violations = 0;
    for _ in 0..1000 {
        let values: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        let vertex = rng.gen_range(0..3);
        let flank = (vertex + rng.gen_range(1..3)) % 3;
        let other = 3 - vertex - flank;
        let sym = AngleSymbol::new(vertex, flank, other);
        let mut nu = vec![0.0; 3];
        nu[flank] = rng.gen_range(0.1..1.0);
        if rng.gen_bool(0.5) {
            nu[other] = rng.gen_range(0.0..1.0);
        }
        let r = rho(&values);
        let grid: Vec<f64> = (0..20)
            .map(|k| realize(&sym, &perturb(&r, &nu, k as f64 / 19.0).unwrap()).unwrap())
            .collect();
        violations += grid.windows(2).filter(|w| w[1] - w[0] <= 1e-12).count();
    }
    assert_eq!(violations, 0);
}

#[test]
fn perturbation_off_the_symbol_is_constant() {
    let r = rho(&[0.3, 0.6, 0.8, 1.0]);
    let sym = AngleSymbol::new(0, 1, 2);
    let base = realize(&sym, &r).unwrap();
    for k in 0..=20 {
        let t = k as f64 * 0.5;
        assert_eq!(realize(&sym, &perturb(&r, &[0.0, 0.0, 0.0, 1.0], t).unwrap()).unwrap(), base);
        assert_eq!(realize(&sym, &perturb(&r, &[0.0; 4], t).unwrap()).unwrap(), base);
    }
    let unit = rho(&[1.0, 1.0, 1.0]);
    let before = realize(&sym, &unit).unwrap();
    let after = realize(&sym, &perturb(&unit, &[0.0, 1.0, 0.0], 1.0).unwrap()).unwrap();
    assert!(before < after);
}

#[test]
fn negative_perturbation_is_a_domain_error() {
    assert!(perturb(&rho(&[0.5, 1.0]), &[-1.0, 0.0], 1.0).is_err());
}

proptest! {
    #[test]
    fn triangle_angles_sum_to_pi(a in 1e-3f64..1e3, b in 1e-3f64..1e3, c in 1e-3f64..1e3) {
        let r = rho(&[a, b, c]);
        let sum = realize(&AngleSymbol::new(2, 0, 1), &r).unwrap()
            + realize(&AngleSymbol::new(0, 1, 2), &r).unwrap()
            + realize(&AngleSymbol::new(1, 2, 0), &r).unwrap();
        prop_assert!((sum - PI).abs() < 1e-10);
    }

    #[test]
    fn flanks_commute_exactly(a in 0.01f64..10.0, b in 0.01f64..10.0, c in 0.01f64..10.0) {
        let r = rho(&[a, b, c]);
        prop_assert_eq!(
            realize(&AngleSymbol::new(2, 0, 1), &r).unwrap(),
            realize(&AngleSymbol::new(2, 1, 0), &r).unwrap()
        );
    }

    #[test]
    fn growing_the_vertex_shrinks_the_angle(a in 0.05f64..1.0, b in 0.05f64..1.0, c in 0.05f64..1.0, t in 0.01f64..1.0) {
        let r = rho(&[a, b, c]);
        let sym = AngleSymbol::new(2, 0, 1);
        let grown = perturb(&r, &[0.0, 0.0, 1.0], t).unwrap();
        prop_assert!(realize(&sym, &grown).unwrap() < realize(&sym, &r).unwrap());
    }

    #[test]
    fn gradient_is_scale_covariant(a in 0.05f64..1.0, b in 0.05f64..1.0, c in 0.05f64..1.0, t in 0.1f64..10.0) {
        // Angles are homogeneous of degree 0, so gradients scale by 1/t and
        // the Euler identity Σ r_i ∂_i = 0 holds.
        let r = rho(&[a, b, c]);
        let sym = AngleSymbol::new(2, 0, 1);
        let g = gradient(&sym, &r).unwrap();
        let gt = gradient(&sym, &scale(&r, t).unwrap()).unwrap();
        for i in 0..3 {
            prop_assert!((gt[i] * t - g[i]).abs() <= 1e-9 * g[i].abs().max(1.0));
        }
        let euler: f64 = (0..3).map(|i| g[i] * r.values()[i]).sum();
        prop_assert!(euler.abs() < 1e-9);
    }
}
