use std::f64::consts::{FRAC_PI_2, PI, TAU};

use compact_packing::angle_core::{scale, Realizer};
use compact_packing::codes::{canonical_cycle, labeled_isomorphic, parse_word, NeighborComplex, PackingCode};
use compact_packing::fixtures::{load_packing, load_triangulation};
use compact_packing::packing::{canonical_labeling, canonical_realizer, canonical_triangulations};
use compact_packing::spherical::{
    blacktriangle_lower, blacktriangle_upper, build_darts_triangulation, build_split_meridian_octahedron,
    center_in_interior, circle_positions_feasible, circle_triangulation, code_of, compare_edges, equivalences,
    geodesic_distance, heteroperturbative_violation, in_q, in_w, regular_octahedron, split_meridian_raw,
    vartriangle_lower, vartriangle_upper, vertex_scheme, witness_exists_2d, LabeledSphericalTriangulation,
};
use compact_packing::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURES: &[&str] = &[
    "hexagonal",
    "square",
    "five-size",
    "octahedral-corona",
    "two-size-0.101021",
    "two-size-0.154701",
    "two-size-0.280776",
    "two-size-0.349198",
    "two-size-0.386106",
    "two-size-0.533296",
    "two-size-0.545151",
    "two-size-0.637556",
];

fn rho(v: &[f64]) -> Realizer {
    Realizer::new(v.to_vec()).unwrap()
}

fn square(labels: Vec<usize>) -> LabeledSphericalTriangulation {
    circle_triangulation(0, &[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2], labels).unwrap()
}

fn code(center: usize, w: &str) -> PackingCode {
    PackingCode::cycle(center, parse_word(w).unwrap()).unwrap()
}

/// Every canonical triangulation of every fixture, with its realizer.
fn fixture_triangulations() -> Vec<(String, Realizer, LabeledSphericalTriangulation)> {
    let mut out = Vec::new();
    for name in FIXTURES {
        let p = load_packing(name).unwrap();
        let r = canonical_realizer(&p);
        for (id, t) in canonical_triangulations(&p).unwrap() {
            out.push((format!("{name}#{id}"), r.clone(), t));
        }
    }
    out
}

fn rotation_z(theta: f64) -> Vec<Vec<f64>> {
    vec![
        vec![theta.cos(), -theta.sin(), 0.0],
        vec![theta.sin(), theta.cos(), 0.0],
        vec![0.0, 0.0, 1.0],
    ]
}

fn rotation_x(theta: f64) -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, theta.cos(), -theta.sin()],
        vec![0.0, theta.sin(), theta.cos()],
    ]
}

#[test]
fn geodesic_distance_examples() {
    let e1 = [1.0, 0.0, 0.0];
    let e2 = [0.0, 1.0, 0.0];
    assert_eq!(geodesic_distance(&e1, &e1).unwrap(), 0.0);
    assert!((geodesic_distance(&e1, &[-1.0, 0.0, 0.0]).unwrap() - PI).abs() < 1e-15);
    assert!((geodesic_distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
    assert!(matches!(geodesic_distance(&[2.0, 0.0, 0.0], &e2), Err(Error::Domain(_))));
}

#[test]
fn vertex_scheme_examples() {
    let s = vertex_scheme(&square(vec![1; 4]));
    assert_eq!(s.cycle_word().unwrap(), vec![1, 1, 1, 1]);
    let oct = regular_octahedron(0, 0);
    let scheme = vertex_scheme(&oct);
    assert_eq!(scheme.facets().len(), 8);
    assert!(scheme.labels().iter().all(|&l| l == 0));
    // The small disc of the five-size packing.
    let p = load_packing("five-size").unwrap();
    let labels = canonical_labeling(&p).labels;
    let (_, t) = canonical_triangulations(&p)
        .unwrap()
        .into_iter()
        .find(|(id, _)| labels[p.index_of(*id).unwrap()] == 0)
        .unwrap();
    let word = vertex_scheme(&t).cycle_word().unwrap();
    assert_eq!(canonical_cycle(&word), canonical_cycle(&parse_word("43142").unwrap()));
}

#[test]
fn compare_edges_identity_and_rotation() {
    let oct = regular_octahedron(0, 0);
    let id: Vec<usize> = (0..6).collect();
    let c = compare_edges(&oct, &oct, &id).unwrap();
    assert!(c.is_isometric());
    assert_eq!(c.equal.len(), 12);
    let darts = build_darts_triangulation(6, 0.0).unwrap();
    let turned = darts.rotated(&rotation_x(0.7)).rotated(&rotation_z(1.3));
    let ids: Vec<usize> = (0..darts.vertex_count()).collect();
    assert!(compare_edges(&darts, &turned, &ids).unwrap().is_isometric());
}

#[test]
fn compare_edges_rejects_non_equivalences() {
    let oct = regular_octahedron(0, 0);
    // Swapping two antipodal partners with a neighbor breaks facets.
    let bad = vec![0, 2, 1, 3, 4, 5];
    assert!(matches!(compare_edges(&oct, &oct, &bad), Err(Error::Precondition(_))));
    assert!(matches!(compare_edges(&oct, &oct, &[0, 1, 2]), Err(Error::Precondition(_))));
}

#[test]
fn darts_rotation_only_grows_edges() {
    let p = build_darts_triangulation(6, 0.0).unwrap();
    let q = build_darts_triangulation(6, 0.05).unwrap();
    let ids: Vec<usize> = (0..p.vertex_count()).collect();
    let c = compare_edges(&p, &q, &ids).unwrap();
    assert!(!c.grow.is_empty());
    assert!(c.shrink.is_empty());
    assert!(heteroperturbative_violation(&p, &q).unwrap());
    assert!(!heteroperturbative_violation(&p, &p).unwrap());
    assert!(compare_edges(&p, &p, &ids).unwrap().is_isometric());
}

#[test]
fn darts_are_valid_triangulations() {
    for phi in [0.0, 0.05] {
        let t = build_darts_triangulation(6, phi).unwrap();
        t.validate().unwrap();
        assert!(center_in_interior(&t));
    }
    assert!(matches!(build_darts_triangulation(2, 0.0), Err(Error::Domain(_))));
    assert!(matches!(build_darts_triangulation(6, PI / 6.0), Err(Error::Domain(_))));
}

#[test]
fn circle_perturbations_are_two_sided() {
    let p = circle_triangulation(0, &[0.0, 1.5, 3.0, 4.7], vec![1, 0, 1, 1]).unwrap();
    let q = circle_triangulation(0, &[0.0, 1.2, 3.3, 4.6], vec![1, 0, 1, 1]).unwrap();
    assert!(!heteroperturbative_violation(&p, &q).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for _ in 0..200 {
        let m = rng.gen_range(3..9);
        let labels: Vec<usize> = (0..m).map(|_| rng.gen_range(0..3)).collect();
        let angles = |rng: &mut ChaCha8Rng| {
            let mut a: Vec<f64> = (0..m).map(|k| TAU * k as f64 / m as f64 + rng.gen_range(-0.3..0.3) / m as f64).collect();
            a[0] = 0.0;
            a
        };
        let p = circle_triangulation(0, &angles(&mut rng), labels.clone()).unwrap();
        let q = circle_triangulation(0, &angles(&mut rng), labels).unwrap();
        for m in equivalences(&p, &q) {
            let c = compare_edges(&p, &q, &m).unwrap();
            assert!(c.is_isometric() || c.is_two_sided());
        }
        assert!(!heteroperturbative_violation(&p, &q).unwrap());
    }
}

#[test]
fn violation_needs_equivalent_triangulations() {
    let oct = regular_octahedron(0, 0);
    let darts = build_darts_triangulation(6, 0.0).unwrap();
    assert!(matches!(heteroperturbative_violation(&oct, &darts), Err(Error::Precondition(_))));
}

#[test]
fn center_in_interior_examples() {
    assert!(center_in_interior(&regular_octahedron(0, 0)));
    assert!(center_in_interior(&square(vec![1; 4])));
    let cap = LabeledSphericalTriangulation::new_unchecked(
        3,
        0,
        vec![vec![0.0, 0.0, 1.0], vec![0.6, 0.0, 0.8], vec![0.0, 0.6, 0.8], vec![-0.6, -0.1, 0.7937253933193772]],
        vec![0; 4],
        vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 1, 3], vec![1, 2, 3]],
    );
    assert!(!center_in_interior(&cap));
}

/// Jitter every vertex of a valid triangulation and keep the result when it
/// is still valid.
fn jittered(t: &LabeledSphericalTriangulation, rng: &mut ChaCha8Rng, amount: f64) -> Option<LabeledSphericalTriangulation> {
    let coords = t
        .coords()
        .iter()
        .map(|c| {
            let v: Vec<f64> = c.iter().map(|x| x + rng.gen_range(-amount..amount)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / n).collect()
        })
        .collect();
    LabeledSphericalTriangulation::new(t.dim(), t.center_label(), coords, t.labels().to_vec(), t.facets().to_vec()).ok()
}

#[test]
fn center_is_interior_for_fixture_and_random_triangulations() {
    let mut all: Vec<LabeledSphericalTriangulation> = fixture_triangulations().into_iter().map(|(_, _, t)| t).collect();
    all.push(load_triangulation("octahedron").unwrap());
    all.push(build_darts_triangulation(5, 0.1).unwrap());
    all.push(build_split_meridian_octahedron(0.1).unwrap());
    let bases = all.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut random = 0;
    while random < 100 {
        let base = &bases[rng.gen_range(0..bases.len())];
        if let Some(t) = jittered(base, &mut rng, 0.05) {
            all.push(t);
            random += 1;
        }
    }
    for t in &all {
        assert!(center_in_interior(t), "{t:?}");
    }
}

#[test]
fn in_q_examples() {
    let t = square(vec![1; 4]);
    let exact = rho(&[2f64.sqrt() - 1.0, 1.0]);
    assert!(in_q(&t, &exact).unwrap().member);
    let off = in_q(&t, &rho(&[0.5, 1.0])).unwrap();
    assert!(!off.member);
    assert!(off.worst.is_some());
    assert!(matches!(in_q(&t, &rho(&[1.0, 0.5])), Err(Error::Precondition(_))));
}

#[test]
fn q_membership_of_every_fixture_triangulation() {
    for (name, r, t) in fixture_triangulations() {
        let report = in_q(&t, &r).unwrap();
        assert!(report.member, "{name}: {:?}", report.worst);
        let c = code_of(&t);
        assert!(blacktriangle_lower(&r, &c, &t).unwrap(), "{name}");
        assert!(vartriangle_lower(&r, &c, &t).unwrap(), "{name}");
        assert!(vartriangle_upper(&t, &c, &r).unwrap(), "{name}");
    }
}

#[test]
fn w_membership() {
    assert!(in_w(&regular_octahedron(0, 0)).unwrap().member);
    assert!(in_w(&load_triangulation("octahedron").unwrap()).unwrap().member);
    let split = build_split_meridian_octahedron(0.1).unwrap();
    split.validate().unwrap();
    let report = in_w(&split).unwrap();
    assert!(!report.member);
    assert!(report.diagnostic.is_some());
    for (name, _, t) in fixture_triangulations().into_iter().filter(|(_, _, t)| t.dim() == 2) {
        assert!(in_w(&t).unwrap().member, "{name}");
    }
}

#[test]
fn split_meridian_parameter_checks() {
    assert!(build_split_meridian_octahedron(0.0).is_err());
    assert!(build_split_meridian_octahedron(PI / 8.0).is_err());
    assert!(split_meridian_raw(1e-10).validate().is_err());
}

#[test]
fn relation_examples_on_fixtures() {
    let p = load_packing("five-size").unwrap();
    let r = canonical_realizer(&p);
    for (_, t) in canonical_triangulations(&p).unwrap() {
        let c = code_of(&t);
        assert!(blacktriangle_lower(&r, &c, &t).unwrap());
        // Uniform scaling leaves every realized angle unchanged.
        assert!(blacktriangle_lower(&scale(&r, 0.5).unwrap(), &c, &t).unwrap());
        // Growing the center radius shrinks every realized angle.
        let mut grown = r.values().to_vec();
        grown[t.center_label()] *= 1.5;
        assert!(blacktriangle_lower(&rho(&grown), &c, &t).unwrap());
        assert!(vartriangle_lower(&r, &c, &t).unwrap() && vartriangle_upper(&t, &c, &r).unwrap());
        // Permuting the code's labels breaks the equivalence clause.
        let wrong = PackingCode::new(c.center, c.neighbors.relabel(|l| 4 - l));
        if labeled_isomorphic(&wrong.neighbors, &c.neighbors).is_none() {
            assert!(!blacktriangle_lower(&r, &wrong, &t).unwrap());
            assert!(!vartriangle_upper(&t, &wrong, &r).unwrap());
        }
    }
}

#[test]
fn lengthened_edge_breaks_the_upper_edge_relation() {
    let r = rho(&[2f64.sqrt() - 1.0, 1.0]);
    let t = circle_triangulation(0, &[0.0, FRAC_PI_2 + 1e-3, PI, 3.0 * FRAC_PI_2], vec![1; 4]).unwrap();
    let c = code(0, "1111");
    assert!(!vartriangle_upper(&t, &c, &r).unwrap());
    assert!(!blacktriangle_lower(&r, &c, &t).unwrap());
    assert!(vartriangle_upper(&square(vec![1; 4]), &c, &r).unwrap());
}

#[test]
fn strong_relation_implies_edge_relation() {
    let tris = fixture_triangulations();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut strong = 0;
    for _ in 0..100 {
        let (_, base, t) = &tris[rng.gen_range(0..tris.len())];
        let values: Vec<f64> = base.values().iter().map(|v| v * rng.gen_range(0.7..1.3)).collect();
        let r = rho(&values);
        let c = code_of(t);
        if blacktriangle_lower(&r, &c, t).unwrap() {
            strong += 1;
            assert!(vartriangle_lower(&r, &c, t).unwrap());
        }
        if blacktriangle_upper(t, &c, &r).unwrap() {
            assert!(vartriangle_upper(t, &c, &r).unwrap());
        }
    }
    assert!(strong > 0);
}

#[test]
fn witness_examples() {
    let sq = 2f64.sqrt() - 1.0;
    let c = code(0, "1111");
    assert!(witness_exists_2d(&c, &rho(&[sq, 1.0]), &rho(&[sq, 1.0])).unwrap());
    // A larger center shrinks the realized angle: at ρ(0) = 0.9 each lower
    // bound is 1.10852… < π/2, so the square arcs still qualify.
    assert!(witness_exists_2d(&c, &rho(&[0.9, 1.0]), &rho(&[sq, 1.0])).unwrap());
    // At ρ(0) = 0.3 each lower bound is 1.75527… > π/2 and four of them
    // exceed 2π.
    assert!(!witness_exists_2d(&c, &rho(&[0.3, 1.0]), &rho(&[sq, 1.0])).unwrap());
    // Each σ-edge below 2π/3 makes the three upper bounds sum below 2π.
    let c3 = code(0, "111");
    let tri = 2.0 / 3f64.sqrt() - 1.0;
    assert!(witness_exists_2d(&c3, &rho(&[tri, 1.0]), &rho(&[tri, 1.0])).unwrap());
    assert!(!witness_exists_2d(&c3, &rho(&[tri, 1.0]), &rho(&[tri + 0.01, 1.0])).unwrap());
}

#[test]
fn witness_is_monotone_in_the_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let codes = [code(0, "1111"), code(0, "0111"), code(1, "010101"), code(0, "11212")];
    let mut feasible = 0;
    for _ in 0..300 {
        let c = &codes[rng.gen_range(0..codes.len())];
        let lo: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
        let hi: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
        let (r, s) = (rho(&lo), rho(&hi));
        if witness_exists_2d(c, &r, &s).unwrap() {
            feasible += 1;
            // Shrinking ρ-angles (grow ρ's center) and growing σ-angles
            // (shrink σ's center) keep feasibility.
            let mut lo2 = lo.clone();
            lo2[c.center] *= 1.2;
            let mut hi2 = hi.clone();
            hi2[c.center] *= 0.8;
            assert!(witness_exists_2d(c, &rho(&lo2), &rho(&hi2)).unwrap());
        }
    }
    assert!(feasible > 0);
}

#[test]
fn square_edge_lower_bounds_are_tight() {
    let m = 4;
    let mut lower = vec![vec![FRAC_PI_2; m]; m];
    let upper = vec![FRAC_PI_2; m];
    assert!(circle_positions_feasible(&lower, &upper));
    for i in 0..m {
        let j = (i + 1) % m;
        let saved = lower[i][j];
        lower[i][j] += 1e-3;
        lower[j][i] += 1e-3;
        assert!(!circle_positions_feasible(&lower, &upper), "edge {i}{j}");
        lower[i][j] = saved;
        lower[j][i] = saved;
    }
    // Opposite vertices sit at distance π, far above their bound.
    lower[0][2] += 1e-3;
    lower[2][0] += 1e-3;
    assert!(circle_positions_feasible(&lower, &upper));
}

#[test]
fn witness_rejects_non_cycles() {
    let oct = PackingCode::new(0, vertex_scheme(&regular_octahedron(0, 1)));
    assert!(matches!(
        witness_exists_2d(&oct, &rho(&[0.5, 1.0]), &rho(&[0.5, 1.0])),
        Err(Error::Domain(_))
    ));
}

#[test]
fn triangulation_json_round_trip() {
    let t = load_triangulation("octahedron").unwrap();
    assert_eq!(LabeledSphericalTriangulation::from_json(&t.to_json()).unwrap(), t);
    // The loader re-normalizes, which may move coordinates by an ulp.
    let darts = build_darts_triangulation(4, 0.1).unwrap();
    let back = LabeledSphericalTriangulation::from_json(&darts.to_json()).unwrap();
    assert_eq!(back.labels(), darts.labels());
    assert_eq!(back.facets(), darts.facets());
    for (a, b) in back.coords().iter().flatten().zip(darts.coords().iter().flatten()) {
        assert!((a - b).abs() <= 1e-15);
    }
    let scheme: NeighborComplex = vertex_scheme(&t);
    assert!(labeled_isomorphic(&scheme, &vertex_scheme(&regular_octahedron(0, 1))).is_some());
}
