use hiertree::hier::{random_element, random_isometry, Hierarchomorphism};
use hiertree::hilbert::{adapted_contexts, transport_matrix, GramContext};
use hiertree::measure::*;
use hiertree::tree::{Cut, Length, TreeFamily, VertexAddress};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn a(s: &str) -> VertexAddress {
    s.parse().unwrap()
}

fn t2() -> TreeFamily {
    TreeFamily::bruhat_tits(2).unwrap()
}

fn close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0)
}

#[test]
fn series_matches_gram_on_depth_cuts() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for f in [t2(), TreeFamily::bruhat_tits(3).unwrap()] {
        for _ in 0..10 {
            let m = random_charge(&f, &mut rng, 3, 8);
            for depth in m.cut().max_depth()..=4 {
                let c = Cut::depth_cut(&f, depth);
                let ctx = cut_context(&f, 0.7, &c).unwrap();
                let gram = norm_gram(&ctx, &m.push_to_cut(&f, &c).unwrap()).unwrap();
                assert!(close(gram, norm_series(&f, 0.7, &m, depth).unwrap(), 1e-10));
            }
        }
    }
}

/// Refining the elements of `target` one at a time, in a random order, adds
/// `z_u` at every step.
#[test]
fn refinement_order_does_not_matter() {
    let f = t2();
    let lambda = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let m = random_charge(&f, &mut rng, 4, 10);
        let target = m.cut().clone();
        let want = norm_gram(&cut_context(&f, lambda, &target).unwrap(), &m).unwrap();
        for _ in 0..3 {
            let mut c = Cut::root();
            let mut total = m.total().powi(2);
            while c != target {
                let mut open: Vec<VertexAddress> =
                    c.boundary().iter().filter(|v| target.interior().contains(*v)).cloned().collect();
                open.shuffle(&mut rng);
                let u = open[0].clone();
                total += z_value(&f, lambda, &m, &u);
                c = c.refine(&f, &u).unwrap();
                let step = norm_gram(&cut_context(&f, lambda, &c).unwrap(), &m.push_to_cut(&f, &c).unwrap()).unwrap();
                assert!(close(total, step, 1e-10));
            }
            assert!(close(total, want, 1e-10));
        }
    }
}

#[test]
fn darboux_sums_match_the_f_form_and_increase() {
    let f = t2();
    let lambda = 0.75;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let m1 = random_charge(&f, &mut rng, 3, 6);
        let m2 = random_charge(&f, &mut rng, 3, 6);
        let mut c = Cut::common_refinement(m1.cut(), m2.cut());
        let pos1 = CylinderMeasure::new(m1.cut().clone(), m1.values().iter().map(|x| x.abs()).collect()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..6 {
            let ctx = cut_context(&f, lambda, &c).unwrap();
            let form = bilinear_gram(&ctx, &m1.push_to_cut(&f, &c).unwrap(), &m2.push_to_cut(&f, &c).unwrap()).unwrap();
            let d = darboux_sum(&f, lambda, &m1, &m2, &c).unwrap();
            assert!(close(d, form, 1e-10));
            let lower = darboux_sum(&f, lambda, &pos1, &pos1, &c).unwrap();
            assert!(lower >= prev * (1.0 - 1e-12));
            prev = lower;
            let u = c.boundary()[rng.gen_range(0..c.len())].clone();
            c = c.refine(&f, &u).unwrap();
        }
    }
}

#[test]
fn uniform_and_balanced_limits() {
    let f = t2();
    let u = CylinderMeasure::uniform();
    assert!((norm_series(&f, 0.8, &u, 1).unwrap() - 1.1875).abs() < 1e-14);
    assert!((norm_limit(&f, 0.8, &u).unwrap() - 13.0 / 7.0).abs() < 1e-9);
    assert!((norm_series(&f, 0.8, &u, 200).unwrap() - 13.0 / 7.0).abs() < 1e-9);
    let bal = CylinderMeasure::from_pairs(&f, &[("0", 1.0), ("1", -1.0), ("2", 0.0)]).unwrap();
    assert!((norm_limit(&f, 0.8, &bal).unwrap() - 36.0 / 7.0).abs() < 1e-9);
    let f3 = TreeFamily::bruhat_tits(3).unwrap();
    for lambda in [0.6, 0.7, 0.9] {
        let want = uniform_norm_closed_form(3, lambda).unwrap();
        assert!(close(norm_limit(&f3, lambda, &u).unwrap(), want, 1e-9));
    }
}

#[test]
fn partial_norms_increase_towards_the_limit() {
    let f = t2();
    let limit = 13.0 / 7.0;
    let mut prev = 0.0;
    for k in 0..=20 {
        let s = norm_series(&f, 0.8, &CylinderMeasure::uniform(), k).unwrap();
        assert!(s > prev && s < limit);
        let bound: f64 = (0..=k).map(|j| (0.64f64 * 2.0).powi(-(j as i32))).sum();
        assert!(s <= bound);
        prev = s;
    }
}

#[test]
fn divergent_lambda_is_reported() {
    let f = t2();
    assert!(norm_limit(&f, 0.6, &CylinderMeasure::uniform()).is_err());
    assert!(uniform_norm_closed_form(2, 0.6).is_err());
    // The lower bound grows with the depth of the cut.
    let bounds: Vec<f64> = [5, 10, 15]
        .iter()
        .map(|&n| {
            let c = Cut::depth_cut(&f, n);
            norm_lower_bound(&CylinderMeasure::uniform().push_to_cut(&f, &c).unwrap(), 0.3, n, 1.0)
        })
        .collect();
    assert!(bounds[0] < bounds[1] && bounds[1] < bounds[2]);
}

#[test]
fn lower_bound_sits_below_the_limit_norm() {
    let f = t2();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let c = Cut::depth_cut(&f, 4);
    for _ in 0..20 {
        let m = random_charge(&f, &mut rng, 4, 10).push_to_cut(&f, &c).unwrap();
        for lambda in [0.75, 0.85] {
            assert!(norm_lower_bound(&m, lambda, 4, 1.0) <= norm_limit(&f, lambda, &m).unwrap());
        }
    }
}

#[test]
fn sigma_estimates() {
    let u = CylinderMeasure::uniform();
    let cases = [
        (t2(), 0.5f64.sqrt()),
        (TreeFamily::bruhat_tits(3).unwrap(), 1.0 / 3.0f64.sqrt()),
        (TreeFamily::regular(3, 2, Length::from_integer(2)).unwrap(), 0.5f64.powf(0.25)),
    ];
    for (f, want) in cases {
        let e = estimate_sigma(&f, &u, SIGMA_DEFAULT_DEPTH, 1e-4).unwrap();
        assert!((e.sigma - want).abs() < 0.02, "{} vs {want}", e.sigma);
        assert!(e.lo <= e.sigma && e.sigma <= e.hi);
    }
}

#[test]
fn restriction_to_a_ball_changes_only_the_path_terms() {
    let f = t2();
    let lambda = 0.8;
    let u = CylinderMeasure::uniform();
    let b = a("01");
    let r = u.restrict_to_ball(&f, &b);
    let mut prev = 0.0;
    for k in 1..30 {
        let s = norm_series(&f, lambda, &r, k).unwrap();
        assert!(s >= prev);
        prev = s;
    }
    let limit = norm_limit(&f, lambda, &r).unwrap();
    assert!(prev <= limit && limit - prev < 1e-2 * limit);
    let full = z_terms(&f, lambda, &u, 6);
    let restricted = z_terms(&f, lambda, &r, 6);
    for (v, z) in &restricted {
        if b.is_prefix_of(v) {
            assert!(close(*z, full[v], 1e-12));
        } else if !v.is_proper_prefix_of(&b) {
            assert_eq!(*z, 0.0);
        }
    }
}

fn values_at(f: &TreeFamily, m: &CylinderMeasure, c: &Cut) -> Vec<f64> {
    c.boundary().iter().map(|v| m.ball_value(f, v)).collect()
}

#[test]
fn measure_action_is_a_homomorphism() {
    let f = t2();
    let lambda = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for seed in 0..20 {
        let g = random_element(&f, seed, 3, 2);
        let h = random_element(&f, seed + 100, 3, 2);
        let gh = Hierarchomorphism::compose(&f, &g, &h).unwrap();
        let m = random_charge(&f, &mut rng, 3, 6);
        let two = transform_measure(&f, &g, lambda, &transform_measure(&f, &h, lambda, &m).unwrap()).unwrap();
        let one = transform_measure(&f, &gh, lambda, &m).unwrap();
        let c = Cut::common_refinement(two.cut(), one.cut());
        for (x, y) in values_at(&f, &two, &c).iter().zip(values_at(&f, &one, &c)) {
            assert!(close(*x, y, 1e-12));
        }
    }
}

#[test]
fn measure_action_intertwines_with_the_vertex_permutation() {
    let f = t2();
    let lambda = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..10 {
        let g = random_element(&f, seed, 3, 2);
        let (src, tgt) = adapted_contexts(&f, lambda, &g, 2).unwrap();
        // A charge on a cut inside the adapted source set.
        let mut c = g.domain().clone();
        for _ in 0..4 {
            let open: Vec<_> =
                c.boundary().iter().filter(|v| f.children(v).iter().all(|k| src.index_of(k).is_some())).cloned().collect();
            if let Some(u) = open.choose(&mut rng) {
                c = c.refine(&f, u).unwrap();
            }
        }
        let values = (0..c.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = CylinderMeasure::new(c, values).unwrap();
        let moved = transform_measure(&f, &g, lambda, &m).unwrap();
        let lhs = psi_vector(&tgt, &moved).unwrap();
        let rhs = transport_matrix(&src, &tgt, &g).unwrap() * psi_vector(&src, &m).unwrap();
        assert!(tgt.norm_sq(&(lhs - rhs)).sqrt() < 1e-9);
    }
}

#[test]
fn boundary_rank_vanishes_exactly_for_tree_isometries() {
    let f = t2();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let g = random_isometry(&f, &mut rng, 3);
        assert_eq!(boundary_deviation_rank(&f, &g, 0.8, 4, 1e-8).unwrap(), 0);
    }
    for seed in 0..10 {
        let g = random_element(&f, seed, 3, 2);
        let r4 = boundary_deviation_rank(&f, &g, 0.8, 4, 1e-8).unwrap();
        let r5 = boundary_deviation_rank(&f, &g, 0.8, 5, 1e-8).unwrap();
        assert_eq!(r4, r5);
        assert_eq!(r4 == 0, g.is_tree_isometry(&f));
        if g.is_root_fixing_isometry(&f) {
            assert_eq!(r4, 0);
        }
    }
}

#[test]
fn limit_inner_products_agree_with_deep_gram_forms() {
    let f = t2();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let m1 = random_charge(&f, &mut rng, 2, 3);
    let m2 = random_charge(&f, &mut rng, 2, 3);
    let lambda = 0.9;
    let limit = inner_e(&f, lambda, &m1, &m2).unwrap();
    let c = Cut::depth_cut(&f, 9);
    let ctx: GramContext = cut_context(&f, lambda, &c).unwrap();
    let deep = bilinear_gram(&ctx, &m1.push_to_cut(&f, &c).unwrap(), &m2.push_to_cut(&f, &c).unwrap()).unwrap();
    // The depth-9 form converges like (λ²p)^{−9} ≈ 0.04.
    assert!((limit - deep).abs() < 0.1 * limit.abs().max(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_scale_quadratically(seed in any::<u64>(), s in -3.0f64..3.0, lambda in 0.75f64..0.95) {
        let f = t2();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_charge(&f, &mut rng, 3, 6);
        let base = norm_limit(&f, lambda, &m).unwrap();
        let scaled = norm_limit(&f, lambda, &m.scaled(s)).unwrap();
        prop_assert!(close(scaled, s * s * base, 1e-9));
        prop_assert!(base >= m.total().powi(2) * (1.0 - 1e-12));
    }

    #[test]
    fn charge_json_round_trip(seed in any::<u64>()) {
        let f = TreeFamily::free_group(Length::from_integer(1), Length::from_integer(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_charge(&f, &mut rng, 4, 8);
        prop_assert_eq!(CylinderMeasure::from_json(&f, &m.to_json()).unwrap(), m);
    }
}
