use costboost::attainability::{
    is_coin_attainable, is_dice_attainable, precedes, AttainConfig, DecisionMode, GuaranteeVector, MultiCost,
};
use costboost::boosting::{boost_binary, boost_to_list, boost_to_s_list, BoostConfig};
use costboost::games::{game_value, threshold_ladder, CostMatrix, LabelSet, SimplexDist};
use costboost::learners::{
    coin_on_j_learner, coin_trivial_learner, loss, planted_noise_learner, Example, Hypothesis, Instance, Query,
    Sample, SampleComplexity,
};
use costboost::lp::{solve, LinearProgram, LpStatus, Sense, TOL_FEAS};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cost(k: usize, seed: u64) -> CostMatrix {
    CostMatrix::random(k, seed).unwrap()
}

fn two_objectives(k: usize, seed: u64) -> MultiCost {
    MultiCost::new(vec![cost(k, seed), cost(k, seed + 1_000)]).unwrap()
}

fn cfg() -> AttainConfig {
    AttainConfig { grid_divisions: Some(60), ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_solutions_are_feasible(seed in 0u64..10_000, n in 1usize..5, rows in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut lp = LinearProgram::minimize((0..n).map(|_| rng.random::<f64>() - 0.3).collect());
        for _ in 0..rows {
            let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let ax: f64 = a.iter().zip(&x0).map(|(a, x)| a * x).sum();
            lp.add_constraint(a, Sense::Le, ax + rng.random::<f64>());
        }
        // A box keeps the problem bounded.
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            lp.add_constraint(e, Sense::Le, 2.0);
        }
        let sol = solve(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!(lp.max_violation(&sol.primal) <= TOL_FEAS);
        prop_assert!(sol.optimal_value <= lp.objective_value(&x0) + 1e-9);
    }

    #[test]
    fn game_value_is_monotone_in_the_subset(seed in 0u64..10_000, k in 2usize..5, a in 1u16..16, b in 1u16..16) {
        let w = cost(k, seed);
        let full = (1u16 << k) - 1;
        let small = LabelSet::from_mask(a & b & full);
        let big = LabelSet::from_mask((a | b) & full);
        prop_assume!(!small.is_empty());
        let vs = game_value(&w, small).unwrap().value;
        let vb = game_value(&w, big).unwrap().value;
        prop_assert!(vs <= vb + 1e-9);
    }

    #[test]
    fn minimax_strategy_certifies_the_value(seed in 0u64..10_000, k in 2usize..6) {
        let w = cost(k, seed);
        for set in LabelSet::all_nonempty(k) {
            let g = game_value(&w, set).unwrap();
            let worst = set.iter().map(|j| w.cost_against(g.minimax_strategy.probs(), j)).fold(0.0, f64::max);
            prop_assert!(worst <= g.value + 1e-9);
        }
    }

    #[test]
    fn binary_closed_form(wp in 0.001f64..=1.0, wm in 0.001f64..=1.0) {
        let v = game_value(&CostMatrix::binary(wp, wm).unwrap(), LabelSet::full(2)).unwrap().value;
        prop_assert!((v - wp * wm / (wp + wm)).abs() <= 1e-9);
    }

    #[test]
    fn buckets_are_nondecreasing(seed in 0u64..10_000, k in 2usize..5, mut zs in prop::collection::vec(0.0f64..1.0, 2..20)) {
        let ladder = threshold_ladder(&cost(k, seed)).unwrap();
        zs.sort_by(f64::total_cmp);
        let buckets: Vec<usize> = zs.iter().map(|&z| ladder.bucket_of(z)).collect();
        prop_assert!(buckets.windows(2).all(|p| p[0] <= p[1]));
        for (&z, &n) in zs.iter().zip(&buckets) {
            prop_assert!(ladder.level(n) <= z + 1e-9 || n == 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn attainability_is_upward_closed(seed in 0u64..1_000, z1 in 0.0f64..1.0, z2 in 0.0f64..1.0, d1 in 0.0f64..0.3, d2 in 0.0f64..0.3) {
        let w = two_objectives(3, seed);
        let z = GuaranteeVector::new(vec![z1, z2]).unwrap();
        let up = GuaranteeVector::new(vec![(z1 + d1).min(1.0), (z2 + d2).min(1.0)]).unwrap();
        if is_coin_attainable(&w, &z, &cfg()).unwrap().attainable {
            prop_assert!(is_coin_attainable(&w, &up, &cfg()).unwrap().attainable);
        }
    }

    #[test]
    fn dice_regions_are_convex(seed in 0u64..1_000, a in prop::array::uniform2(0.0f64..1.0), b in prop::array::uniform2(0.0f64..1.0)) {
        let w = two_objectives(3, seed);
        let za = GuaranteeVector::new(a.to_vec()).unwrap();
        let zb = GuaranteeVector::new(b.to_vec()).unwrap();
        let mid = GuaranteeVector::new(vec![(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]).unwrap();
        let c = cfg();
        if is_coin_attainable(&w, &za, &c).unwrap().attainable && is_coin_attainable(&w, &zb, &c).unwrap().attainable {
            prop_assert!(is_coin_attainable(&w, &mid, &c).unwrap().attainable);
        }
    }

    #[test]
    fn grid_and_sweep_agree_off_the_boundary(seed in 0u64..1_000, z in prop::array::uniform2(0.0f64..1.0), mask in 1u16..8) {
        let w = two_objectives(3, seed);
        let set = LabelSet::from_mask(mask);
        let zv = GuaranteeVector::new(z.to_vec()).unwrap();
        let grid = is_dice_attainable(&w, &zv, set, &AttainConfig::default()).unwrap().attainable;
        let sweep_cfg = AttainConfig { mode: DecisionMode::DualitySweep, ..Default::default() };
        let sweep = is_dice_attainable(&w, &zv, set, &sweep_cfg).unwrap().attainable;
        if grid != sweep {
            let shift = |d: f64| GuaranteeVector::new(z.iter().map(|v| (v + d).clamp(0.0, 1.0)).collect()).unwrap();
            let above = is_dice_attainable(&w, &shift(1e-3), set, &AttainConfig::default()).unwrap().attainable;
            let below = is_dice_attainable(&w, &shift(-1e-3), set, &AttainConfig::default()).unwrap().attainable;
            prop_assert!(above && !below, "disagreement away from the boundary at {z:?}");
        }
    }

    #[test]
    fn dice_regions_shrink_with_the_subset(seed in 0u64..1_000, z in prop::array::uniform2(0.0f64..1.0), a in 1u16..8, b in 1u16..8) {
        let w = two_objectives(3, seed);
        let small = LabelSet::from_mask(a & b);
        prop_assume!(!small.is_empty());
        let big = LabelSet::from_mask(a | b);
        let zv = GuaranteeVector::new(z.to_vec()).unwrap();
        if is_dice_attainable(&w, &zv, big, &cfg()).unwrap().attainable {
            prop_assert!(is_dice_attainable(&w, &zv, small, &cfg()).unwrap().attainable);
        }
    }

    #[test]
    fn precedes_is_a_preorder(seed in 0u64..1_000, a in prop::array::uniform2(0.0f64..1.0), b in prop::array::uniform2(0.0f64..1.0), c in prop::array::uniform2(0.0f64..1.0)) {
        let w = two_objectives(3, seed);
        let [za, zb, zc] = [a, b, c].map(|v| GuaranteeVector::new(v.to_vec()).unwrap());
        let cf = cfg();
        prop_assert!(precedes(&w, &za, &za, &cf).unwrap());
        if precedes(&w, &za, &zb, &cf).unwrap() && precedes(&w, &zb, &zc, &cf).unwrap() {
            prop_assert!(precedes(&w, &za, &zc, &cf).unwrap());
        }
    }

    #[test]
    fn sqrt_predicate_off_the_band(z in prop::array::uniform2(0.0f64..1.0)) {
        let score = z[0].sqrt() + z[1].sqrt() - 1.0;
        prop_assume!(score.abs() > 1e-3);
        let v = is_coin_attainable(&MultiCost::population_driven(), &GuaranteeVector::new(z.to_vec()).unwrap(), &AttainConfig::default()).unwrap();
        prop_assert_eq!(v.attainable, score > 0.0);
    }

    #[test]
    fn coin_on_j_is_point_independent(seed in 0u64..10_000, mask in 1u16..16) {
        let w = cost(4, seed);
        let set = LabelSet::from_mask(mask);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = Instance::on_labels(20, 4, set, &mut rng).unwrap();
        let learner = coin_on_j_learner(&w, set, &inst).unwrap();
        let h = learner.learn(&Query { examples: &[], distribution: None }, 20).unwrap();
        prop_assert!(h.is_point_independent());
        for x in 1..20 {
            for y in 0..4 {
                prop_assert_eq!(h.prob(0, y), h.prob(x, y));
            }
        }
    }

    #[test]
    fn planted_learner_is_exact_below_the_smallest_cost(seed in 0u64..10_000, k in 2usize..5) {
        let w = cost(k, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = Instance::random_with(15, &SimplexDist::uniform(k), &mut rng).unwrap();
        let weights: Vec<f64> = (0..15).map(|_| rng.random::<f64>() + 0.01).collect();
        let d = SimplexDist::from_weights(&weights).unwrap();
        let reachable = (0..15)
            .flat_map(|x| (0..k).map(move |l| (x, l)))
            .map(|(x, l)| d[x] * w.get(l, inst.label(x)))
            .filter(|&c| c > 0.0)
            .fold(f64::INFINITY, f64::min);
        let learner = planted_noise_learner(&w, reachable * 0.99, &inst).unwrap();
        let h = learner.learn(&Query { examples: &[], distribution: Some(d.probs()) }, 15).unwrap();
        prop_assert_eq!(h, Hypothesis::Deterministic(inst.target().to_vec()));
    }

    #[test]
    fn s_lists_never_exceed_s(seed in 0u64..10_000, k in 3usize..5, frac in 0.0f64..1.0) {
        let w = cost(k, seed);
        let ladder = threshold_ladder(&w).unwrap();
        let z = frac * ladder.levels.last().unwrap();
        prop_assume!(ladder.list_size_for(z) < k && ladder.v_lower(ladder.list_size_for(z) + 1) - z > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = Instance::random_with(20, &SimplexDist::uniform(k), &mut rng).unwrap();
        let sample = Sample::draw(&inst, 60, &mut rng);
        let learner = planted_noise_learner(&w, z, &inst).unwrap();
        let cfg = BoostConfig { rounds: Some(30), ..BoostConfig::seeded(seed) };
        let (out, s) = boost_to_s_list(&learner, &sample, 20, &cfg).unwrap();
        prop_assert!(out.list.max_list_size() <= s);
        prop_assert!(out.report.regret.within_bound);
    }

    #[test]
    fn binary_runs_keep_their_invariants(seed in 0u64..10_000, wp in 0.2f64..=1.0, wm in 0.2f64..=1.0, frac in 0.3f64..0.8) {
        let w = CostMatrix::binary(wp, wm).unwrap();
        let v = wp * wm / (wp + wm);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = Instance::random_with(20, &SimplexDist::uniform(2), &mut rng).unwrap();
        let sample = Sample::draw(&inst, 80, &mut rng);
        let learner = planted_noise_learner(&w, frac * v, &inst).unwrap();
        let cfg = BoostConfig::seeded(seed);
        let a = boost_binary(&learner, &sample, 20, &cfg).unwrap();
        prop_assert!(a.report.regret.within_bound);
        prop_assert!(a.report.consistent);
        prop_assert_eq!(a.report.mutual_exclusion, Some(true));
        let b = boost_binary(&learner, &sample, 20, &cfg).unwrap();
        prop_assert_eq!(a.ensemble, b.ensemble);
        prop_assert_eq!(serde_json::to_string(&a.report).unwrap(), serde_json::to_string(&b.report).unwrap());
    }

    #[test]
    fn lists_are_bounded(seed in 0u64..10_000, k in 2usize..5, frac in 0.0f64..1.0) {
        let w = cost(k, seed);
        let ladder = threshold_ladder(&w).unwrap();
        let z = frac * ladder.levels.last().unwrap();
        prop_assume!(ladder.margin(z) > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = Instance::random_with(20, &SimplexDist::uniform(k), &mut rng).unwrap();
        let sample = Sample::draw(&inst, 60, &mut rng);
        let learner = planted_noise_learner(&w, z, &inst).unwrap();
        let out = boost_to_list(&learner, &sample, 20, &BoostConfig { rounds: Some(20), ..BoostConfig::seeded(seed) }).unwrap();
        let sigma = out.report.params.sigma.unwrap();
        prop_assert!(out.list.max_list_value().unwrap() <= z + sigma + 1e-9);
    }
}

/// Coin learners fed m₀ draws meet their guarantee on at least 1 − 2δ of random distributions.
#[test]
fn coin_learner_honours_its_guarantee() {
    let w = MultiCost::population_driven();
    let z = GuaranteeVector::new(vec![0.3, 0.3]).unwrap();
    let learner = coin_trivial_learner(&w, &z, &AttainConfig::default()).unwrap();
    let (eps, delta) = (0.05, 0.05);
    let m = SampleComplexity::default().m0(eps, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = 0;
    let trials = 120;
    for _ in 0..trials {
        let q = SimplexDist::from_weights(&[rng.random::<f64>(), rng.random::<f64>()]).unwrap();
        let inst = Instance::random_with(25, &q, &mut rng).unwrap();
        let weights: Vec<f64> = (0..25).map(|_| rng.random::<f64>()).collect();
        let d = SimplexDist::from_weights(&weights).unwrap();
        let sample = Sample::draw_from(&inst, &d, m, &mut rng).unwrap();
        let examples: Vec<Example> =
            sample.points.iter().zip(&sample.labels).map(|(&point, &label)| Example { point, label, count: 1 }).collect();
        let h = learner.learn(&Query { examples: &examples, distribution: None }, 25).unwrap();
        let bad = w.costs().iter().zip(z.values()).any(|(c, zi)| loss(c, &h, &inst, &d).unwrap() > zi + eps);
        failures += usize::from(bad);
    }
    assert!(failures as f64 <= 2.0 * delta * trials as f64, "{failures} failures");
}
