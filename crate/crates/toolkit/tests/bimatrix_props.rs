use ppad_toolkit::bimatrix::*;
use ppad_toolkit::games::MixedProfile;
use ppad_toolkit::solvers::{lp_value, regret_dynamics, support_enumeration_ane, SolverBudget};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix(g: &BimatrixGame, row: bool) -> Vec<Vec<f64>> {
    (0..g.rows()).map(|i| (0..g.cols()).map(|j| if row { g.r(i, j) } else { g.c(i, j) }).collect()).collect()
}

#[test]
fn four_item_gadget_matches_the_display() {
    let g = althofer(4).unwrap();
    let expected = vec![
        vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
        vec![0.0, 0.0, 1.0, 1.0, 1.0, 0.0],
    ];
    assert_eq!(matrix(&g, true), expected);
    for (r, c) in g.row.iter().zip(&g.col) {
        assert_eq!(r + c, 1.0);
    }
    let lp = lp_value(&expected).unwrap();
    assert!((lp.value - 0.5).abs() < 1e-9);
}

#[test]
fn gadget_values_are_one_half() {
    for k in [2, 4, 6, 8] {
        let g = althofer(k).unwrap();
        for j in 0..g.cols() {
            assert_eq!((0..k).filter(|&i| g.r(i, j) == 1.0).count(), k / 2);
        }
        let lp = lp_value(&matrix(&g, true)).unwrap();
        assert!((lp.value - 0.5).abs() < 1e-9, "k={k}");
        for p in &lp.row {
            assert!((p - 1.0 / k as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn single_composed_entry() {
    let zero = |n: usize| BipartitePolymatrix::coordination(n, n, 1, 0.0, 0);
    let mut poly = zero(2);
    for row in &mut poly.subgames {
        for g in row {
            g.alice[0][0] = 0.0;
            g.bob[0][0] = 0.0;
        }
    }
    let c = compose(&poly, 0.3).unwrap();
    let a = c.alice.iter().position(|a| a.vertex == 1 && a.subset == vec![1]).unwrap();
    let b = c.bob.iter().position(|b| b.vertex == 1 && b.subset == vec![1]).unwrap();
    assert_eq!(c.game.r(a, b), 2.0);
    assert_eq!(c.game.c(a, b), 0.0);
}

#[test]
fn perturbing_a_subgame_moves_only_matching_entries() {
    let poly = BipartitePolymatrix::random(2, 2, 3, 4);
    let lambda = 0.2;
    let base = compose(&poly, lambda).unwrap();
    let mut moved = poly.clone();
    let xi = 0.01;
    moved.subgames[1][0].alice[1][0] += xi;
    let c = compose(&moved, lambda).unwrap();
    for (ai, a) in c.alice.iter().enumerate() {
        for (bi, b) in c.bob.iter().enumerate() {
            let d = c.game.r(ai, bi) - base.game.r(ai, bi);
            let hit = a.vertex == 1 && a.strategy == 1 && b.vertex == 0 && b.strategy == 0;
            let want = if hit { lambda * 2.0 * xi } else { 0.0 };
            assert!((d - want).abs() < 1e-12);
            assert_eq!(c.game.c(ai, bi), base.game.c(ai, bi));
        }
    }
}

#[test]
fn separated_game_forces_uniform_vertex_marginals() {
    let poly = BipartitePolymatrix::random(2, 2, 2, 1);
    let c = compose(&poly, 0.0).unwrap();
    // With no main game the composed game is constant-sum.
    for (r, k) in c.game.row.iter().zip(&c.game.col) {
        assert!((r + k - 2.0).abs() < 1e-12);
    }
    let lp = lp_value(&matrix(&c.game, true)).unwrap();
    assert!((lp.value - 1.0).abs() < 1e-9);
    let (ma, _) = c.vertex_marginals(&lp.row, &lp.col, 2, 2);
    let (_, mb) = c.vertex_marginals(&lp.row, &lp.col, 2, 2);
    for m in ma.iter().chain(&mb) {
        assert!((m - 0.5).abs() < 1e-9);
    }
}

#[test]
fn odd_rosters_need_padding() {
    let poly = BipartitePolymatrix::random(3, 2, 2, 0);
    assert!(compose(&poly, 0.1).is_err());
    let c = compose(&poly.pad_even(), 0.1).unwrap();
    assert_eq!(c.alice.len(), (poly.actions_a.iter().sum::<usize>() + 1) * 2);
}

#[test]
fn decomposition_examples() {
    let poly = BipartitePolymatrix::random(2, 2, 3, 2);
    let c = compose(&poly, 0.1).unwrap();
    let (na, nb) = (c.alice.len(), c.bob.len());
    let d = decompose_profile(&poly, &c, &vec![1.0 / na as f64; na], &vec![1.0 / nb as f64; nb]).unwrap();
    for (p, &n) in d.probs.iter().zip(&poly.action_counts()) {
        for v in p {
            assert!((v - 1.0 / n as f64).abs() < 1e-12);
        }
    }
    let pick = c.alice.iter().position(|a| a.vertex == 1 && a.strategy == 1).unwrap();
    let mut alice = vec![0.0; na];
    alice[pick] = 1.0;
    let d = decompose_profile(&poly, &c, &alice, &vec![1.0 / nb as f64; nb]).unwrap();
    assert_eq!(d.probs[1][1], 1.0);
    let n0 = poly.actions_a[0] as f64;
    assert!(d.probs[0].iter().all(|&v| (v - 1.0 / n0).abs() < 1e-12));
}

#[test]
fn decomposition_reproduces_the_joint_by_chain_rule() {
    let poly = BipartitePolymatrix::random(2, 2, 3, 6);
    let c = compose(&poly, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut alice: Vec<f64> = (0..c.alice.len()).map(|_| rng.gen()).collect();
    let s: f64 = alice.iter().sum();
    alice.iter_mut().for_each(|v| *v /= s);
    let bob = vec![1.0 / c.bob.len() as f64; c.bob.len()];
    let d = decompose_profile(&poly, &c, &alice, &bob).unwrap();
    let (ma, _) = c.vertex_marginals(&alice, &bob, 2, 2);
    for (i, m) in ma.iter().enumerate() {
        for s in 0..poly.actions_a[i] {
            let joint: f64 = c.alice.iter().zip(&alice).filter(|(a, _)| a.vertex == i && a.strategy == s).map(|(_, p)| p).sum();
            assert!((m * d.probs[i][s] - joint).abs() < 1e-12);
        }
    }
    assert!(d.validate(&poly.to_succinct()).is_ok());
}

#[test]
fn product_profiles_round_trip() {
    let poly = BipartitePolymatrix::random(2, 2, 3, 9);
    let c = compose(&poly, 0.1).unwrap();
    let intended = [1usize, 0, 2, 1];
    let mut alice = vec![0.0; c.alice.len()];
    let mut bob = vec![0.0; c.bob.len()];
    for (idx, a) in c.alice.iter().enumerate() {
        if a.strategy == intended[a.vertex] % poly.actions_a[a.vertex] {
            alice[idx] = 1.0;
        }
    }
    for (idx, b) in c.bob.iter().enumerate() {
        if b.strategy == intended[2 + b.vertex] % poly.actions_b[b.vertex] {
            bob[idx] = 1.0;
        }
    }
    let (sa, sb): (f64, f64) = (alice.iter().sum(), bob.iter().sum());
    alice.iter_mut().for_each(|v| *v /= sa);
    bob.iter_mut().for_each(|v| *v /= sb);
    let d = decompose_profile(&poly, &c, &alice, &bob).unwrap();
    for (v, p) in d.probs.iter().enumerate() {
        let n = poly.action_counts()[v];
        assert_eq!(p[intended[v] % n], 1.0);
    }
}

#[test]
fn well_supported_input_is_unchanged() {
    let poly = BipartitePolymatrix::coordination(2, 2, 3, 0.5, 1);
    let p = MixedProfile::pure(&[0, 0, 0, 0], &[3, 3, 3, 3]);
    let t = weaknash_to_wswn(&poly, &p, 0.04, 0.0).unwrap();
    assert_eq!(t.profile, p);
    assert!(t.moved_mass.iter().all(|&m| m == 0.0));
    assert!(t.output.wsne);
}

#[test]
fn bad_mass_is_removed_and_rest_rescaled() {
    // A-vertex 0's action 2 sits εk + ξ below the optimum against B playing 0.
    let eps: f64 = 0.04;
    let k = 1.0 + 1.0 / eps.sqrt();
    let gap = eps * k + 0.01;
    let mut poly = BipartitePolymatrix::coordination(1, 1, 3, 0.0, 0);
    poly.subgames[0][0].alice = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0 - gap, 0.0, 0.0]];
    let p_bad = 0.5 * eps / gap;
    let p = MixedProfile { probs: vec![vec![1.0 - p_bad, 0.0, p_bad], vec![1.0, 0.0, 0.0]] };
    let t = weaknash_to_wswn(&poly, &p, eps, 0.0).unwrap();
    assert!(t.input.ane);
    assert_eq!(t.profile.probs[0], vec![1.0, 0.0, 0.0]);
    assert!((t.moved_mass[0] - 2.0 * p_bad).abs() < 1e-12);
    assert!(t.moved_mass[0] <= 2.0 / (k - 1.0));
}

#[test]
fn transform_on_dynamics_output() {
    for seed in 0..10 {
        let poly = BipartitePolymatrix::random(3, 3, 3, seed);
        let eps = 0.04;
        let budget = SolverBudget { iterations: 2000, seed, ..Default::default() };
        let d = regret_dynamics(&poly.to_succinct(), &budget, eps).unwrap();
        let delta = d.report.failing(eps) as f64 / poly.players() as f64;
        let t = weaknash_to_wswn(&poly, &d.best, eps, delta).unwrap();
        assert!(t.input.weak_nash);
        assert!(t.output.ws_weak_nash, "seed {seed}: {:?}", t.output.support_regrets);
        for m in &t.moved_mass {
            assert!(*m <= 2.0 / (t.k - 1.0) + 1e-12);
        }
    }
}

#[test]
fn coordination_composition_decomposes_to_weak_nash() {
    let poly = BipartitePolymatrix::coordination(2, 2, 2, 0.5, 3);
    let lambda = 0.05;
    let c = compose(&poly, lambda).unwrap();
    let eps = lambda * lambda / 4.0;
    let s = support_enumeration_ane(&c.normalized(), eps, &SolverBudget::default()).unwrap();
    let d = decompose_profile(&poly, &c, &s.profile.probs[0], &s.profile.probs[1]).unwrap();
    let r = poly.classify(&d, 0.25, 0.5).unwrap();
    assert!(r.weak_nash);
    let (ma, mb) = c.vertex_marginals(&s.profile.probs[0], &s.profile.probs[1], 2, 2);
    assert!(tv_from_uniform(&ma) <= 16.0 * lambda && tv_from_uniform(&mb) <= 16.0 * lambda);
}

/// Largest `Σ|a_i| / θ` over grid distributions whose top-half deviation is `θ`.
fn worst_uniformity_ratio(k: usize, steps: usize) -> f64 {
    let mut worst: f64 = 0.0;
    let mut counts = vec![0usize; k];
    fn rec(i: usize, left: usize, counts: &mut Vec<usize>, steps: usize, worst: &mut f64) {
        if i + 1 == counts.len() {
            counts[i] = left;
            let p: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
            let v = uniformity_check(&p, 1.0).unwrap();
            if v.top_half > 1e-12 {
                let exact = uniformity_check(&p, v.top_half).unwrap();
                assert_eq!(exact.holds, Some(true));
                *worst = worst.max(v.total_deviation / v.top_half);
            }
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            rec(i + 1, left - c, counts, steps, worst);
        }
    }
    rec(0, steps, &mut counts, steps, &mut worst);
    worst
}

#[test]
fn uniformity_bound_survives_adversarial_grid() {
    for (k, steps) in [(2, 40), (3, 30), (4, 24), (5, 15)] {
        let w = worst_uniformity_ratio(k, steps);
        assert!(w <= 4.0 + 1e-9, "k={k}: {w}");
        assert!(w >= 2.0 - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composed_entries_follow_the_formula(seed in 0u64..1000, lambda in 0.0f64..1.0) {
        let poly = BipartitePolymatrix::random(2, 4, 2, seed);
        let c = compose(&poly, lambda).unwrap();
        for (ai, a) in c.alice.iter().enumerate() {
            for (bi, b) in c.bob.iter().enumerate() {
                let g = &poly.subgames[a.vertex][b.vertex];
                let p = b.subset.contains(&a.vertex) as u8 as f64;
                let q = a.subset.contains(&b.vertex) as u8 as f64;
                prop_assert!((c.game.r(ai, bi) - (lambda * 4.0 * g.alice[a.strategy][b.strategy] + p + q)).abs() < 1e-12);
                prop_assert!((c.game.c(ai, bi) - (lambda * 2.0 * g.bob[a.strategy][b.strategy] + 2.0 - p - q)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn polymatrix_utilities_are_sums_of_subgames(seed in 0u64..1000) {
        let poly = BipartitePolymatrix::random(2, 3, 3, seed);
        let g = poly.to_succinct();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<usize> = poly.action_counts().iter().map(|&n| rng.gen_range(0..n)).collect();
        let u0: f64 = (0..3).map(|j| poly.subgames[0][j].alice[p[0]][p[2 + j]]).sum();
        prop_assert!((g.payoff(0, &p) - u0).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&g.payoff(3, &p)));
    }
}
