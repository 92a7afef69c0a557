//! Cross-checks of the Monte-Carlo estimators against exact computations.

use treeperc::markov::{build_q, u_sequence};
use treeperc::simulate::{
    expected_population, gw_simulate, spine_simulate, tree_bfs, GwConfig, RootType,
    DEFAULT_TREE_BUDGET,
};
use treeperc::ModelParams;

/// `P(population nonempty at generation g)`, `g = 0..=generations`, from the
/// offspring generating functions.
fn exact_alive(params: &ModelParams, root: u64, generations: usize) -> Vec<f64> {
    let q = build_q(params).unwrap();
    let k = q.word_len();
    let mask = (1u64 << k) - 1;
    let d = params.d() as i32;
    // s[x] = P(extinct by the current generation | one individual of type x)
    let mut s = vec![0.0; 1 << k];
    s[0] = 1.0;
    let mut out = vec![1.0 - s[root as usize]];
    for _ in 0..generations {
        let mut next = vec![1.0; 1 << k];
        for x in 1..=mask {
            let stay = q.closure_prob(x);
            let z = ((x << 1) & mask) as usize;
            next[x as usize] = (stay * s[z] + (1.0 - stay) * s[z | 1]).powi(d);
        }
        s = next;
        out.push(1.0 - s[root as usize]);
    }
    out
}

#[test]
fn gw_alive_fractions_match_generating_functions() {
    let params = ModelParams::two_edge(2, 1, 2, 0.25, 0.14).unwrap();
    for root in [RootType::AllOnes, RootType::Single] {
        let cfg = GwConfig {
            cap: u64::MAX,
            horizon: 12,
            trials: 40_000,
            seed: 17,
            root,
        };
        let est = gw_simulate(&params, &cfg).unwrap();
        let exact = exact_alive(&params, root.word(2), 12);
        for g in 0..=12 {
            let f = est.alive_at[g] as f64 / cfg.trials as f64;
            let se = (exact[g] * (1.0 - exact[g]) / cfg.trials as f64).sqrt();
            assert!(
                (f - exact[g]).abs() <= 4.0 * se + 1e-12,
                "{root:?} g={g}: {f} vs {}",
                exact[g]
            );
        }
    }
}

#[test]
fn gw_mean_population_matches_mean_matrix() {
    let params = ModelParams::new(2, vec![1, 3], vec![0.2, 0.09]).unwrap();
    let cfg = GwConfig {
        cap: u64::MAX,
        horizon: 20,
        trials: 20_000,
        seed: 5,
        root: RootType::AllOnes,
    };
    let est = gw_simulate(&params, &cfg).unwrap();
    let exact = expected_population(&params, RootType::AllOnes, 20).unwrap();
    for g in 0..=20 {
        let (m, se) = (est.mean_population[g], est.population_std_error[g]);
        assert!((m - exact[g]).abs() <= 4.0 * se + 1e-12, "g={g}: {m} vs {}", exact[g]);
    }
}

#[test]
fn tree_matches_single_root_process() {
    let params = ModelParams::two_edge(2, 1, 2, 0.25, 0.14).unwrap();
    let depth = 6;
    let est = tree_bfs(&params, depth, 40_000, 3, DEFAULT_TREE_BUDGET).unwrap();
    let exact = exact_alive(&params, 1, depth + 1)[depth + 1];
    let se = (exact * (1.0 - exact) / 40_000.0).sqrt();
    assert!((est.survival.estimate - exact).abs() <= 4.0 * se);
}

#[test]
fn tree_mean_size_within_sandwich() {
    let params = ModelParams::two_edge(2, 1, 2, 0.25, 0.14).unwrap();
    let n = 8;
    let est = tree_bfs(&params, n, 40_000, 8, DEFAULT_TREE_BUDGET).unwrap();
    let scale = 2f64.powi(n as i32) * u_sequence(&params, n).unwrap().value(n);
    let slack = 4.0 * est.size_std_error;
    assert!(est.mean_size >= scale - slack);
    assert!(est.mean_size <= 4.0 * scale + slack);
}

#[test]
fn spine_frequencies_match_u_sequence() {
    let params = ModelParams::new(3, vec![1, 2, 4], vec![0.2, 0.1, 0.05]).unwrap();
    let est = spine_simulate(&params, 25, 200_000, 11).unwrap();
    let u = u_sequence(&params, 25).unwrap();
    for i in 0..=25 {
        let se = (u.value(i) * (1.0 - u.value(i)) / 200_000.0).sqrt();
        assert!((est.frequencies[i] - u.value(i)).abs() <= 4.0 * se + 1e-12, "i={i}");
    }
}
