//! Monte-Carlo validation: spine chain, multi-type Galton-Watson growth and a
//! brute-force truncated tree.
//!
//! Every trial draws from its own ChaCha8 stream: the key is derived from the
//! master seed and the stream number is the trial index. Aggregation is
//! integer counting, so results do not depend on how trials are scheduled
//! across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{build_q, ChainMatrix, ScaledDistribution};
use crate::model::ModelParams;

/// Generator family recorded in every output.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9), key = seed_from_u64(seed), stream = trial index";

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub trials: u64,
    pub survived: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// Generation horizon (Galton-Watson) or depth (tree).
    pub horizon: usize,
    pub cap: Option<u64>,
    pub seed: u64,
    pub generator: String,
}

impl SurvivalEstimate {
    fn new(trials: u64, survived: u64, horizon: usize, cap: Option<u64>, seed: u64) -> Self {
        let (estimate, std_error) = proportion(survived, trials);
        Self {
            trials,
            survived,
            estimate,
            std_error,
            horizon,
            cap,
            seed,
            generator: GENERATOR.to_string(),
        }
    }
}

/// Sample proportion and its binomial standard error.
pub fn proportion(successes: u64, trials: u64) -> (f64, f64) {
    let est = successes as f64 / trials as f64;
    (est, (est * (1.0 - est) / trials as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpineEstimate {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub generator: String,
    /// Number of trials with `Y_i = 1`, `i = 0..=n`.
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub std_errors: Vec<f64>,
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    Ok(())
}

/// Simulates the word chain from the all-ones word and counts `Y_i = 1`.
pub fn spine_simulate(params: &ModelParams, n: usize, trials: u64, seed: u64) -> Result<SpineEstimate> {
    if n < 1 {
        return Err(Error::Domain("horizon n must be ≥ 1".into()));
    }
    check_trials(trials)?;
    let q = build_q(params)?;
    let mask = (1u64 << q.word_len()) - 1;
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; n + 1],
            |mut acc, trial| {
                let mut rng = trial_rng(seed, trial);
                let mut word = mask;
                acc[0] += 1;
                for slot in acc.iter_mut().skip(1) {
                    let bit = rng.random::<f64>() >= q.closure_prob(word);
                    word = ((word << 1) | bit as u64) & mask;
                    if bit {
                        *slot += 1;
                    } else if word == 0 {
                        break;
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0u64; n + 1], add_counts);
    let (frequencies, std_errors) = counts.iter().map(|&c| proportion(c, trials)).unzip();
    Ok(SpineEstimate {
        n,
        trials,
        seed,
        generator: GENERATOR.to_string(),
        counts,
        frequencies,
        std_errors,
    })
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Type of the Galton-Watson ancestor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootType {
    /// `1…1`: the root and `k_m - 1` virtual ancestors are all reached,
    /// mirroring the all-ones start of the spine chain.
    #[default]
    AllOnes,
    /// `0…01`: only the root is reached. This is exactly the forward
    /// exploration of the percolation cluster of the root.
    Single,
}

impl RootType {
    pub fn word(self, word_len: u32) -> u64 {
        match self {
            RootType::AllOnes => (1u64 << word_len) - 1,
            RootType::Single => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwConfig {
    /// Population size counted as survival.
    pub cap: u64,
    /// Generations simulated; a population alive here counts as survival.
    pub horizon: usize,
    pub trials: u64,
    pub seed: u64,
    pub root: RootType,
}

impl Default for GwConfig {
    fn default() -> Self {
        Self {
            cap: 100_000,
            horizon: 200,
            trials: 10_000,
            seed: 0,
            root: RootType::AllOnes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwEstimate {
    pub config: GwConfig,
    pub survival: SurvivalEstimate,
    /// Trials alive at each generation `0..=horizon`; capped trials count as
    /// alive from then on.
    pub alive_at: Vec<u64>,
    /// Mean population per generation, up to (excluding) the first
    /// generation at which any trial hit the cap.
    pub mean_population: Vec<f64>,
    /// Standard error of each mean.
    pub population_std_error: Vec<f64>,
    pub first_cap_generation: Option<usize>,
}

#[derive(Clone)]
struct GwTally {
    survived: u64,
    alive_at: Vec<u64>,
    pop_sum: Vec<f64>,
    pop_sq_sum: Vec<f64>,
    first_cap: Option<usize>,
}

impl GwTally {
    fn new(horizon: usize) -> Self {
        Self {
            survived: 0,
            alive_at: vec![0; horizon + 1],
            pop_sum: vec![0.0; horizon + 1],
            pop_sq_sum: vec![0.0; horizon + 1],
            first_cap: None,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.survived += other.survived;
        self.alive_at = add_counts(self.alive_at, other.alive_at);
        for (a, b) in self.pop_sum.iter_mut().zip(other.pop_sum) {
            *a += b;
        }
        for (a, b) in self.pop_sq_sum.iter_mut().zip(other.pop_sq_sum) {
            *a += b;
        }
        self.first_cap = match (self.first_cap, other.first_cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Multi-type Galton-Watson process with mean offspring matrix `d·Q`.
///
/// Individuals of equal type are exchangeable, so each generation is kept
/// as a histogram over types; the `d·c` children of the `c` individuals of
/// type `x` split binomially between the two successor types.
pub fn gw_simulate(params: &ModelParams, config: &GwConfig) -> Result<GwEstimate> {
    check_trials(config.trials)?;
    if config.cap < 1 {
        return Err(Error::Domain("population cap must be ≥ 1".into()));
    }
    if config.horizon < params.word_len() as usize {
        return Err(Error::Domain(format!(
            "horizon {} shorter than k_m = {}",
            config.horizon,
            params.word_len()
        )));
    }
    let q = build_q(params)?;
    let horizon = config.horizon;
    let tally = (0..config.trials)
        .into_par_iter()
        .fold(
            || GwTally::new(horizon),
            |mut tally, trial| {
                gw_trial(&q, params.d(), config, trial, &mut tally);
                tally
            },
        )
        .reduce(|| GwTally::new(horizon), GwTally::merge);
    let trials = config.trials as f64;
    let tracked = tally.first_cap.unwrap_or(horizon + 1);
    let mean_population: Vec<f64> = tally.pop_sum[..tracked].iter().map(|s| s / trials).collect();
    let population_std_error = mean_population
        .iter()
        .zip(&tally.pop_sq_sum)
        .map(|(m, sq)| ((sq / trials - m * m).max(0.0) / trials).sqrt())
        .collect();
    Ok(GwEstimate {
        config: *config,
        survival: SurvivalEstimate::new(
            config.trials,
            tally.survived,
            horizon,
            Some(config.cap),
            config.seed,
        ),
        alive_at: tally.alive_at,
        mean_population,
        population_std_error,
        first_cap_generation: tally.first_cap,
    })
}

fn gw_trial(q: &ChainMatrix, d: u64, config: &GwConfig, trial: u64, tally: &mut GwTally) {
    let mut rng = trial_rng(config.seed, trial);
    let mask = (1u64 << q.word_len()) - 1;
    let mut population: BTreeMap<u64, u64> = BTreeMap::new();
    population.insert(config.root.word(q.word_len()), 1);
    tally.alive_at[0] += 1;
    tally.pop_sum[0] += 1.0;
    tally.pop_sq_sum[0] += 1.0;
    for generation in 1..=config.horizon {
        let mut next: BTreeMap<u64, u64> = BTreeMap::new();
        for (&x, &count) in &population {
            let children = d * count;
            let reach = 1.0 - q.closure_prob(x);
            let ones = binomial(&mut rng, children, reach);
            let zero = (x << 1) & mask;
            if ones > 0 {
                *next.entry(zero | 1).or_default() += ones;
            }
            if zero != 0 && ones < children {
                *next.entry(zero).or_default() += children - ones;
            }
        }
        let total: u64 = next.values().sum();
        if total == 0 {
            return;
        }
        tally.alive_at[generation] += 1;
        tally.pop_sum[generation] += total as f64;
        tally.pop_sq_sum[generation] += (total as f64).powi(2);
        if total >= config.cap {
            tally.survived += 1;
            tally.first_cap = Some(tally.first_cap.map_or(generation, |g| g.min(generation)));
            tally.alive_at[generation + 1..].iter_mut().for_each(|a| *a += 1);
            return;
        }
        population = next;
    }
    tally.survived += 1;
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if p <= 0.0 || n == 0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("valid binomial").sample(rng)
    }
}

/// Exact mean Galton-Watson population `d^g ‖e_root Q^g‖_1`, `g = 0..=generations`.
pub fn expected_population(params: &ModelParams, root: RootType, generations: usize) -> Result<Vec<f64>> {
    let q = build_q(params)?;
    let mut dist = ScaledDistribution::point_mass(&q, root.word(q.word_len()));
    let d = params.d() as f64;
    let mut out = Vec::with_capacity(generations + 1);
    out.push(1.0);
    for g in 1..=generations {
        dist.step(&q);
        out.push(dist.survival() * d.powi(g as i32));
    }
    Ok(out)
}

/// Default cap on the width `d^depth` of the tree level being probed.
pub const DEFAULT_TREE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEstimate {
    pub depth: usize,
    /// Estimate of `P(A_depth ≠ ∅)`.
    pub survival: SurvivalEstimate,
    /// Sample mean of `|A_depth|`.
    pub mean_size: f64,
    pub size_std_error: f64,
}

/// Brute-force percolation from the root of the explicit tree.
///
/// Levels `0..depth + k_m - 1` are explored breadth-first; each open-edge
/// coin is flipped once, when its source is first found reached.
/// `A_depth` is the set of depth-`depth` vertices whose subtree contains a
/// reached vertex.
pub fn tree_bfs(
    params: &ModelParams,
    depth: usize,
    trials: u64,
    seed: u64,
    budget: u64,
) -> Result<TreeEstimate> {
    check_trials(trials)?;
    let max_depth = depth + params.word_len() as usize - 1;
    params
        .d()
        .checked_pow(depth as u32)
        .filter(|&w| w <= budget)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "{}^{} vertices at depth {} exceed budget {}",
                params.d(),
                depth,
                depth,
                budget
            ))
        })?;
    let (survived, sum, sq_sum) = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let size = tree_trial(params, depth, max_depth, &mut trial_rng(seed, trial));
            (u64::from(size > 0), size, size * size)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let n = trials as f64;
    let mean_size = sum as f64 / n;
    let var = (sq_sum as f64 / n - mean_size * mean_size).max(0.0);
    Ok(TreeEstimate {
        depth,
        survival: SurvivalEstimate::new(trials, survived, depth, None, seed),
        mean_size,
        size_std_error: (var / n).sqrt(),
    })
}

/// Returns `|A_depth|` for one sample.
fn tree_trial(params: &ModelParams, depth: usize, max_depth: usize, rng: &mut ChaCha8Rng) -> u64 {
    let d = params.d();
    let mut levels: Vec<Vec<u64>> = vec![Vec::new(); max_depth + 1];
    levels[0].push(0);
    for t in 0..=max_depth {
        let mut current = std::mem::take(&mut levels[t]);
        current.sort_unstable();
        current.dedup();
        for (&k, &p) in params.lengths().iter().zip(params.probs()) {
            let target = t + k as usize;
            if target > max_depth || p == 0.0 {
                continue;
            }
            let fan = d.pow(k);
            for &v in &current {
                let first = v * fan;
                for child in first..first + fan {
                    if rng.random::<f64>() < p {
                        levels[target].push(child);
                    }
                }
            }
        }
        levels[t] = current;
    }
    let mut ancestors: Vec<u64> = (depth..=max_depth)
        .flat_map(|t| {
            let shrink = d.pow((t - depth) as u32);
            levels[t].iter().map(move |v| v / shrink)
        })
        .collect();
    ancestors.sort_unstable();
    ancestors.dedup();
    ancestors.len() as u64
}
