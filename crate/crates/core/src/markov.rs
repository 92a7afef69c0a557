//! The absorbing word chain and exact finite-horizon spine probabilities.
//!
//! Reading the spine from the deep end upwards, `Y_i = 1` when the `i`-th
//! vertex above depth `n` connects to the spine at depth `≥ n`. The word
//! `X_i = (Y_{i-k_m+1}, …, Y_i)` is a Markov chain started from the all-ones
//! word; appending a 0 has probability `π(x) = ∏_j (1 - p_j)^{x_{k_m-k_j+1}}`.
//! The all-zero word is absorbing, and `Q` is the transition matrix
//! restricted to the other `2^{k_m} - 1` words.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default cap on the word length `k_m` (state space `2^{k_m}`).
pub const DEFAULT_MAX_WORD_LEN: u32 = 24;

/// Largest word length for which dense matrices are materialized.
pub const MAX_DENSE_WORD_LEN: u32 = 12;

/// Sparse shift-structured transition matrix.
///
/// Every row has at most two nonzero entries: the "append 0" and "append 1"
/// successors. Only the per-word closure probabilities are stored.
#[derive(Debug, Clone)]
pub struct ChainMatrix {
    params: ModelParams,
    closure: Vec<f64>,
    full: bool,
}

/// One row of a [`ChainMatrix`]: nonzero `(target index, probability)` pairs
/// plus the mass sent to the absorbing word when it is not a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub entries: Vec<(u64, f64)>,
    pub absorbed: f64,
}

/// Substochastic `Q` on the nonzero words.
pub fn build_q(params: &ModelParams) -> Result<ChainMatrix> {
    build_with_cap(params, false, DEFAULT_MAX_WORD_LEN)
}

/// Stochastic chain on all `2^{k_m}` words, the zero word absorbing.
pub fn build_full_chain(params: &ModelParams) -> Result<ChainMatrix> {
    build_with_cap(params, true, DEFAULT_MAX_WORD_LEN)
}

pub fn build_with_cap(params: &ModelParams, full: bool, cap: u32) -> Result<ChainMatrix> {
    let len = params.word_len();
    if len > cap {
        return Err(Error::StateSpaceTooLarge { len, cap });
    }
    let closure = (0..1u64 << len).map(|w| params.closure_prob(w)).collect();
    Ok(ChainMatrix {
        params: params.clone(),
        closure,
        full,
    })
}

impl ChainMatrix {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn word_len(&self) -> u32 {
        self.params.word_len()
    }

    /// Whether the absorbing word is an explicit state.
    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Number of states (`2^{k_m} - 1` for `Q`).
    pub fn dim(&self) -> usize {
        self.closure.len() - self.offset()
    }

    fn offset(&self) -> usize {
        usize::from(!self.full)
    }

    fn mask(&self) -> usize {
        self.closure.len() - 1
    }

    /// Vector position of a word index.
    pub fn position(&self, index: u64) -> usize {
        index as usize - self.offset()
    }

    /// Word index stored at a vector position.
    pub fn index_at(&self, position: usize) -> u64 {
        (position + self.offset()) as u64
    }

    pub fn closure_prob(&self, index: u64) -> f64 {
        self.closure[index as usize]
    }

    pub fn row(&self, index: u64) -> Row {
        let x = index as usize;
        if self.full && x == 0 {
            return Row {
                entries: vec![(0, 1.0)],
                absorbed: 0.0,
            };
        }
        let stay = self.closure[x];
        let zero = (x << 1) & self.mask();
        let mut entries = Vec::with_capacity(2);
        let mut absorbed = 0.0;
        if zero == 0 && !self.full {
            absorbed = stay;
        } else if stay > 0.0 {
            entries.push((zero as u64, stay));
        }
        if stay < 1.0 {
            entries.push(((zero | 1) as u64, 1.0 - stay));
        }
        Row { entries, absorbed }
    }

    /// `out = v · M` for a row vector `v`.
    pub fn left_mul(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        out.iter_mut().for_each(|o| *o = 0.0);
        let off = self.offset();
        let mask = self.mask();
        for (pos, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let x = pos + off;
            if x == 0 {
                out[0] += mass;
                continue;
            }
            let stay = self.closure[x];
            let zero = (x << 1) & mask;
            if zero != 0 || self.full {
                out[zero - off] += mass * stay;
            }
            out[(zero | 1) - off] += mass * (1.0 - stay);
        }
    }

    /// `out = M · w` for a column vector `w`.
    pub fn right_mul(&self, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let off = self.offset();
        let mask = self.mask();
        for (pos, o) in out.iter_mut().enumerate() {
            let x = pos + off;
            if x == 0 {
                *o = w[0];
                continue;
            }
            let stay = self.closure[x];
            let zero = (x << 1) & mask;
            let w_zero = if zero != 0 || self.full { w[zero - off] } else { 0.0 };
            *o = stay * w_zero + (1.0 - stay) * w[(zero | 1) - off];
        }
    }

    /// Dense rendering, rows and columns in ascending word-index order.
    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>> {
        let len = self.word_len();
        if len > MAX_DENSE_WORD_LEN {
            return Err(Error::StateSpaceTooLarge {
                len,
                cap: MAX_DENSE_WORD_LEN,
            });
        }
        let n = self.dim();
        let mut dense = vec![vec![0.0; n]; n];
        for (pos, row) in dense.iter_mut().enumerate() {
            for (target, prob) in self.row(self.index_at(pos)).entries {
                row[self.position(target)] += prob;
            }
        }
        Ok(dense)
    }
}

/// A positive number stored as `mantissa · exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.log_scale.exp()
        }
    }

    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }
}

/// Sub-probability law of the word chain on the nonzero words, kept as a
/// normalized weight vector and an accumulated log of the surviving mass.
#[derive(Debug, Clone)]
pub struct ScaledDistribution {
    weights: Vec<f64>,
    scratch: Vec<f64>,
    log_scale: f64,
}

impl ScaledDistribution {
    /// Point mass at word `index` of the chain `q` (which must be `Q`).
    pub fn point_mass(q: &ChainMatrix, index: u64) -> Self {
        assert!(!q.is_full(), "scaled distributions live on Q");
        let mut weights = vec![0.0; q.dim()];
        weights[q.position(index)] = 1.0;
        Self {
            scratch: vec![0.0; q.dim()],
            weights,
            log_scale: 0.0,
        }
    }

    /// Law started from the all-ones word.
    pub fn all_ones(q: &ChainMatrix) -> Self {
        let top = (1u64 << q.word_len()) - 1;
        Self::point_mass(q, top)
    }

    /// One chain step; absorbed mass is dropped.
    pub fn step(&mut self, q: &ChainMatrix) {
        if self.log_scale == f64::NEG_INFINITY {
            return;
        }
        q.left_mul(&self.weights, &mut self.scratch);
        std::mem::swap(&mut self.weights, &mut self.scratch);
        let total: f64 = self.weights.iter().sum();
        if total > 0.0 {
            self.weights.iter_mut().for_each(|w| *w /= total);
            self.log_scale += total.ln();
        } else {
            self.log_scale = f64::NEG_INFINITY;
        }
    }

    /// Conditional law given non-absorption (sums to 1 unless absorbed).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Probability of not being absorbed.
    pub fn survival(&self) -> f64 {
        self.log_scale.exp()
    }

    /// Unnormalized sub-probabilities on the nonzero words.
    pub fn probabilities(&self) -> Vec<f64> {
        let s = self.survival();
        self.weights.iter().map(|w| w * s).collect()
    }

    /// Conditional mass (given non-absorption) of words satisfying `pred`,
    /// as a function of the word index.
    pub fn mass_where(&self, q: &ChainMatrix, pred: impl Fn(u64) -> bool) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(pos, _)| pred(q.index_at(*pos)))
            .map(|(_, w)| w)
            .sum()
    }

    /// `P(·)` of the same event, in scaled form.
    pub fn scaled_mass_where(&self, q: &ChainMatrix, pred: impl Fn(u64) -> bool) -> Scaled {
        Scaled {
            mantissa: self.mass_where(q, pred),
            log_scale: self.log_scale,
        }
    }
}

/// Exact `u_0, …, u_n` with `u_i = P(Y_i = 1)` from the all-ones start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct USequence {
    pub terms: Vec<Scaled>,
}

impl USequence {
    /// Horizon `n`.
    pub fn horizon(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn value(&self, i: usize) -> f64 {
        self.terms[i].value()
    }

    pub fn ln_value(&self, i: usize) -> f64 {
        self.terms[i].ln()
    }

    /// `u_{i+1} / u_i`; `None` when `u_i = 0` or `i + 1` is past the horizon.
    pub fn ratio(&self, i: usize) -> Option<f64> {
        let (a, b) = (self.terms.get(i)?, self.terms.get(i + 1)?);
        if a.mantissa == 0.0 {
            return None;
        }
        Some(b.mantissa / a.mantissa * (b.log_scale - a.log_scale).exp())
    }

    /// `(u_n / u_{n-w})^{1/w}`, the windowed decay-rate estimate.
    pub fn window_rate(&self, n: usize, window: usize) -> Option<f64> {
        if window == 0 || window > n || n > self.horizon() {
            return None;
        }
        let (a, b) = (&self.terms[n - window], &self.terms[n]);
        if a.mantissa == 0.0 {
            return None;
        }
        if b.mantissa == 0.0 {
            return Some(0.0);
        }
        Some(((b.ln() - a.ln()) / window as f64).exp())
    }
}

/// Bit mask of the newest coordinate `x_{k_m}`.
const LAST: u64 = 1;

pub fn u_sequence(params: &ModelParams, n: usize) -> Result<USequence> {
    if n < 1 {
        return Err(Error::Domain("horizon n must be ≥ 1".into()));
    }
    let q = build_q(params)?;
    Ok(u_sequence_on(&q, n))
}

pub fn u_sequence_on(q: &ChainMatrix, n: usize) -> USequence {
    let mut dist = ScaledDistribution::all_ones(q);
    let mut terms = Vec::with_capacity(n + 1);
    terms.push(dist.scaled_mass_where(q, |x| x & LAST != 0));
    for _ in 0..n {
        dist.step(q);
        terms.push(dist.scaled_mass_where(q, |x| x & LAST != 0));
    }
    USequence { terms }
}

/// Per-step joint statistics of the two-length chain.
///
/// Quantities are scaled by `exp(log_scale)`, the survival mass of
/// `X_{i-1}`; `u_i` is `P(Y_i = 1)`, `u_short = u_{i-l}`,
/// `u_long = u_{i-k}` and `joint = P(Y_{i-l} = Y_{i-k} = 1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointStep {
    pub i: usize,
    pub log_scale: f64,
    pub u_i: f64,
    pub u_short: f64,
    pub u_long: f64,
    pub joint: f64,
    /// `P(Y_{i-k} = 1 | Y_{i-l} = 1)`; for `l = 1` this is
    /// `P(Y_{i-k} = 1 | Y_{i-1} = 1)`. `None` when the condition has mass 0.
    pub ratio: Option<f64>,
}

impl JointStep {
    fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    /// `u_i - (p u_{i-l} + q u_{i-k} - pq P(Y_{i-l}=Y_{i-k}=1))`, unscaled.
    pub fn recursion_residual(&self, p: f64, q: f64) -> f64 {
        (self.u_i - (p * self.u_short + q * self.u_long - p * q * self.joint)) * self.scale()
    }

    /// Same residual relative to `u_i`.
    pub fn relative_recursion_residual(&self, p: f64, q: f64) -> f64 {
        (self.u_i - (p * self.u_short + q * self.u_long - p * q * self.joint)) / self.u_i
    }

    /// Returns `(lower, u_i, upper)` of the recursive sandwich
    /// `p(1-q)u_{i-l} + q u_{i-k} ≤ u_i ≤ p u_{i-l} + q(1-p^{k-l+1}) u_{i-k}`,
    /// all relative to `u_i`.
    pub fn sandwich(&self, p: f64, q: f64, l: u32, k: u32) -> (f64, f64, f64) {
        let lower = p * (1.0 - q) * self.u_short + q * self.u_long;
        let upper = p * self.u_short + q * (1.0 - p.powi((k - l + 1) as i32)) * self.u_long;
        (lower / self.u_i, 1.0, upper / self.u_i)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointStats {
    pub l: u32,
    pub k: u32,
    pub steps: Vec<JointStep>,
    /// Law of `X_n` over all `2^k` words, word 0 carrying the absorbed mass.
    pub final_distribution: Vec<f64>,
}

impl JointStats {
    /// Last defined `r_i`.
    pub fn last_ratio(&self) -> Option<f64> {
        self.steps.iter().rev().find_map(|s| s.ratio)
    }
}

pub fn joint_stats(params: &ModelParams, n: usize) -> Result<JointStats> {
    if params.m() != 2 {
        return Err(Error::Domain(format!(
            "joint statistics need exactly two lengths (m = {})",
            params.m()
        )));
    }
    if n < 1 {
        return Err(Error::Domain("horizon n must be ≥ 1".into()));
    }
    let (l, k) = (params.lengths()[0], params.lengths()[1]);
    let q = build_q(params)?;
    // In X_{i-1}: Y_{i-k} is x_1 (bit k-1), Y_{i-l} is x_{k-l+1} (bit l-1).
    let long_bit = 1u64 << (k - 1);
    let short_bit = 1u64 << (l - 1);
    let mut dist = ScaledDistribution::all_ones(&q);
    let mut steps = Vec::with_capacity(n);
    for i in 1..=n {
        let log_prev = dist.log_scale();
        let u_short = dist.mass_where(&q, |x| x & short_bit != 0);
        let u_long = dist.mass_where(&q, |x| x & long_bit != 0);
        let joint = dist.mass_where(&q, |x| x & short_bit != 0 && x & long_bit != 0);
        dist.step(&q);
        let u_i = if dist.log_scale() == f64::NEG_INFINITY {
            0.0
        } else {
            dist.mass_where(&q, |x| x & LAST != 0) * (dist.log_scale() - log_prev).exp()
        };
        let ratio = (u_short > 0.0).then(|| joint / u_short);
        steps.push(JointStep {
            i,
            log_scale: log_prev,
            u_i,
            u_short,
            u_long,
            joint,
            ratio,
        });
    }
    let survival = dist.survival();
    let mut final_distribution = vec![1.0 - survival];
    final_distribution.extend(dist.probabilities());
    Ok(JointStats {
        l,
        k,
        steps,
        final_distribution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two(p: f64, q: f64) -> ModelParams {
        ModelParams::two_edge(2, 1, 2, p, q).unwrap()
    }

    /// Brute-force evaluation of the defining formula for `Q(x, y)`.
    fn q_entry(params: &ModelParams, x: u64, y: u64) -> f64 {
        let len = params.word_len();
        let bit = |w: u64, i: u32| (w >> (len - i)) & 1;
        if (1..len).any(|i| bit(y, i) != bit(x, i + 1)) {
            return 0.0;
        }
        let stay: f64 = params
            .lengths()
            .iter()
            .zip(params.probs())
            .map(|(&k, &p)| (1.0 - p).powi(bit(x, len - k + 1) as i32))
            .product();
        if bit(y, len) == 0 {
            stay
        } else {
            1.0 - stay
        }
    }

    #[test]
    fn matches_displayed_three_by_three() {
        let (p, q) = (0.3, 0.2);
        let dense = build_q(&two(p, q)).unwrap().to_dense().unwrap();
        let a = (1.0 - p) * (1.0 - q);
        let expected = [[0.0, 1.0 - p, p], [q, 0.0, 0.0], [0.0, a, 1.0 - a]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((dense[i][j] - expected[i][j]).abs() <= 1e-15);
            }
        }
        let m = build_q(&two(p, q)).unwrap();
        let row = m.row(2);
        assert_eq!(row.entries.len(), 1);
        assert_eq!(row.entries[0].0, 1);
        assert!((row.entries[0].1 - q).abs() < 1e-15 && (row.absorbed - (1.0 - q)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_rows() {
        let zero = build_q(&ModelParams::new(2, vec![1, 3], vec![0.0, 0.0]).unwrap()).unwrap();
        for x in 1..8 {
            let row = zero.row(x);
            let nonabsorbed = ((x << 1) & 7) != 0;
            assert_eq!(row.entries.len(), usize::from(nonabsorbed));
            if nonabsorbed {
                assert_eq!(row.entries[0], ((x << 1) & 7, 1.0));
            } else {
                assert_eq!(row.absorbed, 1.0);
            }
        }
        let one = build_q(&ModelParams::new(2, vec![1, 3], vec![1.0, 1.0]).unwrap()).unwrap();
        for x in 1..8u64 {
            let row = one.row(x);
            if x & 0b101 != 0 {
                assert_eq!(row.entries, vec![(((x << 1) & 7) | 1, 1.0)]);
            }
        }
    }

    #[test]
    fn dense_equals_formula_exhaustively() {
        let cases = [
            (vec![1, 2], vec![0.3, 0.2]),
            (vec![1, 3], vec![0.1, 0.7]),
            (vec![2, 5], vec![0.4, 0.05]),
            (vec![1, 2, 3], vec![0.1, 0.2, 0.3]),
            (vec![3, 4, 7, 12], vec![0.9, 0.01, 0.5, 0.2]),
        ];
        for (lengths, probs) in cases {
            let params = ModelParams::new(3, lengths, probs).unwrap();
            let m = build_q(&params).unwrap();
            let dense = m.to_dense().unwrap();
            let n = m.dim();
            for i in 0..n {
                let mut sum = 0.0;
                for j in 0..n {
                    let expected = q_entry(&params, m.index_at(i), m.index_at(j));
                    assert!((dense[i][j] - expected).abs() <= 1e-15);
                    sum += dense[i][j];
                }
                assert!((sum + m.row(m.index_at(i)).absorbed - 1.0).abs() <= 1e-14);
                assert!(m.row(m.index_at(i)).entries.len() <= 2);
            }
        }
    }

    #[test]
    fn full_chain_contains_q() {
        let params = two(0.3, 0.2);
        let q = build_q(&params).unwrap().to_dense().unwrap();
        let full = build_full_chain(&params).unwrap().to_dense().unwrap();
        assert_eq!(full.len(), 4);
        assert_eq!(full[0], vec![1.0, 0.0, 0.0, 0.0]);
        for (i, row) in full.iter().enumerate() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
            if i > 0 {
                assert_eq!(&row[1..], &q[i - 1][..]);
            }
        }
    }

    #[test]
    fn size_cap() {
        let params = ModelParams::new(2, vec![1, 25], vec![0.1, 0.1]).unwrap();
        assert!(matches!(build_q(&params), Err(Error::StateSpaceTooLarge { .. })));
        let params = ModelParams::new(2, vec![1, 13], vec![0.1, 0.1]).unwrap();
        assert!(build_q(&params).unwrap().to_dense().is_err());
    }

    #[test]
    fn left_and_right_products_agree_with_dense() {
        let params = ModelParams::new(2, vec![1, 2, 4], vec![0.2, 0.3, 0.4]).unwrap();
        for m in [build_q(&params).unwrap(), build_full_chain(&params).unwrap()] {
            let dense = m.to_dense().unwrap();
            let n = m.dim();
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin().abs()).collect();
            let mut out = vec![0.0; n];
            m.left_mul(&v, &mut out);
            for j in 0..n {
                let e: f64 = (0..n).map(|i| v[i] * dense[i][j]).sum();
                assert!((out[j] - e).abs() < 1e-15);
            }
            m.right_mul(&v, &mut out);
            for i in 0..n {
                let e: f64 = (0..n).map(|j| dense[i][j] * v[j]).sum();
                assert!((out[i] - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn first_term_and_p_zero_closed_form() {
        let (p, q) = (0.3, 0.2);
        let u = u_sequence(&two(p, q), 5).unwrap();
        assert_eq!(u.value(0), 1.0);
        assert!((u.value(1) - (p + q - p * q)).abs() < 1e-15);

        let q = 0.3;
        let u = u_sequence(&two(0.0, q), 40).unwrap();
        for n in 1..=40usize {
            let expected = q.powi(n.div_ceil(2) as i32);
            assert!((u.value(n) / expected - 1.0).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn survives_long_horizons_without_underflow() {
        let u = u_sequence(&two(0.1, 0.05), 1_000_000).unwrap();
        assert_eq!(u.value(1_000_000), 0.0);
        assert!(u.ln_value(1_000_000).is_finite());
        assert!(u.window_rate(1_000_000, 2).unwrap() > 0.2);
    }

    #[test]
    fn absorbed_sequence_reports_zero() {
        let u = u_sequence(&two(0.0, 0.0), 5).unwrap();
        assert_eq!(u.value(1), 0.0);
        assert_eq!(u.ratio(1), None);
    }

    #[test]
    fn distribution_matches_matrix_power() {
        for (lengths, probs) in [
            (vec![1, 2], vec![0.3, 0.2]),
            (vec![2, 3, 6], vec![0.5, 0.1, 0.3]),
            (vec![1, 5], vec![0.05, 0.6]),
        ] {
            let params = ModelParams::new(2, lengths, probs).unwrap();
            let full = build_full_chain(&params).unwrap();
            let dense = full.to_dense().unwrap();
            let q = build_q(&params).unwrap();
            let n = full.dim();
            let mut row = vec![0.0; n];
            row[n - 1] = 1.0;
            let mut dist = ScaledDistribution::all_ones(&q);
            for _ in 0..10 {
                row = (0..n).map(|j| (0..n).map(|i| row[i] * dense[i][j]).sum()).collect();
                dist.step(&q);
                let probs = dist.probabilities();
                for j in 1..n {
                    assert!((probs[j - 1] - row[j]).abs() < 1e-12);
                }
                assert!((1.0 - dist.survival() - row[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn joint_stats_recursion_and_sandwich() {
        let (p, q) = (0.25, 0.14);
        let stats = joint_stats(&two(p, q), 3000).unwrap();
        for s in &stats.steps {
            assert!(s.recursion_residual(p, q).abs() <= 1e-12);
            assert!(s.relative_recursion_residual(p, q).abs() <= 1e-12);
            let (lo, mid, hi) = s.sandwich(p, q, 1, 2);
            assert!(lo <= mid + 1e-12 && mid <= hi + 1e-12, "step {}", s.i);
            assert!(s.joint <= s.u_short.min(s.u_long) + 1e-15);
        }
        let total: f64 = stats.final_distribution.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(joint_stats(&ModelParams::new(2, vec![1], vec![0.2]).unwrap(), 3).is_err());
    }

    #[test]
    fn upper_sandwich_fails_for_long_short_edges() {
        // With l = 2 the short edge from v_{i-l} never lands on v_{i-k}, so
        // P(Y_{i-l}=1 | Y_{i-k}=1) ≥ p^{k-l} has no reason to hold.
        let (p, q) = (0.1, 0.0757);
        let params = ModelParams::two_edge(2, 2, 3, p, q).unwrap();
        let stats = joint_stats(&params, 400).unwrap();
        let violated = stats.steps.iter().any(|s| {
            let (_, mid, hi) = s.sandwich(p, q, 2, 3);
            hi < mid - 1e-9
        });
        assert!(violated);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn u_monotone_in_horizon_and_parameters(
            p in 0.0f64..1.0, q in 0.0f64..1.0, dp in 0.0f64..0.3, dq in 0.0f64..0.3,
            lk in prop_oneof![Just((1u32, 2u32)), Just((1, 3)), Just((2, 3)), Just((2, 5))],
        ) {
            let small = ModelParams::two_edge(2, lk.0, lk.1, p, q).unwrap();
            let big = ModelParams::two_edge(2, lk.0, lk.1, (p + dp).min(1.0), (q + dq).min(1.0)).unwrap();
            let us = u_sequence(&small, 60).unwrap();
            let ub = u_sequence(&big, 60).unwrap();
            for i in 0..60 {
                prop_assert!(us.value(i + 1) <= us.value(i) * (1.0 + 1e-14) + 1e-300);
                prop_assert!(us.value(i) <= ub.value(i) * (1.0 + 1e-12) + 1e-300);
            }
        }
    }
}
