//! Spectral radius, characteristic polynomial and Yaglom limit of `Q`.
//!
//! With every `p_j > 0` and coprime lengths `Q` is primitive, so plain power
//! iteration on the sparse rows converges to the Perron root together with
//! both Perron vectors. When some `p_j = 0` the matrix may be reducible or
//! periodic; the radius is then read off the growth of `‖e Q^n‖_1` from the
//! all-ones word (Gelfand's formula), averaged over a window that is a
//! multiple of the period of the active lengths.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dense::{faddeev_leverrier, horner, lu_determinant};
use crate::error::{Error, Result};
use crate::markov::{ChainMatrix, MAX_DENSE_WORD_LEN};
use crate::model::{gcd, ModelParams};

/// Largest word length for the Faddeev–LeVerrier coefficient route.
pub const MAX_COEFF_WORD_LEN: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    /// Relative change of the windowed estimate.
    pub tol: f64,
    /// Max-norm eigen-residual for normalized vectors.
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            residual_tol: 1e-11,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    PowerPrimitive,
    WindowAveraged,
    ClosedFormDegenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub rho: f64,
    /// Right Perron vector, normalized to sum 1 (positions follow word index - 1).
    pub right_vector: Vec<f64>,
    /// Left Perron vector (the Yaglom limit), normalized to sum 1.
    pub left_vector: Vec<f64>,
    pub iterations: usize,
    /// `max(‖vQ - ρv‖_∞, ‖Qw - ρw‖_∞)` for power iteration; the last relative
    /// change of the windowed estimate for the other methods.
    pub residual: f64,
    pub method: SpectralMethod,
}

/// `ρ_Q` of a gcd-reduced instance.
pub fn spectral_radius(q: &ChainMatrix, opts: &PowerOptions) -> Result<SpectralResult> {
    if q.is_full() {
        return Err(Error::Domain(
            "spectral radius is taken on Q, not on the full chain".into(),
        ));
    }
    let params = q.params();
    let g = params.gcd();
    if g != 1 {
        return Err(Error::NotReduced(g));
    }
    if params.all_positive() {
        return power_primitive(q, opts);
    }
    let active = active_terms(params);
    let mut result = gelfand_radius(q, degenerate_window(params), opts)?;
    match active.as_slice() {
        [] => {
            result.rho = 0.0;
            result.method = SpectralMethod::ClosedFormDegenerate;
        }
        &[(k, p)] => {
            result.rho = p.powf(1.0 / k as f64);
            result.method = SpectralMethod::ClosedFormDegenerate;
        }
        _ => {}
    }
    Ok(result)
}

fn active_terms(params: &ModelParams) -> Vec<(u32, f64)> {
    params
        .lengths()
        .iter()
        .zip(params.probs())
        .filter(|(_, &p)| p > 0.0)
        .map(|(&k, &p)| (k, p))
        .collect()
}

/// Smallest multiple of the active-length period that is `≥ k_m`.
pub fn degenerate_window(params: &ModelParams) -> usize {
    let period = params.active_lengths().into_iter().fold(0, gcd).max(1) as usize;
    let len = params.word_len() as usize;
    len.div_ceil(period) * period
}

fn normalize(v: &mut [f64]) -> f64 {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    s
}

fn residual(next: &[f64], prev: &[f64], rho: f64) -> f64 {
    next.iter()
        .zip(prev)
        .map(|(a, b)| (a - rho * b).abs())
        .fold(0.0, f64::max)
}

fn power_primitive(q: &ChainMatrix, opts: &PowerOptions) -> Result<SpectralResult> {
    let n = q.dim();
    let window = q.word_len() as usize;
    let mut left = vec![1.0 / n as f64; n];
    let mut right = left.clone();
    let mut next_left = vec![0.0; n];
    let mut next_right = vec![0.0; n];
    let mut log_growth: VecDeque<f64> = VecDeque::with_capacity(window + 1);
    let mut estimate = f64::NAN;
    let mut change = f64::INFINITY;
    let mut res = f64::INFINITY;
    for it in 1..=opts.max_iter {
        q.left_mul(&left, &mut next_left);
        q.right_mul(&right, &mut next_right);
        let growth: f64 = next_left.iter().sum();
        log_growth.push_back(growth.ln());
        if log_growth.len() > window {
            log_growth.pop_front();
        }
        if log_growth.len() == window {
            let windowed = (log_growth.iter().sum::<f64>() / window as f64).exp();
            change = ((windowed - estimate) / windowed).abs();
            estimate = windowed;
            if change < opts.tol {
                res = residual(&next_left, &left, estimate)
                    .max(residual(&next_right, &right, estimate));
            }
        }
        normalize(&mut next_left);
        normalize(&mut next_right);
        std::mem::swap(&mut left, &mut next_left);
        std::mem::swap(&mut right, &mut next_right);
        if change < opts.tol && res < opts.residual_tol {
            return Ok(SpectralResult {
                rho: estimate,
                right_vector: right,
                left_vector: left,
                iterations: it,
                residual: res,
                method: SpectralMethod::PowerPrimitive,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        estimate,
        residual: res.min(change),
    })
}

/// Window-averaged growth rate of `‖e_1 Q^n‖_1` from the all-ones word.
///
/// Valid for any instance, reduced or not; when the active lengths share a
/// period `g`, `window` must be a multiple of `g`. Convergence requires the
/// relative change of the estimate to stay below `tol` for `window`
/// consecutive steps.
pub fn gelfand_radius(
    q: &ChainMatrix,
    window: usize,
    opts: &PowerOptions,
) -> Result<SpectralResult> {
    if q.is_full() || window == 0 {
        return Err(Error::Domain("Gelfand estimate needs Q and a window ≥ 1".into()));
    }
    let n = q.dim();
    let mut v = vec![0.0; n];
    v[n - 1] = 1.0;
    let mut next = vec![0.0; n];
    let mut log_norm: VecDeque<f64> = VecDeque::with_capacity(window + 1);
    log_norm.push_back(0.0);
    let mut estimate = f64::NAN;
    let mut stable = 0;
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        q.left_mul(&v, &mut next);
        let s = normalize(&mut next);
        std::mem::swap(&mut v, &mut next);
        if s == 0.0 {
            return Ok(SpectralResult {
                rho: 0.0,
                right_vector: vec![1.0 / n as f64; n],
                left_vector: next,
                iterations: it,
                residual: 0.0,
                method: SpectralMethod::WindowAveraged,
            });
        }
        let last = *log_norm.back().expect("non-empty");
        log_norm.push_back(last + s.ln());
        if log_norm.len() > window + 1 {
            log_norm.pop_front();
        }
        if log_norm.len() == window + 1 {
            let windowed = ((log_norm[window] - log_norm[0]) / window as f64).exp();
            change = ((windowed - estimate) / windowed).abs();
            estimate = windowed;
            stable = if change < opts.tol { stable + 1 } else { 0 };
            if stable >= window {
                return Ok(SpectralResult {
                    rho: estimate,
                    right_vector: vec![1.0 / n as f64; n],
                    left_vector: v,
                    iterations: it,
                    residual: change,
                    method: SpectralMethod::WindowAveraged,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        estimate,
        residual: change,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPolyValue {
    pub at: f64,
    /// `det(xI - Q)`, monic in `x`.
    pub value: f64,
}

/// `P_Q(x) = det(xI - Q)` by dense LU.
pub fn char_poly_at(q: &ChainMatrix, x: f64) -> Result<CharPolyValue> {
    let mut a = dense_or_err(q)?;
    for (i, row) in a.iter_mut().enumerate() {
        row.iter_mut().for_each(|v| *v = -*v);
        row[i] += x;
    }
    Ok(CharPolyValue {
        at: x,
        value: lu_determinant(a),
    })
}

fn dense_or_err(q: &ChainMatrix) -> Result<Vec<Vec<f64>>> {
    if q.is_full() {
        return Err(Error::Domain("characteristic polynomial is taken on Q".into()));
    }
    q.to_dense().map_err(|_| {
        Error::Domain(format!(
            "k_m = {} exceeds the dense cap {MAX_DENSE_WORD_LEN}; use the ρ_Q = 1/d criterion",
            q.word_len()
        ))
    })
}

/// Coefficients of `P_Q`, leading first, by Faddeev–LeVerrier (`k_m ≤ 6`).
pub fn char_poly_coefficients(q: &ChainMatrix) -> Result<Vec<f64>> {
    if q.word_len() > MAX_COEFF_WORD_LEN {
        return Err(Error::StateSpaceTooLarge {
            len: q.word_len(),
            cap: MAX_COEFF_WORD_LEN,
        });
    }
    Ok(faddeev_leverrier(&dense_or_err(q)?))
}

/// Evaluates a leading-first coefficient list.
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    horner(coeffs, x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Yaglom {
    pub rho: f64,
    /// Quasi-stationary law on the nonzero words.
    pub lambda: Vec<f64>,
    /// `λ(x_1 = x_{k-l+1} = 1) / λ(x_{k-l+1} = 1)`; for `l = 1` this is
    /// `λ(x_1 = x_k = 1) / λ(x_k = 1)`.
    pub r_limit: f64,
}

/// Yaglom limit and the limiting ratio `r_{p,q}` of a two-length instance.
pub fn yaglom(q: &ChainMatrix, opts: &PowerOptions) -> Result<Yaglom> {
    let params = q.params();
    if params.m() != 2 {
        return Err(Error::Domain("Yaglom ratio needs exactly two lengths".into()));
    }
    if !params.all_positive() {
        return Err(Error::Domain("Yaglom ratio needs all p_j > 0".into()));
    }
    let result = spectral_radius(q, opts)?;
    let (l, k) = (params.lengths()[0], params.lengths()[1]);
    let short_bit = 1u64 << (l - 1);
    let long_bit = 1u64 << (k - 1);
    let mass = |pred: &dyn Fn(u64) -> bool| -> f64 {
        result
            .left_vector
            .iter()
            .enumerate()
            .filter(|(pos, _)| pred(q.index_at(*pos)))
            .map(|(_, w)| w)
            .sum()
    };
    let denominator = mass(&|x| x & short_bit != 0);
    if denominator <= 0.0 {
        return Err(Error::UndefinedRatio(
            "Yaglom mass of {x: x_{k-l+1} = 1} is zero".into(),
        ));
    }
    let numerator = mass(&|x| x & short_bit != 0 && x & long_bit != 0);
    Ok(Yaglom {
        rho: result.rho,
        lambda: result.left_vector,
        r_limit: numerator / denominator,
    })
}

/// `(p^k + q^l - p^k q^l)^{1/(lk)}`, a lower bound on `ρ_Q`.
pub fn supermult_lower_bound(params: &ModelParams) -> Result<f64> {
    if params.m() != 2 {
        return Err(Error::Domain("bound needs exactly two lengths".into()));
    }
    let (l, k) = (params.lengths()[0] as i32, params.lengths()[1] as i32);
    let (p, q) = (params.probs()[0], params.probs()[1]);
    let (pk, ql) = (p.powi(k), q.powi(l));
    Ok((pk + ql - pk * ql).powf(1.0 / (l * k) as f64))
}
