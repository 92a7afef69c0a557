//! Locating the critical surface `ρ_Q = 1/d`, closed forms, bounds and probes.
//!
//! `ρ_Q` is non-decreasing in every `p_j`, so for a free coordinate the set
//! `{t : ρ_Q(…, p_j = t, …) ≥ 1/d}` is an interval `[t*, 1/d^{k_j}]` and plain
//! bisection on the sign of `ρ_Q - 1/d` is globally reliable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::build_q;
use crate::model::ModelParams;
use crate::spectral::{spectral_radius, yaglom, PowerOptions, SpectralMethod};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalOptions {
    /// Bracket width at which bisection stops.
    pub tol: f64,
    pub power: PowerOptions,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            power: PowerOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalStatus {
    /// Sign change located inside the bracket.
    Interior,
    /// Already `ρ_Q ≥ 1/d` with the free coordinate at 0.
    AtLowerBoundary,
    /// `ρ_Q < 1/d` on the whole bracket; no interior critical value.
    NoInteriorCritical,
}

/// The four closed-form bounds on `q_c(p)` of a two-length instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub easy_lo: f64,
    pub tight_lo: f64,
    pub tight_hi: f64,
    pub easy_hi: f64,
}

impl BoundSet {
    pub fn new(p: f64, d: u64, l: u32, k: u32) -> Result<Self> {
        let (easy_lo, easy_hi) = easy_bounds(p, d, l, k)?;
        let (tight_lo, tight_hi) = tight_bounds(p, d, l, k)?;
        Ok(Self {
            easy_lo,
            tight_lo,
            tight_hi,
            easy_hi,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSample {
    /// Probability vector with the free coordinate at its critical value.
    pub probs: Vec<f64>,
    /// 0-based index of the free coordinate.
    pub free_index: usize,
    pub value: f64,
    pub bracket_width: f64,
    /// `ρ_Q` of the gcd-reduced instance at the returned point.
    pub rho: f64,
    /// `1/d` of the gcd-reduced instance.
    pub target: f64,
    /// Bounds on `q_c(p)`, present when `m = 2` and `q` is free.
    pub bounds: Option<BoundSet>,
    pub status: CriticalStatus,
    pub method: SpectralMethod,
    /// gcd of the lengths; the reduced instance has degree `d^gcd`.
    pub reduction: u32,
}

/// Critical value of coordinate `free` (0-based) with the others held fixed.
pub fn critical_value(
    params: &ModelParams,
    free: usize,
    opts: &CriticalOptions,
) -> Result<CriticalSample> {
    if free >= params.m() {
        return Err(Error::Domain(format!(
            "free coordinate {} out of range for m = {}",
            free + 1,
            params.m()
        )));
    }
    let reduced = params.reduce_gcd()?;
    let target = 1.0 / reduced.d() as f64;
    let rho_at = |t: f64| -> Result<(f64, SpectralMethod)> {
        let q = build_q(&reduced.with_prob(free, t)?)?;
        spectral_radius(&q, &opts.power).map(|r| (r.rho, r.method))
    };
    let upper = params.box_upper(free);
    let (mut lo, mut hi) = (0.0, upper);
    let status = if rho_at(lo)?.0 >= target {
        hi = lo;
        CriticalStatus::AtLowerBoundary
    } else if rho_at(hi)?.0 < target {
        lo = hi;
        CriticalStatus::NoInteriorCritical
    } else {
        while hi - lo > opts.tol {
            let mid = 0.5 * (lo + hi);
            if rho_at(mid)?.0 >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        CriticalStatus::Interior
    };
    let value = 0.5 * (lo + hi);
    let (rho, method) = rho_at(value)?;
    let bounds = if params.m() == 2 && free == 1 {
        let (l, k) = (params.lengths()[0], params.lengths()[1]);
        Some(BoundSet::new(params.probs()[0], params.d(), l, k)?)
    } else {
        None
    };
    let mut probs = params.probs().to_vec();
    probs[free] = value;
    Ok(CriticalSample {
        probs,
        free_index: free,
        value,
        bracket_width: hi - lo,
        rho,
        target,
        bounds,
        status,
        method,
        reduction: params.gcd(),
    })
}

/// `q_c(p)` for a two-length instance by bisection.
pub fn qc_bisect(d: u64, l: u32, k: u32, p: f64, opts: &CriticalOptions) -> Result<f64> {
    let params = ModelParams::two_edge(d, l, k, p, 0.0)?;
    Ok(critical_value(&params, 1, opts)?.value)
}

/// Closed-form `p_c(q)` for `(l, k) = (1, 2)`, valid for `q ≤ 1/d²`.
pub fn pc_explicit_k2(q: f64, d: u64) -> Result<f64> {
    let df = d as f64;
    if !(0.0..=1.0 / (df * df)).contains(&q) {
        return Err(Error::Domain(format!("q = {q} outside [0, 1/d²]")));
    }
    let base = q * q - q / df - q / (df * df);
    Ok((base + 1.0 / (df * df * df)) / (base + 1.0 / (df * df)))
}

/// Closed-form `q_c(p)` for `(l, k) = (1, 2)`, valid for `p ≤ 1/d`.
pub fn qc_explicit_k2(p: f64, d: u64) -> Result<f64> {
    let df = d as f64;
    if !(0.0..=1.0 / df).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1/d]")));
    }
    let radicand = (df - 1.0) * (3.0 * df * p + df + p - 1.0);
    Ok(1.0 / (2.0 * df) + 1.0 / (2.0 * df * df)
        - radicand.sqrt() / (2.0 * df * df * (1.0 - p).sqrt()))
}

fn check_box(p: f64, d: u64, l: u32) -> Result<f64> {
    let dl = (d as f64).powi(l as i32);
    if !(0.0..=1.0 / dl).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1/d^l]")));
    }
    Ok(dl)
}

fn check_lengths(l: u32, k: u32) -> Result<()> {
    if l == 0 || l >= k {
        return Err(Error::Domain(format!("need 1 ≤ l < k (got l = {l}, k = {k})")));
    }
    Ok(())
}

/// Galton-Watson comparison bounds `((1-pd^l)/d^k, (1-pd^l)/((1-p)d^k))`.
pub fn easy_bounds(p: f64, d: u64, l: u32, k: u32) -> Result<(f64, f64)> {
    check_lengths(l, k)?;
    let dl = check_box(p, d, l)?;
    let dk = (d as f64).powi(k as i32);
    let num = 1.0 - p * dl;
    Ok((num / dk, num / ((1.0 - p) * dk)))
}

/// Recursive-sandwich bounds
/// `((1-pd^l)/(d^k(1-p^{k-l+1})), (1-pd^l)/(d^k - pd^l))`.
pub fn tight_bounds(p: f64, d: u64, l: u32, k: u32) -> Result<(f64, f64)> {
    check_lengths(l, k)?;
    let dl = check_box(p, d, l)?;
    let dk = (d as f64).powi(k as i32);
    let num = 1.0 - p * dl;
    Ok((
        num / (dk * (1.0 - p.powi((k - l + 1) as i32))),
        num / (dk - p * dl),
    ))
}

/// `g(x) = x^k - p(1-q)x^{k-l} - q`, whose positive root is the growth rate
/// of the lower comparison recursion `v_i = p(1-q)v_{i-l} + q v_{i-k}`.
pub fn bound_polynomial(p: f64, q: f64, l: u32, k: u32, x: f64) -> f64 {
    x.powi(k as i32) - p * (1.0 - q) * x.powi((k - l) as i32) - q
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub p: f64,
    pub q_c: f64,
    pub easy_lo: f64,
    pub tight_lo: f64,
    pub tight_hi: f64,
    pub easy_hi: f64,
}

/// `q_c` and its bounds on a uniform grid of `p ∈ [0, 1/d^l]`.
pub fn curve_sample(
    d: u64,
    l: u32,
    k: u32,
    grid_n: usize,
    opts: &CriticalOptions,
) -> Result<Vec<CurveRow>> {
    if grid_n < 2 {
        return Err(Error::Domain("grid needs at least 2 points".into()));
    }
    check_lengths(l, k)?;
    let upper = (d as f64).powi(-(l as i32));
    (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let p = if i + 1 == grid_n {
                upper
            } else {
                upper * i as f64 / (grid_n - 1) as f64
            };
            let q_c = qc_bisect(d, l, k, p, opts)?;
            let b = BoundSet::new(p, d, l, k)?;
            Ok(CurveRow {
                p,
                q_c,
                easy_lo: b.easy_lo,
                tight_lo: b.tight_lo,
                tight_hi: b.tight_hi,
                easy_hi: b.easy_hi,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub p1: f64,
    pub p2: f64,
    /// Critical `p3`; 0 outside the region (already supercritical at `p3 = 0`).
    pub p3_c: f64,
    pub in_region: bool,
}

/// Critical `p3` over a `grid_n × grid_n` grid of `(p1, p2)`, `p1`-major.
pub fn surface_sample(
    d: u64,
    lengths: &[u32],
    grid_n: usize,
    opts: &CriticalOptions,
) -> Result<Vec<SurfaceRow>> {
    if lengths.len() != 3 {
        return Err(Error::Domain("surface needs exactly three lengths".into()));
    }
    if grid_n < 2 {
        return Err(Error::Domain("grid needs at least 2 points".into()));
    }
    let base = ModelParams::new(d, lengths.to_vec(), vec![0.0; 3])?;
    let axis = |j: usize, i: usize| base.box_upper(j) * i as f64 / (grid_n - 1) as f64;
    (0..grid_n * grid_n)
        .into_par_iter()
        .map(|cell| {
            let (p1, p2) = (axis(0, cell / grid_n), axis(1, cell % grid_n));
            let sample = critical_value(&base.with_probs(vec![p1, p2, 0.0])?, 2, opts)?;
            let in_region = sample.status == CriticalStatus::Interior && sample.value > opts.tol;
            Ok(SurfaceRow {
                p1,
                p2,
                p3_c: if in_region { sample.value } else { 0.0 },
                in_region,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeProbe {
    pub d: u64,
    pub k: u32,
    pub steps: [f64; 2],
    /// One-sided difference quotients `(q_c(1/d) - q_c(1/d - h)) / h`.
    pub quotients: [f64; 2],
    /// Richardson extrapolation of the two quotients.
    pub slope: f64,
    /// `-d/(d^k - 1)`.
    pub expected: f64,
}

pub const SLOPE_STEPS: [f64; 2] = [1e-3, 1e-4];

/// Slope of `q_c` at `p = 1/d` for `l = 1`.
pub fn slope_probe(d: u64, k: u32, opts: &CriticalOptions) -> Result<SlopeProbe> {
    let edge = 1.0 / d as f64;
    let at_edge = qc_bisect(d, 1, k, edge, opts)?;
    let [h1, h2] = SLOPE_STEPS;
    let quotient = |h: f64| -> Result<f64> { Ok((at_edge - qc_bisect(d, 1, k, edge - h, opts)?) / h) };
    let (s1, s2) = (quotient(h1)?, quotient(h2)?);
    // First-order error term cancels.
    let slope = (h1 * s2 - h2 * s1) / (h1 - h2);
    Ok(SlopeProbe {
        d,
        k,
        steps: SLOPE_STEPS,
        quotients: [s1, s2],
        slope,
        expected: -(d as f64) / ((d as f64).powi(k as i32) - 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityRow {
    pub p: f64,
    pub q_c: f64,
    /// Central second difference with the grid step `h`.
    pub second_diff: f64,
    /// Same with step `h/2`.
    pub second_diff_half: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityProbe {
    pub d: u64,
    pub k: u32,
    pub step: f64,
    pub rows: Vec<ConvexityRow>,
    /// `+`, `-` or `0` per row, from `second_diff`.
    pub sign_pattern: String,
    /// First grid point where the sign of `second_diff` changes, if any.
    pub first_sign_change: Option<f64>,
}

/// Second differences of `q_c` on interior points of a uniform grid of
/// `[0, p_max]`, `l = 1`.
pub fn convexity_probe(
    d: u64,
    k: u32,
    p_max: f64,
    grid_n: usize,
    opts: &CriticalOptions,
) -> Result<ConvexityProbe> {
    if grid_n < 3 {
        return Err(Error::Domain("convexity probe needs at least 3 grid points".into()));
    }
    if !(p_max > 0.0 && p_max <= 1.0 / d as f64) {
        return Err(Error::Domain(format!("p_max = {p_max} outside (0, 1/d]")));
    }
    let fine_n = 2 * grid_n - 1;
    let half = p_max / (fine_n - 1) as f64;
    let fine: Vec<f64> = (0..fine_n)
        .into_par_iter()
        .map(|i| qc_bisect(d, 1, k, (half * i as f64).min(p_max), opts))
        .collect::<Result<_>>()?;
    let h = 2.0 * half;
    let rows: Vec<ConvexityRow> = (1..grid_n - 1)
        .map(|i| {
            let c = 2 * i;
            ConvexityRow {
                p: half * c as f64,
                q_c: fine[c],
                second_diff: (fine[c - 2] - 2.0 * fine[c] + fine[c + 2]) / (h * h),
                second_diff_half: (fine[c - 1] - 2.0 * fine[c] + fine[c + 1]) / (half * half),
            }
        })
        .collect();
    let sign = |x: f64| match x.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Greater) => '+',
        Some(std::cmp::Ordering::Less) => '-',
        _ => '0',
    };
    let sign_pattern: String = rows.iter().map(|r| sign(r.second_diff)).collect();
    let first_sign_change = rows
        .windows(2)
        .find(|w| sign(w[0].second_diff) != sign(w[1].second_diff))
        .map(|w| w[1].p);
    Ok(ConvexityProbe {
        d,
        k,
        step: h,
        rows,
        sign_pattern,
        first_sign_change,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub d: u64,
    pub k: u32,
    pub p: f64,
    pub q_c: f64,
    pub r_limit: f64,
    /// `(1 - pd) / (d^k - p r d)`.
    pub predicted: f64,
    pub residual: f64,
}

/// Compares bisected `q_c(p)` with `(1 - pd)/(d^k - p r_{p,q_c} d)`, `l = 1`.
pub fn self_consistency_check(
    d: u64,
    k: u32,
    p: f64,
    opts: &CriticalOptions,
) -> Result<ConsistencyCheck> {
    let df = d as f64;
    if !(p > 0.0 && p < 1.0 / df) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1/d)")));
    }
    let q_c = qc_bisect(d, 1, k, p, opts)?;
    let params = ModelParams::two_edge(d, 1, k, p, q_c)?;
    let r_limit = yaglom(&build_q(&params)?, &opts.power)?.r_limit;
    let predicted = (1.0 - p * df) / (df.powi(k as i32) - p * r_limit * df);
    Ok(ConsistencyCheck {
        d,
        k,
        p,
        q_c,
        r_limit,
        predicted,
        residual: (q_c - predicted).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> CriticalOptions {
        CriticalOptions::default()
    }

    #[test]
    fn single_length_thresholds() {
        let params = ModelParams::two_edge(2, 1, 2, 0.0, 0.0).unwrap();
        let s = critical_value(&params, 1, &opts()).unwrap();
        assert!((s.value - 0.25).abs() <= 1e-11);

        let params = ModelParams::new(2, vec![1, 2, 3], vec![0.0, 0.0, 0.0]).unwrap();
        let s = critical_value(&params, 2, &opts()).unwrap();
        assert!((s.value - 0.125).abs() <= 1e-11);
        assert!(s.bounds.is_none());

        let params = ModelParams::new(3, vec![1], vec![0.0]).unwrap();
        let s = critical_value(&params, 0, &opts()).unwrap();
        assert!((s.value - 1.0 / 3.0).abs() <= 1e-11);
    }

    #[test]
    fn interior_point_matches_closed_form() {
        let params = ModelParams::two_edge(2, 1, 2, 0.25, 0.0).unwrap();
        let s = critical_value(&params, 1, &opts()).unwrap();
        assert_eq!(s.status, CriticalStatus::Interior);
        assert!((s.value - 0.135644).abs() < 1e-6);
        assert!((s.value - qc_explicit_k2(0.25, 2).unwrap()).abs() < 1e-10);
        assert!(s.bracket_width <= 1e-11);
        assert!((s.rho - 0.5).abs() < 1e-9);
        let b = s.bounds.unwrap();
        assert!(b.easy_lo <= b.tight_lo && b.tight_lo <= s.value);
        assert!(s.value <= b.tight_hi && b.tight_hi <= b.easy_hi);
    }

    #[test]
    fn boundary_statuses() {
        // p_1, p_2 alone already supercritical: the free p_3 sits at 0.
        let params = ModelParams::new(2, vec![1, 2, 3], vec![0.5, 0.25, 0.0]).unwrap();
        let s = critical_value(&params, 2, &opts()).unwrap();
        assert_eq!(s.status, CriticalStatus::AtLowerBoundary);
        assert_eq!(s.value, 0.0);
        assert!(critical_value(&params, 3, &opts()).is_err());
        let outside = ModelParams::two_edge(2, 1, 2, 0.6, 0.0).unwrap();
        assert!(matches!(critical_value(&outside, 1, &opts()), Err(Error::Domain(_))));
    }

    #[test]
    fn invariant_under_gcd_reduction() {
        let original = ModelParams::two_edge(2, 2, 4, 0.1, 0.0).unwrap();
        let reduced = ModelParams::two_edge(4, 1, 2, 0.1, 0.0).unwrap();
        let a = critical_value(&original, 1, &opts()).unwrap();
        let b = critical_value(&reduced, 1, &opts()).unwrap();
        assert_eq!(a.reduction, 2);
        assert!((a.value - b.value).abs() <= 2e-11);
        assert!((a.value - qc_explicit_k2(0.1, 4).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn closed_form_edge_values() {
        for d in [2u64, 3, 5] {
            let df = d as f64;
            assert!(pc_explicit_k2(1.0 / (df * df), d).unwrap().abs() < 1e-15);
            assert!((pc_explicit_k2(0.0, d).unwrap() - 1.0 / df).abs() < 1e-15);
            assert!((qc_explicit_k2(0.0, d).unwrap() - 1.0 / (df * df)).abs() < 1e-15);
            assert!(qc_explicit_k2(1.0 / df, d).unwrap().abs() < 1e-15);
            // The two displayed closed forms invert each other.
            let q = qc_explicit_k2(0.4 / df, d).unwrap();
            assert!((pc_explicit_k2(q, d).unwrap() - 0.4 / df).abs() < 1e-12);
        }
        let hand = 3.0 / 8.0 - 2.75f64.sqrt() / (8.0 * 0.75f64.sqrt());
        assert!((qc_explicit_k2(0.25, 2).unwrap() - hand).abs() < 1e-15);
        assert!((hand - 0.135644).abs() < 1e-6);
        assert!(qc_explicit_k2(0.6, 2).is_err());
        assert!(pc_explicit_k2(0.3, 2).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(easy_bounds(0.0, 2, 1, 2).unwrap(), (0.25, 0.25));
        assert_eq!(tight_bounds(0.0, 2, 1, 2).unwrap(), (0.25, 0.25));
        let (lo, hi) = easy_bounds(0.5, 2, 1, 2).unwrap();
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 0.0);
        let (lo, hi) = easy_bounds(1.0 / 3.0, 3, 1, 3).unwrap();
        assert!(lo.abs() < 1e-16 && hi.abs() < 1e-16);

        let (lo, hi) = easy_bounds(0.25, 2, 1, 2).unwrap();
        assert!((lo - 0.125).abs() < 1e-15 && (hi - 1.0 / 6.0).abs() < 1e-15);
        let (lo, hi) = tight_bounds(0.25, 2, 1, 2).unwrap();
        assert!((lo - 0.5 / 3.75).abs() < 1e-15 && (hi - 0.5 / 3.5).abs() < 1e-15);
        assert!((lo - 0.1333333).abs() < 1e-7 && (hi - 0.1428571).abs() < 1e-7);

        assert!(easy_bounds(0.6, 2, 1, 2).is_err());
        assert!(tight_bounds(-0.1, 2, 1, 2).is_err());
        assert!(tight_bounds(0.1, 2, 2, 2).is_err());
    }

    #[test]
    fn upper_bound_is_root_of_bound_polynomial() {
        for p in [0.0, 0.1, 0.25, 0.4] {
            let (_, hi) = tight_bounds(p, 2, 1, 2).unwrap();
            assert!(bound_polynomial(p, hi, 1, 2, 0.5).abs() < 1e-15);
            assert!(bound_polynomial(p, hi + 1e-3, 1, 2, 0.5) < 0.0);
        }
        let (_, hi) = tight_bounds(0.1, 3, 2, 5).unwrap();
        assert!(bound_polynomial(0.1, hi, 2, 5, 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn curve_endpoints_and_order() {
        let rows = curve_sample(2, 1, 2, 11, &opts()).unwrap();
        assert_eq!(rows.len(), 11);
        assert!((rows[0].q_c - 0.25).abs() < 1e-10);
        assert!(rows[10].q_c.abs() < 1e-10);
        assert_eq!(rows[10].p, 0.5);
        for w in rows.windows(2) {
            assert!(w[1].q_c < w[0].q_c);
        }
        assert!(curve_sample(2, 1, 2, 1, &opts()).is_err());
    }

    #[test]
    fn surface_corner_and_slice() {
        let rows = surface_sample(2, &[1, 2, 3], 5, &opts()).unwrap();
        assert_eq!(rows.len(), 25);
        assert!((rows[0].p3_c - 0.125).abs() < 1e-10);
        assert!(rows[0].in_region);
        // p1 = 1/2 is already critical: out of region.
        assert!(!rows[24].in_region);
        // Slice p2 = 0 is the two-length (1, 3) curve.
        for row in rows.iter().filter(|r| r.p2 == 0.0 && r.in_region) {
            let q = qc_bisect(2, 1, 3, row.p1, &opts()).unwrap();
            assert!((row.p3_c - q).abs() < 2e-11);
        }
        assert!(surface_sample(2, &[1, 2], 5, &opts()).is_err());
    }

    #[test]
    fn slope_quick() {
        let probe = slope_probe(2, 2, &opts()).unwrap();
        assert!((probe.slope / probe.expected - 1.0).abs() < 0.01);
    }

    #[test]
    fn convexity_quick() {
        let probe = convexity_probe(2, 2, 0.05, 6, &opts()).unwrap();
        assert_eq!(probe.rows.len(), 4);
        assert_eq!(probe.sign_pattern, "++++");
        assert!(probe.first_sign_change.is_none());
        for row in &probe.rows {
            assert!((row.q_c - qc_explicit_k2(row.p, 2).unwrap()).abs() < 1e-8);
        }
        assert!(convexity_probe(2, 2, 0.9, 6, &opts()).is_err());
    }

    #[test]
    fn consistency_degenerates_to_single_threshold() {
        let c = self_consistency_check(2, 2, 1e-4, &opts()).unwrap();
        assert!(c.residual < 1e-6);
        assert!((c.q_c - 0.25).abs() < 1e-3);
        assert!(self_consistency_check(2, 2, 0.0, &opts()).is_err());
    }
}
