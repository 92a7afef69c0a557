//! Quick invariant checks bundled with the binary.

use std::io::Write;

use treeperc::critical::{qc_bisect, qc_explicit_k2, BoundSet, CriticalOptions};
use treeperc::markov::{build_q, u_sequence};
use treeperc::simulate::{gw_simulate, spine_simulate, GwConfig};
use treeperc::spectral::{char_poly_at, spectral_radius, PowerOptions};
use treeperc::ModelParams;

type Check = fn() -> Result<bool, treeperc::Error>;

const CHECKS: &[(&str, Check)] = &[
    ("three-state matrix entries", matrix_entries),
    ("characteristic polynomial at 1/d", char_poly_identity),
    ("single-length spectral radius", single_length_rho),
    ("bisection matches closed form", closed_form_curve),
    ("bound sandwich for l = 1", bound_sandwich),
    ("gcd reduction preserves rho", reduction_invariance),
    ("spine simulation matches u_n", spine_vs_exact),
    ("closed edges die out", gw_extinction),
];

pub fn run(stdout: &mut dyn Write) -> i32 {
    let mut failed = 0;
    for (name, check) in CHECKS {
        let status = match check() {
            Ok(true) => "ok".to_string(),
            Ok(false) => {
                failed += 1;
                "FAILED".to_string()
            }
            Err(e) => {
                failed += 1;
                format!("FAILED ({e})")
            }
        };
        let _ = writeln!(stdout, "{status:>6}  {name}");
    }
    let _ = writeln!(stdout, "{} of {} checks passed", CHECKS.len() - failed, CHECKS.len());
    if failed == 0 {
        0
    } else {
        2
    }
}

fn matrix_entries() -> Result<bool, treeperc::Error> {
    let (p, q) = (0.3, 0.2);
    let dense = build_q(&ModelParams::two_edge(2, 1, 2, p, q)?)?.to_dense()?;
    let a = (1.0 - p) * (1.0 - q);
    let expected = [[0.0, 1.0 - p, p], [q, 0.0, 0.0], [0.0, a, 1.0 - a]];
    Ok((0..3).all(|i| (0..3).all(|j| (dense[i][j] - expected[i][j]).abs() <= 1e-15)))
}

fn char_poly_identity() -> Result<bool, treeperc::Error> {
    let (p, q, d) = (0.2, 0.1, 2.0f64);
    let value = char_poly_at(&build_q(&ModelParams::two_edge(2, 1, 2, p, q)?)?, 1.0 / d)?.value;
    let displayed = p * q * q - p * q / (d * d) - p * q / d + p / (d * d) - q * q + q / (d * d) + q / d
        - 1.0 / (d * d * d);
    Ok((value + displayed).abs() <= 1e-12)
}

fn single_length_rho() -> Result<bool, treeperc::Error> {
    let params = ModelParams::two_edge(2, 1, 3, 0.0, 0.3)?;
    let rho = spectral_radius(&build_q(&params)?, &PowerOptions::default())?.rho;
    Ok((rho - 0.3f64.cbrt()).abs() <= 1e-10)
}

fn closed_form_curve() -> Result<bool, treeperc::Error> {
    let opts = CriticalOptions::default();
    for p in [0.05, 0.2, 0.4] {
        if (qc_bisect(2, 1, 2, p, &opts)? - qc_explicit_k2(p, 2)?).abs() > 1e-8 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn bound_sandwich() -> Result<bool, treeperc::Error> {
    let opts = CriticalOptions::default();
    for p in [0.1, 0.25, 0.4] {
        let b = BoundSet::new(p, 2, 1, 3)?;
        let qc = qc_bisect(2, 1, 3, p, &opts)?;
        if !(b.easy_lo <= b.tight_lo && b.tight_lo < qc && qc < b.tight_hi && b.tight_hi <= b.easy_hi) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn reduction_invariance() -> Result<bool, treeperc::Error> {
    let opts = PowerOptions::default();
    let original = ModelParams::two_edge(2, 2, 4, 0.2, 0.1)?;
    let rho = spectral_radius(&build_q(&original.reduce_gcd()?)?, &opts)?.rho;
    let direct = spectral_radius(&build_q(&ModelParams::two_edge(4, 1, 2, 0.2, 0.1)?)?, &opts)?.rho;
    Ok((rho - direct).abs() <= 1e-12)
}

fn spine_vs_exact() -> Result<bool, treeperc::Error> {
    let params = ModelParams::two_edge(2, 1, 2, 0.2, 0.2)?;
    let est = spine_simulate(&params, 10, 20_000, 1)?;
    let u = u_sequence(&params, 10)?;
    Ok((0..=10).all(|i| {
        let se = (u.value(i) * (1.0 - u.value(i)) / 20_000.0).sqrt();
        (est.frequencies[i] - u.value(i)).abs() <= 5.0 * se + 1e-12
    }))
}

fn gw_extinction() -> Result<bool, treeperc::Error> {
    let params = ModelParams::new(2, vec![1, 3], vec![0.0, 0.0])?;
    let cfg = GwConfig {
        trials: 100,
        ..GwConfig::default()
    };
    let est = gw_simulate(&params, &cfg)?;
    Ok(est.survival.survived == 0 && est.alive_at[3] == 0)
}
