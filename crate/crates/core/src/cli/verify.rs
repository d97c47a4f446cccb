//! Verification suites behind `verify --suite ...`: the reduction-chain
//! cross-checks, the rate-coefficient resolution, the tiling identities,
//! and the golden orbit. Each item prints one pass/fail line.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::hiprec::HiReal;
use crate::orbit::{explore, ExploreOptions};
use crate::simplex::make_vertices;
use crate::volume::{
    eval_f, f_integrand, form8_integrand, halfangle_reduce, mc_volume, schlafli_rate, vol_by_ode,
    vol_closed_form, vol_form8, DomainMode, TParam,
};

pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn br(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Route agreement at 20 arguments in (-0.099, 0.099) plus the pointwise
/// identities behind the reduction chain.
pub fn suite_chain(k: u32) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let digits = 45;
    let tol = HiReal::pow10(-30, digits);
    let cap = HiReal::pow10(-30, digits).muli(2);

    let mut worst = HiReal::zero(digits);
    let mut all_ok = true;
    for p in (-10i64..=10).filter(|&p| p != 0) {
        let t = TParam::Rational(br(p, 102));
        let v8 = vol_form8(&t, &tol, k);
        let v10 = vol_closed_form(&t, &tol, k, DomainMode::Paper);
        let (v8, v10) = match (v8, v10) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                all_ok = false;
                break;
            }
        };
        let vode = match vol_by_ode(&v10.phi, &tol, k) {
            Ok(v) => v,
            Err(_) => {
                all_ok = false;
                break;
            }
        };
        for (a, b) in [(&v8, &v10), (&vode, &v10), (&v8, &vode)] {
            let delta = (&a.volume - &b.volume).abs();
            worst = worst.max_r(&delta.with_digits(digits));
            if delta > cap {
                all_ok = false;
            }
        }
    }
    out.push(check(
        "chain: form7/form8/closed10 agree at 20 arguments (2e-30)",
        all_ok,
        format!("worst pairwise delta {}", worst.to_decimal_sig(3)),
    ));

    // substituted-integrand ratio stays inside the branch bounds
    let d = 45;
    let pi = HiReal::pi(d);
    let lo = HiReal::from_f64(0.636, d);
    let hi = HiReal::from_f64(0.952, d);
    let mut bounds_ok = true;
    let (mut seen_lo, mut seen_hi) = (hi.clone(), lo.clone());
    for i in 0..1000 {
        let s = &pi.divi(10) * &HiReal::from_f64(-1.0 + (2.0 * i as f64 + 1.0) / 1000.0, d);
        let ratio = {
            let half = s.divi(2);
            let num = &half.sin() + &half.cos();
            &num / &s.sin().muli(4).addi(2).sqrt()
        };
        seen_lo = seen_lo.min_r(&ratio);
        seen_hi = seen_hi.max_r(&ratio);
        if !(ratio > lo && ratio < hi) {
            bounds_ok = false;
        }
    }
    out.push(check(
        "chain: branch ratio inside (0.636, 0.952) on 1000 grid points",
        bounds_ok,
        format!(
            "observed range [{}, {}]",
            seen_lo.to_decimal_sig(6),
            seen_hi.to_decimal_sig(6)
        ),
    ));

    // 2 arccos(ratio8) = pi - arccos(ratio1): the (8) -> (10) step
    let tol_id = HiReal::pow10(-38, d);
    let mut ident_ok = true;
    let mut worst_id = HiReal::zero(d);
    let mut state = 0x1234_5678_9abc_def0u64;
    for _ in 0..200 {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let u = (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        let s = &pi.divi(10) * &HiReal::from_f64(u, d);
        let lhs = form8_integrand(&s).unwrap().muli(2);
        let rhs = &pi - &f_integrand(&s).unwrap();
        let delta = (&lhs - &rhs).abs();
        worst_id = worst_id.max_r(&delta);
        if delta > tol_id {
            ident_ok = false;
        }
    }
    out.push(check(
        "chain: double-angle identity links the two integrands (200 samples)",
        ident_ok,
        format!("worst delta {}", worst_id.to_decimal_sig(3)),
    ));

    // halfangle_reduce equals 2 arccos on both branches
    let mut half_ok = true;
    for i in 0..200 {
        let u = HiReal::from_f64(-1.0 + (2.0 * i as f64 + 1.0) / 200.0, d);
        let got = halfangle_reduce(&u).unwrap();
        let want = crate::hiprec::arccos_hp(&u).unwrap().muli(2);
        if (&got - &want).abs() > tol_id {
            half_ok = false;
        }
    }
    out.push(check(
        "chain: double-angle reduction matches 2 arccos (200 samples)",
        half_ok,
        String::new(),
    ));
    out
}

/// Rate-coefficient resolution: the hemisphere endpoint pins K = 3.
pub fn suite_schlafli() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let digits = 45;
    let tol = HiReal::pow10(-30, digits);
    let phi = &HiReal::pi(90) - &HiReal::pow10(-6, 90);
    let pi_sq = HiReal::pi(90).square();

    match vol_by_ode(&phi, &tol, 3) {
        Ok(v) => {
            let miss = (&v.volume - &pi_sq).abs();
            out.push(check(
                "schlafli: K=3 hemisphere endpoint reaches pi^2 (1e-3)",
                miss < HiReal::pow10(-3, 45),
                format!("|vol - pi^2| = {}", miss.to_decimal_sig(3)),
            ));
        }
        Err(e) => out.push(check(
            "schlafli: K=3 hemisphere endpoint reaches pi^2 (1e-3)",
            false,
            e.to_string(),
        )),
    }

    match vol_by_ode(&phi, &tol, 6) {
        Ok(v) => {
            // the doubled coefficient overshoots by 7/8 of pi^2
            let rel = &(&v.volume - &pi_sq) / &pi_sq;
            let want = HiReal::from_i64(7, 45).divi(8);
            let gap = (&rel - &want).abs();
            out.push(check(
                "schlafli: K=6 misses the hemisphere by ~7/8 pi^2",
                gap < HiReal::pow10(-3, 45),
                format!("relative miss {}", rel.to_decimal_sig(6)),
            ));
        }
        Err(e) => out.push(check(
            "schlafli: K=6 misses the hemisphere by ~7/8 pi^2",
            false,
            e.to_string(),
        )),
    }

    let d = 60;
    let rate = schlafli_rate(&HiReal::pi(d).divi(2), 3).unwrap();
    let want = HiReal::pi(d).muli(3).divi(2);
    out.push(check(
        "schlafli: rate at the right angle equals 3 pi/2",
        (&rate - &want).abs() < HiReal::pow10(-(d as i64) + 8, d),
        format!("rate = {}", rate.to_decimal_sig(20)),
    ));
    out
}

/// Tiling identities: the 16-cell, 5-cell and 600-cell values by
/// quadrature and by Monte Carlo.
pub fn suite_tilings(k: u32, mc_seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let tol = HiReal::pow10(-50, 60);
    let d = 70;
    let pi_sq = HiReal::pi(d).square();

    // f at the tiling arguments
    let checks = [
        ("tilings: f(1/6) = 3/40 (5-cell)", br(1, 6), br(3, 40)),
        (
            "tilings: f(-1/10) = -107/1800 (600-cell)",
            br(-1, 10),
            br(-107, 1800),
        ),
    ];
    for (name, t, want) in checks {
        match eval_f(&TParam::Rational(t), &tol, DomainMode::Extended) {
            Ok(q) => {
                let wantr = HiReal::from_rational(&want, q.estimate.digits()).unwrap();
                let err = (&q.estimate - &wantr).abs();
                out.push(check(
                    name,
                    err < HiReal::pow10(-50, 60),
                    format!("|f - p/q| = {}", err.to_decimal_sig(3)),
                ));
            }
            Err(e) => out.push(check(name, false, e.to_string())),
        }
    }

    // volumes via the closed form
    let vols = [
        (
            "tilings: vol sigma(pi/2) = pi^2/8",
            br(0, 1),
            pi_sq.divi(8),
            DomainMode::Paper,
        ),
        (
            "tilings: vol sigma(2pi/3) = 2pi^2/5",
            br(1, 6),
            pi_sq.muli(2).divi(5),
            DomainMode::Extended,
        ),
        (
            "tilings: vol sigma(2pi/5) = pi^2/300",
            br(-1, 10),
            pi_sq.divi(300),
            DomainMode::Extended,
        ),
    ];
    for (name, t, want, mode) in vols {
        match vol_closed_form(&TParam::Rational(t), &tol, k, mode) {
            Ok(v) => {
                let err = (&v.volume - &want).abs();
                out.push(check(
                    name,
                    err < HiReal::pow10(-45, 60),
                    format!("delta {}", err.to_decimal_sig(3)),
                ));
            }
            Err(e) => out.push(check(name, false, e.to_string())),
        }
    }

    // Monte Carlo cross-checks
    let mc = [
        ("tilings: MC vol sigma(pi/2), n=1e6", br(1, 2), 1_000_000u64, std::f64::consts::PI.powi(2) / 8.0),
        ("tilings: MC vol sigma(2pi/3), n=1e7", br(2, 3), 10_000_000, 2.0 * std::f64::consts::PI.powi(2) / 5.0),
        ("tilings: MC vol sigma(2pi/5), n=1e7", br(2, 5), 10_000_000, std::f64::consts::PI.powi(2) / 300.0),
    ];
    for (name, phi_frac, n, want) in mc {
        let d = 60;
        let phi = &HiReal::pi(d) * &HiReal::from_rational(&phi_frac, d).unwrap();
        let result = crate::simplex::dihedral_to_edge(&phi)
            .and_then(|x| make_vertices(&x))
            .and_then(|s| mc_volume(&s, n, mc_seed));
        match result {
            Ok((est, stderr)) => out.push(check(
                name,
                (est - want).abs() <= 4.0 * stderr,
                format!("est {est:.6}, target {want:.6}, stderr {stderr:.2e}"),
            )),
            Err(e) => out.push(check(name, false, e.to_string())),
        }
    }
    out
}

/// The golden orbit: 4 mutually orthogonal hyperplanes cut the 3-sphere
/// into 16 copies of sigma(pi/2).
pub fn suite_orbit() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let opts = ExploreOptions::default();
    match explore(&br(1, 2), &opts) {
        Ok(r) => {
            out.push(check(
                "orbit: sigma(pi/2) closes with 16 tiles",
                r.closed && r.distinct_tiles == 16,
                format!("tiles per depth {:?}", r.tiles_per_depth),
            ));
            out.push(check(
                "orbit: 8 distinct vertices (the +-e_i)",
                r.distinct_vertices == 8,
                format!("{} vertices", r.distinct_vertices),
            ));
            out.push(check(
                "orbit: every free-set sample covered exactly once",
                r.multiplicity_samples.len() == opts.sample_count
                    && r.multiplicity_samples.iter().all(|s| s.count == 1),
                format!("{} samples", r.multiplicity_samples.len()),
            ));
        }
        Err(e) => out.push(check("orbit: sigma(pi/2) exploration", false, e.to_string())),
    }
    out
}

pub fn run_suite(suite: &str, k: u32, mc_seed: u64) -> Vec<CheckResult> {
    match suite {
        "chain" => suite_chain(k),
        "schlafli" => suite_schlafli(),
        "tilings" => suite_tilings(k, mc_seed),
        "orbit" => suite_orbit(),
        _ => {
            let mut all = suite_chain(k);
            all.extend(suite_schlafli());
            all.extend(suite_tilings(k, mc_seed));
            all.extend(suite_orbit());
            all
        }
    }
}
