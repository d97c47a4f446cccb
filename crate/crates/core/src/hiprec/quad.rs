//! Adaptive tanh-sinh (double-exponential) quadrature.
//!
//! The change of variable x = tanh(pi/2 * sinh(t)) converges exponentially
//! for integrands analytic on the open interval and tolerates square-root
//! endpoint singularities. Abscissas are carried at roughly twice the
//! requested precision and placed relative to the nearest endpoint, so an
//! integrand may resolve `b - x` without cancellation all the way down to
//! the truncation tail. Error bounds are heuristic but conservative: the
//! difference of the last two refinement levels times a safety factor of
//! 10, plus a round-off floor. The kernel escalates its working precision
//! (x2) until the tolerance is certified or the precision cap is reached.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{HiReal, MIN_DIGITS};
use crate::error::{Error, Result};

/// Estimate of a definite integral with a conservative absolute error bound.
#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub estimate: HiReal,
    pub error_bound: HiReal,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    /// Precision-escalation cap in decimal digits.
    pub max_digits: usize,
    /// Maximum tanh-sinh refinement level (h = 2^-level).
    pub max_level: usize,
    /// Initial working precision override.
    pub initial_digits: Option<usize>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            max_digits: 2400,
            max_level: 12,
            initial_digits: None,
        }
    }
}

/// One precomputed abscissa/weight pair. `delta` is 1 - tanh(pi/2*sinh(t)),
/// stored instead of the abscissa itself so nodes can be placed relative to
/// the nearest endpoint.
type Node = (HiReal, HiReal);

type NodeTable = Arc<Vec<Node>>;

fn node_cache() -> &'static Mutex<HashMap<(usize, usize), NodeTable>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), NodeTable>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Internal precision for abscissas and sums. The doubled precision keeps
/// `1 - delta` representable down to delta ~ 10^(-2*digits-20), which is the
/// tail depth a square-root endpoint singularity needs.
fn node_digits(digits: usize) -> usize {
    2 * digits + 30
}

/// Truncation point: past t_max even a square-root singular integrand
/// contributes below the round-off floor.
fn t_max_for(digits: usize) -> f64 {
    let u_max = (digits as f64 + 10.0) * std::f64::consts::LN_10;
    (2.0 * u_max / std::f64::consts::PI).asinh() + 0.25
}

/// Nodes introduced at `level` (integer multiples of h at level 0, odd
/// multiples afterwards).
fn nodes_for(digits: usize, level: usize) -> NodeTable {
    if let Some(hit) = node_cache().lock().unwrap().get(&(digits, level)) {
        return hit.clone();
    }
    let nd = node_digits(digits);
    let t_max = t_max_for(digits);
    let h = 0.5f64.powi(level as i32);
    let pi_half = HiReal::pi(nd).divi(2);
    // deeper deltas would not stay representable relative to the endpoint
    let delta_floor = HiReal::pow10(-(2 * digits as i64 + 20), nd);
    let mut out = Vec::new();
    let step = if level == 0 { 1 } else { 2 };
    let mut j: u64 = 1;
    while (j as f64) * h <= t_max {
        // t = j*h is exact in binary
        let t = HiReal::from_f64(j as f64 * h, nd);
        let et = t.exp();
        let sinh_t = (&et - &et.recip()).divi(2);
        let cosh_t = (&et + &et.recip()).divi(2);
        let u = &pi_half * &sinh_t;
        let eu = u.exp();
        // delta = 1 - tanh(u) = 2/(e^{2u} + 1)
        let delta = HiReal::from_i64(2, nd).div_r(&eu.square().addi(1));
        if delta < delta_floor {
            break;
        }
        // sech(u) = 2/(e^u + e^{-u})
        let sech_u = HiReal::from_i64(2, nd).div_r(&(&eu + &eu.recip()));
        let w = &(&pi_half * &cosh_t) * &sech_u.square();
        out.push((delta, w));
        j += step;
    }
    let table: NodeTable = Arc::new(out);
    node_cache()
        .lock()
        .unwrap()
        .insert((digits, level), table.clone());
    table
}

enum Attempt {
    Converged(QuadratureResult),
    NotConverged,
}

fn attempt<F>(
    f: &F,
    a: &HiReal,
    b: &HiReal,
    tol: &HiReal,
    digits: usize,
    max_level: usize,
) -> Result<Attempt>
where
    F: Fn(&HiReal) -> Result<HiReal>,
{
    let nd = node_digits(digits);
    let a = a.with_digits(nd);
    let b = b.with_digits(nd);
    let center = (&a + &b).divi(2);
    let halfwidth = (&b - &a).divi(2);
    let mut evaluations = 0usize;

    // midpoint node (t = 0): weight pi/2
    let f0 = f(&center)?;
    evaluations += 1;
    let mut sum = &HiReal::pi(nd).divi(2) * &f0;

    // scale of the summed terms, for the round-off floor
    let mut scale = sum.abs();

    let mut prev: Option<HiReal> = None;
    for level in 0..=max_level {
        let h = HiReal::from_f64(0.5f64.powi(level as i32), nd);
        for (delta, w) in nodes_for(digits, level).iter() {
            let off = &halfwidth * delta;
            let hi = &b - &off;
            let lo = &a + &off;
            let fv = &f(&hi)? + &f(&lo)?;
            evaluations += 2;
            let term = w * &fv;
            scale = scale.max_r(&term.abs());
            sum = &sum + &term;
        }
        let estimate = &(&h * &sum) * &halfwidth;
        if let Some(p) = prev.as_ref() {
            let diff = (&estimate - p).abs();
            let floor =
                &scale.max_r(&estimate.abs()) * &HiReal::pow10(-(digits as i64) + 2, nd);
            let bound = &diff.muli(10) + &floor;
            if &bound <= tol {
                return Ok(Attempt::Converged(QuadratureResult {
                    estimate,
                    error_bound: bound,
                    evaluations,
                }));
            }
        }
        prev = Some(estimate);
    }
    Ok(Attempt::NotConverged)
}

/// Integrates `f` over `[a, b]` to the requested absolute tolerance.
///
/// The integral is signed: swapping the limits negates the result. `f` may
/// be undefined at the exact endpoints (integrable square-root behaviour is
/// fine); a failure at an interior node propagates as a domain error.
pub fn integrate<F>(f: F, a: &HiReal, b: &HiReal, tol: &HiReal) -> Result<QuadratureResult>
where
    F: Fn(&HiReal) -> Result<HiReal>,
{
    integrate_opts(f, a, b, tol, &IntegrateOptions::default())
}

pub fn integrate_opts<F>(
    f: F,
    a: &HiReal,
    b: &HiReal,
    tol: &HiReal,
    opts: &IntegrateOptions,
) -> Result<QuadratureResult>
where
    F: Fn(&HiReal) -> Result<HiReal>,
{
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if a == b {
        return Ok(QuadratureResult {
            estimate: HiReal::zero(a.digits()),
            error_bound: HiReal::zero(a.digits()),
            evaluations: 0,
        });
    }
    let (lo, hi, flip) = if a < b { (a, b, false) } else { (b, a, true) };

    let tol_digits = (-tol.dec_exponent().unwrap_or(0)).max(0) as usize;
    let mut digits = opts
        .initial_digits
        .unwrap_or(tol_digits + 10)
        .max(MIN_DIGITS);
    loop {
        if digits > opts.max_digits {
            return Err(Error::NonConvergence(format!(
                "tolerance {} unreachable below the {}-digit precision cap",
                tol.to_decimal_sig(3),
                opts.max_digits
            )));
        }
        match attempt(&f, lo, hi, tol, digits, opts.max_level)? {
            Attempt::Converged(mut res) => {
                if flip {
                    res.estimate = res.estimate.neg_r();
                }
                return Ok(res);
            }
            Attempt::NotConverged => digits *= 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: f64, digits: usize) -> HiReal {
        HiReal::from_f64(v, digits)
    }

    #[test]
    fn constant_integrand() {
        let digits = 40;
        let tol = HiReal::pow10(-30, digits);
        let r = integrate(
            |s| Ok(HiReal::from_i64(1, s.digits())),
            &d(0.0, digits),
            &d(1.0, digits),
            &tol,
        )
        .unwrap();
        let err = (&r.estimate - &HiReal::from_i64(1, digits)).abs();
        assert!(err <= r.error_bound && r.error_bound <= tol);
    }

    #[test]
    fn signed_integral_antisymmetry() {
        let digits = 40;
        let tol = HiReal::pow10(-30, digits);
        let r = integrate(|s| Ok(s.clone()), &d(1.0, digits), &d(0.0, digits), &tol).unwrap();
        let expected = HiReal::from_i64(-1, digits).divi(2);
        assert!((&r.estimate - &expected).abs() <= tol);
    }

    #[test]
    fn empty_interval_is_exact_zero() {
        let digits = 40;
        let tol = HiReal::pow10(-30, digits);
        let r = integrate(|s| Ok(s.clone()), &d(0.25, digits), &d(0.25, digits), &tol).unwrap();
        assert!(r.estimate.is_zero());
        assert_eq!(r.evaluations, 0);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        // integral of 1/sqrt(1-s) over [0,1] = 2
        let digits = 50;
        let tol = HiReal::pow10(-35, digits);
        let r = integrate(
            |s| {
                let arg = &HiReal::from_i64(1, s.digits()) - s;
                if !arg.is_positive() {
                    return Err(Error::Domain("integrand pole".into()));
                }
                Ok(arg.sqrt().recip())
            },
            &d(0.0, digits),
            &d(1.0, digits),
            &tol,
        )
        .unwrap();
        let err = (&r.estimate - &HiReal::from_i64(2, digits)).abs();
        assert!(
            err <= r.error_bound,
            "err {} bound {}",
            err.to_decimal_sig(3),
            r.error_bound.to_decimal_sig(3)
        );
    }

    #[test]
    fn defining_integral_against_simpson_and_tiling_oracles() {
        // integral of arccos(sin s/(1+2 sin s)) over [0, pi/6] equals
        // 3 pi^2/40 by the 5-cell identity; a coarse composite Simpson rule
        // in doubles independently pins the leading digits
        let digits = 60;
        let tol = HiReal::pow10(-50, digits);
        let pi = HiReal::pi(digits);
        let r = integrate(
            crate::volume::f_integrand,
            &HiReal::zero(digits),
            &pi.divi(6),
            &tol,
        )
        .unwrap();
        let exact = pi.square().muli(3).divi(40);
        assert!((&r.estimate - &exact).abs() <= tol);

        let g = |s: f64| (s.sin() / (1.0 + 2.0 * s.sin())).acos();
        let n = 2000;
        let h = std::f64::consts::PI / 6.0 / n as f64;
        let mut simpson = g(0.0) + g(std::f64::consts::PI / 6.0);
        for i in 1..n {
            simpson += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        simpson *= h / 3.0;
        assert!((r.estimate.to_f64() - simpson).abs() < 1e-9);
        assert_eq!(&r.estimate.to_decimal_sig(11), "7.4022033008e-1");
    }

    #[test]
    fn polynomial_exactness_100_random_intervals() {
        // degree <= 10 polynomials against their exact antiderivative
        let digits = 45;
        let tol = HiReal::pow10(-30, digits);
        let mut state = 0x51a3c0ffee123457u64;
        let mut unit = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let deg = (unit() * 10.0) as usize;
            let coeffs: Vec<i64> = (0..=deg).map(|_| (unit() * 21.0) as i64 - 10).collect();
            let a = d(unit() * 2.0 - 1.0, digits);
            let b = d(unit() * 2.0 - 1.0, digits);
            let eval = |s: &HiReal| {
                let mut acc = HiReal::zero(s.digits());
                for &c in coeffs.iter().rev() {
                    acc = &(&acc * s) + &HiReal::from_i64(c, s.digits());
                }
                Ok(acc)
            };
            let r = integrate(eval, &a, &b, &tol).unwrap();
            let anti = |s: &HiReal| {
                let mut acc = HiReal::zero(s.digits());
                for (k, &c) in coeffs.iter().enumerate().rev() {
                    acc = &(&acc * s) + &HiReal::from_i64(c, s.digits()).divi(k as i64 + 1);
                }
                &acc * s
            };
            let exact = &anti(&b.with_digits(digits * 2)) - &anti(&a.with_digits(digits * 2));
            let err = (&r.estimate - &exact).abs();
            assert!(
                err <= r.error_bound,
                "poly {:?} on [{}, {}]: err {} > bound {}",
                coeffs,
                a.to_decimal_sig(6),
                b.to_decimal_sig(6),
                err.to_decimal_sig(3),
                r.error_bound.to_decimal_sig(3)
            );
        }
    }

    #[test]
    fn doubling_precision_preserves_certified_digits() {
        let integrand = |s: &HiReal| Ok(s.sin());
        let a = d(0.0, 200);
        let b = d(1.0, 200);
        let r1 = integrate(integrand, &a, &b, &HiReal::pow10(-30, 40)).unwrap();
        let r2 = integrate(integrand, &a, &b, &HiReal::pow10(-60, 80)).unwrap();
        let drift = (&r1.estimate - &r2.estimate).abs();
        assert!(drift <= r1.error_bound);
    }

    #[test]
    fn interior_domain_error_propagates() {
        let digits = 40;
        let tol = HiReal::pow10(-20, digits);
        let res = integrate(
            |s| {
                if s.abs() < HiReal::from_f64(0.5, s.digits()) {
                    Err(Error::Domain("undefined inside".into()))
                } else {
                    Ok(s.clone())
                }
            },
            &d(-1.0, digits),
            &d(1.0, digits),
            &tol,
        );
        assert!(matches!(res, Err(Error::Domain(_))));
    }
}
