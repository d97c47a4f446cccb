//! Experimental rationality testing of f(t) at rational arguments.
//!
//! A computed value is rendered to its certified digit count, re-read as an
//! exact rational, and examined through its continued fraction. A partial
//! quotient larger than 10^(digits/4) sitting at a convergent with a small
//! denominator is the classic signature of a nearby exact rational; its
//! absence up to the denominator bound is reported as `no-small-rational`.
//! Verdicts are evidence, never proof: the underlying question is open, and
//! the wording of the verdict strings reflects that.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hiprec::{decimal_str_to_rational, HiReal};
use crate::volume::{eval_f, DomainMode, TParam};

/// Minimum digit count accepted by [`test_rationality`].
pub const MIN_SCAN_DIGITS: usize = 60;

/// Evidence classification for one scanned argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Reconstruction produced a small-denominator candidate p/q.
    ExactRationalCandidate,
    /// No rationality signature up to the denominator bound - evidence,
    /// never proof, of irrationality.
    NoSmallRational,
    /// The value could not be certified at the requested precision.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ExactRationalCandidate => "exact-rational-candidate",
            Verdict::NoSmallRational => "no-small-rational",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Continued-fraction evidence record for one value of t.
#[derive(Clone, Debug)]
pub struct RationalityVerdict {
    pub t: BigRational,
    pub digits_used: usize,
    pub cf_terms: Vec<BigInt>,
    pub candidate: Option<BigRational>,
    pub verdict: Verdict,
    /// Reconstruction quality |f(t) - p/q| * q^2; present with a candidate.
    pub quality: Option<HiReal>,
    /// Failure note for inconclusive entries.
    pub note: Option<String>,
    /// Band the argument belongs to ("paper" or "extended").
    pub band: &'static str,
}

/// Per-verdict counts of a scan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub exact_rational_candidate: usize,
    pub no_small_rational: usize,
    pub inconclusive: usize,
}

/// One rationality verdict per scanned t, sorted by t.
#[derive(Clone, Debug)]
pub struct ScanReport {
    pub entries: Vec<RationalityVerdict>,
    pub digits: usize,
    pub max_den: u64,
    pub mode: DomainMode,
    pub summary: ScanSummary,
}

/// Store for expensive f(t) evaluations, keyed by a canonical string.
/// Implementations must be safe to share across scan workers.
pub trait EvalCache: Sync {
    fn get(&self, key: &str) -> Option<String>;
    fn put(&self, key: &str, value: &str);
}

/// No-op cache.
pub struct NoCache;

impl EvalCache for NoCache {
    fn get(&self, _key: &str) -> Option<String> {
        None
    }
    fn put(&self, _key: &str, _value: &str) {}
}

pub fn cache_key(t: &BigRational, digits: usize, mode: DomainMode) -> String {
    let band = match mode {
        DomainMode::Paper => "paper",
        DomainMode::Extended => "extended",
    };
    format!("f|t={}/{}|digits={}|band={}", t.numer(), t.denom(), digits, band)
}

/// Simple continued fraction of an exact rational with convergent tracking.
struct CfWalk {
    num: BigInt,
    den: BigInt,
    p_prev: BigInt,
    q_prev: BigInt,
    p_cur: BigInt,
    q_cur: BigInt,
    first: bool,
}

impl CfWalk {
    fn new(r: &BigRational) -> Self {
        CfWalk {
            num: r.numer().clone(),
            den: r.denom().clone(),
            p_prev: BigInt::zero(),
            q_prev: BigInt::one(),
            p_cur: BigInt::one(),
            q_cur: BigInt::zero(),
            first: true,
        }
    }

    /// Next partial quotient and the convergent it completes, or None when
    /// the expansion is exhausted (the value is exactly the last convergent).
    fn next(&mut self) -> Option<(BigInt, BigRational)> {
        if self.den.is_zero() {
            return None;
        }
        // floor division keeps a0 correct for negative values and all
        // later quotients positive
        let a = self.num.div_floor(&self.den);
        let rem = &self.num - &a * &self.den;
        self.num = std::mem::replace(&mut self.den, rem);
        let p_next = &a * &self.p_cur + &self.p_prev;
        let q_next = &a * &self.q_cur + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p_cur, p_next);
        self.q_prev = std::mem::replace(&mut self.q_cur, q_next);
        self.first = false;
        Some((a, BigRational::new(self.p_cur.clone(), self.q_cur.clone())))
    }

    fn exhausted(&self) -> bool {
        self.den.is_zero()
    }
}

/// Continued fraction of an exact rational, truncated when the running
/// convergent is within `threshold` of the value or at `max_terms`.
fn cf_of_rational(r: &BigRational, threshold: &BigRational, max_terms: usize) -> Vec<BigInt> {
    let mut walk = CfWalk::new(r);
    let mut terms = Vec::new();
    while terms.len() < max_terms {
        let Some((a, convergent)) = walk.next() else {
            break;
        };
        terms.push(a);
        if (r - &convergent).abs() <= *threshold {
            break;
        }
    }
    terms
}

/// Partial quotients of `v`, truncated when the running convergent matches
/// `v` to within 10^(-digits+5) (later quotients are rendering noise) or at
/// `max_terms`.
pub fn continued_fraction(v: &HiReal, max_terms: usize) -> Vec<BigInt> {
    assert!(max_terms >= 1);
    let digits = v.digits();
    let r = decimal_str_to_rational(&v.to_decimal_sig(digits)).expect("own rendering parses");
    let threshold = BigRational::new(BigInt::one(), BigInt::from(10).pow(digits.saturating_sub(5) as u32));
    cf_of_rational(&r, &threshold, max_terms)
}

/// Options for [`rational_reconstruct`]; the quotient is "huge" when it
/// exceeds 10^(digits / huge_quotient_divisor).
#[derive(Clone, Debug)]
pub struct ReconstructOptions {
    pub huge_quotient_divisor: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            huge_quotient_divisor: 4,
        }
    }
}

/// Attempts to recognize `v` as p/q with q <= max_den. Returns the unique
/// candidate exhibited by a huge partial quotient, or None. Deterministic.
///
/// The accept threshold is the absolute 2 * 10^(-digits), so the caller
/// must have certified v to 10^(-digits) absolutely (every value this lab
/// feeds in is below 1 in magnitude, where significant digits imply that).
pub fn rational_reconstruct(v: &HiReal, max_den: u64, digits: usize) -> Result<Option<BigRational>> {
    rational_reconstruct_opts(v, max_den, digits, &ReconstructOptions::default())
}

pub fn rational_reconstruct_opts(
    v: &HiReal,
    max_den: u64,
    digits: usize,
    opts: &ReconstructOptions,
) -> Result<Option<BigRational>> {
    let needed = 2.0 * (max_den as f64).log10() + 20.0;
    if (digits as f64) < needed {
        return Err(Error::PrecisionTooLow(format!(
            "{digits} digits cannot support reconstruction up to denominator {max_den}; need >= {}",
            needed.ceil() as usize
        )));
    }
    let r = decimal_str_to_rational(&v.to_decimal_sig(digits)).expect("own rendering parses");
    Ok(reconstruct_rational_core(&r, max_den, digits, opts))
}

fn reconstruct_rational_core(
    r: &BigRational,
    max_den: u64,
    digits: usize,
    opts: &ReconstructOptions,
) -> Option<BigRational> {
    let huge = BigInt::from(10).pow((digits / opts.huge_quotient_divisor) as u32);
    let max_den = BigInt::from(max_den);
    let accept = BigRational::new(BigInt::from(2), BigInt::from(10).pow(digits as u32));

    let mut walk = CfWalk::new(r);
    let mut prev: Option<BigRational> = None;
    while let Some((a, convergent)) = walk.next() {
        // a huge quotient right after a small-denominator convergent is the
        // rationality signature
        if let Some(cand) = prev.as_ref() {
            if a > huge && (r - cand).abs() <= accept {
                return Some(cand.clone());
            }
        }
        if walk.exhausted() {
            // exact termination: r itself is the candidate if small enough
            if convergent.denom() <= &max_den {
                return Some(convergent);
            }
            return None;
        }
        if convergent.denom() > &max_den {
            return None;
        }
        prev = Some(convergent);
    }
    None
}

/// Computes f(t) at 10^(-digits), reconstructs, and emits the verdict.
/// `cache` short-circuits the expensive evaluation on repeated (t, digits)
/// pairs; cached values reproduce verdicts bit for bit.
pub fn test_rationality(
    t: &BigRational,
    digits: usize,
    max_den: u64,
    mode: DomainMode,
    cache: &dyn EvalCache,
) -> Result<RationalityVerdict> {
    if digits < MIN_SCAN_DIGITS {
        return Err(Error::PrecisionTooLow(format!(
            "rationality testing needs at least {MIN_SCAN_DIGITS} digits, got {digits}"
        )));
    }
    let key = cache_key(t, digits, mode);
    let value_str = match cache.get(&key) {
        Some(v) => v,
        None => {
            let tol = HiReal::pow10(-(digits as i64), digits + 10);
            let q = eval_f(&TParam::Rational(t.clone()), &tol, mode)?;
            let rendered = q.estimate.with_digits(digits + 10).to_decimal_sig(digits);
            cache.put(&key, &rendered);
            rendered
        }
    };
    verdict_from_value(t, &value_str, digits, max_den, mode)
}

/// Deterministic verdict derivation from the rendered decimal value.
pub fn verdict_from_value(
    t: &BigRational,
    value: &str,
    digits: usize,
    max_den: u64,
    mode: DomainMode,
) -> Result<RationalityVerdict> {
    let r = decimal_str_to_rational(value)
        .map_err(|e| Error::Parse(format!("cached value for t={t}: {e}")))?;
    let threshold = BigRational::new(
        BigInt::one(),
        BigInt::from(10).pow(digits.saturating_sub(5) as u32),
    );
    let cf_terms = cf_of_rational(&r, &threshold, 200);
    let needed = 2.0 * (max_den as f64).log10() + 20.0;
    if (digits as f64) < needed {
        return Err(Error::PrecisionTooLow(format!(
            "{digits} digits cannot support reconstruction up to denominator {max_den}"
        )));
    }
    let candidate = reconstruct_rational_core(&r, max_den, digits, &ReconstructOptions::default());
    let band = match mode {
        DomainMode::Paper => "paper",
        DomainMode::Extended => "extended",
    };
    let (verdict, quality) = match candidate.as_ref() {
        Some(c) => {
            let q_sq = BigRational::from_integer(c.denom() * c.denom());
            let quality = HiReal::from_rational(&((&r - c).abs() * q_sq), 30)?;
            (Verdict::ExactRationalCandidate, Some(quality))
        }
        None => (Verdict::NoSmallRational, None),
    };
    Ok(RationalityVerdict {
        t: t.clone(),
        digits_used: digits,
        cf_terms,
        candidate,
        verdict,
        quality,
        note: None,
        band,
    })
}

/// Scans a list of rational arguments; one verdict per distinct t, sorted.
/// Per-entry failures downgrade to inconclusive entries instead of aborting.
pub fn scan(
    t_values: &[BigRational],
    digits: usize,
    max_den: u64,
    mode: DomainMode,
    cache: &dyn EvalCache,
) -> ScanReport {
    let mut ts: Vec<BigRational> = t_values.to_vec();
    ts.sort();
    ts.dedup();
    let entries: Vec<RationalityVerdict> = ts
        .par_iter()
        .map(|t| match test_rationality(t, digits, max_den, mode, cache) {
            Ok(v) => v,
            Err(e) => RationalityVerdict {
                t: t.clone(),
                digits_used: digits,
                cf_terms: Vec::new(),
                candidate: None,
                verdict: Verdict::Inconclusive,
                quality: None,
                note: Some(e.to_string()),
                band: match mode {
                    DomainMode::Paper => "paper",
                    DomainMode::Extended => "extended",
                },
            },
        })
        .collect();
    let mut summary = ScanSummary::default();
    for e in &entries {
        match e.verdict {
            Verdict::ExactRationalCandidate => summary.exact_rational_candidate += 1,
            Verdict::NoSmallRational => summary.no_small_rational += 1,
            Verdict::Inconclusive => summary.inconclusive += 1,
        }
    }
    ScanReport {
        entries,
        digits,
        max_den,
        mode,
        summary,
    }
}

/// All lowest-terms rationals p/q with q <= den_max inside the band,
/// sorted. The paper band is the open interval |t| < 1/10; the extended
/// band is (-arcsin(1/3)/pi, 1/2].
pub fn enumerate_band(den_max: u64, mode: DomainMode) -> Vec<BigRational> {
    let mut out = Vec::new();
    // conservative f64 bounds for the extended band edges
    let left_ext = -(1.0f64 / 3.0).asin() / std::f64::consts::PI;
    for q in 1..=den_max {
        let (lo, hi) = match mode {
            DomainMode::Paper => {
                let b = q as f64 / 10.0;
                ((-b).floor() as i64, b.ceil() as i64)
            }
            DomainMode::Extended => (
                (left_ext * q as f64).floor() as i64 - 1,
                (q as f64 / 2.0).ceil() as i64 + 1,
            ),
        };
        for p in lo..=hi {
            if BigInt::from(p).gcd(&BigInt::from(q)) != BigInt::one() {
                continue;
            }
            let t = BigRational::new(BigInt::from(p), BigInt::from(q));
            let inside = match mode {
                DomainMode::Paper => t.abs() < BigRational::new(1.into(), 10.into()),
                DomainMode::Extended => {
                    let tf = p as f64 / q as f64;
                    // strict f64 comparison is safe away from the edge;
                    // near the irrational left edge resolve precisely
                    let right_ok = t <= BigRational::new(1.into(), 2.into());
                    let left_ok = if (tf - left_ext).abs() < 1e-9 {
                        let d = 40;
                        let edge = crate::hiprec::arcsin_hp(&HiReal::from_i64(1, d).divi(3))
                            .expect("1/3 in range")
                            .div_r(&HiReal::pi(d))
                            .neg_r();
                        HiReal::from_rational(&t, d).expect("small rational") > edge
                    } else {
                        tf > left_ext
                    };
                    right_ok && left_ok
                }
            };
            if inside {
                out.push(t);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
