//! Command-line front end: single evaluations, volume cross-checks, band
//! scans, verification suites, and orbit exploration, with a persistent
//! result cache and machine-readable JSON output.
//!
//! Angles on the command line are always rational multiples of pi written
//! `p/qpi`; raw radians are refused. Reports embed the resolved
//! configuration and carry a top-level `"schema": "simplexlab/1"` marker.

mod cache;
mod verify;

pub use cache::{CacheEntry, CacheKey, FsCache};
pub use verify::{run_suite, CheckResult};

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::hiprec::HiReal;
use crate::orbit::{explore, ExploreOptions};
use crate::ratlab::{self, EvalCache};
use crate::simplex::{dihedral_to_edge, make_vertices};
use crate::volume::{
    mc_volume, vol_by_ode, vol_closed_form, vol_form8, DomainMode, Route, TParam, VolumeResult,
};

pub const SCHEMA: &str = "simplexlab/1";

const EXIT_OK: i32 = 0;
const EXIT_FAIL: i32 = 1;
const EXIT_DOMAIN: i32 = 2;
const EXIT_NONCONVERGENCE: i32 = 3;
const EXIT_ROUTE_DISAGREEMENT: i32 = 4;

/// Resolved runtime configuration (defaults < config file < flags).
#[derive(Clone, Debug, Serialize)]
pub struct Config {
    pub precision_digits: usize,
    pub tolerance: String,
    pub schlafli_coefficient: u32,
    pub max_den: u64,
    pub cache_dir: String,
    pub extended_domain: bool,
    pub mc_seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precision_digits: 80,
            tolerance: "1e-60".to_string(),
            schlafli_coefficient: 3,
            max_den: 100_000_000,
            cache_dir: ".simplexlab-cache".to_string(),
            extended_domain: false,
            mc_seed: 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "simplexlab",
    about = "High-precision laboratory for regular spherical simplex volumes and rationality scans",
    version
)]
pub struct Cli {
    #[command(flatten)]
    pub globals: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Decimal digits of working precision [default: 80]
    #[arg(long, global = true)]
    pub digits: Option<usize>,

    /// Absolute tolerance for volume quadrature [default: 1e-60]
    #[arg(long, global = true)]
    pub tol: Option<String>,

    /// Allow t in the extended domain (-arcsin(1/3)/pi, 1/2]
    #[arg(long, global = true)]
    pub extended: bool,

    /// Volume-rate coefficient; 3 is pinned by the oracles, 6 reproduces
    /// the doubled text [default: 3]
    #[arg(long = "schlafli-coefficient", global = true)]
    pub schlafli_coefficient: Option<u32>,

    /// Directory of the persistent result cache [default: .simplexlab-cache]
    #[arg(long = "cache-dir", global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Emit a single machine-readable JSON object
    #[arg(long, global = true)]
    pub json: bool,

    /// Monte Carlo seed [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Denominator bound for rational reconstruction [default: 100000000]
    #[arg(long = "max-den", global = true)]
    pub max_den: Option<u64>,

    /// key=value configuration file; flags win over the file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate f(t) at a rational argument
    F {
        /// Rational argument t as p/q
        #[arg(long)]
        t: String,
    },
    /// Volume of sigma(phi) by one or all routes
    Volume {
        /// Dihedral angle as a rational multiple of pi, e.g. 1/2pi
        #[arg(long)]
        phi: Option<String>,
        /// Alternatively the parameter t = (phi - pi/2)/pi as p/q
        #[arg(long)]
        t: Option<String>,
        /// ode | form8 | closed10 | montecarlo | all
        #[arg(long, default_value = "all")]
        route: String,
        /// Monte Carlo sample count
        #[arg(long = "mc-n", default_value_t = 1_000_000)]
        mc_n: u64,
    },
    /// Scan all lowest-terms rationals p/q, q <= den-max, in a band
    Scan {
        #[arg(long = "den-max")]
        den_max: u64,
        /// paper (|t| < 1/10) or extended
        #[arg(long, default_value = "paper")]
        band: String,
        /// Output prefix for the JSON and CSV reports
        #[arg(long, default_value = "scan_report")]
        out: PathBuf,
    },
    /// Run the verification suites
    Verify {
        /// chain | schlafli | tilings | orbit | all
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Explore the facet-reflection orbit of sigma(phi)
    Orbit {
        /// Dihedral angle as a rational multiple of pi, e.g. 1/2pi
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long = "max-tiles", default_value_t = 20_000)]
        max_tiles: usize,
        /// Rounding quantum (decimal digits) for tile deduplication
        #[arg(long, default_value_t = 40)]
        quantum: usize,
        /// Output path for the JSON report
        #[arg(long, default_value = "orbit_report.json")]
        out: PathBuf,
    },
}

/// Parses `p/q` (or a bare integer) into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Parses an angle spec `p/qpi` into the rational multiplier of pi.
/// Raw radians are refused by design.
pub fn parse_phi_spec(s: &str) -> Result<BigRational> {
    let trimmed = s.trim();
    let body = trimmed
        .strip_suffix("pi")
        .ok_or_else(|| {
            Error::Parse(format!(
                "angle {trimmed:?} must be a rational multiple of pi written p/qpi (raw radians are refused)"
            ))
        })?
        .trim();
    parse_rational(body)
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "{}:{}: expected key=value, got {raw:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Applies precedence: defaults < config file < flags, then validates.
pub fn resolve_config(globals: &GlobalArgs) -> Result<Config> {
    let mut cfg = Config::default();
    if let Some(path) = globals.config.as_ref() {
        let file = parse_config_file(path)?;
        for (key, value) in &file {
            let bad = || Error::Parse(format!("config {key}: bad value {value:?}"));
            match key.as_str() {
                "precision_digits" => cfg.precision_digits = value.parse().map_err(|_| bad())?,
                "tolerance" => cfg.tolerance = value.clone(),
                "schlafli_coefficient" => {
                    cfg.schlafli_coefficient = value.parse().map_err(|_| bad())?
                }
                "max_den" => cfg.max_den = value.parse().map_err(|_| bad())?,
                "cache_dir" => cfg.cache_dir = value.clone(),
                "extended_domain" => cfg.extended_domain = value.parse().map_err(|_| bad())?,
                "mc_seed" => cfg.mc_seed = value.parse().map_err(|_| bad())?,
                _ => return Err(Error::Parse(format!("unknown config key {key:?}"))),
            }
        }
    }
    if let Some(d) = globals.digits {
        cfg.precision_digits = d;
    }
    if let Some(t) = globals.tol.as_ref() {
        cfg.tolerance = t.clone();
    }
    if globals.extended {
        cfg.extended_domain = true;
    }
    if let Some(k) = globals.schlafli_coefficient {
        cfg.schlafli_coefficient = k;
    }
    if let Some(dir) = globals.cache_dir.as_ref() {
        cfg.cache_dir = dir.display().to_string();
    }
    if let Some(s) = globals.seed {
        cfg.mc_seed = s;
    }
    if let Some(m) = globals.max_den {
        cfg.max_den = m;
    }

    if cfg.precision_digits < 30 {
        return Err(Error::Domain(format!(
            "precision_digits must be >= 30, got {}",
            cfg.precision_digits
        )));
    }
    if cfg.schlafli_coefficient != 3 && cfg.schlafli_coefficient != 6 {
        return Err(Error::Domain(format!(
            "schlafli_coefficient must be 3 or 6, got {}",
            cfg.schlafli_coefficient
        )));
    }
    let tol = HiReal::parse(&cfg.tolerance, 40)?;
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    Ok(cfg)
}

fn mode_of(cfg: &Config) -> DomainMode {
    if cfg.extended_domain {
        DomainMode::Extended
    } else {
        DomainMode::Paper
    }
}

fn band_name(mode: DomainMode) -> &'static str {
    match mode {
        DomainMode::Paper => "paper",
        DomainMode::Extended => "extended",
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Parse(_) => EXIT_DOMAIN,
        Error::NonConvergence(_) => EXIT_NONCONVERGENCE,
        _ => EXIT_FAIL,
    }
}

fn tol_of(cfg: &Config) -> HiReal {
    // validated by resolve_config
    let probe = HiReal::parse(&cfg.tolerance, 40).expect("validated tolerance");
    let digits = (-probe.dec_exponent().unwrap_or(0)).max(0) as usize + 20;
    HiReal::parse(&cfg.tolerance, digits).expect("validated tolerance")
}

/// Atomic file write: temp file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Entry point used by `main`; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let cfg = match resolve_config(&cli.globals) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let json = cli.globals.json;
    let result = match &cli.command {
        Command::F { t } => cmd_f(&cfg, t, json),
        Command::Volume {
            phi,
            t,
            route,
            mc_n,
        } => cmd_volume(&cfg, phi.as_deref(), t.as_deref(), route, *mc_n, json),
        Command::Scan { den_max, band, out } => cmd_scan(&cfg, *den_max, band, out, json),
        Command::Verify { suite } => cmd_verify(&cfg, suite, json),
        Command::Orbit {
            phi,
            depth,
            max_tiles,
            quantum,
            out,
        } => cmd_orbit(&cfg, phi, *depth, *max_tiles, *quantum, out, json),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn cmd_f(cfg: &Config, t_str: &str, json: bool) -> Result<i32> {
    let t = parse_rational(t_str)?;
    let mode = mode_of(cfg);
    let digits = cfg.precision_digits;
    let cache = FsCache::new(Path::new(&cfg.cache_dir))?;
    let key = ratlab::cache_key(&t, digits, mode);

    let (value, bound_str, cached) = match cache.get(&key) {
        Some(v) => (v, format!("1e-{digits}"), true),
        None => {
            let tol = HiReal::pow10(-(digits as i64), digits + 10);
            let q = crate::volume::eval_f(&TParam::Rational(t.clone()), &tol, mode)?;
            let rendered = q.estimate.with_digits(digits + 10).to_decimal_sig(digits);
            cache.put(&key, &rendered);
            (rendered, q.error_bound.to_decimal_sig(3), false)
        }
    };

    if json {
        let obj = json!({
            "schema": SCHEMA,
            "command": "f",
            "t": format!("{}/{}", t.numer(), t.denom()),
            "digits": digits,
            "band": band_name(mode),
            "f": value,
            "error_bound": bound_str,
            "cached": cached,
        });
        println!("{obj}");
    } else {
        println!("f({}/{}) = {}", t.numer(), t.denom(), value);
        println!("error bound <= {bound_str}{}", if cached { " (cached)" } else { "" });
        println!("band: {}", band_name(mode));
    }
    Ok(EXIT_OK)
}

struct RouteRow {
    route: String,
    volume: Option<VolumeResult>,
    mc: Option<(f64, f64, u64)>,
    note: Option<String>,
}

fn cmd_volume(
    cfg: &Config,
    phi_spec: Option<&str>,
    t_spec: Option<&str>,
    route: &str,
    mc_n: u64,
    json: bool,
) -> Result<i32> {
    let half = BigRational::new(1.into(), 2.into());
    let (phi_frac, t) = match (phi_spec, t_spec) {
        (Some(p), None) => {
            let frac = parse_phi_spec(p)?;
            let t = &frac - &half;
            (frac, t)
        }
        (None, Some(ts)) => {
            let t = parse_rational(ts)?;
            (&t + &half, t)
        }
        _ => {
            return Err(Error::Parse(
                "exactly one of --phi or --t must be given".into(),
            ))
        }
    };
    let mode = mode_of(cfg);
    let k = cfg.schlafli_coefficient;
    let tol = tol_of(cfg);
    let tparam = TParam::Rational(t.clone());
    let digits = cfg.precision_digits;
    let phi_hr = |d: usize| -> Result<HiReal> {
        Ok(&HiReal::pi(d) * &HiReal::from_rational(&phi_frac, d)?)
    };

    let narrow_band = t.abs() < BigRational::new(1.into(), 10.into());
    let wanted: Vec<&str> = match route {
        "all" => vec!["ode", "form8", "closed10", "montecarlo"],
        "ode" | "form8" | "closed10" | "montecarlo" => vec![route],
        other => {
            return Err(Error::Parse(format!(
                "unknown route {other:?}; expected ode | form8 | closed10 | montecarlo | all"
            )))
        }
    };

    let mut rows: Vec<RouteRow> = Vec::new();
    for r in &wanted {
        match *r {
            "ode" => {
                let v = vol_by_ode(&phi_hr(digits + 40)?, &tol, k)?;
                rows.push(RouteRow {
                    route: Route::Form7.as_str().into(),
                    volume: Some(v),
                    mc: None,
                    note: None,
                });
            }
            "form8" => {
                if narrow_band {
                    let v = vol_form8(&tparam, &tol, k)?;
                    rows.push(RouteRow {
                        route: Route::Form8.as_str().into(),
                        volume: Some(v),
                        mc: None,
                        note: None,
                    });
                } else if route == "all" {
                    rows.push(RouteRow {
                        route: Route::Form8.as_str().into(),
                        volume: None,
                        mc: None,
                        note: Some("skipped: only valid on |t| < 1/10".into()),
                    });
                } else {
                    // explicit request outside the band is a domain error
                    vol_form8(&tparam, &tol, k)?;
                }
            }
            "closed10" => {
                let v = vol_closed_form(&tparam, &tol, k, mode)?;
                rows.push(RouteRow {
                    route: Route::Closed10.as_str().into(),
                    volume: Some(v),
                    mc: None,
                    note: None,
                });
            }
            "montecarlo" => {
                let d = 60;
                let x = dihedral_to_edge(&phi_hr(d)?)?;
                let s = make_vertices(&x)?;
                let (est, stderr) = mc_volume(&s, mc_n, cfg.mc_seed)?;
                rows.push(RouteRow {
                    route: Route::MonteCarlo.as_str().into(),
                    volume: None,
                    mc: Some((est, stderr, mc_n)),
                    note: None,
                });
            }
            _ => unreachable!(),
        }
    }

    // cross-checks
    let mut disagreement = false;
    let mut deltas: Vec<(String, String, String, bool)> = Vec::new();
    let quad: Vec<&RouteRow> = rows.iter().filter(|r| r.volume.is_some()).collect();
    for i in 0..quad.len() {
        for j in i + 1..quad.len() {
            let a = quad[i].volume.as_ref().unwrap();
            let b = quad[j].volume.as_ref().unwrap();
            let delta = (&a.volume - &b.volume).abs();
            let cap = &a.error_bound.with_digits(40) + &b.error_bound.with_digits(40);
            let ok = delta <= cap;
            if !ok {
                disagreement = true;
            }
            deltas.push((
                quad[i].route.clone(),
                quad[j].route.clone(),
                delta.to_decimal_sig(3),
                ok,
            ));
        }
    }
    if let Some(mc_row) = rows.iter().find(|r| r.mc.is_some()) {
        if let Some(qrow) = quad.first() {
            let (est, stderr, _) = mc_row.mc.unwrap();
            let target = qrow.volume.as_ref().unwrap().volume.to_f64();
            let ok = (est - target).abs() <= 4.0 * stderr;
            if !ok {
                disagreement = true;
            }
            deltas.push((
                mc_row.route.clone(),
                qrow.route.clone(),
                format!("{:.3e}", (est - target).abs()),
                ok,
            ));
        }
    }

    if json {
        let obj = json!({
            "schema": SCHEMA,
            "command": "volume",
            "phi": format!("{}/{} pi", phi_frac.numer(), phi_frac.denom()),
            "t": format!("{}/{}", t.numer(), t.denom()),
            "k_schlafli": k,
            "band": band_name(mode),
            "routes": rows.iter().map(|r| match (&r.volume, &r.mc) {
                (Some(v), _) => json!({
                    "route": r.route,
                    "volume": v.volume.to_decimal_sig(digits),
                    "error_bound": v.error_bound.to_decimal_sig(3),
                }),
                (None, Some((est, stderr, n))) => json!({
                    "route": r.route,
                    "volume": format!("{est:.8e}"),
                    "stderr": format!("{stderr:.3e}"),
                    "samples": n,
                }),
                (None, None) => json!({ "route": r.route, "note": r.note }),
            }).collect::<Vec<_>>(),
            "deltas": deltas.iter().map(|(a, b, d, ok)| json!({
                "pair": format!("{a}~{b}"), "delta": d, "within_bounds": ok
            })).collect::<Vec<_>>(),
            "agreement": !disagreement,
        });
        println!("{obj}");
    } else {
        println!(
            "vol sigma({}/{} pi)   [t = {}/{}, K = {k}, band = {}]",
            phi_frac.numer(),
            phi_frac.denom(),
            t.numer(),
            t.denom(),
            band_name(mode)
        );
        for r in &rows {
            match (&r.volume, &r.mc) {
                (Some(v), _) => println!(
                    "  {:<11} {}   (bound {})",
                    r.route,
                    v.volume.to_decimal_sig(digits.min(50)),
                    v.error_bound.to_decimal_sig(3)
                ),
                (None, Some((est, stderr, n))) => println!(
                    "  {:<11} {est:.8e}   (stderr {stderr:.3e}, n = {n})",
                    r.route
                ),
                (None, None) => println!("  {:<11} {}", r.route, r.note.as_deref().unwrap_or("")),
            }
        }
        if let Some(first) = quad.first() {
            let v = first.volume.as_ref().unwrap();
            let d = v.volume.digits();
            let ratio = &v.volume / &HiReal::pi(d).square();
            print!("  volume / pi^2 = {}", ratio.to_decimal_sig(30));
            if let Ok(Some(cand)) = ratlab::rational_reconstruct(&ratio.with_digits(40), 100_000, 40)
            {
                print!("  ~= {}/{}", cand.numer(), cand.denom());
            }
            println!();
        }
        for (a, b, d, ok) in &deltas {
            println!(
                "  delta {a} ~ {b}: {d} {}",
                if *ok { "(within bounds)" } else { "(DISAGREES)" }
            );
        }
    }
    if disagreement {
        eprintln!("error: routes disagree beyond combined error bounds");
        return Ok(EXIT_ROUTE_DISAGREEMENT);
    }
    Ok(EXIT_OK)
}

fn verdict_entry_json(v: &ratlab::RationalityVerdict) -> serde_json::Value {
    json!({
        "t": format!("{}/{}", v.t.numer(), v.t.denom()),
        "p": v.t.numer().to_string(),
        "q": v.t.denom().to_string(),
        "digits": v.digits_used,
        "band": v.band,
        "verdict": v.verdict.as_str(),
        "candidate": v.candidate.as_ref().map(|c| format!("{}/{}", c.numer(), c.denom())),
        "quality": v.quality.as_ref().map(|q| q.to_decimal_sig(6)),
        "cf_terms": v.cf_terms.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "note": v.note,
    })
}

fn scan_report_json(cfg: &Config, den_max: u64, report: &ratlab::ScanReport) -> serde_json::Value {
    json!({
        "schema": SCHEMA,
        "command": "scan",
        "config": cfg,
        "den_max": den_max,
        "band": band_name(report.mode),
        "digits": report.digits,
        "max_den": report.max_den,
        "summary": {
            "entries": report.entries.len(),
            "exact_rational_candidate": report.summary.exact_rational_candidate,
            "no_small_rational": report.summary.no_small_rational,
            "inconclusive": report.summary.inconclusive,
        },
        "entries": report.entries.iter().map(verdict_entry_json).collect::<Vec<_>>(),
    })
}

fn scan_report_csv(report: &ratlab::ScanReport) -> String {
    let mut out = String::from("t,p,q,digits,band,verdict,candidate,quality,cf_terms\n");
    for v in &report.entries {
        let cand = v
            .candidate
            .as_ref()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .unwrap_or_default();
        let quality = v
            .quality
            .as_ref()
            .map(|q| q.to_decimal_sig(6))
            .unwrap_or_default();
        let cf = v
            .cf_terms
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{}/{},{},{},{},{},{},{},{},{}\n",
            v.t.numer(),
            v.t.denom(),
            v.t.numer(),
            v.t.denom(),
            v.digits_used,
            v.band,
            v.verdict.as_str(),
            cand,
            quality,
            cf
        ));
    }
    out
}

fn cmd_scan(cfg: &Config, den_max: u64, band: &str, out: &Path, json: bool) -> Result<i32> {
    if den_max < 1 {
        return Err(Error::Domain("den-max must be >= 1".into()));
    }
    let mode = match band {
        "paper" => DomainMode::Paper,
        "extended" => DomainMode::Extended,
        other => {
            return Err(Error::Parse(format!(
                "unknown band {other:?}; expected paper | extended"
            )))
        }
    };
    let ts = ratlab::enumerate_band(den_max, mode);
    let cache = FsCache::new(Path::new(&cfg.cache_dir))?;
    let report = ratlab::scan(&ts, cfg.precision_digits, cfg.max_den, mode, &cache);

    let json_path = out.with_extension("json");
    let csv_path = out.with_extension("csv");
    let json_value = scan_report_json(cfg, den_max, &report);
    write_atomic(&json_path, serde_json::to_string_pretty(&json_value)?.as_bytes())?;
    write_atomic(&csv_path, scan_report_csv(&report).as_bytes())?;

    if json {
        println!("{json_value}");
    } else {
        println!(
            "scan: band {}, den-max {den_max}, digits {}, max-den {}",
            band_name(mode),
            report.digits,
            report.max_den
        );
        for v in &report.entries {
            let tail = match v.verdict {
                ratlab::Verdict::ExactRationalCandidate => format!(
                    "candidate {}",
                    v.candidate
                        .as_ref()
                        .map(|c| format!("{}/{}", c.numer(), c.denom()))
                        .unwrap_or_default()
                ),
                ratlab::Verdict::NoSmallRational => {
                    format!("no rational with q <= {}", report.max_den)
                }
                ratlab::Verdict::Inconclusive => {
                    format!("inconclusive: {}", v.note.as_deref().unwrap_or("?"))
                }
            };
            println!(
                "  t = {:>8}  {:<26} {}",
                format!("{}/{}", v.t.numer(), v.t.denom()),
                v.verdict.as_str(),
                tail
            );
        }
        println!(
            "summary: {} entries | {} exact-rational-candidate | {} no-small-rational | {} inconclusive",
            report.entries.len(),
            report.summary.exact_rational_candidate,
            report.summary.no_small_rational,
            report.summary.inconclusive
        );
        println!("reports: {} and {}", json_path.display(), csv_path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_verify(cfg: &Config, suite: &str, json: bool) -> Result<i32> {
    if !["chain", "schlafli", "tilings", "orbit", "all"].contains(&suite) {
        return Err(Error::Parse(format!(
            "unknown suite {suite:?}; expected chain | schlafli | tilings | orbit | all"
        )));
    }
    let results = run_suite(suite, cfg.schlafli_coefficient, cfg.mc_seed);
    let all_pass = results.iter().all(|r| r.passed);
    if json {
        let obj = json!({
            "schema": SCHEMA,
            "command": "verify",
            "suite": suite,
            "passed": all_pass,
            "results": results.iter().map(|r| json!({
                "name": r.name, "passed": r.passed, "detail": r.detail
            })).collect::<Vec<_>>(),
        });
        println!("{obj}");
    } else {
        for r in &results {
            println!(
                "[{}] {}{}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                if r.detail.is_empty() {
                    String::new()
                } else {
                    format!(" - {}", r.detail)
                }
            );
        }
        println!(
            "{}: {} of {} checks passed",
            if all_pass { "ok" } else { "FAILED" },
            results.iter().filter(|r| r.passed).count(),
            results.len()
        );
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_orbit(
    cfg: &Config,
    phi_spec: &str,
    depth: usize,
    max_tiles: usize,
    quantum: usize,
    out: &Path,
    json: bool,
) -> Result<i32> {
    let phi_frac = parse_phi_spec(phi_spec)?;
    let digits = cfg.precision_digits.max(quantum + 20);
    let opts = ExploreOptions {
        max_depth: depth,
        max_tiles,
        quantum,
        digits,
        sample_seed: cfg.mc_seed,
        sample_count: 100,
        w_band: 1e-8,
    };
    let report = match explore(&phi_frac, &opts) {
        Ok(r) => r,
        Err(e @ Error::KeyUnstable(_)) => {
            // entry-level warning, not a hard failure
            eprintln!("warning: {e}");
            let obj = json!({
                "schema": SCHEMA,
                "command": "orbit",
                "phi": format!("{}/{} pi", phi_frac.numer(), phi_frac.denom()),
                "warning": e.to_string(),
            });
            write_atomic(out, serde_json::to_string_pretty(&obj)?.as_bytes())?;
            if json {
                println!("{obj}");
            }
            return Ok(EXIT_OK);
        }
        Err(e) => return Err(e),
    };

    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &report.multiplicity_samples {
        *histogram.entry(s.count).or_insert(0) += 1;
    }
    let obj = json!({
        "schema": SCHEMA,
        "command": "orbit",
        "config": cfg,
        "phi": format!("{}/{} pi", phi_frac.numer(), phi_frac.denom()),
        "depth": depth,
        "max_tiles": max_tiles,
        "quantum": quantum,
        "tiles_per_depth": report.tiles_per_depth,
        "distinct_tiles": report.distinct_tiles,
        "distinct_vertices": report.distinct_vertices,
        "closed": report.closed,
        "capped": report.capped,
        "multiplicity_histogram": histogram.iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
        "multiplicity_samples": report.multiplicity_samples.iter().map(|s| json!({
            "point": s.point, "count": s.count
        })).collect::<Vec<_>>(),
    });
    write_atomic(out, serde_json::to_string_pretty(&obj)?.as_bytes())?;

    if json {
        println!("{obj}");
    } else {
        println!(
            "orbit sigma({}/{} pi): tiles per depth {:?}",
            phi_frac.numer(),
            phi_frac.denom(),
            report.tiles_per_depth
        );
        println!(
            "  distinct tiles {} | distinct vertices {} | closed: {} | capped: {}",
            report.distinct_tiles, report.distinct_vertices, report.closed, report.capped
        );
        println!("  multiplicity histogram: {histogram:?}");
        println!("  report: {}", out.display());
    }
    Ok(EXIT_OK)
}

/// Convenience for tests: run from an argument vector.
pub fn run_from<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = write!(std::io::stderr(), "{e}");
            EXIT_DOMAIN
        }
    }
}
