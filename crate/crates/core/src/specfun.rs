//! Logarithm by the arithmetic-geometric mean, and factorials through the
//! Lanczos approximation.
//!
//! Everything here runs at the caller's precision plus [`GUARD_BITS`] and
//! rounds once at the end. `π` and `ln 2` are computed once per working
//! precision and cached process-wide.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{exact_factorial, parse_decimal};
use crate::mpctx::{MpFloat, PrecisionContext};

/// Extra bits carried by the internal arithmetic of this module.
pub const GUARD_BITS: u32 = 32;

const MAX_AGM_STEPS: usize = 400;

/// `π`, `ln 2` and `½·ln(2π)` at one working precision.
#[derive(Debug)]
pub struct LogConstants {
    pub prec: u32,
    pub pi: MpFloat,
    pub ln2: MpFloat,
    pub half_ln_2pi: MpFloat,
}

fn constant_cache() -> &'static Mutex<HashMap<u32, Arc<LogConstants>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<LogConstants>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached constants for working precision `prec`.
pub fn constants(prec: u32) -> Result<Arc<LogConstants>> {
    if let Some(c) = constant_cache().lock().unwrap().get(&prec) {
        return Ok(c.clone());
    }
    // computed outside the lock; a racing thread computes the same values
    let c = Arc::new(compute_constants(prec)?);
    Ok(constant_cache().lock().unwrap().entry(prec).or_insert(c).clone())
}

fn ctx_constants(ctx: &PrecisionContext) -> Result<Arc<LogConstants>> {
    if let Some(c) = ctx.consts.get() {
        return Ok(c.clone());
    }
    let c = constants(ctx.beta() + GUARD_BITS)?;
    Ok(ctx.consts.get_or_init(|| c).clone())
}

fn compute_constants(prec: u32) -> Result<LogConstants> {
    let wp = prec + 16;
    let pi = brent_salamin_pi(wp)?;
    // ln 2 = ln(2^M) / M with s = 2^M far beyond 2^(wp/2)
    let m = wp as i64;
    let a = agm_at(&MpFloat::one(), &MpFloat::pow2(2 - m), wp)?;
    let ln2 = pi.div(&a.mul_pow2(1), wp)?.div(&MpFloat::from_i64(m), wp)?;
    let consts = LogConstants { prec: wp, pi: pi.clone(), ln2: ln2.clone(), half_ln_2pi: MpFloat::zero() };
    let half_ln_2pi = ln_with(&pi.mul_pow2(1), wp, &consts)?.mul_pow2(-1);
    Ok(LogConstants {
        prec,
        pi: pi.round(prec)?,
        ln2: ln2.round(prec)?,
        half_ln_2pi: half_ln_2pi.round(prec)?,
    })
}

fn brent_salamin_pi(prec: u32) -> Result<MpFloat> {
    let mut a = MpFloat::one();
    let mut b = MpFloat::from_ratio(&BigRational::new(1.into(), 2.into()), prec)?.sqrt(prec)?;
    let mut t = MpFloat::pow2(-2);
    for p in 0..MAX_AGM_STEPS as i64 {
        let an = a.add(&b, prec)?.mul_pow2(-1);
        let bn = a.mul(&b, prec)?.sqrt(prec)?;
        let d = a.sub(&an, prec)?;
        t = t.sub(&d.mul(&d, prec)?.mul_pow2(p), prec)?;
        a = an;
        b = bn;
        if close(&a, &b, prec)? {
            break;
        }
    }
    let s = a.add(&b, prec)?;
    s.mul(&s, prec)?.div(&t.mul_pow2(2), prec)
}

/// `|a - b| ≤ 2^-prec · min(a, b)` for positive `a`, `b`.
fn close(a: &MpFloat, b: &MpFloat, prec: u32) -> Result<bool> {
    let d = a.sub(b, prec + 4)?.abs();
    let m = if a < b { a } else { b };
    Ok(d <= m.mul_pow2(-(prec as i64)))
}

fn agm_at(w0: &MpFloat, z0: &MpFloat, prec: u32) -> Result<MpFloat> {
    if !w0.is_positive() || !z0.is_positive() {
        return Err(Error::DomainError("AGM needs positive arguments".into()));
    }
    let mut w = w0.clone();
    let mut z = z0.clone();
    for _ in 0..MAX_AGM_STEPS {
        if close(&w, &z, prec)? {
            break;
        }
        let wn = w.add(&z, prec)?.mul_pow2(-1);
        let zn = w.mul(&z, prec)?.sqrt(prec)?;
        if wn == w && zn == z {
            break;
        }
        w = wn;
        z = zn;
    }
    Ok(w.add(&z, prec)?.mul_pow2(-1))
}

/// Common limit of `w ← (w+z)/2`, `z ← √(wz)` at the context precision.
///
/// Iteration stops once `|w - z| ≤ 2^-beta · min(w, z)` (or the pair stops
/// changing) and returns the rounded midpoint, so the result is symmetric
/// in its arguments and `agm(a, a) = a` for representable `a`.
pub fn agm(w0: &MpFloat, z0: &MpFloat, ctx: &PrecisionContext) -> Result<MpFloat> {
    agm_at(w0, z0, ctx.beta())
}

fn ln_with(x: &MpFloat, prec: u32, c: &LogConstants) -> Result<MpFloat> {
    if !x.is_positive() {
        return Err(Error::DomainError("logarithm of a non-positive number".into()));
    }
    // s = x·2^m lies in [2^(prec/2), 2^prec]
    let m = ((prec as i64 + 3) + 1) / 2 - x.exponent().unwrap();
    let s = x.mul_pow2(m);
    let four_over_s = MpFloat::pow2(2).div(&s, prec)?;
    let a = agm_at(&MpFloat::one(), &four_over_s, prec)?;
    let ln_s = c.pi.div(&a.mul_pow2(1), prec)?;
    let m_ln2 = MpFloat::from_i64(m).mul(&c.ln2, prec)?;
    ln_s.sub(&m_ln2, prec)
}

/// Natural logarithm via `π / (2·AGM(1, 4/s)) − m·ln 2`.
///
/// Additive error is within `tau = 178·beta·2^-beta` of `ln x`.
pub fn log_agm(x: &MpFloat, ctx: &PrecisionContext) -> Result<MpFloat> {
    let c = ctx_constants(ctx)?;
    ln_with(x, c.prec, &c)?.round(ctx.beta())
}

/// `e^x` at `prec` bits (argument reduction by `ln 2`, then halving).
pub(crate) fn exp_at(x: &MpFloat, prec: u32) -> Result<MpFloat> {
    if x.is_zero() {
        return Ok(MpFloat::one());
    }
    let kbits = x.exponent().unwrap().max(0) as u32 + 2;
    const HALVINGS: u32 = 16;
    let wp = prec + kbits + HALVINGS + 24;
    let ln2 = constants(wp)?.ln2.clone();
    let k = x.div(&ln2, wp)?.add(&MpFloat::pow2(-1), wp)?.floor();
    let r = x.sub(&MpFloat::from_bigint(&k).mul(&ln2, wp)?, wp)?;
    let y = r.mul_pow2(-(HALVINGS as i64));
    let mut sum = MpFloat::one();
    let mut term = MpFloat::one();
    let tiny = MpFloat::pow2(-(wp as i64) - 4);
    for i in 1..10_000u64 {
        term = term.mul(&y, wp)?.div(&MpFloat::from_u64(i), wp)?;
        sum = sum.add(&term, wp)?;
        if term.abs() < tiny {
            break;
        }
    }
    for _ in 0..HALVINGS {
        sum = sum.mul(&sum, wp)?;
    }
    let k = k.to_i64().ok_or(Error::Overflow)?;
    sum.mul_pow2(k).round(prec)
}

/// A Lanczos coefficient set with its calibrated relative error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct LanczosParams {
    pub g: BigRational,
    pub coeffs: Vec<BigRational>,
    /// Uniform relative error bound on the factorial; 0 until calibrated.
    pub zeta: f64,
    /// Bits needed to hold the most precise coefficient as written.
    pub coeff_bits: u32,
}

/// `ζ` obtained by [`calibrate_zeta`] for [`LanczosParams::default_set`]
/// over `k ≤ 10^4` at 256 bits (already includes the factor 2).
pub const DEFAULT_ZETA: f64 = 3.7612340816769735e-13;

const DEFAULT_G: &str = "7";
const DEFAULT_COEFFS: [&str; 9] = [
    "0.99999999999980993",
    "676.5203681218851",
    "-1259.1392167224028",
    "771.32342877765313",
    "-176.61502916214059",
    "12.507343278686905",
    "-0.13857109526572012",
    "9.9843695780195716e-6",
    "1.5056327351493116e-7",
];

fn significant_bits(s: &str) -> u32 {
    let mantissa = s.split(['e', 'E']).next().unwrap_or("");
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).skip_while(|c| *c == '0').count();
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
}

impl LanczosParams {
    /// Builds a set from decimal strings; `zeta` starts at 0.
    pub fn from_decimal(g: &str, coeffs: &[&str]) -> Result<Self> {
        let g = parse_decimal(g)?;
        if g.clone() + BigRational::new(1.into(), 2.into()) <= BigRational::zero() {
            return Err(Error::InvalidParam("Lanczos g must satisfy g + 1/2 > 0".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidParam("Lanczos set needs at least one coefficient".into()));
        }
        let coeff_bits = coeffs.iter().map(|c| significant_bits(c)).max().unwrap_or(0);
        let coeffs = coeffs.iter().map(|c| parse_decimal(c)).collect::<Result<Vec<_>>>()?;
        Ok(LanczosParams { g, coeffs, zeta: 0.0, coeff_bits })
    }

    /// g = 7, t = 9 with the widely published 17-digit coefficients.
    pub fn default_set() -> Self {
        let mut lp = LanczosParams::from_decimal(DEFAULT_G, &DEFAULT_COEFFS).expect("built-in set parses");
        lp.zeta = DEFAULT_ZETA;
        lp
    }

    /// Parses `g t` on the first line followed by `t` coefficients, one per
    /// line. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty coefficient file".into() })?;
        let mut parts = header.split_whitespace();
        let g = parts.next().ok_or(Error::Parse { line, msg: "missing g".into() })?;
        let t: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(Error::Parse { line, msg: "missing or invalid t".into() })?;
        let coeffs: Vec<(usize, &str)> = lines.collect();
        if coeffs.len() != t {
            return Err(Error::Parse { line, msg: format!("expected {t} coefficients, found {}", coeffs.len()) });
        }
        for (l, c) in &coeffs {
            parse_decimal(c).map_err(|_| Error::Parse { line: *l, msg: format!("bad coefficient '{c}'") })?;
        }
        let strs: Vec<&str> = coeffs.iter().map(|(_, c)| *c).collect();
        LanczosParams::from_decimal(g, &strs).map_err(|e| Error::Parse { line, msg: e.to_string() })
    }

    pub fn t(&self) -> usize {
        self.coeffs.len()
    }

    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = zeta;
        self
    }

    /// `c_0 + Σ c_i / (k + i)` at `prec` bits.
    fn series(&self, k: &BigUint, prec: u32) -> Result<MpFloat> {
        let mut acc = MpFloat::from_ratio(&self.coeffs[0], prec)?;
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            let ci = MpFloat::from_ratio(c, prec)?;
            let den = MpFloat::from_biguint(&(k + BigUint::from(i))).round(prec)?;
            acc = acc.add(&ci.div(&den, prec)?, prec)?;
        }
        Ok(acc)
    }

    /// `k + g + ½` at `prec` bits.
    fn shifted(&self, k: &BigUint, prec: u32) -> Result<MpFloat> {
        let z = BigRational::from_integer(BigInt::from(k.clone())) + &self.g + BigRational::new(1.into(), 2.into());
        MpFloat::from_ratio(&z, prec)
    }
}

fn half_plus(k: &BigUint, prec: u32) -> Result<MpFloat> {
    MpFloat::from_biguint(k).add(&MpFloat::pow2(-1), prec)
}

/// `√(2π)·(k+g+½)^(k+½)·e^-(k+g+½)·A(k)` rounded to the context precision.
pub fn lanczos_factorial(k: &BigUint, lp: &LanczosParams, ctx: &PrecisionContext) -> Result<MpFloat> {
    let wp = ctx.beta() + GUARD_BITS + 2 * k.bits() as u32 + 16;
    let c = constants(wp)?;
    let z = lp.shifted(k, wp)?;
    let log_pow = half_plus(k, wp)?.mul(&ln_with(&z, wp, &c)?, wp)?.sub(&z, wp)?;
    let e = exp_at(&log_pow, wp)?;
    let root = c.pi.mul_pow2(1).sqrt(wp)?;
    root.mul(&e, wp)?.mul(&lp.series(k, wp)?, wp)?.round(ctx.beta())
}

/// `½·Log(2π) + (k+½)·Log(k+g+½) − (k+g+½) + Log(A(k))` with every
/// logarithm taken by AGM.
pub fn log_factorial(k: &BigUint, lp: &LanczosParams, ctx: &PrecisionContext) -> Result<MpFloat> {
    let c = ctx_constants(ctx)?;
    let wp = c.prec;
    let z = lp.shifted(k, wp)?;
    let a = lp.series(k, wp)?;
    let t2 = half_plus(k, wp)?.mul(&ln_with(&z, wp, &c)?, wp)?;
    let t4 = ln_with(&a, wp, &c)?;
    c.half_ln_2pi.add(&t2, wp)?.sub(&z, wp)?.add(&t4, wp)?.round(ctx.beta())
}

/// Outcome of a calibration scan.
#[derive(Clone, Debug)]
pub struct Calibration {
    /// Twice the largest observed relative error.
    pub zeta: f64,
    pub max_rel_err: f64,
    pub argmax: u64,
    /// Largest error over the lower geometric half of the top decade,
    /// `[n_max/10, n_max/√10)`.
    pub lower_half: f64,
    /// Largest error over `[n_max/√10, n_max]`.
    pub upper_half: f64,
}

/// Relative error of the Lanczos factorial against the exact `k!` for
/// every `k` in `[0, n_max]`; returns `2 × max`.
pub fn calibrate_zeta(lp: &LanczosParams, n_max: u64, ctx: &PrecisionContext) -> Result<Calibration> {
    if n_max < 1000 {
        return Err(Error::InvalidParam(format!("n_max = {n_max} < 1000")));
    }
    if ctx.beta() < 4 * lp.coeff_bits {
        return Err(Error::PrecisionTooLow(format!(
            "calibration at {} bits needs at least 4 x {} coefficient bits",
            ctx.beta(),
            lp.coeff_bits
        )));
    }
    let errs = crate::par::map_chunks(n_max + 1, 256, |range| -> Result<Vec<f64>> {
        let prec = ctx.beta() + 64;
        let mut fact = exact_factorial(range.start)?;
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        for k in range.clone() {
            if k > range.start {
                fact *= k;
            }
            let kb = BigUint::from(k);
            let approx = lanczos_factorial(&kb, lp, ctx)?;
            let exact = MpFloat::from_biguint(&fact).round(prec)?;
            let rel = approx.sub(&exact, prec)?.div(&exact, prec)?.abs();
            out.push(rel.to_f64_up());
        }
        Ok(out)
    });
    let mut all = Vec::with_capacity(n_max as usize + 1);
    for chunk in errs {
        all.extend(chunk?);
    }
    summarize(&all)
}

/// Reduces per-`k` relative errors (index = `k`) to a [`Calibration`],
/// rejecting scans whose error still climbs across the top decade.
fn summarize(errs: &[f64]) -> Result<Calibration> {
    let n_max = errs.len() as u64 - 1;
    let (argmax, max_rel_err) = errs
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |acc, (k, e)| if e > acc.1 { (k, e) } else { acc });
    let range_max = |lo: u64, hi: u64| errs[lo as usize..hi as usize].iter().copied().fold(0.0f64, f64::max);
    let mid = (n_max as f64 / 10f64.sqrt()) as u64;
    let lower_half = range_max(n_max / 10, mid);
    let upper_half = range_max(mid, n_max + 1);
    if upper_half > 2.0 * lower_half {
        return Err(Error::CalibrationUnstable(format!(
            "max error grows from {lower_half:e} to {upper_half:e} across the top decade; \
             raise the working precision"
        )));
    }
    Ok(Calibration { zeta: 2.0 * max_rel_err, max_rel_err, argmax: argmax as u64, lower_half, upper_half })
}

/// Reads a coefficient set from disk (see [`LanczosParams::from_text`]).
pub fn load_lanczos(path: &std::path::Path) -> Result<LanczosParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    LanczosParams::from_text(&text)
}
