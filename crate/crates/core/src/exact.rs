//! Exact ground truth: factorials, rational Binomial PMFs, exact
//! statistical distance, and inverse-CDF sampling that compares a dyadic
//! uniform against the exact CDF.

use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::mpctx::{MpFloat, PrecisionContext};
use crate::par::map_chunks;
use crate::rng::{draw_bits, StreamRng};
use crate::sampler::CHUNK;

pub const MAX_FACTORIAL_ARG: u64 = 1_000_000;
pub const MAX_PMF_N: u64 = 10_000;

/// Parses a decimal literal such as `-12.5e-3` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParam(format!("not a decimal number: '{s}'"));
    let t = s.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if exp.abs() > 100_000 {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

fn product(lo: u64, hi: u64) -> BigUint {
    // product of lo..=hi by binary splitting
    if lo > hi {
        return BigUint::one();
    }
    if hi - lo < 32 {
        return (lo..=hi).fold(BigUint::one(), |acc, i| acc * i);
    }
    let mid = lo + (hi - lo) / 2;
    product(lo, mid) * product(mid + 1, hi)
}

/// `k!` exactly.
pub fn exact_factorial(k: u64) -> Result<BigUint> {
    if k > MAX_FACTORIAL_ARG {
        return Err(Error::ResourceLimit(format!("factorial argument {k} > {MAX_FACTORIAL_ARG}")));
    }
    Ok(product(2, k))
}

fn check_probability(p: &BigRational) -> Result<()> {
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(Error::InvalidParam(format!("p = {p} is not in (0, 1)")));
    }
    Ok(())
}

/// Binomial PMF with exact rational masses.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPmf {
    pub n: u64,
    pub p: BigRational,
    pub probs: Vec<BigRational>,
}

impl ExactPmf {
    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(ratio_to_f64).collect()
    }

    pub fn total(&self) -> BigRational {
        self.probs.iter().cloned().sum()
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    MpFloat::from_ratio(r, 64).map(|x| x.to_f64()).unwrap_or(0.0)
}

/// `b(n, p)(k) = C(n, k)·p^k·(1-p)^(n-k)` for every `k`, exactly.
pub fn exact_pmf(n: u64, p: &BigRational) -> Result<ExactPmf> {
    if n > MAX_PMF_N {
        return Err(Error::ResourceLimit(format!("exact PMF for n = {n} > {MAX_PMF_N}")));
    }
    if n == 0 {
        return Err(Error::InvalidParam("n must be positive".into()));
    }
    check_probability(p)?;
    let a = p.numer().magnitude().clone();
    let d = p.denom().magnitude().clone();
    let b = &d - &a;
    let denom = BigInt::from(num_traits::pow(d, n as usize));
    // b^(n-k) for k = 0..=n, built from the top
    let mut b_pows = vec![BigUint::one(); n as usize + 1];
    for k in (0..n as usize).rev() {
        b_pows[k] = &b_pows[k + 1] * &b;
    }
    let mut probs = Vec::with_capacity(n as usize + 1);
    let mut binom = BigUint::one();
    let mut a_pow = BigUint::one();
    for k in 0..=n {
        let num = &binom * &a_pow * &b_pows[k as usize];
        probs.push(BigRational::new(BigInt::from(num), denom.clone()));
        binom = binom * (n - k) / (k + 1);
        a_pow *= &a;
    }
    Ok(ExactPmf { n, p: p.clone(), probs })
}

/// `½·Σ|a_k − b_k|` exactly.
pub fn exact_dtv(a: &[BigRational], b: &[BigRational]) -> Result<BigRational> {
    if a.len() != b.len() {
        return Err(Error::SupportMismatch(a.len(), b.len()));
    }
    let sum: BigRational = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / BigRational::from_integer(2.into()))
}

/// `(n + 1)·2^(-beta-1)`, rounded up to `f64`.
pub fn grid_delta(n: &BigUint, beta: u32) -> f64 {
    MpFloat::from_biguint(&(n + 1u32)).mul_pow2(-(beta as i64) - 1).to_f64_up()
}

/// Inverse-CDF sampling against exact rational prefix sums.
#[derive(Clone, Debug)]
pub struct ExactSampler {
    n: u64,
    cdf: Vec<BigRational>,
}

impl ExactSampler {
    pub fn new(pmf: &ExactPmf) -> Self {
        let mut acc = BigRational::zero();
        let cdf = pmf
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc.clone()
            })
            .collect();
        ExactSampler { n: pmf.n, cdf }
    }

    /// Smallest `k` with `CDF(k) > j·2^-beta`.
    pub fn index_for(&self, j: &BigUint, beta: u32) -> u64 {
        let j = BigInt::from(j.clone());
        // CDF is nondecreasing; find the first entry above U
        let above = |c: &BigRational| c.numer() << beta as u64 > &j * c.denom();
        let (mut lo, mut hi) = (0usize, self.cdf.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if above(&self.cdf[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo as u64
    }

    pub fn sample<R: RngCore + ?Sized>(&self, beta: u32, rng: &mut R) -> u64 {
        self.index_for(&draw_bits(rng, beta), beta)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Counts over `count` draws, chunked and seeded like
    /// [`BinomialSampler::histogram`](crate::sampler::BinomialSampler::histogram).
    pub fn histogram(&self, count: u64, beta: u32, root: &StreamRng) -> Vec<u64> {
        let chunks = map_chunks(count, CHUNK, |range| {
            let mut rng = root.split(range.start / CHUNK);
            let mut hist = vec![0u64; self.n as usize + 1];
            for _ in range {
                hist[self.sample(beta, &mut rng) as usize] += 1;
            }
            hist
        });
        let mut hist = vec![0u64; self.n as usize + 1];
        for h in chunks {
            hist.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        }
        hist
    }
}

/// One exact draw: `(k, delta_out)` with `delta_out = (n+1)·2^(-beta-1)`.
pub fn exact_sample<R: RngCore + ?Sized>(pmf: &ExactPmf, ctx: &PrecisionContext, rng: &mut R) -> (u64, f64) {
    let k = ExactSampler::new(pmf).sample(ctx.beta(), rng);
    (k, grid_delta(&BigUint::from(pmf.n), ctx.beta()))
}

/// Plug-in statistical distance between a histogram and a PMF.
pub fn empirical_dtv(hist: &[u64], pmf: &ExactPmf) -> Result<f64> {
    if hist.len() != pmf.probs.len() {
        return Err(Error::SupportMismatch(hist.len(), pmf.probs.len()));
    }
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let s = total as f64;
    let l1: f64 = hist.iter().zip(pmf.to_f64()).map(|(&c, p)| (c as f64 / s - p).abs()).sum();
    Ok(0.5 * l1)
}

/// Decimal expansion of a nonnegative rational, truncated after `digits`
/// fractional digits.
pub fn decimal_truncated(r: &BigRational, digits: usize) -> String {
    let neg = r.is_negative();
    let r = r.abs();
    let (int, rem) = r.numer().div_rem(r.denom());
    let scaled = rem * num_traits::pow(BigInt::from(10), digits) / r.denom();
    let mut frac = scaled.to_string();
    while frac.len() < digits {
        frac.insert(0, '0');
    }
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

/// `k,probability` rows with 50 truncated fractional digits.
pub fn pmf_csv(pmf: &ExactPmf) -> String {
    let mut out = String::from("k,probability\n");
    for (k, p) in pmf.probs.iter().enumerate() {
        let _ = writeln!(out, "{k},{}", decimal_truncated(p, 50));
    }
    out
}

/// `Σ_{j≤k} C(n,j)·p^j·(1-p)^(n-j)` exactly.
pub fn exact_cdf_at(n: u64, p: &BigRational, k: u64) -> BigRational {
    let q = BigRational::one() - p;
    let mut term = num_traits::pow(q.clone(), n as usize);
    let ratio = p / &q;
    let mut acc = term.clone();
    for j in 0..k.min(n) {
        term = term * &ratio * BigRational::new(BigInt::from(n - j), BigInt::from(j + 1));
        acc += &term;
    }
    acc
}

/// Certified lower/upper bounds on the CDF at one working precision.
#[derive(Debug)]
struct CdfBounds {
    lower: Vec<MpFloat>,
    upper: Vec<MpFloat>,
}

/// Exact inverse-CDF sampling for Binomial laws with any `n` and small
/// mean.
///
/// The CDF is bracketed at a working precision; a uniform falling inside a
/// bracket triggers a rebuild at twice the precision, and as a last resort
/// an exact rational comparison (`n ≤ 10^5`). For a given uniform it
/// returns the same `k` as [`ExactSampler`].
#[derive(Debug)]
pub struct InverseCdfSampler {
    n: BigUint,
    p: BigRational,
    beta: u32,
    levels: Mutex<Vec<Arc<CdfBounds>>>,
}

const MAX_LEVELS: usize = 4;
const EXACT_TIE_LIMIT: u64 = 100_000;
const MAX_TABLE: u64 = 10_000_000;

impl InverseCdfSampler {
    pub fn new(n: BigUint, p: BigRational, beta: u32) -> Result<Self> {
        check_probability(&p)?;
        if n.is_zero() {
            return Err(Error::InvalidParam("n must be positive".into()));
        }
        let s = InverseCdfSampler { n, p, beta, levels: Mutex::new(Vec::new()) };
        s.level(0)?;
        Ok(s)
    }

    pub fn delta_out(&self) -> f64 {
        grid_delta(&self.n, self.beta)
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    fn level(&self, i: usize) -> Result<Arc<CdfBounds>> {
        let mut levels = self.levels.lock().unwrap();
        while levels.len() <= i {
            let prec = (self.beta + 2 * self.n.bits() as u32 + 64) << levels.len();
            levels.push(Arc::new(self.build(prec)?));
        }
        Ok(levels[i].clone())
    }

    fn build(&self, prec: u32) -> Result<CdfBounds> {
        let u = MpFloat::pow2(-(prec as i64));
        let three_u = MpFloat::from_u64(3).mul_pow2(-(prec as i64));
        let q = BigRational::one() - &self.p;
        let qf = MpFloat::from_ratio(&q, prec)?;
        let mut b = pow_biguint(&qf, &self.n, prec)?;
        // rounding q and ~2·log2(n) products: relative error below 8·n·u
        let mut err_b = MpFloat::from_biguint(&self.n).mul_pow2(3 - prec as i64);
        let mut sum = b.clone();
        let mut err_s = err_b.add(&u, 64)?;
        let one = MpFloat::one();
        let top = one.sub(&MpFloat::pow2(-(self.beta as i64)), prec + 8)?;
        let ratio_pq = &self.p / &q;
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut k = BigUint::zero();
        loop {
            if k == self.n {
                lower.push(one.clone());
                upper.push(one.clone());
                break;
            }
            let lo = sum.mul(&one.sub(&err_s.mul_pow2(1), 64)?, prec)?;
            let hi = sum.mul(&one.add(&err_s.mul(&MpFloat::from_u64(3), 64)?, 64)?, prec)?;
            let done = lo > top;
            lower.push(lo);
            upper.push(hi);
            if done {
                break;
            }
            if lower.len() as u64 > MAX_TABLE {
                return Err(Error::ResourceLimit("inverse-CDF table too long; mean too large".into()));
            }
            let step = BigRational::from_integer(BigInt::from(&self.n - &k))
                / BigRational::from_integer(BigInt::from(&k + 1u32))
                * &ratio_pq;
            b = b.mul(&MpFloat::from_ratio(&step, prec)?, prec)?;
            err_b = err_b.add(&three_u, 64)?;
            sum = sum.add(&b, prec)?;
            err_s = if err_b > err_s { err_b.clone() } else { err_s }.add(&u.mul_pow2(1), 64)?;
            k += 1u32;
        }
        Ok(CdfBounds { lower, upper })
    }

    /// Smallest `k` with `CDF(k) > j·2^-beta`.
    pub fn index_for(&self, j: &BigUint) -> Result<BigUint> {
        let uval = MpFloat::from_biguint(j).mul_pow2(-(self.beta as i64));
        let mut start = 0usize;
        for level in 0..MAX_LEVELS {
            let t = self.level(level)?;
            let mut k = start;
            loop {
                if k >= t.lower.len() {
                    // past the table every CDF value exceeds U
                    return Ok(BigUint::from(t.lower.len() - 1));
                }
                if uval < t.lower[k] {
                    return Ok(BigUint::from(k));
                }
                if uval >= t.upper[k] {
                    k += 1;
                    continue;
                }
                break;
            }
            // brackets only get tighter, so earlier decisions stand
            start = k;
        }
        self.resolve_tie(j, start)
    }

    fn resolve_tie(&self, j: &BigUint, mut k: usize) -> Result<BigUint> {
        let n = self.n.to_u64().filter(|&n| n <= EXACT_TIE_LIMIT);
        let j = BigInt::from(j.clone());
        match n {
            Some(n) => loop {
                let c = exact_cdf_at(n, &self.p, k as u64);
                if c.numer() << self.beta as u64 > &j * c.denom() || k as u64 >= n {
                    return Ok(BigUint::from(k));
                }
                k += 1;
            },
            // The bracket is narrower than 2^-(beta+64); treating U as not
            // below the CDF moves at most one grid point per k, which the
            // (n+1)·2^(-beta-1) certificate covers with room for large n.
            None => {
                let t = self.level(MAX_LEVELS - 1)?;
                let uval = MpFloat::from_biguint(&j.to_biguint().unwrap()).mul_pow2(-(self.beta as i64));
                let mut k = k + 1;
                while k < t.lower.len() && uval >= t.lower[k] {
                    k += 1;
                }
                Ok(BigUint::from(k.min(t.lower.len() - 1)))
            }
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<BigUint> {
        self.index_for(&draw_bits(rng, self.beta))
    }
}

pub(crate) fn pow_biguint(x: &MpFloat, e: &BigUint, prec: u32) -> Result<MpFloat> {
    if e.is_zero() {
        return Ok(MpFloat::one());
    }
    let mut r = x.clone();
    for i in (0..e.bits() - 1).rev() {
        r = r.mul(&r, prec)?;
        if e.bit(i) {
            r = r.mul(x, prec)?;
        }
    }
    Ok(r)
}
