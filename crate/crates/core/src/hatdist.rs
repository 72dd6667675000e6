//! Hörmann's hat for transformed rejection sampling of the Binomial law.
//!
//! `H^-1(u) = (2λ/(½−|u|) + μ)·u + ν` maps a uniform `u ∈ (−½, ½)` to a
//! candidate, and `h^-1(u) = λ/(½−|u|)² + μ` is its derivative.

use std::cell::Cell;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::exact::{exact_pmf, parse_decimal, pow_biguint, ratio_to_f64};
use crate::mpctx::{MpFloat, PrecisionContext};

/// Basic operations on the evaluation path: parameters (with the shared
/// `√(np(1−p))`) plus one `H^-1` evaluation.
pub const HAT_OP_COUNT: u32 = 17;

/// Hat parameters are valid only when `np(1−p)` reaches this.
pub const NPQ_THRESHOLD: u64 = 10;

/// Used for `n` beyond [`ALPHA_SCAN_LIMIT`].
pub const DEFAULT_ALPHA: f64 = 1.5;
pub const ALPHA_SCAN_LIMIT: u64 = 10_000;
const ALPHA_EXACT_LIMIT: u64 = 1_000;
const ALPHA_MARGIN: f64 = 1.05;
const DOMINATION_LIMIT: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct HatParams {
    pub lambda: MpFloat,
    pub mu: MpFloat,
    pub nu: MpFloat,
    pub c: u32,
    pub alpha: f64,
}

/// Arithmetic at the context precision that counts what it does.
struct Counted<'a> {
    ctx: &'a PrecisionContext,
    ops: Cell<u32>,
}

impl<'a> Counted<'a> {
    fn new(ctx: &'a PrecisionContext) -> Self {
        Counted { ctx, ops: Cell::new(0) }
    }

    fn tick<T>(&self, r: Result<T>) -> Result<T> {
        self.ops.set(self.ops.get() + 1);
        r
    }

    fn add(&self, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        self.tick(self.ctx.add(a, b))
    }

    fn sub(&self, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        self.tick(self.ctx.sub(a, b))
    }

    fn mul(&self, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        self.tick(self.ctx.mul(a, b))
    }

    fn div(&self, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        self.tick(self.ctx.div(a, b))
    }

    fn sqrt(&self, a: &MpFloat) -> Result<MpFloat> {
        self.tick(self.ctx.sqrt(a))
    }
}

fn constant(s: &str, ctx: &PrecisionContext) -> MpFloat {
    ctx.round_to(&parse_decimal(s).expect("literal")).expect("literal in range")
}

fn npq_exact(n: &BigUint, p: &BigRational) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone())) * p * (BigRational::one() - p)
}

fn check_region(n: &BigUint, p: &BigRational) -> Result<()> {
    let half = BigRational::new(1.into(), 2.into());
    if p <= &BigRational::from_integer(0.into()) || p > &half {
        return Err(Error::InvalidParam(format!("hat parameters need p in (0, 1/2], got {p}")));
    }
    let npq = npq_exact(n, p);
    if npq < BigRational::from_integer(NPQ_THRESHOLD.into()) {
        return Err(Error::RegionTooSmall { npq: ratio_to_f64(&npq), threshold: NPQ_THRESHOLD as f64 });
    }
    Ok(())
}

fn params_counted(n: &BigUint, p: &BigRational, ops: &Counted) -> Result<(MpFloat, MpFloat, MpFloat)> {
    let ctx = ops.ctx;
    let nf = ctx.round(&MpFloat::from_biguint(n))?;
    let pf = ctx.round_to(p)?;
    let np = ops.mul(&nf, &pf)?;
    let q = ops.sub(&MpFloat::one(), &pf)?;
    let npq = ops.mul(&np, &q)?;
    let s = ops.sqrt(&npq)?;
    let lambda = ops.add(
        &ops.add(&constant("-0.05878", ctx), &ops.mul(&constant("0.062744", ctx), &s)?)?,
        &ops.mul(&constant("0.01", ctx), &pf)?,
    )?;
    let mu = ops.add(&constant("1.15", ctx), &ops.mul(&constant("2.53", ctx), &s)?)?;
    let nu = ops.add(&np, &MpFloat::pow2(-1))?;
    Ok((lambda, mu, nu))
}

fn half_minus_abs(u: &MpFloat, ops: &Counted) -> Result<MpFloat> {
    let d = ops.sub(&MpFloat::pow2(-1), &u.abs())?;
    if !d.is_positive() {
        return Err(Error::DomainError(format!("hat evaluated at the pole, |u| = {} >= 1/2", u.abs())));
    }
    Ok(d)
}

fn inv_cdf_counted(u: &MpFloat, hp: &HatParams, ops: &Counted) -> Result<MpFloat> {
    let d = half_minus_abs(u, ops)?;
    let two_lambda = ops.mul(&MpFloat::from_u64(2), &hp.lambda)?;
    let slope = ops.add(&ops.div(&two_lambda, &d)?, &hp.mu)?;
    ops.add(&ops.mul(&slope, u)?, &hp.nu)
}

/// λ, μ, ν at the context precision, with `α` from [`estimate_alpha`].
///
/// Requires `p ≤ ½` and `np(1−p) ≥ 10`.
pub fn hat_params(n: &BigUint, p: &BigRational, ctx: &PrecisionContext) -> Result<HatParams> {
    check_region(n, p)?;
    let (lambda, mu, nu) = params_counted(n, p, &Counted::new(ctx))?;
    if !lambda.is_positive() {
        return Err(Error::DomainError("hat parameter lambda is not positive".into()));
    }
    let alpha = estimate_alpha(n, p)?;
    Ok(HatParams { lambda, mu, nu, c: HAT_OP_COUNT, alpha })
}

/// `H^-1(u)` for `|u| < ½`.
pub fn inv_cdf(u: &MpFloat, hp: &HatParams, ctx: &PrecisionContext) -> Result<MpFloat> {
    inv_cdf_counted(u, hp, &Counted::new(ctx))
}

/// `h^-1(u) = λ/(½−|u|)² + μ` for `|u| < ½`.
pub fn hat_density_inv(u: &MpFloat, hp: &HatParams, ctx: &PrecisionContext) -> Result<MpFloat> {
    let d = ctx.sub(&MpFloat::pow2(-1), &u.abs())?;
    if !d.is_positive() {
        return Err(Error::DomainError(format!("hat evaluated at the pole, |u| = {} >= 1/2", u.abs())));
    }
    ctx.add(&ctx.div(&hp.lambda, &ctx.mul(&d, &d)?)?, &hp.mu)
}

/// Plain `f64` hat used only to locate where `H^-1` crosses each integer.
struct HatF64 {
    lambda: f64,
    mu: f64,
    nu: f64,
}

impl HatF64 {
    fn new(n: f64, p: f64) -> Self {
        let s = (n * p * (1.0 - p)).sqrt();
        HatF64 { lambda: -0.05878 + 0.062744 * s + 0.01 * p, mu: 1.15 + 2.53 * s, nu: n * p + 0.5 }
    }

    fn inv_cdf(&self, u: f64) -> f64 {
        (2.0 * self.lambda / (0.5 - u.abs()) + self.mu) * u + self.nu
    }

    fn density_inv(&self, u: f64) -> f64 {
        let d = 0.5 - u.abs();
        self.lambda / (d * d) + self.mu
    }

    /// `H(x)`: the `u` with `H^-1(u) = x`, by bisection.
    fn cdf(&self, x: f64) -> f64 {
        let (mut lo, mut hi) = (-0.5f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.inv_cdf(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `b(n, p)(k)` as `f64` for `k = 0..=n` (tails may underflow to 0).
fn pmf_f64(n: u64, p: &BigRational) -> Result<Vec<f64>> {
    if n <= ALPHA_EXACT_LIMIT {
        return Ok(exact_pmf(n, p)?.to_f64());
    }
    // 256-bit recurrence; relative error far below the 5% margin
    let prec = 256;
    let q = BigRational::one() - p;
    let ratio = MpFloat::from_ratio(&(p / &q), prec)?;
    let mut b = pow_biguint(&MpFloat::from_ratio(&q, prec)?, &BigUint::from(n), prec)?;
    let mut out = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        out.push(b.to_f64());
        if k < n {
            let step = MpFloat::from_u64(n - k).div(&MpFloat::from_u64(k + 1), prec)?;
            b = b.mul(&step, prec)?.mul(&ratio, prec)?;
        }
    }
    Ok(out)
}

fn alpha_cache() -> &'static Mutex<HashMap<(BigUint, BigRational), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(BigUint, BigRational), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Rejection constant `α` with `b(k)·h^-1(u) ≤ α` for every `u` that maps
/// to `k ∈ [0, n]`.
///
/// For `n ≤ 10^4` this scans every `k`: on the `u`-interval `[H(k), H(k+1))`
/// the density reciprocal peaks at an endpoint, so the largest product is
/// found exactly up to the bisection, and a 5% margin is added. Larger `n`
/// get [`DEFAULT_ALPHA`]. The result depends only on `(n, p)` and is cached.
pub fn estimate_alpha(n: &BigUint, p: &BigRational) -> Result<f64> {
    check_region(n, p)?;
    let n_small = match n.to_u64() {
        Some(v) if v <= ALPHA_SCAN_LIMIT => v,
        _ => return Ok(DEFAULT_ALPHA),
    };
    let key = (n.clone(), p.clone());
    if let Some(&a) = alpha_cache().lock().unwrap().get(&key) {
        return Ok(a);
    }
    let pmf = pmf_f64(n_small, p)?;
    let hat = HatF64::new(n_small as f64, ratio_to_f64(p));
    let mut edge = hat.density_inv(hat.cdf(0.0));
    let mut worst = 0.0f64;
    for (k, &b) in pmf.iter().enumerate() {
        let next = hat.density_inv(hat.cdf(k as f64 + 1.0));
        worst = worst.max(b * edge.max(next));
        edge = next;
    }
    if worst > DOMINATION_LIMIT {
        return Err(Error::DominationFailure { ratio: worst, limit: DOMINATION_LIMIT });
    }
    let alpha = (ALPHA_MARGIN * worst).max(1.0);
    alpha_cache().lock().unwrap().insert(key, alpha);
    Ok(alpha)
}
