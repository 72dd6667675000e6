//! The certified statistical-distance bound of the rejection sampler, the
//! precision search built on it, and additive error budgets for callers
//! that make many sampler calls.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ratio_to_f64;
use crate::hatdist::HatParams;
use crate::mpctx::{make_context, MpFloat, PrecisionContext, MIN_BETA};
use crate::specfun::LanczosParams;

pub const SAFETY_FACTOR: u32 = 2;

/// Relative margin above `15ζ` below which no precision is attempted.
const ZETA_MARGIN: f64 = 1e-6;
const MAX_SEARCH_BETA: u32 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(serialize_with = "big_number")]
    pub n: BigUint,
    pub p: f64,
    pub beta: u32,
    pub c: u32,
    pub alpha: f64,
    pub zeta: f64,
    pub term_arith: f64,
    pub term_lanczos: f64,
    pub safety_factor: f64,
    pub value: f64,
    /// `value` before rounding up to `f64`.
    #[serde(skip)]
    pub value_exact: BigRational,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn big_number<S: serde::Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    let num: serde_json::Number = n.to_string().parse().map_err(serde::ser::Error::custom)?;
    num.serialize(s)
}

/// Smallest `f64` not below `r`.
pub fn ratio_to_f64_up(r: &BigRational) -> f64 {
    let x = ratio_to_f64(r);
    match MpFloat::from_f64(x) {
        Ok(m) if &m.to_ratio() < r => x.next_up(),
        _ => x,
    }
}

/// The shortest decimal that reads back as `x`, as an exact rational.
/// User-facing quantities (`α`, `ζ`, budgets, `delta_in`) are decimals
/// that happen to travel as `f64`.
pub fn f64_decimal(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::InvalidParam(format!("{x} is not finite")));
    }
    crate::exact::parse_decimal(&format!("{x:e}"))
}

fn pow2_ratio(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << e as usize)
}

/// `⌈log2 n⌉`.
fn ceil_log2(n: &BigUint) -> u32 {
    if n <= &BigUint::one() {
        0
    } else {
        (n - 1u32).bits() as u32
    }
}

/// `⌈−log2 p⌉` for `0 < p < 1`.
fn ceil_neg_log2(p: &BigRational) -> u32 {
    let mut m = 0u32;
    while p * pow2_ratio(m) < BigRational::one() {
        m += 1;
    }
    m
}

/// `max(2⌈log2 n⌉, ⌈−log2 p⌉)`.
pub fn beta_floor(n: &BigUint, p: &BigRational) -> u32 {
    (2 * ceil_log2(n)).max(ceil_neg_log2(p))
}

fn check_inputs(n: &BigUint, p: &BigRational) -> Result<()> {
    if n.is_zero() {
        return Err(Error::InvalidParam("n must be positive".into()));
    }
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(Error::InvalidParam(format!("p = {p} is not in (0, 1)")));
    }
    Ok(())
}

fn bound_at(n: &BigUint, p: &BigRational, beta: u32, c: u32, alpha: &BigRational, zeta: &BigRational) -> BoundReport {
    let c_r = BigRational::from_integer(c.into());
    let lead = BigRational::from_integer((1110 * beta as u64).into())
        + BigRational::from_integer(3.into()) * &c_r * p
        + &c_r
        + alpha * &c_r;
    let term_arith = lead * BigRational::from_integer(BigInt::from(n.clone())) / pow2_ratio(beta);
    let term_lanczos = BigRational::from_integer(15.into()) * zeta;
    let value = BigRational::from_integer(SAFETY_FACTOR.into()) * &term_arith + &term_lanczos;
    BoundReport {
        n: n.clone(),
        p: ratio_to_f64(p),
        beta,
        c,
        alpha: ratio_to_f64(alpha),
        zeta: ratio_to_f64(zeta),
        term_arith: ratio_to_f64_up(&term_arith),
        term_lanczos: ratio_to_f64_up(&term_lanczos),
        safety_factor: SAFETY_FACTOR as f64,
        value: ratio_to_f64_up(&value),
        value_exact: value,
    }
}

/// `2·(1110β + 3cp + c + αc)·n·2^-β + 15ζ`, evaluated exactly and rounded
/// up.
///
/// Requires `β ≥ max(2⌈log2 n⌉, ⌈−log2 p⌉)`.
pub fn theorem_bound(
    n: &BigUint,
    p: &BigRational,
    ctx: &PrecisionContext,
    hp: &HatParams,
    lp: &LanczosParams,
) -> Result<BoundReport> {
    theorem_bound_with(n, p, ctx.beta(), hp.c, hp.alpha, lp.zeta)
}

/// [`theorem_bound`] with `c`, `α` and `ζ` given directly.
pub fn theorem_bound_with(n: &BigUint, p: &BigRational, beta: u32, c: u32, alpha: f64, zeta: f64) -> Result<BoundReport> {
    check_inputs(n, p)?;
    if alpha.is_nan() || alpha < 1.0 || zeta.is_nan() || zeta < 0.0 {
        return Err(Error::InvalidParam(format!("need alpha >= 1 and zeta >= 0, got {alpha} and {zeta}")));
    }
    let floor = beta_floor(n, p);
    if beta < floor {
        return Err(Error::PrecisionTooLow(format!("beta = {beta} is below max(2ceil(log2 n), ceil(-log2 p)) = {floor}")));
    }
    Ok(bound_at(n, p, beta, c, &f64_decimal(alpha)?, &f64_decimal(zeta)?))
}

/// Report for the exact inverse-CDF path: only the dyadic grid error
/// `(n+1)·2^(-β-1)` remains.
pub fn fallback_report(n: &BigUint, p: &BigRational, beta: u32) -> BoundReport {
    let value = BigRational::from_integer(BigInt::from(n + 1u32)) / pow2_ratio(beta + 1);
    let v = ratio_to_f64_up(&value);
    BoundReport {
        n: n.clone(),
        p: ratio_to_f64(p),
        beta,
        c: 0,
        alpha: 1.0,
        zeta: 0.0,
        term_arith: v,
        term_lanczos: 0.0,
        safety_factor: 1.0,
        value: v,
        value_exact: value,
    }
}

/// Minimal `β ≥ max(floor, min_beta)` whose `value(β) ≤ delta_in`, for a
/// `value` that decreases in `β`.
pub(crate) fn search_beta<F>(start: u32, delta_in: f64, value: F) -> Result<u32>
where
    F: Fn(u32) -> Result<f64>,
{
    let mut hi = start;
    if value(hi)? > delta_in {
        loop {
            let next = hi.saturating_mul(2);
            if next > MAX_SEARCH_BETA {
                return Err(Error::ResourceLimit(format!("no precision up to {MAX_SEARCH_BETA} bits meets {delta_in:e}")));
            }
            let lo = hi;
            hi = next;
            if value(hi)? <= delta_in {
                // answer in (lo, hi]
                let (mut lo, mut h) = (lo, hi);
                while h - lo > 1 {
                    let mid = lo + (h - lo) / 2;
                    if value(mid)? <= delta_in {
                        h = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(h);
            }
        }
    }
    Ok(hi)
}

fn check_delta(delta_in: f64) -> Result<()> {
    if !(delta_in > 0.0 && delta_in <= 1.0) {
        return Err(Error::InvalidParam(format!("delta_in = {delta_in} is not in (0, 1]")));
    }
    Ok(())
}

/// Like [`select_precision`], but never below `min_beta`.
pub fn select_precision_from(
    n: &BigUint,
    p: &BigRational,
    delta_in: f64,
    hp: &HatParams,
    lp: &LanczosParams,
    min_beta: u32,
) -> Result<PrecisionContext> {
    check_inputs(n, p)?;
    check_delta(delta_in)?;
    let floor = 15.0 * lp.zeta;
    if delta_in <= floor * (1.0 + ZETA_MARGIN) {
        return Err(Error::ZetaFloor { delta_in, floor });
    }
    let alpha = f64_decimal(hp.alpha)?;
    let zeta = f64_decimal(lp.zeta)?;
    let start = beta_floor(n, p).max(min_beta).max(MIN_BETA);
    let beta = search_beta(start, delta_in, |b| Ok(bound_at(n, p, b, hp.c, &alpha, &zeta).value))?;
    make_context(beta)
}

/// Smallest `β ≥ max(2⌈log2 n⌉, ⌈−log2 p⌉, 16)` with bound `≤ delta_in`.
pub fn select_precision(
    n: &BigUint,
    p: &BigRational,
    delta_in: f64,
    hp: &HatParams,
    lp: &LanczosParams,
) -> Result<PrecisionContext> {
    select_precision_from(n, p, delta_in, hp, lp, MIN_BETA)
}

/// Additive error budget across many sampler calls. Charges accumulate
/// exactly; a charge that would overrun the budget is refused and leaves
/// the tracker unchanged.
#[derive(Clone, Debug)]
pub struct BudgetTracker {
    budget: BigRational,
    budget_f64: f64,
    accum: BigRational,
    charges: Vec<(String, f64)>,
}

impl BudgetTracker {
    pub fn new(budget: f64) -> Result<Self> {
        if budget.is_nan() || budget < 0.0 {
            return Err(Error::InvalidParam(format!("budget {budget} must be nonnegative")));
        }
        BudgetTracker::with_exact_budget(f64_decimal(budget)?)
    }

    pub fn with_exact_budget(budget: BigRational) -> Result<Self> {
        if budget < BigRational::zero() {
            return Err(Error::InvalidParam(format!("budget {budget} must be nonnegative")));
        }
        let budget_f64 = ratio_to_f64(&budget);
        Ok(BudgetTracker { budget, budget_f64, accum: BigRational::zero(), charges: Vec::new() })
    }

    /// Charges the decimal value of `bound`.
    pub fn charge(&mut self, label: &str, bound: f64) -> Result<()> {
        if bound.is_nan() || bound < 0.0 {
            return Err(Error::InvalidParam(format!("charge '{label}' = {bound} must be nonnegative")));
        }
        self.charge_exact(label, &f64_decimal(bound)?)
    }

    /// Charges an exact amount, e.g. a report's `value_exact`.
    pub fn charge_exact(&mut self, label: &str, bound: &BigRational) -> Result<()> {
        if bound < &BigRational::zero() {
            return Err(Error::InvalidParam(format!("charge '{label}' = {bound} must be nonnegative")));
        }
        let next = &self.accum + bound;
        if next > self.budget {
            return Err(Error::BudgetOverrun {
                label: label.to_string(),
                accumulated: ratio_to_f64_up(&self.accum),
                bound: ratio_to_f64_up(bound),
                budget: self.budget_f64,
            });
        }
        self.accum = next;
        self.charges.push((label.to_string(), ratio_to_f64_up(bound)));
        Ok(())
    }

    /// Accumulated charges, rounded up.
    pub fn accumulated(&self) -> f64 {
        ratio_to_f64_up(&self.accum)
    }

    pub fn accumulated_exact(&self) -> &BigRational {
        &self.accum
    }

    pub fn budget(&self) -> f64 {
        self.budget_f64
    }

    pub fn charges(&self) -> &[(String, f64)] {
        &self.charges
    }
}
