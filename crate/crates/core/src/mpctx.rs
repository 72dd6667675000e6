//! Binary floating-point numbers with a configurable precision and
//! correctly rounded basic operations (round to nearest, ties to even).
//!
//! A nonzero [`MpFloat`] is stored as `±mant · 2^exp` with an odd
//! mantissa, so every value has exactly one representation and the derived
//! `Eq`/`Hash` agree with numeric equality. The number does not carry its
//! precision: every operation takes the target precision in bits and rounds
//! the exact result to it. [`PrecisionContext`] bundles a precision with
//! its unit round-off `eps = 2^-beta` and the logarithm error bound
//! `tau = 178·beta·2^-beta`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::specfun::LogConstants;

/// Smallest working precision accepted by [`PrecisionContext::new`].
pub const MIN_BETA: u32 = 16;

/// Largest magnitude of the binary exponent of a nonzero value.
pub const EXP_LIMIT: i64 = 1 << 40;

/// Sign-magnitude binary float with an odd (or zero) mantissa.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MpFloat {
    neg: bool,
    mant: BigUint,
    exp: i64,
}

/// One of the correctly rounded basic operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
}

fn bits(x: &BigUint) -> i64 {
    x.bits() as i64
}

fn shl(x: &BigUint, n: i64) -> BigUint {
    debug_assert!(n >= 0);
    x << (n as u64)
}

impl MpFloat {
    pub fn zero() -> Self {
        MpFloat { neg: false, mant: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        MpFloat::from_u64(1)
    }

    /// Exact value `±mant · 2^exp`; the mantissa is normalized.
    pub fn from_parts(neg: bool, mant: BigUint, exp: i64) -> Self {
        if mant.is_zero() {
            return MpFloat::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        MpFloat { neg, mant: mant >> tz, exp: exp + tz as i64 }
    }

    pub fn from_u64(v: u64) -> Self {
        MpFloat::from_parts(false, BigUint::from(v), 0)
    }

    pub fn from_i64(v: i64) -> Self {
        MpFloat::from_parts(v < 0, BigUint::from(v.unsigned_abs()), 0)
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        MpFloat::from_parts(false, v.clone(), 0)
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        MpFloat::from_parts(v.sign() == Sign::Minus, v.magnitude().clone(), 0)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::DomainError(format!("non-finite value {v}")));
        }
        if v == 0.0 {
            return Ok(MpFloat::zero());
        }
        let b = v.to_bits();
        let neg = b >> 63 == 1;
        let biased = ((b >> 52) & 0x7ff) as i64;
        let frac = b & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Ok(MpFloat::from_parts(neg, BigUint::from(mant), exp))
    }

    /// `2^e` exactly.
    pub fn pow2(e: i64) -> Self {
        MpFloat { neg: false, mant: BigUint::one(), exp: e }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg && !self.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        !self.neg && !self.is_zero()
    }

    /// Odd mantissa of the normalized representation.
    pub fn mantissa(&self) -> &BigUint {
        &self.mant
    }

    /// Exponent of the lowest mantissa bit.
    pub fn low_exponent(&self) -> i64 {
        self.exp
    }

    /// Number of significant bits.
    pub fn precision_used(&self) -> u64 {
        self.mant.bits()
    }

    /// The `e` of `x = w·2^e` with `½ ≤ |w| < 1`; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(bits(&self.mant) + self.exp)
        }
    }

    /// Significand scaled to exactly `beta` bits (`w·2^beta`), for nonzero
    /// values holding at most `beta` significant bits.
    pub fn significand(&self, beta: u32) -> Option<BigUint> {
        let used = self.mant.bits();
        if self.is_zero() || used > beta as u64 {
            return None;
        }
        Some(&self.mant << (beta as u64 - used))
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        MpFloat { neg: !self.neg, mant: self.mant.clone(), exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        MpFloat { neg: false, mant: self.mant.clone(), exp: self.exp }
    }

    /// Exact scaling by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        MpFloat { neg: self.neg, mant: self.mant.clone(), exp: self.exp + k }
    }

    pub fn to_ratio(&self) -> BigRational {
        let m = BigInt::from_biguint(if self.neg { Sign::Minus } else { Sign::Plus }, self.mant.clone());
        if self.exp >= 0 {
            BigRational::from_integer(m << (self.exp as u64))
        } else {
            BigRational::new(m, BigInt::one() << ((-self.exp) as u64))
        }
    }

    /// Largest integer not above the value.
    pub fn floor(&self) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        let m = BigInt::from(self.mant.clone());
        if self.exp >= 0 {
            let v = m << (self.exp as u64);
            if self.neg {
                -v
            } else {
                v
            }
        } else {
            let sh = (-self.exp) as u64;
            let q: BigInt = &m >> sh;
            if self.neg {
                // exact division is impossible for an odd mantissa with exp < 0
                -(q + BigInt::one())
            } else {
                q
            }
        }
    }

    /// Nearest `f64` (ties to even); saturates to ±inf / ±0 outside range.
    pub fn to_f64(&self) -> f64 {
        self.to_f64_dir(false)
    }

    /// Smallest `f64` that is `≥` the value (for nonnegative inputs the
    /// result is strictly positive when the value is).
    pub fn to_f64_up(&self) -> f64 {
        self.to_f64_dir(true)
    }

    fn to_f64_dir(&self, up: bool) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.exponent().unwrap();
        let sign = if self.neg { -1.0 } else { 1.0 };
        let round_up = up && !self.neg;
        if e > 1024 {
            return if self.neg && up { -f64::MAX } else { sign * f64::INFINITY };
        }
        // 53 bits down to exponent -1021, fewer in the subnormal range
        let keep = if e >= -1021 { 53 } else { 53 - (-1021 - e) };
        if keep <= 0 {
            let above_half = e == -1074 && self.mant.bits() > 1;
            return if round_up || above_half { sign * f64::from_bits(1) } else { sign * 0.0 };
        }
        let (m, x) = if round_up {
            round_toward_inf(&self.mant, self.exp, keep as u32)
        } else {
            let r = round_parts(false, self.mant.clone(), self.exp, false, keep as u32)
                .expect("rounding within f64 range");
            (r.mant, r.exp)
        };
        sign * ldexp(m.to_f64().unwrap(), x)
    }

    fn check_range(self) -> Result<Self> {
        if let Some(e) = self.exponent() {
            if e > EXP_LIMIT {
                return Err(Error::Overflow);
            }
            if e < -EXP_LIMIT {
                return Err(Error::Underflow);
            }
        }
        Ok(self)
    }

    /// Rounds to `prec` significant bits.
    pub fn round(&self, prec: u32) -> Result<Self> {
        round_parts(self.neg, self.mant.clone(), self.exp, false, prec)
    }

    pub fn add(&self, other: &MpFloat, prec: u32) -> Result<Self> {
        add_signed(self, other, false, prec)
    }

    pub fn sub(&self, other: &MpFloat, prec: u32) -> Result<Self> {
        add_signed(self, other, true, prec)
    }

    pub fn mul(&self, other: &MpFloat, prec: u32) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(MpFloat::zero());
        }
        round_parts(self.neg ^ other.neg, &self.mant * &other.mant, self.exp + other.exp, false, prec)
    }

    pub fn div(&self, other: &MpFloat, prec: u32) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(MpFloat::zero());
        }
        div_parts(self.neg ^ other.neg, &self.mant, &other.mant, self.exp - other.exp, prec)
    }

    pub fn sqrt(&self, prec: u32) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::DomainError("square root of a negative number".into()));
        }
        if self.is_zero() {
            return Ok(MpFloat::zero());
        }
        let mut m = self.mant.clone();
        let mut e = self.exp;
        if e.rem_euclid(2) != 0 {
            m <<= 1u32;
            e -= 1;
        }
        let need = 2 * (prec as i64 + 2) - bits(&m);
        let k = if need > 0 { (need + 1) / 2 } else { 0 };
        let big = shl(&m, 2 * k);
        let r = big.sqrt();
        let sticky = &r * &r != big;
        round_parts(false, r, (e - 2 * k) / 2, sticky, prec)
    }

    /// Correct rounding of an exact rational.
    pub fn from_ratio(x: &BigRational, prec: u32) -> Result<Self> {
        if x.is_zero() {
            return Ok(MpFloat::zero());
        }
        let neg = x.is_negative();
        let num = x.numer().magnitude();
        let den = x.denom().magnitude();
        div_parts(neg, num, den, 0, prec)
    }

    /// Decimal rendering with `digits` significant digits (scientific).
    pub fn to_sci_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let r = self.to_ratio();
        let neg = r.is_negative();
        let r = r.abs();
        // decimal exponent estimate from the binary exponent, corrected below
        let e2 = self.exponent().unwrap();
        let mut e10 = ((e2 - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let ten = BigRational::from_integer(BigInt::from(10));
        let scale = |k: i64| -> BigRational {
            if k >= 0 {
                num_traits::pow(ten.clone(), k as usize)
            } else {
                num_traits::pow(ten.clone(), (-k) as usize).recip()
            }
        };
        let mut m = &r * scale(-e10);
        while m >= ten {
            m /= &ten;
            e10 += 1;
        }
        while m < BigRational::one() {
            m *= &ten;
            e10 -= 1;
        }
        let scaled = m * scale(digits as i64 - 1);
        let mut q = scaled.round().to_integer();
        let lim = num_traits::pow(BigInt::from(10), digits);
        if q >= lim {
            q /= 10;
            e10 += 1;
        }
        let s = q.to_string();
        let (head, tail) = s.split_at(1);
        let tail = tail.trim_end_matches('0');
        format!(
            "{}{}{}{}e{}",
            if neg { "-" } else { "" },
            head,
            if tail.is_empty() { "" } else { "." },
            tail,
            e10
        )
    }
}

impl Ord for MpFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = if self.is_zero() { 0 } else if self.neg { -1 } else { 1 };
        let sb = if other.is_zero() { 0 } else if other.neg { -1 } else { 1 };
        if sa != sb || sa == 0 {
            return sa.cmp(&sb);
        }
        let mag = {
            let ea = self.exponent().unwrap();
            let eb = other.exponent().unwrap();
            if ea != eb {
                ea.cmp(&eb)
            } else {
                let e = self.exp.min(other.exp);
                shl(&self.mant, self.exp - e).cmp(&shl(&other.mant, other.exp - e))
            }
        };
        if sa < 0 {
            mag.reverse()
        } else {
            mag
        }
    }
}

impl PartialOrd for MpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpFloat({})", self.to_sci_string(20))
    }
}

impl fmt::Display for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci_string(f.precision().unwrap_or(17)))
    }
}

/// Rounds `±(mant·2^exp + s)` to `prec` bits, where `s` is a positive
/// quantity strictly below the lowest bit of `mant` when `sticky` is set.
fn round_parts(neg: bool, mut mant: BigUint, mut exp: i64, sticky: bool, prec: u32) -> Result<MpFloat> {
    if mant.is_zero() {
        debug_assert!(!sticky);
        return Ok(MpFloat::zero());
    }
    let prec = prec.max(1) as i64;
    let mut b = bits(&mant);
    if b <= prec && !sticky {
        return MpFloat::from_parts(neg, mant, exp).check_range();
    }
    if b < prec + 2 {
        let s = prec + 2 - b;
        mant = shl(&mant, s);
        exp -= s;
        b += s;
    }
    let drop = (b - prec) as u64;
    let half = mant.bit(drop - 1);
    let rest = sticky || mant.trailing_zeros().is_some_and(|tz| tz < drop - 1);
    let mut kept = mant >> drop;
    if half && (rest || kept.bit(0)) {
        kept += 1u32;
    }
    MpFloat::from_parts(neg, kept, exp + drop as i64).check_range()
}

fn ldexp(mut v: f64, mut e: i64) -> f64 {
    while e > 0 {
        let k = e.min(1000);
        v *= 2f64.powi(k as i32);
        e -= k;
    }
    while e < 0 {
        let k = (-e).min(1000);
        v *= 2f64.powi(-(k as i32));
        e += k;
    }
    v
}

/// Rounds a positive `mant·2^exp` up to `prec` bits, returning raw parts.
fn round_toward_inf(mant: &BigUint, exp: i64, prec: u32) -> (BigUint, i64) {
    let b = bits(mant);
    let prec = prec as i64;
    if b <= prec {
        return (mant.clone(), exp);
    }
    let drop = (b - prec) as u64;
    let exact = mant.trailing_zeros().is_none_or(|tz| tz >= drop);
    let mut kept = mant >> drop;
    if !exact {
        kept += 1u32;
    }
    (kept, exp + drop as i64)
}

fn div_parts(neg: bool, num: &BigUint, den: &BigUint, exp: i64, prec: u32) -> Result<MpFloat> {
    // quotient with at least prec + 2 bits, remainder folded into a sticky bit
    let s = prec as i64 + 3 - (bits(num) - bits(den));
    let (q, r) = if s >= 0 {
        shl(num, s).div_rem(den)
    } else {
        num.div_rem(&shl(den, -s))
    };
    round_parts(neg, q, exp - s, !r.is_zero(), prec)
}

fn add_signed(a: &MpFloat, b: &MpFloat, negate_b: bool, prec: u32) -> Result<MpFloat> {
    let bneg = b.neg ^ negate_b;
    if b.is_zero() {
        return a.round(prec);
    }
    if a.is_zero() {
        return round_parts(bneg, b.mant.clone(), b.exp, false, prec);
    }
    let (mut big, mut small) = ((a.neg, a.mant.clone(), a.exp), (bneg, b.mant.clone(), b.exp));
    if bits(&small.1) + small.2 > bits(&big.1) + big.2 {
        std::mem::swap(&mut big, &mut small);
    }
    // A summand lying entirely below both the lowest bit of the larger one
    // and its rounding position acts only as a sticky bit.
    let top_big = bits(&big.1) + big.2;
    let low = big.2.min(top_big - prec as i64 - 2);
    if bits(&small.1) + small.2 < low {
        small = (small.0, BigUint::one(), low - 2);
    }
    let e = big.2.min(small.2);
    let mb = shl(&big.1, big.2 - e);
    let ms = shl(&small.1, small.2 - e);
    if big.0 == small.0 {
        round_parts(big.0, mb + ms, e, false, prec)
    } else {
        match mb.cmp(&ms) {
            Ordering::Equal => Ok(MpFloat::zero()),
            Ordering::Greater => round_parts(big.0, mb - ms, e, false, prec),
            Ordering::Less => round_parts(small.0, ms - mb, e, false, prec),
        }
    }
}

/// Working precision together with its derived error constants.
#[derive(Clone)]
pub struct PrecisionContext {
    beta: u32,
    eps: MpFloat,
    tau: MpFloat,
    pub(crate) consts: Arc<OnceLock<Arc<LogConstants>>>,
}

impl fmt::Debug for PrecisionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrecisionContext")
            .field("beta", &self.beta)
            .field("eps", &self.eps_f64())
            .field("tau", &self.tau_f64())
            .finish()
    }
}

impl PartialEq for PrecisionContext {
    fn eq(&self, other: &Self) -> bool {
        self.beta == other.beta
    }
}

impl Eq for PrecisionContext {}

impl PrecisionContext {
    pub fn new(beta: u32) -> Result<Self> {
        if beta < MIN_BETA {
            return Err(Error::PrecisionTooLow(format!("beta = {beta} < {MIN_BETA}")));
        }
        let eps = MpFloat::pow2(-(beta as i64));
        let tau = MpFloat::from_parts(false, BigUint::from(178u32) * beta, -(beta as i64));
        Ok(PrecisionContext { beta, eps, tau, consts: Arc::new(OnceLock::new()) })
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// Unit round-off `2^-beta`, exact.
    pub fn eps(&self) -> &MpFloat {
        &self.eps
    }

    /// Additive logarithm error bound `178·beta·2^-beta`, exact.
    pub fn tau(&self) -> &MpFloat {
        &self.tau
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps.to_f64()
    }

    pub fn tau_f64(&self) -> f64 {
        self.tau.to_f64()
    }

    pub fn round_to(&self, x: &BigRational) -> Result<MpFloat> {
        MpFloat::from_ratio(x, self.beta)
    }

    pub fn round(&self, x: &MpFloat) -> Result<MpFloat> {
        x.round(self.beta)
    }

    pub fn arith(&self, op: ArithOp, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        match op {
            ArithOp::Add => a.add(b, self.beta),
            ArithOp::Sub => a.sub(b, self.beta),
            ArithOp::Mul => a.mul(b, self.beta),
            ArithOp::Div => a.div(b, self.beta),
            ArithOp::Sqrt => a.sqrt(self.beta),
        }
    }

    pub fn add(&self, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        a.add(b, self.beta)
    }

    pub fn sub(&self, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        a.sub(b, self.beta)
    }

    pub fn mul(&self, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        a.mul(b, self.beta)
    }

    pub fn div(&self, a: &MpFloat, b: &MpFloat) -> Result<MpFloat> {
        a.div(b, self.beta)
    }

    pub fn sqrt(&self, a: &MpFloat) -> Result<MpFloat> {
        a.sqrt(self.beta)
    }
}

/// Shorthand for [`PrecisionContext::new`].
pub fn make_context(beta: u32) -> Result<PrecisionContext> {
    PrecisionContext::new(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn rel_err(got: &MpFloat, exact: &BigRational) -> BigRational {
        ((got.to_ratio() - exact) / exact).abs()
    }

    /// Nearest `bits`-bit dyadic by scanning every significand in the two
    /// candidate binades.
    fn nearest_by_enumeration(x: &BigRational, nbits: u32) -> BigRational {
        let mut best: Option<BigRational> = None;
        let lo = 1i64 << (nbits - 1);
        let hi = 1i64 << nbits;
        let e0 = (x.to_f64().unwrap().log2().floor() as i64) - nbits as i64;
        for e in [e0, e0 + 1, e0 + 2] {
            for s in lo..hi {
                let v = if e >= 0 {
                    BigRational::from_integer(BigInt::from(s) << e as u64)
                } else {
                    BigRational::new(BigInt::from(s), BigInt::one() << (-e) as u64)
                };
                let better = match &best {
                    None => true,
                    Some(b) => (&v - x).abs() < (b - x).abs(),
                };
                if better {
                    best = Some(v);
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn context_constants() {
        let c = make_context(53).unwrap();
        assert_eq!(c.eps_f64(), 2f64.powi(-53));
        let c = make_context(64).unwrap();
        assert!((c.tau_f64() - 178.0 * 64.0 / 2f64.powi(64)).abs() < 1e-30);
        assert!((c.tau_f64() - 6.175e-16).abs() < 1e-19);
        assert!(matches!(make_context(8), Err(Error::PrecisionTooLow(_))));
        assert!(make_context(16).is_ok());
    }

    #[test]
    fn round_to_examples() {
        for beta in [16, 64, 200] {
            let c = make_context(beta).unwrap();
            assert_eq!(c.round_to(&rat(1, 1)).unwrap(), MpFloat::one());
            assert!(c.round_to(&rat(0, 1)).unwrap().is_zero());
        }
        // 4 bits is below the context floor, so use the raw precision entry
        let third = MpFloat::from_ratio(&rat(1, 3), 4).unwrap();
        assert_eq!(third.to_ratio(), rat(11, 32));
        assert_eq!(nearest_by_enumeration(&rat(1, 3), 4), rat(11, 32));
        assert!(rel_err(&third, &rat(1, 3)) <= rat(1, 16));
    }

    #[test]
    fn ties_go_to_even() {
        // 9/8 = 1.001b needs 4 bits; at 3 bits it ties between 1 and 5/4
        assert_eq!(MpFloat::from_ratio(&rat(9, 8), 3).unwrap().to_ratio(), rat(1, 1));
        assert_eq!(MpFloat::from_ratio(&rat(11, 8), 3).unwrap().to_ratio(), rat(3, 2));
        assert_eq!(MpFloat::from_ratio(&rat(-11, 8), 3).unwrap().to_ratio(), rat(-3, 2));
    }

    #[test]
    fn arith_examples() {
        let c = make_context(16).unwrap();
        let one = MpFloat::one();
        assert_eq!(c.add(&one, &one).unwrap(), MpFloat::from_u64(2));
        let third = c.round_to(&rat(1, 3)).unwrap();
        let prod = c.mul(&third, &MpFloat::from_u64(3)).unwrap();
        assert!(rel_err(&prod, &rat(1, 1)) <= rat(1, 1 << 16));

        let c = make_context(64).unwrap();
        let r = c.sqrt(&MpFloat::from_u64(2)).unwrap();
        let sq = r.to_ratio() * r.to_ratio();
        let two = rat(2, 1);
        let bound = BigRational::new(BigInt::from(2), BigInt::one() << 64u32);
        assert!(((sq - &two) / &two).abs() <= bound);
        assert!(matches!(c.div(&one, &MpFloat::zero()), Err(Error::DivisionByZero)));
        assert!(matches!(c.sqrt(&MpFloat::from_i64(-4)), Err(Error::DomainError(_))));
        assert_eq!(c.arith(ArithOp::Sub, &one, &one).unwrap(), MpFloat::zero());
    }

    #[test]
    fn far_apart_summands_round_correctly() {
        let c = make_context(16).unwrap();
        let big = MpFloat::pow2(100);
        let tiny = MpFloat::pow2(-100);
        assert_eq!(c.add(&big, &tiny).unwrap(), big);
        // 2^100 - tiny lies just below a power of two and still rounds up to it
        assert_eq!(c.sub(&big, &tiny).unwrap(), big);
        // 1 + 2^-16 is a tie at 16 bits: stays at the even neighbour 1
        assert_eq!(c.add(&MpFloat::one(), &MpFloat::pow2(-16)).unwrap(), MpFloat::one());
        // and the slightest extra pushes it up
        let up = c.add(&MpFloat::one(), &MpFloat::from_ratio(&rat(65537, 1 << 16), 40).unwrap().mul_pow2(-16)).unwrap();
        assert_eq!(up.to_ratio(), rat(32769, 32768));
    }

    #[test]
    fn exponent_range() {
        let huge = MpFloat::pow2(EXP_LIMIT - 1);
        assert!(huge.mul(&MpFloat::from_u64(4), 64).is_err());
        let ok = MpFloat::pow2(1400).mul(&MpFloat::pow2(1400), 64).unwrap();
        assert_eq!(ok.exponent(), Some(2801));
        assert_eq!(MpFloat::pow2(-(1 << 30)).exponent(), Some(-(1 << 30) + 1));
    }

    #[test]
    fn conversions() {
        for v in [0.3, -1.5, 1e-300, 5e-324, 1e300, 123456.789] {
            assert_eq!(MpFloat::from_f64(v).unwrap().to_f64(), v);
        }
        let third = make_context(100).unwrap().round_to(&rat(1, 3)).unwrap();
        assert!(third.to_f64_up() >= 1.0 / 3.0);
        assert_eq!(MpFloat::pow2(-2000).to_f64_up(), f64::from_bits(1));
        assert_eq!(MpFloat::from_f64(-2.5).unwrap().floor(), BigInt::from(-3));
        assert_eq!(MpFloat::from_f64(2.5).unwrap().floor(), BigInt::from(2));
        assert_eq!(MpFloat::from_i64(-7).floor(), BigInt::from(-7));
        assert_eq!(MpFloat::from_f64(0.75).unwrap().exponent(), Some(0));
        assert_eq!(MpFloat::from_u64(3).significand(8), Some(BigUint::from(192u32)));
        assert_eq!(MpFloat::from_f64(1.5e-13).unwrap().to_sci_string(3), "1.5e-13");
    }

    fn arb_rat() -> impl Strategy<Value = BigRational> {
        (-1_000_000_000i64..1_000_000_000, 1i64..1_000_000_000).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn round_to_meets_relative_bound(x in arb_rat(), beta in 16u32..160) {
            prop_assume!(!x.is_zero());
            let r = MpFloat::from_ratio(&x, beta).unwrap();
            prop_assert!(rel_err(&r, &x) <= BigRational::new(BigInt::one(), BigInt::one() << beta));
            prop_assert!(r.precision_used() <= beta as u64);
        }

        #[test]
        fn ops_are_correctly_rounded(a in arb_rat(), b in arb_rat(), beta in 16u32..120) {
            let fa = MpFloat::from_ratio(&a, beta + 30).unwrap();
            let fb = MpFloat::from_ratio(&b, beta + 30).unwrap();
            let (ra, rb) = (fa.to_ratio(), fb.to_ratio());
            let mut cases = vec![
                (fa.add(&fb, beta).unwrap(), &ra + &rb),
                (fa.sub(&fb, beta).unwrap(), &ra - &rb),
                (fa.mul(&fb, beta).unwrap(), &ra * &rb),
            ];
            if !rb.is_zero() {
                cases.push((fa.div(&fb, beta).unwrap(), &ra / &rb));
            }
            for (got, exact) in cases {
                // correct rounding: identical to rounding the exact rational
                prop_assert_eq!(&got, &MpFloat::from_ratio(&exact, beta).unwrap());
            }
        }

        #[test]
        fn sqrt_is_correctly_rounded(a in 1u64..u64::MAX, shift in -200i64..200, beta in 16u32..140) {
            let x = MpFloat::from_u64(a).mul_pow2(shift);
            let r = x.sqrt(beta).unwrap();
            // r is the nearest: its half-ulp neighbours bracket sqrt(x)
            let e = r.exponent().unwrap();
            let half_ulp = MpFloat::pow2(e - beta as i64 - 1);
            let lo = r.sub(&half_ulp, beta + 8).unwrap().to_ratio();
            let hi = r.add(&half_ulp, beta + 8).unwrap().to_ratio();
            let xr = x.to_ratio();
            prop_assert!(&lo * &lo <= xr && xr <= &hi * &hi);
        }

        #[test]
        fn chained_sum_within_n_eps(xs in proptest::collection::vec(arb_rat(), 1..200), seed in any::<u64>(), beta in 16u32..80) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut order: Vec<usize> = (0..xs.len()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut acc = MpFloat::zero();
            for &i in &order {
                let xi = MpFloat::from_ratio(&xs[i], beta).unwrap();
                acc = acc.add(&xi, beta).unwrap();
            }
            let exact: BigRational = xs.iter().cloned().sum();
            let abs_sum: BigRational = xs.iter().map(|x| x.abs()).sum();
            let n = BigRational::from_integer(BigInt::from(xs.len()));
            let bound = n * abs_sum / BigRational::from_integer(BigInt::one() << beta);
            prop_assert!((acc.to_ratio() - exact).abs() <= bound);
        }

        #[test]
        fn refinement_never_hurts(x in arb_rat(), beta in 16u32..100, extra in 1u32..40) {
            let coarse = MpFloat::from_ratio(&x, beta).unwrap().to_ratio();
            let fine = MpFloat::from_ratio(&x, beta + extra).unwrap().to_ratio();
            prop_assert!((fine - &x).abs() <= (coarse - &x).abs());
        }

        #[test]
        fn ordering_matches_rationals(a in arb_rat(), b in arb_rat()) {
            let fa = MpFloat::from_ratio(&a, 200).unwrap();
            let fb = MpFloat::from_ratio(&b, 200).unwrap();
            prop_assert_eq!(fa.cmp(&fb), fa.to_ratio().cmp(&fb.to_ratio()));
        }
    }

    #[test]
    fn rounding_is_deterministic() {
        let x = rat(22, 7);
        let a = MpFloat::from_ratio(&x, 77).unwrap();
        let b = MpFloat::from_ratio(&x, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mantissa(), b.mantissa());
    }
}
