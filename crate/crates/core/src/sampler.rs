//! Binomial sampling by transformed rejection in multiprecision
//! arithmetic, with a certified bound on the statistical distance of every
//! draw from the exact law.
//!
//! Small-variance requests (`np(1−p) < 10`) use exact inverse-CDF sampling
//! instead, whose only error is the dyadic grid of the uniform.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;

use crate::bound::{
    f64_decimal, fallback_report, search_beta, select_precision_from, theorem_bound, BoundReport,
};
use crate::error::{Error, Result};
use crate::exact::InverseCdfSampler;
use crate::hatdist::{hat_density_inv, hat_params, inv_cdf, HatParams, NPQ_THRESHOLD};
use crate::mpctx::{make_context, MpFloat, PrecisionContext};
use crate::par::map_chunks;
use crate::rng::{draw_bits, StreamRng};
use crate::specfun::{log_agm, log_factorial, LanczosParams};

/// Lowest precision the automatic policy will pick.
pub const AUTO_MIN_BETA: u32 = 64;

/// Draws per independent stream when sampling in bulk.
pub const CHUNK: u64 = 4096;

/// Log-factorials are memoized for `n` up to this.
const CACHE_LIMIT: u64 = 1 << 16;

#[derive(Clone, Debug)]
pub enum PrecisionPolicy {
    /// Use this context; refuse if its bound exceeds `delta_in`.
    Fixed(PrecisionContext),
    /// Smallest `β ≥ 64` whose bound meets `delta_in`.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplePath {
    Rejection,
    ExactFallback,
}

impl fmt::Display for SamplePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplePath::Rejection => "rejection",
            SamplePath::ExactFallback => "exact_fallback",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleResult {
    pub k: BigUint,
    pub delta_out: f64,
    pub iterations: u64,
    pub path: SamplePath,
}

/// `v ∈ (0, 1)` on the `2^-β` grid; zero is redrawn.
pub fn draw_uniform_unit<R: RngCore + ?Sized>(rng: &mut R, beta: u32) -> MpFloat {
    loop {
        let j = draw_bits(rng, beta);
        if !j.is_zero() {
            return MpFloat::from_biguint(&j).mul_pow2(-(beta as i64));
        }
    }
}

/// `u ∈ (−½, ½)` on the `2^-β` grid: `j·2^-β − ½` with `j = 0` redrawn,
/// so `j ↦ 2^β − j` negates `u` exactly.
pub fn draw_uniform_signed<R: RngCore + ?Sized>(rng: &mut R, beta: u32) -> MpFloat {
    loop {
        let j = draw_bits(rng, beta);
        if !j.is_zero() {
            return signed_from_bits(&j, beta);
        }
    }
}

fn signed_from_bits(j: &BigUint, beta: u32) -> MpFloat {
    let half = BigInt::one() << (beta as usize - 1);
    MpFloat::from_bigint(&(BigInt::from(j.clone()) - half)).mul_pow2(-(beta as i64))
}

#[derive(Debug)]
struct Rejection {
    hp: HatParams,
    lp: LanczosParams,
    log_fact_n: MpFloat,
    log_p: MpFloat,
    log_q: MpFloat,
    log_alpha: MpFloat,
    cache: Vec<OnceLock<MpFloat>>,
}

#[derive(Debug)]
enum Engine {
    Rejection(Box<Rejection>),
    Fallback(InverseCdfSampler),
}

/// A configured sampler for one `(n, p)`: parameters, precision and the
/// certified bound are fixed at construction, before any randomness.
#[derive(Debug)]
pub struct BinomialSampler {
    n: BigUint,
    mirrored: bool,
    ctx: PrecisionContext,
    report: BoundReport,
    engine: Engine,
}

fn validate(n: &BigUint, p: &BigRational, delta_in: f64) -> Result<()> {
    if n.is_zero() {
        return Err(Error::InvalidParam("n must be at least 1".into()));
    }
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(Error::InvalidParam(format!("p = {p} is not in (0, 1)")));
    }
    if !(delta_in > 0.0 && delta_in <= 1.0) {
        return Err(Error::InvalidParam(format!("delta_in = {delta_in} is not in (0, 1]")));
    }
    Ok(())
}

impl BinomialSampler {
    pub fn new(
        n: BigUint,
        p: &BigRational,
        delta_in: f64,
        policy: &PrecisionPolicy,
        lp: &LanczosParams,
    ) -> Result<Self> {
        validate(&n, p, delta_in)?;
        let half = BigRational::new(1.into(), 2.into());
        let mirrored = p > &half;
        let pc = if mirrored { BigRational::one() - p } else { p.clone() };
        let npq = BigRational::from_integer(BigInt::from(n.clone())) * &pc * (BigRational::one() - &pc);
        if npq < BigRational::from_integer(NPQ_THRESHOLD.into()) {
            return Self::fallback(n, pc, mirrored, delta_in, policy);
        }
        let floor = 15.0 * lp.zeta;
        if delta_in <= floor * (1.0 + 1e-6) {
            return Err(Error::ZetaFloor { delta_in, floor });
        }
        let ctx = match policy {
            PrecisionPolicy::Fixed(ctx) => ctx.clone(),
            PrecisionPolicy::Auto => {
                let probe = hat_params(&n, &pc, &make_context(AUTO_MIN_BETA)?)?;
                select_precision_from(&n, &pc, delta_in, &probe, lp, AUTO_MIN_BETA)?
            }
        };
        let hp = hat_params(&n, &pc, &ctx)?;
        let report = theorem_bound(&n, &pc, &ctx, &hp, lp)?;
        if report.value > delta_in {
            return Err(Error::BudgetExceeded { bound: report.value, delta_in });
        }
        let pf = ctx.round_to(&pc)?;
        let log_p = log_agm(&pf, &ctx)?;
        let log_q = log_agm(&ctx.sub(&MpFloat::one(), &pf)?, &ctx)?;
        let log_alpha = log_agm(&ctx.round_to(&f64_decimal(hp.alpha)?)?, &ctx)?;
        let log_fact_n = log_factorial(&n, lp, &ctx)?;
        let cache_len = match n.to_u64() {
            Some(v) if v <= CACHE_LIMIT => v as usize + 1,
            _ => 0,
        };
        let engine = Engine::Rejection(Box::new(Rejection {
            hp,
            lp: lp.clone(),
            log_fact_n,
            log_p,
            log_q,
            log_alpha,
            cache: (0..cache_len).map(|_| OnceLock::new()).collect(),
        }));
        Ok(BinomialSampler { n, mirrored, ctx, report, engine })
    }

    fn fallback(n: BigUint, pc: BigRational, mirrored: bool, delta_in: f64, policy: &PrecisionPolicy) -> Result<Self> {
        let beta = match policy {
            PrecisionPolicy::Fixed(ctx) => ctx.beta(),
            PrecisionPolicy::Auto => search_beta(AUTO_MIN_BETA, delta_in, |b| Ok(fallback_report(&n, &pc, b).value))?,
        };
        let report = fallback_report(&n, &pc, beta);
        if report.value > delta_in {
            return Err(Error::BudgetExceeded { bound: report.value, delta_in });
        }
        let ctx = make_context(beta)?;
        let engine = Engine::Fallback(InverseCdfSampler::new(n.clone(), pc, beta)?);
        Ok(BinomialSampler { n, mirrored, ctx, report, engine })
    }

    pub fn report(&self) -> &BoundReport {
        &self.report
    }

    pub fn delta_out(&self) -> f64 {
        self.report.value
    }

    pub fn beta(&self) -> u32 {
        self.ctx.beta()
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn path(&self) -> SamplePath {
        match self.engine {
            Engine::Rejection(_) => SamplePath::Rejection,
            Engine::Fallback(_) => SamplePath::ExactFallback,
        }
    }

    /// One draw.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<SampleResult> {
        let (k, iterations) = match &self.engine {
            Engine::Rejection(r) => self.reject(r, rng)?,
            Engine::Fallback(f) => (f.sample(rng)?, 1),
        };
        let k = if self.mirrored { &self.n - k } else { k };
        assert!(k <= self.n, "sample outside [0, n]");
        Ok(SampleResult { k, delta_out: self.report.value, iterations, path: self.path() })
    }

    fn log_fact(&self, r: &Rejection, k: &BigUint) -> Result<MpFloat> {
        if let Some(slot) = k.to_usize().and_then(|i| r.cache.get(i)) {
            if let Some(v) = slot.get() {
                return Ok(v.clone());
            }
            let v = log_factorial(k, &r.lp, &self.ctx)?;
            return Ok(slot.get_or_init(|| v).clone());
        }
        log_factorial(k, &r.lp, &self.ctx)
    }

    fn reject<R: RngCore + ?Sized>(&self, r: &Rejection, rng: &mut R) -> Result<(BigUint, u64)> {
        let ctx = &self.ctx;
        let beta = ctx.beta();
        let mut iterations = 0u64;
        loop {
            iterations += 1;
            let v = draw_uniform_unit(rng, beta);
            let u = draw_uniform_signed(rng, beta);
            let x = inv_cdf(&u, &r.hp, ctx)?;
            let k = x.floor();
            if k.is_negative() || k > BigInt::from(self.n.clone()) {
                continue;
            }
            let k = k.to_biguint().expect("nonnegative");
            let nk = &self.n - &k;
            let kf = ctx.round(&MpFloat::from_biguint(&k))?;
            let nkf = ctx.round(&MpFloat::from_biguint(&nk))?;
            let mut lv = ctx.sub(&r.log_fact_n, &self.log_fact(r, &k)?)?;
            lv = ctx.sub(&lv, &self.log_fact(r, &nk)?)?;
            lv = ctx.add(&lv, &ctx.mul(&kf, &r.log_p)?)?;
            lv = ctx.add(&lv, &ctx.mul(&nkf, &r.log_q)?)?;
            lv = ctx.add(&lv, &log_agm(&hat_density_inv(&u, &r.hp, ctx)?, ctx)?)?;
            lv = ctx.sub(&lv, &r.log_alpha)?;
            if log_agm(&v, ctx)? <= lv {
                return Ok((k, iterations));
            }
        }
    }

    /// `count` draws; draw `i` comes from stream `i / CHUNK` of `root`, so
    /// the output does not depend on how chunks are scheduled.
    pub fn sample_many(&self, count: u64, root: &StreamRng) -> Result<Vec<SampleResult>> {
        self.sample_range(0..count, root)
    }

    /// Draws `range` of the sequence [`sample_many`] would produce.
    /// `range.start` must be a multiple of [`CHUNK`].
    ///
    /// [`sample_many`]: BinomialSampler::sample_many
    pub fn sample_range(&self, range: std::ops::Range<u64>, root: &StreamRng) -> Result<Vec<SampleResult>> {
        assert_eq!(range.start % CHUNK, 0, "range must start on a chunk boundary");
        let start = range.start;
        let chunks = map_chunks(range.end.saturating_sub(start), CHUNK, |r| -> Result<Vec<SampleResult>> {
            let mut rng = root.split((start + r.start) / CHUNK);
            r.map(|_| self.sample(&mut rng)).collect()
        });
        let mut out = Vec::with_capacity(range.end.saturating_sub(start) as usize);
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }

    /// Counts of each `k ∈ [0, n]` over `count` draws (as [`sample_many`])
    /// and the total number of loop iterations.
    ///
    /// [`sample_many`]: BinomialSampler::sample_many
    pub fn histogram(&self, count: u64, root: &StreamRng) -> Result<(Vec<u64>, u64)> {
        let n = self
            .n
            .to_usize()
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| Error::ResourceLimit(format!("histogram over n = {} values", self.n)))?;
        let chunks = map_chunks(count, CHUNK, |range| -> Result<(Vec<u64>, u64)> {
            let mut rng = root.split(range.start / CHUNK);
            let mut hist = vec![0u64; n + 1];
            let mut iters = 0;
            for _ in range {
                let s = self.sample(&mut rng)?;
                hist[s.k.to_usize().expect("k <= n")] += 1;
                iters += s.iterations;
            }
            Ok((hist, iters))
        });
        let mut hist = vec![0u64; n + 1];
        let mut iters = 0;
        for c in chunks {
            let (h, i) = c?;
            hist.iter_mut().zip(h).for_each(|(a, b)| *a += b);
            iters += i;
        }
        Ok((hist, iters))
    }
}

/// One draw from `Binomial(n, p)` with the default Lanczos set.
pub fn binsamp<R: RngCore + ?Sized>(
    n: &BigUint,
    p: &BigRational,
    delta_in: f64,
    policy: &PrecisionPolicy,
    rng: &mut R,
) -> Result<SampleResult> {
    BinomialSampler::new(n.clone(), p, delta_in, policy, &LanczosParams::default_set())?.sample(rng)
}
