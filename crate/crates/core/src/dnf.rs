//! Approximate DNF model counting with an explicit error budget for the
//! Binomial sampler, plus an exact counter for checking it.
//!
//! The estimator keeps a small bucket of solutions, each present with
//! probability `p = 2^-j`, and returns `|X|/p`. Every sampler call charges
//! its certified distance to a budget of `κδ`; overrunning it ends the run
//! with `failed = true`.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::bound::{f64_decimal, BudgetTracker};
use crate::error::{Error, Result};
use crate::par::{map_chunks, map_indices};
use crate::rng::{draw_bits, StreamRng};
use crate::sampler::{BinomialSampler, PrecisionPolicy};
use crate::specfun::LanczosParams;

/// Largest variable count [`brute_force_count`] will enumerate.
pub const MAX_BRUTE_FORCE_VARS: u32 = 26;

/// A conjunction of literals, stored as the bits it fixes and their values
/// (variable `v` is bit `v − 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    literals: Vec<i64>,
    mask: BigUint,
    value: BigUint,
}

impl Clause {
    /// `None` for a contradictory clause. Duplicates are merged.
    pub fn new(lits: &[i64]) -> Option<Clause> {
        let mut literals: Vec<i64> = lits.to_vec();
        literals.sort_by_key(|l| (l.unsigned_abs(), *l));
        literals.dedup();
        let mut mask = BigUint::zero();
        let mut value = BigUint::zero();
        for w in literals.windows(2) {
            if w[0] == -w[1] {
                return None;
            }
        }
        for &l in &literals {
            let bit = l.unsigned_abs() - 1;
            mask.set_bit(bit, true);
            if l > 0 {
                value.set_bit(bit, true);
            }
        }
        Some(Clause { literals, mask, value })
    }

    pub fn literals(&self) -> &[i64] {
        &self.literals
    }

    pub fn width(&self) -> u32 {
        self.literals.len() as u32
    }

    pub fn satisfied_by(&self, sigma: &BigUint) -> bool {
        (sigma & &self.mask) == self.value
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
    /// Contradictory clauses removed while parsing.
    pub dropped: usize,
}

impl DnfFormula {
    pub fn satisfied_by(&self, sigma: &BigUint) -> bool {
        self.clauses.iter().any(|c| c.satisfied_by(sigma))
    }

    /// The `p dnf` text form.
    pub fn to_text(&self) -> String {
        let mut out = format!("p dnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c.literals() {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses `p dnf <vars> <clauses>` followed by one zero-terminated clause
/// per line. Lines starting with `c` are comments.
pub fn parse_dnf(text: &str) -> Result<DnfFormula> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut seen = 0usize;
    let mut dropped = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let Some((num_vars, _)) = header else {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "dnf" {
                return Err(parse_err(line_no, format!("expected 'p dnf <vars> <clauses>', got '{line}'")));
            }
            let vars: u32 = parts[2].parse().map_err(|_| parse_err(line_no, "bad variable count"))?;
            let count: usize = parts[3].parse().map_err(|_| parse_err(line_no, "bad clause count"))?;
            if vars == 0 {
                return Err(parse_err(line_no, "formula needs at least one variable"));
            }
            header = Some((vars, count));
            continue;
        };
        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in line.split_whitespace() {
            if terminated {
                return Err(parse_err(line_no, "literal after terminating 0"));
            }
            let l: i64 = tok.parse().map_err(|_| parse_err(line_no, format!("bad literal '{tok}'")))?;
            if l == 0 {
                terminated = true;
            } else if l.unsigned_abs() > num_vars as u64 {
                return Err(parse_err(line_no, format!("literal {l} exceeds {num_vars} variables")));
            } else {
                lits.push(l);
            }
        }
        if !terminated {
            return Err(parse_err(line_no, "clause not terminated by 0"));
        }
        seen += 1;
        match Clause::new(&lits) {
            Some(c) => clauses.push(c),
            None => dropped += 1,
        }
    }
    let (num_vars, count) = header.ok_or_else(|| parse_err(1, "missing 'p dnf' header"))?;
    if seen != count {
        return Err(parse_err(text.lines().count().max(1), format!("header declares {count} clauses, found {seen}")));
    }
    Ok(DnfFormula { num_vars, clauses, dropped })
}

/// `2^(num_vars − width)`.
pub fn clause_sol_count(clause: &Clause, num_vars: u32) -> BigUint {
    BigUint::one() << (num_vars - clause.width()) as usize
}

fn free_positions(clause: &Clause, num_vars: u32) -> Vec<u64> {
    (0..num_vars as u64).filter(|&b| !clause.mask.bit(b)).collect()
}

fn place(clause: &Clause, free: &[u64], bits: &BigUint) -> BigUint {
    let mut sigma = clause.value.clone();
    for (i, &pos) in free.iter().enumerate() {
        if bits.bit(i as u64) {
            sigma.set_bit(pos, true);
        }
    }
    sigma
}

/// `count` distinct uniformly random solutions of `clause`, in draw order.
pub fn sample_distinct_solutions<R: RngCore + ?Sized>(
    clause: &Clause,
    num_vars: u32,
    count: u64,
    rng: &mut R,
) -> Result<Vec<BigUint>> {
    let available = clause_sol_count(clause, num_vars);
    if BigUint::from(count) > available {
        return Err(Error::CountTooLarge { requested: count, available: available.to_string() });
    }
    let free = free_positions(clause, num_vars);
    let nfree = free.len() as u32;
    if BigUint::from(count) * 2u32 <= available {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(count as usize);
        while (out.len() as u64) < count {
            let bits = draw_bits(rng, nfree);
            if seen.insert(bits.clone()) {
                out.push(place(clause, &free, &bits));
            }
        }
        return Ok(out);
    }
    // more than half the space: only reachable when it is small
    let total = available.to_u64().expect("space below 2*count");
    let mut all: Vec<u64> = (0..total).collect();
    for i in 0..count as usize {
        let j = rng.random_range(i..all.len());
        all.swap(i, j);
    }
    Ok(all[..count as usize].iter().map(|&b| place(clause, &free, &BigUint::from(b))).collect())
}

/// Exact `|sol(φ)|` by enumerating every assignment.
pub fn brute_force_count(formula: &DnfFormula) -> Result<BigUint> {
    if formula.num_vars > MAX_BRUTE_FORCE_VARS {
        return Err(Error::TooManyVariables(formula.num_vars));
    }
    let masks: Vec<(u32, u32)> = formula
        .clauses
        .iter()
        .map(|c| (c.mask.to_u32().unwrap_or(0), c.value.to_u32().unwrap_or(0)))
        .collect();
    let counts = map_chunks(1u64 << formula.num_vars, 1 << 14, |range| {
        range.filter(|&a| masks.iter().any(|&(m, v)| (a as u32) & m == v)).count() as u64
    });
    Ok(BigUint::from(counts.iter().sum::<u64>()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApsOutcome {
    /// `|X|/p` in decimal, absent when the run failed.
    pub estimate: Option<String>,
    pub delta_prime: f64,
    #[serde(rename = "T")]
    pub t: u64,
    pub final_p_log2: i64,
    pub failed: bool,
}

impl ApsOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }

    pub fn estimate_value(&self) -> Option<BigUint> {
        self.estimate.as_ref().map(|s| s.parse().expect("decimal integer"))
    }
}

/// `⌈(log2(4/δ₂) + log2 m)/ε²⌉`.
pub fn threshold(eps_tol: f64, delta2: f64, m: usize) -> u64 {
    (((4.0 / delta2).log2() + (m as f64).log2()) / (eps_tol * eps_tol)).ceil() as u64
}

/// Estimator state for one run.
struct Bucket<'a> {
    formula: &'a DnfFormula,
    items: Vec<BigUint>,
    halvings: u32,
    tracker: BudgetTracker,
    per_call: f64,
    policy: &'a PrecisionPolicy,
    lp: LanczosParams,
}

enum Stop {
    Failed,
    Error(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } | Error::BudgetOverrun { .. } | Error::ZetaFloor { .. } => Stop::Failed,
            other => Stop::Error(other),
        }
    }
}

impl Bucket<'_> {
    /// `Binomial(n, 2^-j)`, charged to the budget.
    fn binomial(&mut self, n: &BigUint, j: u32, label: &str, rng: &mut StreamRng) -> std::result::Result<BigUint, Stop> {
        if n.is_zero() {
            return Ok(BigUint::zero());
        }
        if j == 0 {
            return Ok(n.clone());
        }
        let p = BigRational::new(BigInt::one(), BigInt::one() << j as usize);
        let s = BinomialSampler::new(n.clone(), &p, self.per_call, self.policy, &self.lp)?;
        self.tracker.charge_exact(label, &s.report().value_exact)?;
        Ok(s.sample(rng)?.k)
    }

    fn thin(&mut self, rng: &mut StreamRng) {
        self.halvings += 1;
        self.items.retain(|_| rng.next_u32() & 1 == 1);
    }

    fn step(&mut self, i: usize, t: u64, rng: &mut StreamRng) -> std::result::Result<(), Stop> {
        let nv = self.formula.num_vars;
        let clause = &self.formula.clauses[i];
        self.items.retain(|s| !clause.satisfied_by(s));
        let sols = clause_sol_count(clause, nv);
        let mut draw = self.binomial(&sols, self.halvings, &format!("clause {i}"), rng)?;
        while BigUint::from(self.items.len()) + &draw > BigUint::from(t) {
            self.thin(rng);
            draw = self.binomial(&draw, 1, &format!("clause {i} thinning {}", self.halvings), rng)?;
        }
        let count = draw.to_u64().expect("at most T");
        let fresh = sample_distinct_solutions(clause, nv, count, rng).map_err(Stop::Error)?;
        self.items.extend(fresh);
        while self.items.len() as u64 > t {
            self.thin(rng);
        }
        Ok(())
    }

    fn run(&mut self, t: u64, rng: &mut StreamRng) -> std::result::Result<(), Stop> {
        for i in 0..self.formula.clauses.len() {
            self.step(i, t, rng)?;
        }
        Ok(())
    }
}

/// Estimates `|sol(φ)|` within `(1 ± eps_tol)` with probability `≥ 1 − δ`,
/// giving `κδ` of the failure budget to the sampler.
pub fn apsest2(
    formula: &DnfFormula,
    eps_tol: f64,
    delta: f64,
    kappa: f64,
    rng: &mut StreamRng,
    policy: &PrecisionPolicy,
) -> Result<ApsOutcome> {
    for (name, v) in [("eps", eps_tol), ("delta", delta), ("kappa", kappa)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParam(format!("{name} = {v} is not in (0, 1)")));
        }
    }
    let m = formula.clauses.len();
    if m == 0 {
        return Err(Error::InvalidParam("formula has no satisfiable clause".into()));
    }
    let delta1 = f64_decimal(kappa)? * f64_decimal(delta)?;
    let delta2 = (1.0 - kappa) * delta;
    let t = threshold(eps_tol, delta2, m);
    let per_call = crate::exact::ratio_to_f64(&(&delta1 / BigRational::from_integer((4 * m).into())));
    let mut bucket = Bucket {
        formula,
        items: Vec::new(),
        halvings: 0,
        tracker: BudgetTracker::with_exact_budget(delta1)?,
        per_call,
        policy,
        lp: LanczosParams::default_set(),
    };
    let outcome = bucket.run(t, rng);
    let failed = match outcome {
        Ok(()) => false,
        Err(Stop::Failed) => true,
        Err(Stop::Error(e)) => return Err(e),
    };
    let estimate = (!failed).then(|| (BigUint::from(bucket.items.len()) << bucket.halvings as usize).to_string());
    Ok(ApsOutcome {
        estimate,
        delta_prime: bucket.tracker.accumulated(),
        t,
        final_p_log2: -(bucket.halvings as i64),
        failed,
    })
}

/// Random formula: `num_clauses` clauses, each over a uniformly drawn
/// width in `widths` with distinct variables and random signs.
pub fn random_dnf<R: RngCore + ?Sized>(
    rng: &mut R,
    num_vars: u32,
    num_clauses: usize,
    widths: std::ops::RangeInclusive<u32>,
) -> DnfFormula {
    let clauses = (0..num_clauses)
        .map(|_| {
            let w = rng.random_range(widths.clone()).min(num_vars);
            let vars = rand::seq::index::sample(rng, num_vars as usize, w as usize);
            let lits: Vec<i64> = vars
                .iter()
                .map(|v| if rng.random::<bool>() { v as i64 + 1 } else { -(v as i64 + 1) })
                .collect();
            Clause::new(&lits).expect("distinct variables")
        })
        .collect();
    DnfFormula { num_vars, clauses, dropped: 0 }
}

/// Shape of a generated benchmark family.
#[derive(Clone, Debug)]
pub struct BenchFamily {
    pub vars: std::ops::RangeInclusive<u32>,
    pub clauses: std::ops::RangeInclusive<usize>,
    pub widths: std::ops::RangeInclusive<u32>,
}

impl Default for BenchFamily {
    fn default() -> Self {
        BenchFamily { vars: 15..=20, clauses: 10..=40, widths: 3..=8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: usize,
    pub num_vars: u32,
    pub num_clauses: usize,
    pub exact: BigUint,
    pub outcome: ApsOutcome,
}

impl BenchRow {
    /// `|estimate − exact| / exact`, `None` for failed runs.
    pub fn rel_error(&self) -> Option<f64> {
        let est = self.outcome.estimate_value()?;
        let diff = BigRational::new(BigInt::from(est) - BigInt::from(self.exact.clone()), BigInt::from(self.exact.clone()));
        Some(crate::exact::ratio_to_f64(&diff).abs())
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:e},{}",
            self.instance,
            self.exact,
            self.outcome.estimate.as_deref().unwrap_or(""),
            self.rel_error().map(|e| format!("{e:.6}")).unwrap_or_default(),
            self.outcome.delta_prime,
            self.outcome.failed
        )
    }
}

pub const BENCH_CSV_HEADER: &str = "instance,exact,estimate,rel_error,delta_prime,failed";

/// Generates and runs `instances` formulas; instance `i` draws both its
/// formula and its run from stream `i` of `root`.
pub fn run_bench(
    instances: usize,
    family: &BenchFamily,
    eps_tol: f64,
    delta: f64,
    kappa: f64,
    root: &StreamRng,
    policy: &PrecisionPolicy,
) -> Result<Vec<BenchRow>> {
    map_indices(instances, |i| {
        let stream = root.split(i as u64);
        let mut gen = stream.split(0);
        let num_vars = gen.random_range(family.vars.clone());
        let num_clauses = gen.random_range(family.clauses.clone());
        let formula = random_dnf(&mut gen, num_vars, num_clauses, family.widths.clone());
        let exact = brute_force_count(&formula)?;
        let outcome = apsest2(&formula, eps_tol, delta, kappa, &mut stream.split(1), policy)?;
        Ok(BenchRow { instance: i, num_vars, num_clauses, exact, outcome })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clause(lits: &[i64]) -> Clause {
        Clause::new(lits).unwrap()
    }

    /// Inclusion–exclusion over clause subsets: a conjunction of clauses is
    /// contradictory or fixes the union of their variables.
    fn inclusion_exclusion(f: &DnfFormula) -> BigInt {
        let m = f.clauses.len();
        let mut total = BigInt::zero();
        for subset in 1u64..(1 << m) {
            let mut lits: Vec<i64> = Vec::new();
            for (i, c) in f.clauses.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    lits.extend(c.literals());
                }
            }
            let Some(merged) = Clause::new(&lits) else { continue };
            let term = BigInt::from(clause_sol_count(&merged, f.num_vars));
            if subset.count_ones() % 2 == 1 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }

    #[test]
    fn parse_examples() {
        let f = parse_dnf("p dnf 3 2\n1 -2 0\n2 3 0\n").unwrap();
        assert_eq!(f.num_vars, 3);
        assert_eq!(f.clauses, vec![clause(&[1, -2]), clause(&[2, 3])]);
        let f = parse_dnf("c comment\np dnf 2 2\n1 -1 0\n2 0\n").unwrap();
        assert_eq!(f.dropped, 1);
        assert_eq!(f.clauses.len(), 1);
        assert!(matches!(parse_dnf("p cnf 3 2\n1 0\n2 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dnf("p dnf 3 1\n1 4 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_dnf("p dnf 3 1\n1 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_dnf("p dnf 3 2\n1 2 0\n"), Err(Error::Parse { .. })));
        assert_eq!(parse_dnf("p dnf 3 1\n2 2 -3 0\n").unwrap().clauses[0].literals(), &[2, -3]);
        let f = parse_dnf("p dnf 4 2\n1 -2 0\n3 0\n").unwrap();
        assert_eq!(parse_dnf(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn sol_counts() {
        assert_eq!(clause_sol_count(&clause(&[1, 2, 3]), 20), BigUint::from(131_072u32));
        assert_eq!(clause_sol_count(&clause(&[1, -2]), 2), BigUint::one());
        assert_eq!(clause_sol_count(&clause(&[5, 6, -7]), 700), BigUint::one() << 697usize);
    }

    #[test]
    fn distinct_solution_examples() {
        let mut rng = StreamRng::seed_from_u64(1);
        assert!(sample_distinct_solutions(&clause(&[1]), 5, 0, &mut rng).unwrap().is_empty());
        let full = sample_distinct_solutions(&clause(&[1]), 2, 2, &mut rng).unwrap();
        let set: HashSet<BigUint> = full.into_iter().collect();
        // x1 = 1 with x2 free: bit patterns 01 and 11
        assert_eq!(set, HashSet::from([BigUint::from(1u32), BigUint::from(3u32)]));
        let c = clause(&[2, -9, 17]);
        let sols = sample_distinct_solutions(&c, 20, 100, &mut rng).unwrap();
        assert_eq!(sols.iter().collect::<HashSet<_>>().len(), 100);
        assert!(sols.iter().all(|s| c.satisfied_by(s) && s.bits() <= 20));
        assert!(matches!(
            sample_distinct_solutions(&clause(&[1, 2]), 3, 3, &mut rng),
            Err(Error::CountTooLarge { requested: 3, .. })
        ));
    }

    #[test]
    fn brute_force_examples() {
        let f = parse_dnf("p dnf 5 1\n1 0\n").unwrap();
        assert_eq!(brute_force_count(&f).unwrap(), BigUint::from(16u32));
        let f = parse_dnf("p dnf 2 2\n1 2 0\n-1 -2 0\n").unwrap();
        assert_eq!(brute_force_count(&f).unwrap(), BigUint::from(2u32));
        let big = DnfFormula { num_vars: 27, clauses: vec![clause(&[1])], dropped: 0 };
        assert!(matches!(brute_force_count(&big), Err(Error::TooManyVariables(27))));
        let mut rng = StreamRng::seed_from_u64(2);
        for _ in 0..3 {
            let f = random_dnf(&mut rng, 15, 10, 3..=8);
            assert_eq!(BigInt::from(brute_force_count(&f).unwrap()), inclusion_exclusion(&f));
        }
    }

    #[test]
    fn threshold_value() {
        // log2(4/0.18) + log2(20) = 4.474 + 4.322 = 8.796; / 0.64 = 13.74
        assert_eq!(threshold(0.8, 0.18, 20), 14);
    }

    #[test]
    fn single_clause_accuracy() {
        let f = parse_dnf("p dnf 5 1\n1 0\n").unwrap();
        let root = StreamRng::seed_from_u64(3);
        let mut inside = 0;
        for i in 0..100 {
            let out = apsest2(&f, 0.8, 0.36, 0.5, &mut root.split(i), &PrecisionPolicy::Auto).unwrap();
            let est = out.estimate_value().unwrap().to_f64().unwrap();
            if (3.2..=28.8).contains(&est) {
                inside += 1;
            }
        }
        assert!(inside >= 95, "{inside}");
    }

    #[test]
    fn covering_formula() {
        let f = parse_dnf("p dnf 12 2\n1 0\n-1 0\n").unwrap();
        let root = StreamRng::seed_from_u64(4);
        let mut inside = 0;
        for i in 0..50 {
            let out = apsest2(&f, 0.8, 0.36, 0.5, &mut root.split(i), &PrecisionPolicy::Auto).unwrap();
            let est = out.estimate_value().unwrap().to_f64().unwrap();
            if (0.2 * 4096.0..=1.8 * 4096.0).contains(&est) {
                inside += 1;
            }
        }
        assert!(inside as f64 >= 50.0 * 0.64, "{inside}");
    }

    #[test]
    fn tiny_kappa_fails() {
        let f = parse_dnf("p dnf 20 2\n1 2 0\n3 0\n").unwrap();
        let out = apsest2(&f, 0.8, 0.36, 1e-12, &mut StreamRng::seed_from_u64(5), &PrecisionPolicy::Auto).unwrap();
        assert!(out.failed);
        assert_eq!(out.estimate, None);
        let json: serde_json::Value = serde_json::from_str(&out.to_json()).unwrap();
        assert!(json["estimate"].is_null());
        assert_eq!(json["failed"], true);
    }

    #[test]
    fn huge_formula_runs() {
        let f = DnfFormula { num_vars: 700, clauses: vec![clause(&[1, 2, 3]), clause(&[-1, 4])], dropped: 0 };
        let out = apsest2(&f, 0.8, 0.36, 0.5, &mut StreamRng::seed_from_u64(6), &PrecisionPolicy::Auto).unwrap();
        assert!(!out.failed);
        // |sol| = 2^697 + 2^698 = 3·2^697
        let exact = BigUint::from(3u32) << 697usize;
        let est = out.estimate_value().unwrap();
        let ratio = BigRational::new(BigInt::from(est), BigInt::from(exact));
        let r = crate::exact::ratio_to_f64(&ratio);
        assert!(r > 0.2 && r < 1.8, "{r}");
    }

    #[test]
    fn json_shape() {
        let f = parse_dnf("p dnf 5 1\n1 0\n").unwrap();
        let out = apsest2(&f, 0.8, 0.36, 0.5, &mut StreamRng::seed_from_u64(7), &PrecisionPolicy::Auto).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.to_json()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["T", "delta_prime", "estimate", "failed", "final_p_log2"]);
        assert!(v["estimate"].is_string());
    }

    #[test]
    fn bench_rows_are_reproducible() {
        let fam = BenchFamily { vars: 12..=14, clauses: 5..=8, widths: 3..=5 };
        let root = StreamRng::seed_from_u64(8);
        let a = run_bench(4, &fam, 0.8, 0.36, 0.5, &root, &PrecisionPolicy::Auto).unwrap();
        let b = run_bench(4, &fam, 0.8, 0.36, 0.5, &root, &PrecisionPolicy::Auto).unwrap();
        assert_eq!(a, b);
        assert!(a[0].csv_line().starts_with("0,"));
    }

    /// Replays the estimator loop while checking invariants at every clause.
    #[test]
    fn bucket_invariants_hold() {
        let root = StreamRng::seed_from_u64(9);
        for i in 0..10 {
            let mut rng = root.split(i);
            let f = random_dnf(&mut rng, 16, 20, 3..=8);
            let t = threshold(0.8, 0.18, f.clauses.len());
            let mut b = Bucket {
                formula: &f,
                items: Vec::new(),
                halvings: 0,
                tracker: BudgetTracker::new(0.18).unwrap(),
                per_call: 0.18 / 80.0,
                policy: &PrecisionPolicy::Auto,
                lp: LanczosParams::default_set(),
            };
            let mut last_halvings = 0;
            let mut last_accum = 0.0;
            for i in 0..f.clauses.len() {
                assert!(b.step(i, t, &mut rng).is_ok());
                let prefix = DnfFormula { num_vars: 16, clauses: f.clauses[..=i].to_vec(), dropped: 0 };
                assert!(b.items.len() as u64 <= t);
                assert!(b.items.iter().all(|s| prefix.satisfied_by(s)));
                assert!(b.halvings >= last_halvings);
                assert!(b.tracker.accumulated() >= last_accum);
                last_halvings = b.halvings;
                last_accum = b.tracker.accumulated();
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn brute_force_matches_inclusion_exclusion(seed in any::<u64>(), vars in 4u32..=15, m in 1usize..=10) {
            let f = random_dnf(&mut StreamRng::seed_from_u64(seed), vars, m, 1..=vars.min(6));
            prop_assert_eq!(BigInt::from(brute_force_count(&f).unwrap()), inclusion_exclusion(&f));
        }

        #[test]
        fn distinct_solutions_satisfy(seed in any::<u64>(), width in 1u32..=10, count in 0u64..=40) {
            let mut rng = StreamRng::seed_from_u64(seed);
            let f = random_dnf(&mut rng, 12, 1, width..=width);
            let c = &f.clauses[0];
            let avail = clause_sol_count(c, 12).to_u64().unwrap();
            let count = count.min(avail);
            let sols = sample_distinct_solutions(c, 12, count, &mut rng).unwrap();
            prop_assert_eq!(sols.len() as u64, count);
            prop_assert_eq!(sols.iter().collect::<HashSet<_>>().len() as u64, count);
            prop_assert!(sols.iter().all(|s| c.satisfied_by(s)));
        }
    }
}
