//! The `binsamp` command line. Every command is a pure function of its
//! flags and seed, so repeated runs print identical bytes.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::bound::{select_precision_from, theorem_bound_with, BoundReport};
use crate::dnf::{apsest2, brute_force_count, parse_dnf, run_bench, BenchFamily, DnfFormula, BENCH_CSV_HEADER};
use crate::error::Error;
use crate::exact::{empirical_dtv, exact_pmf, parse_decimal, ExactSampler};
use crate::hatdist::{estimate_alpha, hat_params, HAT_OP_COUNT};
use crate::mpctx::{make_context, MIN_BETA};
use crate::rng::{seed_from_env, StreamRng};
use crate::sampler::{BinomialSampler, PrecisionPolicy, CHUNK};
use crate::specfun::{calibrate_zeta, load_lanczos, LanczosParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

const MAX_DTV_N: u64 = 1_000;
const MAX_DTV_SAMPLES: u64 = 100_000_000;
/// Calibration range for a user-supplied Lanczos set.
const CALIBRATION_N_MAX: u64 = 10_000;
const CALIBRATION_BETA: u32 = 256;

#[derive(Parser, Debug)]
#[command(name = "binsamp", version, about = "Binomial sampling with certified total-variation bounds")]
pub struct Cli {
    /// RNG seed; falls back to $BINSAMP_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Lanczos coefficient file (`g t` header, then t coefficients); it is
    /// calibrated on load.
    #[arg(long, global = true)]
    lanczos: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples from Binomial(n, p), then print the bound report.
    Sample(SampleArgs),
    /// Evaluate the total-variation bound at a fixed precision.
    Bound(BoundArgs),
    /// Smallest precision whose bound meets --delta-in.
    SelectPrecision(SelectArgs),
    /// Empirical distance of the sampler and of the exact baseline.
    EmpiricalDtv(DtvArgs),
    /// Approximate DNF model counting.
    Dnf {
        #[command(subcommand)]
        command: DnfCommand,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Precision {
    /// Target distance; precision is chosen automatically.
    #[arg(long, value_parser = parse_delta)]
    delta_in: Option<f64>,
    /// Fixed working precision in bits.
    #[arg(long, value_parser = clap::value_parser!(u32).range(MIN_BETA as i64..))]
    beta: Option<u32>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, value_parser = parse_n)]
    n: BigUint,
    #[arg(long, value_parser = parse_p)]
    p: BigRational,
    #[command(flatten)]
    precision: Precision,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, value_parser = parse_n)]
    n: BigUint,
    #[arg(long, value_parser = parse_p)]
    p: BigRational,
    #[arg(long)]
    beta: u32,
    /// Operation count (default: the hat's).
    #[arg(long)]
    c: Option<u32>,
    /// Rejection constant (default: estimated for (n, p)).
    #[arg(long)]
    alpha: Option<f64>,
    /// Lanczos error bound (default: the coefficient set's).
    #[arg(long)]
    zeta: Option<f64>,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[arg(long, value_parser = parse_n)]
    n: BigUint,
    #[arg(long, value_parser = parse_p)]
    p: BigRational,
    #[arg(long, value_parser = parse_delta)]
    delta_in: f64,
    #[arg(long, default_value_t = MIN_BETA)]
    min_beta: u32,
}

#[derive(Args, Debug)]
struct DtvArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_DTV_N))]
    n: u64,
    #[arg(long, value_parser = parse_p_text)]
    p: (String, BigRational),
    #[arg(long, value_parser = clap::value_parser!(u32).range(MIN_BETA as i64..))]
    beta: u32,
    /// Draws per sampler.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_DTV_SAMPLES))]
    samples: u64,
}

#[derive(Args, Debug)]
struct Tolerances {
    #[arg(long, default_value_t = 0.8, value_parser = parse_open_unit)]
    eps: f64,
    #[arg(long, default_value_t = 0.36, value_parser = parse_open_unit)]
    delta: f64,
    /// Share of delta given to the sampler.
    #[arg(long, default_value_t = 0.5, value_parser = parse_open_unit)]
    kappa: f64,
}

#[derive(Subcommand, Debug)]
enum DnfCommand {
    /// Estimate the number of satisfying assignments.
    Count {
        file: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Count satisfying assignments by enumeration (at most 26 variables).
    Exact { file: PathBuf },
    /// Run the estimator on generated formulas and compare with exact counts.
    Bench {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[command(flatten)]
        tol: Tolerances,
        #[arg(long, default_value_t = 15)]
        min_vars: u32,
        #[arg(long, default_value_t = 20)]
        max_vars: u32,
        #[arg(long, default_value_t = 10)]
        min_clauses: usize,
        #[arg(long, default_value_t = 40)]
        max_clauses: usize,
        #[arg(long, default_value_t = 3)]
        min_width: u32,
        #[arg(long, default_value_t = 8)]
        max_width: u32,
    },
}

fn parse_n(s: &str) -> Result<BigUint, String> {
    let n: BigUint = s.parse().map_err(|_| format!("'{s}' is not a nonnegative integer"))?;
    if n < BigUint::one() {
        return Err("n must be at least 1".into());
    }
    Ok(n)
}

fn parse_p(s: &str) -> Result<BigRational, String> {
    let p = parse_decimal(s).map_err(|e| e.to_string())?;
    if p <= BigRational::from_integer(0.into()) || p >= BigRational::one() {
        return Err(format!("p = {s} is not in (0, 1)"));
    }
    Ok(p)
}

fn parse_p_text(s: &str) -> Result<(String, BigRational), String> {
    Ok((s.to_string(), parse_p(s)?))
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let d: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(d > 0.0 && d <= 1.0) {
        return Err(format!("{s} is not in (0, 1]"));
    }
    Ok(d)
}

fn parse_open_unit(s: &str) -> Result<f64, String> {
    let d: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(d > 0.0 && d < 1.0) {
        return Err(format!("{s} is not in (0, 1)"));
    }
    Ok(d)
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::BudgetOverrun { .. } | Error::ZetaFloor { .. } => EXIT_FAIL,
        Error::InvalidParam(_)
        | Error::PrecisionTooLow(_)
        | Error::RegionTooSmall { .. }
        | Error::Parse { .. }
        | Error::TooManyVariables(_)
        | Error::ResourceLimit(_)
        | Error::CountTooLarge { .. } => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

struct Failure {
    code: i32,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), msg: e.to_string() }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure { code: EXIT_INTERNAL, msg: e.to_string() }
}

type CmdResult = Result<i32, Failure>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    seed: u64,
    lp: LanczosParams,
}

impl Ctx<'_> {
    fn line(&mut self, s: &str) -> Result<(), Failure> {
        writeln!(self.out, "{s}").map_err(io_failure)
    }

    fn warn(&mut self, s: &str) {
        let _ = writeln!(self.err, "warning: {s}");
    }
}

/// Mirrors `p > ½` the same way the sampler does.
fn canonical(p: &BigRational) -> BigRational {
    if p > &BigRational::new(1.into(), 2.into()) {
        BigRational::one() - p
    } else {
        p.clone()
    }
}

fn cmd_sample(cx: &mut Ctx, a: &SampleArgs) -> CmdResult {
    let (policy, delta_in) = match (a.precision.beta, a.precision.delta_in) {
        (Some(b), _) => (PrecisionPolicy::Fixed(make_context(b)?), 1.0),
        (None, Some(d)) => (PrecisionPolicy::Auto, d),
        (None, None) => unreachable!("clap requires one of --beta, --delta-in"),
    };
    let sampler = match BinomialSampler::new(a.n.clone(), &a.p, delta_in, &policy, &cx.lp) {
        Ok(s) => s,
        Err(e @ Error::BudgetExceeded { .. }) => {
            if let PrecisionPolicy::Fixed(ctx) = &policy {
                if let Ok(r) = rejection_report(&a.n, &a.p, ctx.beta(), None, None, None, &cx.lp) {
                    let _ = writeln!(cx.err, "{}", r.to_json());
                }
            }
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    let root = StreamRng::seed_from_u64(cx.seed);
    let block = CHUNK * 64;
    let mut start = 0;
    while start < a.count {
        let end = (start + block).min(a.count);
        let mut text = String::new();
        for r in sampler.sample_range(start..end, &root)? {
            text.push_str(&r.k.to_string());
            text.push('\n');
        }
        cx.out.write_all(text.as_bytes()).map_err(io_failure)?;
        start = end;
    }
    cx.line(&sampler.report().to_json())?;
    Ok(EXIT_OK)
}

fn rejection_report(
    n: &BigUint,
    p: &BigRational,
    beta: u32,
    c: Option<u32>,
    alpha: Option<f64>,
    zeta: Option<f64>,
    lp: &LanczosParams,
) -> crate::Result<BoundReport> {
    let pc = canonical(p);
    let alpha = match alpha {
        Some(a) => a,
        None => estimate_alpha(n, &pc)?,
    };
    theorem_bound_with(n, &pc, beta, c.unwrap_or(HAT_OP_COUNT), alpha, zeta.unwrap_or(lp.zeta))
}

fn cmd_bound(cx: &mut Ctx, a: &BoundArgs) -> CmdResult {
    let r = rejection_report(&a.n, &a.p, a.beta, a.c, a.alpha, a.zeta, &cx.lp)?;
    cx.line(&r.to_json())?;
    Ok(EXIT_OK)
}

fn cmd_select(cx: &mut Ctx, a: &SelectArgs) -> CmdResult {
    let pc = canonical(&a.p);
    let hp = hat_params(&a.n, &pc, &make_context(a.min_beta.max(MIN_BETA))?)?;
    let ctx = select_precision_from(&a.n, &pc, a.delta_in, &hp, &cx.lp, a.min_beta)?;
    let r = theorem_bound_with(&a.n, &pc, ctx.beta(), hp.c, hp.alpha, cx.lp.zeta)?;
    cx.line(&r.to_json())?;
    Ok(EXIT_OK)
}

/// `n,p,beta,S,dtv_sampler,dtv_baseline`: both samplers draw `S` values,
/// from independent child streams of the seed.
fn cmd_dtv(cx: &mut Ctx, a: &DtvArgs) -> CmdResult {
    let n = BigUint::from(a.n);
    let pmf = exact_pmf(a.n, &a.p.1)?;
    let sampler = BinomialSampler::new(n, &a.p.1, 1.0, &PrecisionPolicy::Fixed(make_context(a.beta)?), &cx.lp)?;
    let root = StreamRng::seed_from_u64(cx.seed);
    let (hist, _) = sampler.histogram(a.samples, &root.split(0))?;
    let base = ExactSampler::new(&pmf).histogram(a.samples, a.beta, &root.split(1));
    let d_s = empirical_dtv(&hist, &pmf)?;
    let d_b = empirical_dtv(&base, &pmf)?;
    cx.line("n,p,beta,S,dtv_sampler,dtv_baseline")?;
    cx.line(&format!("{},{},{},{},{:.6e},{:.6e}", a.n, a.p.0, a.beta, a.samples, d_s, d_b))?;
    Ok(EXIT_OK)
}

fn read_formula(cx: &mut Ctx, path: &PathBuf) -> Result<DnfFormula, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_USAGE, msg: format!("{}: {e}", path.display()) })?;
    let f = parse_dnf(&text)?;
    if f.dropped > 0 {
        cx.warn(&format!("dropped {} contradictory clause(s)", f.dropped));
    }
    Ok(f)
}

fn cmd_dnf(cx: &mut Ctx, c: &DnfCommand) -> CmdResult {
    match c {
        DnfCommand::Count { file, tol } => {
            let f = read_formula(cx, file)?;
            let mut rng = StreamRng::seed_from_u64(cx.seed);
            let out = apsest2(&f, tol.eps, tol.delta, tol.kappa, &mut rng, &PrecisionPolicy::Auto)?;
            cx.line(&out.to_json())?;
            Ok(if out.failed { EXIT_FAIL } else { EXIT_OK })
        }
        DnfCommand::Exact { file } => {
            let f = read_formula(cx, file)?;
            let count = brute_force_count(&f)?;
            cx.line(&serde_json::json!({ "exact": count.to_string() }).to_string())?;
            Ok(EXIT_OK)
        }
        DnfCommand::Bench { instances, tol, min_vars, max_vars, min_clauses, max_clauses, min_width, max_width } => {
            if min_vars > max_vars || min_clauses > max_clauses || min_width > max_width || *min_vars == 0 || *min_width == 0 {
                return Err(Error::InvalidParam("bench ranges must be nonempty and positive".into()).into());
            }
            let family = BenchFamily {
                vars: *min_vars..=*max_vars,
                clauses: *min_clauses..=*max_clauses,
                widths: *min_width..=*max_width,
            };
            let root = StreamRng::seed_from_u64(cx.seed);
            let rows = run_bench(*instances, &family, tol.eps, tol.delta, tol.kappa, &root, &PrecisionPolicy::Auto)?;
            cx.line(BENCH_CSV_HEADER)?;
            for r in &rows {
                cx.line(&r.csv_line())?;
            }
            Ok(if rows.iter().any(|r| r.outcome.failed) { EXIT_FAIL } else { EXIT_OK })
        }
    }
}

fn lanczos_from(path: &Option<PathBuf>, err: &mut dyn Write) -> Result<LanczosParams, Failure> {
    let Some(path) = path else {
        return Ok(LanczosParams::default_set());
    };
    let lp = load_lanczos(path)?;
    let cal = calibrate_zeta(&lp, CALIBRATION_N_MAX, &make_context(CALIBRATION_BETA)?)?;
    let _ = writeln!(err, "calibrated zeta = {:e} (max relative error at k = {})", cal.zeta, cal.argmax);
    Ok(lp.with_zeta(cal.zeta))
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let seed = match cli.seed {
        Some(s) => s,
        None => seed_from_env(0).map_err(|msg| Failure { code: EXIT_USAGE, msg })?,
    };
    let lp = lanczos_from(&cli.lanczos, err)?;
    let mut cx = Ctx { out, err, seed, lp };
    match &cli.command {
        Command::Sample(a) => cmd_sample(&mut cx, a),
        Command::Bound(a) => cmd_bound(&mut cx, a),
        Command::SelectPrecision(a) => cmd_select(&mut cx, a),
        Command::EmpiricalDtv(a) => cmd_dtv(&mut cx, a),
        Command::Dnf { command } => cmd_dnf(&mut cx, command),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.output {
        Some(path) => match std::fs::File::create(path) {
            Ok(f) => {
                let mut w = std::io::BufWriter::new(f);
                let r = dispatch(&cli, &mut w, stderr);
                w.flush().map_err(io_failure).and(r)
            }
            Err(e) => Err(Failure { code: EXIT_USAGE, msg: format!("{}: {e}", path.display()) }),
        },
        None => dispatch(&cli, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.msg);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["binsamp"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sample_prints_values_then_report() {
        let (code, out, _) = run_args(&["sample", "--n", "100", "--p", "0.3", "--delta-in", "1e-9", "--count", "5", "--seed", "7"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 6);
        for l in &lines[..5] {
            assert!(l.parse::<u64>().unwrap() <= 100);
        }
        let report: serde_json::Value = serde_json::from_str(lines[5]).unwrap();
        assert!(report["value"].as_f64().unwrap() <= 1e-9);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["sample", "--n", "10", "--p", "1.5", "--beta", "64"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["sample", "--n", "10", "--p", "0.5", "--beta", "64", "--count", "0"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["sample", "--n", "10", "--p", "0.5"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["sample", "--n", "10", "--p", "0.5", "--beta", "64", "--delta-in", "0.1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["bound", "--n", "1000", "--p", "0.3", "--beta", "16"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn budget_failure_exits_one() {
        let (code, _, err) = run_args(&["sample", "--n", "1000", "--p", "0.5", "--beta", "20"]);
        assert_eq!(code, EXIT_FAIL);
        assert!(err.contains("\"value\""));
        let (code, _, _) = run_args(&["sample", "--n", "100", "--p", "0.3", "--delta-in", "1e-13"]);
        assert_eq!(code, EXIT_FAIL);
    }

    #[test]
    fn bound_hand_example() {
        let (code, out, _) =
            run_args(&["bound", "--n", "20", "--p", "0.3", "--beta", "64", "--c", "20", "--alpha", "1.3", "--zeta", "0"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        let expected = 71104.0 * 20.0 * 2f64.powi(-64);
        assert!((v["term_arith"].as_f64().unwrap() - expected).abs() <= expected * 1e-15);
        assert_eq!(v["n"], 20);
    }

    #[test]
    fn select_precision_is_minimal() {
        let (code, out, _) = run_args(&["select-precision", "--n", "100", "--p", "0.3", "--delta-in", "1e-9"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        let beta = v["beta"].as_u64().unwrap();
        assert!(v["value"].as_f64().unwrap() <= 1e-9);
        let below = beta - 1;
        let (_, out, _) = run_args(&["bound", "--n", "100", "--p", "0.3", "--beta", &below.to_string()]);
        let w: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert!(w["value"].as_f64().unwrap() > 1e-9);
    }

    #[test]
    fn dtv_small_run() {
        let (code, out, _) = run_args(&["empirical-dtv", "--n", "20", "--p", "0.5", "--beta", "64", "--samples", "10"]);
        assert_eq!(code, 0);
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(&row[..4], &["20", "0.5", "64", "10"]);
        assert!(row[4].parse::<f64>().unwrap() <= 1.0);
        assert!(row[5].parse::<f64>().unwrap() <= 1.0);
        assert_eq!(run_args(&["empirical-dtv", "--n", "1001", "--p", "0.5", "--beta", "64", "--samples", "10"]).0, EXIT_USAGE);
    }

    #[test]
    fn dnf_commands() {
        let dir = std::env::temp_dir().join(format!("binsamp-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("one.dnf");
        std::fs::write(&file, "p dnf 5 1\n1 0\n").unwrap();
        let f = file.to_str().unwrap();
        let (code, out, _) = run_args(&["dnf", "exact", f]);
        assert_eq!((code, out.trim()), (0, r#"{"exact":"16"}"#));
        let (code, out, _) = run_args(&["dnf", "count", f, "--seed", "3"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert!(v["estimate"].is_string());
        let wide = dir.join("wide.dnf");
        std::fs::write(&wide, "p dnf 20 1\n1 0\n").unwrap();
        let (code, out, _) = run_args(&["dnf", "count", wide.to_str().unwrap(), "--kappa", "1e-12"]);
        assert_eq!(code, EXIT_FAIL);
        assert!(out.contains("\"failed\":true"));
        std::fs::write(&file, "p dnf 5 1\n1 9 0\n").unwrap();
        let (code, _, err) = run_args(&["dnf", "count", f]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("line 2"));
        let (code, out, _) = run_args(&["dnf", "bench", "--instances", "3", "--min-vars", "10", "--max-vars", "12", "--seed", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next().unwrap(), BENCH_CSV_HEADER);
        assert_eq!(out.lines().count(), 4);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn seed_flag_wins() {
        let a = run_args(&["sample", "--n", "50", "--p", "0.4", "--beta", "64", "--count", "20", "--seed", "9"]);
        let b = run_args(&["sample", "--n", "50", "--p", "0.4", "--beta", "64", "--count", "20", "--seed", "9"]);
        let c = run_args(&["sample", "--n", "50", "--p", "0.4", "--beta", "64", "--count", "20", "--seed", "10"]);
        assert_eq!(a, b);
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::ZetaFloor { delta_in: 0.0, floor: 1.0 }), EXIT_FAIL);
        assert_eq!(exit_code(&Error::Parse { line: 1, msg: String::new() }), EXIT_USAGE);
        assert_eq!(exit_code(&Error::DivisionByZero), EXIT_INTERNAL);
    }
}
