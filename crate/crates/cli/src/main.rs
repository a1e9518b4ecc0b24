use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixnet::bounds::{bound_report, verify_identities, ConstantTable};
use mixnet::digitalnet::{net_quality, DigitalNet};
use mixnet::generators::{
    chen_skriganov, equidistant, halton, hammersley, kronecker, lift_sequence, rescale_first_coordinate,
    van_der_corput, HammersleyPattern,
};
use mixnet::gfpoly::is_prime;
use mixnet::haar::{disc_spectrum, parseval_check};
use mixnet::norms::{
    besov_quasinorm, l2_disc, l2_disc_squared_f64, lp_disc, parse_exponent, star_disc, volume_tail_closed_form,
    BesovParams, LpMethod, NormReport,
};
use mixnet::walsh::theta_study;
use mixnet::PointSet;
use serde_json::json;

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "mixnet", version, about = "Digital nets, discrepancy norms and Haar/Walsh analysis")]
struct Cli {
    /// Worker threads for parallel kernels (0 = all cores).
    #[arg(long, global = true, env = "MIXNET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point set and write it as CSV.
    Gen(GenArgs),
    /// Quality parameter of a b-adic set, plus dual distances when it is digital.
    CheckNet(CheckNetArgs),
    /// Discrepancy norm of a point set as JSON.
    Disc(DiscArgs),
    /// Haar spectrum of the discrepancy function as CSV.
    Haar(HaarArgs),
    /// Compare the two routes to the main part of the discrepancy of a digital net.
    WalshSplit(WalshSplitArgs),
    /// Constant table or a measured bound report.
    Bounds(BoundsArgs),
    /// Run the identity suite or a Parseval check.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Equidistant,
    Kronecker,
    Halton,
    Vdc,
    Hammersley,
    Cs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    b: Option<u64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    d: Option<usize>,
    /// Digit pattern of s/c characters, or a count of leading 's'.
    #[arg(long, conflicts_with = "an")]
    pattern: Option<String>,
    /// Canonical pattern with this many leading 's'.
    #[arg(long)]
    an: Option<usize>,
    #[arg(long = "N")]
    count: Option<u64>,
    /// Kronecker frequency (default: fractional part of the golden ratio).
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckNetArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Exit 1 unless the quality parameter equals this value.
    #[arg(long)]
    v_expected: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Norm {
    L2,
    Star,
    Lp,
    Besov,
}

#[derive(Args)]
struct DiscArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    norm: Norm,
    #[arg(long, value_parser = exponent_arg)]
    p: Option<f64>,
    #[arg(long, value_parser = exponent_arg)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Grid resolution for the Lp quadrature.
    #[arg(long, conflicts_with = "samples")]
    grid: Option<usize>,
    /// Monte Carlo samples for the Lp estimate.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct HaarArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    jmax: i32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WalshSplitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest accepted gap between the two routes.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct BoundsArgs {
    /// Print the constant table for --b and --d.
    #[arg(long, conflicts_with = "with", requires = "d")]
    report: bool,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long, default_value_t = 2)]
    b: u64,
    /// Measure a point set and compare it with the theoretical envelopes.
    #[arg(long = "with")]
    with: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    identities: bool,
    #[arg(long, default_value_t = 101)]
    bmax: u64,
    #[arg(long, requires_all = ["input", "jmax"])]
    parseval: bool,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    jmax: Option<i32>,
}

fn exponent_arg(s: &str) -> Result<f64, String> {
    parse_exponent(s).map_err(|e| e.to_string())
}

/// Failures split by exit code: bad input (2) or a failed check (1).
enum Failure {
    Usage(String),
    Check(String),
}

impl From<mixnet::Error> for Failure {
    fn from(e: mixnet::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required here")))
}

fn read_points(path: &Path) -> Result<PointSet, Failure> {
    let f = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(PointSet::read_csv(BufReader::new(f))?)
}

fn write_to(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> mixnet::Result<()>) -> Outcome {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

/// Print to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn print_json(v: &serde_json::Value) {
    emit(&serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn first_primes(k: usize) -> Vec<u64> {
    (2u64..).filter(|&q| is_prime(q)).take(k).collect()
}

fn gen(a: GenArgs) -> Outcome {
    let set = match a.family {
        Family::Equidistant => equidistant(need(a.count, "N")?)?,
        Family::Vdc => van_der_corput(need(a.count, "N")?, a.b.unwrap_or(2))?,
        Family::Halton => {
            let d = a.d.unwrap_or(2);
            if d < 2 {
                return usage("halton needs --d ≥ 2");
            }
            halton(need(a.count, "N")?, &first_primes(d - 1))?
        }
        Family::Kronecker => {
            let count = need(a.count, "N")? as usize;
            let theta = a.theta.unwrap_or((5f64.sqrt() - 1.0) / 2.0);
            let mut p = lift_sequence(&kronecker(theta, count), count)?;
            let prov = p.provenance().clone().with("theta", theta);
            p.set_provenance(prov);
            p
        }
        Family::Hammersley => {
            let b = need(a.b, "b")?;
            let n = need(a.n, "n")?;
            let pattern = match (a.pattern.as_deref(), a.an) {
                (Some(s), _) => match s.parse::<usize>() {
                    Ok(an) => HammersleyPattern::canonical(n as usize, an)?,
                    Err(_) => s.parse::<HammersleyPattern>()?,
                },
                (None, Some(an)) => HammersleyPattern::canonical(n as usize, an)?,
                (None, None) => HammersleyPattern::all_same(n as usize),
            };
            hammersley(b, n, &pattern)?
        }
        Family::Cs => {
            let d = a.d.unwrap_or(2);
            let b = need(a.b, "b")?;
            let n = need(a.n, "n")? as usize;
            if d == 0 || n == 0 || !n.is_multiple_of(2 * d) {
                return usage(format!("cs needs n to be a positive multiple of 2d = {}", 2 * d));
            }
            let net = chen_skriganov(d, b, n / (2 * d))?;
            match a.count {
                Some(count) => rescale_first_coordinate(&net.points, count)?,
                None => net.points,
            }
        }
    };
    write_to(a.out.as_deref(), |w| set.write_csv(w))
}

fn check_net(a: CheckNetArgs) -> Outcome {
    let p = read_points(&a.input)?;
    let n = match p.resolution() {
        Some(n) => n,
        None => return usage("check-net needs a b-adic point set"),
    };
    let quality = net_quality(&p)?;
    let mut report = json!({
        "schema": SCHEMA,
        "b": p.base(),
        "n": n,
        "d": p.dim(),
        "N": p.len(),
        "quality": quality,
    });
    if let Some(net) = DigitalNet::from_points(p) {
        report["digital"] = json!(true);
        match net.matrices.subspace().dual_space().min_distance() {
            Ok((delta, kappa)) => {
                report["dual_delta"] = json!(delta);
                report["dual_kappa"] = json!(kappa);
            }
            Err(e) => report["dual_skipped"] = json!(e.to_string()),
        }
    } else {
        report["digital"] = json!(false);
    }
    if let Some(v) = a.v_expected {
        report["v_expected"] = json!(v);
    }
    print_json(&report);
    match a.v_expected {
        Some(v) if v != quality => Err(Failure::Check(format!("quality {quality} differs from expected {v}"))),
        _ => Ok(()),
    }
}

fn disc(a: DiscArgs) -> Outcome {
    let p = read_points(&a.input)?;
    let report = match a.norm {
        Norm::L2 => NormReport::basic("l2", l2_disc(&p)?, &p),
        Norm::Star => NormReport::basic("star", star_disc(&p)?, &p),
        Norm::Lp => {
            let pw = need(a.p, "p")?;
            if pw.is_infinite() {
                NormReport::basic("star", star_disc(&p)?, &p)
            } else {
                let method = match a.samples {
                    Some(samples) => LpMethod::MonteCarlo { samples, seed: a.seed },
                    None => LpMethod::Grid { resolution: a.grid.unwrap_or(256) },
                };
                let est = lp_disc(&p, pw, method)?;
                let mut r = NormReport::basic("lp", est.value, &p);
                r.error = Some(est.error);
                r.p = Some(mixnet::norms::Exponent(pw));
                r
            }
        }
        Norm::Besov => {
            let params = BesovParams::new(need(a.p, "p")?, need(a.q, "q")?, need(a.r, "r")?);
            besov_quasinorm(&p, &params)?
        }
    };
    emit(&report.to_json());
    Ok(())
}

fn haar(a: HaarArgs) -> Outcome {
    let p = read_points(&a.input)?;
    let spec = disc_spectrum(&p, a.jmax)?;
    write_to(a.out.as_deref(), |w| spec.write_csv(w))
}

fn walsh_split(a: WalshSplitArgs) -> Outcome {
    let p = read_points(&a.input)?;
    let n = p.resolution();
    let net = match DigitalNet::from_points(p) {
        Some(net) => net,
        None => return usage("walsh-split needs a digital net listed in index order"),
    };
    let study = theta_study(&net, a.samples, a.seed)?;
    let agree = study.max_route_gap <= a.tol;
    print_json(&json!({
        "schema": SCHEMA,
        "b": net.matrices.base(),
        "n": n,
        "d": net.matrices.dim(),
        "samples": study.samples,
        "seed": study.seed,
        "max_route_gap": study.max_route_gap,
        "tolerance": a.tol,
        "agree": agree,
        "sup_scaled_rest": study.sup_scaled_rest,
    }));
    if agree {
        Ok(())
    } else {
        Err(Failure::Check(format!("route gap {:.3e} above {:.3e}", study.max_route_gap, a.tol)))
    }
}

fn bounds(a: BoundsArgs) -> Outcome {
    if let Some(path) = a.with {
        let p = read_points(&path)?;
        let mut measured = vec![NormReport::basic("l2", l2_disc(&p)?, &p)];
        if let Ok(v) = star_disc(&p) {
            measured.push(NormReport::basic("star", v, &p));
        }
        if p.is_badic() && p.dim() >= 2 {
            measured.push(besov_quasinorm(&p, &BesovParams::new(2.0, 2.0, 0.0))?);
        }
        let report = bound_report(&p, &measured);
        emit(&report.to_json());
        return if report.passed() {
            Ok(())
        } else {
            Err(Failure::Check("bound report has failing assertions".into()))
        };
    }
    if !a.report {
        return usage("bounds needs --report or --with");
    }
    let d = need(a.d, "d")?;
    if d == 0 || a.b < 2 {
        return usage("bounds needs --d ≥ 1 and --b ≥ 2");
    }
    let table = ConstantTable::new(a.b, d);
    emit(&serde_json::to_string_pretty(&table).expect("table serializes"));
    Ok(())
}

fn verify(a: VerifyArgs) -> Outcome {
    if !a.identities && !a.parseval {
        return usage("verify needs --identities or --parseval");
    }
    let mut failures = Vec::new();
    if a.identities {
        if a.bmax < 2 {
            return usage("--bmax must be at least 2");
        }
        let rep = verify_identities(a.bmax);
        print_json(&json!({
            "schema": SCHEMA,
            "check": "identities",
            "bmax": a.bmax,
            "max_abs_err": rep.max_abs_err,
            "tolerance": rep.tolerance,
            "passed": rep.passed,
        }));
        if !rep.passed {
            failures.push(format!("identity error {:.3e} above {:.1e}", rep.max_abs_err, rep.tolerance));
        }
    }
    if a.parseval {
        let p = read_points(a.input.as_deref().expect("clap enforces --in"))?;
        let jmax = a.jmax.expect("clap enforces --jmax");
        let reference = l2_disc_squared_f64(&p)?;
        let spec = disc_spectrum(&p, jmax)?;
        let rep = parseval_check(&spec, reference);
        // coefficients beyond the cap depend only on b and d, so the missing mass is known exactly
        let tail = volume_tail_closed_form(p.base(), p.dim(), &BesovParams::new(2.0, 2.0, 0.0), (jmax + 1).max(0) as u32);
        let residual = rep.gap - tail;
        let passed = rep.gap >= -1e-12 && residual.abs() <= 1e-9;
        print_json(&json!({
            "schema": SCHEMA,
            "check": "parseval",
            "jmax": jmax,
            "sum": rep.sum,
            "reference": rep.reference,
            "gap": rep.gap,
            "analytic_tail": tail,
            "residual": residual,
            "passed": passed,
        }));
        if !passed {
            failures.push(format!("Parseval residual {residual:.3e}"));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Gen(a) => gen(a),
        Command::CheckNet(a) => check_net(a),
        Command::Disc(a) => disc(a),
        Command::Haar(a) => haar(a),
        Command::WalshSplit(a) => walsh_split(a),
        Command::Bounds(a) => bounds(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
    }
}
