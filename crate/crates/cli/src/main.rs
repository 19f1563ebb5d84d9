//! `thetanz`: verification drivers with JSON reports on stdout and short
//! summaries on stderr.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use thetanz_core::gauss::{self, GaussSumSpec};
use thetanz_core::halfint::{self, HalfIntForm, HalfIntJson};
use thetanz_core::jacobi::{self, JacobiFormCoeffs, JacobiJson};
use thetanz_core::theta_matrix::{self, EpsilonContext};
use thetanz_core::Error;

#[derive(Parser, Debug)]
#[command(name = "thetanz", version, about = "Verification drivers for theta decompositions, Gauss sums and the half-integral weight sieve")]
struct Cli {
    /// Report `elapsed` as null so that output is byte-stable.
    #[arg(long, global = true)]
    no_timing: bool,
    /// Worker threads for the parallel drivers (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quadratic Gauss sums.
    #[command(subcommand)]
    Gauss(GaussCmd),
    /// Theta transformation coefficients.
    #[command(subcommand)]
    Epsilon(EpsilonCmd),
    /// Square classes ν² ≡ ν₀² (mod 4m) for m = m1·m2.
    SquareClasses(SquareClassArgs),
    /// Full-rank scans of the class matrices.
    #[command(subcommand)]
    Rank(RankCmd),
    /// Jacobi form coefficient tables.
    #[command(subcommand)]
    Jacobi(JacobiCmd),
    /// Half-integral weight coefficient sieve.
    #[command(subcommand)]
    Halfint(HalfintCmd),
    /// Half-integral matrix T with 4·det T = D.
    Witness(WitnessArgs),
}

#[derive(Subcommand, Debug)]
enum GaussCmd {
    /// Evaluate G(a, b, c) in closed form.
    Eval(GaussEvalArgs),
    /// Compare the closed form with direct summation for every c ≤ cmax.
    Verify(GaussVerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct GaussEvalArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    #[arg(long)]
    c: u64,
    /// Report only the exact value.
    #[arg(long, conflicts_with = "numeric")]
    exact: bool,
    /// Report only the complex value.
    #[arg(long)]
    numeric: bool,
}

#[derive(Args, Debug, Serialize)]
struct GaussVerifyArgs {
    #[arg(long, default_value_t = 200)]
    cmax: u64,
}

#[derive(Subcommand, Debug)]
enum EpsilonCmd {
    /// ε(ν, μ) for all ν, μ mod 2m and the class matrices M_{ν₀}.
    Matrix(EpsilonArgs),
}

#[derive(Args, Debug, Serialize)]
struct EpsilonArgs {
    /// Odd level N.
    #[arg(long = "N")]
    n: u64,
    #[arg(long)]
    m1: u64,
    #[arg(long)]
    m2: u64,
    /// Unit l mod 4·m2 for the class matrices (default −M̄ mod 4·m2).
    #[arg(long, allow_hyphen_values = true)]
    l: Option<i64>,
}

#[derive(Args, Debug, Serialize)]
struct SquareClassArgs {
    #[arg(long)]
    m1: u64,
    #[arg(long)]
    m2: u64,
    /// A single class; otherwise every class of units mod m1.
    #[arg(long, allow_hyphen_values = true)]
    nu0: Option<i64>,
}

#[derive(Subcommand, Debug)]
enum RankCmd {
    /// Scan every split m = m1·m2 ≤ max-index, class and unit l.
    Scan(ScanArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
struct ScanArgs {
    #[arg(long, default_value_t = 105)]
    max_index: u64,
    /// Odd levels N; each fixes the split m1 = gcd(N, m).
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u64>>,
    /// Also scan even m2 (where the rank can drop).
    #[arg(long)]
    include_even: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum JacobiCmd {
    /// Build a named form.
    Construct(ConstructArgs),
    /// Apply the index-raising operator V_ℓ.
    Vell(VellArgs),
    /// Theta components h_μ.
    Decompose(InputArgs),
    /// Primitive nonvanishing of the theta components.
    Check(CheckArgs),
    /// Numerical transformation checks for γ = [[1, 0], [N, 1]].
    TransformCheck(TransformArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum FormName {
    #[value(name = "phi10_1")]
    #[serde(rename = "phi10_1")]
    Phi10_1,
}

#[derive(Args, Debug, Serialize)]
struct ConstructArgs {
    #[arg(long, value_enum, default_value_t = FormName::Phi10_1)]
    form: FormName,
    /// Largest discriminant 4mn − r² kept.
    #[arg(long, default_value_t = 80)]
    prec: i64,
}

#[derive(Args, Debug, Serialize)]
struct InputArgs {
    /// Coefficient table JSON (`-` for stdin).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct VellArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    ell: u64,
}

#[derive(Args, Debug, Serialize)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    /// Split m1,m2 of the index.
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<u64>>,
}

#[derive(Args, Debug, Serialize)]
struct TransformArgs {
    /// Lower-left entry of γ for the theta check; the component check uses −N.
    #[arg(long = "N", default_value_t = 1, allow_hyphen_values = true)]
    n: i64,
    /// Indices m for the theta check.
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 3])]
    index: Vec<u64>,
    /// τ as re,im.
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    tau: String,
    /// z as re,im.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    z: String,
    /// Largest accepted residual.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Coefficient table whose components are checked as well.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum HalfintCmd {
    /// Reduce to a form supported on n prime to 4L.
    Sieve(SieveArgs),
}

#[derive(Args, Debug, Serialize)]
struct SieveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "L")]
    l: Option<u64>,
    #[arg(long = "Lf")]
    lf: u64,
    #[arg(long)]
    bound: u64,
}

#[derive(Args, Debug, Serialize)]
struct WitnessArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, allow_hyphen_values = true)]
    mu: i64,
    #[arg(long = "D")]
    d: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Fail,
    Warn,
}

#[derive(Serialize)]
struct ReportEnvelope {
    command: String,
    parameters: Value,
    status: Status,
    payload: Value,
    elapsed: Option<f64>,
    tool_version: &'static str,
}

/// Outcome of a subcommand before wrapping.
struct Outcome {
    status: Status,
    payload: Value,
    summary: String,
    /// Replaces the JSON envelope on stdout.
    raw: Option<String>,
}

impl Outcome {
    fn new(status: Status, payload: Value, summary: String) -> Self {
        Outcome { status, payload, summary, raw: None }
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Core(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "{s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Core(e.into())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(s)
}

fn read_jacobi(path: &PathBuf) -> Result<JacobiFormCoeffs, CliError> {
    let j: JacobiJson = serde_json::from_str(&read_input(path)?)
        .map_err(|e| CliError::Input(format!("malformed coefficient table: {e}")))?;
    Ok(JacobiFormCoeffs::from_json(&j)?)
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Input(format!("expected re,im but got {s:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(re.parse().map_err(|_| bad())?, 0.0)),
        [re, im] => Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn gauss_eval(a: &GaussEvalArgs) -> Result<Outcome, CliError> {
    if a.c == 0 {
        return Err(CliError::Input("c must be positive".into()));
    }
    let spec = GaussSumSpec::new(a.a, a.b, a.c);
    let (value, counts) = gauss::gauss_closed_counted(&spec);
    let z = value.embed();
    let mut payload = json!({ "spec": spec, "cases": counts });
    if !a.numeric {
        payload["exact"] = to_value(&value);
    }
    if !a.exact {
        payload["numeric"] = json!([z.re, z.im]);
    }
    let summary = format!("G({}, {}, {}) = {}", a.a, a.b, a.c, value);
    Ok(Outcome::new(Status::Pass, payload, summary))
}

fn gauss_verify(a: &GaussVerifyArgs) -> Result<Outcome, CliError> {
    let r = gauss::gauss_verify_range(a.cmax);
    let summary = format!(
        "checked {} triples with c ≤ {}: {} failures; case counts {:?}",
        r.checked,
        a.cmax,
        r.failures.len(),
        r.counts.cases()
    );
    Ok(Outcome::new(pass_if(r.passed()), to_value(&r), summary))
}

fn epsilon_matrix(a: &EpsilonArgs) -> Result<Outcome, CliError> {
    let ctx = EpsilonContext::new(a.n, a.m1, a.m2, a.l)?;
    let eps = theta_matrix::epsilon_matrix(&ctx);
    let mut classes = Vec::new();
    let mut all_full = true;
    for class in theta_matrix::coprime_square_classes(a.m1, a.m2) {
        let roots = theta_matrix::class_matrix_roots(&ctx, class.nu0 as i64)?;
        let rank = roots.rank();
        all_full &= rank == roots.rows();
        classes.push(json!({
            "nu0": class.nu0,
            "members": class.members,
            "matrix": roots.to_cyclo(),
            "rank": rank,
            "full_rank": rank == roots.rows(),
        }));
    }
    let summary = format!(
        "N = {}, m1 = {}, m2 = {}, l = {}: {} classes, {}",
        ctx.level,
        ctx.m1,
        ctx.m2,
        ctx.l,
        classes.len(),
        if all_full { "all of full row rank" } else { "rank deficiency found" }
    );
    let payload = json!({ "context": ctx, "epsilon": eps, "classes": classes });
    Ok(Outcome::new(pass_if(all_full), payload, summary))
}

fn square_classes(a: &SquareClassArgs) -> Result<Outcome, CliError> {
    let classes = match a.nu0 {
        Some(nu0) => vec![theta_matrix::square_class(a.m1, a.m2, nu0)?],
        None => {
            let m = a.m1 * a.m2;
            if m == 0 || !thetanz_core::arith::is_square_free(m)? {
                return Err(Error::from(theta_matrix::ThetaError::BadIndex(m)).into());
            }
            theta_matrix::coprime_square_classes(a.m1, a.m2)
        }
    };
    let ok = classes.iter().all(|c| c.members.len() == c.expected_size());
    let listed: Vec<Value> = classes
        .iter()
        .map(|c| json!({ "nu0": c.nu0, "members": c.members, "size": c.members.len(), "expected": c.expected_size() }))
        .collect();
    let summary = format!("{} classes, sizes {}", classes.len(), if ok { "match 2^t'" } else { "MISMATCH" });
    Ok(Outcome::new(pass_if(ok), json!({ "m1": a.m1, "m2": a.m2, "classes": listed }), summary))
}

fn rank_scan(a: &ScanArgs) -> Result<Outcome, CliError> {
    if let Some(levels) = &a.levels {
        if let Some(&n) = levels.iter().find(|&&n| n == 0 || n % 2 == 0) {
            return Err(CliError::Input(format!("level {n} must be odd")));
        }
    }
    let r = theta_matrix::scan_max_rank(a.max_index, a.levels.as_deref(), a.include_even);
    let summary = format!(
        "{} cells, {} matrices, {} passes, {} CRT checks, {} failures",
        r.cells,
        r.matrices,
        r.passes,
        r.crt_checks,
        r.failures.len()
    );
    let mut out = Outcome::new(pass_if(r.passed()), to_value(&r), summary);
    if let Format::Csv = a.format {
        let mut csv = String::from("m1,m2,l,nu0,kind,rows,rank\n");
        for f in &r.failures {
            csv.push_str(&format!("{},{},{},{},{},{},{}\n", f.m1, f.m2, f.l, f.nu0, f.kind, f.rows, f.rank));
        }
        out.raw = Some(csv);
    }
    Ok(out)
}

fn jacobi_construct(a: &ConstructArgs) -> Result<Outcome, CliError> {
    let phi = match a.form {
        FormName::Phi10_1 => jacobi::construct_phi_10_1(a.prec)?,
    };
    let summary = format!("phi10_1 with {} nonzero coefficients up to D ≤ {}", phi.entries().len(), a.prec);
    Ok(Outcome::new(Status::Pass, to_value(&phi), summary))
}

fn jacobi_vell(a: &VellArgs) -> Result<Outcome, CliError> {
    let phi = read_jacobi(&a.input)?;
    let v = jacobi::v_ell(&phi, a.ell)?;
    let summary = format!("index {} → {}, {} nonzero coefficients", phi.index, v.index, v.entries().len());
    Ok(Outcome::new(Status::Pass, to_value(&v), summary))
}

fn jacobi_decompose(a: &InputArgs) -> Result<Outcome, CliError> {
    let phi = read_jacobi(&a.input)?;
    let h = jacobi::theta_decompose(&phi)?;
    let back = jacobi::theta_recombine(&h, phi.bound())?;
    let round_trip = back == phi;
    let summary = format!("{} components, round trip {}", h.components.len(), if round_trip { "exact" } else { "FAILED" });
    let payload = json!({ "components": h, "round_trip": round_trip });
    Ok(Outcome::new(pass_if(round_trip), payload, summary))
}

fn jacobi_check(a: &CheckArgs) -> Result<Outcome, CliError> {
    let phi = read_jacobi(&a.input)?;
    let split = match a.split.as_deref() {
        None => None,
        Some(&[m1, m2]) => Some((m1, m2)),
        Some(_) => return Err(CliError::Input("--split expects m1,m2".into())),
    };
    if let Some((m1, m2)) = split {
        if m1 * m2 != phi.index {
            return Err(CliError::Input(format!("split {m1}·{m2} does not equal the index {}", phi.index)));
        }
    }
    let r = jacobi::check_primitive_nonvanishing(&phi, split)?;
    let summary = format!("nonzero components {:?}, primitive {:?}", r.nonzero, r.primitive);
    Ok(Outcome::new(pass_if(r.consistent), to_value(&r), summary))
}

fn jacobi_transform(a: &TransformArgs) -> Result<Outcome, CliError> {
    let tau = parse_complex(&a.tau)?;
    let z = parse_complex(&a.z)?;
    if tau.im <= 0.0 {
        return Err(CliError::Input("τ must lie in the upper half plane".into()));
    }
    if (tau * a.n as f64 + 1.0).norm() == 0.0 {
        return Err(CliError::Input("cτ + 1 vanishes".into()));
    }
    let tail_tol = (a.tol * 1e-2).min(1e-8);
    let mut ok = true;
    let mut theta = Vec::new();
    for &m in &a.index {
        if m == 0 {
            return Err(CliError::Input("index must be positive".into()));
        }
        let r = jacobi::verify_theta_transform(m, a.n, tau, z, tail_tol);
        ok &= r.max_residual < a.tol && r.max_tail < tail_tol;
        theta.push(r);
    }
    let mut payload = json!({ "theta": theta });
    let mut summary = format!(
        "theta residual {:.3e}",
        theta.iter().map(|r| r.max_residual).fold(0.0, f64::max)
    );
    if let Some(path) = &a.input {
        let phi = read_jacobi(path)?;
        let h = jacobi::theta_decompose(&phi)?;
        let r = jacobi::verify_component_transform(&h, -a.n, tau)?;
        ok &= r.max_residual < a.tol && r.max_tail < tail_tol;
        summary.push_str(&format!(", component residual {:.3e} (tail {:.1e})", r.max_residual, r.max_tail));
        payload["components"] = to_value(&r);
    }
    Ok(Outcome::new(pass_if(ok), payload, summary))
}

fn halfint_sieve(a: &SieveArgs) -> Result<Outcome, CliError> {
    let mut j: HalfIntJson = serde_json::from_str(&read_input(&a.input)?)
        .map_err(|e| CliError::Input(format!("malformed form: {e}")))?;
    if let Some(l) = a.l {
        if l != j.l {
            return Err(CliError::Input(format!("--L {l} disagrees with L = {} in the input", j.l)));
        }
        j.l = l;
    }
    let f = HalfIntForm::from_json(&j, a.bound)?;
    let r = halfint::run_sieve(&f, j.l, a.lf)?;
    let failures = halfint::check_postconditions(&f, j.l, a.lf, &r)?;
    let status = if !failures.is_empty() {
        Status::Fail
    } else if r.trace.up_to_bound {
        Status::Warn
    } else {
        Status::Pass
    };
    let summary = format!(
        "exponents {:?}, level {}{}",
        r.exponents,
        r.g.level_value(),
        if r.trace.up_to_bound { " (zero verdicts only up to the bound)" } else { "" }
    );
    let mut payload = to_value(&r);
    payload["postcondition_failures"] = to_value(&failures);
    Ok(Outcome::new(status, payload, summary))
}

fn witness(a: &WitnessArgs) -> Result<Outcome, CliError> {
    let t = jacobi::build_witness(a.p, a.mu, a.d)?;
    let ok = t.verifies();
    let summary = format!("T = {:?}, 4·det T = {}", t.entries_f64(), t.four_det());
    Ok(Outcome::new(pass_if(ok), to_value(&t), summary))
}

fn dispatch(cmd: &Command) -> (String, Value, Result<Outcome, CliError>) {
    match cmd {
        Command::Gauss(GaussCmd::Eval(a)) => ("gauss eval".into(), to_value(a), gauss_eval(a)),
        Command::Gauss(GaussCmd::Verify(a)) => ("gauss verify".into(), to_value(a), gauss_verify(a)),
        Command::Epsilon(EpsilonCmd::Matrix(a)) => ("epsilon matrix".into(), to_value(a), epsilon_matrix(a)),
        Command::SquareClasses(a) => ("square-classes".into(), to_value(a), square_classes(a)),
        Command::Rank(RankCmd::Scan(a)) => ("rank scan".into(), to_value(a), rank_scan(a)),
        Command::Jacobi(JacobiCmd::Construct(a)) => ("jacobi construct".into(), to_value(a), jacobi_construct(a)),
        Command::Jacobi(JacobiCmd::Vell(a)) => ("jacobi vell".into(), to_value(a), jacobi_vell(a)),
        Command::Jacobi(JacobiCmd::Decompose(a)) => ("jacobi decompose".into(), to_value(a), jacobi_decompose(a)),
        Command::Jacobi(JacobiCmd::Check(a)) => ("jacobi check".into(), to_value(a), jacobi_check(a)),
        Command::Jacobi(JacobiCmd::TransformCheck(a)) => {
            ("jacobi transform-check".into(), to_value(a), jacobi_transform(a))
        }
        Command::Halfint(HalfintCmd::Sieve(a)) => ("halfint sieve".into(), to_value(a), halfint_sieve(a)),
        Command::Witness(a) => ("witness".into(), to_value(a), witness(a)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let start = Instant::now();
    let (command, parameters, result) = dispatch(&cli.command);
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {command}: {e}");
            return ExitCode::from(2);
        }
    };
    let elapsed = (!cli.no_timing).then(|| start.elapsed().as_secs_f64());
    match &outcome.raw {
        Some(raw) => print!("{raw}"),
        None => {
            let envelope = ReportEnvelope {
                command: command.clone(),
                parameters: sorted(parameters),
                status: outcome.status,
                payload: outcome.payload,
                elapsed,
                tool_version: env!("CARGO_PKG_VERSION"),
            };
            println!("{}", serde_json::to_string_pretty(&envelope).expect("report serializes"));
        }
    }
    let label = match outcome.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Warn => "WARN",
    };
    eprintln!("{label} {command}: {}", outcome.summary);
    match outcome.status {
        Status::Fail => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}

/// Parameters as a key-sorted map.
fn sorted(v: Value) -> Value {
    match v {
        Value::Object(map) => to_value(&map.into_iter().collect::<BTreeMap<_, _>>()),
        other => other,
    }
}
