//! `ultraweyl`: run verification suites, compute single objects, scan θ.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ultraweyl::deform::{deform_sc, twist_phase};
use ultraweyl::fourier::{fourier, symplectic_g, Direction};
use ultraweyl::padic::check_prime;
use ultraweyl::scalars::{parse_q, CoeffJson};
use ultraweyl::twisted::{g_theta, twisted_conv};
use ultraweyl::weyl::{basis_for_symbol, moyal_star, moyal_via_operators, quantize, wigner};
use ultraweyl::{
    Backend, CellBasis, Mat, Resolution, SBFunction, Scalar, SpectralAlgebra, SuiteParams, Theta,
    Tolerances,
};

#[derive(Parser)]
#[command(
    name = "ultraweyl",
    version,
    about = "Exact p-adic Weyl calculus and C*-deformation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run property suites and emit a JSON report.
    Verify(VerifyArgs),
    /// Compute a single object from JSON inputs.
    #[command(subcommand)]
    Compute(Compute),
    /// Deformed norms of an algebra's basis across θ = γ·(p^v·u)².
    ScanTheta(ScanArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Float,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// `t,u` for θ = p^t·u, or `0`.
    #[arg(long, default_value = "0,1")]
    theta: String,
    /// Largest resolution `r,s` of random inputs.
    #[arg(long, default_value = "1,1")]
    res: String,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "all", value_parser = ["fourier", "weyl", "moyal", "deform", "twisted", "all"])]
    suite: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override every per-criterion sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Largest operator dimension built per sample; larger samples are not run.
    #[arg(long, default_value_t = 81)]
    max_dim: usize,
    /// Include per-check wall times (the report is then not reproducible).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    tol_norm: Option<f64>,
    #[arg(long)]
    tol_transform: Option<f64>,
    #[arg(long)]
    tol_oracle: Option<f64>,
    #[arg(long)]
    module_gap: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    Fourier,
    Inverse,
    Symplectic,
    GTheta,
}

#[derive(Subcommand)]
enum Compute {
    /// Fourier, inverse Fourier, symplectic G, or G_θ of a function.
    Transform {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TransformKind::Symplectic)]
        kind: TransformKind,
        /// Required for `g-theta`.
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moyal product f ⋆_θ g (θ = 0 gives the pointwise product).
    Star {
        f: PathBuf,
        g: PathBuf,
        #[arg(long)]
        theta: String,
        /// Compute as symbol(Ω(f)Ω(g)) instead of the direct sum.
        #[arg(long)]
        via_operators: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ω_θ(F) on a cell basis.
    Quantize {
        input: PathBuf,
        #[arg(long)]
        theta: String,
        /// Basis resolution `R,S`; the minimal adequate basis when omitted.
        #[arg(long)]
        res: Option<String>,
        /// Emit row-major CSV of float values instead of JSON.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wigner function W_{X,Y} of two coherent states.
    Wigner {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long)]
        theta: String,
        /// Phase-space point as comma-separated rationals, e.g. `0,1/3`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deformed spectral algebra with the norms of its basis elements.
    Deform {
        algebra: PathBuf,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Twisted convolution f1 ∗_θ f2.
    TwistedConv {
        f: PathBuf,
        g: PathBuf,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct ScanArgs {
    algebra: PathBuf,
    /// γ as `t,u` or `0`.
    #[arg(long, default_value = "0,1")]
    gamma: String,
    /// Largest valuation v of the sampled square root.
    #[arg(long, default_value_t = 4)]
    max_val: u32,
    /// Units u sampled at each valuation.
    #[arg(
        long,
        default_value = "1",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    units: Vec<i64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Bad flags exit with 2, failed checks or computations with 1.
enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<ultraweyl::Error> for Failure {
    fn from(e: ultraweyl::Error) -> Self {
        Failure::Run(e.into())
    }
}

type Outcome = Result<bool, Failure>;

fn usage<T>(r: ultraweyl::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(e.to_string()))
}

fn parse_res(s: &str) -> Result<Resolution, Failure> {
    let bad = || Failure::Usage(format!("expected resolution `r,s`, got `{s}`"));
    let (r, t) = s.split_once(',').ok_or_else(bad)?;
    let r: i32 = r.trim().parse().map_err(|_| bad())?;
    let t: i32 = t.trim().parse().map_err(|_| bad())?;
    usage(Resolution::new(r, t))
}

fn parse_theta(p: u64, s: &str) -> Result<Theta, Failure> {
    usage(Theta::parse(p, s))
}

fn parse_point(s: &str) -> Result<Vec<ultraweyl::Q>, Failure> {
    usage(s.split(',').map(parse_q).collect())
}

const SB_FUNCTION_SCHEMA: &str = include_str!("../../../schemas/v1/sb_function.schema.json");
const SPECTRAL_ALGEBRA_SCHEMA: &str =
    include_str!("../../../schemas/v1/spectral_algebra.schema.json");

/// Reads a JSON input and checks it against one of the shipped schemas.
fn read_json(path: &Path, schema: &str) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let schema: Value = serde_json::from_str(schema).expect("shipped schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("shipped schema compiles");
    if let Some(err) = validator.iter_errors(&v).next() {
        return Err(anyhow!(
            "{}: schema violation at `{}`: {err}",
            path.display(),
            err.instance_path()
        ));
    }
    Ok(v)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, v: &Value) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    emit(out, &s)
}

fn is_matrix_valued(v: &Value) -> bool {
    v.get("algebra_dim").is_some_and(|x| !x.is_null())
}

fn load<C: CoeffJson>(v: &Value) -> anyhow::Result<SBFunction<C>> {
    SBFunction::<C>::from_json(v)
        .map_err(|e| anyhow!("input does not match the function schema: {e}"))
}

fn verify(a: VerifyArgs) -> Outcome {
    usage(check_prime(a.p))?;
    if a.d == 0 {
        return Err(Failure::Usage("--d must be at least 1".into()));
    }
    let defaults = Tolerances::default();
    let ps = SuiteParams {
        p: a.p,
        d: a.d,
        theta: parse_theta(a.p, &a.theta)?,
        res: parse_res(&a.res)?,
        backend: match a.backend {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Float => Backend::Float,
        },
        seed: a.seed,
        tol: Tolerances {
            norm: a.tol_norm.unwrap_or(defaults.norm),
            transform: a.tol_transform.unwrap_or(defaults.transform),
            oracle_rel: a.tol_oracle.unwrap_or(defaults.oracle_rel),
            module_gap: a.module_gap.unwrap_or(defaults.module_gap),
        },
        samples: a.samples,
        max_dim: a.max_dim,
    };
    let report = ultraweyl::suites::run_suite(&a.suite, &ps)?;
    emit(a.out.as_deref(), &report.render(a.timings))?;
    let s = report.summary();
    eprintln!(
        "{}: {} pass, {} fail, {} skipped",
        a.suite, s.pass, s.fail, s.skipped
    );
    Ok(report.ok())
}

fn transform<C: CoeffJson>(
    v: &Value,
    kind: TransformKind,
    theta: Option<&str>,
) -> Result<Value, Failure> {
    let f = load::<C>(v)?;
    let g = match kind {
        TransformKind::Fourier => fourier(&f, Direction::Forward),
        TransformKind::Inverse => fourier(&f, Direction::Inverse),
        TransformKind::Symplectic => symplectic_g(&f)?,
        TransformKind::GTheta => {
            let th = theta.ok_or_else(|| Failure::Usage("--kind g-theta needs --theta".into()))?;
            g_theta(&f, &parse_theta(f.p, th)?)?
        }
    };
    Ok(g.to_json())
}

fn star<C: CoeffJson>(fv: &Value, gv: &Value, theta: &str, via: bool) -> Result<Value, Failure> {
    let (f, g) = (load::<C>(fv)?, load::<C>(gv)?);
    let th = parse_theta(f.p, theta)?;
    let h = if via {
        moyal_via_operators(&f, &g, &th)?
    } else {
        moyal_star(&f, &g, &th)?
    };
    Ok(h.to_json())
}

fn quantize_json<C: CoeffJson>(
    v: &Value,
    theta: &str,
    res: Option<&str>,
    csv: bool,
) -> Result<String, Failure> {
    let f = load::<C>(v)?;
    if f.n % 2 != 0 {
        return Err(Failure::Run(anyhow!(
            "symbols live on an even-dimensional phase space, got n = {}",
            f.n
        )));
    }
    let d = f.n / 2;
    let th = parse_theta(f.p, theta)?;
    let basis = match res {
        Some(r) => {
            let r = parse_res(r)?;
            CellBasis::new(f.p, d, r.r, r.s)?
        }
        None => basis_for_symbol(f.p, d, &th, f.res)?,
    };
    let op = quantize(&f, &th, &basis).map_err(|e| anyhow!("θ = {th}: {e}"))?;
    if csv {
        return Ok(op.to_csv());
    }
    let mut s = serde_json::to_string_pretty(&op.to_json()).map_err(anyhow::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn compute(c: Compute) -> Outcome {
    match c {
        Compute::Transform {
            input,
            kind,
            theta,
            out,
        } => {
            let v = read_json(&input, SB_FUNCTION_SCHEMA)?;
            let r = if is_matrix_valued(&v) {
                transform::<Mat>(&v, kind, theta.as_deref())?
            } else {
                transform::<Scalar>(&v, kind, theta.as_deref())?
            };
            emit_json(out.as_deref(), &r)?;
        }
        Compute::Star {
            f,
            g,
            theta,
            via_operators,
            out,
        } => {
            let (fv, gv) = (
                read_json(&f, SB_FUNCTION_SCHEMA)?,
                read_json(&g, SB_FUNCTION_SCHEMA)?,
            );
            let r = if is_matrix_valued(&fv) {
                star::<Mat>(&fv, &gv, &theta, via_operators)?
            } else {
                star::<Scalar>(&fv, &gv, &theta, via_operators)?
            };
            emit_json(out.as_deref(), &r)?;
        }
        Compute::Quantize {
            input,
            theta,
            res,
            csv,
            out,
        } => {
            let v = read_json(&input, SB_FUNCTION_SCHEMA)?;
            let text = if is_matrix_valued(&v) {
                quantize_json::<Mat>(&v, &theta, res.as_deref(), csv)?
            } else {
                quantize_json::<Scalar>(&v, &theta, res.as_deref(), csv)?
            };
            emit(out.as_deref(), &text)?;
        }
        Compute::Wigner {
            p,
            theta,
            x,
            y,
            out,
        } => {
            usage(check_prime(p))?;
            let th = parse_theta(p, &theta)?;
            let (x, y) = (parse_point(&x)?, parse_point(&y)?);
            emit_json(out.as_deref(), &wigner(p, &th, &x, &y)?.to_json())?;
        }
        Compute::Deform {
            algebra,
            theta,
            out,
        } => {
            let alg = SpectralAlgebra::from_json(&read_json(&algebra, SPECTRAL_ALGEBRA_SCHEMA)?)?;
            let th = parse_theta(alg.p, &theta)?;
            emit_json(out.as_deref(), &deform_sc(&alg, &th)?.to_json()?)?;
        }
        Compute::TwistedConv { f, g, theta, out } => {
            let f = load::<Scalar>(&read_json(&f, SB_FUNCTION_SCHEMA)?)?;
            let g = load::<Scalar>(&read_json(&g, SB_FUNCTION_SCHEMA)?)?;
            let th = parse_theta(f.p, &theta)?;
            emit_json(out.as_deref(), &twisted_conv(&f, &g, &th)?.to_json())?;
        }
    }
    Ok(true)
}

fn scan(a: ScanArgs) -> Outcome {
    let alg = SpectralAlgebra::from_json(&read_json(&a.algebra, SPECTRAL_ALGEBRA_SCHEMA)?)?;
    let p = alg.p;
    let gamma = parse_theta(p, &a.gamma)?;
    let mut thetas = Vec::new();
    for v in 0..=a.max_val {
        for &u in &a.units {
            thetas.push(match gamma {
                Theta::Zero => Theta::Zero,
                Theta::Unit { t, u: g } => usage(Theta::new(p, t + 2 * v, g * u * u))?,
            });
        }
    }
    thetas.dedup();
    // Σ_j a_j: basis elements keep their norms under any twist, their sum does not
    let sum = vec![Scalar::one(); alg.dim()];
    let rows = ultraweyl::deform::theta_scan(&alg, &thetas, &[sum])?;
    let mut labels = alg.labels.clone();
    labels.push("sum".into());
    // the twist is trivial once every phase Ψ(2θ[P_j,P_k]) of a structure constant is 1
    let trivial = |th: &Theta| {
        alg.constants
            .iter()
            .all(|(j, k, _, _)| twist_phase(p, th, &alg.weights[*j], &alg.weights[*k]).is_one())
    };
    match a.format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(th, norms)| json!({"theta": th.to_string(), "trivial_twist": trivial(th), "norms": norms}))
                .collect();
            emit_json(
                a.out.as_deref(),
                &json!({"columns": labels, "gamma": gamma.to_string(), "rows": rows}),
            )?;
        }
        Format::Table => {
            let mut s = format!("theta\ttrivial\t{}\n", labels.join("\t"));
            for (th, norms) in &rows {
                let cells: Vec<String> = norms.iter().map(|n| format!("{n:.12}")).collect();
                s.push_str(&format!(
                    "{th}\t{}\t{}\n",
                    if trivial(th) { "yes" } else { "no" },
                    cells.join("\t")
                ));
            }
            emit(a.out.as_deref(), &s)?;
        }
    }
    Ok(true)
}

fn init_threads() {
    if let Some(n) = std::env::var("ULTRAWEYL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let outcome = match cli.cmd {
        Cmd::Verify(a) => verify(a),
        Cmd::Compute(c) => compute(c),
        Cmd::ScanTheta(a) => scan(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
