use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use shearflow::density::DEFAULT_DEPTH;
use shearflow::dynamics::{
    designated_grid, isotopy_convergence, sample_ball, CommutatorScheme, SeqSummary, Splitting,
};
use shearflow::sample::DEFAULT_SEED;
use shearflow::*;

mod input;

#[derive(Parser)]
#[command(name = "shearflow", version, about = "Certificates and flows for polynomial vector fields")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the main artifact here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one of the bracket identities exactly.
    VerifyIdentity(IdentityArgs),
    /// Compatibility verdict for a pair of locally nilpotent fields.
    Compat(CompatArgs),
    /// Bounded Lie closure of a set of generators with target membership.
    Closure(ClosureArgs),
    /// Module certificate for a subvariety of codimension at least two.
    Codim2(Codim2Args),
    /// Tangency and witness checks for the row-shear pair on SL_n.
    SlDemo(SlDemoArgs),
    /// Split a field into completely integrable pieces.
    Decompose(DecomposeArgs),
    /// Approximate a flow by compositions of exact flows.
    Approx(ApproxArgs),
    /// Sample the basin of attraction of a polynomial automorphism.
    Basin(BasinArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum IdentityName {
    CorAl,
    Compat,
    Codim2,
    Local,
}

#[derive(Args)]
struct IdentityArgs {
    identity: IdentityName,
    /// JSON object with operands by name; flags override it.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(short, long)]
    n: Option<usize>,
    #[arg(long)]
    f1: Option<String>,
    #[arg(long)]
    f2: Option<String>,
    #[arg(long)]
    h1: Option<String>,
    #[arg(long)]
    h2: Option<String>,
    #[arg(long)]
    d1: Option<String>,
    #[arg(long)]
    d2: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Operands {
    n: Option<usize>,
    f1: Option<String>,
    f2: Option<String>,
    h1: Option<String>,
    h2: Option<String>,
    d1: Option<String>,
    d2: Option<String>,
    a: Option<String>,
    r: Option<String>,
    h: Option<String>,
    s: Option<u32>,
    f: Option<String>,
    g: Option<String>,
}

#[derive(Args)]
struct CompatArgs {
    #[arg(long)]
    d1: String,
    #[arg(long)]
    d2: String,
    /// Degree bound.
    #[arg(short = 'd', long = "degree", value_parser = clap::value_parser!(u32).range(1..))]
    degree: u32,
    /// Candidate generator of the ideal in condition (i); repeatable.
    #[arg(long = "candidate")]
    candidates: Vec<String>,
}

#[derive(Args)]
struct ClosureArgs {
    /// File with one generator field per line.
    #[arg(long, required_unless_present = "shear_family")]
    generators: Option<PathBuf>,
    /// Use the shear family {f∂ᵢ, xᵢf∂ᵢ} on ℂⁿ of degree ≤ D instead.
    #[arg(long, value_name = "N", conflicts_with = "generators")]
    shear_family: Option<usize>,
    /// File with one target field per line; defaults to all monomial fields of degree ≤ D.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Coefficient degree cap.
    #[arg(short = 'D', long = "degree")]
    degree: u32,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
}

#[derive(Args)]
struct Codim2Args {
    /// JSON file `{"nvars": n, "generators": ["x1", ...]}`.
    #[arg(long)]
    ideal: PathBuf,
    /// Elimination and target degree.
    #[arg(short = 'd', long = "degree", value_parser = clap::value_parser!(u32).range(1..))]
    degree: u32,
    /// Coefficient degree cap for the closure; defaults to d.
    #[arg(short = 'D', long = "cap")]
    cap: Option<u32>,
}

#[derive(Args)]
struct SlDemoArgs {
    #[arg(short, long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
}

#[derive(Args)]
struct DecomposeArgs {
    field: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplittingArg {
    Lie,
    Strang,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Plain,
    Symmetric,
}

#[derive(Args)]
struct ApproxArgs {
    /// Autonomous field.
    #[arg(long, required_unless_present = "isotopy")]
    field: Option<String>,
    /// File whose k-th field line is the coefficient of tᵏ.
    #[arg(long, conflicts_with = "field")]
    isotopy: Option<PathBuf>,
    #[arg(short = 'T', long = "time", default_value_t = 0.5, value_parser = input::parse_positive_f64)]
    time: f64,
    /// Time slices on which the field is frozen.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    /// Splitting steps per slice, comma separated.
    #[arg(long, default_value = "8,16,32,64", value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    substeps: Vec<u64>,
    #[arg(long, default_value_t = 25)]
    points: usize,
    #[arg(long, default_value_t = 0.5, value_parser = input::parse_positive_f64)]
    radius: f64,
    #[arg(long, value_enum, default_value = "lie")]
    splitting: SplittingArg,
    #[arg(long, value_enum, default_value = "symmetric")]
    scheme: SchemeArg,
}

#[derive(Args)]
struct BasinArgs {
    /// JSON composition of elementary maps; defaults to the built-in attracting map.
    #[arg(long)]
    map: Option<PathBuf>,
    /// JSON grid specification; defaults to 200×200 over [−2, 2]² in the first two coordinates.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Fixed point, comma separated; defaults to the origin.
    #[arg(long, value_parser = input::point)]
    fixed: Option<input::Point>,
    /// Also write a PGM image here.
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[arg(long, default_value_t = BasinParams::default().max_iter)]
    max_iter: usize,
}

struct Outcome {
    artifact: Vec<u8>,
    ok: bool,
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn verdict_line(holds: bool) -> &'static str {
    if holds {
        "established"
    } else {
        "refuted"
    }
}

fn identity(args: IdentityArgs) -> Result<Outcome> {
    let file: Operands = match &args.file {
        Some(p) => input::json_file(p)?,
        None => Operands::default(),
    };
    macro_rules! pick {
        ($name:ident) => {
            args.$name.clone().or(file.$name.clone())
        };
    }
    let need = |name: &str, v: Option<String>| v.with_context(|| format!("missing operand --{name}"));
    let text = match args.identity {
        IdentityName::CorAl | IdentityName::Codim2 | IdentityName::Local => {
            let n = args.n.or(file.n).context("missing operand -n")?;
            let p = |name: &str, v: Option<String>| -> Result<ExactPoly> { input::poly_arg(name, &need(name, v)?, n) };
            match args.identity {
                IdentityName::CorAl => {
                    let c = verify_shear_identity(&p("f1", pick!(f1))?, &p("f2", pick!(f2))?)?;
                    format!("{}\n", verdict_line(c.holds))
                }
                IdentityName::Codim2 => {
                    let c = verify_codim2_identity(
                        &p("f1", pick!(f1))?,
                        &p("h1", pick!(h1))?,
                        &p("f2", pick!(f2))?,
                        &p("h2", pick!(h2))?,
                    )?;
                    format!("{}\n", verdict_line(c.holds))
                }
                _ => {
                    let s = args.s.or(file.s).context("missing operand --s")?;
                    let r = verify_local_identities(
                        &p("r", pick!(r))?,
                        &p("h", pick!(h))?,
                        s,
                        &p("f", pick!(f))?,
                        &p("g", pick!(g))?,
                    )?;
                    let mut out = String::new();
                    for c in &r.checks {
                        out.push_str(&format!("{}: {}\n", c.name, verdict_line(c.check.holds)));
                    }
                    out.push_str(&format!("{}\n", verdict_line(r.all_hold())));
                    out
                }
            }
        }
        IdentityName::Compat => {
            let d1 = input::field_arg("d1", &need("d1", pick!(d1))?)?;
            let d2 = input::field_arg("d2", &need("d2", pick!(d2))?)?;
            let n = d1.nvars();
            let p = |name: &str, v: Option<String>| -> Result<ExactPoly> { input::poly_arg(name, &need(name, v)?, n) };
            let c = verify_compat_identity(&d1, &d2, &p("a", pick!(a))?, &p("f1", pick!(f1))?, &p("f2", pick!(f2))?)?;
            format!("{}\n", verdict_line(c.holds))
        }
    };
    let ok = text.trim_end().ends_with("established");
    Ok(Outcome { artifact: text.into_bytes(), ok })
}

fn compat(args: CompatArgs) -> Result<Outcome> {
    let d1 = input::field_arg("d1", &args.d1)?;
    let d2 = input::field_arg("d2", &args.d2)?;
    let candidates = args
        .candidates
        .iter()
        .map(|c| input::poly_arg("candidate", c, d1.nvars()))
        .collect::<Result<Vec<_>>>()?;
    let v = check_compatibility(&d1, &d2, args.degree, &candidates)?;
    Ok(Outcome { artifact: json(&v)?, ok: v.established() })
}

fn closure(args: ClosureArgs) -> Result<Outcome> {
    let generators = match (&args.generators, args.shear_family) {
        (Some(p), _) => input::field_file(p)?,
        (None, Some(n)) if n >= 1 => shear_family(n, args.degree),
        _ => bail!("--shear-family needs a positive dimension"),
    };
    let n = generators[0].nvars();
    let targets = match &args.targets {
        Some(p) => input::field_file(p)?,
        None => monomial_fields(n, args.degree),
    };
    let cert = lie_closure(&generators, args.degree, args.depth, &targets)?;
    cert.replay().map_err(|e| anyhow::anyhow!("certificate failed replay: {e}"))?;
    Ok(Outcome { artifact: json(&cert)?, ok: cert.all_targets_contained() })
}

fn codim2(args: Codim2Args) -> Result<Outcome> {
    let ideal: SubvarietyInput = input::json_file(&args.ideal)?;
    let cert = codim2_module_certificate(&ideal, args.degree, args.cap.unwrap_or(args.degree))?;
    cert.replay().map_err(|e| anyhow::anyhow!("certificate failed replay: {e}"))?;
    Ok(Outcome { artifact: json(&cert)?, ok: cert.all_targets_established() })
}

fn sl(args: SlDemoArgs, seed: u64) -> Result<Outcome> {
    let r = sl_demo(args.n as usize, args.trials as usize, seed)?;
    Ok(Outcome { artifact: json(&r)?, ok: r.holds() })
}

fn decompose(args: DecomposeArgs) -> Result<Outcome> {
    let v = input::field_arg("field", &args.field)?;
    let prims = decompose_field(&v)?;
    let mut out = String::new();
    for (k, p) in prims.iter().enumerate() {
        out.push_str(&format!("{}: {p}\n", k + 1));
    }
    let ok = dynamics::recompose(&prims, v.nvars()) == v;
    out.push_str(&format!("sum of targets equals input: {ok}\n"));
    Ok(Outcome { artifact: out.into_bytes(), ok })
}

#[derive(Serialize)]
struct ApproxOutput {
    schema_version: u32,
    time: f64,
    steps: u64,
    seed: u64,
    sample_points: usize,
    sample_radius: f64,
    primitives: Vec<String>,
    finest: SeqSummary,
    report: ConvergenceReport,
}

fn approx(args: ApproxArgs, seed: u64) -> Result<Outcome> {
    let vt = match (&args.field, &args.isotopy) {
        (Some(f), _) => TimeDependentField::autonomous(input::field_arg("field", f)?),
        (None, Some(p)) => TimeDependentField { terms: input::field_file(p)? },
        _ => unreachable!("clap enforces one of --field, --isotopy"),
    };
    let opts = StepOptions {
        splitting: match args.splitting {
            SplittingArg::Lie => Splitting::Lie,
            SplittingArg::Strang => Splitting::Strang,
        },
        commutator: match args.scheme {
            SchemeArg::Plain => CommutatorScheme::Plain,
            SchemeArg::Symmetric => CommutatorScheme::Symmetric,
        },
    };
    let substeps: Vec<usize> = args.substeps.iter().map(|&m| m as usize).collect();
    if substeps.len() < 3 {
        bail!("--substeps needs at least three values for a slope fit");
    }
    let points = sample_ball(vt.nvars(), args.points.max(1), args.radius, seed);
    let report = isotopy_convergence(&vt, args.time, args.steps as usize, &substeps, &points, opts)?;
    let finest = *substeps.iter().max().expect("nonempty");
    let fin = dynamics::approximate_isotopy(&vt, args.time, args.steps as usize, finest, &points[..1], opts)?;
    let mid = GaussRat::from_f64_exact(args.time / (2 * args.steps) as f64, 0.0).context("time is not representable")?;
    let primitives = decompose_field(&vt.at(&mid))?.iter().map(ToString::to_string).collect();
    let ok = report.monotone;
    let out = ApproxOutput {
        schema_version: dynamics::SCHEMA_VERSION,
        time: args.time,
        steps: args.steps,
        seed,
        sample_points: points.len(),
        sample_radius: args.radius,
        primitives,
        finest: fin.seq.summary(),
        report,
    };
    Ok(Outcome { artifact: json(&out)?, ok })
}

fn basin(args: BasinArgs) -> Result<Outcome> {
    let map: AutoSeq = match &args.map {
        Some(p) => input::json_file(p)?,
        None => designated_map(),
    };
    let grid: GridSpec = match &args.grid {
        Some(p) => input::json_file(p)?,
        None if map.nvars() == 2 => designated_grid(),
        None if map.nvars() > 2 => GridSpec::real_plane(map.nvars(), 2.0, 200, 200),
        None => bail!("--grid is required for maps of one variable"),
    };
    let fixed = args.fixed.clone().map(|p| p.0).unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); map.nvars()]);
    let params = BasinParams { max_iter: args.max_iter, ..BasinParams::default() };
    let report = basin_sample(&map, &fixed, &grid, &params)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(p) = &args.pgm {
        fs::write(p, report.to_pgm()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let ok = report.warnings.is_empty() && report.count(PointClass::Attracted) > 0;
    Ok(Outcome { artifact: report.to_csv().into_bytes(), ok })
}

fn run(cli: Cli) -> Result<bool> {
    let outcome = match cli.command {
        Command::VerifyIdentity(a) => identity(a)?,
        Command::Compat(a) => compat(a)?,
        Command::Closure(a) => closure(a)?,
        Command::Codim2(a) => codim2(a)?,
        Command::SlDemo(a) => sl(a, cli.seed)?,
        Command::Decompose(a) => decompose(a)?,
        Command::Approx(a) => approx(a, cli.seed)?,
        Command::Basin(a) => basin(a)?,
    };
    match &cli.output {
        Some(p) => fs::write(p, &outcome.artifact).with_context(|| format!("cannot write {}", p.display()))?,
        None => std::io::stdout().lock().write_all(&outcome.artifact)?,
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
