use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mobius_incidence::applications::{
    beck_statistics, corollary4_report, expander_rational, expander_shift_invert,
    projective_equivalence_count, representation_counts, ExpanderReport,
};
use mobius_incidence::energy::{
    energy, energy_brute, energy_m_report, family_to_transforms, DEFAULT_ORACLE_CAP,
};
use mobius_incidence::harness::instances::{random_points, rng_from_seed};
use mobius_incidence::harness::{
    check_regression, format_baseline, max_ratios, parse_baseline, write_rows, BoundId,
    BoundParams, BoundSpec, OutputFormat, SweepConfig,
};
use mobius_incidence::incidence::{count_incidences, rich_transforms_brute, richness, BruteMode};
use mobius_incidence::io as sets;
use mobius_incidence::pivot::{
    rich_members_via_pivots, rich_transforms_via_pivots, verify_reduction, verify_reduction_at,
    ReductionReport,
};
use mobius_incidence::{Error, PrimeField, TransformSet};

#[derive(Parser, Debug)]
#[command(
    name = "mobius",
    version,
    about = "Incidences of Moebius transformations over F_p"
)]
struct Cli {
    /// Prime modulus.
    #[arg(short = 'p', long = "prime", global = true)]
    prime: Option<u64>,

    /// Seed for sampled inputs; overrides the sweep config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Row format for `energy` and `sweep`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    format: Format,

    /// Emit report rows as JSON instead of `key: value` text.
    #[arg(long, global = true)]
    json: bool,

    /// Treat violated hypotheses as errors.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Jsonl => OutputFormat::Jsonl,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Pivot,
    Brute,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Oracle {
    /// Scan all of PGL(2, p).
    Group,
    /// Interpolate through triples of points.
    Triples,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExpanderKind {
    ShiftInvert,
    Rational,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count incidences I(P, T).
    Incidence {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        transforms: PathBuf,
    },
    /// Enumerate the k-rich transformations of a point set.
    RichEnum(RichEnumArgs),
    /// Energy of a transformation set or hyperbola family.
    Energy(EnergyArgs),
    /// Multiplicative representation counts of A·B.
    Repr {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Print the full table λ r(λ) instead of the balanced report.
        #[arg(long)]
        table: bool,
    },
    /// Richness statistics of the transformations defined by a point set.
    Beck {
        #[arg(long)]
        points: PathBuf,
        #[arg(short = 'c', long = "constant", default_value_t = 1.0)]
        constant: f64,
    },
    /// Size of an expander image.
    Expander {
        #[arg(value_enum)]
        kind: ExpanderKind,
        #[arg(long)]
        a: PathBuf,
        /// Growth exponent for the reported ratio (default 6/5 or 4/3).
        #[arg(long)]
        exponent: Option<f64>,
    },
    /// Count subsets of A projectively equivalent to S.
    EquivCount {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        s: PathBuf,
    },
    /// Check the pivot reduction against direct incidence.
    VerifyReduction {
        /// Use every pivot of F_p² instead of a seeded sample.
        #[arg(long)]
        exhaustive: bool,
        /// Sample size when not exhaustive.
        #[arg(long, default_value_t = 16)]
        pivots: usize,
    },
    /// Run a bound sweep from a config file.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct RichEnumArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(short = 'k', default_value_t = 3)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Method::Pivot)]
    method: Method,
    /// Restrict to members of this set instead of the whole group.
    #[arg(long)]
    transforms: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Oracle::Group)]
    oracle: Oracle,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "family")]
struct EnergyInput {
    #[arg(long)]
    hyperbolas: Option<PathBuf>,
    #[arg(long)]
    transforms: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnergyArgs {
    #[command(flatten)]
    input: EnergyInput,
    /// Cross-check against the quadruple-loop oracle.
    #[arg(long)]
    check: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Write rows here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-bound maximum ratios to this file.
    #[arg(long)]
    emit_baseline: Option<PathBuf>,
    /// Compare per-bound maximum ratios with a stored baseline.
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Record wall time per row (output is then not reproducible).
    #[arg(long)]
    timings: bool,
}

enum Failure {
    /// Bad input or flags: exit 2.
    Invalid(String),
    /// An internal cross-check disagreed: exit 1.
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn at(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Invalid(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::Invalid("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    let mut out = io::stdout().lock();
    match &cli.command {
        Command::Incidence { points, transforms } => {
            let field = field(cli)?;
            let pts = sets::load_points(field, points).map_err(at(points))?;
            let maps = sets::load_transforms(field, transforms).map_err(at(transforms))?;
            let params = BoundParams {
                points: Some(pts.len() as f64),
                transforms: Some(maps.len() as f64),
                ..Default::default()
            };
            strict_check(cli, BoundSpec::new(BoundId::Thm1Incidence, params), field)?;
            writeln!(out, "{}", count_incidences(&pts, &maps)?)?;
        }
        Command::RichEnum(args) => rich_enum(cli, args, &mut out)?,
        Command::Energy(args) => energy_cmd(cli, args, &mut out)?,
        Command::Repr { a, b, table } => {
            let field = field(cli)?;
            let a_set = sets::load_scalars(field, a).map_err(at(a))?;
            let b_set = sets::load_scalars(field, b).map_err(at(b))?;
            if *table {
                #[derive(Serialize)]
                struct Entry {
                    lambda: u64,
                    r: u64,
                }
                for (l, r) in representation_counts(&a_set, &b_set) {
                    let e = Entry {
                        lambda: l.value(),
                        r,
                    };
                    if cli.json {
                        emit(&mut out, true, &e)?;
                    } else {
                        writeln!(out, "{} {}", e.lambda, e.r)?;
                    }
                }
            } else {
                let report = corollary4_report(&a_set, &b_set)?;
                if cli.strict && !report.hypothesis_ok {
                    return Err(Failure::Invalid(format!(
                        "hypothesis KN <= p^(1/2) fails: |A+B| = {} > sqrt({})",
                        report.sumset_size,
                        field.modulus()
                    )));
                }
                emit(&mut out, cli.json, &report)?;
            }
        }
        Command::Beck { points, constant } => {
            let field = field(cli)?;
            let pts = sets::load_points(field, points).map_err(at(points))?;
            emit(&mut out, cli.json, &beck_statistics(&pts, *constant)?)?;
        }
        Command::Expander { kind, a, exponent } => {
            let field = field(cli)?;
            let input = sets::load_scalars(field, a).map_err(at(a))?;
            let (image, default_exp) = match kind {
                ExpanderKind::ShiftInvert => (expander_shift_invert(&input), 6.0 / 5.0),
                ExpanderKind::Rational => (expander_rational(&input), 4.0 / 3.0),
            };
            let report = ExpanderReport::new(&input, &image, exponent.unwrap_or(default_exp));
            emit(&mut out, cli.json, &report)?;
        }
        Command::EquivCount { a, s } => {
            let field = field(cli)?;
            let a_set = sets::load_scalars(field, a).map_err(at(a))?;
            let s_set = sets::load_scalars(field, s).map_err(at(s))?;
            emit(
                &mut out,
                cli.json,
                &projective_equivalence_count(&a_set, &s_set)?,
            )?;
        }
        Command::VerifyReduction { exhaustive, pivots } => {
            let field = field(cli)?;
            let report = if *exhaustive {
                verify_reduction(field)
            } else {
                let mut rng = rng_from_seed(cli.seed.unwrap_or(0));
                let n = (*pivots).min((field.modulus() * field.modulus()) as usize);
                verify_reduction_at(&random_points(field, n, &mut rng)?)
            };
            #[derive(Serialize)]
            struct Row {
                #[serde(flatten)]
                report: ReductionReport,
                violations: u64,
            }
            let row = Row {
                report,
                violations: report.violations(),
            };
            emit(&mut out, cli.json, &row)?;
            if report.violations() > 0 {
                return Err(Failure::Mismatch(format!(
                    "{} reduction violations at p = {}",
                    report.violations(),
                    field.modulus()
                )));
            }
        }
        Command::Sweep(args) => sweep_cmd(cli, args, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn field(cli: &Cli) -> Result<PrimeField, Failure> {
    let p = cli
        .prime
        .ok_or_else(|| Failure::Invalid("this subcommand needs -p <prime>".into()))?;
    Ok(PrimeField::new(p)?)
}

fn strict_check(cli: &Cli, spec: BoundSpec, field: PrimeField) -> Outcome {
    if !cli.strict {
        return Ok(());
    }
    for h in spec.hypotheses(field.modulus(), 1.0) {
        if !h.holds && !h.constant_dependent {
            return Err(Failure::Invalid(format!(
                "hypothesis {} fails: {} > {}",
                h.name, h.lhs, h.rhs
            )));
        }
    }
    Ok(())
}

/// One JSON line, or `key: value` lines.
fn emit(out: &mut impl Write, json: bool, row: &impl Serialize) -> Outcome {
    let value = serde_json::to_value(row).map_err(|e| Failure::Invalid(e.to_string()))?;
    if json {
        writeln!(out, "{value}")?;
        return Ok(());
    }
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                writeln!(out, "{k}: {v}")?;
            }
        }
        other => writeln!(out, "{other}")?,
    }
    Ok(())
}

fn rich_enum(cli: &Cli, args: &RichEnumArgs, out: &mut impl Write) -> Outcome {
    let field = field(cli)?;
    let pts = sets::load_points(field, &args.points).map_err(at(&args.points))?;
    let ambient = match &args.transforms {
        Some(path) => Some(sets::load_transforms(field, path).map_err(at(path))?),
        None => None,
    };
    let params = BoundParams {
        points: Some(pts.len() as f64),
        k: Some(args.k as f64),
        ..Default::default()
    };
    strict_check(cli, BoundSpec::new(BoundId::Thm1Rich, params), field)?;

    let pivot = |ambient: &Option<TransformSet>| -> Result<(TransformSet, f64), Failure> {
        let t0 = Instant::now();
        let found = match ambient {
            Some(t) => rich_members_via_pivots(&pts, t, args.k)?,
            None => rich_transforms_via_pivots(&pts, args.k)?,
        };
        Ok((found.maps, t0.elapsed().as_secs_f64() * 1e3))
    };
    let brute = |ambient: &Option<TransformSet>| -> Result<(TransformSet, f64), Failure> {
        let t0 = Instant::now();
        let found = match ambient {
            Some(t) => TransformSet::new(
                field,
                t.iter().filter(|f| richness(f, &pts) >= args.k).copied(),
            )?,
            None => {
                let mode = match args.oracle {
                    Oracle::Group => BruteMode::FullGroup,
                    Oracle::Triples => BruteMode::Triples,
                };
                rich_transforms_brute(&pts, args.k, mode)?
            }
        };
        Ok((found, t0.elapsed().as_secs_f64() * 1e3))
    };

    match args.method {
        Method::Pivot => write!(out, "{}", sets::format_transforms(&pivot(&ambient)?.0))?,
        Method::Brute => write!(out, "{}", sets::format_transforms(&brute(&ambient)?.0))?,
        Method::Both => {
            let (via_pivots, pivot_ms) = pivot(&ambient)?;
            let (oracle, brute_ms) = brute(&ambient)?;
            write!(out, "{}", sets::format_transforms(&via_pivots))?;
            if via_pivots != oracle {
                out.flush()?;
                let missing = oracle.iter().filter(|f| !via_pivots.contains(f)).count();
                let extra = via_pivots.iter().filter(|f| !oracle.contains(f)).count();
                return Err(Failure::Mismatch(format!(
                    "MISMATCH: pivot enumeration misses {missing} and adds {extra} maps"
                )));
            }
            writeln!(out, "MATCH")?;
            writeln!(out, "pivot_ms={pivot_ms:.3} brute_ms={brute_ms:.3}")?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EnergyRow {
    size: usize,
    energy: u64,
    m: Option<usize>,
    ratio: Option<f64>,
}

fn energy_cmd(cli: &Cli, args: &EnergyArgs, out: &mut impl Write) -> Outcome {
    let field = field(cli)?;
    let (row, maps) = match (&args.input.hyperbolas, &args.input.transforms) {
        (Some(path), _) => {
            let family = sets::load_hyperbolas(field, path).map_err(at(path))?;
            let r = energy_m_report(field, &family)?;
            let row = EnergyRow {
                size: r.size,
                energy: r.energy,
                m: Some(r.m),
                ratio: Some(r.ratio),
            };
            (row, family_to_transforms(field, &family))
        }
        (None, Some(path)) => {
            let maps = sets::load_transforms(field, path).map_err(at(path))?;
            let row = EnergyRow {
                size: maps.len(),
                energy: energy(&maps),
                m: None,
                ratio: None,
            };
            (row, maps)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    if args.check {
        let oracle = energy_brute(&maps, DEFAULT_ORACLE_CAP)?;
        if oracle != row.energy {
            return Err(Failure::Mismatch(format!(
                "energy {} disagrees with oracle {oracle}",
                row.energy
            )));
        }
    }
    match cli.format {
        Format::Jsonl => emit(out, true, &row)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(&row)
                .map_err(|e| Failure::Invalid(e.to_string()))?;
            w.flush()?;
        }
    }
    Ok(())
}

fn sweep_cmd(cli: &Cli, args: &SweepArgs, out: &mut impl Write) -> Outcome {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", args.config.display())))?;
    let mut cfg = SweepConfig::parse(&text).map_err(at(&args.config))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.timings |= args.timings;
    let rows = mobius_incidence::harness::sweep(&cfg)?;

    if cli.strict {
        let bad = rows.iter().find_map(|r| {
            r.hypotheses
                .iter()
                .find(|h| !h.holds && !h.constant_dependent)
                .map(|h| (r, h.name))
        });
        if let Some((r, name)) = bad {
            return Err(Failure::Invalid(format!(
                "hypothesis {name} fails for {} at p = {}, size {}",
                r.bound, r.p, r.size
            )));
        }
    }

    match &args.out {
        Some(path) => {
            let mut f = io::BufWriter::new(fs::File::create(path)?);
            write_rows(&rows, cli.format.into(), &mut f)?;
            f.flush()?;
        }
        None => write_rows(&rows, cli.format.into(), out)?,
    }

    let observed = max_ratios(&rows);
    if let Some(path) = &args.emit_baseline {
        fs::write(path, format_baseline(&observed))?;
    }
    if let Some(path) = &args.baseline {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        let stored = parse_baseline(&text).map_err(at(path))?;
        let failed: Vec<String> = check_regression(&stored, &observed, args.tolerance)
            .into_iter()
            .filter(|c| !c.ok)
            .map(|c| {
                format!(
                    "{} (stored {:?}, observed {:?})",
                    c.bound, c.stored, c.observed
                )
            })
            .collect();
        if !failed.is_empty() {
            return Err(Failure::Mismatch(format!(
                "ratio regression: {}",
                failed.join(", ")
            )));
        }
    }
    Ok(())
}
