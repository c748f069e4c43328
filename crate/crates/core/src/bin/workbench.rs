use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lookup_workbench::analysis::{csize_lower_bound, error_prob_lower_bound, probe_random, verify_shattering};
use lookup_workbench::constructions::Builder;
use lookup_workbench::precision::{quantized_forward, QuantizationPolicy};
use lookup_workbench::sweep::{
    precision_sweep, render_precision_csv, render_reports, run_probe, run_verification, ReportFormat, SweepConfig,
    SweepMode,
};
use lookup_workbench::task::{encode, exhaustive_cap, oracle, FunctionClass, Instance, PresentationCase};
use lookup_workbench::transformer::{forward, TransformerSpec};
use lookup_workbench::Error;

const DEFAULT_SAMPLE: u64 = 10_000;

#[derive(Parser)]
#[command(name = "workbench", version, about = "Transformer lookup constructions and their checks")]
struct Cli {
    /// Base seed for sampled instances and random specs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output format: json or csv.
    #[arg(long, global = true)]
    format: Option<ReportFormat>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock time in reports (breaks byte stability).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the serialized spec of a construction.
    Construct {
        #[arg(long)]
        case: PresentationCase,
        #[arg(long)]
        n: usize,
        /// Case 5 only: the two-layer hard construction instead of the softmax one.
        #[arg(long)]
        two_layer: bool,
    },
    /// Compare a construction against the oracle.
    Verify(VerifyArgs),
    /// Minimal exact precision per n.
    PrecisionSweep {
        #[arg(long)]
        case: PresentationCase,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        builder: Option<Builder>,
        #[arg(long, default_value_t = DEFAULT_SAMPLE)]
        sample: u64,
    },
    /// Size lower bounds for a given n.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        p: Option<u32>,
    },
    /// Run a case-5 spec on the adversarial family.
    Probe {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        /// Also try this many random case-5 instances.
        #[arg(long)]
        explore: Option<u64>,
    },
    /// Check the shattering witness on all 2^n labelings.
    Shatter {
        #[arg(long)]
        n: usize,
    },
    /// Evaluate a spec on instances from a JSON-lines file.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        precision: Option<u32>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    case: PresentationCase,
    #[arg(long, conflicts_with = "n_list", required_unless_present = "n_list")]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Defaults to the construction for the case (softmax for case 5).
    #[arg(long)]
    builder: Option<Builder>,
    #[arg(long, default_value = "all")]
    class: FunctionClass,
    #[arg(long, conflicts_with = "sample")]
    exhaustive: bool,
    #[arg(long)]
    sample: Option<u64>,
    #[arg(long)]
    precision: Option<u32>,
}

enum Failure {
    Check,
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    // serde_json::Value keeps object keys sorted.
    let v = serde_json::to_value(value).expect("report serializes");
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<TransformerSpec, Failure> {
    Ok(TransformerSpec::from_json(&read(path)?)?)
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Outcome {
    let ns = a.n_list.clone().unwrap_or_else(|| a.n.into_iter().collect());
    let builder = a.builder.unwrap_or_else(|| Builder::for_case(a.case, false));
    let mut reports = Vec::new();
    for n in ns {
        let mode = match (a.exhaustive, a.sample) {
            (true, _) => SweepMode::Exhaustive,
            (false, Some(count)) => SweepMode::Sampled { count, seed: cli.seed },
            (false, None) if n <= exhaustive_cap() => SweepMode::Exhaustive,
            (false, None) => SweepMode::Sampled { count: DEFAULT_SAMPLE, seed: cli.seed },
        };
        let config = SweepConfig {
            case: a.case,
            n,
            builder,
            class: a.class,
            mode,
            precision: a.precision,
            workers: cli.workers,
        };
        reports.push(run_verification(&config)?);
    }
    let format = cli.format.unwrap_or(ReportFormat::Json);
    emit(&render_reports(&reports, format, cli.timing), cli.out.as_deref())?;
    if reports.iter().all(|r| r.all_correct()) {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

#[derive(Serialize)]
struct BoundsReport {
    n: usize,
    csize_lower_bound: u64,
    error_prob_lower_bound: Option<f64>,
    small_n_warning: Option<bool>,
}

#[derive(Serialize)]
struct EvalRow {
    instance: Instance,
    expected: usize,
    got: Option<usize>,
    error: Option<String>,
}

fn run(cli: &Cli) -> Outcome {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Construct { case, n, two_layer } => {
            if *two_layer && *case != PresentationCase::ConsecutivePermuted {
                return Err(Failure::Usage("--two-layer applies to case 5 only".into()));
            }
            if *n == 0 {
                return Err(Failure::Usage("n must be positive".into()));
            }
            let spec = Builder::for_case(*case, *two_layer).build_for(*case, *n)?;
            emit(&(spec.to_json() + "\n"), out)
        }
        Command::Verify(a) => verify(cli, a),
        Command::PrecisionSweep { case, n_list, builder, sample } => {
            let b = builder.unwrap_or_else(|| Builder::for_case(*case, false));
            let rows = precision_sweep(b, *case, n_list, *sample, cli.seed, cli.workers)?;
            let text = match cli.format.unwrap_or(ReportFormat::Csv) {
                ReportFormat::Csv => render_precision_csv(&rows),
                ReportFormat::Json => json(&rows),
            };
            emit(&text, out)?;
            if rows.iter().all(|r| r.pass) {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Bounds { n, h, d, p } => {
            if *n == 0 {
                return Err(Failure::Usage("n must be positive".into()));
            }
            let err = match (d, p) {
                (Some(d), Some(p)) => Some(error_prob_lower_bound(*n, *h, *d, *p)?),
                (None, None) => None,
                _ => return Err(Failure::Usage("--d and --p go together".into())),
            };
            let report = BoundsReport {
                n: *n,
                csize_lower_bound: csize_lower_bound(*n),
                error_prob_lower_bound: err.map(|e| e.value),
                small_n_warning: err.map(|e| e.small_n_warning),
            };
            emit(&json(&report), out)
        }
        Command::Probe { spec, n, explore } => {
            let spec = load_spec(spec)?;
            let report = run_probe(&spec, *n, cli.workers)?;
            let mut text = json(&report);
            match &report.mismatch {
                Some(m) => text += &format!("mismatch at member {}: expected {} got {:?}\n", m.member, m.expected, m.got),
                None => text += "none\n",
            }
            if let Some(k) = explore {
                match probe_random(&spec, *n, *k, cli.seed)? {
                    Some((inst, got)) => text += &format!("explore: {} got {got:?}\n", inst.to_json_line()),
                    None => text += &format!("explore: {k} random instances correct\n"),
                }
            }
            emit(&text, out)?;
            if report.matches_prediction {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Shatter { n } => {
            let report = verify_shattering(*n)?;
            let verdict = if report.shattered { "pass" } else { "fail" };
            emit(&format!("{verdict} {} labelings\n", report.labelings), out)?;
            if report.shattered {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Eval { spec, instances, precision } => {
            let spec = load_spec(spec)?;
            let policy = precision.map(QuantizationPolicy::new);
            let mut rows = Vec::new();
            for line in read(instances)?.lines().filter(|l| !l.trim().is_empty()) {
                let inst = Instance::from_json_line(line)?;
                if inst.n != spec.n {
                    return Err(Failure::Usage(format!("instance n={} but spec n={}", inst.n, spec.n)));
                }
                let res = encode(&inst, spec.case).and_then(|toks| match &policy {
                    Some(q) => quantized_forward(&spec, &toks, q),
                    None => forward(&spec, &toks),
                });
                let (got, error) = match res {
                    Ok(y) => (Some(y), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                rows.push(EvalRow { expected: oracle(&inst), instance: inst, got, error });
            }
            let text = match cli.format.unwrap_or(ReportFormat::Json) {
                ReportFormat::Json => json(&rows),
                ReportFormat::Csv => {
                    let mut s = String::from("line,expected,got\n");
                    for (i, r) in rows.iter().enumerate() {
                        let got = r.got.map_or_else(|| "error".to_string(), |g| g.to_string());
                        s += &format!("{i},{},{got}\n", r.expected);
                    }
                    s
                }
            };
            emit(&text, out)?;
            if rows.iter().all(|r| r.got == Some(r.expected)) {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("io error: {msg}");
            ExitCode::from(3)
        }
    }
}
