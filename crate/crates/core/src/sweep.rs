//! Verification sweeps and report persistence.
//!
//! Instances are split into fixed-size chunks by index; chunks run on a
//! rayon pool and merge in index order, so reports do not depend on the
//! worker count.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{probe_counterexample, Mismatch};
use crate::constructions::Builder;
use crate::error::{Error, Result};
use crate::precision::{
    c_size, min_exact_precision_on, precision_envelope, quantized_forward, InstanceSet, PrecisionSearch,
    QuantizationPolicy,
};
use crate::task::{self, encode, exhaustive_cap, oracle, FunctionClass, Instance, InstanceSpace, PresentationCase};
use crate::transformer::{forward, TransformerSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// At most this many failures are kept per report.
pub const MAX_RECORDED_FAILURES: usize = 100;
const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SweepMode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub case: PresentationCase,
    pub n: usize,
    pub builder: Builder,
    pub class: FunctionClass,
    pub mode: SweepMode,
    /// Fractional bits for quantized evaluation; `None` runs in full `f64`.
    pub precision: Option<u32>,
    /// 0 picks the rayon default.
    #[serde(skip)]
    pub workers: usize,
}

impl SweepConfig {
    pub fn exhaustive(case: PresentationCase, n: usize, builder: Builder) -> Self {
        Self {
            case,
            n,
            builder,
            class: FunctionClass::AllFunctions,
            mode: SweepMode::Exhaustive,
            precision: None,
            workers: 0,
        }
    }

    pub fn sampled(case: PresentationCase, n: usize, builder: Builder, count: u64, seed: u64) -> Self {
        Self {
            mode: SweepMode::Sampled { count, seed },
            ..Self::exhaustive(case, n, builder)
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.mode {
            SweepMode::Sampled { seed, .. } => Some(seed),
            SweepMode::Exhaustive => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if !self.builder.supports(self.case) {
            return Err(Error::InvalidInput(format!(
                "builder {} does not handle case {}",
                self.builder, self.case
            )));
        }
        if self.mode == SweepMode::Exhaustive && self.n > exhaustive_cap() {
            return Err(Error::CapExceeded {
                n: self.n,
                cap: exhaustive_cap(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub instance: Instance,
    pub expected: usize,
    pub got: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: SweepConfig,
    pub trials: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub failures: Vec<Failure>,
    pub wall_ms: Option<u64>,
    pub tool_version: String,
    pub seed: Option<u64>,
}

impl VerificationReport {
    pub fn all_correct(&self) -> bool {
        self.correct == self.trials
    }
}

pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

enum Source {
    Space(InstanceSpace),
    Sampled { n: usize, class: FunctionClass, count: u64, seed: u64 },
}

impl Source {
    fn len(&self) -> u64 {
        match self {
            Self::Space(s) => s.len(),
            Self::Sampled { count, .. } => *count,
        }
    }

    fn get(&self, i: u64, case: PresentationCase) -> Instance {
        match self {
            Self::Space(s) => s.get(i),
            Self::Sampled { n, class, seed, .. } => task::random_instance(*n, *class, case, task::derive_seed(*seed, i)),
        }
    }
}

fn evaluate(spec: &TransformerSpec, case: PresentationCase, inst: &Instance, quant: Option<&QuantizationPolicy>) -> Option<usize> {
    let toks = encode(inst, case).expect("instance generated for its case");
    match quant {
        Some(q) => quantized_forward(spec, &toks, q).ok(),
        None => forward(spec, &toks).ok(),
    }
}

/// Compares the configured construction against the oracle on every instance.
pub fn run_verification(config: &SweepConfig) -> Result<VerificationReport> {
    config.validate()?;
    let start = Instant::now();
    let spec = config.builder.build_for(config.case, config.n)?;
    let source = match config.mode {
        SweepMode::Exhaustive => Source::Space(InstanceSpace::new(
            config.n,
            config.class,
            config.case.is_ordered(),
            exhaustive_cap(),
        )?),
        SweepMode::Sampled { count, seed } => Source::Sampled {
            n: config.n,
            class: config.class,
            count,
            seed,
        },
    };
    let quant = config.precision.map(QuantizationPolicy::new);
    let trials = source.len();
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<(u64, Vec<Failure>)> = with_workers(config.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut correct = 0;
                let mut failures = Vec::new();
                for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    let inst = source.get(i, config.case);
                    let expected = oracle(&inst);
                    let got = evaluate(&spec, config.case, &inst, quant.as_ref());
                    if got == Some(expected) {
                        correct += 1;
                    } else if failures.len() < MAX_RECORDED_FAILURES {
                        failures.push(Failure {
                            instance: inst,
                            expected,
                            got,
                        });
                    }
                }
                (correct, failures)
            })
            .collect()
    })?;
    let mut correct = 0;
    let mut failures = Vec::new();
    for (c, f) in partial {
        correct += c;
        let room = MAX_RECORDED_FAILURES - failures.len();
        failures.extend(f.into_iter().take(room));
    }
    Ok(VerificationReport {
        config: config.clone(),
        trials,
        correct,
        accuracy: if trials == 0 { 0.0 } else { correct as f64 / trials as f64 },
        failures,
        wall_ms: Some(start.elapsed().as_millis() as u64),
        tool_version: TOOL_VERSION.to_string(),
        seed: config.seed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub n: usize,
    pub attention_layers: usize,
    pub all_hard: bool,
    /// A 1-layer hard-attention spec must miss some adversarial member.
    pub failure_predicted: bool,
    pub mismatch: Option<Mismatch>,
    pub matches_prediction: bool,
}

pub fn run_probe(spec: &TransformerSpec, n: usize, workers: usize) -> Result<ProbeReport> {
    spec.validate()?;
    let mismatch = with_workers(workers, || probe_counterexample(spec, n))??;
    let attention_layers = spec.num_attention_layers();
    let all_hard = spec.attention_layers().all(|a| a.kind.is_hard());
    let failure_predicted = attention_layers == 1 && all_hard;
    Ok(ProbeReport {
        n,
        attention_layers,
        all_hard,
        failure_predicted,
        matches_prediction: mismatch.is_some() == failure_predicted,
        mismatch,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionRow {
    pub case: PresentationCase,
    pub builder: Builder,
    pub n: usize,
    pub p_star: Option<u32>,
    pub csize_at_pstar: Option<u64>,
    pub envelope: u32,
    pub pass: bool,
}

/// `p*` for each `n`; exhaustive for `n <= 4`, otherwise `sample` seeded instances.
pub fn precision_sweep(
    builder: Builder,
    case: PresentationCase,
    n_list: &[usize],
    sample: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<PrecisionRow>> {
    if !builder.supports(case) {
        return Err(Error::InvalidInput(format!("builder {builder} does not handle case {case}")));
    }
    with_workers(workers, || {
        n_list
            .iter()
            .map(|&n| {
                let spec = builder.build_for(case, n)?;
                let set = InstanceSet::for_search(n, FunctionClass::AllFunctions, case.is_ordered(), sample, seed)?;
                let search = min_exact_precision_on(&spec, &set);
                let envelope = precision_envelope(n);
                let p_star = search.p_star();
                Ok(PrecisionRow {
                    case,
                    builder,
                    n,
                    p_star,
                    csize_at_pstar: p_star.map(|p| c_size(&spec, p).product),
                    envelope,
                    pass: matches!(search, PrecisionSearch::Exact { p_star, .. } if p_star <= envelope),
                })
            })
            .collect()
    })?
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::InvalidInput(format!("format must be json or csv, got {s:?}"))),
        }
    }
}

/// Six significant digits, fixed notation.
pub fn format_ratio(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.5}", x);
    }
    let digits = x.abs().log10().floor() as i32 + 1;
    let decimals = (6 - digits).max(0) as usize;
    format!("{x:.decimals$}")
}

pub const CSV_HEADER: &str = "case,n,trials,correct,accuracy,seed,wall_ms";

/// Serializes reports with sorted keys and ratios rounded to six significant
/// digits. Wall time is written only when `timing` is set, so that repeated
/// runs give identical bytes.
pub fn render_reports(reports: &[VerificationReport], format: ReportFormat, timing: bool) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in reports {
                let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
                let wall = if timing { r.wall_ms.map(|w| w.to_string()).unwrap_or_default() } else { String::new() };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.config.case.number(),
                    r.config.n,
                    r.trials,
                    r.correct,
                    format_ratio(r.accuracy),
                    seed,
                    wall
                ));
            }
            out
        }
        ReportFormat::Json => {
            let values: Vec<serde_json::Value> = reports
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.accuracy = format_ratio(r.accuracy).parse().expect("formatted float");
                    if !timing {
                        r.wall_ms = None;
                    }
                    // serde_json maps are BTreeMaps: keys come out sorted
                    serde_json::to_value(&r).expect("report serializes")
                })
                .collect();
            let doc = if values.len() == 1 {
                values.into_iter().next().unwrap()
            } else {
                serde_json::Value::Array(values)
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("json value serializes");
            s.push('\n');
            s
        }
    }
}

pub fn emit_report(reports: &[VerificationReport], format: ReportFormat, timing: bool, path: Option<&Path>) -> Result<()> {
    let text = render_reports(reports, format, timing);
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub const PRECISION_CSV_HEADER: &str = "case,n,p_star,csize_at_pstar,envelope,pass";

pub fn render_precision_csv(rows: &[PrecisionRow]) -> String {
    let mut out = String::from(PRECISION_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let opt = |x: Option<String>| x.unwrap_or_else(|| "saturated".into());
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.case.number(),
            r.n,
            opt(r.p_star.map(|p| p.to_string())),
            opt(r.csize_at_pstar.map(|c| c.to_string())),
            r.envelope,
            r.pass
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_formatting() {
        assert_eq!(format_ratio(1.0), "1.00000");
        assert_eq!(format_ratio(0.25), "0.250000");
        assert_eq!(format_ratio(2.0 / 3.0), "0.666667");
        assert_eq!(format_ratio(0.0), "0.00000");
    }

    #[test]
    fn exhaustive_case3_n4() {
        let r = run_verification(&SweepConfig::exhaustive(PresentationCase::SamePosPermuted, 4, Builder::Case3)).unwrap();
        assert_eq!((r.trials, r.correct), (24_576, 24_576));
        assert_eq!(r.accuracy, 1.0);
        assert!(r.failures.is_empty());
    }

    #[test]
    fn constant_baseline_is_at_chance() {
        let cfg = SweepConfig::sampled(PresentationCase::ConsecutivePermuted, 4, Builder::Constant, 10_000, 3);
        let r = run_verification(&cfg).unwrap();
        assert!((r.accuracy - 0.25).abs() < 0.02, "{}", r.accuracy);
        assert_eq!(r.failures.len(), MAX_RECORDED_FAILURES);
        assert!(r.failures.iter().all(|f| f.got == Some(0) && f.expected != 0));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SweepConfig::exhaustive(PresentationCase::NoKeys, 3, Builder::Case4);
        assert!(run_verification(&cfg).is_err());
        cfg.builder = Builder::Case1;
        cfg.n = 9;
        assert!(matches!(run_verification(&cfg), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn reports_are_byte_stable() {
        let cfg = SweepConfig::sampled(PresentationCase::ConsecutivePermuted, 5, Builder::Constant, 3000, 9);
        let a = run_verification(&SweepConfig { workers: 1, ..cfg.clone() }).unwrap();
        let b = run_verification(&SweepConfig { workers: 3, ..cfg }).unwrap();
        for fmt in [ReportFormat::Json, ReportFormat::Csv] {
            assert_eq!(render_reports(std::slice::from_ref(&a), fmt, false), render_reports(std::slice::from_ref(&b), fmt, false));
        }
        let csv = render_reports(std::slice::from_ref(&a), ReportFormat::Csv, false);
        assert!(csv.starts_with("case,n,trials,correct,accuracy,seed,wall_ms\n5,5,3000,"));
        let json = render_reports(std::slice::from_ref(&a), ReportFormat::Json, false);
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.failures, a.failures);
    }
}
