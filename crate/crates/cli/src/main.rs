//! Batch front end over the engine: read one JSON run config, execute
//! one command, print JSON-lines records on standard output.
//!
//! Exit codes follow a three-way contract. 0 means the command ran and
//! produced its records. 2 means a search honestly came back
//! empty-handed (no gap at the requested resolution, no accumulation
//! point among the samples, trace cut short by budget); the partial
//! records are still printed. 1 means an actual error, described on
//! standard error.

mod records;

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use egyptian_core::config::{BuildableGroup, ConfigError, SetConfig};
use egyptian_core::dynamics::{
    above_accumulation_census, below_accumulation_census, extract_decreasing,
    find_accumulation_point, AccumulationOutcome, ElementStream, ExtractOutcome, StreamOrder,
};
use egyptian_core::group::{
    make_integers, make_lex_pairs, make_rationals, parse_rational, GroupError, OrderedGroup,
};
use egyptian_core::lcf0::validate_lcf0;
use egyptian_core::sumset::{
    build_net, enumerate_representations, find_gap, representation_census, EngineError,
    GapOutcome, SumSpec, DEFAULT_TUPLE_BUDGET,
};

use records::*;

/// Exact-arithmetic workbench for generalized Egyptian fractions:
/// enumerate representations, certify gaps, chase accumulation points.
#[derive(Parser)]
#[command(name = "egyptian")]
struct Args {
    /// Operation: reps | census | gap | net | accum | decseq | belowcensus | validate
    #[arg(long)]
    command: String,

    /// Path to a JSON run config; read from standard input when omitted
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the config's tuple budget
    #[arg(long)]
    budget: Option<u64>,

    /// Override the config's resolution ceiling
    #[arg(long = "k-max")]
    k_max: Option<u32>,

    /// Override the config's schedule, comma separated: "3,6,9,12"
    #[arg(long)]
    schedule: Option<String>,

    /// Override the config's trace length
    #[arg(long)]
    length: Option<usize>,
}

/// One run = one group, one list of summand sets, plus whichever
/// command parameters apply. Every numeric literal is an exact string;
/// unknown fields are rejected so typos fail loudly instead of being
/// silently ignored.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    group: String,
    sets: Vec<SetConfig>,
    #[serde(default)]
    target: Option<String>,
    #[serde(default)]
    query: Option<[String; 2]>,
    #[serde(default)]
    k: Option<u32>,
    #[serde(default)]
    k_max: Option<u32>,
    #[serde(default)]
    budget: Option<u64>,
    #[serde(default)]
    schedule: Option<Vec<u32>>,
    #[serde(default)]
    order: Option<String>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    depth: Option<u32>,
    #[serde(default)]
    point: Option<String>,
    #[serde(default)]
    length: Option<usize>,
    #[serde(default)]
    eta: Option<String>,
    #[serde(default)]
    side: Option<String>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown group {0:?} (expected \"rationals\", \"integers\" or \"lex_pairs\")")]
    UnknownGroup(String),
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("command {command:?} needs the config field {field:?}")]
    MissingField {
        command: &'static str,
        field: &'static str,
    },
    #[error("unknown enumeration order {0:?} (expected \"by-denominator-sum\" or \"lexicographic\")")]
    UnknownOrder(String),
    #[error("unknown census side {0:?} (expected \"below\" or \"above\")")]
    UnknownSide(String),
    #[error("schedule entry {0:?} is not a whole number")]
    BadSchedule(String),
    #[error("{failed} of {total} sets failed validation")]
    ValidationFailed { failed: usize, total: usize },
    #[error(transparent)]
    BuildSet(#[from] ConfigError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

enum Outcome {
    Done,
    NotFound,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotFound) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(args: &Args) -> Result<Outcome, CliError> {
    let raw = match &args.config {
        Some(path) => fs::read_to_string(path)?,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    let mut config: RunConfig = serde_json::from_str(&raw)?;
    if let Some(b) = args.budget {
        config.budget = Some(b);
    }
    if let Some(k) = args.k_max {
        config.k_max = Some(k);
    }
    if let Some(l) = args.length {
        config.length = Some(l);
    }
    if let Some(s) = &args.schedule {
        config.schedule = Some(parse_schedule(s)?);
    }

    match config.group.as_str() {
        "rationals" => dispatch(make_rationals(), &config, &args.command),
        "integers" => dispatch(make_integers(), &config, &args.command),
        "lex_pairs" => dispatch(make_lex_pairs(), &config, &args.command),
        other => Err(CliError::UnknownGroup(other.to_string())),
    }
}

fn parse_schedule(s: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<u32>()
                .map_err(|_| CliError::BadSchedule(part.to_string()))
        })
        .collect()
}

fn dispatch<G: BuildableGroup>(
    group: G,
    config: &RunConfig,
    command: &str,
) -> Result<Outcome, CliError> {
    let sets = config
        .sets
        .iter()
        .map(|c| group.build_set(c))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = SumSpec::new(group, sets)?;
    match command {
        "reps" => cmd_reps(&spec, config),
        "census" => cmd_census(&spec, config),
        "gap" => cmd_gap(&spec, config),
        "net" => cmd_net(&spec, config),
        "accum" => cmd_accum(&spec, config),
        "decseq" => cmd_decseq(&spec, config),
        "belowcensus" => cmd_belowcensus(&spec, config),
        "validate" => cmd_validate(&spec, config),
        other => Err(CliError::UnknownCommand(other.to_string())),
    }
}

fn need<'a, T>(
    field: &'a Option<T>,
    command: &'static str,
    name: &'static str,
) -> Result<&'a T, CliError> {
    field.as_ref().ok_or(CliError::MissingField {
        command,
        field: name,
    })
}

fn budget_of(config: &RunConfig) -> u64 {
    config.budget.unwrap_or(DEFAULT_TUPLE_BUDGET)
}

/// Records are assembled first and flushed in one write so that output
/// order never depends on evaluation interleaving.
fn print_all(lines: &[String]) {
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    print!("{out}");
}

fn line<T: Serialize>(record: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string(record)?)
}

fn cmd_reps<G: OrderedGroup>(spec: &SumSpec<G>, config: &RunConfig) -> Result<Outcome, CliError> {
    let group = spec.group();
    let target = group.parse_elem(need(&config.target, "reps", "target")?)?;
    let reps = enumerate_representations(spec, &target)?;
    let mut lines = Vec::with_capacity(reps.len() + 1);
    for rep in &reps {
        lines.push(line(&RepRecord {
            terms: rep.terms.iter().map(|t| group.format_elem(t)).collect(),
            target: group.format_elem(&rep.target),
        })?);
    }
    lines.push(line(&CountRecord {
        count: reps.len() as u64,
    })?);
    print_all(&lines);
    Ok(Outcome::Done)
}

fn cmd_census<G: OrderedGroup>(spec: &SumSpec<G>, config: &RunConfig) -> Result<Outcome, CliError> {
    let group = spec.group();
    let target = group.parse_elem(need(&config.target, "census", "target")?)?;
    let schedule = need(&config.schedule, "census", "schedule")?;
    let report = representation_census(spec, &target, schedule, budget_of(config))?;
    print_all(&[line(&CensusRecord {
        target: group.format_elem(&report.target),
        schedule: report.schedule,
        counts: report.counts,
    })?]);
    Ok(Outcome::Done)
}

fn cmd_gap<G: OrderedGroup>(spec: &SumSpec<G>, config: &RunConfig) -> Result<Outcome, CliError> {
    let group = spec.group();
    let [lo, hi] = need(&config.query, "gap", "query")?;
    let lo = group.parse_elem(lo)?;
    let hi = group.parse_elem(hi)?;
    let k_max = config.k_max.unwrap_or(16);
    match find_gap(spec, (&lo, &hi), k_max, budget_of(config))? {
        GapOutcome::Found(cert) => {
            print_all(&[line(&GapRecord {
                gap: [group.format_elem(&cert.gap.0), group.format_elem(&cert.gap.1)],
                query: [
                    group.format_elem(&cert.query.0),
                    group.format_elem(&cert.query.1),
                ],
                resolution: cert.resolution,
                fattening: cert.fattening.to_string(),
                net_size: cert.net_size,
            })?]);
            Ok(Outcome::Done)
        }
        GapOutcome::NotFoundAtResolution { k_max } => {
            print_all(&[line(&NotFoundRecord {
                outcome: "NOT_FOUND_AT_RESOLUTION",
                k_max,
            })?]);
            Ok(Outcome::NotFound)
        }
    }
}

fn cmd_net<G: OrderedGroup>(spec: &SumSpec<G>, config: &RunConfig) -> Result<Outcome, CliError> {
    let group = spec.group();
    let k = *need(&config.k, "net", "k")?;
    let net = build_net(spec, k, budget_of(config))?;
    print_all(&[line(&NetRecord {
        points: net.points.iter().map(|p| group.format_elem(p)).collect(),
    })?]);
    Ok(Outcome::Done)
}

fn stream_of<G: OrderedGroup>(
    spec: &SumSpec<G>,
    config: &RunConfig,
    command: &'static str,
) -> Result<ElementStream<G>, CliError> {
    let name = need(&config.order, command, "order")?;
    let order =
        StreamOrder::parse(name).ok_or_else(|| CliError::UnknownOrder(name.to_string()))?;
    Ok(ElementStream::new(spec.clone(), order))
}

fn cmd_accum<G: OrderedGroup>(spec: &SumSpec<G>, config: &RunConfig) -> Result<Outcome, CliError> {
    let group = spec.group();
    let stream = stream_of(spec, config, "accum")?;
    let samples = config.samples.unwrap_or(64);
    let depth = config.depth.unwrap_or(32);
    match find_accumulation_point(&stream, samples, depth)? {
        AccumulationOutcome::Found(p) => {
            print_all(&[line(&AccumRecord {
                point: group.format_elem(&p),
                samples,
                depth,
            })?]);
            Ok(Outcome::Done)
        }
        AccumulationOutcome::NoneFound => {
            print_all(&[line(&NoneFoundRecord {
                outcome: "NONE_FOUND",
                samples,
            })?]);
            Ok(Outcome::NotFound)
        }
    }
}

fn cmd_decseq<G: OrderedGroup>(spec: &SumSpec<G>, config: &RunConfig) -> Result<Outcome, CliError> {
    let group = spec.group();
    let stream = stream_of(spec, config, "decseq")?;
    let point = group.parse_elem(need(&config.point, "decseq", "point")?)?;
    let length = *need(&config.length, "decseq", "length")?;
    let outcome = extract_decreasing(&stream, &point, length, budget_of(config));
    let (trace, tag, exit) = match &outcome {
        ExtractOutcome::Complete(t) => (t, "COMPLETE", Outcome::Done),
        ExtractOutcome::BudgetExhausted(t) => (t, "BUDGET_EXHAUSTED", Outcome::NotFound),
    };
    let mut lines = Vec::with_capacity(trace.terms.len() + 1);
    for term in &trace.terms {
        lines.push(line(&TraceTermRecord {
            value: group.format_elem(&term.value),
            terms: term
                .witness
                .terms
                .iter()
                .map(|t| group.format_elem(t))
                .collect(),
        })?);
    }
    lines.push(line(&TraceSummaryRecord {
        point: group.format_elem(&trace.point),
        requested: trace.requested,
        emitted: trace.terms.len(),
        outcome: tag,
    })?);
    print_all(&lines);
    Ok(exit)
}

fn cmd_belowcensus<G: OrderedGroup>(
    spec: &SumSpec<G>,
    config: &RunConfig,
) -> Result<Outcome, CliError> {
    let group = spec.group();
    let point = group.parse_elem(need(&config.point, "belowcensus", "point")?)?;
    let eta = parse_rational("rationals", need(&config.eta, "belowcensus", "eta")?)?;
    let schedule = need(&config.schedule, "belowcensus", "schedule")?;
    let side = config.side.as_deref().unwrap_or("below");
    let budget = budget_of(config);
    let (counts, tag) = match side {
        "below" => (
            below_accumulation_census(spec, &point, &eta, schedule, budget)?,
            "below",
        ),
        "above" => (
            above_accumulation_census(spec, &point, &eta, schedule, budget)?,
            "above",
        ),
        other => return Err(CliError::UnknownSide(other.to_string())),
    };
    print_all(&[line(&IntervalCensusRecord {
        point: group.format_elem(&point),
        eta: eta.to_string(),
        side: tag,
        schedule: schedule.clone(),
        counts,
    })?]);
    Ok(Outcome::Done)
}

fn cmd_validate<G: OrderedGroup>(
    spec: &SumSpec<G>,
    config: &RunConfig,
) -> Result<Outcome, CliError> {
    let depth = config.k_max.unwrap_or(16);
    let mut lines = Vec::with_capacity(spec.arity());
    let mut failed = 0;
    for set in spec.sets() {
        let report = validate_lcf0(set, depth);
        let violation = report
            .first_violation
            .as_ref()
            .map(|v| format!("{:?} at k={} ({})", v.kind, v.k, v.witness));
        if violation.is_some() {
            failed += 1;
        }
        lines.push(line(&ValidateRecord {
            set: report.set,
            depth: report.depth,
            outcome: if violation.is_some() { "FAIL" } else { "PASS" },
            violation,
        })?);
    }
    print_all(&lines);
    if failed > 0 {
        return Err(CliError::ValidationFailed {
            failed,
            total: spec.arity(),
        });
    }
    Ok(Outcome::Done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_strings_parse() {
        assert_eq!(parse_schedule("3,6,9,12").unwrap(), vec![3, 6, 9, 12]);
        assert_eq!(parse_schedule("4, 6, 8").unwrap(), vec![4, 6, 8]);
        assert!(matches!(
            parse_schedule("3,x"),
            Err(CliError::BadSchedule(_))
        ));
    }

    #[test]
    fn run_config_rejects_unknown_fields() {
        let err = serde_json::from_str::<RunConfig>(
            r#"{"group":"rationals","sets":[],"targets":"1"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("targets"));
    }

    #[test]
    fn run_config_accepts_minimal_form() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"group":"integers","sets":[{"kind":"finite","elements":["1"]}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.group, "integers");
        assert_eq!(cfg.sets.len(), 1);
        assert!(cfg.target.is_none());
    }
}
