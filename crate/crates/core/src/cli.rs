//! Batch experiment runner behind the `pbv` binary.
//!
//! Every run emits one document: a schema id, the library version, the full
//! configuration echo, the seed, the command result and the wall time.
//! Everything except `wall_time_ms` is a pure function of the
//! configuration.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::adversary::{classical_pipeline, quantum_pipeline, ExperimentReport};
use crate::analytics::{
    classical_guess_bound, classical_guess_exact, count_consistent_keysets, prob_all_keys,
    uniform_distinct_guess, uniform_multiset_guess, EnumerationOptions,
};
use crate::error::{Error, Result};
use crate::exact::ExactProbability;
use crate::keyspace::{multiplicity, rq_profile, KeySet};
use crate::rng;
use crate::simulator::{build_circuit, chi_square, run_circuit_with, OraclePath, DEFAULT_MAX_QUBITS};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest register whose amplitudes `simulate --dump-state` prints.
pub const MAX_DUMP_QUBITS: usize = 12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pbv", version, about = "Multi-key Bernstein-Vazirani simulator and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exact data-register distribution of the circuit.
    Simulate(CommonArgs),
    /// Seeded measurement histogram with a goodness-of-fit test.
    Sample(CommonArgs),
    /// Recovery probabilities, r_q profile and classical guessing odds.
    Analyze(CommonArgs),
    /// Quantum repeated measurement versus classical estimate-and-guess.
    Adversary(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Sample(_) => "sample",
            Command::Analyze(_) => "analyze",
            Command::Adversary(_) => "adversary",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a) | Command::Sample(a) | Command::Analyze(a) | Command::Adversary(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleChoice {
    Gate,
    Fast,
}

impl From<OracleChoice> for OraclePath {
    fn from(c: OracleChoice) -> Self {
        match c {
            OracleChoice::Gate => OraclePath::Gate,
            OracleChoice::Fast => OraclePath::Fast,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Comma-separated MSB-first keys, e.g. 011,101
    #[arg(long)]
    pub keys: Option<String>,
    /// Key width; checked against --keys when both are given
    #[arg(long)]
    pub n: Option<usize>,
    /// Key count or range for analyze (3, 2..6, 2,4)
    #[arg(long)]
    pub k: Option<String>,
    /// Query count or range (analyze); circuit executions per run (adversary)
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long, default_value_t = 1024)]
    pub shots: u64,
    /// Independent runs for adversary experiments
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// RNG seed; drawn at random and reported when omitted
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "oracle-path", value_enum, default_value_t = OracleChoice::Gate)]
    pub oracle_path: OracleChoice,
    /// List every consistent key multiset (analyze)
    #[arg(long)]
    pub enumerate: bool,
    /// Include full-register amplitudes (simulate, at most 12 qubits)
    #[arg(long = "dump-state")]
    pub dump_state: bool,
    /// Let the classical guesser consider repeated keys (adversary)
    #[arg(long = "allow-duplicates")]
    pub allow_duplicates: bool,
}

/// Configuration echo embedded in every document.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: &'static str,
    #[serde(flatten)]
    pub args: CommonArgs,
}

#[derive(Debug, Clone, Serialize)]
struct Document {
    schema: String,
    version: &'static str,
    config: ExperimentConfig,
    seed: u64,
    rng: &'static str,
    result: Value,
    wall_time_ms: f64,
}

/// One command's outcome in all three renderings.
#[derive(Debug, Clone)]
pub struct Report {
    pub result: Value,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    pub text: String,
}

/// `{formula, inputs, numerator, denominator, value}` record.
#[derive(Debug, Clone, Serialize)]
pub struct FormulaResult {
    pub formula: &'static str,
    pub inputs: Value,
    #[serde(flatten)]
    pub probability: ExactProbability,
}

fn formula(formula: &'static str, inputs: Value, probability: ExactProbability) -> FormulaResult {
    FormulaResult {
        formula,
        inputs,
        probability,
    }
}

/// Parses `3`, `2..6` (inclusive), `2..=6` or `2,4,5`.
pub fn parse_range(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    let bad = || Error::input(format!("invalid range {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| bad()))
        .collect()
}

fn parse_keys(args: &CommonArgs) -> Result<Option<KeySet>> {
    let Some(list) = &args.keys else {
        return Ok(None);
    };
    let keys = KeySet::parse_list(list)?;
    if let Some(n) = args.n {
        if n != keys.width() {
            return Err(Error::LengthMismatch {
                expected: n,
                found: keys.width(),
            });
        }
    }
    Ok(Some(keys))
}

fn require_keys(args: &CommonArgs) -> Result<KeySet> {
    parse_keys(args)?.ok_or_else(|| Error::input("--keys is required for this command"))
}

fn fmt_prob(p: f64) -> String {
    format!("{p:.6}")
}

pub fn cmd_simulate(args: &CommonArgs) -> Result<Report> {
    let keys = require_keys(args)?;
    let path: OraclePath = args.oracle_path.into();
    let spec = build_circuit(&keys)?;
    if args.dump_state && spec.total_qubits() > MAX_DUMP_QUBITS {
        return Err(Error::capacity(format!(
            "state dump limited to {MAX_DUMP_QUBITS} qubits, circuit has {}",
            spec.total_qubits()
        )));
    }
    let output = run_circuit_with(&keys, path, DEFAULT_MAX_QUBITS)?;
    let dist = output.exact_distribution()?;
    let rows: Vec<(String, f64)> = dist
        .support()
        .map(|(x, p)| (dist.outcome(x).to_string(), p))
        .collect();
    let mut result = json!({
        "keys": keys.to_string(),
        "n": keys.width(),
        "k": keys.len(),
        "qubits": {
            "total": spec.total_qubits(),
            "data": spec.layout.data,
            "target": 1,
            "control": spec.layout.controls,
        },
        "oracle_path": path,
        "distribution": rows.iter().map(|(o, p)| json!({"outcome": o, "probability": p})).collect::<Vec<_>>(),
        "total_probability": dist.total(),
    });
    if args.dump_state {
        let total = spec.total_qubits();
        result["gates"] = json!(spec.gates.iter().map(ToString::to_string).collect::<Vec<_>>());
        result["amplitudes"] = output
            .state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > crate::simulator::SUPPORT_EPSILON * 1e-6)
            .map(|(i, a)| json!({"basis": format!("{i:0total$b}"), "re": a.re, "im": a.im}))
            .collect();
    }
    let mut text = format!(
        "keys {keys}  (n = {}, k = {}, {} qubits, {} oracle)\n\noutcome  probability\n",
        keys.width(),
        keys.len(),
        spec.total_qubits(),
        if path == OraclePath::Gate { "gate" } else { "fast" }
    );
    for (o, p) in &rows {
        let _ = writeln!(text, "{o:<8} {}", fmt_prob(*p));
    }
    Ok(Report {
        result,
        csv_header: vec!["outcome", "probability"],
        csv_rows: rows.into_iter().map(|(o, p)| vec![o, p.to_string()]).collect(),
        text,
    })
}

pub fn cmd_sample(args: &CommonArgs, seed: u64) -> Result<Report> {
    let keys = require_keys(args)?;
    let output = run_circuit_with(&keys, args.oracle_path.into(), DEFAULT_MAX_QUBITS)?;
    let dist = output.exact_distribution()?;
    let hist = output.measure(args.shots, &mut rng::seeded(seed))?;
    let chi = chi_square(&hist, &dist);
    let mut outcomes: Vec<u64> = dist.support().map(|(x, _)| x).collect();
    outcomes.extend(hist.counts().map(|(x, _)| x));
    outcomes.sort_unstable();
    outcomes.dedup();
    let rows: Vec<(String, u64, f64, f64)> = outcomes
        .iter()
        .map(|&x| {
            (
                dist.outcome(x).to_string(),
                hist.count(x),
                hist.frequency(x),
                dist.probability(x),
            )
        })
        .collect();
    let notice = if chi.is_none() {
        Some("chi-square omitted: needs at least 2 shots and 2 possible outcomes")
    } else {
        None
    };
    let result = json!({
        "keys": keys.to_string(),
        "shots": hist.shots(),
        "counts": rows.iter().map(|(o, c, f, e)| json!({
            "outcome": o, "count": c, "probability": f, "exact_probability": e
        })).collect::<Vec<_>>(),
        "chi_square": chi,
        "notice": notice,
    });
    let mut text = format!("keys {keys}  shots {}\n\noutcome  count  empirical  exact\n", hist.shots());
    for (o, c, f, e) in &rows {
        let _ = writeln!(text, "{o:<8} {c:>5}  {}   {}", fmt_prob(*f), fmt_prob(*e));
    }
    match chi {
        Some(c) => {
            let _ = writeln!(
                text,
                "\nchi-square {:.4} on {} dof, p = {:.4}",
                c.statistic, c.degrees_of_freedom, c.p_value
            );
        }
        None => {
            let _ = writeln!(text, "\n{}", notice.unwrap_or_default());
        }
    }
    Ok(Report {
        result,
        csv_header: vec!["outcome", "count", "probability", "exact_probability"],
        csv_rows: rows
            .into_iter()
            .map(|(o, c, f, e)| vec![o, c.to_string(), f.to_string(), e.to_string()])
            .collect(),
        text,
    })
}

pub fn cmd_analyze(args: &CommonArgs) -> Result<Report> {
    let keys = parse_keys(args)?;
    let ks: Vec<u64> = match (&args.k, &keys) {
        (Some(k), _) => parse_range(k)?,
        (None, Some(keys)) => vec![keys.len() as u64],
        (None, None) => return Err(Error::input("analyze needs --keys or --k")),
    };
    if ks.contains(&0) {
        return Err(Error::input("k must be at least 1"));
    }
    let max_k = ks.iter().copied().max().unwrap_or(1);
    let ms = match &args.m {
        Some(m) => parse_range(m)?,
        None => (1..=3 * max_k).collect(),
    };
    let mut grid = Vec::new();
    let mut csv_rows = Vec::new();
    let mut text = String::from("P(k, m): probability that m draws reveal all k keys\n\n   k    m  value       exact\n");
    for &k in &ks {
        for &m in &ms {
            let p = prob_all_keys(k, m)?.probability;
            csv_rows.push(vec![
                "all-keys-recovery".to_string(),
                k.to_string(),
                m.to_string(),
                p.numer().to_string(),
                p.denom().to_string(),
                p.to_f64().to_string(),
            ]);
            let _ = writeln!(text, "{k:>4} {m:>4}  {}    {p}", fmt_prob(p.to_f64()));
            grid.push(formula("all-keys-recovery", json!({"k": k, "m": m}), p));
        }
    }
    let mut result = json!({ "recovery": grid });

    if let Some(keys) = &keys {
        let k = keys.len();
        let profile = rq_profile(keys);
        let mult = multiplicity(keys);
        let opts = EnumerationOptions {
            keep_multisets: args.enumerate,
            ..Default::default()
        };
        let count = count_consistent_keysets(&profile, k, opts)?;
        let bound = classical_guess_bound(&profile, k)?;
        let exact = classical_guess_exact(keys);
        let uniform_distinct = uniform_distinct_guess(&count);
        let uniform_all = uniform_multiset_guess(&count);
        let kv = json!({"keys": keys.to_string()});
        let probabilities = vec![
            formula("classical-guess-bound", kv.clone(), bound.clone()),
            formula("classical-guess-exact", kv.clone(), exact.clone()),
            formula("uniform-distinct-set-guess", kv.clone(), uniform_distinct.clone()),
            formula("uniform-multiset-guess", kv, uniform_all.clone()),
        ];
        for p in &probabilities {
            csv_rows.push(vec![
                p.formula.to_string(),
                k.to_string(),
                String::new(),
                p.probability.numer().to_string(),
                p.probability.denom().to_string(),
                p.probability.to_f64().to_string(),
            ]);
        }
        result["keys"] = json!({
            "keys": keys.to_string(),
            "n": keys.width(),
            "k": k,
            "rq_profile": profile,
            "distinct_keys": mult.distinct_count(),
            "multiplicities": mult.counts,
            "permutations": mult.permutations.to_string(),
            "ordered_count": count.ordered_count.to_string(),
            "multiset_count": count.multiset_count,
            "distinct_keyset_count": count.distinct_keyset_count,
            "probabilities": probabilities,
        });
        if let Some(list) = &count.multisets {
            result["keys"]["multisets"] = json!(list);
        }
        let _ = write!(
            text,
            "\nkeys {keys}\nr_q profile (MSB first)   {:?}\nordered assignments       {}\n\
             consistent multisets      {}\nconsistent distinct sets  {}\n\
             guess bound min(k!/P, 1)  {bound}\nguess exact R/P           {exact}\n\
             uniform over distinct     {uniform_distinct}\nuniform over multisets    {uniform_all}\n",
            profile.msb_first(),
            count.ordered_count,
            count.multiset_count,
            count.distinct_keyset_count,
        );
        if let Some(list) = &count.multisets {
            text.push_str("\nconsistent multisets:\n");
            for m in list {
                let row: Vec<String> = m.keys.iter().map(ToString::to_string).collect();
                let _ = writeln!(text, "  {{{}}}  x{}", row.join(", "), m.assignments);
            }
        }
    }
    Ok(Report {
        result,
        csv_header: vec!["formula", "k", "m", "numerator", "denominator", "value"],
        csv_rows,
        text,
    })
}

pub fn cmd_adversary(args: &CommonArgs, seed: u64) -> Result<Report> {
    let keys = require_keys(args)?;
    let k = keys.len() as u64;
    let n = keys.width() as u64;
    let m = match &args.m {
        Some(text) => match parse_range(text)?.as_slice() {
            [m] => *m,
            _ => return Err(Error::input("adversary takes a single --m budget")),
        },
        None => 1024,
    };
    if args.trials == 0 {
        return Err(Error::input("--trials must be at least 1"));
    }
    // Both sides get at most m oracle interactions per run.
    let trials_per_bit = (m / n).max(1);
    let quantum = quantum_pipeline(&keys, m, args.trials, rng::sub_seed(seed, 0))?;
    let classical = classical_pipeline(
        &keys,
        trials_per_bit,
        args.trials,
        !args.allow_duplicates,
        rng::sub_seed(seed, 1),
    )?;
    let profile = rq_profile(&keys);
    let bound = classical_guess_bound(&profile, keys.len())?;
    let exact = classical_guess_exact(&keys);
    let reports = [&quantum, &classical];
    let mut text = format!("keys {keys}  budget m = {m}  runs = {}\n\n", args.trials);
    text.push_str("strategy                        queries/run  success  predicted\n");
    for r in reports {
        let _ = writeln!(
            text,
            "{:<31} {:>11}  {}  {}",
            r.strategy,
            r.queries_per_run,
            fmt_prob(r.success_rate),
            r.predicted_success.map_or("-".into(), fmt_prob)
        );
    }
    let _ = writeln!(
        text,
        "\nclassical guess bound {bound}, ordered-assignment exact {exact}\nassumption: {}",
        crate::adversary::ASSUMPTION_K_KNOWN
    );
    let csv_rows = reports.iter().map(|r| report_row(r)).collect();
    let result = json!({
        "keys": keys.to_string(),
        "n": n,
        "k": k,
        "budget": m,
        "classical_trials_per_bit": trials_per_bit,
        "quantum": quantum,
        "classical": classical,
        "reference": [
            formula("all-keys-recovery", json!({"k": k, "m": m}), prob_all_keys(k, m)?.probability),
            formula("classical-guess-bound", json!({"keys": keys.to_string()}), bound),
            formula("classical-guess-exact", json!({"keys": keys.to_string()}), exact),
        ],
    });
    Ok(Report {
        result,
        csv_header: vec!["strategy", "queries_per_run", "runs", "successes", "success_rate", "predicted_success"],
        csv_rows,
        text,
    })
}

fn report_row(r: &ExperimentReport) -> Vec<String> {
    vec![
        r.strategy.clone(),
        r.queries_per_run.to_string(),
        r.runs.to_string(),
        r.successes.to_string(),
        r.success_rate.to_string(),
        r.predicted_success.map_or(String::new(), |p| p.to_string()),
    ]
}

fn schema_id(command: &str) -> String {
    format!("pbv.{command}/1")
}

/// Runs a parsed command and renders it in the requested format.
pub fn execute(command: &Command) -> Result<String> {
    let args = command.args();
    let seed = args.seed.unwrap_or_else(rand::random);
    let start = Instant::now();
    let report = match command {
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Sample(a) => cmd_sample(a, seed)?,
        Command::Analyze(a) => cmd_analyze(a)?,
        Command::Adversary(a) => cmd_adversary(a, seed)?,
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let schema = schema_id(command.name());
    let mut config_args = args.clone();
    config_args.seed = Some(seed);
    let config = ExperimentConfig {
        command: command.name(),
        args: config_args,
    };
    Ok(match args.format {
        Format::Json => {
            let doc = Document {
                schema,
                version: VERSION,
                config,
                seed,
                rng: rng::RNG_NAME,
                result: report.result,
                wall_time_ms,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let config_json = serde_json::to_string(&config).expect("config serializes");
            let mut s = format!(
                "# schema={schema} version={VERSION} seed={seed} rng={}\n# config={config_json}\n# wall_time_ms={wall_time_ms:.3}\n",
                rng::RNG_NAME
            );
            if let Some(notice) = report.result.get("notice").and_then(Value::as_str) {
                let _ = writeln!(s, "# notice={notice}");
            }
            s.push_str(&report.csv_header.join(","));
            s.push('\n');
            for row in &report.csv_rows {
                let escaped: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
                s.push_str(&escaped.join(","));
                s.push('\n');
            }
            s
        }
        Format::Text => format!(
            "{}\nseed {seed} ({})  pbv {VERSION}  {wall_time_ms:.1} ms\n",
            report.text,
            rng::RNG_NAME
        ),
    })
}

fn csv_field(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_capacity() {
        EXIT_CAPACITY
    } else {
        EXIT_INPUT
    }
}

/// Parses `argv`, runs the command and writes the document; returns the
/// process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let output = match execute(&cli.command) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.command.args().out {
        Some(path) => std::fs::write(path, output.as_bytes()),
        None => std::io::stdout().write_all(output.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            EXIT_FAILURE
        }
    }
}
