//! The `causal-twin` command line: validate graphs, build twin models,
//! check rule applicability, simulate data, and run the inference paths.
//!
//! Exit codes are a stable contract: 0 success, 1 domain error (invalid
//! graph, latent target, and the like), 2 input or parse error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cpt::{self, CptRowsJson, CptSet};
use crate::data::{DataError, Dataset};
use crate::docalc::{
    interventional_marginal, rule1_applies, rule2_applies, rule3_applies, RuleQuery,
};
use crate::graph::{CausalGraph, GraphSpec, Intervention};
use crate::infer::{
    latent_posterior_predictive, max_pairwise_gap, mc_posterior_predictive, posterior_predictive,
    prior_sensitivity, SensitivityConfig, DEFAULT_BURN, DEFAULT_KEEP,
};
use crate::rng::derive_seed;
use crate::sim::{GroundTruthModel, ModelSpec};
use crate::twin::{causal_bayes_construct, export_dot, validate_twin};

#[derive(Parser, Debug)]
#[command(
    name = "causal-twin",
    version,
    about = "Twin-model construction and Bayesian inference of interventional distributions"
)]
pub struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a graph file and report every violation.
    Validate { graph: PathBuf },
    /// Build the joint pre/post-intervention model for do(VAR=STATE).
    Twin {
        graph: PathBuf,
        #[arg(long = "do", value_name = "VAR=STATE")]
        r#do: String,
        #[arg(long, value_enum, default_value_t = TwinFormat::Dot)]
        format: TwinFormat,
    },
    /// Evaluate rules 1-3 for P(y | do(t), z [, w]).
    Identify {
        graph: PathBuf,
        #[arg(long = "do", value_name = "VAR")]
        r#do: String,
        #[arg(long, value_delimiter = ',', required = true, value_name = "VARS")]
        y: Vec<String>,
        #[arg(long, value_delimiter = ',', value_name = "VARS")]
        z: Vec<String>,
        #[arg(long, value_delimiter = ',', value_name = "VARS")]
        w: Vec<String>,
    },
    /// Sample rows from a ground-truth model file.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long = "do", value_name = "VAR=STATE")]
        r#do: Option<String>,
        #[arg(long, value_delimiter = ',', value_name = "VARS")]
        hide: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path; `-` writes to stdout.
        #[arg(long)]
        out: PathBuf,
    },
    /// Posterior predictive for a post-intervention target.
    Infer {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "do", value_name = "VAR=STATE")]
        r#do: String,
        #[arg(long)]
        target: String,
        /// Prior pseudo-counts (JSON); defaults to 1.0 per cell.
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Monte Carlo draws, or kept sweeps for the Gibbs chain.
        #[arg(long, default_value_t = DEFAULT_KEEP)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_BURN)]
        burn: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ground truth vs Bayesian vs empirical answers across sample sizes.
    Compare { config: PathBuf },
    /// Posterior predictive under two or more priors.
    Sensitivity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "do", value_name = "VAR=STATE")]
        r#do: String,
        #[arg(long)]
        target: String,
        /// Prior file; pass the flag once per prior.
        #[arg(long = "prior", required = true)]
        priors: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BURN)]
        burn: usize,
        #[arg(long, default_value_t = DEFAULT_KEEP)]
        keep: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TwinFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Mc,
    Gibbs,
}

/// Errors carry the exit code split: input problems (unreadable or
/// unparsable files, malformed flags) exit 2, domain problems exit 1.
#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Input(m) => m,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::UnknownColumn(_) | DataError::DuplicateColumn(_) => domain(e),
            other => input(other),
        }
    }
}

impl From<crate::infer::InferError> for CliError {
    fn from(e: crate::infer::InferError) -> Self {
        match e {
            crate::infer::InferError::Data(d) => d.into(),
            other => domain(other),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = String::new();
    match run(&cli, &mut stdout) {
        Ok(()) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            print!("{stdout}");
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

/// Execute a parsed invocation, appending output to `out`.
pub fn run(cli: &Cli, out: &mut String) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { graph } => cmd_validate(graph, cli.json, out),
        Command::Twin { graph, r#do, format } => cmd_twin(graph, r#do, *format, out),
        Command::Identify { graph, r#do, y, z, w } => {
            cmd_identify(graph, r#do, y, z, w, cli.json, out)
        }
        Command::Simulate { model, n, r#do, hide, seed, out: out_path } => {
            cmd_simulate(model, *n, r#do.as_deref(), hide, *seed, out_path, cli.json, out)
        }
        Command::Infer { graph, data, r#do, target, prior, method, samples, burn, seed } => {
            cmd_infer(
                graph, data, r#do, target, prior.as_deref(), *method, *samples, *burn, *seed,
                cli.json, out,
            )
        }
        Command::Compare { config } => cmd_compare(config, cli.json, out),
        Command::Sensitivity { graph, data, r#do, target, priors, burn, keep, seed } => {
            cmd_sensitivity(graph, data, r#do, target, priors, *burn, *keep, *seed, cli.json, out)
        }
    }
}

// ---------------------------------------------------------------------------
// file loading

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_graph_spec(path: &Path) -> Result<GraphSpec, CliError> {
    GraphSpec::from_json(&read_file(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<CausalGraph, CliError> {
    CausalGraph::build(&load_graph_spec(path)?).map_err(domain)
}

fn load_cpt_rows(path: &Path) -> Result<CptRowsJson, CliError> {
    serde_json::from_str(&read_file(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_tables(graph: &CausalGraph, path: &Path) -> Result<CptSet, CliError> {
    cpt::tables_from_json(graph, &load_cpt_rows(path)?).map_err(domain)
}

fn load_priors(graph: &CausalGraph, path: Option<&Path>) -> Result<CptSet, CliError> {
    match path {
        Some(p) => cpt::priors_from_json(graph, &load_cpt_rows(p)?).map_err(domain),
        None => cpt::flat_priors(graph, 1.0).map_err(domain),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    Dataset::read_csv(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse_do(text: &str) -> Result<Intervention, CliError> {
    Intervention::parse(text).map_err(input)
}

fn emit<T: Serialize>(json: bool, report: &T, text: &str, out: &mut String) -> Result<(), CliError> {
    if json {
        let rendered = serde_json::to_string_pretty(report).map_err(input)?;
        out.push_str(&rendered);
        out.push('\n');
    } else {
        out.push_str(text);
    }
    Ok(())
}

fn fmt_probs(probs: &[f64]) -> String {
    let cells: Vec<String> = probs.iter().map(|p| format!("{p:.6}")).collect();
    format!("[{}]", cells.join(", "))
}

// ---------------------------------------------------------------------------
// validate

#[derive(Serialize)]
struct ValidateReport {
    ok: bool,
    nodes: usize,
    edges: usize,
    problems: Vec<String>,
}

fn cmd_validate(path: &Path, json: bool, out: &mut String) -> Result<(), CliError> {
    let spec = load_graph_spec(path)?;
    let problems: Vec<String> = spec.problems().iter().map(|p| p.to_string()).collect();
    let report = ValidateReport {
        ok: problems.is_empty(),
        nodes: spec.nodes.len(),
        edges: spec.edges.len(),
        problems: problems.clone(),
    };
    let mut text = String::new();
    if report.ok {
        let _ = writeln!(text, "ok: {} nodes, {} edges", report.nodes, report.edges);
    } else {
        for p in &problems {
            let _ = writeln!(text, "invalid: {p}");
        }
    }
    emit(json, &report, &text, out)?;
    if report.ok {
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "graph has {} problem(s)",
            problems.len()
        )))
    }
}

// ---------------------------------------------------------------------------
// twin

fn cmd_twin(path: &Path, do_text: &str, format: TwinFormat, out: &mut String) -> Result<(), CliError> {
    let graph = load_graph(path)?;
    let iv = parse_do(do_text)?;
    let twin = causal_bayes_construct(&graph, &iv).map_err(domain)?;
    debug_assert!(validate_twin(&twin).is_valid());
    match format {
        TwinFormat::Dot => out.push_str(&export_dot(&twin)),
        TwinFormat::Json => {
            let rendered = serde_json::to_string_pretty(&twin).map_err(input)?;
            out.push_str(&rendered);
            out.push('\n');
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// identify

#[derive(Serialize)]
struct RuleEntry {
    rule: u8,
    evaluated: bool,
    applies: bool,
    premise: String,
    conclusion: String,
}

#[derive(Serialize)]
struct IdentifyReport {
    query: String,
    rules: Vec<RuleEntry>,
    identified: bool,
}

fn set_text(vars: &[String]) -> String {
    format!("{{{}}}", vars.join(", "))
}

fn cmd_identify(
    path: &Path,
    target: &str,
    y: &[String],
    z: &[String],
    w: &[String],
    json: bool,
    out: &mut String,
) -> Result<(), CliError> {
    let graph = load_graph(path)?;
    let query = RuleQuery {
        y: y.to_vec(),
        t: target.to_owned(),
        z: z.to_vec(),
        w: w.to_vec(),
    };
    let y_txt = set_text(y);
    let z_txt = set_text(z);
    let w_txt = set_text(w);
    let mut given = z.join(", ");
    let mut rules = Vec::new();

    // Rule 1 compares against the query extended with W, so it is only
    // meaningful when a W set was supplied.
    let rule1 = if w.is_empty() {
        RuleEntry {
            rule: 1,
            evaluated: false,
            applies: false,
            premise: "no W set supplied".into(),
            conclusion: String::new(),
        }
    } else {
        let applies = rule1_applies(&graph, &query).map_err(domain)?;
        let mut zt = z.to_vec();
        zt.push(target.to_owned());
        RuleEntry {
            rule: 1,
            evaluated: true,
            applies,
            premise: format!(
                "{y_txt} ⊥ {w_txt} | {} in G with edges into {target} removed",
                set_text(&zt)
            ),
            conclusion: format!(
                "P({y} | do({target}), {z}, {w}) = P({y} | do({target}), {z})",
                y = y.join(", "),
                z = z.join(", "),
                w = w.join(", ")
            ),
        }
    };
    rules.push(rule1);

    let applies2 = rule2_applies(&graph, &query).map_err(domain)?;
    if !given.is_empty() {
        given = format!("{given}, ");
    }
    rules.push(RuleEntry {
        rule: 2,
        evaluated: true,
        applies: applies2,
        premise: format!(
            "{y_txt} ⊥ {{{target}}} | {z_txt} in G with edges out of {target} removed"
        ),
        conclusion: format!(
            "P({y} | do({target}){z}) = P({y} | {given}{target})",
            y = y.join(", "),
            z = if z.is_empty() { String::new() } else { format!(", {}", z.join(", ")) },
        ),
    });

    let applies3 = rule3_applies(&graph, &query).map_err(domain)?;
    rules.push(RuleEntry {
        rule: 3,
        evaluated: true,
        applies: applies3,
        premise: format!(
            "{y_txt} ⊥ {{{target}}} | {z_txt} in G with edges into {target} removed, and {z_txt} holds no descendant of {target}"
        ),
        conclusion: format!(
            "P({y} | do({target}){z}) = P({y}{z})",
            y = y.join(", "),
            z = if z.is_empty() { String::new() } else { format!(", {}", z.join(", ")) },
        ),
    });

    let identified = rules.iter().any(|r| r.evaluated && r.applies);
    let report = IdentifyReport {
        query: format!(
            "P({} | do({}){})",
            y.join(", "),
            target,
            if z.is_empty() { String::new() } else { format!(", {}", z.join(", ")) }
        ),
        rules,
        identified,
    };

    let mut text = String::new();
    let _ = writeln!(text, "query: {}", report.query);
    for r in &report.rules {
        if !r.evaluated {
            let _ = writeln!(text, "rule {}: not evaluated ({})", r.rule, r.premise);
        } else if r.applies {
            let _ = writeln!(text, "rule {}: applies — {}", r.rule, r.premise);
            let _ = writeln!(text, "        {}", r.conclusion);
        } else {
            let _ = writeln!(text, "rule {}: does not apply — {} fails", r.rule, r.premise);
        }
    }
    if !report.identified {
        let _ = writeln!(text, "not identified by Rules 1-3");
    }
    emit(json, &report, &text, out)
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct SimulateReport {
    rows: usize,
    columns: Vec<String>,
    out: String,
    seed: u64,
    intervention: Option<String>,
    hidden: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model_path: &Path,
    n: usize,
    do_text: Option<&str>,
    hide: &[String],
    seed: u64,
    out_path: &Path,
    json: bool,
    out: &mut String,
) -> Result<(), CliError> {
    let spec: ModelSpec = serde_json::from_str(&read_file(model_path)?)
        .map_err(|e| input(format!("{}: {e}", model_path.display())))?;
    let model = GroundTruthModel::from_spec(&spec).map_err(domain)?;
    let iv = do_text.map(parse_do).transpose()?;
    let mut data = match &iv {
        Some(iv) => model.interventional_sample(iv, n, seed).map_err(domain)?,
        None => model.forward_sample(n, seed),
    };
    if !hide.is_empty() {
        let names: Vec<&str> = hide.iter().map(String::as_str).collect();
        data = data.hide_columns(&names)?;
    }
    if out_path == Path::new("-") {
        out.push_str(&data.to_csv_string());
        return Ok(());
    }
    data.write_csv(out_path)
        .map_err(|e| input(format!("{}: {e}", out_path.display())))?;
    let report = SimulateReport {
        rows: data.n_rows(),
        columns: data.columns().to_vec(),
        out: out_path.display().to_string(),
        seed,
        intervention: iv.map(|i| i.to_string()),
        hidden: hide.to_vec(),
    };
    let text = format!("wrote {} rows to {}\n", report.rows, report.out);
    emit(json, &report, &text, out)
}

// ---------------------------------------------------------------------------
// infer

#[derive(Serialize)]
struct InferReport {
    method: Method,
    target: String,
    intervention: String,
    m: usize,
    states: Vec<f64>,
    std_error: Option<Vec<f64>>,
    spread: Option<Vec<f64>>,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_infer(
    graph_path: &Path,
    data_path: &Path,
    do_text: &str,
    target: &str,
    prior_path: Option<&Path>,
    method: Method,
    samples: usize,
    burn: usize,
    seed: u64,
    json: bool,
    out: &mut String,
) -> Result<(), CliError> {
    let graph = load_graph(graph_path)?;
    let data = load_dataset(data_path)?;
    let priors = load_priors(&graph, prior_path)?;
    let iv = parse_do(do_text)?;
    let m = data.n_rows();
    let (dist, std_error, spread) = match method {
        Method::Exact => {
            let d = posterior_predictive(&graph, &data, &priors, &iv, target)?;
            (d, None, None)
        }
        Method::Mc => {
            let mc = mc_posterior_predictive(&graph, &data, &priors, &iv, target, samples, seed)?;
            (mc.distribution, Some(mc.std_error), None)
        }
        Method::Gibbs => {
            let gp =
                latent_posterior_predictive(&graph, &data, &priors, &iv, target, burn, samples, seed)?;
            (gp.distribution, None, Some(gp.spread))
        }
    };
    let report = InferReport {
        method,
        target: target.to_owned(),
        intervention: iv.to_string(),
        m,
        states: dist.table().to_vec(),
        std_error,
        spread,
        seed,
    };
    let mut text = format!(
        "P({}* | data, {}) = {}   (M = {})\n",
        target,
        iv,
        fmt_probs(&report.states),
        m
    );
    if let Some(se) = &report.std_error {
        let _ = writeln!(text, "std error     = {}", fmt_probs(se));
    }
    if let Some(sp) = &report.spread {
        let _ = writeln!(text, "posterior sd  = {}", fmt_probs(sp));
    }
    emit(json, &report, &text, out)
}

// ---------------------------------------------------------------------------
// compare

/// Experiment file for `compare`: everything needed to reproduce the
/// ground-truth / Bayesian / empirical three-way table.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub graph: PathBuf,
    pub ground_truth: PathBuf,
    /// Prior label to prior file; empty means a single flat prior.
    #[serde(default)]
    pub priors: BTreeMap<String, PathBuf>,
    pub r#do: String,
    pub target: String,
    pub sample_sizes: Vec<usize>,
    pub seed: u64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_burn")]
    pub burn: usize,
    #[serde(default = "default_keep")]
    pub keep: usize,
}

fn default_method() -> Method {
    Method::Exact
}

fn default_mc_samples() -> usize {
    50_000
}

fn default_burn() -> usize {
    DEFAULT_BURN
}

fn default_keep() -> usize {
    DEFAULT_KEEP
}

#[derive(Serialize)]
struct CompareRow {
    m: usize,
    bayes: BTreeMap<String, Vec<f64>>,
    bayes_gap: BTreeMap<String, f64>,
    empirical: Option<Vec<f64>>,
    empirical_gap: Option<f64>,
}

#[derive(Serialize)]
struct CompareReport {
    target: String,
    intervention: String,
    truth: Vec<f64>,
    rows: Vec<CompareRow>,
    seed: u64,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

fn cmd_compare(config_path: &Path, json: bool, out: &mut String) -> Result<(), CliError> {
    let cfg: CompareConfig = serde_json::from_str(&read_file(config_path)?)
        .map_err(|e| input(format!("{}: {e}", config_path.display())))?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_owned();

    let graph = load_graph(&resolve(&base, &cfg.graph))?;
    let truth_cpts = load_tables(&graph, &resolve(&base, &cfg.ground_truth))?;
    let model = GroundTruthModel::new(graph.clone(), truth_cpts.clone()).map_err(domain)?;
    let iv = parse_do(&cfg.r#do)?;
    if cfg.target == iv.target {
        return Err(CliError::Domain(format!(
            "target `{}` equals the intervention variable",
            cfg.target
        )));
    }
    let mut priors: Vec<(String, CptSet)> = Vec::new();
    if cfg.priors.is_empty() {
        priors.push(("flat".into(), cpt::flat_priors(&graph, 1.0).map_err(domain)?));
    } else {
        for (label, path) in &cfg.priors {
            priors.push((label.clone(), load_priors(&graph, Some(&resolve(&base, path)))?));
        }
    }

    let truth = interventional_marginal(&graph, &truth_cpts, &iv, &cfg.target).map_err(domain)?;
    let y_card = truth.table().len();

    let mut rows = Vec::new();
    for (i, &m) in cfg.sample_sizes.iter().enumerate() {
        // Per-row streams: 3i for the observational draw, 3i+1 for the
        // interventional draw, 3i+2 for Monte Carlo inference.
        let obs = model.forward_sample(m, derive_seed(cfg.seed, 3 * i as u64));
        let int = model
            .interventional_sample(&iv, m, derive_seed(cfg.seed, 3 * i as u64 + 1))
            .map_err(domain)?;

        let mut bayes = BTreeMap::new();
        let mut bayes_gap = BTreeMap::new();
        for (label, prior) in &priors {
            let infer_seed = derive_seed(cfg.seed, 3 * i as u64 + 2);
            let d = match cfg.method {
                Method::Exact => posterior_predictive(&graph, &obs, prior, &iv, &cfg.target)?,
                Method::Mc => {
                    mc_posterior_predictive(
                        &graph,
                        &obs,
                        prior,
                        &iv,
                        &cfg.target,
                        cfg.mc_samples,
                        infer_seed,
                    )?
                    .distribution
                }
                Method::Gibbs => {
                    // Latent columns are unobserved by definition; blank them
                    // before handing the sample to the chain.
                    let latent: Vec<&str> = graph
                        .names()
                        .iter()
                        .enumerate()
                        .filter(|&(id, _)| graph.is_latent(id))
                        .map(|(_, n)| n.as_str())
                        .collect();
                    let masked = obs.hide_columns(&latent)?;
                    latent_posterior_predictive(
                        &graph,
                        &masked,
                        prior,
                        &iv,
                        &cfg.target,
                        cfg.burn,
                        cfg.keep,
                        infer_seed,
                    )?
                    .distribution
                }
            };
            bayes_gap.insert(label.clone(), d.max_abs_diff(&truth));
            bayes.insert(label.clone(), d.table().to_vec());
        }

        let (empirical, empirical_gap) = if m == 0 {
            (None, None)
        } else {
            let col = int.column_index(&cfg.target)?;
            let mut freq = vec![0.0; y_card];
            for row in int.rows() {
                if let Some(v) = row[col] {
                    freq[v as usize] += 1.0;
                }
            }
            for f in &mut freq {
                *f /= m as f64;
            }
            let gap = freq
                .iter()
                .zip(truth.table())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            (Some(freq), Some(gap))
        };

        rows.push(CompareRow {
            m,
            bayes,
            bayes_gap,
            empirical,
            empirical_gap,
        });
    }

    let report = CompareReport {
        target: cfg.target.clone(),
        intervention: iv.to_string(),
        truth: truth.table().to_vec(),
        rows,
        seed: cfg.seed,
    };

    let mut text = String::new();
    let _ = writeln!(
        text,
        "truth   P({}* | {}) = {}",
        report.target,
        report.intervention,
        fmt_probs(&report.truth)
    );
    for row in &report.rows {
        let _ = writeln!(text, "M = {}", row.m);
        for (label, d) in &row.bayes {
            let _ = writeln!(
                text,
                "  bayes[{label}]     = {}   gap = {:.6}",
                fmt_probs(d),
                row.bayes_gap[label]
            );
        }
        match (&row.empirical, row.empirical_gap) {
            (Some(freq), Some(gap)) => {
                let _ = writeln!(text, "  empirical do()  = {}   gap = {gap:.6}", fmt_probs(freq));
            }
            _ => {
                let _ = writeln!(text, "  empirical do()  = n/a (no samples)");
            }
        }
    }
    emit(json, &report, &text, out)
}

// ---------------------------------------------------------------------------
// sensitivity

#[derive(Serialize)]
struct SensitivityReport {
    target: String,
    intervention: String,
    results: Vec<(String, Vec<f64>)>,
    max_pairwise_gap: f64,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_sensitivity(
    graph_path: &Path,
    data_path: &Path,
    do_text: &str,
    target: &str,
    prior_paths: &[PathBuf],
    burn: usize,
    keep: usize,
    seed: u64,
    json: bool,
    out: &mut String,
) -> Result<(), CliError> {
    let graph = load_graph(graph_path)?;
    let data = load_dataset(data_path)?;
    let iv = parse_do(do_text)?;
    let mut priors = Vec::new();
    for path in prior_paths {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        priors.push((label, load_priors(&graph, Some(path))?));
    }
    let cfg = SensitivityConfig {
        n_burn: burn,
        n_keep: keep,
        seed,
    };
    let results = prior_sensitivity(&graph, &data, &priors, &iv, target, &cfg)?;
    let gap = max_pairwise_gap(&results);
    let report = SensitivityReport {
        target: target.to_owned(),
        intervention: iv.to_string(),
        results: results
            .iter()
            .map(|(label, d)| (label.clone(), d.table().to_vec()))
            .collect(),
        max_pairwise_gap: gap,
        seed,
    };
    let mut text = String::new();
    for (label, states) in &report.results {
        let _ = writeln!(text, "{label:<16} P({target}*) = {}", fmt_probs(states));
    }
    let _ = writeln!(text, "max pairwise gap = {gap:.6}");
    emit(json, &report, &text, out)
}
