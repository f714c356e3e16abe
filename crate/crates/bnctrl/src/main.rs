//! Command-line front end for the attractor-control pipeline. Every command
//! takes `--seed` and writes its primary outputs as files under `--out`, so
//! identical invocations produce byte-identical results.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 capacity
//! refusal, 4 empty result (nothing misaligned, or no strategy exists).

use bnctrl::agent::{train, ActionSpace, AgentError, BdqAgent, ControlEnvironment};
use bnctrl::bn::{parse_bnet, BooleanNetwork, HexError, ModelError, NetworkState, ParseError};
use bnctrl::config::{ConfigError, RunConfig};
use bnctrl::dynamics::{simulate, RecordMode};
use bnctrl::evaluation::{compare_to_oracle, evaluate, GapReport};
use bnctrl::exact::{
    acpl_reference, attractors_exact, min_control_oracle, pseudo_attractor_exact,
    stationary_distribution, AcplCondition, AcplInputs, BasinMap, BasinMode, ExactError,
    ExplicitStg,
};
use bnctrl::neural::{load_checkpoint, save_checkpoint, BdqArch, NeuralError};
use bnctrl::pasip::{phase1_scan, PaRegistry, PasipError, RegistryError};
use bnctrl::RngStream;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bnctrl", version, about = "Attractor analysis and learned control for asynchronous Boolean networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact attractors with stationary distributions and pseudo-attractor states
    Attractors(CommonArgs),
    /// Simulation-based pseudo-attractor scan; writes a registry file
    Pasip(CommonArgs),
    /// Exact shortest control strategies from misaligned attractors
    Oracle(OracleArgs),
    /// Train a control agent; writes checkpoint, registry, and training log
    Train(CommonArgs),
    /// Greedy rollouts of a trained checkpoint against the registry
    Evaluate(EvaluateArgs),
    /// Asynchronous random walk; writes per-state visit counts
    Simulate(SimulateArgs),
    /// Validate a configuration file or print the canonical form
    Config(ConfigArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// BoolNet model file
    #[arg(long)]
    model: Option<PathBuf>,
    /// Environmental condition, e.g. 'x1=0, x5=1'
    #[arg(long)]
    env: Option<String>,
    /// Target configuration, e.g. 'x2=0'
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// State-count cap for explicit analysis
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest simultaneous flip set considered
    #[arg(long)]
    max_flips: Option<usize>,
    /// Analyze one source state (hex) instead of every misaligned attractor
    #[arg(long)]
    source: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trained checkpoint (default: <out>/checkpoint.bin)
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Registry file (default: <out>/registry.json)
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Rollouts per source
    #[arg(long)]
    repeats: Option<u32>,
    /// Compare against exact minima when the model fits under the cap
    #[arg(long)]
    with_oracle: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Update steps to simulate
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    /// Start state (hex); default draws free nodes uniformly
    #[arg(long)]
    start: Option<String>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file to validate
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the canonical configuration (defaults overlaid with the file)
    #[arg(long)]
    dump: bool,
}

enum CliError {
    Usage(String),
    Capacity(String),
    Empty(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Empty(_) => 4,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Capacity(m)
            | CliError::Empty(m)
            | CliError::Internal(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<HexError> for CliError {
    fn from(e: HexError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::TooLarge { .. } => CliError::Capacity(e.to_string()),
            ExactError::Model(m) => CliError::Usage(m.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<PasipError> for CliError {
    fn from(e: PasipError) -> Self {
        match e {
            PasipError::BadConfig(_) | PasipError::Model(_) => CliError::Usage(e.to_string()),
            PasipError::EvolveBudget { .. } => CliError::Internal(e.to_string()),
        }
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::NonFinite(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AgentError> for CliError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::AllAligned => CliError::Empty(e.to_string()),
            AgentError::Pasip(p) => p.into(),
            AgentError::Neural(n) => n.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Attractors(a) => cmd_attractors(&a),
        Cmd::Pasip(a) => cmd_pasip(&a),
        Cmd::Oracle(a) => cmd_oracle(&a),
        Cmd::Train(a) => cmd_train(&a),
        Cmd::Evaluate(a) => cmd_evaluate(&a),
        Cmd::Simulate(a) => cmd_simulate(&a),
        Cmd::Config(a) => cmd_config(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// Wrapped so flag-based invocations work without a file; file errors are
/// reported where the config is first used.
fn load_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::parse(&read_text(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &args.model {
        cfg.model.path = m.display().to_string();
    }
    if let Some(e) = &args.env {
        cfg.model.env = e.clone();
    }
    if let Some(t) = &args.target {
        cfg.model.target = t.clone();
    }
    if let Some(s) = args.seed {
        cfg.run.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.run.out = o.display().to_string();
    }
    if let Some(c) = args.cap {
        cfg.run.cap = c;
    }
    Ok(cfg)
}

fn read_text(p: &Path) -> Result<String, CliError> {
    fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
}

fn write_text(p: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = p.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(p, text).map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))
}

fn write_bytes_dir(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.run.out)
        .map_err(|e| CliError::Internal(format!("{}: {e}", cfg.run.out)))
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    Path::new(&cfg.run.out).join(name)
}

fn load_model(cfg: &RunConfig) -> Result<BooleanNetwork, CliError> {
    if cfg.model.path.is_empty() {
        return Err(CliError::Usage(
            "no model given; pass --model or set path under [model]".to_string(),
        ));
    }
    Ok(parse_bnet(&read_text(Path::new(&cfg.model.path))?)?)
}

/// Condition name used in report rows; empty conditions print as "none".
fn condition_label(cfg: &RunConfig) -> String {
    if cfg.model.env.trim().is_empty() {
        "none".to_string()
    } else {
        cfg.model.env.clone()
    }
}

fn model_label(cfg: &RunConfig) -> String {
    Path::new(&cfg.model.path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| cfg.model.path.clone())
}

fn cmd_attractors(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = &load_config(args)?;
    let net = load_model(cfg)?;
    let (env, _) = cfg.resolve_assignments(&net)?;
    let stg = ExplicitStg::build(&net, &env, cfg.run.cap)?;
    let atts = attractors_exact(&stg);
    let mut entries = Vec::with_capacity(atts.len());
    for a in &atts {
        let dist = stationary_distribution(&stg, a)?;
        let pa = pseudo_attractor_exact(&dist);
        entries.push(json!({
            "states": a.states.iter().map(|&s| stg.unpack(s).to_hex()).collect::<Vec<_>>(),
            "size": a.len(),
            "fixed_point": a.fixed_point,
            "stationary": a.states.iter().map(|&s| dist.prob_of(s).unwrap_or(0.0)).collect::<Vec<_>>(),
            "pseudo_attractor": pa.iter().map(|&s| stg.unpack(s).to_hex()).collect::<Vec<_>>(),
        }));
    }
    let doc = json!({
        "model": model_label(cfg),
        "condition": condition_label(cfg),
        "free_nodes": stg.free().len(),
        "n_states": stg.n_states(),
        "attractors": entries,
    });
    let path = out_path(cfg, "attractors.json");
    write_text(&path, &format!("{doc:#}\n"))?;
    println!(
        "{} attractors over {} states -> {}",
        atts.len(),
        stg.n_states(),
        path.display()
    );
    Ok(())
}

fn cmd_pasip(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = &load_config(args)?;
    let net = load_model(cfg)?;
    let (env, _) = cfg.resolve_assignments(&net)?;
    let rng = RngStream::new(cfg.run.seed, "pasip");
    let registry = phase1_scan(&net, &env, &cfg.pasip, &rng)?;
    let path = out_path(cfg, "registry.json");
    write_text(&path, &format!("{}\n", registry.to_json()))?;
    println!(
        "{} pseudo-attractor states -> {}",
        registry.len(),
        path.display()
    );
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let net = load_model(&cfg)?;
    let (env, target) = cfg.resolve_assignments(&net)?;
    if target.is_empty() {
        return Err(CliError::Usage(
            "oracle needs a target configuration; pass --target".to_string(),
        ));
    }
    let max_flips = args.max_flips.unwrap_or(cfg.oracle.max_flips);
    if max_flips == 0 {
        return Err(CliError::Usage("max_flips must be positive".to_string()));
    }
    let stg = ExplicitStg::build(&net, &env, cfg.run.cap)?;
    let atts = attractors_exact(&stg);
    let basins = BasinMap::build(&stg, &atts);
    let aligned: Vec<bool> = atts
        .iter()
        .map(|a| a.states.iter().any(|&s| target.matches(&stg.unpack(s))))
        .collect();

    let sources: Vec<usize> = match &args.source {
        Some(hex) => {
            let state = NetworkState::from_hex(net.n_nodes(), hex)?;
            let idx = stg.pack(&state);
            match atts.iter().position(|a| a.contains(idx)) {
                Some(i) => vec![i],
                None => {
                    return Err(CliError::Usage(format!(
                        "state {hex} does not belong to any attractor"
                    )))
                }
            }
        }
        None => (0..atts.len()).filter(|&i| !aligned[i]).collect(),
    };
    if sources.is_empty() {
        return Err(CliError::Empty(
            "every attractor already satisfies the target".to_string(),
        ));
    }

    let mut rows = Vec::with_capacity(sources.len());
    let mut plans: Vec<(usize, usize, usize)> = Vec::new();
    for &i in &sources {
        let plan = min_control_oracle(&stg, &atts, &basins, i, &target, max_flips, BasinMode::Strong);
        let row = match &plan {
            Some(p) => json!({
                "attractor": i,
                "states": atts[i].states.iter().map(|&s| stg.unpack(s).to_hex()).collect::<Vec<_>>(),
                "length": p.length,
                "steps": p.steps.iter().map(|st| json!({
                    "from_state": stg.unpack(st.from_state).to_hex(),
                    "flips": st.flips.iter().map(|&v| net.name(v)).collect::<Vec<_>>(),
                    "to_attractor": st.to_attractor,
                })).collect::<Vec<_>>(),
            }),
            None => json!({
                "attractor": i,
                "states": atts[i].states.iter().map(|&s| stg.unpack(s).to_hex()).collect::<Vec<_>>(),
                "length": serde_json::Value::Null,
                "steps": [],
            }),
        };
        rows.push(row);
        if let Some(p) = plan {
            plans.push((i, p.length, p.final_attractor));
        }
    }
    if plans.is_empty() {
        return Err(CliError::Empty(format!(
            "no strategy with at most {max_flips} flips reaches the target from any source"
        )));
    }
    let mean = plans.iter().map(|&(_, l, _)| l as f64).sum::<f64>() / plans.len() as f64;

    // Reference average over the solvable misaligned sources; skipped when
    // the only source is already aligned (length 0).
    let acpl = {
        let solvable: Vec<&(usize, usize, usize)> =
            plans.iter().filter(|&&(i, _, _)| !aligned[i]).collect();
        if solvable.is_empty() {
            None
        } else {
            let cond = AcplCondition {
                name: condition_label(&cfg),
                sources: solvable.iter().map(|&&(i, _, _)| format!("A{i}")).collect(),
                targets: (0..atts.len())
                    .filter(|&j| aligned[j])
                    .map(|j| format!("A{j}"))
                    .collect(),
                cpl: solvable
                    .iter()
                    .map(|&&(i, l, f)| ((format!("A{i}"), format!("A{f}")), l as u32))
                    .collect(),
            };
            Some(
                acpl_reference(&AcplInputs {
                    conditions: vec![cond],
                })
                .map_err(|e| CliError::Internal(e.to_string()))?,
            )
        }
    };

    let doc = json!({
        "model": model_label(&cfg),
        "condition": condition_label(&cfg),
        "target": cfg.model.target,
        "max_flips": max_flips,
        "aligned_attractors": (0..atts.len()).filter(|&j| aligned[j]).collect::<Vec<_>>(),
        "sources": rows,
        "solved": plans.len(),
        "mean_length": mean,
        "acpl": acpl,
    });
    let path = out_path(&cfg, "oracle.json");
    write_text(&path, &format!("{doc:#}\n"))?;
    println!(
        "mean strategy length {mean} over {} of {} sources -> {}",
        plans.len(),
        sources.len(),
        path.display()
    );
    Ok(())
}

fn cmd_train(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = &load_config(args)?;
    let net = load_model(cfg)?;
    let (env, target) = cfg.resolve_assignments(&net)?;
    if target.is_empty() {
        return Err(CliError::Usage(
            "training needs a target configuration; pass --target".to_string(),
        ));
    }
    let restricted = net.restrict(&env)?;
    let scan_rng = RngStream::new(cfg.run.seed, "pasip");
    let registry = phase1_scan(&net, &env, &cfg.pasip, &scan_rng)?;
    if registry.misaligned(&target).is_empty() {
        return Err(CliError::Empty(
            "every registered pseudo-attractor state already satisfies the target".to_string(),
        ));
    }
    let arch = BdqArch::default();
    let mut init_rng = RngStream::new(cfg.run.seed, "init");
    let mut agent = BdqAgent::new(
        &restricted,
        &target,
        cfg.train.include_inputs,
        &arch,
        &mut init_rng,
    );
    let mut cenv = ControlEnvironment::new(
        restricted.clone(),
        target,
        registry,
        &cfg.pasip,
        cfg.train.include_inputs,
        arch.branches,
    )?;
    let mut train_rng = RngStream::new(cfg.run.seed, "train");
    let result = train(&mut agent, &mut cenv, &cfg.train.to_train_config(), &mut train_rng)?;

    write_bytes_dir(cfg)?;
    let ckpt = out_path(cfg, "checkpoint.bin");
    save_checkpoint(&ckpt, &agent.net, restricted.fingerprint())?;
    write_text(
        &out_path(cfg, "registry.json"),
        &format!("{}\n", cenv.registry().to_json()),
    )?;
    write_text(&out_path(cfg, "train_log.csv"), &result.log)?;
    println!(
        "{} steps, {} episodes, {} reached the target, {} aborted -> {}",
        result.steps,
        result.episodes,
        result.successes,
        result.aborted,
        ckpt.display()
    );
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let net = load_model(&cfg)?;
    let (env, target) = cfg.resolve_assignments(&net)?;
    if target.is_empty() {
        return Err(CliError::Usage(
            "evaluation needs a target configuration; pass --target".to_string(),
        ));
    }
    let restricted = net.restrict(&env)?;

    let ckpt_path = args
        .checkpoint
        .clone()
        .or_else(|| non_empty_path(&cfg.evaluate.checkpoint))
        .unwrap_or_else(|| out_path(&cfg, "checkpoint.bin"));
    let reg_path = args
        .registry
        .clone()
        .or_else(|| non_empty_path(&cfg.evaluate.registry))
        .unwrap_or_else(|| out_path(&cfg, "registry.json"));
    let repeats = args.repeats.unwrap_or(cfg.evaluate.repeats);

    let (bdq, fingerprint) = load_checkpoint(&ckpt_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", ckpt_path.display())))?;
    if fingerprint != restricted.fingerprint() {
        return Err(CliError::Usage(format!(
            "{}: checkpoint was trained on a different model or condition",
            ckpt_path.display()
        )));
    }
    let registry = PaRegistry::from_json(&read_text(&reg_path)?, net.n_nodes())?;
    let space = ActionSpace::new(&restricted, &target, cfg.train.include_inputs, bdq.branches());
    let agent = BdqAgent::from_network(bdq, space)?;
    let branches = agent.space().branches();
    let mut cenv = ControlEnvironment::new(
        restricted.clone(),
        target.clone(),
        registry.clone(),
        &cfg.pasip,
        cfg.train.include_inputs,
        branches,
    )?;

    let misaligned = registry.misaligned(&target);
    if misaligned.is_empty() {
        return Err(CliError::Empty(
            "every registered pseudo-attractor state already satisfies the target".to_string(),
        ));
    }
    let sources: Vec<NetworkState> = misaligned
        .iter()
        .map(|&i| registry.get(i).state.clone())
        .collect();

    let mut eval_rng = RngStream::new(cfg.run.seed, "evaluate");
    let report = evaluate(&agent, &mut cenv, &sources, repeats, &mut eval_rng)?;

    let gaps: Option<GapReport> = if args.with_oracle || cfg.evaluate.with_oracle {
        match ExplicitStg::build(&net, &env, cfg.run.cap) {
            Ok(stg) => {
                let atts = attractors_exact(&stg);
                let basins = BasinMap::build(&stg, &atts);
                let mut minima: HashMap<NetworkState, u64> = HashMap::new();
                for s in &sources {
                    let idx = stg.pack(s);
                    let Some(ai) = atts.iter().position(|a| a.contains(idx)) else {
                        continue;
                    };
                    if let Some(plan) = min_control_oracle(
                        &stg,
                        &atts,
                        &basins,
                        ai,
                        &target,
                        cfg.oracle.max_flips,
                        BasinMode::Strong,
                    ) {
                        minima.insert(s.clone(), plan.length as u64);
                    }
                }
                Some(compare_to_oracle(&report, &minima))
            }
            Err(ExactError::TooLarge { .. }) => {
                println!("oracle comparison skipped: model exceeds the state cap");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let model = model_label(&cfg);
    let condition = condition_label(&cfg);
    write_bytes_dir(&cfg)?;
    let csv_path = out_path(&cfg, "report.csv");
    write_text(&csv_path, &report.to_csv(&model, &condition))?;
    write_text(
        &out_path(&cfg, "summary.json"),
        &format!("{}\n", report.summary_json(&model, &condition, gaps.as_ref())),
    )?;
    let mean = report
        .overall_mean
        .map(|m| format!("{m}"))
        .unwrap_or_else(|| "n/a".to_string());
    println!(
        "success rate {:.3}, mean strategy length {} over {} sources x {} repeats -> {}",
        report.success_rate,
        mean,
        sources.len(),
        repeats,
        csv_path.display()
    );
    if report.success_rate == 0.0 {
        return Err(CliError::Empty(
            "no rollout reached the target from any source".to_string(),
        ));
    }
    Ok(())
}

fn non_empty_path(s: &str) -> Option<PathBuf> {
    if s.is_empty() {
        None
    } else {
        Some(PathBuf::from(s))
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let net = load_model(&cfg)?;
    let (env, _) = cfg.resolve_assignments(&net)?;
    let restricted = net.restrict(&env)?;
    let mut rng = RngStream::new(cfg.run.seed, "simulate");
    let s0 = match &args.start {
        Some(hex) => {
            let s = NetworkState::from_hex(net.n_nodes(), hex)?;
            for (node, bit) in env.iter() {
                if s.get(node) != bit {
                    return Err(CliError::Usage(format!(
                        "start state {hex} contradicts the condition on {}",
                        net.name(node)
                    )));
                }
            }
            s
        }
        None => {
            let mut s = NetworkState::zeros(net.n_nodes());
            for i in 0..net.n_nodes() {
                match env.pin_of(i) {
                    Some(bit) => s.set(i, bit),
                    None => s.set(i, rng.chance(0.5)),
                }
            }
            s
        }
    };
    let traj = simulate(&restricted, &s0, args.steps, &mut rng, RecordMode::Counts);
    let mut rows: Vec<(String, u64)> = traj
        .counts
        .iter()
        .map(|(s, &c)| (s.to_hex(), c))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut csv = String::from("state_hex,count\n");
    for (hex, c) in &rows {
        writeln!(csv, "{hex},{c}").unwrap();
    }
    let path = out_path(&cfg, "visits.csv");
    write_text(&path, &csv)?;
    println!(
        "{} steps from {}, {} distinct states -> {}",
        args.steps,
        s0.to_hex(),
        rows.len(),
        path.display()
    );
    Ok(())
}

fn cmd_config(args: &ConfigArgs) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(p) => RunConfig::parse(&read_text(p)?)?,
        None => RunConfig::default(),
    };
    if args.dump {
        print!("{}", cfg.dump());
    } else {
        println!("ok");
    }
    Ok(())
}

