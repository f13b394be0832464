use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use volleybots::dynamics::DroneParams;
use volleybots::harness::{replay, run_episodes, RunConfig, Trace};
use volleybots::metagame::{
    approx_exploitability, crossplay, estimate_payoff, live_player, population_loop, run_tournament, write_grid_csv,
    LoopMode, MetagameConfig, Mixture, PayoffMatrix, PopulationManifest, SimGame,
};
use volleybots::oracle::CemOracle;
use volleybots::policies::PolicySpec;
use volleybots::tasks::{TaskId, TaskSpec};
use volleybots::{seed, Error, Result};

#[derive(Parser)]
#[command(name = "volleybots", version, about = "Multi-drone volleyball simulation and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate episodes and check traces.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Grow policy populations.
    #[command(subcommand)]
    Meta(MetaCommand),
    /// Evaluate policies and populations.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Subcommand)]
enum SimCommand {
    /// Run a batch of episodes and print the summary.
    Run(SimRun),
    /// Re-simulate a full trace and report the first divergence.
    Replay { trace: PathBuf },
}

#[derive(Args)]
struct SimRun {
    /// Run config TOML; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    red: Option<String>,
    #[arg(long)]
    blue: Option<String>,
    /// prt or ctbr.
    #[arg(long)]
    action_mode: Option<String>,
    #[arg(long)]
    shaping: Option<bool>,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// off, events or full.
    #[arg(long)]
    trace: Option<String>,
    /// Directory for summary.json and trace files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    /// Metagame config TOML.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum MetaCommand {
    /// Grow a population with the duel parameter search as oracle.
    Loop {
        #[command(flatten)]
        common: Common,
        /// sp, fsp, psro-uniform or psro-nash.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population_size: Option<usize>,
        #[arg(long)]
        games_per_candidate: Option<usize>,
        #[arg(long, default_value = "duel")]
        initial: String,
        /// Population label in the manifest.
        #[arg(long, default_value = "population")]
        label: String,
        /// Directory for manifest.json and payoff.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Payoff matrix between policies.
    Payoff {
        #[command(flatten)]
        common: Common,
        #[arg(required = true, num_args = 2..)]
        policies: Vec<String>,
        #[arg(long)]
        games: Option<usize>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best-response score against a policy mixture, minus one half.
    Exploitability {
        #[command(flatten)]
        common: Common,
        /// Population manifest to evaluate at its meta-strategy.
        #[arg(long, conflicts_with = "policies")]
        population: Option<PathBuf>,
        /// Policies mixed uniformly.
        policies: Vec<String>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population_size: Option<usize>,
        #[arg(long)]
        games_per_candidate: Option<usize>,
    },
    /// Round-robin Elo tournament.
    Elo {
        #[command(flatten)]
        common: Common,
        #[arg(required = true, num_args = 2..)]
        policies: Vec<String>,
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        init: Option<f64>,
        /// Line-delimited match log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Win-rate grid between saved populations.
    Crossplay {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        populations: Vec<PathBuf>,
        #[arg(long)]
        games: Option<usize>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Contract(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Contract(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn parse_policies(ids: &[String]) -> Result<Vec<PolicySpec>> {
    ids.iter().map(|s| s.parse()).collect()
}

fn metagame_config(common: &Common) -> Result<MetagameConfig> {
    let mut c = match &common.config {
        Some(p) => MetagameConfig::from_toml_str(&read_input(p)?)?,
        None => MetagameConfig::default(),
    };
    if let Some(t) = &common.task {
        c.task = t.parse()?;
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(w) = common.workers {
        c.workers = w;
    }
    c.validate()?;
    Ok(c)
}

fn override_budget(c: &mut MetagameConfig, generations: Option<usize>, size: Option<usize>, games: Option<usize>) -> Result<()> {
    if let Some(g) = generations {
        c.budget.generations = g;
    }
    if let Some(n) = size {
        c.budget.population_size = n;
    }
    if let Some(n) = games {
        c.budget.games_per_candidate = n;
    }
    c.budget.validate()
}

fn sim_run(args: SimRun) -> Result<()> {
    let mut c = match &args.config {
        Some(p) => RunConfig::from_toml_str(&read_input(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(t) = &args.task {
        c.task = t.parse()?;
    }
    if let Some(r) = args.red {
        c.red = r;
    }
    if let Some(b) = args.blue {
        c.blue = b;
    }
    if let Some(m) = &args.action_mode {
        c.action_mode = Some(m.parse()?);
    }
    if args.shaping.is_some() {
        c.shaping = args.shaping;
    }
    if let Some(n) = args.episodes {
        c.n_episodes = n;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(w) = args.workers {
        c.workers = w;
    }
    if let Some(t) = &args.trace {
        c.trace = t.parse()?;
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }
    let summary = run_episodes(&c, args.out.as_deref())?;
    print_json(&summary)
}

fn sim_replay(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::config(format!("{}: no such trace file", path.display())));
    }
    let report = replay(&Trace::load(path)?)?;
    print_json(&report)?;
    match &report.divergence {
        None => Ok(()),
        Some(d) => Err(Error::Contract(format!("trace diverges at step {} in {}", d.step, d.field))),
    }
}

fn sim_game(c: &MetagameConfig) -> Result<SimGame> {
    SimGame::new(TaskSpec::preset(c.task), DroneParams::default(), c.parallelism())
}

#[allow(clippy::too_many_arguments)]
fn meta_loop(
    common: &Common,
    mode: Option<String>,
    iterations: Option<usize>,
    games: Option<usize>,
    budget: (Option<usize>, Option<usize>, Option<usize>),
    initial: &str,
    label: &str,
    out: &Path,
) -> Result<()> {
    let mut c = metagame_config(common)?;
    if let Some(m) = mode {
        c.population.mode = m.parse::<LoopMode>()?;
    }
    if let Some(n) = iterations {
        c.population.iterations = n;
    }
    if let Some(n) = games {
        c.population.games_per_cell = n;
    }
    if common.seed.is_some() {
        c.population.seed = c.seed;
        c.budget.seed = c.seed;
    }
    override_budget(&mut c, budget.0, budget.1, budget.2)?;
    let initial: PolicySpec = initial.parse()?;
    let game = sim_game(&c)?;
    initial.build(&game.spec)?;
    let mut oracle = CemOracle::new(c.budget, c.parallelism())?;
    if c.task != TaskId::OneVsOne {
        return Err(Error::config(format!("meta loop searches duel parameters and needs one_vs_one, not {}", c.task)));
    }
    let run = population_loop(&game, &mut oracle, initial, &c.population)?;
    fs::create_dir_all(out)?;
    let manifest = PopulationManifest::from_run(label, c.task, c.population.seed, &run);
    write_json(&out.join("manifest.json"), &manifest)?;
    let ids: Vec<String> = manifest.members.iter().map(|m| m.id.clone()).collect();
    PayoffMatrix::new(ids, run.payoff.clone(), c.population.games_per_cell)?.write_csv(fs::File::create(out.join("payoff.csv"))?)?;
    let mut log = String::new();
    for r in &oracle.log {
        for g in &r.history {
            log.push_str(&serde_json::to_string(g).map_err(|e| Error::Contract(e.to_string()))?);
            log.push('\n');
        }
    }
    fs::write(out.join("oracle_log.jsonl"), log)?;
    print_json(&manifest)?;
    match run.error {
        Some(e) => Err(Error::Oracle(e)),
        None => Ok(()),
    }
}

fn write_grid(out: Option<&Path>, rows: &[String], entries: &[Vec<f64>]) -> Result<()> {
    match out {
        Some(p) => write_grid_csv(fs::File::create(p)?, rows, rows, entries),
        None => write_grid_csv(std::io::stdout().lock(), rows, rows, entries),
    }
}

fn eval_payoff(common: &Common, ids: &[String], games: Option<usize>, out: Option<&Path>) -> Result<()> {
    let c = metagame_config(common)?;
    let games = games.unwrap_or(c.payoff.games_per_cell);
    let policies = parse_policies(ids)?;
    let spec = TaskSpec::preset(c.task);
    let drone = DroneParams::default();
    let n = policies.len();
    let mut entries = vec![vec![0.5; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = seed::derive(c.seed, (i * n + j) as u64, seed::tag::MATCH);
            let v = estimate_payoff(&spec, &drone, &policies[i], &policies[j], games, s, c.parallelism())?.score().lp();
            entries[i][j] = v;
            entries[j][i] = 1.0 - v;
        }
    }
    let m = PayoffMatrix::new(ids.to_vec(), entries, games)?;
    write_grid(out, &m.ids, &m.entries)
}

fn eval_exploitability(
    common: &Common,
    population: Option<&Path>,
    ids: &[String],
    budget: (Option<usize>, Option<usize>, Option<usize>),
) -> Result<()> {
    let mut c = metagame_config(common)?;
    override_budget(&mut c, budget.0, budget.1, budget.2)?;
    let target: Vec<(PolicySpec, f64)> = match population {
        Some(p) => {
            let m = PopulationManifest::from_json(&read_input(p)?)?.mixture()?;
            m.members.into_iter().zip(m.weights).collect()
        }
        None if ids.is_empty() => return Err(Error::config("give policies or --population")),
        None => {
            let w = 1.0 / ids.len() as f64;
            parse_policies(ids)?.into_iter().map(|p| (p, w)).collect()
        }
    };
    let game = sim_game(&c)?;
    for (p, _) in &target {
        p.build(&game.spec)?;
    }
    let mut oracle = CemOracle::new(c.budget, c.parallelism())?;
    print_json(&approx_exploitability(&game, &target, &mut oracle, c.seed)?)
}

fn eval_elo(
    common: &Common,
    ids: &[String],
    rounds: Option<u64>,
    k: Option<f64>,
    init: Option<f64>,
    log: Option<&Path>,
) -> Result<()> {
    let c = metagame_config(common)?;
    let policies = parse_policies(ids)?;
    let spec = TaskSpec::preset(c.task);
    for p in &policies {
        p.build(&spec)?;
    }
    let drone = DroneParams::default();
    let player = live_player(&spec, &drone, &policies, c.seed, c.elo.max_replays);
    let result = run_tournament(
        ids.to_vec(),
        rounds.unwrap_or(c.elo.rounds),
        k.unwrap_or(c.elo.k),
        init.unwrap_or(c.elo.init),
        c.seed,
        c.parallelism(),
        player,
    )?;
    if let Some(p) = log {
        let mut text = String::new();
        for r in &result.log {
            text.push_str(&serde_json::to_string(r).map_err(|e| Error::Contract(e.to_string()))?);
            text.push('\n');
        }
        fs::write(p, text)?;
    }
    print_json(&result.table)
}

fn eval_crossplay(common: &Common, paths: &[PathBuf], games: Option<usize>, out: Option<&Path>) -> Result<()> {
    let c = metagame_config(common)?;
    let pops = paths
        .iter()
        .map(|p| PopulationManifest::from_json(&read_input(p)?)?.mixture())
        .collect::<Result<Vec<Mixture<PolicySpec>>>>()?;
    let game = sim_game(&c)?;
    for p in pops.iter().flat_map(|m| &m.members) {
        p.build(&game.spec)?;
    }
    let grid = crossplay(&game, &pops, games.unwrap_or(c.crossplay.games_per_pair), c.seed)?;
    let mut labels: Vec<String> = Vec::with_capacity(pops.len());
    for m in &pops {
        let mut label = m.label.clone();
        let mut k = 1;
        while labels.contains(&label) {
            k += 1;
            label = format!("{}#{k}", m.label);
        }
        labels.push(label);
    }
    write_grid(out, &labels, &grid)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sim(SimCommand::Run(args)) => sim_run(args),
        Command::Sim(SimCommand::Replay { trace }) => sim_replay(&trace),
        Command::Meta(MetaCommand::Loop {
            common,
            mode,
            iterations,
            games,
            generations,
            population_size,
            games_per_candidate,
            initial,
            label,
            out,
        }) => meta_loop(&common, mode, iterations, games, (generations, population_size, games_per_candidate), &initial, &label, &out),
        Command::Eval(EvalCommand::Payoff { common, policies, games, out }) => eval_payoff(&common, &policies, games, out.as_deref()),
        Command::Eval(EvalCommand::Exploitability {
            common,
            population,
            policies,
            generations,
            population_size,
            games_per_candidate,
        }) => eval_exploitability(&common, population.as_deref(), &policies, (generations, population_size, games_per_candidate)),
        Command::Eval(EvalCommand::Elo { common, policies, rounds, k, init, log }) => {
            eval_elo(&common, &policies, rounds, k, init, log.as_deref())
        }
        Command::Eval(EvalCommand::Crossplay { common, populations, games, out }) => {
            eval_crossplay(&common, &populations, games, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
