use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fragile_core::adversary::{MergeAdversary, MergesortAdversary, MinAdversary};
use fragile_core::harness::{
    check_report, merge_reports, run_experiment, trial_rng, ExperimentConfig, HalverSpec,
    InputKind, ReportFormat, TrialReport,
};
use fragile_core::ledger::ids;
use fragile_core::minimum::{knockout, sample_minimum, tournament_minimum, tree_minimum, TreeParams};
use fragile_core::networks::{
    batcher_odd_even, build_halver, measure_halver_epsilon, verify_sorting, ComparatorNetwork,
    HalverVariant,
};
use fragile_core::selection::Preset;
use fragile_core::sorting::{merge, mergesort, MergeVariant};
use fragile_core::{ElementId, Error, Ledger, Session};

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "fragile", version, about = "Measure how often single elements get compared")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and emit a report.
    Run(RunArgs),
    /// Build, verify or describe comparator networks.
    #[command(subcommand)]
    Network(NetworkCommand),
    /// Play an adaptive adversary against an algorithm.
    Adversary(AdversaryArgs),
    /// Work with report files.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file. Defaults to `$FRAGILE_OUT_DIR/<name>` when that is set,
    /// otherwise standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, env = "FRAGILE_OUT_DIR", hide_env_values = true)]
    out_dir: Option<PathBuf>,
}

impl OutputArgs {
    fn write(&self, default_name: &str, contents: &str) -> Result<(), Error> {
        let path = match (&self.out, &self.out_dir) {
            (Some(p), _) => p.clone(),
            (None, Some(dir)) => {
                fs::create_dir_all(dir)?;
                dir.join(default_name)
            }
            (None, None) => {
                print!("{contents}");
                return Ok(());
            }
        };
        fs::write(&path, contents)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "alg")]
    algorithm: Option<String>,
    /// Input sizes, repeated or comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// random, sorted, reverse or worst-linear.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    delta: Option<usize>,
    /// loglog or sublog.
    #[arg(long)]
    preset: Option<String>,
    /// exact or random:R.
    #[arg(long)]
    halver: Option<String>,
    #[arg(long, short = 't')]
    rank: Option<usize>,
    #[arg(long, default_value = "json")]
    format: String,
    /// Evaluate the algorithm's bounds and exit with status 3 if any fails.
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    output: OutputArgs,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
            None => {
                let alg = self.algorithm.as_deref();
                let alg = alg.ok_or_else(|| invalid("algorithm", "--alg or --config is required"))?;
                ExperimentConfig::new(alg.parse()?, Vec::new(), 1, 0)
            }
        };
        if let Some(alg) = &self.algorithm {
            cfg.algorithm = alg.parse()?;
        }
        if !self.sizes.is_empty() {
            cfg.sizes = self.sizes.clone();
        }
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        if let Some(input) = &self.input {
            cfg.input = input.parse::<InputKind>()?;
        }
        cfg.delta = self.delta.or(cfg.delta);
        if let Some(p) = &self.preset {
            cfg.preset = Some(p.parse::<Preset>()?);
        }
        if let Some(h) = &self.halver {
            cfg.halver = Some(h.parse::<HalverSpec>()?);
        }
        cfg.rank = self.rank.or(cfg.rank);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig { field: field.into(), reason: reason.into() }
}

fn extension(format: ReportFormat) -> &'static str {
    match format {
        ReportFormat::Json => "json",
        ReportFormat::Csv => "csv",
    }
}

fn cmd_run(args: &RunArgs) -> Result<u8, Error> {
    let format: ReportFormat = args.format.parse()?;
    let cfg = args.config()?;
    let report = run_experiment(&cfg)?;
    let name = format!("{}-seed{}.{}", cfg.algorithm, cfg.seed, extension(format));
    args.output.write(&name, &report.render(format)?)?;
    if !args.check {
        return Ok(0);
    }
    let checks = check_report(&report);
    for c in &checks {
        eprintln!("{} n={} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.n, c.name, c.detail);
    }
    Ok(if checks.iter().all(|c| c.passed) { 0 } else { EXIT_CHECK })
}

#[derive(Subcommand)]
enum NetworkCommand {
    /// Construct a network and print it in the text or JSON format.
    Build {
        #[arg(long, value_enum)]
        kind: NetworkKind,
        #[arg(long)]
        n: usize,
        /// Rounds of random matchings; without it a halver is an exact sort.
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = NetworkFormat::Text)]
        format: NetworkFormat,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check with the 0-1 principle whether a network sorts.
    Verify {
        #[arg(long)]
        file: PathBuf,
        /// Exit with status 3 if the network does not sort.
        #[arg(long)]
        check: bool,
    },
    /// Print width, depth and size, and optionally the halver epsilon.
    Stats {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        epsilon: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NetworkKind {
    Batcher,
    Halver,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NetworkFormat {
    Text,
    Json,
}

fn load_network(path: &Path) -> Result<ComparatorNetwork, Error> {
    let text = fs::read_to_string(path)?;
    let net = if text.trim_start().starts_with('{') {
        serde_json::from_str::<ComparatorNetwork>(&text)?
    } else {
        ComparatorNetwork::from_text(&text)?
    };
    net.validate()?;
    Ok(net)
}

fn cmd_network(cmd: &NetworkCommand) -> Result<u8, Error> {
    match cmd {
        NetworkCommand::Build { kind, n, rounds, seed, format, output } => {
            let net = match kind {
                NetworkKind::Batcher => batcher_odd_even(*n)?,
                NetworkKind::Halver => {
                    let variant = match rounds {
                        Some(r) => HalverVariant::RandomMatching { rounds: *r, seed: *seed },
                        None => HalverVariant::ExactSort,
                    };
                    build_halver(*n, variant)?
                }
            };
            let (body, ext) = match format {
                NetworkFormat::Text => (net.to_text(), "txt"),
                NetworkFormat::Json => (serde_json::to_string_pretty(&net)? + "\n", "json"),
            };
            let kind = match kind {
                NetworkKind::Batcher => "batcher",
                NetworkKind::Halver => "halver",
            };
            output.write(&format!("{kind}-{n}.{ext}"), &body)?;
            Ok(0)
        }
        NetworkCommand::Verify { file, check } => {
            let sorts = verify_sorting(&load_network(file)?)?;
            println!("sorting: {}", if sorts { "yes" } else { "no" });
            Ok(if *check && !sorts { EXIT_CHECK } else { 0 })
        }
        NetworkCommand::Stats { file, epsilon } => {
            let net = load_network(file)?;
            let (depth, size) = net.depth_and_size()?;
            println!("width {}", net.width());
            println!("depth {depth}");
            println!("size {size}");
            if *epsilon {
                println!("epsilon {}", measure_halver_epsilon(&net)?);
            }
            Ok(0)
        }
    }
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    target: AdversaryTarget,
    /// min: tournament, knockout, sample-min or tree-min.
    /// merge: linear or exponential. mergesort: mergesort-linear or
    /// mergesort-exp.
    #[arg(long = "alg")]
    algorithm: String,
    /// Input size; for merge, the length of each of the two runs.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    delta: usize,
    /// Exit with status 3 if the forced count is below the lower bound.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryTarget {
    Min,
    Merge,
    Mergesort,
}

fn ceil_log2(n: usize) -> u64 {
    n.next_power_of_two().trailing_zeros() as u64
}

fn floor_log2(n: usize) -> u64 {
    n.ilog2() as u64
}

fn merge_variant(name: &str) -> Result<MergeVariant, Error> {
    match name {
        "linear" | "mergesort-linear" => Ok(MergeVariant::Linear),
        "exponential" | "mergesort-exp" => Ok(MergeVariant::Exponential),
        other => Err(invalid("alg", format!("`{other}` is not a merge variant"))),
    }
}

/// Runs the chosen duel and returns `(forced count, lower bound)`.
fn cmd_adversary(args: &AdversaryArgs) -> Result<u8, Error> {
    let n = args.n;
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let (forced, bound) = match args.target {
        AdversaryTarget::Min => {
            let mut adv = MinAdversary::new(n);
            let mut ledger = Ledger::new(n);
            let mut rng = trial_rng(args.seed, n, 0);
            let xs = ids(n);
            let claimed = {
                let mut s = Session::new(&mut adv, &mut ledger);
                match args.algorithm.as_str() {
                    "tournament" => tournament_minimum(&xs, &mut s)?.minimum,
                    "knockout" => knockout(&xs, &mut s)?,
                    "sample-min" => sample_minimum(&xs, &mut s, &mut rng)?.minimum,
                    "tree-min" => tree_minimum(&xs, TreeParams::new(args.delta)?, &mut s, &mut rng)?,
                    other => return Err(invalid("alg", format!("`{other}` is not a minimum algorithm"))),
                }
            };
            let certified = adv.certify(claimed);
            println!("claimed minimum {claimed}");
            println!("red reach {}", adv.red_reach(claimed));
            match &certified {
                Ok(order) => println!("certified: total order of {} elements", order.len()),
                Err(e) => println!("certification failed: {e}"),
            }
            if certified.is_err() && args.check {
                return Ok(EXIT_CHECK);
            }
            (ledger.count(claimed), ceil_log2(n))
        }
        AdversaryTarget::Merge => {
            let variant = merge_variant(&args.algorithm)?;
            let a: Vec<ElementId> = (0..n).map(ElementId).collect();
            let b: Vec<ElementId> = (n..2 * n).map(ElementId).collect();
            let mut adv = MergeAdversary::new(&a, &b)?;
            let mut ledger = Ledger::new(2 * n);
            {
                let mut s = Session::new(&mut adv, &mut ledger);
                merge(&a, &b, variant, &mut s)?;
            }
            println!("scapegoat {}", adv.scapegoat());
            (ledger.count(adv.scapegoat()), floor_log2(n) + 1)
        }
        AdversaryTarget::Mergesort => {
            let variant = merge_variant(&args.algorithm)?;
            let mut adv = MergesortAdversary::new(n)?;
            let mut ledger = Ledger::new(n);
            {
                let mut s = Session::new(&mut adv, &mut ledger);
                mergesort(&ids(n), variant, &mut s)?;
            }
            let goat = adv.root_scapegoat();
            println!("root scapegoat {goat}");
            // Each merge level i below the root contributes floor(log2 2^i) + 1.
            let k = floor_log2(n);
            (ledger.count(goat), k * (k.saturating_sub(1)) / 2 + k)
        }
    };
    println!("forced count {forced}");
    println!("lower bound {bound}");
    Ok(if args.check && forced < bound { EXIT_CHECK } else { 0 })
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Combine reports of one configuration run at disjoint sizes.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn cmd_report(cmd: &ReportCommand) -> Result<u8, Error> {
    let ReportCommand::Merge { inputs, format, output } = cmd;
    let format: ReportFormat = format.parse()?;
    let reports = inputs
        .iter()
        .map(|p| TrialReport::from_json(&fs::read_to_string(p)?))
        .collect::<Result<Vec<_>, Error>>()?;
    let merged = merge_reports(reports)?;
    let name = format!("{}-merged.{}", merged.config.algorithm, extension(format));
    output.write(&name, &merged.render(format)?)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Network(cmd) => cmd_network(cmd),
        Command::Adversary(args) => cmd_adversary(args),
        Command::Report(cmd) => cmd_report(cmd),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidConfig { .. } | Error::Parse(_) => EXIT_INVALID,
                _ => EXIT_FAILURE,
            })
        }
    }
}
