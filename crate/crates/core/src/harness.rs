//! Monte-Carlo experiment runner.
//!
//! Each `(size, trial)` pair gets its own ChaCha8 stream keyed by the master
//! seed, the size and the trial index, so trials are independent of each
//! other and of execution order. A report holds per-size aggregates and
//! least-squares fits of the mean statistics against a fixed family of
//! growth curves.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ledger::{ids, ElementId, Ledger, Session, ValueOracle};
use crate::minimum::{sample_minimum, tournament_minimum, tree_minimum, TreeParams};
use crate::networks::HalverVariant;
use crate::selection::{det_median, det_select, r_median, Preset, SelectionParams};
use crate::sorting::{floyd_heapify, mergesort, worst_case_linear_input, MergeVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Tournament,
    SampleMin,
    TreeMin,
    DetMedian,
    DetSelect,
    RMedian,
    MergesortLinear,
    MergesortExp,
    Heapify,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Tournament,
        Algorithm::SampleMin,
        Algorithm::TreeMin,
        Algorithm::DetMedian,
        Algorithm::DetSelect,
        Algorithm::RMedian,
        Algorithm::MergesortLinear,
        Algorithm::MergesortExp,
        Algorithm::Heapify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Tournament => "tournament",
            Algorithm::SampleMin => "sample-min",
            Algorithm::TreeMin => "tree-min",
            Algorithm::DetMedian => "det-median",
            Algorithm::DetSelect => "det-select",
            Algorithm::RMedian => "r-median",
            Algorithm::MergesortLinear => "mergesort-linear",
            Algorithm::MergesortExp => "mergesort-exp",
            Algorithm::Heapify => "heapify",
        }
    }

    /// What `f_target` tracks, if anything.
    fn target(self) -> Target {
        match self {
            Algorithm::Tournament | Algorithm::SampleMin | Algorithm::TreeMin => Target::Minimum,
            Algorithm::DetMedian | Algorithm::RMedian => Target::Median,
            Algorithm::DetSelect => Target::Rank,
            _ => Target::None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid("algorithm", format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    None,
    Minimum,
    Median,
    Rank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// A uniformly random permutation of `1..=n`.
    #[default]
    #[serde(alias = "uniform")]
    Random,
    Sorted,
    Reverse,
    WorstLinear,
}

impl FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "uniform" => Ok(InputKind::Random),
            "sorted" => Ok(InputKind::Sorted),
            "reverse" => Ok(InputKind::Reverse),
            "worst-linear" => Ok(InputKind::WorstLinear),
            other => Err(invalid("input", format!("unknown input kind `{other}`"))),
        }
    }
}

/// Halver choice as written in configs: `exact` or `random:R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum HalverSpec {
    Exact,
    Random { rounds: usize },
}

impl HalverSpec {
    pub fn variant(self, seed: u64) -> HalverVariant {
        match self {
            HalverSpec::Exact => HalverVariant::ExactSort,
            HalverSpec::Random { rounds } => HalverVariant::RandomMatching { rounds, seed },
        }
    }
}

impl FromStr for HalverSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(HalverSpec::Exact);
        }
        let rounds = s
            .strip_prefix("random:")
            .and_then(|r| r.parse().ok())
            .filter(|&r: &usize| r >= 1)
            .ok_or_else(|| invalid("halver", format!("expected `exact` or `random:R`, got `{s}`")))?;
        Ok(HalverSpec::Random { rounds })
    }
}

impl TryFrom<String> for HalverSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<HalverSpec> for String {
    fn from(h: HalverSpec) -> String {
        match h {
            HalverSpec::Exact => "exact".into(),
            HalverSpec::Random { rounds } => format!("random:{rounds}"),
        }
    }
}

fn default_trials() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub input: InputKind,
    /// Tree degree for `tree-min`; 16 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<usize>,
    /// Parameter preset for `r-median`; `loglog` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Halver for `det-median` and `det-select`; `exact` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halver: Option<HalverSpec>,
    /// Target rank for `det-select`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

pub const DEFAULT_DELTA: usize = 16;

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, sizes: Vec<usize>, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            algorithm,
            sizes,
            trials,
            seed,
            input: InputKind::Random,
            delta: None,
            preset: None,
            halver: None,
            rank: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid("config", e.to_string()))
    }

    pub fn delta(&self) -> usize {
        self.delta.unwrap_or(DEFAULT_DELTA)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.sizes.is_empty() {
            return Err(invalid("sizes", "at least one size is required"));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n == 0) {
            return Err(invalid("sizes", format!("size {n} is below 1")));
        }
        if self.algorithm == Algorithm::TreeMin {
            TreeParams::new(self.delta()).map_err(|_| invalid("delta", "must be at least 2"))?;
        }
        if self.algorithm == Algorithm::DetSelect {
            let t = self.rank.ok_or_else(|| invalid("rank", "det-select needs a rank"))?;
            if let Some(&n) = self.sizes.iter().find(|&&n| t == 0 || t > n) {
                return Err(invalid("rank", format!("rank {t} outside 1..={n}")));
            }
        }
        Ok(())
    }
}

/// Fragile and work figures of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSample {
    pub f_target: Option<u64>,
    pub f_max_rest: u64,
    pub f_max: u64,
    pub work: u64,
    /// The returned element (or arrangement) was the right one.
    pub correct: bool,
    /// `2 * work == sum(counts)` held at the end of the run.
    pub conserved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub max: u64,
    pub p50: u64,
    pub p99: u64,
}

/// Nearest-rank percentile of sorted data, `0 < p <= 1`.
fn nearest_rank(sorted: &[u64], p: f64) -> u64 {
    let idx = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = u64>) -> Option<Stats> {
        let mut v: Vec<u64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_unstable();
        let mean = v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64;
        Some(Stats {
            mean,
            max: *v.last().expect("non-empty"),
            p50: nearest_rank(&v, 0.5),
            p99: nearest_rank(&v, 0.99),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n: usize,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_target: Option<Stats>,
    pub f_max_rest: Stats,
    pub f_max: Stats,
    pub work: Stats,
    /// Trials with a wrong answer.
    pub failures: usize,
    /// Trials whose ledger did not balance.
    pub unbalanced: usize,
    #[serde(skip)]
    pub samples: Vec<TrialSample>,
}

impl SizeReport {
    pub fn from_samples(n: usize, samples: Vec<TrialSample>) -> Self {
        let stats = |f: fn(&TrialSample) -> u64| Stats::of(samples.iter().map(f)).expect("trials >= 1");
        SizeReport {
            n,
            trials: samples.len(),
            f_target: Stats::of(samples.iter().filter_map(|t| t.f_target)),
            f_max_rest: stats(|t| t.f_max_rest),
            f_max: stats(|t| t.f_max),
            work: stats(|t| t.work),
            failures: samples.iter().filter(|t| !t.correct).count(),
            unbalanced: samples.iter().filter(|t| !t.conserved).count(),
            samples,
        }
    }
}

/// Candidate growth curves `g(n)` for fits of the form `c * g(n)`. Logs are
/// base 2, and `log log n` uses `max(log n, 2)` inside so small sizes stay
/// positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Curve {
    Log,
    LogLog,
    LogSquared,
    Linear,
    LogOverLogLog,
    /// `log_Δ n`.
    LogBase(usize),
}

impl Curve {
    pub fn eval(self, n: usize) -> f64 {
        let lg = (n.max(1) as f64).log2();
        let lglg = lg.max(2.0).log2();
        match self {
            Curve::Log => lg,
            Curve::LogLog => lglg,
            Curve::LogSquared => lg * lg,
            Curve::Linear => n as f64,
            Curve::LogOverLogLog => lg / lglg,
            Curve::LogBase(d) => lg / (d as f64).log2(),
        }
    }

    /// The standard candidate set; `log_Δ n` joins when a degree is given.
    pub fn candidates(delta: Option<usize>) -> Vec<Curve> {
        let mut v =
            vec![Curve::Log, Curve::LogLog, Curve::LogSquared, Curve::Linear, Curve::LogOverLogLog];
        v.extend(delta.map(Curve::LogBase));
        v
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Log => f.write_str("log n"),
            Curve::LogLog => f.write_str("log log n"),
            Curve::LogSquared => f.write_str("log^2 n"),
            Curve::Linear => f.write_str("n"),
            Curve::LogOverLogLog => f.write_str("log n / log log n"),
            Curve::LogBase(d) => write!(f, "log_{d} n"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub curve: Curve,
    pub constant: f64,
    /// Sum of squared residuals.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub best: CurveFit,
    /// One entry per candidate, in candidate order.
    pub all: Vec<CurveFit>,
}

impl GrowthFit {
    pub fn get(&self, curve: Curve) -> Option<&CurveFit> {
        self.all.iter().find(|f| f.curve == curve)
    }
}

/// Least-squares fit of `y = c * g(n)` for each candidate `g`; the best is
/// the first candidate with the smallest residual.
pub fn fit_growth(samples: &[(usize, f64)], candidates: &[Curve]) -> Result<GrowthFit> {
    let mut sizes: Vec<usize> = samples.iter().map(|s| s.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::InsufficientData(sizes.len()));
    }
    if candidates.is_empty() {
        return Err(invalid("candidates", "no growth curves given"));
    }
    let all: Vec<CurveFit> = candidates
        .iter()
        .map(|&curve| {
            let (gy, gg) = samples.iter().fold((0.0, 0.0), |(gy, gg), &(n, y)| {
                let g = curve.eval(n);
                (gy + g * y, gg + g * g)
            });
            let constant = if gg > 0.0 { gy / gg } else { 0.0 };
            let residual =
                samples.iter().map(|&(n, y)| (y - constant * curve.eval(n)).powi(2)).sum();
            CurveFit { curve, constant, residual }
        })
        .collect();
    let best = *all
        .iter()
        .fold(None, |acc: Option<&CurveFit>, f| match acc {
            Some(b) if b.residual <= f.residual => Some(b),
            _ => Some(f),
        })
        .expect("non-empty");
    Ok(GrowthFit { best, all })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// `f_target.mean` or `f_max_rest.mean`.
    pub metric: String,
    #[serde(flatten)]
    pub fit: GrowthFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: ExperimentConfig,
    pub per_size: Vec<SizeReport>,
    pub fits: Vec<FitReport>,
}

/// The RNG for one trial: a ChaCha8 key built from the master seed, the
/// size and the trial index.
pub fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(trial as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

pub fn make_input(kind: InputKind, n: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    match kind {
        InputKind::Random => {
            let mut v: Vec<u64> = (1..=n as u64).collect();
            v.shuffle(rng);
            v
        }
        InputKind::Sorted => (1..=n as u64).collect(),
        InputKind::Reverse => (1..=n as u64).rev().collect(),
        InputKind::WorstLinear => worst_case_linear_input(n),
    }
}

/// Id of the rank-`t` value (1-based), ties broken by id.
fn rank_target(values: &[u64], t: usize) -> ElementId {
    if t == 1 {
        let (i, _) = values.iter().enumerate().min_by_key(|&(i, &v)| (v, i)).expect("t <= n");
        return ElementId(i);
    }
    let mut keyed: Vec<(u64, usize)> = values.iter().copied().zip(0..).collect();
    let (_, &mut (_, i), _) = keyed.select_nth_unstable(t - 1);
    ElementId(i)
}

fn is_sorted_by_value(out: &[ElementId], values: &[u64]) -> bool {
    out.len() == values.len() && out.windows(2).all(|w| values[w[0].0] <= values[w[1].0])
}

/// Runs trial `trial` at size `n`.
pub fn run_trial(config: &ExperimentConfig, n: usize, trial: usize) -> Result<TrialSample> {
    let mut rng = trial_rng(config.seed, n, trial);
    let values = make_input(config.input, n, &mut rng);
    let xs = ids(n);
    let target = match config.algorithm.target() {
        Target::None => None,
        Target::Minimum => Some(rank_target(&values, 1)),
        Target::Median => Some(rank_target(&values, (n + 1) / 2)),
        Target::Rank => Some(rank_target(&values, config.rank.unwrap_or(1))),
    };
    let halver = config.halver.unwrap_or(HalverSpec::Exact).variant(config.seed);
    let mut oracle = ValueOracle::new(&values);
    let mut ledger = Ledger::new(n);

    let correct = if config.algorithm == Algorithm::DetSelect {
        let t = config.rank.ok_or_else(|| invalid("rank", "det-select needs a rank"))?;
        Some(det_select(&xs, t, halver, &mut oracle, &mut ledger)?) == target
    } else {
        let mut s = Session::new(&mut oracle, &mut ledger);
        match config.algorithm {
            Algorithm::Tournament => Some(tournament_minimum(&xs, &mut s)?.minimum) == target,
            Algorithm::SampleMin => Some(sample_minimum(&xs, &mut s, &mut rng)?.minimum) == target,
            Algorithm::TreeMin => {
                let params = TreeParams::new(config.delta())?;
                Some(tree_minimum(&xs, params, &mut s, &mut rng)?) == target
            }
            Algorithm::DetMedian => Some(det_median(&xs, halver, &mut s)?) == target,
            Algorithm::RMedian => {
                let params = SelectionParams::preset(config.preset.unwrap_or(Preset::LogLog));
                Some(r_median(&xs, &params, &mut s, &mut rng)?) == target
            }
            Algorithm::MergesortLinear | Algorithm::MergesortExp => {
                let variant = if config.algorithm == Algorithm::MergesortLinear {
                    MergeVariant::Linear
                } else {
                    MergeVariant::Exponential
                };
                is_sorted_by_value(&mergesort(&xs, variant, &mut s)?, &values)
            }
            Algorithm::Heapify => floyd_heapify(&xs, &mut s)?.is_heap_ordered(&values),
            Algorithm::DetSelect => unreachable!("handled above"),
        }
    };
    let summary = ledger.summary(target)?;
    Ok(TrialSample {
        f_target: summary.f_target,
        f_max_rest: summary.f_max_rest,
        f_max: summary.f_max,
        work: summary.work,
        correct,
        conserved: ledger.is_conserved(),
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<TrialReport> {
    config.validate()?;
    let per_size = config
        .sizes
        .iter()
        .map(|&n| {
            let samples =
                (0..config.trials).map(|t| run_trial(config, n, t)).collect::<Result<Vec<_>>>()?;
            Ok(SizeReport::from_samples(n, samples))
        })
        .collect::<Result<Vec<_>>>()?;
    let fits = fits_for(config, &per_size);
    Ok(TrialReport { config: config.clone(), per_size, fits })
}

fn fits_for(config: &ExperimentConfig, per_size: &[SizeReport]) -> Vec<FitReport> {
    let delta = (config.algorithm == Algorithm::TreeMin).then(|| config.delta());
    let candidates = Curve::candidates(delta);
    let mut fits = Vec::new();
    let target: Vec<(usize, f64)> =
        per_size.iter().filter_map(|s| s.f_target.map(|f| (s.n, f.mean))).collect();
    if let Ok(fit) = fit_growth(&target, &candidates) {
        fits.push(FitReport { metric: "f_target.mean".into(), fit });
    }
    let rest: Vec<(usize, f64)> = per_size.iter().map(|s| (s.n, s.f_max_rest.mean)).collect();
    if let Ok(fit) = fit_growth(&rest, &candidates) {
        fits.push(FitReport { metric: "f_max_rest.mean".into(), fit });
    }
    fits
}

/// Combines reports of one configuration run at different sizes.
pub fn merge_reports(reports: Vec<TrialReport>) -> Result<TrialReport> {
    let mut iter = reports.into_iter();
    let mut merged = iter.next().ok_or_else(|| invalid("reports", "nothing to merge"))?;
    let key = |c: &ExperimentConfig| ExperimentConfig { sizes: Vec::new(), ..c.clone() };
    for r in iter {
        if key(&r.config) != key(&merged.config) {
            return Err(invalid("config", "reports come from different configurations"));
        }
        merged.config.sizes.extend(r.config.sizes);
        merged.per_size.extend(r.per_size);
    }
    merged.per_size.sort_by_key(|s| s.n);
    if merged.per_size.windows(2).any(|w| w[0].n == w[1].n) {
        return Err(invalid("sizes", "the same size appears in more than one report"));
    }
    merged.config.sizes = merged.per_size.iter().map(|s| s.n).collect();
    merged.fits = fits_for(&merged.config, &merged.per_size);
    Ok(merged)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(invalid("format", format!("unknown format `{other}`"))),
        }
    }
}

impl TrialReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per `(n, metric)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,metric,mean,max,p50,p99,trials\n");
        for s in &self.per_size {
            let metrics = [
                ("f_target", s.f_target),
                ("f_max_rest", Some(s.f_max_rest)),
                ("f_max", Some(s.f_max)),
                ("work", Some(s.work)),
            ];
            for (name, stats) in metrics {
                if let Some(st) = stats {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        s.n, name, st.mean, st.max, st.p50, st.p99, s.trials
                    ));
                }
            }
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => Ok(self.to_csv()),
        }
    }
}

pub fn emit_report(report: &TrialReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, report.render(format)?)?;
    Ok(())
}

/// One bound checked by [`check_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub n: usize,
    pub passed: bool,
    pub detail: String,
}

fn log2(n: usize) -> f64 {
    (n.max(1) as f64).log2()
}

/// Evaluates the per-algorithm bounds that hold on every run (or, for
/// `sample-min`, in expectation) against a report.
pub fn check_report(report: &TrialReport) -> Vec<BoundCheck> {
    let cfg = &report.config;
    let mut checks = Vec::new();
    let mut push = |name: &str, n: usize, passed: bool, detail: String| {
        checks.push(BoundCheck { name: name.into(), n, passed, detail });
    };
    for s in &report.per_size {
        let n = s.n;
        push("correct", n, s.failures == 0, format!("{} of {} trials wrong", s.failures, s.trials));
        push("ledger balanced", n, s.unbalanced == 0, format!("{} of {} unbalanced", s.unbalanced, s.trials));
        let ceil_log = log2(n).ceil();
        match cfg.algorithm {
            Algorithm::Tournament => {
                let f = s.f_target.map_or(0, |f| f.max);
                push("f_min <= ceil(log n)", n, f as f64 <= ceil_log, format!("max f_min {f}"));
            }
            Algorithm::SampleMin => {
                let f = s.f_target.expect("minimum target");
                push("f_min <= 3 ceil(log n)", n, f.max as f64 <= 3.0 * ceil_log, format!("max f_min {}", f.max));
                push("mean f_min <= 9", n, f.mean <= 9.0, format!("mean f_min {:.3}", f.mean));
            }
            Algorithm::TreeMin => {
                let d = cfg.delta();
                let cap = d as f64 + 9.0 * Curve::LogBase(d).eval(n) * 3.0;
                push(
                    "f_rem <= delta + 27 log_delta n",
                    n,
                    s.f_max_rest.max as f64 <= cap,
                    format!("max f_rem {} cap {cap:.1}", s.f_max_rest.max),
                );
            }
            Algorithm::MergesortExp => {
                let cap = 4.0 * log2(n) * log2(n);
                push("f_max <= 4 log^2 n", n, s.f_max.max as f64 <= cap, format!("max f {}", s.f_max.max));
            }
            Algorithm::MergesortLinear if cfg.input == InputKind::WorstLinear && n >= 2 => {
                let f = s.f_max.max;
                push("f_max >= n/4 on the worst-case input", n, 4 * f >= n as u64, format!("max f {f}"));
            }
            Algorithm::Heapify => {
                let f = s.f_max.max;
                push("f_max <= 3 log n", n, n < 2 || f as f64 <= 3.0 * log2(n), format!("max f {f}"));
                push("work <= 2n", n, s.work.max <= 2 * n as u64, format!("max work {}", s.work.max));
            }
            _ => {}
        }
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let st = Stats::of(1..=100).unwrap();
        assert_eq!((st.p50, st.p99, st.max), (50, 99, 100));
        assert_eq!(st.mean, 50.5);
        let one = Stats::of([7]).unwrap();
        assert_eq!((one.mean, one.max, one.p50, one.p99), (7.0, 7, 7, 7));
        assert!(Stats::of([]).is_none());
    }

    #[test]
    fn fit_picks_the_generating_curve() {
        let sizes = [1 << 8, 1 << 12, 1 << 16, 1 << 20];
        for curve in [Curve::Log, Curve::LogSquared, Curve::LogLog, Curve::Linear] {
            let samples: Vec<(usize, f64)> = sizes.iter().map(|&n| (n, 2.5 * curve.eval(n))).collect();
            let fit = fit_growth(&samples, &Curve::candidates(None)).unwrap();
            assert_eq!(fit.best.curve, curve);
            assert!(fit.best.residual < 1e-9);
            assert!((fit.best.constant - 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_needs_three_sizes() {
        let samples = [(4, 1.0), (8, 2.0), (8, 2.1)];
        assert_eq!(fit_growth(&samples, &[Curve::Log]), Err(Error::InsufficientData(2)));
    }

    #[test]
    fn halver_specs_parse() {
        assert_eq!("exact".parse::<HalverSpec>().unwrap(), HalverSpec::Exact);
        assert_eq!("random:8".parse::<HalverSpec>().unwrap(), HalverSpec::Random { rounds: 8 });
        assert!("random:0".parse::<HalverSpec>().is_err());
        assert!("fast".parse::<HalverSpec>().is_err());
    }

    #[test]
    fn trial_streams_depend_on_every_key_part() {
        use rand::RngCore;
        let a = trial_rng(1, 8, 0).next_u64();
        assert_eq!(a, trial_rng(1, 8, 0).next_u64());
        assert_ne!(a, trial_rng(2, 8, 0).next_u64());
        assert_ne!(a, trial_rng(1, 9, 0).next_u64());
        assert_ne!(a, trial_rng(1, 8, 1).next_u64());
    }

    #[test]
    fn tournament_on_eight() {
        let report = run_experiment(&ExperimentConfig::new(Algorithm::Tournament, vec![8], 1, 0)).unwrap();
        assert_eq!(report.per_size[0].f_target.unwrap().max, 3);
        assert!(check_report(&report).iter().all(|c| c.passed));
    }

    #[test]
    fn every_algorithm_runs_on_small_inputs() {
        for alg in Algorithm::ALL {
            let mut cfg = ExperimentConfig::new(alg, vec![1, 2, 37, 200], 3, 5);
            cfg.rank = (alg == Algorithm::DetSelect).then_some(1);
            let report = run_experiment(&cfg).unwrap();
            for s in &report.per_size {
                assert_eq!((s.failures, s.unbalanced), (0, 0), "{alg} n={}", s.n);
                assert!(s.f_max.max >= s.f_max.p99 && s.f_max.p99 >= s.f_max.p50);
            }
            assert_eq!(report.fits.is_empty(), false, "{alg}");
        }
    }

    #[test]
    fn invalid_configs_name_the_field() {
        let mut cfg = ExperimentConfig::new(Algorithm::Tournament, vec![8], 0, 0);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field, .. }) if field == "trials"));
        cfg.trials = 1;
        cfg.sizes = vec![];
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field, .. }) if field == "sizes"));
        let mut cfg = ExperimentConfig::new(Algorithm::DetSelect, vec![8], 1, 0);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field, .. }) if field == "rank"));
        cfg.rank = Some(9);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field, .. }) if field == "rank"));
        let mut cfg = ExperimentConfig::new(Algorithm::TreeMin, vec![8], 1, 0);
        cfg.delta = Some(1);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field, .. }) if field == "delta"));
        assert!(ExperimentConfig::from_json(r#"{"algorithm":"nope","sizes":[1]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"algorithm":"heapify","sizes":[1],"typo":1}"#).is_err());
    }

    #[test]
    fn config_json_roundtrip_and_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"algorithm":"det-median","sizes":[64],"halver":"random:4","input":"uniform"}"#,
        )
        .unwrap();
        assert_eq!(cfg.trials, 1);
        assert_eq!(cfg.halver, Some(HalverSpec::Random { rounds: 4 }));
        let back = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&back).unwrap(), cfg);
    }

    #[test]
    fn reports_are_byte_identical_across_reruns() {
        let mut cfg = ExperimentConfig::new(Algorithm::RMedian, vec![100, 1000, 3000], 4, 9);
        cfg.preset = Some(Preset::SubLog);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn single_trial_report_shape() {
        let report = run_experiment(&ExperimentConfig::new(Algorithm::SampleMin, vec![50], 1, 3)).unwrap();
        let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        let rec = &json["per_size"][0];
        assert_eq!(rec["n"], 50);
        assert_eq!(rec["trials"], 1);
        assert_eq!(rec["f_target"]["mean"].as_f64().unwrap(), rec["f_target"]["max"].as_f64().unwrap());
        assert!(json["fits"].as_array().unwrap().is_empty());
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 1 + 4);
        assert!(csv.lines().nth(1).unwrap().starts_with("50,f_target,"));
    }

    #[test]
    fn empty_report_is_valid() {
        let report = TrialReport {
            config: ExperimentConfig::new(Algorithm::Heapify, vec![], 1, 0),
            per_size: vec![],
            fits: vec![],
        };
        let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(json["per_size"], serde_json::json!([]));
        assert_eq!(report.to_csv(), "n,metric,mean,max,p50,p99,trials\n");
    }

    #[test]
    fn merged_reports_match_a_single_run() {
        let cfg = |sizes: Vec<usize>| ExperimentConfig::new(Algorithm::Tournament, sizes, 2, 4);
        let whole = run_experiment(&cfg(vec![16, 64, 256])).unwrap();
        let parts = vec![
            run_experiment(&cfg(vec![256])).unwrap(),
            run_experiment(&cfg(vec![16, 64])).unwrap(),
        ];
        let merged = merge_reports(parts).unwrap();
        assert_eq!(merged.to_json().unwrap(), whole.to_json().unwrap());
        let clash = vec![run_experiment(&cfg(vec![16])).unwrap(), run_experiment(&cfg(vec![16])).unwrap()];
        assert!(merge_reports(clash).is_err());
        let other = ExperimentConfig::new(Algorithm::Heapify, vec![8], 1, 0);
        let mixed = vec![run_experiment(&cfg(vec![16])).unwrap(), run_experiment(&other).unwrap()];
        assert!(merge_reports(mixed).is_err());
    }

    #[test]
    fn trial_order_does_not_matter() {
        let cfg = ExperimentConfig::new(Algorithm::SampleMin, vec![500], 6, 2);
        let forward: Vec<TrialSample> = (0..6).map(|t| run_trial(&cfg, 500, t).unwrap()).collect();
        let mut backward: Vec<TrialSample> = (0..6).rev().map(|t| run_trial(&cfg, 500, t).unwrap()).collect();
        backward.reverse();
        assert_eq!(forward, backward);
        let a = SizeReport::from_samples(500, forward.clone());
        let mut shuffled = forward;
        shuffled.rotate_left(2);
        let b = SizeReport::from_samples(500, shuffled);
        assert_eq!((a.f_target, a.f_max, a.work), (b.f_target, b.f_max, b.work));
    }
}
