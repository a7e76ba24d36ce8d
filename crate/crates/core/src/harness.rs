//! Seeded experiment driver and brute-force oracles.
//!
//! An experiment is described by a JSON [`ExperimentConfig`]. Running it
//! produces an [`ExperimentReport`] and, when an output directory is given,
//! writes `report.json` plus CSV tables into `<output_dir>/<id>-seed<seed>/`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attainability::{
    envelope_check, scalarize, simplex_grid, trace_boundary, AttainConfig, GuaranteeVector,
    MultiCost,
};
use crate::boosting::{
    boost_binary, boost_mo, boost_to_list, confidence_runs, list_to_weak, BoostConfig, MoReport, CHECK_TOL,
};
use crate::error::{Error, Result};
use crate::games::{game_value, maximin_strategy, threshold_ladder, CostMatrix, LabelSet, SimplexDist};
use crate::learners::{
    coin_on_j_learner, coin_trivial_learner, planted_noise_learner, planted_noise_learner_multi, Behavior,
    Guarantee, Hypothesis, Instance, Query, Sample, SampleComplexity, WeakLearnerSpec,
};

/// Independent check of one computed quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle: f64,
    pub fast: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(quantity: impl Into<String>, oracle: f64, fast: f64, tolerance: f64) -> Self {
        let discrepancy = (oracle - fast).abs();
        OracleReport { quantity: quantity.into(), oracle, fast, discrepancy, tolerance, pass: discrepancy <= tolerance }
    }
}

/// min over a grid on Δ_Y of max over j ∈ J of w(p, j).
///
/// The inner maximum of a bilinear form over Δ_J sits at a vertex, so only
/// the outer simplex is gridded.
pub fn oracle_game_value(w: &CostMatrix, set: LabelSet, grid_step: f64) -> Result<f64> {
    let k = w.k();
    if k > 3 {
        return Err(Error::capacity(format!("the grid oracle handles k ≤ 3, got k = {k}")));
    }
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::input(format!("grid step {grid_step} must lie in (0, 0.5]")));
    }
    if set.is_empty() || !set.fits(k) {
        return Err(Error::input(format!("subset {set} is not a nonempty subset of 1..={k}")));
    }
    let n = (1.0 / grid_step).round() as usize;
    let labels: Vec<usize> = set.iter().collect();
    let worst = |p: &[f64]| labels.iter().map(|&j| w.cost_against(p, j)).fold(0.0, f64::max);
    let nf = n as f64;
    let best = if k == 2 {
        (0..=n).into_par_iter().map(|a| worst(&[a as f64 / nf, (n - a) as f64 / nf])).reduce(|| f64::INFINITY, f64::min)
    } else {
        (0..=n)
            .into_par_iter()
            .map(|a| {
                (0..=n - a)
                    .map(|b| worst(&[a as f64 / nf, b as f64 / nf, (n - a - b) as f64 / nf]))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    };
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CostSpec {
    Matrix { k: usize, entries: Vec<Vec<f64>> },
    File { path: PathBuf },
    ZeroOne { k: usize },
    Binary { w_plus: f64, w_minus: f64 },
    Random { k: usize, seed: u64 },
}

impl CostSpec {
    pub fn build(&self) -> Result<CostMatrix> {
        match self {
            CostSpec::Matrix { k, entries } => {
                if entries.len() != *k {
                    return Err(Error::input(format!("cost spec declares k = {k} but has {} rows", entries.len())));
                }
                CostMatrix::new(entries.clone())
            }
            CostSpec::File { path } => CostMatrix::load(path),
            CostSpec::ZeroOne { k } => CostMatrix::zero_one(*k),
            CostSpec::Binary { w_plus, w_minus } => CostMatrix::binary(*w_plus, *w_minus),
            CostSpec::Random { k, seed } => CostMatrix::random(*k, *seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MultiCostSpec {
    PopulationDriven,
    List { costs: Vec<CostSpec> },
}

impl MultiCostSpec {
    pub fn build(&self) -> Result<MultiCost> {
        match self {
            MultiCostSpec::PopulationDriven => Ok(MultiCost::population_driven()),
            MultiCostSpec::List { costs } => MultiCost::new(costs.iter().map(CostSpec::build).collect::<Result<_>>()?),
        }
    }

    pub fn is_population_driven(&self) -> bool {
        matches!(self, MultiCostSpec::PopulationDriven)
    }
}

/// Optional overrides of the boosting schedule.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostOverrides {
    pub rounds: Option<usize>,
    pub eta: Option<f64>,
    pub m_hat: Option<usize>,
    pub delta: Option<f64>,
}

impl BoostOverrides {
    fn config(&self, seed: u64) -> BoostConfig {
        let base = BoostConfig::seeded(seed);
        BoostConfig {
            rounds: self.rounds,
            eta: self.eta,
            m_hat: self.m_hat,
            delta: self.delta.unwrap_or(base.delta),
            record_rounds: false,
            ..base
        }
    }
}

fn default_domain() -> usize {
    100
}
fn default_sample() -> usize {
    2000
}
fn default_train_fraction() -> f64 {
    0.5
}
fn default_epsilon() -> f64 {
    0.02
}
fn default_equivalence_epsilon() -> f64 {
    0.05
}
fn default_resolution() -> usize {
    100
}
fn default_alpha_grid() -> usize {
    400
}
fn default_boundary_tol() -> f64 {
    1e-6
}
fn default_pool_fraction() -> f64 {
    0.8
}
fn default_alpha_divisions() -> usize {
    10
}
fn default_distributions() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    /// Sweep z across V(w) for a binary cost.
    Dichotomy {
        cost: CostSpec,
        z_values: Vec<f64>,
        #[serde(default = "default_domain")]
        domain_size: usize,
        #[serde(default = "default_sample")]
        sample_size: usize,
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default)]
        boost: BoostOverrides,
    },
    /// Achieved losses per ladder bucket, plus the coin floor instance.
    Multichotomy {
        cost: CostSpec,
        z_values: Vec<f64>,
        #[serde(default = "default_domain")]
        domain_size: usize,
        #[serde(default = "default_sample")]
        sample_size: usize,
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default)]
        boost: BoostOverrides,
    },
    /// Coin-attainability boundary of a two-objective cost.
    RegionTrace {
        costs: MultiCostSpec,
        #[serde(default = "default_resolution")]
        resolution: usize,
        #[serde(default = "default_alpha_grid")]
        alpha_grid: usize,
        #[serde(default = "default_boundary_tol")]
        tolerance: f64,
    },
    /// Multi-objective learners from scalarised ones and back.
    Equivalence {
        costs: MultiCostSpec,
        z: Vec<f64>,
        #[serde(default = "default_domain")]
        domain_size: usize,
        #[serde(default = "default_sample")]
        sample_size: usize,
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
        #[serde(default = "default_equivalence_epsilon")]
        epsilon: f64,
        /// Planted errors are confined to a pool holding this fraction of each budget.
        #[serde(default = "default_pool_fraction")]
        pool_fraction: f64,
        #[serde(default = "default_alpha_divisions")]
        alpha_divisions: usize,
        #[serde(default = "default_distributions")]
        distributions: usize,
        #[serde(default)]
        boost: BoostOverrides,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Dichotomy { .. } => "dichotomy",
            Experiment::Multichotomy { .. } => "multichotomy",
            Experiment::RegionTrace { .. } => "region-trace",
            Experiment::Equivalence { .. } => "equivalence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: String,
    pub seed: u64,
    pub experiment: Experiment,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads a config; relative cost-file paths resolve against the config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::input(format!("bad experiment config: {e}")))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |spec: &mut CostSpec| {
            if let CostSpec::File { path } = spec {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        match &mut self.experiment {
            Experiment::Dichotomy { cost, .. } | Experiment::Multichotomy { cost, .. } => fix(cost),
            Experiment::RegionTrace { costs, .. } | Experiment::Equivalence { costs, .. } => {
                if let MultiCostSpec::List { costs } = costs {
                    costs.iter_mut().for_each(fix);
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(Error::input(format!("experiment id {:?} must be a nonempty plain name", self.id)));
        }
        let check_files = |spec: &CostSpec| -> Result<()> {
            if let CostSpec::File { path } = spec {
                if !path.exists() {
                    return Err(Error::input(format!("cost file {} does not exist", path.display())));
                }
            }
            Ok(())
        };
        let check_split = |domain: usize, m: usize, frac: f64| -> Result<()> {
            if domain == 0 || m < 2 || !(frac > 0.0 && frac < 1.0) {
                return Err(Error::input("need a nonempty domain, at least two draws and a train fraction in (0, 1)"));
            }
            Ok(())
        };
        match &self.experiment {
            Experiment::Dichotomy { cost, z_values, domain_size, sample_size, train_fraction, .. }
            | Experiment::Multichotomy { cost, z_values, domain_size, sample_size, train_fraction, .. } => {
                check_files(cost)?;
                check_split(*domain_size, *sample_size, *train_fraction)?;
                if z_values.is_empty() || z_values.iter().any(|z| !(0.0..=1.0).contains(z)) {
                    return Err(Error::input("z_values must be a nonempty list of numbers in [0, 1]"));
                }
            }
            Experiment::RegionTrace { costs, resolution, .. } => {
                if let MultiCostSpec::List { costs } = costs {
                    costs.iter().try_for_each(check_files)?;
                }
                if *resolution == 0 {
                    return Err(Error::input("resolution must be positive"));
                }
            }
            Experiment::Equivalence { costs, z, domain_size, sample_size, train_fraction, .. } => {
                if let MultiCostSpec::List { costs } = costs {
                    costs.iter().try_for_each(check_files)?;
                }
                check_split(*domain_size, *sample_size, *train_fraction)?;
                GuaranteeVector::new(z.clone())?;
            }
        }
        Ok(())
    }

    pub fn run_dir(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|d| d.join(format!("{}-seed{}", self.id, self.seed)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedCell {
    pub rounds: usize,
    pub consistent: bool,
    pub training_error: f64,
    pub holdout_cost: f64,
    pub holdout_zero_one: f64,
    pub regret_within_bound: bool,
    pub mutual_exclusion: bool,
    pub guarantee_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinCell {
    pub certified: bool,
    pub holdout_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyCell {
    pub z: f64,
    pub seed: u64,
    pub margin: f64,
    pub boosted: Option<BoostedCell>,
    /// Message of the booster's refusal, if it refused.
    pub rejected: Option<String>,
    pub coin: Option<CoinCell>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub value: f64,
    pub cells: Vec<DichotomyCell>,
    /// Largest z that was boosted and smallest z certified trivial.
    pub last_boosted: Option<f64>,
    pub first_trivial: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketCell {
    pub z: f64,
    pub seed: u64,
    pub bucket: usize,
    pub level: f64,
    pub next_level: Option<f64>,
    pub sigma: Option<f64>,
    pub max_list_size: usize,
    pub max_list_value: f64,
    pub training_miss_rate: f64,
    /// Holdout loss of the list-to-weak predictor.
    pub achieved: f64,
    /// Holdout loss of the same pipeline on the coin instance built from the level's witness.
    pub floor: Option<f64>,
    pub floor_subset: Option<LabelSet>,
    /// Both boosting runs of the cell stayed within the Hedge regret bound.
    pub regret_within_bound: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultichotomyReport {
    pub levels: Vec<f64>,
    pub cells: Vec<BucketCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub points: Vec<(f64, f64)>,
    pub envelope: Vec<f64>,
    pub max_discrepancy: f64,
    /// max |√z₁ + √z₂ − 1| for the population-driven pair.
    pub max_sqrt_residual: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub z: Vec<f64>,
    pub pool_size: usize,
    /// Holdout loss minus z_i, per objective, for the selected forward run.
    pub forward_slack: Vec<f64>,
    pub forward_pass: bool,
    pub selected_run: usize,
    pub runs: usize,
    pub forward: Option<MoReport>,
    /// max over α and query distributions of L^{w_α} − z_α.
    pub converse_slack: f64,
    pub converse_pass: bool,
    pub violation_pass: bool,
    /// Same booster fed unrestricted greedy scalar learners; reported, not asserted.
    pub greedy_diagnostic: Option<MoReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum ExperimentResult {
    Dichotomy(DichotomyReport),
    Multichotomy(MultichotomyReport),
    RegionTrace(RegionReport),
    Equivalence(EquivalenceReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub seed: u64,
    pub config: Experiment,
    pub oracles: Vec<OracleReport>,
    pub result: ExperimentResult,
    pub pass: bool,
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_instance(domain: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Instance> {
    Instance::random_with(domain, &SimplexDist::uniform(k), rng)
}

fn split_sample(inst: &Instance, m: usize, frac: f64, rng: &mut ChaCha8Rng) -> (Sample, Sample) {
    Sample::draw(inst, m, rng).split(frac)
}

#[allow(clippy::too_many_arguments)]
fn dichotomy(
    seed: u64,
    cost: &CostSpec,
    z_values: &[f64],
    domain_size: usize,
    sample_size: usize,
    train_fraction: f64,
    epsilon: f64,
    boost: &BoostOverrides,
) -> Result<(DichotomyReport, Vec<OracleReport>)> {
    let w = cost.build()?;
    if w.k() != 2 {
        return Err(Error::input(format!("the dichotomy experiment needs k = 2, got k = {}", w.k())));
    }
    let value = game_value(&w, LabelSet::full(2))?.value;
    let mut oracles = vec![OracleReport::new(
        "V(w) grid oracle (step 1e-3)",
        oracle_game_value(&w, LabelSet::full(2), 1e-3)?,
        value,
        2e-3,
    )];
    let (wp, wm) = (w.w_plus(), w.w_minus());
    if wp > 0.0 && wm > 0.0 {
        oracles.push(OracleReport::new("V(w) closed form w+w-/(w+ + w-)", wp * wm / (wp + wm), value, 1e-9));
    }
    let zero_one = CostMatrix::zero_one(2)?;

    let cells: Vec<DichotomyCell> = z_values
        .par_iter()
        .enumerate()
        .map(|(idx, &z)| -> Result<DichotomyCell> {
            let cell_seed = seed.wrapping_add(idx as u64);
            let mut rng = rng_for(cell_seed);
            let inst = uniform_instance(domain_size, 2, &mut rng)?;
            let (train, holdout) = split_sample(&inst, sample_size, train_fraction, &mut rng);
            let learner = planted_noise_learner(&w, z, &inst)?;
            let cfg = boost.config(cell_seed);
            let margin = (value - z).max(0.0);
            match boost_binary(&learner, &train, domain_size, &cfg) {
                Ok(out) => {
                    let b = BoostedCell {
                        rounds: out.report.params.rounds,
                        consistent: out.report.consistent,
                        training_error: out.report.training_error,
                        holdout_cost: out.hypothesis.sample_loss(&w, &holdout),
                        holdout_zero_one: out.hypothesis.sample_loss(&zero_one, &holdout),
                        regret_within_bound: out.report.regret.within_bound,
                        mutual_exclusion: out.report.mutual_exclusion.unwrap_or(false),
                        guarantee_violations: out.report.guarantee_violations,
                    };
                    let pass = b.consistent
                        && b.holdout_cost <= epsilon
                        && b.holdout_zero_one <= epsilon
                        && b.regret_within_bound;
                    Ok(DichotomyCell { z, seed: cell_seed, margin, boosted: Some(b), rejected: None, coin: None, pass })
                }
                Err(e @ Error::NotBoostable { .. }) => {
                    let wm = MultiCost::single(w.clone());
                    let zv = GuaranteeVector::new(vec![z])?;
                    let coin = match coin_trivial_learner(&wm, &zv, &AttainConfig::default()) {
                        Ok(spec) => {
                            let examples = examples_of(&train);
                            let h = spec.learn(&Query { examples: &examples, distribution: None }, domain_size)?;
                            CoinCell { certified: true, holdout_cost: h.sample_loss(&w, &holdout) }
                        }
                        Err(err) if err.is_contract() => CoinCell { certified: false, holdout_cost: f64::NAN },
                        Err(err) => return Err(err),
                    };
                    let pass = coin.certified && coin.holdout_cost <= z + epsilon;
                    Ok(DichotomyCell {
                        z,
                        seed: cell_seed,
                        margin,
                        boosted: None,
                        rejected: Some(e.to_string()),
                        coin: Some(coin),
                        pass,
                    })
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let last_boosted = cells.iter().filter(|c| c.boosted.is_some()).map(|c| c.z).reduce(f64::max);
    let first_trivial = cells.iter().filter(|c| c.coin.is_some()).map(|c| c.z).reduce(f64::min);
    Ok((DichotomyReport { value, cells, last_boosted, first_trivial }, oracles))
}

fn examples_of(sample: &Sample) -> Vec<crate::learners::Example> {
    sample
        .points
        .iter()
        .zip(&sample.labels)
        .map(|(&point, &label)| crate::learners::Example { point, label, count: 1 })
        .collect()
}

/// Runs boost_to_list then list_to_weak and returns (holdout loss, list stats).
struct PipelineResult {
    sigma: f64,
    max_list_size: usize,
    max_list_value: f64,
    miss: f64,
    holdout: f64,
    regret_ok: bool,
}

fn list_pipeline(
    w: &CostMatrix,
    learner: &WeakLearnerSpec,
    train: &Sample,
    holdout: &Sample,
    domain_size: usize,
    cfg: &BoostConfig,
) -> Result<PipelineResult> {
    let out = boost_to_list(learner, train, domain_size, cfg)?;
    let sigma = out.report.params.sigma.unwrap_or(0.0);
    let bound = out.list.threshold;
    let h = list_to_weak(w, &out.list.lists, bound, CHECK_TOL)?;
    Ok(PipelineResult {
        sigma,
        max_list_size: out.list.max_list_size(),
        max_list_value: out.list.max_list_value()?,
        miss: out.list.miss_rate(train),
        holdout: h.sample_loss(w, holdout),
        regret_ok: out.report.regret.within_bound,
    })
}

#[allow(clippy::too_many_arguments)]
fn multichotomy(
    seed: u64,
    cost: &CostSpec,
    z_values: &[f64],
    domain_size: usize,
    sample_size: usize,
    train_fraction: f64,
    epsilon: f64,
    boost: &BoostOverrides,
) -> Result<(MultichotomyReport, Vec<OracleReport>)> {
    let w = cost.build()?;
    if w.k() > 6 {
        return Err(Error::capacity(format!("the multichotomy experiment handles k ≤ 6, got k = {}", w.k())));
    }
    let ladder = threshold_ladder(&w)?;
    let mut oracles = Vec::new();
    if w.k() <= 3 {
        for set in LabelSet::all_nonempty(w.k()) {
            let fast = game_value(&w, set)?.value;
            oracles.push(OracleReport::new(format!("V_J(w) grid oracle, J = {set}"), oracle_game_value(&w, set, 1e-3)?, fast, 2e-3));
        }
    }
    let k = w.k();
    let cells: Vec<BucketCell> = z_values
        .par_iter()
        .enumerate()
        .map(|(idx, &z)| -> Result<BucketCell> {
            let cell_seed = seed.wrapping_add(idx as u64);
            let mut rng = rng_for(cell_seed);
            let n = ladder.bucket_of(z);
            let level = ladder.level(n);
            let next_level = ladder.levels.get(n).copied();
            let cfg = boost.config(cell_seed);

            let inst = uniform_instance(domain_size, k, &mut rng)?;
            let (train, holdout) = split_sample(&inst, sample_size, train_fraction, &mut rng);
            let learner = planted_noise_learner(&w, z, &inst)?;
            let (achieved, stats) = if next_level.is_some() {
                let r = list_pipeline(&w, &learner, &train, &holdout, domain_size, &cfg)?;
                (r.holdout, Some(r))
            } else {
                // Top bucket: the full list is already bounded and the minimax coin of Y attains V(w).
                let p = game_value(&w, LabelSet::full(k))?.minimax_strategy;
                (Hypothesis::RandomGuess(p).sample_loss(&w, &holdout), None)
            };

            // Floor: labels drawn from the maximin marginal of a witness of v_n, learner = its coin.
            let witness = ladder.witnesses[n - 1].iter().copied().filter(|s| s.len() >= 2).max_by_key(|s| (s.len(), std::cmp::Reverse(s.mask())));
            let mut regret_ok = stats.as_ref().is_none_or(|s| s.regret_ok);
            let (floor, floor_subset) = match (witness, next_level) {
                (Some(set), Some(_)) => {
                    let q = maximin_strategy(&w, set)?;
                    let floor_inst = Instance::random_with(domain_size, &q, &mut rng)?;
                    let (ftrain, fhold) = split_sample(&floor_inst, sample_size, train_fraction, &mut rng);
                    let coin = coin_on_j_learner(&w, set, &floor_inst)?;
                    let r = list_pipeline(&w, &coin, &ftrain, &fhold, domain_size, &cfg)?;
                    regret_ok &= r.regret_ok;
                    (Some(r.holdout), Some(set))
                }
                _ => (None, None),
            };
            let pass = achieved <= level + epsilon && floor.is_none_or(|f| f >= level - epsilon) && regret_ok;
            Ok(BucketCell {
                z,
                seed: cell_seed,
                bucket: n,
                level,
                next_level,
                sigma: stats.as_ref().map(|s| s.sigma),
                max_list_size: stats.as_ref().map_or(k, |s| s.max_list_size),
                max_list_value: stats.as_ref().map_or(level, |s| s.max_list_value),
                training_miss_rate: stats.as_ref().map_or(0.0, |s| s.miss),
                achieved,
                floor,
                floor_subset,
                regret_within_bound: regret_ok,
                pass,
            })
        })
        .collect::<Result<_>>()?;
    Ok((MultichotomyReport { levels: ladder.levels.clone(), cells }, oracles))
}

fn region_trace(costs: &MultiCostSpec, resolution: usize, alpha_grid: usize, tol: f64) -> Result<(RegionReport, Vec<OracleReport>)> {
    let w = costs.build()?;
    let cfg = AttainConfig::default();
    let points = trace_boundary(&w, resolution, tol, &cfg)?;
    let env = envelope_check(&w, &points, alpha_grid)?;
    let max_sqrt_residual = costs.is_population_driven().then(|| {
        points.iter().map(|p| (p.z1.sqrt() + p.z2.sqrt() - 1.0).abs()).fold(0.0, f64::max)
    });
    let mut oracles = vec![OracleReport::new("grid boundary vs halfspace envelope", 0.0, env.max_discrepancy, 5e-3)];
    if let Some(res) = max_sqrt_residual {
        oracles.push(OracleReport::new("boundary vs sqrt(z1) + sqrt(z2) = 1", 0.0, res, 5e-3));
    }
    let pass = oracles.iter().all(|o| o.pass);
    Ok((
        RegionReport {
            points: points.iter().map(|p| (p.z1, p.z2)).collect(),
            envelope: env.envelope,
            max_discrepancy: env.max_discrepancy,
            max_sqrt_residual,
            pass,
        },
        oracles,
    ))
}

/// Points that may carry planted errors: added in random order while every
/// objective's worst-case mass stays within `fraction · z_i`.
pub fn planted_pool(w: &MultiCost, z: &GuaranteeVector, inst: &Instance, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = inst.domain_size();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut used = vec![0.0; w.r()];
    let mut pool = Vec::new();
    for x in order {
        let y = inst.label(x);
        let worst: Vec<f64> =
            w.costs().iter().map(|c| (0..w.k()).map(|l| c.get(l, y)).fold(0.0, f64::max) / n as f64).collect();
        if worst.iter().all(|&v| v == 0.0) {
            continue;
        }
        let fits = worst.iter().zip(&used).zip(z.values()).all(|((v, u), zi)| u + v <= fraction * zi + 1e-12);
        if fits {
            for (u, v) in used.iter_mut().zip(&worst) {
                *u += v;
            }
            pool.push(x);
        }
    }
    pool.sort_unstable();
    pool
}

pub fn planted_scalar_learner(w: &MultiCost, z: &GuaranteeVector, alpha: &SimplexDist, target: &[usize], pool: Option<Vec<usize>>) -> Result<WeakLearnerSpec> {
    Ok(WeakLearnerSpec {
        guarantee: Guarantee::Scalar { w: scalarize(w, alpha)?, z: z.scalarize(alpha.probs()) },
        sample_complexity: SampleComplexity::default(),
        behavior: Behavior::PlantedNoise { target: target.to_vec(), pool },
    })
}

#[allow(clippy::too_many_arguments)]
fn equivalence(
    seed: u64,
    costs: &MultiCostSpec,
    z: &[f64],
    domain_size: usize,
    sample_size: usize,
    train_fraction: f64,
    epsilon: f64,
    pool_fraction: f64,
    alpha_divisions: usize,
    distributions: usize,
    boost: &BoostOverrides,
) -> Result<(EquivalenceReport, Vec<OracleReport>)> {
    let w = costs.build()?;
    let z = GuaranteeVector::new(z.to_vec())?;
    if w.r() != z.r() {
        return Err(Error::input(format!("{} objectives but {} guarantees", w.r(), z.r())));
    }
    if w.r() > 3 {
        return Err(Error::capacity(format!("the equivalence experiment handles r ≤ 3, got r = {}", w.r())));
    }
    let mut rng = rng_for(seed);
    let inst = uniform_instance(domain_size, w.k(), &mut rng)?;
    let (train, holdout) = split_sample(&inst, sample_size, train_fraction, &mut rng);
    let (select, evaluate) = holdout.split(0.5);
    let pool = planted_pool(&w, &z, &inst, pool_fraction, &mut rng);
    let target = inst.target().to_vec();

    // Forward: scalar learners for every α, boosted over objectives.
    let base = boost.config(seed);
    let runs = confidence_runs(w.r(), base.delta);
    let factory = |alpha: &SimplexDist| planted_scalar_learner(&w, &z, alpha, &target, Some(pool.clone()));
    let outcomes: Vec<_> = (0..runs)
        .into_par_iter()
        .map(|i| boost_mo(&w, &z, &factory, &train, domain_size, &BoostConfig { seed: seed.wrapping_add(1 + i as u64), ..base.clone() }))
        .collect::<Result<_>>()?;
    let excess = |h: &Hypothesis, s: &Sample| -> f64 {
        w.costs().iter().zip(z.values()).map(|(c, zi)| h.sample_loss(c, s) - zi).fold(f64::NEG_INFINITY, f64::max)
    };
    let selected_run = (0..runs)
        .min_by(|&a, &b| excess(&outcomes[a].hypothesis, &select).total_cmp(&excess(&outcomes[b].hypothesis, &select)).then(a.cmp(&b)))
        .expect("at least one run");
    let chosen = &outcomes[selected_run];
    let forward_slack: Vec<f64> =
        w.costs().iter().zip(z.values()).map(|(c, zi)| chosen.hypothesis.sample_loss(c, &evaluate) - zi).collect();
    let mut forward = chosen.report.clone();
    forward.holdout_losses = Some(w.costs().iter().map(|c| chosen.hypothesis.sample_loss(c, &evaluate)).collect());
    let forward_pass = forward_slack.iter().all(|&s| s <= epsilon);
    let violation_pass = outcomes
        .iter()
        .all(|o| o.report.violation_fraction.iter().all(|&v| v <= o.report.violation_bound + 0.02));

    // Converse: the planted multi-objective learner meets every scalarised guarantee.
    let multi = planted_noise_learner_multi(&w, &z, &inst, Some(pool.clone()))?;
    let mut converse_slack = f64::NEG_INFINITY;
    let mut drng = rng_for(seed ^ 0x5eed);
    let alphas = simplex_grid(w.r(), alpha_divisions.max(1));
    for _ in 0..distributions.max(1) {
        let weights: Vec<f64> = (0..domain_size).map(|_| -(1.0 - drng.random::<f64>()).ln()).collect();
        let d = SimplexDist::from_weights(&weights)?;
        let h = multi.learn(&Query { examples: &[], distribution: Some(d.probs()) }, domain_size)?;
        for alpha in &alphas {
            let a = SimplexDist::from_weights(alpha)?;
            let wa = scalarize(&w, &a)?;
            let l = crate::learners::loss(&wa, &h, &inst, &d)?;
            converse_slack = converse_slack.max(l - z.scalarize(alpha));
        }
    }
    let converse_pass = converse_slack <= epsilon;

    // Diagnostic: unrestricted greedy scalar learners.
    let greedy = |alpha: &SimplexDist| planted_scalar_learner(&w, &z, alpha, &target, None);
    let greedy_diagnostic = if w.r() > 1 {
        let mut g = boost_mo(&w, &z, &greedy, &train, domain_size, &BoostConfig { seed: seed.wrapping_add(1), ..base.clone() })?;
        g.report.holdout_losses = Some(w.costs().iter().map(|c| g.hypothesis.sample_loss(c, &evaluate)).collect());
        Some(g.report)
    } else {
        None
    };

    Ok((
        EquivalenceReport {
            z: z.values().to_vec(),
            pool_size: pool.len(),
            forward_slack,
            forward_pass,
            selected_run,
            runs,
            forward: Some(forward),
            converse_slack,
            converse_pass,
            violation_pass,
            greedy_diagnostic,
        },
        Vec::new(),
    ))
}

/// Runs an experiment without touching the filesystem.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let seed = cfg.seed;
    let (result, oracles) = match &cfg.experiment {
        Experiment::Dichotomy { cost, z_values, domain_size, sample_size, train_fraction, epsilon, boost } => {
            let (r, o) = dichotomy(seed, cost, z_values, *domain_size, *sample_size, *train_fraction, *epsilon, boost)?;
            (ExperimentResult::Dichotomy(r), o)
        }
        Experiment::Multichotomy { cost, z_values, domain_size, sample_size, train_fraction, epsilon, boost } => {
            let (r, o) =
                multichotomy(seed, cost, z_values, *domain_size, *sample_size, *train_fraction, *epsilon, boost)?;
            (ExperimentResult::Multichotomy(r), o)
        }
        Experiment::RegionTrace { costs, resolution, alpha_grid, tolerance } => {
            let (r, o) = region_trace(costs, *resolution, *alpha_grid, *tolerance)?;
            (ExperimentResult::RegionTrace(r), o)
        }
        Experiment::Equivalence {
            costs,
            z,
            domain_size,
            sample_size,
            train_fraction,
            epsilon,
            pool_fraction,
            alpha_divisions,
            distributions,
            boost,
        } => {
            let (r, o) = equivalence(
                seed,
                costs,
                z,
                *domain_size,
                *sample_size,
                *train_fraction,
                *epsilon,
                *pool_fraction,
                *alpha_divisions,
                *distributions,
                boost,
            )?;
            (ExperimentResult::Equivalence(r), o)
        }
    };
    let result_pass = match &result {
        ExperimentResult::Dichotomy(r) => r.cells.iter().all(|c| c.pass),
        ExperimentResult::Multichotomy(r) => r.cells.iter().all(|c| c.pass),
        ExperimentResult::RegionTrace(r) => r.pass,
        ExperimentResult::Equivalence(r) => r.forward_pass && r.converse_pass && r.violation_pass,
    };
    let pass = result_pass && oracles.iter().all(|o| o.pass);
    Ok(ExperimentReport { id: cfg.id.clone(), seed, config: cfg.experiment.clone(), oracles, result, pass })
}

fn fmt9(v: f64) -> String {
    format!("{v:.9}")
}

fn write_tables(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut table = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<()> {
        let path = dir.join(name);
        let mut wtr = csv::Writer::from_path(&path)?;
        wtr.write_record(header)?;
        for r in rows {
            wtr.write_record(&r)?;
        }
        wtr.flush()?;
        written.push(path);
        Ok(())
    };
    match &report.result {
        ExperimentResult::Dichotomy(r) => table(
            "cells.csv",
            &["z", "margin", "outcome", "training_error", "holdout_cost", "holdout_zero_one", "rounds", "pass"],
            r.cells
                .iter()
                .map(|c| match (&c.boosted, &c.coin) {
                    (Some(b), _) => vec![
                        fmt9(c.z),
                        fmt9(c.margin),
                        "boosted".into(),
                        fmt9(b.training_error),
                        fmt9(b.holdout_cost),
                        fmt9(b.holdout_zero_one),
                        b.rounds.to_string(),
                        c.pass.to_string(),
                    ],
                    (None, coin) => vec![
                        fmt9(c.z),
                        fmt9(c.margin),
                        if coin.as_ref().is_some_and(|k| k.certified) { "trivial".into() } else { "rejected".into() },
                        String::new(),
                        coin.as_ref().map_or(String::new(), |k| fmt9(k.holdout_cost)),
                        String::new(),
                        "0".into(),
                        c.pass.to_string(),
                    ],
                })
                .collect(),
        )?,
        ExperimentResult::Multichotomy(r) => table(
            "cells.csv",
            &["z", "bucket", "level", "achieved", "floor", "max_list_size", "pass"],
            r.cells
                .iter()
                .map(|c| {
                    vec![
                        fmt9(c.z),
                        c.bucket.to_string(),
                        fmt9(c.level),
                        fmt9(c.achieved),
                        c.floor.map_or(String::new(), fmt9),
                        c.max_list_size.to_string(),
                        c.pass.to_string(),
                    ]
                })
                .collect(),
        )?,
        ExperimentResult::RegionTrace(r) => {
            table(
                "boundary.csv",
                &["z1", "z2", "attainable"],
                r.points.iter().map(|(a, b)| vec![fmt9(*a), fmt9(*b), "true".into()]).collect(),
            )?;
            table(
                "envelope.csv",
                &["z1", "grid_z2", "envelope_z2", "discrepancy"],
                r.points
                    .iter()
                    .zip(&r.envelope)
                    .map(|((a, b), e)| vec![fmt9(*a), fmt9(*b), fmt9(*e), fmt9((b - e).abs())])
                    .collect(),
            )?;
        }
        ExperimentResult::Equivalence(r) => table(
            "objectives.csv",
            &["objective", "z", "forward_slack", "violation_fraction"],
            r.forward_slack
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    vec![
                        (i + 1).to_string(),
                        fmt9(r.z[i]),
                        fmt9(*s),
                        r.forward.as_ref().map_or(String::new(), |f| fmt9(f.violation_fraction[i])),
                    ]
                })
                .collect(),
        )?,
    }
    table(
        "oracles.csv",
        &["quantity", "oracle", "fast", "discrepancy", "tolerance", "pass"],
        report
            .oracles
            .iter()
            .map(|o| {
                vec![o.quantity.clone(), fmt9(o.oracle), fmt9(o.fast), fmt9(o.discrepancy), fmt9(o.tolerance), o.pass.to_string()]
            })
            .collect(),
    )?;
    Ok(written)
}

/// Writes `report.json` and the CSV tables into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
    let mut written = vec![path];
    written.extend(write_tables(report, dir)?);
    Ok(written)
}

/// Runs the experiment and writes its artefacts when the config names an output directory.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Option<PathBuf>)> {
    let report = run_experiment(cfg)?;
    let dir = cfg.run_dir();
    if let Some(d) = &dir {
        write_report(&report, d)?;
    }
    Ok((report, dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_oracle_examples() {
        let w = CostMatrix::zero_one(2).unwrap();
        assert!((oracle_game_value(&w, LabelSet::full(2), 1e-3).unwrap() - 0.5).abs() <= 1e-3);
        let w = CostMatrix::binary(1.0, 0.25).unwrap();
        assert!((oracle_game_value(&w, LabelSet::full(2), 1e-3).unwrap() - 0.2).abs() <= 2e-3);
        assert_eq!(oracle_game_value(&w, LabelSet::singleton(1), 1e-2).unwrap(), 0.0);
        assert!(oracle_game_value(&CostMatrix::zero_one(4).unwrap(), LabelSet::full(4), 1e-2).is_err());
    }

    #[test]
    fn config_round_trip() {
        let cfg = ExperimentConfig {
            id: "d".into(),
            seed: 3,
            experiment: Experiment::Dichotomy {
                cost: CostSpec::Binary { w_plus: 1.0, w_minus: 1.0 },
                z_values: vec![0.3, 0.6],
                domain_size: 20,
                sample_size: 100,
                train_fraction: 0.5,
                epsilon: 0.02,
                boost: BoostOverrides::default(),
            },
            output_dir: None,
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
        let minimal = r#"{"id":"x","seed":1,"experiment":{"kind":"region-trace","costs":{"type":"population-driven"}}}"#;
        let parsed: ExperimentConfig = serde_json::from_str(minimal).unwrap();
        assert!(matches!(parsed.experiment, Experiment::RegionTrace { resolution: 100, .. }));
    }

    #[test]
    fn small_dichotomy_passes() {
        let cfg = ExperimentConfig {
            id: "d".into(),
            seed: 3,
            experiment: Experiment::Dichotomy {
                cost: CostSpec::Binary { w_plus: 1.0, w_minus: 1.0 },
                z_values: vec![0.3, 0.5, 0.6],
                domain_size: 20,
                sample_size: 400,
                train_fraction: 0.5,
                epsilon: 0.02,
                boost: BoostOverrides::default(),
            },
            output_dir: None,
        };
        let report = run_experiment(&cfg).unwrap();
        assert!(report.pass, "{report:#?}");
        let ExperimentResult::Dichotomy(d) = &report.result else { panic!() };
        assert_eq!(d.last_boosted, Some(0.3));
        assert_eq!(d.first_trivial, Some(0.5));
    }
}
