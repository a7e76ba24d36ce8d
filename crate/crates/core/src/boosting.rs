//! Hedge-based boosters and the list/weak conversions.
//!
//! Sample weights live in log space as η times the cumulative cost of each
//! index, so the run is insensitive to over- and underflow whatever T is.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::attainability::{
    avoided_sets, scalarize, separating_subset, simplex_grid, AttainConfig, GuaranteeVector, MultiCost,
};
use crate::error::{Error, Result};
use crate::games::{game_value, threshold_ladder, CostMatrix, LabelSet, SimplexDist, ThresholdLadder};
use crate::learners::{Behavior, Example, Guarantee, Hypothesis, Query, Sample, SampleComplexity, WeakLearnerSpec};

/// Slack allowed on every bound checked against floating-point sums.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub seed: u64,
    /// Overrides for the default schedule.
    pub rounds: Option<usize>,
    pub eta: Option<f64>,
    pub m_hat: Option<usize>,
    pub sigma: Option<f64>,
    pub delta: f64,
    /// Keep every round's hypothesis in the ensemble (memory grows with T).
    pub keep_hypotheses: bool,
    /// Record the learner's loss for every round in the report.
    pub record_rounds: bool,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            seed: 0,
            rounds: None,
            eta: None,
            m_hat: None,
            sigma: None,
            delta: 0.05,
            keep_hypotheses: false,
            record_rounds: true,
        }
    }
}

impl BoostConfig {
    pub fn seeded(seed: u64) -> Self {
        BoostConfig { seed, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.rounds == Some(0) {
            return Err(Error::input("the number of rounds must be at least 1"));
        }
        if let Some(eta) = self.eta {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::input(format!("learning rate {eta} must be positive")));
            }
        }
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::input(format!("slack sigma = {s} must be non-negative")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input(format!("confidence delta = {} must lie in (0, 1)", self.delta)));
        }
        if self.m_hat == Some(0) {
            return Err(Error::input("the per-round sample size must be at least 1"));
        }
        Ok(())
    }
}

/// Schedule actually used by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub rounds: usize,
    pub eta: f64,
    pub m_hat: usize,
    /// Learner accuracy the per-round sample size was sized for.
    pub epsilon: f64,
    pub gamma: f64,
    pub sigma: Option<f64>,
    /// ln m / (η T) + η / 2
    pub regret_bound: f64,
}

fn log_m(m: usize) -> f64 {
    // A one-point sample would make the default learning rate zero.
    (m.max(2) as f64).ln()
}

fn resolve(
    cfg: &BoostConfig,
    m: usize,
    default_rounds: f64,
    epsilon: f64,
    gamma: f64,
    sigma: Option<f64>,
    sc: &SampleComplexity,
) -> ResolvedParams {
    let rounds = cfg.rounds.unwrap_or_else(|| (default_rounds.ceil() as usize).max(1));
    let eta = cfg.eta.unwrap_or_else(|| (2.0 * log_m(m) / rounds as f64).sqrt());
    let m_hat = cfg.m_hat.unwrap_or_else(|| sc.m0(epsilon, cfg.delta / rounds as f64));
    let regret_bound = log_m(m) / (eta * rounds as f64) + eta / 2.0;
    ResolvedParams { rounds, eta, m_hat, epsilon, gamma, sigma, regret_bound }
}

/// Averaged vote profile F(x, y) over the whole domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub rounds: usize,
    pub k: usize,
    /// `votes[x][y]` = F(x, y).
    pub votes: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hypotheses: Option<Vec<Hypothesis>>,
}

impl Ensemble {
    #[inline]
    pub fn f(&self, x: usize, y: usize) -> f64 {
        self.votes[x][y]
    }

    /// The randomised predictor that plays a uniformly chosen round.
    pub fn mixture(&self) -> Result<Hypothesis> {
        let rows = self.votes.iter().map(|r| SimplexDist::from_weights(r)).collect::<Result<_>>()?;
        Ok(Hypothesis::Stochastic(rows))
    }
}

/// Per-index Hedge regret against the weighted average cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    pub bound: f64,
    pub max_regret: f64,
    /// Sample index attaining `max_regret`.
    pub worst_index: usize,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub seed: u64,
    pub sample_size: usize,
    pub params: ResolvedParams,
    /// Declared guarantee of the weak learner.
    pub z: f64,
    /// Learner cost under D_t, one entry per round (empty unless recorded).
    pub round_losses: Vec<f64>,
    pub max_round_loss: f64,
    /// Rounds whose learner cost under D_t exceeded z + ε.
    pub guarantee_violations: usize,
    pub regret: RegretLedger,
    /// Every training example is predicted correctly (binary) or covered by its list.
    pub consistent: bool,
    pub training_error: f64,
    /// Binary runs: exactly one side of the final rule is below V(w) at every sample point.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mutual_exclusion: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub holdout_losses: Option<Vec<f64>>,
}

/// Multinomial counts for `draws` i.i.d. picks from `probs`, by sequential binomials.
fn multinomial<R: Rng + ?Sized>(probs: &[f64], draws: usize, rng: &mut R) -> Result<Vec<u32>> {
    let mut counts = vec![0u32; probs.len()];
    let mut left = draws as u64;
    let mut mass_left = 1.0_f64;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass_left <= 0.0 {
            counts[i] = left as u32;
            break;
        }
        let share = (p / mass_left).clamp(0.0, 1.0);
        let c = if share >= 1.0 {
            left
        } else if share <= 0.0 {
            0
        } else {
            Binomial::new(left, share).map_err(|e| Error::Numeric(format!("binomial draw: {e}")))?.sample(rng)
        };
        counts[i] = c as u32;
        left -= c;
        mass_left -= p;
    }
    Ok(counts)
}

fn normalise_log(logw: &[f64], out: &mut [f64]) {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logw) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

struct QueryBuffers {
    examples: Vec<Example>,
    point_mass: Vec<f64>,
}

fn build_query<R: Rng + ?Sized>(
    sample: &Sample,
    probs: &[f64],
    m_hat: usize,
    domain_size: usize,
    rng: &mut R,
    buf: &mut QueryBuffers,
) -> Result<()> {
    let counts = multinomial(probs, m_hat, rng)?;
    buf.examples.clear();
    buf.point_mass.clear();
    buf.point_mass.resize(domain_size, 0.0);
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 {
            buf.examples.push(Example { point: sample.points[i], label: sample.labels[i], count: c });
        }
        buf.point_mass[sample.points[i]] += probs[i];
    }
    Ok(())
}

fn check_sample(sample: &Sample, domain_size: usize, k: usize) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::input("boosting needs a nonempty sample"));
    }
    if sample.points.len() != sample.labels.len() {
        return Err(Error::input("sample points and labels differ in length"));
    }
    if let Some(&x) = sample.points.iter().find(|&&x| x >= domain_size) {
        return Err(Error::input(format!("sample point {x} is outside the domain of size {domain_size}")));
    }
    if let Some(&y) = sample.labels.iter().find(|&&y| y >= k) {
        return Err(Error::input(format!("sample label {} is outside 1..={k}", y + 1)));
    }
    Ok(())
}

struct HedgeOutcome {
    ensemble: Ensemble,
    round_losses: Vec<f64>,
    max_round_loss: f64,
    violations: usize,
    regret: RegretLedger,
}

/// The shared reweighting loop of the binary and list boosters.
fn hedge(
    w: &CostMatrix,
    z: f64,
    learner: &WeakLearnerSpec,
    sample: &Sample,
    domain_size: usize,
    params: &ResolvedParams,
    cfg: &BoostConfig,
) -> Result<HedgeOutcome> {
    let m = sample.len();
    let k = w.k();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cumulative = vec![0.0; m];
    let mut logw = vec![0.0; m];
    let mut probs = vec![1.0 / m as f64; m];
    let mut learner_total = 0.0;
    let mut votes = vec![vec![0.0; k]; domain_size];
    let mut hypotheses = cfg.keep_hypotheses.then(Vec::new);
    let mut round_losses = Vec::with_capacity(if cfg.record_rounds { params.rounds } else { 0 });
    let mut max_round_loss = 0.0_f64;
    let mut violations = 0;
    let mut gains = vec![0.0; m];
    let mut buf = QueryBuffers { examples: Vec::new(), point_mass: Vec::new() };

    for _ in 0..params.rounds {
        normalise_log(&logw, &mut probs);
        build_query(sample, &probs, params.m_hat, domain_size, &mut rng, &mut buf)?;
        let query = Query { examples: &buf.examples, distribution: Some(&buf.point_mass) };
        let h = learner.learn(&query, domain_size)?;

        let mut round_loss = 0.0;
        for i in 0..m {
            gains[i] = h.cost_at(w, sample.points[i], sample.labels[i]);
            round_loss += probs[i] * gains[i];
        }
        learner_total += round_loss;
        max_round_loss = max_round_loss.max(round_loss);
        if round_loss > z + params.epsilon + CHECK_TOL {
            violations += 1;
        }
        if cfg.record_rounds {
            round_losses.push(round_loss);
        }
        for i in 0..m {
            cumulative[i] += gains[i];
            logw[i] = params.eta * cumulative[i];
        }
        match &h {
            Hypothesis::Deterministic(labels) => {
                for (x, &l) in labels.iter().enumerate().take(domain_size) {
                    votes[x][l] += 1.0;
                }
            }
            _ => {
                for (x, row) in votes.iter_mut().enumerate() {
                    for (y, v) in row.iter_mut().enumerate() {
                        *v += h.prob(x, y);
                    }
                }
            }
        }
        if let Some(hs) = hypotheses.as_mut() {
            hs.push(h);
        }
    }

    let t = params.rounds as f64;
    for row in votes.iter_mut() {
        for v in row.iter_mut() {
            *v /= t;
        }
    }
    let (worst_index, best_total) = cumulative
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
    let max_regret = (best_total - learner_total) / t;
    let regret = RegretLedger {
        bound: params.regret_bound,
        max_regret,
        worst_index,
        within_bound: max_regret <= params.regret_bound + CHECK_TOL,
    };
    Ok(HedgeOutcome {
        ensemble: Ensemble { rounds: params.rounds, k, votes, hypotheses },
        round_losses,
        max_round_loss,
        violations,
        regret,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryOutcome {
    pub hypothesis: Hypothesis,
    pub ensemble: Ensemble,
    pub report: RunReport,
}

fn not_boostable(z: f64, value: f64) -> Error {
    Error::NotBoostable { z, value, margin: (value - z).max(0.0) }
}

/// Boosts a binary (w, z)-learner with z < V(w) into a sample-consistent predictor.
pub fn boost_binary(
    learner: &WeakLearnerSpec,
    sample: &Sample,
    domain_size: usize,
    cfg: &BoostConfig,
) -> Result<BinaryOutcome> {
    cfg.validate()?;
    let (w, z) = learner.guarantee.scalar()?;
    if w.k() != 2 {
        return Err(Error::input(format!("binary boosting needs k = 2, got k = {}", w.k())));
    }
    check_sample(sample, domain_size, 2)?;
    let value = game_value(w, LabelSet::full(2))?.value;
    let gamma = value - z;
    if gamma <= 0.0 {
        return Err(not_boostable(z, value));
    }
    let m = sample.len();
    let params = resolve(
        cfg,
        m,
        18.0 * log_m(m) / (gamma * gamma),
        gamma / 3.0,
        gamma,
        None,
        &learner.sample_complexity,
    );
    let run = hedge(w, z, learner, sample, domain_size, &params, cfg)?;

    let (w_minus, w_plus) = (w.w_minus(), w.w_plus());
    let labels: Vec<usize> = (0..domain_size)
        .map(|x| usize::from(w_minus * run.ensemble.f(x, 0) < w_plus * run.ensemble.f(x, 1)))
        .collect();
    let mistakes = sample.points.iter().zip(&sample.labels).filter(|(&x, &y)| labels[x] != y).count();
    let exclusive = sample.points.iter().all(|&x| {
        let a = w_minus * run.ensemble.f(x, 0) < value;
        let b = w_plus * run.ensemble.f(x, 1) < value;
        a != b
    });
    let report = RunReport {
        algorithm: "boost-binary".into(),
        seed: cfg.seed,
        sample_size: m,
        params,
        z,
        round_losses: run.round_losses,
        max_round_loss: run.max_round_loss,
        guarantee_violations: run.violations,
        regret: run.regret,
        consistent: mistakes == 0,
        training_error: mistakes as f64 / m as f64,
        mutual_exclusion: Some(exclusive),
        holdout_losses: None,
    };
    Ok(BinaryOutcome { hypothesis: Hypothesis::Deterministic(labels), ensemble: run.ensemble, report })
}

/// Retries [`boost_binary`] with a halved margin estimate until the result is consistent.
pub fn boost_binary_adaptive(
    learner: &WeakLearnerSpec,
    sample: &Sample,
    domain_size: usize,
    initial_gamma: f64,
    max_halvings: usize,
    cfg: &BoostConfig,
) -> Result<(BinaryOutcome, usize)> {
    if initial_gamma.is_nan() || initial_gamma <= 0.0 {
        return Err(Error::input("the initial margin estimate must be positive"));
    }
    let max_halvings = max_halvings.min(20);
    let m = sample.len();
    let mut gamma = initial_gamma;
    let mut last = None;
    for attempt in 0..=max_halvings {
        let rounds = (18.0 * log_m(m) / (gamma * gamma)).ceil() as usize;
        let try_cfg = BoostConfig { rounds: Some(rounds.max(1)), ..cfg.clone() };
        let out = boost_binary(learner, sample, domain_size, &try_cfg)?;
        if out.report.consistent {
            return Ok((out, attempt));
        }
        last = Some((out, attempt));
        gamma /= 2.0;
    }
    Ok(last.expect("at least one attempt"))
}

/// μ(x) = {y : Σ_ℓ F(x, ℓ) w(ℓ, y) ≤ threshold} over the whole domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListFunction {
    pub w: CostMatrix,
    pub threshold: f64,
    pub ensemble: Option<Ensemble>,
    pub lists: Vec<LabelSet>,
}

impl ListFunction {
    pub fn from_ensemble(w: &CostMatrix, ensemble: Ensemble, threshold: f64) -> Self {
        let k = w.k();
        let lists = ensemble
            .votes
            .iter()
            .map(|row| {
                let mut set = LabelSet::EMPTY;
                for y in 0..k {
                    if w.cost_against(row, y) <= threshold {
                        set.insert(y);
                    }
                }
                set
            })
            .collect();
        ListFunction { w: w.clone(), threshold, ensemble: Some(ensemble), lists }
    }

    /// μ ≡ Y.
    pub fn full(w: &CostMatrix, domain_size: usize, threshold: f64) -> Self {
        ListFunction { w: w.clone(), threshold, ensemble: None, lists: vec![LabelSet::full(w.k()); domain_size] }
    }

    #[inline]
    pub fn list(&self, x: usize) -> LabelSet {
        self.lists[x]
    }

    pub fn max_list_size(&self) -> usize {
        self.lists.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn covers(&self, sample: &Sample) -> bool {
        sample.points.iter().zip(&sample.labels).all(|(&x, &y)| self.lists[x].contains(y))
    }

    /// Fraction of sample draws whose label is missing from the list.
    pub fn miss_rate(&self, sample: &Sample) -> f64 {
        if sample.is_empty() {
            return 0.0;
        }
        let misses = sample.points.iter().zip(&sample.labels).filter(|(&x, &y)| !self.lists[x].contains(y)).count();
        misses as f64 / sample.len() as f64
    }

    /// V_{μ(x)}(w) for every distinct list (V_∅ = 0), keyed by mask.
    pub fn list_values(&self) -> Result<BTreeMap<u16, f64>> {
        let mut out = BTreeMap::new();
        for &s in &self.lists {
            if let std::collections::btree_map::Entry::Vacant(e) = out.entry(s.mask()) {
                e.insert(if s.is_empty() { 0.0 } else { game_value(&self.w, s)?.value });
            }
        }
        Ok(out)
    }

    /// max over x of V_{μ(x)}(w).
    pub fn max_list_value(&self) -> Result<f64> {
        Ok(self.list_values()?.values().copied().fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListOutcome {
    pub list: ListFunction,
    pub report: RunReport,
}

#[allow(clippy::too_many_arguments)]
fn list_run(
    w: &CostMatrix,
    z: f64,
    sigma: f64,
    gamma: f64,
    learner: &WeakLearnerSpec,
    sample: &Sample,
    domain_size: usize,
    cfg: &BoostConfig,
    algorithm: &str,
) -> Result<ListOutcome> {
    let m = sample.len();
    let params = resolve(
        cfg,
        m,
        8.0 * log_m(m) / (sigma * sigma),
        sigma / 2.0,
        gamma,
        Some(sigma),
        &learner.sample_complexity,
    );
    let run = hedge(w, z, learner, sample, domain_size, &params, cfg)?;
    let list = ListFunction::from_ensemble(w, run.ensemble, z + sigma);
    let miss = list.miss_rate(sample);
    let report = RunReport {
        algorithm: algorithm.into(),
        seed: cfg.seed,
        sample_size: m,
        params,
        z,
        round_losses: run.round_losses,
        max_round_loss: run.max_round_loss,
        guarantee_violations: run.violations,
        regret: run.regret,
        consistent: miss == 0.0,
        training_error: miss,
        mutual_exclusion: None,
        holdout_losses: None,
    };
    Ok(ListOutcome { list, report })
}

/// Boosts a (w, z)-learner into a (w, z + σ)-bounded list function.
pub fn boost_to_list(
    learner: &WeakLearnerSpec,
    sample: &Sample,
    domain_size: usize,
    cfg: &BoostConfig,
) -> Result<ListOutcome> {
    cfg.validate()?;
    let (w, z) = learner.guarantee.scalar()?;
    check_sample(sample, domain_size, w.k())?;
    let ladder = threshold_ladder(w)?;
    let gamma = ladder.margin(z);
    let sigma = match cfg.sigma {
        Some(s) if s <= 0.0 => return Err(Error::input("slack sigma must be positive")),
        Some(s) => s,
        None if gamma > 0.0 => 2.0 * gamma / 3.0,
        None => return Err(not_boostable(z, ladder.levels.last().copied().unwrap_or(0.0))),
    };
    list_run(w, z, sigma, gamma, learner, sample, domain_size, cfg, "boost-to-list")
}

/// Boosts to lists of at most s labels, where s is the smallest size with z below v_lower(s + 1).
pub fn boost_to_s_list(
    learner: &WeakLearnerSpec,
    sample: &Sample,
    domain_size: usize,
    cfg: &BoostConfig,
) -> Result<(ListOutcome, usize)> {
    cfg.validate()?;
    let (w, z) = learner.guarantee.scalar()?;
    check_sample(sample, domain_size, w.k())?;
    let ladder = threshold_ladder(w)?;
    let s = ladder.list_size_for(z);
    let k = w.k();
    if s >= k {
        let list = ListFunction::full(w, domain_size, z);
        let params = ResolvedParams {
            rounds: 0,
            eta: 0.0,
            m_hat: 0,
            epsilon: 0.0,
            gamma: 0.0,
            sigma: None,
            regret_bound: 0.0,
        };
        let report = RunReport {
            algorithm: "boost-to-s-list".into(),
            seed: cfg.seed,
            sample_size: sample.len(),
            params,
            z,
            round_losses: Vec::new(),
            max_round_loss: 0.0,
            guarantee_violations: 0,
            regret: RegretLedger { bound: 0.0, max_regret: 0.0, worst_index: 0, within_bound: true },
            consistent: true,
            training_error: 0.0,
            mutual_exclusion: None,
            holdout_losses: None,
        };
        return Ok((ListOutcome { list, report }, k));
    }
    let gamma = ladder.v_lower(s + 1) - z;
    let sigma = cfg.sigma.unwrap_or(2.0 * gamma / 3.0);
    let out = list_run(w, z, sigma, gamma, learner, sample, domain_size, cfg, "boost-to-s-list")?;
    Ok((out, s))
}

/// Plays the minimax coin of μ(x) at every point; `bound` is the boundedness level z.
pub fn list_to_weak(w: &CostMatrix, lists: &[LabelSet], bound: f64, tol: f64) -> Result<Hypothesis> {
    let k = w.k();
    let mut cache: BTreeMap<u16, (f64, SimplexDist)> = BTreeMap::new();
    let mut rows = Vec::with_capacity(lists.len());
    for (x, &set) in lists.iter().enumerate() {
        if !set.fits(k) {
            return Err(Error::input(format!("list {set} at point {x} has labels outside 1..={k}")));
        }
        let (value, p) = match cache.get(&set.mask()) {
            Some(hit) => hit.clone(),
            None => {
                let entry = if set.is_empty() {
                    (0.0, game_value(w, LabelSet::full(k))?.minimax_strategy)
                } else {
                    let g = game_value(w, set)?;
                    (g.value, g.minimax_strategy)
                };
                cache.insert(set.mask(), entry.clone());
                entry
            }
        };
        if value > bound + tol {
            return Err(Error::contract(format!(
                "list {set} at point {x} has value {value:.9} above the bound {bound:.9}"
            )));
        }
        rows.push(p);
    }
    Ok(Hypothesis::Stochastic(rows))
}

/// Converts lists of at most `s` labels into a weak learner with guarantee v_upper(s).
pub fn s_list_to_weak(w: &CostMatrix, lists: &[LabelSet], s: usize, ladder: &ThresholdLadder) -> Result<(Hypothesis, f64)> {
    if let Some((x, set)) = lists.iter().enumerate().find(|(_, l)| l.len() > s) {
        return Err(Error::contract(format!("list {set} at point {x} has more than {s} labels")));
    }
    let bound = ladder.v_upper(s.min(w.k()));
    Ok((list_to_weak(w, lists, bound, CHECK_TOL)?, bound))
}

/// Scalar learner factory for the multi-objective booster.
pub trait LearnerFactory: Sync {
    fn learner_for(&self, alpha: &SimplexDist) -> Result<WeakLearnerSpec>;
}

impl<F> LearnerFactory for F
where
    F: Fn(&SimplexDist) -> Result<WeakLearnerSpec> + Sync,
{
    fn learner_for(&self, alpha: &SimplexDist) -> Result<WeakLearnerSpec> {
        self(alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoReport {
    pub seed: u64,
    pub sample_size: usize,
    pub r: usize,
    pub rounds: usize,
    pub eta: f64,
    pub m_hat: usize,
    pub z: Vec<f64>,
    /// Fraction of rounds with M(h_t, i) = 1, per objective.
    pub violation_fraction: Vec<f64>,
    /// 1 / (5r)
    pub violation_bound: f64,
    /// Sample loss of the mixture predictor, per objective.
    pub sample_losses: Vec<f64>,
    /// Final normalised objective weights.
    pub final_alpha: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub holdout_losses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoOutcome {
    /// Plays h_t for a uniformly random round t.
    pub hypothesis: Hypothesis,
    pub hypotheses: Vec<Hypothesis>,
    pub report: MoReport,
}

fn sample_losses(w: &MultiCost, h: &Hypothesis, sample: &Sample) -> Vec<f64> {
    w.costs().iter().map(|c| h.sample_loss(c, sample)).collect()
}

/// Boosts (w_α, z_α)-learners into a (w, z)-learner by Hedge over objectives.
pub fn boost_mo(
    w: &MultiCost,
    z: &GuaranteeVector,
    factory: &dyn LearnerFactory,
    sample: &Sample,
    domain_size: usize,
    cfg: &BoostConfig,
) -> Result<MoOutcome> {
    cfg.validate()?;
    if w.r() != z.r() {
        return Err(Error::input(format!("{} objectives but {} guarantees", w.r(), z.r())));
    }
    check_sample(sample, domain_size, w.k())?;
    let r = w.r();
    let m = sample.len();
    let uniform = vec![1.0 / m as f64; m];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut buf = QueryBuffers { examples: Vec::new(), point_mass: Vec::new() };

    if r == 1 {
        let alpha = SimplexDist::point(1, 0);
        let learner = factory.learner_for(&alpha)?;
        build_query(sample, &uniform, m, domain_size, &mut rng, &mut buf)?;
        let h = learner.learn(&Query { examples: &buf.examples, distribution: Some(&buf.point_mass) }, domain_size)?;
        let losses = sample_losses(w, &h, sample);
        let violated = f64::from(u8::from(losses[0] > z.values()[0]));
        let report = MoReport {
            seed: cfg.seed,
            sample_size: m,
            r,
            rounds: 1,
            eta: 0.0,
            m_hat: m,
            z: z.values().to_vec(),
            violation_fraction: vec![violated],
            violation_bound: 0.2,
            sample_losses: losses,
            final_alpha: vec![1.0],
            holdout_losses: None,
        };
        return Ok(MoOutcome { hypothesis: h.clone(), hypotheses: vec![h], report });
    }

    let rf = r as f64;
    let rounds = cfg.rounds.unwrap_or_else(|| (100.0 * rf * rf * rf.ln()).ceil() as usize).max(1);
    let eta = cfg.eta.unwrap_or_else(|| (2.0 * rf.ln() / rounds as f64).sqrt());
    let m_hat = cfg.m_hat.unwrap_or_else(|| {
        SampleComplexity::default().m0(1.0 / (10.0 * rf), 1.0 / (20.0 * rf * rounds as f64))
    });

    let mut log_a = vec![0.0; r];
    let mut violations = vec![0usize; r];
    let mut hypotheses = Vec::with_capacity(rounds);
    let mut alpha_probs = vec![0.0; r];
    for _ in 0..rounds {
        normalise_log(&log_a, &mut alpha_probs);
        let alpha = SimplexDist::from_weights(&alpha_probs)?;
        let learner = factory.learner_for(&alpha)?;
        build_query(sample, &uniform, m_hat, domain_size, &mut rng, &mut buf)?;
        let h = learner.learn(&Query { examples: &buf.examples, distribution: Some(&buf.point_mass) }, domain_size)?;
        for (i, (c, zi)) in w.costs().iter().zip(z.values()).enumerate() {
            if h.sample_loss(c, sample) > *zi {
                violations[i] += 1;
                log_a[i] += eta;
            }
        }
        hypotheses.push(h);
    }
    normalise_log(&log_a, &mut alpha_probs);
    let mixture = mixture_of(&hypotheses, domain_size, w.k())?;
    let report = MoReport {
        seed: cfg.seed,
        sample_size: m,
        r,
        rounds,
        eta,
        m_hat,
        z: z.values().to_vec(),
        violation_fraction: violations.iter().map(|&v| v as f64 / rounds as f64).collect(),
        violation_bound: 1.0 / (5.0 * rf),
        sample_losses: sample_losses(w, &mixture, sample),
        final_alpha: alpha_probs,
        holdout_losses: None,
    };
    Ok(MoOutcome { hypothesis: mixture, hypotheses, report })
}

/// Uniform mixture of hypotheses, expressed pointwise.
pub fn mixture_of(hypotheses: &[Hypothesis], domain_size: usize, k: usize) -> Result<Hypothesis> {
    if hypotheses.is_empty() {
        return Err(Error::input("cannot mix an empty set of hypotheses"));
    }
    let t = hypotheses.len() as f64;
    let rows = (0..domain_size)
        .map(|x| {
            let row: Vec<f64> = (0..k).map(|y| hypotheses.iter().map(|h| h.prob(x, y)).sum::<f64>() / t).collect();
            SimplexDist::from_weights(&row)
        })
        .collect::<Result<_>>()?;
    Ok(Hypothesis::Stochastic(rows))
}

/// ⌈log₂(2r/δ)⌉ independent runs for best-on-holdout selection.
pub fn confidence_runs(r: usize, delta: f64) -> usize {
    ((2.0 * r.max(1) as f64 / delta).log2().ceil() as usize).max(1)
}

/// Witness weights for one avoided subset in the multi-objective pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetWitness {
    pub subset: LabelSet,
    pub alpha: Vec<f64>,
    pub z_alpha: f64,
    pub value: f64,
    /// Multiclass margin of (w_α, z_α).
    pub gamma: f64,
    /// Perturbation weight mixed towards uniform.
    pub epsilon: f64,
}

/// Grid-searches α maximising V_J(w_α) − ⟨α, z⟩, then mixes it towards uniform.
pub fn find_subset_witness(
    w: &MultiCost,
    z: &GuaranteeVector,
    set: LabelSet,
    divisions: usize,
) -> Result<Option<SubsetWitness>> {
    let r = w.r();
    let value_at = |alpha: &[f64]| -> Result<f64> {
        Ok(game_value(&scalarize(w, &SimplexDist::from_weights(alpha)?)?, set)?.value)
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for alpha in simplex_grid(r, divisions.max(1)) {
        let gap = value_at(&alpha)? - z.scalarize(&alpha);
        if best.as_ref().is_none_or(|(g, _)| gap > *g) {
            best = Some((gap, alpha));
        }
    }
    let Some((gap, alpha)) = best else { return Ok(None) };
    if gap <= 0.0 {
        return Ok(None);
    }
    let mut eps = 0.1;
    for _ in 0..60 {
        let mixed: Vec<f64> = alpha.iter().map(|a| (1.0 - eps) * a + eps / r as f64).collect();
        let value = value_at(&mixed)?;
        let z_alpha = z.scalarize(&mixed);
        if value > z_alpha {
            let wa = scalarize(w, &SimplexDist::from_weights(&mixed)?)?;
            let gamma = threshold_ladder(&wa)?.margin(z_alpha);
            return Ok(Some(SubsetWitness { subset: set, alpha: mixed, z_alpha, value, gamma, epsilon: eps }));
        }
        eps /= 2.0;
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoToMoReport {
    pub avoided_minimal: Vec<LabelSet>,
    pub witnesses: Vec<SubsetWitness>,
    pub list_reports: Vec<RunReport>,
    pub max_list_size: usize,
    /// No avoided subset is contained in any intersected list at a sample point.
    pub lists_avoid: bool,
    pub lists_cover_sample: bool,
    pub mo: Option<MoReport>,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoToMoOutcome {
    pub hypothesis: Hypothesis,
    pub lists: Vec<LabelSet>,
    pub report: MoToMoReport,
}

/// Boosts a (w, z)-learner into a (w, z′)-learner when z ⪯ z′.
#[allow(clippy::too_many_arguments)]
pub fn boost_mo_to_mo(
    w: &MultiCost,
    learner: &WeakLearnerSpec,
    z: &GuaranteeVector,
    z_prime: &GuaranteeVector,
    sample: &Sample,
    domain_size: usize,
    attain: &AttainConfig,
    cfg: &BoostConfig,
) -> Result<MoToMoOutcome> {
    cfg.validate()?;
    check_sample(sample, domain_size, w.k())?;
    if let Some(sep) = separating_subset(w, z, z_prime, attain)? {
        return Err(Error::contract(format!(
            "{:?} does not precede {:?}: J = {sep} is avoided under the target but not under the learner's guarantee",
            z.values(),
            z_prime.values()
        )));
    }
    let k = w.k();
    let av = avoided_sets(w, z_prime, attain)?;

    if av.avoided.is_empty() {
        let coin = crate::learners::coin_trivial_learner(w, z_prime, attain)?;
        let examples: Vec<Example> =
            sample.points.iter().zip(&sample.labels).map(|(&point, &label)| Example { point, label, count: 1 }).collect();
        let h = coin.learn(&Query { examples: &examples, distribution: None }, domain_size)?;
        let report = MoToMoReport {
            avoided_minimal: Vec::new(),
            witnesses: Vec::new(),
            list_reports: Vec::new(),
            max_list_size: k,
            lists_avoid: true,
            lists_cover_sample: true,
            mo: None,
            trivial: true,
        };
        return Ok(MoToMoOutcome { hypothesis: h, lists: vec![LabelSet::full(k); domain_size], report });
    }

    let divisions = if w.r() <= 3 { 100 } else { 20 };
    let mut lists = vec![LabelSet::full(k); domain_size];
    let mut witnesses = Vec::new();
    let mut list_reports = Vec::new();
    for (n, &set) in av.minimal.iter().enumerate() {
        let wit = find_subset_witness(w, z, set, divisions)?.ok_or_else(|| {
            Error::contract(format!("no objective weights separate {:?} from the dice region of {set}", z.values()))
        })?;
        let alpha = SimplexDist::from_weights(&wit.alpha)?;
        let wa = scalarize(w, &alpha)?;
        // The (w, z)-learner is a (w_α, z_α)-learner; only its declared contract changes.
        let scalar = WeakLearnerSpec {
            guarantee: Guarantee::Scalar { w: wa.clone(), z: wit.z_alpha },
            sample_complexity: learner.sample_complexity,
            behavior: learner.behavior.clone(),
        };
        let sub_cfg = BoostConfig {
            seed: cfg.seed.wrapping_add(n as u64 + 1),
            sigma: Some(2.0 * wit.gamma / 3.0),
            ..cfg.clone()
        };
        let out = boost_to_list(&scalar, sample, domain_size, &sub_cfg)?;
        for (acc, l) in lists.iter_mut().zip(&out.list.lists) {
            *acc = acc.intersect(*l);
        }
        witnesses.push(wit);
        list_reports.push(out.report);
    }

    let covers = sample.points.iter().zip(&sample.labels).all(|(&x, &y)| lists[x].contains(y));
    let avoid = sample.points.iter().all(|&x| !av.avoided.iter().any(|j| j.is_subset_of(lists[x])));
    let max_list_size = lists.iter().map(|l| l.len()).max().unwrap_or(0);

    let lists_for_factory = lists.clone();
    let factory = move |alpha: &SimplexDist| -> Result<WeakLearnerSpec> {
        let wa = scalarize(w, alpha)?;
        let h = list_to_weak(&wa, &lists_for_factory, 1.0, 1e-4)?;
        Ok(WeakLearnerSpec {
            guarantee: Guarantee::Scalar { w: wa, z: z_prime.scalarize(alpha.probs()) },
            sample_complexity: SampleComplexity::default(),
            behavior: Behavior::PoolErm { pool: vec![h] },
        })
    };
    let mo = boost_mo(w, z_prime, &factory, sample, domain_size, cfg)?;
    let report = MoToMoReport {
        avoided_minimal: av.minimal,
        witnesses,
        list_reports,
        max_list_size,
        lists_avoid: avoid,
        lists_cover_sample: covers,
        mo: Some(mo.report),
        trivial: false,
    };
    Ok(MoToMoOutcome { hypothesis: mo.hypothesis, lists, report })
}
