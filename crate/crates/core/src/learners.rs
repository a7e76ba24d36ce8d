//! Finite learning problems, hypotheses and simulated weak learners.

use std::path::Path;

use rand::distr::{weighted::WeightedIndex, Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attainability::{self, AttainConfig, GuaranteeVector, MultiCost};
use crate::error::{Error, Result};
use crate::games::{game_value, CostMatrix, LabelSet, SimplexDist};

const BUDGET_TOL: f64 = 1e-12;

#[derive(Serialize, Deserialize)]
struct RawInstance {
    domain_size: usize,
    k: usize,
    target: Vec<usize>,
}

/// A finite domain `0..domain_size` labelled by a target function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    k: usize,
    target: Vec<usize>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;
    fn try_from(raw: RawInstance) -> Result<Self> {
        if raw.target.len() != raw.domain_size {
            return Err(Error::input(format!(
                "instance declares {} points but lists {} target labels",
                raw.domain_size,
                raw.target.len()
            )));
        }
        if let Some(&l) = raw.target.iter().find(|&&l| l == 0 || l > raw.k) {
            return Err(Error::input(format!("target label {l} is outside 1..={}", raw.k)));
        }
        Instance::new(raw.k, raw.target.into_iter().map(|l| l - 1).collect())
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance { domain_size: inst.target.len(), k: inst.k, target: inst.target.iter().map(|l| l + 1).collect() }
    }
}

impl Instance {
    /// `target` holds 0-based labels.
    pub fn new(k: usize, target: Vec<usize>) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::input("instance has an empty domain"));
        }
        if !(2..=crate::games::MAX_LABELS).contains(&k) {
            return Err(Error::input(format!("instance label count k = {k} is out of range")));
        }
        if let Some(&l) = target.iter().find(|&&l| l >= k) {
            return Err(Error::input(format!("target label {} is outside 1..={k}", l + 1)));
        }
        Ok(Instance { k, target })
    }

    /// Labels drawn i.i.d. from `q`.
    pub fn random_with<R: Rng + ?Sized>(domain_size: usize, q: &SimplexDist, rng: &mut R) -> Result<Self> {
        let dist = WeightedIndex::new(q.probs()).map_err(|e| Error::input(format!("bad label distribution: {e}")))?;
        Instance::new(q.len(), (0..domain_size).map(|_| dist.sample(rng)).collect())
    }

    /// Labels drawn uniformly from `set`.
    pub fn on_labels<R: Rng + ?Sized>(domain_size: usize, k: usize, set: LabelSet, rng: &mut R) -> Result<Self> {
        Instance::random_with(domain_size, &SimplexDist::uniform_on(k, set), rng)
    }

    pub fn domain_size(&self) -> usize {
        self.target.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn label(&self, x: usize) -> usize {
        self.target[x]
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn labels_used(&self) -> LabelSet {
        let mut s = LabelSet::EMPTY;
        for &l in &self.target {
            s.insert(l);
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::input(format!("cannot read {}: {e}", path.as_ref().display())))?;
        serde_json::from_str(&text).map_err(|e| Error::input(format!("bad instance JSON: {e}")))
    }
}

/// Labelled sample points (with repetition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub points: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Sample {
    /// `m` points drawn uniformly from the domain and labelled by the target.
    pub fn draw<R: Rng + ?Sized>(inst: &Instance, m: usize, rng: &mut R) -> Self {
        let uni = Uniform::new(0, inst.domain_size()).expect("nonempty domain");
        let points: Vec<usize> = (0..m).map(|_| uni.sample(rng)).collect();
        let labels = points.iter().map(|&x| inst.label(x)).collect();
        Sample { points, labels }
    }

    /// `m` points drawn from `dist` over the domain.
    pub fn draw_from<R: Rng + ?Sized>(inst: &Instance, dist: &SimplexDist, m: usize, rng: &mut R) -> Result<Self> {
        let idx = WeightedIndex::new(dist.probs()).map_err(|e| Error::input(format!("bad point distribution: {e}")))?;
        let points: Vec<usize> = (0..m).map(|_| idx.sample(rng)).collect();
        let labels = points.iter().map(|&x| inst.label(x)).collect();
        Ok(Sample { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// First `train_fraction` of the draws for training, the rest held out.
    pub fn split(&self, train_fraction: f64) -> (Sample, Sample) {
        let cut = ((self.len() as f64) * train_fraction).round() as usize;
        let cut = cut.min(self.len());
        (
            Sample { points: self.points[..cut].to_vec(), labels: self.labels[..cut].to_vec() },
            Sample { points: self.points[cut..].to_vec(), labels: self.labels[cut..].to_vec() },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum HypothesisRepr {
    Deterministic { labels: Vec<usize> },
    Stochastic { rows: Vec<SimplexDist> },
    RandomGuess { p: SimplexDist },
}

/// A predictor over the whole domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HypothesisRepr", into = "HypothesisRepr")]
pub enum Hypothesis {
    /// One 0-based label per domain point.
    Deterministic(Vec<usize>),
    /// One label distribution per domain point.
    Stochastic(Vec<SimplexDist>),
    /// The same label distribution everywhere.
    RandomGuess(SimplexDist),
}

impl TryFrom<HypothesisRepr> for Hypothesis {
    type Error = Error;
    fn try_from(r: HypothesisRepr) -> Result<Self> {
        Ok(match r {
            HypothesisRepr::Deterministic { labels } => {
                if labels.contains(&0) {
                    return Err(Error::input("hypothesis labels are 1-based"));
                }
                Hypothesis::Deterministic(labels.into_iter().map(|l| l - 1).collect())
            }
            HypothesisRepr::Stochastic { rows } => Hypothesis::Stochastic(rows),
            HypothesisRepr::RandomGuess { p } => Hypothesis::RandomGuess(p),
        })
    }
}

impl From<Hypothesis> for HypothesisRepr {
    fn from(h: Hypothesis) -> Self {
        match h {
            Hypothesis::Deterministic(labels) => {
                HypothesisRepr::Deterministic { labels: labels.into_iter().map(|l| l + 1).collect() }
            }
            Hypothesis::Stochastic(rows) => HypothesisRepr::Stochastic { rows },
            Hypothesis::RandomGuess(p) => HypothesisRepr::RandomGuess { p },
        }
    }
}

impl Hypothesis {
    /// Pr[h(x) = y].
    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        match self {
            Hypothesis::Deterministic(l) => f64::from(u8::from(l[x] == y)),
            Hypothesis::Stochastic(rows) => rows[x][y],
            Hypothesis::RandomGuess(p) => p[y],
        }
    }

    /// E_{ŷ∼h(x)} w(ŷ, y).
    #[inline]
    pub fn cost_at(&self, w: &CostMatrix, x: usize, y: usize) -> f64 {
        match self {
            Hypothesis::Deterministic(l) => w.get(l[x], y),
            Hypothesis::Stochastic(rows) => w.cost_against(rows[x].probs(), y),
            Hypothesis::RandomGuess(p) => w.cost_against(p.probs(), y),
        }
    }

    pub fn is_point_independent(&self) -> bool {
        matches!(self, Hypothesis::RandomGuess(_))
    }

    /// Mean cost over the sample.
    pub fn sample_loss(&self, w: &CostMatrix, sample: &Sample) -> f64 {
        if sample.is_empty() {
            return 0.0;
        }
        let total: f64 = sample.points.iter().zip(&sample.labels).map(|(&x, &y)| self.cost_at(w, x, y)).sum();
        total / sample.len() as f64
    }
}

/// L_D^w(h) = Σ_x D(x) E_{ŷ∼h(x)} w(ŷ, f(x)), evaluated exactly.
pub fn loss(w: &CostMatrix, h: &Hypothesis, inst: &Instance, d: &SimplexDist) -> Result<f64> {
    if d.len() != inst.domain_size() {
        return Err(Error::input(format!(
            "distribution over {} points for a domain of {}",
            d.len(),
            inst.domain_size()
        )));
    }
    if w.k() != inst.k() {
        return Err(Error::input(format!("cost has k = {} but the instance has k = {}", w.k(), inst.k())));
    }
    Ok(d.probs().iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(x, &p)| p * h.cost_at(w, x, inst.label(x))).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub losses: Vec<f64>,
    pub distribution: String,
}

pub fn loss_report(
    w: &MultiCost,
    h: &Hypothesis,
    inst: &Instance,
    d: &SimplexDist,
    distribution: impl Into<String>,
) -> Result<LossReport> {
    let losses = w.costs().iter().map(|c| loss(c, h, inst, d)).collect::<Result<_>>()?;
    Ok(LossReport { losses, distribution: distribution.into() })
}

/// Declared (w, z) contract of a learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Guarantee {
    Scalar { w: CostMatrix, z: f64 },
    Multi { w: MultiCost, z: GuaranteeVector },
}

impl Guarantee {
    pub fn k(&self) -> usize {
        match self {
            Guarantee::Scalar { w, .. } => w.k(),
            Guarantee::Multi { w, .. } => w.k(),
        }
    }

    pub fn objectives(&self) -> Vec<(&CostMatrix, f64)> {
        match self {
            Guarantee::Scalar { w, z } => vec![(w, *z)],
            Guarantee::Multi { w, z } => w.costs().iter().zip(z.values().iter().copied()).collect(),
        }
    }

    pub fn as_multi(&self) -> Result<(MultiCost, GuaranteeVector)> {
        match self {
            Guarantee::Scalar { w, z } => Ok((MultiCost::single(w.clone()), GuaranteeVector::new(vec![*z])?)),
            Guarantee::Multi { w, z } => Ok((w.clone(), z.clone())),
        }
    }

    pub fn scalar(&self) -> Result<(&CostMatrix, f64)> {
        match self {
            Guarantee::Scalar { w, z } => Ok((w, *z)),
            Guarantee::Multi { w, z } if w.r() == 1 => Ok((w.objective(0), z.values()[0])),
            Guarantee::Multi { .. } => Err(Error::input("expected a single-objective learner")),
        }
    }
}

/// m₀(ε, δ) = ⌈c · ln(1/δ) / ε²⌉.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleComplexity {
    pub c: f64,
}

impl Default for SampleComplexity {
    fn default() -> Self {
        SampleComplexity { c: 8.0 }
    }
}

impl SampleComplexity {
    pub fn m0(&self, epsilon: f64, delta: f64) -> usize {
        let raw = self.c * (1.0 / delta).ln() / (epsilon * epsilon);
        (raw.ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Behavior {
    /// Empirical risk minimisation over a fixed pool.
    PoolErm { pool: Vec<Hypothesis> },
    /// Copies the target except on greedily planted errors that fill the budget.
    PlantedNoise {
        target: Vec<usize>,
        /// Only these points may carry errors (all points when absent).
        pool: Option<Vec<usize>>,
    },
    /// Estimates the label marginal and answers with a coin meeting the guarantee.
    CoinTrivial,
    /// Ignores the sample and plays the minimax coin of a label subset.
    CoinOnJ { subset: LabelSet, strategy: SimplexDist },
}

/// One labelled example of a query multiset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub point: usize,
    pub label: usize,
    pub count: u32,
}

/// What a learner sees: a multiset of examples and, for oracle learners, the
/// distribution over domain points the examples were drawn from.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub examples: &'a [Example],
    pub distribution: Option<&'a [f64]>,
}

impl Query<'_> {
    /// Example weights aggregated per domain point, normalised.
    fn point_masses(&self, domain_size: usize) -> Vec<f64> {
        if let Some(d) = self.distribution {
            return d.to_vec();
        }
        let mut mass = vec![0.0; domain_size];
        let total: f64 = self.examples.iter().map(|e| f64::from(e.count)).sum();
        if total > 0.0 {
            for e in self.examples {
                mass[e.point] += f64::from(e.count) / total;
            }
        }
        mass
    }

    fn label_marginal(&self, k: usize) -> Vec<f64> {
        let mut q = vec![0.0; k];
        let total: f64 = self.examples.iter().map(|e| f64::from(e.count)).sum();
        if total == 0.0 {
            return vec![1.0 / k as f64; k];
        }
        for e in self.examples {
            q[e.label] += f64::from(e.count) / total;
        }
        q
    }

    /// Weighted mean cost of `h` on the examples.
    pub fn loss(&self, w: &CostMatrix, h: &Hypothesis) -> f64 {
        let total: f64 = self.examples.iter().map(|e| f64::from(e.count)).sum();
        if total == 0.0 {
            return 0.0;
        }
        self.examples.iter().map(|e| f64::from(e.count) * h.cost_at(w, e.point, e.label)).sum::<f64>() / total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLearnerSpec {
    pub guarantee: Guarantee,
    pub sample_complexity: SampleComplexity,
    pub behavior: Behavior,
}

impl WeakLearnerSpec {
    pub fn k(&self) -> usize {
        self.guarantee.k()
    }

    /// Answers a query. Learners here are deterministic given the query.
    pub fn learn(&self, query: &Query<'_>, domain_size: usize) -> Result<Hypothesis> {
        match &self.behavior {
            Behavior::PoolErm { pool } => self.pool_erm(pool, query),
            Behavior::PlantedNoise { target, pool } => {
                Ok(self.plant(target, pool.as_deref(), &query.point_masses(target.len().max(domain_size))))
            }
            Behavior::CoinTrivial => self.coin_trivial(query),
            Behavior::CoinOnJ { strategy, .. } => Ok(Hypothesis::RandomGuess(strategy.clone())),
        }
    }

    fn pool_erm(&self, pool: &[Hypothesis], query: &Query<'_>) -> Result<Hypothesis> {
        let objectives = self.guarantee.objectives();
        let score = |h: &Hypothesis| -> f64 {
            objectives.iter().map(|(w, z)| (query.loss(w, h) - z).max(0.0)).sum::<f64>()
                + objectives.iter().map(|(w, _)| query.loss(w, h)).sum::<f64>() * 1e-9
        };
        pool.iter()
            .map(|h| (score(h), h))
            .reduce(|a, b| if b.0 < a.0 { b } else { a })
            .map(|(_, h)| h.clone())
            .ok_or_else(|| Error::input("pool learner has an empty pool"))
    }

    fn plant(&self, target: &[usize], pool: Option<&[usize]>, mass: &[f64]) -> Hypothesis {
        let objectives = self.guarantee.objectives();
        let k = self.k();
        let mut spent = vec![0.0; objectives.len()];
        let mut labels = target.to_vec();
        let mut candidates: Vec<usize> = match pool {
            Some(p) => p.iter().copied().filter(|&x| mass[x] > 0.0).collect(),
            None => (0..target.len()).filter(|&x| mass[x] > 0.0).collect(),
        };
        candidates.sort_by(|&a, &b| mass[a].total_cmp(&mass[b]).then(a.cmp(&b)));
        candidates.dedup();
        for x in candidates {
            let y = target[x];
            let mut best: Option<(f64, usize)> = None;
            for yhat in (0..k).filter(|&l| l != y) {
                let costs: Vec<f64> = objectives.iter().map(|(w, _)| mass[x] * w.get(yhat, y)).collect();
                let total: f64 = costs.iter().sum();
                if total <= 0.0 {
                    continue;
                }
                let fits = costs.iter().zip(&spent).zip(&objectives).all(|((c, s), (_, z))| s + c <= z + BUDGET_TOL);
                if fits && best.is_none_or(|(b, _)| total > b) {
                    best = Some((total, yhat));
                }
            }
            if let Some((_, yhat)) = best {
                for (s, (w, _)) in spent.iter_mut().zip(&objectives) {
                    *s += mass[x] * w.get(yhat, y);
                }
                labels[x] = yhat;
            }
        }
        Hypothesis::Deterministic(labels)
    }

    fn coin_trivial(&self, query: &Query<'_>) -> Result<Hypothesis> {
        let (w, z) = self.guarantee.as_multi()?;
        let k = w.k();
        let q = query.label_marginal(k);
        let uniform = SimplexDist::uniform(k);
        let uniform_ok = w
            .costs()
            .iter()
            .zip(z.values())
            .all(|(c, zi)| (0..k).map(|j| q[j] * c.cost_against(uniform.probs(), j)).sum::<f64>() <= zi + BUDGET_TOL);
        if uniform_ok {
            return Ok(Hypothesis::RandomGuess(uniform));
        }
        let (_, p) = attainability::best_response(&w, z.values(), &q)?;
        Ok(Hypothesis::RandomGuess(SimplexDist::from_weights(&p)?))
    }
}

/// A learner that answers every query with a random guess meeting (w, z) on the estimated marginal.
pub fn coin_trivial_learner(w: &MultiCost, z: &GuaranteeVector, cfg: &AttainConfig) -> Result<WeakLearnerSpec> {
    let verdict = attainability::is_coin_attainable(w, z, cfg)?;
    if !verdict.attainable {
        let detail = verdict
            .witness
            .map(|wit| format!(" (weights {:?} give ⟨α,z⟩ = {:.9} < V(w_α) = {:.9})", wit.alpha, wit.z_alpha, wit.value))
            .unwrap_or_default();
        return Err(Error::contract(format!("guarantee {:?} is not coin-attainable{detail}", z.values())));
    }
    Ok(WeakLearnerSpec {
        guarantee: Guarantee::Multi { w: w.clone(), z: z.clone() },
        sample_complexity: SampleComplexity::default(),
        behavior: Behavior::CoinTrivial,
    })
}

/// A sample-blind learner that plays the minimax coin of J; its guarantee is V_J(w).
pub fn coin_on_j_learner(w: &CostMatrix, set: LabelSet, inst: &Instance) -> Result<WeakLearnerSpec> {
    if let Some(x) = (0..inst.domain_size()).find(|&x| !set.contains(inst.label(x))) {
        return Err(Error::contract(format!(
            "target label {} at point {x} lies outside J = {set}",
            inst.label(x) + 1
        )));
    }
    let g = game_value(w, set)?;
    Ok(WeakLearnerSpec {
        guarantee: Guarantee::Scalar { w: w.clone(), z: g.value },
        sample_complexity: SampleComplexity::default(),
        behavior: Behavior::CoinOnJ { subset: set, strategy: g.minimax_strategy },
    })
}

/// An exact (w, z)-learner on every query distribution: the target with planted errors.
pub fn planted_noise_learner(w: &CostMatrix, z: f64, inst: &Instance) -> Result<WeakLearnerSpec> {
    planted_noise_learner_multi(&MultiCost::single(w.clone()), &GuaranteeVector::new(vec![z])?, inst, None)
}

pub fn planted_noise_learner_multi(
    w: &MultiCost,
    z: &GuaranteeVector,
    inst: &Instance,
    pool: Option<Vec<usize>>,
) -> Result<WeakLearnerSpec> {
    if w.k() != inst.k() {
        return Err(Error::input(format!("cost has k = {} but the instance has k = {}", w.k(), inst.k())));
    }
    if w.r() != z.r() {
        return Err(Error::input(format!("{} objectives but {} guarantees", w.r(), z.r())));
    }
    if let Some(p) = &pool {
        if let Some(&x) = p.iter().find(|&&x| x >= inst.domain_size()) {
            return Err(Error::input(format!("pool point {x} is outside the domain")));
        }
    }
    let guarantee = if w.r() == 1 {
        Guarantee::Scalar { w: w.objective(0).clone(), z: z.values()[0] }
    } else {
        Guarantee::Multi { w: w.clone(), z: z.clone() }
    };
    Ok(WeakLearnerSpec {
        guarantee,
        sample_complexity: SampleComplexity::default(),
        behavior: Behavior::PlantedNoise { target: inst.target().to_vec(), pool },
    })
}

pub fn pool_erm_learner(guarantee: Guarantee, pool: Vec<Hypothesis>) -> Result<WeakLearnerSpec> {
    if pool.is_empty() {
        return Err(Error::input("pool learner needs at least one hypothesis"));
    }
    Ok(WeakLearnerSpec { guarantee, sample_complexity: SampleComplexity::default(), behavior: Behavior::PoolErm { pool } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn examples_uniform(n: usize, inst: &Instance) -> Vec<Example> {
        (0..n).map(|x| Example { point: x, label: inst.label(x), count: 1 }).collect()
    }

    #[test]
    fn truth_has_zero_loss() {
        let inst = Instance::new(3, vec![0, 1, 2, 1]).unwrap();
        let h = Hypothesis::Deterministic(inst.target().to_vec());
        let w = CostMatrix::random(3, 2).unwrap();
        assert_eq!(loss(&w, &h, &inst, &SimplexDist::uniform(4)).unwrap(), 0.0);
    }

    #[test]
    fn wrong_on_three_tenths() {
        let inst = Instance::new(2, vec![0; 10]).unwrap();
        let mut labels = vec![0; 10];
        labels[..3].iter_mut().for_each(|l| *l = 1);
        let w = CostMatrix::zero_one(2).unwrap();
        let l = loss(&w, &Hypothesis::Deterministic(labels), &inst, &SimplexDist::uniform(10)).unwrap();
        assert!((l - 0.3).abs() < 1e-12);
    }

    #[test]
    fn planted_noise_fills_budget() {
        let inst = Instance::new(2, vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]).unwrap();
        let w = CostMatrix::zero_one(2).unwrap();
        let learner = planted_noise_learner(&w, 0.35, &inst).unwrap();
        let ex = examples_uniform(10, &inst);
        let h = learner.learn(&Query { examples: &ex, distribution: None }, 10).unwrap();
        let Hypothesis::Deterministic(labels) = &h else { panic!() };
        let errors = labels.iter().zip(inst.target()).filter(|(a, b)| a != b).count();
        assert_eq!(errors, 3);

        let exact = planted_noise_learner(&w, 0.0, &inst).unwrap();
        let h = exact.learn(&Query { examples: &ex, distribution: None }, 10).unwrap();
        assert_eq!(h, Hypothesis::Deterministic(inst.target().to_vec()));
    }

    #[test]
    fn coin_on_j_checks_target() {
        let w = CostMatrix::zero_one(3).unwrap();
        let inst = Instance::new(3, vec![0, 1, 0]).unwrap();
        let set = LabelSet::from_labels(&[0, 1]);
        let learner = coin_on_j_learner(&w, set, &inst).unwrap();
        let Behavior::CoinOnJ { strategy, .. } = &learner.behavior else { panic!() };
        assert!((strategy[0] - 0.5).abs() < 1e-9 && (strategy[1] - 0.5).abs() < 1e-9);
        let err = coin_on_j_learner(&w, LabelSet::singleton(0), &inst).unwrap_err();
        assert!(err.is_contract());
    }

    #[test]
    fn coin_trivial_examples() {
        let cfg = AttainConfig::default();
        let w = MultiCost::single(CostMatrix::zero_one(2).unwrap());
        let learner = coin_trivial_learner(&w, &GuaranteeVector::new(vec![0.5]).unwrap(), &cfg).unwrap();
        let inst = Instance::new(2, vec![0, 1, 1, 1]).unwrap();
        let ex = examples_uniform(4, &inst);
        let h = learner.learn(&Query { examples: &ex, distribution: None }, 4).unwrap();
        assert_eq!(h, Hypothesis::RandomGuess(SimplexDist::uniform(2)));

        let w = MultiCost::population_driven();
        let z = GuaranteeVector::new(vec![0.25, 0.25]).unwrap();
        let learner = coin_trivial_learner(&w, &z, &cfg).unwrap();
        let inst = Instance::new(2, vec![0, 1]).unwrap();
        let h = learner.learn(&Query { examples: &examples_uniform(2, &inst), distribution: None }, 2).unwrap();
        assert_eq!(h, Hypothesis::RandomGuess(SimplexDist::uniform(2)));

        let bad = GuaranteeVector::new(vec![0.1, 0.4]).unwrap();
        assert!(coin_trivial_learner(&w, &bad, &cfg).unwrap_err().is_contract());
    }

    #[test]
    fn m0_formula() {
        let sc = SampleComplexity::default();
        assert_eq!(sc.m0(0.1, (-1.0f64).exp()), 800);
    }

    #[test]
    fn instance_json_is_one_based() {
        let inst = Instance::new(3, vec![0, 2]).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        assert_eq!(text, r#"{"domain_size":2,"k":3,"target":[1,3]}"#);
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        assert!(serde_json::from_str::<Instance>(r#"{"domain_size":2,"k":3,"target":[0,3]}"#).is_err());
    }

    #[test]
    fn random_guess_loss_is_expected_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = CostMatrix::random(3, 8).unwrap();
        let inst = Instance::random_with(30, &SimplexDist::uniform(3), &mut rng).unwrap();
        let d = SimplexDist::uniform(30);
        let mut q = vec![0.0; 3];
        for x in 0..30 {
            q[inst.label(x)] += 1.0 / 30.0;
        }
        let p = SimplexDist::new(vec![0.2, 0.3, 0.5]).unwrap();
        let l = loss(&w, &Hypothesis::RandomGuess(p.clone()), &inst, &d).unwrap();
        let q = SimplexDist::from_weights(&q).unwrap();
        assert!((l - crate::games::expected_cost(&w, &p, &q).unwrap()).abs() < 1e-12);
    }
}
