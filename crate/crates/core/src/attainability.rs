//! Which guarantee vectors can be met by random guessing.
//!
//! A vector z is J-dice-attainable for the objectives w = (w_1, ..., w_r) when
//! for every label marginal q supported on J some coin p satisfies
//! w_i(p, q) ≤ z_i for all i. The decision is made on a grid over Δ_J, with a
//! feasibility LP at every grid point; the dual view (a sweep over objective
//! weights α) is available as an independent cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{game_value, CostMatrix, LabelSet, SimplexDist, MAX_LABELS};
use crate::lp::{self, Bounds, LinearProgram, Sense};

pub const MAX_OBJECTIVES: usize = 8;

/// r cost matrices over a common label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CostMatrix>", into = "Vec<CostMatrix>")]
pub struct MultiCost(Vec<CostMatrix>);

impl TryFrom<Vec<CostMatrix>> for MultiCost {
    type Error = Error;
    fn try_from(costs: Vec<CostMatrix>) -> Result<Self> {
        MultiCost::new(costs)
    }
}

impl From<MultiCost> for Vec<CostMatrix> {
    fn from(w: MultiCost) -> Self {
        w.0
    }
}

impl MultiCost {
    pub fn new(costs: Vec<CostMatrix>) -> Result<Self> {
        if costs.is_empty() || costs.len() > MAX_OBJECTIVES {
            return Err(Error::input(format!(
                "a multi-objective cost needs between 1 and {MAX_OBJECTIVES} objectives, got {}",
                costs.len()
            )));
        }
        let k = costs[0].k();
        if let Some(c) = costs.iter().find(|c| c.k() != k) {
            return Err(Error::input(format!("objectives disagree on k: {k} versus {}", c.k())));
        }
        Ok(MultiCost(costs))
    }

    pub fn single(w: CostMatrix) -> Self {
        MultiCost(vec![w])
    }

    /// The binary pair (w₋, w₊) with w₋ = 1{predict −1, truth +1} and w₊ = 1{predict +1, truth −1}.
    pub fn population_driven() -> Self {
        MultiCost(vec![
            CostMatrix::binary(0.0, 1.0).expect("valid binary cost"),
            CostMatrix::binary(1.0, 0.0).expect("valid binary cost"),
        ])
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    pub fn k(&self) -> usize {
        self.0[0].k()
    }

    pub fn costs(&self) -> &[CostMatrix] {
        &self.0
    }

    pub fn objective(&self, i: usize) -> &CostMatrix {
        &self.0[i]
    }
}

/// z ∈ [0, 1]^r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GuaranteeVector(Vec<f64>);

impl TryFrom<Vec<f64>> for GuaranteeVector {
    type Error = Error;
    fn try_from(z: Vec<f64>) -> Result<Self> {
        GuaranteeVector::new(z)
    }
}

impl From<GuaranteeVector> for Vec<f64> {
    fn from(z: GuaranteeVector) -> Self {
        z.0
    }
}

impl GuaranteeVector {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::input("guarantee vector is empty"));
        }
        if let Some(v) = z.iter().find(|v| !v.is_finite() || !(0.0..=1.0).contains(*v)) {
            return Err(Error::input(format!("guarantee {v} is outside [0, 1]")));
        }
        Ok(GuaranteeVector(z))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    /// ⟨α, z⟩.
    pub fn scalarize(&self, alpha: &[f64]) -> f64 {
        self.0.iter().zip(alpha).map(|(z, a)| z * a).sum()
    }

    pub fn dominates(&self, other: &GuaranteeVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

fn check_dims(w: &MultiCost, z: &GuaranteeVector) -> Result<()> {
    if w.r() != z.r() {
        return Err(Error::input(format!("{} objectives but {} guarantees", w.r(), z.r())));
    }
    Ok(())
}

/// w_α = Σ α_i w_i.
pub fn scalarize(w: &MultiCost, alpha: &SimplexDist) -> Result<CostMatrix> {
    if alpha.len() != w.r() {
        return Err(Error::input(format!("weights of length {} for {} objectives", alpha.len(), w.r())));
    }
    let k = w.k();
    let entries = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let v: f64 = w.costs().iter().zip(alpha.probs()).map(|(c, a)| a * c.get(i, j)).sum();
                    v.clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    CostMatrix::new(entries)
}

/// All points of Δ_dim with coordinates in multiples of 1/n, in lexicographic order.
pub fn simplex_grid(dim: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(dim: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dim == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=remaining {
            prefix.push(c);
            rec(dim - 1, remaining - c, prefix, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    rec(dim, n, &mut Vec::with_capacity(dim), &mut counts);
    counts.into_iter().map(|c| c.into_iter().map(|v| v as f64 / n as f64).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionMode {
    /// Grid over Δ_J with a feasibility LP per point.
    Grid,
    /// Sweep over Δ_r testing ⟨α, z⟩ ≥ V_J(w_α).
    DualitySweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttainConfig {
    pub mode: DecisionMode,
    /// Grid divisions per coordinate of Δ_J; `None` picks 200 for |J| ≤ 3 and 50 for |J| ≤ 5.
    pub grid_divisions: Option<usize>,
    /// Divisions per coordinate of the Δ_r sweep; `None` picks 100, 20 or 8 by r.
    pub alpha_divisions: Option<usize>,
    pub slack_tol: f64,
    pub cross_check: bool,
    /// Keep a sample of the q ↦ p certificate (otherwise only the tightest point).
    pub record_certificate: bool,
}

impl Default for AttainConfig {
    fn default() -> Self {
        AttainConfig {
            mode: DecisionMode::Grid,
            grid_divisions: None,
            alpha_divisions: None,
            slack_tol: 1e-6,
            cross_check: false,
            record_certificate: true,
        }
    }
}

impl AttainConfig {
    fn grid_divisions_for(&self, size: usize) -> Result<usize> {
        if let Some(n) = self.grid_divisions {
            return Ok(n.max(1));
        }
        match size {
            0..=3 => Ok(200),
            4..=5 => Ok(50),
            _ => Err(Error::capacity(format!(
                "grid decision over a subset of size {size} is too large; use the duality-sweep mode"
            ))),
        }
    }

    fn alpha_divisions_for(&self, r: usize) -> usize {
        self.alpha_divisions.unwrap_or(match r {
            0..=3 => 100,
            4..=5 => 20,
            _ => 8,
        })
    }
}

/// Objective weights α with ⟨α, z⟩ < V_J(w_α).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaWitness {
    pub alpha: Vec<f64>,
    /// ⟨α, z⟩
    pub z_alpha: f64,
    /// V_J(w_α)
    pub value: f64,
}

impl AlphaWitness {
    pub fn gap(&self) -> f64 {
        self.value - self.z_alpha
    }
}

/// One sampled point of the q ↦ p response map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificatePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// w_i(p, q) for every objective.
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub sweep_attainable: bool,
    /// min over the α grid of ⟨α, z⟩ − V_J(w_α).
    pub min_gap: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttainabilityVerdict {
    pub subset: LabelSet,
    pub attainable: bool,
    /// Populated when not attainable.
    pub witness: Option<AlphaWitness>,
    /// Populated when attainable.
    pub certificate: Option<Vec<CertificatePoint>>,
    pub cross_check: Option<CrossCheck>,
}

/// Per-objective cost vectors c_ℓ(i) = Σ_j q_j w_ℓ(i, j).
fn response_costs(w: &MultiCost, q: &[f64]) -> Vec<Vec<f64>> {
    let k = w.k();
    w.costs()
        .iter()
        .map(|c| (0..k).map(|i| (0..k).map(|j| q[j] * c.get(i, j)).sum()).collect())
        .collect()
}

/// Smallest uniform slack s such that some coin p has every cost ≤ z_ℓ + s, with s ≥ −1.
pub(crate) fn best_response(w: &MultiCost, z: &[f64], q: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = w.k();
    let c = response_costs(w, q);
    let mut objective = vec![0.0; k + 1];
    objective[k] = 1.0;
    let mut prog = LinearProgram::minimize(objective);
    prog.set_bounds(k, Bounds { lower: Some(-1.0), upper: None });
    for (cl, &zl) in c.iter().zip(z) {
        let mut row = cl.clone();
        row.push(-1.0);
        prog.add_constraint(row, Sense::Le, zl);
    }
    let mut simplex_row = vec![1.0; k];
    simplex_row.push(0.0);
    prog.add_constraint(simplex_row, Sense::Eq, 1.0);
    let sol = lp::solve(&prog)?;
    if !sol.is_optimal() {
        return Err(Error::Numeric(format!("coin response LP returned {:?}", sol.status)));
    }
    let p = SimplexDist::from_weights(&sol.primal[..k])?.probs().to_vec();
    let slack = c
        .iter()
        .zip(z)
        .map(|(cl, zl)| cl.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() - zl)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((slack, p))
}

/// Dual certificate at a failing marginal q: α maximising min_i Σ_ℓ α_ℓ (c_ℓ(i) − z_ℓ).
fn alpha_at(w: &MultiCost, z: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    let k = w.k();
    let r = w.r();
    let c = response_costs(w, q);
    let mut objective = vec![0.0; r + 1];
    objective[r] = 1.0;
    let mut prog = LinearProgram::maximize(objective);
    prog.set_bounds(r, Bounds::FREE);
    for i in 0..k {
        let mut row: Vec<f64> = c.iter().zip(z).map(|(cl, zl)| zl - cl[i]).collect();
        row.push(1.0);
        prog.add_constraint(row, Sense::Le, 0.0);
    }
    let mut simplex_row = vec![1.0; r];
    simplex_row.push(0.0);
    prog.add_constraint(simplex_row, Sense::Eq, 1.0);
    let sol = lp::solve(&prog)?;
    if !sol.is_optimal() {
        return Err(Error::Numeric(format!("dual weight LP returned {:?}", sol.status)));
    }
    Ok(SimplexDist::from_weights(&sol.primal[..r])?.probs().to_vec())
}

fn witness_for(w: &MultiCost, z: &GuaranteeVector, set: LabelSet, alpha: Vec<f64>) -> Result<AlphaWitness> {
    let wa = scalarize(w, &SimplexDist::from_weights(&alpha)?)?;
    let value = game_value(&wa, set)?.value;
    Ok(AlphaWitness { z_alpha: z.scalarize(&alpha), alpha, value })
}

fn embed(q_sub: &[f64], set: LabelSet, k: usize) -> Vec<f64> {
    let mut q = vec![0.0; k];
    for (v, j) in q_sub.iter().zip(set.iter()) {
        q[j] = *v;
    }
    q
}

/// Minimises ⟨α, z⟩ − V_J(w_α) over the α grid.
fn duality_sweep(w: &MultiCost, z: &GuaranteeVector, set: LabelSet, cfg: &AttainConfig) -> Result<AlphaWitness> {
    let grid = simplex_grid(w.r(), cfg.alpha_divisions_for(w.r()));
    let witnesses: Vec<AlphaWitness> =
        grid.into_par_iter().map(|alpha| witness_for(w, z, set, alpha)).collect::<Result<_>>()?;
    Ok(witnesses
        .into_iter()
        .reduce(|best, cand| if -cand.gap() < -best.gap() { cand } else { best })
        .expect("the alpha grid is never empty"))
}

/// Decides whether z is J-dice-attainable.
pub fn is_dice_attainable(
    w: &MultiCost,
    z: &GuaranteeVector,
    set: LabelSet,
    cfg: &AttainConfig,
) -> Result<AttainabilityVerdict> {
    check_dims(w, z)?;
    if set.is_empty() {
        return Err(Error::input("the label subset must be nonempty"));
    }
    if !set.fits(w.k()) {
        return Err(Error::input(format!("subset {set} has labels outside 1..={}", w.k())));
    }
    let k = w.k();
    let zv = z.values();

    let sweep = if cfg.mode == DecisionMode::DualitySweep || cfg.cross_check {
        Some(duality_sweep(w, z, set, cfg)?)
    } else {
        None
    };

    let mut verdict = match cfg.mode {
        DecisionMode::Grid => {
            let divisions = cfg.grid_divisions_for(set.len())?;
            let grid = simplex_grid(set.len(), divisions);
            let responses: Vec<(f64, Vec<f64>)> = grid
                .par_iter()
                .map(|qs| best_response(w, zv, &embed(qs, set, k)))
                .collect::<Result<_>>()?;
            let failing = responses.iter().position(|(s, _)| *s > cfg.slack_tol);
            match failing {
                Some(idx) => {
                    let q = embed(&grid[idx], set, k);
                    let alpha = alpha_at(w, zv, &q)?;
                    AttainabilityVerdict {
                        subset: set,
                        attainable: false,
                        witness: Some(witness_for(w, z, set, alpha)?),
                        certificate: None,
                        cross_check: None,
                    }
                }
                None => {
                    let tightest = responses
                        .iter()
                        .enumerate()
                        .fold(0, |best, (i, (s, _))| if *s > responses[best].0 { i } else { best });
                    let stride = if cfg.record_certificate { (grid.len() / 32).max(1) } else { usize::MAX };
                    let mut picks: Vec<usize> = (0..grid.len()).step_by(stride.min(grid.len())).collect();
                    if !picks.contains(&tightest) {
                        picks.push(tightest);
                    }
                    let certificate = picks
                        .into_iter()
                        .map(|i| {
                            let q = embed(&grid[i], set, k);
                            let p = responses[i].1.clone();
                            let costs = response_costs(w, &q)
                                .iter()
                                .map(|c| c.iter().zip(&p).map(|(a, b)| a * b).sum())
                                .collect();
                            CertificatePoint { q, p, costs }
                        })
                        .collect();
                    AttainabilityVerdict {
                        subset: set,
                        attainable: true,
                        witness: None,
                        certificate: Some(certificate),
                        cross_check: None,
                    }
                }
            }
        }
        DecisionMode::DualitySweep => {
            let best = sweep.clone().expect("sweep computed");
            if best.gap() > cfg.slack_tol {
                AttainabilityVerdict { subset: set, attainable: false, witness: Some(best), certificate: None, cross_check: None }
            } else {
                // Certify at the vertices and the centre of Δ_J.
                let mut qs: Vec<Vec<f64>> = set.iter().map(|j| SimplexDist::point(k, j).probs().to_vec()).collect();
                qs.push(SimplexDist::uniform_on(k, set).probs().to_vec());
                let certificate = qs
                    .into_iter()
                    .map(|q| {
                        let (_, p) = best_response(w, zv, &q)?;
                        let costs =
                            response_costs(w, &q).iter().map(|c| c.iter().zip(&p).map(|(a, b)| a * b).sum()).collect();
                        Ok(CertificatePoint { q, p, costs })
                    })
                    .collect::<Result<_>>()?;
                AttainabilityVerdict {
                    subset: set,
                    attainable: true,
                    witness: None,
                    certificate: Some(certificate),
                    cross_check: None,
                }
            }
        }
    };

    if cfg.cross_check {
        let best = sweep.expect("sweep computed");
        let sweep_attainable = best.gap() <= cfg.slack_tol;
        verdict.cross_check = Some(CrossCheck {
            sweep_attainable,
            min_gap: -best.gap(),
            agrees: sweep_attainable == verdict.attainable,
        });
    }
    Ok(verdict)
}

pub fn is_coin_attainable(w: &MultiCost, z: &GuaranteeVector, cfg: &AttainConfig) -> Result<AttainabilityVerdict> {
    is_dice_attainable(w, z, LabelSet::full(w.k()), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvoidedSets {
    /// Every nonempty J with z outside its dice region, ordered by mask.
    pub avoided: Vec<LabelSet>,
    /// Inclusion-minimal members of `avoided`.
    pub minimal: Vec<LabelSet>,
}

impl AvoidedSets {
    pub fn contains(&self, set: LabelSet) -> bool {
        self.avoided.contains(&set)
    }
}

pub fn avoided_sets(w: &MultiCost, z: &GuaranteeVector, cfg: &AttainConfig) -> Result<AvoidedSets> {
    check_dims(w, z)?;
    let k = w.k();
    if k > MAX_LABELS {
        return Err(Error::capacity(format!("k = {k} exceeds the subset enumeration cap of {MAX_LABELS}")));
    }
    let quiet = AttainConfig { record_certificate: false, cross_check: false, ..cfg.clone() };
    let mut avoided = Vec::new();
    for set in LabelSet::all_nonempty(k) {
        // Supersets of an avoided set are avoided as well.
        if avoided.iter().any(|a: &LabelSet| a.is_subset_of(set)) {
            avoided.push(set);
            continue;
        }
        if set.len() == 1 {
            continue;
        }
        if !is_dice_attainable(w, z, set, &quiet)?.attainable {
            avoided.push(set);
        }
    }
    let minimal = avoided
        .iter()
        .copied()
        .filter(|s| !avoided.iter().any(|o| o != s && o.is_subset_of(*s)))
        .collect();
    Ok(AvoidedSets { avoided, minimal })
}

/// A subset avoided under `z_prime` but not under `z`, if any.
pub fn separating_subset(
    w: &MultiCost,
    z: &GuaranteeVector,
    z_prime: &GuaranteeVector,
    cfg: &AttainConfig,
) -> Result<Option<LabelSet>> {
    if z.r() != z_prime.r() {
        return Err(Error::input("guarantee vectors have different lengths"));
    }
    let av = avoided_sets(w, z, cfg)?;
    let av_prime = avoided_sets(w, z_prime, cfg)?;
    Ok(av_prime.avoided.into_iter().find(|s| !av.contains(*s)))
}

/// z ⪯ z′: every dice region containing z also contains z′.
pub fn precedes(w: &MultiCost, z: &GuaranteeVector, z_prime: &GuaranteeVector, cfg: &AttainConfig) -> Result<bool> {
    Ok(separating_subset(w, z, z_prime, cfg)?.is_none())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub z1: f64,
    pub z2: f64,
}

fn two_objectives(w: &MultiCost) -> Result<()> {
    if w.r() != 2 {
        return Err(Error::input(format!("boundary tracing needs exactly 2 objectives, got {}", w.r())));
    }
    Ok(())
}

fn coin_ok(w: &MultiCost, z1: f64, z2: f64, cfg: &AttainConfig) -> Result<bool> {
    let z = GuaranteeVector::new(vec![z1, z2])?;
    Ok(is_coin_attainable(w, &z, cfg)?.attainable)
}

/// For z1 = i/resolution, the smallest coin-attainable z2 (up to `tol`).
pub fn trace_boundary(w: &MultiCost, resolution: usize, tol: f64, cfg: &AttainConfig) -> Result<Vec<BoundaryPoint>> {
    two_objectives(w)?;
    if resolution == 0 {
        return Err(Error::input("resolution must be positive"));
    }
    let quiet = AttainConfig { record_certificate: false, cross_check: false, ..cfg.clone() };
    let mut points = Vec::new();
    for i in 0..=resolution {
        let z1 = i as f64 / resolution as f64;
        if !coin_ok(w, z1, 1.0, &quiet)? {
            continue;
        }
        if coin_ok(w, z1, 0.0, &quiet)? {
            points.push(BoundaryPoint { z1, z2: 0.0 });
            continue;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if coin_ok(w, z1, mid, &quiet)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        points.push(BoundaryPoint { z1, z2: hi });
    }
    Ok(points)
}

/// Lower edge of the intersection of the halfspaces ⟨α, z⟩ ≥ V(w_α) at `z1`.
pub fn envelope_z2(w: &MultiCost, z1: f64, alpha_grid: usize) -> Result<f64> {
    two_objectives(w)?;
    let n = alpha_grid.max(1);
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a1 = i as f64 / n as f64;
            let alpha = SimplexDist::from_weights(&[a1, 1.0 - a1])?;
            let v = game_value(&scalarize(w, &alpha)?, LabelSet::full(w.k()))?.value;
            Ok((v - a1 * z1) / (1.0 - a1))
        })
        .collect::<Result<_>>()?;
    Ok(values.into_iter().fold(0.0, f64::max).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub points: Vec<BoundaryPoint>,
    pub envelope: Vec<f64>,
    pub max_discrepancy: f64,
}

/// Compares the grid-traced boundary with the halfspace envelope.
pub fn envelope_check(
    w: &MultiCost,
    boundary: &[BoundaryPoint],
    alpha_grid: usize,
) -> Result<EnvelopeReport> {
    two_objectives(w)?;
    let envelope: Vec<f64> = boundary.iter().map(|b| envelope_z2(w, b.z1, alpha_grid)).collect::<Result<_>>()?;
    let max_discrepancy = boundary.iter().zip(&envelope).map(|(b, e)| (b.z2 - e).abs()).fold(0.0, f64::max);
    Ok(EnvelopeReport { points: boundary.to_vec(), envelope, max_discrepancy })
}
