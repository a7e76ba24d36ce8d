//! Zero-sum prediction games defined by a cost matrix.
//!
//! Labels are `0..k` internally and `1..=k` in every serialized form. For
//! binary problems label 0 stands for −1 and label 1 for +1.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, Sense};

pub const MAX_LABELS: usize = 12;
/// Values closer than this are merged into one ladder level.
pub const DEDUP_TOL: f64 = 1e-9;
const SIMPLEX_SUM_TOL: f64 = 1e-12;

#[derive(Deserialize)]
struct RawCostMatrix {
    k: usize,
    entries: Vec<Vec<f64>>,
}

/// A k×k cost matrix; `get(i, j)` is the cost of predicting `i` when the truth is `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCostMatrix")]
pub struct CostMatrix {
    k: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<RawCostMatrix> for CostMatrix {
    type Error = Error;

    fn try_from(raw: RawCostMatrix) -> Result<Self> {
        if raw.entries.len() != raw.k {
            return Err(Error::input(format!(
                "cost matrix declares k = {} but has {} rows",
                raw.k,
                raw.entries.len()
            )));
        }
        CostMatrix::new(raw.entries)
    }
}

impl CostMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let k = entries.len();
        if !(2..=MAX_LABELS).contains(&k) {
            return Err(Error::input(format!(
                "cost matrix must have between 2 and {MAX_LABELS} labels, got {k}"
            )));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != k {
                return Err(Error::input(format!("cost matrix row {} has {} entries, expected {k}", i + 1, row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::input(format!(
                        "cost entry ({}, {}) = {v} is outside [0, 1]",
                        i + 1,
                        j + 1
                    )));
                }
            }
            if row[i] != 0.0 {
                return Err(Error::input(format!("cost entry ({0}, {0}) must be zero, got {1}", i + 1, row[i])));
            }
        }
        Ok(CostMatrix { k, entries })
    }

    /// Binary cost with `w_plus` = w(+1, −1) and `w_minus` = w(−1, +1).
    pub fn binary(w_plus: f64, w_minus: f64) -> Result<Self> {
        CostMatrix::new(vec![vec![0.0, w_minus], vec![w_plus, 0.0]])
    }

    pub fn zero_one(k: usize) -> Result<Self> {
        CostMatrix::new((0..k).map(|i| (0..k).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect())
    }

    /// Off-diagonal entries drawn uniformly from [0, 1).
    pub fn random_with<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        let entries = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 0.0 } else { rng.random::<f64>() }).collect())
            .collect();
        CostMatrix::new(entries)
    }

    pub fn random(k: usize, seed: u64) -> Result<Self> {
        Self::random_with(k, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, predicted: usize, truth: usize) -> f64 {
        self.entries[predicted][truth]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    /// w(+1, −1) of a binary cost.
    pub fn w_plus(&self) -> f64 {
        self.entries[1][0]
    }

    /// w(−1, +1) of a binary cost.
    pub fn w_minus(&self) -> f64 {
        self.entries[0][1]
    }

    /// Smallest positive entry, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.entries.iter().flatten().copied().filter(|&v| v > 0.0).reduce(f64::min)
    }

    /// Expected cost of the mixed prediction `p` against truth label `j`.
    pub fn cost_against(&self, p: &[f64], j: usize) -> f64 {
        p.iter().enumerate().map(|(i, pi)| pi * self.entries[i][j]).sum()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::input(format!("cannot read {}: {e}", path.as_ref().display())))?;
        serde_json::from_str(&text).map_err(|e| Error::input(format!("bad cost matrix JSON: {e}")))
    }
}

/// A probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexDist(Vec<f64>);

impl TryFrom<Vec<f64>> for SimplexDist {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SimplexDist::new(v)
    }
}

impl From<SimplexDist> for Vec<f64> {
    fn from(d: SimplexDist) -> Self {
        d.0
    }
}

impl SimplexDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::input("distribution over an empty index set"));
        }
        if let Some(v) = probs.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::input(format!("distribution entry {v} is negative or not finite")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL * probs.len() as f64 {
            return Err(Error::input(format!("distribution sums to {sum}, not 1")));
        }
        Ok(SimplexDist(probs))
    }

    /// Normalises non-negative weights; negative round-off is clipped to zero.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let clipped: Vec<f64> = weights.iter().map(|&w| if w > 0.0 { w } else { 0.0 }).collect();
        let sum: f64 = clipped.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::input("weights have no positive mass"));
        }
        Ok(SimplexDist(clipped.into_iter().map(|w| w / sum).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        SimplexDist(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        SimplexDist(v)
    }

    /// Uniform over the labels of `set` inside `0..n`.
    pub fn uniform_on(n: usize, set: LabelSet) -> Self {
        let mut v = vec![0.0; n];
        let share = 1.0 / set.len() as f64;
        for j in set.iter() {
            v[j] = share;
        }
        SimplexDist(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> LabelSet {
        LabelSet::from_mask(self.0.iter().enumerate().filter(|(_, &p)| p > 0.0).fold(0u16, |m, (i, _)| m | (1 << i)))
    }
}

impl std::ops::Index<usize> for SimplexDist {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A subset of the labels `0..k`, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LabelSet(u16);

impl TryFrom<Vec<usize>> for LabelSet {
    type Error = Error;
    /// From 1-based labels.
    fn try_from(labels: Vec<usize>) -> Result<Self> {
        LabelSet::from_one_based(&labels)
    }
}

impl From<LabelSet> for Vec<usize> {
    fn from(s: LabelSet) -> Self {
        s.iter().map(|j| j + 1).collect()
    }
}

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn full(k: usize) -> Self {
        LabelSet(((1u32 << k) - 1) as u16)
    }

    pub fn singleton(j: usize) -> Self {
        LabelSet(1 << j)
    }

    pub fn from_mask(mask: u16) -> Self {
        LabelSet(mask)
    }

    pub fn from_labels(labels: &[usize]) -> Self {
        LabelSet(labels.iter().fold(0, |m, &j| m | (1 << j)))
    }

    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        let mut mask = 0u16;
        for &l in labels {
            if l == 0 || l > MAX_LABELS {
                return Err(Error::input(format!("label {l} is outside 1..={MAX_LABELS}")));
            }
            mask |= 1 << (l - 1);
        }
        Ok(LabelSet(mask))
    }

    /// Parses "1,2,3" style 1-based label lists.
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let mut labels = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let l: usize = part.parse().map_err(|_| Error::input(format!("bad label {part:?} in subset {text:?}")))?;
            if l == 0 || l > k {
                return Err(Error::input(format!("label {l} in subset {text:?} is outside 1..={k}")));
            }
            labels.push(l);
        }
        Self::from_one_based(&labels)
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, j: usize) -> bool {
        j < 16 && self.0 & (1 << j) != 0
    }

    pub fn is_subset_of(self, other: LabelSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 & other.0)
    }

    pub fn insert(&mut self, j: usize) {
        self.0 |= 1 << j;
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..16).filter(move |&j| self.0 & (1 << j) != 0)
    }

    pub fn fits(self, k: usize) -> bool {
        self.0 >> k == 0
    }

    /// Every nonempty subset of `0..k`, ordered by mask.
    pub fn all_nonempty(k: usize) -> impl Iterator<Item = LabelSet> {
        (1u32..(1u32 << k)).map(|m| LabelSet(m as u16))
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.iter().map(|j| (j + 1).to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// Σ_{i,j} p_i q_j w(i, j).
pub fn expected_cost(w: &CostMatrix, p: &SimplexDist, q: &SimplexDist) -> Result<f64> {
    if p.len() != w.k() || q.len() != w.k() {
        return Err(Error::input(format!(
            "distributions of length {} and {} do not match k = {}",
            p.len(),
            q.len(),
            w.k()
        )));
    }
    Ok((0..w.k()).map(|j| q[j] * w.cost_against(p.probs(), j)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameValue {
    pub value: f64,
    pub minimax_strategy: SimplexDist,
    pub restriction: LabelSet,
}

fn check_subset(w: &CostMatrix, set: LabelSet) -> Result<()> {
    if set.is_empty() {
        return Err(Error::input("the label subset must be nonempty"));
    }
    if !set.fits(w.k()) {
        return Err(Error::input(format!("subset {set} has labels outside 1..={}", w.k())));
    }
    Ok(())
}

/// min over p ∈ Δ_Y of max over j ∈ J of w(p, j).
pub fn game_value(w: &CostMatrix, set: LabelSet) -> Result<GameValue> {
    check_subset(w, set)?;
    let k = w.k();
    // Variables: p_0..p_{k-1}, t.
    let mut objective = vec![0.0; k + 1];
    objective[k] = 1.0;
    let mut lp = LinearProgram::minimize(objective);
    for j in set.iter() {
        let mut row: Vec<f64> = (0..k).map(|i| w.get(i, j)).collect();
        row.push(-1.0);
        lp.add_constraint(row, Sense::Le, 0.0);
    }
    let mut simplex_row = vec![1.0; k];
    simplex_row.push(0.0);
    lp.add_constraint(simplex_row, Sense::Eq, 1.0);
    let sol = lp::solve(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::Numeric(format!("game LP for subset {set} returned {:?}", sol.status)));
    }
    let p = SimplexDist::from_weights(&sol.primal[..k])?;
    let value = set.iter().map(|j| w.cost_against(p.probs(), j)).fold(0.0, f64::max);
    Ok(GameValue { value, minimax_strategy: p, restriction: set })
}

/// An optimal mixed strategy for the environment: q ∈ Δ_J maximising min_i w(i, q).
pub fn maximin_strategy(w: &CostMatrix, set: LabelSet) -> Result<SimplexDist> {
    check_subset(w, set)?;
    let k = w.k();
    let members: Vec<usize> = set.iter().collect();
    let n = members.len();
    // Variables: q over members, u.
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::maximize(objective);
    for i in 0..k {
        let mut row: Vec<f64> = members.iter().map(|&j| -w.get(i, j)).collect();
        row.push(1.0);
        lp.add_constraint(row, Sense::Le, 0.0);
    }
    let mut simplex_row = vec![1.0; n];
    simplex_row.push(0.0);
    lp.add_constraint(simplex_row, Sense::Eq, 1.0);
    let sol = lp::solve(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::Numeric(format!("maximin LP for subset {set} returned {:?}", sol.status)));
    }
    let q_members = SimplexDist::from_weights(&sol.primal[..n])?;
    let mut q = vec![0.0; k];
    for (idx, &j) in members.iter().enumerate() {
        q[j] = q_members[idx];
    }
    SimplexDist::new(q).or_else(|_| Ok(SimplexDist::uniform_on(k, set)))
}

/// V_J(w) for every nonempty J, indexed by mask (entry 0 is V_∅ = 0).
pub fn subset_values(w: &CostMatrix) -> Result<Vec<f64>> {
    let k = w.k();
    if k > MAX_LABELS {
        return Err(Error::capacity(format!("k = {k} exceeds the subset enumeration cap of {MAX_LABELS}")));
    }
    let values: Vec<f64> = (1u32..(1u32 << k))
        .into_par_iter()
        .map(|m| game_value(w, LabelSet::from_mask(m as u16)).map(|g| g.value))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(0.0);
    out.extend(values);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdLadder {
    pub k: usize,
    /// Strictly increasing distinct values v_1 = 0 < v_2 < ...
    pub levels: Vec<f64>,
    /// Subsets attaining each level.
    pub witnesses: Vec<Vec<LabelSet>>,
    /// Minimum of V_J over |J| = s, for s = 2..=k.
    pub coarse_min: Vec<f64>,
    /// Maximum of V_J over |J| = s, for s = 2..=k.
    pub coarse_max: Vec<f64>,
}

impl ThresholdLadder {
    /// Builds the ladder from the table produced by [`subset_values`].
    pub fn from_values(k: usize, values: &[f64]) -> Self {
        let mut order: Vec<usize> = (1..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut levels: Vec<f64> = Vec::new();
        let mut witnesses: Vec<Vec<LabelSet>> = Vec::new();
        for m in order {
            let v = values[m];
            match levels.last() {
                Some(&last) if v - last <= DEDUP_TOL => {
                    witnesses.last_mut().unwrap().push(LabelSet::from_mask(m as u16));
                }
                _ => {
                    levels.push(v);
                    witnesses.push(vec![LabelSet::from_mask(m as u16)]);
                }
            }
        }
        for w in witnesses.iter_mut() {
            w.sort_by_key(|s| (s.len(), s.mask()));
        }
        let mut coarse_min = vec![f64::INFINITY; k.saturating_sub(1)];
        let mut coarse_max = vec![f64::NEG_INFINITY; k.saturating_sub(1)];
        for (m, &v) in values.iter().enumerate().skip(1) {
            let s = (m as u16).count_ones() as usize;
            if s >= 2 {
                coarse_min[s - 2] = coarse_min[s - 2].min(v);
                coarse_max[s - 2] = coarse_max[s - 2].max(v);
            }
        }
        ThresholdLadder { k, levels, witnesses, coarse_min, coarse_max }
    }

    pub fn tau(&self) -> usize {
        self.levels.len()
    }

    /// v_n for 1-based `n`.
    pub fn level(&self, n: usize) -> f64 {
        self.levels[n - 1]
    }

    /// Minimum of V_J over |J| = s (0 for s = 1).
    pub fn v_lower(&self, s: usize) -> f64 {
        if s <= 1 {
            0.0
        } else {
            self.coarse_min[s - 2]
        }
    }

    /// Maximum of V_J over |J| = s (0 for s = 1).
    pub fn v_upper(&self, s: usize) -> f64 {
        if s <= 1 {
            0.0
        } else {
            self.coarse_max[s - 2]
        }
    }

    /// Largest 1-based n with v_n ≤ z.
    pub fn bucket_of(&self, z: f64) -> usize {
        self.levels.iter().take_while(|&&v| v <= z + DEDUP_TOL).count().max(1)
    }

    /// Distance from z up to the next level strictly above it, or 0 if none.
    pub fn margin(&self, z: f64) -> f64 {
        self.levels.iter().find(|&&v| v > z + DEDUP_TOL).map_or(0.0, |&v| v - z)
    }

    /// Smallest s with z < v_lower(s + 1), or k when no such s exists.
    pub fn list_size_for(&self, z: f64) -> usize {
        (1..self.k).find(|&s| z < self.v_lower(s + 1)).unwrap_or(self.k)
    }
}

pub fn threshold_ladder(w: &CostMatrix) -> Result<ThresholdLadder> {
    let values = subset_values(w)?;
    Ok(ThresholdLadder::from_values(w.k(), &values))
}

pub fn bucket_of(ladder: &ThresholdLadder, z: f64) -> usize {
    ladder.bucket_of(z)
}

/// Multiclass margin of a (w, z) guarantee; equals max(0, V(w) − z) for k = 2.
pub fn margin(w: &CostMatrix, z: f64) -> Result<f64> {
    Ok(threshold_ladder(w)?.margin(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn expected_cost_examples() {
        let w = CostMatrix::zero_one(2).unwrap();
        let half = SimplexDist::uniform(2);
        assert!(close(expected_cost(&w, &half, &half).unwrap(), 0.5, 1e-15));

        let w = CostMatrix::binary(1.0, 1.0).unwrap();
        let e = SimplexDist::point(2, 0);
        assert_eq!(expected_cost(&w, &e, &e).unwrap(), 0.0);

        let w = CostMatrix::binary(0.5, 1.0).unwrap();
        let q = SimplexDist::point(2, 1);
        assert!(close(expected_cost(&w, &half, &q).unwrap(), 0.5, 1e-15));

        assert!(matches!(expected_cost(&w, &SimplexDist::uniform(3), &q), Err(Error::Input(_))));
    }

    #[test]
    fn binary_values() {
        let full = LabelSet::full(2);
        assert!(close(game_value(&CostMatrix::binary(1.0, 1.0).unwrap(), full).unwrap().value, 0.5, 1e-9));
        assert!(close(game_value(&CostMatrix::binary(1.0, 0.25).unwrap(), full).unwrap().value, 0.2, 1e-9));
        assert!(close(game_value(&CostMatrix::binary(0.7, 0.0).unwrap(), full).unwrap().value, 0.0, 1e-12));
    }

    #[test]
    fn zero_one_subset_value() {
        let w = CostMatrix::zero_one(4).unwrap();
        let g = game_value(&w, LabelSet::from_labels(&[0, 2, 3])).unwrap();
        assert!(close(g.value, 2.0 / 3.0, 1e-9));
        assert!(game_value(&w, LabelSet::EMPTY).is_err());
    }

    #[test]
    fn ladder_zero_one_three() {
        let l = threshold_ladder(&CostMatrix::zero_one(3).unwrap()).unwrap();
        assert_eq!(l.levels.len(), 3);
        assert!(close(l.levels[1], 0.5, 1e-9) && close(l.levels[2], 2.0 / 3.0, 1e-9));
        assert_eq!(l.witnesses[0].len(), 3);
        assert_eq!(l.witnesses[1].len(), 3);
        assert_eq!(l.witnesses[2], vec![LabelSet::full(3)]);
        assert_eq!(l.bucket_of(0.55), 2);
        assert_eq!(l.bucket_of(0.0), 1);
        assert_eq!(l.bucket_of(0.9), 3);
        assert!(close(l.margin(0.55), 2.0 / 3.0 - 0.55, 1e-9));
        assert_eq!(l.margin(2.0 / 3.0), 0.0);
    }

    #[test]
    fn margin_binary() {
        let w = CostMatrix::binary(1.0, 1.0).unwrap();
        assert!(close(margin(&w, 0.4).unwrap(), 0.1, 1e-9));
        assert_eq!(margin(&w, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn list_sizes() {
        let l = threshold_ladder(&CostMatrix::zero_one(4).unwrap()).unwrap();
        assert_eq!(l.list_size_for(0.55), 2);
        assert_eq!(l.list_size_for(0.0), 1);
        assert_eq!(l.list_size_for(0.75), 4);
    }

    #[test]
    fn maximin_matches_value() {
        let w = CostMatrix::random(4, 9).unwrap();
        let set = LabelSet::from_labels(&[0, 1, 3]);
        let v = game_value(&w, set).unwrap().value;
        let q = maximin_strategy(&w, set).unwrap();
        assert!(q.support().is_subset_of(set));
        let guaranteed = (0..4).map(|i| (0..4).map(|j| q[j] * w.get(i, j)).sum::<f64>()).fold(f64::INFINITY, f64::min);
        assert!(close(guaranteed, v, 1e-9));
    }

    #[test]
    fn cost_matrix_json_round_trip_and_validation() {
        let w = CostMatrix::random(3, 1).unwrap();
        let text = serde_json::to_string(&w).unwrap();
        let back: CostMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(w, back);
        let bad = r#"{"k": 2, "entries": [[0.5, 1.0], [1.0, 0.0]]}"#;
        assert!(serde_json::from_str::<CostMatrix>(bad).is_err());
        let bad = r#"{"k": 3, "entries": [[0.0, 1.0], [1.0, 0.0]]}"#;
        assert!(serde_json::from_str::<CostMatrix>(bad).is_err());
    }

    #[test]
    fn label_set_parsing() {
        assert_eq!(LabelSet::parse("1,3", 3).unwrap(), LabelSet::from_labels(&[0, 2]));
        assert!(LabelSet::parse("4", 3).is_err());
        assert!(LabelSet::parse("x", 3).is_err());
        assert_eq!(serde_json::to_string(&LabelSet::from_labels(&[0, 2])).unwrap(), "[1,3]");
    }
}
