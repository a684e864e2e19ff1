use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::flat::FlatMdp;
use super::structure::FactoredStructure;
use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;

/// Largest `S * A * S` table `flatten` will allocate.
pub const FLATTEN_LIMIT: u128 = 100_000_000;

/// Conditional probability table of one state factor: `|X[Z_i^p]|` rows over `S_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionFactor {
    num_values: usize,
    table: Vec<f64>,
}

impl TransitionFactor {
    pub fn new(num_values: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut table = Vec::with_capacity(rows.len() * num_values);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != num_values {
                return Err(Error::Model(format!(
                    "transition row {r} has {} entries, expected {num_values}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Model(format!("transition row {r} has entries outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Model(format!("transition row {r} sums to {sum}")));
            }
            table.extend_from_slice(row);
        }
        Ok(TransitionFactor { num_values, table })
    }

    pub fn num_values(&self) -> usize {
        self.num_values
    }

    pub fn num_rows(&self) -> usize {
        self.table.len() / self.num_values
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.table[row * self.num_values..(row + 1) * self.num_values]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.table.chunks(self.num_values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    Bernoulli,
    Constant,
}

/// Reward distribution of one row of a reward factor; supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardDist {
    Bernoulli(f64),
    Constant(f64),
}

impl RewardDist {
    pub fn new(kind: RewardKind, mean: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mean) {
            return Err(Error::Model(format!("reward mean {mean} outside [0,1]")));
        }
        Ok(match kind {
            RewardKind::Bernoulli => RewardDist::Bernoulli(mean),
            RewardKind::Constant => RewardDist::Constant(mean),
        })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            RewardDist::Bernoulli(p) | RewardDist::Constant(p) => p,
        }
    }

    pub fn kind(&self) -> RewardKind {
        match self {
            RewardDist::Bernoulli(_) => RewardKind::Bernoulli,
            RewardDist::Constant(_) => RewardKind::Constant,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RewardDist::Bernoulli(p) => {
                if rng.gen::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            RewardDist::Constant(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardFactor {
    rows: Vec<RewardDist>,
}

impl RewardFactor {
    pub fn new(rows: Vec<RewardDist>) -> Self {
        RewardFactor { rows }
    }

    pub fn from_means(kind: RewardKind, means: &[f64]) -> Result<Self> {
        Ok(RewardFactor {
            rows: means
                .iter()
                .map(|&m| RewardDist::new(kind, m))
                .collect::<Result<_>>()?,
        })
    }

    pub fn rows(&self) -> &[RewardDist] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, row: usize) -> &RewardDist {
        &self.rows[row]
    }
}

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next_state: usize,
    pub rewards: Vec<f64>,
    /// Collapsed reward `r^col`, the sum of the per-factor components.
    pub collapsed: f64,
}

/// A factored MDP: structure plus per-factor transition tables and reward distributions.
#[derive(Debug, Clone)]
pub struct FactoredMdp {
    structure: Arc<FactoredStructure>,
    transitions: Vec<TransitionFactor>,
    rewards: Vec<RewardFactor>,
}

impl FactoredMdp {
    pub fn new(
        structure: FactoredStructure,
        transitions: Vec<TransitionFactor>,
        rewards: Vec<RewardFactor>,
    ) -> Result<Self> {
        if transitions.len() != structure.num_state_factors() {
            return Err(Error::Model(format!(
                "{} transition factors for {} state factors",
                transitions.len(),
                structure.num_state_factors()
            )));
        }
        if rewards.len() != structure.num_reward_factors() {
            return Err(Error::Model(format!(
                "{} reward factors for {} reward scopes",
                rewards.len(),
                structure.num_reward_factors()
            )));
        }
        for (i, (f, z)) in transitions.iter().zip(structure.transition_scopes()).enumerate() {
            if f.num_values() != structure.state_factor_sizes()[i] {
                return Err(Error::Model(format!(
                    "transition factor {i} ranges over {} values, state factor has {}",
                    f.num_values(),
                    structure.state_factor_sizes()[i]
                )));
            }
            if f.num_rows() != z.cardinality() {
                return Err(Error::Model(format!(
                    "transition factor {i} has {} rows, scope has {}",
                    f.num_rows(),
                    z.cardinality()
                )));
            }
        }
        for (i, (f, z)) in rewards.iter().zip(structure.reward_scopes()).enumerate() {
            if f.rows().len() != z.cardinality() {
                return Err(Error::Model(format!(
                    "reward factor {i} has {} rows, scope has {}",
                    f.rows().len(),
                    z.cardinality()
                )));
            }
        }
        Ok(FactoredMdp {
            structure: Arc::new(structure),
            transitions,
            rewards,
        })
    }

    pub fn structure(&self) -> &FactoredStructure {
        &self.structure
    }

    pub fn shared_structure(&self) -> Arc<FactoredStructure> {
        Arc::clone(&self.structure)
    }

    pub fn transition_factors(&self) -> &[TransitionFactor] {
        &self.transitions
    }

    pub fn reward_factors(&self) -> &[RewardFactor] {
        &self.rewards
    }

    fn check_pair(&self, state: usize, action: usize) -> Result<usize> {
        let st = &self.structure;
        if state >= st.num_states() {
            return Err(Error::OutOfRange {
                what: "state",
                index: state,
                size: st.num_states(),
            });
        }
        if action >= st.num_actions() {
            return Err(Error::OutOfRange {
                what: "action",
                index: action,
                size: st.num_actions(),
            });
        }
        Ok(st.pair_index(state, action))
    }

    /// `P(.|x) = prod_i P_i(s[i] | x[Z_i^p])` as a dense vector over joint states.
    pub fn joint_transition(&self, state: usize, action: usize) -> Result<Vec<f64>> {
        let x = self.check_pair(state, action)?;
        Ok(self.joint_transition_of_pair(x))
    }

    pub(crate) fn joint_transition_of_pair(&self, x: usize) -> Vec<f64> {
        let mut dist = Vec::with_capacity(self.structure.num_states());
        dist.push(1.0);
        for (i, f) in self.transitions.iter().enumerate() {
            let row = f.row(self.structure.transition_rows(i)[x]);
            let len = dist.len();
            let mut next = vec![0.0; len * row.len()];
            for (v, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (slot, &d) in next[v * len..(v + 1) * len].iter_mut().zip(&dist) {
                    *slot = d * p;
                }
            }
            dist = next;
        }
        dist
    }

    /// Expected collapsed reward `sum_i mean R_i(x[Z_i^r])`.
    pub fn mean_reward(&self, state: usize, action: usize) -> Result<f64> {
        let x = self.check_pair(state, action)?;
        Ok(self.mean_reward_of_pair(x))
    }

    pub(crate) fn mean_reward_of_pair(&self, x: usize) -> f64 {
        self.rewards
            .iter()
            .enumerate()
            .map(|(i, f)| f.row(self.structure.reward_rows(i)[x]).mean())
            .sum()
    }

    /// Draw the next state factor-by-factor and one reward per reward factor.
    pub fn sample_step<R: Rng + ?Sized>(&self, state: usize, action: usize, rng: &mut R) -> Result<Step> {
        self.check_pair(state, action)?;
        let mut rewards = vec![0.0; self.rewards.len()];
        let (next_state, collapsed) = self.step_into(state, action, rng, &mut rewards);
        Ok(Step {
            next_state,
            rewards,
            collapsed,
        })
    }

    /// Unchecked hot-path variant of [`sample_step`](Self::sample_step).
    #[inline]
    pub fn step_into<R: Rng + ?Sized>(
        &self,
        state: usize,
        action: usize,
        rng: &mut R,
        rewards: &mut [f64],
    ) -> (usize, f64) {
        let st = &*self.structure;
        let x = st.pair_index(state, action);
        let mut next = 0;
        for (i, (f, &stride)) in self
            .transitions
            .iter()
            .zip(st.state_radix().strides())
            .enumerate()
        {
            let row = f.row(st.transition_rows(i)[x]);
            next += sample_categorical(row, rng) * stride;
        }
        let mut collapsed = 0.0;
        for (i, (f, slot)) in self.rewards.iter().zip(rewards.iter_mut()).enumerate() {
            *slot = f.row(st.reward_rows(i)[x]).sample(rng);
            collapsed += *slot;
        }
        (next, collapsed)
    }

    pub fn flatten(&self) -> Result<FlatMdp> {
        let s = self.structure.num_states() as u128;
        let a = self.structure.num_actions() as u128;
        let needed = s * a * s;
        if needed > FLATTEN_LIMIT {
            return Err(Error::Capacity {
                needed,
                limit: FLATTEN_LIMIT,
            });
        }
        let num_pairs = self.structure.num_pairs();
        let mut transitions = Vec::with_capacity(needed as usize);
        let mut rewards = Vec::with_capacity(num_pairs);
        for x in 0..num_pairs {
            transitions.extend(self.joint_transition_of_pair(x));
            rewards.push(self.mean_reward_of_pair(x));
        }
        FlatMdp::new(
            self.structure.num_states(),
            self.structure.num_actions(),
            transitions,
            rewards,
        )
    }
}

/// Inverse-CDF draw from a probability row; never returns a zero-probability index.
#[inline]
pub fn sample_categorical<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    let mut last = 0;
    for (v, &p) in row.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last = v;
            if u < cum {
                return v;
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_bernoulli() -> FactoredMdp {
        let st = FactoredStructure::new(vec![2, 2], vec![1], vec![vec![2], vec![2]], vec![vec![0]]).unwrap();
        FactoredMdp::new(
            st,
            vec![
                TransitionFactor::new(2, vec![vec![0.6, 0.4]]).unwrap(),
                TransitionFactor::new(2, vec![vec![0.3, 0.7]]).unwrap(),
            ],
            vec![RewardFactor::from_means(RewardKind::Constant, &[0.0, 1.0]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn product_arithmetic() {
        let m = two_bernoulli();
        let p = m.joint_transition(0, 0).unwrap();
        // factor 0 is the least significant digit: (0,0), (1,0), (0,1), (1,1)
        let expect = [0.18, 0.12, 0.42, 0.28];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_factor_is_its_row() {
        let st = FactoredStructure::flat(3, 2).unwrap();
        let rows = vec![
            vec![0.2, 0.3, 0.5],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.5],
            vec![0.1, 0.1, 0.8],
            vec![0.0, 0.0, 1.0],
            vec![0.25, 0.5, 0.25],
        ];
        let m = FactoredMdp::new(
            st,
            vec![TransitionFactor::new(3, rows.clone()).unwrap()],
            vec![RewardFactor::from_means(RewardKind::Bernoulli, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap()],
        )
        .unwrap();
        for s in 0..3 {
            for a in 0..2 {
                assert_eq!(m.joint_transition(s, a).unwrap(), rows[s + 3 * a]);
            }
        }
        let flat = m.flatten().unwrap();
        assert_eq!(flat.num_states(), 3);
        assert_eq!(flat.num_actions(), 2);
        assert_eq!(flat.row(2, 1), &rows[5][..]);
        assert_eq!(flat.reward(2, 1), 0.6);
    }

    #[test]
    fn deterministic_factors_step_to_support_point() {
        let st = FactoredStructure::new(vec![3, 2], vec![1], vec![vec![0], vec![1]], vec![vec![0]]).unwrap();
        let m = FactoredMdp::new(
            st,
            vec![
                TransitionFactor::new(3, vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])
                    .unwrap(),
                TransitionFactor::new(2, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            ],
            vec![RewardFactor::from_means(RewardKind::Constant, &[1.0, 1.0, 1.0]).unwrap()],
        )
        .unwrap();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let step = m.sample_step(1 + 3 * 1, 0, &mut rng).unwrap();
            // state (1, 1) -> (0, 0)
            assert_eq!(step.next_state, 0);
            assert_eq!(step.rewards, vec![1.0]);
            assert_eq!(step.collapsed, 1.0);
        }
    }

    #[test]
    fn bernoulli_frequency() {
        let st = FactoredStructure::new(vec![2], vec![1], vec![vec![0]], vec![vec![0]]).unwrap();
        let m = FactoredMdp::new(
            st,
            vec![TransitionFactor::new(2, vec![vec![0.75, 0.25], vec![0.75, 0.25]]).unwrap()],
            vec![RewardFactor::from_means(RewardKind::Bernoulli, &[0.25, 0.25]).unwrap()],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut hits = 0usize;
        let mut reward_hits = 0.0;
        for _ in 0..n {
            let step = m.sample_step(0, 0, &mut rng).unwrap();
            hits += step.next_state;
            reward_hits += step.collapsed;
        }
        let tol = 3.0 * (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - 0.25).abs() <= tol);
        assert!((reward_hits / n as f64 - 0.25).abs() <= tol);
    }

    #[test]
    fn validation_errors() {
        assert!(TransitionFactor::new(2, vec![vec![0.5, 0.6]]).is_err());
        assert!(TransitionFactor::new(2, vec![vec![1.5, -0.5]]).is_err());
        assert!(TransitionFactor::new(2, vec![vec![1.0]]).is_err());
        assert!(RewardDist::new(RewardKind::Bernoulli, 1.2).is_err());
        let st = FactoredStructure::flat(2, 1).unwrap();
        let bad_rows = FactoredMdp::new(
            st.clone(),
            vec![TransitionFactor::new(2, vec![vec![1.0, 0.0]]).unwrap()],
            vec![RewardFactor::from_means(RewardKind::Constant, &[0.0, 0.0]).unwrap()],
        );
        assert!(bad_rows.is_err());
        let m = two_bernoulli();
        assert!(m.joint_transition(4, 0).is_err());
        assert!(m.sample_step(0, 1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn flatten_guard() {
        let st = FactoredStructure::new(vec![5000], vec![5], vec![vec![1]], vec![vec![1]]).unwrap();
        let mut row = vec![0.0; 5000];
        row[0] = 1.0;
        let m = FactoredMdp::new(
            st,
            vec![TransitionFactor::new(5000, vec![row; 5]).unwrap()],
            vec![RewardFactor::from_means(RewardKind::Constant, &[0.0; 5]).unwrap()],
        )
        .unwrap();
        assert!(matches!(m.flatten(), Err(Error::Capacity { .. })));
    }
}
