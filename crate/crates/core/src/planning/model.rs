use std::sync::Arc;

use crate::confidence::Interval;
use crate::error::{Error, Result};
use crate::fmdp::{FactoredMdp, FactoredStructure};

/// Element-wise bounds on every transition factor row and reward mean at an episode start.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceModel {
    structure: Arc<FactoredStructure>,
    /// `transitions[i][row * S_i + y]`.
    transitions: Vec<Vec<Interval>>,
    /// `rewards[i][row]`.
    rewards: Vec<Vec<Interval>>,
    time: u64,
    reward_scale: f64,
}

impl ConfidenceModel {
    pub fn new(
        structure: Arc<FactoredStructure>,
        transitions: Vec<Vec<Interval>>,
        rewards: Vec<Vec<Interval>>,
        time: u64,
    ) -> Result<Self> {
        if transitions.len() != structure.num_state_factors() || rewards.len() != structure.num_reward_factors() {
            return Err(Error::Model("confidence model factor counts do not match the structure".into()));
        }
        for (i, t) in transitions.iter().enumerate() {
            let expect = structure.transition_scope(i).cardinality() * structure.state_factor_sizes()[i];
            if t.len() != expect {
                return Err(Error::Model(format!(
                    "transition factor {i} has {} bounds, expected {expect}",
                    t.len()
                )));
            }
        }
        for (i, r) in rewards.iter().enumerate() {
            if r.len() != structure.reward_scope(i).cardinality() {
                return Err(Error::Model(format!("reward factor {i} has {} bounds", r.len())));
            }
        }
        let bad = |iv: &Interval| !(0.0 <= iv.lo && iv.lo <= iv.hi && iv.hi <= 1.0);
        if transitions.iter().chain(&rewards).flatten().any(bad) {
            return Err(Error::Model("bounds must satisfy 0 <= lo <= hi <= 1".into()));
        }
        Ok(ConfidenceModel {
            structure,
            transitions,
            rewards,
            time,
            reward_scale: 1.0,
        })
    }

    /// Every bound `[0, 1]`.
    pub fn vacuous(structure: Arc<FactoredStructure>) -> Self {
        let transitions = (0..structure.num_state_factors())
            .map(|i| vec![Interval::UNIT; structure.transition_scope(i).cardinality() * structure.state_factor_sizes()[i]])
            .collect();
        let rewards = structure
            .reward_scopes()
            .iter()
            .map(|z| vec![Interval::UNIT; z.cardinality()])
            .collect();
        ConfidenceModel {
            structure,
            transitions,
            rewards,
            time: 1,
            reward_scale: 1.0,
        }
    }

    /// Point intervals at the true parameters.
    pub fn exact(m: &FactoredMdp) -> Self {
        Self::around(m, 0.0, 0.0)
    }

    /// True parameters widened by `transition_pad` and `reward_pad` on each side, clipped to `[0,1]`.
    pub fn around(m: &FactoredMdp, transition_pad: f64, reward_pad: f64) -> Self {
        let transitions = m
            .transition_factors()
            .iter()
            .map(|f| f.rows().flatten().map(|&p| Interval::around(p, transition_pad)).collect())
            .collect();
        let rewards = m
            .reward_factors()
            .iter()
            .map(|f| f.rows().iter().map(|r| Interval::around(r.mean(), reward_pad)).collect())
            .collect();
        ConfidenceModel {
            structure: m.shared_structure(),
            transitions,
            rewards,
            time: 1,
            reward_scale: 1.0,
        }
    }

    /// Multiply every reward bound by `scale` when planning (rewards observed as `r / scale`).
    pub fn with_reward_scale(mut self, scale: f64) -> Self {
        self.reward_scale = scale;
        self
    }

    pub fn reward_scale(&self) -> f64 {
        self.reward_scale
    }

    pub fn structure(&self) -> &FactoredStructure {
        &self.structure
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Bounds over the values of factor `i` for scope row `row`.
    pub fn transition_row(&self, i: usize, row: usize) -> &[Interval] {
        let s = self.structure.state_factor_sizes()[i];
        &self.transitions[i][row * s..(row + 1) * s]
    }

    pub fn transition_bounds(&self, i: usize) -> &[Interval] {
        &self.transitions[i]
    }

    pub fn reward_bounds(&self, i: usize) -> &[Interval] {
        &self.rewards[i]
    }

    /// Whether every true parameter of `m` lies inside its interval.
    pub fn brackets(&self, m: &FactoredMdp) -> bool {
        let trans = m
            .transition_factors()
            .iter()
            .zip(&self.transitions)
            .all(|(f, b)| f.rows().flatten().zip(b).all(|(&p, iv)| iv.contains(p)));
        let rew = m
            .reward_factors()
            .iter()
            .zip(&self.rewards)
            .all(|(f, b)| f.rows().iter().zip(b).all(|(r, iv)| iv.contains(r.mean())));
        trans && rew
    }

    /// Entry-wise lower and upper products over joint next states for pair `x`.
    pub fn joint_bounds_into(&self, x: usize, lo: &mut Vec<f64>, hi: &mut Vec<f64>) {
        lo.clear();
        hi.clear();
        lo.push(1.0);
        hi.push(1.0);
        for i in 0..self.structure.num_state_factors() {
            let row = self.transition_row(i, self.structure.transition_rows(i)[x]);
            let len = lo.len();
            for iv in &row[1..] {
                for k in 0..len {
                    let (l, h) = (lo[k], hi[k]);
                    lo.push(l * iv.lo);
                    hi.push(h * iv.hi);
                }
            }
            for k in 0..len {
                lo[k] *= row[0].lo;
                hi[k] *= row[0].hi;
            }
        }
    }

    /// `mu+(x) = sum_i hi` of reward factor `i` at `x[Z_i^r]`, times the reward scale.
    pub fn optimistic_reward(&self, x: usize) -> f64 {
        self.reward_scale
            * self
                .rewards
                .iter()
                .enumerate()
                .map(|(i, r)| r[self.structure.reward_rows(i)[x]].hi)
                .sum::<f64>()
    }
}
