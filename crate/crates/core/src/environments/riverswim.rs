use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::{FactoredMdp, FactoredStructure, RewardFactor, RewardKind, TransitionFactor};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// One RiverSwim chain. `Left` always moves one step left; `Right` fights the current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiverSwimParams {
    pub chain_length: usize,
    /// `Right` from an interior state: move right / stay / move left.
    pub right_forward: f64,
    pub right_stay: f64,
    pub right_back: f64,
    /// `Right` from the leftmost state moves right with this probability, else stays.
    pub start_forward: f64,
    /// `Right` from the rightmost state moves left with this probability, else stays.
    pub end_back: f64,
    /// Bernoulli mean of `Left` at the leftmost state.
    pub low_reward: f64,
    /// Bernoulli mean of `Right` at the rightmost state.
    pub high_reward: f64,
}

impl Default for RiverSwimParams {
    fn default() -> Self {
        RiverSwimParams {
            chain_length: 6,
            right_forward: 0.35,
            right_stay: 0.6,
            right_back: 0.05,
            start_forward: 0.6,
            end_back: 0.4,
            low_reward: 0.005,
            high_reward: 1.0,
        }
    }
}

impl RiverSwimParams {
    fn validate(&self) -> Result<()> {
        if self.chain_length < 2 {
            return Err(Error::Parameter("RiverSwim needs at least 2 states".into()));
        }
        let sum = self.right_forward + self.right_stay + self.right_back;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("interior Right probabilities sum to {sum}")));
        }
        for p in [self.start_forward, self.end_back, self.low_reward, self.high_reward] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("RiverSwim probability {p} outside [0,1]")));
            }
        }
        Ok(())
    }

    /// Rows indexed `s + L * a` over next positions.
    pub(crate) fn transition_rows(&self) -> Vec<Vec<f64>> {
        let n = self.chain_length;
        let mut rows = Vec::with_capacity(2 * n);
        for s in 0..n {
            let mut r = vec![0.0; n];
            r[s.saturating_sub(1)] = 1.0;
            rows.push(r);
        }
        for s in 0..n {
            let mut r = vec![0.0; n];
            if s == 0 {
                r[1] += self.start_forward;
                r[0] += 1.0 - self.start_forward;
            } else if s == n - 1 {
                r[s - 1] += self.end_back;
                r[s] += 1.0 - self.end_back;
            } else {
                r[s + 1] += self.right_forward;
                r[s] += self.right_stay;
                r[s - 1] += self.right_back;
            }
            rows.push(r);
        }
        rows
    }

    pub(crate) fn reward_means(&self) -> Vec<f64> {
        let n = self.chain_length;
        let mut means = vec![0.0; 2 * n];
        means[LEFT * n] = self.low_reward;
        means[(n - 1) + n * RIGHT] = self.high_reward;
        means
    }
}

/// Single chain: one state factor, one action factor, one reward factor over both.
pub fn riverswim(params: &RiverSwimParams) -> Result<FactoredMdp> {
    params.validate()?;
    let n = params.chain_length;
    FactoredMdp::new(
        FactoredStructure::flat(n, 2)?,
        vec![TransitionFactor::new(n, params.transition_rows())?],
        vec![RewardFactor::from_means(RewardKind::Bernoulli, &params.reward_means())?],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiverSwimProductParams {
    pub chain: RiverSwimParams,
    /// Bernoulli mean paid when both chains sit at their rightmost state.
    pub coupling_reward: f64,
}

impl Default for RiverSwimProductParams {
    fn default() -> Self {
        RiverSwimProductParams {
            chain: RiverSwimParams::default(),
            coupling_reward: 1.0,
        }
    }
}

/// Two independent chains (state factors 0, 1; action factors 2, 3) with a
/// third reward factor over both positions.
pub fn riverswim_product(params: &RiverSwimProductParams) -> Result<FactoredMdp> {
    params.chain.validate()?;
    if !(0.0..=1.0).contains(&params.coupling_reward) {
        return Err(Error::Parameter("coupling reward outside [0,1]".into()));
    }
    let n = params.chain.chain_length;
    let st = FactoredStructure::new(
        vec![n, n],
        vec![2, 2],
        vec![vec![0, 2], vec![1, 3]],
        vec![vec![0, 2], vec![1, 3], vec![0, 1]],
    )?;
    let rows = params.chain.transition_rows();
    let own = params.chain.reward_means();
    let mut coupling = vec![0.0; n * n];
    coupling[(n - 1) + n * (n - 1)] = params.coupling_reward;
    FactoredMdp::new(
        st,
        vec![TransitionFactor::new(n, rows.clone())?, TransitionFactor::new(n, rows)?],
        vec![
            RewardFactor::from_means(RewardKind::Bernoulli, &own)?,
            RewardFactor::from_means(RewardKind::Bernoulli, &own)?,
            RewardFactor::from_means(RewardKind::Bernoulli, &coupling)?,
        ],
    )
}
