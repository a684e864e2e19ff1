use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;

/// Tabular MDP with dense rows and a sparse copy of each row for fast sweeps.
///
/// Pairs are indexed `s + S * a`, matching [`FactoredStructure::pair_index`](super::FactoredStructure::pair_index).
#[derive(Debug, Clone)]
pub struct FlatMdp {
    num_states: usize,
    num_actions: usize,
    transitions: Vec<f64>,
    rewards: Vec<f64>,
    sparse_start: Vec<usize>,
    sparse_next: Vec<u32>,
    sparse_prob: Vec<f64>,
}

impl FlatMdp {
    pub fn new(num_states: usize, num_actions: usize, transitions: Vec<f64>, rewards: Vec<f64>) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::Model("flat MDP needs at least one state and action".into()));
        }
        if num_states > u32::MAX as usize {
            return Err(Error::Capacity {
                needed: num_states as u128,
                limit: u32::MAX as u128,
            });
        }
        let pairs = num_states * num_actions;
        if transitions.len() != pairs * num_states || rewards.len() != pairs {
            return Err(Error::Model(format!(
                "flat tables have {} transition and {} reward entries for S={num_states}, A={num_actions}",
                transitions.len(),
                rewards.len()
            )));
        }
        if rewards.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Model("mean rewards must be finite and nonnegative".into()));
        }
        let mut sparse_start = Vec::with_capacity(pairs + 1);
        let mut sparse_next = Vec::new();
        let mut sparse_prob = Vec::new();
        sparse_start.push(0);
        for (x, row) in transitions.chunks(num_states).enumerate() {
            let mut sum = 0.0;
            for (y, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Model(format!("pair {x} has probability {p}")));
                }
                if p > 0.0 {
                    sparse_next.push(y as u32);
                    sparse_prob.push(p);
                    sum += p;
                }
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL.max(num_states as f64 * f64::EPSILON) {
                return Err(Error::Model(format!("pair {x} row sums to {sum}")));
            }
            sparse_start.push(sparse_next.len());
        }
        Ok(FlatMdp {
            num_states,
            num_actions,
            transitions,
            rewards,
            sparse_start,
            sparse_next,
            sparse_prob,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn pair(&self, s: usize, a: usize) -> usize {
        s + self.num_states * a
    }

    #[inline]
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let x = self.pair(s, a);
        &self.transitions[x * self.num_states..(x + 1) * self.num_states]
    }

    /// Nonzero entries of `P(.|s,a)` as `(next states, probabilities)`.
    #[inline]
    pub fn sparse_row(&self, s: usize, a: usize) -> (&[u32], &[f64]) {
        let x = self.pair(s, a);
        let (lo, hi) = (self.sparse_start[x], self.sparse_start[x + 1]);
        (&self.sparse_next[lo..hi], &self.sparse_prob[lo..hi])
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[self.pair(s, a)]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Same dynamics with every mean reward shifted by `c`.
    pub fn with_reward_offset(&self, c: f64) -> Result<Self> {
        FlatMdp::new(
            self.num_states,
            self.num_actions,
            self.transitions.clone(),
            self.rewards.iter().map(|r| r + c).collect(),
        )
    }

    /// `sum_y P(y|s,a) v(y)`.
    #[inline]
    pub fn expect(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        let (next, prob) = self.sparse_row(s, a);
        next.iter().zip(prob).map(|(&y, &p)| p * v[y as usize]).sum()
    }
}
