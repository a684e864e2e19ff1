//! Random model generators for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::fmdp::{FactoredMdp, FactoredStructure, RewardFactor, RewardKind, TransitionFactor};

/// Random probability vector; with `sparsity > 0` each entry is zeroed with
/// that probability (one entry always survives).
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, len: usize, sparsity: f64) -> Vec<f64> {
    let keep = rng.gen_range(0..len);
    let mut w: Vec<f64> = (0..len)
        .map(|k| {
            if k != keep && rng.gen::<f64>() < sparsity {
                0.0
            } else {
                rng.gen_range(0.05..1.0)
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    // push rounding drift onto the kept entry so rows sum to one
    let drift = 1.0 - w.iter().sum::<f64>();
    w[keep] += drift;
    w
}

/// Random factored MDP with every transition factor depending on its own
/// value, a random subset of the other state factors and every action factor.
///
/// Rows have full support, so the model is communicating and aperiodic.
pub fn random_fmdp<R: Rng + ?Sized>(
    rng: &mut R,
    state_sizes: Vec<usize>,
    action_sizes: Vec<usize>,
    num_rewards: usize,
) -> Result<FactoredMdp> {
    let m = state_sizes.len();
    let n = m + action_sizes.len();
    let trans: Vec<Vec<usize>> = (0..m)
        .map(|i| {
            let mut z: Vec<usize> = (0..m).filter(|&j| j == i || rng.gen_bool(0.4)).collect();
            z.extend(m..n);
            z
        })
        .collect();
    let rewards: Vec<Vec<usize>> = (0..num_rewards.max(1))
        .map(|_| {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            let k = rng.gen_range(1..=n.min(3));
            let mut z = all[..k].to_vec();
            z.sort_unstable();
            z
        })
        .collect();
    let st = FactoredStructure::new(state_sizes.clone(), action_sizes, trans, rewards)?;
    let factors = (0..m)
        .map(|i| {
            let rows = (0..st.transition_scope(i).cardinality())
                .map(|_| random_distribution(rng, state_sizes[i], 0.0))
                .collect();
            TransitionFactor::new(state_sizes[i], rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let reward_factors = st
        .reward_scopes()
        .iter()
        .map(|z| {
            let means: Vec<f64> = (0..z.cardinality()).map(|_| rng.gen()).collect();
            RewardFactor::from_means(RewardKind::Bernoulli, &means)
        })
        .collect::<Result<Vec<_>>>()?;
    FactoredMdp::new(st, factors, reward_factors)
}

/// Cartesian product of `bases.len()` random flat MDPs with `(states, actions)` each.
///
/// State factor `b` and action factor `k + b` form base `b`; rows may contain zeros.
pub fn random_product<R: Rng + ?Sized>(rng: &mut R, bases: &[(usize, usize)]) -> Result<FactoredMdp> {
    let k = bases.len();
    let scopes: Vec<Vec<usize>> = (0..k).map(|b| vec![b, k + b]).collect();
    let st = FactoredStructure::new(
        bases.iter().map(|b| b.0).collect(),
        bases.iter().map(|b| b.1).collect(),
        scopes.clone(),
        scopes,
    )?;
    let factors = bases
        .iter()
        .map(|&(s, a)| {
            let rows = (0..s * a).map(|_| random_distribution(rng, s, 0.4)).collect();
            TransitionFactor::new(s, rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let rewards = bases
        .iter()
        .map(|&(s, a)| {
            let means: Vec<f64> = (0..s * a).map(|_| rng.gen()).collect();
            RewardFactor::from_means(RewardKind::Bernoulli, &means)
        })
        .collect::<Result<Vec<_>>>()?;
    FactoredMdp::new(st, factors, rewards)
}
