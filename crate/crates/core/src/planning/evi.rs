use super::inner::{descending_order, inner_value};
use super::model::ConfidenceModel;
use crate::error::{Error, Result};

pub const DEFAULT_EVI_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticPlan {
    pub policy: Vec<usize>,
    pub gain: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    pub epsilon: f64,
    pub span: f64,
}

/// Joint bound products for every pair, computed once per plan.
pub struct PlanningTables {
    num_states: usize,
    num_actions: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    lo_sum: Vec<f64>,
    reward: Vec<f64>,
}

impl PlanningTables {
    pub fn new(model: &ConfidenceModel) -> Self {
        let st = model.structure();
        let (ns, na) = (st.num_states(), st.num_actions());
        let pairs = st.num_pairs();
        let mut lo = Vec::with_capacity(pairs * ns);
        let mut hi = Vec::with_capacity(pairs * ns);
        let mut lo_sum = Vec::with_capacity(pairs);
        let mut reward = Vec::with_capacity(pairs);
        let (mut l, mut h) = (Vec::with_capacity(ns), Vec::with_capacity(ns));
        for x in 0..pairs {
            model.joint_bounds_into(x, &mut l, &mut h);
            lo_sum.push(l.iter().sum());
            lo.extend_from_slice(&l);
            hi.extend_from_slice(&h);
            reward.push(model.optimistic_reward(x));
        }
        PlanningTables {
            num_states: ns,
            num_actions: na,
            lo,
            hi,
            lo_sum,
            reward,
        }
    }

    #[inline]
    fn row(&self, x: usize) -> (&[f64], &[f64]) {
        let r = x * self.num_states..(x + 1) * self.num_states;
        (&self.lo[r.clone()], &self.hi[r])
    }
}

/// Extended value iteration over the set of models allowed by `model`.
pub fn evi(model: &ConfidenceModel, epsilon: f64, max_iter: usize) -> Result<OptimisticPlan> {
    evi_tables(&PlanningTables::new(model), epsilon, max_iter)
}

pub fn evi_tables(t: &PlanningTables, epsilon: f64, max_iter: usize) -> Result<OptimisticPlan> {
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("EVI accuracy {epsilon} must be positive")));
    }
    let (ns, na) = (t.num_states, t.num_actions);
    let mut u = vec![0.0; ns];
    let mut next = vec![0.0; ns];
    let mut policy = vec![0; ns];
    let mut span = f64::INFINITY;
    for iter in 1..=max_iter {
        let order = descending_order(&u);
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for a in 0..na {
                let x = s + ns * a;
                let (lo, hi) = t.row(x);
                let lo_dot: f64 = lo.iter().zip(&u).map(|(l, v)| l * v).sum();
                let v = t.reward[x] + inner_value(&order, &u, lo, hi, t.lo_sum[x], lo_dot);
                if v > best {
                    best = v;
                    arg = a;
                }
            }
            next[s] = best;
            policy[s] = arg;
        }
        let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for (n, o) in next.iter().zip(&u) {
            let d = n - o;
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        span = dmax - dmin;
        let floor = next.iter().copied().fold(f64::INFINITY, f64::min);
        for (o, n) in u.iter_mut().zip(&next) {
            *o = n - floor;
        }
        if span <= epsilon {
            return Ok(OptimisticPlan {
                policy,
                gain: 0.5 * (dmax + dmin),
                values: u,
                iterations: iter,
                epsilon,
                span,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        span,
        tolerance: epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::random::random_fmdp;
    use crate::fmdp::{FactoredMdp, FactoredStructure, RewardFactor, RewardKind, TransitionFactor};
    use crate::oracles::{average_reward_vi, DEFAULT_MAX_ITER};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn swap_factor() -> TransitionFactor {
        // rows s + 2a: stay, stay, swap, swap
        TransitionFactor::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn swap_model() -> FactoredMdp {
        let st = FactoredStructure::new(vec![2], vec![2], vec![vec![0, 1]], vec![vec![0]]).unwrap();
        let r = RewardFactor::from_means(RewardKind::Constant, &[0.0, 1.0]).unwrap();
        FactoredMdp::new(st, vec![swap_factor()], vec![r]).unwrap()
    }

    #[test]
    fn exact_swap_model() {
        let m = swap_model();
        let plan = evi(&ConfidenceModel::exact(&m), 1e-6, DEFAULT_EVI_MAX_ITER).unwrap();
        assert!((plan.gain - 1.0).abs() <= 1e-6);
        assert_eq!(plan.policy, vec![1, 0]);
        let oracle = average_reward_vi(&m.flatten().unwrap(), 1e-10, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(plan.policy, oracle.policy);
    }

    #[test]
    fn product_of_swaps_adds_gains() {
        let st = FactoredStructure::new(vec![2, 2], vec![2, 2], vec![vec![0, 2], vec![1, 3]], vec![vec![0], vec![1]])
            .unwrap();
        let r = RewardFactor::from_means(RewardKind::Constant, &[0.0, 1.0]).unwrap();
        let m = FactoredMdp::new(st, vec![swap_factor(), swap_factor()], vec![r.clone(), r]).unwrap();
        let plan = evi(&ConfidenceModel::exact(&m), 1e-6, DEFAULT_EVI_MAX_ITER).unwrap();
        assert!((plan.gain - 2.0).abs() <= 2e-6);
    }

    #[test]
    fn vacuous_model_is_maximally_optimistic() {
        let m = swap_model();
        let plan = evi(&ConfidenceModel::vacuous(m.shared_structure()), 1e-6, DEFAULT_EVI_MAX_ITER).unwrap();
        assert!((plan.gain - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn rejects_bad_accuracy() {
        assert!(evi(&ConfidenceModel::exact(&swap_model()), 0.0, 10).is_err());
    }

    #[test]
    fn optimism_widening_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eps = 1e-6;
        for _ in 0..10 {
            let m_sizes: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(2..=3)).collect();
            let m = random_fmdp(&mut rng, m_sizes, vec![2], 2).unwrap();
            let g_star = average_reward_vi(&m.flatten().unwrap(), 1e-10, DEFAULT_MAX_ITER).unwrap().gain;
            let mut last = f64::NEG_INFINITY;
            for pad in [0.0, 0.02, 0.1, 0.3] {
                let cm = ConfidenceModel::around(&m, pad, pad);
                assert!(cm.brackets(&m));
                let plan = evi(&cm, eps, DEFAULT_EVI_MAX_ITER).unwrap();
                assert!(plan.gain + eps >= g_star, "g_k {} < g* {g_star}", plan.gain);
                assert!(plan.gain + 2.0 * eps >= last);
                last = plan.gain;
                assert_eq!(plan, evi(&cm, eps, DEFAULT_EVI_MAX_ITER).unwrap());
            }
        }
    }
}
