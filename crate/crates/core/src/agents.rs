//! Optimistic learners sharing one episode loop and differing in their confidence sets.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tracing::debug;

use crate::confidence::{
    beta_prime, bernstein_interval, l1_radius, reward_delta, reward_interval, transition_delta, unbiased_variance,
    Interval, L1Variant, RewardMode,
};
use crate::error::{Error, Result};
use crate::fmdp::FactoredStructure;
use crate::planning::{evi_tables, ConfidenceModel, OptimisticPlan, PlanningTables, DEFAULT_EVI_MAX_ITER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Element-wise Bernstein sets on the factored structure.
    DbnUcrl,
    /// Element-wise Bernstein sets on the flat state-action space.
    Ucrl2b,
    /// Per-factor L1 balls with a union bound over time.
    UcrlFactored,
    /// Per-factor L1 balls with a time-uniform radius.
    UcrlFactoredL,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::DbnUcrl,
        Algorithm::Ucrl2b,
        Algorithm::UcrlFactored,
        Algorithm::UcrlFactoredL,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::DbnUcrl => "dbn-ucrl",
            Algorithm::Ucrl2b => "ucrl2b",
            Algorithm::UcrlFactored => "ucrl-factored",
            Algorithm::UcrlFactoredL => "ucrl-factored-l",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "algorithm",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    pub delta: f64,
    pub reward_mode: RewardMode,
    pub evi_max_iter: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            algorithm: Algorithm::DbnUcrl,
            delta: 0.01,
            reward_mode: RewardMode::Max,
            evi_max_iter: DEFAULT_EVI_MAX_ITER,
        }
    }
}

/// Visit statistics of one scope: counts at the episode start and in-episode increments.
#[derive(Debug, Clone)]
struct RowCounts {
    start: Vec<u64>,
    nu: Vec<u64>,
    dirty: Vec<bool>,
}

impl RowCounts {
    fn new(rows: usize) -> Self {
        RowCounts {
            start: vec![0; rows],
            nu: vec![0; rows],
            dirty: vec![true; rows],
        }
    }

    /// Records a visit; true once `nu` reaches `max(start, 1)`.
    #[inline]
    fn visit(&mut self, row: usize) -> bool {
        self.nu[row] += 1;
        self.nu[row] >= self.start[row].max(1)
    }

    fn fold(&mut self) {
        for ((s, n), d) in self.start.iter_mut().zip(&mut self.nu).zip(&mut self.dirty) {
            if *n > 0 {
                *s += *n;
                *n = 0;
                *d = true;
            }
        }
    }

    fn total(&self, row: usize) -> u64 {
        self.start[row] + self.nu[row]
    }
}

#[derive(Debug, Clone)]
struct TransitionStats {
    num_values: usize,
    rows: RowCounts,
    /// `next[row * S_i + y]`.
    next: Vec<u64>,
    bounds: Vec<Interval>,
}

#[derive(Debug, Clone)]
struct RewardStats {
    rows: RowCounts,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    bounds: Vec<Interval>,
}

pub struct Agent {
    config: AgentConfig,
    env_structure: Arc<FactoredStructure>,
    structure: Arc<FactoredStructure>,
    reward_scale: f64,
    transitions: Vec<TransitionStats>,
    rewards: Vec<RewardStats>,
    time: u64,
    episode_start: u64,
    episodes: u64,
    plan: OptimisticPlan,
    model: ConfidenceModel,
    planning_time: Duration,
}

impl Agent {
    /// Builds the agent for a known structure and plans the first episode at `t = 1`.
    pub fn new(env_structure: Arc<FactoredStructure>, config: AgentConfig) -> Result<Self> {
        if !(config.delta > 0.0 && config.delta < 1.0) {
            return Err(Error::Parameter(format!("delta {} outside (0,1)", config.delta)));
        }
        let (structure, reward_scale) = match config.algorithm {
            Algorithm::Ucrl2b => (
                Arc::new(FactoredStructure::flat(env_structure.num_states(), env_structure.num_actions())?),
                env_structure.num_reward_factors() as f64,
            ),
            _ => (Arc::clone(&env_structure), 1.0),
        };
        let transitions = structure
            .transition_scopes()
            .iter()
            .zip(structure.state_factor_sizes())
            .map(|(z, &s)| TransitionStats {
                num_values: s,
                rows: RowCounts::new(z.cardinality()),
                next: vec![0; z.cardinality() * s],
                bounds: vec![Interval::UNIT; z.cardinality() * s],
            })
            .collect();
        let rewards = structure
            .reward_scopes()
            .iter()
            .map(|z| RewardStats {
                rows: RowCounts::new(z.cardinality()),
                sum: vec![0.0; z.cardinality()],
                sum_sq: vec![0.0; z.cardinality()],
                bounds: vec![Interval::UNIT; z.cardinality()],
            })
            .collect();
        let placeholder = OptimisticPlan {
            policy: vec![0; structure.num_states()],
            gain: 0.0,
            values: vec![0.0; structure.num_states()],
            iterations: 0,
            epsilon: 1.0,
            span: 0.0,
        };
        let model = ConfidenceModel::vacuous(Arc::clone(&structure));
        let mut agent = Agent {
            config,
            env_structure,
            structure,
            reward_scale,
            transitions,
            rewards,
            time: 1,
            episode_start: 1,
            episodes: 0,
            plan: placeholder,
            model,
            planning_time: Duration::ZERO,
        };
        agent.start_episode()?;
        Ok(agent)
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    /// Current time `t`: the index of the next step.
    pub fn time(&self) -> u64 {
        self.time
    }

    /// Number of episodes started so far, `K`.
    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn episode_start(&self) -> u64 {
        self.episode_start
    }

    pub fn plan(&self) -> &OptimisticPlan {
        &self.plan
    }

    pub fn confidence_model(&self) -> &ConfidenceModel {
        &self.model
    }

    /// Structure the statistics are kept on (flat for UCRL2B).
    pub fn learning_structure(&self) -> &FactoredStructure {
        &self.structure
    }

    /// Wall time spent building confidence models and running EVI.
    pub fn planning_time(&self) -> Duration {
        self.planning_time
    }

    /// Total visit counts of the rows of transition factor `i`.
    pub fn transition_counts(&self, i: usize) -> Vec<u64> {
        let rows = &self.transitions[i].rows;
        (0..rows.start.len()).map(|r| rows.total(r)).collect()
    }

    pub fn reward_counts(&self, i: usize) -> Vec<u64> {
        let rows = &self.rewards[i].rows;
        (0..rows.start.len()).map(|r| rows.total(r)).collect()
    }

    #[inline]
    pub fn act(&self, state: usize) -> usize {
        self.plan.policy[state]
    }

    /// Records the transition `(s, a, r, s')`; returns true when it closed the
    /// episode and a new policy was computed.
    pub fn observe(&mut self, state: usize, action: usize, rewards: &[f64], next_state: usize) -> Result<bool> {
        let st = &*self.structure;
        let x = st.pair_index(state, action);
        let mut done = false;
        for (i, (f, &stride)) in self.transitions.iter_mut().zip(st.state_radix().strides()).enumerate() {
            let row = st.transition_rows(i)[x];
            let y = (next_state / stride) % f.num_values;
            f.next[row * f.num_values + y] += 1;
            done |= f.rows.visit(row);
        }
        if self.config.algorithm == Algorithm::Ucrl2b {
            let r = rewards.iter().sum::<f64>() / self.reward_scale;
            done |= record_reward(&mut self.rewards[0], st.reward_rows(0)[x], r);
        } else {
            if rewards.len() != self.rewards.len() {
                return Err(Error::Parameter(format!(
                    "{} reward components for {} reward factors",
                    rewards.len(),
                    self.rewards.len()
                )));
            }
            for (i, (f, &r)) in self.rewards.iter_mut().zip(rewards).enumerate() {
                done |= record_reward(f, st.reward_rows(i)[x], r);
            }
        }
        self.time += 1;
        if done {
            self.start_episode()?;
        }
        Ok(done)
    }

    fn start_episode(&mut self) -> Result<()> {
        let clock = Instant::now();
        for f in &mut self.transitions {
            f.rows.fold();
        }
        for f in &mut self.rewards {
            f.rows.fold();
        }
        self.episodes += 1;
        self.episode_start = self.time;
        self.model = self.build_confidence_model()?;
        let epsilon = 1.0 / (self.time as f64).sqrt();
        let tables = PlanningTables::new(&self.model);
        self.plan = evi_tables(&tables, epsilon, self.config.evi_max_iter)?;
        self.planning_time += clock.elapsed();
        debug!(
            algorithm = %self.config.algorithm,
            episode = self.episodes,
            t = self.time,
            gain = self.plan.gain,
            iterations = self.plan.iterations,
            "episode start"
        );
        Ok(())
    }

    /// Refreshes the cached bounds of rows whose counts changed and assembles the model.
    fn build_confidence_model(&mut self) -> Result<ConfidenceModel> {
        let st = Arc::clone(&self.structure);
        let delta = self.config.delta;
        let m = st.num_state_factors();
        let l = st.num_reward_factors();
        let t = self.time;
        let alg = self.config.algorithm;
        for f in &mut self.transitions {
            let num_rows = f.rows.start.len();
            let s = f.num_values;
            let refresh_all = alg == Algorithm::UcrlFactored;
            for row in 0..num_rows {
                if !(f.rows.dirty[row] || refresh_all) {
                    continue;
                }
                f.rows.dirty[row] = false;
                let n = f.rows.start[row].max(1);
                let counts = &f.next[row * s..(row + 1) * s];
                let out = &mut f.bounds[row * s..(row + 1) * s];
                match alg {
                    Algorithm::DbnUcrl | Algorithm::Ucrl2b => {
                        let d = transition_delta(delta, m, s, num_rows);
                        for (b, &c) in out.iter_mut().zip(counts) {
                            *b = bernstein_interval(c as f64 / n as f64, n, d)?;
                        }
                    }
                    Algorithm::UcrlFactored | Algorithm::UcrlFactoredL => {
                        let d = delta / (3.0 * m as f64 * num_rows as f64);
                        let variant = if alg == Algorithm::UcrlFactored {
                            L1Variant::WeissmanUnion { t }
                        } else {
                            L1Variant::Laplace
                        };
                        let w = l1_radius(n, s, d, variant)?;
                        for (b, &c) in out.iter_mut().zip(counts) {
                            *b = Interval::around(c as f64 / n as f64, w);
                        }
                    }
                }
            }
        }
        for f in &mut self.rewards {
            let num_rows = f.rows.start.len();
            let d = reward_delta(delta, l, num_rows);
            for row in 0..num_rows {
                if !f.rows.dirty[row] {
                    continue;
                }
                f.rows.dirty[row] = false;
                let raw = f.rows.start[row];
                let n = raw.max(1);
                let mean = (f.sum[row] / n as f64).clamp(0.0, 1.0);
                f.bounds[row] = match alg {
                    Algorithm::DbnUcrl | Algorithm::Ucrl2b => {
                        let var = unbiased_variance(f.sum[row], f.sum_sq[row], raw).min(0.25);
                        reward_interval(mean, var, n, d, self.config.reward_mode)?
                    }
                    Algorithm::UcrlFactored | Algorithm::UcrlFactoredL => {
                        Interval::around(mean, 0.5 * beta_prime(n, d)?)
                    }
                };
            }
        }
        Ok(ConfidenceModel::new(
            st,
            self.transitions.iter().map(|f| f.bounds.clone()).collect(),
            self.rewards.iter().map(|f| f.bounds.clone()).collect(),
            t,
        )?
        .with_reward_scale(self.reward_scale))
    }

    /// Structure of the environment the agent was built for.
    pub fn env_structure(&self) -> &FactoredStructure {
        &self.env_structure
    }
}

#[inline]
fn record_reward(f: &mut RewardStats, row: usize, r: f64) -> bool {
    f.sum[row] += r;
    f.sum_sq[row] += r * r;
    f.rows.visit(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{make_env, random::random_fmdp};
    use crate::fmdp::{FactoredMdp, RewardFactor, RewardKind, TransitionFactor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use serde_json::Value;

    fn config(algorithm: Algorithm) -> AgentConfig {
        AgentConfig {
            algorithm,
            ..AgentConfig::default()
        }
    }

    fn run(mdp: &FactoredMdp, alg: Algorithm, steps: usize, seed: u64) -> (Agent, Vec<usize>, Vec<u64>) {
        let mut agent = Agent::new(mdp.shared_structure(), config(alg)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = 0;
        let mut actions = Vec::new();
        let mut starts = Vec::new();
        let mut r = vec![0.0; mdp.structure().num_reward_factors()];
        for _ in 0..steps {
            let a = agent.act(s);
            actions.push(a);
            let (next, _) = mdp.step_into(s, a, &mut rng, &mut r);
            if agent.observe(s, a, &r, next).unwrap() {
                starts.push(agent.time());
            }
            s = next;
        }
        (agent, actions, starts)
    }

    #[test]
    fn tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.tag().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_value(a).unwrap(), Value::String(a.tag().into()));
        }
        assert!("ucrl3".parse::<Algorithm>().is_err());
    }

    #[test]
    fn single_action_model() {
        let st = FactoredStructure::flat(2, 1).unwrap();
        let m = FactoredMdp::new(
            st,
            vec![TransitionFactor::new(2, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()],
            vec![RewardFactor::from_means(RewardKind::Bernoulli, &[0.2, 0.8]).unwrap()],
        )
        .unwrap();
        let (_, actions, _) = run(&m, Algorithm::DbnUcrl, 50, 1);
        assert!(actions.iter().all(|&a| a == 0));
    }

    #[test]
    fn first_episode_has_length_one() {
        let env = make_env("riverswim-product", &Value::Null).unwrap();
        for alg in Algorithm::ALL {
            let (_, _, starts) = run(&env.mdp, alg, 1, 3);
            assert_eq!(starts, vec![2], "{alg}");
        }
    }

    #[test]
    fn counts_are_conserved() {
        let env = make_env("coffee", &Value::Null).unwrap();
        for alg in Algorithm::ALL {
            let (agent, _, _) = run(&env.mdp, alg, 700, 5);
            let t = agent.time();
            for i in 0..agent.learning_structure().num_state_factors() {
                assert_eq!(agent.transition_counts(i).iter().sum::<u64>(), t - 1);
            }
            for i in 0..agent.learning_structure().num_reward_factors() {
                assert_eq!(agent.reward_counts(i).iter().sum::<u64>(), t - 1);
            }
        }
    }

    #[test]
    fn identical_streams_give_identical_actions() {
        let env = make_env("riverswim-product", &Value::Null).unwrap();
        let (_, a1, s1) = run(&env.mdp, Algorithm::DbnUcrl, 2000, 9);
        let (_, a2, s2) = run(&env.mdp, Algorithm::DbnUcrl, 2000, 9);
        assert_eq!(a1, a2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn factored_agents_share_episode_boundaries_on_a_fixed_trajectory() {
        let env = make_env("sysadmin-3leg", &Value::Null).unwrap();
        let m = &env.mdp;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut agents: Vec<Agent> = [Algorithm::DbnUcrl, Algorithm::UcrlFactored, Algorithm::UcrlFactoredL]
            .into_iter()
            .map(|a| Agent::new(m.shared_structure(), config(a)).unwrap())
            .collect();
        let mut s = env.initial_state;
        let mut r = vec![0.0; m.structure().num_reward_factors()];
        for _ in 0..3000 {
            let a = rand::Rng::gen_range(&mut rng, 0..m.structure().num_actions());
            let (next, _) = m.step_into(s, a, &mut rng, &mut r);
            let ends: Vec<bool> = agents.iter_mut().map(|ag| ag.observe(s, a, &r, next).unwrap()).collect();
            assert!(ends.iter().all(|&e| e == ends[0]));
            s = next;
        }
        assert!(agents.iter().all(|a| a.episodes() == agents[0].episodes()));
    }

    #[test]
    fn flat_bernstein_agents_agree_on_flat_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let st = FactoredStructure::flat(3, 2).unwrap();
        let rows = (0..6).map(|_| crate::environments::random::random_distribution(&mut rng, 3, 0.0)).collect();
        let m = FactoredMdp::new(
            st,
            vec![TransitionFactor::new(3, rows).unwrap()],
            vec![RewardFactor::from_means(RewardKind::Bernoulli, &[0.1, 0.5, 0.9, 0.3, 0.7, 0.2]).unwrap()],
        )
        .unwrap();
        let (a, _, _) = run(&m, Algorithm::DbnUcrl, 500, 4);
        let (b, _, _) = run(&m, Algorithm::Ucrl2b, 500, 4);
        assert_eq!(a.confidence_model(), b.confidence_model());
        assert_eq!(a.plan(), b.plan());
    }

    #[test]
    fn bernstein_sets_tighter_than_laplace_boxes_after_many_visits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_fmdp(&mut rng, vec![3], vec![1], 1).unwrap();
        // one state-action row: repeat its visits directly
        let mut dbn = Agent::new(m.shared_structure(), config(Algorithm::DbnUcrl)).unwrap();
        let mut lap = Agent::new(m.shared_structure(), config(Algorithm::UcrlFactoredL)).unwrap();
        let row = m.transition_factors()[0].row(m.structure().transition_rows(0)[0]).to_vec();
        let r = [0.0];
        for _ in 0..10_000 {
            let y = crate::fmdp::sample_categorical(&row, &mut rng);
            dbn.observe(0, 0, &r, y).unwrap();
            lap.observe(0, 0, &r, y).unwrap();
        }
        // flush pending counts into a fresh episode
        dbn.start_episode().unwrap();
        lap.start_episode().unwrap();
        let x = m.structure().transition_rows(0)[0];
        let b1 = dbn.confidence_model().transition_row(0, x).to_vec();
        let b2 = lap.confidence_model().transition_row(0, x).to_vec();
        for (a, b) in b1.iter().zip(&b2) {
            assert!(a.width() <= b.width(), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn rejects_bad_delta() {
        let env = make_env("riverswim", &Value::Null).unwrap();
        let cfg = AgentConfig {
            delta: 1.0,
            ..AgentConfig::default()
        };
        assert!(Agent::new(env.mdp.shared_structure(), cfg).is_err());
    }
}
