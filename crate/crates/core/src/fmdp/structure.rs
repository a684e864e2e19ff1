use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::codec::Radix;
use crate::error::{Error, Result};

/// A sorted, duplicate-free, nonempty subset of the state-action factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    indices: Vec<usize>,
    radix: Radix,
    state_radix: Radix,
    action_radix: Radix,
}

/// A scoped value: the component tuple and its mixed-radix index within `X[Z]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub values: Vec<usize>,
    pub index: usize,
}

impl Scope {
    fn new(indices: Vec<usize>, factor_sizes: &[usize], num_state_factors: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Structure("scopes must be nonempty".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Structure(format!(
                "scope {indices:?} must be sorted and duplicate-free"
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= factor_sizes.len()) {
            return Err(Error::OutOfRange {
                what: "scope index",
                index: bad,
                size: factor_sizes.len(),
            });
        }
        let sizes: Vec<usize> = indices.iter().map(|&i| factor_sizes[i]).collect();
        let split = indices.partition_point(|&i| i < num_state_factors);
        Ok(Scope {
            radix: Radix::new(sizes.clone())?,
            state_radix: Radix::new(sizes[..split].to_vec())?,
            action_radix: Radix::new(sizes[split..].to_vec())?,
            indices,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// `|X[Z]|`.
    pub fn cardinality(&self) -> usize {
        self.radix.cardinality()
    }

    pub fn radix(&self) -> &Radix {
        &self.radix
    }

    /// Codec over the state factors of the scope. Rows of `X[Z]` are laid out as
    /// `state_part + |S[Z]| * action_part`, since state factors precede action factors.
    pub fn state_radix(&self) -> &Radix {
        &self.state_radix
    }

    pub fn action_radix(&self) -> &Radix {
        &self.action_radix
    }

    pub fn contains(&self, factor: usize) -> bool {
        self.indices.binary_search(&factor).is_ok()
    }

    /// Index of `x[Z]` within `X[Z]`, where `x` holds one value per factor of `X`.
    /// Values are assumed in range.
    #[inline]
    pub fn row_of(&self, x: &[usize]) -> usize {
        self.indices
            .iter()
            .zip(self.radix.strides())
            .map(|(&i, &stride)| x[i] * stride)
            .sum()
    }

    pub fn project(&self, x: &[usize], factor_sizes: &[usize]) -> Result<Projection> {
        if x.len() != factor_sizes.len() {
            return Err(Error::Structure(format!(
                "pair has {} components, structure has {}",
                x.len(),
                factor_sizes.len()
            )));
        }
        if let Some((&v, &s)) = x.iter().zip(factor_sizes).find(|(v, s)| v >= s) {
            return Err(Error::OutOfRange {
                what: "factor value",
                index: v,
                size: s,
            });
        }
        let values: Vec<usize> = self.indices.iter().map(|&i| x[i]).collect();
        let index = self.radix.encode(&values)?;
        Ok(Projection { values, index })
    }
}

/// The DBN structure: factor cardinalities plus transition and reward scopes.
///
/// Factors `0..m` of `X` are the state factors, `m..n` the action factors.
#[derive(Debug, Clone)]
pub struct FactoredStructure {
    state_radix: Radix,
    action_radix: Radix,
    pair_radix: Radix,
    transition_scopes: Vec<Scope>,
    reward_scopes: Vec<Scope>,
    row_maps: OnceLock<RowMaps>,
}

#[derive(Debug, Clone)]
struct RowMaps {
    transition: Vec<Vec<usize>>,
    reward: Vec<Vec<usize>>,
}

/// Serializable description of a structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub state_factor_sizes: Vec<usize>,
    pub action_factor_sizes: Vec<usize>,
    pub transition_scopes: Vec<Vec<usize>>,
    pub reward_scopes: Vec<Vec<usize>>,
}

impl FactoredStructure {
    pub fn new(
        state_factor_sizes: Vec<usize>,
        action_factor_sizes: Vec<usize>,
        transition_scopes: Vec<Vec<usize>>,
        reward_scopes: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let m = state_factor_sizes.len();
        if m == 0 {
            return Err(Error::Structure("at least one state factor is required".into()));
        }
        if transition_scopes.len() != m {
            return Err(Error::Structure(format!(
                "{} transition scopes for {} state factors",
                transition_scopes.len(),
                m
            )));
        }
        if reward_scopes.is_empty() {
            return Err(Error::Structure("at least one reward scope is required".into()));
        }
        let all: Vec<usize> = state_factor_sizes
            .iter()
            .chain(&action_factor_sizes)
            .copied()
            .collect();
        let pair_radix = Radix::new(all.clone())?;
        let transition_scopes = transition_scopes
            .into_iter()
            .map(|z| Scope::new(z, &all, m))
            .collect::<Result<Vec<_>>>()?;
        let reward_scopes = reward_scopes
            .into_iter()
            .map(|z| Scope::new(z, &all, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(FactoredStructure {
            state_radix: Radix::new(state_factor_sizes)?,
            action_radix: Radix::new(action_factor_sizes)?,
            pair_radix,
            transition_scopes,
            reward_scopes,
            row_maps: OnceLock::new(),
        })
    }

    pub fn from_spec(spec: &StructureSpec) -> Result<Self> {
        Self::new(
            spec.state_factor_sizes.clone(),
            spec.action_factor_sizes.clone(),
            spec.transition_scopes.clone(),
            spec.reward_scopes.clone(),
        )
    }

    pub fn to_spec(&self) -> StructureSpec {
        StructureSpec {
            state_factor_sizes: self.state_radix.sizes().to_vec(),
            action_factor_sizes: self.action_radix.sizes().to_vec(),
            transition_scopes: self
                .transition_scopes
                .iter()
                .map(|z| z.indices().to_vec())
                .collect(),
            reward_scopes: self
                .reward_scopes
                .iter()
                .map(|z| z.indices().to_vec())
                .collect(),
        }
    }

    /// One state factor of size `num_states`, one action factor of size
    /// `num_actions`, and a single reward factor over the full pair.
    pub fn flat(num_states: usize, num_actions: usize) -> Result<Self> {
        Self::new(
            vec![num_states],
            vec![num_actions],
            vec![vec![0, 1]],
            vec![vec![0, 1]],
        )
    }

    /// Number of state factors `m`.
    pub fn num_state_factors(&self) -> usize {
        self.state_radix.len()
    }

    pub fn num_action_factors(&self) -> usize {
        self.action_radix.len()
    }

    /// Number of factors `n` of the state-action space.
    pub fn num_factors(&self) -> usize {
        self.pair_radix.len()
    }

    /// Number of reward factors `ℓ`.
    pub fn num_reward_factors(&self) -> usize {
        self.reward_scopes.len()
    }

    pub fn num_states(&self) -> usize {
        self.state_radix.cardinality()
    }

    pub fn num_actions(&self) -> usize {
        self.action_radix.cardinality()
    }

    pub fn num_pairs(&self) -> usize {
        self.pair_radix.cardinality()
    }

    pub fn state_factor_sizes(&self) -> &[usize] {
        self.state_radix.sizes()
    }

    pub fn action_factor_sizes(&self) -> &[usize] {
        self.action_radix.sizes()
    }

    pub fn factor_sizes(&self) -> &[usize] {
        self.pair_radix.sizes()
    }

    pub fn state_radix(&self) -> &Radix {
        &self.state_radix
    }

    pub fn action_radix(&self) -> &Radix {
        &self.action_radix
    }

    pub fn pair_radix(&self) -> &Radix {
        &self.pair_radix
    }

    pub fn transition_scopes(&self) -> &[Scope] {
        &self.transition_scopes
    }

    pub fn reward_scopes(&self) -> &[Scope] {
        &self.reward_scopes
    }

    pub fn transition_scope(&self, i: usize) -> &Scope {
        &self.transition_scopes[i]
    }

    pub fn reward_scope(&self, i: usize) -> &Scope {
        &self.reward_scopes[i]
    }

    /// Joint pair index of `(state, action)`.
    #[inline]
    pub fn pair_index(&self, state: usize, action: usize) -> usize {
        state + self.num_states() * action
    }

    pub fn project(&self, x: &[usize], scope: &Scope) -> Result<Projection> {
        scope.project(x, self.factor_sizes())
    }

    fn row_maps(&self) -> &RowMaps {
        self.row_maps.get_or_init(|| {
            let mut x = vec![0; self.num_factors()];
            let num_pairs = self.num_pairs();
            let mut transition = vec![Vec::with_capacity(num_pairs); self.transition_scopes.len()];
            let mut reward = vec![Vec::with_capacity(num_pairs); self.reward_scopes.len()];
            for k in 0..num_pairs {
                self.pair_radix
                    .decode_into(k, &mut x)
                    .expect("index within cardinality");
                for (map, z) in transition.iter_mut().zip(&self.transition_scopes) {
                    map.push(z.row_of(&x));
                }
                for (map, z) in reward.iter_mut().zip(&self.reward_scopes) {
                    map.push(z.row_of(&x));
                }
            }
            RowMaps { transition, reward }
        })
    }

    /// Row of `X[Z_i^p]` hit by each joint pair index.
    pub fn transition_rows(&self, i: usize) -> &[usize] {
        &self.row_maps().transition[i]
    }

    /// Row of `X[Z_i^r]` hit by each joint pair index.
    pub fn reward_rows(&self, i: usize) -> &[usize] {
        &self.row_maps().reward[i]
    }
}

impl PartialEq for FactoredStructure {
    fn eq(&self, other: &Self) -> bool {
        self.state_radix == other.state_radix
            && self.action_radix == other.action_radix
            && self.transition_scopes == other.transition_scopes
            && self.reward_scopes == other.reward_scopes
    }
}
