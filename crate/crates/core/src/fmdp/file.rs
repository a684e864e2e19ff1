use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{FactoredMdp, RewardDist, RewardFactor, RewardKind, TransitionFactor};
use super::structure::{FactoredStructure, StructureSpec};
use crate::error::{Error, Result};

/// JSON model file: structure plus per-factor tables.
///
/// `transition_tables[i][row][y]` and `reward_means[i][row]` are indexed by the
/// scope codec; `reward_kind[i][row]` tags each reward row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(flatten)]
    pub structure: StructureSpec,
    pub transition_tables: Vec<Vec<Vec<f64>>>,
    pub reward_means: Vec<Vec<f64>>,
    pub reward_kind: Vec<Vec<RewardKind>>,
}

impl ModelFile {
    pub fn from_mdp(mdp: &FactoredMdp) -> Self {
        ModelFile {
            structure: mdp.structure().to_spec(),
            transition_tables: mdp
                .transition_factors()
                .iter()
                .map(|f| f.rows().map(<[f64]>::to_vec).collect())
                .collect(),
            reward_means: mdp
                .reward_factors()
                .iter()
                .map(|f| f.rows().iter().map(RewardDist::mean).collect())
                .collect(),
            reward_kind: mdp
                .reward_factors()
                .iter()
                .map(|f| f.rows().iter().map(RewardDist::kind).collect())
                .collect(),
        }
    }

    pub fn into_mdp(self) -> Result<FactoredMdp> {
        let structure = FactoredStructure::from_spec(&self.structure)?;
        if self.reward_means.len() != self.reward_kind.len() {
            return Err(Error::Model("reward_means and reward_kind differ in length".into()));
        }
        let transitions = self
            .transition_tables
            .into_iter()
            .zip(structure.state_factor_sizes())
            .map(|(rows, &size)| TransitionFactor::new(size, rows))
            .collect::<Result<Vec<_>>>()?;
        let rewards = self
            .reward_means
            .iter()
            .zip(&self.reward_kind)
            .map(|(means, kinds)| {
                if means.len() != kinds.len() {
                    return Err(Error::Model("reward_means and reward_kind rows differ".into()));
                }
                means
                    .iter()
                    .zip(kinds)
                    .map(|(&m, &k)| RewardDist::new(k, m))
                    .collect::<Result<Vec<_>>>()
                    .map(RewardFactor::new)
            })
            .collect::<Result<Vec<_>>>()?;
        FactoredMdp::new(structure, transitions, rewards)
    }
}

pub fn read_model(path: impl AsRef<Path>) -> Result<FactoredMdp> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    file.into_mdp()
}

pub fn write_model(mdp: &FactoredMdp, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&ModelFile::from_mdp(mdp))?;
    fs::write(path, text + "\n")?;
    Ok(())
}
