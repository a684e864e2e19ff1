use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::{FactoredMdp, FactoredStructure, RewardFactor, RewardKind, TransitionFactor};

pub const FAILED: usize = 0;
pub const WORKING: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Machine `i` watches machine `i - 1 (mod N)`.
    Circle,
    /// Root 0 with three contiguous legs, e.g. `0-1-2`, `0-3-4`, `0-5-6` for seven machines.
    ThreeLegged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SysAdminParams {
    pub machines: usize,
    pub reboot_success: f64,
    /// Survival probability of a working machine with no failed neighbour.
    pub survive: f64,
    /// Multiplicative survival penalty per failed neighbour.
    pub neighbour_penalty: f64,
}

impl Default for SysAdminParams {
    fn default() -> Self {
        SysAdminParams {
            machines: 7,
            reboot_success: 0.95,
            survive: 0.95,
            neighbour_penalty: 0.9,
        }
    }
}

/// Neighbour watched by each machine, `None` for the tree root.
pub fn neighbours(topology: Topology, n: usize) -> Vec<Option<usize>> {
    match topology {
        Topology::Circle => (0..n).map(|i| Some((i + n - 1) % n)).collect(),
        Topology::ThreeLegged => {
            let mut parent = vec![None; n];
            let rest = n.saturating_sub(1);
            let mut next = 1;
            for leg in 0..3 {
                let len = rest / 3 + usize::from(leg < rest % 3);
                for k in 0..len {
                    parent[next] = Some(if k == 0 { 0 } else { next - 1 });
                    next += 1;
                }
            }
            parent
        }
    }
}

/// `N` binary machines and one action factor with `N + 1` values (reboot `i`, or idle `N`).
pub fn sysadmin(topology: Topology, p: &SysAdminParams) -> Result<FactoredMdp> {
    let n = p.machines;
    if n < 2 {
        return Err(Error::Parameter("SysAdmin needs at least 2 machines".into()));
    }
    for v in [p.reboot_success, p.survive, p.neighbour_penalty] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Parameter(format!("SysAdmin parameter {v} outside [0,1]")));
        }
    }
    let nb = neighbours(topology, n);
    let scopes: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut z = vec![i];
            if let Some(j) = nb[i] {
                z.push(j);
            }
            z.sort_unstable();
            z.push(n);
            z
        })
        .collect();
    let st = FactoredStructure::new(vec![2; n], vec![n + 1], scopes, (0..n).map(|i| vec![i]).collect())?;
    let mut factors = Vec::with_capacity(n);
    for i in 0..n {
        let z = st.transition_scope(i);
        let mut local = vec![0; z.indices().len()];
        let mut rows = Vec::with_capacity(z.cardinality());
        for r in 0..z.cardinality() {
            z.radix().decode_into(r, &mut local)?;
            let value = |f: usize| local[z.indices().iter().position(|&j| j == f).expect("in scope")];
            let action = value(n);
            let own = value(i);
            let failed_nb = nb[i].map_or(0, |j| usize::from(value(j) == FAILED));
            let up = if action == i {
                p.reboot_success
            } else if own == WORKING {
                p.survive * p.neighbour_penalty.powi(failed_nb as i32)
            } else {
                0.0
            };
            rows.push(vec![1.0 - up, up]);
        }
        factors.push(TransitionFactor::new(2, rows)?);
    }
    let rewards = (0..n)
        .map(|_| RewardFactor::from_means(RewardKind::Constant, &[0.0, 1.0]))
        .collect::<Result<Vec<_>>>()?;
    FactoredMdp::new(st, factors, rewards)
}
