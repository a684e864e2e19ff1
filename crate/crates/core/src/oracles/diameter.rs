use serde::{Deserialize, Serialize};

use super::hitting::HittingTable;
use crate::error::{Error, Result};
use crate::fmdp::FactoredMdp;

/// Global diameter, factored diameters `D_{i,y}` and support sizes `K_{i,x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterReport {
    pub diameter: f64,
    /// `factored[i][y]` for `y` ranging over the state part of `Z_i^p`.
    pub factored: Vec<Vec<f64>>,
    /// `support_sizes[i][x]` for `x` ranging over `X[Z_i^p]`.
    pub support_sizes: Vec<Vec<usize>>,
}

/// `K_{i,x} = |{y : P_i(y|x) > 0}|` with an exact zero test.
pub fn support_sizes(m: &FactoredMdp) -> Vec<Vec<usize>> {
    m.transition_factors()
        .iter()
        .map(|f| f.rows().map(|r| r.iter().filter(|&&p| p > 0.0).count()).collect())
        .collect()
}

/// `D_{i,y}`: the largest pairwise hitting time within
/// `L = (union of supports of rows of factor i whose state part is y) x other factors`.
///
/// Pairs with `s1 == s2` contribute zero.
pub fn factored_diameter(m: &FactoredMdp, table: &HittingTable, i: usize, y: usize) -> Result<f64> {
    let st = m.structure();
    if i >= st.num_state_factors() {
        return Err(Error::OutOfRange {
            what: "state factor",
            index: i,
            size: st.num_state_factors(),
        });
    }
    if table.num_states() != st.num_states() {
        return Err(Error::Model("hitting table does not match the model".into()));
    }
    let scope = st.transition_scope(i);
    let ys = scope.state_radix().cardinality();
    if y >= ys {
        return Err(Error::OutOfRange {
            what: "scope state value",
            index: y,
            size: ys,
        });
    }
    let factor = &m.transition_factors()[i];
    let mut allowed = vec![false; factor.num_values()];
    for row in (y..scope.cardinality()).step_by(ys) {
        for (v, &p) in factor.row(row).iter().enumerate() {
            if p > 0.0 {
                allowed[v] = true;
            }
        }
    }
    let stride = st.state_radix().strides()[i];
    let size = st.state_factor_sizes()[i];
    let members: Vec<usize> = (0..st.num_states())
        .filter(|&s| allowed[(s / stride) % size])
        .collect();
    let mut best = 0.0f64;
    for &s1 in &members {
        for &s2 in &members {
            if s1 != s2 {
                best = best.max(table.get(s1, s2));
            }
        }
    }
    Ok(best)
}

pub fn diameter_report(m: &FactoredMdp, table: &HittingTable) -> Result<DiameterReport> {
    let st = m.structure();
    let factored = (0..st.num_state_factors())
        .map(|i| {
            (0..st.transition_scope(i).state_radix().cardinality())
                .map(|y| factored_diameter(m, table, i, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiameterReport {
        diameter: table.diameter(),
        factored,
        support_sizes: support_sizes(m),
    })
}

/// Flatten, tabulate hitting times and assemble the report.
pub fn compute_diameter_report(m: &FactoredMdp) -> Result<DiameterReport> {
    let table = HittingTable::compute(&m.flatten()?)?;
    diameter_report(m, &table)
}

/// `c(M) = l * sqrt(sum_i sum_x D_{i,s(x)}^2 (K_{i,x} - 1)) + sum_i sqrt|X[Z_i^r]| + D`,
/// where `s(x)` is the state part of row `x` of `X[Z_i^p]`.
pub fn regret_constant(m: &FactoredMdp, report: &DiameterReport) -> f64 {
    let st = m.structure();
    let mut inner = 0.0;
    for (i, ks) in report.support_sizes.iter().enumerate() {
        let ys = st.transition_scope(i).state_radix().cardinality();
        for (x, &k) in ks.iter().enumerate() {
            let d = report.factored[i][x % ys];
            inner += d * d * (k as f64 - 1.0);
        }
    }
    let reward_term: f64 = st
        .reward_scopes()
        .iter()
        .map(|z| (z.cardinality() as f64).sqrt())
        .sum();
    st.num_reward_factors() as f64 * inner.sqrt() + reward_term + report.diameter
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmdp::{FactoredStructure, RewardFactor, RewardKind, TransitionFactor};

    #[test]
    fn trivial_model_constant_is_one() {
        let st = FactoredStructure::flat(1, 1).unwrap();
        let m = FactoredMdp::new(
            st,
            vec![TransitionFactor::new(1, vec![vec![1.0]]).unwrap()],
            vec![RewardFactor::from_means(RewardKind::Constant, &[0.5]).unwrap()],
        )
        .unwrap();
        let r = compute_diameter_report(&m).unwrap();
        assert_eq!(r.diameter, 0.0);
        assert_eq!(regret_constant(&m, &r), 1.0);
    }

    #[test]
    fn deterministic_model_drops_first_term() {
        // swap chain: 2 states, stay/swap
        let st = FactoredStructure::flat(2, 2).unwrap();
        let m = FactoredMdp::new(
            st,
            vec![TransitionFactor::new(
                2,
                vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            )
            .unwrap()],
            vec![RewardFactor::from_means(RewardKind::Constant, &[0.0, 1.0, 0.0, 1.0]).unwrap()],
        )
        .unwrap();
        let r = compute_diameter_report(&m).unwrap();
        assert_eq!(r.diameter, 1.0);
        assert!(r.support_sizes[0].iter().all(|&k| k == 1));
        assert_eq!(regret_constant(&m, &r), 2.0 + 1.0);
    }

    #[test]
    fn unfactored_full_support_matches_diameter() {
        let st = FactoredStructure::flat(3, 2).unwrap();
        let rows = vec![
            vec![0.2, 0.3, 0.5],
            vec![0.6, 0.2, 0.2],
            vec![0.1, 0.1, 0.8],
            vec![0.9, 0.05, 0.05],
            vec![0.3, 0.4, 0.3],
            vec![0.25, 0.5, 0.25],
        ];
        let m = FactoredMdp::new(
            st,
            vec![TransitionFactor::new(3, rows).unwrap()],
            vec![RewardFactor::from_means(RewardKind::Constant, &[0.0; 6]).unwrap()],
        )
        .unwrap();
        let r = compute_diameter_report(&m).unwrap();
        for &d in &r.factored[0] {
            assert_eq!(d, r.diameter);
        }
    }
}
