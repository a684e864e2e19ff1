use crate::error::{Error, Result};
use crate::fmdp::{FactoredMdp, FactoredStructure, FlatMdp, RewardFactor};

/// Undiscounted value iterates `u_1..u_n` from `u_0 = 0`, without recentering.
pub fn raw_vi(m: &FlatMdp, n: usize) -> Vec<Vec<f64>> {
    let mut u = vec![0.0; m.num_states()];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        u = (0..m.num_states())
            .map(|s| {
                (0..m.num_actions())
                    .map(|a| m.reward(s, a) + m.expect(s, a, &u))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        out.push(u.clone());
    }
    out
}

/// One base MDP of a Cartesian decomposition.
#[derive(Debug, Clone)]
pub struct BaseMdp {
    pub state_factors: Vec<usize>,
    pub action_factors: Vec<usize>,
    pub model: FactoredMdp,
}

#[derive(Debug, Clone)]
pub struct CartesianVi {
    pub bases: Vec<BaseMdp>,
    /// `joint[k][s]` is `u_{k+1}(s)` on the joint model.
    pub joint: Vec<Vec<f64>>,
    /// `summed[k][s]` is `sum_b u_{k+1}^{(b)}(s[b])`.
    pub summed: Vec<Vec<f64>>,
}

impl CartesianVi {
    /// `max_s |joint - summed|` after each iteration.
    pub fn deviations(&self) -> Vec<f64> {
        self.joint
            .iter()
            .zip(&self.summed)
            .map(|(j, s)| j.iter().zip(s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .collect()
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = i;
    while parent[c] != r {
        let next = parent[c];
        parent[c] = r;
        c = next;
    }
    r
}

/// Finest partition of the state factors such that no scope crosses blocks.
/// Action factors follow the block of the scopes mentioning them.
pub fn product_partition(st: &FactoredStructure) -> Vec<Vec<usize>> {
    let n = st.num_factors();
    let mut parent: Vec<usize> = (0..n).collect();
    for z in st.transition_scopes().iter().chain(st.reward_scopes()) {
        let first = z.indices()[0];
        for &j in &z.indices()[1..] {
            let (a, b) = (find(&mut parent, first), find(&mut parent, j));
            parent[a.max(b)] = a.min(b);
        }
    }
    // attach each state factor's own transition scope
    for i in 0..st.num_state_factors() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, st.transition_scope(i).indices()[0]));
        parent[a.max(b)] = a.min(b);
    }
    let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..st.num_state_factors() {
        let r = find(&mut parent, i);
        match blocks.iter_mut().find(|(root, _)| *root == r) {
            Some((_, b)) => b.push(i),
            None => blocks.push((r, vec![i])),
        }
    }
    blocks.into_iter().map(|(_, b)| b).collect()
}

/// Split `m` into base MDPs along a partition of its state factors.
///
/// Each block owns the action factors appearing in its scopes. A scope
/// touching two blocks, an action factor shared by two blocks, or a reward
/// scope with no state factor is rejected.
pub fn decompose(m: &FactoredMdp, partition: &[Vec<usize>]) -> Result<Vec<BaseMdp>> {
    let st = m.structure();
    let ms = st.num_state_factors();
    let mut block_of = vec![usize::MAX; st.num_factors()];
    for (b, block) in partition.iter().enumerate() {
        for &i in block {
            if i >= ms || block_of[i] != usize::MAX {
                return Err(Error::NotCartesian(format!("bad partition entry {i}")));
            }
            block_of[i] = b;
        }
    }
    if let Some(i) = (0..ms).find(|&i| block_of[i] == usize::MAX) {
        return Err(Error::NotCartesian(format!("state factor {i} not covered by the partition")));
    }
    let scopes: Vec<(usize, &[usize])> = (0..ms)
        .map(|i| (block_of[i], st.transition_scope(i).indices()))
        .collect();
    let mut reward_blocks = Vec::new();
    for (r, z) in st.reward_scopes().iter().enumerate() {
        let b = z
            .indices()
            .iter()
            .find(|&&j| j < ms)
            .map(|&j| block_of[j])
            .ok_or_else(|| Error::NotCartesian(format!("reward scope {r} has no state factor")))?;
        reward_blocks.push(b);
    }
    for (b, z) in scopes
        .iter()
        .copied()
        .chain(reward_blocks.iter().copied().zip(st.reward_scopes().iter().map(|z| z.indices())))
    {
        for &j in z {
            if block_of[j] == usize::MAX {
                block_of[j] = b;
            } else if block_of[j] != b {
                return Err(Error::NotCartesian(format!("factor {j} is shared by two base MDPs")));
            }
        }
    }
    let mut bases = Vec::with_capacity(partition.len());
    for (b, block) in partition.iter().enumerate() {
        let mut state_factors = block.clone();
        state_factors.sort_unstable();
        let action_factors: Vec<usize> = (ms..st.num_factors()).filter(|&j| block_of[j] == b).collect();
        let local: Vec<usize> = state_factors.iter().chain(&action_factors).copied().collect();
        let remap = |z: &[usize]| -> Vec<usize> {
            z.iter()
                .map(|j| local.iter().position(|l| l == j).expect("factor in block"))
                .collect()
        };
        let sizes = |fs: &[usize]| -> Vec<usize> { fs.iter().map(|&j| st.factor_sizes()[j]).collect() };
        let mut action_sizes = sizes(&action_factors);
        if action_sizes.is_empty() {
            action_sizes.push(1);
        }
        let rewards: Vec<usize> = (0..st.num_reward_factors()).filter(|&r| reward_blocks[r] == b).collect();
        let mut reward_scopes: Vec<Vec<usize>> = rewards.iter().map(|&r| remap(st.reward_scope(r).indices())).collect();
        let mut reward_factors: Vec<RewardFactor> =
            rewards.iter().map(|&r| m.reward_factors()[r].clone()).collect();
        if reward_scopes.is_empty() {
            reward_scopes.push(vec![0]);
            reward_factors.push(RewardFactor::from_means(
                crate::fmdp::RewardKind::Constant,
                &vec![0.0; st.factor_sizes()[state_factors[0]]],
            )?);
        }
        let sub = FactoredStructure::new(
            sizes(&state_factors),
            action_sizes,
            state_factors.iter().map(|&i| remap(st.transition_scope(i).indices())).collect(),
            reward_scopes,
        )?;
        let model = FactoredMdp::new(
            sub,
            state_factors.iter().map(|&i| m.transition_factors()[i].clone()).collect(),
            reward_factors,
        )?;
        bases.push(BaseMdp {
            state_factors,
            action_factors,
            model,
        });
    }
    Ok(bases)
}

/// Joint value iteration next to the sum of per-base value iterations, `n` steps.
pub fn cartesian_vi(m: &FactoredMdp, n: usize) -> Result<CartesianVi> {
    cartesian_vi_with(m, &product_partition(m.structure()), n)
}

pub fn cartesian_vi_with(m: &FactoredMdp, partition: &[Vec<usize>], n: usize) -> Result<CartesianVi> {
    let bases = decompose(m, partition)?;
    let joint = raw_vi(&m.flatten()?, n);
    let per_base: Vec<Vec<Vec<f64>>> = bases
        .iter()
        .map(|b| Ok(raw_vi(&b.model.flatten()?, n)))
        .collect::<Result<_>>()?;
    let st = m.structure();
    let mut values = vec![0; st.num_state_factors()];
    let local_index: Vec<Vec<usize>> = (0..st.num_states())
        .map(|s| {
            st.state_radix().decode_into(s, &mut values).expect("state in range");
            bases
                .iter()
                .map(|b| {
                    let local: Vec<usize> = b.state_factors.iter().map(|&i| values[i]).collect();
                    b.model.structure().state_radix().encode(&local).expect("local state in range")
                })
                .collect()
        })
        .collect();
    let summed = (0..n)
        .map(|k| {
            local_index
                .iter()
                .map(|idx| idx.iter().zip(&per_base).map(|(&ls, u)| u[k][ls]).sum())
                .collect()
        })
        .collect();
    Ok(CartesianVi { bases, joint, summed })
}
