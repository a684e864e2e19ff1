use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmdp::FlatMdp;

pub const HITTING_TOL: f64 = 1e-9;
/// Hitting times above this are treated as divergence.
pub const HITTING_BOUND: f64 = 1e9;
const MAX_POLICY_ROUNDS: usize = 10_000;

/// Bellman residual `max_s |h(s) - 1 - min_a sum_{y != target} P(y|s,a) h(y)|` off the target.
pub fn hitting_residual(m: &FlatMdp, target: usize, h: &[f64]) -> f64 {
    (0..m.num_states())
        .filter(|&s| s != target)
        .map(|s| (h[s] - 1.0 - best_action(m, target, h, s).1).abs())
        .fold(0.0, f64::max)
}

fn cost_to_go(m: &FlatMdp, target: usize, h: &[f64], s: usize, a: usize) -> f64 {
    let (next, prob) = m.sparse_row(s, a);
    next.iter()
        .zip(prob)
        .filter(|(&y, _)| y as usize != target)
        .map(|(&y, &p)| p * h[y as usize])
        .sum()
}

fn best_action(m: &FlatMdp, target: usize, h: &[f64], s: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for a in 0..m.num_actions() {
        let c = cost_to_go(m, target, h, s, a);
        if c < best.1 {
            best = (a, c);
        }
    }
    best
}

/// Breadth-first distances to `target` in the support graph; returns a proper
/// policy that moves one layer closer at every state.
fn proper_policy(m: &FlatMdp, target: usize) -> Result<Vec<usize>> {
    let ns = m.num_states();
    let mut dist = vec![usize::MAX; ns];
    let mut policy = vec![0; ns];
    dist[target] = 0;
    let mut frontier = vec![target];
    let mut layer = 0;
    while !frontier.is_empty() {
        layer += 1;
        let mut added = Vec::new();
        for s in 0..ns {
            if dist[s] != usize::MAX {
                continue;
            }
            let hit = (0..m.num_actions()).find(|&a| {
                m.sparse_row(s, a)
                    .0
                    .iter()
                    .any(|&y| dist[y as usize] == layer - 1)
            });
            if let Some(a) = hit {
                policy[s] = a;
                added.push(s);
            }
        }
        for &s in &added {
            dist[s] = layer;
        }
        frontier = added;
    }
    if let Some(from) = dist.iter().position(|&d| d == usize::MAX) {
        return Err(Error::Unreachable { target, from });
    }
    Ok(policy)
}

/// Solve `(I - Q) h = 1` on the non-target states for a fixed policy.
fn evaluate(m: &FlatMdp, target: usize, policy: &[usize]) -> Vec<f64> {
    let ns = m.num_states();
    let idx: Vec<usize> = (0..ns).filter(|&s| s != target).collect();
    let mut pos = vec![usize::MAX; ns];
    for (k, &s) in idx.iter().enumerate() {
        pos[s] = k;
    }
    let n = idx.len();
    let w = n + 1;
    let mut a = vec![0.0; n * w];
    for (r, &s) in idx.iter().enumerate() {
        a[r * w + r] += 1.0;
        let (next, prob) = m.sparse_row(s, policy[s]);
        for (&y, &p) in next.iter().zip(prob) {
            let c = pos[y as usize];
            if c != usize::MAX {
                a[r * w + c] -= p;
            }
        }
        a[r * w + n] = 1.0;
    }
    let x = gauss_solve(&mut a, n);
    let mut h = vec![0.0; ns];
    for (k, &s) in idx.iter().enumerate() {
        h[s] = x[k];
    }
    h
}

/// Gaussian elimination with partial pivoting on an `n x (n+1)` augmented matrix.
fn gauss_solve(a: &mut [f64], n: usize) -> Vec<f64> {
    let w = n + 1;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * w + col].abs().total_cmp(&a[j * w + col].abs()))
            .unwrap_or(col);
        if piv != col {
            for k in 0..w {
                a.swap(piv * w + k, col * w + k);
            }
        }
        let d = a[col * w + col];
        for r in col + 1..n {
            let f = a[r * w + col] / d;
            if f != 0.0 {
                for k in col..w {
                    a[r * w + k] -= f * a[col * w + k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut v = a[r * w + n];
        for k in r + 1..n {
            v -= a[r * w + k] * x[k];
        }
        x[r] = v / a[r * w + r];
    }
    x
}

/// Minimal expected hitting times `min_pi E[T(s -> target)]` for every start state.
///
/// Policy iteration on the target-absorbing MDP, started from a proper policy
/// built from the support graph; each policy is evaluated exactly and the
/// result is polished by value-iteration sweeps until the Bellman residual is
/// below [`HITTING_TOL`].
pub fn min_hitting_times(m: &FlatMdp, target: usize) -> Result<Vec<f64>> {
    let ns = m.num_states();
    if target >= ns {
        return Err(Error::OutOfRange {
            what: "target state",
            index: target,
            size: ns,
        });
    }
    let mut policy = proper_policy(m, target)?;
    let mut h = evaluate(m, target, &policy);
    for _ in 0..MAX_POLICY_ROUNDS {
        let mut changed = false;
        for s in (0..ns).filter(|&s| s != target) {
            let current = cost_to_go(m, target, &h, s, policy[s]);
            let (a, c) = best_action(m, target, &h, s);
            if c < current - 1e-12 * current.abs().max(1.0) {
                policy[s] = a;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        h = evaluate(m, target, &policy);
    }
    let mut residual = hitting_residual(m, target, &h);
    let mut sweeps = 0;
    while residual > HITTING_TOL {
        if sweeps >= 10_000 {
            return Err(Error::NonConvergence {
                iterations: sweeps,
                span: residual,
                tolerance: HITTING_TOL,
            });
        }
        let prev = h.clone();
        for s in (0..ns).filter(|&s| s != target) {
            h[s] = 1.0 + best_action(m, target, &prev, s).1;
        }
        residual = hitting_residual(m, target, &h);
        sweeps += 1;
    }
    if let Some(from) = h.iter().position(|&v| !(v <= HITTING_BOUND)) {
        return Err(Error::Unreachable { target, from });
    }
    Ok(h)
}

/// All-pairs minimal hitting times; `get(from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTable {
    num_states: usize,
    by_target: Vec<f64>,
}

impl HittingTable {
    pub fn compute(m: &FlatMdp) -> Result<Self> {
        let ns = m.num_states();
        let rows = (0..ns)
            .into_par_iter()
            .map(|t| min_hitting_times(m, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(HittingTable {
            num_states: ns,
            by_target: rows.concat(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.by_target[to * self.num_states + from]
    }

    /// `max_{s != s'} T(s -> s')`, zero for a single state.
    pub fn diameter(&self) -> f64 {
        let ns = self.num_states;
        (0..ns)
            .flat_map(|t| (0..ns).filter(move |&s| s != t).map(move |s| (s, t)))
            .map(|(s, t)| self.get(s, t))
            .fold(0.0, f64::max)
    }
}

pub fn diameter(m: &FlatMdp) -> Result<f64> {
    Ok(HittingTable::compute(m)?.diameter())
}
