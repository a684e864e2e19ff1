use crate::error::{Error, Result};
use crate::fmdp::FlatMdp;

pub const DEFAULT_SPAN_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GainResult {
    pub gain: f64,
    /// Last iterate, shifted so its minimum is zero.
    pub bias: Vec<f64>,
    /// Greedy policy of the last sweep, smallest action index on ties.
    pub policy: Vec<usize>,
    pub iterations: usize,
    pub span: f64,
}

fn span(v: impl IntoIterator<Item = f64>) -> (f64, f64) {
    v.into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Relative value iteration from `u_0 = 0` until `span(u_{n+1} - u_n) <= span_tol`.
pub fn average_reward_vi(m: &FlatMdp, span_tol: f64, max_iter: usize) -> Result<GainResult> {
    if !(span_tol > 0.0) {
        return Err(Error::Parameter(format!("span tolerance {span_tol} must be positive")));
    }
    let (ns, na) = (m.num_states(), m.num_actions());
    let mut u = vec![0.0; ns];
    let mut next = vec![0.0; ns];
    let mut policy = vec![0; ns];
    let mut last_span = f64::INFINITY;
    for iter in 1..=max_iter {
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for a in 0..na {
                let q = m.reward(s, a) + m.expect(s, a, &u);
                if q > best {
                    best = q;
                    arg = a;
                }
            }
            next[s] = best;
            policy[s] = arg;
        }
        let (lo, hi) = span(next.iter().zip(&u).map(|(n, o)| n - o));
        last_span = hi - lo;
        let floor = next.iter().copied().fold(f64::INFINITY, f64::min);
        for (o, n) in u.iter_mut().zip(&next) {
            *o = n - floor;
        }
        if last_span <= span_tol {
            return Ok(GainResult {
                gain: 0.5 * (hi + lo),
                bias: u,
                policy,
                iterations: iter,
                span: last_span,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        span: last_span,
        tolerance: span_tol,
    })
}
