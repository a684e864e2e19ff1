use serde::{Deserialize, Serialize};

use super::run::RegretTrace;
use crate::agents::Algorithm;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algo: Algorithm,
    pub t: u64,
    pub mean: f64,
    pub q10: f64,
    pub q90: f64,
    pub runs: usize,
}

/// Nearest-rank empirical quantile of a sorted sample.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Mean and 10/90 quantiles of regret across seeds, per algorithm and checkpoint.
pub fn aggregate(traces: &[RegretTrace]) -> Result<Vec<AggregateRow>> {
    let mut algos: Vec<Algorithm> = Vec::new();
    for tr in traces {
        if !algos.contains(&tr.algo) {
            algos.push(tr.algo);
        }
    }
    let mut out = Vec::new();
    for algo in algos {
        let group: Vec<&RegretTrace> = traces.iter().filter(|t| t.algo == algo).collect();
        let grid: Vec<u64> = group[0].points.iter().map(|p| p.t).collect();
        for tr in &group[1..] {
            if tr.points.len() != grid.len() || tr.points.iter().zip(&grid).any(|(p, &t)| p.t != t) {
                return Err(Error::CheckpointMismatch(format!(
                    "{algo} seed {} does not share the checkpoint grid",
                    tr.seed
                )));
            }
        }
        for (k, &t) in grid.iter().enumerate() {
            let mut v: Vec<f64> = group.iter().map(|tr| tr.points[k].regret).collect();
            v.sort_by(f64::total_cmp);
            out.push(AggregateRow {
                algo,
                t,
                mean: v.iter().sum::<f64>() / v.len() as f64,
                q10: quantile(&v, 0.1),
                q90: quantile(&v, 0.9),
                runs: v.len(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs with `a < b`.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// Two-sided exact binomial p-value; ties are dropped.
    pub p_value: f64,
}

/// Exact two-sided sign test on paired samples, counting `a < b` as a win.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    let mut wins = 0;
    let mut losses = 0;
    let mut ties = 0;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            wins += 1;
        } else if x > y {
            losses += 1;
        } else {
            ties += 1;
        }
    }
    SignTest {
        wins,
        losses,
        ties,
        p_value: sign_test_p(wins, losses),
    }
}

pub fn sign_test_p(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let k = wins.min(losses);
    // P(X <= k) for X ~ Binomial(n, 1/2), via log-space terms
    let ln_half_n = n as f64 * 0.5f64.ln();
    let mut ln_choose = 0.0;
    let mut tail = 0.0;
    for j in 0..=k {
        if j > 0 {
            ln_choose += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        tail += (ln_choose + ln_half_n).exp();
    }
    (2.0 * tail).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run::TracePoint;

    fn trace(algo: Algorithm, seed: usize, f: impl Fn(u64) -> f64) -> RegretTrace {
        RegretTrace {
            algo,
            env: "test".into(),
            seed,
            gain: 0.0,
            points: (1..=20)
                .map(|t| TracePoint {
                    t,
                    cum_reward: 0.0,
                    regret: f(t),
                })
                .collect(),
            episodes: 1,
            planning_secs: 0.0,
            total_secs: 0.0,
        }
    }

    #[test]
    fn single_seed_is_its_trace() {
        let tr = trace(Algorithm::DbnUcrl, 0, |t| t as f64 * 0.5);
        let agg = aggregate(std::slice::from_ref(&tr)).unwrap();
        for (row, p) in agg.iter().zip(&tr.points) {
            assert_eq!(row.mean, p.regret);
            assert_eq!(row.q10, p.regret);
            assert_eq!(row.q90, p.regret);
        }
    }

    #[test]
    fn two_constants_average() {
        let agg = aggregate(&[trace(Algorithm::Ucrl2b, 0, |_| 3.0), trace(Algorithm::Ucrl2b, 1, |_| 7.0)]).unwrap();
        assert!(agg.iter().all(|r| r.mean == 5.0));
    }

    #[test]
    fn linear_slopes_average() {
        let slopes: Vec<f64> = (0..16).map(|k| 0.1 * k as f64 + 0.3).collect();
        let traces: Vec<RegretTrace> = slopes
            .iter()
            .enumerate()
            .map(|(k, &s)| trace(Algorithm::DbnUcrl, k, move |t| s * t as f64))
            .collect();
        let agg = aggregate(&traces).unwrap();
        let mean_slope = slopes.iter().sum::<f64>() / 16.0;
        let fit = (agg[19].mean - agg[0].mean) / 19.0;
        assert!((fit - mean_slope).abs() < 1e-12);
        assert!(agg[19].q10 <= agg[19].mean && agg[19].mean <= agg[19].q90);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let mut b = trace(Algorithm::DbnUcrl, 1, |_| 0.0);
        b.points.pop();
        assert!(matches!(
            aggregate(&[trace(Algorithm::DbnUcrl, 0, |_| 0.0), b]),
            Err(Error::CheckpointMismatch(_))
        ));
    }

    #[test]
    fn quantiles_nearest_rank() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(quantile(&v, 0.1), 1.0);
        assert_eq!(quantile(&v, 0.9), 9.0);
        assert_eq!(quantile(&v, 0.5), 5.0);
    }

    #[test]
    fn sign_test_reference_values() {
        // sum_{j<=3} C(16,j) / 2^16 = 697 / 65536, doubled
        assert!((sign_test_p(13, 3) - 2.0 * 697.0 / 65536.0).abs() < 1e-15);
        assert!((sign_test_p(12, 4) - 2.0 * 2517.0 / 65536.0).abs() < 1e-15);
        assert_eq!(sign_test_p(8, 8), 1.0);
        assert_eq!(sign_test_p(0, 0), 1.0);
        let s = sign_test(&[1.0, 2.0, 3.0], &[2.0, 2.0, 1.0]);
        assert_eq!((s.wins, s.losses, s.ties), (1, 1, 1));
    }
}
