//! Numeric checks of the inequalities the regret analysis relies on.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::environments::random::random_distribution;
use crate::error::{Error, Result};
use crate::fmdp::{FactoredStructure, Radix};

/// Two product distributions whose factors satisfy
/// `|P'_i(y) - P_i(y)| <= sqrt(P_i(y) xi_i) + xi'_i`, and a nonnegative `f` on the joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationInstance {
    p: Vec<Vec<f64>>,
    p_prime: Vec<Vec<f64>>,
    xi: Vec<f64>,
    xi_prime: Vec<f64>,
    f: Vec<f64>,
}

impl DeviationInstance {
    pub fn new(p: Vec<Vec<f64>>, p_prime: Vec<Vec<f64>>, xi: Vec<f64>, xi_prime: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        let m = p.len();
        if m == 0 || p_prime.len() != m || xi.len() != m || xi_prime.len() != m {
            return Err(Error::Parameter("deviation instance factor counts differ".into()));
        }
        let joint: usize = p.iter().map(Vec::len).product();
        if f.len() != joint || f.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Parameter("f must be nonnegative on the joint space".into()));
        }
        for i in 0..m {
            if p[i].len() != p_prime[i].len() {
                return Err(Error::Parameter(format!("factor {i} sizes differ")));
            }
            for d in [&p[i], &p_prime[i]] {
                if d.iter().any(|&q| !(0.0..=1.0).contains(&q)) || (d.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(Error::Parameter(format!("factor {i} is not a distribution")));
                }
            }
            if !(xi[i] > 0.0 && xi_prime[i] > 0.0) {
                return Err(Error::Parameter("slack parameters must be positive".into()));
            }
            let ok = p[i]
                .iter()
                .zip(&p_prime[i])
                .all(|(&a, &b)| (b - a).abs() <= (a * xi[i]).sqrt() + xi_prime[i]);
            if !ok {
                return Err(Error::Parameter(format!("factor {i} violates the deviation hypothesis")));
            }
        }
        Ok(DeviationInstance {
            p,
            p_prime,
            xi,
            xi_prime,
            f,
        })
    }

    /// Draws factors, perturbations and slacks until the hypothesis holds.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, sizes: &[usize]) -> Self {
        loop {
            let p: Vec<Vec<f64>> = sizes.iter().map(|&s| random_distribution(rng, s, 0.3)).collect();
            let p_prime: Vec<Vec<f64>> = sizes.iter().map(|&s| random_distribution(rng, s, 0.3)).collect();
            let xi: Vec<f64> = sizes.iter().map(|_| 10f64.powf(rng.gen_range(-3.0..0.0))).collect();
            let xi_prime: Vec<f64> = sizes.iter().map(|_| 10f64.powf(rng.gen_range(-3.0..0.0))).collect();
            let joint: usize = sizes.iter().product();
            let f: Vec<f64> = (0..joint).map(|_| rng.gen_range(0.0..10.0)).collect();
            if let Ok(inst) = DeviationInstance::new(p, p_prime, xi, xi_prime, f) {
                return inst;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn joint(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for d in factors {
        let len = out.len();
        let mut next = Vec::with_capacity(len * d.len());
        for &q in d {
            next.extend(out.iter().map(|&o| o * q));
        }
        out = next;
    }
    out
}

/// Evaluates both sides of the factored deviation bound by full enumeration.
pub fn check_factored_deviation(inst: &DeviationInstance) -> InequalityCheck {
    let p = joint(&inst.p);
    let q = joint(&inst.p_prime);
    let lhs: f64 = p.iter().zip(&q).zip(&inst.f).map(|((a, b), f)| (a - b).abs() * f).sum();
    let radix = Radix::new(inst.p.iter().map(Vec::len).collect()).expect("positive sizes");
    let mut values = vec![0; inst.p.len()];
    let mut max_supp = 0.0f64;
    for (y, &fy) in inst.f.iter().enumerate() {
        radix.decode_into(y, &mut values).expect("in range");
        if values.iter().zip(&inst.p).all(|(&v, d)| d[v] > 0.0) {
            max_supp = max_supp.max(fy);
        }
    }
    let max_f = inst.f.iter().copied().fold(0.0, f64::max);
    let sqrt_term: f64 = inst
        .p
        .iter()
        .zip(&inst.xi)
        .map(|(d, &x)| d.iter().map(|&q| (q * x).sqrt()).sum::<f64>())
        .sum();
    let linear: f64 = inst
        .p
        .iter()
        .zip(&inst.xi_prime)
        .map(|(d, &x)| x * d.len() as f64)
        .sum();
    let rhs = max_supp * sqrt_term + 3.0 * max_f * linear;
    InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    }
}

/// `None` when `|x - y| <= sqrt(2 y (1-y) zeta) + zeta/3` fails; otherwise whether
/// `sqrt(y(1-y)) <= sqrt(x(1-x)) + 2.4 sqrt(zeta)` holds within `1e-12`.
pub fn check_sqrt_var(x: f64, y: f64, zeta: f64) -> Option<bool> {
    if (x - y).abs() > (2.0 * y * (1.0 - y) * zeta).sqrt() + zeta / 3.0 {
        return None;
    }
    Some((y * (1.0 - y)).sqrt() <= (x * (1.0 - x)).sqrt() + 2.4 * zeta.sqrt() + 1e-12)
}

/// Time-uniform Azuma envelope `(b - a) sqrt((T + 1)/2 ln(sqrt(T + 1)/delta))`.
pub fn azuma_envelope(t: u64, delta: f64, a: f64, b: f64) -> f64 {
    let t1 = t as f64 + 1.0;
    (b - a) * (0.5 * t1 * (t1.sqrt() / delta).ln()).sqrt()
}

/// Whether the running sum of `increments` (in `[-1, 1]`) ever reaches the envelope.
pub fn crosses_azuma(increments: impl IntoIterator<Item = f64>, delta: f64) -> bool {
    let mut sum = 0.0;
    for (k, x) in increments.into_iter().enumerate() {
        sum += x;
        if sum >= azuma_envelope(k as u64 + 1, delta, -1.0, 1.0) {
            return true;
        }
    }
    false
}

/// Fraction of `trials` Rademacher walks of length `horizon` that ever cross the envelope.
pub fn check_azuma_coverage<R: Rng + ?Sized>(rng: &mut R, trials: usize, horizon: u64, delta: f64) -> f64 {
    let envelope: Vec<f64> = (1..=horizon).map(|t| azuma_envelope(t, delta, -1.0, 1.0)).collect();
    let mut crossed = 0;
    for _ in 0..trials {
        let mut sum = 0.0;
        for e in &envelope {
            sum += if rng.gen::<bool>() { 1.0 } else { -1.0 };
            if sum >= *e {
                crossed += 1;
                break;
            }
        }
    }
    crossed as f64 / trials as f64
}

/// Compares `sum_i sum_x nu(x) alpha_i(x[Z_i])` over joint pairs of the
/// trajectory with `sum_i sum_{x' in X[Z_i]} nu(x') alpha_i(x')` over local counts,
/// using the transition scopes of `st`.
pub fn check_factored_count(st: &FactoredStructure, trajectory: &[usize], alpha: &[Vec<f64>]) -> Result<InequalityCheck> {
    if alpha.len() != st.num_state_factors() {
        return Err(Error::Parameter("one weight vector per scope is required".into()));
    }
    let mut joint_counts = vec![0u64; st.num_pairs()];
    for &x in trajectory {
        if x >= st.num_pairs() {
            return Err(Error::OutOfRange {
                what: "pair",
                index: x,
                size: st.num_pairs(),
            });
        }
        joint_counts[x] += 1;
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (i, a) in alpha.iter().enumerate() {
        let rows = st.transition_rows(i);
        if a.len() != st.transition_scope(i).cardinality() {
            return Err(Error::Parameter(format!("weights of scope {i} have the wrong length")));
        }
        let mut local = vec![0u64; a.len()];
        for (x, &c) in joint_counts.iter().enumerate() {
            if c > 0 {
                lhs += c as f64 * a[rows[x]];
                local[rows[x]] += c;
            }
        }
        rhs += local.iter().zip(a).map(|(&c, &w)| c as f64 * w).sum::<f64>();
    }
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9 * rhs.abs().max(1.0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub counterexamples: Vec<String>,
    pub detail: String,
    pub passed: bool,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<20} cases={:<8} {}", self.name, self.cases, self.detail)?;
        for c in &self.counterexamples {
            write!(f, "\n    counterexample: {c}")?;
        }
        Ok(())
    }
}

fn report(name: &'static str, cases: usize, counterexamples: Vec<String>, detail: String) -> CheckReport {
    CheckReport {
        name,
        cases,
        passed: counterexamples.is_empty(),
        counterexamples,
        detail,
    }
}

pub fn deviation_suite(seed: u64, instances: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let m = rng.gen_range(1..=3);
        let sizes: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=4)).collect();
        let inst = DeviationInstance::random(&mut rng, &sizes);
        let c = check_factored_deviation(&inst);
        if c.rhs > 0.0 {
            worst = worst.max(c.lhs / c.rhs);
        }
        if !c.holds {
            bad.push(format!("{inst:?} lhs={} rhs={}", c.lhs, c.rhs));
        }
    }
    report("factored-deviation", instances, bad, format!("max lhs/rhs = {worst:.4}"))
}

pub fn sqrt_var_suite() -> CheckReport {
    let mut bad = Vec::new();
    let mut cases = 0;
    for zeta in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
        for i in 0..=100 {
            for j in 0..=100 {
                let (x, y) = (i as f64 / 100.0, j as f64 / 100.0);
                match check_sqrt_var(x, y, zeta) {
                    Some(true) => cases += 1,
                    Some(false) => {
                        cases += 1;
                        bad.push(format!("x={x} y={y} zeta={zeta}"));
                    }
                    None => {}
                }
            }
        }
    }
    report("sqrt-var", cases, bad, "grid step 0.01".into())
}

pub fn azuma_suite(seed: u64, trials: usize, horizon: u64, delta: f64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = check_azuma_coverage(&mut rng, trials, horizon, delta);
    let limit = delta + 2.0 * (delta / trials as f64).sqrt();
    let bad = if rate <= limit {
        Vec::new()
    } else {
        vec![format!("violation rate {rate} > {limit}")]
    };
    report("azuma-coverage", trials, bad, format!("delta={delta} rate={rate:.4} limit={limit:.4}"))
}

pub fn factored_count_suite(seed: u64, trajectories: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for _ in 0..trajectories {
        let st = FactoredStructure::new(
            vec![rng.gen_range(2..=3), rng.gen_range(2..=3)],
            vec![rng.gen_range(2..=3)],
            vec![vec![0, 2], vec![0, 1, 2]],
            vec![vec![0]],
        )
        .expect("valid structure");
        let traj: Vec<usize> = (0..100).map(|_| rng.gen_range(0..st.num_pairs())).collect();
        let alpha: Vec<Vec<f64>> = st
            .transition_scopes()
            .iter()
            .map(|z| (0..z.cardinality()).map(|_| rng.gen_range(0.01..5.0)).collect())
            .collect();
        let c = check_factored_count(&st, &traj, &alpha).expect("consistent inputs");
        if !c.holds {
            bad.push(format!("lhs={} rhs={}", c.lhs, c.rhs));
        }
    }
    report("factored-count", trajectories, bad, "100-step trajectories, 2 scopes".into())
}

/// Full suite: 200 deviation instances, the SqrtVar grid, Azuma at delta = 0.5
/// (2000 trials, horizon 10^4) and 100 factored-count trajectories.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    vec![
        deviation_suite(seed, 200),
        sqrt_var_suite(),
        azuma_suite(seed ^ 0x5eed, 2000, 10_000, 0.5),
        factored_count_suite(seed ^ 0xc0de, 100),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_measures_have_zero_lhs() {
        let p = vec![vec![0.2, 0.8], vec![0.5, 0.25, 0.25]];
        let inst = DeviationInstance::new(p.clone(), p, vec![0.1, 0.1], vec![0.01, 0.01], vec![1.0; 6]).unwrap();
        let c = check_factored_deviation(&inst);
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn single_factor_total_variation() {
        let inst = DeviationInstance::new(
            vec![vec![0.5, 0.5]],
            vec![vec![0.6, 0.4]],
            vec![0.02],
            vec![0.01],
            vec![1.0, 1.0],
        )
        .unwrap();
        let c = check_factored_deviation(&inst);
        assert!((c.lhs - 0.2).abs() < 1e-15);
        assert!(c.holds);
    }

    #[test]
    fn hypothesis_enforced() {
        assert!(DeviationInstance::new(vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]], vec![0.01], vec![0.01], vec![1.0; 2]).is_err());
    }

    #[test]
    fn sqrt_var_identity_and_hypothesis() {
        assert_eq!(check_sqrt_var(0.3, 0.3, 0.01), Some(true));
        assert_eq!(check_sqrt_var(0.0, 1.0, 1e-4), None);
        assert_eq!(check_sqrt_var(0.5, 0.5, 1e-12), Some(true));
    }

    #[test]
    fn azuma_envelope_basics() {
        assert!(azuma_envelope(0, 0.1, -1.0, 1.0) > 0.0);
        assert!(!crosses_azuma(std::iter::repeat(0.0).take(10_000), 0.1));
        assert!(crosses_azuma(std::iter::repeat(1.0).take(10_000), 0.1));
    }

    #[test]
    fn unit_weights_count_steps() {
        let st = FactoredStructure::new(vec![2, 2], vec![2], vec![vec![0, 2], vec![1, 2]], vec![vec![0]]).unwrap();
        let traj: Vec<usize> = (0..37).map(|k| k % 8).collect();
        let alpha = vec![vec![1.0; 4], vec![1.0; 4]];
        let c = check_factored_count(&st, &traj, &alpha).unwrap();
        assert_eq!(c.lhs, 2.0 * 37.0);
        assert_eq!(c.rhs, 2.0 * 37.0);
        let full = FactoredStructure::new(vec![2, 2], vec![2], vec![vec![0, 1, 2], vec![0, 1, 2]], vec![vec![0]]).unwrap();
        let w: Vec<f64> = (0..8).map(|k| k as f64 + 0.5).collect();
        let c = check_factored_count(&full, &traj, &[w.clone(), w]).unwrap();
        assert_eq!(c.lhs, c.rhs);
    }
}
