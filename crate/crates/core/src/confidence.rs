//! Confidence thresholds and intervals for rewards and transition probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Peeling parameter of the time-uniform threshold.
pub const ETA: f64 = 1.12;
/// Absolute accuracy of Bernstein interval endpoints.
pub const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `[max(0, c - w), min(1, c + w)]`.
    pub fn around(center: f64, half_width: f64) -> Self {
        Interval {
            lo: (center - half_width).max(0.0),
            hi: (center + half_width).min(1.0),
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("confidence level {delta} outside (0,1)")))
    }
}

fn check_count(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::Parameter("count must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `beta_n(delta) = eta * ln(ln(n) ln(eta n) / (ln(eta)^2 delta))`, with both
/// inner logarithms floored at 1 so small counts stay finite.
pub fn beta(n: u64, delta: f64) -> Result<f64> {
    check_count(n)?;
    check_delta(delta)?;
    let n = n as f64;
    let l1 = n.ln().max(1.0);
    let l2 = (ETA * n).ln().max(1.0);
    let le = ETA.ln();
    Ok(ETA * (l1 * l2 / (le * le * delta)).ln())
}

/// `beta'_n(delta) = sqrt(2 (1 + 1/n) ln(sqrt(n+1)/delta) / n)`.
pub fn beta_prime(n: u64, delta: f64) -> Result<f64> {
    check_count(n)?;
    check_delta(delta)?;
    let n = n as f64;
    Ok((2.0 * (1.0 + 1.0 / n) * ((n + 1.0).sqrt() / delta).ln() / n).sqrt())
}

/// How the Hoeffding-type and empirical-Bernstein widths are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardMode {
    /// Larger of the two widths.
    #[default]
    Max,
    /// Smaller of the two widths.
    Min,
}

/// Unbiased sample variance from running sums; zero below two samples.
pub fn unbiased_variance(sum: f64, sum_sq: f64, n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0)
}

/// Half-width `max{ beta'_N / 2, sqrt(2 var beta_N / N) + 7 beta_N / (3N) }` (or the min).
pub fn reward_half_width(var: f64, n: u64, delta: f64, mode: RewardMode) -> Result<f64> {
    if !(0.0..=0.25).contains(&var) {
        return Err(Error::Parameter(format!("reward variance {var} outside [0, 1/4]")));
    }
    let hoeffding = 0.5 * beta_prime(n, delta)?;
    let b = beta(n, delta)?;
    let nf = n as f64;
    let bernstein = (2.0 * var * b / nf).sqrt() + 7.0 * b / (3.0 * nf);
    Ok(match mode {
        RewardMode::Max => hoeffding.max(bernstein),
        RewardMode::Min => hoeffding.min(bernstein),
    })
}

pub fn reward_interval(mean: f64, var: f64, n: u64, delta: f64, mode: RewardMode) -> Result<Interval> {
    if !(0.0..=1.0).contains(&mean) {
        return Err(Error::Parameter(format!("reward mean {mean} outside [0,1]")));
    }
    Ok(Interval::around(mean, reward_half_width(var, n, delta, mode)?))
}

/// `sqrt(2 q (1-q) beta / n) + beta / (3n) - |p - q|`; `q` belongs to the
/// Bernstein set around `p` exactly when this is nonnegative.
#[inline]
pub fn bernstein_slack(p: f64, q: f64, n: u64, beta: f64) -> f64 {
    let nf = n as f64;
    (2.0 * q * (1.0 - q) * beta / nf).sqrt() + beta / (3.0 * nf) - (p - q).abs()
}

/// Bernstein set `{q : |p - q| <= sqrt(2 q (1-q) beta / n) + beta / (3n)}` for a given threshold.
///
/// The slack is concave in `q`, so the set is an interval around `p`. Past the
/// linear term each endpoint is a root of `(q - p -+ c)^2 = a q (1 - q)`; the
/// root is taken in closed form and nudged inward until it is a member.
pub fn bernstein_interval_with_beta(p: f64, n: u64, beta: f64) -> Result<Interval> {
    check_count(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("empirical probability {p} outside [0,1]")));
    }
    if !(beta > 0.0) {
        return Err(Error::Parameter(format!("threshold {beta} must be positive")));
    }
    let nf = n as f64;
    let a = 2.0 * beta / nf;
    let c = beta / (3.0 * nf);
    let member = |q: f64| bernstein_slack(p, q, n, beta) >= 0.0;
    // larger root of (1 + a) q^2 - (2d + a) q + d^2 = 0
    let upper_root = |d: f64| {
        let b = 2.0 * d + a;
        let disc = (a * a + 4.0 * a * d * (1.0 - d)).max(0.0);
        (b + disc.sqrt()) / (2.0 * (1.0 + a))
    };
    let settle = |root: f64, toward_p: f64| {
        let mut q = root.clamp(0.0, 1.0);
        let mut step = ENDPOINT_TOL * 1e-3;
        while !member(q) {
            q = if toward_p > q { (q + step).min(p) } else { (q - step).max(p) };
            step *= 2.0;
        }
        q
    };
    let hi = if member(1.0) { 1.0 } else { settle(upper_root(p + c), p) };
    let lo = if member(0.0) { 0.0 } else { settle(1.0 - upper_root(1.0 - p + c), p) };
    Ok(Interval::new(lo, hi))
}

pub fn bernstein_interval(p: f64, n: u64, delta: f64) -> Result<Interval> {
    bernstein_interval_with_beta(p, n, beta(n, delta)?)
}

/// L1 deviation radius used by the factored UCRL baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "variant")]
pub enum L1Variant {
    /// `sqrt((2/N)(S ln 2 + ln(t(t+1)/delta)))` with a union bound over time `t`.
    WeissmanUnion { t: u64 },
    /// `sqrt((2/N)(1 + 1/N)(S ln 2 + ln(sqrt(N+1)/delta)))`.
    Laplace,
}

pub fn l1_radius(n: u64, num_values: usize, delta: f64, variant: L1Variant) -> Result<f64> {
    check_count(n)?;
    check_delta(delta)?;
    if num_values == 0 {
        return Err(Error::Parameter("factor must have at least one value".into()));
    }
    let nf = n as f64;
    let support = num_values as f64 * std::f64::consts::LN_2;
    Ok(match variant {
        L1Variant::WeissmanUnion { t } => {
            if t == 0 {
                return Err(Error::Parameter("time must be at least 1".into()));
            }
            let tf = t as f64;
            ((2.0 / nf) * (support + (tf * (tf + 1.0) / delta).ln())).sqrt()
        }
        L1Variant::Laplace => ((2.0 / nf) * (1.0 + 1.0 / nf) * (support + ((nf + 1.0).sqrt() / delta).ln())).sqrt(),
    })
}

/// Per-entry budget `delta / (3 m S_i |X[Z_i^p]|)` of a transition factor.
pub fn transition_delta(delta: f64, num_state_factors: usize, num_values: usize, num_rows: usize) -> f64 {
    delta / (3.0 * num_state_factors as f64 * num_values as f64 * num_rows as f64)
}

/// Per-row budget `delta / (3 l |X[Z_i^r]|)` of a reward factor.
pub fn reward_delta(delta: f64, num_reward_factors: usize, num_rows: usize) -> f64 {
    delta / (3.0 * num_reward_factors as f64 * num_rows as f64)
}

/// Which interval a coverage run rebuilds after every observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoverageTarget {
    /// `bernstein_interval` around the empirical frequency.
    Bernstein,
    /// `reward_interval` around the empirical mean with the unbiased variance.
    Reward(RewardMode),
}

/// Fraction of `trials` Bernoulli(`p`) streams in which `p` leaves the interval
/// rebuilt at some `n <= horizon`. Trial `j` draws from stream `j` of a
/// ChaCha8 generator seeded with `seed`, so the result does not depend on the thread count.
pub fn coverage_failure_rate(
    target: CoverageTarget,
    p: f64,
    trials: usize,
    horizon: u64,
    delta: f64,
    seed: u64,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    use rayon::prelude::*;

    check_delta(delta)?;
    check_count(horizon)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("coverage mean {p} outside [0,1]")));
    }
    let betas = (1..=horizon).map(|n| beta(n, delta)).collect::<Result<Vec<f64>>>()?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|j| -> Result<bool> {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let mut sum = 0.0;
            for n in 1..=horizon {
                if rng.gen_bool(p) {
                    sum += 1.0;
                }
                let mean = sum / n as f64;
                let iv = match target {
                    CoverageTarget::Bernstein => bernstein_interval_with_beta(mean, n, betas[n as usize - 1])?,
                    CoverageTarget::Reward(mode) => {
                        // Bernoulli draws: sum of squares equals the sum
                        let var = unbiased_variance(sum, sum, n).min(0.25);
                        reward_interval(mean, var, n, delta, mode)?
                    }
                };
                if !iv.contains(p) {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(failures.iter().filter(|&&f| f).count() as f64 / trials.max(1) as f64)
}
