use dbn_ucrl::environments::{make_env, ENV_NAMES};
use dbn_ucrl::fmdp::FlatMdp;
use dbn_ucrl::oracles::{
    average_reward_vi, compute_diameter_report, min_hitting_times, regret_constant, HittingTable,
    DEFAULT_MAX_ITER, DEFAULT_SPAN_TOL,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

// (env, g*, D, c(M)) computed once by the oracles and frozen
const FIXTURES: [(&str, f64, f64, f64); 5] = [
    ("riverswim", 0.4286224290503071, 14.722337914757734, 36.00812983026626),
    ("riverswim-product", 1.040962053760168, 21.766954489954017, 263.7924764103848),
    ("coffee", 0.2495180039764419, 4433.547348905434, 37614.006151318266),
    ("sysadmin-circle", 6.5032477233409125, 25.01787470765297, 2000.691999371033),
    ("sysadmin-3leg", 6.526587840713724, 30.622487600020545, 2359.151916243454),
];

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn environment_fixtures() {
    assert_eq!(FIXTURES.map(|f| f.0), ENV_NAMES);
    for (name, g, d, c) in FIXTURES {
        let env = make_env(name, &Value::Null).unwrap();
        let gain = average_reward_vi(&env.mdp.flatten().unwrap(), DEFAULT_SPAN_TOL, DEFAULT_MAX_ITER).unwrap();
        let report = compute_diameter_report(&env.mdp).unwrap();
        assert!(rel_close(gain.gain, g, 1e-8), "{name}: g* {} vs {g}", gain.gain);
        assert!(rel_close(report.diameter, d, 1e-8), "{name}: D {} vs {d}", report.diameter);
        let cm = regret_constant(&env.mdp, &report);
        assert!(rel_close(cm, c, 1e-8), "{name}: c(M) {cm} vs {c}");
    }
}

/// Batch-means estimate of the long-run reward of a stationary policy.
fn simulate_gain(env: &dbn_ucrl::environments::EnvSpec, policy: &[usize], steps: u64, batches: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut rewards = vec![0.0; env.mdp.structure().num_reward_factors()];
    let mut state = env.initial_state;
    // burn in so the batches start near stationarity
    for _ in 0..10_000 {
        state = env.mdp.step_into(state, policy[state], &mut rng, &mut rewards).0;
    }
    let per = steps / batches;
    let mut means = Vec::with_capacity(batches as usize);
    for _ in 0..batches {
        let mut sum = 0.0;
        for _ in 0..per {
            let (next, r) = env.mdp.step_into(state, policy[state], &mut rng, &mut rewards);
            sum += r;
            state = next;
        }
        means.push(sum / per as f64);
    }
    let b = batches as f64;
    let mean = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (mean, (var / b).sqrt())
}

#[test]
fn riverswim_gain_matches_long_simulation() {
    let env = make_env("riverswim", &Value::Null).unwrap();
    let g = average_reward_vi(&env.mdp.flatten().unwrap(), DEFAULT_SPAN_TOL, DEFAULT_MAX_ITER).unwrap();
    let (mean, se) = simulate_gain(&env, &g.policy, 10_000_000, 100);
    assert!((mean - g.gain).abs() <= 3.0 * se, "simulated {mean} +- {se} vs {}", g.gain);
}

fn greedy_hitting_policy(m: &FlatMdp, target: usize, h: &[f64]) -> Vec<usize> {
    (0..m.num_states())
        .map(|s| {
            let mut best = (f64::INFINITY, 0);
            for a in 0..m.num_actions() {
                let v: f64 = m
                    .row(s, a)
                    .iter()
                    .enumerate()
                    .map(|(y, p)| if y == target { 0.0 } else { p * h[y] })
                    .sum();
                if v < best.0 - 1e-12 {
                    best = (v, a);
                }
            }
            best.1
        })
        .collect()
}

#[test]
fn riverswim_hitting_time_matches_simulation() {
    let env = make_env("riverswim", &Value::Null).unwrap();
    let flat = env.mdp.flatten().unwrap();
    let target = flat.num_states() - 1;
    let h = min_hitting_times(&flat, target).unwrap();
    let policy = greedy_hitting_policy(&flat, target, &h);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let episodes = 100_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..episodes {
        let mut s = 0;
        let mut steps = 0.0;
        while s != target {
            s = dbn_ucrl::fmdp::sample_categorical(flat.row(s, policy[s]), &mut rng);
            steps += 1.0;
        }
        sum += steps;
        sum_sq += steps * steps;
    }
    let n = episodes as f64;
    let mean = sum / n;
    let se = ((sum_sq / n - mean * mean) / (n - 1.0)).sqrt();
    assert!((mean - h[0]).abs() <= 3.0 * se, "simulated {mean} +- {se} vs {}", h[0]);
}

/// Plain value iteration on the target-absorbing problem, from zero.
fn hitting_by_value_iteration(m: &FlatMdp, target: usize) -> Vec<f64> {
    let n = m.num_states();
    let mut h = vec![0.0; n];
    loop {
        let next: Vec<f64> = (0..n)
            .map(|s| {
                if s == target {
                    return 0.0;
                }
                (0..m.num_actions())
                    .map(|a| 1.0 + m.row(s, a).iter().zip(&h).map(|(p, v)| p * v).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let diff = next.iter().zip(&h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        h = next;
        if diff < 1e-12 {
            return h;
        }
    }
}

#[test]
fn hitting_table_matches_value_iteration() {
    for name in ["riverswim", "riverswim-product"] {
        let flat = make_env(name, &Value::Null).unwrap().mdp.flatten().unwrap();
        let table = HittingTable::compute(&flat).unwrap();
        for target in 0..flat.num_states() {
            let h = hitting_by_value_iteration(&flat, target);
            for (s, v) in h.iter().enumerate() {
                assert!((table.get(s, target) - v).abs() <= 1e-7 * v.max(1.0), "{name} {s}->{target}");
            }
        }
    }
}

#[test]
fn factored_diameters_never_exceed_diameter() {
    for name in ENV_NAMES {
        let r = compute_diameter_report(&make_env(name, &Value::Null).unwrap().mdp).unwrap();
        assert!(r.factored.iter().flatten().all(|&d| d <= r.diameter + 1e-9), "{name}");
    }
}
