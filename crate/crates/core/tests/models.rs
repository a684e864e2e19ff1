use dbn_ucrl::environments::random::random_fmdp;
use dbn_ucrl::environments::{make_env, ENV_NAMES};
use dbn_ucrl::fmdp::{read_model, write_model};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

#[test]
fn shipped_models_are_consistent() {
    for name in ENV_NAMES {
        let env = make_env(name, &Value::Null).unwrap();
        let m = &env.mdp;
        let st = m.structure();
        let flat = m.flatten().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rewards = vec![0.0; st.num_reward_factors()];
        for s in 0..st.num_states() {
            for a in 0..st.num_actions() {
                let p = m.joint_transition(s, a).unwrap();
                assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "{name} ({s},{a})");
                assert_eq!(p.as_slice(), flat.row(s, a));
                let r = m.mean_reward(s, a).unwrap();
                assert!((r - flat.reward(s, a)).abs() <= 1e-12);
                assert!(r >= 0.0 && r <= st.num_reward_factors() as f64);
                let (next, collapsed) = m.step_into(s, a, &mut rng, &mut rewards);
                assert!(next < st.num_states());
                assert!((0.0..=st.num_reward_factors() as f64).contains(&collapsed));
                assert!(p[next] > 0.0);
            }
        }
    }
}

#[test]
fn model_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ENV_NAMES {
        let m = make_env(name, &Value::Null).unwrap().mdp;
        let path = dir.path().join(format!("{name}.json"));
        write_model(&m, &path).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back.transition_factors(), m.transition_factors());
        assert_eq!(back.reward_factors(), m.reward_factors());
        assert_eq!(back.structure().to_spec(), m.structure().to_spec());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn random_models_flatten_to_products(seed in any::<u64>(), m in 1usize..=3, k in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = vec![2; m];
        let mdp = random_fmdp(&mut rng, sizes, vec![2; k], 2).unwrap();
        let flat = mdp.flatten().unwrap();
        let st = mdp.structure();
        for s in 0..st.num_states() {
            for a in 0..st.num_actions() {
                let row = flat.row(s, a);
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                let joint = mdp.joint_transition(s, a).unwrap();
                prop_assert_eq!(row, joint.as_slice());
            }
        }
    }
}
