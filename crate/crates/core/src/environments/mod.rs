//! Benchmark factored MDPs, addressable by name.

mod coffee;
pub mod random;
mod riverswim;
mod sysadmin;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub use coffee::{coffee, CoffeeParams};
pub use riverswim::{riverswim, riverswim_product, RiverSwimParams, RiverSwimProductParams};
pub use sysadmin::{neighbours, sysadmin, SysAdminParams, Topology};

use crate::error::{Error, Result};
use crate::fmdp::FactoredMdp;

pub const ENV_NAMES: [&str; 5] = ["riverswim", "riverswim-product", "coffee", "sysadmin-circle", "sysadmin-3leg"];

/// A resolved environment: model, start state and the parameters used.
#[derive(Debug, Clone)]
pub struct EnvSpec {
    pub name: String,
    pub params: Value,
    pub mdp: FactoredMdp,
    pub initial_state: usize,
}

fn params<P: DeserializeOwned + Serialize + Default>(overrides: &Value) -> Result<(P, Value)> {
    let p: P = if overrides.is_null() {
        P::default()
    } else {
        serde_json::from_value(overrides.clone())?
    };
    let v = serde_json::to_value(&p)?;
    Ok((p, v))
}

/// Build an environment by name; `overrides` is a JSON object of parameter
/// fields (missing fields keep their defaults) or `null`.
pub fn make_env(name: &str, overrides: &Value) -> Result<EnvSpec> {
    let (mdp, params, initial_state) = match name {
        "riverswim" => {
            let (p, v) = params::<RiverSwimParams>(overrides)?;
            (riverswim(&p)?, v, 0)
        }
        "riverswim-product" => {
            let (p, v) = params::<RiverSwimProductParams>(overrides)?;
            (riverswim_product(&p)?, v, 0)
        }
        "coffee" => {
            let (p, v) = params::<CoffeeParams>(overrides)?;
            (coffee(&p)?, v, 0)
        }
        "sysadmin-circle" | "sysadmin-3leg" => {
            let (p, v) = params::<SysAdminParams>(overrides)?;
            let topology = if name == "sysadmin-circle" {
                Topology::Circle
            } else {
                Topology::ThreeLegged
            };
            let m = sysadmin(topology, &p)?;
            let all_working = m.structure().num_states() - 1;
            (m, v, all_working)
        }
        _ => {
            return Err(Error::Unknown {
                kind: "environment",
                name: name.to_string(),
            })
        }
    };
    Ok(EnvSpec {
        name: name.to_string(),
        params,
        mdp,
        initial_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmdp::FactoredStructure;
    use crate::oracles::{average_reward_vi, compute_diameter_report, min_hitting_times};

    fn sizes(name: &str) -> (usize, usize, usize) {
        let st: &FactoredStructure = &make_env(name, &Value::Null).unwrap().mdp.structure().clone();
        (st.num_states(), st.num_actions(), st.num_pairs())
    }

    #[test]
    fn stated_sizes() {
        assert_eq!(sizes("riverswim-product"), (36, 4, 144));
        assert_eq!(sizes("coffee"), (64, 4, 256));
        assert_eq!(sizes("sysadmin-circle"), (128, 8, 1024));
        assert_eq!(sizes("sysadmin-3leg"), (128, 8, 1024));
    }

    #[test]
    fn scope_sizes() {
        let rs = make_env("riverswim-product", &Value::Null).unwrap().mdp;
        for z in rs.structure().transition_scopes() {
            assert_eq!(z.cardinality(), 12);
        }
        let circle = make_env("sysadmin-circle", &Value::Null).unwrap().mdp;
        for z in circle.structure().transition_scopes() {
            assert_eq!(z.cardinality(), 32);
        }
        let leg = make_env("sysadmin-3leg", &Value::Null).unwrap().mdp;
        assert_eq!(leg.structure().transition_scope(0).cardinality(), 16);
        for z in &leg.structure().transition_scopes()[1..] {
            assert_eq!(z.cardinality(), 32);
        }
        assert_eq!(
            neighbours(Topology::ThreeLegged, 7),
            vec![None, Some(0), Some(1), Some(0), Some(3), Some(0), Some(5)]
        );
    }

    #[test]
    fn overrides_and_unknown_names() {
        let e = make_env("riverswim", &serde_json::json!({"chain_length": 4})).unwrap();
        assert_eq!(e.mdp.structure().num_states(), 4);
        assert_eq!(e.params["chain_length"], 4);
        assert!(make_env("riverswim", &serde_json::json!({"chain_len": 4})).is_err());
        assert!(matches!(make_env("gridworld", &Value::Null), Err(Error::Unknown { .. })));
        assert!(make_env("sysadmin-circle", &serde_json::json!({"machines": 1})).is_err());
    }

    #[test]
    fn coffee_resets_from_any_delivered_state() {
        let m = make_env("coffee", &Value::Null).unwrap().mdp;
        let st = m.structure();
        for s in 0..st.num_states() {
            let v = st.state_radix().decode(s).unwrap();
            if v[coffee::USER_HAS_COFFEE] == 0 {
                continue;
            }
            for a in 0..4 {
                let p = m.joint_transition(s, a).unwrap();
                // only the rain factor (index 4, stride 16) may be nonzero
                for (y, &q) in p.iter().enumerate() {
                    if y != 0 && y != 16 {
                        assert_eq!(q, 0.0);
                    }
                }
                assert!((p[16] - 0.3).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sysadmin_idle_keeps_all_failed() {
        let m = make_env("sysadmin-circle", &Value::Null).unwrap().mdp;
        let p = m.joint_transition(0, 7).unwrap();
        assert_eq!(p[0], 1.0);
        // rebooting still reaches the all-working state
        let flat = m.flatten().unwrap();
        let h = min_hitting_times(&flat, 127).unwrap();
        assert!(h[0].is_finite() && h[0] > 0.0);
    }

    #[test]
    fn every_environment_is_communicating() {
        for name in ENV_NAMES {
            let m = make_env(name, &Value::Null).unwrap().mdp;
            let r = compute_diameter_report(&m).unwrap();
            assert!(r.diameter.is_finite() && r.diameter > 0.0, "{name}");
            let g = average_reward_vi(&m.flatten().unwrap(), 1e-8, 1_000_000).unwrap();
            eprintln!("{name}: g* = {:.15}, D = {:.6}", g.gain, r.diameter);
        }
    }
}
