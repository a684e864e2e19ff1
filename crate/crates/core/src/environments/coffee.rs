use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmdp::{FactoredMdp, FactoredStructure, RewardFactor, RewardKind, TransitionFactor};

pub const USER_HAS_COFFEE: usize = 0;
pub const ROBOT_HAS_COFFEE: usize = 1;
pub const WET: usize = 2;
pub const UMBRELLA: usize = 3;
pub const RAINING: usize = 4;
pub const LOCATION: usize = 5;
const ACTION: usize = 6;

pub const OFFICE: usize = 0;
pub const SHOP: usize = 1;

pub const GO: usize = 0;
pub const BUY: usize = 1;
pub const DELIVER: usize = 2;
pub const GET_UMBRELLA: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoffeeParams {
    pub buy_success: f64,
    pub deliver_success: f64,
    /// Probability that a delivery attempt empties the robot's cup (independent of success).
    pub deliver_spill: f64,
    pub umbrella_success: f64,
    pub rain_flip: f64,
    /// Rain probability after a reset.
    pub reset_rain: f64,
    /// Probability that a non-`Go` action also toggles the location.
    pub location_slip: f64,
    pub coffee_reward: f64,
    pub dry_reward: f64,
}

impl Default for CoffeeParams {
    fn default() -> Self {
        CoffeeParams {
            buy_success: 0.9,
            deliver_success: 0.9,
            deliver_spill: 0.9,
            umbrella_success: 0.9,
            rain_flip: 0.1,
            reset_rain: 0.3,
            location_slip: 0.05,
            coffee_reward: 0.9,
            dry_reward: 0.1,
        }
    }
}

fn bern(p: f64) -> Vec<f64> {
    vec![1.0 - p, p]
}

/// Builds a binary factor table by evaluating `prob_one` at every scope tuple.
fn table(st: &FactoredStructure, i: usize, prob_one: impl Fn(&[usize]) -> f64) -> Result<TransitionFactor> {
    let z = st.transition_scope(i);
    let mut full = vec![0; st.num_factors()];
    let mut local = vec![0; z.indices().len()];
    let rows = (0..z.cardinality())
        .map(|r| {
            z.radix().decode_into(r, &mut local)?;
            for (&j, &v) in z.indices().iter().zip(&local) {
                full[j] = v;
            }
            Ok(bern(prob_one(&full)))
        })
        .collect::<Result<Vec<_>>>()?;
    TransitionFactor::new(2, rows)
}

/// Six binary state factors, one action factor with four values.
///
/// Once the user has coffee every action resets the robot to the office,
/// dry, without umbrella or coffee, with rain redrawn.
pub fn coffee(p: &CoffeeParams) -> Result<FactoredMdp> {
    for v in [
        p.buy_success,
        p.deliver_success,
        p.deliver_spill,
        p.umbrella_success,
        p.rain_flip,
        p.reset_rain,
        p.location_slip,
        p.coffee_reward,
        p.dry_reward,
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Parameter(format!("Coffee parameter {v} outside [0,1]")));
        }
    }
    let st = FactoredStructure::new(
        vec![2; 6],
        vec![4],
        vec![
            vec![USER_HAS_COFFEE, ROBOT_HAS_COFFEE, LOCATION, ACTION],
            vec![USER_HAS_COFFEE, ROBOT_HAS_COFFEE, LOCATION, ACTION],
            vec![USER_HAS_COFFEE, WET, UMBRELLA, RAINING, ACTION],
            vec![USER_HAS_COFFEE, UMBRELLA, LOCATION, ACTION],
            vec![USER_HAS_COFFEE, RAINING],
            vec![USER_HAS_COFFEE, LOCATION, ACTION],
        ],
        vec![vec![USER_HAS_COFFEE], vec![WET]],
    )?;
    let reset = |x: &[usize]| x[USER_HAS_COFFEE] == 1;
    let delivering = |x: &[usize]| x[ACTION] == DELIVER && x[LOCATION] == OFFICE && x[ROBOT_HAS_COFFEE] == 1;
    let factors = vec![
        table(&st, USER_HAS_COFFEE, |x| {
            if !reset(x) && delivering(x) {
                p.deliver_success
            } else {
                0.0
            }
        })?,
        table(&st, ROBOT_HAS_COFFEE, |x| {
            if reset(x) {
                0.0
            } else if delivering(x) {
                1.0 - p.deliver_spill
            } else if x[ROBOT_HAS_COFFEE] == 1 {
                1.0
            } else if x[ACTION] == BUY && x[LOCATION] == SHOP {
                p.buy_success
            } else {
                0.0
            }
        })?,
        table(&st, WET, |x| {
            if reset(x) {
                0.0
            } else if x[WET] == 1 || (x[ACTION] == GO && x[RAINING] == 1 && x[UMBRELLA] == 0) {
                1.0
            } else {
                0.0
            }
        })?,
        table(&st, UMBRELLA, |x| {
            if reset(x) {
                0.0
            } else if x[UMBRELLA] == 1 {
                1.0
            } else if x[ACTION] == GET_UMBRELLA && x[LOCATION] == OFFICE {
                p.umbrella_success
            } else {
                0.0
            }
        })?,
        table(&st, RAINING, |x| {
            if reset(x) {
                p.reset_rain
            } else if x[RAINING] == 1 {
                1.0 - p.rain_flip
            } else {
                p.rain_flip
            }
        })?,
        table(&st, LOCATION, |x| {
            if reset(x) {
                return 0.0;
            }
            let toggle = if x[ACTION] == GO { 1.0 } else { p.location_slip };
            if x[LOCATION] == SHOP {
                1.0 - toggle
            } else {
                toggle
            }
        })?,
    ];
    FactoredMdp::new(
        st,
        factors,
        vec![
            RewardFactor::from_means(RewardKind::Constant, &[0.0, p.coffee_reward])?,
            RewardFactor::from_means(RewardKind::Constant, &[p.dry_reward, 0.0])?,
        ],
    )
}
