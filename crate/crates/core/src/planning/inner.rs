use tracing::warn;

/// States sorted by `u` descending, ties to the smaller index.
pub fn descending_order(u: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    order
}

/// Optimistic distribution within entry-wise caps `lo <= q <= hi`.
///
/// Starts from `lo` and pours the missing mass into states in `order`, each up
/// to its cap. If the caps cannot reach unit mass the remainder is spread in
/// proportion to `hi` and a warning is logged.
pub fn inner_maximization_sorted(order: &[usize], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let mut q = lo.to_vec();
    let mut deficit = 1.0 - lo.iter().sum::<f64>();
    for &j in order {
        if deficit <= 0.0 {
            break;
        }
        let add = (hi[j] - q[j]).min(deficit);
        q[j] += add;
        deficit -= add;
    }
    if deficit > 1e-12 {
        let mass: f64 = hi.iter().sum();
        warn!(deficit, upper_mass = mass, "confidence caps cannot reach unit mass");
        let scale = if mass > 0.0 { deficit / mass } else { 0.0 };
        for (qj, &h) in q.iter_mut().zip(hi) {
            *qj += if mass > 0.0 { scale * h } else { deficit / hi.len() as f64 };
        }
    }
    q
}

pub fn inner_maximization(u: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    inner_maximization_sorted(&descending_order(u), lo, hi)
}

/// `sum_j q_j u_j` of the greedy distribution, without materializing `q`.
#[inline]
pub(crate) fn inner_value(order: &[usize], u: &[f64], lo: &[f64], hi: &[f64], lo_sum: f64, lo_dot: f64) -> f64 {
    let mut deficit = 1.0 - lo_sum;
    let mut value = lo_dot;
    for &j in order {
        if deficit <= 0.0 {
            return value;
        }
        let add = (hi[j] - lo[j]).min(deficit);
        value += add * u[j];
        deficit -= add;
    }
    if deficit > 1e-12 {
        let mass: f64 = hi.iter().sum();
        if mass > 0.0 {
            value += deficit / mass * hi.iter().zip(u).map(|(h, v)| h * v).sum::<f64>();
        }
    }
    value
}
