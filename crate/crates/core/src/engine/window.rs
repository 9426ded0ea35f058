use crate::planner::SimulationPlan;
use crate::scalar::{round_half_away, Real};

/// `n_pm(t) = round((t pm tau_c) / delta_xi)`, ties away from zero.
pub fn active_window<T: Real>(t: T, plan: &SimulationPlan<T>) -> (i64, i64) {
    (
        round_half_away((t - plan.tau_c) / plan.delta_xi),
        round_half_away((t + plan.tau_c) / plan.delta_xi),
    )
}

/// Inclusive train-index range `[n_-(t_{m-1}), n_+(t_m)]` held during step
/// `m` (1-based). It contains every ancilla whose coupling interval meets the
/// step, plus possibly uncoupled edge ancillas from the rounding.
pub fn step_window<T: Real>(m: usize, plan: &SimulationPlan<T>) -> (i64, i64) {
    let (lo, _) = active_window(plan.time(m - 1), plan);
    let (_, hi) = active_window(plan.time(m), plan);
    (lo, hi)
}

/// Largest per-train window over all steps of the plan.
pub fn max_window_len<T: Real>(plan: &SimulationPlan<T>) -> usize {
    (1..=plan.steps)
        .map(|m| {
            let (lo, hi) = step_window(m, plan);
            (hi - lo + 1).max(0) as usize
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(delta_xi: f64, tau_c: f64, delta_t: f64, total: f64) -> SimulationPlan<f64> {
        SimulationPlan::explicit(delta_xi, tau_c, delta_t, 8, total).unwrap()
    }

    #[test]
    fn window_examples() {
        let p = plan(0.5, 2.0, 0.25, 4.0);
        assert_eq!(active_window(3.0, &p), (2, 10));
        assert_eq!(active_window(0.0, &p), (-4, 4));
        assert_eq!(active_window(0.25, &p), (-4, 5));
    }

    #[test]
    fn window_contains_every_coupled_ancilla() {
        let p = plan(0.3, 0.95, 0.1, 3.0);
        for m in 1..=p.steps {
            let (lo, hi) = step_window(m, &p);
            let (t0, t1) = (p.time(m - 1), p.time(m));
            for n in lo - 5..=hi + 5 {
                let xi = n as f64 * p.delta_xi;
                let coupled = xi - p.tau_c < t1 && xi + p.tau_c > t0;
                if coupled {
                    assert!(n >= lo && n <= hi, "step {m}, ancilla {n}");
                }
            }
        }
    }

    #[test]
    fn window_length_is_register_size_plus_edge() {
        let p = plan(0.4, 1.2, 0.1, 2.0);
        let len = max_window_len(&p);
        assert!(len == p.window_size || len == p.window_size + 1, "{len} vs {}", p.window_size);
    }
}
