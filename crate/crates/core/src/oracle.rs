//! Independent references: the convolution square root, analytic Gaussian
//! dephasing and weak-coupling golden-rule rates.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{AtaError, Result};
use crate::scalar::{Real, C};
use crate::spectral::{bath_correlation, Correlator, SampledPsd};

/// `max_t ||(g * g)(t) - J(t)||_max / max_t ||J(t)||_max`, with the
/// convolution summed directly (circularly) on the shared time grid.
pub fn convolution_check<T: Real>(g: &Correlator<T>, j: &Correlator<T>) -> Result<T> {
    if g.grid() != j.grid() || g.channels() != j.channels() {
        return Err(AtaError::GridMismatch("g and J must share a grid and channel count".into()));
    }
    let n = g.len();
    let c = g.channels();
    let half = g.t0_index();
    let dt = g.dt();
    let mut worst = T::zero();
    let mut scale = T::zero();
    for t in 0..n {
        let mut acc = vec![C::<T>::zero(); c * c];
        for s in 0..n {
            // t_t - t_s = t_{t - s + N/2}.
            let d = (t + n + half - s) % n;
            for a in 0..c {
                for b in 0..c {
                    for k in 0..c {
                        acc[a * c + b] = acc[a * c + b] + g.entry(d, a, k) * g.entry(s, k, b);
                    }
                }
            }
        }
        for a in 0..c {
            for b in 0..c {
                let jv = j.entry(t, a, b);
                scale = scale.max(jv.norm());
                worst = worst.max((acc[a * c + b] * dt - jv).norm());
            }
        }
    }
    if scale == T::zero() {
        return Ok(if worst == T::zero() { T::zero() } else { T::infinity() });
    }
    Ok(worst / scale)
}

/// Normalized coherence `|rho_01(t)| / |rho_01(0)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DephasingCurve<T> {
    pub times: Vec<T>,
    pub coherence: Vec<T>,
}

/// Refinement of the correlator time step used by the dephasing quadrature.
const DEPHASING_REFINE: usize = 16;

/// `exp(-2 gamma h(t))` with `h(t) = 2 integral_0^t (t - u) J(u) du`, for a
/// qubit coupled through `sigma_z`. The integral uses the trapezoid rule on
/// the correlator time step refined 16 times, with `J` evaluated exactly
/// between grid points.
pub fn analytic_dephasing<T: Real>(psd: &SampledPsd<T>, gamma: T, times: &[T]) -> Result<DephasingCurve<T>> {
    if psd.channels() != 1 {
        return Err(AtaError::InvalidParameter("dephasing oracle needs a scalar PSD".into()));
    }
    let asym = psd.even_asymmetry();
    if asym > T::lit(1e-10) {
        return Err(AtaError::NotEven {
            asymmetry: asym.as_f64(),
        });
    }
    let jc = bath_correlation(psd);
    let ev = jc.evaluator();
    let step = psd.grid().dt() / T::from_count(DEPHASING_REFINE);
    let coherence = times
        .iter()
        .map(|&t| {
            if t <= T::zero() || gamma == T::zero() {
                return T::one();
            }
            let pieces = (t / step).ceil().to_usize().unwrap_or(1).max(1);
            let h = t / T::from_count(pieces);
            let f = |u: T| (t - u) * ev.eval_scalar(u).re;
            let inner = (1..pieces).map(|k| f(T::from_count(k) * h)).sum::<T>();
            let integral = h * ((f(T::zero()) + f(t)) / T::lit(2.0) + inner);
            (-T::lit(2.0) * gamma * T::lit(2.0) * integral).exp()
        })
        .collect();
    Ok(DephasingCurve {
        times: times.to_vec(),
        coherence,
    })
}

/// Weak-coupling transition rates of a two-level system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenRule<T> {
    /// `2 pi gamma J~(omega_0)`.
    pub down: T,
    /// `2 pi gamma J~(-omega_0)`.
    pub up: T,
    /// `up / (up + down)`; `None` when both rates vanish.
    pub excited_population: Option<T>,
}

pub fn golden_rule_rates<T: Real>(psd: &SampledPsd<T>, gamma: T, omega0: T) -> Result<GoldenRule<T>> {
    if psd.channels() != 1 {
        return Err(AtaError::InvalidParameter("golden rule needs a scalar PSD".into()));
    }
    let grid = psd.grid();
    let lookup = |w: T| {
        grid.nearest_index(w).map(|k| psd.scalar(k)).ok_or_else(|| {
            AtaError::DomainError(format!("frequency {w} is outside the grid"))
        })
    };
    let down = T::TAU() * gamma * lookup(omega0)?;
    let up = T::TAU() * gamma * lookup(-omega0)?;
    let total = up + down;
    Ok(GoldenRule {
        down,
        up,
        excited_population: (total > T::zero()).then(|| up / total),
    })
}
