use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{AtaError, Result};
use crate::scalar::Real;

use super::correlator::Correlator;
use super::psd::SampledPsd;

/// Characteristic bath scales.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathScales<T> {
    /// Interaction rate `Gamma = 4 gamma [integral ||g||_{2,1} dt]^2`.
    pub big_gamma: T,
    /// Correlation time `tau = integral ||g t||_{2,1} / integral ||g||_{2,1}`.
    pub tau: T,
    /// `Gamma` of the filtered correlator.
    pub big_gamma_f: T,
    /// `tau` of the filtered correlator.
    pub tau_f: T,
    /// Bare coupling `gamma`.
    pub gamma: T,
    /// Set when the jump correlator vanishes identically.
    pub zero_bath: bool,
}

/// Quadrature settings for the time integrals of `||g||_{2,1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalesOptions {
    /// Time-grid refinement applied (by band-limited interpolation) before
    /// the trapezoid rule. The `|t|` weight has a kink at `t = 0` which the
    /// trapezoid rule only resolves to `O(dt^2)`.
    pub refine: usize,
}

impl Default for ScalesOptions {
    fn default() -> Self {
        Self { refine: 16 }
    }
}

impl ScalesOptions {
    fn factor_for(&self, n: usize) -> usize {
        // Keep the refined grid at a few hundred thousand points at most.
        let cap = ((1usize << 18) / n.max(1)).max(1);
        self.refine.min(cap).max(1).next_power_of_two()
    }
}

/// `(integral ||k(t)||_{2,1} dt, integral |t| ||k(t)||_{2,1} dt)` by the
/// trapezoid rule on a refined periodic grid.
pub fn norm21_moments<T: Real>(kernel: &Correlator<T>, opts: ScalesOptions) -> Result<(T, T)> {
    let fine = kernel.upsample(opts.factor_for(kernel.len()))?;
    let n = fine.channels();
    let dt = fine.dt();
    let mut m0 = T::zero();
    let mut m1 = T::zero();
    for j in 0..fine.len() {
        let mut norm = T::zero();
        for b in 0..n {
            let col: T = (0..n).map(|a| fine.entry(j, a, b).norm_sqr()).sum();
            norm = norm + col.sqrt();
        }
        m0 = m0 + norm;
        m1 = m1 + norm * Float::abs(fine.time(j));
    }
    Ok((m0 * dt, m1 * dt))
}

fn rate_and_time<T: Real>(kernel: &Correlator<T>, gamma: T, opts: ScalesOptions) -> Result<(T, T, bool)> {
    let (m0, m1) = norm21_moments(kernel, opts)?;
    if m0 <= T::zero() || kernel.is_zero() {
        return Ok((T::zero(), T::zero(), true));
    }
    Ok((T::lit(4.0) * gamma * m0 * m0, m1 / m0, false))
}

/// `Gamma, tau` from `g` and `Gamma_f, tau_f` from `g_f`.
pub fn bath_scales<T: Real>(g: &Correlator<T>, g_f: &Correlator<T>, gamma: T) -> Result<BathScales<T>> {
    bath_scales_with(g, g_f, gamma, ScalesOptions::default())
}

pub fn bath_scales_with<T: Real>(
    g: &Correlator<T>,
    g_f: &Correlator<T>,
    gamma: T,
    opts: ScalesOptions,
) -> Result<BathScales<T>> {
    if g.grid() != g_f.grid() || g.channels() != g_f.channels() {
        return Err(AtaError::GridMismatch(
            "g and g_f must share a grid and channel count".into(),
        ));
    }
    if !(gamma >= T::zero()) || !gamma.is_finite() {
        return Err(AtaError::InvalidParameter(format!(
            "coupling gamma must be finite and >= 0, got {gamma}"
        )));
    }
    let (big_gamma, tau, zero_bath) = rate_and_time(g, gamma, opts)?;
    let (big_gamma_f, tau_f, _) = rate_and_time(g_f, gamma, opts)?;
    Ok(BathScales {
        big_gamma,
        tau,
        big_gamma_f,
        tau_f,
        gamma,
        zero_bath,
    })
}

/// The discretization error functional `epsilon(Omega)` built from the PSD
/// tails, evaluated for any cutoff.
#[derive(Clone, Debug)]
pub struct DiscretizationError<T> {
    omegas: Vec<T>,
    norms: Vec<T>,
    second_norms: Vec<T>,
    g_integral: T,
}

impl<T: Real> DiscretizationError<T> {
    pub fn new(psd: &SampledPsd<T>, g: &Correlator<T>) -> Result<Self> {
        Self::with_options(psd, g, ScalesOptions::default())
    }

    pub fn with_options(psd: &SampledPsd<T>, g: &Correlator<T>, opts: ScalesOptions) -> Result<Self> {
        let (m0, _) = norm21_moments(g, opts)?;
        if m0 <= T::zero() {
            return Err(AtaError::ZeroBath);
        }
        Ok(Self {
            omegas: psd.grid().omegas(),
            norms: psd.values().iter().map(|m| m.norm_11()).collect(),
            second_norms: psd.second_derivative().iter().map(|m| m.norm_11()).collect(),
            g_integral: m0,
        })
    }

    /// `2 integral_{|omega| > Omega} f` for the piecewise-linear interpolant of
    /// the samples `f`.
    fn tail(&self, f: &[T], cutoff: T) -> T {
        let half = T::lit(0.5);
        let mut total = T::zero();
        for k in 0..self.omegas.len() - 1 {
            let (a, b) = (self.omegas[k], self.omegas[k + 1]);
            let (fa, fb) = (f[k], f[k + 1]);
            let lerp = |x: T| fa + (fb - fa) * (x - a) / (b - a);
            // Right tail: [max(a, cutoff), b].
            if b > cutoff {
                let lo = a.max(cutoff);
                total = total + (b - lo) * (lerp(lo) + fb) * half;
            }
            // Left tail: [a, min(b, -cutoff)].
            if a < -cutoff {
                let hi = b.min(-cutoff);
                total = total + (hi - a) * (fa + lerp(hi)) * half;
            }
        }
        T::lit(2.0) * total
    }

    pub fn epsilon1(&self, cutoff: T) -> T {
        self.tail(&self.norms, cutoff)
    }

    pub fn epsilon2(&self, cutoff: T) -> T {
        self.tail(&self.second_norms, cutoff)
    }

    /// `epsilon(Omega) = 2 sqrt(eps1 eps2) / [integral ||g||_{2,1}]^2`.
    pub fn eval(&self, cutoff: T) -> T {
        let e1 = self.epsilon1(cutoff);
        let e2 = self.epsilon2(cutoff);
        T::lit(2.0) * (e1 * e2).sqrt() / (self.g_integral * self.g_integral)
    }
}

/// `epsilon(Omega)` for a single cutoff.
pub fn discretization_epsilon<T: Real>(psd: &SampledPsd<T>, g: &Correlator<T>, cutoff: T) -> Result<T> {
    Ok(DiscretizationError::new(psd, g)?.eval(cutoff))
}

/// Smallest grid frequency `Omega >= 1/tau` with `epsilon(Omega) < epsilon`.
pub fn uv_cutoff<T: Real>(psd: &SampledPsd<T>, g: &Correlator<T>, tau: T, epsilon: T) -> Result<T> {
    let functional = DiscretizationError::new(psd, g)?;
    uv_cutoff_with(&functional, psd, tau, epsilon)
}

pub fn uv_cutoff_with<T: Real>(
    functional: &DiscretizationError<T>,
    psd: &SampledPsd<T>,
    tau: T,
    epsilon: T,
) -> Result<T> {
    if !(epsilon > T::zero()) {
        return Err(AtaError::InvalidParameter(format!(
            "target accuracy must be positive, got {epsilon}"
        )));
    }
    if !(tau > T::zero()) {
        return Err(AtaError::ZeroBath);
    }
    let grid = psd.grid();
    let n = grid.n_points();
    let not_found = || AtaError::CutoffNotOnGrid {
        omega_max: grid.omega_max().as_f64(),
    };
    let lo = grid.ceil_index(T::one() / tau).ok_or_else(not_found)?;
    let ok = |k: usize| functional.eval(grid.omega(k)) < epsilon;
    if !ok(n - 1) {
        return Err(not_found());
    }
    let (mut lo, mut hi) = (lo, n - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(grid.omega(lo))
}
