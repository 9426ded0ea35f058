//! Classical colored noise from a binary pulse train,
//! `A_cl(t) = sqrt(delta_xi) sum_n g(t - xi_n) x_n` with `x_n = +-1`.
//!
//! For an even PSD the jump correlator is real and the pulse train has
//! covariance `J`, so it can stand in for the bath in pure-dephasing models.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{average_trajectories, AveragedTrajectory, Trajectory};
use crate::error::{AtaError, Result};
use crate::linalg::{CMat, HermitianEigen};
use crate::planner::SystemSpec;
use crate::rng::stream_rng;
use crate::scalar::{ceil_tol, floor_tol, Real, C};
use crate::spectral::Correlator;

/// Pulses with `|g| <= SUPPORT_TOL * max|g|` are dropped.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePath<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub delta_xi: T,
    /// `(master seed, path index)`.
    pub seed: (u64, u64),
}

impl<T: Real> NoisePath<T> {
    /// Spacing of the sample times (zero for fewer than two samples).
    pub fn dt(&self) -> T {
        if self.times.len() < 2 {
            T::zero()
        } else {
            self.times[1] - self.times[0]
        }
    }
}

/// Pulse weights `sqrt(delta_xi) g(t_j - xi_n)` for a fixed set of sample
/// times, shared by every path.
#[derive(Clone, Debug)]
pub struct NoiseGenerator<T> {
    times: Vec<T>,
    delta_xi: T,
    first_pulse: i64,
    pulses: usize,
    /// Row-major `times x pulses`.
    weights: Vec<T>,
}

/// Radius outside which `|g| <= SUPPORT_TOL * max|g|`, from the grid samples.
fn support_radius<T: Real>(g: &Correlator<T>) -> T {
    let max = g.max_abs();
    let cut = T::lit(SUPPORT_TOL) * max;
    let mut r = T::zero();
    for j in 0..g.len() {
        if g.scalar(j).norm() > cut {
            r = r.max(g.time(j).abs());
        }
    }
    r
}

fn check_real<T: Real>(g: &Correlator<T>) -> Result<()> {
    if g.channels() != 1 {
        return Err(AtaError::InvalidParameter(
            "classical noise needs a single-channel correlator".into(),
        ));
    }
    let max = g.max_abs();
    if g.max_imag() > T::lit(1e-8) * max {
        return Err(AtaError::ComplexKernel {
            max_imag: g.max_imag().as_f64(),
        });
    }
    Ok(())
}

impl<T: Real> NoiseGenerator<T> {
    /// Generator for samples at arbitrary `times`; `g` is evaluated exactly
    /// between grid points.
    pub fn new(g: &Correlator<T>, delta_xi: T, times: Vec<T>) -> Result<Self> {
        check_real(g)?;
        if !(delta_xi > T::zero()) || !delta_xi.is_finite() {
            return Err(AtaError::InvalidParameter(format!(
                "delta_xi must be positive, got {delta_xi}"
            )));
        }
        if times.is_empty() || g.is_zero() {
            return Ok(Self {
                times,
                delta_xi,
                first_pulse: 0,
                pulses: 0,
                weights: Vec::new(),
            });
        }
        let radius = support_radius(g);
        let (t_lo, t_hi) = times
            .iter()
            .fold((times[0], times[0]), |(a, b), &t| (a.min(t), b.max(t)));
        let first = ceil_tol((t_lo - radius) / delta_xi);
        let last = floor_tol((t_hi + radius) / delta_xi);
        let pulses = (last - first + 1).max(0) as usize;
        let ev = g.evaluator();
        let scale = delta_xi.sqrt();
        let weights = times
            .par_iter()
            .flat_map_iter(|&t| {
                let ev = &ev;
                (0..pulses).map(move |p| {
                    let xi = T::from_i64(first + p as i64).expect("pulse index") * delta_xi;
                    let d = t - xi;
                    if d.abs() > radius {
                        T::zero()
                    } else {
                        scale * ev.eval_scalar(d).re
                    }
                })
            })
            .collect();
        Ok(Self {
            times,
            delta_xi,
            first_pulse: first,
            pulses,
            weights,
        })
    }

    /// Generator sampling on the correlator's own time grid over `[0, horizon]`.
    pub fn on_grid(g: &Correlator<T>, delta_xi: T, horizon: T) -> Result<Self> {
        let times = (0..g.len())
            .map(|j| g.time(j))
            .filter(|&t| t >= T::zero() && t <= horizon * (T::one() + T::lit(1e-12)))
            .collect();
        Self::new(g, delta_xi, times)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Train indices `n` of the pulses reaching the sample times.
    pub fn pulse_range(&self) -> (i64, i64) {
        (self.first_pulse, self.first_pulse + self.pulses as i64 - 1)
    }

    /// Path `index` of `master`; signs are drawn in increasing `n`.
    pub fn sample(&self, master: u64, index: u64) -> NoisePath<T> {
        let mut rng = stream_rng(master, index);
        let signs: Vec<T> = (0..self.pulses)
            .map(|_| if rng.random::<bool>() { T::one() } else { -T::one() })
            .collect();
        let values = (0..self.times.len())
            .map(|j| {
                self.weights[j * self.pulses..(j + 1) * self.pulses]
                    .iter()
                    .zip(&signs)
                    .fold(T::zero(), |a, (&w, &s)| a + w * s)
            })
            .collect();
        NoisePath {
            times: self.times.clone(),
            values,
            delta_xi: self.delta_xi,
            seed: (master, index),
        }
    }

    /// Paths `0..count` in index order.
    pub fn sample_many(&self, master: u64, count: usize) -> Vec<NoisePath<T>> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.sample(master, i))
            .collect()
    }
}

/// One path on the correlator grid over `[0, horizon]`.
pub fn sample_colored_noise<T: Real>(
    g: &Correlator<T>,
    delta_xi: T,
    horizon: T,
    master: u64,
    index: u64,
) -> Result<NoisePath<T>> {
    Ok(NoiseGenerator::on_grid(g, delta_xi, horizon)?.sample(master, index))
}

/// Autocovariance estimate at lags `0, dt, 2 dt, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Autocovariance<T> {
    pub lags: Vec<T>,
    pub values: Vec<T>,
    pub stderr: Vec<T>,
    pub paths: usize,
}

/// Cross-path covariance: at each lag the product of deviations from the
/// per-time ensemble mean, averaged over time origins and paths, with the
/// `P / (P - 1)` correction. The standard error comes from the spread of
/// the per-path averages.
pub fn empirical_autocovariance<T: Real>(paths: &[NoisePath<T>], max_lag: T) -> Result<Autocovariance<T>> {
    if paths.len() < 2 {
        return Err(AtaError::InvalidParameter(
            "autocovariance needs at least two paths".into(),
        ));
    }
    let times = &paths[0].times;
    if paths.iter().any(|p| &p.times != times || p.values.len() != times.len()) {
        return Err(AtaError::GridMismatch("noise paths have different sample times".into()));
    }
    let n = times.len();
    let np = paths.len();
    let npf = T::from_count(np);
    let dt = paths[0].dt();
    let max_k = if dt > T::zero() {
        (floor_tol(max_lag / dt).max(0) as usize).min(n.saturating_sub(1))
    } else {
        0
    };
    let mean: Vec<T> = (0..n)
        .map(|j| paths.iter().map(|p| p.values[j]).sum::<T>() / npf)
        .collect();
    let per_path: Vec<Vec<T>> = paths
        .par_iter()
        .map(|p| {
            let dev: Vec<T> = p.values.iter().zip(&mean).map(|(&x, &m)| x - m).collect();
            (0..=max_k)
                .map(|k| {
                    let origins = n - k;
                    (0..origins).map(|i| dev[i] * dev[i + k]).sum::<T>() / T::from_count(origins)
                })
                .collect()
        })
        .collect();
    let correction = npf / (npf - T::one());
    let mut values = Vec::with_capacity(max_k + 1);
    let mut stderr = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let m = per_path.iter().map(|c| c[k]).sum::<T>() / npf;
        let var = per_path.iter().map(|c| (c[k] - m) * (c[k] - m)).sum::<T>() / (npf - T::one());
        values.push(m * correction);
        stderr.push((var / npf).sqrt() * correction);
    }
    Ok(Autocovariance {
        lags: (0..=max_k).map(|k| T::from_count(k) * dt).collect(),
        values,
        stderr,
        paths: np,
    })
}

/// Monte-Carlo pure dephasing driven by classical noise: in the common
/// eigenbasis of `H_S` and `S`, `rho_kl(t) = rho_kl(0)
/// e^{-i (e_k - e_l) t} e^{-i sqrt(gamma) (s_k - s_l) Phi(t)}` with
/// `Phi = integral_0^t A_cl` by the trapezoid rule on the samples `t_m = m dt`.
pub fn dephasing_monte_carlo<T: Real>(
    spec: &SystemSpec<T>,
    g: &Correlator<T>,
    delta_xi: T,
    dt: T,
    steps: usize,
    paths: usize,
    master: u64,
) -> Result<AveragedTrajectory<T>> {
    spec.validate()?;
    if spec.couplings.len() != 1 {
        return Err(AtaError::NotDephasing("exactly one coupling operator is required".into()));
    }
    let h = spec.hamiltonian.matrices();
    if h.len() != 1 {
        return Err(AtaError::NotDephasing("time-dependent H_S is not supported".into()));
    }
    let (h, s) = (h[0], &spec.couplings[0]);
    let defect = h.commutator(s).max_abs();
    if defect > T::lit(1e-10) {
        return Err(AtaError::NotDephasing(format!("||[H_S, S]|| = {defect:e}")));
    }
    if paths < 1 || !(dt > T::zero()) {
        return Err(AtaError::InvalidParameter("need at least one path and dt > 0".into()));
    }
    // Common eigenbasis from a generic combination, as in the engine.
    let mix = &h.scale_real(T::lit(0.618_033_988_749_894_8)) + s;
    let p = HermitianEigen::new(&mix.hermitize()).vectors;
    let pd = p.adjoint();
    let hd = pd.matmul(h).matmul(&p);
    let sd = pd.matmul(s).matmul(&p);
    let tol = T::lit(1e-9);
    if !hd.is_diagonal(tol) || !sd.is_diagonal(tol) {
        return Err(AtaError::NotDephasing("no common eigenbasis found".into()));
    }
    let e: Vec<T> = hd.diagonal().iter().map(|z| z.re).collect();
    let sv: Vec<T> = sd.diagonal().iter().map(|z| z.re).collect();
    let rho0 = pd.matmul(&spec.initial_state.density()).matmul(&p);
    let times: Vec<T> = (0..=steps).map(|m| T::from_count(m) * dt).collect();
    let gen = NoiseGenerator::new(g, delta_xi, times.clone())?;
    let root_gamma = spec.gamma.sqrt();
    let dim = spec.dim;
    let names: Vec<String> = spec.observables.iter().map(|(n, _)| n.clone()).collect();
    let trajectories: Vec<Trajectory<T>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = if spec.gamma == T::zero() {
                vec![T::zero(); times.len()]
            } else {
                gen.sample(master, i).values
            };
            let mut phi = T::zero();
            let mut states = Vec::with_capacity(times.len());
            for (m, &t) in times.iter().enumerate() {
                if m > 0 {
                    phi = phi + (path[m - 1] + path[m]) * dt / T::lit(2.0);
                }
                let r = CMat::from_fn(dim, dim, |k, l| {
                    let angle = -((e[k] - e[l]) * t + root_gamma * (sv[k] - sv[l]) * phi);
                    rho0[(k, l)] * C::from_polar(T::one(), angle)
                });
                states.push(p.matmul(&r).matmul(&pd));
            }
            let values = spec
                .observables
                .iter()
                .map(|(_, o)| states.iter().map(|r| r.matmul(o).trace().re).collect())
                .collect();
            Trajectory {
                times: times.clone(),
                observable_names: names.clone(),
                values,
                reduced_states: Some(states),
                measurements: Vec::new(),
                seed: Some((master, i)),
            }
        })
        .collect();
    average_trajectories(&trajectories)
}

/// Sample excess kurtosis `m4 / m2^2 - 3` of the values at sample `j`.
pub fn excess_kurtosis<T: Real>(paths: &[NoisePath<T>], j: usize) -> T {
    let n = T::from_count(paths.len());
    let mean = paths.iter().map(|p| p.values[j]).sum::<T>() / n;
    let (m2, m4) = paths.iter().fold((T::zero(), T::zero()), |(a, b), p| {
        let d = p.values[j] - mean;
        (a + d * d, b + d * d * d * d)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2.is_zero() {
        T::zero()
    } else {
        m4 / (m2 * m2) - T::lit(3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::planner::{Hamiltonian, InitialState};
    use crate::spectral::{build_psd, jump_correlator, Correlator, CorrelatorKind, FrequencyGrid, PsdModel};

    fn gaussian_g(width: f64, omega_max: f64) -> Correlator<f64> {
        let grid = FrequencyGrid::new(omega_max, 1024).unwrap();
        let psd = build_psd(&PsdModel::Gaussian { amplitude: 1.0, width }, &grid).unwrap();
        jump_correlator(&psd).unwrap()
    }

    #[test]
    fn zero_kernel_gives_zero_path() {
        let grid = FrequencyGrid::new(16.0, 64).unwrap();
        let g = Correlator::from_spectrum(CorrelatorKind::G, grid, 1, vec![C::new(0.0, 0.0); 64]);
        let p = sample_colored_noise(&g, 0.1, 2.0, 1, 0).unwrap();
        assert!(!p.values.is_empty() && p.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn isolated_pulse_is_a_signed_copy_of_g() {
        // Narrow g (support radius ~2.7) and pulses 5 apart: only n = 0
        // reaches t in [0, 1].
        let g = gaussian_g(4.0, 64.0);
        let gen = NoiseGenerator::on_grid(&g, 5.0, 1.0).unwrap();
        assert_eq!(gen.pulse_range(), (0, 0));
        let p = gen.sample(3, 1);
        let sign = p.values[0].signum();
        let ev = g.evaluator();
        for (t, v) in p.times.iter().zip(&p.values) {
            let expect = sign * 5f64.sqrt() * ev.eval_scalar(*t).re;
            assert!((v - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_kernel_is_rejected() {
        let grid = FrequencyGrid::new(16.0, 1024).unwrap();
        let psd = build_psd(
            &PsdModel::Tabulated {
                omega: vec![-16.0, 0.0, 1.0, 16.0],
                values: vec![0.0, 0.0, 1.0, 0.0],
            },
            &grid,
        )
        .unwrap();
        let g = jump_correlator(&psd).unwrap();
        assert!(matches!(
            NoiseGenerator::on_grid(&g, 0.1, 1.0),
            Err(AtaError::ComplexKernel { .. })
        ));
    }

    #[test]
    fn autocovariance_of_independent_lags_is_consistent_with_zero() {
        let g = gaussian_g(1.0, 16.0);
        let gen = NoiseGenerator::new(&g, 0.1, vec![0.0, 20.0]).unwrap();
        let paths = gen.sample_many(5, 4000);
        let c = empirical_autocovariance(&paths, 20.0).unwrap();
        assert_eq!(c.lags, vec![0.0, 20.0]);
        assert!(c.values[1].abs() < 3.0 * c.stderr[1], "{} +- {}", c.values[1], c.stderr[1]);
        let zeros: Vec<NoisePath<f64>> = (0..3)
            .map(|i| NoisePath {
                times: vec![0.0, 1.0],
                values: vec![0.0, 0.0],
                delta_xi: 0.1,
                seed: (0, i),
            })
            .collect();
        assert!(empirical_autocovariance(&zeros, 1.0).unwrap().values.iter().all(|&v| v == 0.0));
        assert!(matches!(
            empirical_autocovariance(&zeros[..1], 1.0),
            Err(AtaError::InvalidParameter(_))
        ));
    }

    #[test]
    fn pulse_sum_gaussianizes_as_spacing_shrinks() {
        let g = gaussian_g(1.0, 16.0);
        let kurt = |dxi: f64| {
            let gen = NoiseGenerator::new(&g, dxi, vec![0.0]).unwrap();
            excess_kurtosis(&gen.sample_many(17, 40_000), 0).abs()
        };
        let (k1, k2, k3) = (kurt(0.8), kurt(0.4), kurt(0.2));
        assert!(k1 > k2 && k2 > k3, "{k1} {k2} {k3}");
    }

    #[test]
    fn noise_is_stationary_in_mean() {
        let g = gaussian_g(1.0, 16.0);
        let gen = NoiseGenerator::on_grid(&g, 0.1, 3.0).unwrap();
        let paths = gen.sample_many(2, 4000);
        for j in 0..gen.times().len() {
            let xs: Vec<f64> = paths.iter().map(|p| p.values[j]).collect();
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
            assert!(m.abs() < 3.5 * (var / n).sqrt(), "t index {j}");
        }
    }

    #[test]
    fn dephasing_monte_carlo_trivial_cases() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut spec = SystemSpec {
            dim: 2,
            hamiltonian: Hamiltonian::Constant(pauli::z::<f64>().scale_real(0.5)),
            couplings: vec![pauli::z()],
            gamma: 0.0,
            initial_state: InitialState::Pure(vec![C::new(s, 0.0), C::new(s, 0.0)]),
            observables: vec![("x".into(), pauli::x())],
        };
        let g = gaussian_g(1.0, 16.0);
        let avg = dephasing_monte_carlo(&spec, &g, 0.1, 0.1, 20, 4, 0).unwrap();
        for rho in avg.mean_states.as_ref().unwrap() {
            assert!((rho[(0, 1)].norm() - 0.5).abs() < 1e-12);
        }
        spec.gamma = 0.05;
        let avg = dephasing_monte_carlo(&spec, &g, 0.1, 0.1, 20, 50, 0).unwrap();
        assert!((avg.mean_states.as_ref().unwrap()[0][(0, 1)].norm() - 0.5).abs() < 1e-12);
        spec.couplings = vec![pauli::x()];
        assert!(matches!(
            dephasing_monte_carlo(&spec, &g, 0.1, 0.1, 20, 4, 0),
            Err(AtaError::NotDephasing(_))
        ));
    }
}
