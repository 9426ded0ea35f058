use num_traits::{Float, One, Zero};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{AtaError, Result};
use crate::linalg::{psd_sqrt, CMat};
use crate::scalar::{c, cr, Real, C};

use super::grid::FrequencyGrid;
use super::psd::SampledPsd;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorKind {
    /// Bath correlation function `J(t)`.
    J,
    /// Jump correlator `g(t)`, the convolution square root of `J`.
    G,
    /// Filtered jump correlator `g_f = g * phi`.
    GFiltered,
    /// Filter kernel `phi(t)`.
    Phi,
    /// Time derivative of another kernel.
    Derivative,
}

/// Matrix-valued kernel on the time grid conjugate to a frequency grid.
///
/// The kernel is stored both as time samples and as its spectral density
/// `s(omega)`, related by `values(t) = integral s(omega) e^{-i omega t} d omega`
/// (discretized with weight `d_omega`). Keeping the spectrum makes exact
/// band-limited evaluation between grid points possible.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlator<T> {
    kind: CorrelatorKind,
    grid: FrequencyGrid<T>,
    channels: usize,
    /// Time samples, `channels^2` row-major entries per time point.
    values: Vec<C<T>>,
    /// Spectral density, same layout, per frequency point.
    spectrum: Vec<C<T>>,
}

impl<T: Real> Correlator<T> {
    /// Builds a kernel from its spectral density (layout: `channels^2`
    /// row-major entries per frequency point).
    pub fn from_spectrum(
        kind: CorrelatorKind,
        grid: FrequencyGrid<T>,
        channels: usize,
        spectrum: Vec<C<T>>,
    ) -> Self {
        assert_eq!(spectrum.len(), grid.n_points() * channels * channels);
        let values = spectrum_to_time(&grid, channels, &spectrum);
        Self {
            kind,
            grid,
            channels,
            values,
            spectrum,
        }
    }

    /// Builds a kernel from time samples on the grid conjugate to `grid`.
    pub fn from_time_values(
        kind: CorrelatorKind,
        grid: FrequencyGrid<T>,
        channels: usize,
        values: Vec<C<T>>,
    ) -> Self {
        assert_eq!(values.len(), grid.n_points() * channels * channels);
        let spectrum = time_to_spectrum(&grid, channels, &values);
        Self {
            kind,
            grid,
            channels,
            values,
            spectrum,
        }
    }

    #[inline]
    pub fn kind(&self) -> CorrelatorKind {
        self.kind
    }

    #[inline]
    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.grid.n_points()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.grid.dt()
    }

    #[inline]
    pub fn t0_index(&self) -> usize {
        self.grid.t0_index()
    }

    #[inline]
    pub fn time(&self, j: usize) -> T {
        self.grid.time(j)
    }

    /// Entry `(a, b)` at time index `j`.
    #[inline]
    pub fn entry(&self, j: usize, a: usize, b: usize) -> C<T> {
        let n = self.channels;
        self.values[j * n * n + a * n + b]
    }

    /// Scalar value at time index `j` (entry `(0, 0)`).
    #[inline]
    pub fn scalar(&self, j: usize) -> C<T> {
        self.entry(j, 0, 0)
    }

    pub fn at(&self, j: usize) -> CMat<T> {
        let n = self.channels;
        CMat::from_vec(n, n, self.values[j * n * n..(j + 1) * n * n].to_vec())
    }

    pub fn raw_values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn raw_spectrum(&self) -> &[C<T>] {
        &self.spectrum
    }

    pub fn spectrum_at(&self, k: usize) -> CMat<T> {
        let n = self.channels;
        CMat::from_vec(n, n, self.spectrum[k * n * n..(k + 1) * n * n].to_vec())
    }

    /// Largest entry modulus over the time grid.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest imaginary part over the time grid.
    pub fn max_imag(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, z| m.max(Float::abs(z.im)))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.is_zero())
    }

    /// Largest deviation from `values(t)^dagger = values(-t)` over mirrored
    /// grid pairs.
    pub fn conjugation_defect(&self) -> T {
        let n = self.len();
        let t0 = self.t0_index();
        let mut worst = T::zero();
        for j in 1..n {
            let mirror = 2 * t0 - j;
            if mirror >= n {
                continue;
            }
            for a in 0..self.channels {
                for b in 0..self.channels {
                    let d = self.entry(j, a, b).conj() - self.entry(mirror, b, a);
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }

    /// Same kernel on a time grid `factor` times finer (spectrum zero-padded).
    pub fn upsample(&self, factor: usize) -> Result<Self> {
        if factor <= 1 {
            return Ok(self.clone());
        }
        if !factor.is_power_of_two() {
            return Err(AtaError::InvalidParameter(format!(
                "upsampling factor must be a power of two, got {factor}"
            )));
        }
        let grid = self.grid.widened(factor)?;
        let nn = self.channels * self.channels;
        let offset = (grid.n_points() - self.len()) / 2;
        let mut spectrum = vec![C::zero(); grid.n_points() * nn];
        spectrum[offset * nn..(offset + self.len()) * nn].copy_from_slice(&self.spectrum);
        Ok(Self::from_spectrum(self.kind, grid, self.channels, spectrum))
    }

    /// Time derivative, computed spectrally (multiplication by `-i omega`).
    pub fn derivative(&self) -> Self {
        let nn = self.channels * self.channels;
        let spectrum = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(i, &z)| z * c(T::zero(), -self.grid.omega(i / nn)))
            .collect();
        Self::from_spectrum(CorrelatorKind::Derivative, self.grid, self.channels, spectrum)
    }

    /// Evaluator for the band-limited kernel at arbitrary times.
    pub fn evaluator(&self) -> KernelEvaluator<T> {
        KernelEvaluator::new(self)
    }

    pub fn cast<U: Real>(&self) -> Correlator<U> {
        let cv = |z: &C<T>| c(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()));
        Correlator {
            kind: self.kind,
            grid: self.grid.cast(),
            channels: self.channels,
            values: self.values.iter().map(cv).collect(),
            spectrum: self.spectrum.iter().map(cv).collect(),
        }
    }
}

/// `f(t_j) = sum_k s_k e^{-i omega_k t_j} d_omega`, entry by entry.
///
/// With `omega_k t_j = 2 pi (k - N/2)(j - N/2) / N` this is a forward DFT
/// after rotating both index sets by `N/2`.
fn spectrum_to_time<T: Real>(grid: &FrequencyGrid<T>, channels: usize, spectrum: &[C<T>]) -> Vec<C<T>> {
    transform(grid, channels, spectrum, false, grid.d_omega())
}

/// `s_k = (1/2pi) sum_j f(t_j) e^{i omega_k t_j} dt`, the inverse of
/// [`spectrum_to_time`].
fn time_to_spectrum<T: Real>(grid: &FrequencyGrid<T>, channels: usize, values: &[C<T>]) -> Vec<C<T>> {
    transform(grid, channels, values, true, grid.dt() / T::TAU())
}

fn transform<T: Real>(
    grid: &FrequencyGrid<T>,
    channels: usize,
    input: &[C<T>],
    inverse: bool,
    weight: T,
) -> Vec<C<T>> {
    let n = grid.n_points();
    let half = n / 2;
    let nn = channels * channels;
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut out = vec![C::zero(); n * nn];
    let mut buf = vec![C::zero(); n];
    for e in 0..nn {
        for k in 0..n {
            buf[(k + half) % n] = input[k * nn + e];
        }
        fft.process(&mut buf);
        for j in 0..n {
            out[j * nn + e] = buf[(j + half) % n] * weight;
        }
    }
    out
}

/// Exact evaluation of a band-limited kernel at off-grid times:
/// `f(t) = sum_k s_k e^{-i omega_k t} d_omega` over the nonzero spectral band.
#[derive(Clone, Debug)]
pub struct KernelEvaluator<T> {
    channels: usize,
    first_omega: T,
    d_omega: T,
    /// Spectrum times `d_omega` over the band `k_lo..=k_hi`.
    band: Vec<C<T>>,
}

impl<T: Real> KernelEvaluator<T> {
    fn new(corr: &Correlator<T>) -> Self {
        let nn = corr.channels * corr.channels;
        let n = corr.len();
        let nonzero = |k: usize| corr.spectrum[k * nn..(k + 1) * nn].iter().any(|z| !z.is_zero());
        let lo = (0..n).find(|&k| nonzero(k));
        let hi = (0..n).rev().find(|&k| nonzero(k));
        let d_omega = corr.grid.d_omega();
        match (lo, hi) {
            (Some(lo), Some(hi)) => Self {
                channels: corr.channels,
                first_omega: corr.grid.omega(lo),
                d_omega,
                band: corr.spectrum[lo * nn..(hi + 1) * nn]
                    .iter()
                    .map(|&z| z * d_omega)
                    .collect(),
            },
            _ => Self {
                channels: corr.channels,
                first_omega: T::zero(),
                d_omega,
                band: Vec::new(),
            },
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Kernel matrix at time `t`, row-major.
    pub fn eval(&self, t: T) -> Vec<C<T>> {
        let nn = self.channels * self.channels;
        let mut out = vec![C::zero(); nn];
        if self.band.is_empty() {
            return out;
        }
        // Phases advance by a fixed rotation per bin; recompute exactly every
        // 64 bins to keep the recurrence error negligible.
        let step = C::from_polar(T::one(), -self.d_omega * t);
        let bins = self.band.len() / nn;
        let mut phase = C::one();
        for k in 0..bins {
            if k % 64 == 0 {
                phase = C::from_polar(
                    T::one(),
                    -(self.first_omega + T::from_count(k) * self.d_omega) * t,
                );
            }
            let row = &self.band[k * nn..(k + 1) * nn];
            for (o, &s) in out.iter_mut().zip(row) {
                *o = *o + s * phase;
            }
            phase = phase * step;
        }
        out
    }

    pub fn eval_scalar(&self, t: T) -> C<T> {
        self.eval(t)[0]
    }
}

/// Bath correlation function `J(t) = integral J~(omega) e^{-i omega t} d omega`.
pub fn bath_correlation<T: Real>(psd: &SampledPsd<T>) -> Correlator<T> {
    let spectrum = psd
        .values()
        .iter()
        .flat_map(|m| m.as_slice().iter().copied())
        .collect();
    Correlator::from_spectrum(CorrelatorKind::J, *psd.grid(), psd.channels(), spectrum)
}

/// Per-frequency positive square root `sqrt(J~(omega) / 2pi)`.
pub(crate) fn sqrt_spectrum<T: Real>(psd: &SampledPsd<T>) -> Result<Vec<C<T>>> {
    let norm = T::one() / T::TAU().sqrt();
    let tol = T::lit(1e-12).max(T::eps_times(64.0));
    let mut out = Vec::with_capacity(psd.values().len() * psd.channels() * psd.channels());
    for (k, m) in psd.values().iter().enumerate() {
        if m.rows() == 1 {
            let x = m[(0, 0)].re;
            out.push(cr(x.max(T::zero()).sqrt() * norm));
            continue;
        }
        let (root, min) = psd_sqrt(m);
        let scale = m.max_abs();
        if min < -tol * scale * T::from_count(m.rows()) {
            return Err(AtaError::NonPositivePsd {
                omega: psd.grid().omega(k).as_f64(),
                min_eigenvalue: min.as_f64(),
            });
        }
        out.extend(root.as_slice().iter().map(|&z| z * norm));
    }
    Ok(out)
}

/// Jump correlator `g(t) = integral sqrt(J~(omega) / 2pi) e^{-i omega t} d omega`,
/// the positive convolution square root of `J`.
pub fn jump_correlator<T: Real>(psd: &SampledPsd<T>) -> Result<Correlator<T>> {
    let spectrum = sqrt_spectrum(psd)?;
    Ok(Correlator::from_spectrum(
        CorrelatorKind::G,
        *psd.grid(),
        psd.channels(),
        spectrum,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::psd::{build_psd, PsdModel};

    fn gaussian() -> SampledPsd<f64> {
        let grid = FrequencyGrid::new(16.0, 1024).unwrap();
        build_psd(
            &PsdModel::Gaussian {
                amplitude: 1.0,
                width: 1.0,
            },
            &grid,
        )
        .unwrap()
    }

    #[test]
    fn gaussian_correlators_match_closed_forms() {
        let psd = gaussian();
        let j = bath_correlation(&psd);
        let g = jump_correlator(&psd).unwrap();
        let root2pi = (2.0 * std::f64::consts::PI).sqrt();
        assert!((j.scalar(j.t0_index()).re - root2pi).abs() < 1e-12);
        assert!((g.scalar(g.t0_index()).re - 2f64.sqrt()).abs() < 1e-12);
        for jj in 0..j.len() {
            let t = j.time(jj);
            assert!((j.scalar(jj) - cr(root2pi * (-t * t / 2.0).exp())).norm() < 1e-12);
            assert!((g.scalar(jj) - cr(2f64.sqrt() * (-t * t).exp())).norm() < 1e-12);
        }
        assert!(g.conjugation_defect() < 1e-14);
        assert!(g.max_imag() < 1e-14);
    }

    #[test]
    fn time_spectrum_round_trip() {
        let psd = gaussian();
        let g = jump_correlator(&psd).unwrap();
        let back = Correlator::from_time_values(
            CorrelatorKind::G,
            *g.grid(),
            1,
            g.raw_values().to_vec(),
        );
        for (a, b) in back.raw_spectrum().iter().zip(g.raw_spectrum()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn evaluator_reproduces_grid_and_closed_form() {
        let g = jump_correlator(&gaussian()).unwrap();
        let ev = g.evaluator();
        for j in (0..g.len()).step_by(37) {
            assert!((ev.eval_scalar(g.time(j)) - g.scalar(j)).norm() < 1e-12);
        }
        for &t in &[0.0123, -0.777, 1.3333] {
            let exact = 2f64.sqrt() * (-t * t).exp();
            assert!((ev.eval_scalar(t).re - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn upsample_keeps_samples_and_interpolates() {
        let g = jump_correlator(&gaussian()).unwrap();
        let up = g.upsample(4).unwrap();
        assert_eq!(up.len(), 4096);
        assert!((up.dt() * 4.0 - g.dt()).abs() < 1e-15);
        for j in 0..g.len() {
            let t = g.time(j);
            let jj = up.t0_index() as i64 + (t / up.dt()).round() as i64;
            assert!((up.scalar(jj as usize) - g.scalar(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = jump_correlator(&gaussian()).unwrap();
        let d = g.derivative();
        for j in (0..g.len()).step_by(13) {
            let t = g.time(j);
            let exact = -2.0 * t * 2f64.sqrt() * (-t * t).exp();
            assert!((d.scalar(j).re - exact).abs() < 1e-11);
        }
    }

    #[test]
    fn diagonal_two_channel_psd_gives_diagonal_g() {
        let grid = FrequencyGrid::new(16.0, 256).unwrap();
        let omega = grid.omegas();
        let mut omega_ext = omega.clone();
        omega_ext.push(16.0);
        let values: Vec<CMat<f64>> = omega_ext
            .iter()
            .map(|&w| CMat::from_real_diag(&[(-w * w / 2.0).exp(), (-w * w / 8.0).exp() * 0.5]))
            .collect();
        let model = PsdModel::MatrixTabulated {
            omega: omega_ext,
            values,
        };
        let psd = build_psd(&model, &grid).unwrap();
        let g = jump_correlator(&psd).unwrap();
        let g1 = jump_correlator(
            &build_psd(
                &PsdModel::Gaussian {
                    amplitude: 1.0,
                    width: 1.0,
                },
                &grid,
            )
            .unwrap(),
        )
        .unwrap();
        for j in 0..g.len() {
            assert!(g.entry(j, 0, 1).norm() < 1e-15);
            assert!(g.entry(j, 1, 0).norm() < 1e-15);
            assert!((g.entry(j, 0, 0) - g1.scalar(j)).norm() < 1e-12);
        }
    }
}
