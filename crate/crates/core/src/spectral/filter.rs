use num_traits::Float;

use crate::error::{AtaError, Result};
use crate::scalar::{cr, Real};

use super::correlator::{sqrt_spectrum, Correlator, CorrelatorKind};
use super::grid::FrequencyGrid;
use super::psd::SampledPsd;

/// Low-pass window `phi~(omega)`: flat up to `Omega/2`, zero beyond `Omega`,
/// joined by two quadratic pieces so that it is `C^1` with slope at most
/// `4/Omega`.
pub fn phi_tilde<T: Real>(omega: T, cutoff: T) -> T {
    let w = Float::abs(omega);
    let half = cutoff / T::lit(2.0);
    let k = T::lit(4.0) / cutoff;
    let k2 = k * k / T::lit(2.0);
    if w < half {
        T::one()
    } else if w < T::lit(0.75) * cutoff {
        let d = w - half;
        T::one() - k2 * d * d
    } else if w < cutoff {
        let d = w - cutoff;
        k2 * d * d
    } else {
        T::zero()
    }
}

fn check_cutoff<T: Real>(cutoff: T, grid: &FrequencyGrid<T>) -> Result<()> {
    if !(cutoff > T::zero()) || cutoff > grid.omega_max() * (T::one() + T::lit(1e-12)) {
        return Err(AtaError::DomainError(format!(
            "filter cutoff {cutoff} must lie in (0, omega_max = {}]",
            grid.omega_max()
        )));
    }
    Ok(())
}

/// Filter kernel `phi(t) = (1/2pi) integral phi~(omega) e^{-i omega t} d omega`
/// together with the frequency samples `phi~(omega_k)`.
///
/// With this normalization `g_f = g * phi` as a time-domain convolution.
pub fn filter_kernel<T: Real>(cutoff: T, grid: &FrequencyGrid<T>) -> Result<(Correlator<T>, Vec<T>)> {
    check_cutoff(cutoff, grid)?;
    let samples: Vec<T> = grid.omegas().into_iter().map(|w| phi_tilde(w, cutoff)).collect();
    let spectrum = samples.iter().map(|&p| cr(p / T::TAU())).collect();
    Ok((
        Correlator::from_spectrum(CorrelatorKind::Phi, *grid, 1, spectrum),
        samples,
    ))
}

/// Filtered jump correlator with spectrum `phi~(omega) sqrt(J~(omega) / 2pi)`.
pub fn filtered_jump_correlator<T: Real>(psd: &SampledPsd<T>, cutoff: T) -> Result<Correlator<T>> {
    let grid = psd.grid();
    check_cutoff(cutoff, grid)?;
    let nn = psd.channels() * psd.channels();
    let mut spectrum = sqrt_spectrum(psd)?;
    for (i, z) in spectrum.iter_mut().enumerate() {
        *z = *z * phi_tilde(grid.omega(i / nn), cutoff);
    }
    Ok(Correlator::from_spectrum(
        CorrelatorKind::GFiltered,
        *grid,
        psd.channels(),
        spectrum,
    ))
}

/// Filter cutoff used by the simulation pipeline: `min(pi / delta_xi, omega_max)`.
pub fn pipeline_cutoff<T: Real>(delta_xi: T, grid: &FrequencyGrid<T>) -> T {
    (T::PI() / delta_xi).min(grid.omega_max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::correlator::jump_correlator;
    use crate::spectral::psd::{build_psd, PsdModel};

    #[test]
    fn window_values() {
        let o = 3.0_f64;
        assert_eq!(phi_tilde(0.0, o), 1.0);
        assert_eq!(phi_tilde(o / 2.0, o), 1.0);
        assert_eq!(phi_tilde(o, o), 0.0);
        assert_eq!(phi_tilde(-2.0 * o, o), 0.0);
        assert!((phi_tilde(5.0 * o / 8.0, o) - 0.875).abs() < 1e-15);
        assert!((phi_tilde(0.75 * o, o) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn window_is_c1_at_joints() {
        let o = 2.0_f64;
        let h = 1e-7;
        for &x in &[o / 2.0, 0.75 * o, o] {
            let left = phi_tilde(x - h, o);
            let right = phi_tilde(x + h, o);
            assert!((left - right).abs() < 1e-6, "jump at {x}");
            let dl = (phi_tilde(x - h, o) - phi_tilde(x - 2.0 * h, o)) / h;
            let dr = (phi_tilde(x + 2.0 * h, o) - phi_tilde(x + h, o)) / h;
            assert!((dl - dr).abs() < 1e-5, "kink at {x}: {dl} vs {dr}");
        }
    }

    #[test]
    fn filter_rejects_cutoff_beyond_grid() {
        let grid = FrequencyGrid::<f64>::new(8.0, 256).unwrap();
        assert!(matches!(filter_kernel(9.0, &grid), Err(AtaError::DomainError(_))));
        assert!(filter_kernel(8.0, &grid).is_ok());
    }

    #[test]
    fn gaussian_filter_discrepancy_matches_spectral_bound() {
        let grid = FrequencyGrid::new(16.0, 1024).unwrap();
        let psd = build_psd(
            &PsdModel::Gaussian {
                amplitude: 1.0,
                width: 1.0,
            },
            &grid,
        )
        .unwrap();
        let g = jump_correlator(&psd).unwrap();
        let max_diff = |cutoff: f64| {
            let gf = filtered_jump_correlator(&psd, cutoff).unwrap();
            g.raw_values()
                .iter()
                .zip(gf.raw_values())
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
        };
        // |g - g_f| <= integral |1 - phi~| sqrt(J~ / 2pi), with equality at t = 0
        // because every term is real and positive there.
        let dw = grid.d_omega();
        let bound: f64 = grid
            .omegas()
            .iter()
            .map(|&w| (1.0 - phi_tilde(w, 8.0)) * (-w * w / 4.0).exp() / (2.0 * std::f64::consts::PI).sqrt() * dw)
            .sum();
        let d8 = max_diff(8.0);
        assert!((d8 - bound).abs() < 1e-12, "{d8} vs {bound}");
        assert!(max_diff(16.0) / g.max_abs() < 1e-6);
    }

    #[test]
    fn band_limited_psd_is_a_fixed_point() {
        let grid = FrequencyGrid::new(16.0, 1024).unwrap();
        let omega = vec![-16.0, -2.0, 0.0, 2.0, 16.0];
        let values = vec![0.0, 0.0, 1.0, 0.0, 0.0];
        let psd = build_psd(&PsdModel::Tabulated { omega, values }, &grid).unwrap();
        let g = jump_correlator(&psd).unwrap();
        let gf = filtered_jump_correlator(&psd, 4.0).unwrap();
        let diff = g
            .raw_values()
            .iter()
            .zip(gf.raw_values())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(diff <= 1e-10 * g.max_abs());
    }
}
