use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{AtaError, Result};
use crate::linalg::{CMat, HermitianEigen};
use crate::scalar::{c, cr, Real, C};

use super::grid::FrequencyGrid;

/// Power spectral density models.
///
/// Conventions: `J~(omega) = (1/2pi) * integral J(t) e^{i omega t} dt`.
/// Positive frequencies describe energy given to the bath (decay), negative
/// frequencies energy taken from it (excitation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PsdModel<T> {
    /// `a * exp(-omega^2 / (2 sigma^2))`.
    Gaussian { amplitude: T, width: T },
    /// `weight * (rate / pi) / (omega^2 + rate^2)`, which integrates to `weight`.
    Lorentzian { weight: T, rate: T },
    /// `coupling * omega * exp(-omega^2 / (2 cutoff^2)) / (1 - exp(-beta omega))`.
    ///
    /// Satisfies `J~(-omega) = exp(-beta omega) J~(omega)` exactly. An infinite
    /// `beta` gives the zero-temperature limit.
    ThermalOhmic { coupling: T, cutoff: T, beta: T },
    /// Scalar samples, linearly interpolated, zero outside the table.
    Tabulated { omega: Vec<T>, values: Vec<T> },
    /// Hermitian matrix samples, linearly interpolated, zero outside the table.
    MatrixTabulated {
        omega: Vec<T>,
        values: Vec<CMat<T>>,
    },
}

impl<T: Real> PsdModel<T> {
    pub fn channels(&self) -> usize {
        match self {
            PsdModel::MatrixTabulated { values, .. } => values.first().map_or(1, CMat::rows),
            _ => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        let bad = |what: &str| Err(AtaError::InvalidParameter(what.to_string()));
        match self {
            PsdModel::Gaussian { amplitude, width } => {
                if !finite(&[*amplitude, *width]) || *width <= T::zero() {
                    return bad("Gaussian PSD needs finite amplitude and positive width");
                }
            }
            PsdModel::Lorentzian { weight, rate } => {
                if !finite(&[*weight, *rate]) || *rate <= T::zero() {
                    return bad("Lorentzian PSD needs finite weight and positive rate");
                }
            }
            PsdModel::ThermalOhmic {
                coupling,
                cutoff,
                beta,
            } => {
                if !finite(&[*coupling, *cutoff]) || *cutoff <= T::zero() {
                    return bad("thermal PSD needs finite coupling and positive cutoff");
                }
                if beta.is_nan() || *beta <= T::zero() {
                    return bad("thermal PSD needs positive inverse temperature");
                }
            }
            PsdModel::Tabulated { omega, values } => {
                if omega.len() != values.len() || omega.len() < 2 {
                    return bad("tabulated PSD needs matching omega/value columns with >= 2 rows");
                }
                if !finite(omega) || !finite(values) {
                    return bad("tabulated PSD contains non-finite entries");
                }
                if omega.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated PSD frequencies must be strictly increasing");
                }
            }
            PsdModel::MatrixTabulated { omega, values } => {
                if omega.len() != values.len() || omega.len() < 2 {
                    return bad("tabulated PSD needs matching omega/value columns with >= 2 rows");
                }
                let n = values[0].rows();
                if n == 0 || values.iter().any(|m| m.rows() != n || m.cols() != n) {
                    return bad("tabulated PSD matrices must be square with a common size");
                }
                if !finite(omega) {
                    return bad("tabulated PSD contains non-finite frequencies");
                }
                if values
                    .iter()
                    .any(|m| m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
                {
                    return bad("tabulated PSD contains non-finite entries");
                }
                if omega.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated PSD frequencies must be strictly increasing");
                }
            }
        }
        Ok(())
    }

    /// Evaluates `J~(omega)` as an `N_C x N_C` matrix.
    pub fn value(&self, omega: T) -> CMat<T> {
        match self {
            PsdModel::Tabulated { omega: xs, values } => {
                CMat::from_vec(1, 1, vec![cr(interpolate(xs, values, omega))])
            }
            PsdModel::MatrixTabulated { omega: xs, values } => {
                let n = values[0].rows();
                match bracket(xs, omega) {
                    None => CMat::zeros(n, n),
                    Some((i, w)) if w == T::zero() => values[i].clone(),
                    Some((i, w)) => &values[i].scale_real(T::one() - w) + &values[i + 1].scale_real(w),
                }
            }
            _ => CMat::from_vec(1, 1, vec![cr(self.scalar_value(omega))]),
        }
    }

    fn scalar_value(&self, omega: T) -> T {
        match *self {
            PsdModel::Gaussian { amplitude, width } => {
                amplitude * (-(omega * omega) / (T::lit(2.0) * width * width)).exp()
            }
            PsdModel::Lorentzian { weight, rate } => {
                weight * rate / T::PI() / (omega * omega + rate * rate)
            }
            PsdModel::ThermalOhmic {
                coupling,
                cutoff,
                beta,
            } => {
                let envelope = (-(omega * omega) / (T::lit(2.0) * cutoff * cutoff)).exp();
                coupling * bose_factor(omega, beta) * envelope
            }
            _ => unreachable!("scalar_value on tabulated model"),
        }
    }

    /// Analytic second derivative, when the model has one.
    pub fn analytic_second_derivative(&self, omega: T) -> Option<CMat<T>> {
        let two = T::lit(2.0);
        let v = match *self {
            PsdModel::Gaussian { amplitude, width } => {
                let s2 = width * width;
                let e = (-(omega * omega) / (two * s2)).exp();
                amplitude * e * (omega * omega / (s2 * s2) - T::one() / s2)
            }
            PsdModel::Lorentzian { weight, rate } => {
                let d = omega * omega + rate * rate;
                weight * rate / T::PI() * (T::lit(6.0) * omega * omega - two * rate * rate)
                    / (d * d * d)
            }
            _ => return None,
        };
        Some(CMat::from_vec(1, 1, vec![cr(v)]))
    }
}

/// `omega / (1 - exp(-beta omega))`, continuous through `omega = 0`.
fn bose_factor<T: Real>(omega: T, beta: T) -> T {
    if beta.is_infinite() {
        return omega.max(T::zero());
    }
    let x = beta * omega;
    if Float::abs(x) < T::lit(1e-6) {
        // Taylor expansion of x / (1 - e^{-x}) divided by beta.
        (T::one() + x / T::lit(2.0) + x * x / T::lit(12.0)) / beta
    } else {
        omega / -(-x).exp_m1()
    }
}

fn bracket<T: Real>(xs: &[T], x: T) -> Option<(usize, T)> {
    let n = xs.len();
    if x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let i = match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => return Some((i.min(n - 1), T::zero())),
        Err(i) => i - 1,
    };
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    Some((i, w))
}

fn interpolate<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    match bracket(xs, x) {
        None => T::zero(),
        Some((i, w)) if w == T::zero() => ys[i],
        Some((i, w)) => ys[i] * (T::one() - w) + ys[i + 1] * w,
    }
}

/// A PSD sampled on a frequency grid, with its second derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPsd<T> {
    grid: FrequencyGrid<T>,
    channels: usize,
    values: Vec<CMat<T>>,
    second_derivative: Vec<CMat<T>>,
}

impl<T: Real> SampledPsd<T> {
    #[inline]
    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[CMat<T>] {
        &self.values
    }

    pub fn second_derivative(&self) -> &[CMat<T>] {
        &self.second_derivative
    }

    pub fn value(&self, k: usize) -> &CMat<T> {
        &self.values[k]
    }

    /// Scalar value at grid index `k` (entry `(0, 0)`).
    pub fn scalar(&self, k: usize) -> T {
        self.values[k][(0, 0)].re
    }

    pub fn is_zero(&self) -> bool {
        self.values
            .iter()
            .all(|m| m.as_slice().iter().all(|z| z.is_zero()))
    }

    /// Largest `|J~(omega) - J~(-omega)|` over mirrored grid pairs, relative
    /// to the largest entry.
    pub fn even_asymmetry(&self) -> T {
        let n = self.grid.n_points();
        let scale = self
            .values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.max_abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for k in 1..n {
            let d = (&self.values[k] - &self.values[n - k]).max_abs();
            worst = worst.max(d);
        }
        worst / scale
    }
}

/// Samples `model` on `grid`, checking Hermiticity and positivity.
pub fn build_psd<T: Real>(model: &PsdModel<T>, grid: &FrequencyGrid<T>) -> Result<SampledPsd<T>> {
    model.validate()?;
    let n = grid.n_points();
    let channels = model.channels();

    match model {
        PsdModel::Tabulated { omega, .. } | PsdModel::MatrixTabulated { omega, .. } => {
            let lo = grid.omega(0);
            let hi = grid.omega(n - 1);
            let tol = T::lit(1e-9) * grid.omega_max();
            if omega[0] > lo + tol || omega[omega.len() - 1] < hi - tol {
                return Err(AtaError::GridMismatch(format!(
                    "table covers [{}, {}] but the grid spans [{lo}, {hi}]",
                    omega[0],
                    omega[omega.len() - 1]
                )));
            }
        }
        _ => {}
    }

    let herm_tol = T::lit(1e-12).max(T::eps_times(64.0));
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let w = grid.omega(k);
        let v = model.value(w);
        let scale = v.max_abs();
        if v.hermiticity_defect() > herm_tol.max(T::lit(1e-10)) * scale {
            return Err(AtaError::DomainError(format!(
                "PSD matrix is not Hermitian at omega = {w}"
            )));
        }
        let v = v.hermitize();
        check_psd(&v, w, herm_tol)?;
        values.push(v);
    }

    let second_derivative = match model.analytic_second_derivative(grid.omega(0)) {
        Some(_) => (0..n)
            .map(|k| {
                model
                    .analytic_second_derivative(grid.omega(k))
                    .expect("analytic derivative available")
            })
            .collect(),
        None => finite_difference_second(&values, grid.d_omega()),
    };

    Ok(SampledPsd {
        grid: *grid,
        channels,
        values,
        second_derivative,
    })
}

fn check_psd<T: Real>(v: &CMat<T>, omega: T, tol: T) -> Result<()> {
    if v.rows() == 1 {
        let x = v[(0, 0)].re;
        if x < -tol * Float::abs(x) {
            return Err(AtaError::NonPositivePsd {
                omega: omega.as_f64(),
                min_eigenvalue: x.as_f64(),
            });
        }
        return Ok(());
    }
    let eig = HermitianEigen::new(v);
    let norm = Float::abs(eig.min()).max(Float::abs(eig.max()));
    if eig.min() < -tol * norm {
        return Err(AtaError::NonPositivePsd {
            omega: omega.as_f64(),
            min_eigenvalue: eig.min().as_f64(),
        });
    }
    Ok(())
}

/// Second-order centered differences; the end points reuse their neighbour's
/// stencil.
fn finite_difference_second<T: Real>(values: &[CMat<T>], h: T) -> Vec<CMat<T>> {
    let n = values.len();
    let h2 = h * h;
    let centered = |k: usize| {
        let s = &(&values[k + 1] + &values[k - 1]) - &values[k].scale_real(T::lit(2.0));
        s.scale_real(T::one() / h2)
    };
    (0..n)
        .map(|k| {
            if n < 3 {
                CMat::zeros(values[0].rows(), values[0].cols())
            } else if k == 0 {
                centered(1)
            } else if k == n - 1 {
                centered(n - 2)
            } else {
                centered(k)
            }
        })
        .collect()
}

/// Parses a PSD table: one record per line, `omega` followed by the real and
/// imaginary parts of the upper triangle of `J~(omega)` in row-major order.
/// Lines starting with `#` and blank lines are ignored.
pub fn parse_psd_table<T: Real>(text: &str) -> Result<PsdModel<T>> {
    let mut omegas = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>().map_err(|e| AtaError::Parse {
                    line: i + 1,
                    message: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(nums.len()),
            Some(w) if w != nums.len() => {
                return Err(AtaError::Parse {
                    line: i + 1,
                    message: format!("expected {w} columns, found {}", nums.len()),
                })
            }
            _ => {}
        }
        omegas.push(T::lit(nums[0]));
        rows.push(nums[1..].to_vec());
    }
    let width = width.ok_or(AtaError::Parse {
        line: 0,
        message: "no data rows".into(),
    })?;
    // 1 + N (N + 1) columns for N channels.
    let entries = width - 1;
    let channels = (1..=64)
        .find(|&n| n * (n + 1) == entries)
        .ok_or_else(|| AtaError::Parse {
            line: 0,
            message: format!("{width} columns do not describe an upper triangle"),
        })?;

    if channels == 1 {
        if let Some(r) = rows.iter().position(|r| r[1] != 0.0) {
            return Err(AtaError::Parse {
                line: r + 1,
                message: "scalar PSD must be real".into(),
            });
        }
        return Ok(PsdModel::Tabulated {
            omega: omegas,
            values: rows.iter().map(|r| T::lit(r[0])).collect(),
        });
    }

    let values = rows
        .iter()
        .map(|r| {
            let mut m = CMat::zeros(channels, channels);
            let mut idx = 0;
            for a in 0..channels {
                for b in a..channels {
                    let z = c(T::lit(r[idx]), T::lit(r[idx + 1]));
                    idx += 2;
                    m[(a, b)] = z;
                    m[(b, a)] = z.conj();
                }
            }
            for a in 0..channels {
                m[(a, a)] = cr(m[(a, a)].re);
            }
            m
        })
        .collect();
    Ok(PsdModel::MatrixTabulated {
        omega: omegas,
        values,
    })
}

/// Writes a PSD table in the format read by [`parse_psd_table`].
pub fn format_psd_table<T: Real>(omega: &[T], values: &[CMat<T>]) -> String {
    let mut out = String::from("# omega, upper triangle of J(omega) as (re, im) pairs\n");
    for (w, m) in omega.iter().zip(values) {
        out.push_str(&format!("{:.16e}", w.as_f64()));
        for a in 0..m.rows() {
            for b in a..m.cols() {
                let z: C<T> = m[(a, b)];
                out.push_str(&format!(" {:.16e} {:.16e}", z.re.as_f64(), z.im.as_f64()));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> FrequencyGrid<f64> {
        FrequencyGrid::new(16.0, 1024).unwrap()
    }

    #[test]
    fn gaussian_sampling() {
        let psd = build_psd(
            &PsdModel::Gaussian {
                amplitude: 1.0,
                width: 1.0,
            },
            &grid(),
        )
        .unwrap();
        assert_eq!(psd.scalar(512), 1.0);
        assert!((psd.scalar(544) - (-0.5f64).exp()).abs() < 1e-15);
        assert!(psd.even_asymmetry() < 1e-15);
    }

    #[test]
    fn zero_amplitude_gives_zero_psd() {
        let psd = build_psd(
            &PsdModel::Gaussian {
                amplitude: 0.0,
                width: 1.0,
            },
            &grid(),
        )
        .unwrap();
        assert!(psd.is_zero());
    }

    #[test]
    fn negative_matrix_entry_is_rejected() {
        let omega = vec![-20.0, 20.0];
        let bad = CMat::from_real_diag(&[1.0, -0.5]);
        let model = PsdModel::MatrixTabulated {
            omega,
            values: vec![bad.clone(), bad],
        };
        assert!(matches!(
            build_psd(&model, &grid()),
            Err(AtaError::NonPositivePsd { .. })
        ));
    }

    #[test]
    fn table_must_cover_grid() {
        let model = PsdModel::Tabulated {
            omega: vec![-4.0, 4.0],
            values: vec![1.0, 1.0],
        };
        assert!(matches!(
            build_psd(&model, &grid()),
            Err(AtaError::GridMismatch(_))
        ));
    }

    #[test]
    fn analytic_second_derivatives_match_differences() {
        for model in [
            PsdModel::Gaussian {
                amplitude: 1.3,
                width: 0.7,
            },
            PsdModel::Lorentzian {
                weight: 2.0,
                rate: 0.5,
            },
        ] {
            let h = 1e-4;
            for &w in &[-1.3, 0.0, 0.4, 2.2] {
                let fd = (model.value(w + h)[(0, 0)].re + model.value(w - h)[(0, 0)].re
                    - 2.0 * model.value(w)[(0, 0)].re)
                    / (h * h);
                let an = model.analytic_second_derivative(w).unwrap()[(0, 0)].re;
                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "{model:?} at {w}");
            }
        }
    }

    #[test]
    fn thermal_model_obeys_kms() {
        let model = PsdModel::ThermalOhmic {
            coupling: 0.3,
            cutoff: 1.5,
            beta: 1.0,
        };
        for &w in &[0.25, 1.0, 2.5] {
            let up = model.value(-w)[(0, 0)].re;
            let down = model.value(w)[(0, 0)].re;
            assert!((up / down - (-w).exp()).abs() < 1e-13);
        }
        let at0 = model.value(0.0)[(0, 0)].re;
        assert!((at0 - 0.3).abs() < 1e-12);
        let near = model.value(1e-9)[(0, 0)].re;
        assert!((near - at0).abs() < 1e-8);
    }

    #[test]
    fn psd_table_round_trip() {
        let omega = vec![-1.0, 0.0, 1.0];
        let m = |x: f64| {
            CMat::from_rows(&[
                vec![(1.0 + x, 0.0), (0.1, 0.2 * x)],
                vec![(0.1, -0.2 * x), (2.0, 0.0)],
            ])
        };
        let values: Vec<CMat<f64>> = omega.iter().map(|&x| m(x)).collect();
        let text = format_psd_table(&omega, &values);
        match parse_psd_table::<f64>(&text).unwrap() {
            PsdModel::MatrixTabulated { omega: o, values: v } => {
                assert_eq!(o, omega);
                assert_eq!(v, values);
            }
            other => panic!("unexpected {other:?}"),
        }
        let scalar = "# comment\n-1 0.5 0\n1 0.25 0\n";
        assert_eq!(
            parse_psd_table::<f64>(scalar).unwrap(),
            PsdModel::Tabulated {
                omega: vec![-1.0, 1.0],
                values: vec![0.5, 0.25]
            }
        );
        assert!(matches!(
            parse_psd_table::<f64>("0 1 0\n1 2\n"),
            Err(AtaError::Parse { line: 2, .. })
        ));
    }
}
