use serde::{Deserialize, Serialize};

use crate::error::{AtaError, Result};
use crate::scalar::Real;

/// Uniform frequency grid `omega_k = -omega_max + k * d_omega`, `k = 0..n_points`.
///
/// The conjugate time grid has spacing `dt = 2 pi / (n_points * d_omega)` and
/// points `t_j = (j - n_points / 2) * dt`, so `t = 0` sits at index
/// `n_points / 2`. Both grids are periodic with `n_points` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid<T> {
    omega_max: T,
    n_points: usize,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(omega_max: T, n_points: usize) -> Result<Self> {
        if !omega_max.is_finite() || omega_max <= T::zero() {
            return Err(AtaError::InvalidGrid(format!(
                "omega_max must be positive and finite, got {omega_max}"
            )));
        }
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(AtaError::InvalidGrid(format!(
                "n_points must be a power of two >= 2, got {n_points}"
            )));
        }
        Ok(Self { omega_max, n_points })
    }

    #[inline]
    pub fn omega_max(&self) -> T {
        self.omega_max
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn d_omega(&self) -> T {
        T::lit(2.0) * self.omega_max / T::from_count(self.n_points)
    }

    #[inline]
    pub fn omega(&self, k: usize) -> T {
        -self.omega_max + T::from_count(k) * self.d_omega()
    }

    pub fn omegas(&self) -> Vec<T> {
        (0..self.n_points).map(|k| self.omega(k)).collect()
    }

    /// Spacing of the conjugate time grid, equal to `pi / omega_max`.
    #[inline]
    pub fn dt(&self) -> T {
        T::PI() / self.omega_max
    }

    #[inline]
    pub fn t0_index(&self) -> usize {
        self.n_points / 2
    }

    #[inline]
    pub fn time(&self, j: usize) -> T {
        (T::from_count(j) - T::from_count(self.t0_index())) * self.dt()
    }

    /// Index of the grid frequency nearest to `omega`, if inside the grid.
    pub fn nearest_index(&self, omega: T) -> Option<usize> {
        let x = (omega + self.omega_max) / self.d_omega();
        let k = x.round();
        if k < T::zero() || k > T::from_count(self.n_points - 1) {
            None
        } else {
            k.to_usize()
        }
    }

    /// Smallest index with `omega_k >= omega` (within a relative tolerance).
    pub fn ceil_index(&self, omega: T) -> Option<usize> {
        let x = (omega + self.omega_max) / self.d_omega();
        let k = crate::scalar::ceil_tol(x);
        if k < 0 || k as usize >= self.n_points {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Same `omega_max`, `factor` times as many points (finer `d_omega`,
    /// longer time period).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.omega_max, self.n_points * factor)
    }

    /// Same `d_omega`, band widened by `factor` (finer time spacing).
    pub fn widened(&self, factor: usize) -> Result<Self> {
        Self::new(self.omega_max * T::from_count(factor), self.n_points * factor)
    }

    pub fn cast<U: Real>(&self) -> FrequencyGrid<U> {
        FrequencyGrid {
            omega_max: U::lit(self.omega_max.as_f64()),
            n_points: self.n_points,
        }
    }
}
