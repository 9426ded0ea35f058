use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{AtaError, Result};
use crate::linalg::CMat;
use crate::scalar::{c, Real};

/// Outcome of measuring an ancilla as it leaves the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    /// Trotter step after which the ancilla was discarded.
    pub step: usize,
    pub train: usize,
    pub index: i64,
    pub outcome: u8,
}

/// Reduced-system time series produced by one engine run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub observable_names: Vec<String>,
    /// `values[o][m]`: expectation of observable `o` at `times[m]`.
    pub values: Vec<Vec<T>>,
    pub reduced_states: Option<Vec<CMat<T>>>,
    /// Pure-state engine only.
    pub measurements: Vec<Measurement>,
    /// `(master seed, trajectory index)` for sampled runs.
    pub seed: Option<(u64, u64)>,
}

impl<T: Real> Trajectory<T> {
    pub fn observable(&self, name: &str) -> Option<&[T]> {
        self.observable_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i].as_slice())
    }

    pub fn final_state(&self) -> Option<&CMat<T>> {
        self.reduced_states.as_ref().and_then(|s| s.last())
    }
}

/// Monte-Carlo average over trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedTrajectory<T> {
    pub times: Vec<T>,
    pub observable_names: Vec<String>,
    pub mean: Vec<Vec<T>>,
    /// Standard error of the mean; zero when only one trajectory was given.
    pub stderr: Vec<Vec<T>>,
    pub count: usize,
    pub mean_states: Option<Vec<CMat<T>>>,
    /// Entrywise standard errors of the real and imaginary parts.
    pub state_stderr: Option<Vec<CMat<T>>>,
}

impl<T: Real> AveragedTrajectory<T> {
    pub fn single(&self) -> bool {
        self.count == 1
    }

    pub fn observable(&self, name: &str) -> Option<(&[T], &[T])> {
        self.observable_names
            .iter()
            .position(|n| n == name)
            .map(|i| (self.mean[i].as_slice(), self.stderr[i].as_slice()))
    }

    pub fn final_state(&self) -> Option<&CMat<T>> {
        self.mean_states.as_ref().and_then(|s| s.last())
    }
}

fn mean_and_stderr<T: Real>(xs: impl Iterator<Item = T> + Clone, n: usize) -> (T, T) {
    let nf = T::from_count(n);
    let mean = xs.clone().fold(T::zero(), |a, x| a + x) / nf;
    if n < 2 {
        return (mean, T::zero());
    }
    let var = xs.fold(T::zero(), |a, x| a + (x - mean) * (x - mean)) / T::from_count(n - 1);
    (mean, (var / nf).sqrt())
}

/// Per-time mean and standard error, accumulated in trajectory order.
pub fn average_trajectories<T: Real>(trajectories: &[Trajectory<T>]) -> Result<AveragedTrajectory<T>> {
    let first = trajectories
        .first()
        .ok_or_else(|| AtaError::InvalidParameter("no trajectories to average".into()))?;
    let n = trajectories.len();
    for tr in trajectories {
        if tr.times != first.times || tr.observable_names != first.observable_names {
            return Err(AtaError::GridMismatch(
                "trajectories have different time grids or observables".into(),
            ));
        }
        if tr.reduced_states.is_some() != first.reduced_states.is_some() {
            return Err(AtaError::GridMismatch(
                "some trajectories lack reduced states".into(),
            ));
        }
    }
    let steps = first.times.len();
    let mut mean = Vec::new();
    let mut stderr = Vec::new();
    for o in 0..first.observable_names.len() {
        let (m, s): (Vec<T>, Vec<T>) = (0..steps)
            .map(|t| mean_and_stderr(trajectories.iter().map(|tr| tr.values[o][t]), n))
            .unzip();
        mean.push(m);
        stderr.push(s);
    }
    let (mean_states, state_stderr) = if first.reduced_states.is_some() {
        let dim = first.reduced_states.as_ref().unwrap()[0].rows();
        let mut ms = Vec::with_capacity(steps);
        let mut ss = Vec::with_capacity(steps);
        for t in 0..steps {
            let entry = |i: usize, j: usize| {
                let re = trajectories
                    .iter()
                    .map(move |tr| tr.reduced_states.as_ref().unwrap()[t][(i, j)].re);
                let im = trajectories
                    .iter()
                    .map(move |tr| tr.reduced_states.as_ref().unwrap()[t][(i, j)].im);
                let (mr, sr) = mean_and_stderr(re, n);
                let (mi, si) = mean_and_stderr(im, n);
                (c(mr, mi), c(sr, si))
            };
            let mut m = CMat::zeros(dim, dim);
            let mut s = CMat::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    let (a, b) = entry(i, j);
                    m[(i, j)] = a;
                    s[(i, j)] = b;
                }
            }
            ms.push(m);
            ss.push(s);
        }
        (Some(ms), Some(ss))
    } else {
        (None, None)
    };
    Ok(AveragedTrajectory {
        times: first.times.clone(),
        observable_names: first.observable_names.clone(),
        mean,
        stderr,
        count: n,
        mean_states,
        state_stderr,
    })
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub fn log_log_slope<T: Real>(x: &[T], y: &[T]) -> T {
    let n = T::from_count(x.len());
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let mut num = T::zero();
    let mut den = T::zero();
    for (a, b) in lx.iter().zip(&ly) {
        num = num + (*a - mx) * (*b - my);
        den = den + (*a - mx) * (*a - mx);
    }
    if den == T::zero() || !Float::is_finite(num / den) {
        T::nan()
    } else {
        num / den
    }
}
