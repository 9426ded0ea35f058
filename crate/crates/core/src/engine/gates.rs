use num_traits::{Float, Zero};

use crate::linalg::{creation, expm_hermitian, CMat};
use crate::planner::{Hamiltonian, SimulationPlan};
use crate::scalar::{Real, C};
use crate::spectral::KernelEvaluator;

use super::window::step_window;

/// `U^{1/2} = exp(-i H_S delta_t / 2)` for step `m` (1-based). A per-step
/// Hamiltonian is taken as already evaluated at the step midpoint.
pub fn system_half_step<T: Real>(hamiltonian: &Hamiltonian<T>, m: usize, plan: &SimulationPlan<T>) -> CMat<T> {
    expm_hermitian(hamiltonian.at_step(m), plan.delta_t / T::lit(2.0))
}

/// Integrated coupling of one sub-step: the active length `l` of the
/// sub-step inside `|u| <= tau_c` and `sqrt(gamma delta_xi) g_f(u_mid)` at the
/// midpoint of that active part (`N_C x N_C`, row-major `[alpha][lambda]`).
#[derive(Clone, Debug)]
pub(crate) struct Substep<T> {
    pub length: T,
    pub coefficients: Vec<C<T>>,
}

/// Coupling data keyed by the step/ancilla offset `q = (m - 1) - n b`.
///
/// The relative time `u = s - xi_n` during step `m` spans
/// `[q delta_t, (q + 1) delta_t]`, so everything about the coupling of
/// ancilla `n` in step `m` depends on `q` only. This is what makes
/// `V_m` and `V_{m+b}` identical up to a shift of the register.
#[derive(Clone, Debug)]
pub(crate) struct CouplingTable<T> {
    q_min: i64,
    q_max: i64,
    substeps: Vec<Vec<Substep<T>>>,
}

impl<T: Real> CouplingTable<T> {
    /// Table with no coupled offsets, for windowless runs.
    pub fn empty() -> Self {
        Self {
            q_min: 0,
            q_max: -1,
            substeps: Vec::new(),
        }
    }

    pub fn new(plan: &SimulationPlan<T>, kernel: &KernelEvaluator<T>, gamma: T) -> Self {
        let channels = kernel.channels();
        let b = plan.b as i64;
        let mut q_min = i64::MAX;
        let mut q_max = i64::MIN;
        for m in 1..=plan.steps {
            let (lo, hi) = step_window(m, plan);
            q_min = q_min.min(m as i64 - 1 - hi * b);
            q_max = q_max.max(m as i64 - 1 - lo * b);
        }
        if q_min > q_max {
            return Self::empty();
        }
        let k = plan.substeps;
        let h = plan.delta_t / T::from_count(k);
        let scale = (gamma * plan.delta_xi).sqrt();
        let half = T::lit(0.5);
        let substeps = (q_min..=q_max)
            .map(|q| {
                let start = T::from_i64(q).expect("offset fits") * plan.delta_t;
                (0..k)
                    .map(|j| {
                        let a = (start + T::from_count(j) * h).max(-plan.tau_c);
                        let bnd = (start + T::from_count(j + 1) * h).min(plan.tau_c);
                        let length = (bnd - a).max(T::zero());
                        let coefficients = if length > T::zero() && scale > T::zero() {
                            kernel
                                .eval((a + bnd) * half)
                                .into_iter()
                                .map(|z| z * scale)
                                .collect()
                        } else {
                            vec![C::zero(); channels * channels]
                        };
                        Substep {
                            length,
                            coefficients,
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            q_min,
            q_max,
            substeps,
        }
    }

    pub fn q_range(&self) -> (i64, i64) {
        (self.q_min, self.q_max)
    }

    pub fn get(&self, q: i64) -> Option<&[Substep<T>]> {
        if q < self.q_min || q > self.q_max {
            return None;
        }
        Some(&self.substeps[(q - self.q_min) as usize])
    }

    /// Whether ancilla offset `q` has any nonzero coupling.
    pub fn is_coupled(&self, q: i64) -> bool {
        self.get(q).is_some_and(|subs| {
            subs.iter()
                .any(|s| s.length > T::zero() && s.coefficients.iter().any(|z| !z.is_zero()))
        })
    }
}

/// Local generator `l (X^dagger (x) a^dagger + X (x) a)` with
/// `X = sum_alpha c_{alpha lambda} S_alpha`, on system (x) one ancilla.
pub(crate) fn local_generator<T: Real>(
    sub: &Substep<T>,
    train: usize,
    couplings: &[CMat<T>],
    raise: &CMat<T>,
    lower: &CMat<T>,
) -> CMat<T> {
    let n = couplings.len();
    let dim = couplings[0].rows();
    let mut x = CMat::zeros(dim, dim);
    for (alpha, s) in couplings.iter().enumerate() {
        let coef = sub.coefficients[alpha * n + train];
        if !coef.is_zero() {
            x = &x + &s.scale(coef);
        }
    }
    let g = &x.adjoint().kron(raise) + &x.kron(lower);
    g.scale_real(sub.length)
}

/// Sub-stepped gate for one ancilla: `prod_{k = K..1} exp(-i L_k)`.
pub(crate) fn local_gate<T: Real>(
    subs: &[Substep<T>],
    train: usize,
    couplings: &[CMat<T>],
    levels: usize,
) -> CMat<T> {
    let dim = couplings[0].rows();
    let raise = creation::<T>(levels);
    let lower = raise.adjoint();
    let mut gate = CMat::identity(dim * levels);
    for sub in subs {
        if sub.length <= T::zero() {
            continue;
        }
        let l = local_generator(sub, train, couplings, &raise, &lower);
        if l.max_abs() == T::zero() {
            continue;
        }
        gate = expm_hermitian(&l, T::one()).matmul(&gate);
    }
    gate
}

/// Frobenius norm, used as a cheap upper bound of the operator norm.
pub(crate) fn norm_bound<T: Real>(m: &CMat<T>) -> T {
    Float::max(m.norm_fro(), T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, spectral_norm};
    use crate::spectral::{Correlator, CorrelatorKind, FrequencyGrid};

    /// Kernel whose spectrum is a single bin, i.e. `g(t) = w e^{-i omega t}`.
    fn single_tone(omega_index: usize, weight: f64) -> Correlator<f64> {
        let grid = FrequencyGrid::new(8.0, 64).unwrap();
        let mut spec = vec![C::new(0.0, 0.0); 64];
        spec[omega_index] = C::new(weight / grid.d_omega(), 0.0);
        Correlator::from_spectrum(CorrelatorKind::GFiltered, grid, 1, spec)
    }

    #[test]
    fn constant_commuting_generator_matches_closed_form() {
        // g(t) = 0.7 for all t (zero-frequency tone); S = sigma_z.
        let g = single_tone(32, 0.7);
        let plan = SimulationPlan::explicit(0.5, 10.0, 0.5, 8, 1.0).unwrap();
        let gamma = 0.3;
        let table = CouplingTable::new(&plan, &g.evaluator(), gamma);
        let gate = local_gate(table.get(0).unwrap(), 0, &[pauli::z()], 2);
        let theta = (gamma * plan.delta_xi).sqrt() * 0.7 * plan.delta_t;
        let gen = pauli::z::<f64>().kron(&pauli::x());
        let exact = expm_hermitian(&gen, theta);
        assert!((&gate - &exact).max_abs() < 1e-12);
    }

    #[test]
    fn complex_kernel_substeps_converge() {
        // g(t) = e^{-i t} (tone at omega = 1), S = sigma_x, one ancilla.
        let g = single_tone(36, 1.0);
        let ev = g.evaluator();
        assert!((ev.eval_scalar(0.3) - C::from_polar(1.0, -0.3)).norm() < 1e-12);
        let gate_with = |k: usize, gamma: f64| {
            let plan = SimulationPlan::explicit(1.0, 10.0, 1.0, k, 1.0).unwrap();
            let table = CouplingTable::new(&plan, &ev, gamma);
            local_gate(table.get(0).unwrap(), 0, &[pauli::x()], 2)
        };
        // Midpoint products are second order: halving h quarters the error.
        let reference = gate_with(4096, 1.0);
        let e8 = spectral_norm(&(&gate_with(8, 1.0) - &reference));
        let e16 = spectral_norm(&(&gate_with(16, 1.0) - &reference));
        assert!((e8 / e16 - 4.0).abs() < 0.3, "midpoint order: {}", e8 / e16);
        // At weak coupling the error is the midpoint quadrature error of
        // integral_0^1 e^{-is} ds times the amplitude sqrt(gamma).
        let quad = |k: usize| {
            let h = 1.0 / k as f64;
            (0..k).fold(C::new(0.0, 0.0), |a, j| a + C::from_polar(h, -(j as f64 + 0.5) * h))
        };
        let exact = (C::new(1.0, 0.0) - C::from_polar(1.0, -1.0)) / C::new(0.0, 1.0);
        for gamma in [1e-4, 1e-6] {
            let reference = gate_with(4096, gamma);
            let err = spectral_norm(&(&gate_with(64, gamma) - &reference));
            let predicted = gamma.sqrt() * ((quad(64) - exact).norm() - (quad(4096) - exact).norm());
            assert!((err / predicted - 1.0).abs() < 0.02, "{err} vs {predicted}");
        }
        let err = spectral_norm(&(&gate_with(64, 1e-6) - &gate_with(4096, 1e-6)));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn zero_coupling_gives_identity() {
        let g = single_tone(36, 1.0);
        let plan = SimulationPlan::explicit(0.5, 2.0, 0.5, 8, 2.0).unwrap();
        let table = CouplingTable::new(&plan, &g.evaluator(), 0.0);
        let (lo, hi) = table.q_range();
        for q in lo..=hi {
            let gate = local_gate(table.get(q).unwrap(), 0, &[pauli::x()], 2);
            assert!((&gate - &CMat::identity(4)).max_abs() == 0.0);
            assert!(!table.is_coupled(q));
        }
    }

    #[test]
    fn half_step_examples() {
        let plan = SimulationPlan::explicit(std::f64::consts::FRAC_PI_2, 1.0, std::f64::consts::FRAC_PI_2, 1, 3.0)
            .unwrap();
        let u = system_half_step(&Hamiltonian::Constant(pauli::z::<f64>()), 1, &plan);
        let e = C::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
        assert!((u[(0, 0)] - e).norm() < 1e-14 && (u[(1, 1)] - e.conj()).norm() < 1e-14);
        let id = system_half_step(&Hamiltonian::Constant(CMat::<f64>::zeros(2, 2)), 1, &plan);
        assert_eq!(id, CMat::identity(2));
    }
}
