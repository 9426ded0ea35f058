//! Resolution parameters and resource estimates from a target accuracy.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{AtaError, Result};
use crate::linalg::{spectral_norm, CMat, HermitianEigen};
use crate::scalar::{ceil_tol, floor_tol, Real, C};
use crate::spectral::{norm21_moments, BathScales, Correlator, ScalesOptions};

/// System Hamiltonian, either constant or one matrix per Trotter step
/// (evaluated at the step midpoint by the caller).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hamiltonian<T> {
    Constant(CMat<T>),
    PerStep(Vec<CMat<T>>),
}

impl<T: Real> Hamiltonian<T> {
    /// Hamiltonian used for step `m` (1-based).
    pub fn at_step(&self, m: usize) -> &CMat<T> {
        match self {
            Hamiltonian::Constant(h) => h,
            Hamiltonian::PerStep(hs) => &hs[(m.max(1) - 1).min(hs.len() - 1)],
        }
    }

    pub fn matrices(&self) -> Vec<&CMat<T>> {
        match self {
            Hamiltonian::Constant(h) => vec![h],
            Hamiltonian::PerStep(hs) => hs.iter().collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Hamiltonian::Constant(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState<T> {
    Pure(Vec<C<T>>),
    Density(CMat<T>),
}

impl<T: Real> InitialState<T> {
    pub fn density(&self) -> CMat<T> {
        match self {
            InitialState::Pure(v) => {
                CMat::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
            }
            InitialState::Density(r) => r.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialState::Pure(v) => v.len(),
            InitialState::Density(r) => r.rows(),
        }
    }
}

/// Open-system problem: `H_S`, couplings `S_alpha` with unit norm, coupling
/// scale `gamma`, initial state and named observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec<T> {
    pub dim: usize,
    pub hamiltonian: Hamiltonian<T>,
    pub couplings: Vec<CMat<T>>,
    pub gamma: T,
    pub initial_state: InitialState<T>,
    pub observables: Vec<(String, CMat<T>)>,
}

impl<T: Real> SystemSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AtaError::InvalidSystem(m));
        let dim = self.dim;
        if dim == 0 {
            return bad("system dimension must be positive".into());
        }
        let herm_tol = T::lit(1e-10).max(T::eps_times(256.0));
        let check_square = |name: &str, m: &CMat<T>| -> Result<()> {
            if m.rows() != dim || m.cols() != dim {
                return Err(AtaError::InvalidSystem(format!(
                    "{name} must be {dim}x{dim}, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_hermitian(herm_tol * T::one().max(m.max_abs())) {
                return Err(AtaError::InvalidSystem(format!("{name} hermiticity")));
            }
            Ok(())
        };
        for (i, h) in self.hamiltonian.matrices().into_iter().enumerate() {
            check_square(&format!("H_S[{i}]"), h)?;
        }
        if let Hamiltonian::PerStep(hs) = &self.hamiltonian {
            if hs.is_empty() {
                return bad("per-step Hamiltonian sequence is empty".into());
            }
        }
        if self.couplings.is_empty() {
            return bad("at least one coupling operator is required".into());
        }
        let norm_tol = T::lit(1e-9).max(T::eps_times(1024.0));
        for (a, s) in self.couplings.iter().enumerate() {
            check_square(&format!("S[{a}]"), s)?;
            let n = spectral_norm(s);
            if Float::abs(n - T::one()) > norm_tol {
                return bad(format!("S[{a}] must have unit operator norm, got {n}"));
            }
        }
        if !(self.gamma >= T::zero()) || !self.gamma.is_finite() {
            return bad(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        for (name, o) in &self.observables {
            check_square(&format!("observable {name}"), o)?;
        }
        let state_tol = T::lit(1e-9).max(T::eps_times(1024.0));
        match &self.initial_state {
            InitialState::Pure(v) => {
                if v.len() != dim {
                    return bad(format!("initial state has length {}, expected {dim}", v.len()));
                }
                let n: T = v.iter().map(|z| z.norm_sqr()).sum();
                if Float::abs(n - T::one()) > state_tol {
                    return bad(format!("initial state must be normalized, norm^2 = {n}"));
                }
            }
            InitialState::Density(r) => {
                check_square("initial density matrix", r)?;
                let tr = r.trace().re;
                if Float::abs(tr - T::one()) > state_tol {
                    return bad(format!("initial density matrix must have unit trace, got {tr}"));
                }
                let min = HermitianEigen::new(r).min();
                if min < -T::lit(1e-9).max(T::eps_times(1024.0)) {
                    return bad(format!("initial density matrix has negative eigenvalue {min}"));
                }
            }
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.couplings.len()
    }

    /// Whether all coupling operators commute with each other.
    pub fn couplings_commute(&self) -> bool {
        let tol = T::lit(1e-10).max(T::eps_times(256.0));
        for (i, a) in self.couplings.iter().enumerate() {
            for b in &self.couplings[i + 1..] {
                if a.commutator(b).max_abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Number of qubits needed for the system register.
    pub fn system_qubits(&self) -> usize {
        let mut q = 0;
        while (1usize << q) < self.dim {
            q += 1;
        }
        q
    }
}

/// Norms entering the Trotter step-size bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorScale<T> {
    /// `s_alpha = ||S_alpha||`.
    pub s: Vec<T>,
    /// `sdot_alpha = ||[H_S, S_alpha]||`.
    pub sdot: Vec<T>,
    /// `sddot_alpha = ||[H_S, [H_S, S_alpha]]||`.
    pub sddot: Vec<T>,
    pub s_norm: T,
    pub sdot_norm: T,
    pub sddot_norm: T,
}

fn norm2<T: Real>(xs: &[T]) -> T {
    xs.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Spectral norms of the commutators of `H_S` with each `S_alpha`. For a
/// per-step Hamiltonian the maximum over steps is reported.
pub fn commutator_scale<T: Real>(spec: &SystemSpec<T>) -> CommutatorScale<T> {
    let hs = spec.hamiltonian.matrices();
    let mut s = Vec::new();
    let mut sdot = Vec::new();
    let mut sddot = Vec::new();
    for op in &spec.couplings {
        s.push(spectral_norm(op));
        let mut d1 = T::zero();
        let mut d2 = T::zero();
        for h in &hs {
            let c1 = h.commutator(op);
            d1 = d1.max(spectral_norm(&c1));
            d2 = d2.max(spectral_norm(&h.commutator(&c1)));
        }
        sdot.push(d1);
        sddot.push(d2);
    }
    CommutatorScale {
        s_norm: norm2(&s),
        sdot_norm: norm2(&sdot),
        sddot_norm: norm2(&sddot),
        s,
        sdot,
        sddot,
    }
}

/// Resolution parameters of an ancilla-train run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan<T> {
    /// Ancilla spacing `delta_xi`.
    pub delta_xi: T,
    /// Coupling-window half width `tau_c`.
    pub tau_c: T,
    /// Trotter step `delta_t`.
    pub delta_t: T,
    /// Midpoint sub-steps per coupling gate.
    pub substeps: usize,
    /// Ancillas per train held by the register, `ceil((2 tau_c + delta_t) / delta_xi)`.
    pub window_size: usize,
    /// Trotter steps `M = floor(T / delta_t)`.
    pub steps: usize,
    /// Target accuracy used to derive the plan (zero for explicit plans).
    pub epsilon: T,
    /// `delta_xi / delta_t`.
    pub b: usize,
    /// Requested total time `T`.
    pub total_time: T,
}

pub const DEFAULT_SUBSTEPS: usize = 8;

/// Step-size rule for the Trotter step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule<T> {
    /// `delta_t <= epsilon / sqrt(Gamma sdot)`.
    MainText,
    /// Minimum of the main-text bound and the six-term ladder that needs the
    /// constant `C_1` (see [`trotter_constant`]).
    Strict { c1: T },
}

impl<T: Real> SimulationPlan<T> {
    /// Plan from explicit parameters. `delta_xi` must be an integer multiple of
    /// `delta_t` (within 1e-9 relative).
    pub fn explicit(
        delta_xi: T,
        tau_c: T,
        delta_t: T,
        substeps: usize,
        total_time: T,
    ) -> Result<Self> {
        let pos = |name: &str, x: T| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(AtaError::InvalidParameter(format!("{name} must be positive, got {x}")))
            }
        };
        pos("delta_xi", delta_xi)?;
        pos("delta_t", delta_t)?;
        pos("total time", total_time)?;
        if !(tau_c >= T::zero()) || !tau_c.is_finite() {
            return Err(AtaError::InvalidParameter(format!("tau_c must be >= 0, got {tau_c}")));
        }
        if substeps == 0 {
            return Err(AtaError::InvalidParameter("substeps must be >= 1".into()));
        }
        let ratio = delta_xi / delta_t;
        let b = ratio.round();
        if b < T::one() || Float::abs(ratio - b) > T::lit(1e-9) * ratio {
            return Err(AtaError::InvalidParameter(format!(
                "delta_xi / delta_t = {ratio} must be a positive integer"
            )));
        }
        let b = b.to_usize().expect("integer ratio");
        let delta_t = delta_xi / T::from_count(b);
        Ok(Self::assemble(delta_xi, tau_c, delta_t, b, substeps, total_time, T::zero()))
    }

    /// Windowless plan for `gamma = 0` or a vanishing bath: pure system evolution.
    pub fn unitary(delta_t: T, total_time: T) -> Result<Self> {
        let mut p = Self::explicit(delta_t, T::zero(), delta_t, 1, total_time)?;
        p.window_size = 0;
        Ok(p)
    }

    fn assemble(
        delta_xi: T,
        tau_c: T,
        delta_t: T,
        b: usize,
        substeps: usize,
        total_time: T,
        epsilon: T,
    ) -> Self {
        let window_size = ceil_tol((T::lit(2.0) * tau_c + delta_t) / delta_xi).max(0) as usize;
        let steps = floor_tol(total_time / delta_t).max(0) as usize;
        Self {
            delta_xi,
            tau_c,
            delta_t,
            substeps,
            window_size,
            steps,
            epsilon,
            b,
            total_time,
        }
    }

    pub fn is_windowless(&self) -> bool {
        self.window_size == 0
    }

    /// Time of grid point `m`, `t_m = m delta_t`.
    pub fn time(&self, m: usize) -> T {
        T::from_count(m) * self.delta_t
    }

    pub fn with_substeps(mut self, k: usize) -> Self {
        self.substeps = k.max(1);
        self
    }
}

/// Plan from a target accuracy:
/// `delta_xi = min(eps / Gamma, pi / Lambda)`, `tau_c = tau / eps`,
/// `delta_t = delta_xi / ceil(delta_xi sqrt(Gamma sdot) / eps)` (or `delta_xi`
/// when `sdot = 0`).
pub fn plan<T: Real>(epsilon: T, scales: &BathScales<T>, lambda: T, sdot: T, total_time: T) -> Result<SimulationPlan<T>> {
    plan_with_rule(epsilon, scales, lambda, sdot, None, total_time, StepRule::MainText)
}

pub fn plan_with_rule<T: Real>(
    epsilon: T,
    scales: &BathScales<T>,
    lambda: T,
    sdot: T,
    commutators: Option<&CommutatorScale<T>>,
    total_time: T,
    rule: StepRule<T>,
) -> Result<SimulationPlan<T>> {
    if !(epsilon > T::zero()) || !(epsilon < T::one()) {
        return Err(AtaError::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(total_time > T::zero()) || !total_time.is_finite() {
        return Err(AtaError::InvalidParameter(format!(
            "total time must be positive, got {total_time}"
        )));
    }
    if scales.zero_bath || !(scales.big_gamma > T::zero()) {
        return Err(AtaError::DegenerateBath);
    }
    if !(lambda > T::zero()) || !(sdot >= T::zero()) {
        return Err(AtaError::InvalidParameter(
            "Lambda must be positive and sdot non-negative".into(),
        ));
    }
    let gamma_rate = scales.big_gamma;
    let tau = scales.tau;
    let delta_xi = (epsilon / gamma_rate).min(T::PI() / lambda);
    let tau_c = tau / epsilon;

    let mut bound = if sdot > T::zero() {
        epsilon / (gamma_rate * sdot).sqrt()
    } else {
        T::infinity()
    };
    if let (StepRule::Strict { c1 }, Some(cs)) = (rule, commutators) {
        bound = bound.min(strict_step_bound(epsilon, gamma_rate, tau, delta_xi, c1, cs));
    }
    let b = if bound.is_finite() {
        ceil_tol(delta_xi / bound).max(1) as usize
    } else {
        1
    };
    let delta_t = delta_xi / T::from_count(b);
    Ok(SimulationPlan::assemble(
        delta_xi,
        tau_c,
        delta_t,
        b,
        DEFAULT_SUBSTEPS,
        total_time,
        epsilon,
    ))
}

/// Six-term step-size ladder for second-order Trotterization with a
/// time-dependent coupling part. Terms whose denominator vanishes impose no
/// constraint.
pub fn strict_step_bound<T: Real>(
    epsilon: T,
    gamma_rate: T,
    tau: T,
    delta_xi: T,
    c1: T,
    cs: &CommutatorScale<T>,
) -> T {
    let third = T::one() / T::lit(3.0);
    let root_gx = (gamma_rate * delta_xi).sqrt();
    let sd_s = cs.sdot_norm * cs.s_norm;
    let ratio = |num: T, den: T| if den > T::zero() { num / den } else { T::infinity() };
    let terms = [
        ratio(epsilon * delta_xi * tau, c1 * sd_s).powf(third),
        ratio(epsilon * tau * tau, c1 * c1 * sd_s).powf(third),
        ratio(epsilon * delta_xi, sd_s).sqrt(),
        ratio(epsilon * tau, c1 * sd_s).sqrt(),
        ratio(epsilon * root_gx, cs.sddot_norm).sqrt(),
        ratio(epsilon * root_gx * tau, c1 * cs.sdot_norm).sqrt(),
    ];
    terms.iter().fold(T::infinity(), |m, &x| m.min(x))
}

/// `C_1 = sqrt(gamma) Gamma^{-1/2} tau integral ||g'(s)||_{2,1} ds`.
///
/// With `Gamma = 4 gamma [integral ||g||]^2` the coupling cancels and
/// `C_1 = tau integral ||g'|| / (2 integral ||g||)`. The derivative is taken
/// spectrally.
pub fn trotter_constant<T: Real>(g: &Correlator<T>, scales: &BathScales<T>) -> Result<T> {
    let opts = ScalesOptions::default();
    let (m0, _) = norm21_moments(g, opts)?;
    if m0 <= T::zero() {
        return Err(AtaError::ZeroBath);
    }
    let (d0, _) = norm21_moments(&g.derivative(), opts)?;
    Ok(scales.tau * d0 / (T::lit(2.0) * m0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Ok,
    WarnLarge,
    Infeasible,
}

pub const PURE_QUBIT_LIMIT: usize = 26;
pub const DENSITY_QUBIT_LIMIT: usize = 13;

impl Feasibility {
    pub fn classify(qubits: usize, limit: usize) -> Self {
        if qubits > limit {
            Feasibility::Infeasible
        } else if qubits + 4 > limit {
            Feasibility::WarnLarge
        } else {
            Feasibility::Ok
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    /// `ceil(max(2 Gamma tau / eps^2, 2 Lambda tau / (pi eps)))`.
    pub ancilla_count: u64,
    /// `window_size * steps`.
    pub ancilla_gate_count: u64,
    /// `n_sys + N_C * window_size`.
    pub statevector_qubits: usize,
    pub pure: Feasibility,
    pub density: Feasibility,
}

pub fn resource_estimate<T: Real>(
    plan: &SimulationPlan<T>,
    spec: &SystemSpec<T>,
    scales: &BathScales<T>,
    lambda: T,
) -> ResourceEstimate {
    let ancilla_count = if plan.epsilon > T::zero() {
        ancilla_count(plan.epsilon, scales.big_gamma * scales.tau, lambda * scales.tau)
    } else {
        0
    };
    let qubits = spec.system_qubits() + spec.channels() * plan.window_size;
    ResourceEstimate {
        ancilla_count,
        ancilla_gate_count: (plan.window_size as u64) * (plan.steps as u64),
        statevector_qubits: qubits,
        pure: Feasibility::classify(qubits, PURE_QUBIT_LIMIT),
        density: Feasibility::classify(qubits, DENSITY_QUBIT_LIMIT),
    }
}

/// `ceil(max(2 Gamma tau / eps^2, 2 Lambda tau / (pi eps)))` from the products
/// `Gamma tau` and `Lambda tau`.
pub fn ancilla_count<T: Real>(epsilon: T, gamma_tau: T, lambda_tau: T) -> u64 {
    let two = T::lit(2.0);
    let n = (two * gamma_tau / (epsilon * epsilon)).max(two * lambda_tau / (T::PI() * epsilon));
    ceil_tol(n).max(0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    fn scales(big_gamma: f64, tau: f64) -> BathScales<f64> {
        BathScales {
            big_gamma,
            tau,
            big_gamma_f: big_gamma,
            tau_f: tau,
            gamma: 1.0,
            zero_bath: false,
        }
    }

    fn qubit_spec(h: CMat<f64>, s: CMat<f64>) -> SystemSpec<f64> {
        SystemSpec {
            dim: 2,
            hamiltonian: Hamiltonian::Constant(h),
            couplings: vec![s],
            gamma: 0.1,
            initial_state: InitialState::Pure(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]),
            observables: vec![],
        }
    }

    #[test]
    fn plan_examples() {
        let p = plan(0.1, &scales(1.0, 0.5), 10.0, 1.0, 1.0).unwrap();
        assert!((p.delta_xi - 0.1).abs() < 1e-15);
        assert!((p.tau_c - 5.0).abs() < 1e-12);
        assert_eq!(p.b, 1);
        assert!((p.delta_t - 0.1).abs() < 1e-15);
        assert_eq!(p.window_size, 101);
        assert_eq!(p.steps, 10);
        assert_eq!(p.substeps, 8);

        let p = plan(0.2, &scales(0.25, 0.4), 8.0, 0.0, 1.0).unwrap();
        assert!((p.delta_xi - std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert!((p.tau_c - 2.0).abs() < 1e-12);
        assert_eq!(p.delta_t, p.delta_xi);
        assert_eq!(p.window_size, 12);

        let mut zero = scales(0.0, 0.0);
        zero.zero_bath = true;
        assert_eq!(plan(0.1, &zero, 1.0, 1.0, 1.0), Err(AtaError::DegenerateBath));
        let u = SimulationPlan::<f64>::unitary(0.1, 1.0).unwrap();
        assert_eq!(u.window_size, 0);
        assert_eq!(u.steps, 10);
    }

    #[test]
    fn explicit_plan_requires_commensurate_steps() {
        assert!(SimulationPlan::explicit(0.4, 1.2, 0.1, 8, 2.0).is_ok());
        assert!(SimulationPlan::explicit(0.4, 1.2, 0.3, 8, 2.0).is_err());
        let p = SimulationPlan::explicit(0.4, 1.2, 0.1, 8, 2.0).unwrap();
        assert_eq!(p.b, 4);
        assert_eq!(p.steps, 20);
        assert_eq!(p.window_size, 7);
    }

    #[test]
    fn commutator_scales_for_paulis() {
        let (x, z) = (pauli::x::<f64>(), pauli::z::<f64>());
        let cs = commutator_scale(&qubit_spec(z.scale_real(0.5), x.clone()));
        assert!((cs.sdot[0] - 1.0).abs() < 1e-12);
        assert!((cs.sddot[0] - 1.0).abs() < 1e-12);
        let cs = commutator_scale(&qubit_spec(z.scale_real(0.5), z.clone()));
        assert!(cs.sdot[0].abs() < 1e-15);
    }

    #[test]
    fn strict_rule_only_tightens() {
        let (x, z) = (pauli::x::<f64>(), pauli::z::<f64>());
        let cs = commutator_scale(&qubit_spec(z.scale_real(0.5), x));
        let sc = scales(1.0, 0.5);
        let main = plan(0.1, &sc, 10.0, cs.sdot_norm, 1.0).unwrap();
        let strict = plan_with_rule(0.1, &sc, 10.0, cs.sdot_norm, Some(&cs), 1.0, StepRule::Strict { c1: 2.0 })
            .unwrap();
        assert!(strict.delta_t <= main.delta_t);
        assert_eq!(strict.delta_xi, main.delta_xi);
        assert_eq!(strict.b as f64 * strict.delta_t, strict.delta_xi);
    }

    #[test]
    fn ancilla_count_examples() {
        assert_eq!(ancilla_count(0.1, 0.5, 5.0), 100);
        assert_eq!(ancilla_count(0.5, 0.05, 1.0), 2);
    }

    #[test]
    fn feasibility_threshold() {
        assert_eq!(Feasibility::classify(30, PURE_QUBIT_LIMIT), Feasibility::Infeasible);
        assert_eq!(Feasibility::classify(10, PURE_QUBIT_LIMIT), Feasibility::Ok);
        assert_eq!(Feasibility::classify(14, DENSITY_QUBIT_LIMIT), Feasibility::Infeasible);
    }

    #[test]
    fn spec_validation() {
        let (x, z) = (pauli::x::<f64>(), pauli::z::<f64>());
        assert!(qubit_spec(z.clone(), x.clone()).validate().is_ok());
        let mut bad = qubit_spec(z.clone(), x.scale_real(2.0));
        assert!(bad.validate().is_err());
        bad = qubit_spec(
            CMat::from_rows(&[vec![(0.0, 0.0), (1.0, 0.0)], vec![(0.0, 0.0), (0.0, 0.0)]]),
            x,
        );
        let err = bad.validate().unwrap_err();
        assert!(err.to_string().contains("hermiticity"));
    }
}
