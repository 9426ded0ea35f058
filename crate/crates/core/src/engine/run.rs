use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AtaError, Result};
use crate::linalg::{creation, expm_hermitian, CMat, HermitianEigen};
use crate::planner::{InitialState, SimulationPlan, SystemSpec, DENSITY_QUBIT_LIMIT, PURE_QUBIT_LIMIT};
use crate::rng::{stream_rng, StreamRng};
use crate::scalar::{Real, C};
use crate::spectral::Correlator;

use super::branch::{sample, BranchBasis, BranchState, Coefficients};
use super::gates::{local_gate, local_generator, norm_bound, CouplingTable};
use super::state::{density, pure, Buffer, Layout, Target};
use super::trajectory::{Measurement, Trajectory};
use super::window::{active_window, max_window_len, step_window};

/// How the joint state is stored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Branch form when the model allows it, dense otherwise.
    #[default]
    Auto,
    /// Dense vector or matrix over system (x) all window slots.
    Dense,
    /// Per-branch product form; needs `H_S` and all `S_alpha` to share an
    /// eigenbasis.
    Branch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Pure,
    Density,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineOptions {
    /// Levels per ancilla: 2 for qubits, more for the truncated oscillator.
    pub levels: usize,
    pub representation: Representation,
    pub record_states: bool,
    pub record_measurements: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            levels: 2,
            representation: Representation::Auto,
            record_states: true,
            record_measurements: true,
        }
    }
}

#[derive(Clone, Debug)]
enum Repr<T> {
    DensePure(Buffer<T>),
    DenseDensity(Buffer<T>),
    Branch(BranchState<T>),
}

/// Joint system (x) ancilla-window state between Trotter steps.
#[derive(Clone, Debug)]
pub struct EngineState<T> {
    step: usize,
    time: T,
    /// Train-index range currently held, identical for every train.
    window: Option<(i64, i64)>,
    slots_per_train: usize,
    trains: usize,
    repr: Repr<T>,
}

impl<T: Real> EngineState<T> {
    /// Number of completed Trotter steps.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn window(&self) -> Option<(i64, i64)> {
        self.window
    }

    pub fn is_pure(&self) -> bool {
        match &self.repr {
            Repr::DensePure(_) => true,
            Repr::DenseDensity(_) => false,
            Repr::Branch(b) => matches!(b.coeff, Coefficients::Pure(_)),
        }
    }

    /// `(slot, train, n)` for every held ancilla, ordered by train then `n`.
    pub fn ancilla_map(&self) -> Vec<(usize, usize, i64)> {
        let Some((lo, hi)) = self.window else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for lambda in 0..self.trains {
            for n in lo..=hi {
                out.push((slot_of(lambda, n, self.slots_per_train), lambda, n));
            }
        }
        out
    }

    /// Norm of a pure state or trace of a density matrix.
    pub fn norm(&self) -> T {
        match &self.repr {
            Repr::DensePure(b) => pure::norm_sqr(b).sqrt(),
            Repr::DenseDensity(b) => density::trace(b),
            Repr::Branch(b) => match &b.coeff {
                Coefficients::Pure(c) => c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt(),
                Coefficients::Density(r) => r.trace().re,
            },
        }
    }
}

fn slot_of(train: usize, n: i64, per_train: usize) -> usize {
    train * per_train + n.rem_euclid(per_train as i64) as usize
}

#[derive(Clone, Debug)]
enum Mode<T> {
    Dense {
        /// All couplings commute: `V_m` factorizes into one gate per ancilla.
        factorized: bool,
        /// `[(q - q_min) * N_C + lambda]`.
        gates: Vec<CMat<T>>,
        /// `[(q - q_min) * N_C + lambda][substep]`, non-factorized case.
        generators: Vec<Vec<CMat<T>>>,
        half: Vec<CMat<T>>,
    },
    Branch {
        basis: BranchBasis<T>,
        /// `[(q - q_min) * N_C + lambda][k]`.
        gates: Vec<Vec<CMat<T>>>,
        /// Diagonal of `U^{1/2}` per distinct Hamiltonian.
        half: Vec<Vec<C<T>>>,
    },
}

/// Gate caches and run logic for one model and plan. Immutable once built and
/// shared read-only across trajectory workers.
#[derive(Clone, Debug)]
pub struct Simulator<T> {
    spec: SystemSpec<T>,
    plan: SimulationPlan<T>,
    options: EngineOptions,
    windowless: bool,
    slots_per_train: usize,
    layout: Layout,
    table: CouplingTable<T>,
    mode: Mode<T>,
}

impl<T: Real> Simulator<T> {
    pub fn new(
        spec: &SystemSpec<T>,
        g_f: &Correlator<T>,
        plan: &SimulationPlan<T>,
        options: EngineOptions,
    ) -> Result<Self> {
        spec.validate()?;
        if options.levels < 2 {
            return Err(AtaError::InvalidParameter(format!(
                "ancillas need at least 2 levels, got {}",
                options.levels
            )));
        }
        let channels = spec.channels();
        if g_f.channels() != channels {
            return Err(AtaError::InvalidParameter(format!(
                "correlator has {} channels but the system has {channels} couplings",
                g_f.channels()
            )));
        }
        let windowless = plan.is_windowless()
            || channels == 0
            || spec.gamma == T::zero()
            || g_f.is_zero();
        let (slots_per_train, table) = if windowless {
            (0, CouplingTable::empty())
        } else {
            (
                max_window_len(plan),
                CouplingTable::new(plan, &g_f.evaluator(), spec.gamma),
            )
        };
        let layout = Layout::new(spec.dim, options.levels, channels * slots_per_train);

        let basis = match options.representation {
            Representation::Dense => None,
            Representation::Auto => BranchBasis::find(spec),
            Representation::Branch => Some(BranchBasis::find(spec).ok_or_else(|| {
                AtaError::InvalidSystem(
                    "branch representation needs H_S and all couplings to share an eigenbasis".into(),
                )
            })?),
        };
        let (q_min, q_max) = table.q_range();
        let keys: Vec<(i64, usize)> = (q_min..=q_max)
            .flat_map(|q| (0..channels).map(move |l| (q, l)))
            .collect();
        let half_t = plan.delta_t / T::lit(2.0);
        let mode = match basis {
            Some(basis) => {
                let branch_couplings: Vec<Vec<CMat<T>>> =
                    (0..spec.dim).map(|k| basis.branch_couplings(k)).collect();
                let gates = keys
                    .par_iter()
                    .map(|&(q, l)| {
                        let subs = table.get(q).expect("offset in range");
                        branch_couplings
                            .iter()
                            .map(|bc| local_gate(subs, l, bc, options.levels))
                            .collect()
                    })
                    .collect();
                let half = basis
                    .h
                    .iter()
                    .map(|e| e.iter().map(|&x| C::from_polar(T::one(), -x * half_t)).collect())
                    .collect();
                Mode::Branch { basis, gates, half }
            }
            None => {
                let factorized = spec.couplings_commute();
                let half = spec
                    .hamiltonian
                    .matrices()
                    .iter()
                    .map(|h| expm_hermitian(h, half_t))
                    .collect();
                let (gates, generators) = if factorized {
                    let gates = keys
                        .par_iter()
                        .map(|&(q, l)| {
                            local_gate(table.get(q).expect("offset in range"), l, &spec.couplings, options.levels)
                        })
                        .collect();
                    (gates, Vec::new())
                } else {
                    let raise = creation::<T>(options.levels);
                    let lower = raise.adjoint();
                    let generators = keys
                        .iter()
                        .map(|&(q, l)| {
                            table
                                .get(q)
                                .expect("offset in range")
                                .iter()
                                .map(|sub| local_generator(sub, l, &spec.couplings, &raise, &lower))
                                .collect()
                        })
                        .collect();
                    (Vec::new(), generators)
                };
                Mode::Dense {
                    factorized,
                    gates,
                    generators,
                    half,
                }
            }
        };
        Ok(Self {
            spec: spec.clone(),
            plan: *plan,
            options,
            windowless,
            slots_per_train,
            layout,
            table,
            mode,
        })
    }

    pub fn plan(&self) -> &SimulationPlan<T> {
        &self.plan
    }

    pub fn spec(&self) -> &SystemSpec<T> {
        &self.spec
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    /// Whether the branch representation is in use.
    pub fn uses_branches(&self) -> bool {
        matches!(self.mode, Mode::Branch { .. })
    }

    /// Ancilla slots held by the register (all trains).
    pub fn slots(&self) -> usize {
        self.layout.slots
    }

    /// Qubits of the dense register (`log2` of its dimension, rounded up).
    pub fn register_qubits(&self) -> usize {
        let bits = (self.spec.dim as f64).log2() + self.layout.slots as f64 * (self.options.levels as f64).log2();
        (bits - 1e-9).ceil().max(0.0) as usize
    }

    fn check_feasible(&self, kind: StateKind) -> Result<()> {
        if self.uses_branches() {
            return Ok(());
        }
        let (limit, what) = match kind {
            StateKind::Pure => (PURE_QUBIT_LIMIT, "pure-state"),
            StateKind::Density => (DENSITY_QUBIT_LIMIT, "density-matrix"),
        };
        let q = self.register_qubits();
        if q > limit {
            return Err(AtaError::InfeasiblePlan(format!(
                "{what} engine needs {q} qubits, limit is {limit}"
            )));
        }
        Ok(())
    }

    /// Joint state at `t = 0` with every ancilla in `|0>`. A mixed initial
    /// state is sampled from its eigendecomposition for the pure engine.
    pub fn initial_state<R: Rng>(&self, kind: StateKind, rng: &mut R) -> Result<EngineState<T>> {
        self.check_feasible(kind)?;
        let dim = self.spec.dim;
        let repr = match kind {
            StateKind::Pure => {
                let psi = match &self.spec.initial_state {
                    InitialState::Pure(v) => {
                        let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
                        v.iter().map(|z| *z / n).collect::<Vec<_>>()
                    }
                    InitialState::Density(r) => {
                        let eig = HermitianEigen::new(&r.hermitize());
                        let w: Vec<T> = eig.values.iter().map(|&x| x.max(T::zero())).collect();
                        let k = sample(&w, rng);
                        (0..dim).map(|i| eig.vectors[(i, k)]).collect()
                    }
                };
                match &self.mode {
                    Mode::Branch { basis, .. } => {
                        let c = basis.p.adjoint().matvec(&psi);
                        Repr::Branch(BranchState::new(
                            Coefficients::Pure(c),
                            dim,
                            self.layout.slots,
                            self.options.levels,
                        ))
                    }
                    Mode::Dense { .. } => Repr::DensePure(pure::product(&self.layout, &psi)),
                }
            }
            StateKind::Density => {
                let rho = self.spec.initial_state.density();
                let tr = rho.trace().re;
                let rho = rho.scale_real(T::one() / tr);
                match &self.mode {
                    Mode::Branch { basis, .. } => {
                        let r = basis.p.adjoint().matmul(&rho).matmul(&basis.p);
                        Repr::Branch(BranchState::new(
                            Coefficients::Density(r),
                            dim,
                            self.layout.slots,
                            self.options.levels,
                        ))
                    }
                    Mode::Dense { .. } => Repr::DenseDensity(density::product(&self.layout, &rho)),
                }
            }
        };
        Ok(EngineState {
            step: 0,
            time: T::zero(),
            window: None,
            slots_per_train: self.slots_per_train,
            trains: self.spec.channels(),
            repr,
        })
    }

    fn gate_index(&self, q: i64, lambda: usize) -> usize {
        (q - self.table.q_range().0) as usize * self.spec.channels() + lambda
    }

    /// Brings the ancillas of step `m` into the window. Incoming slots are
    /// already `|0>` because discarded slots are reset.
    pub fn load_window(&self, state: &mut EngineState<T>, m: usize) -> Result<()> {
        if state.step + 1 != m {
            return Err(AtaError::WindowMismatch(format!(
                "state is at step {} but step {m} was requested",
                state.step
            )));
        }
        if self.windowless {
            return Ok(());
        }
        let (lo, hi) = step_window(m, &self.plan);
        if let Some((held_lo, held_hi)) = state.window {
            if held_lo != lo || held_hi > hi {
                return Err(AtaError::WindowMismatch(format!(
                    "held [{held_lo}, {held_hi}] cannot be extended to [{lo}, {hi}]"
                )));
            }
        }
        state.window = Some((lo, hi));
        Ok(())
    }

    /// `G_m = U^{1/2} V_m U^{1/2}`.
    pub fn trotter_step(&self, state: &mut EngineState<T>, m: usize) -> Result<()> {
        if state.step + 1 != m {
            return Err(AtaError::WindowMismatch(format!(
                "state is at step {} but step {m} was requested",
                state.step
            )));
        }
        let expected = if self.windowless {
            None
        } else {
            Some(step_window(m, &self.plan))
        };
        if state.window != expected {
            return Err(AtaError::WindowMismatch(format!(
                "step {m} needs ancillas {expected:?}, window holds {:?}",
                state.window
            )));
        }
        self.half_step(state, m);
        self.coupling_step(state, m);
        self.half_step(state, m);
        state.step = m;
        state.time = self.plan.time(m);
        Ok(())
    }

    fn hamiltonian_index(&self, m: usize, count: usize) -> usize {
        (m.max(1) - 1).min(count - 1)
    }

    fn half_step(&self, state: &mut EngineState<T>, m: usize) {
        match (&self.mode, &mut state.repr) {
            (Mode::Branch { half, .. }, Repr::Branch(b)) => {
                b.apply_diagonal(&half[self.hamiltonian_index(m, half.len())]);
            }
            (Mode::Dense { half, .. }, Repr::DensePure(psi)) => {
                psi.left_apply(&self.layout, &half[self.hamiltonian_index(m, half.len())], Target::System);
            }
            (Mode::Dense { half, .. }, Repr::DenseDensity(rho)) => {
                let u = &half[self.hamiltonian_index(m, half.len())];
                density::conjugate(&self.layout, rho, u, Target::System);
            }
            _ => unreachable!("state built by another simulator"),
        }
    }

    /// Coupled `(slot, gate index)` pairs of step `m`.
    fn coupled_slots(&self, m: usize, window: (i64, i64)) -> Vec<(usize, usize)> {
        let b = self.plan.b as i64;
        let mut out = Vec::new();
        for lambda in 0..self.spec.channels() {
            for n in window.0..=window.1 {
                let q = m as i64 - 1 - n * b;
                if self.table.is_coupled(q) {
                    out.push((slot_of(lambda, n, self.slots_per_train), self.gate_index(q, lambda)));
                }
            }
        }
        out
    }

    fn coupling_step(&self, state: &mut EngineState<T>, m: usize) {
        let Some(window) = state.window else {
            return;
        };
        let coupled = self.coupled_slots(m, window);
        match (&self.mode, &mut state.repr) {
            (Mode::Branch { gates, .. }, Repr::Branch(br)) => {
                for &(slot, g) in &coupled {
                    br.apply_gate(slot, &gates[g]);
                }
            }
            (
                Mode::Dense {
                    factorized: true,
                    gates,
                    ..
                },
                repr,
            ) => {
                for &(slot, g) in &coupled {
                    let target = Target::SystemSlot(slot);
                    match repr {
                        Repr::DensePure(psi) => psi.left_apply(&self.layout, &gates[g], target),
                        Repr::DenseDensity(rho) => density::conjugate(&self.layout, rho, &gates[g], target),
                        Repr::Branch(_) => unreachable!(),
                    }
                }
            }
            (Mode::Dense { generators, .. }, repr) => {
                for k in 0..self.plan.substeps {
                    let terms: Vec<(Target, CMat<T>)> = coupled
                        .iter()
                        .filter(|&&(_, g)| generators[g][k].max_abs() > T::zero())
                        .map(|&(slot, g)| (Target::SystemSlot(slot), generators[g][k].clone()))
                        .collect();
                    let bound = terms.iter().map(|(_, l)| norm_bound(l)).sum::<T>();
                    match repr {
                        Repr::DensePure(psi) => psi.left_apply_exp(&self.layout, &terms, bound),
                        Repr::DenseDensity(rho) => density::conjugate_exp(&self.layout, rho, &terms, bound),
                        Repr::Branch(_) => unreachable!(),
                    }
                }
            }
            (Mode::Branch { .. }, _) => unreachable!("state built by another simulator"),
        }
    }

    /// Discards ancillas with `n < n_-(t_m)`: measured and reset for a pure
    /// state, traced out and reset for a density matrix.
    pub fn slide_window<R: Rng>(
        &self,
        state: &mut EngineState<T>,
        m: usize,
        rng: &mut R,
    ) -> Result<Vec<Measurement>> {
        if state.step != m {
            return Err(AtaError::WindowMismatch(format!(
                "slide after step {m} but state is at step {}",
                state.step
            )));
        }
        let Some((lo, hi)) = state.window else {
            return Ok(Vec::new());
        };
        let (keep_from, _) = active_window(self.plan.time(m), &self.plan);
        let mut record = Vec::new();
        for n in lo..keep_from.min(hi + 1) {
            for lambda in 0..self.spec.channels() {
                let slot = slot_of(lambda, n, self.slots_per_train);
                let outcome = match &mut state.repr {
                    Repr::DensePure(psi) => {
                        let p = pure::marginal(&self.layout, psi, slot);
                        let o = sample(&p, rng);
                        pure::collapse_and_reset(&self.layout, psi, slot, o, p[o]);
                        Some(o)
                    }
                    Repr::DenseDensity(rho) => {
                        density::trace_and_reset(&self.layout, rho, slot);
                        None
                    }
                    Repr::Branch(br) => match br.coeff {
                        Coefficients::Pure(_) => Some(br.measure_and_reset(slot, rng)),
                        Coefficients::Density(_) => {
                            br.trace_and_reset(slot);
                            None
                        }
                    },
                };
                if let Some(o) = outcome {
                    record.push(Measurement {
                        step: m,
                        train: lambda,
                        index: n,
                        outcome: o as u8,
                    });
                }
            }
        }
        state.window = if keep_from > hi {
            None
        } else {
            Some((keep_from.max(lo), hi))
        };
        Ok(record)
    }

    /// Load, Trotter step and slide for the next step.
    pub fn advance<R: Rng>(&self, state: &mut EngineState<T>, rng: &mut R) -> Result<Vec<Measurement>> {
        let m = state.step + 1;
        self.load_window(state, m)?;
        self.trotter_step(state, m)?;
        self.slide_window(state, m, rng)
    }

    /// Reduced system density matrix in the original basis.
    pub fn reduced_state(&self, state: &EngineState<T>) -> CMat<T> {
        match (&self.mode, &state.repr) {
            (Mode::Branch { basis, .. }, Repr::Branch(b)) => {
                basis.p.matmul(&b.reduced()).matmul(&basis.p.adjoint())
            }
            (_, Repr::DensePure(psi)) => pure::reduced(&self.layout, psi),
            (_, Repr::DenseDensity(rho)) => density::reduced(&self.layout, rho),
            _ => unreachable!("state built by another simulator"),
        }
    }

    fn expectations(&self, rho: &CMat<T>) -> Vec<T> {
        self.spec
            .observables
            .iter()
            .map(|(_, o)| {
                let mut acc = C::zero();
                for i in 0..rho.rows() {
                    for j in 0..rho.cols() {
                        acc = acc + rho[(i, j)] * o[(j, i)];
                    }
                }
                acc.re
            })
            .collect()
    }

    fn run<R: Rng>(&self, kind: StateKind, rng: &mut R, seed: Option<(u64, u64)>) -> Result<Trajectory<T>> {
        let mut state = self.initial_state(kind, rng)?;
        let n_obs = self.spec.observables.len();
        let steps = self.plan.steps;
        let mut times = Vec::with_capacity(steps + 1);
        let mut values = vec![Vec::with_capacity(steps + 1); n_obs];
        let mut states = self.options.record_states.then(|| Vec::with_capacity(steps + 1));
        let mut measurements = Vec::new();
        let mut record = |state: &EngineState<T>, times: &mut Vec<T>| {
            let rho = self.reduced_state(state);
            times.push(state.time);
            for (o, v) in self.expectations(&rho).into_iter().enumerate() {
                values[o].push(v);
            }
            if let Some(s) = states.as_mut() {
                s.push(rho);
            }
        };
        record(&state, &mut times);
        for _ in 0..steps {
            let meas = self.advance(&mut state, rng)?;
            if self.options.record_measurements {
                measurements.extend(meas);
            }
            record(&state, &mut times);
        }
        Ok(Trajectory {
            times,
            observable_names: self.spec.observables.iter().map(|(n, _)| n.clone()).collect(),
            values,
            reduced_states: states,
            measurements,
            seed,
        })
    }

    /// One measure-and-reset trajectory drawn from stream `index` of `master`.
    pub fn run_trajectory(&self, master: u64, index: u64) -> Result<Trajectory<T>> {
        let mut rng: StreamRng = stream_rng(master, index);
        self.run(StateKind::Pure, &mut rng, Some((master, index)))
    }

    /// Trajectories `0..count`, run in parallel and returned in index order.
    pub fn run_trajectories(&self, master: u64, count: usize) -> Result<Vec<Trajectory<T>>> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.run_trajectory(master, i))
            .collect()
    }

    /// Exact-discard run on the density matrix.
    pub fn run_density(&self) -> Result<Trajectory<T>> {
        let mut rng = stream_rng(0, 0);
        self.run(StateKind::Density, &mut rng, None)
    }

    /// Dense `V_m` on system (x) the ancillas of step `m`, ordered by train
    /// and then by `n`. Meant for small windows.
    pub fn coupling_unitary(&self, m: usize) -> Result<CMat<T>> {
        if m == 0 || m > self.plan.steps.max(1) {
            return Err(AtaError::InvalidParameter(format!("step {m} outside the plan")));
        }
        let window = if self.windowless {
            (0, -1)
        } else {
            step_window(m, &self.plan)
        };
        let len = (window.1 - window.0 + 1).max(0) as usize;
        let channels = self.spec.channels();
        let layout = Layout::new(self.spec.dim, self.options.levels, channels * len);
        let d = layout.total();
        if d > 1 << 12 {
            return Err(AtaError::InfeasiblePlan(format!("coupling unitary of dimension {d}")));
        }
        let mut u = Buffer::zeros(d, d);
        for i in 0..d {
            u.data[i * d + i] = C::one();
        }
        let raise = creation::<T>(self.options.levels);
        let lower = raise.adjoint();
        let b = self.plan.b as i64;
        for k in 0..self.plan.substeps {
            let mut terms = Vec::new();
            for lambda in 0..channels {
                for (pos, n) in (window.0..=window.1).enumerate() {
                    let q = m as i64 - 1 - n * b;
                    if let Some(subs) = self.table.get(q) {
                        let l = local_generator(&subs[k], lambda, &self.spec.couplings, &raise, &lower);
                        if l.max_abs() > T::zero() {
                            terms.push((Target::SystemSlot(lambda * len + pos), l));
                        }
                    }
                }
            }
            let bound = terms.iter().map(|(_, l)| norm_bound(l)).sum::<T>();
            u.left_apply_exp(&layout, &terms, bound);
        }
        Ok(CMat::from_vec(d, d, u.data))
    }

    /// Sub-stepped single-ancilla gate `V_mn` for train `lambda` in the
    /// original basis (identity when the ancilla is uncoupled).
    pub fn local_gate(&self, m: usize, lambda: usize, n: i64) -> CMat<T> {
        let q = m as i64 - 1 - n * self.plan.b as i64;
        match self.table.get(q) {
            Some(subs) => local_gate(subs, lambda, &self.spec.couplings, self.options.levels),
            None => CMat::identity(self.spec.dim * self.options.levels),
        }
    }
}

/// Pure-state trajectory `index` of master seed `master`.
pub fn run_trajectory<T: Real>(
    spec: &SystemSpec<T>,
    g_f: &Correlator<T>,
    plan: &SimulationPlan<T>,
    master: u64,
    index: u64,
) -> Result<Trajectory<T>> {
    Simulator::new(spec, g_f, plan, EngineOptions::default())?.run_trajectory(master, index)
}

pub fn run_trajectories<T: Real>(
    spec: &SystemSpec<T>,
    g_f: &Correlator<T>,
    plan: &SimulationPlan<T>,
    master: u64,
    count: usize,
) -> Result<Vec<Trajectory<T>>> {
    Simulator::new(spec, g_f, plan, EngineOptions::default())?.run_trajectories(master, count)
}

pub fn run_density_matrix<T: Real>(
    spec: &SystemSpec<T>,
    g_f: &Correlator<T>,
    plan: &SimulationPlan<T>,
) -> Result<Trajectory<T>> {
    Simulator::new(spec, g_f, plan, EngineOptions::default())?.run_density()
}

/// Density-matrix run with `levels`-level truncated oscillators as ancillas.
pub fn run_oscillator_reference<T: Real>(
    spec: &SystemSpec<T>,
    g_f: &Correlator<T>,
    plan: &SimulationPlan<T>,
    levels: usize,
) -> Result<Trajectory<T>> {
    let options = EngineOptions {
        levels,
        ..EngineOptions::default()
    };
    Simulator::new(spec, g_f, plan, options)?.run_density()
}
