//! Subcommand implementations.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use ata_core::engine::{average_trajectories, log_log_slope, EngineOptions, Simulator};
use ata_core::linalg::{pauli, trace_distance, CMat};
use ata_core::noise::{dephasing_monte_carlo, NoiseGenerator};
use ata_core::oracle::{analytic_dephasing, convolution_check, golden_rule_rates};
use ata_core::pipeline::{prepare, Prepared};
use ata_core::planner::{Hamiltonian, InitialState, SimulationPlan, SystemSpec};
use ata_core::spectral::{
    bath_correlation, bath_scales, build_psd, filtered_jump_correlator, jump_correlator, pipeline_cutoff,
    FrequencyGrid, PsdModel,
};
use ata_core::C;

use crate::config::{EngineKind, RunConfig};
use crate::error::CliError;
use crate::output::{self, num, Metadata};

pub fn prepared(config: &RunConfig) -> Result<(SystemSpec<f64>, Prepared<f64>), CliError> {
    let spec = config.system_spec()?;
    let p = prepare(&config.psd_model()?, &config.grid()?, &spec, &config.pipeline()).map_err(CliError::at("pipeline"))?;
    Ok((spec, p))
}

fn engine_options(config: &RunConfig, record_states: bool) -> EngineOptions {
    EngineOptions {
        levels: if config.engine == EngineKind::Oscillator {
            config.levels
        } else {
            2
        },
        representation: config.representation,
        record_states,
        record_measurements: false,
    }
}

fn simulator(
    config: &RunConfig,
    spec: &SystemSpec<f64>,
    g_f: &ata_core::Correlator64,
    plan: &SimulationPlan<f64>,
    record_states: bool,
) -> Result<Simulator<f64>, CliError> {
    Simulator::new(spec, g_f, plan, engine_options(config, record_states)).map_err(CliError::at("engine"))
}

fn representation(sim: &Simulator<f64>) -> &'static str {
    if sim.slots() == 0 {
        "none"
    } else if sim.uses_branches() {
        "branch"
    } else {
        "dense"
    }
}

pub fn plan_report(config: &RunConfig) -> Result<String, CliError> {
    let (spec, p) = prepared(config)?;
    let sim = simulator(config, &spec, &p.g_f, &p.plan, false)?;
    let plan = &p.plan;
    let r = &p.resources;
    let s = &p.scales;
    let mut out = String::new();
    let rows: Vec<(&str, String)> = vec![
        ("epsilon", plan.epsilon.to_string()),
        ("total_time", plan.total_time.to_string()),
        ("gamma", s.gamma.to_string()),
        ("big_gamma", s.big_gamma.to_string()),
        ("tau", s.tau.to_string()),
        ("big_gamma_f", s.big_gamma_f.to_string()),
        ("tau_f", s.tau_f.to_string()),
        ("uv_cutoff", p.lambda.map_or("none".into(), |l| l.to_string())),
        ("filter_cutoff", p.cutoff.to_string()),
        ("sdot", p.commutators.sdot_norm.to_string()),
        ("delta_xi", plan.delta_xi.to_string()),
        ("tau_c", plan.tau_c.to_string()),
        ("delta_t", plan.delta_t.to_string()),
        ("b", plan.b.to_string()),
        ("substeps", plan.substeps.to_string()),
        ("window_size", plan.window_size.to_string()),
        ("steps", plan.steps.to_string()),
        ("ancilla_count", r.ancilla_count.to_string()),
        ("ancilla_gate_count", r.ancilla_gate_count.to_string()),
        ("statevector_qubits", r.statevector_qubits.to_string()),
        ("feasibility_pure", format!("{:?}", r.pure).to_lowercase()),
        ("feasibility_density", format!("{:?}", r.density).to_lowercase()),
        ("representation", representation(&sim).into()),
    ];
    writeln!(out, "Plan{}", if p.is_degenerate() { " (windowless: no bath coupling)" } else { "" }).unwrap();
    writeln!(
        out,
        "  ancillas every {} over a cutoff of {} ({} per train), Trotter step {} ({} per ancilla), {} steps",
        plan.delta_xi, plan.tau_c, plan.window_size, plan.delta_t, plan.b, plan.steps
    )
    .unwrap();
    writeln!(
        out,
        "  register {} qubits: pure engine {:?}, density engine {:?}",
        r.statevector_qubits, r.pure, r.density
    )
    .unwrap();
    if sim.uses_branches() {
        writeln!(out, "  the model is diagonal in a common eigenbasis: branch storage, linear in the window").unwrap();
    }
    writeln!(out).unwrap();
    for (k, v) in rows {
        writeln!(out, "{k}={v}").unwrap();
    }
    Ok(out)
}

fn check_finite(values: &[Vec<f64>]) -> Result<(), CliError> {
    if values.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::numerical("non-finite expectation value"));
    }
    Ok(())
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let (spec, p) = prepared(config)?;
    let sim = simulator(config, &spec, &p.g_f, &p.plan, false)?;
    let names: Vec<String> = spec.observables.iter().map(|(n, _)| n.clone()).collect();
    let csv = match config.engine {
        EngineKind::Pure => {
            let ts = sim
                .run_trajectories(config.seed, config.trajectories)
                .map_err(CliError::at("engine"))?;
            let avg = average_trajectories(&ts).map_err(CliError::at("average"))?;
            check_finite(&avg.mean)?;
            output::time_series_csv(&avg.times, &names, &avg.mean, Some(&avg.stderr))
        }
        EngineKind::Density | EngineKind::Oscillator => {
            let t = sim.run_density().map_err(CliError::at("engine"))?;
            check_finite(&t.values)?;
            output::time_series_csv(&t.times, &names, &t.values, None)
        }
    };
    let mut meta = Metadata::new("run", config, &p);
    meta.representation = representation(&sim);
    output::write(out_dir, "trajectory.csv", &csv)?;
    output::write(out_dir, "plan.json", &meta.to_json())
}

pub fn noise(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let (_, p) = prepared(config)?;
    let gen = NoiseGenerator::on_grid(&p.g, p.plan.delta_xi, config.total_time).map_err(CliError::at("noise"))?;
    let paths = gen.sample_many(config.seed, config.trajectories);
    let names: Vec<String> = (0..paths.len()).map(|i| format!("path_{i}")).collect();
    let values: Vec<Vec<f64>> = paths.iter().map(|x| x.values.clone()).collect();
    check_finite(&values)?;
    output::write(out_dir, "noise.csv", &output::time_series_csv(gen.times(), &names, &values, None))?;
    let mut meta = Metadata::new("noise", config, &p);
    meta.trajectories = config.trajectories;
    output::write(out_dir, "plan.json", &meta.to_json())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum LadderParam {
    DeltaT,
    DeltaXi,
    TauC,
    K,
}

pub struct Convergence {
    pub values: Vec<f64>,
    /// Trace distance between consecutive final states.
    pub distances: Vec<f64>,
    /// Slope of `log distance` against `log value` (`None` when undefined).
    pub slope: Option<f64>,
}

impl Convergence {
    pub fn report(&self, param: LadderParam) -> String {
        let mut out = format!("{param:?} ladder\nvalue,distance_to_next\n");
        for (i, v) in self.values.iter().enumerate() {
            let d = self.distances.get(i).map_or(String::new(), |d| num(*d));
            writeln!(out, "{},{d}", num(*v)).unwrap();
        }
        match self.slope {
            Some(s) => writeln!(out, "slope={s:.6}").unwrap(),
            None => writeln!(out, "slope=undefined").unwrap(),
        }
        out
    }
}

pub fn converge(config: &RunConfig, param: LadderParam, factors: &[f64]) -> Result<Convergence, CliError> {
    if factors.len() < 3 {
        return Err(CliError::validation("a convergence ladder needs at least 3 factors"));
    }
    if factors.iter().any(|f| !(*f > 0.0)) {
        return Err(CliError::validation("ladder factors must be positive"));
    }
    let (spec, p) = prepared(config)?;
    let base = p.plan;
    let psd = &p.psd;
    let mut values = Vec::new();
    let mut states: Vec<CMat<f64>> = Vec::new();
    for &f in factors {
        let explicit = |dxi: f64, tau_c: f64, dt: f64| {
            SimulationPlan::explicit(dxi, tau_c, dt, base.substeps, base.total_time).map_err(CliError::at("ladder"))
        };
        let (plan, value) = match param {
            LadderParam::DeltaT => (explicit(base.delta_xi, base.tau_c, base.delta_t * f)?, base.delta_t * f),
            LadderParam::DeltaXi => (
                explicit(base.delta_xi * f, base.tau_c, base.delta_t * f)?,
                base.delta_xi * f,
            ),
            LadderParam::TauC => (explicit(base.delta_xi, base.tau_c * f, base.delta_t)?, base.tau_c * f),
            LadderParam::K => {
                let k = ((base.substeps as f64) * f).round().max(1.0) as usize;
                (base.with_substeps(k), k as f64)
            }
        };
        let g_f = if plan.delta_xi == base.delta_xi {
            p.g_f.clone()
        } else {
            filtered_jump_correlator(psd, pipeline_cutoff(plan.delta_xi, psd.grid())).map_err(CliError::at("ladder"))?
        };
        let sim = simulator(config, &spec, &g_f, &plan, true)?;
        let state = match config.engine {
            EngineKind::Pure => {
                let ts = sim
                    .run_trajectories(config.seed, config.trajectories)
                    .map_err(CliError::at("engine"))?;
                average_trajectories(&ts)
                    .map_err(CliError::at("average"))?
                    .final_state()
                    .cloned()
            }
            _ => sim.run_density().map_err(CliError::at("engine"))?.final_state().cloned(),
        }
        .ok_or_else(|| CliError::numerical("no final state recorded"))?;
        if state.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::numerical("non-finite reduced state"));
        }
        values.push(value);
        states.push(state);
    }
    let distances: Vec<f64> = states.windows(2).map(|w| trace_distance(&w[0], &w[1])).collect();
    let xs = &values[..distances.len()];
    let slope = (distances.iter().all(|&d| d > 0.0)).then(|| log_log_slope(xs, &distances));
    Ok(Convergence {
        values,
        distances,
        slope: slope.filter(|s| s.is_finite()),
    })
}

/// Oracle self-tests. Returns one line per check and whether all passed.
pub fn check() -> (Vec<String>, bool) {
    let mut lines = Vec::new();
    let mut all = true;
    let mut record = |name: &str, pass: bool, detail: String| {
        all &= pass;
        lines.push(format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
    };
    let grid = FrequencyGrid::new(16.0, 1024).expect("grid");
    let gaussian = PsdModel::Gaussian {
        amplitude: 1.0,
        width: 1.0,
    };
    let psd = build_psd(&gaussian, &grid).expect("psd");
    let g = jump_correlator(&psd).expect("g");

    let err = convolution_check(&g, &bath_correlation(&psd)).unwrap_or(f64::INFINITY);
    record("convolution", err <= 1e-6, format!("max rel |g*g - J| {err:.1e} (tol 1e-6)"));

    let s = bath_scales(&g, &g, 1.0).expect("scales");
    let (eb, et) = ((s.big_gamma / (8.0 * PI) - 1.0).abs(), (s.tau * PI.sqrt() - 1.0).abs());
    record(
        "gaussian scales",
        eb <= 1e-4 && et <= 1e-4,
        format!("Gamma rel err {eb:.1e}, tau rel err {et:.1e} (tol 1e-4)"),
    );

    let thermal = build_psd(
        &PsdModel::ThermalOhmic {
            coupling: 1.0,
            cutoff: 2.0,
            beta: 1.0,
        },
        &grid,
    )
    .expect("psd");
    let pe = golden_rule_rates(&thermal, 0.01, 1.0)
        .ok()
        .and_then(|r| r.excited_population)
        .unwrap_or(f64::NAN);
    let expect = (-1f64).exp() / (1.0 + (-1f64).exp());
    record(
        "detailed balance",
        (pe - expect).abs() <= 1e-12,
        format!("p_e {pe:.6} vs {expect:.6}"),
    );

    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let spec = SystemSpec {
        dim: 2,
        hamiltonian: Hamiltonian::Constant(CMat::zeros(2, 2)),
        couplings: vec![pauli::z()],
        gamma: 0.05,
        initial_state: InitialState::Pure(vec![C::new(s2, 0.0), C::new(s2, 0.0)]),
        observables: vec![("sx".into(), pauli::x())],
    };
    let steps = 20;
    let dt = 0.1;
    let oracle = analytic_dephasing(&psd, spec.gamma, &[dt * steps as f64])
        .map(|c| c.coherence[0])
        .unwrap_or(f64::NAN);
    let (mc, se) = dephasing_monte_carlo(&spec, &g, 0.05, dt, steps, 4000, 1)
        .ok()
        .and_then(|a| a.observable("sx").map(|(m, e)| (*m.last().unwrap(), *e.last().unwrap())))
        .unwrap_or((f64::NAN, f64::NAN));
    let z = (mc - oracle).abs() / se;
    record(
        "dephasing",
        z <= 3.0,
        format!("Monte Carlo {mc:.4} +- {se:.1e} vs analytic {oracle:.4} (|z| {z:.2}, tol 3)"),
    );

    let tau = s.tau;
    let g_f = filtered_jump_correlator(&psd, 2.0 / tau).expect("g_f");
    let f = bath_scales(&g, &g_f, 1.0).expect("scales");
    let ratio = f.big_gamma_f / f.big_gamma;
    record(
        "filter constant",
        ratio <= 14.41,
        format!("Gamma_f / Gamma {ratio:.3} at Omega = 2/tau (bound 14.41)"),
    );

    let j0 = TAU.sqrt();
    let gen = NoiseGenerator::on_grid(&g, 0.05, 2.0).expect("noise");
    let paths = gen.sample_many(2, 4000);
    let var = paths.iter().map(|p| p.values[0] * p.values[0]).sum::<f64>() / paths.len() as f64;
    let rel = (var / j0 - 1.0).abs();
    record("noise variance", rel <= 0.1, format!("<A^2> / J(0) - 1 = {rel:.3} (tol 0.1)"));
    (lines, all)
}
