//! End-to-end preparation of a run: PSD samples, jump and filtered
//! correlators, bath scales, UV cutoff, plan and resource estimate.

use serde::{Deserialize, Serialize};

use crate::engine::{EngineOptions, Simulator};
use crate::error::{AtaError, Result};
use crate::planner::{
    commutator_scale, plan_with_rule, resource_estimate, trotter_constant, CommutatorScale, ResourceEstimate,
    SimulationPlan, StepRule, SystemSpec,
};
use crate::scalar::{ceil_tol, Real};
use crate::spectral::{
    bath_scales, build_psd, filtered_jump_correlator, jump_correlator, pipeline_cutoff, uv_cutoff, BathScales,
    Correlator, FrequencyGrid, PsdModel, SampledPsd,
};

/// Explicit values replacing the derived plan parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOverrides<T> {
    pub delta_xi: Option<T>,
    pub tau_c: Option<T>,
    pub delta_t: Option<T>,
    pub substeps: Option<usize>,
}

impl<T> PlanOverrides<T> {
    fn touches_resolution(&self) -> bool {
        self.delta_xi.is_some() || self.tau_c.is_some() || self.delta_t.is_some()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    #[default]
    MainText,
    Strict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig<T> {
    pub epsilon: T,
    pub total_time: T,
    pub overrides: PlanOverrides<T>,
    pub mode: PlannerMode,
    /// Steps used when the bath vanishes and no `delta_t` override is given.
    pub unitary_steps: usize,
}

impl<T: Real> PipelineConfig<T> {
    pub fn new(epsilon: T, total_time: T) -> Self {
        Self {
            epsilon,
            total_time,
            overrides: PlanOverrides::default(),
            mode: PlannerMode::MainText,
            unitary_steps: 100,
        }
    }
}

/// Everything derived before the engine runs.
#[derive(Clone, Debug)]
pub struct Prepared<T> {
    pub psd: SampledPsd<T>,
    pub g: Correlator<T>,
    /// Filter cutoff `Omega`.
    pub cutoff: T,
    pub g_f: Correlator<T>,
    pub scales: BathScales<T>,
    /// UV cutoff `Lambda(epsilon)`; `None` for a vanishing bath.
    pub lambda: Option<T>,
    pub commutators: CommutatorScale<T>,
    pub plan: SimulationPlan<T>,
    pub resources: ResourceEstimate,
}

impl<T: Real> Prepared<T> {
    pub fn is_degenerate(&self) -> bool {
        self.plan.is_windowless()
    }

    pub fn simulator(&self, spec: &SystemSpec<T>, options: EngineOptions) -> Result<Simulator<T>> {
        Simulator::new(spec, &self.g_f, &self.plan, options)
    }
}

/// Runs the preparation chain. A zero PSD or `gamma = 0` yields a windowless
/// plan with `delta_t = T / unitary_steps` unless overridden.
pub fn prepare<T: Real>(
    model: &PsdModel<T>,
    grid: &FrequencyGrid<T>,
    spec: &SystemSpec<T>,
    config: &PipelineConfig<T>,
) -> Result<Prepared<T>> {
    spec.validate()?;
    let psd = build_psd(model, grid)?;
    if psd.channels() != spec.channels() {
        return Err(AtaError::InvalidParameter(format!(
            "PSD has {} channels but the system has {} couplings",
            psd.channels(),
            spec.channels()
        )));
    }
    let g = jump_correlator(&psd)?;
    let commutators = commutator_scale(spec);
    let bare = bath_scales(&g, &g, spec.gamma)?;
    let overrides = config.overrides;

    let (plan, lambda) = if bare.zero_bath || !(bare.big_gamma > T::zero()) {
        let delta_t = overrides
            .delta_t
            .unwrap_or(config.total_time / T::from_count(config.unitary_steps.max(1)));
        (SimulationPlan::unitary(delta_t, config.total_time)?, None)
    } else {
        let lambda = uv_cutoff(&psd, &g, bare.tau, config.epsilon)?;
        let rule = match config.mode {
            PlannerMode::MainText => StepRule::MainText,
            PlannerMode::Strict => StepRule::Strict {
                c1: trotter_constant(&g, &bare)?,
            },
        };
        let derived = plan_with_rule(
            config.epsilon,
            &bare,
            lambda,
            commutators.sdot_norm,
            Some(&commutators),
            config.total_time,
            rule,
        )?;
        let plan = if overrides.touches_resolution() {
            let delta_xi = overrides.delta_xi.unwrap_or(derived.delta_xi);
            let tau_c = overrides.tau_c.unwrap_or(derived.tau_c);
            // Keep the derived step as an upper bound, commensurate with delta_xi.
            let delta_t = overrides.delta_t.unwrap_or_else(|| {
                delta_xi / T::from_count(ceil_tol(delta_xi / derived.delta_t).max(1) as usize)
            });
            let mut p = SimulationPlan::explicit(delta_xi, tau_c, delta_t, derived.substeps, config.total_time)?;
            p.epsilon = config.epsilon;
            p
        } else {
            derived
        };
        (plan, Some(lambda))
    };
    let plan = match overrides.substeps {
        Some(0) => return Err(AtaError::InvalidParameter("substeps must be >= 1".into())),
        Some(k) => plan.with_substeps(k),
        None => plan,
    };

    let cutoff = pipeline_cutoff(plan.delta_xi, grid);
    let g_f = filtered_jump_correlator(&psd, cutoff)?;
    let scales = bath_scales(&g, &g_f, spec.gamma)?;
    let resources = resource_estimate(&plan, spec, &scales, lambda.unwrap_or_else(T::zero));
    Ok(Prepared {
        psd,
        g,
        cutoff,
        g_f,
        scales,
        lambda,
        commutators,
        plan,
        resources,
    })
}
