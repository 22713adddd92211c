//! Reproducible benchmark scenarios: phantom → measurements → problem, and
//! a harness that runs several solvers against one reference.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circulant::SpectralMask;
use crate::error::{Error, Result};
use crate::models::{
    auto_data_mask, ct_tv_problem, pet_tv_problem, tv_mask, Geometry, TvParams, DEFAULT_MASK_SAMPLES,
    DEFAULT_POSITIVITY_WEIGHT,
};
use crate::ops::{default_detectors, ImageGrid, Sinogram};
use crate::phantom::{make_phantom, Ellipse, PhantomSpec};
use crate::simulate::{relative_sigma, simulate_ct, simulate_pet};
use crate::solvers::{
    admm_cg_solve, compute_reference, compute_reference_cached, ncs_solve, pdhg_solve, ConvergenceRecord, Reference,
    SolveOutput, SolverConfig, SplitProblem,
};

pub const DEFAULT_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_N_CG: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Ncs,
    Pdhg,
    Admm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Ncs, SolverKind::Pdhg, SolverKind::Admm];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ncs => "ncs",
            SolverKind::Pdhg => "pdhg",
            SolverKind::Admm => "admm",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ncs" => Ok(SolverKind::Ncs),
            "pdhg" => Ok(SolverKind::Pdhg),
            "admm" => Ok(SolverKind::Admm),
            other => Err(Error::invalid("solver", format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ct,
    Pet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Parallel,
    Fan,
}

/// Acquisition: `angles` projections (views for fan beam) of `detectors`
/// bins (rays); the detector count defaults to the smallest covering one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryChoice {
    pub kind: GeometryKind,
    pub angles: usize,
    #[serde(default)]
    pub detectors: Option<usize>,
}

impl GeometryChoice {
    pub fn build(&self, n: usize) -> Result<Geometry> {
        let detectors = self.detectors.unwrap_or_else(|| default_detectors(n));
        match self.kind {
            GeometryKind::Parallel => Geometry::parallel(n, self.angles, detectors),
            GeometryKind::Fan => Geometry::fan(n, self.angles, detectors),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScenarioNoise {
    /// `σ = relative_sigma · max(Ex)`.
    Gaussian { relative_sigma: f64 },
    Poisson { exposure_scale: f64 },
}

/// Everything needed to regenerate a test problem from scratch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub model: Model,
    pub size: usize,
    pub geometry: GeometryChoice,
    /// Custom ellipses; the modified Shepp–Logan table when absent.
    #[serde(default)]
    pub phantom: Option<Vec<Ellipse>>,
    pub noise: ScenarioNoise,
    pub seed: u64,
    pub lambda: f64,
    #[serde(default)]
    pub positivity: bool,
    #[serde(default = "default_positivity_weight")]
    pub positivity_weight: f64,
    #[serde(default = "default_samples")]
    pub mask_samples: usize,
}

fn default_positivity_weight() -> f64 {
    DEFAULT_POSITIVITY_WEIGHT
}

fn default_samples() -> usize {
    DEFAULT_MASK_SAMPLES
}

impl ScenarioSpec {
    /// 64×64 Shepp–Logan, 60 parallel projections, 0.5% Gaussian noise,
    /// `λ = 1`.
    pub fn standard_ct(size: usize) -> Self {
        Self {
            model: Model::Ct,
            size,
            geometry: GeometryChoice {
                kind: GeometryKind::Parallel,
                angles: 60,
                detectors: None,
            },
            phantom: None,
            noise: ScenarioNoise::Gaussian { relative_sigma: 0.005 },
            seed: 1,
            lambda: 1.0,
            positivity: false,
            positivity_weight: DEFAULT_POSITIVITY_WEIGHT,
            mask_samples: DEFAULT_MASK_SAMPLES,
        }
    }

    /// Shepp–Logan emission image, Poisson counts, `λ = 10⁻³`.
    pub fn standard_pet(size: usize, exposure_scale: f64) -> Self {
        Self {
            model: Model::Pet,
            noise: ScenarioNoise::Poisson { exposure_scale },
            lambda: 1e-3,
            ..Self::standard_ct(size)
        }
    }
}

/// Solver parameters: step α, TV scaling β, proximal weight γ and mask DC value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// `H₁₁`, the DC entry of the data mask (NCS only).
    #[serde(default)]
    pub dc: Option<f64>,
    #[serde(default)]
    pub n_cg: Option<usize>,
}

impl SolverSettings {
    pub const fn ncs(alpha: f64, beta: f64, gamma: f64, dc: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma: Some(gamma),
            dc: Some(dc),
            n_cg: None,
        }
    }

    pub const fn pdhg(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma: Some(gamma),
            dc: None,
            n_cg: None,
        }
    }

    pub const fn admm(alpha: f64, beta: f64, n_cg: usize) -> Self {
        Self {
            alpha,
            beta,
            gamma: None,
            dc: None,
            n_cg: Some(n_cg),
        }
    }

    /// Rescale for a data block of weight `w`. The data part of `AᵀA` grows
    /// like `w²`, so γ does too; the mask already carries the factor.
    pub fn for_data_weight(self, w: f64) -> Self {
        Self {
            gamma: self.gamma.map(|g| g * w * w),
            ..self
        }
    }

    fn gamma(&self, solver: SolverKind) -> Result<f64> {
        self.gamma
            .ok_or_else(|| Error::invalid("gamma", format!("{solver} needs gamma")))
    }
}

/// Defaults for each model, geometry and solver: the fastest settings on the
/// power-of-3 grid for the standard 64×64 problems (see the
/// `tune_parameters` example). Fan-beam settings are not tuned and use the
/// parallel-beam values. PET values are for unit exposure; see
/// [`SolverSettings::for_data_weight`].
pub fn default_settings(model: Model, _geometry: GeometryKind, solver: SolverKind) -> SolverSettings {
    use Model::*;
    use SolverKind::*;
    match (model, solver) {
        (Ct, Ncs) => SolverSettings::ncs(0.1, 3.0, 30.0, 3000.0),
        (Ct, Pdhg) => SolverSettings::pdhg(0.03, 1.0, 300.0),
        (Ct, Admm) => SolverSettings::admm(0.1, 3.0, DEFAULT_N_CG),
        (Pet, Ncs) => SolverSettings::ncs(1.0, 0.3, 300.0, 3000.0),
        (Pet, Pdhg) => SolverSettings::pdhg(0.3, 0.3, 1000.0),
        (Pet, Admm) => SolverSettings::admm(0.03, 0.3, DEFAULT_N_CG),
    }
}

/// The values published with the method. They were tuned for a different
/// operator scaling and several violate the step conditions here.
pub fn published_settings(model: Model, geometry: GeometryKind, solver: SolverKind) -> SolverSettings {
    use GeometryKind::*;
    use Model::*;
    use SolverKind::*;
    match (model, geometry, solver) {
        (Ct, Parallel, Ncs) => SolverSettings::ncs(1e-2, 1e-2, 1.0, 1e-1),
        (Ct, Parallel, Pdhg) => SolverSettings::pdhg(1e-2, 3e-2, 1e1),
        (Ct, Parallel, Admm) => SolverSettings::admm(1.0, 3e-3, DEFAULT_N_CG),
        (Ct, Fan, Ncs) => SolverSettings::ncs(3e-3, 1e-2, 1.0, 1e-1),
        (Ct, Fan, Pdhg) => SolverSettings::pdhg(1e-3, 3e-3, 1e2),
        (Ct, Fan, Admm) => SolverSettings::admm(1e-4, 3e-2, DEFAULT_N_CG),
        (Pet, _, Ncs) => SolverSettings::ncs(1e-3, 1e-3, 1e-4, 1e-2),
        (Pet, _, Pdhg) => SolverSettings::pdhg(1e-2, 1e-2, 3e-2),
        (Pet, _, Admm) => SolverSettings::admm(3e-4, 3e-1, DEFAULT_N_CG),
    }
}

/// The published regularization weight for each setting.
pub fn default_lambda(model: Model, geometry: GeometryKind) -> f64 {
    match (model, geometry) {
        (Model::Ct, GeometryKind::Parallel) => 1.0,
        (Model::Ct, GeometryKind::Fan) => 10.0,
        (Model::Pet, _) => 1e-3,
    }
}

/// A generated problem instance.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub geometry: Geometry,
    pub truth: ImageGrid,
    pub data: Sinogram,
    /// Weight of the data block: 1 for CT, the exposure scale for PET.
    pub data_weight: f64,
}

impl Scenario {
    pub fn build(spec: &ScenarioSpec) -> Result<Self> {
        let geometry = spec.geometry.build(spec.size)?;
        let phantom = match &spec.phantom {
            Some(ellipses) => PhantomSpec {
                size: spec.size,
                ellipses: ellipses.clone(),
            },
            None => PhantomSpec::shepp_logan(spec.size),
        };
        let truth = make_phantom(&phantom)?;
        let (data, data_weight) = match spec.noise {
            ScenarioNoise::Gaussian { relative_sigma: fraction } => {
                let sigma = relative_sigma(&truth, &geometry, fraction)?;
                (simulate_ct(&truth, &geometry, sigma, spec.seed)?, 1.0)
            }
            ScenarioNoise::Poisson { exposure_scale } => {
                (simulate_pet(&truth, &geometry, exposure_scale, spec.seed)?, exposure_scale)
            }
        };
        Ok(Self {
            spec: spec.clone(),
            geometry,
            truth,
            data,
            data_weight,
        })
    }

    pub fn params(&self, settings: &SolverSettings) -> TvParams {
        TvParams::new(settings.alpha, settings.beta, self.spec.lambda)
            .with_data_weight(self.data_weight)
            .with_positivity(self.spec.positivity)
            .with_positivity_weight(self.spec.positivity_weight)
    }

    pub fn problem(&self, settings: &SolverSettings) -> Result<SplitProblem> {
        let params = self.params(settings);
        let b = self.data.as_slice().to_vec();
        match self.spec.model {
            Model::Ct => ct_tv_problem(self.geometry.map(), b, &params),
            Model::Pet => pet_tv_problem(self.geometry.map(), b, &params),
        }
    }

    /// The circulant approximation `C` of `AᵀA` used by NCS.
    pub fn ncs_mask(&self, settings: &SolverSettings) -> Result<SpectralMask> {
        let dc = settings
            .dc
            .ok_or_else(|| Error::invalid("dc", "NCS needs the DC value of the data mask"))?;
        let data = auto_data_mask(&self.geometry, dc, self.spec.mask_samples, self.spec.seed)?;
        tv_mask(&data, &self.params(settings))
    }

    /// Problem and configuration for one solver.
    pub fn setup(&self, solver: SolverKind, settings: &SolverSettings) -> Result<(SplitProblem, SolverConfig)> {
        let problem = self.problem(settings)?;
        let config = match solver {
            SolverKind::Ncs => {
                SolverConfig::new(settings.alpha, settings.gamma(solver)?, Some(self.ncs_mask(settings)?))
            }
            SolverKind::Pdhg => SolverConfig::new(settings.alpha, settings.gamma(solver)?, None),
            SolverKind::Admm => SolverConfig::new(settings.alpha, 0.0, None),
        };
        Ok((problem, config))
    }
}

/// Run one solver for `iters` iterations on the record axis; for ADMM that
/// is `⌈iters/n_cg⌉` outer loops.
pub fn run_solver(
    solver: SolverKind,
    problem: &SplitProblem,
    config: &SolverConfig,
    settings: &SolverSettings,
    iters: usize,
) -> Result<SolveOutput> {
    match solver {
        SolverKind::Ncs => ncs_solve(problem, &config.clone().with_iters(iters)),
        SolverKind::Pdhg => pdhg_solve(problem, &config.clone().with_iters(iters)),
        SolverKind::Admm => {
            let n_cg = settings.n_cg.unwrap_or(DEFAULT_N_CG);
            admm_cg_solve(problem, &config.clone().with_iters(iters.div_ceil(n_cg)), n_cg)
        }
    }
}

/// A benchmark file: a scenario plus per-solver settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    #[serde(flatten)]
    pub scenario: ScenarioSpec,
    /// Missing solvers use [`default_settings`].
    #[serde(default)]
    pub solvers: BTreeMap<SolverKind, SolverSettings>,
    /// NCS settings for the reference run; the NCS entry when absent.
    #[serde(default)]
    pub reference: Option<SolverSettings>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_record_every() -> usize {
    1
}

impl BenchSpec {
    pub fn new(scenario: ScenarioSpec) -> Self {
        Self {
            scenario,
            solvers: BTreeMap::new(),
            reference: None,
            threshold: DEFAULT_THRESHOLD,
            record_every: 1,
        }
    }

    pub fn settings(&self, solver: SolverKind) -> SolverSettings {
        self.solvers
            .get(&solver)
            .copied()
            .unwrap_or_else(|| {
                let w = match self.scenario.noise {
                    ScenarioNoise::Poisson { exposure_scale } => exposure_scale,
                    ScenarioNoise::Gaussian { .. } => 1.0,
                };
                default_settings(self.scenario.model, self.scenario.geometry.kind, solver).for_data_weight(w)
            })
    }

    pub fn reference_settings(&self) -> SolverSettings {
        self.reference.unwrap_or_else(|| self.settings(SolverKind::Ncs))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    /// First recorded iteration with relative suboptimality at or below the
    /// threshold.
    pub iterations_to_threshold: Option<usize>,
    pub final_rel_subopt: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub threshold: f64,
    pub reference_objective: f64,
    pub reference_iterations: usize,
    pub reference_warnings: Vec<String>,
    pub solvers: BTreeMap<SolverKind, SolverSummary>,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub scenario: Scenario,
    pub reference: Reference,
    pub records: BTreeMap<SolverKind, ConvergenceRecord>,
    pub summary: BenchSummary,
}

/// Compute the NCS reference, then run each solver for `iters` record-axis
/// iterations. With `cache`, the reference is stored under that directory.
pub fn run_bench(
    spec: &BenchSpec,
    solvers: &[SolverKind],
    iters: usize,
    ref_iters: usize,
    cache: Option<&Path>,
) -> Result<BenchReport> {
    let scenario = Scenario::build(&spec.scenario)?;
    let ref_settings = spec.reference_settings();
    let (ref_problem, ref_config) = scenario.setup(SolverKind::Ncs, &ref_settings)?;
    let reference = match cache {
        Some(dir) => compute_reference_cached(&ref_problem, &ref_config, ref_iters, dir)?,
        None => compute_reference(&ref_problem, &ref_config, ref_iters)?,
    };
    let mut records = BTreeMap::new();
    let mut summaries = BTreeMap::new();
    for &solver in solvers {
        let settings = spec.settings(solver);
        let (problem, config) = scenario.setup(solver, &settings)?;
        let config = config
            .with_reference(reference.objective)
            .with_record_every(spec.record_every);
        let out = run_solver(solver, &problem, &config, &settings, iters)?;
        summaries.insert(
            solver,
            SolverSummary {
                iterations_to_threshold: out.record.iterations_to(spec.threshold),
                final_rel_subopt: out.record.last().map_or(f64::NAN, |e| e.rel_subopt),
                warnings: out.warnings,
            },
        );
        records.insert(solver, out.record);
    }
    let summary = BenchSummary {
        threshold: spec.threshold,
        reference_objective: reference.objective,
        reference_iterations: reference.iterations,
        reference_warnings: reference.warnings.clone(),
        solvers: summaries,
    };
    Ok(BenchReport {
        scenario,
        reference,
        records,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for s in SolverKind::ALL {
            assert_eq!(s.name().parse::<SolverKind>().unwrap(), s);
        }
        assert!("fista".parse::<SolverKind>().is_err());
    }

    #[test]
    fn bench_spec_json_defaults() {
        let text = r#"{
            "model": "ct", "size": 16,
            "geometry": {"kind": "parallel", "angles": 12},
            "noise": {"kind": "gaussian", "relative_sigma": 0.005},
            "seed": 3, "lambda": 1.0,
            "solvers": {"pdhg": {"alpha": 0.1, "beta": 0.1, "gamma": 30.0}}
        }"#;
        let spec: BenchSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.threshold, DEFAULT_THRESHOLD);
        assert_eq!(spec.scenario.mask_samples, DEFAULT_MASK_SAMPLES);
        assert_eq!(spec.settings(SolverKind::Pdhg).gamma, Some(30.0));
        assert_eq!(
            spec.settings(SolverKind::Ncs),
            default_settings(Model::Ct, GeometryKind::Parallel, SolverKind::Ncs)
        );
    }

    #[test]
    fn pet_defaults_scale_gamma_with_exposure() {
        let mut spec = BenchSpec::new(ScenarioSpec::standard_pet(16, 10.0));
        let unit = default_settings(Model::Pet, GeometryKind::Parallel, SolverKind::Ncs);
        let scaled = spec.settings(SolverKind::Ncs);
        assert_eq!(scaled.gamma, Some(unit.gamma.unwrap() * 100.0));
        assert_eq!((scaled.alpha, scaled.beta, scaled.dc), (unit.alpha, unit.beta, unit.dc));
        spec.solvers.insert(SolverKind::Ncs, unit);
        assert_eq!(spec.settings(SolverKind::Ncs), unit);
    }

    #[test]
    fn scenario_is_reproducible() {
        let spec = ScenarioSpec::standard_ct(16);
        let a = Scenario::build(&spec).unwrap();
        let b = Scenario::build(&spec).unwrap();
        assert_eq!(a.data, b.data);
    }
}
