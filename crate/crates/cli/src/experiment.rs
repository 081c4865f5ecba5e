//! Batch studies over seeds.
//!
//! Each seed derives its instance, start point and every sampler from
//! `substream(seed, tags)`; seeds run on the rayon pool and the records are
//! reassembled in ascending seed order, so the JSON report does not depend
//! on scheduling.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use satpath_core::dynamics::{
    check_preservation, construct_path, is_local_minimum, validate_path, PathOptions, Termination,
};
use satpath_core::markov::simulate::terminal_state;
use satpath_core::markov::{
    compile_k_step, construct_path_stochastic, default_eval_tol, stationary_residual, validate_stochastic_path,
    KStepGame, MarkovDeskSolver, MarkovSettings, StationaryPolicyProfile,
};
use satpath_core::rng::{substream, Rng};
use satpath_core::simplex::{random_lattice_point, random_point, subdivisions};
use satpath_core::solvers::{DeskSolver, SolverSettings};
use satpath_core::{MixedProfile, MixedProfile64, PathRecord64, SatisficingConfig, StochasticPathRecord64};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::HarnessError;
use crate::generate::{draw_shape, random_normal_form, random_stochastic, Shape, Span, TAG_START};
use crate::report;

const TAG_POLICY: u64 = 0x504F;
const TAG_SIM_BASE: u64 = 0x5342;
const TAG_SIM_COMPILED: u64 = 0x5343;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NormalFormPath,
    StochasticPath,
    TopologyCheck,
    KstepRoundtrip,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::NormalFormPath => "normal_form_path",
            ExperimentKind::StochasticPath => "stochastic_path",
            ExperimentKind::TopologyCheck => "topology_check",
            ExperimentKind::KstepRoundtrip => "kstep_roundtrip",
        }
    }
}

/// Instance shape ranges, each inclusive. `states` is ignored by the
/// normal-form kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceParams {
    pub players: Span,
    pub actions: Span,
    pub states: Span,
    pub k: usize,
    pub gamma: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            players: Span::fixed(2),
            actions: Span { lo: 2, hi: 3 },
            states: Span::fixed(2),
            k: 1,
            gamma: 0.8,
        }
    }
}

/// Monte Carlo settings for `kstep_roundtrip`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationParams {
    pub episodes: usize,
    pub horizon: usize,
    /// Significance level of the homogeneity test.
    pub alpha: f64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            episodes: 20_000,
            horizon: 5,
            alpha: 0.01,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    1e-6
}

fn default_grid_step() -> f64 {
    satpath_core::dynamics::DEFAULT_GRID_STEP
}

fn default_budget() -> usize {
    satpath_core::dynamics::DEFAULT_BUDGET
}

fn default_max_steps() -> usize {
    satpath_core::dynamics::DEFAULT_MAX_STEPS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub instance: InstanceParams,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub markov_solver: MarkovSettings,
    #[serde(default)]
    pub simulation: SimulationParams,
    /// Embed every constructed path in its record.
    #[serde(default)]
    pub include_paths: bool,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, seeds: Vec<u64>) -> Self {
        Self {
            kind,
            seeds,
            instance: InstanceParams::default(),
            epsilon: default_epsilon(),
            grid_step: default_grid_step(),
            budget: default_budget(),
            max_steps: default_max_steps(),
            solver: SolverSettings::default(),
            markov_solver: MarkovSettings::default(),
            simulation: SimulationParams::default(),
            include_paths: false,
            output: OutputPaths::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.seeds.is_empty() {
            return bad("seeds must be nonempty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        let p = &self.instance;
        for (name, span) in [("players", p.players), ("actions", p.actions), ("states", p.states)] {
            if span.lo == 0 || span.lo > span.hi {
                return bad(format!(
                    "{name} range [{}, {}] must satisfy 1 <= lo <= hi",
                    span.lo, span.hi
                ));
            }
        }
        if self.kind == ExperimentKind::KstepRoundtrip && p.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(0.0..1.0).contains(&p.gamma) {
            return bad(format!("gamma must lie in [0, 1), got {}", p.gamma));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad(format!("epsilon must be finite and nonnegative, got {}", self.epsilon));
        }
        subdivisions(self.grid_step)?;
        if self.budget == 0 || self.max_steps == 0 {
            return bad("budget and max_steps must be positive".into());
        }
        let s = &self.simulation;
        if s.episodes == 0 || !(s.alpha > 0.0 && s.alpha < 1.0) {
            return bad("simulation needs episodes > 0 and alpha in (0, 1)".into());
        }
        let joint = (p.actions.hi as u128).saturating_pow(p.players.hi as u32);
        let states = p.states.hi as u128;
        let entries = match self.kind {
            ExperimentKind::NormalFormPath | ExperimentKind::TopologyCheck => joint * p.players.hi as u128,
            ExperimentKind::StochasticPath | ExperimentKind::KstepRoundtrip => {
                states * joint * states.max(p.players.hi as u128)
            }
        };
        if entries > satpath_core::MAX_TENSOR_ENTRIES as u128 {
            return Err(satpath_core::Error::BudgetExceeded {
                what: "largest instance",
                size: usize::try_from(entries).unwrap_or(usize::MAX),
                limit: satpath_core::MAX_TENSOR_ENTRIES,
            }
            .into());
        }
        Ok(())
    }
}

/// One seed's outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub kind: ExperimentKind,
    pub shape: Shape,
    /// Path length in steps, for the path kinds.
    pub steps: Option<usize>,
    /// Residual of the terminal profile.
    pub residual: Option<f64>,
    pub terminal_is_equilibrium: Option<bool>,
    /// `terminal_is_equilibrium` for the path kinds; the kind's own check
    /// otherwise.
    pub success: bool,
    /// Whether the path reloaded from JSON passes validation.
    pub path_valid: Option<bool>,
    pub n_trajectory: Vec<usize>,
    pub termination: Option<Termination>,
    pub detail: Option<serde_json::Value>,
    pub path: Option<serde_json::Value>,
    #[serde(skip)]
    pub millis: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Quantiles {
    /// Linear-interpolation quantiles, `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            min: v[0],
            q25: at(0.25),
            median: at(0.5),
            q75: at(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub seeds: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// False if any reloaded path failed validation.
    pub all_paths_valid: bool,
    pub length_quantiles: Option<Quantiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub records: Vec<SeedRecord>,
    pub aggregate: Aggregate,
}

/// Runs the study and writes the configured outputs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    let report = execute(config)?;
    if let Some(path) = &config.output.json {
        report::write_file(path, &report::to_json(&report)?)?;
    }
    if let Some(path) = &config.output.csv {
        let mut buf = Vec::new();
        report::write_csv(&report, &mut buf)?;
        report::write_file(path, &String::from_utf8_lossy(&buf))?;
    }
    Ok(report)
}

/// Runs the study without touching the filesystem.
pub fn execute(config: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    config.validate()?;
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    let results: Vec<Result<SeedRecord, HarnessError>> = seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed).map_err(|e| e.at_seed(seed)))
        .collect();
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let successes = records.iter().filter(|r| r.success).count();
    let lengths: Vec<f64> = records.iter().filter_map(|r| r.steps.map(|s| s as f64)).collect();
    let aggregate = Aggregate {
        seeds: records.len(),
        successes,
        success_rate: successes as f64 / records.len() as f64,
        all_paths_valid: records.iter().all(|r| r.path_valid != Some(false)),
        length_quantiles: Quantiles::of(&lengths),
    };
    Ok(RunReport {
        config: config.clone(),
        records,
        aggregate,
    })
}

pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<SeedRecord, HarnessError> {
    let start = Instant::now();
    let p = &config.instance;
    let shape = draw_shape(p.players, p.actions, p.states, seed);
    let mut record = SeedRecord {
        seed,
        kind: config.kind,
        shape: shape.clone(),
        steps: None,
        residual: None,
        terminal_is_equilibrium: None,
        success: false,
        path_valid: None,
        n_trajectory: Vec::new(),
        termination: None,
        detail: None,
        path: None,
        millis: 0,
    };
    match config.kind {
        ExperimentKind::NormalFormPath => normal_form_path(config, seed, &shape, &mut record)?,
        ExperimentKind::StochasticPath => stochastic_path(config, seed, &shape, &mut record)?,
        ExperimentKind::TopologyCheck => topology_check(config, seed, &shape, &mut record)?,
        ExperimentKind::KstepRoundtrip => kstep_roundtrip(config, seed, &shape, &mut record)?,
    }
    record.millis = start.elapsed().as_millis();
    Ok(record)
}

fn path_options(config: &ExperimentConfig, seed: u64) -> PathOptions {
    PathOptions {
        max_steps: config.max_steps,
        grid_step: config.grid_step,
        budget: config.budget,
        seed,
    }
}

fn random_pure(counts: &[usize], rng: &mut Rng) -> Vec<usize> {
    counts.iter().map(|&m| rng.random_range(0..m)).collect()
}

fn normal_form_path(
    config: &ExperimentConfig,
    seed: u64,
    shape: &Shape,
    record: &mut SeedRecord,
) -> Result<(), HarnessError> {
    let game = random_normal_form(&shape.actions, seed)?;
    let s0 = MixedProfile::pure(
        &shape.actions,
        &random_pure(&shape.actions, &mut substream(seed, &[TAG_START])),
    )?;
    let cfg = SatisficingConfig::singletons(config.epsilon, shape.actions.len())?;
    let solver = DeskSolver::new(config.solver.clone());
    let path = construct_path(&game, &s0, &cfg, &solver, &path_options(config, seed))?;

    let text = serde_json::to_string(&path)?;
    let reloaded: PathRecord64 = serde_json::from_str(&text)?;
    record.path_valid = Some(validate_path(&game, &reloaded)?);
    let last = path.last().ok_or(satpath_core::Error::EmptyPath)?;
    record.residual = Some(game.residual(last)?);
    fill_path_fields(
        record,
        &path.group_counts(),
        path.step_count,
        path.terminal_is_equilibrium,
        &path.termination,
    );
    if config.include_paths {
        record.path = Some(serde_json::from_str(&text)?);
    }
    Ok(())
}

fn stochastic_path(
    config: &ExperimentConfig,
    seed: u64,
    shape: &Shape,
    record: &mut SeedRecord,
) -> Result<(), HarnessError> {
    let game = random_stochastic(&shape.actions, shape.states, config.instance.gamma, seed)?;
    let mut rng = substream(seed, &[TAG_START]);
    let actions: Vec<Vec<usize>> = shape
        .actions
        .iter()
        .map(|&m| (0..shape.states).map(|_| rng.random_range(0..m)).collect())
        .collect();
    let pi0 = StationaryPolicyProfile::pure(&shape.actions, &actions)?;
    let solver = MarkovDeskSolver::new(config.markov_solver.clone());
    let path = construct_path_stochastic(&game, &pi0, config.epsilon, &solver, &path_options(config, seed))?;

    let text = serde_json::to_string(&path)?;
    let reloaded: StochasticPathRecord64 = serde_json::from_str(&text)?;
    record.path_valid = Some(validate_stochastic_path(&game, &reloaded)?);
    let last = path.last().ok_or(satpath_core::Error::EmptyPath)?;
    record.residual = Some(stationary_residual(&game, last, default_eval_tol())?);
    fill_path_fields(
        record,
        &path.group_counts(),
        path.step_count,
        path.terminal_is_equilibrium,
        &path.termination,
    );
    if config.include_paths {
        record.path = Some(serde_json::from_str(&text)?);
    }
    Ok(())
}

fn fill_path_fields(record: &mut SeedRecord, counts: &[usize], steps: usize, eq: bool, termination: &Termination) {
    record.n_trajectory = counts.to_vec();
    record.steps = Some(steps);
    record.terminal_is_equilibrium = Some(eq);
    record.success = eq;
    record.termination = Some(termination.clone());
}

/// Start point for the topology check: each player independently plays a
/// pure action or a random lattice point of the configured grid.
pub fn topology_start(counts: &[usize], grid_step: f64, seed: u64) -> Result<MixedProfile64, HarnessError> {
    let k = subdivisions(grid_step)?;
    let mut rng = substream(seed, &[TAG_START]);
    let dists = counts
        .iter()
        .map(|&m| {
            if rng.random_bool(0.5) {
                let mut d = vec![0.0; m];
                d[rng.random_range(0..m)] = 1.0;
                d
            } else {
                random_lattice_point(m, k, &mut rng)
            }
        })
        .collect();
    Ok(MixedProfile::new(dists)?)
}

fn topology_check(
    config: &ExperimentConfig,
    seed: u64,
    shape: &Shape,
    record: &mut SeedRecord,
) -> Result<(), HarnessError> {
    let game = random_normal_form(&shape.actions, seed)?;
    let s = topology_start(&shape.actions, config.grid_step, seed)?;
    let cfg = SatisficingConfig::singletons(config.epsilon, shape.actions.len())?;
    let n = game.group_count(&s, &cfg)?;
    let minimum = is_local_minimum(&game, &s, &cfg, config.grid_step, config.budget, seed)?;
    let preservation = check_preservation(&game, &s, &cfg, config.grid_step, config.budget, seed)?;
    let certified = minimum.is_certified();
    let preserved = preservation.is_preserved();
    record.n_trajectory = vec![n];
    record.residual = Some(game.residual(&s)?);
    record.success = certified == preserved;
    record.detail = Some(serde_json::json!({
        "group_count": n,
        "certified_minimum": certified,
        "preserved": preserved,
        "consistent": certified == preserved,
    }));
    Ok(())
}

/// Two-sample chi-square homogeneity test on count vectors over the same
/// cells. Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> (f64, usize, f64) {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let total = (x + y) as f64;
        if total == 0.0 {
            continue;
        }
        cells += 1;
        let ea = total * na / (na + nb);
        let eb = total * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = cells.saturating_sub(1);
    if dof == 0 {
        return (stat, 0, 1.0);
    }
    let p = ChiSquared::new(dof as f64).map_or(f64::NAN, |d| d.sf(stat));
    (stat, dof, p)
}

/// A random history-blind policy profile.
pub fn random_policy(counts: &[usize], states: usize, seed: u64) -> Result<StationaryPolicyProfile<f64>, HarnessError> {
    let mut rng = substream(seed, &[TAG_POLICY]);
    let policies = counts
        .iter()
        .map(|&m| (0..states).map(|_| random_point(m, &mut rng)).collect())
        .collect();
    Ok(StationaryPolicyProfile::new(policies)?)
}

fn kstep_roundtrip(
    config: &ExperimentConfig,
    seed: u64,
    shape: &Shape,
    record: &mut SeedRecord,
) -> Result<(), HarnessError> {
    let base = random_stochastic(&shape.actions, shape.states, config.instance.gamma, seed)?;
    let kgame = KStepGame::new(base, config.instance.k)?;
    let compiled = compile_k_step(&kgame)?;
    let pi = random_policy(&shape.actions, shape.states, seed)?;
    let lifted = compiled.lift_policy(&pi)?;
    let sim = &config.simulation;

    let y0 = kgame.state_index(0, &vec![0; kgame.k]);
    let mut base_counts = vec![0u64; shape.states];
    let mut compiled_counts = vec![0u64; shape.states];
    let mut rb = substream(seed, &[TAG_SIM_BASE]);
    let mut rc = substream(seed, &[TAG_SIM_COMPILED]);
    for _ in 0..sim.episodes {
        base_counts[terminal_state(&kgame.base, &pi, 0, sim.horizon, &mut rb)] += 1;
        let y = terminal_state(&compiled.game, &lifted, y0, sim.horizon, &mut rc);
        compiled_counts[compiled.state_map[y].state] += 1;
    }
    let (statistic, dof, p_value) = chi_square_homogeneity(&base_counts, &compiled_counts);
    let rejected = p_value < sim.alpha;
    record.success = !rejected;
    record.detail = Some(serde_json::json!({
        "compiled_states": compiled.game.num_states(),
        "base_counts": base_counts,
        "compiled_counts": compiled_counts,
        "statistic": statistic,
        "dof": dof,
        "p_value": p_value,
        "rejected": rejected,
    }));
    Ok(())
}
