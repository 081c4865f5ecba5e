//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use satpath_core::dynamics::{
    check_preservation, check_preservation_with, construct_path, is_local_minimum, is_local_minimum_with, LocalMinimum,
    PathOptions, Preservation,
};
use satpath_core::markov::{
    compile_k_step, construct_path_stochastic, default_eval_tol, evaluate_all, stationary_regrets, KStepGame,
    MarkovDeskSolver, MarkovDynamics, MarkovSettings, MarkovSolver, StationaryPolicyProfile, ValueTable,
};
use satpath_core::solvers::{DeskSolver, EquilibriumSolver, SolverSettings};
use satpath_core::{
    GroupPartition, MixedProfile, MixedProfile64, NormalFormGame64, SatisficingConfig, StationaryPolicyProfile64,
    StochasticGame64,
};
use serde::Serialize;

use crate::error::HarnessError;
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::generate::{named_game, random_kstep, random_normal_form, random_stochastic, NamedGame};
use crate::report;

const GAME_SCHEMAS: &str = "a normal-form game {\"players\", \"actions\", \"payoffs\"}, \
    a stochastic game {\"players\", \"states\", \"actions\", \"transition\", \"payoffs\", \"discounts\"} \
    or a k-step game {\"base\", \"k\"}";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "satpath",
    version,
    about = "Satisficing paths in normal-form and Markov games"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for generators, samplers and solver restarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Lattice step for successor sampling.
    #[arg(long, global = true, default_value_t = satpath_core::dynamics::DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    /// Successors sampled per probe.
    #[arg(long, global = true, default_value_t = satpath_core::dynamics::DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, global = true, default_value_t = satpath_core::dynamics::DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// Solver residual tolerance.
    #[arg(long, global = true, default_value_t = satpath_core::solvers::DEFAULT_TOL)]
    pub tol: f64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a named or random game.
    Gen(GenArgs),
    /// Construct a satisficing path from a start profile.
    Path {
        #[arg(long)]
        game: PathBuf,
        /// `pure:a0,a1,...`, `uniform` or a JSON file.
        #[arg(long, default_value = "uniform")]
        start: String,
        /// Player groups for normal-form games, e.g. `0,1;2`. Defaults to
        /// singletons.
        #[arg(long)]
        groups: Option<String>,
    },
    /// Evaluate a profile: discounted values (stage payoffs for normal-form
    /// games) and regrets, to the tighter of `--tol` and 1e-9.
    Eval {
        #[arg(long)]
        game: PathBuf,
        /// `pure:a0,a1,...`, `uniform` or a JSON file.
        #[arg(long, default_value = "uniform")]
        policy: String,
    },
    /// Find an approximate equilibrium within `--tol`.
    Solve {
        #[arg(long)]
        game: PathBuf,
    },
    /// Compile a k-step game into a stationary game.
    CompileKstep {
        #[arg(long)]
        game: PathBuf,
        /// History length, required when the file holds a plain stochastic
        /// game.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run the local-minimum and preservation checks at a profile.
    CheckTopology {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        profile: String,
    },
    /// Run an experiment configuration and emit its report.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub named: Option<NamedGame>,
    /// Action counts per player, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    pub actions: Vec<usize>,
    /// Generate a stochastic game with this many states.
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    /// Generate a k-step game with this history length.
    #[arg(long)]
    pub k: Option<usize>,
}

/// A game file of any supported kind.
#[derive(Clone, Debug)]
pub enum LoadedGame {
    Normal(NormalFormGame64),
    Stochastic(StochasticGame64),
    KStep(KStepGame<f64>),
}

pub fn load_game(path: &Path) -> Result<LoadedGame, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let schema_err = |schema, source| HarnessError::Schema {
        path: path.to_path_buf(),
        schema,
        expected: GAME_SCHEMAS,
        source,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| schema_err("game", e))?;
    let has = |key: &str| value.get(key).is_some();
    if has("base") && has("k") {
        serde_json::from_value(value)
            .map(LoadedGame::KStep)
            .map_err(|e| schema_err("k-step game", e))
    } else if has("states") || has("transition") || has("discounts") {
        serde_json::from_value(value)
            .map(LoadedGame::Stochastic)
            .map_err(|e| schema_err("stochastic game", e))
    } else {
        serde_json::from_value(value)
            .map(LoadedGame::Normal)
            .map_err(|e| schema_err("normal-form game", e))
    }
}

fn parse_pure(spec: &str) -> Result<Vec<usize>, HarnessError> {
    spec.split(',')
        .map(|a| {
            a.trim()
                .parse::<usize>()
                .map_err(|_| HarnessError::Usage(format!("bad action index {a:?} in pure:{spec}")))
        })
        .collect()
}

fn read_json<D: serde::de::DeserializeOwned>(
    path: &Path,
    schema: &'static str,
    expected: &'static str,
) -> Result<D, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Schema {
        path: path.to_path_buf(),
        schema,
        expected,
        source,
    })
}

pub fn parse_profile(spec: &str, counts: &[usize]) -> Result<MixedProfile64, HarnessError> {
    if spec == "uniform" {
        return Ok(MixedProfile::uniform(counts));
    }
    if let Some(rest) = spec.strip_prefix("pure:") {
        return Ok(MixedProfile::pure(counts, &parse_pure(rest)?)?);
    }
    let p: MixedProfile64 = read_json(Path::new(spec), "mixed profile", "one distribution per player")?;
    if p.action_counts() != counts {
        return Err(satpath_core::Error::DimensionMismatch("profile does not match the game".into()).into());
    }
    Ok(p)
}

/// `pure:` assigns each player the same action in every state.
pub fn parse_policy(spec: &str, counts: &[usize], states: usize) -> Result<StationaryPolicyProfile64, HarnessError> {
    if spec == "uniform" {
        return Ok(StationaryPolicyProfile::uniform(counts, states));
    }
    if let Some(rest) = spec.strip_prefix("pure:") {
        let actions: Vec<Vec<usize>> = parse_pure(rest)?.into_iter().map(|a| vec![a; states]).collect();
        return Ok(StationaryPolicyProfile::pure(counts, &actions)?);
    }
    read_json(Path::new(spec), "stationary policy", "policies[player][state][action]")
}

fn parse_groups(spec: &str, n: usize) -> Result<GroupPartition, HarnessError> {
    let groups = spec
        .split(';')
        .map(|g| parse_pure(g).map_err(|_| HarnessError::Usage(format!("bad group list {spec:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroupPartition::new(n, groups)?)
}

#[derive(Serialize)]
struct EvalReport {
    values: ValueTable<f64>,
    regrets: Vec<f64>,
    residual: f64,
}

#[derive(Serialize)]
struct TopologyReport<P> {
    group_count: usize,
    local_minimum: LocalMinimum<P>,
    preservation: Preservation<P>,
}

fn emit(global: &GlobalArgs, text: &str) -> Result<(), HarnessError> {
    match &global.out {
        Some(path) => report::write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<S: Serialize>(global: &GlobalArgs, value: &S) -> Result<(), HarnessError> {
    if global.format == Format::Csv {
        return Err(HarnessError::Usage(
            "--format csv is only supported by `path` and `report`".into(),
        ));
    }
    emit(global, &report::to_json(value)?)
}

fn csv_string(f: impl FnOnce(&mut Vec<u8>) -> Result<(), HarnessError>) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

fn path_options(g: &GlobalArgs) -> PathOptions {
    PathOptions {
        max_steps: g.max_steps,
        grid_step: g.grid_step,
        budget: g.budget,
        seed: g.seed,
    }
}

fn desk_solver(g: &GlobalArgs) -> DeskSolver {
    DeskSolver::new(SolverSettings {
        seed: g.seed,
        ..SolverSettings::default()
    })
}

fn markov_solver(g: &GlobalArgs) -> MarkovDeskSolver {
    MarkovDeskSolver::new(MarkovSettings {
        seed: g.seed,
        stage: SolverSettings {
            seed: g.seed,
            ..SolverSettings::default()
        },
        ..MarkovSettings::default()
    })
}

fn stochastic_only(game: LoadedGame, what: &str) -> Result<StochasticGame64, HarnessError> {
    match game {
        LoadedGame::Stochastic(g) => Ok(g),
        LoadedGame::KStep(_) => Err(HarnessError::Usage(format!(
            "{what} takes a normal-form or stochastic game; compile k-step games first"
        ))),
        LoadedGame::Normal(_) => unreachable!(),
    }
}

pub fn run(cli: &Cli) -> Result<(), HarnessError> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(args) => emit_json(g, &generate(args, g.seed)?),
        Command::Path { game, start, groups } => match load_game(game)? {
            LoadedGame::Normal(game) => {
                let s0 = parse_profile(start, game.action_counts())?;
                let n = game.num_players();
                let partition = match groups {
                    Some(spec) => parse_groups(spec, n)?,
                    None => GroupPartition::singletons(n),
                };
                let config = SatisficingConfig::new(g.epsilon, partition)?;
                let path = construct_path(&game, &s0, &config, &desk_solver(g), &path_options(g))?;
                match g.format {
                    Format::Json => emit(g, &report::to_json(&path)?),
                    Format::Csv => emit(g, &csv_string(|b| report::write_path_csv(&path, b))?),
                }
            }
            other => {
                if groups.is_some() {
                    return Err(HarnessError::Usage("--groups applies to normal-form games only".into()));
                }
                let game = stochastic_only(other, "path")?;
                let pi0 = parse_policy(start, game.action_counts(), game.num_states())?;
                let path = construct_path_stochastic(&game, &pi0, g.epsilon, &markov_solver(g), &path_options(g))?;
                match g.format {
                    Format::Json => emit(g, &report::to_json(&path)?),
                    Format::Csv => emit(g, &csv_string(|b| report::write_path_csv(&path, b))?),
                }
            }
        },
        Command::Eval { game, policy } => {
            let game = match load_game(game)? {
                LoadedGame::Normal(nf) => StochasticGame64::from_normal_form(&nf, vec![0.0; nf.num_players()])?,
                other => stochastic_only(other, "eval")?,
            };
            let pi = parse_policy(policy, game.action_counts(), game.num_states())?;
            let tol = g.tol.min(default_eval_tol());
            let regrets = stationary_regrets(&game, &pi, tol)?;
            let residual = regrets.iter().copied().fold(0.0, f64::max);
            emit_json(
                g,
                &EvalReport {
                    values: evaluate_all(&game, &pi, tol)?,
                    regrets,
                    residual,
                },
            )
        }
        Command::Solve { game } => match load_game(game)? {
            LoadedGame::Normal(game) => emit_json(g, &desk_solver(g).solve(&game, g.tol)?),
            other => {
                let game = stochastic_only(other, "solve")?;
                emit_json(g, &markov_solver(g).solve(&game, g.tol)?)
            }
        },
        Command::CompileKstep { game, k } => {
            let kgame = match (load_game(game)?, k) {
                (LoadedGame::KStep(kg), None) => kg,
                (LoadedGame::KStep(kg), Some(k)) => KStepGame::new(kg.base, *k)?,
                (LoadedGame::Stochastic(base), Some(k)) => KStepGame::new(base, *k)?,
                (LoadedGame::Stochastic(_), None) => {
                    return Err(HarnessError::Usage(
                        "--k is required for a plain stochastic game".into(),
                    ))
                }
                (LoadedGame::Normal(_), _) => {
                    return Err(HarnessError::Usage(
                        "compile-kstep takes a stochastic or k-step game".into(),
                    ))
                }
            };
            emit_json(g, &compile_k_step(&kgame)?)
        }
        Command::CheckTopology { game, profile } => {
            let (eps, step, budget, seed) = (g.epsilon, g.grid_step, g.budget, g.seed);
            match load_game(game)? {
                LoadedGame::Normal(game) => {
                    let s = parse_profile(profile, game.action_counts())?;
                    let config = SatisficingConfig::singletons(eps, game.num_players())?;
                    emit_json(
                        g,
                        &TopologyReport {
                            group_count: game.group_count(&s, &config)?,
                            local_minimum: is_local_minimum(&game, &s, &config, step, budget, seed)?,
                            preservation: check_preservation(&game, &s, &config, step, budget, seed)?,
                        },
                    )
                }
                other => {
                    let game = stochastic_only(other, "check-topology")?;
                    let pi = parse_policy(profile, game.action_counts(), game.num_states())?;
                    pi.check(&game)?;
                    let config = SatisficingConfig::singletons(eps, game.num_players())?;
                    let dynamics = MarkovDynamics::new(&game);
                    use satpath_core::dynamics::SatisficingGame;
                    emit_json(
                        g,
                        &TopologyReport {
                            group_count: dynamics.satisfied_groups(&pi, &config)?.len(),
                            local_minimum: is_local_minimum_with(&dynamics, &pi, &config, step, budget, seed)?,
                            preservation: check_preservation_with(&dynamics, &pi, &config, step, budget, seed)?,
                        },
                    )
                }
            }
        }
        Command::Report { config } => {
            let config: ExperimentConfig = read_json(config, "experiment config", "{\"kind\", \"seeds\", ...}")?;
            let report = run_experiment(&config)?;
            match g.format {
                Format::Json => emit(g, &report::to_json(&report)?),
                Format::Csv => emit(g, &csv_string(|b| report::write_csv(&report, b))?),
            }
        }
    }
}

/// Game JSON for `gen`.
pub fn generate(args: &GenArgs, seed: u64) -> Result<serde_json::Value, HarnessError> {
    if args.actions.is_empty() || args.actions.contains(&0) {
        return Err(HarnessError::Usage(
            "--actions needs at least one positive count".into(),
        ));
    }
    if let Some(name) = args.named {
        if args.states.is_some() || args.k.is_some() {
            return Err(HarnessError::Usage(
                "named games are normal-form; drop --states and --k".into(),
            ));
        }
        return Ok(serde_json::to_value(named_game(name, Some(&args.actions))?)?);
    }
    let value = match (args.states, args.k) {
        (None, None) => serde_json::to_value(random_normal_form(&args.actions, seed)?)?,
        (Some(x), None) => serde_json::to_value(random_stochastic(&args.actions, x, args.gamma, seed)?)?,
        (x, Some(k)) => serde_json::to_value(random_kstep(&args.actions, x.unwrap_or(1), args.gamma, k, seed)?)?,
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_specs() {
        assert_eq!(
            parse_profile("pure:1,0", &[2, 2]).unwrap().flat(),
            vec![0.0, 1.0, 1.0, 0.0]
        );
        assert_eq!(parse_profile("uniform", &[2]).unwrap().flat(), vec![0.5, 0.5]);
        assert!(matches!(parse_profile("pure:a", &[2]), Err(HarnessError::Usage(_))));
        assert!(parse_profile("pure:2", &[2]).is_err());
        let pi = parse_policy("pure:1", &[2], 3).unwrap();
        assert_eq!(pi.flat(), vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn group_specs() {
        let p = parse_groups("0,2;1", 3).unwrap();
        assert_eq!(p.groups().len(), 2);
        assert!(parse_groups("0;0", 2).is_err());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from([
            "satpath",
            "path",
            "--game",
            "g.json",
            "--start",
            "pure:0,0",
            "--epsilon",
            "1e-3",
        ])
        .unwrap();
        assert_eq!(cli.global.epsilon, 1e-3);
        assert!(matches!(cli.command, Command::Path { .. }));
        let e = Cli::try_parse_from(["satpath", "path", "--bogus"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
