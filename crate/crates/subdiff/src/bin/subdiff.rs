//! Command line front end: forward solves, data generation, inversion and
//! the study runners, driven by a key=value config file with flag
//! overrides.
//!
//! Exit codes: 0 success, 2 invalid config, 3 inadmissible data, 4 solver
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subdiff::experiment::io::{
    read_observation_csv, sibling_path, write_observation_csv, write_reconstruction_csv,
    write_study_csv, write_summary_csv, RunSummary,
};
use subdiff::experiment::{
    generate_data, run_inversion, run_inversion_on, run_study, GeneratedData, StudyKind,
};
use subdiff::forward::{solve_forward, PotentialGrid, TimeGrid};
use subdiff::observation::observe;
use subdiff::{Error, ExperimentConfig, FemSystem};

#[derive(Parser)]
#[command(
    name = "subdiff",
    version,
    about = "Semilinear subdiffusion solver and time-dependent potential recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Config file (key = value lines, # comments); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed for noise generation.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fractional order in (0,1).
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Noise magnitude of the additive uniform model.
    #[arg(long = "eps", global = true)]
    epsilon: Option<f64>,

    /// Reference potential: q1, q2 or q3.
    #[arg(long, global = true)]
    potential: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem with the reference potential and write the
    /// observation series.
    Forward(CommonArgs),
    /// Generate exact and noisy observation data on a finer grid.
    GenerateData(CommonArgs),
    /// Reconstruct the potential from (generated or provided) noisy data.
    Invert {
        #[command(flatten)]
        common: CommonArgs,
        /// Invert this observation CSV instead of generating data.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Mesh refinement study (exact data, tau = T/1000).
    StudyH(CommonArgs),
    /// Time step refinement study (exact data, h = 1e-2).
    StudyTau(CommonArgs),
    /// Noise-coupled convergence study.
    StudyDelta(CommonArgs),
    /// Semi-convergence of the error over the time step at fixed noise.
    StudySemiconv(CommonArgs),
    /// Per-iteration error diagnostics of the fixed-point method.
    StudyIter(CommonArgs),
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(alpha) = common.alpha {
        cfg.alpha = alpha;
    }
    if let Some(eps) = common.epsilon {
        cfg.epsilon = eps;
    }
    if let Some(potential) = &common.potential {
        cfg.potential = potential.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_forward(cfg: &ExperimentConfig) -> Result<(), Error> {
    let spec = cfg.problem.problem_spec(cfg.alpha, cfg.t_end)?;
    let grid = TimeGrid::new(cfg.t_end, cfg.n_steps)?;
    let system = FemSystem::build(cfg.problem.build_mesh(cfg.n_cells)?, spec.diffusion())?;
    let q = PotentialGrid::sample(
        &|t| cfg.potential.value(t, cfg.t_end).expect("t within [0,T]"),
        &grid,
        cfg.inverse.c0,
    )?;
    let trajectory = solve_forward(&spec, &system, &grid, &q)?;
    let series = observe(&trajectory, &system)?;
    write_observation_csv(&cfg.out, &series)?;
    eprintln!(
        "forward: {} steps on {} dofs -> {}",
        cfg.n_steps,
        system.n_dofs(),
        cfg.out.display()
    );
    Ok(())
}

fn cmd_generate_data(cfg: &ExperimentConfig) -> Result<(), Error> {
    let data = generate_data(cfg)?;
    let exact_path = sibling_path(&cfg.out, "exact");
    let noisy_path = sibling_path(&cfg.out, "noisy");
    write_observation_csv(&exact_path, &data.exact)?;
    write_observation_csv(&noisy_path, &data.noisy)?;
    eprintln!(
        "generate-data: delta={:.4e} -> {} / {}",
        data.noisy.delta(),
        exact_path.display(),
        noisy_path.display()
    );
    Ok(())
}

fn cmd_invert(cfg: &ExperimentConfig, data_path: Option<&PathBuf>) -> Result<(), Error> {
    // External data files carry no noise metadata, so the realized level
    // is unknown for them.
    let mut realized_delta = f64::NAN;
    let run = match data_path {
        None => {
            let run = run_inversion(cfg)?;
            realized_delta = run.data.noisy.delta();
            run
        }
        Some(path) => {
            let noisy = read_observation_csv(path, cfg.t_end)?;
            if noisy.grid().n_steps() != cfg.n_steps {
                return Err(Error::Config(format!(
                    "data file has {} steps but the config asks for {}",
                    noisy.grid().n_steps(),
                    cfg.n_steps
                )));
            }
            // External data carries no exact counterpart; positivity is
            // still enforced by the reconstruction itself.
            let m_star = noisy.min_value();
            let data = GeneratedData {
                exact: noisy.clone(),
                noisy,
                m_star,
            };
            run_inversion_on(cfg, data)?
        }
    };
    let grid = run.grid;
    write_reconstruction_csv(
        &cfg.out,
        &grid,
        &|t| cfg.potential.value(t, cfg.t_end).expect("t within [0,T]"),
        &run.result.q_star,
    )?;
    let summary = RunSummary {
        alpha: cfg.alpha,
        n_steps: cfg.n_steps,
        h: cfg.problem.build_mesh(cfg.n_cells)?.h(),
        epsilon: cfg.epsilon,
        delta: realized_delta,
        iterations: run.result.iterations_used,
        final_error: run.error_l2,
    };
    write_summary_csv(&sibling_path(&cfg.out, "summary"), &summary)?;
    eprintln!(
        "invert: {} iterations, error {:.4e} -> {}",
        run.result.iterations_used,
        run.error_l2,
        cfg.out.display()
    );
    Ok(())
}

fn cmd_study(kind: StudyKind, cfg: &ExperimentConfig) -> Result<(), Error> {
    let rows = run_study(kind, cfg)?;
    write_study_csv(&cfg.out, &rows)?;
    eprintln!("study: {} rows -> {}", rows.len(), cfg.out.display());
    Ok(())
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Forward(common) => cmd_forward(&load_config(common)?),
        Command::GenerateData(common) => cmd_generate_data(&load_config(common)?),
        Command::Invert { common, data } => cmd_invert(&load_config(common)?, data.as_ref()),
        Command::StudyH(common) => cmd_study(StudyKind::H, &load_config(common)?),
        Command::StudyTau(common) => cmd_study(StudyKind::Tau, &load_config(common)?),
        Command::StudyDelta(common) => cmd_study(StudyKind::Delta, &load_config(common)?),
        Command::StudySemiconv(common) => cmd_study(StudyKind::SemiConv, &load_config(common)?),
        Command::StudyIter(common) => cmd_study(StudyKind::Iter, &load_config(common)?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
