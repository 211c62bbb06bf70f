use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use loglinear_core::bounds::{assemble_report_with, ReportOptions};
use loglinear_core::dynamics::{run_trajectory, DynamicsConfig, Initial, NoiseMode, Rule};
use loglinear_core::experiments::{
    check_invariants, export_csv, generate_plateau_game, run_experiment, ExperimentConfig,
};
use loglinear_core::game::{game_constants, is_symmetric, verify_potential};
use loglinear_core::markov::{build_transition, write_matrix_csv, write_ppmc1};
use loglinear_core::{ActionProfile, PotentialGame};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "loglinear",
    version,
    about = "Log-linear learning in potential games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every analytical bound for a game and write the report as JSON.
    Bounds {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "thm1")]
        variant: Variant,
        /// Exploration share (fixed-share) or noise bound (noisy).
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Constant of the modified-rule time bound.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep or comparison from a TOML config and export CSV curves.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Assert the run's invariants; exit non-zero if any fails.
        #[arg(long)]
        check: bool,
        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run one trajectory and write it as CSV.
    Simulate {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        /// Draw fresh utility noise every round instead of a frozen table.
        #[arg(long)]
        per_round_noise: bool,
        /// Comma-separated initial actions; uniform when absent.
        #[arg(long, value_delimiter = ',')]
        start: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the exact transition matrix of a rule.
    Matrix {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: MatrixFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the potential identity and print the game's constants as JSON.
    CheckGame {
        #[arg(long)]
        game: PathBuf,
    },
    /// Write a plateau identical-interest game as JSON.
    Plateau {
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Thm1,
    Thm2,
    Thm3Noisy,
    Thm3FixedShare,
    Cor1,
}

impl Variant {
    fn rule(self) -> Rule {
        match self {
            Variant::Thm1 => Rule::LogLinear,
            Variant::Thm2 => Rule::BinaryLogLinear,
            Variant::Thm3Noisy => Rule::NoisyLogLinear,
            Variant::Thm3FixedShare => Rule::FixedShare,
            Variant::Cor1 => Rule::ModifiedSymmetric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    LogLinear,
    Binary,
    FixedShare,
    Noisy,
    ModifiedSymmetric,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::LogLinear => Rule::LogLinear,
            RuleArg::Binary => Rule::BinaryLogLinear,
            RuleArg::FixedShare => Rule::FixedShare,
            RuleArg::Noisy => Rule::NoisyLogLinear,
            RuleArg::ModifiedSymmetric => Rule::ModifiedSymmetric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Csv,
    Ppmc1,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(value: &impl serde::Serialize, out: Option<&Path>) -> CliResult<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("PP_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("PP_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            return Err("PP_THREADS must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Bounds {
            game,
            eps,
            variant,
            xi,
            alpha,
            c,
            noise_seed,
            out,
        } => {
            let game = PotentialGame::load_json(&game)?;
            let config = DynamicsConfig::new(variant.rule(), 0.0)
                .with_xi(xi)
                .with_alpha(alpha)
                .with_noise_seed(noise_seed);
            let opts = ReportOptions {
                c,
                ..ReportOptions::default()
            };
            let report = assemble_report_with(&game, &config, eps, &opts)?;
            write_json(&report, out.as_deref())?;
            Ok(true)
        }
        Command::Experiment {
            config,
            check,
            output,
        } => {
            configure_threads()?;
            let mut config = ExperimentConfig::load_toml(&config)?;
            if output.is_some() {
                config.output_path = output;
            }
            let result = run_experiment(&config)?;
            match &config.output_path {
                Some(path) => {
                    export_csv(&result, path)?;
                    eprintln!("wrote {}", path.display());
                }
                None => log::warn!("no output_path configured; curves were not written"),
            }
            if !check {
                return Ok(true);
            }
            let outcomes = check_invariants(&config, &result)?;
            let mut all = true;
            for o in &outcomes {
                all &= o.passed;
                let tag = if o.passed { "PASS" } else { "FAIL" };
                println!("{tag} {}: {}", o.name, o.detail);
            }
            Ok(all)
        }
        Command::Simulate {
            game,
            rule,
            beta,
            steps,
            xi,
            alpha,
            seed,
            noise_seed,
            per_round_noise,
            start,
            out,
        } => {
            let game = PotentialGame::load_json(&game)?;
            let mut config = DynamicsConfig::new(rule.into(), beta)
                .with_xi(xi)
                .with_alpha(alpha)
                .with_seed(seed)
                .with_noise_seed(noise_seed);
            if per_round_noise {
                config.noise_mode = NoiseMode::PerRound;
            }
            let initial = start.map_or(Initial::Uniform, |a| {
                Initial::Profile(ActionProfile::new(a))
            });
            let traj = run_trajectory(&game, &config, steps, &initial)?;
            for w in &traj.warnings {
                eprintln!("warning: {w}");
            }
            let mut w = sink(out.as_deref())?;
            traj.write_csv(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Matrix {
            game,
            rule,
            beta,
            xi,
            noise_seed,
            format,
            out,
        } => {
            let game = PotentialGame::load_json(&game)?;
            let config = DynamicsConfig::new(rule.into(), beta)
                .with_xi(xi)
                .with_noise_seed(noise_seed);
            let p = build_transition(&game, &config)?;
            let mut w = sink(out.as_deref())?;
            match format {
                MatrixFormat::Csv => write_matrix_csv(p.matrix(), &mut w)?,
                MatrixFormat::Ppmc1 => write_ppmc1(p.matrix(), &mut w)?,
            }
            w.flush()?;
            Ok(true)
        }
        Command::CheckGame { game } => {
            let game = PotentialGame::load_json(&game)?;
            let check = verify_potential(&game, 1e-9);
            let symmetry = is_symmetric(&game);
            let report = json!({
                "num_players": game.num_players(),
                "num_actions": game.num_actions(),
                "num_profiles": game.num_profiles(),
                "potential_check": check,
                "constants": game_constants(&game),
                "theorem_compatible": game.is_theorem_compatible(),
                "symmetric": symmetry,
            });
            write_json(&report, None)?;
            Ok(check.holds)
        }
        Command::Plateau { delta, seed, out } => {
            let game = generate_plateau_game(delta, seed)?;
            let mut w = sink(out.as_deref())?;
            writeln!(w, "{}", game.to_json_string()?)?;
            w.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
