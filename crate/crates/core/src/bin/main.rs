use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sipg_obstacle::adapt::{adaptive_loop, AdaptConfig, StopReason};
use sipg_obstacle::bench::{emit_csv, emit_svg, SolutionJson};
use sipg_obstacle::Error;

#[derive(Parser)]
#[command(version, about = "Adaptive SIPG solver for the obstacle problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark through the adaptive loop.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Benchmark number.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3))]
    example: u32,
    /// Constant load of Example 3.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    load: f64,
    /// Maximum number of adaptive levels.
    #[arg(long, default_value_t = 30)]
    levels: usize,
    /// Do not refine into meshes with more DOFs than this.
    #[arg(long, default_value_t = 200_000)]
    max_dofs: usize,
    /// Maximum marking parameter.
    #[arg(long, default_value_t = 0.3)]
    theta: f64,
    /// Interior penalty parameter.
    #[arg(long, default_value_t = 25.0)]
    gamma: f64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also draw every level's mesh.
    #[arg(long)]
    svg: bool,
}

fn run(args: &RunArgs) -> Result<StopReason, Error> {
    if args.example != 3 && args.load != 0.0 {
        return Err(Error::InvalidParameter("--load only applies to example 3".into()));
    }
    if args.example == 3 && args.load != 0.0 && args.load != -15.0 {
        return Err(Error::InvalidParameter(format!(
            "example 3 is defined for load 0 or -15, got {}",
            args.load
        )));
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let config = AdaptConfig::<f64> {
        example: args.example,
        load: args.load,
        theta: args.theta,
        gamma: args.gamma,
        max_levels: args.levels,
        max_dofs: args.max_dofs,
        ..Default::default()
    };
    let outcome = adaptive_loop(&config, |view| {
        let r = view.record;
        eprintln!(
            "level {:3}  dofs {:7}  eta {:.4e}  err {}  pdas {}",
            r.level,
            r.dofs,
            r.eta_total,
            r.linf_error.map_or_else(|| "-".to_string(), |e| format!("{e:.4e}")),
            r.pdas_iterations,
        );
        let tag = format!("{:03}", view.level);
        SolutionJson::new(view.level, view.mesh, view.u, view.sigma)
            .write(args.out.join(format!("solution_L{tag}.json")))?;
        if args.svg {
            emit_svg(
                view.mesh,
                &view.estimate.classes,
                args.out.join(format!("mesh_L{tag}.svg")),
            )?;
        }
        Ok(())
    })?;
    emit_csv(&outcome.records, args.out.join("history.csv"))?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(outcome.stop),
    }
}

fn main() -> ExitCode {
    // usage errors exit with 1 so that 2 always means a solver failure
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(stop) => {
                eprintln!("stopped: {stop:?}");
                ExitCode::SUCCESS
            }
            Err(e @ (Error::InvalidParameter(_) | Error::UnknownExample(_) | Error::Io { .. } | Error::Json { .. })) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
            Err(e) => {
                eprintln!("solver failure: {e}");
                ExitCode::from(2)
            }
        },
    }
}
