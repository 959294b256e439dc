use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmetric_cli::{
    cmd_baire, cmd_dist, cmd_hilbert, cmd_urysohn_embed, cmd_urysohn_extend, cmd_validate, cmd_verify,
    parse_index_list, parse_rational_list, BaireMode, CliConfig, Outcome,
};

/// Exact constructions on finite rational metric spaces.
#[derive(Parser)]
#[command(name = "cmetric", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Precision exponent n for real-valued output (error ≤ 2^-n).
    #[arg(long, global = true, env = "CMETRIC_PREC", default_value_t = 10)]
    prec: u32,
    /// Print rationals as decimals with this many digits.
    #[arg(long, global = true)]
    digits: Option<usize>,
    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Search and prefix length cap.
    #[arg(long, global = true, default_value_t = 64)]
    stage_bound: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a file holds a metric and print its size and diameter.
    Validate { file: PathBuf },
    /// Print one distance exactly.
    Dist { file: PathBuf, i: usize, j: usize },
    /// Embed every point into the Urysohn core and verify isometry.
    UrysohnEmbed { file: PathBuf },
    /// Build a core point at given distances from embedded base points.
    UrysohnExtend {
        file: PathBuf,
        /// Comma-separated point indices.
        #[arg(long, default_value = "")]
        base: String,
        /// Comma-separated rational distances, one per base point.
        #[arg(long, default_value = "")]
        dists: String,
    },
    /// Print Hilbert cube coordinates of a point.
    Hilbert {
        file: PathBuf,
        point: usize,
        #[arg(long, default_value_t = 8)]
        coords: usize,
    },
    /// Encode a point as a Baire sequence, or decode a sequence literal.
    Baire {
        file: PathBuf,
        #[command(subcommand)]
        mode: BaireCommand,
    },
    /// Run the seeded invariant suites.
    Verify {
        /// urysohn, reals, spaces, representations or all.
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum BaireCommand {
    Encode { point: usize },
    Decode { literal: String },
}

fn run(cli: Cli) -> cmetric::Result<Outcome> {
    let cfg = CliConfig {
        seed: cli.common.seed,
        precision: cli.common.prec,
        stage_bound: cli.common.stage_bound,
        digits: cli.common.digits,
    };
    cfg.check()?;
    match cli.command {
        Command::Validate { file } => cmd_validate(&file, &cfg),
        Command::Dist { file, i, j } => cmd_dist(&file, i, j, &cfg),
        Command::UrysohnEmbed { file } => cmd_urysohn_embed(&file),
        Command::UrysohnExtend { file, base, dists } => {
            cmd_urysohn_extend(&file, &parse_index_list(&base)?, &parse_rational_list(&dists)?, &cfg)
        }
        Command::Hilbert { file, point, coords } => cmd_hilbert(&file, point, coords, &cfg),
        Command::Baire { file, mode } => {
            let mode = match mode {
                BaireCommand::Encode { point } => BaireMode::Encode { point },
                BaireCommand::Decode { literal } => BaireMode::Decode { literal },
            };
            cmd_baire(&file, &mode, &cfg)
        }
        Command::Verify { suite, trials } => cmd_verify(&suite, trials, cfg.seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("cmetric: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
