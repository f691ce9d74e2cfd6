use clap::{Parser, Subcommand};
use levy_exotic::app::{cmd_convergence, cmd_price, cmd_validate, Axis, PriceOverrides};
use levy_exotic::spec::Method;

#[derive(Parser)]
#[command(name = "levy-exotic", version, about = "Fourier pricing of discretely monitored exotic options under Lévy models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price the contract described by a JSON spec file.
    Price {
        #[arg(long)]
        spec: String,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a validation suite: lemma1, gaussian, parity, asian-limit or all.
    Validate {
        #[arg(value_parser = ["lemma1", "gaussian", "parity", "asian-limit", "all"])]
        suite: String,
    },
    /// Print a refinement table as CSV.
    Convergence {
        #[arg(long)]
        spec: String,
        #[arg(long, value_enum)]
        axis: Axis,
    },
}

fn main() {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Price {
            spec,
            method,
            tol,
            paths,
            seed,
        } => cmd_price(&spec, PriceOverrides { method, tol, paths, seed }),
        Command::Validate { suite } => cmd_validate(&suite),
        Command::Convergence { spec, axis } => cmd_convergence(&spec, axis),
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
