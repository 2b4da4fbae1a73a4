use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use gwprobe::cli::{self, Command, Format};
use gwprobe::config::RunConfig;
use gwprobe::Error;

const EXIT_USAGE: u8 = 64;

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Couplings,
    Response,
    Spectrum,
    Squeeze,
    Radiate,
    GaugeCheck,
    Commutator,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Couplings => Command::Couplings,
            Cmd::Response => Command::Response,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Squeeze => Command::Squeeze,
            Cmd::Radiate => Command::Radiate,
            Cmd::GaugeCheck => Command::GaugeCheck,
            Cmd::Commutator => Command::Commutator,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

/// Quantum noise and gravitational backaction of a cavity GW probe.
///
/// Set GWPROBE_THREADS to fix the worker count. Output does not depend on it.
#[derive(Parser)]
#[command(name = "gwprobe", version)]
struct Args {
    command: Cmd,
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Fmt>,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("gwprobe: {e}");
    ExitCode::from(if e.is_validation() { 1 } else { 2 })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    if let Ok(n) = std::env::var("GWPROBE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("gwprobe: GWPROBE_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }

    let cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let cmd = Command::from(args.command);
    let format = match args.format {
        Some(Fmt::Csv) => Format::Csv,
        Some(Fmt::Json) => Format::Json,
        None => cmd.default_format(),
    };
    let out = match cli::run(cmd, &cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let text = match cli::render(cmd, &cfg, &out, format) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };

    if let (true, Some(path)) = (cmd.plottable(), &cfg.plot) {
        if let Err(e) = std::fs::write(path, cli::plot_svg(&out.table)) {
            eprintln!("gwprobe: cannot write plot {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("gwprobe: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
