use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hetcomp_core::emit::{emit_lotos, emit_process_dot, emit_uppaal};
use hetcomp_core::interp::{load_dot, EXIT_ERROR};
use hetcomp_core::{run_script_file, RunOptions, SystemNet, VerdictFormat};

#[derive(Parser)]
#[command(name = "hetcomp", version, about = "Compose and check labelled transition system models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a script: evaluate bindings, print verdicts, write emitted files.
    Run(ScriptArgs),
    /// Like `run`, but never writes files.
    Check(ScriptArgs),
    /// Convert a DOT model to another format.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct ScriptArgs {
    script: PathBuf,
    /// Maximum number of global states to explore.
    #[arg(long, env = "HETCOMP_BOUND")]
    bound: Option<usize>,
    /// Length bound for `traces`.
    #[arg(long, default_value_t = 10)]
    trace_len: usize,
    /// Directory for emitted files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Uppaal,
    Lotos,
    Dot,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    to: Target,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn run(args: &ScriptArgs, write_files: bool) -> i32 {
    let options = RunOptions {
        bound: args.bound,
        trace_len: args.trace_len,
        input_dir: args.script.parent().map(Path::to_path_buf).unwrap_or_default(),
        out_dir: args.out_dir.clone(),
        format: match args.format {
            Format::Json => VerdictFormat::Json,
            Format::Text => VerdictFormat::Text,
        },
        write_files,
    };
    let stdout = io::stdout();
    let mut console = stdout.lock();
    let result = run_script_file(&args.script, &options, &mut console);
    let _ = console.flush();
    match result {
        Ok(report) => report.exit_code(),
        Err(e) => {
            eprintln!("error: {}: {e}", args.script.display());
            EXIT_ERROR
        }
    }
}

fn convert(args: &ConvertArgs) -> Result<(), String> {
    let process = load_dot(&args.input).map_err(|e| e.to_string())?;
    let out = match args.to {
        Target::Uppaal => emit_uppaal(&SystemNet::single(process)).map_err(|e| e.to_string())?,
        Target::Lotos => emit_lotos(&process),
        Target::Dot => emit_process_dot(&process),
    };
    match &args.output {
        Some(file) => fs::write(file, out).map_err(|e| format!("cannot write `{}`: {e}", file.display())),
        None => io::stdout().write_all(out.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run(args) => run(args, true),
        Command::Check(args) => run(args, false),
        Command::Convert(args) => match convert(args) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
    };
    ExitCode::from(code as u8)
}
