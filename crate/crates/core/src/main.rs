use std::fs::File;
use std::io::{self, BufRead, BufReader, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;

use ipm::api::{self, ProverFactory};
use ipm::pipeline::{drive_pipeline, PipelineOptions, PipelineOutput, DEFAULT_BOOGIE_CMD, DEFAULT_DAFNY_CMD};
use ipm::prover::Prover;
use ipm::repl::{run_repl, ReplOutcome};
use ipm::solver::{locate_solver, start_session, SolverConfig};

/// Interactive proof mode: prove annotated obligations step by step with
/// check, assert, case and assume, then copy the generated proof back.
#[derive(Debug, Parser)]
#[command(name = "ipm", version)]
struct Cli {
    /// A `.dfy` source with `{:ipm}` annotations, or an instrumented `.smt2` script.
    path: PathBuf,
    /// Read `<stem>.smt2` next to the source instead of running the toolchain.
    #[arg(long)]
    from_smt: bool,
    /// SMT solver executable (defaults to $IPM_SOLVER, then `z3` on PATH).
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Per-query solver timeout in milliseconds.
    #[arg(long, default_value_t = 1000)]
    timeout_ms: u64,
    /// Log every command sent to the solver and its answer.
    #[arg(long)]
    trace_smt: Option<PathBuf>,
    /// Where to write the instrumented source.
    #[arg(long)]
    emit_instrumented: Option<PathBuf>,
    /// Command template turning the instrumented source into Boogie.
    #[arg(long, default_value = DEFAULT_DAFNY_CMD)]
    dafny_cmd: String,
    /// Command template turning Boogie into an SMT-LIB script.
    #[arg(long, default_value = DEFAULT_BOOGIE_CMD)]
    boogie_cmd: String,
    /// Serve newline-delimited JSON sessions on 127.0.0.1:<port>.
    #[arg(long)]
    serve: Option<u16>,
    /// Read commands from a file instead of standard input.
    #[arg(long)]
    script: Option<PathBuf>,
}

fn solver_config(cli: &Cli) -> Result<SolverConfig, String> {
    let executable = locate_solver(cli.solver.as_deref()).ok_or_else(|| {
        let asked = cli
            .solver
            .clone()
            .or_else(|| std::env::var_os("IPM_SOLVER").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("z3"));
        format!(
            "SMT solver `{}` not found; install z3 or point --solver / IPM_SOLVER at it",
            asked.display()
        )
    })?;
    Ok(SolverConfig {
        executable,
        per_query_timeout: Duration::from_millis(cli.timeout_ms),
        trace: cli.trace_smt.clone(),
        ..SolverConfig::default()
    })
}

fn serve(port: u16, config: SolverConfig, input: PipelineOutput) -> Result<(), String> {
    if input.targets.len() > 1 {
        log::warn!("serving the first of {} targets", input.targets.len());
    }
    let input = Arc::new(input);
    let factory: ProverFactory = Arc::new(move || {
        let session = start_session(&config, &input.options, &input.prelude).map_err(|e| e.to_string())?;
        Prover::start(&input.targets[0], session, config.per_query_timeout).map_err(|e| e.to_string())
    });
    let listener = api::bind(("127.0.0.1", port)).map_err(|e| format!("cannot listen on port {port}: {e}"))?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    eprintln!("listening on {addr}");
    api::serve(listener, factory).map_err(|e| e.to_string())
}

fn interact(cli: &Cli, config: SolverConfig, input: PipelineOutput) -> Result<ExitCode, String> {
    let (mut reader, echo): (Box<dyn BufRead>, bool) = match &cli.script {
        Some(path) => {
            let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
            (Box::new(BufReader::new(file)), true)
        }
        None => (Box::new(io::stdin().lock()), !io::stdin().is_terminal()),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut session = start_session(&config, &input.options, &input.prelude).map_err(|e| e.to_string())?;
    let total = input.targets.len();
    let mut tainted = false;
    for (i, target) in input.targets.iter().enumerate() {
        if total > 1 {
            let label = target.label.as_deref().unwrap_or("(unlabelled)");
            let _ = writeln!(out, "== target {}/{total}: {label}", i + 1);
        }
        let mut prover = Prover::start(target, session, config.per_query_timeout).map_err(|e| e.to_string())?;
        let outcome = run_repl(&mut prover, &mut reader, &mut out, echo).map_err(|e| e.to_string())?;
        session = prover.finish();
        match outcome {
            ReplOutcome::Completed { tainted: t } => tainted |= t,
            other => {
                session.shutdown();
                return Ok(ExitCode::from(other.exit_code() as u8));
            }
        }
    }
    session.shutdown();
    if tainted {
        log::warn!("at least one proof relies on assume");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let opts = PipelineOptions {
        from_smt: cli.from_smt,
        dafny_cmd: cli.dafny_cmd.clone(),
        boogie_cmd: cli.boogie_cmd.clone(),
        emit_instrumented: cli.emit_instrumented.clone(),
    };
    let input = match drive_pipeline(&cli.path, &opts) {
        Ok(input) => input,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let config = match solver_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.serve {
        Some(port) => serve(port, config, input).map(|()| ExitCode::SUCCESS),
        None => interact(&cli, config, input),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
