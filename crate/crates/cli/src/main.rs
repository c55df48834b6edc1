use std::io::{self, BufReader, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;

use pbe_core::backends::protocol::{serve, EchoConfig};
use pbe_core::backends::{EnumBackend, OracleBackend};
use pbe_core::harness::{
    evaluate, generate_records, read_jsonl, run_record, single_step_accuracy, write_jsonl,
    BackendKind, Format, ResultRecord, RunOptions, StepAccuracy,
};
use pbe_core::search::{Mode, Role};
use pbe_core::taskgen::{decompose, TaskRecord, Trace};
use pbe_core::{Dc, Domain, DomainKind, Rf, Side, Split, SplitKind};

#[derive(Parser)]
#[command(
    name = "pbe",
    version,
    about = "Programming-by-example benchmarks and search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Oracle,
    Enum,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exedec,
    Nosubgoal,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepBackend {
    Oracle,
    Enum,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a JSONL dataset for one (domain, split, side).
    GenDataset {
        #[arg(long)]
        domain: DomainKind,
        #[arg(long)]
        split: SplitKind,
        #[arg(long, default_value = "test")]
        side: Side,
        #[arg(long, default_value_t = 200)]
        count: u64,
        /// First task seed; tasks use seeds seed..seed+count.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a search over every task of a dataset.
    RunSearch {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "exedec")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "oracle")]
        backend: BackendArg,
        /// tcp:HOST:PORT or exec:COMMAND [ARGS...] (remote backend only).
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, default_value_t = 10)]
        beam_size: usize,
        /// Defaults to 10 for rf and 5 for dc.
        #[arg(long)]
        max_steps: Option<usize>,
        /// Per-task search timeout in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Per-call enumeration budget in seconds.
        #[arg(long, default_value_t = 60.0)]
        enum_budget: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a results file against its dataset.
    Eval {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "table")]
        format: Format,
        /// Also report top-1 single-step accuracy of a backend on the
        /// dataset's ground-truth traces.
        #[arg(long, value_enum)]
        single_step: Option<StepBackend>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a program on inputs and print each output.
    ///
    /// Each INPUT is one example; list-DSL examples separate multiple
    /// inputs with ';' (e.g. "[1, 2]; 3").
    Exec {
        program: String,
        inputs: Vec<String>,
        /// Inferred from the program when omitted.
        #[arg(long)]
        domain: Option<DomainKind>,
    },
    /// Loopback server for the remote proposal protocol.
    ProtocolEcho {
        /// Listen on a TCP address instead of serving standard input/output.
        #[arg(long)]
        listen: Option<String>,
        /// Fixed proposal text (repeatable); otherwise requests are echoed.
        #[arg(long)]
        reply: Vec<String>,
        /// Send a malformed line as the N-th response (repeatable, 1-based).
        #[arg(long)]
        malformed: Vec<usize>,
    },
}

fn gen_dataset(
    domain: DomainKind,
    split: SplitKind,
    side: Side,
    count: u64,
    seed: u64,
    out: PathBuf,
) -> Result<()> {
    let split = Split::new(domain, split);
    let mut records = Vec::new();
    let mut failed = 0;
    for (i, r) in generate_records(split, side, seed..seed + count)
        .into_iter()
        .enumerate()
    {
        match r {
            Ok(record) => records.push(record),
            Err(e) => {
                failed += 1;
                warn!("seed {}: {e}", seed + i as u64);
            }
        }
    }
    write_jsonl(&out, &records)?;
    info!(
        "wrote {} {split} {side} tasks to {}",
        records.len(),
        out.display()
    );
    if failed > 0 {
        bail!("{failed} of {count} tasks could not be generated");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_search(
    dataset: PathBuf,
    mode: ModeArg,
    backend: BackendArg,
    endpoint: Option<String>,
    beam_size: usize,
    max_steps: Option<usize>,
    timeout: Option<f64>,
    enum_budget: f64,
    out: PathBuf,
) -> Result<()> {
    if beam_size == 0 || max_steps == Some(0) {
        bail!("--beam-size and --max-steps must be at least 1");
    }
    let tasks: Vec<TaskRecord> = read_jsonl(&dataset)?;
    let kind = match backend {
        BackendArg::Oracle => BackendKind::Oracle,
        BackendArg::Enum => BackendKind::Enum,
        BackendArg::Remote => {
            let e = endpoint.context("--backend remote needs --endpoint")?;
            BackendKind::Remote(e.parse()?)
        }
    };
    let mode = match mode {
        ModeArg::Exedec => Mode::Exedec,
        ModeArg::Nosubgoal => Mode::Nosubgoal,
    };
    let mut opts = RunOptions::new(mode, kind, beam_size);
    opts.max_steps = max_steps;
    opts.timeout = timeout.map(Duration::from_secs_f64);
    opts.enum_budget = Duration::from_secs_f64(enum_budget);
    let results: Vec<ResultRecord> = tasks
        .par_iter()
        .map(|t| run_record(t, &opts))
        .collect::<Result<_, _>>()?;
    let solved = results.iter().filter(|r| r.solved).count();
    info!("solved {solved}/{}", results.len());
    write_jsonl(&out, &results)?;
    Ok(())
}

fn traces<D: Domain>(tasks: &[TaskRecord]) -> Result<Vec<Trace<D>>> {
    tasks
        .iter()
        .filter(|t| t.domain == D::KIND)
        .map(|t| {
            let task = t.task::<D>()?;
            Ok(decompose(&task.spec, &task.program)?)
        })
        .collect()
}

fn step_accuracies<D: Domain + pbe_core::backends::Enumerate>(
    tasks: &[TaskRecord],
    which: StepBackend,
) -> Result<Vec<StepAccuracy>> {
    let traces = traces::<D>(tasks)?;
    if traces.is_empty() {
        return Ok(Vec::new());
    }
    Ok(match which {
        StepBackend::Oracle => [Role::Subgoal, Role::Synthesizer]
            .into_iter()
            .map(|role| {
                single_step_accuracy(&traces, role, "oracle", |t| OracleBackend::new(t, role))
            })
            .collect(),
        StepBackend::Enum => vec![single_step_accuracy(
            &traces,
            Role::Synthesizer,
            "enum",
            |_| EnumBackend::<D>::default(),
        )],
    })
}

fn eval(
    results: PathBuf,
    dataset: PathBuf,
    format: Format,
    single_step: Option<StepBackend>,
    out: Option<PathBuf>,
) -> Result<()> {
    let results: Vec<ResultRecord> = read_jsonl(&results)?;
    let tasks: Vec<TaskRecord> = read_jsonl(&dataset)?;
    let mut report = evaluate(&results, &tasks)?;
    if let Some(which) = single_step {
        report
            .step_accuracy
            .extend(step_accuracies::<Rf>(&tasks, which)?);
        report
            .step_accuracy
            .extend(step_accuracies::<Dc>(&tasks, which)?);
    }
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Table => report.to_table(),
    };
    match out {
        Some(path) => std::fs::write(&path, text).with_context(|| path.display().to_string())?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Exit codes: 0 all examples ran, 1 some execution failed, 2 bad syntax.
fn exec(program: &str, inputs: &[String], domain: Option<DomainKind>) -> ExitCode {
    let domain = domain.unwrap_or(if program.contains("INPUT") {
        DomainKind::DeepCoder
    } else {
        DomainKind::RobustFill
    });
    match domain {
        DomainKind::RobustFill => exec_in::<Rf>(program, inputs, |s| vec![s.to_owned()]),
        DomainKind::DeepCoder => exec_in::<Dc>(program, inputs, |s| {
            s.split(';').map(|p| p.trim().to_owned()).collect()
        }),
    }
}

fn exec_in<D: Domain>(
    program: &str,
    inputs: &[String],
    split: impl Fn(&str) -> Vec<String>,
) -> ExitCode {
    let program = match D::parse_program(program) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut ok = true;
    for raw in inputs {
        let input = match D::parse_input(&split(raw)) {
            Ok(i) => i,
            Err(e) => {
                eprintln!("error: input {raw:?}: {e}");
                return ExitCode::from(2);
            }
        };
        match D::execute(&program, &input) {
            Ok(v) => println!("{}", D::render_value(&v)),
            Err(e) => {
                ok = false;
                println!("error: {e}");
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn protocol_echo(listen: Option<String>, config: EchoConfig) -> Result<()> {
    match listen {
        None => {
            let stdin = io::stdin().lock();
            let n = serve(stdin, io::stdout().lock(), &config)?;
            info!("served {n} requests");
        }
        Some(addr) => {
            let listener = TcpListener::bind(&addr).with_context(|| format!("binding {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            for stream in listener.incoming() {
                let stream = stream?;
                let config = config.clone();
                std::thread::spawn(move || {
                    let reader = BufReader::new(stream.try_clone().expect("clone socket"));
                    if let Err(e) = serve(reader, stream, &config) {
                        warn!("connection ended: {e}");
                    }
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenDataset {
            domain,
            split,
            side,
            count,
            seed,
            out,
        } => gen_dataset(domain, split, side, count, seed, out),
        Command::RunSearch {
            dataset,
            mode,
            backend,
            endpoint,
            beam_size,
            max_steps,
            timeout,
            enum_budget,
            out,
        } => run_search(
            dataset,
            mode,
            backend,
            endpoint,
            beam_size,
            max_steps,
            timeout,
            enum_budget,
            out,
        ),
        Command::Eval {
            results,
            dataset,
            format,
            single_step,
            out,
        } => eval(results, dataset, format, single_step, out),
        Command::Exec {
            program,
            inputs,
            domain,
        } => return exec(&program, &inputs, domain),
        Command::ProtocolEcho {
            listen,
            reply,
            malformed,
        } => protocol_echo(
            listen,
            EchoConfig {
                replies: reply,
                malformed,
            },
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
