//! Command-line front end for `verikit`: JSON instances in, JSON reports out.
//!
//! Exit codes: 0 when the checked property holds, 1 when it is violated or
//! the instance is infeasible (the report carries a witness), 2 on input errors.

pub mod commands;
pub mod report;
pub mod wire;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{execute, generate, Command, Flags};
use report::Report;
use wire::{parse_instance, parse_rational, InputError, Kind};

#[derive(Debug, Parser)]
#[command(name = "verikit", version, about = "Exact checks for combinatorial lemmas", propagate_version = true)]
pub struct Cli {
    /// Output format; only `json` is supported.
    #[arg(long, global = true, default_value = "json")]
    pub format: String,
    /// Worker threads for multiple inputs; output stays in input order.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: TopCommand,
}

#[derive(Debug, Clone, Args, Default)]
pub struct Inputs {
    /// Instance files; `-` reads standard input (the default).
    #[arg(value_name = "FILE")]
    pub files: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum TopCommand {
    Kkos {
        #[arg(value_enum)]
        op: KkosOp,
        #[command(flatten)]
        inputs: Inputs,
    },
    Wilber {
        #[arg(value_enum)]
        op: WilberOp,
        #[command(flatten)]
        inputs: Inputs,
    },
    Heap {
        #[arg(value_enum)]
        op: HeapOpArg,
        #[command(flatten)]
        inputs: Inputs,
        /// Level width parameter, a rational in (0, 1].
        #[arg(long)]
        epsilon: Option<String>,
    },
    Partition {
        #[arg(value_enum)]
        op: PartitionOp,
        #[command(flatten)]
        inputs: Inputs,
        /// `chi`: exit 0 only if the chromatic number exceeds N.
        #[arg(long, value_name = "N")]
        assert_greater: Option<usize>,
    },
    Tiling {
        #[arg(value_enum)]
        op: TilingOp,
        #[command(flatten)]
        inputs: Inputs,
    },
    Cce {
        #[arg(value_enum)]
        op: CceOp,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Print a seeded random instance.
    Gen {
        #[arg(value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        size: usize,
    },
    /// Validate instances and print them in canonical form.
    Parse {
        #[command(flatten)]
        inputs: Inputs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KkosOp {
    Solve,
    Reduce,
    Certify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WilberOp {
    Bound,
    MergeCheck,
    Decompose,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HeapOpArg {
    Analyze,
    Check,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PartitionOp {
    Color,
    Counterexample,
    Chi,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TilingOp {
    Verify,
    Construct,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CceOp {
    Build,
    Check,
    Search,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Kkos,
    Wilber,
    Heap,
    Partition,
    Tiling,
    Cce,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Kkos => Kind::Kkos,
            KindArg::Wilber => Kind::Wilber,
            KindArg::Heap => Kind::Heap,
            KindArg::Partition => Kind::Partition,
            KindArg::Tiling => Kind::Tiling,
            KindArg::Cce => Kind::Cce,
        }
    }
}

fn parse_flag_rational(name: &str, text: &Option<String>) -> Result<Option<wire::Rat>, InputError> {
    text.as_ref()
        .map(|s| parse_rational(s).map(wire::Rat).map_err(|e| InputError::at(format!("--{name}"), e)))
        .transpose()
}

fn resolve(top: &TopCommand) -> Result<(Command, Inputs, Flags), InputError> {
    let mut flags = Flags::default();
    let (cmd, inputs) = match top {
        TopCommand::Kkos { op, inputs } => (
            match op {
                KkosOp::Solve => Command::KkosSolve,
                KkosOp::Reduce => Command::KkosReduce,
                KkosOp::Certify => Command::KkosCertify,
            },
            inputs,
        ),
        TopCommand::Wilber { op, inputs } => (
            match op {
                WilberOp::Bound => Command::WilberBound,
                WilberOp::MergeCheck => Command::WilberMergeCheck,
                WilberOp::Decompose => Command::WilberDecompose,
            },
            inputs,
        ),
        TopCommand::Heap { op, inputs, epsilon } => {
            flags.epsilon = parse_flag_rational("epsilon", epsilon)?.map(|r| r.0);
            (
                match op {
                    HeapOpArg::Analyze => Command::HeapAnalyze,
                    HeapOpArg::Check => Command::HeapCheck,
                },
                inputs,
            )
        }
        TopCommand::Partition { op, inputs, assert_greater } => {
            flags.assert_greater = *assert_greater;
            (
                match op {
                    PartitionOp::Color => Command::PartitionColor,
                    PartitionOp::Counterexample => Command::PartitionCounterexample,
                    PartitionOp::Chi => Command::PartitionChi,
                },
                inputs,
            )
        }
        TopCommand::Tiling { op, inputs } => (
            match op {
                TilingOp::Verify => Command::TilingVerify,
                TilingOp::Construct => Command::TilingConstruct,
            },
            inputs,
        ),
        TopCommand::Cce { op, inputs, epsilon, kmax } => {
            flags.epsilon = parse_flag_rational("epsilon", epsilon)?.map(|r| r.0);
            flags.kmax = *kmax;
            (
                match op {
                    CceOp::Build => Command::CceBuild,
                    CceOp::Check => Command::CceCheck,
                    CceOp::Search => Command::CceSearch,
                },
                inputs,
            )
        }
        TopCommand::Gen { .. } | TopCommand::Parse { .. } => unreachable!("handled by caller"),
    };
    Ok((cmd, inputs.clone(), flags))
}

fn read_source(path: &str, stdin: &mut dyn Read) -> Result<String, InputError> {
    if path == "-" {
        let mut s = String::new();
        stdin
            .read_to_string(&mut s)
            .map_err(|e| InputError::at("<stdin>", e.to_string()))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| InputError::at(path, e.to_string()))
    }
}

fn run_one(cmd: Command, flags: &Flags, source: &Result<String, InputError>) -> Report {
    let start = Instant::now();
    let mut report = match source.clone().and_then(|text| parse_instance(&text)) {
        Ok(file) => execute(cmd, &file, flags),
        Err(e) => Report::input_error(cmd.name(), &e),
    };
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
    report
}

/// Runs `f` over `items` on up to `jobs` threads; results keep input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("slot lock")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("slot lock").into_iter().map(|r| r.expect("every slot filled")).collect()
}

fn emit_error(out: &mut dyn Write, command: &str, err: &InputError) -> i32 {
    let r = Report::input_error(command, err);
    let _ = writeln!(out, "{}", r.to_line());
    r.exit_code()
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            return emit_error(out, "verikit", &InputError::new(e.to_string().trim().to_string()));
        }
    };
    if cli.format != "json" {
        return emit_error(out, "verikit", &InputError::at("--format", format!("unsupported format {:?}", cli.format)));
    }
    match &cli.command {
        TopCommand::Gen { kind, seed, size } => match generate((*kind).into(), *seed, *size) {
            Ok(file) => {
                let _ = write!(out, "{}", file.to_canonical_string());
                0
            }
            Err(e) => emit_error(out, "gen", &e),
        },
        TopCommand::Parse { inputs } => {
            let files = if inputs.files.is_empty() { vec!["-".to_string()] } else { inputs.files.clone() };
            let mut code = 0;
            for path in &files {
                match read_source(path, stdin).and_then(|t| parse_instance(&t)) {
                    Ok(file) => {
                        let _ = write!(out, "{}", file.to_canonical_string());
                    }
                    Err(e) => code = code.max(emit_error(out, "parse", &e)),
                }
            }
            code
        }
        top => {
            let (cmd, inputs, flags) = match resolve(top) {
                Ok(r) => r,
                Err(e) => return emit_error(out, "verikit", &e),
            };
            let files = if inputs.files.is_empty() { vec!["-".to_string()] } else { inputs.files };
            // inputs are read up front so workers never share stdin
            let sources: Vec<_> = files.iter().map(|p| read_source(p, stdin)).collect();
            let reports = parallel_map(&sources, cli.jobs, |src| run_one(cmd, &flags, src));
            let mut code = 0;
            for r in &reports {
                let _ = writeln!(out, "{}", r.to_line());
                code = code.max(r.exit_code());
            }
            code
        }
    }
}
