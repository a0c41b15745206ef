use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use upds_cli::check::{check_stack_overflow, check_upper_read, CheckOptions};
use upds_cli::dot::{config_automaton_dot, grammar_dot, trace_automaton_dot};
use upds_cli::model::{parse_model, ModelFile};
use upds_core::csgrammar::{build_post_grammar, is_reachable, single_origin};
use upds_core::kphase::bounded_phase_pre_star;
use upds_core::oracle::oracle_post;
use upds_core::upperapprox::{overapprox_post, trace_overapprox};

#[derive(Parser)]
#[command(name = "upds", version, about = "Reachability analysis for pushdown systems with an upper stack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Bounds {
    /// Phase bound for the under-approximation
    #[arg(short, default_value_t = 3)]
    k: usize,
    /// Maximal length of a witness trace
    #[arg(long, default_value_t = 24)]
    depth: usize,
    /// Maximal configuration size during witness search
    #[arg(long, default_value_t = 16)]
    size_cap: usize,
}

impl Bounds {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            k: self.k,
            depth: self.depth,
            size_cap: self.size_cap,
            ..CheckOptions::default()
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DotKind {
    Set,
    Trace,
    Grammar,
    PreUnder,
    PostOver,
}

#[derive(Subcommand)]
enum Command {
    /// Exact forward reachability of one configuration
    Member {
        model: PathBuf,
        #[arg(long)]
        init: String,
        #[arg(long)]
        config: String,
    },
    /// Bounded-phase under-approximation of pre*
    PreUnder {
        model: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(short, default_value_t = 3)]
        k: usize,
        /// Membership query; without it the automaton size is printed
        #[arg(long)]
        config: Option<String>,
    },
    /// Regular over-approximation of post*
    PostOver {
        model: PathBuf,
        #[arg(long)]
        init: String,
        #[arg(long)]
        config: Option<String>,
    },
    /// Can the sentinel below `m` fillers be overwritten?
    CheckOverflow {
        model: PathBuf,
        #[arg(short, default_value_t = 1)]
        m: usize,
        /// Lower-stack expression of the initial set
        #[arg(long)]
        lower: String,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Can `symbol` sit just above the stack pointer?
    CheckRead {
        model: PathBuf,
        #[arg(long)]
        init: String,
        #[arg(long)]
        symbol: String,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Graphviz text for a set, trace abstraction, grammar or approximation
    ExportDot {
        model: PathBuf,
        #[arg(long, value_enum)]
        kind: DotKind,
        /// Set name
        #[arg(long)]
        name: String,
        #[arg(short, default_value_t = 1)]
        k: usize,
    },
    /// Bounded explicit-state exploration
    Oracle {
        model: PathBuf,
        #[arg(long)]
        init: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        size_cap: usize,
        /// Initial configurations are enumerated up to this size
        #[arg(long, default_value_t = 6)]
        init_size: usize,
        #[arg(long)]
        config: Option<String>,
    },
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn load(path: &PathBuf) -> AnyResult<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn yes_no(b: bool) -> u8 {
    println!("{b}");
    if b {
        0
    } else {
        1
    }
}

fn run(cli: Cli) -> AnyResult<u8> {
    match cli.command {
        Command::Member {
            model,
            init,
            config,
        } => {
            let m = load(&model)?;
            let c = m.parse_config(&config)?;
            Ok(yes_no(is_reachable(&m.spec, &m.config_set(&init)?, &c)?))
        }
        Command::PreUnder {
            model,
            target,
            k,
            config,
        } => {
            let m = load(&model)?;
            let under = bounded_phase_pre_star(&m.spec, &m.config_set(&target)?, k)?;
            match config {
                Some(c) => Ok(yes_no(under.accepts(&m.parse_config(&c)?))),
                None => {
                    println!("{} states", under.size());
                    Ok(0)
                }
            }
        }
        Command::PostOver {
            model,
            init,
            config,
        } => {
            let m = load(&model)?;
            let over = overapprox_post(&m.spec, &m.config_set(&init)?)?;
            match config {
                Some(c) => Ok(yes_no(over.accepts(&m.parse_config(&c)?))),
                None => {
                    println!("{} states", over.size());
                    Ok(0)
                }
            }
        }
        Command::CheckOverflow {
            model,
            m,
            lower,
            bounds,
        } => {
            let model = load(&model)?;
            let report = check_stack_overflow(&model, m, &lower, &bounds.options())?;
            println!("{report}");
            Ok(report.verdict.exit_code() as u8)
        }
        Command::CheckRead {
            model,
            init,
            symbol,
            bounds,
        } => {
            let model = load(&model)?;
            let report = check_upper_read(&model, &init, &symbol, &bounds.options())?;
            println!("{report}");
            Ok(report.verdict.exit_code() as u8)
        }
        Command::ExportDot { model, kind, name, k } => {
            let m = load(&model)?;
            let set = m.config_set(&name)?;
            let text = match kind {
                DotKind::Set => config_automaton_dot(&name, &m.spec, &set),
                DotKind::Trace => trace_automaton_dot(&name, &m.spec, &trace_overapprox(&m.spec, &set)),
                DotKind::Grammar => grammar_dot(&name, &build_post_grammar(&single_origin(&m.spec, &set)?)),
                DotKind::PreUnder => {
                    config_automaton_dot(&name, &m.spec, &bounded_phase_pre_star(&m.spec, &set, k)?)
                }
                DotKind::PostOver => config_automaton_dot(&name, &m.spec, &overapprox_post(&m.spec, &set)?),
            };
            print!("{text}");
            Ok(0)
        }
        Command::Oracle {
            model,
            init,
            depth,
            size_cap,
            init_size,
            config,
        } => {
            let m = load(&model)?;
            let starts = m.config_set(&init)?.configs_up_to(init_size);
            let reached = oracle_post(&m.spec, &starts, depth, size_cap)?;
            match config {
                Some(c) => Ok(yes_no(reached.contains(&m.parse_config(&c)?))),
                None => {
                    for c in &reached {
                        println!("{}", m.spec.config_display(c));
                    }
                    Ok(0)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
