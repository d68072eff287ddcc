use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use pomt::bench::oracle::{brute_force_omt, LpValue, VarBox};
use pomt::bench::strip::{generate_sp, Encoding};
use pomt::bench::suite::{parse_lia_mode, run_suite, write_csv, write_scatter, Suite};
use pomt::omt::{solve, OmtConfig, OmtOutcome, OmtStatus};
use pomt::reduce::ReductionStrategy;
use pomt::{parse_file, DeltaRational, Problem};

const EXIT_UNSAT: u8 = 10;
const EXIT_TIMEOUT: u8 = 20;
const EXIT_UNBOUNDED: u8 = 30;

#[derive(Parser)]
#[command(name = "pomt", version, about = "Linear-search OMT with partial assignment reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduction {
    None,
    Basic,
    Guided,
}

#[derive(Clone, Copy, ValueEnum)]
enum LiaMode {
    Full,
    Truncated,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Sp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Enc {
    Lra,
    Lira,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the objective of a problem file.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "none")]
        reduction: Reduction,
        #[arg(long, value_enum, default_value = "truncated")]
        lia: LiaMode,
        #[arg(long, value_enum, default_value = "off")]
        block_lemma: Switch,
        /// Seconds.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Per-iteration CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the propositional skeleton in DIMACS form.
        #[arg(long)]
        dimacs: Option<PathBuf>,
    },
    /// Write a generated instance.
    Generate {
        #[arg(value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "lra")]
        encoding: Enc,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a suite and write one CSV row per instance and config.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Where the paired per-metric files go; defaults to the output's directory.
        #[arg(long)]
        scatter_dir: Option<PathBuf>,
    },
    /// Brute-force optimum of a small problem.
    Oracle {
        file: PathBuf,
        /// Integer ranges, e.g. `x=0..10,*=-5..5`.
        #[arg(long = "box", default_value = "")]
        bounds: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { file, reduction, lia, block_lemma, timeout, seed, max_iterations, trace, dimacs } => {
            let problem = parse_file(&file).with_context(|| format!("reading {}", file.display()))?;
            if let Some(path) = dimacs {
                fs::write(&path, problem.cnf.to_dimacs())?;
            }
            let cfg = OmtConfig {
                strategy: match reduction {
                    Reduction::None => ReductionStrategy::None,
                    Reduction::Basic => ReductionStrategy::Basic,
                    Reduction::Guided => ReductionStrategy::Guided,
                },
                lia: parse_lia_mode(match lia {
                    LiaMode::Full => "full",
                    LiaMode::Truncated => "truncated",
                })?,
                learn_block_lemma: matches!(block_lemma, Switch::On),
                time_budget: timeout.unwrap_or(f64::INFINITY),
                max_iterations,
                seed,
                ..OmtConfig::default()
            };
            let out = solve(&problem, &cfg)?;
            if let Some(path) = trace {
                write_trace(&path, &problem, &out)?;
            }
            report(&problem, &out);
            Ok(match out.status {
                OmtStatus::Optimum => 0,
                OmtStatus::Unsat => EXIT_UNSAT,
                OmtStatus::BudgetExhausted => EXIT_TIMEOUT,
                OmtStatus::Unbounded => EXIT_UNBOUNDED,
            })
        }
        Command::Generate { family: Family::Sp, n, seed, encoding, output } => {
            let enc = match encoding {
                Enc::Lra => Encoding::Lra,
                Enc::Lira => Encoding::Lira,
            };
            let (text, _, _) = generate_sp(n, seed, enc)?;
            match output {
                Some(path) => fs::write(&path, text)?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
            Ok(0)
        }
        Command::Bench { suite, output, scatter_dir } => {
            let text = fs::read_to_string(&suite).with_context(|| format!("reading {}", suite.display()))?;
            let spec = Suite::from_toml(&text)?;
            let base = suite.parent().unwrap_or(Path::new("."));
            let records = run_suite(&spec, base)?;
            if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            write_csv(&records, fs::File::create(&output)?)?;
            let dir = scatter_dir.unwrap_or_else(|| output.parent().unwrap_or(Path::new(".")).to_path_buf());
            let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
            fs::create_dir_all(&dir)?;
            let names: Vec<String> = spec.configs.iter().map(|c| c.name.clone()).collect();
            write_scatter(&records, &names, &dir)?;
            println!("{} runs written to {}", records.len(), output.display());
            Ok(0)
        }
        Command::Oracle { file, bounds } => {
            let problem = parse_file(&file).with_context(|| format!("reading {}", file.display()))?;
            let bounds = VarBox::parse(&bounds)?;
            Ok(match brute_force_omt(&problem, &bounds)? {
                LpValue::Infeasible => {
                    println!("unsat");
                    EXIT_UNSAT
                }
                LpValue::Unbounded => {
                    println!("unbounded");
                    EXIT_UNBOUNDED
                }
                LpValue::Min { value, attained } => {
                    let delta = if attained { 0 } else { 1 };
                    let v = DeltaRational::new(value, pomt::Rational::from_integer(delta.into()));
                    println!("optimum {}", problem.user_value(&v));
                    0
                }
            })
        }
    }
}

fn status_word(s: OmtStatus) -> &'static str {
    match s {
        OmtStatus::Optimum => "sat",
        OmtStatus::Unsat => "unsat",
        OmtStatus::Unbounded => "unbounded",
        OmtStatus::BudgetExhausted => "timeout",
    }
}

fn report(problem: &Problem, out: &OmtOutcome) {
    println!("{}", status_word(out.status));
    if let Some(v) = &out.value {
        let word = if out.status == OmtStatus::Optimum { "optimum" } else { "best" };
        println!("{word} {}", problem.user_value(v));
    }
    if let Some(m) = &out.model {
        for (v, x) in m.iter() {
            println!("  {} = {}", problem.var_name(v), x);
        }
    }
    println!("iterations {}", out.trace.num_iterations());
}

fn write_trace(path: &Path, problem: &Problem, out: &OmtOutcome) -> Result<()> {
    let mut w = fs::File::create(path)?;
    writeln!(w, "iteration,elapsed_s,ub,dropped,minimize_calls,reduced_size")?;
    for r in &out.trace.iterations {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.index,
            r.elapsed_s,
            problem.user_value(&r.ub),
            r.dropped.len(),
            r.minimize_calls,
            r.reduced_size
        )?;
    }
    Ok(())
}
