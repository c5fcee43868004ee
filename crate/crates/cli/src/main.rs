use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sweepkit::{
    converge_study, excess, list_builtins, load_scenario, run, verify, Error, RunOptions, RunReport, SamplingParams,
};

const EXIT_PASS: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

/// Catching-up solver and convergence checks for sweeping processes.
#[derive(Parser)]
#[command(name = "sweepkit", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve every level of a scenario and evaluate its checks.
    Solve {
        /// Scenario file or builtin name.
        config: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the number of refinement levels.
        #[arg(long)]
        levels: Option<usize>,
        /// Also write trajectory / convergence plots.
        #[arg(long)]
        svg: bool,
    },
    /// Print the convergence table across levels.
    Converge {
        config: String,
        #[arg(long)]
        levels: Option<usize>,
        /// Write convergence.json here as well.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Excess e(A(S), B(T)) between slices of two scenarios' families.
    Excess {
        config_a: String,
        config_b: String,
        #[arg(long = "t", num_args = 2, value_names = ["S", "T"], required = true, allow_negative_numbers = true)]
        t: Vec<f64>,
    },
    /// Solve one level and certify its constraint and normal-cone steps.
    Verify {
        config: String,
        #[arg(long)]
        level: usize,
    },
    /// List the builtin scenarios.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS });
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

fn verdict_code(passed: bool) -> u8 {
    if passed {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}

fn dispatch(cmd: Cmd) -> sweepkit::Result<u8> {
    match cmd {
        Cmd::Solve {
            config,
            out,
            levels,
            svg,
        } => {
            let scenario = load_scenario(&config)?;
            let opts = RunOptions {
                levels,
                svg,
                ..Default::default()
            };
            let res = run(&scenario, Some(&out), &opts)?;
            print_summary(&res.report);
            println!("wrote {} files to {}", res.written.len(), out.display());
            Ok(verdict_code(res.report.all_passed()))
        }
        Cmd::Converge {
            config,
            levels,
            out,
            json,
        } => {
            let scenario = load_scenario(&config)?;
            let schedule = sweepkit::run::schedule_for(&scenario, levels)?;
            let (rep, _) = converge_study(&scenario.family, &scenario.y0, &schedule)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("convergence.json"), rep.to_json() + "\n")?;
            }
            if json {
                println!("{}", rep.to_json());
            } else {
                println!("{:>5} {:>12} {:>14} {:>14} {:>12} {:>12}", "level", "eps", "sup_diff", "variation", "cauchy", "residual");
                for i in 0..rep.levels.len() {
                    println!(
                        "{:>5} {:>12.4e} {:>14.6e} {:>14.8} {:>12.4} {:>12.2e}",
                        rep.levels[i],
                        rep.eps[i],
                        rep.sup_diffs[i],
                        rep.variations[i],
                        rep.cauchy_ratios[i],
                        rep.constraint_residuals[i]
                    );
                }
                println!(
                    "finest level {}: variation {}, residual {:e}",
                    rep.finest_level, rep.finest_variation, rep.finest_constraint_residual
                );
            }
            let ok = rep.cauchy_no_growth()
                && (rep.sup_diffs_strictly_decreasing() || rep.sup_diffs.iter().all(|d| *d == 0.0));
            println!("cauchy: {}", if ok { "pass" } else { "FAIL" });
            Ok(verdict_code(ok))
        }
        Cmd::Excess { config_a, config_b, t } => {
            let (s, tt) = (t[0], t[1]);
            let a = load_scenario(&config_a)?;
            let b = load_scenario(&config_b)?;
            let sa = a.family.slice(s).map_err(|e| e.context("--t S"))?;
            let sb = b.family.slice(tt).map_err(|e| e.context("--t T"))?;
            if sa.dim() != sb.dim() {
                return Err(Error::DimensionMismatch {
                    expected: sa.dim(),
                    actual: sb.dim(),
                });
            }
            let est = excess(&sa, &sb, &SamplingParams::default())?;
            println!("excess {}", sweepkit::solver::fmt_num(est.lower));
            println!("method {:?}", est.method);
            println!("witness {:?}", est.witness.coords());
            println!("samples {}", est.sample_count);
            Ok(EXIT_PASS)
        }
        Cmd::Verify { config, level } => {
            let scenario = load_scenario(&config)?;
            let rep = verify(&scenario, level, None)?;
            println!(
                "{} level {}: eps {:e}, {} intervals, residual {:e}, {} certified steps",
                rep.scenario, rep.level, rep.eps, rep.intervals, rep.constraint_residual, rep.certified_steps
            );
            for v in &rep.checks {
                println!("  {:<10} {}  margin {:e}  {}", v.check, pass(v.passed), v.margin, v.detail);
            }
            Ok(verdict_code(rep.all_passed()))
        }
        Cmd::List => {
            for (name, desc) in list_builtins() {
                println!("{name:<28} {desc}");
            }
            Ok(EXIT_PASS)
        }
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn print_summary(r: &RunReport) {
    println!("scenario {} (seed {})", r.scenario, r.seed);
    println!("{:>5} {:>12} {:>8} {:>14} {:>12} {:>10}", "level", "eps", "steps", "variation", "residual", "ms");
    for l in &r.levels {
        println!(
            "{:>5} {:>12.4e} {:>8} {:>14.8} {:>12.2e} {:>10.1}",
            l.level, l.eps, l.intervals, l.variation, l.constraint_residual, l.wall_ms
        );
    }
    for n in &r.notes {
        println!("note: {n}");
    }
    for v in &r.checks {
        println!("{:<10} {}  margin {:e}  {}", v.check, pass(v.passed), v.margin, v.detail);
    }
}
