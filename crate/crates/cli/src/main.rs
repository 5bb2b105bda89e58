use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nullpass::error::{AppError, EXIT_BOUNDS, EXIT_INFEASIBLE, EXIT_OK};
use nullpass::instances::{benchmark_superposition, random_instance, InstanceSpec};
use nullpass::run::{design_summary, run, summary_json, verify_summary, write_outputs};
use nullpass::scenario::{load_scenario, Scenario, BUILTINS};
use nullpass::sweep::{parse_values, sweep, Axis};

#[derive(Parser)]
#[command(name = "nullpass", version, about = "Adiabatic transfer through a multi-node null state")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Show the pulse design (pumps, pruned pumps, feasibility) of a scenario.
    Design {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Propagate one scenario and write its trajectory and summary.
    Run {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run built-in benchmark scenarios and check their declared bounds.
    Reproduce {
        /// fig2, fig3, fig4, fig5 or all.
        #[arg(default_value = "all")]
        which: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario over a list of values of one parameter.
    Sweep {
        scenario: String,
        /// width, amplitude-scale, phase-perturbation or eta.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; `pi` multiples such as `0.5pi` are accepted.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Pump (one-based) for the phase-perturbation axis.
        #[arg(long)]
        pump: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the design condition of a scenario's fields without propagating.
    Verify {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print a self-contained scenario file (random instance or resolved scenario).
    Generate {
        /// Scenario to expand; a random instance is drawn when omitted.
        scenario: Option<String>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Haar-random target superposition.
        #[arg(long)]
        superposition: bool,
        /// Peak Stokes field of every drive.
        #[arg(long)]
        stokes_field: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Integration window `start,end` in units of the pulse width.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Output sampling interval in units of the pulse width.
    #[arg(long)]
    stride: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for random scenarios (`random:NxM`, `random-sup:NxM`, `fig2-sup`).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn apply(&self, s: &mut Scenario) -> Result<(), AppError> {
        let p = &mut s.propagation;
        if let Some(w) = &self.window {
            let parts: Vec<&str> = w.split(',').map(str::trim).collect();
            let parsed: Vec<f64> = parts.iter().filter_map(|x| x.parse().ok()).collect();
            if parts.len() != 2 || parsed.len() != 2 {
                return Err(AppError::scenario(format!("--window expects `start,end`, got `{w}`")));
            }
            p.t_start = parsed[0];
            p.t_end = parsed[1];
        }
        if let Some(v) = self.rel_tol {
            p.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            p.abs_tol = v;
        }
        if let Some(v) = self.stride {
            p.output_stride = v;
        }
        p.validate()?;
        Ok(())
    }

    /// Loads a scenario by name or path and applies the command-line overrides.
    fn load(&self, name: &str) -> Result<Scenario, AppError> {
        let mut s = match name.split_once(':') {
            Some(("random", shape)) => random_instance(&parse_shape(shape, false)?, self.seed)?,
            Some(("random-sup", shape)) => random_instance(&parse_shape(shape, true)?, self.seed)?,
            _ if name == "fig2-sup" => benchmark_superposition(self.seed, 16.0),
            _ => load_scenario(name)?,
        };
        self.apply(&mut s)?;
        Ok(s)
    }
}

fn parse_shape(shape: &str, superposition: bool) -> Result<InstanceSpec, AppError> {
    let bad = || AppError::scenario(format!("random shape must look like `3x2`, got `{shape}`"));
    let (n, m) = shape.split_once('x').ok_or_else(bad)?;
    let n = n.parse().map_err(|_| bad())?;
    let m = m.parse().map_err(|_| bad())?;
    Ok(InstanceSpec {
        superposition,
        ..InstanceSpec::new(n, m)
    })
}

/// Writes to stdout, treating a closed pipe (`nullpass ... | head`) as success.
fn emit(text: &str) -> Result<(), AppError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), AppError> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn execute(command: Command) -> Result<i32, AppError> {
    match command {
        Command::Design { scenario, common } => {
            let s = common.load(&scenario)?;
            let built = s.build()?;
            print_json(&design_summary(&s, &built))?;
            Ok(if built.report.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Run { scenario, common } => {
            let s = common.load(&scenario)?;
            let outcome = run(&s)?;
            write_outputs(&common.out, &outcome)?;
            emit(&summary_json(&outcome.record))?;
            for w in &outcome.record.warnings {
                eprintln!("warning: {w}");
            }
            Ok(outcome.exit_code())
        }
        Command::Reproduce { which, common } => {
            let names: Vec<&str> = if which == "all" {
                BUILTINS.iter().map(|(name, _)| *name).collect()
            } else {
                vec![which.as_str()]
            };
            let mut code = EXIT_OK;
            for name in names {
                if !BUILTINS.iter().any(|(b, _)| *b == name) {
                    return Err(AppError::scenario(format!("unknown benchmark `{name}` (fig2, fig3, fig4, fig5, all)")));
                }
                let s = common.load(name)?;
                let outcome = run(&s)?;
                write_outputs(&common.out, &outcome)?;
                let r = &outcome.record;
                let passed = r.bounds.as_ref().is_none_or(|b| b.passed);
                let mut line = format!(
                    "{} {name}: max P_x {:.3e}, max P_y {:.3e}, final P_f {:.6}, {:.2} s\n",
                    if passed { "PASS" } else { "FAIL" },
                    r.summary.max_p_x,
                    r.summary.max_p_y,
                    r.summary.final_p_f,
                    outcome.timing.elapsed_s
                );
                for v in r.bounds.iter().flat_map(|b| &b.violations) {
                    line.push_str(&format!("    {v}\n"));
                }
                emit(&line)?;
                code = code.max(outcome.exit_code());
            }
            Ok(code)
        }
        Command::Sweep {
            scenario,
            axis,
            values,
            pump,
            common,
        } => {
            let s = common.load(&scenario)?;
            let axis = Axis::parse(&axis, pump)?;
            let values = parse_values(&values)?;
            if values.is_empty() {
                return Err(AppError::scenario("--values is empty"));
            }
            let report = sweep(&s, axis, &values, Some(&common.out))?;
            emit(&report.table_csv())?;
            for e in &report.entries {
                if let Some(msg) = &e.error {
                    eprintln!("value {}: {msg}", e.value);
                }
            }
            Ok(report.exit_code())
        }
        Command::Verify { scenario, common } => {
            let s = common.load(&scenario)?;
            let built = s.build()?;
            print_json(&verify_summary(&built))?;
            Ok(if built.verify.satisfied { EXIT_OK } else { EXIT_BOUNDS })
        }
        Command::Generate {
            scenario,
            n,
            m,
            superposition,
            stokes_field,
            common,
        } => {
            let s = match scenario {
                Some(name) => common.load(&name)?,
                None => {
                    let mut spec = InstanceSpec {
                        superposition,
                        ..InstanceSpec::new(n, m)
                    };
                    if let Some(f) = stokes_field {
                        spec.stokes_field = f;
                    }
                    let mut s = random_instance(&spec, common.seed)?;
                    common.apply(&mut s)?;
                    s
                }
            };
            print_json(&s.to_file())?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
