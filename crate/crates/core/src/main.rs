use clap::{Args, Parser, Subcommand};
use relkin::cli::{self, sig6};
use relkin::config::{OutputFormat, RunConfig};
use relkin::halfspace::with_workers;
use relkin::macro5::sound_speed;
use relkin::verify::{run_suite, Suite};
use relkin::Error;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit codes; clap itself exits with 2 on usage errors.
const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(name = "relkin", version, about = "Relativistic kinetic theory toolkit")]
struct Cli {
    /// Emit one JSON object instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Output file (the profile CSV for `solve`, the record otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, env = "RELKIN_WORKERS", default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Thermal {
    /// Far-field temperature.
    #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
    temperature: f64,
    /// Speed of light.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Far-field sound speed and the thermal coefficients a1, a2, a3.
    Soundspeed(Thermal),
    /// Mach number, n⁺ and the eigenvalues of B.
    Classify {
        #[command(flatten)]
        thermal: Thermal,
        /// Far-field bulk velocity along x.
        #[arg(long, allow_negative_numbers = true, conflicts_with = "mach", required_unless_present = "mach")]
        u1: Option<f64>,
        /// Mach number, converted to u1 with the sound speed.
        #[arg(long, allow_negative_numbers = true)]
        mach: Option<f64>,
    },
    /// The thirteen equilibrium moments in closed form.
    Moments {
        #[command(flatten)]
        thermal: Thermal,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        u1: f64,
        /// Compare each row with independent quadrature.
        #[arg(long)]
        verify: bool,
    },
    /// Damped half-space solve from a TOML configuration.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the self-check suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_bessel: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::DegenerateMach { .. } => EXIT_DEGENERATE,
                Error::Config { .. } | Error::Domain(_) | Error::Toml(_) => EXIT_INVALID,
                _ => EXIT_FAILED,
            })
        }
    }
}

fn emit<T: Serialize>(cli: &Cli, value: &T, table: impl FnOnce() -> String) -> relkin::Result<()> {
    let text = if cli.json { serde_json::to_string_pretty(value)? } else { table() };
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> relkin::Result<ExitCode> {
    match &cli.command {
        Command::Soundspeed(t) => {
            let r = cli::soundspeed_record(t.temperature, t.c)?;
            emit(cli, &r, || {
                [("c_inf", r.c_inf), ("c_hat_inf", r.c_hat_inf), ("z", r.z), ("a1", r.a1), ("a2", r.a2), ("a3", r.a3)]
                    .iter()
                    .map(|(k, v)| format!("{k:<10} {}", sig6(*v)))
                    .collect::<Vec<_>>()
                    .join("\n")
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { thermal, u1, mach } => {
            let u1 = match (u1, mach) {
                (Some(u), _) => *u,
                (None, Some(m)) => m * sound_speed(thermal.temperature, thermal.c)?.c_inf,
                (None, None) => unreachable!("clap requires one of --u1 and --mach"),
            };
            let r = cli::classify_record(u1, thermal.temperature, thermal.c)?;
            emit(cli, &r, || {
                let lambda: Vec<String> = r.lambda.iter().map(|v| sig6(*v)).collect();
                format!(
                    "mach        {}\nn_plus      {}\nlambda      {}\neigen_check {}",
                    sig6(r.mach),
                    r.n_plus,
                    lambda.join(" "),
                    sig6(r.eigen_check)
                )
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Moments { thermal, u1, verify } => {
            let t = cli::moment_table(*u1, thermal.temperature, thermal.c, *verify)?;
            emit(cli, &t, || {
                let mut s = format!("{:<14} {:>14} {:>14} {:>12}", "kind", "closed_form", "quadrature", "rel_err");
                for r in &t.rows {
                    let opt = |v: Option<f64>| v.map_or("-".to_string(), sig6);
                    s += &format!("\n{:<14} {:>14} {:>14} {:>12}", r.kind, sig6(r.closed_form), opt(r.quadrature), opt(r.rel_err));
                }
                s
            })?;
            Ok(if t.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAILED) })
        }
        Command::Solve { config } => {
            let mut cfg = match config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            if let Some(out) = &cli.out {
                cfg.output.csv = Some(out.clone());
            }
            let outcome = cli::run_solve(&cfg, cli.workers)?;
            let csv = cfg.output.csv.clone().unwrap_or_else(|| PathBuf::from("profile.csv"));
            if !outcome.summary.failed {
                cli::write_profile_csv(std::io::BufWriter::new(std::fs::File::create(&csv)?), &outcome.profile)?;
            }
            if let Some(path) = &cfg.output.effective_config {
                std::fs::write(path, outcome.effective.to_toml_string()?)?;
            }
            let text = if cli.json || cfg.output.format == OutputFormat::Json {
                serde_json::to_string_pretty(&outcome.summary)?
            } else {
                summary_table(&outcome.summary)
            };
            if let Some(path) = &cfg.output.summary {
                std::fs::write(path, serde_json::to_string_pretty(&outcome.summary)? + "\n")?;
            }
            println!("{text}");
            Ok(if outcome.summary.failed { ExitCode::from(EXIT_FAILED) } else { ExitCode::SUCCESS })
        }
        Command::Verify { suite, perturb_bessel } => {
            relkin::special::set_perturbation(*perturb_bessel);
            let checks = with_workers(cli.workers, || run_suite(*suite))?;
            let passed = checks.iter().all(|c| c.passed);
            #[derive(Serialize)]
            struct Report<'a> {
                schema_version: u32,
                suite: Suite,
                passed: bool,
                checks: &'a [relkin::verify::CheckRecord],
            }
            let report = Report { schema_version: cli::SCHEMA_VERSION, suite: *suite, passed, checks: &checks };
            emit(cli, &report, || {
                checks
                    .iter()
                    .map(|c| {
                        let verdict = if c.passed { "PASS" } else { "FAIL" };
                        let extra = c.detail.as_deref().map(|d| format!("  ({d})")).unwrap_or_default();
                        format!("{verdict} {:<10} {:<40} {:>12} <= {}{extra}", c.suite, c.name, sig6(c.value), sig6(c.threshold))
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            })?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAILED) })
        }
    }
}

fn summary_table(s: &cli::SolveSummary) -> String {
    let mut out = vec![
        format!("status            {}", if s.failed { "failed" } else { "converged" }),
        format!("mach              {}", sig6(s.mach)),
        format!("n_plus            {}", s.n_plus),
        format!("tau               {}", sig6(s.tau)),
        format!("gamma             {}", sig6(s.gamma)),
        format!("iterations        {}", s.iterations),
        format!("inner_iterations  {}", s.inner_iterations),
        format!("residual          {}", sig6(s.residual)),
        format!("tau_fit           {}", sig6(s.tau_fit)),
        format!("gamma_fit         {}", s.gamma_fit.map_or("-".into(), sig6)),
        format!("solvability       {}", s.solvability.iter().map(|v| sig6(*v)).collect::<Vec<_>>().join(" ")),
    ];
    if let Some(e) = &s.error {
        out.push(format!("error             {e}"));
    }
    out.join("\n")
}
