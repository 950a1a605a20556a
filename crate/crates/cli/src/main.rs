use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robin_cli::config::{builtin, ExperimentConfig, BUILTINS};
use robin_cli::{run_experiment, Failure};
use robin_core::inequalities::{Family, ObstacleLevel, Resolution, ShapeCheck, SweepConfig};
use robin_core::io::fmt_real;
use robin_core::radial::{ball_energy, solve_ball_with, RadialParams, ShootingOptions};

#[derive(Parser)]
#[command(name = "robinlab", version, about = "Robin energies, eigenvalues and shape inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (a file path or a built-in name).
    Run {
        config: String,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the radial ball problem and print its energy breakdown.
    Ball {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long = "radius", visible_alias = "R", default_value_t = 1.0)]
        radius: f64,
        /// RK4 steps on [0, R].
        #[arg(long, default_value_t = 4096)]
        steps: usize,
        /// Write the sampled profile (r, psi, dpsi, H) to this CSV file.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Run one check over a one-parameter shape family.
    Check {
        /// intermediate, quantitative, ec_ball or trace_poincare
        name: String,
        /// disk, ellipse, perturbed or stadium
        #[arg(long)]
        family: String,
        /// Family parameter grid: radii, aspect ratios, amplitudes or lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        /// Modes for the perturbed family.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        modes: Vec<u32>,
        /// End-cap radius for the stadium family.
        #[arg(long, default_value_t = 0.5)]
        cap: f64,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        beta: Vec<f64>,
        /// Obstacle levels for ec_ball, as multiples of inf u.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        c_rel: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        n_r: usize,
        #[arg(long, default_value_t = 128)]
        n_theta: usize,
        /// Also write the rows to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in experiment configs.
    ListConfigs,
}

fn load_config(source: &str) -> Result<ExperimentConfig, Failure> {
    let text = match builtin(source) {
        Some(b) => b.text.to_string(),
        None => fs::read_to_string(source)
            .map_err(|e| Failure::Config(format!("cannot read config `{source}`: {e} (built-ins: see list-configs)")))?,
    };
    ExperimentConfig::parse(&text)
}

fn run(config: &str, out: Option<PathBuf>) -> Result<u8, Failure> {
    let cfg = load_config(config)?;
    let out = out.unwrap_or_else(|| cfg.output.clone());
    let outcome = run_experiment(&cfg, &out)?;
    print!("{}", outcome.summary);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.exit_code())
}

#[allow(clippy::too_many_arguments)]
fn ball(
    n: usize,
    q: f64,
    beta: f64,
    c: f64,
    eps: f64,
    radius: f64,
    steps: usize,
    profile: Option<PathBuf>,
) -> Result<u8, Failure> {
    let params = RadialParams::new(n, q, beta, c, eps)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Failure::Config(format!("field `R`: {radius} must be positive")));
    }
    if steps < 8 || !steps.is_multiple_of(2) {
        return Err(Failure::Config(format!("field `steps`: {steps} must be even and >= 8")));
    }
    let prof = solve_ball_with(params, radius, &ShootingOptions::with_steps(steps))?;
    let e = ball_energy(&prof);
    println!("mode        {:?}", prof.mode());
    println!("psi(0)      {}", fmt_real(prof.center_value()));
    println!("psi(R)      {}", fmt_real(prof.boundary_value()));
    println!("bc residual {}", fmt_real(prof.bc_residual()));
    println!("E           {}", fmt_real(e.energy));
    println!("dirichlet   {}", fmt_real(e.dirichlet));
    println!("boundary    {}", fmt_real(e.boundary));
    println!("bulk        {}", fmt_real(e.bulk));
    match (e.lambda_q, prof.eigenvalue()) {
        (Some(l), _) | (None, Some(l)) => println!("lambda_q    {}", fmt_real(l)),
        (None, None) => println!("lambda_q    n/a"),
    }
    if let Some(path) = profile {
        prof.write_csv(fs::File::create(&path)?)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn check(
    name: &str,
    family: &str,
    grid: Vec<f64>,
    modes: Vec<u32>,
    cap: f64,
    q: Vec<f64>,
    beta: Vec<f64>,
    c_rel: Vec<f64>,
    n_r: usize,
    n_theta: usize,
    out: Option<PathBuf>,
) -> Result<u8, Failure> {
    let check = ShapeCheck::parse(name).ok_or_else(|| Failure::Config(format!("unknown check `{name}`")))?;
    let family = match family {
        "disk" => Family::Disk { radii: grid },
        "ellipse" => Family::Ellipse { aspects: grid },
        "perturbed" => Family::Perturbed { amplitudes: grid, modes },
        "stadium" => Family::Stadium { lengths: grid, radius: cap },
        other => return Err(Failure::Config(format!("field `family`: unknown family `{other}`"))),
    };
    let mut cfg = SweepConfig::new(family, vec![check], q, beta);
    cfg.c = c_rel.into_iter().map(ObstacleLevel::RelativeToInf).collect();
    cfg.resolution = Resolution::new(n_r, n_theta);
    let result = robin_core::inequalities::sweep(&cfg)?;
    println!(
        "{:<28} {:>6} {:>6} {:>10} {:>19} {:>19} {:>19} {:>19}  pass",
        "shape", "q", "beta", "c", "lhs", "rhs", "deficit", "tolerance"
    );
    for row in &result.rows {
        match &row.report {
            Some(r) => println!(
                "{:<28} {:>6} {:>6} {:>10.4e} {:>19} {:>19} {:>19} {:>19}  {}",
                row.shape.to_string(),
                row.q,
                row.beta,
                row.c,
                fmt_real(r.lhs()),
                fmt_real(r.rhs()),
                fmt_real(r.deficit()),
                fmt_real(r.tolerance()),
                r.pass()
            ),
            None => println!(
                "{:<28} {:>6} {:>6} error: {}",
                row.shape.to_string(),
                row.q,
                row.beta,
                row.error.as_deref().unwrap_or("")
            ),
        }
    }
    if let Some(k) = result.empirical_constant {
        println!("empirical constant {}", fmt_real(k));
    }
    if let Some(path) = out {
        result.write_csv(fs::File::create(&path)?)?;
        println!("wrote {}", path.display());
    }
    Ok(if result.errors > 0 {
        3
    } else if result.failed > 0 {
        robin_cli::EXIT_VIOLATION
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run { config, out } => run(&config, out),
        Command::Ball { n, q, beta, c, eps, radius, steps, profile } => ball(n, q, beta, c, eps, radius, steps, profile),
        Command::Check { name, family, grid, modes, cap, q, beta, c_rel, n_r, n_theta, out } => {
            check(&name, &family, grid, modes, cap, q, beta, c_rel, n_r, n_theta, out)
        }
        Command::ListConfigs => {
            for b in BUILTINS {
                println!("{:<20} {}", b.name, b.summary());
            }
            Ok(0)
        }
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("robinlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
