//! Command-line front end: scene runs, validation, nearest-point queries and
//! the counterexample experiments.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
//! aborts (including validation threshold failures). A tracking abort keeps
//! the partial CSV.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flyby::scenes::{
    fmt_f64, read_track_csv, run_oracle, run_track, run_validate, write_track_csv, OracleConfig,
    SceneConfig, SceneError,
};
use flyby::shapiro::{
    build_shapiro, difference_quotient, difference_quotient_sweep, flyby_experiment,
};

#[derive(Parser)]
#[command(
    name = "flyby",
    about = "Track the distance from a moving observer to a convex body by integrating an ODE, \
             with a brute-force projection oracle and a C^{1,1} counterexample construction",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scene; writes track.csv and meta.json into --out.
    Track(TrackArgs),
    /// Re-check a completed track.csv against the oracle and the
    /// reconstruction identity; writes validate.json.
    Validate(TrackArgs),
    /// Nearest-point queries with regularity checks; writes oracle.json and
    /// oracle.csv.
    Oracle(OracleArgs),
    /// Build the counterexample set, run the flyby and the difference
    /// quotient sweep; writes events.csv, samples.csv and shapiro.json.
    Shapiro(ShapiroArgs),
}

#[derive(Args)]
struct TrackArgs {
    /// Scene configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override tolerances: integrator abs/rel tolerances for track,
    /// distance/residual thresholds for validate.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Oracle configuration (JSON): body plus query points.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for randomized probe directions and certificates.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ShapiroArgs {
    /// Contraction factor of the corner angles, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Scale of the corner angles (angle of corner n is c * lambda^n).
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    c: f64,
    /// Number of corner arcs.
    #[arg(long, default_value_t = 14)]
    arcs: usize,
    /// End of the observer time range.
    #[arg(long, default_value_t = 1.2)]
    t_max: f64,
    /// Smallest sample time; defaults to the resolution bound of the
    /// deepest arc.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Track(args) => cmd_track(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Shapiro(args) => cmd_shapiro(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SceneError::Config(_) | SceneError::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, SceneError> {
    let text = fs::read_to_string(path)
        .map_err(|e| SceneError::Config(format!("config `{}`: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| SceneError::Config(e.to_string()))
}

fn cmd_track(args: TrackArgs) -> Result<ExitCode, SceneError> {
    let mut config: SceneConfig = load_config(&args.config)?;
    if let Some(tol) = args.tol {
        config.integrator.abs_tol = tol;
        config.integrator.rel_tol = tol;
    }
    fs::create_dir_all(&args.out)?;
    let output = run_track(&config)?;

    let mut csv = Vec::new();
    write_track_csv(&output, &mut csv)?;
    fs::write(args.out.join("track.csv"), csv)?;
    fs::write(
        args.out.join("meta.json"),
        serde_json::to_string_pretty(&output.meta).expect("meta serializes"),
    )?;

    if let Some(abort) = &output.meta.abort {
        eprintln!("tracking aborted: {abort} (partial CSV retained)");
        return Ok(ExitCode::from(3));
    }
    println!(
        "tracked {} states, max residual {:.3e}, {} re-initializations",
        output.rows.len(),
        output.meta.max_residual,
        output.meta.reinit_events.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: TrackArgs) -> Result<ExitCode, SceneError> {
    let mut config: SceneConfig = load_config(&args.config)?;
    if let Some(tol) = args.tol {
        config.validate.r_tol = tol;
        config.validate.residual_tol = tol;
    }
    let csv_path = args.out.join("track.csv");
    let file = fs::File::open(&csv_path)
        .map_err(|e| SceneError::Config(format!("track csv `{}`: {e}", csv_path.display())))?;
    let rows = read_track_csv(std::io::BufReader::new(file))?;
    let report = run_validate(&config, &rows)?;
    fs::write(
        args.out.join("validate.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    println!(
        "validated {} rows: max |r_ode - r_oracle| = {:.3e} (tol {:.1e}), max residual = {:.3e} (tol {:.1e})",
        report.rows.len(),
        report.max_r_abs_err,
        report.r_tol,
        report.max_residual,
        report.residual_tol
    );
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("validation thresholds exceeded");
        Ok(ExitCode::from(3))
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode, SceneError> {
    let config: OracleConfig = load_config(&args.config)?;
    fs::create_dir_all(&args.out)?;
    let report = run_oracle(&config, args.seed)?;
    fs::write(
        args.out.join("oracle.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    let mut csv =
        String::from("point,nearest,distance,final_gradient_discrepancy,continuity_modulus\n");
    for r in &report.results {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| fmt_f64(*x))
                .collect::<Vec<_>>()
                .join(";")
        };
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            join(&r.point),
            join(&r.nearest),
            fmt_f64(r.distance),
            fmt_f64(*r.gradient_discrepancies.last().unwrap_or(&0.0)),
            fmt_f64(r.continuity_modulus)
        ));
    }
    fs::write(args.out.join("oracle.csv"), csv)?;
    println!(
        "{} queries written (seed {})",
        report.results.len(),
        report.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_shapiro(args: ShapiroArgs) -> Result<ExitCode, SceneError> {
    let set = build_shapiro(args.lambda, args.c, args.arcs)?;
    let dt = args.dt.unwrap_or(set.alpha(args.arcs + 1) / 100.0);
    fs::create_dir_all(&args.out)?;
    let fly = flyby_experiment(&set, args.t_max, dt)?;
    let sweep = difference_quotient_sweep(&set, &fly.events)?;

    let mut events = String::from("n,t_n,s_n,p_n,q_n,r_n\n");
    for e in &fly.events {
        let r_n = set.corner(e.n).map(|c| c.radius).unwrap_or(f64::NAN);
        events.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.n,
            fmt_f64(e.t_n),
            fmt_f64(e.s_n),
            e.p_n.map(fmt_f64).unwrap_or_default(),
            fmt_f64(e.q_n),
            fmt_f64(r_n)
        ));
    }
    fs::write(args.out.join("events.csv"), events)?;

    let mut samples = String::from("t,pi_x,pi_y,speed,q\n");
    for r in &fly.records {
        samples.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.t),
            fmt_f64(r.projection.x),
            fmt_f64(r.projection.y),
            fmt_f64(r.speed),
            fmt_f64(difference_quotient(&set, r.t))
        ));
    }
    fs::write(args.out.join("samples.csv"), samples)?;

    let summary = serde_json::json!({
        "lambda": args.lambda,
        "c": args.c,
        "arcs": args.arcs,
        "t_max": args.t_max,
        "dt": dt,
        "events": fly.events.len(),
        "tail_t_mean": sweep.tail_t.mean,
        "tail_t_spread": sweep.tail_t.spread,
        "tail_s_mean": sweep.tail_s.mean,
        "tail_s_spread": sweep.tail_s.spread,
        "gap": sweep.gap,
        "certified_divergent": sweep.certified_divergent,
    });
    fs::write(
        args.out.join("shapiro.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    println!(
        "{} events; difference-quotient tails {:.6} vs {:.6} (gap {:.6}, divergence certified: {})",
        fly.events.len(),
        sweep.tail_t.mean,
        sweep.tail_s.mean,
        sweep.gap,
        sweep.certified_divergent
    );
    Ok(ExitCode::SUCCESS)
}
