//! Command-line front end. Exit codes: 0 success, 1 usage or i/o error, 2 physics failure.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use mlsim::charge::{check_neutrality, check_wiener};
use mlsim::dynamics::{evolve, hamiltonian, EvolveOptions};
use mlsim::fields::Vec3;
use mlsim::harness::io::{load_snapshot, read_csv_columns, save_csv, save_json, save_snapshot};
use mlsim::harness::{
    envelope, extract_scattered_field, fit_decay, frozen_decay, run_perturbed_soliton_on, DecayReport, ExperimentConfig,
};
use mlsim::soliton::{soliton_momentum, soliton_state, stationary_residual, GridCharge, SolitonParams};
use mlsim::spectral::SpectralContext;
use mlsim::Error;

#[derive(Parser)]
#[command(name = "mlsim", version, about = "Simulate and analyse a rigid extended charge in its own Maxwell field")]
struct Cli {
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides output.dir in the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Perturbed soliton run with projection, decay fits and scattering.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Soliton snapshot and report; optionally evolves it for a while.
    Soliton {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        t_final: Option<f64>,
    },
    /// Coefficient sweep along the imaginary axis λ = iω.
    Spectral {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        omega_min: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Logarithmic spacing, for sweeps of one sign.
        #[arg(long)]
        log: bool,
    },
    /// Frozen linearized flow from the configured perturbation.
    Frozen {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Neutrality and Wiener reports of the configured density, as JSON. Exits 2 on a non-neutral density.
    CheckRho {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 60.0)]
        k_max: f64,
        #[arg(long, default_value_t = 6000)]
        samples: usize,
    },
    /// Power-law fit of one CSV column against another.
    FitDecay {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "t")]
        x: String,
        #[arg(long)]
        y: String,
        /// Fit window as `a,b`; defaults to the full range.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        /// Fit the decreasing envelope sup_{s>=t} y(s) instead of y.
        #[arg(long)]
        envelope: bool,
    },
    /// Scattered-field extraction from `t=path` snapshots, or from a fresh run without them.
    Scatter {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "snapshot")]
        snapshots: Vec<String>,
    },
}

enum Failure {
    Usage(String),
    Physics(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_physics() {
            Failure::Physics(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn usage(m: impl Display) -> Failure {
    Failure::Usage(m.to_string())
}

type Outcome = Result<(), Failure>;

fn load_config(path: &Option<PathBuf>, cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.output.dir = d.clone();
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| usage(format!("{}: {e}", cfg.output.dir.display())))?;
    Ok(cfg)
}

fn out(cfg: &ExperimentConfig, suffix: &str) -> PathBuf {
    cfg.output.dir.join(format!("{}_{suffix}", cfg.output.prefix))
}

fn charge_of(cfg: &ExperimentConfig) -> Result<GridCharge, Failure> {
    Ok(GridCharge::new(&cfg.density()?, &cfg.grid()?))
}

fn report_written(paths: &[&Path]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn write_run(cfg: &ExperimentConfig, r: &DecayReport) -> Outcome {
    let header = [
        "t [time]",
        "q_x [length]",
        "q_y [length]",
        "q_z [length]",
        "P_x [momentum]",
        "P_y [momentum]",
        "P_z [momentum]",
        "qdot_x [speed]",
        "qdot_y [speed]",
        "qdot_z [speed]",
        "H [energy]",
        "b_x [length]",
        "b_y [length]",
        "b_z [length]",
        "v_x [speed]",
        "v_y [speed]",
        "v_z [speed]",
        "vdot [speed/time]",
        "cdot [speed]",
        "Z_decay [1]",
        "Z_energy [1]",
        "projection_residual [1]",
    ];
    let rows: Vec<Vec<f64>> = r
        .samples
        .iter()
        .map(|s| {
            let mut row = vec![s.t];
            for a in [s.q, s.p, s.qdot] {
                row.extend(a);
            }
            row.push(s.energy);
            row.extend(s.b);
            row.extend(s.v);
            row.extend([s.vdot_norm(), s.cdot_norm(), s.z_decay, s.z_energy, s.projection_residual]);
            row
        })
        .collect();
    let csv = out(cfg, "samples.csv");
    save_csv(&csv, &header, &rows)?;
    let json = out(cfg, "report.json");
    save_json(&json, r)?;
    report_written(&[&csv, &json]);
    if cfg.output.snapshots {
        for (t, y) in &r.extracted_states {
            let p = out(cfg, &format!("t{t:09.4}.snap"));
            save_snapshot(&p, y)?;
            report_written(&[&p]);
        }
    }
    Ok(())
}

fn simulate(cli: &Cli, config: &Option<PathBuf>) -> Outcome {
    let cfg = load_config(config, cli)?;
    let r = run_perturbed_soliton_on(&charge_of(&cfg)?, &cfg)?;
    write_run(&cfg, &r)?;
    for (k, f) in &r.fits {
        match (&f.fit, &f.error) {
            (Some(f), _) => println!("{k}: slope {:.3} R^2 {:.4}", f.exponent, f.r_squared),
            (None, Some(e)) => println!("{k}: no fit ({e})"),
            _ => {}
        }
    }
    println!("v+ = {:?}, max energy drift {:.3e}", r.v_plus.value, r.max_energy_drift);
    Ok(())
}

fn soliton(cli: &Cli, config: &Option<PathBuf>, t_final: Option<f64>) -> Outcome {
    let cfg = load_config(config, cli)?;
    let ch = charge_of(&cfg)?;
    let sigma = cfg.sigma0()?;
    let res = stationary_residual(&ch, &sigma.v)?;
    let y = soliton_state(&ch, &sigma)?;
    let snap = out(&cfg, "soliton.snap");
    save_snapshot(&snap, &y)?;
    let mut report = json!({
        "b": sigma.b.as_slice(),
        "v": sigma.v.as_slice(),
        "P_v": soliton_momentum(&ch, &sigma.v)?.as_slice(),
        "residuals": res,
        "norms": {
            "energy": y.norm_energy(),
            "field_energy": y.fields.energy(),
            "hamiltonian": hamiltonian(&ch, &y),
        },
    });
    if let Some(t) = t_final {
        let tr = evolve(&ch, &y, t, cfg.dt()?, &EvolveOptions::default())?;
        let exact = soliton_state(&ch, &SolitonParams { b: sigma.b + sigma.v * t, v: sigma.v })?;
        report["evolution"] = json!({
            "t_final": t,
            "position_error": (tr.final_state.q - exact.q).norm(),
            "field_error": tr.final_state.fields.sub(&exact.fields).norm_f(),
            "max_energy_drift": tr.max_energy_drift,
        });
        let fin = out(&cfg, "soliton_final.snap");
        save_snapshot(&fin, &tr.final_state)?;
        report_written(&[&fin]);
    }
    let json = out(&cfg, "soliton.json");
    save_json(&json, &report)?;
    report_written(&[&snap, &json]);
    println!("stationary residual {:.3e}", res.max());
    if res.max() > 1e-10 {
        return Err(Failure::Physics(format!("stationary residual {:.3e} exceeds 1e-10", res.max())));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    speed: f64,
    points: usize,
    max_trace_residual: f64,
    max_det_gap: f64,
    max_identity_residual: f64,
    max_inverse_residual: f64,
    max_block_gap: f64,
    taylor: mlsim::spectral::TaylorData,
}

fn omega_grid(a: f64, b: f64, n: usize, log: bool) -> Result<Vec<f64>, Failure> {
    if n < 2 || !(b > a) {
        return Err(usage("need omega_max > omega_min and at least 2 points"));
    }
    if log && !(a > 0.0 || b < 0.0) {
        return Err(usage("a logarithmic sweep needs omega of one sign"));
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    let grid: Vec<f64> = if log {
        let s = a.signum();
        let (la, lb) = (a.abs().ln(), b.abs().ln());
        (0..n).map(|i| s * (la + (lb - la) * t(i)).exp()).collect()
    } else {
        (0..n).map(|i| a + (b - a) * t(i)).collect()
    };
    Ok(grid.into_iter().filter(|w| *w != 0.0).collect())
}

fn spectral(cli: &Cli, config: &Option<PathBuf>, a: f64, b: f64, n: usize, log: bool) -> Outcome {
    let cfg = load_config(config, cli)?;
    let ctx = SpectralContext::new(&cfg.density()?, &Vec3::from(cfg.initial.v))?;
    let omegas = omega_grid(a, b, n, log)?;
    let rows: Vec<_> = omegas
        .par_iter()
        .map(|&w| {
            let m = ctx.m_inverse_structure(w)?;
            let det = ctx.m_matrix(&m.coeffs).det_gap;
            Ok((w, m, det))
        })
        .collect::<mlsim::Result<_>>()?;
    let mut header = vec!["omega [1/time]".to_string()];
    for name in ["c1", "c", "f1", "f", "d1", "d"] {
        header.push(format!("re_{name} [1]"));
        header.push(format!("im_{name} [1]"));
    }
    header.extend(["im_d1 [1]", "im_d [1]", "norm_Minv [1]"].map(String::from));
    let mut table = Vec::new();
    let mut s = SweepSummary {
        speed: ctx.speed(),
        points: rows.len(),
        max_trace_residual: 0.0,
        max_det_gap: 0.0,
        max_identity_residual: 0.0,
        max_inverse_residual: 0.0,
        max_block_gap: 0.0,
        taylor: ctx.taylor_at_zero(),
    };
    for (w, m, det) in &rows {
        let c = &m.coeffs;
        let mut row = vec![*w];
        for z in [c.c1, c.c, c.f1, c.f, c.d1, c.d] {
            row.extend([z.re, z.im]);
        }
        row.extend([c.d1.im, c.d.im, m.inverse_norm]);
        table.push(row);
        s.max_trace_residual = s.max_trace_residual.max(c.trace_residual());
        s.max_det_gap = s.max_det_gap.max(*det);
        s.max_identity_residual = s.max_identity_residual.max(m.identity_residual);
        s.max_inverse_residual = s.max_inverse_residual.max(m.inverse_residual);
        s.max_block_gap = s.max_block_gap.max(m.block_gap);
    }
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv = out(&cfg, "spectral.csv");
    save_csv(&csv, &hdr, &table)?;
    let json = out(&cfg, "spectral.json");
    save_json(&json, &s)?;
    report_written(&[&csv, &json]);
    let worst = s.max_trace_residual.max(s.max_det_gap).max(s.max_identity_residual * 1e-2);
    println!(
        "trace {:.2e}, det {:.2e}, identity {:.2e} over {} points",
        s.max_trace_residual, s.max_det_gap, s.max_identity_residual, s.points
    );
    if worst > 1e-10 {
        return Err(Failure::Physics("resolvent identity residual above tolerance".into()));
    }
    Ok(())
}

fn frozen(cli: &Cli, config: &Option<PathBuf>) -> Outcome {
    let cfg = load_config(config, cli)?;
    let r = frozen_decay(&charge_of(&cfg)?, &cfg)?;
    let header = ["t [time]", "X_decay [1]", "X_energy [1]", "H_vv [energy]", "secular_max [1]"];
    let rows: Vec<Vec<f64>> = r
        .samples
        .iter()
        .map(|s| {
            let sec = s.secular.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            vec![s.t, s.decay_norm, s.energy_norm, s.hamiltonian, sec]
        })
        .collect();
    let csv = out(&cfg, "frozen.csv");
    save_csv(&csv, &header, &rows)?;
    let json = out(&cfg, "frozen.json");
    save_json(
        &json,
        &json!({ "delta": r.delta, "fit": r.fit, "max_secular": r.max_secular, "max_hamiltonian_drift": r.max_hamiltonian_drift }),
    )?;
    report_written(&[&csv, &json]);
    println!("frozen decay slope {:.3} R^2 {:.4}", r.fit.exponent, r.fit.r_squared);
    Ok(())
}

fn check_rho(cli: &Cli, config: &Option<PathBuf>, k_max: f64, samples: usize) -> Outcome {
    let cfg = load_config(config, cli)?;
    let rho = cfg.density()?;
    let neutrality = check_neutrality(&rho);
    let wiener = check_wiener(&rho, k_max, samples);
    let report = json!({ "neutrality": neutrality, "wiener": wiener });
    println!("{}", serde_json::to_string_pretty(&report).map_err(usage)?);
    save_json(&out(&cfg, "rho.json"), &report)?;
    if wiener.sign_changes > 0 {
        eprintln!("note: the sampled transform changes sign {} times (Wiener scan is advisory)", wiener.sign_changes);
    }
    if !neutrality.pass || wiener.degenerate {
        return Err(Failure::Physics("density is not neutral to fourth order".into()));
    }
    Ok(())
}

fn fit_cmd(cli: &Cli, input: &Path, x: &str, y: &str, window: &Option<Vec<f64>>, env: bool) -> Outcome {
    let file = std::fs::File::open(input).map_err(|e| usage(format!("{}: {e}", input.display())))?;
    let mut series = read_csv_columns(file, x, y)?;
    if env {
        series = envelope(&series);
    }
    let w = match window.as_deref() {
        Some([a, b]) => (*a, *b),
        Some(_) => return Err(usage("--window takes exactly two values a,b")),
        None => {
            let first = series.first().ok_or_else(|| usage("empty series"))?.0;
            (first.max(f64::MIN_POSITIVE), series.last().unwrap().0)
        }
    };
    let fit = fit_decay(&series, w)?;
    println!("{}", serde_json::to_string_pretty(&fit).map_err(usage)?);
    if let Some(dir) = &cli.out_dir {
        std::fs::create_dir_all(dir).map_err(usage)?;
        save_json(&dir.join("fit.json"), &fit)?;
    }
    Ok(())
}

fn parse_snapshot_arg(s: &str) -> Result<(f64, PathBuf), Failure> {
    let (t, p) = s.split_once('=').ok_or_else(|| usage(format!("expected t=path, got {s:?}")))?;
    let t: f64 = t.trim().parse().map_err(|e| usage(format!("bad time {t:?}: {e}")))?;
    Ok((t, PathBuf::from(p)))
}

fn scatter(cli: &Cli, config: &Option<PathBuf>, snapshots: &[String]) -> Outcome {
    let cfg = load_config(config, cli)?;
    let report = if snapshots.is_empty() {
        let r = run_perturbed_soliton_on(&charge_of(&cfg)?, &cfg)?;
        write_run(&cfg, &r)?;
        r.scattering.ok_or_else(|| usage(r.scattering_error.unwrap_or_else(|| "no scattering report".into())))?
    } else {
        let mut states = Vec::new();
        for s in snapshots {
            let (t, p) = parse_snapshot_arg(s)?;
            states.push((t, load_snapshot(&p)?));
        }
        states.sort_by(|a, b| a.0.total_cmp(&b.0));
        let grid = states[0].1.grid().clone();
        let ch = GridCharge::new(&cfg.density()?, &grid);
        extract_scattered_field(&ch, &states, grid.half_length())?
    };
    let n = report.times.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            vec![
                report.times[i],
                report.norms[i],
                report.cauchy_residuals.get(i).copied().unwrap_or(f64::NAN),
                report.remainders.get(i).copied().unwrap_or(0.0),
            ]
        })
        .collect();
    let csv = out(&cfg, "scatter.csv");
    save_csv(
        &csv,
        &["t [time]", "psi_norm [energy^1/2]", "cauchy_next [energy^1/2]", "remainder [energy^1/2]"],
        &rows,
    )?;
    let json = out(&cfg, "scatter.json");
    save_json(&json, &report)?;
    report_written(&[&csv, &json]);
    println!("Cauchy residuals {:?}, strictly decreasing: {}", report.cauchy_residuals, report.strictly_decreasing);
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(usage)?;
    }
    match &cli.cmd {
        Cmd::Simulate { config } => simulate(cli, config),
        Cmd::Soliton { config, t_final } => soliton(cli, config, *t_final),
        Cmd::Spectral { config, omega_min, omega_max, points, log } => {
            spectral(cli, config, *omega_min, *omega_max, *points, *log)
        }
        Cmd::Frozen { config } => frozen(cli, config),
        Cmd::CheckRho { config, k_max, samples } => check_rho(cli, config, *k_max, *samples),
        Cmd::FitDecay { input, x, y, window, envelope } => fit_cmd(cli, input, x, y, window, *envelope),
        Cmd::Scatter { config, snapshots } => scatter(cli, config, snapshots),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Physics(m)) => {
            eprintln!("physics check failed: {m}");
            ExitCode::from(2)
        }
    }
}
