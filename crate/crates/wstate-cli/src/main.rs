//! Batch front-end: reads a JSON config, dispatches subcommands, writes CSV
//! artifacts of the phase-behavior sweeps and the preparation-drive trace.
//!
//! Exit codes: 0 success, 1 runtime/solver failure, 2 usage/config error.

mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{load, ConfigError, LoadedConfig};
use output::{unix_seconds, CsvFile};
use std::f64::consts::PI;
use std::process::ExitCode;
use wstate_core::eigensolver::EigOptions;
use wstate_core::hamiltonian::{vertex_ss, ConfigTables, CouplingSwitches, SectorHamiltonian};
use wstate_core::hilbert::BosonBasis;
use wstate_core::linalg::HermitianOp;
use wstate_core::params::{derive, sweet_spot_detuning, sweet_spot_zeta, PhysicalParams};
use wstate_core::protocol::{
    rwa_preparation_time, simulate_drive, DriveSpec, Envelope, ProtocolError, SimOptions,
};
use wstate_core::scan::{ground_state_scan, pi_sector_curve, ScanError, ScanOptions};

#[derive(Parser)]
#[command(
    name = "wstate",
    version,
    about = "Excitation-boson model for dressed atom arrays: parameter reports, \
             ground-state sweeps, and W-state preparation traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every derived model quantity for the configured parameters
    Derive {
        #[arg(short, long)]
        config: String,
    },
    /// Sweep the coupling and write fig2.csv, fig3.csv, fig4.csv
    Scan {
        #[arg(short, long)]
        config: String,
    },
    /// Propagate the preparation drive and write trace.csv
    Protocol {
        #[arg(short, long)]
        config: String,
    },
    /// Verify the vertex zero line and the exact-eigenstate property
    SweetspotCheck {
        #[arg(short, long)]
        config: String,
    },
}

enum AppError {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Usage(e.to_string())
    }
}

impl From<ScanError> for AppError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::Solver { .. } => AppError::Runtime(e.to_string()),
            _ => AppError::Usage(e.to_string()),
        }
    }
}

impl From<ProtocolError> for AppError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::NormDrift { .. } | ProtocolError::StepTooLarge { .. } => {
                AppError::Runtime(e.to_string())
            }
            _ => AppError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Derive { config } => with_config(&config, cmd_derive),
        Command::Scan { config } => with_config(&config, cmd_scan),
        Command::Protocol { config } => with_config(&config, cmd_protocol),
        Command::SweetspotCheck { config } => with_config(&config, cmd_sweetspot_check),
    };
    match result {
        Ok(code) => code,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn with_config(
    path: &str,
    f: impl FnOnce(&LoadedConfig) -> Result<ExitCode, AppError>,
) -> Result<ExitCode, AppError> {
    let loaded = load(path)?;
    if let Some(threads) = loaded.config.run.threads {
        // ignore the error when a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    f(&loaded)
}

fn eig_options(loaded: &LoadedConfig) -> EigOptions {
    EigOptions {
        count: 1,
        tol: loaded.config.run.tolerance,
        max_iter: loaded.config.run.max_iterations,
        seed: loaded.config.run.seed,
    }
}

fn common_comments(csv: &mut CsvFile, loaded: &LoadedConfig, p: &PhysicalParams) {
    csv.comment("config_sha256", &loaded.sha256);
    csv.comment("version", env!("CARGO_PKG_VERSION"));
    csv.comment("n_sites", p.n_sites);
    csv.comment("max_bosons", p.max_bosons);
    csv.comment("seed", loaded.config.run.seed);
    csv.comment("generated_unix", unix_seconds(std::time::SystemTime::now()));
}

fn cmd_derive(loaded: &LoadedConfig) -> Result<ExitCode, AppError> {
    let p = loaded.config.physical_params()?;
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
    let d = derive(&p).map_err(|e| AppError::Usage(e.to_string()))?;
    let lam_ss = wstate_core::params::lambda_eb_ss(&p).ok();

    println!("physical inputs");
    println!("  C3/hbar            {:>14.6e} rad/s um^3", p.c3_over_hbar);
    println!("  a                  {:>14.6} um", p.a);
    println!("  omega_b            {:>14.6e} rad/s ({:.3} kHz cyclic)", p.omega_b, p.omega_b / (2.0 * PI) / 1e3);
    println!("  alpha              {:>14.6}", p.alpha);
    println!("  delta              {:>14.6e} rad/s", p.delta);
    println!("  Omega = delta*a    {:>14.6e} rad/s", p.omega_rabi());
    println!("  mass               {:>14.6e} kg", p.mass);
    println!("  N, M               {:>10}, {}", p.n_sites, p.max_bosons);
    println!("derived quantities");
    println!("  zeta               {:>14.9}", d.zeta);
    println!("  zeta_ss            {:>14.9}", sweet_spot_zeta());
    println!("  eps0/hbar          {:>14.6e} rad/s", d.eps0);
    println!("  t_e/hbar           {:>14.6e} rad/s", d.t_e);
    println!("  xi_B/hbar          {:>14.6e} rad/s/um", d.xi_b);
    println!("  xi_P/hbar          {:>14.6e} rad/s/um", d.xi_p);
    println!("  g_B                {:>14.9}", d.g_b);
    println!("  g_P                {:>14.9}", d.g_p);
    println!("  lambda_eb          {:>14.9}", d.lambda_eb);
    if let Some(l) = lam_ss {
        println!("  lambda_eb (closed) {:>14.9}", l);
    }
    println!("  omega_d            {:>14.6e} rad/s (signed; drives use |omega_d|)", d.omega_d);
    println!("sweet-spot detunings for this C3");
    for a in [4.0, 10.0, 15.0] {
        let dss = sweet_spot_detuning(p.c3_over_hbar, a);
        println!("  a = {a:>4} um: delta_ss = {dss:>13.6e} rad/s ({:.4} GHz cyclic)", dss / (2.0 * PI) / 1e9);
    }
    Ok(ExitCode::SUCCESS)
}

/// alpha realizing a given effective coupling at fixed sweet-spot detuning.
fn alpha_for_lambda(p: &PhysicalParams, lambda: f64) -> Result<f64, AppError> {
    let probe = PhysicalParams { alpha: 0.05, ..*p };
    let pref = derive(&probe)
        .map_err(|e| AppError::Usage(e.to_string()))?
        .lambda_eb
        / probe.alpha.powi(4);
    Ok((lambda / pref).powf(0.25))
}

fn default_lambda_grid() -> Vec<f64> {
    (1..=28).map(|i| 0.5 * i as f64).collect()
}

fn cmd_scan(loaded: &LoadedConfig) -> Result<ExitCode, AppError> {
    let cfg = &loaded.config;
    let p = cfg.physical_params()?;
    let alpha_grid: Vec<f64> = if let Some(alphas) = &cfg.run.alpha_grid {
        if alphas.is_empty() {
            return Err(AppError::Usage("alpha_grid is empty".into()));
        }
        alphas.clone()
    } else {
        let lambdas = match &cfg.run.lambda_grid {
            Some(l) if l.is_empty() => return Err(AppError::Usage("lambda_grid is empty".into())),
            Some(l) => l.clone(),
            None => default_lambda_grid(),
        };
        lambdas
            .iter()
            .map(|&l| alpha_for_lambda(&p, l))
            .collect::<Result<_, _>>()?
    };

    let opts = ScanOptions {
        eig: eig_options(loaded),
        refine_critical: cfg.run.refine_critical,
        ..Default::default()
    };
    let res = ground_state_scan(&p, &alpha_grid, &opts)?;

    let header = "lambda_eb,omega_rabi_rad_s,e_gs_over_abs_te,k_gs_rad,boson_number,w_overlap,gap_over_omega_b";
    for name in ["fig2.csv", "fig3.csv"] {
        let mut csv = CsvFile::new(header);
        common_comments(&mut csv, loaded, &p);
        csv.comment("semantic", if name == "fig2.csv" { "ground-state energy vs coupling" } else { "ground-state quasimomentum vs coupling" });
        match res.lambda_critical {
            Some(lc) => csv.comment("lambda_critical", format!("{lc:.6e}")),
            None => csv.comment("lambda_critical", "none"),
        };
        for pt in &res.points {
            csv.row(&[
                pt.lambda_eb,
                pt.omega_rabi,
                pt.e_gs_over_te,
                pt.k_gs,
                pt.boson_number,
                pt.w_overlap,
                pt.gap_pi_over_omega_b,
            ]);
        }
        csv.write_to(&cfg.output_path(name))?;
    }

    // fig4: lowest K = pi level against the Rabi frequency
    let omega_grid: Vec<f64> = match cfg.omega_grid() {
        Some(g) if g.is_empty() => return Err(AppError::Usage("omega_grid is empty".into())),
        Some(g) => g,
        None => alpha_grid.iter().map(|a| p.delta * a).collect(),
    };
    let curve = pi_sector_curve(&p, &omega_grid, &opts)?;
    let mut csv = CsvFile::new("omega_rabi_rad_s,lambda_eb,e_pi_over_abs_te");
    common_comments(&mut csv, loaded, &p);
    csv.comment("semantic", "lowest K=pi level vs Rabi frequency");
    for pt in &curve {
        csv.row(&[pt.omega_rabi, pt.lambda_eb, pt.e_pi_over_te]);
    }
    csv.write_to(&cfg.output_path("fig4.csv"))?;

    match res.lambda_critical {
        Some(lc) => println!("lambda_critical = {lc:.6}"),
        None => println!("lambda_critical = none (no crossing inside the grid)"),
    }
    println!("wrote fig2.csv, fig3.csv, fig4.csv to {}", cfg.output.dir);
    Ok(ExitCode::SUCCESS)
}

fn cmd_protocol(loaded: &LoadedConfig) -> Result<ExitCode, AppError> {
    let cfg = &loaded.config;
    let p = cfg.physical_params()?;
    let d = derive(&p).map_err(|e| AppError::Usage(e.to_string()))?;
    let units = cfg.output.units;
    let beta_p = match cfg.run.beta_p {
        Some(b) => {
            b * match units {
                config::Units::Angular => 1.0,
                config::Units::Cyclic => std::f64::consts::TAU,
            }
        }
        None => cfg.run.beta_p_over_omega_d * d.omega_d.abs(),
    };
    if beta_p > 0.1 * d.omega_d.abs() {
        eprintln!(
            "warning: beta_p = {beta_p:.3e} rad/s exceeds a tenth of the transition \
             frequency |omega_d| = {:.3e} rad/s; the rotating-wave picture degrades",
            d.omega_d.abs()
        );
    }
    let envelope = match cfg.run.ramp_time {
        Some(t) => Envelope::CosineRamp { ramp_time: t },
        None => Envelope::Constant,
    };
    let drive = DriveSpec {
        q_d_index: cfg.run.q_d_index.unwrap_or((p.n_sites / 2) as i64),
        beta_p,
        omega_drive: d.omega_d.abs(),
        envelope,
    };
    let tau = rwa_preparation_time(beta_p);
    let t_final = cfg.run.t_final_over_tau * tau;
    let opts = SimOptions {
        dt: cfg.run.dt,
        taylor_order: cfg.run.taylor_order,
        records: cfg.run.records,
        ..Default::default()
    };
    let trace = simulate_drive(&p, &drive, t_final, &opts)?;

    let mut csv = CsvFile::new("time_s,fidelity,vacuum_population,leakage,norm_drift");
    common_comments(&mut csv, loaded, &p);
    csv.comment("tau_prep_s", format!("{tau:.9e}"));
    csv.comment("beta_p_rad_s", format!("{beta_p:.9e}"));
    csv.comment("omega_d_rad_s", format!("{:.9e} (signed; carrier uses magnitude)", trace.omega_d));
    csv.comment("omega_drive_rad_s", format!("{:.9e}", trace.omega_drive));
    csv.comment("q_d_index", drive.q_d_index);
    csv.comment("dt_s", format!("{:.9e}", trace.dt));
    for i in 0..trace.times.len() {
        csv.row(&[
            trace.times[i],
            trace.fidelity[i],
            trace.vacuum_population[i],
            trace.leakage[i],
            trace.norm_drift[i],
        ]);
    }
    csv.write_to(&cfg.output_path("trace.csv"))?;

    println!(
        "tau_prep = {tau:.6e} s, peak fidelity = {:.9}, final fidelity = {:.9}",
        trace.peak_fidelity(),
        trace.final_fidelity()
    );
    println!("wrote trace.csv to {}", cfg.output.dir);
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweetspot_check(loaded: &LoadedConfig) -> Result<ExitCode, AppError> {
    let cfg = &loaded.config;
    let p = cfg.physical_params()?;
    let mut all_pass = true;

    // vertex zero line at k = pi
    let mut worst = 0.0f64;
    let (g, w) = (0.7, 1.0);
    let mut q = -PI;
    let dq = 2.0 * PI / 9999.0;
    for _ in 0..10_000 {
        worst = worst.max(vertex_ss(g, w, PI, q).norm());
        q += dq;
    }
    let vertex_ok = worst <= 1e-14 * g * w;
    all_pass &= vertex_ok;
    println!(
        "vertex zero line:      {} (max |gamma(pi, q)| = {:.3e} g omega_b over 10^4 points)",
        if vertex_ok { "PASS" } else { "FAIL" },
        worst / (g * w)
    );

    // exact-eigenstate residual across a span of couplings
    let base = PhysicalParams { delta: sweet_spot_detuning(p.c3_over_hbar, p.a), ..p };
    if base.n_sites % 2 != 0 {
        return Err(AppError::Usage(format!(
            "the K = pi eigenstate check needs an even number of sites, got {}",
            base.n_sites
        )));
    }
    let tables = ConfigTables::new(
        BosonBasis::new(base.n_sites, base.max_bosons).map_err(|e| AppError::Usage(e.to_string()))?,
    );
    let mut worst_resid = 0.0f64;
    for i in 1..=10 {
        let alpha = 0.012 * i as f64; // spans weak to beyond-critical coupling
        let pp = PhysicalParams { alpha, ..base };
        let dd = derive(&pp).map_err(|e| AppError::Usage(e.to_string()))?;
        let op = SectorHamiltonian::new(
            tables.clone(),
            &pp,
            (base.n_sites / 2) as i64,
            CouplingSwitches::ALL,
        )
        .map_err(|e| AppError::Usage(e.to_string()))?;
        let mut v = vec![wstate_core::Complex64::ZERO; op.dim()];
        v[0] = wstate_core::Complex64::ONE;
        let hv = op.apply(&v);
        let energy = dd.eps0 - 2.0 * dd.t_e.abs();
        let mut resid = 0.0f64;
        for (i, x) in hv.iter().enumerate() {
            let r = if i == 0 { *x - energy } else { *x };
            resid += r.norm_sqr();
        }
        worst_resid = worst_resid.max(resid.sqrt() / dd.t_e.abs());
    }
    let eig_ok = worst_resid <= 1e-10;
    all_pass &= eig_ok;
    println!(
        "exact eigenstate:      {} (max residual {:.3e} |t_e| over 10 couplings, N = {}, M = {})",
        if eig_ok { "PASS" } else { "FAIL" },
        worst_resid,
        base.n_sites,
        base.max_bosons
    );

    if all_pass {
        println!("sweet-spot checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        Err(AppError::Runtime("sweet-spot checks failed".into()))
    }
}
