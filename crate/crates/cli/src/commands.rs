//! Runs one configured experiment and renders its artifacts in memory.

use std::io::Write;

use cavlab::combstate::{build_quadratic_form, ground_state, stationarity_residual, uniform_pump_for_margin};
use cavlab::dicke::{auto_n_ph, run_experiment, steady_sweep, DickeParams, ExperimentOptions, FloquetOptions, Protocol};
use cavlab::microcavity::{polariton_energies, MicrocavityParams, WaveVector2D};
use cavlab::phasematch::{eta, eta_map, GridSpec, PumpComb};
use cavlab::witness::{full_scan, write_scan_csv, ZERO_VISIBILITY};
use serde_json::{json, Value};

use crate::config::{linspace, Command, ExperimentConfig};

/// Primary file contents plus the `results` section of the sidecar.
pub struct Artifacts {
    pub primary: Vec<u8>,
    pub results: Value,
}

pub fn run(cfg: &ExperimentConfig) -> cavlab::Result<Artifacts> {
    match cfg.command {
        Command::Dispersion => dispersion(cfg),
        Command::Phasematch => phasematch(cfg),
        Command::CombGroundState => comb_ground_state(cfg),
        Command::WitnessScan => witness_scan(cfg),
        Command::DickeSteady => dicke_steady(cfg),
        Command::DickeDynamics => dicke_dynamics(cfg),
    }
}

fn cavity(cfg: &ExperimentConfig) -> cavlab::Result<MicrocavityParams<f64>> {
    MicrocavityParams::new(
        cfg.f64("e_c"),
        cfg.f64("e_x"),
        cfg.f64("hbar_omega"),
        cfg.f64("e_b"),
        cfg.f64("r_x"),
        cfg.f64("area"),
    )
}

fn comb(cfg: &ExperimentConfig, amplitude: f64) -> cavlab::Result<PumpComb<f64>> {
    PumpComb::uniform(cfg.usize("n_lines"), cfg.f64("k0"), cfg.f64("dk0"), cfg.f64("gamma"), amplitude)
}

fn dispersion(cfg: &ExperimentConfig) -> cavlab::Result<Artifacts> {
    let p = cavity(cfg)?;
    let ks = linspace(cfg.f64("k_min"), cfg.f64("k_max"), cfg.usize("n_k"));
    let mut out = Vec::new();
    writeln!(out, "k,e_lower,e_upper").expect("write to memory");
    let mut min_gap = f64::INFINITY;
    for &k in &ks {
        let (lo, hi) = polariton_energies(&p, WaveVector2D::from_reduced(k, 0.0, p.e_c));
        min_gap = min_gap.min(hi - lo);
        writeln!(out, "{k},{lo},{hi}").expect("write to memory");
    }
    Ok(Artifacts { primary: out, results: json!({ "rows": ks.len(), "min_branch_gap": min_gap }) })
}

fn phasematch(cfg: &ExperimentConfig) -> cavlab::Result<Artifacts> {
    let p = cavity(cfg)?;
    let c = comb(cfg, cfg.f64("pump_amplitude"))?;
    let grid = GridSpec::around_comb(&c, cfg.usize("per_line"))?;
    let map = eta_map(&p, &c, &grid);
    let mut out = Vec::new();
    map.write_csv(&mut out).expect("write to memory");
    let pumps: Vec<Value> = c
        .wave_vectors(&p)
        .into_iter()
        .map(|k| json!({ "kx": k.reduced(p.e_c).0, "eta": eta(&p, &c, k) }))
        .collect();
    Ok(Artifacts { primary: out, results: json!({ "nx": map.nx(), "ny": map.ny(), "pumps": pumps }) })
}

/// Resolved pump, quadratic form and ground state shared by the comb commands.
fn comb_state(
    cfg: &ExperimentConfig,
) -> cavlab::Result<(PumpComb<f64>, cavlab::QuadraticForm64, cavlab::GaussianState64, Value)> {
    let p = cavity(cfg)?;
    let template = comb(cfg, 1.0)?;
    let fraction = cfg.f64("stability_fraction");
    let default_amp = uniform_pump_for_margin(&p, &template, fraction)?;
    let bound = default_amp / fraction.sqrt();
    let amp = cfg.opt_f64("pump_amplitude").unwrap_or(default_amp);
    let c = comb(cfg, amp)?;
    let qf = build_quadratic_form(&p, &c)?;
    let gs = ground_state(&qf)?;
    let meta = json!({
        "pump_amplitude": amp,
        "stability_bound_amplitude": bound,
        "min_eigenvalue_hqq": qf.hqq.min_eigenvalue(),
        "min_eigenvalue_hpp": qf.hpp.min_eigenvalue(),
        "stationarity_residual": stationarity_residual(&qf, &gs),
        "energy": gs.energy,
    });
    Ok((c, qf, gs, meta))
}

fn comb_ground_state(cfg: &ExperimentConfig) -> cavlab::Result<Artifacts> {
    let (_, _, gs, meta) = comb_state(cfg)?;
    let mut out = serde_json::to_vec_pretty(&gs.to_record()).expect("serialisable record");
    out.push(b'\n');
    Ok(Artifacts { primary: out, results: meta })
}

fn witness_scan(cfg: &ExperimentConfig) -> cavlab::Result<Artifacts> {
    let (c, qf, gs, mut meta) = comb_state(cfg)?;
    let reports = full_scan(&qf, &gs)?;
    let mut out = Vec::new();
    write_scan_csv(&reports, -(c.n as i64), &mut out).expect("write to memory");
    let zero = reports.iter().filter(|r| r.visibility.abs() <= ZERO_VISIBILITY).count();
    let entangled = reports.iter().filter(|r| r.is_entangled()).count();
    meta["partitions"] = json!(reports.len());
    meta["entangled_partitions"] = json!(entangled);
    meta["zero_visibility_partitions"] = json!(zero);
    Ok(Artifacts { primary: out, results: meta })
}

fn dicke_options(cfg: &ExperimentConfig) -> ExperimentOptions {
    ExperimentOptions {
        floquet: FloquetOptions {
            samples: cfg.usize("samples"),
            nu_max: cfg.usize("nu_max"),
            auto_nu_max: cfg.bool("auto_nu_max"),
            ..FloquetOptions::default()
        },
        lamb_shift: cfg.bool("lamb_shift"),
        check_cutoff: cfg.bool("check_cutoff"),
        cutoff_tolerance: cfg.f64("cutoff_tolerance"),
        ..ExperimentOptions::default()
    }
}

fn dicke_params(cfg: &ExperimentConfig, g: f64, kt: f64) -> cavlab::Result<DickeParams<f64>> {
    let n_ph = cfg.opt_usize("n_ph").unwrap_or_else(|| auto_n_ph(g));
    let mut p = DickeParams::resonant(g, cfg.f64("drive_amplitude"), cfg.f64("lambda"), kt, n_ph)?;
    p.lambda_cavity = cfg.opt_f64("lambda_cavity");
    p.lambda_emitter = cfg.opt_f64("lambda_emitter");
    p.validate()?;
    Ok(p)
}

fn dicke_steady(cfg: &ExperimentConfig) -> cavlab::Result<Artifacts> {
    let gs = linspace(cfg.f64("g_min"), cfg.f64("g_max"), cfg.usize("n_g"));
    let kts = linspace(cfg.f64("kt_min"), cfg.f64("kt_max"), cfg.usize("n_kt"));
    let base = dicke_params(cfg, gs[0], kts[0])?;
    let fixed = cfg.opt_usize("n_ph");
    let points = steady_sweep(&base, &gs, &kts, |g| fixed.unwrap_or_else(|| auto_n_ph(g)), &dicke_options(cfg))?;
    let mut out = Vec::new();
    writeln!(out, "g_over_wr,kT_over_hwr,eof_stationary").expect("write to memory");
    for s in &points {
        writeln!(out, "{},{},{}", s.g, s.temperature, s.eof_mean).expect("write to memory");
    }
    let cutoffs: Vec<Value> = gs
        .iter()
        .map(|&g| {
            let row: Vec<_> = points.iter().filter(|s| s.g == g).collect();
            let worst = row.iter().filter_map(|s| s.cutoff_change).fold(None, |a: Option<f64>, b| Some(a.map_or(b, |x| x.max(b))));
            json!({ "g": g, "n_ph": row[0].n_ph, "max_relative_change": worst })
        })
        .collect();
    Ok(Artifacts { primary: out, results: json!({ "points": points.len(), "cutoff": cutoffs }) })
}

fn dicke_dynamics(cfg: &ExperimentConfig) -> cavlab::Result<Artifacts> {
    let p = dicke_params(cfg, cfg.f64("g"), cfg.f64("kt"))?;
    let protocol = Protocol::Dynamics { periods: cfg.usize("periods"), samples_per_period: cfg.usize("samples_per_period") };
    let r = run_experiment(&p, protocol, &dicke_options(cfg))?;
    let mut out = Vec::new();
    writeln!(out, "t_over_Td,concurrence,eof").expect("write to memory");
    for ((t, c), e) in r.times.iter().zip(&r.concurrence).zip(&r.eof) {
        writeln!(out, "{t},{c},{e}").expect("write to memory");
    }
    let results = json!({
        "n_ph": r.n_ph,
        "nu_max": r.nu_max,
        "stationary_eof_mean": r.stationary_eof_mean,
        "stationary_eof_max": r.stationary_eof_max,
        "max_trace_defect": r.max_trace_defect,
        "min_stationary_population": r.min_stationary_population,
        "cutoff": r.cutoff,
        "degenerate_clusters": r.degenerate_clusters,
        "warnings": r.warnings,
    });
    Ok(Artifacts { primary: out, results })
}
