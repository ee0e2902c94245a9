use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::entanglement::{concurrence, eof_from_concurrence};
use crate::dicke::floquet::{floquet_basis, FloquetBasis, FloquetOptions};
use crate::dicke::hamiltonian::DickeParams;
use crate::dicke::master::{
    dissipation_channels, evolve, master_from_tables, reduced_with_states, stationary_state, thermal_initial_state,
    transition_elements, FloquetDensityMatrix, MasterEquation, TransitionTable,
};
use crate::error::{Error, Result};
use crate::scalar::{cis, lit, to_f64, Real};

/// What to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Long-time periodic state sampled over one drive period.
    Steady,
    /// Evolution from the thermal initial state, sampled at `t_k = k T_d / samples_per_period`, `k >= 1`.
    Dynamics { periods: usize, samples_per_period: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub floquet: FloquetOptions,
    pub lamb_shift: bool,
    /// Repeat the run with `n_ph + cutoff_step` and compare.
    pub check_cutoff: bool,
    pub cutoff_step: usize,
    pub cutoff_tolerance: f64,
    /// Phases per period at which the stationary state is sampled.
    pub steady_samples: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            floquet: FloquetOptions::default(),
            lamb_shift: false,
            check_cutoff: true,
            cutoff_step: 4,
            cutoff_tolerance: 0.05,
            steady_samples: 16,
        }
    }
}

/// Comparison of a run with the same run at a larger cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffCheck {
    pub n_ph: usize,
    pub n_ph_check: usize,
    pub relative_change: f64,
    pub tolerance: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult<T> {
    /// Sample times in units of `T_d`.
    pub times: Vec<T>,
    pub concurrence: Vec<T>,
    pub eof: Vec<T>,
    /// Mean and maximum EOF of the stationary state over one period.
    pub stationary_eof_mean: T,
    pub stationary_eof_max: T,
    pub n_ph: usize,
    pub nu_max: usize,
    pub max_trace_defect: f64,
    pub min_stationary_population: f64,
    pub cutoff: Option<CutoffCheck>,
    pub degenerate_clusters: usize,
    pub warnings: Vec<String>,
}

/// One `(g, T)` point of a stationary sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub g: T,
    pub temperature: T,
    pub eof_mean: T,
    pub eof_max: T,
    pub n_ph: usize,
    pub cutoff_change: Option<f64>,
}

/// Default cavity cutoff for a coupling `g` (units of `omega_r`).
pub fn auto_n_ph(g: f64) -> usize {
    if g <= 0.7 {
        12
    } else {
        16
    }
}

/// Runs a protocol at `p.n_ph` and, if requested, checks it against `p.n_ph + cutoff_step`.
pub fn run_experiment<T: Real>(p: &DickeParams<T>, protocol: Protocol, opts: &ExperimentOptions) -> Result<ExperimentResult<T>> {
    let mut res = run_single(p, protocol, opts)?;
    if opts.check_cutoff {
        let big = run_single(&p.with_n_ph(p.n_ph + opts.cutoff_step), protocol, opts)?;
        let change = relative_change(protocol, &res, &big);
        let check = CutoffCheck {
            n_ph: p.n_ph,
            n_ph_check: big.n_ph,
            relative_change: change,
            tolerance: opts.cutoff_tolerance,
            converged: change < opts.cutoff_tolerance,
        };
        if !check.converged {
            return Err(Error::CutoffNotConverged {
                n_ph: check.n_ph,
                n_ph_check: check.n_ph_check,
                relative_change: change,
                tolerance: opts.cutoff_tolerance,
            });
        }
        res.cutoff = Some(check);
    }
    Ok(res)
}

const RELATIVE_FLOOR: f64 = 1e-4;

fn relative_change<T: Real>(protocol: Protocol, a: &ExperimentResult<T>, b: &ExperimentResult<T>) -> f64 {
    match protocol {
        Protocol::Steady => {
            let (x, y) = (to_f64(a.stationary_eof_mean), to_f64(b.stationary_eof_mean));
            (x - y).abs() / x.abs().max(y.abs()).max(RELATIVE_FLOOR)
        }
        Protocol::Dynamics { .. } => {
            let diff = a.eof.iter().zip(&b.eof).map(|(&x, &y)| to_f64(x - y).abs()).fold(0.0, f64::max);
            let scale = a.eof.iter().chain(&b.eof).map(|&x| to_f64(x)).fold(RELATIVE_FLOOR, f64::max);
            diff / scale
        }
    }
}

/// Floquet basis together with its dissipation tables; independent of temperature.
struct Prepared<T: Real> {
    fb: FloquetBasis<T>,
    tables: Vec<(TransitionTable<T>, T)>,
}

fn prepare<T: Real>(p: &DickeParams<T>, opts: &ExperimentOptions) -> Result<Prepared<T>> {
    let fb = floquet_basis(p, &opts.floquet)?;
    let mut tables = Vec::new();
    for (x, lam) in dissipation_channels(p) {
        tables.push((transition_elements(&fb, &x)?, lam));
    }
    Ok(Prepared { fb, tables })
}

/// `psi_n(t)` for `t` with the given phase inside the period.
fn states_at<T: Real>(periodic: &DMatrix<Complex<T>>, eps: &[T], t: T) -> DMatrix<Complex<T>> {
    let mut psi = periodic.clone();
    for (n, &e) in eps.iter().enumerate() {
        let ph = cis(-e * t);
        psi.column_mut(n).iter_mut().for_each(|z| *z *= ph);
    }
    psi
}

fn measure<T: Real>(rho: &FloquetDensityMatrix<T>, psi: &DMatrix<Complex<T>>) -> Result<(T, T)> {
    let c = concurrence(&reduced_with_states(rho, psi)?)?;
    Ok((c, eof_from_concurrence(c)))
}

fn stationary_profile<T: Real>(
    fb: &FloquetBasis<T>,
    me: &MasterEquation<T>,
    samples: usize,
) -> Result<(FloquetDensityMatrix<T>, Vec<(T, T)>)> {
    let st = stationary_state(me)?;
    let period = fb.period();
    // a diagonal state is insensitive to the quasienergy phases
    let profile = (0..samples)
        .map(|j| {
            let t = period * lit::<T>(j as f64) / lit::<T>(samples as f64);
            measure(&st, &fb.periodic_states(t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((st, profile))
}

fn run_single<T: Real>(p: &DickeParams<T>, protocol: Protocol, opts: &ExperimentOptions) -> Result<ExperimentResult<T>> {
    let prep = prepare(p, opts)?;
    run_prepared(&prep, p, protocol, opts)
}

fn run_prepared<T: Real>(prep: &Prepared<T>, p: &DickeParams<T>, protocol: Protocol, opts: &ExperimentOptions) -> Result<ExperimentResult<T>> {
    let fb = &prep.fb;
    let me = master_from_tables(fb, p, &prep.tables, opts.lamb_shift);
    let samples = opts.steady_samples.max(1);
    let (st, profile) = stationary_profile(fb, &me, samples)?;
    let st_mean = profile.iter().map(|x| x.1).sum::<T>() / lit::<T>(profile.len() as f64);
    let st_max = profile.iter().map(|x| x.1).fold(T::zero(), |a, b| a.max(b));
    let min_pop = st.populations().iter().map(|&x| to_f64(x)).fold(f64::INFINITY, f64::min);

    let period = fb.period();
    let (times, values, trace_defect) = match protocol {
        Protocol::Steady => {
            let times = (0..samples).map(|j| lit::<T>(j as f64) / lit::<T>(samples as f64)).collect();
            (times, profile, 0.0)
        }
        Protocol::Dynamics { periods, samples_per_period } => {
            if periods == 0 || samples_per_period == 0 {
                return Err(Error::InvalidParameter("periods and samples_per_period must be positive".into()));
            }
            let rho0 = FloquetDensityMatrix::from_full_state(fb, &thermal_initial_state(p))?;
            let spp = samples_per_period;
            let grid: Vec<T> = (1..=periods * spp).map(|k| period * lit::<T>(k as f64) / lit::<T>(spp as f64)).collect();
            let states = evolve(&me, &rho0, &grid)?;
            let phases: Vec<DMatrix<Complex<T>>> = (0..spp)
                .map(|j| fb.periodic_states(period * lit::<T>(j as f64) / lit::<T>(spp as f64)))
                .collect();
            let eps = fb.quasienergies();
            let mut defect = 0.0f64;
            let mut values = Vec::with_capacity(grid.len());
            for (k, rho) in states.iter().enumerate() {
                defect = defect.max(to_f64(rho.trace() - T::one()).abs());
                let psi = states_at(&phases[(k + 1) % spp], eps, rho.t);
                values.push(measure(rho, &psi)?);
            }
            let times = (1..=periods * spp).map(|k| lit::<T>(k as f64) / lit::<T>(spp as f64)).collect();
            (times, values, defect)
        }
    };
    let mut warnings = fb.warnings().to_vec();
    if me.min_coherence_decay() < 0.0 {
        warnings.push(format!("negative coherence decay {:e}", me.min_coherence_decay()));
    }
    Ok(ExperimentResult {
        times,
        concurrence: values.iter().map(|v| v.0).collect(),
        eof: values.iter().map(|v| v.1).collect(),
        stationary_eof_mean: st_mean,
        stationary_eof_max: st_max,
        n_ph: p.n_ph,
        nu_max: fb.nu_max(),
        max_trace_defect: trace_defect,
        min_stationary_population: min_pop,
        cutoff: None,
        degenerate_clusters: fb.degenerate_clusters().len(),
        warnings,
    })
}

/// Stationary EOF on a `(g, T)` grid, in row-major order over `couplings` then `temperatures`.
///
/// The Floquet basis depends on `g` only and is built once per coupling; couplings run in parallel.
/// `n_ph_for` chooses the cutoff of each coupling.
pub fn steady_sweep<T: Real>(
    base: &DickeParams<T>,
    couplings: &[T],
    temperatures: &[T],
    n_ph_for: impl Fn(T) -> usize + Sync,
    opts: &ExperimentOptions,
) -> Result<Vec<SweepPoint<T>>> {
    let rows: Vec<Result<Vec<SweepPoint<T>>>> = couplings
        .par_iter()
        .map(|&g| {
            let n_ph = n_ph_for(g);
            let p = DickeParams { g, n_ph, ..base.clone() };
            p.validate()?;
            let prep = prepare(&p, opts)?;
            let check = if opts.check_cutoff {
                let pc = p.with_n_ph(n_ph + opts.cutoff_step);
                Some((prepare(&pc, opts)?, pc))
            } else {
                None
            };
            temperatures
                .iter()
                .map(|&temp| {
                    let pt = DickeParams { temperature: temp, ..p.clone() };
                    pt.validate()?;
                    let a = run_prepared(&prep, &pt, Protocol::Steady, opts)?;
                    let cutoff_change = match &check {
                        Some((prep_c, pc)) => {
                            let ptc = DickeParams { temperature: temp, ..pc.clone() };
                            let b = run_prepared(prep_c, &ptc, Protocol::Steady, opts)?;
                            let change = relative_change(Protocol::Steady, &a, &b);
                            if change >= opts.cutoff_tolerance {
                                return Err(Error::CutoffNotConverged {
                                    n_ph,
                                    n_ph_check: pc.n_ph,
                                    relative_change: change,
                                    tolerance: opts.cutoff_tolerance,
                                });
                            }
                            Some(change)
                        }
                        None => None,
                    };
                    Ok(SweepPoint {
                        g,
                        temperature: temp,
                        eof_mean: a.stationary_eof_mean,
                        eof_max: a.stationary_eof_max,
                        n_ph,
                        cutoff_change,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(couplings.len() * temperatures.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}
