use nalgebra::{Complex, DMatrix, Schur};
use serde::{Deserialize, Serialize};

use crate::dicke::hamiltonian::{DickeHamiltonian, DickeParams};
use crate::error::{Error, Result};
use crate::matfun::{HermMatrix, DEFAULT_STEPS_PER_PERIOD};
use crate::scalar::{cis, lit, modulus, to_f64, Real};

/// Numerical settings of the Floquet construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetOptions {
    /// Uniform samples `N_t` per period.
    pub samples: usize,
    /// Exponential steps between consecutive samples.
    pub substeps: usize,
    /// Requested Fourier cutoff.
    pub nu_max: usize,
    /// Raise `nu_max` until the discarded Fourier weight is below `tail_tolerance`.
    pub auto_nu_max: bool,
    pub tail_tolerance: f64,
    /// Quasienergies closer than this (in units of `omega_d`) form a degenerate cluster.
    pub degeneracy_tolerance: f64,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self {
            samples: 256,
            substeps: DEFAULT_STEPS_PER_PERIOD / 256,
            nu_max: 8,
            auto_nu_max: true,
            tail_tolerance: 5e-7,
            degeneracy_tolerance: 1e-10,
        }
    }
}

/// Floquet states `psi_n(t) = exp(-i eps_n t) phi_n(t)` of a `T_d`-periodic Hamiltonian.
///
/// Each quasienergy is taken in the zone where its periodic state has most of
/// its weight in the zeroth Fourier mode.
#[derive(Clone, Debug)]
pub struct FloquetBasis<T: Real> {
    dim: usize,
    omega_d: T,
    quasienergies: Vec<T>,
    nu_max: usize,
    /// `fourier[nu + nu_max]`, column `n` is `phi~_n(nu)`.
    fourier: Vec<DMatrix<Complex<T>>>,
    /// Raw `phi_n(t_i)` at `t_i = i T_d / N_t`.
    samples: Vec<DMatrix<Complex<T>>>,
    reconstruction_error: f64,
    tail_weight: f64,
    degenerate_clusters: Vec<Vec<usize>>,
    warnings: Vec<String>,
}

/// Builds the Floquet basis from the one-period propagator.
pub fn floquet_basis<T: Real>(p: &DickeParams<T>, opts: &FloquetOptions) -> Result<FloquetBasis<T>> {
    let h = DickeHamiltonian::new(p)?;
    FloquetBasis::from_hamiltonian(&h, opts)
}

impl<T: Real> FloquetBasis<T> {
    pub fn from_hamiltonian(h: &DickeHamiltonian<T>, opts: &FloquetOptions) -> Result<Self> {
        if opts.samples < 64 {
            return Err(Error::InvalidParameter("at least 64 samples per period required".into()));
        }
        if opts.substeps < 1 || opts.nu_max < 1 {
            return Err(Error::InvalidParameter("substeps and nu_max must be at least 1".into()));
        }
        let d = h.dim();
        let nt = opts.samples;
        let period = h.period();
        let omega = h.omega_d;

        let (propagators, u_period) = sample_propagators(h, nt, opts.substeps);
        let (mut q, lambdas) = schur_eigen(u_period);
        let mut eps: Vec<T> = lambdas.iter().map(|&l| fold(-l.im.atan2(l.re) / period, omega)).collect();

        let clusters = degenerate_clusters(&eps, omega, opts.degeneracy_tolerance);
        let mut warnings = Vec::new();
        for c in &clusters {
            resolve_cluster(h, &propagators, &mut q, c);
            warnings.push(format!("degenerate quasienergies within {:e} omega_d: states {:?}", opts.degeneracy_tolerance, c));
        }

        let times: Vec<T> = (0..nt).map(|i| period * lit::<T>(i as f64) / lit::<T>(nt as f64)).collect();
        let mut samples: Vec<DMatrix<Complex<T>>> = propagators
            .iter()
            .zip(&times)
            .map(|(u, &t)| {
                let mut phi = u * &q;
                for (n, &e) in eps.iter().enumerate() {
                    let ph = cis(e * t);
                    phi.column_mut(n).iter_mut().for_each(|z| *z *= ph);
                }
                phi
            })
            .collect();
        drop(propagators);

        let mut spectrum = time_to_fourier(&samples, d);
        // move every state to the zone of its dominant Fourier mode
        for n in 0..d {
            let mut best = (0usize, T::zero());
            for (k, mode) in spectrum.iter().enumerate() {
                let w = column_norm_sq(mode, n);
                if w > best.1 {
                    best = (k, w);
                }
            }
            let shift = signed_index(best.0, nt);
            if shift != 0 {
                eps[n] += lit::<T>(shift as f64) * omega;
                let old: Vec<Vec<Complex<T>>> = spectrum.iter().map(|m| m.column(n).iter().copied().collect()).collect();
                for (k, mode) in spectrum.iter_mut().enumerate() {
                    let src = (k as i64 + shift).rem_euclid(nt as i64) as usize;
                    mode.column_mut(n).iter_mut().zip(&old[src]).for_each(|(z, &o)| *z = o);
                }
                for (s, &t) in samples.iter_mut().zip(&times) {
                    let ph = cis(lit::<T>(shift as f64) * omega * t);
                    s.column_mut(n).iter_mut().for_each(|z| *z *= ph);
                }
            }
        }

        let max_l = (nt - 1) / 4;
        let tail = |l: usize| -> f64 {
            (0..d)
                .map(|n| {
                    spectrum
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| signed_index(*k, nt).unsigned_abs() as usize > l)
                        .map(|(_, m)| to_f64(column_norm_sq(m, n).sqrt()))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        };
        let mut l = opts.nu_max.min(max_l);
        if opts.auto_nu_max {
            while l < max_l && tail(l) > opts.tail_tolerance {
                l += 1;
            }
        }
        let tail_weight = tail(l);
        if tail_weight > opts.tail_tolerance {
            warnings.push(format!("Fourier tail {tail_weight:e} beyond nu_max = {l} exceeds tolerance"));
        }
        if opts.nu_max > max_l {
            warnings.push(format!("nu_max capped at {max_l} by the sample count"));
        }
        let fourier: Vec<DMatrix<Complex<T>>> = (-(l as i64)..=l as i64)
            .map(|nu| spectrum[nu.rem_euclid(nt as i64) as usize].clone())
            .collect();

        let mut fb = Self {
            dim: d,
            omega_d: omega,
            quasienergies: eps,
            nu_max: l,
            fourier,
            samples,
            reconstruction_error: 0.0,
            tail_weight,
            degenerate_clusters: clusters,
            warnings,
        };
        fb.reconstruction_error = fb.max_reconstruction_error(&times);
        Ok(fb)
    }

    fn max_reconstruction_error(&self, times: &[T]) -> f64 {
        let mut worst = 0.0f64;
        for (s, &t) in self.samples.iter().zip(times) {
            let r = self.periodic_states(t);
            for n in 0..self.dim {
                let e = (s.column(n) - r.column(n)).iter().map(|z| to_f64(z.norm_sqr())).sum::<f64>().sqrt();
                worst = worst.max(e);
            }
        }
        worst
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega_d(&self) -> T {
        self.omega_d
    }

    pub fn period(&self) -> T {
        T::two_pi() / self.omega_d
    }

    /// Quasienergies in the zone of each state's dominant Fourier mode.
    pub fn quasienergies(&self) -> &[T] {
        &self.quasienergies
    }

    /// Quasienergies folded into `[-omega_d / 2, omega_d / 2)`.
    pub fn folded_quasienergies(&self) -> Vec<T> {
        self.quasienergies.iter().map(|&e| fold(e, self.omega_d)).collect()
    }

    pub fn nu_max(&self) -> usize {
        self.nu_max
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn sample_time(&self, i: usize) -> T {
        self.period() * lit::<T>(i as f64) / lit::<T>(self.samples.len() as f64)
    }

    /// Raw periodic states at sample `i`, one per column.
    pub fn sample(&self, i: usize) -> &DMatrix<Complex<T>> {
        &self.samples[i]
    }

    /// `phi~(nu)` for all states, one per column; zero outside `[-nu_max, nu_max]`.
    pub fn fourier_modes(&self, nu: i64) -> DMatrix<Complex<T>> {
        let l = self.nu_max as i64;
        if nu.abs() > l {
            DMatrix::zeros(self.dim, self.dim)
        } else {
            self.fourier[(nu + l) as usize].clone()
        }
    }

    pub(crate) fn fourier_ref(&self, nu: i64) -> Option<&DMatrix<Complex<T>>> {
        let l = self.nu_max as i64;
        (nu.abs() <= l).then(|| &self.fourier[(nu + l) as usize])
    }

    /// `phi_n(t) = sum_nu exp(-i nu omega_d t) phi~_n(nu)`, one per column.
    pub fn periodic_states(&self, t: T) -> DMatrix<Complex<T>> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        let l = self.nu_max as i64;
        for (k, m) in self.fourier.iter().enumerate() {
            let nu = k as i64 - l;
            out += m * cis(-lit::<T>(nu as f64) * self.omega_d * t);
        }
        out
    }

    /// `psi_n(t) = exp(-i eps_n t) phi_n(t)`, one per column.
    pub fn floquet_states(&self, t: T) -> DMatrix<Complex<T>> {
        let mut phi = self.periodic_states(t);
        for (n, &e) in self.quasienergies.iter().enumerate() {
            let ph = cis(-e * t);
            phi.column_mut(n).iter_mut().for_each(|z| *z *= ph);
        }
        phi
    }

    /// Largest `||phi_n(t_i) - sum_nu exp(-i nu omega_d t_i) phi~_n(nu)||` over the samples.
    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    /// Discarded Fourier weight `max_n sum_{|nu| > nu_max} ||phi~_n(nu)||`.
    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    pub fn degenerate_clusters(&self) -> &[Vec<usize>] {
        &self.degenerate_clusters
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Relabels state `n` with `eps_n + k omega_d` and `phi~_n(mu) -> phi~_n(mu + k)`.
    ///
    /// `nu_max` grows by `|k|` so no Fourier weight is lost; the physical
    /// Floquet state is unchanged.
    pub fn shift_zone(&self, n: usize, k: i64) -> Self {
        let pad = k.unsigned_abs() as usize;
        let l_new = self.nu_max + pad;
        let mut fourier = vec![DMatrix::zeros(self.dim, self.dim); 2 * l_new + 1];
        for (idx, m) in self.fourier.iter().enumerate() {
            let nu = idx as i64 - self.nu_max as i64;
            fourier[(nu + l_new as i64) as usize] += m;
        }
        let old = fourier.clone();
        for (idx, mode) in fourier.iter_mut().enumerate() {
            let src = idx as i64 + k;
            let col: Vec<Complex<T>> = if (0..old.len() as i64).contains(&src) {
                old[src as usize].column(n).iter().copied().collect()
            } else {
                vec![Complex::new(T::zero(), T::zero()); self.dim]
            };
            mode.column_mut(n).iter_mut().zip(col).for_each(|(z, o)| *z = o);
        }
        let mut eps = self.quasienergies.clone();
        eps[n] += lit::<T>(k as f64) * self.omega_d;
        let mut samples = self.samples.clone();
        let nt = samples.len();
        for (i, s) in samples.iter_mut().enumerate() {
            let t = self.period() * lit::<T>(i as f64) / lit::<T>(nt as f64);
            let ph = cis(lit::<T>(k as f64) * self.omega_d * t);
            s.column_mut(n).iter_mut().for_each(|z| *z *= ph);
        }
        Self {
            quasienergies: eps,
            nu_max: l_new,
            fourier,
            samples,
            ..self.clone()
        }
    }
}

/// Folds into `[-omega / 2, omega / 2)`.
fn fold<T: Real>(e: T, omega: T) -> T {
    let half = lit::<T>(0.5) * omega;
    let mut x = e - omega * ((e + half) / omega).floor();
    if x >= half {
        x -= omega;
    }
    x
}

fn signed_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn column_norm_sq<T: Real>(m: &DMatrix<Complex<T>>, n: usize) -> T {
    m.column(n).iter().map(|z| z.norm_sqr()).sum()
}

/// `U(t_i)` for `i < N_t` and `U(T_d)`, from midpoint exponentials. Steps `j`
/// and `S - 1 - j` of a cosine drive see the same Hamiltonian and share one
/// exponential.
fn sample_propagators<T: Real>(
    h: &DickeHamiltonian<T>,
    nt: usize,
    substeps: usize,
) -> (Vec<DMatrix<Complex<T>>>, DMatrix<Complex<T>>) {
    let d = h.dim();
    let steps = nt * substeps;
    let dt = h.period() / lit::<T>(steps as f64);
    let half = lit::<T>(0.5);
    let unique = steps.div_ceil(2);
    let exps: Vec<DMatrix<Complex<T>>> = (0..unique)
        .map(|j| {
            let t = (lit::<T>(j as f64) + half) * dt;
            let (vals, vecs) = h.real_at(t).eigh();
            let mut a = vecs.map(|x| Complex::new(x, T::zero()));
            for (c, &l) in vals.iter().enumerate() {
                let ph = cis(-l * dt);
                a.column_mut(c).iter_mut().for_each(|z| *z *= ph);
            }
            a * vecs.transpose().map(|x| Complex::new(x, T::zero()))
        })
        .collect();
    let mut u = DMatrix::<Complex<T>>::identity(d, d);
    let mut out = Vec::with_capacity(nt);
    for j in 0..steps {
        if j % substeps == 0 {
            out.push(u.clone());
        }
        let e = &exps[j.min(steps - 1 - j)];
        u = e * u;
    }
    (out, u)
}

/// Unitary Schur vectors and eigenvalues of `U(T_d)`; for a normal matrix the
/// Schur vectors are eigenvectors.
fn schur_eigen<T: Real>(u: DMatrix<Complex<T>>) -> (DMatrix<Complex<T>>, Vec<Complex<T>>) {
    let (q, t) = Schur::new(u).unpack();
    let lambdas = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    (q, lambdas)
}

/// Groups indices whose folded quasienergies lie within `tol * omega`, including across the zone edge.
fn degenerate_clusters<T: Real>(eps: &[T], omega: T, tol: f64) -> Vec<Vec<usize>> {
    let w = to_f64(omega);
    let mut order: Vec<usize> = (0..eps.len()).collect();
    order.sort_by(|&a, &b| eps[a].partial_cmp(&eps[b]).unwrap());
    let x: Vec<f64> = order.iter().map(|&i| to_f64(eps[i])).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && x[pos] - x[pos - 1] <= tol * w {
            groups.last_mut().unwrap().push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    if groups.len() > 1 {
        let wrap = x[0] + w - x[x.len() - 1];
        if wrap <= tol * w {
            let first = groups.remove(0);
            groups.last_mut().unwrap().extend(first);
        }
    }
    groups.into_iter().filter(|g| g.len() > 1).map(|mut g| {
        g.sort_unstable();
        g
    }).collect()
}

/// Rotates a degenerate cluster onto the eigenbasis of its period-averaged energy.
fn resolve_cluster<T: Real>(
    h: &DickeHamiltonian<T>,
    propagators: &[DMatrix<Complex<T>>],
    q: &mut DMatrix<Complex<T>>,
    cluster: &[usize],
) {
    let d = q.nrows();
    let k = cluster.len();
    let qc = DMatrix::from_fn(d, k, |i, j| q[(i, cluster[j])]);
    let nt = propagators.len();
    let mut mean = DMatrix::<Complex<T>>::zeros(k, k);
    for (i, u) in propagators.iter().enumerate() {
        let t = h.period() * lit::<T>(i as f64) / lit::<T>(nt as f64);
        let y = u * &qc;
        let hy = HermMatrix::from_real(&h.real_at(t)).as_matrix() * &y;
        mean += y.adjoint() * hy;
    }
    let (_, rot) = HermMatrix::hermitian_part(mean).eigh();
    let rotated = qc * rot;
    for (j, &c) in cluster.iter().enumerate() {
        q.column_mut(c).copy_from(&rotated.column(j));
    }
}

/// `phi~(nu) = (1/N) sum_i exp(+2 pi i nu i / N) phi(t_i)`, stored at index `nu mod N`.
fn time_to_fourier<T: Real>(samples: &[DMatrix<Complex<T>>], d: usize) -> Vec<DMatrix<Complex<T>>> {
    let nt = samples.len();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); d * d * nt];
    for (i, s) in samples.iter().enumerate() {
        for (e, z) in s.iter().enumerate() {
            buf[e * nt + i] = *z;
        }
    }
    T::fft_chunks(&mut buf, nt, true);
    let scale = T::one() / lit::<T>(nt as f64);
    (0..nt)
        .map(|k| DMatrix::from_iterator(d, d, (0..d * d).map(|e| buf[e * nt + k] * scale)))
        .collect()
}

/// `max |<phi_m(0)|phi_n(0)> - delta_mn|`.
pub fn orthonormality_defect<T: Real>(fb: &FloquetBasis<T>) -> f64 {
    let s = fb.sample(0);
    let g = s.adjoint() * s;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max(to_f64(modulus(g[(i, j)] - Complex::new(target, T::zero()))));
        }
    }
    worst
}
