use std::collections::HashMap;

use nalgebra::{Complex, DMatrix, Matrix4, SVD};

use crate::dicke::bath::{lamb_shift_xi, rate_function_chi, thermal_occupation};
use crate::dicke::entanglement::TwoQubitState;
use crate::dicke::floquet::FloquetBasis;
use crate::dicke::hamiltonian::{annihilation, emitter_lowering, quadrature_coupling, DickeParams};
use crate::error::{Error, Result};
use crate::matfun::HermMatrix;
use crate::scalar::{cis, lit, modulus, to_f64, Real};

/// Exponential cutoff of the bath density used by the Lamb-shift integral, in units of `omega_r`.
pub const LAMB_SHIFT_CUTOFF: f64 = 10.0;


/// `X_{m,n,nu}` for `nu` in `[-range, range]`.
#[derive(Clone, Debug)]
pub struct TransitionTable<T: Real> {
    range: usize,
    entries: Vec<DMatrix<Complex<T>>>,
}

impl<T: Real> TransitionTable<T> {
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn dim(&self) -> usize {
        self.entries[0].nrows()
    }

    /// Matrix `X_{., ., nu}`; zero outside the stored range.
    pub fn at(&self, nu: i64) -> DMatrix<Complex<T>> {
        self.get(nu).cloned().unwrap_or_else(|| DMatrix::zeros(self.dim(), self.dim()))
    }

    pub fn get(&self, nu: i64) -> Option<&DMatrix<Complex<T>>> {
        let r = self.range as i64;
        (nu.abs() <= r).then(|| &self.entries[(nu + r) as usize])
    }

    pub fn element(&self, m: usize, n: usize, nu: i64) -> Complex<T> {
        self.get(nu).map_or(Complex::new(T::zero(), T::zero()), |x| x[(m, n)])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &DMatrix<Complex<T>>)> {
        let r = self.range as i64;
        self.entries.iter().enumerate().map(move |(k, x)| (k as i64 - r, x))
    }

    /// `sum_nu X_nu exp(-i nu omega_d t)`, which equals `<phi_m(t)|X|phi_n(t)>`.
    pub fn resum(&self, omega_d: T, t: T) -> DMatrix<Complex<T>> {
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (nu, x) in self.iter() {
            let th = -lit::<T>(nu as f64) * omega_d * t;
            out += x * Complex::new(th.cos(), th.sin());
        }
        out
    }
}

/// Transition elements `X_{m,n,nu} = sum_mu <phi~_m(mu - nu)|X|phi~_n(mu)>`.
///
/// The product of two band-limited periodic states has Fourier support in
/// `[-2 nu_max, 2 nu_max]`, so sampling `<phi_m(t)|X|phi_n(t)>` on
/// `4 nu_max + 1` points and transforming back is exact.
pub fn transition_elements<T: Real>(fb: &FloquetBasis<T>, x: &HermMatrix<T>) -> Result<TransitionTable<T>> {
    let d = fb.dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.dim() });
    }
    let l = fb.nu_max();
    let nx = 4 * l + 1;
    // phi(tau_j) = sum_nu exp(-2 pi i nu j / nx) phi~(nu): a forward transform
    let mut buf = vec![Complex::new(T::zero(), T::zero()); d * d * nx];
    for nu in -(l as i64)..=l as i64 {
        let slot = nu.rem_euclid(nx as i64) as usize;
        let m = fb.fourier_ref(nu).expect("within nu_max");
        for (e, z) in m.iter().enumerate() {
            buf[e * nx + slot] = *z;
        }
    }
    T::fft_chunks(&mut buf, nx, false);
    let xm = x.as_matrix();
    let mut prod = vec![Complex::new(T::zero(), T::zero()); d * d * nx];
    for j in 0..nx {
        let phi = DMatrix::from_iterator(d, d, (0..d * d).map(|e| buf[e * nx + j]));
        let m = phi.adjoint() * xm * &phi;
        for (e, z) in m.iter().enumerate() {
            prod[e * nx + j] = *z;
        }
    }
    T::fft_chunks(&mut prod, nx, true);
    let scale = T::one() / lit::<T>(nx as f64);
    let range = 2 * l;
    let entries = (-(range as i64)..=range as i64)
        .map(|nu| {
            let slot = nu.rem_euclid(nx as i64) as usize;
            DMatrix::from_iterator(d, d, (0..d * d).map(|e| prod[e * nx + slot] * scale))
        })
        .collect();
    Ok(TransitionTable { range, entries })
}

/// Direct double sum over Fourier modes; reference for [`transition_elements`].
pub fn transition_elements_direct<T: Real>(fb: &FloquetBasis<T>, x: &HermMatrix<T>) -> Result<TransitionTable<T>> {
    let d = fb.dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.dim() });
    }
    let l = fb.nu_max() as i64;
    let xm = x.as_matrix();
    let xphi: Vec<DMatrix<Complex<T>>> = (-l..=l).map(|mu| xm * fb.fourier_ref(mu).unwrap()).collect();
    let entries = (-2 * l..=2 * l)
        .map(|nu| {
            let mut acc = DMatrix::zeros(d, d);
            for mu in -l..=l {
                if let Some(left) = fb.fourier_ref(mu - nu) {
                    acc += left.adjoint() * &xphi[(mu + l) as usize];
                }
            }
            acc
        })
        .collect();
    Ok(TransitionTable { range: 2 * l as usize, entries })
}

/// Coupling operators `-i(c - c^dagger)` and `-i(sigma_- - sigma_+)` of both emitters, with their `lambda`.
pub fn dissipation_channels<T: Real>(p: &DickeParams<T>) -> Vec<(HermMatrix<T>, T)> {
    vec![
        (quadrature_coupling(&annihilation::<T>(p.n_ph)), p.cavity_lambda()),
        (quadrature_coupling(&emitter_lowering::<T>(p.n_ph, 0)), p.emitter_lambda()),
        (quadrature_coupling(&emitter_lowering::<T>(p.n_ph, 1)), p.emitter_lambda()),
    ]
}

/// Secular Floquet master equation: population rates `W` and coherence decay `Z`.
#[derive(Clone, Debug)]
pub struct MasterEquation<T: Real> {
    /// `W[n][k]` is the rate `k -> n`; columns sum to zero.
    pub w: DMatrix<T>,
    /// `Z[m][n]` for `m != n`; the diagonal is zero.
    pub z: DMatrix<Complex<T>>,
    /// Total out-scattering rate `Gamma_m`, including `k = m` terms.
    pub gamma: Vec<T>,
    pub lamb_shift: bool,
}

/// Builds `W` and `Z` from the three dissipation channels.
pub fn build_master_equation<T: Real>(fb: &FloquetBasis<T>, p: &DickeParams<T>, lamb_shift: bool) -> Result<MasterEquation<T>> {
    let channels = dissipation_channels(p);
    let mut tables = Vec::with_capacity(channels.len());
    for (x, lam) in &channels {
        tables.push((transition_elements(fb, x)?, *lam));
    }
    Ok(master_from_tables(fb, p, &tables, lamb_shift))
}

pub(crate) fn master_from_tables<T: Real>(
    fb: &FloquetBasis<T>,
    p: &DickeParams<T>,
    tables: &[(TransitionTable<T>, T)],
    lamb_shift: bool,
) -> MasterEquation<T> {
    let d = fb.dim();
    let eps = fb.quasienergies();
    let omega = fb.omega_d();
    let (w0, temp) = (p.omega_r, p.temperature);
    // g[n][k] = sum_{ch, nu} chi(eps_k - eps_n + nu w) |X_{n,k,nu}|^2, rate k -> n
    let mut g = DMatrix::<T>::zeros(d, d);
    let mut xi = vec![T::zero(); d];
    let mut coherent = DMatrix::<Complex<T>>::zeros(d, d);
    for (table, lam) in tables {
        for (nu, x) in table.iter() {
            let shift = lit::<T>(nu as f64) * omega;
            for k in 0..d {
                for n in 0..d {
                    let a = x[(n, k)].norm_sqr();
                    if a == T::zero() {
                        continue;
                    }
                    let om = eps[k] - eps[n] + shift;
                    g[(n, k)] += rate_function_chi(om, *lam, w0, temp) * a;
                    if lamb_shift {
                        // loss of k through omega_{k,n,nu}
                        let s = lamb_shift_xi(to_f64(om), to_f64(*lam), to_f64(w0), to_f64(temp), LAMB_SHIFT_CUTOFF * to_f64(w0));
                        xi[k] += lit::<T>(s) * a;
                    }
                }
            }
            let c0 = rate_function_chi(shift, *lam, w0, temp);
            if c0 != T::zero() {
                let diag: Vec<Complex<T>> = (0..d).map(|m| x[(m, m)]).collect();
                for m in 0..d {
                    for n in 0..d {
                        coherent[(m, n)] += diag[m] * diag[n].conj() * Complex::new(c0, T::zero());
                    }
                }
            }
        }
    }
    let gamma: Vec<T> = (0..d).map(|m| g.column(m).iter().copied().sum()).collect();
    let mut w = g.clone();
    for n in 0..d {
        w[(n, n)] = T::zero();
    }
    for n in 0..d {
        let out: T = w.column(n).iter().copied().sum();
        w[(n, n)] = -out;
    }
    let half = lit::<T>(0.5);
    let z = DMatrix::from_fn(d, d, |m, n| {
        if m == n {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(half * (gamma[m] + gamma[n]), half * (xi[m] + xi[n])) - coherent[(m, n)]
        }
    });
    MasterEquation { w, z, gamma, lamb_shift }
}

impl<T: Real> MasterEquation<T> {
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// `max_n |sum_k W[k][n]|`.
    pub fn column_sum_defect(&self) -> f64 {
        (0..self.dim()).map(|n| to_f64(self.w.column(n).iter().copied().sum::<T>().abs())).fold(0.0, f64::max)
    }

    /// `min_{m != n} Re Z[m][n]`.
    pub fn min_coherence_decay(&self) -> f64 {
        let d = self.dim();
        let mut best = f64::INFINITY;
        for m in 0..d {
            for n in 0..d {
                if m != n {
                    best = best.min(to_f64(self.z[(m, n)].re));
                }
            }
        }
        best
    }
}

/// Density matrix `rho_{m,n}(t) = <psi_m(t)|rho|psi_n(t)>` in the Floquet basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FloquetDensityMatrix<T: Real> {
    pub rho: DMatrix<Complex<T>>,
    pub t: T,
}

impl<T: Real> FloquetDensityMatrix<T> {
    /// Validates Hermiticity, unit trace (1e-8) and diagonal range.
    pub fn new(rho: DMatrix<Complex<T>>, t: T) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::DimensionMismatch { expected: rho.nrows(), found: rho.ncols() });
        }
        let asym = (&rho - rho.adjoint()).iter().map(|z| to_f64(modulus(*z))).fold(0.0, f64::max);
        if asym > 1e-10f64.max(1e3 * T::EPS) {
            return Err(Error::NotHermitian(asym));
        }
        let tr = to_f64(rho.trace().re);
        if (tr - 1.0).abs() > 1e-8f64.max(1e3 * T::EPS) {
            return Err(Error::InvalidParameter(format!("density matrix has trace {tr}")));
        }
        let tol = 1e-10f64.max(1e3 * T::EPS);
        for i in 0..rho.nrows() {
            let p = to_f64(rho[(i, i)].re);
            if p < -tol || p > 1.0 + tol {
                return Err(Error::InvalidParameter(format!("population {p} outside [0, 1]")));
            }
        }
        Ok(Self { rho, t })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> T {
        self.rho.trace().re
    }

    pub fn populations(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).collect()
    }

    /// Diagonal state with no coherences.
    pub fn diagonal(p: &[T], t: T) -> Self {
        let n = p.len();
        let rho = DMatrix::from_fn(n, n, |i, j| if i == j { Complex::new(p[i], T::zero()) } else { Complex::new(T::zero(), T::zero()) });
        Self { rho, t }
    }

    /// Projects a full-space state given at `t = 0` onto the Floquet basis.
    pub fn from_full_state(fb: &FloquetBasis<T>, rho_full: &DMatrix<Complex<T>>) -> Result<Self> {
        let phi = fb.sample(0);
        let r = phi.adjoint() * rho_full * phi;
        Self::new((&r + r.adjoint()) * Complex::new(lit::<T>(0.5), T::zero()), T::zero())
    }
}

/// Thermal cavity at the bath temperature with both emitters in `|g>`.
pub fn thermal_initial_state<T: Real>(p: &DickeParams<T>) -> DMatrix<Complex<T>> {
    let d = p.dim();
    let omega = p.omega_r;
    let nbar = thermal_occupation(omega, p.temperature);
    let mut w: Vec<T> = (0..=p.n_ph)
        .map(|n| {
            if nbar == T::zero() {
                if n == 0 { T::one() } else { T::zero() }
            } else {
                (nbar / (T::one() + nbar)).powi(n as i32) / (T::one() + nbar)
            }
        })
        .collect();
    let s: T = w.iter().copied().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let mut rho = DMatrix::zeros(d, d);
    for (n, &x) in w.iter().enumerate() {
        rho[(4 * n, 4 * n)] = Complex::new(x, T::zero());
    }
    rho
}

/// Evolves `rho0` to each time in `times` (nondecreasing, `>= rho0.t`).
///
/// Populations follow `exp(W dt)`, cached per distinct step; coherences
/// decay as `exp(-Z (t - t0))`.
pub fn evolve<T: Real>(me: &MasterEquation<T>, rho0: &FloquetDensityMatrix<T>, times: &[T]) -> Result<Vec<FloquetDensityMatrix<T>>> {
    let d = me.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.dim() });
    }
    let mut cache: HashMap<u64, DMatrix<T>> = HashMap::new();
    let mut pop = nalgebra::DVector::from_vec(rho0.populations());
    let mut t_prev = rho0.t;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - t_prev;
        if dt < T::zero() {
            return Err(Error::InvalidParameter("evolution times must be nondecreasing".into()));
        }
        if dt > T::zero() {
            let key = to_f64(dt).to_bits();
            let e = cache.entry(key).or_insert_with(|| (&me.w * dt).exp());
            pop = &*e * pop;
        }
        t_prev = t;
        let elapsed = t - rho0.t;
        let mut rho = DMatrix::from_fn(d, d, |m, n| {
            if m == n {
                Complex::new(pop[m], T::zero())
            } else {
                let z = me.z[(m, n)];
                rho0.rho[(m, n)] * cis(-z.im * elapsed) * (-z.re * elapsed).exp()
            }
        });
        // exact Hermiticity despite independent rounding of Z[m][n] and Z[n][m]
        rho = (&rho + rho.adjoint()) * Complex::new(lit::<T>(0.5), T::zero());
        out.push(FloquetDensityMatrix { rho, t });
    }
    Ok(out)
}

/// Normalised null vector of `W` as a diagonal density matrix.
///
/// Slow but nonzero relaxation, such as between the two members of a
/// near-degenerate parity doublet, keeps the null space one-dimensional.
pub fn stationary_state<T: Real>(me: &MasterEquation<T>) -> Result<FloquetDensityMatrix<T>> {
    let svd = SVD::new(me.w.clone(), false, true);
    let s = &svd.singular_values;
    let max = s.iter().copied().fold(T::zero(), |a, b| a.max(b));
    // numerical rank: singular values below d * eps * s_max count as zero
    let tol = max * lit::<T>(s.len() as f64 * T::EPS);
    let null: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= tol).collect();
    if null.len() > 1 {
        return Err(Error::NonUniqueStationaryState(null.len()));
    }
    let idx = if null.is_empty() {
        (0..s.len()).min_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap()).unwrap()
    } else {
        null[0]
    };
    let vt = svd.v_t.expect("requested right singular vectors");
    let v: Vec<T> = vt.row(idx).iter().copied().collect();
    let sum: T = v.iter().copied().sum();
    let p: Vec<T> = v.iter().map(|&x| x / sum).collect();
    Ok(FloquetDensityMatrix::diagonal(&p, T::zero()))
}

/// Partial trace over the cavity of a full-space state (index `n * 4 + q`).
pub fn trace_out_cavity<T: Real>(rho_full: &DMatrix<Complex<T>>) -> Matrix4<Complex<T>> {
    let blocks = rho_full.nrows() / 4;
    let mut out = Matrix4::zeros();
    for n in 0..blocks {
        for a in 0..4 {
            for b in 0..4 {
                out[(a, b)] += rho_full[(4 * n + a, 4 * n + b)];
            }
        }
    }
    out
}

/// `sum_{m,n} rho_{m,n} |psi_m(t)><psi_n(t)|` with the basis states supplied as columns.
pub fn full_state<T: Real>(rho: &FloquetDensityMatrix<T>, psi: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    psi * &rho.rho * psi.adjoint()
}

/// Reduced emitter state at time `t`.
pub fn reduced_two_qubit<T: Real>(rho: &FloquetDensityMatrix<T>, fb: &FloquetBasis<T>, t: T) -> Result<TwoQubitState<T>> {
    if rho.dim() != fb.dim() {
        return Err(Error::DimensionMismatch { expected: fb.dim(), found: rho.dim() });
    }
    reduced_with_states(rho, &fb.floquet_states(t))
}

pub(crate) fn reduced_with_states<T: Real>(rho: &FloquetDensityMatrix<T>, psi: &DMatrix<Complex<T>>) -> Result<TwoQubitState<T>> {
    let r = trace_out_cavity(&full_state(rho, psi));
    let tr = r.trace();
    TwoQubitState::new(r / tr)
}
