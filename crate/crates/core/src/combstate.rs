//! Gaussian ground state of the pumped polariton comb.
//!
//! Quadratures are ordered `(q_{-N} .. q_N, p_{-N} .. p_N)` and `hbar = 1`.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{trace_sqrt_product, HermMatrix, SymMatrix, PD_TOLERANCE};
use crate::microcavity::{effective_potential, polariton_energies, Branch, MicrocavityParams};
use crate::phasematch::PumpComb;
use crate::scalar::{lit, to_f64, Real};

/// Pair coupling `R_{mn} = (1/2)(R_X^2/A) V^{1111}(k_m, k_n, k_n - k_m) P_m P_n`.
///
/// The potential is not symmetric under `m <-> n`; only the symmetric part
/// couples to `a_m^dagger a_n^dagger`, so that is what is returned.
pub fn coupling_matrix<T: Real>(p: &MicrocavityParams<T>, comb: &PumpComb<T>) -> SymMatrix<T> {
    let ks = comb.wave_vectors(p);
    let n = ks.len();
    let pre = lit::<T>(0.5) * p.exciton_area_ratio();
    let raw = DMatrix::from_fn(n, n, |m, j| {
        if m == j {
            T::zero()
        } else {
            let v = effective_potential(p, ks[m], ks[j], ks[j] - ks[m], [Branch::Lower; 4]);
            pre * v * comb.amplitudes[m] * comb.amplitudes[j]
        }
    });
    SymMatrix::symmetrized(raw)
}

/// Lower-branch energies `E_1(k_n)` of the comb modes.
pub fn mode_energies<T: Real>(p: &MicrocavityParams<T>, comb: &PumpComb<T>) -> Vec<T> {
    comb.wave_vectors(p).into_iter().map(|k| polariton_energies(p, k).0).collect()
}

/// `H = blockdiag(H_qq, H_pp)` of the quadrature Hamiltonian `xi . H xi`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm<T: Real> {
    pub hqq: SymMatrix<T>,
    pub hpp: SymMatrix<T>,
}

impl<T: Real> QuadraticForm<T> {
    pub fn new(hqq: SymMatrix<T>, hpp: SymMatrix<T>) -> Result<Self> {
        if hqq.dim() != hpp.dim() {
            return Err(Error::DimensionMismatch { expected: hqq.dim(), found: hpp.dim() });
        }
        Ok(Self { hqq, hpp })
    }

    /// `H_qq = D + S`, `H_pp = D - S` with `D = diag(E_1 / 2)` and `S = Re R`.
    pub fn from_energies(energies: &[T], r: &SymMatrix<T>) -> Result<Self> {
        if r.dim() != energies.len() {
            return Err(Error::DimensionMismatch { expected: energies.len(), found: r.dim() });
        }
        let half = lit::<T>(0.5);
        let n = energies.len();
        let s = DMatrix::from_fn(n, n, |i, j| if i == j { T::zero() } else { r.get(i, j) });
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, energies.iter().map(|&e| half * e)));
        Self::new(SymMatrix::symmetrized(&d + &s), SymMatrix::symmetrized(&d - &s))
    }

    pub fn n_modes(&self) -> usize {
        self.hqq.dim()
    }

    /// The full `2n x 2n` matrix `blockdiag(H_qq, H_pp)`.
    pub fn full(&self) -> DMatrix<T> {
        block_diag(self.hqq.as_matrix(), self.hpp.as_matrix())
    }
}

pub fn build_quadratic_form<T: Real>(p: &MicrocavityParams<T>, comb: &PumpComb<T>) -> Result<QuadraticForm<T>> {
    comb.validate()?;
    QuadraticForm::from_energies(&mode_energies(p, comb), &coupling_matrix(p, comb))
}

fn block_diag<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// Zero-mean pure Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState<T: Real> {
    pub n_modes: usize,
    /// Wave-function matrix, `psi(q) ~ exp(-q.Vq/2)`.
    pub v: SymMatrix<T>,
    /// Covariance `(1/2) blockdiag(V^{-1}, V)`.
    pub sigma: SymMatrix<T>,
    pub energy: T,
}

fn check_block<T: Real>(m: &SymMatrix<T>, block: &'static str) -> Result<()> {
    m.check_positive_definite().map_err(|e| match e {
        Error::NotPositiveDefinite { min_eigenvalue, .. } => Error::UnstableHamiltonian { block, min_eigenvalue },
        other => other,
    })
}

/// Exact ground state: `V Hpp V = Hqq`, solved as
/// `V = Hpp^{-1/2} (Hpp^{1/2} Hqq Hpp^{1/2})^{1/2} Hpp^{-1/2}`.
pub fn ground_state<T: Real>(qf: &QuadraticForm<T>) -> Result<GaussianState<T>> {
    check_block(&qf.hqq, "H_qq")?;
    check_block(&qf.hpp, "H_pp")?;
    let (lp, up) = qf.hpp.eigh();
    let root = scaled(&up, &lp, |l| l.sqrt());
    let inv_root = scaled(&up, &lp, |l| T::one() / l.sqrt());
    let middle = SymMatrix::symmetrized(&root * qf.hqq.as_matrix() * &root);
    let (lm, um) = middle.eigh();
    let tol = lit::<T>(PD_TOLERANCE) * lm.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if let Some(&bad) = lm.iter().find(|&&l| l <= tol) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: to_f64(bad), tolerance: to_f64(tol) });
    }
    let m_half = scaled(&um, &lm, |l| l.sqrt());
    let m_inv_half = scaled(&um, &lm, |l| T::one() / l.sqrt());
    let v = SymMatrix::symmetrized(&inv_root * m_half * &inv_root);
    let v_inv = SymMatrix::symmetrized(&root * m_inv_half * &root);
    let energy = trace_sqrt_product(&qf.hqq, &qf.hpp)?;
    let half = lit::<T>(0.5);
    let sigma = SymMatrix::symmetrized(block_diag(v_inv.as_matrix(), v.as_matrix()) * half);
    Ok(GaussianState { n_modes: qf.n_modes(), v, sigma, energy })
}

fn scaled<T: Real>(u: &DMatrix<T>, l: &[T], f: impl Fn(T) -> T) -> DMatrix<T> {
    let mut w = u.clone();
    for (j, &x) in l.iter().enumerate() {
        w.column_mut(j).scale_mut(f(x));
    }
    w * u.transpose()
}

/// `||V Hpp V - Hqq|| / ||Hqq||` in the Frobenius norm.
pub fn stationarity_residual<T: Real>(qf: &QuadraticForm<T>, gs: &GaussianState<T>) -> T {
    let v = gs.v.as_matrix();
    let r = v * qf.hpp.as_matrix() * v - qf.hqq.as_matrix();
    r.norm() / qf.hqq.as_matrix().norm()
}

/// `<a_j^dagger a_j> = (Sigma_qq + Sigma_pp - 1) / 2`.
pub fn mean_photon_numbers<T: Real>(gs: &GaussianState<T>) -> Vec<T> {
    let n = gs.n_modes;
    let half = lit::<T>(0.5);
    (0..n)
        .map(|j| half * (gs.sigma.get(j, j) + gs.sigma.get(n + j, n + j) - T::one()))
        .collect()
}

/// Standard symplectic form in `(q.., p..)` ordering.
pub fn symplectic_form<T: Real>(n: usize) -> DMatrix<T> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            T::one()
        } else if i == j + n {
            -T::one()
        } else {
            T::zero()
        }
    })
}

/// Symplectic eigenvalues of a covariance matrix, ascending.
///
/// Computed as the positive half of the spectrum of the Hermitian
/// `i Sigma^{1/2} Omega Sigma^{1/2}`, which shares its eigenvalues with `i Omega Sigma`.
pub fn symplectic_eigenvalues<T: Real>(sigma: &SymMatrix<T>) -> Result<Vec<T>> {
    let dim = sigma.dim();
    if dim % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: dim + 1, found: dim });
    }
    let root = crate::matfun::sym_power(sigma, lit(0.5))?;
    let omega = symplectic_form::<T>(dim / 2);
    let k = root.as_matrix() * omega * root.as_matrix();
    let h = HermMatrix::hermitian_part(k.map(|x| Complex::new(T::zero(), x)));
    let (vals, _) = h.eigh();
    Ok(vals[dim / 2..].to_vec())
}

/// Smallest eigenvalue of `Sigma + (i/2) Omega`; nonnegative for physical states.
pub fn uncertainty_min_eigenvalue<T: Real>(sigma: &SymMatrix<T>) -> T {
    let n = sigma.dim() / 2;
    let omega = symplectic_form::<T>(n);
    let half = lit::<T>(0.5);
    let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| Complex::new(sigma.get(i, j), half * omega[(i, j)]));
    HermMatrix::hermitian_part(m).eigh().0[0]
}

/// `Tr(H Sigma)` with `H = blockdiag(H_qq, H_pp)`.
pub fn quadratic_expectation<T: Real>(qf: &QuadraticForm<T>, sigma: &SymMatrix<T>) -> Result<T> {
    let n = qf.n_modes();
    if sigma.dim() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: sigma.dim() });
    }
    let h = qf.full();
    Ok(h.component_mul(sigma.as_matrix()).sum())
}

/// Uniform pump amplitude such that `rho(S) = fraction * min_n E_1(k_n) / 2`.
///
/// Both quadrature blocks then keep their smallest eigenvalue above
/// `(1 - fraction) min E_1 / 2`.
pub fn uniform_pump_for_margin<T: Real>(
    p: &MicrocavityParams<T>,
    template: &PumpComb<T>,
    fraction: T,
) -> Result<T> {
    if !(fraction > T::zero() && fraction < T::one()) {
        return Err(Error::InvalidParameter("stability fraction must lie in (0, 1)".into()));
    }
    let mut unit = template.clone();
    unit.amplitudes = vec![T::one(); unit.n_modes()];
    let r = coupling_matrix(p, &unit);
    let (vals, _) = r.eigh();
    let radius = vals.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if radius <= T::zero() {
        return Err(Error::DegenerateCoupling);
    }
    let e_min = mode_energies(p, &unit).into_iter().fold(T::max_value().unwrap(), |a, b| a.min(b));
    Ok((fraction * lit::<T>(0.5) * e_min / radius).sqrt())
}

/// Serialised form of a [`GaussianState`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct GaussianStateRecord {
    pub n_modes: usize,
    pub energy: f64,
    pub ordering: String,
    /// Row-major, `n_modes x n_modes`.
    pub V: Vec<f64>,
    /// Row-major, `2 n_modes x 2 n_modes`.
    pub Sigma: Vec<f64>,
}

impl<T: Real> GaussianState<T> {
    pub fn to_record(&self) -> GaussianStateRecord {
        let row_major = |m: &DMatrix<T>| {
            let mut out = Vec::with_capacity(m.len());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push(to_f64(m[(i, j)]));
                }
            }
            out
        };
        let n = self.n_modes as i64 / 2;
        GaussianStateRecord {
            n_modes: self.n_modes,
            energy: to_f64(self.energy),
            ordering: format!("q_{{{}}}..q_{{{}}},p_{{{}}}..p_{{{}}}", -n, n, -n, n),
            V: row_major(self.v.as_matrix()),
            Sigma: row_major(self.sigma.as_matrix()),
        }
    }
}
