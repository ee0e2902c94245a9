//! Dense symmetric and Hermitian matrix functions, and the time-ordered
//! propagator used to build Floquet states.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{cis, lit, modulus, to_f64, Real};

/// Relative eigenvalue floor below which a matrix is not treated as positive definite.
pub const PD_TOLERANCE: f64 = 1e-12;

/// Relative tolerance on `a_ij - a_ji` accepted by the checked constructors.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Default number of piecewise-constant steps per drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 1 << 10;

fn symmetry_tolerance<T: Real>() -> f64 {
    SYMMETRY_TOLERANCE.max(64.0 * T::EPS)
}

/// Real symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T: Real>(DMatrix<T>);

impl<T: Real> SymMatrix<T> {
    /// Validates squareness, finiteness and symmetry, then stores the exactly
    /// symmetrised matrix.
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix"));
        }
        let scale = to_f64(m.amax()).max(f64::MIN_POSITIVE);
        let asym = to_f64((&m - m.transpose()).amax());
        if asym > symmetry_tolerance::<T>() * scale {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self::symmetrized(m))
    }

    /// Takes the symmetric part `(m + m^T)/2` without validation.
    pub fn symmetrized(m: DMatrix<T>) -> Self {
        let half = lit::<T>(0.5);
        let t = m.transpose();
        Self((m + t) * half)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.0
    }

    pub fn trace(&self) -> T {
        self.0.trace()
    }

    /// Principal submatrix on the given (sorted or unsorted) index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self(DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.0[(idx[i], idx[j])]))
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigh(&self) -> (Vec<T>, DMatrix<T>) {
        let eig = SymmetricEigen::new(self.0.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigh().0[0]
    }

    /// Checked positive-definiteness under [`PD_TOLERANCE`].
    pub fn check_positive_definite(&self) -> Result<()> {
        let (values, _) = self.eigh();
        check_spectrum(&values).map(|_| ())
    }
}

/// Returns `(min, tolerance)` if the spectrum passes the positivity test.
fn check_spectrum<T: Real>(values: &[T]) -> Result<(T, T)> {
    let min = values.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    let max = values.iter().copied().fold(T::min_value().unwrap(), |a, b| a.max(b));
    let tol = lit::<T>(PD_TOLERANCE) * max.abs();
    if max <= T::zero() || min <= tol {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: to_f64(min),
            tolerance: to_f64(tol),
        });
    }
    Ok((min, tol))
}

/// Complex Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMatrix<T: Real>(DMatrix<Complex<T>>);

impl<T: Real> HermMatrix<T> {
    pub fn new(m: DMatrix<Complex<T>>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Hermitian matrix"));
        }
        let scale = m.iter().map(|&z| to_f64(modulus(z))).fold(f64::MIN_POSITIVE, f64::max);
        let defect = (&m - m.adjoint()).iter().map(|&z| to_f64(modulus(z))).fold(0.0, f64::max);
        if defect > symmetry_tolerance::<T>() * scale {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::hermitian_part(m))
    }

    /// Takes `(m + m^dagger)/2` without validation.
    pub fn hermitian_part(m: DMatrix<Complex<T>>) -> Self {
        let a = m.adjoint();
        Self((m + a).map(|z| z * lit::<T>(0.5)))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn from_real(s: &SymMatrix<T>) -> Self {
        Self(s.as_matrix().map(|x| Complex::new(x, T::zero())))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex<T>> {
        self.0
    }

    /// Real eigenvalues (ascending) and unitary eigenvector matrix.
    pub fn eigh(&self) -> (Vec<T>, DMatrix<Complex<T>>) {
        let eig = SymmetricEigen::new(self.0.clone());
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        (values, vectors)
    }
}

/// `A^p` from the spectral decomposition `U diag(lambda^p) U^T`.
///
/// Requires positive definiteness unless `p` is a positive integer.
pub fn sym_power<T: Real>(a: &SymMatrix<T>, p: T) -> Result<SymMatrix<T>> {
    let (values, vectors) = a.eigh();
    let integer_power = p > T::zero() && p == p.round();
    if !integer_power {
        check_spectrum(&values)?;
    }
    let powered: Vec<T> = values
        .iter()
        .map(|&l| if integer_power { integer_pow(l, p) } else { l.powf(p) })
        .collect();
    Ok(spectral_compose(&vectors, &powered))
}

fn integer_pow<T: Real>(x: T, p: T) -> T {
    let n = to_f64(p) as i32;
    x.powi(n)
}

fn spectral_compose<T: Real>(vectors: &DMatrix<T>, values: &[T]) -> SymMatrix<T> {
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(l);
    }
    SymMatrix::symmetrized(scaled * vectors.transpose())
}

/// `Tr((A^{1/2} B A^{1/2})^{1/2})`, the sum of square roots of the eigenvalues of `AB`.
pub fn trace_sqrt_product<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let root = sym_power(a, lit(0.5))?;
    let m = SymMatrix::symmetrized(root.as_matrix() * b.as_matrix() * root.as_matrix());
    let (values, _) = m.eigh();
    check_spectrum(&values)?;
    Ok(values.iter().map(|&l| l.sqrt()).sum())
}

/// `exp(-i H dt)` for Hermitian `H`.
pub fn expm_hermitian<T: Real>(h: &HermMatrix<T>, dt: T) -> DMatrix<Complex<T>> {
    let (values, vectors) = h.eigh();
    expm_from_eigh(&values, &vectors, dt)
}

pub(crate) fn expm_from_eigh<T: Real>(
    values: &[T],
    vectors: &DMatrix<Complex<T>>,
    dt: T,
) -> DMatrix<Complex<T>> {
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        let phase = cis(-l * dt);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    scaled * vectors.adjoint()
}

/// Time-ordered propagator from `t0` to `t1` as a product of `steps`
/// exponentials of `H` sampled at the midpoint of each step.
pub fn propagate_unitary<T, F>(mut h_of_t: F, t0: T, t1: T, steps: usize) -> DMatrix<Complex<T>>
where
    T: Real,
    F: FnMut(T) -> HermMatrix<T>,
{
    assert!(steps >= 1, "propagate_unitary needs at least one step");
    let dt = (t1 - t0) / lit::<T>(steps as f64);
    let half = lit::<T>(0.5);
    let mut u: Option<DMatrix<Complex<T>>> = None;
    for j in 0..steps {
        let t_mid = t0 + (lit::<T>(j as f64) + half) * dt;
        let step = expm_hermitian(&h_of_t(t_mid), dt);
        u = Some(match u {
            None => step,
            Some(prev) => step * prev,
        });
    }
    u.expect("at least one step")
}

/// `max |(U^dagger U - I)_ij|`.
pub fn unitarity_defect<T: Real>(u: &DMatrix<Complex<T>>) -> T {
    let n = u.nrows();
    let g = u.adjoint() * u - DMatrix::<Complex<T>>::identity(n, n);
    g.iter().map(|&z| modulus(z)).fold(T::zero(), |a, b| a.max(b))
}

/// Frobenius norm of a real matrix.
pub fn frobenius<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().map(|&x| x * x).sum::<T>().sqrt()
}
