use nalgebra::{Complex, DMatrix, Matrix4};

use crate::error::{Error, Result};
use crate::matfun::{HermMatrix, SYMMETRY_TOLERANCE};
use crate::scalar::{lit, modulus, to_f64, Real};

/// Eigenvalues of a two-qubit state down to this value count as zero.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-9;

/// Reduced state of the two emitters in the `|q1 q2>` basis (`g = 0`, `e = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState<T: Real> {
    rho: Matrix4<Complex<T>>,
}

impl<T: Real> TwoQubitState<T> {
    /// Validates Hermiticity, unit trace (1e-8) and eigenvalues `>= -1e-9`.
    pub fn new(rho: Matrix4<Complex<T>>) -> Result<Self> {
        let asym = (rho - rho.adjoint()).iter().map(|z| to_f64(modulus(*z))).fold(0.0, f64::max);
        let scale = rho.iter().map(|z| to_f64(modulus(*z))).fold(1.0, f64::max);
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("two-qubit state"));
        }
        if asym > SYMMETRY_TOLERANCE.max(1e3 * T::EPS) * scale {
            return Err(Error::NotHermitian(asym));
        }
        let tr = to_f64(rho.trace().re);
        if (tr - 1.0).abs() > 1e-8f64.max(1e3 * T::EPS) {
            return Err(Error::InvalidParameter(format!("two-qubit state has trace {tr}")));
        }
        let s = Self { rho: (rho + rho.adjoint()) * Complex::new(lit::<T>(0.5), T::zero()) };
        let min = s.eigenvalues()[0];
        if to_f64(min) < -NEGATIVE_EIGENVALUE_TOLERANCE {
            return Err(Error::InvalidState(to_f64(min)));
        }
        Ok(s)
    }

    /// Pure state `|psi>` (normalised here).
    pub fn pure(psi: [Complex<T>; 4]) -> Result<Self> {
        let v = nalgebra::Vector4::from(psi);
        let v = v / Complex::new(v.norm(), T::zero());
        Self::new(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Matrix4<Complex<T>> {
        &self.rho
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<T> {
        HermMatrix::hermitian_part(to_dynamic(&self.rho)).eigh().0
    }
}

fn to_dynamic<T: Real>(m: &Matrix4<Complex<T>>) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

/// `sigma_y (x) sigma_y`.
fn sigma_yy<T: Real>() -> Matrix4<Complex<T>> {
    let mut m = Matrix4::zeros();
    let one = Complex::new(T::one(), T::zero());
    m[(0, 3)] = -one;
    m[(1, 2)] = one;
    m[(2, 1)] = one;
    m[(3, 0)] = -one;
    m
}

/// Wootters concurrence.
///
/// Negative eigenvalues of the state within tolerance are clipped to zero
/// before the square root.
pub fn concurrence<T: Real>(state: &TwoQubitState<T>) -> Result<T> {
    let (vals, vecs) = HermMatrix::hermitian_part(to_dynamic(state.matrix())).eigh();
    if let Some(&v) = vals.iter().find(|&&v| to_f64(v) < -NEGATIVE_EIGENVALUE_TOLERANCE) {
        return Err(Error::InvalidState(to_f64(v)));
    }
    let mut sqrt_rho = DMatrix::<Complex<T>>::zeros(4, 4);
    for (k, &v) in vals.iter().enumerate() {
        let s = Complex::new(v.max(T::zero()).sqrt(), T::zero());
        let col = vecs.column(k);
        sqrt_rho += (&col * col.adjoint()) * s;
    }
    let yy = to_dynamic(&sigma_yy::<T>());
    let rho = to_dynamic(state.matrix());
    let tilde = &yy * rho.map(|z| z.conj()) * &yy;
    let r = &sqrt_rho * tilde * &sqrt_rho;
    let (mut lam, _) = HermMatrix::hermitian_part(r).eigh();
    lam.iter_mut().for_each(|l| *l = l.max(T::zero()).sqrt());
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let c = lam[0] - lam[1] - lam[2] - lam[3];
    Ok(c.max(T::zero()).min(T::one()))
}

/// Entanglement of formation from a concurrence `c` in `[0, 1]`.
pub fn eof_from_concurrence<T: Real>(c: T) -> T {
    let c = c.max(T::zero()).min(T::one());
    let eta = (T::one() + (T::one() - c * c).max(T::zero()).sqrt()) * lit::<T>(0.5);
    let h = |x: T| if x > T::zero() { -x * x.log2() } else { T::zero() };
    (h(eta) + h(T::one() - eta)).max(T::zero()).min(T::one())
}

/// Entanglement of formation; always equals `eof_from_concurrence(concurrence(state))`.
pub fn eof<T: Real>(state: &TwoQubitState<T>) -> Result<T> {
    concurrence(state).map(eof_from_concurrence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn bell() -> TwoQubitState<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        TwoQubitState::pure([c(0.0), c(s), c(s), c(0.0)]).unwrap()
    }

    fn werner(p: f64) -> TwoQubitState<f64> {
        let b = bell().matrix().clone();
        TwoQubitState::new(b * c(p) + Matrix4::identity() * c((1.0 - p) / 4.0)).unwrap()
    }

    #[test]
    fn bell_state() {
        let b = bell();
        assert_relative_eq!(concurrence(&b).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(eof(&b).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn product_states() {
        let g = TwoQubitState::pure([c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(concurrence(&g).unwrap(), 0.0);
        assert_eq!(eof(&g).unwrap(), 0.0);
        // (|0> + i|1>) (x) (|0> - |1>)
        let a = [c(1.0), Complex::new(0.0, 1.0)];
        let b = [c(1.0), c(-1.0)];
        let psi = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        let s = TwoQubitState::pure(psi).unwrap();
        assert!(concurrence(&s).unwrap() < 1e-7);
    }

    #[test]
    fn werner_family() {
        assert_relative_eq!(concurrence(&werner(0.5)).unwrap(), 0.25, epsilon = 1e-12);
        for k in 0..=20 {
            let p = k as f64 * 0.05;
            // R has eigenvalues ((1+3p)/4)^2 and ((1-p)/4)^2 (three-fold)
            let l1 = (1.0 + 3.0 * p) / 4.0;
            let l2 = (1.0 - p) / 4.0;
            let expect = (l1 - 3.0 * l2).max(0.0);
            assert_relative_eq!(concurrence(&werner(p)).unwrap(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn eof_values() {
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        assert_relative_eq!(eof_from_concurrence(1.0), 1.0, epsilon = 1e-15);
        let expect = -0.9 * 0.9f64.log2() - 0.1 * 0.1f64.log2();
        assert_relative_eq!(eof_from_concurrence(0.6), expect, epsilon = 1e-14);
        let mut prev = -1.0;
        for k in 0..=100 {
            let e = eof_from_concurrence(k as f64 / 100.0);
            assert!(e > prev);
            prev = e;
        }
    }

    #[test]
    fn eof_uses_concurrence() {
        for k in 0..=10 {
            let w = werner(k as f64 / 10.0);
            assert_eq!(eof(&w).unwrap(), eof_from_concurrence(concurrence(&w).unwrap()));
        }
    }

    #[test]
    fn invalid_states_rejected() {
        let mut m = Matrix4::<Complex<f64>>::identity() * c(0.25);
        m[(0, 0)] = c(-0.1);
        m[(1, 1)] = c(0.6);
        assert!(matches!(TwoQubitState::new(m), Err(Error::InvalidState(_))));
        let m = Matrix4::<Complex<f64>>::identity() * c(0.3);
        assert!(TwoQubitState::new(m).is_err());
        // a tiny negative eigenvalue is clipped
        let mut m = bell().matrix().clone() * c(1.0 + 4e-10);
        m[(0, 0)] = c(-4e-10);
        m[(3, 3)] = c(-4e-10);
        let s = TwoQubitState::new(m).unwrap();
        assert!((concurrence(&s).unwrap() - 1.0).abs() < 1e-6);
    }
}
