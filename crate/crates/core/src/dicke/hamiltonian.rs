use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{HermMatrix, SymMatrix};
use crate::scalar::{lit, Real};

/// Driven Dicke model with two emitters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DickeParams<T> {
    /// Common cavity and emitter frequency.
    pub omega_r: T,
    /// Emitter-cavity coupling.
    pub g: T,
    /// Drive amplitude `Omega_d`.
    pub drive_amplitude: T,
    /// Drive frequency `omega_d`; equal to `omega_r` on resonance.
    pub drive_frequency: T,
    /// Ohmic bath coupling `lambda`, shared by all channels unless overridden.
    pub lambda: T,
    pub lambda_cavity: Option<T>,
    pub lambda_emitter: Option<T>,
    /// `k_B T / hbar omega_r`.
    pub temperature: T,
    /// Highest cavity Fock state kept.
    pub n_ph: usize,
}

impl<T: Real> DickeParams<T> {
    /// Resonant model `omega_c = omega_x = omega_d = 1`.
    pub fn resonant(g: T, drive_amplitude: T, lambda: T, temperature: T, n_ph: usize) -> Result<Self> {
        let p = Self {
            omega_r: T::one(),
            g,
            drive_amplitude,
            drive_frequency: T::one(),
            lambda,
            lambda_cavity: None,
            lambda_emitter: None,
            temperature,
            n_ph,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut vals = vec![self.omega_r, self.g, self.drive_amplitude, self.drive_frequency, self.lambda, self.temperature];
        vals.extend(self.lambda_cavity);
        vals.extend(self.lambda_emitter);
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Dicke parameters"));
        }
        if self.n_ph < 1 {
            return Err(Error::InvalidParameter("n_ph must be at least 1".into()));
        }
        if !(self.omega_r > T::zero()) || !(self.drive_frequency > T::zero()) {
            return Err(Error::InvalidParameter("frequencies must be positive".into()));
        }
        if self.g < T::zero() {
            return Err(Error::InvalidParameter("g must be nonnegative".into()));
        }
        if self.temperature < T::zero() {
            return Err(Error::InvalidParameter("temperature must be nonnegative".into()));
        }
        for l in [Some(self.lambda), self.lambda_cavity, self.lambda_emitter].into_iter().flatten() {
            if l < T::zero() {
                return Err(Error::InvalidParameter("bath couplings must be nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        4 * (self.n_ph + 1)
    }

    pub fn period(&self) -> T {
        T::two_pi() / self.drive_frequency
    }

    pub fn cavity_lambda(&self) -> T {
        self.lambda_cavity.unwrap_or(self.lambda)
    }

    pub fn emitter_lambda(&self) -> T {
        self.lambda_emitter.unwrap_or(self.lambda)
    }

    pub fn with_n_ph(&self, n_ph: usize) -> Self {
        Self { n_ph, ..self.clone() }
    }
}

/// Flattened basis index of `|n, q1, q2>`.
pub fn basis_index(n: usize, q1: usize, q2: usize) -> usize {
    n * 4 + q1 * 2 + q2
}

/// Operators of the truncated model; all are real.
#[derive(Clone, Debug)]
pub struct DickeHamiltonian<T: Real> {
    /// Static part.
    pub h0: SymMatrix<T>,
    /// `Omega_d (c + c^dagger)`, multiplied by `cos(omega_d t)`.
    pub drive: SymMatrix<T>,
    pub omega_d: T,
    pub n_ph: usize,
}

impl<T: Real> DickeHamiltonian<T> {
    pub fn new(p: &DickeParams<T>) -> Result<Self> {
        p.validate()?;
        let a = annihilation::<T>(p.n_ph);
        let x_c = symmetrize(&a);
        let s1 = emitter_lowering::<T>(p.n_ph, 0);
        let s2 = emitter_lowering::<T>(p.n_ph, 1);
        let sx = symmetrize(&s1) + symmetrize(&s2);
        let number = a.transpose() * &a;
        let excited = s1.transpose() * &s1 + s2.transpose() * &s2;
        let h0 = number * p.omega_r + excited * p.omega_r + (&x_c * &sx) * p.g;
        Ok(Self {
            h0: SymMatrix::symmetrized(h0),
            drive: SymMatrix::symmetrized(x_c * p.drive_amplitude),
            omega_d: p.drive_frequency,
            n_ph: p.n_ph,
        })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn period(&self) -> T {
        T::two_pi() / self.omega_d
    }

    /// Real symmetric `H(t)`.
    pub fn real_at(&self, t: T) -> SymMatrix<T> {
        let c = (self.omega_d * t).cos();
        SymMatrix::symmetrized(self.h0.as_matrix() + self.drive.as_matrix() * c)
    }

    pub fn at(&self, t: T) -> HermMatrix<T> {
        HermMatrix::from_real(&self.real_at(t))
    }
}

pub fn build_hamiltonian<T: Real>(p: &DickeParams<T>, t: T) -> Result<HermMatrix<T>> {
    Ok(DickeHamiltonian::new(p)?.at(t))
}

fn symmetrize<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    a + a.transpose()
}

/// Cavity `c` on the full space.
pub fn annihilation<T: Real>(n_ph: usize) -> DMatrix<T> {
    let d = 4 * (n_ph + 1);
    let mut m = DMatrix::zeros(d, d);
    for n in 1..=n_ph {
        for q in 0..4 {
            m[(basis_index(n - 1, 0, 0) + q, basis_index(n, 0, 0) + q)] = lit::<T>(n as f64).sqrt();
        }
    }
    m
}

/// `sigma_-` of emitter `j` (0 or 1) on the full space.
pub fn emitter_lowering<T: Real>(n_ph: usize, j: usize) -> DMatrix<T> {
    let d = 4 * (n_ph + 1);
    let mut m = DMatrix::zeros(d, d);
    for n in 0..=n_ph {
        for other in 0..2 {
            let (from, to) = if j == 0 {
                (basis_index(n, 1, other), basis_index(n, 0, other))
            } else {
                (basis_index(n, other, 1), basis_index(n, other, 0))
            };
            m[(to, from)] = T::one();
        }
    }
    m
}

/// `-i (A - A^dagger)` for a real `A`.
pub fn quadrature_coupling<T: Real>(a: &DMatrix<T>) -> HermMatrix<T> {
    let d = a.nrows();
    HermMatrix::hermitian_part(DMatrix::from_fn(d, d, |i, j| Complex::new(T::zero(), a[(j, i)] - a[(i, j)])))
}
