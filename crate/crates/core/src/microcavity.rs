//! Polariton physics of a planar semiconductor microcavity.
//!
//! Units: energies in eV, in-plane wave vectors carried as the energy `hbar c k`
//! (also eV). The dimensionless `hbar c k / E_C` used for reporting is obtained
//! with [`WaveVector2D::reduced`] and [`WaveVector2D::from_reduced`].

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Material and cavity constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrocavityParams<T> {
    /// Cavity photon energy at normal incidence.
    pub e_c: T,
    /// Exciton energy (dispersionless).
    pub e_x: T,
    /// Half the vacuum Rabi splitting.
    pub hbar_omega: T,
    /// Exciton binding energy.
    pub e_b: T,
    /// Exciton radius.
    pub r_x: T,
    /// Sample surface area.
    pub area: T,
}

impl<T: Real> MicrocavityParams<T> {
    pub fn new(e_c: T, e_x: T, hbar_omega: T, e_b: T, r_x: T, area: T) -> Result<Self> {
        let p = Self { e_c, e_x, hbar_omega, e_b, r_x, area };
        p.validate()?;
        Ok(p)
    }

    /// Resonant GaAs-like cavity: `E_C = E_X = 1.5 eV`, `hbar Omega = 2 meV`,
    /// `E_b = 10 meV`, unit `R_X^2 / A`.
    pub fn resonant_default() -> Self {
        Self {
            e_c: lit(1.5),
            e_x: lit(1.5),
            hbar_omega: lit(2e-3),
            e_b: lit(1e-2),
            r_x: T::one(),
            area: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.e_c, self.e_x, self.hbar_omega, self.e_b, self.r_x, self.area];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("microcavity parameters"));
        }
        for (name, v) in [("E_C", self.e_c), ("E_X", self.e_x), ("hbar_omega", self.hbar_omega), ("E_b", self.e_b)] {
            if v <= T::zero() {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.area <= T::zero() {
            return Err(Error::InvalidParameter("area must be positive".into()));
        }
        Ok(())
    }

    /// Normalised detuning `(E_C - E_X) / (2 hbar Omega)`.
    pub fn detuning(&self) -> T {
        (self.e_c - self.e_x) / (lit::<T>(2.0) * self.hbar_omega)
    }

    /// Splitting to binding energy ratio `2 hbar Omega / E_b`.
    pub fn splitting_ratio(&self) -> T {
        lit::<T>(2.0) * self.hbar_omega / self.e_b
    }

    /// `R_X^2 / A`.
    pub fn exciton_area_ratio(&self) -> T {
        self.r_x * self.r_x / self.area
    }
}

/// In-plane wave vector, stored as `hbar c k` in eV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveVector2D<T> {
    pub kx: T,
    pub ky: T,
}

impl<T: Real> WaveVector2D<T> {
    pub fn new(kx: T, ky: T) -> Self {
        Self { kx, ky }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn along_x(kx: T) -> Self {
        Self::new(kx, T::zero())
    }

    /// From the dimensionless components `hbar c k / E_C`.
    pub fn from_reduced(ux: T, uy: T, e_c: T) -> Self {
        Self::new(ux * e_c, uy * e_c)
    }

    /// Dimensionless components `hbar c k / E_C`.
    pub fn reduced(&self, e_c: T) -> (T, T) {
        (self.kx / e_c, self.ky / e_c)
    }

    pub fn norm(&self) -> T {
        self.kx.hypot(self.ky)
    }

    pub fn norm_squared(&self) -> T {
        self.kx * self.kx + self.ky * self.ky
    }
}

impl<T: Real> std::ops::Add for WaveVector2D<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.kx + o.kx, self.ky + o.ky)
    }
}

impl<T: Real> std::ops::Sub for WaveVector2D<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.kx - o.kx, self.ky - o.ky)
    }
}

/// `E_C(k) = E_C sqrt(1 + (hbar c k / E_C)^2)`.
pub fn cavity_energy<T: Real>(p: &MicrocavityParams<T>, k: WaveVector2D<T>) -> T {
    cavity_energy_sq(p, k.norm_squared())
}

fn cavity_energy_sq<T: Real>(p: &MicrocavityParams<T>, k_sq: T) -> T {
    (p.e_c * p.e_c + k_sq).sqrt()
}

/// Lower and upper polariton energies `(E_1, E_2)`.
pub fn polariton_energies<T: Real>(p: &MicrocavityParams<T>, k: WaveVector2D<T>) -> (T, T) {
    polariton_energies_sq(p, k.norm_squared())
}

pub(crate) fn polariton_energies_sq<T: Real>(p: &MicrocavityParams<T>, k_sq: T) -> (T, T) {
    let ec = cavity_energy_sq(p, k_sq);
    let d = ec - p.e_x;
    let root = d.hypot(lit::<T>(2.0) * p.hbar_omega);
    let half = lit::<T>(0.5);
    let mean = half * (ec + p.e_x);
    (mean - half * root, mean + half * root)
}

/// Lower-branch energy depending on `|k|^2` only.
pub(crate) fn lower_energy_sq<T: Real>(p: &MicrocavityParams<T>, k_sq: T) -> T {
    polariton_energies_sq(p, k_sq).0
}

/// `rho_k = (E_2(k) - E_C(k)) / hbar Omega`, evaluated without cancellation.
fn hopfield_ratio<T: Real>(p: &MicrocavityParams<T>, k: WaveVector2D<T>) -> T {
    let d = cavity_energy(p, k) - p.e_x;
    let two_omega = lit::<T>(2.0) * p.hbar_omega;
    let root = d.hypot(two_omega);
    // E_2 - E_C = (root - d) / 2
    let gap = if d > T::zero() {
        lit::<T>(2.0) * p.hbar_omega * p.hbar_omega / (root + d)
    } else {
        lit::<T>(0.5) * (root - d)
    };
    gap / p.hbar_omega
}

/// Hopfield matrix `M`, indexed `M[(i, j)] = M_{i+1, j+1}`: row 0 is the
/// exciton component and column `j` the polariton branch.
pub fn hopfield<T: Real>(p: &MicrocavityParams<T>, k: WaveVector2D<T>) -> Matrix2<T> {
    let rho = hopfield_ratio(p, k);
    let norm = (T::one() + rho * rho).sqrt();
    let m11 = T::one() / norm;
    let m12 = rho / norm;
    Matrix2::new(m11, m12, -m12, m11)
}

/// Polariton branch label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Lower = 1,
    Upper = 2,
}

impl Branch {
    fn col(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(j: usize) -> Result<Self> {
        match j {
            1 => Ok(Branch::Lower),
            2 => Ok(Branch::Upper),
            _ => Err(Error::InvalidParameter(format!("branch index {j} not in {{1,2}}"))),
        }
    }
}

/// Branch-dependent pair potential `V^{j1 j2 j3 j4}_{k, k', q}`: exchange term
/// `12 E_b` and saturation term `16 pi / 7 hbar Omega`, with outgoing legs
/// `k + q`, `k' - q` and incoming legs `k`, `k'`.
pub fn effective_potential<T: Real>(
    p: &MicrocavityParams<T>,
    k: WaveVector2D<T>,
    kp: WaveVector2D<T>,
    q: WaveVector2D<T>,
    branches: [Branch; 4],
) -> T {
    let legs = [k + q, kp - q, k, kp];
    let m: Vec<Matrix2<T>> = legs.iter().map(|&v| hopfield(p, v)).collect();
    let x = |leg: usize| m[leg][(0, branches[leg].col())];
    let c = |leg: usize| m[leg][(1, branches[leg].col())];
    let exchange = lit::<T>(12.0) * p.e_b * x(0) * x(1) * x(2) * x(3);
    let saturation = lit::<T>(16.0 * std::f64::consts::PI / 7.0)
        * p.hbar_omega
        * (c(0) * x(1) * x(2) * x(3) + x(0) * x(1) * x(2) * c(3));
    exchange - saturation
}

/// Signed pair mixing coefficient `alpha = V^{1222} / sqrt(V^{1222}^2 + V^{2122}^2)`
/// at pump wave vector `kp` and scattering wave vector `q`.
pub fn alpha_coefficient<T: Real>(p: &MicrocavityParams<T>, kp: WaveVector2D<T>, q: WaveVector2D<T>) -> Result<T> {
    use Branch::{Lower as L, Upper as U};
    let v1222 = effective_potential(p, kp, kp, q, [L, U, U, U]);
    let v2122 = effective_potential(p, kp, kp, q, [U, L, U, U]);
    let floor = lit::<T>(1e-30);
    if v1222.abs() < floor && v2122.abs() < floor {
        return Err(Error::DegenerateCoupling);
    }
    Ok(v1222 / v1222.hypot(v2122))
}

/// Product state of `N` branch-entangled polariton pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairState<T> {
    alphas: Vec<T>,
}

/// Coefficients below this count as zero in the Schmidt number.
pub const SCHMIDT_THRESHOLD: f64 = 1e-12;

impl<T: Real> PairState<T> {
    pub fn new(alphas: Vec<T>) -> Result<Self> {
        if alphas.iter().any(|&a| !(a >= T::zero() && a <= T::one())) {
            return Err(Error::InvalidParameter("pair coefficients must lie in [0, 1]".into()));
        }
        if alphas.len() > 24 {
            return Err(Error::InvalidParameter("at most 24 pairs supported".into()));
        }
        Ok(Self { alphas })
    }

    /// Accepts signed coefficients; the sign is a local phase and is dropped.
    pub fn from_signed(alphas: &[T]) -> Result<Self> {
        Self::new(alphas.iter().map(|a| a.abs()).collect())
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }
}

/// Schmidt coefficients across the lower/upper branch cut, sorted descending.
pub fn schmidt_coefficients<T: Real>(s: &PairState<T>) -> Vec<T> {
    let mut coeffs = vec![T::one()];
    for &a in &s.alphas {
        let b = (T::one() - a * a).max(T::zero()).sqrt();
        coeffs = coeffs.iter().flat_map(|&c| [c * a, c * b]).collect();
    }
    coeffs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    coeffs
}

/// Number of Schmidt coefficients above [`SCHMIDT_THRESHOLD`].
pub fn schmidt_number<T: Real>(s: &PairState<T>) -> usize {
    let thr = lit::<T>(SCHMIDT_THRESHOLD);
    schmidt_coefficients(s).into_iter().filter(|&c| c > thr).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use Branch::{Lower as L, Upper as U};

    fn reference() -> MicrocavityParams<f64> {
        MicrocavityParams::resonant_default()
    }

    #[test]
    fn cavity_energy_at_normal_incidence() {
        let p = reference();
        assert_eq!(cavity_energy(&p, WaveVector2D::zero()), 1.5);
        let k = WaveVector2D::from_reduced(0.015, 0.0, p.e_c);
        assert_relative_eq!(cavity_energy(&p, k), 1.5 * (1.0 + 0.015f64.powi(2)).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn cavity_energy_photon_asymptote() {
        let p = reference();
        for u in [10.0, 20.0, 100.0] {
            let k = WaveVector2D::from_reduced(u, 0.0, p.e_c);
            let light_line = u * p.e_c;
            assert!((cavity_energy(&p, k) - light_line).abs() / light_line < 0.01);
        }
    }

    #[test]
    fn resonance_splits_by_rabi() {
        let p = reference();
        let (e1, e2) = polariton_energies(&p, WaveVector2D::zero());
        assert_relative_eq!(e1, 1.498, epsilon = 1e-12);
        assert_relative_eq!(e2, 1.502, epsilon = 1e-12);
    }

    #[test]
    fn decoupled_limit() {
        let mut p = reference();
        p.e_x = 1.49;
        p.hbar_omega = 1e-12;
        let k = WaveVector2D::from_reduced(0.02, 0.0, p.e_c);
        let (e1, e2) = polariton_energies(&p, k);
        assert_relative_eq!(e1, p.e_x, epsilon = 1e-12);
        assert_relative_eq!(e2, cavity_energy(&p, k), epsilon = 1e-12);
    }

    #[test]
    fn hopfield_at_resonance() {
        let p = reference();
        let m = hopfield(&p, WaveVector2D::zero());
        assert_relative_eq!(m[(0, 0)], std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(hopfield_ratio(&p, WaveVector2D::zero()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hopfield_far_red_detuned_exciton() {
        let mut p = reference();
        let mut last = 0.0;
        for e_x in [1.4, 1.2, 0.8] {
            p.e_x = e_x;
            let rho = hopfield_ratio(&p, WaveVector2D::zero());
            let m = hopfield(&p, WaveVector2D::zero());
            assert!(rho > 0.0);
            assert!(m[(0, 0)] > last);
            last = m[(0, 0)];
        }
        assert!(1.0 - last < 1e-5);
    }

    #[test]
    fn saturation_term_vanishes_without_coupling() {
        let mut p = reference();
        p.hbar_omega = 1e-14;
        p.e_x = 1.45;
        let k = WaveVector2D::from_reduced(0.01, 0.0, p.e_c);
        let kp = WaveVector2D::from_reduced(0.012, 0.003, p.e_c);
        let q = WaveVector2D::from_reduced(0.002, -0.001, p.e_c);
        let b = [L, L, L, L];
        let v = effective_potential(&p, k, kp, q, b);
        let x = |v: WaveVector2D<f64>| hopfield(&p, v)[(0, 0)];
        let expect = 12.0 * p.e_b * x(k + q) * x(kp - q) * x(k) * x(kp);
        assert_relative_eq!(v, expect, epsilon = 1e-16);
    }

    #[test]
    fn potential_symmetric_under_leg_reversal() {
        // reversing outgoing and incoming legs: (k, k', q; j1 j2 j3 j4) -> (k' - q, k + q, q; j4 j3 j2 j1)
        let p = MicrocavityParams::new(1.5, 1.497, 2e-3, 1e-2, 1.0, 1.0).unwrap();
        let k = WaveVector2D::from_reduced(0.011, 0.002, p.e_c);
        let kp = WaveVector2D::from_reduced(0.017, -0.004, p.e_c);
        let q = WaveVector2D::from_reduced(0.003, 0.001, p.e_c);
        for code in 0..16u32 {
            let b: Vec<Branch> = (0..4).map(|i| if code >> i & 1 == 0 { L } else { U }).collect();
            let v = effective_potential(&p, k, kp, q, [b[0], b[1], b[2], b[3]]);
            let w = effective_potential(&p, kp - q, k + q, q, [b[3], b[2], b[1], b[0]]);
            assert_relative_eq!(v, w, epsilon = 1e-15, max_relative = 1e-13);
        }
    }

    #[test]
    fn potential_regression_fixture() {
        // independent re-evaluation of the pair potential from the closed-form
        // dispersion, for the resonant parameter set at k = k' = k0 e_x, q = dk0 e_x
        let p = reference();
        let (k0, dk0) = (0.015 * p.e_c, 0.004 * p.e_c);
        let exciton_weight = |kx: f64| {
            let ec = (p.e_c.powi(2) + kx * kx).sqrt();
            let e2 = 0.5 * (ec + p.e_x + ((ec - p.e_x).powi(2) + 4.0 * p.hbar_omega.powi(2)).sqrt());
            let rho = (e2 - ec) / p.hbar_omega;
            let m11 = 1.0 / (1.0 + rho * rho).sqrt();
            (m11, -(1.0 - m11 * m11).sqrt())
        };
        let (x_out1, c_out1) = exciton_weight(k0 + dk0);
        let (x_out2, _) = exciton_weight(k0 - dk0);
        let (x_in, c_in) = exciton_weight(k0);
        let oracle = 12.0 * p.e_b * x_out1 * x_out2 * x_in * x_in
            - 16.0 * std::f64::consts::PI / 7.0 * p.hbar_omega * (c_out1 * x_out2 * x_in * x_in + x_out1 * x_out2 * x_in * c_in);
        let v = effective_potential(
            &p,
            WaveVector2D::along_x(k0),
            WaveVector2D::along_x(k0),
            WaveVector2D::along_x(dk0),
            [L, L, L, L],
        );
        assert_relative_eq!(v, oracle, max_relative = 1e-12);
        assert!(v > 0.0);
        assert_relative_eq!(v, 4.006_911_430_031_592e-2, max_relative = 1e-12);
    }

    #[test]
    fn alpha_limits() {
        let p = reference();
        let kp = WaveVector2D::from_reduced(0.015, 0.0, p.e_c);
        let q = WaveVector2D::from_reduced(0.004, 0.001, p.e_c);
        let a = alpha_coefficient(&p, kp, q).unwrap();
        let v1 = effective_potential(&p, kp, kp, q, [L, U, U, U]);
        let v2 = effective_potential(&p, kp, kp, q, [U, L, U, U]);
        let b = v2 / (v1 * v1 + v2 * v2).sqrt();
        assert_relative_eq!(a * a + b * b, 1.0, epsilon = 1e-14);
        assert!(a.abs() <= 1.0);
    }

    #[test]
    fn alpha_degenerate_coupling() {
        // vanishing binding energy and Rabi coupling make both channels zero
        let p = MicrocavityParams { e_b: 1e-40, hbar_omega: 1e-40, ..reference() };
        let k = WaveVector2D::zero();
        assert_eq!(alpha_coefficient(&p, k, k), Err(Error::DegenerateCoupling));
    }

    #[test]
    fn schmidt_separable_and_bell() {
        let s = PairState::new(vec![1.0]).unwrap();
        assert_eq!(schmidt_coefficients(&s), vec![1.0, 0.0]);
        assert_eq!(schmidt_number(&s), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PairState::new(vec![h]).unwrap();
        let c = schmidt_coefficients(&s);
        assert_relative_eq!(c[0], h, epsilon = 1e-15);
        assert_relative_eq!(c[1], h, epsilon = 1e-15);
        assert_eq!(schmidt_number(&s), 2);
    }

    #[test]
    fn schmidt_three_pairs_upper_bound() {
        let s = PairState::new(vec![0.3, 0.7, 0.5]).unwrap();
        assert_eq!(schmidt_number(&s), 8);
        let s = PairState::from_signed(&[-0.3, 1.0, 0.0]).unwrap();
        assert_eq!(schmidt_number(&s), 2);
    }

    #[test]
    fn pair_state_rejects_out_of_range() {
        assert!(PairState::new(vec![1.2]).is_err());
        assert!(PairState::new(vec![f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn avoided_crossing(u in 0.0..0.1f64, ex in 1.45..1.55f64, om in 1e-4..1e-2f64) {
            let p = MicrocavityParams::new(1.5, ex, om, 1e-2, 1.0, 1.0).unwrap();
            let k = WaveVector2D::from_reduced(u, 0.3 * u, p.e_c);
            let ec = cavity_energy(&p, k);
            let (e1, e2) = polariton_energies(&p, k);
            prop_assert!(e1 <= ec.min(ex));
            prop_assert!(ec.max(ex) <= e2);
            prop_assert!(e2 - e1 >= 2.0 * om * (1.0 - 1e-12));
            prop_assert!(((e1 + e2) - (ec + ex)).abs() <= 1e-12 * (ec + ex));
        }

        #[test]
        fn hopfield_is_orthogonal(u in 0.0..1.0f64, ex in 0.5..3.0f64) {
            let p = MicrocavityParams::new(1.5, ex, 2e-3, 1e-2, 1.0, 1.0).unwrap();
            let m = hopfield(&p, WaveVector2D::from_reduced(u, 0.0, p.e_c));
            let defect = (m * m.transpose() - Matrix2::identity()).amax();
            prop_assert!(defect <= 1e-12);
            prop_assert!((m[(0, 0)].powi(2) + m[(0, 1)].powi(2) - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn schmidt_normalised_and_multiplicative(a in proptest::collection::vec(0.0..=1.0f64, 1..6)) {
            let s = PairState::new(a.clone()).unwrap();
            let c = schmidt_coefficients(&s);
            let norm: f64 = c.iter().map(|x| x * x).sum();
            prop_assert!((norm - 1.0).abs() <= 1e-12);
            let per_pair: usize = a.iter().map(|&x| schmidt_number(&PairState::new(vec![x]).unwrap())).product();
            prop_assert_eq!(schmidt_number(&s), per_pair);
        }
    }
}
