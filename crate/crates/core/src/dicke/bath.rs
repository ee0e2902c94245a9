//! Ohmic bath rate functions, `gamma(omega) = lambda omega / omega_0`.

use crate::scalar::{lit, Real};

/// Bose occupation `1 / (exp(omega / T) - 1)` for `omega > 0`; zero at `T = 0`.
pub fn thermal_occupation<T: Real>(omega: T, temperature: T) -> T {
    if temperature <= T::zero() {
        return T::zero();
    }
    let x = omega / temperature;
    if x > lit(700.0) {
        return T::zero();
    }
    T::one() / x.exp_m1()
}

/// `chi(omega)`: emission rate for `omega > 0`, absorption for `omega < 0`,
/// and `lambda T / omega_0` at `omega = 0`.
pub fn rate_function_chi<T: Real>(omega: T, lambda: T, omega_0: T, temperature: T) -> T {
    let gamma = |w: T| lambda * w / omega_0;
    if omega > T::zero() {
        gamma(omega) * (thermal_occupation(omega, temperature) + T::one())
    } else if omega < T::zero() {
        gamma(-omega) * thermal_occupation(-omega, temperature)
    } else {
        lambda * temperature / omega_0
    }
}

/// Principal-value transform `Re Gamma(x + i0)` of the Ohmic density with
/// exponential cutoff `omega_cut`, for `x > 0`:
/// `(lambda / omega_0)(1/pi)[2 w_c - x(e^{-x/w_c} Ei(x/w_c) + e^{x/w_c} E_1(x/w_c))]`.
pub fn principal_value_ohmic(x: f64, lambda: f64, omega_0: f64, omega_cut: f64) -> f64 {
    let u = x / omega_cut;
    let bracket = 2.0 * omega_cut - x * ((-u).exp() * expint_ei(u) + u.exp() * expint_e1(u));
    lambda / omega_0 * bracket / std::f64::consts::PI
}

/// `xi(omega)` built like `chi` from [`principal_value_ohmic`]; `xi(0) = 0`.
pub fn lamb_shift_xi(omega: f64, lambda: f64, omega_0: f64, temperature: f64, omega_cut: f64) -> f64 {
    if omega > 0.0 {
        principal_value_ohmic(omega, lambda, omega_0, omega_cut) * (thermal_occupation(omega, temperature) + 1.0)
    } else if omega < 0.0 {
        principal_value_ohmic(-omega, lambda, omega_0, omega_cut) * thermal_occupation(-omega, temperature)
    } else {
        0.0
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `Ei(x)` for `x > 0`.
pub fn expint_ei(x: f64) -> f64 {
    assert!(x > 0.0, "Ei needs a positive argument");
    if x < 40.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..500 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    } else {
        // asymptotic series, truncated at its smallest term
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..(x as usize) {
            term *= k as f64 / x;
            sum += term;
            if term < 1e-17 {
                break;
            }
        }
        x.exp() / x * sum
    }
}

/// Exponential integral `E_1(x)` for `x > 0`.
pub fn expint_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 needs a positive argument");
    if x <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}
