//! Phase-matching function of a frequency-comb pumped microcavity.
//!
//! Wave numbers at this interface are the dimensionless `hbar c k / E_C`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::microcavity::{lower_energy_sq, MicrocavityParams, WaveVector2D};
use crate::scalar::{lit, Real};

/// Comb of `2N + 1` pump lines injecting polaritons at `k_n = k0 + n dk0` along `e_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpComb<T> {
    pub n: usize,
    /// Central wave number, reduced.
    pub k0: T,
    /// Line separation, reduced.
    pub dk0: T,
    /// Polariton broadening in eV.
    pub gamma: T,
    /// Pump spectral amplitudes `P_{-N} .. P_N`.
    pub amplitudes: Vec<T>,
}

impl<T: Real> PumpComb<T> {
    pub fn new(n: usize, k0: T, dk0: T, gamma: T, amplitudes: Vec<T>) -> Result<Self> {
        let c = Self { n, k0, dk0, gamma, amplitudes };
        c.validate()?;
        Ok(c)
    }

    /// Comb with equal amplitudes `P`.
    pub fn uniform(n: usize, k0: T, dk0: T, gamma: T, amplitude: T) -> Result<Self> {
        Self::new(n, k0, dk0, gamma, vec![amplitude; 2 * n + 1])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("comb needs N >= 1".into()));
        }
        if !(self.gamma > T::zero()) {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
        if !(self.dk0 > T::zero()) {
            return Err(Error::InvalidParameter("dk0 must be positive".into()));
        }
        if !self.k0.is_finite() {
            return Err(Error::NonFinite("k0"));
        }
        if self.amplitudes.len() != self.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.n_modes(), found: self.amplitudes.len() });
        }
        if self.amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("pump amplitudes"));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n + 1
    }

    /// Mode labels `-N ..= N` in storage order.
    pub fn labels(&self) -> impl Iterator<Item = i64> {
        let n = self.n as i64;
        -n..=n
    }

    /// Reduced pump wave numbers `k0 + n dk0`.
    pub fn reduced_wave_numbers(&self) -> Vec<T> {
        self.labels().map(|l| self.k0 + lit::<T>(l as f64) * self.dk0).collect()
    }

    /// Pump wave vectors in energy units.
    pub fn wave_vectors(&self, p: &MicrocavityParams<T>) -> Vec<WaveVector2D<T>> {
        self.reduced_wave_numbers()
            .into_iter()
            .map(|u| WaveVector2D::from_reduced(u, T::zero(), p.e_c))
            .collect()
    }
}

/// Rectangular grid in reduced wave-vector coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub kx_range: (T, T),
    pub ky_range: (T, T),
    pub nx: usize,
    pub ny: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(kx_range: (T, T), ky_range: (T, T), nx: usize, ny: usize) -> Result<Self> {
        let g = Self { kx_range, ky_range, nx, ny };
        g.validate()?;
        Ok(g)
    }

    /// `[-2 k0, 2 k0]^2` with a spacing of `dk0 / per_line`, so every pump
    /// wave number falls on a node whenever `2 k0 / dk0` is a multiple of `1 / per_line`.
    pub fn around_comb(comb: &PumpComb<T>, per_line: usize) -> Result<Self> {
        let half = lit::<T>(2.0) * comb.k0.abs();
        let h = comb.dk0 / lit::<T>(per_line as f64);
        let cells = to_usize((lit::<T>(2.0) * half / h).round());
        let n = cells + 1;
        Self::new((-half, half), (-half, half), n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidParameter("grid needs at least two nodes per axis".into()));
        }
        for (lo, hi) in [self.kx_range, self.ky_range] {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite("grid range"));
            }
            if !(hi > lo) {
                return Err(Error::InvalidParameter("grid range must be nondegenerate".into()));
            }
        }
        Ok(())
    }

    pub fn kx_axis(&self) -> Vec<T> {
        axis(self.kx_range, self.nx)
    }

    pub fn ky_axis(&self) -> Vec<T> {
        axis(self.ky_range, self.ny)
    }
}

fn to_usize<T: Real>(x: T) -> usize {
    x.to_usize().expect("grid size fits usize")
}

/// Evenly spaced nodes; symmetric ranges are mirrored exactly about zero.
fn axis<T: Real>((lo, hi): (T, T), n: usize) -> Vec<T> {
    let last = lit::<T>((n - 1) as f64);
    let mut v: Vec<T> = (0..n).map(|i| lo + (hi - lo) * lit::<T>(i as f64) / last).collect();
    if lo == -hi {
        for i in 0..n / 2 {
            v[n - 1 - i] = -v[i];
        }
        if n % 2 == 1 {
            v[n / 2] = T::zero();
        }
    }
    v
}

/// `eta(k)`: Lorentzian-weighted count of phase-matched pair channels into `k`.
///
/// `k` is in energy units. Channels with `k = k_n` are evaluated so the
/// energy mismatch vanishes exactly.
pub fn eta<T: Real>(p: &MicrocavityParams<T>, comb: &PumpComb<T>, k: WaveVector2D<T>) -> T {
    let pumps = comb.wave_vectors(p);
    let e_pump: Vec<T> = pumps.iter().map(|v| lower_energy_sq(p, v.norm_squared())).collect();
    let e_k = lower_energy_sq(p, k.norm_squared());
    let g2 = comb.gamma * comb.gamma;
    let mut sum = T::zero();
    for (m, &km) in pumps.iter().enumerate() {
        for (n, &kn) in pumps.iter().enumerate() {
            // pair the probe with the nearer pump line so that k = k_a gives 0 + 0
            let (a, b) = if (kn - k).norm_squared() <= (km - k).norm_squared() { (n, m) } else { (m, n) };
            let shifted = (pumps[a] - k) + pumps[b];
            let mismatch = (e_k - e_pump[a]) + (lower_energy_sq(p, shifted.norm_squared()) - e_pump[b]);
            sum += g2 / (mismatch * mismatch + g2);
        }
    }
    sum
}

/// `eta` sampled on a grid: `values[iy * nx + ix]`, `kx` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaMap<T> {
    pub kx: Vec<T>,
    pub ky: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> EtaMap<T> {
    pub fn nx(&self) -> usize {
        self.kx.len()
    }

    pub fn ny(&self) -> usize {
        self.ky.len()
    }

    pub fn get(&self, ix: usize, iy: usize) -> T {
        self.values[iy * self.nx() + ix]
    }

    pub fn row(&self, iy: usize) -> &[T] {
        let nx = self.nx();
        &self.values[iy * nx..(iy + 1) * nx]
    }

    /// Header `kx,ky,eta`, one line per node, `kx` fastest.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "kx,ky,eta")?;
        for (iy, &y) in self.ky.iter().enumerate() {
            for (ix, &x) in self.kx.iter().enumerate() {
                writeln!(w, "{},{},{}", x, y, self.get(ix, iy))?;
            }
        }
        Ok(())
    }
}

/// Evaluates `eta` at every grid node, rows in parallel.
///
/// Nodes within `1e-9` of a grid spacing of a pump point are snapped onto it.
pub fn eta_map<T: Real>(p: &MicrocavityParams<T>, comb: &PumpComb<T>, grid: &GridSpec<T>) -> EtaMap<T> {
    let pump_u = comb.reduced_wave_numbers();
    let hx = (grid.kx_range.1 - grid.kx_range.0) / lit::<T>((grid.nx - 1) as f64);
    let snap = hx * lit::<T>(1e-9);
    let kx: Vec<T> = grid
        .kx_axis()
        .into_iter()
        .map(|x| pump_u.iter().copied().find(|&u| (u - x).abs() <= snap).unwrap_or(x))
        .collect();
    let ky = grid.ky_axis();

    let k_sum: Vec<T> = (0..=4 * comb.n).map(|s| lit::<T>(2.0) * comb.k0 + lit::<T>(s as f64 - 2.0 * comb.n as f64) * comb.dk0).collect();
    let e_pump: Vec<T> = pump_u.iter().map(|&u| lower_energy_sq(p, u * u * p.e_c * p.e_c)).collect();
    let g2 = comb.gamma * comb.gamma;
    let e_c2 = p.e_c * p.e_c;
    let nm = comb.n_modes();

    let rows: Vec<Vec<T>> = ky
        .par_iter()
        .map(|&y| {
            let y2 = y * y;
            let mut shifted = vec![T::zero(); k_sum.len()];
            kx.iter()
                .map(|&x| {
                    let k = WaveVector2D::from_reduced(x, y, p.e_c);
                    if y == T::zero() && pump_u.contains(&x) {
                        return eta(p, comb, k);
                    }
                    for (s, &ks) in k_sum.iter().enumerate() {
                        let d = ks - x;
                        shifted[s] = lower_energy_sq(p, (d * d + y2) * e_c2);
                    }
                    let e_k = lower_energy_sq(p, (x * x + y2) * e_c2);
                    let mut sum = T::zero();
                    for m in 0..nm {
                        for n in 0..nm {
                            let mis = e_k + shifted[m + n] - e_pump[m] - e_pump[n];
                            sum += g2 / (mis * mis + g2);
                        }
                    }
                    sum
                })
                .collect()
        })
        .collect();

    EtaMap { kx, ky, values: rows.into_iter().flatten().collect() }
}
