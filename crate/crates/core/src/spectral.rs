//! Dispersion relation, eigenspinors and the exact Fourier-space propagator.
//!
//! Plane waves `e^{i(kx − ω^{(s)} t)} Φ_k^{(s)}` solve the lattice map with
//! `ω^{(+)} = ω(k) = −arcsin(cosθ sin k)` and `ω^{(−)} = π − ω(k)`. Any
//! initial state is expanded in these modes on a ring of `N` sites; the ring
//! is chosen large enough that the light cone never wraps around, which
//! makes the spectral result identical to iterating the map.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::{bin_wavenumber, Dft};
use crate::tolerance;
use crate::walk::{CoinParameter, WalkerState};
use crate::{Error, Result};

/// Eigenmode family `s = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl TryFrom<i8> for Branch {
    type Error = Error;

    fn try_from(s: i8) -> Result<Self> {
        match s {
            1 => Ok(Branch::Plus),
            -1 => Ok(Branch::Minus),
            other => Err(Error::InvalidParameter(format!("branch must be +1 or -1, got {other}"))),
        }
    }
}

impl From<Branch> for i8 {
    fn from(b: Branch) -> i8 {
        match b {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }
}

/// `ω(k) = −arcsin(cosθ sin k)`, in `[−π/2, π/2]`.
pub fn omega(k: f64, coin: CoinParameter) -> f64 {
    -(coin.cos() * k.sin()).clamp(-1.0, 1.0).asin()
}

/// Frequency of branch `s`: `ω` for `+`, `π − ω` for `−`.
pub fn branch_omega(k: f64, coin: CoinParameter, branch: Branch) -> f64 {
    match branch {
        Branch::Plus => omega(k, coin),
        Branch::Minus => PI - omega(k, coin),
    }
}

/// Closed-form `dⁿω/dkⁿ` of the `+` branch for `n ∈ {1, 2, 3}`.
///
/// With `c = cosθ`, `s = sinθ` and `D = 1 − c² sin²k`:
///
/// ```text
/// ω'   = −c cos k · D^{-1/2}
/// ω''  =  c s² sin k · D^{-3/2}
/// ω''' =  c s² cos k (1 + 2c² sin²k) · D^{-5/2}
/// ```
pub fn omega_derivative(k: f64, coin: CoinParameter, order: u8) -> Result<f64> {
    coin.require_interior()?;
    let (c, s) = (coin.cos(), coin.sin());
    let (sin_k, cos_k) = k.sin_cos();
    let d = 1.0 - c * c * sin_k * sin_k;
    match order {
        1 => Ok(-c * cos_k / d.sqrt()),
        2 => Ok(c * s * s * sin_k / (d * d.sqrt())),
        3 => Ok(c * s * s * cos_k * (1.0 + 2.0 * c * c * sin_k * sin_k) / (d * d * d.sqrt())),
        other => Err(Error::InvalidParameter(format!("derivative order {other} not in 1..=3"))),
    }
}

/// Group velocity `dω^{(s)}/dk`; the `−` branch moves opposite to the `+` one.
pub fn group_velocity(k: f64, coin: CoinParameter, branch: Branch) -> Result<f64> {
    Ok(branch.sign() * omega_derivative(k, coin, 1)?)
}

/// One row of the dispersion curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub k: f64,
    pub omega: f64,
    pub vg: f64,
}

/// `ω(k)` and `v_g(k)` of the `+` branch at `k = −π + 2πi/samples`, `i = 0..=samples`.
pub fn dispersion_curve(coin: CoinParameter, samples: usize) -> Result<Vec<DispersionPoint>> {
    coin.require_interior()?;
    if samples < 16 {
        return Err(Error::InvalidParameter(format!("need at least 16 samples, got {samples}")));
    }
    (0..=samples)
        .map(|i| {
            let k = -PI + 2.0 * PI * i as f64 / samples as f64;
            Ok(DispersionPoint {
                k,
                omega: omega(k, coin),
                vg: omega_derivative(k, coin, 1)?,
            })
        })
        .collect()
}

/// Normalized eigenvector of the one-step map at wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenspinor {
    pub k: f64,
    pub branch: Branch,
    pub omega: f64,
    pub components: [Complex64; 2],
}

impl Eigenspinor {
    /// `⟨self|v⟩`.
    pub fn project(&self, v: [Complex64; 2]) -> Complex64 {
        self.components[0].conj() * v[0] + self.components[1].conj() * v[1]
    }
}

pub fn eigenspinor(k: f64, coin: CoinParameter, branch: Branch) -> Result<Eigenspinor> {
    coin.require_interior()?;
    let w = omega(k, coin);
    let upper = coin.cos() * k.cos() + branch.sign() * w.cos();
    let lower = Complex64::from_polar(coin.sin(), -k);
    let norm = (upper * upper + lower.norm_sqr()).sqrt();
    if norm < tolerance::DEGENERACY {
        return Err(Error::Degenerate { k, norm });
    }
    Ok(Eigenspinor {
        k,
        branch,
        omega: branch_omega(k, coin, branch),
        components: [Complex64::new(upper / norm, 0.0), lower / norm],
    })
}

/// Projection of a state's ring transform onto both eigenspinor families.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    coin: CoinParameter,
    /// Wavenumbers `2πj/N` folded into `(−π, π]`, in DFT bin order.
    pub k: Vec<f64>,
    /// `a⁺_k = ⟨Φ_k^{(+)}|Ψ̃_k⟩`.
    pub plus: Vec<Complex64>,
    /// `a⁻_k = ⟨Φ_k^{(−)}|Ψ̃_k⟩`.
    pub minus: Vec<Complex64>,
    spinors: Vec<[Eigenspinor; 2]>,
    origin_t: u64,
    origin_x_min: i64,
    origin_len: usize,
}

impl SpectralDecomposition {
    /// Ring size `N`.
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// `Σ_k (|a⁺|² + |a⁻|²) / N`, equal to the state's squared norm.
    pub fn parseval_norm(&self) -> f64 {
        let sum: f64 = self
            .plus
            .iter()
            .zip(&self.minus)
            .map(|(p, m)| p.norm_sqr() + m.norm_sqr())
            .sum();
        sum / self.len() as f64
    }

    /// Longest time this ring can propagate without wraparound.
    pub fn max_steps(&self) -> u64 {
        (self.len().saturating_sub(self.origin_len) / 2) as u64
    }

    /// Evolves the decomposed state forward by `steps` and windows the
    /// result to the light cone `[x_min − steps, x_max + steps]`.
    pub fn propagate(&self, steps: u64) -> Result<WalkerState> {
        let n = self.len();
        let required = self.origin_len as u128 + 2 * steps as u128 + RING_GUARD as u128;
        if required > n as u128 {
            return Err(Error::Size {
                n,
                required: required.min(usize::MAX as u128) as usize,
            });
        }
        let mut ring_r = vec![Complex64::new(0.0, 0.0); n];
        let mut ring_l = ring_r.clone();
        let t = steps as f64;
        for j in 0..n {
            let [sp, sm] = &self.spinors[j];
            let ap = self.plus[j] * Complex64::from_polar(1.0, -sp.omega * t);
            let am = self.minus[j] * Complex64::from_polar(1.0, -sm.omega * t);
            ring_r[j] = ap * sp.components[0] + am * sm.components[0];
            ring_l[j] = ap * sp.components[1] + am * sm.components[1];
        }
        let dft = Dft::new(n);
        dft.inverse(&mut ring_r);
        dft.inverse(&mut ring_l);

        let x_min = self.origin_x_min - steps as i64;
        let len = self.origin_len + 2 * steps as usize;
        let mut r = Vec::with_capacity(len);
        let mut l = Vec::with_capacity(len);
        for i in 0..len {
            let idx = ring_index(x_min + i as i64, n);
            r.push(ring_r[idx]);
            l.push(ring_l[idx]);
        }
        // The window ends lie outside the light cone of the padded support.
        let zero = Complex64::new(0.0, 0.0);
        r[0] = zero;
        l[0] = zero;
        r[len - 1] = zero;
        l[len - 1] = zero;
        WalkerState::from_raw(self.origin_t + steps, x_min, r, l)
    }

    pub fn coin(&self) -> CoinParameter {
        self.coin
    }
}

fn ring_index(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

/// Forward ring DFT `Ψ̃_k = Σ_x e^{−ikx} Ψ_x` followed by eigenspinor projection.
pub fn decompose(state: &WalkerState, coin: CoinParameter, n: usize) -> Result<SpectralDecomposition> {
    coin.require_interior()?;
    if n < state.len() {
        return Err(Error::Size {
            n,
            required: state.len(),
        });
    }
    let mut ring_r = vec![Complex64::new(0.0, 0.0); n];
    let mut ring_l = ring_r.clone();
    for (i, (r, l)) in state.r().iter().zip(state.l()).enumerate() {
        let idx = ring_index(state.x_min() + i as i64, n);
        ring_r[idx] = *r;
        ring_l[idx] = *l;
    }
    let (k, plus, minus, spinors) = project_ring(ring_r, ring_l, coin)?;
    Ok(SpectralDecomposition {
        coin,
        k,
        plus,
        minus,
        spinors,
        origin_t: state.t(),
        origin_x_min: state.x_min(),
        origin_len: state.len(),
    })
}

/// Transforms ring-indexed spinor amplitudes and projects every bin onto
/// `Φ_k^{(±)}`.
pub(crate) fn project_ring(
    mut ring_r: Vec<Complex64>,
    mut ring_l: Vec<Complex64>,
    coin: CoinParameter,
) -> Result<(Vec<f64>, Vec<Complex64>, Vec<Complex64>, Vec<[Eigenspinor; 2]>)> {
    let n = ring_r.len();
    let dft = Dft::new(n);
    dft.forward(&mut ring_r);
    dft.forward(&mut ring_l);
    let mut k = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    let mut spinors = Vec::with_capacity(n);
    for j in 0..n {
        let kj = bin_wavenumber(j, n, 1.0);
        let sp = eigenspinor(kj, coin, Branch::Plus)?;
        let sm = eigenspinor(kj, coin, Branch::Minus)?;
        let v = [ring_r[j], ring_l[j]];
        k.push(kj);
        plus.push(sp.project(v));
        minus.push(sm.project(v));
        spinors.push([sp, sm]);
    }
    Ok((k, plus, minus, spinors))
}

/// Sites kept empty beyond the light cone on the ring.
const RING_GUARD: usize = 2;

/// Smallest ring size for which [`exact_evolve`] of `state` over `steps` is wrap-free.
pub fn min_ring_size(state: &WalkerState, steps: u64) -> usize {
    state.len() + 2 * steps as usize + RING_GUARD
}

/// Closed-form evolution through the eigenmode expansion; agrees with
/// iterating the map to round-off as long as `n ≥ min_ring_size`.
pub fn exact_evolve(state: &WalkerState, coin: CoinParameter, steps: u64, n: usize) -> Result<WalkerState> {
    let required = min_ring_size(state, steps);
    if n < required {
        return Err(Error::Size { n, required });
    }
    decompose(state, coin, n)?.propagate(steps)
}
