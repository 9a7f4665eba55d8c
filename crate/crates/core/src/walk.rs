//! Lattice state and the exact one-step unitary map.
//!
//! The walker lives on a finite window `[x_min, x_max]` of the integer line.
//! Each step grows the window by one site on each side, which is exactly the
//! map's light cone, so no amplitude is ever lost at the boundary.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tolerance;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coin bias angle `θ ∈ [0, π/2]`; `π/4` is the Hadamard coin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CoinParameter {
    theta: f64,
}

impl CoinParameter {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::Domain(theta, "[0, π/2]"));
        }
        Ok(Self { theta })
    }

    pub fn hadamard() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_4,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cos(&self) -> f64 {
        self.theta.cos()
    }

    pub fn sin(&self) -> f64 {
        self.theta.sin()
    }

    pub fn tan(&self) -> f64 {
        self.theta.tan()
    }

    /// Rejects the endpoints `0` and `π/2`, where the eigenspinors degenerate.
    pub fn require_interior(&self) -> Result<()> {
        if self.theta > 0.0 && self.theta < FRAC_PI_2 {
            Ok(())
        } else {
            Err(Error::Domain(self.theta, "(0, π/2)"))
        }
    }
}

impl TryFrom<f64> for CoinParameter {
    type Error = Error;

    fn try_from(theta: f64) -> Result<Self> {
        Self::new(theta)
    }
}

impl From<CoinParameter> for f64 {
    fn from(c: CoinParameter) -> f64 {
        c.theta
    }
}

/// Spinor amplitudes `(R_x, L_x)` on the window `[x_min, x_max]` at step `t`.
///
/// The first and last sites of the window always hold zero amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    t: u64,
    x_min: i64,
    r: Vec<Complex64>,
    l: Vec<Complex64>,
}

impl WalkerState {
    /// Builds a normalized state at `t = 0` with `r[i]`, `l[i]` at site `x_min + i`.
    pub fn new(x_min: i64, r: Vec<Complex64>, l: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::from_raw(0, x_min, r, l)?;
        let norm = state.norm_sqr();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(format!("state norm {norm} cannot be normalized")));
        }
        let scale = 1.0 / norm.sqrt();
        state.r.iter_mut().chain(state.l.iter_mut()).for_each(|z| *z *= scale);
        Ok(state)
    }

    /// Builds a state without normalizing it; the window is still zero-padded.
    pub fn from_raw(t: u64, x_min: i64, r: Vec<Complex64>, l: Vec<Complex64>) -> Result<Self> {
        if r.len() != l.len() {
            return Err(Error::InvalidParameter(format!(
                "R has {} sites but L has {}",
                r.len(),
                l.len()
            )));
        }
        if r.is_empty() {
            return Err(Error::InvalidParameter("empty window".into()));
        }
        let mut state = Self { t, x_min, r, l };
        state.pad();
        Ok(state)
    }

    /// A walker fully localized at `x` with coin state `spinor`.
    pub fn localized(x: i64, spinor: [Complex64; 2]) -> Result<Self> {
        Self::new(x, vec![spinor[0]], vec![spinor[1]])
    }

    fn pad(&mut self) {
        if self.r[0] != ZERO || self.l[0] != ZERO {
            self.r.insert(0, ZERO);
            self.l.insert(0, ZERO);
            self.x_min -= 1;
        }
        let last = self.r.len() - 1;
        if self.r[last] != ZERO || self.l[last] != ZERO {
            self.r.push(ZERO);
            self.l.push(ZERO);
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    pub fn x_max(&self) -> i64 {
        self.x_min + self.r.len() as i64 - 1
    }

    /// Number of sites in the window.
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r(&self) -> &[Complex64] {
        &self.r
    }

    pub fn l(&self) -> &[Complex64] {
        &self.l
    }

    /// `(R_x, L_x)`, zero outside the window.
    pub fn amplitude(&self, x: i64) -> (Complex64, Complex64) {
        if x < self.x_min || x > self.x_max() {
            return (ZERO, ZERO);
        }
        let i = (x - self.x_min) as usize;
        (self.r[i], self.l[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.r.iter().chain(&self.l).map(|z| z.norm_sqr()).sum()
    }

    /// Largest per-amplitude deviation from `other` over the union of both windows.
    pub fn max_deviation(&self, other: &WalkerState) -> f64 {
        let lo = self.x_min.min(other.x_min);
        let hi = self.x_max().max(other.x_max());
        (lo..=hi)
            .map(|x| {
                let (ra, la) = self.amplitude(x);
                let (rb, lb) = other.amplitude(x);
                (ra - rb).norm().max((la - lb).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Smallest window `[lo, hi]` holding every non-zero amplitude, if any.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz = |i: &usize| self.r[*i] != ZERO || self.l[*i] != ZERO;
        let first = (0..self.len()).find(nz)?;
        let last = (0..self.len()).rev().find(nz)?;
        Some((self.x_min + first as i64, self.x_min + last as i64))
    }
}

/// Probability `P_x = |R_x|² + |L_x|²` over a window at step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityDistribution {
    pub t: u64,
    pub x_min: i64,
    pub p: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(t: u64, x_min: i64, p: Vec<f64>) -> Result<Self> {
        if let Some(bad) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("probability {bad} is not a finite non-negative number")));
        }
        Ok(Self { t, x_min, p })
    }

    pub fn x_max(&self) -> i64 {
        self.x_min + self.p.len() as i64 - 1
    }

    pub fn get(&self, x: i64) -> f64 {
        if x < self.x_min || x > self.x_max() {
            0.0
        } else {
            self.p[(x - self.x_min) as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// `(x, P_x)` pairs over the window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.p.iter().enumerate().map(move |(i, &v)| (self.x_min + i as i64, v))
    }
}

/// One application of the unitary map:
///
/// ```text
/// R_{x,t+1} = R_{x+1,t} cosθ + L_{x+1,t} sinθ
/// L_{x,t+1} = R_{x-1,t} sinθ − L_{x-1,t} cosθ
/// ```
pub fn step(state: &WalkerState, coin: CoinParameter) -> WalkerState {
    let (c, s) = (coin.cos(), coin.sin());
    let n = state.len();
    let mut r = vec![ZERO; n + 2];
    let mut l = vec![ZERO; n + 2];
    apply_map(&state.r, &state.l, &mut r, &mut l, c, s);
    WalkerState {
        t: state.t + 1,
        x_min: state.x_min - 1,
        r,
        l,
    }
}

/// New window starts one site left of the old one, so new index `i` reads
/// old index `i` for the left-movers and `i - 2` for the right-movers.
fn apply_map(r: &[Complex64], l: &[Complex64], r_out: &mut [Complex64], l_out: &mut [Complex64], c: f64, s: f64) {
    let n = r.len();
    debug_assert_eq!(r_out.len(), n + 2);
    for i in 0..n {
        r_out[i] = r[i] * c + l[i] * s;
        l_out[i + 2] = r[i] * s - l[i] * c;
    }
    r_out[n] = ZERO;
    r_out[n + 1] = ZERO;
    l_out[0] = ZERO;
    l_out[1] = ZERO;
}

/// Applies [`step`] `steps` times, refusing windows beyond [`tolerance::MAX_WINDOW_SITES`].
pub fn evolve(state: &WalkerState, coin: CoinParameter, steps: u64) -> Result<WalkerState> {
    evolve_with_limit(state, coin, steps, tolerance::MAX_WINDOW_SITES)
}

pub fn evolve_with_limit(state: &WalkerState, coin: CoinParameter, steps: u64, max_sites: usize) -> Result<WalkerState> {
    let final_len = (steps as u128) * 2 + state.len() as u128;
    if final_len > max_sites as u128 {
        return Err(Error::Resource {
            requested: final_len.min(usize::MAX as u128) as usize,
            max: max_sites,
        });
    }
    let final_len = final_len as usize;
    let (c, s) = (coin.cos(), coin.sin());

    // Two full-size buffers; the live window occupies a growing prefix.
    let mut r = Vec::with_capacity(final_len);
    let mut l = Vec::with_capacity(final_len);
    r.extend_from_slice(&state.r);
    l.extend_from_slice(&state.l);
    let mut r_next = Vec::with_capacity(final_len);
    let mut l_next = Vec::with_capacity(final_len);
    for _ in 0..steps {
        let n = r.len();
        r_next.clear();
        l_next.clear();
        r_next.resize(n + 2, ZERO);
        l_next.resize(n + 2, ZERO);
        apply_map(&r, &l, &mut r_next, &mut l_next, c, s);
        std::mem::swap(&mut r, &mut r_next);
        std::mem::swap(&mut l, &mut l_next);
    }
    Ok(WalkerState {
        t: state.t + steps,
        x_min: state.x_min - steps as i64,
        r,
        l,
    })
}

pub fn probability(state: &WalkerState) -> ProbabilityDistribution {
    let p = state
        .r
        .iter()
        .zip(&state.l)
        .map(|(r, l)| r.norm_sqr() + l.norm_sqr())
        .collect();
    ProbabilityDistribution {
        t: state.t,
        x_min: state.x_min,
        p,
    }
}
