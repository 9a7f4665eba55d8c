//! Envelope dynamics in the continuum limit.
//!
//! An extended state `f_x e^{ik₀x} Φ_{k₀}^{(s)}` evolves, to leading order,
//! as `e^{i(k₀x − ω₀^{(s)} t)} F_s(x, t) Φ_{k₀}^{(s)}` where the envelope
//! obeys
//!
//! ```text
//! i ∂_t F_s = −i s ω₁ ∂_x F_s − ½ s ω₂ ∂_x² F_s + (i/6) s ω₃ ∂_x³ F_s + …
//! ```
//!
//! with `ω_n` the derivatives of the dispersion relation at `k₀`. Each
//! truncation is applied exactly in Fourier space as the phase
//! `e^{−i s Ω(K) t}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::fft::{bin_wavenumber, Dft};
use crate::spectral::{self, Branch};
use crate::tolerance;
use crate::walk::{CoinParameter, ProbabilityDistribution, WalkerState};
use crate::{Error, Result};

/// Uniform samples `x_j = start + j·h`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub h: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(start: f64, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::InvalidParameter(format!("grid spacing {h} not in (0, 1]")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter("grid needs at least two samples".into()));
        }
        Ok(Self { start, h, n })
    }

    /// Unit-spaced grid on the integer sites `x_min..x_min + n`.
    pub fn lattice(x_min: i64, n: usize) -> Result<Self> {
        Self::new(x_min as f64, 1.0, n)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.start + j as f64 * self.h
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.x(j))
    }

    fn is_lattice(&self) -> bool {
        self.h == 1.0 && self.start.fract() == 0.0
    }
}

/// Continuum envelope `F_s` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub carrier_k0: f64,
    pub branch: Branch,
    pub time: f64,
    /// Periodic fields wrap around the grid; the others must vanish at its ends.
    pub periodic: bool,
}

impl EnvelopeField {
    /// Normalizes `values` so that `Σ h |F|² = 1`.
    pub fn new(grid: Grid, mut values: Vec<Complex64>, carrier_k0: f64, branch: Branch, periodic: bool) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        let norm: f64 = grid.h * values.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(format!("envelope norm {norm} cannot be normalized")));
        }
        let scale = 1.0 / norm.sqrt();
        values.iter_mut().for_each(|z| *z *= scale);
        Ok(Self {
            grid,
            values,
            carrier_k0,
            branch,
            time: 0.0,
            periodic,
        })
    }

    pub fn sample(
        grid: Grid,
        profile: impl Fn(f64) -> Complex64,
        carrier_k0: f64,
        branch: Branch,
        periodic: bool,
    ) -> Result<Self> {
        let values = grid.points().map(profile).collect();
        Self::new(grid, values, carrier_k0, branch, periodic)
    }

    /// `Σ h |F|²`.
    pub fn norm(&self) -> f64 {
        self.grid.h * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn edge_amplitude(&self) -> f64 {
        let first = self.values.first().map_or(0.0, |z| z.norm());
        let last = self.values.last().map_or(0.0, |z| z.norm());
        first.max(last)
    }

    /// Extends a non-periodic field by `margin` zero samples on each side.
    pub fn padded(&self, margin: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut values = vec![zero; margin];
        values.extend_from_slice(&self.values);
        values.resize(self.values.len() + 2 * margin, zero);
        Self {
            grid: Grid {
                start: self.grid.start - margin as f64 * self.grid.h,
                h: self.grid.h,
                n: self.grid.n + 2 * margin,
            },
            values,
            ..self.clone()
        }
    }

    /// `weight · |F|²` on integer sites, for comparison with the lattice walk.
    pub fn lattice_probability(&self, weight: f64, t: u64) -> Result<ProbabilityDistribution> {
        if !self.grid.is_lattice() {
            return Err(Error::InvalidParameter("envelope grid is not the integer lattice".into()));
        }
        let p = self.values.iter().map(|z| weight * z.norm_sqr()).collect();
        ProbabilityDistribution::new(t, self.grid.start as i64, p)
    }

    fn check_edges(&self) -> Result<()> {
        if self.periodic {
            return Ok(());
        }
        let edge = self.edge_amplitude();
        if edge > tolerance::EDGE_LEAK {
            return Err(Error::BoundaryLeak(edge));
        }
        Ok(())
    }
}

/// Order of the Taylor expansion of `Ω(K) = ω(k₀ + K) − ω(k₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationOrder {
    /// Advection at the group velocity.
    First,
    /// Paraxial (free Schrödinger) diffraction.
    Second,
    /// Adds the cubic term responsible for asymmetric deformation.
    Third,
    /// Full dispersion, no truncation.
    Exact,
}

impl TruncationOrder {
    /// `Ω(K)` of the `+` branch at carrier `k₀`.
    pub fn detuning(self, coin: CoinParameter, k0: f64) -> Result<impl Fn(f64) -> f64> {
        let order = match self {
            TruncationOrder::First => 1,
            TruncationOrder::Second => 2,
            TruncationOrder::Third => 3,
            TruncationOrder::Exact => 0,
        };
        let mut coeffs = [0.0; 3];
        for n in 1..=order {
            coeffs[n - 1] = spectral::omega_derivative(k0, coin, n as u8)?;
        }
        let w0 = spectral::omega(k0, coin);
        Ok(move |k: f64| {
            if order == 0 {
                spectral::omega(k0 + k, coin) - w0
            } else {
                coeffs[0] * k + coeffs[1] * k * k / 2.0 + coeffs[2] * k * k * k / 6.0
            }
        })
    }
}

impl Serialize for TruncationOrder {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TruncationOrder::First => serializer.serialize_u8(1),
            TruncationOrder::Second => serializer.serialize_u8(2),
            TruncationOrder::Third => serializer.serialize_u8(3),
            TruncationOrder::Exact => serializer.serialize_str("exact"),
        }
    }
}

impl<'de> Deserialize<'de> for TruncationOrder {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Order(u8),
            Name(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Order(1) => Ok(TruncationOrder::First),
            Raw::Order(2) => Ok(TruncationOrder::Second),
            Raw::Order(3) => Ok(TruncationOrder::Third),
            Raw::Name(s) => match s.as_str() {
                "1" => Ok(TruncationOrder::First),
                "2" => Ok(TruncationOrder::Second),
                "3" => Ok(TruncationOrder::Third),
                "exact" => Ok(TruncationOrder::Exact),
                _ => Err(serde::de::Error::custom("truncation must be 1, 2, 3 or \"exact\"")),
            },
            _ => Err(serde::de::Error::custom("truncation must be 1, 2, 3 or \"exact\"")),
        }
    }
}

/// Advances `field` by `dt` under the truncated envelope equation.
pub fn propagate_envelope(field: &EnvelopeField, coin: CoinParameter, dt: f64, trunc: TruncationOrder) -> Result<EnvelopeField> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step {dt} must be finite and non-negative")));
    }
    coin.require_interior()?;
    field.check_edges()?;
    let detuning = trunc.detuning(coin, field.carrier_k0)?;
    let s = field.branch.sign();
    let n = field.grid.n;
    let dft = Dft::new(n);
    let mut values = field.values.clone();
    dft.forward(&mut values);
    for (j, v) in values.iter_mut().enumerate() {
        let k = bin_wavenumber(j, n, field.grid.h);
        *v *= Complex64::from_polar(1.0, -s * detuning(k) * dt);
    }
    dft.inverse(&mut values);
    let out = EnvelopeField {
        values,
        time: field.time + dt,
        ..field.clone()
    };
    out.check_edges()?;
    Ok(out)
}

/// Splits a lattice state into per-branch envelopes around carrier `k₀`:
/// `f_x^{(s)} = ⟨Φ_{k₀}^{(s)}| e^{−ik₀x} Ψ_x⟩`.
///
/// Returns `(branch, weight, normalized envelope)` for every branch whose weight
/// `Σ_x |f_x^{(s)}|²` exceeds the norm tolerance. A branch below it holds only
/// rounding noise, which would be broadband once normalized.
pub fn split_into_envelopes(state: &WalkerState, k0: f64, coin: CoinParameter) -> Result<Vec<(Branch, f64, EnvelopeField)>> {
    let grid = Grid::lattice(state.x_min(), state.len())?;
    let mut out = Vec::with_capacity(2);
    for branch in Branch::BOTH {
        let phi = spectral::eigenspinor(k0, coin, branch)?;
        let values: Vec<Complex64> = state
            .r()
            .iter()
            .zip(state.l())
            .enumerate()
            .map(|(i, (r, l))| {
                let x = (state.x_min() + i as i64) as f64;
                phi.project([*r, *l]) * Complex64::from_polar(1.0, -k0 * x)
            })
            .collect();
        let weight: f64 = values.iter().map(|z| z.norm_sqr()).sum();
        if weight > tolerance::NORM {
            out.push((branch, weight, EnvelopeField::new(grid, values, k0, branch, false)?));
        }
    }
    Ok(out)
}

/// `w(t) = √(1 + (t / (σ₀² tanθ))²)`: width of a resting Gaussian relative to its initial width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianWidthLaw {
    pub sigma0: f64,
    pub theta: f64,
}

impl GaussianWidthLaw {
    pub fn new(sigma0: f64, coin: CoinParameter) -> Result<Self> {
        if !(sigma0 > 0.0) || !sigma0.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma0 = {sigma0} must be positive")));
        }
        coin.require_interior()?;
        Ok(Self {
            sigma0,
            theta: coin.theta(),
        })
    }

    /// Diffraction time `σ₀² tanθ`.
    pub fn diffraction_time(&self) -> f64 {
        self.sigma0 * self.sigma0 * self.theta.tan()
    }

    /// `q_s(t) = √(1 + i s t / (σ₀² tanθ))`.
    pub fn q(&self, t: f64, branch: Branch) -> Complex64 {
        Complex64::new(1.0, branch.sign() * t / self.diffraction_time()).sqrt()
    }

    pub fn w(&self, t: f64) -> f64 {
        let u = t / self.diffraction_time();
        (1.0 + u * u).sqrt()
    }

    /// `lim dw/dt = 1 / (σ₀² tanθ)`.
    pub fn asymptotic_slope(&self) -> f64 {
        1.0 / self.diffraction_time()
    }
}

pub fn width_law(t: f64, sigma0: f64, coin: CoinParameter) -> Result<f64> {
    Ok(GaussianWidthLaw::new(sigma0, coin)?.w(t))
}

/// Analytic paraxial solution at `k₀ = π/2` for a Gaussian of width `σ₀`
/// centred at `x₀`:
/// `F_s = (σ₀√π)^{-1/2} q_s^{-1} exp[−(x − x₀)² / (2 σ₀² q_s²)]`.
pub fn gaussian_envelope_analytic(
    sigma0: f64,
    x0: f64,
    coin: CoinParameter,
    branch: Branch,
    t: f64,
    grid: Grid,
) -> Result<EnvelopeField> {
    let law = GaussianWidthLaw::new(sigma0, coin)?;
    let q = law.q(t, branch);
    let amp = (sigma0 * PI.sqrt()).powf(-0.5) / q;
    let denom = 2.0 * sigma0 * sigma0 * q * q;
    let values = grid
        .points()
        .map(|x| amp * (-(x - x0) * (x - x0) / denom).exp())
        .collect();
    Ok(EnvelopeField {
        grid,
        values,
        carrier_k0: std::f64::consts::FRAC_PI_2,
        branch,
        time: t,
        periodic: false,
    })
}

/// Long-time flat-top profile of a resting sinc envelope, from stationary phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatTopPrediction {
    pub sigma0: f64,
    pub theta: f64,
    pub t: f64,
    /// Plateau width `2π t / (σ₀ tanθ)`.
    pub w: f64,
    /// Plateau probability density `1 / w`.
    pub level: f64,
    /// Standard deviation of the rect profile, `w / √12`.
    pub std: f64,
    /// Onset of the asymptotic regime, `2 σ₀² tanθ`.
    pub transient_threshold: f64,
    /// False while `t` is still below the transient threshold.
    pub asymptotic: bool,
}

impl FlatTopPrediction {
    /// Ideal rect profile `level · rect(2x / w)` centred at `center` on integer sites.
    pub fn rect_profile(&self, center: f64, t: u64) -> ProbabilityDistribution {
        let half = self.w / 2.0;
        let lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        let p = (lo..=hi).map(|_| self.level).collect();
        ProbabilityDistribution { t, x_min: lo, p }
    }
}

pub fn flat_top_prediction(sigma0: f64, coin: CoinParameter, t: f64) -> Result<FlatTopPrediction> {
    if !(sigma0 > 0.0) || !sigma0.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma0 = {sigma0} must be positive")));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time {t} must be non-negative")));
    }
    coin.require_interior()?;
    let tan = coin.tan();
    let w = 2.0 * PI * t / (sigma0 * tan);
    let threshold = 2.0 * sigma0 * sigma0 * tan;
    Ok(FlatTopPrediction {
        sigma0,
        theta: coin.theta(),
        t,
        w,
        level: 1.0 / w,
        std: w / 12f64.sqrt(),
        transient_threshold: threshold,
        asymptotic: t >= threshold,
    })
}

/// Numerical check that the lattice DFT of `sinc(x/σ₀)` is a rect of half-width `π/σ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SincSpectrum {
    pub sigma0: f64,
    pub n: usize,
    /// `π / σ₀`.
    pub passband_edge: f64,
    /// RMS of `|f̃_k|/σ₀ − 1` over the inner 80% of the passband.
    pub in_band_ripple: f64,
    /// Fraction of spectral energy at `|k| ≥ π/σ₀`.
    pub out_of_band_fraction: f64,
}

/// `sin(πu) / (πu)` with `sinc(0) = 1`.
pub fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        let a = PI * u;
        a.sin() / a
    }
}

pub fn sinc_spectrum_check(sigma0: f64, n: usize) -> Result<SincSpectrum> {
    if !(sigma0 >= 2.0) {
        return Err(Error::InvalidParameter(format!("sigma0 = {sigma0} must be at least 2")));
    }
    if n < 16 {
        return Err(Error::InvalidParameter(format!("grid of {n} points is too small")));
    }
    let half = (n / 2) as i64;
    let mut ring = vec![Complex64::new(0.0, 0.0); n];
    for x in -half..(n as i64 - half) {
        ring[x.rem_euclid(n as i64) as usize] = Complex64::new(sinc(x as f64 / sigma0), 0.0);
    }
    Dft::new(n).forward(&mut ring);
    let edge = PI / sigma0;
    let (mut total, mut outside) = (0.0, 0.0);
    let (mut ripple_sq, mut ripple_count) = (0.0, 0usize);
    for (j, v) in ring.iter().enumerate() {
        let k = bin_wavenumber(j, n, 1.0);
        let e = v.norm_sqr();
        total += e;
        if k.abs() >= edge {
            outside += e;
        } else if k.abs() <= 0.8 * edge {
            let dev = v.norm() / sigma0 - 1.0;
            ripple_sq += dev * dev;
            ripple_count += 1;
        }
    }
    Ok(SincSpectrum {
        sigma0,
        n,
        passband_edge: edge,
        in_band_ripple: (ripple_sq / ripple_count.max(1) as f64).sqrt(),
        out_of_band_fraction: outside / total,
    })
}

/// `T = λ² tanθ / (2π)`.
///
/// After one `T` a λ-periodic envelope reappears shifted by half a period;
/// the unshifted self-image occurs at `2T`.
pub fn talbot_period(lambda: f64, coin: CoinParameter) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("period {lambda} must be positive")));
    }
    coin.require_interior()?;
    Ok(lambda * lambda * coin.tan() / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn hadamard() -> CoinParameter {
        CoinParameter::hadamard()
    }

    fn gaussian_field(sigma0: f64, x0: f64, k0: f64, branch: Branch, half: i64) -> EnvelopeField {
        let grid = Grid::lattice(-half, (2 * half + 1) as usize).unwrap();
        EnvelopeField::sample(
            grid,
            |x| Complex64::new((-(x - x0) * (x - x0) / (2.0 * sigma0 * sigma0)).exp(), 0.0),
            k0,
            branch,
            false,
        )
        .unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let f = gaussian_field(10.0, 0.0, FRAC_PI_2, Branch::Plus, 200);
        let g = propagate_envelope(&f, hadamard(), 0.0, TruncationOrder::Exact).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn advection_shifts_by_group_velocity() {
        let f = gaussian_field(10.0, 0.0, 0.0, Branch::Plus, 300);
        let g = propagate_envelope(&f, hadamard(), 100.0, TruncationOrder::First).unwrap();
        let shift = -100.0 * FRAC_PI_4.cos();
        assert!((shift + 70.711).abs() < 1e-3);
        let expected = gaussian_field(10.0, shift, 0.0, Branch::Plus, 300);
        for (a, b) in g.values.iter().zip(&expected.values) {
            assert!((a.norm() - b.norm()).abs() < 1e-9);
        }
        let centroid: f64 = g.grid.points().zip(g.intensity()).map(|(x, p)| x * p).sum();
        assert!((centroid - shift).abs() < 1e-9);

        let minus = gaussian_field(10.0, 0.0, 0.0, Branch::Minus, 300);
        let g = propagate_envelope(&minus, hadamard(), 100.0, TruncationOrder::First).unwrap();
        let centroid: f64 = g.grid.points().zip(g.intensity()).map(|(x, p)| x * p).sum();
        assert!((centroid + shift).abs() < 1e-9);
    }

    #[test]
    fn paraxial_matches_analytic_gaussian() {
        let coin = hadamard();
        let f = gaussian_field(10.0, 0.0, FRAC_PI_2, Branch::Plus, 400);
        let g = propagate_envelope(&f, coin, 400.0, TruncationOrder::Second).unwrap();
        let analytic = gaussian_envelope_analytic(10.0, 0.0, coin, Branch::Plus, 400.0, g.grid).unwrap();
        let linf = g
            .values
            .iter()
            .zip(&analytic.values)
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
            .fold(0.0, f64::max);
        assert!(linf < 1e-6, "{linf}");
        // Complex fields agree too, including the 1/q prefactor.
        let field_err = g
            .values
            .iter()
            .zip(&analytic.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(field_err < 1e-8, "{field_err}");
    }

    #[test]
    fn norm_is_conserved_for_all_orders() {
        let coin = CoinParameter::new(0.6).unwrap();
        for trunc in [TruncationOrder::First, TruncationOrder::Second, TruncationOrder::Third, TruncationOrder::Exact] {
            let f = gaussian_field(6.0, 3.0, 0.9, Branch::Minus, 250);
            let g = propagate_envelope(&f, coin, 37.5, trunc).unwrap();
            assert!((g.norm() - 1.0).abs() < 1e-12);
            assert_eq!(g.time, 37.5);
        }
    }

    #[test]
    fn boundary_leak_is_reported() {
        let f = gaussian_field(10.0, 0.0, 0.0, Branch::Plus, 120);
        let err = propagate_envelope(&f, hadamard(), 200.0, TruncationOrder::First).unwrap_err();
        assert!(matches!(err, Error::BoundaryLeak(_)));
        let wide = gaussian_field(10.0, 0.0, 0.0, Branch::Plus, 30);
        assert!(matches!(
            propagate_envelope(&wide, hadamard(), 0.0, TruncationOrder::First),
            Err(Error::BoundaryLeak(_))
        ));
        assert!(propagate_envelope(&f, hadamard(), -1.0, TruncationOrder::First).is_err());
    }

    #[test]
    fn width_law_values() {
        let coin = hadamard();
        assert_eq!(width_law(0.0, 10.0, coin).unwrap(), 1.0);
        let tau = 100.0 * coin.tan();
        assert!((width_law(tau, 10.0, coin).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let w5 = width_law(5.0 * tau, 10.0, coin).unwrap();
        assert!((w5 - 26f64.sqrt()).abs() < 1e-12);
        assert!((w5 - 5.0) / 5.0 < 0.02);
        assert!((width_law(2000.0, 15.0, coin).unwrap() - 8.944).abs() < 1e-3);
        assert!(width_law(1.0, 0.0, coin).is_err());
        let law = GaussianWidthLaw::new(10.0, coin).unwrap();
        assert!((law.asymptotic_slope() - 0.01).abs() < 1e-12);
        assert!((law.q(0.0, Branch::Minus) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn analytic_gaussian_width_from_moments() {
        let coin = hadamard();
        let grid = Grid::new(-800.0, 0.5, 3201).unwrap();
        let f = gaussian_envelope_analytic(10.0, 0.0, coin, Branch::Plus, 500.0, grid).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-10);
        let p = f.intensity();
        let var: f64 = grid.points().zip(&p).map(|(x, v)| x * x * v * grid.h).sum();
        // |F|² ∝ exp(−x²/(σ₀w)²) has standard deviation σ₀ w / √2.
        let expected = 10.0 * 26f64.sqrt() / 2f64.sqrt();
        assert!((var.sqrt() - expected).abs() < 1e-6);

        let f0 = gaussian_envelope_analytic(10.0, 2.0, coin, Branch::Plus, 0.0, grid).unwrap();
        let peak = f0.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((peak - (10.0 * PI.sqrt()).powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn flat_top_values() {
        let coin = hadamard();
        let p = flat_top_prediction(15.0, coin, 20000.0).unwrap();
        assert!((p.w - 8377.58).abs() < 0.01);
        assert_eq!(p.level * p.w, 1.0);
        assert!((p.std - 2418.40).abs() < 0.01);
        assert!(p.asymptotic);
        let early = flat_top_prediction(15.0, coin, 100.0).unwrap();
        assert!(!early.asymptotic);
        assert!((early.transient_threshold - 450.0).abs() < 1e-9);
    }

    #[test]
    fn sinc_spectrum() {
        let s = sinc_spectrum_check(15.0, 4096).unwrap();
        assert!((s.passband_edge - 0.2094).abs() < 1e-4);
        assert!(s.out_of_band_fraction < 1e-3, "{}", s.out_of_band_fraction);
        assert_eq!(sinc_spectrum_check(2.0, 256).unwrap().passband_edge, FRAC_PI_2);
        assert!(sinc_spectrum_check(1.5, 256).is_err());
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(1.0).abs() < 1e-15);
    }

    #[test]
    fn talbot_values() {
        let coin = hadamard();
        assert!((talbot_period(10.0, coin).unwrap() - 15.9155).abs() < 1e-4);
        let theta = (2.0 * PI).atan();
        assert!((talbot_period(1.0, CoinParameter::new(theta).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!(talbot_period(0.0, coin).is_err());
    }

    fn grating(lambda: usize, periods: usize, width: f64) -> EnvelopeField {
        let n = lambda * periods;
        let grid = Grid::lattice(0, n).unwrap();
        EnvelopeField::sample(
            grid,
            |x| {
                let d = (x.rem_euclid(lambda as f64)) - lambda as f64 / 2.0;
                Complex64::new((-d * d / (2.0 * width * width)).exp(), 0.0)
            },
            FRAC_PI_2,
            Branch::Plus,
            true,
        )
        .unwrap()
    }

    #[test]
    fn talbot_half_shift_and_full_revival() {
        let coin = hadamard();
        let lambda = 32;
        let f = grating(lambda, 8, 3.0);
        let t = talbot_period(lambda as f64, coin).unwrap();
        let p0 = f.intensity();
        let n = p0.len();
        let half = propagate_envelope(&f, coin, t, TruncationOrder::Second).unwrap().intensity();
        let shifted_err = (0..n).map(|j| (half[j] - p0[(j + lambda / 2) % n]).abs()).fold(0.0, f64::max);
        assert!(shifted_err < 1e-6, "{shifted_err}");
        for m in 1..=3 {
            let full = propagate_envelope(&f, coin, 2.0 * m as f64 * t, TruncationOrder::Second)
                .unwrap()
                .intensity();
            let err = full.iter().zip(&p0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-6, "n={m}: {err}");
        }
        // Intermediate times are genuinely different patterns.
        let mid = propagate_envelope(&f, coin, 0.5 * t, TruncationOrder::Second).unwrap().intensity();
        let err = mid.iter().zip(&p0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err > 1e-3);
    }

    #[test]
    fn split_recovers_branch_envelopes() {
        let coin = CoinParameter::new(0.5).unwrap();
        let k0 = 0.4;
        let plus = spectral::eigenspinor(k0, coin, Branch::Plus).unwrap();
        let minus = spectral::eigenspinor(k0, coin, Branch::Minus).unwrap();
        let xs: Vec<i64> = (-40..=40).collect();
        let env = |x: f64| (-x * x / 50.0).exp();
        let r = xs
            .iter()
            .map(|&x| {
                let ph = Complex64::from_polar(env(x as f64), k0 * x as f64);
                ph * (plus.components[0] * 0.6 + minus.components[0] * 0.8)
            })
            .collect();
        let l = xs
            .iter()
            .map(|&x| {
                let ph = Complex64::from_polar(env(x as f64), k0 * x as f64);
                ph * (plus.components[1] * 0.6 + minus.components[1] * 0.8)
            })
            .collect();
        let state = WalkerState::new(-40, r, l).unwrap();
        let parts = split_into_envelopes(&state, k0, coin).unwrap();
        assert_eq!(parts.len(), 2);
        assert!((parts[0].1 - 0.36).abs() < 1e-12);
        assert!((parts[1].1 - 0.64).abs() < 1e-12);
        let mid = (0 - parts[0].2.grid.start as i64) as usize;
        assert!(parts[0].2.values[mid].im.abs() < 1e-12);
    }

    #[test]
    fn split_drops_rounding_noise_branch() {
        let coin = CoinParameter::hadamard();
        let phi = spectral::eigenspinor(FRAC_PI_2, coin, Branch::Plus).unwrap().components;
        let xs = -60..=60;
        let amp = |x: i64, c: Complex64| Complex64::from_polar((-(x * x) as f64 / 200.0).exp(), FRAC_PI_2 * x as f64) * c;
        let r = xs.clone().map(|x| amp(x, phi[0])).collect();
        let l = xs.map(|x| amp(x, phi[1])).collect();
        let state = WalkerState::new(-60, r, l).unwrap();
        let parts = split_into_envelopes(&state, FRAC_PI_2, coin).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, Branch::Plus);
        let field = parts[0].2.padded(400);
        assert!(propagate_envelope(&field, coin, 300.0, TruncationOrder::Second).is_ok());
    }
}
