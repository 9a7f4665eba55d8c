//! Extended initial states `Ψ_{x,0} = N f_x e^{i c x²} e^{ik₀x} |C⟩`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::continuum::sinc;
use crate::spectral::{self, Branch};
use crate::tolerance;
use crate::walk::{CoinParameter, WalkerState};
use crate::{Error, Result};

/// Default sinc truncation half-width, in units of `σ₀`.
pub const SINC_HALF_WIDTH_FACTOR: f64 = 100.0;

/// Default periodic-envelope half-width, in periods.
pub const PERIODIC_HALF_PERIODS: u64 = 8;

/// Apodizing widths of the flat-top sweep, in units of `σ₀`.
pub const FIG2C_SIGMA_G_FACTORS: [f64; 3] = [1.1, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeFamily {
    Delta,
    Gaussian,
    Sinc,
    SincGaussian,
    Periodic,
}

/// Envelope shape. Only the fields used by `family` need to be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    pub family: EnvelopeFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, rename = "sigmaG", skip_serializing_if = "Option::is_none")]
    pub sigma_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u32>,
    #[serde(default)]
    pub x0: f64,
    /// Curvature `c` of the phase factor `e^{i c (x − x₀)²}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_phase: Option<f64>,
    /// Overrides the truncation half-width (sites either side of `x0`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<u64>,
}

impl EnvelopeSpec {
    fn bare(family: EnvelopeFamily) -> Self {
        Self {
            family,
            sigma0: None,
            sigma_g: None,
            lambda: None,
            x0: 0.0,
            quad_phase: None,
            half_width: None,
        }
    }

    pub fn delta(x0: i64) -> Self {
        Self {
            x0: x0 as f64,
            ..Self::bare(EnvelopeFamily::Delta)
        }
    }

    pub fn gaussian(sigma0: f64) -> Self {
        Self {
            sigma0: Some(sigma0),
            ..Self::bare(EnvelopeFamily::Gaussian)
        }
    }

    pub fn sinc(sigma0: f64) -> Self {
        Self {
            sigma0: Some(sigma0),
            ..Self::bare(EnvelopeFamily::Sinc)
        }
    }

    pub fn sinc_gaussian(sigma0: f64, sigma_g: f64) -> Self {
        Self {
            sigma0: Some(sigma0),
            sigma_g: Some(sigma_g),
            ..Self::bare(EnvelopeFamily::SincGaussian)
        }
    }

    /// Gaussian-lobed grating: lobes of width `sigma0` every `lambda` sites.
    pub fn periodic(lambda: u32, sigma0: f64) -> Self {
        Self {
            lambda: Some(lambda),
            sigma0: Some(sigma0),
            ..Self::bare(EnvelopeFamily::Periodic)
        }
    }

    fn sigma0(&self) -> Result<f64> {
        match self.sigma0 {
            Some(s) if s > 0.0 && s.is_finite() => Ok(s),
            Some(s) => Err(Error::InvalidSpec(format!("sigma0 = {s} must be positive"))),
            None => Err(Error::InvalidSpec(format!("{:?} envelope needs sigma0", self.family))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x0.is_finite() {
            return Err(Error::InvalidSpec("x0 must be finite".into()));
        }
        if let Some(c) = self.quad_phase {
            if !c.is_finite() {
                return Err(Error::InvalidSpec("quad_phase must be finite".into()));
            }
        }
        match self.family {
            EnvelopeFamily::Delta => {
                if self.x0.fract() != 0.0 {
                    return Err(Error::InvalidSpec(format!("delta needs an integer x0, got {}", self.x0)));
                }
            }
            EnvelopeFamily::Gaussian | EnvelopeFamily::Sinc => {
                self.sigma0()?;
            }
            EnvelopeFamily::SincGaussian => {
                self.sigma0()?;
                match self.sigma_g {
                    Some(g) if g > 0.0 && g.is_finite() => {}
                    other => return Err(Error::InvalidSpec(format!("sinc_gaussian needs sigmaG > 0, got {other:?}"))),
                }
            }
            EnvelopeFamily::Periodic => {
                self.sigma0()?;
                match self.lambda {
                    Some(l) if l >= 2 => {}
                    other => return Err(Error::InvalidSpec(format!("periodic needs integer lambda >= 2, got {other:?}"))),
                }
            }
        }
        Ok(())
    }

    /// Envelope value at `x`, including the quadratic phase but not the carrier.
    pub fn profile(&self, x: f64) -> Complex64 {
        let d = x - self.x0;
        let gauss = |s: f64| (-d * d / (2.0 * s * s)).exp();
        let sigma0 = self.sigma0.unwrap_or(1.0);
        let magnitude = match self.family {
            EnvelopeFamily::Delta => {
                if d == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            EnvelopeFamily::Gaussian => gauss(sigma0),
            EnvelopeFamily::Sinc => sinc(d / sigma0),
            EnvelopeFamily::SincGaussian => sinc(d / sigma0) * gauss(self.sigma_g.unwrap_or(f64::INFINITY)),
            EnvelopeFamily::Periodic => {
                let lambda = self.lambda.unwrap_or(2) as f64;
                let centred = d - lambda * (d / lambda).round();
                (-2..=2)
                    .map(|m| {
                        let e = centred - m as f64 * lambda;
                        (-e * e / (2.0 * sigma0 * sigma0)).exp()
                    })
                    .sum()
            }
        };
        match self.quad_phase {
            Some(c) => Complex64::from_polar(magnitude, c * d * d),
            None => Complex64::new(magnitude, 0.0),
        }
    }

    /// Truncation half-width in sites either side of `x0`.
    pub fn cutoff(&self) -> Result<u64> {
        self.validate()?;
        if self.family == EnvelopeFamily::Delta {
            return Ok(0);
        }
        if let Some(h) = self.half_width {
            return Ok(h);
        }
        // exp(−d²/2σ²) < ENVELOPE_CUTOFF beyond this many widths
        let gauss_widths = (-2.0 * tolerance::ENVELOPE_CUTOFF.ln()).sqrt();
        let sigma0 = self.sigma0()?;
        let half = match self.family {
            EnvelopeFamily::Gaussian => sigma0 * gauss_widths,
            EnvelopeFamily::Sinc => SINC_HALF_WIDTH_FACTOR * sigma0,
            EnvelopeFamily::SincGaussian => {
                (SINC_HALF_WIDTH_FACTOR * sigma0).min(self.sigma_g.unwrap_or(f64::INFINITY) * gauss_widths)
            }
            EnvelopeFamily::Periodic => (PERIODIC_HALF_PERIODS * self.lambda.unwrap_or(2) as u64) as f64,
            EnvelopeFamily::Delta => unreachable!(),
        };
        Ok(half.ceil() as u64)
    }
}

/// Coin state shared by every site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CoinChoice {
    /// Explicit `(R, L)` components as `[re, im]` pairs; normalized on use.
    Spinor([[f64; 2]; 2]),
    /// The eigenspinor `Φ_{k₀}^{(s)}` of the walk's coin.
    Eigenspinor {
        #[serde(deserialize_with = "crate::angle::deserialize")]
        k0: f64,
        s: Branch,
    },
}

impl CoinChoice {
    pub fn resolve(&self, coin: CoinParameter) -> Result<[Complex64; 2]> {
        match self {
            CoinChoice::Spinor([[a, b], [c, d]]) => {
                let v = [Complex64::new(*a, *b), Complex64::new(*c, *d)];
                let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
                if !(norm > 0.0) || !norm.is_finite() {
                    return Err(Error::InvalidSpec("coin spinor has zero norm".into()));
                }
                Ok([v[0] / norm, v[1] / norm])
            }
            CoinChoice::Eigenspinor { k0, s } => Ok(spectral::eigenspinor(*k0, coin, *s)?.components),
        }
    }

    pub fn from_components(v: [Complex64; 2]) -> Self {
        CoinChoice::Spinor([[v[0].re, v[0].im], [v[1].re, v[1].im]])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditionSpec {
    pub envelope: EnvelopeSpec,
    #[serde(deserialize_with = "crate::angle::deserialize")]
    pub carrier_k0: f64,
    pub coin: CoinChoice,
}

/// Builds the normalized lattice state described by `spec`.
pub fn build(spec: &InitialConditionSpec, coin: CoinParameter) -> Result<WalkerState> {
    let half = spec.envelope.cutoff()? as i64;
    if !spec.carrier_k0.is_finite() || spec.carrier_k0.abs() > PI {
        return Err(Error::InvalidSpec(format!("carrier_k0 = {} outside [-π, π]", spec.carrier_k0)));
    }
    let spinor = spec.coin.resolve(coin)?;
    let center = spec.envelope.x0.round() as i64;
    let lo = center - half;
    let len = (2 * half + 1) as usize;
    let mut r = Vec::with_capacity(len);
    let mut l = Vec::with_capacity(len);
    for x in lo..=center + half {
        let amp = spec.envelope.profile(x as f64) * Complex64::from_polar(1.0, spec.carrier_k0 * x as f64);
        r.push(amp * spinor[0]);
        l.push(amp * spinor[1]);
    }
    WalkerState::new(lo, r, l).map_err(|e| match e {
        Error::InvalidParameter(m) => Error::InvalidSpec(m),
        other => other,
    })
}

/// `(|⟨Φ_{k₀}^{(+)}|C⟩|², |⟨Φ_{k₀}^{(−)}|C⟩|²)` for the state's site-uniform coin `C`.
pub fn branch_weights(state: &WalkerState, k0: f64, coin: CoinParameter) -> Result<(f64, f64)> {
    let sites = state.r().iter().zip(state.l());
    let (best, _) = sites
        .clone()
        .map(|(r, l)| ([*r, *l], r.norm_sqr() + l.norm_sqr()))
        .fold(([Complex64::new(0.0, 0.0); 2], 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let norm = (best[0].norm_sqr() + best[1].norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("state has no amplitude".into()));
    }
    let c = [best[0] / norm, best[1] / norm];
    for (r, l) in sites {
        let mag = r.norm_sqr() + l.norm_sqr();
        let along = (c[0].conj() * r + c[1].conj() * l).norm_sqr();
        if mag - along > tolerance::UNIFORM_COIN * mag + 1e-300 {
            return Err(Error::NonUniformCoin);
        }
    }
    let plus = spectral::eigenspinor(k0, coin, Branch::Plus)?.project(c).norm_sqr();
    let minus = spectral::eigenspinor(k0, coin, Branch::Minus)?.project(c).norm_sqr();
    Ok((plus, minus))
}

/// Initial conditions of the localized, sinc and apodized-sinc experiments.
pub mod presets {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn resting_coin() -> CoinChoice {
        CoinChoice::Eigenspinor {
            k0: FRAC_PI_2,
            s: Branch::Plus,
        }
    }

    /// `δ_{x,0} Φ_{π/2}^{(+)}`.
    pub fn localized() -> InitialConditionSpec {
        InitialConditionSpec {
            envelope: EnvelopeSpec::delta(0),
            carrier_k0: 0.0,
            coin: resting_coin(),
        }
    }

    /// `e^{iπx/2} sinc(x/σ₀) Φ_{π/2}^{(+)}`.
    pub fn resting_sinc(sigma0: f64) -> InitialConditionSpec {
        InitialConditionSpec {
            envelope: EnvelopeSpec::sinc(sigma0),
            carrier_k0: FRAC_PI_2,
            coin: resting_coin(),
        }
    }

    /// The sinc state multiplied by a Gaussian of width `sigma_g`.
    pub fn apodized_sinc(sigma0: f64, sigma_g: f64) -> InitialConditionSpec {
        InitialConditionSpec {
            envelope: EnvelopeSpec::sinc_gaussian(sigma0, sigma_g),
            carrier_k0: FRAC_PI_2,
            coin: resting_coin(),
        }
    }

    /// One apodized sinc per width in [`FIG2C_SIGMA_G_FACTORS`].
    pub fn apodized_sweep(sigma0: f64) -> Vec<InitialConditionSpec> {
        FIG2C_SIGMA_G_FACTORS
            .iter()
            .map(|f| apodized_sinc(sigma0, f * sigma0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::probability;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

    fn hadamard() -> CoinParameter {
        CoinParameter::hadamard()
    }

    #[test]
    fn localized_start() {
        let state = build(&presets::localized(), hadamard()).unwrap();
        assert_eq!(state.support(), Some((0, 0)));
        let phi = spectral::eigenspinor(FRAC_PI_2, hadamard(), Branch::Plus).unwrap();
        let (r, l) = state.amplitude(0);
        assert!((r - phi.components[0]).norm() < 1e-15);
        assert!((l - phi.components[1]).norm() < 1e-15);
    }

    #[test]
    fn sinc_zeros_and_peak() {
        let spec = presets::resting_sinc(15.0);
        let state = build(&spec, hadamard()).unwrap();
        assert_eq!(spec.envelope.cutoff().unwrap(), 1500);
        assert_eq!(spec.envelope.profile(0.0).re, 1.0);
        assert!(spec.envelope.profile(15.0).norm() < 1e-15);
        assert!(spec.envelope.profile(-15.0).norm() < 1e-15);
        let p = probability(&state);
        assert!(p.get(15) < 1e-30 && p.get(-15) < 1e-30);
        assert!(p.get(0) > p.get(7));
        assert!((p.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_is_normalized() {
        let spec = InitialConditionSpec {
            envelope: EnvelopeSpec::gaussian(10.0),
            carrier_k0: 0.0,
            coin: CoinChoice::Spinor([[1.0, 0.0], [0.0, 0.0]]),
        };
        let state = build(&spec, hadamard()).unwrap();
        assert!((probability(&state).total() - 1.0).abs() < 1e-12);
        assert_eq!(spec.envelope.cutoff().unwrap(), 75);
        let edge = spec.envelope.profile(75.0).norm();
        assert!(edge < tolerance::ENVELOPE_CUTOFF);
    }

    #[test]
    fn invalid_specs() {
        let mut e = EnvelopeSpec::gaussian(-1.0);
        assert!(matches!(e.validate(), Err(Error::InvalidSpec(_))));
        e = EnvelopeSpec::sinc_gaussian(10.0, 0.0);
        assert!(e.validate().is_err());
        e = EnvelopeSpec::periodic(1, 2.0);
        assert!(e.validate().is_err());
        e = EnvelopeSpec::delta(0);
        e.x0 = 0.5;
        assert!(e.validate().is_err());
        let spec = InitialConditionSpec {
            envelope: EnvelopeSpec::gaussian(3.0),
            carrier_k0: 4.0,
            coin: CoinChoice::Spinor([[1.0, 0.0], [0.0, 0.0]]),
        };
        assert!(build(&spec, hadamard()).is_err());
        let spec = InitialConditionSpec {
            carrier_k0: 0.0,
            coin: CoinChoice::Spinor([[0.0, 0.0], [0.0, 0.0]]),
            ..spec
        };
        assert!(build(&spec, hadamard()).is_err());
    }

    #[test]
    fn branch_weight_values() {
        let coin = hadamard();
        let plus = spectral::eigenspinor(0.0, coin, Branch::Plus).unwrap().components;
        let minus = spectral::eigenspinor(0.0, coin, Branch::Minus).unwrap().components;
        let make = |c: [Complex64; 2]| {
            build(
                &InitialConditionSpec {
                    envelope: EnvelopeSpec::gaussian(5.0),
                    carrier_k0: 0.0,
                    coin: CoinChoice::from_components(c),
                },
                coin,
            )
            .unwrap()
        };
        let (p, m) = branch_weights(&make(plus), 0.0, coin).unwrap();
        assert!((p - 1.0).abs() < 1e-12 && m.abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mix = [(plus[0] + minus[0]) * s, (plus[1] + minus[1]) * s];
        let (p, m) = branch_weights(&make(mix), 0.0, coin).unwrap();
        assert!((p - 0.5).abs() < 1e-12 && (m - 0.5).abs() < 1e-12);
        let up = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let (p, m) = branch_weights(&make(up), 0.0, coin).unwrap();
        assert!((p - FRAC_PI_8.cos().powi(2)).abs() < 1e-12);
        assert!((m - FRAC_PI_8.sin().powi(2)).abs() < 1e-12);
        assert!((p + m - 1.0).abs() < 1e-12);
        assert!((p - 0.8536).abs() < 1e-4);
    }

    #[test]
    fn non_uniform_coin_is_rejected() {
        let r = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let l = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let state = WalkerState::new(0, r, l).unwrap();
        assert_eq!(branch_weights(&state, 0.0, hadamard()), Err(Error::NonUniformCoin));
    }

    #[test]
    fn apodized_converges_to_sinc() {
        let coin = hadamard();
        let sinc_state = build(&presets::resting_sinc(15.0), coin).unwrap();
        let mut prev = f64::INFINITY;
        for sigma_g in [1e3, 1e4, 1e5, 1e6] {
            let mut spec = presets::apodized_sinc(15.0, sigma_g);
            spec.envelope.half_width = Some(1500);
            let apod = build(&spec, coin).unwrap();
            let diff = apod.max_deviation(&sinc_state);
            assert!(diff < prev);
            prev = diff;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn quad_phase_and_periodic_profiles() {
        let mut e = EnvelopeSpec::gaussian(4.0);
        e.quad_phase = Some(0.01);
        let z = e.profile(10.0);
        assert!((z.arg() - 1.0).abs() < 1e-12);
        let g = EnvelopeSpec::periodic(16, 2.0);
        assert!((g.profile(3.0) - g.profile(3.0 + 16.0 * 5.0)).norm() < 1e-12);
        assert_eq!(g.cutoff().unwrap(), 128);
    }

    #[test]
    fn config_field_names() {
        let json = r#"{"envelope":{"family":"sinc_gaussian","sigma0":15,"sigmaG":30,"x0":0},
            "carrier_k0":"pi/2","coin":{"eigenspinor":{"k0":"pi/2","s":1}}}"#;
        let spec: InitialConditionSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec, presets::apodized_sinc(15.0, 30.0));
        assert_eq!(presets::apodized_sweep(15.0)[0].envelope.sigma_g, Some(16.5));
        let bad = r#"{"envelope":{"family":"sinc","sigma0":15,"sigma_g":3},"carrier_k0":0,"coin":{"spinor":[[1,0],[0,0]]}}"#;
        assert!(serde_json::from_str::<InitialConditionSpec>(bad).is_err());
    }
}
