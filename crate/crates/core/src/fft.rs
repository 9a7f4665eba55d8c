use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse DFT pair of a fixed length.
///
/// Forward is `X_j = Σ_n x_n e^{-2πi jn/N}`; inverse carries the `1/N`.
pub(crate) struct Dft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Dft {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len);
        self.forward.process(data);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len);
        self.inverse.process(data);
        let scale = 1.0 / self.len as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

/// Angular frequency of DFT bin `j` on an `n`-point grid of spacing `h`,
/// folded into `(-π/h, π/h]`.
pub(crate) fn bin_wavenumber(j: usize, n: usize, h: f64) -> f64 {
    let signed = if 2 * j > n { j as f64 - n as f64 } else { j as f64 };
    2.0 * std::f64::consts::PI * signed / (n as f64 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_convention() {
        let n = 12;
        let dft = Dft::new(n);
        let mut data: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let orig = data.clone();
        dft.forward(&mut data);
        // bin 1 by direct sum with e^{-ikx}
        let k = bin_wavenumber(1, n, 1.0);
        let direct: Complex64 = orig
            .iter()
            .enumerate()
            .map(|(x, v)| v * Complex64::from_polar(1.0, -k * x as f64))
            .sum();
        assert!((direct - data[1]).norm() < 1e-12);
        dft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn folding() {
        assert_eq!(bin_wavenumber(0, 8, 1.0), 0.0);
        assert!((bin_wavenumber(4, 8, 1.0) - std::f64::consts::PI).abs() < 1e-15);
        assert!((bin_wavenumber(5, 8, 1.0) + 0.75 * std::f64::consts::PI).abs() < 1e-15);
    }
}
