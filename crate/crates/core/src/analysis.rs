//! Measurements on probability distributions.

use serde::{Deserialize, Serialize};

use crate::continuum::FlatTopPrediction;
use crate::tolerance;
use crate::walk::ProbabilityDistribution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub total: f64,
}

pub fn moments(dist: &ProbabilityDistribution) -> Result<Moments> {
    let total = dist.total();
    if !(total > 0.0) {
        return Err(Error::EmptyDistribution);
    }
    let mean = dist.iter().map(|(x, p)| x as f64 * p).sum::<f64>() / total;
    let var = dist
        .iter()
        .map(|(x, p)| {
            let d = x as f64 - mean;
            d * d * p
        })
        .sum::<f64>()
        / total;
    Ok(Moments {
        mean,
        std: var.max(0.0).sqrt(),
        total,
    })
}

/// True when every site with `x + t` odd is empty, as for a walker started at the origin.
pub fn parity_zeros(dist: &ProbabilityDistribution, t: u64) -> bool {
    dist.iter()
        .filter(|(x, _)| (x + t as i64).rem_euclid(2) == 1)
        .all(|(_, p)| p < tolerance::PARITY_ZERO)
}

/// Plateau statistics of a distribution against the flat-top prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub predicted_w: f64,
    /// Central fraction `ρ` of `predicted_w` used as the plateau window.
    pub plateau_window: f64,
    pub window_lo: i64,
    pub window_hi: i64,
    pub plateau_mean: f64,
    /// RMS of `(P − plateau_mean) / plateau_mean` over the window.
    pub ripple_rms: f64,
    /// `|plateau_mean − 1/w| · w`.
    pub level_error: f64,
    /// Mean distance over which `P` drops from 0.9 to 0.1 of the plateau at each edge.
    pub edge_sharpness: f64,
    /// Distance between the outermost half-plateau crossings.
    pub measured_width: f64,
}

pub fn flatness(dist: &ProbabilityDistribution, prediction: &FlatTopPrediction, rho: f64) -> Result<FlatnessReport> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(format!("plateau fraction {rho} not in (0, 1]")));
    }
    if !prediction.asymptotic {
        return Err(Error::Transient {
            t: prediction.t,
            threshold: prediction.transient_threshold,
        });
    }
    let centre = moments(dist)?.mean;
    let half = rho * prediction.w / 2.0;
    let lo = (centre - half).ceil() as i64;
    let hi = (centre + half).floor() as i64;
    if lo < dist.x_min || hi > dist.x_max() || lo > hi {
        return Err(Error::WindowExceedsSupport {
            lo,
            hi,
            x_min: dist.x_min,
            x_max: dist.x_max(),
        });
    }
    let window = &dist.p[(lo - dist.x_min) as usize..=(hi - dist.x_min) as usize];
    let n = window.len() as f64;
    // Shifted sums keep a constant window exact.
    let first = window[0];
    let mean = first + window.iter().map(|p| p - first).sum::<f64>() / n;
    let ripple = (window.iter().map(|p| ((p - mean) / mean).powi(2)).sum::<f64>() / n).sqrt();

    let right = |level: f64| crossing(dist, mean * level, true);
    let left = |level: f64| crossing(dist, mean * level, false);
    let sharp_right = right(0.1) - right(0.9);
    let sharp_left = left(0.9) - left(0.1);

    Ok(FlatnessReport {
        predicted_w: prediction.w,
        plateau_window: rho,
        window_lo: lo,
        window_hi: hi,
        plateau_mean: mean,
        ripple_rms: ripple,
        level_error: (mean - prediction.level).abs() / prediction.level,
        edge_sharpness: 0.5 * (sharp_right + sharp_left),
        measured_width: right(0.5) - left(0.5),
    })
}

/// Outermost position (scanning inward from one end) where `P` reaches `level`,
/// linearly interpolated between sites.
fn crossing(dist: &ProbabilityDistribution, level: f64, from_right: bool) -> f64 {
    let p = &dist.p;
    let n = p.len();
    let idx = |i: usize| if from_right { n - 1 - i } else { i };
    for i in 0..n {
        let j = idx(i);
        if p[j] >= level {
            if i == 0 {
                return (dist.x_min + j as i64) as f64;
            }
            let outer = idx(i - 1);
            let frac = (p[j] - level) / (p[j] - p[outer]);
            let step = if from_right { 1.0 } else { -1.0 };
            return (dist.x_min + j as i64) as f64 + step * frac;
        }
    }
    f64::NAN
}

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("linear fit needs at least two paired samples".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("linear fit needs distinct abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// One packet located in a single distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub lo: i64,
    pub hi: i64,
    pub centroid: f64,
    pub mass: f64,
}

/// Splits `dist` into one or two packets separated by a gap below
/// [`tolerance::PACKET_GAP_FRACTION`] of the peak. Leftmost packet first.
pub fn find_packets(dist: &ProbabilityDistribution) -> Result<Vec<Packet>> {
    let p = &dist.p;
    let peak = p.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::EmptyDistribution);
    }
    let threshold = tolerance::PACKET_GAP_FRACTION * peak;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &v) in p.iter().enumerate() {
        match (v >= threshold, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, p.len() - 1));
    }
    if runs.len() > 2 {
        return Err(Error::NotSeparable(format!("{} packets above the gap threshold", runs.len())));
    }

    // Walk outward from a run while the distribution keeps decreasing.
    let descend_left = |mut i: usize| {
        while i > 0 && p[i - 1] <= p[i] && p[i - 1] > 0.0 {
            i -= 1;
        }
        i
    };
    let descend_right = |mut i: usize| {
        while i + 1 < p.len() && p[i + 1] <= p[i] && p[i + 1] > 0.0 {
            i += 1;
        }
        i
    };
    let regions: Vec<(usize, usize)> = match runs.as_slice() {
        [(a, b)] => vec![(descend_left(*a), descend_right(*b))],
        [(a0, b0), (a1, b1)] => {
            let split = (*b0..=*a1)
                .min_by(|&i, &j| p[i].total_cmp(&p[j]))
                .unwrap_or(*b0);
            vec![(descend_left(*a0), split), (split + 1, descend_right(*b1))]
        }
        _ => unreachable!(),
    };
    Ok(regions
        .into_iter()
        .map(|(a, b)| {
            let mass: f64 = p[a..=b].iter().sum();
            let first = (dist.x_min + a as i64) as f64;
            let centroid = first + p[a..=b].iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>() / mass;
            Packet {
                lo: dist.x_min + a as i64,
                hi: dist.x_min + b as i64,
                centroid,
                mass,
            }
        })
        .collect())
}

/// Linear fit of one packet's centroid against time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketFit {
    pub velocity: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Mass averaged over the samples.
    pub mass: f64,
    pub centroids: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketTrack {
    pub packets: Vec<PacketFit>,
}

pub fn track_packets(dists: &[ProbabilityDistribution]) -> Result<PacketTrack> {
    if dists.len() < 2 {
        return Err(Error::InvalidParameter("packet tracking needs at least two samples".into()));
    }
    let found = dists.iter().map(find_packets).collect::<Result<Vec<_>>>()?;
    let count = found[0].len();
    if let Some(bad) = found.iter().position(|f| f.len() != count) {
        return Err(Error::NotSeparable(format!(
            "sample {bad} has {} packets, sample 0 has {count}",
            found[bad].len()
        )));
    }
    let times: Vec<f64> = dists.iter().map(|d| d.t as f64).collect();
    let packets = (0..count)
        .map(|label| {
            let xs: Vec<f64> = found.iter().map(|f| f[label].centroid).collect();
            let (velocity, intercept, residual) = linear_fit(&times, &xs)?;
            Ok(PacketFit {
                velocity,
                intercept,
                residual,
                mass: found.iter().map(|f| f[label].mass).sum::<f64>() / found.len() as f64,
                centroids: dists.iter().map(|d| d.t).zip(xs).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PacketTrack { packets })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    L1,
    Linf,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Metric::L1),
            "linf" => Ok(Metric::Linf),
            _ => Err(Error::InvalidParameter(format!("unknown metric {s:?}"))),
        }
    }
}

/// Distance between two distributions aligned on the union of their windows.
pub fn distance(a: &ProbabilityDistribution, b: &ProbabilityDistribution, metric: Metric) -> f64 {
    let lo = a.x_min.min(b.x_min);
    let hi = a.x_max().max(b.x_max());
    let diffs = (lo..=hi).map(|x| (a.get(x) - b.get(x)).abs());
    match metric {
        Metric::L1 => diffs.sum(),
        Metric::Linf => diffs.fold(0.0, f64::max),
    }
}
