//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p qwalk-core --test acceptance -- --nocapture`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use qwalk_core::analysis::{distance, flatness, moments, track_packets, Metric};
use qwalk_core::continuum::{flat_top_prediction, propagate_envelope, talbot_period, width_law};
use qwalk_core::initcond::{branch_weights, build, presets};
use qwalk_core::spectral::{self, dispersion_curve, exact_evolve, min_ring_size};
use qwalk_core::walk::{evolve, probability};
use qwalk_core::{
    Branch, CoinChoice, CoinParameter, Complex64, EnvelopeField, EnvelopeSpec, Grid, InitialConditionSpec,
    ProbabilityDistribution, TruncationOrder, WalkerState,
};

fn hadamard() -> CoinParameter {
    CoinParameter::hadamard()
}

fn report(id: u32, title: &str, pass: bool, detail: String) {
    println!("[{}] C{id:02} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn gaussian(sigma0: f64, k0: f64, coin: CoinChoice) -> InitialConditionSpec {
    InitialConditionSpec {
        envelope: EnvelopeSpec::gaussian(sigma0),
        carrier_k0: k0,
        coin,
    }
}

fn eigen(k0: f64, s: Branch) -> CoinChoice {
    CoinChoice::Eigenspinor { k0, s }
}

/// Distributions at each of `times` (ascending), iterating the map between samples.
fn map_series(state: &WalkerState, coin: CoinParameter, times: &[u64]) -> Vec<ProbabilityDistribution> {
    let mut current = state.clone();
    times
        .iter()
        .map(|&t| {
            current = evolve(&current, coin, t - current.t()).unwrap();
            probability(&current)
        })
        .collect()
}

/// Spectral-engine distribution at time `t`.
fn spectral_at(state: &WalkerState, coin: CoinParameter, t: u64) -> ProbabilityDistribution {
    let n = min_ring_size(state, t).next_power_of_two();
    probability(&exact_evolve(state, coin, t, n).unwrap())
}

#[test]
fn c01_engine_equivalence() {
    let coin = hadamard();
    let start = WalkerState::localized(0, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    let clock = Instant::now();
    let map = evolve(&start, coin, 100).unwrap();
    let spectral = exact_evolve(&start, coin, 100, min_ring_size(&start, 100)).unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    let dev = map.max_deviation(&spectral);
    report(
        1,
        "map vs spectral, delta start, t=100",
        dev < 1e-10 && elapsed < 1.0,
        format!("max |Δamplitude| = {dev:.2e} (< 1e-10), runtime {elapsed:.3} s (< 1 s)"),
    );
}

#[test]
fn c02_unitarity() {
    let coin = hadamard();
    let start = build(&gaussian(10.0, FRAC_PI_2, eigen(FRAC_PI_2, Branch::Plus)), coin).unwrap();
    let end = evolve(&start, coin, 10_000).unwrap();
    let drift = (probability(&end).total() - 1.0).abs();
    report(
        2,
        "unitarity over 1e4 map steps",
        drift < 1e-10,
        format!("|ΣP − 1| = {drift:.2e} (< 1e-10)"),
    );
}

#[test]
fn c03_group_velocity_transport() {
    let coin = hadamard();
    let sigma0 = 10.0;
    let start = build(&gaussian(sigma0, 0.0, eigen(0.0, Branch::Plus)), coin).unwrap();
    let times: Vec<u64> = (0..=10).map(|i| 20 * i).collect();
    let series = map_series(&start, coin, &times);
    let track = track_packets(&series).unwrap();
    let v_pred = -coin.cos();
    let v = track.packets[0].velocity;
    let v_err = ((v - v_pred) / v_pred).abs();

    // Rigidly translated initial Gaussian |f|² ∝ exp(−(x − v t)²/σ₀²).
    let deformation = series
        .iter()
        .map(|dist| {
            let shift = v_pred * dist.t as f64;
            let raw: Vec<f64> = (dist.x_min..=dist.x_max())
                .map(|x| (-(x as f64 - shift).powi(2) / (sigma0 * sigma0)).exp())
                .collect();
            let norm: f64 = raw.iter().sum();
            let ideal = ProbabilityDistribution::new(dist.t, dist.x_min, raw.iter().map(|p| p / norm).collect()).unwrap();
            distance(dist, &ideal, Metric::L1)
        })
        .fold(0.0, f64::max);
    report(
        3,
        "distortionless transport at k0=0",
        track.packets.len() == 1 && v_err < 0.02 && deformation < 0.05,
        format!(
            "v = {v:.5} vs {v_pred:.5} (rel err {:.3}% < 2%), max L1 deformation {deformation:.4} (< 0.05)",
            100.0 * v_err
        ),
    );
}

#[test]
fn c04_resting_packet() {
    let coin = hadamard();
    let start = build(&gaussian(10.0, FRAC_PI_2, eigen(FRAC_PI_2, Branch::Plus)), coin).unwrap();
    let times: Vec<u64> = (0..=10).map(|i| 100 * i).collect();
    let series = map_series(&start, coin, &times);
    let track = track_packets(&series).unwrap();
    let v = track.packets[0].velocity;
    report(
        4,
        "resting packet at k0=π/2 over t=1000",
        track.packets.len() == 1 && v.abs() < 0.01,
        format!("|centroid drift| = {:.2e} sites/step (< 0.01)", v.abs()),
    );
}

#[test]
fn c05_width_law() {
    let coin = hadamard();
    let sigma0 = 10.0;
    let clock = Instant::now();
    let start = build(&gaussian(sigma0, FRAC_PI_2, eigen(FRAC_PI_2, Branch::Plus)), coin).unwrap();
    let times: Vec<u64> = (0..=40).map(|i| 50 * i).collect();
    let series = map_series(&start, coin, &times);
    let std0 = moments(&series[0]).unwrap().std;
    let ratios: Vec<f64> = series.iter().map(|d| moments(d).unwrap().std / std0).collect();
    let onset = 5.0 * sigma0 * sigma0 * coin.tan();

    let mut worst_early: f64 = 0.0;
    let (mut late_t, mut late_r) = (Vec::new(), Vec::new());
    for (&t, &r) in times.iter().zip(&ratios) {
        let t = t as f64;
        if t <= onset + 1e-9 {
            let w = width_law(t, sigma0, coin).unwrap();
            worst_early = worst_early.max(((r - w) / w).abs());
        }
        if t >= onset - 1e-9 {
            late_t.push(t);
            late_r.push(r);
        }
    }
    let (slope, _, _) = qwalk_core::analysis::linear_fit(&late_t, &late_r).unwrap();
    let slope_pred = 1.0 / (sigma0 * sigma0 * coin.tan());
    let slope_err = ((slope - slope_pred) / slope_pred).abs();
    let elapsed = clock.elapsed().as_secs_f64();
    report(
        5,
        "Gaussian width law at k0=π/2",
        worst_early < 0.03 && slope_err < 0.05 && elapsed < 10.0,
        format!(
            "max |ratio/w − 1| for t ≤ {onset:.0}: {:.3}% (< 3%); late slope {slope:.6} vs {slope_pred:.6} ({:.2}% < 5%); runtime {elapsed:.2} s (< 10 s)",
            100.0 * worst_early,
            100.0 * slope_err
        ),
    );
}

#[test]
fn c06_flat_top_reproduction() {
    let coin = hadamard();
    let t = 20_000;
    let clock = Instant::now();
    let start = build(&presets::resting_sinc(15.0), coin).unwrap();
    let dist = spectral_at(&start, coin, t);
    let elapsed = clock.elapsed().as_secs_f64();
    let pred = flat_top_prediction(15.0, coin, t as f64).unwrap();
    let report_ = flatness(&dist, &pred, 0.8).unwrap();
    let std = moments(&dist).unwrap().std;
    let width_err = ((report_.measured_width - pred.w) / pred.w).abs();
    let std_err = ((std - pred.std) / pred.std).abs();

    // Cutoff sensitivity of the truncated sinc (informational).
    for half_width in [300, 5000] {
        let mut spec = presets::resting_sinc(15.0);
        spec.envelope.half_width = Some(half_width);
        let d = spectral_at(&build(&spec, coin).unwrap(), coin, t);
        let r = flatness(&d, &pred, 0.8).unwrap();
        println!(
            "       sinc cutoff ±{half_width}: width {:.1}, level err {:.3}, ripple {:.4}",
            r.measured_width, r.level_error, r.ripple_rms
        );
    }
    report(
        6,
        "flat-top from sinc, t=20000",
        width_err < 0.10 && std_err < 0.10 && report_.level_error < 0.15 && elapsed < 120.0,
        format!(
            "width {:.1} vs {:.1} ({:.2}% < 10%), std {std:.1} vs {:.1} ({:.2}% < 10%), plateau level err {:.2}% (< 15%), ripple {:.4}, runtime {elapsed:.2} s",
            report_.measured_width,
            pred.w,
            100.0 * width_err,
            pred.std,
            100.0 * std_err,
            100.0 * report_.level_error,
            report_.ripple_rms
        ),
    );
}

#[test]
fn c07_apodization_improves_flatness() {
    let coin = hadamard();
    let t = 20_000;
    let pred = flat_top_prediction(15.0, coin, t as f64).unwrap();
    let sinc = spectral_at(&build(&presets::resting_sinc(15.0), coin).unwrap(), coin, t);
    let apod = spectral_at(&build(&presets::apodized_sinc(15.0, 30.0), coin).unwrap(), coin, t);
    let r_sinc = flatness(&sinc, &pred, 0.8).unwrap().ripple_rms;
    let r_apod = flatness(&apod, &pred, 0.8).unwrap().ripple_rms;
    report(
        7,
        "Gaussian apodization σG=2σ0 lowers ripple",
        r_apod < r_sinc && r_apod < 0.1,
        format!("ripple {r_apod:.5} (apodized) < {r_sinc:.5} (sinc) and < 0.1"),
    );
}

#[test]
fn c08_homogeneity_increases_with_time() {
    let coin = hadamard();
    let mut lines = Vec::new();
    let mut pass = true;
    for spec in presets::apodized_sweep(15.0) {
        let start = build(&spec, coin).unwrap();
        let decomposition = spectral::decompose(&start, coin, min_ring_size(&start, 20_000).next_power_of_two()).unwrap();
        let ripple = |t: u64| {
            let d = probability(&decomposition.propagate(t).unwrap());
            let pred = flat_top_prediction(15.0, coin, t as f64).unwrap();
            flatness(&d, &pred, 0.8).unwrap().ripple_rms
        };
        let (early, late) = (ripple(10_000), ripple(20_000));
        pass &= late < early;
        lines.push(format!("σG={}: {early:.6} → {late:.6}", spec.envelope.sigma_g.unwrap()));
    }
    report(8, "ripple decreases from t=10000 to t=20000", pass, lines.join("; "));
}

/// Gaussian-lobed grating of period λ on a ring of `periods` periods.
fn grating(lambda: u32, periods: usize) -> EnvelopeField {
    let spec = EnvelopeSpec::periodic(lambda, 4.0);
    let grid = Grid::lattice(0, lambda as usize * periods).unwrap();
    EnvelopeField::sample(grid, |x| spec.profile(x), FRAC_PI_2, Branch::Plus, true).unwrap()
}

#[test]
fn c09_talbot_recurrence() {
    let coin = hadamard();
    let lambda = 32;
    let field = grating(lambda, 8);
    let period = talbot_period(lambda as f64, coin).unwrap();
    let p0 = field.intensity();
    let pt = propagate_envelope(&field, coin, period, TruncationOrder::Second).unwrap().intensity();
    let linf = pt.iter().zip(&p0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let n = p0.len();
    let half = lambda as usize / 2;
    let shifted = (0..n).map(|j| (pt[j] - p0[(j + half) % n]).abs()).fold(0.0, f64::max);
    let p2 = propagate_envelope(&field, coin, 2.0 * period, TruncationOrder::Second).unwrap().intensity();
    let double = p2.iter().zip(&p0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!(
        "       at T the pattern equals |F(x+λ/2, 0)|² to {shifted:.2e}; at 2T it equals |F(x, 0)|² to {double:.2e}"
    );
    report(
        9,
        "Talbot recurrence at T = λ² tanθ/(2π)",
        linf < 1e-6,
        format!("T = {period:.4}, L∞ ||F(T)|² − |F(0)|²| = {linf:.3e} (< 1e-6), peak |F|² = {:.3e}", p0.iter().cloned().fold(0.0, f64::max)),
    );
}

#[test]
fn c10_dispersion_curve() {
    let coin = hadamard();
    let curve = dispersion_curve(coin, 1024).unwrap();
    let at = |k: f64| *curve.iter().find(|p| (p.k - k).abs() < 1e-12).expect("grid point");
    let checks = [
        (at(0.0).omega, 0.0),
        (at(FRAC_PI_2).omega, -FRAC_PI_4),
        (at(-FRAC_PI_2).omega, FRAC_PI_4),
        (at(0.0).vg, -FRAC_1_SQRT_2),
        (at(FRAC_PI_2).vg, 0.0),
        (at(-FRAC_PI_2).vg, 0.0),
    ];
    let point_err = checks.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let h = 1e-5;
    let fd_err = curve
        .iter()
        .map(|p| {
            let fd = (spectral::omega(p.k + h, coin) - spectral::omega(p.k - h, coin)) / (2.0 * h);
            (fd - p.vg).abs()
        })
        .fold(0.0, f64::max);
    let vmax = curve.iter().map(|p| p.vg.abs()).fold(0.0, f64::max);
    report(
        10,
        "dispersion curve",
        point_err < 1e-12 && fd_err < 1e-6 && (vmax - coin.cos()).abs() < 1e-12,
        format!("landmark err {point_err:.1e} (< 1e-12), |v_g − FD| ≤ {fd_err:.1e} (< 1e-6), max|v_g| = {vmax:.12}"),
    );
    assert!(curve.first().unwrap().k == -PI && curve.len() == 1025);
}

#[test]
fn c11_branch_split() {
    let coin = hadamard();
    let plus = spectral::eigenspinor(0.0, coin, Branch::Plus).unwrap().components;
    let minus = spectral::eigenspinor(0.0, coin, Branch::Minus).unwrap().components;
    let mix = [(plus[0] + minus[0]) * FRAC_1_SQRT_2, (plus[1] + minus[1]) * FRAC_1_SQRT_2];
    let start = build(&gaussian(10.0, 0.0, CoinChoice::from_components(mix)), coin).unwrap();
    let (w_plus, w_minus) = branch_weights(&start, 0.0, coin).unwrap();
    let times: Vec<u64> = (2..=8).map(|i| 50 * i).collect();
    let track = track_packets(&map_series(&start, coin, &times)).unwrap();
    let c = coin.cos();
    let pass = track.packets.len() == 2 && {
        // + branch moves at −cosθ (left), − branch at +cosθ (right).
        let (left, right) = (&track.packets[0], &track.packets[1]);
        let v_ok = ((left.velocity + c) / c).abs() < 0.02 && ((right.velocity - c) / c).abs() < 0.02;
        let ratio = right.mass / left.mass;
        let ratio_pred = w_minus / w_plus;
        v_ok && ((ratio - ratio_pred) / ratio_pred).abs() < 0.02
    };
    let detail = match track.packets.as_slice() {
        [l, r] => format!(
            "velocities {:.5}, {:.5} vs ∓{c:.5}; mass ratio {:.4} vs branch weights {:.4}",
            l.velocity,
            r.velocity,
            r.mass / l.mass,
            w_minus / w_plus
        ),
        other => format!("found {} packets", other.len()),
    };
    report(11, "branch split into opposite packets", pass, detail);
}
