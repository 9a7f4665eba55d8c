//! Runs one configured simulation and writes its CSV files and `result.json`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qwalk_core::analysis::{flatness, moments, track_packets};
use qwalk_core::continuum::{flat_top_prediction, propagate_envelope, split_into_envelopes};
use qwalk_core::initcond::build;
use qwalk_core::spectral::{decompose, dispersion_curve, min_ring_size};
use qwalk_core::walk::{evolve, probability};
use qwalk_core::{
    Branch, CoinParameter, FlatTopPrediction, FlatnessReport, Moments, PacketTrack, ProbabilityDistribution,
    TruncationOrder, WalkerState,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{check_distinct_outputs, Engine, Output, RunConfig};
use crate::error::{CliError, Result};
use crate::table;

pub const RESULT_FILE: &str = "result.json";
pub const DISPERSION_FILE: &str = "dispersion.csv";

#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub config: RunConfig,
    pub engine: EngineInfo,
    pub samples: Vec<SampleRecord>,
    pub packets: Option<PacketTrack>,
    pub dispersion_file: Option<String>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct EngineInfo {
    pub name: Engine,
    pub version: &'static str,
    /// Ring length of the spectral propagator.
    pub ring_size: Option<usize>,
    pub truncation: Option<TruncationOrder>,
    /// `(+, −)` weights of the envelopes the continuum engine propagates.
    pub branch_weights: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub t: u64,
    pub x_min: i64,
    pub x_max: i64,
    pub rows: usize,
    /// Distribution CSV, relative to the run's output directory.
    pub file: Option<String>,
    pub moments: Option<Moments>,
    pub prediction: Option<FlatTopPrediction>,
    /// Absent while the prediction is still in its transient regime.
    pub flatness: Option<FlatnessReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

fn engine_error(run: &RunConfig, what: &str) -> impl Fn(qwalk_core::Error) -> CliError {
    let context = format!("{} ({what})", run.output_path);
    move |source| CliError::Engine {
        context: context.clone(),
        source,
    }
}

pub fn output_dir(run: &RunConfig, base: Option<&Path>) -> PathBuf {
    match base {
        Some(base) => base.join(&run.output_path),
        None => PathBuf::from(&run.output_path),
    }
}

/// Runs every config, concurrently when `parallel` is set.
pub fn simulate_all(runs: &[RunConfig], base: Option<&Path>, parallel: bool) -> Result<Vec<ResultRecord>> {
    for run in runs {
        run.validate()?;
    }
    check_distinct_outputs(runs)?;
    if parallel {
        runs.par_iter().map(|run| simulate(run, base)).collect()
    } else {
        runs.iter().map(|run| simulate(run, base)).collect()
    }
}

pub fn simulate(run: &RunConfig, base: Option<&Path>) -> Result<ResultRecord> {
    run.validate()?;
    let clock = Instant::now();
    let dir = output_dir(run, base);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let coin = CoinParameter::new(run.theta)?;

    let dispersion_file = if run.wants(Output::Dispersion) {
        let curve = dispersion_curve(coin, run.dispersion_samples()).map_err(engine_error(run, "dispersion"))?;
        table::write_dispersion(&dir.join(DISPERSION_FILE), &curve)?;
        Some(DISPERSION_FILE.to_string())
    } else {
        None
    };

    let mut engine = EngineInfo {
        name: run.engine,
        version: env!("CARGO_PKG_VERSION"),
        ring_size: None,
        truncation: run.truncation.filter(|_| run.engine == Engine::Continuum),
        branch_weights: None,
    };
    let mut samples = Vec::new();
    let mut packets = None;

    if let Some(spec) = run.initial.as_ref().filter(|_| run.outputs.iter().any(|&o| o != Output::Dispersion)) {
        let start = build(spec, coin).map_err(engine_error(run, "initial state"))?;
        let mut sampler = Sampler {
            run,
            coin,
            dir: &dir,
            sigma0: spec.envelope.sigma0,
            kept: Vec::new(),
            records: Vec::new(),
        };
        match run.engine {
            Engine::Map => run_map(run, coin, start, &mut sampler)?,
            Engine::Spectral => engine.ring_size = Some(run_spectral(run, coin, &start, &mut sampler)?),
            Engine::Continuum => {
                engine.branch_weights = Some(run_continuum(run, coin, &start, spec.carrier_k0, &mut sampler)?)
            }
        }
        if run.wants(Output::Packets) {
            packets = Some(track_packets(&sampler.kept).map_err(engine_error(run, "packets"))?);
        }
        samples = sampler.records;
    }

    let record = ResultRecord {
        config: run.clone(),
        engine,
        samples,
        packets,
        dispersion_file,
        timing: Timing {
            wall_seconds: clock.elapsed().as_secs_f64(),
        },
    };
    let path = dir.join(RESULT_FILE);
    let json = serde_json::to_string_pretty(&record).expect("result record serializes");
    std::fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(record)
}

/// Collects per-sample metrics and files as the engine produces them.
struct Sampler<'a> {
    run: &'a RunConfig,
    coin: CoinParameter,
    dir: &'a Path,
    sigma0: Option<f64>,
    kept: Vec<ProbabilityDistribution>,
    records: Vec<SampleRecord>,
}

impl Sampler<'_> {
    fn record(&mut self, dist: ProbabilityDistribution, state: Option<&WalkerState>) -> Result<()> {
        let run = self.run;
        let file = if run.wants(Output::Distribution) {
            let name = format!("P_t{}.csv", dist.t);
            table::write_distribution(&self.dir.join(&name), &dist, state)?;
            Some(name)
        } else {
            None
        };
        let moments = if run.wants(Output::Moments) {
            Some(moments(&dist).map_err(engine_error(run, "moments"))?)
        } else {
            None
        };
        let (prediction, flatness) = match self.sigma0.filter(|_| run.wants(Output::Flatness)) {
            Some(sigma0) => {
                let pred = flat_top_prediction(sigma0, self.coin, dist.t as f64).map_err(engine_error(run, "flatness"))?;
                let report = if pred.asymptotic {
                    Some(flatness(&dist, &pred, run.rho()).map_err(engine_error(run, "flatness"))?)
                } else {
                    None
                };
                (Some(pred), report)
            }
            None => (None, None),
        };
        self.records.push(SampleRecord {
            t: dist.t,
            x_min: dist.x_min,
            x_max: dist.x_max(),
            rows: dist.p.len(),
            file,
            moments,
            prediction,
            flatness,
        });
        if run.wants(Output::Packets) {
            self.kept.push(dist);
        }
        Ok(())
    }
}

fn run_map(run: &RunConfig, coin: CoinParameter, start: WalkerState, sampler: &mut Sampler) -> Result<()> {
    let mut state = start;
    for t in run.times() {
        state = evolve(&state, coin, t - state.t()).map_err(engine_error(run, "map"))?;
        sampler.record(probability(&state), Some(&state))?;
    }
    Ok(())
}

fn run_spectral(run: &RunConfig, coin: CoinParameter, start: &WalkerState, sampler: &mut Sampler) -> Result<usize> {
    let n = min_ring_size(start, run.t_max).next_power_of_two();
    let decomposition = decompose(start, coin, n).map_err(engine_error(run, "spectral"))?;
    for t in run.times() {
        let state = decomposition.propagate(t).map_err(engine_error(run, "spectral"))?;
        sampler.record(probability(&state), Some(&state))?;
    }
    Ok(n)
}

/// Margin added around the initial window so that envelopes stay clear of the grid ends.
const CONTINUUM_MARGIN: usize = 64;

fn run_continuum(
    run: &RunConfig,
    coin: CoinParameter,
    start: &WalkerState,
    k0: f64,
    sampler: &mut Sampler,
) -> Result<(f64, f64)> {
    let trunc = run.truncation.expect("validated");
    let parts = split_into_envelopes(start, k0, coin).map_err(engine_error(run, "continuum"))?;
    let margin = run.t_max as usize + CONTINUUM_MARGIN;
    let parts: Vec<_> = parts.into_iter().map(|(b, w, f)| (b, w, f.padded(margin))).collect();
    let weight = |branch: Branch| parts.iter().find(|p| p.0 == branch).map_or(0.0, |p| p.1);
    for t in run.times() {
        let mut total: Option<ProbabilityDistribution> = None;
        for (_, w, field) in &parts {
            let moved = propagate_envelope(field, coin, t as f64, trunc).map_err(engine_error(run, "continuum"))?;
            let dist = moved.lattice_probability(*w, t).map_err(engine_error(run, "continuum"))?;
            match total.as_mut() {
                Some(acc) => acc.p.iter_mut().zip(&dist.p).for_each(|(a, b)| *a += b),
                None => total = Some(dist),
            }
        }
        let dist = total.ok_or_else(|| CliError::Config("initial state has no envelope weight".into()))?;
        sampler.record(dist, None)?;
    }
    Ok((weight(Branch::Plus), weight(Branch::Minus)))
}
