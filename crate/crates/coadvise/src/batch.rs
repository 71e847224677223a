//! Runs every (horizon × instance × algorithm × seed) cell of a config and
//! aggregates verdicts.

use anyhow::{Context, Result};
use coadvise_core::engine::{dimensions, run_episode, AlgorithmSpec, Episode};
use coadvise_core::model::{regret_bound, Accounting, Instance};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::sinks::{self, Curve, FailureRecord, OutputDir, SummaryRecord, TranscriptWriter};

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub cells: Vec<SummaryRecord>,
    pub failures: Vec<FailureRecord>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Sample mean and the half-width `1.96·sd/√n` (0 for a single value).
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * var.sqrt() / n.sqrt())
}

/// What a finished episode contributes to summaries and plots.
#[derive(Debug, Clone, PartialEq)]
pub struct Digest {
    pub final_regret: f64,
    pub accounting: Accounting,
    /// Cumulative regret sampled on [`sinks::plot_grid`].
    pub curve: Vec<f64>,
}

impl Digest {
    pub fn of(ep: &Episode) -> Self {
        Self {
            final_regret: ep.final_regret(),
            accounting: ep.trace.accounting,
            curve: sinks::sample_curve(&ep.trace.cumulative),
        }
    }
}

pub type SeedResult = (u64, coadvise_core::Result<Digest>);

/// Receives each full episode of a cell in seed order.
pub type EpisodeSink<'a> = &'a mut dyn FnMut(u64, &Episode) -> Result<()>;

type SeedRun = (u64, coadvise_core::Result<(Digest, Option<Episode>)>);

/// Runs one cell over `seeds` on `pool`, keeping seed order. Full episodes
/// are handed to `sink` in seed order; seeds run in chunks of the pool size
/// so at most one chunk of transcripts is held at a time.
pub fn run_cell(
    pool: &rayon::ThreadPool,
    inst: &Instance,
    spec: &AlgorithmSpec,
    horizon: u64,
    seeds: &[u64],
    mut sink: Option<EpisodeSink<'_>>,
) -> Result<Vec<SeedResult>> {
    let chunk = if sink.is_some() { pool.current_num_threads().max(1) } else { seeds.len().max(1) };
    let mut out = Vec::with_capacity(seeds.len());
    for group in seeds.chunks(chunk) {
        let keep = sink.is_some();
        let runs: Vec<SeedRun> = pool.install(|| {
            group
                .par_iter()
                .map(|&s| {
                    let res = run_episode(inst, spec, horizon, s).map(|ep| (Digest::of(&ep), keep.then_some(ep)));
                    (s, res)
                })
                .collect()
        });
        for (seed, res) in runs {
            match res {
                Ok((digest, ep)) => {
                    if let (Some(f), Some(ep)) = (sink.as_mut(), ep.as_ref()) {
                        f(seed, ep)?;
                    }
                    out.push((seed, Ok(digest)));
                }
                Err(e) => out.push((seed, Err(e))),
            }
        }
    }
    Ok(out)
}

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build().context("starting worker threads")
}

pub(crate) fn error_round(e: &coadvise_core::Error) -> Option<u64> {
    match e {
        coadvise_core::Error::Protocol { round, .. } => Some(*round as u64),
        coadvise_core::Error::Barrier(f) => Some(f.round as u64),
        _ => None,
    }
}

/// Summarizes one finished cell and collects its failures.
pub fn summarize_cell(
    instance: &Instance,
    spec: &AlgorithmSpec,
    horizon: u64,
    results: &[SeedResult],
    command: &str,
) -> (SummaryRecord, Vec<FailureRecord>) {
    let algo = spec.id.name();
    let mut failures = Vec::new();
    let mut finals = Vec::with_capacity(results.len());
    let mut accounting = Accounting::Pseudo;
    for (seed, res) in results {
        match res {
            Ok(d) => {
                finals.push(d.final_regret);
                if d.accounting != Accounting::Pseudo {
                    accounting = d.accounting;
                }
            }
            Err(e) => failures.push(FailureRecord {
                command: command.into(),
                instance: instance.name().into(),
                algo: Some(algo.into()),
                seed: Some(*seed),
                round: error_round(e),
                reason: e.to_string(),
            }),
        }
    }
    let (mean, ci95) = mean_ci95(&finals);
    let kind = spec.id.bound_kind();
    let bound = regret_bound(kind, dimensions(instance, horizon));
    let pass = failures.is_empty() && mean <= bound;
    if failures.is_empty() && !pass {
        failures.push(FailureRecord {
            command: command.into(),
            instance: instance.name().into(),
            algo: Some(algo.into()),
            seed: None,
            round: Some(horizon),
            reason: format!("mean final regret {mean} exceeds {} bound {bound}", kind.name()),
        });
    }
    let summary = SummaryRecord {
        instance: instance.name().into(),
        algo: algo.into(),
        horizon,
        seeds: finals.len(),
        accounting: format!("{accounting:?}").to_lowercase(),
        mean_final_regret: mean,
        ci95,
        bound,
        bound_kind: kind.name().into(),
        pass,
    };
    (summary, failures)
}

/// Runs the config at each of `horizons`, writing the sinks the config
/// enables into `out`. `command` labels failure records.
pub fn run_batch(
    cfg: &ExperimentConfig,
    horizons: &[u64],
    out: &OutputDir,
    opts: &BatchOptions,
    command: &str,
) -> Result<RunSummary> {
    let pool = thread_pool(opts.jobs)?;
    let mut transcripts =
        if cfg.emit.csv { Some(TranscriptWriter::create(&out.path(sinks::TRANSCRIPTS))?) } else { None };
    let mut summary = RunSummary::default();
    let mut curves = Vec::new();
    for &horizon in horizons {
        for spec in &cfg.instances {
            let inst = spec.build(horizon).with_context(|| format!("building instance {spec}"))?;
            for algo in &cfg.algorithms {
                let aspec = algo.spec();
                let (name, algo_name) = (inst.name(), aspec.id.name());
                let results = match transcripts.as_mut() {
                    Some(w) => {
                        let mut write = |seed: u64, ep: &Episode| w.write_episode(name, algo_name, seed, ep);
                        run_cell(&pool, &inst, &aspec, horizon, &cfg.seeds, Some(&mut write))?
                    }
                    None => run_cell(&pool, &inst, &aspec, horizon, &cfg.seeds, None)?,
                };
                let (record, failures) = summarize_cell(&inst, &aspec, horizon, &results, command);
                let sampled: Vec<Vec<f64>> =
                    results.into_iter().filter_map(|(_, r)| r.ok()).map(|d| d.curve).collect();
                if cfg.emit.plotdata && !sampled.is_empty() {
                    let mut c = Curve::mean_of(name, algo_name, horizon as usize, &sampled);
                    c.bound = Some(record.bound);
                    curves.push(c);
                }
                summary.cells.push(record);
                summary.failures.extend(failures);
            }
        }
    }
    if let Some(w) = transcripts {
        w.finish()?;
    }
    if cfg.emit.jsonl {
        sinks::write_jsonl(&out.path(sinks::SUMMARY), &summary.cells)?;
    }
    if cfg.emit.plotdata {
        sinks::write_plot(&out.path(sinks::PLOT), &curves)?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_of_known_sample() {
        let (m, ci) = mean_ci95(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sd = √(5/3)
        assert!((ci - 1.96 * (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_ci95(&[7.0]), (7.0, 0.0));
    }
}
