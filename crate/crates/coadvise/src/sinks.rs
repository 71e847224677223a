//! File formats written by the runner.
//!
//! Nothing here depends on wall-clock time or hash order, so identical
//! inputs produce identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use coadvise_core::engine::Episode;
use serde::{Deserialize, Serialize};

pub const TRANSCRIPTS: &str = "transcripts.csv";
pub const SUMMARY: &str = "summary.jsonl";
pub const PLOT: &str = "plot.csv";
pub const SWEEP_PLOT: &str = "sweep.csv";
pub const SLOPES: &str = "slopes.jsonl";
pub const VERIFY: &str = "verify.jsonl";
pub const COUPLE: &str = "couple.jsonl";
pub const FAILURES: &str = "failures.jsonl";
/// Present while a command is writing; left behind if it aborts.
pub const PARTIAL: &str = "PARTIAL";

pub const TRANSCRIPT_HEADER: [&str; 13] =
    ["run_id", "algo", "instance", "seed", "t", "directive", "x", "r", "z", "a", "y", "pseudo_regret", "cum_pseudo_regret"];

/// One transcript row as read back from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRow {
    pub run_id: u64,
    pub algo: String,
    pub instance: String,
    pub seed: u64,
    pub t: usize,
    pub directive: Option<usize>,
    pub x: u64,
    pub r: usize,
    pub z: u64,
    pub a: usize,
    pub y: f64,
    pub pseudo_regret: f64,
    pub cum_pseudo_regret: f64,
}

pub struct TranscriptWriter {
    out: csv::Writer<BufWriter<File>>,
    next_run: u64,
}

impl TranscriptWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
        out.write_record(TRANSCRIPT_HEADER)?;
        Ok(Self { out, next_run: 0 })
    }

    pub fn write_episode(&mut self, instance: &str, algo: &str, seed: u64, episode: &Episode) -> Result<()> {
        let run_id = self.next_run;
        self.next_run += 1;
        for rec in &episode.records {
            self.out.serialize(TranscriptRow {
                run_id,
                algo: algo.to_string(),
                instance: instance.to_string(),
                seed,
                t: rec.t,
                directive: rec.directive,
                x: rec.x,
                r: rec.r,
                z: rec.z,
                a: rec.a,
                y: rec.y,
                pseudo_regret: rec.pseudo_regret,
                cum_pseudo_regret: rec.cumulative,
            })?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// One line of `summary.jsonl`: the verdict for an (algorithm, instance,
/// horizon) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub instance: String,
    pub algo: String,
    pub horizon: u64,
    pub seeds: usize,
    pub accounting: String,
    pub mean_final_regret: f64,
    pub ci95: f64,
    pub bound: f64,
    pub bound_kind: String,
    pub pass: bool,
}

/// A failing verdict, naming where it happened as precisely as known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub command: String,
    pub instance: String,
    pub algo: Option<String>,
    pub seed: Option<u64>,
    pub round: Option<u64>,
    pub reason: String,
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

/// Writes `failures.jsonl`, or removes a stale one when there are none.
pub fn write_failures(dir: &Path, failures: &[FailureRecord]) -> Result<()> {
    let path = dir.join(FAILURES);
    if failures.is_empty() {
        if path.exists() {
            fs::remove_file(&path).with_context(|| format!("removing {}", path.display()))?;
        }
        return Ok(());
    }
    write_jsonl(&path, failures)
}

/// Rounds at which curves are sampled for plot data: about 200 evenly
/// spaced points plus the last round.
pub fn plot_grid(horizon: usize) -> Vec<usize> {
    let step = (horizon / 200).max(1);
    let mut grid: Vec<usize> = (1..=horizon).filter(|t| t % step == 0).collect();
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}

/// Mean cumulative regret over runs of one (instance, algorithm, horizon)
/// cell, sampled on [`plot_grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub instance: String,
    pub algo: String,
    pub horizon: usize,
    pub points: Vec<(usize, f64)>,
    pub bound: Option<f64>,
}

impl Curve {
    /// Averages runs already sampled on [`plot_grid`], in the given order.
    pub fn mean_of(instance: &str, algo: &str, horizon: usize, sampled: &[Vec<f64>]) -> Self {
        let grid = plot_grid(horizon);
        let n = sampled.len().max(1) as f64;
        let points = grid
            .iter()
            .enumerate()
            .map(|(k, &t)| (t, sampled.iter().map(|run| run[k]).sum::<f64>() / n))
            .collect();
        Self { instance: instance.into(), algo: algo.into(), horizon, points, bound: None }
    }

    pub fn series(&self) -> String {
        format!("{}/{}/T={}", self.instance, self.algo, self.horizon)
    }
}

/// Values of a per-round cumulative column at the [`plot_grid`] rounds.
pub fn sample_curve(cumulative: &[f64]) -> Vec<f64> {
    plot_grid(cumulative.len()).into_iter().map(|t| cumulative[t - 1]).collect()
}

/// Long-format `t,series,value` rows: a regret series per curve, and a bound
/// line `bound·√(t/T)` when the bound is known.
pub fn write_plot(path: &Path, curves: &[Curve]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["t", "series", "value"])?;
    for c in curves {
        let series = c.series();
        for &(t, v) in &c.points {
            w.serialize((t, format!("{series}/regret"), v))?;
        }
        if let Some(b) = c.bound {
            for &(t, _) in &c.points {
                w.serialize((t, format!("{series}/bound"), b * (t as f64 / c.horizon as f64).sqrt()))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds plot curves from a transcript file, attaching bounds from a
/// summary file when given. Runs keep their file order.
pub fn curves_from_transcripts(transcripts: &Path, summary: Option<&[SummaryRecord]>) -> Result<Vec<Curve>> {
    let mut reader = csv::Reader::from_path(transcripts).with_context(|| format!("reading {}", transcripts.display()))?;
    // (instance, algo, cumulative column) per run, in order of appearance
    let mut runs: Vec<(u64, String, String, Vec<f64>)> = Vec::new();
    for row in reader.deserialize() {
        let row: TranscriptRow = row.with_context(|| format!("parsing {}", transcripts.display()))?;
        if runs.last().map(|r| r.0) != Some(row.run_id) {
            runs.push((row.run_id, row.instance.clone(), row.algo.clone(), Vec::new()));
        }
        let col = &mut runs.last_mut().expect("pushed above").3;
        if row.t != col.len() + 1 {
            anyhow::bail!("run {} skips from round {} to {}", row.run_id, col.len(), row.t);
        }
        col.push(row.cum_pseudo_regret);
    }
    let mut groups: Vec<(String, String, usize, Vec<Vec<f64>>)> = Vec::new();
    for (_, instance, algo, col) in runs {
        let horizon = col.len();
        match groups.iter_mut().find(|g| g.0 == instance && g.1 == algo && g.2 == horizon) {
            Some(g) => g.3.push(col),
            None => groups.push((instance, algo, horizon, vec![col])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(instance, algo, horizon, cols)| {
            let sampled: Vec<Vec<f64>> = cols.iter().map(|c| sample_curve(c)).collect();
            let mut curve = Curve::mean_of(&instance, &algo, horizon, &sampled);
            curve.bound = summary.and_then(|s| {
                s.iter()
                    .find(|r| r.instance == instance && r.algo == algo && r.horizon == horizon as u64)
                    .map(|r| r.bound)
            });
            curve
        })
        .collect())
}

/// Marks `dir` as holding partial results until [`OutputDir::complete`].
pub struct OutputDir {
    pub dir: PathBuf,
}

impl OutputDir {
    pub fn open(dir: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        fs::write(dir.join(PARTIAL), format!("{command} did not finish\n"))
            .with_context(|| format!("writing marker in {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn complete(self) -> Result<()> {
        fs::remove_file(self.dir.join(PARTIAL)).with_context(|| format!("clearing marker in {}", self.dir.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ends_at_horizon() {
        assert_eq!(plot_grid(3), vec![1, 2, 3]);
        let g = plot_grid(10_001);
        assert_eq!(*g.last().unwrap(), 10_001);
        assert_eq!(g[0], 50);
        assert!(g.len() <= 202);
    }

    #[test]
    fn curve_averages_runs() {
        let a = [1.0, 2.0, 3.0];
        let b = [3.0, 4.0, 5.0];
        let c = Curve::mean_of("i", "p", 3, &[sample_curve(&a), sample_curve(&b)]);
        assert_eq!(c.points, vec![(1, 2.0), (2, 3.0), (3, 4.0)]);
    }
}
