//! The five CLI commands as library functions. Each writes its files into
//! an output directory and returns the failing verdicts; the binary turns
//! those into an exit status.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use coadvise_core::engine::{couple_check, CoupleOptions};
use coadvise_core::envgen::check_independence;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batch::{run_batch, thread_pool, BatchOptions, RunSummary};
use crate::catalog;
use crate::config::{CoupleGrid, ExperimentConfig};
use crate::sinks::{self, FailureRecord, OutputDir, SummaryRecord};
use crate::spec::InstanceSpec;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    /// Human-readable table for the terminal.
    pub report: String,
    pub failures: Vec<FailureRecord>,
}

impl CommandOutput {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn finish(out: OutputDir, report: String, failures: Vec<FailureRecord>) -> Result<CommandOutput> {
    sinks::write_failures(&out.dir, &failures)?;
    out.complete()?;
    Ok(CommandOutput { report, failures })
}

fn summary_table(cells: &[SummaryRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:<11} {:>8} {:>12} {:>10} {:>12} {:<12} verdict",
        "instance", "algo", "T", "mean regret", "ci95", "bound", "bound kind"
    );
    for c in cells {
        let _ = writeln!(
            s,
            "{:<24} {:<11} {:>8} {:>12.3} {:>10.3} {:>12.3} {:<12} {}",
            c.instance,
            c.algo,
            c.horizon,
            c.mean_final_regret,
            c.ci95,
            c.bound,
            c.bound_kind,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    s
}

/// Runs every cell at the configured horizon.
pub fn cmd_run(cfg: &ExperimentConfig, out_dir: &Path, opts: &BatchOptions) -> Result<CommandOutput> {
    let out = OutputDir::open(out_dir, "run")?;
    let RunSummary { cells, failures } = run_batch(cfg, &[cfg.horizon], &out, opts, "run")?;
    finish(out, summary_table(&cells), failures)
}

/// Fitted growth exponent of mean final regret in the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub instance: String,
    pub algo: String,
    pub horizons: Vec<u64>,
    pub slope: Option<f64>,
}

/// Least-squares slope of `ln y` on `ln x`. `None` with fewer than two
/// usable points or no spread in `x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs the config once per sweep horizon and fits regret-vs-T slopes.
pub fn cmd_sweep(cfg: &ExperimentConfig, out_dir: &Path, opts: &BatchOptions) -> Result<CommandOutput> {
    let out = OutputDir::open(out_dir, "sweep")?;
    let horizons = cfg.sweep_horizons();
    let RunSummary { cells, failures } = run_batch(cfg, &horizons, &out, opts, "sweep")?;

    let mut keys: Vec<(String, String)> = Vec::new();
    for c in &cells {
        let key = (c.instance.clone(), c.algo.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut slopes = Vec::with_capacity(keys.len());
    let mut rows = Vec::new();
    for (instance, algo) in keys {
        let mine: Vec<&SummaryRecord> = cells.iter().filter(|c| c.instance == instance && c.algo == algo).collect();
        let points: Vec<(f64, f64)> = mine.iter().map(|c| (c.horizon as f64, c.mean_final_regret)).collect();
        for c in &mine {
            rows.push((c.horizon, format!("{instance}/{algo}/final_regret"), c.mean_final_regret));
        }
        for c in &mine {
            rows.push((c.horizon, format!("{instance}/{algo}/bound"), c.bound));
        }
        slopes.push(SlopeRecord { instance, algo, horizons: mine.iter().map(|c| c.horizon).collect(), slope: log_log_slope(&points) });
    }
    let mut w = csv::Writer::from_path(out.path(sinks::SWEEP_PLOT)).context("creating sweep plot data")?;
    w.write_record(["t", "series", "value"])?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    sinks::write_jsonl(&out.path(sinks::SLOPES), &slopes)?;

    let mut report = summary_table(&cells);
    for s in &slopes {
        let slope = s.slope.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(report, "log-log slope {}/{}: {slope}", s.instance, s.algo);
    }
    finish(out, report, failures)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub instance: String,
    pub n1: usize,
    pub n2: usize,
    pub exact: bool,
    pub independent: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    /// `(f₁, f₂, g₁, g₂)` of the first violating quadruple.
    pub witness: Option<[usize; 4]>,
}

/// Instances checked when no config is given.
pub fn default_verify_instances() -> Vec<InstanceSpec> {
    ["allocation_4x8", "defer_4"].iter().filter_map(|n| catalog::lookup(n)).collect()
}

/// Checks policy space independence on each instance built at `horizon`.
pub fn cmd_verify(instances: &[InstanceSpec], horizon: u64, tol: Option<f64>, out_dir: &Path) -> Result<CommandOutput> {
    let out = OutputDir::open(out_dir, "verify")?;
    let mut records = Vec::with_capacity(instances.len());
    let mut failures = Vec::new();
    let mut report = String::new();
    let _ = writeln!(report, "{:<24} {:>4} {:>4} {:<6} verdict", "instance", "n1", "n2", "oracle");
    for spec in instances {
        let inst = spec.build(horizon).with_context(|| format!("building instance {spec}"))?;
        let rep = check_independence(&inst, tol);
        let verdict = match rep.witness {
            None if rep.worst_violation <= 1e-12 => "independent, violation ≤ 1e-12".to_string(),
            None => format!("independent, violation {:.3e} ≤ {:.3e}", rep.worst_violation, rep.tolerance),
            Some(w) => format!(
                "violated by {:.3e} at (f1={}, f2={}, g1={}, g2={})",
                rep.worst_violation, w.f1, w.f2, w.g1, w.g2
            ),
        };
        let exact = inst.exact_oracle();
        let _ = writeln!(
            report,
            "{:<24} {:>4} {:>4} {:<6} {verdict}",
            inst.name(),
            inst.n1(),
            inst.n2(),
            if exact { "exact" } else { "mc" }
        );
        if !rep.independent {
            failures.push(FailureRecord {
                command: "verify".into(),
                instance: inst.name().into(),
                algo: None,
                seed: None,
                round: None,
                reason: verdict,
            });
        }
        records.push(VerifyRecord {
            instance: inst.name().into(),
            n1: inst.n1(),
            n2: inst.n2(),
            exact,
            independent: rep.independent,
            worst_violation: rep.worst_violation,
            tolerance: rep.tolerance,
            witness: rep.witness.map(|w| [w.f1, w.f2, w.g1, w.g2]),
        });
    }
    sinks::write_jsonl(&out.path(sinks::VERIFY), &records)?;
    finish(out, report, failures)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupleRecord {
    pub instance: String,
    pub horizon: u64,
    pub seed: u64,
    pub rounds: usize,
    pub max_weight_divergence: f64,
    pub max_law_divergence: f64,
    pub max_identity_gap: f64,
    pub first_failure: Option<usize>,
    pub pass: bool,
}

/// Instances of the coupling grid used when no config is given: a random
/// tabular 3×4 instance, the private-information instance with four arms,
/// and the 3×3 conjecture instance.
pub fn default_couple_instances() -> Vec<InstanceSpec> {
    ["tabular_3x4", "private_info_4", "conjecture_3"].iter().filter_map(|n| catalog::lookup(n)).collect()
}

/// Runs the lock-step equivalence check over instances × horizons × seeds.
pub fn cmd_couple(
    instances: &[InstanceSpec],
    grid: &CoupleGrid,
    jobs: Option<usize>,
    out_dir: &Path,
) -> Result<CommandOutput> {
    let out = OutputDir::open(out_dir, "couple")?;
    let pool = thread_pool(jobs)?;
    let opts = CoupleOptions { tol: grid.tol, ..CoupleOptions::default() };
    let mut records = Vec::new();
    for spec in instances {
        for &horizon in &grid.horizons {
            let inst = spec.build(horizon).with_context(|| format!("building instance {spec}"))?;
            let reports: Vec<_> =
                pool.install(|| grid.seeds.par_iter().map(|&s| (s, couple_check(&inst, horizon, s, &opts))).collect());
            for (seed, rep) in reports {
                let rep = rep.with_context(|| format!("coupling {} at T={horizon}, seed {seed}", inst.name()))?;
                records.push(CoupleRecord {
                    instance: inst.name().into(),
                    horizon,
                    seed,
                    rounds: rep.rounds,
                    max_weight_divergence: rep.max_weight_divergence,
                    max_law_divergence: rep.max_law_divergence,
                    max_identity_gap: rep.max_identity_gap,
                    first_failure: rep.first_failure,
                    pass: rep.pass,
                });
            }
        }
    }
    let failures: Vec<FailureRecord> = records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| FailureRecord {
            command: "couple".into(),
            instance: r.instance.clone(),
            algo: Some("p2exp4".into()),
            seed: Some(r.seed),
            round: r.first_failure.map(|t| t as u64),
            reason: format!(
                "weight divergence {:.3e}, law divergence {:.3e}, identity gap {:.3e} (tol {:.1e})",
                r.max_weight_divergence, r.max_law_divergence, r.max_identity_gap, grid.tol
            ),
        })
        .collect();
    sinks::write_jsonl(&out.path(sinks::COUPLE), &records)?;

    let mut report = String::new();
    let _ = writeln!(report, "{:<24} {:>6} {:>6} {:>12} {:>12} verdict", "instance", "T", "seeds", "max weight", "max law");
    let mut i = 0;
    while i < records.len() {
        let (name, horizon) = (&records[i].instance, records[i].horizon);
        let group: Vec<&CoupleRecord> =
            records[i..].iter().take_while(|r| &r.instance == name && r.horizon == horizon).collect();
        let w = group.iter().map(|r| r.max_weight_divergence).fold(0.0, f64::max);
        let l = group.iter().map(|r| r.max_law_divergence).fold(0.0, f64::max);
        let ok = group.iter().all(|r| r.pass);
        let _ = writeln!(
            report,
            "{name:<24} {horizon:>6} {:>6} {w:>12.3e} {l:>12.3e} {}",
            group.len(),
            if ok { "pass" } else { "FAIL" }
        );
        i += group.len();
    }
    finish(out, report, failures)
}

/// Rebuilds `plot.csv` from `transcripts.csv` in `out_dir`, adding bound
/// lines when `summary.jsonl` is present.
pub fn cmd_emit(out_dir: &Path) -> Result<CommandOutput> {
    let transcripts = out_dir.join(sinks::TRANSCRIPTS);
    if !transcripts.exists() {
        anyhow::bail!("no {} in {}; run with csv output first", sinks::TRANSCRIPTS, out_dir.display());
    }
    let summary_path = out_dir.join(sinks::SUMMARY);
    let summary: Option<Vec<SummaryRecord>> =
        if summary_path.exists() { Some(sinks::read_jsonl(&summary_path)?) } else { None };
    let out = OutputDir::open(out_dir, "emit")?;
    let curves = sinks::curves_from_transcripts(&transcripts, summary.as_deref())?;
    sinks::write_plot(&out.path(sinks::PLOT), &curves)?;
    let mut report = String::new();
    for c in &curves {
        let _ = writeln!(report, "{}: {} points", c.series(), c.points.len());
    }
    finish(out, report, Vec::new())
}
