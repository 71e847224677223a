use alloc::format;
use alloc::vec::Vec;
use core::cell::Cell;

use super::algorithm::{build_team, instance_mode, AlgorithmSpec};
use super::barrier::{BarrierMode, Feedback, Guard, HumanAgent, HumanView, MachineAgent, MachineView, SideLaw};
use crate::envgen::Draw;
use crate::error::{range, BarrierFault, Error, Result};
use crate::model::{best_pair, Accounting, BestPair, Instance, JointPolicyIndex, RegretTrace};
use crate::rng::{Stream, Substream};

/// One round of the transcript. `t` counts from 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub directive: Option<usize>,
    pub x: u64,
    pub r: usize,
    pub z: u64,
    pub a: usize,
    pub y: f64,
    pub pseudo_regret: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub records: Vec<RoundRecord>,
    pub trace: RegretTrace,
}

impl Episode {
    pub fn final_regret(&self) -> f64 {
        self.trace.final_regret()
    }
}

/// Where each round's `(x, z, Y)` comes from.
pub trait DrawSource {
    fn next_draw(&mut self, round: usize, out: &mut Draw) -> Result<()>;
}

/// i.i.d. draws from the instance's environment on the environment substream.
pub struct EnvSource<'a> {
    inst: &'a Instance,
    stream: Stream,
}

impl<'a> EnvSource<'a> {
    pub fn new(inst: &'a Instance, seed: u64) -> Self {
        Self { inst, stream: Stream::new(seed, Substream::Environment) }
    }
}

impl DrawSource for EnvSource<'_> {
    fn next_draw(&mut self, _round: usize, out: &mut Draw) -> Result<()> {
        self.inst.env().sample_into(&mut self.stream, out);
        Ok(())
    }
}

/// Replays a fixed sequence.
pub struct SequenceSource<'a> {
    draws: &'a [Draw],
}

impl<'a> SequenceSource<'a> {
    pub fn new(draws: &'a [Draw]) -> Self {
        Self { draws }
    }
}

impl DrawSource for SequenceSource<'_> {
    fn next_draw(&mut self, round: usize, out: &mut Draw) -> Result<()> {
        let d = self.draws.get(round - 1).ok_or_else(|| range("sequence round", round, self.draws.len()))?;
        out.clone_from(d);
        Ok(())
    }
}

/// The first `horizon` draws `run_episode` would see with this seed.
pub fn draw_sequence(inst: &Instance, horizon: usize, seed: u64) -> Vec<Draw> {
    let mut src = EnvSource::new(inst, seed);
    (1..=horizon)
        .map(|t| {
            let mut d = Draw::default();
            // EnvSource never fails
            let _ = src.next_draw(t, &mut d);
            d
        })
        .collect()
}

/// `Σ law(i, j) · values[i·n2 + j]`, when the two sides' laws determine it.
pub fn expected_under(values: &[f64], n2: usize, machine: SideLaw<'_>, human: SideLaw<'_>) -> Option<f64> {
    let dot = |q: &[f64]| q.iter().zip(values).map(|(q, v)| q * v).sum::<f64>();
    match (machine, human) {
        (_, SideLaw::Joint(q)) | (SideLaw::Joint(q), _) => Some(dot(q)),
        (SideLaw::Index(i), SideLaw::Index(j)) => values.get(i * n2 + j).copied(),
        (SideLaw::Marginal(a), SideLaw::Marginal(b)) => Some(
            a.iter()
                .enumerate()
                .map(|(i, ai)| ai * b.iter().enumerate().map(|(j, bj)| bj * values[i * n2 + j]).sum::<f64>())
                .sum(),
        ),
        (SideLaw::Marginal(a), SideLaw::Index(j)) => {
            Some(a.iter().enumerate().map(|(i, ai)| ai * values[i * n2 + j]).sum())
        }
        (SideLaw::Index(i), SideLaw::Marginal(b)) => {
            Some(b.iter().enumerate().map(|(j, bj)| bj * values[i * n2 + j]).sum())
        }
        _ => None,
    }
}

enum Scoring {
    /// Against the value table; pseudo-regret when it is exact.
    Expected { optimal: f64 },
    /// Against the best fixed pair on the realized sequence.
    Hindsight { best: usize },
}

/// Runs a seeded episode of `spec` on `inst`.
pub fn run_episode(inst: &Instance, spec: &AlgorithmSpec, horizon: u64, seed: u64) -> Result<Episode> {
    let (mut machine, mut human) = build_team(inst, spec, horizon, seed)?;
    let mut source = EnvSource::new(inst, seed);
    let optimal = best_pair(inst).value;
    run_loop(inst, spec.id.mode(), &mut *machine, &mut *human, horizon, &mut source, Scoring::Expected { optimal })
}

/// Runs caller-supplied agents under the given barrier.
pub fn run_agents(
    inst: &Instance,
    mode: BarrierMode,
    machine: &mut dyn MachineAgent,
    human: &mut dyn HumanAgent,
    horizon: u64,
    seed: u64,
) -> Result<Episode> {
    if mode == BarrierMode::Open && instance_mode(inst) != BarrierMode::Open {
        return Err(Error::Mode { required: mode, found: instance_mode(inst) });
    }
    let mut source = EnvSource::new(inst, seed);
    let optimal = best_pair(inst).value;
    run_loop(inst, mode, machine, human, horizon, &mut source, Scoring::Expected { optimal })
}

/// Best fixed joint policy on the first `horizon` draws of `sequence`;
/// `value` is its average realized reward.
pub fn hindsight_best(inst: &Instance, sequence: &[Draw], horizon: usize) -> Result<BestPair> {
    if sequence.len() < horizon || horizon == 0 {
        return Err(Error::Config(format!("sequence has {} rounds, need {horizon} (at least 1)", sequence.len())));
    }
    let mut totals = alloc::vec![0.0; inst.n1() * inst.n2()];
    let mut buf = Vec::new();
    for d in &sequence[..horizon] {
        inst.realized_rewards(d, &mut buf)?;
        for (t, v) in totals.iter_mut().zip(&buf) {
            *t += v;
        }
    }
    let (flat, total) =
        totals.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |b, (k, v)| if v > b.1 { (k, v) } else { b });
    Ok(BestPair { index: JointPolicyIndex::from_flat(flat, inst.n2()), value: total / horizon as f64 })
}

/// Runs `spec` over a pre-drawn sequence, with regret measured against the
/// best fixed joint policy in hindsight.
pub fn run_fixed_sequence(
    inst: &Instance,
    spec: &AlgorithmSpec,
    sequence: &[Draw],
    horizon: u64,
    seed: u64,
) -> Result<Episode> {
    let t = usize::try_from(horizon).map_err(|_| Error::Config("horizon too large".into()))?;
    let best = hindsight_best(inst, sequence, t)?;
    let (mut machine, mut human) = build_team(inst, spec, horizon, seed)?;
    let mut source = SequenceSource::new(sequence);
    let scoring = Scoring::Hindsight { best: best.index.flat(inst.n2()) };
    let mut ep = run_loop(inst, spec.id.mode(), &mut *machine, &mut *human, horizon, &mut source, scoring)?;
    ep.trace.optimal_value = best.value;
    Ok(ep)
}

fn latched(fault: &Cell<Option<BarrierFault>>) -> Result<()> {
    match fault.get() {
        Some(f) => Err(f.into()),
        None => Ok(()),
    }
}

fn human_view<'a>(inst: &'a Instance, guard: Guard<'a>, draw: &Draw, peer_weights: &'a [f64], horizon: u64) -> HumanView<'a> {
    HumanView {
        guard,
        x: draw.x,
        z: draw.z,
        own: inst.human_policies(),
        peer: inst.machine_policies(),
        peer_weights,
        horizon,
        actions: inst.actions().count(),
        recommendations: inst.recommendations().size(),
    }
}

fn machine_view<'a>(
    inst: &'a Instance,
    guard: Guard<'a>,
    draw: &Draw,
    peer_weights: &'a [f64],
    directive: Option<usize>,
    horizon: u64,
) -> MachineView<'a> {
    MachineView {
        guard,
        x: draw.x,
        z: draw.z,
        own: inst.machine_policies(),
        peer: inst.human_policies(),
        peer_weights,
        directive,
        horizon,
        recommendations: inst.recommendations().size(),
    }
}

fn run_loop(
    inst: &Instance,
    mode: BarrierMode,
    machine: &mut dyn MachineAgent,
    human: &mut dyn HumanAgent,
    horizon: u64,
    source: &mut dyn DrawSource,
    scoring: Scoring,
) -> Result<Episode> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let t_max = usize::try_from(horizon).map_err(|_| Error::Config("horizon too large".into()))?;
    let (n1, n2) = (inst.n1(), inst.n2());
    let k = inst.actions().count();
    let rec_size = inst.recommendations().size();
    let (mut accounting, optimal) = match scoring {
        Scoring::Expected { optimal } if inst.exact_oracle() => (Accounting::Pseudo, optimal),
        Scoring::Expected { optimal } => (Accounting::Realized, optimal),
        Scoring::Hindsight { .. } => (Accounting::Hindsight, 0.0),
    };
    let mut trace = RegretTrace::new(accounting, optimal, t_max);
    let mut records = Vec::with_capacity(t_max);
    let mut draw = Draw::default();
    let mut realized = Vec::new();
    let fault = Cell::new(None);

    for t in 1..=t_max {
        source.next_draw(t, &mut draw)?;
        let guard = Guard { mode, round: t, fault: &fault };
        let directive = human.directive(&human_view(inst, guard, &draw, machine.weights(), horizon));
        latched(&fault)?;
        let directive = directive?;
        match (mode, directive) {
            (BarrierMode::Directive, None) => {
                return Err(Error::Protocol { round: t, detail: "directive mode requires a policy index".into() })
            }
            (BarrierMode::Directive, Some(i)) if i >= n1 => {
                return Err(Error::Protocol { round: t, detail: format!("directive {i} outside 0..{n1}") })
            }
            (BarrierMode::Full | BarrierMode::Open, Some(_)) => {
                return Err(Error::Protocol { round: t, detail: "directive channel is closed in this mode".into() })
            }
            _ => {}
        }

        let r = machine.recommend(&machine_view(inst, guard, &draw, human.weights(), directive, horizon));
        latched(&fault)?;
        let r = r?;
        if r >= rec_size {
            return Err(Error::Protocol { round: t, detail: format!("recommendation {r} outside 0..{rec_size}") });
        }
        if let Some(i) = directive {
            let expected = inst.machine_policies()[i].recommend(draw.x)?;
            if r != expected {
                return Err(Error::Protocol {
                    round: t,
                    detail: format!("machine recommended {r} but directed policy {i} gives {expected}"),
                });
            }
        }

        let a = human.act(&human_view(inst, guard, &draw, machine.weights(), horizon), r);
        latched(&fault)?;
        let a = a?;
        if a >= k {
            return Err(Error::Protocol { round: t, detail: format!("action {a} outside 0..{k}") });
        }
        let y = draw.payoffs[a];

        let (regret, realized_regret) = match scoring {
            Scoring::Expected { optimal } => {
                let law = expected_under(inst.values().as_slice(), n2, machine.law(), human.law());
                match (accounting, law) {
                    (Accounting::Pseudo, Some(v)) => ((optimal - v).clamp(0.0, 1.0), optimal - y),
                    _ => {
                        accounting = Accounting::Realized;
                        (optimal - y, optimal - y)
                    }
                }
            }
            Scoring::Hindsight { best } => {
                inst.realized_rewards(&draw, &mut realized)?;
                let top = realized[best];
                let v = expected_under(&realized, n2, machine.law(), human.law()).unwrap_or(y);
                (top - v, top - y)
            }
        };
        trace.push(regret, y, realized_regret);
        records.push(RoundRecord {
            t,
            directive,
            x: draw.x,
            r,
            z: draw.z,
            a,
            y,
            pseudo_regret: regret,
            cumulative: trace.final_regret(),
        });

        let feedback = Feedback { round: t, recommendation: r, action: a, reward: y };
        let res = machine.observe(&machine_view(inst, guard, &draw, human.weights(), directive, horizon), &feedback);
        latched(&fault)?;
        res?;
        let res = human.observe(&human_view(inst, guard, &draw, machine.weights(), horizon), &feedback);
        latched(&fault)?;
        res?;
    }
    trace.accounting = accounting;
    Ok(Episode { records, trace })
}
