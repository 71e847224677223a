//! i.i.d. environments over finite (possibly huge) context supports.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::lazy::{draw_bits, BernoulliTable, PermutationTable, WinnerTable, MAX_ARMS};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Largest support [`Environment::atoms`] will enumerate.
pub const MAX_ENUMERATED_ATOMS: usize = 1 << 20;

/// Payoff law attached to one support atom.
#[derive(Debug, Clone, PartialEq)]
pub enum Payoff {
    Fixed(Vec<f64>),
    /// Independent Bernoulli payoff per action.
    Bernoulli(Vec<f64>),
}

impl Payoff {
    pub fn means(&self) -> &[f64] {
        match self {
            Self::Fixed(v) | Self::Bernoulli(v) => v,
        }
    }

    fn realize(&self, stream: &mut Stream, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Self::Fixed(v) => out.extend_from_slice(v),
            Self::Bernoulli(v) => out.extend(v.iter().map(|&p| if stream.bernoulli(p) { 1.0 } else { 0.0 })),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub prob: f64,
    pub x: u64,
    pub z: u64,
    pub payoff: Payoff,
}

/// One round's draw `(x_t, z_t, Y_t)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Draw {
    pub x: u64,
    pub z: u64,
    pub payoffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tabular {
    actions: usize,
    atoms: Vec<Atom>,
    cumulative: Vec<f64>,
}

impl Tabular {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let first = atoms.first().ok_or_else(|| Error::Validation("tabular environment needs atoms".into()))?;
        let actions = first.payoff.means().len();
        let mut total = 0.0;
        let mut cumulative = Vec::with_capacity(atoms.len());
        for (n, atom) in atoms.iter().enumerate() {
            if !(atom.prob >= 0.0 && atom.prob.is_finite()) {
                return Err(Error::Validation(format!("atom {n}: probability {} not in [0, 1]", atom.prob)));
            }
            let means = atom.payoff.means();
            if means.len() != actions {
                return Err(Error::Validation(format!("atom {n}: {} payoffs, expected {actions}", means.len())));
            }
            if let Some(p) = means.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Validation(format!("atom {n}: payoff {p} outside [0, 1]")));
            }
            total += atom.prob;
            cumulative.push(total);
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("atom probabilities sum to {total}, not 1")));
        }
        Ok(Self { actions, atoms, cumulative })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    fn pick(&self, u: f64) -> &Atom {
        let u = u * self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|&c| c <= u);
        &self.atoms[k.min(self.atoms.len() - 1)]
    }
}

/// Bernoulli arms revealed to the human only: `x` is the null context, `z`
/// packs the realized arm payoffs, action 0 pays 0 and action 1 pays 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivateArms {
    pub means: Vec<f64>,
}

/// Both players see `x` uniform on `0..contexts`; arm payoffs come from a
/// private lookup `ĝ(x)`. Payoffs as in [`PrivateArms`].
#[derive(Debug, Clone, PartialEq)]
pub struct OpaqueArms {
    pub contexts: u64,
    pub table: BernoulliTable,
}

/// Uniform `x` on `0..contexts` with a per-context permutation of
/// recommendations and a per-context winning action. The human context packs
/// `x` above freshly drawn arm bits: `z = x << arms | bits`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShuffledArms {
    pub contexts: u64,
    pub means: Vec<f64>,
    pub permutation: PermutationTable,
    pub winners: WinnerTable,
}

/// Conjectured hard instance with `R = A = {0, 1}` and `n` policies per player.
/// `x` is a uniform `n`-bit recommendation profile; `z` packs one map
/// `{0,1} → {0,1}` per human policy as bits `(2j, 2j+1) = (m(0), m(1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjecture {
    pub n: usize,
    pub delta: f64,
    pub optimal_machine: usize,
    pub optimal_human: usize,
}

impl Conjecture {
    /// Marginal over maps `(m(0), m(1))` in order `(0,0), (1,0), (0,1), (1,1)`
    /// for every human policy but the planted one.
    pub fn background_map_law(delta: f64) -> [f64; 4] {
        let d2 = delta * delta;
        [0.25 - d2, 0.25 + d2, 0.25 + d2, 0.25 - d2]
    }

    /// Probability of planted map bits `(m0, m1)` given the planted
    /// recommendation `rec` and the winning action `w`.
    fn planted_map_prob(&self, rec: usize, w: usize, m0: usize, m1: usize) -> f64 {
        let hit = |r: usize, m: usize| {
            let p = if r == rec { 0.5 + self.delta } else { 0.5 - self.delta };
            if m == w {
                p
            } else {
                1.0 - p
            }
        };
        hit(0, m0) * hit(1, m1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    Tabular(Tabular),
    PrivateArms(PrivateArms),
    OpaqueArms(OpaqueArms),
    ShuffledArms(ShuffledArms),
    Conjecture(Conjecture),
}

impl Environment {
    pub fn action_count(&self) -> usize {
        match self {
            Self::Tabular(t) => t.actions,
            _ => 2,
        }
    }

    /// Whether both players always observe the same context.
    pub fn shared_context(&self) -> bool {
        match self {
            Self::Tabular(t) => t.atoms.iter().all(|a| a.x == a.z),
            Self::OpaqueArms(_) => true,
            _ => false,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let check_means = |means: &[f64]| -> Result<()> {
            if means.is_empty() || means.len() > MAX_ARMS {
                return Err(Error::Validation(format!("arm count must be 1..={MAX_ARMS}")));
            }
            match means.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                Some(p) => Err(Error::Validation(format!("arm mean {p} outside [0, 1]"))),
                None => Ok(()),
            }
        };
        match self {
            Self::Tabular(_) => Ok(()),
            Self::PrivateArms(p) => check_means(&p.means),
            Self::OpaqueArms(o) => {
                check_means(o.table.means())?;
                if o.contexts == 0 {
                    return Err(Error::Validation("context range is empty".into()));
                }
                Ok(())
            }
            Self::ShuffledArms(s) => {
                check_means(&s.means)?;
                if s.means.len() != s.permutation.len() {
                    return Err(Error::Validation("permutation size differs from arm count".into()));
                }
                if s.contexts == 0 || (s.contexts - 1).leading_zeros() < s.means.len() as u32 {
                    return Err(Error::Validation(format!(
                        "{} contexts with {} arms do not pack into a 64-bit human context",
                        s.contexts,
                        s.means.len()
                    )));
                }
                Ok(())
            }
            Self::Conjecture(c) => {
                if c.n < 2 || c.n > 32 {
                    return Err(Error::Validation(format!("conjecture instance needs 2..=32 policies, got {}", c.n)));
                }
                if !(c.delta > 0.0 && c.delta <= 0.5) {
                    return Err(Error::Validation(format!("delta {} outside (0, 0.5]", c.delta)));
                }
                Ok(())
            }
        }
    }

    /// Draw `(x_t, z_t, Y_t)` into `out`, realizing any Bernoulli payoffs.
    pub fn sample_into(&self, stream: &mut Stream, out: &mut Draw) {
        match self {
            Self::Tabular(t) => {
                let atom = t.pick(stream.uniform());
                out.x = atom.x;
                out.z = atom.z;
                atom.payoff.realize(stream, &mut out.payoffs);
            }
            Self::PrivateArms(p) => {
                out.x = 0;
                out.z = draw_bits(stream, &p.means);
                fixed_payoffs(out);
            }
            Self::OpaqueArms(o) => {
                let x = stream.below(o.contexts);
                out.x = x;
                out.z = x;
                fixed_payoffs(out);
            }
            Self::ShuffledArms(s) => {
                let x = stream.below(s.contexts);
                let bits = draw_bits(stream, &s.means);
                out.x = x;
                out.z = (x << s.means.len()) | bits;
                let w = s.winners.winner(x);
                out.payoffs.clear();
                out.payoffs.extend([0.0, 0.0]);
                out.payoffs[w] = 1.0;
            }
            Self::Conjecture(c) => {
                let x = stream.below(1u64 << c.n);
                let w = (stream.next_u64() >> 63) as usize;
                let rec = ((x >> c.optimal_machine) & 1) as usize;
                let background = Conjecture::background_map_law(c.delta);
                let mut z = 0u64;
                for j in 0..c.n {
                    let (m0, m1) = if j == c.optimal_human {
                        let draw = |stream: &mut Stream, r: usize| {
                            let p = if r == rec { 0.5 + c.delta } else { 0.5 - c.delta };
                            if stream.bernoulli(p) {
                                w
                            } else {
                                1 - w
                            }
                        };
                        let m0 = draw(stream, 0);
                        (m0, draw(stream, 1))
                    } else {
                        let k = crate::rng::sample_index(&background, stream.uniform());
                        (k & 1, k >> 1)
                    };
                    z |= ((m0 | (m1 << 1)) as u64) << (2 * j);
                }
                out.x = x;
                out.z = z;
                out.payoffs.clear();
                out.payoffs.extend([0.0, 0.0]);
                out.payoffs[w] = 1.0;
            }
        }
    }

    /// The full support with probabilities, when it is small enough to list.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        match self {
            Self::Tabular(t) => Some(t.atoms.clone()),
            Self::PrivateArms(p) => {
                let n = p.means.len();
                if n > 20 {
                    return None;
                }
                Some(
                    (0..1u64 << n)
                        .map(|z| {
                            let prob = p
                                .means
                                .iter()
                                .enumerate()
                                .map(|(i, &m)| if (z >> i) & 1 == 1 { m } else { 1.0 - m })
                                .product();
                            Atom { prob, x: 0, z, payoff: Payoff::Fixed(vec![0.0, 1.0]) }
                        })
                        .collect(),
                )
            }
            Self::OpaqueArms(_) | Self::ShuffledArms(_) => None,
            Self::Conjecture(c) => {
                let count = (1usize << c.n).checked_mul(2)?.checked_mul(1usize.checked_shl(2 * c.n as u32)?)?;
                if count > MAX_ENUMERATED_ATOMS {
                    return None;
                }
                let background = Conjecture::background_map_law(c.delta);
                let mut atoms = Vec::with_capacity(count);
                for x in 0..1u64 << c.n {
                    let rec = ((x >> c.optimal_machine) & 1) as usize;
                    for w in 0..2usize {
                        let base = 0.5 / (1u64 << c.n) as f64;
                        for z in 0..1u64 << (2 * c.n) {
                            let mut prob = base;
                            for j in 0..c.n {
                                let code = ((z >> (2 * j)) & 3) as usize;
                                let (m0, m1) = (code & 1, code >> 1);
                                prob *= if j == c.optimal_human {
                                    c.planted_map_prob(rec, w, m0, m1)
                                } else {
                                    background[code]
                                };
                            }
                            let mut pay = vec![0.0, 0.0];
                            pay[w] = 1.0;
                            atoms.push(Atom { prob, x, z, payoff: Payoff::Fixed(pay) });
                        }
                    }
                }
                Some(atoms)
            }
        }
    }
}

fn fixed_payoffs(out: &mut Draw) {
    out.payoffs.clear();
    out.payoffs.extend([0.0, 1.0]);
}
