use crate::model::Instance;

/// Default tolerance against exact value tables.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// Monte Carlo tables are compared at this many combined standard errors.
pub const MC_STANDARD_ERRORS: f64 = 4.0;

/// Policies `(f₁, f₂, g₁, g₂)` whose reward differences disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Witness {
    pub f1: usize,
    pub f2: usize,
    pub g1: usize,
    pub g2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceReport {
    pub independent: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    /// First quadruple (in `f₁, f₂, g₁, g₂` order) exceeding the tolerance.
    pub witness: Option<Witness>,
}

/// Checks that `[Y(g₁∘f₁) − Y(g₁∘f₂)] − [Y(g₂∘f₁) − Y(g₂∘f₂)]` vanishes for
/// every quadruple. `tol = None` picks [`EXACT_TOLERANCE`] on exact tables
/// and [`MC_STANDARD_ERRORS`] combined standard errors otherwise.
pub fn check_independence(inst: &Instance, tol: Option<f64>) -> IndependenceReport {
    let v = inst.values();
    let (n1, n2) = (inst.n1(), inst.n2());
    let mut worst = 0.0f64;
    let mut witness = None;
    let mut reported_tol = tol.unwrap_or(EXACT_TOLERANCE);
    for f1 in 0..n1 {
        for f2 in 0..n1 {
            for g1 in 0..n2 {
                for g2 in 0..n2 {
                    let violation = ((v.get(f1, g1) - v.get(f2, g1)) - (v.get(f1, g2) - v.get(f2, g2))).abs();
                    let limit = match tol {
                        Some(t) => t,
                        None if v.exact() => EXACT_TOLERANCE,
                        None => {
                            let var: f64 = [(f1, g1), (f2, g1), (f1, g2), (f2, g2)]
                                .iter()
                                .map(|&(i, j)| v.std_error(i, j) * v.std_error(i, j))
                                .sum();
                            MC_STANDARD_ERRORS * libm::sqrt(var)
                        }
                    };
                    worst = worst.max(violation);
                    if violation > limit && witness.is_none() {
                        witness = Some(Witness { f1, f2, g1, g2 });
                        reported_tol = limit;
                    }
                }
            }
        }
    }
    IndependenceReport { independent: witness.is_none(), worst_violation: worst, tolerance: reported_tol, witness }
}

#[cfg(test)]
mod tests {
    use alloc::vec;

    use super::*;
    use crate::envgen::{make_tabular, Atom, Payoff};
    use crate::model::{HumanPolicy, MachinePolicy, RecommendationSpace};

    /// `(f₁, g₁)` and `(f₂, g₂)` earn 1, the cross pairs earn 0.
    fn coupled() -> Instance {
        let atoms = vec![Atom { prob: 1.0, x: 0, z: 0, payoff: Payoff::Fixed(vec![1.0, 0.0]) }];
        let machine = vec![MachinePolicy::Constant(0), MachinePolicy::Constant(1)];
        let flip = HumanPolicy::Table { contexts: 1, actions: vec![1, 0] };
        make_tabular(atoms, machine, vec![HumanPolicy::Follow, flip], RecommendationSpace::Actions(2)).unwrap()
    }

    #[test]
    fn coupled_pair_violates_by_two() {
        let rep = check_independence(&coupled(), None);
        assert!(!rep.independent);
        assert_eq!(rep.worst_violation, 2.0);
        assert_eq!(rep.witness, Some(Witness { f1: 0, f2: 1, g1: 0, g2: 1 }));
    }

    #[test]
    fn singleton_side_is_independent() {
        let atoms = vec![
            Atom { prob: 0.5, x: 0, z: 0, payoff: Payoff::Bernoulli(vec![0.2, 0.9]) },
            Atom { prob: 0.5, x: 1, z: 1, payoff: Payoff::Bernoulli(vec![0.7, 0.1]) },
        ];
        let machine = vec![MachinePolicy::Table(vec![0, 1]), MachinePolicy::Constant(1)];
        let inst = make_tabular(atoms, machine, vec![HumanPolicy::Follow], RecommendationSpace::Actions(2)).unwrap();
        let rep = check_independence(&inst, None);
        assert!(rep.independent);
        assert_eq!(rep.worst_violation, 0.0);
    }
}
