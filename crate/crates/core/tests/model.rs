use coadvise_core::envgen::{make_allocation, make_conjecture, make_private_info_lb, make_tabular, Atom, BernoulliArms, Environment, Payoff, RandomTabular, Tabular};
use coadvise_core::model::{
    best_pair, eval_joint, expected_reward, regret_bound, Allocator, BoundKind, ContextRule, Dimensions, HumanPolicy,
    JointPolicyIndex, MachinePolicy, Oracle, RecommendationSpace,
};
use coadvise_core::Error;
use proptest::prelude::*;

fn dims(horizon: u64, actions: usize, recommendations: usize, n1: usize, n2: usize) -> Dimensions {
    Dimensions { horizon, actions, recommendations, n1, n2 }
}

#[test]
fn constant_through_follow() {
    let f = MachinePolicy::Constant(0);
    for x in 0..5 {
        for z in 0..5 {
            assert_eq!(eval_joint(&f, &HumanPolicy::Follow, x, z).unwrap(), 0);
        }
    }
}

#[test]
fn private_info_rule_reads_own_arm() {
    let inst = make_private_info_lb(&BernoulliArms::new(vec![0.5, 0.5, 0.5]).unwrap()).unwrap();
    // z = (0, 1, 0): arm 1 paid, so following machine policy 1 plays the paying action
    let z = 0b010;
    assert_eq!(inst.joint_action(1, 0, 0, z).unwrap(), 1);
    assert_eq!(inst.joint_action(0, 0, 0, z).unwrap(), 0);
}

#[test]
fn allocator_off_passes_recommendation_through() {
    let g = HumanPolicy::Allocated { allocator: Allocator::Constant(false), rule: ContextRule::Constant(1) };
    for x in 0..3 {
        let f = MachinePolicy::Table(vec![0, 1, 0]);
        assert_eq!(eval_joint(&f, &g, x, 7).unwrap(), f.recommend(x).unwrap());
    }
}

#[test]
fn out_of_support_context_is_range_error() {
    let f = MachinePolicy::Table(vec![0, 1]);
    assert!(matches!(eval_joint(&f, &HumanPolicy::Follow, 5, 0), Err(Error::Range { .. })));
}

#[test]
fn single_atom_expectation() {
    let atoms = vec![Atom { prob: 1.0, x: 0, z: 0, payoff: Payoff::Fixed(vec![0.3, 0.9]) }];
    let inst = make_tabular(atoms, vec![MachinePolicy::Constant(1)], vec![HumanPolicy::Follow], RecommendationSpace::Actions(2))
        .unwrap();
    let e = expected_reward(&inst, 0, 0).unwrap();
    assert_eq!(e.value, 0.9);
    assert!(e.exact);
}

#[test]
fn private_info_values_by_enumeration() {
    let mu = [0.6, 0.5];
    let inst = make_private_info_lb(&BernoulliArms::new(mu.to_vec()).unwrap()).unwrap();
    // independent oracle: sum over z in {0,1}^2 with product weights
    for (i, &m) in mu.iter().enumerate() {
        let mut total = 0.0;
        for z in 0..4u64 {
            let w: f64 = mu.iter().enumerate().map(|(k, &p)| if (z >> k) & 1 == 1 { p } else { 1.0 - p }).product();
            total += w * ((z >> i) & 1) as f64;
        }
        assert!((expected_reward(&inst, i, 0).unwrap().value - total).abs() < 1e-12);
        assert!((total - m).abs() < 1e-12);
    }
    assert_eq!(best_pair(&inst).index, JointPolicyIndex::new(0, 0));
    assert_eq!(best_pair(&inst).value, 0.6);
}

#[test]
fn best_pair_examples() {
    let inst = make_private_info_lb(&BernoulliArms::new(vec![0.5, 0.7, 0.5]).unwrap()).unwrap();
    let b = best_pair(&inst);
    assert_eq!((b.index.machine, b.index.human, b.value), (1, 0, 0.7));

    let flat = make_private_info_lb(&BernoulliArms::new(vec![0.4, 0.4]).unwrap()).unwrap();
    assert_eq!(best_pair(&flat).index, JointPolicyIndex::new(0, 0));

    let conj = make_conjecture(3, 0.1, 11).unwrap();
    let b = best_pair(&conj);
    assert!((b.value - 0.6).abs() < 1e-12);
    for i in 0..3 {
        for j in 0..3 {
            let v = expected_reward(&conj, i, j).unwrap().value;
            if (i, j) == (b.index.machine, b.index.human) {
                assert!((v - 0.6).abs() < 1e-12);
            } else {
                assert!((v - 0.5).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn expected_reward_index_checks() {
    let inst = make_private_info_lb(&BernoulliArms::new(vec![0.6, 0.5]).unwrap()).unwrap();
    assert!(matches!(expected_reward(&inst, 2, 0), Err(Error::Range { .. })));
    assert!(matches!(expected_reward(&inst, 0, 1), Err(Error::Range { .. })));
}

#[test]
fn monte_carlo_with_zero_samples_is_config_error() {
    let env = Environment::Tabular(
        Tabular::new(vec![Atom { prob: 1.0, x: 0, z: 0, payoff: Payoff::Fixed(vec![0.0, 1.0]) }]).unwrap(),
    );
    let err = coadvise_core::model::monte_carlo_values(&env, &[MachinePolicy::Constant(0)], &[HumanPolicy::Follow], 0, 1);
    assert!(matches!(err, Err(Error::Config(_))));
}

#[test]
fn bound_arithmetic() {
    let d = dims(10_000, 2, 2, 4, 8);
    let ln32 = 32f64.ln();
    let directive_bound = (2.0 * 10_000.0 * 2.0 * 4.0 * ln32).sqrt();
    let joint_bound = (2.0 * 10_000.0 * 2.0 * ln32).sqrt();
    let independent_bound = (8.0 * 10_000.0 * 2.0 * 8f64.ln()).sqrt();
    assert!((regret_bound(BoundKind::P2Exp4, d) - directive_bound).abs() < 1e-9);
    assert!((regret_bound(BoundKind::JointExp4, d) - joint_bound).abs() < 1e-9);
    assert!((regret_bound(BoundKind::Independent, d) - independent_bound).abs() < 1e-9);
    assert!((directive_bound - 744.66).abs() < 0.01);
    assert!((joint_bound - 372.33).abs() < 0.01);
    assert!((independent_bound - 576.82).abs() < 0.01);
    assert_eq!(regret_bound(BoundKind::MossPairs, dims(100, 2, 2, 2, 2)), 25.0 * 20.0);
}

#[test]
fn allocation_requires_action_recommendations() {
    let env = Environment::Tabular(
        Tabular::new(vec![Atom { prob: 1.0, x: 0, z: 0, payoff: Payoff::Fixed(vec![0.0, 1.0]) }]).unwrap(),
    );
    let err = make_allocation(
        env,
        RecommendationSpace::Finite(2),
        Allocator::Constant(true),
        vec![ContextRule::Constant(0)],
        vec![MachinePolicy::Constant(0)],
        Oracle::default(),
    );
    assert!(matches!(err, Err(Error::Validation(_))));
}

/// Independent oracle: enumerate atoms by hand instead of using the value table.
fn brute_force(inst: &coadvise_core::model::Instance, i: usize, j: usize) -> f64 {
    let atoms = inst.env().atoms().unwrap();
    atoms
        .iter()
        .map(|a| {
            let r = inst.machine_policies()[i].recommend(a.x).unwrap();
            let act = inst.human_policies()[j].act(r, a.z).unwrap();
            a.prob * a.payoff.means()[act]
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eval_joint_is_deterministic(seed in 0u64..1000, x in 0u64..4, z in 0u64..4) {
        let inst = RandomTabular::new(3, 3, 3, 4).build(seed).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let a = inst.joint_action(i, j, x, z).unwrap();
                prop_assert_eq!(a, inst.joint_action(i, j, x, z).unwrap());
            }
        }
    }

    #[test]
    fn exact_values_match_brute_force(seed in 0u64..1000, shared in any::<bool>()) {
        let mut gen = RandomTabular::new(3, 2, 2, 3);
        if shared { gen = gen.shared(); }
        let inst = gen.build(seed).unwrap();
        prop_assert!(inst.exact_oracle());
        for i in 0..3 {
            for j in 0..2 {
                let v = expected_reward(&inst, i, j).unwrap().value;
                prop_assert!((v - brute_force(&inst, i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn best_pair_dominates(seed in 0u64..1000) {
        let inst = RandomTabular::new(4, 3, 2, 3).build(seed).unwrap();
        let b = best_pair(&inst);
        for i in 0..4 {
            for j in 0..3 {
                prop_assert!(b.value >= expected_reward(&inst, i, j).unwrap().value - 1e-12);
            }
        }
    }

    #[test]
    fn bounds_are_monotone(t in 1u64..100_000, k in 1usize..6, r in 1usize..6, n1 in 1usize..20, n2 in 1usize..20, which in 0usize..5) {
        let base = dims(t, k, r, n1, n2);
        let bumped = match which {
            0 => dims(t + 1, k, r, n1, n2),
            1 => dims(t, k + 1, r, n1, n2),
            2 => dims(t, k, r + 1, n1, n2),
            3 => dims(t, k, r, n1 + 1, n2),
            _ => dims(t, k, r, n1, n2 + 1),
        };
        for kind in [BoundKind::JointExp4, BoundKind::P2Exp4, BoundKind::Independent, BoundKind::MossPairs] {
            prop_assert!(regret_bound(kind, bumped) >= regret_bound(kind, base));
        }
    }
}
