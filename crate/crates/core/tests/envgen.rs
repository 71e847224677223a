use coadvise_core::envgen::{
    check_independence, make_conjecture, make_opacity_lb, make_private_info_lb, make_randomized_lb, AllocationRule,
    BernoulliArms, Conjecture, Draw, Environment, RandomTabular,
};
use coadvise_core::model::{expected_reward, monte_carlo_values, Instance};
use coadvise_core::rng::{Stream, Substream};
use proptest::prelude::*;

fn arms(m: &[f64]) -> BernoulliArms {
    BernoulliArms::new(m.to_vec()).unwrap()
}

fn mc_check(inst: &Instance, i: usize, expect: f64, samples: u64, seed: u64) {
    let t = monte_carlo_values(inst.env(), inst.machine_policies(), inst.human_policies(), samples, seed).unwrap();
    let (v, se) = (t.get(i, 0), t.std_error(i, 0));
    assert!((v - expect).abs() <= 4.0 * se, "policy {i}: {v} vs {expect} (se {se})");
}

#[test]
fn private_info_draws() {
    let inst = make_private_info_lb(&arms(&[1.0, 0.0, 1.0])).unwrap();
    let mut s = Stream::new(3, Substream::Environment);
    let mut d = Draw::default();
    for _ in 0..10 {
        inst.env().sample_into(&mut s, &mut d);
        assert_eq!(d.x, 0);
        assert_eq!(d.z, 0b101);
        assert_eq!(d.payoffs, [0.0, 1.0]);
    }
    assert_eq!(inst.n2(), 1);
}

#[test]
fn opacity_value_by_monte_carlo() {
    let inst = make_opacity_lb(&arms(&[0.6, 0.5]), 1000, 9).unwrap();
    assert!((expected_reward(&inst, 0, 0).unwrap().value - 0.6).abs() < 1e-12);
    mc_check(&inst, 0, 0.6, 1_000_000, 1);
    mc_check(&inst, 1, 0.5, 1_000_000, 1);
    assert!(inst.shared_context());
}

#[test]
fn opacity_collision_bound() {
    let t = 1000u64;
    let m = coadvise_core::envgen::contexts_for_horizon(t).unwrap() as f64;
    assert!((t * t) as f64 / (2.0 * m) <= 0.01 + 1e-15);
}

#[test]
fn randomized_value_by_monte_carlo() {
    let inst = make_randomized_lb(&arms(&[0.55, 0.5, 0.5]), 1000, 4).unwrap();
    mc_check(&inst, 0, 0.55, 1_000_000, 2);
    mc_check(&inst, 1, 0.5, 1_000_000, 2);
}

fn stream_of(inst: &Instance, seed: u64, n: usize) -> Vec<Draw> {
    let mut s = Stream::new(seed, Substream::Environment);
    (0..n)
        .map(|_| {
            let mut d = Draw::default();
            inst.env().sample_into(&mut s, &mut d);
            d
        })
        .collect()
}

#[test]
fn equal_seeds_give_equal_streams() {
    let a = make_randomized_lb(&arms(&[0.55, 0.5, 0.5]), 100, 4).unwrap();
    let b = make_randomized_lb(&arms(&[0.55, 0.5, 0.5]), 100, 4).unwrap();
    assert_eq!(stream_of(&a, 1, 200), stream_of(&b, 1, 200));
    let c = make_opacity_lb(&arms(&[0.6, 0.5]), 100, 5).unwrap();
    let d = make_opacity_lb(&arms(&[0.6, 0.5]), 100, 5).unwrap();
    assert_eq!(stream_of(&c, 1, 200), stream_of(&d, 1, 200));
    for draw in stream_of(&c, 2, 50) {
        // ĝ(x) is a pure function of (seed, x)
        let Environment::OpaqueArms(o) = c.env() else { unreachable!() };
        assert_eq!(o.table.bits(draw.x), o.table.bits(draw.x));
    }
}

#[test]
fn conjecture_background_table() {
    let law = Conjecture::background_map_law(0.3);
    let expect = [0.16, 0.34, 0.34, 0.16];
    for (a, b) in law.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(make_conjecture(3, 0.6, 1).is_err());
}

#[test]
fn conjecture_exact_values() {
    for n in [2, 3] {
        let inst = make_conjecture(n, 0.2, 5).unwrap();
        let Environment::Conjecture(c) = inst.env() else { unreachable!() };
        // independent oracle: enumerate the value table from the atom list
        let atoms = inst.env().atoms().unwrap();
        for i in 0..n {
            for j in 0..n {
                let v: f64 = atoms
                    .iter()
                    .map(|a| {
                        let act = inst.joint_action(i, j, a.x, a.z).unwrap();
                        a.prob * a.payoff.means()[act]
                    })
                    .sum();
                let expect = if (i, j) == (c.optimal_machine, c.optimal_human) { 0.7 } else { 0.5 };
                assert!((v - expect).abs() < 1e-12, "pair ({i},{j}) = {v}");
                assert!((expected_reward(&inst, i, j).unwrap().value - expect).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn conjecture_planted_map_marginal() {
    let delta = 0.2;
    let inst = make_conjecture(3, delta, 8).unwrap();
    let Environment::Conjecture(c) = inst.env() else { unreachable!() };
    let law = Conjecture::background_map_law(delta);
    let n = 1_000_000u64;
    let mut counts = [0u64; 4];
    let mut s = Stream::new(77, Substream::Oracle);
    let mut d = Draw::default();
    for _ in 0..n {
        inst.env().sample_into(&mut s, &mut d);
        let bits = (d.z >> (2 * c.optimal_human)) & 3;
        counts[bits as usize] += 1;
    }
    for (k, &p) in law.iter().enumerate() {
        let freq = counts[k] as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * se, "map {k}: {freq} vs {p}");
    }
}

#[test]
fn allocation_and_defer_are_independent() {
    let gen = RandomTabular::new(4, 8, 2, 6);
    for seed in 0..5 {
        for rule in [AllocationRule::AlwaysMachine, AllocationRule::AlwaysHuman, AllocationRule::Random(0.5)] {
            let rep = check_independence(&gen.build_allocation(rule, seed).unwrap(), None);
            assert!(rep.independent && rep.worst_violation <= 1e-12, "{rule:?}: {}", rep.worst_violation);
        }
        let rep = check_independence(&gen.build_defer(seed).unwrap(), None);
        assert!(rep.independent && rep.worst_violation == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn independence_is_symmetric(seed in 0u64..500) {
        let inst = RandomTabular::new(3, 3, 2, 3).build(seed).unwrap();
        let v = inst.values();
        let viol = |f1: usize, f2: usize, g1: usize, g2: usize| {
            ((v.get(f1, g1) - v.get(f2, g1)) - (v.get(f1, g2) - v.get(f2, g2))).abs()
        };
        let mut worst = 0.0f64;
        for f1 in 0..3 { for f2 in 0..3 { for g1 in 0..3 { for g2 in 0..3 {
            let base = viol(f1, f2, g1, g2);
            prop_assert!((base - viol(f2, f1, g1, g2)).abs() < 1e-15);
            prop_assert!((base - viol(f1, f2, g2, g1)).abs() < 1e-15);
            worst = worst.max(base);
        }}}}
        prop_assert_eq!(check_independence(&inst, None).worst_violation, worst);
    }

    #[test]
    fn singleton_sides_are_independent(seed in 0u64..500) {
        let one_human = RandomTabular::new(3, 1, 2, 3).build(seed).unwrap();
        let one_machine = RandomTabular::new(1, 3, 2, 3).build(seed).unwrap();
        prop_assert_eq!(check_independence(&one_human, None).worst_violation, 0.0);
        prop_assert_eq!(check_independence(&one_machine, None).worst_violation, 0.0);
    }
}
