//! Named instances shipped with the tool, referenced from configs as
//! `{"bundled": "<name>"}`.

use crate::spec::{
    AllocationParams, AllocationRuleSpec, ArmsParams, ConjectureParams, DeferParams, Generator, InstanceSpec,
    TabularParams,
};

fn means(m: &[f64]) -> ArmsParams {
    ArmsParams { means: Some(m.to_vec()), arms: None, base: None, gap: None }
}

fn tabular(n1: usize, n2: usize, contexts: usize, shared: bool) -> Generator {
    Generator::RandomTabular(TabularParams { n1, n2, actions: 2, contexts, shared, recommendations: None })
}

/// Every bundled instance, in a fixed order.
pub fn bundled() -> Vec<InstanceSpec> {
    vec![
        InstanceSpec::new(Generator::PrivateInfo(means(&[0.6, 0.5])), 0).named("private_info_2"),
        InstanceSpec::new(Generator::PrivateInfo(means(&[0.6, 0.5, 0.5, 0.5])), 0).named("private_info_4"),
        InstanceSpec::new(Generator::Opacity(means(&[0.6, 0.5])), 1).named("opacity_2"),
        InstanceSpec::new(Generator::Randomized(means(&[0.6, 0.5, 0.5])), 2).named("randomized_3"),
        InstanceSpec::new(Generator::Conjecture(ConjectureParams { n1: 3, delta: 0.2 }), 3).named("conjecture_3"),
        InstanceSpec::new(tabular(3, 4, 4, false), 4).named("tabular_3x4"),
        InstanceSpec::new(tabular(4, 8, 6, false), 5).named("tabular_4x8"),
        InstanceSpec::new(tabular(4, 8, 6, true), 6).named("tabular_4x8_shared"),
        InstanceSpec::new(
            Generator::Allocation(AllocationParams {
                n1: 4,
                n2: 8,
                actions: 2,
                contexts: 6,
                rule: AllocationRuleSpec::Random(0.5),
            }),
            7,
        )
        .named("allocation_4x8"),
        InstanceSpec::new(Generator::Defer(DeferParams { n1: 4, actions: 2, contexts: 6 }), 8).named("defer_4"),
    ]
}

pub fn lookup(name: &str) -> Option<InstanceSpec> {
    bundled().into_iter().find(|s| s.name.as_deref() == Some(name))
}

pub fn names() -> Vec<String> {
    bundled().into_iter().filter_map(|s| s.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_names_are_unique() {
        let names = names();
        for (i, n) in names.iter().enumerate() {
            assert!(!names[..i].contains(n), "duplicate {n}");
        }
        for spec in bundled() {
            let inst = spec.build(1000).unwrap();
            assert_eq!(inst.name(), spec.label());
            assert!(inst.actions().count() >= 2);
        }
    }
}
