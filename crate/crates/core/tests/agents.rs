use coadvise_core::agents::sides::{DirectedMachine, P2Exp4Human};
use coadvise_core::agents::{action_law, reward_estimates, Exp4, Exp4Params, MossState, P2Exp4, WeightMatrix};
use coadvise_core::engine::{run_agents, BarrierMode};
use coadvise_core::envgen::{make_private_info_lb, BernoulliArms};
use coadvise_core::rng::{Stream, Substream};
use proptest::prelude::*;

fn random_probs(s: &mut Stream, n: usize) -> Vec<f64> {
    (0..n).map(|_| 0.05 + s.uniform()).collect()
}

/// Advice in which every action is advised by at least one expert.
fn covering_advice(s: &mut Stream, experts: usize, k: usize) -> Vec<usize> {
    (0..experts).map(|e| if e < k { e } else { s.below(k as u64) as usize }).collect()
}

#[test]
fn exp4_estimator_is_unbiased() {
    let mut s = Stream::new(1, Substream::Oracle);
    let mut est = Vec::new();
    let mut p = Vec::new();
    for _ in 0..100 {
        let k = 2 + s.below(4) as usize;
        let n = k + s.below(5) as usize;
        let q = WeightMatrix::from_probs(1, n, &random_probs(&mut s, n)).unwrap();
        let advice = covering_advice(&mut s, n, k);
        let y: Vec<f64> = (0..k).map(|_| s.uniform()).collect();
        action_law(q.probs(), &advice, k, &mut p).unwrap();
        // E_a[ŷ_k] summed exactly over every realization a
        let mut mean = vec![0.0; k];
        for a in 0..k {
            reward_estimates(k, a, p[a], y[a], &mut est).unwrap();
            for (m, e) in mean.iter_mut().zip(&est) {
                *m += p[a] * e;
            }
        }
        for (m, yk) in mean.iter().zip(&y) {
            assert!((m - yk).abs() <= 1e-12, "{m} vs {yk}");
        }
    }
}

#[test]
fn p2exp4_estimator_is_unbiased() {
    let mut s = Stream::new(2, Substream::Oracle);
    let mut est = Vec::new();
    let mut row = Vec::new();
    for _ in 0..100 {
        let k = 2 + s.below(3) as usize;
        let n1 = 1 + s.below(4) as usize;
        let n2 = 1 + s.below(4) as usize;
        let w = WeightMatrix::from_probs(n1, n2, &random_probs(&mut s, n1 * n2)).unwrap();
        let agent = P2Exp4::with_weights(w.clone(), k, Exp4Params::new(0.1, 0.0).unwrap()).unwrap();
        // advice[i][j] = g_j(f_i(x), z), arbitrary per row
        let advice: Vec<Vec<usize>> =
            (0..n1).map(|_| (0..n2).map(|_| s.below(k as u64) as usize).collect()).collect();
        let y: Vec<f64> = (0..k).map(|_| s.uniform()).collect();
        let q = agent.marginals().to_vec();
        let mut mean = vec![0.0; n1 * n2];
        for it in 0..n1 {
            agent.row_law(it, &advice[it], &mut row).unwrap();
            for a in 0..k {
                let prob = q[it] * row[a];
                if prob == 0.0 {
                    continue;
                }
                reward_estimates(k, a, q[it] * row[a], y[a], &mut est).unwrap();
                for i in 0..n1 {
                    for j in 0..n2 {
                        let yhat = if i == it { est[advice[i][j]] } else { 1.0 };
                        mean[i * n2 + j] += prob * yhat;
                    }
                }
            }
        }
        for i in 0..n1 {
            for j in 0..n2 {
                let truth = y[advice[i][j]];
                assert!((mean[i * n2 + j] - truth).abs() <= 1e-12, "({i},{j}) {} vs {truth}", mean[i * n2 + j]);
            }
        }
    }
}

#[test]
fn weights_survive_a_million_adversarial_updates() {
    let mut agent = Exp4::new(6, 3, Exp4Params::new(0.5, 0.0).unwrap()).unwrap();
    let mut s = Stream::new(3, Substream::Oracle);
    let advice = [0, 1, 2, 0, 1, 2];
    for t in 0..1_000_000u64 {
        agent.prepare(&advice).unwrap();
        let a = agent.sample(s.uniform());
        // punish whatever was played, except a periodic full reward
        let y = if t % 97 == 0 { 1.0 } else { 0.0 };
        agent.update(a, y).unwrap();
        if t % 1000 == 0 {
            let q = agent.weights().probs();
            assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            assert!(q.iter().all(|p| p.is_finite() && *p >= 0.0));
            assert!(agent.weights().log_probs().iter().all(|l| l.is_finite()));
        }
    }
}

#[test]
fn p2exp4_weights_stay_normalized() {
    let mut agent = P2Exp4::new(4, 3, 2, Exp4Params::new(0.3, 0.0).unwrap()).unwrap();
    let mut s = Stream::new(4, Substream::Oracle);
    for t in 0..200_000u64 {
        agent.select_policy(s.uniform());
        let advice: Vec<usize> = (0..3).map(|_| s.below(2) as usize).collect();
        agent.prepare(&advice).unwrap();
        let a = agent.sample(s.uniform());
        agent.update(a, (t % 3 == 0) as u8 as f64).unwrap();
        let q = agent.weights().probs();
        assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        assert!(q.iter().all(|p| p.is_finite() && *p >= 0.0));
    }
}

#[test]
fn single_machine_policy_reduces_to_exp4() {
    let params = Exp4Params::new(0.2, 0.0).unwrap();
    let mut p2 = P2Exp4::new(1, 5, 3, params).unwrap();
    let mut exp4 = Exp4::new(5, 3, params).unwrap();
    let mut s = Stream::new(5, Substream::Oracle);
    for _ in 0..5000 {
        let advice: Vec<usize> = (0..5).map(|_| s.below(3) as usize).collect();
        let u = s.uniform();
        assert_eq!(p2.select_policy(u), 0);
        p2.prepare(&advice).unwrap();
        exp4.prepare(&advice).unwrap();
        let a = exp4.sample(s.uniform());
        let y = s.bernoulli(0.4) as u8 as f64;
        p2.update(a, y).unwrap();
        exp4.update(a, y).unwrap();
        let div = exp4.weights().divergence(p2.weights().probs());
        assert!(div < 1e-12, "{div}");
    }
}

#[test]
fn directive_concentrates_on_dominant_policy() {
    let inst = make_private_info_lb(&BernoulliArms::new(vec![0.9, 0.3, 0.3]).unwrap()).unwrap();
    let horizon = 3000;
    let eta = (2.0 * 3f64.ln() / (horizon as f64 * 2.0 * 3.0)).sqrt();
    let mut concentrated = 0;
    for seed in 0..50 {
        let state = P2Exp4::new(3, 1, 2, Exp4Params::new(eta, 0.0).unwrap()).unwrap();
        let mut human = P2Exp4Human::new(state, Stream::new(seed, Substream::Human));
        let mut machine = DirectedMachine::new();
        run_agents(&inst, BarrierMode::Directive, &mut machine, &mut human, horizon, seed).unwrap();
        let q = human.state().marginals();
        if q[0] > q[1] && q[0] > q[2] && q[0] > 0.5 {
            concentrated += 1;
        }
    }
    assert!(concentrated >= 48, "only {concentrated}/50 seeds concentrated");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moss_replicas_agree(n1 in 1usize..4, n2 in 1usize..4, rewards in prop::collection::vec(0.0f64..=1.0, 1..300)) {
        let horizon = rewards.len() as u64;
        let mut a = MossState::new(n1, n2, horizon).unwrap();
        let mut b = MossState::new(n1, n2, horizon).unwrap();
        for y in rewards {
            let arm = a.select();
            prop_assert_eq!(arm, b.select());
            prop_assert_eq!(a.decode(arm), b.decode(arm));
            a.update(arm, y).unwrap();
            b.update(arm, y).unwrap();
        }
        prop_assert_eq!(a.counts().iter().sum::<u64>(), a.round());
    }

    #[test]
    fn gamma_keeps_estimates_finite(p in 0.0f64..1.0, gamma in 0.01f64..1.0, y in 0.0f64..=1.0) {
        let mut est = Vec::new();
        reward_estimates(2, 0, p + gamma, y, &mut est).unwrap();
        prop_assert!(est.iter().all(|e| e.is_finite()));
        prop_assert!(est[0] <= 1.0);
    }
}
