use dsapf_core::channel::ChannelTensor;
use dsapf_core::config::{validate, ObjectiveKind, SystemConfig, ValidatedConfig};
use dsapf_core::engine::{agent_plan, run, Engine};
use dsapf_core::pfilter::Particle;
use dsapf_core::primary_user::sample_availability;
use dsapf_core::rng::Module;
use num_complex::Complex64;
use proptest::prelude::*;

fn cfg(n: usize, m: usize, ell: usize, p: f64, seed: u64, slots: usize) -> ValidatedConfig {
    validate(SystemConfig {
        n_users: n,
        n_bands: m,
        max_bands_per_user: ell,
        pu_busy_prob: p,
        seed,
        n_slots: slots,
        ..SystemConfig::default()
    })
    .unwrap()
}

#[test]
fn reruns_are_bit_identical() {
    let c = cfg(15, 5, 2, 0.3, 42, 40);
    let (s1, r1) = run(c.clone());
    let (s2, r2) = run(c);
    assert_eq!(s1, s2);
    assert_eq!(r1, r2);
}

#[test]
fn thread_count_does_not_change_trajectory() {
    let c = cfg(20, 6, 2, 0.2, 5, 30);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let a = single.install(|| run(c.clone()));
    let b = many.install(|| run(c));
    assert_eq!(a, b);
}

#[test]
fn different_seeds_diverge() {
    let a = run(cfg(10, 4, 1, 0.0, 1, 10)).1;
    let b = run(cfg(10, 4, 1, 0.0, 2, 10)).1;
    assert_ne!(a, b);
}

#[test]
fn message_total_is_quadratic() {
    for n in [1usize, 2, 7, 13] {
        let (summary, records) = run(cfg(n, 3, 1, 0.1, 3, 25));
        let per_slot = (n * (n - 1)) as u64;
        assert!(records.iter().all(|r| r.messages == per_slot));
        assert_eq!(summary.total_messages, 25 * per_slot);
    }
}

#[test]
fn summary_averages_every_slot() {
    let (summary, records) = run(cfg(6, 3, 1, 0.25, 8, 17));
    assert_eq!(summary.n_slots, 17);
    let thr = records.iter().map(|r| r.mean_rate()).sum::<f64>() / 17.0;
    let jain = records.iter().map(|r| r.jain).sum::<f64>() / 17.0;
    assert!((summary.per_user_avg_throughput - thr).abs() <= 1e-12 * thr);
    assert!((summary.avg_jain - jain).abs() <= 1e-12);
}

/// A decision for slot t must be reproducible from the slot t-1 snapshot and
/// the agent's own particles alone, whatever the other agents hold.
#[test]
fn decisions_ignore_same_slot_choices_of_others() {
    let c = cfg(12, 5, 2, 0.2, 11, 0);
    let mut engine = Engine::new(c.clone());
    for _ in 0..6 {
        engine.step();
    }
    let t = engine.slot();
    let avail = sample_availability(
        c.pu_busy_prob,
        c.n_bands,
        &mut engine.stream().rng_for(Module::PrimaryUser, 0, t),
    );
    let view = engine.neighbor_view(avail);

    let mut sentinel = engine.clone();
    for k in 1..c.n_users {
        let set = sentinel.particles_mut(k).unwrap();
        for p in &mut set.particles {
            *p = Particle {
                selection: vec![0, 1],
                weight: p.weight,
            };
        }
    }

    let mut own = engine.particles(0).cloned();
    let expected = agent_plan(0, &mut own, &view, engine.decision_context(), &c, engine.stream(), t);
    let real = engine.step();
    let perturbed = sentinel.step();
    assert_eq!(real.selections[0], expected.selection);
    assert_eq!(perturbed.selections[0], expected.selection);
    assert_eq!(perturbed.powers[0], expected.powers);
}

/// Frozen, well-separated bands: once found, the best band is kept for good.
#[test]
fn lone_agent_locks_onto_best_band_with_frozen_channel() {
    let c = validate(SystemConfig {
        n_users: 1,
        n_bands: 6,
        objective: ObjectiveKind::Intrinsic,
        doppler_coherence_product: 0.0,
        pu_busy_prob: 0.0,
        seed: 21,
        ..SystemConfig::default()
    })
    .unwrap();
    // SNRs 1, 8, 0.5, 3, 0.2, 2 at full power
    let snr = [1.0, 8.0, 0.5, 3.0, 0.2, 2.0];
    let h: Vec<Complex64> = snr
        .iter()
        .map(|s| Complex64::new((s * c.noise_band_w / c.p_total_w).sqrt(), 0.0))
        .collect();
    for seed in 1..=5u64 {
        let mut c = c.clone();
        c.set_seed(seed);
        let mut engine = Engine::new(c).with_channels(ChannelTensor::from_gains(1, 6, h.clone()));
        let picks: Vec<usize> = (0..500).map(|_| engine.step().selections[0][0]).collect();
        let first = picks.iter().position(|&b| b == 1).expect("never found the best band");
        assert!(first < 20, "seed {seed}: took {first} slots");
        assert!(picks[first..].iter().all(|&b| b == 1), "seed {seed} left the best band");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_and_availability_respected(
        n in 1usize..10,
        m in 1usize..6,
        ell_raw in 1usize..6,
        p in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let ell = ell_raw.min(m);
        let c = cfg(n, m, ell, p, seed, 30);
        let mut engine = Engine::new(c.clone());
        for _ in 0..30 {
            let rec = engine.step();
            let avail = engine.availability().clone();
            for i in 0..n {
                let sel = &rec.selections[i];
                prop_assert!(sel.len() <= ell);
                prop_assert!(sel.iter().all(|&j| avail.is_available(j)));
                let pw = &rec.powers[i];
                prop_assert_eq!(pw.len(), sel.len());
                prop_assert!(pw.iter().all(|&x| x >= 0.0 && x <= c.p_band_max_w * (1.0 + 1e-9)));
                prop_assert!(pw.iter().sum::<f64>() <= c.p_total_w * (1.0 + 1e-9));
                if sel.is_empty() {
                    prop_assert_eq!(rec.realized_rates[i], 0.0);
                }
            }
            prop_assert!(rec.jain >= 1.0 / n as f64 - 1e-12 && rec.jain <= 1.0 + 1e-12);
        }
    }
}
