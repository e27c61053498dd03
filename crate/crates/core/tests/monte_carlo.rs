use htmr_lab::harness::{sweep_monte_carlo, Grid, PfmbMode, SweepConfig};
use htmr_lab::network::{
    build_network, run_trials, run_trials_seeded, LeafConfig, ReferenceStream,
};
use htmr_lab::reliability::{pe_first, pe_order, pem_first};
use htmr_lab::{Executor, ModuleKind, Probability, RandomSource, TmrOrder};

fn p(v: f64) -> Probability {
    Probability::new(v).unwrap()
}

fn order(j: u32) -> TmrOrder {
    TmrOrder::new(j).unwrap()
}

#[test]
fn any_single_faulty_leaf_is_masked() {
    for rate in [0.1, 0.5, 0.9, 1.0] {
        for pos in 0..3 {
            let mut leaves = vec![ModuleKind::FaultFree; 3];
            leaves[pos] = ModuleKind::Faulty(p(rate));
            let net = build_network(order(1), LeafConfig::PerLeaf(leaves), p(0.0)).unwrap();
            let mut rng = RandomSource::new(pos as u64);
            let (est, counter) =
                run_trials(&net, 100_000, ReferenceStream::Alternating, &mut rng).unwrap();
            assert_eq!(est.errors, 0, "rate {rate} pos {pos}");
            if rate == 1.0 {
                assert_eq!(counter.alarms[0], 100_000);
            }
        }
    }
}

#[test]
fn empirical_tracks_closed_form_across_grid() {
    let cfg = SweepConfig {
        grid: Grid::Linear {
            min: 0.0,
            max: 1.0,
            steps: 11,
        },
        orders: vec![order(0), order(1), order(2)],
        trials: 50_000,
        seed: 2024,
        ..SweepConfig::default()
    };
    for row in sweep_monte_carlo(&cfg, &Executor::parallel(0)).unwrap() {
        for c in &row.orders {
            let expected = pe_order(c.order, row.pf).value();
            let est = c.empirical.unwrap();
            assert!(
                est.agrees_with(expected, 4.0),
                "pf {} order {}: {} vs {}",
                row.pf,
                c.order,
                est.pe_hat,
                expected
            );
        }
    }
}

#[test]
fn voter_faults_follow_mixture_at_order_one() {
    for (pf, pfmb) in [(0.1, 0.1), (0.3, 0.5), (0.05, 0.2)] {
        let net = build_network(order(1), LeafConfig::Uniform(p(pf)), p(pfmb)).unwrap();
        let (est, _) = run_trials_seeded(
            &net,
            400_000,
            ReferenceStream::Alternating,
            17,
            &Executor::parallel(0),
        )
        .unwrap();
        let expected = pem_first(p(pf), p(pfmb)).value();
        assert!(est.agrees_with(expected, 4.0), "{pf},{pfmb}: {}", est.pe_hat);
    }
}

#[test]
fn structural_order2_with_voter_faults_matches_exact_tree_probability() {
    let net = build_network(order(2), LeafConfig::Uniform(p(0.1)), p(0.1)).unwrap();
    let (est, _) = run_trials_seeded(
        &net,
        400_000,
        ReferenceStream::Alternating,
        99,
        &Executor::parallel(0),
    )
    .unwrap();
    assert!(est.agrees_with(net.exact_error_probability().value(), 4.0));
}

#[test]
fn alarms_silent_without_faults() {
    let net = build_network(order(3), LeafConfig::Uniform(p(0.0)), p(0.0)).unwrap();
    let (est, counter) =
        run_trials_seeded(&net, 50_000, ReferenceStream::Alternating, 1, &Executor::sequential())
            .unwrap();
    assert_eq!(est.errors, 0);
    assert_eq!(counter.alarmed_trials, 0);
    assert!(counter.alarms.iter().all(|&a| a == 0));
}

#[test]
fn alarm_fires_whenever_any_voter_disagrees() {
    // With a single voter the aggregate alarm rate equals the probability
    // that the three modules do not all agree: 1 - pf^3 - (1 - pf)^3.
    let pf = 0.2f64;
    let n = 400_000;
    let net = build_network(order(1), LeafConfig::Uniform(p(pf)), p(0.0)).unwrap();
    let (_, counter) =
        run_trials_seeded(&net, n, ReferenceStream::Alternating, 8, &Executor::parallel(0))
            .unwrap();
    let expected = 1.0 - pf.powi(3) - (1.0 - pf).powi(3);
    let freq = counter.alarmed_trials as f64 / n as f64;
    let se = (expected * (1.0 - expected) / n as f64).sqrt();
    assert!((freq - expected).abs() <= 4.0 * se);
    assert_eq!(counter.alarmed_trials, counter.alarms[0]);
}

#[test]
fn payload_does_not_change_error_statistics() {
    let net = build_network(order(2), LeafConfig::Uniform(p(0.2)), p(0.0)).unwrap();
    let expected = pe_order(order(2), p(0.2)).value();
    for reference in [
        ReferenceStream::Constant(false),
        ReferenceStream::Constant(true),
        ReferenceStream::Alternating,
    ] {
        let (est, _) =
            run_trials_seeded(&net, 200_000, reference, 5, &Executor::parallel(0)).unwrap();
        assert!(est.agrees_with(expected, 4.0), "{reference:?}");
    }
}

#[test]
fn results_independent_of_worker_count() {
    let cfg = SweepConfig {
        grid: Grid::Linear {
            min: 0.0,
            max: 1.0,
            steps: 9,
        },
        orders: vec![order(0), order(1), order(2)],
        pfmb: PfmbMode::EqualToPf,
        trials: 40_000,
        seed: 77,
        ..SweepConfig::default()
    };
    let base = sweep_monte_carlo(&cfg, &Executor::sequential()).unwrap();
    for workers in [2, 3, 8] {
        assert_eq!(sweep_monte_carlo(&cfg, &Executor::parallel(workers)).unwrap(), base);
    }
    let other_seed = sweep_monte_carlo(&SweepConfig { seed: 78, ..cfg }, &Executor::sequential())
        .unwrap();
    assert_ne!(other_seed, base);
}

#[test]
fn pe_first_is_what_a_single_stage_produces() {
    let mut rng = RandomSource::new(123);
    let net = build_network(order(1), LeafConfig::Uniform(p(0.3)), p(0.0)).unwrap();
    let (est, _) = run_trials(&net, 200_000, ReferenceStream::Alternating, &mut rng).unwrap();
    assert!(est.agrees_with(pe_first(p(0.3)).value(), 4.0));
}
