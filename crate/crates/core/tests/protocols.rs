mod common;

use proptest::prelude::*;
use qudit_purify::gates::bell_00;
use qudit_purify::nonlinear_map::{apply_map, MapConfig};
use qudit_purify::purification::{
    convergence_radius, critical_fidelity, depolarize_to_werner, protocol_step, protocol_step_with, purify, purify_with,
    shift_covariance_deviation, twirl_fourier, werner, OutcomeAccounting, ProtocolKind, PurifyOptions, Trajectory,
    WernerSpec,
};
use qudit_purify::qlinalg::HilbertShape;
use qudit_purify::Error;

use common::{random_density, rng};

const TARGET: f64 = 1.0 - 1e-5;

/// Fidelity sequences from a grid of starting points above the measured radius.
fn trajectories(dim: usize, kind: ProtocolKind) -> Vec<Vec<f64>> {
    let radius = convergence_radius(dim, kind, TARGET, 500, 1e-4).unwrap();
    (0..10)
        .map(|i| {
            let f0 = radius + (1.0 - radius) * i as f64 / 10.0;
            let spec = WernerSpec::from_fidelity(dim, f0).unwrap();
            let mut fs = vec![f0];
            for item in Trajectory::new(spec, kind, OutcomeAccounting::AllDiagonal).take(40) {
                let f = item.unwrap().0.fidelity;
                fs.push(f);
                // stop once the fidelity is saturated at machine precision
                if f >= 1.0 - 1e-12 {
                    break;
                }
            }
            fs
        })
        .collect()
}

#[test]
fn baseline_fidelity_increases_above_the_radius() {
    for dim in 2..=9 {
        for fs in trajectories(dim, ProtocolKind::HorodeckiBaseline) {
            for w in fs.windows(2) {
                assert!(w[1] > w[0], "D={dim}: {} after {}", w[1], w[0]);
            }
        }
    }
}

#[test]
fn gxor_fidelity_increases_every_second_step() {
    for dim in 2..=9 {
        for fs in trajectories(dim, ProtocolKind::GxorTwirl) {
            for w in fs.windows(3) {
                assert!(w[2] >= w[0] - 1e-13, "D={dim}: {} two steps after {}", w[2], w[0]);
            }
        }
    }
}

#[test]
#[ignore = "the twirl protocol oscillates: e.g. D=2 from F=0.7 gives 0.9615 then 0.9518"]
fn gxor_fidelity_increases_every_step() {
    for dim in 2..=9 {
        for fs in trajectories(dim, ProtocolKind::GxorTwirl) {
            for w in fs.windows(2) {
                assert!(w[1] > w[0], "D={dim}: {} after {}", w[1], w[0]);
            }
        }
    }
}

#[test]
fn gxor_dips_at_qubit_dimension() {
    let spec = WernerSpec::from_fidelity(2, 0.7).unwrap();
    let fs: Vec<f64> = purify(spec, ProtocolKind::GxorTwirl, 1.0 - 1e-9, 500)
        .unwrap()
        .records
        .iter()
        .map(|r| r.fidelity)
        .collect();
    assert!((fs[3] - 0.9615331862231956).abs() < 1e-12);
    assert!((fs[4] - 0.9518359219041329).abs() < 1e-12);
}

#[test]
fn separable_werner_states_never_purify() {
    for dim in [2, 3, 4] {
        for kind in ProtocolKind::ALL {
            let spec = WernerSpec::from_fidelity(dim, critical_fidelity(dim) - 0.01).unwrap();
            let run = purify(spec, kind, 0.99, 200).unwrap();
            assert!(!run.converged, "D={dim} {kind}");
            assert_eq!(run.steps, 200);
        }
    }
}

#[test]
fn baseline_output_is_werner() {
    for dim in [2, 3, 6] {
        let mut state = werner(WernerSpec::from_fidelity(dim, 0.6).unwrap());
        for _ in 0..5 {
            let step = protocol_step(&state, ProtocolKind::HorodeckiBaseline).unwrap();
            let f = step.state.pure_fidelity(&bell_00(dim).unwrap()).unwrap();
            let reference = werner(WernerSpec::from_fidelity(dim, f).unwrap());
            assert!(step.state.max_abs_diff(&reference) < 1e-13);
            state = step.state;
        }
    }
}

#[test]
fn twirl_keeps_fidelity_and_shift_covariance() {
    for dim in [2, 3, 4] {
        let state = werner(WernerSpec::from_fidelity(dim, 0.55).unwrap());
        let mapped = apply_map(&state, &MapConfig::single(dim, vec![0, 0]).unwrap()).unwrap().output;
        let twirled = twirl_fourier(&mapped).unwrap();
        let bell = bell_00(dim).unwrap();
        assert!((twirled.pure_fidelity(&bell).unwrap() - mapped.pure_fidelity(&bell).unwrap()).abs() < 1e-13);
        assert!(shift_covariance_deviation(&twirled).unwrap() < 1e-13);
        let depolarized = depolarize_to_werner(&mapped).unwrap();
        assert!((depolarized.pure_fidelity(&bell).unwrap() - mapped.pure_fidelity(&bell).unwrap()).abs() < 1e-13);
    }
}

#[test]
fn all_diagonal_outcomes_agree() {
    let dim = 4;
    let state = werner(WernerSpec::from_fidelity(dim, 0.5).unwrap());
    let step = protocol_step(&state, ProtocolKind::GxorTwirl).unwrap();
    assert_eq!(step.outcome_probabilities.len(), dim);
    for p in &step.outcome_probabilities {
        assert!((p - step.outcome_probabilities[0]).abs() < 1e-14);
    }
    let total: f64 = step.outcome_probabilities.iter().sum();
    assert!((step.success_probability - total).abs() < 1e-14);
}

#[test]
fn single_outcome_accounting_only_touches_the_baseline() {
    let dim = 3;
    let state = werner(WernerSpec::from_fidelity(dim, 0.6).unwrap());
    let g_all = protocol_step_with(&state, ProtocolKind::GxorTwirl, OutcomeAccounting::AllDiagonal).unwrap();
    let g_one = protocol_step_with(&state, ProtocolKind::GxorTwirl, OutcomeAccounting::SingleOutcome).unwrap();
    assert_eq!(g_all.success_probability, g_one.success_probability);
    let h_all = protocol_step_with(&state, ProtocolKind::HorodeckiBaseline, OutcomeAccounting::AllDiagonal).unwrap();
    let h_one = protocol_step_with(&state, ProtocolKind::HorodeckiBaseline, OutcomeAccounting::SingleOutcome).unwrap();
    assert!((h_one.success_probability * dim as f64 - h_all.success_probability).abs() < 1e-14);
    assert_eq!(h_all.state, h_one.state);
}

#[test]
fn non_covariant_input_is_rejected() {
    let sigma = random_density(HilbertShape::qudits(3, 2).unwrap(), &mut rng(5));
    let err = protocol_step(&sigma, ProtocolKind::GxorTwirl).unwrap_err();
    assert!(matches!(err, Error::ShiftCovariance(_)));
}

#[test]
fn invalid_options_are_rejected() {
    let spec = WernerSpec::from_fidelity(3, 0.5).unwrap();
    for (target, steps) in [(0.0, 10), (1.5, 10), (0.9, 0)] {
        let opts = PurifyOptions::new(target, steps);
        assert!(purify_with(spec, ProtocolKind::GxorTwirl, &opts).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn efficiency_is_a_running_product(dim in 2usize..7, f in 0.3f64..0.99, gxor in any::<bool>()) {
        let kind = if gxor { ProtocolKind::GxorTwirl } else { ProtocolKind::HorodeckiBaseline };
        let spec = WernerSpec::from_fidelity(dim, f.max(critical_fidelity(dim))).unwrap();
        let mut product = 1.0;
        let mut previous = 1.0;
        for (n, item) in Trajectory::new(spec, kind, OutcomeAccounting::AllDiagonal).take(15).enumerate() {
            let (record, state) = item.unwrap();
            product *= record.success_probability;
            let expected = product / 2f64.powi(n as i32 + 1);
            prop_assert!((record.cumulative_efficiency - expected).abs() <= 1e-12 * expected);
            prop_assert!(record.cumulative_efficiency <= previous);
            prop_assert!(record.success_probability > 0.0 && record.success_probability <= 1.0 + 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&record.fidelity));
            prop_assert!((state.trace() - 1.0).abs() < 1e-10);
            previous = record.cumulative_efficiency;
        }
    }

    #[test]
    fn fidelity_round_trips_through_lambda(dim in 2usize..12, f in 0.0f64..=1.0) {
        let lo = 1.0 / (dim * dim) as f64;
        let f = lo + f * (1.0 - lo);
        let spec = WernerSpec::from_fidelity(dim, f).unwrap();
        prop_assert!((spec.fidelity() - f).abs() < 1e-12);
        let state = werner(spec);
        prop_assert!((state.pure_fidelity(&bell_00(dim).unwrap()).unwrap() - f).abs() < 1e-12);
    }
}
