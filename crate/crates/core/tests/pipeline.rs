use htlob::analytics::{duration_tail_index, prob_up_closed};
use htlob::diffusion::{exit_side_mc, DiffusionParams, HitConfig};
use htlob::estimation::{estimate_all, EstimateOptions, FlowSample};
use htlob::flow::{FlowSpec, PoissonFlowSpec};
use htlob::io::{read_events, write_events};
use htlob::lob::{replay, BookState, DepthSampler, ReinitRule};
use htlob::rng;
use proptest::prelude::*;

fn poisson() -> FlowSpec {
    FlowSpec::Poisson(PoissonFlowSpec { lambda_limit: 3.0, mu_market: 1.5, theta_cancel: 1.5, unit_size: 1.0 })
}

#[test]
fn csv_round_trip_preserves_replay() {
    let events = poisson().generate(500.0, 3).unwrap();
    let mut buf = Vec::new();
    write_events(&mut buf, &events).unwrap();
    let back = read_events(buf.as_slice()).unwrap();
    assert_eq!(back, events);

    let book = BookState::new(0, 0.01, 4.0, 4.0).unwrap();
    let rule = ReinitRule::iid(DepthSampler::Exponential { mean: [4.0, 4.0] }, DepthSampler::Exponential { mean: [4.0, 4.0] })
        .unwrap();
    let a = replay(&events, &book, &rule, &mut rng::from_seed(9)).unwrap();
    let b = replay(&back, &book, &rule, &mut rng::from_seed(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn estimates_match_flow_moments() {
    let spec = poisson();
    let events = spec.generate(20_000.0, 17).unwrap();
    let est = estimate_all(&FlowSample::from_events(&events).unwrap(), &EstimateOptions::default()).unwrap();
    let m = spec.moments().unwrap();
    for (got, want) in [(est.lambda_b.value, m.rate[0]), (est.lambda_a.value, m.rate[1])] {
        assert!((got - want).abs() < 0.03 * want, "{got} vs {want}");
    }
    // p_limit = 1/2: zero mean size, unit per-event variance
    assert!(est.vbar_b.value.abs() < 0.02);
    assert!((est.v2_b.value - 1.0).abs() < 0.03);
    assert!(est.rho.value.abs() < 0.05);
}

#[test]
fn closed_form_agrees_with_engine_under_unequal_scales() {
    let p = DiffusionParams { lambda_bid: 2.0, lambda_ask: 0.5, vbar_bid: 0.0, vbar_ask: 0.0, v2_bid: 1.0, v2_ask: 3.0, rho: -0.3 };
    let d = p.dynamics();
    let mc = exit_side_mc(&d, [1.0, 2.0], 200_000, &HitConfig::default(), 5).unwrap();
    let exact = prob_up_closed(1.0, 2.0, &d).unwrap();
    assert!((mc.p_up - exact).abs() < 4.0 * mc.std_error, "{} vs {exact}", mc.p_up);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tail_index_ignores_scales(s1 in 0.1f64..10.0, s2 in 0.1f64..10.0, rho in -0.95f64..0.95) {
        let a = DiffusionParams { lambda_bid: 1.0, lambda_ask: 1.0, vbar_bid: 0.0, vbar_ask: 0.0, v2_bid: s1, v2_ask: s2, rho };
        let b = DiffusionParams { v2_bid: 1.0, v2_ask: 1.0, ..a };
        prop_assert!((duration_tail_index(a.dynamics()) - duration_tail_index(b.dynamics())).abs() < 1e-12);
    }

    #[test]
    fn replay_never_leaves_the_orthant(seed in any::<u64>(), q0 in 0.1f64..5.0) {
        let events = poisson().generate(100.0, seed).unwrap();
        let book = BookState::new(0, 0.01, q0, q0).unwrap();
        let rule = ReinitRule::iid(DepthSampler::Fixed { bid: 1.0, ask: 2.0 }, DepthSampler::Fixed { bid: 2.0, ask: 1.0 }).unwrap();
        let (path, prices) = replay(&events, &book, &rule, &mut rng::from_seed(seed)).unwrap();
        prop_assert!(path.samples.iter().all(|s| s.q_bid > 0.0 && s.q_ask > 0.0));
        prop_assert_eq!(path.jumps.len(), prices.changes.len());
    }
}
