use dmt_core::channel::{cut_mutual_info, project, sic_decompose};
use dmt_core::closed_form::{d_closed, d_mimo_2x2, r_star};
use dmt_core::curve::compute_curve;
use dmt_core::exponents::{in_outage, s_exponent};
use dmt_core::optimize::{
    d_blind_numeric, d_global_numeric, d_local_numeric, min_s_over_outage, InnerMode,
    OptimizerConfig,
};
use dmt_core::outage::{estimate_outage, McConfig, ScheduleRule};
use dmt_core::sampler::ChannelSampler;
use dmt_core::{NetworkParams, Schedule, Strategy};
use proptest::prelude::*;

fn p(eta: f64) -> NetworkParams {
    NetworkParams::new(eta).unwrap()
}

#[test]
fn frozen_closed_form_values() {
    let cases = [
        (1.0, 0.0, 3.0),
        (1.0, 0.5, 1.5),
        (2.0, 0.5, 2.5),
        (2.0, 1.25, 2.0 / 3.0),
        (1.5, 1.2, 1.5 - 1.0 / 0.8),
        (4.0, 1.0, 1.0),
        (4.0, 1.5, (8.0 - 6.0 - 1.0) / 2.5),
    ];
    for (eta, r, want) in cases {
        let got = d_closed(r, &p(eta)).unwrap();
        assert!((got - want).abs() < 1e-12, "eta={eta} r={r}: {got} vs {want}");
    }
    assert_eq!(d_mimo_2x2(1.5).unwrap(), 0.5);
    assert!(d_closed(-0.1, &p(2.0)).is_err());
    assert!(NetworkParams::new(0.99).is_err());
}

#[test]
fn global_curve_ends_at_the_maximum_gain() {
    let cfg = OptimizerConfig::default();
    for eta in [1.0, 3.0] {
        let params = p(eta);
        let curve = compute_curve(Strategy::Global, &params, 0.1, &cfg).unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!((last.r, last.d), (r_star(&params), 0.0));
        for w in curve.points.windows(2) {
            assert!(w[0].r < w[1].r);
            assert!(w[1].d <= w[0].d + 1e-9);
        }
    }
}

#[test]
fn outage_estimates_do_not_depend_on_workers() {
    let mut cfg = McConfig {
        eta: 2.0,
        r: 1.0,
        rule: ScheduleRule::Global,
        snr_db: vec![5.0, 15.0],
        samples_per_point: 20_000,
        seed: 3,
        workers: 1,
        cut_form: Default::default(),
    };
    let a = estimate_outage(&cfg).unwrap();
    cfg.workers = 3;
    let b = estimate_outage(&cfg).unwrap();
    assert_eq!(a, b);
    assert!(a[1].p_out < a[0].p_out);
}

#[test]
fn sampler_windows_are_position_independent() {
    let mut seq = ChannelSampler::new(9, 1, 0);
    let draws: Vec<_> = (0..5).map(|_| seq.draw()).collect();
    let mut jump = ChannelSampler::new(9, 1, 3);
    assert_eq!(jump.draw(), draws[3]);
    assert_eq!(jump.draw(), draws[4]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn grid_search_agrees_with_exact_solve(
        eta in 1.0f64..4.0,
        r in 0.05f64..1.9,
        f in 0.05f64..0.95,
    ) {
        let params = p(eta);
        let sched = Schedule::new(f).unwrap();
        let exact = OptimizerConfig::default();
        let grid = OptimizerConfig { mode: InnerMode::Grid, alpha_grid_step: 0.005, ..exact };
        let (de, we) = min_s_over_outage(r, sched, &params, &exact).unwrap();
        let (dg, _) = min_s_over_outage(r, sched, &params, &grid).unwrap();
        prop_assert!((de - dg).abs() <= 0.05, "exact {de} grid {dg}");
        prop_assert!(de <= dg + 1e-9);
        prop_assert!(in_outage(&we, sched, r + 1e-9));
        prop_assert!((s_exponent(&we, &params).unwrap() - de).abs() < 1e-9);
    }

    #[test]
    fn log_det_splits_into_parallel_channels(seed in any::<u64>(), db in -10.0f64..40.0) {
        let rho = 10f64.powf(db / 10.0);
        let draw = ChannelSampler::new(seed, 0, 0).draw();
        let (g1, g2) = sic_decompose(&draw, rho).unwrap();
        let split = (1.0 + rho * g1).ln() + (1.0 + rho * g2).ln();

        let [a, b] = draw.h_s;
        let [c, d] = draw.h_r;
        let m11 = 1.0 + rho * (a.norm_sqr() + c.norm_sqr());
        let m22 = 1.0 + rho * (b.norm_sqr() + d.norm_sqr());
        let m12 = rho * (a * b.conj() + c * d.conj());
        let direct = (m11 * m22 - m12.norm_sqr()).ln();
        prop_assert!((split - direct).abs() <= 1e-9 * direct.abs().max(1.0));

        let pr = project(&draw);
        let total = draw.h_r[0].norm_sqr() + draw.h_r[1].norm_sqr();
        prop_assert!((pr.par_sq + pr.perp_sq - total).abs() <= 1e-12 * total.max(1.0));
    }

    #[test]
    fn cut_rates_grow_with_snr(seed in any::<u64>(), f in 0.0f64..=1.0) {
        let draw = ChannelSampler::new(seed, 2, 0).draw();
        let (cs_lo, cd_lo) = cut_mutual_info(&draw, 10.0, 2.0, f).unwrap();
        let (cs_hi, cd_hi) = cut_mutual_info(&draw, 1000.0, 2.0, f).unwrap();
        prop_assert!(cs_lo >= 0.0 && cd_lo >= 0.0);
        prop_assert!(cs_hi >= cs_lo && cd_hi >= cd_lo);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn strategies_are_ordered(eta in 1.5f64..4.0, r in 1.0f64..1.5) {
        let cfg = OptimizerConfig { f_grid_step: 0.01, alpha_grid_step: 0.05, ..Default::default() };
        let params = p(eta);
        let r = r.min(r_star(&params));
        let b = d_blind_numeric(r, &params, &cfg).unwrap().d_value;
        let l = d_local_numeric(r, &params, &cfg).unwrap().d_value;
        let g = d_global_numeric(r, &params, &cfg).unwrap().d_value;
        prop_assert!(b <= l + 0.02, "blind {b} local {l}");
        prop_assert!(l <= g + 0.02, "local {l} global {g}");
    }
}
