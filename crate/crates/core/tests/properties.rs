use fdhap::analysis::{
    downlink_rate_integral, downlink_rate_lower_bound, uplink_rate_integral, uplink_rate_lower_bound,
    uplink_rate_lower_bound_icsi, QuadratureConfig, RateBoundInputs,
};
use fdhap::beamforming::{downlink_sinr, evaluate, harvested_powers, mrt_baseline, uplink_sinr, SensorPowers};
use fdhap::estimation::design_training;
use fdhap::linalg::{frob_sqr, CMat};
use fdhap::model::{draw_channels, PathLossProfile, RngStream, SystemParams};
use fdhap::montecarlo::{mc_rates, TrialPlan};
use fdhap::optimizer::{build_sdr_problem, optimize, ConstraintForm, OptimizeOptions};
use fdhap::quadrature::integrate;
use num_complex::Complex64;
use proptest::prelude::*;

fn system() -> impl Strategy<Value = SystemParams> {
    (1usize..6, 1usize..10, 1usize..4, 1usize..4, 0.0f64..30.0, 0.05f64..0.95).prop_map(|(nt, nr, ku, kd, pdb, a)| {
        SystemParams {
            n_tx: nt,
            n_rx: nr,
            k_ul: ku,
            k_dl: kd,
            tau: nt + kd,
            p_ap: 10f64.powf(pdb / 10.0),
            alpha: a,
            ..SystemParams::default()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sinrs_are_finite_and_nonnegative(p in system(), seed in any::<u64>()) {
        let l = PathLossProfile::unit(&p);
        let ch = draw_channels(&p, &l, RngStream::new(seed, 0)).unwrap();
        let r = evaluate(&ch, &mrt_baseline(&ch).unwrap(), &p);
        for s in r.uplink.iter().chain(&r.downlink) {
            prop_assert!(s.is_finite() && *s >= 0.0);
        }
    }

    #[test]
    fn harvested_power_is_linear_in_power_and_kappa(p in system(), seed in any::<u64>()) {
        let l = PathLossProfile::unit(&p);
        let ch = draw_channels(&p, &l, RngStream::new(seed, 0)).unwrap();
        let w = mrt_baseline(&ch).unwrap().w_e;
        let base = harvested_powers(&ch, &w, &p);
        let doubled = harvested_powers(&ch, &w, &SystemParams { p_ap: 2.0 * p.p_ap, ..p.clone() });
        let k2 = fdhap::beamforming::harvested_powers_with(&ch, &w, 2.0 * p.kappa(), p.p_ap);
        for ((a, b), c) in base.p_ul.iter().zip(&doubled.p_ul).zip(&k2.p_ul) {
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * b.abs().max(1.0));
            prop_assert!((c - 2.0 * a).abs() <= 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn uplink_sinr_ignores_combiner_scaling(p in system(), seed in any::<u64>(), re in -3.0f64..3.0, im in 0.1f64..3.0) {
        let l = PathLossProfile::unit(&p);
        let ch = draw_channels(&p, &l, RngStream::new(seed, 0)).unwrap();
        let beams = mrt_baseline(&ch).unwrap();
        let pw = harvested_powers(&ch, &beams.w_e, &p);
        let a = uplink_sinr(&ch, &beams, &pw, &p);
        let mut scaled = beams.clone();
        let c = Complex64::new(re, im);
        scaled.w_r.column_mut(0).scale_mut(c.norm());
        scaled.w_r.column_mut(0).iter_mut().for_each(|z| *z *= c / c.norm());
        let b = uplink_sinr(&ch, &scaled, &pw, &p);
        prop_assert!((a[0] - b[0]).abs() <= 1e-9 * a[0].max(1e-12));
    }

    #[test]
    fn downlink_sinr_decreases_in_sensor_power(p in system(), seed in any::<u64>(), which in 0usize..3, extra in 0.1f64..10.0) {
        let l = PathLossProfile::unit(&p);
        let ch = draw_channels(&p, &l, RngStream::new(seed, 0)).unwrap();
        let beams = mrt_baseline(&ch).unwrap();
        let pw = harvested_powers(&ch, &beams.w_e, &p);
        let mut more = pw.p_ul.clone();
        more[which % p.k_ul] += extra;
        let a = downlink_sinr(&ch, &beams, &pw, &p);
        let b = downlink_sinr(&ch, &beams, &SensorPowers { p_ul: more, kappa: pw.kappa }, &p);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(y <= x);
        }
    }

    #[test]
    fn training_design_is_deterministic(nt in 1usize..6, kd in 1usize..5, extra in 0usize..4) {
        let p = SystemParams { n_tx: nt, k_dl: kd, tau: nt + kd + extra, ..SystemParams::default() };
        let a = design_training(&p).unwrap();
        let b = design_training(&p).unwrap();
        prop_assert_eq!(a.pilots, b.pilots);
        prop_assert_eq!(a.energy_seq, b.energy_seq);
    }

    #[test]
    fn quadrature_is_exact_on_cubics(c in proptest::array::uniform4(-5.0f64..5.0), a in -3.0f64..0.0, w in 0.1f64..4.0) {
        let b = a + w;
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let anti = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
        let r = integrate(f, a, b, 1e-13, 1e-13, 5).unwrap();
        prop_assert!((r.value - (anti(b) - anti(a))).abs() < 1e-10);
    }
}

fn bound_inputs() -> impl Strategy<Value = RateBoundInputs> {
    (2usize..200, 2usize..200, 0.0f64..30.0, 0.05f64..0.95, 1usize..10).prop_map(|(nt, nr, pdb, a, extra)| {
        let p = SystemParams {
            n_tx: nt,
            n_rx: nr,
            tau: nt + 5 + extra,
            p_ap: 10f64.powf(pdb / 10.0),
            alpha: a,
            ..SystemParams::default()
        };
        let l = PathLossProfile::unit(&p);
        RateBoundInputs::new(p, l)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimated_csi_bound_is_at_least_perfect(inp in bound_inputs()) {
        prop_assert!(uplink_rate_lower_bound_icsi(&inp, 0).unwrap() >= uplink_rate_lower_bound(&inp, 0).unwrap());
    }

    #[test]
    fn rates_grow_with_own_path_loss(inp in bound_inputs(), factor in 1.0f64..4.0) {
        let mut up = inp.clone();
        up.losses.beta_ap_ul[0] *= factor;
        up.losses.beta_ap_dl[0] *= factor;
        let q = QuadratureConfig::default();
        prop_assert!(uplink_rate_lower_bound(&up, 0).unwrap() >= uplink_rate_lower_bound(&inp, 0).unwrap() - 1e-12);
        prop_assert!(downlink_rate_lower_bound(&up, 0).unwrap() >= downlink_rate_lower_bound(&inp, 0).unwrap() - 1e-12);
        prop_assert!(uplink_rate_integral(&up, 0, &q).unwrap() >= uplink_rate_integral(&inp, 0, &q).unwrap() - 1e-9);
        prop_assert!(downlink_rate_integral(&up, 0, &q).unwrap() >= downlink_rate_integral(&inp, 0, &q).unwrap() - 1e-9);
    }

    #[test]
    fn integrals_survive_cutoff_halving(inp in bound_inputs()) {
        let q = QuadratureConfig::default();
        let h = QuadratureConfig { small_z_cutoff: q.small_z_cutoff / 2.0, ..q };
        let (a, b) = (uplink_rate_integral(&inp, 1, &q).unwrap(), uplink_rate_integral(&inp, 1, &h).unwrap());
        prop_assert!((a - b).abs() <= 1e-3 * a);
        let (a, b) = (downlink_rate_integral(&inp, 1, &q).unwrap(), downlink_rate_integral(&inp, 1, &h).unwrap());
        prop_assert!((a - b).abs() <= 1e-3 * a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn optimizer_is_invariant_to_common_power_scaling(seed in 0u64..1000, db in -10.0f64..10.0) {
        let p = SystemParams { n_tx: 3, n_rx: 6, k_ul: 2, k_dl: 2, tau: 5, ..SystemParams::default() };
        let l = PathLossProfile::unit(&p);
        let ch = draw_channels(&p, &l, RngStream::new(seed, 0)).unwrap();
        let c = 10f64.powf(db / 10.0);
        let q = SystemParams { p_ap: c * p.p_ap, p_dl: c * p.p_dl, sigma_n2: c * p.sigma_n2, ..p.clone() };
        let grid = [0.3, 0.6];
        let o = OptimizeOptions::default();
        let a = optimize(&ch, &l, None, &p, &grid, 1.0, &o, RngStream::new(seed, 1)).unwrap();
        let b = optimize(&ch, &l, None, &q, &grid, 1.0, &o, RngStream::new(seed, 1)).unwrap();
        prop_assert_eq!(a.alpha_star.to_bits(), b.alpha_star.to_bits());
        prop_assert!((a.sdr_dl_sum_rate - b.sdr_dl_sum_rate).abs() < 1e-6 * a.sdr_dl_sum_rate.max(1.0));
        // the objective itself is scale free for any fixed beamformer
        let w = CMat::from_fn(3, 2, |i, j| Complex64::new((i + 2 * j) as f64, 1.0));
        let w = w.unscale((frob_sqr(&w) / 2.0).sqrt());
        let pa = build_sdr_problem(&ch, &l, None, &p, 0.4, ConstraintForm::AsPrinted).unwrap().evaluate_beam(&w);
        let pb = build_sdr_problem(&ch, &l, None, &q, 0.4, ConstraintForm::AsPrinted).unwrap().evaluate_beam(&w);
        prop_assert!((pa.0 - pb.0).abs() < 1e-10 * pa.0.max(1.0) && (pa.1 - pb.1).abs() < 1e-10 * pa.1.max(1.0));
    }

    #[test]
    fn recovered_objective_never_exceeds_relaxation(seed in 0u64..1000, floor in 0.0f64..2.0) {
        let p = SystemParams { n_tx: 4, n_rx: 8, k_ul: 2, k_dl: 3, tau: 7, ..SystemParams::default() };
        let l = PathLossProfile::unit(&p);
        let ch = draw_channels(&p, &l, RngStream::new(seed, 0)).unwrap();
        let r = optimize(&ch, &l, None, &p, &[0.25, 0.5, 0.75], floor, &OptimizeOptions::default(), RngStream::new(seed, 1)).unwrap();
        for d in r.per_alpha.iter().filter(|d| d.status.is_some()) {
            prop_assert!(d.dl_sum_rate <= d.sdr_dl_sum_rate + 1e-6);
        }
        if r.alpha_star.is_finite() {
            prop_assert!((frob_sqr(&r.w_e) - 2.0).abs() < 1e-6);
            prop_assert!(r.ul_sum_rate >= floor - 1e-6);
        }
    }

    #[test]
    fn monte_carlo_is_reproducible_and_sums_consistently(seed in any::<u64>()) {
        let p = SystemParams { n_tx: 6, n_rx: 12, k_ul: 3, k_dl: 2, tau: 8, ..SystemParams::default() };
        let plan = TrialPlan::new(p.clone(), PathLossProfile::unit(&p), 200, seed);
        let a = mc_rates(&plan).unwrap();
        let b = mc_rates(&plan).unwrap();
        prop_assert_eq!(a.uplink_sum.mean.to_bits(), b.uplink_sum.mean.to_bits());
        prop_assert_eq!(a.downlink_sum.std_error.to_bits(), b.downlink_sum.std_error.to_bits());
        let per: f64 = a.uplink.iter().map(|r| r.mean).sum();
        prop_assert!((per - a.uplink_sum.mean).abs() < 1e-12 * per.max(1.0));
    }
}
