use proptest::prelude::*;

use blockboot_core::harness::{mse_experiment, ExperimentConfig};
use blockboot_core::tuning::{self, b_max, b_min, beta1_cached, beta2_cached, beta2_residual, gamma0, GammaGConfig};
use blockboot_core::{
    block_stats, conditional_mean, enumerate_fstar, enumerate_t_star, kde, make_ebc_params, make_nbc_params,
    make_uns_params, DensityEvalPoint, KernelSpec, PreparedStatistic, ProcessModel, StationaryProcess,
};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn kernels() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![Just(KernelSpec::epanechnikov()), Just(KernelSpec::gaussian())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kde_shift_equivariant(
        xs in prop::collection::vec(-3.0f64..3.0, 5..60),
        x0 in -2.0f64..2.0,
        h in 0.2f64..2.0,
        c in -5.0f64..5.0,
        spec in kernels(),
    ) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let a = kde(&xs, DensityEvalPoint::new(x0, h).unwrap(), &spec).unwrap();
        let b = kde(&shifted, DensityEvalPoint::new(x0 + c, h).unwrap(), &spec).unwrap();
        prop_assert!(rel_close(a, b, 1e-12), "{a} vs {b}");
    }

    #[test]
    fn kde_scale_equivariant(
        xs in prop::collection::vec(-3.0f64..3.0, 5..60),
        x0 in -2.0f64..2.0,
        h in 0.2f64..2.0,
        s in prop_oneof![Just(0.5f64), Just(2.0), Just(4.0), Just(0.25)],
        spec in kernels(),
    ) {
        // power-of-two scales keep the arguments (x - x0)/h bit-identical
        let scaled: Vec<f64> = xs.iter().map(|x| s * x).collect();
        let a = kde(&xs, DensityEvalPoint::new(x0, h).unwrap(), &spec).unwrap();
        let b = kde(&scaled, DensityEvalPoint::new(s * x0, s * h).unwrap(), &spec).unwrap();
        prop_assert!(rel_close(a, s * b, 1e-12), "{a} vs {}", s * b);
    }

    #[test]
    fn kde_scale_equivariant_general(
        xs in prop::collection::vec(-3.0f64..3.0, 5..60),
        h in 0.2f64..2.0,
        s in 0.3f64..3.0,
    ) {
        // Gaussian kernel: smooth, so rounding in the arguments cannot cross a support edge
        let spec = KernelSpec::gaussian();
        let scaled: Vec<f64> = xs.iter().map(|x| s * x).collect();
        let a = kde(&xs, DensityEvalPoint::new(0.3, h).unwrap(), &spec).unwrap();
        let b = kde(&scaled, DensityEvalPoint::new(s * 0.3, s * h).unwrap(), &spec).unwrap();
        prop_assert!(rel_close(a, s * b, 1e-12), "{a} vs {}", s * b);
    }

    #[test]
    fn kde_nonnegative(xs in prop::collection::vec(-10.0f64..10.0, 1..80), x0 in -10.0f64..10.0, h in 0.01f64..5.0, spec in kernels()) {
        let v = kde(&xs, DensityEvalPoint::new(x0, h).unwrap(), &spec).unwrap();
        prop_assert!(v >= 0.0 && v.is_finite());
    }

    #[test]
    fn conditional_mean_identity(seed in 0u64..1000, n in 6usize..12, ell in 1usize..4, b in 1usize..4, k in 0.2f64..2.0) {
        prop_assume!(ell <= n);
        let x = ProcessModel::reference().simulate(n, seed).unwrap().into_values();
        let stats = block_stats(&x, ell, k, 0.5, &KernelSpec::epanechnikov()).unwrap();
        let law = enumerate_fstar(&stats, b).unwrap();
        prop_assert!(rel_close(law.mean(), conditional_mean(&stats), 1e-12));
        prop_assert!(rel_close(law.total_probability(), 1.0, 1e-12));
    }

    #[test]
    fn bootstrap_statistic_centres_on_shift(seed in 0u64..1000, k1 in 0.3f64..2.0, c2 in 0.5f64..3.0) {
        let x = ProcessModel::reference().simulate(8, seed).unwrap().into_values();
        let spec = KernelSpec::epanechnikov();
        for params in [
            make_uns_params(2, 2, k1).unwrap(),
            make_ebc_params(8, 0.9, 2, 2, k1, 0.5, c2).unwrap(),
            make_nbc_params(8, 0.9, 2, 2, 0.5).unwrap(),
        ] {
            let prepared = PreparedStatistic::new(&x, &params, 0.5, &spec).unwrap();
            let law = enumerate_t_star(&x, &params, 0.5, &spec).unwrap();
            prop_assert!((law.mean() - prepared.shift()).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma0_is_one_below_threshold(d in 3u32..200, frac in 0.0f64..1.0) {
        let d = d as f64;
        let beta = 2.0 + 1e-9 + frac * (d - 1.0 - 2.0 - 1e-9);
        prop_assert_eq!(gamma0(beta, d).unwrap(), 1.0);
    }

    #[test]
    fn gamma0_in_unit_interval(beta in 2.0001f64..500.0, d in 3u32..400) {
        let g = gamma0(beta, d as f64).unwrap();
        prop_assert!(g > 0.0 && g <= 1.0, "gamma0({beta}, {d}) = {g}");
    }

    #[test]
    fn practical_choice_identities(n in 100usize..1_000_000, b0 in 0.62f64..0.69, delta in 0.005f64..0.02) {
        let s = tuning::practical_choice_ebc(n, b0, delta).unwrap();
        let nf = n as f64;
        prop_assert!(rel_close(s.raw.b, nf.powf(b0), 1e-12));
        prop_assert!(rel_close(s.raw.ell * s.raw.k1, nf.powf(delta / 2.0), 1e-12));
        let total = if b0 >= 2.0 / 3.0 { nf } else { nf.powf(1.5 * b0) };
        prop_assert!(rel_close(s.raw.b * s.raw.ell, total, 1e-12));
        prop_assert!(s.b >= 1 && s.ell >= 1 && s.k1 > 0.0);
    }

    #[test]
    fn ebc_expo_identities(n in 8usize..10_000_000, a in 0.1f64..3.0) {
        let s = tuning::ebc_optimal_expo(n, a).unwrap();
        let nf = n as f64;
        let l_n = nf.ln().powf(-a);
        prop_assert!(rel_close(s.k1 * s.raw.ell * l_n.sqrt(), 1.0, 1e-12));
        prop_assert!(rel_close(s.raw.ell, nf.cbrt() * nf.ln().powf(2.0 / 3.0) * l_n.sqrt(), 1e-12));
        prop_assert!(s.b * s.ell >= n && s.b * s.ell < n + s.ell);
    }

    #[test]
    fn uns_expo_identities(n in 8usize..10_000_000, a in 0.1f64..3.0) {
        let s = match tuning::uns_optimal_expo(n, a) {
            Ok(s) => s,
            // ℓ grows like (ln n)^(2a + 2/3) and can exceed n for large a
            Err(e) => {
                prop_assert!(e.is_infeasible(), "{e}");
                return Ok(());
            }
        };
        let nf = n as f64;
        let l_n = nf.ln().powf(-a);
        prop_assert!(rel_close(s.k1 * s.raw.ell * l_n.powi(3), 1.0, 1e-12));
        prop_assert!(rel_close(s.k1 * nf.cbrt() * nf.ln().powf(2.0 / 3.0) * l_n, 1.0, 1e-12));
    }

    #[test]
    fn uns_poly_identity(beta in prop_oneof![2.05f64..2.2, 2.3f64..4.0, 4.1f64..6.0, 6.1f64..100.0], n in 100usize..1_000_000, dp in 0.001f64..0.05) {
        let cfg = GammaGConfig::default();
        let s = tuning::uns_optimal_poly(beta, n, dp, &cfg).unwrap();
        prop_assert!(rel_close(s.raw.ell * s.k1.powf(1.0 + dp), 1.0, 1e-12));
        prop_assert!(rel_close(s.raw.b * s.raw.ell, n as f64, 1e-12));
    }

    #[test]
    fn ebc_poly_case_ii_identities(beta in 2.3f64..100.0, n in 1000usize..1_000_000, delta in 0.005f64..0.02, t in 0.0f64..1.0) {
        let cfg = GammaGConfig::default();
        let nf = n as f64;
        let lo = nf.powf(b_min(beta, &cfg).unwrap() + 2.0 * delta);
        let hi = nf.powf(b_max(beta).unwrap() - delta);
        prop_assume!(hi.floor() >= lo.ceil());
        let b = (lo.ceil() + t * (hi.floor() - lo.ceil())).round() as usize;
        let s = tuning::ebc_optimal_poly(beta, n, b, delta, &cfg).unwrap();
        let bf = b as f64;
        prop_assert!(rel_close(s.raw.ell, bf.sqrt().min(nf / bf), 1e-12));
        prop_assert!(rel_close(s.k1 * s.raw.ell, nf.powf(delta / 4.0), 1e-12));
    }

    #[test]
    fn nbc_poly_case_i_identity(n in 1000usize..1_000_000, eps in 0.005f64..0.05, hexp in 0.36f64..0.45) {
        let cfg = GammaGConfig::default();
        let nf = n as f64;
        let h = nf.powf(-hexp);
        if let Ok(s) = tuning::nbc_optimal_poly(10.0, n, h, 0.02, eps, 0.5, &cfg) {
            prop_assert_eq!(s.exponents_used.case.as_deref(), Some("i"));
            let lhs = s.raw.b * s.raw.ell * (nf * h.powi(5)).powf(1.5);
            prop_assert!(rel_close(lhs, nf.powf(eps), 1e-12), "{lhs} vs {}", nf.powf(eps));
        }
    }
}

#[test]
fn b_window_nonempty_on_dense_grid() {
    let cfg = GammaGConfig::default();
    let grid = blockboot_core::harness::log_grid(2.0 + 1e-4, 1e3, 10_000);
    for beta in grid {
        let lo = b_min(beta, &cfg).unwrap();
        let hi = b_max(beta).unwrap();
        assert!(lo < hi, "beta = {beta}: b_min {lo} >= b_max {hi}");
    }
}

#[test]
fn beta2_is_the_largest_root() {
    let cfg = GammaGConfig::default();
    let b2 = beta2_cached(&cfg).unwrap();
    let sign = beta2_residual(b2 + 1e-3, &cfg).unwrap().signum();
    let mut beta = b2 + 1e-3;
    while beta <= 50.0 {
        let r = beta2_residual(beta, &cfg).unwrap();
        assert_eq!(r.signum(), sign, "sign change near beta = {beta}");
        beta += 1e-3;
    }
    assert!(beta2_residual(b2, &cfg).unwrap().abs() < 1e-5);
    assert!(tuning::beta1_residual(beta1_cached(&cfg).unwrap(), &cfg).unwrap().abs() < 1e-5);
}

#[test]
fn mse_report_is_worker_independent() {
    let cfg = ExperimentConfig::from_json_str(
        r#"{"n": 80, "h": 1.2, "grid_bl": [[4, 2], [1, 6]], "k1_grid": [0.4, 0.9, 1.6], "c2_grid": [0.8, 2.0],
            "B": 300, "R": 40, "oracle_R": 3000, "master_seed": 17}"#,
    )
    .unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let report = pool.install(|| mse_experiment(&cfg)).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        report.write_grid_csv(&mut buf).unwrap();
        buf
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(5));
}
