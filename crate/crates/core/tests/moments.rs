use levywave_core::fields::{Coefficient, InitialDisplacement, InitialVelocity, Scenario};
use levywave_core::levy_measure::LevyMeasure;
use levywave_core::moments::{
    estimate_moments, fit_growth_rate, lyapunov_fit, student_t_975, weighted_norm, FitMode, MomentEstimate, MomentPlan,
};
use levywave_core::oracle_bounds::BoundConstants;
use levywave_core::prm::TruncationPolicy;
use levywave_core::solver::{GridGeometry, Scheme};
use statrs::distribution::{ContinuousCDF, StudentsT};

fn gamma11() -> LevyMeasure {
    LevyMeasure::gamma(1.0, 1.0).unwrap()
}

fn linear(a: f64) -> Scenario {
    Scenario::new(InitialDisplacement::Constant(a), InitialVelocity::Zero, Coefficient::Linear(1.0), Coefficient::Zero)
        .unwrap()
}

#[test]
fn power_means_are_ordered() {
    let g = GridGeometry::new(1.0, 0.5, 1.0 / 16.0).unwrap();
    let est =
        estimate_moments(&linear(1.0), &g, &gamma11(), &TruncationPolicy::default(), &[2.0, 3.0, 4.0, 6.0], 400, 5)
            .unwrap();
    for c in 0..est[0].mean().len() {
        let m2 = est[0].mean()[c];
        let m4 = est[2].mean()[c];
        assert!(m4.is_finite() && m4 >= m2 * m2 * (1.0 - 1e-12));
        let norms: Vec<f64> = est.iter().map(|e| e.mean()[c].powf(1.0 / e.p())).collect();
        for (k, w) in norms.windows(2).enumerate() {
            // delta-method stderr of m^{1/p}
            let (e0, e1) = (&est[k], &est[k + 1]);
            let se = |e: &MomentEstimate| e.stderr()[c] / e.p() * e.mean()[c].powf(1.0 / e.p() - 1.0);
            assert!(w[1] >= w[0] - 2.0 * (se(e0) + se(e1)), "cell {c}: {norms:?}");
        }
    }
    assert!(est.iter().all(|e| e.mean().iter().all(|&v| v >= 0.0)));
}

#[test]
fn stderr_shrinks_like_inverse_root_r() {
    let g = GridGeometry::new(0.5, 0.25, 1.0 / 16.0).unwrap();
    let run = |r: usize| {
        estimate_moments(&linear(1.0), &g, &gamma11(), &TruncationPolicy::default(), &[2.0], r, 6).unwrap().remove(0)
    };
    let (small, large) = (run(2000), run(4000));
    let last = g.time_steps();
    let mut ratios: Vec<f64> =
        (0..small.xs().len()).map(|i| small.stderr_at(last, i) / large.stderr_at(last, i)).collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2];
    let sqrt2 = 2f64.sqrt();
    assert!((median / sqrt2 - 1.0).abs() <= 0.25, "median ratio {median}");
}

#[test]
fn estimates_are_reproducible_and_scheme_independent() {
    let g = GridGeometry::new(0.5, 0.25, 1.0 / 16.0).unwrap();
    let s = Scenario::new(
        InitialDisplacement::Cosine { amplitude: 1.0, frequency: 1.0 },
        InitialVelocity::Zero,
        Coefficient::Affine { slope: 0.5, intercept: 1.0 },
        Coefficient::Constant(0.2),
    )
    .unwrap();
    let p = TruncationPolicy::default();
    let a = estimate_moments(&s, &g, &gamma11(), &p, &[2.0, 5.0], 64, 7).unwrap();
    let b = estimate_moments(&s, &g, &gamma11(), &p, &[2.0, 5.0], 64, 7).unwrap();
    assert_eq!(a, b);
    let plan = MomentPlan::new(&s, &g, &gamma11(), &p, &[2.0, 5.0], 64, 7).unwrap().with_scheme(Scheme::ConeSum);
    let blocks: Vec<_> = (0..plan.block_count()).rev().map(|k| plan.run_block(k).unwrap()).rev().collect();
    let c = plan.finish(&blocks).unwrap();
    for (x, y) in a.iter().zip(&c) {
        for (u, v) in x.mean().iter().zip(y.mean()) {
            assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }
}

#[test]
fn weighted_norm_of_the_homogeneous_field_is_k() {
    let g = GridGeometry::new(1.0, 0.5, 1.0 / 8.0).unwrap();
    let s =
        Scenario::new(InitialDisplacement::Constant(1.7), InitialVelocity::Zero, Coefficient::Zero, Coefficient::Zero)
            .unwrap();
    let est = estimate_moments(&s, &g, &gamma11(), &TruncationPolicy::default(), &[2.0, 4.0], 3, 1).unwrap();
    for e in &est {
        assert!((weighted_norm(e, 0.3) - s.initial_bound()).abs() < 1e-12);
    }
}

#[test]
fn weighted_norm_stays_below_l1() {
    let g = GridGeometry::new(1.0, 0.5, 1.0 / 16.0).unwrap();
    let s = linear(1.0);
    let m = gamma11();
    let c = BoundConstants::from_scenario(&s, &m, 1.0).unwrap();
    for p in [2.0, 4.0] {
        let e = estimate_moments(&s, &g, &m, &TruncationPolicy::default(), &[p], 1000, 8).unwrap().remove(0);
        let beta = c.beta(&m, p).unwrap();
        // add two stderr to every cell before taking the norm
        let bumped: Vec<f64> = e.mean().iter().zip(e.stderr()).map(|(m, s)| m + 2.0 * s).collect();
        let upper =
            MomentEstimate::new(p, e.times().to_vec(), e.xs().to_vec(), bumped, e.stderr().to_vec(), e.replicates())
                .unwrap();
        assert!(weighted_norm(&e, beta) <= c.l1());
        assert!(weighted_norm(&upper, beta) <= c.l1());
    }
}

#[test]
fn invalid_requests_fail_before_simulating() {
    let g = GridGeometry::new(0.5, 0.0, 0.125).unwrap();
    let p = TruncationPolicy::default();
    assert!(estimate_moments(&linear(1.0), &g, &gamma11(), &p, &[2.0], 1, 1).is_err());
    assert!(estimate_moments(&linear(1.0), &g, &gamma11(), &p, &[1.5], 10, 1).is_err());
    assert!(estimate_moments(&linear(1.0), &g, &gamma11(), &p, &[], 10, 1).unwrap().is_empty());
}

#[test]
fn t_quantiles_match_statrs() {
    for df in (1..=60).chain([75, 100, 250, 1000, 10_000]) {
        let exact = StudentsT::new(0.0, 1.0, df as f64).unwrap().inverse_cdf(0.975);
        assert!((student_t_975(df) - exact).abs() < 1e-6 * exact, "df {df}: {} vs {exact}", student_t_975(df));
    }
}

#[test]
fn growth_fits_on_synthetic_series() {
    let times: Vec<f64> = (0..=200).map(|j| j as f64 * 0.05).collect();
    let exp3: Vec<f64> = times.iter().map(|t| (3.0 * t).exp()).collect();
    let fit = fit_growth_rate(2.0, &times, &exp3, (0.0, 10.0)).unwrap();
    assert!((fit.slope - 3.0).abs() < 1e-9 && fit.intercept.abs() < 1e-9);
    let kappa = 0.8;
    let cosh: Vec<f64> = times.iter().map(|t| 4.0 * (kappa * t).cosh()).collect();
    let fit = fit_growth_rate(2.0, &times, &cosh, (5.0 / kappa, 10.0)).unwrap();
    assert!((fit.slope / kappa - 1.0).abs() < 0.01);
    assert!(fit.points >= 5);

    // the CI covers the true slope for noisy data
    let noisy: Vec<f64> = times
        .iter()
        .enumerate()
        .map(|(j, t)| (0.5 * t + 0.01 * ((j * 7919 % 101) as f64 / 101.0 - 0.5)).exp())
        .collect();
    let fit = fit_growth_rate(2.0, &times, &noisy, (2.0, 10.0)).unwrap();
    assert!((fit.slope - 0.5).abs() <= fit.ci_half_width);
}

#[test]
fn fit_modes_select_the_right_series() {
    let times = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    let xs = vec![-1.0, 0.0, 1.0];
    let mut mean = Vec::new();
    for t in &times {
        for (i, _) in xs.iter().enumerate() {
            mean.push(((1.0 + i as f64) * t).exp());
        }
    }
    let e = MomentEstimate::new(2.0, times.clone(), xs, mean, vec![0.0; 15], 2).unwrap();
    let window = Some((0.0, 1.0));
    assert!((lyapunov_fit(&e, window, FitMode::Inf).unwrap().slope - 1.0).abs() < 1e-12);
    assert!((lyapunov_fit(&e, window, FitMode::Sup).unwrap().slope - 3.0).abs() < 1e-12);
    assert!((lyapunov_fit(&e, window, FitMode::AtX(0.1)).unwrap().slope - 2.0).abs() < 1e-12);
    // default window is the last half of the horizon: only 3 grid times
    assert!(lyapunov_fit(&e, None, FitMode::Sup).is_err());
}
