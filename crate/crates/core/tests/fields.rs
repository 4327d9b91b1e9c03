use levywave_core::fields::{kernel_g, Coefficient, InitialDisplacement, InitialVelocity, Scenario, Table};
use levywave_core::quadrature::{integrate, Tolerance};
use proptest::prelude::*;

#[test]
fn kernel_values() {
    assert_eq!(kernel_g(1.0, 0.5), 0.5);
    assert_eq!(kernel_g(1.0, 1.5), 0.0);
    assert_eq!(kernel_g(2.0, -2.0), 0.5);
    assert_eq!(kernel_g(0.0, 0.0), 0.5);
}

#[test]
fn kernel_power_integrals() {
    let tol = Tolerance::default();
    for t in [0.3, 1.0, 2.5] {
        // split at the jumps of G so the quadrature sees smooth pieces
        let total = |f: &dyn Fn(f64) -> f64| integrate(f, -t, t, tol).unwrap().value;
        assert!((total(&|y| kernel_g(t, y)) - t).abs() < 1e-12);
        for p in [2.0, 3.0, 4.0] {
            let v = total(&|y: f64| kernel_g(t, y).powf(p));
            assert!((v - 2f64.powf(1.0 - p) * t).abs() < 1e-12, "p={p}, t={t}");
        }
    }
}

#[test]
fn midpoint_sums_of_the_kernel_converge_linearly() {
    let t = 0.73;
    for n in [10usize, 40, 160, 640] {
        let dx = 4.0 / n as f64;
        let sum: f64 = (0..n).map(|i| kernel_g(t, -2.0 + (i as f64 + 0.5) * dx) * dx).sum();
        assert!((sum - t).abs() <= dx, "n={n}: {sum}");
    }
}

#[test]
fn homogeneous_wave_examples() {
    let s =
        Scenario::new(InitialDisplacement::Constant(3.0), InitialVelocity::Zero, Coefficient::Zero, Coefficient::Zero)
            .unwrap();
    assert_eq!(s.initial_wave(2.0, -7.0), 3.0);
    let s = Scenario::new(
        InitialDisplacement::Constant(0.0),
        InitialVelocity::Indicator { left: -1.0, right: 1.0 },
        Coefficient::Zero,
        Coefficient::Zero,
    )
    .unwrap();
    assert_eq!(s.initial_wave(1.0, 0.0), 1.0);
    assert_eq!(s.initial_wave(0.5, 2.0), 0.0);
    assert_eq!(s.initial_bound(), 1.0);
    let s = Scenario::new(
        InitialDisplacement::Cosine { amplitude: 1.0, frequency: 1.0 },
        InitialVelocity::Zero,
        Coefficient::Zero,
        Coefficient::Zero,
    )
    .unwrap();
    assert!(s.initial_wave(std::f64::consts::FRAC_PI_2, 0.0).abs() < 1e-15);
}

#[test]
fn tabulated_velocity_integrates_exactly() {
    let v1 = Table::new(vec![-1.0, 0.0, 1.0], vec![0.0, 2.0, 0.0]).unwrap();
    let s = Scenario::new(
        InitialDisplacement::Constant(0.0),
        InitialVelocity::Tabulated(v1),
        Coefficient::Zero,
        Coefficient::Zero,
    )
    .unwrap();
    // half the area of the hat
    assert!((s.initial_wave(5.0, 0.0) - 1.0).abs() < 1e-15);
    // ½∫_{-0.5}^{0.5} hat = ½·1.5
    assert!((s.initial_wave(0.5, 0.0) - 0.75).abs() < 1e-15);
    assert_eq!(s.initial_bound(), 1.0);
}

#[test]
fn coefficient_examples() {
    assert_eq!(Coefficient::Linear(2.0).eval(3.0), 6.0);
    assert_eq!(Coefficient::Zero.eval(-11.0), 0.0);
    assert_eq!(Coefficient::Affine { slope: 1.0, intercept: -1.0 }.eval(1.0), 0.0);
    assert_eq!(Coefficient::Constant(4.0).eval(9.0), 4.0);
}

#[test]
fn lipschitz_floor_and_override() {
    let s = Scenario::new(
        InitialDisplacement::Constant(1.0),
        InitialVelocity::Zero,
        Coefficient::Affine { slope: -0.5, intercept: 2.0 },
        Coefficient::Linear(1.5),
    )
    .unwrap();
    // floor covers |σ(0)| = 2 as well as the slopes
    assert_eq!(s.lipschitz(), 2.0);
    assert!(s.clone().with_lipschitz(1.0).is_err());
    assert_eq!(s.with_lipschitz(3.0).unwrap().lipschitz(), 3.0);
    let linear = Scenario::new(
        InitialDisplacement::Constant(1.0),
        InitialVelocity::Zero,
        Coefficient::Linear(-1.25),
        Coefficient::Zero,
    )
    .unwrap();
    assert_eq!(linear.lower_lipschitz_sigma(), 1.25);
    assert!(linear.lower_bound_data().is_ok());
    let cosine = Scenario::new(
        InitialDisplacement::Cosine { amplitude: 1.0, frequency: 1.0 },
        InitialVelocity::Zero,
        Coefficient::Linear(1.0),
        Coefficient::Zero,
    )
    .unwrap();
    assert!(cosine.lower_bound_data().is_err());
}

fn coefficient() -> impl Strategy<Value = Coefficient> {
    prop_oneof![
        (-5.0f64..5.0).prop_map(Coefficient::Linear),
        (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(slope, intercept)| Coefficient::Affine { slope, intercept }),
        (-5.0f64..5.0).prop_map(Coefficient::Constant),
        Just(Coefficient::Zero),
    ]
}

fn scenario() -> impl Strategy<Value = Scenario> {
    let v0 = prop_oneof![
        (-3.0f64..3.0).prop_map(InitialDisplacement::Constant),
        (-3.0f64..3.0, 0.0f64..4.0)
            .prop_map(|(amplitude, frequency)| InitialDisplacement::Cosine { amplitude, frequency }),
    ];
    let v1 = prop_oneof![
        Just(InitialVelocity::Zero),
        (-3.0f64..0.0, 0.0f64..3.0).prop_map(|(left, right)| InitialVelocity::Indicator { left, right }),
    ];
    (v0, v1, coefficient(), coefficient()).prop_map(|(v0, v1, s, b)| Scenario::new(v0, v1, s, b).unwrap())
}

proptest! {
    #[test]
    fn coefficients_respect_the_lipschitz_constant(s in scenario(), pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 200)) {
        let l = s.lipschitz();
        prop_assert!(l >= s.sigma().eval(0.0).abs() && l >= s.b().eval(0.0).abs());
        for (x, y) in pairs {
            for c in [s.sigma(), s.b()] {
                prop_assert!((c.eval(x) - c.eval(y)).abs() <= l * (x - y).abs() * (1.0 + 1e-12) + 1e-12);
            }
        }
    }

    #[test]
    fn homogeneous_wave_is_bounded_by_k(s in scenario(), pts in prop::collection::vec((0.0f64..10.0, -10.0f64..10.0), 100)) {
        let k = s.initial_bound();
        for (t, x) in pts {
            prop_assert!(s.initial_wave(t, x).abs() <= k + 1e-12);
        }
    }
}
