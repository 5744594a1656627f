use contactlab_core::numerics::{EigenRequest, RadialField, RadialGrid, SpacingLaw};
use contactlab_core::twobody::{
    bound_states_radial, bound_states_radial_with, extension_norms, realize_potential, scattering_length,
    tune_to_resonance, OuterBoundary, PotentialSpec, RadialHamiltonian, ScalingClass, Shape, TwobodyError,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn well(g: f64) -> PotentialSpec {
    PotentialSpec::unscaled(Shape::SquareWell { radius: 1.0 }, g)
}

fn scaled(shape: Shape, g: f64, class: ScalingClass, eps: f64) -> PotentialSpec {
    PotentialSpec::new(shape, g, class, eps).unwrap()
}

/// Root of `k cot k = -kappa`, `k^2 + kappa^2 = g` for the deepest state of the unit well.
fn square_well_ground(g: f64) -> f64 {
    let f = |kappa: f64| {
        let k = (g - kappa * kappa).sqrt();
        k / k.tan() + kappa
    };
    let (mut lo, mut hi) = ((g - PI * PI).max(0.0).sqrt() + 1e-12, (g - PI * PI / 4.0).sqrt() - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    -(0.5 * (lo + hi)).powi(2)
}

fn negatives(spec: &PotentialSpec, grid: &RadialGrid) -> usize {
    let pot = realize_potential(spec, grid).unwrap();
    RadialHamiltonian::new(&pot, OuterBoundary::Dirichlet).unwrap().count_below(0.0)
}

#[test]
fn realized_amplitudes() {
    let grid = RadialGrid::origin_aligned(1000, 2.0).unwrap();
    let sq = Shape::SquareWell { radius: 1.0 };
    for (class, peak) in [(ScalingClass::Strong, -8.0), (ScalingClass::Weak, -4.0)] {
        let pot = realize_potential(&scaled(sq.clone(), 1.0, class, 0.5), &grid).unwrap();
        let min = pot.values.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(min, peak);
        for (r, v) in grid.nodes().iter().zip(&pot.values) {
            if *r > 0.5 + 1e-12 {
                assert_eq!(*v, 0.0);
            }
        }
    }
    let plain = realize_potential(&well(1.3), &grid).unwrap();
    for class in [ScalingClass::Strong, ScalingClass::Weak] {
        let pot = realize_potential(&scaled(sq.clone(), 1.3, class, 1.0), &grid).unwrap();
        assert_eq!(pot.values, plain.values);
    }
}

#[test]
fn thin_support_is_rejected() {
    let grid = RadialGrid::origin_aligned(100, 10.0).unwrap();
    let spec = scaled(Shape::SquareWell { radius: 1.0 }, 1.0, ScalingClass::Strong, 0.5);
    assert!(matches!(
        realize_potential(&spec, &grid),
        Err(TwobodyError::UnderResolved { .. })
    ));
}

#[test]
fn norm_examples() {
    let n = extension_norms(&well(1.0)).unwrap();
    assert!((n.l1 - 4.0 * PI / 3.0).abs() < 1e-12);
    // unit ball: 8 pi^2 int int r s log((r+s)/|r-s|) = 4 pi^2
    assert!((n.rollnik - 4.0 * PI * PI).abs() < 1e-8 * 4.0 * PI * PI);
    let zero = extension_norms(&well(0.0)).unwrap();
    assert_eq!((zero.l1, zero.rollnik), (0.0, 0.0));
    let l1: Vec<f64> = [1.0, 0.5, 0.1]
        .iter()
        .map(|e| extension_norms(&scaled(Shape::Gaussian { sigma: 0.7 }, 2.0, ScalingClass::Strong, *e)).unwrap().l1)
        .collect();
    assert!(l1.iter().all(|v| (v - l1[0]).abs() < 1e-10 * l1[0]));
}

#[test]
fn bound_state_examples() {
    let grid = RadialGrid::origin_aligned(10_000, 10.0).unwrap();
    let req = EigenRequest::new(2).with_tol(1e-6);
    let s = bound_states_radial(&realize_potential(&well(2.0), &grid).unwrap(), &req).unwrap();
    assert_eq!(s.negative_count, 0);
    let s = bound_states_radial(&realize_potential(&well(12.0), &grid).unwrap(), &req).unwrap();
    assert_eq!(s.negative_count, 1);
    assert!(s.truncated);
    let exact = square_well_ground(12.0);
    assert!((s.eigenvalues[0] - exact).abs() < 1e-4, "{} vs {exact}", s.eigenvalues[0]);
    let s = bound_states_radial(&RadialField::zeros(grid), &req).unwrap();
    assert_eq!(s.negative_count, 0);
}

#[test]
fn scattering_length_on_twenty_couplings() {
    let grid = RadialGrid::origin_aligned(2000, 10.0).unwrap();
    // stays clear of the poles of tan and of the zero of a near sqrt(g) = 4.49
    let couplings: Vec<f64> = (0..20).map(|i| 0.1 + 0.9 * i as f64).filter(|g| (g.sqrt() - PI / 2.0).abs() > 0.05).collect();
    let couplings: Vec<f64> = couplings.into_iter().chain([17.0, 18.5]).take(20).collect();
    assert_eq!(couplings.len(), 20);
    for g in couplings {
        let a = scattering_length(&realize_potential(&well(g), &grid).unwrap()).unwrap();
        let k = g.sqrt();
        let exact = 1.0 - k.tan() / k;
        assert!((a - exact).abs() < 1e-6 * exact.abs(), "g={g}: {a} vs {exact}");
    }
    assert!(scattering_length(&RadialField::zeros(grid.clone())).unwrap().abs() < 1e-12);
    let a = scattering_length(&realize_potential(&well(PI * PI / 4.0 - 1e-4), &grid).unwrap()).unwrap();
    assert!(a.abs() > 1e3);
}

#[test]
fn resonance_examples() {
    let grid = RadialGrid::origin_aligned(2000, 10.0).unwrap();
    let r = tune_to_resonance(&well(0.0), (1.0, 4.0), &grid).unwrap();
    assert!((r.coupling - PI * PI / 4.0).abs() < 1e-8);
    assert!(r.inverse_scattering_length.abs() <= 1e-8);

    let gauss = PotentialSpec::unscaled(Shape::Gaussian { sigma: 1.0 }, 0.0);
    let r = tune_to_resonance(&gauss, (2.0, 4.0), &grid).unwrap();
    assert!(r.scattering_length.abs() > 1e6, "a = {}", r.scattering_length);

    assert!(matches!(
        tune_to_resonance(&well(0.0), (0.1, 0.2), &grid),
        Err(TwobodyError::NoSignChange { .. })
    ));
}

#[test]
fn first_bound_state_appears_at_the_resonance() {
    // with a Neumann outer end the zero-energy resonance is an exact zero mode
    let grid = RadialGrid::origin_aligned(4000, 2.0).unwrap();
    let g_star = tune_to_resonance(&well(0.0), (1.0, 4.0), &grid).unwrap().coupling;
    let count = |g: f64| {
        let pot = realize_potential(&well(g), &grid).unwrap();
        bound_states_radial_with(&pot, &EigenRequest::new(1).with_tol(1e-6), OuterBoundary::Neumann)
            .unwrap()
            .negative_count
    };
    assert_eq!(count(g_star - 1e-6), 0);
    assert_eq!(count(g_star + 1e-6), 1);
}

#[test]
fn count_is_monotone_in_coupling() {
    let grid = RadialGrid::origin_aligned(4000, 8.0).unwrap();
    for shape in [Shape::SquareWell { radius: 1.0 }, Shape::Gaussian { sigma: 0.8 }] {
        let counts: Vec<usize> = (0..20)
            .map(|i| negatives(&PotentialSpec::unscaled(shape.clone(), 3.0 * i as f64), &grid))
            .collect();
        assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
        assert!(counts[19] >= 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weak_scaling_is_covariant(g in 3.0f64..40.0, eps in 0.05f64..1.0, gauss in any::<bool>()) {
        let shape = if gauss { Shape::Gaussian { sigma: 0.6 } } else { Shape::SquareWell { radius: 1.0 } };
        let base = RadialGrid::new(1500, 1e-3, 8.0, SpacingLaw::Logarithmic).unwrap();
        let fine = base.scaled(eps);
        let req = EigenRequest::new(3).with_tol(1e-6);
        let e0 = bound_states_radial(&realize_potential(&PotentialSpec::unscaled(shape.clone(), g), &base).unwrap(), &req).unwrap();
        let spec = scaled(shape, g, ScalingClass::Weak, eps);
        let e1 = bound_states_radial(&realize_potential(&spec, &fine).unwrap(), &req).unwrap();
        prop_assert_eq!(e0.negative_count, e1.negative_count);
        for (a, b) in e0.eigenvalues.iter().zip(&e1.eigenvalues) {
            let want = a / (eps * eps);
            prop_assert!((b - want).abs() <= 1e-6 * want.abs(), "{} vs {}", b, want);
        }
    }

    #[test]
    fn strong_l1_is_scale_invariant(g in 0.0f64..50.0, eps in 1e-4f64..1.0, sigma in 0.1f64..3.0) {
        let shape = Shape::Gaussian { sigma };
        let a = extension_norms(&scaled(shape.clone(), g, ScalingClass::Strong, 1.0)).unwrap().l1;
        let b = extension_norms(&scaled(shape, g, ScalingClass::Strong, eps)).unwrap().l1;
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
    }

    #[test]
    fn norms_are_nonnegative(g in 0.0f64..50.0, eps in 1e-3f64..1.0, radius in 0.1f64..3.0) {
        for class in [ScalingClass::Strong, ScalingClass::Weak, ScalingClass::Unscaled] {
            let n = extension_norms(&scaled(Shape::SquareWell { radius }, g, class, eps)).unwrap();
            prop_assert!(n.l1 >= 0.0 && n.rollnik >= 0.0);
        }
    }
}
