use std::f64::consts::PI;

use contactlab_core::convergence::*;
use contactlab_core::numerics::{operator_to_dense, RadialField, RadialGrid, SpacingLaw};
use contactlab_core::twobody::{
    bound_states_radial, realize_potential, PotentialSpec, ScalingClass, Shape, TwobodyError,
};
use contactlab_core::EigenRequest;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn well(class: ScalingClass, g: f64, radius: f64) -> PotentialSpec {
    PotentialSpec::new(Shape::SquareWell { radius }, g, class, 1.0).unwrap()
}

fn composite(g1: f64, g2: f64, g3: f64) -> CompositePotential {
    CompositePotential::new(
        well(ScalingClass::Strong, g1, 1.0),
        well(ScalingClass::Weak, g2, 1.0),
        PotentialSpec::unscaled(Shape::Gaussian { sigma: 1.0 }, g3),
    )
    .unwrap()
}

fn square_weight(grid: &RadialGrid, g: f64, radius: f64) -> RadialField {
    let pot = realize_potential(&PotentialSpec::unscaled(Shape::SquareWell { radius }, g), grid).unwrap();
    weight_from_potential(&pot)
}

/// `(H + z)^-1 - (H0 + z)^-1` by dense inversion.
fn dense_difference(grid: &RadialGrid, u: &RadialField, z: f64) -> DMatrix<f64> {
    let n = grid.len();
    let mut a0 = operator_to_dense(&free_hamiltonian(grid));
    for i in 0..n {
        a0[(i, i)] += z;
    }
    let mut a = a0.clone();
    for i in 0..n {
        a[(i, i)] -= u.values[i];
    }
    a.try_inverse().unwrap() - a0.try_inverse().unwrap()
}

#[test]
fn crossing_reproduces_square_well_ground_state() {
    let grid = RadialGrid::origin_aligned(2000, 6.0).unwrap();
    let u = square_weight(&grid, 12.0, 1.0);
    let z = bs_crossing(&free_hamiltonian(&grid), &u, 1e-13).unwrap();
    let pot = weight_from_potential(&u);
    let direct = bound_states_radial(&pot, &EigenRequest::new(1)).unwrap();
    assert!((-z - direct.eigenvalues[0]).abs() < 1e-6, "{} vs {}", -z, direct.eigenvalues[0]);
}

#[test]
fn crossing_and_counting_on_random_wells() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = RadialGrid::origin_aligned(1200, 5.0).unwrap();
    let h0 = free_hamiltonian(&grid);
    for _ in 0..5 {
        let radius = rng.random_range(0.5..1.5);
        let g = rng.random_range(5.0..60.0);
        let u = square_weight(&grid, g, radius);
        let pot = weight_from_potential(&u);
        let direct = bound_states_radial(&pot, &EigenRequest::new(8)).unwrap();
        let z = bs_crossing(&h0, &u, 1e-13).unwrap();
        assert!((-z - direct.eigenvalues[0]).abs() < 1e-6);
        for _ in 0..3 {
            let z = rng.random_range(0.05..g);
            let k = bs_kernel(&h0, &u, z).unwrap();
            let below = direct.eigenvalues.iter().filter(|e| **e < -z).count();
            assert_eq!(k.count_above(1.0), below, "g {g} R {radius} z {z}");
        }
    }
}

#[test]
fn kernel_edge_cases() {
    let grid = RadialGrid::origin_aligned(400, 4.0).unwrap();
    let h0 = free_hamiltonian(&grid);
    let zero = bs_kernel(&h0, &RadialField::zeros(grid.clone()), 2.0).unwrap();
    assert!(zero.support.is_empty() && zero.max_eigenvalue() == 0.0);

    let u = square_weight(&grid, 3.0, 1.0);
    let a = bs_kernel(&h0, &u, 1e6).unwrap().max_eigenvalue();
    let b = bs_kernel(&h0, &u, 2e6).unwrap().max_eigenvalue();
    assert!(a <= 3.0 / 1e6);
    assert!((a / b - 2.0).abs() < 1e-3);

    let weak = square_weight(&grid, 1.0, 1.0);
    assert!(matches!(bs_crossing(&h0, &weak, 1e-10), Err(ConvergenceError::NoCrossing { .. })));
}

#[test]
fn kk_zero_couplings_give_zero() {
    let grid = RadialGrid::origin_aligned(100, 3.0).unwrap();
    let c = composite(0.0, 0.0, 0.0);
    let k = kk_correction(&c, 0.5, 1.0, &grid).unwrap();
    assert!(k.matrix.iter().all(|v| *v == 0.0));
    assert_eq!(k.q_norm, 0.0);
}

#[test]
fn kk_matches_dense_resolvent_difference() {
    let grid = RadialGrid::origin_aligned(200, 4.0).unwrap();
    let c = CompositePotential::new(
        well(ScalingClass::Strong, 0.0, 1.0),
        well(ScalingClass::Weak, 0.0, 1.0),
        PotentialSpec::unscaled(Shape::SquareWell { radius: 1.0 }, 6.0),
    )
    .unwrap();
    let k = kk_correction(&c, 1.0, 5.0, &grid).unwrap();
    let u = weight_from_potential(&c.realize(1.0, &grid).unwrap());
    let oracle = dense_difference(&grid, &u, 5.0);
    let err = (&k.matrix - &oracle).amax();
    assert!(err < 1e-9, "{err}");
}

#[test]
fn kk_refuses_z_below_the_bound_state() {
    let grid = RadialGrid::origin_aligned(200, 4.0).unwrap();
    let c = CompositePotential::new(
        well(ScalingClass::Strong, 0.0, 1.0),
        well(ScalingClass::Weak, 0.0, 1.0),
        PotentialSpec::unscaled(Shape::SquareWell { radius: 1.0 }, 30.0),
    )
    .unwrap();
    let pot = c.realize(1.0, &grid).unwrap();
    let e0 = -bound_states_radial(&pot, &EigenRequest::new(1)).unwrap().eigenvalues[0];
    let err = kk_correction(&c, 1.0, 0.99 * e0, &grid).unwrap_err();
    assert!(matches!(err, ConvergenceError::NotInvertible { q_norm } if q_norm > 1.0));
    let ok = kk_correction(&c, 1.0, 1.01 * e0, &grid).unwrap();
    assert!(ok.q_norm < 1.0 && ok.q_norm > 0.9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kk_identity_holds_when_q_is_small(
        g1 in 0.0..0.05f64,
        g2 in 0.0..2.0f64,
        g3 in 0.0..3.0f64,
        eps in 0.3..1.0f64,
        z in 0.5..20.0f64,
    ) {
        let grid = RadialGrid::origin_aligned(150, 4.0).unwrap();
        let c = composite(g1, g2, g3);
        match kk_correction(&c, eps, z, &grid) {
            Ok(k) => {
                let u = weight_from_potential(&c.realize(eps, &grid).unwrap());
                let oracle = dense_difference(&grid, &u, z);
                prop_assert!((&k.matrix - &oracle).amax() < 1e-9);
            }
            Err(ConvergenceError::NotInvertible { q_norm }) => prop_assert!(q_norm >= 1.0),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

#[test]
fn strong_sweep_is_monotone_with_growing_gaps() {
    let grid = RadialGrid::origin_aligned(8000, 8.0).unwrap();
    let eps = [0.4, 0.2, 0.1, 0.05];
    let r = epsilon_sweep(&composite(1.0, 0.0, 0.0), &eps, &grid, &SweepObservables::default()).unwrap();
    assert_eq!(r.per_epsilon.len(), 4);
    assert_eq!(r.cauchy_gaps.len(), 3);
    assert!(r.monotone_flag);
    // energies fall like -g eps^-3: the sequence diverges instead of settling
    assert!(!r.gaps_decreasing);
    assert!(r.cauchy_gaps.windows(2).all(|w| w[1] > w[0]));
    let l1: Vec<f64> = r.per_epsilon.iter().map(|x| x.extension_norms.unwrap().v1.l1).collect();
    assert!(l1.iter().all(|v| (v - l1[0]).abs() <= 1e-10 * l1[0]));
    assert!(r.per_epsilon.iter().all(|x| x.bs_max_eigenvalue.is_some() && x.cross_term_norm == Some(0.0)));
}

#[test]
fn resonant_weak_sweep_settles() {
    let grid = RadialGrid::origin_aligned(8000, 8.0).unwrap();
    let eps = [0.4, 0.2, 0.1, 0.05];
    let c = composite(0.0, PI * PI / 4.0, 1.0);
    let r = epsilon_sweep(&c, &eps, &grid, &SweepObservables::default()).unwrap();
    assert!(r.monotone_flag);
    assert!(r.gaps_decreasing);
}

#[test]
fn sweep_rejects_bad_ladders() {
    let grid = RadialGrid::origin_aligned(2000, 8.0).unwrap();
    let c = composite(1.0, 0.0, 0.0);
    let o = SweepObservables::default();
    assert!(matches!(epsilon_sweep(&c, &[], &grid, &o), Err(ConvergenceError::EmptySweep)));
    assert!(matches!(
        epsilon_sweep(&c, &[0.2, 0.4], &grid, &o),
        Err(ConvergenceError::BadEpsilons { index: 1 })
    ));
    assert!(matches!(
        epsilon_sweep(&c, &[0.4, 0.001], &grid, &o),
        Err(ConvergenceError::Twobody(TwobodyError::UnderResolved { .. }))
    ));
}

#[test]
fn regular_part_shift_stabilizes() {
    let grid = RadialGrid::new(40_000, 1e-6, 8.0, SpacingLaw::Logarithmic).unwrap();
    let eps: Vec<f64> = (0..10).map(|i| 0.4 / 2f64.powi(i)).collect();
    let o = SweepObservables { bs_z: None, norms: false, cross_term: false };
    let with = composite(1.0, 0.0, 1.0);
    let a = epsilon_sweep(&with, &eps, &grid, &o).unwrap();
    let b = epsilon_sweep(&with.without_regular(), &eps, &grid, &o).unwrap();
    let shifts: Vec<f64> = a
        .per_epsilon
        .iter()
        .zip(&b.per_epsilon)
        .map(|(x, y)| x.ground_eigenvalue - y.ground_eigenvalue)
        .collect();
    let diffs: Vec<f64> = shifts.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(diffs[diffs.len() - 3..].iter().all(|d| *d <= 1e-6), "{diffs:?}");
    // the bound state shrinks onto the origin, where V3 = -1
    assert!((shifts[shifts.len() - 1] + 1.0).abs() < 1e-6);
}

#[test]
fn cross_term_at_unit_epsilon_is_plain_overlap() {
    let c = composite(2.0, 1.5, 0.7);
    let got = cross_term_norm(&c, 1.0).unwrap();
    // composite Simpson on [0, 1], the support of V1
    let m = 200_000;
    let h = 1.0 / m as f64;
    let f = |r: f64| {
        let v3 = 0.7 * (-r * r).exp();
        (2.0 * (1.5 + v3)).sqrt() * r * r
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..m {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let expect = 4.0 * PI * s * h / 3.0;
    assert!((got - expect).abs() < 1e-10 * expect, "{got} vs {expect}");
}

#[test]
fn cross_term_vanishes_like_root_epsilon() {
    let (g1, g2) = (2.0, 3.0);
    let c = composite(g1, g2, 0.0);
    let eps = [0.2, 0.1, 0.05, 0.025];
    let norms: Vec<f64> = eps.iter().map(|e| cross_term_norm(&c, *e).unwrap()).collect();
    for (e, n) in eps.iter().zip(&norms) {
        let exact = (g1 * g2).sqrt() * 4.0 * PI / 3.0 * e.sqrt();
        assert!((n - exact).abs() < 1e-10 * exact);
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 4.0;
    let my = ys.iter().sum::<f64>() / 4.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 0.5).abs() <= 0.05);
    let fine: Vec<f64> = (0..20).map(|i| 0.5 * 0.8f64.powi(i)).collect();
    let vals: Vec<f64> = fine.iter().map(|e| cross_term_norm(&c, *e).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn disjoint_supports_have_no_cross_term() {
    let shell = Shape::UserTable {
        radii: vec![2.0, 2.5, 3.0],
        values: vec![0.0, 1.0, 0.0],
    };
    let c = CompositePotential::new(
        well(ScalingClass::Strong, 1.0, 1.0),
        PotentialSpec::new(shell, 4.0, ScalingClass::Weak, 1.0).unwrap(),
        PotentialSpec::unscaled(Shape::Gaussian { sigma: 1.0 }, 0.0),
    )
    .unwrap();
    for e in [1.0, 0.5, 0.1] {
        assert_eq!(cross_term_norm(&c, e).unwrap(), 0.0);
    }
}

#[test]
fn composite_checks_classes() {
    let err = CompositePotential::new(
        well(ScalingClass::Weak, 1.0, 1.0),
        well(ScalingClass::Weak, 1.0, 1.0),
        PotentialSpec::unscaled(Shape::Gaussian { sigma: 1.0 }, 0.0),
    )
    .unwrap_err();
    assert!(matches!(err, ConvergenceError::WrongClass { slot: "v1", .. }));
}
