use dce_core::bosonics::FockDims;
use dce_core::dressed_me::{build_liouvillian, dressed_jump_sets, thermal_occupation, DressingOptions};
use dce_core::evolve::{propagate, steady_state};
use dce_core::linalg::{hermiticity_error, max_abs_diff, trace};
use dce_core::model::{cavity_lowering, mechanical_lowering, solve};
use dce_core::{DensityMatrix, SystemParams, C64};
use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(omega_c: f64, g: f64, t_kappa: f64, t_gamma: f64) -> SystemParams {
    SystemParams { omega_c, g, t_kappa, t_gamma, dims: FockDims::new(3, 4).unwrap(), ..SystemParams::default() }
}

fn random_state(d: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Mat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = &m * m.adjoint();
    let tr = trace(&rho).re;
    DensityMatrix::new(Mat::from_fn(d, d, |i, j| rho[(i, j)] / tr)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn occupation_obeys_detailed_balance(omega in 0.01f64..5.0, t in 0.05f64..3.0) {
        let n = thermal_occupation(omega, t).unwrap();
        prop_assert!(n > 0.0);
        prop_assert!(((n + 1.0) / n - (omega / t).exp()).abs() < 1e-9 * (omega / t).exp());
        prop_assert!(thermal_occupation(omega, 1.1 * t).unwrap() > n);
        prop_assert!(thermal_occupation(1.1 * omega, t).unwrap() < n);
    }

    #[test]
    fn components_rebuild_the_coupling_operators(omega_c in 0.8f64..1.2, g in 0.0f64..0.2) {
        let p = small(omega_c, g, 0.0, 0.9);
        let eig = solve(&p).unwrap();
        let (cav, mech) = dressed_jump_sets(&eig, &p, DressingOptions::for_params(&p)).unwrap();
        let a = cavity_lowering(p.dims).unwrap().into_entries();
        let b = mechanical_lowering(p.dims).unwrap().into_entries();
        prop_assert!(max_abs_diff(&cav.reconstruct(), &eig.to_eigenbasis(&(&a + a.adjoint()))) < 1e-10);
        prop_assert!(max_abs_diff(&mech.reconstruct(), &eig.to_eigenbasis(&(&b + b.adjoint()))) < 1e-10);
        for c in cav.components().iter().chain(mech.components()) {
            prop_assert!(c.omega > 0.0);
            for e in &c.elements {
                prop_assert!((eig.transition(e.upper, e.lower) - c.omega).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        omega_c in 0.9f64..1.1, g in 0.0f64..0.15, t_kappa in 0.0f64..0.5, t_gamma in 0.0f64..1.0, seed in 0u64..1000,
    ) {
        let p = small(omega_c, g, t_kappa, t_gamma);
        let eig = solve(&p).unwrap();
        let l = build_liouvillian(&eig, &p).unwrap();
        let rho = l.to_eigenbasis(random_state(l.dim(), seed).matrix());
        let out = l.apply(&rho);
        prop_assert!(trace(&out).norm() < 1e-12);
        prop_assert!(hermiticity_error(&out) < 1e-12);
        let id = Mat::<C64>::identity(l.dim(), l.dim());
        prop_assert!(dce_core::linalg::max_abs(&l.apply_adjoint(&id)) < 1e-12);
    }

    #[test]
    fn uncoupled_steady_state_is_detailed_balance(t_kappa in 0.0f64..0.6, t_gamma in 0.0f64..0.6) {
        let p = SystemParams { g: 0.0, omega_c: 1.3, t_kappa, t_gamma, dims: FockDims::new(6, 6).unwrap(), ..SystemParams::default() };
        let eig = solve(&p).unwrap();
        let l = build_liouvillian(&eig, &p).unwrap();
        let ss = steady_state(&l).unwrap();
        let product = DensityMatrix::product_thermal(&p, t_kappa, t_gamma).unwrap();
        prop_assert!(ss.trace_distance(&product).unwrap() < 1e-8);
    }
}

#[test]
fn uncoupled_dynamics_stays_physical() {
    let p = SystemParams { g: 0.0, omega_c: 1.1, t_kappa: 0.3, dims: FockDims::new(4, 5).unwrap(), ..SystemParams::default() };
    let eig = solve(&p).unwrap();
    let l = build_liouvillian(&eig, &p).unwrap();
    for seed in 0..5 {
        let traj = propagate(&l, &random_state(l.dim(), seed), &[0.5, 2.0, 10.0, 50.0]).unwrap();
        for (e, m) in traj.trace_errors.iter().zip(&traj.min_eigenvalues) {
            assert!(*e < 1e-10 && *m > -1e-10);
        }
    }
}
