use dce_core::bosonics::FockDims;
use dce_core::model::{
    build_hamiltonian, level_sweep, locate_avoided_crossing, perturbative_splitting, solve, RESONANCE_PAIR,
};
use dce_core::SystemParams;
use proptest::prelude::*;

fn params(omega_c: f64, g: f64, n: usize, m: usize) -> SystemParams {
    SystemParams { omega_c, g, dims: FockDims::new(n, m).unwrap(), ..SystemParams::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigensystem_is_orthonormal_and_solves_h(omega_c in 0.5f64..1.5, g in 0.0f64..0.3, n in 2usize..5, m in 2usize..8) {
        let p = params(omega_c, g, n, m);
        let eig = solve(&p).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        prop_assert!(eig.residual(&h) < 1e-10);
        prop_assert!(eig.orthonormality_error() < 1e-12);
        prop_assert!(eig.energies().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn uncoupled_levels_are_ladder_sums(omega_c in 0.3f64..2.0, n in 2usize..5, m in 2usize..6) {
        let p = params(omega_c, 0.0, n, m);
        let eig = solve(&p).unwrap();
        let mut oracle: Vec<f64> = (0..n).flat_map(|a| (0..m).map(move |b| a as f64 * omega_c + b as f64)).collect();
        oracle.sort_by(f64::total_cmp);
        for (e, o) in eig.energies().iter().zip(&oracle) {
            prop_assert!((e - o).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_is_invariant_under_energy_scaling(scale in 0.2f64..5.0) {
        // H scales linearly with (omega_m, omega_c, g)
        let p = params(1.02, 0.1, 3, 6);
        let q = SystemParams { omega_m: scale, omega_c: 1.02 * scale, g: 0.1 * scale, ..p.clone() };
        let (a, b) = (solve(&p).unwrap(), solve(&q).unwrap());
        for (x, y) in a.energies().iter().zip(b.energies()) {
            prop_assert!((x * scale - y).abs() < 1e-11 * scale.max(1.0));
        }
    }

    #[test]
    fn sweep_subtracts_the_ground_energy(lo in 0.8f64..1.0, width in 0.05f64..0.3) {
        let p = params(1.0, 0.1, 3, 6);
        let grid: Vec<f64> = (0..5).map(|i| lo + width * i as f64 / 4.0).collect();
        let sweep = level_sweep(&p, &grid, 6, true).unwrap();
        for (x, row) in grid.iter().zip(&sweep.levels) {
            prop_assert!(row[0].abs() < 1e-14);
            let direct = solve(&p.with_omega_c(*x)).unwrap();
            prop_assert!((row[3] - direct.transition(3, 0)).abs() < 1e-12);
        }
    }
}

#[test]
fn small_coupling_gap_approaches_first_order_splitting() {
    for eta in [0.005, 0.01, 0.02] {
        let p = params(1.0, eta, 6, 14);
        let exact = locate_avoided_crossing(&p, RESONANCE_PAIR, 0.99, 1.01, 1e-10).unwrap().gap_min;
        let first = perturbative_splitting(eta, eta);
        // the relative correction is second order in eta
        assert!((exact / first - 1.0).abs() < 10.0 * eta * eta, "eta {eta}: {exact} vs {first}");
    }
}

#[test]
fn sweep_rejects_bad_grids() {
    let p = params(1.0, 0.1, 3, 6);
    assert!(level_sweep(&p, &[], 3, false).is_err());
    assert!(level_sweep(&p, &[1.0, 0.9], 3, false).is_err());
    assert!(level_sweep(&p, &[1.0, -1.0], 3, false).is_err());
    assert!(level_sweep(&p, &[1.0], 100, false).is_err());
}
