//! Dressed-basis jump operators and the non-secular thermal master equation.

mod jumps;
mod liouvillian;
mod state;

pub use jumps::{
    dressed_components, dressed_jump_sets, thermal_occupation, BareMode, DressedJumpSet, DressingOptions, Element,
    JumpComponent,
};
pub use liouvillian::{
    build_liouvillian, build_liouvillian_with, Bath, Coord, Liouvillian, LiouvillianOptions, PairSelection, Sector,
};
pub use state::{DensityMatrix, STATE_HERMITIAN_TOL, STATE_MIN_EIGENVALUE, STATE_TRACE_TOL};

#[cfg(test)]
mod tests {
    use faer::Mat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::bosonics::FockDims;
    use crate::linalg::{max_abs, max_abs_diff, C64};
    use crate::model::{cavity_lowering, mechanical_lowering, solve, SystemParams};

    fn small(omega_c: f64, g: f64) -> SystemParams {
        SystemParams { omega_c, g, t_kappa: 0.3, dims: FockDims::new(3, 5).unwrap(), ..SystemParams::default() }
    }

    fn scaled(m: &Mat<C64>, c: C64) -> Mat<C64> {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c)
    }

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Mat<C64> {
        let m = Mat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        Mat::from_fn(d, d, |i, j| m[(i, j)] + m[(j, i)].conj())
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let p = small(1.017, 0.1);
        let eig = solve(&p).unwrap();
        let l = build_liouvillian(&eig, &p).unwrap();
        let id = Mat::<C64>::identity(l.dim(), l.dim());
        assert!(max_abs(&l.apply_adjoint(&id)) < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut h = random_hermitian(l.dim(), &mut rng);
            let tr = crate::linalg::trace(&h) / l.dim() as f64;
            for i in 0..l.dim() {
                h[(i, i)] -= tr;
            }
            let out = l.apply(&h);
            assert!(crate::linalg::trace(&out).norm() < 1e-10);
            assert!(crate::linalg::hermiticity_error(&out) < 1e-10);
        }
    }

    #[test]
    fn explicit_pair_sum_matches_factorized_generator() {
        let p = small(1.017, 0.1);
        let eig = solve(&p).unwrap();
        let full = build_liouvillian(&eig, &p).unwrap();
        let opts = LiouvillianOptions { pairs: PairSelection::Bandwidth(f64::INFINITY), ..LiouvillianOptions::for_params(&p) };
        let explicit = build_liouvillian_with(&eig, &p, opts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let h = random_hermitian(full.dim(), &mut rng);
            assert!(max_abs_diff(&full.apply(&h), &explicit.apply(&h)) < 1e-12);
        }
    }

    #[test]
    fn uncoupled_generator_is_standard_thermal_lindbladian() {
        let p = SystemParams { g: 0.0, omega_c: 1.3, t_kappa: 0.4, dims: FockDims::new(4, 5).unwrap(), ..SystemParams::default() };
        let eig = solve(&p).unwrap();
        let l = build_liouvillian(&eig, &p).unwrap();
        let a = cavity_lowering(p.dims).unwrap().into_entries();
        let b = mechanical_lowering(p.dims).unwrap().into_entries();
        let h = crate::model::build_hamiltonian(&p).unwrap().into_entries();
        let nc = thermal_occupation(p.omega_c, p.t_kappa).unwrap();
        let nm = thermal_occupation(p.omega_m, p.t_gamma).unwrap();
        let dissipator = |o: &Mat<C64>, rho: &Mat<C64>| {
            let od = o.adjoint().to_owned();
            let odo = &od * o;
            let anti = &odo * rho + rho * &odo;
            o * rho * &od - scaled(&anti, C64::new(0.5, 0.0))
        };
        let d = p.dims.total();
        let i = C64::new(0.0, 1.0);
        for x in 0..d {
            for y in 0..d {
                let unit = Mat::from_fn(d, d, |r, c| if (r, c) == (x, y) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
                let ad = a.adjoint().to_owned();
                let bd = b.adjoint().to_owned();
                let oracle = scaled(&(&h * &unit - &unit * &h), -i)
                    + scaled(&dissipator(&a, &unit), C64::new(p.kappa * (nc + 1.0), 0.0))
                    + scaled(&dissipator(&ad, &unit), C64::new(p.kappa * nc, 0.0))
                    + scaled(&dissipator(&b, &unit), C64::new(p.gamma * (nm + 1.0), 0.0))
                    + scaled(&dissipator(&bd, &unit), C64::new(p.gamma * nm, 0.0));
                let got = l.to_bare(&l.apply(&l.to_eigenbasis(&unit)));
                assert!(max_abs_diff(&got, &oracle) < 1e-10, "unit ({x},{y})");
            }
        }
    }

    #[test]
    fn vacuum_is_stationary_without_coupling_or_temperature() {
        let p = SystemParams { g: 0.0, t_kappa: 0.0, t_gamma: 0.0, dims: FockDims::new(3, 4).unwrap(), ..SystemParams::default() };
        let eig = solve(&p).unwrap();
        let l = build_liouvillian(&eig, &p).unwrap();
        let vac = l.to_eigenbasis(DensityMatrix::ground(&eig).matrix());
        assert!(max_abs(&l.apply(&vac)) < 1e-15);
    }

    #[test]
    fn pair_term_splits_into_two_parity_sectors() {
        let p = small(1.017, 0.1);
        let eig = solve(&p).unwrap();
        let l = build_liouvillian(&eig, &p).unwrap();
        assert_eq!(l.sectors().len(), 2);
        let total: usize = l.sectors().iter().map(Sector::dim).sum();
        assert_eq!(total, l.dim() * l.dim());
        l.population_sector().unwrap();
    }

    #[test]
    fn sector_generator_matches_apply() {
        let p = small(1.017, 0.1);
        let eig = solve(&p).unwrap();
        let l = build_liouvillian(&eig, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(l.dim(), &mut rng);
        let out = l.apply(&h);
        for (s, sector) in l.sectors().iter().enumerate() {
            let x = sector.gather(&h);
            let m = l.sector_generator(s);
            let y: Vec<f64> = (0..sector.dim()).map(|r| (0..sector.dim()).map(|c| m[(r, c)] * x[c]).sum()).collect();
            let expected = sector.gather(&out);
            for (a, b) in y.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_functional_reproduces_trace_product() {
        let p = small(1.017, 0.1);
        let eig = solve(&p).unwrap();
        let l = build_liouvillian(&eig, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(l.dim(), &mut rng);
        let a = Mat::from_fn(l.dim(), l.dim(), |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let mut total = C64::new(0.0, 0.0);
        let mut rebuilt = Mat::<C64>::zeros(l.dim(), l.dim());
        for sector in l.sectors() {
            let x = sector.gather(&h);
            let f = sector.trace_functional(&a);
            total += f.iter().zip(&x).map(|(f, x)| f * x).sum::<C64>();
            sector.scatter_add(&x, &mut rebuilt);
        }
        assert!((total - crate::linalg::trace_product(&a, &h)).norm() < 1e-12);
        assert!(max_abs_diff(&rebuilt, &h) < 1e-15);
    }

    #[test]
    fn zero_rate_baths_are_skipped_and_empty_ones_rejected() {
        let p = SystemParams { kappa: 0.0, ..small(1.1, 0.1) };
        let eig = solve(&p).unwrap();
        build_liouvillian(&eig, &p).unwrap();
        let (cav, _) = dressed_jump_sets(&eig, &p, DressingOptions::for_params(&p)).unwrap();
        let huge = DressingOptions { omega_min: 1e6, ..DressingOptions::for_params(&p) };
        let (empty, _) = dressed_jump_sets(&eig, &p, huge).unwrap();
        let baths = vec![Bath { rate: 0.1, temperature: 0.0, jumps: empty }];
        assert!(matches!(
            Liouvillian::from_baths(&eig, &p, baths, PairSelection::All),
            Err(crate::Error::Construction(_))
        ));
        assert!(!cav.components().is_empty());
    }
}
