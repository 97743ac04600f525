use std::sync::Arc;

use lab_core::model::{sample_flow, sample_potential, truncate, FlowField, FlowSpec, PotentialSpec};
use lab_core::operator::assemble;
use lab_core::rearrange::{decreasing_rearrangement, distribution_function, lorentz_norm, weighted_lp_norm};
use lab_core::spectral::{eigen_spectrum, principal_eigenpair, EigenOptions};
use lab_core::stationary::{distance_function, make_cutoff_test};
use lab_core::{GridFunction, Mesh};
use proptest::prelude::*;

fn interval(n: usize) -> Arc<Mesh<f64>> {
    Arc::new(Mesh::build_interval(0.0, 1.0, n).unwrap())
}

fn square(n: usize) -> Arc<Mesh<f64>> {
    Arc::new(Mesh::build_rectangle(1.0, 1.0, n, n).unwrap())
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mesh_delta_is_interior(n in 2usize..300, a in -5.0f64..5.0, len in 0.1f64..10.0) {
        let m = Mesh::build_interval(a, a + len, n).unwrap();
        let half = m.min_spacing() / 2.0;
        for (c, d) in m.centers().iter().zip(m.delta()) {
            prop_assert!(*d >= half * (1.0 - 1e-12));
            let exact = (c[0] - a).min(a + len - c[0]);
            prop_assert!((d - exact).abs() <= 1e-12 * len);
        }
        let total = m.cell_volume() * m.len() as f64;
        prop_assert!((total - len).abs() <= 1e-12 * len);
    }

    #[test]
    fn rectangle_delta_is_exact(nx in 2usize..30, ny in 2usize..30, lx in 0.2f64..3.0, ly in 0.2f64..3.0) {
        let m = Mesh::build_rectangle(lx, ly, nx, ny).unwrap();
        for (c, d) in m.centers().iter().zip(m.delta()) {
            let exact = c[0].min(lx - c[0]).min(c[1]).min(ly - c[1]);
            prop_assert!((d - exact).abs() <= 1e-12 * lx.max(ly));
            prop_assert!(*d > 0.0);
        }
    }

    #[test]
    fn rearrangement_is_equimeasurable(v in values(64), t in -1.0f64..10.0) {
        let m = interval(64);
        let u = GridFunction::<f64>::new(&m, v).unwrap();
        let r = decreasing_rearrangement(&u).unwrap();
        prop_assert!(r.u_star().windows(2).all(|w| w[0] >= w[1]));
        let mut sorted: Vec<f64> = u.values().iter().map(|x| x.abs()).collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assert_eq!(r.u_star(), &sorted[..]);
        let level = r.u_star().iter().filter(|&&x| x > t).count() as f64 * m.cell_volume();
        prop_assert_eq!(distribution_function(&u.abs(), t), level);
        let uss = r.u_star_star();
        prop_assert!(uss.iter().zip(r.u_star()).all(|(a, b)| *a >= *b * (1.0 - 1e-14)));
        prop_assert!(uss.windows(2).all(|w| w[0] >= w[1] * (1.0 - 1e-14)));
    }

    #[test]
    fn rearrangement_is_monotone(v in values(50), bump in prop::collection::vec(0.0f64..3.0, 50)) {
        let m = interval(50);
        let u = GridFunction::<f64>::new(&m, v.iter().map(|x| x.abs()).collect()).unwrap();
        let w = GridFunction::<f64>::new(&m, v.iter().zip(&bump).map(|(x, b)| x.abs() + b).collect()).unwrap();
        let (ru, rw) = (decreasing_rearrangement(&u).unwrap(), decreasing_rearrangement(&w).unwrap());
        prop_assert!(ru.u_star().iter().zip(rw.u_star()).all(|(a, b)| a <= b));
    }

    #[test]
    fn lorentz_scaling_and_embedding(v in values(40), c in -4.0f64..4.0, pi in 0usize..3) {
        let p = [1.5, 2.0, 4.0][pi];
        let m = interval(40);
        let u = GridFunction::<f64>::new(&m, v).unwrap();
        let base = lorentz_norm(&u, p, p).unwrap();
        let scaled = lorentz_norm(&u.scaled(c), p, p).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * (1.0 + scaled));
        let ones = GridFunction::<f64>::from_fn(&m, |_| 1.0);
        let lp = weighted_lp_norm(&u, &ones, 0.0, p).unwrap();
        let conj = p / (p - 1.0);
        prop_assert!(lp <= base * (1.0 + 1e-12) && base <= conj * lp * (1.0 + 1e-12));
    }

    #[test]
    fn truncation_is_monotone(j1 in 1.0f64..1e4, factor in 1.0f64..100.0) {
        let m = interval(200);
        let spec = PotentialSpec::new(2.0, 2.0).unwrap();
        let full = sample_potential(&spec, &m).unwrap();
        let gap = |j: f64| sample_potential(&truncate(&spec, j).unwrap(), &m).unwrap().sub(&full).unwrap().max_abs();
        prop_assert!(gap(j1 * factor) <= gap(j1));
        prop_assert_eq!(gap(full.max() * 1.01), 0.0);
    }

    #[test]
    fn convection_is_skew(amp in 0.0f64..4.0, v in values(400)) {
        let m = square(20);
        let flow = sample_flow(&FlowSpec::cellular(amp, m.domain()), &m).unwrap();
        prop_assert!(flow.divergence().max_abs() <= 1e-10 * (1.0 + amp));
        let op = assemble(&m, &GridFunction::zeros(&m), &flow).unwrap();
        let u = GridFunction::<f64>::new(&m, v).unwrap();
        let k = op.convection().apply(u.values());
        let energy: f64 = k.iter().zip(u.values()).map(|(a, b)| a * b).sum();
        let scale: f64 = op.convection().abs_mul(u.values()).iter().zip(u.values()).map(|(a, b)| a * b.abs()).sum();
        prop_assert!(energy.abs() <= 1e-12 * (1.0 + scale));
        let kt = op.convection().transpose();
        for i in 0..m.len() {
            for (j, x) in op.convection().row(i) {
                prop_assert!((x + kt.get(i, j)).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn m_matrix_signs(c in 0.0f64..50.0, amp in 0.0f64..3.0) {
        let m = square(16);
        let v = sample_potential(&PotentialSpec::new(c, 2.0).unwrap(), &m).unwrap();
        let flow = sample_flow(&FlowSpec::cellular(amp, m.domain()), &m).unwrap();
        let op = assemble(&m, &v, &flow).unwrap();
        for i in 0..m.len() {
            for (j, x) in op.matrix().row(i) {
                if i == j { prop_assert!(x > 0.0) } else { prop_assert!(x <= 0.0) }
            }
        }
    }

    #[test]
    fn resolvent_contracts_in_l2(lambda in 1e-3f64..1e3, v in values(150), c in 0.0f64..10.0) {
        let m = interval(150);
        let pot = sample_potential(&PotentialSpec::new(c, 2.0).unwrap(), &m).unwrap();
        let op = assemble(&m, &pot, &FlowField::zero(&m)).unwrap();
        let f = GridFunction::<f64>::new(&m, v).unwrap();
        let u = op.resolvent(lambda, Default::default()).unwrap().solve(&f).unwrap();
        prop_assert!(u.norm_l2() <= f.norm_l2() * (1.0 + 1e-10));
    }

    #[test]
    fn positivity_and_monotone_dependence_on_v(v in prop::collection::vec(0.0f64..1.0, 120), c in 0.5f64..10.0, dc in 0.0f64..10.0) {
        let m = interval(120);
        let f = GridFunction::<f64>::new(&m, v).unwrap();
        let solve = |c: f64| {
            let pot = sample_potential(&PotentialSpec::new(c, 2.0).unwrap(), &m).unwrap();
            assemble(&m, &pot, &FlowField::zero(&m)).unwrap().factor(Default::default()).unwrap().solve(&f).unwrap()
        };
        let (u, w) = (solve(c), solve(c + dc));
        prop_assert!(u.min() >= -1e-12);
        prop_assert!(w.values().iter().zip(u.values()).all(|(a, b)| *a <= *b + 1e-10));
    }

    #[test]
    fn cutoff_support_is_interior(j in 4.0f64..30.0) {
        let m = interval(400);
        let phi = GridFunction::<f64>::from_fn(&m, |x| (std::f64::consts::PI * x[0]).sin());
        let t = make_cutoff_test(&phi, j, &m).unwrap();
        for (d, x) in distance_function(&m).values().iter().zip(t.values().values()) {
            if *d < 1.0 / j { prop_assert_eq!(*x, 0.0); }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn diagonal_shift_moves_every_eigenvalue(shift in 0.5f64..20.0) {
        let m = interval(200);
        let pot = sample_potential(&PotentialSpec::new(2.0, 2.0).unwrap(), &m).unwrap();
        let op = assemble(&m, &pot, &FlowField::zero(&m)).unwrap();
        let shifted = op.with_potential(&pot.map(|v| v + shift)).unwrap();
        let opts = EigenOptions::default();
        let (a, b) = (eigen_spectrum(&op, 4, &opts).unwrap(), eigen_spectrum(&shifted, 4, &opts).unwrap());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((y - x - shift).abs() <= 1e-8 * y);
        }
        for (u, lam) in a.eigenfunctions.iter().zip(&a.eigenvalues) {
            let rq = u.inner(&op.apply(u).unwrap()).unwrap();
            prop_assert!((rq - lam).abs() <= 1e-8 * lam);
            prop_assert!((u.norm_l2() - 1.0).abs() <= 1e-10);
        }
        prop_assert!(a.eigenvalues[1] - a.eigenvalues[0] > 1.0);
    }

    #[test]
    fn perron_positivity(c in 0.0f64..20.0, amp in 0.0f64..3.0) {
        let m = square(24);
        let pot = sample_potential(&PotentialSpec::new(c, 2.0).unwrap(), &m).unwrap();
        let flow = sample_flow(&FlowSpec::cellular(amp, m.domain()), &m).unwrap();
        let op = assemble(&m, &pot, &flow).unwrap();
        let p = principal_eigenpair(&op, &EigenOptions::default()).unwrap();
        prop_assert!(p.psi.min() > 0.0);
        prop_assert!(p.lambda > 0.0);
    }
}
