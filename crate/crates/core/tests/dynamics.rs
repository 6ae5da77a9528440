mod common;

use std::f64::consts::PI;

use common::*;
use confocal::dynamics::*;
use confocal::lax::integral_family;
use confocal::linalg::{inv_pow_dot, max_abs_diff};
use confocal::sampling::{random_state, rng};
use confocal::Error;
use num_complex::Complex64 as C;

fn sphere() -> SystemSpec {
    SystemSpec::jacobi(spec(&[1.0, 1.0, 1.0]), 0.0).unwrap()
}

#[test]
fn great_circle_velocity() {
    let s = PhaseState::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
    let v = rhs(&sphere(), &s).unwrap();
    assert!(max_abs_diff(&v.dx, &[0.0, 1.0, 0.0]) < 1e-15);
    assert!(max_abs_diff(&v.dy, &[-1.0, 0.0, 0.0]) < 1e-15);
}

#[test]
fn hook_term_cancels_at_rest_on_sphere() {
    for sigma in [-1.3, 0.4, 2.0] {
        let sys = SystemSpec::jacobi(spec(&[1.0, 1.0, 1.0]), sigma).unwrap();
        let x = vec![0.6, 0.0, 0.8];
        let v = rhs(&sys, &PhaseState::new(x, vec![0.0; 3])).unwrap();
        assert!(v.dy.iter().all(|c| c.abs() < 1e-15));
    }
}

#[test]
fn rosochatius_with_zero_mu_is_jacobi() {
    let j = jacobi(0.7);
    let r = SystemSpec::jacobi_rosochatius(j.spec.clone(), 0.7, vec![0.0; 4]).unwrap();
    let s = random_state(&mut rng(1), &j).unwrap();
    assert_eq!(rhs(&j, &s).unwrap(), rhs(&r, &s).unwrap());
}

#[test]
fn double_flow_on_diagonal_duplicates_jacobi() {
    let j = jacobi(0.4);
    let d = double(0.4);
    let s = random_state(&mut rng(2), &j).unwrap();
    let sd = PhaseState::double(&s.x, &s.x, &s.y, &s.y);
    let (vj, vd) = (rhs(&j, &s).unwrap(), rhs(&d, &sd).unwrap());
    assert!(max_abs_diff(&vd.dx, &[vj.dx.clone(), vj.dx].concat()) < 1e-14);
    assert!(max_abs_diff(&vd.dy, &[vj.dy.clone(), vj.dy].concat()) < 1e-14);
}

#[test]
fn constraint_violation_and_singularities_are_reported() {
    let j = jacobi(0.0);
    let s = PhaseState::new(vec![2.0, 0.0, 0.0, 0.0], vec![0.0; 4]);
    assert!(matches!(rhs(&j, &s), Err(Error::ConstraintViolation { name: "F1", .. })));
    let r = jr();
    let mut s = random_state(&mut rng(3), &r).unwrap();
    s.x[0] = 0.0;
    s.x[1] = (AXES4[1] * (1.0 - s.x[2] * s.x[2] / AXES4[2] - s.x[3] * s.x[3] / AXES4[3])).sqrt();
    let s = project(&jacobi(0.0), &s).unwrap();
    let e = rhs(&r, &s).unwrap_err();
    assert!(matches!(e, Error::SingularAxis { index: 0, .. }));
    assert!(e.is_singularity());
}

#[test]
fn sphere_geodesic_period() {
    let s0 = PhaseState::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
    let traj = integrate(&sphere(), &s0, 2.0 * PI, 1e-3).unwrap();
    let last = traj.last().unwrap();
    assert!(max_abs_diff(&last.x, &s0.x) < 1e-8);
    assert!(max_abs_diff(&last.y, &s0.y) < 1e-8);
    assert!((last.t - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn jacobi_energy_and_joachimsthal_drift() {
    let sys = SystemSpec::jacobi(spec(&[1.0, 2.0, 3.0]), 0.0).unwrap();
    let s0 = random_state(&mut rng(4), &sys).unwrap();
    let jv = |s: &PhaseState| inv_pow_dot(sys.axes(), 1, &s.y, &s.y) * inv_pow_dot(sys.axes(), 2, &s.x, &s.x);
    let (h0, j0) = (energy(&sys, &s0).unwrap(), jv(&s0));
    for s in integrate(&sys, &s0, 10.0, 1e-3).unwrap().iter().step_by(500) {
        assert!(rel(energy(&sys, s).unwrap(), h0) < 1e-8);
        assert!(rel(jv(s), j0) < 1e-8);
        assert!(constraint_residuals(&sys, s).unwrap().iter().all(|r| r.abs() <= 1e-10));
    }
}

#[test]
fn integrator_is_fourth_order() {
    let sys = SystemSpec::jacobi(spec(&[1.0, 2.0, 3.0]), 0.5).unwrap();
    let s0 = random_state(&mut rng(5), &sys).unwrap();
    let reference = integrate(&sys, &s0, 1.0, 1e-4).unwrap().pop().unwrap();
    let err = |h: f64| {
        let s = integrate(&sys, &s0, 1.0, h).unwrap().pop().unwrap();
        max_abs_diff(&s.x, &reference.x).max(max_abs_diff(&s.y, &reference.y))
    };
    let ratio = err(0.04) / err(0.02);
    assert!((10.0..24.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn all_integrals_conserved() {
    for (sys, seed) in [(jacobi(0.5), 6), (jr(), 7), (hierarchy(2), 8), (hierarchy(3), 9)] {
        let s0 = random_state(&mut rng(seed), &sys).unwrap();
        let last = integrate(&sys, &s0, 10.0, 1e-3).unwrap().pop().unwrap();
        let (a, b) = (integral_family(&sys, &s0).unwrap(), integral_family(&sys, &last).unwrap());
        assert!(rel(b.hamiltonian, a.hamiltonian) < 1e-8, "{:?}", sys.kind);
        for (fa, fb) in a.f.unwrap().iter().zip(b.f.unwrap()) {
            assert!(rel(fb, *fa) < 1e-7, "{:?}: {fa} {fb}", sys.kind);
        }
    }
}

#[test]
fn symmetric_family_conserved() {
    let sys = symmetric_jr();
    let s0 = random_state(&mut rng(10), &sys).unwrap();
    let last = integrate(&sys, &s0, 10.0, 1e-3).unwrap().pop().unwrap();
    let (a, b) = (integral_family(&sys, &s0).unwrap(), integral_family(&sys, &last).unwrap());
    let flat = |f: &confocal::lax::IntegralFamily| -> Vec<f64> {
        let mut v = f.f_tilde.clone();
        v.extend(f.p_pairs.iter().map(|p| p.value));
        v.extend(f.l_sk.iter().flatten());
        v
    };
    for (u, v) in flat(&a).iter().zip(flat(&b)) {
        assert!(rel(v, *u) < 1e-7);
    }
}

#[test]
fn double_flow_integrals_and_variety() {
    let sys = double(0.3);
    let s0 = random_state(&mut rng(11), &sys).unwrap();
    let traj = integrate(&sys, &s0, 5.0, 1e-3).unwrap();
    let fam0 = integral_family(&sys, &s0).unwrap();
    let inv = |s: &PhaseState| {
        let (x, _, _, eta) = s.split_double();
        inv_pow_dot(sys.axes(), 1, x, eta)
    };
    for s in traj.iter().step_by(1000) {
        let fam = integral_family(&sys, s).unwrap();
        for (g0, g) in fam0.g.as_ref().unwrap().iter().zip(fam.g.as_ref().unwrap()) {
            assert!((g - g0).abs() < 1e-8);
        }
        for (f0, f) in fam0.f.as_ref().unwrap().iter().zip(fam.f.as_ref().unwrap()) {
            assert!(rel(*f, *f0) < 1e-8);
        }
        assert!(inv(s).abs() < 1e-8);
    }
}

#[test]
fn reparametrized_rhs_is_proportional() {
    let sys = double(0.3);
    let mut r = rng(12);
    for _ in 0..100 {
        let s = random_state(&mut r, &sys).unwrap();
        let (x, xi, _, _) = s.split_double();
        let w = inv_pow_dot(sys.axes(), 2, x, xi);
        let (v, vt) = (rhs(&sys, &s).unwrap(), reparametrized_rhs(&sys, &s).unwrap());
        let sc = v.scaled(w);
        assert!(max_abs_diff(&sc.dx, &vt.dx) < 1e-12 && max_abs_diff(&sc.dy, &vt.dy) < 1e-12);
    }
}

#[test]
fn torus_reduction_examples() {
    let z = [C::new(0.3, 0.0), C::new(-0.5, 0.0)];
    let p = [C::new(0.1, 0.0), C::new(0.2, 0.0)];
    let r = torus_reduce(&z, &p).unwrap();
    assert!(r.mu.iter().all(|m| *m == 0.0));
    assert!((r.x[0] - 0.3).abs() < 1e-15 && (r.y[0] - 0.1).abs() < 1e-15);
    let r = torus_reduce(&[C::new(0.0, 0.7)], &[C::new(0.0, 0.2)]).unwrap();
    assert!((r.x[0] - 0.7).abs() < 1e-15 && (r.y[0] - 0.2).abs() < 1e-15);
    assert!(r.mu[0].abs() < 1e-15 && (r.phases[0] - PI / 2.0).abs() < 1e-15);
    let z = [C::new(0.3, 0.4), C::new(-0.2, 0.9)];
    let p = [C::new(1.1, -0.4), C::new(0.5, 0.25)];
    let (z2, p2) = torus_reconstruct(&torus_reduce(&z, &p).unwrap()).unwrap();
    for k in 0..2 {
        assert!((z2[k] - z[k]).norm() < 1e-12 && (p2[k] - p[k]).norm() < 1e-12);
    }
    assert!(matches!(
        torus_reduce(&[C::new(0.0, 0.0)], &[C::new(1.0, 1.0)]),
        Ok(_) | Err(Error::ReductionSingular { .. })
    ));
}

#[test]
fn reduction_commutes_with_flow() {
    let axes = [1.0, 2.0, 3.5];
    let cs = complex(0.5);
    let z0 = random_state(&mut rng(13), &cs).unwrap();
    let (z, p) = z0.split_complex();
    let red = torus_reduce(&z, &p).unwrap();
    let jr = SystemSpec::jacobi_rosochatius(spec(&axes), 0.5, red.mu.iter().map(|m| m.abs()).collect()).unwrap();
    let s_real = project(&jr, &PhaseState::new(red.x.clone(), red.y.clone())).unwrap();
    assert!(max_abs_diff(&s_real.x, &red.x) < 1e-12);
    let tc = integrate(&cs, &z0, 5.0, 1e-3).unwrap();
    let tr = integrate(&jr, &s_real, 5.0, 1e-3).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in tc.iter().zip(&tr) {
        let (z, p) = a.split_complex();
        let r = torus_reduce(&z, &p).unwrap();
        worst = worst.max(max_abs_diff(&r.x, &b.x)).max(max_abs_diff(&r.y, &b.y));
    }
    assert!(worst < 1e-7, "{worst:e}");
}

#[test]
fn dirac_coordinate_brackets() {
    let sys = jacobi(0.0);
    let s = random_state(&mut rng(14), &sys).unwrap();
    let a = AXES4;
    let w = inv_pow_dot(&a, 2, &s.x, &s.x);
    for i in 0..4 {
        for j in 0..4 {
            let xi = |z: &[f64]| z[i];
            let xj = |z: &[f64]| z[j];
            let yj = |z: &[f64]| z[4 + j];
            assert_eq!(dirac_bracket(&sys.spec, &xi, &xj, &s, sys.ctol).unwrap(), 0.0);
            let v = dirac_bracket(&sys.spec, &xi, &yj, &s, sys.ctol).unwrap();
            let expect = f64::from(u8::from(i == j)) - s.x[i] * s.x[j] / (a[i] * a[j] * w);
            assert!((v - expect).abs() < 1e-8);
        }
    }
}

#[test]
fn dirac_bracket_antisymmetric_and_integrals_commute() {
    let sys = jr();
    let mut r = rng(15);
    let f = |z: &[f64]| z[0] * z[0] * z[5] + z[2] * z[7] * z[7] - z[1];
    let g = |z: &[f64]| z[3] * z[4] + z[6].powi(3) * z[1];
    for _ in 0..10 {
        let s = random_state(&mut r, &sys).unwrap();
        let (u, v) = (
            dirac_bracket(&sys.spec, &f, &g, &s, sys.ctol).unwrap(),
            dirac_bracket(&sys.spec, &g, &f, &s, sys.ctol).unwrap(),
        );
        assert!((u + v).abs() < 1e-10);
        use confocal::lax::{integral_value, IntegralId};
        for i in 0..4 {
            for j in i + 1..4 {
                let fi = |z: &[f64]| integral_value(&sys, IntegralId::F(i), z).unwrap();
                let fj = |z: &[f64]| integral_value(&sys, IntegralId::F(j), z).unwrap();
                assert!(dirac_bracket(&sys.spec, &fi, &fj, &s, sys.ctol).unwrap().abs() < 1e-6);
            }
        }
    }
}

#[test]
fn hamiltonian_vector_field_matches_rhs() {
    let sys = jr();
    let s = random_state(&mut rng(16), &sys).unwrap();
    let h = |z: &[f64]| energy(&sys, &PhaseState::from_flat(z, 0.0)).unwrap();
    let xf = hamiltonian_vector_field(&sys.spec, &h, &s, sys.ctol).unwrap();
    let v = rhs(&sys, &s).unwrap();
    let expect = [v.dx, v.dy].concat();
    assert!(max_abs_diff(&xf, &expect) < 1e-7, "{:e}", max_abs_diff(&xf, &expect));
}
