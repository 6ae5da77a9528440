mod common;

use common::*;
use confocal::dynamics::{integrate, PhaseState, SystemSpec};
use confocal::lax::*;
use confocal::sampling::{random_state, rng};
use confocal::Error;

fn residual_decays(sys: &SystemSpec, which: LaxSize, seed: u64) {
    let mut r = rng(seed);
    for _ in 0..3 {
        let s = random_state(&mut r, sys).unwrap();
        let fine = lax_residual(sys, &s, which, 0.37, 1e-5).unwrap();
        assert!(fine < 1e-7, "{:?} residual {fine:e}", sys.kind);
        let r1 = lax_residual(sys, &s, which, 0.37, 2e-2).unwrap();
        let r2 = lax_residual(sys, &s, which, 0.37, 1e-2).unwrap();
        let order = (r1 / r2).log2();
        assert!(order > 1.8, "{:?} order {order}", sys.kind);
    }
}

#[test]
fn small_pairs_satisfy_lax_equation() {
    residual_decays(&jacobi(0.0), LaxSize::Small, 1);
    residual_decays(&jacobi(0.7), LaxSize::Small, 2);
    residual_decays(&jr(), LaxSize::Small, 3);
    residual_decays(&double(0.4), LaxSize::Small, 4);
    residual_decays(&complex(0.5), LaxSize::Small, 5);
    for m in 1..=3 {
        residual_decays(&hierarchy(m), LaxSize::Small, 6 + m as u64);
    }
}

#[test]
fn big_pairs_satisfy_lax_equation() {
    residual_decays(&jacobi(0.0), LaxSize::Big, 11);
    residual_decays(&jacobi(-0.8), LaxSize::Big, 12);
    residual_decays(&double(0.4), LaxSize::Big, 13);
}

#[test]
fn free_space_pair() {
    let sys = SystemSpec::free_jr(spec(&[2.0, 1.0, 0.6]), -0.4, vec![0.0, 0.3, 0.2]).unwrap();
    residual_decays(&sys, LaxSize::Small, 14);
}

#[test]
fn rosochatius_with_zero_mu_matches_jacobi() {
    let j = jacobi(0.7);
    let r = SystemSpec::jacobi_rosochatius(j.spec.clone(), 0.7, vec![0.0; 4]).unwrap();
    let s = random_state(&mut rng(3), &j).unwrap();
    let lj = match build_lax(&j, &s, LaxSize::Small).unwrap() {
        LaxPair::Small(p) => p,
        _ => unreachable!(),
    };
    let lr = match build_lax(&r, &s, LaxSize::Small).unwrap() {
        LaxPair::Small(p) => p,
        _ => unreachable!(),
    };
    for lam in [0.37, -2.0] {
        assert_eq!(lj.l(lam).unwrap(), lr.l(lam).unwrap());
    }
}

#[test]
fn jacobi_entries_match_direct_forms() {
    let sys = jacobi(0.0);
    let s = random_state(&mut rng(8), &sys).unwrap();
    let p = match build_lax(&sys, &s, LaxSize::Small).unwrap() {
        LaxPair::Small(p) => p,
        _ => unreachable!(),
    };
    for lam in [0.37, 5.5] {
        let q = |u: &[f64], v: &[f64]| -> f64 { (0..4).map(|i| u[i] * v[i] / (lam - AXES4[i])).sum() };
        let l = p.l(lam).unwrap();
        assert!((l[(0, 0)].re - q(&s.x, &s.y)).abs() < 1e-14);
        assert!((l[(0, 1)].re - q(&s.y, &s.y)).abs() < 1e-14);
        assert!((l[(1, 0)].re + 1.0 + q(&s.x, &s.x)).abs() < 1e-14);
        assert!(l.trace().norm() < 1e-14);
    }
}

#[test]
fn big_pair_needs_invariant_variety() {
    let sys = double(0.3);
    let a = AXES4;
    let x: Vec<f64> = a.iter().map(|v| (v / 4.0).sqrt()).collect();
    let xi = x.clone();
    let y = vec![0.0; 4];
    let mut eta = vec![0.0; 4];
    // G2 = 0 but <A^-1 x, η> = -<A^-1 y, ξ> = 0 fails when η has a normal part
    eta[0] = 0.5;
    let s = PhaseState::double(&x, &xi, &y, &eta);
    assert!(matches!(build_lax(&sys, &s, LaxSize::Big), Err(Error::InvariantVariety { .. })));
    assert!(matches!(build_lax(&jr(), &s, LaxSize::Big), Err(_)));
}

#[test]
fn det_l_matches_integrals() {
    // distinct axes: det L = σ + Σ f_i/(λ - a_i) + Σ μ_i²/(λ - a_i)²
    for sys in [jacobi(0.0), jr(), hierarchy(3)] {
        let s = random_state(&mut rng(21), &sys).unwrap();
        let fam = integral_family(&sys, &s).unwrap();
        let f = fam.f_values().unwrap();
        for lam in [0.37f64, -1.1, 2.2, 4.4, 9.0] {
            let poly: f64 = sys.hierarchy_sigmas().iter().enumerate().map(|(k, c)| c * lam.powi(k as i32)).sum();
            let expected = poly
                + (0..4).map(|i| f[i] / (lam - AXES4[i]) + sys.mu[i].powi(2) / (lam - AXES4[i]).powi(2)).sum::<f64>();
            let d = det_l(&sys, &s, lam).unwrap();
            assert!((d - expected).abs() < 1e-10 * (1.0 + expected.abs()), "{:?}: {d} vs {expected}", sys.kind);
        }
        assert!((f.iter().sum::<f64>() - 2.0 * fam.hamiltonian).abs() < 1e-10);
    }
}

#[test]
fn j_integral_equals_weighted_f_sum() {
    for sys in [jacobi(0.0), jacobi(0.6)] {
        let s = random_state(&mut rng(4), &sys).unwrap();
        let fam = integral_family(&sys, &s).unwrap();
        let f = fam.f_values().unwrap();
        let sum: f64 = f.iter().zip(AXES4).map(|(fi, a)| -fi / (a * a)).sum();
        assert!((fam.j.unwrap() - sum).abs() < 1e-12);
    }
}

#[test]
fn complex_integrals_are_conserved() {
    let sys = complex(0.5);
    let s = random_state(&mut rng(4), &sys).unwrap();
    let last = integrate(&sys, &s, 3.0, 1e-3).unwrap().pop().unwrap();
    let (a, b) = (integral_family(&sys, &s).unwrap(), integral_family(&sys, &last).unwrap());
    assert!(rel(b.j.unwrap(), a.j.unwrap()) < 1e-10);
    for (fa, fb) in a.f.as_ref().unwrap().iter().zip(b.f.as_ref().unwrap()) {
        assert!(rel(*fb, *fa) < 1e-10);
    }
    assert!((a.f.unwrap().iter().sum::<f64>() - 2.0 * a.hamiltonian).abs() < 1e-10);
}

#[test]
fn complex_j_identity_carries_imaginary_cross_term() {
    use confocal::dynamics::PhaseState;
    use num_complex::Complex64 as C;
    let axes = [1.0, 2.0, 3.5];
    let sys = complex(0.5);
    let weighted = |s: &PhaseState| -> f64 {
        let f = integral_family(&sys, s).unwrap().f.unwrap();
        f.iter().zip(axes).map(|(fi, a)| -fi / (a * a)).sum()
    };
    let mut r = rng(4);
    for _ in 0..10 {
        let s = random_state(&mut r, &sys).unwrap();
        let (z, p) = s.split_complex();
        let c: C = (0..3).map(|i| z[i] * p[i].conj() / axes[i]).sum();
        let d: C = (0..3).map(|i| z[i] * p[i].conj() / (axes[i] * axes[i])).sum();
        let j = integral_family(&sys, &s).unwrap().j.unwrap();
        assert!((weighted(&s) - (j - 2.0 * (c.conj() * d).re)).abs() < 1e-12);
    }
    // with real data the cross term vanishes and J = -Σ f_i / a_i²
    let rs = random_state(&mut rng(5), &jacobi(0.5)).unwrap();
    let x: Vec<f64> = [1.0f64, 2.0, 3.5].iter().map(|a| (a / 3.0).sqrt()).collect();
    let n: Vec<f64> = x.iter().zip(axes).map(|(v, a)| v / a).collect();
    let mut y = rs.y[..3].to_vec();
    let k: f64 = y.iter().zip(&n).map(|(u, v)| u * v).sum::<f64>() / n.iter().map(|v| v * v).sum::<f64>();
    y.iter_mut().zip(&n).for_each(|(u, v)| *u -= k * v);
    let z: Vec<C> = x.iter().map(|v| C::new(*v, 0.0)).collect();
    let p: Vec<C> = y.iter().map(|v| C::new(*v, 0.0)).collect();
    let s = PhaseState::complex(&z, &p);
    let j = integral_family(&sys, &s).unwrap().j.unwrap();
    assert!((weighted(&s) - j).abs() < 1e-12);
}

#[test]
fn symmetric_family_identities() {
    let sys = symmetric_jr();
    let mut r = rng(5);
    for _ in 0..20 {
        let s = random_state(&mut r, &sys).unwrap();
        let fam = integral_family(&sys, &s).unwrap();
        assert!(matches!(fam.f_values(), Err(Error::SymmetricSpec)));
        assert!((fam.f_tilde.iter().sum::<f64>() - 2.0 * fam.hamiltonian).abs() < 1e-10);
        assert!(peta_residual(&sys, &s).unwrap().abs() < 1e-9);
        for (s_idx, l) in fam.l_sk.iter().enumerate() {
            assert_eq!(*l.last().unwrap(), fam.p_s[s_idx]);
        }
    }
}

#[test]
fn noether_squares_without_rosochatius() {
    let sys = SystemSpec::jacobi(spec(&[1.2, 1.2, 2.5, 2.5]), 0.0).unwrap();
    let s = random_state(&mut rng(6), &sys).unwrap();
    let fam = integral_family(&sys, &s).unwrap();
    for p in &fam.p_pairs {
        let phi = s.y[p.i] * s.x[p.j] - s.x[p.i] * s.y[p.j];
        assert!((p.value - phi * phi).abs() < 1e-15);
    }
}

#[test]
fn psi_degree_and_roots() {
    // distinct axes, σ = 0, μ = 0: deg Ψ = n (axes count - 1)
    let sys = jacobi(0.0);
    let s = random_state(&mut rng(9), &sys).unwrap();
    let psi = psi_poly(&sys, &s).unwrap();
    assert_eq!(psi.degree(), 3);
    for lam in [0.3, 1.3, 5.0] {
        let direct = psi.eval_direct(lam).unwrap();
        assert!((psi.eval(lam) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
    }
    let roots = psi.real_roots().unwrap();
    for r in &roots {
        assert!(det_l(&sys, &s, *r).unwrap().abs() < 1e-8);
    }
    // σ ≠ 0 with d charged axes: n + 1 + d real roots of the (n+1)-axis Ψ
    let sys = jr();
    let s = random_state(&mut rng(10), &sys).unwrap();
    let psi = psi_poly(&sys, &s).unwrap();
    assert_eq!(psi.degree(), 4 + 3);
}

#[test]
fn spectral_invariants_are_conserved() {
    let sys = jr();
    let s0 = random_state(&mut rng(12), &sys).unwrap();
    let traj = integrate(&sys, &s0, 2.0, 1e-3).unwrap();
    let last = traj.last().unwrap();
    for lam in [0.37, -1.3, 5.1] {
        let (a, b) = (det_l(&sys, &s0, lam).unwrap(), det_l(&sys, last, lam).unwrap());
        assert!(rel(b, a) < 1e-8, "{a} {b}");
    }
}

#[test]
fn brackets_vanish_on_symmetric_ellipsoid() {
    let sys = symmetric_jr();
    let pairs = listed_pairs(&sys);
    assert!(!pairs.is_empty());
    let mut r = rng(15);
    for _ in 0..5 {
        let s = random_state(&mut r, &sys).unwrap();
        for rec in commutation_suite(&sys, &s, &pairs).unwrap() {
            assert!(rec.value < 1e-6, "{} = {:e}", rec.pair, rec.value);
        }
    }
}

#[test]
fn rank_dimensions_symmetric() {
    let sys = symmetric_jr();
    let mut r = rng(16);
    let mut hits = 0;
    for _ in 0..10 {
        let s = random_state(&mut r, &sys).unwrap();
        let rep = rank_dimensions(&sys, &s).unwrap();
        assert_eq!((rep.expected_f, rep.expected_k), (3, 3));
        hits += usize::from(rep.matches());
    }
    assert!(hits >= 9);
}
