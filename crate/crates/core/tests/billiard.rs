use confocal::billiard::*;
use confocal::dynamics::{integrate, PhaseState, SystemSpec};
use confocal::geometry::tangency_value;
use confocal::linalg::{dot, max_abs_diff};
use confocal::sampling::{random_impact, rng};
use confocal::{EllipsoidSpec, Error};
use num_complex::Complex64 as C;

fn planar() -> BilliardSpec {
    BilliardSpec::new(vec![2.0, 1.0], 0.0, vec![]).unwrap()
}

fn mu_pattern(n: usize, pat: &str) -> Vec<f64> {
    match pat {
        "one" => (0..n).map(|j| if j == n - 1 { 0.3 } else { 0.0 }).collect(),
        "all" => vec![0.3; n],
        _ => vec![0.0; n],
    }
}

fn axes(n: usize) -> Vec<f64> {
    if n == 2 {
        vec![2.0, 1.0]
    } else {
        vec![3.0, 2.0, 1.0]
    }
}

/// Straight-line chord plus reflection, solved as a quadratic.
fn ray_trace(a: &[f64], x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let qa: f64 = (0..a.len()).map(|i| y[i] * y[i] / a[i]).sum();
    let qb: f64 = (0..a.len()).map(|i| 2.0 * x[i] * y[i] / a[i]).sum();
    let t = -qb / qa;
    let xn: Vec<f64> = (0..a.len()).map(|i| x[i] + t * y[i]).collect();
    let yn = reflect(a, &xn, y);
    (xn, yn)
}

#[test]
fn spec_validation() {
    assert!(BilliardSpec::new(vec![2.0, -1.0], 0.0, vec![]).is_err());
    assert!(BilliardSpec::new(vec![2.0, 1.0], 0.0, vec![0.1, -0.2]).is_err());
    assert!(BilliardSpec::new(vec![2.0, 1.0], 0.0, vec![0.1]).is_err());
    let s = ImpactState::new(vec![1.0, 0.0], vec![0.0, 1.0]);
    assert!(matches!(s.validate(&planar()), Err(Error::ConstraintViolation { .. })));
}

#[test]
fn ellipse_chord_map_matches_ray_trace() {
    let spec = planar();
    let mut s = random_impact(&mut rng(1), &spec);
    let (mut x, mut y) = (s.x.clone(), s.y.clone());
    for _ in 0..200 {
        s = jr_step(&spec, &s).unwrap();
        (x, y) = ray_trace(&spec.axes, &x, &y);
        assert!(max_abs_diff(&s.x, &x) < 1e-10 && max_abs_diff(&s.y, &y) < 1e-10);
        x = s.x.clone();
        y = s.y.clone();
    }
}

#[test]
fn fedorov_real_slice_is_chord_map_and_jr() {
    let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], 0.0, vec![]).unwrap();
    let s = random_impact(&mut rng(2), &spec);
    let c = |v: &[f64]| v.iter().map(|t| C::new(*t, 0.0)).collect::<Vec<_>>();
    let (z, p) = fedorov_step(&spec.axes, 0.0, &c(&s.x), &c(&s.y)).unwrap();
    let (xr, yr) = ray_trace(&spec.axes, &s.x, &s.y);
    for i in 0..3 {
        assert!((z[i] - C::new(xr[i], 0.0)).norm() < 1e-10 && (p[i] - C::new(yr[i], 0.0)).norm() < 1e-10);
    }
    for sigma in [-0.8, 0.4] {
        let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], sigma, vec![]).unwrap();
        let s = random_impact(&mut rng(3), &spec);
        let (z, p) = fedorov_step(&spec.axes, sigma, &c(&s.x), &c(&s.y)).unwrap();
        let t = jr_step(&spec, &s).unwrap();
        for i in 0..3 {
            assert!((z[i].re - t.x[i]).abs() < 1e-12 && z[i].im == 0.0);
            assert!((p[i].re - t.y[i]).abs() < 1e-12 && p[i].im == 0.0);
        }
    }
}

#[test]
fn fedorov_invariants_and_equivariance() {
    let a = [3.0, 2.0, 1.0];
    let sigma = -0.5;
    let z = vec![C::new(0.9, 0.6), C::new(-0.4, 0.5), C::new(0.2, -0.3)];
    let r = z.iter().zip(a).map(|(v, ai)| v.norm_sqr() / ai).sum::<f64>().sqrt();
    let z: Vec<C> = z.iter().map(|v| v / r).collect();
    let n: Vec<C> = z.iter().zip(a).map(|(v, ai)| v / ai).collect();
    let p = vec![C::new(0.2, -0.4), C::new(0.5, 0.1), C::new(-0.3, 0.7)];
    // make the normal component inward
    let pn = p.iter().zip(&n).map(|(u, v)| (u * v.conj()).re).sum::<f64>();
    let nn = n.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let p: Vec<C> = p.iter().zip(&n).map(|(u, v)| u - v * ((pn + 0.5) / nn)).collect();
    let jfun = |z: &[C], p: &[C]| 2.0 * z.iter().zip(p).zip(a).map(|((zi, pi), ai)| (zi * pi.conj()).re / ai).sum::<f64>();
    let (z1, p1) = fedorov_step(&a, sigma, &z, &p).unwrap();
    let b: f64 = z1.iter().zip(a).map(|(v, ai)| v.norm_sqr() / ai).sum();
    assert!((b - 1.0).abs() < 1e-10);
    assert!((jfun(&z1, &p1).abs() - jfun(&z, &p).abs()).abs() < 1e-12);
    let th = [0.3, -1.1, 2.0];
    let rot = |v: &[C]| v.iter().zip(th).map(|(c, t)| c * C::from_polar(1.0, t)).collect::<Vec<_>>();
    let (z2, p2) = fedorov_step(&a, sigma, &rot(&z), &rot(&p)).unwrap();
    let (z1r, p1r) = (rot(&z1), rot(&p1));
    for i in 0..3 {
        assert!((z2[i] - z1r[i]).norm() < 1e-12 && (p2[i] - p1r[i]).norm() < 1e-12);
    }
}

#[test]
fn jr_step_is_the_torus_reduction_of_fedorov() {
    let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], -0.4, vec![0.3, 0.0, 0.2]).unwrap();
    let s = random_impact(&mut rng(4), &spec);
    let z: Vec<C> = s.x.iter().map(|v| C::new(*v, 0.0)).collect();
    let p: Vec<C> = (0..3)
        .map(|j| C::new(s.y[j], if spec.mu[j] == 0.0 { 0.0 } else { spec.mu[j] / s.x[j] }))
        .collect();
    let (z1, p1) = fedorov_step(&spec.axes, spec.sigma, &z, &p).unwrap();
    let red = confocal::dynamics::torus_reduce(&z1, &p1).unwrap();
    let t = jr_step(&spec, &s).unwrap();
    for j in 0..3 {
        let x = if spec.mu[j] == 0.0 { z1[j].re } else { red.x[j] };
        let y = if spec.mu[j] == 0.0 { p1[j].re } else { red.y[j] };
        assert!((x - t.x[j]).abs() < 1e-12 && (y - t.y[j]).abs() < 1e-12, "{j}");
        assert!((red.mu[j] - spec.mu[j]).abs() < 1e-12);
    }
}

#[test]
fn map_matches_oracle_over_battery() {
    for sigma in [-1.0, 0.0, 0.3] {
        for n in [2, 3] {
            for pat in ["zero", "one", "all"] {
                let spec = BilliardSpec::new(axes(n), sigma, mu_pattern(n, pat)).unwrap();
                let s = random_impact(&mut rng(10 + n as u64), &spec);
                let devs = map_vs_oracle(&spec, &s, 15).unwrap();
                let worst = devs.iter().cloned().fold(0.0, f64::max);
                assert!(worst < 1e-6, "σ={sigma} n={n} {pat}: {worst:e}");
            }
        }
    }
}

#[test]
fn oracle_free_flight_and_closed_forms() {
    let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], 0.0, vec![]).unwrap();
    let s = random_impact(&mut rng(5), &spec);
    let o = oracle_step(&spec, &s).unwrap();
    let (xr, yr) = ray_trace(&spec.axes, &s.x, &s.y);
    assert!(max_abs_diff(&o.x, &xr) < 1e-9 && max_abs_diff(&o.y, &yr) < 1e-9);
    // σ < 0: x(t) = x cosh(ωt) + y sinh(ωt)/ω; event root by bisection on the closed form
    let sigma = -0.7;
    let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], sigma, vec![]).unwrap();
    let s = random_impact(&mut rng(6), &spec);
    let w = (-sigma).sqrt();
    let pos = |t: f64| -> Vec<f64> { (0..3).map(|i| s.x[i] * (w * t).cosh() + s.y[i] * (w * t).sinh() / w).collect() };
    let b = |t: f64| spec.boundary_value(&pos(t));
    let mut t = 1e-3;
    while b(t) < 0.0 {
        t += 1e-3;
    }
    let (mut lo, mut hi) = (t - 1e-3, t);
    for _ in 0..80 {
        let m = 0.5 * (lo + hi);
        if b(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    let o = oracle_step(&spec, &s).unwrap();
    assert!(max_abs_diff(&o.x, &pos(lo)) < 1e-9);
}

#[test]
fn reflection_law() {
    let a = [3.0, 2.0, 1.0];
    let spec = BilliardSpec::new(a.to_vec(), 0.0, vec![]).unwrap();
    let s = random_impact(&mut rng(7), &spec);
    let yin = vec![0.3, -0.8, 0.45];
    let yout = reflect(&a, &s.x, &yin);
    assert!((dot(&yin, &yin) - dot(&yout, &yout)).abs() < 1e-12);
    let n: Vec<f64> = s.x.iter().zip(a).map(|(v, ai)| v / ai).collect();
    assert!((dot(&yin, &n) + dot(&yout, &n)).abs() < 1e-12);
}

#[test]
fn impacts_stay_on_boundary_and_j_is_preserved() {
    let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], -0.5, vec![0.2, 0.0, 0.3]).unwrap();
    let s0 = random_impact(&mut rng(8), &spec);
    let orbit = run_orbit(&spec, &s0, 100).unwrap();
    let j0 = spec.joachimsthal(&s0).abs();
    let e0 = spec.energy(&s0);
    for s in &orbit.impacts {
        assert!(spec.boundary_value(&s.x).abs() <= BOUNDARY_TOL);
        assert!((spec.joachimsthal(s).abs() - j0).abs() < 1e-9);
        assert!((spec.energy(s) - e0).abs() < 1e-9);
        assert!(s.x[0] > 0.0 && s.x[2] > 0.0);
    }
}

#[test]
fn discrete_lax_pair() {
    for (sigma, mu) in [(0.0, vec![0.0; 3]), (0.3, vec![0.3, 0.0, 0.2]), (-1.0, vec![0.1, 0.2, 0.3])] {
        let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], sigma, mu).unwrap();
        let s0 = random_impact(&mut rng(9), &spec);
        let orbit = run_orbit(&spec, &s0, 100).unwrap();
        for rep in &orbit.lax {
            assert!(rep.det_drift < 1e-9);
            assert!(rep.conjugation_residual < 1e-9, "{}", rep.conjugation_residual);
            assert!(rep.signs.iter().all(|s| *s == 1));
        }
        let lam = orbit.lambdas.clone();
        assert_eq!(lam.len(), 5);
        for l in &lam {
            let d0 = impact_lax_l(&spec, &s0.x, &s0.y, *l).unwrap().determinant();
            let last = orbit.impacts.last().unwrap();
            let d1 = impact_lax_l(&spec, &last.x, &last.y, *l).unwrap().determinant();
            assert!((d1 - d0).abs() / (1.0 + d0.abs()) < 1e-8);
            let t = impact_lax_l(&spec, &last.x, &last.y, *l).unwrap().trace();
            assert!(t.abs() < 1e-15);
        }
    }
}

#[test]
fn discrete_lax_recovers_reflected_representative() {
    let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], 0.2, vec![0.0, 0.3, 0.0]).unwrap();
    let s = random_impact(&mut rng(12), &spec);
    let mut next = jr_step(&spec, &s).unwrap();
    next.x[2] = -next.x[2];
    next.y[2] = -next.y[2];
    // L is even in each uncharged pair (x_j, y_j), so the reflected
    // representative satisfies the same conjugation
    let rep = discrete_lax_check(&spec, &s, &next, &default_lambdas(&spec.axes)).unwrap();
    assert!(rep.conjugation_residual < 1e-9 && rep.det_drift < 1e-9);
    assert_eq!(rep.signs[1], 1);
}

fn classical_caustic_by_scan(spec: &BilliardSpec, s: &ImpactState) -> Vec<f64> {
    // sign changes of the tangency function on a fine grid, then bisection
    let f = |e: f64| tangency_value(&spec.axes, &s.x, &s.y, e, 0.0).unwrap();
    let mut out = vec![];
    let mut grid: Vec<f64> = (1..4000).map(|i| -3.0 + 6.0 * i as f64 / 4000.0).collect();
    grid.retain(|e| spec.axes.iter().all(|a| (e - a).abs() > 1e-6));
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        if spec.axes.iter().any(|a| *a > lo && *a < hi) || f(lo).signum() == f(hi).signum() {
            continue;
        }
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if f(m).signum() == f(lo).signum() {
                lo = m;
            } else {
                hi = m;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

#[test]
fn planar_caustic_matches_tangency_scan() {
    let spec = planar();
    let s0 = random_impact(&mut rng(13), &spec);
    let orbit = run_orbit(&spec, &s0, 50).unwrap();
    let rep = orbit_caustics(&spec, &orbit).unwrap();
    assert_eq!(rep.eta.len(), 1);
    assert!(rep.count_ok());
    let scan = classical_caustic_by_scan(&spec, &s0);
    assert_eq!(scan.len(), 1);
    assert!((scan[0] - rep.eta[0]).abs() < 1e-9);
    assert!(rep.max_drift < 1e-7);
    assert!(rep.tangency_max.unwrap() < 1e-8);
}

#[test]
fn caustic_counts() {
    let cases = [
        (0.0, vec![0.0, 0.0], 1),
        (0.0, vec![0.0, 0.3], 2),
        (0.4, vec![0.0, 0.0], 2),
        (-0.6, vec![0.2, 0.3], 4),
        (0.0, vec![0.0, 0.0, 0.0], 2),
        (0.3, vec![0.2, 0.0, 0.1], 5),
    ];
    for (sigma, mu, expected) in cases {
        let n = mu.len();
        let spec = BilliardSpec::new(axes(n), sigma, mu).unwrap();
        assert_eq!(expected_caustics(&spec), expected);
        let s0 = random_impact(&mut rng(14 + n as u64), &spec);
        let orbit = run_orbit(&spec, &s0, 50).unwrap();
        let rep = orbit_caustics(&spec, &orbit).unwrap();
        assert!(rep.count_ok(), "σ={sigma} {:?}: {:?}", spec.mu, rep.eta);
        assert!(rep.max_drift < 1e-7, "{}", rep.max_drift);
    }
}

#[test]
fn axis_orbit_is_two_periodic() {
    let spec = planar();
    let s0 = ImpactState::new(vec![2f64.sqrt(), 0.0], vec![-1.0, 0.0]);
    let s1 = jr_step(&spec, &s0).unwrap();
    assert!(max_abs_diff(&s1.x, &[-(2f64.sqrt()), 0.0]) < 1e-15);
    let s2 = jr_step(&spec, &s1).unwrap();
    assert!(s2.max_diff(&s0) < 1e-15);
    let rep = poncelet_detect(&spec, &s0, 12, 1e-12).unwrap();
    assert_eq!(rep.period, Some(2));
}

#[test]
fn three_periodic_orbit_and_companion() {
    let spec = planar();
    let (eta, s0) = shoot_periodic(&spec, 3, 1).unwrap();
    assert!(eta > 0.0 && eta < 1.0);
    let rep = poncelet_detect(&spec, &s0, 12, 1e-6).unwrap();
    assert_eq!(rep.period, Some(3));
    let comp = rep.companion.clone().unwrap();
    assert_eq!(comp.period, Some(3));
    assert!(rep.closes());
    // the companion starts elsewhere but shares the caustic
    assert!(comp.start.max_diff(&s0) > 0.1);
    let ec = caustic_parameters(&spec, &comp.start).unwrap();
    assert!((ec[0] - eta).abs() < 1e-9);
    // winding 1 / period 5 as well
    let (_, s5) = shoot_periodic(&spec, 5, 1).unwrap();
    assert_eq!(poncelet_detect(&spec, &s5, 12, 1e-6).unwrap().period, Some(5));
}

#[test]
fn grazing_and_singular_cases() {
    let spec = planar();
    let s = ImpactState::new(vec![2f64.sqrt(), 0.0], vec![0.0, 1.0]);
    assert!(matches!(jr_step(&spec, &s), Err(Error::GrazingOrSingular(_))));
    let spec = BilliardSpec::new(vec![2.0, 1.0], 0.0, vec![0.0, 0.3]).unwrap();
    let s = ImpactState::new(vec![2f64.sqrt(), 0.0], vec![-1.0, 0.2]);
    assert!(matches!(jr_step(&spec, &s), Err(Error::SingularAxis { index: 1, .. })));
    let err = run_orbit(&spec, &s, 3).unwrap_err();
    assert!(matches!(err, Error::Bounce { index: 0, .. }) && err.is_singularity());
}

#[test]
fn admissibility_and_escape() {
    let spec = BilliardSpec::new(vec![2.0, 1.0], 4.0, vec![]).unwrap();
    // slow start at the minor vertex: too little energy at the major vertices
    let s = ImpactState::new(vec![0.0, 1.0], vec![-0.05, -0.1]);
    assert!(spec.check_admissible(&s).is_err());
    assert!(matches!(run_orbit(&spec, &s, 1), Err(Error::Bounce { index: 0, .. })));
    let fast = ImpactState::new(vec![0.0, 1.0], vec![-2.0, -1.0]);
    assert!(spec.check_admissible(&fast).is_ok());
    let o = oracle_step_with(&spec, &fast, OracleOptions { t_max: 1e-2, ..Default::default() });
    assert!(matches!(o, Err(Error::Escape { .. })));
}

fn segment_distance(p: &[f64], q: &[f64], x: &[f64]) -> f64 {
    let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let w: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
    let t = (dot(&w, &d) / dot(&d, &d)).clamp(0.0, 1.0);
    let r: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a - t * b).collect();
    dot(&r, &r).sqrt()
}

#[test]
fn limit_consistency() {
    // impacts of nearly tangent orbits approach the geodesic on the boundary
    let a = vec![3.0, 2.0, 1.0];
    let spec = BilliardSpec::new(a.clone(), 0.0, vec![]).unwrap();
    let sys = SystemSpec::jacobi(EllipsoidSpec::new(a.clone()).unwrap(), 0.0).unwrap();
    let x0: Vec<f64> = {
        let u = [1.0, 0.8, 0.5];
        let r: f64 = u.iter().zip(&a).map(|(v, ai)| v * v / ai).sum::<f64>().sqrt();
        u.iter().map(|v| v / r).collect()
    };
    let n: Vec<f64> = x0.iter().zip(&a).map(|(v, ai)| v / ai).collect();
    let nn = dot(&n, &n).sqrt();
    let t0 = {
        let v = [0.3, -1.0, 0.7];
        let c = dot(&v, &n) / (nn * nn);
        let t: Vec<f64> = v.iter().zip(&n).map(|(vi, ni)| vi - c * ni).collect();
        let l = dot(&t, &t).sqrt();
        t.iter().map(|ti| ti / l).collect::<Vec<f64>>()
    };
    let geo = integrate(&sys, &PhaseState::new(x0.clone(), t0.clone()), 1.5, 1e-3).unwrap();
    let dist = |eps: f64| -> f64 {
        let y: Vec<f64> = t0.iter().zip(&n).map(|(t, ni)| t - eps * ni / nn).collect();
        let mut s = ImpactState::new(x0.clone(), y);
        let mut worst: f64 = 0.0;
        let mut travelled = 0.0;
        while travelled < 1.2 {
            let next = jr_step(&spec, &s).unwrap();
            let d: Vec<f64> = next.x.iter().zip(&s.x).map(|(u, v)| u - v).collect();
            travelled += dot(&d, &d).sqrt();
            s = next;
            let near = geo.windows(2).map(|w| segment_distance(&w[0].x, &w[1].x, &s.x)).fold(f64::INFINITY, f64::min);
            worst = worst.max(near);
        }
        worst
    };
    let ds: Vec<f64> = [0.08, 0.04, 0.02, 0.01].iter().map(|e| dist(*e)).collect();
    for w in ds.windows(2) {
        assert!(w[1] < w[0], "{ds:?}");
    }
    assert!(ds[3] < 1e-3, "{ds:?}");
}
