use std::f64::consts::PI;
use std::sync::Arc;

use shapeopt::fem::{self, build_mesh, constant, EllipticProblem, Integrand, RadialBump};
use shapeopt::geometry::{area_perimeter, GaugeFunction, Order};
use shapeopt::linalg::{self, KrylovOptions};
use shapeopt::small::Vec2;

fn disk(n: usize) -> GaugeFunction<f64> {
    GaugeFunction::constant(n, 1.0).unwrap()
}

#[test]
fn unit_source_matches_radial_solution() {
    let mesh = build_mesh(5).unwrap();
    let st = fem::solve_state(&EllipticProblem::unit_source(), &disk(512), &mesh, &KrylovOptions::default()).unwrap();
    let err = st
        .mesh
        .nodes()
        .iter()
        .zip(&st.u)
        .map(|(p, &v)| (v - (1.0 - p.dot(*p)) / 4.0).abs())
        .fold(0.0, f64::max);
    assert!(err <= 5e-3, "max nodal error {err}");
    assert!(st.residual <= 1e-10);
    for &k in mesh.boundary() {
        assert_eq!(st.u[k], 0.0);
    }
}

#[test]
fn zero_source_gives_zero_state_and_energy() {
    let mesh = build_mesh(3).unwrap();
    let p = EllipticProblem::dirichlet(constant(0.0));
    let st = fem::solve_state(&p, &disk(128), &mesh, &KrylovOptions::default()).unwrap();
    assert!(st.u.iter().all(|&v| v == 0.0));
    assert_eq!(st.energy, 0.0);
}

/// `I₀(1)` by its power series.
fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= (x / 2.0) * (x / 2.0) / (k as f64 * k as f64);
        sum += term;
    }
    sum
}

/// Shooting for `U'' + U'/r − U + 1 = 0`, `U'(0) = 0`, `U(1) = 0`. Linear in the
/// unknown centre value, so two shots suffice.
fn shoot_centre_value() -> f64 {
    let integrate = |u0: f64| {
        let steps = 20000;
        // Start slightly off the axis with the series U ≈ u0 + (u0 − 1) r²/4.
        let r0 = 1e-6;
        let mut y = [u0 + (u0 - 1.0) * r0 * r0 / 4.0, (u0 - 1.0) * r0 / 2.0];
        let rhs = |r: f64, y: [f64; 2]| [y[1], y[0] - 1.0 - y[1] / r];
        let mut r = r0;
        let h = (1.0 - r0) / steps as f64;
        for _ in 0..steps {
            let k1 = rhs(r, y);
            let k2 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
            let k3 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
            let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            r += h;
        }
        y[0]
    };
    let (a, b) = (integrate(0.0), integrate(1.0));
    -a / (b - a)
}

#[test]
fn reaction_problem_matches_bessel_profile() {
    let oracle = shoot_centre_value();
    assert!((oracle - (1.0 - 1.0 / bessel_i0(1.0))).abs() < 1e-8);
    let p = EllipticProblem::unit_source().with_reaction(constant(1.0));
    let st = fem::solve_state(&p, &disk(256), &build_mesh(4).unwrap(), &KrylovOptions::default()).unwrap();
    let got = st.u[0];
    assert!((got - oracle).abs() / oracle < 1e-2, "{got} vs {oracle}");
}

#[test]
fn dirichlet_energy_of_disk() {
    let st =
        fem::solve_state(&EllipticProblem::unit_source(), &disk(512), &build_mesh(5).unwrap(), &KrylovOptions::default())
            .unwrap();
    let exact = -PI / 16.0;
    assert!((st.energy - exact).abs() / exact.abs() < 5e-3, "{}", st.energy);
    // The energy equals −½∫fU for the minimizer.
    let half_fu = fem::assembly::integrate(&st.mesh, &fem::Rule::order4(), |e, q, _| {
            let (v, _) = fem::assembly::p1_eval(&st.mesh, e, &fem::Rule::order4().points[q], &st.u);
            -0.5 * v
        });
    assert!((half_fu - st.energy).abs() < 1e-9);
}

#[test]
fn energy_converges_at_second_order() {
    let exact = -PI / 16.0;
    let errs: Vec<f64> = (2..6)
        .map(|l| {
            let st =
                fem::solve_state(&EllipticProblem::unit_source(), &disk(512), &build_mesh(l).unwrap(), &KrylovOptions::default())
                    .unwrap();
            (st.energy - exact).abs()
        })
        .collect();
    let order = (errs[2] / errs[3]).log2();
    assert!(order >= 1.8, "{errs:?}");
}

#[test]
fn area_integrand_matches_gauge_area() {
    let u = GaugeFunction::from_fn(256, |t: f64| 1.0 + 0.15 * (2.0 * t).cos() + 0.05 * (3.0 * t).sin()).unwrap();
    let p = EllipticProblem::unit_source().with_integrand(Integrand::area());
    let st = fem::solve_state(&p, &u, &build_mesh(5).unwrap(), &KrylovOptions::default()).unwrap();
    let m = area_perimeter(&u, None, Order::Zero).unwrap().m;
    assert!((st.energy - m).abs() / m < 1e-3);
    assert!((st.mesh.area() - st.energy).abs() < 1e-12);
}

#[test]
fn galerkin_orthogonality() {
    use rand::{Rng, SeedableRng};
    let u = GaugeFunction::from_fn(128, |t: f64| 1.0 + 0.1 * (3.0 * t).cos()).unwrap();
    let f = Arc::new(RadialBump::centered(2.0, 0.6));
    let p = EllipticProblem::dirichlet(f.clone()).with_reaction(constant(0.5));
    let opts = KrylovOptions::default();
    let st = fem::solve_state(&p, &u, &build_mesh(4).unwrap(), &opts).unwrap();
    let load = fem::assembly::assemble_load(&st.mesh, &fem::Rule::order4(), |_, _, x| {
        use fem::ScalarField;
        f.value(x)
    });
    let rhs = fem::assembly::restrict(&st.mesh, &load);
    let x = fem::assembly::restrict(&st.mesh, &st.u);
    let ax = st.operator.matrix().mul_vec(&x);
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let scale = linalg::norm2(&rhs);
    for _ in 0..20 {
        let z: Vec<f64> = (0..r.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dot = linalg::dot(&z, &r).abs();
        assert!(dot <= 1e-10 * scale * linalg::norm2(&z));
    }
}

#[test]
fn advection_problem_solves() {
    let p = EllipticProblem::unit_source()
        .with_advection(fem::VecField::new(constant(1.0), constant(-0.5)));
    assert!(!p.is_symmetric());
    let st = fem::solve_state(&p, &disk(256), &build_mesh(4).unwrap(), &KrylovOptions::default()).unwrap();
    assert!(st.residual <= 1e-10);
    // Drift to +x moves the maximum downstream.
    let right = st.value_near(Vec2::new(0.3, -0.15));
    let left = st.value_near(Vec2::new(-0.3, 0.15));
    assert!(right > left);
}

#[test]
fn rotation_by_one_grid_step_preserves_energy() {
    let u = GaugeFunction::from_fn(16, |t: f64| 1.0 + 0.2 * t.cos() + 0.1 * (2.0 * t).sin()).unwrap();
    let p = EllipticProblem::dirichlet(Arc::new(RadialBump::centered(1.0, 0.7)));
    let mesh = build_mesh(4).unwrap();
    let opts = KrylovOptions::default();
    let e0 = fem::solve_state(&p, &u, &mesh, &opts).unwrap().energy;
    let e1 = fem::solve_state(&p, &u.rotated(1), &mesh, &opts).unwrap().energy;
    assert!((e0 - e1).abs() <= 1e-9 * e0.abs(), "{e0} {e1}");
}

#[test]
fn single_precision_solve() {
    let st = fem::solve_state(
        &EllipticProblem::<f32>::unit_source(),
        &GaugeFunction::constant(128, 1.0f32).unwrap(),
        &build_mesh(3).unwrap(),
        &KrylovOptions::default(),
    )
    .unwrap();
    assert!((st.energy + std::f32::consts::PI / 16.0).abs() < 1e-2);
}
