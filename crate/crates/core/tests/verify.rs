use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use shapeopt::fem::{build_mesh, Constant, EllipticProblem, Field, Integrand, RadialBump};
use shapeopt::geometry::{area_perimeter, GaugeFunction, Order};
use shapeopt::shapecalc::{Method, Profile, ShapeContext, ShapeOptions};
use shapeopt::verify::*;
use shapeopt::Error;

fn bump_problem(scale: f64) -> EllipticProblem<f64> {
    let f: Field<f64> = Arc::new(RadialBump::centered(scale, 0.5));
    EllipticProblem::dirichlet(f).named("bump")
}

fn disk(n: usize) -> GaugeFunction<f64> {
    GaugeFunction::constant(n, 1.0).unwrap()
}

fn cos_mode(u: &GaugeFunction<f64>, k: usize) -> Vec<f64> {
    u.angles().iter().map(|t| (k as f64 * t).cos()).collect()
}

/// For `f = (1 − 4r²)³` the state is radial and the rotated modes decouple;
/// separation of variables outside the support gives
/// `e''(cos kθ, cos kθ) = F²(k − ½)/(4π)` with `F = ∫f = π/16`.
#[test]
fn bump_second_derivative_matches_mode_formula() {
    let prob = bump_problem(1.0);
    let u = disk(64);
    let mesh = build_mesh::<f64>(5).unwrap();
    let opts = ShapeOptions { profile: Profile::Cutoff { r0: 0.6, r1: 0.9 }, method: Method::Adjoint, ..Default::default() };
    let ctx = ShapeContext::new(&prob, &u, &mesh, opts).unwrap();
    let big_f = PI / 16.0;
    for k in 1..=5 {
        let d = ctx.derivatives(&cos_mode(&u, k)).unwrap();
        let oracle = big_f * big_f * (k as f64 - 0.5) / (4.0 * PI);
        assert!(((d.d2e - oracle) / oracle).abs() < 6e-3, "k={k}: {} vs {oracle}", d.d2e);
        assert!(d.de.abs() < 1e-12, "k={k}: e' = {}", d.de);
    }
}

#[test]
fn sweep_slopes_at_half_are_bounded_and_grow_below() {
    let prob = bump_problem(1.0);
    let u = disk(256);
    let mesh = build_mesh::<f64>(4).unwrap();
    let mut opts = SweepOptions::new(vec![0.0, 0.25, 0.5, 1.0], 32);
    opts.reference = true;
    let r = ratio_sweep(&prob, &u, &mesh, &opts).unwrap();
    assert_eq!(r.fit, (16, 32));
    let half = r.slopes[2];
    assert!(half.r2.unwrap().abs() <= 0.2, "{half:?}");
    assert!(half.confirmed_r2());
    assert!(r.slopes[1].r2.unwrap() >= 0.4);
    assert!(r.slopes[3].r2.unwrap() < -0.5);
    for si in 0..4 {
        for ki in 0..r.ks.len() {
            assert!(r.r2[si][ki].is_finite() && r.r2[si][ki] > 0.0);
            if si > 0 {
                assert!(r.r2[si][ki] <= r.r2[si - 1][ki]);
            }
        }
    }
    assert!(r.floor.unwrap() < 0.25);
}

#[test]
fn area_integrand_row_matches_geometry() {
    let prob = EllipticProblem::unit_source().with_integrand(Integrand::area()).named("area");
    let u = GaugeFunction::<f64>::from_fn(64, |t| 1.0 + 0.2 * (2.0 * t).cos()).unwrap();
    let mesh = build_mesh::<f64>(5).unwrap();
    let r = ratio_sweep(&prob, &u, &mesh, &SweepOptions::new(vec![0.5], 8)).unwrap();
    for (i, &k) in r.ks.iter().enumerate() {
        let g = area_perimeter(&u, Some(&cos_mode(&u, k)), Order::Two).unwrap();
        let d2m = g.d2m.unwrap();
        assert!(((r.d2e[i] - d2m) / d2m).abs() < 3e-3, "k={k}: {} vs {d2m}", r.d2e[i]);
        assert!((r.r2[0][i] - d2m.abs() / r.norms[0][i].powi(2)).abs() <= 3e-3 * r.r2[0][i]);
        assert!((r.de[i] - g.dm.unwrap()).abs() < 3e-3 * d2m, "k={k}: {} vs {:?}", r.de[i], g.dm);
    }
}

#[test]
fn under_resolved_modes_are_refused() {
    let prob = bump_problem(1.0);
    let mesh = build_mesh::<f64>(3).unwrap();
    let err = ratio_sweep(&prob, &disk(64), &mesh, &SweepOptions::new(vec![0.5], 9)).unwrap_err();
    assert!(matches!(&err, Error::UnderResolved(m) if m.contains("n/8")), "{err}");
    let err = ratio_sweep(&prob, &disk(256), &mesh, &SweepOptions::new(vec![0.5], 17)).unwrap_err();
    assert!(matches!(&err, Error::UnderResolved(m) if m.contains("2π/(8·k_max)")), "{err}");
    assert!(coercivity_probe(&prob, &disk(256), &mesh, 17, ProbeOptions::default()).is_err());
    let mut bad = SweepOptions::new(vec![0.5], 4);
    bad.norm = NormKind::Boundary;
    bad.s_grid = vec![1.0];
    assert!(ratio_sweep(&prob, &disk(64), &mesh, &bad).is_err());
}

#[test]
fn sweep_output_is_byte_identical() {
    let prob = bump_problem(1.0);
    let u = GaugeFunction::<f64>::from_fn(64, |t| 1.0 + 0.1 * (3.0 * t).cos()).unwrap();
    let mesh = build_mesh::<f64>(3).unwrap();
    let mut opts = SweepOptions::new(vec![0.25, 0.5], 8);
    opts.seed = Some(7);
    opts.norm = NormKind::Boundary;
    let render = || {
        let r = ratio_sweep(&prob, &u, &mesh, &opts).unwrap();
        let mut a = Vec::new();
        r.write_csv(&mut a).unwrap();
        r.write_slopes_csv(&mut a).unwrap();
        (a, r.svg(0) + &r.svg(1))
    };
    let first = render();
    assert_eq!(first, render());
    let text = String::from_utf8(first.0).unwrap();
    assert!(text.starts_with("# sweep v1 "));
    assert_eq!(text.lines().nth(1), Some("s,k,phase,norm,de,d2e,r1,r2"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('s')).count(), 16 + 2);
}

#[test]
fn random_phases_do_not_change_disk_second_derivatives() {
    let prob = bump_problem(1.0);
    let u = disk(64);
    let mesh = build_mesh::<f64>(4).unwrap();
    let plain = ratio_sweep(&prob, &u, &mesh, &SweepOptions::new(vec![0.5], 6)).unwrap();
    let mut opts = SweepOptions::new(vec![0.5], 6);
    opts.seed = Some(11);
    let phased = ratio_sweep(&prob, &u, &mesh, &opts).unwrap();
    assert!(phased.phases.iter().any(|p| *p > 0.1));
    for (a, b) in plain.d2e.iter().zip(&phased.d2e) {
        assert!(((a - b) / a).abs() < 1e-2, "{a} vs {b}");
    }
}

#[test]
fn first_derivative_ratio_at_s_one_is_bounded_on_convex_domain() {
    let f: Field<f64> = Arc::new(RadialBump { amplitude: 1.0, radius: 0.35, center: shapeopt::small::Vec2::new(0.2, 0.1) });
    let prob = EllipticProblem::dirichlet(f);
    let u = GaugeFunction::<f64>::from_fn(128, |t| 1.0 + 0.15 * (2.0 * t).cos()).unwrap();
    let mesh = build_mesh::<f64>(4).unwrap();
    let r = ratio_sweep(&prob, &u, &mesh, &SweepOptions::new(vec![1.0], 16)).unwrap();
    let head = r.r1[0][0];
    assert!(r.r1[0].iter().all(|x| *x <= 2.0 * head + 1e-12), "{:?}", r.r1[0]);
}

#[test]
fn reentrant_corner_sweep_runs() {
    let u = GaugeFunction::<f64>::reentrant_corner(128, 0.25, 0.6).unwrap();
    let prob = bump_problem(1.0);
    let mesh = build_mesh::<f64>(4).unwrap();
    let r = ratio_sweep(&prob, &u, &mesh, &SweepOptions::new(vec![0.25, 0.5], 16)).unwrap();
    assert!(r.r2.iter().flatten().all(|x| x.is_finite() && *x > 0.0));
    assert!(r.slopes.iter().all(|s| s.r2.is_some()));
    assert!(coercivity_probe(&prob, &u, &mesh, 4, ProbeOptions::default()).is_err());
}

#[test]
fn coercivity_probe_on_disk_is_positive_stable_and_homogeneous() {
    let u = disk(64);
    let mesh = build_mesh::<f64>(4).unwrap();
    let one = coercivity_probe(&bump_problem(1.0), &u, &mesh, 8, ProbeOptions::default()).unwrap();
    assert!(one.bounded, "{one:?}");
    assert_eq!(one.coarse.argmin, 1);
    assert!(one.normal_fraction.iter().all(|x| (x - 1.0).abs() < 1e-12));
    let two = coercivity_probe(&bump_problem(2.0), &u, &mesh, 8, ProbeOptions::default()).unwrap();
    assert_eq!(two.bounded, one.bounded);
    for (a, b) in one.coarse.values.iter().zip(&two.coarse.values) {
        assert!((b / a - 4.0).abs() < 1e-8, "{a} {b}");
    }
    let mut out = Vec::new();
    one.write_csv(&mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().starts_with("# coercivity v1"));
}

#[test]
fn coercivity_probe_requires_source_vanishing_on_boundary() {
    let u = disk(64);
    let mesh = build_mesh::<f64>(3).unwrap();
    let prob = EllipticProblem::dirichlet(Arc::new(Constant(1.0)));
    let err = coercivity_probe(&prob, &u, &mesh, 4, ProbeOptions::default()).unwrap_err();
    assert!(err.to_string().contains("vanish on the boundary"));
}

#[test]
fn coercivity_on_ellipse_reports_normal_fraction() {
    let u = GaugeFunction::<f64>::from_fn(64, |t| 1.0 + 0.1 * (2.0 * t).cos()).unwrap();
    let mesh = build_mesh::<f64>(3).unwrap();
    let r = coercivity_probe(&bump_problem(1.0), &u, &mesh, 4, ProbeOptions::default()).unwrap();
    assert!(r.normal_fraction.iter().all(|x| *x < 1.0 && *x > 0.95));
    assert!(r.coarse.min > 0.0);
}

fn small_sweep() -> &'static SweepReport<f64> {
    static CELL: OnceLock<SweepReport<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mesh = build_mesh::<f64>(3).unwrap();
        let u = GaugeFunction::<f64>::from_fn(64, |t| 1.0 + 0.1 * t.sin()).unwrap();
        ratio_sweep(&bump_problem(1.0), &u, &mesh, &SweepOptions::new(vec![0.0], 8)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ratios_decrease_in_s(s1 in 0.0f64..1.0, ds in 0.0f64..1.0, k in 1usize..=8) {
        let s2 = s1 + ds * (1.0 - s1);
        let r = small_sweep();
        let i = k - 1;
        let v: Vec<f64> = (0..64).map(|j| (k as f64 * 2.0 * PI * j as f64 / 64.0).cos()).collect();
        let field = shapeopt::sobolev::PeriodicField::new(v).unwrap();
        let n1 = shapeopt::sobolev::hs_norm(&field, s1).unwrap();
        let n2 = shapeopt::sobolev::hs_norm(&field, s2).unwrap();
        prop_assert!(r.d2e[i].abs() / (n2 * n2) <= r.d2e[i].abs() / (n1 * n1) * (1.0 + 1e-12));
        prop_assert!(r.de[i].abs() / n2 <= r.de[i].abs() / n1 * (1.0 + 1e-12) + 1e-300);
    }
}
