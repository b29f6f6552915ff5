//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use shapeopt::fem::{build_mesh, solve_state, EllipticProblem, Field, Integrand, Polynomial, RadialBump, ScalarField};
use shapeopt::fem::{SymMatField, VecField};
use shapeopt::geometry::{area_perimeter, convexity_residual, detect_polygon, Annulus, GaugeFunction, Order, PolygonOptions};
use shapeopt::linalg::KrylovOptions;
use shapeopt::optimize::{minimize, MinimizeOptions, ObjectiveSpec, Quadratic, Termination};
use shapeopt::shapecalc::{check_jet, fd_validate, transport_jet, Coefficients, ShapeContext, ShapeOptions};
use shapeopt::small::{Mat2, Vec2};
use shapeopt::verify::{coercivity_probe, ratio_sweep, NormKind, ProbeOptions, SweepOptions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn disk(n: usize) -> GaugeFunction<f64> {
    GaugeFunction::constant(n, 1.0).unwrap()
}

/// `−π/(16(1+t)⁴)`: energy of the unit-source problem on the disk of radius `1/(1+t)`.
fn scaling_law(t: f64) -> f64 {
    -PI / (16.0 * (1.0 + t).powi(4))
}

fn disk_state() -> Outcome {
    let t0 = Instant::now();
    let mesh = build_mesh::<f64>(5).unwrap();
    let st = solve_state(&EllipticProblem::unit_source(), &disk(256), &mesh, &KrylovOptions::default()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let err = st
        .mesh
        .nodes()
        .iter()
        .zip(&st.u)
        .map(|(x, u)| (u - (1.0 - x.dot(*x)) / 4.0).abs())
        .fold(0.0, f64::max);
    check(err <= 5e-3 && secs <= 5.0, format!("max nodal error {err:.3e} (<= 5e-3), {secs:.2} s (<= 5 s)"))
}

fn energy() -> Outcome {
    let mesh = build_mesh::<f64>(5).unwrap();
    let e = solve_state(&EllipticProblem::unit_source(), &disk(256), &mesh, &KrylovOptions::default()).unwrap().energy;
    let exact = scaling_law(0.0);
    let rel = (e - exact).abs() / exact.abs();
    check(rel <= 5e-3, format!("E = {e:.6}, exact {exact:.6}, relative error {rel:.2e} (<= 5e-3)"))
}

fn first_derivative() -> Outcome {
    let prob = EllipticProblem::unit_source();
    let u = disk(256);
    let ctx = ShapeContext::new(&prob, &u, &build_mesh(5).unwrap(), ShapeOptions::default()).unwrap();
    let de = ctx.first(&vec![1.0; 256]).unwrap();
    // derivative of the scaling law at t = 0, by central differences of the closed form
    let h = 1e-5;
    let exact = (scaling_law(h) - scaling_law(-h)) / (2.0 * h);
    let rel = (de - exact).abs() / exact.abs();
    let worst = (1..=8)
        .map(|k| {
            let v: Vec<f64> = u.angles().iter().map(|t| (k as f64 * t).cos()).collect();
            ctx.first(&v).unwrap().abs() / de.abs()
        })
        .fold(0.0, f64::max);
    check(
        rel <= 1e-2 && worst <= 1e-3,
        format!("e'(1) = {de:.6} vs {exact:.6} (rel {rel:.2e} <= 1e-2); max_k |e'(cos k)|/|e'(1)| = {worst:.2e} (<= 1e-3)"),
    )
}

fn second_derivative() -> Outcome {
    let prob = EllipticProblem::unit_source();
    let u = disk(256);
    let one = vec![1.0; 256];
    let r = fd_validate(&prob, &u, &build_mesh(5).unwrap(), &one, &[1e-1, 3e-2, 1e-2], ShapeOptions::default()).unwrap();
    let d2e = r.derivatives.d2e;
    let h = 1e-4;
    let exact = (scaling_law(h) - 2.0 * scaling_law(0.0) + scaling_law(-h)) / (h * h);
    let rel = (d2e - exact).abs() / exact.abs();
    let (s1, s2) = (r.slope1.unwrap_or(f64::NAN), r.slope2.unwrap_or(f64::NAN));
    check(
        rel <= 2e-2 && s1 >= 1.9 && s2 >= 2.7,
        format!("e''(1,1) = {d2e:.5} vs {exact:.5} (rel {rel:.2e} <= 2e-2); slopes {s1:.3} (>= 1.9), {s2:.3} (>= 2.7)"),
    )
}

fn poly(rng: &mut impl Rng, degree: u32) -> Polynomial<f64> {
    let mut terms = Vec::new();
    for i in 0..=degree {
        for j in 0..=degree - i {
            terms.push((i, j, rng.gen_range(-1.0..1.0)));
        }
    }
    Polynomial::new(terms)
}

fn pf(p: Polynomial<f64>) -> Field<f64> {
    Arc::new(p)
}

fn jets() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut worst_name = "";
    for _ in 0..10 {
        let r = &mut rng;
        let mut prob = EllipticProblem::dirichlet(pf(poly(r, 3)))
            .with_reaction(pf(poly(r, 2)))
            .with_advection(VecField::new(pf(poly(r, 2)), pf(poly(r, 2))));
        prob.a = SymMatField::new(pf(poly(r, 2)), pf(poly(r, 2)), pf(poly(r, 2)));
        let prob = prob.with_integrand(Integrand {
            alpha: SymMatField::new(pf(poly(r, 2)), pf(poly(r, 2)), pf(poly(r, 2))),
            alpha00: pf(poly(r, 2)),
            beta: VecField::new(pf(poly(r, 2)), pf(poly(r, 2))),
            gamma: pf(poly(r, 3)),
            delta: pf(poly(r, 2)),
        });
        let (px, py) = (poly(r, 3), poly(r, 3));
        for _ in 0..3 {
            let x = Vec2::new(r.gen_range(-0.8..0.8), r.gen_range(-0.8..0.8));
            let (gx, gy) = (px.grad(x), py.grad(x));
            let c = check_jet(&prob, x, Vec2::new(px.value(x), py.value(x)), Mat2::new(gx.x, gx.y, gy.x, gy.y), 1e-4).unwrap();
            if c.first.max(c.second) > worst {
                worst = c.first.max(c.second);
                worst_name = Coefficients::<f64>::NAMES[c.worst];
            }
        }
    }
    let prob = EllipticProblem::<f64>::unit_source();
    let mesh = build_mesh::<f64>(4).unwrap();
    let mapped = mesh.map(&disk(64)).unwrap();
    let jet = transport_jet(&prob, &mapped, mesh.nodes(), 1).unwrap();
    let dilation = (0..mesh.triangles().len())
        .flat_map(|e| (0..3).map(move |q| (e, q)))
        .map(|(e, q)| jet.a1(e, q).max_abs())
        .fold(0.0f64, f64::max);
    check(
        worst <= 1e-6 && dilation <= 100.0 * f64::EPSILON,
        format!("worst relative jet mismatch {worst:.2e} at `{worst_name}` (<= 1e-6); dilation M'0 = {dilation:.1e} (<= 100 eps)"),
    )
}

fn bump() -> EllipticProblem<f64> {
    EllipticProblem::dirichlet(Arc::new(RadialBump::centered(1.0, 0.5))).named("bump")
}

fn estimate() -> Outcome {
    let t0 = Instant::now();
    let prob = bump();
    let u = disk(512);
    let mut opts = SweepOptions::new(vec![0.25, 0.5], 64);
    opts.fit = (16, 64);
    opts.reference = true;
    opts.domain = "disk".into();
    let rep = ratio_sweep(&prob, &u, &build_mesh(5).unwrap(), &opts).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let (quarter, half) = (&rep.slopes[0], &rep.slopes[1]);
    let slope = half.r2.unwrap_or(f64::NAN);
    let disc = half.discrepancy_r2().unwrap_or(f64::NAN);
    let sharp = quarter.r2.unwrap_or(f64::NAN);
    check(
        slope.abs() <= 0.2 && disc < 0.1 && sharp >= 0.4 && secs <= 600.0,
        format!(
            "s=1/2 slope {slope:.3} in [-0.2, 0.2], level 5/6 discrepancy {disc:.3} (< 0.1); s=1/4 slope {sharp:.3} (>= 0.4); {secs:.0} s (<= 600 s)"
        ),
    )
}

fn coercivity() -> Outcome {
    let rep = coercivity_probe(&bump(), &disk(512), &build_mesh(5).unwrap(), 16, ProbeOptions::default()).unwrap();
    check(
        rep.bounded && rep.coarse.min > 0.0 && rep.relative_change <= 0.2,
        format!(
            "min ratio {:.4e} (k={}) at level 5, {:.4e} (k={}) at level 6, change {:.1}% (<= 20%)",
            rep.coarse.min,
            rep.coarse.argmin,
            rep.fine.min,
            rep.fine.argmin,
            100.0 * rep.relative_change
        ),
    )
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn geometry() -> Outcome {
    let u = GaugeFunction::square(1024, 1.0).unwrap();
    let ap = area_perimeter(&u, None, Order::Zero).unwrap();
    let rep = detect_polygon(&convexity_residual(&u), &PolygonOptions::default()).unwrap();
    let h = u.h();
    let placed = rep.vertices.len() == 4
        && rep.vertices.iter().enumerate().all(|(k, v)| circ_dist(v.angle, FRAC_PI_4 + k as f64 * FRAC_PI_2) <= h);
    let masses: Vec<f64> = rep.vertices.iter().map(|v| v.mass).collect();
    let (lo, hi) = masses.iter().fold((f64::MAX, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
    let smooth = GaugeFunction::from_fn(256, |t: f64| 1.3 + 0.2 * (2.0 * t).cos() - 0.05 * (5.0 * t).sin()).unwrap();
    let mass = convexity_residual(&smooth).total_mass;
    // ∫ u dθ = 2π · 1.3
    let mass_rel = (mass - 2.6 * PI).abs() / (2.6 * PI);
    let (m_rel, p_rel) = ((ap.m - 4.0).abs() / 4.0, (ap.p - 8.0).abs() / 8.0);
    check(
        m_rel <= 1e-3 && p_rel <= 1e-3 && placed && (hi - lo) <= 0.01 * hi && mass_rel <= 1e-6,
        format!(
            "m = {:.6}, p = {:.6}; {} vertices at pi/4 + k pi/2: {placed}; masses {lo:.4}..{hi:.4} (sqrt2 = {SQRT_2:.4}); smooth mass rel err {mass_rel:.1e}",
            ap.m,
            ap.p,
            rep.vertices.len()
        ),
    )
}

fn optimizer_sanity() -> Outcome {
    let spec = ObjectiveSpec::geometric(Quadratic::zero(), 1.0, Annulus::new(1.0, 2.0).unwrap()).unwrap();
    let mesh = build_mesh::<f64>(2).unwrap();
    let r = minimize(&spec, &GaugeFunction::constant(64, 0.8).unwrap(), &mesh, &MinimizeOptions::default()).unwrap();
    let err = r.u.samples().iter().map(|x| (x - 0.5).abs()).fold(0.0, f64::max);
    let single = ObjectiveSpec::geometric(Quadratic::linear(0.0, 1.0), 1.0, Annulus::new(1.0, 1.0).unwrap()).unwrap();
    let u0 = GaugeFunction::from_fn(64, |t: f64| 1.0 + 0.3 * (3.0 * t).cos()).unwrap();
    let s = minimize(&single, &u0, &mesh, &MinimizeOptions::default()).unwrap();
    let collapsed = s.trace.len() == 1 && s.u.samples().iter().all(|&x| x == 1.0);
    check(
        err <= 1e-3 && r.termination == Termination::Converged && collapsed,
        format!("sup |u* - 0.5| = {err:.1e} (<= 1e-3) in {} iterations; a = b collapses in one projection: {collapsed}", r.trace.len() - 1),
    )
}

fn polygonality() -> Outcome {
    let spec = ObjectiveSpec::new(
        Quadratic::linear(2.0, 1.6),
        1.0,
        Annulus::new(0.6, 1.0).unwrap(),
        Some(Arc::new(EllipticProblem::unit_source())),
    )
    .unwrap();
    let mesh = build_mesh::<f64>(4).unwrap();
    let mut parts = Vec::new();
    let mut counts = Vec::new();
    let mut ok = true;
    for n in [64, 128] {
        let u0 = GaugeFunction::from_fn(n, |t: f64| 1.25 * (1.0 + 0.05 * (4.0 * t).cos())).unwrap();
        let r = minimize(&spec, &u0, &mesh, &MinimizeOptions::default()).unwrap();
        let c = r.arc_concentration(&PolygonOptions::default()).unwrap();
        ok &= r.termination == Termination::Converged && c.captured_fraction >= 0.9 && c.arc_coverage <= 0.1;
        counts.push(c.vertices);
        parts.push(format!(
            "n={n}: arc {} nodes, captured {:.3}, coverage {:.3}, {} vertices",
            c.arc_nodes, c.captured_fraction, c.arc_coverage, c.vertices
        ));
    }
    ok &= counts[0] == counts[1];
    check(ok, parts.join("; "))
}

fn determinism() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let prob = bump();
    let u = GaugeFunction::from_fn(256, |t: f64| 1.0 + 0.1 * (2.0 * t).cos()).unwrap();
    let mesh = build_mesh::<f64>(4).unwrap();
    let mut opts = SweepOptions::new(vec![0.25, 0.5, 1.0], 16);
    opts.seed = Some(7);
    opts.norm = NormKind::Fourier;
    let run = || {
        pool.install(|| {
            let rep = ratio_sweep(&prob, &u, &mesh, &opts).unwrap();
            let (mut a, mut b) = (Vec::new(), Vec::new());
            rep.write_csv(&mut a).unwrap();
            rep.write_slopes_csv(&mut b).unwrap();
            (a, b)
        })
    };
    let (first, second) = (run(), run());
    check(first == second, format!("two runs, {} + {} bytes, identical: {}", first.0.len(), first.1.len(), first == second))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("disk state oracle", disk_state),
        ("energy oracle", energy),
        ("first-derivative oracle", first_derivative),
        ("second-derivative oracle", second_derivative),
        ("transport jet exactness", jets),
        ("estimate verification", estimate),
        ("coercivity probe", coercivity),
        ("geometry oracles", geometry),
        ("optimizer sanity", optimizer_sanity),
        ("polygonality", polygonality),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} [{secs:.1} s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1} s]: {d}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
