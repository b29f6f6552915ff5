//! Every physical and numerical default applied when a config omits a key.
//! The same table is echoed into each run manifest.

use serde::Serialize;

pub const LEVEL: usize = 5;
pub const THREADS: usize = 1;
pub const GAUGE_N: usize = 256;
pub const DISK_RADIUS: f64 = 1.0;
pub const SQUARE_HALF_WIDTH: f64 = 1.0;
pub const POLYGON_RADIUS: f64 = 1.0;
pub const BUMP_AMPLITUDE: f64 = 1.0;
pub const BUMP_RADIUS: f64 = 0.5;
pub const REACTION: f64 = 0.0;
pub const KRYLOV_RTOL: f64 = 1e-10;
pub const KRYLOV_MAX_ITER: usize = 20_000;
pub const CUTOFF_R0: f64 = 0.25;
pub const CUTOFF_R1: f64 = 0.5;
pub const DIRECTION_K: usize = 0;
pub const DIRECTION_AMPLITUDE: f64 = 1.0;
pub const FD_STEPS: [f64; 3] = [1e-1, 3e-2, 1e-2];
pub const S_GRID: [f64; 3] = [0.25, 0.5, 1.0];
pub const K_MAX: usize = 32;
pub const COERCIVITY_K_MAX: usize = 8;
pub const PERIMETER_WEIGHT: f64 = 1.0;
pub const OPT_MAX_ITER: usize = 200;
pub const OPT_KTOL: f64 = 1e-6;
pub const PROJECTION_KKT_TOL: f64 = 1e-10;
pub const PROJECTION_MAX_ITER: usize = 200;
pub const POLYGON_WINDOW_FRACTION: f64 = 1.0 / 64.0;
pub const POLYGON_FRAC: f64 = 0.9;

#[derive(Clone, Debug, Serialize)]
pub struct Default {
    pub key: &'static str,
    pub value: String,
    pub doc: &'static str,
}

fn list(xs: &[f64]) -> String {
    format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

pub fn table() -> Vec<Default> {
    let d = |key, value: String, doc| Default { key, value, doc };
    vec![
        d("level", LEVEL.to_string(), "mesh level; the disk mesh has 2^level rings"),
        d("threads", THREADS.to_string(), "worker threads; 1 is bitwise reproducible"),
        d("domain.shape", "disk".into(), "gauge family"),
        d("domain.n", GAUGE_N.to_string(), "gauge samples on the circle"),
        d("domain.radius", DISK_RADIUS.to_string(), "disk radius"),
        d("domain.half_width", SQUARE_HALF_WIDTH.to_string(), "square inradius"),
        d("domain.radius (polygon)", POLYGON_RADIUS.to_string(), "regular polygon circumradius"),
        d("problem.source", "unit".into(), "right-hand side f"),
        d("problem.source.amplitude", BUMP_AMPLITUDE.to_string(), "bump height, f = A(1 - (r/R)^2)^3"),
        d("problem.source.radius", BUMP_RADIUS.to_string(), "bump support radius"),
        d("problem.reaction", REACTION.to_string(), "constant zeroth-order coefficient c"),
        d("problem.integrand", "energy".into(), "energy integrand K"),
        d("solver.rtol", KRYLOV_RTOL.to_string(), "relative residual of every linear solve"),
        d("solver.max_iter", KRYLOV_MAX_ITER.to_string(), "Krylov iteration cap"),
        d("solver.method", "direct (derive), adjoint (verify, optimize)".into(), "derivative evaluation route"),
        d("solver.profile", format!("cutoff r0={CUTOFF_R0} r1={CUTOFF_R1}"), "radial profile of the deformation field"),
        d("derive.direction.k", DIRECTION_K.to_string(), "mode number of v = A cos(k theta + phase)"),
        d("derive.direction.amplitude", DIRECTION_AMPLITUDE.to_string(), "amplitude A of v"),
        d("derive.steps", list(&FD_STEPS), "finite-difference steps, decreasing"),
        d("verify.s_grid", list(&S_GRID), "Sobolev orders of the ratio sweep"),
        d("verify.k_max", K_MAX.to_string(), "largest mode; needs k_max <= n/8 and <= boundary nodes/8"),
        d("verify.fit", "[k_max/2, k_max]".into(), "inclusive log-log fit range"),
        d("verify.norm", "fourier".into(), "fourier or boundary (Gagliardo) norm"),
        d("verify.reference", "false".into(), "repeat the fit range one level finer"),
        d("verify.coercivity_k_max", COERCIVITY_K_MAX.to_string(), "modes of the coercivity probe"),
        d("optimize.perimeter_weight", PERIMETER_WEIGHT.to_string(), "weight of -P"),
        d("optimize.r", "0".into(), "quadratic R(E, m) coefficients c, e, m, ee, em, mm"),
        d("optimize.max_iter", OPT_MAX_ITER.to_string(), "projected-gradient iteration cap"),
        d("optimize.ktol", OPT_KTOL.to_string(), "stop when ||u - P(u - grad j)||_inf <= ktol"),
        d("optimize.gradient", "adjoint".into(), "adjoint or rows"),
        d("optimize.projection_tol", PROJECTION_KKT_TOL.to_string(), "interior-point KKT tolerance"),
        d("optimize.projection_max_iter", PROJECTION_MAX_ITER.to_string(), "interior-point iteration cap"),
        d("optimize.window", format!("2 pi * {POLYGON_WINDOW_FRACTION}"), "angular width of a vertex window"),
        d("optimize.capture", POLYGON_FRAC.to_string(), "mass fraction the windows must capture"),
    ]
}
