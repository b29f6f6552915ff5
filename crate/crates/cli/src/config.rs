//! TOML run configuration. Unknown keys are rejected at every level.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Deserialize;
use shapeopt::fem::{constant, EllipticProblem, Integrand, Problem, RadialBump};
use shapeopt::geometry::{Annulus, GaugeFunction, PolygonOptions, ProjectionOptions};
use shapeopt::linalg::KrylovOptions;
use shapeopt::optimize::{GradientMethod, MinimizeOptions, ObjectiveOptions, ObjectiveSpec, Quadratic};
use shapeopt::shapecalc::{Method, Profile, ShapeOptions};
use shapeopt::verify::{NormKind, SweepOptions};

use crate::defaults as d;
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub level: Option<usize>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub domain: Domain,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub derive: DeriveConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    pub optimize: Option<OptimizeConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Domain {
    Disk { n: Option<usize>, radius: Option<f64> },
    Ellipse { n: Option<usize>, semi_axes: [f64; 2] },
    Square { n: Option<usize>, half_width: Option<f64> },
    Polygon { n: Option<usize>, sides: usize, radius: Option<f64>, phase: Option<f64> },
    /// `u = mean + Σ cos[k-1] cos kθ + sin[k-1] sin kθ`.
    Fourier {
        n: Option<usize>,
        mean: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Reentrant { n: Option<usize>, depth: f64, width: f64 },
    File { path: String },
}

impl Default for Domain {
    fn default() -> Self {
        Domain::Disk { n: None, radius: None }
    }
}

impl Domain {
    pub fn name(&self) -> &'static str {
        match self {
            Domain::Disk { .. } => "disk",
            Domain::Ellipse { .. } => "ellipse",
            Domain::Square { .. } => "square",
            Domain::Polygon { .. } => "polygon",
            Domain::Fourier { .. } => "fourier",
            Domain::Reentrant { .. } => "reentrant",
            Domain::File { .. } => "file",
        }
    }

    pub fn gauge(&self) -> Result<GaugeFunction<f64>, CliError> {
        let nn = |n: &Option<usize>| n.unwrap_or(d::GAUGE_N);
        let g = match self {
            Domain::Disk { n, radius } => {
                let r = radius.unwrap_or(d::DISK_RADIUS);
                if !(r > 0.0) {
                    return Err(CliError::Validation(format!("domain.radius = {r} must be positive")));
                }
                GaugeFunction::constant(nn(n), 1.0 / r)?
            }
            Domain::Ellipse { n, semi_axes: [a, b] } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(CliError::Validation("domain.semi_axes must be positive".into()));
                }
                GaugeFunction::from_fn(nn(n), |t: f64| ((t.cos() / a).powi(2) + (t.sin() / b).powi(2)).sqrt())?
            }
            Domain::Square { n, half_width } => GaugeFunction::square(nn(n), half_width.unwrap_or(d::SQUARE_HALF_WIDTH))?,
            Domain::Polygon { n, sides, radius, phase } => GaugeFunction::regular_polygon(
                nn(n),
                *sides,
                radius.unwrap_or(d::POLYGON_RADIUS),
                phase.unwrap_or(0.0),
            )?,
            Domain::Fourier { n, mean, cos, sin } => GaugeFunction::from_fn(nn(n), |t: f64| {
                let mut u = *mean;
                for (k, c) in cos.iter().enumerate() {
                    u += c * ((k + 1) as f64 * t).cos();
                }
                for (k, s) in sin.iter().enumerate() {
                    u += s * ((k + 1) as f64 * t).sin();
                }
                u
            })?,
            Domain::Reentrant { n, depth, width } => GaugeFunction::reentrant_corner(nn(n), *depth, *width)?,
            Domain::File { path } => {
                let f = std::fs::File::open(path)
                    .map_err(|e| CliError::Validation(format!("domain.path `{path}`: {e}")))?;
                GaugeFunction::read_csv(std::io::BufReader::new(f))?
            }
        };
        Ok(g)
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Source {
    Unit {},
    Constant { value: f64 },
    /// `A (1 − |x|²/R²)³` inside `|x| < R`.
    Bump { amplitude: Option<f64>, radius: Option<f64> },
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrandKind {
    #[default]
    Energy,
    Area,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: Option<String>,
    pub source: Option<Source>,
    pub reaction: Option<f64>,
    #[serde(default)]
    pub integrand: IntegrandKind,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<Problem<f64>, CliError> {
        let (f, tag) = match self.source.as_ref().unwrap_or(&Source::Unit {}) {
            Source::Unit {} => (constant(1.0), "unit"),
            Source::Constant { value } => (constant(*value), "constant"),
            Source::Bump { amplitude, radius } => {
                let r = radius.unwrap_or(d::BUMP_RADIUS);
                if !(r > 0.0) {
                    return Err(CliError::Validation(format!("problem.source.radius = {r} must be positive")));
                }
                let f: shapeopt::fem::Field<f64> =
                    Arc::new(RadialBump::centered(amplitude.unwrap_or(d::BUMP_AMPLITUDE), r));
                (f, "bump")
            }
        };
        let c = self.reaction.unwrap_or(d::REACTION);
        if !(c >= 0.0) {
            return Err(CliError::Validation(format!("problem.reaction = {c} must be nonnegative")));
        }
        let mut p = EllipticProblem::dirichlet(f).with_reaction(constant(c)).with_associated_energy();
        if let IntegrandKind::Area = self.integrand {
            p = p.with_integrand(Integrand::area());
        }
        Ok(Arc::new(p.named(self.name.clone().unwrap_or_else(|| tag.to_string()))))
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileConfig {
    Cutoff { r0: f64, r1: f64 },
    Radial {},
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodConfig {
    Direct,
    Adjoint,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub rtol: Option<f64>,
    pub max_iter: Option<usize>,
    pub method: Option<MethodConfig>,
    pub profile: Option<ProfileConfig>,
}

impl SolverConfig {
    pub fn krylov(&self) -> Result<KrylovOptions, CliError> {
        let rtol = self.rtol.unwrap_or(d::KRYLOV_RTOL);
        if !(rtol > 0.0 && rtol < 1.0) {
            return Err(CliError::Validation(format!("solver.rtol = {rtol} must lie in (0, 1)")));
        }
        Ok(KrylovOptions { rtol, max_iter: self.max_iter.unwrap_or(d::KRYLOV_MAX_ITER) })
    }

    pub fn shape(&self, default_method: Method) -> Result<ShapeOptions<f64>, CliError> {
        let profile = match self.profile {
            None => Profile::Cutoff { r0: d::CUTOFF_R0, r1: d::CUTOFF_R1 },
            Some(ProfileConfig::Cutoff { r0, r1 }) => Profile::Cutoff { r0, r1 },
            Some(ProfileConfig::Radial {}) => Profile::Radial,
        };
        profile.validate()?;
        let method = match self.method {
            None => default_method,
            Some(MethodConfig::Direct) => Method::Direct,
            Some(MethodConfig::Adjoint) => Method::Adjoint,
        };
        Ok(ShapeOptions { profile, krylov: self.krylov()?, method })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Direction {
    pub k: Option<usize>,
    pub amplitude: Option<f64>,
    pub phase: Option<f64>,
}

impl Direction {
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let k = self.k.unwrap_or(d::DIRECTION_K) as f64;
        let a = self.amplitude.unwrap_or(d::DIRECTION_AMPLITUDE);
        let p = self.phase.unwrap_or(0.0);
        (0..n).map(|i| a * (k * TAU * i as f64 / n as f64 + p).cos()).collect()
    }

    pub fn label(&self) -> String {
        let k = self.k.unwrap_or(d::DIRECTION_K);
        let a = self.amplitude.unwrap_or(d::DIRECTION_AMPLITUDE);
        format!("{a}cos({k}theta+{})", self.phase.unwrap_or(0.0))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeriveConfig {
    #[serde(default)]
    pub direction: Direction,
    pub steps: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormConfig {
    Fourier,
    Boundary,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub s_grid: Option<Vec<f64>>,
    pub k_max: Option<usize>,
    pub fit: Option<[usize; 2]>,
    pub norm: Option<NormConfig>,
    #[serde(default)]
    pub reference: bool,
    pub seed: Option<u64>,
    #[serde(default)]
    pub coercivity: bool,
    pub coercivity_k_max: Option<usize>,
}

impl VerifyConfig {
    pub fn norm(&self) -> NormKind {
        match self.norm {
            Some(NormConfig::Boundary) => NormKind::Boundary,
            _ => NormKind::Fourier,
        }
    }

    pub fn sweep(&self, domain: &str, shape: ShapeOptions<f64>) -> Result<SweepOptions<f64>, CliError> {
        let s_grid = self.s_grid.clone().unwrap_or_else(|| d::S_GRID.to_vec());
        if s_grid.is_empty() || s_grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(CliError::Validation("verify.s_grid must be a nonempty list in [0, 1]".into()));
        }
        let mut o = SweepOptions::new(s_grid, self.k_max.unwrap_or(d::K_MAX));
        if let Some([lo, hi]) = self.fit {
            o.fit = (lo, hi);
        }
        o.domain = domain.to_string();
        o.norm = self.norm();
        o.reference = self.reference;
        o.seed = self.seed;
        o.shape = shape;
        Ok(o)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticConfig {
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub e: f64,
    #[serde(default)]
    pub m: f64,
    #[serde(default)]
    pub ee: f64,
    #[serde(default)]
    pub em: f64,
    #[serde(default)]
    pub mm: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientConfig {
    Adjoint,
    Rows,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    /// Inner radius of the annulus.
    pub a: f64,
    /// Outer radius; omitted for no outer constraint.
    pub b: Option<f64>,
    #[serde(default)]
    pub r: QuadraticConfig,
    pub perimeter_weight: Option<f64>,
    pub max_iter: Option<usize>,
    pub ktol: Option<f64>,
    pub gradient: Option<GradientConfig>,
    pub projection_tol: Option<f64>,
    pub projection_max_iter: Option<usize>,
    pub window: Option<f64>,
    pub capture: Option<f64>,
}

impl OptimizeConfig {
    pub fn spec(&self, problem: &Problem<f64>) -> Result<ObjectiveSpec<f64>, CliError> {
        let b = self.b.unwrap_or(f64::INFINITY);
        if !(self.a < b) {
            return Err(CliError::Validation(format!(
                "optimize: annulus needs a < b, got a = {} and b = {b}",
                self.a
            )));
        }
        let ann = Annulus::new(self.a, b)?;
        let q = &self.r;
        let r = Quadratic { c: q.c, e: q.e, m: q.m, ee: q.ee, em: q.em, mm: q.mm };
        let w = self.perimeter_weight.unwrap_or(d::PERIMETER_WEIGHT);
        let prob = r.depends_on_e().then(|| problem.clone());
        Ok(ObjectiveSpec::new(r, w, ann, prob)?)
    }

    pub fn minimize(&self, krylov: KrylovOptions) -> MinimizeOptions {
        let gradient = match self.gradient {
            Some(GradientConfig::Rows) => GradientMethod::Rows,
            _ => GradientMethod::Adjoint,
        };
        MinimizeOptions {
            max_iter: self.max_iter.unwrap_or(d::OPT_MAX_ITER),
            ktol: self.ktol.unwrap_or(d::OPT_KTOL),
            objective: ObjectiveOptions { gradient, krylov },
            projection: ProjectionOptions {
                kkt_tol: self.projection_tol.unwrap_or(d::PROJECTION_KKT_TOL),
                max_iter: self.projection_max_iter.unwrap_or(d::PROJECTION_MAX_ITER),
            },
            ..MinimizeOptions::default()
        }
    }

    pub fn polygon(&self) -> PolygonOptions<f64> {
        PolygonOptions {
            window: self.window.unwrap_or(TAU * d::POLYGON_WINDOW_FRACTION),
            frac: self.capture.unwrap_or(d::POLYGON_FRAC),
            ..PolygonOptions::default()
        }
    }
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {}", e.message())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse_and_build() {
        for text in [
            include_str!("../configs/disk_solve.toml"),
            include_str!("../configs/disk_derive.toml"),
            include_str!("../configs/disk_verify.toml"),
            include_str!("../configs/polygon_optimize.toml"),
            include_str!("../configs/perimeter_optimize.toml"),
        ] {
            let cfg = parse(text).unwrap();
            cfg.domain.gauge().unwrap();
            let prob = cfg.problem.build().unwrap();
            if let Some(o) = &cfg.optimize {
                o.spec(&prob).unwrap();
            }
        }
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_depth() {
        for text in [
            "lvl = 3",
            "[domain]\nshape = \"disk\"\nradious = 1.0",
            "[domain]\nshape = \"circle\"",
            "[problem]\nsource = { kind = \"bump\", ampl = 1.0 }",
            "[solver]\nprofile = { kind = \"cutoff\", r0 = 0.2, r1 = 0.5, r2 = 0.7 }",
            "[verify]\nkmax = 4",
            "[optimize]\na = 1.0\nb = 2.0\nr = { q = 1.0 }",
        ] {
            assert!(matches!(parse(text), Err(CliError::Validation(_))), "{text}");
        }
    }

    #[test]
    fn fourier_domain_and_direction_samples() {
        let cfg = parse("[domain]\nshape = \"fourier\"\nn = 16\nmean = 1.0\ncos = [0.0, 0.1]\nsin = [0.2]").unwrap();
        let u = cfg.domain.gauge().unwrap();
        for (i, x) in u.samples().iter().enumerate() {
            let t = TAU * i as f64 / 16.0;
            assert!((x - (1.0 + 0.1 * (2.0 * t).cos() + 0.2 * t.sin())).abs() < 1e-14);
        }
        let dir = Direction { k: Some(3), amplitude: Some(2.0), phase: None };
        let v = dir.samples(12);
        assert!((v[1] - 2.0 * (3.0 * TAU / 12.0).cos()).abs() < 1e-14);
    }

    #[test]
    fn annulus_must_be_proper() {
        let prob = ProblemConfig::default().build().unwrap();
        let cfg = parse("[optimize]\na = 1.0\nb = 1.0").unwrap();
        let e = cfg.optimize.unwrap().spec(&prob).unwrap_err();
        assert!(matches!(e, CliError::Validation(m) if m.contains("a < b")));
        let cfg = parse("[optimize]\na = 1.0\nr = { e = 1.0 }").unwrap();
        assert!(cfg.optimize.unwrap().spec(&prob).unwrap().problem.is_some());
    }
}
