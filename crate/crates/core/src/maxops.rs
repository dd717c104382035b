//! Maximal operators evaluated node by node.
//!
//! Every operator is a supremum of averages over a parametrized witness
//! family. For each grid node the family is searched on a bounded box (see
//! [`SearchConfig`]) and the best witness is stored with its value, so the
//! value can always be reproduced by re-averaging the witness.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    angular_kernel_average, ball_average_radial, ball_gradient_radial, cap_gradient_polar, cube_average,
    geodesic_ball_average, CubeSpec, Kernel, ParabolicPoint,
};
use crate::profile::{DomainKind, Profile};
use crate::search::{maximize, Axis, Settings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    UncenteredHL,
    CenteredHL,
    NonTangentialCube,
    HeatFlow,
    PoissonFlow,
    SphereUncentered,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::UncenteredHL => "uncentered",
            OperatorKind::CenteredHL => "centered",
            OperatorKind::NonTangentialCube => "cube",
            OperatorKind::HeatFlow => "heat",
            OperatorKind::PoissonFlow => "poisson",
            OperatorKind::SphereUncentered => "sphere",
        }
    }

    fn kernel(self) -> Option<Kernel> {
        match self {
            OperatorKind::HeatFlow => Some(Kernel::Heat),
            OperatorKind::PoissonFlow => Some(Kernel::Poisson),
            _ => None,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uncentered" => OperatorKind::UncenteredHL,
            "centered" => OperatorKind::CenteredHL,
            "cube" => OperatorKind::NonTangentialCube,
            "heat" => OperatorKind::HeatFlow,
            "poisson" => OperatorKind::PoissonFlow,
            "sphere" => OperatorKind::SphereUncentered,
            _ => return Err(Error::Parse(format!("unknown operator '{s}'"))),
        })
    }
}

/// Search box and refinement settings for the witness search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Coarse nodes per search parameter; missing entries use the operator's default.
    pub coarse_grid: Vec<usize>,
    pub refine_tol: f64,
    /// Extra room beyond the support for radii, sides and kernel offsets.
    pub box_margin: f64,
    /// Largest kernel time searched.
    pub t_max: f64,
    pub restarts: usize,
    pub max_rounds: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { coarse_grid: vec![], refine_tol: 1e-10, box_margin: 10.0, t_max: 1e4, restarts: 5, max_rounds: 300 }
    }
}

impl SearchConfig {
    fn nodes(&self, i: usize, default: usize) -> usize {
        self.coarse_grid.get(i).copied().unwrap_or(default).max(2)
    }

    fn settings(&self) -> Settings {
        Settings { restarts: self.restarts, refine_tol: self.refine_tol, max_rounds: self.max_rounds }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub alpha: f64,
    pub search: SearchConfig,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, alpha: f64) -> Self {
        OperatorSpec { kind, alpha, search: SearchConfig::default() }
    }

    pub fn uncentered() -> Self {
        OperatorSpec::new(OperatorKind::UncenteredHL, 0.0)
    }

    pub fn with_search(mut self, search: SearchConfig) -> Self {
        self.search = search;
        self
    }
}

/// The set realizing an average.
///
/// Centers are signed positions along the ray (radial) or meridian (sphere)
/// through the evaluation point; parabolic points on the line carry the
/// signed coordinate y in `rho_y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Degenerate { x: f64 },
    Interval { a: f64, b: f64 },
    Ball { center: f64, radius: f64 },
    Cube(CubeSpec),
    Parabolic(ParabolicPoint),
}

impl Witness {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Witness::Degenerate { .. } => "degenerate",
            Witness::Interval { .. } => "interval",
            Witness::Ball { .. } => "ball",
            Witness::Cube(_) => "cube",
            Witness::Parabolic(_) => "parabolic",
        }
    }

    /// Flat parameter list for tabular export.
    pub fn params(&self) -> [f64; 4] {
        match *self {
            Witness::Degenerate { x } => [x, 0.0, 0.0, 0.0],
            Witness::Interval { a, b } => [a, b, 0.0, 0.0],
            Witness::Ball { center, radius } => [center, radius, 0.0, 0.0],
            Witness::Cube(q) if q.dim == 1 => [q.center[0], q.half_side, 0.0, 0.0],
            Witness::Cube(q) => [q.center[0], q.center[1], q.half_side, q.orientation],
            Witness::Parabolic(p) => [p.rho_y, p.t, 0.0, 0.0],
        }
    }

    /// (scale, center offset from x), the tie-break order.
    fn key(&self, x: f64) -> (f64, f64) {
        match *self {
            Witness::Degenerate { .. } => (0.0, 0.0),
            Witness::Interval { a, b } => (b - a, (0.5 * (a + b) - x).abs()),
            Witness::Ball { center, radius } => (radius, (center - x).abs()),
            Witness::Cube(q) => (q.half_side, (q.center[0] - x).hypot(q.center[1])),
            Witness::Parabolic(p) => (p.t, (p.rho_y - x).abs()),
        }
    }

    /// Whether x is admissible for this witness under the operator's rule.
    pub fn admits(&self, op: &OperatorSpec, x: f64) -> bool {
        let slack = 1e-9 * (1.0 + x.abs());
        match *self {
            Witness::Degenerate { x: y } => y == x,
            Witness::Interval { a, b } => match op.kind {
                OperatorKind::CenteredHL => (0.5 * (a + b) - x).abs() <= slack,
                _ => a - slack <= x && x <= b + slack,
            },
            Witness::Ball { center, radius } => (center - x).abs() <= radius + slack,
            Witness::Cube(q) => {
                let (s, c) = q.orientation.sin_cos();
                let (dx, dy) = (x - q.center[0], -q.center[1]);
                let (lx, ly) = (c * dx + s * dy, -s * dx + c * dy);
                let reach = op.alpha * q.half_side + slack;
                lx.abs() <= reach && ly.abs() <= reach
            }
            Witness::Parabolic(p) => {
                let reach = match op.kind {
                    OperatorKind::HeatFlow => op.alpha * p.t.sqrt(),
                    _ => op.alpha * p.t,
                };
                (p.rho_y - x).abs() <= reach + slack
            }
        }
    }
}

/// Average of f over a witness set, with the operator fixing the kernel.
pub fn witness_average(f: &Profile, kind: OperatorKind, w: &Witness) -> Result<f64> {
    let dom = f.domain();
    match *w {
        Witness::Degenerate { x } => Ok(f.eval(x)),
        Witness::Interval { a, b } => {
            if b <= a {
                Ok(f.eval(a))
            } else if dom.kind == DomainKind::Circle && b - a >= TAU {
                Ok(f.average(0.0, TAU))
            } else {
                Ok(f.average(a, b))
            }
        }
        Witness::Ball { center, radius } => match dom.kind {
            DomainKind::RadialHalfLine => ball_average_radial(f, center.abs(), radius),
            DomainKind::PolarInterval => {
                geodesic_ball_average(f, center.cos().clamp(-1.0, 1.0).acos(), radius.min(PI))
            }
            DomainKind::Circle => witness_average(f, kind, &Witness::Interval { a: center - radius, b: center + radius }),
            DomainKind::Line => Ok(f.average(center - radius, center + radius)),
        },
        Witness::Cube(q) => cube_average(f, &q),
        Witness::Parabolic(p) => {
            let k = kind
                .kernel()
                .ok_or_else(|| Error::InvalidArgument(format!("parabolic witness for the {kind} operator")))?;
            angular_kernel_average(f, k, p)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Connecting,
    Disconnecting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivMethod {
    /// Average of f′ over the witness.
    Witness,
    /// Central difference of neighbouring field values.
    Fd,
    /// Connecting node: mean of the one-sided slopes of f.
    Connecting,
    Unavailable,
}

impl DerivMethod {
    pub fn name(self) -> &'static str {
        match self {
            DerivMethod::Witness => "witness",
            DerivMethod::Fd => "fd",
            DerivMethod::Connecting => "connecting",
            DerivMethod::Unavailable => "unavailable",
        }
    }
}

/// Sampled maximal function with witnesses and connecting labels.
#[derive(Clone, Debug, Serialize)]
pub struct MaximalField {
    pub op: OperatorSpec,
    pub f: Profile,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub witnesses: Vec<Witness>,
    /// Filled by [`field_derivative`]; empty before.
    pub deriv: Vec<f64>,
    pub deriv_method: Vec<DerivMethod>,
    pub labels: Vec<Label>,
    /// Mf − f per node.
    pub gaps: Vec<f64>,
    pub gap_tol: f64,
}

impl MaximalField {
    /// Max of |f| on the profile, the natural unit for value tolerances.
    pub fn scale(&self) -> f64 {
        self.f.max_value().abs().max(f64::MIN_POSITIVE)
    }

    /// The field as a PL profile on its grid.
    pub fn as_profile(&self) -> Profile {
        Profile::from_nodes_unchecked(self.f.domain(), self.grid.clone(), self.values.clone())
    }

    /// Recompute labels for a different gap tolerance.
    pub fn relabel(&mut self, tol: f64) {
        self.gap_tol = tol;
        self.labels = self.gaps.iter().map(|&g| if g > tol { Label::Disconnecting } else { Label::Connecting }).collect();
    }

    pub fn is_disconnecting(&self, i: usize) -> bool {
        self.labels[i] == Label::Disconnecting
    }
}

pub fn default_gap_tol(f: &Profile) -> f64 {
    1e-8 + 1e-6 * f.max_value().abs()
}

fn check_supported(op: &OperatorSpec, f: &Profile) -> Result<()> {
    use DomainKind::*;
    use OperatorKind::*;
    if !(op.alpha >= 0.0 && op.alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("aperture alpha = {} must be finite and >= 0", op.alpha)));
    }
    let dom = f.domain();
    let ok = match (op.kind, dom.kind) {
        (UncenteredHL | SphereUncentered, Line | RadialHalfLine | Circle) => true,
        (UncenteredHL | SphereUncentered, PolarInterval) => dom.dim == 2,
        (CenteredHL, Line) => true,
        (NonTangentialCube, Line) => true,
        (NonTangentialCube, RadialHalfLine) => dom.dim == 2,
        (HeatFlow | PoissonFlow, Line | RadialHalfLine) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{} operator on {}", op.kind, dom)))
    }
}

fn check_nonnegative(f: &Profile) -> Result<()> {
    for (&t, &v) in f.breakpoints().iter().zip(f.values()) {
        if v < 0.0 {
            return Err(Error::NegativeProfile { t, value: v });
        }
    }
    Ok(())
}

type Build<'a> = Box<dyn Fn(&[f64]) -> Witness + 'a>;

/// Search box and parameter-to-witness map for node x.
fn family<'a>(op: &'a OperatorSpec, f: &Profile, x: f64) -> (Vec<Axis>, Build<'a>) {
    let cfg = &op.search;
    let dom = f.domain();
    let alpha = op.alpha;
    let (t0, tn) = (f.first(), f.last());
    let reach = (x - t0).abs().max((x - tn).abs());
    let u_axis = |i: usize| if alpha > 0.0 { Axis::linear(-1.0, 1.0, cfg.nodes(i, 21)) } else { Axis::linear(0.0, 0.0, 1) };
    let scale_axis = |i: usize, hi: f64, n: usize| Axis::log(hi * 1e-6, hi, cfg.nodes(i, n));
    match (op.kind, dom.kind) {
        (OperatorKind::CenteredHL, _) => (
            vec![Axis::linear(0.0, reach, cfg.nodes(0, 257))],
            Box::new(move |p: &[f64]| Witness::Interval { a: x - p[0], b: x + p[0] }),
        ),
        (OperatorKind::UncenteredHL | OperatorKind::SphereUncentered, DomainKind::Line) => (
            vec![Axis::linear(x.min(t0), x, cfg.nodes(0, 41)), Axis::linear(x, x.max(tn), cfg.nodes(1, 41))],
            Box::new(|p: &[f64]| Witness::Interval { a: p[0], b: p[1] }),
        ),
        (OperatorKind::UncenteredHL | OperatorKind::SphereUncentered, DomainKind::Circle) => (
            vec![Axis::linear(x - TAU, x, cfg.nodes(0, 41)), Axis::linear(x, x + TAU, cfg.nodes(1, 41))],
            Box::new(|p: &[f64]| Witness::Interval { a: p[0], b: p[1].min(p[0] + TAU) }),
        ),
        (OperatorKind::UncenteredHL | OperatorKind::SphereUncentered, DomainKind::RadialHalfLine) => (
            vec![Axis::linear(-1.0, 1.0, cfg.nodes(0, 15)), scale_axis(1, tn + x + cfg.box_margin, 36)],
            Box::new(move |p: &[f64]| Witness::Ball { center: x + p[0] * p[1], radius: p[1] }),
        ),
        (OperatorKind::UncenteredHL | OperatorKind::SphereUncentered, DomainKind::PolarInterval) => (
            vec![Axis::linear(-1.0, 1.0, cfg.nodes(0, 21)), scale_axis(1, PI, 40)],
            Box::new(move |p: &[f64]| Witness::Ball { center: x + p[0] * p[1], radius: p[1] }),
        ),
        (OperatorKind::NonTangentialCube, DomainKind::Line) => (
            vec![u_axis(0), scale_axis(1, reach + cfg.box_margin, 48)],
            Box::new(move |p: &[f64]| Witness::Cube(CubeSpec::interval(x + p[0] * alpha * p[1], p[1]))),
        ),
        (OperatorKind::NonTangentialCube, _) => (
            vec![
                scale_axis(0, tn + x + cfg.box_margin, 16),
                Axis::linear(0.0, FRAC_PI_4, cfg.nodes(1, 4)),
                u_axis(2).with_nodes(cfg.nodes(2, 7)),
                u_axis(3).with_nodes(cfg.nodes(3, 7)),
            ],
            Box::new(move |p: &[f64]| {
                let (h, phi) = (p[0], p[1]);
                let (s, c) = phi.sin_cos();
                let (u1, u2) = (alpha * h * p[2], alpha * h * p[3]);
                Witness::Cube(CubeSpec::square([x - (c * u1 - s * u2), -(s * u1 + c * u2)], h, phi))
            }),
        ),
        (OperatorKind::HeatFlow, kind) => (
            vec![u_axis(0), Axis::log(1e-4, cfg.t_max.sqrt(), cfg.nodes(1, 48))],
            Box::new(move |p: &[f64]| {
                let y = x + p[0] * alpha * p[1];
                let y = if kind == DomainKind::RadialHalfLine { y.abs() } else { y };
                Witness::Parabolic(ParabolicPoint { rho_y: y, t: p[1] * p[1] })
            }),
        ),
        (OperatorKind::PoissonFlow, kind) => (
            vec![u_axis(0), Axis::log(1e-6, cfg.t_max, cfg.nodes(1, 48))],
            Box::new(move |p: &[f64]| {
                let y = x + p[0] * alpha * p[1];
                let y = if kind == DomainKind::RadialHalfLine { y.abs() } else { y };
                Witness::Parabolic(ParabolicPoint { rho_y: y, t: p[1] })
            }),
        ),
    }
}

impl Axis {
    fn with_nodes(mut self, n: usize) -> Self {
        if self.hi > self.lo {
            self.n = n;
        }
        self
    }
}

/// Mf(x) and a witness realizing it.
///
/// The degenerate witness (the point itself) always competes, so the result
/// is never below f(x).
pub fn maximal_value(op: &OperatorSpec, f: &Profile, x: f64) -> Result<(f64, Witness)> {
    check_supported(op, f)?;
    check_nonnegative(f)?;
    Ok(solve(op, f, x))
}

/// One-parameter families centered at a symmetry point of the domain (the
/// origin, or a pole). Optima there lie on a curved ridge of the main
/// parametrization, where coordinate refinement converges slowly.
fn pole_families<'a>(op: &'a OperatorSpec, f: &Profile, x: f64) -> Vec<(Vec<Axis>, Build<'a>)> {
    let cfg = &op.search;
    let dom = f.domain();
    let alpha = op.alpha;
    let mut out: Vec<(Vec<Axis>, Build<'a>)> = vec![];
    match (op.kind, dom.kind) {
        (OperatorKind::UncenteredHL | OperatorKind::SphereUncentered, DomainKind::RadialHalfLine) => {
            let hi = f.last() + x + cfg.box_margin;
            out.push((vec![Axis::log(x, hi, cfg.nodes(1, 48))], Box::new(|p: &[f64]| Witness::Ball { center: 0.0, radius: p[0] })));
        }
        (OperatorKind::UncenteredHL | OperatorKind::SphereUncentered, DomainKind::PolarInterval) => {
            out.push((vec![Axis::linear(x, PI, cfg.nodes(1, 40))], Box::new(|p: &[f64]| Witness::Ball { center: 0.0, radius: p[0] })));
            out.push((
                vec![Axis::linear(PI - x, PI, cfg.nodes(1, 40))],
                Box::new(|p: &[f64]| Witness::Ball { center: PI, radius: p[0] }),
            ));
        }
        (OperatorKind::HeatFlow, DomainKind::RadialHalfLine) if alpha > 0.0 && x / alpha < cfg.t_max.sqrt() => {
            out.push((
                vec![Axis::log(x / alpha, cfg.t_max.sqrt(), cfg.nodes(1, 48))],
                Box::new(|p: &[f64]| Witness::Parabolic(ParabolicPoint { rho_y: 0.0, t: p[0] * p[0] })),
            ));
        }
        (OperatorKind::PoissonFlow, DomainKind::RadialHalfLine) if alpha > 0.0 && x / alpha < cfg.t_max => {
            out.push((
                vec![Axis::log(x / alpha, cfg.t_max, cfg.nodes(1, 48))],
                Box::new(|p: &[f64]| Witness::Parabolic(ParabolicPoint { rho_y: 0.0, t: p[0] })),
            ));
        }
        _ => {}
    }
    out
}

/// Nodes just off a breakpoint want witnesses of about their distance to it,
/// which can sit below the main family's smallest scale.
fn near_kink_family<'a>(op: &'a OperatorSpec, f: &Profile, x: f64) -> Option<(Vec<Axis>, Build<'a>)> {
    let scaled = matches!(
        (op.kind, f.domain().kind),
        (OperatorKind::UncenteredHL | OperatorKind::SphereUncentered, DomainKind::RadialHalfLine | DomainKind::PolarInterval)
            | (OperatorKind::NonTangentialCube, DomainKind::Line)
    );
    if !scaled || (op.kind == OperatorKind::NonTangentialCube && op.alpha == 0.0) {
        return None;
    }
    let delta = f.breakpoints().iter().map(|&b| (b - x).abs()).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
    let (mut axes, build) = family(op, f, x);
    let floor = axes[1].lo.exp();
    if !(delta < 16.0 * floor) {
        return None;
    }
    axes[1] = Axis::log(delta / 8.0, 64.0 * delta, op.search.nodes(1, 24));
    Some((axes, build))
}

/// The (u, scale) families restricted to u = ±1: x on the rim of the ball or
/// cone. Optima often ride this edge of the box, where the 2-D grid is thin.
fn edge_families<'a>(op: &'a OperatorSpec, f: &Profile, x: f64) -> Vec<(Vec<Axis>, Build<'a>)> {
    let mut out: Vec<(Vec<Axis>, Build<'a>)> = vec![];
    for u in [-1.0, 1.0] {
        let (axes, build) = family(op, f, x);
        if axes.len() != 2 || axes[0].log || axes[0].lo != -1.0 || axes[0].hi != 1.0 {
            return out;
        }
        let scale = axes[1].with_nodes(op.search.nodes(1, 96));
        out.push((vec![scale], Box::new(move |p: &[f64]| build(&[u, p[0]]))));
    }
    out
}

fn solve(op: &OperatorSpec, f: &Profile, x: f64) -> (f64, Witness) {
    let fx = f.eval(x);
    let mut best = (fx, Witness::Degenerate { x });
    let mut families = vec![family(op, f, x)];
    families.extend(near_kink_family(op, f, x));
    families.extend(edge_families(op, f, x));
    families.extend(pole_families(op, f, x));
    for (axes, build) in families {
        let value = |p: &[f64]| witness_average(f, op.kind, &build(p)).unwrap_or(f64::NEG_INFINITY);
        let key = |p: &[f64]| build(p).key(x);
        let opt = maximize(&value, &key, &axes, op.search.settings());
        let w = build(&opt.params);
        let tie = 1e-12 * best.0.abs().max(opt.value.abs());
        if opt.value > best.0 + tie || (opt.value >= best.0 - tie && best.1 != (Witness::Degenerate { x }) && w.key(x) < best.1.key(x)) {
            best = (opt.value, w);
        }
    }
    best
}

/// Evaluate the maximal function on `grid` (in parallel, deterministic).
pub fn evaluate(op: &OperatorSpec, f: &Profile, grid: &[f64]) -> Result<MaximalField> {
    check_supported(op, f)?;
    check_nonnegative(f)?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation grid".into()));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("evaluation grid must be strictly increasing".into()));
    }
    let dom = f.domain();
    for &x in grid {
        let inside = match dom.kind {
            DomainKind::Line | DomainKind::Circle => x.is_finite(),
            DomainKind::RadialHalfLine => x > 0.0 && x.is_finite(),
            DomainKind::PolarInterval => x > 0.0 && x < PI,
        };
        if !inside {
            return Err(Error::OutsideDomain { t: x, domain: dom.to_string() });
        }
    }
    let solved: Vec<(f64, Witness)> = grid.par_iter().map(|&x| solve(op, f, x)).collect();
    let (values, witnesses): (Vec<f64>, Vec<Witness>) = solved.into_iter().unzip();
    let gaps: Vec<f64> = grid.iter().zip(&values).map(|(&x, &v)| v - f.eval(x)).collect();
    let mut field = MaximalField {
        op: op.clone(),
        f: f.clone(),
        grid: grid.to_vec(),
        values,
        witnesses,
        deriv: vec![],
        deriv_method: vec![],
        labels: vec![],
        gaps,
        gap_tol: 0.0,
    };
    field.relabel(default_gap_tol(f));
    Ok(field_derivative(field))
}

/// Evaluation grid: n uniform nodes over the interesting part of the domain
/// (the support plus a quarter of its width on each side on the line, out to
/// 1.25 t_n on the half-line, the whole circle or polar interval), merged with
/// the profile breakpoints inside that range so isolated connecting points
/// such as peaks are always nodes.
pub fn default_grid(f: &Profile, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let mut g = match f.domain().kind {
        DomainKind::Line => {
            let (a, b) = (f.first(), f.last());
            let pad = 0.25 * (b - a);
            linspace(a - pad, b + pad, n)
        }
        DomainKind::RadialHalfLine => {
            let hi = 1.25 * f.last();
            (1..=n).map(|k| hi * k as f64 / n as f64).collect()
        }
        DomainKind::Circle => (0..n).map(|k| TAU * k as f64 / n as f64).collect(),
        DomainKind::PolarInterval => (0..n).map(|k| PI * (k as f64 + 0.5) / n as f64).collect(),
    };
    let (lo, hi) = match f.domain().kind {
        DomainKind::Line => (g[0], g[n - 1]),
        DomainKind::RadialHalfLine => (0.0, g[n - 1]),
        DomainKind::Circle => (0.0, TAU),
        DomainKind::PolarInterval => (0.0, PI),
    };
    let eps = 1e-9 * (hi - lo);
    let extra: Vec<f64> = f.breakpoints().iter().copied().filter(|&t| t > lo + eps && t < hi - eps).collect();
    if extra.is_empty() {
        return g;
    }
    g.extend(extra);
    g.sort_by(f64::total_cmp);
    g.dedup_by(|b, a| (*b - *a).abs() <= eps);
    g
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Fill in derivative samples of the field.
///
/// Disconnecting nodes use the witness average of f′ where the averaging
/// formula applies (intervals, balls, caps) and a central difference of field
/// values otherwise; connecting nodes take the mean one-sided slope of f.
pub fn field_derivative(mut field: MaximalField) -> MaximalField {
    let n = field.grid.len();
    let f = &field.f;
    let dom = f.domain();
    let fd = |i: usize| -> Option<f64> {
        if n < 2 {
            return None;
        }
        let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
        Some((field.values[r] - field.values[l]) / (field.grid[r] - field.grid[l]))
    };
    let mut deriv = Vec::with_capacity(n);
    let mut method = Vec::with_capacity(n);
    for i in 0..n {
        let x = field.grid[i];
        let (d, m) = if field.labels[i] == Label::Connecting {
            let (l, r) = f.one_sided_slopes(x);
            (Some(0.5 * (l + r)), DerivMethod::Connecting)
        } else {
            match field.witnesses[i] {
                Witness::Interval { a, b } => {
                    if dom.kind == DomainKind::Circle && b - a >= TAU {
                        (Some(0.0), DerivMethod::Witness)
                    } else if b > a {
                        (Some((f.eval(b) - f.eval(a)) / (b - a)), DerivMethod::Witness)
                    } else {
                        (fd(i), DerivMethod::Fd)
                    }
                }
                Witness::Ball { center, radius } if radius > 0.0 => {
                    let g = match dom.kind {
                        DomainKind::RadialHalfLine => ball_gradient_radial(f, center, radius).ok(),
                        DomainKind::PolarInterval => cap_gradient_polar(f, center, radius).ok(),
                        _ => Some((f.eval(center + radius) - f.eval(center - radius)) / (2.0 * radius)),
                    };
                    (g, DerivMethod::Witness)
                }
                _ => (fd(i), DerivMethod::Fd),
            }
        };
        match d {
            Some(v) if v.is_finite() => {
                deriv.push(v);
                method.push(m);
            }
            _ => {
                deriv.push(0.0);
                method.push(DerivMethod::Unavailable);
            }
        }
    }
    field.deriv = deriv;
    field.deriv_method = method;
    field
}

/// A maximal run of disconnecting nodes as an open interval (a, b).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisconnectingInterval {
    pub a: f64,
    pub b: f64,
    /// The interval runs off the end of the domain (a or b is a sentinel).
    pub a_unbounded: bool,
    pub b_unbounded: bool,
    /// First and last node indices of the run (for the circle the last index
    /// may wrap past the end of the grid).
    pub first: usize,
    pub last: usize,
}

/// Node runs of D as (first, last) index pairs; on the circle a run touching
/// both ends of the grid is merged and `last` may be smaller than `first`.
pub fn disconnecting_runs(field: &MaximalField) -> Vec<(usize, usize)> {
    let n = field.grid.len();
    let mut runs = vec![];
    let mut i = 0;
    while i < n {
        if field.is_disconnecting(i) {
            let s = i;
            while i + 1 < n && field.is_disconnecting(i + 1) {
                i += 1;
            }
            runs.push((s, i));
        }
        i += 1;
    }
    if field.f.domain().kind == DomainKind::Circle && runs.len() >= 2 {
        let first = runs[0];
        let last = *runs.last().unwrap();
        if first.0 == 0 && last.1 == n - 1 {
            runs.remove(0);
            let l = runs.len() - 1;
            runs[l].1 = first.1;
        }
    }
    runs
}

/// Disconnecting intervals with endpoints located by bisection on the gap
/// Mf − f between the last connecting and first disconnecting node.
pub fn classify_regions(field: &MaximalField, tol: f64) -> Vec<DisconnectingInterval> {
    let mut field_t = field.clone();
    field_t.relabel(tol);
    let field = &field_t;
    let n = field.grid.len();
    let dom = field.f.domain();
    let span = {
        let (a, b) = (field.f.first(), field.f.last());
        (b - a).abs() + field.op.search.box_margin
    };
    let gap_at = |t: f64| -> f64 {
        let (v, _) = solve(&field.op, &field.f, t);
        v - field.f.eval(t)
    };
    let locate = |inside: f64, outside: f64| -> f64 {
        let (mut d, mut c) = (inside, outside);
        for _ in 0..60 {
            if (d - c).abs() <= field.op.search.refine_tol * (1.0 + d.abs()) {
                break;
            }
            let m = 0.5 * (d + c);
            if gap_at(m) > tol {
                d = m;
            } else {
                c = m;
            }
        }
        0.5 * (d + c)
    };
    let wrap = |i: usize| -> (usize, f64) {
        if i >= n {
            (i - n, TAU)
        } else {
            (i, 0.0)
        }
    };
    disconnecting_runs(field)
        .into_iter()
        .map(|(s, e)| {
            let e_unwrapped = if e < s { e + n } else { e };
            let (a, a_unbounded) = if s == 0 && dom.kind != DomainKind::Circle {
                match dom.kind {
                    DomainKind::Line => (field.grid[0].min(field.f.first()) - span, true),
                    _ => (0.0, false),
                }
            } else {
                let prev = if s == 0 { n - 1 } else { s - 1 };
                let prev_t = if s == 0 { field.grid[prev] - TAU } else { field.grid[prev] };
                (locate(field.grid[s], prev_t), false)
            };
            let (b, b_unbounded) = if e_unwrapped == n - 1 && dom.kind != DomainKind::Circle {
                match dom.kind {
                    DomainKind::PolarInterval => (PI, false),
                    _ => (field.grid[n - 1].max(field.f.last()) + span, true),
                }
            } else {
                let (ie, off) = wrap(e_unwrapped);
                let (inext, off2) = wrap(e_unwrapped + 1);
                (locate(field.grid[ie] + off, field.grid[inext] + off2), false)
            };
            DisconnectingInterval { a, b, a_unbounded, b_unbounded, first: s, last: e }
        })
        .collect()
}
