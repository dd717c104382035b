//! Weighted one-dimensional domains and exact arithmetic on continuous
//! piecewise-linear profiles.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::special::sphere_area;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Line,
    RadialHalfLine,
    Circle,
    PolarInterval,
}

/// A 1-D domain together with its integration weight.
///
/// Radial and polar profiles stand for functions of |x| on R^d and of the
/// polar angle on S^d; `dim` is that d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    pub dim: u32,
}

impl Domain {
    pub fn new(kind: DomainKind, dim: u32) -> Result<Self> {
        match kind {
            DomainKind::Line | DomainKind::Circle if dim != 1 => {
                Err(Error::InvalidDomain(format!("{kind:?} has dimension 1, got {dim}")))
            }
            DomainKind::RadialHalfLine | DomainKind::PolarInterval if dim < 2 => {
                Err(Error::InvalidDomain(format!("{kind:?} needs dim >= 2, got {dim}")))
            }
            _ => Ok(Domain { kind, dim }),
        }
    }

    pub fn line() -> Self {
        Domain { kind: DomainKind::Line, dim: 1 }
    }

    pub fn circle() -> Self {
        Domain { kind: DomainKind::Circle, dim: 1 }
    }

    pub fn radial(d: u32) -> Result<Self> {
        Self::new(DomainKind::RadialHalfLine, d)
    }

    pub fn polar(d: u32) -> Result<Self> {
        Self::new(DomainKind::PolarInterval, d)
    }

    pub fn is_radial(&self) -> bool {
        self.kind == DomainKind::RadialHalfLine
    }

    /// w(t).
    pub fn weight(&self, t: f64) -> f64 {
        match self.kind {
            DomainKind::Line | DomainKind::Circle => 1.0,
            DomainKind::RadialHalfLine => t.powi(self.dim as i32 - 1),
            DomainKind::PolarInterval => t.sin().powi(self.dim as i32 - 1),
        }
    }

    /// Surface constant ω_{d-1} multiplying the radial/polar integrals (1 otherwise).
    pub fn measure_constant(&self) -> f64 {
        match self.kind {
            DomainKind::Line | DomainKind::Circle => 1.0,
            _ => sphere_area(self.dim - 1),
        }
    }

    /// ∫_a^b w(t) dt, without the surface constant.
    pub fn weight_integral(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            DomainKind::Line | DomainKind::Circle => b - a,
            DomainKind::RadialHalfLine => {
                let d = self.dim as i32;
                (b.powi(d) - a.powi(d)) / d as f64
            }
            DomainKind::PolarInterval => {
                let k = self.dim as i32 - 1;
                quad::adaptive(|t: f64| t.sin().powi(k), a, b, 1e-10, 1e-300)
            }
        }
    }

    /// ∫_a^b ℓ(t) w(t) dt for the linear ℓ with ℓ(a) = fa, ℓ(b) = fb.
    pub fn linear_integral(&self, a: f64, b: f64, fa: f64, fb: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self.kind {
            DomainKind::Line | DomainKind::Circle => 0.5 * (b - a) * (fa + fb),
            DomainKind::RadialHalfLine if self.dim <= 30 => {
                // exact: polynomial of degree dim
                let d = self.dim as i32;
                quad::fixed(|t| (fa + (fb - fa) * (t - a) / (b - a)) * t.powi(d - 1), a, b, 16)
            }
            _ => {
                let dom = *self;
                quad::adaptive(
                    |t| (fa + (fb - fa) * (t - a) / (b - a)) * dom.weight(t),
                    a,
                    b,
                    1e-10,
                    1e-300,
                )
            }
        }
    }

    /// ∫_a^b |ℓ(t)| w(t) dt, split at the zero crossing of ℓ.
    pub fn abs_linear_integral(&self, a: f64, b: f64, fa: f64, fb: f64) -> f64 {
        if fa * fb < 0.0 {
            let c = a + (b - a) * fa / (fa - fb);
            self.linear_integral(a, c, fa.abs(), 0.0) + self.linear_integral(c, b, 0.0, fb.abs())
        } else {
            self.linear_integral(a, b, fa.abs(), fb.abs())
        }
    }

    fn breakpoint_ok(&self, t: f64) -> bool {
        match self.kind {
            DomainKind::Line | DomainKind::Circle => true,
            DomainKind::RadialHalfLine => t >= 0.0,
            DomainKind::PolarInterval => (0.0..=PI).contains(&t),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Line => write!(f, "line"),
            DomainKind::Circle => write!(f, "circle"),
            DomainKind::RadialHalfLine => write!(f, "radial:{}", self.dim),
            DomainKind::PolarInterval => write!(f, "polar:{}", self.dim),
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (head, dim) = match s.split_once(':') {
            Some((h, d)) => {
                let d: u32 = d.parse().map_err(|_| Error::InvalidDomain(format!("bad dimension in '{s}'")))?;
                (h.to_string(), Some(d))
            }
            None => (s.clone(), None),
        };
        match (head.as_str(), dim) {
            ("line", None | Some(1)) => Ok(Domain::line()),
            ("circle", None | Some(1)) => Ok(Domain::circle()),
            ("radial", Some(d)) => Domain::radial(d),
            ("polar", Some(d)) => Domain::polar(d),
            _ => Err(Error::InvalidDomain(format!("'{s}' (expected line, circle, radial:D or polar:D)"))),
        }
    }
}

/// A continuous piecewise-linear function on a [`Domain`].
///
/// Outside `[t_0, t_n]` the function continues with its end values (zero for
/// admissible line and radial profiles at the far end, the plateau v_0 toward
/// 0⁺ on the half-line). Circle profiles close periodically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    domain: Domain,
    t: Vec<f64>,
    v: Vec<f64>,
    nonnegative: bool,
    // segment arrays: equal to (t, v) except on the circle, where the closing
    // node t_0 + 2π is appended
    #[serde(skip)]
    st: Vec<f64>,
    #[serde(skip)]
    sv: Vec<f64>,
    #[serde(skip)]
    cum: Vec<f64>,
}

/// Build a profile from samples, enforcing the domain rules.
pub fn build_profile(samples: &[(f64, f64)], domain: Domain) -> Result<Profile> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for &(t, v) in samples {
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::NonFinite { t, v });
        }
        if !domain.breakpoint_ok(t) {
            return Err(Error::OutsideDomain { t, domain: domain.to_string() });
        }
        let t = if domain.kind == DomainKind::Circle { t.rem_euclid(TAU) } else { t };
        // rem_euclid can return TAU itself for tiny negative inputs
        let t = if domain.kind == DomainKind::Circle && t >= TAU { 0.0 } else { t };
        pts.push((t, v));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateBreakpoint(w[0].0));
        }
    }
    let (t, v): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    match domain.kind {
        DomainKind::Line => {
            for &i in &[0, t.len() - 1] {
                if v[i] != 0.0 {
                    return Err(Error::NonzeroBoundary { t: t[i], value: v[i], domain: domain.to_string() });
                }
            }
        }
        DomainKind::RadialHalfLine => {
            let i = t.len() - 1;
            if v[i] != 0.0 {
                return Err(Error::NonzeroBoundary { t: t[i], value: v[i], domain: domain.to_string() });
            }
        }
        _ => {}
    }
    Ok(Profile::assemble(domain, t, v))
}

impl Profile {
    fn assemble(domain: Domain, t: Vec<f64>, v: Vec<f64>) -> Profile {
        let nonnegative = v.iter().all(|&x| x >= 0.0);
        let (mut st, mut sv) = (t.clone(), v.clone());
        if domain.kind == DomainKind::Circle {
            st.push(t[0] + TAU);
            sv.push(v[0]);
        }
        let mut cum = Vec::with_capacity(st.len());
        cum.push(0.0);
        for k in 1..st.len() {
            cum.push(cum[k - 1] + 0.5 * (st[k] - st[k - 1]) * (sv[k] + sv[k - 1]));
        }
        Profile { domain, t, v, nonnegative, st, sv, cum }
    }

    /// Build from already sorted nodes without the boundary-value rule.
    ///
    /// Used for gridded outputs such as maximal fields and lateral profiles.
    /// Panics if the nodes are not strictly increasing or fewer than 2.
    pub fn from_nodes_unchecked(domain: Domain, t: Vec<f64>, v: Vec<f64>) -> Profile {
        assert!(t.len() >= 2 && t.len() == v.len(), "need at least two nodes");
        assert!(t.windows(2).all(|w| w[0] < w[1]), "nodes must be strictly increasing");
        Profile::assemble(domain, t, v)
    }

    /// Restore the derived arrays after deserialization.
    pub fn rebuild(self) -> Profile {
        Profile::assemble(self.domain, self.t, self.v)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn max_value(&self) -> f64 {
        self.v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn first(&self) -> f64 {
        self.t[0]
    }

    pub fn last(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Number of linear segments (the circle counts its closing segment).
    pub fn segment_count(&self) -> usize {
        self.st.len() - 1
    }

    /// Segment k as (a, b, f(a), f(b)).
    pub fn segment(&self, k: usize) -> (f64, f64, f64, f64) {
        (self.st[k], self.st[k + 1], self.sv[k], self.sv[k + 1])
    }

    pub(crate) fn seg_nodes(&self) -> (&[f64], &[f64]) {
        (&self.st, &self.sv)
    }

    /// Slope of segment k.
    pub fn slope(&self, k: usize) -> f64 {
        let (a, b, fa, fb) = self.segment(k);
        (fb - fa) / (b - a)
    }

    fn wrap(&self, x: f64) -> (f64, f64) {
        // (x reduced into [st_0, st_0 + 2π), number of periods removed)
        let t0 = self.st[0];
        let k = ((x - t0) / TAU).floor();
        let mut y = x - k * TAU;
        let mut k = k;
        if y >= t0 + TAU {
            y -= TAU;
            k += 1.0;
        }
        if y < t0 {
            y = t0;
        }
        (y, k)
    }

    /// Index k with st[k] <= x < st[k+1], clamped to valid segments.
    fn locate(&self, x: f64) -> usize {
        let n = self.st.len();
        match self.st.partition_point(|&s| s <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    /// f(x), with constant continuation outside the breakpoints and periodic
    /// wrapping on the circle.
    pub fn eval(&self, x: f64) -> f64 {
        let x = if self.domain.kind == DomainKind::Circle { self.wrap(x).0 } else { x };
        let n = self.st.len();
        if x <= self.st[0] {
            return self.sv[0];
        }
        if x >= self.st[n - 1] {
            return self.sv[n - 1];
        }
        let k = self.locate(x);
        let (a, b, fa, fb) = self.segment(k);
        if x == a {
            return fa;
        }
        fa + (fb - fa) * (x - a) / (b - a)
    }

    /// One-sided slopes (left, right) at x; zero in the constant continuation.
    pub fn one_sided_slopes(&self, x: f64) -> (f64, f64) {
        let x = if self.domain.kind == DomainKind::Circle { self.wrap(x).0 } else { x };
        let n = self.st.len();
        let seg_slope = |k: usize| self.slope(k);
        let periodic = self.domain.kind == DomainKind::Circle;
        if x < self.st[0] || (x == self.st[0] && !periodic) {
            let r = if x == self.st[0] { seg_slope(0) } else { 0.0 };
            return (0.0, r);
        }
        if x > self.st[n - 1] || (x == self.st[n - 1] && !periodic) {
            let l = if x == self.st[n - 1] { seg_slope(n - 2) } else { 0.0 };
            return (l, 0.0);
        }
        let k = self.locate(x);
        if x == self.st[k] {
            let left = if k == 0 { seg_slope(n - 2) } else { seg_slope(k - 1) };
            (left, seg_slope(k))
        } else {
            (seg_slope(k), seg_slope(k))
        }
    }

    /// True if x coincides with a breakpoint (within `margin`).
    pub fn near_breakpoint(&self, x: f64, margin: f64) -> bool {
        let x = if self.domain.kind == DomainKind::Circle { self.wrap(x).0 } else { x };
        let p = self.st.partition_point(|&s| s < x);
        let mut best = f64::INFINITY;
        if p < self.st.len() {
            best = best.min((self.st[p] - x).abs());
        }
        if p > 0 {
            best = best.min((x - self.st[p - 1]).abs());
        }
        best <= margin
    }

    fn antiderivative_local(&self, x: f64) -> f64 {
        // ∫_{st_0}^{x} f for x inside or beyond the segment range
        let n = self.st.len();
        if x <= self.st[0] {
            return self.sv[0] * (x - self.st[0]);
        }
        if x >= self.st[n - 1] {
            return self.cum[n - 1] + self.sv[n - 1] * (x - self.st[n - 1]);
        }
        let k = self.locate(x);
        self.cum[k] + 0.5 * (x - self.st[k]) * (self.sv[k] + self.eval_in_segment(k, x))
    }

    fn eval_in_segment(&self, k: usize, x: f64) -> f64 {
        let (a, b, fa, fb) = self.segment(k);
        fa + (fb - fa) * (x - a) / (b - a)
    }

    /// Unweighted ∫_a^b f(t) dt (a ≤ b); periodic on the circle.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if self.domain.kind == DomainKind::Circle {
            // whole periods, then the remainder starting from a reduced into
            // the segment range; local formulas keep short arcs accurate
            let n = self.st.len();
            let total = self.cum[n - 1];
            let (ya, _) = self.wrap(a);
            let len = b - a;
            let periods = (len / TAU).floor();
            let yb = ya + (len - periods * TAU);
            let end = self.st[n - 1];
            let part = if yb <= end {
                self.integral_local(ya, yb)
            } else {
                self.integral_local(ya, end) + self.integral_local(self.st[0], yb - TAU)
            };
            return periods * total + part;
        }
        self.integral_local(a, b)
    }

    fn integral_local(&self, a: f64, b: f64) -> f64 {
        let n = self.st.len();
        let (lo, hi) = (self.st[0], self.st[n - 1]);
        if b <= lo {
            return self.sv[0] * (b - a);
        }
        if a >= hi {
            return self.sv[n - 1] * (b - a);
        }
        if a >= lo && b <= hi {
            let ka = self.locate(a);
            let kb = self.locate(b);
            let fa = self.eval_in_segment(ka, a);
            let fb = self.eval_in_segment(kb, b);
            if ka == kb {
                return 0.5 * (b - a) * (fa + fb);
            }
            let head = 0.5 * (self.st[ka + 1] - a) * (fa + self.sv[ka + 1]);
            let tail = 0.5 * (b - self.st[kb]) * (self.sv[kb] + fb);
            return head + (self.cum[kb] - self.cum[ka + 1]) + tail;
        }
        self.antiderivative_local(b) - self.antiderivative_local(a)
    }

    /// Mean of f over [a, b]; f(a) when a = b.
    pub fn average(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return self.eval(a);
        }
        self.integral(a, b) / (b - a)
    }

    /// Linear pieces covering the natural span of the domain, including the
    /// constant continuation where it carries weight (radial plateau toward 0,
    /// polar ends).
    pub(crate) fn pieces(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.st.len() + 1);
        match self.domain.kind {
            DomainKind::RadialHalfLine | DomainKind::PolarInterval if self.st[0] > 0.0 => {
                out.push((0.0, self.st[0], self.sv[0], self.sv[0]));
            }
            _ => {}
        }
        for k in 0..self.segment_count() {
            out.push(self.segment(k));
        }
        if self.domain.kind == DomainKind::PolarInterval && self.last() < PI {
            let l = self.v[self.v.len() - 1];
            out.push((self.last(), PI, l, l));
        }
        out
    }

    /// Span covered by [`Self::pieces`].
    pub fn span(&self) -> (f64, f64) {
        match self.domain.kind {
            DomainKind::Line => (self.first(), self.last()),
            DomainKind::RadialHalfLine => (0.0, self.last()),
            DomainKind::Circle => (self.st[0], self.st[0] + TAU),
            DomainKind::PolarInterval => (0.0, PI),
        }
    }

    /// Total variation Σ|v_{k+1} − v_k| (the closing segment counts on the circle).
    pub fn variation(&self) -> f64 {
        self.sv.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Total variation of the restriction to [a, b].
    pub fn variation_on(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut pts = vec![a];
        if self.domain.kind == DomainKind::Circle {
            let base = ((a - self.st[0]) / TAU).floor() - 1.0;
            let mut shift = base * TAU;
            while shift <= b {
                pts.extend(self.t.iter().map(|&t| t + shift).filter(|&t| t > a && t < b));
                shift += TAU;
            }
            pts.sort_by(f64::total_cmp);
        } else {
            pts.extend(self.t.iter().cloned().filter(|&t| t > a && t < b));
        }
        pts.push(b);
        pts.windows(2).map(|w| (self.eval(w[1]) - self.eval(w[0])).abs()).sum()
    }

    /// ‖∇f‖_{L¹}: Σ |slope|·∫_seg w, times ω_{d−1} on radial and polar domains.
    pub fn weighted_derivative_l1(&self) -> f64 {
        let dom = self.domain;
        let s: f64 = (0..self.segment_count())
            .map(|k| {
                let (a, b, fa, fb) = self.segment(k);
                ((fb - fa) / (b - a)).abs() * dom.weight_integral(a, b)
            })
            .sum();
        s * dom.measure_constant()
    }

    /// ‖f‖_{L¹} with the domain weight and surface constant.
    pub fn l1_norm(&self) -> f64 {
        let dom = self.domain;
        let s: f64 = self.pieces().iter().map(|&(a, b, fa, fb)| dom.abs_linear_integral(a, b, fa, fb)).sum();
        s * dom.measure_constant()
    }

    /// |f| as an exact PL profile, with breakpoints inserted at zero crossings.
    pub fn abs_reduce(&self) -> Profile {
        if self.nonnegative {
            return self.clone();
        }
        let mut t = Vec::with_capacity(self.t.len() + 4);
        let mut v = Vec::with_capacity(self.t.len() + 4);
        for k in 0..self.segment_count() {
            let (a, b, fa, fb) = self.segment(k);
            if k < self.t.len() {
                t.push(a);
                v.push(fa.abs());
            }
            if fa * fb < 0.0 {
                let c = a + (b - a) * fa / (fa - fb);
                if c > a && c < b {
                    t.push(if self.domain.kind == DomainKind::Circle && c >= TAU { c - TAU } else { c });
                    v.push(0.0);
                }
            }
        }
        if self.domain.kind != DomainKind::Circle {
            t.push(self.last());
            v.push(self.v[self.v.len() - 1].abs());
        }
        let mut pts: Vec<(f64, f64)> = t.into_iter().zip(v).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let (t, v) = pts.into_iter().unzip();
        Profile::assemble(self.domain, t, v)
    }

    /// Pointwise a·f + b·g on the union of breakpoints.
    pub fn combine(&self, a: f64, other: &Profile, b: f64) -> Result<Profile> {
        check_same_domain(self, other)?;
        let t = union_breakpoints(self, other);
        let v = t.iter().map(|&x| a * self.eval(x) + b * other.eval(x)).collect();
        Ok(Profile::assemble(self.domain, t, v))
    }

    /// c·f.
    pub fn scaled(&self, c: f64) -> Profile {
        Profile::assemble(self.domain, self.t.clone(), self.v.iter().map(|x| c * x).collect())
    }

    /// Boundary diagnostics (w·f at the smallest and largest breakpoints).
    pub fn boundary_decay(&self) -> Result<(f64, f64)> {
        if self.domain.kind != DomainKind::RadialHalfLine {
            return Err(Error::InvalidDomain(format!("boundary_decay needs a radial profile, got {}", self.domain)));
        }
        let d = &self.domain;
        let n = self.t.len() - 1;
        Ok((d.weight(self.t[0]) * self.v[0], d.weight(self.t[n]) * self.v[n]))
    }
}

pub(crate) fn check_same_domain(f: &Profile, g: &Profile) -> Result<()> {
    if f.domain != g.domain {
        return Err(Error::DomainMismatch(f.domain.to_string(), g.domain.to_string()));
    }
    Ok(())
}

/// Sorted union of the breakpoints of f and g (both on the same domain).
pub(crate) fn union_breakpoints(f: &Profile, g: &Profile) -> Vec<f64> {
    let mut t: Vec<f64> = f.t.iter().chain(g.t.iter()).cloned().collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Pieces of the common refinement of f and g over the union of their spans.
fn common_pieces(f: &Profile, g: &Profile) -> Vec<(f64, f64)> {
    let mut t = union_breakpoints(f, g);
    match f.domain.kind {
        DomainKind::Circle => {
            t.push(t[0] + TAU);
        }
        DomainKind::RadialHalfLine => {
            if t[0] > 0.0 {
                t.insert(0, 0.0);
            }
        }
        DomainKind::PolarInterval => {
            if t[0] > 0.0 {
                t.insert(0, 0.0);
            }
            if t[t.len() - 1] < PI {
                t.push(PI);
            }
        }
        DomainKind::Line => {}
    }
    t.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Components of the W^{1,1} distance between two profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct W11Distance {
    pub l1: f64,
    pub deriv_l1: f64,
    pub sup_tail: f64,
}

/// Weighted L¹ distance, weighted L¹ distance of derivatives, and sup |f − g|
/// on {t ≥ δ} (radial), [δ, π − δ] (polar) or the whole domain (line, circle).
pub fn w11_distance(f: &Profile, g: &Profile, delta: f64) -> Result<W11Distance> {
    check_same_domain(f, g)?;
    let dom = f.domain;
    let mut l1 = 0.0;
    let mut dl1 = 0.0;
    let mut sup: f64 = 0.0;
    let in_tail = |x: f64| match dom.kind {
        DomainKind::RadialHalfLine => x >= delta,
        DomainKind::PolarInterval => x >= delta && x <= PI - delta,
        _ => true,
    };
    for (a, b) in common_pieces(f, g) {
        let da = f.eval(a) - g.eval(a);
        let db = f.eval(b) - g.eval(b);
        l1 += dom.abs_linear_integral(a, b, da, db);
        dl1 += ((db - da) / (b - a)).abs() * dom.weight_integral(a, b);
        for (x, dx) in [(a, da), (b, db)] {
            if in_tail(x) {
                sup = sup.max(dx.abs());
            }
        }
        // the tail boundary itself may sit inside a piece
        for edge in [delta, PI - delta] {
            if matches!(dom.kind, DomainKind::RadialHalfLine | DomainKind::PolarInterval) && edge > a && edge < b && in_tail(edge) {
                sup = sup.max((da + (db - da) * (edge - a) / (b - a)).abs());
            }
        }
    }
    let c = dom.measure_constant();
    Ok(W11Distance { l1: l1 * c, deriv_l1: dl1 * c, sup_tail: sup })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> Profile {
        build_profile(&[(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)], Domain::line()).unwrap()
    }

    #[test]
    fn construction_examples() {
        let t = tent();
        assert_eq!(t.segment_count(), 2);
        let c = build_profile(&[(0.0, 1.0), (PI, 1.0)], Domain::circle()).unwrap();
        assert_eq!(c.eval(5.0), 1.0);
        assert_eq!(c.eval(-1.0), 1.0);
        let r = build_profile(&[(0.5, 1.0), (1.0, 0.0)], Domain::radial(2).unwrap()).unwrap();
        assert_eq!(r.eval(0.1), 1.0);
        assert_eq!(r.eval(3.0), 0.0);
    }

    #[test]
    fn construction_errors() {
        let l = Domain::line();
        assert!(matches!(build_profile(&[(0.0, 0.0)], l), Err(Error::TooFewSamples(1))));
        assert!(matches!(build_profile(&[(0.0, 0.0), (0.0, 0.0)], l), Err(Error::DuplicateBreakpoint(_))));
        assert!(matches!(build_profile(&[(0.0, 0.0), (1.0, 1.0)], l), Err(Error::NonzeroBoundary { .. })));
        assert!(matches!(build_profile(&[(0.0, f64::NAN), (1.0, 0.0)], l), Err(Error::NonFinite { .. })));
        let r = Domain::radial(2).unwrap();
        assert!(matches!(build_profile(&[(-1.0, 1.0), (1.0, 0.0)], r), Err(Error::OutsideDomain { .. })));
        assert!(matches!(build_profile(&[(0.0, 1.0), (2.0 * PI, 1.0)], Domain::circle()), Err(Error::DuplicateBreakpoint(_))));
        assert!(Domain::radial(1).is_err());
        assert!(matches!(build_profile(&[(0.5, 1.0), (4.0, 0.0)], Domain::polar(2).unwrap()), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn domain_parse_roundtrip() {
        for s in ["line", "circle", "radial:2", "radial:3", "polar:2"] {
            let d: Domain = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("radial".parse::<Domain>().is_err());
        assert!("torus".parse::<Domain>().is_err());
    }

    #[test]
    fn derivative_norm_examples() {
        assert!((tent().weighted_derivative_l1() - 2.0).abs() < 1e-15);
        let c = build_profile(&[(0.0, 1.0), (PI, 1.0)], Domain::circle()).unwrap();
        assert_eq!(c.weighted_derivative_l1(), 0.0);
        let r = build_profile(&[(0.5, 1.0), (1.0, 0.0)], Domain::radial(2).unwrap()).unwrap();
        assert!((r.weighted_derivative_l1() - 1.5 * PI).abs() < 1e-13);
        // independent check: midpoint rule on 2π·|f'|·r
        let m = 100000;
        let h = 0.5 / m as f64;
        let q: f64 = (0..m).map(|i| 2.0 * PI * 2.0 * (0.5 + (i as f64 + 0.5) * h) * h).sum();
        assert!((r.weighted_derivative_l1() - q).abs() < 1e-9);
    }

    #[test]
    fn polar_weight_by_quadrature() {
        let p = build_profile(&[(0.0, 0.0), (PI, PI)], Domain::polar(3).unwrap()).unwrap();
        // ω_2 ∫ sin² = 4π·π/2
        assert!((p.weighted_derivative_l1() - 2.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn variation_examples() {
        assert_eq!(tent().variation(), 2.0);
        let c = build_profile(&[(0.0, 1.0), (PI, 1.0)], Domain::circle()).unwrap();
        assert_eq!(c.variation(), 0.0);
        let p = build_profile(&[(0.0, 0.0), (1.0, 3.0), (2.0, 1.0), (3.0, 2.0)], Domain::polar(2).unwrap());
        assert!(p.is_ok());
        let p = Profile::from_nodes_unchecked(Domain::line(), vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 3.0, 1.0, 2.0]);
        assert_eq!(p.variation(), 6.0);
        assert_eq!(tent().variation_on(-0.5, 0.5), 1.0);
        let c = build_profile(&[(0.0, 0.0), (PI, 1.0)], Domain::circle()).unwrap();
        assert_eq!(c.variation(), 2.0);
        assert!((c.variation_on(-1.0, 1.0) - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn abs_reduce_examples() {
        let l = Domain::line();
        let p = Profile::from_nodes_unchecked(l, vec![-1.0, 1.0], vec![-1.0, 1.0]).abs_reduce();
        assert_eq!(p.breakpoints(), &[-1.0, 0.0, 1.0]);
        assert_eq!(p.values(), &[1.0, 0.0, 1.0]);
        assert!(p.is_nonnegative());
        assert_eq!(tent().abs_reduce(), tent());
        let p = Profile::from_nodes_unchecked(l, vec![0.0, 2.0, 4.0], vec![-2.0, 2.0, -2.0]).abs_reduce();
        assert_eq!(p.breakpoints(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.values(), &[2.0, 0.0, 2.0, 0.0, 2.0]);
        let c = build_profile(&[(1.0, 1.0), (4.0, -1.0)], Domain::circle()).unwrap().abs_reduce();
        assert_eq!(c.len(), 4);
        assert!(c.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn integrals_and_averages() {
        let t = tent();
        assert_eq!(t.average(-1.0, 1.0), 0.5);
        assert_eq!(t.average(0.0, 2.0), 0.25);
        assert_eq!(t.average(0.3, 0.3), 0.7);
        assert!((t.integral(-5.0, 5.0) - 1.0).abs() < 1e-15);
        assert!((t.integral(-0.5, 0.25) - (0.375 + 0.21875)).abs() < 1e-15);
        let c = build_profile(&[(0.0, 0.0), (PI, 2.0)], Domain::circle()).unwrap();
        assert!((c.integral(0.0, TAU) - TAU).abs() < 1e-14);
        assert!((c.integral(-TAU, 2.0 * TAU) - 3.0 * TAU).abs() < 1e-13);
        assert!((c.integral(PI, PI + TAU) - TAU).abs() < 1e-13);
        let r = build_profile(&[(0.5, 1.0), (1.0, 0.0)], Domain::radial(2).unwrap()).unwrap();
        assert!((r.integral(0.0, 1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn w11_examples() {
        let t = tent();
        let z = w11_distance(&t, &t, 0.01).unwrap();
        assert_eq!((z.l1, z.deriv_l1, z.sup_tail), (0.0, 0.0, 0.0));
        let t2 = t.scaled(1.1);
        let d = w11_distance(&t, &t2, 0.01).unwrap();
        assert!((d.deriv_l1 - 0.2).abs() < 1e-14);
        assert!((d.l1 - 0.1).abs() < 1e-14);
        assert!((d.sup_tail - 0.1).abs() < 1e-14);
        let c = build_profile(&[(0.0, 1.0), (PI, 1.0)], Domain::circle()).unwrap();
        assert!(w11_distance(&t, &c, 0.01).is_err());
    }

    #[test]
    fn w11_matches_riemann_sum() {
        use rand::{Rng, SeedableRng};
        // breakpoints on the lattice 2^-6 so that 2^20 midpoint cells over [0, 4]
        // never straddle a kink
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let r = Domain::radial(2).unwrap();
        let random = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut k: u32 = rng.gen_range(4..20);
            let mut pts = vec![];
            while k < 240 {
                pts.push((k as f64 / 64.0, rng.gen_range(0.0..1.0)));
                k += rng.gen_range(8..40);
            }
            pts.push((k.min(255) as f64 / 64.0, 0.0));
            build_profile(&pts, r).unwrap()
        };
        for _ in 0..3 {
            let f = random(&mut rng);
            let g = random(&mut rng);
            let d = w11_distance(&f, &g, 0.01).unwrap();
            let m = 1usize << 20;
            let h = 4.0 / m as f64;
            let (mut l1, mut dl1, mut sup) = (0.0, 0.0, 0.0f64);
            for i in 0..m {
                let x = (i as f64 + 0.5) * h;
                let diff = f.eval(x) - g.eval(x);
                l1 += diff.abs() * x * h;
                sup = sup.max(diff.abs());
                let (_, sf) = f.one_sided_slopes(x);
                let (_, sg) = g.one_sided_slopes(x);
                dl1 += (sf - sg).abs() * x * h;
            }
            let w = 2.0 * PI;
            assert!((d.l1 - w * l1).abs() < 1e-8, "{} vs {}", d.l1, w * l1);
            assert!((d.deriv_l1 - w * dl1).abs() < 1e-8, "{} vs {}", d.deriv_l1, w * dl1);
            assert!((d.sup_tail - sup).abs() < 1e-5);
        }
    }

    #[test]
    fn boundary_decay_examples() {
        let r = Domain::radial(3).unwrap();
        let f = build_profile(&[(0.5, 1.0), (1.0, 1.0), (2.0, 0.0)], r).unwrap();
        let (z, i) = f.boundary_decay().unwrap();
        assert_eq!(i, 0.0);
        assert_eq!(z, 0.25);
        assert!(tent().boundary_decay().is_err());
        // r^{-1/2} on shrinking grids: w·f at t_0 is t_0^{1/2}
        let d2 = Domain::radial(2).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..6 {
            let t0 = 10f64.powi(-k);
            let mut s: Vec<(f64, f64)> = (0..40)
                .map(|i| {
                    let t = t0 * (1.0 / t0).powf(i as f64 / 39.0);
                    (t, t.powf(-0.5))
                })
                .collect();
            s.push((2.0, 0.0));
            let (z, _) = build_profile(&s, d2).unwrap().boundary_decay().unwrap();
            assert!((z - t0.sqrt()).abs() < 1e-12);
            assert!(z < prev);
            prev = z;
        }
    }

    #[test]
    fn one_sided_slopes_at_kinks() {
        let t = tent();
        assert_eq!(t.one_sided_slopes(0.0), (1.0, -1.0));
        assert_eq!(t.one_sided_slopes(0.5), (-1.0, -1.0));
        assert_eq!(t.one_sided_slopes(-3.0), (0.0, 0.0));
        assert_eq!(t.one_sided_slopes(-1.0), (0.0, 1.0));
        assert!(t.near_breakpoint(1e-9, 1e-6));
        assert!(!t.near_breakpoint(0.3, 1e-6));
    }
}
