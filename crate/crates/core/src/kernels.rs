//! Averaging primitives: intervals and arcs, balls around radial profiles,
//! squares, geodesic caps, and heat/Poisson convolutions.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{DomainKind, Profile};
use crate::quad;
use crate::special::{bessel_i0_scaled, ellip_e, normal_mass, sin_power_integral, sphere_area};

const REL_TOL: f64 = 1e-10;

/// Gaussian windows are cut where the kernel mass left out drops below ~1e-12.
const GAUSS_WINDOW: f64 = 8.5;

/// An axis-parallel cube (d = 1) or a rotated square (d = 2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeSpec {
    pub dim: u32,
    pub center: [f64; 2],
    pub half_side: f64,
    /// Rotation angle of the square (d = 2), reduced to [0, π/4].
    pub orientation: f64,
}

impl CubeSpec {
    pub fn interval(center: f64, half_side: f64) -> Self {
        CubeSpec { dim: 1, center: [center, 0.0], half_side, orientation: 0.0 }
    }

    pub fn square(center: [f64; 2], half_side: f64, orientation: f64) -> Self {
        CubeSpec { dim: 2, center, half_side, orientation }
    }

    /// The 2^d dyadic children, in lexicographic order of their offsets.
    pub fn children(&self) -> Vec<CubeSpec> {
        let h = 0.5 * self.half_side;
        match self.dim {
            1 => vec![
                CubeSpec::interval(self.center[0] - h, h),
                CubeSpec::interval(self.center[0] + h, h),
            ],
            _ => {
                let (s, c) = self.orientation.sin_cos();
                let mut out = Vec::with_capacity(4);
                for &u in &[-1.0, 1.0] {
                    for &v in &[-1.0, 1.0] {
                        let dx = h * (c * u - s * v);
                        let dy = h * (s * u + c * v);
                        out.push(CubeSpec::square([self.center[0] + dx, self.center[1] + dy], h, self.orientation));
                    }
                }
                out
            }
        }
    }
}

/// (y, t) in the upper half-space, with y only through ρ_y = |y| for radial
/// profiles and as a signed coordinate on the line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicPoint {
    pub rho_y: f64,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Heat,
    Poisson,
}

/// Lebesgue average of f over [a, b] (an arc of length ≤ 2π on the circle).
pub fn interval_average(f: &Profile, a: f64, b: f64) -> Result<f64> {
    if a > b || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("interval [{a}, {b}] is not ordered")));
    }
    if f.domain().kind == DomainKind::Circle && b - a > TAU * (1.0 + 1e-14) {
        return Err(Error::InvalidArgument(format!("arc of length {} exceeds 2π", b - a)));
    }
    Ok(f.average(a, b))
}

/// (1 − cos θ*, 1 + cos θ*) of the cap cut from the sphere |y| = r by the
/// ball B_s(z), |z| = ρ, written in product form to avoid cancellation.
fn cap_cosines(r: f64, rho: f64, s: f64) -> (f64, f64) {
    let den = 2.0 * r * rho;
    let d = r - rho;
    let omc = (s - d) * (s + d) / den;
    let opc = (r + rho - s) * (r + rho + s) / den;
    (omc, opc)
}

fn half_angle(omc: f64, opc: f64) -> f64 {
    2.0 * omc.max(0.0).sqrt().atan2(opc.max(0.0).sqrt())
}

/// Surface measure of {|y| = r} ∩ B_s(z) in R^d, |z| = ρ_c.
pub fn slice_weight(d: u32, r: f64, rho_c: f64, s: f64) -> f64 {
    if r <= 0.0 || s <= 0.0 {
        return 0.0;
    }
    let full = sphere_area(d - 1) * r.powi(d as i32 - 1);
    if rho_c <= 0.0 {
        return if r < s { full } else { 0.0 };
    }
    let (omc, opc) = cap_cosines(r, rho_c, s);
    if omc <= 0.0 {
        return 0.0;
    }
    if opc <= 0.0 {
        return full;
    }
    match d {
        2 => 2.0 * r * half_angle(omc, opc),
        3 => 2.0 * PI * r * r * omc,
        _ => r.powi(d as i32 - 1) * sphere_area(d - 2) * sin_power_integral(d - 2, half_angle(omc, opc)),
    }
}

/// Split points of [lo, hi]: the given extras plus the breakpoints of f inside.
fn partition(f: &Profile, lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let (st, _) = f.seg_nodes();
    let from = st.partition_point(|&t| t <= lo);
    for &t in &st[from..] {
        if t >= hi {
            break;
        }
        pts.push(t);
    }
    pts.extend(extra.iter().cloned().filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn require_radial(f: &Profile, what: &str) -> Result<u32> {
    if f.domain().kind != DomainKind::RadialHalfLine {
        return Err(Error::Unsupported(format!("{what} needs a radial profile, got {}", f.domain())));
    }
    Ok(f.domain().dim)
}

/// ∫ f(t) A_d(t; ρ, s) dt over the radial range of the ball.
fn ball_slice_integral(f: &Profile, d: u32, rho: f64, s: f64) -> f64 {
    let lo = (rho - s).max(0.0);
    let hi = rho + s;
    let full_to = s - rho; // whole spheres for t < s − ρ
    let pts = partition(f, lo, hi, &[(rho - s).abs(), hi]);
    if d == 2 {
        return disc_parts_integral(f, &pts, rho, s);
    }
    let omega = sphere_area(d - 1);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q <= full_to {
            total += omega * f.domain().linear_integral(p, q, f.eval(p), f.eval(q));
            continue;
        }
        let integrand = |t: f64| f.eval(t) * slice_weight(d, t, rho, s);
        total += if d % 2 == 1 && d <= 15 {
            // polynomial in t on each piece
            quad::fixed(integrand, p, q, 16)
        } else {
            quad::adaptive_cos(integrand, p, q, REL_TOL, 1e-300)
        };
    }
    total
}

/// |B_t(0) ∩ B_s(z)| in the plane, |z| = ρ > 0.
fn lens_area(t: f64, rho: f64, s: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t + rho <= s {
        return PI * t * t;
    }
    if s + rho <= t {
        return PI * s * s;
    }
    if t + s <= rho {
        return 0.0;
    }
    // circular segment r²(2a − sin 2a)/2, with a series where 2a − sin 2a cancels
    let seg = |r: f64, (omc, opc): (f64, f64)| {
        let x = 2.0 * half_angle(omc, opc);
        let x_sin = if x < 0.1 {
            let x2 = x * x;
            x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
        } else {
            x - x.sin()
        };
        0.5 * r * r * x_sin
    };
    seg(t, cap_cosines(t, rho, s)) + seg(s, cap_cosines(s, rho, t))
}

/// ∫ f dA over the disc B_s(z) by parts against the lens area L(t):
/// on a piece where f = A + Bt, ∫ f L′ = [f L] − B ∫ L. L is C¹, so this
/// converges much faster than the slice integrand with its square-root ends.
fn disc_parts_integral(f: &Profile, pts: &[f64], rho: f64, s: f64) -> f64 {
    let area = |t: f64| if rho <= 0.0 { PI * t.min(s).powi(2) } else { lens_area(t, rho, s) };
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        // one-sided values of the linear piece, robust to a jump at either end
        let h = q - p;
        let (f1, f3) = (f.eval(p + 0.25 * h), f.eval(p + 0.75 * h));
        let b = (f3 - f1) / (0.5 * h);
        let (fp, fq) = (f1 - 0.25 * h * b, f3 + 0.25 * h * b);
        total += fq * area(q) - fp * area(p);
        if b != 0.0 {
            // absolute floor against the whole disc, so slivers at a breakpoint stay cheap
            let abs = 1e-3 * REL_TOL * PI * s * h;
            total -= b * quad::adaptive_cos(area, p, q, REL_TOL, abs);
        }
    }
    total
}

/// Average of the radial profile f over the ball B_s(z), |z| = ρ_c.
pub fn ball_average_radial(f: &Profile, rho_c: f64, s: f64) -> Result<f64> {
    let d = require_radial(f, "ball_average_radial")?;
    if s < 0.0 || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("ball radius {s} must be finite and >= 0")));
    }
    if s == 0.0 {
        return Ok(f.eval(rho_c));
    }
    let rho = rho_c.abs();
    let num = ball_slice_integral(f, d, rho, s);
    Ok(num / (sphere_area(d - 1) * s.powi(d as i32) / d as f64))
}

/// ∫_{cap} cos θ dσ on {|y| = t}: the radial component of the gradient average.
fn slice_cos_moment(d: u32, t: f64, rho: f64, s: f64) -> f64 {
    if t <= 0.0 || rho <= 0.0 {
        return 0.0;
    }
    let (omc, opc) = cap_cosines(t, rho, s);
    if omc <= 0.0 || opc <= 0.0 {
        return 0.0;
    }
    let sin = (omc * opc).sqrt();
    t.powi(d as i32 - 1) * sphere_area(d - 2) * sin.powi(d as i32 - 1) / (d as f64 - 1.0)
}

/// Radial derivative at the evaluation point of the ball average, computed as
/// the ball average of ∇f · e, where the ball center sits at signed position
/// `center` along the ray through the evaluation point.
pub fn ball_gradient_radial(f: &Profile, center: f64, s: f64) -> Result<f64> {
    let d = require_radial(f, "ball_gradient_radial")?;
    if s <= 0.0 {
        return Err(Error::InvalidArgument("gradient average needs a positive radius".into()));
    }
    let rho = center.abs();
    let slope = |t: f64| {
        let (l, r) = f.one_sided_slopes(t);
        0.5 * (l + r)
    };
    // f' is constant on each piece; evaluate it at the piece midpoint
    let lo = (rho - s).max(0.0);
    let hi = rho + s;
    let pts = partition(f, lo, hi, &[(rho - s).abs(), hi]);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let fp = slope(0.5 * (p + q));
        if fp == 0.0 {
            continue;
        }
        total += fp * quad::adaptive_cos(|t| slice_cos_moment(d, t, rho, s), p, q, REL_TOL, 1e-300);
    }
    let vol = sphere_area(d - 1) * s.powi(d as i32) / d as f64;
    Ok(center.signum() * total / vol)
}

/// Length of the part of the circle |y| = t that lies inside the square q.
fn circle_in_square(t: f64, normals: &[(f64, f64); 4], offsets: &[f64; 4]) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let mut arcs: Vec<(f64, f64)> = Vec::with_capacity(8);
    for (i, &d) in offsets.iter().enumerate() {
        if d >= t {
            continue;
        }
        if d <= -t {
            return 0.0;
        }
        let beta = (d / t).acos();
        let psi = normals[i].1.atan2(normals[i].0).rem_euclid(TAU);
        let a = (psi - beta).rem_euclid(TAU);
        let b = a + 2.0 * beta;
        if b > TAU {
            arcs.push((a, TAU));
            arcs.push((0.0, b - TAU));
        } else {
            arcs.push((a, b));
        }
    }
    arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut excluded = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in arcs {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                excluded += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = cur {
        excluded += cb - ca;
    }
    t * (TAU - excluded).max(0.0)
}

/// Average of f over the cube q: an interval on the line (d = 1), or a square
/// in the plane with f read as a radial function (d = 2).
pub fn cube_average(f: &Profile, q: &CubeSpec) -> Result<f64> {
    if q.half_side <= 0.0 || !q.half_side.is_finite() {
        return Err(Error::InvalidArgument(format!("cube half-side {} must be positive", q.half_side)));
    }
    match q.dim {
        1 => interval_average(f, q.center[0] - q.half_side, q.center[0] + q.half_side),
        2 => {
            require_radial(f, "cube_average in d = 2")?;
            if f.domain().dim != 2 {
                return Err(Error::Unsupported(format!("cube average of a {} profile", f.domain())));
            }
            Ok(square_average(f, q))
        }
        d => Err(Error::Unsupported(format!("cube dimension {d}"))),
    }
}

fn square_average(f: &Profile, q: &CubeSpec) -> f64 {
    let (sn, cs) = q.orientation.sin_cos();
    let h = q.half_side;
    let normals = [(cs, sn), (-sn, cs), (-cs, -sn), (sn, -cs)];
    let mut offsets = [0.0; 4];
    for (i, n) in normals.iter().enumerate() {
        offsets[i] = n.0 * q.center[0] + n.1 * q.center[1] + h;
    }
    let mut corners = [0.0; 4];
    for (i, (u, v)) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)].iter().enumerate() {
        let x = q.center[0] + h * (cs * u - sn * v);
        let y = q.center[1] + h * (sn * u + cs * v);
        corners[i] = x.hypot(y);
    }
    let inside = offsets.iter().all(|&d| d > 0.0);
    let lo = if inside {
        0.0
    } else {
        // distance from the origin to the square
        let (lx, ly) = (cs * q.center[0] + sn * q.center[1], -sn * q.center[0] + cs * q.center[1]);
        let dx = (lx.abs() - h).max(0.0);
        let dy = (ly.abs() - h).max(0.0);
        dx.hypot(dy)
    };
    let hi = corners.iter().cloned().fold(0.0, f64::max);
    if hi - lo < 0.05 * lo {
        return small_square_average(f, q);
    }
    let mut extra: Vec<f64> = corners.to_vec();
    extra.extend(offsets.iter().map(|d| d.abs()));
    let pts = partition(f, lo, hi, &extra);
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += quad::adaptive_cos(|t| f.eval(t) * circle_in_square(t, &normals, &offsets), w[0], w[1], REL_TOL, 1e-300);
    }
    total / (4.0 * h * h)
}

/// Square far from the origin compared with its size: the circle slices are
/// nearly straight and lose digits, so integrate in the square's own frame.
/// Each inner line is split where it crosses a knot circle.
fn small_square_average(f: &Profile, q: &CubeSpec) -> f64 {
    let (sn, cs) = q.orientation.sin_cos();
    let h = q.half_side;
    let e2 = (-sn, cs);
    let knots = f.breakpoints();
    let line = |u: f64| -> f64 {
        let p = (q.center[0] + u * cs, q.center[1] + u * sn);
        // |p + v e2|² = v² + 2bv + a
        let b = p.0 * e2.0 + p.1 * e2.1;
        let a = p.0 * p.0 + p.1 * p.1;
        let mut cuts = vec![-h, h];
        for &r in knots {
            let disc = b * b - (a - r * r);
            if disc > 0.0 {
                let sq = disc.sqrt();
                for v in [-b - sq, -b + sq] {
                    if v > -h && v < h {
                        cuts.push(v);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .map(|w| quad::fixed(|v: f64| f.eval((p.0 + v * e2.0).hypot(p.1 + v * e2.1)), w[0], w[1], 16))
            .sum()
    };
    quad::adaptive(line, -h, h, 1e-12, 0.0) / (4.0 * h * h)
}

/// (f * K_t)(y) for the heat or Poisson kernel.
pub fn angular_kernel_average(f: &Profile, kernel: Kernel, p: ParabolicPoint) -> Result<f64> {
    if p.t <= 0.0 || !p.t.is_finite() {
        return Err(Error::InvalidArgument(format!("time parameter {} must be positive", p.t)));
    }
    match (f.domain().kind, kernel) {
        (DomainKind::Line, Kernel::Heat) => Ok(line_heat(f, p.rho_y, p.t)),
        (DomainKind::Line, Kernel::Poisson) => Ok(line_poisson(f, p.rho_y, p.t)),
        (DomainKind::RadialHalfLine, k) => Ok(radial_kernel(f, k, p.rho_y.abs(), p.t)),
        (kind, _) => Err(Error::Unsupported(format!("{kernel:?} kernel on {kind:?}"))),
    }
}

fn line_heat(f: &Profile, y: f64, t: f64) -> f64 {
    // ∫ (A + q z) N(0, σ²)(z) dz over each segment, z = x − y, σ² = 2t
    let sigma = (2.0 * t).sqrt();
    let (st, sv) = f.seg_nodes();
    let lo = y - GAUSS_WINDOW * sigma;
    let hi = y + GAUSS_WINDOW * sigma;
    let first = st.partition_point(|&x| x <= lo).saturating_sub(1);
    let norm = 1.0 / (sigma * (TAU).sqrt());
    let mut total = 0.0;
    for k in first..st.len() - 1 {
        let (a, b) = (st[k], st[k + 1]);
        if a >= hi {
            break;
        }
        let q = (sv[k + 1] - sv[k]) / (b - a);
        let amp = sv[k] + q * (y - a);
        let (za, zb) = ((a - y) / sigma, (b - y) / sigma);
        let mass = normal_mass(za, zb);
        let first_moment = sigma * sigma * norm * ((-0.5 * za * za).exp() - (-0.5 * zb * zb).exp());
        total += amp * mass + q * first_moment;
    }
    total
}

fn atan_diff(b: f64, a: f64) -> f64 {
    // atan(b) − atan(a)
    let num = b - a;
    let den = 1.0 + a * b;
    if den > 0.0 {
        (num / den).atan()
    } else if den < 0.0 {
        (num / den).atan() + PI.copysign(num)
    } else {
        (PI / 2.0).copysign(num)
    }
}

fn line_poisson(f: &Profile, y: f64, t: f64) -> f64 {
    // ∫ (A + q z) (t/π)/(z² + t²) dz = (A/π)[atan(z/t)] + (q t / 2π)[ln(z² + t²)]
    let (st, sv) = f.seg_nodes();
    let mut total = 0.0;
    for k in 0..st.len() - 1 {
        let (a, b) = (st[k], st[k + 1]);
        let q = (sv[k + 1] - sv[k]) / (b - a);
        let amp = sv[k] + q * (y - a);
        let (za, zb) = (a - y, b - y);
        total += amp / PI * atan_diff(zb / t, za / t);
        if q != 0.0 {
            total += q * t / TAU * ((zb * zb + t * t) / (za * za + t * t)).ln();
        }
    }
    total
}

/// r^{d−1} times the angular integral of the kernel between the spheres of
/// radius ρ and r.
fn radial_kernel_density(kernel: Kernel, d: u32, rho: f64, r: f64, t: f64) -> f64 {
    match kernel {
        Kernel::Heat => {
            let gauss = (-(rho - r) * (rho - r) / (4.0 * t)).exp();
            let z = rho * r / (2.0 * t);
            let pref = (4.0 * PI * t).powf(-(d as f64) / 2.0) * gauss * r.powi(d as i32 - 1);
            let ang = match d {
                2 => 2.0 * PI * bessel_i0_scaled(z),
                3 => {
                    2.0 * PI * if z < 1e-8 { 2.0 - 2.0 * z } else { -(-2.0 * z).exp_m1() / z }
                }
                _ => {
                    let k = d as i32 - 2;
                    sphere_area(d - 2)
                        * quad::adaptive(|th: f64| (-z * (1.0 - th.cos())).exp() * th.sin().powi(k), 0.0, PI, 1e-10, 1e-300)
                }
            };
            pref * ang
        }
        Kernel::Poisson => {
            let cd = 2.0 / sphere_area(d);
            let a = rho * rho + r * r + t * t;
            let b = 2.0 * rho * r;
            let amb = (rho - r) * (rho - r) + t * t;
            let ang = match d {
                2 => {
                    let apb = a + b;
                    2.0 * (2.0 * ellip_e(2.0 * b / apb) / (amb * apb.sqrt()))
                }
                3 => 2.0 * PI * 2.0 / (amb * (a + b)),
                _ => {
                    let k = d as i32 - 2;
                    let e = -((d + 1) as f64) / 2.0;
                    sphere_area(d - 2)
                        * quad::adaptive(|th: f64| (amb + b * (1.0 - th.cos())).powf(e) * th.sin().powi(k), 0.0, PI, 1e-10, 1e-300)
                }
            };
            cd * t * ang * r.powi(d as i32 - 1)
        }
    }
}

fn radial_kernel(f: &Profile, kernel: Kernel, rho: f64, t: f64) -> f64 {
    let d = f.domain().dim;
    let (lo, hi) = match kernel {
        Kernel::Heat => {
            let w = GAUSS_WINDOW * (2.0 * t).sqrt();
            ((rho - w).max(0.0), (rho + w).min(f.last()))
        }
        Kernel::Poisson => (0.0, f.last()),
    };
    if hi <= lo {
        return 0.0;
    }
    let scale = f.max_value().abs().max(1e-300);
    let pts = partition(f, lo, hi, &[rho, rho - t.sqrt(), rho + t.sqrt()]);
    pts.windows(2)
        .map(|w| quad::adaptive(|r| f.eval(r) * radial_kernel_density(kernel, d, rho, r, t), w[0], w[1], 1e-10, 1e-15 * scale))
        .sum()
}

fn require_sphere(f: &Profile) -> Result<()> {
    match f.domain().kind {
        DomainKind::Circle => Ok(()),
        DomainKind::PolarInterval if f.domain().dim == 2 => Ok(()),
        _ => Err(Error::Unsupported(format!("geodesic balls on {}", f.domain()))),
    }
}

/// (1 − cos Δφ*, 1 + cos Δφ*) for the azimuthal half-width of a cap of radius
/// s centred at polar angle θ_c, on the parallel at polar angle θ.
fn azimuth_cosines(theta: f64, theta_c: f64, s: f64) -> (f64, f64) {
    let den = theta.sin() * theta_c.sin();
    let dl = theta - theta_c;
    let sm = theta + theta_c;
    let omc = 2.0 * (0.5 * (s - dl)).sin() * (0.5 * (s + dl)).sin() / den;
    let opc = 2.0 * (0.5 * (sm + s)).sin() * (0.5 * (sm - s)).sin() / den;
    (omc, opc)
}

fn cap_split_points(theta_c: f64, s: f64) -> Vec<f64> {
    vec![(theta_c - s).abs(), s - theta_c, theta_c + s, TAU - theta_c - s]
}

/// Average of f over the geodesic ball of radius s whose center has polar
/// angle θ_c (S¹: arc [θ_c − s, θ_c + s]).
pub fn geodesic_ball_average(f: &Profile, theta_c: f64, s: f64) -> Result<f64> {
    require_sphere(f)?;
    if !(s > 0.0 && s <= PI) {
        return Err(Error::InvalidArgument(format!("geodesic radius {s} outside (0, π]")));
    }
    if f.domain().kind == DomainKind::Circle {
        return Ok(f.average(theta_c - s, theta_c + s));
    }
    let tc = theta_c.clamp(0.0, PI);
    let area = 2.0 * TAU * (0.5 * s).sin().powi(2);
    if tc > 0.5 * PI {
        return Ok(cap_integral(&reflect(f), PI - tc, s, &[0.0, PI], false) / area);
    }
    Ok(cap_integral(f, tc, s, &[0.0, PI], false) / area)
}

/// θ → π − θ. The azimuth formulas lose relative accuracy near θ = π, so caps
/// in the southern half are evaluated on the mirrored profile.
fn reflect(f: &Profile) -> Profile {
    let t = f.breakpoints().iter().rev().map(|&t| PI - t).collect();
    let v = f.values().iter().rev().cloned().collect();
    Profile::from_nodes_unchecked(f.domain(), t, v)
}

/// ∫ f(θ)·width(θ)·sin θ dθ over the cap's polar range (clipped to `range`),
/// width = 2Δφ*, or 2 sin Δφ* with f ≡ 1 for the gradient moment.
fn cap_integral(f: &Profile, tc: f64, s: f64, range: &[f64; 2], moment: bool) -> f64 {
    let lo = (tc - s).max(0.0).max(range[0]);
    let hi = (tc + s).min(PI).min(range[1]);
    if hi <= lo {
        return 0.0;
    }
    let pts = partition(f, lo, hi, &cap_split_points(tc, s));
    let g = |th: f64| if moment { 1.0 } else { f.eval(th) };
    let width = |th: f64| -> f64 {
        if tc <= 0.0 || tc >= PI {
            return if moment { 0.0 } else { TAU };
        }
        let (omc, opc) = azimuth_cosines(th, tc, s);
        if omc <= 0.0 {
            return 0.0;
        }
        if opc <= 0.0 {
            return if moment { 0.0 } else { TAU };
        }
        if moment {
            2.0 * (omc * opc).sqrt()
        } else {
            2.0 * half_angle(omc, opc)
        }
    };
    let scale = if moment { 1.0 } else { f.max_value().abs() };
    let abs = 1e-3 * REL_TOL * scale * TAU * (1.0 - s.cos()).max(s * s) / s;
    pts.windows(2)
        .map(|w| quad::adaptive_cos(|th: f64| g(th) * width(th) * th.sin(), w[0], w[1], REL_TOL, abs * (w[1] - w[0])))
        .sum()
}

/// Polar derivative at the evaluation point of the cap average on S², for a
/// cap centred at signed angle `center` along the meridian.
pub fn cap_gradient_polar(f: &Profile, center: f64, s: f64) -> Result<f64> {
    if f.domain().kind != DomainKind::PolarInterval || f.domain().dim != 2 {
        return Err(Error::Unsupported(format!("cap gradient on {}", f.domain())));
    }
    let tc = center.cos().clamp(-1.0, 1.0).acos();
    let mut sign = if center.sin() >= 0.0 { 1.0 } else { -1.0 };
    let mirrored;
    let (f, tc) = if tc > 0.5 * PI {
        sign = -sign;
        mirrored = reflect(f);
        (&mirrored, PI - tc)
    } else {
        (f, tc)
    };
    let slope = |t: f64| {
        let (l, r) = f.one_sided_slopes(t);
        0.5 * (l + r)
    };
    let pts = partition(f, (tc - s).max(0.0), (tc + s).min(PI), &cap_split_points(tc, s));
    let mut total = 0.0;
    for w in pts.windows(2) {
        let fp = slope(0.5 * (w[0] + w[1]));
        if fp != 0.0 {
            total += fp * cap_integral(f, tc, s, &[w[0], w[1]], true);
        }
    }
    Ok(sign * total / (2.0 * TAU * (0.5 * s).sin().powi(2)))
}
