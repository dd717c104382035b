//! Executable checks of the structural properties: no strict local maxima in
//! the disconnecting set, dyadic ancestry certificates for cube averages,
//! flatness on the connecting set, control near the origin, the continuity
//! tracer for the lateral decomposition, and the boundedness diagnostics.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{cube_average, CubeSpec};
use crate::maxops::{disconnecting_runs, evaluate, Label, MaximalField, OperatorSpec};
use crate::profile::{w11_distance, Domain, DomainKind, Profile, W11Distance};
use crate::quad;
use crate::sunrise::{lateral_derivative_table, sunrise_decompose, SignViolation, SunriseDecomposition};

/// ∫_a^b w with the surface constant (a ≤ b; on the circle any real a, b).
fn wint(dom: Domain, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    match dom.kind {
        DomainKind::Line | DomainKind::Circle => b - a,
        _ => dom.weight_integral(a, b) * dom.measure_constant(),
    }
}

/// w′ with the surface constant.
fn weight_deriv(dom: Domain, t: f64) -> f64 {
    let k = dom.dim as i32 - 1;
    let c = dom.measure_constant();
    match dom.kind {
        DomainKind::Line | DomainKind::Circle => 0.0,
        DomainKind::RadialHalfLine if k == 0 => 0.0,
        DomainKind::RadialHalfLine => c * k as f64 * t.powi(k - 1),
        DomainKind::PolarInterval if k == 0 => 0.0,
        DomainKind::PolarInterval => c * k as f64 * t.sin().powi(k - 1) * t.cos(),
    }
}

/// Breakpoints of f strictly inside (a, b), repeated by period on the circle.
fn knots_in(f: &Profile, a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![];
    if f.domain().kind == DomainKind::Circle {
        let mut shift = ((a - f.first()) / TAU).floor() * TAU - TAU;
        while f.first() + shift < b {
            out.extend(f.breakpoints().iter().map(|&t| t + shift).filter(|&t| t > a && t < b));
            shift += TAU;
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
    } else {
        out.extend(f.breakpoints().iter().cloned().filter(|&t| t > a && t < b));
    }
    out
}

/// ∫_a^b f′ w, exact for PL f (split at its knots).
fn int_fprime_w(f: &Profile, a: f64, b: f64) -> f64 {
    let dom = f.domain();
    let mut pts = vec![a];
    pts.extend(knots_in(f, a, b));
    pts.push(b);
    pts.windows(2).map(|w| (f.eval(w[1]) - f.eval(w[0])) / (w[1] - w[0]) * wint(dom, w[0], w[1])).sum()
}

/// Weighted L¹ norm of the derivative of a PL profile restricted to [a, b].
fn weighted_deriv_on(p: &Profile, a: f64, b: f64) -> f64 {
    let dom = p.domain();
    let mut s = 0.0;
    for k in 0..p.segment_count() {
        let (t0, t1, v0, v1) = p.segment(k);
        let (lo, hi) = (t0.max(a), t1.min(b));
        if hi > lo {
            s += ((v1 - v0) / (t1 - t0)).abs() * wint(dom, lo, hi);
        }
    }
    s
}

// ---------------------------------------------------------------- P1 scan

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalMaxViolation {
    pub index: usize,
    pub t: f64,
    pub value: f64,
    /// Smallest field value between the run's left end and the node.
    pub left_min: f64,
    pub right_min: f64,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct P1Report {
    pub runs: usize,
    pub nodes_checked: usize,
    pub tol: f64,
    pub violations: Vec<LocalMaxViolation>,
}

impl P1Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scan each disconnecting run (with its connecting neighbours) for a node
/// that rises above the lowest value on both sides by more than `tol`
/// (default 1e−7·max f). Such a node sits on a hump, which is what a strict
/// local maximum looks like on a grid.
pub fn check_no_strict_local_max(field: &MaximalField, tol: Option<f64>) -> P1Report {
    let tol = tol.unwrap_or(1e-7 * field.scale());
    let n = field.grid.len();
    let dom = field.f.domain();
    let runs = disconnecting_runs(field);
    let mut checked = 0;
    let mut violations = vec![];
    for &(s, e) in &runs {
        let len = if e >= s { e - s + 1 } else { e + n - s + 1 };
        // (grid index, value); None marks a virtual end value
        let mut seq: Vec<(Option<usize>, f64)> = vec![];
        let circle = dom.kind == DomainKind::Circle;
        if s > 0 || circle {
            let p = (s + n - 1) % n;
            if len < n {
                seq.push((None, field.values[p]));
            }
        } else if dom.kind == DomainKind::Line && field.grid[0] <= field.f.first() {
            // the run continues to −∞, where the field decays to 0
            seq.push((None, 0.0));
        }
        for k in 0..len {
            let i = (s + k) % n;
            seq.push((Some(i), field.values[i]));
        }
        if (e + 1 < n || circle) && len < n {
            seq.push((None, field.values[(e + 1) % n]));
        } else if e + 1 == n && dom.kind == DomainKind::Line && field.grid[n - 1] >= field.f.last() {
            seq.push((None, 0.0));
        }
        let m = seq.len();
        let mut pre = vec![f64::INFINITY; m + 1];
        for k in 0..m {
            pre[k + 1] = pre[k].min(seq[k].1);
        }
        let mut suf = vec![f64::INFINITY; m + 1];
        for k in (0..m).rev() {
            suf[k] = suf[k + 1].min(seq[k].1);
        }
        for k in 1..m.saturating_sub(1) {
            let Some(i) = seq[k].0 else { continue };
            checked += 1;
            let (l, r) = (pre[k], suf[k + 1]);
            let v = seq[k].1;
            let excess = v - l.max(r);
            if excess > tol {
                violations.push(LocalMaxViolation { index: i, t: field.grid[i], value: v, left_min: l, right_min: r, excess });
            }
        }
    }
    P1Report { runs: runs.len(), nodes_checked: checked, tol, violations }
}

// ------------------------------------------------------- dyadic ancestry

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicCertificate {
    pub alpha: f64,
    /// Q_0 ⊃ Q_1 ⊃ … ⊃ Q_k.
    pub chain: Vec<CubeSpec>,
    pub averages: Vec<f64>,
    /// αQ_i ∩ αQ_{i+1} ≠ ∅ for i = 0..k−1.
    pub overlaps: Vec<bool>,
    pub k: usize,
    /// max |avg(Q_i) − avg(Q_0)| over i < k.
    pub max_equal_dev: f64,
    pub excess: f64,
}

impl DyadicCertificate {
    pub fn all_overlap(&self) -> bool {
        self.overlaps.iter().all(|&b| b)
    }
}

/// Whether the α-dilates of a cube and one of its dyadic children meet. The
/// check is per coordinate in the parent's frame with slack 1e−9·h.
pub fn dilates_overlap(parent: &CubeSpec, child: &CubeSpec, alpha: f64) -> bool {
    let slack = 1e-9 * parent.half_side;
    let reach = alpha * (parent.half_side + child.half_side) + slack;
    let dx = child.center[0] - parent.center[0];
    if parent.dim == 1 {
        return dx.abs() <= reach;
    }
    let dy = child.center[1] - parent.center[1];
    let (s, c) = parent.orientation.sin_cos();
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    u.abs() <= reach && v.abs() <= reach
}

/// Frontier size at which the breadth-first search gives up.
const MAX_FRONTIER: usize = 1 << 18;

/// Breadth-first dyadic subdivision of `q0` down to the first level holding
/// a cube whose average strictly exceeds avg(Q_0); the chain runs from Q_0 to
/// that cube.
pub fn dyadic_ancestry_certificate(f: &Profile, q0: &CubeSpec, alpha: f64, max_depth: usize) -> Result<DyadicCertificate> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be ≥ 0")));
    }
    let avg0 = cube_average(f, q0)?;
    let scale = f.max_value().abs().max(f64::MIN_POSITIVE);
    // f constant on Q_0 means no descendant can do better
    let (lo, hi) = match q0.dim {
        1 => (q0.center[0] - q0.half_side, q0.center[0] + q0.half_side),
        _ => {
            let r = q0.center[0].hypot(q0.center[1]);
            let diag = q0.half_side * 2f64.sqrt();
            ((r - diag).max(0.0), r + diag)
        }
    };
    if f.variation_on(lo, hi) <= 1e-14 * scale {
        return Err(Error::NoCertificate(format!("f is constant on Q_0 (average {avg0})")));
    }
    let strict = 1e-11 * scale;
    // arena of (cube, parent, average)
    let mut arena: Vec<(CubeSpec, usize, f64)> = vec![(*q0, usize::MAX, avg0)];
    let mut frontier = vec![0usize];
    for _ in 0..max_depth {
        let mut next = vec![];
        for &p in &frontier {
            for c in arena[p].0.children() {
                let a = cube_average(f, &c)?;
                arena.push((c, p, a));
                next.push(arena.len() - 1);
            }
        }
        let best = next.iter().cloned().fold(None, |b: Option<usize>, i| match b {
            Some(j) if arena[j].2 >= arena[i].2 => Some(j),
            _ => Some(i),
        });
        if let Some(b) = best.filter(|&b| arena[b].2 > avg0 + strict) {
            let mut chain_idx = vec![b];
            while arena[*chain_idx.last().unwrap()].1 != usize::MAX {
                chain_idx.push(arena[*chain_idx.last().unwrap()].1);
            }
            chain_idx.reverse();
            let chain: Vec<CubeSpec> = chain_idx.iter().map(|&i| arena[i].0).collect();
            let averages: Vec<f64> = chain_idx.iter().map(|&i| arena[i].2).collect();
            let k = chain.len() - 1;
            let overlaps = chain.windows(2).map(|w| dilates_overlap(&w[0], &w[1], alpha)).collect();
            let max_equal_dev = averages[..k].iter().map(|a| (a - avg0).abs()).fold(0.0, f64::max);
            return Ok(DyadicCertificate { alpha, chain, averages, overlaps, k, max_equal_dev, excess: arena[b].2 - avg0 });
        }
        if next.len() > MAX_FRONTIER {
            break;
        }
        frontier = next;
    }
    Err(Error::NoCertificate(format!("no strictly larger dyadic descendant within depth {max_depth}")))
}

// ------------------------------------------------------------- flatness

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatnessNode {
    pub index: usize,
    pub t: f64,
    pub slope: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatnessSegment {
    pub a: f64,
    pub b: f64,
    pub slope: f64,
    pub connecting_nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub slope_tol: f64,
    pub nodes_checked: usize,
    /// Connecting nodes inside a segment where f′ ≠ 0.
    pub list_a: Vec<FlatnessNode>,
    /// Sloped segments that are not entirely disconnecting.
    pub list_b: Vec<FlatnessSegment>,
}

impl FlatnessReport {
    pub fn flat(&self) -> bool {
        self.list_a.is_empty() && self.list_b.is_empty()
    }
}

/// Flatness on the connecting set. A node counts only if it lies inside a
/// PL segment with |f′| > 1e−6·max f and far enough from the segment ends
/// that a true disconnecting gap would exceed the label tolerance several
/// times over (distance ≥ 8·gap_tol/|f′|).
pub fn check_flatness(field: &MaximalField, f: &Profile) -> Result<FlatnessReport> {
    if field.f != *f {
        return Err(Error::InvalidArgument("field was computed for a different profile".into()));
    }
    let pieces = f.pieces();
    let starts: Vec<f64> = pieces.iter().map(|p| p.0).collect();
    let (s0, s1) = f.span();
    let slope_tol = 1e-6 * field.scale();
    let mut list_a = vec![];
    let mut by_piece: Vec<(usize, usize)> = vec![];
    let mut checked = 0;
    for (i, &x0) in field.grid.iter().enumerate() {
        let x = if f.domain().kind == DomainKind::Circle { s0 + (x0 - s0).rem_euclid(TAU) } else { x0 };
        if x < s0 || x > s1 {
            continue;
        }
        let k = starts.partition_point(|&a| a <= x).saturating_sub(1);
        let (a, b, fa, fb) = pieces[k];
        if b <= a {
            continue;
        }
        let slope = (fb - fa) / (b - a);
        if slope.abs() <= slope_tol {
            continue;
        }
        let margin = (8.0 * field.gap_tol / slope.abs()).max(1e-9 * (1.0 + x.abs()));
        if x - a < margin || b - x < margin {
            continue;
        }
        checked += 1;
        if field.labels[i] == Label::Connecting {
            list_a.push(FlatnessNode { index: i, t: x0, slope, gap: field.gaps[i] });
            by_piece.push((k, i));
        }
    }
    let mut list_b: Vec<FlatnessSegment> = vec![];
    for (k, i) in by_piece {
        let (a, b, fa, fb) = pieces[k];
        match list_b.last_mut() {
            Some(seg) if seg.a == a => seg.connecting_nodes.push(i),
            _ => list_b.push(FlatnessSegment { a, b, slope: (fb - fa) / (b - a), connecting_nodes: vec![i] }),
        }
    }
    Ok(FlatnessReport { slope_tol, nodes_checked: checked, list_a, list_b })
}

// ------------------------------------------------------- origin control

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OriginControlRow {
    pub eta: f64,
    pub ell: f64,
    /// ∫_{B_η} |∇Mf|.
    pub lhs: f64,
    /// ∫_{B_{ℓη}} |∇f|.
    pub near: f64,
    /// ℓ^{−d} ∫ |∇f|.
    pub far: f64,
    /// f(ℓη)·|∂B_{ℓη}|.
    pub boundary: f64,
    pub ratio: f64,
}

/// Both sides of the control-near-the-origin estimate for one (η, ℓ).
pub fn origin_control(f: &Profile, field: &MaximalField, eta: f64, ell: f64) -> Result<OriginControlRow> {
    let dom = f.domain();
    if dom.kind != DomainKind::RadialHalfLine {
        return Err(Error::Unsupported(format!("origin control on {dom}")));
    }
    if field.f != *f {
        return Err(Error::InvalidArgument("field was computed for a different profile".into()));
    }
    if !(ell > 2.0) {
        return Err(Error::InvalidArgument(format!("ell = {ell} must exceed 2")));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta = {eta} must be positive")));
    }
    let lhs = weighted_deriv_on(&field.as_profile(), 0.0, eta);
    let near = weighted_deriv_on(f, 0.0, ell * eta);
    let far = ell.powi(-(dom.dim as i32)) * f.weighted_derivative_l1();
    let boundary = f.eval(ell * eta) * dom.weight(ell * eta) * dom.measure_constant();
    let rhs = near + far + boundary;
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(OriginControlRow { eta, ell, lhs, near, far, boundary, ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OriginSweep {
    pub rows: Vec<OriginControlRow>,
    pub max_ratio: f64,
    /// LHS is non-increasing as η decreases.
    pub lhs_monotone: bool,
}

pub fn origin_control_sweep(f: &Profile, field: &MaximalField, etas: &[f64], ells: &[f64]) -> Result<OriginSweep> {
    let mut rows = vec![];
    for &ell in ells {
        for &eta in etas {
            rows.push(origin_control(f, field, eta, ell)?);
        }
    }
    let mut by_eta: Vec<(f64, f64)> = rows.iter().map(|r| (r.eta, r.lhs)).collect();
    by_eta.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lhs_monotone = by_eta.windows(2).all(|w| w[0].1 <= w[1].1 * (1.0 + 1e-12) + 1e-15);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(OriginSweep { rows, max_ratio, lhs_monotone })
}

// ------------------------------------------------------------ continuity

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    First,
    Second,
    Both,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderTerms {
    /// ∫_D ((M_R f)′ − f′) w.
    pub a: f64,
    /// Σ over runs of D of [(M_R f − f)·w] between the run's ends.
    pub gamma: f64,
    /// ∫_D (f − M_R f) w′.
    pub r: f64,
    /// a − gamma − r, zero up to quadrature error.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityStep {
    pub j: usize,
    pub w11: W11Distance,
    pub sup_f: f64,
    pub sup_field: f64,
    /// ‖(Mf_j)′ − (Mf)′‖ over the cut range, from gridded slopes.
    pub deriv_distance: f64,
    /// ‖(M_R f_j)′ − (M_R f)′‖ over the cut range.
    pub lateral_distance: f64,
    /// Pieces over C∩C_j, D∩C_j, C∩D_j, D∩D_j.
    pub pieces: [f64; 4],
    pub additivity_error: f64,
    /// (∫_D |(M_R f_j)′| w, ∫_D |(M_R f)′| w).
    pub brezis_lieb: (f64, f64),
    pub terms: RemainderTerms,
    pub terms_j: RemainderTerms,
    pub lambda: f64,
    /// rhs − lhs of the two alternatives (≥ −slack means it holds).
    pub branch_margins: (f64, f64),
    pub branch: Branch,
    /// Pieces with the set tolerance multiplied by 10.
    pub pieces_coarse: [f64; 4],
    pub sensitivity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trend {
    pub first: f64,
    pub last: f64,
    pub inversions: usize,
    pub floor: f64,
    pub decreasing: bool,
}

/// last < first/4 with at most one increase along the way, or everything
/// below `floor`.
pub fn trend(values: &[f64], floor: f64) -> Trend {
    let first = values.first().copied().unwrap_or(0.0);
    let last = values.last().copied().unwrap_or(0.0);
    let inversions = values.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-9) + floor).count();
    let tiny = values.iter().all(|&v| v <= floor);
    Trend { first, last, inversions, floor, decreasing: tiny || (last < first / 4.0 && inversions <= 1) }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub op: String,
    pub alpha: f64,
    pub domain: String,
    pub rho: Option<f64>,
    /// Integrals run over t ≥ eta (and t ≤ π − eta on the polar interval).
    pub eta: Option<f64>,
    pub grid_len: usize,
    pub set_tol: f64,
    pub steps: Vec<ContinuityStep>,
    pub deriv_trend: Trend,
    pub lambda_trend: Trend,
    pub pieces_trend: Trend,
    pub verdict: bool,
}

/// One decomposition read on a common list of cells.
struct CellData {
    slope_r: Vec<f64>,
    slope_m: Vec<f64>,
    in_d: Vec<bool>,
    in_d_coarse: Vec<bool>,
    /// (M_R f − f) at the left and right node of each cell.
    g: Vec<(f64, f64)>,
}

struct Cells {
    /// Grid indices of the two ends.
    idx: Vec<(usize, usize)>,
    t: Vec<(f64, f64)>,
    w: Vec<f64>,
}

fn common_cells(dec: &SunriseDecomposition, eta: Option<f64>) -> Cells {
    let mut out = Cells { idx: vec![], t: vec![], w: vec![] };
    let (lo, hi) = match (dec.domain.kind, eta) {
        (DomainKind::RadialHalfLine, Some(e)) => (e, f64::INFINITY),
        (DomainKind::PolarInterval, Some(e)) => (e, PI - e),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };
    for c in dec.cells() {
        let t0 = dec.nodes[c.0];
        let t1 = t0 + dec.cell_width(c);
        if t0 < lo || t1 > hi {
            continue;
        }
        out.idx.push((dec.grid_index[c.0], dec.grid_index[c.1]));
        out.t.push((t0, t1));
        out.w.push(wint(dec.domain, t0, t1));
    }
    out
}

fn cell_data(cells: &Cells, dec: &SunriseDecomposition, field: &MaximalField, f: &Profile, tol: f64) -> CellData {
    let mut pos = vec![usize::MAX; field.grid.len()];
    for (k, &g) in dec.grid_index.iter().enumerate() {
        pos[g] = k;
    }
    let n = cells.idx.len();
    let mut d = CellData {
        slope_r: Vec::with_capacity(n),
        slope_m: Vec::with_capacity(n),
        in_d: Vec::with_capacity(n),
        in_d_coarse: Vec::with_capacity(n),
        g: Vec::with_capacity(n),
    };
    for k in 0..n {
        let (i0, i1) = cells.idx[k];
        let (t0, t1) = cells.t[k];
        let (p, q) = (pos[i0], pos[i1]);
        let (r0, r1) = (dec.lateral_r[p], dec.lateral_r[q]);
        let h = t1 - t0;
        d.slope_r.push((r1 - r0) / h);
        d.slope_m.push((field.values[i1] - field.values[i0]) / h);
        let mid = 0.5 * (t0 + t1);
        let gap = 0.5 * (r0 + r1) - f.eval(mid);
        d.in_d.push(gap > tol);
        d.in_d_coarse.push(gap > 10.0 * tol);
        d.g.push((r0 - dec.f_values[p], r1 - dec.f_values[q]));
    }
    d
}

/// A, γ and R over the cells flagged in `in_d`.
fn remainder_terms(cells: &Cells, d: &CellData, f: &Profile, in_d: &[bool]) -> RemainderTerms {
    let dom = f.domain();
    let n = cells.idx.len();
    let mut a = 0.0;
    let mut r = 0.0;
    for k in (0..n).filter(|&k| in_d[k]) {
        let (t0, t1) = cells.t[k];
        a += d.slope_r[k] * cells.w[k] - int_fprime_w(f, t0, t1);
        if matches!(dom.kind, DomainKind::RadialHalfLine | DomainKind::PolarInterval) {
            let mut pts = vec![t0];
            pts.extend(knots_in(f, t0, t1));
            pts.push(t1);
            let (g0, g1) = d.g[k];
            for w in pts.windows(2) {
                r += quad::fixed(
                    |t| -(g0 + (g1 - g0) * (t - t0) / (t1 - t0) + (f.eval(t0) + (f.eval(t1) - f.eval(t0)) * (t - t0) / (t1 - t0) - f.eval(t))) * weight_deriv(dom, t),
                    w[0],
                    w[1],
                    16,
                );
            }
        }
    }
    // boundary terms over maximal runs of contiguous flagged cells
    let wt = |t: f64| match dom.kind {
        DomainKind::Line | DomainKind::Circle => 1.0,
        _ => dom.weight(t) * dom.measure_constant(),
    };
    let contiguous = |k: usize, l: usize| cells.idx[k].1 == cells.idx[l].0;
    let mut runs: Vec<(usize, usize)> = vec![];
    for k in (0..n).filter(|&k| in_d[k]) {
        match runs.last_mut() {
            Some(run) if run.1 + 1 == k && contiguous(run.1, k) => run.1 = k,
            _ => runs.push((k, k)),
        }
    }
    let mut closed = false;
    if runs.len() >= 2 {
        let (f0, l0) = (runs[0], runs[runs.len() - 1]);
        if f0.0 == 0 && l0.1 == n - 1 && contiguous(n - 1, 0) {
            runs.remove(0);
            let last = runs.len() - 1;
            runs[last].1 = f0.1;
        }
    } else if runs.len() == 1 && runs[0] == (0, n - 1) && n > 0 && contiguous(n - 1, 0) {
        closed = true;
    }
    let mut gamma = 0.0;
    if !closed {
        for (s, e) in runs {
            gamma += d.g[e].1 * wt(cells.t[e].1) - d.g[s].0 * wt(cells.t[s].0);
        }
    }
    RemainderTerms { a, gamma, r, residual: a - gamma - r }
}

fn set_integrals(cells: &Cells, d: &CellData, f: &Profile, pick: impl Fn(usize) -> bool) -> (f64, f64) {
    let mut lat = 0.0;
    let mut fp = 0.0;
    for k in (0..cells.idx.len()).filter(|&k| pick(k)) {
        lat += d.slope_r[k] * cells.w[k];
        fp += int_fprime_w(f, cells.t[k].0, cells.t[k].1);
    }
    (lat, fp)
}

fn four_pieces(cells: &Cells, d: &CellData, dj: &CellData, coarse: bool) -> [f64; 4] {
    let mut p = [0.0; 4];
    for k in 0..cells.idx.len() {
        let (a, b) = if coarse { (d.in_d_coarse[k], dj.in_d_coarse[k]) } else { (d.in_d[k], dj.in_d[k]) };
        let slot = (a as usize) + 2 * (b as usize);
        p[slot] += (dj.slope_r[k] - d.slope_r[k]).abs() * cells.w[k];
    }
    p
}

/// The continuity tracer: fields and lateral decompositions of f and each
/// f_j on a common grid, then distances, the four-piece split, the
/// remainder λ_j and which of the two alternatives holds.
pub fn continuity_experiment(
    f: &Profile,
    seq: &[Profile],
    op: &OperatorSpec,
    grid: &[f64],
    rho: Option<f64>,
) -> Result<ConvergenceReport> {
    let dom = f.domain();
    for g in seq {
        if g.domain() != dom {
            return Err(Error::DomainMismatch(dom.to_string(), g.domain().to_string()));
        }
    }
    let eta = match dom.kind {
        DomainKind::RadialHalfLine | DomainKind::PolarInterval => {
            let r = rho.ok_or_else(|| Error::InvalidArgument(format!("continuity on {dom} needs rho")))?;
            Some(2.0 * r)
        }
        _ => None,
    };
    let field = evaluate(op, f, grid)?;
    let dec = sunrise_decompose(f, &field, rho)?;
    let cells = common_cells(&dec, eta);
    let tol = field.gap_tol;
    let base = cell_data(&cells, &dec, &field, f, tol);
    let all_d: Vec<bool> = base.in_d.clone();
    let terms = remainder_terms(&cells, &base, f, &all_d);
    let delta = eta.unwrap_or(0.0);
    let in_range = |t: f64| match dom.kind {
        DomainKind::RadialHalfLine => t >= delta,
        DomainKind::PolarInterval => t >= delta && t <= PI - delta,
        _ => true,
    };
    let scale = field.scale();
    let mut steps = vec![];
    for (j0, fj) in seq.iter().enumerate() {
        let field_j = evaluate(op, fj, grid)?;
        let dec_j = sunrise_decompose(fj, &field_j, rho)?;
        let dj = cell_data(&cells, &dec_j, &field_j, fj, tol);
        let terms_j = remainder_terms(&cells, &dj, fj, &dj.in_d);

        let w11 = w11_distance(fj, f, delta)?;
        let mut sup_f: f64 = 0.0;
        let mut sup_field: f64 = 0.0;
        for (i, &t) in grid.iter().enumerate() {
            if in_range(t) {
                sup_f = sup_f.max((fj.eval(t) - f.eval(t)).abs());
                sup_field = sup_field.max((field_j.values[i] - field.values[i]).abs());
            }
        }
        let nc = cells.idx.len();
        let deriv_distance: f64 = (0..nc).map(|k| (dj.slope_m[k] - base.slope_m[k]).abs() * cells.w[k]).sum();
        let lateral_distance: f64 = (0..nc).map(|k| (dj.slope_r[k] - base.slope_r[k]).abs() * cells.w[k]).sum();
        let pieces = four_pieces(&cells, &base, &dj, false);
        let pieces_coarse = four_pieces(&cells, &base, &dj, true);
        let additivity_error = (pieces.iter().sum::<f64>() - lateral_distance).abs();
        let sensitivity = pieces.iter().zip(&pieces_coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let bl_j: f64 = (0..nc).filter(|&k| base.in_d[k]).map(|k| dj.slope_r[k].abs() * cells.w[k]).sum();
        let bl: f64 = (0..nc).filter(|&k| base.in_d[k]).map(|k| base.slope_r[k].abs() * cells.w[k]).sum();
        let lambda = (terms_j.gamma - terms.gamma) + (terms_j.r - terms.r);

        let (lhs1, rhs1) = set_integrals(&cells, &dj, fj, |k| !base.in_d[k] && dj.in_d[k]);
        let (lhs2, fp2) = set_integrals(&cells, &dj, fj, |k| base.in_d[k] && dj.in_d[k]);
        let rhs2 = fp2 + terms.a + lambda;
        let slack = terms.residual.abs() + terms_j.residual.abs() + 1e-12 * scale;
        let m1 = rhs1 - lhs1;
        let m2 = rhs2 - lhs2;
        let branch = match (m1 >= -slack, m2 >= -slack) {
            (true, true) => Branch::Both,
            (true, false) => Branch::First,
            (false, true) => Branch::Second,
            (false, false) => Branch::Neither,
        };
        steps.push(ContinuityStep {
            j: j0 + 1,
            w11,
            sup_f,
            sup_field,
            deriv_distance,
            lateral_distance,
            pieces,
            additivity_error,
            brezis_lieb: (bl_j, bl),
            terms: terms.clone(),
            terms_j,
            lambda,
            branch_margins: (m1, m2),
            branch,
            pieces_coarse,
            sensitivity,
        });
    }
    let floor = 1e-9 * scale * (1.0 + dom.measure_constant());
    let deriv_trend = trend(&steps.iter().map(|s| s.deriv_distance).collect::<Vec<_>>(), floor);
    let lambda_trend = trend(&steps.iter().map(|s| s.lambda.abs()).collect::<Vec<_>>(), floor);
    let pieces_trend = trend(&steps.iter().map(|s| s.lateral_distance).collect::<Vec<_>>(), floor);
    let verdict = deriv_trend.decreasing && steps.iter().all(|s| s.branch != Branch::Neither);
    Ok(ConvergenceReport {
        op: op.kind.name().to_string(),
        alpha: op.alpha,
        domain: dom.to_string(),
        rho,
        eta,
        grid_len: grid.len(),
        set_tol: tol,
        steps,
        deriv_trend,
        lambda_trend,
        pieces_trend,
        verdict,
    })
}

// ------------------------------------------------------------- sunrise

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SunriseCheck {
    pub nodes: usize,
    pub components: usize,
    /// Nodes where f ≤ M_R ≤ Mf or f ≤ M_L ≤ Mf fails.
    pub sandwich_failures: Vec<usize>,
    /// Nodes where max(M_R, M_L) ≠ Mf.
    pub max_failures: Vec<usize>,
    pub table_cells: usize,
    pub table_violations: Vec<SignViolation>,
    pub monotonicity_violations: Vec<SignViolation>,
}

impl SunriseCheck {
    pub fn passed(&self) -> bool {
        self.sandwich_failures.is_empty()
            && self.max_failures.is_empty()
            && self.table_violations.is_empty()
            && self.monotonicity_violations.is_empty()
    }
}

/// Node-exact sandwich and max identities plus the derivative table and
/// monotonicity sign checks.
pub fn check_sunrise_identities(dec: &SunriseDecomposition) -> SunriseCheck {
    let m = dec.nodes.len();
    let (f, mv, r, l) = (&dec.f_values, &dec.field_values, &dec.lateral_r, &dec.lateral_l);
    let sandwich_failures = (0..m).filter(|&k| !(f[k] <= r[k] && r[k] <= mv[k] && f[k] <= l[k] && l[k] <= mv[k])).collect();
    let max_failures = (0..m).filter(|&k| r[k].max(l[k]) != mv[k]).collect();
    let table = lateral_derivative_table(dec);
    SunriseCheck {
        nodes: m,
        components: dec.components.len(),
        sandwich_failures,
        max_failures,
        table_cells: table.checked_cells,
        table_violations: table.table_violations,
        monotonicity_violations: table.monotonicity_violations,
    }
}

// ---------------------------------------------------------------- bounds

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub deriv_f: f64,
    pub deriv_field: f64,
    /// deriv_field / deriv_f, with 0/0 read as 1 (the equality case).
    pub ratio: f64,
    /// Line: the field's variation includes the tails M(first) and M(last)
    /// down to 0 at ±∞.
    pub tails_included: bool,
    /// Pass/fail on the line and circle (constant 1); None elsewhere.
    pub contractive: Option<bool>,
    /// w·Mf at the first and last grid node.
    pub decay: (f64, f64),
    /// sup_λ λ·|{Mf ≥ λ}| / ‖f‖₁ over 64 levels inside the grid.
    pub weak_type: f64,
}

pub fn bound_suite(f: &Profile, field: &MaximalField) -> Result<BoundReport> {
    if field.f != *f {
        return Err(Error::InvalidArgument("field was computed for a different profile".into()));
    }
    let dom = f.domain();
    let n = field.grid.len();
    let mp = field.as_profile();
    let deriv_f = f.weighted_derivative_l1();
    let mut deriv_field = mp.weighted_derivative_l1();
    let tails_included = dom.kind == DomainKind::Line;
    if tails_included {
        deriv_field += field.values[0].abs() + field.values[n - 1].abs();
    }
    let ratio = if deriv_f > 0.0 {
        deriv_field / deriv_f
    } else if deriv_field <= 1e-14 {
        1.0
    } else {
        f64::INFINITY
    };
    let contractive = match dom.kind {
        DomainKind::Line | DomainKind::Circle => Some(ratio <= 1.0 + 1e-6),
        _ => None,
    };
    let wt = |t: f64| dom.weight(t) * dom.measure_constant();
    let decay = (wt(field.grid[0]) * field.values[0], wt(field.grid[n - 1]) * field.values[n - 1]);

    // superlevel sets of the PL field; on the line and half-line only levels
    // above the end values, so the set stays inside the grid
    let floor = match dom.kind {
        DomainKind::Line => field.values[0].max(field.values[n - 1]),
        DomainKind::RadialHalfLine => field.values[n - 1],
        _ => f64::NEG_INFINITY,
    };
    let mut levels: Vec<f64> = field.values.iter().cloned().filter(|&v| v > floor && v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let pick: Vec<f64> = if levels.len() > 64 {
        (0..64).map(|k| levels[k * (levels.len() - 1) / 63]).collect()
    } else {
        levels
    };
    let l1 = f.l1_norm();
    let mut weak_type: f64 = 0.0;
    let mut cells: Vec<(f64, f64, f64, f64)> = (0..n - 1)
        .map(|i| (field.grid[i], field.grid[i + 1], field.values[i], field.values[i + 1]))
        .collect();
    if dom.kind == DomainKind::Circle {
        cells.push((field.grid[n - 1], field.grid[0] + TAU, field.values[n - 1], field.values[0]));
    }
    for &lam in &pick {
        let mut meas = 0.0;
        for &(a, b, va, vb) in &cells {
            let (lo, hi) = match (va >= lam, vb >= lam) {
                (true, true) => (a, b),
                (false, false) => continue,
                (true, false) => (a, a + (b - a) * (va - lam) / (va - vb)),
                (false, true) => (a + (b - a) * (lam - va) / (vb - va), b),
            };
            meas += wint(dom, lo, hi);
        }
        weak_type = weak_type.max(lam * meas);
    }
    if l1 > 0.0 {
        weak_type /= l1;
    }
    Ok(BoundReport { deriv_f, deriv_field, ratio, tails_included, contractive, decay, weak_type })
}
