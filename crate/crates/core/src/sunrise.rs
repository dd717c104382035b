//! Lateral maximal functions built from a gridded maximal field.
//!
//! Each disconnecting run of nodes is one component (a, b). Its minima
//! plateau [τ⁻, τ⁺] is found among the node values and the two virtual end
//! values; M_R copies the field from τ⁻ on and, left of τ⁻, is the running
//! maximum of f from the right capped below by M(τ⁻). M_L is the mirror image.
//! Everything is stated on grid nodes.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxops::{Label, MaximalField};
use crate::profile::{check_same_domain, union_breakpoints, DomainKind, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    /// Bounded by a connecting node.
    Connecting,
    /// Runs to ±∞, where f and the field are taken as 0.
    Infinite,
    /// Cut by ρ (or the ends of the polar interval).
    Cut,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub a: f64,
    pub b: f64,
    pub a_kind: EndKind,
    pub b_kind: EndKind,
    pub tau_minus: f64,
    pub tau_plus: f64,
    /// Node index range (inclusive) inside the decomposition's node list.
    pub first: usize,
    pub last: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    C,
    Dminus,
    Dzero,
    Dplus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Connecting,
    Disconnecting,
}

#[derive(Clone, Debug, Serialize)]
pub struct SunriseDecomposition {
    pub rho: Option<f64>,
    pub domain: crate::profile::Domain,
    /// Nodes of the construction range, increasing (on the circle they start
    /// at a connecting node and may run past 2π).
    pub nodes: Vec<f64>,
    /// Index of each node in the field's grid.
    pub grid_index: Vec<usize>,
    pub f_values: Vec<f64>,
    pub field_values: Vec<f64>,
    pub lateral_r: Vec<f64>,
    pub lateral_l: Vec<f64>,
    pub components: Vec<Component>,
    pub regions: Vec<Region>,
    pub side_r: Vec<Side>,
    pub side_l: Vec<Side>,
    pub gap_tol: f64,
    pub scale: f64,
    /// Circle only: no grid node was connecting, so the node with the
    /// smallest gap was treated as one.
    pub anchor_forced: bool,
}

impl SunriseDecomposition {
    pub fn lateral_r_profile(&self) -> Profile {
        self.nodes_profile(&self.lateral_r)
    }

    pub fn lateral_l_profile(&self) -> Profile {
        self.nodes_profile(&self.lateral_l)
    }

    pub fn field_profile(&self) -> Profile {
        self.nodes_profile(&self.field_values)
    }

    fn nodes_profile(&self, v: &[f64]) -> Profile {
        let domain = if self.domain.kind == DomainKind::Circle {
            // nodes may be shifted past 2π; keep the unwrapped order
            crate::profile::Domain::line()
        } else {
            self.domain
        };
        Profile::from_nodes_unchecked(domain, self.nodes.clone(), v.to_vec())
    }

    /// Cells (p, p+1) of the construction, including the closing cell on the
    /// circle, as node index pairs.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let n = self.nodes.len();
        let mut out: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|p| (p, p + 1)).collect();
        if self.domain.kind == DomainKind::Circle && n >= 2 {
            out.push((n - 1, 0));
        }
        out
    }

    /// Width of a cell, accounting for the circle's closing cell.
    pub fn cell_width(&self, c: (usize, usize)) -> f64 {
        let w = self.nodes[c.1] - self.nodes[c.0];
        if w <= 0.0 {
            w + TAU
        } else {
            w
        }
    }
}

/// Value tolerance for plateau detection, relative to max f.
const PLATEAU_TOL: f64 = 1e-9;

/// Sunrise decomposition of the field on (ρ, ∞) (half-line), (ρ, π − ρ)
/// (polar interval) or the whole line / circle (`rho = None`).
pub fn sunrise_decompose(f: &Profile, field: &MaximalField, rho: Option<f64>) -> Result<SunriseDecomposition> {
    if field.f != *f {
        return Err(Error::InvalidArgument("field was computed for a different profile".into()));
    }
    let dom = f.domain();
    let n = field.grid.len();
    let rho = match (dom.kind, rho) {
        (DomainKind::RadialHalfLine | DomainKind::PolarInterval, Some(r)) => {
            let hi = if dom.kind == DomainKind::PolarInterval { 0.5 * PI } else { f64::INFINITY };
            if !(r > 0.0 && r < hi) {
                return Err(Error::InvalidArgument(format!("rho = {r} outside the {dom} domain")));
            }
            Some(r)
        }
        (DomainKind::RadialHalfLine | DomainKind::PolarInterval, None) => {
            return Err(Error::InvalidArgument(format!("the sunrise construction on {dom} needs rho > 0")))
        }
        (_, r) => r.filter(|_| false),
    };
    let mut anchor_forced = false;
    let keep: Vec<usize> = match (dom.kind, rho) {
        (DomainKind::RadialHalfLine, Some(r)) => (0..n).filter(|&i| field.grid[i] > r).collect(),
        (DomainKind::PolarInterval, Some(r)) => (0..n).filter(|&i| field.grid[i] > r && field.grid[i] < PI - r).collect(),
        (DomainKind::Circle, _) => {
            // start at a connecting node; the smallest gap stands in if the
            // grid misses the connecting set entirely
            let start = (0..n).find(|&i| field.labels[i] == Label::Connecting).unwrap_or_else(|| {
                anchor_forced = true;
                (0..n).min_by(|&a, &b| field.gaps[a].total_cmp(&field.gaps[b])).unwrap_or(0)
            });
            (start..n).chain(0..start).collect()
        }
        _ => (0..n).collect(),
    };
    if keep.len() < 2 {
        return Err(Error::InvalidArgument("fewer than two grid nodes in the construction range".into()));
    }
    let m = keep.len();
    let mut nodes = Vec::with_capacity(m);
    for (k, &i) in keep.iter().enumerate() {
        let mut t = field.grid[i];
        if dom.kind == DomainKind::Circle && k > 0 && t <= nodes[k - 1] {
            t += TAU;
        }
        nodes.push(t);
    }
    let fv: Vec<f64> = keep.iter().map(|&i| f.eval(field.grid[i])).collect();
    let mv: Vec<f64> = keep.iter().map(|&i| field.values[i]).collect();
    let mut disc: Vec<bool> = keep.iter().map(|&i| field.labels[i] == Label::Disconnecting).collect();
    if dom.kind == DomainKind::Circle {
        disc[0] = false;
    }
    let scale = f.max_value().abs().max(f64::MIN_POSITIVE);
    let field_profile = field.as_profile();

    let mut lat_r = mv.clone();
    let mut lat_l = mv.clone();
    let mut regions: Vec<Region> = disc.iter().map(|&d| if d { Region::Dzero } else { Region::C }).collect();
    let mut components = vec![];
    let mut p = 0;
    while p < m {
        if !disc[p] {
            p += 1;
            continue;
        }
        let s = p;
        while p + 1 < m && disc[p + 1] {
            p += 1;
        }
        let e = p;
        p += 1;

        // virtual end values
        let (a, a_kind, ma) = if s > 0 {
            (nodes[s - 1], EndKind::Connecting, mv[s - 1])
        } else {
            match (dom.kind, rho) {
                (DomainKind::Line, _) => (f64::NEG_INFINITY, EndKind::Infinite, 0.0),
                (_, Some(r)) => (r, EndKind::Cut, field_profile.eval(r)),
                _ => (nodes[0], EndKind::Cut, mv[0]),
            }
        };
        let (b, b_kind, mb) = if e + 1 < m {
            (nodes[e + 1], EndKind::Connecting, mv[e + 1])
        } else if dom.kind == DomainKind::Circle {
            (nodes[0] + TAU, EndKind::Connecting, mv[0])
        } else {
            match (dom.kind, rho) {
                (DomainKind::PolarInterval, Some(r)) => (PI - r, EndKind::Cut, field_profile.eval(PI - r)),
                _ => (f64::INFINITY, EndKind::Infinite, 0.0),
            }
        };

        // plateau over positions s-1 (virtual a), s..=e, e+1 (virtual b)
        let val = |q: isize| -> f64 {
            if q < s as isize {
                ma
            } else if q > e as isize {
                mb
            } else {
                mv[q as usize]
            }
        };
        let pos = |q: isize| -> f64 {
            if q < s as isize {
                a
            } else if q > e as isize {
                b
            } else {
                nodes[q as usize]
            }
        };
        let lo = s as isize - 1;
        let hi = e as isize + 1;
        let min = (lo..=hi).map(val).fold(f64::INFINITY, f64::min);
        let on = |q: isize| val(q) <= min + PLATEAU_TOL * scale;
        let tm = (lo..=hi).find(|&q| on(q)).unwrap();
        let tp = (lo..=hi).rev().find(|&q| on(q)).unwrap();

        // M_R: running max of f from τ⁻ leftwards, floored by M(τ⁻)
        let seed_f = if tm > e as isize {
            match b_kind {
                EndKind::Infinite => 0.0,
                EndKind::Connecting => fv.get(e + 1).copied().unwrap_or(fv[0]),
                EndKind::Cut => f.eval(b),
            }
        } else if tm < s as isize {
            0.0
        } else {
            fv[tm as usize]
        };
        let mut run = val(tm).max(seed_f);
        let mut q = tm.min(e as isize + 1) - 1;
        while q >= s as isize {
            let k = q as usize;
            if (k as isize) < tm {
                run = run.max(fv[k]);
                lat_r[k] = run;
            }
            q -= 1;
        }
        // M_L: mirror, from τ⁺ rightwards
        let seed_f = if tp < s as isize {
            match a_kind {
                EndKind::Infinite => 0.0,
                EndKind::Connecting => fv[s - 1],
                EndKind::Cut => f.eval(a),
            }
        } else if tp > e as isize {
            0.0
        } else {
            fv[tp as usize]
        };
        let mut run = val(tp).max(seed_f);
        let mut q = tp.max(s as isize - 1) + 1;
        while q <= e as isize {
            let k = q as usize;
            if k as isize > tp {
                run = run.max(fv[k]);
                lat_l[k] = run;
            }
            q += 1;
        }
        for k in s..=e {
            let q = k as isize;
            regions[k] = if q < tm {
                Region::Dminus
            } else if q > tp {
                Region::Dplus
            } else {
                Region::Dzero
            };
        }
        components.push(Component {
            a,
            b,
            a_kind,
            b_kind,
            tau_minus: pos(tm),
            tau_plus: pos(tp),
            first: s,
            last: e,
        });
    }
    let tol = field.gap_tol;
    let side = |lat: &[f64], k: usize| if lat[k] > fv[k] + tol { Side::Disconnecting } else { Side::Connecting };
    let side_r = (0..m).map(|k| side(&lat_r, k)).collect();
    let side_l = (0..m).map(|k| side(&lat_l, k)).collect();
    Ok(SunriseDecomposition {
        rho,
        domain: dom,
        nodes,
        grid_index: keep,
        f_values: fv,
        field_values: mv,
        lateral_r: lat_r,
        lateral_l: lat_l,
        components,
        regions,
        side_r,
        side_l,
        gap_tol: tol,
        scale,
        anchor_forced,
    })
}

/// Derivative class of M_R on a node, following the five-case description.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivClass {
    /// (M_R)′ = M′ ≥ 0.
    Dplus,
    /// M′ = 0 on the plateau.
    Dzero,
    /// D_R ∩ D⁻: M_R locally constant.
    DrDminus,
    /// Connecting: f′ = 0.
    C,
    /// C_R ∩ D⁻: (M_R)′ = f′ ≤ 0.
    CrDminus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignViolation {
    pub cell: (usize, usize),
    pub t: f64,
    pub class: String,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeTable {
    pub classes: Vec<DerivClass>,
    /// Central slope of M_R at each node.
    pub slopes: Vec<f64>,
    /// Cells whose two nodes carry the same class, checked against the table.
    pub checked_cells: usize,
    /// Cells with mixed classes (contain a class boundary), not checked.
    pub boundary_cells: usize,
    pub table_violations: Vec<SignViolation>,
    /// Monotonicity of M_R (≥ on D_R, ≤ on C_R) and M_L (≤ on D_L, ≥ on C_L).
    pub monotonicity_violations: Vec<SignViolation>,
    pub tol: f64,
}

/// Per-node derivative classes and cell-wise sign checks with tolerance
/// 1e−6·max f on value differences.
pub fn lateral_derivative_table(dec: &SunriseDecomposition) -> DerivativeTable {
    let m = dec.nodes.len();
    let tol = 1e-6 * dec.scale;
    let classes: Vec<DerivClass> = (0..m)
        .map(|k| match (dec.regions[k], dec.side_r[k]) {
            (Region::C, _) => DerivClass::C,
            (Region::Dplus, _) => DerivClass::Dplus,
            (Region::Dzero, _) => DerivClass::Dzero,
            (Region::Dminus, Side::Disconnecting) => DerivClass::DrDminus,
            (Region::Dminus, Side::Connecting) => DerivClass::CrDminus,
        })
        .collect();
    let slopes = (0..m)
        .map(|k| {
            let (l, r) = (k.saturating_sub(1), (k + 1).min(m - 1));
            if r == l {
                0.0
            } else {
                (dec.lateral_r[r] - dec.lateral_r[l]) / (dec.nodes[r] - dec.nodes[l])
            }
        })
        .collect();
    let mut checked = 0;
    let mut boundary = 0;
    let mut table_violations = vec![];
    let mut mono = vec![];
    for c in dec.cells() {
        let (p, q) = c;
        let t = dec.nodes[p];
        let dr = dec.lateral_r[q] - dec.lateral_r[p];
        let dl = dec.lateral_l[q] - dec.lateral_l[p];
        if classes[p] == classes[q] {
            checked += 1;
            let ok = match classes[p] {
                DerivClass::Dplus => dr >= -tol,
                DerivClass::Dzero | DerivClass::DrDminus | DerivClass::C => dr.abs() <= tol,
                DerivClass::CrDminus => dr <= tol,
            };
            if !ok {
                table_violations.push(SignViolation { cell: c, t, class: format!("{:?}", classes[p]), delta: dr });
            }
        } else {
            boundary += 1;
        }
        let mut flag = |name: &str, ok: bool, delta: f64| {
            if !ok {
                mono.push(SignViolation { cell: c, t, class: name.into(), delta });
            }
        };
        match (dec.side_r[p], dec.side_r[q]) {
            (Side::Disconnecting, Side::Disconnecting) => flag("D_R", dr >= -tol, dr),
            (Side::Connecting, Side::Connecting) => flag("C_R", dr <= tol, dr),
            _ => {}
        }
        match (dec.side_l[p], dec.side_l[q]) {
            (Side::Disconnecting, Side::Disconnecting) => flag("D_L", dl <= tol, dl),
            (Side::Connecting, Side::Connecting) => flag("C_L", dl >= -tol, dl),
            _ => {}
        }
    }
    DerivativeTable {
        classes,
        slopes,
        checked_cells: checked,
        boundary_cells: boundary,
        table_violations,
        monotonicity_violations: mono,
        tol,
    }
}

/// Pointwise maximum of two profiles as an exact PL profile, with crossing
/// points inserted.
pub fn max_merge(g: &Profile, h: &Profile) -> Result<Profile> {
    check_same_domain(g, h)?;
    let knots = union_breakpoints(g, h);
    let mut t = Vec::with_capacity(2 * knots.len());
    let mut v = Vec::with_capacity(2 * knots.len());
    for (k, &x) in knots.iter().enumerate() {
        if k > 0 {
            let x0 = knots[k - 1];
            let d0 = g.eval(x0) - h.eval(x0);
            let d1 = g.eval(x) - h.eval(x);
            if (d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0) {
                let c = x0 + (x - x0) * d0 / (d0 - d1);
                if c > x0 && c < x {
                    t.push(c);
                    v.push(g.eval(c).max(h.eval(c)));
                }
            }
        }
        t.push(x);
        v.push(g.eval(x).max(h.eval(x)));
    }
    let dom = g.domain();
    if dom.kind == DomainKind::Circle && t.len() >= 2 {
        // closing crossing between the last knot and the first one + 2π
        let (x0, x1) = (t[t.len() - 1], t[0] + TAU);
        let d0 = g.eval(x0) - h.eval(x0);
        let d1 = g.eval(x1) - h.eval(x1);
        if (d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0) {
            let c = x0 + (x1 - x0) * d0 / (d0 - d1);
            if c > x0 && c < x1 {
                let cw = c.rem_euclid(TAU);
                let val = g.eval(c).max(h.eval(c));
                let at = t.partition_point(|&s| s < cw);
                if t.get(at) != Some(&cw) {
                    t.insert(at, cw);
                    v.insert(at, val);
                }
            }
        }
    }
    Ok(Profile::from_nodes_unchecked(dom, t, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tent, two_bumps};
    use crate::maxops::{evaluate, linspace, OperatorSpec};
    use crate::profile::{build_profile, Domain};

    #[test]
    fn tent_whole_line() {
        let f = tent();
        let field = evaluate(&OperatorSpec::uncentered(), &f, &linspace(-2.0, 2.0, 81)).unwrap();
        let dec = sunrise_decompose(&f, &field, None).unwrap();
        assert_eq!(dec.components.len(), 2);
        let right = &dec.components[1];
        assert_eq!(right.b_kind, EndKind::Infinite);
        assert_eq!(right.tau_minus, f64::INFINITY);
        for k in right.first..=right.last {
            // running max of f from the right of a decreasing f is f
            assert_eq!(dec.lateral_r[k], dec.f_values[k]);
            assert_eq!(dec.lateral_l[k], dec.field_values[k]);
        }
        for k in 0..dec.nodes.len() {
            assert_eq!(dec.lateral_r[k].max(dec.lateral_l[k]), dec.field_values[k]);
        }
        let table = lateral_derivative_table(&dec);
        assert!(table.table_violations.is_empty(), "{:?}", table.table_violations);
        assert!(table.monotonicity_violations.is_empty());
    }

    #[test]
    fn constant_has_no_components() {
        let f = build_profile(&[(0.0, 2.0), (PI, 2.0)], Domain::circle()).unwrap();
        let field = evaluate(&OperatorSpec::uncentered(), &f, &linspace(0.0, 6.0, 13)).unwrap();
        let dec = sunrise_decompose(&f, &field, None).unwrap();
        assert!(dec.components.is_empty());
        assert!(dec.lateral_r.iter().chain(&dec.lateral_l).all(|&v| v == 2.0));
        assert!(lateral_derivative_table(&dec).classes.iter().all(|&c| c == DerivClass::C));
    }

    #[test]
    fn radial_two_bumps_direct_formula() {
        let f = two_bumps(Domain::radial(2).unwrap(), 2.0, 4.0, 1.0, 0.5);
        let grid: Vec<f64> = (1..=120).map(|k| 0.05 * k as f64).collect();
        let field = evaluate(&OperatorSpec::uncentered(), &f, &grid).unwrap();
        let dec = sunrise_decompose(&f, &field, Some(1.0)).unwrap();
        let mid = dec.components.iter().find(|c| c.a > 1.9 && c.b < 4.1).expect("valley component");
        assert!(mid.tau_minus > 2.5 && mid.tau_plus < 3.5, "{mid:?}");
        // W_R(r) = max(max_{r ≤ t ≤ τ⁻} f(t), M(τ⁻)) straight from the definition
        let kt = dec.nodes.iter().position(|&t| t == mid.tau_minus).unwrap();
        for k in mid.first..kt {
            let direct = (k..=kt).map(|j| dec.f_values[j]).fold(dec.field_values[kt], f64::max);
            assert_eq!(dec.lateral_r[k], direct);
        }
        for k in 0..dec.nodes.len() {
            assert!(dec.f_values[k] <= dec.lateral_r[k] && dec.lateral_r[k] <= dec.field_values[k]);
            assert!(dec.f_values[k] <= dec.lateral_l[k] && dec.lateral_l[k] <= dec.field_values[k]);
            assert_eq!(dec.lateral_r[k].max(dec.lateral_l[k]), dec.field_values[k]);
        }
        let table = lateral_derivative_table(&dec);
        assert!(table.table_violations.is_empty(), "{:?}", table.table_violations);
        for k in mid.first..=mid.last {
            if dec.regions[k] == Region::Dplus && k + 1 <= mid.last {
                assert!(dec.lateral_r[k + 1] - dec.lateral_r[k] >= -table.tol);
            }
        }
    }

    #[test]
    fn max_merge_examples() {
        let f = tent();
        assert_eq!(max_merge(&f, &f).unwrap().values(), f.values());
        let half = build_profile(&[(-3.0, 0.0), (-2.9, 0.5), (2.9, 0.5), (3.0, 0.0)], Domain::line()).unwrap();
        let m = max_merge(&f, &half).unwrap();
        assert!(m.breakpoints().contains(&-0.5) && m.breakpoints().contains(&0.5));
        for x in [-0.7, -0.5, 0.0, 0.2, 0.5, 2.0] {
            assert_eq!(m.eval(x), f.eval(x).max(half.eval(x)));
        }
        let rho_err = sunrise_decompose(&f, &evaluate(&OperatorSpec::uncentered(), &f, &[0.0, 1.0]).unwrap(), Some(0.5));
        assert!(rho_err.is_ok());
    }
}
