//! Box-constrained global maximization: a coarse grid scan, then
//! coordinate-wise golden-section refinement from the best few cells.
//!
//! Axes may be log-spaced; refinement then runs in log coordinates, so the
//! tolerance is relative on those axes.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub log: bool,
}

impl Axis {
    pub fn linear(lo: f64, hi: f64, n: usize) -> Self {
        Axis { lo, hi, n, log: false }
    }

    /// Geometric spacing; `lo` must be positive.
    pub fn log(lo: f64, hi: f64, n: usize) -> Self {
        debug_assert!(lo > 0.0 && hi >= lo);
        Axis { lo: lo.ln(), hi: hi.ln(), n, log: true }
    }

    fn to_param(&self, z: f64) -> f64 {
        if self.log {
            z.exp()
        } else {
            z
        }
    }

    fn node(&self, k: usize) -> f64 {
        if self.n <= 1 || self.hi <= self.lo {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64
    }

    fn width(&self) -> f64 {
        if self.n <= 1 {
            self.hi - self.lo
        } else {
            (self.hi - self.lo) / (self.n - 1) as f64
        }
    }

    fn fixed(&self) -> bool {
        self.hi <= self.lo
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Settings {
    pub restarts: usize,
    pub refine_tol: f64,
    pub max_rounds: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Optimum {
    pub params: Vec<f64>,
    pub value: f64,
}

/// Relative gap under which two values count as tied.
const TIE: f64 = 1e-12;

fn better(v: f64, key: (f64, f64), bv: f64, bkey: (f64, f64)) -> bool {
    let scale = v.abs().max(bv.abs()).max(1e-300);
    if v > bv + TIE * scale {
        return true;
    }
    if v < bv - TIE * scale {
        return false;
    }
    key < bkey
}

struct Objective<'a, F, K> {
    f: &'a F,
    key: &'a K,
    axes: &'a [Axis],
    buf: Vec<f64>,
}

impl<F, K> Objective<'_, F, K>
where
    F: Fn(&[f64]) -> f64,
    K: Fn(&[f64]) -> (f64, f64),
{
    fn params(&mut self, z: &[f64]) -> &[f64] {
        for (i, a) in self.axes.iter().enumerate() {
            self.buf[i] = a.to_param(z[i]);
        }
        &self.buf
    }

    fn eval(&mut self, z: &[f64]) -> f64 {
        let f = self.f;
        let v = f(self.params(z));
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    }

    fn key(&mut self, z: &[f64]) -> (f64, f64) {
        let k = self.key;
        k(self.params(z))
    }
}

/// Maximize `f` over the box spanned by `axes`. `key` breaks ties (smaller
/// wins) and is read in parameter space.
pub(crate) fn maximize<F, K>(f: &F, key: &K, axes: &[Axis], s: Settings) -> Optimum
where
    F: Fn(&[f64]) -> f64,
    K: Fn(&[f64]) -> (f64, f64),
{
    let dim = axes.len();
    let mut obj = Objective { f, key, axes, buf: vec![0.0; dim] };

    let counts: Vec<usize> = axes.iter().map(|a| if a.fixed() { 1 } else { a.n.max(2) }).collect();
    let total: usize = counts.iter().product();
    let mut cells: Vec<(f64, (f64, f64), Vec<f64>)> = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let z: Vec<f64> = (0..dim).map(|i| axes[i].node(idx[i])).collect();
        let v = obj.eval(&z);
        let k = obj.key(&z);
        cells.push((v, k, z));
        for i in 0..dim {
            idx[i] += 1;
            if idx[i] < counts[i] {
                break;
            }
            idx[i] = 0;
        }
    }
    // seeds are coarse local maxima, so distinct basins get a refinement
    // even when one broad basin holds all the top cells
    let mut stride = vec![1usize; dim];
    for i in 1..dim {
        stride[i] = stride[i - 1] * counts[i - 1];
    }
    let is_peak = |c: usize| {
        let v = cells[c].0;
        (0..dim).all(|i| {
            let k = (c / stride[i]) % counts[i];
            (k == 0 || cells[c - stride[i]].0 <= v) && (k + 1 == counts[i] || cells[c + stride[i]].0 <= v)
        })
    };
    let peaks: Vec<bool> = (0..total).map(is_peak).collect();
    let mut cells: Vec<_> = cells.into_iter().zip(peaks).filter(|(_, p)| *p).map(|(c, _)| c).collect();
    cells.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then(a.1 .0.total_cmp(&b.1 .0)).then(a.1 .1.total_cmp(&b.1 .1))
    });

    // every seed is refined part way; only the leader goes to full precision
    let rough = live_width(axes) * 1e-4;
    let mut best: Option<(f64, (f64, f64), Vec<f64>)> = None;
    for (v, _, z) in cells.into_iter().take(s.restarts.max(1)) {
        let (v, z) = refine(&mut obj, z, v, s, rough.max(s.refine_tol), 1e-9);
        let k = obj.key(&z);
        let replace = match &best {
            None => true,
            Some((bv, bk, _)) => better(v, k, *bv, *bk),
        };
        if replace {
            best = Some((v, k, z));
        }
    }
    let (v, _, z) = best.expect("at least one restart");
    let (value, z) = refine(&mut obj, z, v, s, s.refine_tol, 1e-13);
    let params = z.iter().zip(axes).map(|(&z, a)| a.to_param(z)).collect();
    Optimum { params, value }
}

fn live_width(axes: &[Axis]) -> f64 {
    axes.iter().filter(|a| !a.fixed()).map(|a| a.hi - a.lo).fold(0.0, f64::max)
}

/// Coordinate sweeps from z until the step drops below `stop`. A round that
/// gains less than `stall` (relative) counts toward shrinking the step.
fn refine<F, K>(obj: &mut Objective<F, K>, mut z: Vec<f64>, mut v: f64, s: Settings, stop: f64, stall: f64) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
    K: Fn(&[f64]) -> (f64, f64),
{
    let axes = obj.axes;
    let live: Vec<usize> = (0..axes.len()).filter(|&i| !axes[i].fixed()).collect();
    if live.is_empty() {
        return (v, z);
    }
    let mut w = live.iter().map(|&i| axes[i].width()).fold(0.0, f64::max);
    let mut stalls = 0;
    for _ in 0..s.max_rounds {
        if w < stop {
            break;
        }
        let v0 = v;
        let mut moved = 0.0f64;
        let start = z.clone();
        for &i in &live {
            let lo = (z[i] - w).max(axes[i].lo);
            let hi = (z[i] + w).min(axes[i].hi);
            let (zi, vi) = line_max(obj, &mut z, i, lo, hi, (w / 16.0).max(0.5 * s.refine_tol));
            if vi > v {
                moved = moved.max((zi - z[i]).abs());
                z[i] = zi;
                v = vi;
            }
        }
        if live.len() > 1 && moved > 0.0 {
            // pattern move: coordinate sweeps crawl along diagonal ridges
            let d: Vec<f64> = z.iter().zip(&start).map(|(a, b)| a - b).collect();
            if let Some((zn, vn)) = pattern_max(obj, &start, &d, v, s.refine_tol) {
                moved = moved.max(zn.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
                z = zn;
                v = vn;
            }
        }
        // creeping along a kinked ridge: moves without real gain
        if v - v0 <= stall * v.abs().max(1e-300) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        if moved <= 0.25 * w || stalls >= 3 {
            w /= 8.0;
            stalls = 0;
        }
    }
    (v, z)
}

/// Golden-section search along start + s·d for s in [1, s_max], s_max ≤ 8
/// set by the box. Returns the point if it beats `v`.
fn pattern_max<F, K>(obj: &mut Objective<F, K>, start: &[f64], d: &[f64], v: f64, tol: f64) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
    K: Fn(&[f64]) -> (f64, f64),
{
    let axes = obj.axes;
    let mut s_max = 8.0f64;
    for (i, a) in axes.iter().enumerate() {
        if d[i] > 0.0 {
            s_max = s_max.min((a.hi - start[i]) / d[i]);
        } else if d[i] < 0.0 {
            s_max = s_max.min((a.lo - start[i]) / d[i]);
        }
    }
    if s_max <= 1.0 {
        return None;
    }
    let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut p = start.to_vec();
    let mut at = |s: f64, p: &mut Vec<f64>| {
        for i in 0..p.len() {
            p[i] = (start[i] + s * d[i]).clamp(axes[i].lo.min(axes[i].hi), axes[i].hi.max(axes[i].lo));
        }
        obj.eval(p)
    };
    let (mut a, mut b) = (1.0, s_max);
    let mut c = b - INV_PHI * (b - a);
    let mut e = a + INV_PHI * (b - a);
    let mut fc = at(c, &mut p);
    let mut fe = at(e, &mut p);
    while (b - a) * len > tol.max(1e-3 * len) {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - INV_PHI * (b - a);
            fc = at(c, &mut p);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + INV_PHI * (b - a);
            fe = at(e, &mut p);
        }
    }
    let (sb, fb) = if fc >= fe { (c, fc) } else { (e, fe) };
    if fb > v {
        at(sb, &mut p);
        Some((p, fb))
    } else {
        None
    }
}

/// Golden-section search for the max of coordinate `i` on [lo, hi], with the
/// two ends checked explicitly (optima often sit on the box boundary).
fn line_max<F, K>(obj: &mut Objective<F, K>, z: &mut [f64], i: usize, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
    K: Fn(&[f64]) -> (f64, f64),
{
    let keep = z[i];
    let mut at = |z: &mut [f64], x: f64| {
        z[i] = x;
        obj.eval(z)
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = at(z, c);
    let mut fd = at(z, d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = at(z, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = at(z, d);
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = at(z, x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    z[i] = keep;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: Settings = Settings { restarts: 5, refine_tol: 1e-10, max_rounds: 200 };

    #[test]
    fn finds_interior_max() {
        let f = |p: &[f64]| -(p[0] - 0.3).powi(2) - 2.0 * (p[1] + 0.7).powi(2) - 0.5 * (p[0] - 0.3) * (p[1] + 0.7);
        let opt = maximize(&f, &|_: &[f64]| (0.0, 0.0), &[Axis::linear(-2.0, 2.0, 9), Axis::linear(-2.0, 2.0, 9)], S);
        assert!((opt.params[0] - 0.3).abs() < 1e-7);
        assert!((opt.params[1] + 0.7).abs() < 1e-7);
    }

    #[test]
    fn finds_box_edge_and_global_peak() {
        // two peaks; the taller one sits on the boundary
        let f = |p: &[f64]| (-(p[0] + 1.0).powi(2) * 20.0).exp() + 1.5 * (-(p[0] - 3.0).powi(2)).exp();
        let opt = maximize(&f, &|_: &[f64]| (0.0, 0.0), &[Axis::linear(-2.0, 2.5, 17)], S);
        assert!((opt.params[0] - 2.5).abs() < 1e-12, "{:?}", opt.params);
    }

    #[test]
    fn log_axis_relative_precision() {
        let f = |p: &[f64]| -(p[0].ln() - (1e-3f64).ln()).powi(2);
        let opt = maximize(&f, &|_: &[f64]| (0.0, 0.0), &[Axis::log(1e-6, 1e3, 20)], S);
        assert!((opt.params[0] / 1e-3 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ties_prefer_small_key() {
        let f = |p: &[f64]| if p[0] > 0.5 { 1.0 } else { 0.0 };
        let opt = maximize(&f, &|p: &[f64]| (p[0], 0.0), &[Axis::linear(0.0, 1.0, 11)], S);
        assert_eq!(opt.value, 1.0);
        assert!(opt.params[0] <= 0.6 + 1e-12);
    }
}
