//! Seeded random profiles and the named example profiles used by the
//! experiments.
//!
//! Random profiles: a handful of knots with random gaps and values, smoothed
//! once with the (1/4, 1/2, 1/4) stencil, then closed with the boundary rule
//! of the domain. The stream is ChaCha8 seeded from a u64, so a seed fixes a
//! corpus bit for bit.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::profile::{build_profile, Domain, DomainKind, Profile};

fn smooth(v: &[f64], periodic: bool) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (l, r) = if periodic {
                (v[(i + n - 1) % n], v[(i + 1) % n])
            } else {
                (v[i.saturating_sub(1)], v[(i + 1).min(n - 1)])
            };
            0.25 * l + 0.5 * v[i] + 0.25 * r
        })
        .collect()
}

/// One random nonnegative profile on `domain`.
pub fn random_profile(rng: &mut ChaCha8Rng, domain: Domain) -> Profile {
    let k = rng.gen_range(4..=8);
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    match domain.kind {
        DomainKind::Line => {
            let mut t = -3.0 + rng.gen_range(0.0..0.5);
            let mut pts = vec![(t, 0.0)];
            for v in smooth(&raw, false) {
                t += rng.gen_range(0.3..1.0);
                pts.push((t, v));
            }
            t += rng.gen_range(0.3..1.0);
            pts.push((t, 0.0));
            build_profile(&pts, domain).expect("generated line profile")
        }
        DomainKind::RadialHalfLine => {
            let mut t = rng.gen_range(0.1..0.4);
            let mut pts = vec![];
            for v in smooth(&raw, false) {
                pts.push((t, v));
                t += rng.gen_range(0.25..0.8);
            }
            pts.push((t, 0.0));
            build_profile(&pts, domain).expect("generated radial profile")
        }
        DomainKind::Circle => {
            let off = rng.gen_range(0.0..TAU / k as f64);
            let pts: Vec<(f64, f64)> = smooth(&raw, true)
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    let jitter = rng.gen_range(-0.3..0.3) * TAU / k as f64;
                    (off + i as f64 * TAU / k as f64 + jitter, v)
                })
                .collect();
            build_profile(&pts, domain).expect("generated circle profile")
        }
        DomainKind::PolarInterval => {
            let step = PI / (k + 1) as f64;
            let mut pts = vec![(0.0, rng.gen_range(0.05..1.0))];
            for (i, v) in smooth(&raw, false).into_iter().enumerate() {
                pts.push(((i as f64 + 1.0 + rng.gen_range(-0.3..0.3)) * step, v));
            }
            pts.push((PI, rng.gen_range(0.05..1.0)));
            build_profile(&pts, domain).expect("generated polar profile")
        }
    }
}

/// `n` random profiles from one seeded stream.
pub fn corpus(domain: Domain, seed: u64, n: usize) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_profile(&mut rng, domain)).collect()
}

/// Tent of height 1 on [−1, 1].
pub fn tent() -> Profile {
    build_profile(&[(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)], Domain::line()).expect("tent")
}

/// Two triangular bumps of the given height and half-width centred at `c1`
/// and `c2`, on the line or the half-line (the radial profile is zero near 0).
pub fn two_bumps(domain: Domain, c1: f64, c2: f64, height: f64, half_width: f64) -> Profile {
    let mut pts = vec![(c1 - half_width, 0.0), (c1, height), (c1 + half_width, 0.0)];
    if c2 - half_width > c1 + half_width {
        pts.push((c2 - half_width, 0.0));
    }
    pts.extend([(c2, height), (c2 + half_width, 0.0)]);
    build_profile(&pts, domain).expect("two bumps")
}

/// PL interpolant of the heat kernel φ_t(x) = (4πt)^{−1/2} e^{−x²/4t} on
/// [−L, L] with spacing h, forced to 0 at ±L.
pub fn gaussian_profile(t: f64, half_width: f64, h: f64) -> Profile {
    let n = (2.0 * half_width / h).round() as usize;
    let pts: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let x = -half_width + 2.0 * half_width * i as f64 / n as f64;
            let v = if i == 0 || i == n { 0.0 } else { (4.0 * PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp() };
            (x, v)
        })
        .collect();
    build_profile(&pts, Domain::line()).expect("gaussian")
}

/// log((4 + x²)/(1 + x²)).
pub fn poisson_example_fn(x: f64) -> f64 {
    ((4.0 + x * x) / (1.0 + x * x)).ln()
}

fn poisson_example_f2(x: f64) -> f64 {
    let a = 4.0 + x * x;
    let b = 1.0 + x * x;
    2.0 * (4.0 - x * x) / (a * a) - 2.0 * (1.0 - x * x) / (b * b)
}

/// PL approximation of log((4 + x²)/(1 + x²)) with interpolation error about
/// `tol`: breakpoints equidistribute |f''|, 0 is a breakpoint, and the profile
/// is cut to 0 at |x| = 1000 (where f ≈ 3e−6).
pub fn poisson_example(tol: f64) -> Profile {
    let cut = 1000.0;
    let mut xs = vec![0.0];
    let mut x = 0.0;
    let mut h: f64 = (8.0 * tol / 1.5).sqrt();
    while x < cut {
        for _ in 0..3 {
            let m = poisson_example_f2(x).abs().max(poisson_example_f2(x + h).abs()).max(1e-14);
            h = (8.0 * tol / m).sqrt().min(25.0);
        }
        x = (x + h).min(cut);
        xs.push(x);
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * xs.len());
    for &x in xs.iter().rev() {
        pts.push((-x, if x >= cut { 0.0 } else { poisson_example_fn(x) }));
    }
    for &x in xs.iter().skip(1) {
        pts.push((x, if x >= cut { 0.0 } else { poisson_example_fn(x) }));
    }
    build_profile(&pts, Domain::line()).expect("poisson example")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_seed_deterministic() {
        for d in [Domain::line(), Domain::radial(2).unwrap(), Domain::circle(), Domain::polar(2).unwrap()] {
            let a = corpus(d, 7, 5);
            let b = corpus(d, 7, 5);
            assert_eq!(a, b);
            assert_ne!(a, corpus(d, 8, 5));
            assert!(a.iter().all(|p| p.is_nonnegative()));
        }
    }

    #[test]
    fn poisson_example_accuracy() {
        let f = poisson_example(2e-7);
        assert_eq!(f.eval(0.0), 4f64.ln());
        for &x in &[0.0123, 0.77, 1.5, 3.3, 17.0, 250.0] {
            assert!((f.eval(x) - poisson_example_fn(x)).abs() < 3e-7, "x = {x}");
        }
        assert!(f.len() < 20_000);
    }
}
