//! Special functions used by the averaging kernels.

use std::f64::consts::{PI, SQRT_2};

/// Surface area of the unit sphere S^k in R^{k+1}.
///
/// `sphere_area(0) = 2`, `sphere_area(1) = 2π`, `sphere_area(2) = 4π`.
pub fn sphere_area(k: u32) -> f64 {
    let mut w = if k % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut j = if k % 2 == 0 { 0 } else { 1 };
    while j < k {
        // ω_{j+2} = ω_j · 2π / (j + 1)
        w *= 2.0 * PI / (j as f64 + 1.0);
        j += 2;
    }
    w
}

/// Volume of the unit ball in R^d.
pub fn ball_volume(d: u32) -> f64 {
    sphere_area(d - 1) / d as f64
}

/// ∫_0^θ sin^n(φ) dφ by the standard reduction formula.
pub fn sin_power_integral(n: u32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    // I_k = -cos θ sin^{k-1} θ / k + (k-1)/k I_{k-2}
    let mut acc = if n % 2 == 0 { theta } else { 1.0 - c };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        let kf = k as f64;
        acc = -c * s.powi(k as i32 - 1) / kf + (kf - 1.0) / kf * acc;
        k += 2;
    }
    acc
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Φ(b) − Φ(a) for the standard normal distribution, without cancellation in the tails.
pub fn normal_mass(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let (ea, eb) = (a / SQRT_2, b / SQRT_2);
    if a >= 0.0 {
        0.5 * (erfc(ea) - erfc(eb))
    } else if b <= 0.0 {
        0.5 * (erfc(-eb) - erfc(-ea))
    } else {
        0.5 * (erf(eb) - erf(ea))
    }
}

/// e^{-z} I_0(z) for z ≥ 0.
pub fn bessel_i0_scaled(z: f64) -> f64 {
    let z = z.abs();
    if z <= 30.0 {
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-z).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0_f64;
        loop {
            let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * z);
            if next.abs() >= term.abs() || next.abs() < 1e-17 {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * z).sqrt()
    }
}

/// Complete elliptic integral of the second kind E(m), parameter m = k² ∈ [0, 1).
pub fn ellip_e(m: f64) -> f64 {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut c2 = m;
    let mut pow = 0.5;
    let mut sum = pow * c2;
    for _ in 0..64 {
        let cn = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        c2 = cn * cn;
        sum += pow * c2;
        // stop once c_n is at rounding level; further terms only amplify noise
        if cn.abs() <= 1e-15 * a {
            break;
        }
    }
    PI / (2.0 * a) * (1.0 - sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(0) - 2.0).abs() < 1e-15);
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sin_power_matches_quadrature() {
        for n in 0..7 {
            for &th in &[0.3, 1.2, 2.5, PI] {
                let m = 20000;
                let h = th / m as f64;
                let mut s = 0.0;
                for i in 0..m {
                    let x = (i as f64 + 0.5) * h;
                    s += x.sin().powi(n as i32);
                }
                s *= h;
                assert!((sin_power_integral(n, th) - s).abs() < 1e-8, "n={n} th={th}");
            }
        }
    }

    #[test]
    fn i0_scaled_both_branches() {
        // I0(1) = 1.2660658777520082
        assert!((bessel_i0_scaled(1.0) - 1.2660658777520082 * (-1.0f64).exp()).abs() < 1e-15);
        // continuity across the branch switch
        let a = bessel_i0_scaled(30.0);
        let b = bessel_i0_scaled(30.0 + 1e-9);
        assert!((a - b).abs() < 1e-11);
        // large-argument leading behaviour
        let z = 400.0;
        assert!((bessel_i0_scaled(z) * (2.0 * PI * z).sqrt() - 1.0 - 1.0 / (8.0 * z)).abs() < 1e-5);
    }

    #[test]
    fn ellip_e_values() {
        assert!((ellip_e(0.0) - PI / 2.0).abs() < 1e-15);
        // E(0.5) = 1.3506438810476755
        assert!((ellip_e(0.5) - 1.3506438810476755).abs() < 1e-15);
        assert!((ellip_e(0.999999) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn normal_mass_tails() {
        assert!((normal_mass(-1.0, 1.0) - 0.6826894921370859).abs() < 1e-14);
        let t = normal_mass(9.0, 10.0);
        assert!(t > 0.0 && t < 1.2e-19);
    }
}
