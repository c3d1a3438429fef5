//! Special functions: spherical Bessel functions `j_l`, `n_l`, Legendre
//! polynomials on real and complex arguments, cylindrical `J_0`, `J_1` and the
//! positive zeros of `J_0`.

use num_complex::Complex;

use crate::scalar::{from_usize, lit};
use crate::{Error, Real, Result};

/// Highest supported order for the spherical Bessel and Legendre kernels.
pub const MAX_ORDER: usize = 64;

/// Spherical Bessel function of the first kind `j_l(x)`.
///
/// Small arguments use the power series, `x ≥ l + 10` the upward recurrence
/// and the band in between Miller's downward recurrence normalized against
/// the closed forms of `j_0`/`j_1`. Negative `x` is mapped by parity.
pub fn sph_bessel_j<T: Real>(l: usize, x: T) -> T {
    if x < T::zero() {
        let v = sph_bessel_j(l, -x);
        return if l % 2 == 0 { v } else { -v };
    }
    if x == T::zero() {
        return if l == 0 { T::one() } else { T::zero() };
    }
    let lf = from_usize::<T>(l);
    let two_l3 = lf + lf + lit(3.0);
    if x * x <= two_l3 {
        sph_j_series(l, x)
    } else if x >= lf + lit(10.0) {
        sph_j_upward(l, x)
    } else {
        sph_j_miller(l, x)
    }
}

fn sph_j_series<T: Real>(l: usize, x: T) -> T {
    // x^l / (2l+1)!! built incrementally so large l underflows instead of overflowing
    let mut pref = T::one();
    for i in 1..=l {
        pref = pref * x / from_usize::<T>(2 * i + 1);
    }
    let half_x2 = -x * x / lit(2.0);
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..200 {
        term = term * half_x2 / (from_usize::<T>(k) * from_usize::<T>(2 * l + 2 * k + 1));
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    pref * sum
}

fn sph_j_upward<T: Real>(l: usize, x: T) -> T {
    let (s, c) = (x.sin(), x.cos());
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = s / (x * x) - c / x;
    for n in 1..l {
        let next = from_usize::<T>(2 * n + 1) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn sph_j_miller<T: Real>(l: usize, x: T) -> T {
    let xf = x.to_f64().unwrap_or(0.0);
    let top = (l as f64).max(xf);
    let start = top.ceil() as usize + 30 + (40.0 * top).sqrt().ceil() as usize;
    let big = T::max_value().sqrt();
    let rescale = T::one() / big;

    let mut next = T::zero();
    let mut cur = T::min_positive_value().sqrt();
    let mut at_l = T::zero();
    let mut j1 = T::zero();
    for n in (1..=start).rev() {
        // cur = j_n, produce j_{n-1}
        let prev = from_usize::<T>(2 * n + 1) / x * cur - next;
        next = cur;
        cur = prev;
        if n - 1 == l {
            at_l = cur;
        }
        if n == l {
            at_l = next;
        }
        if n - 1 == 1 {
            j1 = cur;
        }
        if cur.abs() > big {
            cur = cur * rescale;
            next = next * rescale;
            at_l = at_l * rescale;
            j1 = j1 * rescale;
        }
    }
    let j0 = cur;
    let (s, c) = (x.sin(), x.cos());
    let j0_true = s / x;
    let j1_true = s / (x * x) - c / x;
    if j0_true.abs() >= j1_true.abs() {
        at_l * (j0_true / j0)
    } else {
        at_l * (j1_true / j1)
    }
}

/// Spherical Bessel function of the second kind `n_l(x)` (sign convention
/// `n_0(x) = -cos x / x`). Defined for `x > 0` only.
pub fn sph_bessel_n<T: Real>(l: usize, x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("n_{l}(x) requires x > 0, got {x}")));
    }
    let (s, c) = (x.sin(), x.cos());
    let n0 = -c / x;
    if l == 0 {
        return Ok(n0);
    }
    let mut prev = n0;
    let mut cur = -c / (x * x) - s / x;
    for n in 1..l {
        let next = from_usize::<T>(2 * n + 1) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Derivative `j_l'(x)`.
pub fn sph_bessel_j_deriv<T: Real>(l: usize, x: T) -> T {
    if l == 0 {
        return -sph_bessel_j(1, x);
    }
    if x == T::zero() {
        return if l == 1 { lit(1.0 / 3.0) } else { T::zero() };
    }
    sph_bessel_j(l - 1, x) - from_usize::<T>(l + 1) / x * sph_bessel_j(l, x)
}

/// Derivative `n_l'(x)`, `x > 0`.
pub fn sph_bessel_n_deriv<T: Real>(l: usize, x: T) -> Result<T> {
    if l == 0 {
        return sph_bessel_n(1, x).map(|v| -v);
    }
    Ok(sph_bessel_n(l - 1, x)? - from_usize::<T>(l + 1) / x * sph_bessel_n(l, x)?)
}

/// Legendre polynomial `P_l(z)` for complex `z` by the three-term recurrence.
pub fn legendre_p<T: Real>(l: usize, z: Complex<T>) -> Complex<T> {
    let mut prev = Complex::new(T::one(), T::zero());
    if l == 0 {
        return prev;
    }
    let mut cur = z;
    for n in 1..l {
        let nf = from_usize::<T>(n);
        let next = (z * cur * (nf + nf + T::one()) - prev * nf) / (nf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Legendre polynomial `P_l(x)` on the real line.
pub fn legendre_p_real<T: Real>(l: usize, x: T) -> T {
    let mut prev = T::one();
    if l == 0 {
        return prev;
    }
    let mut cur = x;
    for n in 1..l {
        let nf = from_usize::<T>(n);
        let next = ((nf + nf + T::one()) * x * cur - nf * prev) / (nf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Monomial coefficients of `P_l`, lowest degree first.
pub fn legendre_coefficients<T: Real>(l: usize) -> Vec<T> {
    let mut prev = vec![T::one()];
    if l == 0 {
        return prev;
    }
    let mut cur = vec![T::zero(), T::one()];
    for n in 1..l {
        let nf = from_usize::<T>(n);
        let mut next = vec![T::zero(); n + 2];
        for (d, &c) in cur.iter().enumerate() {
            next[d + 1] = next[d + 1] + (nf + nf + T::one()) * c;
        }
        for (d, &c) in prev.iter().enumerate() {
            next[d] = next[d] - nf * c;
        }
        for c in next.iter_mut() {
            *c = *c / (nf + T::one());
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Cylindrical Bessel function `J_0(x)`.
pub fn bessel_j0<T: Real>(x: T) -> T {
    bessel_j01(x.abs()).0
}

/// Cylindrical Bessel function `J_1(x)`.
pub fn bessel_j1<T: Real>(x: T) -> T {
    let v = bessel_j01(x.abs()).1;
    if x < T::zero() {
        -v
    } else {
        v
    }
}

fn bessel_j01<T: Real>(x: T) -> (T, T) {
    if x < lit(2.0) {
        j01_series(x)
    } else if x <= lit(25.0) {
        j01_miller(x)
    } else {
        (hankel_asymptotic(0, x), hankel_asymptotic(1, x))
    }
}

fn j01_series<T: Real>(x: T) -> (T, T) {
    let q = -x * x / lit(4.0);
    let (mut t0, mut s0) = (T::one(), T::one());
    let (mut t1, mut s1) = (T::one(), T::one());
    for k in 1..60 {
        let kf = from_usize::<T>(k);
        t0 = t0 * q / (kf * kf);
        t1 = t1 * q / (kf * (kf + T::one()));
        s0 = s0 + t0;
        s1 = s1 + t1;
        if t0.abs() <= T::epsilon() * s0.abs() && t1.abs() <= T::epsilon() * s1.abs() {
            break;
        }
    }
    (s0, s1 * x / lit(2.0))
}

fn j01_miller<T: Real>(x: T) -> (T, T) {
    let xf = x.to_f64().unwrap_or(0.0);
    let mut start = xf.ceil() as usize + 40;
    if start % 2 == 1 {
        start += 1;
    }
    let big = T::max_value().sqrt();
    let rescale = T::one() / big;
    let mut next = T::zero();
    let mut cur = T::min_positive_value().sqrt();
    let mut norm = T::zero();
    let mut j1 = T::zero();
    for n in (1..=start).rev() {
        // cur = J_n
        if n % 2 == 0 {
            norm = norm + cur + cur;
        }
        let prev = from_usize::<T>(2 * n) / x * cur - next;
        next = cur;
        cur = prev;
        if n == 1 {
            j1 = next;
        }
        if cur.abs() > big {
            cur = cur * rescale;
            next = next * rescale;
            norm = norm * rescale;
            j1 = j1 * rescale;
        }
    }
    norm = norm + cur;
    (cur / norm, j1 / norm)
}

fn hankel_asymptotic<T: Real>(order: usize, x: T) -> T {
    let mu = from_usize::<T>(4 * order * order);
    let eight_x = x * lit(8.0);
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut last = T::infinity();
    for k in 1..80 {
        let odd = from_usize::<T>(2 * k - 1);
        term = term * (mu - odd * odd) / (from_usize::<T>(k) * eight_x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        // signs alternate within each of P and Q: P = 1 - t2 + t4 - ..., Q = t1 - t3 + ...
        match k % 4 {
            1 => q = q + term,
            2 => p = p - term,
            3 => q = q - term,
            _ => p = p + term,
        }
        if term.abs() < T::epsilon() * lit(1e-2) {
            break;
        }
    }
    let (s, c) = (x.sin(), x.cos());
    let r2 = T::SQRT_2();
    let (cos_chi, sin_chi) = if order == 0 {
        ((c + s) / r2, (s - c) / r2)
    } else {
        ((s - c) / r2, -(s + c) / r2)
    };
    (lit::<T>(2.0) / (T::PI() * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// First `count` positive zeros of `J_0`, each bracketed in a unit-width
/// interval around its McMahon estimate and refined by safeguarded Newton.
pub fn j0_roots<T: Real>(count: usize) -> Vec<T> {
    (1..=count).map(j0_root).collect()
}

fn j0_root<T: Real>(m: usize) -> T {
    let beta = (from_usize::<T>(m) - lit(0.25)) * T::PI();
    let b8 = beta * lit(8.0);
    let guess = beta + T::one() / b8 - lit::<T>(124.0 / 3.0) / b8.powi(3)
        + lit::<T>(120928.0 / 15.0) / b8.powi(5);
    let half: T = lit(0.5);
    let (mut lo, mut hi) = (beta - half, beta + half);
    let mut flo = bessel_j0(lo);
    if (flo > T::zero()) == (bessel_j0(hi) > T::zero()) {
        // McMahon is accurate to far better than the bracket; this is unreachable
        // for m >= 1 but keep the guess rather than loop forever.
        return guess;
    }
    let mut r = guess;
    let tol = T::epsilon() * lit(4.0);
    for _ in 0..100 {
        let f = bessel_j0(r);
        if f == T::zero() {
            return r;
        }
        if (f > T::zero()) == (flo > T::zero()) {
            lo = r;
            flo = f;
        } else {
            hi = r;
        }
        let step = f / bessel_j1(r);
        let mut next = r + step;
        if !(next > lo && next < hi) {
            next = (lo + hi) * half;
        }
        let done = (next - r).abs() <= tol * r;
        r = next;
        if done {
            break;
        }
    }
    r
}

/// Zeros of `J_0` in the cosine approximation, `(n + 3/4)π` for `n = 0..count`.
pub fn j0_roots_cosine<T: Real>(count: usize) -> Vec<T> {
    (0..count)
        .map(|n| (from_usize::<T>(n) + lit(0.75)) * T::PI())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    // Independent oracle: direct power series with no switching.
    fn series_oracle(l: usize, x: f64) -> f64 {
        let mut dfact = 1.0;
        for i in 1..=l {
            dfact *= (2 * i + 1) as f64;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..400 {
            term *= -x * x / 2.0 / (k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        x.powi(l as i32) / dfact * sum
    }

    #[test]
    fn j0_small_argument_limit() {
        assert_eq!(sph_bessel_j(0, 0.0_f64), 1.0);
        assert_relative_eq!(sph_bessel_j(0, 1e-12_f64), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn j1_at_one() {
        let v = sph_bessel_j(1, 1.0_f64);
        assert_relative_eq!(v, series_oracle(1, 1.0), max_relative = 1e-14);
        assert!((v - 0.3011687).abs() < 1e-7);
    }

    #[test]
    fn j2_at_five_against_series() {
        let v = sph_bessel_j(2, 5.0_f64);
        assert_relative_eq!(v, series_oracle(2, 5.0), max_relative = 1e-12);
    }

    #[test]
    fn j_large_order_small_argument_is_finite() {
        let v = sph_bessel_j(64, 0.5_f64);
        assert!(v.is_finite() && v > 0.0);
        assert_relative_eq!(v, series_oracle(64, 0.5), max_relative = 1e-12);
        let w = sph_bessel_j(64, 1e-3_f64);
        assert!(!w.is_nan());
    }

    #[test]
    fn j_miller_band_matches_series_where_series_is_clean() {
        for &(l, x) in &[(5usize, 4.0), (10, 6.0), (20, 12.0), (30, 25.0)] {
            let v = sph_bessel_j(l, x);
            assert_relative_eq!(v, series_oracle(l, x), max_relative = 1e-11);
        }
    }

    #[test]
    fn n_closed_forms() {
        assert!(sph_bessel_n(0, PI / 2.0).unwrap().abs() < 1e-16);
        assert_relative_eq!(sph_bessel_n(0, 1.0).unwrap(), -(1.0f64).cos(), max_relative = 1e-15);
        let expect = -(1.0f64).cos() - (1.0f64).sin();
        assert_relative_eq!(sph_bessel_n(1, 1.0).unwrap(), expect, max_relative = 1e-15);
        assert!((expect + 1.3817733).abs() < 1e-7);
    }

    #[test]
    fn n_rejects_nonpositive() {
        assert!(matches!(sph_bessel_n(0, 0.0_f64), Err(Error::Domain(_))));
        assert!(sph_bessel_n(2, -1.0_f64).is_err());
    }

    #[test]
    fn wronskian() {
        for l in 0..=6 {
            let mut x = 0.1_f64;
            while x <= 50.0 {
                let w = sph_bessel_j(l, x) * sph_bessel_n_deriv(l, x).unwrap()
                    - sph_bessel_j_deriv(l, x) * sph_bessel_n(l, x).unwrap();
                let expect = 1.0 / (x * x);
                assert!(
                    ((w - expect) / expect).abs() < 1e-10,
                    "l={l} x={x} w={w} expect={expect}"
                );
                x *= 1.13;
            }
        }
    }

    #[test]
    fn legendre_examples() {
        let z = Complex::new(0.3_f64, -1.7);
        assert_eq!(legendre_p(0, z), Complex::new(1.0, 0.0));
        assert_eq!(legendre_p(1, Complex::new(0.0, 0.5_f64)), Complex::new(0.0, 0.5));
        let p2 = legendre_p(2, Complex::new(0.0, 1.0_f64));
        assert_relative_eq!(p2.re, -2.0, epsilon = 1e-15);
        assert_eq!(p2.im, 0.0);
    }

    #[test]
    fn legendre_coefficients_match_recurrence() {
        for l in 0..12 {
            let c: Vec<f64> = legendre_coefficients(l);
            for &x in &[-0.9, -0.2, 0.0, 0.35, 0.8, 1.7] {
                let poly: f64 = c.iter().rev().fold(0.0, |acc, &a| acc * x + a);
                assert_relative_eq!(poly, legendre_p_real(l, x), epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn legendre_parity_and_realness() {
        for l in 0..=12 {
            for &(re, im) in &[(0.4, 0.1), (-1.3, 2.2), (0.0, 0.7)] {
                let z = Complex::new(re, im);
                let a = legendre_p(l, -z);
                let b = legendre_p(l, z) * if l % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - b).norm() <= 1e-13 * (1.0 + b.norm()));
            }
        }
        for l in 0..=8 {
            for s in (l % 2..=8).step_by(2) {
                for &x in &[0.0_f64, 0.3, 1.1, 2.5] {
                    let z = Complex::new(0.0, x);
                    let prod = legendre_p(l, z) * legendre_p(s, z);
                    assert!(prod.im.abs() <= 1e-13 * (1.0 + prod.re.abs()));
                }
            }
        }
    }

    #[test]
    fn cylindrical_bessel_reference_values() {
        // Abramowitz & Stegun table values
        assert_relative_eq!(bessel_j0(1.0_f64), 0.765_197_686_557_966_6, max_relative = 1e-14);
        assert_relative_eq!(bessel_j1(1.0_f64), 0.440_050_585_744_933_5, max_relative = 1e-14);
        assert_relative_eq!(bessel_j0(10.0_f64), -0.245_935_764_451_348_3, max_relative = 1e-13);
        assert_relative_eq!(bessel_j1(10.0_f64), 0.043_472_746_168_861_44, max_relative = 1e-12);
        assert_relative_eq!(bessel_j0(30.0_f64), -0.086_367_983_581_040_23, max_relative = 1e-12);
        assert_relative_eq!(bessel_j1(-1.0_f64), -0.440_050_585_744_933_5, max_relative = 1e-14);
    }

    #[test]
    fn cylindrical_branches_agree_at_switch_points() {
        let (a, b) = (j01_series(2.0_f64), j01_miller(2.0_f64));
        assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
        let m = j01_miller(25.0_f64);
        assert!((m.0 - hankel_asymptotic(0, 25.0_f64)).abs() < 1e-14);
        assert!((m.1 - hankel_asymptotic(1, 25.0_f64)).abs() < 1e-14);
    }

    #[test]
    fn first_j0_root_and_cosine_estimate() {
        let r: Vec<f64> = j0_roots(3);
        assert_relative_eq!(r[0], 2.404_825_557_695_773, max_relative = 1e-13);
        assert_relative_eq!(r[1], 5.520_078_110_286_311, max_relative = 1e-13);
        let c: Vec<f64> = j0_roots_cosine(1);
        assert_relative_eq!(c[0], 0.75 * PI, max_relative = 1e-15);
        assert!((c[0] - 2.356194).abs() < 1e-6);
        let rel = (r[0] - c[0]) / r[0];
        assert!((rel - 0.0202).abs() < 5e-4, "rel={rel}");
    }

    #[test]
    fn j0_roots_increase_and_gaps_approach_pi() {
        let r: Vec<f64> = j0_roots(60);
        for w in r.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!((r[50] - r[49] - PI).abs() < 1e-3);
        for &x in &r {
            assert!(bessel_j0(x).abs() < 1e-13);
        }
        let far: Vec<f64> = j0_roots(10_000);
        assert!(bessel_j0(far[9_999]).abs() < 1e-12);
    }

    #[test]
    fn single_precision_kernels() {
        let v = sph_bessel_j(1, 1.0_f32);
        assert!((v - 0.301_168_7).abs() < 1e-6);
        let r: Vec<f32> = j0_roots(2);
        assert!((r[0] - 2.404_825_6).abs() < 1e-5);
    }
}
