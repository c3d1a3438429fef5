use crate::scalar::lit;
use crate::{Error, Real, Result};

/// Longitudinal parity of a two-body state in a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    /// Even: `cos(k0 R + δ_g) = 0`.
    G,
    /// Odd: `sin(k0 R + δ_u) = 0`.
    U,
}

const MAX_SCAN: usize = 1 << 22;

/// First `count` positive roots of the quantization condition for a
/// longitudinal box of half-length `r_par`, with a momentum-dependent phase
/// `delta(k0)`. Brackets come from a scan with step `π/(8R)` and are refined
/// by bisection.
pub fn longitudinal_levels<T: Real>(
    delta: &dyn Fn(T) -> T,
    r_par: T,
    parity: Parity,
    count: usize,
) -> Result<Vec<T>> {
    if !(r_par > T::zero() && r_par.is_finite()) {
        return Err(Error::InvalidInput(format!("box half-length must be positive, got {r_par}")));
    }
    let h = |k0: T| {
        let arg = k0 * r_par + delta(k0);
        match parity {
            Parity::G => arg.cos(),
            Parity::U => arg.sin(),
        }
    };
    let step = T::PI() / (lit::<T>(8.0) * r_par);
    let mut roots = Vec::with_capacity(count);
    let mut lo = step * lit(1e-6);
    let mut h_lo = h(lo);
    let mut i = 0;
    while roots.len() < count {
        i += 1;
        if i > MAX_SCAN {
            return Err(Error::InvalidInput(format!("found only {} of {count} levels", roots.len())));
        }
        let hi = step * crate::scalar::from_usize::<T>(i);
        let h_hi = h(hi);
        if h_hi == T::zero() {
            roots.push(hi);
            lo = hi + step * lit(1e-6);
            h_lo = h(lo);
            continue;
        }
        if h_lo.signum() != h_hi.signum() && h_lo != T::zero() {
            roots.push(bisect(&h, lo, hi, h_lo));
        }
        lo = hi;
        h_lo = h_hi;
    }
    Ok(roots)
}

fn bisect<T: Real>(h: &dyn Fn(T) -> T, mut lo: T, mut hi: T, h_lo: T) -> T {
    let s_lo = h_lo.signum();
    for _ in 0..200 {
        let mid = (lo + hi) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid);
        if hm == T::zero() {
            return mid;
        }
        if hm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / lit(2.0)
}
