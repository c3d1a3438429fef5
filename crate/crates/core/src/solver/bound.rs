use num_complex::Complex;

use crate::confinement::ModeSet;
use crate::linalg::poly_roots;
use crate::scalar::lit;
use crate::{Error, Real, Result};

/// Two-body bound state below the ground transverse threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState<T> {
    /// `s = a/d_U`.
    pub s: T,
    /// Dimensionless root `x_B`, same sign as `a`.
    pub x_b: T,
    /// Total energy `E_B = q_0² − x_B²/a²`.
    pub e_b: T,
    /// `κ_B² = E_B`.
    pub kappa_b_sq: T,
    /// Longitudinal decay constant `x_B/a`.
    pub decay: T,
    pub e_b_over_eps0: T,
}

/// `g(x) = 2s² + x(1 − sgn(s)√(s²C′² + x²))`.
fn g_eq<T: Real>(x: T, s: T, cp: T) -> T {
    let sg = s.signum();
    lit::<T>(2.0) * s * s + x * (T::one() - sg * (s * s * cp * cp + x * x).sqrt())
}

fn g_deriv<T: Real>(x: T, s: T, cp: T) -> T {
    let r = (s * s * cp * cp + x * x).sqrt();
    T::one() - s.signum() * (r + x * x / r)
}

fn g_scale<T: Real>(x: T, s: T, cp: T) -> T {
    lit::<T>(2.0) * s * s + x.abs() * (T::one() + (s * s * cp * cp + x * x).sqrt())
}

// tolerances for accepting a root; never tighter than the working precision allows
fn root_tol<T: Real>() -> T {
    lit::<T>(1e-9).max(lit::<T>(100.0) * T::epsilon())
}

fn imag_tol<T: Real>() -> T {
    lit::<T>(1e-6).max(T::epsilon().sqrt())
}

fn newton_polish<T: Real>(mut x: T, s: T, cp: T) -> T {
    for _ in 0..50 {
        let d = g_deriv(x, s, cp);
        if d == T::zero() {
            break;
        }
        let step = g_eq(x, s, cp) / d;
        let next = x - step;
        if next.signum() != x.signum() {
            break;
        }
        x = next;
        if step.abs() <= T::epsilon() * x.abs() {
            break;
        }
    }
    x
}

/// Real roots of `x⁴ + (C′²s² − 1)x² − 4s²x − 4s⁴ = 0` that satisfy the
/// unsquared equation and carry the sign of `s`.
fn admissible_roots<T: Real>(s: T, cp: T) -> Result<Vec<T>> {
    let s2 = s * s;
    let four: T = lit(4.0);
    let roots = poly_roots(&[-four * s2 * s2, -four * s2, cp * cp * s2 - T::one(), T::zero(), T::one()])?;
    let mut out = Vec::new();
    for r in roots {
        let scale = T::one().max(r.norm());
        if r.im.abs() > imag_tol::<T>() * scale || r.re == T::zero() || r.re.signum() != s.signum() {
            continue;
        }
        let x = newton_polish(r.re, s, cp);
        if g_eq(x, s, cp).abs() <= root_tol::<T>() * g_scale(x, s, cp) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Weak-binding estimate used to select the branch at the seed.
fn weak_limit<T: Real>(s: T) -> T {
    if s > T::zero() {
        T::one()
    } else {
        -lit::<T>(2.0) * s * s
    }
}

fn nearest<T: Real>(cands: &[T], target: f64) -> Option<f64> {
    cands
        .iter()
        .map(|c| c.as_f64())
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
}

/// Bound state for `s = a/d_U`, followed by continuation in `s` from a small
/// seed on the branch that connects to the weak-binding limit.
pub fn bound_state<T: Real>(s: T, modes: &ModeSet<T>) -> Result<BoundState<T>> {
    if !s.is_finite() || s == T::zero() {
        return Err(Error::InvalidInput(format!("s must be finite and nonzero, got {s}")));
    }
    let cp = modes.cprime();
    let seed_mag: T = lit(1e-3);
    let mut s_cur = s.signum() * s.abs().min(seed_mag);
    let pick = |s_at: T, target: T| -> Result<T> {
        let cands = admissible_roots(s_at, cp)?;
        nearest(&cands, target.as_f64())
            .map(lit)
            .ok_or(Error::NoValidRoot { s: s_at.as_f64() })
    };
    let mut x = pick(s_cur, weak_limit(s_cur))?;
    let mut ratio: T = lit(1.25);
    while s_cur.abs() < s.abs() {
        let s_next = if (s_cur * ratio).abs() >= s.abs() { s } else { s_cur * ratio };
        let x_next = pick(s_next, x)?;
        let jump = (x_next - x).abs() / x.abs();
        if jump > lit(0.1) && ratio > lit(1.0 + 1e-6) {
            ratio = ratio.sqrt();
            continue;
        }
        s_cur = s_next;
        x = x_next;
        if jump < lit(0.02) {
            ratio = (ratio * ratio).min(lit(1.25));
        }
    }
    if x.signum() != s.signum() || g_eq(x, s, cp).abs() > root_tol::<T>() * g_scale(x, s, cp) {
        return Err(Error::NoValidRoot { s: s.as_f64() });
    }
    let a = s * modes.d_u;
    let decay = x / a;
    let e_b = modes.eps[0] - decay * decay;
    Ok(BoundState { s, x_b: x, e_b, kappa_b_sq: e_b, decay, e_b_over_eps0: e_b / modes.eps[0] })
}

/// Strong-confinement limit of `x_B/|s|`, `x_∞ = ±√((√(16 + C′⁴) − C′²)/2)`, for `s → ±∞`.
pub fn strong_confinement_root<T: Real>(cprime: T, positive: bool) -> T {
    let c4 = cprime.powi(4);
    let c2 = cprime * cprime;
    let x = (((lit::<T>(16.0) + c4).sqrt() - c2) / lit(2.0)).sqrt();
    if positive { x } else { -x }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionSamples<T> {
    pub values: Vec<T>,
    /// Largest difference between the two `κ` branches (intermediate region).
    pub branch_mismatch: T,
    pub warnings: Vec<String>,
}

/// Unnormalized bound-state wavefunction.
///
/// Far region: `points` are `(ρ, z)` and the value is `e^{−x_B|z|/a} φ_0(ρ)`.
/// Intermediate region: `points` are `(r, _)` and the value is
/// `[√(q_1² − κ²) − (2/d_U²)/√(q_0² − κ²)] j_0(κr) + κ n_0(κr)`, evaluated on
/// both branches of `κ = ±√E_B`.
pub fn bound_wavefunction<T: Real>(
    bs: &BoundState<T>,
    modes: &ModeSet<T>,
    far: bool,
    points: &[(T, T)],
) -> WavefunctionSamples<T> {
    let mut warnings = Vec::new();
    if far {
        let limit = modes.d_u * lit(3.0);
        if let Some(&(_, z)) = points.iter().find(|(_, z)| z.abs() < limit) {
            warnings.push(format!("|z| = {} is inside 3 d_U, where the far-field form is not valid", z.abs()));
        }
        let values = points.iter().map(|&(rho, z)| (-bs.decay * z.abs()).exp() * modes.profile(0, rho)).collect();
        return WavefunctionSamples { values, branch_mismatch: T::zero(), warnings };
    }
    let kappa_sq = Complex::new(bs.e_b, T::zero());
    let kappa = kappa_sq.sqrt();
    let q1_term = (modes.gap(1) + bs.decay * bs.decay).sqrt();
    let d2 = modes.d_u * modes.d_u;
    let coef = q1_term - lit::<T>(2.0) / (d2 * bs.decay.abs());
    let eval = |kap: Complex<T>, r: T| -> Complex<T> {
        let z = kap * r;
        let j0 = if z.norm() < lit(1e-4) {
            Complex::new(T::one(), T::zero()) - z * z / lit::<T>(6.0)
        } else {
            z.sin() / z
        };
        // κ n_0(κr) = −cos(κr)/r
        j0 * coef - z.cos() / r
    };
    let mut mismatch = T::zero();
    let values = points
        .iter()
        .map(|&(r, _)| {
            let a = eval(kappa, r);
            let b = eval(-kappa, r);
            mismatch = mismatch.max((a - b).norm()).max(a.im.abs());
            a.re
        })
        .collect();
    WavefunctionSamples { values, branch_mismatch: mismatch, warnings }
}
