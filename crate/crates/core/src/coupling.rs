//! Geometry factors entering the T-matrix: the spherical expansion
//! coefficients `α_ln`, the coupling integrals `P_ls`, the `Δ_c` correction and
//! the discrete pseudopotential constant.

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex;

use crate::confinement::{gamma_factor, ChannelDecomposition, ModeSet};
use crate::quadrature::integrate;
use crate::scalar::{from_usize, lit};
use crate::specfun::{bessel_j0, legendre_coefficients, legendre_p_real, sph_bessel_j};
use crate::{Error, Real, Result};

/// How `α_ln` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode<T> {
    /// `|φ_n(0)| P_l(k_n/k)`, exact for Bessel-shaped transverse modes.
    Approximate,
    /// Projection of `e^{ik_n z} φ_n(ρ)` on `j_l(kr) P_l(cos θ)` over the
    /// sphere of radius `probe_radius`.
    Exact { probe_radius: T },
}

/// Per-momentum coupling data. `P_ls` values are computed lazily and cached;
/// concurrent readers are fine and every writer stores the same value.
#[derive(Debug)]
pub struct CouplingContext<'a, T> {
    pub modes: &'a ModeSet<T>,
    pub ch: ChannelDecomposition<T>,
    /// `p_c = √(q_{1+n_E}² − k²)`.
    pub p_c: T,
    pub gamma: T,
    pub alpha_mode: AlphaMode<T>,
    cache: RwLock<HashMap<(usize, usize), T>>,
}

impl<'a, T: Real> CouplingContext<'a, T> {
    pub fn new(modes: &'a ModeSet<T>, ch: ChannelDecomposition<T>) -> Result<Self> {
        let closed = ch.n_e + 1;
        if closed >= modes.len() {
            return Err(Error::NotEnoughModes { needed: closed, available: modes.len() });
        }
        let gamma = gamma_factor(modes, &ch)?;
        let p_c = ch.k_n[closed];
        Ok(CouplingContext { modes, ch, p_c, gamma, alpha_mode: AlphaMode::Approximate, cache: RwLock::default() })
    }

    pub fn with_alpha_mode(mut self, mode: AlphaMode<T>) -> Self {
        self.alpha_mode = mode;
        self
    }

    pub fn k(&self) -> T {
        self.ch.k
    }

    /// Default probe radius for exact `α_ln`: a fifth of `d_U`.
    pub fn default_probe_radius(&self) -> T {
        self.modes.d_u * lit(0.2)
    }

    /// Expansion coefficient `α_ln` of the open channel `n`.
    pub fn alpha(&self, l: usize, n: usize) -> Result<T> {
        if n > self.ch.n_e {
            return Err(Error::InvalidInput(format!("α_ln needs an open channel, n = {n} > n_E = {}", self.ch.n_e)));
        }
        match self.alpha_mode {
            AlphaMode::Approximate => Ok(self.alpha_approx(l, n)),
            AlphaMode::Exact { probe_radius } => self.alpha_exact(l, n, probe_radius),
        }
    }

    fn alpha_approx(&self, l: usize, n: usize) -> T {
        self.modes.phi0sq[n].sqrt() * legendre_p_real(l, self.ch.k_n[n] / self.ch.k)
    }

    fn alpha_exact(&self, l: usize, n: usize, rp: T) -> Result<T> {
        if !(rp > T::zero()) {
            return Err(Error::InvalidInput(format!("probe radius must be positive, got {rp}")));
        }
        let k = self.ch.k;
        let kn = self.ch.k_n[n];
        let modes = self.modes;
        let integrand = |mu: T| -> Complex<T> {
            let rho = rp * (T::one() - mu * mu).max(T::zero()).sqrt();
            let w = modes.profile(n, rho) * legendre_p_real(l, mu);
            Complex::from_polar(T::one(), kn * rp * mu) * w
        };
        let jl = sph_bessel_j(l, k * rp);
        let scale = self.modes.phi0sq[n].sqrt() * jl.abs();
        let res = integrate(integrand, -T::one(), T::one(), scale * T::tol(1e-12), T::tol(1e-12));
        // divide by 2 i^l j_l(k r_p)
        let il = match l % 4 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        };
        let v = res.value / (il * (jl + jl));
        Ok(v.re)
    }

    /// `P_ls = k ∫₀^{p_c/k} P_l(ix) P_s(ix) dx` for `l + s` even, by adaptive
    /// quadrature to `1e-10 k`.
    pub fn p_matrix(&self, l: usize, s: usize) -> Result<T> {
        if (l + s) % 2 == 1 {
            return Err(Error::ParityViolation { l, s });
        }
        let key = (l.min(s), l.max(s));
        if let Some(v) = self.cache.read().expect("coupling cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = p_matrix_quadrature(l, s, self.ch.k, self.p_c);
        self.cache.write().expect("coupling cache poisoned").insert(key, v);
        Ok(v)
    }

    /// `Δ_c(r1, r2)` between two points `(ρ, z)` near the origin.
    pub fn delta_c(&self, r1: (T, T), r2: (T, T)) -> DeltaC<T> {
        let k2 = self.ch.k * self.ch.k;
        let dz = (r1.1 - r2.1).abs();
        let four_pi = T::PI() * lit(4.0);
        let f = |p: T| -> T {
            let q = (k2 + p * p).sqrt();
            bessel_j0(q * r1.0) * bessel_j0(q * r2.0) * (-p * dz).exp()
        };
        let res = integrate(f, T::zero(), self.p_c, T::tol(1e-12) * four_pi, T::zero());
        let limit = self.modes.r_u / lit(4.0);
        let radius = |r: (T, T)| (r.0 * r.0 + r.1 * r.1).sqrt();
        let outside = radius(r1) >= limit || radius(r2) >= limit;
        if outside {
            log::warn!("Δ_c evaluated at r >= R_U/4, outside its validity region");
        }
        DeltaC { value: -res.value / four_pi, outside_validity: outside }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaC<T> {
    pub value: T,
    pub outside_validity: bool,
}

// Q_l(x) with P_l(ix) = i^l Q_l(x).
fn q_poly<T: Real>(l: usize, x: T) -> T {
    let mut prev = T::one();
    if l == 0 {
        return prev;
    }
    let mut cur = x;
    for n in 1..l {
        let nf = from_usize::<T>(n);
        let next = ((nf + nf + T::one()) * x * cur + nf * prev) / (nf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

fn parity_sign<T: Real>(l: usize, s: usize) -> T {
    if ((l + s) / 2) % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Direct quadrature for `P_ls` at real `k`.
pub fn p_matrix_quadrature<T: Real>(l: usize, s: usize, k: T, p_c: T) -> T {
    let upper = p_c / k;
    let sign = parity_sign::<T>(l, s);
    let res = integrate(|x: T| q_poly(l, x) * q_poly(s, x), T::zero(), upper, T::tol(1e-10), T::tol(1e-13));
    sign * k * res.value
}

/// Monomial coefficients `c_j` with `P_ls = p_c Σ_j c_j (p_c²/k²)^j`.
pub fn p_matrix_series<T: Real>(l: usize, s: usize) -> Result<Vec<T>> {
    if (l + s) % 2 == 1 {
        return Err(Error::ParityViolation { l, s });
    }
    let ql = q_coefficients::<T>(l);
    let qs = q_coefficients::<T>(s);
    let mut prod = vec![T::zero(); ql.len() + qs.len() - 1];
    for (i, &a) in ql.iter().enumerate() {
        for (j, &b) in qs.iter().enumerate() {
            prod[i + j] = prod[i + j] + a * b;
        }
    }
    let sign = parity_sign::<T>(l, s);
    // only even powers survive; ∫ x^m = X^{m+1}/(m+1)
    Ok(prod
        .iter()
        .enumerate()
        .step_by(2)
        .map(|(m, &c)| sign * c / from_usize::<T>(m + 1))
        .collect())
}

fn q_coefficients<T: Real>(l: usize) -> Vec<T> {
    legendre_coefficients::<T>(l)
        .into_iter()
        .enumerate()
        .map(|(j, a)| {
            if a == T::zero() {
                return a;
            }
            // i^{j-l}, with j ≡ l (mod 2)
            if ((j + 3 * l) / 2) % 2 == 0 {
                a
            } else {
                -a
            }
        })
        .collect()
}

/// `P_ls` continued to complex `k²` and `p_c`.
pub fn p_matrix_continued<T: Real>(l: usize, s: usize, k2: Complex<T>, p_c: Complex<T>) -> Result<Complex<T>> {
    let c = p_matrix_series::<T>(l, s)?;
    let ratio = p_c * p_c / k2;
    let mut acc = Complex::new(T::zero(), T::zero());
    for &cj in c.iter().rev() {
        acc = acc * ratio + Complex::new(cj, T::zero());
    }
    Ok(acc * p_c)
}

/// Raw partial sum `2√s − Σ_{j=1}^s j^{-1/2}`.
pub fn olshanii_partial_sum<T: Real>(terms: usize) -> T {
    let s = from_usize::<T>(terms);
    lit::<T>(2.0) * s.sqrt() - inverse_sqrt_sum::<T>(terms)
}

fn inverse_sqrt_sum<T: Real>(terms: usize) -> T {
    // Kahan summation, smallest terms first
    let mut sum = T::zero();
    let mut comp = T::zero();
    for j in (1..=terms).rev() {
        let y = T::one() / from_usize::<T>(j).sqrt() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `C = lim_{s→∞} (2√s − Σ_{j≤s} j^{-1/2})`, accelerated by two Euler–Maclaurin
/// tail terms. Needs at least 10 terms.
pub fn olshanii_constant<T: Real>(terms: usize) -> Result<T> {
    if terms < 10 {
        return Err(Error::InvalidInput(format!("olshanii_constant needs >= 10 terms, got {terms}")));
    }
    let s = from_usize::<T>(terms);
    let tail = s.sqrt().recip() / lit(2.0) - s.powf(lit(-1.5)) / lit(24.0);
    Ok(olshanii_partial_sum::<T>(terms) + tail)
}

/// Continuum counterpart `∫₀¹ ds/√s = 2`.
pub fn olshanii_continuum<T: Real>() -> T {
    lit(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confinement::{build_modes, channels_from_k0, ConfinementModel, HardWallVariant};
    use approx::assert_relative_eq;

    fn ctx_modes() -> ModeSet<f64> {
        build_modes(&ConfinementModel::parabolic(1.0).unwrap(), 6).unwrap()
    }

    #[test]
    fn p00_and_p11_closed_forms() {
        let m = ctx_modes();
        for &f in &[0.05, 0.3, 0.7, 0.99] {
            let ch = channels_from_k0(&m, f * m.q0() * (2f64).sqrt()).unwrap();
            let ctx = CouplingContext::new(&m, ch).unwrap();
            let k = ctx.k();
            let pc = (m.eps[1] - k * k).sqrt();
            assert_relative_eq!(ctx.p_c, pc, max_relative = 1e-12);
            assert!((ctx.p_matrix(0, 0).unwrap() - pc).abs() < 1e-10);
            assert!((ctx.p_matrix(1, 1).unwrap() + pc.powi(3) / (3.0 * k * k)).abs() < 1e-10);
            assert_eq!(ctx.p_matrix(0, 2).unwrap(), ctx.p_matrix(2, 0).unwrap());
            assert!(matches!(ctx.p_matrix(0, 1), Err(Error::ParityViolation { l: 0, s: 1 })));
        }
    }

    #[test]
    fn p_matrix_series_matches_quadrature() {
        let m = ctx_modes();
        let ch = channels_from_k0(&m, 0.4).unwrap();
        let ctx = CouplingContext::new(&m, ch).unwrap();
        let k = ctx.k();
        for l in 0..=8 {
            for s in (l % 2..=8).step_by(2) {
                let q = ctx.p_matrix(l, s).unwrap();
                let c = p_matrix_continued(l, s, Complex::new(k * k, 0.0), Complex::new(ctx.p_c, 0.0)).unwrap();
                assert!((q - c.re).abs() < 1e-10 * (1.0 + q.abs()), "P_{l}{s}: {q} vs {c}");
                assert_eq!(c.im, 0.0);
            }
        }
    }

    #[test]
    fn diagonal_entries_finite_up_to_l10() {
        let m = ctx_modes();
        let ctx = CouplingContext::new(&m, channels_from_k0(&m, 0.9).unwrap()).unwrap();
        for l in 0..=10 {
            assert!(ctx.p_matrix(l, l).unwrap().is_finite());
        }
    }

    #[test]
    fn alpha_approximate_forms() {
        let m = build_modes(&ConfinementModel::hard_wall(1.0, HardWallVariant::Cosine).unwrap(), 4).unwrap();
        let ctx = CouplingContext::new(&m, channels_from_k0(&m, 0.5).unwrap()).unwrap();
        let sqpi_r = std::f64::consts::PI.sqrt() * m.r_u;
        assert_relative_eq!(ctx.alpha(0, 0).unwrap(), m.norm[0] / sqpi_r, max_relative = 1e-14);
        let expect = m.norm[0] * (ctx.ch.k0() / ctx.k()) / sqpi_r;
        assert_relative_eq!(ctx.alpha(1, 0).unwrap(), expect, max_relative = 1e-14);
        assert!(ctx.alpha(0, 1).is_err());
    }

    #[test]
    fn alpha_exact_on_bessel_modes_reduces_to_approximation() {
        for variant in [HardWallVariant::ExactRoots, HardWallVariant::Cosine] {
            let m = build_modes(&ConfinementModel::hard_wall(1.0_f64, variant).unwrap(), 4).unwrap();
            let ch = channels_from_k0(&m, 0.6).unwrap();
            let ctx = CouplingContext::new(&m, ch).unwrap();
            let rp = ctx.default_probe_radius();
            let ex = CouplingContext::new(&m, ctx.ch.clone()).unwrap().with_alpha_mode(AlphaMode::Exact { probe_radius: rp });
            for l in 0..4 {
                let (a, b) = (ctx.alpha(l, 0).unwrap(), ex.alpha(l, 0).unwrap());
                assert!((a - b).abs() < 1e-3 * a.abs().max(1e-12), "l={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn delta_c_properties() {
        let m = ctx_modes();
        let ctx = CouplingContext::new(&m, channels_from_k0(&m, 0.3).unwrap()).unwrap();
        let origin = ctx.delta_c((0.0, 0.0), (0.0, 0.0));
        assert!((origin.value + ctx.p_c / (4.0 * std::f64::consts::PI)).abs() < 1e-10);
        assert!(!origin.outside_validity);
        let a = ctx.delta_c((0.05, 0.02), (0.1, -0.03)).value;
        let b = ctx.delta_c((0.1, -0.03), (0.05, 0.02)).value;
        assert!((a - b).abs() < 1e-12);
        let mut prev = origin.value.abs();
        for i in 1..10 {
            let v = ctx.delta_c((0.0, 0.0), (0.0, 0.02 * i as f64)).value.abs();
            assert!(v < prev);
            prev = v;
        }
        assert!(ctx.delta_c((0.3, 0.0), (0.0, 0.0)).outside_validity);
    }

    #[test]
    fn pseudopotential_constant() {
        assert_eq!(olshanii_partial_sum::<f64>(1), 1.0);
        let c = olshanii_constant::<f64>(1_000_000).unwrap();
        assert!((c - 1.4603).abs() < 1e-4);
        assert!((c - 1.460_354_508_809_586_8).abs() < 1e-10);
        assert_eq!(olshanii_continuum::<f64>(), 2.0);
        assert!(olshanii_constant::<f64>(5).is_err());
    }
}
