//! Transverse confinement: axially symmetric mode spectra, the effective
//! width `d_U`, channel decomposition at fixed total momentum, `γ` and `C′`.

use std::path::Path;

use crate::interp::MonotoneCubic;
use crate::scalar::{from_usize, lit};
use crate::specfun::{bessel_j0, bessel_j1, j0_roots, j0_roots_cosine};
use crate::{Error, Real, Result};

/// How hard-wall transverse momenta are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HardWallVariant {
    /// `q_n = (n + 3/4)π/R_U` with `N_n² = π q_n R_U / 2`.
    #[default]
    Cosine,
    /// `q_n = r_{n+1}/R_U` from the zeros of `J_0`, `N_n = 1/|J_1(r_{n+1})|`.
    ExactRoots,
}

#[derive(Debug, Clone)]
pub enum ConfinementModel<T> {
    /// Harmonic confinement with oscillator length `a_perp`; `u(ρ) = ρ²/a_perp⁴`.
    Parabolic { a_perp: T },
    /// Impenetrable cylinder of radius `radius`.
    HardWall { radius: T, variant: HardWallVariant },
    /// Reduced potential `u(ρ)` sampled on `[0, radius]` with a hard wall at
    /// `radius`; offset so that `u(0) = 0`.
    Tabulated { profile: MonotoneCubic<T>, radius: T },
}

impl<T: Real> ConfinementModel<T> {
    pub fn parabolic(a_perp: T) -> Result<Self> {
        if !(a_perp > T::zero()) || !a_perp.is_finite() {
            return Err(Error::InvalidInput(format!("oscillator length must be positive, got {a_perp}")));
        }
        Ok(ConfinementModel::Parabolic { a_perp })
    }

    pub fn hard_wall(radius: T, variant: HardWallVariant) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("wall radius must be positive, got {radius}")));
        }
        Ok(ConfinementModel::HardWall { radius, variant })
    }

    /// Builds a tabulated model from samples `(ρ_i, u_i)`. The outer wall sits
    /// at the last sample.
    pub fn tabulated(rho: Vec<T>, u: Vec<T>) -> Result<Self> {
        if rho.first().is_some_and(|&r| r < T::zero()) {
            return Err(Error::InvalidInput("tabulated confinement needs ρ >= 0".into()));
        }
        let offset = *u.first().ok_or_else(|| Error::InvalidInput("empty confinement table".into()))?;
        let shifted: Vec<T> = u.iter().map(|&v| v - offset).collect();
        let scale = shifted.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if shifted.iter().any(|&v| v < -scale * lit(1e-12)) {
            return Err(Error::InvalidInput(
                "tabulated confinement must have its minimum on the axis (u(ρ) >= u(0))".into(),
            ));
        }
        let profile = MonotoneCubic::new(rho, shifted)?;
        let radius = profile.x_max();
        if !(radius > T::zero()) {
            return Err(Error::InvalidInput("tabulated confinement needs a positive outer radius".into()));
        }
        Ok(ConfinementModel::Tabulated { profile, radius })
    }

    /// Reads a two-column CSV `(ρ, u)` with a header row.
    pub fn tabulated_from_csv(path: &Path) -> Result<Self> {
        let (rho, u) = read_two_columns(path)?;
        Self::tabulated(rho, u)
    }

    /// Same confinement with every length multiplied by `factor`.
    pub fn rescaled(&self, factor: T) -> Result<Self> {
        match self {
            ConfinementModel::Parabolic { a_perp } => Self::parabolic(*a_perp * factor),
            ConfinementModel::HardWall { radius, variant } => Self::hard_wall(*radius * factor, *variant),
            ConfinementModel::Tabulated { profile, .. } => {
                let (rho, u) = profile.samples();
                let f2 = factor * factor;
                Self::tabulated(rho.iter().map(|&r| r * factor).collect(), u.iter().map(|&v| v / f2).collect())
            }
        }
    }

    /// Natural length scale `R_U` (the oscillator length for parabolic models).
    pub fn length_scale(&self) -> T {
        match self {
            ConfinementModel::Parabolic { a_perp } => *a_perp,
            ConfinementModel::HardWall { radius, .. } => *radius,
            ConfinementModel::Tabulated { radius, .. } => *radius,
        }
    }
}

pub(crate) fn read_two_columns<T: Real>(path: &Path) -> Result<(Vec<T>, Vec<T>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::InvalidInput(format!("{}: row {} has fewer than two columns", path.display(), i + 1)));
        }
        let parse = |s: &str| -> Result<T> {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::InvalidInput(format!("{}: row {}: cannot parse {s:?}", path.display(), i + 1)))?;
            Ok(lit(v))
        };
        a.push(parse(&rec[0])?);
        b.push(parse(&rec[1])?);
    }
    Ok((a, b))
}

const SHOOT_STEPS: usize = 4000;

#[derive(Debug, Clone)]
enum Profiles<T> {
    Parabolic { a: T },
    Bessel { radius: T },
    Sampled { h: T, phi: Vec<Vec<T>>, dphi: Vec<Vec<T>> },
}

/// Transverse spectrum `q_n`, `ε_n = q_n²`, on-axis densities `|φ_n(0)|²`,
/// normalizations `N_n = √π R_U |φ_n(0)|` and the effective width `d_U`.
#[derive(Debug, Clone)]
pub struct ModeSet<T> {
    pub q: Vec<T>,
    pub eps: Vec<T>,
    pub phi0sq: Vec<T>,
    pub norm: Vec<T>,
    pub d_u: T,
    pub r_u: T,
    profiles: Profiles<T>,
}

impl<T: Real> ModeSet<T> {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q0(&self) -> T {
        self.q[0]
    }

    /// `ε_n − ε_0` without cancellation for exactly known spectra.
    pub fn gap(&self, n: usize) -> T {
        self.eps[n] - self.eps[0]
    }

    /// Normalized transverse eigenfunction `φ_n(ρ)` with `φ_n(0) > 0`.
    pub fn profile(&self, n: usize, rho: T) -> T {
        let rho = rho.abs();
        match &self.profiles {
            Profiles::Parabolic { a } => {
                let x = rho * rho / (*a * *a);
                laguerre(n, x) * (-x / lit(2.0)).exp() / (T::PI().sqrt() * *a)
            }
            Profiles::Bessel { radius } => {
                if rho > *radius {
                    return T::zero();
                }
                self.phi0sq[n].sqrt() * bessel_j0(self.q[n] * rho)
            }
            Profiles::Sampled { h, phi, dphi } => {
                let last = phi[n].len() - 1;
                let pos = rho / *h;
                if pos >= from_usize(last) {
                    return if pos == from_usize::<T>(last) { phi[n][last] } else { T::zero() };
                }
                let i = pos.floor().to_usize().unwrap_or(0).min(last - 1);
                let s = pos - from_usize(i);
                hermite(phi[n][i], phi[n][i + 1], dphi[n][i] * *h, dphi[n][i + 1] * *h, s)
            }
        }
    }

    /// Constant `C′ = d_U √(q_1² − q_0²)`.
    pub fn cprime(&self) -> T {
        if let Profiles::Parabolic { .. } = self.profiles {
            // d_U √(2ε_0) with d_U = a_⊥, ε_0 = 2/a_⊥²
            return lit(2.0);
        }
        self.d_u * self.gap(1).sqrt()
    }
}

fn laguerre<T: Real>(n: usize, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() - x;
    for k in 1..n {
        let kf = from_usize::<T>(k);
        let next = ((kf + kf + T::one() - x) * cur - kf * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

fn hermite<T: Real>(y0: T, y1: T, m0: T, m1: T, s: T) -> T {
    let s2 = s * s;
    let s3 = s2 * s;
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    (two * s3 - three * s2 + T::one()) * y0
        + (s3 - two * s2 + s) * m0
        + (three * s2 - two * s3) * y1
        + (s3 - s2) * m1
}

/// Builds the lowest `n_max + 1` axially symmetric modes.
pub fn build_modes<T: Real>(model: &ConfinementModel<T>, n_max: usize) -> Result<ModeSet<T>> {
    if n_max < 2 {
        return Err(Error::InvalidInput(format!("need n_max >= 2, got {n_max}")));
    }
    let count = n_max + 1;
    let pi = T::PI();
    match model {
        ConfinementModel::Parabolic { a_perp } => {
            let a = *a_perp;
            let eps0 = lit::<T>(2.0) / (a * a);
            let eps: Vec<T> = (0..count).map(|n| from_usize::<T>(2 * n + 1) * eps0).collect();
            let q = eps.iter().map(|e| e.sqrt()).collect();
            Ok(ModeSet {
                q,
                eps,
                phi0sq: vec![T::one() / (pi * a * a); count],
                norm: vec![T::one(); count],
                d_u: a,
                r_u: a,
                profiles: Profiles::Parabolic { a },
            })
        }
        ConfinementModel::HardWall { radius, variant } => {
            let r = *radius;
            let (q, norm): (Vec<T>, Vec<T>) = match variant {
                HardWallVariant::Cosine => j0_roots_cosine::<T>(count)
                    .into_iter()
                    .map(|z| (z / r, (pi * z / lit(2.0)).sqrt()))
                    .unzip(),
                HardWallVariant::ExactRoots => j0_roots::<T>(count)
                    .into_iter()
                    .map(|z| (z / r, T::one() / bessel_j1(z).abs()))
                    .unzip(),
            };
            let phi0sq: Vec<T> = norm.iter().map(|&nn| nn * nn / (pi * r * r)).collect();
            Ok(ModeSet {
                eps: q.iter().map(|&v| v * v).collect(),
                q,
                d_u: r / norm[0],
                phi0sq,
                norm,
                r_u: r,
                profiles: Profiles::Bessel { radius: r },
            })
        }
        ConfinementModel::Tabulated { profile, radius } => solve_tabulated(profile, *radius, count),
    }
}

struct Shooter<'a, T> {
    u: &'a MonotoneCubic<T>,
    h: T,
}

impl<T: Real> Shooter<'_, T> {
    fn rhs(&self, rho: T, phi: T, dphi: T, eps: T) -> (T, T) {
        let v = eps - self.u.eval(rho);
        if rho == T::zero() {
            // φ'' + φ'/ρ → 2φ''(0) on the axis
            (dphi, -v * phi / lit(2.0))
        } else {
            (dphi, -dphi / rho - v * phi)
        }
    }

    /// Replaces the outward solution beyond the outermost classical turning
    /// point by the inward solution from the wall, where the outward shot
    /// picks up the exponentially growing component.
    fn replace_tail(&self, eps: T, phi: &mut [T], dphi: &mut [T]) {
        let h = self.h;
        let turn = (0..=SHOOT_STEPS).rev().find(|&i| self.u.eval(from_usize::<T>(i) * h) < eps);
        let Some(mut m) = turn else { return };
        if m + 2 >= SHOOT_STEPS {
            return;
        }
        // avoid matching on a near-node of the outward solution
        while m > 1 && phi[m].abs() < T::epsilon().sqrt() * phi[..=m].iter().fold(T::zero(), |a, v| a.max(v.abs())) {
            m -= 1;
        }
        let half: T = lit(0.5);
        let six: T = lit(6.0);
        let (mut p, mut dp) = (T::zero(), -T::one());
        let mut tail = vec![(p, dp); SHOOT_STEPS - m + 1];
        for j in (m..SHOOT_STEPS).rev() {
            let rho = from_usize::<T>(j + 1) * h;
            let g = -h;
            let (k1a, k1b) = self.rhs(rho, p, dp, eps);
            let (k2a, k2b) = self.rhs(rho + half * g, p + half * g * k1a, dp + half * g * k1b, eps);
            let (k3a, k3b) = self.rhs(rho + half * g, p + half * g * k2a, dp + half * g * k2b, eps);
            let (k4a, k4b) = self.rhs(rho + g, p + g * k3a, dp + g * k3b, eps);
            p = p + g / six * (k1a + lit::<T>(2.0) * (k2a + k3a) + k4a);
            dp = dp + g / six * (k1b + lit::<T>(2.0) * (k2b + k3b) + k4b);
            tail[j - m] = (p, dp);
        }
        let scale = phi[m] / tail[0].0;
        for j in m..=SHOOT_STEPS {
            phi[j] = tail[j - m].0 * scale;
            dphi[j] = tail[j - m].1 * scale;
        }
    }

    /// Integrates from the axis with `φ(0) = 1`. Returns the sign-change count
    /// over `(0, R]` and optionally the sampled solution.
    fn shoot(&self, eps: T, record: bool) -> (usize, Option<(Vec<T>, Vec<T>)>) {
        let h = self.h;
        let half: T = lit(0.5);
        let six: T = lit(6.0);
        let (mut phi, mut dphi) = (T::one(), T::zero());
        let mut nodes = 0;
        let mut rec = record.then(|| {
            let mut a = Vec::with_capacity(SHOOT_STEPS + 1);
            let mut b = Vec::with_capacity(SHOOT_STEPS + 1);
            a.push(phi);
            b.push(dphi);
            (a, b)
        });
        for i in 0..SHOOT_STEPS {
            let rho = from_usize::<T>(i) * h;
            let (k1a, k1b) = self.rhs(rho, phi, dphi, eps);
            let (k2a, k2b) = self.rhs(rho + half * h, phi + half * h * k1a, dphi + half * h * k1b, eps);
            let (k3a, k3b) = self.rhs(rho + half * h, phi + half * h * k2a, dphi + half * h * k2b, eps);
            let (k4a, k4b) = self.rhs(rho + h, phi + h * k3a, dphi + h * k3b, eps);
            let next = phi + h / six * (k1a + lit::<T>(2.0) * (k2a + k3a) + k4a);
            dphi = dphi + h / six * (k1b + lit::<T>(2.0) * (k2b + k3b) + k4b);
            if (next < T::zero()) != (phi < T::zero()) && next != T::zero() {
                nodes += 1;
            }
            phi = next;
            if let Some((a, b)) = rec.as_mut() {
                a.push(phi);
                b.push(dphi);
            }
        }
        (nodes, rec)
    }
}

fn solve_tabulated<T: Real>(u: &MonotoneCubic<T>, radius: T, count: usize) -> Result<ModeSet<T>> {
    let pi = T::PI();
    let sh = Shooter { u, h: radius / from_usize(SHOOT_STEPS) };
    let (_, samples) = u.samples();
    let umax = samples.iter().fold(T::zero(), |m, &v| m.max(v));
    let mut eps = Vec::with_capacity(count);
    let mut phis = Vec::with_capacity(count);
    let mut dphis = Vec::with_capacity(count);
    let mut lo = T::zero();
    for n in 0..count {
        let free = (from_usize::<T>(n + 1) * pi / radius).powi(2);
        let mut hi = umax + free * lit(2.0);
        let mut grow = 0;
        while sh.shoot(hi, false).0 <= n {
            hi = hi * lit(2.0);
            grow += 1;
            if grow > 60 {
                return Err(Error::EigenNonConvergence { mode: n, reason: "no upper energy bracket".into() });
            }
        }
        let tol = T::tol(1e-12);
        let mut iters = 0;
        while hi - lo > tol * hi {
            let mid = (lo + hi) * lit(0.5);
            if sh.shoot(mid, false).0 <= n {
                lo = mid;
            } else {
                hi = mid;
            }
            iters += 1;
            if iters > 200 {
                return Err(Error::EigenNonConvergence { mode: n, reason: "energy bisection stalled".into() });
            }
        }
        let e = (lo + hi) * lit(0.5);
        let (nodes, rec) = sh.shoot(e, true);
        if nodes != n && nodes != n + 1 {
            return Err(Error::EigenNonConvergence {
                mode: n,
                reason: format!("expected {n} nodes, found {nodes}"),
            });
        }
        let (mut phi, mut dphi) = rec.expect("recorded shot");
        sh.replace_tail(e, &mut phi, &mut dphi);
        // ∫ 2πρ φ² dρ by Simpson on the uniform grid (SHOOT_STEPS is even)
        let h = sh.h;
        let mut acc = T::zero();
        for (i, &p) in phi.iter().enumerate() {
            let w = if i == 0 || i == SHOOT_STEPS {
                T::one()
            } else if i % 2 == 1 {
                lit(4.0)
            } else {
                lit(2.0)
            };
            acc = acc + w * from_usize::<T>(i) * h * p * p;
        }
        let norm2 = lit::<T>(2.0) * pi * acc * h / lit(3.0);
        let scale = T::one() / norm2.sqrt();
        phi.iter_mut().for_each(|v| *v = *v * scale);
        dphi.iter_mut().for_each(|v| *v = *v * scale);
        eps.push(e);
        phis.push(phi);
        dphis.push(dphi);
        lo = e;
    }
    let phi0sq: Vec<T> = phis.iter().map(|p| p[0] * p[0]).collect();
    let norm: Vec<T> = phi0sq.iter().map(|&p| pi.sqrt() * radius * p.sqrt()).collect();
    Ok(ModeSet {
        q: eps.iter().map(|e: &T| e.sqrt()).collect(),
        eps,
        d_u: T::one() / (pi * phi0sq[0]).sqrt(),
        phi0sq,
        norm,
        r_u: radius,
        profiles: Profiles::Sampled { h: sh.h, phi: phis, dphi: dphis },
    })
}

/// Longitudinal momenta at fixed total momentum `k`.
///
/// `k_n` holds `√(k² − q_n²)` for open channels `n ≤ n_e` and the magnitude
/// `√(q_n² − k²)` of the positive-imaginary momentum for closed ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDecomposition<T> {
    pub k: T,
    pub n_e: usize,
    pub k_n: Vec<T>,
}

impl<T: Real> ChannelDecomposition<T> {
    pub fn k0(&self) -> T {
        self.k_n[0]
    }

    pub fn is_open(&self, n: usize) -> bool {
        n <= self.n_e
    }

    /// Signed square `k_n²` (negative for closed channels).
    pub fn k_n_sq(&self, n: usize) -> T {
        let v = self.k_n[n] * self.k_n[n];
        if self.is_open(n) {
            v
        } else {
            -v
        }
    }
}

fn threshold_guard<T: Real>(modes: &ModeSet<T>, k: T) -> Result<()> {
    let q0 = modes.q0();
    let band = q0 * lit(1e-9);
    for (n, &qn) in modes.q.iter().enumerate() {
        if (k - qn).abs() < band {
            return Err(Error::AtThreshold { k: k.as_f64(), n, qn: qn.as_f64() });
        }
    }
    Ok(())
}

/// Decomposes total momentum `k` into channels.
pub fn channels<T: Real>(modes: &ModeSet<T>, k: T) -> Result<ChannelDecomposition<T>> {
    let q0 = modes.q0();
    threshold_guard(modes, k)?;
    if !(k > q0) {
        return Err(Error::BelowThreshold { k: k.as_f64(), q0: q0.as_f64() });
    }
    let k0 = ((k - q0) * (k + q0)).sqrt();
    build_channels(modes, k, k0)
}

/// Same as [`channels`] but parametrized by the ground-channel momentum
/// `k0 > 0`, which avoids cancellation in `k² − q_0²` close to threshold.
pub fn channels_from_k0<T: Real>(modes: &ModeSet<T>, k0: T) -> Result<ChannelDecomposition<T>> {
    let q0 = modes.q0();
    let k = (q0 * q0 + k0 * k0).sqrt();
    if !(k0 > T::zero()) {
        return Err(Error::BelowThreshold { k: k.as_f64(), q0: q0.as_f64() });
    }
    threshold_guard(modes, k)?;
    build_channels(modes, k, k0)
}

fn build_channels<T: Real>(modes: &ModeSet<T>, k: T, k0: T) -> Result<ChannelDecomposition<T>> {
    let n_e = modes.q.iter().take_while(|&&qn| qn < k).count() - 1;
    if n_e + 1 >= modes.len() {
        return Err(Error::NotEnoughModes { needed: n_e + 1, available: modes.len() });
    }
    let k0sq = k0 * k0;
    let k_n = (0..modes.len())
        .map(|n| if n == 0 { k0 } else { (k0sq - modes.gap(n)).abs().sqrt() })
        .collect();
    Ok(ChannelDecomposition { k, n_e, k_n })
}

/// `γ = Σ_{n ≤ n_E} 2π|φ_n(0)|² / (k k_n)`.
pub fn gamma_factor<T: Real>(modes: &ModeSet<T>, ch: &ChannelDecomposition<T>) -> Result<T> {
    let two_pi = T::PI() * lit(2.0);
    let mut g = T::zero();
    for n in 0..=ch.n_e {
        if !(ch.k_n[n] > T::zero()) {
            return Err(Error::AtThreshold { k: ch.k.as_f64(), n, qn: modes.q[n].as_f64() });
        }
        g = g + two_pi * modes.phi0sq[n] / (ch.k * ch.k_n[n]);
    }
    Ok(g)
}

/// `C′ = d_U √(q_1² − q_0²)`.
pub fn cprime<T: Real>(modes: &ModeSet<T>) -> T {
    modes.cprime()
}
