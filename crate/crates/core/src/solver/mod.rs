//! Partial-wave T-matrix of the confined problem, effective 1D amplitudes,
//! unitarity diagnostics, confinement-induced resonances and bound states.

mod bound;
mod levels;
mod pole;

pub use bound::{bound_state, bound_wavefunction, strong_confinement_root, BoundState, WavefunctionSamples};
pub use levels::{longitudinal_levels, Parity};
pub use pole::{find_pole, PoleResult};

use num_complex::Complex;

use crate::confinement::{channels_from_k0, ModeSet};
use crate::coupling::{p_matrix_quadrature, CouplingContext};
use crate::freescatt::PhaseShifts;
use crate::linalg::{condition_number, CMatrix, Lu};
use crate::scalar::{from_usize, lit};
use crate::specfun::legendre_p_real;
use crate::{Error, Real, Result};

/// Angular-momentum parity block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Even,
    Odd,
}

impl Sector {
    pub fn contains(self, l: usize) -> bool {
        match self {
            Sector::Even => l % 2 == 0,
            Sector::Odd => l % 2 == 1,
        }
    }
}

/// Default angular-momentum cutoff.
pub const DEFAULT_L_MAX: usize = 6;

/// Off-circle tolerance on `|f + ½| − ½` for the phase parametrization.
pub const CIRCLE_TOL: f64 = 1e-6;

/// Pseudopotential constant `C = −ζ(1/2)`.
pub const PSEUDOPOTENTIAL_C: f64 = 1.460_354_508_809_586_8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    /// Zero the off-diagonal couplings `P_ls`, `s ≠ l`.
    pub decoupled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockInfo<T> {
    /// Angular momenta kept in the linear system.
    pub active: Vec<usize>,
    /// 1-norm condition number of the block, `None` when the block is empty.
    pub condition: Option<T>,
}

/// Solution of the T-matrix equation at fixed total momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct TSolution<T> {
    pub k: T,
    pub l_max: usize,
    /// `t[l] = T_l`; zero for partial waves with `δ_l = 0`.
    pub t: Vec<Complex<T>>,
    pub even: BlockInfo<T>,
    pub odd: BlockInfo<T>,
    pub b: Vec<Complex<T>>,
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn cre<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Assembles and solves `(iγk − k cot δ_l) T_l = α_l + Σ_{s[l]} (2s+1) P_ls T_s`
/// separately in the even and odd blocks.
pub fn solve_t<T: Real>(
    ctx: &CouplingContext<'_, T>,
    shifts: &dyn PhaseShifts<T>,
    b: &[Complex<T>],
    l_max: usize,
    opts: SolveOptions,
) -> Result<TSolution<T>> {
    let n_open = ctx.ch.n_e + 1;
    if b.len() != n_open {
        return Err(Error::InvalidInput(format!("{} incoming coefficients for {n_open} open channels", b.len())));
    }
    let k = ctx.k();
    let igk = Complex::new(T::zero(), ctx.gamma * k);
    let mut kcot = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        kcot.push(shifts.k_cot_delta(l, k)?);
    }
    let mut source = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        let mut acc = czero();
        for (n, &bn) in b.iter().enumerate() {
            acc = acc + bn * ctx.alpha(l, n)?;
        }
        source.push(acc);
    }
    let mut t = vec![czero(); l_max + 1];
    let mut blocks = Vec::with_capacity(2);
    for sector in [Sector::Even, Sector::Odd] {
        let active: Vec<usize> = (0..=l_max).filter(|&l| sector.contains(l) && kcot[l].is_some()).collect();
        if active.is_empty() {
            blocks.push(BlockInfo { active, condition: None });
            continue;
        }
        let m = active.len();
        let mut a = CMatrix::zeros(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, &l) in active.iter().enumerate() {
            let kc = kcot[l].expect("active rows have phase shifts");
            for (j, &s) in active.iter().enumerate() {
                let two_s1 = from_usize::<T>(2 * s + 1);
                if i == j {
                    a[(i, j)] = igk - cre(kc + two_s1 * ctx.p_matrix(l, l)?);
                } else if !opts.decoupled {
                    a[(i, j)] = cre(-two_s1 * ctx.p_matrix(l, s)?);
                }
            }
            rhs.push(source[l]);
        }
        let lu = Lu::new(&a)?;
        let cond = condition_number(&a, &lu);
        let x = lu.solve(&rhs);
        for (i, &l) in active.iter().enumerate() {
            t[l] = x[i];
        }
        blocks.push(BlockInfo { active, condition: Some(cond) });
    }
    let odd = blocks.pop().expect("odd block");
    let even = blocks.pop().expect("even block");
    Ok(TSolution { k, l_max, t, even, odd, b: b.to_vec() })
}

/// Effective 1D amplitudes in every open channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitudes<T> {
    pub f_plus: Vec<Complex<T>>,
    pub f_minus: Vec<Complex<T>>,
    pub f_g: Vec<Complex<T>>,
    pub f_u: Vec<Complex<T>>,
    pub f0g: Complex<T>,
    pub f0u: Complex<T>,
    /// `δ_g`, `δ_u` when the ground-channel sector amplitude lies on the
    /// unitarity circle.
    pub delta_g: Option<T>,
    pub delta_u: Option<T>,
    /// `||1 + 2f| − 1|` for the even and odd ground-channel sectors.
    pub circle_distance_g: T,
    pub circle_distance_u: T,
}

/// `f_ng = Σ_{l even} 4π(2l+1) α_ln T_l / (2ik_n)`, `f_nu` likewise over odd
/// `l`, and `f_n^± = f_ng ± f_nu`.
pub fn amplitudes<T: Real>(sol: &TSolution<T>, ctx: &CouplingContext<'_, T>) -> Result<Amplitudes<T>> {
    let four_pi = T::PI() * lit(4.0);
    let n_open = ctx.ch.n_e + 1;
    let mut f_g = vec![czero(); n_open];
    let mut f_u = vec![czero(); n_open];
    for n in 0..n_open {
        let denom = Complex::new(T::zero(), ctx.ch.k_n[n] + ctx.ch.k_n[n]);
        for (l, &tl) in sol.t.iter().enumerate() {
            if tl == czero() {
                continue;
            }
            let term = tl * (four_pi * from_usize::<T>(2 * l + 1) * ctx.alpha(l, n)?) / denom;
            if l % 2 == 0 {
                f_g[n] = f_g[n] + term;
            } else {
                f_u[n] = f_u[n] + term;
            }
        }
    }
    let f_plus = f_g.iter().zip(&f_u).map(|(g, u)| g + u).collect();
    let f_minus = f_g.iter().zip(&f_u).map(|(g, u)| g - u).collect();
    let (f0g, f0u) = (f_g[0], f_u[0]);
    let pg = phase_params(f0g);
    let pu = phase_params(f0u);
    Ok(Amplitudes {
        f_plus,
        f_minus,
        f_g,
        f_u,
        f0g,
        f0u,
        delta_g: pg.delta,
        delta_u: pu.delta,
        circle_distance_g: pg.distance,
        circle_distance_u: pu.distance,
    })
}

/// `δ` with `f = −1/(1 + i cot δ)`, i.e. `1 + 2f = e^{2iδ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams<T> {
    pub delta: Option<T>,
    /// `||1 + 2f| − 1|`, twice the distance of `f` from the unitarity circle.
    pub distance: T,
}

pub fn phase_params<T: Real>(f: Complex<T>) -> PhaseParams<T> {
    let w = cre(T::one()) + f * lit::<T>(2.0);
    let distance = (w.norm() - T::one()).abs();
    let delta = if distance <= lit::<T>(2.0 * CIRCLE_TOL) {
        let mut d = w.arg() / lit(2.0);
        if d <= -T::FRAC_PI_2() {
            d = d + T::PI();
        }
        Some(d)
    } else {
        None
    };
    PhaseParams { delta, distance }
}

/// Probability-current bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationResidual<T> {
    /// `|Σ_n (|b_n + f_n^+|² + |f_n^−|² − |b_n|²) k_n| / Σ_n |b_n|² k_n`.
    pub total: T,
    /// `Re f + |f|²` for the ground-channel even and odd sectors.
    pub sector_g: T,
    pub sector_u: T,
}

pub fn conservation_residual<T: Real>(
    amp: &Amplitudes<T>,
    k_n: &[T],
    b: &[Complex<T>],
) -> ConservationResidual<T> {
    let mut num = T::zero();
    let mut den = T::zero();
    for (n, bn) in b.iter().enumerate() {
        let kn = k_n[n];
        num = num + ((bn + amp.f_plus[n]).norm_sqr() + amp.f_minus[n].norm_sqr() - bn.norm_sqr()) * kn;
        den = den + bn.norm_sqr() * kn;
    }
    ConservationResidual {
        total: (num / den).abs(),
        sector_g: amp.f0g.re + amp.f0g.norm_sqr(),
        sector_u: amp.f0u.re + amp.f0u.norm_sqr(),
    }
}

/// Everything computed at one longitudinal momentum in the single-mode regime.
#[derive(Debug, Clone)]
pub struct SingleModePoint<T> {
    pub k0: T,
    pub k: T,
    pub solution: TSolution<T>,
    pub amplitudes: Amplitudes<T>,
    pub residual: ConservationResidual<T>,
    /// Largest change of `f_0^±` when `l_max` is raised by two, if checked.
    pub lmax_change: Option<T>,
    pub warnings: Vec<String>,
}

/// Solves the single-mode problem at ground-channel momentum `k0` with
/// `b_0 = 1`, and re-solves at `l_max + 2` to monitor convergence when the
/// phase-shift source allows it.
pub fn single_mode_point<T: Real>(
    modes: &ModeSet<T>,
    shifts: &dyn PhaseShifts<T>,
    k0: T,
    l_max: usize,
) -> Result<SingleModePoint<T>> {
    let ch = channels_from_k0(modes, k0)?;
    if ch.n_e != 0 {
        return Err(Error::InvalidInput(format!("k0 = {k0} is above the first excited threshold")));
    }
    let ctx = CouplingContext::new(modes, ch)?;
    let b = [cre(T::one())];
    let solution = solve_t(&ctx, shifts, &b, l_max, SolveOptions::default())?;
    let amplitudes = amplitudes(&solution, &ctx)?;
    let residual = conservation_residual(&amplitudes, &ctx.ch.k_n, &b);
    let mut warnings = Vec::new();
    let mut lmax_change = None;
    if shifts.l_max().is_none_or(|m| m >= l_max + 2) {
        let wider = solve_t(&ctx, shifts, &b, l_max + 2, SolveOptions::default())?;
        let amp2 = amplitudes_of(&wider, &ctx)?;
        let change = (amp2.f_plus[0] - amplitudes.f_plus[0])
            .norm()
            .max((amp2.f_minus[0] - amplitudes.f_minus[0]).norm());
        if change > lit(1e-6) {
            warnings.push(format!("amplitudes moved by {change:e} when l_max was raised to {}", l_max + 2));
        }
        lmax_change = Some(change);
    }
    Ok(SingleModePoint { k0, k: ctx.k(), solution, amplitudes, residual, lmax_change, warnings })
}

fn amplitudes_of<T: Real>(sol: &TSolution<T>, ctx: &CouplingContext<'_, T>) -> Result<Amplitudes<T>> {
    amplitudes(sol, ctx)
}

fn single_mode_k<T: Real>(modes: &ModeSet<T>, k0: T) -> (T, T) {
    let k2 = modes.eps[0] + k0 * k0;
    let p00 = (modes.gap(1) - k0 * k0).sqrt();
    (k2, p00)
}

/// Coefficient `X` of `i k0` in `f_0g ≈ −1/(1 + iX k0)`:
/// `X = −(d_U²/2a)(1 − a P_00)`.
pub fn f0g_coefficient<T: Real>(a: T, modes: &ModeSet<T>, k0: T) -> T {
    let (_, p00) = single_mode_k(modes, k0);
    -(modes.d_u * modes.d_u / (a + a)) * (T::one() - a * p00)
}

/// Closed-form even-sector amplitude from the s-wave alone.
pub fn f0g_closed<T: Real>(a: T, modes: &ModeSet<T>, k0: T) -> Complex<T> {
    if a == T::zero() {
        return czero();
    }
    let (_, p00) = single_mode_k(modes, k0);
    let half_d2 = modes.d_u * modes.d_u / lit(2.0);
    // −a / (a − i (d²/2)(1 − a P_00) k0), finite as a → 0
    -cre(a) / Complex::new(a, -half_d2 * (T::one() - a * p00) * k0)
}

/// Closed-form odd-sector amplitude from the p-wave alone.
pub fn f0u_closed<T: Real>(v_p: T, modes: &ModeSet<T>, k0: T) -> Complex<T> {
    if v_p == T::zero() {
        return czero();
    }
    let (k2, p00) = single_mode_k(modes, k0);
    let k = k2.sqrt();
    let p11 = p_matrix_quadrature(1, 1, k, p00);
    let p1 = legendre_p_real(1, k0 / k);
    let half_d2 = modes.d_u * modes.d_u / lit(2.0);
    let three: T = lit(3.0);
    let vk2 = v_p * k2;
    -cre(three * p1 * p1 * vk2) / Complex::new(vk2, -half_d2 * (T::one() - three * p11 * vk2) * k0)
}

/// Effective 1D coupling `g_1D = (4a/d_U²)/(1 − C′a/d_U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum G1d<T> {
    Finite(T),
    /// `a = d_U/C′`: the coupling diverges.
    Resonance,
}

pub fn g1d<T: Real>(a: T, modes: &ModeSet<T>) -> G1d<T> {
    let d = modes.d_u;
    let den = T::one() - modes.cprime() * a / d;
    if den.abs() <= T::epsilon() * lit(4.0) {
        return G1d::Resonance;
    }
    G1d::Finite(lit::<T>(4.0) * a / (d * d) / den)
}

/// Scattering length of the confinement-induced resonance, `a* = d_U/C′`.
pub fn cir_locate<T: Real>(modes: &ModeSet<T>) -> T {
    modes.d_u / modes.cprime()
}

/// Resonance position against the zero-range pseudopotential prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirComparison<T> {
    pub a_star: T,
    pub a_star_pseudo: T,
    pub cprime: T,
    pub c_pseudo: T,
    /// `C′/C − 1`.
    pub fractional_shift: T,
}

pub fn cir_comparison<T: Real>(modes: &ModeSet<T>) -> CirComparison<T> {
    let c: T = lit(PSEUDOPOTENTIAL_C);
    let cp = modes.cprime();
    CirComparison {
        a_star: modes.d_u / cp,
        a_star_pseudo: modes.d_u / c,
        cprime: cp,
        c_pseudo: c,
        fractional_shift: cp / c - T::one(),
    }
}
