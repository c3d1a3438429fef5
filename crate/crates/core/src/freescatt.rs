//! Free-space partial waves: radial Numerov integration, phase shifts
//! `δ_l(k)`, the scattering length `a` and the scattering volume `V_p`.

use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;

use crate::interp::MonotoneCubic;
use crate::scalar::{from_usize, lit};
use crate::specfun::{sph_bessel_j, sph_bessel_j_deriv, sph_bessel_n, sph_bessel_n_deriv};
use crate::{Error, Real, Result};

/// Spherically symmetric reduced potential `v(r) = 2μV/ħ²`.
#[derive(Debug, Clone)]
pub enum RadialPotential<T> {
    /// `v = v0` for `r < radius`, zero outside. `v0 < 0` is attractive.
    SquareWell { v0: T, radius: T },
    /// Impenetrable sphere.
    HardSphere { radius: T },
    /// `v = depth / cosh²(r/width)`.
    Sech2 { depth: T, width: T },
    /// Sampled `v(r)`, monotone-cubic interpolated, zero beyond the last sample.
    Tabulated { profile: MonotoneCubic<T> },
}

/// Result of a zero-energy extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated<T> {
    pub value: T,
    /// Set when the value is so large that a threshold resonance is likely
    /// and the extrapolation cannot be trusted.
    pub resonance_warning: bool,
}

const MAX_STEPS: usize = 1 << 23;

impl<T: Real> RadialPotential<T> {
    pub fn square_well(v0: T, radius: T) -> Result<Self> {
        check_positive("well radius", radius)?;
        if !v0.is_finite() {
            return Err(Error::InvalidInput("well depth must be finite".into()));
        }
        Ok(RadialPotential::SquareWell { v0, radius })
    }

    pub fn hard_sphere(radius: T) -> Result<Self> {
        check_positive("sphere radius", radius)?;
        Ok(RadialPotential::HardSphere { radius })
    }

    pub fn sech2(depth: T, width: T) -> Result<Self> {
        check_positive("sech² width", width)?;
        if !depth.is_finite() {
            return Err(Error::InvalidInput("sech² depth must be finite".into()));
        }
        Ok(RadialPotential::Sech2 { depth, width })
    }

    pub fn tabulated(r: Vec<T>, v: Vec<T>) -> Result<Self> {
        if r.first().is_some_and(|&x| x < T::zero()) {
            return Err(Error::InvalidInput("tabulated potential needs r >= 0".into()));
        }
        let profile = MonotoneCubic::new(r, v)?;
        check_positive("tabulated potential range", profile.x_max())?;
        Ok(RadialPotential::Tabulated { profile })
    }

    /// Reads a two-column CSV `(r, v)` with a header row.
    pub fn tabulated_from_csv(path: &Path) -> Result<Self> {
        let (r, v) = crate::confinement::read_two_columns(path)?;
        Self::tabulated(r, v)
    }

    /// Effective range `R_V`.
    pub fn range(&self) -> T {
        match self {
            RadialPotential::SquareWell { radius, .. } | RadialPotential::HardSphere { radius } => *radius,
            RadialPotential::Sech2 { width, .. } => *width,
            RadialPotential::Tabulated { profile } => profile.x_max(),
        }
    }

    /// True when the potential vanishes identically.
    pub fn is_null(&self) -> bool {
        match self {
            RadialPotential::SquareWell { v0, .. } => *v0 == T::zero(),
            RadialPotential::HardSphere { .. } => false,
            RadialPotential::Sech2 { depth, .. } => *depth == T::zero(),
            RadialPotential::Tabulated { profile } => profile.samples().1.iter().all(|v| *v == T::zero()),
        }
    }

    /// `v(r)`.
    pub fn value(&self, r: T) -> T {
        match self {
            RadialPotential::SquareWell { v0, radius } => {
                if r < *radius {
                    *v0
                } else {
                    T::zero()
                }
            }
            RadialPotential::HardSphere { radius } => {
                if r < *radius {
                    T::infinity()
                } else {
                    T::zero()
                }
            }
            RadialPotential::Sech2 { depth, width } => {
                // 4d e^{-2x}/(1 + e^{-2x})², safe for large x
                let e = (-(r / *width).abs() * lit(2.0)).exp();
                *depth * lit(4.0) * e / ((T::one() + e) * (T::one() + e))
            }
            RadialPotential::Tabulated { profile } => {
                if r > profile.x_max() {
                    T::zero()
                } else {
                    profile.eval(r)
                }
            }
        }
    }

    // Potential seen by the interior integration; the square well is continued
    // past its edge so the matching point can sit exactly on the discontinuity.
    fn interior(&self, r: T) -> T {
        match self {
            RadialPotential::SquareWell { v0, .. } => *v0,
            _ => self.value(r),
        }
    }

    fn max_abs(&self) -> T {
        match self {
            RadialPotential::SquareWell { v0, .. } => v0.abs(),
            RadialPotential::HardSphere { .. } => T::infinity(),
            RadialPotential::Sech2 { depth, .. } => depth.abs(),
            RadialPotential::Tabulated { profile } => profile.samples().1.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        }
    }

    /// Smallest radius beyond which `|v| < 1e-12 |v|_max`.
    pub fn matching_radius(&self) -> Result<T> {
        let rv = self.range();
        let rm = match self {
            RadialPotential::SquareWell { radius, .. } | RadialPotential::HardSphere { radius } => *radius,
            RadialPotential::Sech2 { width, .. } => *width * lit::<T>(1e6).acosh(),
            RadialPotential::Tabulated { profile } => {
                let (r, v) = profile.samples();
                let cut = self.max_abs() * lit(1e-12);
                match v.iter().rposition(|x| x.abs() >= cut) {
                    Some(i) if i + 1 < r.len() => r[i + 1],
                    _ => profile.x_max(),
                }
            }
        };
        if rm > rv * lit(100.0) {
            return Err(Error::RadialNonConvergence {
                l: 0,
                k: f64::NAN,
                reason: format!("matching radius {rm} exceeds 100 R_V"),
            });
        }
        Ok(rm)
    }
}

fn check_positive<T: Real>(what: &str, x: T) -> Result<()> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("{what} must be positive and finite, got {x}")));
    }
    Ok(())
}

// Maps an angle into (-π/2, π/2].
fn principal<T: Real>(d: T) -> T {
    let pi = T::PI();
    let half = T::FRAC_PI_2();
    let mut x = d - (d / pi).round() * pi;
    if x > half {
        x = x - pi;
    }
    if x <= -half {
        x = x + pi;
    }
    x
}

/// Phase shift `δ_l(k)` in `(-π/2, π/2]`.
pub fn solve_radial<T: Real>(pot: &RadialPotential<T>, l: usize, k: T) -> Result<T> {
    if !(k > T::zero()) || !k.is_finite() {
        return Err(Error::InvalidInput(format!("momentum must be positive, got {k}")));
    }
    if k * pot.range() >= lit(50.0) {
        return Err(Error::InvalidInput(format!(
            "k R_V = {} is outside the low-energy regime (< 50)",
            k * pot.range()
        )));
    }
    if pot.is_null() {
        return Ok(T::zero());
    }
    if let RadialPotential::HardSphere { radius } = pot {
        let x = k * *radius;
        let n = sph_bessel_n(l, x)?;
        return Ok(principal((sph_bessel_j(l, x) / n).atan()));
    }
    let rm = pot.matching_radius().map_err(|e| match e {
        Error::RadialNonConvergence { reason, .. } => Error::RadialNonConvergence { l, k: k.as_f64(), reason },
        other => other,
    })?;
    let scale = (pot.max_abs() + k * k).sqrt();
    let n0 = (rm * scale * lit(200.0)).ceil().to_usize().unwrap_or(MAX_STEPS).max(2000);
    // 1e-9 absolute, tightened to the natural size (k r_m)^{2l+1} of small phases
    let natural = (k * rm).powi(2 * l as i32 + 1).min(T::one());
    let tol = T::tol(1e-9) * natural.max(T::min_positive_value());
    let mut n = n0;
    let mut prev = numerov_delta(pot, l, k, rm, n)?;
    loop {
        n *= 2;
        if n > MAX_STEPS {
            return Err(Error::RadialNonConvergence {
                l,
                k: k.as_f64(),
                reason: format!("step halving did not settle below 1e-9 within {MAX_STEPS} steps"),
            });
        }
        let cur = numerov_delta(pot, l, k, rm, n)?;
        let diff = principal(cur - prev).abs();
        if diff <= tol || diff <= T::tol(1e-9) * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
}

fn numerov_delta<T: Real>(pot: &RadialPotential<T>, l: usize, k: T, rm: T, n: usize) -> Result<T> {
    let h = rm / from_usize(n);
    let c = h * h / lit(12.0);
    let ll = from_usize::<T>(l * (l + 1));
    let k2 = k * k;
    let f = |i: usize| -> T {
        let r = from_usize::<T>(i) * h;
        if i == 0 {
            pot.interior(r) - k2
        } else {
            pot.interior(r) + ll / (r * r) - k2
        }
    };
    let v0 = pot.interior(T::zero());
    let series = |i: usize| -> T {
        let r = from_usize::<T>(i) * h;
        let lead = (from_usize::<T>(i) / from_usize::<T>(l + 1)).powi(l as i32 + 1);
        lead * (T::one() + (v0 - k2) * r * r / from_usize::<T>(2 * (2 * l + 3)))
    };
    let start = l;
    let mut u_prev = if l == 0 { T::zero() } else { series(start) };
    let mut u_cur = series(start + 1);
    let mut w_prev = (T::one() - c * f(start)) * u_prev;
    let mut w_cur = (T::one() - c * f(start + 1)) * u_cur;
    let big = T::max_value().sqrt().sqrt();
    let twelve: T = lit(12.0);
    let mut f_nm1 = f(start);
    for i in start + 1..=n {
        let fi = f(i);
        let w_next = w_cur + w_cur - w_prev + twelve * c * fi * u_cur;
        let f_next = f(i + 1);
        let u_next = w_next / (T::one() - c * f_next);
        if i == n {
            // u_cur = u_N, u_prev = u_{N-1}, u_next = u_{N+1}
            let six: T = lit(6.0);
            let dun = (u_next * (T::one() - h * h * f_next / six) - u_prev * (T::one() - h * h * f_nm1 / six))
                / (h + h);
            return Ok(match_phase(l, k, rm, u_cur, dun));
        }
        f_nm1 = fi;
        w_prev = w_cur;
        w_cur = w_next;
        u_prev = u_cur;
        u_cur = u_next;
        if u_cur.abs() > big {
            let s = T::one() / big;
            w_prev = w_prev * s;
            w_cur = w_cur * s;
            u_prev = u_prev * s;
            u_cur = u_cur * s;
        }
    }
    Err(Error::RadialNonConvergence { l, k: k.as_f64(), reason: "grid shorter than the angular start".into() })
}

fn match_phase<T: Real>(l: usize, k: T, r: T, u: T, du: T) -> T {
    let x = k * r;
    let j = sph_bessel_j(l, x);
    let jd = sph_bessel_j_deriv(l, x);
    let (nn, nd) = match (sph_bessel_n(l, x), sph_bessel_n_deriv(l, x)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return T::nan(),
    };
    // F = r j_l(kr), G = r n_l(kr)
    let f = r * j;
    let fd = j + x * jd;
    let g = r * nn;
    let gd = nn + x * nd;
    let num = u * fd - du * f;
    let den = u * gd - du * g;
    principal(num.atan2(den))
}

/// `A_l = −lim_{k→0} tan δ_l / k^{2l+1}` by two-level Richardson extrapolation
/// over `k₁ = 10⁻³/R_V`, `k₁/2`, `k₁/4`.
pub fn low_energy_coefficient<T: Real>(pot: &RadialPotential<T>, l: usize) -> Result<Extrapolated<T>> {
    if pot.is_null() {
        return Ok(Extrapolated { value: T::zero(), resonance_warning: false });
    }
    let rv = pot.range();
    let k1 = lit::<T>(1e-3) / rv;
    let p = 2 * l as i32 + 1;
    let g = |k: T| -> Result<T> { Ok(solve_radial(pot, l, k)?.tan() / k.powi(p)) };
    let (g1, g2, g4) = (g(k1)?, g(k1 / lit(2.0))?, g(k1 / lit(4.0))?);
    let r1a = (lit::<T>(4.0) * g2 - g1) / lit(3.0);
    let r1b = (lit::<T>(4.0) * g4 - g2) / lit(3.0);
    let value = -(lit::<T>(16.0) * r1b - r1a) / lit(15.0);
    let limit = lit::<T>(1e6) * rv.powi(p);
    let resonance_warning = !(value.abs() <= limit);
    if resonance_warning {
        log::warn!("|A_{l}| = {} exceeds 1e6 R_V^{p}: near a threshold resonance, extrapolation unreliable", value.abs());
    }
    Ok(Extrapolated { value, resonance_warning })
}

/// s-wave scattering length `a`.
pub fn scattering_length<T: Real>(pot: &RadialPotential<T>) -> Result<Extrapolated<T>> {
    low_energy_coefficient(pot, 0)
}

/// p-wave scattering volume `V_p`.
pub fn scattering_volume<T: Real>(pot: &RadialPotential<T>) -> Result<Extrapolated<T>> {
    low_energy_coefficient(pot, 1)
}

/// Tabulated, branch-continuous phase shifts with `a` and `V_p` attached.
#[derive(Debug, Clone)]
pub struct PhaseShiftTable<T> {
    pub l_max: usize,
    pub k_grid: Vec<T>,
    /// `delta[l][i]` is `δ_l(k_grid[i])`.
    pub delta: Vec<Vec<T>>,
    pub a: T,
    pub v_p: T,
    pub warnings: Vec<String>,
}

/// Solves all `(l, k)` pairs in parallel and fixes the branch per `l`.
pub fn phase_table<T: Real>(pot: &RadialPotential<T>, l_max: usize, k_grid: &[T]) -> Result<PhaseShiftTable<T>> {
    if k_grid.is_empty() {
        return Err(Error::InvalidInput("empty momentum grid".into()));
    }
    if k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("momentum grid must be strictly ascending".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..=l_max).flat_map(|l| (0..k_grid.len()).map(move |i| (l, i))).collect();
    let raw: Vec<T> = jobs
        .par_iter()
        .map(|&(l, i)| solve_radial(pot, l, k_grid[i]))
        .collect::<Result<Vec<T>>>()?;
    let nk = k_grid.len();
    let pi = T::PI();
    let delta = (0..=l_max)
        .map(|l| {
            let row = &raw[l * nk..(l + 1) * nk];
            let mut out = Vec::with_capacity(nk);
            let mut prev = principal(row[0]);
            out.push(prev);
            for &d in &row[1..] {
                let m = ((prev - d) / pi).round();
                prev = d + m * pi;
                out.push(prev);
            }
            out
        })
        .collect();
    let a = scattering_length(pot)?;
    let v_p = scattering_volume(pot)?;
    let mut warnings = Vec::new();
    if a.resonance_warning {
        warnings.push("scattering length beyond 1e6 R_V: zero-energy s-wave resonance".to_string());
    }
    if v_p.resonance_warning {
        warnings.push("scattering volume beyond 1e6 R_V^3: zero-energy p-wave resonance".to_string());
    }
    Ok(PhaseShiftTable { l_max, k_grid: k_grid.to_vec(), delta, a: a.value, v_p: v_p.value, warnings })
}

impl<T: Real> PhaseShiftTable<T> {
    /// `δ_l(k)`: exact on grid points, linear between them.
    pub fn delta_at(&self, l: usize, k: T) -> Result<T> {
        let unavailable = |reason: &str| Error::PhaseShiftUnavailable { l, k: k.as_f64(), reason: reason.into() };
        if l > self.l_max {
            return Err(unavailable("l above the table's l_max"));
        }
        let g = &self.k_grid;
        let row = &self.delta[l];
        if k < g[0] || k > g[g.len() - 1] {
            return Err(unavailable("momentum outside the tabulated grid"));
        }
        let i = g.partition_point(|&x| x < k);
        if g[i] == k {
            return Ok(row[i]);
        }
        let t = (k - g[i - 1]) / (g[i] - g[i - 1]);
        Ok(row[i - 1] + t * (row[i] - row[i - 1]))
    }

    /// Writes `# wirescatter-v1`, then `l,k,delta` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# wirescatter-v1")?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["l", "k", "delta"])?;
        for l in 0..=self.l_max {
            for (i, k) in self.k_grid.iter().enumerate() {
                c.write_record([l.to_string(), format!("{:.12e}", k), format!("{:.12e}", self.delta[l][i])])?;
            }
        }
        c.flush()?;
        Ok(())
    }

    /// Sidecar carrying the low-energy parameters.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "format": "wirescatter-v1",
            "l_max": self.l_max,
            "scattering_length": self.a.as_f64(),
            "scattering_volume": self.v_p.as_f64(),
            "warnings": self.warnings,
        })
    }
}

/// Source of `k cot δ_l(k)` for the T-matrix.
pub trait PhaseShifts<T: Real>: Sync {
    /// `k cot δ_l(k)` at real total momentum; `None` when `δ_l = 0`
    /// (the partial wave does not scatter and is excluded).
    fn k_cot_delta(&self, l: usize, k: T) -> Result<Option<T>>;

    /// Continuation of `k cot δ_l` to complex `k²`, needed by the pole search.
    fn k_cot_delta_complex(&self, l: usize, k2: Complex<T>) -> Result<Option<Complex<T>>> {
        let _ = k2;
        Err(Error::PhaseShiftUnavailable {
            l,
            k: f64::NAN,
            reason: "this phase-shift source has no analytic continuation".into(),
        })
    }

    /// Highest `l` the source can provide, if bounded.
    fn l_max(&self) -> Option<usize> {
        None
    }
}

fn kcot_from_delta<T: Real>(k: T, d: T) -> Option<T> {
    let s = d.sin();
    if s == T::zero() {
        None
    } else {
        Some(k * d.cos() / s)
    }
}

impl<T: Real> PhaseShifts<T> for PhaseShiftTable<T> {
    fn k_cot_delta(&self, l: usize, k: T) -> Result<Option<T>> {
        Ok(kcot_from_delta(k, self.delta_at(l, k)?))
    }

    fn l_max(&self) -> Option<usize> {
        Some(self.l_max)
    }
}

/// Leading low-energy behaviour `k cot δ_l = −1/(A_l k^{2l})`, with
/// `A_0 = a`, `A_1 = V_p`, ... A zero coefficient switches the wave off.
#[derive(Debug, Clone, PartialEq)]
pub struct LowEnergyPhaseShifts<T> {
    pub coeffs: Vec<T>,
}

impl<T: Real> LowEnergyPhaseShifts<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        LowEnergyPhaseShifts { coeffs }
    }

    /// s-wave and p-wave only.
    pub fn from_a_vp(a: T, v_p: T) -> Self {
        Self::new(vec![a, v_p])
    }

    fn coeff(&self, l: usize) -> T {
        self.coeffs.get(l).copied().unwrap_or(T::zero())
    }
}

impl<T: Real> PhaseShifts<T> for LowEnergyPhaseShifts<T> {
    fn k_cot_delta(&self, l: usize, k: T) -> Result<Option<T>> {
        let c = self.coeff(l);
        if c == T::zero() {
            return Ok(None);
        }
        Ok(Some(-T::one() / (c * (k * k).powi(l as i32))))
    }

    fn k_cot_delta_complex(&self, l: usize, k2: Complex<T>) -> Result<Option<Complex<T>>> {
        let c = self.coeff(l);
        if c == T::zero() {
            return Ok(None);
        }
        Ok(Some(-Complex::new(T::one(), T::zero()) / (k2.powi(l as i32) * c)))
    }
}

/// Phase shifts solved on demand from a potential.
#[derive(Debug, Clone)]
pub struct PotentialPhaseShifts<T> {
    pub potential: RadialPotential<T>,
}

impl<T: Real> PotentialPhaseShifts<T> {
    pub fn new(potential: RadialPotential<T>) -> Self {
        PotentialPhaseShifts { potential }
    }
}

impl<T: Real> PhaseShifts<T> for PotentialPhaseShifts<T> {
    fn k_cot_delta(&self, l: usize, k: T) -> Result<Option<T>> {
        if self.potential.is_null() {
            return Ok(None);
        }
        Ok(kcot_from_delta(k, solve_radial(&self.potential, l, k)?))
    }
}
