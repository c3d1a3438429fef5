use num_complex::Complex;

use super::Sector;
use crate::confinement::ModeSet;
use crate::coupling::p_matrix_continued;
use crate::freescatt::PhaseShifts;
use crate::linalg::{CMatrix, Lu};
use crate::scalar::{from_usize, lit};
use crate::{Error, Real, Result};

const MAX_ITER: usize = 200;

/// Pole of the single-mode T-matrix continued to complex `k0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleResult<T> {
    pub k0: Complex<T>,
    /// Total energy `q_0² + k0²`.
    pub energy: Complex<T>,
    pub iterations: usize,
    /// `|det|` at the returned point, relative to its value at the seed.
    pub residual: T,
}

impl<T: Real> PoleResult<T> {
    /// `x_B = a Im k0` for an s-wave scattering length `a`.
    pub fn x_b(&self, a: T) -> T {
        a * self.k0.im
    }
}

/// Determinant of `k0 · M(k0)` where `M` is the sector block of the T-matrix
/// operator with `k² = q_0² + k0²`, `γk = 2/(d_U² k0)` and
/// `p_c = √(q_1² − q_0² − k0²)` on the principal branch.
fn sector_det<T: Real>(
    modes: &ModeSet<T>,
    shifts: &dyn PhaseShifts<T>,
    active: &[usize],
    k0: Complex<T>,
) -> Result<Complex<T>> {
    let k2 = k0 * k0 + modes.eps[0];
    let p_c = (Complex::new(modes.gap(1), T::zero()) - k0 * k0).sqrt();
    let i2d = Complex::new(T::zero(), lit::<T>(2.0) / (modes.d_u * modes.d_u));
    let m = active.len();
    let mut a = CMatrix::zeros(m);
    for (i, &l) in active.iter().enumerate() {
        let kc = shifts
            .k_cot_delta_complex(l, k2)?
            .ok_or_else(|| Error::NoPole(format!("partial wave {l} does not scatter")))?;
        for (j, &s) in active.iter().enumerate() {
            let p = p_matrix_continued(l, s, k2, p_c)? * from_usize::<T>(2 * s + 1);
            a[(i, j)] = if i == j { i2d - k0 * (kc + p) } else { -k0 * p };
        }
    }
    Ok(match Lu::new(&a) {
        Ok(lu) => lu.determinant(),
        Err(Error::SingularSystem { .. }) => Complex::new(T::zero(), T::zero()),
        Err(e) => return Err(e),
    })
}

/// Secant search for a zero of the sector determinant from `seed`.
/// A converged root must lie in the upper half plane to describe a bound state.
pub fn find_pole<T: Real>(
    modes: &ModeSet<T>,
    shifts: &dyn PhaseShifts<T>,
    sector: Sector,
    seed: Complex<T>,
    l_max: usize,
) -> Result<PoleResult<T>> {
    let mut active = Vec::new();
    for l in (0..=l_max).filter(|&l| sector.contains(l)) {
        let k2 = seed * seed + modes.eps[0];
        if shifts.k_cot_delta_complex(l, k2)?.is_some() {
            active.push(l);
        }
    }
    if active.is_empty() {
        return Err(Error::NoPole(format!("no scattering in the {sector:?} sector up to l = {l_max}")));
    }
    let q0 = modes.q0();
    let tol = q0 * lit(1e-10);
    let h = seed.norm().max(q0 * lit(1e-3)) * lit(1e-4);
    let mut z0 = seed;
    let mut z1 = seed + Complex::new(h, h);
    let mut f0 = sector_det(modes, shifts, &active, z0)?;
    let mut f1 = sector_det(modes, shifts, &active, z1)?;
    let f_seed = f0.norm().max(T::min_positive_value());
    for it in 1..=MAX_ITER {
        let df = f1 - f0;
        if df.norm() == T::zero() {
            if f1.norm() == T::zero() {
                return finish(modes, z1, it, T::zero());
            }
            break;
        }
        let z2 = z1 - f1 * (z1 - z0) / df;
        if !(z2.re.is_finite() && z2.im.is_finite()) {
            break;
        }
        let step = (z2 - z1).norm();
        z0 = z1;
        f0 = f1;
        z1 = z2;
        f1 = sector_det(modes, shifts, &active, z1)?;
        if step < tol {
            return finish(modes, z1, it, f1.norm() / f_seed);
        }
    }
    Err(Error::PoleNonConvergence { iterations: MAX_ITER, re: z1.re.as_f64(), im: z1.im.as_f64() })
}

fn finish<T: Real>(modes: &ModeSet<T>, k0: Complex<T>, iterations: usize, residual: T) -> Result<PoleResult<T>> {
    if k0.im <= T::zero() {
        return Err(Error::PoleNotBound { re: k0.re.as_f64(), im: k0.im.as_f64() });
    }
    Ok(PoleResult { k0, energy: k0 * k0 + modes.eps[0], iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confinement::{build_modes, ConfinementModel};
    use crate::freescatt::LowEnergyPhaseShifts;
    use crate::solver::bound_state;

    fn parabolic() -> ModeSet<f64> {
        build_modes(&ConfinementModel::parabolic(1.0).unwrap(), 4).unwrap()
    }

    #[test]
    fn s_wave_pole_matches_bound_state() {
        let m = parabolic();
        for &a in &[-0.8, -0.2, 0.1, 0.4, 2.0] {
            let bs = bound_state(a / m.d_u, &m).unwrap();
            let src = LowEnergyPhaseShifts::from_a_vp(a, 0.0);
            let seed = Complex::new(0.05, 1.1 * bs.decay);
            let p = find_pole(&m, &src, Sector::Even, seed, 0).unwrap();
            assert!((p.x_b(a) - bs.x_b).abs() < 1e-8, "a={a}: {} vs {}", p.x_b(a), bs.x_b);
            assert!(p.k0.re.abs() < 1e-9);
            assert!((p.energy.re - bs.e_b).abs() < 1e-8);
        }
    }

    #[test]
    fn inert_source_has_no_pole() {
        let m = parabolic();
        let src = LowEnergyPhaseShifts::new(vec![0.0; 3]);
        let err = find_pole(&m, &src, Sector::Even, Complex::new(0.0, 1.0), 2).unwrap_err();
        assert!(matches!(err, Error::NoPole(_)));
    }

    #[test]
    fn d_wave_moves_the_pole() {
        let m = parabolic();
        let a = 0.3;
        let s_only = LowEnergyPhaseShifts::new(vec![a, 0.0, 0.0]);
        let with_d = LowEnergyPhaseShifts::new(vec![a, 0.0, 0.02]);
        let seed = Complex::new(0.0, 3.0);
        let p0 = find_pole(&m, &s_only, Sector::Even, seed, 2).unwrap();
        let p2 = find_pole(&m, &with_d, Sector::Even, seed, 2).unwrap();
        assert!((p0.k0 - p2.k0).norm() > 1e-6);
        assert!(p2.k0.im > 0.0);
    }

    #[test]
    fn needs_continuation() {
        let m = parabolic();
        let pot = crate::freescatt::RadialPotential::hard_sphere(0.1).unwrap();
        let src = crate::freescatt::PotentialPhaseShifts::new(pot);
        let err = find_pole(&m, &src, Sector::Even, Complex::new(0.0, 1.0), 0).unwrap_err();
        assert!(matches!(err, Error::PhaseShiftUnavailable { .. }));
    }
}
