//! Small dense complex linear algebra: LU with partial pivoting and
//! eigenvalues of upper Hessenberg matrices (used for polynomial roots).

use num_complex::Complex;

use crate::scalar::from_usize;
use crate::{Error, Real, Result};

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + self[(i, j)] * x[j])
            })
            .collect()
    }

    pub fn norm1(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization `PA = LU`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    swaps: usize,
}

impl<T: Real> Lu<T> {
    /// Factorizes `a`. Fails with [`Error::SingularSystem`] only on an exactly
    /// zero pivot.
    pub fn new(a: &CMatrix<T>) -> Result<Self> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].norm() > lu[(p, k)].norm() {
                    p = i;
                }
            }
            if lu[(p, k)].norm() == T::zero() {
                return Err(Error::SingularSystem { condition: f64::INFINITY });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(p * n + j, k * n + j);
                }
                perm.swap(p, k);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - m * t;
                }
            }
        }
        Ok(Lu { lu, perm, swaps })
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.lu.n;
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }

    pub fn determinant(&self) -> Complex<T> {
        let mut d = Complex::new(T::one(), T::zero());
        for i in 0..self.lu.n {
            d = d * self.lu[(i, i)];
        }
        if self.swaps % 2 == 1 {
            -d
        } else {
            d
        }
    }

    pub fn inverse(&self) -> CMatrix<T> {
        let n = self.lu.n;
        let mut inv = CMatrix::zeros(n);
        let mut e = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex::new(T::zero(), T::zero()));
            e[j] = Complex::new(T::one(), T::zero());
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
pub fn condition_number<T: Real>(a: &CMatrix<T>, lu: &Lu<T>) -> T {
    a.norm1() * lu.inverse().norm1()
}

/// Solves `a x = b`, returning the solution and the 1-norm condition number.
pub fn solve<T: Real>(a: &CMatrix<T>, b: &[Complex<T>]) -> Result<(Vec<Complex<T>>, T)> {
    let lu = Lu::new(a)?;
    let cond = condition_number(a, &lu);
    Ok((lu.solve(b), cond))
}

/// Eigenvalues of an upper Hessenberg matrix by shifted complex QR with
/// Givens rotations and deflation.
pub fn hessenberg_eigenvalues<T: Real>(h: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = h.n;
    let mut a = h.clone();
    let mut eig = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eig);
    }
    let zero = Complex::new(T::zero(), T::zero());
    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let s = a[(lo - 1, lo - 1)].norm() + a[(lo, lo)].norm();
            if a[(lo, lo - 1)].norm() <= eps * s {
                a[(lo, lo - 1)] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig.push(a[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 60 * n {
            return Err(Error::Domain("Hessenberg QR iteration did not converge".into()));
        }
        let mu = if iter % 11 == 0 {
            // exceptional shift to break cycles
            a[(hi, hi)] + Complex::new(a[(hi, hi - 1)].norm() * T::from(0.75).unwrap(), T::zero())
        } else {
            wilkinson_shift(a[(hi - 1, hi - 1)], a[(hi - 1, hi)], a[(hi, hi - 1)], a[(hi, hi)])
        };
        for k in lo..=hi {
            a[(k, k)] = a[(k, k)] - mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let x = a[(k, k)];
            let y = a[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == T::zero() {
                (Complex::new(T::one(), T::zero()), zero)
            } else {
                (x / r, y / r)
            };
            for j in k..=hi {
                let u = a[(k, j)];
                let v = a[(k + 1, j)];
                a[(k, j)] = c.conj() * u + s.conj() * v;
                a[(k + 1, j)] = -s * u + c * v;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 2).min(hi) {
                let u = a[(i, k)];
                let v = a[(i, k + 1)];
                a[(i, k)] = u * c + v * s;
                a[(i, k + 1)] = -(u * s.conj()) + v * c.conj();
            }
        }
        for k in lo..=hi {
            a[(k, k)] = a[(k, k)] + mu;
        }
    }
    eig.push(a[(0, 0)]);
    Ok(eig)
}

fn wilkinson_shift<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
) -> Complex<T> {
    let two = T::one() + T::one();
    let half_diff = (a - d) / two;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mean = (a + d) / two;
    let m1 = mean + disc;
    let m2 = mean - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Roots of the polynomial `Σ c_j x^j` (coefficients lowest degree first,
/// leading coefficient nonzero) as companion-matrix eigenvalues, each
/// polished by a few Newton steps.
pub fn poly_roots<T: Real>(coeffs: &[T]) -> Result<Vec<Complex<T>>> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 || coeffs[deg] == T::zero() {
        return Err(Error::InvalidInput("polynomial needs a nonzero leading coefficient".into()));
    }
    let lead = coeffs[deg];
    let mut comp = CMatrix::zeros(deg);
    for j in 0..deg {
        comp[(0, j)] = Complex::new(-coeffs[deg - 1 - j] / lead, T::zero());
    }
    for i in 1..deg {
        comp[(i, i - 1)] = Complex::new(T::one(), T::zero());
    }
    let mut roots = hessenberg_eigenvalues(&comp)?;
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let mut p = Complex::new(coeffs[deg], T::zero());
            let mut dp = Complex::new(T::zero(), T::zero());
            for j in (0..deg).rev() {
                dp = dp * *r + p;
                p = p * *r + Complex::new(coeffs[j], T::zero());
            }
            if dp.norm() == T::zero() {
                break;
            }
            let step = p / dp;
            if !(step.norm() < r.norm().max(T::one()) * from_usize::<T>(deg) * T::epsilon().sqrt()) {
                break;
            }
            *r = *r - step;
        }
    }
    Ok(roots)
}
