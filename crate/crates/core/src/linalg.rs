//! Small dense complex matrices.
//!
//! Everything here targets desk-scale dimensions (system operators, local
//! gates, reduced states). Row-major storage.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{Float, One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{c, cr, Real, C};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { cr(diag[i]) } else { C::zero() })
    }

    /// Builds a matrix from nested rows of `(re, im)` pairs.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, cols, |i, j| {
            let (re, im) = rows[i][j];
            c(T::lit(re), T::lit(im))
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C<T>> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(cr(s))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        Self::from_fn(r1 * r2, c1 * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(C::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Entrywise `(p, q)` norm: `(sum_cols [sum_rows |m_ij|^p]^(q/p))^(1/q)`.
    pub fn norm_pq(&self, p: T, q: T) -> T {
        let mut total = T::zero();
        for j in 0..self.cols {
            let col: T = (0..self.rows).map(|i| self[(i, j)].norm().powf(p)).sum();
            total = total + col.powf(q / p);
        }
        total.powf(T::one() / q)
    }

    /// `(2,1)` norm: sum over columns of the column 2-norms.
    pub fn norm_21(&self) -> T {
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self[(i, j)].norm_sqr())
                    .sum::<T>()
                    .sqrt()
            })
            .sum()
    }

    /// `(1,1)` norm: sum of entry moduli.
    pub fn norm_11(&self) -> T {
        self.data.iter().map(|z| z.norm()).sum()
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut d = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Replaces the matrix by its Hermitian part `(A + A^dagger) / 2`.
    pub fn hermitize(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()).scale(half)
        })
    }

    /// Whether all off-diagonal entries vanish within `tol`.
    pub fn is_diagonal(&self, tol: T) -> bool {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && self[(i, j)].norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn diagonal(&self) -> Vec<C<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Real>(&self) -> CMat<U> {
        CMat::from_fn(self.rows, self.cols, |i, j| {
            let z = self[(i, j)];
            c(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))
        })
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMat<T> {
    type Output = CMat<T>;
    fn add(self, rhs: Self) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMat<T> {
    type Output = CMat<T>;
    fn sub(self, rhs: Self) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMat<T> {
    type Output = CMat<T>;
    fn mul(self, rhs: Self) -> CMat<T> {
        self.matmul(rhs)
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Cyclic complex Jacobi iteration. Only the Hermitian part of `a` is used.
    pub fn new(a: &CMat<T>) -> Self {
        assert!(a.is_square(), "eigendecomposition needs a square matrix");
        let n = a.rows();
        let mut m = a.hermitize();
        let mut v = CMat::identity(n);
        let scale = m.norm_fro().max(T::min_positive_value());
        let tol = T::epsilon() * scale * T::lit(0.1);

        for _sweep in 0..100 {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum::<T>()
                .sqrt();
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    let r = apq.norm();
                    if r <= T::min_positive_value() || r <= tol * T::lit(1e-3) {
                        continue;
                    }
                    // Phase rotation making m[p][q] real and positive.
                    let e = apq.unscale(r);
                    let ec = e.conj();
                    for k in 0..n {
                        m[(k, q)] = m[(k, q)] * ec;
                    }
                    for k in 0..n {
                        m[(q, k)] = m[(q, k)] * e;
                    }
                    for k in 0..n {
                        v[(k, q)] = v[(k, q)] * ec;
                    }
                    let app = m[(p, p)].re;
                    let aqq = m[(q, q)].re;
                    let theta = (aqq - app) / (T::lit(2.0) * r);
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    let t = sign / (Float::abs(theta) + (theta * theta + T::one()).sqrt());
                    let cs = T::one() / (t * t + T::one()).sqrt();
                    let sn = t * cs;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = mkp.scale(cs) - mkq.scale(sn);
                        m[(k, q)] = mkp.scale(sn) + mkq.scale(cs);
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = mpk.scale(cs) - mqk.scale(sn);
                        m[(q, k)] = mpk.scale(sn) + mqk.scale(cs);
                    }
                    m[(p, q)] = C::zero();
                    m[(q, p)] = C::zero();
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp.scale(cs) - vkq.scale(sn);
                        v[(k, q)] = vkp.scale(sn) + vkq.scale(cs);
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            m[(i, i)]
                .re
                .partial_cmp(&m[(j, j)].re)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| m[(i, i)].re).collect();
        let vectors = CMat::from_fn(n, n, |r, k| v[(r, order[k])]);
        Self { values, vectors }
    }

    /// Rebuilds `V f(D) V^dagger` for a complex-valued spectral function.
    pub fn map(&self, f: impl Fn(T) -> C<T>) -> CMat<T> {
        let n = self.values.len();
        let fv: Vec<C<T>> = self.values.iter().map(|&x| f(x)).collect();
        CMat::from_fn(n, n, |i, j| {
            (0..n).fold(C::zero(), |acc, k| {
                acc + self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj()
            })
        })
    }

    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian<T: Real>(h: &CMat<T>, t: T) -> CMat<T> {
    HermitianEigen::new(h).map(|lambda| C::from_polar(T::one(), -lambda * t))
}

/// Spectral (operator 2-) norm of an arbitrary square matrix.
pub fn spectral_norm<T: Real>(a: &CMat<T>) -> T {
    let gram = a.adjoint().matmul(a);
    HermitianEigen::new(&gram).max().max(T::zero()).sqrt()
}

/// Trace norm of a Hermitian matrix: sum of absolute eigenvalues.
pub fn trace_norm_hermitian<T: Real>(a: &CMat<T>) -> T {
    HermitianEigen::new(a)
        .values
        .iter()
        .map(|&x| Float::abs(x))
        .sum()
}

/// Trace distance `||rho - sigma||_tr / 2` between two density matrices.
pub fn trace_distance<T: Real>(rho: &CMat<T>, sigma: &CMat<T>) -> T {
    trace_norm_hermitian(&(rho - sigma)) * T::lit(0.5)
}

/// Positive-semidefinite square root with eigenvalues clamped at zero.
/// Returns the root and the most negative eigenvalue encountered.
pub fn psd_sqrt<T: Real>(a: &CMat<T>) -> (CMat<T>, T) {
    let eig = HermitianEigen::new(a);
    let min = eig.min();
    (eig.map(|x| cr(x.max(T::zero()).sqrt())), min)
}

/// Pauli matrices and ladder operators for tests and configuration helpers.
pub mod pauli {
    use super::*;

    pub fn x<T: Real>() -> CMat<T> {
        CMat::from_rows(&[vec![(0.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]])
    }

    pub fn y<T: Real>() -> CMat<T> {
        CMat::from_rows(&[vec![(0.0, 0.0), (0.0, -1.0)], vec![(0.0, 1.0), (0.0, 0.0)]])
    }

    pub fn z<T: Real>() -> CMat<T> {
        CMat::from_rows(&[vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (-1.0, 0.0)]])
    }

    pub fn identity<T: Real>() -> CMat<T> {
        CMat::identity(2)
    }
}

/// Truncated bosonic creation operator on `levels` states:
/// `<j|a^dagger|j-1> = sqrt(j)`. For two levels this is the qubit raising
/// operator `|1><0|`.
pub fn creation<T: Real>(levels: usize) -> CMat<T> {
    let mut m = CMat::zeros(levels, levels);
    for j in 1..levels {
        m[(j, j - 1)] = cr(T::from_count(j).sqrt());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMat<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = CMat::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        a.hermitize()
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        for (n, seed) in [(1, 1), (2, 2), (4, 3), (7, 4), (12, 5)] {
            let a = random_hermitian(n, seed);
            let eig = HermitianEigen::new(&a);
            let back = eig.map(cr);
            assert!((&back - &a).max_abs() < 1e-12, "n = {n}");
            let vv = eig.vectors.adjoint().matmul(&eig.vectors);
            assert!((&vv - &CMat::identity(n)).max_abs() < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigen_handles_degenerate_and_diagonal() {
        let a = CMat::<f64>::from_real_diag(&[2.0, -1.0, 2.0]);
        let eig = HermitianEigen::new(&a);
        assert_eq!(eig.values, vec![-1.0, 2.0, 2.0]);
        let z = CMat::<f64>::zeros(3, 3);
        assert!(HermitianEigen::new(&z).values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn expm_is_unitary_and_matches_diagonal_case() {
        let h = random_hermitian(4, 11);
        let u = expm_hermitian(&h, 0.7);
        let uu = u.matmul(&u.adjoint());
        assert!((&uu - &CMat::identity(4)).max_abs() < 1e-12);

        let z = pauli::z::<f64>();
        let u = expm_hermitian(&z, std::f64::consts::FRAC_PI_4);
        let e = C::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
        assert!((u[(0, 0)] - e).norm() < 1e-14);
        assert!((u[(1, 1)] - e.conj()).norm() < 1e-14);
    }

    #[test]
    fn pauli_commutator_and_norms() {
        let (x, y, z) = (pauli::x::<f64>(), pauli::y::<f64>(), pauli::z::<f64>());
        let comm = x.commutator(&y);
        assert!((&comm - &z.scale(c(0.0, 2.0))).max_abs() < 1e-15);
        assert!((spectral_norm(&comm) - 2.0).abs() < 1e-12);
        assert!((trace_norm_hermitian(&z) - 2.0).abs() < 1e-12);
        let m = CMat::<f64>::from_rows(&[vec![(3.0, 0.0), (0.0, 0.0)], vec![(4.0, 0.0), (1.0, 0.0)]]);
        assert!((m.norm_21() - 6.0).abs() < 1e-14);
        assert!((m.norm_pq(2.0, 1.0) - 6.0).abs() < 1e-12);
        assert!((m.norm_11() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn creation_operator_levels() {
        let a2 = creation::<f64>(2);
        let sp = CMat::<f64>::from_rows(&[vec![(0.0, 0.0), (0.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]]);
        assert_eq!(a2, sp);
        let a3 = creation::<f64>(3);
        assert!((a3[(2, 1)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let b = random_hermitian(3, 9);
        let a = b.matmul(&b);
        let (r, min) = psd_sqrt(&a);
        assert!(min > -1e-12);
        assert!((&r.matmul(&r) - &a).max_abs() < 1e-12);
    }
}
