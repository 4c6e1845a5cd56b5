//! Dense complex linear algebra used by the Gaussian-state machinery.
//!
//! Matrices are row-major. Products go through `matrixmultiply`'s complex
//! GEMM; the factorizations below are small enough (orbital count squared)
//! that straightforward loops are adequate.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
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
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [Complex<T>] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Submatrix picking the given rows and columns, in order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            let src = self.row(r);
            let dst = out.row_mut(i);
            for (j, &c) in cols.iter().enumerate() {
                dst[j] = src[c];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows, other.cols);
        gemm_into(false, self, false, other, &mut out);
        out
    }

    /// `self† · other` without forming the adjoint.
    pub fn adjoint_mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.cols, other.cols);
        gemm_into(true, self, false, other, &mut out);
        out
    }

    /// `self · other†` without forming the adjoint.
    pub fn mul_adjoint(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows, other.rows);
        gemm_into(false, self, true, other, &mut out);
        out
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

/// `out ← op(a)·op(b)` where `adj_x` selects the conjugate transpose.
fn gemm_into<T: Real>(adj_a: bool, a: &CMat<T>, adj_b: bool, b: &CMat<T>, out: &mut CMat<T>) {
    let (m, ka, rsa, csa) = if adj_a {
        (a.cols, a.rows, 1, a.cols as isize)
    } else {
        (a.rows, a.cols, a.cols as isize, 1)
    };
    let (kb, n, rsb, csb) = if adj_b {
        (b.cols, b.rows, 1, b.cols as isize)
    } else {
        (b.rows, b.cols, b.cols as isize, 1)
    };
    assert_eq!(ka, kb, "inner dimensions differ");
    assert_eq!((out.rows, out.cols), (m, n));
    if m == 0 || n == 0 {
        return;
    }
    // The GEMM kernel has no conjugation flag: conjugate a copy instead.
    let conj_copy = |m: &CMat<T>, adj: bool| -> Option<Vec<Complex<T>>> {
        adj.then(|| m.data.iter().map(|v| v.conj()).collect())
    };
    let (ca, cb) = (conj_copy(a, adj_a), conj_copy(b, adj_b));
    let pa = ca.as_deref().unwrap_or(&a.data).as_ptr();
    let pb = cb.as_deref().unwrap_or(&b.data).as_ptr();
    // SAFETY: shapes and strides checked above; `out` is uniquely borrowed.
    unsafe {
        T::gemm_raw(
            m,
            ka,
            n,
            Complex::one(),
            pa,
            rsa,
            csa,
            pb,
            rsb,
            csb,
            Complex::zero(),
            out.data.as_mut_ptr(),
            out.cols as isize,
            1,
        );
    }
}

/// Upper Cholesky factor `R` with `g = R†R` and real positive diagonal.
pub fn cholesky_upper<T: Real>(g: &CMat<T>) -> Result<CMat<T>> {
    let n = g.rows();
    if g.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.cols(),
        });
    }
    let mut r = CMat::zeros(n, n);
    for i in 0..n {
        r.row_mut(i)[i..].copy_from_slice(&g.row(i)[i..]);
    }
    for j in 0..n {
        let pivot = r[(j, j)].re;
        if !(pivot > T::TINY * T::TINY) {
            return Err(Error::DegenerateState {
                step: None,
                reason: format!("non-positive Gram pivot {pivot} in column {j}"),
            });
        }
        let d = pivot.sqrt();
        let inv = d.recip();
        let (head, tail) = r.data.split_at_mut((j + 1) * n);
        let rj = &mut head[j * n..];
        rj[j] = Complex::new(d, T::zero());
        for x in &mut rj[j + 1..] {
            *x = x.scale(inv);
        }
        // Trailing update: R[i][l] -= conj(R[j][i]) R[j][l] for j < i <= l.
        for i in j + 1..n {
            let f = rj[i].conj();
            if f.is_zero() {
                continue;
            }
            let ri = &mut tail[(i - j - 1) * n..(i - j) * n];
            for l in i..n {
                ri[l] = ri[l] - f * rj[l];
            }
        }
    }
    Ok(r)
}

/// Inverse of an upper-triangular matrix with nonzero diagonal.
pub fn upper_triangular_inverse<T: Real>(r: &CMat<T>) -> CMat<T> {
    let n = r.rows();
    let mut x = CMat::zeros(n, n);
    for j in 0..n {
        x[(j, j)] = r[(j, j)].inv();
        for i in (0..j).rev() {
            let mut acc = Complex::<T>::zero();
            for k in i + 1..=j {
                acc = acc + r[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = -acc / r[(i, i)];
        }
    }
    x
}

/// Replaces the columns of `w` with an orthonormal basis of their span.
///
/// Cholesky-QR: `w ← w·R⁻¹` with `w†w = R†R`. The implied QR factorization
/// has a real positive `R` diagonal, which makes it unique. `passes = 2`
/// restores orthogonality to working precision when `w` is ill-conditioned
/// (condition number up to roughly `EPS^{-1/2}`).
pub fn orthonormalize_columns<T: Real>(w: &mut CMat<T>, passes: usize) -> Result<()> {
    for _ in 0..passes.max(1) {
        let g = w.adjoint_mul(w);
        let r = cholesky_upper(&g)?;
        for i in 0..r.rows() {
            if r[(i, i)].re < T::TINY {
                return Err(Error::DegenerateState {
                    step: None,
                    reason: format!("R diagonal {} below threshold", r[(i, i)].re),
                });
            }
        }
        let rinv = upper_triangular_inverse(&r);
        *w = w.matmul(&rinv);
    }
    Ok(())
}

/// `max |w†w − I|`.
pub fn orthonormality_error<T: Real>(w: &CMat<T>) -> T {
    let g = w.adjoint_mul(w);
    g.max_abs_diff(&CMat::identity(w.cols()))
}

/// Eigenvalues (ascending) of a Hermitian matrix.
///
/// Householder reduction to a real symmetric tridiagonal matrix followed by
/// implicit QL iterations. Only the lower triangle is assumed Hermitian-
/// consistent with the upper; the input is not checked.
pub fn hermitian_eigenvalues<T: Real>(a: &CMat<T>) -> Vec<T> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "square matrix required");
    if n == 0 {
        return Vec::new();
    }
    let (mut d, mut e) = tridiagonalize(a.clone());
    tridiagonal_ql(&mut d, &mut e);
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    d
}

/// Returns (diagonal, subdiagonal) with `e[n-1] = 0`.
fn tridiagonalize<T: Real>(mut a: CMat<T>) -> (Vec<T>, Vec<T>) {
    let n = a.rows();
    let two = T::lit(2.0);
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let mut v = vec![Complex::<T>::zero(); n];
    let mut p = vec![Complex::<T>::zero(); n];

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let x0 = a[(k + 1, k)];
        let norm = (k + 1..n).fold(T::zero(), |acc, i| acc + a[(i, k)].norm_sqr()).sqrt();
        if m == 1 || norm == T::zero() {
            e[k] = norm;
            continue;
        }
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::one()
        };
        let alpha = -phase.scale(norm);
        e[k] = norm;

        let v = &mut v[..m];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = a[(k + 1 + i, k)];
        }
        v[0] = v[0] - alpha;
        let vn = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if vn == T::zero() {
            continue;
        }
        for vi in v.iter_mut() {
            *vi = vi.unscale(vn);
        }

        // p = 2 B v on the trailing block B = a[k+1.., k+1..].
        let p = &mut p[..m];
        for i in 0..m {
            let row = &a.row(k + 1 + i)[k + 1..];
            let mut acc = Complex::<T>::zero();
            for (bij, vj) in row.iter().zip(v.iter()) {
                acc = acc + *bij * *vj;
            }
            p[i] = acc.scale(two);
        }
        // w = p − 2c v with c = v†Bv = Re(v†p)/2.
        let vp = v
            .iter()
            .zip(p.iter())
            .fold(Complex::<T>::zero(), |acc, (vi, pi)| acc + vi.conj() * *pi);
        let c = vp.re / two;
        for (pi, vi) in p.iter_mut().zip(v.iter()) {
            *pi = *pi - vi.scale(two * c);
        }
        let w = &*p;
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a.row_mut(k + 1 + i)[k + 1..];
            for j in 0..m {
                row[j] = row[j] - vi * w[j].conj() - wi * v[j].conj();
            }
        }
    }
    for (k, dk) in d.iter_mut().enumerate() {
        *dk = a[(k, k)].re;
    }
    (d, e)
}

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues left in `d`.
fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let eps = T::EPS;
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) || iter > 64 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
}
