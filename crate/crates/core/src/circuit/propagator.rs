//! Exact single-particle propagator of the random-sign hopping step.
//!
//! With ±1 hoppings, `h₁ = D h₀ D` where `h₀` is the uniform chain and `D`
//! is the diagonal gauge `D₀ = 1`, `D_{x+1} = D_x κ_x`. On a ring the gauge
//! cannot absorb the wrap bond, which leaves either the periodic or the
//! antiperiodic uniform ring depending on `Πκ`. So every step reuses one of
//! at most two precomputed banded propagators:
//! `exp(−2iτh₁) = D exp(−2iτh₀^{±}) D`.
//!
//! The uniform propagators come from the Bessel expansion
//! `⟨x|exp(−iz cos k)|y⟩ = (−i)^{|x−y|} J_{|x−y|}(z)` with `z = 4τ`, summed
//! over images for the ring and antisymmetrized for the open chain.

use num_complex::Complex;

use super::params::Boundary;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::Real;

/// `J_0(x) ..= J_{n_max}(x)` by Miller's backward recurrence.
pub fn bessel_j_sequence(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = n_max.max(ax.ceil() as usize);
    let mut m = top + 20 + (40.0 * top as f64).sqrt() as usize;
    m += m % 2;
    let (mut jp, mut j) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        // j = J_k, jp = J_{k+1}
        let jm = 2.0 * k as f64 / ax * j - jp;
        jp = j;
        j = jm;
        if k - 1 <= n_max {
            out[k - 1] = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `(−i)^n`.
fn minus_i_pow(n: usize) -> Complex<f64> {
    match n % 4 {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, -1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, 1.0),
    }
}

/// Uniform ring of `period` sites with wrap-bond sign `twist`; entry `d`
/// is `⟨x+d|exp(−2iτh₀)|x⟩`.
fn ring_kernel(period: usize, twist: f64, bessel: &[f64]) -> Vec<Complex<f64>> {
    let reach = bessel.len() as i64 - 1;
    let p = period as i64;
    (0..p)
        .map(|d| {
            let mut acc = Complex::new(0.0, 0.0);
            // images d + wp with |d + wp| ≤ reach
            let w_lo = (-reach - d).div_euclid(p);
            let w_hi = (reach - d).div_euclid(p);
            for w in w_lo..=w_hi {
                let n = (d + w * p).unsigned_abs() as usize;
                if n as i64 > reach {
                    continue;
                }
                let sign = if w.rem_euclid(2) == 1 { twist } else { 1.0 };
                acc += minus_i_pow(n) * (sign * bessel[n]);
            }
            acc
        })
        .collect()
}

#[derive(Clone, Debug)]
struct SparseRows<T> {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex<T>>,
}

impl<T: Real> SparseRows<T> {
    fn from_dense(n: usize, cutoff: f64, entry: impl Fn(usize, usize) -> Complex<f64>) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        offsets.push(0);
        for x in 0..n {
            for y in 0..n {
                let u = entry(x, y);
                if u.norm() > cutoff {
                    cols.push(y as u32);
                    vals.push(Complex::new(T::lit(u.re), T::lit(u.im)));
                }
            }
            offsets.push(cols.len());
        }
        Self { offsets, cols, vals }
    }

    fn row(&self, x: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let r = self.offsets[x]..self.offsets[x + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.vals[r])
            .map(|(&c, &v)| (c as usize, v))
    }

    fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// Cached `exp(−2iτh₁)` for every sign pattern of a fixed chain.
#[derive(Clone, Debug)]
pub struct HoppingPropagator<T> {
    sites: usize,
    boundary: Boundary,
    tau: T,
    /// Open: one kernel. Periodic: [untwisted, twisted].
    kernels: Vec<SparseRows<T>>,
}

impl<T: Real> HoppingPropagator<T> {
    pub fn new(sites: usize, tau: T, boundary: Boundary) -> Result<Self> {
        if sites < 2 {
            return Err(Error::invalid("at least two sites are required"));
        }
        if !tau.is_finite() {
            return Err(Error::invalid("tau must be finite"));
        }
        let z = 4.0 * tau.to_f64_lossy();
        // J_n(z) < 1e-30 well before n = |z| + 60 for the z of interest.
        let reach = z.abs().ceil() as usize + 60;
        let bessel = bessel_j_sequence(z, reach);
        let cutoff = (T::EPS.to_f64_lossy() * 1e-2).max(1e-300);
        let l = sites;
        let kernels = match boundary {
            Boundary::Periodic => [1.0, -1.0]
                .iter()
                .map(|&twist| {
                    let g = ring_kernel(l, twist, &bessel);
                    // x < y reaches x through the wrap bond once more.
                    SparseRows::from_dense(l, cutoff, |x, y| {
                        if x >= y {
                            g[x - y]
                        } else {
                            g[x + l - y] * twist
                        }
                    })
                })
                .collect(),
            Boundary::Open => {
                // Images on a ring of 2L+2 sites with nodes at −1 and L.
                let p = 2 * l + 2;
                let g = ring_kernel(p, 1.0, &bessel);
                vec![SparseRows::from_dense(l, cutoff, |x, y| {
                    g[(x + p - y) % p] - g[(x + y + 2) % p]
                })]
            }
        };
        Ok(Self {
            sites,
            boundary,
            tau,
            kernels,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// Stored nonzeros of the widest kernel.
    pub fn bandwidth_nnz(&self) -> usize {
        self.kernels.iter().map(SparseRows::nnz).max().unwrap_or(0)
    }

    fn gauge(&self, kappa: &[T]) -> Result<(Vec<T>, usize)> {
        if kappa.len() != self.sites {
            return Err(Error::DimensionMismatch {
                expected: self.sites,
                got: kappa.len(),
            });
        }
        let mut d = Vec::with_capacity(self.sites);
        d.push(T::one());
        for x in 0..self.sites - 1 {
            let k = kappa[x];
            if k != T::one() && k != -T::one() {
                return Err(Error::invalid(format!("hopping {k} is not ±1")));
            }
            d.push(d[x] * k);
        }
        let kernel = match self.boundary {
            Boundary::Open => 0,
            Boundary::Periodic => {
                let wrap = kappa[self.sites - 1];
                if wrap != T::one() && wrap != -T::one() {
                    return Err(Error::invalid(format!("hopping {wrap} is not ±1")));
                }
                // Wrap bond seen in the gauge frame: κ_{L−1}·D_{L−1}·D_0.
                usize::from(wrap * d[self.sites - 1] < T::zero())
            }
        };
        Ok((d, kernel))
    }

    /// `exp(−2iτh₁)·W` for the hopping signs `kappa`.
    pub fn apply(&self, w: &CMat<T>, kappa: &[T]) -> Result<CMat<T>> {
        if w.rows() != self.sites {
            return Err(Error::DimensionMismatch {
                expected: self.sites,
                got: w.rows(),
            });
        }
        let (d, k) = self.gauge(kappa)?;
        let kernel = &self.kernels[k];
        let n = w.cols();
        let mut out = CMat::zeros(self.sites, n);
        for x in 0..self.sites {
            let acc = out.row_mut(x);
            for (y, u) in kernel.row(x) {
                let u = if d[x] == d[y] { u } else { -u };
                for (a, &b) in acc.iter_mut().zip(w.row(y)) {
                    *a += u * b;
                }
            }
        }
        Ok(out)
    }

    /// Dense `exp(−2iτh₁)`.
    pub fn matrix(&self, kappa: &[T]) -> Result<CMat<T>> {
        self.apply(&CMat::identity(self.sites), kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_values() {
        // Reference values of J_n(x).
        let j = bessel_j_sequence(4.0, 10);
        assert!((j[0] - (-0.397_149_809_863_847_4)).abs() < 1e-14);
        assert!((j[1] - (-0.066_043_328_023_549_14)).abs() < 1e-14);
        assert!((j[5] - 0.132_086_656_047_098_3).abs() < 1e-14);
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[2] - 0.114_903_484_931_900_5).abs() < 1e-15);
        let j = bessel_j_sequence(0.0, 2);
        assert_eq!(j, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn bessel_sum_rule_large_argument() {
        // J_0² + 2Σ J_n² = 1
        for x in [0.5, 4.0, 37.0, 120.0] {
            let j = bessel_j_sequence(x, x as usize + 80);
            let s = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13, "x = {x}: {s}");
        }
    }

    #[test]
    fn two_site_open_chain() {
        let p = HoppingPropagator::<f64>::new(2, 0.37, Boundary::Open).unwrap();
        let u = p.matrix(&[1.0, 1.0]).unwrap();
        let (c, s) = ((2.0f64 * 0.37).cos(), (2.0f64 * 0.37).sin());
        assert!((u[(0, 0)] - Complex::new(c, 0.0)).norm() < 1e-14);
        assert!((u[(1, 0)] - Complex::new(0.0, -s)).norm() < 1e-14);
        let u = p.matrix(&[-1.0, 1.0]).unwrap();
        assert!((u[(1, 0)] - Complex::new(0.0, s)).norm() < 1e-14);
    }

    #[test]
    fn kernel_is_banded() {
        let p = HoppingPropagator::<f64>::new(400, 1.0, Boundary::Periodic).unwrap();
        assert!(p.bandwidth_nnz() < 400 * 60);
        assert_eq!(p.sites(), 400);
    }

    #[test]
    fn rejects_non_sign_couplings() {
        let p = HoppingPropagator::<f64>::new(4, 1.0, Boundary::Periodic).unwrap();
        let w = CMat::identity(4);
        assert!(p.apply(&w, &[1.0, 0.5, 1.0, 1.0]).is_err());
        assert!(p.apply(&w, &[1.0, 1.0]).is_err());
    }
}
