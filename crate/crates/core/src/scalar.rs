//! Floating point scalar abstraction.
//!
//! Everything numeric in the crate is generic over [`Real`], implemented for
//! `f32` and `f64`. Tolerances quoted in the docs assume `f64`.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar usable by the simulator: f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + rustfft::FftNum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon as seen by the numerical routines.
    const EPS: Self;

    /// Smallest magnitude treated as a nonzero pivot.
    const TINY: Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts an integer count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Complex GEMM on strided storage: `C ← alpha·A·B + beta·C`.
    ///
    /// # Safety
    /// Pointers and strides must describe valid, non-aliasing (for `c`)
    /// matrices of shapes `m×k`, `k×n` and `m×n`.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Complex<Self>,
        a: *const Complex<Self>,
        rsa: isize,
        csa: isize,
        b: *const Complex<Self>,
        rsb: isize,
        csb: isize,
        beta: Complex<Self>,
        c: *mut Complex<Self>,
        rsc: isize,
        csc: isize,
    );
}

macro_rules! impl_real {
    ($t:ty, $gemm:path, $eps:expr, $tiny:expr) => {
        impl Real for $t {
            const EPS: Self = $eps;
            const TINY: Self = $tiny;

            unsafe fn gemm_raw(
                m: usize,
                k: usize,
                n: usize,
                alpha: Complex<Self>,
                a: *const Complex<Self>,
                rsa: isize,
                csa: isize,
                b: *const Complex<Self>,
                rsb: isize,
                csb: isize,
                beta: Complex<Self>,
                c: *mut Complex<Self>,
                rsc: isize,
                csc: isize,
            ) {
                // Complex<T> is repr(C) { re, im }, layout-identical to [T; 2].
                $gemm(
                    matrixmultiply::CGemmOption::Standard,
                    matrixmultiply::CGemmOption::Standard,
                    m,
                    k,
                    n,
                    [alpha.re, alpha.im],
                    a as *const [Self; 2],
                    rsa,
                    csa,
                    b as *const [Self; 2],
                    rsb,
                    csb,
                    [beta.re, beta.im],
                    c as *mut [Self; 2],
                    rsc,
                    csc,
                )
            }
        }
    };
}

impl_real!(f32, matrixmultiply::cgemm, f32::EPSILON, 1e-37);
impl_real!(f64, matrixmultiply::zgemm, f64::EPSILON, 1e-300);
