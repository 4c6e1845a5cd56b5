//! Elliptic functions and conformal-map predictions for entanglement.
//!
//! The parameter convention is `m` (not the modulus `k = √m`). Functions
//! that need accuracy near `m = 1` take or keep the complementary parameter
//! `m₁ = 1 − m` alongside `m`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

fn agm<T: Real>(mut a: T, mut b: T) -> T {
    for _ in 0..64 {
        if (a - b).abs() <= T::EPS * a {
            break;
        }
        let next = (a + b) * T::lit(0.5);
        b = (a * b).sqrt();
        a = next;
    }
    (a + b) * T::lit(0.5)
}

/// `K(m)` given `m₁ = 1 − m` directly.
fn k_of_complement<T: Real>(m1: T) -> T {
    T::FRAC_PI_2() / agm(T::one(), m1.sqrt())
}

/// Complete elliptic integral of the first kind,
/// `K(m) = ∫₀¹ dt / √((1−t²)(1−mt²))`, by the arithmetic–geometric mean.
pub fn elliptic_k<T: Real>(m: T) -> Result<T> {
    if !(m < T::one()) {
        return Err(Error::invalid(format!("K(m) diverges for m = {m} ≥ 1")));
    }
    if !m.is_finite() {
        return Err(Error::invalid("m must be finite"));
    }
    Ok(k_of_complement(T::one() - m))
}

/// Real-argument `(sn, cn, dn)(u | m)` with `m₁ = 1 − m` supplied for
/// accuracy. Uses the descending Landen (AGM) scheme.
pub fn jacobi_real<T: Real>(u: T, m: T, m1: T) -> (T, T, T) {
    if m == T::zero() {
        return (u.sin(), u.cos(), T::one());
    }
    if m1 == T::zero() {
        let c = u.cosh().recip();
        return (u.tanh(), c, c);
    }
    let mut a = vec![T::one()];
    let mut c = vec![m.sqrt()];
    let mut b = m1.sqrt();
    while c.last().unwrap().abs() > T::EPS && a.len() < 40 {
        let an = *a.last().unwrap();
        let next = (an + b) * T::lit(0.5);
        c.push((an - b) * T::lit(0.5));
        b = (an * b).sqrt();
        a.push(next);
    }
    let n = a.len() - 1;
    let mut phi = T::lit(2f64.powi(n as i32)) * a[n] * u;
    let mut phi_prev = phi;
    for k in (1..=n).rev() {
        phi_prev = phi;
        phi = (phi + (c[k] / a[k] * phi.sin()).asin()) * T::lit(0.5);
    }
    let (s, co) = (phi.sin(), phi.cos());
    let dn = if n == 0 {
        (T::one() - m * s * s).sqrt()
    } else {
        let den = (phi_prev - phi).cos();
        if den.abs() > T::lit(1e-3) {
            co / den
        } else {
            (T::one() - m * s * s).sqrt()
        }
    };
    (s, co, dn)
}

/// `(sn, cn, dn)(z | m)` for complex `z`, from real-argument values at `m`
/// and `1 − m` through the addition theorem.
pub fn jacobi_sn_cn_dn<T: Real>(z: Complex<T>, m: T) -> Result<(Complex<T>, Complex<T>, Complex<T>)> {
    if !(m > T::zero() && m < T::one()) {
        return Err(Error::invalid(format!("parameter m = {m} outside (0, 1)")));
    }
    jacobi_complex(z, m, T::one() - m)
}

fn jacobi_complex<T: Real>(z: Complex<T>, m: T, m1: T) -> Result<(Complex<T>, Complex<T>, Complex<T>)> {
    let k = k_of_complement(m1);
    let kp = k_of_complement(m);
    // Poles of sn, cn, dn: 2jK + i(2l+1)K'.
    let j = (z.re / (k + k)).round();
    let l = ((z.im - kp) / (kp + kp)).round();
    let dre = z.re - (k + k) * j;
    let dim = z.im - (kp + kp) * l - kp;
    let dist = (dre * dre + dim * dim).sqrt();
    if dist < T::lit(1e-8) {
        return Err(Error::PoleProximity {
            distance: dist.to_f64_lossy(),
        });
    }
    let (s, c, d) = jacobi_real(z.re, m, m1);
    let (s1, c1, d1) = jacobi_real(z.im, m1, m);
    let delta = c1 * c1 + m * s * s * s1 * s1;
    let sn = Complex::new(s * d1, c * d * s1 * c1) / delta;
    let cn = Complex::new(c * c1, -s * d * s1 * d1) / delta;
    let dn = Complex::new(d * c1 * d1, -m * s * c * s1) / delta;
    Ok((sn, cn, dn))
}

/// `2K(m)/K(1−m)` from the pair `(m, 1 − m)`.
fn aspect_of<T: Real>(m: T, m1: T) -> T {
    let two = T::one() + T::one();
    two * k_of_complement(m1) / k_of_complement(m)
}

/// Aspect ratio `2K(m)/K(1−m)` of the rectangle mapped by `sn(·|m)`.
pub fn aspect_ratio<T: Real>(m: T) -> Result<T> {
    if !(m > T::zero() && m < T::one()) {
        return Err(Error::invalid(format!("parameter m = {m} outside (0, 1)")));
    }
    Ok(aspect_of(m, T::one() - m))
}

/// Solves `2K(m)/K(1−m) = τ` and returns `(m, 1 − m)`. Extreme ratios can
/// underflow one member of the pair to exactly 0.
fn solve_pair<T: Real>(tau: T) -> Result<(T, T)> {
    if !(tau >= T::lit(1e-3) && tau <= T::lit(1e3)) {
        return Err(Error::invalid(format!("aspect ratio {tau} outside [1e-3, 1e3]")));
    }
    let two = T::one() + T::one();
    let half = T::lit(0.5);
    // Bisection on the log of whichever of m, 1−m is small.
    let small_m = tau <= two;
    let ratio = |lg: T| {
        let x = lg.exp();
        if small_m {
            aspect_of(x, T::one() - x)
        } else {
            aspect_of(T::one() - x, x)
        }
    };
    let target_sign = if small_m { T::one() } else { -T::one() };
    let mut lo = T::min_positive_value().ln();
    let mut hi = half.ln();
    // f is increasing in ln m and decreasing in ln m₁.
    let f = |lg: T| (ratio(lg) - tau) * target_sign;
    if f(lo) > T::zero() {
        // τ beyond what the format resolves: the small member underflows.
        return Ok(if small_m { (T::zero(), T::one()) } else { (T::one(), T::zero()) });
    }
    for _ in 0..400 {
        let mid = (lo + hi) * half;
        if f(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::EPS * hi.abs() {
            break;
        }
    }
    let x = ((lo + hi) * half).exp();
    Ok(if small_m { (x, T::one() - x) } else { (T::one() - x, x) })
}

/// `m` with `2K(m)/K(1−m) = tau_asp`, for `tau_asp ∈ [1e−3, 1e3]`.
pub fn solve_modulus<T: Real>(tau_asp: T) -> Result<T> {
    solve_pair(tau_asp).map(|p| p.0)
}

/// Conformal map of the `L × 2aT` space-time rectangle onto the upper half
/// plane, `w(z) = sn(λz | m)` with `λ = K(1−m)/L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectangleMap<T> {
    pub l: T,
    pub t: T,
    pub a: T,
    pub tau_asp: T,
    pub m: T,
    /// `1 − m`, kept separately for accuracy near `m = 1`.
    pub m1: T,
    pub lambda_scale: T,
}

impl<T: Real> RectangleMap<T> {
    pub fn new(l: T, t: T, a: T) -> Result<Self> {
        if !(l > T::zero() && t > T::zero() && a > T::zero()) {
            return Err(Error::invalid("L, T and a must be positive"));
        }
        let tau_asp = (a + a) * t / l;
        let (m, m1) = solve_pair(tau_asp)?;
        if m == T::zero() {
            return Err(Error::invalid(format!(
                "aspect ratio {tau_asp} underflows the parameter m; use the semi-strip form"
            )));
        }
        let lambda_scale = k_of_complement(m) / l;
        Ok(Self {
            l,
            t,
            a,
            tau_asp,
            m,
            m1,
            lambda_scale,
        })
    }

    /// `2K(m)/K(1−m)` recomputed from the stored pair.
    pub fn aspect_ratio(&self) -> T {
        aspect_of(self.m, self.m1)
    }

    /// `K(1−m)`, the image height of the spatial direction.
    pub fn k_prime(&self) -> T {
        k_of_complement(self.m)
    }

    /// `sn(iλy | m) = i·sc(λy | 1−m)`; returns the real factor and the
    /// complementary-parameter triple `(sn, cn, dn)(λy | 1−m)`.
    fn imaginary_sn(&self, y: T) -> Result<(T, (T, T, T))> {
        if !(y > T::zero() && y < self.l) {
            return Err(Error::invalid(format!("position {y} outside (0, L)")));
        }
        let u = self.lambda_scale * y;
        let kp = self.k_prime();
        let dist = u.min(kp - u);
        if dist < T::lit(1e-8) {
            return Err(Error::PoleProximity {
                distance: dist.to_f64_lossy(),
            });
        }
        let (s, c, d) = jacobi_real(u, self.m1, self.m);
        Ok((s / c, (s, c, d)))
    }

    /// `ξ = |λ cn(λz₁) dn(λz₁) / (2 sn(λz₁))|` at `z₁ = i L_A`.
    pub fn xi(&self, l_a: T) -> Result<T> {
        // cn(iu|m) = 1/cn(u|m₁), dn(iu|m) = dn(u|m₁)/cn(u|m₁).
        let (_, (s, c, d)) = self.imaginary_sn(l_a)?;
        Ok((self.lambda_scale * d / ((s + s) * c)).abs())
    }

    /// Cross ratio of `w₁ = sn(iλL_A)` and `w₂ = sn(iλ(L−L_B))` with their
    /// mirror images.
    pub fn eta(&self, l_a: T, l_b: T) -> Result<T> {
        if !(l_a > T::zero() && l_b > T::zero() && l_a + l_b <= self.l) {
            return Err(Error::invalid("need L_A, L_B > 0 and L_A + L_B ≤ L"));
        }
        let (sa, _) = self.imaginary_sn(l_a)?;
        let (sb, _) = self.imaginary_sn(self.l - l_b)?;
        // w_k = i s_k with s_k > 0.
        let four = T::lit(4.0);
        Ok(four * sa * sb / ((sa + sb) * (sa + sb)))
    }
}

/// `ξ` for the rectangle of height `L` and time `T` rescaled by `a`.
pub fn xi_rectangle<T: Real>(l: T, t: T, a: T, l_a: T) -> Result<T> {
    RectangleMap::new(l, t, a)?.xi(l_a)
}

/// Cross ratio for intervals of length `L_A` and `L_B` at the two ends of
/// an open chain of length `L` after time `T`.
pub fn eta_rectangle<T: Real>(l: T, t: T, a: T, l_a: T, l_b: T) -> Result<T> {
    RectangleMap::new(l, t, a)?.eta(l_a, l_b)
}

/// Geometry of the replica path integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// Infinite chain, steady state.
    InfinitePlane,
    /// Periodic chain, steady state.
    Cylinder,
    /// Open chain, steady state.
    Strip,
    /// Semi-infinite open chain at time T.
    SemiStrip,
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "infinite_plane" | "plane" => Ok(Geometry::InfinitePlane),
            "cylinder" => Ok(Geometry::Cylinder),
            "strip" => Ok(Geometry::Strip),
            "semi_strip" => Ok(Geometry::SemiStrip),
            other => Err(Error::invalid(format!("unknown geometry `{other}`"))),
        }
    }
}

/// Closed-form `S_n(L_A)` for the simple geometries.
///
/// With `c₁ = c/6`:
/// plane `c₁(1+1/n) log L_A`;
/// cylinder `c₁(1+1/n) log[(L/π) sin(πL_A/L)]`;
/// strip `(c₁/2)(1+1/n) log[(2L/π) sin(πL_A/L)]`;
/// semi-strip `(c₁/2)(1+1/n) log[(4T/π) tanh(πL_A/2T)]`.
/// Non-universal additive constants are omitted.
pub fn strip_and_cylinder_predictions<T: Real>(
    geometry: Geometry,
    l: T,
    t: T,
    l_a: T,
    n: T,
    c1: T,
) -> Result<T> {
    if !(n > T::zero()) {
        return Err(Error::invalid("Rényi index must be positive"));
    }
    if !(l_a > T::zero()) {
        return Err(Error::invalid("L_A must be positive"));
    }
    let pref = c1 * (T::one() + n.recip());
    let half = T::lit(0.5);
    let pi = T::PI();
    let v = match geometry {
        Geometry::InfinitePlane => pref * l_a.ln(),
        Geometry::Cylinder => pref * (l / pi * (pi * l_a / l).sin()).ln(),
        Geometry::Strip => half * pref * ((l + l) / pi * (pi * l_a / l).sin()).ln(),
        Geometry::SemiStrip => {
            if !(t > T::zero()) {
                return Err(Error::invalid("T must be positive"));
            }
            let four = T::lit(4.0);
            half * pref * (four * t / pi * (pi * l_a / (t + t)).tanh()).ln()
        }
    };
    if matches!(geometry, Geometry::Cylinder | Geometry::Strip) && !(l_a < l) {
        return Err(Error::invalid("L_A must be below L"));
    }
    Ok(v)
}
