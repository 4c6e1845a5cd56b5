//! Correlation functions, entropies and mutual information of Gaussian states.

use num_complex::Complex;

use crate::circuit::{Boundary, Frame};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::scalar::Real;

/// Default eigenvalue clamp for entropies.
pub const SPECTRUM_EPS: f64 = 1e-12;

/// `C_{xy} = ⟨c†_x c_y⟩`, a Hermitian projector of trace N.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix<T> {
    c: CMat<T>,
    particles: usize,
}

/// `C = (W W†)ᵀ`.
pub fn correlation_matrix<T: Real>(frame: &Frame<T>) -> CorrelationMatrix<T> {
    let w = frame.orbitals();
    // (W W†)ᵀ = conj(W) Wᵀ = conj(W W†)
    let mut c = w.mul_adjoint(w);
    for v in c.as_mut_slice() {
        *v = v.conj();
    }
    CorrelationMatrix {
        c,
        particles: frame.particles(),
    }
}

impl<T: Real> CorrelationMatrix<T> {
    /// Wraps a matrix, checking hermiticity and the projector property.
    pub fn new(c: CMat<T>, particles: usize) -> Result<Self> {
        if c.rows() != c.cols() {
            return Err(Error::DimensionMismatch {
                expected: c.rows(),
                got: c.cols(),
            });
        }
        let cm = Self { c, particles };
        let tol = T::lit(1e-9).max(T::EPS.sqrt());
        if cm.hermiticity_error() > tol || cm.projector_error() > tol {
            return Err(Error::invalid("matrix is not a Hermitian projector"));
        }
        if (cm.trace() - T::of_usize(particles)).abs() > tol {
            return Err(Error::invalid("trace differs from the particle count"));
        }
        Ok(cm)
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.c
    }

    pub fn sites(&self) -> usize {
        self.c.rows()
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex<T> {
        self.c[(x, y)]
    }

    pub fn trace(&self) -> T {
        self.c.trace().re
    }

    /// `max |C² − C|`.
    pub fn projector_error(&self) -> T {
        self.c.matmul(&self.c).max_abs_diff(&self.c)
    }

    /// `max |C − C†|`.
    pub fn hermiticity_error(&self) -> T {
        self.c.max_abs_diff(&self.c.adjoint())
    }
}

/// States that can report the spectrum of a restricted correlation matrix.
pub trait GaussianState<T: Real> {
    fn sites(&self) -> usize;
    fn particles(&self) -> usize;

    /// Eigenvalues of `C_A` for the listed sites, except possibly some that
    /// are exactly 0 or 1. Such eigenvalues never contribute to entropies,
    /// so implementations may work with the complement or a dual matrix.
    fn entanglement_spectrum(&self, sites: &[usize]) -> Vec<T>;
}

fn complement(sites: &[usize], l: usize) -> Vec<usize> {
    let mut mask = vec![true; l];
    for &s in sites {
        mask[s] = false;
    }
    (0..l).filter(|&x| mask[x]).collect()
}

impl<T: Real> GaussianState<T> for CorrelationMatrix<T> {
    fn sites(&self) -> usize {
        self.c.rows()
    }

    fn particles(&self) -> usize {
        self.particles
    }

    fn entanglement_spectrum(&self, sites: &[usize]) -> Vec<T> {
        let l = self.c.rows();
        if 2 * sites.len() <= l {
            hermitian_eigenvalues(&self.c.select(sites, sites))
        } else {
            let rest = complement(sites, l);
            let mut ev = hermitian_eigenvalues(&self.c.select(&rest, &rest));
            ev.iter_mut().for_each(|v| *v = T::one() - *v);
            ev
        }
    }
}

impl<T: Real> GaussianState<T> for Frame<T> {
    fn sites(&self) -> usize {
        Frame::sites(self)
    }

    fn particles(&self) -> usize {
        Frame::particles(self)
    }

    fn entanglement_spectrum(&self, sites: &[usize]) -> Vec<T> {
        let w = self.orbitals();
        let (l, n) = (w.rows(), w.cols());
        let all: Vec<usize> = (0..n).collect();
        let a = sites.len();
        let b = l - a;
        if a <= b && a <= n {
            let wa = w.select(sites, &all);
            hermitian_eigenvalues(&wa.mul_adjoint(&wa))
        } else if b <= n {
            let wb = w.select(&complement(sites, l), &all);
            let mut ev = hermitian_eigenvalues(&wb.mul_adjoint(&wb));
            ev.iter_mut().for_each(|v| *v = T::one() - *v);
            ev
        } else {
            // Nonzero eigenvalues of W_A W_A† and W_A† W_A coincide.
            let wa = w.select(sites, &all);
            hermitian_eigenvalues(&wa.adjoint_mul(&wa))
        }
    }
}

/// Entropy flavour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RenyiIndex {
    VonNeumann,
    /// `n > 0`, `n ≠ 1`.
    Renyi(f64),
}

impl RenyiIndex {
    /// `n = 1` selects von Neumann.
    pub fn new(n: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::invalid(format!("Rényi index {n} must be positive")));
        }
        Ok(if n == 1.0 {
            RenyiIndex::VonNeumann
        } else {
            RenyiIndex::Renyi(n)
        })
    }

    /// `n` as a number (1 for von Neumann).
    pub fn value(self) -> f64 {
        match self {
            RenyiIndex::VonNeumann => 1.0,
            RenyiIndex::Renyi(n) => n,
        }
    }
}

impl std::fmt::Display for RenyiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenyiIndex::VonNeumann => f.write_str("vN"),
            RenyiIndex::Renyi(n) => write!(f, "{n}"),
        }
    }
}

/// Entropy of a free-fermion mode spectrum, in nats. Eigenvalues within
/// `eps` of 0 or 1 contribute nothing.
pub fn entropy_from_spectrum<T: Real>(spectrum: &[T], index: RenyiIndex, eps: T) -> T {
    let one = T::one();
    let mixed = spectrum.iter().copied().filter(|&x| x > eps && x < one - eps);
    match index {
        RenyiIndex::VonNeumann => mixed.fold(T::zero(), |s, x| {
            s - x * x.ln() - (one - x) * (one - x).ln()
        }),
        RenyiIndex::Renyi(n) => {
            let nt = T::lit(n);
            let sum = mixed.fold(T::zero(), |s, x| s + (x.powf(nt) + (one - x).powf(nt)).ln());
            sum / (one - nt)
        }
    }
}

/// One or more site ranges on a chain of `sites` sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemSpec {
    sites: usize,
    boundary: Boundary,
    /// `(start, length)`; periodic ranges may wrap around.
    intervals: Vec<(usize, usize)>,
}

impl SubsystemSpec {
    pub fn new(sites: usize, boundary: Boundary, intervals: Vec<(usize, usize)>) -> Result<Self> {
        let spec = Self {
            sites,
            boundary,
            intervals,
        };
        let mut mask = vec![false; sites];
        for &(start, len) in &spec.intervals {
            if len == 0 || start >= sites || len > sites {
                return Err(Error::invalid(format!("interval ({start}, {len}) out of range")));
            }
            if boundary == Boundary::Open && start + len > sites {
                return Err(Error::invalid(format!("interval ({start}, {len}) leaves the chain")));
            }
            for k in 0..len {
                let x = (start + k) % sites;
                if std::mem::replace(&mut mask[x], true) {
                    return Err(Error::invalid("intervals overlap"));
                }
            }
        }
        Ok(spec)
    }

    /// A single interval.
    pub fn interval(sites: usize, boundary: Boundary, start: usize, len: usize) -> Result<Self> {
        Self::new(sites, boundary, vec![(start, len)])
    }

    /// Union of two disjoint subsystems of the same chain.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.sites != other.sites || self.boundary != other.boundary {
            return Err(Error::invalid("subsystems live on different chains"));
        }
        let mut iv = self.intervals.clone();
        iv.extend_from_slice(&other.intervals);
        Self::new(self.sites, self.boundary, iv)
    }

    pub fn chain_sites(&self) -> usize {
        self.sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.iter().map(|iv| iv.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Member sites in increasing order.
    pub fn site_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .intervals
            .iter()
            .flat_map(|&(s, len)| (0..len).map(move |k| (s + k) % self.sites))
            .collect();
        v.sort_unstable();
        v
    }
}

/// `S_n(A)` in nats.
pub fn entanglement_entropy<T: Real, S: GaussianState<T> + ?Sized>(
    state: &S,
    subsystem: &SubsystemSpec,
    index: RenyiIndex,
) -> Result<T> {
    if subsystem.chain_sites() != state.sites() {
        return Err(Error::DimensionMismatch {
            expected: state.sites(),
            got: subsystem.chain_sites(),
        });
    }
    let spec = state.entanglement_spectrum(&subsystem.site_indices());
    Ok(entropy_from_spectrum(&spec, index, T::lit(SPECTRUM_EPS)))
}

/// `I_n(A, B) = S_n(A) + S_n(B) − S_n(A∪B)`.
pub fn mutual_information<T: Real, S: GaussianState<T> + ?Sized>(
    state: &S,
    a: &SubsystemSpec,
    b: &SubsystemSpec,
    index: RenyiIndex,
) -> Result<T> {
    let ab = a.union(b)?;
    Ok(entanglement_entropy(state, a, index)? + entanglement_entropy(state, b, index)?
        - entanglement_entropy(state, &ab, index)?)
}

/// How separations are measured for `|C|²` profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileGeometry {
    /// Pairs placed symmetrically about the chain centre, at
    /// 0-based sites `L/2−1−x` and `L/2+x`, separation `r = 2x+1`.
    CenterPairs,
    /// Average of `|C_{x,x+r}|²` over all x on a ring, `r = 1..=L/2`.
    RingAverage,
}

/// `|C|²` as a function of separation.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationProfile<T> {
    pub separation: Vec<usize>,
    pub value: Vec<T>,
}

impl<T: Real> CorrelationProfile<T> {
    pub fn at(&self, r: usize) -> Result<T> {
        self.separation
            .iter()
            .position(|&s| s == r)
            .map(|i| self.value[i])
            .ok_or_else(|| Error::invalid(format!("separation {r} not in profile")))
    }
}

pub fn squared_correlation_profile<T: Real>(
    c: &CorrelationMatrix<T>,
    geometry: ProfileGeometry,
) -> CorrelationProfile<T> {
    let l = c.sites();
    match geometry {
        ProfileGeometry::CenterPairs => {
            let h = l / 2;
            let (separation, value) = (0..h)
                .map(|x| (2 * x + 1, c.get(h - 1 - x, h + x).norm_sqr()))
                .unzip();
            CorrelationProfile { separation, value }
        }
        ProfileGeometry::RingAverage => {
            let inv = T::one() / T::of_usize(l);
            let (separation, value) = (1..=l / 2)
                .map(|r| {
                    let s = (0..l).fold(T::zero(), |s, x| s + c.get(x, (x + r) % l).norm_sqr());
                    (r, s * inv)
                })
                .unzip();
            CorrelationProfile { separation, value }
        }
    }
}

/// Normalized `|C|²` weight at each separation, `f_0 ..= f_{n_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightDistribution<T> {
    pub f: Vec<T>,
}

impl<T: Real> WeightDistribution<T> {
    pub fn n_max(&self) -> usize {
        self.f.len() - 1
    }

    pub fn total(&self) -> T {
        self.f.iter().fold(T::zero(), |s, &v| s + v)
    }
}

/// `f_n = Σ_{(a,b): d(a,b)=n} |C_ab|² / N` over ordered pairs, with `d` the
/// chord distance on a ring or `|a−b|` on an open chain. `Σ f_n = 1`.
pub fn weight_distribution<T: Real>(c: &CorrelationMatrix<T>, boundary: Boundary) -> WeightDistribution<T> {
    let l = c.sites();
    let n_max = match boundary {
        Boundary::Periodic => l / 2,
        Boundary::Open => l - 1,
    };
    let mut f = vec![T::zero(); n_max + 1];
    for a in 0..l {
        for b in 0..l {
            let d = a.abs_diff(b);
            let n = match boundary {
                Boundary::Periodic => d.min(l - d),
                Boundary::Open => d,
            };
            f[n] += c.get(a, b).norm_sqr();
        }
    }
    let inv = T::one() / T::of_usize(c.particles());
    f.iter_mut().for_each(|v| *v *= inv);
    WeightDistribution { f }
}

/// `η = x₁₂x₃₄ / (x₁₃x₂₄)` with `x_ij = sin(π|x_i − x_j|/L)`.
pub fn cross_ratio_periodic<T: Real>(x1: T, x2: T, x3: T, x4: T, l: T) -> Result<T> {
    let xs = [x1, x2, x3, x4];
    for i in 0..4 {
        for j in i + 1..4 {
            let d = (xs[i] - xs[j]).abs() % l;
            if d == T::zero() {
                return Err(Error::invalid("coincident points"));
            }
        }
    }
    let chord = |a: T, b: T| (T::PI() * (a - b).abs() / l).sin();
    Ok(chord(x1, x2) * chord(x3, x4) / (chord(x1, x3) * chord(x2, x4)))
}
