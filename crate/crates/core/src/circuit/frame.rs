use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{orthonormality_error, orthonormalize_columns, CMat};
use crate::scalar::Real;

/// Gaussian state stored as `L×N` orthonormal occupied orbitals.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame<T> {
    w: CMat<T>,
}

/// Sites occupied by the initial product state: `round(L/N·(k−½))`,
/// `k = 1..N`, zero based. At half filling this is 1, 3, 5, ...
pub fn evenly_spaced_sites(sites: usize, particles: usize) -> Vec<usize> {
    let spacing = sites as f64 / particles as f64;
    (1..=particles)
        .map(|k| (spacing * (k as f64 - 0.5)).round() as usize)
        .collect()
}

impl<T: Real> Frame<T> {
    /// Product state occupying the given distinct sites.
    pub fn product(sites: usize, occupied: &[usize]) -> Result<Self> {
        let mut seen = vec![false; sites];
        for &s in occupied {
            if s >= sites || std::mem::replace(&mut seen[s], true) {
                return Err(Error::invalid(format!("bad occupied site {s}")));
            }
        }
        let mut w = CMat::zeros(sites, occupied.len());
        for (k, &s) in occupied.iter().enumerate() {
            w[(s, k)] = Complex::new(T::one(), T::zero());
        }
        Ok(Self { w })
    }

    /// Néel state for half filling, evenly spaced occupations otherwise.
    pub fn neel(sites: usize, particles: usize) -> Result<Self> {
        if particles == 0 || particles >= sites {
            return Err(Error::invalid("particle count must satisfy 0 < N < L"));
        }
        Self::product(sites, &evenly_spaced_sites(sites, particles))
    }

    /// Wraps orbitals that are already orthonormal.
    pub fn from_orbitals(w: CMat<T>) -> Result<Self> {
        if w.cols() == 0 || w.cols() > w.rows() {
            return Err(Error::invalid("frame must have 0 < N ≤ L columns"));
        }
        let err = orthonormality_error(&w);
        if err > T::EPS.sqrt() {
            return Err(Error::invalid(format!(
                "columns not orthonormal (max deviation {err})"
            )));
        }
        Ok(Self { w })
    }

    /// Orthonormalizes arbitrary full-rank columns.
    pub fn from_span(mut w: CMat<T>) -> Result<Self> {
        if w.cols() == 0 || w.cols() > w.rows() {
            return Err(Error::invalid("frame must have 0 < N ≤ L columns"));
        }
        orthonormalize_columns(&mut w, 2)?;
        Ok(Self { w })
    }

    /// Haar-like random frame from complex Gaussian columns.
    pub fn random<R: Rng + ?Sized>(sites: usize, particles: usize, rng: &mut R) -> Result<Self> {
        let w = CMat::from_fn(sites, particles, |_, _| {
            let (a, b): (f64, f64) = (rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            Complex::new(T::lit(a), T::lit(b))
        });
        Self::from_span(w)
    }

    pub fn sites(&self) -> usize {
        self.w.rows()
    }

    pub fn particles(&self) -> usize {
        self.w.cols()
    }

    pub fn orbitals(&self) -> &CMat<T> {
        &self.w
    }

    pub fn into_orbitals(self) -> CMat<T> {
        self.w
    }

    /// `max |W†W − I|`.
    pub fn orthonormality_error(&self) -> T {
        orthonormality_error(&self.w)
    }

    pub(crate) fn orbitals_mut(&mut self) -> &mut CMat<T> {
        &mut self.w
    }

    pub(crate) fn from_raw(w: CMat<T>) -> Self {
        Self { w }
    }

    /// Multiplies row x by `exp(−2β λ_x)` without renormalizing.
    pub(crate) fn scale_rows(&mut self, lambda: &[T], beta: T) {
        let damp = (-(beta + beta)).exp();
        for (x, &l) in lambda.iter().enumerate() {
            if l != T::zero() {
                let f = if l == T::one() { damp } else { (-(beta + beta) * l).exp() };
                for v in self.w.row_mut(x) {
                    *v = v.scale(f);
                }
            }
        }
    }

    pub(crate) fn renormalize(&mut self, passes: usize) -> Result<()> {
        orthonormalize_columns(&mut self.w, passes)
    }
}

/// Applies `exp(−2β H₂)` with `H₂ = Σ λ_x n_x` and restores orthonormality.
pub fn nonunitary_step<T: Real>(frame: &Frame<T>, lambda: &[T], beta: T) -> Result<Frame<T>> {
    if lambda.len() != frame.sites() {
        return Err(Error::DimensionMismatch {
            expected: frame.sites(),
            got: lambda.len(),
        });
    }
    if !(beta >= T::zero()) {
        return Err(Error::invalid("beta must be non-negative"));
    }
    let mut out = frame.clone();
    out.scale_rows(lambda, beta);
    out.renormalize(passes_for_growth((beta + beta).to_f64_lossy()))?;
    Ok(out)
}

/// Cholesky-QR passes needed after a row scaling whose largest log-ratio
/// is `log_growth`. A single pass loses about `κ²·ε` of orthogonality.
pub(crate) fn passes_for_growth(log_growth: f64) -> usize {
    if log_growth > 4.0 {
        2
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn initial_sites() {
        assert_eq!(evenly_spaced_sites(8, 4), vec![1, 3, 5, 7]);
        assert_eq!(evenly_spaced_sites(12, 3), vec![2, 6, 10]);
        let s = evenly_spaced_sites(10, 4);
        assert!(s.windows(2).all(|p| p[0] < p[1]) && *s.last().unwrap() < 10);
    }

    #[test]
    fn product_rejects_duplicates() {
        assert!(Frame::<f64>::product(4, &[1, 1]).is_err());
        assert!(Frame::<f64>::product(4, &[4]).is_err());
        assert!(Frame::<f64>::neel(4, 4).is_err());
    }

    #[test]
    fn two_site_normalization() {
        for beta in [0.0, 0.3, 1.0, 2.5] {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let w = CMat::from_fn(2, 1, |_, _| Complex::new(h, 0.0));
            let f = Frame::from_orbitals(w).unwrap();
            let g = nonunitary_step(&f, &[1.0, 0.0], beta).unwrap();
            let c11 = g.orbitals()[(0, 0)].norm_sqr();
            let e = (-4.0 * beta).exp();
            assert!((c11 - e / (1.0 + e)).abs() < 1e-14);
        }
    }

    #[test]
    fn random_frame_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Frame::<f64>::random(20, 7, &mut rng).unwrap();
        assert!(f.orthonormality_error() < 1e-13);
    }

    #[test]
    fn large_growth_still_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Frame::<f64>::random(30, 10, &mut rng).unwrap();
        let lambda: Vec<f64> = (0..30).map(|x| (x % 2) as f64).collect();
        let g = nonunitary_step(&f, &lambda, 4.0).unwrap();
        assert!(g.orthonormality_error() < 1e-12);
    }

    #[test]
    fn rank_collapse_is_reported() {
        // Both particles live on site 0 and 1; killing both sites makes the span vanish.
        let f = Frame::<f64>::product(4, &[0, 1]).unwrap();
        let err = nonunitary_step(&f, &[1.0, 1.0, 0.0, 0.0], 400.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateState { .. }));
    }
}
