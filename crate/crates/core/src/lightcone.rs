//! Four-site demonstration that a single non-unitary gate creates mutual
//! information between sites no gate sequence connects.
//!
//! Sites are labelled 1..=4 and basis states `|n₁n₂n₃n₄⟩` are indexed by
//! reading the occupations as a binary number, site 1 most significant.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::scalar::Real;

const SITES: usize = 4;
const DIM: usize = 1 << SITES;

fn bit(site: usize) -> usize {
    1 << (SITES - site)
}

fn check_site(site: usize) -> Result<()> {
    if (1..=SITES).contains(&site) {
        Ok(())
    } else {
        Err(Error::invalid(format!("site {site} outside 1..=4")))
    }
}

/// Normalized state of four fermionic modes in the occupation basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallState<T> {
    amplitudes: [Complex<T>; DIM],
}

impl<T: Real> SmallState<T> {
    /// Product state with the given occupations `[n₁, n₂, n₃, n₄]`.
    pub fn basis(occupations: [bool; SITES]) -> Self {
        let index = (1..=SITES)
            .filter(|&s| occupations[s - 1])
            .map(bit)
            .sum::<usize>();
        let mut amplitudes = [Complex::new(T::zero(), T::zero()); DIM];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Self { amplitudes }
    }

    /// `|0101⟩`.
    pub fn initial() -> Self {
        Self::basis([false, true, false, true])
    }

    /// Normalizes arbitrary amplitudes.
    pub fn from_amplitudes(amplitudes: [Complex<T>; DIM]) -> Result<Self> {
        let mut s = Self { amplitudes };
        let norm = s.norm();
        if !(norm > T::zero() && norm.is_finite()) {
            return Err(Error::invalid("amplitudes must have finite nonzero norm"));
        }
        for a in s.amplitudes.iter_mut() {
            *a = *a / norm;
        }
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[Complex<T>; DIM] {
        &self.amplitudes
    }

    /// Amplitude of `|n₁n₂n₃n₄⟩` given as a bit string like `"0101"`.
    pub fn amplitude(&self, occupations: &str) -> Result<Complex<T>> {
        if occupations.len() != SITES || !occupations.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::invalid(format!("`{occupations}` is not a 4-bit string")));
        }
        Ok(self.amplitudes[usize::from_str_radix(occupations, 2).expect("checked")])
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |s, v| s + v)
            .sqrt()
    }

    /// Reduced density matrix on `sites` (in the given order, first site
    /// most significant).
    pub fn reduced_density_matrix(&self, sites: &[usize]) -> Result<CMat<T>> {
        for (k, &s) in sites.iter().enumerate() {
            check_site(s)?;
            if sites[..k].contains(&s) {
                return Err(Error::invalid(format!("site {s} listed twice")));
            }
        }
        let local = |index: usize| {
            sites
                .iter()
                .fold(0, |acc, &s| (acc << 1) | usize::from(index & bit(s) != 0))
        };
        let kept: usize = sites.iter().map(|&s| bit(s)).sum();
        let dim = 1 << sites.len();
        let mut rho = CMat::zeros(dim, dim);
        for i in 0..DIM {
            for j in 0..DIM {
                if i & !kept == j & !kept {
                    let (a, b) = (local(i), local(j));
                    let v = self.amplitudes[i] * self.amplitudes[j].conj();
                    rho.row_mut(a)[b] += v;
                }
            }
        }
        Ok(rho)
    }
}

/// Applies the two-site gate that is the identity on `|00⟩`, `|11⟩` and
/// acts as `[[1, 1], [−1, 1]]/√2` on `(|01⟩, |10⟩)` of sites `(i, j)`.
pub fn apply_two_site_gate<T: Real>(state: &SmallState<T>, i: usize, j: usize) -> Result<SmallState<T>> {
    check_site(i)?;
    check_site(j)?;
    if i == j {
        return Err(Error::invalid("gate needs two distinct sites"));
    }
    let (bi, bj) = (bit(i), bit(j));
    let r = T::FRAC_1_SQRT_2();
    let mut out = state.clone();
    for idx in 0..DIM {
        // idx01: n_i = 0, n_j = 1.
        if idx & bi != 0 || idx & bj == 0 {
            continue;
        }
        let idx10 = idx ^ bi ^ bj;
        let (a01, a10) = (state.amplitudes[idx], state.amplitudes[idx10]);
        out.amplitudes[idx] = (a01 + a10) * r;
        out.amplitudes[idx10] = (a10 - a01) * r;
    }
    Ok(out)
}

/// `e^{−β n_site}|ψ⟩`, renormalized. Negative `β` amplifies the occupied
/// branch instead.
pub fn apply_weak_measurement<T: Real>(state: &SmallState<T>, site: usize, beta: T) -> Result<SmallState<T>> {
    check_site(site)?;
    if !beta.is_finite() {
        return Err(Error::invalid("β must be finite"));
    }
    let b = bit(site);
    let damp = (-beta).exp();
    let mut amplitudes = state.amplitudes;
    for (idx, a) in amplitudes.iter_mut().enumerate() {
        if idx & b != 0 {
            *a = a.scale(damp);
        }
    }
    SmallState::from_amplitudes(amplitudes).map_err(|_| Error::DegenerateState {
        step: None,
        reason: format!("measurement on site {site} annihilated the state"),
    })
}

fn von_neumann<T: Real>(rho: &CMat<T>) -> T {
    hermitian_eigenvalues(rho)
        .into_iter()
        .filter(|&p| p > T::zero())
        .fold(T::zero(), |s, p| s - p * p.ln())
}

/// `S(ρ₁) + S(ρ₄) − S(ρ₁₄)` in nats.
pub fn mutual_information_14<T: Real>(state: &SmallState<T>) -> T {
    let s1 = von_neumann(&state.reduced_density_matrix(&[1]).expect("valid sites"));
    let s4 = von_neumann(&state.reduced_density_matrix(&[4]).expect("valid sites"));
    let s14 = von_neumann(&state.reduced_density_matrix(&[1, 4]).expect("valid sites"));
    s1 + s4 - s14
}

/// `U₂₃U₃₄U₁₂|0101⟩`.
pub fn unitary_sequence<T: Real>() -> SmallState<T> {
    let s = SmallState::initial();
    let s = apply_two_site_gate(&s, 1, 2).expect("valid sites");
    let s = apply_two_site_gate(&s, 3, 4).expect("valid sites");
    apply_two_site_gate(&s, 2, 3).expect("valid sites")
}

/// The unitary sequence followed by `e^{−β n₂}`.
pub fn light_cone_protocol<T: Real>(beta: T) -> Result<SmallState<T>> {
    apply_weak_measurement(&unitary_sequence(), 2, beta)
}
