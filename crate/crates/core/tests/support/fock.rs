//! Brute-force many-body evolution in a fixed-particle-number sector.
//!
//! Basis states are bitmasks (bit x = site x occupied) in Jordan–Wigner
//! order, so `c†_x c_y` picks up the parity of the occupied sites strictly
//! between x and y. Wrap-around bonds are therefore handled exactly.
#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub struct FockSector {
    pub sites: usize,
    pub states: Vec<u32>,
    index: HashMap<u32, usize>,
}

impl FockSector {
    pub fn new(sites: usize, particles: usize) -> Self {
        let states: Vec<u32> = (0u32..1 << sites)
            .filter(|s| s.count_ones() as usize == particles)
            .collect();
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Self {
            sites,
            states,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn product_state(&self, occupied: &[usize]) -> DVector<Complex64> {
        let mask = occupied.iter().fold(0u32, |m, &x| m | 1 << x);
        let mut psi = DVector::zeros(self.dim());
        psi[self.index[&mask]] = Complex64::new(1.0, 0.0);
        psi
    }

    /// `c†_x c_y |s⟩ = sign |s'⟩`.
    pub fn hop(&self, s: u32, x: usize, y: usize) -> Option<(u32, f64)> {
        if s >> y & 1 == 0 {
            return None;
        }
        if x == y {
            return Some((s, 1.0));
        }
        if s >> x & 1 == 1 {
            return None;
        }
        let (lo, hi) = (x.min(y), x.max(y));
        let between = (s >> (lo + 1)) & ((1u32 << (hi - lo - 1)) - 1);
        let sign = if between.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Some(((s & !(1 << y)) | 1 << x, sign))
    }

    /// Many-body matrix of `Σ_{xy} h_{xy} c†_x c_y` for a real single-particle `h`.
    pub fn quadratic(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (j, &s) in self.states.iter().enumerate() {
            for x in 0..self.sites {
                for y in 0..self.sites {
                    if h[(x, y)] == 0.0 {
                        continue;
                    }
                    if let Some((t, sign)) = self.hop(s, x, y) {
                        m[(self.index[&t], j)] += sign * h[(x, y)];
                    }
                }
            }
        }
        m
    }

    /// `⟨ψ|c†_x c_y|ψ⟩`.
    pub fn correlation(&self, psi: &DVector<Complex64>) -> DMatrix<Complex64> {
        let l = self.sites;
        let mut c = DMatrix::zeros(l, l);
        for (j, &s) in self.states.iter().enumerate() {
            for x in 0..l {
                for y in 0..l {
                    if let Some((t, sign)) = self.hop(s, x, y) {
                        c[(x, y)] += psi[self.index[&t]].conj() * psi[j] * sign;
                    }
                }
            }
        }
        c
    }

    /// Eigenvalues of the reduced density matrix of the contiguous block
    /// `start..end`.
    ///
    /// For a number-conserving state the qubit and fermionic reduced density
    /// matrices of a contiguous block coincide.
    pub fn block_spectrum(&self, psi: &DVector<Complex64>, start: usize, end: usize) -> Vec<f64> {
        let width = end - start;
        let block = ((1u32 << width) - 1) << start;
        let mut rest_index: HashMap<u32, Vec<(usize, Complex64)>> = HashMap::new();
        for (j, &s) in self.states.iter().enumerate() {
            let a = ((s & block) >> start) as usize;
            rest_index.entry(s & !block).or_default().push((a, psi[j]));
        }
        let dim = 1usize << width;
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for entries in rest_index.values() {
            for &(a, va) in entries {
                for &(b, vb) in entries {
                    rho[(a, b)] += va * vb.conj();
                }
            }
        }
        rho.symmetric_eigenvalues().iter().copied().collect()
    }

    /// Von Neumann entropy of the contiguous block `start..end`.
    pub fn block_entropy(&self, psi: &DVector<Complex64>, start: usize, end: usize) -> f64 {
        self.block_spectrum(psi, start, end)
            .iter()
            .filter(|&&p| p > 1e-15)
            .map(|&p| -p * p.ln())
            .sum()
    }

    /// Rényi entropy `ln(Tr ρⁿ)/(1−n)` of the block `start..end`.
    pub fn block_renyi(&self, psi: &DVector<Complex64>, start: usize, end: usize, n: f64) -> f64 {
        let tr: f64 = self
            .block_spectrum(psi, start, end)
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p.powf(n))
            .sum();
        tr.ln() / (1.0 - n)
    }
}

/// Real symmetric hopping matrix with `h_{x,x+1} = κ_x`.
pub fn hopping_matrix(kappa: &[f64], periodic: bool) -> DMatrix<f64> {
    let l = kappa.len();
    let mut h = DMatrix::zeros(l, l);
    let bonds = if periodic { l } else { l - 1 };
    for x in 0..bonds {
        let y = (x + 1) % l;
        h[(x, y)] += kappa[x];
        h[(y, x)] += kappa[x];
    }
    h
}

/// `exp(−i t H)` for real symmetric `H`.
pub fn unitary_exp(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let d = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|e| Complex64::from_polar(1.0, -t * e)),
    );
    &v * d * v.transpose()
}

/// One circuit period applied to a many-body state.
pub fn period(
    sector: &FockSector,
    psi: &DVector<Complex64>,
    kappa: &[f64],
    lambda: &[f64],
    tau: f64,
    beta: f64,
    periodic: bool,
) -> DVector<Complex64> {
    let h1 = sector.quadratic(&hopping_matrix(kappa, periodic));
    let mut next = unitary_exp(&h1, 2.0 * tau) * psi;
    for (j, &s) in sector.states.iter().enumerate() {
        let energy: f64 = (0..sector.sites)
            .filter(|&x| s >> x & 1 == 1)
            .map(|x| lambda[x])
            .sum();
        next[j] *= (-2.0 * beta * energy).exp();
    }
    let norm = next.norm();
    next / Complex64::new(norm, 0.0)
}
