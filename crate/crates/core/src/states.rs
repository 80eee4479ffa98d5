// SPDX-License-Identifier: Apache-2.0

//! Probe states and seeded random states.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{validate_density, ComplexMatrix, DensityMatrix, C64};

/// Named two-qubit probe states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProbeState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
    /// ½(|00⟩ + |01⟩ + |10⟩ − |11⟩).
    Alpha,
}

impl ProbeState {
    pub const ALL: [ProbeState; 5] =
        [ProbeState::PhiPlus, ProbeState::PhiMinus, ProbeState::PsiPlus, ProbeState::PsiMinus, ProbeState::Alpha];

    pub fn ket(self) -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| C64::new(x, 0.0);
        match self {
            ProbeState::PhiPlus => [r(h), r(0.0), r(0.0), r(h)],
            ProbeState::PhiMinus => [r(h), r(0.0), r(0.0), r(-h)],
            ProbeState::PsiPlus => [r(0.0), r(h), r(h), r(0.0)],
            ProbeState::PsiMinus => [r(0.0), r(h), r(-h), r(0.0)],
            ProbeState::Alpha => [r(0.5), r(0.5), r(0.5), r(-0.5)],
        }
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::from_ket(&self.ket()).expect("probe kets are normalized")
    }

    /// Bell-diagonal correlation triple (c₁, c₂, c₃), if the state is Bell diagonal.
    pub fn bloch_triple(self) -> Option<[f64; 3]> {
        match self {
            ProbeState::PhiPlus => Some([1.0, -1.0, 1.0]),
            ProbeState::PhiMinus => Some([-1.0, 1.0, 1.0]),
            ProbeState::PsiPlus => Some([1.0, 1.0, -1.0]),
            ProbeState::PsiMinus => Some([-1.0, -1.0, -1.0]),
            ProbeState::Alpha => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProbeState::PhiPlus => "phi+",
            ProbeState::PhiMinus => "phi-",
            ProbeState::PsiPlus => "psi+",
            ProbeState::PsiMinus => "psi-",
            ProbeState::Alpha => "alpha",
        }
    }
}

impl fmt::Display for ProbeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProbeState::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown probe state '{s}' (expected phi+, phi-, psi+, psi-, alpha)"))
    }
}

/// Standard basis ket |index⟩ in dimension d.
pub fn basis_ket(d: usize, index: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[index] = C64::new(1.0, 0.0);
    v
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary by Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian_complex(rng)).collect();
        for u in &cols {
            let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= overlap * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Random full-rank density matrix A A† / tr(A A†) with Gaussian A.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let a = ComplexMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let m = &a * &a.adjoint();
    let tr = m.trace().re;
    validate_density(m.scale_real(1.0 / tr).hermitian_part()).expect("Gaussian Wishart state is valid")
}

/// Random pure state.
pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let v: Vec<C64> = (0..d).map(|_| gaussian_complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v: Vec<C64> = v.into_iter().map(|z| z / norm).collect();
    DensityMatrix::from_ket(&v).expect("normalized")
}

/// (U ⊗ V) ρ (U ⊗ V)†.
pub fn apply_local_unitaries(rho: &DensityMatrix, u: &ComplexMatrix, v: &ComplexMatrix) -> DensityMatrix {
    let w = u.kron(v);
    validate_density(w.sandwich(rho.matrix()).hermitian_part()).expect("unitary conjugation keeps the state valid")
}

/// |φ⁺⟩ rotated by `count` seeded random local unitaries.
pub fn rotated_phi_plus<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<DensityMatrix> {
    let phi = ProbeState::PhiPlus.density();
    (0..count)
        .map(|_| {
            let u = random_unitary(2, rng);
            let v = random_unitary(2, rng);
            apply_local_unitaries(&phi, &u, &v)
        })
        .collect()
}
