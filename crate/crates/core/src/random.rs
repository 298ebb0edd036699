//! Seeded sampling of random states, unitaries, POVMs, and channels.
//! Used by the region optimizer (random restarts, random measurement bases)
//! and by the randomized property suites.

use crate::channels::{MeasurementChannel, StateDependentChannel, StateSource};
use crate::linalg::{CMat, CVec};
use crate::qstate::{DensityOperator, Povm};
use num_complex::Complex64;
use rand::Rng;

/// Standard complex Gaussian via Box-Muller.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    Complex64::new(r * (2.0 * std::f64::consts::PI * u2).cos(), r * (2.0 * std::f64::consts::PI * u2).sin())
        .scale(std::f64::consts::FRAC_1_SQRT_2)
}

pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-ish random pure state.
pub fn random_pure_vector<R: Rng>(rng: &mut R, dim: usize) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| complex_gaussian(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v.unscale(n);
        }
    }
}

pub fn random_pure_state<R: Rng>(rng: &mut R, dim: usize) -> DensityOperator {
    DensityOperator::from_pure(&random_pure_vector(rng, dim)).expect("normalized vector")
}

/// Random full-rank density operator `GG†/Tr(GG†)`.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new_unchecked(m.unscale(tr))
}

/// Haar random unitary from the QR decomposition of a Ginibre matrix with
/// the phase convention fixed.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMat {
    let g = ginibre(rng, dim, dim);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d.unscale(d.norm()) } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase.conj();
        }
    }
    q
}

/// Random CPTP map `H_E ⊗ H_A → H_B` with the given number of Kraus
/// operators, from a Haar random isometry.
pub fn random_kraus_channel<R: Rng>(
    rng: &mut R,
    dim_e: usize,
    dim_a: usize,
    dim_b: usize,
    num_kraus: usize,
) -> StateDependentChannel {
    let din = dim_e * dim_a;
    assert!(dim_b * num_kraus >= din, "isometry needs dimB·k ≥ dimE·dimA");
    let g = ginibre(rng, dim_b * num_kraus, din);
    let qr = g.qr();
    let q = qr.q();
    let kraus: Vec<CMat> = (0..num_kraus)
        .map(|j| q.rows(j * dim_b, dim_b).into_owned())
        .collect();
    StateDependentChannel::new(dim_e, dim_a, dim_b, kraus).expect("isometry blocks are CPTP")
}

/// Random POVM: PSD elements `Λ_j = T^{-1/2} A_j T^{-1/2}` with
/// `A_j = G_j G_j†` and `T = Σ_j A_j`.
pub fn random_povm<R: Rng>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    let parts: Vec<CMat> = (0..outcomes)
        .map(|_| {
            let g = ginibre(rng, dim, dim);
            &g * g.adjoint()
        })
        .collect();
    let mut total = CMat::zeros(dim, dim);
    for p in &parts {
        total += p;
    }
    let (vals, vecs) = crate::linalg::herm_eigen(&total);
    let inv_sqrt = CMat::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(1.0 / vals[i].max(1e-12).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let t_inv_sqrt = &vecs * inv_sqrt * vecs.adjoint();
    let elements = parts
        .into_iter()
        .enumerate()
        .map(|(j, a)| (j.to_string(), &t_inv_sqrt * a * &t_inv_sqrt))
        .collect();
    Povm::new_unchecked(elements)
}

/// Random state-dependent measurement channel with a classical state
/// `S ~ q` (uniform-Dirichlet) copied into `E0 ≡ E ≡ C`, suitable for the
/// single-letter region with classical side information.
pub fn random_classical_csi_measurement<R: Rng>(
    rng: &mut R,
    s_count: usize,
    dim_a: usize,
    outcomes: usize,
) -> (MeasurementChannel, StateSource) {
    let povm = random_povm(rng, s_count * dim_a, outcomes);
    let channel = MeasurementChannel::new(s_count, dim_a, povm).expect("valid povm dims");
    let mut q: Vec<f64> = (0..s_count).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    // Keep every state probability bounded away from zero.
    let total: f64 = q.iter().sum();
    for p in &mut q {
        *p = 0.1 / s_count as f64 + 0.9 * *p / total;
    }
    let total: f64 = q.iter().sum();
    for p in &mut q {
        *p /= total;
    }
    let source = StateSource::classical_copy(&q).expect("normalized pmf");
    (channel, source)
}
