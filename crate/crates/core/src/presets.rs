//! Built-in channels and strategies with closed-form rate-leakage curves:
//! the random-parameter depolarizing channel (Pauli selection), the
//! projection channel (state-controlled projection onto a fixed |ψ⟩), its
//! measurement analog, and reference encoders. These serve as ground truth
//! for the region evaluator and the coding simulator.

use crate::channels::{MeasurementChannel, RandomParameterChannel, StateSource};
use crate::error::{Error, Result};
use crate::linalg::{cplx, eye, kron, CMat, CVec};
use crate::qstate::{binary_entropy, DensityOperator, Povm};
use crate::region::{Provenance, RateLeakagePoint, Strategy};
use crate::sim::CustomCoder;

/// Qubit Pauli operators `I, X, Y, Z`.
pub fn pauli(index: usize) -> CMat {
    match index {
        0 => eye(2),
        1 => CMat::from_row_slice(2, 2, &[cplx(0., 0.), cplx(1., 0.), cplx(1., 0.), cplx(0., 0.)]),
        2 => CMat::from_row_slice(2, 2, &[cplx(0., 0.), cplx(0., -1.), cplx(0., 1.), cplx(0., 0.)]),
        3 => CMat::from_row_slice(2, 2, &[cplx(1., 0.), cplx(0., 0.), cplx(0., 0.), cplx(-1., 0.)]),
        _ => panic!("Pauli index must be 0..=3"),
    }
}

/// Default masking-example qubit state `|ψ⟩ = |0⟩`.
pub fn default_psi() -> CVec {
    CVec::from_vec(vec![cplx(1.0, 0.0), cplx(0.0, 0.0)])
}

/// The qubit state orthogonal to `ψ = (a, b)`, namely `(−b̄, ā)`.
pub fn psi_perp(psi: &CVec) -> CVec {
    CVec::from_vec(vec![-psi[1].conj(), psi[0].conj()])
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("ε = {eps} must lie in (0, 1]")))
    }
}

/// Random-parameter depolarizing channel: the state `S ∈ {0,1,2,3}` selects
/// a Pauli that is applied to the input, with
/// `q = (1 − 3ε/4, ε/4, ε/4, ε/4)`. The q-average is the standard
/// depolarizing channel `(1−ε)ρ + επ`.
pub fn build_depolarizing(eps: f64) -> Result<RandomParameterChannel> {
    check_epsilon(eps)?;
    let labels = (0..4).map(|s| s.to_string()).collect();
    let q = vec![1.0 - 0.75 * eps, 0.25 * eps, 0.25 * eps, 0.25 * eps];
    let branches = (0..4).map(|s| vec![pauli(s)]).collect();
    RandomParameterChannel::new(labels, q, branches, 2, 2)
}

/// Random-parameter projection channel: `S ~ Bernoulli(ε)` selects whether
/// the input is replaced by `|ψ⟩⟨ψ|`.
pub fn build_projection(eps: f64, psi: &CVec) -> Result<RandomParameterChannel> {
    check_epsilon(eps)?;
    if psi.len() != 2 {
        return Err(Error::Domain("ψ must be a qubit state".into()));
    }
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "ψ must have unit norm (residual {:.3e})",
            (psi.norm() - 1.0).abs()
        )));
    }
    // ρ ↦ |ψ⟩⟨ψ| Tr(ρ) has Kraus operators |ψ⟩⟨0| and |ψ⟩⟨1|.
    let project = (0..2)
        .map(|b| {
            let mut k = CMat::zeros(2, 2);
            for i in 0..2 {
                k[(i, b)] = psi[i];
            }
            k
        })
        .collect();
    RandomParameterChannel::new(
        vec!["0".into(), "1".into()],
        vec![1.0 - eps, eps],
        vec![vec![eye(2)], project],
        2,
        2,
    )
}

/// The masking strategy family for the projection channel: an auxiliary
/// `V ~ Bernoulli(α)` independent of `S`, with `X = V` when `S = 0` and
/// `X = 0` when `S = 1`; inputs `φ⁰ = |ψ⟩⟨ψ|`, `φ¹ = |ψ⊥⟩⟨ψ⊥|`.
pub fn projection_strategy(alpha: f64) -> Result<Strategy> {
    projection_strategy_with(alpha, &default_psi())
}

pub fn projection_strategy_with(alpha: f64, psi: &CVec) -> Result<Strategy> {
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::Domain(format!("α = {alpha} must lie in [0, 1/2]")));
    }
    let states = vec![
        DensityOperator::from_pure(psi)?,
        DensityOperator::from_pure(&psi_perp(psi))?,
    ];
    Strategy::new(
        Povm::computational(2),
        vec![vec![1.0 - alpha, alpha], vec![1.0, 0.0]],
        states,
    )
}

/// Closed-form rate-leakage point of the projection-channel strategy:
/// `R = (1−ε)h(α)`, `L = h((1−ε)α) − (1−ε)h(α)`.
pub fn projection_analytic(eps: f64, alpha: f64) -> Result<RateLeakagePoint> {
    check_epsilon(eps)?;
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::Domain(format!("α = {alpha} must lie in [0, 1/2]")));
    }
    let rate = (1.0 - eps) * binary_entropy(alpha)?;
    let leakage = binary_entropy((1.0 - eps) * alpha)? - rate;
    Ok(RateLeakagePoint { rate, leakage, n: 1, provenance: Provenance::ClosedForm })
}

/// Measurement analog of the projection channel: apply the projection
/// channel, then measure in the `{ψ, ψ⊥}` basis. In Heisenberg form the
/// POVM on `E ⊗ A` is
/// `Λ_0 = |0⟩⟨0| ⊗ |ψ⟩⟨ψ| + |1⟩⟨1| ⊗ 1` and
/// `Λ_1 = |0⟩⟨0| ⊗ |ψ⊥⟩⟨ψ⊥|`, with a classical source `S ~ Bernoulli(ε)`.
pub fn projection_measurement(eps: f64) -> Result<(MeasurementChannel, StateSource)> {
    check_epsilon(eps)?;
    let psi = default_psi();
    let perp = psi_perp(&psi);
    let psi_proj = DensityOperator::from_pure(&psi)?.matrix().clone();
    let perp_proj = DensityOperator::from_pure(&perp)?.matrix().clone();
    let e0 = DensityOperator::basis_state(2, 0).matrix().clone();
    let e1 = DensityOperator::basis_state(2, 1).matrix().clone();
    let lambda0 = kron(&e0, &psi_proj) + kron(&e1, &eye(2));
    let lambda1 = kron(&e0, &perp_proj);
    let povm = Povm::new_unchecked(vec![("0".into(), lambda0), ("1".into(), lambda1)]);
    let channel = MeasurementChannel::new(2, 2, povm)?;
    let source = StateSource::classical_copy(&[1.0 - eps, eps])?;
    Ok((channel, source))
}

/// The Pauli-correction strategy for the depolarizing channel under the
/// single-letter functional: `X = (b, s)` with `b` a uniform message bit,
/// and input `φ^{(b,s)} = σ_s |b⟩⟨b| σ_s` so the channel action cancels.
pub fn depolarizing_correction_strategy() -> Result<Strategy> {
    let mut pmf = vec![vec![0.0; 8]; 4];
    let mut states = Vec::with_capacity(8);
    for s in 0..4 {
        for b in 0..2 {
            pmf[s][s * 2 + b] = 0.5;
            let sigma = pauli(s);
            let basis = DensityOperator::basis_state(2, b);
            states.push(DensityOperator::new_unchecked(
                &sigma * basis.matrix() * sigma.adjoint(),
            ));
        }
    }
    Strategy::new(Povm::computational(4), pmf, states)
}

/// Correction encoder for the mod-2 additive reference configuration: the
/// message bits are XOR-precompensated against the state sequence, so the
/// end-to-end map `y = (b ⊕ s) ⊕ s = b` is noiseless and state-independent.
pub fn correction_coder() -> CustomCoder {
    fn encode(m: u64, s_n: &[usize], num_messages: u64) -> Vec<usize> {
        let bits = message_bits(m, s_n.len(), num_messages);
        bits.iter().zip(s_n).map(|(&b, &s)| (b + s) % 2).collect()
    }
    fn decode(y_n: &[usize], num_messages: u64) -> u64 {
        bits_to_message(y_n, num_messages)
    }
    CustomCoder { name: "xor_correction", encode, decode }
}

/// Big-endian message bits padded with zeros to length n.
pub(crate) fn message_bits(m: u64, n: usize, num_messages: u64) -> Vec<usize> {
    let used = bit_width(num_messages);
    let mut out = vec![0usize; n];
    for i in 0..used.min(n) {
        out[i] = ((m >> (used - 1 - i)) & 1) as usize;
    }
    out
}

pub(crate) fn bits_to_message(y_n: &[usize], num_messages: u64) -> u64 {
    let used = bit_width(num_messages);
    let mut m = 0u64;
    for i in 0..used.min(y_n.len()) {
        m = (m << 1) | (y_n[i] as u64 & 1);
    }
    m.min(num_messages.saturating_sub(1))
}

fn bit_width(num_messages: u64) -> usize {
    if num_messages <= 1 {
        0
    } else {
        (64 - (num_messages - 1).leading_zeros()) as usize
    }
}
