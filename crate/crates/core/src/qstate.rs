//! Finite-dimensional classical-quantum state algebra: density operators,
//! POVMs, hybrid states over named registers, and entropy / mutual
//! information functionals in bits.
//!
//! A [`HybridState`] is a classically-labeled mixture of density operators:
//! each branch carries a label tuple over the classical registers, a weight,
//! and a joint density operator over the quantum registers. A fully quantum
//! state is a hybrid state with a single branch; a fully classical pmf has
//! dimension-one branch states.

use crate::error::{Error, Result};
use crate::linalg::{
    self, herm_eigen, herm_eigenvalues, hermiticity_residual, is_diagonal, kron,
    partial_trace_factors, CMat, CVec,
};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Tolerance for Hermiticity of density operators, `max |M - M†|`.
pub const TOL_HERM: f64 = 1e-10;
/// Floor for the minimum eigenvalue of positive semidefinite operators.
pub const TOL_PSD: f64 = -1e-9;
/// Tolerance for unit trace and weight normalization.
pub const TOL_TRACE: f64 = 1e-10;
/// Tolerance for POVM completeness, `‖Σ_j Λ_j − 1‖_max`.
pub const TOL_POVM: f64 = 1e-9;

const LN2: f64 = std::f64::consts::LN_2;

/// One violated invariant together with the measured residual.
#[derive(Debug, Clone)]
pub struct Violation {
    pub invariant: String,
    pub residual: f64,
}

/// Outcome of validating an object; empty iff every invariant holds.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, invariant: impl Into<String>, residual: f64) {
        self.violations.push(Violation {
            invariant: invariant.into(),
            residual,
        });
    }

    pub fn merge(&mut self, prefix: &str, other: ValidationReport) {
        for v in other.violations {
            self.push(format!("{prefix}: {}", v.invariant), v.residual);
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            write!(f, "all invariants satisfied")
        } else {
            for v in &self.violations {
                writeln!(f, "violated: {} (residual {:.3e})", v.invariant, v.residual)?;
            }
            Ok(())
        }
    }
}

/// Objects that can report their invariant residuals without failing.
pub trait Validate {
    fn validate(&self) -> ValidationReport;
}

/// Binary entropy `h(x) = −(1−x)log₂(1−x) − x log₂ x`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "binary_entropy argument {x} outside [0, 1]"
        )));
    }
    Ok(plogp_bits(x) + plogp_bits(1.0 - x))
}

/// `−p log₂ p` with the `0 log 0 = 0` convention.
fn plogp_bits(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy of a pmf in bits.
pub fn shannon_entropy(pmf: &[f64]) -> f64 {
    pmf.iter().map(|&p| plogp_bits(p)).sum()
}

/// Entropy in bits of a positive semidefinite operator with arbitrary trace,
/// `−Σ λ log₂ λ` over its eigenvalues. Eigenvalues in `[TOL_PSD, 0)` are
/// clipped to zero; anything more negative is an error.
pub(crate) fn entropy_bits_unnormalized(m: &CMat) -> Result<f64> {
    let vals = herm_eigenvalues(m);
    let mut h = 0.0;
    for &v in &vals {
        if v < TOL_PSD {
            return Err(Error::InvalidState(format!(
                "operator is not positive semidefinite (eigenvalue {v:.3e})"
            )));
        }
        h += plogp_bits(v.max(0.0));
    }
    Ok(h)
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    mat: CMat,
}

impl DensityOperator {
    /// Construct and validate.
    pub fn new(mat: CMat) -> Result<Self> {
        let op = Self::new_unchecked(mat);
        let report = op.validate();
        if report.is_valid() {
            Ok(op)
        } else {
            Err(Error::InvalidState(report.to_string().trim_end().to_string()))
        }
    }

    /// Construct without validating; used to build objects for
    /// [`Validate::validate`] reports and for internal states already known
    /// to be valid up to arithmetic rounding.
    pub fn new_unchecked(mat: CMat) -> Self {
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Rank-one state `|ψ⟩⟨ψ|` from a (not necessarily normalized) vector.
    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidState("zero vector cannot be normalized".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self::new_unchecked(&v * v.adjoint()))
    }

    /// Computational-basis state `|i⟩⟨i|`.
    pub fn basis_state(dim: usize, i: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        Self::new_unchecked(m)
    }

    /// Maximally mixed state `1/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new_unchecked(CMat::identity(dim, dim).scale(1.0 / dim as f64))
    }

    /// Diagonal state from a pmf.
    pub fn from_pmf(pmf: &[f64]) -> Self {
        let d = pmf.len();
        let m = CMat::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(pmf[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new_unchecked(m)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::new_unchecked(kron(&self.mat, &other.mat))
    }

    /// Von Neumann entropy `H(ρ) = −Σ λ log₂ λ` in bits.
    ///
    /// Validates positivity and unit trace from the eigenvalues it computes
    /// anyway; eigenvalues in `[−1e-9, 0)` are clipped to zero.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let res = hermiticity_residual(&self.mat);
        if res > TOL_HERM {
            return Err(Error::InvalidState(format!(
                "operator is not Hermitian (residual {res:.3e})"
            )));
        }
        let vals = herm_eigenvalues(&self.mat);
        let total: f64 = vals.iter().sum();
        if (total - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!(
                "operator trace {total} is not 1 (residual {:.3e})",
                (total - 1.0).abs()
            )));
        }
        let mut h = 0.0;
        for &v in &vals {
            if v < TOL_PSD {
                return Err(Error::InvalidState(format!(
                    "operator is not positive semidefinite (eigenvalue {v:.3e})"
                )));
            }
            h += plogp_bits(v.max(0.0));
        }
        Ok(h)
    }

    /// A purification `|φ⟩` on `H ⊗ H` with `Tr_ancilla |φ⟩⟨φ| = ρ`:
    /// spectral decomposition with eigenvalues in descending order,
    /// `|φ⟩ = Σ_i √λ_i |e_i⟩ ⊗ |i⟩`.
    pub fn purify(&self) -> Result<CVec> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::InvalidState(report.to_string().trim_end().to_string()));
        }
        let dim = self.dim();
        let (vals, vecs) = herm_eigen(&self.mat);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
        let mut out = CVec::zeros(dim * dim);
        for (slot, &i) in order.iter().enumerate() {
            let lam = vals[i].max(0.0);
            let amp = lam.sqrt();
            for a in 0..dim {
                out[a * dim + slot] += vecs[(a, i)].scale(amp);
            }
        }
        Ok(out)
    }
}

impl Validate for DensityOperator {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.mat.nrows() != self.mat.ncols() || self.mat.nrows() == 0 {
            report.push(
                format!("density operator must be square and nonempty, got {}x{}", self.mat.nrows(), self.mat.ncols()),
                0.0,
            );
            return report;
        }
        let herm = hermiticity_residual(&self.mat);
        if herm > TOL_HERM {
            report.push("Hermiticity |M - M†|", herm);
        }
        let tr = self.mat.trace().re;
        if (tr - 1.0).abs() > TOL_TRACE {
            report.push("unit trace |Tr(M) - 1|", (tr - 1.0).abs());
        }
        let min_eig = herm_eigenvalues(&self.mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < TOL_PSD {
            report.push("positive semidefiniteness (min eigenvalue)", -min_eig);
        }
        report
    }
}

/// A positive operator-valued measure: labeled PSD elements summing to the
/// identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<(String, CMat)>,
}

impl Povm {
    pub fn new(elements: Vec<(String, CMat)>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidState("POVM must have at least one element".into()));
        }
        let dim = elements[0].1.nrows();
        let povm = Self { dim, elements };
        let report = povm.validate();
        if report.is_valid() {
            Ok(povm)
        } else {
            Err(Error::InvalidState(report.to_string().trim_end().to_string()))
        }
    }

    pub fn new_unchecked(elements: Vec<(String, CMat)>) -> Self {
        let dim = elements.first().map(|(_, m)| m.nrows()).unwrap_or(0);
        Self { dim, elements }
    }

    /// Projective measurement in the computational basis, labels `"0"…"d−1"`.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|i| {
                let mut m = CMat::zeros(dim, dim);
                m[(i, i)] = Complex64::new(1.0, 0.0);
                (i.to_string(), m)
            })
            .collect();
        Self { dim, elements }
    }

    /// The trivial single-outcome measurement (no information extracted).
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![("0".to_string(), CMat::identity(dim, dim))],
        }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMat) -> Self {
        let dim = u.nrows();
        let elements = (0..dim)
            .map(|i| {
                let col = u.column(i).into_owned();
                (i.to_string(), &col * col.adjoint())
            })
            .collect();
        Self { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.elements.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn elements(&self) -> &[(String, CMat)] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &CMat {
        &self.elements[i].1
    }
}

impl Validate for Povm {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.elements.is_empty() {
            report.push("POVM must have at least one element", 0.0);
            return report;
        }
        let mut sum = CMat::zeros(self.dim, self.dim);
        let mut labels = std::collections::BTreeSet::new();
        for (label, m) in &self.elements {
            if m.nrows() != self.dim || m.ncols() != self.dim {
                report.push(
                    format!("element `{label}` has shape {}x{}, expected {}x{}", m.nrows(), m.ncols(), self.dim, self.dim),
                    0.0,
                );
                continue;
            }
            let herm = hermiticity_residual(m);
            if herm > TOL_POVM {
                report.push(format!("element `{label}` Hermiticity"), herm);
            }
            let min_eig = herm_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min);
            if min_eig < TOL_PSD {
                report.push(format!("element `{label}` positive semidefiniteness"), -min_eig);
            }
            if !labels.insert(label.clone()) {
                report.push(format!("duplicate outcome label `{label}`"), 0.0);
            }
            sum += m;
        }
        let completeness = linalg::max_abs_diff(&sum, &CMat::identity(self.dim, self.dim));
        if completeness > TOL_POVM {
            report.push("completeness ‖Σ_j Λ_j − 1‖_max", completeness);
        }
        report
    }
}

/// Kind of a named register: a finite classical alphabet or a quantum system
/// of a given dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum RegisterKind {
    Classical { alphabet: Vec<String> },
    Quantum { dim: usize },
}

/// A named register inside a [`HybridState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    pub name: String,
    pub kind: RegisterKind,
}

impl Register {
    pub fn classical(name: impl Into<String>, alphabet: Vec<String>) -> Self {
        Self {
            name: name.into(),
            kind: RegisterKind::Classical { alphabet },
        }
    }

    /// Classical register whose alphabet is `"0"…"n−1"`.
    pub fn classical_indexed(name: impl Into<String>, size: usize) -> Self {
        Self::classical(name, (0..size).map(|i| i.to_string()).collect())
    }

    pub fn quantum(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            kind: RegisterKind::Quantum { dim },
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(self.kind, RegisterKind::Classical { .. })
    }

    pub fn alphabet_len(&self) -> usize {
        match &self.kind {
            RegisterKind::Classical { alphabet } => alphabet.len(),
            RegisterKind::Quantum { .. } => 0,
        }
    }
}

/// One branch of a hybrid state: a classical label tuple, its weight, and
/// the joint quantum state of that branch.
#[derive(Debug, Clone)]
pub struct Branch {
    pub labels: Vec<usize>,
    pub weight: f64,
    pub state: DensityOperator,
}

/// A classically-labeled mixture of density operators over named registers.
#[derive(Debug, Clone)]
pub struct HybridState {
    registers: Vec<Register>,
    branches: Vec<Branch>,
}

impl HybridState {
    /// Construct, validate, and canonicalize (branches sorted by label tuple).
    pub fn new(registers: Vec<Register>, branches: Vec<Branch>) -> Result<Self> {
        let state = Self::new_unchecked(registers, branches);
        let report = state.validate();
        if report.is_valid() {
            Ok(state)
        } else {
            Err(Error::InvalidState(report.to_string().trim_end().to_string()))
        }
    }

    pub fn new_unchecked(registers: Vec<Register>, mut branches: Vec<Branch>) -> Self {
        branches.sort_by(|a, b| a.labels.cmp(&b.labels));
        Self { registers, branches }
    }

    /// A purely quantum state over a single register.
    pub fn from_density(name: &str, op: DensityOperator) -> Self {
        Self::new_unchecked(
            vec![Register::quantum(name, op.dim())],
            vec![Branch { labels: vec![], weight: 1.0, state: op }],
        )
    }

    /// A purely quantum state over several registers sharing one joint
    /// density operator (factor order = register order).
    pub fn from_joint_density(regs: Vec<(String, usize)>, op: DensityOperator) -> Result<Self> {
        let registers: Vec<Register> = regs
            .iter()
            .map(|(n, d)| Register::quantum(n.clone(), *d))
            .collect();
        let total: usize = regs.iter().map(|(_, d)| d).product();
        if total != op.dim() {
            return Err(Error::DimMismatch(format!(
                "joint density dimension {} does not match register dims (product {})",
                op.dim(),
                total
            )));
        }
        Ok(Self::new_unchecked(
            registers,
            vec![Branch { labels: vec![], weight: 1.0, state: op }],
        ))
    }

    /// A purely classical state over one register.
    pub fn classical(name: &str, alphabet: Vec<String>, pmf: &[f64]) -> Result<Self> {
        if alphabet.len() != pmf.len() {
            return Err(Error::DimMismatch(format!(
                "alphabet size {} does not match pmf length {}",
                alphabet.len(),
                pmf.len()
            )));
        }
        let registers = vec![Register::classical(name, alphabet)];
        let branches = pmf
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| Branch {
                labels: vec![i],
                weight: w,
                state: DensityOperator::new_unchecked(CMat::identity(1, 1)),
            })
            .collect();
        Self::new(registers, branches)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    fn register_index(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Quantum register dims in register order.
    pub fn quantum_dims(&self) -> Vec<usize> {
        self.registers
            .iter()
            .filter_map(|r| match r.kind {
                RegisterKind::Quantum { dim } => Some(dim),
                _ => None,
            })
            .collect()
    }

    pub fn quantum_dim_product(&self) -> usize {
        self.quantum_dims().iter().product()
    }

    /// Marginal over the kept registers. Classical registers are
    /// marginalized by summing branch weights, quantum registers by operator
    /// partial trace; register order is preserved.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<HybridState> {
        for name in keep {
            self.register_index(name)?;
        }
        let keep_flags: Vec<bool> = self
            .registers
            .iter()
            .map(|r| keep.contains(&r.name.as_str()))
            .collect();

        let out_registers: Vec<Register> = self
            .registers
            .iter()
            .zip(&keep_flags)
            .filter(|(_, &k)| k)
            .map(|(r, _)| r.clone())
            .collect();

        // Flags over quantum factors and over classical label positions.
        let q_keep: Vec<bool> = self
            .registers
            .iter()
            .zip(&keep_flags)
            .filter(|(r, _)| !r.is_classical())
            .map(|(_, &k)| k)
            .collect();
        let q_dims = self.quantum_dims();
        let c_keep: Vec<bool> = self
            .registers
            .iter()
            .zip(&keep_flags)
            .filter(|(r, _)| r.is_classical())
            .map(|(_, &k)| k)
            .collect();

        // Group branches by kept classical labels, mixing the traced states.
        let kept_q_total: usize = q_dims
            .iter()
            .zip(&q_keep)
            .filter(|(_, &k)| k)
            .map(|(&d, _)| d)
            .product();
        let mut groups: BTreeMap<Vec<usize>, (f64, CMat)> = BTreeMap::new();
        for branch in &self.branches {
            let kept_labels: Vec<usize> = branch
                .labels
                .iter()
                .zip(&c_keep)
                .filter(|(_, &k)| k)
                .map(|(&l, _)| l)
                .collect();
            let traced = if q_keep.iter().all(|&k| k) {
                branch.state.matrix().clone()
            } else {
                partial_trace_factors(branch.state.matrix(), &q_dims, &q_keep)
            };
            let entry = groups
                .entry(kept_labels)
                .or_insert_with(|| (0.0, CMat::zeros(kept_q_total, kept_q_total)));
            entry.0 += branch.weight;
            entry.1 += traced.scale(branch.weight);
        }

        let branches: Vec<Branch> = groups
            .into_iter()
            .filter(|(_, (w, _))| *w > 0.0)
            .map(|(labels, (w, acc))| Branch {
                labels,
                weight: w,
                state: DensityOperator::new_unchecked(acc.unscale(w)),
            })
            .collect();

        Ok(HybridState::new_unchecked(out_registers, branches))
    }

    /// Entropy in bits of the marginal on `group`.
    pub fn entropy_of(&self, group: &[&str]) -> Result<f64> {
        if group.is_empty() {
            return Err(Error::Domain("entropy group must be nonempty".into()));
        }
        let marginal = self.partial_trace(group)?;
        marginal.entropy()
    }

    /// Entropy in bits of the whole state: `−Σ eigenvalues log₂` over the
    /// block-diagonal operator `Σ_ℓ w_ℓ |ℓ⟩⟨ℓ| ⊗ ρ_ℓ`, i.e. the Shannon
    /// entropy of the weights plus the weighted branch entropies.
    pub fn entropy(&self) -> Result<f64> {
        let mut h = 0.0;
        for branch in &self.branches {
            if branch.weight <= 0.0 {
                continue;
            }
            h += entropy_bits_unnormalized(&branch.state.matrix().scale(branch.weight))?;
        }
        Ok(h)
    }

    /// Quantum mutual information `I(A;B) = H(A) + H(B) − H(AB)` in bits.
    pub fn mutual_information(&self, group_a: &[&str], group_b: &[&str]) -> Result<f64> {
        if group_a.is_empty() || group_b.is_empty() {
            return Err(Error::Domain("mutual information groups must be nonempty".into()));
        }
        for a in group_a {
            if group_b.contains(a) {
                return Err(Error::OverlappingGroups((*a).to_string()));
            }
        }
        let mut joint: Vec<&str> = group_a.to_vec();
        joint.extend_from_slice(group_b);
        let ha = self.entropy_of(group_a)?;
        let hb = self.entropy_of(group_b)?;
        let hab = self.entropy_of(&joint)?;
        let mi = ha + hb - hab;
        // Mutual information is nonnegative; clip subtractive rounding dust
        // so structurally independent groups report exactly zero.
        Ok(if mi < 0.0 && mi > -1e-9 { 0.0 } else { mi })
    }

    /// Weights summed over all branches.
    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }

    /// The pmf over a single classical register's alphabet.
    pub fn classical_pmf(&self, name: &str) -> Result<Vec<f64>> {
        let reg = self
            .register(name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))?;
        let RegisterKind::Classical { alphabet } = &reg.kind else {
            return Err(Error::Domain(format!("register `{name}` is not classical")));
        };
        let marginal = self.partial_trace(&[name])?;
        let mut pmf = vec![0.0; alphabet.len()];
        for b in marginal.branches() {
            pmf[b.labels[0]] += b.weight;
        }
        Ok(pmf)
    }
}

impl Validate for HybridState {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        let mut names = std::collections::BTreeSet::new();
        for r in &self.registers {
            if !names.insert(r.name.clone()) {
                report.push(format!("duplicate register name `{}`", r.name), 0.0);
            }
            if let RegisterKind::Classical { alphabet } = &r.kind {
                if alphabet.is_empty() {
                    report.push(format!("register `{}` has an empty alphabet", r.name), 0.0);
                }
            }
        }

        let classical_sizes: Vec<usize> = self
            .registers
            .iter()
            .filter(|r| r.is_classical())
            .map(|r| r.alphabet_len())
            .collect();
        let q_total = self.quantum_dim_product();

        let mut weight_sum = 0.0;
        let mut seen_labels = std::collections::BTreeSet::new();
        for (i, b) in self.branches.iter().enumerate() {
            if b.weight < 0.0 {
                report.push(format!("branch {i} weight is negative"), -b.weight);
            }
            weight_sum += b.weight;
            if b.labels.len() != classical_sizes.len() {
                report.push(
                    format!(
                        "branch {i} label tuple length {} does not match classical register count {}",
                        b.labels.len(),
                        classical_sizes.len()
                    ),
                    0.0,
                );
            } else {
                for (pos, (&l, &size)) in b.labels.iter().zip(&classical_sizes).enumerate() {
                    if l >= size {
                        report.push(
                            format!("branch {i} label {l} out of range at classical position {pos}"),
                            0.0,
                        );
                    }
                }
                if !seen_labels.insert(b.labels.clone()) {
                    report.push(format!("branch {i} duplicates a classical label tuple"), 0.0);
                }
            }
            if b.state.dim() != q_total {
                report.push(
                    format!(
                        "branch {i} state dim {} does not match quantum register dims (product {q_total})",
                        b.state.dim()
                    ),
                    0.0,
                );
            }
            report.merge(&format!("branch {i} state"), b.state.validate());
        }
        if (weight_sum - 1.0).abs() > TOL_TRACE {
            report.push("branch weights sum to 1", (weight_sum - 1.0).abs());
        }
        report
    }
}

/// Convenience: the maximally entangled pair `Φ_AB` of local dimension `d`
/// over two named quantum registers.
pub fn maximally_entangled(name_a: &str, name_b: &str, d: usize) -> HybridState {
    let mut v = CVec::zeros(d * d);
    let amp = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        v[j * d + j] = Complex64::new(amp, 0.0);
    }
    let op = DensityOperator::from_pure(&v).expect("nonzero vector");
    HybridState::new_unchecked(
        vec![Register::quantum(name_a, d), Register::quantum(name_b, d)],
        vec![Branch { labels: vec![], weight: 1.0, state: op }],
    )
}

/// Entropy agreement helper used by tests and diagnostics: eigenvalue list
/// of a density operator (ascending).
pub fn spectrum(op: &DensityOperator) -> Vec<f64> {
    herm_eigenvalues(op.matrix())
}

/// Check whether a matrix is (numerically) diagonal; re-exported for the
/// fast paths of region evaluation.
pub fn diagonal_within(m: &CMat, tol: f64) -> bool {
    is_diagonal(m, tol)
}

/// Natural-log entropy of a pmf; internal optimizer currency.
pub(crate) fn shannon_entropy_nats(pmf: &[f64]) -> f64 {
    pmf.iter()
        .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
        .sum()
}

pub(crate) fn bits(nats: f64) -> f64 {
    nats / LN2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cplx;
    use approx::assert_relative_eq;

    fn qubit_diag(a: f64, b: f64) -> DensityOperator {
        DensityOperator::from_pmf(&[a, b])
    }

    #[test]
    fn entropy_of_maximally_mixed_qubit_is_one_bit() {
        let rho = DensityOperator::maximally_mixed(2);
        assert_relative_eq!(rho.von_neumann_entropy().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_of_pure_state_is_zero() {
        let psi = CVec::from_vec(vec![cplx(0.6, 0.0), cplx(0.0, 0.8)]);
        let rho = DensityOperator::from_pure(&psi).unwrap();
        assert_relative_eq!(rho.von_neumann_entropy().unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_of_three_quarters_state_matches_binary_entropy() {
        let rho = qubit_diag(0.75, 0.25);
        assert_relative_eq!(rho.von_neumann_entropy().unwrap(), 0.8112781245, epsilon = 1e-9);
        assert_relative_eq!(
            rho.von_neumann_entropy().unwrap(),
            binary_entropy(0.25).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn entropy_rejects_invalid_states() {
        let not_trace_one = DensityOperator::new_unchecked(CMat::identity(2, 2));
        assert!(not_trace_one.von_neumann_entropy().is_err());
        let negative = DensityOperator::new_unchecked(
            CMat::from_fn(2, 2, |i, j| if i == j { cplx(if i == 0 { 1.5 } else { -0.5 }, 0.0) } else { cplx(0.0, 0.0) }),
        );
        assert!(negative.von_neumann_entropy().is_err());
    }

    #[test]
    fn binary_entropy_endpoints_and_midpoint() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(binary_entropy(0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(binary_entropy(0.25).unwrap(), 0.8112781245, epsilon = 1e-9);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn purify_reproduces_the_state_and_canonical_form() {
        let rho = qubit_diag(0.75, 0.25);
        let phi = rho.purify().unwrap();
        let joint = DensityOperator::from_pure(&phi).unwrap();
        let reduced = partial_trace_factors(joint.matrix(), &[2, 2], &[true, false]);
        assert!(linalg::max_abs_diff(&reduced, rho.matrix()) < 1e-9);
        // Canonical amplitudes √(3/4)|00⟩ + √(1/4)|11⟩ up to phase.
        assert_relative_eq!(phi[0].norm(), (0.75f64).sqrt(), epsilon = 1e-9);
        assert_relative_eq!(phi[3].norm(), (0.25f64).sqrt(), epsilon = 1e-9);
        assert!(phi[1].norm() < 1e-9 && phi[2].norm() < 1e-9);

        let pure = DensityOperator::basis_state(2, 0);
        let phi0 = pure.purify().unwrap();
        assert_relative_eq!(phi0[0].norm(), 1.0, epsilon = 1e-9);

        let mixed = DensityOperator::maximally_mixed(2);
        let phim = mixed.purify().unwrap();
        let joint = DensityOperator::from_pure(&phim).unwrap();
        let reduced = partial_trace_factors(joint.matrix(), &[2, 2], &[true, false]);
        assert!(linalg::max_abs_diff(&reduced, mixed.matrix()) < 1e-9);
    }

    #[test]
    fn validation_reports_named_residuals() {
        let bad_trace = DensityOperator::new_unchecked(
            CMat::identity(2, 2).scale(0.505),
        );
        let report = bad_trace.validate();
        assert!(!report.is_valid());
        assert!(report.violations.iter().any(|v| v.invariant.contains("trace") && (v.residual - 0.01).abs() < 1e-12));

        let good = DensityOperator::maximally_mixed(2);
        assert!(good.validate().is_valid());

        let half = CMat::identity(2, 2).scale(0.6);
        let povm = Povm::new_unchecked(vec![("a".into(), half.clone()), ("b".into(), half)]);
        let report = povm.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.invariant.contains("completeness") && (v.residual - 0.2).abs() < 1e-12));
    }

    #[test]
    fn partial_trace_identity_and_entangled_pair() {
        let pair = maximally_entangled("A", "B", 2);
        let same = pair.partial_trace(&["A", "B"]).unwrap();
        assert_eq!(same.branches().len(), 1);
        assert!(linalg::max_abs_diff(same.branches()[0].state.matrix(), pair.branches()[0].state.matrix()) < 1e-14);

        for side in ["A", "B"] {
            let marg = pair.partial_trace(&[side]).unwrap();
            assert!(linalg::max_abs_diff(
                marg.branches()[0].state.matrix(),
                DensityOperator::maximally_mixed(2).matrix()
            ) < 1e-12);
        }
        assert_relative_eq!(pair.entropy_of(&["A", "B"]).unwrap(), 0.0, epsilon = 1e-9);
        assert_relative_eq!(pair.mutual_information(&["A"], &["B"]).unwrap(), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn classical_state_entropy_is_shannon() {
        let s = HybridState::classical("S", vec!["0".into(), "1".into()], &[0.5, 0.5]).unwrap();
        assert_relative_eq!(s.entropy_of(&["S"]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mutual_information_of_product_state_is_zero() {
        let a = DensityOperator::from_pmf(&[0.3, 0.7]);
        let b = DensityOperator::from_pmf(&[0.9, 0.1]);
        let joint = a.tensor(&b);
        let state = HybridState::from_joint_density(
            vec![("A".into(), 2), ("B".into(), 2)],
            DensityOperator::new_unchecked(joint.matrix().clone()),
        )
        .unwrap();
        assert_relative_eq!(state.mutual_information(&["A"], &["B"]).unwrap(), 0.0, epsilon = 1e-10);
        assert!(state.mutual_information(&["A"], &["A"]).is_err());
        assert!(state.entropy_of(&["Z"]).is_err());
    }
}
