//! Models of the state-dependent channel `N_{EA→B}`: operator-sum (Kraus)
//! channels, the measurement-channel specialization with classical output,
//! random-parameter channels selected by a classical state `S ~ q(s)`, and
//! the entangled channel-state source `|φ_{E0 E C}⟩`, together with n-letter
//! product extension.
//!
//! Register naming is fixed across the crate: the source occupies `E0`
//! (side-information system), `E` (channel state), `C` (masked system); the
//! encoder input is `A`; the channel output is `B` for quantum output and the
//! classical register `Y` for measurement channels.

pub mod json;

use crate::error::{Error, Result};
use crate::linalg::{
    eye, factor_permutation_matrix, kron, max_abs_diff, partial_trace_factors,
    permute_matrix_factors, permute_vector_factors, CMat, CVec,
};
use crate::qstate::{
    Branch, DensityOperator, HybridState, Povm, Register, RegisterKind, Validate,
    ValidationReport, TOL_TRACE,
};
use num_complex::Complex64;

/// Tolerance for trace preservation of operator-sum maps.
pub const TOL_TP: f64 = 1e-9;

/// Quantum-output portion of [`product_channel`] is capped here.
pub const MAX_PRODUCT_QUANTUM: usize = 2;
/// Measurement-channel portion of [`product_channel`] is capped here.
pub const MAX_PRODUCT_MEASUREMENT: usize = 10;
/// Materialized product operators may not exceed this dimension.
pub const MAX_PRODUCT_DIM: usize = 4096;

/// A CPTP map `H_E ⊗ H_A → H_B` in operator-sum form; each Kraus operator is
/// a `dimB × (dimE·dimA)` matrix.
#[derive(Debug, Clone)]
pub struct StateDependentChannel {
    dim_e: usize,
    dim_a: usize,
    dim_b: usize,
    kraus: Vec<CMat>,
}

impl StateDependentChannel {
    pub fn new(dim_e: usize, dim_a: usize, dim_b: usize, kraus: Vec<CMat>) -> Result<Self> {
        let ch = Self { dim_e, dim_a, dim_b, kraus };
        let report = ch.validate();
        if report.is_valid() {
            Ok(ch)
        } else {
            Err(Error::InvalidState(report.to_string().trim_end().to_string()))
        }
    }

    /// The identity channel on `A` (no channel state, `dimE = 1`).
    pub fn identity(dim_a: usize) -> Self {
        Self {
            dim_e: 1,
            dim_a,
            dim_b: dim_a,
            kraus: vec![eye(dim_a)],
        }
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }
    pub fn dim_b(&self) -> usize {
        self.dim_b
    }
    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// Apply to a density operator on `E ⊗ A ⊗ R`, returning one on `B ⊗ R`.
    /// `dim_rest` may be 1.
    pub fn apply_matrix(&self, rho: &CMat, dim_rest: usize) -> Result<CMat> {
        let din = self.dim_e * self.dim_a * dim_rest;
        if rho.nrows() != din {
            return Err(Error::DimMismatch(format!(
                "channel expects input dim {din} (E={} ⊗ A={} ⊗ rest={dim_rest}), got {}",
                self.dim_e,
                self.dim_a,
                rho.nrows()
            )));
        }
        let dout = self.dim_b * dim_rest;
        let mut out = CMat::zeros(dout, dout);
        for k in &self.kraus {
            let kk = if dim_rest == 1 { k.clone() } else { kron(k, &eye(dim_rest)) };
            out += &kk * rho * kk.adjoint();
        }
        Ok(out)
    }
}

impl Validate for StateDependentChannel {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.kraus.is_empty() {
            report.push("channel must have at least one Kraus operator", 0.0);
            return report;
        }
        let din = self.dim_e * self.dim_a;
        let mut sum = CMat::zeros(din, din);
        for (i, k) in self.kraus.iter().enumerate() {
            if k.nrows() != self.dim_b || k.ncols() != din {
                report.push(
                    format!(
                        "Kraus operator {i} has shape {}x{}, expected {}x{din}",
                        k.nrows(),
                        k.ncols(),
                        self.dim_b
                    ),
                    0.0,
                );
                continue;
            }
            sum += k.adjoint() * k;
        }
        let tp = max_abs_diff(&sum, &eye(din));
        if tp > TOL_TP {
            report.push("trace preservation ‖Σ_k K†K − 1_EA‖_max", tp);
        }
        report
    }
}

/// A measurement (quantum-classical) channel on `H_E ⊗ H_A`: the output is
/// the classical outcome of a POVM, `M(ρ) = Σ_y Tr(Λ_y ρ)|y⟩⟨y|`.
#[derive(Debug, Clone)]
pub struct MeasurementChannel {
    dim_e: usize,
    dim_a: usize,
    povm: Povm,
}

impl MeasurementChannel {
    pub fn new(dim_e: usize, dim_a: usize, povm: Povm) -> Result<Self> {
        if povm.dim() != dim_e * dim_a {
            return Err(Error::DimMismatch(format!(
                "POVM dim {} does not match dimE·dimA = {}",
                povm.dim(),
                dim_e * dim_a
            )));
        }
        let mut labels = std::collections::BTreeSet::new();
        for l in povm.labels() {
            if !labels.insert(l.to_string()) {
                return Err(Error::InvalidState(format!(
                    "output labels must be in bijection with POVM elements; `{l}` repeats"
                )));
            }
        }
        let report = povm.validate();
        if !report.is_valid() {
            return Err(Error::InvalidState(report.to_string().trim_end().to_string()));
        }
        Ok(Self { dim_e, dim_a, povm })
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }
    pub fn povm(&self) -> &Povm {
        &self.povm
    }
    pub fn outcomes(&self) -> Vec<String> {
        self.povm.labels().iter().map(|s| s.to_string()).collect()
    }
    pub fn num_outcomes(&self) -> usize {
        self.povm.len()
    }
}

impl Validate for MeasurementChannel {
    fn validate(&self) -> ValidationReport {
        let mut report = self.povm.validate();
        if self.povm.dim() != self.dim_e * self.dim_a {
            report.push(
                format!(
                    "POVM dim {} does not match dimE·dimA = {}",
                    self.povm.dim(),
                    self.dim_e * self.dim_a
                ),
                0.0,
            );
        }
        report
    }
}

/// The entangled channel-state source `|φ⟩` on `H_{E0} ⊗ H_E ⊗ H_C`.
#[derive(Debug, Clone)]
pub struct StateSource {
    dim_e0: usize,
    dim_e: usize,
    dim_c: usize,
    vector: CVec,
}

impl StateSource {
    pub fn new(dim_e0: usize, dim_e: usize, dim_c: usize, vector: CVec) -> Result<Self> {
        let src = Self { dim_e0, dim_e, dim_c, vector };
        let report = src.validate();
        if report.is_valid() {
            Ok(src)
        } else {
            Err(Error::InvalidState(report.to_string().trim_end().to_string()))
        }
    }

    /// The trivial (stateless) source: all three systems one-dimensional.
    pub fn trivial() -> Self {
        Self {
            dim_e0: 1,
            dim_e: 1,
            dim_c: 1,
            vector: CVec::from_element(1, Complex64::new(1.0, 0.0)),
        }
    }

    /// A classical random parameter `S ~ q` copied into all three systems,
    /// `Σ_s √q(s) |s⟩_{E0} |s⟩_E |s⟩_C`.
    pub fn classical_copy(q: &[f64]) -> Result<Self> {
        let s = q.len();
        if s == 0 {
            return Err(Error::Domain("state pmf must be nonempty".into()));
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!(
                "state pmf sums to {total}, expected 1"
            )));
        }
        let mut v = CVec::zeros(s * s * s);
        for (i, &p) in q.iter().enumerate() {
            if p < 0.0 {
                return Err(Error::InvalidState(format!("state pmf entry {i} is negative")));
            }
            v[(i * s + i) * s + i] = Complex64::new(p.sqrt(), 0.0);
        }
        Ok(Self { dim_e0: s, dim_e: s, dim_c: s, vector: v })
    }

    pub fn dim_e0(&self) -> usize {
        self.dim_e0
    }
    pub fn dim_e(&self) -> usize {
        self.dim_e
    }
    pub fn dim_c(&self) -> usize {
        self.dim_c
    }
    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn density(&self) -> CMat {
        &self.vector * self.vector.adjoint()
    }

    /// Measure `E0` with the given POVM: for each outcome `s`, the
    /// probability `p(s) = Tr((Λ_s ⊗ 1_EC) φ)` and the normalized
    /// post-measurement state `σ^s_{EC}`. For the remaining systems the
    /// `Λ^{1/2}`-sandwich update and `Tr_{E0}[(Λ_s ⊗ 1) φ]` coincide, because
    /// the measured system is traced out. Outcomes with probability below
    /// `1e-15` are dropped.
    pub fn measure_csi(&self, povm: &Povm) -> Result<Vec<(usize, f64, CMat)>> {
        if povm.dim() != self.dim_e0 {
            return Err(Error::DimMismatch(format!(
                "CSI POVM dim {} does not match dimE0 = {}",
                povm.dim(),
                self.dim_e0
            )));
        }
        let phi = self.density();
        let dims = [self.dim_e0, self.dim_e * self.dim_c];
        let mut out = Vec::with_capacity(povm.len());
        for (s, (_, lambda)) in povm.elements().iter().enumerate() {
            let projected = kron(lambda, &eye(self.dim_e * self.dim_c)) * &phi;
            let sigma = partial_trace_factors(&projected, &dims, &[false, true]);
            let p = sigma.trace().re;
            if p > 1e-15 {
                out.push((s, p, sigma.unscale(p)));
            }
        }
        Ok(out)
    }

    /// n-fold product source on grouped systems `E0^n, E^n, C^n`.
    pub fn product(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("product power must be at least 1".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let mut vec = self.vector.clone();
        let mut dims = vec![self.dim_e0, self.dim_e, self.dim_c];
        for _ in 1..n {
            vec = CVec::from_vec(
                vec.iter()
                    .flat_map(|&a| self.vector.iter().map(move |&b| a * b))
                    .collect(),
            );
            dims.extend_from_slice(&[self.dim_e0, self.dim_e, self.dim_c]);
        }
        // Group factors: all E0 copies, then all E copies, then all C copies.
        let mut perm = Vec::with_capacity(dims.len());
        for offset in 0..3 {
            for copy in 0..n {
                perm.push(copy * 3 + offset);
            }
        }
        let grouped = permute_vector_factors(&vec, &dims, &perm);
        Ok(Self {
            dim_e0: self.dim_e0.pow(n as u32),
            dim_e: self.dim_e.pow(n as u32),
            dim_c: self.dim_c.pow(n as u32),
            vector: grouped,
        })
    }
}

impl Validate for StateSource {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let expect = self.dim_e0 * self.dim_e * self.dim_c;
        if self.vector.len() != expect {
            report.push(
                format!(
                    "source vector length {} does not match dimE0·dimE·dimC = {expect}",
                    self.vector.len()
                ),
                0.0,
            );
            return report;
        }
        let norm = self.vector.norm();
        if (norm - 1.0).abs() > TOL_TRACE {
            report.push("source vector unit norm", (norm - 1.0).abs());
        }
        report
    }
}

/// A channel selected by a classical random variable `S ~ q(s)` out of a
/// family of CPTP maps on `H_A`.
#[derive(Debug, Clone)]
pub struct RandomParameterChannel {
    labels: Vec<String>,
    q: Vec<f64>,
    /// Kraus operators per branch, each `dimB × dimA`.
    branches: Vec<Vec<CMat>>,
    dim_a: usize,
    dim_b: usize,
}

impl RandomParameterChannel {
    pub fn new(
        labels: Vec<String>,
        q: Vec<f64>,
        branches: Vec<Vec<CMat>>,
        dim_a: usize,
        dim_b: usize,
    ) -> Result<Self> {
        let ch = Self { labels, q, branches, dim_a, dim_b };
        let report = ch.validate();
        if report.is_valid() {
            Ok(ch)
        } else {
            Err(Error::InvalidState(report.to_string().trim_end().to_string()))
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn q(&self) -> &[f64] {
        &self.q
    }
    pub fn branch_kraus(&self, s: usize) -> &[CMat] {
        &self.branches[s]
    }
    pub fn num_states(&self) -> usize {
        self.q.len()
    }
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }
    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Apply branch `s` to an input state on `A`.
    pub fn apply_branch(&self, s: usize, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_b, self.dim_b);
        for k in &self.branches[s] {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// The q-averaged channel `Σ_s q(s) N^{(s)}`.
    pub fn apply_average(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_b, self.dim_b);
        for (s, &p) in self.q.iter().enumerate() {
            out += self.apply_branch(s, rho).scale(p);
        }
        out
    }

    /// Lift to the general form: the source copies `S ~ q` into
    /// `E0 ≡ E ≡ C ≡ S` and the channel applies branch `s` controlled on `E`.
    pub fn lift(&self) -> Result<(StateDependentChannel, StateSource)> {
        let s_count = self.q.len();
        let source = StateSource::classical_copy(&self.q)?;
        let mut kraus = Vec::new();
        for (s, branch) in self.branches.iter().enumerate() {
            // ⟨s|_E ⊗ 1_A as a dimA × (s_count·dimA) selector.
            let mut selector = CMat::zeros(self.dim_a, s_count * self.dim_a);
            for a in 0..self.dim_a {
                selector[(a, s * self.dim_a + a)] = Complex64::new(1.0, 0.0);
            }
            for k in branch {
                kraus.push(k * &selector);
            }
        }
        let channel = StateDependentChannel::new(s_count, self.dim_a, self.dim_b, kraus)?;
        Ok((channel, source))
    }
}

impl Validate for RandomParameterChannel {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.labels.len() != self.q.len() || self.branches.len() != self.q.len() {
            report.push(
                format!(
                    "alphabet ({}), pmf ({}) and branch ({}) counts must agree",
                    self.labels.len(),
                    self.q.len(),
                    self.branches.len()
                ),
                0.0,
            );
            return report;
        }
        let total: f64 = self.q.iter().sum();
        if (total - 1.0).abs() > TOL_TRACE {
            report.push("state pmf sums to 1", (total - 1.0).abs());
        }
        for (s, &p) in self.q.iter().enumerate() {
            if p < 0.0 {
                report.push(format!("state pmf entry {s} is negative"), -p);
            }
        }
        for (s, branch) in self.branches.iter().enumerate() {
            let mut sum = CMat::zeros(self.dim_a, self.dim_a);
            let mut shape_ok = true;
            for k in branch {
                if k.nrows() != self.dim_b || k.ncols() != self.dim_a {
                    report.push(format!("branch `{}` Kraus shape", self.labels[s]), 0.0);
                    shape_ok = false;
                    break;
                }
                sum += k.adjoint() * k;
            }
            if shape_ok {
                let tp = max_abs_diff(&sum, &eye(self.dim_a));
                if tp > TOL_TP {
                    report.push(format!("branch `{}` trace preservation", self.labels[s]), tp);
                }
            }
        }
        report
    }
}

/// Either output flavour of a state-dependent channel.
#[derive(Debug, Clone)]
pub enum Channel {
    Kraus(StateDependentChannel),
    Measurement(MeasurementChannel),
}

impl Channel {
    pub fn dim_e(&self) -> usize {
        match self {
            Channel::Kraus(c) => c.dim_e(),
            Channel::Measurement(c) => c.dim_e(),
        }
    }

    pub fn dim_a(&self) -> usize {
        match self {
            Channel::Kraus(c) => c.dim_a(),
            Channel::Measurement(c) => c.dim_a(),
        }
    }

    /// Output dimension: `dimB` for quantum output, `|Y|` for classical.
    pub fn output_size(&self) -> usize {
        match self {
            Channel::Kraus(c) => c.dim_b(),
            Channel::Measurement(c) => c.num_outcomes(),
        }
    }

    pub fn output_register_name(&self) -> &'static str {
        match self {
            Channel::Kraus(_) => "B",
            Channel::Measurement(_) => "Y",
        }
    }

    /// Apply to a hybrid state with quantum registers `E` and `A`; they are
    /// consumed and replaced (at E's position) by the output register.
    pub fn apply(&self, state: &HybridState) -> Result<HybridState> {
        apply_channel(self, state)
    }

    /// n-fold tensor product with grouped systems `E^n, A^n → B^n` (or `Y^n`).
    pub fn product(&self, n: usize) -> Result<Channel> {
        product_channel(self, n)
    }
}

impl Validate for Channel {
    fn validate(&self) -> ValidationReport {
        match self {
            Channel::Kraus(c) => c.validate(),
            Channel::Measurement(c) => c.validate(),
        }
    }
}

fn locate_e_a(state: &HybridState, dim_e: usize, dim_a: usize) -> Result<()> {
    for (name, dim) in [("E", dim_e), ("A", dim_a)] {
        match state.register(name) {
            Some(Register { kind: RegisterKind::Quantum { dim: d }, .. }) if *d == dim => {}
            Some(Register { kind: RegisterKind::Quantum { dim: d }, .. }) => {
                return Err(Error::DimMismatch(format!(
                    "register `{name}` has dim {d}, channel expects {dim}"
                )));
            }
            Some(_) => {
                return Err(Error::DimMismatch(format!("register `{name}` is classical")));
            }
            None => return Err(Error::UnknownRegister(name.to_string())),
        }
    }
    Ok(())
}

/// Shared plumbing for channel application: permutes each branch state to
/// `(E, A, rest)` factor order, applies the map, and rebuilds the register
/// list with the output register in `E`'s slot and `A` removed.
fn apply_channel(channel: &Channel, state: &HybridState) -> Result<HybridState> {
    let dim_e = channel.dim_e();
    let dim_a = channel.dim_a();
    locate_e_a(state, dim_e, dim_a)?;

    let q_names: Vec<&str> = state
        .registers()
        .iter()
        .filter(|r| !r.is_classical())
        .map(|r| r.name.as_str())
        .collect();
    let q_dims = state.quantum_dims();
    let e_pos = q_names.iter().position(|&n| n == "E").unwrap();
    let a_pos = q_names.iter().position(|&n| n == "A").unwrap();

    // Input permutation: E, A first, the rest in original order.
    let mut perm = vec![e_pos, a_pos];
    let rest: Vec<usize> = (0..q_names.len()).filter(|&i| i != e_pos && i != a_pos).collect();
    perm.extend_from_slice(&rest);
    let dim_rest: usize = rest.iter().map(|&i| q_dims[i]).product();

    // Output register list: E's slot becomes the output register, A is removed.
    let out_name = channel.output_register_name();
    let mut out_registers = Vec::new();
    for r in state.registers() {
        if r.name == "A" {
            continue;
        }
        if r.name == "E" {
            out_registers.push(match channel {
                Channel::Kraus(c) => Register::quantum(out_name, c.dim_b()),
                Channel::Measurement(c) => Register::classical(out_name, c.outcomes()),
            });
        } else {
            out_registers.push(r.clone());
        }
    }

    // Where the new classical label must be spliced for measurement output.
    let y_label_pos = out_registers
        .iter()
        .filter(|r| r.is_classical())
        .position(|r| r.name == out_name);

    // Quantum factor order of the output register list, as indices into
    // [out, rest...] produced by the channel action.
    let out_q_names: Vec<&str> = out_registers
        .iter()
        .filter(|r| !r.is_classical())
        .map(|r| r.name.as_str())
        .collect();
    let rest_names: Vec<&str> = rest.iter().map(|&i| q_names[i]).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&i| q_dims[i]).collect();

    let mut out_branches = Vec::new();
    for branch in state.branches() {
        let permuted = permute_matrix_factors(branch.state.matrix(), &q_dims, &perm);
        match channel {
            Channel::Kraus(c) => {
                let mapped = c.apply_matrix(&permuted, dim_rest)?;
                // Reorder [B, rest...] to match the output register list.
                let mut factor_dims = vec![c.dim_b()];
                factor_dims.extend_from_slice(&rest_dims);
                let mut factor_names: Vec<&str> = vec![out_name];
                factor_names.extend_from_slice(&rest_names);
                let out_perm: Vec<usize> = out_q_names
                    .iter()
                    .map(|n| factor_names.iter().position(|m| m == n).unwrap())
                    .collect();
                let arranged = if out_perm.iter().enumerate().all(|(i, &p)| i == p) {
                    mapped
                } else {
                    permute_matrix_factors(&mapped, &factor_dims, &out_perm)
                };
                out_branches.push(Branch {
                    labels: branch.labels.clone(),
                    weight: branch.weight,
                    state: DensityOperator::new_unchecked(arranged),
                });
            }
            Channel::Measurement(c) => {
                let ea = dim_e * dim_a;
                let dims = [ea, dim_rest];
                for (y, (_, lambda)) in c.povm().elements().iter().enumerate() {
                    let projected = kron(lambda, &eye(dim_rest)) * &permuted;
                    let cond = partial_trace_factors(&projected, &dims, &[false, true]);
                    let p = cond.trace().re;
                    if p <= 1e-15 {
                        continue;
                    }
                    // Conditional state factors are [rest...]; reorder to the
                    // output register list order.
                    let out_perm: Vec<usize> = out_q_names
                        .iter()
                        .map(|n| rest_names.iter().position(|m| m == n).unwrap())
                        .collect();
                    let arranged = if out_perm.iter().enumerate().all(|(i, &p)| i == p) {
                        cond.unscale(p)
                    } else {
                        permute_matrix_factors(&cond.unscale(p), &rest_dims, &out_perm)
                    };
                    let mut labels = branch.labels.clone();
                    labels.insert(y_label_pos.unwrap(), y);
                    out_branches.push(Branch {
                        labels,
                        weight: branch.weight * p,
                        state: DensityOperator::new_unchecked(arranged),
                    });
                }
            }
        }
    }
    Ok(HybridState::new_unchecked(out_registers, out_branches))
}

/// n-fold tensor product channel on grouped spaces. Kraus (quantum output)
/// channels are capped at n ≤ 2; measurement channels at n ≤ 10; the
/// materialized operator dimension is capped at [`MAX_PRODUCT_DIM`].
pub fn product_channel(channel: &Channel, n: usize) -> Result<Channel> {
    if n == 0 {
        return Err(Error::Domain("product power must be at least 1".into()));
    }
    if n == 1 {
        return Ok(channel.clone());
    }
    let (cap, kind) = match channel {
        Channel::Kraus(_) => (MAX_PRODUCT_QUANTUM, "quantum-output"),
        Channel::Measurement(_) => (MAX_PRODUCT_MEASUREMENT, "measurement"),
    };
    if n > cap {
        return Err(Error::SizeLimit(format!(
            "product power {n} exceeds the {kind} channel limit of {cap}"
        )));
    }
    let dim_e = channel.dim_e();
    let dim_a = channel.dim_a();
    let in_dim = (dim_e * dim_a).pow(n as u32);
    if in_dim > MAX_PRODUCT_DIM {
        return Err(Error::SizeLimit(format!(
            "product input dimension {in_dim} exceeds the operator limit of {MAX_PRODUCT_DIM}"
        )));
    }

    // Permutation taking grouped order (E1..En, A1..An) to interleaved
    // (E1, A1, E2, A2, ...): output factor list alternates E and A copies.
    let mut dims_grouped = vec![dim_e; n];
    dims_grouped.extend(vec![dim_a; n]);
    let mut perm = Vec::with_capacity(2 * n);
    for copy in 0..n {
        perm.push(copy);
        perm.push(n + copy);
    }
    let p = factor_permutation_matrix(&dims_grouped, &perm);

    match channel {
        Channel::Kraus(c) => {
            let mut kraus = vec![eye(1)];
            for _ in 0..n {
                let mut next = Vec::with_capacity(kraus.len() * c.kraus().len());
                for left in &kraus {
                    for k in c.kraus() {
                        next.push(kron(left, k));
                    }
                }
                kraus = next;
            }
            // Interleaved input order → compose with the grouping permutation.
            let kraus: Vec<CMat> = kraus.into_iter().map(|k| k * &p).collect();
            Ok(Channel::Kraus(StateDependentChannel::new(
                dim_e.pow(n as u32),
                dim_a.pow(n as u32),
                c.dim_b().pow(n as u32),
                kraus,
            )?))
        }
        Channel::Measurement(c) => {
            let mut elements: Vec<(String, CMat)> = vec![("".to_string(), eye(1))];
            for _ in 0..n {
                let mut next = Vec::with_capacity(elements.len() * c.povm().len());
                for (label, left) in &elements {
                    for (l, m) in c.povm().elements() {
                        let joined = if label.is_empty() {
                            l.clone()
                        } else {
                            format!("{label},{l}")
                        };
                        next.push((joined, kron(left, m)));
                    }
                }
                elements = next;
            }
            let elements: Vec<(String, CMat)> = elements
                .into_iter()
                .map(|(l, m)| (l, p.adjoint() * m * &p))
                .collect();
            let povm = Povm::new_unchecked(elements);
            let report = povm.validate();
            if !report.is_valid() {
                return Err(Error::InvalidState(report.to_string().trim_end().to_string()));
            }
            Ok(Channel::Measurement(MeasurementChannel::new(
                dim_e.pow(n as u32),
                dim_a.pow(n as u32),
                povm,
            )?))
        }
    }
}

/// Fold a mixed channel-state density operator into the pure-source form:
/// purify with an ancilla `G`, enlarge the channel state system to
/// `Ẽ = (G, E)`, and wrap the channel so it discards `G`.
pub fn purify_source(
    varphi: &DensityOperator,
    dim_e0: usize,
    dim_e: usize,
    dim_c: usize,
    channel: Channel,
) -> Result<(Channel, StateSource)> {
    let total = dim_e0 * dim_e * dim_c;
    if varphi.dim() != total {
        return Err(Error::DimMismatch(format!(
            "source matrix dim {} does not match dimE0·dimE·dimC = {total}",
            varphi.dim()
        )));
    }
    let dim_g = total;
    // Purified vector lives on (E0 E C) ⊗ G; regroup to E0 ⊗ (G E) ⊗ C.
    let phi = varphi.purify()?;
    let grouped = permute_vector_factors(&phi, &[dim_e0, dim_e, dim_c, dim_g], &[0, 3, 1, 2]);
    let source = StateSource::new(dim_e0, dim_g * dim_e, dim_c, grouped)?;

    let wrap_kraus = |kraus: &[CMat], dim_a: usize, dim_b: usize| -> Result<StateDependentChannel> {
        let mut wrapped = Vec::with_capacity(kraus.len() * dim_g);
        for g in 0..dim_g {
            // ⟨g|_G ⊗ 1_{EA} as a (dimE·dimA) × (dimG·dimE·dimA) selector.
            let ea = dim_e * dim_a;
            let mut selector = CMat::zeros(ea, dim_g * ea);
            for i in 0..ea {
                selector[(i, g * ea + i)] = Complex64::new(1.0, 0.0);
            }
            for k in kraus {
                wrapped.push(k * &selector);
            }
        }
        StateDependentChannel::new(dim_g * dim_e, dim_a, dim_b, wrapped)
    };

    let channel = match channel {
        Channel::Kraus(c) => {
            if c.dim_e() != dim_e {
                return Err(Error::DimMismatch(format!(
                    "channel dimE {} does not match source dimE {dim_e}",
                    c.dim_e()
                )));
            }
            Channel::Kraus(wrap_kraus(c.kraus(), c.dim_a(), c.dim_b())?)
        }
        Channel::Measurement(c) => {
            if c.dim_e() != dim_e {
                return Err(Error::DimMismatch(format!(
                    "channel dimE {} does not match source dimE {dim_e}",
                    c.dim_e()
                )));
            }
            let elements = c
                .povm()
                .elements()
                .iter()
                .map(|(l, m)| (l.clone(), kron(&eye(dim_g), m)))
                .collect();
            Channel::Measurement(MeasurementChannel::new(
                dim_g * dim_e,
                c.dim_a(),
                Povm::new_unchecked(elements),
            )?)
        }
    };
    Ok((channel, source))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cplx;
    use approx::assert_relative_eq;

    fn pauli_x() -> CMat {
        CMat::from_row_slice(2, 2, &[cplx(0., 0.), cplx(1., 0.), cplx(1., 0.), cplx(0., 0.)])
    }

    fn input_state_on_ea(sigma_e: &CMat, rho_a: &CMat) -> HybridState {
        let joint = kron(sigma_e, rho_a);
        HybridState::from_joint_density(
            vec![("E".into(), sigma_e.nrows()), ("A".into(), rho_a.nrows())],
            DensityOperator::new_unchecked(joint),
        )
        .unwrap()
    }

    #[test]
    fn identity_channel_leaves_input_unchanged() {
        let rho = DensityOperator::from_pmf(&[0.25, 0.75]);
        let state = input_state_on_ea(&eye(1), rho.matrix());
        let out = Channel::Kraus(StateDependentChannel::identity(2))
            .apply(&state)
            .unwrap();
        assert_eq!(out.registers().len(), 1);
        assert_eq!(out.registers()[0].name, "B");
        assert!(max_abs_diff(out.branches()[0].state.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn bit_flip_branch_and_average_match_depolarizing_action() {
        let rpc = crate::presets::build_depolarizing(1.0).unwrap();
        let rho = DensityOperator::basis_state(2, 0);
        // Branch s=1 applies X: |0⟩⟨0| → |1⟩⟨1|.
        let flipped = rpc.apply_branch(1, rho.matrix());
        assert!(max_abs_diff(&flipped, &(pauli_x() * rho.matrix() * pauli_x())) < 1e-12);
        // Average action is (1−ε)ρ + επ.
        let avg = rpc.apply_average(rho.matrix());
        let expect = rho.matrix().scale(0.0) + eye(2).scale(0.5);
        assert!(max_abs_diff(&avg, &expect) < 1e-12);
    }

    #[test]
    fn lifted_random_parameter_channel_reproduces_branch_averaging() {
        let rpc = crate::presets::build_projection(0.5, &CVec::from_vec(vec![cplx(1., 0.), cplx(0., 0.)])).unwrap();
        let (channel, source) = rpc.lift().unwrap();
        // σ_E from the source, input ρ_A = |1⟩⟨1|.
        let phi = source.density();
        let sigma_e = partial_trace_factors(&phi, &[2, 2, 2], &[false, true, false]);
        let rho_a = DensityOperator::basis_state(2, 1);
        let state = input_state_on_ea(&sigma_e, rho_a.matrix());
        let out = Channel::Kraus(channel).apply(&state).unwrap();
        let direct = rpc.apply_average(rho_a.matrix());
        assert!(max_abs_diff(out.branches()[0].state.matrix(), &direct) < 1e-9);
        // ε = 0.5, input |1⟩⟨1|, ψ = |0⟩: average output diag(0.5, 0.5).
        assert_relative_eq!(direct[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(direct[(1, 1)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn depolarizing_lift_has_uniform_q_at_full_noise() {
        let rpc = crate::presets::build_depolarizing(1.0).unwrap();
        assert_eq!(rpc.q(), &[0.25, 0.25, 0.25, 0.25]);
        let (_, source) = rpc.lift().unwrap();
        assert_eq!(source.dim_e0(), 4);
        assert!(source.validate().is_valid());
    }

    #[test]
    fn measurement_of_mixed_state_gives_born_probabilities() {
        let povm = Povm::computational(2);
        let channel = MeasurementChannel::new(1, 2, povm).unwrap();
        let rho = DensityOperator::from_pmf(&[0.75, 0.25]);
        let state = input_state_on_ea(&eye(1), rho.matrix());
        let out = Channel::Measurement(channel).apply(&state).unwrap();
        let pmf = out.classical_pmf("Y").unwrap();
        assert_relative_eq!(pmf[0], 0.75, epsilon = 1e-12);
        assert_relative_eq!(pmf[1], 0.25, epsilon = 1e-12);
        assert_relative_eq!(out.total_weight(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn single_outcome_povm_preserves_weight() {
        let channel = MeasurementChannel::new(1, 2, Povm::identity(2)).unwrap();
        let rho = DensityOperator::maximally_mixed(2);
        let state = input_state_on_ea(&eye(1), rho.matrix());
        let out = Channel::Measurement(channel).apply(&state).unwrap();
        assert_eq!(out.branches().len(), 1);
        assert_relative_eq!(out.branches()[0].weight, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn product_channel_caps_are_enforced() {
        let id = Channel::Kraus(StateDependentChannel::identity(2));
        assert!(matches!(product_channel(&id, 3), Err(Error::SizeLimit(_))));
        let two = product_channel(&id, 2).unwrap();
        let rho = DensityOperator::maximally_mixed(4);
        let state = HybridState::from_joint_density(
            vec![("E".into(), 1), ("A".into(), 4)],
            rho.clone(),
        )
        .unwrap();
        let out = two.apply(&state).unwrap();
        assert!(max_abs_diff(out.branches()[0].state.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn product_measurement_weights_multiply() {
        let povm = Povm::computational(2);
        let channel = Channel::Measurement(MeasurementChannel::new(1, 2, povm).unwrap());
        let squared = product_channel(&channel, 2).unwrap();
        let rho = DensityOperator::from_pmf(&[0.75, 0.25]);
        let joint = rho.tensor(&rho);
        let state = HybridState::from_joint_density(vec![("E".into(), 1), ("A".into(), 4)], joint).unwrap();
        let out = squared.apply(&state).unwrap();
        let pmf = out.classical_pmf("Y").unwrap();
        assert_eq!(pmf.len(), 4);
        assert_relative_eq!(pmf[0], 0.5625, epsilon = 1e-12);
        assert_relative_eq!(pmf[1], 0.1875, epsilon = 1e-12);
        assert_relative_eq!(pmf[2], 0.1875, epsilon = 1e-12);
        assert_relative_eq!(pmf[3], 0.0625, epsilon = 1e-12);
    }

    #[test]
    fn channel_application_is_linear_and_trace_preserving() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let channel = crate::random::random_kraus_channel(&mut rng, 2, 2, 2, 3);
            let r1 = crate::random::random_density(&mut rng, 4);
            let r2 = crate::random::random_density(&mut rng, 4);
            let mix = DensityOperator::new_unchecked(r1.matrix().scale(0.3) + r2.matrix().scale(0.7));
            let apply = |rho: &DensityOperator| {
                let state = HybridState::from_joint_density(
                    vec![("E".into(), 2), ("A".into(), 2)],
                    rho.clone(),
                )
                .unwrap();
                Channel::Kraus(channel.clone()).apply(&state).unwrap().branches()[0]
                    .state
                    .matrix()
                    .clone()
            };
            let out_mix = apply(&mix);
            let out_sep = apply(&r1).scale(0.3) + apply(&r2).scale(0.7);
            assert!(max_abs_diff(&out_mix, &out_sep) < 1e-9);
            assert_relative_eq!(out_mix.trace().re, 1.0, epsilon = 1e-9);
        }
    }
}
