//! Achievable rate-leakage pairs for an encoder strategy, and optimization
//! of the rate under a leakage budget.
//!
//! A [`Strategy`] is the encoder design triple: a POVM on the side
//! information system `E0` with outcome alphabet `S`, a conditional pmf
//! `p(x|s)`, and a family of channel input states `φ_A^x`. The strategy,
//! source, and channel induce the joint states
//!
//! ```text
//! ρ_{ECSXA} = Σ_{s,x} p(x|s) Tr_{E0}(Λ^s φ_{E0 E C}) ⊗ |s,x⟩⟨s,x| ⊗ φ_A^x
//! ρ_{BCSX}  = N_{EA→B}(ρ_{EACSX})
//! ```
//!
//! from which the achievable pair is `R = max(0, I(X;B) − I(X;S))` and
//! `L = I(CS;XB)`, in bits per channel use.

mod eval;
mod opt;

pub use opt::{optimize_rate, region_boundary, OptimizeOptions};

use crate::channels::{Channel, StateSource};
use crate::error::{Error, Result};
use crate::linalg::{kron, mat_from_rows, mat_to_rows};
use crate::qstate::{
    Branch, DensityOperator, HybridState, Povm, Register, Validate, ValidationReport,
};
use serde::{Deserialize, Serialize};

/// Auxiliary-alphabet size that exhausts the single-letter region:
/// `(dimA² + 1) · dimE0`.
pub fn cardinality_cap(dim_a: usize, dim_e0: usize) -> usize {
    (dim_a * dim_a + 1) * dim_e0
}

/// Encoder design triple: CSI POVM `{Λ^s}`, conditional pmf `p(x|s)`, and
/// input-state family `{φ_A^x}`.
#[derive(Debug, Clone)]
pub struct Strategy {
    csi_povm: Povm,
    cond_pmf: Vec<Vec<f64>>,
    input_states: Vec<DensityOperator>,
}

impl Strategy {
    /// Construct and validate, enforcing the auxiliary-alphabet cap.
    pub fn new(csi_povm: Povm, cond_pmf: Vec<Vec<f64>>, input_states: Vec<DensityOperator>) -> Result<Self> {
        Self::build(csi_povm, cond_pmf, input_states, false)
    }

    /// Construct and validate with the alphabet cap explicitly overridden.
    pub fn new_oversized(
        csi_povm: Povm,
        cond_pmf: Vec<Vec<f64>>,
        input_states: Vec<DensityOperator>,
    ) -> Result<Self> {
        Self::build(csi_povm, cond_pmf, input_states, true)
    }

    fn build(
        csi_povm: Povm,
        cond_pmf: Vec<Vec<f64>>,
        input_states: Vec<DensityOperator>,
        allow_oversized: bool,
    ) -> Result<Self> {
        let strategy = Self { csi_povm, cond_pmf, input_states };
        let report = strategy.validate();
        if !report.is_valid() {
            return Err(Error::InvalidState(report.to_string().trim_end().to_string()));
        }
        if !allow_oversized {
            let cap = cardinality_cap(strategy.dim_a(), strategy.csi_povm.dim());
            if strategy.x_len() > cap {
                return Err(Error::SizeLimit(format!(
                    "auxiliary alphabet size {} exceeds the cap (dimA²+1)·dimE0 = {cap}; use new_oversized to override",
                    strategy.x_len()
                )));
            }
        }
        Ok(strategy)
    }

    pub fn csi_povm(&self) -> &Povm {
        &self.csi_povm
    }
    pub fn cond_pmf(&self) -> &[Vec<f64>] {
        &self.cond_pmf
    }
    pub fn input_states(&self) -> &[DensityOperator] {
        &self.input_states
    }
    pub fn s_len(&self) -> usize {
        self.cond_pmf.len()
    }
    pub fn x_len(&self) -> usize {
        self.input_states.len()
    }
    pub fn dim_a(&self) -> usize {
        self.input_states.first().map(|s| s.dim()).unwrap_or(0)
    }

    /// Tensor of two strategies: outcome alphabets, pmfs, and input states
    /// all combine multiplicatively.
    pub fn product(&self, other: &Strategy) -> Result<Strategy> {
        let mut elements = Vec::new();
        for (la, ma) in self.csi_povm.elements() {
            for (lb, mb) in other.csi_povm.elements() {
                elements.push((format!("{la},{lb}"), kron(ma, mb)));
            }
        }
        let povm = Povm::new_unchecked(elements);
        let mut pmf = Vec::new();
        for row_a in &self.cond_pmf {
            for row_b in &other.cond_pmf {
                let mut row = Vec::with_capacity(row_a.len() * row_b.len());
                for &pa in row_a {
                    for &pb in row_b {
                        row.push(pa * pb);
                    }
                }
                pmf.push(row);
            }
        }
        let mut states = Vec::new();
        for sa in &self.input_states {
            for sb in &other.input_states {
                states.push(sa.tensor(sb));
            }
        }
        Strategy::new_oversized(povm, pmf, states)
    }

    pub fn to_json(&self) -> String {
        let doc = StrategyDoc {
            csi_povm: self
                .csi_povm
                .elements()
                .iter()
                .map(|(label, m)| PovmElementDoc { label: label.clone(), matrix: mat_to_rows(m) })
                .collect(),
            cond_pmf: self.cond_pmf.clone(),
            input_states: self.input_states.iter().map(|s| mat_to_rows(s.matrix())).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("strategy serializes")
    }

    pub fn from_json(text: &str) -> Result<Strategy> {
        let doc: StrategyDoc = serde_json::from_str(text)
            .map_err(|e| Error::Schema(format!("malformed strategy: {e}")))?;
        let elements = doc
            .csi_povm
            .iter()
            .map(|e| {
                mat_from_rows(&e.matrix)
                    .map(|m| (e.label.clone(), m))
                    .ok_or_else(|| Error::Schema(format!("povm element `{}`: ragged matrix", e.label)))
            })
            .collect::<Result<Vec<_>>>()?;
        let states = doc
            .input_states
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let mat = mat_from_rows(m)
                    .ok_or_else(|| Error::Schema(format!("input state {i}: ragged matrix")))?;
                DensityOperator::new(mat).map_err(|e| Error::Invariant(format!("input state {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Strategy::new_oversized(Povm::new_unchecked(elements), doc.cond_pmf, states)
    }

    /// Stable content hash for deterministic tie-breaking and provenance.
    pub fn digest(&self) -> String {
        format!("{:016x}", fnv1a64(self.to_json().as_bytes()))
    }
}

impl Validate for Strategy {
    fn validate(&self) -> ValidationReport {
        let mut report = self.csi_povm.validate();
        if self.cond_pmf.len() != self.csi_povm.len() {
            report.push(
                format!(
                    "conditional pmf has {} rows, POVM has {} outcomes",
                    self.cond_pmf.len(),
                    self.csi_povm.len()
                ),
                0.0,
            );
        }
        if self.input_states.is_empty() {
            report.push("strategy needs at least one input state", 0.0);
            return report;
        }
        let dim_a = self.input_states[0].dim();
        for (x, st) in self.input_states.iter().enumerate() {
            if st.dim() != dim_a {
                report.push(format!("input state {x} dim {} differs from {dim_a}", st.dim()), 0.0);
            }
            report.merge(&format!("input state {x}"), st.validate());
        }
        for (s, row) in self.cond_pmf.iter().enumerate() {
            if row.len() != self.input_states.len() {
                report.push(
                    format!(
                        "pmf row {s} has {} entries, expected {}",
                        row.len(),
                        self.input_states.len()
                    ),
                    0.0,
                );
                continue;
            }
            let mut sum = 0.0;
            for (x, &p) in row.iter().enumerate() {
                if p < 0.0 {
                    report.push(format!("pmf entry p(x={x}|s={s}) is negative"), -p);
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-10 {
                report.push(format!("pmf row {s} sums to 1"), (sum - 1.0).abs());
            }
        }
        report
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyDoc {
    csi_povm: Vec<PovmElementDoc>,
    cond_pmf: Vec<Vec<f64>>,
    input_states: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize, Deserialize)]
struct PovmElementDoc {
    label: String,
    matrix: Vec<Vec<[f64; 2]>>,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Where a rate-leakage point came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Strategy { digest: String },
    Simulation { seed: u64 },
    ClosedForm,
}

/// An achievable (rate, leakage) pair in bits per channel use.
#[derive(Debug, Clone)]
pub struct RateLeakagePoint {
    pub rate: f64,
    pub leakage: f64,
    /// Block factor of the evaluation (1 for single-letter).
    pub n: u32,
    pub provenance: Provenance,
}

/// Evaluation byproducts: the raw (unclamped) rate bound and the mutual
/// informations it came from.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub point: RateLeakagePoint,
    pub i_xb: f64,
    pub i_xs: f64,
    /// `I(X;B) − I(X;S)` before clamping at zero.
    pub rate_raw: f64,
}

fn check_triple(source: &StateSource, strategy: &Strategy, channel: &Channel) -> Result<()> {
    if strategy.csi_povm().dim() != source.dim_e0() {
        return Err(Error::DimMismatch(format!(
            "CSI POVM dim {} does not match source dimE0 {}",
            strategy.csi_povm().dim(),
            source.dim_e0()
        )));
    }
    if channel.dim_e() != source.dim_e() {
        return Err(Error::DimMismatch(format!(
            "channel dimE {} does not match source dimE {}",
            channel.dim_e(),
            source.dim_e()
        )));
    }
    if channel.dim_a() != strategy.dim_a() {
        return Err(Error::DimMismatch(format!(
            "channel dimA {} does not match input state dim {}",
            channel.dim_a(),
            strategy.dim_a()
        )));
    }
    Ok(())
}

/// Build the induced joint states `(ρ_{ECSXA}, ρ_{BCSX})` for a strategy.
/// Zero-probability CSI outcomes and zero-probability `x` values are
/// dropped.
pub fn induced_joint_state(
    source: &StateSource,
    strategy: &Strategy,
    channel: &Channel,
) -> Result<(HybridState, HybridState)> {
    check_triple(source, strategy, channel)?;
    let outcomes = source.measure_csi(strategy.csi_povm())?;

    let s_labels: Vec<String> = strategy.csi_povm().labels().iter().map(|s| s.to_string()).collect();
    let x_labels: Vec<String> = (0..strategy.x_len()).map(|x| x.to_string()).collect();

    let registers = vec![
        Register::quantum("E", source.dim_e()),
        Register::quantum("C", source.dim_c()),
        Register::classical("S", s_labels),
        Register::classical("X", x_labels),
        Register::quantum("A", strategy.dim_a()),
    ];

    let mut branches = Vec::new();
    for (s, p_s, sigma_ec) in &outcomes {
        for (x, state) in strategy.input_states().iter().enumerate() {
            let w = p_s * strategy.cond_pmf()[*s][x];
            if w <= 0.0 {
                continue;
            }
            let joint = kron(sigma_ec, state.matrix());
            branches.push(Branch {
                labels: vec![*s, x],
                weight: w,
                state: DensityOperator::new_unchecked(joint),
            });
        }
    }
    let pre = HybridState::new(registers, branches)?;
    let post = channel.apply(&pre)?;
    Ok((pre, post))
}

/// Evaluate a strategy: `R = max(0, I(X;B) − I(X;S))`, `L = I(CS;XB)`.
pub fn evaluate_strategy(
    source: &StateSource,
    strategy: &Strategy,
    channel: &Channel,
) -> Result<RateLeakagePoint> {
    Ok(evaluate_strategy_detailed(source, strategy, channel)?.point)
}

/// Evaluate a strategy keeping the unclamped rate bound as a diagnostic.
pub fn evaluate_strategy_detailed(
    source: &StateSource,
    strategy: &Strategy,
    channel: &Channel,
) -> Result<Evaluation> {
    let (pre, post) = induced_joint_state(source, strategy, channel)?;
    let out = channel.output_register_name();
    let i_xs = pre.mutual_information(&["X"], &["S"])?;
    let i_xb = post.mutual_information(&["X"], &[out])?;
    let leakage = post.mutual_information(&["C", "S"], &["X", out])?;
    let rate_raw = i_xb - i_xs;
    Ok(Evaluation {
        point: RateLeakagePoint {
            rate: rate_raw.max(0.0),
            leakage,
            n: 1,
            provenance: Provenance::Strategy { digest: strategy.digest() },
        },
        i_xb,
        i_xs,
        rate_raw,
    })
}

/// Budget above which the masking constraint is vacuous:
/// `2·log₂ dimB` (or `2·log₂|Y|` for measurement channels), since
/// `I(C^n V; B^n) ≤ 2 H(B^n) ≤ 2n log dimB`.
pub fn trivial_leakage_threshold(channel: &Channel) -> f64 {
    2.0 * (channel.output_size() as f64).log2()
}

/// Evaluate an n-letter strategy on the n-fold product channel and source,
/// normalized per channel use. `n = 1` coincides with [`evaluate_strategy`].
pub fn multiletter_point(
    source: &StateSource,
    strategy_n: &Strategy,
    channel: &Channel,
    n: usize,
) -> Result<RateLeakagePoint> {
    match n {
        1 => evaluate_strategy(source, strategy_n, channel),
        2 => {
            let channel_n = channel.product(n)?;
            let source_n = source.product(n)?;
            let eval = evaluate_strategy_detailed(&source_n, strategy_n, &channel_n)?;
            Ok(RateLeakagePoint {
                rate: eval.point.rate / n as f64,
                leakage: eval.point.leakage / n as f64,
                n: n as u32,
                provenance: eval.point.provenance,
            })
        }
        _ => Err(Error::SizeLimit(format!(
            "multiletter evaluation supports n ∈ {{1, 2}}, got {n}"
        ))),
    }
}

/// Fixed-point formatting used for all emitted numbers (ten fractional
/// digits, '.' separator, no locale dependence).
pub fn format_bits(x: f64) -> String {
    // Avoid the "-0.0000000000" artifact for tiny negative values.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.10}")
}

/// Render region-boundary rows as CSV with the fixed header.
pub fn region_csv(rows: &[(f64, RateLeakagePoint)], seed: u64) -> String {
    let mut out = String::from("budget_bits,R_bits,L_bits,n,seed\n");
    for (budget, point) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_bits(*budget),
            format_bits(point.rate),
            format_bits(point.leakage),
            point.n,
            seed
        ));
    }
    out
}
