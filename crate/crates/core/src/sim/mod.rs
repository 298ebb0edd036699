//! Desk-scale Monte Carlo simulation of the random-binning coding scheme
//! for measurement channels with classical side information at the encoder.
//!
//! The simulated pipeline per trial: sample the state sequence `S^n` i.i.d.,
//! pick a uniform message, encode (binning with covering, or a custom
//! reference coder), push every letter through the channel table by the Born
//! probabilities `W(y|x,s)`, and decode by maximum likelihood. Error and
//! covering-failure rates are empirical; the leakage `I(S^n;Y^n)/n` is exact
//! (full enumeration) whenever the state space fits the cell budget.
//!
//! Randomness is counter-keyed by `(seed, trial, stage)`, so results are
//! bit-identical under any parallel schedule.

pub mod codebook;
pub mod leakage;
mod rng;
pub mod typicality;

pub use codebook::{decode_ml, encode_binning, generate_codebook, Codebook, MAX_CODEWORDS};
pub use leakage::{exact_leakage, leakage_cells, MAX_LEAKAGE_CELLS};
pub use typicality::{jointly_typical_check, typical_check};

use crate::channels::{Channel, MeasurementChannel, StateSource};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMat};
use crate::qstate::{DensityOperator, Povm};
use crate::region::{evaluate_strategy, Strategy};
use rand::Rng;
use rayon::prelude::*;
use rng::{stream_rng, TAG_CHANNEL, TAG_MESSAGE, TAG_STATE};
use serde::Serialize;

/// Alphabet cap for simulated configurations.
pub const MAX_ALPHABET: usize = 4;
/// Block-length cap for simulated configurations.
pub const MAX_BLOCK: usize = 10;

/// Memoryless classical channel table `W(y|x,s)`, the Born probabilities of
/// a measurement channel at fixed input states.
#[derive(Debug, Clone)]
pub struct ChannelTable {
    s_count: usize,
    x_count: usize,
    y_count: usize,
    /// Row-major `[s][x][y]`.
    w: Vec<f64>,
}

impl ChannelTable {
    /// Build from `w[s][x][y]`; rows must be distributions. Entries below
    /// `−1e-12` are rejected, tiny negatives are clipped to zero.
    pub fn new(s_count: usize, x_count: usize, y_count: usize, w: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut flat = vec![0.0; s_count * x_count * y_count];
        if w.len() != s_count {
            return Err(Error::DimMismatch(format!(
                "table has {} state slices, expected {s_count}",
                w.len()
            )));
        }
        for (s, slice) in w.iter().enumerate() {
            if slice.len() != x_count {
                return Err(Error::DimMismatch(format!(
                    "state {s} has {} input rows, expected {x_count}",
                    slice.len()
                )));
            }
            for (x, row) in slice.iter().enumerate() {
                if row.len() != y_count {
                    return Err(Error::DimMismatch(format!(
                        "row (s={s}, x={x}) has {} outputs, expected {y_count}",
                        row.len()
                    )));
                }
                let mut total = 0.0;
                for (y, &p) in row.iter().enumerate() {
                    if p < -1e-12 {
                        return Err(Error::InvalidState(format!(
                            "negative probability W({y}|{x},{s}) = {p}"
                        )));
                    }
                    let p = p.max(0.0);
                    flat[(s * x_count + x) * y_count + y] = p;
                    total += p;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidState(format!(
                        "row (s={s}, x={x}) sums to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(Self { s_count, x_count, y_count, w: flat })
    }

    pub fn s_count(&self) -> usize {
        self.s_count
    }
    pub fn x_count(&self) -> usize {
        self.x_count
    }
    pub fn y_count(&self) -> usize {
        self.y_count
    }

    #[inline]
    pub fn w(&self, s: usize, x: usize, y: usize) -> f64 {
        self.w[(s * self.x_count + x) * self.y_count + y]
    }

    /// Induced single-letter channel `p(y|x) = Σ_s p(s|x) W(y|x,s)` for the
    /// joint pmf `p(s, x)`.
    pub fn induced_output_channel(&self, p_sx: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.y_count]; self.x_count];
        for x in 0..self.x_count {
            let p_x: f64 = (0..self.s_count).map(|s| p_sx[s][x]).sum();
            if p_x <= 0.0 {
                out[x] = vec![1.0 / self.y_count as f64; self.y_count];
                continue;
            }
            for s in 0..self.s_count {
                for y in 0..self.y_count {
                    out[x][y] += p_sx[s][x] / p_x * self.w(s, x, y);
                }
            }
        }
        out
    }
}

/// The mod-2 additive reference configuration: `S, X, Y` binary with
/// `W(y|x,s) = 1{y = x ⊕ s}`.
pub fn mod_add_table() -> ChannelTable {
    let mut w = vec![vec![vec![0.0; 2]; 2]; 2];
    for s in 0..2 {
        for x in 0..2 {
            w[s][x][(x + s) % 2] = 1.0;
        }
    }
    ChannelTable::new(2, 2, 2, &w).expect("mod-add rows are deterministic")
}

/// Born-rule channel table of a measurement channel with a classical state:
/// `W(y|x,s) = Tr(Λ_y (|s⟩⟨s| ⊗ φ^x))`.
pub fn induced_table(channel: &MeasurementChannel, states: &[DensityOperator]) -> Result<ChannelTable> {
    let s_count = channel.dim_e();
    let y_count = channel.num_outcomes();
    let x_count = states.len();
    let mut w = vec![vec![vec![0.0; y_count]; x_count]; s_count];
    for s in 0..s_count {
        let e_s = DensityOperator::basis_state(s_count, s);
        for (x, phi) in states.iter().enumerate() {
            let joint = kron(e_s.matrix(), phi.matrix());
            for (y, (_, lambda)) in channel.povm().elements().iter().enumerate() {
                w[s][x][y] = real_trace_product(lambda, &joint);
            }
        }
    }
    ChannelTable::new(s_count, x_count, y_count, &w)
}

fn real_trace_product(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Embed a channel table back into the measurement-channel form (inputs as
/// basis states, POVM diagonal), with the classical-copy source for `q` and
/// the given conditional pmf as the strategy. Used to obtain the
/// single-letter predictions through the region evaluator.
pub fn classical_embedding(
    table: &ChannelTable,
    q: &[f64],
    cond_pmf: &[Vec<f64>],
) -> Result<(Channel, StateSource, Strategy)> {
    let s_count = table.s_count();
    let x_count = table.x_count();
    let y_count = table.y_count();
    let dim = s_count * x_count;
    let mut elements = Vec::with_capacity(y_count);
    for y in 0..y_count {
        let mut m = CMat::zeros(dim, dim);
        for s in 0..s_count {
            for x in 0..x_count {
                m[(s * x_count + x, s * x_count + x)] =
                    num_complex::Complex64::new(table.w(s, x, y), 0.0);
            }
        }
        elements.push((y.to_string(), m));
    }
    let channel = MeasurementChannel::new(s_count, x_count, Povm::new_unchecked(elements))?;
    let source = StateSource::classical_copy(q)?;
    let states = (0..x_count).map(|x| DensityOperator::basis_state(x_count, x)).collect();
    let strategy =
        Strategy::new_oversized(Povm::computational(s_count), cond_pmf.to_vec(), states)?;
    Ok((Channel::Measurement(channel), source, strategy))
}

/// Reference coder supplied by a caller: deterministic encode/decode pair.
#[derive(Clone, Copy)]
pub struct CustomCoder {
    pub name: &'static str,
    /// `(message, state sequence, message count) → input sequence`.
    pub encode: fn(u64, &[usize], u64) -> Vec<usize>,
    /// `(output sequence, message count) → message estimate`.
    pub decode: fn(&[usize], u64) -> u64,
}

impl std::fmt::Debug for CustomCoder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CustomCoder({})", self.name)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum EncoderMode {
    /// Sub-codebook binning with typicality covering.
    Binning,
    /// A caller-supplied reference coder.
    Custom(CustomCoder),
}

impl EncoderMode {
    fn describe(&self) -> String {
        match self {
            EncoderMode::Binning => "binning".to_string(),
            EncoderMode::Custom(c) => format!("custom:{}", c.name),
        }
    }
}

/// Simulation parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Block length, at most [`MAX_BLOCK`].
    pub n: usize,
    /// Message rate in bits per use; `2^{nR}` is rounded to the message count.
    pub rate: f64,
    /// Total codebook rate; defaults to `R + I(X;S) + 0.1`.
    pub rtilde: Option<f64>,
    /// Typicality slack δ > 0.
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub encoder: EncoderMode,
}

impl SimConfig {
    pub fn num_messages(&self) -> u64 {
        codebook::round_pow2(self.n as f64 * self.rate).max(1) as u64
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_BLOCK {
            return Err(Error::SizeLimit(format!(
                "block length {} outside 1..={MAX_BLOCK}",
                self.n
            )));
        }
        if self.rate < 0.0 {
            return Err(Error::Domain("rate must be ≥ 0".into()));
        }
        if let Some(rt) = self.rtilde {
            if rt < self.rate {
                return Err(Error::Domain(format!(
                    "total codebook rate {rt} must be ≥ the message rate {}",
                    self.rate
                )));
            }
        }
        if self.delta <= 0.0 {
            return Err(Error::Domain("typicality slack δ must be > 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::Domain("at least one trial required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub rate: f64,
    pub rtilde: f64,
    pub delta: f64,
    pub trials: u64,
    pub encoder: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub r_bound: f64,
    pub l_bound: f64,
}

/// Result of one simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub config: ConfigEcho,
    pub error_rate: f64,
    /// 95% binomial half-width of the error rate.
    pub ci_halfwidth: f64,
    pub covering_failure_rate: f64,
    /// Exact `I(S^n;Y^n)/n`, absent when the cell budget is exceeded.
    pub leakage_bits_per_letter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage_note: Option<String>,
    pub prediction: Prediction,
    pub seed: u64,
}

impl SimResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sim result serializes")
    }
}

fn sample_pmf<R: Rng>(pmf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    pmf.len() - 1
}

/// Per-letter Born sampling of the channel output.
pub fn sample_channel<R: Rng>(
    x_n: &[usize],
    s_n: &[usize],
    table: &ChannelTable,
    rng: &mut R,
) -> Vec<usize> {
    x_n.iter()
        .zip(s_n)
        .map(|(&x, &s)| {
            let row: Vec<f64> = (0..table.y_count()).map(|y| table.w(s, x, y)).collect();
            sample_pmf(&row, rng)
        })
        .collect()
}

/// Run the Monte Carlo simulation of the coding scheme.
///
/// `q` is the state pmf and `cond_pmf` the strategy rows `p(x|s)`; the
/// binning codebook draws codewords from the marginal `p_X`. Deterministic
/// for a fixed seed under any thread count.
pub fn simulate(
    config: &SimConfig,
    table: &ChannelTable,
    q: &[f64],
    cond_pmf: &[Vec<f64>],
) -> Result<SimResult> {
    config.check()?;
    for (what, size) in [
        ("state", table.s_count()),
        ("input", table.x_count()),
        ("output", table.y_count()),
    ] {
        if size > MAX_ALPHABET {
            return Err(Error::SizeLimit(format!(
                "{what} alphabet size {size} exceeds the cap of {MAX_ALPHABET}"
            )));
        }
    }
    if q.len() != table.s_count() || cond_pmf.len() != table.s_count() {
        return Err(Error::DimMismatch(
            "state pmf and strategy rows must match the table's state count".into(),
        ));
    }

    // Joint pmf and the marginal codeword distribution.
    let x_count = table.x_count();
    let p_sx: Vec<Vec<f64>> = (0..table.s_count())
        .map(|s| (0..x_count).map(|x| q[s] * cond_pmf[s][x]).collect())
        .collect();
    let mut p_x = vec![0.0; x_count];
    for row in &p_sx {
        for (x, &p) in row.iter().enumerate() {
            p_x[x] += p;
        }
    }
    let i_xs = mutual_information_classical(&p_sx);
    let rtilde = config.rtilde.unwrap_or(config.rate + i_xs + 0.1);

    let num_messages = config.num_messages();
    let codebook = match config.encoder {
        EncoderMode::Binning => Some(generate_codebook(
            &p_x,
            config.n,
            config.rate,
            rtilde,
            config.seed,
        )?),
        EncoderMode::Custom(_) => None,
    };
    let p_y_given_x = table.induced_output_channel(&p_sx);

    let counts = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut state_rng = stream_rng(config.seed, trial, TAG_STATE);
            let s_n: Vec<usize> = (0..config.n).map(|_| sample_pmf(q, &mut state_rng)).collect();
            let mut msg_rng = stream_rng(config.seed, trial, TAG_MESSAGE);
            let m = msg_rng.random_range(0..num_messages);
            let (x_n, covering_failed): (Vec<usize>, bool) = match (&config.encoder, &codebook) {
                (EncoderMode::Binning, Some(cb)) => {
                    let (k, failed) = encode_binning(m as usize, &s_n, cb, &p_sx, config.delta);
                    (cb.codeword(k).to_vec(), failed)
                }
                (EncoderMode::Custom(coder), _) => ((coder.encode)(m, &s_n, num_messages), false),
                _ => unreachable!(),
            };
            let mut channel_rng = stream_rng(config.seed, trial, TAG_CHANNEL);
            let y_n = sample_channel(&x_n, &s_n, table, &mut channel_rng);
            let m_hat = match (&config.encoder, &codebook) {
                (EncoderMode::Binning, Some(cb)) => decode_ml(&y_n, cb, &p_y_given_x).1 as u64,
                (EncoderMode::Custom(coder), _) => (coder.decode)(&y_n, num_messages),
                _ => unreachable!(),
            };
            ((m_hat != m) as u64, covering_failed as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let trials_f = config.trials as f64;
    let error_rate = counts.0 as f64 / trials_f;
    let covering_failure_rate = counts.1 as f64 / trials_f;
    let ci_halfwidth = 1.96 * (error_rate * (1.0 - error_rate) / trials_f).sqrt();

    // Exact leakage when the enumeration fits the cell budget.
    let cells = leakage_cells(table.s_count(), table.y_count(), config.n, num_messages);
    let (leakage_bits_per_letter, leakage_note) = if cells <= MAX_LEAKAGE_CELLS {
        let value = match (&config.encoder, &codebook) {
            (EncoderMode::Binning, Some(cb)) => exact_leakage(
                |m, s_n| {
                    let (k, _) = encode_binning(m as usize, s_n, cb, &p_sx, config.delta);
                    cb.codeword(k).to_vec()
                },
                table,
                q,
                config.n,
                num_messages,
            )?,
            (EncoderMode::Custom(coder), _) => exact_leakage(
                |m, s_n| (coder.encode)(m, s_n, num_messages),
                table,
                q,
                config.n,
                num_messages,
            )?,
            _ => unreachable!(),
        };
        (Some(value), None)
    } else {
        (
            None,
            Some(format!(
                "leakage omitted: {cells} joint cells exceed the cap of {MAX_LEAKAGE_CELLS}"
            )),
        )
    };

    // Single-letter bounds of the same strategy through the region evaluator.
    let (channel, source, strategy) = classical_embedding(table, q, cond_pmf)?;
    let point = evaluate_strategy(&source, &strategy, &channel)?;

    Ok(SimResult {
        config: ConfigEcho {
            n: config.n,
            rate: config.rate,
            rtilde,
            delta: config.delta,
            trials: config.trials,
            encoder: config.encoder.describe(),
        },
        error_rate,
        ci_halfwidth,
        covering_failure_rate,
        leakage_bits_per_letter,
        leakage_note,
        prediction: Prediction { r_bound: point.rate, l_bound: point.leakage },
        seed: config.seed,
    })
}

/// `I(S;X)` of a classical joint pmf, in bits.
pub fn mutual_information_classical(p_sx: &[Vec<f64>]) -> f64 {
    let s_count = p_sx.len();
    let x_count = p_sx.first().map(Vec::len).unwrap_or(0);
    let p_s: Vec<f64> = p_sx.iter().map(|row| row.iter().sum()).collect();
    let mut p_x = vec![0.0; x_count];
    for row in p_sx {
        for (x, &p) in row.iter().enumerate() {
            p_x[x] += p;
        }
    }
    let mut mi = 0.0;
    for s in 0..s_count {
        for x in 0..x_count {
            let p = p_sx[s][x];
            if p > 0.0 {
                mi += p * (p / (p_s[s] * p_x[x])).log2();
            }
        }
    }
    mi.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mod_add_with_correction_coder_is_noiseless_and_leak_free() {
        let config = SimConfig {
            n: 8,
            rate: 7.0 / 8.0,
            rtilde: None,
            delta: 0.2,
            trials: 200,
            seed: 5,
            encoder: EncoderMode::Custom(crate::presets::correction_coder()),
        };
        let table = mod_add_table();
        let q = [0.5, 0.5];
        let cond = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let result = simulate(&config, &table, &q, &cond).unwrap();
        assert_eq!(result.error_rate, 0.0);
        assert!(result.leakage_bits_per_letter.unwrap().abs() < 1e-12);
    }

    #[test]
    fn identical_seeds_give_identical_results_under_any_thread_count() {
        let config = SimConfig {
            n: 6,
            rate: 0.5,
            rtilde: None,
            delta: 0.25,
            trials: 120,
            seed: 99,
            encoder: EncoderMode::Binning,
        };
        let table = mod_add_table();
        let q = [0.3, 0.7];
        let cond = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let a = simulate(&config, &table, &q, &cond).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate(&config, &table, &q, &cond).unwrap());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn simulate_rejects_oversized_alphabets_and_blocks() {
        let w = vec![vec![vec![0.2; 5]; 2]; 2];
        let table = ChannelTable::new(2, 2, 5, &w).unwrap();
        let config = SimConfig {
            n: 4,
            rate: 0.5,
            rtilde: None,
            delta: 0.1,
            trials: 10,
            seed: 1,
            encoder: EncoderMode::Binning,
        };
        let err = simulate(&config, &table, &[0.5, 0.5], &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(err, Err(Error::SizeLimit(msg)) if msg.contains("output")));

        let config = SimConfig { n: 11, ..config };
        let err = simulate(&config, &mod_add_table(), &[0.5, 0.5], &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(err, Err(Error::SizeLimit(msg)) if msg.contains("block length")));
    }

    #[test]
    fn induced_table_matches_born_rule() {
        let (channel, _) = crate::presets::projection_measurement(0.5).unwrap();
        let states = vec![
            DensityOperator::basis_state(2, 0),
            DensityOperator::basis_state(2, 1),
        ];
        let table = induced_table(&channel, &states).unwrap();
        // s = 0: identity then measure → y = x; s = 1: always ψ → y = 0.
        for x in 0..2 {
            assert_relative_eq!(table.w(0, x, x), 1.0, epsilon = 1e-12);
            assert_relative_eq!(table.w(1, x, 0), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn negative_probabilities_are_rejected() {
        let w = vec![vec![vec![1.1, -0.1]; 2]; 2];
        assert!(matches!(
            ChannelTable::new(2, 2, 2, &w),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn prediction_comes_from_the_region_evaluator() {
        // For the ε = 0.5 projection analog with the α = 0.5 strategy the
        // single-letter pair is ((1−ε)h(α), h((1−ε)α) − (1−ε)h(α)).
        let (channel, _) = crate::presets::projection_measurement(0.5).unwrap();
        let states = vec![
            DensityOperator::basis_state(2, 0),
            DensityOperator::basis_state(2, 1),
        ];
        let table = induced_table(&channel, &states).unwrap();
        let config = SimConfig {
            n: 4,
            rate: 0.25,
            rtilde: None,
            delta: 0.3,
            trials: 50,
            seed: 31,
            encoder: EncoderMode::Binning,
        };
        let q = [0.5, 0.5];
        let cond = vec![vec![0.5, 0.5], vec![1.0, 0.0]];
        let result = simulate(&config, &table, &q, &cond).unwrap();
        assert_relative_eq!(result.prediction.r_bound, 0.5, epsilon = 1e-9);
        assert_relative_eq!(result.prediction.l_bound, 0.3112781245, epsilon = 1e-9);
    }
}
