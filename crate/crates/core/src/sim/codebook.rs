//! Binned random codebooks: i.i.d. codewords drawn from `p_X`, partitioned
//! into equal contiguous sub-codebooks `B(m)`, with the covering-style
//! binning encoder and a maximum-likelihood decoder.

use super::rng::{stream_rng, TAG_CODEBOOK};
use super::typicality::jointly_typical_check;
use crate::error::{Error, Result};
use rand::Rng;

/// Hard cap on materialized codewords.
pub const MAX_CODEWORDS: usize = 1 << 20;

/// A binned random codebook. Bin `m` holds the contiguous index range
/// `[m·bin_size, (m+1)·bin_size)`.
#[derive(Debug, Clone)]
pub struct Codebook {
    codewords: Vec<Vec<usize>>,
    num_bins: usize,
    bin_size: usize,
    p_x: Vec<f64>,
    seed: u64,
}

impl Codebook {
    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }
    pub fn codeword(&self, k: usize) -> &[usize] {
        &self.codewords[k]
    }
    pub fn num_bins(&self) -> usize {
        self.num_bins
    }
    pub fn bin_size(&self) -> usize {
        self.bin_size
    }
    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn bin_range(&self, m: usize) -> std::ops::Range<usize> {
        m * self.bin_size..(m + 1) * self.bin_size
    }
    /// The bin containing codeword index `k`.
    pub fn bin_of(&self, k: usize) -> usize {
        k / self.bin_size
    }
}

pub(crate) fn round_pow2(exponent_bits: f64) -> usize {
    (2f64.powf(exponent_bits)).round() as usize
}

/// Draw the codebook for block length `n`, message rate `rate`, and total
/// codebook rate `rtilde` (bits per use): `round(2^{n·rate})` bins of
/// `round(2^{n(rtilde−rate)})` codewords each, i.i.d. from `p_x`,
/// deterministic per seed.
pub fn generate_codebook(p_x: &[f64], n: usize, rate: f64, rtilde: f64, seed: u64) -> Result<Codebook> {
    if rate < 0.0 || rtilde < rate {
        return Err(Error::Domain(format!(
            "rates must satisfy 0 ≤ R ({rate}) ≤ R̃ ({rtilde})"
        )));
    }
    let num_bins = round_pow2(n as f64 * rate).max(1);
    let bin_size = round_pow2(n as f64 * (rtilde - rate)).max(1);
    let total = num_bins
        .checked_mul(bin_size)
        .ok_or_else(|| Error::SizeLimit("codebook size overflows".into()))?;
    if total > MAX_CODEWORDS {
        return Err(Error::SizeLimit(format!(
            "codebook of {total} codewords exceeds the cap of {MAX_CODEWORDS}"
        )));
    }
    // Cumulative distribution for inverse sampling.
    let mut cdf = Vec::with_capacity(p_x.len());
    let mut acc = 0.0;
    for &p in p_x {
        acc += p;
        cdf.push(acc);
    }
    let codewords = (0..total)
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64, TAG_CODEBOOK);
            (0..n).map(|_| sample_cdf(&cdf, rng.random::<f64>())).collect()
        })
        .collect();
    Ok(Codebook { codewords, num_bins, bin_size, p_x: p_x.to_vec(), seed })
}

pub(crate) fn sample_cdf(cdf: &[f64], u: f64) -> usize {
    let target = u * cdf.last().copied().unwrap_or(1.0);
    for (i, &c) in cdf.iter().enumerate() {
        if target < c {
            return i;
        }
    }
    cdf.len() - 1
}

/// Binning encoder: the first codeword in `B(m)` jointly typical with the
/// state sequence. On covering failure the first index of the bin is used
/// and the flag is set.
pub fn encode_binning(
    m: usize,
    s_n: &[usize],
    codebook: &Codebook,
    p_sx: &[Vec<f64>],
    delta: f64,
) -> (usize, bool) {
    let range = codebook.bin_range(m);
    let first = range.start;
    for k in range {
        if jointly_typical_check(s_n, codebook.codeword(k), p_sx, delta) {
            return (k, false);
        }
    }
    (first, true)
}

/// Maximum-likelihood decoder under the induced single-letter channel
/// `p(y|x)`: `k̂ = argmax_k Π_i p(y_i | x_i(k))` with ties resolved toward
/// the lowest index; the message estimate is the bin of `k̂`.
pub fn decode_ml(y_n: &[usize], codebook: &Codebook, p_y_given_x: &[Vec<f64>]) -> (usize, usize) {
    let mut best_k = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (k, codeword) in codebook.codewords().iter().enumerate() {
        let mut score = 0.0;
        for (&y, &x) in y_n.iter().zip(codeword) {
            let p = p_y_given_x[x][y];
            if p > 0.0 {
                score += p.ln();
            } else {
                score = f64::NEG_INFINITY;
                break;
            }
        }
        if score > best_score {
            best_score = score;
            best_k = k;
        }
    }
    (best_k, codebook.bin_of(best_k))
}
