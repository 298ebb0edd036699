//! Exact small-blocklength leakage `I(S^n; Y^n)/n` by full enumeration of
//! the joint distribution induced by a deterministic encoder and a
//! memoryless channel table, under a uniform message.

use super::ChannelTable;
use crate::error::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Joint-cell budget `|S|^n · |Y|^n · 2^{nR}`.
pub const MAX_LEAKAGE_CELLS: u64 = 1 << 26;

/// Number of enumeration cells for a given instance, saturating.
pub fn leakage_cells(s_count: usize, y_count: usize, n: usize, num_messages: u64) -> u64 {
    let sn = (s_count as u64).checked_pow(n as u32);
    let yn = (y_count as u64).checked_pow(n as u32);
    match (sn, yn) {
        (Some(a), Some(b)) => a.saturating_mul(b).saturating_mul(num_messages),
        _ => u64::MAX,
    }
}

fn advance(odometer: &mut [usize], base: usize) -> bool {
    for slot in odometer.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

fn sequence_probability(s_n: &[usize], q: &[f64]) -> f64 {
    s_n.iter().map(|&s| q[s]).product()
}

/// Conditional distribution of `Y^n` given `s^n` under a uniform message:
/// `p(y^n | s^n) = (1/M) Σ_m Π_i W(y_i | x_i(m, s^n), s_i)`.
fn conditional_output<F>(
    encode: &F,
    table: &ChannelTable,
    s_n: &[usize],
    num_messages: u64,
    out: &mut [f64],
) where
    F: Fn(u64, &[usize]) -> Vec<usize>,
{
    let y_count = table.y_count();
    out.fill(0.0);
    let inv_m = 1.0 / num_messages as f64;
    let mut cur: Vec<f64> = Vec::with_capacity(out.len());
    let mut next: Vec<f64> = Vec::with_capacity(out.len());
    for m in 0..num_messages {
        let x_n = encode(m, s_n);
        cur.clear();
        cur.push(1.0);
        for (i, &s) in s_n.iter().enumerate() {
            next.clear();
            next.resize(cur.len() * y_count, 0.0);
            for (prefix, &pv) in cur.iter().enumerate() {
                if pv == 0.0 {
                    continue;
                }
                for y in 0..y_count {
                    let w = table.w(s, x_n[i], y);
                    if w > 0.0 {
                        next[prefix * y_count + y] = pv * w;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        for (idx, &pv) in cur.iter().enumerate() {
            out[idx] += pv * inv_m;
        }
    }
}

/// Exact `I(S^n; Y^n)/n` in bits per letter for a deterministic encoder
/// `m, s^n → x^n`, a memoryless channel table, an i.i.d. state pmf `q`, and
/// a uniform message over `[0, num_messages)`.
pub fn exact_leakage<F>(
    encode: F,
    table: &ChannelTable,
    q: &[f64],
    n: usize,
    num_messages: u64,
) -> Result<f64>
where
    F: Fn(u64, &[usize]) -> Vec<usize>,
{
    if q.len() != table.s_count() {
        return Err(Error::DimMismatch(format!(
            "state pmf has {} entries, table expects {}",
            q.len(),
            table.s_count()
        )));
    }
    let cells = leakage_cells(table.s_count(), table.y_count(), n, num_messages);
    if cells > MAX_LEAKAGE_CELLS {
        return Err(Error::SizeLimit(format!(
            "exact leakage needs {cells} joint cells, over the cap of {MAX_LEAKAGE_CELLS}"
        )));
    }
    let y_total = table.y_count().pow(n as u32);
    let mut p_y = vec![0.0f64; y_total];
    let mut cond = vec![0.0f64; y_total];

    // Pass 1: output marginal.
    let mut s_n = vec![0usize; n];
    loop {
        let p_s = sequence_probability(&s_n, q);
        if p_s > 0.0 {
            conditional_output(&encode, table, &s_n, num_messages, &mut cond);
            for (py, &c) in p_y.iter_mut().zip(&cond) {
                *py += p_s * c;
            }
        }
        if !advance(&mut s_n, table.s_count()) {
            break;
        }
    }

    // Pass 2: relative entropy of the conditionals against the marginal.
    let mut mi_nats = 0.0;
    s_n.fill(0);
    loop {
        let p_s = sequence_probability(&s_n, q);
        if p_s > 0.0 {
            conditional_output(&encode, table, &s_n, num_messages, &mut cond);
            for (idx, &c) in cond.iter().enumerate() {
                if c > 0.0 {
                    mi_nats += p_s * c * (c / p_y[idx]).ln();
                }
            }
        }
        if !advance(&mut s_n, table.s_count()) {
            break;
        }
    }
    Ok((mi_nats / LN2 / n as f64).max(0.0))
}
