//! δ-typical sets over finite alphabets: a sequence is typical when every
//! symbol frequency deviates from the pmf by at most δ, and symbols of
//! probability zero do not occur at all. Joint typicality applies the same
//! test to the pair-frequency table.

/// True iff `x_n` is δ-typical for `p`.
pub fn typical_check(x_n: &[usize], p: &[f64], delta: f64) -> bool {
    let n = x_n.len();
    if n == 0 {
        return false;
    }
    let mut counts = vec![0usize; p.len()];
    for &x in x_n {
        if x >= p.len() {
            return false;
        }
        counts[x] += 1;
    }
    for (a, &pa) in p.iter().enumerate() {
        let freq = counts[a] as f64 / n as f64;
        if pa > 0.0 {
            if (freq - pa).abs() > delta {
                return false;
            }
        } else if counts[a] > 0 {
            return false;
        }
    }
    true
}

/// True iff the pair `(s_n, x_n)` is jointly δ-typical for the joint pmf
/// `p_sx[s][x]`.
pub fn jointly_typical_check(s_n: &[usize], x_n: &[usize], p_sx: &[Vec<f64>], delta: f64) -> bool {
    let n = s_n.len();
    if n == 0 || x_n.len() != n {
        return false;
    }
    let s_count = p_sx.len();
    let x_count = p_sx.first().map(Vec::len).unwrap_or(0);
    let mut counts = vec![0usize; s_count * x_count];
    for (&s, &x) in s_n.iter().zip(x_n) {
        if s >= s_count || x >= x_count {
            return false;
        }
        counts[s * x_count + x] += 1;
    }
    for s in 0..s_count {
        for x in 0..x_count {
            let pa = p_sx[s][x];
            let freq = counts[s * x_count + x] as f64 / n as f64;
            if pa > 0.0 {
                if (freq - pa).abs() > delta {
                    return false;
                }
            } else if counts[s * x_count + x] > 0 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_type_match_is_typical_for_any_positive_delta() {
        let p = [0.5, 0.5];
        assert!(typical_check(&[1, 1, 0, 0], &p, 1e-9));
        assert!(typical_check(&[1, 1, 0, 0], &p, 0.1));
    }

    #[test]
    fn zero_probability_symbols_disqualify_regardless_of_delta() {
        let p = [1.0, 0.0];
        assert!(!typical_check(&[0, 0, 0, 1], &p, 10.0));
        assert!(typical_check(&[0, 0, 0, 0], &p, 1e-12));
    }

    #[test]
    fn frequency_within_slack_passes() {
        // n = 4, p = (1/2, 1/2), x = 1100 → frequencies (0.5, 0.5).
        assert!(typical_check(&[1, 1, 0, 0], &[0.5, 0.5], 0.1));
        // Eight zeros against a fair pmf deviate by 0.5.
        assert!(!typical_check(&[0; 8], &[0.5, 0.5], 0.4));
    }

    #[test]
    fn joint_typicality_checks_pair_frequencies() {
        let p_sx = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        // x = s exactly: pair frequencies match the joint pmf.
        assert!(jointly_typical_check(&[0, 1, 0, 1], &[0, 1, 0, 1], &p_sx, 0.05));
        // One mismatched position puts mass on a zero-probability cell.
        assert!(!jointly_typical_check(&[0, 1, 0, 1], &[0, 1, 1, 1], &p_sx, 0.5));
    }
}
