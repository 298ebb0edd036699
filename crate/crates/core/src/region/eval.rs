//! Fast strategy evaluation for the optimizer inner loops.
//!
//! For a fixed CSI POVM the induced post-channel state is block diagonal
//! over the classical pair (s, x):
//!
//! ```text
//! ρ_{BCSX} = Σ_{s,x} p(s) p(x|s) |s,x⟩⟨s,x| ⊗ τ^{s,x}_{CB}
//! ```
//!
//! so every entropy in the rate and leakage functionals decomposes into
//! per-branch constants (computed once per input-state family) plus
//! eigendecompositions of |X|+1 small output mixtures. Gradients with
//! respect to the conditional pmf come from `dS(A) = −Tr[dA (ln A + 1)]`,
//! reusing the same decompositions. Everything here works in nats; the
//! public surface converts to bits.

use crate::channels::{Channel, StateSource};
use crate::error::{Error, Result};
use crate::linalg::{
    eye, herm_eigen, is_diagonal, kron, partial_trace_factors, CMat,
};
use crate::qstate::{DensityOperator, Povm};

const LN_CLAMP: f64 = 1e-30;

/// Entropy `−Tr A ln A` of an unnormalized PSD operator, in nats.
fn entropy_nats(m: &CMat) -> f64 {
    if is_diagonal(m, 0.0) {
        return (0..m.nrows())
            .map(|i| {
                let v = m[(i, i)].re;
                if v > 0.0 {
                    -v * v.ln()
                } else {
                    0.0
                }
            })
            .sum();
    }
    let (vals, _) = herm_eigen(m);
    vals.iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum()
}

/// Entropy and matrix logarithm (support-clamped) of a PSD operator.
fn entropy_and_log(m: &CMat) -> (f64, CMat) {
    let dim = m.nrows();
    if is_diagonal(m, 0.0) {
        let mut h = 0.0;
        let mut log = CMat::zeros(dim, dim);
        for i in 0..dim {
            let v = m[(i, i)].re;
            if v > 0.0 {
                h -= v * v.ln();
            }
            log[(i, i)] = num_complex::Complex64::new(v.max(LN_CLAMP).ln(), 0.0);
        }
        return (h, log);
    }
    let (vals, vecs) = herm_eigen(m);
    let mut h = 0.0;
    let mut diag = CMat::zeros(dim, dim);
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            h -= v * v.ln();
        }
        diag[(i, i)] = num_complex::Complex64::new(v.max(LN_CLAMP).ln(), 0.0);
    }
    (h, &vecs * diag * vecs.adjoint())
}

fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let prod = a[(i, j)] * b[(j, i)];
            acc += prod.re;
        }
    }
    acc
}

/// Rate/leakage values of one pmf under a fixed instance, in nats.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FastValues {
    pub rate_raw: f64,
    pub leakage: f64,
}

impl FastValues {
    pub fn objective(&self, lambda: f64, budget_nats: f64) -> f64 {
        self.rate_raw - lambda * (self.leakage - budget_nats).max(0.0)
    }
}

/// Precomputed per-(s, x) data for one (POVM, input states) configuration.
pub(crate) struct FastEval {
    channel: Channel,
    /// Original POVM outcome index per kept row.
    pub kept_outcomes: Vec<usize>,
    pub s_count: usize,
    pub x_count: usize,
    pub p_s: Vec<f64>,
    sigma_ec: Vec<CMat>,
    dim_e: usize,
    dim_c: usize,
    dim_a: usize,
    /// H(CS) in nats (independent of the pmf and input states).
    h_cs: f64,
    /// Output marginal τ^{s,x}_B (diag of outcome weights for measurement
    /// channels); indexed s·x_count + x.
    tau_b: Vec<CMat>,
    /// Branch entropies S(τ^{s,x}_{CB}) in nats.
    h_branch: Vec<f64>,
    /// Permutation (E,C,A) → (E,A,C) applied to branch inputs.
    input_perm: CMat,
    states: Vec<DensityOperator>,
}

impl FastEval {
    pub fn new(
        source: &StateSource,
        povm: &Povm,
        states: &[DensityOperator],
        channel: &Channel,
    ) -> Result<Self> {
        if povm.dim() != source.dim_e0() {
            return Err(Error::DimMismatch(format!(
                "CSI POVM dim {} does not match source dimE0 {}",
                povm.dim(),
                source.dim_e0()
            )));
        }
        let dim_a = states
            .first()
            .map(|s| s.dim())
            .ok_or_else(|| Error::Domain("at least one input state required".into()))?;
        if channel.dim_a() != dim_a || channel.dim_e() != source.dim_e() {
            return Err(Error::DimMismatch(
                "channel dims do not match source/state dims".into(),
            ));
        }
        let outcomes = source.measure_csi(povm)?;
        if outcomes.is_empty() {
            return Err(Error::Domain("every CSI outcome has zero probability".into()));
        }
        let kept_outcomes: Vec<usize> = outcomes.iter().map(|(s, _, _)| *s).collect();
        let p_s: Vec<f64> = outcomes.iter().map(|(_, p, _)| *p).collect();
        let sigma_ec: Vec<CMat> = outcomes.into_iter().map(|(_, _, m)| m).collect();
        let dim_e = source.dim_e();
        let dim_c = source.dim_c();

        let mut h_cs = crate::qstate::shannon_entropy_nats(&p_s);
        for (s, sigma) in sigma_ec.iter().enumerate() {
            let sigma_c = partial_trace_factors(sigma, &[dim_e, dim_c], &[false, true]);
            h_cs += p_s[s] * entropy_nats(&sigma_c);
        }

        let input_perm =
            crate::linalg::factor_permutation_matrix(&[dim_e, dim_c, dim_a], &[0, 2, 1]);

        let s_count = p_s.len();
        let x_count = states.len();
        let mut this = Self {
            channel: channel.clone(),
            kept_outcomes,
            s_count,
            x_count,
            p_s,
            sigma_ec,
            dim_e,
            dim_c,
            dim_a,
            h_cs,
            tau_b: vec![CMat::zeros(1, 1); s_count * x_count],
            h_branch: vec![0.0; s_count * x_count],
            input_perm,
            states: states.to_vec(),
        };
        for x in 0..x_count {
            this.refresh_x(x)?;
        }
        Ok(this)
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    /// Replace the input state for one x and refresh its column.
    pub fn set_state(&mut self, x: usize, state: DensityOperator) -> Result<()> {
        self.states[x] = state;
        self.refresh_x(x)
    }

    fn refresh_x(&mut self, x: usize) -> Result<()> {
        for s in 0..self.s_count {
            let joint = kron(&self.sigma_ec[s], self.states[x].matrix());
            let arranged = &self.input_perm * joint * self.input_perm.adjoint();
            let idx = s * self.x_count + x;
            match &self.channel {
                Channel::Kraus(c) => {
                    let out_cb = c.apply_matrix(&arranged, self.dim_c)?;
                    self.h_branch[idx] = entropy_nats(&out_cb);
                    self.tau_b[idx] = if self.dim_c == 1 {
                        out_cb
                    } else {
                        partial_trace_factors(&out_cb, &[c.dim_b(), self.dim_c], &[true, false])
                    };
                }
                Channel::Measurement(c) => {
                    let ea = self.dim_e * self.dim_a;
                    let y_count = c.num_outcomes();
                    let mut diag = CMat::zeros(y_count, y_count);
                    let mut h = 0.0;
                    for (y, (_, lambda)) in c.povm().elements().iter().enumerate() {
                        let projected = kron(lambda, &eye(self.dim_c)) * &arranged;
                        let cond =
                            partial_trace_factors(&projected, &[ea, self.dim_c], &[false, true]);
                        let w = cond.trace().re.max(0.0);
                        diag[(y, y)] = num_complex::Complex64::new(w, 0.0);
                        h += entropy_nats(&cond);
                    }
                    self.h_branch[idx] = h;
                    self.tau_b[idx] = diag;
                }
            }
        }
        Ok(())
    }

    fn out_dim(&self) -> usize {
        self.channel.output_size()
    }

    /// Rate and leakage of a conditional pmf (rows over kept outcomes).
    pub fn evaluate(&self, pmf: &[Vec<f64>]) -> FastValues {
        let d = self.out_dim();
        let mut rho_b = CMat::zeros(d, d);
        let mut sum_sx = 0.0; // Σ_x S(ρ^x_un)
        let mut h_x_given_s = 0.0;
        let mut h_w = 0.0; // −Σ w ln w
        let mut h_branch_sum = 0.0; // Σ w h_branch
        for x in 0..self.x_count {
            let mut rho_x = CMat::zeros(d, d);
            for s in 0..self.s_count {
                let w = self.p_s[s] * pmf[s][x];
                if w <= 0.0 {
                    continue;
                }
                rho_x += self.tau_b[s * self.x_count + x].scale(w);
                h_w -= w * w.ln();
                h_branch_sum += w * self.h_branch[s * self.x_count + x];
            }
            rho_b += &rho_x;
            sum_sx += entropy_nats(&rho_x);
        }
        for s in 0..self.s_count {
            h_x_given_s += self.p_s[s] * crate::qstate::shannon_entropy_nats(&pmf[s]);
        }
        let s_rho_b = entropy_nats(&rho_b);
        FastValues {
            rate_raw: s_rho_b - sum_sx + h_x_given_s,
            leakage: self.h_cs + sum_sx - h_w - h_branch_sum,
        }
    }

    /// Values together with the pmf gradients of the raw rate and the
    /// leakage, scaled per row by 1/p(s). Gradient rows for zero-probability
    /// outcomes never arise (those outcomes are dropped).
    pub fn evaluate_with_grad(&self, pmf: &[Vec<f64>]) -> (FastValues, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let d = self.out_dim();
        let mut rho_b = CMat::zeros(d, d);
        let mut rho_x_un: Vec<CMat> = Vec::with_capacity(self.x_count);
        for x in 0..self.x_count {
            let mut rho_x = CMat::zeros(d, d);
            for s in 0..self.s_count {
                let w = self.p_s[s] * pmf[s][x];
                if w > 0.0 {
                    rho_x += self.tau_b[s * self.x_count + x].scale(w);
                }
            }
            rho_b += &rho_x;
            rho_x_un.push(rho_x);
        }

        let (s_rho_b, log_rho_b) = entropy_and_log(&rho_b);
        let mut sum_sx = 0.0;
        let mut log_rho_x: Vec<CMat> = Vec::with_capacity(self.x_count);
        for rho_x in &rho_x_un {
            let (h, log) = entropy_and_log(rho_x);
            sum_sx += h;
            log_rho_x.push(log);
        }

        let mut h_x_given_s = 0.0;
        let mut h_w = 0.0;
        let mut h_branch_sum = 0.0;
        let mut grad_r = vec![vec![0.0; self.x_count]; self.s_count];
        let mut grad_l = vec![vec![0.0; self.x_count]; self.s_count];
        for s in 0..self.s_count {
            h_x_given_s += self.p_s[s] * crate::qstate::shannon_entropy_nats(&pmf[s]);
            for x in 0..self.x_count {
                let w = self.p_s[s] * pmf[s][x];
                if w > 0.0 {
                    h_w -= w * w.ln();
                    h_branch_sum += w * self.h_branch[s * self.x_count + x];
                }
                let tau = &self.tau_b[s * self.x_count + x];
                let t_log_b = trace_product_re(tau, &log_rho_b);
                let t_log_x = trace_product_re(tau, &log_rho_x[x]);
                let ln_p = pmf[s][x].max(LN_CLAMP).ln();
                let ln_w = w.max(LN_CLAMP).ln();
                // d/dp(x|s) of [S(ρ_B) − Σ S(ρ^x) + H(X|S)], divided by p(s).
                grad_r[s][x] = -t_log_b + t_log_x - ln_p - 1.0;
                // d/dp(x|s) of [Σ S(ρ^x) − Σ w ln w ... ] i.e. the leakage.
                grad_l[s][x] = -t_log_x + ln_w - self.h_branch[s * self.x_count + x];
            }
        }

        let values = FastValues {
            rate_raw: s_rho_b - sum_sx + h_x_given_s,
            leakage: self.h_cs + sum_sx - h_w - h_branch_sum,
        };
        (values, grad_r, grad_l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::qstate::bits;
    use crate::region::{evaluate_strategy_detailed, Strategy};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The fast path must agree with the authoritative hybrid-state route.
    #[test]
    fn fast_values_match_authoritative_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..10 {
            let (channel, source) = if trial % 2 == 0 {
                let (m, src) = crate::random::random_classical_csi_measurement(&mut rng, 2, 2, 2);
                (Channel::Measurement(m), src)
            } else {
                let rpc = presets::build_projection(0.4, &presets::default_psi()).unwrap();
                let (c, src) = rpc.lift().unwrap();
                (Channel::Kraus(c), src)
            };
            let povm = Povm::computational(source.dim_e0());
            let x_count = 3;
            let states: Vec<_> = (0..x_count)
                .map(|_| crate::random::random_pure_state(&mut rng, 2))
                .collect();
            let mut pmf = Vec::new();
            for _ in 0..source.dim_e0() {
                let mut row: Vec<f64> = (0..x_count).map(|_| rng.random::<f64>() + 0.05).collect();
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= total);
                pmf.push(row);
            }

            let ctx = FastEval::new(&source, &povm, &states, &channel).unwrap();
            let fast = ctx.evaluate(&pmf);

            let strategy = Strategy::new(povm.clone(), pmf.clone(), states.clone()).unwrap();
            let slow = evaluate_strategy_detailed(&source, &strategy, &channel).unwrap();
            assert_relative_eq!(bits(fast.rate_raw), slow.rate_raw, epsilon = 1e-9);
            assert_relative_eq!(bits(fast.leakage), slow.point.leakage, epsilon = 1e-9);
        }
    }

    /// Analytic pmf gradients must match central finite differences.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (m, source) = crate::random::random_classical_csi_measurement(&mut rng, 2, 2, 2);
        let channel = Channel::Measurement(m);
        let povm = Povm::computational(2);
        let states: Vec<_> = (0..3).map(|_| crate::random::random_pure_state(&mut rng, 2)).collect();
        let ctx = FastEval::new(&source, &povm, &states, &channel).unwrap();
        let pmf = vec![vec![0.5, 0.3, 0.2], vec![0.25, 0.25, 0.5]];
        let (_, grad_r, grad_l) = ctx.evaluate_with_grad(&pmf);
        let h = 1e-6;
        for s in 0..2 {
            for x in 0..3 {
                let mut plus = pmf.clone();
                let mut minus = pmf.clone();
                plus[s][x] += h;
                minus[s][x] -= h;
                let vp = ctx.evaluate(&plus);
                let vm = ctx.evaluate(&minus);
                let fd_r = (vp.rate_raw - vm.rate_raw) / (2.0 * h) / ctx.p_s[s];
                let fd_l = (vp.leakage - vm.leakage) / (2.0 * h) / ctx.p_s[s];
                assert_relative_eq!(grad_r[s][x], fd_r, epsilon = 1e-4, max_relative = 1e-4);
                assert_relative_eq!(grad_l[s][x], fd_l, epsilon = 1e-4, max_relative = 1e-4);
            }
        }
    }
}
