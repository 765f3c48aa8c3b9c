//! Parameter budgets for phase-estimation moment estimation.
//!
//! For target accuracy `eps` on the `m`-th moment (at unit scale), the
//! error splits into three equal thirds: phase-estimation bias, sampling
//! error, and imperfect simulation of `exp(iA)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Full budget for one estimation at unit scale (`b = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpeParams {
    /// Number of control qubits.
    pub p: u32,
    /// Phase accuracy.
    pub eta: f64,
    /// Per-eigenstate failure probability of phase estimation.
    pub theta: f64,
    /// Number of samples.
    pub k: usize,
    /// Allowed operator-norm error when simulating `exp(iA)`.
    pub delta: f64,
    pub m: u32,
    pub epsilon: f64,
    /// Overall failure probability of the sampling step.
    pub fail_prob: f64,
}

/// `2 * ceil(log2(48 m / eps))`.
pub fn control_qubits(m: u32, epsilon: f64) -> u32 {
    2 * ceil_log2(48.0 * f64::from(m) / epsilon)
}

/// Smallest `c >= 0` with `2^c >= x`.
pub(crate) fn ceil_log2(x: f64) -> u32 {
    let mut c = x.log2().ceil().max(0.0) as u32;
    while c > 0 && 2f64.powi(c as i32 - 1) >= x {
        c -= 1;
    }
    while 2f64.powi(c as i32) < x {
        c += 1;
    }
    c
}

/// Sample count from the two-sided Hoeffding bound for values in `[-1, 1]`
/// and deviation `eps / 3`: `k = ceil(18 ln(2 / fail_prob) / eps^2)`.
pub fn hoeffding_samples(epsilon: f64, fail_prob: f64) -> usize {
    (18.0 * (2.0 / fail_prob).ln() / (epsilon * epsilon)).ceil() as usize
}

/// `2 exp(-eps^2 k / 18)`.
pub fn hoeffding_failure_bound(epsilon: f64, k: usize) -> f64 {
    2.0 * (-epsilon * epsilon * k as f64 / 18.0).exp()
}

/// Chooses `theta = eps/13`, `eta = eps/(13 pi m)`, `p`, `k` and `delta`.
pub fn choose_params(m: u32, epsilon: f64, fail_prob: f64) -> Result<QpeParams> {
    if m == 0 {
        return Err(Error::InvalidParameter("power m must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(fail_prob > 0.0 && fail_prob < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability must lie in (0, 1), got {fail_prob}"
        )));
    }
    let theta = epsilon / 13.0;
    let eta = epsilon / (13.0 * PI * f64::from(m));
    let p = control_qubits(m, epsilon);
    let params = QpeParams {
        p,
        eta,
        theta,
        k: hoeffding_samples(epsilon, fail_prob),
        delta: epsilon / (3.0 * 2f64.powi(p as i32 + 2)),
        m,
        epsilon,
        fail_prob,
    };
    params.validate()?;
    Ok(params)
}

impl QpeParams {
    /// Checks the budget invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::InvalidParameter(format!("budget violates {what}")));
        if self.p != control_qubits(self.m, self.epsilon) {
            return fail("p = 2 ceil(log2(48 m / eps))");
        }
        if !(self.theta > 0.0 && self.theta < self.epsilon / 12.0) {
            return fail("theta < eps / 12");
        }
        if !(self.eta > 0.0 && self.eta < self.epsilon / (12.0 * PI * f64::from(self.m))) {
            return fail("eta < eps / (12 pi m)");
        }
        if (self.k as f64) < 18.0 * (2.0 / self.fail_prob).ln() / (self.epsilon * self.epsilon) {
            return fail("k >= 18 ln(2 / fail_prob) / eps^2");
        }
        if self.delta > self.epsilon / (3.0 * 2f64.powi(self.p as i32 + 2)) {
            return fail("delta <= eps / (3 2^(p+2))");
        }
        if self.sufficient_control_qubits() >= self.p {
            return fail("ceil(log2(1/eta)) + ceil(log2(2 + 1/(2 theta))) < p");
        }
        Ok(())
    }

    /// `ceil(log2(1/eta)) + ceil(log2(2 + 1/(2 theta)))`, the textbook
    /// control-qubit count that guarantees the `(eta, theta)` contract.
    pub fn sufficient_control_qubits(&self) -> u32 {
        ceil_log2(1.0 / self.eta) + ceil_log2(2.0 + 1.0 / (2.0 * self.theta))
    }

    pub fn budget(&self) -> PhaseBudget {
        PhaseBudget {
            p: self.p,
            eta: self.eta,
            theta: self.theta,
        }
    }

    /// `2 theta + 2 pi m eta`; below `eps / 3` by construction.
    pub fn moment_error_bound(&self) -> f64 {
        self.budget().moment_error_bound(self.m)
    }

    pub fn hoeffding_failure_bound(&self) -> f64 {
        hoeffding_failure_bound(self.epsilon, self.k)
    }

    /// `2^(p+2) delta`: worst-case shift of `E[Z^m]` from a `delta`-close
    /// unitary.
    pub fn perturbation_bound(&self, delta: f64) -> f64 {
        perturbation_bound(self.p, delta)
    }
}

/// `2^(p+2) delta`.
pub fn perturbation_bound(p: u32, delta: f64) -> f64 {
    2f64.powi(p as i32 + 2) * delta
}

/// The `(p, eta, theta)` triple of a phase-estimation run:
/// `Pr(|phi - a/2^p| < eta) > 1 - theta` for every eigenphase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseBudget {
    pub p: u32,
    pub eta: f64,
    pub theta: f64,
}

impl PhaseBudget {
    /// A budget for a fixed, small control register: `theta = 1/10` costs
    /// three guard qubits, the rest buy accuracy `eta = 2^-(p-3)`.
    pub fn for_control_qubits(p: u32) -> Result<Self> {
        if p < 4 {
            return Err(Error::InvalidParameter(format!("need at least 4 control qubits, got {p}")));
        }
        Ok(Self {
            p,
            eta: 2f64.powi(-(p as i32 - 3)),
            theta: 0.1,
        })
    }

    /// `2 theta + 2 pi m eta`.
    pub fn moment_error_bound(&self, m: u32) -> f64 {
        2.0 * self.theta + 2.0 * PI * f64::from(m) * self.eta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_qubit_examples() {
        // 48 * 8 / 0.1 = 3840, ceil(log2) = 12
        assert_eq!(control_qubits(8, 0.1), 24);
        assert_eq!(control_qubits(1, 1.0), 12);
        // exact power of two: 48 * 4 / 0.75 = 256
        assert_eq!(control_qubits(4, 0.75), 16);
    }

    #[test]
    fn hoeffding_sample_count() {
        assert_eq!(hoeffding_samples(0.3, 0.01), 1060);
        let p = choose_params(3, 0.3, 0.01).unwrap();
        assert_eq!(p.k, 1060);
        assert!(p.hoeffding_failure_bound() <= 0.01);
    }

    #[test]
    fn unit_power_full_accuracy() {
        let p = choose_params(1, 1.0, 0.05).unwrap();
        assert_eq!(p.p, 12);
        assert_eq!(p.theta, 1.0 / 13.0);
        assert_eq!(p.eta, 1.0 / (13.0 * PI));
        assert_eq!(p.delta, 1.0 / (3.0 * 2f64.powi(14)));
        assert!(p.moment_error_bound() < 1.0 / 3.0);
    }

    #[test]
    fn range_errors() {
        assert!(choose_params(0, 0.5, 0.1).is_err());
        assert!(choose_params(2, 0.0, 0.1).is_err());
        assert!(choose_params(2, 1.5, 0.1).is_err());
        assert!(choose_params(2, 0.5, 1.0).is_err());
    }

    #[test]
    fn ceil_log2_exact_powers() {
        assert_eq!(ceil_log2(1.0), 0);
        assert_eq!(ceil_log2(2.0), 1);
        assert_eq!(ceil_log2(2.000001), 2);
        assert_eq!(ceil_log2(48.0), 6);
        assert_eq!(ceil_log2(0.5), 0);
    }
}
