//! Closed-form worst-case approximation-ratio guarantees and certification.
//!
//! Minimization model (ratio `μ ≥ 1`, `v_QP ≤ μ·v_SDP`):
//!
//! | regime            | 𝔽 = ℝ                                  | 𝔽 = ℂ                              |
//! |-------------------|-----------------------------------------|-------------------------------------|
//! | `Q = M` or `ε = 1`| `27M²/π`                                | `max{8M, 24(√M−1)²}`                |
//! | `ε = 0`, `Q ≤ M−1`| `27Q²(M−Q+1)/π`                         | `max{8Q, 24(√Q−1)²}·(M−Q+1)`        |
//! | `0 < ε < 1`       | `max{27[M−Q+√(1/c)·Q]²/π,`              | `max{8[M−Q+Q/c],`                   |
//! |                   | `     12(√(2M)−1)²/((π−2)²c)}`          | `     24(√M−1)²/c}`                 |
//!
//! with `c = c(ε) = ε + (1−ε)/(M−Q+1)`.
//!
//! Maximization model (ratio `0 < μ̂ ≤ 1`, `v_QP ≥ μ̂·v_SDP`), `0 < ε ≤ 1`:
//! `μ̂ = (ε/c̃)·1/(200·ln(50K))` (real) or `(ε/c̃)·1/(4·ln(100K))` (complex),
//! where `c̃ = 1 − (1−ε)/(M−Q+1)` and `K = Σ_i min{rank(H_i), cap}` with cap
//! `√(2M)` (real) or `√M` (complex). At `ε = 0` no guarantee exists: the
//! true optimum can be zero while the relaxation stays positive, so the
//! request is refused.

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Field, Instance, ModelSense};

/// Slack applied to the certification inequality.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error(
        "no approximation guarantee exists for the maximization model at epsilon = 0: \
         the optimal value can be zero while the relaxation value stays positive"
    )]
    NoGuaranteeAtZeroEpsilon,
    #[error("bound requested for the wrong model sense")]
    WrongSense,
}

/// A theoretical ratio, the branch that produced it, and (after
/// [`certify`]) the empirical ratio it is checked against.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub sense: ModelSense,
    pub field: Field,
    /// Minimization: multiplicative upper bound `≥ 1`. Maximization:
    /// multiplicative lower bound in `(0, 1]`.
    pub mu: f64,
    /// Human-readable formula term that was binding.
    pub active_branch: String,
    pub m: usize,
    pub cardinality: usize,
    pub epsilon: f64,
    /// `c(ε)` or `c̃(ε)`, whichever the formula used.
    pub c_value: f64,
    /// Maximization only: the rank sum `K`.
    pub k_rank_sum: Option<f64>,
    pub empirical_ratio: Option<f64>,
    pub certified: Option<bool>,
}

/// `c(ε) = ε + (1−ε)/(M−Q+1)`, in `(0, 1]`.
pub fn c_eps(epsilon: f64, m: usize, q: usize) -> f64 {
    epsilon + (1.0 - epsilon) / (m - q + 1) as f64
}

/// `c̃(ε) = 1 − (1−ε)/(M−Q+1)`, in `[ε, 1]`; equals `ε` exactly when `Q = M`.
pub fn c_tilde(epsilon: f64, m: usize, q: usize) -> f64 {
    1.0 - (1.0 - epsilon) / (m - q + 1) as f64
}

fn pick(binding: &[(f64, &str)]) -> (f64, String) {
    let mut best = binding[0];
    for &cand in &binding[1..] {
        if cand.0 > best.0 {
            best = cand;
        }
    }
    (best.0, best.1.to_string())
}

/// Worst-case upper bound for the minimization model. Depends only on
/// `(field, M, Q, ε)`, never on the matrix entries.
pub fn min_bound(instance: &Instance) -> BoundReport {
    assert_eq!(instance.sense, ModelSense::Minimize);
    let m = instance.num_constraints();
    let q = instance.cardinality;
    let eps = instance.epsilon;
    let pi = std::f64::consts::PI;
    let mf = m as f64;
    let qf = q as f64;

    let (mu, active_branch, c_value) = if q == m || eps == 1.0 {
        let c = 1.0;
        match instance.field {
            Field::Real => (27.0 * mf * mf / pi, "27M^2/pi".to_string(), c),
            Field::Complex => {
                let (mu, branch) = pick(&[
                    (8.0 * mf, "8M"),
                    (24.0 * (mf.sqrt() - 1.0).powi(2), "24(sqrt(M)-1)^2"),
                ]);
                (mu, branch, c)
            }
        }
    } else if eps == 0.0 {
        let c = c_eps(eps, m, q);
        let spread = (m - q + 1) as f64;
        match instance.field {
            Field::Real => (
                27.0 * qf * qf * spread / pi,
                "27Q^2(M-Q+1)/pi".to_string(),
                c,
            ),
            Field::Complex => {
                let (mu, branch) = pick(&[
                    (8.0 * qf * spread, "8Q(M-Q+1)"),
                    (24.0 * (qf.sqrt() - 1.0).powi(2) * spread, "24(sqrt(Q)-1)^2(M-Q+1)"),
                ]);
                (mu, branch, c)
            }
        }
    } else {
        let c = c_eps(eps, m, q);
        match instance.field {
            Field::Real => {
                let first = 27.0 * (mf - qf + (1.0 / c).sqrt() * qf).powi(2) / pi;
                let second = 12.0 * ((2.0 * mf).sqrt() - 1.0).powi(2) / ((pi - 2.0).powi(2) * c);
                let (mu, branch) = pick(&[
                    (first, "27(M-Q+sqrt(1/c)Q)^2/pi"),
                    (second, "12(sqrt(2M)-1)^2/((pi-2)^2 c)"),
                ]);
                (mu, branch, c)
            }
            Field::Complex => {
                let (mu, branch) = pick(&[
                    (8.0 * (mf - qf + qf / c), "8(M-Q+Q/c)"),
                    (24.0 * (mf.sqrt() - 1.0).powi(2) / c, "24(sqrt(M)-1)^2/c"),
                ]);
                (mu, branch, c)
            }
        }
    };

    BoundReport {
        sense: instance.sense,
        field: instance.field,
        mu,
        active_branch,
        m,
        cardinality: q,
        epsilon: eps,
        c_value,
        k_rank_sum: None,
        empirical_ratio: None,
        certified: None,
    }
}

/// Worst-case lower bound for the maximization model, `0 < ε ≤ 1`. Depends
/// on the matrices only through their numerical ranks at `rank_tolerance`
/// (relative eigenvalue cutoff, default [`crate::instance::RANK_REL_TOL`]).
pub fn max_bound(instance: &Instance, rank_tolerance: f64) -> Result<BoundReport, BoundError> {
    if instance.sense != ModelSense::Maximize {
        return Err(BoundError::WrongSense);
    }
    let eps = instance.epsilon;
    if eps == 0.0 {
        return Err(BoundError::NoGuaranteeAtZeroEpsilon);
    }
    let m = instance.num_constraints();
    let q = instance.cardinality;
    let mf = m as f64;
    let ct = c_tilde(eps, m, q);
    // The rank cap follows the rank-reduction guarantee each field actually
    // gets: √(2M) real, √M complex.
    let cap = match instance.field {
        Field::Real => (2.0 * mf).sqrt(),
        Field::Complex => mf.sqrt(),
    };
    let k: f64 = instance
        .matrices
        .iter()
        .map(|h| (h.numerical_rank(rank_tolerance) as f64).min(cap))
        .sum();
    let (mu, active_branch) = match instance.field {
        Field::Real => ((eps / ct) / (200.0 * (50.0 * k).ln()), "eps/(c~ 200 ln(50K))"),
        Field::Complex => ((eps / ct) / (4.0 * (100.0 * k).ln()), "eps/(c~ 4 ln(100K))"),
    };
    Ok(BoundReport {
        sense: instance.sense,
        field: instance.field,
        mu,
        active_branch: active_branch.to_string(),
        m,
        cardinality: q,
        epsilon: eps,
        c_value: ct,
        k_rank_sum: Some(k),
        empirical_ratio: None,
        certified: None,
    })
}

/// Attach an empirical ratio `v_candidate / v_sdp` and the certification
/// verdict. The candidate is a one-sided witness (a rounding objective or an
/// oracle value), so a passing check is at least as strong as the theorem.
pub fn certify(report: &BoundReport, v_candidate: f64, v_sdp: f64) -> BoundReport {
    assert!(v_sdp > 0.0, "certification needs a positive relaxation value");
    let ratio = v_candidate / v_sdp;
    let certified = match report.sense {
        ModelSense::Minimize => ratio <= report.mu + CERT_TOL,
        ModelSense::Maximize => ratio >= report.mu - CERT_TOL,
    };
    BoundReport { empirical_ratio: Some(ratio), certified: Some(certified), ..report.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_gaussian_instance, HermitianMatrix, InstanceParams};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn shaped(field: Field, sense: ModelSense, m: usize, q: usize, eps: f64) -> Instance {
        Instance {
            field,
            sense,
            matrices: vec![HermitianMatrix::identity(2); m],
            cardinality: q,
            epsilon: eps,
        }
    }

    #[test]
    fn c_eps_values() {
        assert_eq!(c_eps(1.0, 8, 4), 1.0);
        assert_relative_eq!(c_eps(0.0, 8, 4), 0.2);
        assert_relative_eq!(c_eps(0.5, 8, 6), 0.5 + 0.5 / 3.0);
    }

    #[test]
    fn c_tilde_values() {
        assert_eq!(c_tilde(1.0, 8, 4), 1.0);
        assert_relative_eq!(c_tilde(0.3, 8, 8), 0.3);
        assert_relative_eq!(c_tilde(0.5, 8, 6), 1.0 - 0.5 / 3.0);
    }

    #[test]
    fn both_constants_increase_with_epsilon() {
        for &(m, q) in &[(8usize, 4usize), (8, 6), (12, 3), (5, 4)] {
            let mut prev_c = f64::NEG_INFINITY;
            let mut prev_ct = f64::NEG_INFINITY;
            for k in 0..=20 {
                let eps = k as f64 / 20.0;
                let c = c_eps(eps, m, q);
                let ct = c_tilde(eps, m, q);
                assert!(c >= prev_c - 1e-15);
                assert!(ct >= prev_ct - 1e-15);
                assert!(c > 0.0 && c <= 1.0);
                assert!(ct >= eps - 1e-15 && ct <= 1.0);
                prev_c = c;
                prev_ct = ct;
            }
        }
    }

    #[test]
    fn min_bound_full_cardinality_real() {
        let report = min_bound(&shaped(Field::Real, ModelSense::Minimize, 8, 8, 0.0));
        assert_relative_eq!(report.mu, 27.0 * 64.0 / PI);
        assert_eq!(report.active_branch, "27M^2/pi");
    }

    #[test]
    fn min_bound_full_cardinality_complex_second_term_dominates() {
        // For M ≥ 6 the 24(√M−1)² term exceeds 8M.
        let report = min_bound(&shaped(Field::Complex, ModelSense::Minimize, 8, 8, 0.0));
        let expected = 24.0 * (8.0_f64.sqrt() - 1.0).powi(2);
        assert!(expected > 64.0);
        assert_relative_eq!(report.mu, expected);
        assert_eq!(report.active_branch, "24(sqrt(M)-1)^2");
    }

    #[test]
    fn min_bound_zero_epsilon_real() {
        let report = min_bound(&shaped(Field::Real, ModelSense::Minimize, 8, 4, 0.0));
        assert_relative_eq!(report.mu, 27.0 * 16.0 * 5.0 / PI);
    }

    #[test]
    fn min_bound_is_scale_free() {
        let params = InstanceParams {
            num_constraints: 6,
            dim: 3,
            field: Field::Real,
            sense: ModelSense::Minimize,
            cardinality: 3,
            epsilon: 0.4,
        };
        let a = generate_gaussian_instance(&params, 1);
        let mut b = generate_gaussian_instance(&params, 2);
        b.matrices = b.matrices.iter().map(|h| h.scaled(37.5)).collect();
        assert_eq!(min_bound(&a).mu, min_bound(&b).mu);
    }

    #[test]
    fn max_bound_hand_values() {
        // Rank-1 matrices, M = 8, Q = 6, ε = 0.5: K = 8, ε/c̃ = 0.6.
        let params = InstanceParams {
            num_constraints: 8,
            dim: 3,
            field: Field::Real,
            sense: ModelSense::Maximize,
            cardinality: 6,
            epsilon: 0.5,
        };
        let real = generate_gaussian_instance(&params, 3);
        let report = max_bound(&real, 1e-9).unwrap();
        assert_eq!(report.k_rank_sum, Some(8.0));
        assert_relative_eq!(report.mu, 0.6 / (200.0 * 400.0_f64.ln()), max_relative = 1e-12);
        assert_relative_eq!(report.mu, 5.007e-4, max_relative = 1e-3);

        let complex =
            generate_gaussian_instance(&InstanceParams { field: Field::Complex, ..params }, 3);
        let report = max_bound(&complex, 1e-9).unwrap();
        assert_relative_eq!(report.mu, 0.6 / (4.0 * 800.0_f64.ln()), max_relative = 1e-12);
        assert_relative_eq!(report.mu, 0.02244, max_relative = 1e-3);
    }

    #[test]
    fn max_bound_refuses_zero_epsilon() {
        let inst = shaped(Field::Real, ModelSense::Maximize, 2, 1, 0.0);
        let err = max_bound(&inst, 1e-9).unwrap_err();
        assert!(err.to_string().contains("no approximation guarantee"));
    }

    #[test]
    fn max_bound_epsilon_one_uses_unit_c_tilde() {
        let inst = shaped(Field::Real, ModelSense::Maximize, 4, 4, 1.0);
        let report = max_bound(&inst, 1e-9).unwrap();
        assert_eq!(report.c_value, 1.0);
        assert!(report.mu > 0.0 && report.mu <= 1.0);
    }

    #[test]
    fn bounds_hand_off_continuously_at_epsilon_one() {
        for &(m, q) in &[(8usize, 4usize), (8, 6), (12, 3)] {
            for field in [Field::Real, Field::Complex] {
                let near = min_bound(&shaped(field, ModelSense::Minimize, m, q, 1.0 - 1e-6));
                let limit = min_bound(&shaped(field, ModelSense::Minimize, m, m, 1.0));
                let gap = (near.mu - limit.mu).abs() / limit.mu;
                assert!(gap <= 1e-3, "{field:?} M={m} Q={q}: gap {gap}");
            }
        }
    }

    #[test]
    fn certify_direction_depends_on_sense() {
        let min_report = min_bound(&shaped(Field::Real, ModelSense::Minimize, 8, 4, 0.0));
        let good = certify(&min_report, min_report.mu * 0.5, 1.0);
        assert_eq!(good.certified, Some(true));
        assert_relative_eq!(good.empirical_ratio.unwrap(), min_report.mu * 0.5);
        let tight = certify(&min_report, 1.0, 1.0);
        assert_eq!(tight.certified, Some(true));
        let bad = certify(&min_report, min_report.mu * 2.0, 1.0);
        assert_eq!(bad.certified, Some(false));

        let inst = shaped(Field::Real, ModelSense::Maximize, 8, 4, 0.5);
        let max_report = max_bound(&inst, 1e-9).unwrap();
        let good = certify(&max_report, 0.9, 1.0);
        assert_eq!(good.certified, Some(true));
        let bad = certify(&max_report, max_report.mu * 0.5, 1.0);
        assert_eq!(bad.certified, Some(false));
    }
}
