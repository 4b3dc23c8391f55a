//! Reference fixtures used by the validation suite.
//!
//! Both fixtures are counterexamples demonstrating the limits of the
//! relaxation guarantees: one where the maximization ratio collapses to zero
//! at ε = 0, and one general-model variant (a binary coordinate instead of
//! binary selectors) whose ratio is unbounded as ε → 0.

use nalgebra::{DMatrix, DVector};

use crate::instance::{Field, HermitianMatrix, Instance, ModelSense};
use crate::solver::{
    BlockStructure, ConicProblem, Constraint, LinearTerm, Relation, Sense,
};

/// Maximization instance with `H₁ = H₂ = I₂`, `ε = 0`, `Q = 1`: the true
/// optimum is 0 (one constraint forces `w = 0`-level suppression) while the
/// relaxation value is exactly 1/2, so the ratio is zero.
pub fn zero_ratio_max_instance() -> Instance {
    Instance {
        field: Field::Real,
        sense: ModelSense::Maximize,
        matrices: vec![HermitianMatrix::identity(2), HermitianMatrix::identity(2)],
        cardinality: 1,
        epsilon: 0.0,
    }
}

/// General minimization model with one coordinate pinned to ±1:
///
/// ```text
/// min ‖x‖²  s.t.  xᵀD_i x ≥ 1 (i = 1,2),   x[1]² = 1,   x ∈ ℝ²
/// ```
///
/// with `D₁ = [[1−ε, √(ε(1−ε))], [√(ε(1−ε)), ε]]` and
/// `D₂ = [[1, −√(ε/2)], [−√(ε/2), ε]]`. The optimum is
/// `1 + min{2/ε, ((√(1−ε)+1)/√ε)²}`, which blows up as ε → 0, while
/// `X = I` stays feasible for the SDP relaxation (value ≤ 2): the general
/// model admits no finite worst-case ratio.
#[derive(Clone, Copy, Debug)]
pub struct PinnedCoordinateFixture {
    pub epsilon: f64,
}

impl PinnedCoordinateFixture {
    pub fn new(epsilon: f64) -> Self {
        assert!(epsilon > 0.0 && epsilon < 1.0);
        Self { epsilon }
    }

    pub fn matrices(&self) -> [HermitianMatrix; 2] {
        let e = self.epsilon;
        let d1 = DMatrix::from_row_slice(
            2,
            2,
            &[1.0 - e, (e * (1.0 - e)).sqrt(), (e * (1.0 - e)).sqrt(), e],
        );
        let d2 = DMatrix::from_row_slice(2, 2, &[1.0, -(e / 2.0).sqrt(), -(e / 2.0).sqrt(), e]);
        [
            HermitianMatrix::from_real(d1).expect("symmetric by construction"),
            HermitianMatrix::from_real(d2).expect("symmetric by construction"),
        ]
    }

    /// Closed-form optimal value `1 + min{2/ε, ((√(1−ε)+1)/√ε)²}`.
    pub fn closed_form_value(&self) -> f64 {
        let e = self.epsilon;
        let a = 2.0 / e;
        let b = (((1.0 - e).sqrt() + 1.0) / e.sqrt()).powi(2);
        1.0 + a.min(b)
    }

    /// Independent check: fix `x[1] = ±1` and line-search the free
    /// coordinate, then bisect onto the feasibility boundary. Exhaustive up
    /// to the grid, refined to ~1e-12 on the winning branch.
    pub fn line_search_value(&self, steps: usize) -> f64 {
        let mats = self.matrices();
        let feasible = |x1: f64, x2: f64| -> bool {
            let x = DVector::from_vec(vec![
                nalgebra::Complex::new(x1, 0.0),
                nalgebra::Complex::new(x2, 0.0),
            ]);
            mats.iter().all(|d| d.quad_form(&x) >= 1.0)
        };
        let reach = 2.0 * (2.0 / self.epsilon).sqrt() + 2.0;
        let step = 2.0 * reach / steps as f64;
        let mut best = f64::INFINITY;
        for &x1 in &[1.0, -1.0] {
            let mut prev: Option<(f64, bool)> = None;
            for k in 0..=steps {
                let x2 = -reach + step * k as f64;
                let ok = feasible(x1, x2);
                if ok {
                    best = best.min(1.0 + x2 * x2);
                }
                // Bisect every feasibility transition onto the boundary; the
                // objective is monotone in |x2| so optima sit on boundaries.
                if let Some((px2, pok)) = prev {
                    if ok != pok {
                        let (mut lo, mut hi) = (px2, x2);
                        for _ in 0..80 {
                            let mid = 0.5 * (lo + hi);
                            if feasible(x1, mid) == ok {
                                hi = mid;
                            } else {
                                lo = mid;
                            }
                        }
                        let boundary = 0.5 * (lo + hi);
                        if feasible(x1, boundary) {
                            best = best.min(1.0 + boundary * boundary);
                        } else {
                            best = best.min(1.0 + hi * hi);
                        }
                    }
                }
                prev = Some((x2, ok));
            }
        }
        best
    }

    /// The fixture's SDP relaxation: `min Tr X` s.t. `Tr(D_i X) ≥ 1`,
    /// `X[1,1] = 1`, `X ⪰ 0`. `X = I` is feasible, so the value is ≤ 2.
    pub fn sdp_problem(&self) -> ConicProblem {
        let blocks = BlockStructure { psd_dims: vec![2], nonneg_dim: 0 };
        let objective = LinearTerm::zero(&blocks).with_psd(0, DMatrix::identity(2, 2));
        let mut constraints: Vec<Constraint> = self
            .matrices()
            .iter()
            .map(|d| Constraint {
                term: LinearTerm::zero(&blocks).with_psd(0, d.real_part()),
                relation: Relation::Ge,
                rhs: 1.0,
            })
            .collect();
        let mut pin = DMatrix::zeros(2, 2);
        pin[(0, 0)] = 1.0;
        constraints.push(Constraint {
            term: LinearTerm::zero(&blocks).with_psd(0, pin),
            relation: Relation::Eq,
            rhs: 1.0,
        });
        ConicProblem { blocks, sense: Sense::Minimize, objective, constraints }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SolveStatus, SolverSettings};
    use approx::assert_relative_eq;

    #[test]
    fn zero_ratio_instance_validates() {
        let inst = zero_ratio_max_instance();
        assert!(inst.validate().is_valid());
        assert_eq!(inst.cardinality, 1);
    }

    #[test]
    fn pinned_fixture_closed_form_at_one_percent() {
        let fx = PinnedCoordinateFixture::new(0.01);
        assert_relative_eq!(fx.closed_form_value(), 201.0, max_relative = 1e-12);
    }

    #[test]
    fn pinned_fixture_line_search_confirms_closed_form() {
        let fx = PinnedCoordinateFixture::new(0.01);
        let searched = fx.line_search_value(50_000);
        assert_relative_eq!(searched, fx.closed_form_value(), max_relative = 1e-6);
        // A second epsilon where the other branch of the min wins.
        let fx = PinnedCoordinateFixture::new(0.9);
        let searched = fx.line_search_value(50_000);
        assert_relative_eq!(searched, fx.closed_form_value(), max_relative = 1e-6);
    }

    #[test]
    fn pinned_fixture_sdp_value_stays_small() {
        let fx = PinnedCoordinateFixture::new(0.01);
        let sol = solve(&fx.sdp_problem(), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.objective <= 2.0 + 1e-6, "{}", sol.objective);
        assert!(sol.objective >= 1.0);
    }
}
