//! SDP relaxations of the two models and solution recovery.
//!
//! For the minimization model two equivalent relaxations are provided:
//!
//! ```text
//! (SDP2)  min Tr[X⁽²⁾]  s.t. Tr[H_i X⁽²⁾] ≥ β_i + (1−β_i)ε,  Σβ = Q,
//!                            0 ≤ β ≤ 1,  X⁽²⁾ ⪰ 0
//! (SDP1)  min Tr[X⁽²⁾]  s.t. Tr[H_i X⁽²⁾] ≥ (1+X⁽¹⁾[i,M+1])/2
//!                                         + (1−X⁽¹⁾[i,M+1])/2·ε,
//!                            Σ_i X⁽¹⁾[i,M+1] = 2Q−M,  diag X⁽¹⁾ = 1,
//!                            X⁽¹⁾ ⪰ 0,  X⁽²⁾ ⪰ 0
//! ```
//!
//! linked by `β_i = (1 + X⁽¹⁾[i,M+1])/2` ([`map_sdp1_beta`]). The
//! maximization model uses (SDP3), the mirror image of (SDP2) with `≤`
//! constraints and caps `β_i·ε + (1−β_i)`.
//!
//! Complex instances are solved on a real engine through the standard
//! embedding `H ↦ [[Re H, −Im H], [Im H, Re H]]`, which doubles dimensions
//! and satisfies `Tr(AB) = ½·Tr(embed(A)·embed(B))`; the ½ is folded into
//! the embedded coefficients so objective values need no correction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{
    hermitian_defect, Field, HermitianMatrix, Instance, InstanceError, ModelSense, C64,
};
use crate::solver::{
    self, BlockStructure, ConicProblem, ConicSolution, Constraint, LinearTerm, Relation, Sense,
    SolveStatus, SolverError, SolverSettings,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelaxationKind {
    Sdp1,
    Sdp2,
    Sdp3,
}

/// `(β̄, X̄⁽²⁾)` recovered from a relaxation solve.
#[derive(Clone, Debug)]
pub struct RelaxationSolution {
    pub beta: DVector<f64>,
    pub x2: HermitianMatrix,
    pub value: f64,
    pub which: RelaxationKind,
}

/// Solution of (SDP1): the binary-side matrix is kept whole.
#[derive(Clone, Debug)]
pub struct Sdp1Solution {
    /// Real symmetric (M+1)×(M+1) PSD matrix with unit diagonal.
    pub x1: DMatrix<f64>,
    pub x2: HermitianMatrix,
    pub value: f64,
}

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("relaxation solve ended with status {status:?}")]
    Status { status: SolveStatus },
    #[error("relaxed selector {index} = {value} leaves [0,1] by more than 1e-8; solver failure")]
    BetaOutOfRange { index: usize, value: f64 },
    #[error("recovered matrix is not Hermitian: {0}")]
    Recovery(#[from] InstanceError),
}

// ---------------------------------------------------------------------------
// Complex embedding
// ---------------------------------------------------------------------------

/// Real symmetric 2N×2N embedding `[[Re H, −Im H], [Im H, Re H]]`.
pub fn embed_hermitian(h: &HermitianMatrix) -> DMatrix<f64> {
    let n = h.dim();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h.matrix()[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed_hermitian`] on its image; arbitrary symmetric input is
/// projected by averaging the two diagonal blocks and antisymmetrizing the
/// off-diagonal blocks, which preserves PSD-ness and all embedded traces.
pub fn recover_hermitian(y: &DMatrix<f64>) -> Result<HermitianMatrix, RelaxError> {
    let n = y.nrows() / 2;
    let data = DMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
        let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
        C64::new(re, im)
    });
    // The projection of a symmetric Y is exactly Hermitian; guard anyway so a
    // malformed input surfaces as an error instead of corrupt output.
    let defect = hermitian_defect(&data);
    if defect > 1e-9 {
        return Err(RelaxError::Recovery(InstanceError::NotHermitian { defect }));
    }
    let sym = (&data + data.adjoint()).map(|z| z * 0.5);
    Ok(HermitianMatrix::new(sym)?)
}

/// Constraint-side coefficient for `Tr(H_i X⁽²⁾)` on the solver block.
fn x2_coefficient(field: Field, h: &HermitianMatrix) -> DMatrix<f64> {
    match field {
        Field::Real => h.real_part(),
        Field::Complex => embed_hermitian(h) * 0.5,
    }
}

fn x2_block_dim(instance: &Instance) -> usize {
    match instance.field {
        Field::Real => instance.dim(),
        Field::Complex => 2 * instance.dim(),
    }
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// (SDP2): one PSD block for `X⁽²⁾` plus a nonnegative block holding β.
/// Constraint order: M coverage rows, the cardinality row, M box rows.
pub fn build_sdp2_min(instance: &Instance) -> ConicProblem {
    assert_eq!(instance.sense, ModelSense::Minimize, "(SDP2) applies to the minimization model");
    build_beta_relaxation(instance, Relation::Ge)
}

/// (SDP3): same layout as (SDP2) with `≤` coverage and a maximizing objective.
pub fn build_sdp3_max(instance: &Instance) -> ConicProblem {
    assert_eq!(instance.sense, ModelSense::Maximize, "(SDP3) applies to the maximization model");
    build_beta_relaxation(instance, Relation::Le)
}

fn build_beta_relaxation(instance: &Instance, coverage: Relation) -> ConicProblem {
    let m = instance.num_constraints();
    let eps = instance.epsilon;
    let dim = x2_block_dim(instance);
    let blocks = BlockStructure { psd_dims: vec![dim], nonneg_dim: m };
    let objective = LinearTerm::zero(&blocks)
        .with_psd(0, x2_coefficient(instance.field, &HermitianMatrix::identity(instance.dim())));

    let mut constraints = Vec::with_capacity(2 * m + 1);
    for (i, h) in instance.matrices.iter().enumerate() {
        // min: Tr(H_i X) − (1−ε)β_i ≥ ε   max: Tr(H_i X) + (1−ε)β_i ≤ 1
        let (beta_coeff, rhs) = match coverage {
            Relation::Ge => (-(1.0 - eps), eps),
            Relation::Le => (1.0 - eps, 1.0),
            Relation::Eq => unreachable!(),
        };
        constraints.push(Constraint {
            term: LinearTerm::zero(&blocks)
                .with_psd(0, x2_coefficient(instance.field, h))
                .with_nonneg(i, beta_coeff),
            relation: coverage,
            rhs,
        });
    }
    let mut sum = LinearTerm::zero(&blocks);
    for i in 0..m {
        sum = sum.with_nonneg(i, 1.0);
    }
    constraints.push(Constraint {
        term: sum,
        relation: Relation::Eq,
        rhs: instance.cardinality as f64,
    });
    for i in 0..m {
        constraints.push(Constraint {
            term: LinearTerm::zero(&blocks).with_nonneg(i, 1.0),
            relation: Relation::Le,
            rhs: 1.0,
        });
    }

    let sense = match coverage {
        Relation::Ge => Sense::Minimize,
        _ => Sense::Maximize,
    };
    ConicProblem { blocks, sense, objective, constraints }
}

/// (SDP1): PSD blocks `[X⁽¹⁾ of size M+1, X⁽²⁾]`, no nonnegative block.
/// Constraint order: M+1 unit-diagonal rows, the column-sum row, M coverage
/// rows. `X⁽³⁾` is fixed to zero by construction (the off-diagonal coupling
/// block never appears).
pub fn build_sdp1_min(instance: &Instance) -> ConicProblem {
    assert_eq!(instance.sense, ModelSense::Minimize, "(SDP1) applies to the minimization model");
    let m = instance.num_constraints();
    let eps = instance.epsilon;
    let d1 = m + 1;
    let dim2 = x2_block_dim(instance);
    let blocks = BlockStructure { psd_dims: vec![d1, dim2], nonneg_dim: 0 };
    let objective = LinearTerm::zero(&blocks)
        .with_psd(1, x2_coefficient(instance.field, &HermitianMatrix::identity(instance.dim())));

    // Picks out X⁽¹⁾[i, M+1] (0-based column index m).
    let column_entry = |i: usize| -> DMatrix<f64> {
        let mut a = DMatrix::zeros(d1, d1);
        a[(i, m)] = 0.5;
        a[(m, i)] = 0.5;
        a
    };

    let mut constraints = Vec::with_capacity(2 * m + 2);
    for i in 0..d1 {
        let mut a = DMatrix::zeros(d1, d1);
        a[(i, i)] = 1.0;
        constraints.push(Constraint {
            term: LinearTerm::zero(&blocks).with_psd(0, a),
            relation: Relation::Eq,
            rhs: 1.0,
        });
    }
    let mut colsum = DMatrix::zeros(d1, d1);
    for i in 0..m {
        colsum[(i, m)] = 0.5;
        colsum[(m, i)] = 0.5;
    }
    constraints.push(Constraint {
        term: LinearTerm::zero(&blocks).with_psd(0, colsum),
        relation: Relation::Eq,
        rhs: 2.0 * instance.cardinality as f64 - m as f64,
    });
    for (i, h) in instance.matrices.iter().enumerate() {
        // Tr(H_i X⁽²⁾) − (1−ε)/2 · X⁽¹⁾[i,M+1] ≥ (1+ε)/2
        constraints.push(Constraint {
            term: LinearTerm::zero(&blocks)
                .with_psd(0, column_entry(i) * (-(1.0 - eps) / 2.0))
                .with_psd(1, x2_coefficient(instance.field, h)),
            relation: Relation::Ge,
            rhs: (1.0 + eps) / 2.0,
        });
    }

    ConicProblem { blocks, sense: Sense::Minimize, objective, constraints }
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

fn recover_x2(instance: &Instance, block: &DMatrix<f64>) -> Result<HermitianMatrix, RelaxError> {
    match instance.field {
        Field::Real => {
            let sym = (block + block.transpose()) * 0.5;
            Ok(HermitianMatrix::from_real(sym)?)
        }
        Field::Complex => recover_hermitian(block),
    }
}

fn clamp_beta(raw: &DVector<f64>) -> Result<DVector<f64>, RelaxError> {
    let mut beta = raw.clone();
    for i in 0..beta.len() {
        if beta[i] < -1e-8 || beta[i] > 1.0 + 1e-8 {
            return Err(RelaxError::BetaOutOfRange { index: i, value: beta[i] });
        }
        beta[i] = beta[i].clamp(0.0, 1.0);
    }
    Ok(beta)
}

/// Recover `(β̄, X̄⁽²⁾, value)` from a solved relaxation, undoing the complex
/// embedding. Only `Optimal` solves are accepted; selector values outside
/// `[0,1]` by more than 1e-8 are treated as solver failure, never clamped
/// silently.
pub fn extract_solution(
    instance: &Instance,
    raw: &ConicSolution,
    which: RelaxationKind,
) -> Result<RelaxationSolution, RelaxError> {
    if raw.status != SolveStatus::Optimal {
        return Err(RelaxError::Status { status: raw.status });
    }
    match which {
        RelaxationKind::Sdp2 | RelaxationKind::Sdp3 => {
            let beta = clamp_beta(&raw.nonneg)?;
            let drift = (beta.sum() - instance.cardinality as f64).abs();
            if drift > 1e-5 {
                return Err(RelaxError::BetaOutOfRange { index: 0, value: beta.sum() });
            }
            let x2 = recover_x2(instance, &raw.psd_blocks[0])?;
            Ok(RelaxationSolution { beta, x2, value: raw.objective, which })
        }
        RelaxationKind::Sdp1 => {
            let sdp1 = extract_sdp1_solution(instance, raw)?;
            let beta = clamp_beta(&map_sdp1_beta(&sdp1))?;
            Ok(RelaxationSolution { beta, x2: sdp1.x2, value: sdp1.value, which })
        }
    }
}

/// Recover the full (SDP1) solution, keeping `X⁽¹⁾` intact.
pub fn extract_sdp1_solution(
    instance: &Instance,
    raw: &ConicSolution,
) -> Result<Sdp1Solution, RelaxError> {
    if raw.status != SolveStatus::Optimal {
        return Err(RelaxError::Status { status: raw.status });
    }
    let x1 = (&raw.psd_blocks[0] + raw.psd_blocks[0].transpose()) * 0.5;
    let x2 = recover_x2(instance, &raw.psd_blocks[1])?;
    Ok(Sdp1Solution { x1, x2, value: raw.objective })
}

/// The equivalence mapping `β̃_i = ½ + ½·X⁽¹⁾[i, M+1]`; the result is
/// feasible for (SDP2) with the same `X⁽²⁾` and equal value.
pub fn map_sdp1_beta(solution: &Sdp1Solution) -> DVector<f64> {
    let m = solution.x1.nrows() - 1;
    DVector::from_fn(m, |i, _| 0.5 + 0.5 * solution.x1[(i, m)])
}

/// Build, solve and extract the relaxation matching the instance's sense
/// ((SDP2) for minimization, (SDP3) for maximization).
pub fn solve_relaxation(
    instance: &Instance,
    settings: &SolverSettings,
) -> Result<(RelaxationSolution, ConicSolution), RelaxError> {
    let (problem, which) = match instance.sense {
        ModelSense::Minimize => (build_sdp2_min(instance), RelaxationKind::Sdp2),
        ModelSense::Maximize => (build_sdp3_max(instance), RelaxationKind::Sdp3),
    };
    let raw = solver::solve(&problem, settings)?;
    let extracted = extract_solution(instance, &raw, which)?;
    Ok((extracted, raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_gaussian_instance, InstanceParams};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn diag_instance(
        d1: Vec<f64>,
        d2: Vec<f64>,
        sense: ModelSense,
        q: usize,
        eps: f64,
    ) -> Instance {
        let to_h = |d: Vec<f64>| {
            HermitianMatrix::from_real(DMatrix::from_diagonal(&DVector::from_vec(d))).unwrap()
        };
        Instance {
            field: Field::Real,
            sense,
            matrices: vec![to_h(d1), to_h(d2)],
            cardinality: q,
            epsilon: eps,
        }
    }

    #[test]
    fn sdp2_constraint_count_is_forced_by_construction() {
        let inst = diag_instance(vec![1.0, 1.0], vec![1.0, 1.0], ModelSense::Minimize, 1, 0.5);
        let problem = build_sdp2_min(&inst);
        assert_eq!(problem.constraints.len(), 5);
        assert_eq!(problem.blocks.psd_dims, vec![2]);
        assert_eq!(problem.blocks.nonneg_dim, 2);
    }

    #[test]
    fn sdp2_separable_fixture_has_value_two() {
        let inst = diag_instance(vec![1.0, 0.0], vec![0.0, 1.0], ModelSense::Minimize, 2, 0.0);
        let (relax, _) = solve_relaxation(&inst, &SolverSettings::default()).unwrap();
        assert_relative_eq!(relax.value, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn sdp2_eps_one_matches_pure_multicast_relaxation() {
        let params = InstanceParams {
            num_constraints: 3,
            dim: 3,
            field: Field::Real,
            sense: ModelSense::Minimize,
            cardinality: 1,
            epsilon: 1.0,
        };
        let inst = generate_gaussian_instance(&params, 17);
        let (relax, _) = solve_relaxation(&inst, &SolverSettings::default()).unwrap();

        // Plain relaxation of the fully-covered problem: Tr(H_i X) ≥ 1 ∀i.
        let blocks = BlockStructure { psd_dims: vec![3], nonneg_dim: 0 };
        let objective = LinearTerm::zero(&blocks).with_psd(0, DMatrix::identity(3, 3));
        let constraints = inst
            .matrices
            .iter()
            .map(|h| Constraint {
                term: LinearTerm::zero(&blocks).with_psd(0, h.real_part()),
                relation: Relation::Ge,
                rhs: 1.0,
            })
            .collect();
        let pure = ConicProblem { blocks, sense: Sense::Minimize, objective, constraints };
        let sol = solver::solve(&pure, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(relax.value, sol.objective, max_relative = 1e-6);
    }

    #[test]
    fn sdp1_has_unit_diagonal_rows_and_matches_sdp2() {
        let params = InstanceParams {
            num_constraints: 4,
            dim: 3,
            field: Field::Real,
            sense: ModelSense::Minimize,
            cardinality: 2,
            epsilon: 0.3,
        };
        let inst = generate_gaussian_instance(&params, 5);
        let problem = build_sdp1_min(&inst);
        let diag_rows = problem
            .constraints
            .iter()
            .filter(|c| c.relation == Relation::Eq && c.rhs == 1.0)
            .count();
        assert_eq!(diag_rows, 5);

        let raw1 = solver::solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(raw1.status, SolveStatus::Optimal);
        let sdp1 = extract_sdp1_solution(&inst, &raw1).unwrap();
        let (sdp2, _) = solve_relaxation(&inst, &SolverSettings::default()).unwrap();
        assert!((sdp1.value - sdp2.value).abs() <= 1e-5 * sdp2.value.max(1.0));

        // Mapped β is (SDP2)-feasible with the same objective value.
        let beta = map_sdp1_beta(&sdp1);
        assert!((beta.sum() - 2.0).abs() <= 1e-6);
        for i in 0..4 {
            assert!(beta[i] >= -1e-6 && beta[i] <= 1.0 + 1e-6);
            let attained = inst.matrices[i].trace_product(&sdp1.x2);
            let required = beta[i] + (1.0 - beta[i]) * inst.epsilon;
            assert!(attained >= required - 1e-6, "coverage {i}: {attained} < {required}");
        }
    }

    #[test]
    fn sdp1_full_cardinality_forces_unit_column() {
        let inst = diag_instance(vec![2.0, 0.5], vec![0.5, 1.0], ModelSense::Minimize, 2, 0.3);
        let problem = build_sdp1_min(&inst);
        let raw = solver::solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(raw.status, SolveStatus::Optimal);
        let sdp1 = extract_sdp1_solution(&inst, &raw).unwrap();
        for i in 0..2 {
            assert!(
                (sdp1.x1[(i, 2)] - 1.0).abs() <= 1e-6,
                "column entry {i}: {}",
                sdp1.x1[(i, 2)]
            );
        }
    }

    #[test]
    fn sdp3_unit_ball_fixture() {
        // Two identity constraints, ε = 0, Q = 1: value 1/2 at β = (1/2, 1/2).
        let inst = diag_instance(vec![1.0, 1.0], vec![1.0, 1.0], ModelSense::Maximize, 1, 0.0);
        let (relax, _) = solve_relaxation(&inst, &SolverSettings::default()).unwrap();
        assert_relative_eq!(relax.value, 0.5, epsilon = 1e-6);
        assert_relative_eq!(relax.beta[0], 0.5, epsilon = 1e-6);
        assert_relative_eq!(relax.beta[1], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn sdp3_diag_fixture_value() {
        let inst = diag_instance(vec![1.0, 0.0], vec![0.0, 1.0], ModelSense::Maximize, 1, 0.5);
        let (relax, _) = solve_relaxation(&inst, &SolverSettings::default()).unwrap();
        assert_relative_eq!(relax.value, 1.5, max_relative = 1e-6);
    }

    #[test]
    fn sdp3_eps_one_drops_the_selectors() {
        let params = InstanceParams {
            num_constraints: 4,
            dim: 3,
            field: Field::Real,
            sense: ModelSense::Maximize,
            cardinality: 2,
            epsilon: 1.0,
        };
        let inst = generate_gaussian_instance(&params, 29);
        let (relax, _) = solve_relaxation(&inst, &SolverSettings::default()).unwrap();

        // Pure suppression relaxation: max Tr X s.t. Tr(H_i X) ≤ 1.
        let blocks = BlockStructure { psd_dims: vec![3], nonneg_dim: 0 };
        let objective = LinearTerm::zero(&blocks).with_psd(0, DMatrix::identity(3, 3));
        let constraints = inst
            .matrices
            .iter()
            .map(|h| Constraint {
                term: LinearTerm::zero(&blocks).with_psd(0, h.real_part()),
                relation: Relation::Le,
                rhs: 1.0,
            })
            .collect();
        let pure = ConicProblem { blocks, sense: Sense::Maximize, objective, constraints };
        let sol = solver::solve(&pure, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(relax.value, sol.objective, max_relative = 1e-6);
    }

    #[test]
    fn embedding_of_real_matrix_is_block_diagonal() {
        let h = HermitianMatrix::from_real(DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]))
            .unwrap();
        let e = embed_hermitian(&h);
        assert_eq!(e[(0, 0)], 2.0);
        assert_eq!(e[(2, 2)], 2.0);
        assert_eq!(e[(0, 2)], 0.0);
        assert_eq!(e[(1, 3)], 0.0);
        // Trace identity with the ½ factor is exact for real data.
        assert_relative_eq!(h.trace_product(&h), 0.5 * (&e * &e).trace());
    }

    #[test]
    fn embedding_doubles_eigenvalue_multiplicities() {
        let data = DMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, 1.0),
            (1, 0) => C64::new(0.0, -1.0),
            _ => C64::new(1.0, 0.0),
        });
        let h = HermitianMatrix::new(data).unwrap();
        let orig = h.eigenvalues();
        assert_relative_eq!(orig[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(orig[1], 2.0, epsilon = 1e-12);
        let e = embed_hermitian(&h);
        let mut emb: Vec<f64> =
            nalgebra::SymmetricEigen::new(e).eigenvalues.iter().copied().collect();
        emb.sort_by(f64::total_cmp);
        assert_relative_eq!(emb[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(emb[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(emb[2], 2.0, epsilon = 1e-12);
        assert_relative_eq!(emb[3], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn recover_inverts_embed() {
        let params = InstanceParams {
            num_constraints: 3,
            dim: 4,
            field: Field::Complex,
            sense: ModelSense::Minimize,
            cardinality: 2,
            epsilon: 0.2,
        };
        let inst = generate_gaussian_instance(&params, 23);
        for h in &inst.matrices {
            let back = recover_hermitian(&embed_hermitian(h)).unwrap();
            let diff = (h.matrix() - back.matrix()).map(|z| z.norm()).max();
            assert!(diff <= 1e-14, "recover/embed mismatch {diff}");
        }
    }

    #[test]
    fn complex_solve_with_real_data_recovers_real_solution() {
        let inst = Instance {
            field: Field::Complex,
            ..diag_instance(vec![1.0, 0.5], vec![0.5, 1.0], ModelSense::Minimize, 1, 0.4)
        };
        let (relax, _) = solve_relaxation(&inst, &SolverSettings::default()).unwrap();
        assert!(relax.x2.imag_part().amax() <= 1e-8);
    }

    #[test]
    fn mapped_beta_formula_endpoints() {
        let x1 =
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, -1.0, 1.0, -1.0, 1.0]);
        let sol = Sdp1Solution { x1, x2: HermitianMatrix::identity(2), value: 0.0 };
        let beta = map_sdp1_beta(&sol);
        assert_eq!(beta[0], 1.0);
        assert_eq!(beta[1], 0.0);
    }
}
