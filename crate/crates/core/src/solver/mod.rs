//! Dense primal-dual interior-point solver for standard-form cone programs.
//!
//! A [`ConicProblem`] optimizes a linear functional over a product of PSD
//! blocks and one nonnegative-orthant block, subject to linear constraints
//! with relations `=`, `>=` or `<=`. Inequalities are converted internally to
//! equalities with nonnegative slacks; the engine is an infeasible-start
//! path-following method with a Mehrotra predictor-corrector step and
//! Nesterov-Todd scaling (see [`ipm`]).

mod ipm;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Objective direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Cone layout: ordered PSD block dimensions, then one nonnegative block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    pub psd_dims: Vec<usize>,
    pub nonneg_dim: usize,
}

impl BlockStructure {
    /// Total barrier degree `Σ n_j + nonneg_dim`.
    pub fn degree(&self) -> usize {
        self.psd_dims.iter().sum::<usize>() + self.nonneg_dim
    }
}

/// A linear functional over all blocks: `Σ_j ⟨A_j, X_j⟩ + Σ (i,c) c·z_i`.
#[derive(Clone, Debug, Default)]
pub struct LinearTerm {
    /// Per PSD block, an optional symmetric coefficient matrix.
    pub psd: Vec<Option<DMatrix<f64>>>,
    /// Sparse coefficients into the nonnegative block.
    pub nonneg: Vec<(usize, f64)>,
}

impl LinearTerm {
    pub fn zero(blocks: &BlockStructure) -> Self {
        Self { psd: vec![None; blocks.psd_dims.len()], nonneg: Vec::new() }
    }

    pub fn with_psd(mut self, block: usize, coeff: DMatrix<f64>) -> Self {
        self.psd[block] = Some(coeff);
        self
    }

    pub fn with_nonneg(mut self, index: usize, coeff: f64) -> Self {
        self.nonneg.push((index, coeff));
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub term: LinearTerm,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct ConicProblem {
    pub blocks: BlockStructure,
    pub sense: Sense,
    pub objective: LinearTerm,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct SolverSettings {
    /// Relative duality gap target.
    pub gap_tol: f64,
    /// Relative primal/dual infeasibility target.
    pub feas_tol: f64,
    /// Residual threshold below which an infeasibility/unboundedness
    /// certificate is trusted.
    pub certificate_tol: f64,
    pub max_iterations: usize,
    /// Emit per-iteration CSV lines (`iter,pobj,dobj,gap,relgap,pinf,dinf`)
    /// on stderr.
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            certificate_tol: 1e-7,
            max_iterations: 100,
            verbose: false,
        }
    }
}

/// Residuals a returned `Optimal` solution is guaranteed to meet.
pub const OPTIMAL_RESIDUAL_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
    NumericalFailure,
}

/// Per-iteration diagnostics, in the problem's own sense.
#[derive(Clone, Copy, Debug)]
pub struct IterationStat {
    pub iter: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub psd_blocks: Vec<DMatrix<f64>>,
    /// User part of the nonnegative block (internal slacks stripped).
    pub nonneg: DVector<f64>,
    /// Multipliers of the internal minimized equality form, one per
    /// constraint in input order.
    pub duals: DVector<f64>,
    /// Objective value in the problem's sense.
    pub objective: f64,
    pub iterations: usize,
    /// Final relative duality gap.
    pub duality_gap: f64,
    /// Scaled ray residual backing an `Infeasible`/`Unbounded` verdict.
    pub certificate_residual: Option<f64>,
    pub trace: Vec<IterationStat>,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("problem has no cone blocks")]
    Empty,
    #[error("{where_}: {what}")]
    Shape { where_: String, what: String },
}

/// Solve a cone program. Structural defects (shape mismatches, non-finite
/// data) are errors; numerical outcomes are reported through
/// [`ConicSolution::status`].
pub fn solve(problem: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution, SolverError> {
    let form = InternalForm::build(problem)?;
    Ok(ipm::run(&form, settings))
}

// ---------------------------------------------------------------------------
// Residual evaluation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Per-constraint violation, `max(0, required − attained)` directionally.
    pub constraint_violations: Vec<f64>,
    pub primal_infeasibility_abs: f64,
    pub primal_infeasibility_rel: f64,
    pub dual_infeasibility_abs: f64,
    pub dual_infeasibility_rel: f64,
    pub complementarity_abs: f64,
    pub complementarity_rel: f64,
    pub duality_gap_abs: f64,
    pub duality_gap_rel: f64,
    /// Minimum eigenvalue of each returned PSD block.
    pub psd_min_eigenvalues: Vec<f64>,
}

impl ResidualReport {
    pub fn max_relative(&self) -> f64 {
        self.primal_infeasibility_rel
            .max(self.dual_infeasibility_rel)
            .max(self.complementarity_rel)
            .max(self.duality_gap_rel)
    }
}

/// Pure evaluation of primal/dual residuals of `solution` against `problem`.
pub fn residuals(
    problem: &ConicProblem,
    solution: &ConicSolution,
) -> Result<ResidualReport, SolverError> {
    let form = InternalForm::build(problem)?;
    if solution.psd_blocks.len() != problem.blocks.psd_dims.len() {
        return Err(SolverError::Shape {
            where_: "solution".into(),
            what: format!(
                "{} PSD blocks, problem has {}",
                solution.psd_blocks.len(),
                problem.blocks.psd_dims.len()
            ),
        });
    }
    for (j, (x, &d)) in solution.psd_blocks.iter().zip(&problem.blocks.psd_dims).enumerate() {
        if x.nrows() != d || x.ncols() != d {
            return Err(SolverError::Shape {
                where_: format!("solution PSD block {j}"),
                what: format!("{}x{}, expected {d}x{d}", x.nrows(), x.ncols()),
            });
        }
    }
    if solution.nonneg.len() != problem.blocks.nonneg_dim {
        return Err(SolverError::Shape {
            where_: "solution nonneg block".into(),
            what: format!("{}, expected {}", solution.nonneg.len(), problem.blocks.nonneg_dim),
        });
    }
    if solution.duals.len() != problem.constraints.len() {
        return Err(SolverError::Shape {
            where_: "solution duals".into(),
            what: format!("{}, expected {}", solution.duals.len(), problem.constraints.len()),
        });
    }

    let flip = if problem.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let m = problem.constraints.len();

    // Primal side, per constraint in user terms.
    let mut violations = Vec::with_capacity(m);
    let mut slacks = Vec::with_capacity(m);
    for con in &problem.constraints {
        let lhs = eval_term(&con.term, &solution.psd_blocks, &solution.nonneg);
        let (violation, slack) = match con.relation {
            Relation::Eq => ((lhs - con.rhs).abs(), 0.0),
            Relation::Ge => ((con.rhs - lhs).max(0.0), lhs - con.rhs),
            Relation::Le => ((lhs - con.rhs).max(0.0), con.rhs - lhs),
        };
        violations.push(violation);
        slacks.push(slack);
    }
    let bnorm = problem.constraints.iter().map(|c| c.rhs * c.rhs).sum::<f64>().sqrt();
    let nonneg_violation: f64 =
        solution.nonneg.iter().map(|&v| v.min(0.0).powi(2)).sum::<f64>().sqrt();
    let primal_abs = (violations.iter().map(|v| v * v).sum::<f64>()
        + nonneg_violation * nonneg_violation)
        .sqrt();
    let primal_rel = primal_abs / (1.0 + bnorm);

    // Dual side: Z = C − Σ y_k A_k in the internal minimize sense, per block,
    // plus sign conditions on inequality multipliers.
    let y = &solution.duals;
    let mut dual_neg_sq = 0.0;
    let mut z_mats: Vec<DMatrix<f64>> = Vec::with_capacity(form.blocks.psd_dims.len());
    for (j, &d) in form.blocks.psd_dims.iter().enumerate() {
        let mut z = form.c_psd[j].clone();
        for (k, row) in form.rows.iter().enumerate() {
            if let Some(a) = &row.psd[j] {
                z.zip_apply(a, |zi, ai| *zi -= y[k] * ai);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(z.clone());
        let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if d > 0 && min_eig < 0.0 {
            dual_neg_sq += min_eig * min_eig;
        }
        z_mats.push(z);
    }
    let mut z_nn = form.c_nn.clone();
    for (k, row) in form.rows.iter().enumerate() {
        for &(i, c) in &row.nn {
            z_nn[i] -= y[k] * c;
        }
    }
    for &v in z_nn.iter() {
        if v < 0.0 {
            dual_neg_sq += v * v;
        }
    }
    let cnorm = (form.c_psd.iter().map(|c| c.norm_squared()).sum::<f64>()
        + form.c_nn.norm_squared())
    .sqrt();
    let dual_abs = dual_neg_sq.sqrt();
    let dual_rel = dual_abs / (1.0 + cnorm);

    // Complementarity over the internal form: ⟨X, Z⟩ plus slack·multiplier
    // terms for inequality rows.
    let mut comp = 0.0;
    for (x, z) in solution.psd_blocks.iter().zip(&z_mats) {
        comp += x.dot(z);
    }
    for i in 0..problem.blocks.nonneg_dim {
        comp += solution.nonneg[i] * z_nn[i];
    }
    for (k, con) in problem.constraints.iter().enumerate() {
        if con.relation != Relation::Eq {
            // Slack coordinate dual value: ∓y_k depending on the relation.
            let z_slack = match con.relation {
                Relation::Ge => y[k],
                Relation::Le => -y[k],
                Relation::Eq => unreachable!(),
            };
            comp += slacks[k] * z_slack;
        }
    }
    let comp_abs = comp.abs();

    let pobj = eval_term(&problem.objective, &solution.psd_blocks, &solution.nonneg);
    let dobj_internal: f64 = (0..m).map(|k| form.b[k] * y[k]).sum();
    let dobj = flip * dobj_internal;
    let gap_abs = (pobj - dobj).abs();
    let obj_scale = 1.0 + pobj.abs() + dobj.abs();

    let psd_min_eigenvalues = solution
        .psd_blocks
        .iter()
        .map(|x| {
            nalgebra::SymmetricEigen::new(x.clone())
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    Ok(ResidualReport {
        constraint_violations: violations,
        primal_infeasibility_abs: primal_abs,
        primal_infeasibility_rel: primal_rel,
        dual_infeasibility_abs: dual_abs,
        dual_infeasibility_rel: dual_rel,
        complementarity_abs: comp_abs,
        complementarity_rel: comp_abs / obj_scale,
        duality_gap_abs: gap_abs,
        duality_gap_rel: gap_abs / obj_scale,
        psd_min_eigenvalues,
    })
}

fn eval_term(term: &LinearTerm, psd: &[DMatrix<f64>], nonneg: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for (j, coeff) in term.psd.iter().enumerate() {
        if let Some(a) = coeff {
            acc += a.dot(&psd[j]);
        }
    }
    for &(i, c) in &term.nonneg {
        acc += c * nonneg[i];
    }
    acc
}

// ---------------------------------------------------------------------------
// Internal standard form: min ⟨C,X⟩ s.t. A(X) = b, X in cone
// ---------------------------------------------------------------------------

pub(crate) struct InternalRow {
    pub psd: Vec<Option<DMatrix<f64>>>,
    pub nn: Vec<(usize, f64)>,
}

pub(crate) struct InternalForm {
    pub blocks: BlockStructure,
    pub c_psd: Vec<DMatrix<f64>>,
    pub c_nn: DVector<f64>,
    pub rows: Vec<InternalRow>,
    pub b: DVector<f64>,
    /// True when the user problem is a maximization (objective negated).
    pub flipped: bool,
    pub user_nonneg_dim: usize,
}

impl InternalForm {
    pub fn build(problem: &ConicProblem) -> Result<Self, SolverError> {
        if problem.blocks.degree() == 0 {
            return Err(SolverError::Empty);
        }
        let n_psd = problem.blocks.psd_dims.len();
        let slack_count =
            problem.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let nn_dim = problem.blocks.nonneg_dim + slack_count;
        let blocks =
            BlockStructure { psd_dims: problem.blocks.psd_dims.clone(), nonneg_dim: nn_dim };

        let check_term = |term: &LinearTerm, where_: &str| -> Result<(), SolverError> {
            if term.psd.len() != n_psd {
                return Err(SolverError::Shape {
                    where_: where_.to_string(),
                    what: format!("{} PSD coefficients, expected {n_psd}", term.psd.len()),
                });
            }
            for (j, coeff) in term.psd.iter().enumerate() {
                if let Some(a) = coeff {
                    let d = problem.blocks.psd_dims[j];
                    if a.nrows() != d || a.ncols() != d {
                        return Err(SolverError::Shape {
                            where_: where_.to_string(),
                            what: format!("block {j} coefficient {}x{}, expected {d}x{d}", a.nrows(), a.ncols()),
                        });
                    }
                    if a.iter().any(|v| !v.is_finite()) {
                        return Err(SolverError::Shape {
                            where_: where_.to_string(),
                            what: format!("block {j} coefficient has non-finite entries"),
                        });
                    }
                }
            }
            for &(i, c) in &term.nonneg {
                if i >= problem.blocks.nonneg_dim {
                    return Err(SolverError::Shape {
                        where_: where_.to_string(),
                        what: format!(
                            "nonneg index {i} out of range {}",
                            problem.blocks.nonneg_dim
                        ),
                    });
                }
                if !c.is_finite() {
                    return Err(SolverError::Shape {
                        where_: where_.to_string(),
                        what: format!("nonneg coefficient at {i} is non-finite"),
                    });
                }
            }
            Ok(())
        };

        check_term(&problem.objective, "objective")?;
        for (k, con) in problem.constraints.iter().enumerate() {
            check_term(&con.term, &format!("constraint {k}"))?;
            if !con.rhs.is_finite() {
                return Err(SolverError::Shape {
                    where_: format!("constraint {k}"),
                    what: "non-finite right-hand side".to_string(),
                });
            }
        }

        let flip = if problem.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let symmetrize = |a: &DMatrix<f64>| -> DMatrix<f64> { (a + a.transpose()) * 0.5 };

        let mut c_psd: Vec<DMatrix<f64>> = problem
            .blocks
            .psd_dims
            .iter()
            .map(|&d| DMatrix::zeros(d, d))
            .collect();
        for (j, coeff) in problem.objective.psd.iter().enumerate() {
            if let Some(a) = coeff {
                c_psd[j] = symmetrize(a) * flip;
            }
        }
        let mut c_nn = DVector::zeros(nn_dim);
        for &(i, c) in &problem.objective.nonneg {
            c_nn[i] += c * flip;
        }

        let mut rows = Vec::with_capacity(problem.constraints.len());
        let mut b = DVector::zeros(problem.constraints.len());
        let mut slack_cursor = problem.blocks.nonneg_dim;
        for (k, con) in problem.constraints.iter().enumerate() {
            let psd = con
                .term
                .psd
                .iter()
                .map(|coeff| coeff.as_ref().map(symmetrize))
                .collect::<Vec<_>>();
            let mut nn: Vec<(usize, f64)> = Vec::with_capacity(con.term.nonneg.len() + 1);
            nn.extend(con.term.nonneg.iter().copied());
            match con.relation {
                Relation::Eq => {}
                Relation::Ge => {
                    nn.push((slack_cursor, -1.0));
                    slack_cursor += 1;
                }
                Relation::Le => {
                    nn.push((slack_cursor, 1.0));
                    slack_cursor += 1;
                }
            }
            rows.push(InternalRow { psd, nn });
            b[k] = con.rhs;
        }

        Ok(Self {
            blocks,
            c_psd,
            c_nn,
            rows,
            b,
            flipped: problem.sense == Sense::Maximize,
            user_nonneg_dim: problem.blocks.nonneg_dim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_psd_problem(h: DMatrix<f64>, relation: Relation, sense: Sense) -> ConicProblem {
        let n = h.nrows();
        let blocks = BlockStructure { psd_dims: vec![n], nonneg_dim: 0 };
        let objective = LinearTerm::zero(&blocks).with_psd(0, DMatrix::identity(n, n));
        let constraint =
            Constraint { term: LinearTerm::zero(&blocks).with_psd(0, h), relation, rhs: 1.0 };
        ConicProblem { blocks, sense, objective, constraints: vec![constraint] }
    }

    #[test]
    fn min_trace_single_constraint_hits_inverse_max_eigenvalue() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let problem = single_psd_problem(h, Relation::Ge, Sense::Minimize);
        let sol = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective, 0.5, max_relative = 1e-6);
        let report = residuals(&problem, &sol).unwrap();
        assert!(report.max_relative() <= OPTIMAL_RESIDUAL_TOL, "{report:?}");
        // Optimal blocks stay numerically PSD.
        for (&min_eig, block) in report.psd_min_eigenvalues.iter().zip(&sol.psd_blocks) {
            let max_eig = nalgebra::SymmetricEigen::new(block.clone())
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(min_eig >= -1e-8 * (1.0 + max_eig), "min eigenvalue {min_eig}");
        }
    }

    #[test]
    fn max_trace_single_constraint_hits_inverse_min_eigenvalue() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let problem = single_psd_problem(h, Relation::Le, Sense::Maximize);
        let sol = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn max_trace_with_singular_constraint_is_unbounded() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let problem = single_psd_problem(h, Relation::Le, Sense::Maximize);
        let sol = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
        assert!(sol.certificate_residual.unwrap() <= 1e-6);
    }

    #[test]
    fn infeasible_problem_is_detected() {
        // Tr(X) <= -1 with X PSD has no solution.
        let blocks = BlockStructure { psd_dims: vec![2], nonneg_dim: 0 };
        let objective = LinearTerm::zero(&blocks).with_psd(0, DMatrix::identity(2, 2));
        let con = Constraint {
            term: LinearTerm::zero(&blocks).with_psd(0, DMatrix::identity(2, 2)),
            relation: Relation::Le,
            rhs: -1.0,
        };
        let problem =
            ConicProblem { blocks, sense: Sense::Minimize, objective, constraints: vec![con] };
        let sol = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.certificate_residual.unwrap() <= 1e-6);
    }

    #[test]
    fn residuals_of_exact_optimum_vanish() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let problem = single_psd_problem(h, Relation::Ge, Sense::Minimize);
        let exact = ConicSolution {
            status: SolveStatus::Optimal,
            psd_blocks: vec![DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.0]))],
            nonneg: DVector::zeros(0),
            duals: DVector::from_vec(vec![0.5]),
            objective: 0.5,
            iterations: 0,
            duality_gap: 0.0,
            certificate_residual: None,
            trace: Vec::new(),
        };
        let report = residuals(&problem, &exact).unwrap();
        assert!(report.primal_infeasibility_abs <= 1e-12);
        assert!(report.dual_infeasibility_abs <= 1e-12);
        assert!(report.complementarity_abs <= 1e-12);
        assert!(report.duality_gap_abs <= 1e-12);
    }

    #[test]
    fn residuals_report_forced_violation() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let problem = single_psd_problem(h, Relation::Ge, Sense::Minimize);
        let zero = ConicSolution {
            status: SolveStatus::Optimal,
            psd_blocks: vec![DMatrix::zeros(2, 2)],
            nonneg: DVector::zeros(0),
            duals: DVector::from_vec(vec![0.0]),
            objective: 0.0,
            iterations: 0,
            duality_gap: 0.0,
            certificate_residual: None,
            trace: Vec::new(),
        };
        let report = residuals(&problem, &zero).unwrap();
        assert_relative_eq!(report.constraint_violations[0], 1.0);
    }

    #[test]
    fn residuals_of_perturbed_optimum_sit_in_expected_band() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let problem = single_psd_problem(h, Relation::Ge, Sense::Minimize);
        let perturbed = ConicSolution {
            status: SolveStatus::Optimal,
            psd_blocks: vec![DMatrix::from_diagonal(&DVector::from_vec(vec![
                0.5 + 1e-4,
                1e-4,
            ]))],
            nonneg: DVector::zeros(0),
            duals: DVector::from_vec(vec![0.5 - 1e-4]),
            objective: 0.5 + 2e-4,
            iterations: 0,
            duality_gap: 0.0,
            certificate_residual: None,
            trace: Vec::new(),
        };
        let report = residuals(&problem, &perturbed).unwrap();
        assert!(report.duality_gap_rel >= 1e-6 && report.duality_gap_rel <= 1e-2, "{report:?}");
    }

    #[test]
    fn solver_is_deterministic() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0]);
        let problem = single_psd_problem(h, Relation::Ge, Sense::Minimize);
        let a = solve(&problem, &SolverSettings::default()).unwrap();
        let b = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(a.psd_blocks[0], b.psd_blocks[0]);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(
            a.trace.iter().map(|t| t.gap).collect::<Vec<_>>(),
            b.trace.iter().map(|t| t.gap).collect::<Vec<_>>()
        );
    }
}
