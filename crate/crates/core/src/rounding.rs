//! Randomized rounding of relaxation solutions, plus rank reduction.
//!
//! Minimization model, per trial: pick the support `I` of the `Q` largest
//! selectors, draw `ξ ~ N_𝔽(0, X̄⁽²⁾)` and scale by
//!
//! ```text
//! t = max{ √(max_{i∈I} 1/ξᴴH_iξ), √(max_{i∉I} ε/ξᴴH_iξ) }
//! ```
//!
//! so `x⁽²⁾ = t·ξ` meets every coverage level. The maximization model
//! mirrors this with `t̂ = min{ √(min_{i∈Î} ε/ξᴴH_iξ), √(min_{i∉Î} 1/ξᴴH_iξ) }`
//! and the convention `c/0 = +∞` (a vanishing form imposes no cap). The best
//! objective over `T` trials is the reported `v_UBQP`.
//!
//! Draws with a vanishing required form are resampled against a hard budget;
//! the event has probability zero in exact arithmetic but occurs numerically
//! when `X̄⁽²⁾` is rank-deficient.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::instance::{
    Field, HermitianMatrix, Instance, InstanceError, ModelSense, C64, RANK_REL_TOL,
};
use crate::relaxation::{RelaxationKind, RelaxationSolution};
use crate::rng::{stream_rng, Stream};

/// Default trial count for rounding and experiments.
pub const DEFAULT_TRIALS: usize = 1000;
/// Quadratic forms at or below this are treated as vanishing.
pub const QUAD_FLOOR: f64 = 1e-14;
/// Feasibility slack tolerance for rounded points.
pub const FEAS_TOL: f64 = 1e-8;
/// Resample budget per outcome, as a multiple of the trial count.
const RESAMPLE_FACTOR: usize = 100;

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error("covariance factorization failed: {0}")]
    Factorization(#[from] InstanceError),
    #[error("resample budget exhausted after {resamples} redraws over {trials} trials; \
             some required quadratic form stays at zero (degenerate instance)")]
    ResampleBudget { resamples: usize, trials: usize },
    #[error("rank reduction stalled at rank {rank} with {bound} constraints and no null direction")]
    RankReductionStalled { rank: usize, bound: usize },
    #[error("rank reduction input violates a trace constraint by {violation:.3e}")]
    InfeasibleInput { violation: f64 },
}

/// Sorted 0-based index set of the selected constraints, `|I| = Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// 1-based copy for reports and files.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i + 1).collect()
    }
}

/// The `Q` largest selector values; ties break toward the lower index.
pub fn select_support(beta: &DVector<f64>, cardinality: usize) -> SupportSet {
    assert!(cardinality <= beta.len(), "support larger than selector vector");
    let mut order: Vec<usize> = (0..beta.len()).collect();
    order.sort_by(|&a, &b| beta[b].total_cmp(&beta[a]).then(a.cmp(&b)));
    let mut indices: Vec<usize> = order.into_iter().take(cardinality).collect();
    indices.sort_unstable();
    SupportSet { indices }
}

/// One sampled-and-scaled candidate.
#[derive(Clone, Debug)]
pub struct RoundingTrial {
    pub xi: DVector<C64>,
    pub t: f64,
    pub x2: DVector<C64>,
    pub objective: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug)]
pub struct RoundingOutcome {
    pub support: SupportSet,
    /// Binary selector vector: true exactly on the support.
    pub x1: Vec<bool>,
    pub best: RoundingTrial,
    pub objectives: Vec<f64>,
    /// Best objective over all trials: min for the coverage model, max for
    /// the suppression model.
    pub v_ubqp: f64,
    pub trials_attempted: usize,
    pub trials_resampled: usize,
    /// Trials whose scaled point failed the feasibility check; always 0
    /// unless something upstream is broken.
    pub infeasible_trials: usize,
    /// Suppression model only: some trial had no cap at all (`t̂ = +∞`),
    /// certifying unboundedness. `best.xi` then holds the escape direction.
    pub unbounded: bool,
}

/// Identifies the rounding substream family: trial `k` of realization `r`
/// draws from `(seed, Trial, r, k)`, so outcomes are independent of
/// execution order and reproducible one realization at a time.
#[derive(Clone, Copy, Debug)]
pub struct TrialStreams {
    pub seed: u64,
    pub realization: u64,
}

impl TrialStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed, realization: 0 }
    }

    fn rng(&self, trial: u64) -> ChaCha8Rng {
        stream_rng(self.seed, Stream::Trial, self.realization, trial)
    }
}

/// Draw `ξ` with `E[ξξᴴ] = X2` from a PSD factorization: `ξ = L g` with
/// standard normal `g` (real) or `ξ = L (g₁ + i·g₂)/√2` (complex).
pub fn sample_gaussian(
    x2: &HermitianMatrix,
    field: Field,
    rng: &mut ChaCha8Rng,
) -> Result<DVector<C64>, RoundingError> {
    let n = x2.dim();
    match field {
        Field::Real => {
            let l = real_psd_factor(x2)?;
            let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            Ok((l * g).map(|x| C64::new(x, 0.0)))
        }
        Field::Complex => {
            let l = x2.psd_factor()?;
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            let g = DVector::from_fn(n, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re * inv_sqrt2, im * inv_sqrt2)
            });
            Ok(l * g)
        }
    }
}

fn real_psd_factor(x2: &HermitianMatrix) -> Result<DMatrix<f64>, RoundingError> {
    let eig = SymmetricEigen::new(x2.real_part());
    let max = eig.eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    let floor = -crate::instance::PSD_REL_TOL * 1.0_f64.max(max);
    if eig.eigenvalues.iter().any(|&v| v < floor) {
        return Err(RoundingError::Factorization(InstanceError::NonFinite {
            what: format!(
                "indefinite covariance (min eigenvalue {:.3e})",
                eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
            ),
        }));
    }
    let n = x2.dim();
    let mut l = eig.eigenvectors;
    for j in 0..n {
        let lam = eig.eigenvalues[j].max(0.0);
        let s = if lam > RANK_REL_TOL * max { lam.sqrt() } else { 0.0 };
        for i in 0..n {
            l[(i, j)] *= s;
        }
    }
    Ok(l)
}

/// Coverage-model scaling: `t² = max over required levels of target/quad`.
/// The off-support term vanishes when ε = 0 or the support is everything.
fn scale_min(quads: &[f64], on_support: &[bool], epsilon: f64) -> f64 {
    let mut tsq: f64 = 0.0;
    for (i, &q) in quads.iter().enumerate() {
        let target = if on_support[i] { 1.0 } else { epsilon };
        if target > 0.0 {
            tsq = tsq.max(target / q);
        }
    }
    tsq.sqrt()
}

/// Suppression-model scaling: `t̂² = min over caps of cap/quad`, with
/// `cap/0 = +∞` (no cap from a vanishing form). Returns `+∞` when nothing
/// caps the scale.
fn scale_max(quads: &[f64], on_support: &[bool], epsilon: f64) -> f64 {
    let mut tsq = f64::INFINITY;
    for (i, &q) in quads.iter().enumerate() {
        let cap = if on_support[i] { epsilon } else { 1.0 };
        if q > QUAD_FLOOR {
            tsq = tsq.min(cap / q);
        }
    }
    tsq.sqrt()
}

fn quad_forms(instance: &Instance, xi: &DVector<C64>) -> Vec<f64> {
    instance.matrices.iter().map(|h| h.quad_form(xi).max(0.0)).collect()
}

fn trial_slacks(instance: &Instance, x1: &[bool], scaled_quads: &[f64]) -> bool {
    scaled_quads.iter().enumerate().all(|(i, &q)| match instance.sense {
        ModelSense::Minimize => {
            let target = if x1[i] { 1.0 } else { instance.epsilon };
            q >= target - FEAS_TOL
        }
        ModelSense::Maximize => {
            let cap = if x1[i] { instance.epsilon } else { 1.0 };
            q <= cap + FEAS_TOL
        }
    })
}

/// Rounding procedure for the minimization model.
pub fn round_min(
    instance: &Instance,
    relax: &RelaxationSolution,
    trials: usize,
    streams: &TrialStreams,
) -> Result<RoundingOutcome, RoundingError> {
    assert_eq!(instance.sense, ModelSense::Minimize);
    assert_ne!(relax.which, RelaxationKind::Sdp3, "minimization rounding needs (SDP1)/(SDP2)");
    let m = instance.num_constraints();
    let support = select_support(&relax.beta, instance.cardinality);
    let x1: Vec<bool> = (0..m).map(|i| support.contains(i)).collect();
    let eps = instance.epsilon;
    let budget = RESAMPLE_FACTOR * trials;

    let mut objectives = Vec::with_capacity(trials);
    let mut best: Option<RoundingTrial> = None;
    let mut resampled = 0usize;
    let mut infeasible = 0usize;

    for k in 0..trials {
        let mut rng = streams.rng(k as u64);
        let (xi, quads) = loop {
            let xi = sample_gaussian(&relax.x2, instance.field, &mut rng)?;
            let quads = quad_forms(instance, &xi);
            let degenerate = quads
                .iter()
                .enumerate()
                .any(|(i, &q)| (x1[i] || eps > 0.0) && q <= QUAD_FLOOR);
            if !degenerate {
                break (xi, quads);
            }
            resampled += 1;
            if resampled > budget {
                return Err(RoundingError::ResampleBudget { resamples: resampled, trials });
            }
        };
        let t = scale_min(&quads, &x1, eps);
        let x2 = xi.map(|z| z * t);
        let objective = x2.norm_squared();
        let scaled: Vec<f64> = quads.iter().map(|q| q * t * t).collect();
        let feasible = trial_slacks(instance, &x1, &scaled);
        if !feasible {
            infeasible += 1;
        }
        objectives.push(objective);
        let better = best.as_ref().is_none_or(|b| objective < b.objective);
        if better {
            best = Some(RoundingTrial { xi, t, x2, objective, feasible });
        }
    }

    let best = best.expect("at least one trial");
    let v_ubqp = best.objective;
    Ok(RoundingOutcome {
        support,
        x1,
        best,
        objectives,
        v_ubqp,
        trials_attempted: trials,
        trials_resampled: resampled,
        infeasible_trials: infeasible,
        unbounded: false,
    })
}

/// Rounding procedure for the maximization model.
pub fn round_max(
    instance: &Instance,
    relax: &RelaxationSolution,
    trials: usize,
    streams: &TrialStreams,
) -> Result<RoundingOutcome, RoundingError> {
    assert_eq!(instance.sense, ModelSense::Maximize);
    let m = instance.num_constraints();
    let support = select_support(&relax.beta, instance.cardinality);
    let x1: Vec<bool> = (0..m).map(|i| support.contains(i)).collect();
    let eps = instance.epsilon;

    let mut objectives = Vec::with_capacity(trials);
    let mut best: Option<RoundingTrial> = None;
    let mut infeasible = 0usize;

    for k in 0..trials {
        let mut rng = streams.rng(k as u64);
        let xi = sample_gaussian(&relax.x2, instance.field, &mut rng)?;
        let quads = quad_forms(instance, &xi);
        let t = scale_max(&quads, &x1, eps);
        if t.is_infinite() {
            // No constraint caps this direction: the model itself is
            // unbounded along ξ.
            let trial = RoundingTrial {
                x2: xi.clone(),
                xi,
                t,
                objective: f64::INFINITY,
                feasible: true,
            };
            return Ok(RoundingOutcome {
                support,
                x1,
                best: trial,
                objectives,
                v_ubqp: f64::INFINITY,
                trials_attempted: k + 1,
                trials_resampled: 0,
                infeasible_trials: infeasible,
                unbounded: true,
            });
        }
        let x2 = xi.map(|z| z * t);
        let objective = x2.norm_squared();
        let scaled: Vec<f64> = quads.iter().map(|q| q * t * t).collect();
        let feasible = trial_slacks(instance, &x1, &scaled);
        if !feasible {
            infeasible += 1;
        }
        objectives.push(objective);
        let better = best.as_ref().is_none_or(|b| objective > b.objective);
        if better {
            best = Some(RoundingTrial { xi, t, x2, objective, feasible });
        }
    }

    let best = best.expect("at least one trial");
    let v_ubqp = best.objective;
    Ok(RoundingOutcome {
        support,
        x1,
        best,
        objectives,
        v_ubqp,
        trials_attempted: trials,
        trials_resampled: 0,
        infeasible_trials: infeasible,
        unbounded: false,
    })
}

/// Per-constraint signed slack of a candidate `(x1, x2)` against the model.
#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    /// Nonnegative means satisfied: coverage slack `quad − level` for the
    /// minimization model, cap slack `level − quad` for the maximization.
    pub slacks: Vec<f64>,
    pub cardinality_ok: bool,
    pub feasible: bool,
}

pub fn check_feasibility(
    instance: &Instance,
    x1: &[bool],
    x2: &DVector<C64>,
) -> FeasibilityReport {
    assert_eq!(x1.len(), instance.num_constraints());
    assert_eq!(x2.len(), instance.dim());
    let eps = instance.epsilon;
    let slacks: Vec<f64> = instance
        .matrices
        .iter()
        .zip(x1)
        .map(|(h, &sel)| {
            let quad = h.quad_form(x2);
            match instance.sense {
                ModelSense::Minimize => {
                    let level = if sel { 1.0 } else { eps };
                    quad - level
                }
                ModelSense::Maximize => {
                    let level = if sel { eps } else { 1.0 };
                    level - quad
                }
            }
        })
        .collect();
    let cardinality_ok = x1.iter().filter(|&&b| b).count() == instance.cardinality;
    let feasible = cardinality_ok && slacks.iter().all(|&s| s >= -FEAS_TOL);
    FeasibilityReport { slacks, cardinality_ok, feasible }
}

// ---------------------------------------------------------------------------
// Rank reduction
// ---------------------------------------------------------------------------

/// Reduce the rank of a feasible PSD matrix while preserving every trace
/// constraint, until the degree-of-freedom bound holds: with `m` constraints,
/// `r(r+1)/2 ≤ m` in the real case and `r² ≤ m` in the complex case.
///
/// Each step factors `X = V Vᴴ` on its column space, finds a nonzero
/// Hermitian `Δ` with `Tr(Vᴴ A_k V Δ) = 0` for all `k`, and moves to the cone
/// boundary along `V (I + tΔ) Vᴴ`, dropping the rank by at least one.
pub fn rank_reduce(
    constraints: &[(HermitianMatrix, f64)],
    x: &HermitianMatrix,
    field: Field,
) -> Result<HermitianMatrix, RoundingError> {
    let m = constraints.len();
    for (a, b) in constraints {
        let violation = (a.trace_product(x) - b).abs();
        if violation > 1e-5 {
            return Err(RoundingError::InfeasibleInput { violation });
        }
    }
    let bound_met = |r: usize| match field {
        Field::Real => r * (r + 1) / 2 <= m,
        Field::Complex => r * r <= m,
    };

    let mut current = x.clone();
    loop {
        let (vals, vecs) = current.eigen_pairs();
        let n = current.dim();
        let max = vals.last().copied().unwrap_or(0.0).max(0.0);
        let rank = vals.iter().filter(|&&v| v > RANK_REL_TOL * max).count();
        if rank == 0 || bound_met(rank) {
            return Ok(current);
        }
        // Column-space factor from the top `rank` eigenpairs (ascending
        // order, so the last columns).
        let v = DMatrix::from_fn(n, rank, |i, j| {
            let col = n - rank + j;
            vecs[(i, col)] * vals[col].max(0.0).sqrt()
        });
        // Compressed constraint matrices Vᴴ A_k V.
        let compressed: Vec<DMatrix<C64>> =
            constraints.iter().map(|(a, _)| v.adjoint() * a.matrix() * &v).collect();

        let basis = hermitian_basis(rank, field);
        let d = basis.len();
        // T[k][j] = ⟨Vᴴ A_k V, B_j⟩; a null vector of T is a feasible move.
        let t_map = DMatrix::from_fn(m, d, |k, j| real_inner(&compressed[k], &basis[j]));
        let gram = t_map.transpose() * &t_map;
        let eig = SymmetricEigen::new(gram);
        let (mut min_idx, mut min_val) = (0usize, f64::INFINITY);
        let mut max_val = 0.0_f64;
        for (j, &val) in eig.eigenvalues.iter().enumerate() {
            if val < min_val {
                min_val = val;
                min_idx = j;
            }
            max_val = max_val.max(val);
        }
        if min_val > 1e-10 * (1.0 + max_val) {
            return Err(RoundingError::RankReductionStalled { rank, bound: m });
        }
        let coeffs = eig.eigenvectors.column(min_idx);
        let mut delta = DMatrix::<C64>::zeros(rank, rank);
        for (j, b) in basis.iter().enumerate() {
            delta.zip_apply(b, |z, bz| *z += bz * coeffs[j]);
        }
        // Step to the boundary along the extreme eigenvalue of Δ.
        let delta_h = HermitianMatrix::new((&delta + delta.adjoint()).map(|z| z * 0.5))
            .expect("basis combination is Hermitian");
        let evs = delta_h.eigenvalues();
        let extreme =
            evs.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0);
        if extreme.abs() <= 1e-12 {
            return Err(RoundingError::RankReductionStalled { rank, bound: m });
        }
        let step = -1.0 / extreme;
        let mut inner = delta_h.matrix().map(|z| z * step);
        for i in 0..rank {
            inner[(i, i)] += C64::new(1.0, 0.0);
        }
        let reduced = &v * inner * v.adjoint();
        let sym = (&reduced + reduced.adjoint()).map(|z| z * 0.5);
        current = HermitianMatrix::new(sym).expect("congruence preserves Hermitian structure");
    }
}

/// Orthonormal basis of Hermitian `r×r` matrices under `Re Tr(AᴴB)`:
/// diagonal units, symmetrized pairs, and (complex only) antisymmetric
/// imaginary pairs.
fn hermitian_basis(r: usize, field: Field) -> Vec<DMatrix<C64>> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::new();
    for i in 0..r {
        let mut b = DMatrix::<C64>::zeros(r, r);
        b[(i, i)] = C64::new(1.0, 0.0);
        basis.push(b);
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let mut b = DMatrix::<C64>::zeros(r, r);
            b[(i, j)] = C64::new(inv_sqrt2, 0.0);
            b[(j, i)] = C64::new(inv_sqrt2, 0.0);
            basis.push(b);
            if field == Field::Complex {
                let mut b = DMatrix::<C64>::zeros(r, r);
                b[(i, j)] = C64::new(0.0, inv_sqrt2);
                b[(j, i)] = C64::new(0.0, -inv_sqrt2);
                basis.push(b);
            }
        }
    }
    basis
}

fn real_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Rank-reduce the relaxation's `X̄⁽²⁾` before sampling, preserving the
/// objective trace and every attained coverage trace.
pub fn rank_reduce_relaxation(
    instance: &Instance,
    relax: &RelaxationSolution,
) -> Result<RelaxationSolution, RoundingError> {
    let n = instance.dim();
    let mut constraints = Vec::with_capacity(instance.num_constraints() + 1);
    constraints.push((HermitianMatrix::identity(n), relax.x2.trace()));
    for h in &instance.matrices {
        constraints.push((h.clone(), h.trace_product(&relax.x2)));
    }
    let x2 = rank_reduce(&constraints, &relax.x2, instance.field)?;
    Ok(RelaxationSolution { x2, ..relax.clone() })
}
