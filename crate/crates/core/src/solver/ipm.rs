//! Infeasible-start path-following engine with Nesterov-Todd scaling and a
//! Mehrotra predictor-corrector step.
//!
//! Internal form: `min ⟨C,X⟩ s.t. ⟨A_k,X⟩ = b_k, X ∈ K`, where `K` is a
//! product of dense PSD blocks and a nonnegative orthant. Per iteration the
//! scaling point `W` (with `W S W = X` per block) is computed from Cholesky
//! factors and one SVD, the m×m Schur complement `⟨A_k, W A_l W⟩` is formed
//! and factized once, and predictor and corrector directions reuse that
//! factorization. Step lengths take 0.98 of the distance to the boundary.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::{
    ConicSolution, InternalForm, IterationStat, SolveStatus, SolverSettings, OPTIMAL_RESIDUAL_TOL,
};

const STEP_FRACTION: f64 = 0.98;
const SCHUR_REGULARIZATION: f64 = 1e-10;

/// Element of the cone space: one matrix per PSD block plus the nonneg part.
#[derive(Clone)]
struct ConeVec {
    mats: Vec<DMatrix<f64>>,
    nn: DVector<f64>,
}

impl ConeVec {
    fn zeros(form: &InternalForm) -> Self {
        Self {
            mats: form.blocks.psd_dims.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
            nn: DVector::zeros(form.blocks.nonneg_dim),
        }
    }

    fn scaled_identity(form: &InternalForm, s: f64) -> Self {
        Self {
            mats: form
                .blocks
                .psd_dims
                .iter()
                .map(|&d| DMatrix::identity(d, d) * s)
                .collect(),
            nn: DVector::from_element(form.blocks.nonneg_dim, s),
        }
    }

    fn inner(&self, other: &Self) -> f64 {
        let mut acc = self.nn.dot(&other.nn);
        for (a, b) in self.mats.iter().zip(&other.mats) {
            acc += a.dot(b);
        }
        acc
    }

    fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            a.zip_apply(b, |x, y| *x += alpha * y);
        }
        self.nn.zip_apply(&other.nn, |x, y| *x += alpha * y);
    }

    fn is_finite(&self) -> bool {
        self.mats.iter().all(|m| m.iter().all(|v| v.is_finite()))
            && self.nn.iter().all(|v| v.is_finite())
    }
}

struct PsdScaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: DVector<f64>,
}

struct Scaling {
    psd: Vec<PsdScaling>,
    w_nn: DVector<f64>,
    lambda_nn: DVector<f64>,
}

fn robust_cholesky(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let n = m.nrows();
    let scale = (m.trace() / n.max(1) as f64).abs().max(1.0);
    let mut jitter = 1e-14 * scale;
    for _ in 0..3 {
        let mut jittered = m.clone();
        for i in 0..n {
            jittered[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(jittered) {
            return Some(c);
        }
        jitter *= 100.0;
    }
    None
}

/// NT scaling point per block: `W S W = X`, computed as `G Gᵀ` with
/// `G = L_x V Σ^{-1/2}` from the SVD `L_sᵀ L_x = U Σ Vᵀ`. The scaled point
/// `Λ = G⁻¹ X G⁻ᴴ = Gᵀ S G = Σ` is diagonal.
fn nt_scaling(x: &ConeVec, s: &ConeVec) -> Option<Scaling> {
    let mut psd = Vec::with_capacity(x.mats.len());
    for (xm, sm) in x.mats.iter().zip(&s.mats) {
        let n = xm.nrows();
        if n == 0 {
            psd.push(PsdScaling {
                g: DMatrix::zeros(0, 0),
                g_inv: DMatrix::zeros(0, 0),
                w: DMatrix::zeros(0, 0),
                lambda: DVector::zeros(0),
            });
            continue;
        }
        let lx = robust_cholesky(xm)?.l().clone_owned();
        let ls = robust_cholesky(sm)?.l().clone_owned();
        let prod = ls.transpose() * &lx;
        let svd = prod.svd(true, true);
        let (v_t, sigma) = (svd.v_t?, svd.singular_values);
        if sigma.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return None;
        }
        let v = v_t.transpose();
        let mut g = &lx * v;
        let mut g_inv = v_t * lx.solve_lower_triangular(&DMatrix::identity(n, n))?;
        for j in 0..n {
            let root = sigma[j].sqrt();
            for i in 0..n {
                g[(i, j)] /= root;
            }
            for i in 0..n {
                g_inv[(j, i)] *= root;
            }
        }
        let w = &g * g.transpose();
        psd.push(PsdScaling { g, g_inv, w, lambda: sigma });
    }
    let mut w_nn = DVector::zeros(x.nn.len());
    let mut lambda_nn = DVector::zeros(x.nn.len());
    for i in 0..x.nn.len() {
        if !(x.nn[i] > 0.0 && s.nn[i] > 0.0) {
            return None;
        }
        w_nn[i] = (x.nn[i] / s.nn[i]).sqrt();
        lambda_nn[i] = (x.nn[i] * s.nn[i]).sqrt();
    }
    Some(Scaling { psd, w_nn, lambda_nn })
}

fn apply_a(form: &InternalForm, x: &ConeVec) -> DVector<f64> {
    DVector::from_fn(form.rows.len(), |k, _| {
        let row = &form.rows[k];
        let mut acc = 0.0;
        for (j, coeff) in row.psd.iter().enumerate() {
            if let Some(a) = coeff {
                acc += a.dot(&x.mats[j]);
            }
        }
        for &(i, c) in &row.nn {
            acc += c * x.nn[i];
        }
        acc
    })
}

fn apply_at(form: &InternalForm, y: &DVector<f64>) -> ConeVec {
    let mut out = ConeVec::zeros(form);
    for (k, row) in form.rows.iter().enumerate() {
        let yk = y[k];
        if yk == 0.0 {
            continue;
        }
        for (j, coeff) in row.psd.iter().enumerate() {
            if let Some(a) = coeff {
                out.mats[j].zip_apply(a, |o, ai| *o += yk * ai);
            }
        }
        for &(i, c) in &row.nn {
            out.nn[i] += yk * c;
        }
    }
    out
}

fn build_schur(form: &InternalForm, scal: &Scaling) -> DMatrix<f64> {
    let m = form.rows.len();
    let mut sc = DMatrix::zeros(m, m);
    for j in 0..form.blocks.psd_dims.len() {
        let w = &scal.psd[j].w;
        let scaled: Vec<Option<DMatrix<f64>>> = form
            .rows
            .iter()
            .map(|row| row.psd[j].as_ref().map(|a| w * a * w))
            .collect();
        for k in 0..m {
            if let Some(ak) = &form.rows[k].psd[j] {
                for l in k..m {
                    if let Some(u) = &scaled[l] {
                        sc[(k, l)] += ak.dot(u);
                    }
                }
            }
        }
    }
    for k in 0..m {
        for l in k..m {
            let mut acc = 0.0;
            for &(ik, ck) in &form.rows[k].nn {
                for &(il, cl) in &form.rows[l].nn {
                    if ik == il {
                        let wi = scal.w_nn[ik];
                        acc += wi * wi * ck * cl;
                    }
                }
            }
            sc[(k, l)] += acc;
        }
    }
    for k in 0..m {
        for l in 0..k {
            sc[(k, l)] = sc[(l, k)];
        }
    }
    sc
}

/// Solve `L_Λ(E) = D` in scaled space: `E_ij = 2 D_ij / (λ_i + λ_j)`.
fn lyapunov_solve(d: &ConeVec, scal: &Scaling) -> ConeVec {
    let mats = d
        .mats
        .iter()
        .zip(&scal.psd)
        .map(|(dm, ps)| {
            DMatrix::from_fn(dm.nrows(), dm.ncols(), |i, j| {
                2.0 * dm[(i, j)] / (ps.lambda[i] + ps.lambda[j])
            })
        })
        .collect();
    let nn = DVector::from_fn(d.nn.len(), |i, _| d.nn[i] / scal.lambda_nn[i]);
    ConeVec { mats, nn }
}

struct Direction {
    dx: ConeVec,
    dy: DVector<f64>,
    ds: ConeVec,
}

/// One Newton solve: `A(ΔX) = r_p`, `A*(Δy) + ΔS = R_d`, scaled
/// complementarity `L_Λ(ΔX̃ + ΔS̃) = D`.
fn solve_direction(
    form: &InternalForm,
    scal: &Scaling,
    schur: &Cholesky<f64, Dyn>,
    r_p: &DVector<f64>,
    r_d: &ConeVec,
    d: &ConeVec,
) -> Direction {
    let e = lyapunov_solve(d, scal);
    // G E Gᵀ per block; w∘e on the nonneg part.
    let gegt = ConeVec {
        mats: e
            .mats
            .iter()
            .zip(&scal.psd)
            .map(|(em, ps)| {
                let m = &ps.g * em * ps.g.transpose();
                (&m + m.transpose()) * 0.5
            })
            .collect(),
        nn: DVector::from_fn(e.nn.len(), |i, _| scal.w_nn[i] * e.nn[i]),
    };
    // W R_d W per block; w²∘r_d on the nonneg part.
    let wrdw = ConeVec {
        mats: r_d
            .mats
            .iter()
            .zip(&scal.psd)
            .map(|(rm, ps)| {
                let m = &ps.w * rm * &ps.w;
                (&m + m.transpose()) * 0.5
            })
            .collect(),
        nn: DVector::from_fn(r_d.nn.len(), |i, _| {
            scal.w_nn[i] * scal.w_nn[i] * r_d.nn[i]
        }),
    };
    let rhs = r_p - apply_a(form, &gegt) + apply_a(form, &wrdw);
    let dy = schur.solve(&rhs);
    let mut ds = r_d.clone();
    ds.axpy(-1.0, &apply_at(form, &dy));
    // ΔX = G E Gᵀ − W ΔS W.
    let dx = ConeVec {
        mats: gegt
            .mats
            .iter()
            .zip(ds.mats.iter().zip(&scal.psd))
            .map(|(ge, (dsm, ps))| {
                let m = &ps.w * dsm * &ps.w;
                ge - (&m + m.transpose()) * 0.5
            })
            .collect(),
        nn: DVector::from_fn(gegt.nn.len(), |i, _| {
            gegt.nn[i] - scal.w_nn[i] * scal.w_nn[i] * ds.nn[i]
        }),
    };
    Direction { dx, dy, ds }
}

/// Largest `α ≥ 0` with `x + α·dx` still in the cone (∞ if unconstrained).
fn step_to_boundary(x: &ConeVec, dx: &ConeVec) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xm, dm) in x.mats.iter().zip(&dx.mats) {
        let n = xm.nrows();
        if n == 0 {
            continue;
        }
        let k = match robust_cholesky(xm) {
            Some(chol) => {
                let l = chol.l().clone_owned();
                let z = l.solve_lower_triangular(dm).expect("triangular solve");
                let kt = l.solve_lower_triangular(&z.transpose()).expect("triangular solve");
                (kt.transpose() + kt) * 0.5
            }
            None => return 0.0,
        };
        let min_eig =
            SymmetricEigen::new(k).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < 0.0 {
            alpha = alpha.min(-1.0 / min_eig);
        }
    }
    for i in 0..x.nn.len() {
        if dx.nn[i] < 0.0 {
            alpha = alpha.min(-x.nn[i] / dx.nn[i]);
        }
    }
    alpha
}

fn scaled_product_term(dir: &Direction, scal: &Scaling) -> ConeVec {
    // H(ΔX̃ ΔS̃) with ΔX̃ = G⁻¹ΔX G⁻ᵀ, ΔS̃ = GᵀΔS G.
    let mats = dir
        .dx
        .mats
        .iter()
        .zip(dir.ds.mats.iter().zip(&scal.psd))
        .map(|(dxm, (dsm, ps))| {
            let dxt = &ps.g_inv * dxm * ps.g_inv.transpose();
            let dst = ps.g.transpose() * dsm * &ps.g;
            let p = dxt * dst;
            (&p + p.transpose()) * 0.5
        })
        .collect();
    let nn = DVector::from_fn(dir.dx.nn.len(), |i, _| {
        (dir.dx.nn[i] / scal.w_nn[i]) * (scal.w_nn[i] * dir.ds.nn[i])
    });
    ConeVec { mats, nn }
}

pub(super) fn run(form: &InternalForm, settings: &SolverSettings) -> ConicSolution {
    let m = form.rows.len();
    let nu = form.blocks.degree() as f64;
    let flip = if form.flipped { -1.0 } else { 1.0 };

    let b_norm = form.b.norm();
    let c_obj = ConeVec { mats: form.c_psd.clone(), nn: form.c_nn.clone() };
    let c_norm = c_obj.norm();
    let a_norms: Vec<f64> = form
        .rows
        .iter()
        .map(|row| {
            let mut sq = 0.0;
            for coeff in row.psd.iter().flatten() {
                sq += coeff.norm_squared();
            }
            for &(_, c) in &row.nn {
                sq += c * c;
            }
            sq.sqrt()
        })
        .collect();

    // SDPT3-style cold start: large enough multiples of the identity that the
    // initial gap dominates the infeasibility terms.
    let mut eta_p: f64 = 10.0_f64.max(nu.sqrt());
    for (k, &an) in a_norms.iter().enumerate() {
        eta_p = eta_p.max(nu.sqrt() * (1.0 + form.b[k].abs()) / (1.0 + an));
    }
    let mut eta_d: f64 = 10.0_f64.max(nu.sqrt()).max(c_norm);
    for &an in &a_norms {
        eta_d = eta_d.max(an);
    }

    let mut x = ConeVec::scaled_identity(form, eta_p);
    let mut s = ConeVec::scaled_identity(form, eta_d);
    let mut y = DVector::zeros(m);

    let mut trace: Vec<IterationStat> = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut certificate_residual = None;
    let mut iterations = 0;
    let mut rel_gap = f64::INFINITY;
    let mut merit_history: Vec<f64> = Vec::new();

    for iter in 0..=settings.max_iterations {
        iterations = iter;
        // Residuals of the current iterate.
        let ax = apply_a(form, &x);
        let r_p = &form.b - &ax;
        let mut r_d = c_obj.clone();
        r_d.axpy(-1.0, &s);
        r_d.axpy(-1.0, &apply_at(form, &y));

        let pobj_int = c_obj.inner(&x);
        let dobj_int = form.b.dot(&y);
        let gap = x.inner(&s);
        if !gap.is_finite() || !pobj_int.is_finite() || !x.is_finite() {
            status = SolveStatus::NumericalFailure;
            break;
        }
        let pobj = flip * pobj_int;
        let dobj = flip * dobj_int;
        rel_gap = gap / (1.0 + pobj_int.abs() + dobj_int.abs());
        let rel_p = r_p.norm() / (1.0 + b_norm);
        let rel_d = r_d.norm() / (1.0 + c_norm);

        trace.push(IterationStat {
            iter,
            primal_objective: pobj,
            dual_objective: dobj,
            gap,
            relative_gap: rel_gap,
            primal_infeasibility: rel_p,
            dual_infeasibility: rel_d,
        });
        if settings.verbose {
            eprintln!("{iter},{pobj:.9e},{dobj:.9e},{gap:.3e},{rel_gap:.3e},{rel_p:.3e},{rel_d:.3e}");
        }

        if rel_gap <= settings.gap_tol && rel_p <= settings.feas_tol && rel_d <= settings.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }

        // Ray certificates. (y/bᵀy, S/bᵀy) is an approximate Farkas witness
        // of primal infeasibility; X/(-⟨C,X⟩) an approximate improving ray.
        if iter >= 5 {
            if dobj_int > 0.0 {
                let mut chs = c_obj.clone();
                chs.axpy(-1.0, &r_d);
                let res = chs.norm() / dobj_int / (1.0 + c_norm);
                if res <= settings.certificate_tol {
                    status = SolveStatus::Infeasible;
                    certificate_residual = Some(res);
                    break;
                }
            }
            if pobj_int < 0.0 {
                let res = ax.norm() / (-pobj_int) / (1.0 + b_norm);
                if res <= settings.certificate_tol {
                    status = SolveStatus::Unbounded;
                    certificate_residual = Some(res);
                    break;
                }
            }
        }

        // Stall detection: no 10% progress on the merit over 8 iterations.
        let merit = rel_gap.abs().max(rel_p).max(rel_d);
        merit_history.push(merit);
        if iter >= 12 {
            let past = merit_history[iter - 8];
            if merit > 0.9 * past {
                status = if merit <= OPTIMAL_RESIDUAL_TOL {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::MaxIterations
                };
                break;
            }
        }
        if iter == settings.max_iterations {
            status = if merit <= OPTIMAL_RESIDUAL_TOL {
                SolveStatus::Optimal
            } else {
                SolveStatus::MaxIterations
            };
            break;
        }

        let mu = gap / nu;
        let scal = match nt_scaling(&x, &s) {
            Some(sc) => sc,
            None => {
                status = SolveStatus::NumericalFailure;
                break;
            }
        };

        let schur = build_schur(form, &scal);
        let mut reg = SCHUR_REGULARIZATION;
        let schur_chol = loop {
            let mut regd = schur.clone();
            for k in 0..m {
                regd[(k, k)] += reg;
            }
            match Cholesky::new(regd) {
                Some(c) => break Some(c),
                None => {
                    reg *= 100.0;
                    if reg > 1e-2 {
                        break None;
                    }
                }
            }
        };
        let schur_chol = match schur_chol {
            Some(c) => c,
            None => {
                status = SolveStatus::NumericalFailure;
                break;
            }
        };

        // Predictor: target σ = 0.
        let mut d_aff = ConeVec {
            mats: scal
                .psd
                .iter()
                .map(|ps| {
                    DMatrix::from_fn(ps.lambda.len(), ps.lambda.len(), |i, j| {
                        if i == j { -ps.lambda[i] * ps.lambda[i] } else { 0.0 }
                    })
                })
                .collect(),
            nn: DVector::from_fn(scal.lambda_nn.len(), |i, _| {
                -scal.lambda_nn[i] * scal.lambda_nn[i]
            }),
        };
        let aff = solve_direction(form, &scal, &schur_chol, &r_p, &r_d, &d_aff);
        let alpha_p_aff = step_to_boundary(&x, &aff.dx).min(1.0);
        let alpha_d_aff = step_to_boundary(&s, &aff.ds).min(1.0);

        let mut x_aff = x.clone();
        x_aff.axpy(alpha_p_aff, &aff.dx);
        let mut s_aff = s.clone();
        s_aff.axpy(alpha_d_aff, &aff.ds);
        let mu_aff = (x_aff.inner(&s_aff) / nu).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector: σμI − Λ² − H(ΔX̃_aff ΔS̃_aff).
        let correction = scaled_product_term(&aff, &scal);
        for (dm, ps) in d_aff.mats.iter_mut().zip(&scal.psd) {
            for i in 0..ps.lambda.len() {
                dm[(i, i)] += sigma * mu;
            }
        }
        for v in d_aff.nn.iter_mut() {
            *v += sigma * mu;
        }
        d_aff.axpy(-1.0, &correction);

        let dir = solve_direction(form, &scal, &schur_chol, &r_p, &r_d, &d_aff);
        let alpha_p = (STEP_FRACTION * step_to_boundary(&x, &dir.dx)).min(1.0);
        let alpha_d = (STEP_FRACTION * step_to_boundary(&s, &dir.ds)).min(1.0);
        if alpha_p <= 1e-14 && alpha_d <= 1e-14 {
            status = SolveStatus::NumericalFailure;
            break;
        }

        x.axpy(alpha_p, &dir.dx);
        y.axpy(alpha_d, &dir.dy, 1.0);
        s.axpy(alpha_d, &dir.ds);
    }

    let pobj_final = flip * c_obj.inner(&x);
    ConicSolution {
        status,
        psd_blocks: x.mats,
        nonneg: DVector::from_fn(form.user_nonneg_dim, |i, _| x.nn[i]),
        duals: y,
        objective: pobj_final,
        iterations,
        duality_gap: rel_gap,
        certificate_residual,
        trace,
    }
}
