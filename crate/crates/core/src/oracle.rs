//! Brute-force reference values at desk scale.
//!
//! The binary part is enumerated exhaustively (all `C(M,Q)` supports) and the
//! continuous part is solved by a dense direction grid, which is exact up to
//! grid resolution because at `N = 2` every candidate is a scaled unit
//! direction: real directions are `(cos θ, sin θ)` with `θ ∈ [0, π)`, complex
//! ones `(cos a, e^{iφ} sin a)` with `(a, φ) ∈ [0, π/2] × [0, 2π)` after
//! quotienting out the global phase. Grids are nested under doubling, so a
//! finer grid never worsens the reported value.

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::instance::{Field, HermitianMatrix, Instance, ModelSense, C64};

/// Hard cap on the number of enumerated supports.
pub const SUPPORT_GUARD: u128 = 1_000_000;

const QUAD_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("the continuous subproblem is only solvable exhaustively at N = 2, got N = {n}")]
    DimensionNotTwo { n: usize },
    #[error("C({m},{q}) = {count} supports exceeds the enumeration guard of {SUPPORT_GUARD}")]
    TooManySupports { m: usize, q: usize, count: u128 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OracleStatus {
    /// Solved up to the reported discretization error.
    Solved,
    Infeasible,
    Unbounded,
}

/// Direction-grid resolution. `total` is the real direction count; complex
/// grids use `total/32 + 1` polar steps times `total/16` phase steps, which
/// reproduces the 8192 → 257×512 default split.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSpec {
    pub real_directions: usize,
    pub complex_alpha: usize,
    pub complex_phase: usize,
}

impl GridSpec {
    pub fn with_total(total: usize) -> Self {
        let total = total.max(64);
        Self {
            real_directions: total,
            complex_alpha: (total / 32).max(8),
            complex_phase: (total / 16).max(16),
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::with_total(8192)
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub value: f64,
    /// Sorted 0-based support achieving the value.
    pub support: Vec<usize>,
    pub w: DVector<C64>,
    pub grid: GridSpec,
    /// Local discretization-error estimate at the winning direction.
    pub error_bound: f64,
    pub status: OracleStatus,
}

impl OracleResult {
    /// Entries of `w` as `[re, im]` pairs for report files.
    pub fn w_pairs(&self) -> Vec<[f64; 2]> {
        self.w.iter().map(|z| [z.re, z.im]).collect()
    }
}

// ---------------------------------------------------------------------------
// Support enumeration
// ---------------------------------------------------------------------------

fn binomial(m: usize, q: usize) -> u128 {
    if q > m {
        return 0;
    }
    let q = q.min(m - q);
    let mut acc: u128 = 1;
    for i in 0..q {
        acc = acc.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All `C(M,Q)` supports in lexicographic order, 0-based.
pub fn enumerate_supports(m: usize, q: usize) -> Result<Vec<Vec<usize>>, OracleError> {
    let count = binomial(m, q);
    if count > SUPPORT_GUARD {
        return Err(OracleError::TooManySupports { m, q, count });
    }
    let mut out = Vec::with_capacity(count as usize);
    if q > m {
        return Ok(out);
    }
    let mut current: Vec<usize> = (0..q).collect();
    loop {
        out.push(current.clone());
        // Rightmost position that can still advance.
        let mut i = q;
        while i > 0 {
            i -= 1;
            if current[i] != i + m - q {
                current[i] += 1;
                for j in (i + 1)..q {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return Ok(out);
            }
        }
        if q == 0 {
            return Ok(out);
        }
    }
}

// ---------------------------------------------------------------------------
// Direction grids (N = 2)
// ---------------------------------------------------------------------------

struct DirectionGrid {
    dirs: Vec<DVector<C64>>,
    field: Field,
    alpha_steps: usize,
    phase_steps: usize,
}

impl DirectionGrid {
    fn new(field: Field, grid: &GridSpec) -> Self {
        let mut dirs = Vec::new();
        let (alpha_steps, phase_steps) = match field {
            Field::Real => {
                for j in 0..grid.real_directions {
                    let theta = std::f64::consts::PI * j as f64 / grid.real_directions as f64;
                    dirs.push(DVector::from_vec(vec![
                        C64::new(theta.cos(), 0.0),
                        C64::new(theta.sin(), 0.0),
                    ]));
                }
                (0, 0)
            }
            Field::Complex => {
                let ga = grid.complex_alpha;
                let gp = grid.complex_phase;
                for i in 0..=ga {
                    let a = std::f64::consts::FRAC_PI_2 * i as f64 / ga as f64;
                    for k in 0..gp {
                        let phi = 2.0 * std::f64::consts::PI * k as f64 / gp as f64;
                        dirs.push(DVector::from_vec(vec![
                            C64::new(a.cos(), 0.0),
                            C64::from_polar(a.sin(), phi),
                        ]));
                    }
                }
                (ga, gp)
            }
        };
        Self { dirs, field, alpha_steps, phase_steps }
    }

    fn len(&self) -> usize {
        self.dirs.len()
    }

    /// Grid neighbours of a direction index, for the error estimate.
    fn neighbors(&self, idx: usize) -> Vec<usize> {
        match self.field {
            Field::Real => {
                let g = self.dirs.len();
                vec![(idx + g - 1) % g, (idx + 1) % g]
            }
            Field::Complex => {
                let gp = self.phase_steps;
                let (i, k) = (idx / gp, idx % gp);
                let mut out = vec![i * gp + (k + 1) % gp, i * gp + (k + gp - 1) % gp];
                if i > 0 {
                    out.push((i - 1) * gp + k);
                }
                if i < self.alpha_steps {
                    out.push((i + 1) * gp + k);
                }
                out
            }
        }
    }
}

/// All quadratic forms `u_dᴴ H_i u_d`, direction-major.
fn quad_table(matrices: &[HermitianMatrix], grid: &DirectionGrid) -> Vec<f64> {
    let m = matrices.len();
    let mut table = vec![0.0; grid.len() * m];
    for (d, u) in grid.dirs.iter().enumerate() {
        for (i, h) in matrices.iter().enumerate() {
            table[d * m + i] = h.quad_form(u).max(0.0);
        }
    }
    table
}

/// Minimal squared scale at one direction: `max_i target_i / quad_i`;
/// `None` when some positive target is unreachable along the direction.
fn min_scale_sq(quads: &[f64], targets: &[f64]) -> Option<f64> {
    let mut s = 0.0_f64;
    for (&q, &t) in quads.iter().zip(targets) {
        if t > 0.0 {
            if q <= QUAD_TOL {
                return None;
            }
            s = s.max(t / q);
        }
    }
    Some(s)
}

/// Maximal squared scale: `min_i cap_i / quad_i` with `cap/0 = +∞`;
/// `None` means unbounded (no finite cap along the direction).
fn max_scale_sq(quads: &[f64], caps: &[f64]) -> Option<f64> {
    let mut s = f64::INFINITY;
    for (&q, &c) in quads.iter().zip(caps) {
        if q > QUAD_TOL {
            s = s.min(c / q);
        }
    }
    if s.is_infinite() {
        None
    } else {
        Some(s)
    }
}

#[derive(Clone, Debug)]
struct ContinuousResult {
    value: f64,
    w: DVector<C64>,
    error_bound: f64,
    status: OracleStatus,
}

fn continuous_scan(
    table: &[f64],
    m: usize,
    grid: &DirectionGrid,
    levels: &[f64],
    maximize: bool,
) -> ContinuousResult {
    let mut best: Option<(usize, f64)> = None;
    for d in 0..grid.len() {
        let quads = &table[d * m..(d + 1) * m];
        let scale = if maximize {
            match max_scale_sq(quads, levels) {
                Some(s) => s,
                None => {
                    return ContinuousResult {
                        value: f64::INFINITY,
                        w: grid.dirs[d].clone(),
                        error_bound: 0.0,
                        status: OracleStatus::Unbounded,
                    }
                }
            }
        } else {
            match min_scale_sq(quads, levels) {
                Some(s) => s,
                None => continue,
            }
        };
        let better = match best {
            None => true,
            Some((_, v)) => {
                if maximize {
                    scale > v
                } else {
                    scale < v
                }
            }
        };
        if better {
            best = Some((d, scale));
        }
    }
    let Some((d, value)) = best else {
        return ContinuousResult {
            value: f64::INFINITY,
            w: DVector::zeros(2),
            error_bound: 0.0,
            status: OracleStatus::Infeasible,
        };
    };
    // First-order discretization estimate from the neighbouring grid values.
    let mut error_bound = 0.0_f64;
    for nb in grid.neighbors(d) {
        let quads = &table[nb * m..(nb + 1) * m];
        let v = if maximize { max_scale_sq(quads, levels) } else { min_scale_sq(quads, levels) };
        if let Some(v) = v {
            error_bound = error_bound.max((v - value).abs());
        }
    }
    error_bound += 1e-12 * (1.0 + value.abs());
    let w = grid.dirs[d].map(|z| z * value.sqrt());
    ContinuousResult { value, w, error_bound, status: OracleStatus::Solved }
}

/// `min ‖w‖² s.t. wᴴH_i w ≥ target_i` at `N = 2` by grid scan.
pub fn exact_continuous_min(
    matrices: &[HermitianMatrix],
    targets: &[f64],
    field: Field,
    grid: &GridSpec,
) -> Result<OracleResult, OracleError> {
    continuous_single(matrices, targets, field, grid, false)
}

/// `max ‖w‖² s.t. wᴴH_i w ≤ cap_i` at `N = 2` by grid scan.
pub fn exact_continuous_max(
    matrices: &[HermitianMatrix],
    caps: &[f64],
    field: Field,
    grid: &GridSpec,
) -> Result<OracleResult, OracleError> {
    continuous_single(matrices, caps, field, grid, true)
}

fn continuous_single(
    matrices: &[HermitianMatrix],
    levels: &[f64],
    field: Field,
    grid: &GridSpec,
    maximize: bool,
) -> Result<OracleResult, OracleError> {
    let n = matrices.first().map_or(0, HermitianMatrix::dim);
    if n != 2 {
        return Err(OracleError::DimensionNotTwo { n });
    }
    assert_eq!(matrices.len(), levels.len());
    let dgrid = DirectionGrid::new(field, grid);
    let table = quad_table(matrices, &dgrid);
    let res = continuous_scan(&table, matrices.len(), &dgrid, levels, maximize);
    Ok(OracleResult {
        value: res.value,
        support: Vec::new(),
        w: res.w,
        grid: *grid,
        error_bound: res.error_bound,
        status: res.status,
    })
}

/// Global reference value: enumerate all supports, solve each restricted
/// continuous problem on the grid, and take the best.
///
/// Minimization: targets are 1 on the support and ε off it; the value is the
/// minimum over supports. Maximization: caps are ε on the support and 1 off
/// it; the value is the maximum, and any uncapped direction makes the whole
/// model unbounded.
pub fn oracle_value(instance: &Instance, grid: &GridSpec) -> Result<OracleResult, OracleError> {
    let n = instance.dim();
    if n != 2 {
        return Err(OracleError::DimensionNotTwo { n });
    }
    let m = instance.num_constraints();
    let supports = enumerate_supports(m, instance.cardinality)?;
    let dgrid = DirectionGrid::new(instance.field, grid);
    let table = quad_table(&instance.matrices, &dgrid);
    let maximize = instance.sense == ModelSense::Maximize;
    let eps = instance.epsilon;

    let mut best: Option<(ContinuousResult, Vec<usize>)> = None;
    let mut levels = vec![0.0; m];
    for support in &supports {
        for (i, level) in levels.iter_mut().enumerate() {
            let on = support.binary_search(&i).is_ok();
            *level = match (maximize, on) {
                (false, true) => 1.0,
                (false, false) => eps,
                (true, true) => eps,
                (true, false) => 1.0,
            };
        }
        let res = continuous_scan(&table, m, &dgrid, &levels, maximize);
        match res.status {
            OracleStatus::Unbounded => {
                return Ok(OracleResult {
                    value: f64::INFINITY,
                    support: support.clone(),
                    w: res.w,
                    grid: *grid,
                    error_bound: 0.0,
                    status: OracleStatus::Unbounded,
                })
            }
            OracleStatus::Infeasible => continue,
            OracleStatus::Solved => {}
        }
        let better = match &best {
            None => true,
            Some((b, _)) => {
                if maximize {
                    res.value > b.value
                } else {
                    res.value < b.value
                }
            }
        };
        if better {
            best = Some((res, support.clone()));
        }
    }

    match best {
        Some((res, support)) => Ok(OracleResult {
            value: res.value,
            support,
            w: res.w,
            grid: *grid,
            error_bound: res.error_bound,
            status: OracleStatus::Solved,
        }),
        None => Ok(OracleResult {
            value: f64::INFINITY,
            support: Vec::new(),
            w: DVector::zeros(2),
            grid: *grid,
            error_bound: 0.0,
            status: OracleStatus::Infeasible,
        }),
    }
}
