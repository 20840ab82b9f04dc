//! Tangency residual, transversality tests and critical-point refinement.
//!
//! The sphere through p = Phi(x) centered at a fails transversality exactly
//! when p - a is orthogonal to the tangent space, i.e. when the residual
//! g(x) = J^T (Phi(x) - a) vanishes. `is_sphere_transverse` thresholds that
//! residual; `rank_oracle` re-decides the same question through the rank of
//! [J | tangent basis of the sphere] and exists purely to cross-check the
//! residual path.

use crate::error::{Error, Result};
use crate::linalg::{self, norm, sub};
use crate::manifold::Parametrization;
use nalgebra::DMatrix;
use serde::Serialize;

/// Default relative tolerance for the tangency indicator.
pub const DEFAULT_TANGENCY_TOL: f64 = 1e-7;
/// Default relative tolerance for Newton convergence.
pub const DEFAULT_NEWTON_TOL: f64 = 1e-9;
/// Default Newton iteration cap.
pub const DEFAULT_MAX_ITER: usize = 50;
/// Additive floor keeping relative scales positive.
pub const MACHINE_FLOOR: f64 = 1e-300;
/// Parameter-space (and ambient) deduplication radius for critical points.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Relative threshold under which a sphere center sits on the surface point.
pub const DEGENERATE_REL: f64 = 1e-14;
/// Relative singular-value cutoff for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-8;

/// g = J^T (p - a) together with the scale used for relative thresholding.
#[derive(Debug, Clone)]
pub struct TangencyResidual {
    pub g: Vec<f64>,
    /// ||p - a|| * max_j ||dPhi/dx_j|| plus a tiny floor; g is bilinear in
    /// these magnitudes, so thresholds are taken relative to this.
    pub scale: f64,
}

impl TangencyResidual {
    pub fn norm(&self) -> f64 {
        norm(&self.g)
    }
}

/// Residual from an already evaluated point and Jacobian.
///
/// Every tangency indicator in the crate funnels through this function so
/// that grid tables and direct evaluation agree bit for bit.
pub fn residual_from_parts(p: &[f64], jac: &DMatrix<f64>, a: &[f64]) -> TangencyResidual {
    let d = jac.ncols();
    let r = sub(p, a);
    let mut g = Vec::with_capacity(d);
    let mut max_col = 0.0f64;
    for j in 0..d {
        let col = jac.column(j);
        let mut acc = 0.0;
        let mut col_sq = 0.0;
        for i in 0..r.len() {
            acc += r[i] * col[i];
            col_sq += col[i] * col[i];
        }
        g.push(acc);
        max_col = max_col.max(col_sq.sqrt());
    }
    TangencyResidual {
        g,
        scale: norm(&r) * max_col + MACHINE_FLOOR,
    }
}

/// Tangency residual of the chart at parameter `x` for sphere center `a`.
pub fn residual(chart: &Parametrization, a: &[f64], x: &[f64]) -> Result<TangencyResidual> {
    let (p, jac) = chart.eval_with_jacobian(x)?;
    Ok(residual_from_parts(&p, &jac, a))
}

pub fn is_degenerate_sphere(p: &[f64], a: &[f64]) -> bool {
    linalg::distance(p, a) <= DEGENERATE_REL * (1.0 + norm(a))
}

/// True when the distance sphere centered at `a` through Phi(x) crosses the
/// manifold transversally there: the residual is nonzero relative to scale.
pub fn is_sphere_transverse(
    chart: &Parametrization,
    a: &[f64],
    x: &[f64],
    tau: f64,
) -> Result<bool> {
    let (p, jac) = chart.eval_with_jacobian(x)?;
    if is_degenerate_sphere(&p, a) {
        return Err(Error::DegenerateSphere);
    }
    let res = residual_from_parts(&p, &jac, a);
    Ok(res.norm() > tau * res.scale)
}

/// Rank-based transversality decision, independent of the residual path.
///
/// Builds an orthonormal basis of the sphere's tangent space (p - a)^perp,
/// stacks it next to the chart Jacobian and asks whether the combined
/// columns span all of R^n.
pub fn rank_oracle(chart: &Parametrization, a: &[f64], x: &[f64]) -> Result<bool> {
    let (p, jac) = chart.eval_with_jacobian(x)?;
    if is_degenerate_sphere(&p, a) {
        return Err(Error::DegenerateSphere);
    }
    let n = chart.ambient_dim();
    let d = chart.intrinsic_dim();
    let r = sub(&p, a);
    let r_norm = norm(&r);
    let radial = DMatrix::from_iterator(n, 1, r.iter().map(|v| v / r_norm));
    let sphere_tangent = linalg::orthonormal_complement(&radial);
    let mut stacked = DMatrix::zeros(n, d + n - 1);
    stacked.view_mut((0, 0), (n, d)).copy_from(&jac);
    stacked
        .view_mut((0, d), (n, n - 1))
        .copy_from(&sphere_tangent);
    Ok(linalg::rank(&stacked, RANK_REL_TOL) == n)
}

/// A refined zero of the tangency residual.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    /// Parameter-space location.
    pub x: Vec<f64>,
    /// Ambient point Phi(x).
    pub p: Vec<f64>,
    /// ||g|| at x.
    pub residual_norm: f64,
    /// Whether ||g|| <= tol * scale was reached inside the domain.
    pub converged: bool,
}

/// Damped Newton iteration on g(x) = 0 from `seed`.
///
/// The d x d derivative of g is taken by central finite differences of the
/// dual-valued residual (step 1e-6 * (1 + ||x||)); one order of exactness is
/// enough for a locally quadratic solve. Steps that leave the domain or fail
/// to shrink ||g|| are halved; a singular Newton system ends the iteration
/// as non-converged rather than as an error.
pub fn newton_refine(
    chart: &Parametrization,
    a: &[f64],
    seed: &[f64],
    max_iter: usize,
    newton_tol: f64,
) -> Result<CriticalPoint> {
    let domain = chart.domain().clone();
    if !domain.contains(seed) {
        return Err(Error::OutOfDomain {
            point: seed.to_vec(),
        });
    }
    let d = chart.intrinsic_dim();
    let mut x = seed.to_vec();
    let mut res = residual(chart, a, &x)?;
    let mut converged = res.norm() <= newton_tol * res.scale;
    if !converged {
        'outer: for _ in 0..max_iter {
            let gn = res.norm();
            let jac_g = match fd_residual_jacobian(chart, a, &x) {
                Ok(j) => j,
                Err(_) => break 'outer,
            };
            let rhs: Vec<f64> = res.g.iter().map(|v| -v).collect();
            let Some(step) = linalg::solve(&jac_g, &rhs) else {
                break 'outer; // singular system: report non-convergence
            };
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..45 {
                let trial: Vec<f64> =
                    x.iter().zip(&step).map(|(v, s)| v + lambda * s).collect();
                if !domain.contains(&trial) {
                    lambda *= 0.5;
                    continue;
                }
                match residual(chart, a, &trial) {
                    Ok(trial_res) if trial_res.norm() < gn => {
                        x = trial;
                        res = trial_res;
                        accepted = true;
                        break;
                    }
                    _ => lambda *= 0.5,
                }
            }
            if !accepted {
                break 'outer;
            }
            if res.norm() <= newton_tol * res.scale {
                converged = true;
                break 'outer;
            }
        }
    }
    debug_assert_eq!(x.len(), d);
    Ok(CriticalPoint {
        p: chart.evaluate(&x)?,
        residual_norm: res.norm(),
        converged,
        x,
    })
}

fn fd_residual_jacobian(
    chart: &Parametrization,
    a: &[f64],
    x: &[f64],
) -> Result<DMatrix<f64>> {
    let d = chart.intrinsic_dim();
    let domain = chart.domain();
    let h = 1e-6 * (1.0 + norm(x));
    let mut jac = DMatrix::zeros(d, d);
    for k in 0..d {
        let mut forward = x.to_vec();
        let mut backward = x.to_vec();
        forward[k] = (x[k] + h).min(domain.hi()[k]);
        backward[k] = (x[k] - h).max(domain.lo()[k]);
        let spread = forward[k] - backward[k];
        if spread <= 0.0 {
            return Err(Error::NumericalFailure(
                "domain too thin for finite differences".into(),
            ));
        }
        let gf = residual(chart, a, &forward)?;
        let gb = residual(chart, a, &backward)?;
        for j in 0..d {
            jac[(j, k)] = (gf.g[j] - gb.g[j]) / spread;
        }
    }
    Ok(jac)
}

/// Newton refinement from every node of a midpoint seed grid, deduplicated.
///
/// Converged points are merged when they are within [`DEDUP_RADIUS`] of each
/// other in parameter space or in ambient space (the latter folds together
/// the two ends of a periodic chart such as a closed circle, where the seam
/// parameters 0 and 2*pi name the same geometric point). Ties keep the point
/// with the smaller residual. The result is sorted lexicographically by x.
pub fn find_critical_points(
    chart: &Parametrization,
    a: &[f64],
    grid_per_axis: usize,
    newton_tol: f64,
) -> Result<Vec<CriticalPoint>> {
    if grid_per_axis < 2 {
        return Err(Error::NumericalFailure(
            "critical-point search needs at least 2 seeds per axis".into(),
        ));
    }
    let mut converged = Vec::new();
    for seed in chart.domain().midpoint_grid(grid_per_axis) {
        let point = newton_refine(chart, a, &seed, DEFAULT_MAX_ITER, newton_tol)?;
        if point.converged {
            converged.push(point);
        }
    }
    converged.sort_by(|p, q| lex_cmp(&p.x, &q.x));

    // single-linkage merge of coincident solutions
    let m = converged.len();
    let mut cluster = (0..m).collect::<Vec<usize>>();
    fn root(cluster: &mut Vec<usize>, mut i: usize) -> usize {
        while cluster[i] != i {
            cluster[i] = cluster[cluster[i]];
            i = cluster[i];
        }
        i
    }
    for i in 0..m {
        for j in i + 1..m {
            let close_in_parameters =
                linalg::distance(&converged[i].x, &converged[j].x) <= DEDUP_RADIUS;
            let close_in_ambient =
                linalg::distance(&converged[i].p, &converged[j].p) <= DEDUP_RADIUS;
            if close_in_parameters || close_in_ambient {
                let (ri, rj) = (root(&mut cluster, i), root(&mut cluster, j));
                if ri != rj {
                    cluster[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut best: Vec<Option<usize>> = vec![None; m];
    for i in 0..m {
        let r = root(&mut cluster, i);
        match best[r] {
            Some(b) if converged[b].residual_norm <= converged[i].residual_norm => {}
            _ => best[r] = Some(i),
        }
    }
    let mut result: Vec<CriticalPoint> = best
        .into_iter()
        .flatten()
        .map(|i| converged[i].clone())
        .collect();
    result.sort_by(|p, q| lex_cmp(&p.x, &q.x));
    Ok(result)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(order) => return order,
        }
    }
    std::cmp::Ordering::Equal
}
