//! Center sweeps: flag exceptional centers on a grid, cluster them and fit
//! the affine planes they trace out.
//!
//! The fitted plane dimension is pinned to n - d - 1 rather than estimated
//! from the spectrum; the singular values are still reported per cluster so
//! a mismatch shows up as a diagnostic.

use crate::error::{Error, Result};
use crate::linalg::{self, sub};
use crate::manifold::{ChartAtlas, DomainBox};
use crate::measure::{self, MeasureEstimate};
use nalgebra::DMatrix;
use serde::Serialize;

/// An affine plane: base point plus an orthonormal spanning basis.
/// `basis` holds k rows of length n; k = 0 describes a single point.
#[derive(Debug, Clone, Serialize)]
pub struct AffinePlane {
    pub base: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub k: usize,
}

impl AffinePlane {
    pub fn new(base: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<AffinePlane> {
        let n = base.len();
        for row in &basis {
            if row.len() != n {
                return Err(Error::InvalidParametrization(
                    "plane basis vectors must match the ambient dimension".into(),
                ));
            }
        }
        let k = basis.len();
        for i in 0..k {
            for j in i..k {
                let expected = if i == j { 1.0 } else { 0.0 };
                let got = linalg::dot(&basis[i], &basis[j]);
                if (got - expected).abs() > 1e-10 {
                    return Err(Error::InvalidParametrization(format!(
                        "plane basis is not orthonormal: <b{i}, b{j}> = {got}"
                    )));
                }
            }
        }
        Ok(AffinePlane { base, basis, k })
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// Distance from `q` to the plane: the residual after removing the
    /// in-plane part of q - base.
    pub fn distance(&self, q: &[f64]) -> f64 {
        let mut rel = sub(q, &self.base);
        for row in &self.basis {
            let coefficient = linalg::dot(&rel, row);
            for (r, b) in rel.iter_mut().zip(row) {
                *r -= coefficient * b;
            }
        }
        linalg::norm(&rel)
    }

    /// The basis as an n x k matrix.
    pub fn frame(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        DMatrix::from_fn(n, self.k, |i, j| self.basis[j][i])
    }
}

/// Measure parameters shared by every per-center evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureParams {
    pub nodes_per_axis: usize,
    pub tau: f64,
    pub delta: f64,
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams {
            nodes_per_axis: 128,
            tau: crate::tangency::DEFAULT_TANGENCY_TOL,
            delta: measure::DEFAULT_EXCEPTIONAL_DELTA,
        }
    }
}

/// Result of a center sweep, optionally with clusters and fitted planes.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    /// Center grid in lexicographic order.
    pub centers: Vec<Vec<f64>>,
    /// One estimate per center; `None` where the estimate failed.
    pub measures: Vec<Option<MeasureEstimate>>,
    /// Indices into `centers` flagged exceptional.
    pub exceptional: Vec<usize>,
    /// Indices of centers whose measure errored (degenerate spheres etc).
    pub failed: Vec<usize>,
    /// Partition of `exceptional` (global center indices).
    pub clusters: Vec<Vec<usize>>,
    /// One fitted plane per cluster, dimension n - d - 1.
    pub planes: Vec<AffinePlane>,
    /// Max point-to-plane distance per cluster.
    pub fit_residuals: Vec<f64>,
    /// Singular values of each centered cluster, for spectrum diagnostics.
    pub cluster_spectra: Vec<Vec<f64>>,
    /// Containment of the exceptional candidates in the fitted planes.
    pub containment: Option<ContainmentReport>,
    pub grid_spacing: f64,
    pub linking_radius: f64,
}

/// Sweeps `is_exceptional` over an endpoint-inclusive center lattice.
/// Clusters and planes are left empty; see [`scan_and_fit`].
pub fn scan_centers(
    atlas: &ChartAtlas,
    center_box: &DomainBox,
    nodes_per_axis: usize,
    params: &MeasureParams,
) -> Result<ScanReport> {
    if nodes_per_axis < 4 {
        return Err(Error::Config(
            "center grid needs at least 4 nodes per axis".into(),
        ));
    }
    if center_box.dims() != atlas.ambient_dim() {
        return Err(Error::Config(format!(
            "scan box has {} axes but the ambient space has {}",
            center_box.dims(),
            atlas.ambient_dim()
        )));
    }
    let tables = measure::build_tables(atlas, params.nodes_per_axis)?;
    let centers = center_box.lattice(nodes_per_axis);
    let mut measures = Vec::with_capacity(centers.len());
    let mut exceptional = Vec::new();
    let mut failed = Vec::new();
    for (index, center) in centers.iter().enumerate() {
        match measure::nontransverse_measure_tables(&tables, center, params.tau) {
            Ok(estimate) => {
                if estimate.fraction > params.delta {
                    exceptional.push(index);
                }
                measures.push(Some(estimate));
            }
            Err(_) => {
                failed.push(index);
                measures.push(None);
            }
        }
    }
    if failed.len() as f64 > 0.01 * centers.len() as f64 {
        return Err(Error::NumericalFailure(format!(
            "{} of {} centers failed to evaluate",
            failed.len(),
            centers.len()
        )));
    }
    let spacing = center_box.lattice_spacing(nodes_per_axis);
    Ok(ScanReport {
        centers,
        measures,
        exceptional,
        failed,
        clusters: Vec::new(),
        planes: Vec::new(),
        fit_residuals: Vec::new(),
        cluster_spectra: Vec::new(),
        containment: None,
        grid_spacing: spacing,
        linking_radius: 1.5 * spacing,
    })
}

/// Single-linkage connected components: two points are linked when their
/// distance is at most `linking_radius`. Clusters are ordered by smallest
/// member index, members ascending.
pub fn cluster_candidates(points: &[Vec<f64>], linking_radius: f64) -> Result<Vec<Vec<usize>>> {
    if linking_radius <= 0.0 {
        return Err(Error::Config("linking radius must be positive".into()));
    }
    let m = points.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..m {
        for j in i + 1..m {
            if linalg::distance(&points[i], &points[j]) <= linking_radius {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut cluster_of_root = std::collections::HashMap::new();
    for i in 0..m {
        let r = root(&mut parent, i);
        let slot = *cluster_of_root.entry(r).or_insert_with(|| {
            clusters.push(Vec::new());
            clusters.len() - 1
        });
        clusters[slot].push(i);
    }
    Ok(clusters)
}

/// Least-squares affine k-plane through a cluster: base is the centroid,
/// the basis the top-k right singular directions of the centered points.
/// Returns the plane, the max point-to-plane distance, and the full
/// singular spectrum.
pub fn fit_affine_plane(
    cluster: &[Vec<f64>],
    k: usize,
) -> Result<(AffinePlane, f64, Vec<f64>)> {
    let m = cluster.len();
    if m < k + 1 {
        return Err(Error::DegenerateCluster {
            needed: k,
            achieved: m.saturating_sub(1),
        });
    }
    let n = cluster[0].len();
    let mut base = vec![0.0; n];
    for point in cluster {
        for (b, v) in base.iter_mut().zip(point) {
            *b += v;
        }
    }
    for b in base.iter_mut() {
        *b /= m as f64;
    }
    let centered = DMatrix::from_fn(m, n, |i, j| cluster[i][j] - base[j]);
    let svd = centered.svd(false, true);
    let spectrum: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = spectrum.first().copied().unwrap_or(0.0);
    let achieved = spectrum
        .iter()
        .filter(|s| **s > 1e-10 * sigma_max && **s > 1e-14)
        .count();
    if achieved < k {
        return Err(Error::DegenerateCluster {
            needed: k,
            achieved,
        });
    }
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let basis: Vec<Vec<f64>> = (0..k)
        .map(|row| (0..n).map(|col| v_t[(row, col)]).collect())
        .collect();
    let plane = AffinePlane::new(base, basis)?;
    let residual = cluster
        .iter()
        .map(|p| plane.distance(p))
        .fold(0.0, f64::max);
    Ok((plane, residual, spectrum))
}

/// Distances from candidates to their nearest plane; passes when all are
/// within `tol`. An empty candidate list passes vacuously.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub pass: bool,
    pub tolerance: f64,
    pub max_distance: f64,
    pub worst_index: Option<usize>,
    pub distances: Vec<f64>,
}

pub fn verify_containment(
    planes: &[AffinePlane],
    candidates: &[Vec<f64>],
    tol: f64,
) -> ContainmentReport {
    let mut distances = Vec::with_capacity(candidates.len());
    let mut max_distance = 0.0f64;
    let mut worst_index = None;
    for (i, candidate) in candidates.iter().enumerate() {
        let d = planes
            .iter()
            .map(|plane| plane.distance(candidate))
            .fold(f64::INFINITY, f64::min);
        let d = if d.is_finite() { d } else { f64::INFINITY };
        if d > max_distance {
            max_distance = d;
            worst_index = Some(i);
        }
        distances.push(d);
    }
    ContainmentReport {
        pass: candidates.is_empty() || max_distance <= tol,
        tolerance: tol,
        max_distance: if candidates.is_empty() { 0.0 } else { max_distance },
        worst_index,
        distances,
    }
}

/// Full pipeline: sweep, cluster, fit one (n-d-1)-plane per cluster and
/// check containment of the candidates in the fitted planes.
pub fn scan_and_fit(
    atlas: &ChartAtlas,
    center_box: &DomainBox,
    nodes_per_axis: usize,
    params: &MeasureParams,
    linking_radius: Option<f64>,
) -> Result<ScanReport> {
    let mut report = scan_centers(atlas, center_box, nodes_per_axis, params)?;
    if let Some(radius) = linking_radius {
        report.linking_radius = radius;
    }
    let candidates: Vec<Vec<f64>> = report
        .exceptional
        .iter()
        .map(|&i| report.centers[i].clone())
        .collect();
    let local_clusters = cluster_candidates(&candidates, report.linking_radius)?;
    let k = atlas.ambient_dim() - atlas.intrinsic_dim() - 1;
    for local in &local_clusters {
        let points: Vec<Vec<f64>> = local.iter().map(|&i| candidates[i].clone()).collect();
        let (plane, residual, spectrum) = fit_affine_plane(&points, k)?;
        report.planes.push(plane);
        report.fit_residuals.push(residual);
        report.cluster_spectra.push(spectrum);
        report
            .clusters
            .push(local.iter().map(|&i| report.exceptional[i]).collect());
    }
    report.containment = Some(verify_containment(
        &report.planes,
        &candidates,
        1.5 * report.grid_spacing,
    ));
    Ok(report)
}
