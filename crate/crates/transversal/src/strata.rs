//! The stratification machinery: Grassmannian planes, normal affine planes,
//! the exceptional parameter sets E(a, P) and finite-instance diagnostics
//! for their emptiness, disjointness and intersection laws.
//!
//! A parameter x belongs to E(a, P) when the whole tangent space at Phi(x)
//! lies inside P and the tangency residual vanishes. Countability statements
//! about these sets are proof content, not artifact content; what is
//! implemented here are their testable kernels on finite grids.

use crate::error::{Error, Result};
use crate::linalg::{self, norm, sub};
use crate::manifold::ChartAtlas;
use crate::measure::{self, ChartTable, MeasureEstimate, NodeSample};
use crate::scan::AffinePlane;
use crate::tangency::{is_degenerate_sphere, residual_from_parts};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Relative threshold for the exact perpendicularity dichotomy.
pub const PERPENDICULARITY_TOL: f64 = 1e-10;

/// An i-dimensional linear subspace of R^n held as an orthonormal frame.
#[derive(Debug, Clone)]
pub struct GrassmannPlane {
    frame: DMatrix<f64>,
}

impl GrassmannPlane {
    pub fn new(frame: DMatrix<f64>) -> Result<GrassmannPlane> {
        let product = frame.transpose() * &frame;
        let i = frame.ncols();
        for r in 0..i {
            for c in 0..i {
                let expected = if r == c { 1.0 } else { 0.0 };
                if (product[(r, c)] - expected).abs() > 1e-10 {
                    return Err(Error::InvalidParametrization(
                        "Grassmann frame is not orthonormal".into(),
                    ));
                }
            }
        }
        Ok(GrassmannPlane { frame })
    }

    /// Standard coordinate plane spanned by the given axes (zero-based).
    pub fn coordinate(n: usize, axes: &[usize]) -> GrassmannPlane {
        let mut frame = DMatrix::zeros(n, axes.len());
        for (j, &axis) in axes.iter().enumerate() {
            frame[(axis, j)] = 1.0;
        }
        GrassmannPlane { frame }
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// The same subspace under a different orthonormal frame: F * R for an
    /// orthogonal i x i matrix R.
    pub fn reframed(&self, rotation: &DMatrix<f64>) -> Result<GrassmannPlane> {
        GrassmannPlane::new(&self.frame * rotation)
    }
}

/// Rotation-invariant random i-plane: orthonormalized Gaussian frame.
/// Deterministic for a fixed seed. Redraws on rank deficiency and gives up
/// after 10 attempts.
pub fn random_grassmann(n: usize, i: usize, seed: u64) -> Result<GrassmannPlane> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_grassmann_with(&mut rng, n, i)
}

/// As [`random_grassmann`] but drawing from a caller-owned generator.
pub fn random_grassmann_with(rng: &mut ChaCha8Rng, n: usize, i: usize) -> Result<GrassmannPlane> {
    if i < 1 || i > n {
        return Err(Error::Config(format!(
            "Grassmann dimension {i} out of range 1..={n}"
        )));
    }
    for _ in 0..10 {
        let gaussian = DMatrix::from_fn(n, i, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = gaussian.clone().qr();
        let r = qr.r();
        let diag_min = (0..i).map(|j| r[(j, j)].abs()).fold(f64::INFINITY, f64::min);
        let diag_max = (0..i).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
        if diag_min > 1e-10 * diag_max.max(1e-300) {
            return GrassmannPlane::new(qr.q());
        }
    }
    Err(Error::NumericalFailure(
        "could not draw a full-rank Gaussian frame in 10 attempts".into(),
    ))
}

/// N(a, P): the unique (n-i)-dimensional affine plane through `a` orthogonal
/// to P. For i = n this is the single point `a`.
pub fn normal_affine_plane(a: &[f64], p: &GrassmannPlane) -> Result<AffinePlane> {
    let complement = linalg::orthonormal_complement(p.frame());
    let basis: Vec<Vec<f64>> = (0..complement.ncols())
        .map(|j| complement.column(j).iter().copied().collect())
        .collect();
    AffinePlane::new(a.to_vec(), basis)
}

/// Node membership in E(a, P): tangent span inside P and residual zero,
/// both relative to `tau`. `None` skips degenerate nodes.
fn e_indicator(sample: &NodeSample, a: &[f64], p: &GrassmannPlane, tau: f64) -> Option<bool> {
    if is_degenerate_sphere(&sample.p, a) {
        return None;
    }
    let jac_norm = sample.jac.iter().map(|v| v * v).sum::<f64>().sqrt();
    let defect = linalg::projection_defect(p.frame(), &sample.jac);
    if defect > tau * jac_norm {
        return Some(false);
    }
    let res = residual_from_parts(&sample.p, &sample.jac, a);
    Some(res.norm() <= tau * res.scale)
}

/// Indicator-quadrature measure of E(a, P) over prepared tables.
pub fn exceptional_param_set_tables(
    tables: &[ChartTable],
    a: &[f64],
    p: &GrassmannPlane,
    tau: f64,
) -> Result<MeasureEstimate> {
    measure::indicator_measure(tables, tau, |sample| e_indicator(sample, a, p, tau))
}

/// Indicator-quadrature measure of E(a, P) for an atlas.
pub fn exceptional_param_set(
    atlas: &ChartAtlas,
    a: &[f64],
    p: &GrassmannPlane,
    nodes_per_axis: usize,
    tau: f64,
) -> Result<MeasureEstimate> {
    let tables = measure::build_tables(atlas, nodes_per_axis)?;
    exceptional_param_set_tables(&tables, a, p, tau)
}

/// A sampled point of the stratification: a center, a Grassmann plane and
/// the measured E(a, P).
#[derive(Debug, Clone)]
pub struct StratumSample {
    pub a: Vec<f64>,
    pub plane: GrassmannPlane,
    pub e_measure: MeasureEstimate,
}

impl StratumSample {
    pub fn evaluate(
        tables: &[ChartTable],
        a: Vec<f64>,
        plane: GrassmannPlane,
        tau: f64,
    ) -> Result<StratumSample> {
        let e_measure = exceptional_param_set_tables(tables, &a, &plane, tau)?;
        Ok(StratumSample { a, plane, e_measure })
    }
}

/// Measure of E(a, P) intersected with E(a', P'): the essential-disjointness
/// diagnostic behind the countability arguments.
pub fn pairwise_e_overlap_tables(
    tables: &[ChartTable],
    first: &StratumSample,
    second: &StratumSample,
    tau: f64,
) -> Result<MeasureEstimate> {
    measure::indicator_measure(tables, tau, |sample| {
        let a = e_indicator(sample, &first.a, &first.plane, tau)?;
        let b = e_indicator(sample, &second.a, &second.plane, tau)?;
        Some(a && b)
    })
}

pub fn pairwise_e_overlap(
    atlas: &ChartAtlas,
    first: &StratumSample,
    second: &StratumSample,
    nodes_per_axis: usize,
    tau: f64,
) -> Result<MeasureEstimate> {
    let tables = measure::build_tables(atlas, nodes_per_axis)?;
    pairwise_e_overlap_tables(&tables, first, second, tau)
}

/// Exact intersection dichotomy of two normal planes N(a, P), N(a_hat, P):
/// equal when the segment a -> a_hat is perpendicular to P, empty otherwise.
/// Pure linear algebra, no sampling; depends on P only through F F^T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlaneIntersection {
    Equal,
    Empty,
}

pub fn intersect_normal_planes(
    a: &[f64],
    a_hat: &[f64],
    p: &GrassmannPlane,
) -> Result<PlaneIntersection> {
    let difference = sub(a, a_hat);
    let separation = norm(&difference);
    if separation == 0.0 {
        return Err(Error::Config(
            "normal-plane intersection needs two distinct base points".into(),
        ));
    }
    let projected = p.frame().transpose() * DMatrix::from_column_slice(difference.len(), 1, &difference);
    let inside = projected.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(if inside <= PERPENDICULARITY_TOL * separation {
        PlaneIntersection::Equal
    } else {
        PlaneIntersection::Empty
    })
}

/// One violating trial of the low-stratum emptiness diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct Claim1Violation {
    pub grassmann_dim: usize,
    pub trial: usize,
    pub center: Vec<f64>,
    pub hit_nodes: usize,
}

/// Report of the low-stratum diagnostic: for every i <= d, random (a, P)
/// pairs must produce an empty E(a, P) on an immersed chart.
#[derive(Debug, Clone, Serialize)]
pub struct Claim1Report {
    pub trials_per_dim: usize,
    pub dims_checked: Vec<usize>,
    pub sample_box_lo: Vec<f64>,
    pub sample_box_hi: Vec<f64>,
    pub checked: usize,
    pub violations: Vec<Claim1Violation>,
}

impl Claim1Report {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Draws `trials` random centers (uniform in a stated box) and random
/// i-planes for every i in 1..=d and measures E(a, P). On an immersed
/// chart the tangent space has full dimension d, so it cannot fit inside
/// any plane of dimension at most d in general position: every estimate
/// must come back with zero hit nodes.
pub fn claim1_diagnostic(
    atlas: &ChartAtlas,
    tables: &[ChartTable],
    trials: usize,
    seed: u64,
    tau: f64,
) -> Result<Claim1Report> {
    use rand::SeedableRng;
    if trials < 1 {
        return Err(Error::Config("claim1 diagnostic needs trials >= 1".into()));
    }
    let n = atlas.ambient_dim();
    let d = atlas.intrinsic_dim();
    let (lo, hi) = sample_box(tables, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut checked = 0;
    for i in 1..=d {
        for trial in 0..trials {
            let center: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| rng.gen_range(*l..*h))
                .collect();
            let plane = random_grassmann_with(&mut rng, n, i)?;
            let estimate = exceptional_param_set_tables(tables, &center, &plane, tau)?;
            checked += 1;
            if estimate.nodes_hit > 0 {
                violations.push(Claim1Violation {
                    grassmann_dim: i,
                    trial,
                    center,
                    hit_nodes: estimate.nodes_hit,
                });
            }
        }
    }
    Ok(Claim1Report {
        trials_per_dim: trials,
        dims_checked: (1..=d).collect(),
        sample_box_lo: lo,
        sample_box_hi: hi,
        checked,
        violations,
    })
}

/// Outcome of the randomized normal-plane dichotomy battery.
#[derive(Debug, Clone, Serialize)]
pub struct DichotomyBattery {
    pub cases: usize,
    pub correct: usize,
    pub reframed: usize,
    pub reframe_consistent: usize,
}

impl DichotomyBattery {
    pub fn pass(&self) -> bool {
        self.correct == self.cases && self.reframe_consistent == self.reframed
    }
}

/// Randomized stress test of [`intersect_normal_planes`]: half the instances
/// displace the second base point inside the orthogonal complement of P
/// (expected Equal), half add an in-plane component (expected Empty); a
/// further batch re-frames P by a random rotation and demands the same
/// decision. Deterministic per seed.
pub fn dichotomy_battery(
    n: usize,
    cases: usize,
    reframed: usize,
    seed: u64,
) -> Result<DichotomyBattery> {
    use rand::SeedableRng;
    if n < 2 {
        return Err(Error::Config("dichotomy battery needs n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut correct = 0;
    let mut checked = 0;
    let mut consistent = 0;
    let instance = |rng: &mut ChaCha8Rng, want_equal: bool| -> Result<(Vec<f64>, Vec<f64>, GrassmannPlane, PlaneIntersection)> {
        loop {
            let i = 1 + rng.gen_range(0..n - 1); // keep a nonempty complement
            let p = random_grassmann_with(rng, n, i)?;
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = p.frame();
            let coefficients = f.transpose() * DMatrix::from_column_slice(n, 1, &w);
            let inside = f * coefficients;
            let perpendicular: Vec<f64> =
                w.iter().zip(inside.iter()).map(|(x, y)| x - y).collect();
            if norm(&perpendicular) < 1e-3 {
                continue; // unusable draw; take a fresh one
            }
            if want_equal {
                let a_hat: Vec<f64> =
                    a.iter().zip(&perpendicular).map(|(x, y)| x + y).collect();
                return Ok((a, a_hat, p, PlaneIntersection::Equal));
            }
            let v: Vec<f64> = (0..i).map(|_| rng.gen_range(0.2..1.0)).collect();
            let in_plane = f * DMatrix::from_column_slice(i, 1, &v);
            let a_hat: Vec<f64> = a
                .iter()
                .zip(in_plane.iter())
                .zip(&perpendicular)
                .map(|((x, y), z)| x + y + 0.1 * z)
                .collect();
            return Ok((a, a_hat, p, PlaneIntersection::Empty));
        }
    };
    for case in 0..cases {
        let (a, a_hat, p, expected) = instance(&mut rng, case % 2 == 0)?;
        checked += 1;
        if intersect_normal_planes(&a, &a_hat, &p)? == expected {
            correct += 1;
        }
    }
    let mut reframe_done = 0;
    for case in 0..reframed {
        let (a, a_hat, p, _) = instance(&mut rng, case % 2 == 0)?;
        let i = p.dim();
        let rotation = if i == 1 {
            DMatrix::from_element(1, 1, -1.0)
        } else {
            random_grassmann_with(&mut rng, i, i)?.frame().clone()
        };
        let q = p.reframed(&rotation)?;
        reframe_done += 1;
        if intersect_normal_planes(&a, &a_hat, &p)? == intersect_normal_planes(&a, &a_hat, &q)? {
            consistent += 1;
        }
    }
    Ok(DichotomyBattery {
        cases: checked,
        correct,
        reframed: reframe_done,
        reframe_consistent: consistent,
    })
}

/// Ambient bounding box of the sampled manifold, inflated on every side.
pub fn sample_box(tables: &[ChartTable], inflate: f64) -> (Vec<f64>, Vec<f64>) {
    let n = tables
        .iter()
        .flat_map(|t| t.samples().first())
        .map(|s| s.p.len())
        .next()
        .unwrap_or(0);
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for table in tables {
        for sample in table.samples() {
            for j in 0..n {
                lo[j] = lo[j].min(sample.p[j]);
                hi[j] = hi[j].max(sample.p[j]);
            }
        }
    }
    for j in 0..n {
        lo[j] -= inflate;
        hi[j] += inflate;
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{DomainBox, Parametrization};
    use crate::measure::build_tables;
    use crate::tangency::DEFAULT_TANGENCY_TOL;
    use crate::testing::{circle_atlas, two_circle_atlas};
    use rand::SeedableRng;
    use std::f64::consts::PI;

    const TAU: f64 = DEFAULT_TANGENCY_TOL;

    #[test]
    fn random_frames_are_orthonormal() {
        for draw in 0..1000u64 {
            let i = 1 + (draw as usize % 4);
            let plane = random_grassmann(4, i, draw).unwrap();
            let product = plane.frame().transpose() * plane.frame();
            for r in 0..i {
                for c in 0..i {
                    let expected = if r == c { 1.0 } else { 0.0 };
                    assert!(
                        (product[(r, c)] - expected).abs() <= 1e-10,
                        "draw {draw}: gram {product}"
                    );
                }
            }
        }
    }

    #[test]
    fn full_and_line_grassmannians() {
        let full = random_grassmann(3, 3, 0).unwrap();
        assert_eq!(full.dim(), 3);
        // full frame is orthogonal: complement is empty
        assert_eq!(linalg::orthonormal_complement(full.frame()).ncols(), 0);

        let line = random_grassmann(3, 1, 1).unwrap();
        let v: Vec<f64> = line.frame().column(0).iter().copied().collect();
        assert!((norm(&v) - 1.0).abs() < 1e-12);

        assert!(random_grassmann(3, 0, 0).is_err());
        assert!(random_grassmann(3, 4, 0).is_err());
    }

    #[test]
    fn normal_plane_of_the_xy_plane_is_the_z_axis() {
        let p = GrassmannPlane::coordinate(3, &[0, 1]);
        let plane = normal_affine_plane(&[0.0, 0.0, 0.0], &p).unwrap();
        assert_eq!(plane.k, 1);
        assert!(plane.basis[0][2].abs() > 1.0 - 1e-12);
        // the z-axis point (0,0,0.7) lies on it
        assert!(plane.distance(&[0.0, 0.0, 0.7]) < 1e-12);
    }

    #[test]
    fn normal_plane_of_the_full_space_is_a_point() {
        let p = GrassmannPlane::coordinate(3, &[0, 1, 2]);
        let plane = normal_affine_plane(&[0.3, -0.1, 0.2], &p).unwrap();
        assert_eq!(plane.k, 0);
        assert!((plane.distance(&[0.3, -0.1, 0.2])) < 1e-15);
        assert!((plane.distance(&[1.3, -0.1, 0.2]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_plane_basis_is_orthogonal_to_the_frame() {
        for seed in 0..200u64 {
            let i = 1 + (seed as usize % 3);
            let p = random_grassmann(4, i, seed).unwrap();
            let plane = normal_affine_plane(&[0.1, 0.2, 0.3, 0.4], &p).unwrap();
            assert_eq!(plane.k, 4 - i);
            for b in &plane.basis {
                for col in 0..i {
                    let f: Vec<f64> = p.frame().column(col).iter().copied().collect();
                    assert!(linalg::dot(b, &f).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn e_set_full_measure_for_axis_center_and_tangent_plane() {
        let atlas = circle_atlas();
        let tables = build_tables(&atlas, 256).unwrap();
        let p = GrassmannPlane::coordinate(3, &[0, 1]);
        let estimate =
            exceptional_param_set_tables(&tables, &[0.0, 0.0, 1.0], &p, TAU).unwrap();
        let half_pi = PI / 2.0;
        assert!((estimate.value - half_pi).abs() / half_pi < 0.01);
    }

    #[test]
    fn e_set_vanishes_when_tangents_leave_the_plane() {
        let atlas = circle_atlas();
        let tables = build_tables(&atlas, 128).unwrap();
        let p = GrassmannPlane::coordinate(3, &[2]);
        for a in [[0.0, 0.0, 1.0], [0.5, 0.0, 0.0], [0.2, -0.4, 0.3]] {
            let estimate = exceptional_param_set_tables(&tables, &a, &p, TAU).unwrap();
            assert_eq!(estimate.nodes_hit, 0);
        }
    }

    #[test]
    fn full_grassmannian_reduces_to_nontransverse_measure() {
        let atlas = circle_atlas();
        let tables = build_tables(&atlas, 128).unwrap();
        let p = random_grassmann(3, 3, 17).unwrap();
        for a in [[0.0, 0.0, 0.8], [0.4, 0.1, -0.2], [2.0, 0.0, 0.0]] {
            let through_e = exceptional_param_set_tables(&tables, &a, &p, TAU).unwrap();
            let direct = measure::nontransverse_measure_tables(&tables, &a, TAU).unwrap();
            assert_eq!(through_e.value.to_bits(), direct.value.to_bits());
            assert_eq!(through_e.nodes_hit, direct.nodes_hit);
            assert_eq!(through_e.total.to_bits(), direct.total.to_bits());
        }
    }

    #[test]
    fn claim1_holds_on_the_circle() {
        let atlas = circle_atlas();
        let tables = build_tables(&atlas, 128).unwrap();
        let report = claim1_diagnostic(&atlas, &tables, 100, 0, TAU).unwrap();
        assert!(report.pass(), "violations: {:?}", report.violations);
        assert_eq!(report.checked, 100);
    }

    #[test]
    fn claim1_holds_on_a_surface_graph() {
        let domain = DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let chart = Parametrization::from_texts(
            2,
            4,
            &[
                "x1".to_string(),
                "x2".to_string(),
                "x1*x2".to_string(),
                "0".to_string(),
            ],
            domain,
        )
        .unwrap();
        let atlas = ChartAtlas::new(vec![chart]).unwrap();
        let tables = build_tables(&atlas, 24).unwrap();
        let report = claim1_diagnostic(&atlas, &tables, 50, 3, TAU).unwrap();
        assert!(report.pass(), "violations: {:?}", report.violations);
        assert_eq!(report.checked, 100); // i in {1, 2}
    }

    #[test]
    fn claim1_negative_control_with_rank_deficient_chart() {
        // constant chart: the Jacobian vanishes identically, rank 0 < d
        let domain = DomainBox::new(vec![0.0], vec![1.0]).unwrap();
        let chart = Parametrization::from_texts(
            1,
            3,
            &["1".to_string(), "2".to_string(), "0".to_string()],
            domain,
        )
        .unwrap();
        let atlas = ChartAtlas::new(vec![chart]).unwrap();
        let tables = build_tables(&atlas, 16).unwrap();
        let report = claim1_diagnostic(&atlas, &tables, 20, 5, TAU).unwrap();
        assert!(!report.pass(), "rank-deficient chart must violate the diagnostic");
    }

    #[test]
    fn normal_plane_dichotomy_examples() {
        let p = GrassmannPlane::coordinate(3, &[0, 1]);
        assert_eq!(
            intersect_normal_planes(&[0.0; 3], &[0.0, 0.0, 1.0], &p).unwrap(),
            PlaneIntersection::Equal
        );
        assert_eq!(
            intersect_normal_planes(&[0.0; 3], &[1.0, 0.0, 0.0], &p).unwrap(),
            PlaneIntersection::Empty
        );
        assert!(intersect_normal_planes(&[0.0; 3], &[0.0; 3], &p).is_err());
    }

    #[test]
    fn normal_plane_dichotomy_on_constructed_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for case in 0..500 {
            let n = 4;
            let i = 1 + case % 3; // keep a nonempty complement
            let p = random_grassmann_with(&mut rng, n, i).unwrap();
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

            // perpendicular construction: displace inside the complement
            let f = p.frame();
            let coeff = f.transpose() * DMatrix::from_column_slice(n, 1, &w);
            let inside = f * coeff;
            let perp: Vec<f64> = w.iter().zip(inside.iter()).map(|(x, y)| x - y).collect();
            if norm(&perp) > 1e-6 {
                let a_hat: Vec<f64> = a.iter().zip(&perp).map(|(x, y)| x + y).collect();
                assert_eq!(
                    intersect_normal_planes(&a, &a_hat, &p).unwrap(),
                    PlaneIntersection::Equal,
                    "case {case}"
                );
                // symmetry in the two base points
                assert_eq!(
                    intersect_normal_planes(&a_hat, &a, &p).unwrap(),
                    PlaneIntersection::Equal
                );
            }

            // oblique construction: displace with an in-plane component
            let v: Vec<f64> = (0..i).map(|_| rng.gen_range(0.2..1.0)).collect();
            let in_plane = f * DMatrix::from_column_slice(i, 1, &v);
            let a_hat: Vec<f64> = a
                .iter()
                .zip(in_plane.iter())
                .zip(&perp)
                .map(|((x, y), z)| x + y + 0.1 * z)
                .collect();
            assert_eq!(
                intersect_normal_planes(&a, &a_hat, &p).unwrap(),
                PlaneIntersection::Empty,
                "case {case}"
            );
        }
    }

    #[test]
    fn dichotomy_is_frame_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200 {
            let p = random_grassmann_with(&mut rng, 4, 2).unwrap();
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let rotation = DMatrix::from_row_slice(
                2,
                2,
                &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()],
            );
            let q = p.reframed(&rotation).unwrap();
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a_hat: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let left = intersect_normal_planes(&a, &a_hat, &p).unwrap();
            let right = intersect_normal_planes(&a, &a_hat, &q).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn overlap_of_the_same_meridian_family_is_full() {
        let atlas = circle_atlas();
        let tables = build_tables(&atlas, 128).unwrap();
        let p = GrassmannPlane::coordinate(3, &[0, 1]);
        let s1 = StratumSample::evaluate(&tables, vec![0.0, 0.0, 1.0], p.clone(), TAU).unwrap();
        let s2 = StratumSample::evaluate(&tables, vec![0.0, 0.0, 2.0], p, TAU).unwrap();
        let overlap = pairwise_e_overlap_tables(&tables, &s1, &s2, TAU).unwrap();
        assert!(overlap.fraction > 0.99, "fraction {}", overlap.fraction);
        // consistent with the dichotomy: both centers share one normal plane
        assert_eq!(
            intersect_normal_planes(&s1.a, &s2.a, &s1.plane).unwrap(),
            PlaneIntersection::Equal
        );
    }

    #[test]
    fn overlap_across_components_is_empty() {
        let atlas = two_circle_atlas();
        let tables = build_tables(&atlas, 128).unwrap();
        let p = GrassmannPlane::coordinate(3, &[0, 1]);
        let s1 = StratumSample::evaluate(&tables, vec![0.0, 0.0, 1.0], p.clone(), TAU).unwrap();
        let s2 = StratumSample::evaluate(&tables, vec![1.0, 0.0, 1.0], p.clone(), TAU).unwrap();
        // each set is one full circle, half the total atlas measure
        assert!(s1.e_measure.fraction > 0.49 && s1.e_measure.fraction < 0.51);
        assert!(s2.e_measure.fraction > 0.49 && s2.e_measure.fraction < 0.51);
        let overlap = pairwise_e_overlap_tables(&tables, &s1, &s2, TAU).unwrap();
        assert_eq!(overlap.nodes_hit, 0);
        assert_eq!(overlap.value, 0.0);

        // tilting the plane empties the set entirely
        let tilted = random_grassmann(3, 2, 41).unwrap();
        let s3 = StratumSample::evaluate(&tables, vec![0.0, 0.0, 1.0], tilted, TAU).unwrap();
        let overlap = pairwise_e_overlap_tables(&tables, &s1, &s3, TAU).unwrap();
        assert!(overlap.value <= 1e-3 * overlap.total);
    }
}
