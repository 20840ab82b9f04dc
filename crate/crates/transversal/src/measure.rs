//! Induced-measure estimates of the non-transverse parameter set.
//!
//! Membership of a center in the exceptional set only needs "zero versus
//! positive" volume, so a thresholded indicator under a composite midpoint
//! rule is enough: the two regimes differ by orders of magnitude on C1 data.
//! Node quantities that do not depend on the center (point, Jacobian, volume
//! weight) are cached in a [`ChartTable`] so center sweeps reuse them.

use crate::error::{Error, Result};
use crate::manifold::{gram_volume, ChartAtlas, Parametrization};
use crate::tangency::{is_degenerate_sphere, residual_from_parts};
use nalgebra::DMatrix;
use serde::Serialize;

/// Fraction threshold above which a center counts as exceptional.
pub const DEFAULT_EXCEPTIONAL_DELTA: f64 = 0.01;
/// Hard cap on the tolerated share of skipped quadrature nodes.
pub const MAX_SKIPPED_SHARE: f64 = 0.01;

/// Indicator-quadrature estimate of the measure of a parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureEstimate {
    /// Estimated induced measure of the flagged set.
    pub value: f64,
    /// Induced measure of the whole chart (or atlas) under the same rule.
    pub total: f64,
    /// value / total.
    pub fraction: f64,
    pub nodes_hit: usize,
    pub nodes_total: usize,
    pub nodes_skipped: usize,
    pub tolerance_used: f64,
}

/// One cached quadrature node.
#[derive(Debug, Clone)]
pub struct NodeSample {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub jac: DMatrix<f64>,
    /// volume element times cell volume.
    pub weight: f64,
}

/// Midpoint-rule nodes of one chart with center-independent data attached.
#[derive(Debug, Clone)]
pub struct ChartTable {
    samples: Vec<NodeSample>,
    failed: usize,
    nodes_total: usize,
}

impl ChartTable {
    pub fn build(chart: &Parametrization, nodes_per_axis: usize) -> Result<ChartTable> {
        if nodes_per_axis < 4 {
            return Err(Error::Config(
                "measure grid needs at least 4 nodes per axis".into(),
            ));
        }
        let cell = chart.domain().cell_volume(nodes_per_axis);
        let grid = chart.domain().midpoint_grid(nodes_per_axis);
        let nodes_total = grid.len();
        let mut samples = Vec::with_capacity(nodes_total);
        let mut failed = 0;
        for x in grid {
            match chart.eval_with_jacobian(&x) {
                Ok((p, jac)) => {
                    let weight = gram_volume(&jac) * cell;
                    samples.push(NodeSample { x, p, jac, weight });
                }
                Err(_) => failed += 1,
            }
        }
        Ok(ChartTable {
            samples,
            failed,
            nodes_total,
        })
    }

    pub fn samples(&self) -> &[NodeSample] {
        &self.samples
    }

    /// Total induced measure of the chart under the midpoint rule.
    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }
}

/// Tables for every chart of an atlas; measures are summed over charts
/// (shipped atlases keep chart overlaps at measure zero).
pub fn build_tables(atlas: &ChartAtlas, nodes_per_axis: usize) -> Result<Vec<ChartTable>> {
    atlas
        .charts()
        .iter()
        .map(|chart| ChartTable::build(chart, nodes_per_axis))
        .collect()
}

/// Generic indicator quadrature over prepared tables.
///
/// The closure returns `None` to skip a node (degenerate configuration),
/// otherwise whether the node belongs to the measured set. Summation runs
/// in the fixed lexicographic node order, so results are reproducible.
pub fn indicator_measure(
    tables: &[ChartTable],
    tolerance_used: f64,
    mut belongs: impl FnMut(&NodeSample) -> Option<bool>,
) -> Result<MeasureEstimate> {
    let mut value = 0.0;
    let mut total = 0.0;
    let mut hits = 0;
    let mut skipped = 0;
    let mut nodes_total = 0;
    for table in tables {
        nodes_total += table.nodes_total;
        skipped += table.failed;
        for sample in &table.samples {
            match belongs(sample) {
                None => skipped += 1,
                Some(hit) => {
                    total += sample.weight;
                    if hit {
                        value += sample.weight;
                        hits += 1;
                    }
                }
            }
        }
    }
    if nodes_total == 0 {
        return Err(Error::NumericalFailure("empty quadrature grid".into()));
    }
    if (skipped as f64) > MAX_SKIPPED_SHARE * nodes_total as f64 {
        return Err(Error::NumericalFailure(format!(
            "{skipped} of {nodes_total} quadrature nodes were skipped"
        )));
    }
    Ok(MeasureEstimate {
        value,
        total,
        fraction: if total > 0.0 { value / total } else { 0.0 },
        nodes_hit: hits,
        nodes_total,
        nodes_skipped: skipped,
        tolerance_used,
    })
}

/// Measure of the non-transverse set for center `a` over prepared tables.
pub fn nontransverse_measure_tables(
    tables: &[ChartTable],
    a: &[f64],
    tau: f64,
) -> Result<MeasureEstimate> {
    indicator_measure(tables, tau, |sample| {
        if is_degenerate_sphere(&sample.p, a) {
            return None;
        }
        let res = residual_from_parts(&sample.p, &sample.jac, a);
        Some(res.norm() <= tau * res.scale)
    })
}

/// Measure of {x : sphere centered at `a` is non-transverse at Phi(x)}.
pub fn nontransverse_measure(
    chart: &Parametrization,
    a: &[f64],
    nodes_per_axis: usize,
    tau: f64,
) -> Result<MeasureEstimate> {
    let table = ChartTable::build(chart, nodes_per_axis)?;
    nontransverse_measure_tables(std::slice::from_ref(&table), a, tau)
}

/// Atlas-level non-transverse measure, summed over charts.
pub fn nontransverse_measure_atlas(
    atlas: &ChartAtlas,
    a: &[f64],
    nodes_per_axis: usize,
    tau: f64,
) -> Result<MeasureEstimate> {
    let tables = build_tables(atlas, nodes_per_axis)?;
    nontransverse_measure_tables(&tables, a, tau)
}

/// Whether `a` is exceptional: the non-transverse fraction exceeds `delta`.
pub fn is_exceptional(
    atlas: &ChartAtlas,
    a: &[f64],
    delta: f64,
    nodes_per_axis: usize,
    tau: f64,
) -> Result<bool> {
    Ok(nontransverse_measure_atlas(atlas, a, nodes_per_axis, tau)?.fraction > delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::DomainBox;
    use crate::tangency::DEFAULT_TANGENCY_TOL;
    use crate::testing::{circle_atlas, circle_chart};
    use std::f64::consts::PI;

    const HALF_PI: f64 = PI / 2.0;

    #[test]
    fn axis_center_captures_the_whole_circle() {
        let chart = circle_chart();
        let m = nontransverse_measure(&chart, &[0.0, 0.0, 0.7], 256, DEFAULT_TANGENCY_TOL).unwrap();
        assert!(
            (m.value - HALF_PI).abs() / HALF_PI < 0.01,
            "value {} vs {HALF_PI}",
            m.value
        );
        assert!(m.fraction > 0.99);
        assert_eq!(m.nodes_hit, m.nodes_total);
    }

    #[test]
    fn off_axis_center_measures_zero() {
        let chart = circle_chart();
        let m = nontransverse_measure(&chart, &[0.5, 0.0, 0.0], 256, DEFAULT_TANGENCY_TOL).unwrap();
        assert!(
            m.value <= 1e-3 * HALF_PI,
            "isolated tangencies must not carry measure, got {}",
            m.value
        );
    }

    #[test]
    fn far_center_is_bounded_by_one_cell() {
        let chart = circle_chart();
        let nodes = 256;
        let m = nontransverse_measure(&chart, &[5.0, 7.0, 3.0], nodes, DEFAULT_TANGENCY_TOL).unwrap();
        let one_cell = 0.25 * chart.domain().cell_volume(nodes);
        assert!(m.value <= one_cell + 1e-12, "{} > {}", m.value, one_cell);
    }

    #[test]
    fn value_is_monotone_in_tau() {
        let chart = circle_chart();
        let table = ChartTable::build(&chart, 256).unwrap();
        let tables = std::slice::from_ref(&table);
        let a = [1e-9, 0.0, 0.5];
        let mut last = -1.0;
        for tau in [1e-12, 1e-10, 1e-9, 1e-8, 1e-6, 1e-4] {
            let m = nontransverse_measure_tables(tables, &a, tau).unwrap();
            assert!(
                m.value >= last,
                "value decreased from {last} to {} at tau={tau}",
                m.value
            );
            last = m.value;
        }
    }

    #[test]
    fn grid_refinement_is_stable() {
        let chart = circle_chart();
        let a = [0.0, 0.0, 0.4];
        let coarse = nontransverse_measure(&chart, &a, 128, DEFAULT_TANGENCY_TOL).unwrap();
        let fine = nontransverse_measure(&chart, &a, 256, DEFAULT_TANGENCY_TOL).unwrap();
        assert!((coarse.value - fine.value).abs() / fine.value < 0.02);
    }

    #[test]
    fn translation_equivariance() {
        let chart = circle_chart();
        let v = [0.5, -1.25, 2.0];
        let moved = chart.translated(&v).unwrap();
        let a = [0.3, 0.1, 0.2];
        let a_shifted: Vec<f64> = a.iter().zip(&v).map(|(x, y)| x + y).collect();
        let m0 = nontransverse_measure(&chart, &a, 128, DEFAULT_TANGENCY_TOL).unwrap();
        let m1 = nontransverse_measure(&moved, &a_shifted, 128, DEFAULT_TANGENCY_TOL).unwrap();
        assert!((m0.value - m1.value).abs() <= 1e-12 * (1.0 + m0.value));
        assert!((m0.total - m1.total).abs() <= 1e-12 * m0.total);
    }

    #[test]
    fn failing_nodes_beyond_one_percent_error_out() {
        // sqrt(x1) fails on half of [-1, 1]
        let domain = DomainBox::new(vec![-1.0], vec![1.0]).unwrap();
        let chart = Parametrization::from_texts(
            1,
            2,
            &["sqrt(x1)".to_string(), "x1".to_string()],
            domain,
        )
        .unwrap();
        let err = nontransverse_measure(&chart, &[0.0, 5.0], 64, DEFAULT_TANGENCY_TOL).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure(_)), "{err}");
    }

    #[test]
    fn exceptional_verdicts_on_the_circle() {
        let atlas = circle_atlas();
        assert!(is_exceptional(
            &atlas,
            &[0.0, 0.0, 1.0],
            DEFAULT_EXCEPTIONAL_DELTA,
            128,
            DEFAULT_TANGENCY_TOL
        )
        .unwrap());
        assert!(!is_exceptional(
            &atlas,
            &[0.1, 0.0, 0.5],
            DEFAULT_EXCEPTIONAL_DELTA,
            128,
            DEFAULT_TANGENCY_TOL
        )
        .unwrap());
    }
}
