//! File formats and the entry points behind the `transversal` binary.
//!
//! Manifold files are plain text: a `dims d n` header, then one block per
//! chart holding the literal `chart`, a `box lo1 hi1 ... lod hid` line and
//! n component expressions, one per line. `#` starts a comment. Structured
//! reports are JSON documents `{ "meta": ..., "report": ... }`; the meta
//! object is the only part allowed to differ between identical runs, so
//! byte-comparing the report object checks determinism. Flat tables are CSV
//! with a header row.

use crate::constructions::{self, ExampleSpec};
use crate::error::{Error, Result};
use crate::manifold::{ChartAtlas, DomainBox, Parametrization};
use crate::measure::{self, MeasureEstimate};
use crate::scan::{self, MeasureParams, ScanReport};
use crate::strata;
use crate::tangency;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

// ---------------------------------------------------------------------------
// manifold files

pub fn parse_manifold(text: &str) -> Result<ChartAtlas> {
    let mut lines = Vec::new(); // (line number, content)
    for (index, raw) in text.lines().enumerate() {
        let content = match raw.find('#') {
            Some(hash) => &raw[..hash],
            None => raw,
        };
        let content = content.trim();
        if !content.is_empty() {
            lines.push((index + 1, content.to_string()));
        }
    }
    let mut cursor = lines.into_iter().peekable();

    let (line, header) = cursor.next().ok_or_else(|| Error::ManifoldFile {
        line: 0,
        message: "empty manifold file".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "dims" {
        return Err(Error::ManifoldFile {
            line,
            message: format!("expected header `dims d n`, found `{header}`"),
        });
    }
    let d: usize = parse_field(fields[1], line, "intrinsic dimension")?;
    let n: usize = parse_field(fields[2], line, "ambient dimension")?;

    let mut charts = Vec::new();
    while let Some((line, keyword)) = cursor.next() {
        if keyword != "chart" {
            return Err(Error::ManifoldFile {
                line,
                message: format!("expected `chart`, found `{keyword}`"),
            });
        }
        let (box_line, box_text) = cursor.next().ok_or(Error::ManifoldFile {
            line,
            message: "chart is missing its `box` line".into(),
        })?;
        let box_fields: Vec<&str> = box_text.split_whitespace().collect();
        if box_fields.len() != 2 * d + 1 || box_fields[0] != "box" {
            return Err(Error::ManifoldFile {
                line: box_line,
                message: format!("expected `box` with {} bounds", 2 * d),
            });
        }
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for pair in box_fields[1..].chunks(2) {
            lo.push(parse_field(pair[0], box_line, "box bound")?);
            hi.push(parse_field(pair[1], box_line, "box bound")?);
        }
        let domain = DomainBox::new(lo, hi).map_err(|e| Error::ManifoldFile {
            line: box_line,
            message: e.to_string(),
        })?;
        let mut texts = Vec::with_capacity(n);
        let mut last_line = box_line;
        for _ in 0..n {
            let (expr_line, expr_text) = cursor.next().ok_or(Error::ManifoldFile {
                line: last_line,
                message: format!("chart needs {n} component expressions"),
            })?;
            last_line = expr_line;
            texts.push((expr_line, expr_text));
        }
        let components = texts
            .iter()
            .map(|(expr_line, expr_text)| {
                crate::expr::Expression::parse(expr_text, d).map_err(|e| Error::ManifoldFile {
                    line: *expr_line,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        charts.push(Parametrization::new(d, n, components, domain)?);
    }
    ChartAtlas::new(charts)
}

fn parse_field<T: std::str::FromStr>(text: &str, line: usize, what: &str) -> Result<T> {
    text.parse().map_err(|_| Error::ManifoldFile {
        line,
        message: format!("malformed {what} `{text}`"),
    })
}

pub fn write_manifold(atlas: &ChartAtlas) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dims {} {}",
        atlas.intrinsic_dim(),
        atlas.ambient_dim()
    );
    for chart in atlas.charts() {
        let _ = writeln!(out, "chart");
        let mut bounds = String::from("box");
        for (lo, hi) in chart.domain().lo().iter().zip(chart.domain().hi()) {
            let _ = write!(bounds, " {lo} {hi}");
        }
        let _ = writeln!(out, "{bounds}");
        for component in chart.components() {
            let _ = writeln!(out, "{component}");
        }
    }
    out
}

pub fn load_manifold(path: &Path) -> Result<ChartAtlas> {
    parse_manifold(&std::fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// config files: `key = value` (or `key value`) lines, `#` comments

pub fn parse_config_map(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let content = match raw.find('#') {
            Some(hash) => &raw[..hash],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = match content.split_once('=') {
            Some((k, v)) => (k, v),
            None => content.split_once(char::is_whitespace).ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", index + 1))
            })?,
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// report documents

#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub tool: String,
    pub generated_at_unix: u64,
}

impl ReportMeta {
    fn now() -> ReportMeta {
        let generated_at_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        ReportMeta {
            tool: format!("transversal {}", env!("CARGO_PKG_VERSION")),
            generated_at_unix,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Document<T: Serialize> {
    pub meta: ReportMeta,
    pub report: T,
}

impl<T: Serialize> Document<T> {
    pub fn new(report: T) -> Document<T> {
        Document {
            meta: ReportMeta::now(),
            report,
        }
    }

    /// The full document, timestamp included.
    pub fn render(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Only the report payload: identical runs give identical bytes.
    pub fn render_payload(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.report)?)
    }
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeConfig {
    pub manifold: String,
    pub center: Vec<f64>,
    pub measure_nodes: usize,
    pub seeds_per_axis: usize,
    pub tau: f64,
    pub newton_tol: f64,
    pub delta: f64,
}

impl AnalyzeConfig {
    pub fn new(manifold: impl Into<String>, center: Vec<f64>) -> AnalyzeConfig {
        AnalyzeConfig {
            manifold: manifold.into(),
            center,
            measure_nodes: 128,
            seeds_per_axis: 16,
            tau: tangency::DEFAULT_TANGENCY_TOL,
            newton_tol: tangency::DEFAULT_NEWTON_TOL,
            delta: measure::DEFAULT_EXCEPTIONAL_DELTA,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointRow {
    pub chart: usize,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    /// Residual-threshold transversality verdict at this point, if defined.
    pub transverse_residual: Option<bool>,
    /// Independent rank-oracle verdict at this point, if defined.
    pub transverse_rank: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub config: AnalyzeConfig,
    pub critical_points: Vec<CriticalPointRow>,
    /// Set when refinement keeps nearly every seed: the tangency locus is a
    /// continuum rather than a finite point set.
    pub continuum: bool,
    pub measure: MeasureEstimate,
    pub exceptional: bool,
    pub verdict: String,
}

pub fn analyze_atlas(atlas: &ChartAtlas, config: &AnalyzeConfig) -> Result<AnalyzeReport> {
    if config.center.len() != atlas.ambient_dim() {
        return Err(Error::Config(format!(
            "center has {} coordinates but the ambient space has {}",
            config.center.len(),
            atlas.ambient_dim()
        )));
    }
    let mut rows = Vec::new();
    let mut continuum = false;
    let d = atlas.intrinsic_dim();
    for (chart_index, chart) in atlas.charts().iter().enumerate() {
        let points = tangency::find_critical_points(
            chart,
            &config.center,
            config.seeds_per_axis,
            config.newton_tol,
        )?;
        let seeds = config.seeds_per_axis.pow(d as u32);
        if points.len() as f64 >= 0.9 * seeds as f64 {
            continuum = true;
        }
        for point in points {
            let transverse_residual =
                tangency::is_sphere_transverse(chart, &config.center, &point.x, config.tau).ok();
            let transverse_rank = tangency::rank_oracle(chart, &config.center, &point.x).ok();
            rows.push(CriticalPointRow {
                chart: chart_index,
                x: point.x,
                p: point.p,
                residual_norm: point.residual_norm,
                converged: point.converged,
                transverse_residual,
                transverse_rank,
            });
        }
    }
    let estimate = measure::nontransverse_measure_atlas(
        atlas,
        &config.center,
        config.measure_nodes,
        config.tau,
    )?;
    let exceptional = estimate.fraction > config.delta;
    Ok(AnalyzeReport {
        config: config.clone(),
        critical_points: rows,
        continuum,
        exceptional,
        verdict: if exceptional {
            "exceptional".into()
        } else {
            "not exceptional".into()
        },
        measure: estimate,
    })
}

pub fn run_analyze(config: &AnalyzeConfig) -> Result<AnalyzeReport> {
    let atlas = load_manifold(Path::new(&config.manifold))?;
    analyze_atlas(&atlas, config)
}

// ---------------------------------------------------------------------------
// scan

#[derive(Debug, Clone, Serialize)]
pub struct ScanCmdConfig {
    pub manifold: String,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub center_nodes: usize,
    pub measure_nodes: usize,
    pub tau: f64,
    pub delta: f64,
    pub linking_radius: Option<f64>,
}

impl ScanCmdConfig {
    pub fn new(
        manifold: impl Into<String>,
        box_lo: Vec<f64>,
        box_hi: Vec<f64>,
        center_nodes: usize,
    ) -> ScanCmdConfig {
        ScanCmdConfig {
            manifold: manifold.into(),
            box_lo,
            box_hi,
            center_nodes,
            measure_nodes: 128,
            tau: tangency::DEFAULT_TANGENCY_TOL,
            delta: measure::DEFAULT_EXCEPTIONAL_DELTA,
            linking_radius: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanCmdReport {
    pub config: ScanCmdConfig,
    pub scan: ScanReport,
}

pub fn scan_atlas(atlas: &ChartAtlas, config: &ScanCmdConfig) -> Result<ScanCmdReport> {
    let center_box = DomainBox::new(config.box_lo.clone(), config.box_hi.clone())?;
    let params = MeasureParams {
        nodes_per_axis: config.measure_nodes,
        tau: config.tau,
        delta: config.delta,
    };
    let scan = scan::scan_and_fit(
        atlas,
        &center_box,
        config.center_nodes,
        &params,
        config.linking_radius,
    )?;
    Ok(ScanCmdReport {
        config: config.clone(),
        scan,
    })
}

pub fn run_scan(config: &ScanCmdConfig) -> Result<ScanCmdReport> {
    let atlas = load_manifold(Path::new(&config.manifold))?;
    scan_atlas(&atlas, config)
}

/// Flat per-center table: coordinates, measure value, fraction, flag.
pub fn scan_table_csv(report: &ScanReport) -> String {
    let n = report.centers.first().map_or(0, |c| c.len());
    let mut out = String::new();
    for j in 1..=n {
        let _ = write!(out, "a{j},");
    }
    let _ = writeln!(out, "value,fraction,exceptional");
    let exceptional: std::collections::HashSet<usize> =
        report.exceptional.iter().copied().collect();
    for (index, center) in report.centers.iter().enumerate() {
        for coordinate in center {
            let _ = write!(out, "{coordinate},");
        }
        match &report.measures[index] {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    m.value,
                    m.fraction,
                    u8::from(exceptional.contains(&index))
                );
            }
            None => {
                let _ = writeln!(out, ",,0");
            }
        }
    }
    out
}

/// Point-cloud CSV for external visualization.
pub fn point_cloud_csv(points: &[Vec<f64>]) -> String {
    let n = points.first().map_or(0, |p| p.len());
    let mut out = String::new();
    let header: Vec<String> = (1..=n).map(|j| format!("p{j}")).collect();
    let _ = writeln!(out, "{}", header.join(","));
    for point in points {
        let row: Vec<String> = point.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

// ---------------------------------------------------------------------------
// build-example

#[derive(Debug, Clone, Serialize)]
pub struct BuildCmdConfig {
    pub spec: ExampleSpec,
    pub cloud_samples: usize,
}

pub fn run_build(config: &BuildCmdConfig) -> Result<(String, Option<String>)> {
    let atlas = constructions::build(&config.spec)?;
    let manifold_text = write_manifold(&atlas);
    // the emitted file must round-trip
    let reparsed = parse_manifold(&manifold_text)?;
    if reparsed != atlas {
        return Err(Error::NumericalFailure(
            "emitted manifold file does not round-trip".into(),
        ));
    }
    let cloud = if config.cloud_samples > 0 {
        let points = constructions::point_cloud(&atlas, config.cloud_samples)?;
        Some(point_cloud_csv(&points))
    } else {
        None
    };
    Ok((manifold_text, cloud))
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Clone, Serialize)]
pub struct VerifyCmdConfig {
    /// Manifold file to check; alternative to `example`.
    pub manifold: Option<String>,
    /// Reference example to check against its predicted planes.
    pub example: Option<ExampleSpec>,
    pub seed: u64,
    pub trials: usize,
    pub measure_nodes: usize,
    pub tau: f64,
    pub delta: f64,
    pub center_nodes: Option<usize>,
}

impl VerifyCmdConfig {
    pub fn for_example(spec: ExampleSpec) -> VerifyCmdConfig {
        VerifyCmdConfig {
            manifold: None,
            example: Some(spec),
            seed: 0,
            trials: 100,
            measure_nodes: 0, // resolved per dimension below
            tau: tangency::DEFAULT_TANGENCY_TOL,
            delta: measure::DEFAULT_EXCEPTIONAL_DELTA,
            center_nodes: None,
        }
    }

    pub fn for_manifold(path: impl Into<String>) -> VerifyCmdConfig {
        VerifyCmdConfig {
            manifold: Some(path.into()),
            example: None,
            seed: 0,
            trials: 100,
            measure_nodes: 0,
            tau: tangency::DEFAULT_TANGENCY_TOL,
            delta: measure::DEFAULT_EXCEPTIONAL_DELTA,
            center_nodes: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config: VerifyCmdConfig,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn default_measure_nodes(d: usize) -> usize {
    match d {
        1 => 128,
        2 => 24,
        _ => 8,
    }
}

pub fn run_verify(config: &VerifyCmdConfig) -> Result<VerifyReport> {
    let atlas = match (&config.example, &config.manifold) {
        (Some(spec), _) => constructions::build(spec)?,
        (None, Some(path)) => load_manifold(Path::new(path))?,
        (None, None) => {
            return Err(Error::Config(
                "verify needs a manifold file or an example spec".into(),
            ))
        }
    };
    let d = atlas.intrinsic_dim();
    let n = atlas.ambient_dim();
    let measure_nodes = if config.measure_nodes > 0 {
        config.measure_nodes
    } else {
        default_measure_nodes(d)
    };
    let mut checks = Vec::new();

    // claim1: E(a, P) must be empty for every Grassmann dimension i <= d;
    // a rank-deficient chart shows up here as violating trials
    let tables = measure::build_tables(&atlas, measure_nodes)?;
    let claim1 =
        strata::claim1_diagnostic(&atlas, &tables, config.trials, config.seed, config.tau)?;
    checks.push(CheckResult {
        name: "claim1".into(),
        pass: claim1.pass(),
        detail: format!(
            "{} trials, {} violations",
            claim1.checked,
            claim1.violations.len()
        ),
    });

    // exact normal-plane intersection dichotomy
    let battery = strata::dichotomy_battery(n, 2000, 500, config.seed)?;
    checks.push(CheckResult {
        name: "normal-plane-dichotomy".into(),
        pass: battery.pass(),
        detail: format!(
            "{}/{} classified, {}/{} frame-invariant",
            battery.correct, battery.cases, battery.reframe_consistent, battery.reframed
        ),
    });

    // scan against predicted planes, for built-in examples
    if let Some(spec) = &config.example {
        let (window, default_nodes) = constructions::default_scan_window(spec)?;
        let center_nodes = config.center_nodes.unwrap_or(default_nodes);
        let params = MeasureParams {
            nodes_per_axis: measure_nodes,
            tau: config.tau,
            delta: config.delta,
        };
        let report = scan::scan_and_fit(&atlas, &window, center_nodes, &params, None)?;
        let predicted = constructions::predicted_planes(spec, &window)?;
        let candidates: Vec<Vec<f64>> = report
            .exceptional
            .iter()
            .map(|&i| report.centers[i].clone())
            .collect();
        let tol = 1.5 * report.grid_spacing;
        let containment = scan::verify_containment(&predicted, &candidates, tol);
        let count_match = report.planes.len() == predicted.len();
        let mut angle_ok = true;
        let mut worst_angle: f64 = 0.0;
        for plane in &report.planes {
            let nearest = predicted
                .iter()
                .min_by(|p, q| {
                    p.distance(&plane.base)
                        .partial_cmp(&q.distance(&plane.base))
                        .unwrap()
                })
                .expect("nonempty predicted planes");
            if plane.k > 0 {
                let angles =
                    crate::linalg::principal_angles(&plane.frame(), &nearest.frame());
                let max_angle = angles.last().copied().unwrap_or(0.0).to_degrees();
                worst_angle = worst_angle.max(max_angle);
                if max_angle > 2.0 {
                    angle_ok = false;
                }
            }
        }
        checks.push(CheckResult {
            name: "containment".into(),
            pass: containment.pass && count_match && angle_ok && !candidates.is_empty(),
            detail: format!(
                "{} candidates, {} fitted vs {} predicted planes, \
                 max distance {:.3e} (tol {:.3e}), worst angle {:.3} deg",
                candidates.len(),
                report.planes.len(),
                predicted.len(),
                containment.max_distance,
                tol,
                worst_angle
            ),
        });
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        config: config.clone(),
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::ExampleKind;

    #[test]
    fn manifold_file_round_trips() {
        let atlas = constructions::build(&ExampleSpec::sigma0(2)).unwrap();
        let text = write_manifold(&atlas);
        let parsed = parse_manifold(&text).unwrap();
        assert_eq!(parsed, atlas);
    }

    #[test]
    fn manifold_parser_reports_line_numbers() {
        let text = "dims 1 3\nchart\nbox 0 1\ncos(x1)\nsin(x9)\n0\n";
        match parse_manifold(text).unwrap_err() {
            Error::ManifoldFile { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("x9"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn manifold_parser_accepts_comments_and_blank_lines() {
        let text = "# a circle\n\ndims 1 3\nchart\nbox 0 6.283185307179586 # full turn\ncos(x1)/4\nsin(x1)/4\n0\n";
        let atlas = parse_manifold(text).unwrap();
        assert_eq!(atlas.len(), 1);
    }

    #[test]
    fn config_map_accepts_both_separators() {
        let map = parse_config_map("tau = 1e-7\nnodes 128\n# comment\n").unwrap();
        assert_eq!(map.get("tau").unwrap(), "1e-7");
        assert_eq!(map.get("nodes").unwrap(), "128");
    }

    #[test]
    fn analyze_flags_the_meridian_center() {
        let atlas = crate::testing::circle_atlas();
        let config = AnalyzeConfig::new("<memory>", vec![0.0, 0.0, 1.0]);
        let report = analyze_atlas(&atlas, &config).unwrap();
        assert!(report.exceptional);
        assert!(report.continuum);
        assert_eq!(report.verdict, "exceptional");
        assert!(report.measure.fraction > 0.99);
    }

    #[test]
    fn analyze_reports_two_pointwise_tangencies_off_axis() {
        let atlas = crate::testing::circle_atlas();
        let config = AnalyzeConfig::new("<memory>", vec![0.5, 0.0, 0.0]);
        let report = analyze_atlas(&atlas, &config).unwrap();
        assert_eq!(report.critical_points.len(), 2);
        for row in &report.critical_points {
            assert_eq!(row.transverse_residual, Some(false));
            assert_eq!(row.transverse_rank, Some(false));
        }
        assert!(!report.exceptional);
        assert!(!report.continuum);
        assert_eq!(report.verdict, "not exceptional");
    }

    #[test]
    fn build_command_round_trips_and_samples() {
        let config = BuildCmdConfig {
            spec: ExampleSpec::sigma2(2, 0.01),
            cloud_samples: 8,
        };
        let (text, cloud) = run_build(&config).unwrap();
        assert!(text.starts_with("dims 1 3"));
        let cloud = cloud.unwrap();
        assert!(cloud.lines().next().unwrap().starts_with("p1,p2,p3"));
        assert_eq!(cloud.lines().count(), 1 + 8 * 8); // header + 8 charts x 8 samples
    }

    #[test]
    fn verify_passes_on_the_single_circle() {
        let mut config = VerifyCmdConfig::for_example(ExampleSpec::single_circle());
        config.trials = 25;
        config.center_nodes = Some(11);
        let report = run_verify(&config).unwrap();
        assert!(report.pass, "checks: {:?}", report.checks);
        assert!(report.checks.iter().any(|c| c.name == "containment"));
    }

    #[test]
    fn verify_names_claim1_on_a_rank_deficient_manifold() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("degenerate.txt");
        std::fs::write(&path, "dims 1 3\nchart\nbox 0 1\n1\n2\n0\n").unwrap();
        let mut config = VerifyCmdConfig::for_manifold(path.to_str().unwrap());
        config.trials = 10;
        let report = run_verify(&config).unwrap();
        assert!(!report.pass);
        assert_eq!(report.first_failure().unwrap().name, "claim1");
    }

    #[test]
    fn example_kind_parsing() {
        assert_eq!(
            "sigma0".parse::<ExampleKind>().unwrap(),
            ExampleKind::Sigma0
        );
        assert!("nonsense".parse::<ExampleKind>().is_err());
    }

    #[test]
    fn scan_csv_has_one_row_per_center() {
        let atlas = crate::testing::circle_atlas();
        let config = ScanCmdConfig {
            measure_nodes: 64,
            ..ScanCmdConfig::new("<memory>", vec![-0.6; 3], vec![0.6; 3], 5)
        };
        let report = scan_atlas(&atlas, &config).unwrap();
        let csv = scan_table_csv(&report.scan);
        assert_eq!(csv.lines().count(), 1 + 125);
        assert!(csv.starts_with("a1,a2,a3,value,fraction,exceptional"));
    }
}
