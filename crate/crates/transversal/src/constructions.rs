//! Reference manifolds with known exceptional sets, used as ground truth by
//! the verification pipeline and the examples.
//!
//! The gallery contains disjoint circle chains, their connected C1 variant
//! with thin necks and blended corners, and round d-sphere chains in higher
//! codimension. For each of them the exceptional centers are a union of
//! (n-d-1)-dimensional coordinate-aligned affine planes through the
//! component centers, which `predicted_planes` returns in closed form.

use crate::error::{Error, Result};
use crate::linalg::{self, norm, sub};
use crate::manifold::{ChartAtlas, DomainBox, Parametrization};
use crate::scan::AffinePlane;
use serde::Serialize;
use std::f64::consts::PI;

/// Which reference manifold to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExampleKind {
    /// Disjoint circles of radius `scale` in the (x, y)-plane of R^3,
    /// centered at (i * spacing, 0, 0).
    Sigma0,
    /// The connected version: circles opened at two gaps, joined by thin
    /// straight necks, corners blended to C1 inside eps-neighbourhoods.
    Sigma2,
    /// Disjoint round d-spheres in the first d+1 coordinates of R^n.
    SphereChain,
    /// One circle of radius `scale` centered at the origin of R^3.
    SingleCircle,
    /// One round d-sphere centered at the origin of R^n.
    SingleSphere,
}

impl std::str::FromStr for ExampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ExampleKind> {
        Ok(match s {
            "sigma0" => ExampleKind::Sigma0,
            "sigma2" => ExampleKind::Sigma2,
            "sphere-chain" => ExampleKind::SphereChain,
            "circle" => ExampleKind::SingleCircle,
            "sphere" => ExampleKind::SingleSphere,
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown example kind `{other}` \
                     (expected sigma0, sigma2, sphere-chain, circle or sphere)"
                )))
            }
        })
    }
}

/// Parameters of a reference manifold.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleSpec {
    pub kind: ExampleKind,
    pub n: usize,
    pub d: usize,
    /// Number of chain components.
    pub count: usize,
    /// Neck parameter of Sigma2; must stay at or below 1/100.
    pub eps: f64,
    /// Component radius.
    pub scale: f64,
    /// Distance between consecutive component centers.
    pub spacing: f64,
}

pub const MAX_NECK_EPS: f64 = 0.01;

impl ExampleSpec {
    pub fn single_circle() -> ExampleSpec {
        ExampleSpec {
            kind: ExampleKind::SingleCircle,
            n: 3,
            d: 1,
            count: 1,
            eps: MAX_NECK_EPS,
            scale: 0.25,
            spacing: 1.0,
        }
    }

    pub fn sigma0(count: usize) -> ExampleSpec {
        ExampleSpec {
            kind: ExampleKind::Sigma0,
            count,
            ..ExampleSpec::single_circle()
        }
    }

    pub fn sigma2(count: usize, eps: f64) -> ExampleSpec {
        ExampleSpec {
            kind: ExampleKind::Sigma2,
            count,
            eps,
            ..ExampleSpec::single_circle()
        }
    }

    pub fn single_sphere(n: usize, d: usize) -> ExampleSpec {
        ExampleSpec {
            kind: ExampleKind::SingleSphere,
            n,
            d,
            count: 1,
            eps: MAX_NECK_EPS,
            scale: default_sphere_radius(n),
            spacing: 1.0,
        }
    }

    pub fn sphere_chain(n: usize, d: usize, count: usize) -> ExampleSpec {
        ExampleSpec {
            kind: ExampleKind::SphereChain,
            count,
            ..ExampleSpec::single_sphere(n, d)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::InvalidSpec("count must be at least 1".into()));
        }
        if !(self.scale > 0.0) || !(self.spacing > 0.0) {
            return Err(Error::InvalidSpec(
                "scale and spacing must be positive".into(),
            ));
        }
        match self.kind {
            ExampleKind::Sigma0 | ExampleKind::Sigma2 | ExampleKind::SingleCircle => {
                if self.n != 3 || self.d != 1 {
                    return Err(Error::InvalidSpec(
                        "circle examples live in R^3 with d = 1".into(),
                    ));
                }
            }
            ExampleKind::SphereChain | ExampleKind::SingleSphere => {
                if self.d < 1 || self.n < self.d + 1 {
                    return Err(Error::InvalidSpec(format!(
                        "sphere chain needs 1 <= d <= n-1, got d={}, n={}",
                        self.d, self.n
                    )));
                }
            }
        }
        if self.kind == ExampleKind::Sigma2 {
            if !(self.eps > 0.0) || self.eps > MAX_NECK_EPS {
                return Err(Error::InvalidSpec(format!(
                    "Sigma2 neck parameter must satisfy 0 < eps <= {MAX_NECK_EPS}, got {}",
                    self.eps
                )));
            }
            if self.spacing < 4.0 * self.scale {
                return Err(Error::InvalidSpec(
                    "Sigma2 needs spacing >= 4 * scale so the necks run between circles"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Center of chain component `i`.
    pub fn component_center(&self, i: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        c[0] = i as f64 * self.spacing;
        c
    }
}

fn default_sphere_radius(n: usize) -> f64 {
    0.25f64.powi(n as i32) // 4^{-n}
}

/// A parameter-space junction between two chart ends of a built atlas.
#[derive(Debug, Clone)]
pub struct Junction {
    pub chart_a: usize,
    pub x_a: Vec<f64>,
    pub chart_b: usize,
    pub x_b: Vec<f64>,
}

/// A built example with its C1-junction bookkeeping.
#[derive(Debug, Clone)]
pub struct BuiltExample {
    pub atlas: ChartAtlas,
    /// Pairs of chart ends that must meet with equal position and tangent line.
    pub junctions: Vec<Junction>,
    /// For every blend chart: the corner point it replaces. The blend must
    /// stay inside the eps-ball around that corner.
    pub blend_corners: Vec<(usize, Vec<f64>)>,
}

/// Builds the atlas for `spec`.
pub fn build(spec: &ExampleSpec) -> Result<ChartAtlas> {
    Ok(build_detailed(spec)?.atlas)
}

/// Builds the atlas along with junction metadata (nonempty for Sigma2).
pub fn build_detailed(spec: &ExampleSpec) -> Result<BuiltExample> {
    spec.validate()?;
    let charts = match spec.kind {
        ExampleKind::SingleCircle | ExampleKind::Sigma0 => {
            let mut charts = Vec::new();
            for i in 0..spec.count {
                charts.push(full_circle_chart(spec.n, &spec.component_center(i), spec.scale)?);
            }
            charts
        }
        ExampleKind::SingleSphere | ExampleKind::SphereChain => {
            let mut charts = Vec::new();
            for i in 0..spec.count {
                let center = spec.component_center(i);
                if spec.d == 1 {
                    charts.push(full_circle_chart(spec.n, &center, spec.scale)?);
                } else {
                    charts.extend(sphere_face_charts(spec.n, spec.d, &center, spec.scale)?);
                }
            }
            charts
        }
        ExampleKind::Sigma2 => {
            return build_sigma2(spec);
        }
    };
    Ok(BuiltExample {
        atlas: ChartAtlas::new(charts)?,
        junctions: Vec::new(),
        blend_corners: Vec::new(),
    })
}

/// One circle of radius r around `center` in the (x1, x2)-plane of R^n,
/// parametrized by angle over [0, 2 pi].
fn full_circle_chart(n: usize, center: &[f64], r: f64) -> Result<Parametrization> {
    circle_arc_chart(n, center, r, 0.0, 2.0 * PI)
}

fn circle_arc_chart(
    n: usize,
    center: &[f64],
    r: f64,
    theta_lo: f64,
    theta_hi: f64,
) -> Result<Parametrization> {
    let mut texts = Vec::with_capacity(n);
    texts.push(with_offset(format!("{}*cos(x1)", fmt(r)), center[0]));
    texts.push(with_offset(format!("{}*sin(x1)", fmt(r)), center[1]));
    for c in center.iter().take(n).skip(2) {
        texts.push(fmt(*c));
    }
    Parametrization::from_texts(1, n, &texts, DomainBox::new(vec![theta_lo], vec![theta_hi])?)
}

fn with_offset(base: String, offset: f64) -> String {
    if offset == 0.0 {
        base
    } else {
        format!("{base} + {}", fmt(offset))
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Round d-sphere around `center` (in the first d+1 coordinates) as 2(d+1)
/// charts, one per cube face, each the central projection of [-1,1]^d onto
/// the sphere. The faces cover the sphere exactly and overlap on measure
/// zero, and the map is smooth on the whole closed box.
fn sphere_face_charts(
    n: usize,
    d: usize,
    center: &[f64],
    r: f64,
) -> Result<Vec<Parametrization>> {
    let mut denominator = String::from("sqrt(1");
    for k in 1..=d {
        denominator.push_str(&format!(" + x{k}^2"));
    }
    denominator.push(')');

    let mut charts = Vec::with_capacity(2 * (d + 1));
    for axis in 0..=d {
        for sign in [1.0f64, -1.0] {
            let mut texts = Vec::with_capacity(n);
            let mut param = 0;
            for j in 0..n {
                if j <= d {
                    let numerator = if j == axis {
                        fmt(sign * r)
                    } else {
                        param += 1;
                        format!("{}*x{param}", fmt(r))
                    };
                    texts.push(with_offset(format!("{numerator}/{denominator}"), center[j]));
                } else {
                    texts.push(fmt(center[j]));
                }
            }
            let domain = DomainBox::new(vec![-1.0; d], vec![1.0; d])?;
            charts.push(Parametrization::from_texts(d, n, &texts, domain)?);
        }
    }
    Ok(charts)
}

/// Straight segment from `from` to `to` over [0, 1].
fn segment_chart(n: usize, from: &[f64], to: &[f64]) -> Result<Parametrization> {
    let texts: Vec<String> = (0..n)
        .map(|j| linear_text(from[j], to[j] - from[j]))
        .collect();
    Parametrization::from_texts(1, n, &texts, DomainBox::new(vec![0.0], vec![1.0])?)
}

/// Cubic Hermite blend from (p0, m0) to (p1, m1) over [0, 1], written in the
/// power basis so each component is a single polynomial.
fn hermite_chart(
    n: usize,
    p0: &[f64],
    m0: &[f64],
    p1: &[f64],
    m1: &[f64],
) -> Result<Parametrization> {
    let texts: Vec<String> = (0..n)
        .map(|j| {
            let c0 = p0[j];
            let c1 = m0[j];
            let c2 = -3.0 * p0[j] - 2.0 * m0[j] + 3.0 * p1[j] - m1[j];
            let c3 = 2.0 * p0[j] + m0[j] - 2.0 * p1[j] + m1[j];
            cubic_text([c0, c1, c2, c3])
        })
        .collect();
    Parametrization::from_texts(1, n, &texts, DomainBox::new(vec![0.0], vec![1.0])?)
}

fn linear_text(constant: f64, slope: f64) -> String {
    cubic_text([constant, slope, 0.0, 0.0])
}

fn cubic_text(coefficients: [f64; 4]) -> String {
    let powers = ["", "*x1", "*x1^2", "*x1^3"];
    let mut terms = Vec::new();
    for (coefficient, power) in coefficients.iter().zip(powers) {
        if *coefficient != 0.0 {
            terms.push(format!("{}{power}", fmt(*coefficient)));
        }
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// The connected chain: arcs, thin straight necks and Hermite corner blends.
///
/// Each neck between circle i and circle i+1 runs two segments through the
/// right gap of circle i and the left gap of circle i+1. Arcs and segments
/// retreat half an eps of arclength from every corner and a cubic Hermite
/// arc closes the gap with matching tangent lines, so the set only changes
/// inside the eps-neighbourhoods of the corners. End circles keep their
/// unused gap closed, which makes the whole chain a single closed C1 curve.
fn build_sigma2(spec: &ExampleSpec) -> Result<BuiltExample> {
    let n = spec.n;
    let r = spec.scale;
    let eps = spec.eps;
    if spec.count == 1 {
        let atlas = ChartAtlas::new(vec![full_circle_chart(n, &spec.component_center(0), r)?])?;
        return Ok(BuiltExample {
            atlas,
            junctions: Vec::new(),
            blend_corners: Vec::new(),
        });
    }
    let count = spec.count;
    let gap = 2.0 * eps; // angular half-gap at the openings, as built
    let retreat = eps / (2.0 * r); // angle retreated for the blend support

    let circle_point = |i: usize, theta: f64| -> Vec<f64> {
        let mut p = spec.component_center(i);
        p[0] += r * theta.cos();
        p[1] += r * theta.sin();
        p
    };
    // unit tangent in the direction of increasing angle
    let circle_tangent = |theta: f64| -> Vec<f64> {
        let mut t = vec![0.0; n];
        t[0] = -theta.sin();
        t[1] = theta.cos();
        t
    };

    let mut charts = Vec::new();
    let mut arc_ids: Vec<(usize, usize)> = Vec::new(); // per circle: (first arc id, arc count)
    for i in 0..count {
        let first = charts.len();
        if i == 0 {
            charts.push(circle_arc_chart(n, &spec.component_center(i), r,
                gap + retreat, 2.0 * PI - gap - retreat)?);
            arc_ids.push((first, 1));
        } else if i == count - 1 {
            charts.push(circle_arc_chart(n, &spec.component_center(i), r,
                PI + gap + retreat, 3.0 * PI - gap - retreat)?);
            arc_ids.push((first, 1));
        } else {
            charts.push(circle_arc_chart(n, &spec.component_center(i), r,
                gap + retreat, PI - gap - retreat)?);
            charts.push(circle_arc_chart(n, &spec.component_center(i), r,
                PI + gap + retreat, 2.0 * PI - gap - retreat)?);
            arc_ids.push((first, 2));
        }
    }

    // arc chart end carrying each corner of circle i, with its parameter and
    // the unit tangent of the arc pointing out of the arc toward the corner
    #[derive(Clone, Copy)]
    enum Corner {
        A, // theta = gap, right gap top, outgoing neck
        B, // theta = pi - gap, left gap top, incoming neck
        C, // theta = 2 pi - gap, right gap bottom, outgoing neck
        D, // theta = pi + gap, left gap bottom, incoming neck
    }
    let arc_end = |i: usize, corner: Corner| -> (usize, f64, f64) {
        // (chart id, parameter at the cut, angle at the cut)
        let (first, arcs) = arc_ids[i];
        match corner {
            Corner::A => (first, gap + retreat, gap + retreat),
            Corner::B => {
                if i == count - 1 {
                    (first, 3.0 * PI - gap - retreat, PI - gap - retreat)
                } else {
                    (first, PI - gap - retreat, PI - gap - retreat)
                }
            }
            Corner::C => {
                let id = if arcs == 2 { first + 1 } else { first };
                (id, 2.0 * PI - gap - retreat, 2.0 * PI - gap - retreat)
            }
            Corner::D => {
                let id = if arcs == 2 { first + 1 } else { first };
                (id, PI + gap + retreat, PI + gap + retreat)
            }
        }
    };

    struct Neck {
        seg: [usize; 2],
        seg_ends: [[Vec<f64>; 2]; 2],
        dirs: [Vec<f64>; 2],
        corners: [Vec<f64>; 4], // A_i, B_{i+1}, C_i, D_{i+1}
    }
    let mut necks = Vec::new();
    for i in 0..count - 1 {
        let a = circle_point(i, gap);
        let b = circle_point(i + 1, PI - gap);
        let c = circle_point(i, 2.0 * PI - gap);
        let d = circle_point(i + 1, PI + gap);
        let u1 = {
            let v = sub(&b, &a);
            linalg::scale(&v, 1.0 / norm(&v))
        };
        let u2 = {
            let v = sub(&d, &c);
            linalg::scale(&v, 1.0 / norm(&v))
        };
        let half = eps / 2.0;
        let a_cut = linalg::add(&a, &linalg::scale(&u1, half));
        let b_cut = linalg::add(&b, &linalg::scale(&u1, -half));
        let c_cut = linalg::add(&c, &linalg::scale(&u2, half));
        let d_cut = linalg::add(&d, &linalg::scale(&u2, -half));
        let s1 = charts.len();
        charts.push(segment_chart(n, &a_cut, &b_cut)?);
        let s2 = charts.len();
        charts.push(segment_chart(n, &c_cut, &d_cut)?);
        necks.push(Neck {
            seg: [s1, s2],
            seg_ends: [[a_cut, b_cut], [c_cut, d_cut]],
            dirs: [u1, u2],
            corners: [a, b, c, d],
        });
    }

    let mut junctions = Vec::new();
    let mut blend_corners = Vec::new();
    for (i, neck) in necks.iter().enumerate() {
        let seg_speed = [
            linalg::distance(&neck.seg_ends[0][0], &neck.seg_ends[0][1]),
            linalg::distance(&neck.seg_ends[1][0], &neck.seg_ends[1][1]),
        ];
        // blend A: arc of circle i -> segment 1
        let (arc_id, arc_param, arc_angle) = arc_end(i, Corner::A);
        let p0 = circle_point(i, arc_angle);
        let t0 = linalg::scale(&circle_tangent(arc_angle), -1.0); // toward the corner
        let p1 = neck.seg_ends[0][0].clone();
        let t1 = neck.dirs[0].clone();
        let chord = linalg::distance(&p0, &p1);
        let blend = charts.len();
        charts.push(hermite_chart(
            n,
            &p0,
            &linalg::scale(&t0, chord),
            &p1,
            &linalg::scale(&t1, chord),
        )?);
        blend_corners.push((blend, neck.corners[0].clone()));
        junctions.push(Junction {
            chart_a: arc_id,
            x_a: vec![arc_param],
            chart_b: blend,
            x_b: vec![0.0],
        });
        junctions.push(Junction {
            chart_a: blend,
            x_a: vec![1.0],
            chart_b: neck.seg[0],
            x_b: vec![0.0],
        });

        // blend B: segment 1 -> arc of circle i+1
        let (arc_id, arc_param, arc_angle) = arc_end(i + 1, Corner::B);
        let p0 = neck.seg_ends[0][1].clone();
        let t0 = neck.dirs[0].clone();
        let p1 = circle_point(i + 1, arc_angle);
        let t1 = linalg::scale(&circle_tangent(arc_angle), -1.0); // into the arc interior
        let chord = linalg::distance(&p0, &p1);
        let blend = charts.len();
        charts.push(hermite_chart(
            n,
            &p0,
            &linalg::scale(&t0, chord),
            &p1,
            &linalg::scale(&t1, chord),
        )?);
        blend_corners.push((blend, neck.corners[1].clone()));
        junctions.push(Junction {
            chart_a: neck.seg[0],
            x_a: vec![1.0],
            chart_b: blend,
            x_b: vec![0.0],
        });
        junctions.push(Junction {
            chart_a: blend,
            x_a: vec![1.0],
            chart_b: arc_id,
            x_b: vec![arc_param],
        });

        // blend C: arc of circle i -> segment 2
        let (arc_id, arc_param, arc_angle) = arc_end(i, Corner::C);
        let p0 = circle_point(i, arc_angle);
        let t0 = circle_tangent(arc_angle); // increasing angle toward the corner
        let p1 = neck.seg_ends[1][0].clone();
        let t1 = neck.dirs[1].clone();
        let chord = linalg::distance(&p0, &p1);
        let blend = charts.len();
        charts.push(hermite_chart(
            n,
            &p0,
            &linalg::scale(&t0, chord),
            &p1,
            &linalg::scale(&t1, chord),
        )?);
        blend_corners.push((blend, neck.corners[2].clone()));
        junctions.push(Junction {
            chart_a: arc_id,
            x_a: vec![arc_param],
            chart_b: blend,
            x_b: vec![0.0],
        });
        junctions.push(Junction {
            chart_a: blend,
            x_a: vec![1.0],
            chart_b: neck.seg[1],
            x_b: vec![0.0],
        });

        // blend D: segment 2 -> arc of circle i+1
        let (arc_id, arc_param, arc_angle) = arc_end(i + 1, Corner::D);
        let p0 = neck.seg_ends[1][1].clone();
        let t0 = neck.dirs[1].clone();
        let p1 = circle_point(i + 1, arc_angle);
        let t1 = circle_tangent(arc_angle); // increasing angle into the arc
        let chord = linalg::distance(&p0, &p1);
        let blend = charts.len();
        charts.push(hermite_chart(
            n,
            &p0,
            &linalg::scale(&t0, chord),
            &p1,
            &linalg::scale(&t1, chord),
        )?);
        blend_corners.push((blend, neck.corners[3].clone()));
        junctions.push(Junction {
            chart_a: neck.seg[1],
            x_a: vec![1.0],
            chart_b: blend,
            x_b: vec![0.0],
        });
        junctions.push(Junction {
            chart_a: blend,
            x_a: vec![1.0],
            chart_b: arc_id,
            x_b: vec![arc_param],
        });
        let _ = seg_speed;
    }

    Ok(BuiltExample {
        atlas: ChartAtlas::new(charts)?,
        junctions,
        blend_corners,
    })
}

/// Position and tangent-line mismatch at a junction (both should vanish for
/// a C1 atlas; tangent lines are compared up to sign).
pub fn junction_mismatch(atlas: &ChartAtlas, junction: &Junction) -> Result<(f64, f64)> {
    let chart_a = &atlas.charts()[junction.chart_a];
    let chart_b = &atlas.charts()[junction.chart_b];
    let (pa, ja) = chart_a.eval_with_jacobian(&junction.x_a)?;
    let (pb, jb) = chart_b.eval_with_jacobian(&junction.x_b)?;
    let position = linalg::distance(&pa, &pb);
    let ta: Vec<f64> = ja.column(0).iter().copied().collect();
    let tb: Vec<f64> = jb.column(0).iter().copied().collect();
    let ta = linalg::scale(&ta, 1.0 / norm(&ta));
    let tb = linalg::scale(&tb, 1.0 / norm(&tb));
    let direct = linalg::distance(&ta, &tb);
    let flipped = linalg::distance(&ta, &linalg::scale(&tb, -1.0));
    Ok((position, direct.min(flipped)))
}

/// The planes that make up the exceptional set of the example: for each
/// component center, the (n-d-1)-plane through it spanned by the last
/// n-d-1 coordinate directions. Only planes meeting `window` are returned.
pub fn predicted_planes(spec: &ExampleSpec, window: &DomainBox) -> Result<Vec<AffinePlane>> {
    spec.validate()?;
    if window.dims() != spec.n {
        return Err(Error::Config(format!(
            "window has {} axes but the ambient space has {}",
            window.dims(),
            spec.n
        )));
    }
    let k = spec.n - spec.d - 1;
    let mut planes = Vec::new();
    for i in 0..spec.count {
        let base = spec.component_center(i);
        // the plane meets the window iff the fixed coordinates fit
        let fits = (0..=spec.d).all(|j| {
            base[j] >= window.lo()[j] && base[j] <= window.hi()[j]
        });
        if !fits {
            continue;
        }
        let basis: Vec<Vec<f64>> = (0..k)
            .map(|row| {
                let mut e = vec![0.0; spec.n];
                e[spec.d + 1 + row] = 1.0;
                e
            })
            .collect();
        planes.push(AffinePlane::new(base, basis)?);
    }
    Ok(planes)
}

/// Center window and lattice size used by the verification scans: wide
/// enough for every predicted plane, with lattice points landing exactly on
/// the component centers.
pub fn default_scan_window(spec: &ExampleSpec) -> Result<(DomainBox, usize)> {
    spec.validate()?;
    let width = (spec.count - 1) as f64 * spec.spacing;
    let mut lo = vec![-0.5; spec.n];
    let mut hi = vec![0.5; spec.n];
    hi[0] = width + 0.5;
    let nodes = (10.0 * (width + 1.0)).round() as usize + 1;
    Ok((DomainBox::new(lo.drain(..).collect(), hi)?, nodes))
}

/// Checks that the whole single component lies on one sphere around `a`:
/// the distances from `a` to sampled points agree with the first sample to
/// 1e-9 relative. This is the geometric signature of an exceptional center.
pub fn meridian_check(spec: &ExampleSpec, a: &[f64], samples_per_axis: usize) -> Result<bool> {
    match spec.kind {
        ExampleKind::SingleCircle | ExampleKind::SingleSphere => {}
        _ => {
            return Err(Error::InvalidSpec(
                "meridian check applies to single-component examples".into(),
            ))
        }
    }
    let atlas = build(spec)?;
    let mut reference: Option<f64> = None;
    for chart in atlas.charts() {
        for x in chart.domain().midpoint_grid(samples_per_axis) {
            let p = chart.evaluate(&x)?;
            let distance = linalg::distance(&p, a);
            if distance <= 1e-12 * (1.0 + norm(a)) {
                return Err(Error::DegenerateSphere);
            }
            match reference {
                None => reference = Some(distance),
                Some(r0) => {
                    if (distance - r0).abs() > 1e-9 * (1.0 + r0) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Ambient sample points of the atlas, for point-cloud export.
pub fn point_cloud(atlas: &ChartAtlas, samples_per_axis: usize) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for chart in atlas.charts() {
        for x in chart.domain().midpoint_grid(samples_per_axis) {
            points.push(chart.evaluate(&x)?);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::distance;

    #[test]
    fn sigma0_builds_translated_circles() {
        let spec = ExampleSpec::sigma0(2);
        let atlas = build(&spec).unwrap();
        assert_eq!(atlas.len(), 2);
        let p = atlas.charts()[0].evaluate(&[0.0]).unwrap();
        assert!(distance(&p, &[0.25, 0.0, 0.0]) < 1e-15);
        let p = atlas.charts()[1].evaluate(&[0.0]).unwrap();
        assert!(distance(&p, &[1.25, 0.0, 0.0]) < 1e-15);
    }

    #[test]
    fn single_circle_matches_the_quarter_radius_formula() {
        let atlas = build(&ExampleSpec::single_circle()).unwrap();
        assert_eq!(atlas.len(), 1);
        let p = atlas.charts()[0].evaluate(&[0.0]).unwrap();
        assert!(distance(&p, &[0.25, 0.0, 0.0]) < 1e-15);
    }

    #[test]
    fn sphere_chart_hits_the_pole() {
        let spec = ExampleSpec {
            scale: 0.25,
            ..ExampleSpec::single_sphere(4, 2)
        };
        let atlas = build(&spec).unwrap();
        assert_eq!(atlas.len(), 6); // 2(d+1) face charts
        // chart order: axis 0 +/-, axis 1 +/-, axis 2 +/-
        let pole = atlas.charts()[4].evaluate(&[0.0, 0.0]).unwrap();
        assert!(distance(&pole, &[0.0, 0.0, 0.25, 0.0]) < 1e-15, "{pole:?}");
        // every sampled point has radius 0.25 and zero fourth coordinate
        for chart in atlas.charts() {
            for x in chart.domain().midpoint_grid(8) {
                let p = chart.evaluate(&x).unwrap();
                assert!((norm(&p[..3]) - 0.25).abs() < 1e-12);
                assert_eq!(p[3], 0.0);
            }
        }
    }

    #[test]
    fn sphere_atlas_area_matches_the_round_sphere() {
        let spec = ExampleSpec {
            scale: 0.25,
            ..ExampleSpec::single_sphere(4, 2)
        };
        let atlas = build(&spec).unwrap();
        let mut area = 0.0;
        for chart in atlas.charts() {
            let cell = chart.domain().cell_volume(100);
            for x in chart.domain().midpoint_grid(100) {
                area += chart.volume_element(&x).unwrap() * cell;
            }
        }
        let expected = 4.0 * PI * 0.25 * 0.25;
        assert!(
            (area - expected).abs() / expected < 1e-3,
            "area {area} vs {expected}"
        );
    }

    #[test]
    fn sphere_charts_are_immersions() {
        let spec = ExampleSpec {
            scale: 0.25,
            ..ExampleSpec::single_sphere(4, 2)
        };
        let atlas = build(&spec).unwrap();
        for chart in atlas.charts() {
            chart.check_immersion(16, 1e-8).unwrap();
        }
    }

    #[test]
    fn sigma2_chart_census() {
        // truncated chain: 8 charts per neck (2 arcs + 2 segments + 4 blends)
        let built = build_detailed(&ExampleSpec::sigma2(2, 0.01)).unwrap();
        assert_eq!(built.atlas.len(), 8);
        assert_eq!(built.junctions.len(), 8);
        assert_eq!(built.blend_corners.len(), 4);
        let built = build_detailed(&ExampleSpec::sigma2(3, 0.01)).unwrap();
        assert_eq!(built.atlas.len(), 16);
    }

    #[test]
    fn sigma2_is_c1_across_junctions() {
        let built = build_detailed(&ExampleSpec::sigma2(3, 0.01)).unwrap();
        for junction in &built.junctions {
            let (position, tangent) = junction_mismatch(&built.atlas, junction).unwrap();
            assert!(position <= 1e-9, "position mismatch {position}");
            assert!(tangent <= 1e-6, "tangent mismatch {tangent}");
        }
    }

    #[test]
    fn sigma2_blends_stay_inside_eps_neighbourhoods() {
        let eps = 0.01;
        let built = build_detailed(&ExampleSpec::sigma2(2, eps)).unwrap();
        for (chart_id, corner) in &built.blend_corners {
            let chart = &built.atlas.charts()[*chart_id];
            for x in chart.domain().midpoint_grid(64) {
                let p = chart.evaluate(&x).unwrap();
                let dist = distance(&p, corner);
                assert!(dist <= eps, "blend point at {dist} from corner");
            }
        }
    }

    #[test]
    fn sigma2_arcs_and_segments_match_the_raw_pieces() {
        let built = build_detailed(&ExampleSpec::sigma2(2, 0.01)).unwrap();
        // first two charts are arcs of the two circles
        for (i, chart_id) in [(0usize, 0usize), (1, 1)] {
            let chart = &built.atlas.charts()[chart_id];
            let center = ExampleSpec::sigma2(2, 0.01).component_center(i);
            for x in chart.domain().midpoint_grid(64) {
                let p = chart.evaluate(&x).unwrap();
                assert!((distance(&p, &center) - 0.25).abs() < 1e-12);
                assert_eq!(p[2], 0.0);
            }
        }
        // segments are straight: the midpoint halves the endpoints
        for chart_id in [2usize, 3] {
            let chart = &built.atlas.charts()[chart_id];
            let a = chart.evaluate(&[0.0]).unwrap();
            let b = chart.evaluate(&[1.0]).unwrap();
            let mid = chart.evaluate(&[0.5]).unwrap();
            for j in 0..3 {
                assert!((mid[j] - 0.5 * (a[j] + b[j])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sigma2_charts_are_immersions() {
        let built = build_detailed(&ExampleSpec::sigma2(2, 0.01)).unwrap();
        for chart in built.atlas.charts() {
            chart.check_immersion(32, 1e-8).unwrap();
        }
    }

    #[test]
    fn neck_parameter_above_the_cap_is_rejected() {
        assert!(matches!(
            build(&ExampleSpec::sigma2(2, 0.02)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(build(&ExampleSpec::sigma2(2, 0.0)).is_err());
    }

    #[test]
    fn predicted_planes_for_the_single_circle() {
        let window = DomainBox::new(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let planes = predicted_planes(&ExampleSpec::single_circle(), &window).unwrap();
        assert_eq!(planes.len(), 1);
        assert_eq!(planes[0].k, 1);
        assert_eq!(planes[0].base, vec![0.0; 3]);
        assert_eq!(planes[0].basis[0], vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn predicted_planes_follow_the_window() {
        let spec = ExampleSpec::sigma0(3);
        let wide = DomainBox::new(vec![-0.5, -0.5, -0.5], vec![2.5, 0.5, 0.5]).unwrap();
        assert_eq!(predicted_planes(&spec, &wide).unwrap().len(), 3);
        let narrow = DomainBox::new(vec![-0.5, -0.5, -0.5], vec![1.5, 0.5, 0.5]).unwrap();
        assert_eq!(predicted_planes(&spec, &narrow).unwrap().len(), 2);
    }

    #[test]
    fn predicted_line_of_a_sphere_in_r4() {
        let spec = ExampleSpec::sphere_chain(4, 2, 1);
        let window = DomainBox::new(vec![-1.0; 4], vec![1.0; 4]).unwrap();
        let planes = predicted_planes(&spec, &window).unwrap();
        assert_eq!(planes.len(), 1);
        assert_eq!(planes[0].k, 1);
        assert_eq!(planes[0].basis[0], vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn point_planes_in_codimension_one() {
        let spec = ExampleSpec::sphere_chain(3, 2, 1);
        let window = DomainBox::new(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let planes = predicted_planes(&spec, &window).unwrap();
        assert_eq!(planes.len(), 1);
        assert_eq!(planes[0].k, 0);
    }

    #[test]
    fn meridian_check_on_circle_and_sphere() {
        let circle = ExampleSpec::single_circle();
        assert!(meridian_check(&circle, &[0.0, 0.0, 1.0], 64).unwrap());
        assert!(!meridian_check(&circle, &[0.3, 0.0, 1.0], 64).unwrap());

        let sphere = ExampleSpec {
            scale: 0.25,
            ..ExampleSpec::single_sphere(4, 2)
        };
        for t in [-1.0, 0.4, 2.0] {
            assert!(meridian_check(&sphere, &[0.0, 0.0, 0.0, t], 12).unwrap());
        }
        assert!(!meridian_check(&sphere, &[0.1, 0.0, 0.0, 1.0], 12).unwrap());
    }

    #[test]
    fn default_window_lattice_hits_the_centers() {
        let (window, nodes) = default_scan_window(&ExampleSpec::sigma0(2)).unwrap();
        assert_eq!(nodes, 21);
        let lattice = window.lattice(nodes);
        let hit_origin = lattice.iter().any(|c| norm(c) < 1e-12);
        let hit_second = lattice
            .iter()
            .any(|c| distance(c, &[1.0, 0.0, 0.0]) < 1e-12);
        assert!(hit_origin && hit_second);
    }
}
