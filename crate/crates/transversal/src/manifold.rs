//! Chart-local parametrized submanifolds.
//!
//! A submanifold is given as one or more charts, each a map from a finite
//! box in parameter space into ambient space with every component written in
//! the expression language. The Jacobian comes from dual-number evaluation
//! and the induced d-dimensional volume element is sqrt(det(J^T J)).

use crate::error::{Error, Result};
use crate::expr::Expression;
use nalgebra::DMatrix;

/// Axis-aligned finite box, the parameter domain of a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<DomainBox> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParametrization(
                "domain box needs matching, non-empty bounds".into(),
            ));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !a.is_finite() || !b.is_finite() || a >= b {
                return Err(Error::InvalidParametrization(format!(
                    "domain interval [{a}, {b}] must be finite and nondegenerate"
                )));
            }
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    /// Cell volume of a uniform grid with `nodes` cells per axis.
    pub fn cell_volume(&self, nodes: usize) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) / nodes as f64)
            .product()
    }

    /// Midpoint-rule nodes, `nodes` per axis, in lexicographic order
    /// (first axis slowest).
    pub fn midpoint_grid(&self, nodes: usize) -> Vec<Vec<f64>> {
        let d = self.dims();
        let mut out = Vec::with_capacity(nodes.pow(d as u32));
        let mut index = vec![0usize; d];
        loop {
            let point: Vec<f64> = (0..d)
                .map(|j| {
                    let h = (self.hi[j] - self.lo[j]) / nodes as f64;
                    self.lo[j] + (index[j] as f64 + 0.5) * h
                })
                .collect();
            out.push(point);
            // odometer increment, last axis fastest
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < nodes {
                    break;
                }
                index[axis] = 0;
            }
        }
    }

    /// Endpoint-inclusive lattice, `nodes` per axis (nodes >= 2).
    pub fn lattice(&self, nodes: usize) -> Vec<Vec<f64>> {
        assert!(nodes >= 2, "lattice needs at least 2 nodes per axis");
        let d = self.dims();
        let mut out = Vec::with_capacity(nodes.pow(d as u32));
        let mut index = vec![0usize; d];
        loop {
            let point: Vec<f64> = (0..d)
                .map(|j| {
                    let h = (self.hi[j] - self.lo[j]) / (nodes - 1) as f64;
                    self.lo[j] + index[j] as f64 * h
                })
                .collect();
            out.push(point);
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < nodes {
                    break;
                }
                index[axis] = 0;
            }
        }
    }

    /// Largest per-axis spacing of the endpoint lattice.
    pub fn lattice_spacing(&self, nodes: usize) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) / (nodes - 1) as f64)
            .fold(0.0, f64::max)
    }
}

/// One chart of a d-dimensional submanifold of R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Parametrization {
    d: usize,
    n: usize,
    components: Vec<Expression>,
    domain: DomainBox,
}

impl Parametrization {
    pub fn new(
        d: usize,
        n: usize,
        components: Vec<Expression>,
        domain: DomainBox,
    ) -> Result<Parametrization> {
        if d < 1 {
            return Err(Error::InvalidParametrization(
                "intrinsic dimension must be at least 1; \
                 a discrete point set is never transverse to a sphere"
                    .into(),
            ));
        }
        if n < d + 1 {
            return Err(Error::InvalidParametrization(format!(
                "ambient dimension {n} must exceed intrinsic dimension {d}"
            )));
        }
        if components.len() != n {
            return Err(Error::InvalidParametrization(format!(
                "expected {n} component expressions, found {}",
                components.len()
            )));
        }
        if domain.dims() != d {
            return Err(Error::InvalidParametrization(format!(
                "domain box has {} axes, chart has {d} parameters",
                domain.dims()
            )));
        }
        for (k, component) in components.iter().enumerate() {
            if let Some(max_var) = component.max_var_index() {
                if max_var >= d {
                    return Err(Error::InvalidParametrization(format!(
                        "component {} uses x{} but the chart has {d} parameter(s)",
                        k + 1,
                        max_var + 1
                    )));
                }
            }
        }
        Ok(Parametrization {
            d,
            n,
            components,
            domain,
        })
    }

    /// Parses `texts` as the component expressions of a chart.
    pub fn from_texts(
        d: usize,
        n: usize,
        texts: &[String],
        domain: DomainBox,
    ) -> Result<Parametrization> {
        let components = texts
            .iter()
            .map(|t| Expression::parse(t, d))
            .collect::<Result<Vec<_>>>()?;
        Parametrization::new(d, n, components, domain)
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.d
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// The point on the manifold at parameter `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// The n x d Jacobian at `x`; column j is the partial in x_{j+1}.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.eval_with_jacobian(x)?.1)
    }

    /// Point and Jacobian in one pass over the component expressions.
    pub fn eval_with_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check_domain(x)?;
        let mut point = Vec::with_capacity(self.n);
        let mut jac = DMatrix::zeros(self.n, self.d);
        for (i, component) in self.components.iter().enumerate() {
            let dual = component.eval_dual(x)?;
            point.push(dual.value);
            for j in 0..self.d {
                jac[(i, j)] = dual.partials[j];
            }
        }
        Ok((point, jac))
    }

    /// sqrt(det(J^T J)), the induced d-volume density at `x`.
    pub fn volume_element(&self, x: &[f64]) -> Result<f64> {
        let jac = self.jacobian(x)?;
        Ok(gram_volume(&jac))
    }

    /// Checks the immersion condition on a midpoint grid: the smallest
    /// Jacobian singular value must stay above `rel_tol` times the largest.
    /// Returns the worst ratio and where it occurred.
    pub fn check_immersion(&self, nodes: usize, rel_tol: f64) -> Result<(f64, Vec<f64>)> {
        let mut worst = f64::INFINITY;
        let mut worst_x = Vec::new();
        for x in self.domain.midpoint_grid(nodes) {
            let jac = self.jacobian(&x)?;
            let (min_sv, max_sv) = crate::linalg::singular_value_range(&jac);
            let ratio = if max_sv == 0.0 { 0.0 } else { min_sv / max_sv };
            if ratio < worst {
                worst = ratio;
                worst_x = x;
            }
        }
        if worst < rel_tol {
            return Err(Error::InvalidParametrization(format!(
                "chart is not an immersion at x = {worst_x:?} \
                 (singular value ratio {worst:.3e} < {rel_tol:.3e})"
            )));
        }
        Ok((worst, worst_x))
    }

    /// The same chart translated by `v` in ambient space.
    pub fn translated(&self, v: &[f64]) -> Result<Parametrization> {
        assert_eq!(v.len(), self.n);
        let components = self
            .components
            .iter()
            .zip(v)
            .map(|(c, offset)| {
                Expression::Add(Box::new(c.clone()), Box::new(Expression::Literal(*offset)))
            })
            .collect();
        Parametrization::new(self.d, self.n, components, self.domain.clone())
    }

    /// The chart composed with the ambient linear map `r` (n x n).
    pub fn mapped(&self, r: &DMatrix<f64>) -> Result<Parametrization> {
        assert_eq!(r.nrows(), self.n);
        assert_eq!(r.ncols(), self.n);
        let components = (0..self.n)
            .map(|i| {
                let mut sum: Option<Expression> = None;
                for j in 0..self.n {
                    let term = Expression::Mul(
                        Box::new(Expression::Literal(r[(i, j)])),
                        Box::new(self.components[j].clone()),
                    );
                    sum = Some(match sum {
                        None => term,
                        Some(acc) => Expression::Add(Box::new(acc), Box::new(term)),
                    });
                }
                sum.unwrap()
            })
            .collect();
        Parametrization::new(self.d, self.n, components, self.domain.clone())
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        Ok(())
    }
}

/// sqrt(det(J^T J)) for an n x d Jacobian.
pub fn gram_volume(jac: &DMatrix<f64>) -> f64 {
    let gram = jac.transpose() * jac;
    gram.determinant().max(0.0).sqrt()
}

/// An ordered collection of charts covering the submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartAtlas {
    charts: Vec<Parametrization>,
}

impl ChartAtlas {
    pub fn new(charts: Vec<Parametrization>) -> Result<ChartAtlas> {
        let first = charts.first().ok_or_else(|| {
            Error::InvalidParametrization("atlas needs at least one chart".into())
        })?;
        let (d, n) = (first.intrinsic_dim(), first.ambient_dim());
        for chart in &charts {
            if chart.intrinsic_dim() != d || chart.ambient_dim() != n {
                return Err(Error::InvalidParametrization(format!(
                    "all charts must share dimensions (d={d}, n={n})"
                )));
            }
        }
        Ok(ChartAtlas { charts })
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.charts[0].intrinsic_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.charts[0].ambient_dim()
    }

    pub fn charts(&self) -> &[Parametrization] {
        &self.charts
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }
}
