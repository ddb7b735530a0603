//! Field pairs `(X, Y)` as polynomial jets, their spec documents, and the
//! search for zeros of `Y`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Box { min: Vec<f64>, max: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Domain::Box { min: vec![-half_width; dim], max: vec![half_width; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { min, .. } => min.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Domain::Box { min, max } => {
                if min.len() != max.len() {
                    return Err("box min and max differ in length".into());
                }
                if min.iter().zip(max).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
                    return Err("box needs finite min < max on every axis".into());
                }
            }
            Domain::Ball { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
                    return Err("ball needs a finite center and positive radius".into());
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.contains_with_slack(p, 0.0)
    }

    pub fn contains_with_slack(&self, p: &[f64], slack: f64) -> bool {
        match self {
            Domain::Box { min, max } => p
                .iter()
                .zip(min.iter().zip(max))
                .all(|(x, (a, b))| *x >= a - slack && *x <= b + slack),
            Domain::Ball { center, radius } => distance(p, center) <= radius + slack,
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { min, max } => (min.clone(), max.clone()),
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Largest distance from `p` to a point of the domain.
    pub fn reach_from(&self, p: &[f64]) -> f64 {
        match self {
            Domain::Box { min, max } => p
                .iter()
                .zip(min.iter().zip(max))
                .map(|(x, (a, b))| (x - a).abs().max((b - x).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Domain::Ball { center, radius } => distance(p, center) + radius,
        }
    }

    /// Distance from an interior point `p` to the boundary (0 outside).
    pub fn inner_radius(&self, p: &[f64]) -> f64 {
        if !self.contains(p) {
            return 0.0;
        }
        match self {
            Domain::Box { min, max } => p
                .iter()
                .zip(min.iter().zip(max))
                .map(|(x, (a, b))| (x - a).min(b - x))
                .fold(f64::INFINITY, f64::min),
            Domain::Ball { center, radius } => radius - distance(p, center),
        }
    }

    /// Uniform grid with `per_axis` points per axis including the endpoints of
    /// the bounding box, filtered to the domain. Row-major, last axis fastest.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let (lo, hi) = self.bounding_box();
        let n = lo.len();
        let axis = |k: usize, i: usize| -> f64 {
            if per_axis <= 1 {
                0.5 * (lo[k] + hi[k])
            } else {
                lo[k] + (hi[k] - lo[k]) * i as f64 / (per_axis - 1) as f64
            }
        };
        let mut out = Vec::new();
        crate::index::for_each_index(per_axis.max(1), n, |idx| {
            let p: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| axis(k, i)).collect();
            if self.contains_with_slack(&p, 1e-12) {
                out.push(p);
            }
        });
        out
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Vector field components `X^a` and co-vector components `Y_b` on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    x: Vec<Jet>,
    y: Vec<Jet>,
    domain: Domain,
}

impl FieldPair {
    pub fn new(x: Vec<Jet>, y: Vec<Jet>, domain: Domain) -> Result<Self> {
        let n = x.len();
        if n == 0 || y.len() != n {
            return Err(Error::SpecDimension(format!("{} X and {} Y components", x.len(), y.len())));
        }
        let first = &x[0];
        for j in x.iter().chain(&y) {
            if j.dim() != n || j.order() != first.order() || j.base_point() != first.base_point() {
                return Err(Error::SpecDimension(
                    "all components need the field dimension, a common order and a common base point".into(),
                ));
            }
        }
        if domain.dim() != n {
            return Err(Error::SpecDimension(format!("domain has dimension {}, fields {n}", domain.dim())));
        }
        domain.validate().map_err(Error::SpecDimension)?;
        Ok(FieldPair { x, y, domain })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn order(&self) -> usize {
        self.x[0].order()
    }

    pub fn base_point(&self) -> &[f64] {
        self.x[0].base_point()
    }

    pub fn x(&self) -> &[Jet] {
        &self.x
    }

    pub fn y(&self) -> &[Jet] {
        &self.y
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eval_x(&self, p: &[f64]) -> Vec<f64> {
        self.x.iter().map(|j| j.eval(p)).collect()
    }

    pub fn eval_y(&self, p: &[f64]) -> Vec<f64> {
        self.y.iter().map(|j| j.eval(p)).collect()
    }

    /// Same fields expanded around `base`, with the order raised to at least
    /// `min_order` by zero padding.
    pub fn recentered(&self, base: &[f64], min_order: usize) -> FieldPair {
        let order = self.order().max(min_order);
        let map = |js: &[Jet]| js.iter().map(|j| j.with_order(order).recenter(base)).collect();
        FieldPair { x: map(&self.x), y: map(&self.y), domain: self.domain.clone() }
    }

    pub fn with_domain(&self, domain: Domain) -> Result<FieldPair> {
        FieldPair::new(self.x.clone(), self.y.clone(), domain)
    }

    pub fn to_spec(&self) -> FieldSpec {
        let terms = |js: &[Jet]| -> Vec<TermSpec> {
            js.iter()
                .enumerate()
                .flat_map(|(a, j)| {
                    j.terms().map(move |(m, c)| TermSpec {
                        component: a,
                        monomial: m.to_vec(),
                        coefficient: Scalar::Number(c),
                    })
                })
                .collect()
        };
        FieldSpec {
            dim: self.dim(),
            order: self.order(),
            base_point: self.base_point().to_vec(),
            domain: self.domain.clone(),
            x: terms(&self.x),
            y: terms(&self.y),
        }
    }
}

/// Field-spec document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub dim: usize,
    pub order: usize,
    pub base_point: Vec<f64>,
    pub domain: Domain,
    #[serde(rename = "X")]
    pub x: Vec<TermSpec>,
    #[serde(rename = "Y")]
    pub y: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub component: usize,
    pub monomial: Vec<u32>,
    pub coefficient: Scalar,
}

impl FieldSpec {
    pub fn to_field_pair(&self) -> Result<FieldPair> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::SpecDimension("dim must be positive".into()));
        }
        if self.base_point.len() != n {
            return Err(Error::SpecDimension(format!("base_point has {} coordinates, dim is {n}", self.base_point.len())));
        }
        if self.domain.dim() != n {
            return Err(Error::SpecDimension(format!("domain has dimension {}, dim is {n}", self.domain.dim())));
        }
        let build = |terms: &[TermSpec], name: &str| -> Result<Vec<Jet>> {
            let mut per: Vec<BTreeMap<Vec<u32>, f64>> = vec![BTreeMap::new(); n];
            for t in terms {
                if t.component >= n {
                    return Err(Error::SpecDimension(format!("{name} component {} out of range", t.component)));
                }
                if t.monomial.len() != n {
                    return Err(Error::SpecDimension(format!("{name} monomial {:?} needs {n} exponents", t.monomial)));
                }
                let deg: u32 = t.monomial.iter().sum();
                if deg as usize > self.order {
                    return Err(Error::SpecDimension(format!(
                        "{name} monomial {:?} has degree {deg} above order {}",
                        t.monomial, self.order
                    )));
                }
                let c = t.coefficient.to_f64().map_err(Error::SpecParse)?;
                if per[t.component].insert(t.monomial.clone(), c).is_some() {
                    return Err(Error::SpecParse(format!(
                        "{name} component {} lists monomial {:?} twice",
                        t.component, t.monomial
                    )));
                }
            }
            per.into_iter()
                .map(|m| Jet::from_terms(n, self.order, &self.base_point, m))
                .collect()
        };
        let x = build(&self.x, "X")?;
        let y = build(&self.y, "Y")?;
        FieldPair::new(x, y, self.domain.clone())
    }
}

pub fn parse_field_spec(text: &str) -> Result<FieldPair> {
    let spec: FieldSpec = serde_json::from_str(text).map_err(|e| Error::SpecParse(e.to_string()))?;
    spec.to_field_pair()
}

pub fn serialize_field_spec(fp: &FieldPair) -> String {
    serde_json::to_string_pretty(&fp.to_spec()).expect("field spec serialises")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSearch {
    pub tol: f64,
    pub seeds_per_axis: usize,
    pub max_iterations: usize,
    /// Jacobian condition number above which a zero is reported as degenerate.
    pub degenerate_condition: f64,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        CriticalSearch { tol: 1e-10, seeds_per_axis: 9, max_iterations: 60, degenerate_condition: 1e12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CriticalCandidate {
    Point { point: Vec<f64>, residual: f64 },
    DegenerateCandidate { point: Vec<f64>, residual: f64, condition: f64 },
}

impl CriticalCandidate {
    pub fn point(&self) -> &[f64] {
        match self {
            CriticalCandidate::Point { point, .. } | CriticalCandidate::DegenerateCandidate { point, .. } => point,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, CriticalCandidate::DegenerateCandidate { .. })
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Zeros of `Y` in the domain, by Newton iteration from a uniform seed grid.
/// Results are sorted lexicographically.
pub fn locate_critical_points(fp: &FieldPair, search: &CriticalSearch) -> Vec<CriticalCandidate> {
    let n = fp.dim();
    let dy: Vec<Vec<Jet>> = fp.y().iter().map(|j| (0..n).map(|a| j.partial(a)).collect()).collect();
    let jac = |p: &[f64]| DMatrix::from_fn(n, n, |g, a| dy[g][a].eval(p));
    let (lo, hi) = fp.domain().bounding_box();
    let span = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);

    let mut found: Vec<CriticalCandidate> = Vec::new();
    for seed in fp.domain().grid(search.seeds_per_axis) {
        let Some(cand) = newton(fp, &jac, seed, search, span) else { continue };
        if !fp.domain().contains_with_slack(cand.point(), 1e-12) {
            continue;
        }
        let window = if cand.is_degenerate() { 10.0 * search.tol.sqrt() } else { 10.0 * search.tol };
        let dup = found.iter().any(|f| {
            let w = if f.is_degenerate() { window.max(10.0 * search.tol.sqrt()) } else { window };
            distance(f.point(), cand.point()) <= w
        });
        if !dup {
            found.push(cand);
        }
    }
    found.sort_by(|a, b| a.point().partial_cmp(b.point()).unwrap_or(std::cmp::Ordering::Equal));
    found
}

fn newton(
    fp: &FieldPair,
    jac: &impl Fn(&[f64]) -> DMatrix<f64>,
    mut x: Vec<f64>,
    search: &CriticalSearch,
    span: f64,
) -> Option<CriticalCandidate> {
    let n = x.len();
    let center: Vec<f64> = {
        let (lo, hi) = fp.domain().bounding_box();
        lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
    };
    let mut polish = 2;
    for _ in 0..search.max_iterations {
        let y = fp.eval_y(&x);
        let res = sup(&y);
        // Jacobian of F(x) = Y(x): dF_g/dx_a = ∂_a Y_g, the transpose of U.
        let j = jac(&x).transpose();
        if res <= search.tol {
            if polish == 0 {
                break;
            }
            polish -= 1;
        }
        let Some(step) = j.clone().lu().solve(&DVector::from_column_slice(&y)) else {
            if res <= search.tol.sqrt() {
                return Some(CriticalCandidate::DegenerateCandidate { point: x, residual: res, condition: f64::INFINITY });
            }
            return None;
        };
        for k in 0..n {
            x[k] -= step[k];
        }
        if x.iter().any(|v| !v.is_finite()) || distance(&x, &center) > 4.0 * span {
            return None;
        }
    }
    let res = sup(&fp.eval_y(&x));
    let cond = condition(&jac(&x));
    if cond > search.degenerate_condition {
        if res <= search.tol.sqrt() {
            return Some(CriticalCandidate::DegenerateCandidate { point: x, residual: res, condition: cond });
        }
        return None;
    }
    if res <= search.tol {
        Some(CriticalCandidate::Point { point: x, residual: res })
    } else {
        None
    }
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    if sv.min() == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / sv.min()
    }
}
