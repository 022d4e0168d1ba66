//! Differential forms on boxed coordinate charts.
//!
//! A [`ChartForm`] is a degree-`p` form on a single [`ChartDomain`]: a sparse
//! table from strictly increasing index tuples (one index per coordinate
//! differential, zero-based) to coefficients. Coefficients are either
//! symbolic expressions, which differentiate exactly, or opaque functions,
//! which differentiate by central finite differences. An absent tuple is the
//! zero coefficient.
//!
//! The orientation convention is fixed once and for all: the coordinate
//! order of the chart is positively oriented, so the top tuple
//! `(0, 1, ..., dim-1)` carries the volume sign used by integration.

mod exterior;
mod integrate;

use crate::exprlang::{Expr, EvalError};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Errors raised by form construction and algebra.
#[derive(Debug, Error)]
pub enum FormError {
    #[error("charts differ: `{0}` vs `{1}`")]
    ChartMismatch(String, String),
    #[error("degrees differ: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("degree {degree} exceeds dimension {dim} of chart `{chart}`")]
    DegreeOverflow {
        chart: String,
        degree: usize,
        dim: usize,
    },
    #[error("wedge of degrees {0} and {1} exceeds dimension {2}")]
    WedgeOverflow(usize, usize, usize),
    #[error("exterior derivative of a top-degree form on `{0}`")]
    DerivativeOfTopDegree(String),
    #[error("point {point:?} lies outside chart `{chart}`")]
    PointOutsideChart { chart: String, point: Vec<f64> },
    #[error("chart `{0}` is not marked as covering the manifold")]
    ChartNotCovering(String),
    #[error("form of degree {degree} on `{chart}` is not top degree {dim}")]
    NotTopDegree {
        chart: String,
        degree: usize,
        dim: usize,
    },
    #[error("index tuple {0:?} is not strictly increasing within dimension {1}")]
    BadIndexTuple(Vec<usize>, usize),
    #[error("pullback map has {got} components but target chart `{chart}` has dimension {want}")]
    MapArityMismatch {
        chart: String,
        got: usize,
        want: usize,
    },
    #[error("resolution must be at least 1 per axis")]
    BadResolution,
    #[error("grid of {per_axis}^{dim} cells is not addressable")]
    GridTooLarge { per_axis: usize, dim: usize },
    #[error("chart `{chart}` is invalid: {reason}")]
    BadChart { chart: String, reason: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A rectangular coordinate chart: named coordinates, one open interval per
/// coordinate, and a flag marking the chart whose box covers the manifold up
/// to a measure-zero set (the chart integrals are computed on).
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    name: String,
    coordinates: Vec<String>,
    intervals: Vec<(f64, f64)>,
    covers_manifold: bool,
}

impl ChartDomain {
    pub fn new(
        name: impl Into<String>,
        coordinates: Vec<String>,
        intervals: Vec<(f64, f64)>,
        covers_manifold: bool,
    ) -> Result<Arc<ChartDomain>, FormError> {
        let name = name.into();
        if coordinates.is_empty() || coordinates.len() != intervals.len() {
            return Err(FormError::BadChart {
                chart: name,
                reason: format!(
                    "{} coordinates but {} intervals",
                    coordinates.len(),
                    intervals.len()
                ),
            });
        }
        for (i, c) in coordinates.iter().enumerate() {
            if coordinates[..i].contains(c) {
                return Err(FormError::BadChart {
                    chart: name,
                    reason: format!("duplicate coordinate `{c}`"),
                });
            }
        }
        for (c, &(lo, hi)) in coordinates.iter().zip(&intervals) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(FormError::BadChart {
                    chart: name,
                    reason: format!("interval ({lo}, {hi}) for `{c}` is not a finite box"),
                });
            }
        }
        Ok(Arc::new(ChartDomain {
            name,
            coordinates,
            intervals,
            covers_manifold,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn covers_manifold(&self) -> bool {
        self.covers_manifold
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.intervals)
                .all(|(x, &(lo, hi))| *x >= lo && *x <= hi)
    }

    /// Midpoint sample grid with `per_axis` interior points per coordinate.
    pub fn interior_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        crate::quadrature::interior_grid(&self.intervals, per_axis)
    }
}

/// Two chart handles denote the same chart if they are the same allocation
/// or structurally equal.
pub fn same_chart(a: &Arc<ChartDomain>, b: &Arc<ChartDomain>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Opaque coefficient: any point function on the chart box.
pub type OpaqueFn = Arc<dyn Fn(&[f64]) -> Result<f64, EvalError> + Send + Sync>;

/// A single form coefficient.
///
/// Symbolic coefficients stay symbolic through sums, products, derivatives
/// and substitution. Any combination involving an opaque coefficient decays
/// to an opaque one, and its derivatives are taken by central finite
/// differences with step `1e-5 * max(1, |x_j|)`.
#[derive(Clone)]
pub enum Coefficient {
    Symbolic(Expr),
    Opaque(OpaqueFn),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Symbolic(e) => write!(f, "Symbolic({e})"),
            Coefficient::Opaque(_) => write!(f, "Opaque(<fn>)"),
        }
    }
}

impl From<Expr> for Coefficient {
    fn from(e: Expr) -> Self {
        Coefficient::Symbolic(e)
    }
}

impl Coefficient {
    pub fn constant(x: f64) -> Coefficient {
        Coefficient::Symbolic(Expr::Number(x))
    }

    pub fn opaque(f: impl Fn(&[f64]) -> Result<f64, EvalError> + Send + Sync + 'static) -> Self {
        Coefficient::Opaque(Arc::new(f))
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, EvalError> {
        match self {
            Coefficient::Symbolic(e) => e.eval(point),
            Coefficient::Opaque(f) => f(point),
        }
    }

    fn is_structural_zero(&self) -> bool {
        matches!(self, Coefficient::Symbolic(e) if e.is_zero())
    }

    pub fn add(&self, other: &Coefficient) -> Coefficient {
        match (self, other) {
            (Coefficient::Symbolic(a), Coefficient::Symbolic(b)) => {
                Coefficient::Symbolic(crate::exprlang::add(a.clone(), b.clone()))
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Coefficient::opaque(move |p| Ok(a.evaluate(p)? + b.evaluate(p)?))
            }
        }
    }

    pub fn mul(&self, other: &Coefficient) -> Coefficient {
        match (self, other) {
            (Coefficient::Symbolic(a), Coefficient::Symbolic(b)) => {
                Coefficient::Symbolic(crate::exprlang::mul(a.clone(), b.clone()))
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Coefficient::opaque(move |p| Ok(a.evaluate(p)? * b.evaluate(p)?))
            }
        }
    }

    pub fn neg(&self) -> Coefficient {
        match self {
            Coefficient::Symbolic(a) => Coefficient::Symbolic(crate::exprlang::neg(a.clone())),
            Coefficient::Opaque(_) => {
                let a = self.clone();
                Coefficient::opaque(move |p| Ok(-a.evaluate(p)?))
            }
        }
    }

    pub fn scale(&self, k: f64) -> Coefficient {
        self.mul(&Coefficient::constant(k))
    }

    /// Partial derivative in coordinate `coord`: exact for symbolic
    /// coefficients, central finite difference for opaque ones.
    pub fn partial(&self, coord: usize) -> Coefficient {
        match self {
            Coefficient::Symbolic(e) => Coefficient::Symbolic(e.differentiate(coord)),
            Coefficient::Opaque(f) => {
                let f = f.clone();
                Coefficient::opaque(move |p| {
                    let h = 1e-5 * p[coord].abs().max(1.0);
                    let mut hi = p.to_vec();
                    let mut lo = p.to_vec();
                    hi[coord] += h;
                    lo[coord] -= h;
                    Ok((f(&hi)? - f(&lo)?) / (2.0 * h))
                })
            }
        }
    }

    /// Precompose with a coordinate map given as one expression per target
    /// coordinate, each over the source coordinates.
    pub fn compose(&self, map: &[Expr]) -> Result<Coefficient, EvalError> {
        Ok(match self {
            Coefficient::Symbolic(e) => Coefficient::Symbolic(e.substitute(map)?),
            Coefficient::Opaque(f) => {
                let f = f.clone();
                let map = map.to_vec();
                Coefficient::opaque(move |p| {
                    let mut target = Vec::with_capacity(map.len());
                    for component in &map {
                        target.push(component.eval(p)?);
                    }
                    f(&target)
                })
            }
        })
    }
}

/// All strictly increasing index tuples of length `degree` in `0..dim`,
/// in lexicographic (canonical) order.
pub fn increasing_tuples(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn build(dim: usize, degree: usize, start: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == degree {
            out.push(prefix.clone());
            return;
        }
        for i in start..dim {
            prefix.push(i);
            build(dim, degree, i + 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    build(dim, degree, 0, &mut Vec::new(), &mut out);
    out
}

/// A differential form of fixed degree on one chart.
#[derive(Debug, Clone)]
pub struct ChartForm {
    chart: Arc<ChartDomain>,
    degree: usize,
    coefficients: BTreeMap<Vec<usize>, Coefficient>,
}

impl ChartForm {
    /// The zero form of the given degree.
    pub fn zero(chart: Arc<ChartDomain>, degree: usize) -> Result<ChartForm, FormError> {
        if degree > chart.dim() {
            return Err(FormError::DegreeOverflow {
                chart: chart.name().to_string(),
                degree,
                dim: chart.dim(),
            });
        }
        Ok(ChartForm {
            chart,
            degree,
            coefficients: BTreeMap::new(),
        })
    }

    /// A degree-zero form with constant value.
    pub fn constant(chart: Arc<ChartDomain>, value: f64) -> ChartForm {
        let mut form = ChartForm::zero(chart, 0).expect("degree 0 always fits");
        form.insert(vec![], Coefficient::constant(value))
            .expect("empty tuple is valid");
        form
    }

    /// The coordinate differential `dx_i`.
    pub fn coordinate_differential(
        chart: Arc<ChartDomain>,
        i: usize,
    ) -> Result<ChartForm, FormError> {
        let dim = chart.dim();
        if i >= dim {
            return Err(FormError::BadIndexTuple(vec![i], dim));
        }
        let mut form = ChartForm::zero(chart, 1)?;
        form.insert(vec![i], Coefficient::constant(1.0))?;
        Ok(form)
    }

    /// Build a form from explicit tuple/coefficient pairs.
    pub fn from_components(
        chart: Arc<ChartDomain>,
        degree: usize,
        components: impl IntoIterator<Item = (Vec<usize>, Coefficient)>,
    ) -> Result<ChartForm, FormError> {
        let mut form = ChartForm::zero(chart, degree)?;
        for (tuple, coefficient) in components {
            form.insert(tuple, coefficient)?;
        }
        Ok(form)
    }

    /// A 1-form from one coefficient per coordinate.
    pub fn one_form(
        chart: Arc<ChartDomain>,
        components: Vec<Coefficient>,
    ) -> Result<ChartForm, FormError> {
        if components.len() != chart.dim() {
            return Err(FormError::DegreeMismatch(components.len(), chart.dim()));
        }
        ChartForm::from_components(
            chart,
            1,
            components.into_iter().enumerate().map(|(i, c)| (vec![i], c)),
        )
    }

    fn check_tuple(&self, tuple: &[usize]) -> Result<(), FormError> {
        let ok = tuple.len() == self.degree
            && tuple.windows(2).all(|w| w[0] < w[1])
            && tuple.iter().all(|&i| i < self.chart.dim());
        if ok {
            Ok(())
        } else {
            Err(FormError::BadIndexTuple(tuple.to_vec(), self.chart.dim()))
        }
    }

    /// Add a coefficient on a strictly increasing tuple, combining with any
    /// existing coefficient. Structural zeros are pruned.
    pub fn insert(&mut self, tuple: Vec<usize>, coefficient: Coefficient) -> Result<(), FormError> {
        self.check_tuple(&tuple)?;
        let combined = match self.coefficients.remove(&tuple) {
            Some(existing) => existing.add(&coefficient),
            None => coefficient,
        };
        if !combined.is_structural_zero() {
            self.coefficients.insert(tuple, combined);
        }
        Ok(())
    }

    pub fn chart(&self) -> &Arc<ChartDomain> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Sparse view of the non-zero coefficients in canonical tuple order.
    pub fn components(&self) -> impl Iterator<Item = (&[usize], &Coefficient)> {
        self.coefficients.iter().map(|(t, c)| (t.as_slice(), c))
    }

    pub fn coefficient(&self, tuple: &[usize]) -> Option<&Coefficient> {
        self.coefficients.get(tuple)
    }

    fn require_same_shape(&self, other: &ChartForm) -> Result<(), FormError> {
        if !same_chart(&self.chart, &other.chart) {
            return Err(FormError::ChartMismatch(
                self.chart.name().to_string(),
                other.chart.name().to_string(),
            ));
        }
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch(self.degree, other.degree));
        }
        Ok(())
    }

    pub fn add(&self, other: &ChartForm) -> Result<ChartForm, FormError> {
        self.require_same_shape(other)?;
        let mut out = self.clone();
        for (tuple, coefficient) in &other.coefficients {
            out.insert(tuple.clone(), coefficient.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> ChartForm {
        let mut out = ChartForm::zero(self.chart.clone(), self.degree).expect("same shape");
        for (tuple, coefficient) in &self.coefficients {
            out.coefficients.insert(tuple.clone(), coefficient.neg());
        }
        out
    }

    pub fn sub(&self, other: &ChartForm) -> Result<ChartForm, FormError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: f64) -> ChartForm {
        let mut out = ChartForm::zero(self.chart.clone(), self.degree).expect("same shape");
        for (tuple, coefficient) in &self.coefficients {
            let scaled = coefficient.scale(k);
            if !scaled.is_structural_zero() {
                out.coefficients.insert(tuple.clone(), scaled);
            }
        }
        out
    }

    /// Multiply every coefficient by a degree-zero coefficient function.
    pub fn scale_by(&self, factor: &Coefficient) -> ChartForm {
        let mut out = ChartForm::zero(self.chart.clone(), self.degree).expect("same shape");
        for (tuple, coefficient) in &self.coefficients {
            out.coefficients
                .insert(tuple.clone(), coefficient.mul(factor));
        }
        out
    }

    /// Exterior product. Errors if the result degree would exceed the chart
    /// dimension; a wedge that is identically zero by degree count is a
    /// caller bug, not a silent zero.
    pub fn wedge(&self, other: &ChartForm) -> Result<ChartForm, FormError> {
        if !same_chart(&self.chart, &other.chart) {
            return Err(FormError::ChartMismatch(
                self.chart.name().to_string(),
                other.chart.name().to_string(),
            ));
        }
        let degree = self.degree + other.degree;
        if degree > self.chart.dim() {
            return Err(FormError::WedgeOverflow(
                self.degree,
                other.degree,
                self.chart.dim(),
            ));
        }
        let mut out = ChartForm::zero(self.chart.clone(), degree)?;
        for (left, a) in &self.coefficients {
            for (right, b) in &other.coefficients {
                if let Some((tuple, sign)) = merge_tuples(left, right) {
                    let mut coefficient = a.mul(b);
                    if sign < 0 {
                        coefficient = coefficient.neg();
                    }
                    out.insert(tuple, coefficient)?;
                }
            }
        }
        Ok(out)
    }

    /// Evaluate every canonical component at a point inside the chart box.
    ///
    /// Returns the complete coefficient vector in canonical increasing-tuple
    /// order, with zeros for absent tuples.
    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<(Vec<usize>, f64)>, FormError> {
        if !self.chart.contains(point) {
            return Err(FormError::PointOutsideChart {
                chart: self.chart.name().to_string(),
                point: point.to_vec(),
            });
        }
        let mut out = Vec::new();
        for tuple in increasing_tuples(self.chart.dim(), self.degree) {
            let value = match self.coefficients.get(&tuple) {
                Some(c) => c.evaluate(point)?,
                None => 0.0,
            };
            out.push((tuple, value));
        }
        Ok(out)
    }

    /// Largest absolute coefficient value over the interior sample grid.
    pub fn sup_norm_on_grid(&self, per_axis: usize) -> Result<f64, FormError> {
        let mut sup: f64 = 0.0;
        for point in self.chart.interior_grid(per_axis) {
            for coefficient in self.coefficients.values() {
                sup = sup.max(coefficient.evaluate(&point)?.abs());
            }
        }
        Ok(sup)
    }
}

/// Merge two disjoint increasing tuples into one, returning the permutation
/// sign that sorts the concatenation; `None` if they share an index.
fn merge_tuples(left: &[usize], right: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        if left[i] == right[j] {
            return None;
        }
        if left[i] < right[j] {
            out.push(left[i]);
            i += 1;
        } else {
            // right[j] jumps over the remaining entries of `left`.
            inversions += left.len() - i;
            out.push(right[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&left[i..]);
    out.extend_from_slice(&right[j..]);
    let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
    Some((out, sign))
}

/// Sup over a sample grid of the componentwise difference of two forms.
pub fn sup_difference(a: &ChartForm, b: &ChartForm, per_axis: usize) -> Result<f64, FormError> {
    a.require_same_shape(b)?;
    let zero = Coefficient::constant(0.0);
    let mut tuples: Vec<Vec<usize>> = a.coefficients.keys().cloned().collect();
    for tuple in b.coefficients.keys() {
        if !tuples.contains(tuple) {
            tuples.push(tuple.clone());
        }
    }
    let mut sup: f64 = 0.0;
    for point in a.chart.interior_grid(per_axis) {
        for tuple in &tuples {
            let av = a.coefficients.get(tuple).unwrap_or(&zero).evaluate(&point)?;
            let bv = b.coefficients.get(tuple).unwrap_or(&zero).evaluate(&point)?;
            sup = sup.max((av - bv).abs());
        }
    }
    Ok(sup)
}

pub use exterior::pullback;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;

    fn xy_chart() -> Arc<ChartDomain> {
        ChartDomain::new(
            "plane",
            vec!["x".into(), "y".into()],
            vec![(0.1, 1.9), (0.1, 1.9)],
            true,
        )
        .unwrap()
    }

    fn xyz_chart() -> Arc<ChartDomain> {
        ChartDomain::new(
            "space",
            vec!["x".into(), "y".into(), "z".into()],
            vec![(0.1, 1.9), (0.1, 1.9), (0.1, 1.9)],
            false,
        )
        .unwrap()
    }

    fn sym(chart: &Arc<ChartDomain>, src: &str) -> Coefficient {
        Coefficient::Symbolic(parse(src, chart.coordinates()).unwrap())
    }

    #[test]
    fn chart_construction_rejects_bad_boxes() {
        assert!(ChartDomain::new("c", vec!["x".into()], vec![(1.0, 1.0)], false).is_err());
        assert!(ChartDomain::new("c", vec!["x".into(), "x".into()], vec![(0.0, 1.0); 2], false)
            .is_err());
        assert!(ChartDomain::new("c", vec!["x".into()], vec![], false).is_err());
    }

    #[test]
    fn tuples_must_be_strictly_increasing() {
        let chart = xy_chart();
        let mut form = ChartForm::zero(chart.clone(), 2).unwrap();
        assert!(form.insert(vec![1, 0], Coefficient::constant(1.0)).is_err());
        assert!(form.insert(vec![0, 0], Coefficient::constant(1.0)).is_err());
        assert!(form.insert(vec![0, 2], Coefficient::constant(1.0)).is_err());
        assert!(form.insert(vec![0, 1], Coefficient::constant(1.0)).is_ok());
    }

    #[test]
    fn degree_above_dimension_is_rejected() {
        let chart = xy_chart();
        assert!(matches!(
            ChartForm::zero(chart, 3),
            Err(FormError::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn add_requires_matching_shape() {
        let chart = xy_chart();
        let zero1 = ChartForm::zero(chart.clone(), 1).unwrap();
        let zero2 = ChartForm::zero(chart.clone(), 2).unwrap();
        assert!(matches!(zero1.add(&zero2), Err(FormError::DegreeMismatch(1, 2))));
        let other = ChartForm::zero(xyz_chart(), 1).unwrap();
        assert!(matches!(zero1.add(&other), Err(FormError::ChartMismatch(..))));
    }

    #[test]
    fn wedge_of_coordinate_differentials_is_signed_volume() {
        let chart = xy_chart();
        let dx = ChartForm::coordinate_differential(chart.clone(), 0).unwrap();
        let dy = ChartForm::coordinate_differential(chart.clone(), 1).unwrap();
        let p = [0.5, 0.75];
        let dxdy = dx.wedge(&dy).unwrap();
        assert_eq!(dxdy.evaluate(&p).unwrap(), vec![(vec![0, 1], 1.0)]);
        let dydx = dy.wedge(&dx).unwrap();
        assert_eq!(dydx.evaluate(&p).unwrap(), vec![(vec![0, 1], -1.0)]);
        // Repeated differential: over-degree is an error, not a zero.
        assert!(matches!(
            dxdy.wedge(&dx),
            Err(FormError::WedgeOverflow(2, 1, 2))
        ));
    }

    #[test]
    fn wedge_on_frozen_example() {
        // (x dy) ^ (y dx) = -x*y dx^dy.
        let chart = xy_chart();
        let a = ChartForm::from_components(chart.clone(), 1, [(vec![1], sym(&chart, "x"))]).unwrap();
        let b = ChartForm::from_components(chart.clone(), 1, [(vec![0], sym(&chart, "y"))]).unwrap();
        let w = a.wedge(&b).unwrap();
        let p = [1.3, 0.7];
        let got = w.evaluate(&p).unwrap();
        assert_eq!(got.len(), 1);
        assert!((got[0].1 - (-1.3 * 0.7)).abs() < 1e-15);
    }

    #[test]
    fn three_dimensional_wedge_signs() {
        let chart = xyz_chart();
        let dx = ChartForm::coordinate_differential(chart.clone(), 0).unwrap();
        let dy = ChartForm::coordinate_differential(chart.clone(), 1).unwrap();
        let dz = ChartForm::coordinate_differential(chart.clone(), 2).unwrap();
        let p = [0.5, 0.5, 0.5];
        // dz ^ dx = -dx^dz: sorting (2,0) into (0,2) is one inversion.
        let zx = dz.wedge(&dx).unwrap();
        let component: Vec<(Vec<usize>, f64)> = zx
            .evaluate(&p)
            .unwrap()
            .into_iter()
            .filter(|(_, v)| *v != 0.0)
            .collect();
        assert_eq!(component, vec![(vec![0, 2], -1.0)]);
        // Associativity on basis forms: (dx^dy)^dz == dx^(dy^dz).
        let left = dx.wedge(&dy).unwrap().wedge(&dz).unwrap();
        let right = dx.wedge(&dy.wedge(&dz).unwrap()).unwrap();
        assert_eq!(sup_difference(&left, &right, 2).unwrap(), 0.0);
    }

    #[test]
    fn degree_zero_wedge_is_pointwise_product() {
        let chart = xy_chart();
        let f = ChartForm::from_components(chart.clone(), 0, [(vec![], sym(&chart, "x + y"))])
            .unwrap();
        let g = ChartForm::from_components(chart.clone(), 0, [(vec![], sym(&chart, "x*y"))])
            .unwrap();
        let fg = f.wedge(&g).unwrap();
        let p = [0.4, 1.5];
        let got = fg.evaluate(&p).unwrap()[0].1;
        assert!((got - (0.4 + 1.5) * (0.4 * 1.5)).abs() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_outside_points_and_reports_zero_form() {
        let chart = xy_chart();
        let zero = ChartForm::zero(chart.clone(), 1).unwrap();
        assert_eq!(
            zero.evaluate(&[0.5, 0.5]).unwrap(),
            vec![(vec![0], 0.0), (vec![1], 0.0)]
        );
        assert!(matches!(
            zero.evaluate(&[5.0, 0.5]),
            Err(FormError::PointOutsideChart { .. })
        ));
    }

    #[test]
    fn opaque_and_symbolic_coefficients_mix() {
        let chart = xy_chart();
        let mut form = ChartForm::zero(chart.clone(), 1).unwrap();
        form.insert(vec![0], sym(&chart, "x^2")).unwrap();
        form.insert(vec![0], Coefficient::opaque(|p| Ok(p[1]))).unwrap();
        let p = [1.5, 0.25];
        let got = form.evaluate(&p).unwrap();
        assert!((got[0].1 - (1.5 * 1.5 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn scale_by_matches_wedge_with_degree_zero_form() {
        let chart = xy_chart();
        let a = ChartForm::from_components(
            chart.clone(),
            1,
            [(vec![0], sym(&chart, "sin(x)")), (vec![1], sym(&chart, "y"))],
        )
        .unwrap();
        let factor = sym(&chart, "x + 2");
        let f0 = ChartForm::from_components(chart.clone(), 0, [(vec![], factor.clone())]).unwrap();
        let via_scale = a.scale_by(&factor);
        let via_wedge = f0.wedge(&a).unwrap();
        assert!(sup_difference(&via_scale, &via_wedge, 5).unwrap() < 1e-15);
    }

    #[test]
    fn merge_tuples_counts_inversions() {
        assert_eq!(merge_tuples(&[0], &[1]), Some((vec![0, 1], 1)));
        assert_eq!(merge_tuples(&[1], &[0]), Some((vec![0, 1], -1)));
        assert_eq!(merge_tuples(&[0, 2], &[1, 3]), Some((vec![0, 1, 2, 3], -1)));
        assert_eq!(merge_tuples(&[2, 3], &[0, 1]), Some((vec![0, 1, 2, 3], 1)));
        assert_eq!(merge_tuples(&[0, 1], &[1, 2]), None);
    }

    #[test]
    fn increasing_tuples_are_canonical() {
        assert_eq!(
            increasing_tuples(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(increasing_tuples(3, 0), vec![Vec::<usize>::new()]);
    }
}
