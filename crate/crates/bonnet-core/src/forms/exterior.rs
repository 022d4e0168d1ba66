//! Exterior derivative and pullback.

use super::{ChartDomain, ChartForm, Coefficient, FormError};
use crate::exprlang::Expr;
use std::sync::Arc;

impl ChartForm {
    /// Exterior derivative.
    ///
    /// `d(f dx_I) = sum_j (d f / d x_j) dx_j ^ dx_I` over coordinates `j`
    /// not in `I`, with the sign of inserting `j` into position. Applying
    /// `d` to a top-degree form is an error rather than a silent zero.
    pub fn exterior_derivative(&self) -> Result<ChartForm, FormError> {
        let dim = self.chart().dim();
        if self.degree() == dim {
            return Err(FormError::DerivativeOfTopDegree(
                self.chart().name().to_string(),
            ));
        }
        let mut out = ChartForm::zero(self.chart().clone(), self.degree() + 1)?;
        for (tuple, coefficient) in self.components() {
            for j in 0..dim {
                if tuple.contains(&j) {
                    continue;
                }
                let position = tuple.partition_point(|&i| i < j);
                let mut extended = tuple.to_vec();
                extended.insert(position, j);
                let mut partial = coefficient.partial(j);
                if position % 2 == 1 {
                    partial = partial.neg();
                }
                out.insert(extended, partial)?;
            }
        }
        Ok(out)
    }
}

/// Pull a form back along a coordinate map.
///
/// `map` gives each target coordinate as an expression over the source
/// chart's coordinates. Coefficients are composed with the map; the
/// coordinate differentials pull back to `d(map_t) = sum_j (d map_t / d x_j)
/// dx_j`, so Jacobian minors appear through the wedge and stay symbolic
/// whenever the inputs are symbolic. The map is assumed to land in the
/// target box up to a measure-zero set; this is the caller's responsibility
/// and is not checked, which keeps periodic coefficients (for example of a
/// winding map) usable.
pub fn pullback(
    source: &Arc<ChartDomain>,
    map: &[Expr],
    target_form: &ChartForm,
) -> Result<ChartForm, FormError> {
    let target_dim = target_form.chart().dim();
    if map.len() != target_dim {
        return Err(FormError::MapArityMismatch {
            chart: target_form.chart().name().to_string(),
            got: map.len(),
            want: target_dim,
        });
    }
    let source_dim = source.dim();
    let mut differentials = Vec::with_capacity(target_dim);
    for component in map {
        let mut d = ChartForm::zero(source.clone(), 1)?;
        for j in 0..source_dim {
            let partial = component.differentiate(j);
            if !partial.is_zero() {
                d.insert(vec![j], Coefficient::Symbolic(partial))?;
            }
        }
        differentials.push(d);
    }

    let mut out = ChartForm::zero(source.clone(), target_form.degree())?;
    for (tuple, coefficient) in target_form.components() {
        let mut term = ChartForm::constant(source.clone(), 1.0);
        for &t in tuple {
            term = term.wedge(&differentials[t])?;
        }
        let term = term.scale_by(&coefficient.compose(map)?);
        out = out.add(&term)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use crate::forms::sup_difference;

    fn chart(name: &str, coords: &[&str], lo: f64, hi: f64, covers: bool) -> Arc<ChartDomain> {
        ChartDomain::new(
            name,
            coords.iter().map(|s| s.to_string()).collect(),
            vec![(lo, hi); coords.len()],
            covers,
        )
        .unwrap()
    }

    fn sym(c: &Arc<ChartDomain>, src: &str) -> Coefficient {
        Coefficient::Symbolic(parse(src, c.coordinates()).unwrap())
    }

    /// Independent oracle for the exterior derivative: reconstructs each
    /// output component from finite differences of the *evaluated* input
    /// form, never touching symbolic differentiation.
    fn fd_derivative_component(
        form: &ChartForm,
        out_tuple: &[usize],
        point: &[f64],
    ) -> f64 {
        let mut total = 0.0;
        for (pos, &j) in out_tuple.iter().enumerate() {
            let mut inner: Vec<usize> = out_tuple.to_vec();
            inner.remove(pos);
            let Some(coefficient) = form.coefficient(&inner) else {
                continue;
            };
            let h = 1e-5 * point[j].abs().max(1.0);
            let mut hi = point.to_vec();
            let mut lo = point.to_vec();
            hi[j] += h;
            lo[j] -= h;
            let fd = (coefficient.evaluate(&hi).unwrap() - coefficient.evaluate(&lo).unwrap())
                / (2.0 * h);
            total += if pos % 2 == 0 { fd } else { -fd };
        }
        total
    }

    #[test]
    fn derivative_matches_finite_difference_oracle() {
        let c = chart("space", &["x", "y", "z"], 0.2, 1.8, false);
        let form = ChartForm::from_components(
            c.clone(),
            1,
            [
                (vec![0], sym(&c, "sin(x*y)")),
                (vec![1], sym(&c, "x^2 + z")),
                (vec![2], sym(&c, "exp(0.5*y) * cos(z)")),
            ],
        )
        .unwrap();
        let d = form.exterior_derivative().unwrap();
        for point in c.interior_grid(3) {
            for (tuple, value) in d.evaluate(&point).unwrap() {
                let oracle = fd_derivative_component(&form, &tuple, &point);
                assert!(
                    (value - oracle).abs() < 1e-6,
                    "tuple {tuple:?} at {point:?}: {value} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn derivative_of_connection_form_on_frozen_example() {
        // d(cos(theta) dphi) = -sin(theta) dtheta^dphi.
        let c = chart("polar", &["theta", "phi"], 0.1, 3.0, false);
        let omega =
            ChartForm::from_components(c.clone(), 1, [(vec![1], sym(&c, "cos(theta)"))]).unwrap();
        let d = omega.exterior_derivative().unwrap();
        let p = [1.1, 2.2];
        let got = d.evaluate(&p).unwrap();
        assert_eq!(got.len(), 1);
        assert!((got[0].1 - (-f64::sin(1.1))).abs() < 1e-15);
    }

    #[test]
    fn d_squared_vanishes_symbolically() {
        let c = chart("space", &["x", "y", "z"], 0.2, 1.8, false);
        let form = ChartForm::from_components(
            c.clone(),
            1,
            [
                (vec![0], sym(&c, "x*y*z")),
                (vec![1], sym(&c, "sin(x) + cos(y*z)")),
                (vec![2], sym(&c, "exp(0.3*x*y)")),
            ],
        )
        .unwrap();
        let dd = form
            .exterior_derivative()
            .unwrap()
            .exterior_derivative()
            .unwrap();
        assert!(dd.sup_norm_on_grid(4).unwrap() < 1e-12);
    }

    #[test]
    fn d_squared_vanishes_with_opaque_coefficients() {
        let c = chart("plane3", &["x", "y", "z"], 0.2, 1.8, false);
        let form = ChartForm::from_components(
            c.clone(),
            1,
            [(
                vec![0],
                Coefficient::opaque(|p| Ok((p[0] * p[1]).sin() + p[2] * p[2])),
            )],
        )
        .unwrap();
        let dd = form
            .exterior_derivative()
            .unwrap()
            .exterior_derivative()
            .unwrap();
        // Nested finite differences: looser tolerance.
        assert!(dd.sup_norm_on_grid(3).unwrap() < 1e-3);
    }

    #[test]
    fn top_degree_derivative_is_an_error() {
        let c = chart("plane", &["x", "y"], 0.0, 1.0, false);
        let dx = ChartForm::coordinate_differential(c.clone(), 0).unwrap();
        let dy = ChartForm::coordinate_differential(c, 1).unwrap();
        let top = dx.wedge(&dy).unwrap();
        assert!(matches!(
            top.exterior_derivative(),
            Err(FormError::DerivativeOfTopDegree(_))
        ));
    }

    #[test]
    fn leibniz_rule_on_symbolic_forms() {
        let c = chart("space", &["x", "y", "z"], 0.2, 1.8, false);
        let a = ChartForm::from_components(
            c.clone(),
            1,
            [(vec![0], sym(&c, "sin(y)")), (vec![2], sym(&c, "x*y"))],
        )
        .unwrap();
        let b = ChartForm::from_components(
            c.clone(),
            1,
            [(vec![1], sym(&c, "cos(x*z)"))],
        )
        .unwrap();
        let lhs = a.wedge(&b).unwrap().exterior_derivative().unwrap();
        let da_b = a.exterior_derivative().unwrap().wedge(&b).unwrap();
        // deg a = 1, so the sign on a ^ db is -1.
        let a_db = a.wedge(&b.exterior_derivative().unwrap()).unwrap().scale(-1.0);
        let rhs = da_b.add(&a_db).unwrap();
        assert!(sup_difference(&lhs, &rhs, 4).unwrap() < 1e-6);
    }

    #[test]
    fn pullback_composes_coefficients_and_jacobian() {
        // Map (u, v) -> (u + v, u*v); pull back y dx.
        let source = chart("source", &["u", "v"], 0.2, 1.5, false);
        let target = chart("target", &["x", "y"], 0.0, 10.0, false);
        let form =
            ChartForm::from_components(target.clone(), 1, [(vec![0], sym(&target, "y"))]).unwrap();
        let map = [
            parse("u + v", source.coordinates()).unwrap(),
            parse("u*v", source.coordinates()).unwrap(),
        ];
        let pulled = pullback(&source, &map, &form).unwrap();
        // f*(y dx) = uv d(u+v) = uv du + uv dv.
        let p = [0.7, 1.3];
        let got = pulled.evaluate(&p).unwrap();
        assert!((got[0].1 - 0.7 * 1.3).abs() < 1e-15);
        assert!((got[1].1 - 0.7 * 1.3).abs() < 1e-15);
    }

    #[test]
    fn pullback_scales_area_by_jacobian_determinant() {
        // Map (u, v) -> (2u, 3v) sends dx^dy to 6 du^dv.
        let source = chart("source", &["u", "v"], 0.1, 0.9, false);
        let target = chart("target", &["x", "y"], 0.0, 3.0, false);
        let dx = ChartForm::coordinate_differential(target.clone(), 0).unwrap();
        let dy = ChartForm::coordinate_differential(target.clone(), 1).unwrap();
        let area = dx.wedge(&dy).unwrap();
        let map = [
            parse("2*u", source.coordinates()).unwrap(),
            parse("3*v", source.coordinates()).unwrap(),
        ];
        let pulled = pullback(&source, &map, &area).unwrap();
        let got = pulled.evaluate(&[0.5, 0.5]).unwrap();
        assert_eq!(got, vec![(vec![0, 1], 6.0)]);
    }

    #[test]
    fn pullback_is_a_ring_morphism_and_commutes_with_d() {
        let source = chart("source", &["u", "v"], 0.2, 1.4, false);
        let target = chart("target", &["x", "y"], -10.0, 10.0, false);
        let a = ChartForm::from_components(
            target.clone(),
            1,
            [(vec![0], sym(&target, "sin(y)")), (vec![1], sym(&target, "x"))],
        )
        .unwrap();
        let b = ChartForm::from_components(
            target.clone(),
            1,
            [(vec![1], sym(&target, "x*y"))],
        )
        .unwrap();
        let map = [
            parse("u^2 - v", source.coordinates()).unwrap(),
            parse("u + 3*v", source.coordinates()).unwrap(),
        ];
        let lhs = pullback(&source, &map, &a.wedge(&b).unwrap()).unwrap();
        let rhs = pullback(&source, &map, &a)
            .unwrap()
            .wedge(&pullback(&source, &map, &b).unwrap())
            .unwrap();
        assert!(sup_difference(&lhs, &rhs, 5).unwrap() < 1e-10);

        let d_then_pull = pullback(&source, &map, &a.exterior_derivative().unwrap()).unwrap();
        let pull_then_d = pullback(&source, &map, &a)
            .unwrap()
            .exterior_derivative()
            .unwrap();
        assert!(sup_difference(&d_then_pull, &pull_then_d, 5).unwrap() < 1e-6);
    }

    #[test]
    fn pullback_arity_is_checked() {
        let source = chart("source", &["u", "v"], 0.0, 1.0, false);
        let target = chart("target", &["x", "y"], 0.0, 1.0, false);
        let form = ChartForm::zero(target, 1).unwrap();
        let map = [parse("u", source.coordinates()).unwrap()];
        assert!(matches!(
            pullback(&source, &map, &form),
            Err(FormError::MapArityMismatch { .. })
        ));
    }
}
