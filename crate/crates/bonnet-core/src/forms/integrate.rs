//! Midpoint integration of top-degree forms.

use super::{ChartForm, FormError};
use crate::quadrature;

impl ChartForm {
    /// Integrate a top-degree form over its chart box with the tensor-product
    /// midpoint rule, `per_axis` cells per coordinate.
    ///
    /// The chart must be flagged as covering the manifold; integrating over a
    /// partial chart would silently drop mass. Orientation is the increasing
    /// coordinate order, so the result is the signed integral of the single
    /// top coefficient. Cells may be evaluated in parallel but are always
    /// reduced in a fixed pairwise order, so the value is bit-stable across
    /// thread counts.
    pub fn integrate_top_form(&self, per_axis: usize) -> Result<f64, FormError> {
        self.integrate_impl(per_axis, false)
    }

    /// Sequential twin of [`integrate_top_form`](Self::integrate_top_form);
    /// bit-identical result, used for baseline timing.
    pub fn integrate_top_form_seq(&self, per_axis: usize) -> Result<f64, FormError> {
        self.integrate_impl(per_axis, true)
    }

    fn integrate_impl(&self, per_axis: usize, force_seq: bool) -> Result<f64, FormError> {
        let chart = self.chart();
        let dim = chart.dim();
        if !chart.covers_manifold() {
            return Err(FormError::ChartNotCovering(chart.name().to_string()));
        }
        if self.degree() != dim {
            return Err(FormError::NotTopDegree {
                chart: chart.name().to_string(),
                degree: self.degree(),
                dim,
            });
        }
        if per_axis == 0 {
            return Err(FormError::BadResolution);
        }
        if dim > 16 {
            return Err(FormError::GridTooLarge { per_axis, dim });
        }
        let cells = quadrature::cell_count(dim, per_axis)
            .ok_or(FormError::GridTooLarge { per_axis, dim })?;

        let top: Vec<usize> = (0..dim).collect();
        let Some(coefficient) = self.coefficient(&top) else {
            return Ok(0.0);
        };

        let intervals = chart.intervals().to_vec();
        let cell_volume: f64 = intervals
            .iter()
            .map(|&(lo, hi)| (hi - lo) / per_axis as f64)
            .product();

        let eval_cell = |index: usize| -> Result<f64, FormError> {
            let mut point = [0.0f64; 16];
            let point = &mut point[..dim];
            quadrature::cell_midpoint(&intervals, per_axis, index, point);
            Ok(coefficient.evaluate(point)?)
        };

        let sum = if force_seq {
            quadrature::try_sum_cells_seq(cells, eval_cell)?
        } else {
            quadrature::try_sum_cells(cells, eval_cell)?
        };
        Ok(sum * cell_volume)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use crate::forms::{ChartDomain, Coefficient};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn sphere_box(covers: bool) -> Arc<ChartDomain> {
        ChartDomain::new(
            "sphere",
            vec!["theta".into(), "phi".into()],
            vec![(0.0, PI), (0.0, 2.0 * PI)],
            covers,
        )
        .unwrap()
    }

    fn sin_theta_area(chart: &Arc<ChartDomain>) -> ChartForm {
        ChartForm::from_components(
            chart.clone(),
            2,
            [(
                vec![0, 1],
                Coefficient::Symbolic(parse("sin(theta)", chart.coordinates()).unwrap()),
            )],
        )
        .unwrap()
    }

    #[test]
    fn round_sphere_area_form_integrates_to_4pi() {
        let chart = sphere_box(true);
        let area = sin_theta_area(&chart);
        let got = area.integrate_top_form(256).unwrap();
        assert!((got - 4.0 * PI).abs() < 1e-4, "got {got}");
    }

    #[test]
    fn doubling_resolution_shrinks_midpoint_error() {
        let chart = sphere_box(true);
        let area = sin_theta_area(&chart);
        let reference = 4.0 * PI;
        let coarse = (area.integrate_top_form(64).unwrap() - reference).abs();
        let fine = (area.integrate_top_form(128).unwrap() - reference).abs();
        assert!(coarse / fine >= 3.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn parallel_and_sequential_integrals_are_bit_identical() {
        let chart = sphere_box(true);
        let area = sin_theta_area(&chart);
        let par = area.integrate_top_form(128).unwrap();
        let seq = area.integrate_top_form_seq(128).unwrap();
        assert_eq!(par.to_bits(), seq.to_bits());
    }

    #[test]
    fn zero_form_integrates_to_zero() {
        let chart = sphere_box(true);
        let zero = ChartForm::zero(chart, 2).unwrap();
        assert_eq!(zero.integrate_top_form(16).unwrap(), 0.0);
    }

    #[test]
    fn integration_preconditions_are_enforced() {
        let not_covering = sphere_box(false);
        let form = sin_theta_area(&not_covering);
        assert!(matches!(
            form.integrate_top_form(16),
            Err(FormError::ChartNotCovering(_))
        ));

        let covering = sphere_box(true);
        let one_form = ChartForm::coordinate_differential(covering.clone(), 0).unwrap();
        assert!(matches!(
            one_form.integrate_top_form(16),
            Err(FormError::NotTopDegree { .. })
        ));

        let area = sin_theta_area(&covering);
        assert!(matches!(
            area.integrate_top_form(0),
            Err(FormError::BadResolution)
        ));
    }

    #[test]
    fn four_dimensional_product_grid() {
        // Integrand sin(a)*sin(c) over (0,pi)^2 x (0,2pi)^2 arranged as
        // (a, b, c, d) = (theta1, phi1, theta2, phi2); integral is 2*2pi*2*2pi.
        let chart = ChartDomain::new(
            "product",
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![(0.0, PI), (0.0, 2.0 * PI), (0.0, PI), (0.0, 2.0 * PI)],
            true,
        )
        .unwrap();
        let form = ChartForm::from_components(
            chart.clone(),
            4,
            [(
                vec![0, 1, 2, 3],
                Coefficient::Symbolic(parse("sin(a)*sin(c)", chart.coordinates()).unwrap()),
            )],
        )
        .unwrap();
        let got = form.integrate_top_form(24).unwrap();
        let reference = 16.0 * PI * PI;
        assert!((got - reference).abs() / reference < 2e-3, "got {got}");
    }
}
