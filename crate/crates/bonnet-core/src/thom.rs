//! Compactly supported Thom forms for two-plane bundles.
//!
//! On the total space of a rank-2 bundle with metric connection `omega`
//! (the upper entry of the skew matrix) and fiber coordinates `(v1, v2)`,
//! with `r^2 = v1^2 + v2^2` and `c = -1/2 pi`, the Thom form is
//!
//! ```text
//! u = c { rho(r^2) dv1^dv2
//!       + rho(r^2) (v1 dv1 + v2 dv2) ^ omega
//!       + gamma(r) d omega }
//! ```
//!
//! built from a bump profile `rho` supported in the unit disk with
//! `integral_0^1 rho = -2` and its radial antiderivative
//! `gamma(r) = 1 + integral_0^r rho(s^2) s ds`, so that `gamma(0) = 1`,
//! `gamma(r >= 1) = 0`. The form is closed, restricts to the Euler form on
//! the zero section, integrates to 1 over every fiber, and is independent
//! of the frame used to build it; all four statements are checked
//! numerically, none are assumed.

use crate::bundles::{FramedBundle, MetricConnection};
use crate::error::{Error, Result};
use crate::exprlang::{add, call, mul, neg, pow, Expr, Func};
use crate::forms::{ChartDomain, ChartForm, Coefficient};
use crate::quadrature::composite_simpson;
use std::f64::consts::PI;
use std::sync::Arc;

/// Intervals in the cumulative table for the profile antiderivative.
const PROFILE_TABLE_INTERVALS: usize = 4096;

/// Simpson points per table interval when accumulating the antiderivative.
const PROFILE_TABLE_SIMPSON: usize = 16;

/// Default radial Simpson samples for fiber integrals.
pub const DEFAULT_RADIAL_SAMPLES: usize = 1024;

/// Default half-width of the fiber box; must exceed the unit-disk support.
pub const DEFAULT_FIBER_RADIUS: f64 = 1.2;

/// The bump `exp(-1/(t(1-t)))` on `(0, 1)`, zero elsewhere; smooth and flat
/// to all orders at both endpoints.
fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

/// The radial profile of the Thom form.
///
/// Internally this is a cubic Hermite table of the antiderivative
/// `G(u) = integral_0^u bump`, with exact node derivatives; `gamma` and
/// `rho` are read off it. Normalizing by the table's own total makes
/// `gamma(0) = 1` and `gamma(1) = 0` hold to the last bit rather than up
/// to an independent quadrature error.
#[derive(Debug)]
pub struct ThomProfile {
    /// `G(u_k)` at the uniform nodes `u_k = k / N` on `[0, 1]`.
    values: Vec<f64>,
    /// `G'(u_k) = bump(u_k)`, exact.
    derivatives: Vec<f64>,
    /// `G(1)`, the bump mass used for normalization.
    total: f64,
}

impl ThomProfile {
    pub fn new() -> ThomProfile {
        let n = PROFILE_TABLE_INTERVALS;
        let h = 1.0 / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        let mut derivatives = Vec::with_capacity(n + 1);
        values.push(0.0);
        derivatives.push(bump(0.0));
        let mut acc = 0.0;
        for k in 0..n {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            acc += composite_simpson(bump, a, b, PROFILE_TABLE_SIMPSON);
            values.push(acc);
            derivatives.push(bump(b));
        }
        ThomProfile {
            values,
            derivatives,
            total: acc,
        }
    }

    /// Cubic Hermite interpolation of the antiderivative `G` on `[0, 1]`.
    fn antiderivative(&self, u: f64) -> f64 {
        let n = PROFILE_TABLE_INTERVALS;
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return self.total;
        }
        let h = 1.0 / n as f64;
        let k = ((u * n as f64) as usize).min(n - 1);
        let t = (u - k as f64 * h) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[k]
            + h10 * h * self.derivatives[k]
            + h01 * self.values[k + 1]
            + h11 * h * self.derivatives[k + 1]
    }

    /// Derivative of the interpolant; used to cross-check against the
    /// exact node data, not to define `rho`.
    fn antiderivative_slope(&self, u: f64) -> f64 {
        let n = PROFILE_TABLE_INTERVALS;
        if !(0.0..1.0).contains(&u) {
            return 0.0;
        }
        let h = 1.0 / n as f64;
        let k = ((u * n as f64) as usize).min(n - 1);
        let t = (u - k as f64 * h) / h;
        let (t2,) = (t * t,);
        let h00 = (6.0 * t2 - 6.0 * t) / h;
        let h10 = 3.0 * t2 - 4.0 * t + 1.0;
        let h01 = (-6.0 * t2 + 6.0 * t) / h;
        let h11 = 3.0 * t2 - 2.0 * t;
        h00 * self.values[k]
            + h10 * self.derivatives[k]
            + h01 * self.values[k + 1]
            + h11 * self.derivatives[k + 1]
    }

    /// `rho(t) = -2 bump(t) / G(1)`, supported in `(0, 1)` with
    /// `integral_0^1 rho = -2`.
    pub fn rho(&self, t: f64) -> f64 {
        -2.0 * bump(t) / self.total
    }

    /// `gamma(r) = 1 - G(r^2) / G(1)`: exactly 1 at `r = 0`, exactly 0 for
    /// `r >= 1`, smooth and monotone in between. The clamp removes the
    /// one-ulp negative the interpolant can produce where `G` grazes its
    /// total.
    pub fn gamma(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        if r >= 1.0 {
            return 0.0;
        }
        (1.0 - self.antiderivative(r * r) / self.total).clamp(0.0, 1.0)
    }

    /// The analytic derivative `gamma'(r) = rho(r^2) r`.
    pub fn gamma_prime(&self, r: f64) -> f64 {
        self.rho(r * r) * r
    }

    /// The derivative of the interpolated `gamma`; agreement with
    /// [`ThomProfile::gamma_prime`] measures the table error.
    pub fn gamma_prime_from_table(&self, r: f64) -> f64 {
        if r <= 0.0 || r >= 1.0 {
            return 0.0;
        }
        -self.antiderivative_slope(r * r) * 2.0 * r / self.total
    }
}

impl Default for ThomProfile {
    fn default() -> Self {
        ThomProfile::new()
    }
}

/// The total space of a rank-2 bundle over its principal chart: base
/// coordinates extended by fiber coordinates `v1, v2` on a box wide enough
/// to contain the unit-disk support of the Thom form.
#[derive(Debug, Clone)]
pub struct TotalSpace {
    base: Arc<ChartDomain>,
    total: Arc<ChartDomain>,
    omega: ChartForm,
    profile: Arc<ThomProfile>,
    fiber_radius: f64,
}

impl TotalSpace {
    pub fn new(
        bundle: &FramedBundle,
        connection: &MetricConnection,
        profile: Arc<ThomProfile>,
        fiber_radius: f64,
    ) -> Result<TotalSpace> {
        if bundle.rank() != 2 {
            return Err(Error::RankMismatch {
                want: 2,
                got: bundle.rank(),
            });
        }
        let base = bundle.principal_chart().clone();
        if !(fiber_radius >= 1.0 && fiber_radius.is_finite()) {
            return Err(Error::BadBundle {
                name: bundle.name().to_string(),
                reason: format!(
                    "fiber radius {fiber_radius} cannot contain the unit-disk support"
                ),
            });
        }
        for fiber_name in ["v1", "v2"] {
            if base.coordinates().iter().any(|c| c == fiber_name) {
                return Err(Error::BadBundle {
                    name: bundle.name().to_string(),
                    reason: format!(
                        "base coordinate `{fiber_name}` clashes with the fiber coordinates"
                    ),
                });
            }
        }
        let mut coordinates = base.coordinates().to_vec();
        coordinates.push("v1".into());
        coordinates.push("v2".into());
        let mut intervals = base.intervals().to_vec();
        intervals.push((-fiber_radius, fiber_radius));
        intervals.push((-fiber_radius, fiber_radius));
        let total = ChartDomain::new(
            format!("{}_total", base.name()),
            coordinates,
            intervals,
            false,
        )?;
        let omega = connection.matrix(0).entry(0, 1).clone();
        Ok(TotalSpace {
            base,
            total,
            omega,
            profile,
            fiber_radius,
        })
    }

    pub fn base_chart(&self) -> &Arc<ChartDomain> {
        &self.base
    }

    pub fn total_chart(&self) -> &Arc<ChartDomain> {
        &self.total
    }

    pub fn profile(&self) -> &Arc<ThomProfile> {
        &self.profile
    }

    pub fn fiber_radius(&self) -> f64 {
        self.fiber_radius
    }

    fn fiber_indices(&self) -> (usize, usize) {
        (self.base.dim(), self.base.dim() + 1)
    }

    /// Carry a form on the base up to the total space: same component
    /// tuples, coefficients reading only the base coordinates.
    fn lift(&self, form: &ChartForm) -> Result<ChartForm> {
        let identity: Vec<Expr> = (0..self.base.dim()).map(Expr::Coord).collect();
        let mut lifted = Vec::new();
        for (tuple, coefficient) in form.components() {
            lifted.push((tuple.to_vec(), coefficient.compose(&identity)?));
        }
        Ok(ChartForm::from_components(
            self.total.clone(),
            form.degree(),
            lifted,
        )?)
    }

    /// The Thom form in the frame the bundle was presented in.
    pub fn thom_form(&self) -> Result<ChartForm> {
        let (v1, v2) = self.fiber_indices();
        let radial = add(pow(Expr::Coord(v1), 2), pow(Expr::Coord(v2), 2));
        self.assemble(
            Expr::Coord(v1),
            Expr::Coord(v2),
            radial,
            self.lift(&self.omega)?,
        )
    }

    /// The Thom form rebuilt from the frame rotated pointwise by the angle
    /// field `alpha` (an expression over the base coordinates): fiber
    /// coordinates turn with the frame and the connection gains `d alpha`.
    /// The result must agree with [`TotalSpace::thom_form`]; the comparison
    /// is the frame-independence check.
    pub fn rotated_thom_form(&self, alpha: &Expr) -> Result<ChartForm> {
        let (v1, v2) = self.fiber_indices();
        let cos_a = call(Func::Cos, alpha.clone());
        let sin_a = call(Func::Sin, alpha.clone());
        let vt1 = add(
            mul(cos_a.clone(), Expr::Coord(v1)),
            mul(sin_a.clone(), Expr::Coord(v2)),
        );
        let vt2 = add(
            mul(neg(sin_a), Expr::Coord(v1)),
            mul(cos_a, Expr::Coord(v2)),
        );
        let radial = add(pow(vt1.clone(), 2), pow(vt2.clone(), 2));

        let alpha_form = ChartForm::from_components(
            self.total.clone(),
            0,
            [(vec![], Coefficient::Symbolic(alpha.clone()))],
        )?;
        let omega_rotated = self
            .lift(&self.omega)?
            .add(&alpha_form.exterior_derivative()?)?;
        self.assemble(vt1, vt2, radial, omega_rotated)
    }

    /// Assemble `c { rho dv1^dv2 + rho (v1 dv1 + v2 dv2)^omega + gamma
    /// d omega }` from the (possibly rotated) fiber coordinate expressions
    /// and connection form.
    fn assemble(
        &self,
        fiber1: Expr,
        fiber2: Expr,
        radial_squared: Expr,
        omega: ChartForm,
    ) -> Result<ChartForm> {
        let rho = {
            let profile = self.profile.clone();
            let r2 = radial_squared.clone();
            Coefficient::opaque(move |p| Ok(profile.rho(r2.eval(p)?)))
        };
        let gamma = {
            let profile = self.profile.clone();
            let r2 = radial_squared;
            Coefficient::opaque(move |p| Ok(profile.gamma(r2.eval(p)?.sqrt())))
        };

        let zero_form = |e: &Expr| {
            ChartForm::from_components(
                self.total.clone(),
                0,
                [(vec![], Coefficient::Symbolic(e.clone()))],
            )
        };
        let d_fiber1 = zero_form(&fiber1)?.exterior_derivative()?;
        let d_fiber2 = zero_form(&fiber2)?.exterior_derivative()?;

        let area = d_fiber1.wedge(&d_fiber2)?.scale_by(&rho);
        let psi = d_fiber1
            .scale_by(&Coefficient::Symbolic(fiber1))
            .add(&d_fiber2.scale_by(&Coefficient::Symbolic(fiber2)))?;
        let radial_term = psi.wedge(&omega)?.scale_by(&rho);
        let curvature_term = omega.exterior_derivative()?.scale_by(&gamma);

        Ok(area
            .add(&radial_term)?
            .add(&curvature_term)?
            .scale(-1.0 / (2.0 * PI)))
    }

    /// Integrate the fiber components of a form over the fiber at a base
    /// point: `2 pi integral_0^R f(r) r dr` along the `v1` ray, using the
    /// radial symmetry of the fiber coefficient.
    pub fn fiber_integral(
        &self,
        form: &ChartForm,
        base_point: &[f64],
        radial_samples: usize,
    ) -> Result<f64> {
        let (v1, v2) = self.fiber_indices();
        if base_point.len() != self.base.dim() || !self.base.contains(base_point) {
            return Err(Error::Form(crate::forms::FormError::PointOutsideChart {
                chart: self.base.name().to_string(),
                point: base_point.to_vec(),
            }));
        }
        let coefficient = match form.coefficient(&[v1, v2]) {
            Some(c) => c.clone(),
            None => return Ok(0.0),
        };
        let mut point = base_point.to_vec();
        point.push(0.0);
        point.push(0.0);
        let failure = std::cell::Cell::new(None);
        let integrand = |r: f64| {
            let mut p = point.clone();
            p[v1] = r;
            match coefficient.evaluate(&p) {
                Ok(value) => value * r,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        };
        let radial = composite_simpson(integrand, 0.0, self.fiber_radius, radial_samples);
        if let Some(e) = failure.take() {
            return Err(Error::Eval(e));
        }
        Ok(2.0 * PI * radial)
    }

    /// Restrict a form on the total space to the zero section: drop every
    /// component with a fiber differential and evaluate the rest at
    /// `v1 = v2 = 0`, landing back on the base chart.
    pub fn restrict_to_zero_section(&self, form: &ChartForm) -> Result<ChartForm> {
        let b = self.base.dim();
        let mut map: Vec<Expr> = (0..b).map(Expr::Coord).collect();
        map.push(Expr::Number(0.0));
        map.push(Expr::Number(0.0));
        let mut restricted = Vec::new();
        for (tuple, coefficient) in form.components() {
            if tuple.iter().all(|&i| i < b) {
                restricted.push((tuple.to_vec(), coefficient.compose(&map)?));
            }
        }
        Ok(ChartForm::from_components(
            self.base.clone(),
            form.degree(),
            restricted,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::curvature_matrix;
    use crate::euler::euler_form;
    use crate::exprlang::parse;
    use crate::forms::sup_difference;
    use crate::pfaffian::SkewFormMatrix;
    use crate::quadrature::adaptive_simpson;

    fn profile() -> Arc<ThomProfile> {
        Arc::new(ThomProfile::new())
    }

    #[test]
    fn gamma_endpoints_are_exact() {
        let p = profile();
        assert_eq!(p.gamma(0.0), 1.0);
        assert_eq!(p.gamma(1.0), 0.0);
        assert_eq!(p.gamma(1.5), 0.0);
        assert_eq!(p.gamma(-0.25), 1.0);
        // Approaching 1 from below the table itself must agree to high
        // accuracy, not just the clamped branch.
        assert!(p.gamma(1.0 - 1e-6).abs() < 1e-12);
        assert!((p.gamma(1e-6) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_is_monotone_and_bounded() {
        let p = profile();
        let mut last = 1.0;
        for k in 0..=1000 {
            let g = p.gamma(k as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&g));
            assert!(g <= last + 1e-15);
            last = g;
        }
    }

    #[test]
    fn rho_mass_matches_an_independent_quadrature() {
        // The table is built from composite Simpson sweeps; adaptive
        // Simpson with its own refinement logic is the oracle.
        let p = profile();
        let mass = adaptive_simpson(|t| p.rho(t), 0.0, 1.0, 1e-12);
        assert!((mass + 2.0).abs() < 1e-9, "mass = {mass}");
        assert_eq!(p.rho(0.0), 0.0);
        assert_eq!(p.rho(1.0), 0.0);
        assert_eq!(p.rho(1.2), 0.0);
    }

    #[test]
    fn gamma_slope_from_the_table_matches_the_analytic_derivative() {
        let p = profile();
        let mut worst = 0.0f64;
        for k in 1..1000 {
            let r = k as f64 / 1000.0;
            worst = worst.max((p.gamma_prime_from_table(r) - p.gamma_prime(r)).abs());
        }
        assert!(worst < 1e-8, "worst = {worst:.3e}");
    }

    fn sphere_space() -> TotalSpace {
        let chart = ChartDomain::new(
            "sphere",
            vec!["theta".into(), "phi".into()],
            vec![(0.0, PI), (0.0, 2.0 * PI)],
            true,
        )
        .unwrap();
        let omega = ChartForm::one_form(
            chart.clone(),
            vec![
                Coefficient::constant(0.0),
                Coefficient::Symbolic(parse("cos(theta)", chart.coordinates()).unwrap()),
            ],
        )
        .unwrap();
        let matrix = SkewFormMatrix::from_upper(chart.clone(), 2, 1, vec![(0, 1, omega)]).unwrap();
        let bundle = FramedBundle::new("sphere", 2, vec![chart], Vec::new()).unwrap();
        let connection = MetricConnection::new(&bundle, vec![matrix]).unwrap();
        TotalSpace::new(&bundle, &connection, profile(), DEFAULT_FIBER_RADIUS).unwrap()
    }

    #[test]
    fn thom_form_is_closed() {
        let space = sphere_space();
        let u = space.thom_form().unwrap();
        assert_eq!(u.degree(), 2);
        let du = u.exterior_derivative().unwrap();
        // Opaque coefficients differentiate by finite differences, so the
        // bound is the scheme error, far below the acceptance threshold.
        assert!(du.sup_norm_on_grid(4).unwrap() < 1e-6);
    }

    #[test]
    fn fiber_integral_is_one_at_every_base_point() {
        let space = sphere_space();
        let u = space.thom_form().unwrap();
        let mut masses = Vec::new();
        for point in space.base_chart().interior_grid(3) {
            masses.push(
                space
                    .fiber_integral(&u, &point, DEFAULT_RADIAL_SAMPLES)
                    .unwrap(),
            );
        }
        for mass in &masses {
            assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
            // The fiber coefficient has no base dependence at all, so the
            // masses agree to the bit, not merely to a tolerance.
            assert_eq!(mass.to_bits(), masses[0].to_bits());
        }
    }

    #[test]
    fn thom_form_vanishes_outside_the_unit_disk_exactly() {
        let space = sphere_space();
        let u = space.thom_form().unwrap();
        for (v1, v2) in [(1.05, 0.0), (0.9, 0.9), (-1.1, 0.3), (0.0, -1.15)] {
            let point = vec![1.0, 2.0, v1, v2];
            for (_, value) in u.evaluate(&point).unwrap() {
                assert_eq!(value, 0.0);
            }
        }
    }

    #[test]
    fn restriction_to_the_zero_section_is_the_euler_form() {
        let space = sphere_space();
        let u = space.thom_form().unwrap();
        let restricted = space.restrict_to_zero_section(&u).unwrap();
        let curvature = curvature_matrix(
            &SkewFormMatrix::from_upper(
                space.base_chart().clone(),
                2,
                1,
                vec![(0, 1, {
                    let chart = space.base_chart();
                    ChartForm::one_form(
                        chart.clone(),
                        vec![
                            Coefficient::constant(0.0),
                            Coefficient::Symbolic(
                                parse("cos(theta)", chart.coordinates()).unwrap(),
                            ),
                        ],
                    )
                    .unwrap()
                })],
            )
            .unwrap(),
        )
        .unwrap();
        let euler = euler_form(&curvature).unwrap();
        assert!(sup_difference(&restricted, &euler, 6).unwrap() < 1e-14);
    }

    #[test]
    fn the_thom_form_does_not_depend_on_the_frame() {
        let space = sphere_space();
        let u = space.thom_form().unwrap();
        let coords = space.base_chart().coordinates();
        for alpha_src in ["0.7", "phi", "3*phi + sin(theta)"] {
            let alpha = parse(alpha_src, coords).unwrap();
            let rotated = space.rotated_thom_form(&alpha).unwrap();
            let residual = sup_difference(&u, &rotated, 4).unwrap();
            assert!(residual < 1e-8, "alpha = {alpha_src}: residual {residual:.3e}");
        }
    }

    #[test]
    fn construction_rejects_bad_data() {
        let chart = ChartDomain::new(
            "clash",
            vec!["x".into(), "v1".into()],
            vec![(0.0, 1.0), (0.0, 1.0)],
            true,
        )
        .unwrap();
        let matrix = SkewFormMatrix::zero(chart.clone(), 2, 1).unwrap();
        let bundle = FramedBundle::new("clash", 2, vec![chart], Vec::new()).unwrap();
        let connection = MetricConnection::new(&bundle, vec![matrix]).unwrap();
        assert!(matches!(
            TotalSpace::new(&bundle, &connection, profile(), DEFAULT_FIBER_RADIUS),
            Err(Error::BadBundle { .. })
        ));

        let space = sphere_space();
        let base = space.base_chart().clone();
        let flat = SkewFormMatrix::zero(base.clone(), 2, 1).unwrap();
        let bundle = FramedBundle::new("sphere", 2, vec![base], Vec::new()).unwrap();
        let connection = MetricConnection::new(&bundle, vec![flat]).unwrap();
        let narrow = TotalSpace::new(&bundle, &connection, profile(), 0.8);
        assert!(matches!(narrow, Err(Error::BadBundle { .. })));
    }
}
