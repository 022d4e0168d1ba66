//! Named residual checks and the property suites shared by the CLI and
//! the integration tests.
//!
//! Every suite returns a flat list of [`Check`]s: a measured residual, the
//! tolerance it must stay under (always a [`crate::tolerances`] constant),
//! and the resulting verdict. Randomized suites take an explicit seed so a
//! report is reproducible bit for bit.

use crate::bundles::{
    bianchi_residual, cocycle_residual, curvature_matrix, frame_change_report,
    perturb_connection, pullback_bundle, reinterpret_on, rotate_frame_rank2,
    rotation_matrix_exprs, FrameTransition, FramedBundle,
};
use crate::error::Result;
use crate::euler::{block_euler_form, closedness_residual, euler_form};
use crate::exprlang::{add, call, mul, Expr, Func};
use crate::forms::{pullback, sup_difference, ChartDomain, ChartForm};
use crate::models::{self, ModelBundle};
use crate::pfaffian::{conjugation_residual, pfaffian_real, pfaffian_real_first_column};
use crate::sampling;
use crate::thom::{ThomProfile, TotalSpace, DEFAULT_FIBER_RADIUS, DEFAULT_RADIAL_SAMPLES};
use crate::tolerances as tol;
use nalgebra::DMatrix;
use rand::Rng;
use std::sync::Arc;

/// One named residual measurement compared against its tolerance.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// A non-finite residual never passes.
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
        }
    }
}

/// True when every check passed.
pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// The Euler integral of one model, with timing, as the CLI reports it.
#[derive(Debug, Clone)]
pub struct IntegralReport {
    pub computed: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub resolution: usize,
    pub duration_ms: u128,
    pub check: Check,
}

/// Grid resolution at which the default tolerance is comfortably met.
pub fn default_resolution(model: &ModelBundle) -> usize {
    if model.bundle().principal_chart().dim() >= 4 {
        32
    } else {
        256
    }
}

/// Reproduction tolerance appropriate for [`default_resolution`].
pub fn default_tolerance(model: &ModelBundle) -> f64 {
    if model.bundle().principal_chart().dim() >= 4 {
        tol::GAUSS_BONNET_PRODUCT_ABS
    } else {
        tol::GAUSS_BONNET_SURFACE_ABS
    }
}

/// Integrate the Euler form of a model and compare with its reference.
pub fn gauss_bonnet_report(
    model: &ModelBundle,
    resolution: usize,
    tolerance: f64,
    sequential: bool,
) -> Result<IntegralReport> {
    let start = std::time::Instant::now();
    let computed = if sequential {
        model.gauss_bonnet_seq(resolution)?
    } else {
        model.gauss_bonnet(resolution)?
    };
    let duration_ms = start.elapsed().as_millis();
    let reference = model.reference_chi() as f64;
    let abs_error = (computed - reference).abs();
    Ok(IntegralReport {
        computed,
        reference,
        abs_error,
        resolution,
        duration_ms,
        check: Check::new(
            format!("{}/gauss_bonnet", model.name()),
            abs_error,
            tolerance,
        ),
    })
}

/// Exterior-calculus identities on randomized forms: `d after d` vanishes,
/// the graded wedge sign, the Leibniz rule, pullback functoriality, `d`
/// commuting with pullback, and midpoint quadrature against a closed-form
/// integral. Roughly half the draws are re-expressed through opaque
/// coefficients to force the finite-difference code paths.
pub fn forms_suite(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let mut rng = sampling::rng(seed);
    let mut dd_worst = 0.0f64;
    let mut wedge_worst = 0.0f64;
    let mut leibniz_worst = 0.0f64;
    let mut functor_worst = 0.0f64;
    let mut commute_worst = 0.0f64;

    for round in 0..samples {
        let dim = 2 + round % 3;
        let chart = sampling::standard_test_chart(dim);
        let opaque = rng.random_bool(0.5);

        // d(d form) = 0, for degrees that leave room for two derivatives.
        if dim >= 2 {
            let degree = rng.random_range(0..=dim - 2);
            let mut form = sampling::random_form(&mut rng, &chart, degree)?;
            if opaque {
                form = sampling::to_opaque(&form);
            }
            let dd = form.exterior_derivative()?.exterior_derivative()?;
            dd_worst = dd_worst.max(dd.sup_norm_on_grid(3)?);
        }

        // a ^ b = (-1)^(pq) b ^ a.
        let p = rng.random_range(0..=dim);
        let q = rng.random_range(0..=dim - p.min(dim));
        let a = sampling::random_form(&mut rng, &chart, p)?;
        let b = sampling::random_form(&mut rng, &chart, q)?;
        let ab = a.wedge(&b)?;
        let mut ba = b.wedge(&a)?;
        if (p * q) % 2 == 1 {
            ba = ba.neg();
        }
        wedge_worst = wedge_worst.max(sup_difference(&ab, &ba, 3)?);

        // d(a ^ b) = da ^ b + (-1)^p a ^ db.
        if p + q < dim {
            let (mut a, mut b) = (a.clone(), b.clone());
            if opaque {
                a = sampling::to_opaque(&a);
                b = sampling::to_opaque(&b);
            }
            let lhs = a.wedge(&b)?.exterior_derivative()?;
            let mut second = a.wedge(&b.exterior_derivative()?)?;
            if p % 2 == 1 {
                second = second.neg();
            }
            let rhs = a.exterior_derivative()?.wedge(&b)?.add(&second)?;
            leibniz_worst = leibniz_worst.max(sup_difference(&lhs, &rhs, 3)?);
        }

        // Pullbacks compose contravariantly and commute with d; the maps
        // land strictly inside the target boxes.
        let mid = chart.dim().max(2);
        let middle = sampling::standard_test_chart(mid);
        let target = sampling::standard_test_chart(2 + round % 2);
        let bounded_map = |rng: &mut rand_chacha::ChaCha8Rng, n_from: usize, n_to: usize| {
            (0..n_to)
                .map(|_| {
                    add(
                        Expr::Number(1.0),
                        mul(
                            Expr::Number(0.4),
                            call(Func::Sin, sampling::random_expr(rng, n_from, 2)),
                        ),
                    )
                })
                .collect::<Vec<Expr>>()
        };
        let f = bounded_map(&mut rng, chart.dim(), middle.dim());
        let g = bounded_map(&mut rng, middle.dim(), target.dim());
        // Degrees above the source dimension pull back to zero but are not
        // representable on the source chart, so stay below both.
        let omega_degree = rng.random_range(0..=target.dim().min(chart.dim()));
        let omega = sampling::random_form(&mut rng, &target, omega_degree)?;
        let composed: Vec<Expr> = g
            .iter()
            .map(|component| component.substitute(&f))
            .collect::<std::result::Result<_, _>>()?;
        let direct = pullback(&chart, &composed, &omega)?;
        let staged = pullback(&chart, &f, &pullback(&middle, &g, &omega)?)?;
        functor_worst = functor_worst.max(sup_difference(&direct, &staged, 3)?);

        if omega.degree() < target.dim() && omega.degree() < chart.dim() {
            let d_then_pull = pullback(&chart, &composed, &omega.exterior_derivative()?)?;
            let pull_then_d = direct.exterior_derivative()?;
            commute_worst = commute_worst.max(sup_difference(&d_then_pull, &pull_then_d, 3)?);
        }
    }

    // Midpoint quadrature against the closed form: the integral of
    // sin(x) dx^dy over (0,pi) x (0,2pi) is 4pi.
    let sphere_box = models::sphere_chart("quadrature_box")?;
    let coords: Vec<String> = sphere_box.coordinates().to_vec();
    let area = ChartForm::from_components(
        sphere_box,
        2,
        [(
            vec![0, 1],
            crate::forms::Coefficient::Symbolic(crate::exprlang::parse("sin(theta)", &coords)?),
        )],
    )?;
    let quadrature_error =
        (area.integrate_top_form(128)? - 4.0 * std::f64::consts::PI).abs();

    Ok(vec![
        Check::new("forms/d_after_d_vanishes", dd_worst, tol::FORMS_DD_RESIDUAL),
        Check::new(
            "forms/wedge_graded_sign",
            wedge_worst,
            tol::FORMS_WEDGE_SIGN_RESIDUAL,
        ),
        Check::new(
            "forms/leibniz_rule",
            leibniz_worst,
            tol::FORMS_LEIBNIZ_RESIDUAL,
        ),
        Check::new(
            "forms/pullback_functoriality",
            functor_worst,
            tol::FORMS_PULLBACK_FUNCTORIALITY,
        ),
        Check::new(
            "forms/pullback_commutes_with_d",
            commute_worst,
            tol::FORMS_PULLBACK_COMMUTES_WITH_D,
        ),
        Check::new(
            "forms/midpoint_quadrature",
            quadrature_error,
            tol::QUADRATURE_CONVERGENCE_ABS,
        ),
    ])
}

/// Pfaffian identities on random skew matrices up to size 8:
/// `Pf^2 = det` against an LU determinant, agreement of the two
/// independent recursion bookkeepings, invariance under special
/// orthogonal conjugation, and block multiplicativity.
pub fn pfaffian_suite(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let mut rng = sampling::rng(seed);
    let mut det_worst = 0.0f64;
    let mut recursion_worst = 0.0f64;
    let mut conjugation_worst = 0.0f64;
    let mut block_worst = 0.0f64;

    for _ in 0..trials {
        for size in [2usize, 4, 6, 8] {
            let a = sampling::random_skew_matrix(&mut rng, size);
            let pf = pfaffian_real(&a)?;
            let det = a.determinant();
            det_worst = det_worst.max((pf * pf - det).abs() / det.abs().max(1.0));
            recursion_worst =
                recursion_worst.max((pf - pfaffian_real_first_column(&a)?).abs());
            let r = sampling::random_rotation(&mut rng, size);
            conjugation_worst =
                conjugation_worst.max(conjugation_residual(&a, &r, 1e-10)?);
        }
        let a = sampling::random_skew_matrix(&mut rng, 2);
        let b = sampling::random_skew_matrix(&mut rng, 4);
        let mut sum = DMatrix::<f64>::zeros(6, 6);
        sum.view_mut((0, 0), (2, 2)).copy_from(&a);
        sum.view_mut((2, 2), (4, 4)).copy_from(&b);
        block_worst = block_worst
            .max((pfaffian_real(&sum)? - pfaffian_real(&a)? * pfaffian_real(&b)?).abs());
    }

    Ok(vec![
        Check::new(
            "pfaffian/square_equals_determinant",
            det_worst,
            tol::PFAFFIAN_DET_REL,
        ),
        Check::new(
            "pfaffian/recursions_agree",
            recursion_worst,
            tol::PFAFFIAN_RECURSION_ABS,
        ),
        Check::new(
            "pfaffian/so_conjugation_invariance",
            conjugation_worst,
            tol::PFAFFIAN_CONJUGATION_ABS,
        ),
        Check::new(
            "pfaffian/block_multiplicativity",
            block_worst,
            tol::PFAFFIAN_BLOCK_ABS,
        ),
    ])
}

/// Structural identities on every catalog model: the frame-change laws,
/// globality of the curvature Pfaffian across patches, invariance of the
/// curvature under frame rotations, stability of the Euler integral under
/// connection perturbations, the Bianchi identity and block Euler form on
/// the product model, closedness of a pulled-back Euler form in ambient
/// dimension four, and the cocycle condition on a three-frame bundle.
pub fn bundles_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = sampling::rng(seed);
    let mut checks = Vec::new();

    for model in models::catalog()? {
        let name = model.name().to_string();
        let bundle = model.bundle();
        let connection = model.connection();

        if !bundle.transitions().is_empty() {
            let report = frame_change_report(bundle, connection, 6)?;
            checks.push(Check::new(
                format!("{name}/frame_law_connection"),
                report.connection_residual,
                tol::FRAME_LAW_RESIDUAL,
            ));
            checks.push(Check::new(
                format!("{name}/frame_law_curvature"),
                report.curvature_residual,
                tol::FRAME_LAW_RESIDUAL,
            ));

            let mut globality = 0.0f64;
            for transition in bundle.transitions() {
                let pf_from = crate::pfaffian::pfaffian(&curvature_matrix(
                    connection.matrix(transition.from_index()),
                )?)?;
                let pf_to = crate::pfaffian::pfaffian(&curvature_matrix(
                    connection.matrix(transition.to_index()),
                )?)?;
                globality = globality.max(sup_difference(
                    &reinterpret_on(&pf_from, transition.region())?,
                    &reinterpret_on(&pf_to, transition.region())?,
                    6,
                )?);
            }
            checks.push(Check::new(
                format!("{name}/pfaffian_globality"),
                globality,
                tol::PFAFFIAN_GLOBALITY_RESIDUAL,
            ));
        }

        if model.is_rank_two() {
            let alpha = add(
                mul(Expr::Number(0.4), Expr::Coord(0)),
                mul(Expr::Number(1.1), Expr::Coord(1)),
            );
            let rotated = rotate_frame_rank2(connection.matrix(0), &alpha)?;
            let rotated_curvature = curvature_matrix(&rotated)?;
            let original_curvature = curvature_matrix(connection.matrix(0))?;
            checks.push(Check::new(
                format!("{name}/rotation_invariance"),
                sup_difference(
                    rotated_curvature.entry(0, 1),
                    original_curvature.entry(0, 1),
                    5,
                )?,
                tol::ROTATION_INVARIANCE_RESIDUAL,
            ));

            let baseline = model.gauss_bonnet(64)?;
            let mut drift = 0.0f64;
            for _ in 0..2 {
                let tau =
                    sampling::random_perturbation_one_form(&mut rng, bundle.principal_chart())?;
                let per_chart: Vec<ChartForm> = bundle
                    .charts()
                    .iter()
                    .map(|chart| reinterpret_on(&tau, chart))
                    .collect::<Result<_>>()?;
                let perturbed = perturb_connection(bundle, connection, &per_chart, 0.05)?;
                let moved = crate::euler::gauss_bonnet(bundle, &perturbed, 64)?;
                drift = drift.max((moved - baseline).abs());
            }
            checks.push(Check::new(
                format!("{name}/perturbation_drift"),
                drift,
                tol::PERTURBATION_DRIFT_ABS,
            ));
        }

        if bundle.rank() == 4 {
            checks.push(Check::new(
                format!("{name}/bianchi"),
                bianchi_residual(connection, 4)?,
                tol::BIANCHI_RESIDUAL,
            ));
        }
    }

    // The Euler form of the direct sum equals the wedge of the factor
    // Pfaffians with the shared normalization.
    let (first, second) = models::product_s2xs2_factors()?;
    let first_curvature = curvature_matrix(first.1.matrix(0))?;
    let second_curvature = curvature_matrix(second.1.matrix(0))?;
    let block = block_euler_form(&[&first_curvature, &second_curvature])?;
    let product = models::builtin("product_s2xs2")?;
    let direct = euler_form(&curvature_matrix(product.connection().matrix(0))?)?;
    checks.push(Check::new(
        "product_s2xs2/block_euler_form",
        sup_difference(&block, &direct, 4)?,
        tol::BLOCK_EULER_POINTWISE,
    ));

    // A pulled-back Euler form whose Pfaffian genuinely depends on all
    // four ambient coordinates is closed: the map below mixes both sphere
    // factors, so this is a real cancellation of mixed partials rather
    // than a symbolic zero.
    let product_chart = models::product_chart()?;
    let twist = models::rank2_single_chart(
        "twist_factor",
        models::sphere_chart("twist_base")?,
        ["0", "(1 - cos(theta)) / 2"],
    )?;
    let mixing_coords: Vec<String> = product_chart.coordinates().to_vec();
    let mixing_map = vec![
        crate::exprlang::parse("theta1 + 0.2*sin(theta2)*sin(phi2)", &mixing_coords)?,
        crate::exprlang::parse("phi1 + 2*phi2", &mixing_coords)?,
    ];
    let pulled = pullback_bundle(
        "twist_over_product",
        &product_chart,
        &mixing_map,
        (&twist.0, &twist.1),
    )?;
    let pulled_euler = euler_form(&curvature_matrix(pulled.1.matrix(0))?)?;
    checks.push(Check::new(
        "twist_over_product/euler_form_closed",
        closedness_residual(&pulled_euler, 5)?,
        tol::EULER_FORM_CLOSEDNESS,
    ));

    // Cocycle condition on a three-frame presentation of the sphere
    // bundle: rotations by alpha1, alpha2 - alpha1, and alpha2.
    let charts: Vec<Arc<ChartDomain>> = vec![
        models::sphere_chart("frame0")?,
        ChartDomain::new(
            "frame1",
            vec!["theta".into(), "phi".into()],
            vec![(0.0, std::f64::consts::PI), (0.0, std::f64::consts::TAU)],
            false,
        )?,
        ChartDomain::new(
            "frame2",
            vec!["theta".into(), "phi".into()],
            vec![(0.0, std::f64::consts::PI), (0.0, std::f64::consts::TAU)],
            false,
        )?,
    ];
    let coords: Vec<String> = charts[0].coordinates().to_vec();
    let alpha1 = crate::exprlang::parse("phi + sin(theta)", &coords)?;
    let alpha2 = crate::exprlang::parse("3*phi", &coords)?;
    let difference = crate::exprlang::sub(alpha2.clone(), alpha1.clone());
    let region = || {
        ChartDomain::new(
            "triple_overlap",
            coords.clone(),
            charts[0].intervals().to_vec(),
            false,
        )
    };
    let transitions = vec![
        FrameTransition::new(0, 1, region()?, rotation_matrix_exprs(&alpha1)),
        FrameTransition::new(1, 2, region()?, rotation_matrix_exprs(&difference)),
        FrameTransition::new(0, 2, region()?, rotation_matrix_exprs(&alpha2)),
    ];
    let three_frames = FramedBundle::new("three_frames", 2, charts, transitions)?;
    checks.push(Check::new(
        "three_frames/cocycle",
        cocycle_residual(&three_frames, (0, 1, 2))?,
        tol::COCYCLE_RESIDUAL,
    ));

    Ok(checks)
}

/// Thom-form checks for one rank-2 model: unit fiber mass, base-point
/// independence of the mass, closedness over the total-space grid,
/// agreement of the forms assembled in rotated fiber frames, restriction
/// to the Euler form on the zero section, and exact vanishing outside the
/// unit disk bundle.
pub fn thom_suite(
    model: &ModelBundle,
    seed: u64,
    base_points: usize,
    closedness_per_axis: usize,
) -> Result<Vec<Check>> {
    let name = model.name();
    let total = TotalSpace::new(
        model.bundle(),
        model.connection(),
        Arc::new(ThomProfile::new()),
        DEFAULT_FIBER_RADIUS,
    )?;
    let thom = total.thom_form()?;
    let mut checks = Vec::new();

    let mut rng = sampling::rng(seed);
    let base = total.base_chart().clone();
    let mut mass_worst = 0.0f64;
    let mut mass_lo = f64::INFINITY;
    let mut mass_hi = f64::NEG_INFINITY;
    for _ in 0..base_points {
        let point: Vec<f64> = base
            .intervals()
            .iter()
            .map(|(lo, hi)| {
                let margin = 0.1 * (hi - lo);
                rng.random_range(lo + margin..hi - margin)
            })
            .collect();
        let mass = total.fiber_integral(&thom, &point, DEFAULT_RADIAL_SAMPLES)?;
        mass_worst = mass_worst.max((mass - 1.0).abs());
        mass_lo = mass_lo.min(mass);
        mass_hi = mass_hi.max(mass);
    }
    checks.push(Check::new(
        format!("{name}/thom_fiber_mass"),
        mass_worst,
        tol::THOM_FIBER_MASS_ABS,
    ));
    checks.push(Check::new(
        format!("{name}/thom_base_independence"),
        mass_hi - mass_lo,
        tol::THOM_BASEPOINT_SPREAD,
    ));

    checks.push(Check::new(
        format!("{name}/thom_closedness"),
        thom.exterior_derivative()?
            .sup_norm_on_grid(closedness_per_axis)?,
        tol::THOM_CLOSEDNESS_RESIDUAL,
    ));

    let mut invariance = 0.0f64;
    for alpha in [
        Expr::Number(0.7),
        Expr::Coord(1),
        add(
            mul(Expr::Number(3.0), Expr::Coord(1)),
            call(Func::Sin, Expr::Coord(0)),
        ),
    ] {
        let rotated = total.rotated_thom_form(&alpha)?;
        invariance = invariance.max(sup_difference(&rotated, &thom, 4)?);
    }
    checks.push(Check::new(
        format!("{name}/thom_frame_invariance"),
        invariance,
        tol::THOM_FRAME_INVARIANCE,
    ));

    let restricted = total.restrict_to_zero_section(&thom)?;
    let euler = euler_form(&curvature_matrix(model.connection().matrix(0))?)?;
    checks.push(Check::new(
        format!("{name}/thom_restriction_is_euler"),
        sup_difference(&restricted, &euler, 6)?,
        tol::THOM_RESTRICTION_POINTWISE,
    ));

    let mid: Vec<f64> = base
        .intervals()
        .iter()
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect();
    let mut support = 0.0f64;
    for fiber in [[1.05, 0.1], [-1.1, 0.3], [0.9, 0.9], [0.0, -1.15]] {
        let mut point = mid.clone();
        point.extend_from_slice(&fiber);
        for (_, coefficient) in thom.components() {
            support = support.max(coefficient.evaluate(&point)?.abs());
        }
    }
    checks.push(Check::new(
        format!("{name}/thom_compact_support"),
        support,
        tol::THOM_SUPPORT_ABS,
    ));

    Ok(checks)
}
