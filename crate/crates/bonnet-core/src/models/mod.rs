//! The built-in bundle catalog and the model definition file loader.
//!
//! Every model couples a framed bundle and metric connection with an
//! independently derived reference Euler number; the catalog is the ground
//! truth the verification suites run against. Constructing a model runs
//! the structural invariants (skewness is enforced by construction; the
//! frame-change laws, Bianchi identity, and rotation invariance are
//! checked numerically) and refuses to hand back anything that fails.

pub mod file;

pub use file::{load_model_file, parse_model_text};

use crate::bundles::{
    bianchi_residual, curvature_matrix, direct_sum, frame_change_report, pullback_bundle,
    rotate_frame_rank2, with_rotated_aux_frame, FramedBundle, MetricConnection,
};
use crate::error::{Error, Result};
use crate::exprlang::{mul, parse, Expr};
use crate::forms::{sup_difference, ChartDomain, ChartForm, Coefficient};
use crate::pfaffian::SkewFormMatrix;
use std::f64::consts::PI;
use std::sync::Arc;

/// Residual allowed on the connection/curvature transformation laws when a
/// model is loaded.
const FRAME_CHANGE_TOLERANCE: f64 = 1e-5;

/// Residual allowed on the Bianchi identity at load.
const BIANCHI_TOLERANCE: f64 = 1e-4;

/// Residual allowed between the curvature and the curvature recomputed in
/// a rotated frame at load.
const ROTATION_INVARIANCE_TOLERANCE: f64 = 1e-6;

/// A cataloged bundle: geometry plus an independently known Euler number.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    name: String,
    bundle: FramedBundle,
    connection: MetricConnection,
    reference_chi: i64,
    derivation: String,
    degree: Option<i64>,
}

impl ModelBundle {
    /// Couple geometry with its reference value, running the load-time
    /// invariants. Fails loudly (naming the failed check) rather than
    /// returning a model that contradicts its own presentation.
    pub fn assemble(
        name: impl Into<String>,
        bundle: FramedBundle,
        connection: MetricConnection,
        reference_chi: i64,
        derivation: impl Into<String>,
        degree: Option<i64>,
    ) -> Result<ModelBundle> {
        let model = ModelBundle {
            name: name.into(),
            bundle,
            connection,
            reference_chi,
            derivation: derivation.into(),
            degree,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let fail = |check: &str, detail: String| Error::ModelInvariant {
            model: self.name.clone(),
            check: check.to_string(),
            detail,
        };
        let report = frame_change_report(&self.bundle, &self.connection, 7)?;
        if report.connection_residual > FRAME_CHANGE_TOLERANCE {
            return Err(fail(
                "frame_change_connection",
                format!(
                    "omega does not follow the transition matrices: residual {:.3e}",
                    report.connection_residual
                ),
            ));
        }
        if report.curvature_residual > FRAME_CHANGE_TOLERANCE {
            return Err(fail(
                "frame_change_curvature",
                format!(
                    "curvature does not conjugate across transitions: residual {:.3e}",
                    report.curvature_residual
                ),
            ));
        }
        let bianchi = bianchi_residual(&self.connection, 4)?;
        if bianchi > BIANCHI_TOLERANCE {
            return Err(fail(
                "bianchi",
                format!("d Omega - [omega, Omega] has residual {bianchi:.3e}"),
            ));
        }
        if self.bundle.rank() == 2 {
            // Rotating the frame by a position-dependent angle must leave
            // the curvature untouched.
            let alpha = mul(Expr::Number(0.7), Expr::Coord(0));
            let rotated = rotate_frame_rank2(self.connection.matrix(0), &alpha)?;
            let rotated_curvature = curvature_matrix(&rotated)?;
            let original_curvature = curvature_matrix(self.connection.matrix(0))?;
            let residual = sup_difference(
                rotated_curvature.entry(0, 1),
                original_curvature.entry(0, 1),
                5,
            )?;
            if residual > ROTATION_INVARIANCE_TOLERANCE {
                return Err(fail(
                    "rotation_invariance",
                    format!("curvature moved under a frame rotation: residual {residual:.3e}"),
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bundle(&self) -> &FramedBundle {
        &self.bundle
    }

    pub fn connection(&self) -> &MetricConnection {
        &self.connection
    }

    /// The independently derived Euler number the integral must reproduce.
    pub fn reference_chi(&self) -> i64 {
        self.reference_chi
    }

    /// One-line derivation of the reference value.
    pub fn derivation(&self) -> &str {
        &self.derivation
    }

    /// Mapping degree, for models defined by pulling back along a map.
    pub fn degree(&self) -> Option<i64> {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }

    pub fn is_rank_two(&self) -> bool {
        self.bundle.rank() == 2
    }

    /// Integrate the Euler form at the given resolution.
    pub fn gauss_bonnet(&self, resolution: usize) -> Result<f64> {
        crate::euler::gauss_bonnet(&self.bundle, &self.connection, resolution)
    }

    /// Single-threaded variant, bit-identical to [`ModelBundle::gauss_bonnet`].
    pub fn gauss_bonnet_seq(&self, resolution: usize) -> Result<f64> {
        crate::euler::gauss_bonnet_seq(&self.bundle, &self.connection, resolution)
    }
}

/// Names of the built-in models, in catalog order.
pub fn builtin_names() -> Vec<String> {
    let mut names = vec![
        "sphere_round".to_string(),
        "flat_torus".to_string(),
        "torus_revolution".to_string(),
    ];
    for n in -3..=3 {
        names.push(format!("monopole_{n}"));
    }
    names.push("product_s2xs2".to_string());
    names.push("sphere_degree2_pullback".to_string());
    names
}

/// Build one built-in model by name.
pub fn builtin(name: &str) -> Result<ModelBundle> {
    match name {
        "sphere_round" => sphere_round(),
        "flat_torus" => flat_torus(),
        "torus_revolution" => torus_revolution(),
        "product_s2xs2" => product_s2xs2(),
        "sphere_degree2_pullback" => sphere_degree2_pullback(),
        _ => {
            if let Some(n) = name
                .strip_prefix("monopole_")
                .and_then(|s| s.parse::<i64>().ok())
            {
                if (-3..=3).contains(&n) {
                    return monopole(n);
                }
            }
            Err(Error::UnknownModel(name.to_string()))
        }
    }
}

/// Build and validate the whole catalog.
pub fn catalog() -> Result<Vec<ModelBundle>> {
    builtin_names().iter().map(|n| builtin(n)).collect()
}

pub(crate) fn sphere_chart(name: &str) -> Result<Arc<ChartDomain>> {
    Ok(ChartDomain::new(
        name,
        vec!["theta".into(), "phi".into()],
        vec![(0.0, PI), (0.0, 2.0 * PI)],
        true,
    )?)
}

fn torus_chart(name: &str) -> Result<Arc<ChartDomain>> {
    Ok(ChartDomain::new(
        name,
        vec!["u".into(), "v".into()],
        vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
        true,
    )?)
}

/// A rank-2 single-chart bundle from the 1-form sources of the upper
/// connection entry, one expression per coordinate.
pub(crate) fn rank2_single_chart(
    name: &str,
    chart: Arc<ChartDomain>,
    omega_sources: [&str; 2],
) -> Result<(FramedBundle, MetricConnection)> {
    let coords: Vec<String> = chart.coordinates().to_vec();
    let omega = ChartForm::one_form(
        chart.clone(),
        omega_sources
            .iter()
            .map(|s| Ok(Coefficient::Symbolic(parse(s, &coords)?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let matrix = SkewFormMatrix::from_upper(chart.clone(), 2, 1, vec![(0, 1, omega)])?;
    let bundle = FramedBundle::new(name, 2, vec![chart], Vec::new())?;
    let connection = MetricConnection::new(&bundle, vec![matrix])?;
    Ok((bundle, connection))
}

/// The tangent bundle of the round 2-sphere: `omega_12 = cos(theta) dphi`,
/// plus an auxiliary frame rotated by `3 phi + sin(theta)`.
fn sphere_round() -> Result<ModelBundle> {
    let chart = sphere_chart("sphere")?;
    let (bundle, connection) = rank2_single_chart("sphere_round", chart, ["0", "cos(theta)"])?;
    let alpha = parse("3*phi + sin(theta)", bundle.principal_chart().coordinates())?;
    let (bundle, connection) =
        with_rotated_aux_frame(&bundle, &connection, &alpha, "sphere_rotated_frame")?;
    ModelBundle::assemble(
        "sphere_round",
        bundle,
        connection,
        2,
        "chi(S^2) = 2: one maximum plus one minimum of a height function",
        None,
    )
}

/// The tangent bundle of the flat square torus: zero connection.
fn flat_torus() -> Result<ModelBundle> {
    let chart = torus_chart("torus")?;
    let (bundle, connection) = rank2_single_chart("flat_torus", chart, ["0", "0"])?;
    let alpha = parse("u", bundle.principal_chart().coordinates())?;
    let (bundle, connection) =
        with_rotated_aux_frame(&bundle, &connection, &alpha, "torus_rotated_frame")?;
    ModelBundle::assemble(
        "flat_torus",
        bundle,
        connection,
        0,
        "chi(T^2) = 0: the connection is flat, the Pfaffian vanishes identically",
        None,
    )
}

/// The tangent bundle of a torus of revolution: `omega_12 = -sin(u) dv`,
/// whose Pfaffian is nowhere-trivial but integrates to zero.
fn torus_revolution() -> Result<ModelBundle> {
    let chart = torus_chart("torus")?;
    let (bundle, connection) = rank2_single_chart("torus_revolution", chart, ["0", "-sin(u)"])?;
    let alpha = parse("2*v + cos(u)", bundle.principal_chart().coordinates())?;
    let (bundle, connection) =
        with_rotated_aux_frame(&bundle, &connection, &alpha, "revolution_rotated_frame")?;
    ModelBundle::assemble(
        "torus_revolution",
        bundle,
        connection,
        0,
        "chi(T^2) = 0: Gauss curvature cos(u) cancels between inner and outer rim",
        None,
    )
}

/// Charge-`n` monopole bundle over the sphere, presented in north and
/// south frames `f_S = A(-n phi) f_N` with
/// `omega_N = (n/2)(1 - cos(theta)) dphi`.
fn monopole(n: i64) -> Result<ModelBundle> {
    let north = sphere_chart("north_frame")?;
    let south = ChartDomain::new(
        "south_frame",
        north.coordinates().to_vec(),
        north.intervals().to_vec(),
        false,
    )?;
    let region = ChartDomain::new(
        "frame_overlap",
        north.coordinates().to_vec(),
        north.intervals().to_vec(),
        false,
    )?;
    let coords: Vec<String> = north.coordinates().to_vec();
    let omega_n_src = format!("({n}) * (1 - cos(theta)) / 2");
    let omega_s_src = format!("-({n}) * (1 + cos(theta)) / 2");
    let build_matrix = |chart: &Arc<ChartDomain>, src: &str| -> Result<SkewFormMatrix> {
        let omega = ChartForm::one_form(
            chart.clone(),
            vec![
                Coefficient::constant(0.0),
                Coefficient::Symbolic(parse(src, &coords)?),
            ],
        )?;
        Ok(SkewFormMatrix::from_upper(
            chart.clone(),
            2,
            1,
            vec![(0, 1, omega)],
        )?)
    };
    let omega_north = build_matrix(&north, &omega_n_src)?;
    let omega_south = build_matrix(&south, &omega_s_src)?;
    let alpha = parse(&format!("-({n}) * phi"), &coords)?;
    let transition = crate::bundles::FrameTransition::new(
        0,
        1,
        region,
        crate::bundles::rotation_matrix_exprs(&alpha),
    );
    let name = format!("monopole_{n}");
    let bundle = FramedBundle::new(&name, 2, vec![north, south], vec![transition])?;
    let connection = MetricConnection::new(&bundle, vec![omega_north, omega_south])?;
    ModelBundle::assemble(
        &name,
        bundle,
        connection,
        -n,
        format!("twist of charge {n} over S^2: chi(E) = {}", -n),
        None,
    )
}

/// The 4-dimensional product chart shared by the `S^2 x S^2` constructions.
pub fn product_chart() -> Result<Arc<ChartDomain>> {
    Ok(ChartDomain::new(
        "s2xs2",
        vec![
            "theta1".into(),
            "phi1".into(),
            "theta2".into(),
            "phi2".into(),
        ],
        vec![(0.0, PI), (0.0, 2.0 * PI), (0.0, PI), (0.0, 2.0 * PI)],
        true,
    )?)
}

/// The two rank-2 factors of `T(S^2 x S^2)`: the sphere bundle pulled back
/// along each projection.
pub fn product_s2xs2_factors() -> Result<(
    (FramedBundle, MetricConnection),
    (FramedBundle, MetricConnection),
)> {
    let chart = product_chart()?;
    let sphere = rank2_single_chart("sphere_factor", sphere_chart("sphere")?, ["0", "cos(theta)"])?;
    let first = pullback_bundle(
        "s2xs2_first_factor",
        &chart,
        &[Expr::Coord(0), Expr::Coord(1)],
        (&sphere.0, &sphere.1),
    )?;
    let second = pullback_bundle(
        "s2xs2_second_factor",
        &chart,
        &[Expr::Coord(2), Expr::Coord(3)],
        (&sphere.0, &sphere.1),
    )?;
    Ok((first, second))
}

/// `T(S^2 x S^2)` as the Whitney sum of the two pulled-back sphere bundles.
fn product_s2xs2() -> Result<ModelBundle> {
    let (first, second) = product_s2xs2_factors()?;
    let (bundle, connection) =
        direct_sum("product_s2xs2", (&first.0, &first.1), (&second.0, &second.1))?;
    ModelBundle::assemble(
        "product_s2xs2",
        bundle,
        connection,
        4,
        "chi(S^2 x S^2) = chi(S^2) * chi(S^2) = 4",
        None,
    )
}

/// The sphere bundle pulled back along the degree-2 winding
/// `(theta, phi) -> (theta, 2 phi)`.
fn sphere_degree2_pullback() -> Result<ModelBundle> {
    let source = sphere_chart("winding_source")?;
    let sphere = rank2_single_chart("sphere_target", sphere_chart("sphere")?, ["0", "cos(theta)"])?;
    let map = vec![
        parse("theta", source.coordinates())?,
        parse("2*phi", source.coordinates())?,
    ];
    let (bundle, connection) =
        pullback_bundle("sphere_degree2_pullback", &source, &map, (&sphere.0, &sphere.1))?;
    ModelBundle::assemble(
        "sphere_degree2_pullback",
        bundle,
        connection,
        4,
        "pullback along a degree-2 map: chi = 2 * chi(S^2) = 4",
        Some(2),
    )
}
