//! Framed vector bundles with metric connections.
//!
//! A bundle is presented concretely: a list of frame patches (charts over a
//! shared coordinate system, index 0 the principal chart that covers the
//! manifold) and special-orthogonal transition matrices on overlap regions.
//! A metric connection assigns each patch a skew matrix of 1-forms `omega`
//! with the frames related by
//!
//! ```text
//! omega_to = (dA) A^T + A omega_from A^T,        f_to = A f_from,
//! ```
//!
//! and curvature `Omega = d omega - omega ^ omega` transforming by
//! conjugation, `Omega_to = A Omega_from A^T`. Both laws are checked
//! numerically by [`frame_change_report`], never assumed.

use crate::error::{Error, Result};
use crate::exprlang::{call, neg, Expr, Func};
use crate::forms::{same_chart, ChartDomain, ChartForm, Coefficient, FormError};
use crate::pfaffian::SkewFormMatrix;
use nalgebra::DMatrix;
use std::sync::Arc;

/// Sample density per axis when validating transition matrices.
const TRANSITION_SAMPLE_PER_AXIS: usize = 4;

/// Orthogonality tolerance for transition matrices, `max |A A^T - I|`.
const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Determinant tolerance for transition matrices, `|det A - 1|`.
const DETERMINANT_TOLERANCE: f64 = 1e-8;

/// Agreement tolerance for one perturbation 1-form given on two patches.
const PERTURBATION_OVERLAP_TOLERANCE: f64 = 1e-10;

/// Matrices of forms used for the intermediate products in the frame-change
/// and curvature computations; entries share a chart and a degree.
type FormMatrix = Vec<Vec<ChartForm>>;

/// Change of frame `f_to = A f_from` valid on `region`, a sub-box of the
/// shared coordinate system of the two patches.
#[derive(Debug, Clone)]
pub struct FrameTransition {
    from: usize,
    to: usize,
    region: Arc<ChartDomain>,
    matrix: Vec<Vec<Expr>>,
}

impl FrameTransition {
    pub fn new(
        from: usize,
        to: usize,
        region: Arc<ChartDomain>,
        matrix: Vec<Vec<Expr>>,
    ) -> FrameTransition {
        FrameTransition {
            from,
            to,
            region,
            matrix,
        }
    }

    pub fn from_index(&self) -> usize {
        self.from
    }

    pub fn to_index(&self) -> usize {
        self.to
    }

    pub fn region(&self) -> &Arc<ChartDomain> {
        &self.region
    }

    pub fn matrix(&self) -> &[Vec<Expr>] {
        &self.matrix
    }
}

/// An even-rank framed bundle: frame patches plus transitions.
#[derive(Debug, Clone)]
pub struct FramedBundle {
    name: String,
    rank: usize,
    charts: Vec<Arc<ChartDomain>>,
    transitions: Vec<FrameTransition>,
}

impl FramedBundle {
    pub fn new(
        name: impl Into<String>,
        rank: usize,
        charts: Vec<Arc<ChartDomain>>,
        transitions: Vec<FrameTransition>,
    ) -> Result<FramedBundle> {
        let name = name.into();
        let bad = |reason: String| Error::BadBundle {
            name: name.clone(),
            reason,
        };
        if rank == 0 || !rank.is_multiple_of(2) {
            return Err(bad(format!("rank must be even and positive, got {rank}")));
        }
        if charts.is_empty() {
            return Err(bad("a bundle needs at least one chart".into()));
        }
        if !charts[0].covers_manifold() {
            return Err(bad(format!(
                "principal chart `{}` must cover the manifold",
                charts[0].name()
            )));
        }
        let dim = charts[0].dim();
        for chart in &charts {
            if chart.dim() != dim {
                return Err(bad(format!(
                    "chart `{}` has dimension {}, expected {dim}",
                    chart.name(),
                    chart.dim()
                )));
            }
        }
        for t in &transitions {
            validate_transition(&charts, rank, t)?;
        }
        Ok(FramedBundle {
            name,
            rank,
            charts,
            transitions,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Half the rank; the exponent in the Euler form normalization.
    pub fn half_rank(&self) -> usize {
        self.rank / 2
    }

    pub fn charts(&self) -> &[Arc<ChartDomain>] {
        &self.charts
    }

    /// The chart the manifold integrals run over.
    pub fn principal_chart(&self) -> &Arc<ChartDomain> {
        &self.charts[0]
    }

    pub fn transitions(&self) -> &[FrameTransition] {
        &self.transitions
    }

    pub fn transition_between(&self, from: usize, to: usize) -> Option<&FrameTransition> {
        self.transitions
            .iter()
            .find(|t| t.from == from && t.to == to)
    }
}

fn validate_transition(
    charts: &[Arc<ChartDomain>],
    rank: usize,
    t: &FrameTransition,
) -> Result<()> {
    let bad = |reason: String| Error::BadTransition {
        from: t.from,
        to: t.to,
        reason,
    };
    if t.from >= charts.len() || t.to >= charts.len() || t.from == t.to {
        return Err(bad("chart indices out of range or equal".into()));
    }
    if t.matrix.len() != rank || t.matrix.iter().any(|row| row.len() != rank) {
        return Err(bad(format!("matrix must be {rank}x{rank}")));
    }
    for idx in [t.from, t.to] {
        let chart = &charts[idx];
        if chart.coordinates() != t.region.coordinates() {
            return Err(Error::CoordinateMismatch {
                left: chart.name().to_string(),
                right: t.region.name().to_string(),
            });
        }
        for (axis, ((rlo, rhi), (clo, chi))) in t
            .region
            .intervals()
            .iter()
            .zip(chart.intervals())
            .enumerate()
        {
            if rlo < clo || rhi > chi {
                return Err(bad(format!(
                    "region axis {axis} [{rlo}, {rhi}] leaves chart `{}`",
                    chart.name()
                )));
            }
        }
    }
    check_special_orthogonal(t)
}

fn check_special_orthogonal(t: &FrameTransition) -> Result<()> {
    let n = t.matrix.len();
    for point in t.region.interior_grid(TRANSITION_SAMPLE_PER_AXIS) {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = t.matrix[i][j].eval(&point)?;
            }
        }
        let identity = DMatrix::<f64>::identity(n, n);
        let ortho = (&a * a.transpose() - identity).abs().max();
        if ortho > ORTHOGONALITY_TOLERANCE {
            return Err(Error::BadTransition {
                from: t.from,
                to: t.to,
                reason: format!(
                    "matrix is not orthogonal at {point:?}: |A A^T - I| = {ortho:.3e}"
                ),
            });
        }
        let det = a.determinant();
        if (det - 1.0).abs() > DETERMINANT_TOLERANCE {
            return Err(Error::BadTransition {
                from: t.from,
                to: t.to,
                reason: format!("matrix is orientation-reversing at {point:?}: det = {det}"),
            });
        }
    }
    Ok(())
}

/// A metric connection: one skew matrix of 1-forms per frame patch.
#[derive(Debug, Clone)]
pub struct MetricConnection {
    matrices: Vec<SkewFormMatrix>,
}

impl MetricConnection {
    pub fn new(bundle: &FramedBundle, matrices: Vec<SkewFormMatrix>) -> Result<MetricConnection> {
        let bad = |reason: String| Error::BadBundle {
            name: bundle.name().to_string(),
            reason,
        };
        if matrices.len() != bundle.charts().len() {
            return Err(bad(format!(
                "connection has {} matrices for {} charts",
                matrices.len(),
                bundle.charts().len()
            )));
        }
        for (chart, m) in bundle.charts().iter().zip(&matrices) {
            if !same_chart(m.chart(), chart) {
                return Err(bad(format!(
                    "connection matrix chart `{}` does not match `{}`",
                    m.chart().name(),
                    chart.name()
                )));
            }
            if m.size() != bundle.rank() {
                return Err(bad(format!(
                    "connection matrix is {}x{0}, rank is {}",
                    m.size(),
                    bundle.rank()
                )));
            }
            if m.degree() != 1 {
                return Err(bad(format!(
                    "connection entries must be 1-forms, got degree {}",
                    m.degree()
                )));
            }
        }
        Ok(MetricConnection { matrices })
    }

    pub fn matrices(&self) -> &[SkewFormMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, chart_index: usize) -> &SkewFormMatrix {
        &self.matrices[chart_index]
    }

    /// Curvature matrices `Omega = d omega - omega ^ omega`, one per patch.
    pub fn curvature(&self) -> Result<Vec<SkewFormMatrix>> {
        self.matrices.iter().map(curvature_matrix).collect()
    }
}

/// Curvature of a single connection matrix.
pub fn curvature_matrix(omega: &SkewFormMatrix) -> Result<SkewFormMatrix> {
    let rows = skew_rows(omega);
    let d_omega = mat_d(&rows)?;
    let omega_squared = mat_wedge(&rows, &rows)?;
    Ok(SkewFormMatrix::new(mat_sub(&d_omega, &omega_squared)?)?)
}

/// Worst frame-change residuals over all transitions of a bundle.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrameChangeReport {
    /// `sup |omega_to - ((dA) A^T + A omega_from A^T)|` over sample grids.
    pub connection_residual: f64,
    /// `sup |Omega_to - A Omega_from A^T|` over sample grids.
    pub curvature_residual: f64,
}

/// Check the connection and curvature transformation laws on every
/// transition, sampling each region on a `per_axis`-per-axis interior grid.
pub fn frame_change_report(
    bundle: &FramedBundle,
    connection: &MetricConnection,
    per_axis: usize,
) -> Result<FrameChangeReport> {
    let mut report = FrameChangeReport::default();
    for t in bundle.transitions() {
        let region = t.region();
        let omega_from = reinterpret_matrix(connection.matrix(t.from_index()), region)?;
        let omega_to = reinterpret_matrix(connection.matrix(t.to_index()), region)?;
        let a = mat_from_exprs(region, t.matrix())?;
        let a_t = mat_transpose(&a);
        let da = mat_d(&a)?;

        let predicted = mat_add(
            &mat_wedge(&da, &a_t)?,
            &mat_wedge(&mat_wedge(&a, &omega_from)?, &a_t)?,
        )?;
        let r_conn = mat_sup(&mat_sub(&omega_to, &predicted)?, per_axis)?;
        report.connection_residual = report.connection_residual.max(r_conn);

        let curv_from = mat_sub(&mat_d(&omega_from)?, &mat_wedge(&omega_from, &omega_from)?)?;
        let curv_to = mat_sub(&mat_d(&omega_to)?, &mat_wedge(&omega_to, &omega_to)?)?;
        let conjugated = mat_wedge(&mat_wedge(&a, &curv_from)?, &a_t)?;
        let r_curv = mat_sup(&mat_sub(&curv_to, &conjugated)?, per_axis)?;
        report.curvature_residual = report.curvature_residual.max(r_curv);
    }
    Ok(report)
}

/// `sup |A_ik - A_jk A_ij|` over the common region of three frame patches,
/// for the registered transitions `i -> j`, `j -> k`, and `i -> k`.
pub fn cocycle_residual(bundle: &FramedBundle, triple: (usize, usize, usize)) -> Result<f64> {
    let (i, j, k) = triple;
    let missing = |from: usize, to: usize| Error::BadTransition {
        from,
        to,
        reason: "no transition registered between these patches".into(),
    };
    let t_ij = bundle.transition_between(i, j).ok_or_else(|| missing(i, j))?;
    let t_jk = bundle.transition_between(j, k).ok_or_else(|| missing(j, k))?;
    let t_ik = bundle.transition_between(i, k).ok_or_else(|| missing(i, k))?;

    let mut intervals = Vec::with_capacity(t_ij.region().dim());
    for axis in 0..t_ij.region().dim() {
        let lo = t_ij.region().intervals()[axis]
            .0
            .max(t_jk.region().intervals()[axis].0)
            .max(t_ik.region().intervals()[axis].0);
        let hi = t_ij.region().intervals()[axis]
            .1
            .min(t_jk.region().intervals()[axis].1)
            .min(t_ik.region().intervals()[axis].1);
        if lo >= hi {
            return Err(Error::BadTransition {
                from: i,
                to: k,
                reason: format!("the three regions have empty overlap on axis {axis}"),
            });
        }
        intervals.push((lo, hi));
    }
    let overlap = ChartDomain::new(
        "cocycle_overlap",
        t_ij.region().coordinates().to_vec(),
        intervals,
        false,
    )?;

    let a_ij = mat_from_exprs(&overlap, t_ij.matrix())?;
    let a_jk = mat_from_exprs(&overlap, t_jk.matrix())?;
    let a_ik = mat_from_exprs(&overlap, t_ik.matrix())?;
    let composed = mat_wedge(&a_jk, &a_ij)?;
    Ok(mat_sup(&mat_sub(&a_ik, &composed)?, 5)?)
}

/// Bianchi identity residual `sup |d Omega - (omega ^ Omega - Omega ^ omega)|`
/// over all patches. Degree-(dim) curvatures contribute zero: every form of
/// degree dim + 1 vanishes identically.
pub fn bianchi_residual(connection: &MetricConnection, per_axis: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for omega in connection.matrices() {
        let curvature = curvature_matrix(omega)?;
        if curvature.degree() >= omega.chart().dim() {
            continue;
        }
        let omega_rows = skew_rows(omega);
        let curv_rows = skew_rows(&curvature);
        let d_curv = mat_d(&curv_rows)?;
        let bracket = mat_sub(
            &mat_wedge(&omega_rows, &curv_rows)?,
            &mat_wedge(&curv_rows, &omega_rows)?,
        )?;
        worst = worst.max(mat_sup(&mat_sub(&d_curv, &bracket)?, per_axis)?);
    }
    Ok(worst)
}

/// Rotate a rank-2 frame by the angle field `alpha`: the connection form
/// picks up `d alpha` on its upper entry, and nothing else changes.
pub fn rotate_frame_rank2(omega: &SkewFormMatrix, alpha: &Expr) -> Result<SkewFormMatrix> {
    if omega.size() != 2 {
        return Err(Error::RankMismatch {
            want: 2,
            got: omega.size(),
        });
    }
    let chart = omega.chart().clone();
    let alpha_form = ChartForm::from_components(
        chart.clone(),
        0,
        [(vec![], Coefficient::Symbolic(alpha.clone()))],
    )?;
    let upper = omega.entry(0, 1).add(&alpha_form.exterior_derivative()?)?;
    Ok(SkewFormMatrix::from_upper(chart, 2, 1, vec![(0, 1, upper)])?)
}

/// The rank-2 rotation matrix `A(alpha)` with `f = A e`, as expressions.
pub fn rotation_matrix_exprs(alpha: &Expr) -> Vec<Vec<Expr>> {
    let cos = call(Func::Cos, alpha.clone());
    let sin = call(Func::Sin, alpha.clone());
    vec![
        vec![cos.clone(), sin.clone()],
        vec![neg(sin), cos],
    ]
}

/// Extend a single-chart rank-2 bundle with an auxiliary rotated frame
/// patch over the same coordinates, wiring up the transition and the
/// correspondingly rotated connection matrix.
pub fn with_rotated_aux_frame(
    bundle: &FramedBundle,
    connection: &MetricConnection,
    alpha: &Expr,
    frame_name: &str,
) -> Result<(FramedBundle, MetricConnection)> {
    if bundle.rank() != 2 {
        return Err(Error::RankMismatch {
            want: 2,
            got: bundle.rank(),
        });
    }
    if bundle.charts().len() != 1 {
        return Err(Error::BadBundle {
            name: bundle.name().to_string(),
            reason: "auxiliary frames are added to single-chart bundles".into(),
        });
    }
    let principal = bundle.principal_chart().clone();
    let rotated_chart = ChartDomain::new(
        frame_name,
        principal.coordinates().to_vec(),
        principal.intervals().to_vec(),
        false,
    )?;
    let region = ChartDomain::new(
        format!("{frame_name}_overlap"),
        principal.coordinates().to_vec(),
        principal.intervals().to_vec(),
        false,
    )?;
    let transition = FrameTransition::new(0, 1, region, rotation_matrix_exprs(alpha));

    let rotated_on_principal = rotate_frame_rank2(connection.matrix(0), alpha)?;
    let rotated_upper = reinterpret_on(rotated_on_principal.entry(0, 1), &rotated_chart)?;
    let rotated_matrix =
        SkewFormMatrix::from_upper(rotated_chart.clone(), 2, 1, vec![(0, 1, rotated_upper)])?;

    let extended = FramedBundle::new(
        bundle.name(),
        2,
        vec![principal, rotated_chart],
        vec![transition],
    )?;
    let extended_connection =
        MetricConnection::new(&extended, vec![connection.matrix(0).clone(), rotated_matrix])?;
    Ok((extended, extended_connection))
}

/// Perturb a rank-2 connection by `epsilon` times a global 1-form `tau`,
/// given per patch. The same `tau` must be presented on every patch: the
/// transition law adds the same `d alpha` to both sides, so any mismatch
/// means `tau` is not a single global form, and the perturbed connection
/// would be inconsistent.
pub fn perturb_connection(
    bundle: &FramedBundle,
    connection: &MetricConnection,
    tau: &[ChartForm],
    epsilon: f64,
) -> Result<MetricConnection> {
    if bundle.rank() != 2 {
        return Err(Error::RankMismatch {
            want: 2,
            got: bundle.rank(),
        });
    }
    if tau.len() != bundle.charts().len() {
        return Err(Error::BadBundle {
            name: bundle.name().to_string(),
            reason: format!(
                "perturbation gives {} forms for {} charts",
                tau.len(),
                bundle.charts().len()
            ),
        });
    }
    for (chart, form) in bundle.charts().iter().zip(tau) {
        if !same_chart(form.chart(), chart) || form.degree() != 1 {
            return Err(Error::BadBundle {
                name: bundle.name().to_string(),
                reason: "each perturbation entry must be a 1-form on its chart".into(),
            });
        }
    }
    for t in bundle.transitions() {
        let on_from = reinterpret_on(&tau[t.from_index()], t.region())?;
        let on_to = reinterpret_on(&tau[t.to_index()], t.region())?;
        let residual = on_from.sub(&on_to)?.sup_norm_on_grid(5)?;
        if residual > PERTURBATION_OVERLAP_TOLERANCE {
            return Err(Error::InconsistentPerturbation {
                from: t.from_index(),
                to: t.to_index(),
                residual,
            });
        }
    }
    let mut matrices = Vec::with_capacity(connection.matrices().len());
    for (omega, form) in connection.matrices().iter().zip(tau) {
        let upper = omega.entry(0, 1).add(&form.scale(epsilon))?;
        matrices.push(SkewFormMatrix::from_upper(
            omega.chart().clone(),
            2,
            1,
            vec![(0, 1, upper)],
        )?);
    }
    MetricConnection::new(bundle, matrices)
}

/// Whitney sum of two transition-free bundles over the same charts, with
/// the block-diagonal connection.
pub fn direct_sum(
    name: impl Into<String>,
    a: (&FramedBundle, &MetricConnection),
    b: (&FramedBundle, &MetricConnection),
) -> Result<(FramedBundle, MetricConnection)> {
    let name = name.into();
    let (a_bundle, a_conn) = a;
    let (b_bundle, b_conn) = b;
    if !a_bundle.transitions().is_empty() || !b_bundle.transitions().is_empty() {
        return Err(Error::BadBundle {
            name,
            reason: "direct sums are built from transition-free presentations".into(),
        });
    }
    if a_bundle.charts().len() != b_bundle.charts().len()
        || a_bundle
            .charts()
            .iter()
            .zip(b_bundle.charts())
            .any(|(x, y)| !same_chart(x, y))
    {
        return Err(Error::BadBundle {
            name,
            reason: "summands must live over the same charts".into(),
        });
    }
    let rank = a_bundle.rank() + b_bundle.rank();
    let mut matrices = Vec::with_capacity(a_bundle.charts().len());
    for (chart, (ma, mb)) in a_bundle
        .charts()
        .iter()
        .zip(a_conn.matrices().iter().zip(b_conn.matrices()))
    {
        let zero = ChartForm::zero(chart.clone(), 1)?;
        let ra = ma.size();
        let mut rows = vec![vec![zero; rank]; rank];
        #[allow(clippy::needless_range_loop)]
        for i in 0..ra {
            for j in 0..ra {
                rows[i][j] = ma.entry(i, j).clone();
            }
        }
        for i in 0..mb.size() {
            for j in 0..mb.size() {
                rows[ra + i][ra + j] = mb.entry(i, j).clone();
            }
        }
        matrices.push(SkewFormMatrix::new(rows)?);
    }
    let bundle = FramedBundle::new(name, rank, a_bundle.charts().to_vec(), Vec::new())?;
    let connection = MetricConnection::new(&bundle, matrices)?;
    Ok((bundle, connection))
}

/// Pull a single-chart bundle back along `map : source -> target chart`.
///
/// The connection matrix pulls back entrywise; the result is a bundle over
/// the source chart with the same rank.
pub fn pullback_bundle(
    name: impl Into<String>,
    source: &Arc<ChartDomain>,
    map: &[Expr],
    target: (&FramedBundle, &MetricConnection),
) -> Result<(FramedBundle, MetricConnection)> {
    let name = name.into();
    let (t_bundle, t_conn) = target;
    if t_bundle.charts().len() != 1 {
        return Err(Error::BadBundle {
            name,
            reason: "pullbacks take a single-chart presentation of the target".into(),
        });
    }
    let omega = t_conn.matrix(0);
    let rank = t_bundle.rank();
    let mut rows = Vec::with_capacity(rank);
    for i in 0..rank {
        let mut row = Vec::with_capacity(rank);
        for j in 0..rank {
            row.push(crate::forms::pullback(source, map, omega.entry(i, j))?);
        }
        rows.push(row);
    }
    let matrix = SkewFormMatrix::new(rows)?;
    let bundle = FramedBundle::new(name, rank, vec![source.clone()], Vec::new())?;
    let connection = MetricConnection::new(&bundle, vec![matrix])?;
    Ok((bundle, connection))
}

/// Rebuild a form on a chart with the same coordinate names (and order),
/// reusing its coefficients. Frame patches in this crate share coordinates,
/// so this is how patch data moves onto overlap regions or sibling patches
/// (for example, a perturbation drawn on the principal chart replicated
/// onto every other chart).
pub fn reinterpret_on(form: &ChartForm, chart: &Arc<ChartDomain>) -> Result<ChartForm> {
    if form.chart().coordinates() != chart.coordinates() {
        return Err(Error::CoordinateMismatch {
            left: form.chart().name().to_string(),
            right: chart.name().to_string(),
        });
    }
    Ok(ChartForm::from_components(
        chart.clone(),
        form.degree(),
        form.components().map(|(t, c)| (t.to_vec(), c.clone())),
    )?)
}

pub(crate) fn skew_rows(m: &SkewFormMatrix) -> FormMatrix {
    (0..m.size())
        .map(|i| (0..m.size()).map(|j| m.entry(i, j).clone()).collect())
        .collect()
}

fn reinterpret_matrix(m: &SkewFormMatrix, chart: &Arc<ChartDomain>) -> Result<FormMatrix> {
    (0..m.size())
        .map(|i| {
            (0..m.size())
                .map(|j| reinterpret_on(m.entry(i, j), chart))
                .collect()
        })
        .collect()
}

fn mat_from_exprs(chart: &Arc<ChartDomain>, entries: &[Vec<Expr>]) -> Result<FormMatrix> {
    entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    Ok(ChartForm::from_components(
                        chart.clone(),
                        0,
                        [(vec![], Coefficient::Symbolic(e.clone()))],
                    )?)
                })
                .collect()
        })
        .collect()
}

fn mat_transpose(m: &FormMatrix) -> FormMatrix {
    let rows = m.len();
    let cols = m[0].len();
    (0..cols)
        .map(|j| (0..rows).map(|i| m[i][j].clone()).collect())
        .collect()
}

fn mat_d(m: &FormMatrix) -> std::result::Result<FormMatrix, FormError> {
    m.iter()
        .map(|row| row.iter().map(|f| f.exterior_derivative()).collect())
        .collect()
}

fn mat_wedge(a: &FormMatrix, b: &FormMatrix) -> std::result::Result<FormMatrix, FormError> {
    let inner = b.len();
    let mut out = Vec::with_capacity(a.len());
    for row in a {
        let mut out_row = Vec::with_capacity(b[0].len());
        #[allow(clippy::needless_range_loop)]
        for j in 0..b[0].len() {
            let mut acc = row[0].wedge(&b[0][j])?;
            for (k, entry) in row.iter().enumerate().skip(1).take(inner - 1) {
                acc = acc.add(&entry.wedge(&b[k][j])?)?;
            }
            out_row.push(acc);
        }
        out.push(out_row);
    }
    Ok(out)
}

fn mat_add(a: &FormMatrix, b: &FormMatrix) -> std::result::Result<FormMatrix, FormError> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add(y)).collect())
        .collect()
}

fn mat_sub(a: &FormMatrix, b: &FormMatrix) -> std::result::Result<FormMatrix, FormError> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.sub(y)).collect())
        .collect()
}

fn mat_sup(m: &FormMatrix, per_axis: usize) -> std::result::Result<f64, FormError> {
    let mut worst = 0.0f64;
    for row in m {
        for entry in row {
            worst = worst.max(entry.sup_norm_on_grid(per_axis)?);
        }
    }
    Ok(worst)
}
