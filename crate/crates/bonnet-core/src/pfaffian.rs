//! Pfaffians of skew-symmetric matrices.
//!
//! Two instantiations of the same first-row expansion: one over plain real
//! matrices, one over matrices whose entries are forms of a common even
//! degree (even degree keeps the wedge product commutative, which is what
//! the expansion needs). The recursion is
//!
//! ```text
//! Pf(A) = sum_{j=2}^{2q} (-1)^j A_{1j} ^ Pf(A with rows/cols 1 and j removed)
//! ```
//!
//! with `Pf` of the empty matrix equal to 1, so a 2x2 block contributes its
//! upper entry. `Pf^2 = det` and invariance under special orthogonal
//! conjugation are verified, not assumed.

use crate::forms::{same_chart, ChartDomain, ChartForm, FormError};
use nalgebra::DMatrix;
use std::sync::Arc;
use thiserror::Error;

/// How finely each chart axis is sampled when checking skewness.
const SKEW_SAMPLE_PER_AXIS: usize = 3;

/// Absolute tolerance for the sampled skewness check.
const SKEW_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PfaffianError {
    #[error("matrix of size {0} is not square or not of even size")]
    BadShape(usize),
    #[error("entry ({row},{col}) breaks skew symmetry: residual {residual:.3e} at {point:?}")]
    NotSkew {
        row: usize,
        col: usize,
        residual: f64,
        point: Vec<f64>,
    },
    #[error("entries must share one chart and one degree; entry ({row},{col}) differs")]
    MixedEntries { row: usize, col: usize },
    #[error("entries have odd degree {0}; the Pfaffian needs a commutative product")]
    OddEntryDegree(usize),
    #[error("matrix is not special orthogonal: {reason}")]
    NotSpecialOrthogonal { reason: String },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Skew-symmetric matrix of forms on one chart, all entries of equal degree.
///
/// Construction samples `A_ij + A_ji` on an interior grid and rejects
/// loudly, naming the worst offending entry and sample point.
#[derive(Debug, Clone)]
pub struct SkewFormMatrix {
    chart: Arc<ChartDomain>,
    size: usize,
    degree: usize,
    entries: Vec<ChartForm>,
}

impl SkewFormMatrix {
    pub fn new(rows: Vec<Vec<ChartForm>>) -> Result<SkewFormMatrix, PfaffianError> {
        let size = rows.len();
        if size == 0 || rows.iter().any(|r| r.len() != size) {
            return Err(PfaffianError::BadShape(size));
        }
        let chart = rows[0][0].chart().clone();
        let degree = rows[0][0].degree();
        for (i, row) in rows.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                if !same_chart(entry.chart(), &chart) || entry.degree() != degree {
                    return Err(PfaffianError::MixedEntries { row: i, col: j });
                }
            }
        }
        let entries: Vec<ChartForm> = rows.into_iter().flatten().collect();
        let matrix = SkewFormMatrix {
            chart,
            size,
            degree,
            entries,
        };
        matrix.check_skew()?;
        Ok(matrix)
    }

    /// Build from the strict upper triangle; the lower triangle and diagonal
    /// are filled in by skew symmetry.
    pub fn from_upper(
        chart: Arc<ChartDomain>,
        size: usize,
        degree: usize,
        upper: Vec<(usize, usize, ChartForm)>,
    ) -> Result<SkewFormMatrix, PfaffianError> {
        let zero = ChartForm::zero(chart.clone(), degree)?;
        let mut rows = vec![vec![zero; size]; size];
        for (i, j, form) in upper {
            if i >= j || j >= size {
                return Err(PfaffianError::MixedEntries { row: i, col: j });
            }
            rows[j][i] = form.neg();
            rows[i][j] = form;
        }
        SkewFormMatrix::new(rows)
    }

    pub fn zero(
        chart: Arc<ChartDomain>,
        size: usize,
        degree: usize,
    ) -> Result<SkewFormMatrix, PfaffianError> {
        SkewFormMatrix::from_upper(chart, size, degree, Vec::new())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn chart(&self) -> &Arc<ChartDomain> {
        &self.chart
    }

    pub fn entry(&self, row: usize, col: usize) -> &ChartForm {
        &self.entries[row * self.size + col]
    }

    /// Worst sampled skewness residual, `max |A_ij + A_ji|` including the
    /// diagonal, over the interior sample grid.
    pub fn skew_residual(&self) -> Result<f64, PfaffianError> {
        let mut worst = 0.0f64;
        for i in 0..self.size {
            for j in i..self.size {
                let sum = self.entry(i, j).add(self.entry(j, i))?;
                worst = worst.max(sum.sup_norm_on_grid(SKEW_SAMPLE_PER_AXIS)?);
            }
        }
        Ok(worst)
    }

    fn check_skew(&self) -> Result<(), PfaffianError> {
        let grid = self.chart.interior_grid(SKEW_SAMPLE_PER_AXIS);
        for i in 0..self.size {
            for j in i..self.size {
                let sum = self.entry(i, j).add(self.entry(j, i))?;
                for point in &grid {
                    for (_, value) in sum.evaluate(point)? {
                        if value.abs() > SKEW_TOLERANCE {
                            return Err(PfaffianError::NotSkew {
                                row: i,
                                col: j,
                                residual: value.abs(),
                                point: point.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Pfaffian of a matrix of even-degree forms, by first-row expansion.
///
/// The result has degree `(size/2) * entry degree`; the empty matrix has
/// Pfaffian 1 (the constant 0-form).
pub fn pfaffian(matrix: &SkewFormMatrix) -> Result<ChartForm, PfaffianError> {
    if !matrix.size.is_multiple_of(2) {
        return Err(PfaffianError::BadShape(matrix.size));
    }
    if !matrix.degree.is_multiple_of(2) {
        return Err(PfaffianError::OddEntryDegree(matrix.degree));
    }
    let active: Vec<usize> = (0..matrix.size).collect();
    expand_forms(matrix, &active)
}

fn expand_forms(matrix: &SkewFormMatrix, active: &[usize]) -> Result<ChartForm, PfaffianError> {
    if active.is_empty() {
        return Ok(ChartForm::constant(matrix.chart.clone(), 1.0));
    }
    let first = active[0];
    let target_degree = (active.len() / 2) * matrix.degree;
    let mut total = ChartForm::zero(matrix.chart.clone(), target_degree)?;
    for k in 1..active.len() {
        let j = active[k];
        let minor: Vec<usize> = active[1..]
            .iter()
            .copied()
            .filter(|&idx| idx != j)
            .collect();
        let sub = expand_forms(matrix, &minor)?;
        let mut term = matrix.entry(first, j).wedge(&sub)?;
        if k % 2 == 0 {
            term = term.scale(-1.0);
        }
        total = total.add(&term)?;
    }
    Ok(total)
}

fn check_real_skew(a: &DMatrix<f64>) -> Result<(), PfaffianError> {
    if !a.is_square() || !a.nrows().is_multiple_of(2) || a.nrows() == 0 {
        return Err(PfaffianError::BadShape(a.nrows()));
    }
    let scale = a.abs().max().max(1.0);
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            let residual = (a[(i, j)] + a[(j, i)]).abs();
            if residual > SKEW_TOLERANCE * scale {
                return Err(PfaffianError::NotSkew {
                    row: i,
                    col: j,
                    residual,
                    point: Vec::new(),
                });
            }
        }
    }
    Ok(())
}

/// Pfaffian of a real skew-symmetric matrix by first-row expansion.
pub fn pfaffian_real(a: &DMatrix<f64>) -> Result<f64, PfaffianError> {
    check_real_skew(a)?;
    let active: Vec<usize> = (0..a.nrows()).collect();
    Ok(expand_real_rows(a, &active))
}

fn expand_real_rows(a: &DMatrix<f64>, active: &[usize]) -> f64 {
    if active.is_empty() {
        return 1.0;
    }
    let first = active[0];
    let mut total = 0.0;
    for k in 1..active.len() {
        let j = active[k];
        let minor: Vec<usize> = active[1..]
            .iter()
            .copied()
            .filter(|&idx| idx != j)
            .collect();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * a[(first, j)] * expand_real_rows(a, &minor);
    }
    total
}

/// Pfaffian by expansion down the first column instead of across the first
/// row; an independent bookkeeping path used to cross-check signs.
pub fn pfaffian_real_first_column(a: &DMatrix<f64>) -> Result<f64, PfaffianError> {
    check_real_skew(a)?;
    let active: Vec<usize> = (0..a.nrows()).collect();
    Ok(expand_real_cols(a, &active))
}

fn expand_real_cols(a: &DMatrix<f64>, active: &[usize]) -> f64 {
    if active.is_empty() {
        return 1.0;
    }
    let first = active[0];
    let mut total = 0.0;
    for k in 1..active.len() {
        let j = active[k];
        let minor: Vec<usize> = active[1..]
            .iter()
            .copied()
            .filter(|&idx| idx != j)
            .collect();
        // Reads the lower triangle: A[j, first] = -A[first, j].
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        total += sign * a[(j, first)] * expand_real_cols(a, &minor);
    }
    total
}

/// Verify that `r` is special orthogonal (within `tol`), then return
/// `|Pf(r a r^T) - Pf(a)|`.
pub fn conjugation_residual(
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    tol: f64,
) -> Result<f64, PfaffianError> {
    if !r.is_square() || r.nrows() != a.nrows() {
        return Err(PfaffianError::NotSpecialOrthogonal {
            reason: format!("shape {}x{}", r.nrows(), r.ncols()),
        });
    }
    let identity = DMatrix::<f64>::identity(r.nrows(), r.ncols());
    let ortho = (r * r.transpose() - identity).abs().max();
    if ortho > tol {
        return Err(PfaffianError::NotSpecialOrthogonal {
            reason: format!("r r^T deviates from identity by {ortho:.3e}"),
        });
    }
    let det = r.determinant();
    if (det - 1.0).abs() > 1e-8 {
        return Err(PfaffianError::NotSpecialOrthogonal {
            reason: format!("determinant {det}"),
        });
    }
    let conjugated = r * a * r.transpose();
    Ok((pfaffian_real(&conjugated)? - pfaffian_real(a)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use crate::forms::{sup_difference, Coefficient};
    use crate::sampling;

    #[test]
    fn two_by_two_pfaffian_is_the_upper_entry() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.7, -3.7, 0.0]);
        assert_eq!(pfaffian_real(&a).unwrap(), 3.7);
    }

    #[test]
    fn four_by_four_hand_computed() {
        // Pf = a12*a34 - a13*a24 + a14*a23 = 1*6 - 2*5 + 3*4 = 8.
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 2.0, 3.0, //
                -1.0, 0.0, 4.0, 5.0, //
                -2.0, -4.0, 0.0, 6.0, //
                -3.0, -5.0, -6.0, 0.0,
            ],
        );
        let pf = pfaffian_real(&a).unwrap();
        assert_eq!(pf, 8.0);
        assert!((pf * pf - a.determinant()).abs() < 1e-9);
    }

    #[test]
    fn block_diagonal_pfaffian_multiplies() {
        let mut a = DMatrix::zeros(6, 6);
        let lambdas = [1.5, -2.0, 0.75];
        for (b, l) in lambdas.iter().enumerate() {
            a[(2 * b, 2 * b + 1)] = *l;
            a[(2 * b + 1, 2 * b)] = -*l;
        }
        let expected: f64 = lambdas.iter().product();
        assert!((pfaffian_real(&a).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn squared_pfaffian_is_the_determinant() {
        let mut rng = sampling::rng(100);
        for size in [2usize, 4, 6, 8] {
            for _ in 0..5 {
                let a = sampling::random_skew_matrix(&mut rng, size);
                let pf = pfaffian_real(&a).unwrap();
                // LU-based determinant is the oracle here.
                let det = a.determinant();
                let denom = det.abs().max(1.0);
                assert!(
                    (pf * pf - det).abs() / denom < 1e-8,
                    "size {size}: pf^2 {} vs det {det}",
                    pf * pf
                );
            }
        }
    }

    #[test]
    fn row_and_column_expansions_agree() {
        let mut rng = sampling::rng(101);
        for _ in 0..10 {
            let a = sampling::random_skew_matrix(&mut rng, 6);
            let row = pfaffian_real(&a).unwrap();
            let col = pfaffian_real_first_column(&a).unwrap();
            assert!((row - col).abs() < 1e-10, "{row} vs {col}");
        }
    }

    #[test]
    fn conjugation_by_rotations_preserves_the_pfaffian() {
        let mut rng = sampling::rng(102);
        for size in [2usize, 4, 6, 8] {
            for _ in 0..5 {
                let a = sampling::random_skew_matrix(&mut rng, size);
                let r = sampling::random_rotation(&mut rng, size);
                let residual = conjugation_residual(&a, &r, 1e-10).unwrap();
                assert!(residual < 1e-8, "size {size}: residual {residual}");
            }
        }
    }

    #[test]
    fn reflections_are_rejected() {
        let mut rng = sampling::rng(103);
        let a = sampling::random_skew_matrix(&mut rng, 4);
        let mut r = sampling::random_rotation(&mut rng, 4);
        for i in 0..4 {
            r[(i, 0)] = -r[(i, 0)];
        }
        assert!(matches!(
            conjugation_residual(&a, &r, 1e-10),
            Err(PfaffianError::NotSpecialOrthogonal { .. })
        ));
    }

    #[test]
    fn shape_and_skewness_are_enforced() {
        let odd = DMatrix::<f64>::zeros(3, 3);
        assert!(matches!(pfaffian_real(&odd), Err(PfaffianError::BadShape(3))));
        let mut not_skew = DMatrix::<f64>::zeros(2, 2);
        not_skew[(0, 1)] = 1.0;
        not_skew[(1, 0)] = 1.0;
        assert!(matches!(
            pfaffian_real(&not_skew),
            Err(PfaffianError::NotSkew { .. })
        ));
    }

    fn form_chart() -> Arc<ChartDomain> {
        ChartDomain::new(
            "product",
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![(0.1, 3.0), (0.1, 6.0), (0.1, 3.0), (0.1, 6.0)],
            false,
        )
        .unwrap()
    }

    fn two_form(chart: &Arc<ChartDomain>, tuple: [usize; 2], src: &str) -> ChartForm {
        ChartForm::from_components(
            chart.clone(),
            2,
            [(
                tuple.to_vec(),
                Coefficient::Symbolic(parse(src, chart.coordinates()).unwrap()),
            )],
        )
        .unwrap()
    }

    #[test]
    fn form_pfaffian_of_2x2_is_upper_entry() {
        let chart = form_chart();
        let omega = two_form(&chart, [0, 1], "sin(a)*b");
        let matrix =
            SkewFormMatrix::from_upper(chart, 2, 2, vec![(0, 1, omega.clone())]).unwrap();
        let pf = pfaffian(&matrix).unwrap();
        assert_eq!(sup_difference(&pf, &omega, 3).unwrap(), 0.0);
    }

    #[test]
    fn form_pfaffian_of_block_diagonal_is_wedge_of_blocks() {
        let chart = form_chart();
        let first = two_form(&chart, [0, 1], "sin(a)");
        let second = two_form(&chart, [2, 3], "sin(c)");
        let matrix = SkewFormMatrix::from_upper(
            chart.clone(),
            4,
            2,
            vec![(0, 1, first.clone()), (2, 3, second.clone())],
        )
        .unwrap();
        let pf = pfaffian(&matrix).unwrap();
        let expected = first.wedge(&second).unwrap();
        assert!(sup_difference(&pf, &expected, 3).unwrap() < 1e-12);
    }

    #[test]
    fn form_matrix_rejects_non_skew_samples() {
        let chart = form_chart();
        let omega = two_form(&chart, [0, 1], "a");
        let not_skew = vec![
            vec![
                ChartForm::zero(chart.clone(), 2).unwrap(),
                omega.clone(),
            ],
            vec![omega, ChartForm::zero(chart.clone(), 2).unwrap()],
        ];
        assert!(matches!(
            SkewFormMatrix::new(not_skew),
            Err(PfaffianError::NotSkew { .. })
        ));
    }

    #[test]
    fn form_pfaffian_rejects_odd_entry_degree() {
        let chart = form_chart();
        let one_form = ChartForm::coordinate_differential(chart.clone(), 0).unwrap();
        let matrix = SkewFormMatrix::from_upper(chart, 2, 1, vec![(0, 1, one_form)]).unwrap();
        assert!(matches!(
            pfaffian(&matrix),
            Err(PfaffianError::OddEntryDegree(1))
        ));
    }
}
