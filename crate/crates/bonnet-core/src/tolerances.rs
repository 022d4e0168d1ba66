//! Every numeric tolerance the verification suites use, in one place.
//!
//! Each constant states what drives its size. Residuals come in three
//! families: pure floating-point noise (identities that hold exactly in
//! real arithmetic, bounded by rounding through the longest evaluation
//! path), finite-difference noise (identities routed through the opaque
//! coefficient fallback with step `h ~ 1e-5`, so errors of order `h^2`
//! amplified by third derivatives), and discretization error (midpoint
//! sums on a stated grid). Tolerances sit two to four orders of magnitude
//! above the observed residual so that a genuine regression trips them
//! while platform-to-platform rounding drift does not.

/// Euler characteristic reproduction for surface models at resolution 96
/// or finer: midpoint error decays quadratically and is ~1e-5 at 96 for
/// the catalog integrands; 1e-3 also absorbs the monopole charge-3 case.
pub const GAUSS_BONNET_SURFACE_ABS: f64 = 1e-3;

/// Euler characteristic reproduction for the 4-dimensional product model
/// at resolution 32 per axis, where the midpoint error is ~3e-3.
pub const GAUSS_BONNET_PRODUCT_ABS: f64 = 5e-2;

/// Agreement between the degree-2 pullback integral and `deg * chi`:
/// quadrature-limited at the resolutions the suite uses.
pub const NATURALITY_ABS: f64 = 1e-2;

/// The charge -2 monopole and the round sphere tangent bundle integrate
/// the same density up to frame bookkeeping; the integrals agree to
/// rounding, far below this bound.
pub const MONOPOLE_SPHERE_MATCH_ABS: f64 = 1e-6;

/// Drift of the Euler integral when the connection is perturbed by a
/// closed-manifold-compatible 1-form: the integrand changes by an exact
/// form whose full-period midpoint sum cancels to rounding.
pub const PERTURBATION_DRIFT_ABS: f64 = 1e-3;

/// `d(d omega) = 0` on random forms. Symbolic coefficients leave ~1e-12;
/// opaque coefficients route through central differences whose rounding
/// is amplified by `1/h^2 = 1e10`, leaving ~1e-6 for order-one values.
pub const FORMS_DD_RESIDUAL: f64 = 1e-4;

/// `a ^ b = (-1)^(pq) b ^ a`: products commute exactly, only the
/// summation order differs, so the residual is a few ulps.
pub const FORMS_WEDGE_SIGN_RESIDUAL: f64 = 1e-10;

/// Leibniz rule `d(a^b) = da^b + (-1)^p a^db` with opaque coefficients:
/// two different O(h^2) derivative estimates of the same product differ
/// by ~1e-8 for the tame expression family.
pub const FORMS_LEIBNIZ_RESIDUAL: f64 = 1e-5;

/// Pullback functoriality `(g o f)* = f* g*`: symbolic composition, so
/// the two sides differ only in expression-tree shape.
pub const FORMS_PULLBACK_FUNCTORIALITY: f64 = 1e-10;

/// `d` commutes with pullback: the chain rule applied in two orders,
/// symbolic throughout.
pub const FORMS_PULLBACK_COMMUTES_WITH_D: f64 = 1e-8;

/// Midpoint integration of `sin(x) dx^dy` on `(0,pi)x(0,2pi)` against the
/// exact value 4pi at 128 points per axis (error ~2.5e-4).
pub const QUADRATURE_CONVERGENCE_ABS: f64 = 1e-3;

/// `Pf(A)^2 = det(A)` relative to an LU determinant, random matrices up
/// to size 8: both sides accumulate rounding through ~100 terms.
pub const PFAFFIAN_DET_REL: f64 = 1e-8;

/// First-row and first-column Pfaffian recursions agree: identical term
/// sets summed in different orders, entries of order one.
pub const PFAFFIAN_RECURSION_ABS: f64 = 1e-10;

/// `Pf(R A R^T) = Pf(A)` for special orthogonal `R`: rounding through two
/// matrix products.
pub const PFAFFIAN_CONJUGATION_ABS: f64 = 1e-9;

/// `Pf(A + B) = Pf(A) Pf(B)` for block-diagonal sums (direct arithmetic
/// identity, rounding only).
pub const PFAFFIAN_BLOCK_ABS: f64 = 1e-10;

/// Connection and curvature transformation laws across catalog frame
/// patches: symbolic matrices, residual is rounding through the matrix
/// algebra (~1e-13 observed).
pub const FRAME_LAW_RESIDUAL: f64 = 1e-8;

/// The Pfaffian of the curvature computed in two overlapping frames is
/// the same function on the overlap; symbolic, rounding only.
pub const PFAFFIAN_GLOBALITY_RESIDUAL: f64 = 1e-8;

/// Second Bianchi identity `d Omega = omega^Omega - Omega^omega` where
/// the degree allows a nontrivial statement; symbolic differentiation.
pub const BIANCHI_RESIDUAL: f64 = 1e-4;

/// Cocycle condition `A_ik = A_jk A_ij` on triple overlaps, sampled.
pub const COCYCLE_RESIDUAL: f64 = 1e-10;

/// Curvature is unchanged by a position-dependent frame rotation; the
/// residual is `d(d alpha)` evaluated symbolically.
pub const ROTATION_INVARIANCE_RESIDUAL: f64 = 1e-8;

/// The Euler form of a direct sum equals the wedge of the factor
/// Pfaffians (with the shared normalization), pointwise.
pub const BLOCK_EULER_POINTWISE: f64 = 1e-10;

/// The Euler form is closed where its degree is below the chart
/// dimension (checked on the 4-dimensional product chart).
pub const EULER_FORM_CLOSEDNESS: f64 = 1e-3;

/// Fiber integral of the Thom form: the radial Simpson rule at the
/// default sample count resolves the bump profile to ~1e-9; 1e-6 leaves
/// margin for coarser settings.
pub const THOM_FIBER_MASS_ABS: f64 = 1e-6;

/// Spread of the fiber mass across base points: the fiber coefficient
/// does not depend on the base point, so the masses agree bitwise.
pub const THOM_BASEPOINT_SPREAD: f64 = 1e-9;

/// Sup of `|d u|` over the total-space grid: the profile factors are
/// opaque, so the residual is finite-difference noise scaled by the
/// profile's derivatives.
pub const THOM_CLOSEDNESS_RESIDUAL: f64 = 1e-3;

/// The Thom forms assembled in two rotated fiber frames agree pointwise;
/// the algebraic cancellation is exact, leaving `gamma * d(d alpha)`
/// rounding noise.
pub const THOM_FRAME_INVARIANCE: f64 = 1e-8;

/// Restricting the Thom form to the zero section reproduces the Euler
/// form exactly (gamma(0) = 1 by construction), pointwise.
pub const THOM_RESTRICTION_POINTWISE: f64 = 1e-10;

/// The Thom form vanishes identically outside the unit disk bundle: the
/// profile underflows to exact zeros there, so the bound is zero.
pub const THOM_SUPPORT_ABS: f64 = 0.0;
