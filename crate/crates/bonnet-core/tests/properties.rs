//! Property tests for the expression language and the wedge product.
//!
//! These complement the seeded suites in `verify`: instead of a fixed
//! stream, proptest searches the expression space and shrinks failures to
//! minimal counterexamples.

use bonnet_core::exprlang::{Expr, Func};
use bonnet_core::forms::{sup_difference, ChartDomain, ChartForm, Coefficient};
use proptest::prelude::*;
use std::sync::Arc;

/// Expressions over `n_coords` coordinates: bounded constants, sums,
/// differences, shallow products, squares, and sin/cos. Everything in the
/// family is smooth and finite on the test box.
fn expr_strategy(n_coords: usize, depth: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-20i32..=20).prop_map(|k| Expr::Number(f64::from(k) / 10.0)),
        (0..n_coords).prop_map(Expr::Coord),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
            inner.clone().prop_map(|a| Expr::Call(Func::Cos, Box::new(a))),
            inner.prop_map(|a| Expr::Pow(Box::new(a), 2)),
        ]
    })
}

fn test_chart(dim: usize) -> Arc<ChartDomain> {
    ChartDomain::new(
        "property",
        (0..dim).map(|i| format!("x{i}")).collect(),
        vec![(0.2, 1.8); dim],
        true,
    )
    .unwrap()
}

/// A 1-form whose components come from the expression strategy.
fn one_form_strategy(dim: usize) -> impl Strategy<Value = ChartForm> {
    prop::collection::vec(expr_strategy(dim, 2), dim).prop_map(move |components| {
        ChartForm::from_components(
            test_chart(dim),
            1,
            components
                .into_iter()
                .enumerate()
                .map(|(i, e)| (vec![i], Coefficient::Symbolic(e))),
        )
        .unwrap()
    })
}

proptest! {
    /// The symbolic derivative agrees with a central difference. The bound
    /// is relative and loose: it trips on any wrong differentiation rule
    /// (those are order-one relative errors) while staying insensitive to
    /// the stiffness of the sampled expression.
    #[test]
    fn symbolic_derivative_matches_central_differences(
        e in expr_strategy(2, 3),
        point in prop::collection::vec(0.3f64..1.5, 2),
        coord in 0usize..2,
    ) {
        let exact = e.differentiate(coord).eval(&point).unwrap();
        let h = 1e-6;
        let mut hi = point.clone();
        let mut lo = point.clone();
        hi[coord] += h;
        lo[coord] -= h;
        let fd = (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h);
        let scale = 1.0 + exact.abs().max(fd.abs());
        prop_assert!(
            (exact - fd).abs() <= 1e-3 * scale,
            "exact {exact}, finite difference {fd}"
        );
    }

    /// Substituting and then evaluating equals evaluating the map first.
    #[test]
    fn substitution_commutes_with_evaluation(
        e in expr_strategy(2, 3),
        inner in prop::collection::vec(expr_strategy(2, 2), 2),
        point in prop::collection::vec(0.3f64..1.5, 2),
    ) {
        let substituted = e.substitute(&inner).unwrap().eval(&point).unwrap();
        let mapped: Vec<f64> = inner
            .iter()
            .map(|c| c.eval(&point).unwrap())
            .collect();
        let direct = e.eval(&mapped).unwrap();
        let scale = 1.0 + direct.abs();
        prop_assert!(
            (substituted - direct).abs() <= 1e-9 * scale,
            "substituted {substituted}, direct {direct}"
        );
    }

    /// 1-forms anticommute: `a ^ b + b ^ a = 0`.
    #[test]
    fn one_forms_anticommute(
        a in one_form_strategy(3),
        b in one_form_strategy(3),
    ) {
        let residual = sup_difference(&a.wedge(&b).unwrap(), &b.wedge(&a).unwrap().neg(), 3).unwrap();
        prop_assert!(residual <= 1e-9, "residual {residual}");
    }

    /// The wedge product is associative.
    #[test]
    fn wedge_is_associative(
        a in one_form_strategy(3),
        b in one_form_strategy(3),
        c in one_form_strategy(3),
    ) {
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        let residual = sup_difference(&left, &right, 3).unwrap();
        prop_assert!(residual <= 1e-9, "residual {residual}");
    }
}
