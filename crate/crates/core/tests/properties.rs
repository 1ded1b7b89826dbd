//! Engine-level properties: arithmetic and differentiation against the
//! naive oracle, field laws on rational functions, text round trips.

mod common;

use std::sync::Arc;

use common::oracle::Naive;
use common::*;
use conslaw_core::{Expression, JetContext};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

fn engine(c: &Arc<JetContext>, d: &PolyData) -> Expression {
    to_engine(c, &build(2, &plane_gens(), d))
}

fn huge() -> BigRational {
    BigRational::new(BigInt::from(10).pow(30) + 7, BigInt::from(11))
}

fn quotient(c: &Arc<JetContext>, n: &PolyData, d: &PolyData) -> Result<Option<Expression>, TestCaseError> {
    let den = engine(c, d);
    if den.is_zero() {
        return Ok(None);
    }
    engine(c, n).checked_div(&den).map(Some).map_err(|e| TestCaseError::fail(e.to_string()))
}

fn td(f: &Expression, i: usize) -> Expression {
    f.total_derivative(i).expect("valid variable")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn products_match_oracle(a in poly_data(5, 3, 5), b in poly_data(5, 3, 5), big in any::<bool>()) {
        let c = evo_ctx();
        let g = plane_gens();
        let mut na = build(2, &g, &a);
        if big {
            na = na.scale_q(&huge());
        }
        let nb = build(2, &g, &b);
        let got = &to_engine(&c, &na) * &to_engine(&c, &nb);
        prop_assert_eq!(got, to_engine(&c, &na.mul(&nb)));
    }

    #[test]
    fn total_derivatives_match_oracle(a in poly_data(5, 3, 4), i in 0usize..2) {
        let c = evo_ctx();
        let n = build(2, &plane_gens(), &a);
        prop_assert_eq!(td(&to_engine(&c, &n), i), to_engine(&c, &n.d(i)));
    }

    #[test]
    fn rational_field_laws(a in poly_data(5, 2, 3), b in poly_data(5, 2, 3), d in poly_data(5, 2, 3)) {
        let c = evo_ctx();
        let Some(q) = quotient(&c, &a, &d)? else { return Ok(()) };
        let Some(r) = quotient(&c, &b, &d)? else { return Ok(()) };
        let den = engine(&c, &d);
        prop_assert_eq!(&(&q + &r) * &den, engine(&c, &a) + engine(&c, &b));
        prop_assert_eq!(&(&q - &r) + &r, q.clone());
        if !q.is_zero() {
            let inv = den.checked_div(&engine(&c, &a)).unwrap();
            prop_assert_eq!(&q * &inv, Expression::one(&c));
        }
    }

    #[test]
    fn leibniz_rule(a in poly_data(5, 2, 3), b in poly_data(5, 2, 2), d in poly_data(5, 1, 2), i in 0usize..2) {
        let c = evo_ctx();
        let Some(f) = quotient(&c, &a, &d)? else { return Ok(()) };
        let g = engine(&c, &b);
        prop_assert_eq!(td(&(&f * &g), i), &(&td(&f, i) * &g) + &(&f * &td(&g, i)));
    }

    #[test]
    fn total_derivatives_commute(a in poly_data(5, 2, 3), d in poly_data(5, 1, 2)) {
        let c = evo_ctx();
        let Some(f) = quotient(&c, &a, &d)? else { return Ok(()) };
        prop_assert_eq!(td(&td(&f, 0), 1), td(&td(&f, 1), 0));
    }

    #[test]
    fn display_round_trips(a in poly_data(5, 2, 3), d in poly_data(5, 2, 2)) {
        let c = evo_ctx();
        let Some(f) = quotient(&c, &a, &d)? else { return Ok(()) };
        let text = f.to_string();
        let back = Expression::parse(&c, &text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, f);
    }

    #[test]
    fn euler_matches_oracle(a in poly_data(5, 2, 3)) {
        let c = evo_ctx();
        let n: Naive = build(2, &plane_gens(), &a);
        let got = conslaw_core::jet::euler(&to_engine(&c, &n), 0).unwrap();
        prop_assert_eq!(got, to_engine(&c, &n.euler()));
    }
}
