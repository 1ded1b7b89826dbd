#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use conslaw_core::evolution::construct_evolution;
use conslaw_core::jet::{euler, is_total_divergence};
use conslaw_core::ode::{check_order_bounds, construct_ode, first_integrals, verify_integrating_factor};
use conslaw_core::wronskian::{adjoint_functions, darboux_apply, lagrange_split, wronskian};
use conslaw_core::{Expression, JetContext, MultiIndex, TotalOperator};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use oracle::{Naive, Sym};

pub fn ode_ctx() -> Arc<JetContext> {
    JetContext::parse("vars t; unknowns u").unwrap()
}

pub fn evo_ctx() -> Arc<JetContext> {
    JetContext::parse("vars t x; unknowns u").unwrap()
}

pub fn e(c: &Arc<JetContext>, s: &str) -> Expression {
    Expression::parse(c, s).unwrap_or_else(|err| panic!("{s}: {err}"))
}

pub fn list(c: &Arc<JetContext>, items: &[&str]) -> Vec<Expression> {
    items.iter().map(|s| e(c, s)).collect()
}

/// Parses oracle output into the engine.
pub fn to_engine(c: &Arc<JetContext>, p: &Naive) -> Expression {
    let names: Vec<&str> = c.independent().iter().map(String::as_str).collect();
    e(c, &p.render(&names, &c.dependent()[0]))
}

/// Random polynomial data: `(coefficient, exponent per generator)`.
pub type PolyData = Vec<(i64, Vec<u32>)>;

pub fn poly_data(gens: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = PolyData> {
    prop::collection::vec(
        (
            prop_oneof![-3i64..=-1, 1i64..=3],
            prop::collection::vec(0..=max_exp, gens),
        ),
        1..=max_terms,
    )
}

pub fn build(n: usize, gens: &[Sym], data: &PolyData) -> Naive {
    let mut out = Naive::zero(n);
    for (c, exps) in data {
        let mut t = Naive::int(n, *c);
        for (g, &k) in gens.iter().zip(exps) {
            t = t.mul(&Naive::sym(n, g.clone()).pow(k));
        }
        out = out.add(&t);
    }
    out
}

pub fn ode_gens() -> Vec<Sym> {
    vec![Sym::X(0), Sym::U(vec![0]), Sym::U(vec![1]), Sym::U(vec![2])]
}

/// `t, x, u, u_x, u_t` for the two-variable context.
pub fn plane_gens() -> Vec<Sym> {
    vec![Sym::X(0), Sym::X(1), Sym::U(vec![0, 0]), Sym::U(vec![0, 1]), Sym::U(vec![1, 0])]
}

/// `x, u, u_x, u_xx` for evolution densities.
pub fn density_gens() -> Vec<Sym> {
    vec![Sym::X(1), Sym::U(vec![0, 0]), Sym::U(vec![0, 1]), Sym::U(vec![0, 2])]
}

pub fn ode_poly() -> impl Strategy<Value = PolyData> {
    poly_data(4, 2, 2)
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn ok<T>(r: conslaw_core::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| fail(e.to_string()))
}

// ---- properties ----

pub fn euler_kills_divergences((f1, f2): (PolyData, PolyData)) -> Result<(), TestCaseError> {
    let c = evo_ctx();
    let g = plane_gens();
    let (n1, n2) = (build(2, &g, &f1), build(2, &g, &f2));
    let naive = n1.d(0).add(&n2.d(1));
    prop_assert!(naive.euler().is_zero());
    let div = ok(to_engine(&c, &n1).total_derivative(0))?.checked_add(&ok(to_engine(&c, &n2).total_derivative(1))?);
    let div = ok(div)?;
    prop_assert_eq!(&div, &to_engine(&c, &naive));
    prop_assert!(ok(euler(&div, 0))?.is_zero());
    prop_assert!(ok(is_total_divergence(&div))?);
    Ok(())
}

pub fn operator_strategy() -> impl Strategy<Value = Vec<(Vec<u16>, PolyData)>> {
    prop::collection::vec((prop::collection::vec(0u16..=2, 2), poly_data(5, 1, 2)), 1..=3)
}

fn operator(c: &Arc<JetContext>, data: &[(Vec<u16>, PolyData)]) -> Result<TotalOperator, TestCaseError> {
    let g = plane_gens();
    let coeffs = data
        .iter()
        .map(|(a, p)| (MultiIndex::from_slice(a), to_engine(c, &build(2, &g, p))))
        .collect::<Vec<_>>();
    ok(TotalOperator::from_coefficients(c, coeffs))
}

pub fn adjoint_involution(data: Vec<(Vec<u16>, PolyData)>) -> Result<(), TestCaseError> {
    let c = evo_ctx();
    let p = operator(&c, &data)?;
    prop_assert_eq!(p.formal_adjoint().formal_adjoint(), p);
    Ok(())
}

pub fn lagrange_remainder((ops, f, g): (Vec<(u16, PolyData)>, PolyData, PolyData)) -> Result<(), TestCaseError> {
    let c = ode_ctx();
    let gens = ode_gens();
    let coeffs = ops
        .iter()
        .map(|(k, p)| (MultiIndex::from_slice(&[*k]), to_engine(&c, &build(1, &gens, p))))
        .collect::<Vec<_>>();
    let p = ok(TotalOperator::from_coefficients(&c, coeffs))?;
    let (f, g) = (to_engine(&c, &build(1, &gens, &f)), to_engine(&c, &build(1, &gens, &g)));
    let green = ok(ok(f.checked_mul(&ok(p.apply(&g))?))?.checked_sub(&ok(g.checked_mul(&ok(p.formal_adjoint().apply(&f))?))?))?;
    prop_assert!(ok(euler(&green, 0))?.is_zero());
    let big_f = ok(lagrange_split(&p, &f, &g, 0))?;
    prop_assert_eq!(ok(big_f.total_derivative(0))?, green);
    Ok(())
}

pub fn lagrange_strategy() -> impl Strategy<Value = (Vec<(u16, PolyData)>, PolyData, PolyData)> {
    (
        prop::collection::vec((0u16..=3, poly_data(4, 1, 2)), 1..=3),
        ode_poly(),
        ode_poly(),
    )
}

fn ode_lambdas(c: &Arc<JetContext>, fs: &[PolyData]) -> Vec<Expression> {
    let gens = ode_gens();
    fs.iter().map(|p| to_engine(c, &build(1, &gens, p))).collect()
}

pub fn factors_strategy(max_p: usize) -> impl Strategy<Value = Vec<PolyData>> {
    prop::collection::vec(poly_data(4, 2, 2), 1..=max_p)
}

pub fn darboux_annihilation(fs: Vec<PolyData>) -> Result<(), TestCaseError> {
    let c = ode_ctx();
    let lambdas = ode_lambdas(&c, &fs);
    prop_assume!(!ok(wronskian(&c, &lambdas, 0))?.is_zero());
    for f in &lambdas {
        prop_assert!(ok(darboux_apply(&lambdas, f, 0))?.is_zero());
    }
    Ok(())
}

pub fn adjoint_ladder(fs: Vec<PolyData>) -> Result<(), TestCaseError> {
    let c = ode_ctx();
    let lambdas = ode_lambdas(&c, &fs);
    prop_assume!(!ok(wronskian(&c, &lambdas, 0))?.is_zero());
    let phis = ok(adjoint_functions(&c, &lambdas, 0))?;
    let p = lambdas.len();
    let mut derivs = lambdas.clone();
    for k in 0..p {
        let mut sum = Expression::zero(&c);
        for (phi, d) in phis.iter().zip(&derivs) {
            sum = ok(sum.checked_add(&ok(phi.checked_mul(d))?))?;
        }
        if k + 1 == p {
            prop_assert!(sum.is_one(), "k = {}: {}", k, sum);
        } else {
            prop_assert!(sum.is_zero(), "k = {}: {}", k, sum);
        }
        derivs = derivs.iter().map(|d| d.total_derivative(0).unwrap()).collect();
    }
    Ok(())
}

pub fn span_strategy() -> impl Strategy<Value = (Vec<PolyData>, Vec<i64>, PolyData)> {
    (1usize..=2).prop_flat_map(|p| {
        (
            prop::collection::vec(poly_data(4, 1, 2), p),
            prop::collection::vec(-3i64..=3, p * p),
            poly_data(4, 1, 2),
        )
    })
}

fn det_int(m: &[i64], p: usize) -> i64 {
    match p {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => unreachable!(),
    }
}

pub fn span_invariance((fs, a, h): (Vec<PolyData>, Vec<i64>, PolyData)) -> Result<(), TestCaseError> {
    let c = ode_ctx();
    let p = fs.len();
    prop_assume!(det_int(&a, p) != 0);
    let lambdas = ode_lambdas(&c, &fs);
    prop_assume!(!ok(wronskian(&c, &lambdas, 0))?.is_zero());
    let mixed: Vec<Expression> = (0..p)
        .map(|col| {
            let mut s = Expression::zero(&c);
            for (row, l) in lambdas.iter().enumerate() {
                s = s.checked_add(&l.scale_int(a[row * p + col])).unwrap();
            }
            s
        })
        .collect();
    let h = to_engine(&c, &build(1, &ode_gens(), &h));
    prop_assert_eq!(ok(construct_ode(&lambdas, &h))?, ok(construct_ode(&mixed, &h))?);
    Ok(())
}

pub fn gauge_strategy() -> impl Strategy<Value = (Vec<PolyData>, Vec<i64>, PolyData)> {
    (1usize..=2).prop_flat_map(|p| {
        (
            prop::collection::vec(poly_data(4, 1, 2), p),
            prop::collection::vec(-3i64..=3, p),
            poly_data(4, 1, 2),
        )
    })
}

/// `H ↦ H + Σ c_s φ^s` leaves `L` alone and moves first integrals by constants.
pub fn ode_gauge((fs, cs, h): (Vec<PolyData>, Vec<i64>, PolyData)) -> Result<(), TestCaseError> {
    let c = ode_ctx();
    let lambdas = ode_lambdas(&c, &fs);
    prop_assume!(!ok(wronskian(&c, &lambdas, 0))?.is_zero());
    let phis = ok(adjoint_functions(&c, &lambdas, 0))?;
    let h = to_engine(&c, &build(1, &ode_gens(), &h));
    let mut shifted = h.clone();
    for (phi, &k) in phis.iter().zip(&cs) {
        shifted = ok(shifted.checked_add(&phi.scale_int(k)))?;
    }
    prop_assert_eq!(ok(construct_ode(&lambdas, &h))?, ok(construct_ode(&lambdas, &shifted))?);
    let a = ok(first_integrals(&lambdas, &h))?;
    let b = ok(first_integrals(&lambdas, &shifted))?;
    for (x, y) in a.iter().zip(&b) {
        prop_assert!(ok(x.checked_sub(y))?.is_constant());
    }
    Ok(())
}

pub fn evolution_gauge_strategy() -> impl Strategy<Value = (PolyData, PolyData)> {
    // densities in x, u, u_x keep the constructed right-hand sides moderate
    (poly_data(3, 2, 2), poly_data(4, 1, 2))
}

/// `H ↦ H + f(t)φ¹ + g(t)φ²` leaves the constructed evolution equation alone.
pub fn evolution_gauge((rho, h): (PolyData, PolyData)) -> Result<(), TestCaseError> {
    let c = JetContext::parse("vars t x; unknowns u; funcs f(t) g(t)").unwrap();
    let g = density_gens();
    let rhos = vec![e(&c, "u"), to_engine(&c, &build(2, &g, &rho))];
    let lambdas = rhos.iter().map(|r| euler(r, 0).unwrap()).collect::<Vec<_>>();
    prop_assume!(!ok(wronskian(&c, &lambdas, 1))?.is_zero());
    let phis = ok(adjoint_functions(&c, &lambdas, 1))?;
    let h = to_engine(&c, &build(2, &g, &h));
    let mut shifted = h.clone();
    for (phi, f) in phis.iter().zip(["f(t)", "g(t)"]) {
        shifted = ok(shifted.checked_add(&ok(phi.checked_mul(&e(&c, f)))?))?;
    }
    let a = ok(construct_evolution(&rhos, &h))?;
    let b = ok(construct_evolution(&rhos, &shifted))?;
    prop_assert_eq!(a.rhs, b.rhs);
    Ok(())
}

pub fn order_bounds((fs, h): (Vec<PolyData>, PolyData)) -> Result<(), TestCaseError> {
    let c = ode_ctx();
    let lambdas = ode_lambdas(&c, &fs);
    prop_assume!(!ok(wronskian(&c, &lambdas, 0))?.is_zero());
    let h = to_engine(&c, &build(1, &ode_gens(), &h));
    let rep = ok(check_order_bounds(&lambdas, &h))?;
    prop_assert!(rep.all_hold(), "{:?}", rep);
    Ok(())
}

pub fn order_strategy() -> impl Strategy<Value = (Vec<PolyData>, PolyData)> {
    (prop::collection::vec(poly_data(4, 1, 2), 1..=2), poly_data(4, 2, 2))
}

/// `c₁u'' + c₀` admits `1, t, u'` and comes from `H = c₁u + c₀t²/2`.
pub fn second_order_family((c1, c0): (i64, i64)) -> Result<(), TestCaseError> {
    let c = ode_ctx();
    let l = e(&c, &format!("({c1})*u'' + ({c0})"));
    for f in ["1", "t", "u'"] {
        prop_assert!(ok(verify_integrating_factor(&l, &e(&c, f)))?);
    }
    let h = e(&c, &format!("({c1})*u + ({c0})*t^2/2"));
    prop_assert_eq!(ok(construct_ode(&list(&c, &["1", "t"]), &h))?, l);
    Ok(())
}

pub fn second_order_strategy() -> impl Strategy<Value = (i64, i64)> {
    (prop_oneof![-20i64..=-1, 1i64..=20], -20i64..=20)
}
