//! Single ODEs with prescribed integrating factors.

use std::sync::Arc;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::jet::euler;
use crate::wronskian::{adjoint_functions, darboux_operator, without, wronskian};

fn check_ode_context(ctx: &JetContext) -> Result<()> {
    if ctx.n_independent() != 1 {
        return Err(Error::Precondition("expected one independent variable".into()));
    }
    if ctx.n_dependent() != 1 {
        return Err(Error::Precondition("expected one unknown".into()));
    }
    Ok(())
}

fn lift_all(ctx: &Arc<JetContext>, fs: &[Expression]) -> Result<(Arc<JetContext>, Vec<Expression>)> {
    let mut probe = Expression::zero(ctx);
    for f in fs {
        probe = probe.checked_add(&Expression::zero(f.context()))?;
    }
    let joint = probe.context().clone();
    let lifted = fs.iter().map(|f| f.lift(&joint)).collect();
    Ok((joint, lifted))
}

/// `L = DT[λ¹, …, λ^p]†H`; every `λ^s` is checked to be an integrating factor.
pub fn construct_ode(lambdas: &[Expression], h: &Expression) -> Result<Expression> {
    check_ode_context(h.context())?;
    let (ctx, lambdas) = lift_all(h.context(), lambdas)?;
    let h = h.lift(&ctx);
    let op = darboux_operator(&ctx, &lambdas, 0)?;
    let l = op.formal_adjoint().apply(&h)?;
    for lambda in &lambdas {
        if !verify_integrating_factor(&l, lambda)? {
            return Err(Error::Inconsistent(format!(
                "`{lambda}` is not an integrating factor of the constructed equation"
            )));
        }
    }
    Ok(l)
}

/// `L = (−1)^p W(φ̂¹, …, φ̂^p, Ĥ) / W(λ)^p` with `φ̂^s = W(λ) φ^s`.
pub fn construct_ode_alt(lambdas: &[Expression], h_hat: &Expression) -> Result<Expression> {
    check_ode_context(h_hat.context())?;
    let (ctx, lambdas) = lift_all(h_hat.context(), lambdas)?;
    let w = wronskian(&ctx, &lambdas, 0)?;
    if w.is_zero() {
        return Err(Error::ZeroWronskian);
    }
    let p = lambdas.len();
    let mut rows = Vec::with_capacity(p + 1);
    for s in 0..p {
        let minor = wronskian(&ctx, &without(&lambdas, s), 0)?;
        rows.push(if (p - s - 1) % 2 == 1 { -minor } else { minor });
    }
    rows.push(h_hat.lift(&ctx));
    let top = wronskian(&ctx, &rows, 0)?;
    let l = top.checked_div(&w.pow(p as i64)?)?;
    Ok(if p % 2 == 1 { -l } else { l })
}

/// `I^s = (−1)^{p−s+1} W(φ¹, …, φ̸^s, …, φ^p, H) / W(φ¹, …, φ^p)`.
pub fn first_integrals(lambdas: &[Expression], h: &Expression) -> Result<Vec<Expression>> {
    check_ode_context(h.context())?;
    let (ctx, lambdas) = lift_all(h.context(), lambdas)?;
    let h = h.lift(&ctx);
    let phis = adjoint_functions(&ctx, &lambdas, 0)?;
    let w_phi = wronskian(&ctx, &phis, 0)?;
    let p = phis.len();
    (0..p)
        .map(|s| {
            let mut rows = without(&phis, s);
            rows.push(h.clone());
            let i = wronskian(&ctx, &rows, 0)?.checked_div(&w_phi)?;
            // sign (−1)^{p−(s+1)+1} with 0-based s
            Ok(if (p - s) % 2 == 1 { -i } else { i })
        })
        .collect()
}

/// Whether `λ` is an integrating factor of `L = 0`, i.e. `E(λL) = 0`.
pub fn verify_integrating_factor(l: &Expression, lambda: &Expression) -> Result<bool> {
    if l.context().n_dependent() != 1 {
        return Err(Error::Precondition("expected one unknown".into()));
    }
    Ok(euler(&l.checked_mul(lambda)?, 0)?.is_zero())
}

/// Orders `r`, `q`, `ord Ĥ` and the order estimates for the alternative
/// representation. `None` stands for −∞.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderReport {
    pub r: Option<u32>,
    pub q: Option<u32>,
    pub p: usize,
    pub ord_h_hat: Option<u32>,
    /// `max(r − p, q + p − 2)`.
    pub bound: Option<i64>,
    pub bound_holds: bool,
    /// `q ≤ r − 2p + 2 ⇒ ord Ĥ ≤ r − p`; `None` when the hypothesis fails.
    pub h_hat_bound: Option<bool>,
    /// `ord λ^s ≤ r − 2p + 1 ⇒ (p ≤ r and ord Ĥ = r − p)`; `None` when the
    /// hypothesis fails.
    pub exact_order: Option<bool>,
    /// `ord λ^s ≤ r − 2p ⇒ ord H = ord Ĥ = r − p`; `None` when the hypothesis
    /// fails.
    pub h_orders_exact: Option<bool>,
}

impl OrderReport {
    /// Whether no checked statement is violated.
    pub fn all_hold(&self) -> bool {
        self.bound_holds
            && self.h_hat_bound != Some(false)
            && self.exact_order != Some(false)
            && self.h_orders_exact != Some(false)
    }
}

fn ord(o: Option<u32>) -> Option<i64> {
    o.map(i64::from)
}

/// `a ≤ b` with `None` as −∞.
fn le(a: Option<i64>, b: Option<i64>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a <= b,
    }
}

fn shift(a: Option<i64>, by: i64) -> Option<i64> {
    a.map(|v| v + by)
}

pub fn check_order_bounds(lambdas: &[Expression], h_hat: &Expression) -> Result<OrderReport> {
    let l = construct_ode_alt(lambdas, h_hat)?;
    let (ctx, lifted) = lift_all(h_hat.context(), lambdas)?;
    let w = wronskian(&ctx, &lifted, 0)?;
    let h = h_hat.lift(&ctx).checked_div(&w)?;
    let p = lambdas.len();
    let pi = p as i64;
    let r = l.order();
    let q = lambdas.iter().filter_map(Expression::order).max();
    let oh = h_hat.order();
    let bound = shift(ord(r), -pi).max(shift(ord(q), pi - 2));
    let bound_holds = le(ord(oh), bound);
    let h_hat_bound = le(ord(q), shift(ord(r), 2 - 2 * pi)).then(|| le(ord(oh), shift(ord(r), -pi)));
    let exact_order = le(ord(q), shift(ord(r), 1 - 2 * pi)).then(|| {
        let r_is_exact = r.is_some();
        r_is_exact && le(Some(pi), ord(r)) && ord(oh) == shift(ord(r), -pi)
    });
    let h_orders_exact = le(ord(q), shift(ord(r), -2 * pi))
        .then(|| ord(h.order()) == shift(ord(r), -pi) && ord(oh) == shift(ord(r), -pi));
    Ok(OrderReport {
        r,
        q,
        p,
        ord_h_hat: oh,
        bound,
        bound_holds,
        h_hat_bound,
        exact_order,
        h_orders_exact,
    })
}

/// Jet variables of `L` above the order the caller expects; empty when all
/// higher derivatives cancelled.
pub fn residual_orders(l: &Expression, expected: u32) -> Vec<u32> {
    let mut out: Vec<u32> = l
        .jets()
        .into_iter()
        .map(|(_, a)| a.order())
        .filter(|&o| o > expected)
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<JetContext> {
        JetContext::parse("vars t; unknowns u").unwrap()
    }

    fn e(c: &Arc<JetContext>, s: &str) -> Expression {
        Expression::parse(c, s).unwrap()
    }

    fn list(c: &Arc<JetContext>, items: &[&str]) -> Vec<Expression> {
        items.iter().map(|s| e(c, s)).collect()
    }

    #[test]
    fn elementary_equation() {
        let c = ctx();
        let lambdas = list(&c, &["1", "t"]);
        assert_eq!(construct_ode(&lambdas, &e(&c, "u")).unwrap(), e(&c, "u''"));
        assert_eq!(construct_ode_alt(&lambdas, &e(&c, "u")).unwrap(), e(&c, "u''"));
        assert!(construct_ode_alt(&lambdas, &Expression::zero(&c)).unwrap().is_zero());
        assert_eq!(first_integrals(&lambdas, &e(&c, "u")).unwrap(), list(&c, &["u'", "t*u' - u"]));
        assert_eq!(first_integrals(&list(&c, &["1"]), &e(&c, "u*u'")).unwrap(), list(&c, &["-u*u'"]));
    }

    #[test]
    fn integrating_factors() {
        let c = ctx();
        let l = e(&c, "u''");
        for f in ["1", "t", "u'"] {
            assert!(verify_integrating_factor(&l, &e(&c, f)).unwrap());
        }
        assert!(!verify_integrating_factor(&l, &e(&c, "u")).unwrap());
    }

    #[test]
    fn order_report() {
        let c = ctx();
        let rep = check_order_bounds(&list(&c, &["1", "t"]), &e(&c, "u")).unwrap();
        assert_eq!((rep.r, rep.q, rep.p, rep.ord_h_hat), (Some(2), None, 2, Some(0)));
        assert!(rep.all_hold());
        assert!(matches!(construct_ode(&list(&c, &["0", "0"]), &e(&c, "u")), Err(Error::ZeroWronskian)));
    }
}
