//! Wronskians in total derivatives and Darboux operators.

use std::sync::Arc;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::operator::TotalOperator;
use crate::ratfunc::RatFunc;
use crate::var::MultiIndex;

fn common_context(ctx: &Arc<JetContext>, fs: &[Expression]) -> Result<Arc<JetContext>> {
    let mut probe = Expression::zero(ctx);
    for f in fs {
        probe = probe.checked_add(&Expression::zero(f.context()))?;
    }
    Ok(probe.context().clone())
}

/// `det(D^r f^c)`, rows `r = 0..k`.
fn derivative_matrix(fs: &[Expression], var: usize, rows: usize) -> Vec<Vec<RatFunc>> {
    let mut cols: Vec<Vec<RatFunc>> = Vec::with_capacity(fs.len());
    for f in fs {
        let mut col = Vec::with_capacity(rows);
        let mut cur = f.clone();
        for r in 0..rows {
            if r > 0 {
                cur = cur.d(var);
            }
            col.push(cur.ratfunc().clone());
        }
        cols.push(col);
    }
    (0..rows).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
}

fn exact_quotient(num: &RatFunc, prev: &RatFunc) -> RatFunc {
    if num.is_polynomial() && prev.is_polynomial() {
        if let Some(q) = num.num().div_exact(prev.num()) {
            return RatFunc::from_poly(q);
        }
    }
    num.checked_div(prev).expect("previous pivot is nonzero")
}

/// Fraction-free (Bareiss) determinant with row pivoting.
pub(crate) fn determinant(mut m: Vec<Vec<RatFunc>>) -> RatFunc {
    let n = m.len();
    if n == 0 {
        return RatFunc::one();
    }
    let mut sign = false;
    let mut prev = RatFunc::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return RatFunc::zero();
            };
            m.swap(k, p);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = exact_quotient(&num, &prev);
            }
            m[i][k] = RatFunc::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        -&d
    } else {
        d
    }
}

/// `W(f¹, …, f^k)` in total derivatives `D_var`; `W() = 1`.
pub fn wronskian(ctx: &Arc<JetContext>, fs: &[Expression], var: usize) -> Result<Expression> {
    ctx.check_var(var)?;
    let ctx = common_context(ctx, fs)?;
    let det = determinant(derivative_matrix(fs, var, fs.len()));
    Ok(Expression::from_ratfunc(&ctx, det))
}

fn nonzero_wronskian(ctx: &Arc<JetContext>, fs: &[Expression], var: usize) -> Result<Expression> {
    let w = wronskian(ctx, fs, var)?;
    if w.is_zero() {
        return Err(Error::ZeroWronskian);
    }
    Ok(w)
}

/// `DT[f¹, …, f^k]G = W(f¹, …, f^k, G) / W(f¹, …, f^k)`.
pub fn darboux_apply(fs: &[Expression], g: &Expression, var: usize) -> Result<Expression> {
    let w = nonzero_wronskian(g.context(), fs, var)?;
    let mut all = fs.to_vec();
    all.push(g.clone());
    let top = wronskian(g.context(), &all, var)?;
    top.checked_div(&w)
}

/// The monic operator `G ↦ DT[f¹, …, f^k]G`, by cofactors of the last column.
pub fn darboux_operator(ctx: &Arc<JetContext>, fs: &[Expression], var: usize) -> Result<TotalOperator> {
    let w = nonzero_wronskian(ctx, fs, var)?;
    let ctx = w.context().clone();
    let k = fs.len();
    let m = derivative_matrix(fs, var, k + 1);
    let n = ctx.n_independent();
    let mut coeffs = Vec::with_capacity(k + 1);
    for r in 0..=k {
        let minor: Vec<Vec<RatFunc>> = m
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != r)
            .map(|(_, row)| row.clone())
            .collect();
        let mut cof = Expression::from_ratfunc(&ctx, determinant(minor));
        if (r + k) % 2 == 1 {
            cof = -cof;
        }
        let alpha = MultiIndex::zero(n).with_component(var, r as u16);
        coeffs.push((alpha, cof.checked_div(&w)?));
    }
    TotalOperator::from_coefficients(&ctx, coeffs)
}

/// `φ^s = (−1)^{p−s} W(λ¹, …, λ̸^s, …, λ^p) / W(λ¹, …, λ^p)`.
pub fn adjoint_functions(ctx: &Arc<JetContext>, lambdas: &[Expression], var: usize) -> Result<Vec<Expression>> {
    let w = nonzero_wronskian(ctx, lambdas, var)?;
    let p = lambdas.len();
    (0..p)
        .map(|s| {
            let others: Vec<Expression> = without(lambdas, s);
            let minor = wronskian(w.context(), &others, var)?;
            let phi = minor.checked_div(&w)?;
            // 0-based s, so the sign exponent is p − (s + 1)
            Ok(if (p - s - 1) % 2 == 1 { -phi } else { phi })
        })
        .collect()
}

pub(crate) fn without(fs: &[Expression], s: usize) -> Vec<Expression> {
    fs.iter()
        .enumerate()
        .filter(|(k, _)| *k != s)
        .map(|(_, f)| f.clone())
        .collect()
}

/// `F` with `D F = f·Pg − g·P†f` for an operator in the single variable `var`.
pub fn lagrange_split(p: &TotalOperator, f: &Expression, g: &Expression, var: usize) -> Result<Expression> {
    let ctx = p.context();
    ctx.check_var(var)?;
    if p
        .coefficients()
        .keys()
        .any(|a| a.order() != u32::from(a.get(var)))
    {
        return Err(Error::Precondition(
            "operator involves derivatives in other variables".into(),
        ));
    }
    let mut total = Expression::zero(ctx);
    for (alpha, psi) in p.coefficients() {
        let k = alpha.get(var) as usize;
        if k == 0 {
            continue;
        }
        let a = psi.checked_mul(f)?;
        let mut a_derivs = vec![a];
        for _ in 1..k {
            let next = a_derivs.last().expect("nonempty").d(var);
            a_derivs.push(next);
        }
        let mut g_derivs = vec![g.clone()];
        for _ in 1..k {
            let next = g_derivs.last().expect("nonempty").d(var);
            g_derivs.push(next);
        }
        for j in 0..k {
            let term = a_derivs[j].checked_mul(&g_derivs[k - 1 - j])?;
            total = if j % 2 == 0 {
                total.checked_add(&term)?
            } else {
                total.checked_sub(&term)?
            };
        }
    }
    let expected = f
        .checked_mul(&p.apply(g)?)?
        .checked_sub(&g.checked_mul(&p.formal_adjoint().apply(f)?)?)?;
    if total.d(var) != expected {
        return Err(Error::Inconsistent("Lagrange identity check failed".into()));
    }
    Ok(total)
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
    fn wronskians() {
        let c = ctx();
        assert!(wronskian(&c, &list(&c, &["1", "t"]), 0).unwrap().is_one());
        assert_eq!(wronskian(&c, &list(&c, &["1", "u'"]), 0).unwrap(), e(&c, "u''"));
        assert!(wronskian(&c, &list(&c, &["-sin(t)", "cos(t)"]), 0).unwrap().is_one());
        assert!(wronskian(&c, &[], 0).unwrap().is_one());
        assert!(wronskian(&c, &list(&c, &["u", "2*u"]), 0).unwrap().is_zero());
    }

    #[test]
    fn darboux() {
        let c = ctx();
        let h = e(&c, "u^2*t");
        assert_eq!(darboux_apply(&list(&c, &["1"]), &h, 0).unwrap(), h.d(0));
        assert_eq!(darboux_apply(&list(&c, &["-t", "1"]), &h, 0).unwrap(), h.d(0).d(0));
        let fs = list(&c, &["u", "t*u'"]);
        assert!(darboux_apply(&fs, &fs[1], 0).unwrap().is_zero());
        let op = darboux_operator(&c, &fs, 0).unwrap();
        assert!(op.coefficient(&MultiIndex::from_slice(&[2])).is_one());
        assert_eq!(op.apply(&h).unwrap(), darboux_apply(&fs, &h, 0).unwrap());
        assert!(matches!(
            darboux_apply(&list(&c, &["0", "0"]), &h, 0),
            Err(Error::ZeroWronskian)
        ));
    }

    #[test]
    fn adjoint_function_examples() {
        let c = ctx();
        assert_eq!(adjoint_functions(&c, &list(&c, &["1", "t"]), 0).unwrap(), list(&c, &["-t", "1"]));
        assert_eq!(
            adjoint_functions(&c, &list(&c, &["1", "u'"]), 0).unwrap(),
            list(&c, &["-u'/u''", "1/u''"])
        );
        assert_eq!(adjoint_functions(&c, &list(&c, &["u"]), 0).unwrap(), list(&c, &["1/u"]));
    }

    #[test]
    fn lagrange() {
        let c = ctx();
        let f = e(&c, "u*t");
        let g = e(&c, "u'^2");
        let dt = TotalOperator::d(&c, 0).unwrap();
        assert_eq!(lagrange_split(&dt, &f, &g, 0).unwrap(), &f * &g);
        let m = TotalOperator::mult(&e(&c, "u"));
        assert!(lagrange_split(&m, &f, &g, 0).unwrap().is_zero());
    }
}
