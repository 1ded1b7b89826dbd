//! Variational calculus on the jet space.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::operator::TotalOperator;
use crate::poly::{Mono, Poly};
use crate::ratfunc::RatFunc;
use crate::var::{MultiIndex, Var};

/// `Σ_γ (−D)^γ g_γ`, evaluated Horner-style from the highest index down.
fn minus_d_sum(ctx: &Arc<JetContext>, mut terms: BTreeMap<MultiIndex, Expression>) -> Expression {
    terms.retain(|_, v| !v.is_zero());
    let zero = MultiIndex::zero(ctx.n_independent());
    while let Some((gamma, g)) = terms.pop_last() {
        if gamma == zero {
            return g;
        }
        let i = (0..gamma.len()).find(|&i| gamma.get(i) > 0).expect("nonzero index");
        let lower = gamma.with_component(i, gamma.get(i) - 1);
        let dg = -g.d(i);
        let entry = terms.entry(lower).or_insert_with(|| Expression::zero(ctx));
        *entry = &*entry + &dg;
    }
    Expression::zero(ctx)
}

fn jets_of(f: &Expression, a: usize) -> Vec<MultiIndex> {
    f.jets()
        .into_iter()
        .filter(|(b, _)| *b == a)
        .map(|(_, alpha)| alpha)
        .collect()
}

/// The Euler operator `E^a = (−D)^α ∂/∂u^a_α`.
pub fn euler(f: &Expression, a: usize) -> Result<Expression> {
    f.context().check_dep(a)?;
    let terms = jets_of(f, a)
        .into_iter()
        .map(|alpha| {
            let p = f.partial_jet(a, &alpha);
            (alpha, p)
        })
        .collect();
    Ok(minus_d_sum(f.context(), terms))
}

/// The higher Euler operator `E^{a,α} = Σ_{β≥α} C(β,α) (−D)^{β−α} ∂/∂u^a_β`.
pub fn higher_euler(f: &Expression, a: usize, alpha: &MultiIndex) -> Result<Expression> {
    let ctx = f.context();
    ctx.check_dep(a)?;
    if alpha.len() != ctx.n_independent() {
        return Err(Error::InvalidContext("multi-index of wrong length".into()));
    }
    let mut terms: BTreeMap<MultiIndex, Expression> = BTreeMap::new();
    for beta in jets_of(f, a) {
        let Some(gamma) = beta.checked_sub(alpha) else {
            continue;
        };
        let c = BigRational::from_integer(beta.binomial(alpha));
        terms.insert(gamma, f.partial_jet(a, &beta).scale(&c));
    }
    Ok(minus_d_sum(ctx, terms))
}

/// The restricted Euler operator `Ê^k`: derivatives with exactly `k`
/// differentiations in `excluded`, totalized over the other variables only.
pub fn restricted_euler(f: &Expression, excluded: usize, k: u16, a: usize) -> Result<Expression> {
    let ctx = f.context();
    ctx.check_var(excluded)?;
    ctx.check_dep(a)?;
    let mut terms: BTreeMap<MultiIndex, Expression> = BTreeMap::new();
    for beta in jets_of(f, a) {
        if beta.get(excluded) != k {
            continue;
        }
        terms.insert(beta.with_component(excluded, 0), f.partial_jet(a, &beta));
    }
    Ok(minus_d_sum(ctx, terms))
}

/// `Σ_K (−D)^K ∂f/∂u^a_{E+K}` with `K` supported on `vars`, where `E` is
/// a fixed pattern of derivatives in the remaining variables.
pub(crate) fn restricted_euler_over(
    f: &Expression,
    vars: &[usize],
    a: usize,
    pattern: &MultiIndex,
) -> Result<Expression> {
    let ctx = f.context();
    let mut terms: BTreeMap<MultiIndex, Expression> = BTreeMap::new();
    for beta in jets_of(f, a) {
        let mut k = MultiIndex::zero(beta.len());
        let mut e = beta.clone();
        for &i in vars {
            k = k.with_component(i, beta.get(i));
            e = e.with_component(i, 0);
        }
        if e == *pattern {
            terms.insert(k, f.partial_jet(a, &beta));
        }
    }
    Ok(minus_d_sum(ctx, terms))
}

/// Fréchet derivative `ρ_* = Σ_k ρ_{u_k} D_x^k` in a `(t, x)` context.
pub fn frechet(rho: &Expression) -> Result<TotalOperator> {
    let ctx = rho.context();
    check_evolution_context(ctx)?;
    check_no_t_derivatives(rho)?;
    TotalOperator::from_coefficients(
        ctx,
        jets_of(rho, 0)
            .into_iter()
            .map(|alpha| {
                let p = rho.partial_jet(0, &alpha);
                (alpha, p)
            }),
    )
}

pub(crate) fn check_evolution_context(ctx: &JetContext) -> Result<()> {
    if ctx.n_independent() != 2 || ctx.n_dependent() != 1 {
        return Err(Error::Precondition(
            "expected independent variables (t, x) and one unknown".into(),
        ));
    }
    Ok(())
}

pub(crate) fn check_no_t_derivatives(f: &Expression) -> Result<()> {
    if f.jets().iter().any(|(_, alpha)| alpha.get(0) > 0) {
        return Err(Error::Precondition(format!(
            "`{f}` contains derivatives with respect to `{}`",
            f.context().independent()[0]
        )));
    }
    Ok(())
}

/// Whether `f` lies in the image of the total divergence, i.e. every Euler
/// operator annihilates it.
pub fn is_total_divergence(f: &Expression) -> Result<bool> {
    for a in 0..f.context().n_dependent() {
        if !euler(f, a)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coefficients of `e` as a polynomial in the derivatives of the given
/// function symbols.
pub fn split_by_arbitrary_functions(e: &Expression, funcs: &[usize]) -> Result<BTreeMap<Mono, Expression>> {
    let ctx = e.context();
    for &f in funcs {
        if f >= ctx.functions().len() {
            return Err(Error::InvalidContext(format!("no function symbol #{f}")));
        }
    }
    let is_split = |v: &Var| matches!(v, Var::Func { func, .. } if funcs.contains(&(*func as usize)));
    if e.denominator().contains_var_where(is_split) {
        return Err(Error::NonPolynomial(
            "arbitrary-function symbols occur in a denominator".into(),
        ));
    }
    for f in ctx.functions() {
        if let crate::context::FunctionKind::Composite { arg } = &f.kind {
            if arg.contains_var_where(is_split) {
                return Err(Error::NonPolynomial(
                    "arbitrary-function symbols occur inside a composite argument".into(),
                ));
            }
        }
    }
    let mut groups: BTreeMap<Mono, Poly> = BTreeMap::new();
    for (m, c) in e.numerator().terms() {
        let (key, rest): (Vec<_>, Vec<_>) = m.factors().iter().cloned().partition(|(v, _)| is_split(v));
        groups
            .entry(Mono::from_factors(key))
            .or_insert_with(Poly::zero)
            .add_term(Mono::from_factors(rest), c.clone());
    }
    let den = e.denominator().clone();
    Ok(groups
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(k, p)| {
            let r = RatFunc::new(p, den.clone()).expect("nonzero denominator");
            (k, Expression::from_ratfunc(ctx, r))
        })
        .collect())
}

/// Reassembles `Σ monomial · coefficient`.
pub fn unsplit(ctx: &Arc<JetContext>, parts: &BTreeMap<Mono, Expression>) -> Expression {
    parts.iter().fold(Expression::zero(ctx), |acc, (m, c)| {
        let mono = Expression::from_ratfunc(ctx, RatFunc::from_poly(Poly::term(m.clone(), BigRational::one())));
        &acc + &(&mono * c)
    })
}

/// A tuple `(F¹, …, Fⁿ)`, one component per independent variable.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservedCurrent {
    components: Vec<Expression>,
}

impl ConservedCurrent {
    pub fn new(ctx: &Arc<JetContext>, components: Vec<Expression>) -> Result<Self> {
        if components.len() != ctx.n_independent() {
            return Err(Error::Precondition(format!(
                "a current needs {} components, got {}",
                ctx.n_independent(),
                components.len()
            )));
        }
        let components = components
            .into_iter()
            .map(|c| Expression::zero(ctx).checked_add(&c))
            .collect::<Result<_>>()?;
        Ok(ConservedCurrent { components })
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    /// `Div F = Σ D_i F^i`.
    pub fn divergence(&self) -> Expression {
        let ctx = self.components[0].context().clone();
        self.components
            .iter()
            .enumerate()
            .fold(Expression::zero(&ctx), |acc, (i, f)| &acc + &f.d(i))
    }

    /// Whether `Div F = λ·L` holds identically.
    pub fn matches(&self, lambda: &Characteristic, equations: &[Expression]) -> Result<bool> {
        if equations.len() != lambda.components.len() {
            return Err(Error::Precondition("one equation per characteristic component".into()));
        }
        let mut rhs = Expression::zero(self.components[0].context());
        for (l, e) in lambda.components.iter().zip(equations) {
            rhs = rhs.checked_add(&l.checked_mul(e)?)?;
        }
        Ok(self.divergence().checked_sub(&rhs)?.is_zero())
    }
}

/// Multipliers `(λ¹, …, λˡ)` of a system.
#[derive(Clone, Debug, PartialEq)]
pub struct Characteristic {
    components: Vec<Expression>,
}

impl Characteristic {
    pub fn new(components: Vec<Expression>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Precondition("empty characteristic".into()));
        }
        Ok(Characteristic { components })
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    /// Whether `Σ λ^μ L_μ` is a total divergence.
    pub fn is_characteristic_of(&self, equations: &[Expression]) -> Result<bool> {
        if equations.len() != self.components.len() {
            return Err(Error::Precondition("one equation per characteristic component".into()));
        }
        let mut sum = Expression::zero(equations[0].context());
        for (l, e) in self.components.iter().zip(equations) {
            sum = sum.checked_add(&l.checked_mul(e)?)?;
        }
        is_total_divergence(&sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(c: &Arc<JetContext>, s: &str) -> Expression {
        Expression::parse(c, s).unwrap()
    }

    #[test]
    fn euler_of_divergences_vanishes() {
        let c = JetContext::parse("vars t x; unknowns u").unwrap();
        assert!(euler(&e(&c, "u*u_xx + u_x^2"), 0).unwrap().is_zero());
        assert!(euler(&e(&c, "u*(u_t + u*u_x + u_xxx)"), 0).unwrap().is_zero());
        assert_eq!(euler(&e(&c, "u*u_tt"), 0).unwrap(), e(&c, "2*u_tt"));
        assert_eq!(euler(&e(&c, "u_t*u_x"), 0).unwrap(), e(&c, "-2*u_tx"));
        assert!(!is_total_divergence(&e(&c, "u_t*u_x")).unwrap());
    }

    #[test]
    fn higher_and_restricted_euler() {
        let c = JetContext::parse("vars t x; unknowns u").unwrap();
        let f = e(&c, "u^2/2");
        assert_eq!(higher_euler(&f, 0, &MultiIndex::zero(2)).unwrap(), e(&c, "u"));
        let ux2 = e(&c, "u_x^2");
        // E^{u,x}(u_x²) = ∂/∂u_x = 2u_x, nothing above it
        assert_eq!(higher_euler(&ux2, 0, &MultiIndex::unit(2, 1)).unwrap(), e(&c, "2*u_x"));
        let c3 = JetContext::parse("vars t x y; unknowns u").unwrap();
        assert_eq!(restricted_euler(&e(&c3, "u"), 0, 0, 0).unwrap(), e(&c3, "1"));
        assert!(restricted_euler(&e(&c3, "u_t*u_x + u*u_tx"), 0, 0, 0).unwrap().is_zero());
    }

    #[test]
    fn frechet_derivative() {
        let c = JetContext::parse("vars t x; unknowns u").unwrap();
        let op = frechet(&e(&c, "u_x^2")).unwrap();
        assert_eq!(op.coefficient(&MultiIndex::unit(2, 1)), e(&c, "2*u_x"));
        assert_eq!(op.coefficients().len(), 1);
        assert!(frechet(&e(&c, "u_t")).is_err());
    }

    #[test]
    fn splitting_by_function_symbols() {
        let c = JetContext::parse("vars t x; unknowns u; funcs h(t)").unwrap();
        let x = e(&c, "der(h(t), t)*u + h(t)*u_x");
        let parts = split_by_arbitrary_functions(&x, &[0]).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(unsplit(&c, &parts), x);
        assert!(split_by_arbitrary_functions(&Expression::zero(&c), &[0]).unwrap().is_empty());
        assert!(split_by_arbitrary_functions(&e(&c, "u/h(t)"), &[0]).is_err());
    }
}
