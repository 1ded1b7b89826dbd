//! Linear differential operators in total derivatives, `P = ψ^α D^α`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::var::MultiIndex;

#[derive(Clone)]
pub struct TotalOperator {
    ctx: Arc<JetContext>,
    coeffs: BTreeMap<MultiIndex, Expression>,
}

impl TotalOperator {
    pub fn zero(ctx: &Arc<JetContext>) -> Self {
        TotalOperator {
            ctx: ctx.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn identity(ctx: &Arc<JetContext>) -> Self {
        Self::mult(&Expression::one(ctx))
    }

    /// Multiplication by `f`.
    pub fn mult(f: &Expression) -> Self {
        Self::from_coefficients(f.context(), [(MultiIndex::zero(f.context().n_independent()), f.clone())])
            .expect("zero multi-index has the right length")
    }

    /// The total derivative `D_i`.
    pub fn d(ctx: &Arc<JetContext>, i: usize) -> Result<Self> {
        ctx.check_var(i)?;
        Self::from_coefficients(ctx, [(MultiIndex::unit(ctx.n_independent(), i), Expression::one(ctx))])
    }

    /// Builds `Σ ψ^α D^α`; zero coefficients are dropped and repeated
    /// multi-indices are summed.
    pub fn from_coefficients(
        ctx: &Arc<JetContext>,
        coeffs: impl IntoIterator<Item = (MultiIndex, Expression)>,
    ) -> Result<Self> {
        let mut op = Self::zero(ctx);
        for (alpha, c) in coeffs {
            if alpha.len() != ctx.n_independent() {
                return Err(Error::InvalidContext("multi-index of wrong length".into()));
            }
            op.add_term(alpha, c)?;
        }
        Ok(op)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: Expression) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        let probe = Expression::zero(&self.ctx).checked_add(&c)?;
        self.ctx = probe.context().clone();
        let sum = match self.coeffs.remove(&alpha) {
            Some(old) => old.checked_add(&c)?,
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert(alpha, sum);
        }
        Ok(())
    }

    pub fn context(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, Expression> {
        &self.coeffs
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Expression {
        self.coeffs
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| Expression::zero(&self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest `|α|` with nonzero coefficient; `None` for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().map(MultiIndex::order).max()
    }

    /// `Σ ψ^α D^α g`.
    pub fn apply(&self, g: &Expression) -> Result<Expression> {
        let mut derivs: BTreeMap<MultiIndex, Expression> = BTreeMap::new();
        derivs.insert(MultiIndex::zero(self.ctx.n_independent()), g.clone());
        let mut out = Expression::zero(&self.ctx);
        for (alpha, c) in &self.coeffs {
            let dg = derivative(&mut derivs, alpha);
            out = out.checked_add(&c.checked_mul(&dg)?)?;
        }
        Ok(out)
    }

    /// `P†` with `P†f = (−D)^α(ψ^α f)`; the coefficient of `D^β` is
    /// `Σ_{α≥β} (−1)^{|α|} C(α,β) D^{α−β}ψ^α`.
    pub fn formal_adjoint(&self) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (alpha, psi) in &self.coeffs {
            let mut derivs = BTreeMap::new();
            derivs.insert(MultiIndex::zero(alpha.len()), psi.clone());
            let sign = if alpha.order() % 2 == 0 { 1 } else { -1 };
            for beta in sub_indices(alpha) {
                let gamma = alpha.checked_sub(&beta).expect("beta ≤ alpha");
                let c = BigRational::from_integer(alpha.binomial(&beta) * BigInt::from(sign));
                let term = derivative(&mut derivs, &gamma).scale(&c);
                out.add_term(beta, term).expect("same context");
            }
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &TotalOperator) -> Result<Self> {
        let mut out = Self::zero(&self.ctx);
        for (alpha, psi) in &self.coeffs {
            for (beta, chi) in &other.coeffs {
                // D^α(χ D^β) = Σ_{γ≤α} C(α,γ) D^{α−γ}χ D^{β+γ}
                let mut derivs = BTreeMap::new();
                derivs.insert(MultiIndex::zero(alpha.len()), chi.clone());
                for gamma in sub_indices(alpha) {
                    let rest = alpha.checked_sub(&gamma).expect("gamma ≤ alpha");
                    let c = BigRational::from_integer(alpha.binomial(&gamma));
                    let term = psi.checked_mul(&derivative(&mut derivs, &rest))?.scale(&c);
                    out.add_term(beta.add(&gamma), term)?;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &TotalOperator) -> Result<Self> {
        let mut out = self.clone();
        for (alpha, c) in &other.coeffs {
            out.add_term(alpha.clone(), c.clone())?;
        }
        Ok(out)
    }

    /// Left multiplication by a differential function.
    pub fn premultiply(&self, f: &Expression) -> Result<Self> {
        let mut out = Self::zero(&self.ctx);
        for (alpha, c) in &self.coeffs {
            out.add_term(alpha.clone(), f.checked_mul(c)?)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        TotalOperator {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|(a, c)| (a.clone(), -c)).collect(),
        }
    }
}

/// `D^α f`, memoized through the intermediate derivatives already computed.
fn derivative(cache: &mut BTreeMap<MultiIndex, Expression>, alpha: &MultiIndex) -> Expression {
    if let Some(e) = cache.get(alpha) {
        return e.clone();
    }
    let i = (0..alpha.len())
        .find(|&i| alpha.get(i) > 0)
        .expect("zero multi-index is always cached");
    let lower = alpha.with_component(i, alpha.get(i) - 1);
    let e = derivative(cache, &lower).d(i);
    cache.insert(alpha.clone(), e.clone());
    e
}

/// All `β ≤ α` componentwise.
pub(crate) fn sub_indices(alpha: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zero(alpha.len())];
    for i in 0..alpha.len() {
        let mut next = Vec::new();
        for b in &out {
            for k in 0..=alpha.get(i) {
                next.push(b.with_component(i, k));
            }
        }
        out = next;
    }
    out
}

impl PartialEq for TotalOperator {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl fmt::Display for TotalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(alpha, c)| {
                if alpha.is_zero() {
                    format!("({c})")
                } else {
                    format!("({c})*D[{}]", crate::format::multi_index_string(&self.ctx, alpha))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for TotalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TotalOperator({self})")
    }
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

    #[test]
    fn applies_and_adjoints() {
        let c = ctx();
        let dt = TotalOperator::d(&c, 0).unwrap();
        assert_eq!(dt.apply(&e(&c, "u")).unwrap(), e(&c, "u'"));
        assert_eq!(dt.formal_adjoint(), dt.neg());
        let m = TotalOperator::mult(&e(&c, "u*t"));
        assert_eq!(m.formal_adjoint(), m);
        assert!(TotalOperator::zero(&c).apply(&e(&c, "u^2")).unwrap().is_zero());
    }

    #[test]
    fn composition_matches_sequential_application() {
        let c = ctx();
        let p = TotalOperator::from_coefficients(
            &c,
            [
                (MultiIndex::from_slice(&[2]), e(&c, "u")),
                (MultiIndex::from_slice(&[0]), e(&c, "t")),
            ],
        )
        .unwrap();
        let q = TotalOperator::from_coefficients(&c, [(MultiIndex::from_slice(&[1]), e(&c, "u'^2"))]).unwrap();
        let g = e(&c, "u*u''");
        let lhs = p.compose(&q).unwrap().apply(&g).unwrap();
        let rhs = p.apply(&q.apply(&g).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(p.formal_adjoint().formal_adjoint(), p);
    }
}
