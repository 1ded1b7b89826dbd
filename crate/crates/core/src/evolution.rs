//! Evolution equations `u_t = G(t, x, u, u_x, …)` and their conservation laws.
//!
//! Contexts have the time variable at index 0, the space variable at index 1
//! and a single unknown.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::integrate::antiderivative;
use crate::jet::{check_evolution_context, check_no_t_derivatives, euler};
use crate::operator::TotalOperator;
use crate::ratfunc::RatFunc;
use crate::var::{MultiIndex, Var};
use crate::wronskian::{darboux_operator, without, wronskian};

const T: usize = 0;
const X: usize = 1;

#[derive(Clone, Debug)]
pub struct EvolutionEquation {
    rhs: Expression,
    order: Option<u32>,
}

impl EvolutionEquation {
    /// Requires `G` free of `t`-derivatives, of order `r ≥ 2`, with `G_{u_r} ≠ 0`.
    pub fn new(rhs: Expression) -> Result<Self> {
        let (eq, warning) = Self::new_unchecked(rhs)?;
        match warning {
            Some(w) => Err(Error::Precondition(w)),
            None => Ok(eq),
        }
    }

    /// Skips the order conditions, returning a description of the violated
    /// one instead.
    pub fn new_unchecked(rhs: Expression) -> Result<(Self, Option<String>)> {
        check_evolution_context(rhs.context())?;
        check_no_t_derivatives(&rhs)?;
        let order = rhs.order();
        let warning = match order {
            Some(r) if r >= 2 => {
                let top = MultiIndex::zero(2).with_component(X, r as u16);
                if rhs.partial_jet(0, &top).is_zero() {
                    Some(format!("right-hand side does not depend on u of order {r}"))
                } else {
                    None
                }
            }
            Some(r) => Some(format!("right-hand side has order {r} < 2")),
            None => Some("right-hand side does not depend on u".to_owned()),
        };
        Ok((EvolutionEquation { rhs, order }, warning))
    }

    pub fn rhs(&self) -> &Expression {
        &self.rhs
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn context(&self) -> &Arc<JetContext> {
        self.rhs.context()
    }
}

/// `D̄_t f = ∂_t f + (D_x^k G) ∂f/∂u_k`.
pub fn restricted_dt(eq: &EvolutionEquation, f: &Expression) -> Result<Expression> {
    check_no_t_derivatives(f)?;
    let f = Expression::zero(eq.context()).checked_add(f)?;
    let ctx = f.context().clone();
    let mut dx_g: BTreeMap<u16, RatFunc> = BTreeMap::new();
    dx_g.insert(0, eq.rhs().ratfunc().clone());
    let mut image = |v: &Var| -> Option<RatFunc> {
        match v {
            Var::Jet { alpha, .. } => {
                let k = alpha.get(X);
                while !dx_g.contains_key(&k) {
                    let (&top, g) = dx_g.last_key_value().expect("seeded");
                    let next = Expression::from_ratfunc(&ctx, g.clone()).d(X);
                    dx_g.insert(top + 1, next.ratfunc().clone());
                }
                Some(dx_g[&k].clone())
            }
            other => crate::expr::total_image(&ctx, other, T),
        }
    };
    Ok(f.derivation(&mut image))
}

/// The variational derivative of a density.
pub fn characteristic_from_density(rho: &Expression) -> Result<Expression> {
    check_evolution_context(rho.context())?;
    check_no_t_derivatives(rho)?;
    euler(rho, 0)
}

/// Whether `D̄_t ρ + D_x σ = 0`.
pub fn verify_conserved_current(eq: &EvolutionEquation, rho: &Expression, sigma: &Expression) -> Result<bool> {
    check_no_t_derivatives(sigma)?;
    let residual = restricted_dt(eq, rho)?.checked_add(&sigma.total_derivative(X)?)?;
    Ok(residual.is_zero())
}

/// Whether `ρ` is a density of the equation: `D̄_t ρ ∈ im D_x`.
///
/// Tested as `E(E(ρ)·G + ρ_t) = 0`, which differs from `E(D̄_t ρ)` by the Euler
/// operator of a total x-derivative but has lower order.
pub fn is_density(eq: &EvolutionEquation, rho: &Expression) -> Result<bool> {
    check_no_t_derivatives(rho)?;
    let rho = Expression::zero(eq.context()).checked_add(rho)?;
    let lambda = euler(&rho, 0)?;
    let f = lambda.checked_mul(eq.rhs())?.checked_add(&rho.explicit_derivative(T)?)?;
    Ok(euler(&f, 0)?.is_zero())
}

/// `σ` with `D_x σ = −D̄_t ρ`, integration constant zero.
pub fn flux_from_density(eq: &EvolutionEquation, rho: &Expression) -> Result<Expression> {
    let r = restricted_dt(eq, rho)?;
    if !euler(&r, 0)?.is_zero() {
        return Err(Error::NotADensity(format!("`{rho}` is not a density of u_t = {}", eq.rhs())));
    }
    Ok(-antiderivative(&r, X)?)
}

/// Result of [`construct_evolution`].
#[derive(Clone, Debug)]
pub struct ConstructedEvolution {
    pub rhs: Expression,
    /// Set when the result violates the standing order conditions.
    pub warning: Option<String>,
}

fn adjoint_darboux(ctx: &Arc<JetContext>, fs: &[Expression]) -> Result<TotalOperator> {
    if fs.is_empty() {
        return Ok(TotalOperator::identity(ctx));
    }
    Ok(darboux_operator(ctx, fs, X)?.formal_adjoint())
}

/// `G = DT(λ)†H − Σ_s DT(λ without λ^s)†(W(λ without λ^s)/W(λ) · ρ^s_t)`
/// with `λ^s` the characteristics of the densities `ρ^s`; all densities are
/// checked against the result.
pub fn construct_evolution(rhos: &[Expression], h: &Expression) -> Result<ConstructedEvolution> {
    check_evolution_context(h.context())?;
    let mut ctx = h.context().clone();
    for r in rhos {
        ctx = Expression::zero(&ctx).checked_add(&Expression::zero(r.context()))?.context().clone();
    }
    let rhos: Vec<Expression> = rhos.iter().map(|r| r.lift(&ctx)).collect();
    let h = h.lift(&ctx);
    let lambdas = rhos
        .iter()
        .map(characteristic_from_density)
        .collect::<Result<Vec<_>>>()?;
    let w = wronskian(&ctx, &lambdas, X)?;
    if w.is_zero() {
        return Err(Error::ZeroWronskian);
    }
    let mut g = adjoint_darboux(&ctx, &lambdas)?.apply(&h)?;
    for (s, rho) in rhos.iter().enumerate() {
        let rho_t = rho.explicit_derivative(T)?;
        if rho_t.is_zero() {
            continue;
        }
        let rest = without(&lambdas, s);
        let ws = wronskian(&ctx, &rest, X)?;
        let arg = ws.checked_div(&w)?.checked_mul(&rho_t)?;
        g = g.checked_sub(&adjoint_darboux(&ctx, &rest)?.apply(&arg)?)?;
    }
    let (eq, warning) = EvolutionEquation::new_unchecked(g.clone())?;
    for rho in &rhos {
        if !is_density(&eq, rho)? {
            return Err(Error::Inconsistent(format!(
                "`{rho}` is not a density of the constructed equation"
            )));
        }
    }
    Ok(ConstructedEvolution { rhs: g, warning })
}

/// Upper bound `ord ρ` on the dimension of the kernel of `ρ_*`; `None` for −∞.
pub fn kernel_of_frechet_note(rho: &Expression) -> Option<u32> {
    rho.order()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<JetContext> {
        JetContext::parse("vars t x; unknowns u").unwrap()
    }

    fn e(c: &Arc<JetContext>, s: &str) -> Expression {
        Expression::parse(c, s).unwrap()
    }

    fn kdv(c: &Arc<JetContext>) -> EvolutionEquation {
        EvolutionEquation::new(e(c, "-u*u_x - u_xxx")).unwrap()
    }

    #[test]
    fn restricted_time_derivative() {
        let c = ctx();
        let eq = kdv(&c);
        assert_eq!(restricted_dt(&eq, &e(&c, "u")).unwrap(), e(&c, "-u*u_x - u_xxx"));
        assert!(restricted_dt(&eq, &e(&c, "x")).unwrap().is_zero());
        assert_eq!(restricted_dt(&eq, &e(&c, "u_x")).unwrap(), eq.rhs().d(1));
        assert_eq!(restricted_dt(&eq, &e(&c, "t*u")).unwrap(), e(&c, "u + t*(-u*u_x - u_xxx)"));
    }

    #[test]
    fn equation_validation() {
        let c = ctx();
        assert!(EvolutionEquation::new(e(&c, "u_x")).is_err());
        assert!(EvolutionEquation::new(e(&c, "u_tx")).is_err());
        let (_, w) = EvolutionEquation::new_unchecked(e(&c, "u*u_x")).unwrap();
        assert!(w.is_some());
    }

    #[test]
    fn densities_and_fluxes() {
        let c = ctx();
        let eq = kdv(&c);
        assert!(characteristic_from_density(&e(&c, "u")).unwrap().is_one());
        assert_eq!(flux_from_density(&eq, &e(&c, "u")).unwrap(), e(&c, "u^2/2 + u_xx"));
        assert!(flux_from_density(&eq, &e(&c, "x")).unwrap().is_zero());
        assert!(matches!(flux_from_density(&eq, &e(&c, "u^3*u_x^2")), Err(Error::NotADensity(_))));
        assert!(!verify_conserved_current(&eq, &e(&c, "u"), &Expression::zero(&c)).unwrap());
    }

    #[test]
    fn single_density_constructions() {
        let c = ctx();
        let g = construct_evolution(&[e(&c, "u")], &e(&c, "u_x")).unwrap();
        assert_eq!(g.rhs, e(&c, "-u_xx"));
        assert!(g.warning.is_none());
        let eq = EvolutionEquation::new(g.rhs).unwrap();
        assert!(verify_conserved_current(&eq, &e(&c, "u"), &e(&c, "u_x")).unwrap());
        assert_eq!(kernel_of_frechet_note(&e(&c, "u_x^2")), Some(1));
    }
}
