//! Inverting total derivatives.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::context::FunctionKind;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::jet::{is_total_divergence, restricted_euler_over};
use crate::poly::{Mono, Poly};
use crate::ratfunc::RatFunc;
use crate::var::{KernelKind, MultiIndex, Var};

const MAX_STEPS: usize = 400;

/// How many times `x_i` has been differentiated in a generator, for the
/// generators that `D_i` raises.
fn raised_order(ctx: &crate::context::JetContext, v: &Var, i: usize) -> Option<u16> {
    match v {
        Var::Jet { alpha, .. } => Some(alpha.get(i)),
        Var::Func { func, alpha } => match &ctx.function(*func as usize).kind {
            FunctionKind::Plain { args } => args.iter().position(|&a| a == i).map(|k| alpha.get(k)),
            FunctionKind::Composite { .. } => None,
        },
        _ => None,
    }
}

fn lowered(ctx: &crate::context::JetContext, v: &Var, i: usize) -> Var {
    match v {
        Var::Jet { dep, alpha } => Var::Jet {
            dep: *dep,
            alpha: alpha.with_component(i, alpha.get(i) - 1),
        },
        Var::Func { func, alpha } => {
            let FunctionKind::Plain { args } = &ctx.function(*func as usize).kind else {
                unreachable!("composites are never raised")
            };
            let k = args.iter().position(|&a| a == i).expect("argument present");
            Var::Func {
                func: *func,
                alpha: alpha.with_component(k, alpha.get(k) - 1),
            }
        }
        _ => unreachable!("only jets and function symbols are lowered"),
    }
}

fn depends_on(ctx: &crate::context::JetContext, v: &Var, i: usize) -> bool {
    match v {
        Var::Indep(j) => *j as usize == i,
        Var::Kernel { var, .. } => *var as usize == i,
        Var::Jet { .. } => true,
        Var::Func { func, .. } => match &ctx.function(*func as usize).kind {
            FunctionKind::Plain { args } => args.contains(&i),
            FunctionKind::Composite { arg } => arg.vars().iter().any(|w| depends_on(ctx, w, i)),
        },
    }
}

/// `F` with `D_i F = f`, no additive constant, verified before return.
///
/// Peels the highest `x_i`-derivative one order at a time, then integrates
/// the remaining explicit dependence on `x_i`. Supported explicit forms are
/// polynomials in `x_i`, `exp(x_i)`, `cos(x_i)`, `sin(x_i)` over a
/// denominator free of `x_i` apart from a power of `exp(x_i)`.
pub fn antiderivative(f: &Expression, i: usize) -> Result<Expression> {
    let ctx = f.context().clone();
    ctx.check_var(i)?;
    for v in f.generators() {
        if let Var::Func { func, .. } = &v {
            if matches!(ctx.function(*func as usize).kind, FunctionKind::Composite { .. })
                && depends_on(&ctx, &v, i)
            {
                return Err(Error::NotIntegrable(format!(
                    "`{}` of a differential function",
                    ctx.function(*func as usize).name
                )));
            }
        }
    }
    let mut rest = f.clone();
    let mut acc = Expression::zero(&ctx);
    let mut last: Option<(u16, Var)> = None;
    for _ in 0..MAX_STEPS {
        let top = rest
            .generators()
            .into_iter()
            .filter_map(|v| raised_order(&ctx, &v, i).map(|k| (k, v)))
            .max();
        let Some((k, v)) = top else {
            let g = integrate_explicit(&rest, i)?;
            acc = &acc + &g;
            return verified(f, acc, i);
        };
        if k == 0 || last.as_ref().is_some_and(|l| (k, &v) >= (l.0, &l.1)) {
            return Err(not_integrable(f, i));
        }
        if rest.denominator().contains_var(&v) || rest.numerator().degree_in(&v) > 1 {
            return Err(not_integrable(f, i));
        }
        let a = rest.partial(&v);
        let w = lowered(&ctx, &v, i);
        let g = integrate_in(&a, &w).ok_or_else(|| not_integrable(f, i))?;
        rest = &rest - &g.d(i);
        acc = &acc + &g;
        last = Some((k, v));
    }
    Err(not_integrable(f, i))
}

fn not_integrable(f: &Expression, i: usize) -> Error {
    Error::NotIntegrable(format!(
        "no antiderivative of `{f}` in `{}` found",
        f.context().independent()[i]
    ))
}

fn verified(f: &Expression, g: Expression, i: usize) -> Result<Expression> {
    if g.d(i) == *f {
        Ok(g)
    } else {
        Err(Error::Inconsistent(format!("antiderivative check failed for `{f}`")))
    }
}

/// `∫ a dw` when `a` is polynomial in `w` over `w^m` times a `w`-free factor,
/// without logarithms.
fn integrate_in(a: &Expression, w: &Var) -> Option<Expression> {
    let den = a.denominator();
    let mut degrees = den.terms().map(|(m, _)| m.degree(w));
    let m = degrees.next().unwrap_or(0);
    if degrees.any(|d| d != m) {
        return None;
    }
    let mut num = Poly::zero();
    for (k, c) in a.numerator().coefficients_in(w) {
        let e = i64::from(k) - i64::from(m) + 1;
        if e == 0 {
            return None;
        }
        let scale = BigRational::new(BigInt::one(), BigInt::from(e));
        num = &num + &c.mul_mono(&Mono::pow(w.clone(), k + 1), &scale);
    }
    let r = RatFunc::new(num, den.clone())?;
    Some(Expression::from_ratfunc(a.context(), r))
}

fn is_x_generator(v: &Var, i: usize) -> bool {
    match v {
        Var::Indep(j) => *j as usize == i,
        Var::Kernel { var, .. } => *var as usize == i,
        _ => false,
    }
}

/// Integrates an expression whose only `x_i`-dependence is explicit.
fn integrate_explicit(f: &Expression, i: usize) -> Result<Expression> {
    let ctx = f.context();
    if f.is_zero() {
        return Ok(Expression::zero(ctx));
    }
    let exp = Var::Kernel {
        var: i as u16,
        kind: KernelKind::Exp,
    };
    let den = f.denominator();
    let den_exp = den.terms().next().map(|(m, _)| m.degree(&exp)).unwrap_or(0);
    let den_rest_ok = den.terms().all(|(m, _)| m.degree(&exp) == den_exp)
        && !den
            .terms()
            .any(|(m, _)| m.vars().any(|v| v != &exp && is_x_generator(v, i)));
    if !den_rest_ok {
        return Err(not_integrable(f, i));
    }
    // group the numerator by the power of exp(x_i), then by x/cos/sin monomial
    let mut groups: BTreeMap<u32, BTreeMap<Mono, Poly>> = BTreeMap::new();
    for (m, c) in f.numerator().terms() {
        let p = m.degree(&exp);
        let (xs, rest): (Vec<_>, Vec<_>) = m
            .factors()
            .iter()
            .filter(|(v, _)| v != &exp)
            .cloned()
            .partition(|(v, _)| is_x_generator(v, i));
        groups
            .entry(p)
            .or_default()
            .entry(Mono::from_factors(xs))
            .or_insert_with(Poly::zero)
            .add_term(Mono::from_factors(rest), c.clone());
    }
    let mut num = Poly::zero();
    for (p, target) in groups {
        let a = i64::from(p) - i64::from(den_exp);
        let q = solve_explicit(&target, a, i).ok_or_else(|| not_integrable(f, i))?;
        num = &num + &q.mul_mono(&Mono::pow(exp.clone(), p), &BigRational::one());
    }
    let r = RatFunc::new(num, den.clone()).expect("nonzero denominator");
    Ok(Expression::from_ratfunc(ctx, r))
}

/// Finds `Q` in `x, cos x, sin x` with `a·Q + ∂Q = P` by undetermined
/// coefficients; the coefficients of `P` and `Q` are polynomials free of `x`.
fn solve_explicit(target: &BTreeMap<Mono, Poly>, a: i64, i: usize) -> Option<Poly> {
    let x = Var::Indep(i as u16);
    let cos = Var::Kernel {
        var: i as u16,
        kind: KernelKind::Cos,
    };
    let sin = Var::Kernel {
        var: i as u16,
        kind: KernelKind::Sin,
    };
    let max_x = target.keys().map(|m| m.degree(&x)).max().unwrap_or(0);
    let max_c = target.keys().map(|m| m.degree(&cos) + m.degree(&sin)).max().unwrap_or(0);
    let mut unknowns = Vec::new();
    for j in 0..=max_x + 1 {
        for b in 0..=max_c + 1 {
            for s in 0..=1u32 {
                unknowns.push(Mono::from_factors(vec![
                    (x.clone(), j),
                    (cos.clone(), b),
                    (sin.clone(), s),
                ]));
            }
        }
    }
    let a_q = BigRational::from_integer(BigInt::from(a));
    // image of every basis monomial under Q ↦ aQ + ∂Q, reduced
    let images: Vec<BTreeMap<Mono, BigRational>> = unknowns
        .iter()
        .map(|m| {
            let p = Poly::term(m.clone(), BigRational::one());
            let mut img = p.scale(&a_q);
            img = &img + &p.derivative(&x);
            img = &img - &(&p.derivative(&cos) * &Poly::var(sin.clone()));
            img = &img + &(&p.derivative(&sin) * &Poly::var(cos.clone()));
            crate::ratfunc::trig_reduce(&img)
                .terms()
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect()
        })
        .collect();
    let mut rows: BTreeSet<Mono> = target.keys().cloned().collect();
    for img in &images {
        rows.extend(img.keys().cloned());
    }
    let rows: Vec<Mono> = rows.into_iter().collect();
    let mut matrix: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| images.iter().map(|img| img.get(r).cloned().unwrap_or_else(BigRational::zero)).collect())
        .collect();
    let mut rhs: Vec<Poly> = rows.iter().map(|r| target.get(r).cloned().unwrap_or_else(Poly::zero)).collect();
    let solution = gauss(&mut matrix, &mut rhs)?;
    let mut q = Poly::zero();
    for (m, c) in unknowns.iter().zip(solution) {
        q = &q + &c.mul_mono(m, &BigRational::one());
    }
    Some(q)
}

/// Row reduction over ℚ with polynomial right-hand sides; free unknowns are
/// set to zero. `None` if inconsistent.
fn gauss(m: &mut [Vec<BigRational>], rhs: &mut [Poly]) -> Option<Vec<Poly>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&k| !m[k][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        rhs.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        rhs[r] = rhs[r].scale(&inv);
        for k in 0..rows {
            if k != r && !m[k][c].is_zero() {
                let factor = m[k][c].clone();
                for j in 0..cols {
                    let delta = &m[r][j] * &factor;
                    m[k][j] = &m[k][j] - &delta;
                }
                let delta = rhs[r].scale(&factor);
                rhs[k] = &rhs[k] - &delta;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if rhs[r..].iter().any(|p| !p.is_zero()) {
        return None;
    }
    let mut out = vec![Poly::zero(); cols];
    for (k, &c) in pivots.iter().enumerate() {
        out[c] = rhs[k].clone();
    }
    Some(out)
}

/// `F` with `D_t F = f` in a single-variable context.
pub fn total_antiderivative_1d(f: &Expression) -> Result<Expression> {
    if f.context().n_independent() != 1 {
        return Err(Error::Precondition("expected one independent variable".into()));
    }
    if !is_total_divergence(f)? {
        return Err(Error::NotADivergence(format!("`{f}` is not a total derivative")));
    }
    antiderivative(f, 0)
}

/// `(F^i)` over the listed variables with `Σ D_i F^i = f`, verified.
///
/// Derivatives in variables outside `vars` behave like separate unknowns.
/// With several variables `f` must be polynomial in the jet variables; each
/// part homogeneous of degree `d ≥ 1` is integrated by parts through
/// `d·f = Σ u_J ∂f/∂u_J`, the jet-free part explicitly in the first variable.
pub fn horizontal_decompose(f: &Expression, vars: &[usize]) -> Result<Vec<Expression>> {
    let ctx = f.context().clone();
    if vars.is_empty() {
        return Err(Error::Precondition("no variables to decompose over".into()));
    }
    for (k, &v) in vars.iter().enumerate() {
        ctx.check_var(v)?;
        if vars[..k].contains(&v) {
            return Err(Error::Precondition("repeated variable".into()));
        }
    }
    if f.is_zero() {
        return Ok(vec![Expression::zero(&ctx); vars.len()]);
    }
    if f.denominator().contains_var_where(Var::is_jet) {
        return Err(Error::NonPolynomial(format!("`{f}` has jet variables in a denominator")));
    }
    if f.generators().iter().any(|v| {
        matches!(v, Var::Func { func, .. }
            if matches!(ctx.function(*func as usize).kind, FunctionKind::Composite { .. }))
    }) {
        return Err(Error::NonPolynomial("composite function symbols".into()));
    }
    if let Some(obstruction) = obstruction(f, vars)? {
        return Err(Error::NotADivergence(format!(
            "`{f}` is not a divergence over the given variables (obstruction `{obstruction}`)"
        )));
    }
    if vars.len() == 1 {
        return Ok(vec![antiderivative(f, vars[0])?]);
    }
    let mut out = vec![Expression::zero(&ctx); vars.len()];
    let slot = |i: usize| vars.iter().position(|&v| v == i).expect("listed variable");
    for (d, fd) in homogeneous_parts(f) {
        if d == 0 {
            out[0] = &out[0] + &antiderivative(&fd, vars[0])?;
            continue;
        }
        let inv_d = BigRational::new(BigInt::one(), BigInt::from(d));
        for (a, alpha) in fd.jets() {
            let (e_part, k_list) = split_index(&alpha, vars);
            if k_list.is_empty() {
                continue;
            }
            let mut g = fd.partial_jet(a, &alpha);
            let mut lowered_index = alpha.clone();
            let mut sign = 1;
            for (j, &ij) in k_list.iter().enumerate() {
                if j > 0 {
                    g = g.d(k_list[j - 1]);
                }
                lowered_index = lowered_index.with_component(ij, lowered_index.get(ij) - 1);
                let u = Expression::jet(&ctx, a, lowered_index.clone())?;
                let term = (&u * &g).scale(&(&inv_d * &BigRational::from_integer(BigInt::from(sign))));
                let s = slot(ij);
                out[s] = &out[s] + &term;
                sign = -sign;
            }
            debug_assert_eq!(lowered_index, e_part);
        }
    }
    let total = vars
        .iter()
        .zip(&out)
        .fold(Expression::zero(&ctx), |acc, (&i, fi)| &acc + &fi.d(i));
    if total != *f {
        return Err(Error::NotADivergence(format!(
            "`{f}` is not a divergence over the given variables"
        )));
    }
    Ok(out)
}

/// The part of a multi-index outside `vars`, and the listed-variable
/// differentiations in order.
fn split_index(alpha: &MultiIndex, vars: &[usize]) -> (MultiIndex, Vec<usize>) {
    let mut e = alpha.clone();
    let mut ks = Vec::new();
    for &i in vars {
        for _ in 0..alpha.get(i) {
            ks.push(i);
        }
        e = e.with_component(i, 0);
    }
    (e, ks)
}

fn homogeneous_parts(f: &Expression) -> BTreeMap<u32, Expression> {
    let mut parts: BTreeMap<u32, Poly> = BTreeMap::new();
    for (m, c) in f.numerator().terms() {
        let d: u32 = m.factors().iter().filter(|(v, _)| v.is_jet()).map(|(_, e)| e).sum();
        parts
            .entry(d)
            .or_insert_with(Poly::zero)
            .add_term(m.clone(), c.clone());
    }
    let den = f.denominator().clone();
    parts
        .into_iter()
        .map(|(d, p)| {
            let r = RatFunc::new(p, den.clone()).expect("nonzero denominator");
            (d, Expression::from_ratfunc(f.context(), r))
        })
        .collect()
}

/// The first nonzero restricted Euler expression over `vars`, treating each
/// derivative pattern in the other variables as its own unknown.
fn obstruction(f: &Expression, vars: &[usize]) -> Result<Option<Expression>> {
    let mut patterns: BTreeSet<(usize, MultiIndex)> = BTreeSet::new();
    for (a, alpha) in f.jets() {
        patterns.insert((a, split_index(&alpha, vars).0));
    }
    for (a, e) in patterns {
        let r = restricted_euler_over(f, vars, a, &e)?;
        if !r.is_zero() {
            return Ok(Some(r));
        }
    }
    Ok(None)
}
