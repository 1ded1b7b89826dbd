//! Equations admitting infinite families of zero-order characteristics.

use std::sync::Arc;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::jet::{euler, split_by_arbitrary_functions};
use crate::var::MultiIndex;

fn single_unknown(ctx: &JetContext) -> Result<()> {
    if ctx.n_dependent() != 1 {
        return Err(Error::Precondition("expected one unknown".into()));
    }
    Ok(())
}

/// Whether `E(c·L)` vanishes for every choice of the given function symbols.
fn annihilated_for_all(c: &Expression, l: &Expression, funcs: &[usize]) -> Result<bool> {
    let e = euler(&c.checked_mul(l)?, 0)?;
    Ok(split_by_arbitrary_functions(&e, funcs)?.is_empty())
}

fn symbol(ctx: &Arc<JetContext>, f: usize, arity: usize) -> Expression {
    Expression::function(ctx, f, MultiIndex::zero(arity)).expect("declared symbol")
}

/// Whether `L = 0` admits `{h(x_args)}` for arbitrary `h`.
pub fn verify_family_h(l: &Expression, args: &[usize]) -> Result<bool> {
    let ctx = l.context();
    single_unknown(ctx)?;
    for &a in args {
        ctx.check_var(a)?;
    }
    if (0..ctx.n_independent()).all(|i| args.contains(&i)) {
        return Err(Error::Precondition(
            "the arguments must leave at least one independent variable".into(),
        ));
    }
    let (ext, h) = ctx.with_function("h", args);
    annihilated_for_all(&symbol(&ext, h, args.len()), &l.lift(&ext), &[h])
}

/// `Σ_{i ∉ args} D_i F^i`, one `F` per remaining variable in increasing order.
pub fn construct_family_h(fs: &[Expression], args: &[usize]) -> Result<Expression> {
    let first = fs
        .first()
        .ok_or_else(|| Error::Precondition("no components".into()))?;
    let ctx = first.context();
    let rest: Vec<usize> = (0..ctx.n_independent()).filter(|i| !args.contains(i)).collect();
    if rest.len() != fs.len() {
        return Err(Error::Precondition(format!(
            "expected {} components, got {}",
            rest.len(),
            fs.len()
        )));
    }
    let mut out = Expression::zero(ctx);
    for (&i, f) in rest.iter().zip(fs) {
        out = out.checked_add(&f.total_derivative(i)?)?;
    }
    Ok(out)
}

/// Whether `L = 0` admits `{h(x_b) + Σ_{i≠b} f^i(x_b) x_i}`.
pub fn verify_family_affine(l: &Expression, base: usize) -> Result<bool> {
    let ctx = l.context();
    single_unknown(ctx)?;
    ctx.check_var(base)?;
    let (mut ext, h) = ctx.with_function("h", &[base]);
    let mut funcs = vec![h];
    let mut ch = symbol(&ext, h, 1);
    for i in (0..ctx.n_independent()).filter(|&i| i != base) {
        let (next, f) = ext.with_function("f", &[base]);
        ext = next;
        funcs.push(f);
        let xi = Expression::independent(&ext, i)?;
        ch = ch.lift(&ext) + symbol(&ext, f, 1) * xi;
    }
    annihilated_for_all(&ch, &l.lift(&ext), &funcs)
}

/// `Σ_{i,j} D_i D_j K^{ij}` over the variables other than `base`.
pub fn construct_family_affine(ks: &[Vec<Expression>], base: usize) -> Result<Expression> {
    let ctx = ks
        .first()
        .and_then(|r| r.first())
        .map(|e| e.context().clone())
        .ok_or_else(|| Error::Precondition("empty matrix".into()))?;
    ctx.check_var(base)?;
    let rest: Vec<usize> = (0..ctx.n_independent()).filter(|&i| i != base).collect();
    if ks.len() != rest.len() || ks.iter().any(|r| r.len() != rest.len()) {
        return Err(Error::Precondition(format!(
            "expected a {0}×{0} matrix",
            rest.len()
        )));
    }
    let mut out = Expression::zero(&ctx);
    for (a, &i) in rest.iter().enumerate() {
        for (b, &j) in rest.iter().enumerate() {
            out = out.checked_add(&ks[a][b].total_derivative(j)?.total_derivative(i)?)?;
        }
    }
    Ok(out)
}

fn check_antisymmetric(g: &[Vec<Expression>], n: usize) -> Result<()> {
    if g.len() != n || g.iter().any(|r| r.len() != n) {
        return Err(Error::Precondition(format!("expected a {n}×{n} matrix")));
    }
    for i in 0..n {
        for j in i..n {
            if !g[i][j].checked_add(&g[j][i])?.is_zero() {
                return Err(Error::SymmetryViolation(i, j));
            }
        }
    }
    Ok(())
}

/// `D_i(G^{ij} D_j ω)` for antisymmetric `G`.
pub fn construct_family_omega(g: &[Vec<Expression>], omega: &Expression) -> Result<Expression> {
    let ctx = omega.context();
    let n = ctx.n_independent();
    check_antisymmetric(g, n)?;
    let grad: Vec<Expression> = (0..n).map(|j| omega.d(j)).collect();
    let mut out = Expression::zero(ctx);
    for (i, row) in g.iter().enumerate() {
        let mut fi = Expression::zero(ctx);
        for (gij, dj) in row.iter().zip(&grad) {
            fi = fi.checked_add(&gij.checked_mul(dj)?)?;
        }
        out = out.checked_add(&fi.total_derivative(i)?)?;
    }
    Ok(out)
}

/// The null divergence `F^j = D_i G^{ij}`, with `L = F^j D_j ω`.
pub fn omega_null_divergence(g: &[Vec<Expression>]) -> Result<Vec<Expression>> {
    let ctx = g
        .first()
        .and_then(|r| r.first())
        .map(|e| e.context().clone())
        .ok_or_else(|| Error::Precondition("empty matrix".into()))?;
    let n = ctx.n_independent();
    check_antisymmetric(g, n)?;
    (0..n)
        .map(|j| {
            let mut f = Expression::zero(&ctx);
            for (i, row) in g.iter().enumerate() {
                f = f.checked_add(&row[j].total_derivative(i)?)?;
            }
            Ok(f)
        })
        .collect()
}

/// Whether `L = 0` admits `{h(ω)}` for arbitrary `h`.
pub fn verify_family_omega(l: &Expression, omega: &Expression) -> Result<bool> {
    let ctx = l.context();
    single_unknown(ctx)?;
    let omega = Expression::zero(ctx).checked_add(omega)?;
    if omega.is_constant() {
        return Err(Error::Precondition("ω must not be constant".into()));
    }
    let (ext, h) = omega.context().with_composite("h", omega.ratfunc().clone());
    annihilated_for_all(&symbol(&ext, h, 1), &l.lift(&ext), &[h])
}

/// `Some(1)` if `a = b`, `Some(-1)` if `a = −b`, else `None`.
pub fn sign_relation(a: &Expression, b: &Expression) -> Result<Option<i8>> {
    if a.checked_sub(b)?.is_zero() {
        Ok(Some(1))
    } else if a.checked_add(b)?.is_zero() {
        Ok(Some(-1))
    } else {
        Ok(None)
    }
}
