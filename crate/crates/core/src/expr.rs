//! Differential functions over a jet context.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::context::{FunctionKind, JetContext};
use crate::error::{Error, Result};
use crate::poly::{Mono, Poly};
use crate::ratfunc::RatFunc;
use crate::var::{KernelKind, MultiIndex, Var};

/// A canonical rational differential function `f[u]`.
#[derive(Clone)]
pub struct Expression {
    ctx: Arc<JetContext>,
    value: RatFunc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The smaller context is lifted into the larger one when one extends the other.
fn join(a: &Arc<JetContext>, b: &Arc<JetContext>) -> Option<Arc<JetContext>> {
    if Arc::ptr_eq(a, b) || **a == **b || a.extends(b) {
        Some(a.clone())
    } else if b.extends(a) {
        Some(b.clone())
    } else {
        None
    }
}

impl Expression {
    pub(crate) fn from_ratfunc(ctx: &Arc<JetContext>, value: RatFunc) -> Self {
        Expression {
            ctx: ctx.clone(),
            value,
        }
    }

    pub fn zero(ctx: &Arc<JetContext>) -> Self {
        Self::from_ratfunc(ctx, RatFunc::zero())
    }

    pub fn one(ctx: &Arc<JetContext>) -> Self {
        Self::from_int(ctx, 1)
    }

    pub fn from_int(ctx: &Arc<JetContext>, n: i64) -> Self {
        Self::from_ratfunc(ctx, RatFunc::from_int(n))
    }

    pub fn constant(ctx: &Arc<JetContext>, c: BigRational) -> Self {
        Self::from_ratfunc(ctx, RatFunc::constant(c))
    }

    pub fn rational(ctx: &Arc<JetContext>, p: i64, q: i64) -> Self {
        Self::constant(ctx, BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn independent(ctx: &Arc<JetContext>, i: usize) -> Result<Self> {
        ctx.check_var(i)?;
        Ok(Self::from_ratfunc(ctx, RatFunc::var(Var::Indep(i as u16))))
    }

    /// The jet variable `u^a_α`.
    pub fn jet(ctx: &Arc<JetContext>, a: usize, alpha: MultiIndex) -> Result<Self> {
        ctx.check_dep(a)?;
        if alpha.len() != ctx.n_independent() {
            return Err(Error::InvalidContext(format!(
                "multi-index of length {} in a context with {} independent variables",
                alpha.len(),
                ctx.n_independent()
            )));
        }
        Ok(Self::from_ratfunc(ctx, RatFunc::var(Var::jet(a, alpha))))
    }

    /// The jet variable with derivatives listed by variable index, e.g. `[0, 1, 1]`.
    pub fn jet_of(ctx: &Arc<JetContext>, a: usize, vars: &[usize]) -> Result<Self> {
        for &i in vars {
            ctx.check_var(i)?;
        }
        Self::jet(ctx, a, MultiIndex::from_vars(ctx.n_independent(), vars))
    }

    /// `u^a` itself.
    pub fn unknown(ctx: &Arc<JetContext>, a: usize) -> Result<Self> {
        Self::jet(ctx, a, MultiIndex::zero(ctx.n_independent()))
    }

    /// A derivative of an arbitrary-function symbol; `alpha` runs over its arguments.
    pub fn function(ctx: &Arc<JetContext>, f: usize, alpha: MultiIndex) -> Result<Self> {
        let sym = ctx
            .functions()
            .get(f)
            .ok_or_else(|| Error::InvalidContext(format!("no function symbol #{f}")))?;
        let expected = match &sym.kind {
            FunctionKind::Plain { args } => args.len(),
            FunctionKind::Composite { .. } => 1,
        };
        if alpha.len() != expected {
            return Err(Error::InvalidContext(format!(
                "derivative index of wrong length for `{}`",
                sym.name
            )));
        }
        Ok(Self::from_ratfunc(
            ctx,
            RatFunc::var(Var::Func {
                func: f as u16,
                alpha,
            }),
        ))
    }

    pub fn kernel(ctx: &Arc<JetContext>, i: usize, kind: KernelKind) -> Result<Self> {
        ctx.check_var(i)?;
        Ok(Self::from_ratfunc(
            ctx,
            RatFunc::var(Var::Kernel {
                var: i as u16,
                kind,
            }),
        ))
    }

    pub fn parse(ctx: &Arc<JetContext>, text: &str) -> Result<Self> {
        crate::parse::parse(text, ctx)
    }

    pub fn context(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    pub fn ratfunc(&self) -> &RatFunc {
        &self.value
    }

    pub fn numerator(&self) -> &Poly {
        self.value.num()
    }

    pub fn denominator(&self) -> &Poly {
        self.value.den()
    }

    /// Reinterprets the expression in a context extending its own.
    pub fn lift(&self, ctx: &Arc<JetContext>) -> Self {
        assert!(
            ctx.extends(&self.ctx),
            "target context does not extend the expression's context"
        );
        Self::from_ratfunc(ctx, self.value.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.value.num().is_one() && self.value.den().is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.value.is_polynomial()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        self.value.as_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    fn same_ctx(&self, rhs: &Expression) -> Result<Arc<JetContext>> {
        join(&self.ctx, &rhs.ctx).ok_or(Error::ContextMismatch)
    }

    pub fn checked_add(&self, rhs: &Expression) -> Result<Self> {
        let ctx = self.same_ctx(rhs)?;
        Ok(Self::from_ratfunc(&ctx, &self.value + &rhs.value))
    }

    pub fn checked_sub(&self, rhs: &Expression) -> Result<Self> {
        let ctx = self.same_ctx(rhs)?;
        Ok(Self::from_ratfunc(&ctx, &self.value - &rhs.value))
    }

    pub fn checked_mul(&self, rhs: &Expression) -> Result<Self> {
        let ctx = self.same_ctx(rhs)?;
        Ok(Self::from_ratfunc(&ctx, &self.value * &rhs.value))
    }

    pub fn checked_div(&self, rhs: &Expression) -> Result<Self> {
        let ctx = self.same_ctx(rhs)?;
        let q = self.value.checked_div(&rhs.value).ok_or(Error::DivisionByZero)?;
        Ok(Self::from_ratfunc(&ctx, q))
    }

    pub fn arith(op: ArithOp, a: &Expression, b: &Expression) -> Result<Self> {
        match op {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
            ArithOp::Div => a.checked_div(b),
        }
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let v = self.value.pow(e).ok_or(Error::DivisionByZero)?;
        Ok(Self::from_ratfunc(&self.ctx, v))
    }

    pub fn recip(&self) -> Result<Self> {
        let v = self.value.recip().ok_or(Error::DivisionByZero)?;
        Ok(Self::from_ratfunc(&self.ctx, v))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_ratfunc(&self.ctx, self.value.scale(c))
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(c)))
    }

    pub fn sum<'a>(ctx: &Arc<JetContext>, terms: impl IntoIterator<Item = &'a Expression>) -> Self {
        terms
            .into_iter()
            .fold(Expression::zero(ctx), |acc, t| &acc + t)
    }

    /// Every generator occurring, including those inside composite arguments.
    pub fn generators(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        collect_generators(&self.ctx, &self.value, &mut out);
        out
    }

    /// The jet variables `(a, α)` the expression depends on.
    pub fn jets(&self) -> BTreeSet<(usize, MultiIndex)> {
        self.generators()
            .into_iter()
            .filter_map(|v| match v {
                Var::Jet { dep, alpha } => Some((dep as usize, alpha)),
                _ => None,
            })
            .collect()
    }

    /// Highest derivative order; `None` stands for −∞ (no jet variables).
    pub fn order(&self) -> Option<u32> {
        self.jets().iter().map(|(_, a)| a.order()).max()
    }

    /// Highest number of differentiations in variable `i` among jet variables.
    pub fn order_in(&self, i: usize) -> Option<u32> {
        self.jets().iter().map(|(_, a)| u32::from(a.get(i))).max()
    }

    pub fn depends_on_jets(&self) -> bool {
        self.generators().iter().any(Var::is_jet)
    }

    /// Simultaneous substitution of generators, then renormalization.
    ///
    /// Composite function symbols are kept as they are; bindings must not
    /// touch their arguments.
    pub fn substitute(&self, bindings: &BTreeMap<Var, Expression>) -> Result<Self> {
        let mut ctx = self.ctx.clone();
        for e in bindings.values() {
            ctx = join(&ctx, &e.ctx).ok_or(Error::ContextMismatch)?;
        }
        for (i, f) in self.ctx.functions().iter().enumerate() {
            if let FunctionKind::Composite { arg } = &f.kind {
                let used = self
                    .value
                    .contains_var_where(|v| matches!(v, Var::Func { func, .. } if *func as usize == i));
                if used && arg.contains_var_where(|v| bindings.contains_key(v)) {
                    return Err(Error::Precondition(format!(
                        "substitution into the argument of `{}`",
                        f.name
                    )));
                }
            }
        }
        let values: BTreeMap<&Var, &RatFunc> = bindings.iter().map(|(k, v)| (k, &v.value)).collect();
        let num = eval_poly(self.value.num(), &values);
        let den = eval_poly(self.value.den(), &values);
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let q = num.checked_div(&den).ok_or(Error::ZeroDenominator)?;
        Ok(Self::from_ratfunc(&ctx, q))
    }

    /// Total derivative `D_i`.
    pub fn total_derivative(&self, i: usize) -> Result<Self> {
        self.ctx.check_var(i)?;
        Ok(self.d(i))
    }

    pub(crate) fn d(&self, i: usize) -> Self {
        let value = derive(&self.ctx, &self.value, &mut |v| total_image(&self.ctx, v, i));
        Self::from_ratfunc(&self.ctx, value)
    }

    /// `D^α` applied repeatedly.
    pub fn d_multi(&self, alpha: &MultiIndex) -> Self {
        alpha.to_vars().into_iter().fold(self.clone(), |acc, i| acc.d(i))
    }

    /// Partial derivative with respect to one generator, with the chain rule
    /// applied through composite function symbols.
    pub fn partial(&self, v: &Var) -> Self {
        let value = derive(&self.ctx, &self.value, &mut |w| {
            if w == v {
                Some(RatFunc::one())
            } else {
                None
            }
        });
        Self::from_ratfunc(&self.ctx, value)
    }

    /// `∂f/∂u^a_α`.
    pub fn partial_jet(&self, a: usize, alpha: &MultiIndex) -> Self {
        self.partial(&Var::jet(a, alpha.clone()))
    }

    /// Explicit partial derivative `∂_i`, jet variables held fixed.
    pub fn explicit_derivative(&self, i: usize) -> Result<Self> {
        self.ctx.check_var(i)?;
        let value = derive(&self.ctx, &self.value, &mut |v| match v {
            Var::Jet { .. } => None,
            _ => total_image(&self.ctx, v, i),
        });
        Ok(Self::from_ratfunc(&self.ctx, value))
    }

    /// Applies the derivation determined by images of generators; composite
    /// symbols follow the chain rule automatically.
    pub(crate) fn derivation(&self, image: &mut dyn FnMut(&Var) -> Option<RatFunc>) -> Self {
        Self::from_ratfunc(&self.ctx, derive(&self.ctx, &self.value, image))
    }
}

fn collect_generators(ctx: &JetContext, value: &RatFunc, out: &mut BTreeSet<Var>) {
    for v in value.vars() {
        if let Var::Func { func, .. } = &v {
            if let FunctionKind::Composite { arg } = &ctx.function(*func as usize).kind {
                collect_generators(ctx, arg, out);
            }
        }
        out.insert(v);
    }
}

fn eval_poly(p: &Poly, values: &BTreeMap<&Var, &RatFunc>) -> RatFunc {
    if !p.vars().iter().any(|v| values.contains_key(v)) {
        return RatFunc::from_poly(p.clone());
    }
    let mut powers: BTreeMap<(&Var, u32), RatFunc> = BTreeMap::new();
    let mut out = RatFunc::zero();
    for (m, c) in p.terms() {
        let mut kept = Vec::new();
        let mut term = RatFunc::constant(c.clone());
        for (v, e) in m.factors() {
            match values.get_key_value(v) {
                Some((&key, &val)) => {
                    let pw = powers
                        .entry((key, *e))
                        .or_insert_with(|| val.pow(i64::from(*e)).expect("nonnegative power"));
                    term = &term * pw;
                }
                None => kept.push((v.clone(), *e)),
            }
        }
        let mono = RatFunc::from_poly(Poly::term(Mono::from_factors(kept), BigRational::one()));
        out = &out + &(&term * &mono);
    }
    out
}

/// Image of a generator under `D_i`; `None` means zero.
pub(crate) fn total_image(ctx: &JetContext, v: &Var, i: usize) -> Option<RatFunc> {
    match v {
        Var::Indep(j) => (*j as usize == i).then(RatFunc::one),
        Var::Jet { dep, alpha } => Some(RatFunc::var(Var::Jet {
            dep: *dep,
            alpha: alpha.with_increment(i),
        })),
        Var::Func { func, alpha } => match &ctx.function(*func as usize).kind {
            FunctionKind::Plain { args } => args.iter().position(|&a| a == i).map(|k| {
                RatFunc::var(Var::Func {
                    func: *func,
                    alpha: alpha.with_increment(k),
                })
            }),
            FunctionKind::Composite { .. } => None,
        },
        Var::Kernel { var, kind } => {
            if *var as usize != i {
                return None;
            }
            Some(match kind {
                KernelKind::Exp => RatFunc::var(v.clone()),
                KernelKind::Sin => RatFunc::var(Var::Kernel {
                    var: *var,
                    kind: KernelKind::Cos,
                }),
                KernelKind::Cos => -&RatFunc::var(Var::Kernel {
                    var: *var,
                    kind: KernelKind::Sin,
                }),
            })
        }
    }
}

fn derive_poly(
    ctx: &JetContext,
    p: &Poly,
    images: &mut BTreeMap<Var, Option<RatFunc>>,
    image: &mut dyn FnMut(&Var) -> Option<RatFunc>,
) -> RatFunc {
    let mut poly_part = Poly::zero();
    let mut rat_part = RatFunc::zero();
    for v in p.vars() {
        if !images.contains_key(&v) {
            let img = generator_image(ctx, &v, images, image);
            images.insert(v.clone(), img);
        }
        let Some(img) = images.get(&v).and_then(Option::as_ref) else {
            continue;
        };
        let dp = p.derivative(&v);
        if img.is_polynomial() {
            poly_part = &poly_part + &(&dp * img.num());
        } else {
            rat_part = &rat_part + &(&RatFunc::from_poly(dp) * img);
        }
    }
    &RatFunc::from_poly(poly_part) + &rat_part
}

fn generator_image(
    ctx: &JetContext,
    v: &Var,
    images: &mut BTreeMap<Var, Option<RatFunc>>,
    image: &mut dyn FnMut(&Var) -> Option<RatFunc>,
) -> Option<RatFunc> {
    if let Var::Func { func, alpha } = v {
        if let FunctionKind::Composite { arg } = &ctx.function(*func as usize).kind {
            let d_arg = derive_with(ctx, arg, images, image);
            if d_arg.is_zero() {
                return None;
            }
            let next = RatFunc::var(Var::Func {
                func: *func,
                alpha: alpha.with_increment(0),
            });
            return Some(&next * &d_arg);
        }
    }
    image(v).filter(|r| !r.is_zero())
}

fn derive_with(
    ctx: &JetContext,
    value: &RatFunc,
    images: &mut BTreeMap<Var, Option<RatFunc>>,
    image: &mut dyn FnMut(&Var) -> Option<RatFunc>,
) -> RatFunc {
    let dn = derive_poly(ctx, value.num(), images, image);
    if value.den().is_one() {
        return dn;
    }
    if dn.is_polynomial() && crate::ratfunc::is_sin_free(value) && crate::ratfunc::is_sin_free(&dn) {
        let dfs: Option<Vec<Poly>> = value
            .factors()
            .iter()
            .map(|(f, _)| {
                let d = derive_poly(ctx, f, images, image);
                (d.is_polynomial() && crate::ratfunc::is_sin_free(&d)).then(|| d.num().clone())
            })
            .collect();
        if let Some(dfs) = dfs {
            return crate::ratfunc::quotient_derivative(value, dn.num(), &dfs);
        }
    }
    let dd = derive_poly(ctx, value.den(), images, image);
    let n = RatFunc::from_poly(value.num().clone());
    let d = RatFunc::from_poly(value.den().clone());
    let top = &(&dn * &d) - &(&n * &dd);
    if top.is_zero() {
        return top;
    }
    let den2 = value.den() * value.den();
    RatFunc::new(top.num().clone(), top.den() * &den2).expect("nonzero denominator")
}

pub(crate) fn derive(
    ctx: &JetContext,
    value: &RatFunc,
    image: &mut dyn FnMut(&Var) -> Option<RatFunc>,
) -> RatFunc {
    let mut images = BTreeMap::new();
    derive_with(ctx, value, &mut images, image)
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && join(&self.ctx, &other.ctx).is_some()
    }
}

impl Eq for Expression {}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::format(self))
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({})", crate::format::format(self))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr for &Expression {
            type Output = Expression;
            /// Panics if the operands live in unrelated contexts.
            fn $method(self, rhs: &Expression) -> Expression {
                self.$checked(rhs).expect("expressions from unrelated contexts")
            }
        }
        impl $tr for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Expression> for Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::from_ratfunc(&self.ctx, -&self.value)
    }
}

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}
