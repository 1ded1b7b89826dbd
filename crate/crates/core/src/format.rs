//! Canonical text output; always accepted back by the parser for contexts
//! without composite function symbols.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::context::{FunctionKind, JetContext};
use crate::expr::Expression;
use crate::poly::{Mono, Poly};
use crate::var::{MultiIndex, Var};

pub fn format(e: &Expression) -> String {
    let ctx = e.context();
    let num = e.numerator();
    let den = e.denominator();
    if den.is_one() {
        return poly_string(ctx, num);
    }
    // integer coefficients with unit content on both sides
    let (cn, pn) = num.integer_primitive();
    let (cd, pd) = den.integer_primitive();
    let c = cn / cd;
    let top = pn.scale(&BigRational::from_integer(c.numer().clone()));
    let bottom = pd.scale(&BigRational::from_integer(c.denom().clone()));
    let top_s = poly_string(ctx, &top);
    let bottom_s = poly_string(ctx, &bottom);
    let top_s = if top.len() > 1 { format!("({top_s})") } else { top_s };
    let bare = bottom.len() == 1
        && bottom.leading().is_some_and(|(m, c)| c.is_one() && m.len() == 1);
    let bottom_s = if bare { bottom_s } else { format!("({bottom_s})") };
    format!("{top_s} / {bottom_s}")
}

fn poly_string(ctx: &JetContext, p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_owned();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().enumerate() {
        let t = term_string(ctx, m, c);
        if k == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    out
}

fn term_string(ctx: &JetContext, m: &Mono, c: &BigRational) -> String {
    let sign = if c.is_negative() { "-" } else { "" };
    let a = c.abs();
    let p: BigInt = a.numer().clone();
    let q: BigInt = a.denom().clone();
    if m.is_one() {
        return if q.is_one() {
            format!("{sign}{p}")
        } else {
            format!("{sign}{p}/{q}")
        };
    }
    let body = mono_string(ctx, m);
    let mut s = String::from(sign);
    if !p.is_one() {
        s.push_str(&format!("{p}*"));
    }
    s.push_str(&body);
    if !q.is_one() {
        s.push_str(&format!("/{q}"));
    }
    s
}

fn mono_string(ctx: &JetContext, m: &Mono) -> String {
    m.factors()
        .iter()
        .map(|(v, e)| {
            let g = var_string(ctx, v);
            if *e == 1 {
                g
            } else {
                format!("{g}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

pub fn var_string(ctx: &JetContext, v: &Var) -> String {
    match v {
        Var::Indep(i) => ctx.independent()[*i as usize].clone(),
        Var::Jet { dep, alpha } => {
            let name = &ctx.dependent()[*dep as usize];
            if alpha.is_zero() {
                return name.clone();
            }
            let vars = alpha.to_vars();
            if ctx.suffix_notation() {
                let suffix: String = vars.iter().map(|&i| ctx.independent()[i].as_str()).collect();
                format!("{name}_{suffix}")
            } else {
                der_string(ctx, name, &vars)
            }
        }
        Var::Func { func, alpha } => {
            let sym = ctx.function(*func as usize);
            match &sym.kind {
                FunctionKind::Plain { args } => {
                    let applied = if args.is_empty() {
                        sym.name.clone()
                    } else {
                        let names: Vec<&str> = args.iter().map(|&i| ctx.independent()[i].as_str()).collect();
                        format!("{}({})", sym.name, names.join(","))
                    };
                    if alpha.is_zero() {
                        return applied;
                    }
                    let vars: Vec<usize> = alpha.to_vars().into_iter().map(|k| args[k]).collect();
                    der_string(ctx, &applied, &vars)
                }
                FunctionKind::Composite { arg } => {
                    let inner = format(&Expression::from_ratfunc(&std::sync::Arc::new(ctx.clone()), arg.clone()));
                    let k = alpha.get(0);
                    if k == 0 {
                        format!("{}({inner})", sym.name)
                    } else {
                        format!("{}{}({inner})", sym.name, "'".repeat(k as usize))
                    }
                }
            }
        }
        Var::Kernel { var, kind } => format!("{}({})", kind.name(), ctx.independent()[*var as usize]),
    }
}

fn der_string(ctx: &JetContext, target: &str, vars: &[usize]) -> String {
    let names: Vec<&str> = vars.iter().map(|&i| ctx.independent()[i].as_str()).collect();
    format!("der({target}, {})", names.join(", "))
}

/// Text for a multi-index in suffix form, e.g. `txx`.
pub fn multi_index_string(ctx: &JetContext, alpha: &MultiIndex) -> String {
    alpha
        .to_vars()
        .iter()
        .map(|&i| ctx.independent()[i].as_str())
        .collect::<Vec<_>>()
        .join(if ctx.suffix_notation() { "" } else { "," })
}
