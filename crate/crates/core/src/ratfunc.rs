//! Canonical rational functions over ℚ modulo the relations `sin² = 1 − cos²`.
//!
//! Representation invariants: the denominator is free of every `sin` kernel and
//! monic, the numerator has degree at most one in each `sin` kernel, and
//! numerator and denominator are coprime. Under these invariants two rational
//! functions are equal iff their representations are identical.
//!
//! The denominator is also kept as a list of monic factors, not necessarily
//! coprime, so that sums and derivatives only need gcds against small pieces.

use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::{Mono, Poly};
use crate::var::{KernelKind, Var};

type Factors = Vec<(Poly, u32)>;

#[derive(Clone)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
    factors: Factors,
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

impl Eq for RatFunc {}

impl Hash for RatFunc {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl Default for RatFunc {
    fn default() -> Self {
        Self::zero()
    }
}

impl RatFunc {
    fn poly(num: Poly) -> Self {
        RatFunc {
            num,
            den: Poly::one(),
            factors: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn constant(c: BigRational) -> Self {
        Self::poly(Poly::constant(c))
    }

    pub fn var(v: Var) -> Self {
        Self::poly(Poly::var(v))
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::poly(trig_reduce(&p))
    }

    /// `num / den` in canonical form; `None` if `den` is zero in the quotient ring.
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        let den = trig_reduce(&den);
        if den.is_zero() {
            return None;
        }
        Some(normalize(trig_reduce(&num), den))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub(crate) fn factors(&self) -> &[(Poly, u32)] {
        &self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn contains_var_where(&self, mut pred: impl FnMut(&Var) -> bool) -> bool {
        self.num.contains_var_where(&mut pred) || self.den.contains_var_where(&mut pred)
    }

    pub fn vars(&self) -> std::collections::BTreeSet<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn recip(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        if has_sin(&self.num) {
            return Some(normalize(self.den.clone(), self.num.clone()));
        }
        let lc = self.num.leading().map(|(_, c)| c.clone()).expect("nonzero");
        let inv = lc.recip();
        let mut factors = Vec::new();
        push_factor(&mut factors, self.num.scale(&inv), 1);
        Some(RatFunc {
            num: self.den.scale(&inv),
            den: product(&factors),
            factors,
        })
    }

    pub fn checked_div(&self, rhs: &RatFunc) -> Option<Self> {
        let inv = rhs.recip()?;
        Some(self * &inv)
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let e = e.unsigned_abs();
        if e == 0 {
            return Some(RatFunc::one());
        }
        if !has_sin(&base.num) {
            let e = u32::try_from(e).expect("exponent fits");
            let factors: Factors = base.factors.iter().map(|(f, k)| (f.clone(), k * e)).collect();
            return Some(RatFunc {
                num: base.num.pow(e),
                den: product(&factors),
                factors,
            });
        }
        let mut e = e;
        let mut acc = RatFunc::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        Some(acc)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
            factors: self.factors.clone(),
        }
    }
}

fn has_sin(p: &Poly) -> bool {
    p.contains_var_where(Var::is_sin)
}

fn product(factors: &[(Poly, u32)]) -> Poly {
    factors.iter().fold(Poly::one(), |acc, (f, e)| &acc * &f.pow(*e))
}

/// Appends the monic factor `f^e`, splitting off its monomial content.
fn push_factor(list: &mut Factors, f: Poly, e: u32) {
    if e == 0 || f.is_constant() {
        return;
    }
    let m = f.monomial_content();
    let rest = if m.is_one() {
        f
    } else {
        for (v, k) in m.factors() {
            merge(list, Poly::var(v.clone()), k * e);
        }
        f.div_mono(&m).expect("content divides")
    };
    if !rest.is_constant() {
        merge(list, rest, e);
    }
}

fn merge(list: &mut Factors, f: Poly, e: u32) {
    if let Some(slot) = list.iter_mut().find(|(g, _)| *g == f) {
        slot.1 += e;
    } else {
        list.push((f, e));
    }
}

fn exponent_in(list: &[(Poly, u32)], f: &Poly) -> u32 {
    list.iter().find(|(g, _)| g == f).map_or(0, |(_, e)| *e)
}

/// `num / Π f^e` for sin-free input with monic factors, cancelled to lowest terms.
fn from_factored(mut num: Poly, factors: Factors) -> RatFunc {
    if num.is_zero() {
        return RatFunc::zero();
    }
    let mut pending = factors;
    let mut done = Vec::new();
    while let Some((f, e)) = pending.pop() {
        let g = if num.is_constant() { Poly::one() } else { Poly::gcd(&num, &f) };
        if g.is_constant() {
            merge(&mut done, f, e);
            continue;
        }
        num = num.div_exact(&g).expect("gcd divides");
        let rest = f.div_exact(&g).expect("gcd divides");
        if !rest.is_constant() {
            pending.push((rest, 1));
        }
        if e > 1 {
            pending.push((f, e - 1));
        }
    }
    RatFunc {
        num,
        den: product(&done),
        factors: done,
    }
}

/// `δ(n / Π f_i^{e_i})` for sin-free reduced input, given `δn` and each `δf_i`.
pub(crate) fn quotient_derivative(value: &RatFunc, dn: &Poly, dfs: &[Poly]) -> RatFunc {
    let fs = &value.factors;
    let moving: Vec<usize> = (0..fs.len()).filter(|&i| !dfs[i].is_zero()).collect();
    let prod_except = |skip: Option<usize>| {
        moving
            .iter()
            .filter(|&&j| Some(j) != skip)
            .fold(Poly::one(), |acc, &j| &acc * &fs[j].0)
    };
    let mut num = dn * &prod_except(None);
    for &i in &moving {
        let c = BigRational::from_integer(BigInt::from(fs[i].1));
        num = &num - &(&(&value.num * &dfs[i]) * &prod_except(Some(i))).scale(&c);
    }
    let factors = fs
        .iter()
        .enumerate()
        .map(|(i, (f, e))| (f.clone(), if dfs[i].is_zero() { *e } else { e + 1 }))
        .collect();
    from_factored(num, factors)
}

pub(crate) fn is_sin_free(r: &RatFunc) -> bool {
    !has_sin(&r.num) && !has_sin(&r.den)
}

/// Rewrites every `sin(x)^k`, `k ≥ 2`, using `sin² = 1 − cos²`.
pub(crate) fn trig_reduce(p: &Poly) -> Poly {
    if !p.terms().any(|(m, _)| m.factors().iter().any(|(v, e)| v.is_sin() && *e >= 2)) {
        return p.clone();
    }
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let mut expanded = Poly::term(Mono::one(), c.clone());
        let mut rest = Vec::new();
        for (v, e) in m.factors() {
            if let (Var::Kernel { var, kind: KernelKind::Sin }, true) = (v, *e >= 2) {
                let cos = Poly::var(Var::Kernel {
                    var: *var,
                    kind: KernelKind::Cos,
                });
                let one_minus_cos2 = &Poly::one() - &(&cos * &cos);
                expanded = &expanded * &one_minus_cos2.pow(e / 2);
                if e % 2 == 1 {
                    rest.push((v.clone(), 1));
                }
            } else {
                rest.push((v.clone(), *e));
            }
        }
        let rest = Mono::from_factors(rest);
        out = &out + &expanded.mul_mono(&rest, &BigRational::one());
    }
    out
}

/// Replaces `s ↦ −s` for one sin kernel.
fn conjugate(p: &Poly, s: &Var) -> Poly {
    Poly::from_terms(p.terms().map(|(m, c)| {
        if m.degree(s) % 2 == 1 {
            (m.clone(), -c.clone())
        } else {
            (m.clone(), c.clone())
        }
    }))
}

fn normalize(mut num: Poly, mut den: Poly) -> RatFunc {
    debug_assert!(!den.is_zero());
    if num.is_zero() {
        return RatFunc::zero();
    }
    if has_sin(&num) || has_sin(&den) {
        num = trig_reduce(&num);
        den = trig_reduce(&den);
        while let Some(s) = den.vars().into_iter().find(Var::is_sin) {
            let conj = conjugate(&den, &s);
            num = trig_reduce(&(&num * &conj));
            den = trig_reduce(&(&den * &conj));
        }
        if num.is_zero() {
            return RatFunc::zero();
        }
    }
    let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero denominator");
    let inv = lc.recip();
    let mut factors = Vec::new();
    push_factor(&mut factors, den.scale(&inv), 1);
    from_factored(num.scale(&inv), factors)
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::poly(&self.num + &rhs.num);
        }
        if has_sin(&self.num) || has_sin(&rhs.num) {
            let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
            return normalize(num, &self.den * &rhs.den);
        }
        let mut common = self.factors.clone();
        for (f, e) in &rhs.factors {
            if let Some(slot) = common.iter_mut().find(|(g, _)| g == f) {
                slot.1 = slot.1.max(*e);
            } else {
                common.push((f.clone(), *e));
            }
        }
        let cofactor = |own: &[(Poly, u32)]| {
            common
                .iter()
                .fold(Poly::one(), |acc, (f, e)| &acc * &f.pow(e - exponent_in(own, f)))
        };
        let num = &(&self.num * &cofactor(&self.factors)) + &(&rhs.num * &cofactor(&rhs.factors));
        from_factored(num, common)
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
            factors: self.factors.clone(),
        }
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        let trig = has_sin(&self.num) || has_sin(&rhs.num);
        if self.den.is_one() && rhs.den.is_one() {
            let p = &self.num * &rhs.num;
            return RatFunc::poly(if trig { trig_reduce(&p) } else { p });
        }
        if trig {
            return normalize(&self.num * &rhs.num, &self.den * &rhs.den);
        }
        // both inputs are reduced, so only the cross pairs can share factors
        let a = from_factored(self.num.clone(), rhs.factors.clone());
        let b = from_factored(rhs.num.clone(), self.factors.clone());
        let mut factors = a.factors;
        for (f, e) in b.factors {
            merge(&mut factors, f, e);
        }
        RatFunc {
            num: &a.num * &b.num,
            den: product(&factors),
            factors,
        }
    }
}

impl std::fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?}) / ({:?})", self.num, self.den)
    }
}
