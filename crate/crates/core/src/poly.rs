//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Monomials are ordered lexicographically with *later* generators more
//! significant, so iterating a polynomial in ascending order prints
//! `u_t + u*u_x + u_xxx` for the KdV left-hand side.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

use crate::var::Var;

/// Power product of generators; entries sorted by generator, exponents positive.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Mono(SmallVec<[(Var, u32); 4]>);

impl Mono {
    pub fn one() -> Self {
        Mono(SmallVec::new())
    }

    pub fn var(v: Var) -> Self {
        Self::pow(v, 1)
    }

    pub fn pow(v: Var, e: u32) -> Self {
        if e == 0 {
            return Self::one();
        }
        let mut s = SmallVec::new();
        s.push((v, e));
        Mono(s)
    }

    /// Builds a monomial from unsorted factors, merging repeated generators.
    pub fn from_factors(mut factors: Vec<(Var, u32)>) -> Self {
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: SmallVec<[(Var, u32); 4]> = SmallVec::new();
        for (v, e) in factors {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => out.push((v, e)),
            }
        }
        Mono(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self, v: &Var) -> u32 {
        match self.0.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.0[i..].iter().cloned());
        out.extend(other.0[j..].iter().cloned());
        Mono(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = SmallVec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == *v {
                let oe = other.0[j].1;
                if oe > *e {
                    return None;
                }
                if oe < *e {
                    out.push((v.clone(), e - oe));
                }
                j += 1;
            } else {
                if j < other.0.len() && other.0[j].0 < *v {
                    return None;
                }
                out.push((v.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    pub fn without(&self, v: &Var) -> Mono {
        Mono(self.0.iter().filter(|(w, _)| w != v).cloned().collect())
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Mono) -> Mono {
        let mut out = SmallVec::new();
        for (v, e) in &self.0 {
            let oe = other.degree(v);
            if oe > 0 {
                out.push((v.clone(), (*e).min(oe)));
            }
        }
        Mono(out)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.iter().map(|(v, _)| v)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.0.iter().rev();
        let mut b = other.0.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                    o => return o,
                },
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v:?}^{e}")?;
        }
        Ok(())
    }
}

/// Sparse polynomial over ℚ.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(Mono::one(), c)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(v: Var) -> Self {
        Self::term(Mono::var(v), BigRational::one())
    }

    pub fn term(m: Mono, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, BigRational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    /// The value of a constant polynomial (including zero).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &BigRational)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Mono) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for v in m.vars() {
                if !out.contains(v) {
                    out.insert(v.clone());
                }
            }
        }
        out
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.degree(v) > 0)
    }

    pub fn contains_var_where(&self, mut pred: impl FnMut(&Var) -> bool) -> bool {
        self.terms.keys().any(|m| m.vars().any(&mut pred))
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.degree(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, a)| (n.mul(m), coeff_mul(a, c)))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Coefficients with respect to one generator: `p = Σ c_k v^k`.
    pub fn coefficients_in(&self, v: &Var) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = m.degree(v);
            let rest = if d > 0 { m.without(v) } else { m.clone() };
            out.entry(d).or_default().add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coefficients_in(v: &Var, coeffs: &BTreeMap<u32, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (&d, c) in coeffs {
            let vm = Mono::pow(v.clone(), d);
            for (m, a) in &c.terms {
                out.add_term(m.mul(&vm), a.clone());
            }
        }
        out
    }

    /// Formal partial derivative with respect to a generator.
    pub fn derivative(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let d = m.degree(v);
            if d == 0 {
                continue;
            }
            let rest = m.without(v).mul(&Mono::pow(v.clone(), d - 1));
            out.add_term(rest, c * BigRational::from_integer(BigInt::from(d)));
        }
        out
    }

    /// Substitutes a polynomial for a generator.
    pub fn compose_var(&self, v: &Var, value: &Poly) -> Poly {
        let coeffs = self.coefficients_in(v);
        let mut out = Poly::zero();
        let mut power = Poly::one();
        let mut last = 0;
        for (d, c) in coeffs {
            power = &power * &value.pow(d - last);
            last = d;
            out = &out + &(&c * &power);
        }
        out
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Mono::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_mono(&self, m: &Mono) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (n, c) in &self.terms {
            terms.insert(n.div(m)?, c.clone());
        }
        Some(Poly { terms })
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "polynomial division by zero");
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if d.len() == 1 {
            let (m, c) = d.leading()?;
            return self.div_mono(m).map(|q| q.scale(&c.recip()));
        }
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.div(&dm)?;
            let qc = rc / &dc;
            for (m, c) in &d.terms {
                rem.add_term(m.mul(&qm), -(c * &qc));
            }
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Leading coefficient made one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) if !c.is_one() => self.scale(&c.recip()),
            _ => self.clone(),
        }
    }

    /// Integer coefficients with unit content and positive leading coefficient,
    /// together with the factor `f` such that `self = f · result`.
    pub fn integer_primitive(&self) -> (BigRational, Poly) {
        if self.is_zero() {
            return (BigRational::one(), Poly::zero());
        }
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
        let mut factor = BigRational::new(num, den);
        if self.leading().is_some_and(|(_, c)| c.is_negative()) {
            factor = -factor;
        }
        (factor.clone(), self.scale(&factor.recip()))
    }

    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        gcd_inner(a, b).monic()
    }
}

fn gcd_inner(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let mg_poly = Poly::term(mg, BigRational::one());
    let a = if ma.is_one() { a.clone() } else { a.div_mono(&ma).expect("content divides") };
    let b = if mb.is_one() { b.clone() } else { b.div_mono(&mb).expect("content divides") };
    if a.is_constant() || b.is_constant() {
        return mg_poly;
    }
    let va = a.vars();
    let vb = b.vars();
    // a generator of only one side: the gcd divides each of its coefficients
    if let Some(v) = va.difference(&vb).next() {
        return &mg_poly * &fold_gcd(vec![b.clone()], &a, v);
    }
    if let Some(v) = vb.difference(&va).next() {
        return &mg_poly * &fold_gcd(vec![a.clone()], &b, v);
    }
    for v in va.intersection(&vb) {
        if !may_share_in(&a, &b, v) {
            return &mg_poly * &gcd_of_coefficients(&a, &b, v);
        }
    }
    // trial division catches the common "one divides the other" case cheaply
    let (small, large) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    if large.div_exact(small).is_some() {
        return &mg_poly * small;
    }
    if let Some(g) = heuristic_gcd(&a, &b) {
        return &mg_poly * &g;
    }
    let x = va
        .iter()
        .min_by_key(|v| a.degree_in(v).max(b.degree_in(v)))
        .expect("nonconstant polynomial has a variable")
        .clone();
    let ca = content_in(&a, &x);
    let cb = content_in(&b, &x);
    let c = gcd_inner(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = primitive_prs(pa, pb, &x);
    &(&mg_poly * &c) * &g
}

/// The gcd of `a` and `b` when it is known not to involve `v`: it then
/// divides every coefficient in `v` of both.
fn gcd_of_coefficients(a: &Poly, b: &Poly, v: &Var) -> Poly {
    fold_gcd(b.coefficients_in(v).into_values().collect(), a, v)
}

/// gcd of `seed` and the coefficients of `p` in `v`, smallest first.
fn fold_gcd(mut seed: Vec<Poly>, p: &Poly, v: &Var) -> Poly {
    seed.extend(p.coefficients_in(v).into_values());
    seed.sort_by_key(Poly::len);
    let mut it = seed.into_iter();
    let mut g = it.next().unwrap_or_default();
    for c in it {
        if g.is_constant() {
            return Poly::one();
        }
        g = gcd_inner(&g, &c);
    }
    if g.is_constant() {
        Poly::one()
    } else {
        g.integer_primitive().1
    }
}

const PRIME: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(PRIME)) as u64
}

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b);
        }
        b = mul_mod(b, b);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, PRIME - 2)
}

fn int_mod(n: &BigInt) -> u64 {
    if let Some(small) = n.to_i64() {
        return small.rem_euclid(PRIME as i64) as u64;
    }
    let r = n.mod_floor(&BigInt::from(PRIME));
    r.to_u64().expect("reduced residue")
}

/// `c mod p`, or `None` when the denominator vanishes.
fn rat_mod(c: &BigRational) -> Option<u64> {
    if c.denom().is_one() {
        return Some(int_mod(c.numer()));
    }
    let d = int_mod(c.denom());
    (d != 0).then(|| mul_mod(int_mod(c.numer()), inv_mod(d)))
}

/// Dense image of `p` in `v` over 𝔽_p, the other generators evaluated by
/// `point`.
fn univariate_image(p: &Poly, v: &Var, point: &BTreeMap<&Var, u64>) -> Option<Vec<u64>> {
    let mut out = vec![0u64; p.degree_in(v) as usize + 1];
    for (m, c) in p.terms() {
        let mut val = rat_mod(c)?;
        for (w, e) in m.factors() {
            if w != v {
                val = mul_mod(val, pow_mod(point[w], u64::from(*e)));
            }
        }
        let slot = &mut out[m.degree(v) as usize];
        *slot = (*slot + val) % PRIME;
    }
    Some(out)
}

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn univariate_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = inv_mod(*b.last().expect("nonempty"));
        while a.len() >= b.len() {
            let f = mul_mod(*a.last().expect("nonempty"), inv);
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + PRIME - mul_mod(f, *c)) % PRIME;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// `false` only if the gcd of `a` and `b` certainly does not involve `v`:
/// at a point where neither leading coefficient in `v` vanishes, the gcd of
/// the images over 𝔽_p has degree at least that of the image of the true gcd.
fn may_share_in(a: &Poly, b: &Poly, v: &Var) -> bool {
    let others: BTreeSet<&Var> = a
        .terms()
        .chain(b.terms())
        .flat_map(|(m, _)| m.vars())
        .filter(|w| *w != v)
        .collect();
    let (da, db) = (a.degree_in(v) as usize, b.degree_in(v) as usize);
    for attempt in 0..3u64 {
        let point: BTreeMap<&Var, u64> = others
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let k = k as u64;
                (*w, pow_mod(3 + attempt, 17 + 5 * k) ^ (k * 0x9e37_79b9))
            })
            .map(|(w, x)| (w, x % PRIME))
            .collect();
        let (Some(ia), Some(ib)) = (univariate_image(a, v, &point), univariate_image(b, v, &point)) else {
            return true;
        };
        if ia[da] == 0 || ib[db] == 0 {
            continue;
        }
        return univariate_gcd_degree(ia, ib) > 0;
    }
    true
}

fn integer_content(p: &Poly) -> BigInt {
    p.terms().fold(BigInt::zero(), |g, (_, c)| g.gcd(c.numer()))
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms().map(|(_, c)| c.numer().abs()).max().unwrap_or_default()
}

/// `p` with `v ↦ xi`.
fn evaluate_at(p: &Poly, v: &Var, xi: &BigInt) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let e = m.degree(v);
        let val = c.numer() * Pow::pow(xi, e);
        out.add_term(m.without(v), BigRational::from_integer(val));
    }
    out
}

/// Inverse of evaluation at `xi`, reading coefficients as symmetric residues.
fn interpolate_at(mut h: Poly, v: &Var, xi: &BigInt) -> Poly {
    let half = xi / 2;
    let mut out = Poly::zero();
    let mut power = 0u32;
    while !h.is_zero() {
        let mut digit = Poly::zero();
        for (m, c) in h.terms() {
            let mut r = c.numer().mod_floor(xi);
            if r > half {
                r -= xi;
            }
            digit.add_term(m.clone(), BigRational::from_integer(r));
        }
        h = (&h - &digit).scale(&BigRational::new(BigInt::one(), xi.clone()));
        let shift = Mono::pow(v.clone(), power);
        for (m, c) in digit.terms() {
            out.add_term(m.mul(&shift), c.clone());
        }
        power += 1;
    }
    out
}

/// Heuristic gcd by evaluation at large integers and ξ-adic reconstruction;
/// every candidate is confirmed by exact division. `None` means no attempt
/// succeeded and a slower method is needed.
fn heuristic_gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    let (_, f) = a.integer_primitive();
    let (_, g) = b.integer_primitive();
    let mut vars: Vec<Var> = f.vars().union(&g.vars()).cloned().collect();
    vars.sort_by_key(|v| std::cmp::Reverse(f.degree_in(v).max(g.degree_in(v))));
    heu(&f, &g, &vars).map(|h| h.integer_primitive().1)
}

fn heu(f: &Poly, g: &Poly, vars: &[Var]) -> Option<Poly> {
    let cf = integer_content(f);
    let cg = integer_content(g);
    let c = BigRational::from_integer(cf.gcd(&cg));
    let Some((x, rest)) = vars.split_first() else {
        return Some(Poly::constant(c));
    };
    let f = f.scale(&BigRational::from_integer(cf).recip());
    let g = g.scale(&BigRational::from_integer(cg).recip());
    if !f.contains_var(x) && !g.contains_var(x) {
        return heu(&f, &g, rest).map(|h| h.scale(&c));
    }
    let mut xi = BigInt::from(2) * max_norm(&f).min(max_norm(&g)) + BigInt::from(29);
    for _ in 0..6 {
        let fe = evaluate_at(&f, x, &xi);
        let ge = evaluate_at(&g, x, &xi);
        if !fe.is_zero() && !ge.is_zero() {
            if let Some(h) = heu(&fe, &ge, rest) {
                let cand = interpolate_at(h, x, &xi);
                if !cand.is_zero() {
                    let (_, cand) = cand.integer_primitive();
                    if f.div_exact(&cand).is_some() && g.div_exact(&cand).is_some() {
                        return Some(cand.scale(&c));
                    }
                }
            }
        }
        xi = &xi * BigInt::from(73794) / BigInt::from(27011);
    }
    None
}

/// gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content_in(p: &Poly, v: &Var) -> Poly {
    let coeffs = p.coefficients_in(v);
    let mut it = coeffs.into_values();
    let mut g = it.next().unwrap_or_default();
    for c in it {
        if g.is_constant() {
            return Poly::one();
        }
        g = gcd_inner(&g, &c);
    }
    if g.is_constant() {
        Poly::one()
    } else {
        g.integer_primitive().1
    }
}

fn primitive_part_in(p: &Poly, v: &Var) -> Poly {
    let c = content_in(p, v);
    let q = p.div_exact(&c).expect("content divides");
    q.integer_primitive().1
}

fn pseudo_rem(a: &Poly, b: &Poly, v: &Var) -> Poly {
    let n = b.degree_in(v);
    let b_coeffs = b.coefficients_in(v);
    let lb = b_coeffs.get(&n).cloned().unwrap_or_default();
    let mut r = a.clone();
    loop {
        if r.is_zero() {
            return r;
        }
        let dr = r.degree_in(v);
        if dr < n {
            return r;
        }
        let lr = r.coefficients_in(v).remove(&dr).unwrap_or_default();
        let shift = Poly::var(v.clone()).pow(dr - n);
        r = &(&lb * &r) - &(&(&lr * &shift) * b);
    }
}

fn primitive_prs(mut a: Poly, mut b: Poly, v: &Var) -> Poly {
    if a.degree_in(v) < b.degree_in(v) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let r = pseudo_rem(&a, &b, v);
        if r.is_zero() {
            return primitive_part_in(&b, v);
        }
        if r.degree_in(v) == 0 {
            return Poly::one();
        }
        a = b;
        b = primitive_part_in(&r, v);
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

fn coeff_mul(a: &BigRational, b: &BigRational) -> BigRational {
    if a.denom().is_one() && b.denom().is_one() {
        BigRational::from_integer(a.numer() * b.numer())
    } else {
        a * b
    }
}

/// Integer coefficients `c·lcm(denominators)` when they fit in `i64`.
fn scaled_ints(p: &Poly) -> Option<(Vec<i64>, BigInt)> {
    let l = p.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let out = p
        .terms
        .values()
        .map(|c| (c.numer() * (&l / c.denom())).to_i64())
        .collect::<Option<Vec<i64>>>()?;
    Some((out, l))
}

/// Exponent vectors packed one byte per generator, the most significant
/// generator in the high byte, so that key order is monomial order and
/// key addition is monomial multiplication.
fn packed_mul(a: &Poly, b: &Poly) -> Option<Poly> {
    let mut vars: Vec<&Var> = a.terms.keys().chain(b.terms.keys()).flat_map(|m| m.0.iter().map(|(v, _)| v)).collect();
    vars.sort_unstable();
    vars.dedup();
    if vars.len() > 16 {
        return None;
    }
    let pack = |p: &Poly| -> Option<(Vec<u128>, [u32; 16])> {
        let mut top = [0u32; 16];
        let keys = p
            .terms
            .keys()
            .map(|m| {
                let mut k = 0u128;
                for (v, e) in &m.0 {
                    let i = vars.binary_search(&v).expect("collected");
                    top[i] = top[i].max(*e);
                    k += u128::from(*e) << (8 * i);
                }
                k
            })
            .collect();
        Some((keys, top))
    };
    let (ka, ta) = pack(a)?;
    let (kb, tb) = pack(b)?;
    if ta.iter().zip(&tb).any(|(x, y)| x + y > 255) {
        return None;
    }
    let (ca, la) = scaled_ints(a)?;
    let (cb, lb) = scaled_ints(b)?;
    let bits = |c: &[i64]| c.iter().map(|x| 64 - x.unsigned_abs().leading_zeros()).max().unwrap_or(0);
    let n = ka.len() * kb.len();
    if bits(&ca) + bits(&cb) + (usize::BITS - n.leading_zeros()) > 126 {
        return None;
    }
    let mut prods: Vec<(u128, i128)> = Vec::with_capacity(n);
    for (x, cx) in ka.iter().zip(&ca) {
        for (y, cy) in kb.iter().zip(&cb) {
            prods.push((x + y, i128::from(*cx) * i128::from(*cy)));
        }
    }
    prods.sort_unstable_by_key(|p| p.0);
    let scale = la * lb;
    let mut terms = BTreeMap::new();
    let mut i = 0;
    while i < prods.len() {
        let key = prods[i].0;
        let mut c = 0i128;
        while i < prods.len() && prods[i].0 == key {
            c += prods[i].1;
            i += 1;
        }
        if c == 0 {
            continue;
        }
        let mono = Mono(
            (0..vars.len())
                .filter_map(|j| {
                    let e = ((key >> (8 * j)) & 0xff) as u32;
                    (e > 0).then(|| (vars[j].clone(), e))
                })
                .collect(),
        );
        terms.insert(mono, BigRational::new(BigInt::from(c), scale.clone()));
    }
    Some(Poly { terms })
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().expect("one term");
            return rhs.mul_mono(m, c);
        }
        if rhs.terms.len() == 1 {
            let (m, c) = rhs.terms.iter().next().expect("one term");
            return self.mul_mono(m, c);
        }
        if let Some(p) = packed_mul(self, rhs) {
            return p;
        }
        let mut prods = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                prods.push((ma.mul(mb), coeff_mul(ca, cb)));
            }
        }
        prods.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Mono, BigRational)> = Vec::with_capacity(prods.len());
        for (m, c) in prods {
            match merged.last_mut() {
                Some(last) if last.0 == m => last.1 += c,
                _ => {
                    if merged.last().is_some_and(|l| l.1.is_zero()) {
                        merged.pop();
                    }
                    merged.push((m, c));
                }
            }
        }
        if merged.last().is_some_and(|l| l.1.is_zero()) {
            merged.pop();
        }
        Poly {
            terms: merged.into_iter().collect(),
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{m:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::MultiIndex;

    fn x(i: u16) -> Poly {
        Poly::var(Var::Indep(i))
    }

    fn jet(k: u16) -> Poly {
        Poly::var(Var::jet(0, MultiIndex::from_slice(&[k])))
    }

    #[test]
    fn monomial_order_is_multiplicative() {
        let a = Mono::var(Var::Indep(0));
        let b = Mono::var(Var::Indep(1));
        let c = Mono::pow(Var::Indep(0), 3);
        assert!(a < b);
        assert!(c < b);
        assert!(a.mul(&b) > c.mul(&a));
        assert_eq!(a.mul(&b).div(&b), Some(a.clone()));
        assert_eq!(a.div(&b), None);
    }

    #[test]
    fn exact_division() {
        let p = &(&x(0) + &x(1)) * &(&x(0) - &jet(2));
        let q = &x(0) + &x(1);
        assert_eq!(p.div_exact(&q), Some(&x(0) - &jet(2)));
        assert_eq!(p.div_exact(&(&x(0) + &Poly::one())), None);
    }

    #[test]
    fn gcd_of_products() {
        let f = &(&x(0) * &jet(1)) - &Poly::from_int(2);
        let g = &jet(2) + &x(1);
        let h = &x(0) + &jet(1);
        let a = &(&f * &g) * &h;
        let b = &(&f * &h) * &(&x(1) - &Poly::one());
        let expect = (&f * &h).monic();
        assert_eq!(Poly::gcd(&a, &b), expect);
        assert_eq!(Poly::gcd(&g, &h), Poly::one());
    }

    #[test]
    fn gcd_with_monomial_content() {
        let a = &(&x(0) * &x(0)) * &jet(1);
        let b = &(&x(0) * &jet(1)) * &(&jet(1) + &Poly::one());
        assert_eq!(Poly::gcd(&a, &b), &x(0) * &jet(1));
    }
}
