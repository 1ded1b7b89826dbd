//! Naive polynomial differential algebra, written independently of the engine
//! for cross-checking: polynomials in x_i and u_α over ℚ, total derivatives
//! by the chain rule and the Euler operator by repeated differentiation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sym {
    X(usize),
    U(Vec<u16>),
}

type Term = BTreeMap<Sym, u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Naive {
    n: usize,
    terms: BTreeMap<Term, BigRational>,
}

fn q(c: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(c))
}

impl Naive {
    pub fn zero(n: usize) -> Self {
        Naive { n, terms: BTreeMap::new() }
    }

    pub fn int(n: usize, c: i64) -> Self {
        Self::ratio(n, c, 1)
    }

    pub fn ratio(n: usize, p: i64, d: i64) -> Self {
        let mut out = Self::zero(n);
        out.insert(Term::new(), BigRational::new(BigInt::from(p), BigInt::from(d)));
        out
    }

    pub fn sym(n: usize, s: Sym) -> Self {
        let mut out = Self::zero(n);
        out.insert(Term::from([(s, 1)]), BigRational::one());
        out
    }

    pub fn x(n: usize, i: usize) -> Self {
        Self::sym(n, Sym::X(i))
    }

    /// `u` differentiated once in each listed variable.
    pub fn u(n: usize, vars: &[usize]) -> Self {
        let mut alpha = vec![0u16; n];
        for &i in vars {
            alpha[i] += 1;
        }
        Self::sym(n, Sym::U(alpha))
    }

    fn insert(&mut self, m: Term, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Naive) -> Naive {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Naive) -> Naive {
        self.add(&o.scale(-1))
    }

    pub fn scale(&self, c: i64) -> Naive {
        self.scale_q(&q(c))
    }

    pub fn scale_q(&self, c: &BigRational) -> Naive {
        let mut out = Self::zero(self.n);
        for (m, v) in &self.terms {
            out.insert(m.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, o: &Naive) -> Naive {
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let mut m = a.clone();
                for (s, e) in b {
                    *m.entry(s.clone()).or_insert(0) += e;
                }
                out.insert(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Naive {
        (0..k).fold(Self::int(self.n, 1), |acc, _| acc.mul(self))
    }

    pub fn partial(&self, s: &Sym) -> Naive {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            if let Some(&e) = m.get(s) {
                let mut m2 = m.clone();
                if e == 1 {
                    m2.remove(s);
                } else {
                    m2.insert(s.clone(), e - 1);
                }
                out.insert(m2, c * q(i64::from(e)));
            }
        }
        out
    }

    pub fn syms(&self) -> Vec<Sym> {
        let mut all: Vec<Sym> = self.terms.keys().flat_map(|m| m.keys().cloned()).collect();
        all.sort();
        all.dedup();
        all
    }

    /// Total derivative in `x_i`.
    pub fn d(&self, i: usize) -> Naive {
        let mut out = Self::zero(self.n);
        for s in self.syms() {
            let image = match &s {
                Sym::X(j) if *j == i => Self::int(self.n, 1),
                Sym::X(_) => continue,
                Sym::U(alpha) => {
                    let mut a = alpha.clone();
                    a[i] += 1;
                    Self::sym(self.n, Sym::U(a))
                }
            };
            out = out.add(&self.partial(&s).mul(&image));
        }
        out
    }

    pub fn dn(&self, vars: &[usize]) -> Naive {
        vars.iter().fold(self.clone(), |acc, &i| acc.d(i))
    }

    pub fn euler(&self) -> Naive {
        let mut out = Self::zero(self.n);
        for s in self.syms() {
            let Sym::U(alpha) = &s else { continue };
            let mut term = self.partial(&s);
            let mut order = 0;
            for (i, &k) in alpha.iter().enumerate() {
                for _ in 0..k {
                    term = term.d(i);
                    order += 1;
                }
            }
            out = out.add(&if order % 2 == 1 { term.scale(-1) } else { term });
        }
        out
    }

    /// Text in the engine's expression grammar.
    pub fn render(&self, names: &[&str], dep: &str) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            } else if c.is_negative() {
                s.push('-');
            }
            write!(s, "({})", c.abs()).unwrap();
            for (sym, e) in m {
                let base = match sym {
                    Sym::X(i) => names[*i].to_string(),
                    Sym::U(alpha) if alpha.iter().all(|&a| a == 0) => dep.to_string(),
                    Sym::U(alpha) => {
                        let mut b = format!("{dep}_");
                        for (i, &a) in alpha.iter().enumerate() {
                            for _ in 0..a {
                                b.push_str(names[i]);
                            }
                        }
                        b
                    }
                };
                write!(s, "*{base}^{e}").unwrap();
            }
        }
        s
    }

    /// Coefficient vector over monomials.
    pub fn coefficients(&self) -> impl Iterator<Item = (String, &BigRational)> + '_ {
        self.terms.iter().map(|(m, c)| (format!("{m:?}"), c))
    }
}

/// Null space of a rational matrix, one basis vector per free column.
pub fn null_space(rows: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); cols];
            v[free] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}
