//! Generators of the polynomial rings underlying every expression.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use smallvec::SmallVec;

/// Derivative multi-index `(α₁,…,αₙ)`, one entry per independent variable.
///
/// Ordered graded first, then so that earlier variables come first among
/// indices of equal order: `u_tt < u_tx < u_xx`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(SmallVec<[u16; 4]>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[i] = 1;
        m
    }

    pub fn from_slice(exponents: &[u16]) -> Self {
        MultiIndex(SmallVec::from_slice(exponents))
    }

    /// Builds the index counting how often each variable occurs in `vars`.
    pub fn from_vars(n: usize, vars: &[usize]) -> Self {
        let mut m = Self::zero(n);
        for &v in vars {
            m.0[v] += 1;
        }
        m
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u16 {
        self.0[i]
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&e| u32::from(e)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn with_increment(&self, i: usize) -> Self {
        let mut m = self.clone();
        m.0[i] += 1;
        m
    }

    pub fn with_component(&self, i: usize, value: u16) -> Self {
        let mut m = self.clone();
        m.0[i] = value;
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self ≥ other`.
    pub fn dominates(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if !self.dominates(other) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// `β!/(α!(β−α)!)` for `self = β ≥ α`.
    pub fn binomial(&self, alpha: &Self) -> BigInt {
        self.0
            .iter()
            .zip(&alpha.0)
            .map(|(&b, &a)| binomial(u32::from(b), u32::from(a)))
            .product()
    }

    /// `|J|!/(J₁!⋯Jₙ!)`.
    pub fn multinomial(&self) -> BigInt {
        let mut total = 0u32;
        let mut acc = BigInt::one();
        for &e in &self.0 {
            total += u32::from(e);
            acc *= binomial(total, u32::from(e));
        }
        acc
    }

    /// The variable indices with multiplicity, e.g. `(1,2) ↦ [0,1,1]`.
    pub fn to_vars(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order() as usize);
        for (i, &e) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(i, e as usize));
        }
        out
    }
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.as_slice().cmp(self.0.as_slice()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KernelKind {
    Exp,
    Cos,
    Sin,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Exp => "exp",
            KernelKind::Cos => "cos",
            KernelKind::Sin => "sin",
        }
    }
}

/// A polynomial generator.
///
/// The derived ordering is the canonical generator order: independent
/// variables, jet variables by (unknown, multi-index), derivatives of function
/// symbols, transcendental kernels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Indep(u16),
    Jet { dep: u16, alpha: MultiIndex },
    /// Derivative `∂^α h` of a function symbol. For a symbol applied to an
    /// expression `h(ω)` the index has length one and holds the derivative order.
    Func { func: u16, alpha: MultiIndex },
    Kernel { var: u16, kind: KernelKind },
}

impl Var {
    pub fn jet(dep: usize, alpha: MultiIndex) -> Self {
        Var::Jet {
            dep: dep as u16,
            alpha,
        }
    }

    pub fn is_jet(&self) -> bool {
        matches!(self, Var::Jet { .. })
    }

    pub fn is_sin(&self) -> bool {
        matches!(
            self,
            Var::Kernel {
                kind: KernelKind::Sin,
                ..
            }
        )
    }
}
