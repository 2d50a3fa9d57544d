//! Exact symbolic expressions over hydrodynamic field symbols.
//!
//! An [`Expr`] is kept permanently in normal form: a sum of monomials, each a
//! product of an exact rational coefficient, integer powers of named
//! parameters, integer (possibly negative) powers of field symbols `ρ_n` and
//! `S_n`, logarithms of field symbols, and opaque spatial antiderivatives
//! (`int(...)`). Monomials live in a `BTreeMap` keyed by their non-coefficient
//! part, so two expressions are equal exactly when their normal forms agree.

mod calculus;
mod eval;
mod parse;
mod print;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use eval::{eval_on_grid, eval_on_grid_with, Antiderivative, CompiledExpr, FieldSamples, Params};
pub use calculus::{dx, partial};
pub use parse::{parse_expr, parse_potential};

/// Highest spatial derivative order a field symbol may carry.
pub const MAX_ORDER: u8 = 8;

/// Default lower bound on the density below which `1/ρ` and `log ρ` refuse to
/// evaluate.
pub const RHO_FLOOR: f64 = 1e-8;

/// The two hydrodynamic fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Rho,
    S,
}

/// `ρ_n` or `S_n`: the n-th spatial derivative of a hydrodynamic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldSymbol {
    pub base: Base,
    pub order: u8,
}

impl FieldSymbol {
    pub fn new(base: Base, order: u8) -> Result<Self, ExprError> {
        if order > MAX_ORDER {
            return Err(ExprError::MaxOrderExceeded { order: order as usize });
        }
        Ok(FieldSymbol { base, order })
    }

    pub const fn rho(order: u8) -> Self {
        FieldSymbol { base: Base::Rho, order }
    }

    pub const fn s(order: u8) -> Self {
        FieldSymbol { base: Base::S, order }
    }

    /// The symbol one derivative higher.
    pub fn next(self) -> Result<Self, ExprError> {
        FieldSymbol::new(self.base, self.order + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("non-integer exponent at position {position}")]
    NonIntegerExponent { position: usize },
    #[error("unknown function `{name}` at position {position}")]
    UnknownFunction { name: String, position: usize },
    #[error("division by a non-monomial expression at position {position}")]
    NonMonomialDivisor { position: usize },
    #[error("derivative order {order} exceeds the maximum of {MAX_ORDER}")]
    MaxOrderExceeded { order: usize },
    #[error("expression contains an integral node")]
    IntegralNodePresent,
    #[error("cannot raise a sum or a transcendental factor to a negative power")]
    NonInvertible,
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("missing field samples for {0}")]
    MissingFieldSamples(String),
    #[error("density falls below the floor ({min:e} < {floor:e})")]
    VacuumDensity { min: f64, floor: f64 },
    #[error("log of a non-positive value of {0}")]
    LogDomain(String),
    #[error("integral node requires a quadrature rule")]
    NoQuadrature,
    #[error("`{0}` must be finite (and positive for hbar, m)")]
    InvalidConstant(String),
    #[error("field sample arrays have inconsistent lengths")]
    LengthMismatch,
}

/// The non-coefficient part of a monomial. The derived ordering is the
/// normal-form order: parameters lexicographically, then field symbols
/// (`ρ` before `S`, then by derivative order), then logs, then integrals.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub params: BTreeMap<String, i32>,
    pub fields: BTreeMap<FieldSymbol, i32>,
    pub logs: BTreeMap<FieldSymbol, u32>,
    pub integrals: BTreeMap<Expr, u32>,
}

impl Key {
    fn is_unit(&self) -> bool {
        self.params.is_empty()
            && self.fields.is_empty()
            && self.logs.is_empty()
            && self.integrals.is_empty()
    }

    fn mul(&self, other: &Key) -> Key {
        let mut out = self.clone();
        for (p, k) in &other.params {
            bump(&mut out.params, p.clone(), *k);
        }
        for (f, k) in &other.fields {
            bump(&mut out.fields, *f, *k);
        }
        for (f, k) in &other.logs {
            *out.logs.entry(*f).or_insert(0) += k;
        }
        for (e, k) in &other.integrals {
            *out.integrals.entry(e.clone()).or_insert(0) += k;
        }
        out
    }
}

fn bump<K: Ord>(map: &mut BTreeMap<K, i32>, key: K, by: i32) {
    let entry = map.entry(key);
    use std::collections::btree_map::Entry;
    match entry {
        Entry::Occupied(mut o) => {
            *o.get_mut() += by;
            if *o.get() == 0 {
                o.remove();
            }
        }
        Entry::Vacant(v) => {
            if by != 0 {
                v.insert(by);
            }
        }
    }
}

/// A single term: `coeff * key`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: BigRational,
    pub key: Key,
}

/// Symbolic expression in normal form.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: BTreeMap<Key, BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Expr::monomial(c, Key::default())
    }

    pub fn int(c: i64) -> Self {
        Expr::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Expr::constant(rational(num, den))
    }

    pub fn monomial(coeff: BigRational, key: Key) -> Self {
        let mut e = Expr::zero();
        e.add_term(key, coeff);
        e
    }

    pub fn field(sym: FieldSymbol) -> Self {
        Expr::field_pow(sym, 1)
    }

    pub fn field_pow(sym: FieldSymbol, power: i32) -> Self {
        let mut key = Key::default();
        bump(&mut key.fields, sym, power);
        Expr::monomial(BigRational::one(), key)
    }

    pub fn rho(order: u8) -> Self {
        Expr::field(FieldSymbol::rho(order))
    }

    pub fn s(order: u8) -> Self {
        Expr::field(FieldSymbol::s(order))
    }

    pub fn param(name: &str) -> Self {
        Expr::param_pow(name, 1)
    }

    pub fn param_pow(name: &str, power: i32) -> Self {
        let mut key = Key::default();
        bump(&mut key.params, name.to_string(), power);
        Expr::monomial(BigRational::one(), key)
    }

    pub fn log(sym: FieldSymbol) -> Self {
        let mut key = Key::default();
        key.logs.insert(sym, 1);
        Expr::monomial(BigRational::one(), key)
    }

    /// Opaque spatial antiderivative `int(integrand)`.
    pub fn integral(integrand: Expr) -> Self {
        if integrand.is_zero() {
            return Expr::zero();
        }
        let mut key = Key::default();
        key.integrals.insert(integrand, 1);
        Expr::monomial(BigRational::one(), key)
    }

    pub(crate) fn add_term(&mut self, key: Key, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Occupied(mut o) => {
                let sum = o.get() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials in the normal form.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &BigRational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms.iter().map(|(k, c)| Monomial { coeff: c.clone(), key: k.clone() })
    }

    /// Structural equality of normal forms.
    pub fn equivalent(&self, other: &Expr) -> bool {
        self == other
    }

    /// Rebuilds the normal form from its own monomials. Always the identity on
    /// values produced by this module.
    pub fn normalize(&self) -> Expr {
        let mut out = Expr::zero();
        for (k, c) in &self.terms {
            let mut key = Key::default();
            for (p, e) in &k.params {
                bump(&mut key.params, p.clone(), *e);
            }
            for (f, e) in &k.fields {
                bump(&mut key.fields, *f, *e);
            }
            for (f, e) in &k.logs {
                if *e > 0 {
                    key.logs.insert(*f, *e);
                }
            }
            for (i, e) in &k.integrals {
                if *e > 0 {
                    key.integrals.insert(i.normalize(), *e);
                }
            }
            out.add_term(key, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    /// Integer power. Negative powers are only defined for a single monomial
    /// free of logs and integrals.
    pub fn pow(&self, n: i32) -> Result<Expr, ExprError> {
        if n >= 0 {
            let mut acc = Expr::one();
            let mut base = self.clone();
            let mut k = n as u32;
            while k > 0 {
                if k & 1 == 1 {
                    acc = &acc * &base;
                }
                k >>= 1;
                if k > 0 {
                    base = &base * &base;
                }
            }
            return Ok(acc);
        }
        let inv = self.reciprocal()?;
        inv.pow(-n)
    }

    /// `1/self` for a single Laurent monomial.
    pub fn reciprocal(&self) -> Result<Expr, ExprError> {
        let (key, coeff) = match self.as_single_term() {
            Some(t) => t,
            None => return Err(ExprError::NonInvertible),
        };
        if !key.logs.is_empty() || !key.integrals.is_empty() {
            return Err(ExprError::NonInvertible);
        }
        let mut inv = Key::default();
        for (p, e) in &key.params {
            inv.params.insert(p.clone(), -e);
        }
        for (f, e) in &key.fields {
            inv.fields.insert(*f, -e);
        }
        Ok(Expr::monomial(coeff.recip(), inv))
    }

    fn as_single_term(&self) -> Option<(&Key, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// The rational value if the expression is a pure number.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next()?;
                k.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// True if no field symbol occurs (parameters and numbers only).
    pub fn is_field_free(&self) -> bool {
        self.terms.keys().all(|k| k.fields.is_empty() && k.logs.is_empty() && k.integrals.is_empty())
    }

    pub fn has_integral(&self) -> bool {
        self.terms.keys().any(|k| !k.integrals.is_empty())
    }

    pub fn has_log(&self) -> bool {
        self.terms
            .keys()
            .any(|k| !k.logs.is_empty() || k.integrals.keys().any(Expr::has_log))
    }

    /// A Laurent polynomial: no logs, no integrals.
    pub fn is_laurent(&self) -> bool {
        self.terms.keys().all(|k| k.logs.is_empty() && k.integrals.is_empty())
    }

    /// Does `sym` occur anywhere (including inside logs and integrands)?
    pub fn contains(&self, sym: FieldSymbol) -> bool {
        self.terms.keys().any(|k| {
            k.fields.contains_key(&sym)
                || k.logs.contains_key(&sym)
                || k.integrals.keys().any(|i| i.contains(sym))
        })
    }

    /// Every field symbol occurring in the expression, including inside logs
    /// and integrands.
    pub fn symbols(&self) -> Vec<FieldSymbol> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out.into_iter().collect()
    }

    fn collect_symbols(&self, out: &mut std::collections::BTreeSet<FieldSymbol>) {
        for k in self.terms.keys() {
            out.extend(k.fields.keys().copied());
            out.extend(k.logs.keys().copied());
            for i in k.integrals.keys() {
                i.collect_symbols(out);
            }
        }
    }

    /// Parameter names referenced, `hbar` and `m` included.
    pub fn parameters(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_params(&mut out);
        out.into_iter().collect()
    }

    fn collect_params(&self, out: &mut std::collections::BTreeSet<String>) {
        for k in self.terms.keys() {
            out.extend(k.params.keys().cloned());
            for i in k.integrals.keys() {
                i.collect_params(out);
            }
        }
    }

    /// True if `ρ_0` appears with a negative power or inside a log, i.e. the
    /// expression is singular at vacuum.
    pub fn singular_at_vacuum(&self) -> bool {
        let rho = FieldSymbol::rho(0);
        self.terms.keys().any(|k| {
            k.fields.get(&rho).is_some_and(|&p| p < 0)
                || k.logs.contains_key(&rho)
                || k.integrals.keys().any(Expr::singular_at_vacuum)
        })
    }

    /// Highest `ρ` derivative order and highest `S` derivative order.
    pub fn max_order(&self) -> (u8, u8) {
        self.symbols().into_iter().fold((0, 0), |(r, s), sym| match sym.base {
            Base::Rho => (r.max(sym.order), s),
            Base::S => (r, s.max(sym.order)),
        })
    }
}

/// `(highest ρ order, highest S order)` of `e`.
pub fn max_order(e: &Expr) -> (u8, u8) {
    e.max_order()
}

/// Structural equality of normal forms.
pub fn equivalent(a: &Expr, b: &Expr) -> bool {
    a.equivalent(b)
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.add_term(ka.mul(kb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |acc, e| &acc + &e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::to_dsl(self))
    }
}

impl fmt::Display for FieldSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.base {
            Base::Rho => "rho",
            Base::S => "S",
        };
        if self.order == 0 {
            f.write_str(name)
        } else {
            write!(f, "{}_{}", name, self.order)
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_identity_square_of_sum() {
        let a = Expr::rho(1);
        let b = Expr::s(2);
        let lhs = (&a + &b).pow(2).unwrap();
        let rhs = &(&a * &a) + &(&(&Expr::int(2) * &a) * &b) + (&b * &b);
        assert!(equivalent(&lhs, &rhs));
    }

    #[test]
    fn commutativity_and_distinctness() {
        let x = Expr::rho(1) * Expr::s(1);
        let y = Expr::s(1) * Expr::rho(1);
        assert!(equivalent(&x, &y));
        let z = Expr::rho(0) * Expr::s(2);
        assert!(!equivalent(&x, &z));
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Expr::rho(0) * Expr::param("D");
        assert!((&x - &x).is_zero());
        let inv = Expr::rho(0).reciprocal().unwrap();
        assert!(equivalent(&(Expr::rho(0) * inv), &Expr::one()));
    }

    #[test]
    fn reciprocal_of_sum_rejected() {
        let e = Expr::rho(0) + Expr::one();
        assert_eq!(e.reciprocal(), Err(ExprError::NonInvertible));
        assert_eq!(e.pow(-1), Err(ExprError::NonInvertible));
    }

    #[test]
    fn order_bound() {
        assert!(FieldSymbol::new(Base::Rho, MAX_ORDER).is_ok());
        assert_eq!(
            FieldSymbol::new(Base::S, MAX_ORDER + 1),
            Err(ExprError::MaxOrderExceeded { order: 9 })
        );
    }

    #[test]
    fn max_order_of_constant() {
        assert_eq!(max_order(&Expr::int(7)), (0, 0));
    }
}
