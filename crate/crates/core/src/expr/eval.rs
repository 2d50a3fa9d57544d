//! Pointwise evaluation of expressions on sampled fields.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{Expr, ExprError, FieldSymbol, RHO_FLOOR};

/// Physical constants and named model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    hbar: f64,
    m: f64,
    values: BTreeMap<String, f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params { hbar: 1.0, m: 1.0, values: BTreeMap::new() }
    }
}

impl Params {
    pub fn new(hbar: f64, m: f64) -> Result<Self, ExprError> {
        let p = Params { hbar, m, values: BTreeMap::new() };
        p.validate()?;
        Ok(p)
    }

    /// `hbar > 0`, `m > 0`, every value finite.
    pub fn validate(&self) -> Result<(), ExprError> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(ExprError::InvalidConstant("hbar".into()));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(ExprError::InvalidConstant("m".into()));
        }
        if let Some((name, _)) = self.values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ExprError::InvalidConstant(name.clone()));
        }
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Binds a model parameter. `hbar` and `m` are routed to the constants.
    pub fn set(&mut self, name: &str, value: f64) {
        match name {
            "hbar" => self.hbar = value,
            "m" => self.m = value,
            _ => {
                self.values.insert(name.to_string(), value);
            }
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "hbar" => Some(self.hbar),
            "m" => Some(self.m),
            _ => self.values.get(name).copied(),
        }
    }

    pub fn named(&self) -> &BTreeMap<String, f64> {
        &self.values
    }
}

/// Grid samples of `ρ_n` and `S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    len: usize,
    data: BTreeMap<FieldSymbol, Vec<f64>>,
    pub rho_floor: f64,
}

impl FieldSamples {
    pub fn new(len: usize) -> Self {
        FieldSamples { len, data: BTreeMap::new(), rho_floor: RHO_FLOOR }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, sym: FieldSymbol, samples: Vec<f64>) -> Result<(), ExprError> {
        if samples.len() != self.len {
            return Err(ExprError::LengthMismatch);
        }
        self.data.insert(sym, samples);
        Ok(())
    }

    pub fn with(mut self, sym: FieldSymbol, samples: Vec<f64>) -> Result<Self, ExprError> {
        self.insert(sym, samples)?;
        Ok(self)
    }

    pub fn get(&self, sym: FieldSymbol) -> Option<&[f64]> {
        self.data.get(&sym).map(Vec::as_slice)
    }

    fn require(&self, sym: FieldSymbol) -> Result<&[f64], ExprError> {
        self.get(sym).ok_or_else(|| ExprError::MissingFieldSamples(sym.to_string()))
    }
}

/// Periodic antiderivative used for `int(...)` factors.
pub trait Antiderivative {
    fn antiderivative(&self, f: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coeff: f64,
    fields: Vec<(FieldSymbol, i32)>,
    logs: Vec<(FieldSymbol, u32)>,
    integrals: Vec<(CompiledExpr, u32)>,
}

/// An expression with parameters bound and coefficients converted to `f64`.
/// Compile once, evaluate many times.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    terms: Vec<CompiledTerm>,
    singular: bool,
    symbols: Vec<FieldSymbol>,
}

impl CompiledExpr {
    pub fn new(e: &Expr, params: &Params) -> Result<Self, ExprError> {
        let mut terms = Vec::with_capacity(e.len());
        for (key, coeff) in e.terms() {
            let mut c = coeff.to_f64().unwrap_or(f64::NAN);
            for (name, &k) in &key.params {
                let v = params.get(name).ok_or_else(|| ExprError::UnboundParameter(name.clone()))?;
                c *= v.powi(k);
            }
            let integrals = key
                .integrals
                .iter()
                .map(|(i, &k)| Ok((CompiledExpr::new(i, params)?, k)))
                .collect::<Result<Vec<_>, ExprError>>()?;
            terms.push(CompiledTerm {
                coeff: c,
                fields: key.fields.iter().map(|(s, &k)| (*s, k)).collect(),
                logs: key.logs.iter().map(|(s, &k)| (*s, k)).collect(),
                integrals,
            });
        }
        Ok(CompiledExpr { terms, singular: e.singular_at_vacuum(), symbols: e.symbols() })
    }

    /// Field symbols the expression needs samples for.
    pub fn symbols(&self) -> &[FieldSymbol] {
        &self.symbols
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(
        &self,
        f: &FieldSamples,
        quadrature: Option<&dyn Antiderivative>,
    ) -> Result<Vec<f64>, ExprError> {
        let n = f.len();
        if self.singular {
            let rho = f.require(FieldSymbol::rho(0))?;
            let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
            if !(min >= f.rho_floor) {
                return Err(ExprError::VacuumDensity { min, floor: f.rho_floor });
            }
        }
        let mut out = vec![0.0; n];
        let mut factor = vec![0.0; n];
        for term in &self.terms {
            factor.iter_mut().for_each(|v| *v = term.coeff);
            for &(sym, k) in &term.fields {
                let s = f.require(sym)?;
                match k {
                    1 => factor.iter_mut().zip(s).for_each(|(v, x)| *v *= x),
                    -1 => factor.iter_mut().zip(s).for_each(|(v, x)| *v /= x),
                    _ => factor.iter_mut().zip(s).for_each(|(v, x)| *v *= x.powi(k)),
                }
            }
            for &(sym, k) in &term.logs {
                let s = f.require(sym)?;
                if s.iter().any(|&x| !(x > 0.0)) {
                    return Err(ExprError::LogDomain(sym.to_string()));
                }
                factor.iter_mut().zip(s).for_each(|(v, x)| *v *= x.ln().powi(k as i32));
            }
            for (integrand, k) in &term.integrals {
                let q = quadrature.ok_or(ExprError::NoQuadrature)?;
                let inner = q.antiderivative(&integrand.eval(f, Some(q))?);
                factor.iter_mut().zip(&inner).for_each(|(v, x)| *v *= x.powi(*k as i32));
            }
            out.iter_mut().zip(&factor).for_each(|(o, v)| *o += v);
        }
        Ok(out)
    }
}

/// Evaluates `e` pointwise. Fails on `int(...)` factors; use
/// [`eval_on_grid_with`] to supply a quadrature.
pub fn eval_on_grid(e: &Expr, f: &FieldSamples, p: &Params) -> Result<Vec<f64>, ExprError> {
    CompiledExpr::new(e, p)?.eval(f, None)
}

pub fn eval_on_grid_with(
    e: &Expr,
    f: &FieldSamples,
    p: &Params,
    quadrature: &dyn Antiderivative,
) -> Result<Vec<f64>, ExprError> {
    CompiledExpr::new(e, p)?.eval(f, Some(quadrature))
}
