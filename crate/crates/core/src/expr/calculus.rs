//! Partial derivatives with respect to a single field symbol and the total
//! spatial derivative.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{bump, Expr, ExprError, FieldSymbol};

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

impl Expr {
    /// Power-rule partial derivative with respect to `sym`, every other symbol
    /// held fixed.
    pub fn partial(&self, sym: FieldSymbol) -> Result<Expr, ExprError> {
        if self.has_integral() {
            return Err(ExprError::IntegralNodePresent);
        }
        let mut out = Expr::zero();
        for (key, coeff) in self.terms() {
            if let Some(&p) = key.fields.get(&sym) {
                let mut k = key.clone();
                bump(&mut k.fields, sym, -1);
                out.add_term(k, coeff * int(p as i64));
            }
            if let Some(&l) = key.logs.get(&sym) {
                // d/da log(a)^l = l log(a)^(l-1) / a
                let mut k = key.clone();
                if l == 1 {
                    k.logs.remove(&sym);
                } else {
                    k.logs.insert(sym, l - 1);
                }
                bump(&mut k.fields, sym, -1);
                out.add_term(k, coeff * int(l as i64));
            }
        }
        Ok(out)
    }

    /// Total derivative `d/dx`, applying the chain rule to every field symbol
    /// (`a_n` contributes `a_{n+1} ∂e/∂a_n`) and `d/dx int(f) = f`.
    pub fn dx(&self) -> Result<Expr, ExprError> {
        let mut out = Expr::zero();
        for (key, coeff) in self.terms() {
            for (&sym, &p) in &key.fields {
                let next = sym.next()?;
                let mut k = key.clone();
                bump(&mut k.fields, sym, -1);
                bump(&mut k.fields, next, 1);
                out.add_term(k, coeff * int(p as i64));
            }
            for (&sym, &l) in &key.logs {
                let next = sym.next()?;
                let mut k = key.clone();
                if l == 1 {
                    k.logs.remove(&sym);
                } else {
                    k.logs.insert(sym, l - 1);
                }
                bump(&mut k.fields, sym, -1);
                bump(&mut k.fields, next, 1);
                out.add_term(k, coeff * int(l as i64));
            }
            for (integrand, &l) in &key.integrals {
                let mut k = key.clone();
                if l == 1 {
                    k.integrals.remove(integrand);
                } else {
                    k.integrals.insert(integrand.clone(), l - 1);
                }
                let rest = Expr::monomial(coeff * int(l as i64), k);
                out = &out + &(&rest * integrand);
            }
        }
        Ok(out)
    }

    /// `d^n/dx^n`.
    pub fn dx_n(&self, n: usize) -> Result<Expr, ExprError> {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.dx()?;
        }
        Ok(e)
    }
}

/// Free-function form of [`Expr::partial`].
pub fn partial(e: &Expr, sym: FieldSymbol) -> Result<Expr, ExprError> {
    e.partial(sym)
}

/// Free-function form of [`Expr::dx`].
pub fn dx(e: &Expr) -> Result<Expr, ExprError> {
    e.dx()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, parse_potential, MAX_ORDER};

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn partial_of_eip_potential() {
        let u = parse_potential("kappa*(S_1*rho)^2/(2*m)").unwrap();
        let d = u.partial(FieldSymbol::s(1)).unwrap();
        assert_eq!(d, p("kappa/m*rho^2*S_1"));
    }

    #[test]
    fn partial_of_dg_potential() {
        let u = parse_potential("D/2*(rho_1*S_1 - rho*S_2)").unwrap();
        assert!(u.partial(FieldSymbol::rho(2)).unwrap().is_zero());
        assert_eq!(u.partial(FieldSymbol::s(2)).unwrap(), p("-D/2*rho"));
    }

    #[test]
    fn partial_rejects_integrals() {
        let e = Expr::integral(Expr::rho(0));
        assert_eq!(e.partial(FieldSymbol::rho(0)), Err(ExprError::IntegralNodePresent));
    }

    #[test]
    fn dx_examples() {
        assert_eq!(p("rho^2").dx().unwrap(), p("2*rho*rho_1"));
        assert_eq!(p("rho_1*S_1").dx().unwrap(), p("rho_2*S_1 + rho_1*S_2"));
        assert_eq!(p("log(rho)").dx().unwrap(), p("rho_1/rho"));
        assert_eq!(p("1/rho").dx().unwrap(), p("-rho_1/rho^2"));
    }

    #[test]
    fn dx_of_integral_is_integrand() {
        let f = p("rho*S_1");
        assert_eq!(Expr::integral(f.clone()).dx().unwrap(), f);
        let sq = Expr::integral(f.clone()).pow(2).unwrap();
        assert_eq!(sq.dx().unwrap(), &(&Expr::int(2) * &Expr::integral(f.clone())) * &f);
    }

    #[test]
    fn dx_order_overflow() {
        let e = Expr::rho(MAX_ORDER);
        assert_eq!(e.dx(), Err(ExprError::MaxOrderExceeded { order: 9 }));
    }

    #[test]
    fn partial_of_log_power() {
        let e = p("log(rho)^2*rho");
        // rho * 2 log(rho)/rho + log(rho)^2
        assert_eq!(e.partial(FieldSymbol::rho(0)).unwrap(), p("2*log(rho) + log(rho)^2"));
    }
}
