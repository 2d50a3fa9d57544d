//! Recursive-descent parser for the expression DSL.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := unary (("*"|"/") unary)*
//! unary  := "-" unary | factor
//! factor := base ("^" integer)?
//! base   := rational | ident | "(" expr ")" | "log" "(" field ")" | "int" "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus, so `-rho^2` is `-(rho^2)`. The
//! function forms are only accepted by [`parse_expr`]; potentials given to
//! [`parse_potential`] must be Laurent polynomials.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Base, Expr, ExprError, FieldSymbol};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(..) => "number".into(),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => out.push((Tok::Plus, start)),
            '-' => out.push((Tok::Minus, start)),
            '*' => out.push((Tok::Star, start)),
            '/' => out.push((Tok::Slash, start)),
            '^' => out.push((Tok::Caret, start)),
            '(' => out.push((Tok::LParen, start)),
            ')' => out.push((Tok::RParen, start)),
            c if c.is_ascii_digit() || c == '.' => {
                let mut int_part = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    int_part.push(chars[i]);
                    i += 1;
                }
                let mut frac = String::new();
                let mut decimal = false;
                if i < chars.len() && chars[i] == '.' {
                    decimal = true;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        frac.push(chars[i]);
                        i += 1;
                    }
                }
                if int_part.is_empty() && frac.is_empty() {
                    return Err(ExprError::Syntax { position: start, expected: "digit".into() });
                }
                let digits = format!("{int_part}{frac}");
                let num: BigInt = digits.parse().expect("digits");
                let den = BigInt::from(10u32).pow(frac.len() as u32);
                out.push((Tok::Num(BigRational::new(num, den), decimal), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    name.push(chars[i]);
                    i += 1;
                }
                out.push((Tok::Ident(name), start));
                continue;
            }
            _ => {
                return Err(ExprError::Syntax {
                    position: start,
                    expected: "number, identifier, operator or parenthesis".into(),
                })
            }
        }
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Potential,
    General,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    mode: Mode,
}

/// Classifies an identifier as a field symbol, if it is one.
fn field_symbol(name: &str, position: usize) -> Result<Option<FieldSymbol>, ExprError> {
    let (base, rest) = if name == "rho" {
        return Ok(Some(FieldSymbol::rho(0)));
    } else if name == "S" {
        return Ok(Some(FieldSymbol::s(0)));
    } else if let Some(r) = name.strip_prefix("rho_") {
        (Base::Rho, r)
    } else if let Some(r) = name.strip_prefix("S_") {
        (Base::S, r)
    } else {
        return Ok(None);
    };
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return Err(ExprError::Syntax { position, expected: "derivative order digits".into() });
    }
    let order: usize = rest
        .parse()
        .map_err(|_| ExprError::MaxOrderExceeded { order: usize::MAX })?;
    if order > super::MAX_ORDER as usize {
        return Err(ExprError::MaxOrderExceeded { order });
    }
    Ok(Some(FieldSymbol { base, order: order as u8 }))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn position(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ExprError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(ExprError::Syntax { position: self.position(), expected: tok.describe() })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    let position = self.position();
                    let div = self.unary()?;
                    if div.is_zero() {
                        return Err(ExprError::Syntax { position, expected: "non-zero divisor".into() });
                    }
                    let inv = div
                        .reciprocal()
                        .map_err(|_| ExprError::NonMonomialDivisor { position })?;
                    acc = &acc * &inv;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let position = self.position();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            (Tok::Num(n, false), _) if n.is_integer() => {
                let k: i32 = n
                    .to_integer()
                    .try_into()
                    .map_err(|_| ExprError::NonIntegerExponent { position })?;
                let k = if negative { -k } else { k };
                if k < 0 && base.is_zero() {
                    return Err(ExprError::Syntax { position, expected: "non-zero base".into() });
                }
                base.pow(k).map_err(|_| ExprError::NonMonomialDivisor { position })
            }
            (Tok::Num(..), _) | (Tok::LParen, _) | (Tok::Ident(_), _) => {
                Err(ExprError::NonIntegerExponent { position })
            }
            _ => Err(ExprError::Syntax { position, expected: "integer exponent".into() }),
        }
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        let (tok, position) = self.bump();
        match tok {
            Tok::Num(n, _) => Ok(Expr::constant(n)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    return self.call(name, position);
                }
                if let Some(sym) = field_symbol(&name, position)? {
                    return Ok(Expr::field(sym));
                }
                if name == "log" || name == "int" {
                    return Err(ExprError::Syntax { position: self.position(), expected: "`(`".into() });
                }
                Ok(Expr::param(&name))
            }
            other => Err(ExprError::Syntax {
                position,
                expected: format!("number, identifier or `(` (found {})", other.describe()),
            }),
        }
    }

    fn call(&mut self, name: String, position: usize) -> Result<Expr, ExprError> {
        let known = name == "log" || name == "int";
        if !known || self.mode == Mode::Potential {
            return Err(ExprError::UnknownFunction { name, position });
        }
        self.expect(Tok::LParen)?;
        let out = if name == "log" {
            let arg_pos = self.position();
            let sym = match self.bump() {
                (Tok::Ident(id), p) => field_symbol(&id, p)?,
                _ => None,
            };
            match sym {
                Some(sym) => Expr::log(sym),
                None => {
                    return Err(ExprError::Syntax { position: arg_pos, expected: "field symbol".into() })
                }
            }
        } else {
            Expr::integral(self.expr()?)
        };
        self.expect(Tok::RParen)?;
        Ok(out)
    }
}

fn run(text: &str, mode: Mode) -> Result<Expr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, mode };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ExprError::Syntax {
            position: p.position(),
            expected: "operator or end of input".into(),
        });
    }
    Ok(e)
}

/// Parses a potential `U[ρ, S]`: a Laurent polynomial in field symbols with
/// symbolic parameters and exact rational coefficients.
pub fn parse_potential(text: &str) -> Result<Expr, ExprError> {
    run(text, Mode::Potential)
}

/// Parses any printed expression, including `log(field)` and `int(expr)`
/// factors produced by derivations.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    run(text, Mode::General)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rational;

    #[test]
    fn dg_potential_monomials() {
        let u = parse_potential("D/2*(rho_1*S_1 - rho*S_2)").unwrap();
        let expected = &(&(&Expr::param("D") * &Expr::ratio(1, 2)) * &Expr::rho(1)) * &Expr::s(1)
            - &(&(&Expr::param("D") * &Expr::ratio(1, 2)) * &Expr::rho(0)) * &Expr::s(2);
        assert_eq!(u, expected);
        assert_eq!(u.len(), 2);
    }

    #[test]
    fn zero_is_empty_sum() {
        assert!(parse_potential("0").unwrap().is_zero());
        assert!(parse_potential(" 0 ").unwrap().is_empty());
    }

    #[test]
    fn eip_potential() {
        let u = parse_potential("kappa*(S_1*rho)^2/(2*m)").unwrap();
        let expected = Expr::monomial(rational(1, 2), Default::default())
            * Expr::param("kappa")
            * Expr::param_pow("m", -1)
            * Expr::field_pow(FieldSymbol::rho(0), 2)
            * Expr::field_pow(FieldSymbol::s(1), 2);
        assert_eq!(u, expected);
    }

    #[test]
    fn caret_binds_tighter_than_minus() {
        assert_eq!(parse_expr("-rho^2").unwrap(), -Expr::field_pow(FieldSymbol::rho(0), 2));
        assert_eq!(parse_expr("2^2").unwrap(), Expr::int(4));
        assert_eq!(parse_expr("rho^-2").unwrap(), Expr::field_pow(FieldSymbol::rho(0), -2));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_expr("0.25*rho").unwrap(), &Expr::ratio(1, 4) * &Expr::rho(0));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_potential("rho +* S_1") {
            Err(ExprError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_potential("(rho"), Err(ExprError::Syntax { position: 4, .. })));
        assert!(matches!(parse_potential("rho S"), Err(ExprError::Syntax { position: 4, .. })));
    }

    #[test]
    fn non_integer_exponents() {
        assert!(matches!(parse_potential("rho^1.5"), Err(ExprError::NonIntegerExponent { .. })));
        assert!(matches!(parse_potential("rho^(1/2)"), Err(ExprError::NonIntegerExponent { .. })));
    }

    #[test]
    fn functions_rejected_in_potentials() {
        assert!(matches!(
            parse_potential("log(rho)"),
            Err(ExprError::UnknownFunction { ref name, position: 0 }) if name == "log"
        ));
        assert!(matches!(parse_expr("sin(rho)"), Err(ExprError::UnknownFunction { .. })));
        assert!(parse_expr("D*log(rho)").is_ok());
        assert!(parse_expr("int(rho*S_1)").is_ok());
    }

    #[test]
    fn non_monomial_divisor() {
        assert!(matches!(
            parse_potential("rho/(1 + rho)"),
            Err(ExprError::NonMonomialDivisor { position: 4 })
        ));
    }

    #[test]
    fn order_limit_in_identifiers() {
        assert!(matches!(parse_potential("rho_9"), Err(ExprError::MaxOrderExceeded { order: 9 })));
        assert!(parse_potential("rho_8*S_8").is_ok());
    }
}
