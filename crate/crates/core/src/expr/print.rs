//! Canonical DSL printing. The output re-parses to the same normal form.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::{Expr, Key};

fn power(base: String, k: u32) -> String {
    if k == 1 {
        base
    } else {
        format!("{base}^{k}")
    }
}

fn split_key(key: &Key) -> (Vec<String>, Vec<String>) {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (name, &k) in &key.params {
        let s = power(name.clone(), k.unsigned_abs());
        if k > 0 {
            num.push(s)
        } else {
            den.push(s)
        }
    }
    for (sym, &k) in &key.fields {
        let s = power(sym.to_string(), k.unsigned_abs());
        if k > 0 {
            num.push(s)
        } else {
            den.push(s)
        }
    }
    for (sym, &k) in &key.logs {
        num.push(power(format!("log({sym})"), k));
    }
    for (integrand, &k) in &key.integrals {
        num.push(power(format!("int({})", to_dsl(integrand)), k));
    }
    (num, den)
}

fn monomial(coeff_abs_num: &BigInt, coeff_den: &BigInt, key: &Key) -> String {
    let (mut num, mut den) = split_key(key);
    if !coeff_abs_num.is_one() || num.is_empty() {
        num.insert(0, coeff_abs_num.to_string());
    }
    if !coeff_den.is_one() {
        den.insert(0, coeff_den.to_string());
    }
    let mut out = num.join("*");
    match den.len() {
        0 => {}
        1 => {
            out.push('/');
            out.push_str(&den[0]);
        }
        _ => {
            out.push_str("/(");
            out.push_str(&den.join("*"));
            out.push(')');
        }
    }
    out
}

pub(crate) fn to_dsl(e: &Expr) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (key, coeff)) in e.terms().enumerate() {
        let negative = coeff.is_negative();
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&monomial(&coeff.numer().abs(), coeff.denom(), key));
    }
    out
}

#[cfg(test)]
mod tests {
    use crate::expr::parse_expr;

    fn roundtrip(s: &str) -> String {
        let e = parse_expr(s).unwrap();
        let printed = e.to_string();
        assert_eq!(parse_expr(&printed).unwrap(), e, "{s} -> {printed}");
        printed
    }

    #[test]
    fn canonical_strings() {
        assert_eq!(roundtrip("0"), "0");
        assert_eq!(roundtrip("S_1/m*rho + D*rho_1"), "D*rho_1 + rho*S_1/m");
        assert_eq!(roundtrip("-hbar*D*rho_2/(2*rho)"), "-D*hbar*rho_2/(2*rho)");
        assert_eq!(roundtrip("1/rho"), "1/rho");
        assert_eq!(roundtrip("-3/4"), "-3/4");
        assert_eq!(roundtrip("D*log(rho)"), "D*log(rho)");
        assert_eq!(roundtrip("kappa*int(rho*S_1)^2"), "kappa*int(rho*S_1)^2");
    }

    #[test]
    fn model_forms_roundtrip() {
        roundtrip("3*hbar^2*lambda^2/(8*m)*rho^2 - hbar*lambda/m*rho*S_1");
        roundtrip("kappa*(S_1*rho)^2/(2*m)");
        roundtrip("m*D^2*(rho_2/rho - rho_1^2/(2*rho^2))");
    }
}
