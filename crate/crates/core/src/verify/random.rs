//! Seeded random potentials.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, FieldSymbol};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coefficient(rng: &mut ChaCha8Rng) -> Expr {
    let num = loop {
        let n: i64 = rng.gen_range(-5..=5);
        if n != 0 {
            break n;
        }
    };
    Expr::ratio(num, rng.gen_range(1..=4))
}

/// A Laurent polynomial in `ρ_0..ρ_k` and `S_1..S_k` (no bare `S`), so
/// it always conserves the number of particles. Each monomial has between
/// one and `max_degree` field factors and, with some probability, an extra
/// `ρ⁻¹`.
pub fn conserving_potential(rng: &mut ChaCha8Rng, max_order: u8, max_degree: u32, max_terms: usize) -> Expr {
    let mut symbols: Vec<FieldSymbol> = (0..=max_order).map(FieldSymbol::rho).collect();
    symbols.extend((1..=max_order).map(FieldSymbol::s));
    loop {
        let mut u = Expr::zero();
        for _ in 0..rng.gen_range(1..=max_terms) {
            let mut term = coefficient(rng);
            for _ in 0..rng.gen_range(1..=max_degree) {
                term = &term * &Expr::field(*symbols.choose(rng).expect("nonempty"));
            }
            if rng.gen_bool(0.3) {
                term = &term * &Expr::field_pow(FieldSymbol::rho(0), -1);
            }
            u = &u + &term;
        }
        if !u.is_zero() {
            return u;
        }
    }
}

/// A first-order potential with small coefficients, from monomials that keep
/// the ψ-equation well posed on background-supported data.
pub fn mild_first_order_potential(rng: &mut ChaCha8Rng) -> Expr {
    let rho = || Expr::rho(0);
    let pool: Vec<Expr> = vec![
        &rho() * &rho(),
        &(&rho() * &rho()) * &rho(),
        &(&rho() * &rho()) * &Expr::s(1),
        &rho() * &(&Expr::s(1) * &Expr::s(1)),
        &Expr::rho(1) * &Expr::s(1),
        &Expr::rho(1) * &Expr::rho(1),
    ];
    let mut picks: Vec<usize> = (0..pool.len()).collect();
    picks.shuffle(rng);
    picks
        .into_iter()
        .take(3)
        .map(|i| {
            let c: i64 = rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 };
            &Expr::ratio(c, 100) * &pool[i]
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::check_conservation;

    #[test]
    fn generated_potentials_conserve() {
        let mut r = rng(7);
        for _ in 0..50 {
            let u = conserving_potential(&mut r, 3, 3, 4);
            assert!(check_conservation(&u));
            assert!(u.max_order().0 <= 3 && u.max_order().1 <= 3);
        }
        let u = mild_first_order_potential(&mut r);
        assert!(check_conservation(&u) && u.max_order().0 <= 1);
    }

    #[test]
    fn deterministic_for_a_seed() {
        assert_eq!(conserving_potential(&mut rng(3), 2, 3, 3), conserving_potential(&mut rng(3), 2, 3, 3));
    }
}
