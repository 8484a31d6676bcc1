#![allow(dead_code)]

pub mod newton;

use motivic_steenrod::algebra::admissible_up_to_weight;
use motivic_steenrod::{
    parse, Duality, Letter, Monomial, MotCoeff, Prime, SteenrodAlgebra, SteenrodElement,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn primes() -> [Prime; 2] {
    [Prime::TWO, Prime::THREE]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reads an operation such as `t Sq^3 Sq^1 + r`.
pub fn op(text: &str, p: Prime) -> SteenrodElement {
    let alg = SteenrodAlgebra::new(p);
    let duality = Duality::new(p);
    parse(text, p).unwrap().steenrod(&alg, &duality).unwrap()
}

/// A nonzero homogeneous coefficient.
pub fn random_coeff(p: Prime, rng: &mut impl Rng) -> MotCoeff {
    if p.is_two() {
        MotCoeff::monomial(p, rng.gen_range(0..3), rng.gen_range(0..3), 1).unwrap()
    } else {
        MotCoeff::scalar(p, rng.gen_range(1..p.value()) as i64)
    }
}

/// A word of total weight at most `max` with optional coefficient letters.
pub fn random_word(p: Prime, max: u64, coefficients: bool, rng: &mut impl Rng) -> Vec<Letter> {
    let step = p.value() as u64 - 1;
    let mut left = max;
    let mut word = Vec::new();
    for _ in 0..rng.gen_range(1..6) {
        match rng.gen_range(0..4) {
            0 => word.push(Letter::Beta),
            1 if coefficients => word.push(Letter::Coeff(random_coeff(p, rng))),
            _ => {
                if left >= step {
                    let n = rng.gen_range(1..=left / step);
                    left -= n * step;
                    word.push(Letter::P(n as u32));
                }
            }
        }
    }
    word
}

/// A random combination of admissible monomials of weight at most `max`.
pub fn random_element(p: Prime, max: u64, rng: &mut impl Rng) -> SteenrodElement {
    let basis = admissible_up_to_weight(p, max);
    let mut e = SteenrodElement::zero(p);
    for _ in 0..rng.gen_range(1..4) {
        let m: &Monomial = &basis[rng.gen_range(0..basis.len())];
        e.add_term(m.clone(), &random_coeff(p, rng));
    }
    e
}
