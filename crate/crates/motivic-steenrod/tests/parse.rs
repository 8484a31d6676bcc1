mod common;

use common::{random_coeff, random_element, rng};
use motivic_steenrod::dual::monomials_of_weight;
use motivic_steenrod::{
    parse, BmuClass, BmuRing, DualAlgebra, DualElement, Duality, Error, Factor, Prime,
    SteenrodAlgebra, SteenrodElement,
};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn examples() {
    let two = Prime::TWO;
    assert_eq!(
        parse("Sq^2 Sq^2", two).unwrap().terms,
        vec![vec![Factor::P(1), Factor::P(1)]]
    );
    let e = parse("t Sq^3 Sq^1", two).unwrap();
    assert_eq!(
        e.terms,
        vec![vec![Factor::T(1), Factor::Beta, Factor::P(1), Factor::Beta]]
    );
    for p in common::primes() {
        let id = parse("P^0", p)
            .unwrap()
            .steenrod(&SteenrodAlgebra::new(p), &Duality::new(p))
            .unwrap();
        assert_eq!(id, SteenrodElement::one(p));
    }
}

#[test]
fn errors_carry_positions() {
    assert!(matches!(
        parse("Sq^2", Prime::THREE),
        Err(Error::Parse { pos: 0, .. })
    ));
    assert!(matches!(parse("", Prime::TWO), Err(Error::Parse { .. })));
    assert!(matches!(
        parse("P^1 + + b", Prime::TWO),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(parse("P^x", Prime::TWO), Err(Error::Parse { .. })));
    let e = parse("P^-2 b", Prime::TWO).unwrap();
    assert!(e.terms.is_empty());
    assert_eq!(e.warnings.len(), 1);
}

fn random_dual(p: Prime, rng: &mut impl Rng) -> DualElement {
    let mut x = DualElement::zero(p);
    for _ in 0..rng.gen_range(1..4) {
        let all = monomials_of_weight(p, rng.gen_range(0..8));
        if let Some(m) = all.get(rng.gen_range(0..all.len().max(1))) {
            x.add_term(m.clone(), &random_coeff(p, rng));
        }
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_operations_parse_back(seed: u64, odd: bool) {
        let p = if odd { Prime::THREE } else { Prime::TWO };
        let alg = SteenrodAlgebra::new(p);
        let duality = Duality::new(p);
        let mut rng = rng(seed);
        let e = random_element(p, 10, &mut rng);
        let text = e.to_string();
        prop_assert_eq!(&parse(&text, p).unwrap().steenrod(&alg, &duality).unwrap(), &e, "{}", text);
        let m = duality.admissible_to_milnor(&e).unwrap();
        let back = parse(&m.to_string(), p).unwrap().steenrod(&alg, &duality).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn printed_dual_elements_parse_back(seed: u64, odd: bool) {
        let p = if odd { Prime::THREE } else { Prime::TWO };
        let d = DualAlgebra::new(p);
        let mut rng = rng(seed);
        let x = random_dual(p, &mut rng);
        prop_assert_eq!(parse(&x.to_string(), p).unwrap().dual(&d).unwrap(), x);
    }

    #[test]
    fn printed_classes_parse_back(seed: u64, odd: bool) {
        let p = if odd { Prime::THREE } else { Prime::TWO };
        let ring = BmuRing::new(p, 3, 6).unwrap();
        let mut rng = rng(seed);
        let mut x = BmuClass::zero(ring);
        for _ in 0..rng.gen_range(1..4) {
            let mut m = ring.constant(&random_coeff(p, &mut rng));
            for i in 1..=3 {
                if rng.gen_bool(0.5) {
                    m = m.mul(&ring.u(i).unwrap()).unwrap();
                }
                m = m.mul(&ring.v(i, rng.gen_range(0..3)).unwrap()).unwrap();
            }
            x = x.add(&m);
        }
        prop_assert_eq!(parse(&x.to_string(), p).unwrap().class(ring).unwrap(), x);
    }
}
