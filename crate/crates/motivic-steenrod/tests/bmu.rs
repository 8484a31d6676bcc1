mod common;

use common::{op, random_coeff, random_word, rng};
use motivic_steenrod::algebra::admissible_up_to_weight;
use motivic_steenrod::bmu::coaction;
use motivic_steenrod::{
    Action, BmuClass, BmuRing, DualAlgebra, DualMonomial, Duality, Letter, ModuleOracle, MotCoeff,
    Prime, SteenrodAlgebra, SteenrodElement,
};
use proptest::prelude::*;
use rand::Rng;

fn random_class(ring: BmuRing, rng: &mut impl Rng) -> BmuClass {
    let p = ring.prime();
    let mut x = BmuClass::zero(ring);
    for _ in 0..rng.gen_range(1..3) {
        let mut m = ring.constant(&random_coeff(p, rng));
        for i in 1..=ring.arity() {
            if rng.gen_bool(0.4) {
                m = m.mul(&ring.u(i).unwrap()).unwrap();
            }
            let e = rng.gen_range(0..3);
            m = m.mul(&ring.v(i, e).unwrap()).unwrap();
        }
        x = x.add(&m);
    }
    x
}

/// All products `u^a v^e` over the variables, `a <= 1`, `e <= max_v`.
fn monomial_classes(ring: BmuRing, max_v: u32) -> Vec<BmuClass> {
    let mut out = vec![ring.one()];
    for i in 1..=ring.arity() {
        let mut next = Vec::new();
        for x in &out {
            for a in 0..2 {
                for e in 0..=max_v {
                    let mut y = x.mul(&ring.v(i, e).unwrap()).unwrap();
                    if a == 1 {
                        y = y.mul(&ring.u(i).unwrap()).unwrap();
                    }
                    if !y.is_zero() {
                        next.push(y);
                    }
                }
            }
        }
        out = next;
    }
    out
}

#[test]
fn ring_examples() {
    let two = BmuRing::new(Prime::TWO, 1, 6).unwrap();
    let u = two.u(1).unwrap();
    let expected = two
        .v(1, 1)
        .unwrap()
        .scale(&MotCoeff::tau())
        .add(&u.scale(&MotCoeff::rho()));
    assert_eq!(u.mul(&u).unwrap(), expected);
    assert_eq!(u.mul(&u).unwrap().to_string(), "t v_1 + r u_1");

    let three = BmuRing::new(Prime::THREE, 2, 6).unwrap();
    let u = three.u(1).unwrap();
    assert!(u.mul(&u).unwrap().is_zero());
    let (u1, u2) = (three.u(1).unwrap(), three.u(2).unwrap());
    assert_eq!(
        u1.mul(&u2).unwrap(),
        u2.mul(&u1)
            .unwrap()
            .scale(&MotCoeff::scalar(Prime::THREE, -1))
    );

    for ring in [two, three] {
        let n = ring.truncation();
        let v = ring.v(1, 1).unwrap();
        assert!(v.mul(&ring.v(1, n - 1).unwrap()).unwrap().is_zero());
        assert!(!ring.v(1, n - 1).unwrap().is_zero());
    }
}

#[test]
fn action_examples() {
    for p in common::primes() {
        let ring = BmuRing::new(p, 1, 8).unwrap();
        let mut action = Action::new(ring);
        let v = ring.v(1, 1).unwrap();
        assert_eq!(
            action
                .act_word(&[Letter::Beta], &ring.u(1).unwrap())
                .unwrap(),
            v
        );
        let l = p.value();
        assert_eq!(
            action.act_word(&[Letter::P(1)], &v).unwrap(),
            ring.v(1, l).unwrap()
        );
    }
    let ring = BmuRing::new(Prime::TWO, 1, 8).unwrap();
    let mut action = Action::new(ring);
    assert!(action
        .act_word(&[Letter::P(1)], &ring.v(1, 2).unwrap())
        .unwrap()
        .is_zero());
}

#[test]
fn module_oracle_examples() {
    for p in common::primes() {
        let mut oracle = ModuleOracle::new(p);
        assert!(oracle
            .word_equals(&[Letter::P(0)], &SteenrodElement::one(p))
            .unwrap());
        assert!(oracle
            .word_equals(&[Letter::Beta, Letter::Beta], &SteenrodElement::zero(p))
            .unwrap());
        assert!(!oracle
            .word_equals(&[Letter::Beta], &SteenrodElement::zero(p))
            .unwrap());
    }
    let two = Prime::TWO;
    let mut oracle = ModuleOracle::new(two);
    assert!(oracle
        .word_equals(&[Letter::P(1), Letter::P(1)], &op("t Sq^3 Sq^1", two))
        .unwrap());
    assert!(!oracle
        .word_equals(&[Letter::P(1), Letter::P(1)], &op("Sq^3 Sq^1", two))
        .unwrap());
    assert!(
        motivic_steenrod::equal_via_module(&op("Sq^2 Sq^2", two), &op("t Sq^3 Sq^1", two)).unwrap()
    );
}

#[test]
fn total_power_examples() {
    for p in common::primes() {
        let ring = BmuRing::new(p, 1, 8).unwrap();
        let mut action = Action::new(ring);
        let v = ring.v(1, 1).unwrap();
        let t = action.total_power(&v, 1).unwrap();
        assert_eq!(t.coefficient(0, false), ring.v(1, p.value()).unwrap());
        assert_eq!(t.coefficient(1, false), v);
        assert_eq!(t.terms().len(), 2);
    }
    let ring = BmuRing::new(Prime::TWO, 1, 8).unwrap();
    let mut action = Action::new(ring);
    assert_eq!(
        action
            .total_power(&ring.v(1, 1).unwrap(), 1)
            .unwrap()
            .to_string(),
        "v_1^2 + v_1 d"
    );
}

#[test]
fn coaction_examples() {
    for p in common::primes() {
        let d = DualAlgebra::new(p);
        for n in [2, 5, 10, 30] {
            let ring = BmuRing::new(p, 1, n).unwrap();
            let c = coaction(&d, &ring.v(1, 1).unwrap()).unwrap();
            let mut k = 0;
            while p.power(k) < n as u64 {
                assert_eq!(
                    c[&DualMonomial::xi(k, 1)],
                    ring.v(1, p.power(k) as u32).unwrap()
                );
                k += 1;
            }
            assert_eq!(c.len(), k as usize);
            let one = coaction(&d, &ring.one()).unwrap();
            assert_eq!(one.len(), 1);
            assert_eq!(one[&DualMonomial::one()], ring.one());
        }
    }
}

#[test]
fn instability() {
    for p in common::primes() {
        let ring = BmuRing::new(p, 3, 12).unwrap();
        let mut action = Action::new(ring);
        let coefficients: Vec<MotCoeff> = if p.is_two() {
            (0..3)
                .flat_map(|t| (0..3).map(move |r| MotCoeff::monomial(p, t, r, 1).unwrap()))
                .collect()
        } else {
            vec![MotCoeff::one(p)]
        };
        let mut checked = 0;
        for x in monomial_classes(ring, 3) {
            for c in &coefficients {
                let x = x.scale(c);
                let b = x.bidegree().unwrap();
                for n in 1..=8i64 {
                    if b.degree - b.weight < n && b.weight <= n {
                        let y = action.act_word(&[Letter::P(n as u32)], &x).unwrap();
                        assert!(y.is_zero(), "P^{n}({x}) = {y} at {p}");
                        checked += 1;
                    }
                }
            }
        }
        eprintln!("instability at {p}: {checked} cases");
        assert!(checked > 100);
    }
}

#[test]
fn top_power_is_the_frobenius() {
    for p in common::primes() {
        let ring = BmuRing::new(p, 4, 20).unwrap();
        let mut action = Action::new(ring);
        let mut checked = 0;
        for x in monomial_classes(ring, 4) {
            let b = x.bidegree().unwrap();
            if b.degree != 2 * b.weight || b.weight == 0 || b.weight > 4 {
                continue;
            }
            let r = b.weight as u32;
            assert_eq!(
                action.act_word(&[Letter::P(r)], &x).unwrap(),
                x.pow(p.value()),
                "P^{r}({x})"
            );
            checked += 1;
        }
        eprintln!("top power at {p}: {checked} cases");
        assert!(checked > 50);
    }
}

#[test]
fn coaction_reproduces_the_action() {
    for p in common::primes() {
        let duality = Duality::new(p);
        let ring = BmuRing::new(p, 2, 10).unwrap();
        let mut action = Action::new(ring);
        let mut rng = rng(7);
        let classes: Vec<BmuClass> = (0..6).map(|_| random_class(ring, &mut rng)).collect();
        for x in &classes {
            let lambda = coaction(duality.dual(), x).unwrap();
            for m in admissible_up_to_weight(p, 6) {
                let f = SteenrodElement::from_monomial(p, m.clone());
                let mut via = BmuClass::zero(ring);
                for (omega, y) in &lambda {
                    via = via.add(&y.scale(&duality.pair(&f, omega).unwrap()));
                }
                assert_eq!(
                    via,
                    action.act(&f, x).unwrap(),
                    "{}({x}) at {p}",
                    m.display(p)
                );
            }
        }
    }
}

#[test]
fn total_power_is_multiplicative() {
    for p in common::primes() {
        let ring = BmuRing::new(p, 3, 16).unwrap();
        let mut action = Action::new(ring);
        let classes: Vec<(u32, BmuClass)> = monomial_classes(ring, 2)
            .into_iter()
            .filter_map(|x| {
                let b = x.bidegree()?;
                (b.degree == 2 * b.weight && b.weight <= 2).then_some((b.weight as u32, x))
            })
            .collect();
        let mut checked = 0;
        for (r, x) in &classes {
            for (s, y) in &classes {
                if r + s > 3 {
                    continue;
                }
                let lhs = action.total_power(&x.mul(y).unwrap(), r + s).unwrap();
                let rhs = action
                    .total_power(x, *r)
                    .unwrap()
                    .mul(&action.total_power(y, *s).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs, "{x} * {y}");
                checked += 1;
            }
        }
        eprintln!("total power products at {p}: {checked} cases");
        assert!(checked > 50);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_factors_through_normal_form(seed: u64, odd: bool) {
        let p = if odd { Prime::THREE } else { Prime::TWO };
        let alg = SteenrodAlgebra::new(p);
        let ring = BmuRing::new(p, 3, 10).unwrap();
        let mut action = Action::new(ring);
        let mut rng = rng(seed);
        let word = random_word(p, 6, true, &mut rng);
        let x = random_class(ring, &mut rng);
        let normal = alg.normalize(&word).unwrap();
        prop_assert_eq!(action.act(&normal, &x).unwrap(), action.act_word(&word, &x).unwrap());
    }
}
