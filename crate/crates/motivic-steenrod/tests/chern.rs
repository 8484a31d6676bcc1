mod common;

use common::newton::{newton_power_sums, Poly};
use motivic_steenrod::bmu::coaction;
use motivic_steenrod::chern::{chern_polynomial, power_sum_class, thom_stable_rank};
use motivic_steenrod::{
    chern_action, decompose_symmetric, thom_action, Action, BmuClass, BmuRing, ChernPoly,
    DualAlgebra, DualMonomial, Duality, MotCoeff, Prime, SymPoly,
};
use proptest::prelude::*;

fn as_poly(c: &ChernPoly) -> Poly {
    c.terms()
        .iter()
        .map(|(e, &x)| (e.clone(), x as i64))
        .collect()
}

fn chern(p: Prime, d: usize, terms: &[(&[u32], u32)]) -> ChernPoly {
    ChernPoly::new(p, d, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
}

fn unit_r(n: usize) -> Vec<u32> {
    let mut r = vec![0; n];
    r[n - 1] = 1;
    r
}

#[test]
fn decomposition_examples() {
    let two = Prime::TWO;
    let x1x2 = SymPoly::new(two, 2, [(vec![1, 1], 1)]).unwrap();
    assert_eq!(
        decompose_symmetric(&x1x2).unwrap(),
        chern(two, 2, &[(&[0, 1], 1)])
    );
    let squares = SymPoly::new(two, 2, [(vec![2, 0], 1), (vec![0, 2], 1)]).unwrap();
    let newton = newton_power_sums(2, 2, 2);
    assert_eq!(as_poly(&decompose_symmetric(&squares).unwrap()), newton[2]);
    assert_eq!(
        decompose_symmetric(&squares).unwrap(),
        chern(two, 2, &[(&[2, 0], 1)])
    );
    for p in common::primes() {
        for d in 1..5 {
            let mut e1 = vec![0; d];
            e1[0] = 1;
            assert_eq!(power_sum_class(1, d, p), chern(p, d, &[(&e1, 1)]));
        }
    }
}

#[test]
fn chern_action_examples() {
    for p in [Prime::TWO, Prime::THREE, Prime::new(5).unwrap()] {
        let l = p.value();
        for d in 1..5 {
            let mut e1 = vec![0; d];
            e1[0] = 1;
            assert_eq!(chern_action(&[], 1, d, p), chern(p, d, &[(&e1, 1)]));
        }
        assert_eq!(chern_action(&[1], 1, 1, p), chern(p, 1, &[(&[l], 1)]));
        assert_eq!(thom_action(&[1], 1, p), chern(p, 1, &[(&[l - 1], 1)]));
        for d in 1..5 {
            assert_eq!(thom_action(&[], d, p), chern(p, d, &[(&vec![0; d], 1)]));
        }
    }
    let two = Prime::TWO;
    assert_eq!(
        chern_action(&[1], 1, 2, two),
        chern(two, 2, &[(&[2, 0], 1)])
    );
    assert_eq!(thom_action(&[1], 2, two), chern(two, 2, &[(&[1, 0], 1)]));
    assert_eq!(chern_action(&[1], 1, 2, two).to_string(), "c1^2");
}

#[test]
fn thom_action_of_q_n_is_a_power_sum() {
    for p in [Prime::TWO, Prime::THREE, Prime::new(5).unwrap()] {
        let l = p.value() as i64;
        for d in 1..=6 {
            let top = (p.power(2) - 1) as usize;
            let newton = newton_power_sums(d, top, l);
            for n in 1..=2 {
                let j = (p.power(n) - 1) as usize;
                let got = thom_action(&unit_r(n as usize), d, p);
                assert_eq!(as_poly(&got), newton[j], "q_{n}, d = {d}, l = {l}");
                assert_eq!(got, power_sum_class(j as u32, d, p));
            }
        }
    }
}

#[test]
fn thom_action_is_stable() {
    for p in common::primes() {
        let mut sequences: Vec<Vec<u32>> = vec![vec![1], vec![2], vec![3], vec![0, 1], vec![1, 1]];
        if p.is_two() {
            sequences.extend([vec![4], vec![2, 1], vec![0, 0, 1]]);
        }
        for r in sequences {
            let n = thom_stable_rank(&r, p);
            if n > 8 {
                continue;
            }
            let base = thom_action(&r, n.max(1), p);
            for d in n.max(1) + 1..=n + 2 {
                let bigger = thom_action(&r, d, p);
                assert_eq!(bigger.with_rank(n.max(1)), base, "r = {r:?}, d = {d}");
                assert_eq!(bigger.with_rank(n.max(1)).with_rank(d), bigger);
            }
        }
    }
}

/// `c_i` of a sum of line bundles with first Chern classes `v_1..v_d`.
fn elementary_classes(ring: BmuRing, d: usize) -> Vec<BmuClass> {
    let mut e = vec![ring.one()];
    for j in 1..=d {
        let v = ring.v(j, 1).unwrap();
        let mut next = vec![ring.one()];
        for i in 1..=j {
            let keep = if i < e.len() {
                e[i].clone()
            } else {
                BmuClass::zero(ring)
            };
            next.push(keep.add(&e[i - 1].mul(&v).unwrap()));
        }
        e = next;
    }
    e
}

fn evaluate(c: &ChernPoly, classes: &[BmuClass], ring: BmuRing) -> BmuClass {
    let mut out = BmuClass::zero(ring);
    for (e, &k) in c.terms() {
        let mut m = ring.constant(&MotCoeff::scalar(ring.prime(), k as i64));
        for (j, &a) in e.iter().enumerate() {
            m = m.mul(&classes[j + 1].pow(a)).unwrap();
        }
        out = out.add(&m);
    }
    out
}

#[test]
fn splitting_principle() {
    for p in common::primes() {
        let duality = Duality::new(p);
        let dual = DualAlgebra::new(p);
        let sequences: Vec<Vec<u32>> = if p.is_two() {
            vec![vec![1], vec![2], vec![0, 1], vec![1, 1], vec![3]]
        } else {
            vec![vec![1], vec![2], vec![0, 1]]
        };
        for d in 1..=4 {
            for r in &sequences {
                let weight: u64 = r
                    .iter()
                    .enumerate()
                    .map(|(k, &x)| (p.power(k as u32 + 1) - 1) * x as u64)
                    .sum();
                let ring = BmuRing::new(p, d, (d as u64 + weight + 2) as u32).unwrap();
                let classes = elementary_classes(ring, d);
                let op = duality.milnor_to_admissible(&duality.pm(r)).unwrap();
                let mut action = Action::new(ring);
                for i in 1..=d {
                    let x = &classes[i];
                    let expected = evaluate(&chern_action(r, i, d, p), &classes, ring);
                    assert_eq!(
                        action.act(&op, x).unwrap(),
                        expected,
                        "P^{r:?}(c_{i}), d = {d}"
                    );
                    let lambda = coaction(&dual, x).unwrap();
                    let via = lambda
                        .get(&DualMonomial::from_parts(&[], r))
                        .cloned()
                        .unwrap_or_else(|| BmuClass::zero(ring));
                    assert_eq!(via, expected);
                }
            }
        }
    }
}

fn symmetric_from(p: Prime, d: usize, seeds: &[(Vec<u32>, u32)]) -> SymPoly {
    let mut out = SymPoly::zero(p, d);
    for (e, c) in seeds {
        let mut orbit = std::collections::BTreeSet::new();
        let mut perm = e.clone();
        perm.sort();
        loop {
            orbit.insert(perm.clone());
            if !next_permutation(&mut perm) {
                break;
            }
        }
        let s = SymPoly::new(p, d, orbit.into_iter().map(|x| (x, *c))).unwrap();
        out = out.add(&s);
    }
    out
}

fn next_permutation(v: &mut [u32]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn exponent_vectors(d: usize) -> impl Strategy<Value = Vec<(Vec<u32>, u32)>> {
    prop::collection::vec((prop::collection::vec(0u32..5, d), 1u32..5), 1..4)
        .prop_filter("degree at most 12", |v| {
            v.iter().all(|(e, _)| e.iter().sum::<u32>() <= 12)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_round_trips(d in 1usize..=5, seeds in exponent_vectors(5), odd: bool) {
        let p = if odd { Prime::THREE } else { Prime::TWO };
        let seeds: Vec<(Vec<u32>, u32)> = seeds.into_iter().map(|(e, c)| (e[..d].to_vec(), c % p.value())).collect();
        let s = symmetric_from(p, d, &seeds);
        let c = decompose_symmetric(&s).unwrap();
        prop_assert_eq!(c.recompose(), s);
    }

    #[test]
    fn chern_polynomials_are_symmetric(d in 1usize..=4, i in 0usize..=4, r in prop::collection::vec(0u32..3, 0..3)) {
        let p = Prime::TWO;
        prop_assume!(i <= d);
        let s = chern_polynomial(&r, i, d, p);
        prop_assert!(s.is_symmetric());
        prop_assert_eq!(chern_action(&r, i, d, p).recompose(), s);
    }
}
