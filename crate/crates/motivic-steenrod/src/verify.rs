//! Sweep over inadmissible pairs, comparing the Adem engine with the
//! duality product, the module action and the classical algebra.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Letter, Monomial, SteenrodAlgebra};
use crate::bmu::ModuleOracle;
use crate::classical::ClassicalAdem;
use crate::coeff::Prime;
use crate::error::{Error, Result};
use crate::milnor::Duality;

/// An inadmissible pair: `Sq^a Sq^b` at the prime 2, `P^a b^mid P^b` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pair {
    pub a: u32,
    pub mid: bool,
    pub b: u32,
}

impl Pair {
    pub fn letters(&self, p: Prime) -> (Vec<Letter>, Vec<Letter>) {
        if p.is_two() {
            let sq = |n: u32| Monomial::from_sq(&[n]).expect("single square").letters();
            (sq(self.a), sq(self.b))
        } else {
            let mut second = Vec::new();
            if self.mid {
                second.push(Letter::Beta);
            }
            second.push(Letter::P(self.b));
            (vec![Letter::P(self.a)], second)
        }
    }

    pub fn label(&self, p: Prime) -> String {
        if p.is_two() {
            format!("Sq^{} Sq^{}", self.a, self.b)
        } else if self.mid {
            format!("P^{} b P^{}", self.a, self.b)
        } else {
            format!("P^{} P^{}", self.a, self.b)
        }
    }
}

/// Inadmissible pairs with `a + b <= max`, in a fixed order.
pub fn inadmissible_pairs(p: Prime, max: u32) -> Vec<Pair> {
    let l = p.value();
    let mut out = Vec::new();
    for s in 2..=max {
        for a in 1..s {
            let b = s - a;
            if p.is_two() {
                if a < 2 * b {
                    out.push(Pair { a, mid: false, b });
                }
            } else {
                for mid in [false, true] {
                    if a < l * b + mid as u32 {
                        out.push(Pair { a, mid, b });
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub pair: String,
    pub duality: bool,
    pub module: Option<bool>,
    pub classical: Option<bool>,
    pub micros: u128,
}

impl PairCheck {
    pub fn passed(&self) -> bool {
        self.duality && self.module != Some(false) && self.classical != Some(false)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub prime: u32,
    pub bound: u32,
    pub module_cutoff: u64,
    pub checks: Vec<PairCheck>,
    pub counterexamples: Vec<String>,
    pub millis: u128,
}

impl VerifyReport {
    pub fn success(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

struct Engines {
    alg: SteenrodAlgebra,
    duality: Duality,
    classical: Option<ClassicalAdem>,
}

fn check_pair(
    e: &Engines,
    oracle: &mut ModuleOracle,
    pair: Pair,
    cutoff: u64,
) -> Result<PairCheck> {
    let p = e.alg.prime();
    let start = Instant::now();
    let (first, second) = pair.letters(p);
    let word: Vec<Letter> = first.iter().chain(&second).cloned().collect();
    let normal = e.alg.normalize(&word)?;
    let duality = e.duality.admissible_to_milnor(&normal)?
        == e.duality.product_via_duality(&first, &second)?;
    let weight = if p.is_two() {
        (pair.a / 2 + pair.b / 2) as u64
    } else {
        (p.value() as u64 - 1) * (pair.a + pair.b) as u64
    };
    let module = if weight <= cutoff {
        Some(oracle.word_equals(&word, &normal)?)
    } else {
        None
    };
    let classical = e.classical.as_ref().map(|c| {
        let reference: Vec<Vec<u32>> = c.normalize(&[pair.a, pair.b]).into_keys().collect();
        let mut ours: Vec<Vec<u32>> = normal
            .specialize_classical()
            .terms
            .into_iter()
            .filter(|(_, c)| c % 2 == 1)
            .map(|(m, _)| m.to_sq())
            .collect();
        ours.sort();
        ours == reference
    });
    Ok(PairCheck {
        pair: pair.label(p),
        duality,
        module,
        classical,
        micros: start.elapsed().as_micros(),
    })
}

/// Runs the sweep with `threads` workers (all cores when `None`).
pub fn verify_adem(
    p: Prime,
    max: u32,
    module_cutoff: u64,
    threads: Option<usize>,
) -> Result<VerifyReport> {
    let start = Instant::now();
    let engines = Engines {
        alg: SteenrodAlgebra::new(p),
        duality: Duality::new(p),
        classical: p.is_two().then(|| ClassicalAdem::new(2 * max as usize + 2)),
    };
    let pairs = inadmissible_pairs(p, max);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Unsupported(e.to_string()))?;
    let checks: Vec<PairCheck> = pool.install(|| {
        pairs
            .par_iter()
            .map_init(
                || ModuleOracle::new(p),
                |oracle, &pair| check_pair(&engines, oracle, pair, module_cutoff),
            )
            .collect::<Result<_>>()
    })?;
    let counterexamples = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.pair.clone())
        .collect();
    Ok(VerifyReport {
        prime: p.value(),
        bound: max,
        module_cutoff,
        checks,
        counterexamples,
        millis: start.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps() {
        let r = verify_adem(Prime::TWO, 12, 6, Some(1)).unwrap();
        assert!(r.success(), "{:?}", r.counterexamples);
        assert_eq!(r.checks.len(), inadmissible_pairs(Prime::TWO, 12).len());
        assert_eq!(r.checks[0].pair, "Sq^1 Sq^1");
        let r = verify_adem(Prime::THREE, 6, 6, Some(1)).unwrap();
        assert!(r.success(), "{:?}", r.counterexamples);
    }
}
