//! The Kronecker pairing, the product computed through duality, Gram
//! matrices, and the change of basis between admissible monomials and the
//! Milnor basis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;

use crate::algebra::{render_left, Gen, Letter, Monomial, SteenrodElement};
use crate::coeff::{carries, Bidegree, MotCoeff, Prime};
use crate::dual::{
    monomials_of_bidegree, monomials_of_weight_bounded, DualAlgebra, DualElement, DualMonomial,
    FactorBound, TensorBound,
};
use crate::error::{Error, Result};

/// `sum c * rho(e, r)` with `rho(e, r) = Q(e) P^(r)`, keyed by the index
/// sequence `(e, r)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilnorElement {
    prime: Prime,
    terms: BTreeMap<DualMonomial, MotCoeff>,
}

impl MilnorElement {
    pub fn zero(prime: Prime) -> MilnorElement {
        MilnorElement {
            prime,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(prime: Prime, index: DualMonomial) -> MilnorElement {
        let mut out = MilnorElement::zero(prime);
        out.add_term(index, &MotCoeff::one(prime));
        out
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn terms(&self) -> &BTreeMap<DualMonomial, MotCoeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, index: &DualMonomial) -> MotCoeff {
        self.terms
            .get(index)
            .cloned()
            .unwrap_or_else(|| MotCoeff::zero(self.prime))
    }

    pub fn add_term(&mut self, index: DualMonomial, c: &MotCoeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&index) {
            Some(x) => {
                x.add_assign_ref(c);
                if x.is_zero() {
                    self.terms.remove(&index);
                }
            }
            None => {
                self.terms.insert(index, c.clone());
            }
        }
    }

    pub fn add(&self, other: &MilnorElement) -> MilnorElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: &MotCoeff) -> MilnorElement {
        let mut out = MilnorElement::zero(self.prime);
        for (m, x) in &self.terms {
            out.add_term(m.clone(), &(c * x));
        }
        out
    }
}

/// Text form of a Milnor basis element: `Q_i`, `Q{i,j}`, `Pm(r1,r2)`.
pub fn milnor_basis_name(index: &DualMonomial) -> String {
    if index.is_one() {
        return "1".into();
    }
    let mut parts = Vec::new();
    let set: Vec<u32> = (0..64).filter(|&k| index.eps(k)).collect();
    match set.as_slice() {
        [] => {}
        [i] => parts.push(format!("Q_{i}")),
        _ => parts.push(format!(
            "Q{{{}}}",
            set.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        )),
    }
    if !index.r_seq().is_empty() {
        parts.push(format!(
            "Pm({})",
            index
                .r_seq()
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(",")
        ));
    }
    parts.join(" ")
}

impl fmt::Display for MilnorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .flat_map(|(m, c)| render_left(&milnor_basis_name(m), m.is_one(), c))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Entries `<theta(I), omega(J)>` for the index sequences of one bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix {
    pub bidegree: Bidegree,
    pub indices: Vec<DualMonomial>,
    pub entries: Vec<Vec<MotCoeff>>,
}

impl GramMatrix {
    /// Unit diagonal and zeros strictly above it.
    pub fn is_unitriangular(&self) -> bool {
        let p = match self.entries.first().and_then(|row| row.first()) {
            Some(c) => c.prime(),
            None => return true,
        };
        let minus_one = MotCoeff::scalar(p, -1);
        self.entries.iter().enumerate().all(|(i, row)| {
            let d = &row[i];
            (d.is_one() || *d == minus_one) && row[i + 1..].iter().all(MotCoeff::is_zero)
        })
    }
}

fn letter_bidegree(p: Prime, g: Gen) -> Bidegree {
    match g {
        Gen::Beta => Bidegree::new(1, 0),
        Gen::P(n) => {
            let w = (p.value() as i64 - 1) * n as i64;
            Bidegree::new(2 * w, w)
        }
    }
}

/// Whether `d` is the bidegree of some coefficient `t^a r^b` (or of a scalar
/// at odd primes).
pub fn is_coefficient_bidegree(p: Prime, d: Bidegree) -> bool {
    if p.is_two() {
        d.degree >= 0 && d.weight >= d.degree
    } else {
        d == Bidegree::ZERO
    }
}

/// Index sequences `omega` with `<F, omega>` possibly nonzero for `F` of
/// bidegree `b`, in increasing order.
pub fn cone(p: Prime, b: Bidegree) -> Vec<DualMonomial> {
    cone_bounded(p, b, u32::MAX)
}

/// The part of `cone` using generators of index at most `max_index`.
///
/// Peeling `P^n` off a word lowers the largest index of the surviving right
/// factors by at most one and peeling `b` does not lower it, so a word with
/// `k` reduced powers pairs to zero with every monomial of index above `k`.
pub fn cone_bounded(p: Prime, b: Bidegree, max_index: u32) -> Vec<DualMonomial> {
    if b.weight < 0 {
        return vec![];
    }
    let weights = if p.is_two() {
        0..=b.weight as u64
    } else {
        b.weight as u64..=b.weight as u64
    };
    let mut out = Vec::new();
    for j in weights {
        out.extend(
            monomials_of_weight_bounded(p, j, max_index)
                .into_iter()
                .filter(|m| is_coefficient_bidegree(p, b - m.bidegree(p))),
        );
    }
    out.sort();
    out
}

fn power_count(gens: &[Gen]) -> u32 {
    gens.iter()
        .filter(|g| matches!(g, Gen::P(n) if *n > 0))
        .count() as u32
}

/// `Q(X)` at `l = 2`, indexed by the binary digits of `n`.
pub fn q_number(n: u64) -> DualMonomial {
    let set: Vec<u32> = (0..64).filter(|&k| n >> k & 1 == 1).collect();
    DualMonomial::tau_set(&set)
}

/// Number of carries when adding `a` and `b` in base 2.
pub fn sigma(a: u64, b: u64) -> u32 {
    carries(a, b, Prime::TWO)
}

/// Pairing, duality product and change of basis at a fixed prime.
pub struct Duality {
    prime: Prime,
    dual: DualAlgebra,
    extract_cache: DashMap<(DualMonomial, Gen, Bidegree), Arc<Vec<(DualMonomial, MotCoeff)>>>,
    pair_cache: DashMap<(Vec<Gen>, DualMonomial), MotCoeff>,
    gram_cache: DashMap<Bidegree, Arc<GramMatrix>>,
}

impl Duality {
    pub fn new(prime: Prime) -> Duality {
        Duality {
            prime,
            dual: DualAlgebra::new(prime),
            extract_cache: DashMap::new(),
            pair_cache: DashMap::new(),
            gram_cache: DashMap::new(),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn dual(&self) -> &DualAlgebra {
        &self.dual
    }

    fn check(&self, p: Prime) -> Result<()> {
        if p == self.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime.value(), p.value()))
        }
    }

    /// The terms `b * c` of `coproduct(omega)` whose left factor is the dual
    /// of the generator `g` and whose right factor lies below `right_bound`
    /// in both degrees.
    fn extract(
        &self,
        omega: &DualMonomial,
        g: Gen,
        right_bound: Bidegree,
    ) -> Arc<Vec<(DualMonomial, MotCoeff)>> {
        let key = (omega.clone(), g, right_bound);
        if let Some(v) = self.extract_cache.get(&key) {
            return v.clone();
        }
        let p = self.prime;
        let (target, bound) = match g {
            Gen::Beta => (
                DualMonomial::tau(0),
                FactorBound {
                    max_weight: 0,
                    max_degree: 1,
                    max_index: 0,
                    max_tau_index: 0,
                },
            ),
            Gen::P(n) => {
                let w = (p.value() as u64 - 1) * n as u64;
                (
                    DualMonomial::xi(1, n),
                    FactorBound {
                        max_weight: w,
                        max_degree: 2 * w,
                        max_index: 1,
                        max_tau_index: 0,
                    },
                )
            }
        };
        let right = FactorBound::bidegree(p, right_bound.degree as u64, right_bound.weight as u64);
        let bound = TensorBound {
            left: Some(bound),
            right: Some(right),
        };
        let psi = self.dual.monomial_coproduct(omega, bound);
        let v: Vec<_> = psi
            .terms()
            .iter()
            .filter(|((a, _), _)| *a == target)
            .map(|((_, b), c)| (b.clone(), c.clone()))
            .collect();
        let v = Arc::new(v);
        self.extract_cache.insert(key, v.clone());
        v
    }

    /// `<g_1 ... g_n, omega>`.
    pub fn pair_gens(&self, gens: &[Gen], omega: &DualMonomial) -> MotCoeff {
        let p = self.prime;
        let gens: Vec<Gen> = gens.iter().copied().filter(|g| *g != Gen::P(0)).collect();
        let total = gens
            .iter()
            .fold(Bidegree::ZERO, |acc, &g| acc + letter_bidegree(p, g));
        if !is_coefficient_bidegree(p, total - omega.bidegree(p)) {
            return MotCoeff::zero(p);
        }
        match gens.as_slice() {
            [] => {
                return if omega.is_one() {
                    MotCoeff::one(p)
                } else {
                    MotCoeff::zero(p)
                }
            }
            [Gen::Beta] => {
                return if *omega == DualMonomial::tau(0) {
                    MotCoeff::one(p)
                } else {
                    MotCoeff::zero(p)
                }
            }
            [Gen::P(n)] => {
                return if *omega == DualMonomial::xi(1, *n) {
                    MotCoeff::one(p)
                } else {
                    MotCoeff::zero(p)
                }
            }
            _ => {}
        }
        let key = (gens, omega.clone());
        if let Some(v) = self.pair_cache.get(&key) {
            return v.clone();
        }
        let (last, prefix) = key.0.split_last().unwrap();
        let prefix_bidegree = total - letter_bidegree(p, *last);
        let mut out = MotCoeff::zero(p);
        for (b, c) in self.extract(omega, *last, prefix_bidegree).iter() {
            let x = self.pair_gens(prefix, b);
            if !x.is_zero() {
                out += &(&x * c);
            }
        }
        self.pair_cache.insert(key, out.clone());
        out
    }

    /// `<w, omega>` for a word that may contain coefficients.
    pub fn pair_word(&self, word: &[Letter], omega: &DualMonomial) -> Result<MotCoeff> {
        let p = self.prime;
        let mut gens = Vec::new();
        let mut split = None;
        for (i, letter) in word.iter().enumerate().rev() {
            match letter {
                Letter::Beta => gens.push(Gen::Beta),
                Letter::P(n) => gens.push(Gen::P(*n)),
                Letter::Coeff(c) => {
                    self.check(c.prime())?;
                    split = Some((i, c));
                    break;
                }
            }
        }
        gens.reverse();
        let Some((i, c)) = split else {
            return Ok(self.pair_gens(&gens, omega));
        };
        let prefix = &word[..i];
        let mut bound = word.iter().fold(Bidegree::ZERO, |acc, l| match l {
            Letter::Beta => acc + letter_bidegree(p, Gen::Beta),
            Letter::P(n) => acc + letter_bidegree(p, Gen::P(*n)),
            Letter::Coeff(_) => acc,
        });
        // peel the generators after the last coefficient, then move the
        // coefficient into the dual side through the left unit
        let mut current: HashMap<DualMonomial, MotCoeff> =
            HashMap::from([(omega.clone(), MotCoeff::one(p))]);
        for g in gens.iter().rev().filter(|g| **g != Gen::P(0)) {
            bound = bound - letter_bidegree(p, *g);
            let mut next: HashMap<DualMonomial, MotCoeff> = HashMap::new();
            for (m, x) in &current {
                for (b, y) in self.extract(m, *g, bound).iter() {
                    let v = y * x;
                    next.entry(b.clone())
                        .or_insert_with(|| MotCoeff::zero(p))
                        .add_assign_ref(&v);
                }
            }
            next.retain(|_, x| !x.is_zero());
            current = next;
        }
        let twist = self.dual.lambda_star(c);
        let mut out = MotCoeff::zero(p);
        for (m, x) in &current {
            for (a, y) in twist.terms() {
                for (n, z) in self.dual.mul_monomials(a, m).iter() {
                    let v = self.pair_word(prefix, n)?;
                    if !v.is_zero() {
                        out += &(&(&v * z) * &(y * x));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `<e, omega>`, linear in the left coefficients of `e`.
    pub fn pair(&self, e: &SteenrodElement, omega: &DualMonomial) -> Result<MotCoeff> {
        self.check(e.prime())?;
        let mut out = MotCoeff::zero(self.prime);
        for (m, c) in e.terms() {
            let x = self.pair_gens(&m.gens(), omega);
            if !x.is_zero() {
                out += &(c * &x);
            }
        }
        Ok(out)
    }

    /// `<e, x>`, right linear in the coefficients of `x`.
    pub fn pair_element(&self, e: &SteenrodElement, x: &DualElement) -> Result<MotCoeff> {
        if x.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime.value(), x.prime().value()));
        }
        let mut out = MotCoeff::zero(self.prime);
        for (omega, c) in x.terms() {
            out += &(&self.pair(e, omega)? * c);
        }
        Ok(out)
    }

    /// `sum_omega <w, omega> rho(omega)` for a word.
    pub fn word_to_milnor(&self, word: &[Letter]) -> Result<MilnorElement> {
        let p = self.prime;
        let mut out = MilnorElement::zero(p);
        let split = word
            .iter()
            .position(|l| matches!(l, Letter::Coeff(c) if c.terms().len() > 1));
        if let Some(i) = split {
            let Letter::Coeff(c) = &word[i] else {
                unreachable!()
            };
            for part in c.monomials() {
                let mut w = word.to_vec();
                w[i] = Letter::Coeff(part);
                out = out.add(&self.word_to_milnor(&w)?);
            }
            return Ok(out);
        }
        let mut total = Bidegree::ZERO;
        let powers = word
            .iter()
            .filter(|l| matches!(l, Letter::P(n) if *n > 0))
            .count() as u32;
        for letter in word {
            total = total
                + match letter {
                    Letter::Beta => letter_bidegree(p, Gen::Beta),
                    Letter::P(n) => letter_bidegree(p, Gen::P(*n)),
                    Letter::Coeff(c) => match c.bidegree() {
                        Some(b) => b,
                        None => return Ok(out),
                    },
                };
        }
        for omega in cone_bounded(p, total, powers) {
            let c = self.pair_word(word, &omega)?;
            out.add_term(omega, &c);
        }
        Ok(out)
    }

    /// The Milnor expansion of `C D`, computed only from the pairing with the
    /// coproduct of the dual algebra.
    pub fn product_via_duality(&self, c: &[Letter], d: &[Letter]) -> Result<MilnorElement> {
        let word: Vec<Letter> = c.iter().chain(d).cloned().collect();
        self.word_to_milnor(&word)
    }

    /// `product_via_duality` extended bilinearly to admissible elements.
    pub fn product_via_duality_elements(
        &self,
        x: &SteenrodElement,
        y: &SteenrodElement,
    ) -> Result<MilnorElement> {
        let mut out = MilnorElement::zero(self.prime);
        for (m1, c1) in x.terms() {
            for (m2, c2) in y.terms() {
                let mut word = vec![Letter::Coeff(c1.clone())];
                word.extend(m1.letters());
                word.push(Letter::Coeff(c2.clone()));
                word.extend(m2.letters());
                out = out.add(&self.word_to_milnor(&word)?);
            }
        }
        Ok(out)
    }

    pub fn admissible_to_milnor(&self, e: &SteenrodElement) -> Result<MilnorElement> {
        self.check(e.prime())?;
        let p = self.prime;
        let mut out = MilnorElement::zero(p);
        for (m, c) in e.terms() {
            let gens = m.gens();
            for omega in cone_bounded(p, m.bidegree(p), power_count(&gens)) {
                let x = self.pair_gens(&gens, &omega);
                if !x.is_zero() {
                    out.add_term(omega, &(c * &x));
                }
            }
        }
        Ok(out)
    }

    /// Inverse of `admissible_to_milnor`, by back-substitution from the
    /// largest index sequence down.
    pub fn milnor_to_admissible(&self, x: &MilnorElement) -> Result<SteenrodElement> {
        self.check(x.prime())?;
        let p = self.prime;
        let mut parts: BTreeMap<Bidegree, MilnorElement> = BTreeMap::new();
        for (m, c) in x.terms() {
            for part in c.monomials() {
                let b = m.bidegree(p) + part.bidegree().unwrap();
                parts
                    .entry(b)
                    .or_insert_with(|| MilnorElement::zero(p))
                    .add_term(m.clone(), &part);
            }
        }
        let mut out = SteenrodElement::zero(p);
        for (b, part) in parts {
            let indices = cone(p, b);
            let mut solved: Vec<(Monomial, MotCoeff)> = Vec::new();
            for j in indices.iter().rev() {
                let mut rhs = part.coefficient(j);
                for (theta, mu) in &solved {
                    let x = self.pair_gens(&theta.gens(), j);
                    if !x.is_zero() {
                        rhs = &rhs - &(mu * &x);
                    }
                }
                if rhs.is_zero() {
                    continue;
                }
                let theta = Monomial::from_index(j, p);
                let diag = self.pair_gens(&theta.gens(), j);
                let inv = diag.as_scalar().filter(|&s| s != 0).ok_or_else(|| {
                    Error::Unsupported(format!("diagonal pairing at {j} is not a unit"))
                })?;
                let mu = rhs.scale(p.inv(inv));
                solved.push((theta, mu));
            }
            for (theta, mu) in solved {
                out.add_term(theta, &mu);
            }
        }
        Ok(out)
    }

    /// The Gram matrix of one bidegree, rows `theta(I)` and columns
    /// `omega(J)` in increasing order.
    pub fn gram(&self, b: Bidegree) -> Arc<GramMatrix> {
        if let Some(g) = self.gram_cache.get(&b) {
            return g.clone();
        }
        let p = self.prime;
        let indices = monomials_of_bidegree(p, b);
        let entries = indices
            .iter()
            .map(|i| {
                let gens = Monomial::from_index(i, p).gens();
                indices.iter().map(|j| self.pair_gens(&gens, j)).collect()
            })
            .collect();
        let g = Arc::new(GramMatrix {
            bidegree: b,
            indices,
            entries,
        });
        self.gram_cache.insert(b, g.clone());
        g
    }

    /// `Q(X)` for a set of indices.
    pub fn q_set(&self, set: &[u32]) -> MilnorElement {
        MilnorElement::basis(self.prime, DualMonomial::tau_set(set))
    }

    /// `q_n`, dual to `xi_n`.
    pub fn q_lower(&self, n: u32) -> MilnorElement {
        MilnorElement::basis(self.prime, DualMonomial::xi(n, 1))
    }

    /// `P^(r_1, r_2, ...)`.
    pub fn pm(&self, r: &[u32]) -> MilnorElement {
        MilnorElement::basis(self.prime, DualMonomial::from_parts(&[], r))
    }

    /// `M_k = P^{l^{k-1}} ... P^l P^1`.
    pub fn m_k(&self, k: u32) -> SteenrodElement {
        let p = self.prime;
        let gens: Vec<Gen> = (0..k).rev().map(|i| Gen::P(p.power(i) as u32)).collect();
        SteenrodElement::from_monomial(p, Monomial::from_gens(&gens).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::SteenrodAlgebra;

    #[test]
    fn base_pairings() {
        let d = Duality::new(Prime::TWO);
        let one = MotCoeff::one(Prime::TWO);
        assert_eq!(d.pair_gens(&[Gen::Beta], &DualMonomial::tau(0)), one);
        assert_eq!(d.pair_gens(&[Gen::P(3)], &DualMonomial::xi(1, 3)), one);
        assert!(d.pair_gens(&[], &DualMonomial::xi(1, 1)).is_zero());
    }

    #[test]
    fn small_grams() {
        for p in [Prime::TWO, Prime::THREE, Prime::new(5).unwrap()] {
            let d = Duality::new(p);
            let g = d.gram(Bidegree::new(1, 0));
            assert_eq!(g.indices, vec![DualMonomial::tau(0)]);
            assert!(g.is_unitriangular());
            let w = p.value() as i64 - 1;
            let g = d.gram(Bidegree::new(2 * w, w));
            assert_eq!(g.entries, vec![vec![MotCoeff::one(p)]]);
        }
    }

    #[test]
    fn q0_is_beta() {
        let d = Duality::new(Prime::TWO);
        let b = d.milnor_to_admissible(&d.q_set(&[0])).unwrap();
        assert_eq!(b.to_string(), "Sq^1");
    }

    #[test]
    fn q1_at_two() {
        let d = Duality::new(Prime::TWO);
        let q1 = d.milnor_to_admissible(&d.q_set(&[1])).unwrap();
        assert_eq!(q1.to_string(), "Sq^3 + Sq^2 Sq^1");
    }

    #[test]
    fn duality_matches_adem_on_sq2_sq2() {
        let d = Duality::new(Prime::TWO);
        let a = SteenrodAlgebra::new(Prime::TWO);
        let w = [Letter::P(1), Letter::P(1)];
        let lhs = d.product_via_duality(&w[..1], &w[1..]).unwrap();
        let rhs = d.admissible_to_milnor(&a.normalize(&w).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let back = d.milnor_to_admissible(&lhs).unwrap();
        assert_eq!(back.to_string(), "t Sq^3 Sq^1");
    }
}
