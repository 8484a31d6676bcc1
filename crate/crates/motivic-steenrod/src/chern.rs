//! Operations on Chern and Thom classes through symmetric functions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::coeff::Prime;
use crate::error::{Error, Result};

type Terms = BTreeMap<Vec<u32>, u32>;

fn add_into(p: Prime, acc: &mut Terms, e: Vec<u32>, c: u32) {
    let c = c % p.value();
    if c == 0 {
        return;
    }
    let slot = acc.entry(e.clone()).or_insert(0);
    *slot = p.add(*slot, c);
    if *slot == 0 {
        acc.remove(&e);
    }
}

fn mul_terms(p: Prime, a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (x, c) in a {
        for (y, d) in b {
            let e = x.iter().zip(y).map(|(i, j)| i + j).collect();
            add_into(p, &mut out, e, p.mul(*c, *d));
        }
    }
    out
}

/// A polynomial in `X_1, ..., X_d` over `F_l`, symmetric under permutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymPoly {
    prime: Prime,
    d: usize,
    terms: Terms,
}

impl SymPoly {
    /// Fails unless the polynomial is symmetric.
    pub fn new(
        prime: Prime,
        d: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, u32)>,
    ) -> Result<SymPoly> {
        let mut acc = Terms::new();
        for (e, c) in terms {
            if e.len() != d {
                return Err(Error::InvalidRing(format!(
                    "exponent vector of length {} for d = {d}",
                    e.len()
                )));
            }
            add_into(prime, &mut acc, e, c);
        }
        let p = SymPoly {
            prime,
            d,
            terms: acc,
        };
        if !p.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(p)
    }

    fn from_terms(prime: Prime, d: usize, terms: Terms) -> SymPoly {
        SymPoly { prime, d, terms }
    }

    pub fn zero(prime: Prime, d: usize) -> SymPoly {
        SymPoly::from_terms(prime, d, Terms::new())
    }

    pub fn one(prime: Prime, d: usize) -> SymPoly {
        SymPoly::from_terms(prime, d, Terms::from([(vec![0; d], 1)]))
    }

    /// The elementary symmetric polynomial `S_j`.
    pub fn elementary(prime: Prime, d: usize, j: usize) -> SymPoly {
        let mut terms = Terms::new();
        if j <= d {
            for mask in 0u64..1 << d {
                if mask.count_ones() as usize == j {
                    terms.insert((0..d).map(|i| (mask >> i & 1) as u32).collect(), 1);
                }
            }
        }
        SymPoly::from_terms(prime, d, terms)
    }

    /// `X_1^j + ... + X_d^j`.
    pub fn power_sum(prime: Prime, d: usize, j: u32) -> SymPoly {
        let mut terms = Terms::new();
        for i in 0..d {
            let mut e = vec![0; d];
            e[i] = j;
            add_into(prime, &mut terms, e, 1);
        }
        SymPoly::from_terms(prime, d, terms)
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn vars(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, u32> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|(e, c)| {
            (0..self.d.saturating_sub(1)).all(|i| {
                let mut f = e.clone();
                f.swap(i, i + 1);
                self.terms.get(&f) == Some(c)
            })
        })
    }

    pub fn add(&self, other: &SymPoly) -> SymPoly {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            add_into(self.prime, &mut terms, e.clone(), *c);
        }
        SymPoly::from_terms(self.prime, self.d, terms)
    }

    pub fn scale(&self, c: u32) -> SymPoly {
        let mut terms = Terms::new();
        for (e, x) in &self.terms {
            add_into(
                self.prime,
                &mut terms,
                e.clone(),
                self.prime.mul(*x, c % self.prime.value()),
            );
        }
        SymPoly::from_terms(self.prime, self.d, terms)
    }

    pub fn mul(&self, other: &SymPoly) -> SymPoly {
        SymPoly::from_terms(
            self.prime,
            self.d,
            mul_terms(self.prime, &self.terms, &other.terms),
        )
    }

    /// Total degree of each term, if all agree.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = it.next()?;
        it.all(|x| x == first).then_some(first)
    }
}

/// A polynomial in Chern classes `C_1, ..., C_d` over `F_l`; `C_j` has
/// bidegree `(2j, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChernPoly {
    prime: Prime,
    d: usize,
    terms: Terms,
}

impl ChernPoly {
    pub fn new(
        prime: Prime,
        d: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, u32)>,
    ) -> Result<ChernPoly> {
        let mut acc = Terms::new();
        for (e, c) in terms {
            if e.len() != d {
                return Err(Error::InvalidRing(format!(
                    "exponent vector of length {} for d = {d}",
                    e.len()
                )));
            }
            add_into(prime, &mut acc, e, c);
        }
        Ok(ChernPoly {
            prime,
            d,
            terms: acc,
        })
    }

    pub fn zero(prime: Prime, d: usize) -> ChernPoly {
        ChernPoly {
            prime,
            d,
            terms: Terms::new(),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, u32> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Weighted degree `sum j a_j` of each term, if all agree.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| {
            e.iter()
                .enumerate()
                .map(|(j, a)| (j as u32 + 1) * a)
                .sum::<u32>()
        });
        let first = it.next()?;
        it.all(|x| x == first).then_some(first)
    }

    /// Substitutes the elementary symmetric polynomials for the `C_j`.
    pub fn recompose(&self) -> SymPoly {
        let mut cache = ElementaryProducts::new(self.prime, self.d);
        let mut out = SymPoly::zero(self.prime, self.d);
        for (e, c) in &self.terms {
            out = out.add(&cache.get(e).scale(*c));
        }
        out
    }

    /// The same polynomial viewed in rank `d`, dropping `C_j` with `j > d`.
    pub fn with_rank(&self, d: usize) -> ChernPoly {
        let mut terms = Terms::new();
        for (e, c) in &self.terms {
            if e[d.min(e.len())..].iter().all(|&a| a == 0) {
                let mut f = e[..d.min(e.len())].to_vec();
                f.resize(d, 0);
                add_into(self.prime, &mut terms, f, *c);
            }
        }
        ChernPoly {
            prime: self.prime,
            d,
            terms,
        }
    }

    /// Monomials as maps `"c{j}" -> exponent`.
    pub fn exponent_maps(&self) -> Vec<(BTreeMap<String, u32>, u32)> {
        self.sorted_terms()
            .into_iter()
            .map(|(e, c)| {
                let m = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0)
                    .map(|(j, &a)| (format!("c{}", j + 1), a))
                    .collect();
                (m, c)
            })
            .collect()
    }

    /// Terms by descending weighted degree, then descending exponents.
    pub fn sorted_terms(&self) -> Vec<(Vec<u32>, u32)> {
        let deg = |e: &Vec<u32>| {
            e.iter()
                .enumerate()
                .map(|(j, a)| (j as u32 + 1) * a)
                .sum::<u32>()
        };
        let mut v: Vec<_> = self.terms.iter().map(|(e, c)| (e.clone(), *c)).collect();
        v.sort_by(|(a, _), (b, _)| deg(b).cmp(&deg(a)).then_with(|| b.cmp(a)));
        v
    }
}

pub fn monomial_name(e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(j, &a)| {
            if a == 1 {
                format!("c{}", j + 1)
            } else {
                format!("c{}^{a}", j + 1)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" ")
    }
}

impl fmt::Display for ChernPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .sorted_terms()
            .into_iter()
            .map(|(e, c)| {
                let name = monomial_name(&e);
                match (c, name.as_str()) {
                    (1, _) => name,
                    (_, "1") => c.to_string(),
                    _ => format!("{c} {name}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

struct ElementaryProducts {
    prime: Prime,
    d: usize,
    elementary: Vec<SymPoly>,
    cache: HashMap<Vec<u32>, SymPoly>,
}

impl ElementaryProducts {
    fn new(prime: Prime, d: usize) -> ElementaryProducts {
        let elementary = (0..=d).map(|j| SymPoly::elementary(prime, d, j)).collect();
        ElementaryProducts {
            prime,
            d,
            elementary,
            cache: HashMap::new(),
        }
    }

    /// `S_1^{e_1} ... S_d^{e_d}`.
    fn get(&mut self, e: &[u32]) -> SymPoly {
        if let Some(x) = self.cache.get(e) {
            return x.clone();
        }
        let out = match e.iter().rposition(|&a| a > 0) {
            None => SymPoly::one(self.prime, self.d),
            Some(j) => {
                let mut f = e.to_vec();
                f[j] -= 1;
                self.get(&f).mul(&self.elementary[j + 1])
            }
        };
        self.cache.insert(e.to_vec(), out.clone());
        out
    }
}

fn is_dominant(e: &[u32]) -> bool {
    e.windows(2).all(|w| w[0] >= w[1])
}

fn dominant_part(t: &Terms) -> Terms {
    t.iter()
        .filter(|(e, _)| is_dominant(e))
        .map(|(e, &c)| (e.clone(), c))
        .collect()
}

/// Products of elementary polynomials, keeping only non-increasing exponent
/// vectors; a symmetric polynomial is determined by these.
struct DominantProducts {
    prime: Prime,
    d: usize,
    subsets: Vec<Vec<Vec<usize>>>,
    cache: HashMap<Vec<u32>, Terms>,
}

impl DominantProducts {
    fn new(prime: Prime, d: usize) -> DominantProducts {
        let mut subsets = vec![Vec::new(); d + 1];
        for mask in 0u64..1 << d {
            subsets[mask.count_ones() as usize]
                .push((0..d).filter(|i| mask >> i & 1 == 1).collect());
        }
        DominantProducts {
            prime,
            d,
            subsets,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, e: &[u32]) -> Terms {
        if let Some(x) = self.cache.get(e) {
            return x.clone();
        }
        let out = match e.iter().rposition(|&a| a > 0) {
            None => Terms::from([(vec![0; self.d], 1)]),
            Some(j) => {
                let mut f = e.to_vec();
                f[j] -= 1;
                let g = self.get(&f);
                self.times_elementary(&g, j + 1)
            }
        };
        self.cache.insert(e.to_vec(), out.clone());
        out
    }

    fn times_elementary(&self, g: &Terms, j: usize) -> Terms {
        let p = self.prime;
        let mut candidates = std::collections::BTreeSet::new();
        for mu in g.keys() {
            for set in &self.subsets[j] {
                let mut lam = mu.clone();
                for &i in set {
                    lam[i] += 1;
                }
                lam.sort_unstable_by(|a, b| b.cmp(a));
                candidates.insert(lam);
            }
        }
        let mut out = Terms::new();
        for lam in candidates {
            let mut c = 0;
            for set in &self.subsets[j] {
                if set.iter().any(|&i| lam[i] == 0) {
                    continue;
                }
                let mut mu = lam.clone();
                for &i in set {
                    mu[i] -= 1;
                }
                mu.sort_unstable_by(|a, b| b.cmp(a));
                if let Some(&x) = g.get(&mu) {
                    c = p.add(c, x);
                }
            }
            add_into(p, &mut out, lam, c);
        }
        out
    }
}

/// The unique `R` with `p = R(S_1, ..., S_d)`, by repeatedly cancelling the
/// lexicographically largest monomial.
pub fn decompose_symmetric(p: &SymPoly) -> Result<ChernPoly> {
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let (prime, d) = (p.prime, p.d);
    let mut products = DominantProducts::new(prime, d);
    let mut rest = dominant_part(&p.terms);
    let mut out = Terms::new();
    while let Some((lead, &c)) = rest.iter().next_back() {
        let e: Vec<u32> = (0..d)
            .map(|j| lead[j] - lead.get(j + 1).copied().unwrap_or(0))
            .collect();
        for (m, x) in products.get(&e) {
            add_into(prime, &mut rest, m, prime.neg(prime.mul(x, c)));
        }
        add_into(prime, &mut out, e, c);
    }
    Ok(ChernPoly {
        prime,
        d,
        terms: out,
    })
}

/// Assignments of `xi` indices to `slots` positions whose product is
/// `xi^r`, each given as the index per position.
fn xi_assignments(r: &[u32], slots: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut left: Vec<u32> = r.to_vec();
    let mut current = Vec::with_capacity(slots);
    fn go(
        left: &mut Vec<u32>,
        remaining: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let needed: u32 = left.iter().sum();
        if needed as usize > remaining {
            return;
        }
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        current.push(0);
        go(left, remaining - 1, current, out);
        current.pop();
        for m in 0..left.len() {
            if left[m] > 0 {
                left[m] -= 1;
                current.push(m + 1);
                go(left, remaining - 1, current, out);
                current.pop();
                left[m] += 1;
            }
        }
    }
    go(&mut left, slots, &mut current, &mut out);
    out
}

/// The symmetric polynomial giving `P^{(r)}(c_i)` for bundles of rank at
/// most `d`.
pub fn chern_polynomial(r: &[u32], i: usize, d: usize, prime: Prime) -> SymPoly {
    let mut terms = Terms::new();
    if i <= d {
        for mask in 0u64..1 << d {
            if mask.count_ones() as usize != i {
                continue;
            }
            let chosen: Vec<usize> = (0..d).filter(|j| mask >> j & 1 == 1).collect();
            for k in xi_assignments(r, i) {
                let mut e = vec![0; d];
                for (&j, &kj) in chosen.iter().zip(&k) {
                    e[j] = prime.power(kj as u32) as u32;
                }
                add_into(prime, &mut terms, e, 1);
            }
        }
    }
    SymPoly::from_terms(prime, d, terms)
}

/// The symmetric polynomial giving the multiplier of `t_V` in
/// `P^{(r)}(t_V)` for bundles of rank at most `d`.
pub fn thom_polynomial(r: &[u32], d: usize, prime: Prime) -> SymPoly {
    let mut terms = Terms::new();
    for k in xi_assignments(r, d) {
        let e = k
            .iter()
            .map(|&kj| prime.power(kj as u32) as u32 - 1)
            .collect();
        add_into(prime, &mut terms, e, 1);
    }
    SymPoly::from_terms(prime, d, terms)
}

/// `P^{(r)}(c_i(V))` as a polynomial in the Chern classes of `V`.
pub fn chern_action(r: &[u32], i: usize, d: usize, prime: Prime) -> ChernPoly {
    decompose_symmetric(&chern_polynomial(r, i, d, prime)).expect("symmetric by construction")
}

/// `R` with `P^{(r)}(t_V) = R(c_1(V), ..., c_d(V)) t_V`.
pub fn thom_action(r: &[u32], d: usize, prime: Prime) -> ChernPoly {
    decompose_symmetric(&thom_polynomial(r, d, prime)).expect("symmetric by construction")
}

/// The class `s_j(V)`: the power sum `X_1^j + ... + X_d^j` in Chern classes.
pub fn power_sum_class(j: u32, d: usize, prime: Prime) -> ChernPoly {
    decompose_symmetric(&SymPoly::power_sum(prime, d, j)).expect("symmetric by construction")
}

/// Rank from which `thom_action(r, d)` no longer depends on `d`.
pub fn thom_stable_rank(r: &[u32], prime: Prime) -> usize {
    r.iter()
        .enumerate()
        .map(|(i, &ri)| (prime.power(i as u32 + 1) as usize - 1) * ri as usize)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> Prime {
        Prime::new(2).unwrap()
    }

    #[test]
    fn small_decompositions() {
        let p = two();
        let x1x2 = SymPoly::new(p, 2, [(vec![1, 1], 1)]).unwrap();
        assert_eq!(decompose_symmetric(&x1x2).unwrap().to_string(), "c2");
        assert_eq!(
            decompose_symmetric(&SymPoly::power_sum(p, 2, 2))
                .unwrap()
                .to_string(),
            "c1^2"
        );
        assert_eq!(
            decompose_symmetric(&SymPoly::elementary(p, 3, 1))
                .unwrap()
                .to_string(),
            "c1"
        );
        assert!(matches!(
            SymPoly::new(p, 2, [(vec![2, 0], 1)]),
            Err(Error::NotSymmetric)
        ));
    }

    #[test]
    fn rank_one_and_two() {
        let p = two();
        assert_eq!(chern_action(&[], 1, 3, p).to_string(), "c1");
        assert_eq!(chern_action(&[1], 1, 2, p).to_string(), "c1^2");
        let three = Prime::new(3).unwrap();
        assert_eq!(chern_action(&[1], 1, 1, three).to_string(), "c1^3");
        assert_eq!(thom_action(&[], 4, p).to_string(), "1");
        assert_eq!(thom_action(&[1], 2, p).to_string(), "c1");
        assert_eq!(thom_action(&[1], 1, three).to_string(), "c1^2");
    }
}
