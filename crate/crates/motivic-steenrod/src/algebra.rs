//! Admissible monomials in the Bockstein and the reduced powers, the Adem
//! rewriting engine, composition with coefficients, and the coproduct.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use dashmap::DashMap;

use crate::coeff::{binom_mod_signed, Bidegree, MotCoeff, Prime};
use crate::dual::DualMonomial;
use crate::error::{Error, Result};

/// A generator of the algebra: the Bockstein or a reduced power `P^n`, `n > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Beta,
    P(u32),
}

/// A letter of an input word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    Beta,
    /// `P^0` is the identity.
    P(u32),
    Coeff(MotCoeff),
}

impl From<Gen> for Letter {
    fn from(g: Gen) -> Letter {
        match g {
            Gen::Beta => Letter::Beta,
            Gen::P(n) => Letter::P(n),
        }
    }
}

/// `b^{e_0} P^{s_1} b^{e_1} ... P^{s_k} b^{e_k}` with every `s_i > 0`.
///
/// Bit `i` of `bocksteins` is `e_i`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    powers: Vec<u32>,
    bocksteins: u64,
}

impl Monomial {
    pub fn identity() -> Monomial {
        Monomial::default()
    }

    pub fn beta() -> Monomial {
        Monomial {
            powers: vec![],
            bocksteins: 1,
        }
    }

    pub fn power(s: u32) -> Monomial {
        if s == 0 {
            Monomial::identity()
        } else {
            Monomial {
                powers: vec![s],
                bocksteins: 0,
            }
        }
    }

    /// From `eps = (e_0, ..., e_k)` and `s = (s_1, ..., s_k)`.
    pub fn new(eps: &[bool], s: &[u32]) -> Result<Monomial> {
        if eps.len() != s.len() + 1 {
            return Err(Error::Unsupported(format!(
                "expected {} Bockstein exponents, got {}",
                s.len() + 1,
                eps.len()
            )));
        }
        if s.contains(&0) {
            return Err(Error::Unsupported(
                "reduced power exponents must be positive".into(),
            ));
        }
        if eps.len() > 64 {
            return Err(Error::Unsupported("monomial too long".into()));
        }
        let bocksteins = eps
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &e)| acc | u64::from(e) << i);
        Ok(Monomial {
            powers: s.to_vec(),
            bocksteins,
        })
    }

    /// Collapses a generator word; `None` when two Bocksteins meet.
    pub fn from_gens(gens: &[Gen]) -> Option<Monomial> {
        let mut m = Monomial::identity();
        for g in gens {
            match *g {
                Gen::Beta => {
                    let slot = m.powers.len();
                    if m.bocksteins >> slot & 1 == 1 {
                        return None;
                    }
                    m.bocksteins |= 1 << slot;
                }
                Gen::P(0) => {}
                Gen::P(s) => m.powers.push(s),
            }
        }
        Some(m)
    }

    /// Reads `Sq^{a_1} ... Sq^{a_n}` (`Sq^{2n} = P^n`, `Sq^{2n+1} = b P^n`).
    pub fn from_sq(seq: &[u32]) -> Option<Monomial> {
        let mut gens = Vec::new();
        for &a in seq {
            if a % 2 == 1 {
                gens.push(Gen::Beta);
            }
            gens.push(Gen::P(a / 2));
        }
        Monomial::from_gens(&gens)
    }

    /// The `Sq` sequence at `l = 2`.
    pub fn to_sq(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (i, &s) in self.powers.iter().enumerate() {
            out.push(2 * s + u32::from(self.eps(i)));
        }
        if self.eps(self.powers.len()) {
            out.push(1);
        }
        out
    }

    /// Number of reduced powers.
    #[inline]
    pub fn k(&self) -> usize {
        self.powers.len()
    }

    #[inline]
    pub fn eps(&self, i: usize) -> bool {
        self.bocksteins >> i & 1 == 1
    }

    /// `s_i` for `1 <= i <= k`.
    #[inline]
    pub fn s(&self, i: usize) -> u32 {
        self.powers[i - 1]
    }

    pub fn powers(&self) -> &[u32] {
        &self.powers
    }

    pub fn is_identity(&self) -> bool {
        self.powers.is_empty() && self.bocksteins == 0
    }

    pub fn bockstein_count(&self) -> u32 {
        self.bocksteins.count_ones()
    }

    pub fn gens(&self) -> Vec<Gen> {
        let mut out = Vec::with_capacity(2 * self.powers.len() + 1);
        for (i, &s) in self.powers.iter().enumerate() {
            if self.eps(i) {
                out.push(Gen::Beta);
            }
            out.push(Gen::P(s));
        }
        if self.eps(self.powers.len()) {
            out.push(Gen::Beta);
        }
        out
    }

    pub fn letters(&self) -> Vec<Letter> {
        self.gens().into_iter().map(Letter::from).collect()
    }

    pub fn weight(&self, p: Prime) -> u64 {
        (p.value() as u64 - 1) * self.powers.iter().map(|&s| s as u64).sum::<u64>()
    }

    pub fn bidegree(&self, p: Prime) -> Bidegree {
        let w = self.weight(p) as i64;
        Bidegree::new(2 * w + self.bockstein_count() as i64, w)
    }

    /// Parity of the topological degree.
    pub fn is_odd(&self) -> bool {
        self.bockstein_count() % 2 == 1
    }

    pub fn is_admissible(&self, p: Prime) -> bool {
        let l = p.value() as u64;
        (1..self.powers.len())
            .all(|i| self.s(i) as u64 >= l * self.s(i + 1) as u64 + u64::from(self.eps(i)))
    }

    fn with_beta_front(&self) -> Option<Monomial> {
        (!self.eps(0)).then(|| Monomial {
            powers: self.powers.clone(),
            bocksteins: self.bocksteins | 1,
        })
    }

    fn with_power_front(&self, a: u32) -> Monomial {
        let mut powers = Vec::with_capacity(self.powers.len() + 1);
        powers.push(a);
        powers.extend_from_slice(&self.powers);
        Monomial {
            powers,
            bocksteins: self.bocksteins << 1,
        }
    }

    /// Drops `b^{e_0} P^{s_1}`.
    fn tail(&self) -> Monomial {
        Monomial {
            powers: self.powers[1..].to_vec(),
            bocksteins: self.bocksteins >> 1,
        }
    }

    /// Index sequence `(e_i, r_i)` with `r_i = s_i - l s_{i+1} - e_i` of an
    /// admissible monomial.
    pub fn index(&self, p: Prime) -> DualMonomial {
        let l = p.value();
        let k = self.powers.len();
        let eps: Vec<bool> = (0..=k).map(|i| self.eps(i)).collect();
        let r: Vec<u32> = (1..=k)
            .map(|i| {
                let next = if i < k { l * self.s(i + 1) } else { 0 };
                self.s(i) - next - u32::from(self.eps(i))
            })
            .collect();
        DualMonomial::from_parts(&eps, &r)
    }

    /// The admissible monomial with the given index sequence.
    pub fn from_index(index: &DualMonomial, p: Prime) -> Monomial {
        let l = p.value() as u64;
        let k = index.len().saturating_sub(1) as usize;
        let k = (1..=k)
            .rev()
            .find(|&i| index.eps(i as u32) || index.r(i as u32) > 0)
            .unwrap_or(0);
        let mut powers = vec![0u32; k];
        let mut acc = 0u64;
        for i in (1..=k).rev() {
            acc = acc * l + index.r(i as u32) as u64 + u64::from(index.eps(i as u32));
            powers[i - 1] = acc as u32;
        }
        let bocksteins = (0..=k).fold(0u64, |b, i| b | u64::from(index.eps(i as u32)) << i);
        Monomial { powers, bocksteins }
    }

    pub fn display(&self, p: Prime) -> MonomialDisplay<'_> {
        MonomialDisplay { m: self, p }
    }
}

pub struct MonomialDisplay<'a> {
    m: &'a Monomial,
    p: Prime,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m.is_identity() {
            return write!(f, "1");
        }
        let parts: Vec<String> = if self.p.is_two() {
            self.m.to_sq().iter().map(|a| format!("Sq^{a}")).collect()
        } else {
            self.m
                .gens()
                .iter()
                .map(|g| match g {
                    Gen::Beta => "b".to_string(),
                    Gen::P(n) => format!("P^{n}"),
                })
                .collect()
        };
        write!(f, "{}", parts.join(" "))
    }
}

/// Renders `coefficient * monomial`, one string per coefficient term.
pub(crate) fn render_left(m: &str, is_unit: bool, c: &MotCoeff) -> Vec<String> {
    c.terms()
        .iter()
        .map(|term| {
            let head = term.to_string();
            if is_unit {
                head
            } else if head == "1" {
                m.to_string()
            } else {
                format!("{head} {m}")
            }
        })
        .collect()
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, MotCoeff>, key: K, c: &MotCoeff) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&key) {
        Some(x) => {
            x.add_assign_ref(c);
            if x.is_zero() {
                map.remove(&key);
            }
        }
        None => {
            map.insert(key, c.clone());
        }
    }
}

/// Left-coefficient combination of admissible monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteenrodElement {
    prime: Prime,
    terms: BTreeMap<Monomial, MotCoeff>,
}

impl SteenrodElement {
    pub fn zero(prime: Prime) -> SteenrodElement {
        SteenrodElement {
            prime,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(prime: Prime) -> SteenrodElement {
        SteenrodElement::from_monomial(prime, Monomial::identity())
    }

    /// A single monomial, which must be admissible.
    pub fn from_monomial(prime: Prime, m: Monomial) -> SteenrodElement {
        debug_assert!(m.is_admissible(prime));
        let mut e = SteenrodElement::zero(prime);
        e.add_term(m, &MotCoeff::one(prime));
        e
    }

    pub fn coefficient_times_identity(c: &MotCoeff) -> SteenrodElement {
        let mut e = SteenrodElement::zero(c.prime());
        e.add_term(Monomial::identity(), c);
        e
    }

    pub fn from_terms(
        prime: Prime,
        terms: impl IntoIterator<Item = (Monomial, MotCoeff)>,
    ) -> SteenrodElement {
        let mut e = SteenrodElement::zero(prime);
        for (m, c) in terms {
            e.add_term(m, &c);
        }
        e
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, MotCoeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> MotCoeff {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| MotCoeff::zero(self.prime))
    }

    pub fn add_term(&mut self, m: Monomial, c: &MotCoeff) {
        add_into(&mut self.terms, m, c);
    }

    pub fn add_scaled(&mut self, other: &SteenrodElement, c: &MotCoeff) {
        if c.is_zero() {
            return;
        }
        if c.is_one() {
            for (m, x) in &other.terms {
                self.add_term(m.clone(), x);
            }
        } else {
            for (m, x) in &other.terms {
                self.add_term(m.clone(), &(c * x));
            }
        }
    }

    pub fn add(&self, other: &SteenrodElement) -> SteenrodElement {
        let mut out = self.clone();
        out.add_scaled(other, &MotCoeff::one(self.prime));
        out
    }

    pub fn sub(&self, other: &SteenrodElement) -> SteenrodElement {
        let mut out = self.clone();
        out.add_scaled(other, &MotCoeff::scalar(self.prime, -1));
        out
    }

    /// Left multiplication by a coefficient.
    pub fn scale(&self, c: &MotCoeff) -> SteenrodElement {
        let mut out = SteenrodElement::zero(self.prime);
        out.add_scaled(self, c);
        out
    }

    /// Bidegree of a homogeneous nonzero element.
    pub fn bidegree(&self) -> Option<Bidegree> {
        let mut out = None;
        for (b, _) in self.homogeneous_parts() {
            if out.replace(b).is_some() {
                return None;
            }
        }
        out
    }

    /// Splits by total bidegree (coefficient plus monomial).
    pub fn homogeneous_parts(&self) -> BTreeMap<Bidegree, SteenrodElement> {
        let mut out: BTreeMap<Bidegree, SteenrodElement> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mb = m.bidegree(self.prime);
            for part in c.monomials() {
                let b = mb + part.bidegree().unwrap();
                out.entry(b)
                    .or_insert_with(|| SteenrodElement::zero(self.prime))
                    .add_term(m.clone(), &part);
            }
        }
        out
    }

    /// Terms in increasing order of their index sequences.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &MotCoeff)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_cached_key(|(m, _)| m.index(self.prime));
        v
    }

    /// Evaluates every coefficient at `t = 1`, `r = 0`.
    pub fn specialize_classical(&self) -> ClassicalElement {
        let p = self.prime;
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = c.specialize(1, 0);
            if v != 0 {
                terms.insert(m.clone(), v);
            }
        }
        ClassicalElement { prime: p, terms }
    }
}

impl fmt::Display for SteenrodElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .sorted_terms()
            .into_iter()
            .flat_map(|(m, c)| render_left(&m.display(self.prime).to_string(), m.is_identity(), c))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// An element of the classical Steenrod algebra on the admissible basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalElement {
    pub prime: Prime,
    pub terms: BTreeMap<Monomial, u32>,
}

impl fmt::Display for ClassicalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, &c)| {
                let s = m.display(self.prime).to_string();
                if c == 1 {
                    s
                } else if m.is_identity() {
                    c.to_string()
                } else {
                    format!("{c} {s}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `sum c * (C (x) D)`, coefficients in front.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteenrodTensor {
    prime: Prime,
    terms: BTreeMap<(Monomial, Monomial), MotCoeff>,
}

impl SteenrodTensor {
    pub fn zero(prime: Prime) -> SteenrodTensor {
        SteenrodTensor {
            prime,
            terms: BTreeMap::new(),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn terms(&self) -> &BTreeMap<(Monomial, Monomial), MotCoeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, a: Monomial, b: Monomial, c: &MotCoeff) {
        add_into(&mut self.terms, (a, b), c);
    }

    pub fn add(&self, other: &SteenrodTensor) -> SteenrodTensor {
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.add_term(a.clone(), b.clone(), c);
        }
        out
    }

    /// `c (x) d  ->  (-1)^{|c||d|} d (x) c`.
    pub fn flip(&self) -> SteenrodTensor {
        let mut out = SteenrodTensor::zero(self.prime);
        for ((a, b), c) in &self.terms {
            let c = if a.is_odd() && b.is_odd() {
                -c
            } else {
                c.clone()
            };
            out.add_term(b.clone(), a.clone(), &c);
        }
        out
    }

    /// Tensor product of two elements.
    pub fn product(x: &SteenrodElement, y: &SteenrodElement) -> SteenrodTensor {
        let mut out = SteenrodTensor::zero(x.prime);
        for (a, c) in &x.terms {
            for (b, d) in &y.terms {
                out.add_term(a.clone(), b.clone(), &(c * d));
            }
        }
        out
    }
}

impl fmt::Display for SteenrodTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let p = self.prime;
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by_cached_key(|((a, b), _)| (a.index(p), b.index(p)));
        let parts: Vec<String> = keys
            .into_iter()
            .flat_map(|((a, b), c)| {
                let body = format!("{} ⊗ {}", a.display(p), b.display(p));
                render_left(&body, false, c)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Values `P^i(t^a)` and `B^i(t^a) = b P^i(t^a)` on the coefficient ring.
#[derive(Clone, Debug)]
struct CoeffTotal {
    p: Vec<MotCoeff>,
    b: Vec<MotCoeff>,
}

impl CoeffTotal {
    fn p(&self, i: usize) -> Option<&MotCoeff> {
        self.p.get(i).filter(|c| !c.is_zero())
    }
    fn b(&self, i: usize) -> Option<&MotCoeff> {
        self.b.get(i).filter(|c| !c.is_zero())
    }
}

/// The Adem engine at a fixed prime. Caches are write-once per key and safe
/// to share across threads.
pub struct SteenrodAlgebra {
    prime: Prime,
    adem_cache: DashMap<(u32, bool, u32), Arc<SteenrodElement>>,
    gen_cache: DashMap<(Gen, Monomial), Arc<SteenrodElement>>,
    coproduct_cache: DashMap<Monomial, Arc<SteenrodTensor>>,
    tau_totals: RwLock<Vec<Arc<CoeffTotal>>>,
}

impl SteenrodAlgebra {
    pub fn new(prime: Prime) -> SteenrodAlgebra {
        let one = MotCoeff::one(prime);
        SteenrodAlgebra {
            prime,
            adem_cache: DashMap::new(),
            gen_cache: DashMap::new(),
            coproduct_cache: DashMap::new(),
            tau_totals: RwLock::new(vec![Arc::new(CoeffTotal {
                p: vec![one],
                b: vec![],
            })]),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    fn check(&self, p: Prime) -> Result<()> {
        if p == self.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime.value(), p.value()))
        }
    }

    fn monomial_element(&self, m: Monomial) -> SteenrodElement {
        SteenrodElement::from_monomial(self.prime, m)
    }

    /// `sum_j c_j Sq^{x_j} Sq^{y_j}` as an admissible element.
    fn from_sq_pairs(&self, pairs: Vec<(MotCoeff, u32, u32)>) -> SteenrodElement {
        let mut out = SteenrodElement::zero(self.prime);
        for (c, x, y) in pairs {
            if let Some(m) = Monomial::from_sq(&[x, y]) {
                debug_assert!(m.is_admissible(self.prime));
                out.add_term(m, &c);
            }
        }
        out
    }

    /// Adem relation for `Sq^x Sq^y`, `0 < x < 2y`, at `l = 2`.
    pub fn adem_sq(&self, x: u32, y: u32) -> Result<SteenrodElement> {
        if !self.prime.is_two() {
            return Err(Error::Unsupported(
                "Sq is only available at the prime 2".into(),
            ));
        }
        if x == 0 || x >= 2 * y {
            return Err(Error::AdemRange(format!(
                "Sq^{x} Sq^{y} is not in the range 0 < x < 2y"
            )));
        }
        let p = self.prime;
        let (xi, yi) = (x as i64, y as i64);
        let c =
            |top: i64, bottom: i64| MotCoeff::scalar(p, binom_mod_signed(top, bottom, p) as i64);
        let tau = MotCoeff::tau();
        let rho = MotCoeff::rho();
        let mut pairs = Vec::new();
        for j in 0..=(x / 2) {
            let ji = j as i64;
            let odd = j % 2 == 1;
            let main = c(yi - 1 - ji, xi - 2 * ji);
            match (x.is_multiple_of(2), y.is_multiple_of(2)) {
                (true, false) => {
                    pairs.push((main.clone(), x + y - j, j));
                    if odd {
                        pairs.push((&main * &rho, x + y - j - 1, j));
                    }
                }
                (false, false) => {
                    if odd {
                        pairs.push((main, x + y - j, j));
                    }
                }
                (true, true) => {
                    let m = if odd { &main * &tau } else { main };
                    pairs.push((m, x + y - j, j));
                }
                (false, true) => {
                    if odd {
                        pairs.push((&c(yi - 1 - ji, xi - 1 - 2 * ji) * &rho, x + y - j - 1, j));
                    } else {
                        pairs.push((main, x + y - j, j));
                    }
                }
            }
        }
        Ok(self.from_sq_pairs(pairs))
    }

    /// Adem relation for `P^a P^b` (`mid = false`, `0 < a < l b`) or
    /// `P^a b P^b` (`mid = true`, `0 < a <= l b`).
    pub fn adem(&self, a: u32, mid: bool, b: u32) -> Result<Arc<SteenrodElement>> {
        let l = self.prime.value() as u64;
        let in_range = a > 0 && b > 0 && (a as u64) < l * b as u64 + u64::from(mid);
        if !in_range {
            let word = if mid {
                format!("P^{a} b P^{b}")
            } else {
                format!("P^{a} P^{b}")
            };
            return Err(Error::AdemRange(format!(
                "{word} is not an inadmissible pair"
            )));
        }
        let key = (a, mid, b);
        if let Some(v) = self.adem_cache.get(&key) {
            return Ok(v.clone());
        }
        let value = Arc::new(if self.prime.is_two() {
            self.adem_sq(2 * a, 2 * b + u32::from(mid))?
        } else {
            self.adem_odd(a, mid, b)
        });
        self.adem_cache.insert(key, value.clone());
        Ok(value)
    }

    fn adem_odd(&self, a: u32, mid: bool, b: u32) -> SteenrodElement {
        let p = self.prime;
        let l = p.value() as i64;
        let (ai, bi) = (a as i64, b as i64);
        let mut out = SteenrodElement::zero(p);
        let mut push = |sign: i64, top: i64, bottom: i64, gens: &[Gen]| {
            let c = binom_mod_signed(top, bottom, p);
            if c == 0 {
                return;
            }
            let c = p.mul(c, p.sign(sign as u64));
            if let Some(m) = Monomial::from_gens(gens) {
                out.add_term(m, &MotCoeff::scalar(p, c as i64));
            }
        };
        for t in 0..=(ai / l) {
            let hi = (ai + bi - t) as u32;
            if mid {
                push(
                    ai + t,
                    (l - 1) * (bi - t),
                    ai - l * t,
                    &[Gen::Beta, Gen::P(hi), Gen::P(t as u32)],
                );
            } else {
                push(
                    ai + t,
                    (l - 1) * (bi - t) - 1,
                    ai - l * t,
                    &[Gen::P(hi), Gen::P(t as u32)],
                );
            }
        }
        if mid {
            for t in 0..=((ai - 1) / l) {
                let hi = (ai + bi - t) as u32;
                push(
                    ai + t + 1,
                    (l - 1) * (bi - t) - 1,
                    ai - l * t - 1,
                    &[Gen::P(hi), Gen::Beta, Gen::P(t as u32)],
                );
            }
        }
        out
    }

    fn tau_total(&self, a: u32) -> Arc<CoeffTotal> {
        if let Some(t) = self.tau_totals.read().unwrap().get(a as usize) {
            return t.clone();
        }
        let mut guard = self.tau_totals.write().unwrap();
        let p = self.prime;
        let zero = MotCoeff::zero(p);
        while guard.len() <= a as usize {
            let prev = guard.last().unwrap().clone();
            let n_max = prev.p.len();
            let get =
                |v: &Vec<MotCoeff>, i: usize| v.get(i).cloned().unwrap_or_else(|| zero.clone());
            // P^n(t y) = t P^n(y) + t r B^{n-1}(y)
            // B^n(t y) = r P^n(y) + t B^n(y) + r^2 B^{n-1}(y)
            let mut pv = Vec::new();
            let mut bv = Vec::new();
            for n in 0..=n_max {
                let mut x = get(&prev.p, n).shift(1, 0);
                if n > 0 {
                    x += &get(&prev.b, n - 1).shift(1, 1);
                }
                pv.push(x);
                let mut y = get(&prev.p, n).shift(0, 1);
                y += &get(&prev.b, n).shift(1, 0);
                if n > 0 {
                    y += &get(&prev.b, n - 1).shift(0, 2);
                }
                bv.push(y);
            }
            guard.push(Arc::new(CoeffTotal { p: pv, b: bv }));
        }
        guard[a as usize].clone()
    }

    /// `g o c` for a generator and a coefficient, as `sum nu_k W_k` with each
    /// `W_k` an admissible generator word of length at most two.
    fn gen_compose(&self, g: Gen, c: &MotCoeff) -> Vec<(MotCoeff, Vec<Gen>)> {
        if c.as_scalar().is_some() || c.terms().iter().all(|t| t.t == 0) {
            return vec![(c.clone(), vec![g])];
        }
        let mut out = Vec::new();
        for term in c.terms() {
            let total = self.tau_total(term.t);
            let unit = MotCoeff::monomial(self.prime, 0, term.r, term.scalar as i64).unwrap();
            let p_at = |i: usize| total.p(i).map(|x| x * &unit);
            let b_at = |i: usize| total.b(i).map(|x| x * &unit);
            match g {
                Gen::Beta => {
                    if let Some(x) = p_at(0) {
                        out.push((x, vec![Gen::Beta]));
                    }
                    if let Some(x) = b_at(0) {
                        out.push((x, vec![]));
                    }
                }
                Gen::P(n) => {
                    for i in 0..=n as usize {
                        if let Some(x) = p_at(i) {
                            out.push((x, vec![Gen::P(n - i as u32)]));
                        }
                    }
                    for i in 0..n as usize {
                        if let Some(x) = b_at(i) {
                            out.push((x.shift(1, 0), vec![Gen::Beta, Gen::P(n - 1 - i as u32)]));
                        }
                    }
                }
            }
        }
        out
    }

    /// `g` times an admissible monomial, normalized.
    pub fn gen_times_monomial(&self, g: Gen, m: &Monomial) -> Arc<SteenrodElement> {
        let p = self.prime;
        match g {
            Gen::Beta => {
                return Arc::new(match m.with_beta_front() {
                    Some(x) => self.monomial_element(x),
                    None => SteenrodElement::zero(p),
                })
            }
            Gen::P(0) => return Arc::new(self.monomial_element(m.clone())),
            Gen::P(a) => {
                if m.k() == 0 || a as u64 >= p.value() as u64 * m.s(1) as u64 + u64::from(m.eps(0))
                {
                    return Arc::new(self.monomial_element(m.with_power_front(a)));
                }
            }
        }
        let key = (g, m.clone());
        if let Some(v) = self.gen_cache.get(&key) {
            return v.clone();
        }
        let Gen::P(a) = g else { unreachable!() };
        let relation = self
            .adem(a, m.eps(0), m.s(1))
            .expect("pair is inadmissible");
        let tail = m.tail();
        let mut out = SteenrodElement::zero(p);
        for (x, mu) in relation.terms() {
            let mut acc = self.monomial_element(tail.clone());
            for h in x.gens().into_iter().rev() {
                acc = self.gen_times(h, &acc);
            }
            out.add_scaled(&acc, mu);
        }
        let out = Arc::new(out);
        self.gen_cache.insert(key, out.clone());
        out
    }

    fn apply_gens(&self, gens: &[Gen], m: &Monomial) -> SteenrodElement {
        match gens {
            [] => self.monomial_element(m.clone()),
            [g] => (*self.gen_times_monomial(*g, m)).clone(),
            _ => {
                let mut acc = self.monomial_element(m.clone());
                for g in gens.iter().rev() {
                    acc = self.gen_times(*g, &acc);
                }
                acc
            }
        }
    }

    /// `g` composed with an admissible element.
    pub fn gen_times(&self, g: Gen, e: &SteenrodElement) -> SteenrodElement {
        let mut out = SteenrodElement::zero(self.prime);
        for (m, c) in &e.terms {
            for (nu, gens) in self.gen_compose(g, c) {
                if let [h] = gens.as_slice() {
                    out.add_scaled(&self.gen_times_monomial(*h, m), &nu);
                } else {
                    out.add_scaled(&self.apply_gens(&gens, m), &nu);
                }
            }
        }
        out
    }

    /// Admissible form of a word.
    pub fn normalize(&self, word: &[Letter]) -> Result<SteenrodElement> {
        let mut acc = SteenrodElement::one(self.prime);
        for letter in word.iter().rev() {
            acc = match letter {
                Letter::Beta => self.gen_times(Gen::Beta, &acc),
                Letter::P(0) => acc,
                Letter::P(n) => self.gen_times(Gen::P(*n), &acc),
                Letter::Coeff(c) => {
                    self.check(c.prime())?;
                    acc.scale(c)
                }
            };
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    /// `m o e` for a monomial `m`.
    pub fn monomial_times(&self, m: &Monomial, e: &SteenrodElement) -> SteenrodElement {
        let mut acc = e.clone();
        for g in m.gens().into_iter().rev() {
            acc = self.gen_times(g, &acc);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    pub fn multiply(&self, x: &SteenrodElement, y: &SteenrodElement) -> Result<SteenrodElement> {
        self.check(x.prime)?;
        self.check(y.prime)?;
        let mut out = SteenrodElement::zero(self.prime);
        for (m, c) in &x.terms {
            out.add_scaled(&self.monomial_times(m, y), c);
        }
        Ok(out)
    }

    /// `F o c` with the coefficient moved to the left.
    pub fn compose_coefficient(&self, f: &Monomial, c: &MotCoeff) -> Result<SteenrodElement> {
        self.check(c.prime())?;
        Ok(self.monomial_times(f, &SteenrodElement::coefficient_times_identity(c)))
    }

    fn gen_coproduct(&self, g: Gen) -> SteenrodTensor {
        let p = self.prime;
        let one = MotCoeff::one(p);
        let mut out = SteenrodTensor::zero(p);
        match g {
            Gen::Beta => {
                out.add_term(Monomial::beta(), Monomial::identity(), &one);
                out.add_term(Monomial::identity(), Monomial::beta(), &one);
            }
            Gen::P(n) => {
                for a in 0..=n {
                    out.add_term(Monomial::power(a), Monomial::power(n - a), &one);
                }
                if p.is_two() {
                    for a in 0..n {
                        let c = Monomial::from_gens(&[Gen::Beta, Gen::P(a)]).unwrap();
                        let d = Monomial::from_gens(&[Gen::Beta, Gen::P(n - 1 - a)]).unwrap();
                        out.add_term(c, d, &MotCoeff::tau());
                    }
                }
            }
        }
        out
    }

    /// `(c' (x) d') o (c (x) d)` summed over both tensors.
    fn compose_tensors(&self, outer: &SteenrodTensor, inner: &SteenrodTensor) -> SteenrodTensor {
        let p = self.prime;
        let mut out = SteenrodTensor::zero(p);
        for ((c2, d2), k2) in &outer.terms {
            for ((c1, d1), k1) in &inner.terms {
                let mut lam = k1.clone();
                if !p.is_two() && c1.is_odd() && d2.is_odd() {
                    lam = -&lam;
                }
                let first = self.monomial_times(
                    c2,
                    &SteenrodElement::coefficient_times_identity(&lam).with_monomial(c1),
                );
                if first.is_zero() {
                    continue;
                }
                let second = self.monomial_times(d2, &self.monomial_element(d1.clone()));
                for (a, x) in &first.terms {
                    for (b, y) in &second.terms {
                        out.add_term(a.clone(), b.clone(), &(&(k2 * x) * y));
                    }
                }
            }
        }
        out
    }

    fn monomial_coproduct(&self, m: &Monomial) -> Arc<SteenrodTensor> {
        if let Some(v) = self.coproduct_cache.get(m) {
            return v.clone();
        }
        let p = self.prime;
        let mut acc = SteenrodTensor::zero(p);
        acc.add_term(
            Monomial::identity(),
            Monomial::identity(),
            &MotCoeff::one(p),
        );
        for g in m.gens().into_iter().rev() {
            acc = self.compose_tensors(&self.gen_coproduct(g), &acc);
        }
        let acc = Arc::new(acc);
        self.coproduct_cache.insert(m.clone(), acc.clone());
        acc
    }

    /// The coproduct, linear over left coefficients.
    pub fn coproduct(&self, e: &SteenrodElement) -> Result<SteenrodTensor> {
        self.check(e.prime)?;
        let mut out = SteenrodTensor::zero(self.prime);
        for (m, c) in &e.terms {
            for ((a, b), x) in self.monomial_coproduct(m).terms() {
                out.add_term(a.clone(), b.clone(), &(c * x));
            }
        }
        Ok(out)
    }

    /// Both sides of coassociativity as triple tensors.
    pub fn coassociativity_sides(
        &self,
        e: &SteenrodElement,
    ) -> Result<(
        BTreeMap<[Monomial; 3], MotCoeff>,
        BTreeMap<[Monomial; 3], MotCoeff>,
    )> {
        let psi = self.coproduct(e)?;
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        for ((a, b), c) in psi.terms() {
            for ((a1, a2), x) in self.monomial_coproduct(a).terms() {
                add_into(&mut left, [a1.clone(), a2.clone(), b.clone()], &(c * x));
            }
            for ((b1, b2), x) in self.monomial_coproduct(b).terms() {
                add_into(&mut right, [a.clone(), b1.clone(), b2.clone()], &(c * x));
            }
        }
        Ok((left, right))
    }

    /// Evaluation on the unit class `1`: the coefficient of the identity.
    pub fn counit(&self, e: &SteenrodElement) -> MotCoeff {
        e.coefficient(&Monomial::identity())
    }

    /// Number of cached Adem relations.
    pub fn adem_cache_len(&self) -> usize {
        self.adem_cache.len()
    }
}

impl SteenrodElement {
    /// `c * m` for the coefficient-only element `c * Id`.
    fn with_monomial(&self, m: &Monomial) -> SteenrodElement {
        let mut out = SteenrodElement::zero(self.prime);
        for c in self.terms.values() {
            out.add_term(m.clone(), c);
        }
        out
    }
}

/// All admissible monomials of exactly the given bidegree.
pub fn admissible_monomials(p: Prime, b: Bidegree) -> Vec<Monomial> {
    let l = p.value() as i64;
    if b.weight < 0 || b.weight % (l - 1) != 0 {
        return vec![];
    }
    let total = (b.weight / (l - 1)) as u32;
    let betas = b.degree - 2 * b.weight;
    if betas < 0 {
        return vec![];
    }
    let mut out = Vec::new();
    let mut powers = Vec::new();
    admissible_rec(p, total, u32::MAX, &mut powers, &mut out);
    let mut result = Vec::new();
    for s in out {
        let k = s.len();
        for bits in 0u64..(1 << (k + 1)) {
            if bits.count_ones() as i64 != betas {
                continue;
            }
            let eps: Vec<bool> = (0..=k).map(|i| bits >> i & 1 == 1).collect();
            let m = Monomial::new(&eps, &s).unwrap();
            if m.is_admissible(p) {
                result.push(m);
            }
        }
    }
    result.sort_by_cached_key(|m| m.index(p));
    result
}

/// Sequences `s_1 >= l s_2 >= ...` (ignoring Bocksteins) summing to `total`.
fn admissible_rec(
    p: Prime,
    remaining: u32,
    max_next: u32,
    powers: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if remaining == 0 {
        out.push(powers.clone());
        return;
    }
    let l = p.value();
    for s in 1..=remaining.min(max_next) {
        powers.push(s);
        // next entry may still use a Bockstein slot, so allow up to s / l
        admissible_rec(p, remaining - s, s / l, powers, out);
        powers.pop();
    }
}

/// All admissible monomials of weight at most `w`.
pub fn admissible_up_to_weight(p: Prime, w: u64) -> Vec<Monomial> {
    let l = p.value() as u64;
    let mut out = Vec::new();
    for weight in (0..=w).filter(|x| x % (l - 1) == 0) {
        let max_len = 1 + (weight / (l - 1)) as i64;
        for betas in 0..=max_len.min(64) {
            out.extend(admissible_monomials(
                p,
                Bidegree::new(2 * weight as i64 + betas, weight as i64),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(seq: &[u32]) -> Monomial {
        Monomial::from_sq(seq).unwrap()
    }

    #[test]
    fn bidegrees() {
        let p3 = Prime::THREE;
        assert_eq!(Monomial::beta().bidegree(Prime::TWO), Bidegree::new(1, 0));
        assert_eq!(Monomial::power(2).bidegree(p3), Bidegree::new(8, 4));
        let bp1 = Monomial::from_gens(&[Gen::Beta, Gen::P(1)]).unwrap();
        assert_eq!(bp1.bidegree(p3), Bidegree::new(5, 2));
    }

    #[test]
    fn sq_rendering() {
        let m = Monomial::from_gens(&[Gen::Beta, Gen::P(1), Gen::Beta]).unwrap();
        assert_eq!(m.display(Prime::TWO).to_string(), "Sq^3 Sq^1");
        assert_eq!(sq(&[3, 1]), m);
        assert_eq!(Monomial::from_sq(&[1, 1]), None);
    }

    #[test]
    fn index_round_trip() {
        for p in [Prime::TWO, Prime::THREE] {
            for m in admissible_up_to_weight(p, 12) {
                assert_eq!(Monomial::from_index(&m.index(p), p), m);
            }
        }
    }

    #[test]
    fn small_relations() {
        let a = SteenrodAlgebra::new(Prime::TWO);
        assert!(a.adem_sq(1, 1).unwrap().is_zero());
        assert_eq!(a.adem_sq(2, 2).unwrap().to_string(), "t Sq^3 Sq^1");
        assert_eq!(a.adem_sq(1, 2).unwrap().to_string(), "Sq^3");
        let b = SteenrodAlgebra::new(Prime::THREE);
        assert_eq!(b.adem(1, false, 1).unwrap().to_string(), "2 P^2");
        assert!(a.adem(2, false, 1).is_err());
    }

    #[test]
    fn compose_rules() {
        let a = SteenrodAlgebra::new(Prime::TWO);
        let tau = MotCoeff::tau();
        let rho = MotCoeff::rho();
        assert_eq!(
            a.compose_coefficient(&Monomial::beta(), &tau)
                .unwrap()
                .to_string(),
            "r + t Sq^1"
        );
        assert_eq!(
            a.compose_coefficient(&Monomial::power(1), &rho)
                .unwrap()
                .to_string(),
            "r Sq^2"
        );
        assert_eq!(
            a.compose_coefficient(&Monomial::power(2), &tau)
                .unwrap()
                .to_string(),
            "t r Sq^3 + t Sq^4"
        );
        let one = MotCoeff::one(Prime::TWO);
        assert_eq!(
            a.compose_coefficient(&sq(&[4, 2]), &one)
                .unwrap()
                .to_string(),
            "Sq^4 Sq^2"
        );
    }

    #[test]
    fn normalize_examples() {
        let a = SteenrodAlgebra::new(Prime::TWO);
        let w = [Letter::Beta, Letter::P(1)];
        assert_eq!(a.normalize(&w).unwrap().to_string(), "Sq^3");
        let w = [Letter::Beta, Letter::Beta, Letter::P(3)];
        assert!(a.normalize(&w).unwrap().is_zero());
        let w = [Letter::P(1), Letter::P(1)];
        assert_eq!(a.normalize(&w).unwrap().to_string(), "t Sq^3 Sq^1");
    }

    #[test]
    fn coproduct_examples() {
        let a = SteenrodAlgebra::new(Prime::TWO);
        let p1 = SteenrodElement::from_monomial(Prime::TWO, Monomial::power(1));
        assert_eq!(
            a.coproduct(&p1).unwrap().to_string(),
            "1 ⊗ Sq^2 + t Sq^1 ⊗ Sq^1 + Sq^2 ⊗ 1"
        );
    }

    #[test]
    fn admissible_counts() {
        // Sq^4, Sq^3 Sq^1 in degree 4 classically; weight 2 has Sq^4 and Sq^3 Sq^1 (weight 1)
        let v = admissible_monomials(Prime::TWO, Bidegree::new(4, 2));
        assert_eq!(v.len(), 1);
        let v = admissible_monomials(Prime::TWO, Bidegree::new(4, 1));
        assert_eq!(v, vec![sq(&[3, 1])]);
    }
}
