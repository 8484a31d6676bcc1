//! Truncated cohomology of a product of copies of `B mu_l`, the action of the
//! operations on it, the total power expansion and the coaction.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::algebra::{render_left, Gen, Letter, SteenrodElement};
use crate::coeff::{Bidegree, MotCoeff, Prime};
use crate::dual::{DualAlgebra, DualMonomial};
use crate::error::{Error, Result};

/// `n` pairs of generators `u_i`, `v_i` with `v_i^N = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BmuRing {
    prime: Prime,
    arity: usize,
    truncation: u32,
}

impl BmuRing {
    pub fn new(prime: Prime, arity: usize, truncation: u32) -> Result<BmuRing> {
        if arity == 0 || arity > 64 {
            return Err(Error::InvalidRing(format!(
                "arity {arity} is outside 1..=64"
            )));
        }
        if truncation < 2 {
            return Err(Error::InvalidRing(format!(
                "truncation {truncation} is below 2"
            )));
        }
        Ok(BmuRing {
            prime,
            arity,
            truncation,
        })
    }

    /// The ring used to test equality of operations of weight at most `w`.
    pub fn for_weight(prime: Prime, w: u64) -> BmuRing {
        BmuRing::new(prime, 2 * (w as usize + 1), w as u32 + 2).unwrap()
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn one(&self) -> BmuClass {
        BmuClass::monomial(*self, BmuMonomial::one(self.arity))
    }

    /// `u_i`, 1-based.
    pub fn u(&self, i: usize) -> Result<BmuClass> {
        self.check_index(i)?;
        let mut m = BmuMonomial::one(self.arity);
        m.u |= 1 << (i - 1);
        Ok(BmuClass::monomial(*self, m))
    }

    /// `v_i^e`, 1-based.
    pub fn v(&self, i: usize, e: u32) -> Result<BmuClass> {
        self.check_index(i)?;
        let mut m = BmuMonomial::one(self.arity);
        m.v[i - 1] = e;
        Ok(if e >= self.truncation {
            BmuClass::zero(*self)
        } else {
            BmuClass::monomial(*self, m)
        })
    }

    pub fn constant(&self, c: &MotCoeff) -> BmuClass {
        let mut out = BmuClass::zero(*self);
        out.add_term(BmuMonomial::one(self.arity), c);
        out
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.arity {
            Err(Error::InvalidRing(format!(
                "generator index {i} is outside 1..={}",
                self.arity
            )))
        } else {
            Ok(())
        }
    }

    fn mul_monomials(&self, a: &BmuMonomial, b: &BmuMonomial) -> Vec<(BmuMonomial, MotCoeff)> {
        let p = self.prime;
        let mut v = a.v.clone();
        for (x, y) in v.iter_mut().zip(&b.v) {
            *x += y;
            if *x >= self.truncation {
                return vec![];
            }
        }
        let overlap = a.u & b.u;
        if !p.is_two() {
            if overlap != 0 {
                return vec![];
            }
            let mut inversions = 0;
            let mut bits = b.u;
            while bits != 0 {
                let j = bits.trailing_zeros();
                inversions += (a.u >> j >> 1).count_ones();
                bits &= bits - 1;
            }
            let sign = MotCoeff::scalar(p, if inversions % 2 == 0 { 1 } else { -1 });
            return vec![(BmuMonomial { u: a.u | b.u, v }, sign)];
        }
        // u_i^2 = t v_i + r u_i
        let mut terms = vec![(BmuMonomial { u: a.u ^ b.u, v }, MotCoeff::one(p))];
        let mut bits = overlap;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let mut next = Vec::with_capacity(2 * terms.len());
            for (m, c) in terms {
                if m.v[i] + 1 < self.truncation {
                    let mut with_v = m.clone();
                    with_v.v[i] += 1;
                    next.push((with_v, c.shift(1, 0)));
                }
                let mut with_u = m;
                with_u.u |= 1 << i;
                next.push((with_u, c.shift(0, 1)));
            }
            terms = next;
        }
        terms
    }
}

/// `u_{i_1} ... u_{i_k} v_1^{m_1} ... v_n^{m_n}` with increasing `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BmuMonomial {
    u: u64,
    v: Vec<u32>,
}

impl BmuMonomial {
    fn one(arity: usize) -> BmuMonomial {
        BmuMonomial {
            u: 0,
            v: vec![0; arity],
        }
    }

    pub fn u_bits(&self) -> u64 {
        self.u
    }

    pub fn v_exponents(&self) -> &[u32] {
        &self.v
    }

    pub fn is_one(&self) -> bool {
        self.u == 0 && self.v.iter().all(|&e| e == 0)
    }

    pub fn bidegree(&self) -> Bidegree {
        let us = self.u.count_ones() as i64;
        let vs: i64 = self.v.iter().map(|&e| e as i64).sum();
        Bidegree::new(us + 2 * vs, us + vs)
    }

    pub fn is_odd(&self) -> bool {
        self.u.count_ones() % 2 == 1
    }
}

impl fmt::Display for BmuMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for i in 0..self.v.len() {
            if self.u >> i & 1 == 1 {
                parts.push(format!("u_{}", i + 1));
            }
        }
        for (i, &e) in self.v.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("v_{}", i + 1)),
                _ => parts.push(format!("v_{}^{}", i + 1, e)),
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// A class `sum c * m` in a `BmuRing`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BmuClass {
    ring: BmuRing,
    terms: BTreeMap<BmuMonomial, MotCoeff>,
}

impl BmuClass {
    pub fn zero(ring: BmuRing) -> BmuClass {
        BmuClass {
            ring,
            terms: BTreeMap::new(),
        }
    }

    fn monomial(ring: BmuRing, m: BmuMonomial) -> BmuClass {
        let mut out = BmuClass::zero(ring);
        out.add_term(m, &MotCoeff::one(ring.prime));
        out
    }

    pub fn ring(&self) -> BmuRing {
        self.ring
    }

    pub fn terms(&self) -> &BTreeMap<BmuMonomial, MotCoeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: BmuMonomial, c: &MotCoeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                x.add_assign_ref(c);
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, other: &BmuClass, c: &MotCoeff) {
        for (m, x) in &other.terms {
            self.add_term(m.clone(), &(c * x));
        }
    }

    pub fn add(&self, other: &BmuClass) -> BmuClass {
        let mut out = self.clone();
        out.add_scaled(other, &MotCoeff::one(self.ring.prime));
        out
    }

    pub fn sub(&self, other: &BmuClass) -> BmuClass {
        let mut out = self.clone();
        out.add_scaled(other, &MotCoeff::scalar(self.ring.prime, -1));
        out
    }

    pub fn scale(&self, c: &MotCoeff) -> BmuClass {
        let mut out = BmuClass::zero(self.ring);
        out.add_scaled(self, c);
        out
    }

    pub fn mul(&self, other: &BmuClass) -> Result<BmuClass> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let mut out = BmuClass::zero(self.ring);
        out.add_product(self, other, &MotCoeff::one(self.ring.prime));
        Ok(out)
    }

    /// `self += c * x * y`.
    fn add_product(&mut self, x: &BmuClass, y: &BmuClass, c: &MotCoeff) {
        for (a, k1) in &x.terms {
            for (b, k2) in &y.terms {
                let k = &(c * k1) * k2;
                for (m, e) in self.ring.mul_monomials(a, b) {
                    self.add_term(m, &(&e * &k));
                }
            }
        }
    }

    pub fn pow(&self, e: u32) -> BmuClass {
        let mut out = self.ring.one();
        for _ in 0..e {
            out = out.mul(self).unwrap();
        }
        out
    }

    /// Bidegree of a homogeneous nonzero class, coefficients included.
    pub fn bidegree(&self) -> Option<Bidegree> {
        let mut out = None;
        for (m, c) in &self.terms {
            for part in c.monomials() {
                let b = m.bidegree() + part.bidegree()?;
                if *out.get_or_insert(b) != b {
                    return None;
                }
            }
        }
        out
    }

    fn parity_parts(&self) -> [BmuClass; 2] {
        let mut even = BmuClass::zero(self.ring);
        let mut odd = BmuClass::zero(self.ring);
        for (m, c) in &self.terms {
            if m.is_odd() {
                odd.add_term(m.clone(), c);
            } else {
                even.add_term(m.clone(), c);
            }
        }
        [even, odd]
    }
}

impl fmt::Display for BmuClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .flat_map(|(m, c)| render_left(&m.to_string(), m.is_one(), c))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `P^i(x)` and `B^i(x) = b P^i(x)` for `i <= n`.
#[derive(Clone, Debug)]
struct Totals {
    p: Vec<BmuClass>,
    b: Vec<BmuClass>,
}

impl Totals {
    fn constant(x: BmuClass, n: usize) -> Totals {
        let zero = BmuClass::zero(x.ring);
        let mut p = vec![zero.clone(); n + 1];
        p[0] = x;
        Totals {
            p,
            b: vec![zero; n + 1],
        }
    }

    /// Adds `c` times entry `n` of the Cartan product (the `B` entry when
    /// `bockstein` holds) to `out`.
    fn cartan_entry(
        &self,
        other: &Totals,
        x_odd: bool,
        n: usize,
        bockstein: bool,
        c: &MotCoeff,
        out: &mut BmuClass,
    ) {
        let p = out.ring.prime;
        let sign = if x_odd && !p.is_two() {
            c.scale(p.value() - 1)
        } else {
            c.clone()
        };
        for i in 0..=n {
            let j = n - i;
            if bockstein {
                out.add_product(&self.b[i], &other.p[j], c);
                out.add_product(&self.p[i], &other.b[j], &sign);
            } else {
                out.add_product(&self.p[i], &other.p[j], c);
            }
        }
        if p.is_two() {
            let d = if bockstein {
                c * &MotCoeff::rho()
            } else {
                c * &MotCoeff::tau()
            };
            for i in 0..n {
                out.add_product(&self.b[i], &other.b[n - 1 - i], &d);
            }
        }
    }

    /// Cartan formula; `x_odd` is the parity of the left factor.
    /// Only the entries up to `n` are read and produced.
    fn cartan(&self, other: &Totals, x_odd: bool, n: usize) -> Totals {
        let ring = self.p[0].ring;
        let p = ring.prime;
        let zero = BmuClass::zero(ring);
        let mut out = Totals {
            p: vec![zero.clone(); n + 1],
            b: vec![zero; n + 1],
        };
        let one = MotCoeff::one(p);
        let sign = MotCoeff::scalar(p, if x_odd && !p.is_two() { -1 } else { 1 });
        for i in 0..=n {
            let (xp, xb) = (&self.p[i], &self.b[i]);
            if xp.is_zero() && xb.is_zero() {
                continue;
            }
            for j in 0..=n - i {
                let (yp, yb) = (&other.p[j], &other.b[j]);
                out.p[i + j].add_product(xp, yp, &one);
                out.b[i + j].add_product(xb, yp, &one);
                out.b[i + j].add_product(xp, yb, &sign);
                if p.is_two() && i + j < n && !xb.is_zero() && !yb.is_zero() {
                    out.p[i + j + 1].add_product(xb, yb, &MotCoeff::tau());
                    out.b[i + j + 1].add_product(xb, yb, &MotCoeff::rho());
                }
            }
        }
        out
    }
}

/// Evaluates operations on classes, caching the totals of monomials.
pub struct Action {
    ring: BmuRing,
    depth: usize,
    cache: HashMap<BmuMonomial, Rc<Totals>>,
}

impl Action {
    pub fn new(ring: BmuRing) -> Action {
        Action::with_depth(ring, 0)
    }

    /// Totals of monomials are computed and cached up to at least `depth`.
    pub fn with_depth(ring: BmuRing, depth: usize) -> Action {
        Action {
            ring,
            depth,
            cache: HashMap::new(),
        }
    }

    pub fn ring(&self) -> BmuRing {
        self.ring
    }

    fn generator_totals(&self, kind: Factor, n: usize) -> Totals {
        let ring = self.ring;
        let mut t = match kind {
            Factor::U(i) => Totals::constant(ring.u(i + 1).unwrap(), n),
            Factor::V(i) => Totals::constant(ring.v(i + 1, 1).unwrap(), n),
            Factor::Tau => Totals::constant(ring.constant(&MotCoeff::tau()), n),
            Factor::Rho => Totals::constant(ring.constant(&MotCoeff::rho()), n),
        };
        match kind {
            Factor::U(i) => t.b[0] = ring.v(i + 1, 1).unwrap(),
            Factor::V(i) => {
                if n >= 1 {
                    t.p[1] = ring.v(i + 1, ring.prime.value()).unwrap();
                }
            }
            Factor::Tau => t.b[0] = ring.constant(&MotCoeff::rho()),
            Factor::Rho => {}
        }
        t
    }

    /// Splits a monomial with at least two variables in its support.
    fn split(&self, m: &BmuMonomial) -> Option<(BmuMonomial, BmuMonomial)> {
        let support: Vec<usize> = (0..self.ring.arity)
            .filter(|&i| m.u >> i & 1 == 1 || m.v[i] > 0)
            .collect();
        if support.len() < 2 {
            return None;
        }
        let mid = support[support.len() / 2];
        let mut left = BmuMonomial::one(self.ring.arity);
        let mut right = BmuMonomial::one(self.ring.arity);
        left.u = m.u & ((1u64 << mid) - 1);
        right.u = m.u & !((1u64 << mid) - 1);
        left.v[..mid].copy_from_slice(&m.v[..mid]);
        right.v[mid..].copy_from_slice(&m.v[mid..]);
        Some((left, right))
    }

    fn is_odd(&self, m: &BmuMonomial) -> bool {
        !self.ring.prime.is_two() && m.u.count_ones() % 2 == 1
    }

    fn monomial_totals(&mut self, m: &BmuMonomial, n: usize) -> Rc<Totals> {
        if let Some(t) = self.cache.get(m) {
            if t.p.len() > n {
                return t.clone();
            }
        }
        let n = n.max(self.depth);
        let acc = match self.split(m) {
            Some((left, right)) => {
                let l = self.monomial_totals(&left, n);
                let r = self.monomial_totals(&right, n);
                l.cartan(&r, self.is_odd(&left), n)
            }
            None => {
                let mut acc = Totals::constant(self.ring.one(), n);
                if let Some(i) = (0..self.ring.arity).find(|&i| m.u >> i & 1 == 1 || m.v[i] > 0) {
                    let mut odd = false;
                    if m.u >> i & 1 == 1 {
                        acc = acc.cartan(&self.generator_totals(Factor::U(i), n), false, n);
                        odd = true;
                    }
                    let g = self.generator_totals(Factor::V(i), n);
                    for _ in 0..m.v[i] {
                        acc = acc.cartan(&g, odd, n);
                    }
                }
                acc
            }
        };
        let acc = Rc::new(acc);
        self.cache.insert(m.clone(), acc.clone());
        acc
    }

    /// `P^n(x)`, or `B^n(x)` when `bockstein` holds.
    fn apply(&mut self, x: &BmuClass, n: usize, bockstein: bool) -> BmuClass {
        let mut out = BmuClass::zero(self.ring);
        let one = MotCoeff::one(self.ring.prime);
        for (m, c) in &x.terms {
            let (left, right) = self
                .split(m)
                .unwrap_or_else(|| (BmuMonomial::one(self.ring.arity), m.clone()));
            let l = self.monomial_totals(&left, n);
            let r = self.monomial_totals(&right, n);
            let odd = self.is_odd(&left);
            if c.terms().iter().all(|t| t.t == 0 && t.r == 0) {
                l.cartan_entry(&r, odd, n, bockstein, c, &mut out);
            } else {
                let l = self.coefficient_totals(c, n).cartan(&l, false, n);
                l.cartan_entry(&r, odd, n, bockstein, &one, &mut out);
            }
        }
        out
    }

    fn coefficient_totals(&self, c: &MotCoeff, n: usize) -> Totals {
        let ring = self.ring;
        let zero = BmuClass::zero(ring);
        let mut out = Totals {
            p: vec![zero.clone(); n + 1],
            b: vec![zero; n + 1],
        };
        for term in c.terms() {
            let mut acc = Totals::constant(
                ring.constant(&MotCoeff::scalar(ring.prime, term.scalar as i64)),
                n,
            );
            for _ in 0..term.t {
                acc = acc.cartan(&self.generator_totals(Factor::Tau, n), false, n);
            }
            for _ in 0..term.r {
                acc = acc.cartan(&self.generator_totals(Factor::Rho, n), false, n);
            }
            for i in 0..=n {
                out.p[i].add_scaled(&acc.p[i], &MotCoeff::one(ring.prime));
                out.b[i].add_scaled(&acc.b[i], &MotCoeff::one(ring.prime));
            }
        }
        out
    }

    fn totals(&mut self, x: &BmuClass, n: usize) -> Totals {
        let zero = BmuClass::zero(self.ring);
        let mut out = Totals {
            p: vec![zero.clone(); n + 1],
            b: vec![zero; n + 1],
        };
        for (m, c) in &x.terms {
            let mt = self.monomial_totals(m, n);
            let t = if c.as_scalar().is_some() || c.terms().iter().all(|t| t.t == 0 && t.r == 0) {
                Totals {
                    p: mt.p[..=n].iter().map(|y| y.scale(c)).collect(),
                    b: mt.b[..=n].iter().map(|y| y.scale(c)).collect(),
                }
            } else {
                self.coefficient_totals(c, n).cartan(&mt, false, n)
            };
            let one = MotCoeff::one(self.ring.prime);
            for i in 0..=n {
                out.p[i].add_scaled(&t.p[i], &one);
                out.b[i].add_scaled(&t.b[i], &one);
            }
        }
        out
    }

    /// `P^n(x)` and `b P^n(x)`.
    pub fn power(&mut self, n: u32, x: &BmuClass) -> Result<(BmuClass, BmuClass)> {
        if x.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        Ok((
            self.apply(x, n as usize, false),
            self.apply(x, n as usize, true),
        ))
    }

    pub fn act_letter(&mut self, letter: &Letter, x: &BmuClass) -> Result<BmuClass> {
        if x.ring != self.ring {
            return Err(Error::RingMismatch);
        }
        match letter {
            Letter::Beta => Ok(self.apply(x, 0, true)),
            Letter::P(n) => Ok(self.apply(x, *n as usize, false)),
            Letter::Coeff(c) => Ok(x.scale(c)),
        }
    }

    pub fn act_word(&mut self, word: &[Letter], x: &BmuClass) -> Result<BmuClass> {
        let mut acc = x.clone();
        for letter in word.iter().rev() {
            acc = self.act_letter(letter, &acc)?;
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    pub fn act(&mut self, e: &SteenrodElement, x: &BmuClass) -> Result<BmuClass> {
        let mut out = BmuClass::zero(self.ring);
        for (m, c) in e.terms() {
            let y = self.act_word(&m.letters(), x)?;
            out.add_scaled(&y, c);
        }
        Ok(out)
    }

    /// `sum_j P^{r-j}(x) d^j + sum_j B^{r-1-j}(x) c d^j` for `x` of bidegree `(2r, r)`.
    pub fn total_power(&mut self, x: &BmuClass, r: u32) -> Result<TotalPowerExpansion> {
        let want = Bidegree::new(2 * r as i64, r as i64);
        if let Some(b) = x.bidegree() {
            if b != want {
                return Err(Error::BidegreeMismatch(b, want));
            }
        }
        let t = self.totals(x, r as usize);
        let mut out = TotalPowerExpansion::zero(self.ring);
        for j in 0..=r {
            out.add((j, false), &t.p[(r - j) as usize]);
            if j < r {
                out.add((j, true), &t.b[(r - 1 - j) as usize]);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy)]
enum Factor {
    U(usize),
    V(usize),
    Tau,
    Rho,
}

/// Formal expansion `sum A_{j,e} c^e d^j` with the classes `c`, `d` of the
/// symmetric group kept as symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalPowerExpansion {
    ring: BmuRing,
    terms: BTreeMap<(u32, bool), BmuClass>,
}

impl TotalPowerExpansion {
    pub fn zero(ring: BmuRing) -> TotalPowerExpansion {
        TotalPowerExpansion {
            ring,
            terms: BTreeMap::new(),
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, bool), BmuClass> {
        &self.terms
    }

    pub fn coefficient(&self, j: u32, has_c: bool) -> BmuClass {
        self.terms
            .get(&(j, has_c))
            .cloned()
            .unwrap_or_else(|| BmuClass::zero(self.ring))
    }

    pub fn add(&mut self, key: (u32, bool), x: &BmuClass) {
        let entry = self
            .terms
            .entry(key)
            .or_insert_with(|| BmuClass::zero(self.ring));
        *entry = entry.add(x);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Product with `c^2 = t d + r c` at `l = 2` and `c^2 = 0` otherwise;
    /// `c` is odd at odd primes.
    pub fn mul(&self, other: &TotalPowerExpansion) -> Result<TotalPowerExpansion> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let p = self.ring.prime;
        let mut out = TotalPowerExpansion::zero(self.ring);
        for (&(j, c1), x) in &self.terms {
            for (&(k, c2), y) in &other.terms {
                let y = if c1 && !p.is_two() {
                    let [even, odd] = y.parity_parts();
                    even.sub(&odd)
                } else {
                    y.clone()
                };
                let xy = x.mul(&y)?;
                match (c1 && c2, p.is_two()) {
                    (false, _) => out.add((j + k, c1 || c2), &xy),
                    (true, true) => {
                        out.add((j + k + 1, false), &xy.scale(&MotCoeff::tau()));
                        out.add((j + k, true), &xy.scale(&MotCoeff::rho()));
                    }
                    (true, false) => {}
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for TotalPowerExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (&(j, c), x) in &self.terms {
            let mut sym = Vec::new();
            if c {
                sym.push("c".to_string());
            }
            match j {
                0 => {}
                1 => sym.push("d".into()),
                _ => sym.push(format!("d^{j}")),
            }
            let sym = sym.join(" ");
            for (m, k) in x.terms() {
                for body in render_left(&m.to_string(), m.is_one(), k) {
                    parts.push(match (sym.is_empty(), body == "1") {
                        (true, _) => body,
                        (false, true) => sym.clone(),
                        (false, false) => format!("{body} {sym}"),
                    });
                }
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// `lambda*(x)` as `sum omega (x) y_omega`.
pub type Coaction = BTreeMap<DualMonomial, BmuClass>;

fn coaction_add(out: &mut Coaction, ring: BmuRing, m: DualMonomial, y: &BmuClass) {
    let entry = out.entry(m.clone()).or_insert_with(|| BmuClass::zero(ring));
    *entry = entry.add(y);
    if entry.is_zero() {
        out.remove(&m);
    }
}

fn coaction_mul(dual: &DualAlgebra, ring: BmuRing, x: &Coaction, y: &Coaction) -> Coaction {
    let p = ring.prime;
    let mut out = Coaction::new();
    for (a, s) in x {
        let [s_even, s_odd] = s.parity_parts();
        for (b, t) in y {
            // moving b past s
            let s_signed = if !p.is_two() && b.is_odd() {
                s_even.sub(&s_odd)
            } else {
                s.clone()
            };
            let st = s_signed.mul(t).unwrap();
            if st.is_zero() {
                continue;
            }
            for (m, k) in dual.mul_monomials(a, b).iter() {
                coaction_add(&mut out, ring, m.clone(), &st.scale(k));
            }
        }
    }
    out
}

/// The coaction, multiplicative and sending a coefficient `c` to `lambda*(c)`.
pub fn coaction(dual: &DualAlgebra, x: &BmuClass) -> Result<Coaction> {
    let ring = x.ring;
    let p = ring.prime;
    if dual.prime() != p {
        return Err(Error::PrimeMismatch(dual.prime().value(), p.value()));
    }
    let n = ring.truncation;
    let v_part = |i: usize| {
        let mut c = Coaction::new();
        let mut k = 0u32;
        while p.power(k) < n as u64 {
            coaction_add(
                &mut c,
                ring,
                DualMonomial::xi(k, 1),
                &ring.v(i + 1, p.power(k) as u32).unwrap(),
            );
            k += 1;
        }
        c
    };
    let u_part = |i: usize| {
        let mut c = Coaction::new();
        coaction_add(&mut c, ring, DualMonomial::one(), &ring.u(i + 1).unwrap());
        let mut k = 0u32;
        while p.power(k) < n as u64 {
            coaction_add(
                &mut c,
                ring,
                DualMonomial::tau(k),
                &ring.v(i + 1, p.power(k) as u32).unwrap(),
            );
            k += 1;
        }
        c
    };
    let mut out = Coaction::new();
    for (m, c) in x.terms() {
        let mut acc = Coaction::new();
        for (w, k) in dual.lambda_star(c).terms() {
            coaction_add(&mut acc, ring, w.clone(), &ring.constant(k));
        }
        for i in 0..ring.arity {
            if m.u >> i & 1 == 1 {
                acc = coaction_mul(dual, ring, &acc, &u_part(i));
            }
        }
        for (i, &e) in m.v.iter().enumerate() {
            let part = v_part(i);
            for _ in 0..e {
                acc = coaction_mul(dual, ring, &acc, &part);
            }
        }
        for (w, y) in acc {
            coaction_add(&mut out, ring, w, &y);
        }
    }
    Ok(out)
}

/// Largest operation weight among the terms of `e`.
fn operation_weight(e: &SteenrodElement) -> u64 {
    e.terms()
        .keys()
        .map(|m| m.weight(e.prime()))
        .max()
        .unwrap_or(0)
}

struct Evaluator {
    action: Action,
    z: BmuClass,
    words: HashMap<Vec<Gen>, BmuClass>,
}

impl Evaluator {
    fn new(p: Prime, w: u64) -> Result<Evaluator> {
        let ring = BmuRing::for_weight(p, w);
        let mut z = ring.one();
        for i in 0..=w as usize {
            z = z.mul(&ring.u(2 * i + 1)?)?.mul(&ring.v(2 * i + 2, 1)?)?;
        }
        let action = Action::with_depth(ring, w as usize);
        Ok(Evaluator {
            action,
            z,
            words: HashMap::new(),
        })
    }

    fn word(&mut self, gens: &[Gen]) -> Result<BmuClass> {
        if let Some(x) = self.words.get(gens) {
            return Ok(x.clone());
        }
        let x = match gens.split_first() {
            None => self.z.clone(),
            Some((g, rest)) => {
                let y = self.word(rest)?;
                self.action.act_letter(&Letter::from(*g), &y)?
            }
        };
        self.words.insert(gens.to_vec(), x.clone());
        Ok(x)
    }

    fn letters(&mut self, word: &[Letter]) -> Result<BmuClass> {
        let cut = word
            .iter()
            .rposition(|l| matches!(l, Letter::Coeff(_)))
            .map_or(0, |i| i + 1);
        let gens: Vec<Gen> = word[cut..]
            .iter()
            .map(|l| match l {
                Letter::Beta => Gen::Beta,
                Letter::P(n) => Gen::P(*n),
                Letter::Coeff(_) => unreachable!(),
            })
            .collect();
        let y = self.word(&gens)?;
        self.action.act_word(&word[..cut], &y)
    }

    fn element(&mut self, e: &SteenrodElement) -> Result<BmuClass> {
        let mut out = BmuClass::zero(self.action.ring);
        for (m, c) in e.terms() {
            out.add_scaled(&self.word(&m.gens())?, c);
        }
        Ok(out)
    }
}

fn word_weight(p: Prime, word: &[Letter]) -> u64 {
    let s: u64 = word
        .iter()
        .map(|l| if let Letter::P(n) = l { *n as u64 } else { 0 })
        .sum();
    (p.value() as u64 - 1) * s
}

/// Compares operations through their values on `z = u_1 v_2 u_3 v_4 ...
/// u_{2n-1} v_{2n}` in a ring large enough for the weight at hand. Rings,
/// values of words on `z`, and totals of monomials are cached per weight.
pub struct ModuleOracle {
    prime: Prime,
    evaluators: HashMap<u64, Evaluator>,
}

impl ModuleOracle {
    pub fn new(prime: Prime) -> ModuleOracle {
        ModuleOracle {
            prime,
            evaluators: HashMap::new(),
        }
    }

    fn evaluator(&mut self, w: u64) -> Result<&mut Evaluator> {
        if !self.evaluators.contains_key(&w) {
            self.evaluators.insert(w, Evaluator::new(self.prime, w)?);
        }
        Ok(self.evaluators.get_mut(&w).unwrap())
    }

    fn check(&self, e: &SteenrodElement) -> Result<()> {
        if e.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime.value(), e.prime().value()));
        }
        Ok(())
    }

    /// `F(z) - G(z)`.
    pub fn difference(&mut self, f: &SteenrodElement, g: &SteenrodElement) -> Result<BmuClass> {
        self.check(f)?;
        self.check(g)?;
        let w = operation_weight(f).max(operation_weight(g));
        let ev = self.evaluator(w)?;
        Ok(ev.element(f)?.sub(&ev.element(g)?))
    }

    /// `W(z) - G(z)` for a word `W` read as a composite.
    pub fn word_difference(&mut self, word: &[Letter], g: &SteenrodElement) -> Result<BmuClass> {
        self.check(g)?;
        let w = word_weight(self.prime, word).max(operation_weight(g));
        let ev = self.evaluator(w)?;
        Ok(ev.letters(word)?.sub(&ev.element(g)?))
    }

    pub fn equal(&mut self, f: &SteenrodElement, g: &SteenrodElement) -> Result<bool> {
        let (bf, bg) = (f.bidegree(), g.bidegree());
        if bf.is_some() && bg.is_some() && bf != bg {
            return Ok(false);
        }
        Ok(self.difference(f, g)?.is_zero())
    }

    pub fn word_equals(&mut self, word: &[Letter], g: &SteenrodElement) -> Result<bool> {
        Ok(self.word_difference(word, g)?.is_zero())
    }
}

/// `F(z) - G(z)`; see [`ModuleOracle`].
pub fn module_difference(f: &SteenrodElement, g: &SteenrodElement) -> Result<BmuClass> {
    ModuleOracle::new(f.prime()).difference(f, g)
}

/// Whether `F` and `G` act identically; elements of different bidegrees are
/// never equal.
pub fn equal_via_module(f: &SteenrodElement, g: &SteenrodElement) -> Result<bool> {
    let (bf, bg) = (f.bidegree(), g.bidegree());
    if bf.is_some() && bg.is_some() && bf != bg {
        return Ok(false);
    }
    Ok(module_difference(f, g)?.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u32) -> BmuRing {
        BmuRing::new(Prime::new(p).unwrap(), 2, 6).unwrap()
    }

    #[test]
    fn u_squared() {
        let r = ring(2);
        let u = r.u(1).unwrap();
        assert_eq!(u.mul(&u).unwrap().to_string(), "t v_1 + r u_1");
        let r = ring(3);
        let u = r.u(1).unwrap();
        assert!(u.mul(&u).unwrap().is_zero());
        let x = r.u(2).unwrap().mul(&u).unwrap();
        assert_eq!(x.to_string(), "2 u_1 u_2");
    }

    #[test]
    fn generator_actions() {
        let r = ring(2);
        let mut a = Action::new(r);
        let u = r.u(1).unwrap();
        assert_eq!(a.act_letter(&Letter::Beta, &u).unwrap().to_string(), "v_1");
        let v = r.v(1, 1).unwrap();
        assert_eq!(
            a.act_letter(&Letter::P(1), &v).unwrap().to_string(),
            "v_1^2"
        );
        assert!(a
            .act_letter(&Letter::P(1), &r.v(1, 2).unwrap())
            .unwrap()
            .is_zero());
        assert!(r
            .v(1, 1)
            .unwrap()
            .mul(&r.v(1, 5).unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn total_power_of_v() {
        for p in [2, 3] {
            let r = ring(p);
            let mut a = Action::new(r);
            let t = a.total_power(&r.v(1, 1).unwrap(), 1).unwrap();
            assert_eq!(t.to_string(), format!("v_1^{p} + v_1 d"));
        }
    }

    #[test]
    fn coaction_of_v() {
        let r = BmuRing::new(Prime::TWO, 1, 5).unwrap();
        let d = DualAlgebra::new(Prime::TWO);
        let c = coaction(&d, &r.v(1, 1).unwrap()).unwrap();
        let names: Vec<String> = c.iter().map(|(w, y)| format!("{w} ⊗ {y}")).collect();
        assert_eq!(names, ["1 ⊗ v_1", "xi_1 ⊗ v_1^2", "xi_2 ⊗ v_1^4"]);
        let one = coaction(&d, &r.one()).unwrap();
        assert_eq!(one.len(), 1);
    }
}
