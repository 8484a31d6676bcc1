//! The dual algebra: monomials in `tau_k` and `xi_k`, the motivic relation
//! for `tau_k^2`, the twisted tensor product and the coproduct.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use dashmap::DashMap;

use crate::coeff::{Bidegree, MotCoeff, Prime};
use crate::error::{Error, Result};

/// `tau_0^{e_0} tau_1^{e_1} ... xi_1^{r_1} xi_2^{r_2} ...`.
///
/// `tau` is a bit set (bit `k` is `e_k`), `xi[k - 1]` is `r_k`, trimmed of
/// trailing zeros. Also used as the index sequence of a Milnor basis element
/// and of an admissible monomial.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DualMonomial {
    tau: u64,
    xi: Vec<u32>,
}

impl DualMonomial {
    pub fn one() -> DualMonomial {
        DualMonomial::default()
    }

    pub fn tau(k: u32) -> DualMonomial {
        DualMonomial {
            tau: 1 << k,
            xi: Vec::new(),
        }
    }

    pub fn xi(k: u32, e: u32) -> DualMonomial {
        let mut m = DualMonomial::one();
        if k > 0 {
            m.set_r(k, e);
        }
        m
    }

    /// Builds from `eps = (e_0, e_1, ...)` and `r = (r_1, r_2, ...)`.
    pub fn from_parts(eps: &[bool], r: &[u32]) -> DualMonomial {
        let tau = eps
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &e)| acc | (u64::from(e) << k));
        let mut xi = r.to_vec();
        while xi.last() == Some(&0) {
            xi.pop();
        }
        DualMonomial { tau, xi }
    }

    /// `tau(X)` for a finite set `X` of indices.
    pub fn tau_set(set: &[u32]) -> DualMonomial {
        DualMonomial {
            tau: set.iter().fold(0, |acc, &k| acc | 1 << k),
            xi: Vec::new(),
        }
    }

    #[inline]
    pub fn tau_bits(&self) -> u64 {
        self.tau
    }

    #[inline]
    pub fn eps(&self, k: u32) -> bool {
        k < 64 && self.tau >> k & 1 == 1
    }

    /// Exponent `r_k` of `xi_k` for `k >= 1`.
    #[inline]
    pub fn r(&self, k: u32) -> u32 {
        if k == 0 {
            return 0;
        }
        self.xi.get(k as usize - 1).copied().unwrap_or(0)
    }

    pub fn r_seq(&self) -> &[u32] {
        &self.xi
    }

    pub fn set_r(&mut self, k: u32, e: u32) {
        assert!(k >= 1);
        let i = k as usize - 1;
        if self.xi.len() <= i {
            if e == 0 {
                return;
            }
            self.xi.resize(i + 1, 0);
        }
        self.xi[i] = e;
        while self.xi.last() == Some(&0) {
            self.xi.pop();
        }
    }

    pub fn set_eps(&mut self, k: u32, e: bool) {
        if e {
            self.tau |= 1 << k;
        } else {
            self.tau &= !(1 << k);
        }
    }

    pub fn is_one(&self) -> bool {
        self.tau == 0 && self.xi.is_empty()
    }

    pub fn tau_count(&self) -> u32 {
        self.tau.count_ones()
    }

    /// Number of positions `k` that may be nonzero (`e_k` or `r_k`).
    pub fn len(&self) -> u32 {
        (64 - self.tau.leading_zeros()).max(self.xi.len() as u32 + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.is_one()
    }

    /// Largest `k` with `tau_k` or `xi_k` present; `None` for the unit.
    pub fn max_index(&self) -> Option<u32> {
        let t = (self.tau != 0).then(|| 63 - self.tau.leading_zeros());
        let x = (!self.xi.is_empty()).then_some(self.xi.len() as u32);
        t.max(x)
    }

    pub fn weight(&self, p: Prime) -> u64 {
        let mut w = 0;
        for k in 0..64 {
            if self.eps(k) {
                w += p.power(k) - 1;
            }
        }
        for (i, &r) in self.xi.iter().enumerate() {
            w += r as u64 * (p.power(i as u32 + 1) - 1);
        }
        w
    }

    pub fn bidegree(&self, p: Prime) -> Bidegree {
        let w = self.weight(p) as i64;
        Bidegree::new(2 * w + self.tau_count() as i64, w)
    }

    /// Parity of the first degree.
    #[inline]
    pub fn is_odd(&self) -> bool {
        self.tau.count_ones() % 2 == 1
    }

    pub(crate) fn mul_xi_part(&mut self, other: &[u32]) {
        if self.xi.len() < other.len() {
            self.xi.resize(other.len(), 0);
        }
        for (a, &b) in self.xi.iter_mut().zip(other) {
            *a += b;
        }
    }

    /// Divides off the `xi` part of `other` if possible.
    pub fn strip_xi(&self, other: &[u32]) -> Option<DualMonomial> {
        let mut out = self.clone();
        for (i, &b) in other.iter().enumerate() {
            let a = out.xi.get_mut(i)?;
            *a = a.checked_sub(b)?;
        }
        while out.xi.last() == Some(&0) {
            out.xi.pop();
        }
        Some(out)
    }
}

impl Ord for DualMonomial {
    /// Lexicographic on `(e_0, r_1, e_1, r_2, ...)` read from the right.
    fn cmp(&self, other: &DualMonomial) -> Ordering {
        let n = self.len().max(other.len());
        for k in (1..n).rev() {
            let c = self
                .eps(k)
                .cmp(&other.eps(k))
                .then(self.r(k).cmp(&other.r(k)));
            if c != Ordering::Equal {
                return c;
            }
        }
        self.eps(0).cmp(&other.eps(0))
    }
}

impl PartialOrd for DualMonomial {
    fn partial_cmp(&self, other: &DualMonomial) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DualMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for k in 0..64 {
            if self.eps(k) {
                parts.push(format!("tau_{k}"));
            }
        }
        for (i, &r) in self.xi.iter().enumerate() {
            match r {
                0 => {}
                1 => parts.push(format!("xi_{}", i + 1)),
                _ => parts.push(format!("xi_{}^{}", i + 1, r)),
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// Writes `monomial * coefficient` with the coefficient on the right, one
/// rendered term per coefficient term.
pub(crate) fn render_right(m: &impl fmt::Display, c: &MotCoeff, is_unit: bool) -> Vec<String> {
    c.terms()
        .iter()
        .map(|term| {
            let mut parts = Vec::new();
            if term.scalar != 1 {
                parts.push(term.scalar.to_string());
            }
            if !is_unit || (term.t == 0 && term.r == 0 && term.scalar == 1) {
                parts.push(m.to_string());
            }
            let tail = crate::coeff::CoeffTerm { scalar: 1, ..*term };
            if tail.t > 0 || tail.r > 0 {
                parts.push(tail.to_string());
            }
            parts.join(" ")
        })
        .collect()
}

/// Right-coefficient combination of dual monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualElement {
    prime: Prime,
    terms: BTreeMap<DualMonomial, MotCoeff>,
}

impl DualElement {
    pub fn zero(prime: Prime) -> DualElement {
        DualElement {
            prime,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(prime: Prime) -> DualElement {
        DualElement::from_monomial(prime, DualMonomial::one())
    }

    pub fn from_monomial(prime: Prime, m: DualMonomial) -> DualElement {
        let mut e = DualElement::zero(prime);
        e.add_term(m, &MotCoeff::one(prime));
        e
    }

    pub fn from_terms(
        prime: Prime,
        terms: impl IntoIterator<Item = (DualMonomial, MotCoeff)>,
    ) -> DualElement {
        let mut e = DualElement::zero(prime);
        for (m, c) in terms {
            e.add_term(m, &c);
        }
        e
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

    pub fn coefficient(&self, m: &DualMonomial) -> MotCoeff {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| MotCoeff::zero(self.prime))
    }

    pub fn add_term(&mut self, m: DualMonomial, c: &MotCoeff) {
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

    pub fn add(&self, other: &DualElement) -> DualElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale_right(&self, c: &MotCoeff) -> DualElement {
        DualElement::from_terms(
            self.prime,
            self.terms.iter().map(|(m, x)| (m.clone(), x * c)),
        )
    }

    /// Bidegree of a homogeneous element; coefficients count negatively.
    pub fn bidegree(&self) -> Option<Bidegree> {
        let mut out = None;
        for (m, c) in &self.terms {
            for part in c.monomials() {
                let b = m.bidegree(self.prime) - part.bidegree()?;
                match out {
                    None => out = Some(b),
                    Some(o) if o != b => return None,
                    _ => {}
                }
            }
        }
        out
    }
}

impl fmt::Display for DualElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .flat_map(|(m, c)| render_right(m, c, m.is_one()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `sum a (x) b * c`, coefficients on the right of the right factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualTensor {
    prime: Prime,
    terms: BTreeMap<(DualMonomial, DualMonomial), MotCoeff>,
}

impl DualTensor {
    pub fn zero(prime: Prime) -> DualTensor {
        DualTensor {
            prime,
            terms: BTreeMap::new(),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn terms(&self) -> &BTreeMap<(DualMonomial, DualMonomial), MotCoeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, a: &DualMonomial, b: &DualMonomial) -> MotCoeff {
        self.terms
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_else(|| MotCoeff::zero(self.prime))
    }

    pub fn add_term(&mut self, a: DualMonomial, b: DualMonomial, c: &MotCoeff) {
        if c.is_zero() {
            return;
        }
        let key = (a, b);
        match self.terms.get_mut(&key) {
            Some(x) => {
                x.add_assign_ref(c);
                if x.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    fn from_map(prime: Prime, map: HashMap<(DualMonomial, DualMonomial), MotCoeff>) -> DualTensor {
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        DualTensor { prime, terms }
    }
}

impl fmt::Display for DualTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .flat_map(|((a, b), c)| {
                render_right(b, c, false)
                    .into_iter()
                    .map(move |rhs| format!("{a} ⊗ {rhs}"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A tensor before canonicalization: `a * x (x) b * c` with an interior
/// coefficient `x` on the right of the left factor.
#[derive(Clone, Debug)]
pub struct RawTensorTerm {
    pub left: DualMonomial,
    pub inner: MotCoeff,
    pub right: DualMonomial,
    pub outer: MotCoeff,
}

/// Bound on one tensor factor. Weight, first degree and the largest
/// generator index of a monomial never decrease under multiplication, so a
/// term that fails the bound can be dropped early. A `tau_k` with
/// `k > max_tau_index` only disappears by squaring, which produces index
/// `k + 1`; this is dead once `k >= max_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FactorBound {
    pub max_weight: u64,
    pub max_degree: u64,
    pub max_index: u32,
    pub max_tau_index: u32,
}

impl FactorBound {
    pub fn admits(&self, m: &DualMonomial, p: Prime) -> bool {
        if m.max_index().is_some_and(|k| k > self.max_index) {
            return false;
        }
        if m.tau >> self.max_tau_index.max(self.max_index.saturating_sub(1)) >> 1 != 0 {
            return false;
        }
        let w = m.weight(p);
        w <= self.max_weight && 2 * w + m.tau_count() as u64 <= self.max_degree
    }

    /// Everything of bidegree at most `(d, w)` in both components.
    pub fn bidegree(p: Prime, d: u64, w: u64) -> FactorBound {
        let mut k = 0;
        while p.power(k + 1) - 1 <= w {
            k += 1;
        }
        FactorBound {
            max_weight: w,
            max_degree: d,
            max_index: k,
            max_tau_index: k,
        }
    }
}

/// Optional bounds on both factors of a tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct TensorBound {
    pub left: Option<FactorBound>,
    pub right: Option<FactorBound>,
}

impl TensorBound {
    pub const NONE: TensorBound = TensorBound {
        left: None,
        right: None,
    };
}

type RawMap = HashMap<(DualMonomial, DualMonomial), MotCoeff>;

fn accumulate(map: &mut HashMap<DualMonomial, MotCoeff>, m: DualMonomial, c: MotCoeff) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&m) {
        Some(x) => x.add_assign_ref(&c),
        None => {
            map.insert(m, c);
        }
    }
}

fn accumulate2(map: &mut RawMap, key: (DualMonomial, DualMonomial), c: &MotCoeff) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&key) {
        Some(x) => x.add_assign_ref(c),
        None => {
            map.insert(key, c.clone());
        }
    }
}

/// Arithmetic context for the dual algebra at a fixed prime, with caches.
pub struct DualAlgebra {
    prime: Prime,
    lambda_tau_powers: RwLock<Vec<Arc<DualElement>>>,
    mono_products: DashMap<(DualMonomial, DualMonomial), Arc<Vec<(DualMonomial, MotCoeff)>>>,
}

impl DualAlgebra {
    pub fn new(prime: Prime) -> DualAlgebra {
        DualAlgebra {
            prime,
            lambda_tau_powers: RwLock::new(vec![Arc::new(DualElement::one(prime))]),
            mono_products: DashMap::new(),
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

    /// Multiplies by `tau_k` at `l = 2`, rewriting squares.
    fn mul_tau_two(
        &self,
        m: DualMonomial,
        k: u32,
        c: MotCoeff,
        out: &mut HashMap<DualMonomial, MotCoeff>,
    ) {
        if !m.eps(k) {
            let mut m = m;
            m.set_eps(k, true);
            accumulate(out, m, c);
            return;
        }
        let mut base = m;
        base.set_eps(k, false);
        let mut with_xi = base.clone();
        with_xi.set_r(k + 1, with_xi.r(k + 1) + 1);
        accumulate(out, with_xi.clone(), c.shift(1, 0));
        let cr = c.shift(0, 1);
        self.mul_tau_two(with_xi, 0, cr.clone(), out);
        self.mul_tau_two(base, k + 1, cr, out);
    }

    fn compute_monomial_product(
        &self,
        a: &DualMonomial,
        b: &DualMonomial,
    ) -> Vec<(DualMonomial, MotCoeff)> {
        let p = self.prime;
        if !p.is_two() {
            if a.tau & b.tau != 0 {
                return vec![];
            }
            // sign of sorting tau_A tau_B
            let mut inversions = 0u32;
            let mut bits = b.tau;
            while bits != 0 {
                let j = bits.trailing_zeros();
                inversions += (a.tau >> j >> 1).count_ones();
                bits &= bits - 1;
            }
            let mut m = a.clone();
            m.tau |= b.tau;
            m.mul_xi_part(&b.xi);
            return vec![(
                m,
                MotCoeff::scalar(p, if inversions.is_multiple_of(2) { 1 } else { -1 }),
            )];
        }
        let mut m = a.clone();
        m.mul_xi_part(&b.xi);
        let mut current: HashMap<DualMonomial, MotCoeff> = HashMap::new();
        current.insert(m, MotCoeff::one(p));
        let mut bits = b.tau;
        while bits != 0 {
            let k = bits.trailing_zeros();
            bits &= bits - 1;
            let mut next = HashMap::new();
            for (m, c) in current {
                self.mul_tau_two(m, k, c, &mut next);
            }
            next.retain(|_, c| !c.is_zero());
            current = next;
        }
        current.into_iter().collect()
    }

    /// Product of two monomials as `sum m_i * c_i`.
    pub fn mul_monomials(
        &self,
        a: &DualMonomial,
        b: &DualMonomial,
    ) -> Arc<Vec<(DualMonomial, MotCoeff)>> {
        if a.tau & b.tau == 0 {
            let p = self.prime;
            if p.is_two() || a.tau == 0 || b.tau == 0 {
                let mut m = a.clone();
                m.tau |= b.tau;
                m.mul_xi_part(&b.xi);
                return Arc::new(vec![(m, MotCoeff::one(p))]);
            }
        }
        let key = (a.clone(), b.clone());
        if let Some(v) = self.mono_products.get(&key) {
            return v.clone();
        }
        let v = Arc::new(self.compute_monomial_product(a, b));
        self.mono_products.insert(key, v.clone());
        v
    }

    pub fn mul(&self, x: &DualElement, y: &DualElement) -> Result<DualElement> {
        self.check(x.prime)?;
        self.check(y.prime)?;
        let mut out = HashMap::new();
        for (a, c) in &x.terms {
            for (b, d) in &y.terms {
                let cd = c * d;
                for (m, k) in self.mul_monomials(a, b).iter() {
                    accumulate(&mut out, m.clone(), k * &cd);
                }
            }
        }
        Ok(DualElement::from_terms(self.prime, out))
    }

    fn lambda_tau_power(&self, a: u32) -> Arc<DualElement> {
        if let Some(x) = self.lambda_tau_powers.read().unwrap().get(a as usize) {
            return x.clone();
        }
        let mut guard = self.lambda_tau_powers.write().unwrap();
        let p = self.prime;
        let step = DualElement::from_terms(
            p,
            [
                (DualMonomial::one(), MotCoeff::tau()),
                (DualMonomial::tau(0), MotCoeff::rho()),
            ],
        );
        while guard.len() <= a as usize {
            let next = self.mul(guard.last().unwrap(), &step).unwrap();
            guard.push(Arc::new(next));
        }
        guard[a as usize].clone()
    }

    /// The left unit: `lambda*(t) = t + tau_0 r`, `lambda*(r) = r`, extended
    /// multiplicatively.
    pub fn lambda_star(&self, c: &MotCoeff) -> DualElement {
        let p = self.prime;
        if let Some(s) = c.as_scalar() {
            return DualElement::one(p).scale_right(&MotCoeff::scalar(p, s as i64));
        }
        let mut out = DualElement::zero(p);
        for term in c.terms() {
            let base = self.lambda_tau_power(term.t);
            let shift = MotCoeff::monomial(p, 0, term.r, term.scalar as i64).unwrap();
            for (m, x) in &base.terms {
                out.add_term(m.clone(), &(x * &shift));
            }
        }
        out
    }

    /// Canonical form of a tensor with interior coefficients, moving each
    /// interior coefficient into the right factor through `lambda*`.
    pub fn tensor_normalize(&self, raw: &[RawTensorTerm]) -> DualTensor {
        let mut map = RawMap::new();
        for term in raw {
            self.push_twisted(
                &mut map,
                term.left.clone(),
                &term.inner,
                &term.right,
                &term.outer,
                TensorBound::NONE,
            );
        }
        DualTensor::from_map(self.prime, map)
    }

    /// Adds `left * inner (x) right * outer` in canonical form.
    fn push_twisted(
        &self,
        map: &mut RawMap,
        left: DualMonomial,
        inner: &MotCoeff,
        right: &DualMonomial,
        outer: &MotCoeff,
        bound: TensorBound,
    ) {
        let p = self.prime;
        if let Some(b) = bound.left {
            if !b.admits(&left, p) {
                return;
            }
        }
        if let Some(b) = bound.right {
            if !b.admits(right, p) {
                return;
            }
        }
        if let Some(s) = inner.as_scalar() {
            let c = outer.scale(s);
            accumulate2(map, (left, right.clone()), &c);
            return;
        }
        let twisted = self.lambda_star(inner);
        for (m, x) in &twisted.terms {
            let xo = x * outer;
            for (n, y) in self.mul_monomials(m, right).iter() {
                if bound.right.is_none_or(|b| b.admits(n, p)) {
                    accumulate2(map, (left.clone(), n.clone()), &(y * &xo));
                }
            }
        }
    }

    fn tensor_mul_map(&self, x: &RawMap, y: &RawMap, bound: TensorBound) -> RawMap {
        let p = self.prime;
        let mut out = RawMap::new();
        for ((a, b), c) in x {
            for ((a2, b2), c2) in y {
                let mut cc = c * c2;
                if !p.is_two() && b.is_odd() && a2.is_odd() {
                    cc = -&cc;
                }
                let lefts = self.mul_monomials(a, a2);
                let rights = self.mul_monomials(b, b2);
                for (m, k) in lefts.iter() {
                    for (n, z) in rights.iter() {
                        self.push_twisted(&mut out, m.clone(), k, n, &(z * &cc), bound);
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn tensor_mul(&self, x: &DualTensor, y: &DualTensor) -> DualTensor {
        let xm: RawMap = x.terms.clone().into_iter().collect();
        let ym: RawMap = y.terms.clone().into_iter().collect();
        DualTensor::from_map(self.prime, self.tensor_mul_map(&xm, &ym, TensorBound::NONE))
    }

    fn generator_coproduct(&self, is_tau: bool, k: u32) -> RawMap {
        let p = self.prime;
        let one = MotCoeff::one(p);
        let mut map = RawMap::new();
        for i in 0..=k {
            let e = p.power(i) as u32;
            let left = if is_tau {
                DualMonomial::tau(i)
            } else {
                DualMonomial::xi(i, 1)
            };
            accumulate2(&mut map, (left, DualMonomial::xi(k - i, e)), &one);
        }
        if is_tau {
            accumulate2(&mut map, (DualMonomial::one(), DualMonomial::tau(k)), &one);
        }
        map
    }

    /// Coproduct of a monomial, keeping only terms within `bound`.
    pub fn monomial_coproduct(&self, w: &DualMonomial, bound: TensorBound) -> DualTensor {
        let p = self.prime;
        let mut acc = RawMap::new();
        acc.insert((DualMonomial::one(), DualMonomial::one()), MotCoeff::one(p));
        for k in 0..64 {
            if w.eps(k) {
                acc = self.tensor_mul_map(&acc, &self.generator_coproduct(true, k), bound);
            }
        }
        for (i, &r) in w.xi.iter().enumerate() {
            let g = self.generator_coproduct(false, i as u32 + 1);
            for _ in 0..r {
                acc = self.tensor_mul_map(&acc, &g, bound);
            }
        }
        DualTensor::from_map(p, acc)
    }

    /// The coproduct, a ring morphism into the twisted tensor product.
    pub fn coproduct(&self, x: &DualElement) -> Result<DualTensor> {
        self.check(x.prime)?;
        let mut out = DualTensor::zero(self.prime);
        for (m, c) in &x.terms {
            for ((a, b), d) in self.monomial_coproduct(m, TensorBound::NONE).terms {
                out.add_term(a, b, &(&d * c));
            }
        }
        Ok(out)
    }

    /// Both sides of coassociativity as triple tensors.
    pub fn coassociativity_sides(
        &self,
        x: &DualElement,
    ) -> Result<(
        BTreeMap<[DualMonomial; 3], MotCoeff>,
        BTreeMap<[DualMonomial; 3], MotCoeff>,
    )> {
        let p = self.prime;
        let psi = self.coproduct(x)?;
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        let add = |map: &mut BTreeMap<[DualMonomial; 3], MotCoeff>,
                   key: [DualMonomial; 3],
                   c: MotCoeff| {
            if c.is_zero() {
                return;
            }
            let e = map.entry(key).or_insert_with(|| MotCoeff::zero(p));
            e.add_assign_ref(&c);
        };
        for ((a, b), c) in psi.terms() {
            // (psi (x) id): a (x) b c  ->  sum a' (x) a'' k (x) b c, moving k right
            for ((a1, a2), k) in self.monomial_coproduct(a, TensorBound::NONE).terms() {
                for (m, x) in self.lambda_star(k).terms() {
                    for (n, y) in self.mul_monomials(m, b).iter() {
                        add(&mut left, [a1.clone(), a2.clone(), n.clone()], &(x * y) * c);
                    }
                }
            }
            // (id (x) psi): a (x) psi(b) c
            for ((b1, b2), k) in self.monomial_coproduct(b, TensorBound::NONE).terms() {
                add(&mut right, [a.clone(), b1.clone(), b2.clone()], k * c);
            }
        }
        left.retain(|_, c| !c.is_zero());
        right.retain(|_, c| !c.is_zero());
        Ok((left, right))
    }
}

/// All dual monomials of weight exactly `w`, in increasing order.
pub fn monomials_of_weight(p: Prime, w: u64) -> Vec<DualMonomial> {
    monomials_of_weight_bounded(p, w, u32::MAX)
}

/// Dual monomials of weight `w` using only generators of index at most
/// `max_index`, in increasing order.
pub fn monomials_of_weight_bounded(p: Prime, w: u64, max_index: u32) -> Vec<DualMonomial> {
    let mut out = Vec::new();
    let mut top = 0u32;
    while top < max_index && p.power(top + 1) - 1 <= w {
        top += 1;
    }
    let mut current = DualMonomial::one();
    fill_weight(p, top, w, &mut current, &mut out);
    out.sort();
    out
}

fn fill_weight(
    p: Prime,
    k: u32,
    remaining: u64,
    current: &mut DualMonomial,
    out: &mut Vec<DualMonomial>,
) {
    if k == 0 {
        if remaining == 0 {
            for e in [false, true] {
                let mut m = current.clone();
                m.set_eps(0, e);
                out.push(m);
            }
        }
        return;
    }
    let g = p.power(k) - 1;
    for e in [false, true] {
        let used_tau = if e { g } else { 0 };
        if used_tau > remaining {
            continue;
        }
        current.set_eps(k, e);
        let rest = remaining - used_tau;
        for r in 0..=rest / g {
            current.set_r(k, r as u32);
            fill_weight(p, k - 1, rest - r * g, current, out);
        }
        current.set_r(k, 0);
    }
    current.set_eps(k, false);
}

/// All dual monomials of bidegree exactly `b`.
pub fn monomials_of_bidegree(p: Prime, b: Bidegree) -> Vec<DualMonomial> {
    if b.weight < 0 {
        return vec![];
    }
    monomials_of_weight(p, b.weight as u64)
        .into_iter()
        .filter(|m| m.bidegree(p) == b)
        .collect()
}
