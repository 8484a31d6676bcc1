//! Prime fields, the motivic coefficient ring `F_2[t, r]` (or `F_l` at odd
//! primes), bidegrees, and base-`l` binomial arithmetic.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime `l`, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Prime(u32);

impl Prime {
    pub const TWO: Prime = Prime(2);
    pub const THREE: Prime = Prime(3);

    pub fn new(p: u32) -> Result<Prime> {
        if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
            return Err(Error::NotPrime(p));
        }
        // scalars are multiplied in u64, exponents of l must stay representable
        if p >= 1 << 16 {
            return Err(Error::PrimeTooLarge(p));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_two(self) -> bool {
        self.0 == 2
    }

    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero scalar.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.0), "zero has no inverse");
        self.pow(a, (self.0 - 2) as u64)
    }

    /// `(-1)^k` as a scalar.
    #[inline]
    pub fn sign(self, k: u64) -> u32 {
        if k.is_multiple_of(2) {
            1 % self.0
        } else {
            self.0 - 1
        }
    }

    /// `l^k` as an integer.
    pub fn power(self, k: u32) -> u64 {
        (self.0 as u64).pow(k)
    }
}

impl TryFrom<u32> for Prime {
    type Error = Error;
    fn try_from(p: u32) -> Result<Prime> {
        Prime::new(p)
    }
}

impl From<Prime> for u32 {
    fn from(p: Prime) -> u32 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Topological degree and weight.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Bidegree {
    pub degree: i64,
    pub weight: i64,
}

impl Bidegree {
    pub const ZERO: Bidegree = Bidegree {
        degree: 0,
        weight: 0,
    };

    pub const fn new(degree: i64, weight: i64) -> Bidegree {
        Bidegree { degree, weight }
    }
}

impl Add for Bidegree {
    type Output = Bidegree;
    fn add(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.degree + o.degree, self.weight + o.weight)
    }
}

impl Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.degree - o.degree, self.weight - o.weight)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.degree, self.weight)
    }
}

/// `C(n, k) mod l` for `0 <= k <= n < l`.
fn small_binom(n: u64, k: u64, p: Prime) -> u32 {
    let mut num = 1u32;
    let mut den = 1u32;
    for i in 0..k {
        num = p.mul(num, ((n - i) % p.value() as u64) as u32);
        den = p.mul(den, ((i + 1) % p.value() as u64) as u32);
    }
    p.mul(num, p.inv(den))
}

/// Binomial coefficient `C(x, y) mod l` by Lucas' theorem.
pub fn binom_mod(x: u64, y: u64, p: Prime) -> u32 {
    if y > x {
        return 0;
    }
    if p.is_two() {
        return u32::from(y & !x == 0);
    }
    let l = p.value() as u64;
    let (mut x, mut y) = (x, y);
    let mut acc = 1u32;
    while y > 0 {
        let (xd, yd) = (x % l, y % l);
        if yd > xd {
            return 0;
        }
        acc = p.mul(acc, small_binom(xd, yd, p));
        x /= l;
        y /= l;
    }
    acc
}

/// Binomial coefficient with a possibly negative top entry; zero whenever
/// either argument is negative.
pub fn binom_mod_signed(x: i64, y: i64, p: Prime) -> u32 {
    if x < 0 || y < 0 {
        0
    } else {
        binom_mod(x as u64, y as u64, p)
    }
}

/// Number of carries when adding `a` and `b` in base `l`.
pub fn carries(a: u64, b: u64, p: Prime) -> u32 {
    let l = p.value() as u64;
    let (mut a, mut b, mut carry, mut count) = (a, b, 0u64, 0u32);
    while a > 0 || b > 0 || carry > 0 {
        let s = a % l + b % l + carry;
        carry = u64::from(s >= l);
        count += carry as u32;
        a /= l;
        b /= l;
    }
    count
}

/// One term `scalar * t^t * r^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffTerm {
    pub t: u32,
    pub r: u32,
    pub scalar: u32,
}

impl CoeffTerm {
    pub fn bidegree(&self) -> Bidegree {
        Bidegree::new(self.r as i64, (self.t + self.r) as i64)
    }
}

/// Element of the coefficient ring: `F_2[t, r]` at `l = 2`, `F_l` otherwise.
/// Terms are kept sorted by `(t, r)` with no zero scalars.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MotCoeff {
    prime: Prime,
    terms: Vec<CoeffTerm>,
}

impl MotCoeff {
    pub fn zero(prime: Prime) -> MotCoeff {
        MotCoeff {
            prime,
            terms: Vec::new(),
        }
    }

    pub fn one(prime: Prime) -> MotCoeff {
        MotCoeff::scalar(prime, 1)
    }

    pub fn scalar(prime: Prime, c: i64) -> MotCoeff {
        let c = prime.reduce(c);
        let terms = if c == 0 {
            vec![]
        } else {
            vec![CoeffTerm {
                t: 0,
                r: 0,
                scalar: c,
            }]
        };
        MotCoeff { prime, terms }
    }

    /// `c * t^t * r^r`; fails at odd primes unless `t = r = 0`.
    pub fn monomial(prime: Prime, t: u32, r: u32, c: i64) -> Result<MotCoeff> {
        if !prime.is_two() && (t > 0 || r > 0) {
            return Err(Error::CoefficientAtOddPrime);
        }
        let c = prime.reduce(c);
        let terms = if c == 0 {
            vec![]
        } else {
            vec![CoeffTerm { t, r, scalar: c }]
        };
        Ok(MotCoeff { prime, terms })
    }

    /// The class `t` (bidegree (0,1)). Only exists at `l = 2`.
    pub fn tau() -> MotCoeff {
        MotCoeff::monomial(Prime::TWO, 1, 0, 1).unwrap()
    }

    /// The class `r` (bidegree (1,1)). Only exists at `l = 2`.
    pub fn rho() -> MotCoeff {
        MotCoeff::monomial(Prime::TWO, 0, 1, 1).unwrap()
    }

    pub fn from_terms(
        prime: Prime,
        terms: impl IntoIterator<Item = CoeffTerm>,
    ) -> Result<MotCoeff> {
        let mut out = MotCoeff::zero(prime);
        for term in terms {
            if !prime.is_two() && (term.t > 0 || term.r > 0) {
                return Err(Error::CoefficientAtOddPrime);
            }
            out.add_term(term.t, term.r, term.scalar % prime.value());
        }
        Ok(out)
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.prime
    }

    #[inline]
    pub fn terms(&self) -> &[CoeffTerm] {
        &self.terms
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms[0]
                == CoeffTerm {
                    t: 0,
                    r: 0,
                    scalar: 1,
                }
    }

    /// The scalar if this is a pure scalar (or zero).
    pub fn as_scalar(&self) -> Option<u32> {
        match self.terms.as_slice() {
            [] => Some(0),
            [CoeffTerm { t: 0, r: 0, scalar }] => Some(*scalar),
            _ => None,
        }
    }

    /// Bidegree of a homogeneous nonzero coefficient.
    pub fn bidegree(&self) -> Option<Bidegree> {
        let first = self.terms.first()?.bidegree();
        self.terms
            .iter()
            .all(|t| t.bidegree() == first)
            .then_some(first)
    }

    /// Splits into homogeneous pieces, one per `(t, r)` term.
    pub fn monomials(&self) -> impl Iterator<Item = MotCoeff> + '_ {
        self.terms.iter().map(move |&term| MotCoeff {
            prime: self.prime,
            terms: vec![term],
        })
    }

    pub(crate) fn add_term(&mut self, t: u32, r: u32, c: u32) {
        if c == 0 {
            return;
        }
        match self.terms.binary_search_by(|x| (x.t, x.r).cmp(&(t, r))) {
            Ok(i) => {
                let s = self.prime.add(self.terms[i].scalar, c);
                if s == 0 {
                    self.terms.remove(i);
                } else {
                    self.terms[i].scalar = s;
                }
            }
            Err(i) => self.terms.insert(i, CoeffTerm { t, r, scalar: c }),
        }
    }

    pub fn add_assign_ref(&mut self, other: &MotCoeff) {
        debug_assert_eq!(self.prime, other.prime);
        for term in &other.terms {
            self.add_term(term.t, term.r, term.scalar);
        }
    }

    pub fn scale(&self, c: u32) -> MotCoeff {
        let c = c % self.prime.value();
        if c == 0 {
            return MotCoeff::zero(self.prime);
        }
        let terms = self
            .terms
            .iter()
            .map(|x| CoeffTerm {
                scalar: self.prime.mul(x.scalar, c),
                ..*x
            })
            .collect();
        MotCoeff {
            prime: self.prime,
            terms,
        }
    }

    /// Multiplies by `t^t r^r`.
    pub fn shift(&self, t: u32, r: u32) -> MotCoeff {
        let terms = self
            .terms
            .iter()
            .map(|x| CoeffTerm {
                t: x.t + t,
                r: x.r + r,
                scalar: x.scalar,
            })
            .collect();
        MotCoeff {
            prime: self.prime,
            terms,
        }
    }

    pub fn pow(&self, e: u32) -> MotCoeff {
        let mut acc = MotCoeff::one(self.prime);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluates at `t = tau_val`, `r = rho_val`.
    pub fn specialize(&self, tau_val: u32, rho_val: u32) -> u32 {
        let p = self.prime;
        self.terms.iter().fold(0, |acc, x| {
            let v = p.mul(
                x.scalar,
                p.mul(p.pow(tau_val, x.t as u64), p.pow(rho_val, x.r as u64)),
            );
            p.add(acc, v)
        })
    }
}

impl Add<&MotCoeff> for &MotCoeff {
    type Output = MotCoeff;
    fn add(self, o: &MotCoeff) -> MotCoeff {
        let mut out = self.clone();
        out.add_assign_ref(o);
        out
    }
}

impl AddAssign<&MotCoeff> for MotCoeff {
    fn add_assign(&mut self, o: &MotCoeff) {
        self.add_assign_ref(o);
    }
}

impl Neg for &MotCoeff {
    type Output = MotCoeff;
    fn neg(self) -> MotCoeff {
        self.scale(self.prime.value() - 1)
    }
}

impl Sub<&MotCoeff> for &MotCoeff {
    type Output = MotCoeff;
    fn sub(self, o: &MotCoeff) -> MotCoeff {
        self + &(-o)
    }
}

impl Mul<&MotCoeff> for &MotCoeff {
    type Output = MotCoeff;
    fn mul(self, o: &MotCoeff) -> MotCoeff {
        debug_assert_eq!(self.prime, o.prime);
        let p = self.prime;
        if let Some(c) = o.as_scalar() {
            return self.scale(c);
        }
        if let Some(c) = self.as_scalar() {
            return o.scale(c);
        }
        let mut out = MotCoeff::zero(p);
        for a in &self.terms {
            for b in &o.terms {
                out.add_term(a.t + b.t, a.r + b.r, p.mul(a.scalar, b.scalar));
            }
        }
        out
    }
}

impl fmt::Display for CoeffTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.scalar != 1 || (self.t == 0 && self.r == 0) {
            parts.push(self.scalar.to_string());
        }
        for (name, e) in [("t", self.t), ("r", self.r)] {
            match e {
                0 => {}
                1 => parts.push(name.to_string()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Display for MotCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}
