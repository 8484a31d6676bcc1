//! Text syntax shared by operations, Milnor basis elements, dual elements
//! and classes.
//!
//! Terms are separated by `+` and factors by whitespace:
//! `b`, `P^n`, `Sq^n`, `Q_n`, `Q{i,j,...}`, `q_n`, `Pm(r1,r2,...)`,
//! `xi_k[^e]`, `tau_k`, `t[^a]`, `r[^b]`, integers, `u_i[^e]`, `v_i[^e]`.

use crate::algebra::{Letter, SteenrodAlgebra, SteenrodElement};
use crate::bmu::{BmuClass, BmuRing};
use crate::coeff::{MotCoeff, Prime};
use crate::dual::{DualAlgebra, DualElement, DualMonomial};
use crate::error::{Error, Result};
use crate::milnor::Duality;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Beta,
    P(u32),
    Scalar(i64),
    T(u32),
    R(u32),
    Q(u32),
    QSet(Vec<u32>),
    QLower(u32),
    Pm(Vec<u32>),
    Xi(u32, u32),
    Tau(u32),
    U(u32, u32),
    V(u32, u32),
}

impl Factor {
    fn is_coefficient(&self) -> bool {
        matches!(self, Factor::Scalar(_) | Factor::T(_) | Factor::R(_))
    }

    fn is_operation(&self) -> bool {
        matches!(
            self,
            Factor::Beta
                | Factor::P(_)
                | Factor::Q(_)
                | Factor::QSet(_)
                | Factor::QLower(_)
                | Factor::Pm(_)
        )
    }
}

/// A parsed sum of products of factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub prime: Prime,
    pub terms: Vec<Vec<Factor>>,
    pub warnings: Vec<String>,
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn int(&mut self) -> Result<i64> {
        let start = self.pos;
        self.eat('-');
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let s = &self.text[start..self.pos];
        s.parse().or_else(|_| {
            self.pos = start;
            self.err("expected an integer")
        })
    }

    fn word(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.bump();
        }
        &self.text[start..self.pos]
    }

    fn int_list(&mut self, close: char) -> Result<Vec<i64>> {
        let mut out = Vec::new();
        self.skip_ws();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            self.skip_ws();
            out.push(self.int()?);
            self.skip_ws();
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn exponent(&mut self) -> Result<u32> {
        if !self.eat('^') {
            return Ok(1);
        }
        let at = self.pos;
        let e = self.int()?;
        u32::try_from(e).map_err(|_| Error::Parse {
            pos: at,
            msg: "negative exponent".into(),
        })
    }

    fn index(&mut self, lead: char) -> Result<i64> {
        self.expect(lead)?;
        self.int()
    }
}

/// A factor, or `None` when a negative index makes it zero.
type Parsed = Option<Vec<Factor>>;

fn nonneg(pos: usize, what: &str, i: i64, warnings: &mut Vec<String>) -> Option<u32> {
    if i < 0 {
        warnings.push(format!(
            "{what} with negative index {i} at byte {pos} is zero"
        ));
        None
    } else {
        Some(i as u32)
    }
}

fn positive_index(s: &Scanner, what: &str, i: i64) -> Result<u32> {
    if i < 1 {
        return s.err(format!("{what} index must be at least 1"));
    }
    Ok(i as u32)
}

fn factor(s: &mut Scanner, prime: Prime, warnings: &mut Vec<String>) -> Result<Parsed> {
    let start = s.pos;
    if s.peek().is_some_and(|c| c.is_ascii_digit() || c == '-') {
        return Ok(Some(vec![Factor::Scalar(s.int()?)]));
    }
    let name = s.word();
    let out = match name {
        "b" => vec![Factor::Beta],
        "P" => match nonneg(start, "P", s.index('^')?, warnings) {
            None => return Ok(None),
            Some(0) => vec![],
            Some(n) => vec![Factor::P(n)],
        },
        "Sq" => {
            if !prime.is_two() {
                s.pos = start;
                return s.err("Sq is only available at the prime 2");
            }
            match nonneg(start, "Sq", s.index('^')?, warnings) {
                None => return Ok(None),
                Some(n) => {
                    let mut v = Vec::new();
                    if n % 2 == 1 {
                        v.push(Factor::Beta);
                    }
                    if n / 2 > 0 {
                        v.push(Factor::P(n / 2));
                    }
                    v
                }
            }
        }
        "Q" => {
            if s.eat('{') {
                let mut set = Vec::new();
                for i in s.int_list('}')? {
                    match nonneg(start, "Q", i, warnings) {
                        None => return Ok(None),
                        Some(i) => set.push(i),
                    }
                }
                vec![Factor::QSet(set)]
            } else {
                match nonneg(start, "Q", s.index('_')?, warnings) {
                    None => return Ok(None),
                    Some(i) => vec![Factor::Q(i)],
                }
            }
        }
        "q" => match nonneg(start, "q", s.index('_')?, warnings) {
            None => return Ok(None),
            Some(0) => vec![],
            Some(i) => vec![Factor::QLower(i)],
        },
        "Pm" => {
            s.expect('(')?;
            let mut r = Vec::new();
            for x in s.int_list(')')? {
                match nonneg(start, "Pm", x, warnings) {
                    None => return Ok(None),
                    Some(x) => r.push(x),
                }
            }
            vec![Factor::Pm(r)]
        }
        "xi" => {
            let k = s.index('_')?;
            let e = s.exponent()?;
            match nonneg(start, "xi", k, warnings) {
                None => return Ok(None),
                Some(0) => vec![],
                Some(k) => vec![Factor::Xi(k, e)],
            }
        }
        "tau" => match nonneg(start, "tau", s.index('_')?, warnings) {
            None => return Ok(None),
            Some(k) => vec![Factor::Tau(k)],
        },
        "t" => vec![Factor::T(s.exponent()?)],
        "r" => vec![Factor::R(s.exponent()?)],
        "u" | "v" => {
            let i = s.index('_')?;
            let i = positive_index(s, name, i)?;
            let e = s.exponent()?;
            vec![if name == "u" {
                Factor::U(i, e)
            } else {
                Factor::V(i, e)
            }]
        }
        "" => return s.err("expected a factor"),
        _ => {
            s.pos = start;
            return s.err(format!("unknown factor `{name}`"));
        }
    };
    if s.peek().is_some_and(|c| !c.is_whitespace() && c != '+') {
        return s.err("unexpected character");
    }
    Ok(Some(out))
}

/// Parses an expression at the given prime.
pub fn parse(text: &str, prime: Prime) -> Result<Expr> {
    let mut s = Scanner { text, pos: 0 };
    let mut warnings = Vec::new();
    let mut terms = Vec::new();
    loop {
        let mut term = Some(Vec::new());
        let mut empty = true;
        loop {
            s.skip_ws();
            match s.peek() {
                None | Some('+') => break,
                _ => {}
            }
            empty = false;
            let f = factor(&mut s, prime, &mut warnings)?;
            term = match (term, f) {
                (Some(mut t), Some(f)) => {
                    t.extend(f);
                    Some(t)
                }
                _ => None,
            };
        }
        if empty {
            return s.err("empty term");
        }
        if let Some(t) = term {
            terms.push(t);
        }
        if !s.eat('+') {
            break;
        }
    }
    Ok(Expr {
        prime,
        terms,
        warnings,
    })
}

fn coefficient(prime: Prime, f: &Factor) -> Result<MotCoeff> {
    match f {
        Factor::Scalar(c) => Ok(MotCoeff::scalar(prime, *c)),
        Factor::T(a) => MotCoeff::monomial(prime, *a, 0, 1),
        Factor::R(b) => MotCoeff::monomial(prime, 0, *b, 1),
        _ => unreachable!(),
    }
}

fn unsupported<T>(f: &Factor, what: &str) -> Result<T> {
    Err(Error::Unsupported(format!("{f:?} cannot appear in {what}")))
}

impl Expr {
    /// The operation denoted, composing factors left to right.
    pub fn steenrod(&self, alg: &SteenrodAlgebra, duality: &Duality) -> Result<SteenrodElement> {
        let p = self.prime;
        let mut out = SteenrodElement::zero(p);
        for term in &self.terms {
            let value = if term
                .iter()
                .all(|f| f.is_coefficient() || matches!(f, Factor::Beta | Factor::P(_)))
            {
                let mut word = Vec::with_capacity(term.len());
                for f in term {
                    word.push(match f {
                        Factor::Beta => Letter::Beta,
                        Factor::P(n) => Letter::P(*n),
                        c => Letter::Coeff(coefficient(p, c)?),
                    });
                }
                alg.normalize(&word)?
            } else {
                let mut acc = SteenrodElement::one(p);
                for f in term {
                    let x = match f {
                        Factor::Beta | Factor::P(_) => {
                            let l = if let Factor::P(n) = f {
                                Letter::P(*n)
                            } else {
                                Letter::Beta
                            };
                            alg.normalize(&[l])?
                        }
                        Factor::Q(i) => duality.milnor_to_admissible(&duality.q_set(&[*i]))?,
                        Factor::QSet(set) => duality.milnor_to_admissible(&duality.q_set(set))?,
                        Factor::QLower(n) => duality.milnor_to_admissible(&duality.q_lower(*n))?,
                        Factor::Pm(r) => duality.milnor_to_admissible(&duality.pm(r))?,
                        c if c.is_coefficient() => {
                            SteenrodElement::coefficient_times_identity(&coefficient(p, c)?)
                        }
                        other => return unsupported(other, "an operation"),
                    };
                    acc = alg.multiply(&acc, &x)?;
                }
                acc
            };
            out = out.add(&value);
        }
        Ok(out)
    }

    /// The element of the dual algebra denoted; coefficients act on the right.
    pub fn dual(&self, dual: &DualAlgebra) -> Result<DualElement> {
        let p = self.prime;
        let mut out = DualElement::zero(p);
        for term in &self.terms {
            let mut acc = DualElement::one(p);
            let mut c = MotCoeff::one(p);
            for f in term {
                let m = match f {
                    Factor::Xi(k, e) => DualMonomial::xi(*k, *e),
                    Factor::Tau(k) => DualMonomial::tau(*k),
                    x if x.is_coefficient() => {
                        c = &c * &coefficient(p, x)?;
                        continue;
                    }
                    other => return unsupported(other, "a dual element"),
                };
                acc = dual.mul(&acc, &DualElement::from_monomial(p, m))?;
            }
            out = out.add(&acc.scale_right(&c));
        }
        Ok(out)
    }

    /// The class denoted in `ring`.
    pub fn class(&self, ring: BmuRing) -> Result<BmuClass> {
        let p = self.prime;
        let mut out = BmuClass::zero(ring);
        for term in &self.terms {
            let mut acc = ring.one();
            for f in term {
                let x = match f {
                    Factor::U(i, e) => ring.u(*i as usize)?.pow(*e),
                    Factor::V(i, e) => ring.v(*i as usize, *e)?,
                    c if c.is_coefficient() => ring.constant(&coefficient(p, c)?),
                    other => return unsupported(other, "a class"),
                };
                acc = acc.mul(&x)?;
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// The Milnor sequence `r` of a single `Pm(r)`, `q_n` or `1`.
    pub fn r_sequence(&self) -> Result<Vec<u32>> {
        let bad = || Error::Unsupported("expected a single Pm(...) or q_n".into());
        match self.terms.as_slice() {
            [t] => match t.as_slice() {
                [] => Ok(vec![]),
                [Factor::Pm(r)] => Ok(r.clone()),
                [Factor::QLower(n)] => {
                    let mut r = vec![0; *n as usize];
                    r[*n as usize - 1] = 1;
                    Ok(r)
                }
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }

    /// Largest `u`/`v` index and the data needed to size a ring.
    pub fn class_extent(&self) -> (usize, u32) {
        let mut arity = 0;
        let mut degree = 0;
        for term in &self.terms {
            let mut d = 0;
            for f in term {
                if let Factor::U(i, e) | Factor::V(i, e) = f {
                    arity = arity.max(*i as usize);
                    d += e;
                }
            }
            degree = degree.max(d);
        }
        (arity, degree)
    }

    /// Weight `(l - 1) sum n` over the `P^n` of each term, maximized.
    pub fn operation_weight(&self) -> u64 {
        let l = self.prime.value() as u64;
        self.terms
            .iter()
            .map(|t| {
                t.iter()
                    .map(|f| match f {
                        Factor::P(n) => (l - 1) * *n as u64,
                        Factor::QLower(n) => self.prime.power(*n) - 1,
                        Factor::Q(i) => self.prime.power(*i) - 1,
                        Factor::QSet(s) => s.iter().map(|i| self.prime.power(*i) - 1).sum(),
                        Factor::Pm(r) => r
                            .iter()
                            .enumerate()
                            .map(|(i, &x)| x as u64 * (self.prime.power(i as u32 + 1) - 1))
                            .sum(),
                        _ => 0,
                    })
                    .sum::<u64>()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn has_operations(&self) -> bool {
        self.terms.iter().flatten().any(Factor::is_operation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sugar_and_identity() {
        let e = parse("Sq^2 Sq^2", Prime::TWO).unwrap();
        assert_eq!(e.terms, vec![vec![Factor::P(1), Factor::P(1)]]);
        let e = parse("t Sq^3 Sq^1", Prime::TWO).unwrap();
        assert_eq!(
            e.terms,
            vec![vec![Factor::T(1), Factor::Beta, Factor::P(1), Factor::Beta]]
        );
        assert_eq!(
            parse("P^0", Prime::TWO).unwrap().terms,
            vec![Vec::<Factor>::new()]
        );
    }

    #[test]
    fn errors_and_warnings() {
        assert!(matches!(
            parse("Sq^2", Prime::THREE),
            Err(Error::Parse { pos: 0, .. })
        ));
        assert!(matches!(
            parse("P^1 + ", Prime::TWO),
            Err(Error::Parse { pos: 6, .. })
        ));
        assert!(matches!(
            parse("P^1 Z", Prime::TWO),
            Err(Error::Parse { pos: 4, .. })
        ));
        let e = parse("P^-1 + b", Prime::THREE).unwrap();
        assert_eq!(e.terms, vec![vec![Factor::Beta]]);
        assert_eq!(e.warnings.len(), 1);
    }

    #[test]
    fn other_grammars() {
        let e = parse(
            "Q{0, 2} Pm(1,0,3) + q_2 + xi_1^2 tau_0 + u_1 v_2^3 t^2 r",
            Prime::TWO,
        )
        .unwrap();
        assert_eq!(
            e.terms,
            vec![
                vec![Factor::QSet(vec![0, 2]), Factor::Pm(vec![1, 0, 3])],
                vec![Factor::QLower(2)],
                vec![Factor::Xi(1, 2), Factor::Tau(0)],
                vec![Factor::U(1, 1), Factor::V(2, 3), Factor::T(2), Factor::R(1)],
            ]
        );
    }
}
