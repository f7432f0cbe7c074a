//! Ordinals below ε₀ in hereditary Cantor normal form.
//!
//! An [`Ordinal`] is a strictly decreasing list of `(exponent, coefficient)` pairs,
//! each exponent again an ordinal. Besides the classical (non-commutative)
//! operations this module provides the Hessenberg natural sum and product, their
//! transfinite iterations, and the order-type bound functions used for fragments
//! of the Skolem functions.

use rug::ops::Pow;
use rug::Integer;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ordinal(Arc<Vec<(Ordinal, Integer)>>);

impl Ordinal {
    /// Builds an ordinal from CNF terms, checking the invariants.
    pub fn from_terms(terms: Vec<(Ordinal, Integer)>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[0].0 <= w[1].0 {
                return Err(Error::Precondition("CNF exponents must strictly decrease".into()));
            }
        }
        if terms.iter().any(|(_, c)| *c <= 0) {
            return Err(Error::Precondition("CNF coefficients must be positive".into()));
        }
        Ok(Ordinal(Arc::new(terms)))
    }

    fn raw(terms: Vec<(Ordinal, Integer)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        Ordinal(Arc::new(terms))
    }

    pub fn zero() -> Self {
        Ordinal::raw(Vec::new())
    }

    pub fn one() -> Self {
        Ordinal::nat(1u32)
    }

    pub fn nat(n: impl Into<Integer>) -> Self {
        let n = n.into();
        assert!(n >= 0, "ordinals are non-negative");
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal::raw(vec![(Ordinal::zero(), n)])
        }
    }

    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::one())
    }

    /// ω^e.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal::raw(vec![(e, Integer::from(1))])
    }

    /// ω^e · c.
    pub fn monomial(e: Ordinal, c: impl Into<Integer>) -> Self {
        let c = c.into();
        assert!(c >= 0);
        if c == 0 {
            Ordinal::zero()
        } else {
            Ordinal::raw(vec![(e, c)])
        }
    }

    pub fn terms(&self) -> &[(Ordinal, Integer)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|(e, _)| e.is_zero())
    }

    pub fn as_nat(&self) -> Option<Integer> {
        match self.0.as_slice() {
            [] => Some(Integer::new()),
            [(e, c)] if e.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    /// Exponent of the leading term; `None` for zero.
    pub fn leading_exponent(&self) -> Option<&Ordinal> {
        self.0.first().map(|(e, _)| e)
    }

    pub fn is_limit(&self) -> bool {
        !self.is_zero() && self.finite_part() == 0
    }

    pub fn finite_part(&self) -> Integer {
        match self.0.last() {
            Some((e, c)) if e.is_zero() => c.clone(),
            _ => Integer::new(),
        }
    }

    /// Splits `b` as `λ + k` with `λ` zero or a limit and `k` finite.
    pub fn split_limit(&self) -> (Ordinal, Integer) {
        match self.0.last() {
            Some((e, c)) if e.is_zero() => {
                (Ordinal::raw(self.0[..self.0.len() - 1].to_vec()), c.clone())
            }
            _ => (self.clone(), Integer::new()),
        }
    }

    /// Nesting depth of the hereditary CNF; 0 for finite ordinals.
    pub fn height(&self) -> usize {
        self.0
            .iter()
            .filter(|(e, _)| !e.is_zero())
            .map(|(e, _)| 1 + e.height())
            .max()
            .unwrap_or(0)
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn cmp_ordinal(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

pub fn add(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let Some(b0) = b.leading_exponent() else {
        return a.clone();
    };
    let mut out: Vec<(Ordinal, Integer)> = Vec::new();
    let mut b_terms = b.terms().iter();
    for (e, c) in a.terms() {
        match e.cmp(b0) {
            Ordering::Greater => out.push((e.clone(), c.clone())),
            Ordering::Equal => {
                let (_, d) = b_terms.next().expect("b is nonzero");
                out.push((e.clone(), Integer::from(c + d)));
                break;
            }
            Ordering::Less => break,
        }
    }
    out.extend(b_terms.cloned());
    Ordinal::raw(out)
}

pub fn mul(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let Some((a0, c0)) = a.terms().first() else {
        return Ordinal::zero();
    };
    let mut out = Vec::new();
    for (e, d) in b.terms() {
        if e.is_zero() {
            out.push((a0.clone(), Integer::from(c0 * d)));
            out.extend(a.terms()[1..].iter().cloned());
        } else {
            out.push((add(a0, e), d.clone()));
        }
    }
    Ordinal::raw(out)
}

/// `e'` with `1 + e' = e`, i.e. the exponent of `ω^e` seen as `ω · ω^{e'}`.
fn exponent_div_omega(e: &Ordinal) -> Ordinal {
    match e.as_nat() {
        Some(n) => Ordinal::nat(n - 1u32),
        None => e.clone(),
    }
}

fn pow_nat(a: &Ordinal, mut k: Integer) -> Ordinal {
    let mut acc = Ordinal::one();
    let mut base = a.clone();
    let mut bits = Vec::new();
    while k > 0 {
        bits.push(k.is_odd());
        k >>= 1;
    }
    for (i, bit) in bits.iter().enumerate() {
        if *bit {
            acc = mul(&acc, &base);
        }
        if i + 1 < bits.len() {
            base = mul(&base, &base);
        }
    }
    acc
}

pub fn pow(a: &Ordinal, b: &Ordinal) -> Ordinal {
    if b.is_zero() {
        return Ordinal::one();
    }
    if a.is_zero() {
        return Ordinal::zero();
    }
    if *a == Ordinal::one() {
        return Ordinal::one();
    }
    let (lambda, k) = b.split_limit();
    let limit_part = if lambda.is_zero() {
        Ordinal::one()
    } else if let Some(n) = a.as_nat() {
        // n^(ω·β) = ω^β
        let beta: Vec<(Ordinal, Integer)> = lambda
            .terms()
            .iter()
            .map(|(e, c)| (exponent_div_omega(e), c.clone()))
            .collect();
        debug_assert!(n >= 2);
        Ordinal::omega_pow(Ordinal::raw(beta))
    } else {
        let a0 = a.leading_exponent().expect("nonzero");
        Ordinal::omega_pow(mul(a0, &lambda))
    };
    let finite_part = match a.as_nat() {
        Some(n) => Ordinal::nat(Integer::from(n.pow(k.to_u32().expect("finite exponent fits in u32")))),
        None => pow_nat(a, k),
    };
    mul(&limit_part, &finite_part)
}

fn merge_into(acc: &mut BTreeMap<Ordinal, Integer>, e: Ordinal, c: Integer) {
    *acc.entry(e).or_default() += c;
}

fn from_map(acc: BTreeMap<Ordinal, Integer>) -> Ordinal {
    Ordinal::raw(acc.into_iter().rev().filter(|(_, c)| *c != 0).collect())
}

/// Hessenberg natural sum α ⊕ β.
pub fn hsum(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let mut acc = BTreeMap::new();
    for (e, c) in a.terms().iter().chain(b.terms()) {
        merge_into(&mut acc, e.clone(), c.clone());
    }
    from_map(acc)
}

/// Hessenberg natural product α ⊙ β.
pub fn hprod(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let mut acc = BTreeMap::new();
    for (e, c) in a.terms() {
        for (f, d) in b.terms() {
            merge_into(&mut acc, hsum(e, f), Integer::from(c * d));
        }
    }
    from_map(acc)
}

fn scale(a: &Ordinal, k: &Integer) -> Ordinal {
    if *k == 0 {
        return Ordinal::zero();
    }
    Ordinal::raw(a.terms().iter().map(|(e, c)| (e.clone(), Integer::from(c * k))).collect())
}

fn hprod_power(a: &Ordinal, k: &Integer) -> Ordinal {
    let mut acc = Ordinal::one();
    let mut base = a.clone();
    let mut k = k.clone();
    while k > 0 {
        if k.is_odd() {
            acc = hprod(&acc, &base);
        }
        k >>= 1;
        if k > 0 {
            base = hprod(&base, &base);
        }
    }
    acc
}

/// `⊕_{i<b} a`, via `a·λ ⊕ (k-fold ⊕ of a)` for `b = λ + k`.
pub fn hsum_iter(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let (lambda, k) = b.split_limit();
    hsum(&mul(a, &lambda), &scale(a, &k))
}

/// `a^⊗b = ⊙_{i<b} a`, via `a^λ ⊙ (k-fold ⊙ of a)` for `b = λ + k`.
pub fn cexp(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let (lambda, k) = b.split_limit();
    hprod(&pow(a, &lambda), &hprod_power(a, &k))
}

/// ω_0 = 1, ω_{n+1} = ω^{ω_n}.
pub fn omega_tower(n: usize) -> Result<Ordinal> {
    if n > MAX_TOWER {
        return Err(Error::Resource(format!("omega tower height {n} exceeds {MAX_TOWER}")));
    }
    let mut o = Ordinal::one();
    for _ in 0..n {
        o = Ordinal::omega_pow(o);
    }
    Ok(o)
}

pub const MAX_TOWER: usize = 256;

/// The bound `(α^ω)^⊗β` on the order type of finite sums.
pub fn finite_sums_bound(alpha: &Ordinal, beta: &Ordinal) -> Result<Ordinal> {
    if *alpha < Ordinal::nat(2u32) {
        return Err(Error::Precondition("finite_sums_bound needs alpha >= 2".into()));
    }
    if beta.is_zero() {
        return Err(Error::Precondition("finite_sums_bound needs beta >= 1".into()));
    }
    Ok(cexp(&pow(alpha, &Ordinal::omega()), beta))
}

/// ω^{ω·α}.
pub fn dries_bound(alpha: &Ordinal) -> Ordinal {
    pow(&Ordinal::omega(), &mul(&Ordinal::omega(), alpha))
}

pub fn is_additively_closed(a: &Ordinal) -> bool {
    matches!(a.terms(), [(_, c)] if *c == 1)
}

/// True for 1, 2 and the ordinals ω^{ω^δ}.
pub fn is_multiplicatively_closed(a: &Ordinal) -> bool {
    if *a == Ordinal::one() || *a == Ordinal::nat(2u32) {
        return true;
    }
    match a.terms() {
        [(e, c)] if *c == 1 => !e.is_zero() && is_additively_closed(e),
        _ => false,
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms().iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if e.is_zero() {
                write!(f, "{c}")?;
                continue;
            }
            write!(f, "w")?;
            if *e != Ordinal::one() {
                let bare = e.is_finite() || (*e == Ordinal::omega() && *c == 1);
                if bare {
                    write!(f, "^{e}")?;
                } else {
                    write!(f, "^({e})")?;
                }
            }
            if *c != 1 {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Caps applied while evaluating textual ordinal expressions.
const MAX_FINITE_EXPONENT: u32 = 4096;
const MAX_COEFF_BITS: u32 = 1 << 16;

fn check_finite_exponent(b: &Ordinal) -> Result<()> {
    let (_, k) = b.split_limit();
    if k > MAX_FINITE_EXPONENT {
        return Err(Error::Resource(format!("finite exponent {k} exceeds {MAX_FINITE_EXPONENT}")));
    }
    Ok(())
}

fn check_size(o: Ordinal) -> Result<Ordinal> {
    fn big(o: &Ordinal) -> bool {
        o.terms().iter().any(|(e, c)| c.significant_bits() > MAX_COEFF_BITS || big(e))
    }
    if big(&o) {
        return Err(Error::Resource("ordinal coefficient too large".into()));
    }
    Ok(o)
}

/// Parses and evaluates an ordinal expression such as `hsum(w+1, w*2)` or `w^(w)*2 + 3`.
pub fn parse_ordinal(src: &str) -> Result<Ordinal> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let o = p.expr()?;
    p.ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(o)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Ordinal> {
        let mut acc = self.prod()?;
        while self.eat(b'+') {
            let rhs = self.prod()?;
            acc = add(&acc, &rhs);
        }
        Ok(acc)
    }

    fn prod(&mut self) -> Result<Ordinal> {
        let mut acc = self.atom()?;
        while self.eat(b'*') {
            let rhs = self.atom()?;
            acc = check_size(mul(&acc, &rhs))?;
        }
        Ok(acc)
    }

    fn nat(&mut self) -> Option<Integer> {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Some(s.parse().expect("digits parse"))
    }

    fn ident(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        (self.pos > start)
            .then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<Ordinal> {
        self.ws();
        if let Some(n) = self.nat() {
            return Ok(Ordinal::nat(n));
        }
        if self.eat(b'(') {
            let o = self.expr()?;
            self.expect(b')')?;
            return Ok(o);
        }
        if self.src[self.pos..].starts_with("ω".as_bytes()) {
            self.pos += "ω".len();
            return self.omega_tail();
        }
        let start = self.pos;
        let Some(name) = self.ident() else {
            return Err(self.err("expected an ordinal"));
        };
        match name.as_str() {
            "w" => self.omega_tail(),
            "omega" => {
                self.expect(b'(')?;
                let n = self.nat().ok_or_else(|| self.err("expected a natural number"))?;
                self.expect(b')')?;
                let n = n.to_usize().filter(|n| *n <= MAX_TOWER);
                omega_tower(n.ok_or_else(|| Error::Resource("omega tower too tall".into()))?)
            }
            "hsum" | "hprod" | "cexp" | "pow" | "sumbound" | "driesbound" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b')')?;
                match name.as_str() {
                    "hsum" => Ok(hsum(&a, &b)),
                    "hprod" => check_size(hprod(&a, &b)),
                    "cexp" => {
                        check_finite_exponent(&b)?;
                        check_size(cexp(&a, &b))
                    }
                    "pow" => {
                        check_finite_exponent(&b)?;
                        check_size(pow(&a, &b))
                    }
                    "sumbound" => {
                        check_finite_exponent(&b)?;
                        finite_sums_bound(&a, &b).and_then(check_size)
                    }
                    _ => Ok(dries_bound(&a)),
                }
            }
            _ => {
                self.pos = start;
                Err(self.err(&format!("unknown function '{name}'")))
            }
        }
    }

    fn omega_tail(&mut self) -> Result<Ordinal> {
        if self.eat(b'^') {
            let e = self.atom()?;
            Ok(Ordinal::omega_pow(e))
        } else {
            Ok(Ordinal::omega())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        parse_ordinal(s).unwrap()
    }

    #[test]
    fn display_matches_grammar_examples() {
        assert_eq!(o("w^w*2 + w*3 + 5").to_string(), "w^(w)*2 + w*3 + 5");
        assert_eq!(omega_tower(4).unwrap().to_string(), "w^(w^(w^w))");
        assert_eq!(o("w^2*3 + 1").to_string(), "w^2*3 + 1");
        assert_eq!(Ordinal::zero().to_string(), "0");
    }

    #[test]
    fn basic_arithmetic() {
        assert_eq!(add(&Ordinal::one(), &Ordinal::omega()), Ordinal::omega());
        assert_eq!(add(&o("w+1"), &o("w+1")), o("w*2+1"));
        assert_eq!(mul(&o("w+1"), &Ordinal::nat(2u32)), o("w*2+1"));
        assert_eq!(pow(&Ordinal::nat(2u32), &Ordinal::omega()), Ordinal::omega());
        assert_eq!(pow(&o("w+1"), &Ordinal::nat(2u32)), o("w^2 + w + 1"));
        assert_eq!(pow(&Ordinal::omega(), &o("w+1")), o("w^(w+1)"));
    }

    #[test]
    fn natural_operations() {
        assert_eq!(hsum(&o("w+1"), &o("w*2")), o("w*3+1"));
        assert_eq!(hsum(&Ordinal::one(), &Ordinal::omega()), o("w+1"));
        assert_eq!(hprod(&o("w+1"), &o("w+1")), o("w^2 + w*2 + 1"));
        assert_eq!(hsum_iter(&o("w+1"), &Ordinal::omega()), o("w^2"));
        assert_eq!(hsum_iter(&o("w+1"), &Ordinal::nat(3u32)), o("w*3+3"));
        assert_eq!(cexp(&Ordinal::nat(2u32), &Ordinal::omega()), Ordinal::omega());
        assert_eq!(cexp(&o("w+1"), &Ordinal::nat(2u32)), o("w^2 + w*2 + 1"));
        assert_eq!(cexp(&o("w+5"), &Ordinal::zero()), Ordinal::one());
    }

    #[test]
    fn bounds() {
        assert_eq!(finite_sums_bound(&Ordinal::nat(2u32), &Ordinal::one()).unwrap(), Ordinal::omega());
        assert_eq!(
            finite_sums_bound(&Ordinal::omega(), &Ordinal::nat(2u32)).unwrap(),
            o("w^(w*2)")
        );
        assert!(finite_sums_bound(&Ordinal::one(), &Ordinal::one()).is_err());
        assert_eq!(dries_bound(&Ordinal::one()), o("w^w"));
        assert_eq!(dries_bound(&Ordinal::omega()), o("w^(w^2)"));
        assert_eq!(dries_bound(&o("w^w")), o("w^(w^w)"));
    }

    #[test]
    fn closure_predicates() {
        assert!(is_additively_closed(&o("w^w")));
        assert!(!is_multiplicatively_closed(&o("w^2")));
        for n in 0..=4 {
            assert!(is_multiplicatively_closed(&omega_tower(n).unwrap()));
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_ordinal("w +"), Err(Error::Parse { .. })));
        assert!(matches!(parse_ordinal("foo(1,2)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_ordinal("sumbound(1, 1)"), Err(Error::Precondition(_))));
        assert!(matches!(parse_ordinal("pow(w, 100000)"), Err(Error::Resource(_))));
    }
}
