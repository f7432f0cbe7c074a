//! Skolem term syntax trees, parsing and printing.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest natural literal accepted by the parser.
pub const MAX_LITERAL: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    One,
    X,
    Add(Term, Term),
    Mul(Term, Term),
    Pow(Term, Term),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    size: usize,
    hash: u64,
    /// Value of an `x`-free subtree, when it fits.
    nat: Option<u64>,
    pure: bool,
}

/// An immutable Skolem term; cheap to clone.
#[derive(Clone)]
pub struct Term(Arc<Node>);

impl Term {
    fn build(kind: Kind) -> Term {
        let (size, nat, pure) = match &kind {
            Kind::One => (1, Some(1), true),
            Kind::X => (1, None, false),
            Kind::Add(a, b) | Kind::Mul(a, b) | Kind::Pow(a, b) => {
                let pure = a.0.pure && b.0.pure;
                let nat = match (&kind, a.0.nat, b.0.nat) {
                    (Kind::Add(..), Some(p), Some(q)) => p.checked_add(q),
                    (Kind::Mul(..), Some(p), Some(q)) => p.checked_mul(q),
                    (Kind::Pow(..), Some(p), Some(q)) => {
                        u32::try_from(q).ok().and_then(|q| p.checked_pow(q))
                    }
                    _ => None,
                };
                (1 + a.0.size + b.0.size, nat.filter(|_| pure), pure)
            }
        };
        let mut h = DefaultHasher::new();
        match &kind {
            Kind::One => 0u8.hash(&mut h),
            Kind::X => 1u8.hash(&mut h),
            Kind::Add(a, b) => (2u8, a.0.hash, b.0.hash).hash(&mut h),
            Kind::Mul(a, b) => (3u8, a.0.hash, b.0.hash).hash(&mut h),
            Kind::Pow(a, b) => (4u8, a.0.hash, b.0.hash).hash(&mut h),
        }
        Term(Arc::new(Node { kind, size, hash: h.finish(), nat, pure }))
    }

    pub fn one() -> Term {
        Term::build(Kind::One)
    }

    pub fn x() -> Term {
        Term::build(Kind::X)
    }

    pub fn add(a: &Term, b: &Term) -> Term {
        Term::build(Kind::Add(a.clone(), b.clone()))
    }

    pub fn mul(a: &Term, b: &Term) -> Term {
        Term::build(Kind::Mul(a.clone(), b.clone()))
    }

    pub fn pow(a: &Term, b: &Term) -> Term {
        Term::build(Kind::Pow(a.clone(), b.clone()))
    }

    /// The literal `n` as the left-nested sum `1 + 1 + … + 1`.
    pub fn lit(n: u64) -> Result<Term> {
        if n == 0 {
            return Err(Error::Precondition("natural literals start at 1".into()));
        }
        if n > MAX_LITERAL {
            return Err(Error::Resource(format!("literal {n} exceeds {MAX_LITERAL}")));
        }
        let one = Term::one();
        let mut t = one.clone();
        for _ in 1..n {
            t = Term::add(&t, &one);
        }
        Ok(t)
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Node count, with literals counted as their `1 + … + 1` expansion.
    pub fn size(&self) -> usize {
        self.0.size
    }

    /// The value of an `x`-free term, if it fits in a `u64`.
    pub fn nat_value(&self) -> Option<u64> {
        self.0.nat
    }

    /// True when the term does not mention `x`.
    pub fn is_constant(&self) -> bool {
        self.0.pure
    }

    pub fn is_one(&self) -> bool {
        self.0.nat == Some(1)
    }

    pub fn is_x(&self) -> bool {
        matches!(self.0.kind, Kind::X)
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub fn ptr_eq(&self, o: &Term) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }

    fn rank(&self) -> u8 {
        match self.0.kind {
            Kind::One => 0,
            Kind::X => 1,
            Kind::Add(..) => 2,
            Kind::Mul(..) => 3,
            Kind::Pow(..) => 4,
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, o: &Term) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || (self.0.hash == o.0.hash && self.0.size == o.0.size && self.0.kind == o.0.kind)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.0.hash.hash(h)
    }
}

/// Structural order: size, then node kind, then children.
impl Ord for Term {
    fn cmp(&self, o: &Term) -> Ordering {
        if self == o {
            return Ordering::Equal;
        }
        self.size().cmp(&o.size()).then_with(|| self.rank().cmp(&o.rank())).then_with(|| {
            match (&self.0.kind, &o.0.kind) {
                (Kind::Add(a, b), Kind::Add(c, d))
                | (Kind::Mul(a, b), Kind::Mul(c, d))
                | (Kind::Pow(a, b), Kind::Pow(c, d)) => a.cmp(c).then_with(|| b.cmp(d)),
                _ => Ordering::Equal,
            }
        })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, o: &Term) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Top,
    SumLeft,
    SumRight,
    ProdLeft,
    ProdRight,
    Base,
    Exponent,
}

fn needs_parens(t: &Term, slot: Slot) -> bool {
    if t.0.pure && t.0.nat.is_some() {
        return false;
    }
    match (&t.0.kind, slot) {
        (Kind::One | Kind::X, _) => false,
        (_, Slot::Top | Slot::SumLeft) => false,
        (Kind::Add(..), _) => true,
        (Kind::Mul(..), Slot::SumRight | Slot::ProdLeft) => false,
        (Kind::Mul(..), _) => true,
        (Kind::Pow(..), Slot::Base) => true,
        (Kind::Pow(..), _) => false,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, slot: Slot) -> fmt::Result {
    if needs_parens(t, slot) {
        write!(f, "(")?;
        write_term(f, t, Slot::Top)?;
        return write!(f, ")");
    }
    if let Some(n) = t.0.nat {
        return write!(f, "{n}");
    }
    match &t.0.kind {
        Kind::One => write!(f, "1"),
        Kind::X => write!(f, "x"),
        Kind::Add(a, b) => {
            write_term(f, a, Slot::SumLeft)?;
            write!(f, " + ")?;
            write_term(f, b, Slot::SumRight)
        }
        Kind::Mul(a, b) => {
            write_term(f, a, Slot::ProdLeft)?;
            write!(f, "*")?;
            write_term(f, b, Slot::ProdRight)
        }
        Kind::Pow(a, b) => {
            write_term(f, a, Slot::Base)?;
            write!(f, "^")?;
            write_term(f, b, Slot::Exponent)
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, Slot::Top)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn sum(&mut self) -> Result<Term> {
        let mut t = self.prod()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            let r = self.prod()?;
            t = Term::add(&t, &r);
        }
        Ok(t)
    }

    fn prod(&mut self) -> Result<Term> {
        let mut t = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let r = self.power()?;
            t = Term::mul(&t, &r);
        }
        Ok(t)
    }

    fn power(&mut self) -> Result<Term> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.power()?;
            return Ok(Term::pow(&base, &e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Term> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(Term::x())
            }
            Some(b'(') => {
                self.pos += 1;
                let t = self.sum()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
                let n: u64 = match digits.parse() {
                    Ok(n) => n,
                    Err(_) => {
                        self.pos = start;
                        return Err(Error::Resource(format!("literal {digits} exceeds {MAX_LITERAL}")));
                    }
                };
                if n == 0 {
                    self.pos = start;
                    return self.err("literals must be at least 1");
                }
                Term::lit(n)
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses the grammar `sum := prod ('+' prod)*`, `prod := pow ('*' pow)*`,
/// `pow := atom ['^' pow]`, `atom := 'x' | nat | '(' sum ')'`.
pub fn parse(src: &str) -> Result<Term> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let t = p.sum()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(t)
}

/// Every syntax tree with exactly `n` nodes, in a fixed order.
pub fn shapes_of_size(n: usize) -> Vec<Term> {
    let mut table: Vec<Vec<Term>> = vec![Vec::new(); n + 1];
    for s in 1..=n {
        if s == 1 {
            table[1] = vec![Term::one(), Term::x()];
            continue;
        }
        let mut out = Vec::new();
        for l in 1..s - 1 {
            let r = s - 1 - l;
            for a in &table[l] {
                for b in &table[r] {
                    out.push(Term::add(a, b));
                    out.push(Term::mul(a, b));
                    out.push(Term::pow(a, b));
                }
            }
        }
        table[s] = out;
    }
    table.swap_remove(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let t = parse("(x+1)^x").unwrap();
        assert_eq!(t, Term::pow(&Term::add(&Term::x(), &Term::one()), &Term::x()));
        assert_eq!(t.to_string(), "(x + 1)^x");
        assert_eq!(parse("x*x + x").unwrap().to_string(), "x*x + x");
        let two = Term::add(&Term::one(), &Term::one());
        assert_eq!(parse("2^(2^x)").unwrap(), Term::pow(&two, &Term::pow(&two, &Term::x())));
        assert_eq!(parse("2^2^x").unwrap().to_string(), "2^2^x");
        assert_eq!(parse("(2^x)^x").unwrap().to_string(), "(2^x)^x");
        assert_eq!(parse("x + (x + x)").unwrap().to_string(), "x + (x + x)");
        assert_eq!(parse("2^x").unwrap().size(), 5);
    }

    #[test]
    fn reports_positions() {
        match parse("x + * 1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("(x"), Err(Error::Parse { .. })));
        assert!(matches!(parse("x - 1"), Err(Error::Parse { .. })));
        assert!(matches!(parse("0"), Err(Error::Parse { .. })));
    }

    #[test]
    fn shape_counts() {
        assert_eq!(shapes_of_size(1).len(), 2);
        assert_eq!(shapes_of_size(3).len(), 12);
        assert_eq!(shapes_of_size(5).len(), 144);
        assert!(shapes_of_size(4).is_empty());
    }
}
