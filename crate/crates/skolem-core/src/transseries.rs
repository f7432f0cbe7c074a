//! Truncated exp-log series over recursively defined monomials.
//!
//! A [`Monomial`] is `exp(E)` for a purely infinite exponent series `E` whose terms
//! are `c·b` or `c·b·log x` with `b` a monomial; `x` itself is `exp(1·log x)`. A
//! [`Series`] is a finite descending sum of terms `c·m·(log x)^k` plus an optional
//! error marker `O(e)`. Powers of `log x` only appear in intermediate results.
//!
//! When the exponent of a monomial is only known up to an infinite error, the
//! monomial is *inexact*: its real coefficient is unknowable, the series is cut
//! right after it, and any comparison that reaches it reports [`Error::Depth`].

use rug::{Integer, Rational};
use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use crate::constants::{cmp_const, precision_cap, ConstOrdering, Constant, EMembership};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::skolem::{Kind, Term as SkolemTerm};

pub const DEFAULT_DEPTH: usize = 8;
const UNBOUNDED: usize = usize::MAX;
const MAX_NATURAL_POWER: u64 = 64;

#[derive(Clone)]
pub struct Monomial(Arc<MonoInner>);

struct MonoInner {
    exponent: Series,
    exact: bool,
    hash: u64,
}

impl Monomial {
    fn from_series(exponent: Series) -> Monomial {
        let exact = exponent.is_exact();
        let mut h = DefaultHasher::new();
        exponent.hash(&mut h);
        Monomial(Arc::new(MonoInner { exponent, exact, hash: h.finish() }))
    }

    pub fn one() -> Monomial {
        static ONE: OnceLock<Monomial> = OnceLock::new();
        ONE.get_or_init(|| Monomial::from_series(Series::zero())).clone()
    }

    pub fn x() -> Monomial {
        static X: OnceLock<Monomial> = OnceLock::new();
        X.get_or_init(|| {
            Monomial::from_series(Series {
                terms: vec![Term { mono: Monomial::one(), log: 1, coeff: Constant::one() }],
                error: None,
            })
        })
        .clone()
    }

    /// `exp(e)` for a purely infinite exponent series.
    pub fn from_exponent(e: Series) -> Result<Monomial> {
        for t in &e.terms {
            if t.log != 0 && t.log != 1 {
                return Err(Error::Range(format!("exponent term with log power {}", t.log)));
            }
            if cmp_key(&t.key(), &Key::one())? != Ordering::Greater {
                return Err(Error::Fault("exponent term is not infinite".into()));
            }
        }
        Ok(Monomial::from_series(e))
    }

    pub fn exponent(&self) -> &Series {
        &self.0.exponent
    }

    pub fn is_one(&self) -> bool {
        self.0.exponent.terms.is_empty() && self.0.exponent.error.is_none()
    }

    /// False when the exponent was truncated above its real part.
    pub fn is_exact(&self) -> bool {
        self.0.exact
    }

    pub fn mul(&self, o: &Monomial) -> Result<Monomial> {
        if self.is_one() {
            return Ok(o.clone());
        }
        if o.is_one() {
            return Ok(self.clone());
        }
        Ok(Monomial::from_series(self.exponent().add(o.exponent(), UNBOUNDED)?))
    }

    pub fn inv(&self) -> Monomial {
        if self.is_one() {
            return self.clone();
        }
        Monomial::from_series(self.exponent().neg())
    }
}

impl PartialEq for Monomial {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || (self.0.hash == o.0.hash && self.0.exponent == o.0.exponent)
    }
}

impl Eq for Monomial {}

impl Hash for Monomial {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.0.hash.hash(h)
    }
}

fn sign_of(c: &Constant) -> Result<Ordering> {
    match c.sign(precision_cap()) {
        ConstOrdering::Less => Ok(Ordering::Less),
        ConstOrdering::Greater => Ok(Ordering::Greater),
        ConstOrdering::EqualExact => Ok(Ordering::Equal),
        ConstOrdering::Unknown => Err(Error::Undetermined(format!(
            "sign of coefficient {c} unresolved at {} bits",
            precision_cap()
        ))),
    }
}

fn depth_error() -> Error {
    Error::Depth("monomials agree up to their truncation error".into())
}

/// Order of monomials as germs at infinity.
pub fn cmp_monomial(a: &Monomial, b: &Monomial) -> Result<Ordering> {
    if a == b {
        return if a.is_exact() { Ok(Ordering::Equal) } else { Err(depth_error()) };
    }
    cmp_exponents(a.exponent(), b.exponent())
}

/// Sign of the leading term of `a − b`.
pub fn cmp_series(a: &Series, b: &Series) -> Result<Ordering> {
    cmp_exponents(a, b)
}

fn cmp_exponents(a: &Series, b: &Series) -> Result<Ordering> {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.terms.get(i), b.terms.get(j)) {
            (None, None) => {
                return if a.error.is_some() || b.error.is_some() { Err(depth_error()) } else { Ok(Ordering::Equal) }
            }
            (Some(s), None) => {
                if let Some(e) = &b.error {
                    if cmp_key(&s.key(), e)? != Ordering::Greater {
                        return Err(depth_error());
                    }
                }
                return sign_of(&s.coeff);
            }
            (None, Some(t)) => {
                if let Some(e) = &a.error {
                    if cmp_key(&t.key(), e)? != Ordering::Greater {
                        return Err(depth_error());
                    }
                }
                return Ok(sign_of(&t.coeff)?.reverse());
            }
            (Some(s), Some(t)) => match cmp_key(&s.key(), &t.key())? {
                Ordering::Greater => return sign_of(&s.coeff),
                Ordering::Less => return Ok(sign_of(&t.coeff)?.reverse()),
                Ordering::Equal => match cmp_const(&s.coeff, &t.coeff, precision_cap()) {
                    ConstOrdering::Less => return Ok(Ordering::Less),
                    ConstOrdering::Greater => return Ok(Ordering::Greater),
                    ConstOrdering::EqualExact => {
                        i += 1;
                        j += 1;
                    }
                    ConstOrdering::Unknown => {
                        return Err(Error::Undetermined(format!(
                            "cannot separate exponent coefficients {} and {}",
                            s.coeff, t.coeff
                        )))
                    }
                },
            },
        }
    }
}

/// A monomial times a power of `log x`; the sort key of series terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Key {
    pub mono: Monomial,
    pub log: i32,
}

impl Key {
    pub fn one() -> Key {
        Key { mono: Monomial::one(), log: 0 }
    }

    pub fn mul(&self, o: &Key) -> Result<Key> {
        Ok(Key { mono: self.mono.mul(&o.mono)?, log: self.log + o.log })
    }

    pub fn inv(&self) -> Key {
        Key { mono: self.mono.inv(), log: -self.log }
    }
}

pub fn cmp_key(a: &Key, b: &Key) -> Result<Ordering> {
    Ok(cmp_monomial(&a.mono, &b.mono)?.then(a.log.cmp(&b.log)))
}

fn max_key(a: Option<Key>, b: Option<Key>) -> Result<Option<Key>> {
    Ok(match (a, b) {
        (Some(a), Some(b)) => Some(if cmp_key(&a, &b)? == Ordering::Less { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    })
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub mono: Monomial,
    pub log: i32,
    pub coeff: Constant,
}

impl Term {
    pub fn key(&self) -> Key {
        Key { mono: self.mono.clone(), log: self.log }
    }

    fn mul(&self, o: &Term) -> Result<Term> {
        Ok(Term { mono: self.mono.mul(&o.mono)?, log: self.log + o.log, coeff: self.coeff.mul(&o.coeff) })
    }
}

/// A truncated series `Σ cᵢ·mᵢ·(log x)^kᵢ + O(e)` with strictly descending keys.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    terms: Vec<Term>,
    error: Option<Key>,
}

#[derive(Clone, Copy)]
enum Coeffs {
    Geometric,
    Exp,
    Log,
}

impl Coeffs {
    fn nth(self, n: u64) -> Rational {
        match self {
            Coeffs::Geometric => Rational::from(if n % 2 == 0 { 1 } else { -1 }),
            Coeffs::Exp => Rational::from((Integer::from(1), Integer::from(Integer::factorial(n as u32)))),
            Coeffs::Log if n == 0 => Rational::new(),
            Coeffs::Log => Rational::from((if n % 2 == 1 { 1 } else { -1 }, n)),
        }
    }
}

fn merge(a: &[Term], b: &[Term]) -> Result<Vec<Term>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(s), Some(t)) => {
                if s.mono == t.mono && !s.mono.is_exact() && s.log == t.log {
                    return Err(Error::Depth("coefficients of an inexact monomial cannot be added".into()));
                }
                cmp_key(&s.key(), &t.key())?
            }
            (Some(_), None) => Ordering::Greater,
            _ => Ordering::Less,
        };
        match ord {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                let c = a[i].coeff.add(&b[j].coeff);
                if !c.is_zero() {
                    out.push(Term { coeff: c, ..a[i].clone() });
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(out)
}

impl Series {
    pub fn zero() -> Series {
        Series { terms: Vec::new(), error: None }
    }

    pub fn one() -> Series {
        Series::constant(Constant::one())
    }

    pub fn constant(c: Constant) -> Series {
        Series::monomial(Monomial::one(), c)
    }

    pub fn x() -> Series {
        Series::monomial(Monomial::x(), Constant::one())
    }

    pub fn monomial(m: Monomial, c: Constant) -> Series {
        Series::from_term(Term { mono: m, log: 0, coeff: c })
    }

    pub fn from_term(t: Term) -> Series {
        if t.coeff.is_zero() {
            return Series::zero();
        }
        Series { terms: vec![t], error: None }
    }

    /// `O(e)` with no known terms.
    pub fn big_o(e: Key) -> Series {
        Series { terms: Vec::new(), error: Some(e) }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn error(&self) -> Option<&Key> {
        self.error.as_ref()
    }

    pub fn lead(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.error.is_none()
    }

    /// No error marker and no inexact monomial anywhere.
    pub fn is_exact(&self) -> bool {
        self.error.is_none() && self.terms.iter().all(|t| t.mono.is_exact())
    }

    /// The exact natural number this series denotes, if any.
    pub fn as_natural(&self) -> Option<Integer> {
        if self.error.is_some() {
            return None;
        }
        match self.terms.as_slice() {
            [] => Some(Integer::new()),
            [t] if t.mono.is_one() && t.log == 0 => t.coeff.as_integer().filter(|n| *n >= 0),
            _ => None,
        }
    }

    /// Canonical clean-up: drop content at or below the error, cut after the first
    /// inexact monomial, keep at most `depth` terms.
    fn finish(mut terms: Vec<Term>, error: Option<Key>, depth: usize) -> Result<Series> {
        let mut error = error;
        if let Some(e) = &error {
            let mut keep = terms.len();
            for (idx, t) in terms.iter().enumerate() {
                if cmp_key(&t.key(), e)? != Ordering::Greater {
                    keep = idx;
                    break;
                }
            }
            terms.truncate(keep);
        }
        if let Some(idx) = terms.iter().position(|t| !t.mono.is_exact()) {
            terms.truncate(idx + 1);
            error = None;
        }
        if terms.len() > depth {
            error = Some(terms[depth].key());
            terms.truncate(depth);
        }
        Ok(Series { terms, error })
    }

    pub fn truncate(&self, depth: usize) -> Result<Series> {
        Series::finish(self.terms.clone(), self.error.clone(), depth)
    }

    pub fn add(&self, o: &Series, depth: usize) -> Result<Series> {
        let terms = merge(&self.terms, &o.terms)?;
        let error = max_key(self.error.clone(), o.error.clone())?;
        Series::finish(terms, error, depth)
    }

    pub fn neg(&self) -> Series {
        Series {
            terms: self.terms.iter().map(|t| Term { coeff: t.coeff.neg(), ..t.clone() }).collect(),
            error: self.error.clone(),
        }
    }

    pub fn sub(&self, o: &Series, depth: usize) -> Result<Series> {
        self.add(&o.neg(), depth)
    }

    pub fn scale(&self, q: &Rational) -> Series {
        if *q == 0 {
            return Series::zero();
        }
        Series {
            terms: self.terms.iter().map(|t| Term { coeff: t.coeff.mul_rational(q), ..t.clone() }).collect(),
            error: self.error.clone(),
        }
    }

    /// Multiplication by a single term; order preserving.
    pub fn mul_term(&self, t: &Term) -> Result<Series> {
        if t.coeff.is_zero() {
            return Ok(Series::zero());
        }
        let terms = self.terms.iter().map(|s| s.mul(t)).collect::<Result<Vec<_>>>()?;
        let error = match &self.error {
            Some(e) => Some(e.mul(&t.key())?),
            None => None,
        };
        Series::finish(terms, error, UNBOUNDED)
    }

    pub fn mul(&self, o: &Series, depth: usize) -> Result<Series> {
        if self.is_zero() || o.is_zero() {
            return Ok(Series::zero());
        }
        let mut err: Option<Key> = None;
        if let Some(ea) = &self.error {
            if let Some(lb) = o.lead() {
                err = max_key(err, Some(ea.mul(&lb.key())?))?;
            }
            if let Some(eb) = &o.error {
                err = max_key(err, Some(ea.mul(eb)?))?;
            }
        }
        if let Some(eb) = &o.error {
            if let Some(la) = self.lead() {
                err = max_key(err, Some(la.key().mul(eb)?))?;
            }
        }
        let mut acc = Series { terms: Vec::new(), error: err };
        let lead_o = o.lead().map(|t| t.key());
        for ta in &self.terms {
            let Some(lb) = &lead_o else { break };
            if let Some(e) = &acc.error {
                if cmp_key(&ta.key().mul(lb)?, e)? != Ordering::Greater {
                    break;
                }
            }
            let row = o.mul_term(ta)?;
            acc = acc.add(&row, depth)?;
        }
        Series::finish(acc.terms, acc.error, depth)
    }

    /// `(u, r, d)` with `u` purely infinite, `r` real and `d` infinitesimal.
    pub fn split(&self) -> Result<(Series, Constant, Series)> {
        let one = Key::one();
        if let Some(e) = &self.error {
            if cmp_key(e, &one)? != Ordering::Less {
                return Ok((self.clone(), Constant::zero(), Series::zero()));
            }
        }
        let mut up = Vec::new();
        let mut real = Constant::zero();
        let mut down = Vec::new();
        for t in &self.terms {
            match cmp_key(&t.key(), &one)? {
                Ordering::Greater => up.push(t.clone()),
                Ordering::Equal => real = t.coeff.clone(),
                Ordering::Less => down.push(t.clone()),
            }
        }
        Ok((Series { terms: up, error: None }, real, Series { terms: down, error: self.error.clone() }))
    }

    /// `Σ aₙ·εⁿ` for infinitesimal `ε`, with the tail folded into the error.
    fn compose(eps: &Series, coeffs: Coeffs, depth: usize) -> Result<Series> {
        let mut sum = Series::constant(Constant::rational(coeffs.nth(0)));
        let Some(lead) = eps.lead().map(|t| t.key()) else {
            return match &eps.error {
                None => Ok(sum),
                Some(e) => sum.add(&Series::big_o(e.clone()), depth),
            };
        };
        if cmp_key(&lead, &Key::one())? != Ordering::Less {
            return Err(Error::Fault("composition argument is not infinitesimal".into()));
        }
        let cap = 2 * depth.min(64) as u64 + 8;
        let mut pow = Series::one();
        for n in 1..=cap {
            pow = pow.mul(eps, depth)?;
            let Some(pl) = pow.lead().map(|t| t.key()) else {
                sum = sum.add(&pow, depth)?;
                break;
            };
            if let Some(e) = &sum.error {
                if cmp_key(&pl, e)? != Ordering::Greater {
                    break;
                }
            }
            sum = sum.add(&pow.scale(&coeffs.nth(n)), depth)?;
            if n == cap {
                sum = sum.add(&Series::big_o(pl.mul(&lead)?), depth)?;
            }
        }
        Ok(sum)
    }

    /// `f/(c·m) − 1` for the leading term `c·m` of `f`.
    fn relative_tail(&self) -> Result<Series> {
        let lead = self.lead().expect("nonempty series");
        let inv = Term { mono: lead.mono.inv(), log: -lead.log, coeff: lead.coeff.recip()? };
        let scaled = Series { terms: self.terms[1..].to_vec(), error: self.error.clone() };
        scaled.mul_term(&inv)
    }

    pub fn inverse(&self, depth: usize) -> Result<Series> {
        let Some(lead) = self.lead() else {
            return Err(if self.error.is_some() {
                Error::Depth("inverse of a series with no known terms".into())
            } else {
                Error::Precondition("inverse of zero".into())
            });
        };
        if sign_of(&lead.coeff)? == Ordering::Equal {
            return Err(Error::Fault("zero leading coefficient".into()));
        }
        if !lead.mono.is_exact() {
            return Ok(Series::monomial(lead.mono.inv(), Constant::one()));
        }
        let inv = Term { mono: lead.mono.inv(), log: -lead.log, coeff: lead.coeff.recip()? };
        let eps = self.relative_tail()?;
        Series::compose(&eps, Coeffs::Geometric, depth)?.mul_term(&inv)?.truncate(depth)
    }

    pub fn exp(&self, depth: usize) -> Result<Series> {
        let (up, real, down) = self.split()?;
        if !up.is_exact() {
            let m = Monomial::from_exponent(up)?;
            return Ok(Series::monomial(m, Constant::one()));
        }
        let m = Monomial::from_exponent(up)?;
        let taylor = Series::compose(&down, Coeffs::Exp, depth)?;
        taylor.mul_term(&Term { mono: m, log: 0, coeff: real.exp() })?.truncate(depth)
    }

    pub fn log(&self, depth: usize) -> Result<Series> {
        let Some(lead) = self.lead() else {
            return Err(if self.error.is_some() {
                Error::Depth("logarithm of a series with no known terms".into())
            } else {
                Error::Precondition("logarithm of zero".into())
            });
        };
        if lead.log != 0 {
            return Err(Error::Range("logarithm of a series led by a power of log x".into()));
        }
        if sign_of(&lead.coeff)? != Ordering::Greater {
            return Err(Error::Precondition("logarithm of a negative series".into()));
        }
        let e = lead.mono.exponent().clone();
        if !lead.mono.is_exact() {
            return e.truncate(depth);
        }
        let lc = Series::constant(lead.coeff.log()?);
        let mercator = Series::compose(&self.relative_tail()?, Coeffs::Log, depth)?;
        e.add(&lc, depth)?.add(&mercator, depth)
    }

    /// `self^g = exp(g·log self)`, with exact natural exponents done by multiplication.
    pub fn pow(&self, g: &Series, depth: usize) -> Result<Series> {
        if let Some(n) = g.as_natural() {
            if let Some(n) = n.to_u64().filter(|n| *n <= MAX_NATURAL_POWER) {
                return self.pow_nat(n, depth);
            }
        }
        if *self == Series::one() {
            return Ok(Series::one());
        }
        g.mul(&self.log(depth)?, depth)?.exp(depth)
    }

    fn pow_nat(&self, mut n: u64, depth: usize) -> Result<Series> {
        let mut acc = Series::one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, depth)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, depth)?;
            }
        }
        Ok(acc)
    }
}

fn top_level_chars(s: &str) -> impl Iterator<Item = char> + '_ {
    let mut depth = 0i32;
    s.chars().filter(move |c| {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        depth == 0 && *c != ')'
    })
}

/// True for names, numbers and function calls.
fn is_atomic_text(s: &str) -> bool {
    !s.is_empty() && top_level_chars(s).all(|c| !" +-*/^".contains(c))
}

/// Splits a coefficient string into a sign and a single-term body when possible.
fn split_coeff(c: &str) -> (bool, &str) {
    match c.strip_prefix('-') {
        Some(rest) if !top_level_chars(rest).any(|c| c == ' ') => (true, rest),
        _ => (false, c),
    }
}

/// Renders `coeff · monomial` as a sign and an unsigned body.
pub fn render_term(coeff: &str, monomial: &str) -> (bool, String) {
    let (neg, abs) = split_coeff(coeff);
    let body = if monomial == "1" {
        if neg || is_atomic_text(abs) || !abs.contains(' ') {
            abs.to_string()
        } else {
            format!("({abs})")
        }
    } else if abs == "1" {
        monomial.to_string()
    } else if is_atomic_text(abs) {
        format!("{abs}*{monomial}")
    } else {
        format!("({abs})*{monomial}")
    };
    (neg, body)
}

/// Joins rendered terms; `compact` drops the spaces around signs.
pub fn render_parts(parts: &[(String, String)], error: Option<&str>, compact: bool) -> String {
    let mut out = String::new();
    for (i, (c, m)) in parts.iter().enumerate() {
        let (neg, body) = render_term(c, m);
        let sep = match (i, neg, compact) {
            (0, true, _) => "-",
            (0, false, _) => "",
            (_, true, true) => "-",
            (_, false, true) => "+",
            (_, true, false) => " - ",
            (_, false, false) => " + ",
        };
        out.push_str(sep);
        out.push_str(&body);
    }
    match (error, parts.is_empty()) {
        (Some(e), true) => format!("O({e})"),
        (Some(e), false) => format!("{out}{}O({e})", if compact { "+" } else { " + " }),
        (None, true) => "0".to_string(),
        (None, false) => out,
    }
}

fn power_text(base: &str, exponent: &str) -> String {
    if is_atomic_text(exponent) {
        format!("{base}^{exponent}")
    } else {
        format!("{base}^({exponent})")
    }
}

fn render_monomial(m: &Monomial) -> String {
    if m.is_one() {
        return "1".into();
    }
    let e = m.exponent();
    let strip = |t: &Term| Term { log: 0, ..t.clone() };
    let x_part = Series {
        terms: e.terms.iter().filter(|t| t.log == 1).map(strip).collect(),
        error: e.error.as_ref().filter(|k| k.log == 1).map(|k| Key { mono: k.mono.clone(), log: 0 }),
    };
    let exp_part = Series {
        terms: e.terms.iter().filter(|t| t.log == 0).cloned().collect(),
        error: e.error.clone().filter(|k| k.log == 0),
    };
    let mut factors = Vec::new();
    if !x_part.is_zero() {
        let a = x_part.render(true);
        factors.push(if a == "1" { "x".to_string() } else { power_text("x", &a) });
    }
    if !exp_part.is_zero() {
        let base = match (exp_part.terms.as_slice(), &exp_part.error) {
            ([t], None) => t.coeff.exp().as_rational().filter(|q| *q > 0 && *q != 1).map(|q| (q, t.mono.clone())),
            _ => None,
        };
        factors.push(match base {
            Some((q, b)) => {
                let qs = if *q.denom() == 1 { q.to_string() } else { format!("({q})") };
                power_text(&qs, &render_monomial(&b))
            }
            None => format!("exp({})", exp_part.render(true)),
        });
    }
    factors.join("*")
}

fn render_key(k: &Key) -> String {
    let m = render_monomial(&k.mono);
    let l = match k.log {
        0 => return m,
        1 => "log(x)".to_string(),
        n if n > 0 => format!("log(x)^{n}"),
        n => format!("log(x)^({n})"),
    };
    if m == "1" {
        l
    } else {
        format!("{m}*{l}")
    }
}

impl Series {
    /// `(coefficient, monomial)` strings for each kept term.
    pub fn term_parts(&self) -> Vec<(String, String)> {
        self.terms.iter().map(|t| (t.coeff.to_string(), render_key(&t.key()))).collect()
    }

    pub fn error_text(&self) -> Option<String> {
        self.error.as_ref().map(render_key)
    }

    fn render(&self, compact: bool) -> String {
        render_parts(&self.term_parts(), self.error_text().as_deref(), compact)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(false))
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series({self})")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_monomial(self))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial({self})")
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_key(self))
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Key({self})")
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({} * {})", self.coeff, render_key(&self.key()))
    }
}

fn ln_monomial(m: &Monomial, lnx: &Interval, prec: u32) -> Result<Interval> {
    series_value(m.exponent(), lnx, prec)
}

fn series_value(s: &Series, lnx: &Interval, prec: u32) -> Result<Interval> {
    let mut acc = Interval::from_int(0, prec);
    for t in &s.terms {
        let v = ln_monomial(&t.mono, lnx, prec)?.exp(prec)?;
        let v = v.mul(&lnx.powi(t.log, prec)?, prec)?.mul(&t.coeff.eval_interval(prec)?, prec)?;
        acc = acc.add(&v, prec)?;
    }
    Ok(acc)
}

impl Series {
    /// Enclosure of `ln` of the kept partial sum at `x`; the error term is ignored.
    pub fn eval_ln_partial(&self, x: &Rational, prec: u32) -> Result<Interval> {
        let Some(lead) = self.lead() else {
            return Err(Error::Precondition("empty partial sum".into()));
        };
        let lnx = Interval::point(x, prec).ln(prec)?;
        let l0 = ln_monomial(&lead.mono, &lnx, prec)?;
        let mut rel = Interval::from_int(0, prec);
        for t in &self.terms {
            let d = ln_monomial(&t.mono, &lnx, prec)?.sub(&l0, prec)?.exp(prec)?;
            let v = d.mul(&lnx.powi(t.log - lead.log, prec)?, prec)?.mul(&t.coeff.eval_interval(prec)?, prec)?;
            rel = rel.add(&v, prec)?;
        }
        let lnlnx = lnx.ln(prec)?.mul_rational(&Rational::from(lead.log), prec)?;
        l0.add(&lnlnx, prec)?.add(&rel.ln(prec)?, prec)
    }

    /// Enclosure of `ln |m(x)|` for the error monomial, if any.
    pub fn eval_ln_error(&self, x: &Rational, prec: u32) -> Result<Option<Interval>> {
        let Some(e) = &self.error else { return Ok(None) };
        let lnx = Interval::point(x, prec).ln(prec)?;
        let l = ln_monomial(&e.mono, &lnx, prec)?;
        let lnlnx = lnx.ln(prec)?.mul_rational(&Rational::from(e.log), prec)?;
        Ok(Some(l.add(&lnlnx, prec)?))
    }
}

type ExpandKey = (SkolemTerm, usize, u32);

fn expansion_cache() -> &'static Mutex<HashMap<ExpandKey, Result<Series>>> {
    static CACHE: OnceLock<Mutex<HashMap<ExpandKey, Result<Series>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Expansion computed with `guard` terms kept in every intermediate series.
pub fn expand_with_guard(t: &SkolemTerm, guard: usize) -> Result<Series> {
    let key = (t.clone(), guard, precision_cap());
    if let Some(r) = expansion_cache().lock().expect("cache lock").get(&key) {
        return r.clone();
    }
    let r = if let Some(n) = t.nat_value() {
        Ok(Series::constant(Constant::rational(Integer::from(n))))
    } else {
        match t.kind() {
            Kind::One => Ok(Series::one()),
            Kind::X => Ok(Series::x()),
            Kind::Add(a, b) => expand_with_guard(a, guard).and_then(|f| f.add(&expand_with_guard(b, guard)?, guard)),
            Kind::Mul(a, b) => expand_with_guard(a, guard).and_then(|f| f.mul(&expand_with_guard(b, guard)?, guard)),
            Kind::Pow(a, b) => expand_with_guard(a, guard).and_then(|f| f.pow(&expand_with_guard(b, guard)?, guard)),
        }
    };
    expansion_cache().lock().expect("cache lock").insert(key, r.clone());
    r
}

/// False when the monomial's exponent may still hide a real part in its truncated
/// tail, which would change the coefficient.
fn coefficient_settled(t: &Term) -> bool {
    let Some(e) = t.mono.exponent().error() else { return true };
    let x = Key { mono: Monomial::x(), log: 0 };
    matches!(cmp_key(e, &x), Ok(Ordering::Greater))
}

/// The first `depth` terms of the expansion of `t`, with the next term's monomial
/// as error marker.
pub fn expand(t: &SkolemTerm, depth: usize) -> Result<Series> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let max_guard = 4 * depth + 16;
    let mut guard = depth;
    loop {
        let s = expand_with_guard(t, guard)?;
        let s = s.truncate(depth)?;
        let settled = s.terms.iter().all(coefficient_settled);
        let complete = s.terms.len() >= depth
            || s.error.is_none()
            || s.terms.last().is_some_and(|t| !t.mono.is_exact());
        if settled && complete {
            return Ok(s);
        }
        if guard >= max_guard {
            if settled {
                return Ok(s);
            }
            return Err(Error::Depth(format!("real part of an exponent in the expansion of {t} lies beyond the working depth")));
        }
        guard = (guard * 2).min(max_guard);
    }
}

/// Findings of [`check_skolem_invariants`]; empty means the expansion is consistent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub violations: Vec<String>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Structural checks on the expansion of a complete Skolem term.
pub fn check_skolem_invariants(f: &Series) -> InvariantReport {
    let mut v = Vec::new();
    let x = Monomial::x();
    for (i, t) in f.terms.iter().enumerate() {
        if t.log != 0 {
            v.push(format!("term {i} carries log(x)^{}", t.log));
        }
        if !t.mono.is_one() {
            match cmp_monomial(&t.mono, &x) {
                Ok(Ordering::Less) => v.push(format!("support monomial {} lies strictly between 1 and x", t.mono)),
                Ok(_) | Err(Error::Depth(_)) => {}
                Err(e) => v.push(format!("support monomial {} not comparable with x: {e}", t.mono)),
            }
        } else if t.log == 0 {
            match t.coeff.as_integer() {
                Some(n) if n >= 0 => {}
                _ => v.push(format!("constant term {} is not a natural number", t.coeff)),
            }
        }
        if !t.coeff.flag().in_e() {
            v.push(format!("coefficient {} not known to lie in E", t.coeff));
        }
    }
    match f.lead() {
        Some(t) if t.coeff.flag() != EMembership::InEPlus => {
            v.push(format!("leading coefficient {} not known to lie in E+", t.coeff))
        }
        None if f.error.is_none() => v.push("expansion is zero".into()),
        _ => {}
    }
    InvariantReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skolem::parse;

    fn ex(s: &str, d: usize) -> Series {
        expand(&parse(s).unwrap(), d).unwrap()
    }

    #[test]
    fn golden_expansion() {
        assert_eq!(ex("(x+1)^x", 2).to_string(), "e*x^x - (e/2)*x^(x-1) + O(x^(x-2))");
    }

    #[test]
    fn polynomial_arithmetic() {
        assert_eq!(ex("(x+1)+(x+1)", 8).to_string(), "2*x + 2");
        assert_eq!(ex("(x+1)*(x+1)", 8).to_string(), "x^2 + 2*x + 1");
        assert_eq!(ex("x^x", 8).to_string(), "x^x");
        assert_eq!(ex("2^(x+1)", 8).to_string(), "2*2^x");
        assert_eq!(ex("2^x*3^x", 8).to_string(), "6^x");
    }

    #[test]
    fn logarithm_of_shifted_x() {
        let f = ex("x+1", 8);
        let l = f.log(4).unwrap();
        assert_eq!(l.to_string(), "log(x) + x^(-1) - (1/2)*x^(-2) + (1/3)*x^(-3) + O(x^(-4))");
        let back = l.exp(4).unwrap();
        assert_eq!(back.to_string(), "x + 1 + O(x^(-3))");
    }

    #[test]
    fn inverse_round_trip() {
        let f = ex("x+1", 8);
        let inv = f.inverse(5).unwrap();
        assert_eq!(inv.to_string(), "x^(-1) - x^(-2) + x^(-3) - x^(-4) + x^(-5) + O(x^(-6))");
        let p = f.mul(&inv, 5).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].coeff, Constant::one());
    }

    #[test]
    fn split_parts() {
        let f = ex("x+1+1", 4);
        let (u, r, d) = f.split().unwrap();
        assert_eq!(u.to_string(), "x");
        assert_eq!(r, Constant::int(2));
        assert!(d.is_zero());
    }

    #[test]
    fn monomial_order() {
        let m = |s: &str| ex(s, 4).lead().unwrap().mono.clone();
        assert_eq!(cmp_monomial(&m("x"), &Monomial::one()).unwrap(), Ordering::Greater);
        assert_eq!(cmp_monomial(&m("x^x"), &m("2^x")).unwrap(), Ordering::Greater);
        assert_eq!(cmp_monomial(&m("2^x"), &m("x^(1+1+1+1+1+1+1+1+1+1)")).unwrap(), Ordering::Greater);
    }

    #[test]
    fn inexact_monomials() {
        let f = ex("(x+1)^(x^x)", 4);
        assert_eq!(f.terms().len(), 1);
        assert!(!f.terms()[0].mono.is_exact());
        assert!(check_skolem_invariants(&f).passed());
    }

    #[test]
    fn invariants_hold_on_golden() {
        assert!(check_skolem_invariants(&ex("(x+1)^x", 6)).passed());
        assert!(check_skolem_invariants(&ex("x+3", 6)).passed());
    }
}
