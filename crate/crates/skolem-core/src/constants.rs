//! Closed-form real constants built from rationals with `+ − · ÷ exp log`.
//!
//! Values are kept in a canonical Laurent-polynomial form over transcendental atoms
//! (`exp(c)`, `log(c)` and `1/s` for sums `s`) with rational coefficients. The
//! normal form folds rationals, applies `exp(log y) = y`, `log(exp y) = y`,
//! `log(ab) = log a + log b` on positive monomials and prime factorisation of
//! rational logarithms. Distinct exponentials are never merged, so `e·e` and
//! `exp(2)` stay apart and compare as [`ConstOrdering::Unknown`].

use rug::{Integer, Rational};
use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub const DEFAULT_PRECISION_CAP: u32 = 256;
const MAX_WORKING_PRECISION: u32 = 1 << 16;

static PRECISION_CAP: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION_CAP);

/// Bit cap used by sign decisions inside the series engine.
pub fn precision_cap() -> u32 {
    PRECISION_CAP.load(AtomicOrdering::Relaxed)
}

pub fn set_precision_cap(bits: u32) {
    PRECISION_CAP.store(bits.max(32), AtomicOrdering::Relaxed);
}

/// Membership in the exponential constants `E⁺ ⊆ E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EMembership {
    InEPlus,
    InE,
    Outside,
    Unknown,
}

impl EMembership {
    pub fn in_e(self) -> bool {
        matches!(self, EMembership::InEPlus | EMembership::InE)
    }

    pub fn in_e_plus(self) -> bool {
        self == EMembership::InEPlus
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstOrdering {
    Less,
    Greater,
    EqualExact,
    Unknown,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Exp(Constant),
    Log(Constant),
    /// `1/s` for a sum `s` normalised to leading term `1`.
    Inv(Constant),
}

/// A Laurent monomial: atoms with nonzero integer exponents, sorted by atom.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
struct Mono(Vec<(Atom, i32)>);

impl Mono {
    fn one() -> Self {
        Mono(Vec::new())
    }

    fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn atom(a: Atom) -> Self {
        Mono(vec![(a, 1)])
    }

    fn mul(&self, o: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < o.0.len() {
            let ord = match (self.0.get(i), o.0.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(o.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let k = self.0[i].1 + o.0[j].1;
                    if k != 0 {
                        out.push((self.0[i].0.clone(), k));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Mono(out)
    }

    fn inv(&self) -> Mono {
        Mono(self.0.iter().map(|(a, k)| (a.clone(), -k)).collect())
    }

    fn exponent_of(&self, a: &Atom) -> i32 {
        self.0.iter().find(|(b, _)| b == a).map(|(_, k)| *k).unwrap_or(0)
    }

    fn without(&self, a: &Atom) -> Mono {
        Mono(self.0.iter().filter(|(b, _)| b != a).cloned().collect())
    }
}

/// Lexicographic order on exponent vectors; compatible with multiplication.
impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), o.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, k)), None) => return k.cmp(&0),
                (None, Some((_, k))) => return 0.cmp(k),
                (Some((a, k)), Some((b, l))) => match a.cmp(b) {
                    Ordering::Less => return k.cmp(&0),
                    Ordering::Greater => return 0.cmp(l),
                    Ordering::Equal => match k.cmp(l) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        other => return other,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Polynomial body: terms sorted by descending monomial, nonzero coefficients.
type Poly = Vec<(Mono, Rational)>;

fn poly_from_map(m: BTreeMap<Mono, Rational>) -> Poly {
    m.into_iter().rev().filter(|(_, q)| *q != 0).collect()
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut m: BTreeMap<Mono, Rational> = BTreeMap::new();
    for (mono, q) in a.iter().chain(b.iter()) {
        *m.entry(mono.clone()).or_default() += q;
    }
    poly_from_map(m)
}

fn poly_scale(a: &Poly, mono: &Mono, q: &Rational) -> Poly {
    if *q == 0 {
        return Vec::new();
    }
    a.iter().map(|(m, c)| (m.mul(mono), Rational::from(c * q))).collect()
}

fn poly_mul_raw(a: &Poly, b: &Poly) -> Poly {
    let mut m: BTreeMap<Mono, Rational> = BTreeMap::new();
    for (ma, qa) in a {
        for (mb, qb) in b {
            *m.entry(ma.mul(mb)).or_default() += Rational::from(qa * qb);
        }
    }
    poly_from_map(m)
}

/// Exact quotient `p / s` for `s` with leading term `1`, if the greedy division
/// terminates with zero remainder.
fn poly_exact_div(p: &Poly, s: &Poly) -> Option<Poly> {
    debug_assert!(s.first().map(|(m, q)| m.is_one() && *q == 1).unwrap_or(false));
    let mut rem = p.clone();
    let mut quot: BTreeMap<Mono, Rational> = BTreeMap::new();
    let cap = 4 * (p.len() + 1) * (s.len() + 1);
    for _ in 0..cap {
        let Some((m, q)) = rem.first().cloned() else {
            return Some(poly_from_map(quot));
        };
        *quot.entry(m.clone()).or_default() += &q;
        let neg = Rational::from(-&q);
        rem = poly_add(&rem, &poly_scale(s, &m, &neg));
    }
    None
}

#[derive(Clone)]
pub struct Constant(Arc<Inner>);

struct Inner {
    poly: Poly,
    flag: EMembership,
    hash: u64,
    cache: Mutex<Option<Interval>>,
}

impl PartialEq for Constant {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || (self.0.hash == o.0.hash && self.0.poly == o.0.poly)
    }
}

impl Eq for Constant {}

impl Hash for Constant {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.0.hash.hash(h)
    }
}

impl Ord for Constant {
    fn cmp(&self, o: &Self) -> Ordering {
        if self == o {
            return Ordering::Equal;
        }
        let (a, b) = (&self.0.poly, &o.0.poly);
        for ((ma, qa), (mb, qb)) in a.iter().zip(b.iter()) {
            match ma.cmp(mb).then_with(|| qa.cmp(qb)) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Constant {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn atom_flag(a: &Atom) -> EMembership {
    match a {
        Atom::Exp(r) if r.flag().in_e() => EMembership::InEPlus,
        Atom::Inv(s) if s.flag().in_e_plus() => EMembership::InEPlus,
        _ => EMembership::Unknown,
    }
}

fn poly_flag(p: &Poly) -> EMembership {
    let mut all_plus = true;
    for (m, q) in p {
        if m.0.iter().any(|(a, _)| atom_flag(a) != EMembership::InEPlus) {
            return EMembership::Unknown;
        }
        if *q < 0 {
            all_plus = false;
        }
    }
    if all_plus && !p.is_empty() {
        EMembership::InEPlus
    } else {
        EMembership::InE
    }
}

/// Replaces `Inv(s)^(-k)` by `s^k` and cancels `s · Inv(s)` where the division is exact.
fn normalize_poly(mut p: Poly) -> Poly {
    loop {
        let neg_inv = p.iter().find_map(|(m, _)| {
            m.0.iter().find(|(a, k)| matches!(a, Atom::Inv(_)) && *k < 0).map(|(a, _)| a.clone())
        });
        if let Some(atom) = neg_inv {
            let Atom::Inv(s) = &atom else { unreachable!() };
            let mut out: Poly = Vec::new();
            for (m, q) in &p {
                let k = m.exponent_of(&atom);
                let rest: Poly = vec![(m.without(&atom), q.clone())];
                if k < 0 {
                    let mut term = rest;
                    for _ in 0..(-k) {
                        term = poly_mul_raw(&term, &s.0.poly);
                    }
                    out = poly_add(&out, &term);
                } else {
                    out = poly_add(&out, &vec![(m.clone(), q.clone())]);
                }
            }
            p = out;
            continue;
        }
        let mut changed = false;
        let inv_atoms: Vec<Atom> = {
            let mut v: Vec<Atom> = p
                .iter()
                .flat_map(|(m, _)| m.0.iter().filter(|(a, k)| matches!(a, Atom::Inv(_)) && *k > 0))
                .map(|(a, _)| a.clone())
                .collect();
            v.sort();
            v.dedup();
            v
        };
        for atom in inv_atoms {
            let Atom::Inv(s) = &atom else { unreachable!() };
            let (with, without): (Poly, Poly) =
                p.iter().cloned().partition(|(m, _)| m.exponent_of(&atom) > 0);
            let lowered: Poly = with
                .iter()
                .map(|(m, q)| (m.mul(&Mono(vec![(atom.clone(), -1)])), q.clone()))
                .collect();
            let mut lowered_sorted: BTreeMap<Mono, Rational> = BTreeMap::new();
            for (m, q) in lowered {
                *lowered_sorted.entry(m).or_default() += q;
            }
            let lowered = poly_from_map(lowered_sorted);
            if let Some(quot) = poly_exact_div(&lowered, &s.0.poly) {
                p = poly_add(&without, &quot);
                changed = true;
                break;
            }
        }
        if !changed {
            return p;
        }
    }
}

impl Constant {
    fn from_poly(p: Poly) -> Constant {
        let p = normalize_poly(p);
        let flag = poly_flag(&p);
        let mut h = DefaultHasher::new();
        p.hash(&mut h);
        Constant(Arc::new(Inner { poly: p, flag, hash: h.finish(), cache: Mutex::new(None) }))
    }

    fn from_mono(m: Mono, q: Rational) -> Constant {
        if q == 0 {
            return Constant::zero();
        }
        Constant::from_poly(vec![(m, q)])
    }

    pub fn rational(q: impl Into<Rational>) -> Constant {
        Constant::from_mono(Mono::one(), q.into())
    }

    pub fn int(n: i64) -> Constant {
        Constant::rational(n)
    }

    pub fn zero() -> Constant {
        Constant::from_poly(Vec::new())
    }

    pub fn one() -> Constant {
        Constant::int(1)
    }

    /// Euler's number `exp(1)`.
    pub fn e() -> Constant {
        Constant::one().exp()
    }

    pub fn is_zero(&self) -> bool {
        self.0.poly.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|q| q == 1).unwrap_or(false)
    }

    /// Exact rational value when the constant is exp/log-free.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.0.poly.as_slice() {
            [] => Some(Rational::new()),
            [(m, q)] if m.is_one() => Some(q.clone()),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<Integer> {
        self.as_rational().filter(|q| *q.denom() == 1).map(|q| q.numer().clone())
    }

    pub fn flag(&self) -> EMembership {
        self.0.flag
    }

    pub fn neg(&self) -> Constant {
        Constant::from_poly(self.0.poly.iter().map(|(m, q)| (m.clone(), Rational::from(-q))).collect())
    }

    pub fn add(&self, o: &Constant) -> Constant {
        Constant::from_poly(poly_add(&self.0.poly, &o.0.poly))
    }

    pub fn sub(&self, o: &Constant) -> Constant {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Constant) -> Constant {
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        Constant::from_poly(poly_mul_raw(&self.0.poly, &o.0.poly))
    }

    pub fn mul_rational(&self, q: &Rational) -> Constant {
        Constant::from_poly(poly_scale(&self.0.poly, &Mono::one(), q))
    }

    /// Reciprocal; fails when the value cannot be separated from zero.
    pub fn recip(&self) -> Result<Constant> {
        match self.0.poly.as_slice() {
            [] => Err(Error::Precondition("division by zero".into())),
            [(m, q)] => Ok(Constant::from_mono(m.inv(), Rational::from(q.recip_ref()))),
            [(lm, lq), ..] => {
                if self.sign(DEFAULT_PRECISION_CAP) == ConstOrdering::Unknown {
                    return Err(Error::Undetermined(format!("cannot separate {self} from zero")));
                }
                let lead_inv = lm.inv();
                let lq_inv = Rational::from(lq.recip_ref());
                let monic = Constant::from_poly(poly_scale(&self.0.poly, &lead_inv, &lq_inv));
                Ok(Constant::from_mono(lead_inv.mul(&Mono::atom(Atom::Inv(monic))), lq_inv))
            }
        }
    }

    pub fn div(&self, o: &Constant) -> Result<Constant> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn powi(&self, k: i64) -> Result<Constant> {
        if k < 0 {
            return self.powi(-k)?.recip();
        }
        let mut acc = Constant::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    pub fn exp(&self) -> Constant {
        let mut factor = Constant::one();
        let mut rest: Poly = Vec::new();
        for (m, q) in &self.0.poly {
            if let [(Atom::Log(y), 1)] = m.0.as_slice() {
                if *q.denom() == 1 {
                    if let Some(k) = q.numer().to_i64().filter(|k| k.abs() <= 64) {
                        if let Ok(p) = y.powi(k) {
                            factor = factor.mul(&p);
                            continue;
                        }
                    }
                }
            }
            rest.push((m.clone(), q.clone()));
        }
        if rest.is_empty() {
            return factor;
        }
        let r = Constant::from_poly(rest);
        let atom = if r.0.poly[0].1 < 0 {
            Mono(vec![(Atom::Exp(r.neg()), -1)])
        } else {
            Mono::atom(Atom::Exp(r))
        };
        factor.mul(&Constant::from_mono(atom, Rational::from(1)))
    }

    /// Natural logarithm; the argument must be provably positive.
    pub fn log(&self) -> Result<Constant> {
        match self.sign(DEFAULT_PRECISION_CAP) {
            ConstOrdering::Greater => {}
            ConstOrdering::Unknown => {
                return Err(Error::Undetermined(format!("sign of log argument {self} unknown")))
            }
            _ => return Err(Error::Precondition(format!("log of non-positive constant {self}"))),
        }
        if let [(m, q)] = self.0.poly.as_slice() {
            if let Some(l) = log_of_monomial(m, q) {
                return Ok(l);
            }
        }
        let shared = common_exp_factor(&self.0.poly);
        if !shared.is_zero() {
            let rest = self.mul(&shared.neg().exp());
            return Ok(shared.add(&rest.log()?));
        }
        let (lm, lq) = &self.0.poly[0];
        if *lq > 0 {
            if let Some(lead) = log_of_monomial(lm, lq) {
                let inv = lm.inv();
                let lq_inv = Rational::from(lq.recip_ref());
                let monic = Constant::from_poly(poly_scale(&self.0.poly, &inv, &lq_inv));
                if monic.is_one() {
                    return Ok(lead);
                }
                return Ok(lead.add(&Constant::from_mono(Mono::atom(Atom::Log(monic)), Rational::from(1))));
            }
        }
        Ok(Constant::from_mono(Mono::atom(Atom::Log(self.clone())), Rational::from(1)))
    }

    fn poly(&self) -> &Poly {
        &self.0.poly
    }

    /// Interval at working precision `wp`, without a width target.
    fn eval_at(&self, wp: u32) -> Result<Interval> {
        {
            let cache = self.0.cache.lock().expect("cache lock");
            if let Some(i) = cache.as_ref() {
                if i.prec() >= wp {
                    return Ok(i.clone());
                }
            }
        }
        let mut acc = Interval::from_int(0, wp);
        for (m, q) in self.poly() {
            let mut t = Interval::point(q, wp);
            for (a, k) in &m.0 {
                let base = match a {
                    Atom::Exp(r) => r.eval_at(wp)?.exp(wp)?,
                    Atom::Log(y) => y.eval_at(wp)?.ln(wp)?,
                    Atom::Inv(s) => s.eval_at(wp)?.recip(wp)?,
                };
                t = t.mul(&base.powi(*k, wp)?, wp)?;
            }
            acc = acc.add(&t, wp)?;
        }
        *self.0.cache.lock().expect("cache lock") = Some(acc.clone());
        Ok(acc)
    }

    /// An enclosure of width at most `2^-precision`.
    pub fn eval_interval(&self, precision: u32) -> Result<Interval> {
        let target = rug::Float::with_val(precision + 8, rug::Float::i_exp(1, -(precision as i32)));
        let mut wp = precision + 32;
        loop {
            match self.eval_at(wp) {
                Ok(i) if i.width() <= target => return Ok(i),
                Ok(_) => {}
                Err(Error::Undetermined(_)) if wp < MAX_WORKING_PRECISION => {}
                Err(e) => return Err(e),
            }
            if wp >= MAX_WORKING_PRECISION {
                return Err(Error::Resource(format!(
                    "working precision {MAX_WORKING_PRECISION} reached evaluating {self}"
                )));
            }
            wp = (wp * 2).min(MAX_WORKING_PRECISION);
        }
    }

    /// Sign as a comparison against zero.
    pub fn sign(&self, precision_cap: u32) -> ConstOrdering {
        if let Some(q) = self.as_rational() {
            return match q.cmp0() {
                Ordering::Less => ConstOrdering::Less,
                Ordering::Equal => ConstOrdering::EqualExact,
                Ordering::Greater => ConstOrdering::Greater,
            };
        }
        let mut p = 64.min(precision_cap);
        loop {
            if let Ok(i) = self.eval_at(p) {
                if i.is_positive() {
                    return ConstOrdering::Greater;
                }
                if i.is_negative() {
                    return ConstOrdering::Less;
                }
            }
            if p >= precision_cap {
                return ConstOrdering::Unknown;
            }
            p = (p * 2).min(precision_cap);
        }
    }

    /// Structural tree view of the canonical form.
    pub fn to_expr(&self) -> Expr {
        let mut sum: Option<Expr> = None;
        for (m, q) in self.poly() {
            let mut t = Expr::Rat(q.clone());
            for (a, k) in &m.0 {
                let base = match a {
                    Atom::Exp(r) => Expr::Exp(Box::new(r.to_expr())),
                    Atom::Log(y) => Expr::Log(Box::new(y.to_expr())),
                    Atom::Inv(s) => Expr::Div(Box::new(Expr::Rat(Rational::from(1))), Box::new(s.to_expr())),
                };
                for _ in 0..k.unsigned_abs() {
                    t = if *k > 0 {
                        Expr::Mul(Box::new(t), Box::new(base.clone()))
                    } else {
                        Expr::Div(Box::new(t), Box::new(base.clone()))
                    };
                }
            }
            sum = Some(match sum {
                None => t,
                Some(s) => Expr::Add(Box::new(s), Box::new(t)),
            });
        }
        sum.unwrap_or(Expr::Rat(Rational::new()))
    }

    /// Builds a constant from an expression tree, checking domains.
    pub fn from_expr(e: &Expr) -> Result<Constant> {
        Ok(match e {
            Expr::Rat(q) => Constant::rational(q.clone()),
            Expr::Add(a, b) => Constant::from_expr(a)?.add(&Constant::from_expr(b)?),
            Expr::Sub(a, b) => Constant::from_expr(a)?.sub(&Constant::from_expr(b)?),
            Expr::Mul(a, b) => Constant::from_expr(a)?.mul(&Constant::from_expr(b)?),
            Expr::Div(a, b) => Constant::from_expr(a)?.div(&Constant::from_expr(b)?)?,
            Expr::Exp(a) => Constant::from_expr(a)?.exp(),
            Expr::Log(a) => Constant::from_expr(a)?.log()?,
        })
    }

    /// True when the rendering needs no parentheses as a factor.
    pub fn is_atomic(&self) -> bool {
        match self.poly().as_slice() {
            [] => true,
            [(m, q)] if m.is_one() => *q.denom() == 1 && *q >= 0,
            [(m, q)] => *q == 1 && m.0.len() == 1 && m.0[0].1 == 1,
            _ => false,
        }
    }

    /// `(true, -c)` when the canonical form leads with a negative coefficient.
    pub fn split_sign(&self) -> (bool, Constant) {
        match self.poly().first() {
            Some((_, q)) if *q < 0 => (true, self.neg()),
            _ => (false, self.clone()),
        }
    }

    /// JSON-friendly decimal enclosure.
    pub fn enclosure_strings(&self, precision: u32) -> Option<(String, String)> {
        self.eval_interval(precision).ok().map(|i| i.to_decimal(20))
    }
}

fn is_known_positive(a: &Atom) -> bool {
    match a {
        Atom::Exp(_) => true,
        Atom::Log(y) => y.sub(&Constant::one()).sign(64) == ConstOrdering::Greater,
        Atom::Inv(s) => s.sign(64) == ConstOrdering::Greater,
    }
}

/// `log(q · ∏ aᵢ^kᵢ)` split into a sum, when every factor is positive.
/// Sum of `k·r` over atoms `exp(r)` dividing every term with exponent at least `k > 0`.
fn common_exp_factor(p: &Poly) -> Constant {
    let Some((first, _)) = p.first() else { return Constant::zero() };
    if p.len() < 2 {
        return Constant::zero();
    }
    let mut acc = Constant::zero();
    for (a, _) in &first.0 {
        let Atom::Exp(r) = a else { continue };
        let k = p.iter().map(|(m, _)| m.exponent_of(a)).min().unwrap_or(0);
        if k > 0 {
            acc = acc.add(&r.mul_rational(&Rational::from(k)));
        } else if k < 0 && p.iter().all(|(m, _)| m.exponent_of(a) < 0) {
            let k = p.iter().map(|(m, _)| m.exponent_of(a)).max().unwrap_or(0);
            acc = acc.add(&r.mul_rational(&Rational::from(k)));
        }
    }
    acc
}

fn log_of_monomial(m: &Mono, q: &Rational) -> Option<Constant> {
    if *q <= 0 || !m.0.iter().all(|(a, _)| is_known_positive(a)) {
        return None;
    }
    let mut acc = log_rational(q);
    for (a, k) in &m.0 {
        let l = match a {
            Atom::Exp(r) => r.clone(),
            Atom::Log(_) => Constant::from_mono(Mono::atom(Atom::Log(Constant::from_mono(Mono::atom(a.clone()), Rational::from(1)))), Rational::from(1)),
            Atom::Inv(s) => Constant::from_mono(Mono::atom(Atom::Log(s.clone())), Rational::from(-1)),
        };
        acc = acc.add(&l.mul_rational(&Rational::from(*k)));
    }
    Some(acc)
}

const TRIAL_LIMIT: u32 = 1 << 16;

/// Prime powers of `n` below the trial limit, and the remaining cofactor.
fn factor(n: &Integer) -> (Vec<(u32, i64)>, Integer) {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut p = 2u32;
    while p < TRIAL_LIMIT && Integer::from(p) * p <= n {
        let mut k = 0;
        while n.is_divisible_u(p) {
            n /= p;
            k += 1;
        }
        if k > 0 {
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 && n < Integer::from(TRIAL_LIMIT) * TRIAL_LIMIT {
        out.push((n.to_u32().expect("cofactor below trial limit squared is prime"), 1));
        n = Integer::from(1);
    }
    (out, n)
}

fn log_rational(q: &Rational) -> Constant {
    debug_assert!(*q > 0);
    if *q == 1 {
        return Constant::zero();
    }
    let log_atom = |n: Integer| {
        let atom = Atom::Log(Constant::rational(n));
        Constant::from_mono(Mono::atom(atom), Rational::from(1))
    };
    let (num, num_rest) = factor(q.numer());
    let (den, den_rest) = factor(q.denom());
    let mut acc = Constant::zero();
    for (p, k) in num {
        acc = acc.add(&log_atom(Integer::from(p)).mul_rational(&Rational::from(k)));
    }
    for (p, k) in den {
        acc = acc.add(&log_atom(Integer::from(p)).mul_rational(&Rational::from(-k)));
    }
    if num_rest > 1 {
        acc = acc.add(&log_atom(num_rest));
    }
    if den_rest > 1 {
        acc = acc.sub(&log_atom(den_rest));
    }
    acc
}

/// Compares two constants, deciding equality only syntactically.
pub fn cmp_const(a: &Constant, b: &Constant, precision_cap: u32) -> ConstOrdering {
    if a == b {
        return ConstOrdering::EqualExact;
    }
    a.sub(b).sign(precision_cap)
}

pub fn eval_interval(c: &Constant, precision: u32) -> Result<Interval> {
    c.eval_interval(precision)
}

/// Expression tree over rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Rat(Rational),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rat(q) => write!(f, "{q}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
        }
    }
}

fn fmt_atom(a: &Atom) -> String {
    match a {
        Atom::Exp(r) if r.is_one() => "e".to_string(),
        Atom::Exp(r) => format!("exp({r})"),
        Atom::Log(y) => format!("log({y})"),
        Atom::Inv(s) => format!("({s})"),
    }
}

fn fmt_factor(a: &Atom, k: i32) -> String {
    let base = fmt_atom(a);
    if k == 1 {
        base
    } else {
        format!("{base}^{k}")
    }
}

/// Renders `|q| · m` with no sign.
fn fmt_term(m: &Mono, q: &Rational) -> String {
    let q = Rational::from(q.abs_ref());
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    if *q.numer() != 1 || m.0.iter().all(|(_, k)| *k < 0) {
        num.push(q.numer().to_string());
    }
    if *q.denom() != 1 {
        den.push(q.denom().to_string());
    }
    for (a, k) in &m.0 {
        if *k > 0 {
            num.push(fmt_factor(a, *k));
        } else {
            den.push(fmt_factor(a, -*k));
        }
    }
    let n = num.join("*");
    match den.len() {
        0 => n,
        1 => format!("{n}/{}", den[0]),
        _ => format!("{n}/({})", den.join("*")),
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.poly();
        if p.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, q)) in p.iter().enumerate() {
            let t = fmt_term(m, q);
            match (i, *q < 0) {
                (0, true) => write!(f, "-{t}")?,
                (0, false) => write!(f, "{t}")?,
                (_, true) => write!(f, " - {t}")?,
                (_, false) => write!(f, " + {t}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Constant {
        Constant::rational(Rational::from((a, b)))
    }

    #[test]
    fn rational_folding_is_exact() {
        let two = Constant::one().add(&Constant::one());
        assert_eq!(cmp_const(&two, &Constant::int(2), 64), ConstOrdering::EqualExact);
        let i = two.eval_interval(40).unwrap();
        assert_eq!(i.lo(), 2);
        assert_eq!(i.hi(), 2);
    }

    #[test]
    fn e_encloses_and_compares() {
        let e = Constant::e();
        let i = e.eval_interval(20).unwrap();
        assert!(i.width() <= rug::Float::with_val(64, rug::Float::i_exp(1, -20)));
        assert!(i.contains(&Rational::from((2718281828u64, 1000000000u64))) || i.lo() < 2.7183 && i.hi() > 2.7182);
        assert_eq!(cmp_const(&e, &Constant::int(3), 10), ConstOrdering::Less);
        assert_eq!(cmp_const(&Constant::int(3), &e, 10), ConstOrdering::Greater);
    }

    #[test]
    fn distinct_exponentials_are_not_merged() {
        let e = Constant::e();
        let ee = e.mul(&e);
        let e2 = Constant::int(2).exp();
        for cap in [64, 256, 1024] {
            assert_eq!(cmp_const(&ee, &e2, cap), ConstOrdering::Unknown);
        }
    }

    #[test]
    fn exp_log_rewrites() {
        let e = Constant::e();
        assert_eq!(e.log().unwrap(), Constant::one());
        let l3 = Constant::int(3).log().unwrap();
        assert_eq!(l3.exp(), Constant::int(3));
        assert_eq!(Constant::int(4).log().unwrap(), Constant::int(2).log().unwrap().mul_rational(&Rational::from(2)));
        let x = Constant::int(2).log().unwrap().add(&Constant::one());
        assert_eq!(x.exp(), Constant::e().mul_rational(&Rational::from(2)));
    }

    #[test]
    fn membership_flags() {
        assert_eq!(Constant::e().flag(), EMembership::InEPlus);
        let d = Constant::e().sub(&Constant::e().exp());
        assert_eq!(d.flag(), EMembership::InE);
        let m1 = Constant::one().sub(&Constant::one().add(&Constant::one()));
        assert_eq!(m1.flag(), EMembership::InE);
        assert_eq!(Constant::int(2).log().unwrap().flag(), EMembership::Unknown);
    }

    #[test]
    fn rendering() {
        assert_eq!(Constant::e().to_string(), "e");
        assert_eq!(Constant::e().mul(&q(1, 2)).to_string(), "e/2");
        assert_eq!(Constant::int(3).log().unwrap().to_string(), "log(3)");
        assert_eq!(Constant::e().mul(&q(-3, 2)).to_string(), "-3*e/2");
        assert_eq!(Constant::e().recip().unwrap().to_string(), "1/e");
        assert_eq!(Constant::e().add(&Constant::one()).to_string(), "e + 1");
        assert_eq!(q(-1, 2).exp().to_string(), "1/exp(1/2)");
    }

    #[test]
    fn division_by_sums_cancels() {
        let s = Constant::e().add(&Constant::one());
        let r = s.recip().unwrap();
        assert_eq!(s.mul(&r), Constant::one());
        let t = Constant::e().mul(&s).div(&s).unwrap();
        assert_eq!(t, Constant::e());
        let two_s = s.mul_rational(&Rational::from(2));
        assert_eq!(two_s.recip().unwrap().mul(&s), q(1, 2));
        assert!(Constant::zero().recip().is_err());
    }
}
