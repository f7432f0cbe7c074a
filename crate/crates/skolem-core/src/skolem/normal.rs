//! Sums of products of components.

use rug::Integer;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use super::term::{Kind, Term};
use crate::asymptotics::{symbolic_compare, Verdict};
use crate::error::{Error, Result};
use crate::transseries::DEFAULT_DEPTH;

const MAX_SUMMANDS: usize = 4096;
const MAX_FACTORS: usize = 4096;
/// Largest natural exponent that is multiplied out.
const MAX_NAT_POWER: u32 = 256;

/// `coeff · Π factors`, factors sorted in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Summand {
    pub coeff: Integer,
    pub factors: Vec<Term>,
}

impl Summand {
    fn constant(n: Integer) -> Summand {
        Summand { coeff: n, factors: Vec::new() }
    }

    pub fn to_term(&self) -> Term {
        let prod = product(&self.factors);
        match prod {
            None => nat_term(&self.coeff),
            Some(p) if self.coeff == 1 => p,
            Some(p) => Term::mul(&p, &nat_term(&self.coeff)),
        }
    }
}

/// Summands sorted in descending order; never empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalForm {
    pub summands: Vec<Summand>,
}

impl NormalForm {
    pub fn one() -> NormalForm {
        NormalForm { summands: vec![Summand::constant(Integer::from(1))] }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| *c == 1)
    }

    pub fn as_constant(&self) -> Option<&Integer> {
        match self.summands.as_slice() {
            [s] if s.factors.is_empty() => Some(&s.coeff),
            _ => None,
        }
    }

    pub fn to_term(&self) -> Term {
        let mut it = self.summands.iter().map(Summand::to_term);
        let first = it.next().expect("normal form has a summand");
        it.fold(first, |acc, s| Term::add(&acc, &s))
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// A term denoting `n`, compact for large `n`.
pub fn nat_term(n: &Integer) -> Term {
    if let Some(k) = n.to_u64().filter(|&k| k <= 16) {
        return Term::lit(k.max(1)).expect("small literal");
    }
    let (q, r) = n.clone().div_rem_floor(Integer::from(2));
    let two = Term::lit(2).expect("literal");
    let t = Term::mul(&two, &nat_term(&q));
    if r == 0 {
        t
    } else {
        Term::add(&t, &Term::one())
    }
}

fn product(fs: &[Term]) -> Option<Term> {
    let mut it = fs.iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, f| Term::mul(&acc, f)))
}

/// Asymptotic order with a structural tie-break.
pub fn cmp_terms(a: &Term, b: &Term) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    match symbolic_compare(a, b, DEFAULT_DEPTH) {
        Ok(Verdict::Less) => Ordering::Less,
        Ok(Verdict::Greater) => Ordering::Greater,
        _ => a.cmp(b),
    }
}

fn sort_desc(v: &mut [Term]) {
    v.sort_by(|a, b| cmp_terms(b, a));
}

fn merge_desc(a: &[Term], b: &[Term]) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if cmp_terms(&a[i], &b[j]) != Ordering::Less {
            out.push(a[i].clone());
            i += 1;
        } else {
            out.push(b[j].clone());
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn canonical(summands: Vec<Summand>) -> Result<NormalForm> {
    let mut index: HashMap<Vec<Term>, usize> = HashMap::new();
    let mut merged: Vec<Summand> = Vec::new();
    for s in summands {
        match index.get(&s.factors) {
            Some(&i) => merged[i].coeff += s.coeff,
            None => {
                index.insert(s.factors.clone(), merged.len());
                merged.push(s);
            }
        }
    }
    if merged.len() > MAX_SUMMANDS {
        return Err(Error::Resource(format!("normal form exceeds {MAX_SUMMANDS} summands")));
    }
    let keys: Vec<Term> = merged.iter().map(Summand::to_term).collect();
    let mut order: Vec<usize> = (0..merged.len()).collect();
    order.sort_by(|&i, &j| cmp_terms(&keys[j], &keys[i]));
    Ok(NormalForm { summands: order.into_iter().map(|i| merged[i].clone()).collect() })
}

fn nf_add(a: &NormalForm, b: &NormalForm) -> Result<NormalForm> {
    canonical(a.summands.iter().chain(&b.summands).cloned().collect())
}

fn nf_mul(a: &NormalForm, b: &NormalForm) -> Result<NormalForm> {
    if a.summands.len() * b.summands.len() > MAX_SUMMANDS {
        return Err(Error::Resource(format!("normal form exceeds {MAX_SUMMANDS} summands")));
    }
    let mut out = Vec::new();
    for s in &a.summands {
        for t in &b.summands {
            if s.factors.len() + t.factors.len() > MAX_FACTORS {
                return Err(Error::Resource(format!("product exceeds {MAX_FACTORS} factors")));
            }
            out.push(Summand {
                coeff: Integer::from(&s.coeff * &t.coeff),
                factors: merge_desc(&s.factors, &t.factors),
            });
        }
    }
    canonical(out)
}

fn nf_pow_nat(a: &NormalForm, n: u32) -> Result<NormalForm> {
    let mut acc = NormalForm::one();
    let mut base = a.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = nf_mul(&acc, &base)?;
        }
        k >>= 1;
        if k > 0 {
            base = nf_mul(&base, &base)?;
        }
    }
    Ok(acc)
}

/// Prime factors with multiplicity; a large cofactor left after trial division is kept whole.
pub fn prime_factors(n: &Integer) -> Vec<Integer> {
    let mut out = Vec::new();
    let mut m = n.clone();
    let mut p = Integer::from(2);
    while m > 1 && p < 65536 {
        while m.is_divisible(&p) {
            m /= &p;
            out.push(p.clone());
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// The exponent multiset of a canonical power factor `core^(e₁·…·e_k)`.
fn power_parts(f: &Term) -> Option<(Term, Vec<Term>)> {
    match f.kind() {
        Kind::Pow(core, e) if f.nat_value().is_none() => match normalize(e).ok()?.summands.as_slice() {
            [s] if s.coeff == 1 && !s.factors.is_empty() => Some((core.clone(), s.factors.clone())),
            _ => None,
        },
        _ => None,
    }
}

/// `b^(Π p)` with nested powers flattened into one exponent multiset.
fn raise(b: &Term, p: &[Term]) -> Term {
    let (core, exps) = match power_parts(b) {
        Some((core, e)) => (core, merge_desc(&e, p)),
        None => (b.clone(), p.to_vec()),
    };
    Term::pow(&core, &product(&exps).expect("nonempty exponent"))
}

fn intersect(a: &[Term], b: &[Term]) -> Vec<Term> {
    let mut rest = b.to_vec();
    let mut out = Vec::new();
    for f in a {
        if let Some(i) = rest.iter().position(|g| g == f) {
            rest.remove(i);
            out.push(f.clone());
        }
    }
    out
}

fn remove_all(a: &[Term], sub: &[Term]) -> Vec<Term> {
    let mut out = a.to_vec();
    for f in sub {
        if let Some(i) = out.iter().position(|g| g == f) {
            out.remove(i);
        }
    }
    out
}

/// The gcd of the coefficients and the common factors of all summands.
pub fn content(nf: &NormalForm) -> (Integer, Vec<Term>) {
    let mut g = Integer::new();
    let mut common = nf.summands[0].factors.clone();
    for s in &nf.summands {
        g.gcd_mut(&s.coeff);
        common = intersect(&common, &s.factors);
    }
    (g, common)
}

fn divide(nf: &NormalForm, g: &Integer, common: &[Term]) -> NormalForm {
    NormalForm {
        summands: nf
            .summands
            .iter()
            .map(|s| Summand { coeff: Integer::from(&s.coeff / g), factors: remove_all(&s.factors, common) })
            .collect(),
    }
}

/// Multiplicatively independent bases whose product is `a`.
fn base_factors(a: &NormalForm) -> Vec<Term> {
    let (g, common) = content(a);
    let mut out: Vec<Term> = prime_factors(&g).iter().map(nat_term).collect();
    out.extend(common.iter().cloned());
    if a.summands.len() > 1 {
        out.push(divide(a, &g, &common).to_term());
    }
    out
}

fn nf_pow(a: &NormalForm, b: &NormalForm) -> Result<NormalForm> {
    if a.is_one() {
        return Ok(NormalForm::one());
    }
    let mut n = Integer::new();
    let mut infinite = Vec::new();
    for s in &b.summands {
        if s.factors.is_empty() {
            n += &s.coeff;
        } else {
            infinite.push(s);
        }
    }
    let n = n
        .to_u32()
        .filter(|&k| k <= MAX_NAT_POWER)
        .ok_or_else(|| Error::Resource(format!("natural exponent {n} exceeds {MAX_NAT_POWER}")))?;
    let mut result = nf_pow_nat(a, n)?;
    if infinite.is_empty() {
        return Ok(result);
    }
    let bases = base_factors(a);
    let mut factors = Vec::new();
    for s in infinite {
        let reps = s.coeff.to_usize().filter(|&c| c * bases.len() <= MAX_FACTORS);
        let reps = reps.ok_or_else(|| Error::Resource(format!("exponent coefficient {} too large", s.coeff)))?;
        for base in &bases {
            let f = raise(base, &s.factors);
            factors.extend(std::iter::repeat_n(f, reps));
        }
    }
    if factors.len() > MAX_FACTORS {
        return Err(Error::Resource(format!("product exceeds {MAX_FACTORS} factors")));
    }
    sort_desc(&mut factors);
    let p = NormalForm { summands: vec![Summand { coeff: Integer::from(1), factors }] };
    result = nf_mul(&result, &p)?;
    Ok(result)
}

fn cache() -> &'static Mutex<HashMap<Term, NormalForm>> {
    static CACHE: OnceLock<Mutex<HashMap<Term, NormalForm>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Rewrite into a sorted sum of products of components.
pub fn normalize(t: &Term) -> Result<NormalForm> {
    if let Some(nf) = cache().lock().expect("normal form cache").get(t) {
        return Ok(nf.clone());
    }
    let nf = if let Some(n) = t.nat_value() {
        NormalForm { summands: vec![Summand::constant(Integer::from(n))] }
    } else {
        match t.kind() {
            Kind::One => NormalForm::one(),
            Kind::X => NormalForm { summands: vec![Summand { coeff: Integer::from(1), factors: vec![t.clone()] }] },
            Kind::Add(a, b) => nf_add(&normalize(a)?, &normalize(b)?)?,
            Kind::Mul(a, b) => nf_mul(&normalize(a)?, &normalize(b)?)?,
            Kind::Pow(a, b) => nf_pow(&normalize(a)?, &normalize(b)?)?,
        }
    };
    cache().lock().expect("normal form cache").insert(t.clone(), nf.clone());
    Ok(nf)
}

/// Not a sum of two smaller terms: one summand with coefficient 1.
pub fn is_additively_irreducible(t: &Term) -> Result<bool> {
    let nf = normalize(t)?;
    Ok(matches!(nf.summands.as_slice(), [s] if s.coeff == 1))
}

/// Not a product of two smaller terms, judged on the normal form.
///
/// For sums only a common factor or a coefficient gcd is detected.
pub fn is_multiplicatively_irreducible(t: &Term) -> Result<bool> {
    let nf = normalize(t)?;
    Ok(match nf.summands.as_slice() {
        [s] => s.factors.len() + prime_factors(&s.coeff).len() <= 1,
        _ => {
            let (g, common) = content(&nf);
            g == 1 && common.is_empty()
        }
    })
}

pub fn is_component(t: &Term) -> Result<bool> {
    Ok(is_additively_irreducible(t)? && is_multiplicatively_irreducible(t)?)
}
