//! Independent ordinal models and the lemma checks built on them.

use rug::Integer;
use skolem_core::ordinal::{self as ord, Ordinal};
use std::cmp::Ordering;
use std::collections::BTreeMap;

pub fn o(n: u32) -> Ordinal {
    Ordinal::nat(n)
}

pub fn w() -> Ordinal {
    Ordinal::omega()
}

/// `Σ ω^e·c` from pairs listed in any order; zero coefficients dropped.
pub fn cnf(pairs: &[(Ordinal, u32)]) -> Ordinal {
    let mut m: BTreeMap<Ordinal, Integer> = BTreeMap::new();
    for (e, c) in pairs {
        *m.entry(e.clone()).or_default() += *c;
    }
    Ordinal::from_terms(m.into_iter().rev().filter(|(_, c)| *c != 0).collect()).unwrap()
}

/// Exponents used to build the sample pool.
pub fn pool_exponents() -> Vec<Ordinal> {
    let w = w();
    vec![
        o(0),
        o(1),
        o(2),
        o(3),
        w.clone(),
        cnf(&[(o(1), 1), (o(0), 1)]),
        cnf(&[(o(1), 2)]),
        cnf(&[(o(2), 1)]),
    ]
}

/// Zero plus every CNF with at most two terms over the pool exponents and coefficients 1 to 3.
pub fn pool() -> Vec<Ordinal> {
    let es = pool_exponents();
    let mut out = vec![Ordinal::zero()];
    for (i, e) in es.iter().enumerate() {
        for c in 1..=3 {
            out.push(cnf(&[(e.clone(), c)]));
            for f in &es[..i] {
                for d in 1..=3 {
                    out.push(cnf(&[(f.clone(), d), (e.clone(), c)]));
                }
            }
        }
    }
    out
}

/// Ordinals below `ω^ω` as coefficient vectors indexed by the exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vector(pub Vec<u64>);

impl Vector {
    pub fn from_ordinal(a: &Ordinal) -> Option<Vector> {
        let mut v = Vec::new();
        for (e, c) in a.terms() {
            let k = e.as_nat()?.to_usize()?;
            if v.len() <= k {
                v.resize(k + 1, 0);
            }
            v[k] = c.to_u64()?;
        }
        Some(Vector(v).trim())
    }

    fn trim(mut self) -> Vector {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }

    fn lead(&self) -> Option<usize> {
        self.0.iter().rposition(|&c| c != 0)
    }

    pub fn to_ordinal(&self) -> Ordinal {
        let pairs: Vec<(Ordinal, u32)> =
            self.0.iter().enumerate().map(|(k, &c)| (o(k as u32), c as u32)).collect();
        cnf(&pairs)
    }

    pub fn cmp(&self, b: &Vector) -> Ordering {
        let n = self.0.len().max(b.0.len());
        for k in (0..n).rev() {
            let (x, y) = (self.0.get(k).copied().unwrap_or(0), b.0.get(k).copied().unwrap_or(0));
            if x != y {
                return x.cmp(&y);
            }
        }
        Ordering::Equal
    }

    pub fn add(&self, b: &Vector) -> Vector {
        let Some(lb) = b.lead() else { return self.clone() };
        let mut v = vec![0; self.0.len().max(b.0.len())];
        for (k, &c) in self.0.iter().enumerate() {
            if k > lb {
                v[k] = c;
            }
        }
        v[lb] = self.0.get(lb).copied().unwrap_or(0) + b.0[lb];
        v[..lb].copy_from_slice(&b.0[..lb]);
        Vector(v).trim()
    }

    pub fn nat_add(&self, b: &Vector) -> Vector {
        let n = self.0.len().max(b.0.len());
        Vector((0..n).map(|k| self.0.get(k).unwrap_or(&0) + b.0.get(k).unwrap_or(&0)).collect()).trim()
    }

    pub fn nat_mul(&self, b: &Vector) -> Vector {
        if self.lead().is_none() || b.lead().is_none() {
            return Vector(Vec::new());
        }
        let mut v = vec![0; self.0.len() + b.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            for (j, &y) in b.0.iter().enumerate() {
                v[i + j] += x * y;
            }
        }
        Vector(v).trim()
    }

    /// Ordinal product by distributing over the right factor's terms.
    pub fn mul(&self, b: &Vector) -> Vector {
        let Some(la) = self.lead() else { return Vector(Vec::new()) };
        let mut acc = Vector(Vec::new());
        for k in (0..b.0.len()).rev() {
            let c = b.0[k];
            if c == 0 {
                continue;
            }
            let piece = if k == 0 {
                let mut v = self.0.clone();
                v[la] *= c;
                Vector(v)
            } else {
                let mut v = vec![0; la + k + 1];
                v[la + k] = c;
                Vector(v)
            };
            acc = acc.add(&piece);
        }
        acc
    }
}

/// Ordinals below `ω^(ω²)` as polynomials: `ω^(ω·a+b)` is `X^a·Y^b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub BTreeMap<(u64, u64), u64>);

impl Poly {
    pub fn from_ordinal(a: &Ordinal) -> Option<Poly> {
        let mut m = BTreeMap::new();
        for (e, c) in a.terms() {
            let mut key = (0u64, 0u64);
            for (f, d) in e.terms() {
                match f.as_nat()?.to_u32()? {
                    0 => key.1 = d.to_u64()?,
                    1 => key.0 = d.to_u64()?,
                    _ => return None,
                }
            }
            m.insert(key, c.to_u64()?);
        }
        Some(Poly(m))
    }

    pub fn cmp(&self, b: &Poly) -> Ordering {
        let mut x = self.0.iter().rev();
        let mut y = b.0.iter().rev();
        loop {
            match (x.next(), y.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((k, c)), Some((l, d))) => match k.cmp(l).then(c.cmp(d)) {
                    Ordering::Equal => continue,
                    other => return other,
                },
            }
        }
    }

    pub fn nat_add(&self, b: &Poly) -> Poly {
        let mut m = self.0.clone();
        for (k, c) in &b.0 {
            *m.entry(*k).or_default() += c;
        }
        Poly(m)
    }

    pub fn nat_mul(&self, b: &Poly) -> Poly {
        let mut m = BTreeMap::new();
        for ((a1, b1), c) in &self.0 {
            for ((a2, b2), d) in &b.0 {
                *m.entry((a1 + a2, b1 + b2)).or_default() += c * d;
            }
        }
        Poly(m)
    }
}

/// Natural sum straight from the CNF terms.
pub fn nat_sum(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let pairs: Vec<(Ordinal, Integer)> = a.terms().iter().chain(b.terms()).cloned().collect();
    let mut m: BTreeMap<Ordinal, Integer> = BTreeMap::new();
    for (e, c) in pairs {
        *m.entry(e).or_default() += c;
    }
    Ordinal::from_terms(m.into_iter().rev().collect()).unwrap()
}

/// Natural product straight from the CNF terms.
pub fn nat_prod(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let mut m: BTreeMap<Ordinal, Integer> = BTreeMap::new();
    for (e, c) in a.terms() {
        for (f, d) in b.terms() {
            *m.entry(nat_sum(e, f)).or_default() += Integer::from(c * d);
        }
    }
    Ordinal::from_terms(m.into_iter().rev().collect()).unwrap()
}

fn succ(a: &Ordinal) -> Ordinal {
    nat_sum(a, &o(1))
}

/// `sup_n (p ⊕ a·n)` for `a > 0`: the terms of `p` above `a`'s leading exponent, then `ω^(lead+1)`.
fn sup_nat_sum(p: &Ordinal, a: &Ordinal) -> Ordinal {
    let lead = a.leading_exponent().expect("nonzero").clone();
    let mut terms: Vec<(Ordinal, Integer)> = p.terms().iter().filter(|(e, _)| *e > lead).cloned().collect();
    let top = succ(&lead);
    match terms.last_mut() {
        Some((e, c)) if *e == top => *c += 1,
        _ => terms.push((top, Integer::from(1))),
    }
    Ordinal::from_terms(terms).unwrap()
}

/// `⊕_{i<ω·k+n} a` by transfinite recursion.
pub fn iterated_sum_by_recursion(a: &Ordinal, k: u32, n: u32) -> Ordinal {
    let mut r = Ordinal::zero();
    for _ in 0..k {
        if !a.is_zero() {
            r = sup_nat_sum(&r, a);
        }
    }
    for _ in 0..n {
        r = nat_sum(&r, a);
    }
    r
}

/// `⊙_{i<ω·k+n} a` by transfinite recursion.
pub fn iterated_product_by_recursion(a: &Ordinal, k: u32, n: u32) -> Ordinal {
    let mut r = o(1);
    for _ in 0..k {
        if *a <= o(1) {
            r = nat_prod(&r, a);
        } else {
            let p0 = r.leading_exponent().expect("nonzero").clone();
            let a0 = a.leading_exponent().expect("nonzero").clone();
            let top = if a0.is_zero() { succ(&p0) } else { sup_nat_sum(&p0, &a0) };
            r = Ordinal::omega_pow(top);
        }
    }
    for _ in 0..n {
        r = nat_prod(&r, a);
    }
    r
}

pub fn omega_k_plus_n(k: u32, n: u32) -> Ordinal {
    cnf(&[(o(1), k), (o(0), n)])
}

/// Violation counts of the ordinal lemma suite, by name.
pub fn lemma_suite() -> Vec<(&'static str, usize)> {
    let pool = pool();
    let two = o(2);
    let mut natural_sum = 0;
    let mut bound = 0;
    for a in &pool {
        for b in &pool {
            if a >= b && ord::hsum(a, b) > ord::add(a, &ord::mul(b, &two)) {
                natural_sum += 1;
            }
            let s = ord::hsum_iter(a, b);
            if !(ord::mul(a, b) <= s && s <= ord::mul(&ord::mul(a, &two), b)) {
                bound += 1;
            }
        }
    }
    let mut iterated = 0;
    for a in &pool {
        for k in 0..=3 {
            for n in 0..=3 {
                let b = omega_k_plus_n(k, n);
                let closed = ord::hsum_iter(a, &b);
                if closed != iterated_sum_by_recursion(a, k, n) {
                    iterated += 1;
                }
                if n == 0 && k > 0 && closed != ord::mul(a, &b) {
                    iterated += 1;
                }
                if ord::cexp(a, &b) != iterated_product_by_recursion(a, k, n) {
                    iterated += 1;
                }
            }
        }
    }
    let mut powers = 0;
    for n in 0..=5u32 {
        for (a, b, c) in gamma_sample() {
            let g = cnf(&[(o(2), a), (o(1), b), (o(0), c)]);
            let expected = powers_of_n_oracle(n, a, b, c);
            if ord::cexp(&o(n), &g) != expected || ord::pow(&o(n), &g) != expected {
                powers += 1;
            }
        }
    }
    let mut closure = 0;
    for a in &pool {
        for lambda in limit_sample() {
            let p = ord::pow(a, &lambda);
            if ord::cexp(a, &lambda) != p || !additively_closed_by_sums(&p, &pool) {
                closure += 1;
            }
        }
    }
    vec![
        ("natural sum vs ordinal sum", natural_sum),
        ("bounds on iterated natural sums", bound),
        ("iterated sums and products by recursion", iterated),
        ("natural powers of n", powers),
        ("additive closure of limit powers", closure),
    ]
}

/// 200 triples `(a, b, c)` naming `γ = ω²·a + ω·b + c < ω³`.
pub fn gamma_sample() -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for a in 0..5 {
        for b in 0..8 {
            for c in 0..5 {
                out.push((a, b, c));
            }
        }
    }
    out
}

/// `n^(ω²·a + ω·b + c)` as `ω^(ω·a + b)·n^c`, with the degenerate bases handled directly.
pub fn powers_of_n_oracle(n: u32, a: u32, b: u32, c: u32) -> Ordinal {
    let zero_exponent = a == 0 && b == 0 && c == 0;
    match n {
        0 => o(if zero_exponent { 1 } else { 0 }),
        1 => o(1),
        _ => {
            let e = cnf(&[(o(1), a), (o(0), b)]);
            cnf(&[(e, n.pow(c))])
        }
    }
}

pub fn limit_sample() -> Vec<Ordinal> {
    let w = w();
    vec![
        w.clone(),
        omega_k_plus_n(2, 0),
        omega_k_plus_n(3, 0),
        cnf(&[(o(2), 1)]),
        cnf(&[(o(2), 1), (o(1), 1)]),
        cnf(&[(w, 1)]),
    ]
}

/// `p > 0` and every sum of two pool members below `p` stays below `p`; plus the CNF shape.
fn additively_closed_by_sums(p: &Ordinal, pool: &[Ordinal]) -> bool {
    if p.is_zero() || *p == o(1) {
        return p.is_zero() || ord::is_additively_closed(p);
    }
    let below: Vec<&Ordinal> = pool.iter().filter(|x| *x < p).step_by(8).collect();
    let sums_ok = below.iter().all(|x| below.iter().all(|y| ord::add(x, y) < *p));
    sums_ok && matches!(p.terms(), [(_, c)] if *c == 1) && ord::is_additively_closed(p)
}
