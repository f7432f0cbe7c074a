//! Deduplicated corpus of Skolem terms by node count.

use rug::Rational;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::term::Term;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::oracle::eval_ln;
use crate::transseries::expand;

/// Largest node count `enumerate_terms` accepts.
pub const MAX_ENUMERATION_SIZE: usize = 11;
/// Expansion depth of the deduplication key.
pub const DEDUP_DEPTH: usize = 4;
const DEDUP_PRECISION: u32 = 256;

fn dedup_points() -> [Rational; 3] {
    [Rational::from(2), Rational::from((9, 4)), Rational::from((5, 2))]
}

struct Rep {
    term: Term,
    ln: Option<Vec<Interval>>,
}

#[derive(Default)]
struct Corpus {
    /// Representatives with exactly `n` nodes at index `n`.
    by_size: Vec<Vec<Term>>,
    buckets: HashMap<String, Vec<Rep>>,
}

fn ln_values(t: &Term) -> Option<Vec<Interval>> {
    dedup_points().iter().map(|x| eval_ln(t, x, DEDUP_PRECISION).ok().map(|v| v.enclosure)).collect()
}

fn agree(a: &[Interval], b: &[Interval]) -> bool {
    a.iter().zip(b).all(|(p, q)| p.separate(q).is_none())
}

impl Corpus {
    /// Adds `t` unless an equal function is already present.
    fn insert(&mut self, t: Term) -> bool {
        let key = match expand(&t, DEDUP_DEPTH) {
            Ok(s) => s.to_string(),
            Err(_) => format!("#{t}"),
        };
        let bucket = self.buckets.entry(key).or_default();
        if bucket.iter().any(|r| r.term == t) {
            return false;
        }
        if !bucket.is_empty() {
            let Some(mine) = ln_values(&t) else {
                bucket.push(Rep { term: t, ln: None });
                return true;
            };
            for r in bucket.iter_mut() {
                if r.ln.is_none() {
                    r.ln = ln_values(&r.term);
                }
                if r.ln.as_deref().is_some_and(|theirs| agree(&mine, theirs)) {
                    return false;
                }
            }
            bucket.push(Rep { term: t, ln: Some(mine) });
            return true;
        }
        bucket.push(Rep { term: t, ln: None });
        true
    }

    fn grow(&mut self, n: usize) {
        while self.by_size.len() <= n {
            let size = self.by_size.len();
            let mut fresh = Vec::new();
            if size == 1 {
                for t in [Term::one(), Term::x()] {
                    if self.insert(t.clone()) {
                        fresh.push(t);
                    }
                }
            } else if size >= 3 {
                for a in 1..size - 1 {
                    let b = size - 1 - a;
                    for u in self.by_size[a].clone() {
                        for v in self.by_size[b].clone() {
                            for t in [Term::add(&u, &v), Term::mul(&u, &v), Term::pow(&u, &v)] {
                                if self.insert(t.clone()) {
                                    fresh.push(t);
                                }
                            }
                        }
                    }
                }
            }
            self.by_size.push(fresh);
        }
    }
}

fn corpus() -> &'static Mutex<Corpus> {
    static CORPUS: OnceLock<Mutex<Corpus>> = OnceLock::new();
    CORPUS.get_or_init(|| Mutex::new(Corpus::default()))
}

/// One representative per distinct function among terms of at most `max_size` nodes.
///
/// Two terms are merged when their expansions to depth 4 print identically and their
/// logarithms agree at `x ∈ {2, 9/4, 5/2}`; equality beyond that is not decided.
pub fn enumerate_terms(max_size: usize) -> Result<Vec<Term>> {
    if max_size > MAX_ENUMERATION_SIZE {
        return Err(Error::Resource(format!("enumeration size {max_size} exceeds {MAX_ENUMERATION_SIZE}")));
    }
    let mut c = corpus().lock().expect("corpus lock");
    c.grow(max_size);
    Ok(c.by_size[..=max_size].iter().flatten().cloned().collect())
}
