//! Asymptotic order, dominance and limit ratios of Skolem terms.

use rug::Rational;
use std::cmp::Ordering;

use crate::constants::{cmp_const, precision_cap, ConstOrdering, Constant, EMembership};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::oracle::{self, NumericVerdict};
use crate::skolem::{enumerate_terms, Term};
use crate::transseries::{cmp_key, cmp_series, expand, Key, Series, DEFAULT_DEPTH};

/// Escalation rounds of the numeric tripwire before a contradiction is fatal.
const ESCALATION_ROUNDS: usize = 8;

#[derive(Clone, Debug)]
pub struct Config {
    pub depth: usize,
    pub oracle_points: Vec<Rational>,
    pub oracle_precision: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            depth: DEFAULT_DEPTH,
            oracle_points: oracle::DEFAULT_POINTS.iter().map(|&x| Rational::from(x)).collect(),
            oracle_precision: oracle::DEFAULT_PRECISION,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Less,
    Greater,
    EqualToDepth(usize),
    Undetermined(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Less => "Less",
            Verdict::Greater => "Greater",
            Verdict::EqualToDepth(_) => "EqualToDepth",
            Verdict::Undetermined(_) => "Undetermined",
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Verdict::Less | Verdict::Greater)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleStatus {
    Agree,
    /// The oracle could not confirm the verdict; the symbolic verdict stands.
    Inconclusive(String),
    /// Agreement was reached only after moving the sample points outward.
    Escalated(usize),
}

#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub x_values: Vec<Rational>,
    /// Enclosures of `ln f(x) − ln g(x)`.
    pub residuals: Vec<Interval>,
    pub status: OracleStatus,
}

#[derive(Clone, Debug)]
pub struct CmpResult {
    pub verdict: Verdict,
    pub depth: usize,
    pub oracle_check: Option<OracleCheck>,
}

/// Sign of `f − g` from the two expansions alone.
pub fn symbolic_compare(f: &Term, g: &Term, depth: usize) -> Result<Verdict> {
    if f == g {
        return Ok(Verdict::EqualToDepth(depth));
    }
    let lift = |r: Result<Series>| -> Result<std::result::Result<Series, Verdict>> {
        match r {
            Ok(s) => Ok(Ok(s)),
            Err(Error::Undetermined(m)) => Ok(Err(Verdict::Undetermined(format!("precision cap: {m}")))),
            Err(Error::Depth(m)) => Ok(Err(Verdict::Undetermined(format!("depth cap: {m}")))),
            Err(e) => Err(e),
        }
    };
    let ef = match lift(expand(f, depth))? {
        Ok(s) => s,
        Err(v) => return Ok(v),
    };
    let eg = match lift(expand(g, depth))? {
        Ok(s) => s,
        Err(v) => return Ok(v),
    };
    Ok(match cmp_series(&ef, &eg) {
        Ok(Ordering::Less) => Verdict::Less,
        Ok(Ordering::Greater) => Verdict::Greater,
        Ok(Ordering::Equal) | Err(Error::Depth(_)) => Verdict::EqualToDepth(depth),
        Err(Error::Undetermined(m)) => Verdict::Undetermined(format!("precision cap: {m}")),
        Err(e) => return Err(e),
    })
}

fn opposite(v: &Verdict, n: NumericVerdict) -> bool {
    matches!((v, n), (Verdict::Less, NumericVerdict::Greater) | (Verdict::Greater, NumericVerdict::Less))
}

fn agrees(v: &Verdict, n: NumericVerdict) -> bool {
    matches!((v, n), (Verdict::Less, NumericVerdict::Less) | (Verdict::Greater, NumericVerdict::Greater))
}

fn tripwire(f: &Term, g: &Term, verdict: &Verdict, cfg: &Config) -> Result<OracleCheck> {
    let mut xs = cfg.oracle_points.clone();
    let first = oracle::numeric_compare_detail(f, g, &xs, cfg.oracle_precision);
    let residuals = first.as_ref().map(|c| c.differences.clone()).unwrap_or_default();
    let x_values = xs.clone();
    let status = match &first {
        Err(e) => OracleStatus::Inconclusive(e.to_string()),
        Ok(c) if agrees(verdict, c.verdict) => OracleStatus::Agree,
        Ok(c) if !opposite(verdict, c.verdict) => OracleStatus::Inconclusive(format!("oracle {:?}", c.verdict)),
        Ok(_) => {
            let mut outcome = None;
            for round in 1..=ESCALATION_ROUNDS {
                xs = xs.iter().map(|x| Rational::from(x * 4u32)).collect();
                match oracle::numeric_compare(f, g, &xs, cfg.oracle_precision) {
                    Ok(n) if opposite(verdict, n) => continue,
                    Ok(n) if agrees(verdict, n) => {
                        outcome = Some(OracleStatus::Escalated(round));
                        break;
                    }
                    Ok(n) => {
                        outcome = Some(OracleStatus::Inconclusive(format!("oracle {n:?} after {round} escalations")));
                        break;
                    }
                    Err(e) => {
                        outcome = Some(OracleStatus::Inconclusive(format!("{e} after {round} escalations")));
                        break;
                    }
                }
            }
            match outcome {
                Some(s) => s,
                None => {
                    return Err(Error::Fault(format!(
                        "symbolic verdict {} for {f} vs {g} contradicted numerically up to x = {}",
                        verdict.name(),
                        xs.last().expect("nonempty points")
                    )))
                }
            }
        }
    };
    Ok(OracleCheck { x_values, residuals, status })
}

/// Eventual order of `f` and `g`; strict verdicts are cross-checked numerically.
pub fn compare_with(f: &Term, g: &Term, cfg: &Config) -> Result<CmpResult> {
    let verdict = symbolic_compare(f, g, cfg.depth)?;
    let oracle_check = if verdict.is_strict() { Some(tripwire(f, g, &verdict, cfg)?) } else { None };
    Ok(CmpResult { verdict, depth: cfg.depth, oracle_check })
}

pub fn compare(f: &Term, g: &Term) -> Result<CmpResult> {
    compare_with(f, g, &Config::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    StrictlyDominated,
    SameArchimedeanClass,
    StrictlyDominates,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomRelation {
    pub rel: Rel,
    /// The `r` with `f ∼ r·g`, present exactly for the same class.
    pub ratio: Option<Constant>,
}

fn undetermined(e: Error) -> Error {
    match e {
        Error::Depth(m) => Error::Undetermined(format!("depth cap: {m}")),
        Error::Undetermined(m) => Error::Undetermined(format!("precision cap: {m}")),
        other => other,
    }
}

fn lead_of(t: &Term, depth: usize) -> Result<(Key, Constant)> {
    let s = expand(t, depth).map_err(undetermined)?;
    match s.lead() {
        Some(l) => Ok((l.key(), l.coeff.clone())),
        None => Err(Error::Undetermined(format!("depth cap: no term of {t} is known"))),
    }
}

pub fn dom_rel_with(f: &Term, g: &Term, depth: usize) -> Result<DomRelation> {
    let (kf, cf) = lead_of(f, depth)?;
    let (kg, cg) = lead_of(g, depth)?;
    if f == g {
        return Ok(DomRelation { rel: Rel::SameArchimedeanClass, ratio: Some(Constant::one()) });
    }
    Ok(match cmp_key(&kf, &kg).map_err(undetermined)? {
        Ordering::Less => DomRelation { rel: Rel::StrictlyDominated, ratio: None },
        Ordering::Greater => DomRelation { rel: Rel::StrictlyDominates, ratio: None },
        Ordering::Equal => DomRelation { rel: Rel::SameArchimedeanClass, ratio: Some(cf.div(&cg)?) },
    })
}

pub fn dom_rel(f: &Term, g: &Term) -> Result<DomRelation> {
    dom_rel_with(f, g, DEFAULT_DEPTH)
}

/// `f ∼ g`: same class with ratio exactly 1.
pub fn is_sim(f: &Term, g: &Term) -> Result<bool> {
    let d = dom_rel(f, g)?;
    match d.ratio {
        None => Ok(false),
        Some(r) => match cmp_const(&r, &Constant::one(), precision_cap()) {
            ConstOrdering::EqualExact => Ok(true),
            ConstOrdering::Less | ConstOrdering::Greater => Ok(false),
            ConstOrdering::Unknown => Err(Error::Undetermined(format!("precision cap: ratio {r} vs 1"))),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Limit {
    Zero,
    Finite(Constant),
    Infinite,
}

/// `lim f(x)/g(x)` as `x → ∞`.
pub fn limit_ratio(f: &Term, g: &Term) -> Result<Limit> {
    let d = dom_rel(f, g)?;
    Ok(match d.rel {
        Rel::StrictlyDominated => Limit::Zero,
        Rel::StrictlyDominates => Limit::Infinite,
        Rel::SameArchimedeanClass => Limit::Finite(d.ratio.expect("ratio of same class")),
    })
}

/// The exponent `c ≥ 1` of the relations `≍_c` and `∼_c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scale {
    Term(Term),
    Rational(Rational),
}

impl Scale {
    fn series(&self, depth: usize) -> Result<Series> {
        match self {
            Scale::Term(c) => expand(c, depth).map_err(undetermined),
            Scale::Rational(q) => {
                if *q < 1 {
                    return Err(Error::Precondition(format!("scale {q} is below 1")));
                }
                Ok(Series::constant(Constant::rational(q.clone())))
            }
        }
    }
}

/// Position of `c·(f − g)` relative to the leading monomial of `g`.
fn scaled_difference_vs(f: &Term, g: &Term, c: &Scale, depth: usize) -> Result<Option<Ordering>> {
    let cs = c.series(depth)?;
    if f == g {
        return Ok(None);
    }
    let ef = expand(f, depth).map_err(undetermined)?;
    let eg = expand(g, depth).map_err(undetermined)?;
    let d = ef.sub(&eg, depth).and_then(|d| d.mul(&cs, depth)).map_err(undetermined)?;
    let (kg, _) = lead_of(g, depth)?;
    match (d.lead(), d.error()) {
        (Some(t), _) => Ok(Some(cmp_key(&t.key(), &kg).map_err(undetermined)?)),
        (None, None) => Ok(None),
        (None, Some(e)) => match cmp_key(e, &kg).map_err(undetermined)? {
            Ordering::Less => Ok(None),
            _ => Err(Error::Undetermined(format!("depth cap: c(f-g) = O({e}) not separated from g"))),
        },
    }
}

/// `f ≍_c g`, i.e. `c(f − g) ⪯ g`.
pub fn asymp_c(f: &Term, g: &Term, c: &Scale) -> Result<bool> {
    Ok(scaled_difference_vs(f, g, c, DEFAULT_DEPTH)? != Some(Ordering::Greater))
}

/// `f ∼_c g`, i.e. `c(f − g) ≺ g`.
pub fn sim_c(f: &Term, g: &Term, c: &Scale) -> Result<bool> {
    Ok(matches!(scaled_difference_vs(f, g, c, DEFAULT_DEPTH)?, None | Some(Ordering::Less)))
}

/// The real `r` with `(h/Q)^c ∼ r`.
pub fn ratio_class_coefficient(h: &Term, q: &Term, c: &Scale) -> Result<Constant> {
    if !asymp_c(h, q, c)? {
        return Err(Error::Precondition(format!("{h} is not in the c-class of {q}")));
    }
    let ratio = || -> Result<Constant> {
        dom_rel(h, q)?.ratio.ok_or_else(|| Error::Fault("asymp_c without a common class".into()))
    };
    let exponent: Option<Rational> = match c {
        Scale::Rational(r) => Some(r.clone()),
        Scale::Term(t) => t.nat_value().map(Rational::from),
    };
    if let Some(n) = exponent {
        let r = ratio()?;
        if *n.denom() == 1 {
            if let Some(k) = n.numer().to_i64() {
                return r.powi(k);
            }
        }
        return Ok(r.log()?.mul_rational(&n).exp());
    }
    let depth = DEFAULT_DEPTH;
    let eh = expand(h, depth).map_err(undetermined)?;
    let eq = expand(q, depth).map_err(undetermined)?;
    let z = eh
        .mul(&eq.inverse(depth)?, depth)
        .and_then(|z| z.sub(&Series::one(), depth))
        .and_then(|z| z.mul(&c.series(depth)?, depth))
        .map_err(undetermined)?;
    let (up, s, _) = z.split().map_err(undetermined)?;
    if !up.is_zero() {
        return Err(Error::Undetermined(format!("depth cap: c(h/Q - 1) = {z} is not bounded")));
    }
    Ok(s.exp())
}

#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    pub ratio: Constant,
    pub enclosure: Interval,
    pub witness: Term,
    pub flag: EMembership,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Distinct ratios in increasing order.
    pub entries: Vec<SpectrumEntry>,
    /// Smallest distance between consecutive enclosures.
    pub min_gap: Option<Rational>,
    /// Consecutive index pairs whose order could not be decided.
    pub overlaps: Vec<(usize, usize)>,
    /// Terms whose relation to `Q` could not be decided, with the reason.
    pub undetermined: Vec<(Term, String)>,
}

pub const SPECTRUM_PRECISION: u32 = 128;

/// The ratios `r` with `h ∼ r·Q` over all terms `h` up to `size_bound` nodes.
pub fn ratio_spectrum(q: &Term, size_bound: usize) -> Result<Spectrum> {
    if size_bound == 0 {
        return Err(Error::Precondition("empty corpus".into()));
    }
    let mut found: Vec<SpectrumEntry> = Vec::new();
    let mut undetermined = Vec::new();
    for h in enumerate_terms(size_bound)? {
        let d = match dom_rel(&h, q) {
            Ok(d) => d,
            Err(Error::Undetermined(m)) => {
                undetermined.push((h, m));
                continue;
            }
            Err(e) => return Err(e),
        };
        let Some(r) = d.ratio else { continue };
        if found.iter().any(|e| e.ratio == r) {
            continue;
        }
        let enclosure = r.eval_interval(SPECTRUM_PRECISION)?;
        found.push(SpectrumEntry { flag: r.flag(), ratio: r, enclosure, witness: h });
    }
    found.sort_by(|a, b| a.enclosure.mid().partial_cmp(&b.enclosure.mid()).unwrap_or(Ordering::Equal));
    let mut overlaps = Vec::new();
    let mut min_gap: Option<Rational> = None;
    for i in 1..found.len() {
        let (a, b) = (&found[i - 1], &found[i]);
        if cmp_const(&a.ratio, &b.ratio, precision_cap()) != ConstOrdering::Less {
            overlaps.push((i - 1, i));
        }
        let gap = b.enclosure.lo() - a.enclosure.hi();
        if min_gap.as_ref().is_none_or(|g| gap < *g) {
            min_gap = Some(gap);
        }
    }
    Ok(Spectrum { entries: found, min_gap, overlaps, undetermined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skolem::parse;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn basic_comparisons() {
        assert_eq!(compare(&t("x^x"), &t("2^x")).unwrap().verdict, Verdict::Greater);
        assert_eq!(compare(&t("2^x"), &t("x^x")).unwrap().verdict, Verdict::Less);
        assert!(matches!(compare(&t("x+1"), &t("x+1")).unwrap().verdict, Verdict::EqualToDepth(_)));
        let r = compare(&t("2^(2^x)"), &t("x^(x^2)")).unwrap();
        assert_eq!(r.verdict, Verdict::Greater);
        assert_eq!(r.oracle_check.unwrap().status, OracleStatus::Agree);
    }

    #[test]
    fn ratios() {
        assert_eq!(limit_ratio(&t("x+1"), &t("x")).unwrap(), Limit::Finite(Constant::one()));
        assert_eq!(limit_ratio(&t("(x+1)^x"), &t("x^x")).unwrap(), Limit::Finite(Constant::e()));
        assert_eq!(limit_ratio(&t("2^x"), &t("x^x")).unwrap(), Limit::Zero);
        assert_eq!(dom_rel(&t("x"), &t("x*x")).unwrap().rel, Rel::StrictlyDominated);
        assert!(is_sim(&t("x+1"), &t("x")).unwrap());
        assert!(!is_sim(&t("(x+1)^x"), &t("x^x")).unwrap());
        assert!(!is_sim(&t("2*x"), &t("x")).unwrap());
    }

    #[test]
    fn scaled_relations() {
        let x = Scale::Term(t("x"));
        assert!(asymp_c(&t("x+1"), &t("x"), &x).unwrap());
        assert!(!sim_c(&t("x+1"), &t("x"), &x).unwrap());
        assert!(!asymp_c(&t("x+1"), &t("x"), &Scale::Term(t("x*x"))).unwrap());
        assert!(sim_c(&t("x^x"), &t("x^x"), &x).unwrap());
        let one = Scale::Rational(Rational::from(1));
        assert_eq!(ratio_class_coefficient(&t("x+1"), &t("x"), &one).unwrap(), Constant::one());
        assert_eq!(ratio_class_coefficient(&t("(x+1)^x"), &t("x^x"), &one).unwrap(), Constant::e());
        assert_eq!(ratio_class_coefficient(&t("x+1"), &t("x"), &x).unwrap(), Constant::e());
    }
}
