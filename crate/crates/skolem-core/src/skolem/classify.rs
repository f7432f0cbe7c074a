//! Structural cases, regular functions below `2^(x^x)` and fragments.

use rug::{Integer, Rational};
use std::fmt;

use super::normal::{content, nat_term, normalize, NormalForm, Summand};
use super::term::{Kind, Term};
use crate::asymptotics::{compare, Verdict};
use crate::error::{Error, Result};
use crate::oracle;
use crate::ordinal::{omega_tower, Ordinal};

/// Search bound for `fragment_index` and `stratify`.
pub const MAX_SEARCH: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    Product,
    Power,
    SumWithComparableComponent,
    Atom,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Product => "Case1_Product",
            Case::Power => "Case2_Power",
            Case::SumWithComparableComponent => "Case3_SumWithComparableComponent",
            Case::Atom => "Case4_Atom",
        })
    }
}

/// `h = f·g`, `h = f^g` or `h = f + g`, with the witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub case: Case,
    pub f: Option<Term>,
    pub g: Option<Term>,
    /// False when the dominant summand is itself a product.
    pub f_is_component: bool,
}

fn single(coeff: Integer, factors: Vec<Term>) -> NormalForm {
    NormalForm { summands: vec![Summand { coeff, factors }] }
}

fn product_term(fs: &[Term]) -> Term {
    single(Integer::from(1), fs.to_vec()).to_term()
}

pub fn classify(h: &Term) -> Result<Classification> {
    let nf = normalize(h)?;
    let atom = Classification { case: Case::Atom, f: None, g: None, f_is_component: true };
    if nf.is_one() || (nf.summands.len() == 1 && nf.summands[0].coeff == 1 && nf.summands[0].factors == [Term::x()]) {
        return Ok(atom);
    }
    if let Kind::Mul(a, b) = h.kind() {
        if normalize(a)?.as_constant().is_none() && normalize(b)?.as_constant().is_none() {
            return Ok(Classification {
                case: Case::Product,
                f: Some(a.clone()),
                g: Some(b.clone()),
                f_is_component: super::normal::is_component(a)?,
            });
        }
    }
    let sum = |f: Term, rest: NormalForm| Classification {
        case: Case::SumWithComparableComponent,
        f_is_component: super::normal::is_component(&f).unwrap_or(false),
        f: Some(f),
        g: Some(rest.to_term()),
    };
    if let [s] = nf.summands.as_slice() {
        return Ok(match s.factors.len() {
            0 => sum(Term::one(), single(s.coeff.clone() - 1u32, Vec::new())),
            1 if s.coeff == 1 => {
                let f = &s.factors[0];
                match f.kind() {
                    Kind::Pow(core, e) => {
                        let exps = match normalize(e)?.summands.as_slice() {
                            [t] if t.coeff == 1 && !t.factors.is_empty() => t.factors.clone(),
                            _ => vec![e.clone()],
                        };
                        let (g, rest) = exps.split_last().expect("nonempty exponent");
                        let f = if rest.is_empty() { core.clone() } else { Term::pow(core, &product_term(rest)) };
                        Classification { case: Case::Power, f: Some(f), g: Some(g.clone()), f_is_component: true }
                    }
                    _ => return Err(Error::Fault(format!("unexpected component {f}"))),
                }
            }
            1 => sum(s.factors[0].clone(), single(s.coeff.clone() - 1u32, s.factors.clone())),
            _ => Classification {
                case: Case::Product,
                f: Some(s.factors[0].clone()),
                g: Some(single(s.coeff.clone(), s.factors[1..].to_vec()).to_term()),
                f_is_component: true,
            },
        });
    }
    let (_, common) = content(&nf);
    if !common.is_empty() {
        let mut rest = nf.clone();
        for s in &mut rest.summands {
            for c in &common {
                let i = s.factors.iter().position(|f| f == c).expect("common factor");
                s.factors.remove(i);
            }
        }
        let f = rest.to_term();
        return Ok(Classification {
            case: Case::Product,
            f_is_component: super::normal::is_component(&f)?,
            f: Some(f),
            g: Some(product_term(&common)),
        });
    }
    let lead = &nf.summands[0];
    let mut rest = nf.clone();
    if lead.coeff == 1 {
        rest.summands.remove(0);
    } else {
        rest.summands[0].coeff -= 1u32;
    }
    let f = product_term(&lead.factors);
    Ok(sum(f, rest))
}

pub fn two_pow_n_x(n: u64) -> Result<Term> {
    Ok(Term::pow(&Term::lit(2)?, &Term::pow(&nat_term(&Integer::from(n)), &Term::x())))
}

pub fn two_pow_x_x() -> Term {
    let x = Term::x();
    Term::pow(&Term::lit(2).expect("literal"), &Term::pow(&x, &x))
}

/// Every difference `ln f − ln g` at the default points contains 0.
pub fn numerically_equal(f: &Term, g: &Term) -> Result<bool> {
    let xs: Vec<Rational> = oracle::DEFAULT_POINTS.iter().map(|&x| Rational::from(x)).collect();
    let c = oracle::numeric_compare_detail(f, g, &xs, oracle::DEFAULT_PRECISION)?;
    Ok(c.differences.iter().all(|d| d.contains_zero()))
}

fn verdict(f: &Term, g: &Term) -> Result<Verdict> {
    match compare(f, g)?.verdict {
        Verdict::Undetermined(m) => Err(Error::Undetermined(m)),
        v => Ok(v),
    }
}

fn equal(f: &Term, g: &Term) -> Result<bool> {
    match verdict(f, g)? {
        Verdict::EqualToDepth(_) => numerically_equal(f, g),
        _ => Ok(false),
    }
}

fn require_below(f: &Term, bound: &Term) -> Result<()> {
    match verdict(f, bound)? {
        Verdict::Less => Ok(()),
        _ => Err(Error::Precondition(format!("{f} is not below {bound}"))),
    }
}

/// Least `n ≥ 1` with `f < 2^(n^x)`.
pub fn fragment_index(f: &Term) -> Result<u64> {
    require_below(f, &two_pow_x_x())?;
    for n in 1..=MAX_SEARCH {
        if verdict(f, &two_pow_n_x(n)?)? == Verdict::Less {
            return Ok(n);
        }
    }
    Err(Error::Resource(format!("fragment index of {f} exceeds {MAX_SEARCH}")))
}

/// Whether `f` is one of `2`, `2^(n^x)` with `n ≥ 2`, or `2^(x^x)`.
pub fn is_regular_below_xx(f: &Term) -> Result<bool> {
    let top = two_pow_x_x();
    match verdict(f, &top)? {
        Verdict::Greater => return Err(Error::Precondition(format!("{f} exceeds 2^(x^x)"))),
        Verdict::EqualToDepth(_) => {
            return if numerically_equal(f, &top)? {
                Ok(true)
            } else {
                Err(Error::Undetermined(format!("{f} agrees with 2^(x^x) to depth only")))
            }
        }
        _ => {}
    }
    if let Some(n) = normalize(f)?.as_constant() {
        return Ok(*n == 2);
    }
    let n = fragment_index(f)?;
    if n < 3 {
        return Ok(false);
    }
    equal(f, &two_pow_n_x(n - 1)?)
}

fn stratum_bound(n: u64, k: u64) -> Result<Term> {
    let x = Term::x();
    let nx = Term::pow(&nat_term(&Integer::from(n)), &x);
    let e = match k {
        0 => nx,
        1 => Term::mul(&nx, &x),
        _ => Term::mul(&nx, &Term::pow(&x, &Term::lit(k)?)),
    };
    Ok(Term::pow(&Term::lit(2)?, &e))
}

/// Least `k` with `f < 2^(n^x·x^k)`, for `f < 2^((n+1)^x)`.
pub fn stratify(f: &Term, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Precondition("stratum index must be positive".into()));
    }
    require_below(f, &two_pow_n_x(n + 1)?)?;
    for k in 0..=MAX_SEARCH {
        if verdict(f, &stratum_bound(n, k)?)? == Verdict::Less {
            return Ok(k);
        }
    }
    Err(Error::Resource(format!("stratum of {f} exceeds x^{MAX_SEARCH}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundSpec {
    TwoPow2x,
    /// The bound for `2^(m^x)`, `m ≥ 2`.
    TwoPowNx(u64),
    TwoPowXx,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderBound {
    Ordinal(Ordinal),
    Epsilon0,
}

impl fmt::Display for OrderBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderBound::Ordinal(o) => write!(f, "{o}"),
            OrderBound::Epsilon0 => f.write_str("epsilon_0"),
        }
    }
}

/// Upper bound on the order type of the Skolem functions below the given function.
pub fn order_type_bound(spec: BoundSpec) -> Result<OrderBound> {
    Ok(match spec {
        BoundSpec::TwoPow2x => OrderBound::Ordinal(omega_tower(3)?),
        BoundSpec::TwoPowNx(m) if m >= 2 => {
            let h = usize::try_from(m + 1).map_err(|_| Error::Resource(format!("tower height {m}")))?;
            OrderBound::Ordinal(omega_tower(h)?)
        }
        BoundSpec::TwoPowNx(m) => return Err(Error::Precondition(format!("2^({m}^x) needs a base of at least 2"))),
        BoundSpec::TwoPowXx => OrderBound::Epsilon0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skolem::parse;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn cases() {
        assert_eq!(classify(&t("x")).unwrap().case, Case::Atom);
        let c = classify(&t("x*x")).unwrap();
        assert_eq!((c.case, c.f, c.g), (Case::Product, Some(t("x")), Some(t("x"))));
        let c = classify(&t("x^x + x")).unwrap();
        assert_eq!((c.case, c.f, c.f_is_component), (Case::SumWithComparableComponent, Some(t("x^x")), true));
        let c = classify(&t("2^(x*x)")).unwrap();
        assert_eq!((c.case, c.f, c.g), (Case::Power, Some(t("2^x")), Some(t("x"))));
        assert_eq!(classify(&t("x*x+x")).unwrap().case, Case::Product);
        assert!(!classify(&t("x*x+1")).unwrap().f_is_component);
    }

    #[test]
    fn fragments_and_regularity() {
        assert_eq!(fragment_index(&t("x^x")).unwrap(), 2);
        assert_eq!(fragment_index(&t("2^(3^x)*2")).unwrap(), 4);
        assert!(fragment_index(&t("2^(x^x)")).is_err());
        assert!(is_regular_below_xx(&t("2^(2^x)")).unwrap());
        assert!(is_regular_below_xx(&t("2")).unwrap());
        assert!(is_regular_below_xx(&t("2^(x^x)")).unwrap());
        assert!(is_regular_below_xx(&t("4^(2^x)")).is_ok_and(|r| !r));
        assert!(!is_regular_below_xx(&t("2^x")).unwrap());
        assert!(!is_regular_below_xx(&t("x")).unwrap());
        assert_eq!(stratify(&t("2^(x*x)*2^x"), 1).unwrap(), 3);
        assert_eq!(stratify(&t("x"), 1).unwrap(), 1);
        assert!(matches!(stratify(&t("2^(2^x)"), 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn bounds() {
        assert_eq!(order_type_bound(BoundSpec::TwoPow2x).unwrap(), OrderBound::Ordinal(omega_tower(3).unwrap()));
        assert_eq!(order_type_bound(BoundSpec::TwoPowNx(3)).unwrap(), OrderBound::Ordinal(omega_tower(4).unwrap()));
        assert_eq!(order_type_bound(BoundSpec::TwoPowXx).unwrap().to_string(), "epsilon_0");
    }
}
