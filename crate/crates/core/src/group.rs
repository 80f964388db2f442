//! Ordered abelian groups with a countable neighborhood basis at zero.
//!
//! Everything downstream (set truncation, sumset nets, representation
//! search) is written against the [`OrderedGroup`] trait rather than a
//! concrete number type. An instance bundles the group operations, a
//! partial order, and the topology in computational form: a decreasing
//! chain of symmetric neighborhoods `u_0 ⊇ u_1 ⊇ ...` of zero, queried
//! through [`OrderedGroup::in_neighborhood`]. Metric instances expose the
//! basis as open balls of radius `2^{-k}` around zero.
//!
//! Three instances ship:
//!
//! * [`Rationals`]: exact arbitrary-precision `ℚ`, totally ordered,
//!   archimedean, metric.
//! * [`Integers`]: `ℤ`, totally ordered, archimedean, metric, and discrete
//!   (the open ball of radius `2^{-k}` meets `ℤ` in `{0}` alone).
//! * [`LexPairs`]: `ℤ × ℤ` under lexicographic order. The lex order does
//!   not interact with any translation-invariant metric, so the instance
//!   carries the discrete basis `u_k = {0}` and declines magnitude
//!   queries.

use std::fmt::Debug;
use std::hash::Hash;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Four-valued comparison result. All shipped instances are totally
/// ordered and never return [`GroupOrdering::Incomparable`], but the
/// variant keeps the door open for genuinely partial orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupOrdering {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl From<std::cmp::Ordering> for GroupOrdering {
    fn from(o: std::cmp::Ordering) -> Self {
        match o {
            std::cmp::Ordering::Less => GroupOrdering::Less,
            std::cmp::Ordering::Equal => GroupOrdering::Equal,
            std::cmp::Ordering::Greater => GroupOrdering::Greater,
        }
    }
}

/// Structural capabilities a group instance advertises. Operations that
/// need a metric or a smallest positive scale check these flags up front
/// and fail with [`GroupError::UnsupportedCapability`] instead of
/// producing nonsense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    /// Neighborhood basis is the family of open balls of radius `2^{-k}`
    /// for an exact translation-invariant metric.
    pub metric: bool,
    /// No positive element is infinitesimal relative to another: the
    /// pigeonhole bound behind representation search is available.
    pub archimedean: bool,
    /// `u_k = {0}` for every `k ≥ 1`; truncations capture whole sets and
    /// sumset nets are exact.
    pub discrete: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("operation {operation} is not supported on {group}")]
    UnsupportedCapability {
        group: &'static str,
        operation: &'static str,
    },
    #[error("expected an element in the strict positive cone")]
    NotPositive,
    #[error("expected a positive count")]
    ZeroCount,
    #[error("cannot parse {input:?} as an element of {group}: {reason}")]
    ParseElement {
        group: &'static str,
        input: String,
        reason: String,
    },
}

/// An ordered abelian group together with its neighborhood basis at zero.
///
/// `Elem`'s `Ord` implementation must refine the group order: whenever
/// `compare` returns `Less`/`Equal`/`Greater` the standard ordering agrees.
/// Engines rely on this to sort and deduplicate with the native ordering.
pub trait OrderedGroup: Clone + Send + Sync + 'static {
    type Elem: Clone + Eq + Ord + Hash + Debug + Send + Sync + 'static;

    fn name(&self) -> &'static str;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn compare(&self, a: &Self::Elem, b: &Self::Elem) -> GroupOrdering;
    fn capabilities(&self) -> Capabilities;

    /// Membership in the `k`-th basic neighborhood of zero.
    fn in_neighborhood(&self, k: u32, g: &Self::Elem) -> bool;

    /// Radius of the `k`-th basic ball, `2^{-k}`; `None` off metric
    /// instances.
    fn radius(&self, k: u32) -> Option<BigRational> {
        if self.capabilities().metric {
            Some(dyadic_radius(k))
        } else {
            None
        }
    }

    /// Exact distance from zero; `None` off metric instances.
    fn magnitude(&self, g: &Self::Elem) -> Option<BigRational>;

    /// Exact or floor midpoint of two elements, used by interval
    /// bisection. `None` where halving has no sensible meaning.
    fn midpoint(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;

    /// A positive lower bound forced on the largest part whenever `r`
    /// splits into `k` positive summands: any such split contains a part
    /// `≥ lower_witness(r, k)`. This is what keeps representation search
    /// over a finite candidate set.
    fn lower_witness(&self, r: &Self::Elem, k: u32) -> Result<Self::Elem, GroupError>;

    /// Element displaced from `e` by an exact rational amount, for
    /// instances whose elements embed in the rationals. Net fattening is
    /// a rational radius, so gap scans on dense instances need this to
    /// turn a net point into ball endpoints. `None` elsewhere.
    fn offset(&self, e: &Self::Elem, delta: &BigRational) -> Option<Self::Elem> {
        let _ = (e, delta);
        None
    }

    fn parse_elem(&self, s: &str) -> Result<Self::Elem, GroupError>;
    fn format_elem(&self, e: &Self::Elem) -> String;

    fn equals(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.compare(a, b) == GroupOrdering::Equal
    }

    fn lt(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.compare(a, b) == GroupOrdering::Less
    }

    fn le(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        matches!(
            self.compare(a, b),
            GroupOrdering::Less | GroupOrdering::Equal
        )
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.equals(a, &self.zero())
    }

    fn is_positive(&self, a: &Self::Elem) -> bool {
        self.lt(&self.zero(), a)
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    /// Left-to-right sum of a term sequence. Summation order is part of
    /// every downstream contract, so no reassociation happens anywhere.
    fn sum_left_to_right<'a, I>(&self, terms: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        terms
            .into_iter()
            .fold(self.zero(), |acc, t| self.add(&acc, t))
    }
}

/// `2^{-k}` as an exact rational.
pub fn dyadic_radius(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

fn parse_big_int(group: &'static str, s: &str) -> Result<BigInt, GroupError> {
    let body = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(GroupError::ParseElement {
            group,
            input: s.to_string(),
            reason: "expected an optionally signed decimal integer".to_string(),
        });
    }
    Ok(s.parse::<BigInt>().expect("validated digits"))
}

/// Strict `p/q` parser. Decimal points, exponents, and whitespace are all
/// rejected; only exact integer and fraction literals are accepted.
pub fn parse_rational(group: &'static str, s: &str) -> Result<BigRational, GroupError> {
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let n = parse_big_int(group, numer)?;
    let d = match denom {
        Some(d) => {
            let d = parse_big_int(group, d)?;
            if d.is_zero() {
                return Err(GroupError::ParseElement {
                    group,
                    input: s.to_string(),
                    reason: "zero denominator".to_string(),
                });
            }
            d
        }
        None => BigInt::one(),
    };
    Ok(BigRational::new(n, d))
}

/// Exact rationals under addition, with the absolute-value metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rationals;

pub fn make_rationals() -> Rationals {
    Rationals
}

impl OrderedGroup for Rationals {
    type Elem = BigRational;

    fn name(&self) -> &'static str {
        "rationals"
    }

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn compare(&self, a: &BigRational, b: &BigRational) -> GroupOrdering {
        a.cmp(b).into()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            metric: true,
            archimedean: true,
            discrete: false,
        }
    }

    fn in_neighborhood(&self, k: u32, g: &BigRational) -> bool {
        g.abs() < dyadic_radius(k)
    }

    fn magnitude(&self, g: &BigRational) -> Option<BigRational> {
        Some(g.abs())
    }

    fn midpoint(&self, a: &BigRational, b: &BigRational) -> Option<BigRational> {
        Some((a + b) / BigRational::from_integer(BigInt::from(2)))
    }

    fn lower_witness(&self, r: &BigRational, k: u32) -> Result<BigRational, GroupError> {
        if !r.is_positive() {
            return Err(GroupError::NotPositive);
        }
        if k == 0 {
            return Err(GroupError::ZeroCount);
        }
        Ok(r / BigRational::from_integer(BigInt::from(k)))
    }

    fn offset(&self, e: &BigRational, delta: &BigRational) -> Option<BigRational> {
        Some(e + delta)
    }

    fn parse_elem(&self, s: &str) -> Result<BigRational, GroupError> {
        parse_rational(self.name(), s)
    }

    fn format_elem(&self, e: &BigRational) -> String {
        e.to_string()
    }
}

/// Integers under addition. Metric and discrete at once: any nonzero
/// integer has magnitude at least 1, so every ball of radius `2^{-k}`
/// collapses to `{0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Integers;

pub fn make_integers() -> Integers {
    Integers
}

impl OrderedGroup for Integers {
    type Elem = BigInt;

    fn name(&self) -> &'static str {
        "integers"
    }

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }

    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }

    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }

    fn compare(&self, a: &BigInt, b: &BigInt) -> GroupOrdering {
        a.cmp(b).into()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            metric: true,
            archimedean: true,
            discrete: true,
        }
    }

    fn in_neighborhood(&self, _k: u32, g: &BigInt) -> bool {
        // |g| < 2^{-k} ≤ 1 forces g = 0.
        g.is_zero()
    }

    fn magnitude(&self, g: &BigInt) -> Option<BigRational> {
        Some(BigRational::from_integer(g.abs()))
    }

    fn midpoint(&self, a: &BigInt, b: &BigInt) -> Option<BigInt> {
        use num::Integer;
        Some((a + b).div_floor(&BigInt::from(2)))
    }

    fn lower_witness(&self, r: &BigInt, k: u32) -> Result<BigInt, GroupError> {
        if !r.is_positive() {
            return Err(GroupError::NotPositive);
        }
        if k == 0 {
            return Err(GroupError::ZeroCount);
        }
        // 1 is the least positive integer, so some part of any split into
        // positive integers is at least 1 trivially; the bound is tight
        // enough because truncations in a discrete group are whole sets.
        Ok(BigInt::one())
    }

    fn parse_elem(&self, s: &str) -> Result<BigInt, GroupError> {
        parse_big_int(self.name(), s)
    }

    fn format_elem(&self, e: &BigInt) -> String {
        e.to_string()
    }
}

/// An element of `ℤ × ℤ`. The derived ordering compares the first
/// coordinate and breaks ties on the second, which is exactly the
/// lexicographic group order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LexPair(pub BigInt, pub BigInt);

impl LexPair {
    pub fn of(a: i64, b: i64) -> Self {
        LexPair(BigInt::from(a), BigInt::from(b))
    }
}

/// `ℤ × ℤ` with lexicographic order and the discrete basis. There is no
/// compatible metric: the order embeds an infinitesimal copy of `ℤ`
/// ((0, b) sits below every (1, c)), so magnitude and midpoint queries
/// are declined and the basis is `u_k = {(0,0)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexPairs;

pub fn make_lex_pairs() -> LexPairs {
    LexPairs
}

impl OrderedGroup for LexPairs {
    type Elem = LexPair;

    fn name(&self) -> &'static str {
        "lex_pairs"
    }

    fn zero(&self) -> LexPair {
        LexPair(BigInt::zero(), BigInt::zero())
    }

    fn add(&self, a: &LexPair, b: &LexPair) -> LexPair {
        LexPair(&a.0 + &b.0, &a.1 + &b.1)
    }

    fn neg(&self, a: &LexPair) -> LexPair {
        LexPair(-&a.0, -&a.1)
    }

    fn compare(&self, a: &LexPair, b: &LexPair) -> GroupOrdering {
        a.cmp(b).into()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            metric: false,
            archimedean: false,
            discrete: true,
        }
    }

    fn in_neighborhood(&self, _k: u32, g: &LexPair) -> bool {
        g.0.is_zero() && g.1.is_zero()
    }

    fn magnitude(&self, _g: &LexPair) -> Option<BigRational> {
        None
    }

    fn midpoint(&self, _a: &LexPair, _b: &LexPair) -> Option<LexPair> {
        None
    }

    fn lower_witness(&self, _r: &LexPair, _k: u32) -> Result<LexPair, GroupError> {
        // (0, 1) bounds every positive pair from below but gives no finite
        // truncation to search, so the operation is declined outright;
        // representation search on this instance walks whole truncations.
        Err(GroupError::UnsupportedCapability {
            group: self.name(),
            operation: "lower_witness",
        })
    }

    fn parse_elem(&self, s: &str) -> Result<LexPair, GroupError> {
        let bad = |reason: &str| GroupError::ParseElement {
            group: self.name(),
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let inner = s
            .strip_prefix('(')
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| bad("expected \"(a,b)\""))?;
        let (a, b) = inner.split_once(',').ok_or_else(|| bad("expected \"(a,b)\""))?;
        Ok(LexPair(
            parse_big_int(self.name(), a)?,
            parse_big_int(self.name(), b)?,
        ))
    }

    fn format_elem(&self, e: &LexPair) -> String {
        format!("({},{})", e.0, e.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational("test", s).unwrap()
    }

    #[test]
    fn rational_lower_witness_divides_by_count() {
        let g = make_rationals();
        assert_eq!(g.lower_witness(&q("1"), 3).unwrap(), q("1/3"));
        assert_eq!(g.lower_witness(&q("1/2"), 2).unwrap(), q("1/4"));
        assert_eq!(g.lower_witness(&q("1"), 0), Err(GroupError::ZeroCount));
        assert_eq!(g.lower_witness(&q("-1"), 2), Err(GroupError::NotPositive));
        assert_eq!(g.lower_witness(&q("0"), 2), Err(GroupError::NotPositive));
    }

    #[test]
    fn integer_lower_witness_is_one() {
        let g = make_integers();
        assert_eq!(g.lower_witness(&BigInt::from(5), 2).unwrap(), BigInt::one());
    }

    #[test]
    fn lex_pairs_decline_lower_witness() {
        let g = make_lex_pairs();
        assert!(matches!(
            g.lower_witness(&LexPair::of(1, 0), 2),
            Err(GroupError::UnsupportedCapability { .. })
        ));
    }

    #[test]
    fn lex_order_is_first_coordinate_dominant() {
        let g = make_lex_pairs();
        assert_eq!(
            g.compare(&LexPair::of(0, 5), &LexPair::of(1, -100)),
            GroupOrdering::Less
        );
        assert!(g.is_positive(&LexPair::of(0, 1)));
        assert!(g.is_positive(&LexPair::of(1, -2)));
        assert!(!g.is_positive(&LexPair::of(-1, 100)));
    }

    #[test]
    fn rational_balls_have_open_boundary() {
        let g = make_rationals();
        // magnitude exactly 2^{-k} sits outside the open ball
        assert!(!g.in_neighborhood(2, &q("1/4")));
        assert!(!g.in_neighborhood(2, &q("-1/4")));
        assert!(g.in_neighborhood(2, &q("1/5")));
        assert!(g.in_neighborhood(0, &q("99/100")));
        assert!(!g.in_neighborhood(0, &q("1")));
    }

    #[test]
    fn integer_balls_collapse_to_zero() {
        let g = make_integers();
        assert!(g.in_neighborhood(0, &BigInt::zero()));
        assert!(!g.in_neighborhood(1, &BigInt::one()));
        assert!(!g.in_neighborhood(5, &BigInt::from(-1)));
    }

    #[test]
    fn neighborhoods_are_nested_and_symmetric() {
        let g = make_rationals();
        let x = q("3/17");
        for k in 0..32 {
            if g.in_neighborhood(k + 1, &x) {
                assert!(g.in_neighborhood(k, &x));
            }
            assert_eq!(g.in_neighborhood(k, &x), g.in_neighborhood(k, &g.neg(&x)));
            assert!(g.in_neighborhood(k, &g.zero()));
        }
    }

    #[test]
    fn parse_accepts_exact_literals_only() {
        let g = make_rationals();
        assert_eq!(g.parse_elem("5/6").unwrap(), q("5/6"));
        assert_eq!(g.parse_elem("-1/2").unwrap(), q("-1/2"));
        assert_eq!(g.parse_elem("7").unwrap(), q("7"));
        assert_eq!(g.parse_elem("2/4").unwrap(), q("1/2"));
        assert!(g.parse_elem("0.5").is_err());
        assert!(g.parse_elem("1e3").is_err());
        assert!(g.parse_elem("1/0").is_err());
        assert!(g.parse_elem(" 1/2").is_err());
        assert!(g.parse_elem("").is_err());
    }

    #[test]
    fn format_uses_lowest_terms() {
        let g = make_rationals();
        assert_eq!(g.format_elem(&q("2/4")), "1/2");
        assert_eq!(g.format_elem(&q("3/1")), "3");
        assert_eq!(g.format_elem(&q("-6/8")), "-3/4");
        let z = make_integers();
        assert_eq!(z.format_elem(&BigInt::from(-12)), "-12");
        let l = make_lex_pairs();
        assert_eq!(l.format_elem(&LexPair::of(3, -4)), "(3,-4)");
        assert_eq!(l.parse_elem("(3,-4)").unwrap(), LexPair::of(3, -4));
        assert!(l.parse_elem("3,-4").is_err());
    }

    #[test]
    fn midpoints() {
        let g = make_rationals();
        assert_eq!(g.midpoint(&q("1/3"), &q("1/2")).unwrap(), q("5/12"));
        let z = make_integers();
        assert_eq!(
            z.midpoint(&BigInt::from(3), &BigInt::from(6)).unwrap(),
            BigInt::from(4)
        );
        assert!(make_lex_pairs()
            .midpoint(&LexPair::of(0, 0), &LexPair::of(2, 0))
            .is_none());
    }

    #[test]
    fn left_to_right_summation() {
        let g = make_rationals();
        let terms = [q("1/2"), q("1/3"), q("1/6")];
        assert_eq!(g.sum_left_to_right(terms.iter()), q("1"));
        assert_eq!(g.sum_left_to_right(std::iter::empty()), q("0"));
    }
}
