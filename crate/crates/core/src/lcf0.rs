//! Sets that are locally cofinite at zero, handled through truncations.
//!
//! A set `T` (never containing zero) qualifies when only finitely many of
//! its elements lie outside each basic neighborhood `u_k`. That finite
//! part is the computational handle: [`Lcf0Set::truncate`] returns the
//! elements surviving outside `u_k`, sorted ascending and deduplicated,
//! and everything downstream works on truncations plus an exact
//! membership test.
//!
//! Built-in families:
//!
//! * [`unit_fractions`]: `{1/m : m ≥ 1}` in the rationals. The truncation
//!   at radius `ε = 2^{-k}` keeps `1/m ≥ ε`, boundary included, so its
//!   size is exactly `⌊1/ε⌋`.
//! * [`weighted`]: `{a/b : a ∈ A, b ∈ B}` for a finite set `A` of positive
//!   rationals and an unbounded strictly increasing stream `B`. The
//!   truncation keeps, for each `a`, the values `a/b` with `b < a/ε`.
//! * [`finite_set`]: any finite zero-free subset of a group.
//! * [`negate`] and [`union`]: closure under pointwise negation and
//!   finite union.
//!
//! [`validate_lcf0`] replays the definition against a descriptor to a
//! requested depth and reports the first violation instead of erroring,
//! which makes it usable as an acceptance check on untrusted descriptors.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

use crate::group::{dyadic_radius, OrderedGroup, Rationals};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Lcf0Error {
    #[error("finite sets must not contain the group zero")]
    ZeroElement,
    #[error("finite sets must be nonempty")]
    EmptySet,
    #[error("finite sets must be duplicate-free")]
    DuplicateElement,
    #[error("invalid weighted-set specification: {0}")]
    InvalidSpec(String),
}

/// Strictly increasing unbounded stream of positive rationals, used as
/// the denominator pool of a weighted set. Streams are specified by
/// closed form and never materialized; `count_below` answers bound
/// queries exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundStream {
    /// `start, start·ratio, start·ratio², ...` with `ratio > 1`.
    Geometric { start: BigRational, ratio: BigRational },
    /// `start, start+step, start+2·step, ...` with `step > 0`.
    Arithmetic { start: BigRational, step: BigRational },
}

impl BoundStream {
    pub fn validate(&self) -> Result<(), Lcf0Error> {
        match self {
            BoundStream::Geometric { start, ratio } => {
                if !start.is_positive() {
                    return Err(Lcf0Error::InvalidSpec(
                        "geometric stream needs a positive start".into(),
                    ));
                }
                if *ratio <= BigRational::one() {
                    return Err(Lcf0Error::InvalidSpec(
                        "geometric stream needs ratio > 1".into(),
                    ));
                }
            }
            BoundStream::Arithmetic { start, step } => {
                if !start.is_positive() {
                    return Err(Lcf0Error::InvalidSpec(
                        "arithmetic stream needs a positive start".into(),
                    ));
                }
                if !step.is_positive() {
                    return Err(Lcf0Error::InvalidSpec(
                        "arithmetic stream needs a positive step".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Ascending iteration from the first element. Infinite; callers
    /// bound it with `take_while`.
    pub fn iter(&self) -> BoundStreamIter {
        let (next, kind) = match self {
            BoundStream::Geometric { start, ratio } => {
                (start.clone(), StepKind::Mul(ratio.clone()))
            }
            BoundStream::Arithmetic { start, step } => {
                (start.clone(), StepKind::Add(step.clone()))
            }
        };
        BoundStreamIter { next, kind }
    }

    /// Exact count of stream elements strictly below `x`.
    pub fn count_below(&self, x: &BigRational) -> BigInt {
        match self {
            BoundStream::Geometric { .. } => {
                // Growth is at least geometric with ratio > 1, so walking
                // the prefix costs O(log(x/start)) steps.
                let mut n = BigInt::zero();
                for b in self.iter() {
                    if b >= *x {
                        break;
                    }
                    n += 1;
                }
                n
            }
            BoundStream::Arithmetic { start, step } => {
                if *x <= *start {
                    return BigInt::zero();
                }
                // j ranges over 0 ≤ j < (x - start) / step.
                let q = (x - start) / step;
                q.ceil().to_integer()
            }
        }
    }

    /// Exact membership.
    pub fn contains(&self, x: &BigRational) -> bool {
        if !x.is_positive() {
            return false;
        }
        match self {
            BoundStream::Geometric { .. } => {
                for b in self.iter() {
                    if b == *x {
                        return true;
                    }
                    if b > *x {
                        return false;
                    }
                }
                unreachable!("geometric streams are unbounded")
            }
            BoundStream::Arithmetic { start, step } => {
                if x < start {
                    return false;
                }
                let q = (x - start) / step;
                q.is_integer()
            }
        }
    }
}

#[derive(Debug, Clone)]
enum StepKind {
    Mul(BigRational),
    Add(BigRational),
}

#[derive(Debug, Clone)]
pub struct BoundStreamIter {
    next: BigRational,
    kind: StepKind,
}

impl Iterator for BoundStreamIter {
    type Item = BigRational;

    fn next(&mut self) -> Option<BigRational> {
        let out = self.next.clone();
        self.next = match &self.kind {
            StepKind::Mul(r) => &self.next * r,
            StepKind::Add(s) => &self.next + s,
        };
        Some(out)
    }
}

/// Numerators `A` and denominator stream `B` of a weighted set
/// `{a/b : a ∈ A, b ∈ B}`.
#[derive(Debug, Clone)]
pub struct WeightedSpec {
    numerators: Vec<BigRational>,
    denominators: BoundStream,
}

impl WeightedSpec {
    /// Numerators are treated as a set: duplicates collapse. Every
    /// numerator must be strictly positive and the stream parameters
    /// sane.
    pub fn new(
        numerators: Vec<BigRational>,
        denominators: BoundStream,
    ) -> Result<Self, Lcf0Error> {
        if numerators.is_empty() {
            return Err(Lcf0Error::InvalidSpec("numerator set is empty".into()));
        }
        if numerators.iter().any(|a| !a.is_positive()) {
            return Err(Lcf0Error::InvalidSpec(
                "numerators must be strictly positive".into(),
            ));
        }
        denominators.validate()?;
        let numerators: Vec<_> = numerators
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(WeightedSpec {
            numerators,
            denominators,
        })
    }

    pub fn numerators(&self) -> &[BigRational] {
        &self.numerators
    }

    pub fn denominators(&self) -> &BoundStream {
        &self.denominators
    }
}

/// The part of a unit-fraction set outside the open ball of radius `eps`:
/// `{1/m : 1/m ≥ eps}`, ascending. Boundary elements stay in.
pub fn unit_fraction_tail(eps: &BigRational) -> Vec<BigRational> {
    if !eps.is_positive() {
        panic!("truncation radius must be positive");
    }
    let m_max = (BigRational::one() / eps).floor().to_integer();
    let mut out = Vec::new();
    let mut m = m_max;
    while m >= BigInt::one() {
        out.push(BigRational::new(BigInt::one(), m.clone()));
        m -= 1;
    }
    out
}

/// The weighted-set elements surviving outside `(0, eps)`: for each
/// numerator `a`, the values `a/b` over stream elements `b < a/eps`.
/// Distinct `(a, b)` pairs may coincide in value; values come back
/// deduplicated and ascending.
pub fn weighted_tail(spec: &WeightedSpec, eps: &BigRational) -> Vec<BigRational> {
    if !eps.is_positive() {
        panic!("truncation radius must be positive");
    }
    let mut out = BTreeSet::new();
    for a in &spec.numerators {
        let bound = a / eps;
        for b in spec.denominators.iter() {
            if b >= bound {
                break;
            }
            out.insert(a / &b);
        }
    }
    out.into_iter().collect()
}

/// Behavior of one concrete set family. Implementations return raw
/// truncations; [`Lcf0Set`] sorts, deduplicates, and caches on top.
///
/// `contains` may return `None` when membership is undecidable for the
/// descriptor; operations that need a decision surface that as an error.
pub trait Lcf0Descriptor<G: OrderedGroup>: Send + Sync {
    fn name(&self) -> String;
    fn truncate(&self, group: &G, k: u32) -> Vec<G::Elem>;
    fn contains(&self, group: &G, e: &G::Elem) -> Option<bool>;
    fn positive_cone(&self) -> bool;

    /// Full element list when the set is finite and the descriptor can
    /// say so. `None` means infinite or unknown.
    fn finite_elements(&self, group: &G) -> Option<Vec<G::Elem>> {
        let _ = group;
        None
    }

    /// True when the set is known to be infinite. `false` means finite
    /// or unknown; together with [`Self::finite_elements`] this gives a
    /// three-way extent that interval searches rely on.
    fn known_infinite(&self) -> bool {
        false
    }
}

/// Handle to a set that is locally cofinite at zero. Cheap to clone;
/// clones share one truncation cache. The cache is behind a mutex, so a
/// set may be read from several threads, though no operation mutates a
/// set after construction.
pub struct Lcf0Set<G: OrderedGroup> {
    group: G,
    descriptor: Arc<dyn Lcf0Descriptor<G>>,
    cache: Arc<Mutex<std::collections::BTreeMap<u32, Arc<Vec<G::Elem>>>>>,
}

impl<G: OrderedGroup> Clone for Lcf0Set<G> {
    fn clone(&self) -> Self {
        Lcf0Set {
            group: self.group.clone(),
            descriptor: Arc::clone(&self.descriptor),
            cache: Arc::clone(&self.cache),
        }
    }
}

impl<G: OrderedGroup> std::fmt::Debug for Lcf0Set<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Lcf0Set")
            .field("name", &self.name())
            .finish_non_exhaustive()
    }
}

impl<G: OrderedGroup> Lcf0Set<G> {
    pub fn from_descriptor(group: G, descriptor: Arc<dyn Lcf0Descriptor<G>>) -> Self {
        Lcf0Set {
            group,
            descriptor,
            cache: Arc::new(Mutex::new(Default::default())),
        }
    }

    pub fn name(&self) -> String {
        self.descriptor.name()
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn positive_cone(&self) -> bool {
        self.descriptor.positive_cone()
    }

    /// Elements outside `u_k`, ascending and duplicate-free. Results are
    /// cached per resolution.
    pub fn truncate(&self, k: u32) -> Arc<Vec<G::Elem>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&k) {
            return Arc::clone(hit);
        }
        let mut raw = self.descriptor.truncate(&self.group, k);
        raw.sort();
        raw.dedup();
        let arc = Arc::new(raw);
        self.cache
            .lock()
            .unwrap()
            .insert(k, Arc::clone(&arc));
        arc
    }

    /// Exact membership, `None` when the descriptor cannot decide.
    pub fn contains(&self, e: &G::Elem) -> Option<bool> {
        self.descriptor.contains(&self.group, e)
    }

    /// Every element, sorted, when the set is known finite.
    pub fn finite_elements(&self) -> Option<Vec<G::Elem>> {
        self.descriptor.finite_elements(&self.group).map(|mut v| {
            v.sort();
            v.dedup();
            v
        })
    }

    pub fn known_infinite(&self) -> bool {
        self.descriptor.known_infinite()
    }
}

struct UnitFractions;

impl Lcf0Descriptor<Rationals> for UnitFractions {
    fn name(&self) -> String {
        "unit_fractions".to_string()
    }

    fn truncate(&self, _group: &Rationals, k: u32) -> Vec<BigRational> {
        unit_fraction_tail(&dyadic_radius(k))
    }

    fn contains(&self, _group: &Rationals, e: &BigRational) -> Option<bool> {
        Some(e.is_positive() && e.numer().is_one())
    }

    fn positive_cone(&self) -> bool {
        true
    }

    fn known_infinite(&self) -> bool {
        true
    }
}

/// `{1/m : m ≥ 1}` as a set in the rationals.
pub fn unit_fractions() -> Lcf0Set<Rationals> {
    Lcf0Set::from_descriptor(Rationals, Arc::new(UnitFractions))
}

struct Weighted {
    spec: WeightedSpec,
}

impl Lcf0Descriptor<Rationals> for Weighted {
    fn name(&self) -> String {
        "weighted".to_string()
    }

    fn truncate(&self, _group: &Rationals, k: u32) -> Vec<BigRational> {
        weighted_tail(&self.spec, &dyadic_radius(k))
    }

    fn contains(&self, _group: &Rationals, e: &BigRational) -> Option<bool> {
        if !e.is_positive() {
            return Some(false);
        }
        Some(
            self.spec
                .numerators
                .iter()
                .any(|a| self.spec.denominators.contains(&(a / e))),
        )
    }

    fn positive_cone(&self) -> bool {
        true
    }

    fn known_infinite(&self) -> bool {
        // Bound streams are unbounded, so any one numerator already
        // sweeps infinitely many distinct values.
        true
    }
}

/// `{a/b : a ∈ A, b ∈ B}` in the rationals.
pub fn weighted(spec: WeightedSpec) -> Lcf0Set<Rationals> {
    Lcf0Set::from_descriptor(Rationals, Arc::new(Weighted { spec }))
}

/// Finite zero-free subset of any instance. Fails on an empty list, a
/// zero element, or duplicates.
pub fn finite_set<G: OrderedGroup>(
    group: G,
    mut elems: Vec<G::Elem>,
) -> Result<Lcf0Set<G>, Lcf0Error> {
    if elems.is_empty() {
        return Err(Lcf0Error::EmptySet);
    }
    elems.sort();
    if elems.windows(2).any(|w| w[0] == w[1]) {
        return Err(Lcf0Error::DuplicateElement);
    }
    if elems.iter().any(|e| group.is_zero(e)) {
        return Err(Lcf0Error::ZeroElement);
    }
    let positive = elems.iter().all(|e| group.is_positive(e));
    Ok(Lcf0Set::from_descriptor(
        group,
        Arc::new(FiniteSetImpl { elems, positive }),
    ))
}

struct FiniteSetImpl<G: OrderedGroup> {
    elems: Vec<G::Elem>,
    positive: bool,
}

impl<G: OrderedGroup> Lcf0Descriptor<G> for FiniteSetImpl<G> {
    fn name(&self) -> String {
        format!("finite[{}]", self.elems.len())
    }

    fn truncate(&self, group: &G, k: u32) -> Vec<G::Elem> {
        self.elems
            .iter()
            .filter(|e| !group.in_neighborhood(k, e))
            .cloned()
            .collect()
    }

    fn contains(&self, _group: &G, e: &G::Elem) -> Option<bool> {
        Some(self.elems.binary_search(e).is_ok())
    }

    fn positive_cone(&self) -> bool {
        self.positive
    }

    fn finite_elements(&self, _group: &G) -> Option<Vec<G::Elem>> {
        Some(self.elems.clone())
    }
}

struct Negated<G: OrderedGroup> {
    inner: Lcf0Set<G>,
}

impl<G: OrderedGroup> Lcf0Descriptor<G> for Negated<G> {
    fn name(&self) -> String {
        format!("negate({})", self.inner.name())
    }

    fn truncate(&self, group: &G, k: u32) -> Vec<G::Elem> {
        self.inner
            .truncate(k)
            .iter()
            .map(|e| group.neg(e))
            .collect()
    }

    fn contains(&self, group: &G, e: &G::Elem) -> Option<bool> {
        self.inner.contains(&group.neg(e))
    }

    fn positive_cone(&self) -> bool {
        // Conservative: negation of a nontrivial positive set leaves the
        // positive cone, and we never try to detect the double-negation
        // special case.
        false
    }

    fn finite_elements(&self, group: &G) -> Option<Vec<G::Elem>> {
        self.inner
            .finite_elements()
            .map(|v| v.iter().map(|e| group.neg(e)).collect())
    }

    fn known_infinite(&self) -> bool {
        self.inner.known_infinite()
    }
}

/// Pointwise negation `{-t : t ∈ T}`.
pub fn negate<G: OrderedGroup>(set: &Lcf0Set<G>) -> Lcf0Set<G> {
    let group = set.group().clone();
    Lcf0Set::from_descriptor(group, Arc::new(Negated { inner: set.clone() }))
}

struct UnionSet<G: OrderedGroup> {
    left: Lcf0Set<G>,
    right: Lcf0Set<G>,
}

impl<G: OrderedGroup> Lcf0Descriptor<G> for UnionSet<G> {
    fn name(&self) -> String {
        format!("union({},{})", self.left.name(), self.right.name())
    }

    fn truncate(&self, _group: &G, k: u32) -> Vec<G::Elem> {
        let mut out: Vec<G::Elem> = self.left.truncate(k).iter().cloned().collect();
        out.extend(self.right.truncate(k).iter().cloned());
        out
    }

    fn contains(&self, _group: &G, e: &G::Elem) -> Option<bool> {
        match (self.left.contains(e), self.right.contains(e)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        }
    }

    fn positive_cone(&self) -> bool {
        self.left.positive_cone() && self.right.positive_cone()
    }

    fn finite_elements(&self, _group: &G) -> Option<Vec<G::Elem>> {
        match (self.left.finite_elements(), self.right.finite_elements()) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            _ => None,
        }
    }

    fn known_infinite(&self) -> bool {
        self.left.known_infinite() || self.right.known_infinite()
    }
}

/// Union of two sets over the same instance. A union of locally cofinite
/// sets is locally cofinite, so no side condition beyond zero-freeness
/// (which [`validate_lcf0`] audits) is needed.
pub fn union<G: OrderedGroup>(left: &Lcf0Set<G>, right: &Lcf0Set<G>) -> Lcf0Set<G> {
    let group = left.group().clone();
    Lcf0Set::from_descriptor(
        group,
        Arc::new(UnionSet {
            left: left.clone(),
            right: right.clone(),
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    ZeroInTruncation,
    TruncationNotNested,
    ElementInsideNeighborhood,
    ContainsDisagrees,
    ContainsUndecided,
    PositiveConeViolated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub k: u32,
    pub witness: String,
}

/// Outcome of replaying the local-cofiniteness contract to a depth.
/// A failed report is ordinary content, not an error.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub set: String,
    pub depth: u32,
    pub checks_run: usize,
    pub first_violation: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Audits one set to resolution `depth`: truncations are zero-free,
/// nested, lie outside their neighborhood, agree with `contains`, and
/// respect the positive-cone claim.
pub fn validate_lcf0<G: OrderedGroup>(set: &Lcf0Set<G>, depth: u32) -> ValidationReport {
    let group = set.group().clone();
    let mut checks_run = 0usize;
    let mut first_violation = None;

    'outer: for k in 0..=depth {
        let cur = set.truncate(k);
        let next = set.truncate(k + 1);
        let fail = |kind: ViolationKind, witness: String| Violation { kind, k, witness };

        for e in cur.iter() {
            checks_run += 4;
            if group.is_zero(e) {
                first_violation =
                    Some(fail(ViolationKind::ZeroInTruncation, group.format_elem(e)));
                break 'outer;
            }
            if group.in_neighborhood(k, e) {
                first_violation = Some(fail(
                    ViolationKind::ElementInsideNeighborhood,
                    group.format_elem(e),
                ));
                break 'outer;
            }
            if next.binary_search(e).is_err() {
                first_violation =
                    Some(fail(ViolationKind::TruncationNotNested, group.format_elem(e)));
                break 'outer;
            }
            match set.contains(e) {
                Some(true) => {}
                Some(false) => {
                    first_violation =
                        Some(fail(ViolationKind::ContainsDisagrees, group.format_elem(e)));
                    break 'outer;
                }
                None => {
                    first_violation =
                        Some(fail(ViolationKind::ContainsUndecided, group.format_elem(e)));
                    break 'outer;
                }
            }
            if set.positive_cone() && !group.is_positive(e) {
                checks_run += 1;
                first_violation =
                    Some(fail(ViolationKind::PositiveConeViolated, group.format_elem(e)));
                break 'outer;
            }
        }
    }

    ValidationReport {
        set: set.name(),
        depth,
        checks_run,
        first_violation,
    }
}
