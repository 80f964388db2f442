//! Finite certificates about the sumsets `E_n = T_1 + ... + T_n`.
//!
//! The zero-padded sumset `E'_n` (every `T_i` enlarged by zero) admits a
//! finite net: summing the truncations at resolution `k` hits every
//! element of `E'_n` to within `n·2^{-k}`, because the terms dropped by
//! truncation each lie inside the ball of radius `2^{-k}`. All
//! machinery in this module rides on that one fact:
//!
//! * [`build_net`] materializes the net and its fattening radius;
//! * [`cover_soundness`] stress-tests the covering property with random
//!   exact representations;
//! * [`find_gap`] certifies open subintervals that the sumset misses,
//!   sharpening the endpoints to exact net points where an exhaustive
//!   flank search proves the sliver between raw gap and net point empty;
//! * [`enumerate_representations`] lists every ordered representation of
//!   a target over a positive-cone spec, exactly;
//! * [`representation_census`] counts representations inside truncations
//!   along a resolution schedule, and [`trichotomy_check`] classifies the
//!   three-set outcome (counts stabilize, target in a summand set, or
//!   target zero).
//!
//! Ordered tuples are the unit of counting throughout: two
//! representations differing only in term order are distinct. Sums are
//! always folded left to right.

use std::collections::{BTreeSet, HashSet};

use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::group::{dyadic_radius, GroupError, OrderedGroup};
use crate::lcf0::Lcf0Set;

/// Cap on how many candidate tuples a net build or census resolution may
/// touch before refusing.
pub const DEFAULT_TUPLE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("a sum spec needs at least one summand set")]
    EmptySpec,
    #[error("resolution schedule must be nonempty and strictly increasing")]
    InvalidSchedule,
    #[error("estimated {estimate} tuples exceeds the budget of {budget}")]
    BudgetExceeded { estimate: u128, budget: u64 },
    #[error("operation {operation} is not supported on {group}")]
    UnsupportedCapability {
        group: &'static str,
        operation: &'static str,
    },
    #[error("operation {operation} requires every summand set in the positive cone")]
    PositiveConeRequired { operation: &'static str },
    #[error("membership in {set} is undecidable for this descriptor")]
    MembershipUndecided { set: String },
    #[error("expected a spec of arity {expected}, got {got}")]
    SpecArity { expected: usize, got: usize },
    #[error("query interval is empty")]
    EmptyInterval,
    #[error("accumulation search needs at least 2 samples, got {got}")]
    TooFewSamples { got: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// An ordered list of summand sets over one group instance. The order of
/// the sets is the order of the summands in every representation.
pub struct SumSpec<G: OrderedGroup> {
    group: G,
    sets: Vec<Lcf0Set<G>>,
}

impl<G: OrderedGroup> Clone for SumSpec<G> {
    fn clone(&self) -> Self {
        SumSpec {
            group: self.group.clone(),
            sets: self.sets.clone(),
        }
    }
}

impl<G: OrderedGroup> SumSpec<G> {
    pub fn new(group: G, sets: Vec<Lcf0Set<G>>) -> Result<Self, EngineError> {
        if sets.is_empty() {
            return Err(EngineError::EmptySpec);
        }
        Ok(SumSpec { group, sets })
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn sets(&self) -> &[Lcf0Set<G>] {
        &self.sets
    }

    pub fn arity(&self) -> usize {
        self.sets.len()
    }

    pub fn positive_cone(&self) -> bool {
        self.sets.iter().all(|s| s.positive_cone())
    }
}

/// One ordered representation `target = terms[0] + terms[1] + ...`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Representation<E> {
    pub target: E,
    pub terms: Vec<E>,
}

impl<E: Clone + Eq + Ord + std::hash::Hash + std::fmt::Debug + Send + Sync + 'static>
    Representation<E>
{
    /// Re-checks the witness against its spec: right arity, exact sum,
    /// and per-position membership.
    pub fn verify<G: OrderedGroup<Elem = E>>(&self, spec: &SumSpec<G>) -> bool {
        if self.terms.len() != spec.arity() {
            return false;
        }
        let g = spec.group();
        if !g.equals(&g.sum_left_to_right(self.terms.iter()), &self.target) {
            return false;
        }
        self.terms
            .iter()
            .zip(spec.sets())
            .all(|(t, set)| set.contains(t) == Some(true))
    }
}

/// Finite net for the zero-padded sumset at one resolution. Every
/// element of `E'_n` lies within `fattening` of some point; on discrete
/// instances the net is exactly `E'_n` and the fattening is zero.
#[derive(Debug, Clone)]
pub struct SumsetNet<E> {
    pub resolution: u32,
    pub arity: usize,
    pub fattening: BigRational,
    /// Ascending, duplicate-free.
    pub points: Vec<E>,
}

fn net_fattening<G: OrderedGroup>(group: &G, arity: usize, k: u32) -> Result<BigRational, EngineError> {
    let caps = group.capabilities();
    if caps.discrete {
        Ok(BigRational::zero())
    } else if caps.metric {
        Ok(dyadic_radius(k) * BigRational::from_integer(BigInt::from(arity)))
    } else {
        Err(EngineError::UnsupportedCapability {
            group: group.name(),
            operation: "build_net",
        })
    }
}

/// Sums of one element drawn from each zero-padded truncation at
/// resolution `k`. Refuses when the nominal tuple count `∏(|T_i|+1)`
/// exceeds `budget`.
pub fn build_net<G: OrderedGroup>(
    spec: &SumSpec<G>,
    k: u32,
    budget: u64,
) -> Result<SumsetNet<G::Elem>, EngineError> {
    let group = spec.group();
    let fattening = net_fattening(group, spec.arity(), k)?;

    let truncations: Vec<_> = spec.sets().iter().map(|s| s.truncate(k)).collect();
    let mut estimate: u128 = 1;
    for t in &truncations {
        estimate = estimate.saturating_mul(t.len() as u128 + 1);
    }
    if estimate > budget as u128 {
        return Err(EngineError::BudgetExceeded { estimate, budget });
    }

    let mut acc: Vec<G::Elem> = vec![group.zero()];
    for t in &truncations {
        let mut next: HashSet<G::Elem> =
            HashSet::with_capacity(acc.len().saturating_mul(t.len() + 1));
        for prefix in &acc {
            next.insert(prefix.clone());
            for term in t.iter() {
                next.insert(group.add(prefix, term));
            }
        }
        acc = next.into_iter().collect();
        acc.sort();
    }

    Ok(SumsetNet {
        resolution: k,
        arity: spec.arity(),
        fattening,
        points: acc,
    })
}

/// Distance from `x` to the nearest point of an ascending slice, by the
/// group metric.
fn nearest_distance<G: OrderedGroup>(
    group: &G,
    points: &[G::Elem],
    x: &G::Elem,
) -> Option<BigRational> {
    if points.is_empty() {
        return None;
    }
    let idx = points.partition_point(|p| p < x);
    let mut best: Option<BigRational> = None;
    for cand in [idx.checked_sub(1), Some(idx)].into_iter().flatten() {
        if let Some(p) = points.get(cand) {
            let d = group
                .magnitude(&group.sub(x, p))
                .expect("caller checked the metric capability");
            if best.as_ref().map_or(true, |b| d < *b) {
                best = Some(d);
            }
        }
    }
    best
}

/// Outcome of stress-testing the net covering property with random exact
/// representations, terms drawn from truncations eight levels deeper
/// than the net so that many fall below its resolution.
#[derive(Debug, Clone)]
pub struct CoverReport {
    pub trials: u32,
    pub all_within: bool,
    pub max_distance: BigRational,
    pub min_slack: BigRational,
}

pub fn cover_soundness<G: OrderedGroup>(
    spec: &SumSpec<G>,
    net: &SumsetNet<G::Elem>,
    trials: u32,
    seed: u64,
) -> Result<CoverReport, EngineError> {
    let group = spec.group();
    if !group.capabilities().metric {
        return Err(EngineError::UnsupportedCapability {
            group: group.name(),
            operation: "cover_soundness",
        });
    }
    let deep: Vec<_> = spec
        .sets()
        .iter()
        .map(|s| s.truncate(net.resolution + 8))
        .collect();
    if deep.iter().any(|t| t.is_empty()) {
        // Nothing to draw; vacuously covered.
        return Ok(CoverReport {
            trials: 0,
            all_within: true,
            max_distance: BigRational::zero(),
            min_slack: net.fattening.clone(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_distance = BigRational::zero();
    let mut min_slack: Option<BigRational> = None;
    let mut all_within = true;

    for _ in 0..trials {
        let mut sum = group.zero();
        for t in &deep {
            let pick = &t[rng.gen_range(0..t.len())];
            sum = group.add(&sum, pick);
        }
        let d = nearest_distance(group, &net.points, &sum)
            .expect("nets always contain the zero point");
        if d > net.fattening {
            all_within = false;
        }
        let slack = &net.fattening - &d;
        if d > max_distance {
            max_distance = d;
        }
        if min_slack.as_ref().map_or(true, |m| slack < *m) {
            min_slack = Some(slack);
        }
    }

    Ok(CoverReport {
        trials,
        all_within,
        max_distance,
        min_slack: min_slack.unwrap_or_else(|| net.fattening.clone()),
    })
}

/// A certified sumset-free open interval. `E_n ∩ (gap.0, gap.1) = ∅`,
/// witnessed by the net at `resolution`: no fattened net point reaches
/// into the certified interval, and where an endpoint was widened to a
/// net point, an exhaustive flank search proved the sliver empty.
#[derive(Debug, Clone)]
pub struct GapCertificate<E> {
    pub query: (E, E),
    pub gap: (E, E),
    pub resolution: u32,
    pub fattening: BigRational,
    pub net_size: usize,
}

#[derive(Debug, Clone)]
pub enum GapOutcome<E> {
    Found(GapCertificate<E>),
    /// Not an error: every scanned resolution left the query covered.
    NotFoundAtResolution { k_max: u32 },
}

/// How much of a set we can exhaustively materialize.
enum Extent<E> {
    Infinite,
    Finite(Vec<E>),
    Unknown,
}

fn set_extent<G: OrderedGroup>(set: &Lcf0Set<G>) -> Extent<G::Elem> {
    match set.finite_elements() {
        Some(elems) => Extent::Finite(elems),
        None if set.known_infinite() => Extent::Infinite,
        None => Extent::Unknown,
    }
}

/// A positive element of `T` with magnitude at most `bound`. Scans
/// truncations downward; an infinite positive-cone set reaches below
/// any bound within about `log2(1/bound)` levels, and the depth cap
/// only guards against descriptors that lied about being infinite.
fn small_positive_element<G: OrderedGroup>(
    group: &G,
    set: &Lcf0Set<G>,
    bound: &BigRational,
) -> Option<G::Elem> {
    for k in 0..512u32 {
        let t = set.truncate(k);
        let start = t.partition_point(|e| !group.is_positive(e));
        if let Some(e) = t.get(start) {
            if let Some(mag) = group.magnitude(e) {
                if mag <= *bound {
                    return Some(e.clone());
                }
            }
        }
    }
    None
}

/// Window of remaining sum values during interval search: `lo <(=) v <(=) hi`.
struct Window<E> {
    lo: E,
    hi: E,
    lo_open: bool,
    hi_open: bool,
}

impl<E: Clone> Window<E> {
    fn shift<G: OrderedGroup<Elem = E>>(&self, group: &G, t: &E) -> Window<E> {
        Window {
            lo: group.sub(&self.lo, t),
            hi: group.sub(&self.hi, t),
            lo_open: self.lo_open,
            hi_open: self.hi_open,
        }
    }

    fn admits<G: OrderedGroup<Elem = E>>(&self, group: &G, v: &E) -> bool {
        let above = if self.lo_open {
            group.lt(&self.lo, v)
        } else {
            group.le(&self.lo, v)
        };
        let below = if self.hi_open {
            group.lt(v, &self.hi)
        } else {
            group.le(v, &self.hi)
        };
        above && below
    }
}

/// Smallest resolution whose radius falls strictly below `bound`, so the
/// truncation there contains every set element `≥ bound`. Works for both
/// boundary conventions among the shipped families because the radius is
/// strictly smaller than the bound.
fn resolution_below(bound: &BigRational) -> u32 {
    let mut k = 0u32;
    let mut radius = BigRational::one();
    while radius >= *bound {
        k += 1;
        radius = radius / BigRational::from_integer(BigInt::from(2));
    }
    k
}

/// Decides whether some ordered tuple over `positions` sums into the
/// window, returning a verified witness assignment `(position, term)`
/// when one exists. Requires a positive-cone spec on a totally ordered
/// instance whose sets all have known extent.
///
/// The search branches on which remaining position carries a maximal
/// term while the window floor stays positive (the pigeonhole bound
/// `v/|J|` keeps candidates finite); once the floor reaches zero the sum
/// constraint is one-sided, finite positions are exhausted explicitly,
/// and any leftover infinite positions can always complete with
/// arbitrarily small elements.
fn find_tuple_in_window<G: OrderedGroup>(
    spec: &SumSpec<G>,
    positions: &[usize],
    window: &Window<G::Elem>,
) -> Result<Option<Vec<(usize, G::Elem)>>, EngineError> {
    let group = spec.group();
    let zero = group.zero();

    // Positive terms only: an empty-feasible window needs positive room.
    let hi_room = if window.hi_open {
        group.lt(&zero, &window.hi)
    } else {
        group.le(&zero, &window.hi)
    };
    if positions.is_empty() {
        return Ok(if window.admits(group, &zero) {
            Some(Vec::new())
        } else {
            None
        });
    }
    if !hi_room || group.equals(&window.hi, &zero) {
        return Ok(None);
    }

    let floor_positive = group.is_positive(&window.lo);

    if floor_positive {
        // Maximal-term branching. Any tuple summing to v in the window
        // has a largest term t with lo/|J| ≤ t ≤ v ≤ hi.
        if positions.len() == 1 {
            let j = positions[0];
            let lo_mag = group
                .magnitude(&window.lo)
                .expect("positive floor on a metric instance");
            let k = resolution_below(&lo_mag);
            let t = spec.sets()[j].truncate(k);
            let from = t.partition_point(|e| group.lt(e, &window.lo));
            for e in t[from..].iter() {
                if group.lt(&window.hi, e) {
                    break;
                }
                if window.admits(group, e) {
                    return Ok(Some(vec![(j, e.clone())]));
                }
            }
            return Ok(None);
        }
        let count = positions.len() as u32;
        let ell = group.lower_witness(&window.lo, count)?;
        let ell_mag = group
            .magnitude(&ell)
            .expect("positive floor on a metric instance");
        let k = resolution_below(&ell_mag);
        for (slot, &j) in positions.iter().enumerate() {
            let t = spec.sets()[j].truncate(k);
            let from = t.partition_point(|e| group.lt(e, &ell));
            let mut rest: Vec<usize> = positions.to_vec();
            rest.remove(slot);
            for e in t[from..].iter() {
                if group.lt(&window.hi, e) {
                    break;
                }
                let shifted = window.shift(group, e);
                if let Some(mut tail) = find_tuple_in_window(spec, &rest, &shifted)? {
                    tail.push((j, e.clone()));
                    return Ok(Some(tail));
                }
            }
        }
        return Ok(None);
    }

    // Floor at or below zero: only the ceiling constrains. Split the
    // remaining positions by extent.
    let mut finite_slot = None;
    for (slot, &j) in positions.iter().enumerate() {
        match set_extent(&spec.sets()[j]) {
            Extent::Finite(_) => {
                finite_slot = Some(slot);
                break;
            }
            Extent::Infinite => {}
            Extent::Unknown => {
                return Err(EngineError::MembershipUndecided {
                    set: spec.sets()[j].name(),
                })
            }
        }
    }

    if let Some(slot) = finite_slot {
        let j = positions[slot];
        let elems = match set_extent(&spec.sets()[j]) {
            Extent::Finite(e) => e,
            _ => unreachable!(),
        };
        let mut rest: Vec<usize> = positions.to_vec();
        rest.remove(slot);
        for e in &elems {
            if !group.is_positive(e) {
                continue;
            }
            if group.lt(&window.hi, e) {
                continue;
            }
            let shifted = window.shift(group, e);
            if let Some(mut tail) = find_tuple_in_window(spec, &rest, &shifted)? {
                tail.push((j, e.clone()));
                return Ok(Some(tail));
            }
        }
        return Ok(None);
    }

    // All remaining positions draw from infinite positive sets: pick each
    // term at most hi/(2·|J|), so the total lands strictly inside
    // (0, hi) regardless of endpoint openness.
    let count = BigInt::from(2 * positions.len() as u64);
    let hi_mag = group
        .magnitude(&window.hi)
        .expect("metric instance required for interval search");
    let per_term = hi_mag / BigRational::from_integer(count);
    let mut out = Vec::new();
    for &j in positions {
        match small_positive_element(group, &spec.sets()[j], &per_term) {
            Some(e) => out.push((j, e)),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Searches for any ordered representation whose value lies in the given
/// interval, with endpoint openness flags. Returns a verified witness or
/// `None` if the intersection is provably empty.
pub fn find_element_in_interval<G: OrderedGroup>(
    spec: &SumSpec<G>,
    lo: &G::Elem,
    hi: &G::Elem,
    lo_open: bool,
    hi_open: bool,
) -> Result<Option<Representation<G::Elem>>, EngineError> {
    let group = spec.group();
    let caps = group.capabilities();
    if !spec.positive_cone() {
        return Err(EngineError::PositiveConeRequired {
            operation: "find_element_in_interval",
        });
    }
    if !(caps.metric && caps.archimedean) {
        return Err(EngineError::UnsupportedCapability {
            group: group.name(),
            operation: "find_element_in_interval",
        });
    }
    let positions: Vec<usize> = (0..spec.arity()).collect();
    let window = Window {
        lo: lo.clone(),
        hi: hi.clone(),
        lo_open,
        hi_open,
    };
    let found = find_tuple_in_window(spec, &positions, &window)?;
    Ok(found.map(|mut assignment| {
        assignment.sort_by_key(|(j, _)| *j);
        let terms: Vec<_> = assignment.into_iter().map(|(_, e)| e).collect();
        let target = group.sum_left_to_right(terms.iter());
        Representation { target, terms }
    }))
}

/// Scans resolutions `1..=k_max` for an open subinterval of the query
/// that the fattened net leaves uncovered; the first resolution with a
/// gap wins and the widest gap there (leftmost on ties) is certified.
/// Where the raw gap edge is the edge of a fattened net ball and an
/// exhaustive flank search proves the sliver between ball center and
/// edge empty, the certificate widens to the net point itself, clamped
/// to the query.
pub fn find_gap<G: OrderedGroup>(
    spec: &SumSpec<G>,
    query: (&G::Elem, &G::Elem),
    k_max: u32,
    budget: u64,
) -> Result<GapOutcome<G::Elem>, EngineError> {
    let group = spec.group();
    let caps = group.capabilities();
    if !caps.metric {
        return Err(EngineError::UnsupportedCapability {
            group: group.name(),
            operation: "find_gap",
        });
    }
    let (alpha, beta) = query;
    if !group.lt(alpha, beta) {
        return Err(EngineError::EmptyInterval);
    }

    for k in 1..=k_max {
        let net = build_net(spec, k, budget)?;
        let fat = &net.fattening;
        let dense = fat.is_positive();

        // Merge the fattened covered intervals around net points.
        let mut covered: Vec<(G::Elem, G::Elem)> = Vec::new();
        for f in &net.points {
            let (lo, hi) = if dense {
                (
                    group.offset(f, &-fat.clone()).ok_or(
                        EngineError::UnsupportedCapability {
                            group: group.name(),
                            operation: "find_gap",
                        },
                    )?,
                    group
                        .offset(f, fat)
                        .ok_or(EngineError::UnsupportedCapability {
                            group: group.name(),
                            operation: "find_gap",
                        })?,
                )
            } else {
                (f.clone(), f.clone())
            };
            match covered.last_mut() {
                Some(last) if group.le(&lo, &last.1) => {
                    if group.lt(&last.1, &hi) {
                        last.1 = hi;
                    }
                }
                _ => covered.push((lo, hi)),
            }
        }

        // Sweep the query for maximal uncovered open subintervals.
        let mut gaps: Vec<(G::Elem, G::Elem)> = Vec::new();
        let mut cursor = alpha.clone();
        for (lo, hi) in &covered {
            if group.le(hi, &cursor) {
                continue;
            }
            if group.lt(&cursor, lo) {
                let end = if group.lt(lo, beta) { lo.clone() } else { beta.clone() };
                if group.lt(&cursor, &end) {
                    gaps.push((cursor.clone(), end));
                }
            }
            if group.lt(&cursor, hi) {
                cursor = hi.clone();
            }
            if group.le(beta, &cursor) {
                break;
            }
        }
        if group.lt(&cursor, beta) {
            gaps.push((cursor, beta.clone()));
        }

        let widest = gaps.into_iter().reduce(|best, cand| {
            let bw = group.sub(&best.1, &best.0);
            let cw = group.sub(&cand.1, &cand.0);
            if group.lt(&bw, &cw) {
                cand
            } else {
                best
            }
        });

        if let Some((mut lo, mut hi)) = widest {
            if dense && spec.positive_cone() && sharpening_available(spec) {
                // Left edge: extend down to the flanking net point when
                // the sliver (net point, edge] holds no sumset element.
                if group.lt(alpha, &lo) {
                    let f = group.offset(&lo, &-fat.clone()).expect("checked dense");
                    if find_element_in_interval(spec, &f, &lo, true, false)?.is_none() {
                        lo = if group.lt(alpha, &f) { f } else { alpha.clone() };
                    }
                }
                // Right edge, symmetric with sliver [edge, net point).
                if group.lt(&hi, beta) {
                    let f = group.offset(&hi, fat).expect("checked dense");
                    if find_element_in_interval(spec, &hi, &f, false, true)?.is_none() {
                        hi = if group.lt(&f, beta) { f } else { beta.clone() };
                    }
                }
            }
            return Ok(GapOutcome::Found(GapCertificate {
                query: (alpha.clone(), beta.clone()),
                gap: (lo, hi),
                resolution: k,
                fattening: net.fattening,
                net_size: net.points.len(),
            }));
        }
    }

    Ok(GapOutcome::NotFoundAtResolution { k_max })
}

fn sharpening_available<G: OrderedGroup>(spec: &SumSpec<G>) -> bool {
    let caps = spec.group().capabilities();
    caps.metric
        && caps.archimedean
        && spec
            .sets()
            .iter()
            .all(|s| !matches!(set_extent(s), Extent::Unknown))
}

/// Lists every ordered representation of `g` over a positive-cone spec.
/// An empty list is the honest answer for an unrepresentable target.
///
/// On dense instances the search branches on which position holds a
/// maximal term; the pigeonhole bound `lower_witness(r, |J|)` keeps each
/// candidate slice finite. Discrete instances skip the bound entirely
/// and walk their full (finite) truncations position by position. The
/// final position always closes with an exact membership query.
pub fn enumerate_representations<G: OrderedGroup>(
    spec: &SumSpec<G>,
    g: &G::Elem,
) -> Result<Vec<Representation<G::Elem>>, EngineError> {
    let group = spec.group();
    let caps = group.capabilities();
    if !spec.positive_cone() {
        return Err(EngineError::PositiveConeRequired {
            operation: "enumerate_representations",
        });
    }
    if !(caps.discrete || (caps.metric && caps.archimedean)) {
        return Err(EngineError::UnsupportedCapability {
            group: group.name(),
            operation: "enumerate_representations",
        });
    }
    if !group.is_positive(g) {
        return Ok(Vec::new());
    }

    let mut found: BTreeSet<Vec<G::Elem>> = BTreeSet::new();
    if caps.discrete {
        let truncations: Vec<_> = spec.sets().iter().map(|s| s.truncate(1)).collect();
        let mut prefix: Vec<G::Elem> = Vec::with_capacity(spec.arity());
        discrete_walk(spec, &truncations, g, &mut prefix, &mut found)?;
    } else {
        let positions: Vec<usize> = (0..spec.arity()).collect();
        let mut assignment: Vec<Option<G::Elem>> = vec![None; spec.arity()];
        dense_walk(spec, &positions, g, &mut assignment, &mut found)?;
    }

    Ok(found
        .into_iter()
        .map(|terms| Representation {
            target: g.clone(),
            terms,
        })
        .collect())
}

fn discrete_walk<G: OrderedGroup>(
    spec: &SumSpec<G>,
    truncations: &[std::sync::Arc<Vec<G::Elem>>],
    rem: &G::Elem,
    prefix: &mut Vec<G::Elem>,
    found: &mut BTreeSet<Vec<G::Elem>>,
) -> Result<(), EngineError> {
    let group = spec.group();
    let i = prefix.len();
    if i + 1 == truncations.len() {
        if truncations[i].binary_search(rem).is_ok() {
            let mut terms = prefix.clone();
            terms.push(rem.clone());
            found.insert(terms);
        }
        return Ok(());
    }
    for t in truncations[i].iter() {
        // positive terms remain, so the term must leave positive room
        if !group.lt(t, rem) {
            // truncations ascend; nothing further fits either
            if group.le(rem, t) {
                break;
            }
            continue;
        }
        prefix.push(t.clone());
        let next = group.sub(rem, t);
        discrete_walk(spec, truncations, &next, prefix, found)?;
        prefix.pop();
    }
    Ok(())
}

fn dense_walk<G: OrderedGroup>(
    spec: &SumSpec<G>,
    open_positions: &[usize],
    rem: &G::Elem,
    assignment: &mut Vec<Option<G::Elem>>,
    found: &mut BTreeSet<Vec<G::Elem>>,
) -> Result<(), EngineError> {
    let group = spec.group();
    if !group.is_positive(rem) {
        return Ok(());
    }
    if open_positions.len() == 1 {
        let j = open_positions[0];
        match spec.sets()[j].contains(rem) {
            Some(true) => {
                assignment[j] = Some(rem.clone());
                let terms: Vec<_> = assignment
                    .iter()
                    .map(|t| t.clone().expect("all positions assigned"))
                    .collect();
                assignment[j] = None;
                found.insert(terms);
                Ok(())
            }
            Some(false) => Ok(()),
            None => Err(EngineError::MembershipUndecided {
                set: spec.sets()[j].name(),
            }),
        }
    } else {
        let ell = group.lower_witness(rem, open_positions.len() as u32)?;
        let ell_mag = group
            .magnitude(&ell)
            .expect("dense route runs on metric instances");
        let k = resolution_below(&ell_mag);
        for (slot, &j) in open_positions.iter().enumerate() {
            let t = spec.sets()[j].truncate(k);
            let from = t.partition_point(|e| group.lt(e, &ell));
            let mut rest = open_positions.to_vec();
            rest.remove(slot);
            for e in t[from..].iter() {
                if group.lt(rem, e) {
                    break;
                }
                assignment[j] = Some(e.clone());
                let next = group.sub(rem, e);
                dense_walk(spec, &rest, &next, assignment, found)?;
                assignment[j] = None;
            }
        }
        Ok(())
    }
}

/// Counts of exact representations with all terms inside the truncation
/// at each scheduled resolution. Counts are nondecreasing along the
/// schedule because truncations are nested.
#[derive(Debug, Clone)]
pub struct CensusReport<E> {
    pub target: E,
    pub schedule: Vec<u32>,
    pub counts: Vec<u64>,
}

pub fn representation_census<G: OrderedGroup>(
    spec: &SumSpec<G>,
    g: &G::Elem,
    schedule: &[u32],
    budget: u64,
) -> Result<CensusReport<G::Elem>, EngineError> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EngineError::InvalidSchedule);
    }
    let group = spec.group();
    let mut counts = Vec::with_capacity(schedule.len());
    for &k in schedule {
        let truncations: Vec<_> = spec.sets().iter().map(|s| s.truncate(k)).collect();
        let mut estimate: u128 = 1;
        for t in &truncations {
            estimate = estimate.saturating_mul(t.len().max(1) as u128);
        }
        if estimate > budget as u128 {
            return Err(EngineError::BudgetExceeded { estimate, budget });
        }
        if truncations.iter().any(|t| t.is_empty()) {
            counts.push(0);
            continue;
        }

        // Suffix sum bounds for feasibility pruning: positions i.. can
        // only contribute a value in [suffix_min[i], suffix_max[i]].
        let n = truncations.len();
        let mut suffix_min = vec![group.zero(); n + 1];
        let mut suffix_max = vec![group.zero(); n + 1];
        for i in (0..n).rev() {
            suffix_min[i] = group.add(
                truncations[i].first().expect("nonempty"),
                &suffix_min[i + 1],
            );
            suffix_max[i] = group.add(
                truncations[i].last().expect("nonempty"),
                &suffix_max[i + 1],
            );
        }

        let mut count = 0u64;
        census_walk(
            group,
            &truncations,
            &suffix_min,
            &suffix_max,
            0,
            g,
            &mut count,
        );
        counts.push(count);
    }
    Ok(CensusReport {
        target: g.clone(),
        schedule: schedule.to_vec(),
        counts,
    })
}

fn census_walk<G: OrderedGroup>(
    group: &G,
    truncations: &[std::sync::Arc<Vec<G::Elem>>],
    suffix_min: &[G::Elem],
    suffix_max: &[G::Elem],
    i: usize,
    rem: &G::Elem,
    count: &mut u64,
) {
    let t = &truncations[i];
    if i + 1 == truncations.len() {
        if t.binary_search(rem).is_ok() {
            *count += 1;
        }
        return;
    }
    // Feasible terms satisfy rem - suffix_max[i+1] ≤ e ≤ rem - suffix_min[i+1].
    let lo = group.sub(rem, &suffix_max[i + 1]);
    let hi = group.sub(rem, &suffix_min[i + 1]);
    let from = t.partition_point(|e| group.lt(e, &lo));
    for e in t[from..].iter() {
        if group.lt(&hi, e) {
            break;
        }
        let next = group.sub(rem, e);
        census_walk(group, truncations, suffix_min, suffix_max, i + 1, &next, count);
    }
}

/// Classification of a three-set census outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrichotomyOutcome {
    /// Counts stabilized across the final two resolutions: finitely many
    /// representations in total.
    FiniteStable,
    /// The target sits in the `j`-th summand set (1-based); padding the
    /// other two positions with cancelling pairs yields infinitely many
    /// representations.
    Member(usize),
    /// The target is zero; cancelling pairs again give infinitely many.
    Zero,
    /// Counts keep growing far past the scale of the target without any
    /// sanctioned reason. Unreachable for genuinely locally cofinite
    /// inputs; reaching it means a summand descriptor is broken.
    Violation,
    /// Counts still growing, but the schedule is too shallow to rule
    /// anything out.
    Undetermined,
}

/// Threshold factor for calling a violation: the last scanned radius
/// must be at least this much smaller than the target's magnitude.
const VIOLATION_SCALE: u32 = 10;

pub fn trichotomy_check<G: OrderedGroup>(
    spec: &SumSpec<G>,
    g: &G::Elem,
    census: &CensusReport<G::Elem>,
) -> Result<TrichotomyOutcome, EngineError> {
    if spec.arity() != 3 {
        return Err(EngineError::SpecArity {
            expected: 3,
            got: spec.arity(),
        });
    }
    let group = spec.group();

    let n = census.counts.len();
    if n >= 2 && census.counts[n - 1] == census.counts[n - 2] {
        return Ok(TrichotomyOutcome::FiniteStable);
    }
    if group.is_zero(g) {
        return Ok(TrichotomyOutcome::Zero);
    }
    for (j, set) in spec.sets().iter().enumerate() {
        if set.contains(g) == Some(true) {
            return Ok(TrichotomyOutcome::Member(j + 1));
        }
    }
    // Counts are still growing and no sanctioned cause applies. Only
    // call it a violation once the scan depth dwarfs the target scale.
    if let (Some(&k_last), Some(mag)) = (census.schedule.last(), group.magnitude(g)) {
        let threshold = mag / BigRational::from_integer(BigInt::one() << VIOLATION_SCALE);
        if dyadic_radius(k_last) < threshold {
            return Ok(TrichotomyOutcome::Violation);
        }
    }
    Ok(TrichotomyOutcome::Undetermined)
}
