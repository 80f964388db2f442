//! Order dynamics of sumsets: accumulation points and decreasing
//! sequences.
//!
//! The engine in [`crate::sumset`] answers questions about single
//! targets and intervals. This module treats `E_n` as a stream: a
//! deterministic, restartable enumeration of distinct sumset elements,
//! each carrying its representation witness. On top of the stream sit
//! the two constructive procedures this crate exists for:
//!
//! * [`find_accumulation_point`] locates a point where sampled sumset
//!   elements concentrate, by interval bisection with a left-preference
//!   tie rule, then snaps the result to an exact net point;
//! * [`extract_decreasing`] peels a strictly decreasing sequence off the
//!   stream above a given point, the first-found element each round.
//!
//! The counting counterpart, [`below_accumulation_census`], watches the
//! open interval just below a point across growing resolutions: sumsets
//! of positive families never accumulate at a point from strictly
//! below, and the counts make that inspectable (the mirrored
//! [`above_accumulation_census`] is the documented counter-test, since
//! accumulation from above is normal).

use std::collections::{BTreeSet, HashSet};

use num::rational::BigRational;
use num::Signed;

use crate::group::OrderedGroup;
use crate::lcf0::Lcf0Set;
use crate::sumset::{build_net, EngineError, Representation, SumSpec};

/// Truncation depth past which a position sequence stops extending.
/// Finite sets exhaust naturally well before this; a set this sparse in
/// its first 512 resolutions has no business being streamed.
pub const STREAM_RESOLUTION_CAP: u32 = 512;

/// Index window per position under the lexicographic order, which would
/// otherwise never advance any position but the last.
const LEX_WINDOW: usize = 512;

/// Net-building allowance for accumulation snapping. Snapping wants the
/// coarsest net containing a candidate, so it never needs a large one.
const SNAP_NET_BUDGET: u64 = 1_000_000;
const SNAP_MAX_RESOLUTION: u32 = 12;

/// Tuple enumeration order for a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamOrder {
    /// Ascending total index weight, lexicographic within a weight. On
    /// unit fractions the index weight of a term is its denominator, so
    /// pairs arrive by denominator sum.
    ByDenominatorSum,
    /// Plain lexicographic odometer over index tuples, rightmost
    /// position fastest, each position windowed to its first
    /// [`LEX_WINDOW`] elements.
    Lexicographic,
}

impl StreamOrder {
    pub fn parse(s: &str) -> Option<StreamOrder> {
        match s {
            "by-denominator-sum" => Some(StreamOrder::ByDenominatorSum),
            "lexicographic" => Some(StreamOrder::Lexicographic),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StreamOrder::ByDenominatorSum => "by-denominator-sum",
            StreamOrder::Lexicographic => "lexicographic",
        }
    }
}

/// One streamed element with the ordered tuple that produced it.
#[derive(Debug, Clone)]
pub struct StreamItem<E> {
    pub value: E,
    pub witness: Representation<E>,
}

/// Restartable deterministic enumeration of distinct elements of `E_n`.
/// [`ElementStream::cursor`] starts a fresh pass; cursors are cheap and
/// single-consumer.
pub struct ElementStream<G: OrderedGroup> {
    spec: SumSpec<G>,
    order: StreamOrder,
}

impl<G: OrderedGroup> ElementStream<G> {
    pub fn new(spec: SumSpec<G>, order: StreamOrder) -> Self {
        ElementStream { spec, order }
    }

    pub fn spec(&self) -> &SumSpec<G> {
        &self.spec
    }

    pub fn order(&self) -> StreamOrder {
        self.order
    }

    pub fn cursor(&self) -> StreamCursor<G> {
        StreamCursor {
            spec: self.spec.clone(),
            order: self.order,
            positions: self
                .spec
                .sets()
                .iter()
                .map(|set| PositionSeq::new(set.clone()))
                .collect(),
            seen: HashSet::new(),
            weight: self.spec.arity(),
            pending: Vec::new(),
            odometer: None,
            started: false,
            done: false,
        }
    }
}

/// Canonical per-position element sequence: the truncation batches
/// `T ∩ (u_{k-1} \ u_k)` for k = 0, 1, 2, …, each batch descending. On
/// unit fractions this is 1, 1/2, 1/3, …, so the index of a term plus
/// one is its denominator.
struct PositionSeq<G: OrderedGroup> {
    set: Lcf0Set<G>,
    items: Vec<G::Elem>,
    next_k: u32,
    exhausted: bool,
}

impl<G: OrderedGroup> PositionSeq<G> {
    fn new(set: Lcf0Set<G>) -> Self {
        PositionSeq {
            set,
            items: Vec::new(),
            next_k: 0,
            exhausted: false,
        }
    }

    fn get(&mut self, i: usize) -> Option<&G::Elem> {
        while self.items.len() <= i && !self.exhausted {
            if self.next_k > STREAM_RESOLUTION_CAP {
                self.exhausted = true;
                break;
            }
            let whole = self.set.truncate(self.next_k);
            let prev_len = if self.next_k == 0 {
                0
            } else {
                self.set.truncate(self.next_k - 1).len()
            };
            // Truncations are nested, so the fresh batch is exactly the
            // elements of the deeper truncation missing from the prior
            // one. Two sorted passes keep it linear.
            if whole.len() > prev_len {
                let prev = if self.next_k == 0 {
                    None
                } else {
                    Some(self.set.truncate(self.next_k - 1))
                };
                let mut batch: Vec<G::Elem> = match prev {
                    None => whole.iter().cloned().collect(),
                    Some(p) => {
                        let mut out = Vec::with_capacity(whole.len() - prev_len);
                        let mut pi = p.iter().peekable();
                        for e in whole.iter() {
                            if pi.peek().map_or(false, |q| *q == e) {
                                pi.next();
                            } else {
                                out.push(e.clone());
                            }
                        }
                        out
                    }
                };
                batch.reverse();
                self.items.extend(batch);
            }
            self.next_k += 1;
        }
        self.items.get(i)
    }

    fn known_len(&self) -> Option<usize> {
        if self.exhausted {
            Some(self.items.len())
        } else {
            None
        }
    }
}

pub struct StreamCursor<G: OrderedGroup> {
    spec: SumSpec<G>,
    order: StreamOrder,
    positions: Vec<PositionSeq<G>>,
    seen: HashSet<G::Elem>,
    // weight-order state: tuples of the current weight, reversed so
    // pop() yields them in lexicographic order
    weight: usize,
    pending: Vec<Vec<usize>>,
    // lexicographic odometer, None before the first step
    odometer: Option<Vec<usize>>,
    started: bool,
    done: bool,
}

impl<G: OrderedGroup> StreamCursor<G> {
    fn emit(&mut self, indices: &[usize]) -> Option<StreamItem<G::Elem>> {
        let group = self.spec.group().clone();
        let mut terms = Vec::with_capacity(indices.len());
        for (j, &i) in indices.iter().enumerate() {
            terms.push(self.positions[j].get(i)?.clone());
        }
        let value = group.sum_left_to_right(terms.iter());
        if !self.seen.insert(value.clone()) {
            return None;
        }
        Some(StreamItem {
            witness: Representation {
                target: value.clone(),
                terms,
            },
            value,
        })
    }

    /// Index tuples with `Σ(i_j + 1) = weight`, in lexicographic order,
    /// respecting per-position exhaustion.
    fn tuples_of_weight(&mut self, weight: usize) -> Vec<Vec<usize>> {
        let n = self.positions.len();
        let mut out = Vec::new();
        let mut prefix = vec![0usize; n];
        self.weight_walk(weight, 0, &mut prefix, &mut out);
        out
    }

    fn weight_walk(
        &mut self,
        remaining: usize,
        j: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = self.positions.len();
        if j + 1 == n {
            let i = remaining - 1;
            if self.positions[j].get(i).is_some() {
                prefix[j] = i;
                out.push(prefix.clone());
            }
            return;
        }
        // later positions need weight ≥ 1 each
        let max_i = remaining - (n - j - 1) - 1;
        for i in 0..=max_i {
            if self.positions[j].get(i).is_none() {
                break;
            }
            prefix[j] = i;
            self.weight_walk(remaining - (i + 1), j + 1, prefix, out);
        }
    }

    fn next_weight_tuple(&mut self) -> Option<Vec<usize>> {
        loop {
            if let Some(t) = self.pending.pop() {
                return Some(t);
            }
            // A fresh weight. Stop only when every position is known
            // exhausted and the weight exceeds what they can carry.
            if let Some(total) = self
                .positions
                .iter()
                .map(|p| p.known_len())
                .sum::<Option<usize>>()
            {
                if self.weight > total {
                    return None;
                }
            }
            let w = self.weight;
            self.weight += 1;
            let mut tuples = self.tuples_of_weight(w);
            tuples.reverse();
            self.pending = tuples;
        }
    }

    fn next_lex_tuple(&mut self) -> Option<Vec<usize>> {
        let n = self.positions.len();
        match self.odometer.take() {
            None if !self.started => {
                self.started = true;
                let first = vec![0usize; n];
                for (j, &i) in first.iter().enumerate() {
                    if self.positions[j].get(i).is_none() {
                        return None;
                    }
                }
                self.odometer = Some(first.clone());
                Some(first)
            }
            None => None,
            Some(mut idx) => {
                // rightmost position varies fastest
                for j in (0..n).rev() {
                    let next = idx[j] + 1;
                    if next < LEX_WINDOW && self.positions[j].get(next).is_some() {
                        idx[j] = next;
                        for slot in idx.iter_mut().skip(j + 1) {
                            *slot = 0;
                        }
                        self.odometer = Some(idx.clone());
                        return Some(idx);
                    }
                }
                None
            }
        }
    }
}

impl<G: OrderedGroup> Iterator for StreamCursor<G> {
    type Item = StreamItem<G::Elem>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            let tuple = match self.order {
                StreamOrder::ByDenominatorSum => self.next_weight_tuple(),
                StreamOrder::Lexicographic => self.next_lex_tuple(),
            };
            match tuple {
                None => {
                    self.done = true;
                    return None;
                }
                Some(t) => {
                    if let Some(item) = self.emit(&t) {
                        return Some(item);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccumulationOutcome<E> {
    Found(E),
    /// The stream ran out before `samples` distinct elements appeared.
    NoneFound,
}

/// Locates a concentration point of the stream: draws `samples` distinct
/// elements, then bisects the bounding interval (anchored at the group
/// origin, the one point every padded net contains) keeping whichever
/// half holds more points, left on ties. Descent stops at `depth`, or as
/// soon as the kept half no longer holds a strict majority of the
/// original sample, which is where concentration lives. The lower
/// endpoint then snaps to the smallest net point inside the final
/// interval at the coarsest resolution offering one.
pub fn find_accumulation_point<G: OrderedGroup>(
    stream: &ElementStream<G>,
    samples: usize,
    depth: u32,
) -> Result<AccumulationOutcome<G::Elem>, EngineError> {
    let spec = stream.spec();
    let group = spec.group();
    if !group.capabilities().metric {
        return Err(EngineError::UnsupportedCapability {
            group: group.name(),
            operation: "find_accumulation_point",
        });
    }
    if samples < 2 {
        return Err(EngineError::TooFewSamples { got: samples });
    }

    let mut cursor = stream.cursor();
    let mut points: Vec<G::Elem> = Vec::with_capacity(samples);
    while points.len() < samples {
        match cursor.next() {
            Some(item) => points.push(item.value),
            None => return Ok(AccumulationOutcome::NoneFound),
        }
    }

    let zero = group.zero();
    let min = points.iter().min().expect("samples ≥ 2").clone();
    let max = points.iter().max().expect("samples ≥ 2").clone();
    let mut lo = if group.lt(&min, &zero) { min } else { zero };
    let mut hi = max;
    let mut kept = points;

    for _ in 0..depth {
        if group.equals(&lo, &hi) {
            break;
        }
        let mid = match group.midpoint(&lo, &hi) {
            Some(m) => m,
            None => break,
        };
        let (left, right): (Vec<_>, Vec<_>) =
            kept.into_iter().partition(|x| group.le(x, &mid));
        let take_left = left.len() >= right.len();
        let winner = if take_left { left } else { right };
        if winner.len() * 2 <= samples {
            // Concentration fell to half the original sample or less;
            // splitting further would chase noise.
            break;
        }
        if take_left {
            hi = mid;
        } else {
            lo = mid;
        }
        kept = winner;
    }

    for k in 1..=SNAP_MAX_RESOLUTION {
        match build_net(spec, k, SNAP_NET_BUDGET) {
            Ok(net) => {
                let from = net.points.partition_point(|p| group.lt(p, &lo));
                if let Some(p) = net.points.get(from) {
                    if group.le(p, &hi) {
                        return Ok(AccumulationOutcome::Found(p.clone()));
                    }
                }
            }
            Err(EngineError::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(AccumulationOutcome::Found(lo))
}

/// A strictly decreasing run of stream elements above `point`, each with
/// its witness, re-checkable with nothing but the trace.
#[derive(Debug, Clone)]
pub struct DecreasingTrace<E> {
    pub point: E,
    pub requested: usize,
    pub terms: Vec<StreamItem<E>>,
}

#[derive(Debug, Clone)]
pub enum ExtractOutcome<E> {
    Complete(DecreasingTrace<E>),
    /// Some round scanned `budget` emissions (or the whole stream)
    /// without finding an element in its window; the partial trace is
    /// still a valid decreasing run.
    BudgetExhausted(DecreasingTrace<E>),
}

impl<E> ExtractOutcome<E> {
    pub fn trace(&self) -> &DecreasingTrace<E> {
        match self {
            ExtractOutcome::Complete(t) | ExtractOutcome::BudgetExhausted(t) => t,
        }
    }
}

/// Extracts a strictly decreasing sequence from the stream: each round
/// restarts the stream and takes the first element strictly between
/// `point` and the previous term. First-found makes the result a pure
/// function of the stream order.
pub fn extract_decreasing<G: OrderedGroup>(
    stream: &ElementStream<G>,
    point: &G::Elem,
    length: usize,
    budget: u64,
) -> ExtractOutcome<G::Elem> {
    let group = stream.spec().group().clone();
    let mut terms: Vec<StreamItem<G::Elem>> = Vec::with_capacity(length);
    while terms.len() < length {
        let ceiling = terms.last().map(|t| t.value.clone());
        let mut cursor = stream.cursor();
        let mut spent = 0u64;
        let mut found = None;
        while spent < budget {
            match cursor.next() {
                None => break,
                Some(item) => {
                    spent += 1;
                    let above = group.lt(point, &item.value);
                    let below = ceiling
                        .as_ref()
                        .map_or(true, |c| group.lt(&item.value, c));
                    if above && below {
                        found = Some(item);
                        break;
                    }
                }
            }
        }
        match found {
            Some(item) => terms.push(item),
            None => {
                return ExtractOutcome::BudgetExhausted(DecreasingTrace {
                    point: point.clone(),
                    requested: length,
                    terms,
                })
            }
        }
    }
    ExtractOutcome::Complete(DecreasingTrace {
        point: point.clone(),
        requested: length,
        terms,
    })
}

enum Side {
    Below,
    Above,
}

fn net_interval_census<G: OrderedGroup>(
    spec: &SumSpec<G>,
    point: &G::Elem,
    eta: &BigRational,
    side: Side,
    schedule: &[u32],
    budget: u64,
) -> Result<Vec<u64>, EngineError> {
    let group = spec.group();
    if !group.capabilities().metric {
        return Err(EngineError::UnsupportedCapability {
            group: group.name(),
            operation: "net_interval_census",
        });
    }
    if !eta.is_positive() {
        return Err(EngineError::EmptyInterval);
    }
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EngineError::InvalidSchedule);
    }
    let prune = spec.positive_cone();
    let mut counts = Vec::with_capacity(schedule.len());
    for &k in schedule {
        let truncations: Vec<_> = spec.sets().iter().map(|s| s.truncate(k)).collect();
        let mut estimate: u128 = 1;
        for t in &truncations {
            estimate = estimate.saturating_mul(t.len() as u128 + 1);
        }
        if estimate > budget as u128 {
            return Err(EngineError::BudgetExceeded { estimate, budget });
        }
        let levels: Vec<&[G::Elem]> = truncations.iter().map(|t| t.as_slice()).collect();
        let mut inside = BTreeSet::new();
        window_scan(
            group,
            &levels,
            group.zero(),
            point,
            eta,
            &side,
            prune,
            &mut inside,
        );
        counts.push(inside.len() as u64);
    }
    Ok(counts)
}

/// Collects the distinct zero-padded sums that land strictly inside the
/// window, walking one truncation per position. The full net is never
/// materialized: the last position is resolved by binary search for the
/// contiguous in-window run (truncations are ascending and the order is
/// translation invariant, so `prefix + t` crosses `point` exactly where
/// `t` crosses `point - prefix`), and on positive-cone specs interior
/// prefixes that have already passed the window's far edge are cut off
/// along with every larger sibling term.
fn window_scan<G: OrderedGroup>(
    group: &G,
    levels: &[&[G::Elem]],
    prefix: G::Elem,
    point: &G::Elem,
    eta: &BigRational,
    side: &Side,
    prune: bool,
    inside: &mut BTreeSet<G::Elem>,
) {
    let Some((head, rest)) = levels.split_first() else {
        insert_if_in_window(group, prefix, point, eta, side, inside);
        return;
    };
    if rest.is_empty() {
        insert_if_in_window(group, prefix.clone(), point, eta, side, inside);
        let bound = group.sub(point, &prefix);
        match side {
            Side::Below => {
                let cut = head.partition_point(|t| group.lt(t, &bound));
                for t in head[..cut].iter().rev() {
                    let sum = group.add(&prefix, t);
                    let d = group
                        .magnitude(&group.sub(point, &sum))
                        .expect("metric checked above");
                    if d >= *eta {
                        break;
                    }
                    inside.insert(sum);
                }
            }
            Side::Above => {
                let cut = head.partition_point(|t| !group.lt(&bound, t));
                for t in head[cut..].iter() {
                    let sum = group.add(&prefix, t);
                    let d = group
                        .magnitude(&group.sub(point, &sum))
                        .expect("metric checked above");
                    if d >= *eta {
                        break;
                    }
                    inside.insert(sum);
                }
            }
        }
        return;
    }
    window_scan(group, rest, prefix.clone(), point, eta, side, prune, inside);
    for term in head.iter() {
        let next = group.add(&prefix, term);
        if prune && past_far_edge(group, &next, point, eta, side) {
            break;
        }
        window_scan(group, rest, next, point, eta, side, prune, inside);
    }
}

fn insert_if_in_window<G: OrderedGroup>(
    group: &G,
    sum: G::Elem,
    point: &G::Elem,
    eta: &BigRational,
    side: &Side,
    inside: &mut BTreeSet<G::Elem>,
) {
    let right_side = match side {
        Side::Below => group.lt(&sum, point),
        Side::Above => group.lt(point, &sum),
    };
    if !right_side {
        return;
    }
    let d = group
        .magnitude(&group.sub(point, &sum))
        .expect("metric checked above");
    if d < *eta {
        inside.insert(sum);
    }
}

/// True when no extension of a positive-cone prefix can re-enter the
/// window: later terms only push the sum further past the far edge.
fn past_far_edge<G: OrderedGroup>(
    group: &G,
    prefix: &G::Elem,
    point: &G::Elem,
    eta: &BigRational,
    side: &Side,
) -> bool {
    match side {
        Side::Below => !group.lt(prefix, point),
        Side::Above => {
            group.lt(point, prefix)
                && group
                    .magnitude(&group.sub(point, prefix))
                    .expect("metric checked above")
                    >= *eta
        }
    }
}

/// Net points in the open interval `(point − eta, point)` at each
/// scheduled resolution. Sumsets of positive-cone families never
/// accumulate at a point from strictly below, and these counts are the
/// finite shadow of that fact.
pub fn below_accumulation_census<G: OrderedGroup>(
    spec: &SumSpec<G>,
    point: &G::Elem,
    eta: &BigRational,
    schedule: &[u32],
    budget: u64,
) -> Result<Vec<u64>, EngineError> {
    net_interval_census(spec, point, eta, Side::Below, schedule, budget)
}

/// Mirror counter-test over `(point, point + eta)`: accumulation from
/// above is normal, so these counts are expected to keep growing.
pub fn above_accumulation_census<G: OrderedGroup>(
    spec: &SumSpec<G>,
    point: &G::Elem,
    eta: &BigRational,
    schedule: &[u32],
    budget: u64,
) -> Result<Vec<u64>, EngineError> {
    net_interval_census(spec, point, eta, Side::Above, schedule, budget)
}
