//! Disjoint unions of half-open circular arcs: the painted / occupied set.

use std::collections::BTreeMap;

use super::TOL;
use crate::error::{Error, Result};

/// A half-open arc `[start, start + len)` on the circle; it wraps through 0
/// when `start + len > 1`. A full circle is the single arc `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

/// Total order on nonnegative floats, for use as a `BTreeMap` key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// A disjoint union of half-open arcs with no two arcs adjacent: blocks that
/// touch (up to [`TOL`]) merge into one. Internally arcs are stored split at
/// the origin, so no stored segment wraps; a tail piece ending at 1 and a
/// head piece starting at 0 are one circular block, re-joined by [`arcs`]
/// and [`ranked_lengths`].
///
/// [`arcs`]: ArcSet::arcs
/// [`ranked_lengths`]: ArcSet::ranked_lengths
#[derive(Debug, Clone, Default)]
pub struct ArcSet {
    segs: BTreeMap<OrdF64, f64>,
    total: f64,
}

impl ArcSet {
    pub fn new() -> Self {
        ArcSet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    /// Total occupied length.
    pub fn total_len(&self) -> f64 {
        self.total
    }

    pub fn is_full(&self) -> bool {
        self.total >= 1.0 - TOL
    }

    ///
    /// Fails with [`Error::OverlappingArc`] when the new arc overlaps an
    /// existing block by more than the tolerance.
    pub fn insert(&mut self, start: f64, len: f64) -> Result<()> {
        if !(len > 0.0) || len > 1.0 + TOL {
            return Err(Error::InvalidParameter(format!("arc length {len}")));
        }
        let len = len.min(1.0);
        let start = if (0.0..1.0).contains(&start) {
            start
        } else {
            start.rem_euclid(1.0)
        };
        let end = start + len;
        if end > 1.0 + TOL {
            // wraps through the origin: insert the two pieces
            self.insert_piece(start, 1.0 - start)?;
            return self.insert_piece(0.0, end - 1.0);
        }
        self.insert_piece(start, len)
    }

    /// Pure-value flavour of [`insert`](ArcSet::insert).
    pub fn with_arc(mut self, start: f64, len: f64) -> Result<Self> {
        self.insert(start, len)?;
        Ok(self)
    }

    fn insert_piece(&mut self, a: f64, len: f64) -> Result<()> {
        if len <= 0.0 {
            return Ok(());
        }
        let b = (a + len).min(1.0);
        let mut new_a = a;
        // lengths add up instead of being re-derived from endpoints, so a
        // chain of inserts conserves total length to rounding
        let mut new_len = len;
        let mut absorbed = Vec::new();

        // predecessor: may overlap, touch, or swallow the piece
        if let Some((&OrdF64(ps), &plen)) = self.segs.range(..=OrdF64(a)).next_back() {
            let pe = ps + plen;
            if pe > a + TOL {
                return Err(Error::OverlappingArc);
            }
            if pe >= a - TOL {
                new_a = ps;
                new_len += plen;
                absorbed.push((ps, plen));
            }
        }
        // first successor starting at or after `a`: strictly inside the new
        // piece is an overlap, within tolerance of its right end is a touch
        if let Some((&OrdF64(ss), &slen)) = self.segs.range(OrdF64(a)..).next() {
            if ss < b - TOL {
                return Err(Error::OverlappingArc);
            }
            if ss <= b + TOL {
                new_len += slen;
                absorbed.push((ss, slen));
            }
        }

        for (s, l) in &absorbed {
            self.segs.remove(&OrdF64(*s));
            self.total -= *l;
        }
        self.segs.insert(OrdF64(new_a), new_len.min(1.0));
        self.total += new_len.min(1.0);
        Ok(())
    }

    /// The stored segment containing `x`, if any.
    pub(crate) fn seg_at(&self, x: f64) -> Option<(f64, f64)> {
        let (&OrdF64(s), &l) = self.segs.range(..=OrdF64(x)).next_back()?;
        (x < s + l).then_some((s, l))
    }

    /// First stored segment with start at or clockwise after `x`,
    /// circularly. A segment starting within [`TOL`] behind `x` (endpoint
    /// rounding drift) counts as being at `x`.
    pub(crate) fn next_seg_after(&self, x: f64) -> Option<(f64, f64)> {
        let key = if x > TOL { x - TOL } else { 0.0 };
        self.segs
            .range(OrdF64(key)..)
            .next()
            .or_else(|| self.segs.iter().next())
            .map(|(&OrdF64(s), &l)| (s, l))
    }

    pub(crate) fn remove_seg(&mut self, start: f64) {
        if let Some(len) = self.segs.remove(&OrdF64(start)) {
            self.total -= len;
        }
    }

    /// True when `x` is painted. Right endpoints of blocks are free.
    pub fn contains(&self, x: f64) -> bool {
        self.seg_at(x).is_some()
    }

    /// The circular block containing `x`, joined through the origin.
    pub fn block_containing(&self, x: f64) -> Option<Arc> {
        let (s, l) = self.seg_at(x)?;
        Some(self.join_block(s, l))
    }

    /// True when the head piece at 0 and the tail piece ending at 1 form one
    /// circular block.
    fn origin_joined(&self) -> Option<((f64, f64), (f64, f64))> {
        if self.segs.len() < 2 {
            return None;
        }
        let (&OrdF64(hs), &hl) = self.segs.iter().next().unwrap();
        let (&OrdF64(ts), &tl) = self.segs.iter().next_back().unwrap();
        (hs <= TOL && ts + tl >= 1.0 - TOL).then_some(((hs, hl), (ts, tl)))
    }

    fn join_block(&self, s: f64, l: f64) -> Arc {
        if let Some(((hs, hl), (ts, tl))) = self.origin_joined() {
            if s == hs || s == ts {
                return Arc {
                    start: ts,
                    len: tl + hl,
                };
            }
        }
        Arc { start: s, len: l }
    }

    /// The arcs of the set in clockwise order, joined through the origin.
    pub fn arcs(&self) -> Vec<Arc> {
        if self.segs.is_empty() {
            return Vec::new();
        }
        if self.is_full() {
            return vec![Arc {
                start: 0.0,
                len: self.total,
            }];
        }
        let items: Vec<(f64, f64)> = self.segs.iter().map(|(&OrdF64(s), &l)| (s, l)).collect();
        if let Some(((_, hl), (ts, tl))) = self.origin_joined() {
            let mut out: Vec<Arc> = items[1..items.len() - 1]
                .iter()
                .map(|&(s, l)| Arc { start: s, len: l })
                .collect();
            out.push(Arc {
                start: ts,
                len: tl + hl,
            });
            out
        } else {
            items
                .into_iter()
                .map(|(s, l)| Arc { start: s, len: l })
                .collect()
        }
    }

    /// Circular block lengths ranked nonincreasing.
    pub fn ranked_lengths(&self) -> super::RankedMassPartition {
        let lens: Vec<f64> = self.arcs().into_iter().map(|a| a.len).collect();
        super::RankedMassPartition::from_unsorted(lens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn insert_into_empty() {
        let set = ArcSet::new().with_arc(0.2, 0.3).unwrap();
        assert_eq!(set.arcs(), vec![Arc { start: 0.2, len: 0.3 }]);
    }

    #[test]
    fn adjacency_merges() {
        let set = ArcSet::new()
            .with_arc(0.2, 0.3)
            .unwrap()
            .with_arc(0.5, 0.3)
            .unwrap();
        let arcs = set.arcs();
        assert_eq!(arcs.len(), 1);
        assert_abs_diff_eq!(arcs[0].start, 0.2, epsilon = TOL);
        assert_abs_diff_eq!(arcs[0].len, 0.6, epsilon = TOL);
    }

    #[test]
    fn wrap_around_merge_is_one_arc() {
        let set = ArcSet::new()
            .with_arc(0.9, 0.1)
            .unwrap()
            .with_arc(0.0, 0.1)
            .unwrap();
        let arcs = set.arcs();
        assert_eq!(arcs.len(), 1);
        assert_abs_diff_eq!(arcs[0].start, 0.9, epsilon = TOL);
        assert_abs_diff_eq!(arcs[0].len, 0.2, epsilon = TOL);
        let ranked = set.ranked_lengths();
        assert_eq!(ranked.masses().len(), 1);
        assert_abs_diff_eq!(ranked.masses()[0], 0.2, epsilon = TOL);
    }

    #[test]
    fn overlap_is_rejected() {
        let set = ArcSet::new().with_arc(0.2, 0.3).unwrap();
        assert_eq!(set.with_arc(0.4, 0.2).unwrap_err(), Error::OverlappingArc);
        let set = ArcSet::new().with_arc(0.2, 0.3).unwrap();
        assert_eq!(set.with_arc(0.1, 0.5).unwrap_err(), Error::OverlappingArc);
        // swallowed by predecessor
        let set = ArcSet::new().with_arc(0.2, 0.3).unwrap();
        assert_eq!(set.with_arc(0.3, 0.1).unwrap_err(), Error::OverlappingArc);
    }

    #[test]
    fn ranked_lengths_reads_off() {
        let set = ArcSet::new()
            .with_arc(0.2, 0.3)
            .unwrap()
            .with_arc(0.7, 0.1)
            .unwrap();
        let got = set.ranked_lengths();
        assert_eq!(got.masses().len(), 2);
        assert_abs_diff_eq!(got.masses()[0], 0.3, epsilon = TOL);
        assert_abs_diff_eq!(got.masses()[1], 0.1, epsilon = TOL);
        assert!(ArcSet::new().ranked_lengths().masses().is_empty());
        let full = ArcSet::new().with_arc(0.0, 1.0).unwrap();
        assert_eq!(full.ranked_lengths().masses(), &[1.0]);
        assert!(full.is_full());
    }

    #[test]
    fn wrapping_insert_splits_and_contains() {
        // dyadic endpoints make the wrap arithmetic exact
        let set = ArcSet::new().with_arc(0.875, 0.25).unwrap();
        assert!(set.contains(0.9375));
        assert!(set.contains(0.0625));
        assert!(!set.contains(0.125)); // right endpoint is free
        assert!(!set.contains(0.5));
        let block = set.block_containing(0.0625).unwrap();
        assert_abs_diff_eq!(block.start, 0.875, epsilon = TOL);
        assert_abs_diff_eq!(block.len, 0.25, epsilon = TOL);
    }

    proptest! {
        /// Valid disjoint inserts conserve total length and keep ranking
        /// invariant under common rotation and insertion order.
        #[test]
        fn conservation_and_rotation(lens in proptest::collection::vec(0.01f64..0.08, 1..8),
                                      delta in 0.0f64..1.0,
                                      seed in 0u64..1000) {
            // lay the arcs out with gaps so they stay disjoint
            let mut starts = Vec::new();
            let mut x = 0.0;
            for l in &lens {
                starts.push(x);
                x += l + 0.02;
            }
            prop_assume!(x <= 1.0);

            let mut set = ArcSet::new();
            let mut total = 0.0;
            // insertion order shuffled by a cheap LCG on the seed
            let mut order: Vec<usize> = (0..lens.len()).collect();
            let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            for i in (1..order.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                order.swap(i, (s >> 33) as usize % (i + 1));
            }
            for &i in &order {
                set.insert(starts[i], lens[i]).unwrap();
                total += lens[i];
                prop_assert!((set.total_len() - total).abs() <= TOL);
            }

            let mut rotated = ArcSet::new();
            for &i in &order {
                rotated.insert((starts[i] + delta).rem_euclid(1.0), lens[i]).unwrap();
            }
            let a = set.ranked_lengths();
            let b = rotated.ranked_lengths();
            prop_assert_eq!(a.masses().len(), b.masses().len());
            for (x, y) in a.masses().iter().zip(b.masses()) {
                prop_assert!((x - y).abs() <= TOL);
            }
        }
    }
}
