//! Merged ring times of a family of clocks, in time order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::clocks::{Clock, ClockStreams, TailClock};

struct Pending {
    time: f64,
    index: i64,
    slot: Slot,
}

enum Slot {
    Single(Clock),
    Tail(TailClock),
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // Reversed: BinaryHeap pops the earliest ring first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.index.cmp(&self.index))
    }
}

/// Rings of the clocks with index in `lo..=hi` (`hi = None` for no upper
/// bound). Indices can be retired from below as walkers freeze; retired
/// clocks are no longer drawn.
pub struct RingSchedule {
    heap: BinaryHeap<Pending>,
    floor: i64,
    hi: Option<i64>,
}

impl RingSchedule {
    pub fn new(clocks: &ClockStreams, lo: i64, hi: Option<i64>) -> Self {
        let mut heap = BinaryHeap::new();
        let single_hi = hi.map_or(clocks.cut - 1, |h| h.min(clocks.cut - 1));
        for i in lo..=single_hi {
            let mut c = clocks.clock(i);
            heap.push(Pending { time: c.next_ring(), index: i, slot: Slot::Single(c) });
        }
        if hi.is_none_or(|h| h >= clocks.cut) {
            let mut tail = clocks.tail();
            let (time, index) = tail.next_ring();
            heap.push(Pending { time, index, slot: Slot::Tail(tail) });
        }
        RingSchedule { heap, floor: lo, hi }
    }

    /// Stops drawing clocks with index below `floor`.
    pub fn retire_below(&mut self, floor: i64) {
        self.floor = self.floor.max(floor);
    }

    /// Next `(time, index)` among live indices, or `None` once every clock
    /// is retired.
    pub fn next_ring(&mut self) -> Option<(f64, i64)> {
        if self.hi.is_some_and(|h| self.floor > h) {
            return None;
        }
        loop {
            let Pending { time, index, slot } = self.heap.pop()?;
            match slot {
                Slot::Single(mut c) => {
                    if index < self.floor {
                        continue;
                    }
                    self.heap.push(Pending { time: c.next_ring(), index, slot: Slot::Single(c) });
                    return Some((time, index));
                }
                Slot::Tail(mut tail) => {
                    let (nt, ni) = tail.next_ring();
                    self.heap.push(Pending { time: nt, index: ni, slot: Slot::Tail(tail) });
                    if index < self.floor || self.hi.is_some_and(|h| index > h) {
                        continue;
                    }
                    return Some((time, index));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rings_are_ordered_and_in_range() {
        let clocks = ClockStreams::new(5, 0, 0.5);
        let mut s = RingSchedule::new(&clocks, -2, Some(6));
        let mut prev = 0.0;
        for _ in 0..500 {
            let (time, i) = s.next_ring().unwrap();
            assert!(time >= prev && (-2..=6).contains(&i));
            prev = time;
        }
        s.retire_below(10);
        assert!(s.next_ring().is_none());
    }

    #[test]
    fn same_clock_same_times_across_ranges() {
        let clocks = ClockStreams::new(5, 1, 0.5);
        let collect = |lo| {
            let mut s = RingSchedule::new(&clocks, lo, None);
            let mut v = Vec::new();
            while let Some((time, i)) = s.next_ring() {
                if time > 3.0 {
                    break;
                }
                if i >= 0 {
                    v.push((time, i));
                }
            }
            v
        };
        assert_eq!(collect(0), collect(-3));
    }
}
