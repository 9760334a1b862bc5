//! Per-index Poisson clocks shared between coupled runs.
//!
//! Clock `i` rings at rate `t^i`. Indices below [`ClockStreams::cut`] each own
//! a ChaCha stream keyed by `(seed, sample)` with stream id derived from `i`,
//! so draw `j` of clock `i` is a fixed function of `(seed, sample, i, j)`.
//! All indices `>= cut` are served by one superposed stream of rate
//! `t^cut / (1 - t)` whose rings carry an independent geometric mark
//! `i = cut + K`, `Pr(K = k) = (1 - t) t^k`. This is the same law as
//! independent clocks and is shared by every run with the same cut.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_key, SimRng};
use rand::SeedableRng;

const CLOCK_SALT: u64 = 0xc10c_c10c;
const AGGREGATE_STREAM: u64 = u64::MAX;

/// Default first index served by the superposed tail stream.
pub const DEFAULT_CUT: i64 = 4;

/// Reproducible clock family for one Monte Carlo sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockStreams {
    pub seed: u64,
    pub sample: u64,
    pub t: f64,
    pub cut: i64,
}

impl ClockStreams {
    pub fn new(seed: u64, sample: u64, t: f64) -> Self {
        ClockStreams { seed, sample, t, cut: DEFAULT_CUT }
    }

    fn stream_rng(&self, stream: u64) -> SimRng {
        let mut r = SimRng::from_seed(derive_key(self.seed ^ CLOCK_SALT, self.sample));
        r.set_stream(stream);
        r
    }

    /// Ring-time iterator of the individual clock `i < cut`.
    pub fn clock(&self, i: i64) -> Clock {
        assert!(i < self.cut, "index {i} is served by the tail stream");
        Clock {
            rng: self.stream_rng(i as u64 ^ (1 << 63)),
            rate: self.t.powi(i as i32),
            time: 0.0,
        }
    }

    /// Superposed stream for all indices `>= cut`.
    pub fn tail(&self) -> TailClock {
        TailClock {
            clock: Clock {
                rng: self.stream_rng(AGGREGATE_STREAM),
                rate: self.t.powi(self.cut as i32) / (1.0 - self.t),
                time: 0.0,
            },
            cut: self.cut,
            log_t: self.t.ln(),
        }
    }
}

/// Uniform in the open interval (0, 1).
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Exponential waiting time with the given rate.
pub(crate) fn exp_wait<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -open_unit(rng).ln() / rate
}

/// One Poisson clock.
pub struct Clock {
    rng: SimRng,
    rate: f64,
    time: f64,
}

impl Clock {
    /// Time of the next ring.
    pub fn next_ring(&mut self) -> f64 {
        self.time += exp_wait(&mut self.rng, self.rate);
        self.time
    }
}

/// The superposed tail clock with geometric marks.
pub struct TailClock {
    clock: Clock,
    cut: i64,
    log_t: f64,
}

impl TailClock {
    /// `(time, index)` of the next ring among indices `>= cut`.
    pub fn next_ring(&mut self) -> (f64, i64) {
        let time = self.clock.next_ring();
        let k = (open_unit(&mut self.clock.rng).ln() / self.log_t).floor() as i64;
        (time, self.cut + k)
    }
}
