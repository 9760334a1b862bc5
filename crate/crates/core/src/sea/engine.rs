//! The simulators: finite systems, truncated configurations (Gillespie),
//! the edge variant, and clock-driven depth approximations.

use rand::Rng;

use super::clocks::{exp_wait, open_unit, ClockStreams};
use super::schedule::RingSchedule;
use super::state::TruncState;
use super::trajectory::{Event, Initial, Trajectory};
use crate::error::{Error, Result};
use crate::signatures::{Signature, WindowSignature};

/// Hard cap on processed rings per run.
pub const DEFAULT_EVENT_BUDGET: u64 = 50_000_000;

const RATE_CHECK_EVERY: u64 = 1000;

fn check_horizon(t: f64, times: &[f64]) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} outside (0,1)")));
    }
    if times.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain(format!("times {times:?} must be finite, nonnegative, nondecreasing")));
    }
    Ok(())
}

/// Applies a ring of clock `i` (1-based) to walkers `values`: the top of
/// walker `i`'s equal-value block moves up. Returns the moved walker.
pub fn finite_jump(values: &mut [i64], i: usize) -> usize {
    let mut k = i - 1;
    while k > 0 && values[k - 1] == values[k] {
        k -= 1;
    }
    values[k] += 1;
    debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
    k + 1
}

/// Finite system of walkers `1..=n` started at `nu`, driven by `clocks`
/// (walker `i` rings at rate `t^i`). A blocked ring is taken by the top of
/// the walker's equal-value block.
pub fn simulate_finite(nu: &Signature, horizon: f64, clocks: &ClockStreams) -> Result<Trajectory> {
    check_horizon(clocks.t, &[horizon])?;
    let mut v = nu.to_ints()?;
    let n = v.len() as i64;
    let initial = Initial::Finite { values: v.clone() };
    let mut events = Vec::new();
    if n > 0 {
        let mut sched = RingSchedule::new(clocks, 1, Some(n));
        while let Some((time, i)) = sched.next_ring() {
            if time > horizon {
                break;
            }
            let k = finite_jump(&mut v, i as usize);
            events.push(Event { time, index: k as i64, new_value: v[k - 1] });
            if events.len() as u64 > DEFAULT_EVENT_BUDGET {
                return Err(Error::EventBudget { events: events.len() as u64, time });
            }
        }
    }
    Ok(Trajectory { initial, t: clocks.t, horizon, events })
}

/// Index of the ringing walker, `P(i) ∝ t^i` over the active indices.
fn sample_index<R: Rng + ?Sized>(state: &TruncState, t: f64, rng: &mut R) -> i64 {
    let a = state.first_active();
    let u = open_unit(rng);
    let k = match state.active_count() {
        None => (u.ln() / t.ln()).floor() as i64,
        Some(len) => {
            let tl = t.powi(len as i32);
            ((tl + u * (1.0 - tl)).ln() / t.ln()).floor().clamp(0.0, (len - 1) as f64) as i64
        }
    };
    a + k.max(0)
}

fn check_rates(state: &TruncState, t: f64) {
    let (fast, slow) = (state.total_rate(t), state.total_rate_bruteforce(t));
    assert!(
        (fast - slow).abs() <= 1e-12 * fast.abs().max(slow.abs()) + f64::MIN_POSITIVE,
        "rate bookkeeping drift: {fast} vs {slow}"
    );
}

/// Core Gillespie loop. Calls `on_event` per jump and returns the states at
/// each of `times`.
fn gillespie<R: Rng + ?Sized>(
    init: &TruncState,
    t: f64,
    times: &[f64],
    rng: &mut R,
    mut on_event: impl FnMut(Event),
) -> Result<Vec<TruncState>> {
    check_horizon(t, times)?;
    let mut state = init.clone();
    let mut out = Vec::with_capacity(times.len());
    let mut now = 0.0;
    let mut count = 0u64;
    for &target in times {
        loop {
            let rate = state.total_rate(t);
            if rate <= 0.0 {
                break;
            }
            let wait = exp_wait(rng, rate);
            if now + wait > target {
                // Memoryless: discard the overshoot and resample later.
                break;
            }
            now += wait;
            let i = sample_index(&state, t, rng);
            let (index, new_value) = state.ring(i).expect("sampled index is active");
            on_event(Event { time: now, index, new_value });
            count += 1;
            if count % RATE_CHECK_EVERY == 0 {
                check_rates(&state, t);
            }
            if count > DEFAULT_EVENT_BUDGET {
                return Err(Error::EventBudget { events: count, time: now });
            }
        }
        now = target;
        out.push(state.clone());
    }
    Ok(out)
}

/// Event-driven run of a truncated configuration on `[0, horizon]`.
pub fn simulate_truncated<R: Rng + ?Sized>(init: &TruncState, t: f64, horizon: f64, rng: &mut R) -> Result<Trajectory> {
    let mut events = Vec::new();
    gillespie(init, t, &[horizon], rng, |e| events.push(e))?;
    Ok(Trajectory { initial: Initial::Truncated { state: init.clone() }, t, horizon, events })
}

/// States of a truncated run at the nondecreasing `times`.
pub fn truncated_snapshots<R: Rng + ?Sized>(init: &TruncState, t: f64, times: &[f64], rng: &mut R) -> Result<Vec<TruncState>> {
    gillespie(init, t, times, rng, |_| {})
}

/// Edge process: `mu` occupies indices `1-len..=0`, everything above index 0
/// is `-inf` and everything below is `+inf`.
pub fn simulate_edge<R: Rng + ?Sized>(mu: &Signature, d: i64, t: f64, horizon: f64, rng: &mut R) -> Result<Trajectory> {
    simulate_truncated(&TruncState::edge(mu, d)?, t, horizon, rng)
}

/// Clock-driven run: every ring of an active clock is applied, rings of
/// frozen walkers are dropped and their clocks retired.
pub fn run_clocked(
    init: &TruncState,
    clocks: &ClockStreams,
    times: &[f64],
    budget: u64,
    mut on_event: impl FnMut(Event),
) -> Result<Vec<TruncState>> {
    check_horizon(clocks.t, times)?;
    let mut state = init.clone();
    let mut out = Vec::with_capacity(times.len());
    let mut sched = RingSchedule::new(clocks, state.first_active(), state.last());
    let mut pending: Option<(f64, i64)> = None;
    let mut count = 0u64;
    for &target in times {
        loop {
            let Some((time, i)) = pending.take().or_else(|| sched.next_ring()) else { break };
            if time > target {
                pending = Some((time, i));
                break;
            }
            count += 1;
            if count > budget {
                return Err(Error::EventBudget { events: count, time });
            }
            if let Some((index, new_value)) = state.ring(i) {
                on_event(Event { time, index, new_value });
                sched.retire_below(state.first_active());
                if count % RATE_CHECK_EVERY == 0 {
                    check_rates(&state, clocks.t);
                }
            }
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Depth-`n` approximation of the bi-infinite sea started from `mu`:
/// coordinates below `-n` are replaced by `+inf`, walker `i` rings at rate
/// `t^i`, and the `F_d` projection is returned at each of `times`.
pub fn approx_2inf(
    mu: &WindowSignature,
    d: i64,
    depth: u32,
    times: &[f64],
    clocks: &ClockStreams,
    budget: u64,
) -> Result<Vec<TruncState>> {
    if depth == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    let init = TruncState::from_window_at_depth(mu, d, depth)?;
    run_clocked(&init, clocks, times, budget, |_| {})
}

/// Runs every depth in `depths` on the same clocks. Deeper runs are
/// asserted to lie coordinatewise below shallower ones at every time.
pub fn approx_2inf_coupled(
    mu: &WindowSignature,
    d: i64,
    depths: &[u32],
    times: &[f64],
    clocks: &ClockStreams,
    budget: u64,
) -> Result<Vec<Vec<TruncState>>> {
    let runs = depths
        .iter()
        .map(|&n| approx_2inf(mu, d, n, times, clocks, budget))
        .collect::<Result<Vec<_>>>()?;
    for (a, &na) in runs.iter().zip(depths) {
        for (b, &nb) in runs.iter().zip(depths) {
            if nb > na {
                for (sa, sb) in a.iter().zip(b) {
                    assert!(sb.le_from(sa, -(nb as i64) - 1), "coupling violated between depths {na} and {nb}");
                }
            }
        }
    }
    Ok(runs)
}
