//! Event-driven order book reduced to the two best queues, and the
//! regulating map that re-injects a planar path into the open orthant
//! every time it tries to leave it.

use crate::error::{ensure, param, Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Bid,
    Ask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEvent {
    pub time: f64,
    pub side: Side,
    /// Positive for limit orders, negative for market orders and cancels.
    pub delta: f64,
}

impl OrderEvent {
    pub fn new(time: f64, side: Side, delta: f64) -> Result<Self> {
        let ev = OrderEvent { time, side, delta };
        ev.validate()?;
        Ok(ev)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidEvent {
            time: self.time,
            reason: reason.to_string(),
        };
        if !self.time.is_finite() || self.time < 0.0 {
            return Err(bad("time must be finite and non-negative"));
        }
        if self.delta == 0.0 || !self.delta.is_finite() {
            return Err(bad("delta must be finite and non-zero"));
        }
        Ok(())
    }
}

/// Which queue hit zero; the price moves up on ask depletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JumpSide {
    AskDepleted,
    BidDepleted,
}

impl JumpSide {
    pub fn tick_change(self) -> i64 {
        match self {
            JumpSide::AskDepleted => 1,
            JumpSide::BidDepleted => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookState {
    pub bid_price_ticks: i64,
    pub tick: f64,
    pub q_bid: f64,
    pub q_ask: f64,
    /// Time of the last applied event.
    pub time: f64,
}

impl BookState {
    pub fn new(bid_price_ticks: i64, tick: f64, q_bid: f64, q_ask: f64) -> Result<Self> {
        ensure(tick > 0.0 && tick.is_finite(), "tick", "must be positive")?;
        if !(q_bid > 0.0 && q_ask > 0.0 && q_bid.is_finite() && q_ask.is_finite()) {
            return Err(Error::NotInterior(q_bid, q_ask));
        }
        Ok(BookState {
            bid_price_ticks,
            tick,
            q_bid,
            q_ask,
            time: 0.0,
        })
    }

    pub fn ask_price_ticks(&self) -> i64 {
        self.bid_price_ticks + 1
    }

    pub fn queues(&self) -> [f64; 2] {
        [self.q_bid, self.q_ask]
    }
}

/// Depth distribution after a price change (F for moves up, F̃ for moves down).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DepthSampler {
    Fixed { bid: f64, ask: f64 },
    Uniform { low: [f64; 2], high: [f64; 2] },
    Exponential { mean: [f64; 2] },
    Gamma { shape: [f64; 2], scale: [f64; 2] },
    /// Uniform choice among recorded depth pairs.
    Empirical { states: Vec<[f64; 2]> },
}

impl DepthSampler {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: &[f64]| v.iter().all(|x| *x > 0.0 && x.is_finite());
        let ok = match self {
            DepthSampler::Fixed { bid, ask } => pos(&[*bid, *ask]),
            DepthSampler::Uniform { low, high } => {
                pos(low) && pos(high) && low[0] <= high[0] && low[1] <= high[1]
            }
            DepthSampler::Exponential { mean } => pos(mean),
            DepthSampler::Gamma { shape, scale } => pos(shape) && pos(scale),
            DepthSampler::Empirical { states } => {
                !states.is_empty() && states.iter().all(|s| pos(s))
            }
        };
        ensure(ok, "depth_sampler", "depths must be strictly positive")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match self {
            DepthSampler::Fixed { bid, ask } => [*bid, *ask],
            DepthSampler::Uniform { low, high } => [
                uniform(rng, low[0], high[0]),
                uniform(rng, low[1], high[1]),
            ],
            DepthSampler::Exponential { mean } => {
                [positive(rng, |r| mean[0] * Exp::new(1.0).unwrap().sample(r)),
                 positive(rng, |r| mean[1] * Exp::new(1.0).unwrap().sample(r))]
            }
            DepthSampler::Gamma { shape, scale } => [
                positive(rng, |r| Gamma::new(shape[0], scale[0]).unwrap().sample(r)),
                positive(rng, |r| Gamma::new(shape[1], scale[1]).unwrap().sample(r)),
            ],
            DepthSampler::Empirical { states } => states[rng.random_range(0..states.len())],
        }
    }

    pub fn mean(&self) -> [f64; 2] {
        match self {
            DepthSampler::Fixed { bid, ask } => [*bid, *ask],
            DepthSampler::Uniform { low, high } => {
                [0.5 * (low[0] + high[0]), 0.5 * (low[1] + high[1])]
            }
            DepthSampler::Exponential { mean } => *mean,
            DepthSampler::Gamma { shape, scale } => [shape[0] * scale[0], shape[1] * scale[1]],
            DepthSampler::Empirical { states } => {
                let n = states.len() as f64;
                let s = states.iter().fold([0.0, 0.0], |a, s| [a[0] + s[0], a[1] + s[1]]);
                [s[0] / n, s[1] / n]
            }
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn positive<R: Rng + ?Sized, F: Fn(&mut R) -> f64>(rng: &mut R, draw: F) -> f64 {
    loop {
        let x = draw(rng);
        if x > 0.0 {
            return x;
        }
    }
}

/// `g(side, pre-jump state, noise)`; must return a strictly positive pair.
#[derive(Clone)]
pub struct GeneralMap(pub Arc<dyn Fn(JumpSide, [f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync>);

impl fmt::Debug for GeneralMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GeneralMap(..)")
    }
}

#[derive(Debug, Clone)]
pub enum ReinitVariant {
    Iid,
    /// Queue on the surviving side keeps a fraction of its pre-jump size.
    Pegged { beta_bid: f64, beta_ask: f64 },
    General(GeneralMap),
}

#[derive(Debug, Clone)]
pub struct ReinitRule {
    pub variant: ReinitVariant,
    pub sampler_up: DepthSampler,
    pub sampler_down: DepthSampler,
    /// Multiplies every noise draw; `√n` for the n-th rescaled system.
    pub scale: f64,
}

impl ReinitRule {
    pub fn iid(up: DepthSampler, down: DepthSampler) -> Result<Self> {
        Self::new(ReinitVariant::Iid, up, down)
    }

    pub fn new(variant: ReinitVariant, up: DepthSampler, down: DepthSampler) -> Result<Self> {
        up.validate()?;
        down.validate()?;
        if let ReinitVariant::Pegged { beta_bid, beta_ask } = variant {
            ensure(
                (0.0..1.0).contains(&beta_bid) && (0.0..1.0).contains(&beta_ask),
                "pegged_beta",
                "must lie in [0, 1)",
            )?;
        }
        Ok(ReinitRule {
            variant,
            sampler_up: up,
            sampler_down: down,
            scale: 1.0,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Post-jump queues given the depleted side and the pre-jump state.
    pub fn draw<R: Rng + ?Sized>(&self, side: JumpSide, pre: [f64; 2], rng: &mut R) -> Result<[f64; 2]> {
        let sampler = match side {
            JumpSide::AskDepleted => &self.sampler_up,
            JumpSide::BidDepleted => &self.sampler_down,
        };
        let e = sampler.sample(rng);
        let eps = [self.scale * e[0], self.scale * e[1]];
        let post = match &self.variant {
            ReinitVariant::Iid => eps,
            ReinitVariant::Pegged { beta_bid, beta_ask } => match side {
                JumpSide::AskDepleted => [eps[0] + beta_bid * pre[0].max(0.0), eps[1]],
                JumpSide::BidDepleted => [eps[0], eps[1] + beta_ask * pre[1].max(0.0)],
            },
            ReinitVariant::General(g) => (g.0)(side, pre, eps),
        };
        if post[0] > 0.0 && post[1] > 0.0 && post[0].is_finite() && post[1].is_finite() {
            Ok(post)
        } else {
            Err(param("reinit", format!("map produced non-interior state {post:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub time: f64,
    pub q_bid: f64,
    pub q_ask: f64,
}

impl PathSample {
    pub fn new(time: f64, q: [f64; 2]) -> Self {
        PathSample {
            time,
            q_bid: q[0],
            q_ask: q[1],
        }
    }

    pub fn q(&self) -> [f64; 2] {
        [self.q_bid, self.q_ask]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub side: JumpSide,
    /// Left limit of the queues at the jump.
    pub pre: [f64; 2],
    pub post: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegulatedPath {
    pub samples: Vec<PathSample>,
    pub jumps: Vec<Jump>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceChange {
    pub time: f64,
    pub price_ticks: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    pub start_time: f64,
    pub start_ticks: i64,
    pub changes: Vec<PriceChange>,
}

impl PricePath {
    /// Price in force at time `t` (changes are right-continuous).
    pub fn price_at(&self, t: f64) -> i64 {
        let k = self.changes.partition_point(|c| c.time <= t);
        if k == 0 {
            self.start_ticks
        } else {
            self.changes[k - 1].price_ticks
        }
    }

    /// `(time, price_ticks)` rows, starting with the initial price.
    pub fn steps(&self) -> Vec<(f64, i64)> {
        std::iter::once((self.start_time, self.start_ticks))
            .chain(self.changes.iter().map(|c| (c.time, c.price_ticks)))
            .collect()
    }
}

/// Apply one event. Returns the new book and the jump, if the event
/// emptied its queue.
pub fn apply_event<R: Rng + ?Sized>(
    book: &BookState,
    ev: &OrderEvent,
    rule: &ReinitRule,
    rng: &mut R,
) -> Result<(BookState, Option<Jump>)> {
    ev.validate()?;
    if ev.time < book.time {
        return Err(Error::InvalidEvent {
            time: ev.time,
            reason: format!("time regression from {}", book.time),
        });
    }
    let mut next = *book;
    next.time = ev.time;
    let (queue, side) = match ev.side {
        Side::Bid => (book.q_bid, JumpSide::BidDepleted),
        Side::Ask => (book.q_ask, JumpSide::AskDepleted),
    };
    let q = queue + ev.delta;
    if q > 0.0 {
        match ev.side {
            Side::Bid => next.q_bid = q,
            Side::Ask => next.q_ask = q,
        }
        return Ok((next, None));
    }
    let pre = book.queues();
    let post = rule.draw(side, pre, rng)?;
    next.bid_price_ticks += side.tick_change();
    next.q_bid = post[0];
    next.q_ask = post[1];
    Ok((
        next,
        Some(Jump {
            time: ev.time,
            side,
            pre,
            post,
        }),
    ))
}

/// Fold `apply_event` over a time-sorted stream.
pub fn replay<R: Rng + ?Sized>(
    events: &[OrderEvent],
    initial: &BookState,
    rule: &ReinitRule,
    rng: &mut R,
) -> Result<(RegulatedPath, PricePath)> {
    let mut book = *initial;
    let mut path = RegulatedPath {
        samples: Vec::with_capacity(events.len() + 1),
        jumps: Vec::new(),
    };
    path.samples.push(PathSample::new(book.time, book.queues()));
    let mut price = PricePath {
        start_time: initial.time,
        start_ticks: initial.bid_price_ticks,
        changes: Vec::new(),
    };
    for ev in events {
        let (next, jump) = apply_event(&book, ev, rule, rng)?;
        if let Some(j) = jump {
            path.jumps.push(j);
            price.changes.push(PriceChange {
                time: ev.time,
                price_ticks: next.bid_price_ticks,
            });
        }
        path.samples.push(PathSample::new(next.time, next.queues()));
        book = next;
    }
    Ok((path, price))
}

/// Regulate a piecewise-constant planar path given by its samples.
/// Between jumps the output moves by exactly the input's increments; when a
/// coordinate would reach zero the state is redrawn through `rule`.
pub fn regulate<R: Rng + ?Sized>(
    omega: &[PathSample],
    rule: &ReinitRule,
    rng: &mut R,
) -> Result<RegulatedPath> {
    let Some(first) = omega.first() else {
        return Ok(RegulatedPath::default());
    };
    if !(first.q_bid > 0.0 && first.q_ask > 0.0) {
        return Err(Error::NotInterior(first.q_bid, first.q_ask));
    }
    let mut out = RegulatedPath {
        samples: Vec::with_capacity(omega.len()),
        jumps: Vec::new(),
    };
    let mut state = first.q();
    out.samples.push(*first);
    for w in omega.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.time < a.time {
            return Err(Error::InvalidEvent {
                time: b.time,
                reason: "path samples out of order".into(),
            });
        }
        let cand = [
            state[0] + (b.q_bid - a.q_bid),
            state[1] + (b.q_ask - a.q_ask),
        ];
        if cand[0] > 0.0 && cand[1] > 0.0 {
            state = cand;
        } else {
            let side = if cand[1] <= 0.0 {
                JumpSide::AskDepleted
            } else {
                JumpSide::BidDepleted
            };
            let post = rule.draw(side, state, rng)?;
            out.jumps.push(Jump {
                time: b.time,
                side,
                pre: state,
                post,
            });
            state = post;
        }
        out.samples.push(PathSample::new(b.time, state));
    }
    Ok(out)
}

/// Price path implied by the jump record.
pub fn price_from_hits(path: &RegulatedPath, start_time: f64, start_ticks: i64) -> PricePath {
    let mut p = start_ticks;
    let changes = path
        .jumps
        .iter()
        .map(|j| {
            p += j.side.tick_change();
            PriceChange {
                time: j.time,
                price_ticks: p,
            }
        })
        .collect();
    PricePath {
        start_time,
        start_ticks,
        changes,
    }
}

/// Unregulated net order flow `x_t = x_0 + Σ deltas`, one sample per event.
pub fn net_flow_path(events: &[OrderEvent], start_time: f64, x0: [f64; 2]) -> Vec<PathSample> {
    let mut x = x0;
    let mut out = Vec::with_capacity(events.len() + 1);
    out.push(PathSample::new(start_time, x));
    for ev in events {
        match ev.side {
            Side::Bid => x[0] += ev.delta,
            Side::Ask => x[1] += ev.delta,
        }
        out.push(PathSample::new(ev.time, x));
    }
    out
}
