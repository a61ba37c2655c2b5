//! Slot-synchronous simulation of `n` contending nodes.
//!
//! Per mini-slot `t`: arrivals join their buffers; if the channel is busy
//! every sensing or deferring node enters (or restarts) its wait; if it is
//! idle, deferring nodes count down, sensing nodes draw their attempt and
//! one attempt starts a success of `T_S / a` slots while several start a
//! collision of `T_C / a` slots.
//!
//! A fresh HOL packet first observes `t_A` idle slots, then attempts with
//! probability 1. A packet that sees the channel busy waits until the busy
//! period ends plus `t_A` idle slots and resumes sensing in phase
//! `max(i, 1)`. After a collision the packet senses in phase `min(i + 1, K)`
//! from the first slot after the collision. A winner's next packet starts
//! its `t_A` count when the busy period ends, alongside the deferring nodes.
//!
//! Stretches where nothing can change (busy periods, a fully idle network)
//! are skipped in one step.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::config::{ConfigError, SimConfig, Slots};
use crate::stats::{batch_means, Batch, SimStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Empty,
    /// Counting the `t_A` idle slots before a fresh attempt.
    Act { left: u64 },
    /// Sensing in the current phase.
    Sense,
    /// Deferring; `left` idle slots still required.
    Wait { left: u64 },
    /// Own busy period; `success` tells how it ends.
    Transmitting { success: bool },
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub phase: usize,
    pub mode: Mode,
    /// Arrival slots of the buffered packets, HOL first.
    pub queue: VecDeque<u64>,
    pub hol_start: u64,
    /// Delivery slot of the last success, used for the next HOL start.
    last_delivery: u64,
    /// A success whose delivery slot is still ahead.
    in_flight: bool,
    next_arrival: u64,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventCode {
    Arrival,
    Success,
    Collision,
    Delivery,
    Drop,
}

impl EventCode {
    pub fn code(self) -> char {
        match self {
            EventCode::Arrival => 'A',
            EventCode::Success => 'S',
            EventCode::Collision => 'C',
            EventCode::Delivery => 'D',
            EventCode::Drop => 'X',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub slot: u64,
    pub code: EventCode,
    pub node: usize,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub stats: SimStats,
    /// Present when the configuration asked for a trace.
    pub trace: Option<Vec<TraceEvent>>,
}

struct Arrivals {
    rng: ChaCha8Rng,
    gaps: Option<Geometric>,
}

impl Arrivals {
    /// Slot of the next arrival strictly after `after`, or the first one when
    /// `after` is `None`.
    fn next(&mut self, after: Option<u64>) -> u64 {
        let Some(g) = &self.gaps else { return u64::MAX };
        let skip = g.sample(&mut self.rng);
        match after {
            None => skip,
            Some(t) => t.saturating_add(1).saturating_add(skip),
        }
    }
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    slots: Slots,
    nodes: Vec<NodeState>,
    arrivals: Arrivals,
    attempt_prob: Vec<f64>,
    busy_until: u64,
    batches: Vec<Batch>,
    batch_len: f64,
    trace: Option<Vec<TraceEvent>>,
    // counters
    arrived: u64,
    delivered: u64,
    dropped: u64,
    successes: u64,
    collisions: u64,
    phase_attempts: Vec<u64>,
    phase_sensing: Vec<u64>,
    busy_time: Vec<u64>,
    backlogged: usize,
    /// (delivery slot, node) of the successes whose delivery is still ahead.
    pending: Vec<(u64, usize)>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let slots = cfg.slots()?;
        let base = ChaCha8Rng::seed_from_u64(cfg.seed);
        let stream = |s: u64| {
            let mut r = base.clone();
            r.set_stream(s);
            r
        };
        let pa = cfg.arrival_probability();
        let gaps = if pa > 0.0 { Some(Geometric::new(pa).expect("probability in (0, 1]")) } else { None };
        let mut arrivals = Arrivals { rng: stream(0), gaps };
        let nodes = (0..cfg.n)
            .map(|i| NodeState {
                phase: 0,
                mode: Mode::Empty,
                queue: VecDeque::new(),
                hol_start: 0,
                last_delivery: 0,
                in_flight: false,
                next_arrival: arrivals.next(None),
                rng: stream(1 + i as u64),
            })
            .collect();
        let attempt_prob = (0..=cfg.cutoff).map(|i| if i == 0 { 1.0 } else { cfg.q.powi(i as i32) }).collect();
        let measured = cfg.horizon - cfg.warmup;
        Ok(Self {
            cfg,
            slots,
            nodes,
            arrivals,
            attempt_prob,
            busy_until: 0,
            batches: vec![Batch::default(); cfg.batches],
            batch_len: measured as f64 / cfg.batches as f64,
            trace: cfg.trace.then(Vec::new),
            arrived: 0,
            delivered: 0,
            dropped: 0,
            successes: 0,
            collisions: 0,
            phase_attempts: vec![0; cfg.cutoff + 1],
            phase_sensing: vec![0; cfg.cutoff + 1],
            busy_time: vec![0; cfg.n + 1],
            backlogged: 0,
            pending: Vec::new(),
        })
    }

    fn log(&mut self, slot: u64, code: EventCode, node: usize) {
        if let Some(t) = &mut self.trace {
            t.push(TraceEvent { slot, code, node });
        }
    }

    fn measured(&self, t: u64) -> bool {
        t >= self.cfg.warmup && t < self.cfg.horizon
    }

    fn batch_of(&self, t: u64) -> usize {
        let i = ((t - self.cfg.warmup) as f64 / self.batch_len) as usize;
        i.min(self.cfg.batches - 1)
    }

    fn next_arrival(&self) -> u64 {
        self.nodes.iter().map(|n| n.next_arrival).min().unwrap_or(u64::MAX)
    }

    fn admit_arrivals(&mut self, t: u64) {
        for i in 0..self.nodes.len() {
            if self.nodes[i].next_arrival != t {
                continue;
            }
            self.arrived += 1;
            let full = self.cfg.buffer_capacity.is_some_and(|c| self.nodes[i].queue.len() >= c);
            if full {
                self.dropped += 1;
                self.log(t, EventCode::Drop, i);
            } else {
                let node = &mut self.nodes[i];
                if node.queue.is_empty() && !node.in_flight {
                    self.backlogged += 1;
                    if node.mode == Mode::Empty {
                        node.hol_start = t;
                        node.phase = 0;
                        node.mode = fresh(self.slots);
                    }
                }
                node.queue.push_back(t);
                self.log(t, EventCode::Arrival, i);
            }
            self.nodes[i].next_arrival = self.arrivals.next(Some(t));
        }
    }

    /// Accounts for slots `[from, to)` in the occupancy histogram.
    fn occupy(&mut self, from: u64, to: u64) {
        let lo = from.max(self.cfg.warmup);
        let hi = to.min(self.cfg.horizon);
        if hi > lo {
            self.busy_time[self.backlogged] += hi - lo;
        }
    }

    fn settle_deliveries(&mut self, upto: u64) {
        // deliveries due before `upto` leave the backlog count
        let mut i = 0;
        while i < self.pending.len() {
            let (d, node) = self.pending[i];
            if d < upto {
                self.pending.swap_remove(i);
                self.log(d, EventCode::Delivery, node);
                self.nodes[node].in_flight = false;
                if self.nodes[node].queue.is_empty() {
                    self.backlogged -= 1;
                }
            } else {
                i += 1;
            }
        }
    }

    fn run(mut self) -> SimOutput {
        let horizon = self.cfg.horizon;
        let mut t = 0u64;
        while t < horizon {
            self.admit_arrivals(t);
            if t < self.busy_until {
                for node in &mut self.nodes {
                    match node.mode {
                        Mode::Act { .. } | Mode::Sense | Mode::Wait { .. } => {
                            node.phase = node.phase.max(1);
                            node.mode = Mode::Wait { left: self.slots.difs_rest };
                        }
                        Mode::Empty | Mode::Transmitting { .. } => {}
                    }
                }
                // nothing else changes until the period ends or a packet arrives
                let next = self.busy_until.min(self.next_arrival()).min(horizon).max(t + 1);
                self.step_to(t, next);
                t = next;
                continue;
            }
            self.end_own_periods();
            if self.nodes.iter().all(|n| n.mode == Mode::Empty) {
                let next = self.next_arrival().min(horizon).max(t + 1);
                self.step_to(t, next);
                t = next;
                continue;
            }
            self.idle_slot(t);
            self.step_to(t, t + 1);
            t += 1;
        }
        self.settle_deliveries(horizon);
        self.finish()
    }

    fn step_to(&mut self, from: u64, to: u64) {
        // histogram first, with the backlog as it stood during [from, to)
        let mut cut = from;
        let mut due: Vec<u64> = self.pending.iter().map(|&(d, _)| d).filter(|&d| d < to).collect();
        due.sort_unstable();
        for d in due {
            self.occupy(cut, d.max(cut));
            cut = d.max(cut);
            self.settle_deliveries(d + 1);
        }
        self.occupy(cut, to);
    }

    fn end_own_periods(&mut self) {
        let slots = self.slots;
        for node in &mut self.nodes {
            if let Mode::Transmitting { success } = node.mode {
                node.mode = if !success {
                    Mode::Sense
                } else if let Some(&front) = node.queue.front() {
                    node.hol_start = front.max(node.last_delivery);
                    node.phase = 0;
                    fresh(slots)
                } else {
                    Mode::Empty
                };
            }
        }
    }

    fn idle_slot(&mut self, t: u64) {
        let mut winner = None;
        let mut attempts = 0usize;
        let count = self.measured(t);
        for (i, node) in self.nodes.iter_mut().enumerate() {
            if node.mode == (Mode::Wait { left: 0 }) {
                node.mode = Mode::Sense;
            }
            match node.mode {
                Mode::Act { left } | Mode::Wait { left } => {
                    node.mode = if left <= 1 { Mode::Sense } else { countdown(node.mode, left - 1) };
                }
                Mode::Sense => {
                    let p = self.attempt_prob[node.phase];
                    if count {
                        self.phase_sensing[node.phase] += 1;
                    }
                    if node.phase == 0 || node.rng.random::<f64>() < p {
                        attempts += 1;
                        winner = Some(i);
                        node.mode = Mode::Transmitting { success: false };
                        if count {
                            self.phase_attempts[node.phase] += 1;
                        }
                    }
                }
                Mode::Empty | Mode::Transmitting { .. } => {}
            }
        }
        match attempts {
            0 => {}
            1 => {
                let i = winner.expect("one attempt");
                self.busy_until = t + self.slots.success;
                self.success(t, i);
            }
            _ => {
                self.busy_until = t + self.slots.collision;
                if count {
                    self.collisions += 1;
                }
                let k = self.cfg.cutoff;
                for i in 0..self.nodes.len() {
                    if self.nodes[i].mode == (Mode::Transmitting { success: false }) {
                        self.nodes[i].phase = (self.nodes[i].phase + 1).min(k);
                        self.log(t, EventCode::Collision, i);
                    }
                }
            }
        }
    }

    fn success(&mut self, t: u64, i: usize) {
        let delivery = t + 1 + self.slots.payload;
        let node = &mut self.nodes[i];
        node.mode = Mode::Transmitting { success: true };
        let arrival = node.queue.pop_front().expect("HOL packet present");
        let service = delivery - node.hol_start;
        node.last_delivery = delivery;
        node.in_flight = true;
        node.phase = 0;
        if self.measured(t) {
            self.successes += 1;
        }
        self.log(t, EventCode::Success, i);
        if delivery < self.cfg.horizon {
            self.delivered += 1;
            if delivery >= self.cfg.warmup {
                let b = self.batch_of(delivery);
                let batch = &mut self.batches[b];
                batch.deliveries += 1;
                batch.sojourn_sum += (delivery - arrival) as f64;
                batch.service_sum += service as f64;
            }
        }
        self.pending.push((delivery, i));
    }

    fn finish(self) -> SimOutput {
        let p = &self.cfg.params;
        let payload = p.e_p / p.a;
        let t_suc = p.t_suc() / p.a;
        let thr: Vec<f64> = self.batches.iter().map(|b| b.deliveries as f64 * payload / self.batch_len).collect();
        let pkts: Vec<f64> = self.batches.iter().map(|b| b.deliveries as f64 * t_suc / self.batch_len).collect();
        let soj: Vec<f64> = self
            .batches
            .iter()
            .filter(|b| b.deliveries > 0)
            .map(|b| b.sojourn_sum / b.deliveries as f64)
            .collect();
        let total: u64 = self.batches.iter().map(|b| b.deliveries).sum();
        let mut sojourn = batch_means(&soj);
        let service: f64 = self.batches.iter().map(|b| b.service_sum).sum();
        if total > 0 {
            // ratio estimator for the point value, batch spread for the CI
            sojourn.mean = self.batches.iter().map(|b| b.sojourn_sum).sum::<f64>() / total as f64;
        }
        let measured = self.cfg.horizon - self.cfg.warmup;
        let periods = self.successes + self.collisions;
        let queued: u64 = self.nodes.iter().map(|n| n.queue.len() as u64).sum();
        let in_service = self.pending.len() as u64;
        let stats = SimStats {
            throughput: batch_means(&thr),
            throughput_packets: batch_means(&pkts),
            mean_sojourn: sojourn,
            mean_service: if total > 0 { service / total as f64 } else { f64::NAN },
            collision_rate: if periods > 0 { self.collisions as f64 / periods as f64 } else { 0.0 },
            busy_nodes: self.busy_time.iter().map(|&s| s as f64 / measured as f64).collect(),
            phase_attempts: self.phase_attempts,
            phase_sensing: self.phase_sensing,
            measured_slots: measured,
            successes: self.successes,
            collisions: self.collisions,
            arrived: self.arrived,
            delivered: self.delivered,
            dropped: self.dropped,
            queued,
            in_service,
        };
        SimOutput { stats, trace: self.trace }
    }
}

fn fresh(slots: Slots) -> Mode {
    if slots.difs_rest == 0 {
        Mode::Sense
    } else {
        Mode::Act { left: slots.difs_rest }
    }
}

fn countdown(mode: Mode, left: u64) -> Mode {
    match mode {
        Mode::Act { .. } => Mode::Act { left },
        _ => Mode::Wait { left },
    }
}

/// Runs one replication.
pub fn run(config: &SimConfig) -> Result<SimOutput, ConfigError> {
    Ok(Engine::new(config)?.run())
}
