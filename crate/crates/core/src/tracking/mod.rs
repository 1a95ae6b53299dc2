//! Event-driven wave-front tracking on a piecewise constant coefficient
//! `ζ^h`. Fronts are kept in position order in an arena-backed linked list;
//! pairwise collision times sit in a binary heap and are validated lazily,
//! so each event costs `O(log #fronts)` besides the Riemann solve.

mod front;
mod glimm;
mod interact;
pub mod output;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

pub use front::{Front, FrontKind};
pub use glimm::{fit_c0, wave_potentials, GlimmReport, WaveItem};

use crate::coefficient::PiecewiseConstField;
use crate::error::{Error, Result};
use crate::models::BalanceLaw;
use crate::numerics::Vector;
use crate::riemann::{solve_generalized, solve_standard, solve_t};

/// Relative size of the speed perturbation used to break ties.
pub const JITTER_REL: f64 = 1e-12;

/// The state obtained from `u_left` by crossing every jump of `zeta_h` with
/// the transmission map: a stationary solution with zero-waves only.
pub fn steady_state(law: &BalanceLaw, zeta_h: &PiecewiseConstField, u_left: &Vector) -> Result<PiecewiseConstField> {
    let mut values = vec![u_left.clone()];
    for (k, _) in zeta_h.breaks().iter().enumerate() {
        let (zl, zr) = (&zeta_h.values()[k], &zeta_h.values()[k + 1]);
        let next = solve_t(law.model(), law.coupling.as_ref(), zr, zl, values.last().unwrap())?;
        values.push(next);
    }
    PiecewiseConstField::new(zeta_h.breaks().to_vec(), values)
}

#[derive(Debug, Clone)]
pub struct TrackerConfig {
    /// Approximation parameter: rarefaction step size and speed tolerance.
    pub eps: f64,
    /// Simplified-solver threshold on the product of incoming strengths;
    /// `None` means `eps²`.
    pub rho: Option<f64>,
    pub c0: f64,
    pub front_cap: usize,
    /// Record the Glimm functionals at every interaction.
    pub record_glimm: bool,
    /// Upper bound `δ` on the initial `Υ`; unbounded by default.
    pub domain_budget: f64,
    /// Window over which masses are reported.
    pub window: (f64, f64),
}

impl TrackerConfig {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            rho: None,
            c0: 10.0,
            front_cap: 200_000,
            record_glimm: false,
            domain_budget: f64::INFINITY,
            window: (-10.0, 10.0),
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(self.eps * self.eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionMode {
    Accurate,
    Simplified,
    NonPhysical,
}

#[derive(Debug, Clone)]
pub struct InteractionRecord {
    pub time: f64,
    pub x: f64,
    pub mode: InteractionMode,
    pub kinds: (FrontKind, FrontKind),
    pub ids: (u64, u64),
    /// `(V, Q)` before and after, when recording.
    pub before: Option<(f64, f64)>,
    pub after: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub interactions: usize,
    pub accurate: usize,
    pub simplified: usize,
    pub nonphysical: usize,
    pub fronts_created: usize,
    pub max_fronts: usize,
    pub jitter_applied: usize,
}

#[derive(Debug, Clone)]
struct Slot {
    front: Option<Front>,
    prev: Option<usize>,
    next: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: OrderedFloat<f64>,
    seq: u64,
    left: usize,
    left_id: u64,
    right: usize,
    right_id: u64,
}

/// Outgoing element of an interaction: a new front or the surviving
/// zero-wave with updated traces.
enum Outgoing {
    Front(Front),
    Zero { slot: usize, left: Vector, right: Vector },
}

#[derive(Debug, Clone)]
pub struct Tracker {
    law: BalanceLaw,
    cfg: TrackerConfig,
    zeta: PiecewiseConstField,
    time: f64,
    far_left: Vector,
    slots: Vec<Slot>,
    free: Vec<usize>,
    head: Option<usize>,
    tail: Option<usize>,
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
    next_id: u64,
    alive: usize,
    np_strength: f64,
    /// `(V, Q)` after the last recorded interaction.
    last_potentials: Option<(f64, f64)>,
    pub log: Vec<InteractionRecord>,
    pub series: Vec<GlimmReport>,
    pub stats: RunStats,
}

impl Tracker {
    /// Resolves every discontinuity of `u0` and every jump of `zeta_h` at
    /// `t = 0`.
    pub fn init(law: BalanceLaw, zeta_h: PiecewiseConstField, u0: &PiecewiseConstField, cfg: TrackerConfig) -> Result<Self> {
        if !(cfg.eps > 0.0) {
            return Err(Error::Config(format!("eps = {} must be positive", cfg.eps)));
        }
        let zeta_h = zeta_h.merged();
        let mut t = Self {
            far_left: u0.values()[0].clone(),
            law,
            cfg,
            zeta: zeta_h,
            time: 0.0,
            slots: Vec::new(),
            free: Vec::new(),
            head: None,
            tail: None,
            heap: BinaryHeap::new(),
            seq: 0,
            next_id: 0,
            alive: 0,
            np_strength: 0.0,
            last_potentials: None,
            log: Vec::new(),
            series: Vec::new(),
            stats: RunStats::default(),
        };
        let mut points: Vec<f64> = t.zeta.breaks().iter().chain(u0.breaks()).copied().collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let model = t.law.flux.clone();
        let mut outs: Vec<Outgoing> = Vec::new();
        for &x in &points {
            let (zl, zr) = (t.zeta.value(x).clone(), t.zeta.value_right(x).clone());
            let (ul, ur) = (u0.value(x), u0.value_right(x));
            let context = |e: Error| Error::Event {
                time: 0.0,
                position: x,
                fronts: (0, 0),
                source: Box::new(e),
            };
            if zl != zr {
                let fan = solve_generalized(model.as_ref(), t.law.coupling.as_ref(), &zl, &zr, ul, ur).map_err(context)?;
                let zw = fan.zero_wave.clone().expect("coefficient jump yields a zero-wave");
                let mut left = Vec::new();
                for w in fan.left_waves() {
                    left.extend(t.wave_fronts(w, x, 0.0).map_err(context)?);
                }
                let mut right = Vec::new();
                for w in fan.right_waves() {
                    right.extend(t.wave_fronts(w, x, 0.0).map_err(context)?);
                }
                t.order_speeds(&mut left);
                t.order_speeds(&mut right);
                outs.extend(left.into_iter().map(Outgoing::Front));
                let z = t.make_front(FrontKind::ZeroWave, None, (&zr - &zl).norm(), x, 0.0, 0.0, zw.left, zw.right, zl, zr);
                outs.push(Outgoing::Front(z));
                outs.extend(right.into_iter().map(Outgoing::Front));
            } else if ul != ur {
                let (_, fan) = solve_standard(model.as_ref(), &zl, ul, ur).map_err(context)?;
                let mut fronts = Vec::new();
                for w in &fan.waves {
                    fronts.extend(t.wave_fronts(w, x, 0.0).map_err(context)?);
                }
                t.order_speeds(&mut fronts);
                outs.extend(fronts.into_iter().map(Outgoing::Front));
            }
        }
        let mut prev = None;
        for o in outs {
            let Outgoing::Front(f) = o else { unreachable!() };
            let slot = t.alloc(f);
            t.link(prev, Some(slot));
            prev = Some(slot);
        }
        t.link(prev, None);
        let mut cur = t.head;
        while let Some(s) = cur {
            let next = t.slots[s].next;
            if let Some(n) = next {
                t.schedule(s, n);
            }
            cur = next;
        }
        t.stats.max_fronts = t.alive;
        let report = t.glimm();
        if report.upsilon >= t.cfg.domain_budget {
            return Err(Error::DomainBudgetExceeded {
                upsilon: report.upsilon,
                delta: t.cfg.domain_budget,
            });
        }
        if t.cfg.record_glimm {
            t.series.push(report);
        }
        Ok(t)
    }

    pub fn law(&self) -> &BalanceLaw {
        &self.law
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn zeta(&self) -> &PiecewiseConstField {
        &self.zeta
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn front_count(&self) -> usize {
        self.alive
    }

    /// Total strength `Σ ‖u⁺ − u⁻‖` of the non-physical fronts.
    pub fn nonphysical_strength(&self) -> f64 {
        self.fronts().filter(|f| f.kind == FrontKind::NonPhysical).map(Front::jump_norm).sum()
    }

    /// Fronts in position order.
    pub fn fronts(&self) -> impl Iterator<Item = &Front> {
        let mut cur = self.head;
        std::iter::from_fn(move || {
            let s = cur?;
            cur = self.slots[s].next;
            self.slots[s].front.as_ref()
        })
    }

    fn front(&self, slot: usize) -> &Front {
        self.slots[slot].front.as_ref().expect("live slot")
    }

    #[allow(clippy::too_many_arguments)]
    fn make_front(
        &mut self,
        kind: FrontKind,
        family: Option<usize>,
        sigma: f64,
        x: f64,
        t: f64,
        speed: f64,
        left: Vector,
        right: Vector,
        z_left: Vector,
        z_right: Vector,
    ) -> Front {
        self.next_id += 1;
        self.stats.fronts_created += 1;
        Front {
            id: self.next_id,
            kind,
            family,
            sigma,
            x_ref: x,
            t_ref: t,
            speed,
            left,
            right,
            z_left,
            z_right,
            strengths: Default::default(),
        }
    }

    fn alloc(&mut self, f: Front) -> usize {
        self.alive += 1;
        if f.kind == FrontKind::NonPhysical {
            self.np_strength += f.jump_norm();
        }
        let slot = Slot {
            front: Some(f),
            prev: None,
            next: None,
        };
        match self.free.pop() {
            Some(s) => {
                self.slots[s] = slot;
                s
            }
            None => {
                self.slots.push(slot);
                self.slots.len() - 1
            }
        }
    }

    fn release(&mut self, slot: usize) {
        if let Some(f) = self.slots[slot].front.take() {
            self.alive -= 1;
            if f.kind == FrontKind::NonPhysical {
                self.np_strength -= f.jump_norm();
            }
            self.free.push(slot);
        }
    }

    fn link(&mut self, a: Option<usize>, b: Option<usize>) {
        match a {
            Some(a) => self.slots[a].next = b,
            None => self.head = b,
        }
        match b {
            Some(b) => self.slots[b].prev = a,
            None => self.tail = a,
        }
    }

    /// Queues the collision of two adjacent fronts, if they approach.
    fn schedule(&mut self, l: usize, r: usize) {
        let (fl, fr) = (self.front(l), self.front(r));
        if fl.speed <= fr.speed {
            return;
        }
        let gap = (fr.position(self.time) - fl.position(self.time)).max(0.0);
        let time = self.time + gap / (fl.speed - fr.speed);
        let ev = Event {
            time: OrderedFloat(time),
            seq: self.seq,
            left: l,
            left_id: fl.id,
            right: r,
            right_id: fr.id,
        };
        self.seq += 1;
        self.heap.push(Reverse(ev));
    }

    fn is_valid(&self, ev: &Event) -> bool {
        let ok = |slot: usize, id: u64| self.slots[slot].front.as_ref().is_some_and(|f| f.id == id);
        ok(ev.left, ev.left_id) && ok(ev.right, ev.right_id) && self.slots[ev.left].next == Some(ev.right)
    }

    fn peek_valid(&mut self) -> Option<Event> {
        while let Some(Reverse(ev)) = self.heap.peek().copied() {
            if self.is_valid(&ev) {
                return Some(ev);
            }
            self.heap.pop();
        }
        None
    }

    /// Earliest pending collision: time and the two front ids.
    pub fn next_event(&mut self) -> Option<(f64, u64, u64)> {
        self.peek_valid().map(|ev| (ev.time.0.max(self.time), ev.left_id, ev.right_id))
    }

    /// Processes events up to `t_end`.
    pub fn advance(&mut self, t_end: f64) -> Result<()> {
        self.advance_observed(t_end, |_, _, _| {})
    }

    /// Like [`advance`](Self::advance), calling `observe(tracker, t0, t1)`
    /// for every slab `[t0, t1]` free of interactions.
    pub fn advance_observed<F>(&mut self, t_end: f64, mut observe: F) -> Result<()>
    where
        F: FnMut(&Tracker, f64, f64),
    {
        if t_end < self.time {
            return Err(Error::Config(format!("cannot advance backwards to t = {t_end}")));
        }
        while let Some(ev) = self.peek_valid() {
            let t = ev.time.0.max(self.time);
            if t > t_end {
                break;
            }
            self.heap.pop();
            if t > self.time {
                observe(self, self.time, t);
            }
            self.resolve(ev, t)?;
            if self.alive > self.cfg.front_cap {
                return Err(Error::FrontBudgetExceeded { cap: self.cfg.front_cap });
            }
        }
        if t_end > self.time {
            observe(self, self.time, t_end);
        }
        self.time = t_end;
        Ok(())
    }

    /// Exact piecewise constant profile at time `t` (between events).
    pub fn snapshot(&self, t: f64) -> PiecewiseConstField {
        let mut breaks: Vec<f64> = Vec::with_capacity(self.alive);
        let mut values = vec![self.far_left.clone()];
        for f in self.fronts() {
            let x = f.position(t);
            match breaks.last() {
                Some(&b) if x <= b => *values.last_mut().unwrap() = f.right.clone(),
                _ => {
                    breaks.push(x);
                    values.push(f.right.clone());
                }
            }
        }
        PiecewiseConstField::new(breaks, values).expect("ordered fronts")
    }

    /// Glimm functionals at the current time.
    pub fn glimm(&self) -> GlimmReport {
        let (v, q) = self.potentials();
        self.glimm_with(v, q)
    }

    fn glimm_with(&self, v: f64, q: f64) -> GlimmReport {
        let snap = self.snapshot(self.time);
        let (a, b) = self.cfg.window;
        GlimmReport {
            t: self.time,
            v,
            q,
            upsilon: v + self.cfg.c0 * q,
            c0: self.cfg.c0,
            tv_u: snap.total_variation(),
            mass: snap.integral(a, b).iter().copied().collect(),
            n_fronts: self.alive,
            np_strength: self.np_strength.max(0.0),
        }
    }

    fn potentials(&self) -> (f64, f64) {
        let fronts: Vec<&Front> = self.fronts().collect();
        glimm::potentials(self.law.model(), &fronts)
    }

    /// Largest `‖f(z⁺, u⁺) − f(z⁻, u⁻) − Ξ(z⁺, z⁻, u⁻)‖` over zero-waves.
    pub fn zero_wave_defect(&self) -> f64 {
        let model = self.law.model();
        self.fronts()
            .filter(|f| f.kind == FrontKind::ZeroWave)
            .map(|f| {
                let d = model.flux(&f.z_right, &f.right).and_then(|fr| {
                    let fl = model.flux(&f.z_left, &f.left)?;
                    Ok(fr - fl - self.law.coupling.xi(&f.z_right, &f.z_left, &f.left)?)
                });
                d.map(|d| d.amax()).unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }

    /// Consistency checks of the whole state; returns the violations.
    pub fn audit(&self) -> Vec<String> {
        let model = self.law.model();
        let eps = self.cfg.eps;
        let mut bad = Vec::new();
        let mut prev: Option<&Front> = None;
        let mut zero_positions = Vec::new();
        for f in self.fronts() {
            let x = f.position(self.time);
            match prev {
                Some(p) => {
                    if p.right != f.left {
                        bad.push(format!("front {}: left state differs from neighbour", f.id));
                    }
                    if p.position(self.time) > x + 1e-9 * (1.0 + x.abs()) {
                        bad.push(format!("front {} out of order", f.id));
                    }
                }
                None => {
                    if f.left != self.far_left {
                        bad.push("leftmost front does not match the far-left state".into());
                    }
                }
            }
            match f.kind {
                FrontKind::Shock => {
                    if !(f.sigma < 0.0) {
                        bad.push(format!("shock {} with size {}", f.id, f.sigma));
                    }
                    let i = f.family.unwrap_or(0);
                    let s = crate::models::curves::shock_speed(model, &f.z_left, i, &f.left, &f.right).unwrap_or(f64::NAN);
                    if !((f.speed - s).abs() <= eps) {
                        bad.push(format!("shock {} speed {} vs {}", f.id, f.speed, s));
                    }
                }
                FrontKind::Rarefaction => {
                    if !(f.sigma > 0.0 && f.sigma <= eps * (1.0 + 1e-9)) {
                        bad.push(format!("rarefaction {} with size {}", f.id, f.sigma));
                    }
                    let lam = model.eigen(&f.z_left, &f.right).map(|e| e.values[f.family.unwrap_or(0)]);
                    if !lam.is_ok_and(|l| (f.speed - l).abs() <= eps) {
                        bad.push(format!("rarefaction {} speed off", f.id));
                    }
                }
                FrontKind::NonPhysical => {
                    if f.speed != model.lambda_hat() {
                        bad.push(format!("non-physical front {} speed {}", f.id, f.speed));
                    }
                }
                FrontKind::ZeroWave => {
                    zero_positions.push(f.x_ref);
                    if f.speed != 0.0 {
                        bad.push(format!("zero-wave {} moves", f.id));
                    }
                    let t = solve_t(model, self.law.coupling.as_ref(), &f.z_right, &f.z_left, &f.left);
                    if !t.is_ok_and(|u| (u - &f.right).amax() <= 1e-9) {
                        bad.push(format!("zero-wave {} violates the transmission relation", f.id));
                    }
                }
                FrontKind::Contact => {}
            }
            prev = Some(f);
        }
        if zero_positions != self.zeta.breaks() {
            bad.push("zero-wave positions differ from the coefficient jumps".into());
        }
        bad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{shock_curve, vector, CanalModel};

    #[test]
    fn nonphysical_crossing_keeps_the_shock() {
        let model = CanalModel::new(9.81);
        let z = vector(&[1.0, 0.0]);
        let a = vector(&[1.0, 0.0]);
        let b = shock_curve(&model, &z, 1, -0.05, &a).unwrap();
        let u0 = PiecewiseConstField::new(vec![0.0], vec![a.clone(), b]).unwrap();
        let law = BalanceLaw::canal(model);
        let mut t = Tracker::init(law, PiecewiseConstField::constant(z.clone()), &u0, TrackerConfig::new(0.01)).unwrap();
        let shock = t.fronts().next().unwrap().clone();
        assert_eq!(shock.kind, FrontKind::Shock);
        let lifted = vector(&[1.001, 0.0005]);
        let np = t.nonphysical(lifted.clone(), a, &z, -1.0, 0.0).unwrap();
        let out = t.nonphysical_cross(&np, &shock, 0.0, 0.0).unwrap();
        let fronts: Vec<&Front> = out
            .iter()
            .map(|o| match o {
                Outgoing::Front(f) => f,
                Outgoing::Zero { .. } => panic!("no zero-wave here"),
            })
            .collect();
        assert_eq!(fronts.len(), 2);
        assert_eq!(fronts[0].kind, FrontKind::Shock);
        assert_eq!(fronts[0].family, shock.family);
        assert_eq!(fronts[0].sigma, shock.sigma);
        assert_eq!(fronts[0].left, lifted);
        assert_eq!(fronts[1].kind, FrontKind::NonPhysical);
        assert_eq!(fronts[1].right, shock.right);
        assert_eq!(fronts[1].speed, t.law().model().lambda_hat());
    }
}
