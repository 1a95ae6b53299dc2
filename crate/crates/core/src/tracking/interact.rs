use super::{Event, Front, FrontKind, InteractionMode, InteractionRecord, Outgoing, Tracker, JITTER_REL};
use crate::error::{Error, Result};
use crate::models::curves::{hugoniot, rarefaction_curve};
use crate::models::FieldKind;
use crate::numerics::Vector;
use crate::riemann::{solve_generalized, solve_standard, solve_t, Wave, WaveType};

/// Physical waves with `|σ|` below this are left to the non-physical front.
const SIGMA_DROP: f64 = 1e-13;
/// Rarefaction pieces shorter than this fraction of `ε` join a neighbour.
const STEP_MERGE: f64 = 1e-3;

impl Tracker {
    /// Speed of a rarefaction step from `left` to `right`: the one conserving
    /// the model's conserved component when that is within `ε` of the
    /// characteristic speed, the characteristic speed at `right` otherwise.
    fn step_speed(&self, z: &Vector, i: usize, left: &Vector, right: &Vector) -> Result<f64> {
        let model = self.law.model();
        let lam = model.eigen(z, right)?.values[i];
        if let Some(c) = model.conserved_component() {
            let du = right[c] - left[c];
            if du.abs() > 1e-14 * (1.0 + left[c].abs()) {
                let s = (model.flux(z, right)?[c] - model.flux(z, left)?[c]) / du;
                if (s - lam).abs() <= self.cfg.eps {
                    return Ok(s);
                }
            }
        }
        Ok(lam)
    }

    /// Fronts for a wave of family `i`, size `sigma`, starting at `left`.
    /// Rarefactions longer than `ε` are split into steps.
    pub(super) fn single_wave(&mut self, z: &Vector, i: usize, sigma: f64, left: &Vector, x: f64, t: f64) -> Result<Vec<Front>> {
        let model = self.law.flux.clone();
        match model.field_kind(i) {
            FieldKind::LinearlyDegenerate => {
                let right = rarefaction_curve(model.as_ref(), z, i, sigma, left)?;
                let speed = model.eigen(z, left)?.values[i];
                Ok(vec![self.make_front(FrontKind::Contact, Some(i), sigma, x, t, speed, left.clone(), right, z.clone(), z.clone())])
            }
            FieldKind::GenuinelyNonlinear if sigma < 0.0 => {
                let hp = hugoniot(model.as_ref(), z, i, sigma, left)?;
                Ok(vec![self.make_front(FrontKind::Shock, Some(i), sigma, x, t, hp.speed, left.clone(), hp.state, z.clone(), z.clone())])
            }
            // a step carried through an interaction is not cut again
            FieldKind::GenuinelyNonlinear if sigma <= self.cfg.eps * (1.0 + 1e-9) => {
                let right = rarefaction_curve(model.as_ref(), z, i, sigma, left)?;
                let speed = self.step_speed(z, i, left, &right)?;
                Ok(vec![self.make_front(FrontKind::Rarefaction, Some(i), sigma, x, t, speed, left.clone(), right, z.clone(), z.clone())])
            }
            FieldKind::GenuinelyNonlinear => self.rarefaction_steps(z, i, sigma, left, x, t),
        }
    }

    /// Cuts a rarefaction where `λ_i` crosses a multiple of `ε`. With
    /// `∇λ_i · r_i = 1` the level `kε` sits at `σ = kε − λ_i(left)`, so the
    /// partition moves continuously with the data, unlike an equal split.
    fn rarefaction_steps(&mut self, z: &Vector, i: usize, sigma: f64, left: &Vector, x: f64, t: f64) -> Result<Vec<Front>> {
        let model = self.law.flux.clone();
        let eps = self.cfg.eps;
        let lam0 = model.eigen(z, left)?.values[i];
        let mut cuts = Vec::new();
        let mut k = (lam0 / eps).floor() + 1.0;
        loop {
            let s = k * eps - lam0;
            if s >= sigma - STEP_MERGE * eps {
                break;
            }
            if s > STEP_MERGE * eps {
                cuts.push(s);
            }
            k += 1.0;
        }
        cuts.push(sigma);
        // a merged remainder can push a piece just past ε; halve it
        let mut prev = 0.0;
        let mut k = 0;
        while k < cuts.len() {
            if cuts[k] - prev > eps * (1.0 + 1e-9) {
                cuts.insert(k, 0.5 * (prev + cuts[k]));
            }
            prev = cuts[k];
            k += 1;
        }
        let mut out = Vec::with_capacity(cuts.len());
        let mut w = left.clone();
        let mut prev = 0.0;
        for s in cuts {
            // integrate from the fan origin so steps do not accumulate error
            let right = rarefaction_curve(model.as_ref(), z, i, s, left)?;
            let speed = self.step_speed(z, i, &w, &right)?;
            out.push(self.make_front(FrontKind::Rarefaction, Some(i), s - prev, x, t, speed, w, right.clone(), z.clone(), z.clone()));
            w = right;
            prev = s;
        }
        Ok(out)
    }

    pub(super) fn wave_fronts(&mut self, w: &Wave, x: f64, t: f64) -> Result<Vec<Front>> {
        match w.kind {
            WaveType::Rarefaction => {
                let mut fronts = self.rarefaction_steps(&w.z, w.family, w.sigma, &w.left, x, t)?;
                // the fan's end state is authoritative
                if let Some(last) = fronts.last_mut() {
                    last.right = w.right.clone();
                }
                Ok(fronts)
            }
            WaveType::Shock => Ok(vec![self.make_front(
                FrontKind::Shock,
                Some(w.family),
                w.sigma,
                x,
                t,
                w.speed.0,
                w.left.clone(),
                w.right.clone(),
                w.z.clone(),
                w.z.clone(),
            )]),
            WaveType::Contact => Ok(vec![self.make_front(
                FrontKind::Contact,
                Some(w.family),
                w.sigma,
                x,
                t,
                w.speed.0,
                w.left.clone(),
                w.right.clone(),
                w.z.clone(),
                w.z.clone(),
            )]),
        }
    }

    pub(super) fn nonphysical(&mut self, left: Vector, right: Vector, z: &Vector, x: f64, t: f64) -> Option<Front> {
        if left == right {
            return None;
        }
        let sigma = (&right - &left).norm();
        let speed = self.law.model().lambda_hat();
        Some(self.make_front(FrontKind::NonPhysical, None, sigma, x, t, speed, left, right, z.clone(), z.clone()))
    }

    /// Makes speeds strictly increasing by nudging later fronts up by at
    /// most a few `η`; non-physical fronts keep `λ̂`.
    pub(super) fn order_speeds(&mut self, fronts: &mut [Front]) {
        let eta = JITTER_REL * self.law.model().lambda_hat();
        for k in 1..fronts.len() {
            if fronts[k].kind == FrontKind::NonPhysical {
                continue;
            }
            let floor = fronts[k - 1].speed + eta;
            if fronts[k].speed < floor {
                fronts[k].speed = floor;
                self.stats.jitter_applied += 1;
            }
        }
    }

    fn fan_fronts(&mut self, waves: impl Iterator<Item = Wave>, x: f64, t: f64) -> Result<Vec<Front>> {
        let mut out = Vec::new();
        for w in waves {
            out.extend(self.wave_fronts(&w, x, t)?);
        }
        self.order_speeds(&mut out);
        Ok(out)
    }

    fn accurate_standard(&mut self, l: &Front, r: &Front, x: f64, t: f64) -> Result<Vec<Outgoing>> {
        let model = self.law.flux.clone();
        let z = l.z_right.clone();
        let (_, fan) = solve_standard(model.as_ref(), &z, &l.left, &r.right)?;
        let waves: Vec<Wave> = fan.waves.clone();
        Ok(self.fan_fronts(waves.into_iter(), x, t)?.into_iter().map(Outgoing::Front).collect())
    }

    fn accurate_zero(&mut self, l: &Front, r: &Front, zw: &Front, zw_slot: usize, t: f64) -> Result<Vec<Outgoing>> {
        let model = self.law.flux.clone();
        let x = zw.x_ref;
        let fan = solve_generalized(model.as_ref(), self.law.coupling.as_ref(), &zw.z_left, &zw.z_right, &l.left, &r.right)?;
        let record = fan.zero_wave.clone().expect("distinct coefficients give a zero-wave");
        let left: Vec<Wave> = fan.left_waves().cloned().collect();
        let right: Vec<Wave> = fan.right_waves().cloned().collect();
        let mut out: Vec<Outgoing> = self.fan_fronts(left.into_iter(), x, t)?.into_iter().map(Outgoing::Front).collect();
        out.push(Outgoing::Zero {
            slot: zw_slot,
            left: record.left,
            right: record.right,
        });
        out.extend(self.fan_fronts(right.into_iter(), x, t)?.into_iter().map(Outgoing::Front));
        Ok(out)
    }

    /// Two physical fronts, resolved with one wave per incoming family and a
    /// non-physical front carrying the remainder.
    fn simplified_standard(&mut self, l: &Front, r: &Front, x: f64, t: f64) -> Result<Vec<Outgoing>> {
        let z = l.z_right.clone();
        let (i, j) = (l.family.unwrap_or(0), r.family.unwrap_or(0));
        let mut waves = Vec::new();
        let mut w = l.left.clone();
        let plan: Vec<(usize, f64)> = if i == j { vec![(i, l.sigma + r.sigma)] } else { vec![(j, r.sigma), (i, l.sigma)] };
        for (k, s) in plan {
            if s.abs() < SIGMA_DROP {
                continue;
            }
            let fronts = self.single_wave(&z, k, s, &w, x, t)?;
            w = fronts.last().map(|f| f.right.clone()).unwrap_or(w);
            waves.extend(fronts);
        }
        self.order_speeds(&mut waves);
        let mut out: Vec<Outgoing> = waves.into_iter().map(Outgoing::Front).collect();
        out.extend(self.nonphysical(w, r.right.clone(), &z, x, t).map(Outgoing::Front));
        Ok(out)
    }

    /// A physical front meets a zero-wave: the wave crosses unchanged in size
    /// and the mismatch goes to a non-physical front.
    fn simplified_zero(&mut self, l: &Front, r: &Front, zero_on_right: bool, zw_slot: usize, t: f64) -> Result<Vec<Outgoing>> {
        let model = self.law.flux.clone();
        let coupling = self.law.coupling.clone();
        let mut out = Vec::new();
        if zero_on_right {
            let (wave, zw) = (l, r);
            let x = zw.x_ref;
            let through = solve_t(model.as_ref(), coupling.as_ref(), &zw.z_right, &zw.z_left, &wave.left)?;
            let fronts = self.single_wave(&zw.z_right, wave.family.unwrap_or(0), wave.sigma, &through, x, t)?;
            let end = fronts.last().map(|f| f.right.clone()).unwrap_or_else(|| through.clone());
            out.push(Outgoing::Zero {
                slot: zw_slot,
                left: wave.left.clone(),
                right: through,
            });
            out.extend(fronts.into_iter().map(Outgoing::Front));
            out.extend(self.nonphysical(end, zw.right.clone(), &zw.z_right, x, t).map(Outgoing::Front));
        } else {
            let (zw, wave) = (l, r);
            let x = zw.x_ref;
            let fronts = self.single_wave(&zw.z_left, wave.family.unwrap_or(0), wave.sigma, &zw.left, x, t)?;
            let mid = fronts.last().map(|f| f.right.clone()).unwrap_or_else(|| zw.left.clone());
            let through = solve_t(model.as_ref(), coupling.as_ref(), &zw.z_right, &zw.z_left, &mid)?;
            out.extend(fronts.into_iter().map(Outgoing::Front));
            out.push(Outgoing::Zero {
                slot: zw_slot,
                left: mid,
                right: through.clone(),
            });
            out.extend(self.nonphysical(through, wave.right.clone(), &zw.z_right, x, t).map(Outgoing::Front));
        }
        Ok(out)
    }

    /// A non-physical front overtakes a physical front, which is rebuilt
    /// with the same family and size on the new left state.
    pub(super) fn nonphysical_cross(&mut self, np: &Front, wave: &Front, x: f64, t: f64) -> Result<Vec<Outgoing>> {
        let z = wave.z_left.clone();
        let fronts = self.single_wave(&z, wave.family.unwrap_or(0), wave.sigma, &np.left, x, t)?;
        let end = fronts.last().map(|f| f.right.clone()).unwrap_or_else(|| np.left.clone());
        let mut out: Vec<Outgoing> = fronts.into_iter().map(Outgoing::Front).collect();
        out.extend(self.nonphysical(end, wave.right.clone(), &z, x, t).map(Outgoing::Front));
        Ok(out)
    }

    /// A non-physical front reaches a zero-wave and passes through it.
    fn nonphysical_zero(&mut self, np: &Front, zw: &Front, zw_slot: usize, t: f64) -> Result<Vec<Outgoing>> {
        let model = self.law.flux.clone();
        let through = solve_t(model.as_ref(), self.law.coupling.as_ref(), &zw.z_right, &zw.z_left, &np.left)?;
        let mut out = vec![Outgoing::Zero {
            slot: zw_slot,
            left: np.left.clone(),
            right: through.clone(),
        }];
        out.extend(self.nonphysical(through, zw.right.clone(), &zw.z_right, zw.x_ref, t).map(Outgoing::Front));
        Ok(out)
    }

    fn outgoing(&mut self, l: &Front, ls: usize, r: &Front, rs: usize, x: f64, t: f64) -> Result<(Vec<Outgoing>, InteractionMode)> {
        use FrontKind::*;
        let rho = self.cfg.rho();
        match (l.kind, r.kind) {
            (NonPhysical, ZeroWave) => Ok((self.nonphysical_zero(l, r, rs, t)?, InteractionMode::NonPhysical)),
            (NonPhysical, k) if k.is_physical() => Ok((self.nonphysical_cross(l, r, x, t)?, InteractionMode::NonPhysical)),
            (a, ZeroWave) if a.is_physical() => {
                if l.sigma.abs() * r.sigma >= rho {
                    Ok((self.accurate_zero(l, r, r, rs, t)?, InteractionMode::Accurate))
                } else {
                    Ok((self.simplified_zero(l, r, true, rs, t)?, InteractionMode::Simplified))
                }
            }
            (ZeroWave, b) if b.is_physical() => {
                if r.sigma.abs() * l.sigma >= rho {
                    Ok((self.accurate_zero(l, r, l, ls, t)?, InteractionMode::Accurate))
                } else {
                    Ok((self.simplified_zero(l, r, false, ls, t)?, InteractionMode::Simplified))
                }
            }
            (a, b) if a.is_physical() && b.is_physical() => {
                if (l.sigma * r.sigma).abs() >= rho {
                    Ok((self.accurate_standard(l, r, x, t)?, InteractionMode::Accurate))
                } else {
                    Ok((self.simplified_standard(l, r, x, t)?, InteractionMode::Simplified))
                }
            }
            (a, b) => Err(Error::Config(format!("unexpected collision of {} and {} fronts", a.label(), b.label()))),
        }
    }

    /// Resolves one collision at time `t` and rewires the front list.
    pub(super) fn resolve(&mut self, ev: Event, t: f64) -> Result<()> {
        self.time = t;
        let (ls, rs) = (ev.left, ev.right);
        let l = self.front(ls).clone();
        let r = self.front(rs).clone();
        let x = match (l.kind, r.kind) {
            (FrontKind::ZeroWave, _) => l.x_ref,
            (_, FrontKind::ZeroWave) => r.x_ref,
            _ => 0.5 * (l.position(t) + r.position(t)),
        };
        let before = match self.last_potentials.take() {
            Some(vq) if self.cfg.record_glimm => Some(vq),
            _ => self.cfg.record_glimm.then(|| self.potentials()),
        };
        let (outs, mode) = self.outgoing(&l, ls, &r, rs, x, t).map_err(|e| Error::Event {
            time: t,
            position: x,
            fronts: (l.id as usize, r.id as usize),
            source: Box::new(e),
        })?;
        self.splice(ls, rs, outs);

        self.stats.interactions += 1;
        match mode {
            InteractionMode::Accurate => self.stats.accurate += 1,
            InteractionMode::Simplified => self.stats.simplified += 1,
            InteractionMode::NonPhysical => self.stats.nonphysical += 1,
        }
        self.stats.max_fronts = self.stats.max_fronts.max(self.alive);
        if self.cfg.record_glimm {
            let after = self.potentials();
            self.log.push(InteractionRecord {
                time: t,
                x,
                mode,
                kinds: (l.kind, r.kind),
                ids: (l.id, r.id),
                before,
                after: Some(after),
            });
            self.last_potentials = Some(after);
            let mut report = self.glimm_with(after.0, after.1);
            report.t = t;
            self.series.push(report);
        }
        Ok(())
    }

    fn splice(&mut self, ls: usize, rs: usize, outs: Vec<Outgoing>) {
        let prev = self.slots[ls].prev;
        let next = self.slots[rs].next;
        let kept: Vec<usize> = outs
            .iter()
            .filter_map(|o| match o {
                Outgoing::Zero { slot, .. } => Some(*slot),
                Outgoing::Front(_) => None,
            })
            .collect();
        for s in [ls, rs] {
            if !kept.contains(&s) {
                self.release(s);
            }
        }
        let mut cur = prev;
        let mut placed = Vec::with_capacity(outs.len());
        for o in outs {
            let slot = match o {
                Outgoing::Front(f) => self.alloc(f),
                Outgoing::Zero { slot, left, right } => {
                    let f = self.slots[slot].front.as_mut().expect("zero-wave slot");
                    f.left = left;
                    f.right = right;
                    f.strengths = Default::default();
                    slot
                }
            };
            self.link(cur, Some(slot));
            cur = Some(slot);
            placed.push(slot);
        }
        self.link(cur, next);
        let mut chain: Vec<usize> = Vec::with_capacity(placed.len() + 2);
        chain.extend(prev);
        chain.extend(placed);
        chain.extend(next);
        for w in chain.windows(2) {
            self.schedule(w[0], w[1]);
        }
    }
}
