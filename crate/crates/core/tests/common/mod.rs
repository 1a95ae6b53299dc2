//! Independent reference solutions shared by the integration tests.
#![allow(dead_code)]

/// Exact solution of the shallow-water Riemann problem for unit width and
/// flat bed, depth `h` and velocity `v`.
pub struct ExactShallowWater {
    pub g: f64,
    pub left: (f64, f64),
    pub right: (f64, f64),
    pub h_star: f64,
    pub v_star: f64,
}

impl ExactShallowWater {
    pub fn new(g: f64, left: (f64, f64), right: (f64, f64)) -> Self {
        let branch = |h: f64, hk: f64| -> (f64, f64) {
            if h <= hk {
                let f = 2.0 * ((g * h).sqrt() - (g * hk).sqrt());
                (f, (g / h).sqrt())
            } else {
                let s = (0.5 * g * (h + hk) / (h * hk)).sqrt();
                let ds = -0.25 * g / (h * h * s);
                ((h - hk) * s, s + (h - hk) * ds)
            }
        };
        let mut h = 0.5 * (left.0 + right.0);
        for _ in 0..100 {
            let (fl, dl) = branch(h, left.0);
            let (fr, dr) = branch(h, right.0);
            let r = fl + fr + right.1 - left.1;
            let step = r / (dl + dr);
            h -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let v_star = 0.5 * (left.1 + right.1) + 0.5 * (branch(h, right.0).0 - branch(h, left.0).0);
        Self {
            g,
            left,
            right,
            h_star: h,
            v_star,
        }
    }

    /// `(h, v)` on the ray `x/t = s`.
    pub fn sample(&self, s: f64) -> (f64, f64) {
        let g = self.g;
        let (hl, vl) = self.left;
        let (hr, vr) = self.right;
        let (hs, vs) = (self.h_star, self.v_star);
        let (cl, cr, cs) = ((g * hl).sqrt(), (g * hr).sqrt(), (g * hs).sqrt());
        if s <= vs {
            if hs > hl {
                let speed = vl - cl * (0.5 * (hs + hl) * hs / (hl * hl)).sqrt();
                if s <= speed { (hl, vl) } else { (hs, vs) }
            } else if s <= vl - cl {
                (hl, vl)
            } else if s >= vs - cs {
                (hs, vs)
            } else {
                let c = (vl + 2.0 * cl - s) / 3.0;
                (c * c / g, (vl + 2.0 * cl + 2.0 * s) / 3.0)
            }
        } else if hs > hr {
            let speed = vr + cr * (0.5 * (hs + hr) * hs / (hr * hr)).sqrt();
            if s <= speed { (hs, vs) } else { (hr, vr) }
        } else if s >= vr + cr {
            (hr, vr)
        } else if s <= vs + cs {
            (hs, vs)
        } else {
            let c = (-vr + 2.0 * cr + s) / 3.0;
            (c * c / g, (vr - 2.0 * cr + 2.0 * s) / 3.0)
        }
    }

    /// Conserved variables `(a, q)` on the ray.
    pub fn conserved(&self, s: f64) -> (f64, f64) {
        let (h, v) = self.sample(s);
        (h, h * v)
    }
}

/// First-order HLL finite-volume solution of the flat-bed, unit-width
/// shallow-water Riemann problem on `[-half, half]` at time `t`.
pub fn godunov_dam_break(g: f64, left: (f64, f64), right: (f64, f64), cells: usize, half: f64, t: f64) -> Vec<(f64, f64, f64)> {
    let dx = 2.0 * half / cells as f64;
    let mut u: Vec<(f64, f64)> = (0..cells)
        .map(|k| {
            let x = -half + (k as f64 + 0.5) * dx;
            if x < 0.0 { left } else { right }
        })
        .collect();
    let flux = |(a, q): (f64, f64)| (q, q * q / a + 0.5 * g * a * a);
    let mut time = 0.0;
    while time < t {
        let smax = u
            .iter()
            .map(|&(a, q)| (q / a).abs() + (g * a).sqrt())
            .fold(0.0f64, f64::max);
        let dt = (0.9 * dx / smax).min(t - time);
        let mut fluxes = Vec::with_capacity(cells + 1);
        for k in 0..=cells {
            let ul = u[k.saturating_sub(1)];
            let ur = u[k.min(cells - 1)];
            let (cl, cr) = ((g * ul.0).sqrt(), (g * ur.0).sqrt());
            let sl = (ul.1 / ul.0 - cl).min(ur.1 / ur.0 - cr);
            let sr = (ul.1 / ul.0 + cl).max(ur.1 / ur.0 + cr);
            let (fl, fr) = (flux(ul), flux(ur));
            let f = if sl >= 0.0 {
                fl
            } else if sr <= 0.0 {
                fr
            } else {
                (
                    (sr * fl.0 - sl * fr.0 + sl * sr * (ur.0 - ul.0)) / (sr - sl),
                    (sr * fl.1 - sl * fr.1 + sl * sr * (ur.1 - ul.1)) / (sr - sl),
                )
            };
            fluxes.push(f);
        }
        for k in 0..cells {
            u[k].0 -= dt / dx * (fluxes[k + 1].0 - fluxes[k].0);
            u[k].1 -= dt / dx * (fluxes[k + 1].1 - fluxes[k].1);
        }
        time += dt;
    }
    u.iter()
        .enumerate()
        .map(|(k, &(a, q))| (-half + (k as f64 + 0.5) * dx, a, q))
        .collect()
}
