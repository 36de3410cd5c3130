//! Complex-time turning points and the semiclassical pair yield.
//!
//! Pair creation in a time-dependent field maps onto over-the-barrier
//! scattering; the yield per mode follows from the reflection coefficient
//! as a sum over complex turning points `t_p` (zeros of `Omega(p, t)`):
//!
//! ```text
//! f(p) ~ Σ e^{-2 K_p}  +  Σ_{p<p'} 2 cos(2 θ_{pp'}) (-1)^{p-p'} e^{-K_p - K_{p'}}
//! K_p     = |∫_{t_p*}^{t_p} Omega dt|           (vertical contour)
//! θ_{pp'} = |∫_{Re t_p}^{Re t_p'} Omega dt|     (real axis)
//! ```
//!
//! Roots are located by Newton iteration on `k_par(t) = ±i eps_perp`, which
//! is `Omega^2 = 0` in factored form and avoids the square-root branch
//! during iteration. The alternating sign uses Re-sorted index parity.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qve::{Momentum, QveSolver};
use crate::real::Real;

/// Roots closer than this are considered the same (units 1/m).
const DEDUP_RADIUS: f64 = 1e-4;
/// Default quadrature node count for the action contour.
const ACTION_NODES: usize = 768;

/// Complex rectangle to search for turning points; only the upper
/// half-plane is meaningful (conjugate roots are implied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox<T> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

impl<T: Real> SearchBox<T> {
    pub fn new(re_min: T, re_max: T, im_min: T, im_max: T) -> Result<Self> {
        if !(re_min < re_max) || !(im_min < im_max) || !(im_min > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "search box [{re_min}, {re_max}] x ({im_min}, {im_max}] must be a \
                 rectangle in the upper half-plane"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Default box for a solver: three pulse widths in Re; in Im, past the
    /// height `asinh(gamma)/omega` where the first root family sits.
    pub fn default_for(solver: &QveSolver<T>) -> Self {
        let cfg = solver.config();
        let re = cfg.tau() * T::of(3.0);
        let im_max = match cfg.adiabaticity() {
            Ok(gamma) => (gamma * T::of(4.0)).asinh() / cfg.omega() + T::one(),
            Err(_) => T::of(2.0) / cfg.omega(),
        };
        let cap = solver.potential().continuation_height() - T::of(0.5);
        Self {
            re_min: -re,
            re_max: re,
            im_min: T::of(0.05),
            im_max: im_max.min(cap),
        }
    }

    fn contains(&self, t: Complex<T>) -> bool {
        t.re >= self.re_min && t.re <= self.re_max && t.im >= self.im_min && t.im <= self.im_max
    }
}

/// One upper-half-plane turning point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoint<T> {
    pub t: Complex<T>,
    /// |Omega(p, t)| at the reported root.
    pub residual: T,
    /// Action K of the vertical contour through the root.
    pub action: T,
}

/// All roots found in a box, Re-sorted, with the pairwise phase table.
#[derive(Debug, Clone)]
pub struct TurningPointSet<T> {
    pub points: Vec<TurningPoint<T>>,
    /// Flat row-major `theta[i * n + j]`.
    thetas: Vec<T>,
    pub search_box: SearchBox<T>,
}

impl<T: Real> TurningPointSet<T> {
    pub fn theta(&self, i: usize, j: usize) -> T {
        self.thetas[i * self.points.len() + j]
    }
}

/// Neumaier-compensated accumulator; the polished residuals sit at the
/// rounding floor of the vertical quadrature, which a naive sum would
/// raise by an order of magnitude.
#[derive(Clone, Copy)]
struct Compensated<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Compensated<T> {
    fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
    fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }
    fn total(self) -> T {
        self.sum + self.carry
    }
}

/// `A(x + i y)` with a fixed panel layout and compensated summation: the
/// result varies smoothly with `t` at the last representable digits,
/// which the residual polisher depends on. (The adaptive path refines
/// panels discontinuously in `y`, leaving ~1e-14 jumps.)
fn a_complex_smooth<T: Real>(solver: &QveSolver<T>, x: T, y: T) -> Complex<T> {
    a_complex_smooth_impl(solver, x, y)
}

#[doc(hidden)]
pub fn debug_a_complex_smooth<T: Real>(solver: &QveSolver<T>, x: T, y: T) -> Complex<T> {
    a_complex_smooth_impl(solver, x, y)
}

fn a_complex_smooth_impl<T: Real>(solver: &QveSolver<T>, x: T, y: T) -> Complex<T> {
    let cfg = solver.config();
    let a_re = solver.potential().eval(x);
    if y == T::zero() {
        return Complex::new(a_re, T::zero());
    }
    let n_panels = (y.abs() / T::of(0.5)).ceil().to_f64_lossy().max(1.0) as usize;
    let mut acc_re = Compensated::new();
    let mut acc_im = Compensated::new();
    let width = y / T::of(n_panels as f64);
    for panel in 0..n_panels {
        let lo = width * T::of(panel as f64);
        let center = lo + width * T::of(0.5);
        let half = width * T::of(0.5);
        for (gx, gw) in GL15.iter() {
            let s = center + half * T::of(*gx);
            let value = cfg.eval(Complex::new(x, s)) * (T::of(*gw) * half);
            acc_re.add(value.re);
            acc_im.add(value.im);
        }
    }
    // A = A(x) - i * integral
    let integral = Complex::new(acc_re.total(), acc_im.total());
    Complex::new(a_re, T::zero()) - Complex::new(T::zero(), T::one()) * integral
}

/// Factored residual |Omega^2| = |k - i eps| |k + i eps|; immune to the
/// cancellation that the plain sum-of-squares form suffers near a root,
/// and evaluated through the smooth fixed-panel potential.
fn omega_sq_abs<T: Real>(solver: &QveSolver<T>, mom: &Momentum<T>, t: Complex<T>) -> Result<T> {
    let a = a_complex_smooth(solver, t.re, t.im);
    let k = Complex::new(mom.p_par(), T::zero()) - a;
    let ie = Complex::new(T::zero(), mom.eps_perp());
    Ok((k - ie).norm() * (k + ie).norm())
}

const GL15: [(f64, f64); 15] = [
    (-0.987992518020485428489565718587, 0.030753241996117268354628393577),
    (-0.937273392400705904307758947710, 0.070366047488108124709267416451),
    (-0.848206583410427216200648320774, 0.107159220467171935011869546686),
    (-0.724417731360170047416186054614, 0.139570677926154314447804794511),
    (-0.570972172608538847537226737254, 0.166269205816993933553200860481),
    (-0.394151347077563369897207370981, 0.186161000015562211026800561866),
    (-0.201194093997434522300628303395, 0.198431485327111576456118326444),
    (0.0, 0.202578241925561272880620199968),
    (0.201194093997434522300628303395, 0.198431485327111576456118326444),
    (0.394151347077563369897207370981, 0.186161000015562211026800561866),
    (0.570972172608538847537226737254, 0.166269205816993933553200860481),
    (0.724417731360170047416186054614, 0.139570677926154314447804794511),
    (0.848206583410427216200648320774, 0.107159220467171935011869546686),
    (0.937273392400705904307758947710, 0.070366047488108124709267416451),
    (0.987992518020485428489565718587, 0.030753241996117268354628393577),
];

/// Newton iteration for one branch (`sign = ±1` in `k = sign * i eps`).
fn newton_root<T: Real>(
    solver: &QveSolver<T>,
    mom: &Momentum<T>,
    seed: Complex<T>,
    sign: T,
    boks: &SearchBox<T>,
) -> Option<Complex<T>> {
    let target = Complex::new(T::zero(), sign * mom.eps_perp());
    let mut t = seed;
    let re_margin = (boks.re_max - boks.re_min) * T::of(0.2) + T::of(20.0);
    for _ in 0..60 {
        let a = solver.potential().eval_complex(t).ok()?;
        let g = Complex::new(mom.p_par(), T::zero()) - a - target;
        // dk/dt = E(t)
        let e = solver.config().eval(t);
        if e.norm() < T::of(1e-30) {
            return None;
        }
        let step = g / e;
        let limit = T::of(3.0);
        let step = if step.norm() > limit {
            step * (limit / step.norm())
        } else {
            step
        };
        t = t - step;
        if t.re < boks.re_min - re_margin
            || t.re > boks.re_max + re_margin
            || t.im > boks.im_max + T::of(3.0)
            || t.im < -T::one()
        {
            return None;
        }
        if step.norm() < T::of(1e-13) * (T::one() + t.norm()) {
            // converged; confirm it is actually a root
            let a = solver.potential().eval_complex(t).ok()?;
            let g = Complex::new(mom.p_par(), T::zero()) - a - target;
            return (g.norm() < T::of(1e-6)).then_some(t);
        }
    }
    None
}

/// Polish a converged iterate down to the evaluation noise floor of
/// |Omega^2|: a few Newton steps on the measured factored residual keeping
/// the best visited point, then a shrinking-grid descent at the last few
/// representable digits.
fn polish_residual<T: Real>(
    solver: &QveSolver<T>,
    mom: &Momentum<T>,
    t0: Complex<T>,
) -> (Complex<T>, T) {
    let eps = mom.eps_perp();
    let mut best = t0;
    let mut best_r = match omega_sq_abs(solver, mom, t0) {
        Ok(r) => r,
        Err(_) => return (t0, T::infinity()),
    };

    // Newton on the measured g = k -/+ i eps; the branch follows the sign
    // of Im k at the current point.
    let mut t = t0;
    for _ in 0..8 {
        let Ok(a) = solver.potential().eval_complex(t) else {
            break;
        };
        let k = Complex::new(mom.p_par(), T::zero()) - a;
        let sign = if k.im >= T::zero() { T::one() } else { -T::one() };
        let g = k - Complex::new(T::zero(), sign * eps);
        let e = solver.config().eval(t);
        if e.norm() < T::of(1e-30) {
            break;
        }
        t = t - g / e;
        if let Ok(r) = omega_sq_abs(solver, mom, t) {
            if r < best_r {
                best_r = r;
                best = t;
            }
        }
        if best_r < T::of(0.3e-16) {
            return (best, best_r);
        }
    }

    // Grid descent; the starting radius covers both the distance implied
    // by the measured residual (|Omega^2| / |dOmega^2/dt| ~ |Omega^2| for
    // these scales) and the representable-granularity floor.
    let scale = (best.re.abs() + best.im.abs()).max(T::one());
    let mut radius = (best_r * T::of(4.0)).max(scale * T::epsilon() * T::of(64.0));
    for _ in 0..14 {
        let mut improved = false;
        for dx in [-T::one(), T::zero(), T::one()] {
            for dy in [-T::one(), T::zero(), T::one()] {
                if dx == T::zero() && dy == T::zero() {
                    continue;
                }
                let cand = best + Complex::new(dx * radius, dy * radius);
                if let Ok(r) = omega_sq_abs(solver, mom, cand) {
                    if r < best_r {
                        best_r = r;
                        best = cand;
                        improved = true;
                    }
                }
            }
        }
        if best_r < T::of(0.3e-16) {
            break;
        }
        if !improved {
            radius = radius * T::of(0.4);
            if radius < scale * T::epsilon() {
                break;
            }
        }
    }
    (best, best_r)
}

/// Locate every turning point in the box from a uniform seed grid, polish,
/// dedup, and attach actions and pairwise phases.
///
/// `seeds_per_period` is the horizontal seed density per carrier period
/// (at least 4). Seeds that fail to converge are silently discarded; an
/// empty result is a valid outcome for a box with no roots.
pub fn find_turning_points<T: Real>(
    solver: &QveSolver<T>,
    mom: &Momentum<T>,
    boks: &SearchBox<T>,
    seeds_per_period: usize,
) -> Result<TurningPointSet<T>> {
    if seeds_per_period < 4 {
        return Err(Error::InvalidConfig(format!(
            "seed density {seeds_per_period} per carrier period is below the minimum of 4"
        )));
    }
    let period = T::of(2.0) * T::PI() / solver.config().omega();
    let dx = period / T::of(seeds_per_period as f64);
    let n_cols = ((boks.re_max - boks.re_min) / dx).ceil().to_f64_lossy() as usize;
    let row_height = T::of(0.5);
    let n_rows = (((boks.im_max - boks.im_min) / row_height)
        .ceil()
        .to_f64_lossy() as usize)
        .clamp(4, 32);
    let dy = (boks.im_max - boks.im_min) / T::of(n_rows as f64);

    let seeds: Vec<Complex<T>> = (0..n_cols)
        .flat_map(|i| {
            (0..n_rows).map(move |j| {
                Complex::new(
                    boks.re_min + dx * (T::of(i as f64) + T::of(0.5)),
                    boks.im_min + dy * (T::of(j as f64) + T::of(0.5)),
                )
            })
        })
        .collect();

    let mut found: Vec<Complex<T>> = seeds
        .par_iter()
        .flat_map_iter(|&seed| {
            [T::one(), -T::one()]
                .into_iter()
                .filter_map(move |sign| newton_root(solver, mom, seed, sign, boks))
        })
        .collect();

    // sequential dedup after a deterministic sort
    found.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let radius = T::of(DEDUP_RADIUS);
    let mut unique: Vec<Complex<T>> = Vec::new();
    for t in found {
        if !boks.contains(t) {
            continue;
        }
        if unique.iter().all(|u| (t - *u).norm() > radius) {
            unique.push(t);
        }
    }

    let polished: Vec<(Complex<T>, T)> = unique
        .par_iter()
        .map(|&t| polish_residual(solver, mom, t))
        .collect();

    let mut points: Vec<TurningPoint<T>> = polished
        .into_iter()
        .filter(|&(t, _)| boks.contains(t))
        .map(|(t, r)| {
            action_k_with_nodes(solver, mom, t, ACTION_NODES).map(|action| TurningPoint {
                t,
                residual: r.sqrt(),
                action,
            })
        })
        .collect::<Result<_>>()?;
    points.sort_by(|a, b| a.t.re.partial_cmp(&b.t.re).unwrap());

    // Pairwise phases from one cumulative integral of Omega over the
    // cached real-axis grid (trapezoid; the grid is dense enough that the
    // error is far below anything cos(2 theta) can feel).
    let (t0, h, a_nodes, _) = solver.potential().grid();
    let eps_sq = mom.eps_perp() * mom.eps_perp();
    let mut cum = Vec::with_capacity(a_nodes.len());
    let mut acc = T::zero();
    let mut prev = {
        let k = mom.p_par() - a_nodes[0];
        (eps_sq + k * k).sqrt()
    };
    cum.push(acc);
    for a in &a_nodes[1..] {
        let k = mom.p_par() - *a;
        let om = (eps_sq + k * k).sqrt();
        acc += (prev + om) * h * T::of(0.5);
        prev = om;
        cum.push(acc);
    }
    let cum_at = |x: T| -> T {
        let pos = ((x - t0) / h)
            .max(T::zero())
            .min(T::of((cum.len() - 1) as f64));
        let i = pos.floor().to_f64_lossy() as usize;
        let i = i.min(cum.len() - 2);
        let s = pos - T::of(i as f64);
        cum[i] * (T::one() - s) + cum[i + 1] * s
    };

    let n = points.len();
    let mut thetas = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let th = (cum_at(points[j].t.re) - cum_at(points[i].t.re)).abs();
            thetas[i * n + j] = th;
            thetas[j * n + i] = th;
        }
    }

    Ok(TurningPointSet {
        points,
        thetas,
        search_box: *boks,
    })
}

/// Action `K = |∫_{t*}^{t} Omega dt|` along the straight vertical contour
/// through the root, with the square-root branch tracked continuously from
/// its positive real value on the axis.
pub fn action_k<T: Real>(solver: &QveSolver<T>, mom: &Momentum<T>, t: Complex<T>) -> Result<T> {
    action_k_with_nodes(solver, mom, t, ACTION_NODES)
}

/// As [`action_k`] with an explicit Simpson node count (even, >= 8).
/// Doubling the count from the default moves the result by < 1e-8.
pub fn action_k_with_nodes<T: Real>(
    solver: &QveSolver<T>,
    mom: &Momentum<T>,
    t: Complex<T>,
    nodes: usize,
) -> Result<T> {
    assert!(nodes >= 8 && nodes % 2 == 0, "need an even node count >= 8");
    let x = t.re;
    let h = t.im;
    if !(h > T::zero()) {
        return Err(Error::InvalidConfig(format!(
            "action contour needs an upper-half-plane root, got Im t = {h}"
        )));
    }
    let eps_sq = mom.eps_perp() * mom.eps_perp();
    let cfg = solver.config();

    // Substitution y = h (1 - u^2) removes the sqrt branch-point at the
    // root: S = ∫_0^h Omega dy = ∫_0^1 Omega(x + i y(u)) 2 h u du, smooth
    // in u. March from the axis (u = 1) toward the root (u = 0), building
    // A incrementally along the contour and tracking the branch.
    let a_axis = Complex::new(solver.potential().eval(x), T::zero());
    let du = T::one() / T::of(nodes as f64);
    let mut integrand = vec![Complex::new(T::zero(), T::zero()); nodes + 1];
    let mut a = a_axis;
    let mut y_prev = T::zero();
    let omega_axis = {
        let k = mom.p_par() - a_axis.re;
        (eps_sq + k * k).sqrt()
    };
    let mut omega_prev = Complex::new(omega_axis, T::zero());
    // u = 1 endpoint: integrand = Omega * 2 h u with y = 0
    integrand[nodes] = omega_prev * (T::of(2.0) * h);
    for step in 1..=nodes {
        let u = T::one() - du * T::of(step as f64);
        let y = h * (T::one() - u * u);
        // extend the vertical leg of A by Gauss quadrature on [y_prev, y]
        let mut leg = Complex::new(T::zero(), T::zero());
        for (gx, gw) in GL7.iter() {
            let s = (y_prev + y) * T::of(0.5) + (y - y_prev) * T::of(0.5) * T::of(*gx);
            leg = leg + cfg.eval(Complex::new(x, s)) * T::of(*gw);
        }
        leg = leg * ((y - y_prev) * T::of(0.5));
        a = a - Complex::new(T::zero(), T::one()) * leg;
        y_prev = y;

        let k = Complex::new(mom.p_par(), T::zero()) - a;
        let om_sq = Complex::new(eps_sq, T::zero()) + k * k;
        let mut om = om_sq.sqrt();
        // continuity: pick the sign closest to the previous value
        if (-om - omega_prev).norm() < (om - omega_prev).norm() {
            om = -om;
        }
        // Discontinuity guard, active only away from the root where the
        // magnitude carries sign information; near Omega = 0 both sign
        // choices are equally tiny and the step contributes nothing.
        let magnitude = om.norm() + omega_prev.norm();
        if magnitude > T::of(0.1) * omega_axis {
            let jump = (om - omega_prev).norm();
            if jump > T::of(0.75) * magnitude {
                return Err(Error::BranchTracking {
                    at: format!("{:?}", (x.to_f64_lossy(), y.to_f64_lossy())),
                });
            }
        }
        omega_prev = om;
        integrand[nodes - step] = om * (T::of(2.0) * h * u);
    }

    // Simpson over u in [0, 1]
    let mut sum = integrand[0] + integrand[nodes];
    for (j, value) in integrand.iter().enumerate().take(nodes).skip(1) {
        let w = if j % 2 == 1 { T::of(4.0) } else { T::of(2.0) };
        sum = sum + *value * w;
    }
    let s = sum * (du / T::of(3.0));
    // full contour = 2 i Re(S) by Schwarz reflection
    Ok((T::of(2.0) * s.re).abs())
}

const GL7: [(f64, f64); 7] = [
    (-0.949107912342758524526189684048, 0.129484966168869693270611432679),
    (-0.741531185599394439863864773281, 0.279705391489276667901467771424),
    (-0.405845151377397166906606412077, 0.381830050505118944950369775489),
    (0.0, 0.417959183673469387755102040816),
    (0.405845151377397166906606412077, 0.381830050505118944950369775489),
    (0.741531185599394439863864773281, 0.279705391489276667901467771424),
    (0.949107912342758524526189684048, 0.129484966168869693270611432679),
];

/// Interference phase `theta = |∫ Omega dt|` between the real parts of two
/// roots, along the real axis.
pub fn interference_theta<T: Real>(
    solver: &QveSolver<T>,
    mom: &Momentum<T>,
    t_a: Complex<T>,
    t_b: Complex<T>,
) -> Result<T> {
    let (lo, hi) = if t_a.re <= t_b.re {
        (t_a.re, t_b.re)
    } else {
        (t_b.re, t_a.re)
    };
    if lo == hi {
        return Ok(T::zero());
    }
    let eps_sq = mom.eps_perp() * mom.eps_perp();
    let omega = |t: T| {
        let k = mom.p_par() - solver.potential().eval(t);
        (eps_sq + k * k).sqrt()
    };
    let value: T =
        crate::field::potential::adaptive_quad(&omega, lo, hi, T::of(1e-12))?;
    Ok(value.abs())
}

/// Semiclassical estimate of the occupation from a turning-point set:
/// direct terms plus pairwise interference with Re-sorted index parity.
pub fn semiclassical_f<T: Real>(set: &TurningPointSet<T>) -> T {
    let n = set.points.len();
    let mut f = T::zero();
    for p in &set.points {
        f += (-T::of(2.0) * p.action).exp();
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let parity = if (j - i) % 2 == 1 { -T::one() } else { T::one() };
            let theta = set.theta(i, j);
            f += T::of(2.0)
                * (T::of(2.0) * theta).cos()
                * parity
                * (-set.points[i].action - set.points[j].action).exp();
        }
    }
    f
}

/// Dense |Omega^2| samples over a complex-time rectangle, for contour plots
/// and for cross-checking root locations against grid minima.
#[derive(Debug, Clone)]
pub struct Omega2Grid<T> {
    pub re_axis: Vec<T>,
    pub im_axis: Vec<T>,
    /// Row-major: `values[i_im * re_axis.len() + i_re]`.
    pub values: Vec<T>,
}

impl<T: Real> Omega2Grid<T> {
    pub fn value(&self, i_re: usize, i_im: usize) -> T {
        self.values[i_im * self.re_axis.len() + i_re]
    }

    /// Strict interior local minima as `(i_re, i_im)` pairs.
    pub fn local_minima(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.re_axis.len(), self.im_axis.len());
        let mut out = Vec::new();
        for iy in 1..ny.saturating_sub(1) {
            for ix in 1..nx.saturating_sub(1) {
                let c = self.value(ix, iy);
                let mut is_min = true;
                'probe: for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let v = self.value((ix as i64 + dx) as usize, (iy as i64 + dy) as usize);
                        if v <= c {
                            is_min = false;
                            break 'probe;
                        }
                    }
                }
                if is_min {
                    out.push((ix, iy));
                }
            }
        }
        out
    }
}

/// Evaluate |Omega^2| on a uniform grid. The box may span both half-planes
/// (for conjugate-symmetry displays); the vertical legs of `A` are built
/// incrementally per column.
pub fn omega2_grid<T: Real>(
    solver: &QveSolver<T>,
    mom: &Momentum<T>,
    re_range: (T, T),
    im_range: (T, T),
    resolution: T,
) -> Result<Omega2Grid<T>> {
    if !(resolution > T::zero()) {
        return Err(Error::InvalidConfig(format!(
            "grid resolution must be positive, got {resolution}"
        )));
    }
    let height = solver.potential().continuation_height();
    if im_range.0.abs() > height || im_range.1.abs() > height {
        return Err(Error::OutsideCache {
            t: format!(
                "{:?}",
                (im_range.0.to_f64_lossy(), im_range.1.to_f64_lossy())
            ),
            t_span: solver.config().t_span().to_f64_lossy(),
            height: height.to_f64_lossy(),
        });
    }
    let axis = |lo: T, hi: T| -> Vec<T> {
        let n = ((hi - lo) / resolution).ceil().to_f64_lossy() as usize;
        (0..=n).map(|i| lo + resolution * T::of(i as f64)).collect()
    };
    let re_axis = axis(re_range.0, re_range.1);
    let im_axis = axis(im_range.0, im_range.1);
    let eps_sq = mom.eps_perp() * mom.eps_perp();
    let cfg = *solver.config();

    // split rows into below-axis and above-axis parts and integrate away
    // from the real axis in both directions
    let columns: Vec<Vec<T>> = re_axis
        .par_iter()
        .map(|&x| {
            let a_axis = solver.potential().eval(x);
            let mut col = vec![T::zero(); im_axis.len()];
            let om2 = |a: Complex<T>| -> T {
                let k = Complex::new(mom.p_par(), T::zero()) - a;
                (Complex::new(eps_sq, T::zero()) + k * k).norm()
            };
            // upward sweep
            let mut a = Complex::new(a_axis, T::zero());
            let mut y_prev = T::zero();
            for (iy, &y) in im_axis.iter().enumerate() {
                if y < T::zero() {
                    continue;
                }
                a = a - Complex::new(T::zero(), T::one()) * vertical_leg(&cfg, x, y_prev, y);
                y_prev = y;
                col[iy] = om2(a);
            }
            // downward sweep
            let mut a = Complex::new(a_axis, T::zero());
            let mut y_prev = T::zero();
            for (iy, &y) in im_axis.iter().enumerate().rev() {
                if y >= T::zero() {
                    continue;
                }
                a = a - Complex::new(T::zero(), T::one()) * vertical_leg(&cfg, x, y_prev, y);
                y_prev = y;
                col[iy] = om2(a);
            }
            col
        })
        .collect();

    let mut values = vec![T::zero(); re_axis.len() * im_axis.len()];
    for (ix, col) in columns.iter().enumerate() {
        for (iy, &v) in col.iter().enumerate() {
            values[iy * re_axis.len() + ix] = v;
        }
    }
    Ok(Omega2Grid {
        re_axis,
        im_axis,
        values,
    })
}

/// `∫_{y0}^{y1} E(x + i s) ds` by a single Gauss panel; the grid steps are
/// far smaller than any scale of the integrand.
fn vertical_leg<T: Real>(
    cfg: &crate::field::FieldConfig<T>,
    x: T,
    y0: T,
    y1: T,
) -> Complex<T> {
    let mut leg = Complex::new(T::zero(), T::zero());
    for (gx, gw) in GL7.iter() {
        let s = (y0 + y1) * T::of(0.5) + (y1 - y0) * T::of(0.5) * T::of(*gx);
        leg = leg + cfg.eval(Complex::new(x, s)) * T::of(*gw);
    }
    leg * ((y1 - y0) * T::of(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;
    use crate::qve::QveSolver;

    fn solver_b0() -> QveSolver<f64> {
        let cfg = FieldConfig::new(0.1, 0.5, 100.0, 0.0, 0.0).unwrap();
        QveSolver::new(cfg).unwrap()
    }

    fn small_box() -> SearchBox<f64> {
        SearchBox::new(-30.0, 30.0, 0.5, 7.5).unwrap()
    }

    #[test]
    fn finds_the_known_dominant_root() {
        // frozen from a 30-digit Newton run on the closed-form potential
        let solver = solver_b0();
        let mom = Momentum::new(0.08, 0.0);
        let set = find_turning_points(&solver, &mom, &small_box(), 4).unwrap();
        assert!(!set.points.is_empty());
        let dominant = set
            .points
            .iter()
            .min_by(|a, b| a.t.im.partial_cmp(&b.t.im).unwrap())
            .unwrap();
        let nearest = set
            .points
            .iter()
            .min_by(|a, b| {
                (a.t - num_complex::Complex64::new(-0.1565, 4.6299))
                    .norm()
                    .partial_cmp(&(b.t - num_complex::Complex64::new(-0.1565, 4.6299)).norm())
                    .unwrap()
            })
            .unwrap();
        assert!((nearest.t.re - -0.156502269558).abs() < 1e-6, "{}", nearest.t);
        assert!((nearest.t.im - 4.629861602301).abs() < 1e-6, "{}", nearest.t);
        assert!(dominant.residual < 1e-7);
        // action frozen from the same high-precision run
        assert!(
            (nearest.action - 8.1254784088).abs() < 1e-5,
            "K = {}",
            nearest.action
        );
    }

    #[test]
    fn root_pattern_is_periodic_in_re() {
        // within one branch family the roots repeat with the carrier period
        let solver = solver_b0();
        let mom = Momentum::new(0.08, 0.0);
        let set = find_turning_points(&solver, &mom, &small_box(), 4).unwrap();
        let period = 2.0 * std::f64::consts::PI / 0.5;
        assert!(set.points.len() >= 6);
        for pair in set.points.windows(2) {
            // conjugate families interleave: consecutive gaps sum to the period
            let gap = pair[1].t.re - pair[0].t.re;
            assert!(gap > 0.0 && gap < period);
        }
        for i in 0..set.points.len() - 2 {
            let gap = set.points[i + 2].t.re - set.points[i].t.re;
            assert!(
                (gap - period).abs() < 0.05,
                "family spacing {gap} vs period {period}"
            );
        }
    }

    #[test]
    fn roots_mirror_for_zero_parallel_momentum() {
        let solver = solver_b0();
        let mom = Momentum::new(0.0, 0.0);
        let set = find_turning_points(&solver, &mom, &small_box(), 4).unwrap();
        assert!(!set.points.is_empty());
        for p in &set.points {
            let mirrored = num_complex::Complex64::new(-p.t.re, p.t.im);
            assert!(
                set.points.iter().any(|q| (q.t - mirrored).norm() < 1e-6),
                "no mirror for {}",
                p.t
            );
        }
    }

    #[test]
    fn empty_box_yields_empty_set() {
        // no roots close to the real axis for these parameters
        let solver = solver_b0();
        let mom = Momentum::new(0.08, 0.0);
        let boks = SearchBox::new(-30.0, 30.0, 0.2, 2.0).unwrap();
        let set = find_turning_points(&solver, &mom, &boks, 4).unwrap();
        assert!(set.points.is_empty());
    }

    #[test]
    fn action_quadrature_converges_under_node_doubling() {
        let solver = solver_b0();
        let mom = Momentum::new(0.08, 0.0);
        let root = num_complex::Complex64::new(-0.156502269558073, 4.62986160230096);
        let k1 = action_k_with_nodes(&solver, &mom, root, 768).unwrap();
        let k2 = action_k_with_nodes(&solver, &mom, root, 1536).unwrap();
        assert!(k1 > 0.0);
        assert!((k1 - k2).abs() < 1e-8, "{k1} vs {k2}");
    }

    #[test]
    fn action_grows_with_transverse_energy() {
        // larger eps_perp pushes the root away from the axis and raises K
        let solver = solver_b0();
        let boks = SearchBox::new(-7.0, 7.0, 1.0, 9.0).unwrap();
        let mut last_im = 0.0;
        let mut last_k = 0.0;
        for p_perp in [0.0, 0.3, 0.6] {
            let mom = Momentum::new(0.08, p_perp);
            let set = find_turning_points(&solver, &mom, &boks, 4).unwrap();
            let dom = set
                .points
                .iter()
                .min_by(|a, b| a.t.im.partial_cmp(&b.t.im).unwrap())
                .expect("root in box");
            assert!(dom.t.im > last_im, "Im not increasing at p_perp={p_perp}");
            assert!(dom.action > last_k, "K not increasing at p_perp={p_perp}");
            last_im = dom.t.im;
            last_k = dom.action;
        }
    }

    #[test]
    fn theta_basics() {
        let solver = solver_b0();
        let mom = Momentum::new(0.08, 0.0);
        let a = num_complex::Complex64::new(-0.15, 4.6);
        let b = num_complex::Complex64::new(6.44, 4.6);
        assert_eq!(interference_theta(&solver, &mom, a, a).unwrap(), 0.0);
        let th_ab = interference_theta(&solver, &mom, a, b).unwrap();
        let th_ba = interference_theta(&solver, &mom, b, a).unwrap();
        assert_eq!(th_ab, th_ba);
        // theta ~ mean Omega times the gap; Omega is within [eps, ~1.03]
        let gap = b.re - a.re;
        assert!(th_ab > 0.99 * gap && th_ab < 1.05 * gap, "theta {th_ab}");
    }

    #[test]
    fn theta_table_matches_direct_quadrature() {
        let solver = solver_b0();
        let mom = Momentum::new(0.08, 0.0);
        let set = find_turning_points(&solver, &mom, &small_box(), 4).unwrap();
        assert!(set.points.len() >= 3);
        let direct =
            interference_theta(&solver, &mom, set.points[0].t, set.points[2].t).unwrap();
        assert!((set.theta(0, 2) - direct).abs() < 1e-6);
    }

    #[test]
    fn semiclassical_single_and_double_root_limits() {
        let boks = small_box();
        let single = TurningPointSet {
            points: vec![TurningPoint {
                t: num_complex::Complex64::new(0.0, 4.6),
                residual: 0.0,
                action: 3.0,
            }],
            thetas: vec![0.0],
            search_box: boks,
        };
        assert!((semiclassical_f(&single) - (-6.0f64).exp()).abs() < 1e-18);

        // two equal-K roots: f within [0, 4 e^{-2K}] across all phases
        for theta in [0.0, 0.3, 0.7853981633974483, 1.2, 1.5707963267948966] {
            let pair = TurningPointSet {
                points: vec![
                    TurningPoint {
                        t: num_complex::Complex64::new(0.0, 4.6),
                        residual: 0.0,
                        action: 3.0,
                    },
                    TurningPoint {
                        t: num_complex::Complex64::new(6.3, 4.6),
                        residual: 0.0,
                        action: 3.0,
                    },
                ],
                thetas: vec![0.0, theta, theta, 0.0],
                search_box: boks,
            };
            let f = semiclassical_f(&pair);
            let cap = 4.0 * (-6.0f64).exp();
            assert!(f >= -1e-18 && f <= cap + 1e-18, "f = {f} at theta = {theta}");
        }
    }

    #[test]
    fn grid_values_real_axis_and_symmetry() {
        let solver = solver_b0();
        let mom = Momentum::new(0.08, 0.0);
        let grid = omega2_grid(&solver, &mom, (-3.0, 3.0), (-1.0, 1.0), 0.25).unwrap();
        // on the real axis Omega^2 >= eps_perp^2 = 1
        let iy0 = grid
            .im_axis
            .iter()
            .position(|&y| y.abs() < 1e-12)
            .expect("grid contains the real axis");
        for ix in 0..grid.re_axis.len() {
            assert!(grid.value(ix, iy0) >= 1.0 - 1e-12);
        }
        // conjugate symmetry about the real axis
        for (iy, &y) in grid.im_axis.iter().enumerate() {
            if y <= 0.0 {
                continue;
            }
            if let Some(iy_neg) = grid.im_axis.iter().position(|&z| (z + y).abs() < 1e-12) {
                for ix in 0..grid.re_axis.len() {
                    let up = grid.value(ix, iy);
                    let down = grid.value(ix, iy_neg);
                    assert!(
                        (up - down).abs() <= 1e-9 * up.max(down).max(1.0),
                        "asymmetry at re={}, im={y}",
                        grid.re_axis[ix]
                    );
                }
            }
        }
    }

    #[test]
    fn grid_minima_colocate_with_roots() {
        let solver = solver_b0();
        let mom = Momentum::new(0.08, 0.0);
        let boks = SearchBox::new(-14.0, 14.0, 3.5, 6.0).unwrap();
        let set = find_turning_points(&solver, &mom, &boks, 4).unwrap();
        assert!(set.points.len() >= 2);
        let res = 0.05;
        let grid = omega2_grid(&solver, &mom, (-14.0, 14.0), (3.5, 6.0), res).unwrap();
        let minima = grid.local_minima();
        for p in &set.points {
            let hit = minima.iter().any(|&(ix, iy)| {
                (grid.re_axis[ix] - p.t.re).abs() <= res && (grid.im_axis[iy] - p.t.im).abs() <= res
            });
            assert!(hit, "no grid minimum within one cell of {}", p.t);
        }
    }
}
