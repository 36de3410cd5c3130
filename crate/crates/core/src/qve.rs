//! Quantum Vlasov equation per momentum mode.
//!
//! The integro-differential equation for the one-particle occupation
//! `f(p, t)` is integrated in its equivalent local form through the two
//! auxiliary variables `u`, `v`:
//!
//! ```text
//! df/dt = W u / 2
//! du/dt = W (1 - 2 f) - 2 Omega v
//! dv/dt = 2 Omega u
//! ```
//!
//! with `W = E(t) eps_perp / Omega^2`, `Omega^2 = eps_perp^2 + (p_par - A)^2`
//! and `f = u = v = 0` long before the pulse. A slow direct discretization
//! of the original memory-integral form ([`oracle_direct`]) is kept as an
//! independent cross-check of the transformation and of the adaptive
//! integrator.

use crate::error::{Error, Result};
use crate::field::potential::PotentialCache;
use crate::field::FieldConfig;
use crate::ode::{integrate_dp45, OdeOptions};
use crate::real::Real;

/// Canonical momentum of a mode, split along/against the field direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum<T> {
    p_par: T,
    p_perp: T,
    eps_perp: T,
}

impl<T: Real> Momentum<T> {
    /// `p_par` along the field, `p_perp >= 0` the transverse magnitude.
    pub fn new(p_par: T, p_perp: T) -> Self {
        assert!(
            p_par.is_finite() && p_perp.is_finite() && p_perp >= T::zero(),
            "momentum components must be finite with p_perp >= 0"
        );
        Self {
            p_par,
            p_perp,
            eps_perp: (T::one() + p_perp * p_perp).sqrt(),
        }
    }

    pub fn p_par(&self) -> T {
        self.p_par
    }
    pub fn p_perp(&self) -> T {
        self.p_perp
    }
    /// Transverse energy `sqrt(1 + p_perp^2)` (mass units).
    pub fn eps_perp(&self) -> T {
        self.eps_perp
    }
}

/// The evolved triple plus time; what a trajectory dump row contains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticState<T> {
    pub t: T,
    pub f: T,
    pub u: T,
    pub v: T,
}

/// Relative/absolute tolerance pair for the mode integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub rel: T,
    pub abs: T,
}

impl<T: Real> Tolerances<T> {
    /// Bounds keep the controller in the regime the defaults were sized
    /// for: rel in [1e-12, 1e-6], abs in [1e-16, 1e-8].
    pub fn new(rel: T, abs: T) -> Result<Self> {
        if rel < T::of(1e-12) || rel > T::of(1e-6) {
            return Err(Error::InvalidConfig(format!(
                "relative tolerance {rel} outside [1e-12, 1e-6]"
            )));
        }
        if abs < T::of(1e-16) || abs > T::of(1e-8) {
            return Err(Error::InvalidConfig(format!(
                "absolute tolerance {abs} outside [1e-16, 1e-8]"
            )));
        }
        Ok(Self { rel, abs })
    }
}

impl<T: Real> Default for Tolerances<T> {
    /// Sized so occupations down to 1e-9 stay meaningful.
    fn default() -> Self {
        Self {
            rel: T::of(1e-10),
            abs: T::of(1e-14),
        }
    }
}

/// Result of one mode integration.
#[derive(Debug, Clone)]
pub struct ModeSolution<T> {
    /// Final occupation `f(p, +t_span)`.
    pub f: T,
    /// Smallest and largest `f` seen along the trajectory (Pauli check).
    pub f_min: T,
    pub f_max: T,
    /// Whether the trailing 10% of the window had relative f-variation
    /// below 1e-3. A false value usually means the window is too short.
    pub plateau_ok: bool,
    pub trajectory: Option<Vec<KineticState<T>>>,
}

/// Field configuration plus its immutable potential cache; everything a
/// mode integration needs. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct QveSolver<T> {
    cfg: FieldConfig<T>,
    potential: PotentialCache<T>,
}

impl<T: Real> QveSolver<T> {
    pub fn new(cfg: FieldConfig<T>) -> Result<Self> {
        Ok(Self {
            cfg,
            potential: PotentialCache::build(&cfg)?,
        })
    }

    /// Use a prebuilt cache (e.g. with a shifted anchor).
    pub fn with_potential(cfg: FieldConfig<T>, potential: PotentialCache<T>) -> Self {
        Self { cfg, potential }
    }

    pub fn config(&self) -> &FieldConfig<T> {
        &self.cfg
    }
    pub fn potential(&self) -> &PotentialCache<T> {
        &self.potential
    }

    /// Total energy `Omega(p, t)` on the real axis; never below eps_perp.
    #[inline]
    pub fn total_energy(&self, mom: &Momentum<T>, t: T) -> T {
        let k = mom.p_par - self.potential.eval(t);
        (mom.eps_perp * mom.eps_perp + k * k).sqrt()
    }

    /// Right-hand side of the kinetic system at a state.
    #[inline]
    pub fn rhs(&self, mom: &Momentum<T>, state: &KineticState<T>) -> (T, T, T) {
        let e = self.cfg.eval_real(state.t);
        let k = mom.p_par - self.potential.eval(state.t);
        let omega_sq = mom.eps_perp * mom.eps_perp + k * k;
        let omega = omega_sq.sqrt();
        let w = e * mom.eps_perp / omega_sq;
        (
            T::of(0.5) * w * state.u,
            w * (T::one() - T::of(2.0) * state.f) - T::of(2.0) * omega * state.v,
            T::of(2.0) * omega * state.u,
        )
    }

    /// Integrate one mode from vacuum through the pulse and return the
    /// asymptotic occupation.
    pub fn integrate_mode(
        &self,
        mom: &Momentum<T>,
        tol: &Tolerances<T>,
        store_trajectory: bool,
    ) -> Result<ModeSolution<T>> {
        let t_span = self.cfg.t_span();
        let t0 = -t_span;
        let t1 = t_span;

        // The system oscillates at 2*Omega; cap the step at a twentieth of
        // that period so the controller cannot skate over oscillations
        // while f is tiny.
        let reach = mom.p_par.abs() + self.potential.max_abs();
        let omega_max = (mom.eps_perp * mom.eps_perp + reach * reach).sqrt();
        let opts = OdeOptions {
            rtol: tol.rel,
            atol: tol.abs,
            max_step: T::PI() / (T::of(20.0) * omega_max),
        };

        let cfg = self.cfg;
        let potential = &self.potential;
        let eps = mom.eps_perp;
        let eps_sq = eps * eps;
        let p = mom.p_par;
        let half = T::of(0.5);
        let one = T::one();
        let two = T::of(2.0);

        let mut trajectory = store_trajectory.then(|| {
            let mut v = Vec::with_capacity(4096);
            v.push(KineticState {
                t: t0,
                f: T::zero(),
                u: T::zero(),
                v: T::zero(),
            });
            v
        });

        let plateau_start = t1 - (t1 - t0) * T::of(0.1);
        let mut f_min = T::zero();
        let mut f_max = T::zero();
        let mut plateau_lo = T::infinity();
        let mut plateau_hi = T::neg_infinity();

        let y = integrate_dp45(
            |t, y: &[T; 3]| {
                let e = cfg.eval_real(t);
                let k = p - potential.eval(t);
                let omega_sq = eps_sq + k * k;
                let omega = omega_sq.sqrt();
                let w = e * eps / omega_sq;
                [
                    half * w * y[1],
                    w * (one - two * y[0]) - two * omega * y[2],
                    two * omega * y[1],
                ]
            },
            t0,
            t1,
            [T::zero(); 3],
            &opts,
            |t, y| {
                let f = y[0];
                if f < f_min {
                    f_min = f;
                }
                if f > f_max {
                    f_max = f;
                }
                if t >= plateau_start {
                    plateau_lo = plateau_lo.min(f);
                    plateau_hi = plateau_hi.max(f);
                }
                if let Some(tr) = trajectory.as_mut() {
                    tr.push(KineticState {
                        t,
                        f,
                        u: y[1],
                        v: y[2],
                    });
                }
            },
        )?;

        let f = y[0];
        let scale = f.abs().max(T::of(1e-300));
        let plateau_ok = if plateau_hi >= plateau_lo {
            (plateau_hi - plateau_lo) / scale < T::of(1e-3)
        } else {
            true
        };

        Ok(ModeSolution {
            f,
            f_min,
            f_max,
            plateau_ok,
            trajectory,
        })
    }
}

/// Direct discretization of the memory-integral form of the kinetic
/// equation: outer time loop, trapezoid rule over the history, phase from a
/// precomputed cumulative integral of `Omega`. Quadratic cost in `n_steps`;
/// intended for short pulses as an independent oracle for
/// [`QveSolver::integrate_mode`].
pub fn oracle_direct<T: Real>(cfg: &FieldConfig<T>, mom: &Momentum<T>, n_steps: usize) -> T {
    assert!(n_steps >= 16, "oracle needs a sensible grid");
    let t_span = cfg.t_span();
    let n = n_steps;
    let dt = T::of(2.0) * t_span / T::of(n as f64);

    // Refined subgrid for the cumulative integrals of E and Omega; keeps
    // the phase second-order accurate with a much smaller constant.
    const SUB: usize = 8;
    let m = n * SUB;
    let dtf = dt / T::of(SUB as f64);
    let eps_sq = mom.eps_perp * mom.eps_perp;

    let mut a_fine = Vec::with_capacity(m + 1);
    let mut phi_fine = Vec::with_capacity(m + 1);
    let mut e_prev = cfg.eval_real(-t_span);
    let mut a = T::zero();
    let mut k = mom.p_par - a;
    let mut om_prev = (eps_sq + k * k).sqrt();
    let mut phi = T::zero();
    a_fine.push(a);
    phi_fine.push(phi);
    let half = T::of(0.5);
    for j in 1..=m {
        let t = -t_span + dtf * T::of(j as f64);
        let e = cfg.eval_real(t);
        a = a - half * dtf * (e_prev + e);
        e_prev = e;
        k = mom.p_par - a;
        let om = (eps_sq + k * k).sqrt();
        phi = phi + half * dtf * (om_prev + om);
        om_prev = om;
        a_fine.push(a);
        phi_fine.push(phi);
    }

    // Coarse-node quantities for the memory loop.
    let mut w = Vec::with_capacity(n + 1);
    let mut cos2 = Vec::with_capacity(n + 1);
    let mut sin2 = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = -t_span + dt * T::of(i as f64);
        let e = cfg.eval_real(t);
        let k = mom.p_par - a_fine[i * SUB];
        let om_sq = eps_sq + k * k;
        w.push(e * mom.eps_perp / om_sq);
        let two_phi = T::of(2.0) * phi_fine[i * SUB];
        cos2.push(two_phi.cos());
        sin2.push(two_phi.sin());
    }

    // df/dt at node i given the occupation history: the memory integral is
    // a trapezoid over t' with cos(2 Theta) expanded through the cumulative
    // phase, cos(2(Phi_i - Phi_j)) = c_i c_j + s_i s_j.
    let rate = |i: usize, f: &[T]| -> T {
        if i == 0 {
            return T::zero();
        }
        let mut acc_c = half * w[0] * cos2[0]; // f[0] = 0
        let mut acc_s = half * w[0] * sin2[0];
        for j in 1..i {
            let gj = w[j] * (T::one() - T::of(2.0) * f[j]);
            acc_c += gj * cos2[j];
            acc_s += gj * sin2[j];
        }
        let gi = w[i] * (T::one() - T::of(2.0) * f[i]);
        acc_c += half * gi * cos2[i];
        acc_s += half * gi * sin2[i];
        half * w[i] * dt * (cos2[i] * acc_c + sin2[i] * acc_s)
    };

    let mut f = vec![T::zero(); n + 1];
    for i in 0..n {
        let k1 = rate(i, &f);
        f[i + 1] = f[i] + dt * k1; // predictor
        let k2 = rate(i + 1, &f);
        f[i + 1] = f[i] + half * dt * (k1 + k2);
    }
    f[n]
}
