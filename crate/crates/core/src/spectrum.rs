//! Momentum spectra, number densities, peak finding, and multiphoton
//! assignment.
//!
//! A spectrum is `f(p_par, infinity)` scanned over a parallel-momentum grid
//! at fixed `p_perp`. The pair number density per `d^2 p_perp / (2 pi)^2`
//! follows by a Simpson integral over the grid with a spin-degeneracy
//! factor of 2. Each spectrum peak gets a total pair energy from the
//! effective-mass relation and, where possible, a decomposition into
//! photons drawn from the measured frequency comb of the pulse.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::spectrum::detect_peaks;
use crate::field::{FieldConfig, FieldSpectrum};
use crate::qve::{Momentum, QveSolver, Tolerances};
use crate::real::Real;

/// Edge criterion for density integrals: f at both grid ends must be below
/// this fraction of the spectrum maximum.
pub const DENSITY_EDGE_FRACTION: f64 = 1e-4;

/// Uniform parallel-momentum grid specification (inclusive at both ends).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub p_min: T,
    pub p_max: T,
    pub step: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(p_min: T, p_max: T, step: T) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if !(p_max > p_min) || !p_min.is_finite() || !p_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid range [{p_min}, {p_max}] is empty or infinite"
            )));
        }
        Ok(Self { p_min, p_max, step })
    }

    /// Default scan range: covers the published peak tables for the
    /// parameter region of interest.
    pub fn default_scan() -> Self {
        Self {
            p_min: T::of(-0.2),
            p_max: T::of(1.0),
            step: T::of(2e-3),
        }
    }

    pub fn points(&self) -> Vec<T> {
        let n = ((self.p_max - self.p_min) / self.step + T::of(0.5))
            .floor()
            .to_f64_lossy() as usize;
        (0..=n)
            .map(|i| self.p_min + self.step * T::of(i as f64))
            .collect()
    }
}

/// One detected momentum peak. Positions come from a three-point parabolic
/// refinement; energy and photon decomposition are filled in by
/// [`annotate_peaks`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeakInfo<T> {
    pub p_peak: T,
    pub f_peak: T,
    /// Total pair energy `2 sqrt(m*^2 + p^2)`; set by annotation.
    pub energy: Option<T>,
    pub assignment: PhotonAssignment<T>,
}

impl<T: Real> PeakInfo<T> {
    /// Relative energy-conservation residual of the assignment, if any.
    pub fn assignment_residual(&self) -> Option<T> {
        match &self.assignment {
            PhotonAssignment::Assigned { residual, .. } => Some(*residual),
            PhotonAssignment::Unassigned => None,
        }
    }
}

/// Multiphoton decomposition of a peak energy over measured field-spectrum
/// frequencies.
#[derive(Debug, Clone, PartialEq)]
pub enum PhotonAssignment<T> {
    Assigned {
        /// `(frequency, count)` pairs, sorted by descending frequency.
        parts: Vec<(T, u32)>,
        /// `|E - sum| / E`.
        residual: T,
        /// Equally good decompositions within the tie window, for
        /// diagnostics.
        ties: Vec<Vec<(T, u32)>>,
    },
    Unassigned,
}

impl<T: Real> PhotonAssignment<T> {
    pub fn total_photons(&self) -> Option<u32> {
        match self {
            PhotonAssignment::Assigned { parts, .. } => {
                Some(parts.iter().map(|&(_, n)| n).sum())
            }
            PhotonAssignment::Unassigned => None,
        }
    }
}

/// Scanned spectrum over a momentum grid at fixed transverse momentum.
#[derive(Debug, Clone)]
pub struct MomentumSpectrum<T> {
    pub grid: Vec<T>,
    pub f_values: Vec<T>,
    pub p_perp: T,
    pub peaks: Vec<PeakInfo<T>>,
    /// True when every mode stayed inside the Pauli bound (tolerance 1e-9
    /// for transient overshoot).
    pub pauli_ok: bool,
    /// Modes whose trailing-window plateau check failed.
    pub plateau_warnings: usize,
}

impl<T: Real> MomentumSpectrum<T> {
    pub fn max_f(&self) -> T {
        self.f_values.iter().copied().fold(T::zero(), T::max)
    }
}

/// Integrate every grid mode; deterministic ordering regardless of the
/// worker count.
pub fn scan_spectrum<T: Real>(
    solver: &QveSolver<T>,
    grid: &GridSpec<T>,
    p_perp: T,
    tol: &Tolerances<T>,
) -> Result<MomentumSpectrum<T>> {
    let points = grid.points();
    let f_values = scan_modes(solver, &points, p_perp, tol)?;
    Ok(assemble_spectrum(points, f_values, p_perp))
}

fn scan_modes<T: Real>(
    solver: &QveSolver<T>,
    points: &[T],
    p_perp: T,
    tol: &Tolerances<T>,
) -> Result<Vec<(T, T, T, bool)>> {
    points
        .par_iter()
        .map(|&p| {
            let mom = Momentum::new(p, p_perp);
            solver
                .integrate_mode(&mom, tol, false)
                .map(|s| (s.f, s.f_min, s.f_max, s.plateau_ok))
                .map_err(|e| Error::at_momentum(p.to_f64_lossy(), e))
        })
        .collect()
}

fn assemble_spectrum<T: Real>(
    grid: Vec<T>,
    raw: Vec<(T, T, T, bool)>,
    p_perp: T,
) -> MomentumSpectrum<T> {
    let pauli_tol = T::of(1e-9);
    let pauli_ok = raw
        .iter()
        .all(|&(_, lo, hi, _)| lo >= -pauli_tol && hi <= T::one() + pauli_tol);
    let plateau_warnings = raw.iter().filter(|&&(_, _, _, ok)| !ok).count();
    let f_values = raw.into_iter().map(|(f, _, _, _)| f).collect();
    MomentumSpectrum {
        grid,
        f_values,
        p_perp,
        peaks: Vec::new(),
        pauli_ok,
        plateau_warnings,
    }
}

/// Local maxima of the spectrum above `floor * max(f)`, positions refined
/// parabolically. Returns bare peaks; annotation is separate.
pub fn find_peaks<T: Real>(spec: &MomentumSpectrum<T>, floor: T) -> Result<Vec<PeakInfo<T>>> {
    if !(floor > T::zero() && floor < T::one()) {
        return Err(Error::InvalidConfig(format!(
            "peak floor must lie in (0, 1), got {floor}"
        )));
    }
    Ok(detect_peaks(&spec.grid, &spec.f_values, floor)
        .into_iter()
        .map(|p| PeakInfo {
            p_peak: p.freq,
            f_peak: p.amp,
            energy: None,
            assignment: PhotonAssignment::Unassigned,
        })
        .collect())
}

/// Total pair energy `E(p) = 2 sqrt(m*^2 + p^2)` with the field-dressed
/// effective mass `m* = sqrt(1 + E0^2 / (2 omega^2))`. The carrier
/// frequency is used even under modulation.
pub fn pair_energy<T: Real>(cfg: &FieldConfig<T>, p: T) -> T {
    let e0 = cfg.e0();
    let omega = cfg.omega();
    let m_star_sq = T::one() + e0 * e0 / (T::of(2.0) * omega * omega);
    T::of(2.0) * (m_star_sq + p * p).sqrt()
}

/// Decompose a pair energy into `n_range` photons drawn (with repetition)
/// from the dominant spectral component and its upper sidebands.
///
/// Below-dominant components are excluded: they make the bookkeeping
/// degenerate (`omega_0 ~ omega_{-k} + omega_k` rewritings) and the
/// published peak analysis is carried out over the dominant-and-above
/// comb. Among candidates whose residuals are closer than half a
/// resolution step (indistinguishable given the peak measurement error),
/// the preference is: more photons at the dominant component, then fewer
/// distinct components. Surviving equals are reported as ties.
pub fn assign_photons<T: Real>(
    energy: T,
    field_spec: &FieldSpectrum<T>,
    n_range: (u32, u32),
    tol: T,
) -> PhotonAssignment<T> {
    let (n_min, n_max) = n_range;
    if field_spec.peaks.is_empty() || n_min == 0 || n_max < n_min {
        return PhotonAssignment::Unassigned;
    }
    // strongest first so counts[0] is the dominant-component multiplicity
    let mut freqs: Vec<(T, T)> = field_spec.peaks.iter().map(|p| (p.freq, p.amp)).collect();
    freqs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let dominant = freqs[0].0;
    freqs.retain(|&(f, _)| f >= dominant - field_spec.resolution);
    let freqs: Vec<T> = freqs.into_iter().take(32).map(|(f, _)| f).collect();

    struct Candidate<T> {
        residual_abs: T,
        distinct: usize,
        counts: Vec<u32>,
    }

    // Residuals within half a resolution step are indistinguishable given
    // the peak-position measurement error; keep every such candidate and
    // settle the order structurally afterwards.
    let tie_window = field_spec.resolution * T::of(0.5);
    let mut pool: Vec<Candidate<T>> = Vec::new();
    let mut pool_min = T::infinity();

    // depth-first enumeration of multisets over the frequency list
    fn recurse<T: Real>(
        freqs: &[T],
        counts: &mut Vec<u32>,
        idx: usize,
        used: u32,
        sum: T,
        energy: T,
        n_min: u32,
        n_max: u32,
        tie_window: T,
        pool: &mut Vec<Candidate<T>>,
        pool_min: &mut T,
    ) {
        if used >= n_min {
            let residual_abs = (energy - sum).abs();
            if residual_abs <= *pool_min + tie_window {
                if residual_abs < *pool_min {
                    *pool_min = residual_abs;
                    pool.retain(|c| c.residual_abs <= *pool_min + tie_window);
                }
                pool.push(Candidate {
                    residual_abs,
                    distinct: counts.iter().filter(|&&c| c > 0).count(),
                    counts: counts.clone(),
                });
            }
        }
        if used == n_max || idx == freqs.len() {
            return;
        }
        // skip this frequency entirely
        recurse(
            freqs, counts, idx + 1, used, sum, energy, n_min, n_max, tie_window, pool, pool_min,
        );
        // or take one more of it and stay
        counts[idx] += 1;
        recurse(
            freqs,
            counts,
            idx,
            used + 1,
            sum + freqs[idx],
            energy,
            n_min,
            n_max,
            tie_window,
            pool,
            pool_min,
        );
        counts[idx] -= 1;
    }
    let mut counts = vec![0u32; freqs.len()];
    recurse(
        &freqs,
        &mut counts,
        0,
        0,
        T::zero(),
        energy,
        n_min,
        n_max,
        tie_window,
        &mut pool,
        &mut pool_min,
    );

    // preference order among the tied pool: more photons at the dominant
    // component, then fewer distinct components, then deterministic
    // ordering on the full counts and the raw residual
    pool.sort_by(|a, b| {
        b.counts[0]
            .cmp(&a.counts[0])
            .then_with(|| a.distinct.cmp(&b.distinct))
            .then_with(|| b.counts.cmp(&a.counts))
            .then_with(|| a.residual_abs.partial_cmp(&b.residual_abs).unwrap())
    });
    let winner = match pool.first() {
        Some(c) => c,
        None => return PhotonAssignment::Unassigned,
    };
    let residual = winner.residual_abs / energy;
    if residual > tol {
        return PhotonAssignment::Unassigned;
    }
    let to_parts = |counts: &[u32]| {
        let mut parts: Vec<(T, u32)> = counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(i, &c)| (freqs[i], c))
            .collect();
        parts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        parts
    };
    let parts = to_parts(&winner.counts);
    let ties = pool[1..]
        .iter()
        .filter(|c| c.counts[0] == winner.counts[0] && c.distinct == winner.distinct)
        .map(|c| to_parts(&c.counts))
        .collect();
    PhotonAssignment::Assigned {
        parts,
        residual,
        ties,
    }
}

/// Fill energies and photon assignments into a peak list.
pub fn annotate_peaks<T: Real>(
    cfg: &FieldConfig<T>,
    peaks: &mut [PeakInfo<T>],
    field_spec: &FieldSpectrum<T>,
    n_range: (u32, u32),
    tol: T,
) {
    for peak in peaks.iter_mut() {
        let energy = pair_energy(cfg, peak.p_peak);
        peak.energy = Some(energy);
        peak.assignment = assign_photons(energy, field_spec, n_range, tol);
    }
}

/// Pair number density per `d^2 p_perp / (2 pi)^2`:
/// `n = 2 * (1/2pi) ∫ f dp_par` by composite Simpson on the grid.
///
/// Fails if the grid does not capture the spectrum (edge values above
/// [`DENSITY_EDGE_FRACTION`] of the maximum).
pub fn number_density<T: Real>(spec: &MomentumSpectrum<T>) -> Result<T> {
    let n = spec.f_values.len();
    if n < 3 {
        return Err(Error::InvalidConfig(
            "density needs at least 3 grid points".into(),
        ));
    }
    let max = spec.max_f();
    let limit = T::of(DENSITY_EDGE_FRACTION) * max;
    let left = spec.f_values[0];
    let right = spec.f_values[n - 1];
    if left > limit || right > limit {
        return Err(Error::DomainTooNarrow {
            left: left.to_f64_lossy(),
            right: right.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    let h = spec.grid[1] - spec.grid[0];
    Ok(simpson(&spec.f_values, h) / T::PI())
}

/// Composite Simpson; falls back to a trapezoid correction on the last
/// interval when the count is even.
fn simpson<T: Real>(values: &[T], h: T) -> T {
    let n = values.len();
    let intervals = n - 1;
    let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 2 };
    let mut sum = T::zero();
    let mut i = 0;
    while i + 2 <= simpson_end {
        sum += values[i] + T::of(4.0) * values[i + 1] + values[i + 2];
        i += 2;
    }
    let mut total = sum * h / T::of(3.0);
    if intervals % 2 != 0 {
        total += (values[n - 2] + values[n - 1]) * h * T::of(0.5);
    }
    total
}

/// A density computation that widens the grid until the edge criterion
/// holds, reusing already-integrated modes. Returns the final spectrum and
/// the density.
pub fn density_with_extension<T: Real>(
    solver: &QveSolver<T>,
    base: &GridSpec<T>,
    p_perp: T,
    tol: &Tolerances<T>,
    p_limit: T,
) -> Result<(MomentumSpectrum<T>, T)> {
    let step = base.step;
    let chunk = 100usize;
    let mut points = base.points();
    let mut raw = scan_modes(solver, &points, p_perp, tol)?;

    loop {
        let max = raw
            .iter()
            .map(|&(f, _, _, _)| f)
            .fold(T::zero(), T::max);
        let limit = T::of(DENSITY_EDGE_FRACTION) * max;
        let left_bad = raw.first().map(|&(f, _, _, _)| f > limit).unwrap_or(false);
        let right_bad = raw.last().map(|&(f, _, _, _)| f > limit).unwrap_or(false);
        if !left_bad && !right_bad {
            break;
        }
        let lo = points[0];
        let hi = *points.last().unwrap();
        if (left_bad && lo <= -p_limit) || (right_bad && hi >= p_limit) {
            return Err(Error::DomainTooNarrow {
                left: raw.first().unwrap().0.to_f64_lossy(),
                right: raw.last().unwrap().0.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
            });
        }
        if left_bad {
            let ext: Vec<T> = (1..=chunk)
                .rev()
                .map(|i| lo - step * T::of(i as f64))
                .collect();
            let mut ext_raw = scan_modes(solver, &ext, p_perp, tol)?;
            ext_raw.extend(raw);
            raw = ext_raw;
            let mut ext_points = ext;
            ext_points.extend(points);
            points = ext_points;
        }
        if right_bad {
            let ext: Vec<T> = (1..=chunk)
                .map(|i| hi + step * T::of(i as f64))
                .collect();
            raw.extend(scan_modes(solver, &ext, p_perp, tol)?);
            points.extend(ext);
        }
    }

    let spec = assemble_spectrum(points, raw, p_perp);
    let n = number_density(&spec)?;
    Ok((spec, n))
}

/// Unmodulated number density as a function of the carrier frequency; the
/// oscillatory structure marks the n-photon thresholds.
pub fn density_vs_frequency<T: Real>(
    e0: T,
    tau: T,
    omega_values: &[T],
    grid: &GridSpec<T>,
    tol: &Tolerances<T>,
    p_limit: T,
) -> Result<Vec<(T, T)>> {
    let mut out = Vec::with_capacity(omega_values.len());
    for &omega in omega_values {
        let cfg = FieldConfig::new(e0, omega, tau, T::zero(), T::zero())?;
        let solver = QveSolver::new(cfg)?;
        let (_, n) = density_with_extension(&solver, grid, T::zero(), tol, p_limit)?;
        out.push((omega, n));
    }
    Ok(out)
}
