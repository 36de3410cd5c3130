//! Scans of the modulation plane `(omega_m, b)` for the pair number
//! density, with constraint-band bookkeeping and regional extrema.
//!
//! Cells are independent; any scheduling order is allowed because the
//! assembly indexes results by grid position. Per-cell failures are
//! recorded as missing values with a diagnostic instead of aborting a long
//! sweep.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::qve::{QveSolver, Tolerances};
use crate::real::Real;
use crate::spectrum::{density_with_extension, GridSpec};

/// Base field parameters for every cell plus the momentum-domain cap used
/// by the density auto-extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTemplate<T> {
    pub e0: T,
    pub omega: T,
    pub tau: T,
    pub p_limit: T,
}

/// Uniform axes of the sweep (inclusive endpoints).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxesSpec<T> {
    pub omega_m: (T, T, usize),
    pub b: (T, T, usize),
}

impl<T: Real> AxesSpec<T> {
    pub fn new(omega_m: (T, T, usize), b: (T, T, usize)) -> Result<Self> {
        for (name, (lo, hi, count)) in [("omega_m", &omega_m), ("b", &b)] {
            if !(*count >= 2) || !(hi > lo) || !(*lo >= T::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} axis needs lo < hi, lo >= 0 and at least 2 samples"
                )));
            }
        }
        Ok(Self { omega_m, b })
    }

    fn expand(axis: (T, T, usize)) -> Vec<T> {
        let (lo, hi, count) = axis;
        let step = (hi - lo) / T::of((count - 1) as f64);
        (0..count).map(|i| lo + step * T::of(i as f64)).collect()
    }
}

/// Density matrix over the modulation plane. Missing cells hold `None`.
#[derive(Debug, Clone)]
pub struct SweepGrid<T> {
    pub omega_m_axis: Vec<T>,
    pub b_axis: Vec<T>,
    /// Row-major: `density[i_omega_m * b_axis.len() + i_b]`.
    pub density: Vec<Option<T>>,
    /// Carrier frequency of the sweep; the constraint levels are fractions
    /// of it.
    pub omega: T,
    /// Constraint levels used to partition the plane.
    pub alpha_levels: Vec<T>,
    /// `(i_omega_m, i_b, message)` for every failed cell.
    pub diagnostics: Vec<(usize, usize, String)>,
}

impl<T: Real> SweepGrid<T> {
    pub fn cell(&self, i_omega_m: usize, i_b: usize) -> Option<T> {
        self.density[i_omega_m * self.b_axis.len() + i_b]
    }
}

/// Which constraint band a point falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionClass {
    /// `k` such that `alpha_k omega < b omega_m <= alpha_{k+1} omega`
    /// (with `alpha_0 = 0`).
    Band(usize),
    /// Beyond the largest level: the effective frequency would exceed the
    /// carrier's physical range.
    Unphysical,
}

/// Classify a modulation point against strictly increasing alpha levels.
pub fn classify_region<T: Real>(
    point: (T, T),
    omega: T,
    alpha_levels: &[T],
) -> Result<RegionClass> {
    if alpha_levels.is_empty() || alpha_levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "alpha levels must be non-empty and strictly increasing".into(),
        ));
    }
    if alpha_levels[0] <= T::zero() {
        return Err(Error::InvalidConfig(
            "alpha levels must be positive (band 0 starts at zero implicitly)".into(),
        ));
    }
    let (omega_m, b) = point;
    let product = b * omega_m;
    for (k, &alpha) in alpha_levels.iter().enumerate() {
        if product <= alpha * omega {
            return Ok(RegionClass::Band(k));
        }
    }
    Ok(RegionClass::Unphysical)
}

/// Extrema of one constraint band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionExtrema<T> {
    pub region: usize,
    /// `(omega_m, b, density)` of the smallest cell in the band.
    pub min_point: (T, T, T),
    /// `(omega_m, b, density)` of the largest cell in the band.
    pub max_point: (T, T, T),
}

/// Run the sweep. `existing` supplies already-computed cells (resume);
/// `on_cell` observes each freshly computed cell (checkpointing). The
/// returned matrix is independent of worker count and completion order.
pub fn run_sweep<T: Real>(
    template: &SweepTemplate<T>,
    axes: &AxesSpec<T>,
    grid: &GridSpec<T>,
    tol: &Tolerances<T>,
    alpha_levels: &[T],
    existing: impl Fn(usize, usize) -> Option<T> + Sync,
    on_cell: impl Fn(usize, usize, T) + Sync,
) -> SweepGrid<T> {
    let omega_m_axis = AxesSpec::expand(axes.omega_m);
    let b_axis = AxesSpec::expand(axes.b);
    let nb = b_axis.len();

    let cells: Vec<(usize, usize)> = (0..omega_m_axis.len())
        .flat_map(|i| (0..nb).map(move |j| (i, j)))
        .collect();

    let results: Vec<std::result::Result<T, String>> = cells
        .par_iter()
        .map(|&(i, j)| {
            if let Some(n) = existing(i, j) {
                return Ok(n);
            }
            let run = || -> Result<T> {
                let cfg = FieldConfig::new(
                    template.e0,
                    template.omega,
                    template.tau,
                    omega_m_axis[i],
                    b_axis[j],
                )?;
                let solver = QveSolver::new(cfg)?;
                let (_, n) =
                    density_with_extension(&solver, grid, T::zero(), tol, template.p_limit)?;
                Ok(n)
            };
            match run() {
                Ok(n) => {
                    on_cell(i, j, n);
                    Ok(n)
                }
                Err(e) => Err(e.to_string()),
            }
        })
        .collect();

    let mut density = vec![None; cells.len()];
    let mut diagnostics = Vec::new();
    for (&(i, j), result) in cells.iter().zip(results.into_iter()) {
        match result {
            Ok(n) => density[i * nb + j] = Some(n),
            Err(msg) => diagnostics.push((i, j, msg)),
        }
    }

    SweepGrid {
        omega_m_axis,
        b_axis,
        density,
        omega: template.omega,
        alpha_levels: alpha_levels.to_vec(),
        diagnostics,
    }
}

/// Arg-min and arg-max over the valid cells of one constraint band.
pub fn find_extrema<T: Real>(grid: &SweepGrid<T>, region: usize) -> Result<RegionExtrema<T>> {
    let mut min_point: Option<(T, T, T)> = None;
    let mut max_point: Option<(T, T, T)> = None;
    for (i, &omega_m) in grid.omega_m_axis.iter().enumerate() {
        for (j, &b) in grid.b_axis.iter().enumerate() {
            let Some(n) = grid.cell(i, j) else { continue };
            let class = classify_region((omega_m, b), grid.omega, &grid.alpha_levels);
            let Ok(RegionClass::Band(k)) = class else {
                continue;
            };
            if k != region {
                continue;
            }
            if min_point.map(|(_, _, m)| n < m).unwrap_or(true) {
                min_point = Some((omega_m, b, n));
            }
            if max_point.map(|(_, _, m)| n > m).unwrap_or(true) {
                max_point = Some((omega_m, b, n));
            }
        }
    }
    match (min_point, max_point) {
        (Some(min_point), Some(max_point)) => Ok(RegionExtrema {
            region,
            min_point,
            max_point,
        }),
        _ => Err(Error::EmptyRegion(region)),
    }
}
