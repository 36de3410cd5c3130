//! TOML run configuration: flat key/value sections mirroring the library
//! modules. Unknown keys are rejected so typos cannot silently change a
//! run. All physical values are in natural units (m = 1, E_cr = 1).

use serde::{Deserialize, Serialize};

use fmpair::{FieldConfig, GridSpec, Tolerances};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldSection,
    #[serde(default)]
    pub qve: QveSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub semiclassical: SemiclassicalSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub density_scan: DensityScanSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub e0: f64,
    pub omega: f64,
    pub tau: f64,
    #[serde(default)]
    pub omega_m: f64,
    #[serde(default)]
    pub b: f64,
    /// Half-width of the integration window; defaults to 8 tau.
    pub t_span: Option<f64>,
    #[serde(default)]
    pub allow_fast_modulation: bool,
    /// Frequency resolution of the pulse spectrum; defaults to omega_m/20
    /// (or 1/(4 tau) unmodulated).
    pub spectrum_resolution: Option<f64>,
    /// Peak floor of the pulse spectrum, fraction of the maximum.
    #[serde(default = "default_peak_floor")]
    pub spectrum_floor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QveSection {
    pub tol_rel: f64,
    pub tol_abs: f64,
    /// Transverse momentum of every scan.
    pub p_perp: f64,
    /// Parallel momentum for the single-mode subcommand.
    pub p_par: f64,
}

impl Default for QveSection {
    fn default() -> Self {
        Self {
            tol_rel: 1e-10,
            tol_abs: 1e-14,
            p_perp: 0.0,
            p_par: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub p_min: f64,
    pub p_max: f64,
    pub p_step: f64,
    /// Momentum-peak floor, fraction of the spectrum maximum.
    pub peak_floor: f64,
    /// Photon-count window of the assignment search.
    pub assign_n_min: u32,
    pub assign_n_max: u32,
    /// Relative energy-conservation tolerance of assignments.
    pub assign_tol: f64,
    /// Cap on |p_par| for the density auto-extension.
    pub p_limit: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            p_min: -0.2,
            p_max: 1.0,
            p_step: 2e-3,
            peak_floor: 1e-3,
            assign_n_min: 3,
            assign_n_max: 6,
            assign_tol: 0.02,
            p_limit: 6.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemiclassicalSection {
    /// Search box; Re defaults to +-3 tau and Im to the first-root height
    /// when left unset.
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub im_min: Option<f64>,
    pub im_max: Option<f64>,
    pub seeds_per_period: usize,
    /// Resolution of the |Omega^2| contour grid.
    pub grid_resolution: f64,
}

impl Default for SemiclassicalSection {
    fn default() -> Self {
        Self {
            re_min: None,
            re_max: None,
            im_min: None,
            im_max: None,
            seeds_per_period: 4,
            grid_resolution: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub omega_m_min: f64,
    pub omega_m_max: f64,
    pub omega_m_count: usize,
    pub b_min: f64,
    pub b_max: f64,
    pub b_count: usize,
    pub alpha_levels: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            omega_m_min: 0.0,
            omega_m_max: 0.1,
            omega_m_count: 20,
            b_min: 0.0,
            b_max: 10.0,
            b_count: 20,
            alpha_levels: vec![0.1, 0.32, 1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityScanSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
}

impl Default for DensityScanSection {
    fn default() -> Self {
        Self {
            omega_min: 0.5,
            omega_max: 0.7,
            omega_step: 0.004,
        }
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Io(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        // surface library-level validation early
        self.field_config()?;
        self.tolerances()?;
        self.grid_spec()?;
        Ok(())
    }

    pub fn field_config(&self) -> CliResult<FieldConfig<f64>> {
        let f = &self.field;
        let t_span = f.t_span.unwrap_or(8.0 * f.tau);
        FieldConfig::with_t_span(
            f.e0,
            f.omega,
            f.tau,
            f.omega_m,
            f.b,
            t_span,
            f.allow_fast_modulation,
        )
        .map_err(CliError::from)
    }

    pub fn tolerances(&self) -> CliResult<Tolerances<f64>> {
        Tolerances::new(self.qve.tol_rel, self.qve.tol_abs).map_err(CliError::from)
    }

    pub fn grid_spec(&self) -> CliResult<GridSpec<f64>> {
        GridSpec::new(
            self.spectrum.p_min,
            self.spectrum.p_max,
            self.spectrum.p_step,
        )
        .map_err(CliError::from)
    }

    pub fn spectrum_resolution(&self) -> f64 {
        self.field.spectrum_resolution.unwrap_or(if self.field.omega_m > 0.0 {
            self.field.omega_m / 20.0
        } else {
            0.25 / self.field.tau
        })
    }
}

fn default_peak_floor() -> f64 {
    1e-3
}
