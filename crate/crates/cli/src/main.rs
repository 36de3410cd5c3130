//! Single executable exposing the pair-production pipelines as
//! subcommands. Every run reads one TOML config, writes machine-readable
//! CSV/JSON plus a manifest into the output directory, and exits 0 on
//! success (2: config, 3: numerical, 4: I/O).

mod config;
mod error;
mod manifest;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use serde_json::json;

use fmpair::semiclassical::{self, SearchBox};
use fmpair::spectrum as spec_ops;
use fmpair::sweep as sweep_ops;
use fmpair::{FieldConfig, Momentum, PhotonAssignment, QveSolver};

use config::RunConfig;
use error::{CliError, CliResult};
use manifest::RunManifest;
use output::{fmt_float, read_checkpoint, write_json, CsvWriter};

#[derive(Parser)]
#[command(
    name = "fmpair",
    version,
    about = "Electron-positron pair production in frequency-modulated fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON results and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override [qve] tol_rel.
    #[arg(long, global = true)]
    tol_rel: Option<f64>,
    /// Override [qve] tol_abs.
    #[arg(long, global = true)]
    tol_abs: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample E(t) and emit the pulse frequency spectrum with peaks.
    Field,
    /// Integrate a single momentum mode and dump its trajectory.
    Mode,
    /// Scan f(p_par) over the momentum grid; detect and assign peaks.
    Spectrum,
    /// Pair number density for the configured field.
    Density,
    /// Density as a function of carrier frequency (unmodulated).
    DensityScan,
    /// Turning points, actions, and the |Omega^2| contour grid.
    Turning,
    /// Density over the (omega_m, b) modulation plane with extrema.
    Sweep {
        /// Reuse cells from an existing checkpoint file.
        #[arg(long)]
        resume: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fmpair: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let workers = cli.workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;

    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("missing required --config <path>".into()))?;
    let mut run_config = RunConfig::load(config_path)?;
    if let Some(rel) = cli.tol_rel {
        run_config.qve.tol_rel = rel;
    }
    if let Some(abs) = cli.tol_abs {
        run_config.qve.tol_abs = abs;
    }
    run_config.tolerances()?; // re-validate after overrides

    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("create {}: {e}", cli.out.display())))?;

    let name = match &cli.command {
        Command::Field => "field",
        Command::Mode => "mode",
        Command::Spectrum => "spectrum",
        Command::Density => "density",
        Command::DensityScan => "density-scan",
        Command::Turning => "turning",
        Command::Sweep { .. } => "sweep",
    };
    let mut manifest = RunManifest::new(name, &run_config, workers);

    match &cli.command {
        Command::Field => cmd_field(&run_config, &cli.out, &mut manifest)?,
        Command::Mode => cmd_mode(&run_config, &cli.out, &mut manifest)?,
        Command::Spectrum => cmd_spectrum(&run_config, &cli.out, &mut manifest)?,
        Command::Density => cmd_density(&run_config, &cli.out, &mut manifest)?,
        Command::DensityScan => cmd_density_scan(&run_config, &cli.out, &mut manifest)?,
        Command::Turning => cmd_turning(&run_config, &cli.out, &mut manifest)?,
        Command::Sweep { resume } => cmd_sweep(&run_config, &cli.out, *resume, &mut manifest)?,
    }

    manifest.finish_and_write(&cli.out)
}

fn pulse_spectrum(rc: &RunConfig, cfg: &FieldConfig<f64>) -> CliResult<fmpair::FieldSpectrum<f64>> {
    fmpair::field::field_spectrum_with_floor(
        cfg,
        rc.spectrum_resolution(),
        rc.field.spectrum_floor,
    )
    .map_err(CliError::from)
}

fn cmd_field(rc: &RunConfig, out: &Path, manifest: &mut RunManifest) -> CliResult<()> {
    let cfg = rc.field_config()?;
    let mut csv = CsvWriter::create(out, "field.csv", "t,e", manifest)?;
    let n = 4000usize;
    let step = 2.0 * cfg.t_span() / n as f64;
    for i in 0..=n {
        let t = -cfg.t_span() + step * i as f64;
        csv.row(&[t, cfg.eval_real(t)])?;
    }
    csv.finish()?;

    let spectrum = pulse_spectrum(rc, &cfg)?;
    let mut csv = CsvWriter::create(out, "field_spectrum.csv", "freq,amplitude", manifest)?;
    for (f, a) in spectrum.freqs.iter().zip(spectrum.amplitude.iter()) {
        csv.row(&[*f, *a])?;
    }
    csv.finish()?;

    let peaks: Vec<_> = spectrum
        .peaks
        .iter()
        .map(|p| json!({ "freq": p.freq, "amp": p.amp }))
        .collect();
    write_json(out, "field_peaks.json", json!({ "peaks": peaks }), manifest)?;

    if let Some(dom) = spectrum.dominant_peak() {
        println!("dominant frequency: {}", fmt_float(dom.freq));
    }
    if let Ok(gamma) = cfg.adiabaticity() {
        println!("adiabaticity gamma: {}", fmt_float(gamma));
    }
    println!("spectral peaks: {}", spectrum.peaks.len());
    Ok(())
}

fn cmd_mode(rc: &RunConfig, out: &Path, manifest: &mut RunManifest) -> CliResult<()> {
    let cfg = rc.field_config()?;
    let tol = rc.tolerances()?;
    let solver = QveSolver::new(cfg)?;
    let mom = Momentum::new(rc.qve.p_par, rc.qve.p_perp);
    let sol = solver.integrate_mode(&mom, &tol, true)?;

    let mut csv = CsvWriter::create(out, "trajectory.csv", "t,f,u,v", manifest)?;
    for s in sol.trajectory.as_deref().unwrap_or(&[]) {
        csv.row(&[s.t, s.f, s.u, s.v])?;
    }
    csv.finish()?;

    write_json(
        out,
        "mode.json",
        json!({
            "p_par": rc.qve.p_par,
            "p_perp": rc.qve.p_perp,
            "f_final": sol.f,
            "f_min": sol.f_min,
            "f_max": sol.f_max,
            "plateau_ok": sol.plateau_ok,
        }),
        manifest,
    )?;

    if !sol.plateau_ok {
        eprintln!("warning: trailing-window plateau check failed; consider a longer t_span");
    }
    println!("f(p, +t_span) = {}", fmt_float(sol.f));
    Ok(())
}

fn assignment_json(assignment: &PhotonAssignment<f64>) -> serde_json::Value {
    match assignment {
        PhotonAssignment::Assigned {
            parts,
            residual,
            ties,
        } => json!({
            "assignment": parts
                .iter()
                .map(|&(freq, count)| json!({ "freq": freq, "count": count }))
                .collect::<Vec<_>>(),
            "residual": residual,
            "ties": ties
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|&(freq, count)| json!({ "freq": freq, "count": count }))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        }),
        PhotonAssignment::Unassigned => json!({
            "assignment": "unassigned",
            "residual": null,
            "ties": [],
        }),
    }
}

fn cmd_spectrum(rc: &RunConfig, out: &Path, manifest: &mut RunManifest) -> CliResult<()> {
    let cfg = rc.field_config()?;
    let tol = rc.tolerances()?;
    let grid = rc.grid_spec()?;
    let solver = QveSolver::new(cfg)?;
    let mut spectrum = spec_ops::scan_spectrum(&solver, &grid, rc.qve.p_perp, &tol)?;
    let mut peaks = spec_ops::find_peaks(&spectrum, rc.spectrum.peak_floor)?;
    let pulse = pulse_spectrum(rc, &cfg)?;
    spec_ops::annotate_peaks(
        &cfg,
        &mut peaks,
        &pulse,
        (rc.spectrum.assign_n_min, rc.spectrum.assign_n_max),
        rc.spectrum.assign_tol,
    );
    spectrum.peaks = peaks;

    let mut csv = CsvWriter::create(out, "spectrum.csv", "p_par,f", manifest)?;
    for (p, f) in spectrum.grid.iter().zip(spectrum.f_values.iter()) {
        csv.row(&[*p, *f])?;
    }
    csv.finish()?;

    let peaks_json: Vec<_> = spectrum
        .peaks
        .iter()
        .map(|p| {
            let mut obj = json!({
                "p": p.p_peak,
                "f": p.f_peak,
                "energy": p.energy,
            });
            if let (serde_json::Value::Object(o), serde_json::Value::Object(a)) =
                (&mut obj, assignment_json(&p.assignment))
            {
                o.extend(a);
            }
            obj
        })
        .collect();
    write_json(out, "peaks.json", json!({ "peaks": peaks_json }), manifest)?;

    if !spectrum.pauli_ok {
        eprintln!("warning: Pauli bound violated beyond tolerance in at least one mode");
    }
    if spectrum.plateau_warnings > 0 {
        eprintln!(
            "warning: {} modes failed the trailing-window plateau check",
            spectrum.plateau_warnings
        );
    }
    for p in &spectrum.peaks {
        println!(
            "peak p = {}  f = {}  E = {}",
            fmt_float(p.p_peak),
            fmt_float(p.f_peak),
            fmt_float(p.energy.unwrap_or(f64::NAN)),
        );
    }
    Ok(())
}

fn cmd_density(rc: &RunConfig, out: &Path, manifest: &mut RunManifest) -> CliResult<()> {
    let cfg = rc.field_config()?;
    let tol = rc.tolerances()?;
    let grid = rc.grid_spec()?;
    let solver = QveSolver::new(cfg)?;
    let (spectrum, n) = spec_ops::density_with_extension(
        &solver,
        &grid,
        rc.qve.p_perp,
        &tol,
        rc.spectrum.p_limit,
    )?;

    write_json(
        out,
        "density.json",
        json!({
            "omega": rc.field.omega,
            "omega_m": rc.field.omega_m,
            "b": rc.field.b,
            "e0": rc.field.e0,
            "tau": rc.field.tau,
            "p_perp": rc.qve.p_perp,
            "n": n,
            "grid_p_min": spectrum.grid.first(),
            "grid_p_max": spectrum.grid.last(),
            "grid_points": spectrum.grid.len(),
        }),
        manifest,
    )?;

    println!("n = {}", fmt_float(n));
    Ok(())
}

fn cmd_density_scan(rc: &RunConfig, out: &Path, manifest: &mut RunManifest) -> CliResult<()> {
    let scan = &rc.density_scan;
    if !(scan.omega_step > 0.0 && scan.omega_max > scan.omega_min) {
        return Err(CliError::Config(
            "density_scan needs omega_min < omega_max and omega_step > 0".into(),
        ));
    }
    let tol = rc.tolerances()?;
    let grid = rc.grid_spec()?;
    let count = ((scan.omega_max - scan.omega_min) / scan.omega_step + 0.5).floor() as usize;
    let omegas: Vec<f64> = (0..=count)
        .map(|i| scan.omega_min + scan.omega_step * i as f64)
        .collect();
    let curve = spec_ops::density_vs_frequency(
        rc.field.e0,
        rc.field.tau,
        &omegas,
        &grid,
        &tol,
        rc.spectrum.p_limit,
    )?;

    let mut csv = CsvWriter::create(out, "density_scan.csv", "omega,n", manifest)?;
    for &(omega, n) in &curve {
        csv.row(&[omega, n])?;
    }
    csv.finish()?;
    println!("scanned {} frequencies", curve.len());
    Ok(())
}

fn cmd_turning(rc: &RunConfig, out: &Path, manifest: &mut RunManifest) -> CliResult<()> {
    let cfg = rc.field_config()?;
    let solver = QveSolver::new(cfg)?;
    let mom = Momentum::new(rc.qve.p_par, rc.qve.p_perp);

    let defaults = SearchBox::default_for(&solver);
    let sc = &rc.semiclassical;
    let boks = SearchBox::new(
        sc.re_min.unwrap_or(defaults.re_min),
        sc.re_max.unwrap_or(defaults.re_max),
        sc.im_min.unwrap_or(defaults.im_min),
        sc.im_max.unwrap_or(defaults.im_max),
    )?;
    let set = semiclassical::find_turning_points(&solver, &mom, &boks, sc.seeds_per_period)?;

    let roots: Vec<_> = set
        .points
        .iter()
        .map(|p| {
            json!({
                "re": p.t.re,
                "im": p.t.im,
                "residual": p.residual,
                "K": p.action,
            })
        })
        .collect();
    let f_estimate = semiclassical::semiclassical_f(&set);
    write_json(
        out,
        "turning_points.json",
        json!({
            "p_par": rc.qve.p_par,
            "p_perp": rc.qve.p_perp,
            "box": {
                "re_min": boks.re_min, "re_max": boks.re_max,
                "im_min": boks.im_min, "im_max": boks.im_max,
            },
            "roots": roots,
            "semiclassical_f": f_estimate,
        }),
        manifest,
    )?;

    // Contour grid over a plot-friendly window; the root search box spans
    // the whole pulse, which would make an enormous CSV at this
    // resolution.
    let re_lo = sc.re_min.unwrap_or(-40.0_f64.min(boks.re_max.abs()));
    let re_hi = sc.re_max.unwrap_or(40.0_f64.min(boks.re_max.abs()));
    let grid = semiclassical::omega2_grid(
        &solver,
        &mom,
        (re_lo, re_hi),
        (boks.im_min, boks.im_max),
        sc.grid_resolution,
    )?;
    let mut csv = CsvWriter::create(out, "omega2_grid.csv", "re_t,im_t,abs_omega2", manifest)?;
    for (iy, &im) in grid.im_axis.iter().enumerate() {
        for (ix, &re) in grid.re_axis.iter().enumerate() {
            csv.row(&[re, im, grid.value(ix, iy)])?;
        }
    }
    csv.finish()?;

    println!("turning points: {}", set.points.len());
    println!("semiclassical f estimate: {}", fmt_float(f_estimate));
    Ok(())
}

fn cmd_sweep(rc: &RunConfig, out: &Path, resume: bool, manifest: &mut RunManifest) -> CliResult<()> {
    let tol = rc.tolerances()?;
    let grid = rc.grid_spec()?;
    let sw = &rc.sweep;
    let axes = sweep_ops::AxesSpec::new(
        (sw.omega_m_min, sw.omega_m_max, sw.omega_m_count),
        (sw.b_min, sw.b_max, sw.b_count),
    )?;
    let template = sweep_ops::SweepTemplate {
        e0: rc.field.e0,
        omega: rc.field.omega,
        tau: rc.field.tau,
        p_limit: rc.spectrum.p_limit,
    };

    // resume map from the checkpoint, matched to the axes by value
    let checkpoint_path = out.join("sweep_checkpoint.csv");
    let omega_m_axis: Vec<f64> = (0..sw.omega_m_count)
        .map(|i| {
            sw.omega_m_min
                + (sw.omega_m_max - sw.omega_m_min) * i as f64 / (sw.omega_m_count - 1) as f64
        })
        .collect();
    let b_axis: Vec<f64> = (0..sw.b_count)
        .map(|j| sw.b_min + (sw.b_max - sw.b_min) * j as f64 / (sw.b_count - 1) as f64)
        .collect();
    let mut existing = std::collections::HashMap::new();
    if resume && checkpoint_path.exists() {
        for (omega_m, b, n) in read_checkpoint(&checkpoint_path)? {
            let find = |axis: &[f64], v: f64| {
                axis.iter()
                    .position(|&a| (a - v).abs() <= 1e-12 * (1.0 + v.abs()))
            };
            if let (Some(i), Some(j)) = (find(&omega_m_axis, omega_m), find(&b_axis, b)) {
                existing.insert((i, j), n);
            }
        }
        eprintln!("resume: {} cells from checkpoint", existing.len());
    }

    let checkpoint_file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&checkpoint_path)
        .map_err(|e| CliError::Io(format!("open {}: {e}", checkpoint_path.display())))?;
    if checkpoint_file
        .metadata()
        .map(|m| m.len() == 0)
        .unwrap_or(false)
    {
        use std::io::Write;
        let mut f = &checkpoint_file;
        writeln!(f, "omega_m,b,n").map_err(CliError::from)?;
    }
    let checkpoint = Mutex::new(checkpoint_file);

    let result = sweep_ops::run_sweep(
        &template,
        &axes,
        &grid,
        &tol,
        &sw.alpha_levels,
        |i, j| existing.get(&(i, j)).copied(),
        |i, j, n| {
            use std::io::Write;
            if let Ok(mut file) = checkpoint.lock() {
                let _ = writeln!(
                    file,
                    "{},{},{}",
                    fmt_float(omega_m_axis[i]),
                    fmt_float(b_axis[j]),
                    fmt_float(n)
                );
                let _ = file.flush();
            }
        },
    );
    manifest.record_output("sweep_checkpoint.csv");

    let mut csv = CsvWriter::create(out, "sweep.csv", "omega_m,b,n", manifest)?;
    for (i, &omega_m) in result.omega_m_axis.iter().enumerate() {
        for (j, &b) in result.b_axis.iter().enumerate() {
            if let Some(n) = result.cell(i, j) {
                csv.row(&[omega_m, b, n])?;
            }
        }
    }
    csv.finish()?;

    for (i, j, msg) in &result.diagnostics {
        eprintln!(
            "cell (omega_m = {}, b = {}) failed: {msg}",
            fmt_float(result.omega_m_axis[*i]),
            fmt_float(result.b_axis[*j])
        );
    }

    let mut extrema = Vec::new();
    for region in 0..sw.alpha_levels.len() {
        match sweep_ops::find_extrema(&result, region) {
            Ok(e) => {
                let alpha_lo = if region == 0 {
                    0.0
                } else {
                    sw.alpha_levels[region - 1]
                };
                extrema.push(json!({
                    "region": region,
                    "alpha_lo": alpha_lo,
                    "alpha_hi": sw.alpha_levels[region],
                    "min": { "omega_m": e.min_point.0, "b": e.min_point.1, "n": e.min_point.2 },
                    "max": { "omega_m": e.max_point.0, "b": e.max_point.1, "n": e.max_point.2 },
                }));
            }
            Err(fmpair::Error::EmptyRegion(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    write_json(out, "extrema.json", json!({ "regions": extrema }), manifest)?;

    println!(
        "sweep complete: {} cells, {} failed",
        result.density.iter().filter(|c| c.is_some()).count(),
        result.diagnostics.len()
    );
    Ok(())
}
