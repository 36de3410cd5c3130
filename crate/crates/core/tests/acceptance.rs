//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with the measured numbers. Expensive artifacts (momentum scans,
//! densities) are computed once and shared.
//!
//! All tolerances are pinned here, in code. Published reference values:
//! densities 1.04e-7 (omega = 0.5) and 1.74e-6 (omega = 0.7), peak table
//! p1..p8, enhancement point F = 2.03e-5 and suppression point C = 7.63e-9,
//! and the first-kind Bessel ratios for the unit modulation index.

use std::sync::OnceLock;
use std::time::Instant;

use fmpair::field::{field_spectrum, field_spectrum_with_floor};
use fmpair::semiclassical::{find_turning_points, omega2_grid, semiclassical_f, SearchBox};
use fmpair::spectrum::{
    assign_photons, density_with_extension, find_peaks, pair_energy, scan_spectrum,
};
use fmpair::{
    FieldConfig, FieldSpectrum, GridSpec, Momentum, MomentumSpectrum, PhotonAssignment,
    QveSolver, Tolerances,
};

const P_LIMIT: f64 = 6.0;

fn tol() -> Tolerances<f64> {
    Tolerances::default()
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:<3} [{}] {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

struct DensityRun {
    solver: QveSolver<f64>,
    spectrum: MomentumSpectrum<f64>,
    density: f64,
}

fn density_run(omega: f64, omega_m: f64, b: f64) -> DensityRun {
    let cfg = FieldConfig::new(0.1, omega, 100.0, omega_m, b).unwrap();
    let solver = QveSolver::new(cfg).unwrap();
    let (spectrum, density) = density_with_extension(
        &solver,
        &GridSpec::default_scan(),
        0.0,
        &tol(),
        P_LIMIT,
    )
    .unwrap();
    DensityRun {
        solver,
        spectrum,
        density,
    }
}

fn baseline() -> &'static DensityRun {
    static CELL: OnceLock<DensityRun> = OnceLock::new();
    CELL.get_or_init(|| density_run(0.5, 0.0, 0.0))
}

fn baseline_w07() -> &'static DensityRun {
    static CELL: OnceLock<DensityRun> = OnceLock::new();
    CELL.get_or_init(|| density_run(0.7, 0.0, 0.0))
}

fn modulated_scan() -> &'static MomentumSpectrum<f64> {
    static CELL: OnceLock<MomentumSpectrum<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = FieldConfig::new(0.1, 0.5, 100.0, 0.07, 1.0).unwrap();
        let solver = QveSolver::new(cfg).unwrap();
        scan_spectrum(&solver, &GridSpec::default_scan(), 0.0, &tol()).unwrap()
    })
}

fn pulse_spectrum_w07() -> &'static FieldSpectrum<f64> {
    static CELL: OnceLock<FieldSpectrum<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = FieldConfig::new(0.1, 0.5, 100.0, 0.07, 1.0).unwrap();
        field_spectrum(&cfg, 0.0035).unwrap()
    })
}

/// Refined position of the measured peak closest to `target`, if within
/// `window`.
fn peak_near(spec: &MomentumSpectrum<f64>, target: f64, window: f64) -> Option<f64> {
    find_peaks(spec, 1e-4)
        .unwrap()
        .iter()
        .map(|p| p.p_peak)
        .filter(|p| (p - target).abs() <= window)
        .min_by(|a, b| {
            (a - target)
                .abs()
                .partial_cmp(&(b - target).abs())
                .unwrap()
        })
}

#[test]
fn criterion_01_baseline_density() {
    let start = Instant::now();
    let run = baseline();
    let elapsed = start.elapsed().as_secs_f64();
    let rel = (run.density - 1.04e-7).abs() / 1.04e-7;
    let pass = rel <= 0.10 && elapsed < 900.0;
    report(
        "1",
        pass,
        &format!(
            "baseline density n = {:.3e} vs 1.04e-7 (rel dev {:.1}%), {} modes in {elapsed:.0} s",
            run.density,
            rel * 100.0,
            run.spectrum.grid.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_second_baseline_density() {
    let run = baseline_w07();
    let rel = (run.density - 1.74e-6).abs() / 1.74e-6;
    let pass = rel <= 0.10;
    report(
        "2",
        pass,
        &format!(
            "omega = 0.7 density n = {:.3e} vs 1.74e-6 (rel dev {:.1}%)",
            run.density,
            rel * 100.0
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_peak_positions() {
    let unmod = &baseline().spectrum;
    let p1 = peak_near(unmod, 0.080, 0.01);
    let p2 = peak_near(unmod, 0.728, 0.01);

    let modulated = modulated_scan();
    let table = [0.083, 0.232, 0.356, 0.451, 0.535, 0.731];
    let matches: Vec<Option<f64>> = table
        .iter()
        .map(|&t| peak_near(modulated, t, 0.02))
        .collect();
    let pass = p1.is_some() && p2.is_some() && matches.iter().all(Option::is_some);
    report(
        "3",
        pass,
        &format!(
            "p1 = {p1:?} (+-0.01 of 0.080), p2 = {p2:?} (+-0.01 of 0.728), \
             p3..p8 = {matches:?} (+-0.02 of the published table)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_photon_assignment() {
    // omega0 measured from the dominant peak of the pulse spectrum
    let cfg_unmod = FieldConfig::<f64>::new(0.1, 0.5, 100.0, 0.0, 0.0).unwrap();
    let unmod_pulse = field_spectrum(&cfg_unmod, 0.0025).unwrap();
    let omega0 = unmod_pulse.dominant_peak().unwrap().freq;

    let unmod = &baseline().spectrum;
    let p1 = peak_near(unmod, 0.080, 0.01).expect("p1 present");
    let p2 = peak_near(unmod, 0.728, 0.01).expect("p2 present");
    let r1 = pair_energy(&cfg_unmod, p1) / omega0;
    let r2 = pair_energy(&cfg_unmod, p2) / omega0;
    let four_ok = (3.92..=4.08).contains(&r1);
    let five_ok = (4.9..=5.1).contains(&r2);

    // p4..p7 must decompose into 3 omega0 + one k-th sideband (k = 1..4)
    let cfg_mod = FieldConfig::<f64>::new(0.1, 0.5, 100.0, 0.07, 1.0).unwrap();
    let pulse = pulse_spectrum_w07();
    let dominant = pulse.dominant_peak().unwrap().freq;
    let modulated = modulated_scan();
    let mut sideband_ok = Vec::new();
    for (k, target) in [(1u32, 0.232), (2, 0.356), (3, 0.451), (4, 0.535)] {
        let p = peak_near(modulated, target, 0.02).expect("table peak present");
        let energy = pair_energy(&cfg_mod, p);
        let assignment = assign_photons(energy, pulse, (3, 6), 0.02);
        let ok = match &assignment {
            PhotonAssignment::Assigned { parts, residual, .. } => {
                let carrier = parts
                    .iter()
                    .any(|&(f, n)| n == 3 && (f - dominant).abs() <= pulse.resolution);
                let sideband_freq = 0.5 + 0.07 * k as f64;
                let sideband = parts
                    .iter()
                    .any(|&(f, n)| n == 1 && (f - sideband_freq).abs() <= 2.0 * pulse.resolution);
                carrier && sideband && *residual <= 0.02 && parts.len() == 2
            }
            PhotonAssignment::Unassigned => false,
        };
        sideband_ok.push(ok);
    }
    let pass = four_ok && five_ok && sideband_ok.iter().all(|&b| b);
    report(
        "4",
        pass,
        &format!(
            "E(p1)/omega0 = {r1:.3} in [3.92, 4.08]; E(p2)/omega0 = {r2:.3} in [4.9, 5.1]; \
             p4..p7 -> 3*omega0 + omega_k: {sideband_ok:?} (omega0 = {omega0:.4})"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_modulation_enhancement() {
    let n_base = baseline().density;
    let f_run = density_run(0.5, 0.022, 8.64);
    let c_run = density_run(0.5, 0.009, 9.52);
    let rel_f = (f_run.density - 2.03e-5).abs() / 2.03e-5;
    let ratio = f_run.density / n_base;
    let f_ok = rel_f <= 0.15;
    let ratio_ok = ratio >= 100.0;
    let c_ok = c_run.density < n_base;
    let pass = f_ok && ratio_ok && c_ok;
    report(
        "5",
        pass,
        &format!(
            "n(F) = {:.3e} vs 2.03e-5 (rel dev {:.1}%), enhancement x{ratio:.0} (>= 100), \
             n(C) = {:.3e} < baseline {:.3e}: {c_ok}",
            f_run.density,
            rel_f * 100.0,
            c_run.density,
            n_base
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_frequency_threshold_sensitivity() {
    let n_05 = baseline().density;
    let run_0512 = density_run(0.512, 0.0, 0.0);
    let ratio = run_0512.density / n_05;
    let pass = ratio >= 10.0;
    report(
        "6",
        pass,
        &format!(
            "n(0.512) = {:.3e}, n(0.5) = {n_05:.3e}, ratio {ratio:.1} (>= 10)",
            run_0512.density
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_field_spectrum_physics() {
    // Jacobi-Anger oracle, frozen: |J_k(1)| / |J_0(1)| for k = 0..3
    let j_ratios = [
        1.0,
        0.44005058574493352 / 0.76519768655796655,
        0.11490348493190048 / 0.76519768655796655,
        0.019563353982668406 / 0.76519768655796655,
    ];
    let pulse = pulse_spectrum_w07();
    let mut detail = String::new();
    let mut pass = true;
    for (k, &ratio) in j_ratios.iter().enumerate() {
        let target = 0.5 + 0.07 * k as f64;
        let nearest = pulse
            .peaks
            .iter()
            .min_by(|a, b| {
                (a.freq - target)
                    .abs()
                    .partial_cmp(&(b.freq - target).abs())
                    .unwrap()
            })
            .unwrap();
        let pos_ok = (nearest.freq - target).abs() <= pulse.resolution;
        let amp_ok = (nearest.amp - ratio).abs() / ratio <= 0.05;
        pass &= pos_ok && amp_ok;
        detail.push_str(&format!(
            "k={k}: f {:.4} (d {:.1e}), amp {:.4} vs {:.4}; ",
            nearest.freq,
            (nearest.freq - target).abs(),
            nearest.amp,
            ratio
        ));
    }
    report("7", pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_08_oracle_equivalence() {
    let start = Instant::now();
    let cfg = FieldConfig::<f64>::new(0.1, 0.5, 10.0, 0.0, 0.0).unwrap();
    let solver = QveSolver::new(cfg).unwrap();
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &p in &[-0.2, 0.0, 0.1, 0.3, 0.5] {
        let mom = Momentum::new(p, 0.0);
        let f_ode = solver.integrate_mode(&mom, &tol(), false).unwrap().f;
        let f_direct = fmpair::qve::oracle_direct(&cfg, &mom, 48000);
        let rel = (f_ode - f_direct).abs() / f_ode.abs();
        worst = worst.max(rel);
        detail.push_str(&format!("p={p}: rel {rel:.1e}; "));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-4 && elapsed <= 60.0;
    report(
        "8",
        pass,
        &format!("worst rel deviation {worst:.2e} (<= 1e-4) in {elapsed:.1} s (<= 60); {detail}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_turning_points() {
    let solver = &baseline().solver;
    let mom = Momentum::new(0.08, 0.0);
    let boks = SearchBox::default_for(solver);
    let set = find_turning_points(solver, &mom, &boks, 4).unwrap();
    assert!(!set.points.is_empty());

    // (a) polished residuals: |Omega^2| < 1e-16 for every reported root
    let worst_res_sq = set
        .points
        .iter()
        .map(|p| p.residual * p.residual)
        .fold(0.0f64, f64::max);
    let res_ok = worst_res_sq < 1e-16;

    // (b) roots co-locate with |Omega^2| grid minima within one cell
    let res = 0.05;
    let window = omega2_grid(solver, &mom, (-14.0, 14.0), (3.5, 6.5), res).unwrap();
    let minima = window.local_minima();
    let in_window: Vec<_> = set
        .points
        .iter()
        .filter(|p| p.t.re.abs() < 13.5 && p.t.im > 3.6 && p.t.im < 6.4)
        .collect();
    let coloc_ok = !in_window.is_empty()
        && in_window.iter().all(|p| {
            minima.iter().any(|&(ix, iy)| {
                (window.re_axis[ix] - p.t.re).abs() <= res
                    && (window.im_axis[iy] - p.t.im).abs() <= res
            })
        });

    // (c) e^{-2K} of the dominant root vs the QVE occupation at p1,
    // within a factor of 3
    let dominant = set
        .points
        .iter()
        .min_by(|a, b| a.action.partial_cmp(&b.action).unwrap())
        .unwrap();
    let single_root_yield = (-2.0 * dominant.action).exp();
    let f_qve = solver
        .integrate_mode(&mom, &tol(), false)
        .unwrap()
        .f;
    let ratio = f_qve / single_root_yield;
    let yield_ok = (1.0 / 3.0..=3.0).contains(&ratio);
    let f_semiclassical = semiclassical_f(&set);

    let pass = res_ok && coloc_ok && yield_ok;
    report(
        "9",
        pass,
        &format!(
            "{} roots; worst |Omega^2| = {worst_res_sq:.2e} (< 1e-16): {res_ok}; \
             grid colocation ({} roots in window): {coloc_ok}; \
             dominant-root K = {:.4}, e^-2K = {single_root_yield:.2e} vs f_QVE = {f_qve:.2e} \
             (ratio {ratio:.1}, need [1/3, 3]): {yield_ok} \
             [full Eq.-(6) sum over all {} roots: {f_semiclassical:.2e}, ratio {:.2}]",
            set.points.len(),
            in_window.len(),
            dominant.action,
            set.points.len(),
            f_qve / f_semiclassical
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_invariant_suite() {
    // Pauli bound over every integration in the shared artifacts
    let pauli_ok = baseline().spectrum.pauli_ok
        && baseline_w07().spectrum.pauli_ok
        && modulated_scan().pauli_ok;

    // deterministic sweep output across worker counts
    let sweep = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            fmpair::sweep::run_sweep(
                &fmpair::sweep::SweepTemplate {
                    e0: 0.1,
                    omega: 0.5,
                    tau: 10.0,
                    p_limit: 3.0,
                },
                &fmpair::sweep::AxesSpec::new((0.0, 0.08, 2), (0.0, 1.5, 2)).unwrap(),
                &GridSpec::new(-0.6, 0.8, 0.02).unwrap(),
                &tol(),
                &[0.1, 1.0],
                |_, _| None,
                |_, _, _| {},
            )
        })
    };
    let a = sweep(1);
    let b = sweep(3);
    let deterministic = a
        .density
        .iter()
        .zip(b.density.iter())
        .all(|(x, y)| x == y);

    // halving the grid step changes the baseline density by < 1%
    let n_default = baseline().density;
    let cfg = FieldConfig::<f64>::new(0.1, 0.5, 100.0, 0.0, 0.0).unwrap();
    let solver = QveSolver::new(cfg).unwrap();
    let fine_grid = GridSpec::new(-0.2, 1.0, 1e-3).unwrap();
    let (_, n_fine) = density_with_extension(&solver, &fine_grid, 0.0, &tol(), P_LIMIT).unwrap();
    let grid_dev = (n_fine - n_default).abs() / n_default;
    let grid_ok = grid_dev < 0.01;

    let pass = pauli_ok && deterministic && grid_ok;
    report(
        "10",
        pass,
        &format!(
            "Pauli bound on all scans: {pauli_ok}; sweep bit-identical across 1 vs 3 workers: \
             {deterministic}; density change under grid halving {:.2}% (< 1%): {grid_ok}",
            grid_dev * 100.0
        ),
    );
    assert!(pass);
}

#[test]
fn field_spectrum_floor_keeps_weak_sidebands_detectable() {
    // guard for the peak-floor choice the acceptance relies on: the p8
    // five-photon peak sits at ~1.7e-4 of the spectrum maximum, so the
    // momentum peak finder must work at the 1e-4 floor
    let spec = modulated_scan();
    let peaks = find_peaks(spec, 1e-4).unwrap();
    assert!(peaks.len() >= 6, "only {} peaks at the 1e-4 floor", peaks.len());
    let with_default = find_peaks(spec, 1e-3).unwrap();
    assert!(with_default.len() <= peaks.len());
}
