//! Bessel-function sideband theory for the phase-modulated carrier.
//!
//! `cos(omega t + b sin(omega_m t)) = Σ_k J_k(b) cos((omega + k omega_m) t)`,
//! so the pulse spectrum is the carrier plus sidebands at `omega + k omega_m`
//! weighted by `J_k(b)`. This is the analytic cross-check for the FFT-based
//! spectrum.

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::real::Real;

/// First-kind Bessel values `J_0(x) .. J_{k_max}(x)` by Miller's downward
/// recurrence with the `J_0 + 2 Σ J_{2k} = 1` normalization.
///
/// Accurate to near machine precision for the modulation depths in play
/// (`x` up to a few tens).
pub fn bessel_j_sequence<T: Real>(k_max: usize, x: T) -> Vec<T> {
    if x == T::zero() {
        let mut out = vec![T::zero(); k_max + 1];
        out[0] = T::one();
        return out;
    }
    let ax = x.abs();
    // start order: high enough that the downward recurrence has washed out
    // the arbitrary seed by the time it reaches k_max
    let start = {
        let guess = ax.to_f64_lossy().max(k_max as f64);
        (guess + 16.0 + 2.0 * guess.sqrt()).ceil() as usize
    };
    let start = start + (start & 1); // even
    let mut jp = T::zero(); // J_{m+1}
    let mut j = T::of(1e-300); // J_m (arbitrary tiny seed)
    let mut out = vec![T::zero(); k_max + 1];
    let mut norm = T::zero(); // J_0 + 2 Σ_{even k >= 2} J_k
    for m in (0..=start).rev() {
        let jm = T::of(2.0 * (m + 1) as f64) / ax * j - jp;
        jp = j;
        j = jm;
        // rescale to dodge overflow of the unnormalized recurrence
        if j.abs() > T::of(1e250) {
            let s = T::of(1e-250);
            j = j * s;
            jp = jp * s;
            norm = norm * s;
            for v in out.iter_mut() {
                *v = *v * s;
            }
        }
        if m <= k_max {
            out[m] = j;
        }
        if m % 2 == 0 {
            norm = norm + if m == 0 { j } else { T::of(2.0) * j };
        }
    }
    for v in out.iter_mut() {
        *v = *v / norm;
    }
    if x < T::zero() {
        // J_k(-x) = (-1)^k J_k(x)
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Predicted sideband comb for a config: `(omega + k omega_m, |J_k(b)|)` for
/// `k` in `[-k_max, k_max]`, amplitudes normalized so the largest is 1.
///
/// Negative-frequency entries (possible for large `k_max * omega_m`) are
/// kept as-is; callers interested in the physical spectrum fold or drop
/// them.
pub fn sideband_theory<T: Real>(cfg: &FieldConfig<T>, k_max: usize) -> Result<Vec<(T, T)>> {
    let b = cfg.modulation_depth();
    let j = bessel_j_sequence(k_max, b);
    let mut comb = Vec::with_capacity(2 * k_max + 1);
    for k in -(k_max as i64)..=(k_max as i64) {
        let jk = j[k.unsigned_abs() as usize].abs(); // |J_{-k}| = |J_k|
        let freq = cfg.omega() + T::of(k as f64) * cfg.omega_m();
        comb.push((freq, jk));
    }
    let max = comb
        .iter()
        .map(|&(_, a)| a)
        .fold(T::zero(), |m, a| if a > m { a } else { m });
    if max == T::zero() {
        return Err(Error::InvalidConfig(
            "sideband comb is identically zero".into(),
        ));
    }
    for entry in comb.iter_mut() {
        entry.1 = entry.1 / max;
    }
    Ok(comb)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Test-only oracle: J_k by direct power series
    /// Σ_m (-1)^m (x/2)^{k+2m} / (m! (m+k)!), summed to convergence.
    fn bessel_j_series(k: usize, x: f64) -> f64 {
        let half = 0.5 * x;
        let mut term = 1.0;
        for i in 1..=k {
            term *= half / i as f64;
        }
        let mut sum = term;
        let mut m = 1.0;
        loop {
            term *= -half * half / (m * (m + k as f64));
            let next = sum + term;
            if next == sum || !next.is_finite() {
                return sum;
            }
            sum = next;
            m += 1.0;
        }
    }

    #[test]
    fn matches_series_oracle() {
        // The alternating series loses ~e^x of precision to cancellation,
        // so the comparison tolerance must grow with the argument.
        for &x in &[0.3f64, 1.0, 2.405, 5.5, 9.52, 12.0] {
            let tol = 1e-14 + 5e-15 * (x.exp() / x.sqrt());
            let seq = bessel_j_sequence::<f64>(12, x);
            for k in 0..=12 {
                let reference = bessel_j_series(k, x);
                assert!(
                    (seq[k] - reference).abs() < tol,
                    "J_{k}({x}): {} vs {} (tol {tol:e})",
                    seq[k],
                    reference
                );
            }
        }
    }

    #[test]
    fn known_values() {
        let seq = bessel_j_sequence::<f64>(3, 1.0);
        assert!((seq[0] - 0.76519768655796655145).abs() < 1e-14);
        assert!((seq[1] - 0.44005058574493351596).abs() < 1e-14);
        assert!((seq[2] - 0.11490348493190048047).abs() < 1e-14);
        assert!((seq[3] - 0.019563353982668405919).abs() < 1e-14);
    }

    #[test]
    fn zero_argument_is_kronecker_delta() {
        let seq = bessel_j_sequence::<f64>(6, 0.0);
        assert_eq!(seq[0], 1.0);
        assert!(seq[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn comb_for_unmodulated_field_is_pure_carrier() {
        let cfg = FieldConfig::<f64>::new(0.1, 0.5, 100.0, 0.07, 0.0).unwrap();
        let comb = sideband_theory(&cfg, 4).unwrap();
        for &(freq, amp) in &comb {
            if (freq - 0.5).abs() < 1e-12 {
                assert_eq!(amp, 1.0);
            } else {
                assert_eq!(amp, 0.0);
            }
        }
    }

    #[test]
    fn carrier_suppressed_at_first_j0_zero() {
        // b = 2.405 sits at the first zero of J_0: carrier < 1e-3 of max
        let cfg = FieldConfig::<f64>::new(0.1, 0.5, 100.0, 0.07, 2.405).unwrap();
        let comb = sideband_theory(&cfg, 6).unwrap();
        let carrier = comb
            .iter()
            .find(|&&(f, _)| (f - 0.5).abs() < 1e-12)
            .unwrap()
            .1;
        assert!(carrier < 1e-3, "carrier amplitude {carrier}");
    }

    #[test]
    fn first_sideband_ratio_at_unit_depth() {
        let cfg = FieldConfig::<f64>::new(0.1, 0.5, 100.0, 0.07, 1.0).unwrap();
        let comb = sideband_theory(&cfg, 3).unwrap();
        let amp_at = |f0: f64| {
            comb.iter()
                .find(|&&(f, _)| (f - f0).abs() < 1e-9)
                .unwrap()
                .1
        };
        // J_0 dominates at b = 1, so normalized first sideband = |J_1/J_0|
        assert!((amp_at(0.57) - 0.5750809150043059).abs() < 1e-12);
        assert!((amp_at(0.43) - 0.5750809150043059).abs() < 1e-12);
        assert_eq!(amp_at(0.5), 1.0);
    }
}
