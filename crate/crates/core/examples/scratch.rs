use num_complex::Complex64;
use fmpair::{FieldConfig, Momentum, QveSolver};

fn main() {
    let cfg = FieldConfig::<f64>::new(0.1, 0.5, 100.0, 0.0, 0.0).unwrap();
    let solver = QveSolver::new(cfg).unwrap();
    let mom = Momentum::new(0.08, 0.0);
    let eps = mom.eps_perp();

    // reproduce the smooth evaluation here to watch Newton behave
    let om2 = |t: Complex64| -> f64 {
        let a = fmpair::semiclassical::debug_a_complex_smooth(&solver, t.re, t.im);
        let k = Complex64::new(mom.p_par(), 0.0) - a;
        (k - Complex64::new(0.0, eps)).norm() * (k + Complex64::new(0.0, eps)).norm()
    };
    let g = |t: Complex64| -> Complex64 {
        let a = fmpair::semiclassical::debug_a_complex_smooth(&solver, t.re, t.im);
        let k = Complex64::new(mom.p_par(), 0.0) - a;
        k - Complex64::new(0.0, eps)
    };
    let mut t = Complex64::new(-0.156502269558073, 4.62986160230096);
    for i in 0..12 {
        let gv = g(t);
        let e = cfg.eval(t);
        println!("iter {i}: t = {:.17e}+{:.17e}i |g| = {:.3e} |Om2| = {:.3e}", t.re, t.im, gv.norm(), om2(t));
        t = t - gv / e;
    }
}
