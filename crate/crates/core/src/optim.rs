//! Derivative-free minimization by the Nelder–Mead simplex method.

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadConfig {
    pub max_iterations: usize,
    /// Converged when the spread of simplex values falls below
    /// `tolerance * (|f_best| + tolerance)`.
    pub tolerance: f64,
    /// After convergence the simplex is rebuilt around the best point and
    /// the search continues; stops once a restart no longer improves.
    pub max_restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig { max_iterations: 2000, tolerance: 1e-8, max_restarts: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;

/// Dimension-adaptive expansion, contraction and shrink coefficients
/// (Gao and Han); they reduce to 2, ½, ½ in two dimensions.
fn coefficients(n: usize) -> (f64, f64, f64) {
    let n = n.max(2) as f64;
    (1.0 + 2.0 / n, 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n)
}

/// Minimizes `f` from `x0`. `steps[i]` is the initial simplex edge along
/// coordinate `i`. Non-finite objective values are treated as `+inf`.
///
/// The returned value never exceeds `f(x0)`: the start is a simplex vertex
/// and the best vertex is only ever replaced by a better point.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], cfg: &NelderMeadConfig) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let n = x0.len();
    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    if n == 0 {
        return Minimum { x: best_x, value: best_f, iterations: 0, converged: true };
    }

    let mut iterations = 0;
    let mut restarts = 0;
    let converged = loop {
        let (x, fx, conv) = run_simplex(&mut eval, &best_x, best_f, steps, cfg, &mut iterations);
        let improved = fx < best_f
            && (best_f - fx) > cfg.tolerance * (fx.abs() + cfg.tolerance);
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        if !conv || !improved || restarts >= cfg.max_restarts || iterations >= cfg.max_iterations {
            break conv;
        }
        restarts += 1;
    };
    Minimum { x: best_x, value: best_f, iterations, converged }
}

fn run_simplex<F>(
    eval: &mut F,
    x0: &[f64],
    f0: f64,
    steps: &[f64],
    cfg: &NelderMeadConfig,
    iterations: &mut usize,
) -> (Vec<f64>, f64, bool)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let (expand, contract, shrink) = coefficients(n);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += if steps[i] != 0.0 { steps[i] } else { 0.05 };
        let fx = eval(&x);
        simplex.push((x, fx));
    }

    let point = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        if f_best.is_finite() && (f_worst - f_best) <= cfg.tolerance * (f_best.abs() + cfg.tolerance) {
            return (simplex[0].0.clone(), f_best, true);
        }
        if *iterations >= cfg.max_iterations {
            return (simplex[0].0.clone(), f_best, false);
        }
        *iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let xr = point(&centroid, &worst, -REFLECT);
        let fr = eval(&xr);
        if fr < f_best {
            let xe = point(&centroid, &worst, -expand);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        // contraction: outside when the reflection beat the worst vertex
        let (xc, fc) = if fr < f_worst {
            let xc = point(&centroid, &xr, contract);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = point(&centroid, &worst, contract);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(f_worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            v.0 = point(&x_best, &v.0, shrink);
            v.1 = eval(&v.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2) + 2.0;
        let m = nelder_mead(f, &[0.0, 0.0], &[0.5, 0.5], &NelderMeadConfig::default());
        assert!(m.converged);
        assert!((m.x[0] - 3.0).abs() < 1e-3);
        assert!((m.x[1] + 1.0).abs() < 1e-3);
        assert!((m.value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let cfg = NelderMeadConfig { tolerance: 1e-12, ..Default::default() };
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.1, 0.1], &cfg);
        assert!((m.x[0] - 1.0).abs() < 1e-3, "{:?}", m);
    }

    #[test]
    fn never_worse_than_start_and_handles_nan() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { (x[0] - 0.4).powi(2) };
        let m = nelder_mead(f, &[0.0], &[1.0], &NelderMeadConfig::default());
        assert!(m.value <= 0.16);
        assert!((m.x[0] - 0.4).abs() < 1e-3);
    }

    #[test]
    fn reports_non_convergence() {
        let f = |x: &[f64]| -x[0];
        let cfg = NelderMeadConfig { max_iterations: 50, ..Default::default() };
        let m = nelder_mead(f, &[0.0], &[1.0], &cfg);
        assert!(!m.converged);
        assert_eq!(m.iterations, 50);
    }
}
