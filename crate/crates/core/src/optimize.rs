//! Small numerical kernels shared by the fitting code.

/// The real root of `x³ + p·x + q = 0` when `p ≥ 0` (the cubic is then
/// strictly increasing, so the root is unique).
pub fn monotone_cubic_root(p: f64, q: f64) -> f64 {
    debug_assert!(p >= 0.0);
    if q == 0.0 {
        return 0.0;
    }
    let disc = (q * 0.5).powi(2) + (p / 3.0).powi(3);
    // Cardano written so that no cancellation occurs in `a`.
    let a = (-0.5 * q - q.signum() * disc.sqrt()).cbrt();
    let mut x = if a == 0.0 { 0.0 } else { a - p / (3.0 * a) };
    for _ in 0..3 {
        let f = x * x * x + p * x + q;
        let d = 3.0 * x * x + p;
        if d == 0.0 {
            break;
        }
        let step = f / d;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

/// Locates a sign change of `f` in `[a, b]`, assuming `f(a)` and `f(b)` have
/// opposite signs (or one vanishes). Returns the midpoint of the last bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    if f(b) == 0.0 {
        return b;
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Finds the boundary between a true and a false predicate value on `[a, b]`.
/// `pred(a)` and `pred(b)` must differ.
pub fn bisect_predicate<F: Fn(f64) -> bool>(pred: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let pa = pred(a);
    debug_assert_ne!(pa, pred(b));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if pred(m) == pa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    /// Stops once the simplex value spread is below `rel_tol·(|f_best| + abs_floor)`.
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { initial_step: 0.1, rel_tol: 1e-4, abs_floor: 1e-9, max_iter: 400 }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Derivative-free minimisation with the standard reflection, expansion,
/// contraction and shrink moves.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = vals[n] - vals[0];
        if spread <= opts.rel_tol * (vals[0].abs() + opts.abs_floor) {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|d| simplex[..n].iter().map(|x| x[d]).sum::<f64>() / n as f64).collect();
        let along = |c: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(m, w)| m + c * (m - w)).collect()
        };
        let xr = along(1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            simplex[n] = xc;
            vals[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = best.iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
            vals[i] = f(&simplex[i]);
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), value: vals[best], iterations }
}
