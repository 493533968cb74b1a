//! Derivative-free simplex search with restarts.
//!
//! Nelder–Mead with dimension-adaptive coefficients, run in coordinates
//! scaled by the magnitude of the current centre so that parameters spanning
//! many decades move by comparable relative amounts. After each collapse the
//! simplex is rebuilt around the best point with a step taken from a
//! shrinking schedule; the schedule resets whenever a restart improves.

use rand::Rng;

/// Relative simplex steps tried in turn after each collapse.
const STEP_SCHEDULE: [f64; 5] = [0.25, 0.08, 0.02, 0.005, 0.001];

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    /// Every objective value, in evaluation order.
    pub history: Vec<f64>,
    pub stopped_early: bool,
}

/// Evaluation budget shared across restarts, with an optional early-stop
/// threshold.
pub struct Budget {
    pub max_evals: usize,
    pub stop_below: Option<f64>,
}

struct Tracker<'a, F: FnMut(&[f64]) -> f64> {
    f: &'a mut F,
    evals: usize,
    max_evals: usize,
    history: Vec<f64>,
    best_x: Vec<f64>,
    best_f: f64,
    stop_below: Option<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Tracker<'_, F> {
    fn exhausted(&self) -> bool {
        self.evals >= self.max_evals || self.stop_below.is_some_and(|t| self.best_f < t)
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        self.evals += 1;
        self.history.push(v);
        if v < self.best_f {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        v
    }
}

/// Minimize `f` from `x0` within `budget`.
pub fn minimize<F, R>(mut f: F, x0: &[f64], budget: Budget, rng: &mut R) -> SearchOutcome
where
    F: FnMut(&[f64]) -> f64,
    R: Rng,
{
    let mut t = Tracker {
        f: &mut f,
        evals: 0,
        max_evals: budget.max_evals,
        history: Vec::new(),
        best_x: x0.to_vec(),
        best_f: f64::INFINITY,
        stop_below: budget.stop_below,
    };
    t.eval(x0);
    let mut stage = 0;
    while !t.exhausted() {
        let before = t.best_f;
        let centre = t.best_x.clone();
        nelder_mead_run(&mut t, &centre, STEP_SCHEDULE[stage], rng);
        let improved = t.best_f < before - 1e-9 * before.abs().max(1e-12);
        stage = if improved { 0 } else { (stage + 1) % STEP_SCHEDULE.len() };
    }
    let stopped_early = t.stop_below.is_some_and(|s| t.best_f < s);
    SearchOutcome {
        x: t.best_x,
        f: t.best_f,
        evaluations: t.evals,
        history: t.history,
        stopped_early,
    }
}

fn nelder_mead_run<F: FnMut(&[f64]) -> f64, R: Rng>(t: &mut Tracker<'_, F>, centre: &[f64], step: f64, rng: &mut R) {
    let n = centre.len();
    if n == 0 {
        return;
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let scale: Vec<f64> = centre.iter().map(|c| if *c != 0.0 { c.abs() } else { 1.0 }).collect();
    let to_theta = |y: &[f64]| -> Vec<f64> { y.iter().zip(&scale).map(|(a, s)| a * s).collect() };

    let y0: Vec<f64> = centre.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((y0.clone(), t.best_f));
    for i in 0..n {
        if t.exhausted() {
            return;
        }
        let mut y = y0.clone();
        let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        y[i] += dir * step;
        let v = t.eval(&to_theta(&y));
        simplex.push((y, v));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (f_best, f_worst) = (simplex[0].1, simplex[n].1);
        let size = simplex[1..]
            .iter()
            .map(|(y, _)| y.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let flat = (f_worst - f_best).abs() <= 1e-12 * f_best.abs().max(1e-12);
        if t.exhausted() || size < 1e-9 || (flat && size < 1e-4) {
            return;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(y, _)| y[j]).sum::<f64>() / nf)
            .collect();
        let along = |k: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + k * (c - w)).collect()
        };
        let yr = along(alpha);
        let fr = t.eval(&to_theta(&yr));
        if fr < simplex[0].1 {
            if t.exhausted() {
                simplex[n] = (yr, fr);
                continue;
            }
            let ye = along(alpha * beta);
            let fe = t.eval(&to_theta(&ye));
            simplex[n] = if fe < fr { (ye, fe) } else { (yr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (yr, fr);
            continue;
        }
        if t.exhausted() {
            return;
        }
        let (yc, fc) = if fr < simplex[n].1 {
            let yc = along(alpha * gamma);
            let fc = t.eval(&to_theta(&yc));
            (yc, fc)
        } else {
            let yc = along(-gamma);
            let fc = t.eval(&to_theta(&yc));
            (yc, fc)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (yc, fc);
            continue;
        }
        // shrink towards the best vertex
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            if t.exhausted() {
                return;
            }
            let y: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + delta * (x - b)).collect();
            let fy = t.eval(&to_theta(&y));
            *v = (y, fy);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smooth_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2);
        let out = minimize(f, &[1.0, 1.0], Budget { max_evals: 2000, stop_below: None }, &mut rng);
        assert!((out.x[0] - 3.0).abs() < 1e-4 && (out.x[1] + 2.0).abs() < 1e-4, "{:?}", out.x);
        assert_eq!(out.evaluations, 2000);
        assert_eq!(out.history.len(), 2000);
    }

    #[test]
    fn max_of_kinks() {
        // minimum of a max-type function sits on a kink
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = |x: &[f64]| (x[0] - 1.0).abs().max((x[1] - 2.0).abs() * 3.0).max((x[0] + x[1] - 3.0).abs());
        let out = minimize(f, &[5.0, -4.0], Budget { max_evals: 4000, stop_below: None }, &mut rng);
        assert!(out.f < 1e-5, "{}", out.f);
    }

    #[test]
    fn rosenbrock_badly_scaled() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = |x: &[f64]| {
            let (a, b) = (x[0] / 1e3, x[1] * 1e2);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let out = minimize(f, &[-1.2e3, 1e-2], Budget { max_evals: 6000, stop_below: None }, &mut rng);
        assert!(out.f < 1e-6, "{}", out.f);
    }

    #[test]
    fn early_stop_and_monotone_best() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let out = minimize(f, &[1.0, 1.0, 1.0], Budget { max_evals: 5000, stop_below: Some(1e-2) }, &mut rng);
        assert!(out.stopped_early && out.f < 1e-2 && out.evaluations < 5000);
        let mut best = f64::INFINITY;
        for v in &out.history {
            best = best.min(*v);
        }
        assert_eq!(best, out.f);
    }

    #[test]
    fn never_worse_than_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = |x: &[f64]| if x[0] == 0.5 { 0.0 } else { 1.0 + x[0].abs() };
        let out = minimize(f, &[0.5], Budget { max_evals: 100, stop_below: None }, &mut rng);
        assert_eq!(out.f, 0.0);
        assert_eq!(out.x, vec![0.5]);
    }
}
