use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadParams {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Absolute offset added to each coordinate of `x0` for the initial simplex.
    pub initial_step: f64,
    /// Stop once `max f - min f` over the simplex falls below this.
    pub f_tolerance: f64,
    /// Evaluation budget per dimension.
    pub max_evals_per_dim: usize,
}

impl Default for NelderMeadParams {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.05,
            f_tolerance: 1e-12,
            max_evals_per_dim: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    /// Best vertex ever evaluated (first one found among equals).
    pub x: Vec<f64>,
    pub fx: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Tracker<F> {
    f: F,
    evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

impl<F: FnMut(&[f64]) -> f64> Tracker<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.best_f {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        v
    }
}

/// Minimise `f` from `x0` with the downhill simplex method.
pub fn nelder_mead<F>(f: F, x0: &[f64], params: &NelderMeadParams) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidData("nelder_mead needs at least one dimension".into()));
    }
    let mut t = Tracker {
        f,
        evals: 0,
        best_x: x0.to_vec(),
        best_f: f64::INFINITY,
    };
    let f0 = t.eval(x0);
    if !f0.is_finite() {
        return Err(Error::InvalidData(format!("objective is {f0} at the start point")));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += params.initial_step;
        let fx = t.eval(&x);
        if !fx.is_finite() {
            return Err(Error::InvalidData(format!("objective is {fx} on the initial simplex")));
        }
        simplex.push((x, fx));
    }
    let budget = params.max_evals_per_dim * n;
    let mut converged = false;
    let lerp =
        |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(ai, bi)| ai + s * (bi - ai)).collect() };

    loop {
        // Stable sort keeps earlier vertices ahead on ties.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 < params.f_tolerance {
            converged = true;
            break;
        }
        if t.evals >= budget {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        // Reflection is c + a (c - w), i.e. a lerp from c towards w by -a.
        let xr = lerp(&centroid, &worst.0, -params.reflection);
        let fr = t.eval(&xr);
        if fr < simplex[0].1 {
            let xe = lerp(&centroid, &xr, params.expansion);
            let fe = t.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let accepted = if fr < worst.1 {
            let xc = lerp(&centroid, &xr, params.contraction);
            let fc = t.eval(&xc);
            (fc <= fr).then_some((xc, fc))
        } else {
            let xc = lerp(&centroid, &worst.0, params.contraction);
            let fc = t.eval(&xc);
            (fc < worst.1).then_some((xc, fc))
        };
        match accepted {
            Some(v) => simplex[n] = v,
            None => {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &v.0, params.shrink);
                    let fx = t.eval(&x);
                    *v = (x, fx);
                }
            }
        }
    }
    Ok(NelderMeadResult {
        x: t.best_x,
        fx: t.best_f,
        evaluations: t.evals,
        converged,
    })
}
