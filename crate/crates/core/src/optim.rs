//! Box-constrained local minimization for piecewise-smooth objectives.
//!
//! Projected gradient descent with finite-difference gradients,
//! Barzilai–Borwein step lengths and an Armijo backtracking search along
//! the projection arc, followed by a compass search. Random restarts are
//! drawn from a seeded generator, so runs are reproducible.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::weather::channel_rng;
use crate::{Error, Result};

/// Objective with cheap single-coordinate changes.
pub trait BoxObjective {
    fn dim(&self) -> usize;

    /// Value at `x`.
    fn value(&mut self, x: &[f64]) -> f64;

    /// `f(x with x[i] = v) − f(x)`.
    fn delta(&mut self, x: &[f64], i: usize, v: f64) -> f64 {
        let f0 = self.value(x);
        let mut y = x.to_vec();
        y[i] = v;
        self.value(&y) - f0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Stop after two consecutive iterations improving by less than this
    /// fraction of `max(|f|, 1)`.
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Finite-difference step as a fraction of each variable's range.
    pub fd_step: f64,
    /// Compass-search step limits as fractions of each variable's range.
    pub polish_initial: f64,
    pub polish_min: f64,
    pub polish_max_sweeps: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iter: 400,
            rel_tol: 1e-4,
            restarts: 2,
            seed: 0,
            fd_step: 1e-6,
            polish_initial: 0.05,
            polish_min: 1e-3,
            polish_max_sweeps: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Scaled<'a, O: BoxObjective> {
    obj: &'a mut O,
    lo: &'a [f64],
    span: Vec<f64>,
    free: Vec<usize>,
    evals: usize,
}

impl<O: BoxObjective> Scaled<'_, O> {
    fn to_x(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.lo).zip(&self.span).map(|((z, lo), s)| lo + z * s).collect()
    }

    fn value(&mut self, z: &[f64]) -> Result<f64> {
        self.evals += 1;
        let x = self.to_x(z);
        let f = self.obj.value(&x);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::Solver("objective is not finite".into()))
        }
    }

    fn delta(&mut self, z: &[f64], i: usize, zi: f64) -> Result<f64> {
        self.evals += 1;
        let x = self.to_x(z);
        let d = self.obj.delta(&x, i, self.lo[i] + zi * self.span[i]);
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Solver("objective is not finite".into()))
        }
    }

    fn gradient(&mut self, z: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut g = vec![0.0; z.len()];
        for idx in 0..self.free.len() {
            let i = self.free[idx];
            g[i] = if z[i] + h <= 1.0 {
                self.delta(z, i, z[i] + h)? / h
            } else {
                -self.delta(z, i, z[i] - h)? / h
            };
        }
        Ok(g)
    }

    fn project(z: f64) -> f64 {
        z.clamp(0.0, 1.0)
    }

    fn local(&mut self, mut z: Vec<f64>, opts: &MinimizeOptions) -> Result<(Vec<f64>, f64, usize)> {
        let mut f = self.value(&z)?;
        let mut g = self.gradient(&z, opts.fd_step)?;
        let gmax = self.free.iter().map(|&i| g[i].abs()).fold(0.0, f64::max);
        let mut alpha = if gmax > 0.0 { 0.1 / gmax } else { 1.0 };
        let mut stall = 0;
        let mut iterations = 0;
        while iterations < opts.max_iter {
            iterations += 1;
            let mut t = alpha;
            let mut accepted = None;
            for _ in 0..30 {
                let mut zn = z.clone();
                let mut decrease = 0.0;
                let mut moved = 0.0f64;
                for &i in &self.free {
                    zn[i] = Self::project(z[i] - t * g[i]);
                    decrease += g[i] * (z[i] - zn[i]);
                    moved = moved.max((zn[i] - z[i]).abs());
                }
                if moved < 1e-12 {
                    break;
                }
                let fn_ = self.value(&zn)?;
                if fn_ <= f - 1e-4 * decrease {
                    accepted = Some((zn, fn_));
                    break;
                }
                t *= 0.5;
            }
            let Some((zn, fn_)) = accepted else { break };
            let gn = self.gradient(&zn, opts.fd_step)?;
            let (mut ss, mut sy) = (0.0, 0.0);
            for &i in &self.free {
                let s = zn[i] - z[i];
                ss += s * s;
                sy += s * (gn[i] - g[i]);
            }
            alpha = if sy > 1e-16 { (ss / sy).clamp(1e-6, 10.0) } else { (2.0 * t).min(10.0) };
            let improvement = f - fn_;
            z = zn;
            f = fn_;
            g = gn;
            if improvement <= opts.rel_tol * f.abs().max(1.0) {
                stall += 1;
                if stall >= 2 {
                    break;
                }
            } else {
                stall = 0;
            }
        }
        let f = self.polish(&mut z, f, opts)?;
        Ok((z, f, iterations))
    }

    fn polish(&mut self, z: &mut [f64], mut f: f64, opts: &MinimizeOptions) -> Result<f64> {
        let mut step = opts.polish_initial;
        let mut sweeps = 0;
        while step >= opts.polish_min && sweeps < opts.polish_max_sweeps {
            sweeps += 1;
            let mut improved = false;
            for idx in 0..self.free.len() {
                let i = self.free[idx];
                for dir in [1.0, -1.0] {
                    let v = Self::project(z[i] + dir * step);
                    if v == z[i] {
                        continue;
                    }
                    let d = self.delta(z, i, v)?;
                    if d < -1e-12 * f.abs().max(1.0) {
                        z[i] = v;
                        f += d;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        // Re-evaluate to drop accumulated rounding in `f`.
        self.value(z)
    }
}

/// Minimizes `obj` over the box `[lo, hi]` starting from `x0`, then from
/// `opts.restarts` random points, and returns the best point found. The
/// result is never worse than `x0` projected into the box. Variables with
/// `lo == hi` are held fixed.
pub fn minimize_box<O: BoxObjective>(obj: &mut O, x0: &[f64], lo: &[f64], hi: &[f64], opts: &MinimizeOptions) -> Result<MinimizeResult> {
    let n = obj.dim();
    if x0.len() != n || lo.len() != n || hi.len() != n {
        return Err(Error::Dimension(format!("optimizer expects {n} variables")));
    }
    if lo.iter().zip(hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
        return Err(Error::Config("box bounds must be finite with lo <= hi".into()));
    }
    let span: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
    let free: Vec<usize> = (0..n).filter(|&i| span[i] > 0.0).collect();
    let mut s = Scaled {
        obj,
        lo,
        span,
        free,
        evals: 0,
    };
    let z0: Vec<f64> = (0..n)
        .map(|i| if s.span[i] > 0.0 { ((x0[i] - lo[i]) / s.span[i]).clamp(0.0, 1.0) } else { 0.0 })
        .collect();
    let f0 = s.value(&z0)?;
    let mut best = (z0.clone(), f0);
    let mut iterations = 0;
    if !s.free.is_empty() {
        let mut rng = channel_rng(opts.seed, 0x0b7);
        for start in 0..=opts.restarts {
            let z = if start == 0 {
                z0.clone()
            } else {
                let mut z = z0.clone();
                for &i in &s.free {
                    z[i] = rng.gen_range(0.0..=1.0);
                }
                z
            };
            let (z, f, it) = s.local(z, opts)?;
            iterations += it;
            if f < best.1 {
                best = (z, f);
            }
        }
    }
    Ok(MinimizeResult {
        x: s.to_x(&best.0),
        f: best.1,
        iterations,
        evaluations: s.evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        target: Vec<f64>,
    }

    impl BoxObjective for Quadratic {
        fn dim(&self) -> usize {
            self.target.len()
        }
        fn value(&mut self, x: &[f64]) -> f64 {
            x.iter().zip(&self.target).map(|(a, b)| (a - b) * (a - b) * 3.0).sum()
        }
    }

    struct Kinked;

    impl BoxObjective for Kinked {
        fn dim(&self) -> usize {
            2
        }
        fn value(&mut self, x: &[f64]) -> f64 {
            (x[0] - 0.3).abs() + 2.0 * (x[1] + 0.2).abs() + 0.5 * (x[0] - x[1]).abs()
        }
    }

    #[test]
    fn quadratic_with_active_bounds() {
        let mut q = Quadratic {
            target: vec![0.4, -2.0, 3.0],
        };
        let r = minimize_box(&mut q, &[0.0; 3], &[-1.0; 3], &[1.0; 3], &MinimizeOptions::default()).unwrap();
        assert!((r.x[0] - 0.4).abs() < 1e-3);
        assert!((r.x[1] + 1.0).abs() < 1e-9);
        assert!((r.x[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_variables_stay_put() {
        let mut q = Quadratic {
            target: vec![0.4, 0.9],
        };
        let r = minimize_box(&mut q, &[0.0, 0.25], &[-1.0, 0.25], &[1.0, 0.25], &MinimizeOptions::default()).unwrap();
        assert_eq!(r.x[1], 0.25);
        assert!((r.x[0] - 0.4).abs() < 1e-3);
    }

    #[test]
    fn kinked_objective_reaches_minimum() {
        let r = minimize_box(&mut Kinked, &[0.9, 0.9], &[-1.0, -1.0], &[1.0, 1.0], &MinimizeOptions::default()).unwrap();
        let best = Kinked.value(&[-0.2, -0.2]).min(Kinked.value(&[0.3, -0.2]));
        assert!(r.f <= best + 5e-3, "f = {}, best = {best}", r.f);
    }

    #[test]
    fn never_worse_than_start_and_deterministic() {
        let mut q = Quadratic { target: vec![0.1, 0.2] };
        let opts = MinimizeOptions {
            max_iter: 1,
            ..MinimizeOptions::default()
        };
        let a = minimize_box(&mut q, &[0.1, 0.2], &[0.0; 2], &[1.0; 2], &opts).unwrap();
        assert_eq!(a.f, 0.0);
        let b = minimize_box(&mut q, &[0.9, 0.9], &[0.0; 2], &[1.0; 2], &opts).unwrap();
        let c = minimize_box(&mut q, &[0.9, 0.9], &[0.0; 2], &[1.0; 2], &opts).unwrap();
        assert_eq!(b, c);
        assert!(minimize_box(&mut q, &[0.0], &[0.0; 2], &[1.0; 2], &opts).is_err());
    }
}
