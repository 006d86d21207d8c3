use rayon::prelude::*;

use super::{best_signs, CorrelationFunctional, GrothendieckError, MAX_SIGN_SETTINGS};
use crate::seesaw::{gaussian, restart_rng, SeesawConfig};

/// Unit vectors in `R^N`, one per setting on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStrategy {
    pub x_vectors: Vec<Vec<f64>>,
    pub y_vectors: Vec<Vec<f64>>,
}

impl VectorStrategy {
    pub fn dim(&self) -> usize {
        self.x_vectors.first().map_or(0, Vec::len)
    }

    /// `Σ_ij M_ij x_i · y_j`.
    pub fn value(&self, f: &CorrelationFunctional) -> f64 {
        let mut total = 0.0;
        for (i, x) in self.x_vectors.iter().enumerate() {
            for (j, y) in self.y_vectors.iter().enumerate() {
                total += f.get(i, j) * dot(x, y);
            }
        }
        total
    }

    /// Zero-pads every vector to dimension `n`.
    pub fn embed(&self, n: usize) -> VectorStrategy {
        let pad = |vs: &[Vec<f64>]| {
            vs.iter()
                .map(|v| {
                    let mut w = v.clone();
                    w.resize(n.max(v.len()), 0.0);
                    w
                })
                .collect()
        };
        VectorStrategy {
            x_vectors: pad(&self.x_vectors),
            y_vectors: pad(&self.y_vectors),
        }
    }

    /// Largest deviation of a vector norm from 1.
    pub fn norm_error(&self) -> f64 {
        self.x_vectors
            .iter()
            .chain(&self.y_vectors)
            .map(|v| (dot(v, v).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSeesawResult {
    pub value: f64,
    pub strategy: VectorStrategy,
    pub best_restart: usize,
    pub per_restart_values: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Alternating best responses over unit vectors in `R^n`.
///
/// Restarts `0..cfg.restarts` start from normalized Gaussian vectors drawn
/// as in the quantum see-saw. For `m <= 26` one more restart starts from an
/// optimal classical sign assignment, so the value is never below the
/// local norm. `seeds` are padded to dimension `n` and run last.
pub fn vector_seesaw(
    f: &CorrelationFunctional,
    n: usize,
    cfg: &SeesawConfig,
    seeds: &[VectorStrategy],
) -> Result<VectorSeesawResult, GrothendieckError> {
    validate(f, n, cfg, seeds)?;
    let m = f.m();
    let mut starts: Vec<VectorStrategy> = (0..cfg.restarts)
        .map(|r| {
            let mut rng = restart_rng(cfg.seed, r);
            let mut draw = || -> Vec<Vec<f64>> {
                (0..m)
                    .map(|_| {
                        let v: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
                        unit_or_axis(&v)
                    })
                    .collect()
            };
            let x_vectors = draw();
            let y_vectors = draw();
            VectorStrategy {
                x_vectors,
                y_vectors,
            }
        })
        .collect();
    if m <= MAX_SIGN_SETTINGS {
        let (xs, ys) = best_signs(f);
        let axis = |s: f64| {
            let mut v = vec![0.0; n];
            v[0] = s;
            v
        };
        starts.push(VectorStrategy {
            x_vectors: xs.into_iter().map(axis).collect(),
            y_vectors: ys.into_iter().map(axis).collect(),
        });
    }
    starts.extend(seeds.iter().map(|s| s.embed(n)));

    let runs: Vec<(f64, VectorStrategy)> = starts
        .into_par_iter()
        .map(|s| alternate(f, s, cfg))
        .collect();
    let mut best = 0;
    for (k, (v, _)) in runs.iter().enumerate() {
        if *v > runs[best].0 {
            best = k;
        }
    }
    let per_restart_values = runs.iter().map(|(v, _)| *v).collect();
    let (value, strategy) = runs.into_iter().nth(best).expect("at least one restart");
    Ok(VectorSeesawResult {
        value,
        strategy,
        best_restart: best,
        per_restart_values,
    })
}

fn validate(
    f: &CorrelationFunctional,
    n: usize,
    cfg: &SeesawConfig,
    seeds: &[VectorStrategy],
) -> Result<(), GrothendieckError> {
    let fail = |msg: String| Err(GrothendieckError::ConfigInvalid(msg));
    if n == 0 {
        return fail("vector dimension must be at least 1".into());
    }
    if cfg.restarts == 0 || cfg.max_iterations == 0 {
        return fail("restarts and max_iterations must be at least 1".into());
    }
    if !(cfg.convergence_tol > 0.0 && cfg.convergence_tol.is_finite()) {
        return fail(format!(
            "convergence_tol must be positive, got {}",
            cfg.convergence_tol
        ));
    }
    if cfg.fixed_state.is_some() {
        return fail("fixed_state does not apply to vector strategies".into());
    }
    for (k, s) in seeds.iter().enumerate() {
        let shape_ok = s.x_vectors.len() == f.m()
            && s.y_vectors.len() == f.m()
            && s.x_vectors.iter().chain(&s.y_vectors).all(|v| v.len() <= n);
        if !shape_ok || s.norm_error() > 1e-10 {
            return fail(format!(
                "seed strategy {k} does not fit m = {} and N = {n}",
                f.m()
            ));
        }
    }
    Ok(())
}

fn unit_or_axis(v: &[f64]) -> Vec<f64> {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter().map(|c| c / norm).collect()
    } else {
        let mut e = vec![0.0; v.len()];
        e[0] = 1.0;
        e
    }
}

/// `target_i = normalize(Σ_j w(i, j) source_j)`, keeping `target_i` when the
/// sum vanishes.
fn best_response(target: &mut [Vec<f64>], source: &[Vec<f64>], w: impl Fn(usize, usize) -> f64) {
    let n = source.first().map_or(0, Vec::len);
    for (i, t) in target.iter_mut().enumerate() {
        let mut sum = vec![0.0; n];
        for (j, s) in source.iter().enumerate() {
            let c = w(i, j);
            for (acc, v) in sum.iter_mut().zip(s) {
                *acc += c * v;
            }
        }
        let norm = dot(&sum, &sum).sqrt();
        if norm > 0.0 {
            *t = sum.iter().map(|c| c / norm).collect();
        }
    }
}

fn alternate(
    f: &CorrelationFunctional,
    mut s: VectorStrategy,
    cfg: &SeesawConfig,
) -> (f64, VectorStrategy) {
    let mut value = s.value(f);
    for _ in 0..cfg.max_iterations {
        let before = value;
        let mut next = s.clone();
        best_response(&mut next.x_vectors, &next.y_vectors.clone(), |i, j| {
            f.get(i, j)
        });
        best_response(&mut next.y_vectors, &next.x_vectors.clone(), |j, i| {
            f.get(i, j)
        });
        let after = next.value(f);
        if after < before {
            break;
        }
        s = next;
        value = after;
        if value - before < cfg.convergence_tol {
            break;
        }
    }
    (value, s)
}
