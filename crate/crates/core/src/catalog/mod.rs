//! Named functionals and states, the dimension-witness report and the
//! `I_φ` curve sweep.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::linalg::{Complex64, Party};
use crate::localbound::{local_bound, LocalBoundError};
use crate::scenario::{BellFunctional, BellScenario, BoundRecord};
use crate::seesaw::{
    deterministic_model, seesaw_with_seeds, SeesawConfig, SeesawError, SeesawResult,
};

pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}` (expected cglmp-c, cglmp-d, iphi:<phi>, E or chsh)")]
    UnknownName(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    LocalBound(#[from] LocalBoundError),
    #[error(transparent)]
    Seesaw(#[from] SeesawError),
}

fn qutrit_pair() -> BellScenario {
    BellScenario::uniform(2, 3).expect("valid scenario")
}

/// `P(b_0 ≥ a_0) + P(a_0 ≥ b_1) + P(a_1 ≥ b_0) + P(b_1 > a_1) - 3`.
pub fn cglmp_c() -> BellFunctional {
    let mut f = BellFunctional::zero(qutrit_pair());
    type Block = (usize, usize, fn(usize, usize) -> bool);
    let blocks: [Block; 4] = [
        (0, 0, |a, b| b >= a),
        (0, 1, |a, b| a >= b),
        (1, 0, |a, b| a >= b),
        (1, 1, |a, b| b > a),
    ];
    for (x, y, keep) in blocks {
        for a in 0..3 {
            for b in 0..3 {
                if keep(a, b) {
                    f.add_joint(x, y, a, b, 1.0);
                }
            }
        }
    }
    f.set_constant(-3.0);
    f
}

/// `-Σ_{x,y} Σ_k P(a = k, b = k - 1 - (x-1)(y-1) mod 3 | xy)`.
pub fn cglmp_d() -> BellFunctional {
    let mut f = BellFunctional::zero(qutrit_pair());
    for x in 0..2i64 {
        for y in 0..2i64 {
            for k in 0..3i64 {
                let b = (k - 1 - (x - 1) * (y - 1)).rem_euclid(3);
                f.add_joint(x as usize, y as usize, k as usize, b as usize, -1.0);
            }
        }
    }
    f
}

/// `cos φ · C + sin φ · D`, coefficient by coefficient.
pub fn i_phi(phi: f64) -> BellFunctional {
    let (s, c) = phi.sin_cos();
    cglmp_c()
        .scaled(c)
        .try_add(&cglmp_d().scaled(s))
        .expect("same scenario")
}

/// Alice has settings with 2 and 3 outcomes, Bob three binary settings:
/// `PA(0|0) - Σ_y P(00|0y) + P(00|10) + P(10|11) + P(20|12) - 1`.
pub fn expression_e() -> BellFunctional {
    let sc = BellScenario::new(vec![2, 3], vec![2, 2, 2]).expect("valid scenario");
    let mut f = BellFunctional::zero(sc);
    f.add_marginal(Party::A, 0, 0, 1.0);
    for y in 0..3 {
        f.add_joint(0, y, 0, 0, -1.0);
    }
    f.add_joint(1, 0, 0, 0, 1.0);
    f.add_joint(1, 1, 1, 0, 1.0);
    f.add_joint(1, 2, 2, 0, 1.0);
    f.set_constant(-1.0);
    f
}

/// `c_00 + c_01 + c_10 - c_11` with `c_xy = P(a=b|xy) - P(a≠b|xy)`.
pub fn chsh() -> BellFunctional {
    let mut f = BellFunctional::zero(BellScenario::uniform(2, 2).expect("valid scenario"));
    for x in 0..2 {
        for y in 0..2 {
            let sign = if x == 1 && y == 1 { -1.0 } else { 1.0 };
            for a in 0..2 {
                for b in 0..2 {
                    f.add_joint(x, y, a, b, if a == b { sign } else { -sign });
                }
            }
        }
    }
    f
}

/// `(|00> + γ|11> + |22>) / sqrt(2 + γ²)` on `C^3 ⊗ C^3`.
pub fn gamma_state(gamma: f64) -> Vec<Complex64> {
    let norm = (2.0 + gamma * gamma).sqrt();
    let mut v = vec![Complex64::new(0.0, 0.0); 9];
    v[0] = Complex64::new(1.0 / norm, 0.0);
    v[4] = Complex64::new(gamma / norm, 0.0);
    v[8] = Complex64::new(1.0 / norm, 0.0);
    v
}

/// `cos θ |00> + sin θ |11>` on `C^2 ⊗ C^2`.
pub fn theta_state(theta: f64) -> Vec<Complex64> {
    let (s, c) = theta.sin_cos();
    let mut v = vec![Complex64::new(0.0, 0.0); 4];
    v[0] = Complex64::new(c, 0.0);
    v[3] = Complex64::new(s, 0.0);
    v
}

/// Optimal qubit value of [`expression_e`] with the state fixed to
/// [`theta_state`]: `(sqrt(1 + sin²2θ) - 1) / 2`.
pub fn expression_e_theta_value(theta: f64) -> f64 {
    let s = (2.0 * theta).sin();
    ((1.0 + s * s).sqrt() - 1.0) / 2.0
}

/// Looks up `cglmp-c`, `cglmp-d`, `iphi:<phi>`, `E` or `chsh`.
pub fn by_name(name: &str) -> Result<BellFunctional, CatalogError> {
    match name {
        "cglmp-c" => Ok(cglmp_c()),
        "cglmp-d" => Ok(cglmp_d()),
        "E" => Ok(expression_e()),
        "chsh" => Ok(chsh()),
        _ => match name.strip_prefix("iphi:") {
            Some(arg) => arg
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|p| p.is_finite())
                .map(i_phi)
                .ok_or_else(|| CatalogError::InvalidArgument(format!("bad angle `{arg}`"))),
            None => Err(CatalogError::UnknownName(name.to_string())),
        },
    }
}

/// Names accepted by [`by_name`], with a sample angle for `iphi`.
pub const NAMES: [&str; 5] = ["cglmp-c", "cglmp-d", "iphi:0.785398163397", "E", "chsh"];

/// Local bound plus the reference upper bounds known for a catalog entry.
pub fn reference_bounds(name: &str) -> Result<BoundRecord, CatalogError> {
    let f = by_name(name)?;
    let mut record = BoundRecord::new(local_bound(&f)?.0);
    match name {
        "E" => record.certify(
            2,
            (2f64.sqrt() - 1.0) / 2.0,
            "qubit optimum 1/sqrt(2) - 1/2 (quoted reference value)",
        ),
        "chsh" => {
            for d in 2..=4 {
                record.certify(d, 2.0 * 2f64.sqrt(), "Tsirelson bound");
            }
        }
        _ if name
            .strip_prefix("iphi:")
            .and_then(|a| a.trim().parse::<f64>().ok())
            .is_some_and(|phi| (phi - PI / 4.0).abs() < 1e-9) =>
        {
            record.certify(
                2,
                0.0,
                "qubits do not violate I at phi = pi/4 (quoted reference value)",
            )
        }
        _ => {}
    }
    Ok(record)
}

/// Best-found values at `(d, d)` and `(d+1, d+1)` compared against the
/// local bound.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub functional_id: String,
    pub dimension: usize,
    pub local_bound: f64,
    /// Heuristic best-found value at dimension `d`, not a certified maximum.
    pub value_d: f64,
    /// Heuristic best-found value at dimension `d + 1`.
    pub value_d_plus: f64,
    pub gap: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Witnessed,
    NotWitnessed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Witnessed => "Witnessed",
            Verdict::NotWitnessed => "NotWitnessed",
        })
    }
}

/// Runs the see-saw at `d` (seeded with an optimal deterministic strategy)
/// and at `d + 1` (seeded with the embedded best `d` model), so that
/// `value_d_plus >= value_d >= local_bound` up to rounding.
pub fn witness_report(
    functional_id: &str,
    f: &BellFunctional,
    d: usize,
    cfg: &SeesawConfig,
    gap_threshold: f64,
) -> Result<WitnessReport, CatalogError> {
    if d < 2 {
        return Err(CatalogError::InvalidArgument(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    if !(gap_threshold.is_finite() && gap_threshold >= 0.0) {
        return Err(CatalogError::InvalidArgument(format!(
            "bad threshold {gap_threshold}"
        )));
    }
    let (local, strategy) = local_bound(f)?;
    let (low, high) = dimension_pair(f, d, cfg, &strategy)?;
    let gap = high.best_value - low.best_value;
    Ok(WitnessReport {
        functional_id: functional_id.to_string(),
        dimension: d,
        local_bound: local,
        value_d: low.best_value,
        value_d_plus: high.best_value,
        gap,
        threshold: gap_threshold,
        verdict: if gap > gap_threshold {
            Verdict::Witnessed
        } else {
            Verdict::NotWitnessed
        },
    })
}

fn dimension_pair(
    f: &BellFunctional,
    d: usize,
    cfg: &SeesawConfig,
    strategy: &crate::localbound::DeterministicStrategy,
) -> Result<(SeesawResult, SeesawResult), CatalogError> {
    let classical = deterministic_model(f.scenario(), strategy, d, d);
    let low = seesaw_with_seeds(f, d, d, cfg, &[classical])?;
    let embedded = low
        .best_model
        .embed(d + 1, d + 1)
        .map_err(|e| CatalogError::InvalidArgument(e.to_string()))?;
    let high = seesaw_with_seeds(f, d + 1, d + 1, cfg, &[embedded])?;
    Ok((low, high))
}

/// One grid point of the `I_φ` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub phi: f64,
    pub local_bound: f64,
    pub value_d2: f64,
    pub value_d3: f64,
}

/// `points` equally spaced angles over `[0, π]`, both ends included.
pub fn phi_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| PI * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Local bound and best-found qubit and qutrit values of `I_φ` on a grid.
///
/// The qubit search is seeded with an optimal deterministic strategy and the
/// qutrit search with the embedded best qubit model, so every row satisfies
/// `value_d3 >= value_d2 >= local_bound` up to rounding.
pub fn iphi_curve(points: usize, cfg: &SeesawConfig) -> Result<Vec<CurveRow>, CatalogError> {
    if points < 2 {
        return Err(CatalogError::InvalidArgument(format!(
            "need at least 2 grid points, got {points}"
        )));
    }
    phi_grid(points)
        .into_iter()
        .map(|phi| {
            let f = i_phi(phi);
            let (local, strategy) = local_bound(&f)?;
            let (d2, d3) = dimension_pair(&f, 2, cfg, &strategy)?;
            Ok(CurveRow {
                phi,
                local_bound: local,
                value_d2: d2.best_value,
                value_d3: d3.best_value,
            })
        })
        .collect()
}
