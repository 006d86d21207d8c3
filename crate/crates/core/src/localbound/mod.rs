//! Exact local bounds by enumerating deterministic strategies.
//!
//! Alice's assignments are enumerated in lexicographic order and Bob plays a
//! best response to each one, which is exact because Bob's part of the sum
//! separates over his settings. The reported value is always recomputed by
//! [`strategy_value`], so it matches [`evaluate`](crate::scenario::evaluate)
//! on [`table_of_strategy`] bit for bit.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::Party;
use crate::scenario::{BellFunctional, BellScenario, ProbabilityTable};

pub const DEFAULT_STRATEGY_CAP: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalBoundError {
    #[error("{count} deterministic strategies exceed the cap of {cap}")]
    StrategySpaceTooLarge { count: u128, cap: u128 },
}

/// One outcome per setting for each party.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicStrategy {
    pub assignment_a: Vec<usize>,
    pub assignment_b: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn fits(&self, scenario: &BellScenario) -> bool {
        let ok = |assign: &[usize], outcomes: &[usize]| {
            assign.len() == outcomes.len() && assign.iter().zip(outcomes).all(|(o, v)| o < v)
        };
        ok(&self.assignment_a, scenario.outcomes_a())
            && ok(&self.assignment_b, scenario.outcomes_b())
    }
}

impl fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(
            f,
            "A:({}) B:({})",
            join(&self.assignment_a),
            join(&self.assignment_b)
        )
    }
}

/// Value of `f` under a deterministic strategy, summed in the fixed order
/// joint terms by `(x, y)`, Alice marginals by `x`, Bob marginals by `y`,
/// then the constant.
pub fn strategy_value(f: &BellFunctional, s: &DeterministicStrategy) -> f64 {
    let mut value = 0.0;
    for (x, &a) in s.assignment_a.iter().enumerate() {
        for (y, &b) in s.assignment_b.iter().enumerate() {
            value += f.joint(x, y, a, b);
        }
    }
    for (x, &a) in s.assignment_a.iter().enumerate() {
        value += f.marginal(Party::A, x, a);
    }
    for (y, &b) in s.assignment_b.iter().enumerate() {
        value += f.marginal(Party::B, y, b);
    }
    value + f.constant()
}

/// The deterministic table `P(ab|xy) = [a = a(x)] [b = b(y)]`.
pub fn table_of_strategy(scenario: &BellScenario, s: &DeterministicStrategy) -> ProbabilityTable {
    assert!(
        s.fits(scenario),
        "strategy {s} does not fit scenario {}",
        scenario.describe()
    );
    let mut p = vec![0.0; scenario.joint_len()];
    for (x, &a) in s.assignment_a.iter().enumerate() {
        for (y, &b) in s.assignment_b.iter().enumerate() {
            p[scenario.joint_index(x, y, a, b)] = 1.0;
        }
    }
    ProbabilityTable::new(scenario.clone(), p).expect("deterministic tables are valid")
}

/// Maximum over deterministic strategies with the default cap.
pub fn local_bound(f: &BellFunctional) -> Result<(f64, DeterministicStrategy), LocalBoundError> {
    local_bound_with_cap(f, DEFAULT_STRATEGY_CAP)
}

/// Maximum over deterministic strategies; ties go to the lexicographically
/// smallest `(assignment_a, assignment_b)`.
pub fn local_bound_with_cap(
    f: &BellFunctional,
    cap: u128,
) -> Result<(f64, DeterministicStrategy), LocalBoundError> {
    let sc = f.scenario();
    let count = sc.strategy_count();
    if count > cap {
        return Err(LocalBoundError::StrategySpaceTooLarge { count, cap });
    }
    let radices = sc.outcomes_a();
    let alice_count: usize = radices.iter().product();
    let (value, index, strategy) = (0..alice_count)
        .into_par_iter()
        .map(|k| {
            let assignment_a = decode(k, radices);
            let assignment_b = best_response(f, &assignment_a);
            let s = DeterministicStrategy {
                assignment_a,
                assignment_b,
            };
            (strategy_value(f, &s), k, s)
        })
        .reduce_with(|l, r| {
            if r.0 > l.0 || (r.0 == l.0 && r.1 < l.1) {
                r
            } else {
                l
            }
        })
        .expect("at least one strategy");
    debug_assert!(index < alice_count);
    Ok((value, strategy))
}

/// Minimum over deterministic strategies, `-local_bound(-f)`.
pub fn local_bound_min(f: &BellFunctional) -> Result<f64, LocalBoundError> {
    local_bound_min_with_cap(f, DEFAULT_STRATEGY_CAP)
}

pub fn local_bound_min_with_cap(f: &BellFunctional, cap: u128) -> Result<f64, LocalBoundError> {
    Ok(-local_bound_with_cap(&f.negated(), cap)?.0)
}

/// Mixed-radix digits of `k`, most significant first.
fn decode(mut k: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d = k % r;
        k /= r;
    }
    digits
}

/// Bob's best outcome per setting given Alice's assignment; lowest outcome
/// wins ties.
fn best_response(f: &BellFunctional, assignment_a: &[usize]) -> Vec<usize> {
    let sc = f.scenario();
    sc.outcomes_b()
        .iter()
        .enumerate()
        .map(|(y, &vb)| {
            let mut best = (f64::NEG_INFINITY, 0);
            for b in 0..vb {
                let mut score = f.marginal(Party::B, y, b);
                for (x, &a) in assignment_a.iter().enumerate() {
                    score += f.joint(x, y, a, b);
                }
                if score > best.0 {
                    best = (score, b);
                }
            }
            best.1
        })
        .collect()
}
