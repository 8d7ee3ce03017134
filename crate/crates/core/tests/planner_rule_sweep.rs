//! Reconstructs the fleet-sizing rule from the reference table by brute force
//! and checks the shipped planner against the only rule that fits every row.

use std::f64::consts::PI;

use swarmsling::config_planner::{plan, PlannerRequest};
use swarmsling::Vec3;

const W_PAYLOAD: f64 = 14.715;
const W_QUAD: f64 = 7.4066;
const R_CIRC: f64 = 0.4;

const ROWS: [(f64, f64, usize); 11] = [
    (10.0, 0.1, 7),
    (10.0, 0.12, 6),
    (14.0, 0.18, 4),
    (20.0, 0.2, 2),
    (20.0, 0.5, 0),
    (25.0, 0.5, 1),
    (7.5, 0.15, 0),
    (12.0, 0.15, 5),
    (14.0, 0.15, 4),
    (16.0, 0.15, 2),
    (25.0, 0.15, 1),
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rounding {
    Ceil,
    Round,
    Floor,
}

impl Rounding {
    fn apply(self, x: f64) -> usize {
        let r = match self {
            Rounding::Ceil => x.ceil(),
            Rounding::Round => x.round(),
            Rounding::Floor => x.floor(),
        };
        r.max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rule {
    first: Rounding,
    second: Rounding,
    /// Apply the safety factor to the rounded count rather than the raw ratio.
    from_rounded: bool,
    safety: f64,
}

fn side(n: usize) -> f64 {
    match n {
        1 => f64::INFINITY,
        2 => 2.0 * R_CIRC,
        _ => 2.0 * R_CIRC * (PI / n as f64).sin(),
    }
}

fn fleet(rule: Rule, thrust: f64, prop: f64) -> usize {
    let raw = W_PAYLOAD / (thrust - W_QUAD);
    if raw.is_nan() || raw <= 0.0 {
        return 0;
    }
    let n_min = rule.first.apply(raw);
    let base = if rule.from_rounded { n_min as f64 } else { raw };
    let n_fs = rule.second.apply(base * rule.safety).max(n_min);
    let fits = |n: usize| side(n) >= 3.0 * prop;
    if fits(n_fs) {
        n_fs
    } else if fits(n_min) {
        n_min
    } else {
        0
    }
}

#[test]
fn only_one_rule_reproduces_the_table() {
    use Rounding::*;
    let mut matching = Vec::new();
    for first in [Ceil, Round, Floor] {
        for second in [Ceil, Round, Floor] {
            for from_rounded in [true, false] {
                for safety in [1.1, 1.2, 1.3, 1.4, 1.5] {
                    let rule = Rule { first, second, from_rounded, safety };
                    if ROWS.iter().all(|&(t, r, n)| fleet(rule, t, r) == n) {
                        matching.push(rule);
                    }
                }
            }
        }
    }
    assert_eq!(matching, [Rule { first: Ceil, second: Round, from_rounded: true, safety: 1.2 }]);
}

#[test]
fn planner_agrees_with_reconstructed_rule() {
    let rule = Rule { first: Rounding::Ceil, second: Rounding::Round, from_rounded: true, safety: 1.2 };
    let dims = Vec3::new(1.0, 0.8, 0.2);
    for thrust in (75..=400).map(|t| t as f64 * 0.1) {
        for prop in (1..=60).map(|r| r as f64 * 0.01) {
            let p = plan(&PlannerRequest::new(W_PAYLOAD, W_QUAD, thrust, prop, dims)).unwrap();
            assert_eq!(p.n, fleet(rule, thrust, prop), "thrust {thrust}, radius {prop}");
        }
    }
}
