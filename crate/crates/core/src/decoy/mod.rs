//! Decoy-state bounds on single-photon yields and error rates.
//!
//! Each basis pair is observed at three intensities. Linear programs over the
//! photon-number yields `Y_0..Y_{n_cut}` (and error yields `z_n = e_n Y_n`)
//! bracket the single-photon quantities, and the resulting error-rate
//! intervals are folded into a lower bound on the C invariant.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::photonics::{poisson_head, poisson_tail, BasisPair, LegStatsTable};

pub mod lp;

pub use lp::{solve_lp, Constraint, LinearProgram, LpSolution, Relation, Sense};

pub const DEFAULT_N_CUT: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Intersection; if rounding makes two bracketing intervals cross, the
    /// crossing pair itself is returned, ordered.
    fn intersect(&self, other: &Interval) -> Interval {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Interval { lo, hi }
        } else {
            Interval { lo: hi, hi: lo }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub n_cut: u32,
    /// Solve the error program jointly with the yields, enforcing `z_n <= Y_n`.
    pub tight_z_bounds: bool,
    /// Also bound `1 - e₁` from the complementary error gain `Q(1 - E)` and
    /// intersect, so the interval does not depend on which detector is
    /// labeled "error".
    pub complement_bounds: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            n_cut: DEFAULT_N_CUT,
            tight_z_bounds: false,
            complement_bounds: true,
        }
    }
}

fn check_observations(observations: &[(f64, f64)], n_cut: u32) -> Result<()> {
    if observations.is_empty() {
        return Err(invalid("observations", "need at least one intensity"));
    }
    if n_cut < 2 {
        return Err(invalid("n_cut", format!("{n_cut} must be >= 2")));
    }
    for &(i, q) in observations {
        if !(i.is_finite() && i >= 0.0) {
            return Err(invalid("intensity", format!("{i} must be finite and >= 0")));
        }
        if !q.is_finite() {
            return Err(invalid("observation", format!("{q} is not finite")));
        }
    }
    Ok(())
}

/// Two rows per intensity: `Σ P(I,n) v_n <= obs` and
/// `Σ P(I,n) v_n >= obs - P(n > n_cut)`, placed at `offset` in a row of `width`.
fn poisson_rows(observations: &[(f64, f64)], n_cut: u32, offset: usize, width: usize) -> Vec<Constraint> {
    let mut rows = Vec::with_capacity(2 * observations.len());
    for &(intensity, observed) in observations {
        let head = poisson_head(intensity, n_cut);
        let tail = poisson_tail(intensity, n_cut);
        let mut coeffs = vec![0.0; width];
        coeffs[offset..offset + head.len()].copy_from_slice(&head);
        rows.push(Constraint {
            coeffs: coeffs.clone(),
            relation: Relation::Le,
            bound: observed,
        });
        rows.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            bound: observed - tail,
        });
    }
    rows
}

/// Program extremizing `Y_{target_n}` given `(intensity, gain)` observations.
pub fn build_yield_lp(
    observations: &[(f64, f64)],
    n_cut: u32,
    target_n: u32,
    sense: Sense,
) -> Result<LinearProgram> {
    check_observations(observations, n_cut)?;
    if target_n > n_cut {
        return Err(invalid("target_n", format!("{target_n} exceeds n_cut {n_cut}")));
    }
    let n = n_cut as usize + 1;
    let mut objective = vec![0.0; n];
    objective[target_n as usize] = 1.0;
    Ok(LinearProgram {
        sense,
        objective,
        constraints: poisson_rows(observations, n_cut, 0, n),
        bounds: vec![(0.0, 1.0); n],
    })
}

/// Program extremizing `z_1 = e_1 Y_1` given `(intensity, Q·E)` observations.
pub fn build_error_lp(observations: &[(f64, f64)], n_cut: u32, sense: Sense) -> Result<LinearProgram> {
    build_yield_lp(observations, n_cut, 1, sense)
}

/// Joint program over `(Y_0.., z_0..)` with `z_n <= Y_n`, extremizing `z_1`.
pub fn build_joint_error_lp(
    gains: &[(f64, f64)],
    error_gains: &[(f64, f64)],
    n_cut: u32,
    sense: Sense,
) -> Result<LinearProgram> {
    check_observations(gains, n_cut)?;
    check_observations(error_gains, n_cut)?;
    let n = n_cut as usize + 1;
    let width = 2 * n;
    let mut constraints = poisson_rows(gains, n_cut, 0, width);
    constraints.extend(poisson_rows(error_gains, n_cut, n, width));
    for k in 0..n {
        let mut coeffs = vec![0.0; width];
        coeffs[n + k] = 1.0;
        coeffs[k] = -1.0;
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Le,
            bound: 0.0,
        });
    }
    let mut objective = vec![0.0; width];
    objective[n + 1] = 1.0;
    Ok(LinearProgram {
        sense,
        objective,
        constraints,
        bounds: vec![(0.0, 1.0); width],
    })
}

fn extremes(build: impl Fn(Sense) -> Result<LinearProgram>) -> Result<Interval> {
    let lo = solve_lp(&build(Sense::Minimize)?)?.value;
    let hi = solve_lp(&build(Sense::Maximize)?)?.value;
    Ok(Interval::new(lo.max(0.0), hi.max(lo).min(1.0)))
}

pub fn yield_interval(observations: &[(f64, f64)], n_cut: u32, target_n: u32) -> Result<Interval> {
    extremes(|s| build_yield_lp(observations, n_cut, target_n, s))
}

/// `[z_min / y_max, min(1, z_max / y_min)]`, vacuous where a ratio is 0/0.
pub fn error_rate_interval(z1: Interval, y1: Interval) -> Interval {
    let lo = if y1.hi > 0.0 { (z1.lo / y1.hi).clamp(0.0, 1.0) } else { 0.0 };
    let hi = if y1.lo > 0.0 { (z1.hi / y1.lo).clamp(0.0, 1.0) } else { 1.0 };
    Interval::new(lo, hi.max(lo))
}

/// Decoy estimates for one basis pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairBounds {
    pub pair: BasisPair,
    pub y1: Interval,
    /// Bounds on `e₁Y₁`; transverse pairs only.
    pub z1: Option<Interval>,
    pub e1: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSet {
    /// One entry per basis pair, in `BasisPair::ALL` order.
    pub pairs: Vec<PairBounds>,
    /// Vacuum yield on the ZZ pair.
    pub y0: Interval,
    pub c_lower: f64,
}

impl BoundsSet {
    pub fn pair(&self, pair: BasisPair) -> &PairBounds {
        &self.pairs[pair.index()]
    }

    pub fn y1(&self, pair: BasisPair) -> Interval {
        self.pair(pair).y1
    }

    pub fn e1(&self, pair: BasisPair) -> Option<Interval> {
        self.pair(pair).e1
    }

    /// Some single-photon quantity carries no information (0/0 or a full
    /// `[0, 1]` error interval).
    pub fn is_vacuous(&self) -> bool {
        self.pairs.iter().any(|p| {
            p.y1.lo <= 0.0 || p.e1.is_some_and(|e| e.lo <= 0.0 && e.hi >= 1.0)
        })
    }
}

/// Lower bound on `Σ (1 - 2e)²` when each `e` is only known to an interval.
pub fn c_lower_bound(e1: &[Interval; 4]) -> f64 {
    e1.iter()
        .map(|e| {
            if e.contains(0.5) {
                0.0
            } else {
                (1.0 - 2.0 * e.lo).powi(2).min((1.0 - 2.0 * e.hi).powi(2))
            }
        })
        .sum()
}

pub fn estimate_bounds(table: &LegStatsTable, options: &EstimateOptions) -> Result<BoundsSet> {
    let n_cut = options.n_cut;
    let gains = |pair: BasisPair| table.series(pair).map(|(i, s)| (i, s.gain));

    let zz = gains(BasisPair::ZZ);
    let y0 = yield_interval(&zz, n_cut, 0)?;
    let mut pairs = vec![PairBounds {
        pair: BasisPair::ZZ,
        y1: yield_interval(&zz, n_cut, 1)?,
        z1: None,
        e1: None,
    }];

    let mut e1s = [Interval::UNIT; 4];
    for (k, pair) in BasisPair::TRANSVERSE.into_iter().enumerate() {
        let q = gains(pair);
        let qe = table.series(pair).map(|(i, s)| (i, s.error_gain()));
        let y1 = yield_interval(&q, n_cut, 1)?;

        let error_bounds = |obs: &[(f64, f64)]| -> Result<Interval> {
            if options.tight_z_bounds {
                extremes(|s| build_joint_error_lp(&q, obs, n_cut, s))
            } else {
                extremes(|s| build_error_lp(obs, n_cut, s))
            }
        };
        let z1 = error_bounds(&qe)?;
        let mut e1 = error_rate_interval(z1, y1);
        if options.complement_bounds {
            let qc = table.series(pair).map(|(i, s)| (i, s.gain - s.error_gain()));
            let c = error_rate_interval(error_bounds(&qc)?, y1);
            e1 = e1.intersect(&Interval::new(1.0 - c.hi, 1.0 - c.lo));
        }
        e1s[k] = e1;
        pairs.push(PairBounds {
            pair,
            y1,
            z1: Some(z1),
            e1: Some(e1),
        });
    }

    Ok(BoundsSet {
        pairs,
        y0,
        c_lower: c_lower_bound(&e1s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonics::poisson_pn;

    #[test]
    fn yield_lp_shape() {
        let obs = [(0.1, 1e-3), (0.005, 6e-5), (0.001, 1e-5)];
        let lp = build_yield_lp(&obs, 10, 1, Sense::Minimize).unwrap();
        assert_eq!(lp.num_vars(), 11);
        assert_eq!(lp.constraints.len(), 6);
        assert_eq!(lp.bound_row_count(), 22);
        assert!(build_yield_lp(&obs, 1, 1, Sense::Minimize).is_err());
        assert!(build_yield_lp(&[], 10, 1, Sense::Minimize).is_err());
    }

    #[test]
    fn truth_is_feasible_so_min_is_below_it() {
        let (y0, y1) = (2e-4, 0.03);
        let obs: Vec<(f64, f64)> = [0.1, 0.005, 0.001]
            .iter()
            .map(|&i| (i, poisson_pn(i, 0).unwrap() * y0 + poisson_pn(i, 1).unwrap() * y1))
            .collect();
        let y = yield_interval(&obs, 10, 1).unwrap();
        assert!(y.lo <= y1 + 1e-12 && y1 <= y.hi + 1e-12, "{y:?}");
    }

    #[test]
    fn noiseless_errors_give_zero_z1() {
        let obs = [(0.1, 0.0), (0.005, 0.0), (0.001, 0.0)];
        let z = extremes(|s| build_error_lp(&obs, 10, s)).unwrap();
        assert_eq!(z.hi, 0.0);
    }

    #[test]
    fn vacuum_only_observations_are_vacuous() {
        let y0 = 1.6e-7;
        let obs = [(0.0, y0), (0.0, y0), (0.0, y0)];
        let y = yield_interval(&obs, 10, 1).unwrap();
        assert_eq!((y.lo, y.hi), (0.0, 1.0));
    }

    #[test]
    fn c_lower_examples() {
        let z = Interval::new(0.0, 0.0);
        let h = Interval::new(0.5, 0.5);
        assert_eq!(c_lower_bound(&[z, h, h, z]), 2.0);
        let s = Interval::new(0.4, 0.6);
        assert_eq!(c_lower_bound(&[s; 4]), 0.0);
        let a = Interval::new(0.1, 0.2);
        let b = Interval::new(0.3, 0.45);
        assert!((c_lower_bound(&[a, b, b, a]) - 0.74).abs() < 1e-12);
    }

    #[test]
    fn error_interval_edge_cases() {
        let e = error_rate_interval(Interval::new(0.0, 0.0), Interval::new(0.0, 0.0));
        assert_eq!((e.lo, e.hi), (0.0, 1.0));
        let e = error_rate_interval(Interval::new(0.01, 0.02), Interval::new(0.1, 0.2));
        assert!((e.lo - 0.05).abs() < 1e-15 && (e.hi - 0.2).abs() < 1e-15);
    }

    #[test]
    fn intersect_orders_crossing_intervals() {
        let a = Interval::new(0.2, 0.3);
        let b = Interval::new(0.30000000001, 0.4);
        let c = a.intersect(&b);
        assert!(c.lo <= c.hi);
    }
}
