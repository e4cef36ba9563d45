//! Slow, independent reference computations.
//!
//! Nothing here is on the production path. These routines recompute model
//! quantities by brute force (truncated photon-number sums, explicit vertex
//! enumeration) so that the closed forms and the simplex can be checked
//! against them, both in tests and by the CLI `selftest` command.

use std::f64::consts::TAU;

use crate::decoy::{Constraint, LinearProgram, Relation, Sense};
use crate::security::BellDiagonalAttack;
use crate::photonics::{amplitude_sq, detector_yield, leg_transmission, BasisPair, ChannelSpec, Leg};

/// Poisson weights `P(mean, 0..=n_max)` by forward recurrence.
pub fn poisson_weights(mean: f64, n_max: u32) -> Vec<f64> {
    let mut w = Vec::with_capacity(n_max as usize + 1);
    let mut p = (-mean).exp();
    w.push(p);
    for k in 1..=n_max {
        p *= mean / f64::from(k);
        w.push(p);
    }
    w
}

/// Detector gain as `Σ_k P(I·η, k) · Y_{k,x}`, truncated at `n_max`.
pub fn gain_by_photon_sum(intensity: f64, eta_chan: f64, eta_d: f64, pd: f64, fy_sq: f64, n_max: u32) -> f64 {
    poisson_weights(intensity * eta_chan, n_max)
        .iter()
        .enumerate()
        .map(|(k, p)| p * detector_yield(k as u32, fy_sq, eta_d, pd))
        .sum()
}

fn detector_weights(spec: &ChannelSpec, pair: BasisPair) -> (f64, f64) {
    let prep = pair.representative_prep();
    let (x, y) = pair.meas().outcomes();
    (amplitude_sq(prep, x, spec.beta_rad), amplitude_sq(prep, y, spec.beta_rad))
}

/// `(Q, E)` of a Bob→Alice pair from truncated photon-number sums.
pub fn pair_stats_by_photon_sum(spec: &ChannelSpec, intensity: f64, pair: BasisPair, n_max: u32) -> (f64, f64) {
    let eta = leg_transmission(spec, Leg::BobAlice);
    let (fx, fy) = detector_weights(spec, pair);
    let qx = gain_by_photon_sum(intensity, eta, spec.eta_d, spec.pd, fy, n_max);
    let qy = gain_by_photon_sum(intensity, eta, spec.eta_d, spec.pd, fx, n_max);
    let q = qx + qy;
    (q, (spec.ed_a * qx + (1.0 - spec.ed_a) * qy) / q)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Yield and error yield `(Y_n, e_n Y_n)` of a source emitting exactly `n`
/// photons: each photon survives the channel independently, then the
/// `k` arrivals hit the detectors.
pub fn source_yield(spec: &ChannelSpec, pair: BasisPair, n: u32) -> (f64, f64) {
    let eta = leg_transmission(spec, Leg::BobAlice);
    let (fx, fy) = detector_weights(spec, pair);
    let mut y = 0.0;
    let mut z = 0.0;
    for k in 0..=n {
        let w = binomial(n, k) * eta.powi(k as i32) * (1.0 - eta).powi((n - k) as i32);
        let yx = detector_yield(k, fy, spec.eta_d, spec.pd);
        let yy = detector_yield(k, fx, spec.eta_d, spec.pd);
        y += w * (yx + yy);
        z += w * (spec.ed_a * yx + (1.0 - spec.ed_a) * yy);
    }
    (y, z)
}

/// True single-photon yield and error rate of a pair.
pub fn single_photon_truth(spec: &ChannelSpec, pair: BasisPair) -> (f64, f64) {
    let (y, z) = source_yield(spec, pair, 1);
    (y, z / y)
}

/// C computed from the true single-photon error rates.
pub fn true_c(spec: &ChannelSpec) -> f64 {
    BasisPair::TRANSVERSE
        .iter()
        .map(|&p| (1.0 - 2.0 * single_photon_truth(spec, p).1).powi(2))
        .sum()
}

/// Small dense Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Optimum of a boxed LP by enumerating every vertex: choose `k` tight rows
/// and `k` free variables, put the rest at a bound, solve, keep feasible ones.
///
/// Rows are scaled to unit ∞-norm; `tol` is the admitted row violation.
/// Exponential in size; meant for a handful of variables and rows.
pub fn vertex_enumeration(lp: &LinearProgram, tol: f64) -> Option<(f64, Vec<f64>)> {
    let n = lp.num_vars();
    let rows: Vec<(Vec<f64>, f64)> = lp
        .constraints
        .iter()
        .filter_map(|c| {
            let norm = c.coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            (norm > 0.0).then(|| {
                let s = match c.relation {
                    Relation::Le => 1.0 / norm,
                    Relation::Ge => -1.0 / norm,
                };
                (c.coeffs.iter().map(|a| a * s).collect(), c.bound * s)
            })
        })
        .collect();
    let m = rows.len();
    let feasible = |x: &[f64]| {
        rows.iter().all(|(a, b)| a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() <= b + tol)
            && lp.bounds.iter().zip(x).all(|(&(lo, hi), &x)| x >= lo - tol && x <= hi + tol)
    };
    let better = |v: f64, best: f64| match lp.sense {
        Sense::Minimize => v < best,
        Sense::Maximize => v > best,
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..=m.min(n) {
        let row_sets = combinations(m, k);
        for free in combinations(n, k) {
            let fixed: Vec<usize> = (0..n).filter(|j| !free.contains(j)).collect();
            for mask in 0u64..(1u64 << fixed.len()) {
                let mut x = vec![0.0; n];
                for (bit, &j) in fixed.iter().enumerate() {
                    x[j] = if mask >> bit & 1 == 1 { lp.bounds[j].1 } else { lp.bounds[j].0 };
                }
                for tight in &row_sets {
                    if k > 0 {
                        let a: Vec<Vec<f64>> = tight
                            .iter()
                            .map(|&r| free.iter().map(|&j| rows[r].0[j]).collect())
                            .collect();
                        let b: Vec<f64> = tight
                            .iter()
                            .map(|&r| {
                                rows[r].1 - fixed.iter().map(|&j| rows[r].0[j] * x[j]).sum::<f64>()
                            })
                            .collect();
                        let Some(sol) = solve_square(a, b) else { continue };
                        for (&j, v) in free.iter().zip(sol) {
                            x[j] = v;
                        }
                    }
                    if feasible(&x) {
                        let v = lp.objective_at(&x);
                        if best.as_ref().is_none_or(|(b, _)| better(v, *b)) {
                            best = Some((v, x.clone()));
                        }
                    }
                }
            }
        }
    }
    best
}

/// Random feasible boxed LP. Every row is satisfied at a random interior
/// point, so the instance is feasible and, being boxed, bounded.
///
/// `uniform` must return samples in `[0, 1)`.
pub fn random_boxed_lp(uniform: &mut impl FnMut() -> f64, n_vars: usize, n_rows: usize) -> LinearProgram {
    let mut span = |lo: f64, hi: f64| lo + (hi - lo) * uniform();
    let bounds: Vec<(f64, f64)> = (0..n_vars)
        .map(|_| {
            let lo = span(-1.0, 0.5);
            (lo, lo + span(0.2, 1.5))
        })
        .collect();
    let x0: Vec<f64> = bounds.iter().map(|&(lo, hi)| span(lo, hi)).collect();
    let constraints = (0..n_rows)
        .map(|_| {
            let coeffs: Vec<f64> = (0..n_vars).map(|_| span(-1.0, 1.0)).collect();
            let at: f64 = coeffs.iter().zip(&x0).map(|(a, x)| a * x).sum();
            let slack = span(0.0, 0.5);
            if span(0.0, 1.0) < 0.5 {
                Constraint { coeffs, relation: Relation::Le, bound: at + slack }
            } else {
                Constraint { coeffs, relation: Relation::Ge, bound: at - slack }
            }
        })
        .collect();
    let objective = (0..n_vars).map(|_| span(-1.0, 1.0)).collect();
    let sense = if span(0.0, 1.0) < 0.5 { Sense::Minimize } else { Sense::Maximize };
    LinearProgram { sense, objective, constraints, bounds }
}

/// Random Bell-diagonal attack with `λ₃ = λ₄`, the regime where the
/// closed-form Eve bound is exact.
pub fn random_closed_form_attack(uniform: &mut impl FnMut() -> f64) -> BellDiagonalAttack {
    let (a, b, c) = (uniform(), uniform(), uniform());
    let total = a + b + c;
    let (l1, l2) = (a / total, b / total);
    let l34 = 0.5 * (1.0 - l1 - l2).max(0.0);
    let l1 = 1.0 - l2 - 2.0 * l34;
    BellDiagonalAttack::new([l1, l2, l34, l34], TAU * uniform(), TAU * uniform())
        .expect("weights are normalized by construction")
}

/// Random attack with independent weights and phases.
pub fn random_attack(uniform: &mut impl FnMut() -> f64) -> BellDiagonalAttack {
    let w = [uniform(), uniform(), uniform(), uniform()];
    let total: f64 = w.iter().sum();
    let mut l = w.map(|x| x / total);
    l[0] = 1.0 - l[1] - l[2] - l[3];
    BellDiagonalAttack::new(l, TAU * uniform(), TAU * uniform()).expect("weights are normalized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonics::{gain_component, poisson_pn};

    #[test]
    fn weights_match_poisson() {
        let w = poisson_weights(0.37, 12);
        for (n, p) in w.iter().enumerate() {
            assert!((p - poisson_pn(0.37, n as u32).unwrap()).abs() < 1e-16);
        }
    }

    #[test]
    fn photon_sum_matches_closed_form() {
        let closed = gain_component(0.1, 0.1, 0.7, 0.0, 0.0);
        let sum = gain_by_photon_sum(0.1, 0.1, 0.7, 0.0, 0.0, 60);
        assert!((closed - sum).abs() < 1e-15);
    }

    #[test]
    fn source_yields_recompose_the_gain() {
        let spec = ChannelSpec::REFERENCE.with_attenuation(6.0).with_beta(0.4);
        for pair in BasisPair::ALL {
            for &i in &[0.1, 0.005] {
                let (q, e) = pair_stats_by_photon_sum(&spec, i, pair, 60);
                let (mut qs, mut zs) = (0.0, 0.0);
                for n in 0..=30 {
                    let (y, z) = source_yield(&spec, pair, n);
                    qs += poisson_pn(i, n).unwrap() * y;
                    zs += poisson_pn(i, n).unwrap() * z;
                }
                assert!((q - qs).abs() < 1e-14, "{pair} {i}");
                assert!((q * e - zs).abs() < 1e-14, "{pair} {i}");
            }
        }
    }

    #[test]
    fn vertex_enumeration_small() {
        use crate::decoy::Constraint;
        let lp = LinearProgram {
            sense: Sense::Maximize,
            objective: vec![1.0, 1.0],
            constraints: vec![Constraint { coeffs: vec![1.0, 2.0], relation: Relation::Le, bound: 1.0 }],
            bounds: vec![(0.0, 1.0), (0.0, 1.0)],
        };
        let (v, x) = vertex_enumeration(&lp, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12);
    }
}
