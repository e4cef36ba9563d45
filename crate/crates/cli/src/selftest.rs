//! Quick oracle suite run by the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfi_qsdc::decoy::solve_lp;
use rfi_qsdc::oracle::{gain_by_photon_sum, random_attack, random_boxed_lp, random_closed_form_attack, vertex_enumeration};
use rfi_qsdc::photonics::gain_component;
use rfi_qsdc::security::{eve_info_bound, holevo_oracle};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct GroupReport {
    pub name: &'static str,
    pub cases: usize,
    /// Largest observed deviation from the oracle.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl GroupReport {
    fn new(name: &'static str, deviations: impl IntoIterator<Item = f64>, tolerance: f64) -> Self {
        let mut cases = 0;
        let mut worst = 0.0f64;
        let mut finite = true;
        for d in deviations {
            cases += 1;
            finite &= d.is_finite();
            worst = worst.max(d);
        }
        Self {
            name,
            cases,
            worst,
            tolerance,
            passed: finite && worst <= tolerance,
        }
    }
}

fn gain_sum(rng: &mut ChaCha8Rng) -> GroupReport {
    let devs: Vec<f64> = (0..200)
        .map(|_| {
            let intensity = rng.gen_range(0.0..1.0);
            let eta = rng.gen_range(0.0..1.0);
            let eta_d = rng.gen_range(0.0..1.0);
            let pd = rng.gen_range(0.0..1e-3);
            let fy = rng.gen_range(0.0..1.0);
            let closed = gain_component(intensity, eta, eta_d, pd, fy);
            (closed - gain_by_photon_sum(intensity, eta, eta_d, pd, fy, 40)).abs()
        })
        .collect();
    GroupReport::new("gain-sum", devs, 1e-10)
}

fn holevo(rng: &mut ChaCha8Rng) -> GroupReport {
    let mut uniform = || rng.gen::<f64>();
    let mut devs = Vec::new();
    for _ in 0..200 {
        let a = random_closed_form_attack(&mut uniform);
        let r = holevo_oracle(&a).map(|r| r.holevo);
        let b = eve_info_bound(a.c_value()).map(|b| b.value);
        devs.push(match (r, b) {
            (Ok(r), Ok(b)) => (r - b).abs(),
            _ => f64::INFINITY,
        });
    }
    for _ in 0..100 {
        let a = random_attack(&mut uniform);
        devs.push(match holevo_oracle(&a) {
            Ok(r) => r.route_gap().max((r.s_zero - 1.0).abs()).max((r.s_one - 1.0).abs()),
            Err(_) => f64::INFINITY,
        });
    }
    GroupReport::new("holevo-closed-form", devs, 1e-8)
}

fn lp_vertex(rng: &mut ChaCha8Rng) -> GroupReport {
    let mut uniform = || rng.gen::<f64>();
    let devs: Vec<f64> = (0..50)
        .map(|_| {
            let lp = random_boxed_lp(&mut uniform, 4, 3);
            match (solve_lp(&lp), vertex_enumeration(&lp, 1e-12)) {
                (Ok(s), Some((v, _))) => (s.value - v).abs(),
                _ => f64::INFINITY,
            }
        })
        .collect();
    GroupReport::new("lp-vertex-oracle", devs, 1e-9)
}

pub fn run(seed: u64) -> Vec<GroupReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![gain_sum(&mut rng), holevo(&mut rng), lp_vertex(&mut rng)]
}
