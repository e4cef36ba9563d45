//! End-to-end capacity evaluation, signal-intensity optimization, attenuation
//! scans and cutoff search.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoy::{estimate_bounds, EstimateOptions};
use crate::error::{invalid, Error, Result};
use crate::photonics::{
    bab_stats, distance_from_attenuation, observe, BasisPair, ChannelSpec, IntensityLabel, Intensities,
};
use crate::security::{eve_gains, eve_info_bound, q_from_error, secrecy_capacity, CapacityInputs};

/// Where the vacuum yield entering Eve's single-photon gain comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Y0Source {
    /// Lower bound from the ZZ decoy program.
    Lp,
    /// Device value `2·Pd·(1 - Pd)`.
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub estimate: EstimateOptions,
    /// Decoy intensities as fractions of the signal intensity.
    pub decoy_ratios: (f64, f64),
    pub y0_source: Y0Source,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            estimate: EstimateOptions::default(),
            decoy_ratios: (0.05, 0.01),
            y0_source: Y0Source::Lp,
        }
    }
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        let (r1, r2) = self.decoy_ratios;
        if !(r1 < 1.0 && r2 < r1 && r2 >= 0.0) {
            return Err(invalid(
                "decoy_ratios",
                format!("need 1 > ratio1 > ratio2 >= 0, got {r1}, {r2}"),
            ));
        }
        if self.estimate.n_cut < 2 {
            return Err(invalid("n_cut", format!("{} must be >= 2", self.estimate.n_cut)));
        }
        Ok(())
    }
}

/// Signal-intensity search: log grid over `[lo, hi]`, then golden-section
/// refinement around the best grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSearch {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
    /// Golden-section stops once the bracket is narrower than `rel_tol · μ`.
    pub rel_tol: f64,
}

impl Default for MuSearch {
    fn default() -> Self {
        Self {
            lo: 1e-3,
            hi: 0.5,
            grid_points: 25,
            rel_tol: 1e-5,
        }
    }
}

impl MuSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo.is_finite()) {
            return Err(invalid("mu_lo", format!("{} must be > 0", self.lo)));
        }
        if !(self.hi >= self.lo && self.hi.is_finite()) {
            return Err(invalid("mu_hi", format!("{} must be >= mu_lo", self.hi)));
        }
        if self.grid_points < 2 && self.hi > self.lo {
            return Err(invalid("mu_grid", "need at least 2 grid points"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid("mu_rel_tol", format!("{} must be in (0, 1)", self.rel_tol)));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        if self.hi == self.lo {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let n = self.grid_points;
        (0..n)
            .map(|k| {
                if k == 0 {
                    self.lo
                } else if k + 1 == n {
                    self.hi
                } else {
                    (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }
}

/// Conditions worth reporting about a single evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// Eve's multi-photon gain came out negative and was clamped to zero.
    MultiGainClamped,
    /// C lower bound was marginally outside `[0, 2]`.
    CClamped,
    /// Some decoy interval carries no information.
    VacuousBounds,
    /// Vacuum clicks make up at least half of the signal gain.
    DarkCountDominated,
    /// Observations were inconsistent with any photon-number yields.
    LpInfeasible,
    NoClicks,
    /// Single-photon yield bound fell below the vacuum yield.
    YieldBelowVacuum,
    NoPositiveCapacity,
    InternalError,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::MultiGainClamped => "multi_gain_clamped",
            Flag::CClamped => "c_clamped",
            Flag::VacuousBounds => "vacuous_bounds",
            Flag::DarkCountDominated => "dark_count_dominated",
            Flag::LpInfeasible => "lp_infeasible",
            Flag::NoClicks => "no_clicks",
            Flag::YieldBelowVacuum => "yield_below_vacuum",
            Flag::NoPositiveCapacity => "no_positive_capacity",
            Flag::InternalError => "internal_error",
        }
    }

    /// Flags that mean the capacity was forced to zero.
    pub fn is_failure(self) -> bool {
        matches!(
            self,
            Flag::LpInfeasible | Flag::NoClicks | Flag::YieldBelowVacuum | Flag::InternalError
        )
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerInfo {
    pub evaluations: usize,
    /// Final golden-section bracket.
    pub bracket: (f64, f64),
}

/// Full record of one evaluation at `(attenuation, β, μ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub attenuation_db: f64,
    pub distance_km: f64,
    pub beta_rad: f64,
    pub beta_deg: f64,
    pub mu: f64,
    /// Raw secrecy message capacity (bit/pulse), may be negative.
    pub capacity: f64,
    pub c_lower: f64,
    pub q_value: f64,
    pub q_bab: f64,
    pub e_bab: f64,
    pub q_ba_signal: f64,
    pub y1_min: f64,
    pub y1_max: f64,
    pub y0: f64,
    pub qn1_bae: f64,
    pub qn2_bae: f64,
    pub flags: Vec<Flag>,
    pub optimizer: Option<OptimizerInfo>,
}

impl PointResult {
    fn empty(spec: &ChannelSpec, mu: f64) -> Self {
        Self {
            attenuation_db: spec.attenuation_db,
            distance_km: distance_from_attenuation(spec),
            beta_rad: spec.beta_rad,
            beta_deg: spec.beta_rad.to_degrees(),
            mu,
            capacity: 0.0,
            c_lower: 0.0,
            q_value: 0.0,
            q_bab: 0.0,
            e_bab: 0.0,
            q_ba_signal: 0.0,
            y1_min: 0.0,
            y1_max: 0.0,
            y0: 0.0,
            qn1_bae: 0.0,
            qn2_bae: 0.0,
            flags: Vec::new(),
            optimizer: None,
        }
    }

    pub fn is_healthy(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn has_failure(&self) -> bool {
        self.flags.iter().any(|f| f.is_failure())
    }

    /// Capacity clamped at zero, for plotting.
    pub fn reported_capacity(&self) -> f64 {
        self.capacity.max(0.0)
    }

    fn flag(&mut self, flag: Flag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
            self.flags.sort();
        }
    }
}

fn failure_flag(err: &Error) -> Flag {
    match err {
        Error::Infeasible(_) => Flag::LpInfeasible,
        Error::NoClicks { .. } => Flag::NoClicks,
        Error::InvalidParameter { name: "y1_lower", .. } => Flag::YieldBelowVacuum,
        _ => Flag::InternalError,
    }
}

/// Capacity at one `(attenuation, β, μ)`. Never fails on model trouble: LP
/// infeasibility and zero-click channels yield a flagged zero-capacity record.
pub fn evaluate_point(
    template: &ChannelSpec,
    attenuation_db: f64,
    beta_rad: f64,
    mu: f64,
    options: &ModelOptions,
) -> Result<PointResult> {
    let spec = template.with_attenuation(attenuation_db).with_beta(beta_rad);
    spec.validate()?;
    options.validate()?;
    let (r1, r2) = options.decoy_ratios;
    let intensities = Intensities::from_ratios(mu, r1, r2)?;

    let mut out = PointResult::empty(&spec, mu);
    if let Err(e) = fill_point(&spec, intensities, options, &mut out) {
        out.capacity = 0.0;
        out.flag(failure_flag(&e));
    }
    Ok(out)
}

fn fill_point(
    spec: &ChannelSpec,
    intensities: Intensities,
    options: &ModelOptions,
    out: &mut PointResult,
) -> Result<()> {
    let table = observe(spec, intensities)?;
    let round_trip = bab_stats(spec, intensities.signal)?;
    out.q_bab = round_trip.gain;
    out.e_bab = round_trip.error_rate;
    out.q_ba_signal = table.q_ba_signal();
    out.q_value = q_from_error(table.get(IntensityLabel::Signal, BasisPair::ZZ).error_rate);

    let vacuum = 2.0 * spec.pd * (1.0 - spec.pd);
    if vacuum >= 0.5 * out.q_ba_signal {
        out.flag(Flag::DarkCountDominated);
    }

    let bounds = estimate_bounds(&table, &options.estimate)?;
    let y1 = bounds.y1(BasisPair::ZZ);
    out.y1_min = y1.lo;
    out.y1_max = y1.hi;
    out.c_lower = bounds.c_lower;
    if bounds.is_vacuous() {
        out.flag(Flag::VacuousBounds);
    }
    let bound = eve_info_bound(bounds.c_lower)?;
    if bound.clamped {
        out.flag(Flag::CClamped);
    }

    out.y0 = match options.y0_source {
        Y0Source::Lp => bounds.y0.lo,
        Y0Source::Model => vacuum,
    };
    let eve = eve_gains(intensities.signal, y1.lo, out.y0, out.q_ba_signal)?;
    out.qn1_bae = eve.single;
    out.qn2_bae = eve.multi;
    if eve.multi_clamped {
        out.flag(Flag::MultiGainClamped);
    }

    out.capacity = secrecy_capacity(&CapacityInputs {
        q_bab: out.q_bab,
        e_bab: out.e_bab,
        q_n1_bae: eve.single,
        q_n2_bae: eve.multi,
        c_lower: bounds.c_lower,
    });
    Ok(())
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Best signal intensity at one `(attenuation, β)`.
///
/// Ties go to the smaller μ. If no μ gives positive capacity the best one is
/// still returned, flagged [`Flag::NoPositiveCapacity`].
pub fn optimize_mu(
    template: &ChannelSpec,
    attenuation_db: f64,
    beta_rad: f64,
    search: &MuSearch,
    options: &ModelOptions,
) -> Result<PointResult> {
    search.validate()?;
    let eval = |mu: f64| evaluate_point(template, attenuation_db, beta_rad, mu, options);

    let grid = search.grid();
    let coarse: Vec<PointResult> = grid
        .par_iter()
        .map(|&mu| eval(mu))
        .collect::<Result<_>>()?;
    let mut evaluations = coarse.len();

    let mut best_idx = 0;
    for (i, p) in coarse.iter().enumerate() {
        if p.capacity > coarse[best_idx].capacity {
            best_idx = i;
        }
    }
    let mut best = coarse[best_idx].clone();
    let mut bracket = (grid[best_idx], grid[best_idx]);

    if grid.len() > 1 {
        let mut a = grid[best_idx.saturating_sub(1)];
        let mut b = grid[(best_idx + 1).min(grid.len() - 1)];
        let consider = |p: PointResult, best: &mut PointResult| {
            if p.capacity > best.capacity || (p.capacity == best.capacity && p.mu < best.mu) {
                *best = p;
            }
        };
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut pc = eval(c)?;
        let mut pd = eval(d)?;
        evaluations += 2;
        while b - a > search.rel_tol * 0.5 * (a + b) {
            if pc.capacity >= pd.capacity {
                b = d;
                d = c;
                consider(std::mem::replace(&mut pd, pc.clone()), &mut best);
                c = b - INV_PHI * (b - a);
                pc = eval(c)?;
            } else {
                a = c;
                c = d;
                consider(std::mem::replace(&mut pc, pd.clone()), &mut best);
                d = a + INV_PHI * (b - a);
                pd = eval(d)?;
            }
            evaluations += 1;
        }
        consider(pc, &mut best);
        consider(pd, &mut best);
        bracket = (a, b);
    }

    if best.capacity <= 0.0 {
        best.flag(Flag::NoPositiveCapacity);
    }
    best.optimizer = Some(OptimizerInfo { evaluations, bracket });
    Ok(best)
}

/// Attenuation grid `start, start + step, …, ≤ stop` (dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttenuationGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AttenuationGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.start >= 0.0 && self.start.is_finite()) {
            return Err(invalid("att_start", format!("{} must be >= 0", self.start)));
        }
        if !(self.stop >= self.start && self.stop.is_finite()) {
            return Err(invalid("att_stop", format!("{} must be >= att_start", self.stop)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("att_step", format!("{} must be > 0", self.step)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// One curve per listed signal intensity.
    Fixed(Vec<f64>),
    /// Signal intensity optimized at every grid point.
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Device parameters; its attenuation and β are overridden per point.
    pub channel: ChannelSpec,
    pub grid: AttenuationGrid,
    pub betas_rad: Vec<f64>,
    pub mode: ScanMode,
    pub mu_search: MuSearch,
    pub options: ModelOptions,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.grid.validate()?;
        self.mu_search.validate()?;
        self.options.validate()?;
        if let ScanMode::Fixed(mus) = &self.mode {
            if let Some(bad) = mus.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
                return Err(invalid("mu", format!("{bad} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Evaluates every grid point. Points are independent and run in parallel;
/// output is ordered by β, then μ (fixed mode), then attenuation.
pub fn scan(config: &ScanConfig) -> Result<Vec<PointResult>> {
    config.validate()?;
    let atts = config.grid.points();
    let mus: Vec<Option<f64>> = match &config.mode {
        ScanMode::Fixed(mus) => mus.iter().map(|&m| Some(m)).collect(),
        ScanMode::Optimized => vec![None],
    };
    let mut tasks = Vec::new();
    for &beta in &config.betas_rad {
        for &mu in &mus {
            for &a in &atts {
                tasks.push((a, beta, mu));
            }
        }
    }
    tasks
        .par_iter()
        .map(|&(a, beta, mu)| match mu {
            Some(mu) => evaluate_point(&config.channel, a, beta, mu, &config.options),
            None => optimize_mu(&config.channel, a, beta, &config.mu_search, &config.options),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub a_max_db: f64,
    pub l_max_km: f64,
    /// Optimized point at `a_max_db`.
    pub point: PointResult,
    /// Capacity was still positive at the top of the search bracket.
    pub bracket_limited: bool,
}

pub const CUTOFF_RESOLUTION_DB: f64 = 0.01;
const CUTOFF_COARSE_STEP_DB: f64 = 0.5;

/// Largest attenuation with positive optimized capacity on `[0, hi_db]`.
pub fn max_attenuation(
    template: &ChannelSpec,
    beta_rad: f64,
    search: &MuSearch,
    options: &ModelOptions,
    hi_db: f64,
) -> Result<Cutoff> {
    if !(hi_db > 0.0 && hi_db.is_finite()) {
        return Err(invalid("cutoff_hi_db", format!("{hi_db} must be > 0")));
    }
    let optimized = |a: f64| optimize_mu(template, a, beta_rad, search, options);
    let coarse = AttenuationGrid {
        start: 0.0,
        stop: hi_db,
        step: CUTOFF_COARSE_STEP_DB,
    }
    .points();
    let results: Vec<PointResult> = coarse.par_iter().map(|&a| optimized(a)).collect::<Result<_>>()?;
    let Some(last) = results.iter().rposition(|p| p.capacity > 0.0) else {
        return Err(Error::AlwaysInsecure { lo_db: 0.0, hi_db });
    };
    let l_max = |a: f64| a / (2.0 * template.alpha_db_per_km);
    if last + 1 == coarse.len() {
        let point = results[last].clone();
        return Ok(Cutoff {
            a_max_db: point.attenuation_db,
            l_max_km: l_max(point.attenuation_db),
            point,
            bracket_limited: true,
        });
    }

    let (mut lo, mut hi) = (coarse[last], coarse[last + 1]);
    let mut best = results[last].clone();
    while hi - lo > CUTOFF_RESOLUTION_DB {
        let mid = 0.5 * (lo + hi);
        let p = optimized(mid)?;
        if p.capacity > 0.0 {
            lo = mid;
            best = p;
        } else {
            hi = mid;
        }
    }
    Ok(Cutoff {
        a_max_db: lo,
        l_max_km: l_max(lo),
        point: best,
        bracket_limited: false,
    })
}
