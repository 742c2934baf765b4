//! Numerical checks of the functional inequalities and identities of the
//! quantum diffusion flow.
//!
//! Each verifier evaluates both sides of one statement over a corpus, keeps
//! every comparison as a [`Record`] with enough parameters to reproduce it,
//! and condenses the result into a [`Summary`]. [`run`] builds the default
//! seeded corpora; [`negative_control`] runs a deliberately broken variant
//! that must fail.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::corpus::{random_grid_mixture, rng, CorpusRng, StateSampler};
use crate::error::{Error, Result};
use crate::functionals::{
    dirichlet_form, entropy, entropy_rate, fisher_j, fisher_j_from_divergence, flow_derivative,
    purity,
};
use crate::gaussian::GaussianState;
use crate::grid::{
    grid_dirichlet_with_tolerance, grid_purity_with_tolerance, wigner_samples, GridState,
};
use crate::semigroup::{evolve_gaussian, shift_cov};

/// Relative tolerance of the de Bruijn and Fisher-consistency identities.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Relative tolerance of `du/dt = -2 E`.
pub const PURITY_IDENTITY_TOL: f64 = 1e-5;
/// Relative tolerance of `J(rho_t) <= J(rho)`.
pub const MONOTONE_TOL: f64 = 1e-12;
/// Bound on `|dE/dt - e/2|` at [`ASYMPTOTE_TIME`].
pub const ASYMPTOTE_TOL: f64 = 1e-2;
pub const ASYMPTOTE_TIME: f64 = 1e3;
/// Time step for flow derivatives of grid integrals.
pub const GRID_FLOW_STEP: f64 = 1e-4;
/// The exponent fit uses times in this window.
pub const SLOPE_WINDOW: (f64, f64) = (10.0, 100.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    Nash,
    Ultra,
    Logsob,
    Isoperimetric,
    BlachmanStam,
    Concavity,
    Debruijn,
    PurityDecay,
    EntropyGrowth,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::Nash,
        TheoremId::Ultra,
        TheoremId::Logsob,
        TheoremId::Isoperimetric,
        TheoremId::BlachmanStam,
        TheoremId::Concavity,
        TheoremId::Debruijn,
        TheoremId::PurityDecay,
        TheoremId::EntropyGrowth,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TheoremId::Nash => "nash",
            TheoremId::Ultra => "ultra",
            TheoremId::Logsob => "logsob",
            TheoremId::Isoperimetric => "isoperimetric",
            TheoremId::BlachmanStam => "blachman_stam",
            TheoremId::Concavity => "concavity",
            TheoremId::Debruijn => "debruijn",
            TheoremId::PurityDecay => "purity_decay",
            TheoremId::EntropyGrowth => "entropy_growth",
        }
    }

    fn stream(self) -> u64 {
        Self::ALL.iter().position(|t| *t == self).unwrap() as u64 + 1
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown theorem tag {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Negative margin within the relative tolerance.
    PassAtTolerance,
    Fail,
}

/// One comparison `lhs <= rhs`, `margin = rhs - lhs`.
///
/// Identities are stored as `relative error <= tolerance`. Soft records are
/// reported but do not decide the outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub check: &'static str,
    pub subject: Value,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: Status,
    pub hard: bool,
}

impl Record {
    fn new(
        check: &'static str,
        subject: &Value,
        params: BTreeMap<String, f64>,
        lhs: f64,
        rhs: f64,
        rel_tol: f64,
    ) -> Self {
        let margin = rhs - lhs;
        let status = if margin >= 0.0 {
            Status::Pass
        } else if -margin <= rel_tol * lhs.abs().max(rhs.abs()) {
            Status::PassAtTolerance
        } else {
            Status::Fail
        };
        Self {
            check,
            subject: subject.clone(),
            params,
            lhs,
            rhs,
            margin,
            status,
            hard: true,
        }
    }

    fn soft(mut self) -> Self {
        self.hard = false;
        self
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub hard_failures: usize,
    pub soft_failures: usize,
    pub at_tolerance: usize,
    /// Smallest margin over hard records.
    pub worst_margin: Option<f64>,
    pub passed: bool,
    /// Fitted exponents, empirical extremal ratios and similar.
    pub extras: BTreeMap<String, f64>,
}

impl Summary {
    fn of(records: &[Record], extras: BTreeMap<String, f64>) -> Self {
        let hard_failures = records.iter().filter(|r| r.hard && r.failed()).count();
        Self {
            records: records.len(),
            hard_failures,
            soft_failures: records.iter().filter(|r| !r.hard && r.failed()).count(),
            at_tolerance: records
                .iter()
                .filter(|r| r.status == Status::PassAtTolerance)
                .count(),
            worst_margin: records
                .iter()
                .filter(|r| r.hard)
                .map(|r| r.margin)
                .min_by(f64::total_cmp),
            passed: hard_failures == 0,
            extras,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem: TheoremId,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl VerificationReport {
    fn new(theorem: TheoremId, records: Vec<Record>, extras: BTreeMap<String, f64>) -> Self {
        let summary = Summary::of(&records, extras);
        Self {
            theorem,
            records,
            summary,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn records_of<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a Record> {
        self.records.iter().filter(move |r| r.check == check)
    }
}

/// Nash constant from splitting `int |chi|^2` at a radius and using `|chi| <= 1`:
/// `C_n = 2 (1 + 1/n)^{1 + 1/n} (n / n!)^{1/n}`. Valid for every state, not optimal.
pub fn derived_nash_constant(n: usize) -> f64 {
    let nf = n as f64;
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    2.0 * (1.0 + 1.0 / nf).powf(1.0 + 1.0 / nf) * ((nf.ln() - ln_fact) / nf).exp()
}

/// The configured Nash constant for `n` modes.
pub fn nash_constant(n: usize, cfg: &RunConfig) -> f64 {
    cfg.nash_constant
        .unwrap_or_else(|| derived_nash_constant(n))
}

/// `kappa_n = (n C_n / 2)^{n/2}`.
pub fn ultracontractivity_constant(n: usize, c: f64) -> f64 {
    (n as f64 * c / 2.0).powf(n as f64 / 2.0)
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `count` points `10^(lo + k (hi - lo) / (count - 1))`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (count - 1) as f64))
        .collect()
}

fn describe(state: &GaussianState) -> Value {
    serde_json::to_value(state.to_spec()).expect("spec serializes")
}

fn describe_grid(state: &GridState) -> Value {
    serde_json::to_value(state.header()).expect("grid header serializes")
}

fn params<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn require_nonempty<T>(items: &[T]) -> Result<()> {
    if items.is_empty() {
        Err(Error::EmptyCorpus)
    } else {
        Ok(())
    }
}

fn require_invertible(state: &GaussianState) -> Result<()> {
    let v = state.validate()?;
    if v.invertible {
        Ok(())
    } else {
        Err(Error::NotInvertible(v.min_nu))
    }
}

fn require_centered(state: &GaussianState) -> Result<()> {
    if state.is_centered() {
        Ok(())
    } else {
        Err(Error::NotCentered(state.mean().norm()))
    }
}

fn flatten<T>(parts: Vec<Vec<T>>) -> Vec<T> {
    parts.into_iter().flatten().collect()
}

fn entropy_power_along_flow(state: &GaussianState, t: f64) -> Result<f64> {
    Ok((entropy(&shift_cov(state, t))? / state.n() as f64).exp())
}

fn purity_along_flow(state: &GaussianState, t: f64) -> Result<f64> {
    purity(&shift_cov(state, t))
}

fn max_by_mode(records: impl Iterator<Item = (usize, f64)>, prefix: &str) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (n, v) in records {
        let e = out
            .entry(format!("{prefix}_n{n}"))
            .or_insert(f64::NEG_INFINITY);
        if v > *e {
            *e = v;
        }
    }
    out
}

// ---------------------------------------------------------------- Nash

/// `purity^{1 + 1/n} <= C_n E(rho)` on Gaussian states and on grid states
/// with nonnegative Wigner function. `scale` multiplies the constant.
fn nash_scaled(
    gaussians: &[GaussianState],
    grids: &[GridState],
    cfg: &RunConfig,
    scale: f64,
) -> Result<VerificationReport> {
    if gaussians.is_empty() && grids.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let gauss: Vec<(usize, f64, Record)> = gaussians
        .par_iter()
        .map(|st| {
            let n = st.n();
            let c = nash_constant(n, cfg) * scale;
            let u = purity(st)?;
            let e = dirichlet_form(st)?;
            let lhs = u.powf(1.0 + 1.0 / n as f64);
            let rec = Record::new(
                "nash",
                &describe(st),
                params([("nash_constant", c), ("purity", u), ("dirichlet", e)]),
                lhs,
                c * e,
                cfg.margin_tolerance,
            );
            Ok((n, lhs / e, rec))
        })
        .collect::<Result<_>>()?;
    let grid: Vec<(usize, f64, Record)> = grids
        .par_iter()
        .map(|g| {
            let w = wigner_samples(g)?;
            if !w.nonnegative {
                return Err(Error::NegativeWigner(w.min));
            }
            let c = nash_constant(1, cfg) * scale;
            let u = grid_purity_with_tolerance(g, cfg.quadrature_tolerance)?;
            let e = grid_dirichlet_with_tolerance(g, cfg.quadrature_tolerance)?;
            let cfg_g = g.config();
            let rec = Record::new(
                "nash_grid",
                &describe_grid(g),
                params([
                    ("nash_constant", c),
                    ("purity", u),
                    ("dirichlet", e),
                    ("min_wigner", w.min),
                    ("grid_l", cfg_g.extent),
                    ("grid_m", cfg_g.m as f64),
                ]),
                u * u,
                c * e,
                cfg.margin_tolerance,
            );
            Ok((1, u * u / e, rec))
        })
        .collect::<Result<_>>()?;
    let all: Vec<_> = gauss.into_iter().chain(grid).collect();
    let extras = max_by_mode(all.iter().map(|(n, r, _)| (*n, *r)), "sup_ratio");
    let records = all.into_iter().map(|(_, _, r)| r).collect();
    Ok(VerificationReport::new(TheoremId::Nash, records, extras))
}

pub fn verify_nash(
    gaussians: &[GaussianState],
    grids: &[GridState],
    cfg: &RunConfig,
) -> Result<VerificationReport> {
    nash_scaled(gaussians, grids, cfg, 1.0)
}

// ------------------------------------------------- ultracontractivity

fn entropy_bound(n: usize, c: f64, t: f64) -> f64 {
    0.5 * n as f64 * (2.0 * t / (n as f64 * c)).ln()
}

fn ultra_scaled(
    states: &[GaussianState],
    ts: &[f64],
    cfg: &RunConfig,
    scale: f64,
) -> Result<VerificationReport> {
    require_nonempty(states)?;
    let per_state: Vec<(usize, f64, Vec<Record>)> = states
        .par_iter()
        .map(|st| {
            let n = st.n();
            let nf = n as f64;
            let c = nash_constant(n, cfg) * scale;
            let kappa = ultracontractivity_constant(n, c);
            let subject = describe(st);
            let mut recs = Vec::with_capacity(2 * ts.len() + 1);
            let (mut lt, mut ln) = (Vec::new(), Vec::new());
            for &t in ts {
                let evolved = evolve_gaussian(st, t)?;
                let norm = purity(&evolved)?.sqrt();
                let s = entropy(&evolved)?;
                let p = params([("t", t), ("nash_constant", c), ("kappa", kappa)]);
                recs.push(Record::new(
                    "norm_bound",
                    &subject,
                    p.clone(),
                    norm,
                    kappa * t.powf(-nf / 2.0),
                    cfg.margin_tolerance,
                ));
                recs.push(Record::new(
                    "entropy_bound",
                    &subject,
                    p,
                    entropy_bound(n, c, t),
                    s,
                    cfg.margin_tolerance,
                ));
                if t >= SLOPE_WINDOW.0 && t <= SLOPE_WINDOW.1 {
                    lt.push(t.ln());
                    ln.push(norm.ln());
                }
            }
            let mut slope = f64::NAN;
            if lt.len() >= 2 {
                slope = least_squares_slope(&lt, &ln);
                recs.push(
                    Record::new(
                        "slope",
                        &subject,
                        params([
                            ("fitted_slope", slope),
                            ("expected_slope", -nf / 2.0),
                            ("t_min", SLOPE_WINDOW.0),
                            ("t_max", SLOPE_WINDOW.1),
                        ]),
                        (slope + nf / 2.0).abs(),
                        cfg.slope_tolerance,
                        0.0,
                    )
                    .soft(),
                );
            }
            Ok((n, slope, recs))
        })
        .collect::<Result<_>>()?;
    let mut extras = max_by_mode(
        per_state
            .iter()
            .map(|(n, s, _)| (*n, (s + *n as f64 / 2.0).abs())),
        "max_slope_deviation",
    );
    for (n, s, _) in &per_state {
        extras
            .entry(format!("min_slope_n{n}"))
            .and_modify(|v| *v = v.min(*s))
            .or_insert(*s);
        extras
            .entry(format!("max_slope_n{n}"))
            .and_modify(|v| *v = v.max(*s))
            .or_insert(*s);
    }
    let records = flatten(per_state.into_iter().map(|(_, _, r)| r).collect());
    Ok(VerificationReport::new(TheoremId::Ultra, records, extras))
}

/// `||rho_t||_2 <= kappa_n t^{-n/2}`, the entropy lower bound, and the
/// fitted exponent of `||rho_t||_2` over [`SLOPE_WINDOW`] (soft).
pub fn verify_ultracontractivity(
    states: &[GaussianState],
    ts: &[f64],
    cfg: &RunConfig,
) -> Result<VerificationReport> {
    ultra_scaled(states, ts, cfg, 1.0)
}

// ------------------------------------------------------- purity decay

fn purity_decay_scaled(
    states: &[GaussianState],
    grids: &[GridState],
    ts: &[f64],
    grid_ts: &[f64],
    cfg: &RunConfig,
    rate_factor: f64,
) -> Result<VerificationReport> {
    if states.is_empty() && grids.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let gauss: Vec<Vec<Record>> = states
        .par_iter()
        .map(|st| {
            let n = st.n();
            let c = nash_constant(n, cfg);
            let kappa = ultracontractivity_constant(n, c);
            let subject = describe(st);
            let mut recs = Vec::new();
            for &t in ts {
                let u = purity_along_flow(st, t)?;
                let e = dirichlet_form(&shift_cov(st, t))?;
                let udot = flow_derivative(st, t, cfg.delta_t, purity_along_flow)?;
                recs.push(Record::new(
                    "purity_bound",
                    &subject,
                    params([("t", t), ("kappa", kappa)]),
                    u,
                    kappa * kappa * t.powf(-(n as f64)),
                    cfg.margin_tolerance,
                ));
                recs.push(Record::new(
                    "rate_identity",
                    &subject,
                    params([
                        ("t", t),
                        ("delta_t", cfg.delta_t),
                        ("du_dt", udot),
                        ("dirichlet", e),
                    ]),
                    rel_err(udot, -2.0 * rate_factor * e),
                    PURITY_IDENTITY_TOL,
                    0.0,
                ));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    let grid: Vec<Vec<Record>> = grids
        .par_iter()
        .map(|g| {
            let kappa = ultracontractivity_constant(1, nash_constant(1, cfg));
            let subject = describe_grid(g);
            let mut recs = Vec::new();
            for &t in grid_ts {
                let evolved = g.evolve(t)?;
                let u = grid_purity_with_tolerance(&evolved, cfg.quadrature_tolerance)?;
                let e = grid_dirichlet_with_tolerance(&evolved, cfg.quadrature_tolerance)?;
                let h = GRID_FLOW_STEP.min(t / 2.0);
                let udot = (g.evolve(t + h)?.riemann_purity() - g.evolve(t - h)?.riemann_purity())
                    / (2.0 * h);
                recs.push(Record::new(
                    "purity_bound_grid",
                    &subject,
                    params([("t", t), ("kappa", kappa)]),
                    u,
                    kappa * kappa / t,
                    cfg.margin_tolerance,
                ));
                recs.push(Record::new(
                    "rate_identity_grid",
                    &subject,
                    params([("t", t), ("delta_t", h), ("du_dt", udot), ("dirichlet", e)]),
                    rel_err(udot, -2.0 * rate_factor * e),
                    PURITY_IDENTITY_TOL,
                    0.0,
                ));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    let records: Vec<Record> = flatten(gauss).into_iter().chain(flatten(grid)).collect();
    let mut extras = BTreeMap::new();
    let worst = records
        .iter()
        .filter(|r| r.check.starts_with("rate_identity"))
        .map(|r| r.lhs)
        .fold(0.0, f64::max);
    extras.insert("max_rate_identity_error".into(), worst);
    Ok(VerificationReport::new(
        TheoremId::PurityDecay,
        records,
        extras,
    ))
}

/// `Tr rho_t^2 <= kappa_n^2 t^{-n}` and `d/dt Tr rho_t^2 = -2 E(rho_t)` on
/// Gaussian states (times `ts`) and grid states (times `grid_ts`, all > 0).
pub fn verify_purity_decay(
    states: &[GaussianState],
    grids: &[GridState],
    ts: &[f64],
    grid_ts: &[f64],
    cfg: &RunConfig,
) -> Result<VerificationReport> {
    purity_decay_scaled(states, grids, ts, grid_ts, cfg, 1.0)
}

// ----------------------------------------------------- entropy growth

fn entropy_growth_scaled(
    states: &[GaussianState],
    ts: &[f64],
    cfg: &RunConfig,
    scale: f64,
) -> Result<VerificationReport> {
    require_nonempty(states)?;
    let parts: Vec<Vec<Record>> = states
        .par_iter()
        .map(|st| {
            let n = st.n();
            let c = nash_constant(n, cfg) * scale;
            let subject = describe(st);
            let mut recs = Vec::new();
            let mut prev: Option<(f64, f64)> = None;
            for &t in ts {
                let s = entropy(&evolve_gaussian(st, t)?)?;
                recs.push(Record::new(
                    "entropy_bound",
                    &subject,
                    params([("t", t), ("nash_constant", c)]),
                    entropy_bound(n, c, t),
                    s,
                    cfg.margin_tolerance,
                ));
                if let Some((t0, s0)) = prev {
                    recs.push(Record::new(
                        "monotone",
                        &subject,
                        params([("t0", t0), ("t1", t)]),
                        s0,
                        s,
                        cfg.margin_tolerance,
                    ));
                }
                prev = Some((t, s));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    let records = flatten(parts);
    let mut extras = BTreeMap::new();
    let min_gap = records
        .iter()
        .filter(|r| r.check == "entropy_bound")
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    extras.insert("min_entropy_bound_margin".into(), min_gap);
    Ok(VerificationReport::new(
        TheoremId::EntropyGrowth,
        records,
        extras,
    ))
}

/// `S(rho_t) >= (n/2) ln(kappa_n^{-2/n} t)` and `S(rho_t)` nondecreasing in `t`.
pub fn verify_entropy_growth(
    states: &[GaussianState],
    ts: &[f64],
    cfg: &RunConfig,
) -> Result<VerificationReport> {
    entropy_growth_scaled(states, ts, cfg, 1.0)
}

// --------------------------------------------------------- log-Sobolev

fn logsob_scaled(
    states: &[GaussianState],
    cfg: &RunConfig,
    scale: f64,
) -> Result<VerificationReport> {
    require_nonempty(states)?;
    let records: Vec<Record> = states
        .par_iter()
        .map(|st| {
            require_invertible(st)?;
            require_centered(st)?;
            let n = st.n() as f64;
            let s = entropy(st)?;
            let j = fisher_j(st)?;
            Ok(Record::new(
                "logsob",
                &describe(st),
                params([("entropy", s), ("fisher_j", j), ("rhs_scale", scale)]),
                -s + n,
                scale * j / (2.0 * E),
                cfg.margin_tolerance,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(VerificationReport::new(
        TheoremId::Logsob,
        records,
        BTreeMap::new(),
    ))
}

/// `Tr(rho ln rho) + n <= J(rho) / (2e)` on invertible centered states.
pub fn verify_logsob(states: &[GaussianState], cfg: &RunConfig) -> Result<VerificationReport> {
    logsob_scaled(states, cfg, 1.0)
}

// ------------------------------------------------------ isoperimetric

fn isoperimetric_scaled(
    states: &[GaussianState],
    cfg: &RunConfig,
    scale: f64,
) -> Result<VerificationReport> {
    require_nonempty(states)?;
    let parts: Vec<(usize, f64, Record)> = states
        .par_iter()
        .map(|st| {
            require_invertible(st)?;
            let n = st.n();
            let j = fisher_j(st)?;
            let ep = (entropy(st)? / n as f64).exp();
            let bound = 2.0 * E * n as f64;
            let rec = Record::new(
                "isoperimetric",
                &describe(st),
                params([("fisher_j", j), ("entropy_power", ep), ("lhs_scale", scale)]),
                scale * bound,
                j * ep,
                cfg.margin_tolerance,
            );
            Ok((n, j * ep / bound, rec))
        })
        .collect::<Result<_>>()?;
    let extras = max_by_mode(
        parts.iter().map(|(n, r, _)| (*n, -r)),
        "neg_min_je_over_2en",
    )
    .into_iter()
    .map(|(k, v)| (k.replacen("neg_", "", 1), -v))
    .collect();
    let records = parts.into_iter().map(|(_, _, r)| r).collect();
    Ok(VerificationReport::new(
        TheoremId::Isoperimetric,
        records,
        extras,
    ))
}

/// `J(rho) E(rho) >= 2 e n`; reports the corpus minimum of `J E / (2 e n)`.
pub fn verify_isoperimetric(
    states: &[GaussianState],
    cfg: &RunConfig,
) -> Result<VerificationReport> {
    isoperimetric_scaled(states, cfg, 1.0)
}

// ------------------------------------------------------ Blachman-Stam

fn blachman_stam_scaled(
    states: &[GaussianState],
    alphas: &[f64],
    betas: &[f64],
    ts: &[f64],
    cfg: &RunConfig,
    scale: f64,
) -> Result<VerificationReport> {
    require_nonempty(states)?;
    if alphas.iter().chain(betas).chain(ts).any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidConfig(
            "alpha, beta and t must be positive".into(),
        ));
    }
    let parts: Vec<(f64, Vec<Record>)> = states
        .par_iter()
        .map(|st| {
            require_invertible(st)?;
            let n = st.n() as f64;
            let j0 = fisher_j(st)?;
            let subject = describe(st);
            let mut recs = Vec::new();
            let mut closest = 0.0f64;
            for &t in ts {
                let jt = fisher_j(&evolve_gaussian(st, t)?)?;
                recs.push(Record::new(
                    "monotone",
                    &subject,
                    params([("t", t), ("alpha", 1.0), ("beta", 0.0)]),
                    jt,
                    scale * j0,
                    MONOTONE_TOL,
                ));
                for &a in alphas {
                    for &b in betas {
                        let lhs = (a + b).powi(2) * jt;
                        let rhs = scale * (a * a * j0 + 4.0 * n * b * b / t);
                        closest = closest.max(lhs / rhs);
                        recs.push(Record::new(
                            "blachman_stam",
                            &subject,
                            params([("t", t), ("alpha", a), ("beta", b)]),
                            lhs,
                            rhs,
                            cfg.margin_tolerance,
                        ));
                    }
                }
            }
            Ok((closest, recs))
        })
        .collect::<Result<_>>()?;
    let closest = parts.iter().map(|(c, _)| *c).fold(0.0, f64::max);
    let mut extras = BTreeMap::new();
    extras.insert("closest_approach_ratio".into(), closest);
    let records = flatten(parts.into_iter().map(|(_, r)| r).collect());
    Ok(VerificationReport::new(
        TheoremId::BlachmanStam,
        records,
        extras,
    ))
}

/// `(alpha + beta)^2 J(rho_t) <= alpha^2 J(rho) + 4 n beta^2 / t` over the
/// parameter grid, plus the `beta = 0` case `J(rho_t) <= J(rho)`.
pub fn verify_blachman_stam(
    states: &[GaussianState],
    alphas: &[f64],
    betas: &[f64],
    ts: &[f64],
    cfg: &RunConfig,
) -> Result<VerificationReport> {
    blachman_stam_scaled(states, alphas, betas, ts, cfg, 1.0)
}

// ---------------------------------------------------------- concavity

/// Second divided difference of `f` at `t` with step `h`.
fn second_difference(
    state: &GaussianState,
    t: f64,
    h: f64,
    f: fn(&GaussianState, f64) -> Result<f64>,
) -> Result<f64> {
    let (a, b, c) = (f(state, t - h)?, f(state, t)?, f(state, t + h)?);
    if (c - b).abs() < 64.0 * f64::EPSILON * b.abs() {
        return Err(Error::StepTooSmall(h));
    }
    Ok((a - 2.0 * b + c) / (h * h))
}

fn concavity_with(
    states: &[GaussianState],
    ts: &[f64],
    cfg: &RunConfig,
    f: fn(&GaussianState, f64) -> Result<f64>,
) -> Result<VerificationReport> {
    require_nonempty(states)?;
    let parts: Vec<(f64, f64, Vec<Record>)> = states
        .par_iter()
        .map(|st| {
            require_centered(st)?;
            st.validate()?;
            let subject = describe(st);
            let mut recs = Vec::new();
            let mut max_d2 = f64::NEG_INFINITY;
            for &t in ts {
                let h = (cfg.concavity_step * t.max(1.0)).min(t / 2.0);
                let d2 = second_difference(st, t, h, f)?;
                max_d2 = max_d2.max(d2);
                recs.push(Record::new(
                    "second_difference",
                    &subject,
                    params([("t", t), ("h", h)]),
                    d2,
                    cfg.concavity_tolerance,
                    0.0,
                ));
            }
            let slope = flow_derivative(st, ASYMPTOTE_TIME, cfg.delta_t, entropy_power_along_flow)?;
            let dev = (slope - E / 2.0).abs();
            recs.push(Record::new(
                "asymptote",
                &subject,
                params([
                    ("t", ASYMPTOTE_TIME),
                    ("delta_t", cfg.delta_t),
                    ("slope", slope),
                ]),
                dev,
                ASYMPTOTE_TOL,
                0.0,
            ));
            Ok((max_d2, dev, recs))
        })
        .collect::<Result<_>>()?;
    let mut extras = BTreeMap::new();
    extras.insert(
        "max_second_difference".into(),
        parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    extras.insert(
        "max_asymptote_deviation".into(),
        parts.iter().map(|p| p.1).fold(0.0, f64::max),
    );
    let records = flatten(parts.into_iter().map(|p| p.2).collect());
    Ok(VerificationReport::new(
        TheoremId::Concavity,
        records,
        extras,
    ))
}

/// `d^2/dt^2 E(rho_t) <= tol` by divided differences with step
/// `min(concavity_step * max(t, 1), t / 2)`, and `|dE/dt - e/2|` at
/// [`ASYMPTOTE_TIME`].
pub fn verify_concavity(
    states: &[GaussianState],
    ts: &[f64],
    cfg: &RunConfig,
) -> Result<VerificationReport> {
    concavity_with(states, ts, cfg, entropy_power_along_flow)
}

// ----------------------------------------------------------- de Bruijn

fn debruijn_scaled(
    states: &[GaussianState],
    ts: &[f64],
    fisher_checks: usize,
    cfg: &RunConfig,
    factor: f64,
) -> Result<VerificationReport> {
    require_nonempty(states)?;
    let parts: Vec<Vec<Record>> = states
        .par_iter()
        .enumerate()
        .map(|(i, st)| {
            require_invertible(st)?;
            require_centered(st)?;
            let subject = describe(st);
            let mut recs = Vec::new();
            for &t in ts {
                let rate = entropy_rate(st, t, cfg.delta_t)?;
                let j = fisher_j(&evolve_gaussian(st, t)?)?;
                recs.push(Record::new(
                    "debruijn",
                    &subject,
                    params([
                        ("t", t),
                        ("delta_t", cfg.delta_t),
                        ("ds_dt", rate),
                        ("fisher_j", j),
                    ]),
                    rel_err(4.0 * rate, factor * j),
                    IDENTITY_TOL,
                    0.0,
                ));
            }
            if i < fisher_checks {
                let j = fisher_j(st)?;
                let jd = fisher_j_from_divergence(st, cfg.delta_theta)?;
                recs.push(Record::new(
                    "fisher_consistency",
                    &subject,
                    params([
                        ("delta_theta", cfg.delta_theta),
                        ("fisher_j", j),
                        ("divergence_j", jd),
                    ]),
                    rel_err(jd, j),
                    IDENTITY_TOL,
                    0.0,
                ));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    let records = flatten(parts);
    let mut extras = BTreeMap::new();
    for check in ["debruijn", "fisher_consistency"] {
        let worst = records
            .iter()
            .filter(|r| r.check == check)
            .map(|r| r.lhs)
            .fold(0.0, f64::max);
        extras.insert(format!("max_{check}_error"), worst);
    }
    Ok(VerificationReport::new(
        TheoremId::Debruijn,
        records,
        extras,
    ))
}

/// `dS(rho_t)/dt = J(rho_t) / 4` at each `t`, plus `J = 2 tr Gamma` against
/// the divergence construction for the first `fisher_checks` states.
pub fn verify_debruijn(
    states: &[GaussianState],
    ts: &[f64],
    fisher_checks: usize,
    cfg: &RunConfig,
) -> Result<VerificationReport> {
    debruijn_scaled(states, ts, fisher_checks, cfg, 1.0)
}

// ------------------------------------------------------------- corpora

/// Seeded default corpora for one theorem.
pub struct Corpus {
    rng: CorpusRng,
}

impl Corpus {
    pub fn new(seed: u64, theorem: TheoremId) -> Self {
        let mut rng = rng(seed);
        rng.set_stream(theorem.stream());
        Self { rng }
    }

    /// `count` random states cycling through `n = 1, 2, 3`.
    pub fn gaussians(&mut self, count: usize, sampler: StateSampler) -> Vec<GaussianState> {
        (0..count)
            .map(|i| sampler.sample(1 + i % 3, &mut self.rng))
            .collect()
    }

    pub fn grid_mixtures(&mut self, count: usize, cfg: &RunConfig) -> Result<Vec<GridState>> {
        let grid = cfg.grid()?;
        (0..count)
            .map(|_| GridState::from_gaussian_mixture(&random_grid_mixture(&mut self.rng), grid))
            .collect()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..=hi)
    }
}

/// Thermal single-mode states with `nu - 1/2` log-spaced in `[1e-3, hi - 1/2]`.
pub fn thermal_sweep(hi: f64, count: usize) -> Vec<GaussianState> {
    log_grid(-3.0, (hi - 0.5).log10(), count)
        .into_iter()
        .map(|d| GaussianState::thermal(1, 0.5 + d))
        .collect()
}

/// Pure and mixed starting states for the flow checks: vacuum, thermal,
/// and random squeezed pure and mixed states for `n = 1, 2, 3`.
pub fn flow_states(corpus: &mut Corpus) -> Vec<GaussianState> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.push(GaussianState::vacuum(n));
        out.push(GaussianState::thermal(n, 1.5));
        let pure = StateSampler {
            nu_min: 0.5,
            nu_max: 0.5,
            squeeze: 1.0,
            mean_scale: 1.0,
        };
        out.push(pure.sample(n, &mut corpus.rng));
        let mixed = StateSampler {
            mean_scale: 1.0,
            ..Default::default()
        };
        out.push(mixed.sample(n, &mut corpus.rng));
    }
    out
}

/// Default time grid for the flow checks: 31 points over `[0.1, 100]`.
pub fn default_flow_times() -> Vec<f64> {
    log_grid(-1.0, 2.0, 31)
}

/// Runs one verifier on its default corpus.
pub fn run(theorem: TheoremId, cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut corpus = Corpus::new(cfg.seed, theorem);
    let centered = StateSampler::default();
    match theorem {
        TheoremId::Nash => {
            let mut states = corpus.gaussians(
                500,
                StateSampler {
                    mean_scale: 2.0,
                    ..Default::default()
                },
            );
            states.extend((1..=3).map(GaussianState::vacuum));
            states.extend(thermal_sweep(10.0, 20));
            let grids = corpus.grid_mixtures(50, cfg)?;
            verify_nash(&states, &grids, cfg)
        }
        TheoremId::Ultra => {
            verify_ultracontractivity(&flow_states(&mut corpus), &default_flow_times(), cfg)
        }
        TheoremId::PurityDecay => {
            let states = flow_states(&mut corpus);
            let grids = corpus.grid_mixtures(8, cfg)?;
            verify_purity_decay(
                &states,
                &grids,
                &default_flow_times(),
                &[0.5, 1.0, 2.0],
                cfg,
            )
        }
        TheoremId::EntropyGrowth => {
            verify_entropy_growth(&flow_states(&mut corpus), &default_flow_times(), cfg)
        }
        TheoremId::Logsob | TheoremId::Isoperimetric => {
            let mut states = vec![GaussianState::thermal(1, 1.5)];
            states.extend(thermal_sweep(20.0, 40));
            states.extend(corpus.gaussians(200, centered));
            if theorem == TheoremId::Logsob {
                verify_logsob(&states, cfg)
            } else {
                verify_isoperimetric(&states, cfg)
            }
        }
        TheoremId::BlachmanStam => {
            let mut states = vec![GaussianState::thermal(1, 1.5)];
            states.extend(corpus.gaussians(19, centered));
            let grid = log_grid(-1.0, 1.0, 7);
            verify_blachman_stam(&states, &grid, &grid, &[0.1, 1.0, 10.0], cfg)
        }
        TheoremId::Concavity => {
            let mut states = vec![GaussianState::vacuum(1), GaussianState::thermal(1, 1.5)];
            states.extend(corpus.gaussians(48, centered));
            verify_concavity(&states, &log_grid(-2.0, 50f64.log10(), 40), cfg)
        }
        TheoremId::Debruijn => {
            let mut states = corpus.gaussians(200, centered);
            let mut report = verify_debruijn(&states, &[0.1, 1.0, 10.0], 100, cfg)?;
            states.clear();
            states.push(GaussianState::thermal(1, 1.5));
            let sentinel = verify_debruijn(&states, &[0.0], 0, cfg)?;
            report.records.extend(sentinel.records);
            let extras = report.summary.extras.clone();
            Ok(VerificationReport::new(
                TheoremId::Debruijn,
                report.records,
                extras,
            ))
        }
    }
}

/// Runs every verifier on its default corpus, in [`TheoremId::ALL`] order.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<VerificationReport>> {
    TheoremId::ALL.iter().map(|t| run(*t, cfg)).collect()
}

/// A deliberately broken variant of each verifier; every one must fail.
///
/// - nash: constant set to half the empirical sup ratio of the default corpus;
/// - ultra, entropy_growth: Nash constant divided by 1000;
/// - logsob: right side scaled by 1/10 on thermal states near purity;
/// - isoperimetric: bound scaled by 1.1 on the thermal `nu = 1.5` sentinel;
/// - blachman_stam: right side halved;
/// - concavity: the purity in place of the entropy power (it is convex);
/// - debruijn, purity_decay: identities with the wrong factor 2.
pub fn negative_control(theorem: TheoremId, cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut corpus = Corpus::new(cfg.seed, theorem);
    let centered = StateSampler::default();
    let times = default_flow_times();
    match theorem {
        TheoremId::Nash => {
            let states = corpus.gaussians(60, StateSampler::default());
            let sup = verify_nash(&states, &[], cfg)?
                .summary
                .extras
                .values()
                .copied()
                .fold(0.0, f64::max);
            let broken = RunConfig {
                nash_constant: Some(sup / 2.0),
                ..cfg.clone()
            };
            verify_nash(&states, &[], &broken)
        }
        TheoremId::Ultra => ultra_scaled(&flow_states(&mut corpus), &times, cfg, 1e-3),
        TheoremId::EntropyGrowth => {
            entropy_growth_scaled(&flow_states(&mut corpus), &times, cfg, 1e-3)
        }
        TheoremId::PurityDecay => {
            purity_decay_scaled(&flow_states(&mut corpus), &[], &times, &[], cfg, 2.0)
        }
        TheoremId::Logsob => logsob_scaled(&thermal_sweep(1.5, 10), cfg, 0.1),
        TheoremId::Isoperimetric => {
            isoperimetric_scaled(&[GaussianState::thermal(1, 1.5)], cfg, 1.1)
        }
        TheoremId::BlachmanStam => {
            let states = corpus.gaussians(3, centered);
            blachman_stam_scaled(&states, &[1.0], &[1.0], &[1.0], cfg, 0.5)
        }
        TheoremId::Concavity => concavity_with(
            &[GaussianState::vacuum(1)],
            &log_grid(-2.0, 1.0, 10),
            cfg,
            purity_along_flow,
        ),
        TheoremId::Debruijn => {
            let states = corpus.gaussians(5, centered);
            debruijn_scaled(&states, &[1.0], 0, cfg, 2.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use serde_json::json;

    #[test]
    fn derived_constants() {
        assert_relative_eq!(derived_nash_constant(1), 8.0, epsilon = 1e-14);
        assert_relative_eq!(
            derived_nash_constant(2),
            2.0 * 1.5f64.powf(1.5),
            epsilon = 1e-14
        );
        assert_relative_eq!(ultracontractivity_constant(1, 8.0), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn tags_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.tag().parse::<TheoremId>().unwrap(), t);
            assert_eq!(serde_json::to_value(t).unwrap(), json!(t.tag()));
        }
        assert!("nope".parse::<TheoremId>().is_err());
    }

    #[test]
    fn record_status() {
        let s = json!(null);
        assert_eq!(
            Record::new("x", &s, BTreeMap::new(), 1.0, 2.0, 1e-9).status,
            Status::Pass
        );
        assert_eq!(
            Record::new("x", &s, BTreeMap::new(), 1.0 + 1e-12, 1.0, 1e-9).status,
            Status::PassAtTolerance
        );
        assert_eq!(
            Record::new("x", &s, BTreeMap::new(), 1.1, 1.0, 1e-9).status,
            Status::Fail
        );
        assert_eq!(
            Record::new("x", &s, BTreeMap::new(), f64::NAN, 1.0, 1e-9).status,
            Status::Fail
        );
    }

    #[test]
    fn vacuum_nash_ratio_is_two() {
        let r = verify_nash(&[GaussianState::vacuum(1)], &[], &RunConfig::default()).unwrap();
        assert_relative_eq!(r.summary.extras["sup_ratio_n1"], 2.0, epsilon = 1e-14);
        let tight = RunConfig {
            nash_constant: Some(1.9),
            ..Default::default()
        };
        assert!(!verify_nash(&[GaussianState::vacuum(1)], &[], &tight)
            .unwrap()
            .passed());
    }

    #[test]
    fn logsob_sentinel() {
        let r = verify_logsob(&[GaussianState::thermal(1, 1.5)], &RunConfig::default()).unwrap();
        let rec = &r.records[0];
        assert_relative_eq!(rec.lhs, 1.0 - 2.0 * std::f64::consts::LN_2, epsilon = 1e-12);
        assert_relative_eq!(rec.rhs, std::f64::consts::LN_2 / E, epsilon = 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn isoperimetric_sentinel() {
        let r =
            verify_isoperimetric(&[GaussianState::thermal(1, 1.5)], &RunConfig::default()).unwrap();
        assert_relative_eq!(
            r.records[0].rhs,
            8.0 * std::f64::consts::LN_2,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            r.records[0].margin,
            8.0 * std::f64::consts::LN_2 - 2.0 * E,
            epsilon = 1e-9
        );
    }

    #[test]
    fn preconditions() {
        let cfg = RunConfig::default();
        assert!(matches!(
            verify_logsob(&[GaussianState::vacuum(1)], &cfg),
            Err(Error::NotInvertible(_))
        ));
        assert!(matches!(
            verify_logsob(
                &[GaussianState::coherent(1.0, 0.0)
                    .with_cov(GaussianState::thermal(1, 2.0).cov().clone())],
                &cfg
            ),
            Err(Error::NotCentered(_))
        ));
        assert!(matches!(verify_logsob(&[], &cfg), Err(Error::EmptyCorpus)));
        assert!(matches!(
            verify_nash(&[], &[], &cfg),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn vacuum_slope() {
        let r = verify_ultracontractivity(
            &[GaussianState::vacuum(1)],
            &default_flow_times(),
            &RunConfig::default(),
        )
        .unwrap();
        let slope = r.records_of("slope").next().unwrap();
        assert!(slope.status == Status::Pass, "{slope:?}");
        assert!(r.passed());
    }

    #[test]
    fn debruijn_step_guard() {
        let cfg = RunConfig {
            delta_t: 1e-300,
            ..Default::default()
        };
        assert!(matches!(
            verify_debruijn(&[GaussianState::thermal(1, 1.5)], &[1.0], 0, &cfg),
            Err(Error::StepTooSmall(_))
        ));
    }

    #[test]
    fn negative_controls_fail() {
        let cfg = RunConfig::default();
        for t in TheoremId::ALL {
            let r = negative_control(t, &cfg).unwrap();
            assert!(!r.passed(), "negative control for {t} passed");
        }
    }
}
