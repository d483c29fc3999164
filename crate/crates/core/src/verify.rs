//! Randomized verification of catalog entries and the JSON reports.
//!
//! Every sample is independent; results are collected in index order and
//! reduced sequentially, so reports do not depend on the execution strategy.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::catalog::{CatalogEntry, ChartSpec, EntryKind, MetricSpec};
use crate::deform::{certify, Deformation};
use crate::diff::DiffConfig;
use crate::error::{Error, Result};
use crate::finsler::{
    fit_from_riemann, fit_residual, fundamental_tensor, projective_k, psi_k, riemann_tensor,
    spray_direct, spray_formula, GeneralABMetric, Regularity, PM_B_MARGIN,
};
use crate::geometry::{definiteness_ratio, flag_curvature_from};
use crate::phi::{
    eval_eqn01_residual, regularity_check, residual_ode_system, residual_pde, residual_pde2,
    residual_pde5, residual_pde6, PhiFamily,
};
use crate::riemann::{AlphaBeta, ProjectiveChart};
use crate::sampling::{draw, Sample, RNG_NAME};

pub const SCHEMA: &str = "finsler-lab/1";

pub const DEFAULT_DIM: usize = 3;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_DEFORM_SAMPLES: usize = 50;
/// `u` values checked against the (p, q) ODE system in a scan.
pub const ODE_SAMPLES: usize = 50;
/// Points of the `x` ball probed to find the range of `b` for a scan.
const B_PROBES: usize = 400;

/// Which derivative engine runs and the matching tolerance tier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TolProfile {
    /// Forward jets: `1e-8` for equation residuals, `1e-6` for curvature.
    #[default]
    Jet,
    /// Central differences with Richardson extrapolation.
    Fd,
}

impl FromStr for TolProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jet" => Ok(TolProfile::Jet),
            "fd" => Ok(TolProfile::Fd),
            _ => Err(Error::InvalidArgument(format!(
                "unknown tolerance profile '{s}' (expected jet or fd)"
            ))),
        }
    }
}

impl TolProfile {
    pub fn diff_config(self) -> DiffConfig {
        match self {
            TolProfile::Jet => DiffConfig::jet(),
            TolProfile::Fd => DiffConfig::fd(),
        }
    }

    /// (equation residuals, curvature residuals)
    fn tiers(self) -> (f64, f64) {
        match self {
            TolProfile::Jet => (1e-8, 1e-6),
            TolProfile::Fd => (1e-5, 1e-4),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is on, otherwise sequential.
    #[default]
    Parallel,
}

pub(crate) fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub samples: usize,
    pub seed: u64,
    pub dim: usize,
    pub profile: TolProfile,
    /// `(check name, tolerance)` replacing profile values.
    pub overrides: Vec<(String, f64)>,
    pub execution: Execution,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            dim: DEFAULT_DIM,
            profile: TolProfile::Jet,
            overrides: Vec::new(),
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub metric: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub checks: Vec<Check>,
    pub k_expected: Option<f64>,
    pub k_fit_mean: Option<f64>,
    pub k_fit_max_dev: Option<f64>,
    pub pass: bool,
    pub wall_time_ms: u64,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub schema: &'static str,
    pub metric: String,
    pub grid: [usize; 2],
    pub b_range: [f64; 2],
    pub points: usize,
    pub skipped: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time_ms: u64,
}

impl ScanReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Ordered tolerances of one run.
struct Tolerances(Vec<(&'static str, f64)>);

impl Tolerances {
    fn new(base: Vec<(&'static str, f64)>, overrides: &[(String, f64)]) -> Result<Self> {
        let mut t = Tolerances(base);
        for (name, v) in overrides {
            if !(*v >= 0.0) {
                return Err(Error::InvalidArgument(format!("tolerance for '{name}' must be >= 0")));
            }
            match t.0.iter_mut().find(|(n, _)| n == name) {
                Some(slot) => slot.1 = *v,
                None => {
                    let known: Vec<_> = t.0.iter().map(|(n, _)| *n).collect();
                    return Err(Error::InvalidArgument(format!(
                        "no check named '{name}' in this run (checks: {})",
                        known.join(", ")
                    )));
                }
            }
        }
        Ok(t)
    }

    fn index(&self, name: &str) -> usize {
        self.0.iter().position(|(n, _)| *n == name).expect("known check")
    }
}

/// Running maxima of residuals, in check order. NaN counts as infinite.
struct Maxima(Vec<f64>);

impl Maxima {
    fn new(n: usize) -> Self {
        Maxima(vec![0.0; n])
    }
    fn add(&mut self, i: usize, v: f64) {
        let v = if v.is_nan() { f64::INFINITY } else { v.abs() };
        self.0[i] = self.0[i].max(v);
    }
    fn finish(self, tol: &Tolerances) -> Vec<Check> {
        tol.0
            .iter()
            .zip(self.0)
            .map(|(&(name, tolerance), max_residual)| Check {
                name: name.to_string(),
                max_residual,
                tolerance,
                pass: max_residual <= tolerance,
            })
            .collect()
    }
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn metric_spec(entry: &CatalogEntry) -> Result<&MetricSpec> {
    match &entry.kind {
        EntryKind::Metric(m) => Ok(m),
        EntryKind::Deformation(_) => Err(Error::InvalidArgument(format!(
            "'{}' is a deformation entry; use deform-check",
            entry.name
        ))),
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("samples must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// Residuals of one verification sample, keyed by check name.
#[derive(Debug, Default)]
struct SampleOutcome {
    residuals: Vec<(&'static str, f64)>,
    k_fit: f64,
}

fn verify_sample(
    m: &GeneralABMetric,
    k_exp: f64,
    p: &Sample,
    cfg: &DiffConfig,
) -> Result<SampleOutcome> {
    let (x, y) = (&p.x[..], &p.y[..]);
    let pt = m.point(x, y)?;
    let (kappa, mu) = (m.chart.kappa(), m.chart.mu);
    let mut out = SampleOutcome::default();
    let mut put = |name, v| out.residuals.push((name, v));
    put("pde", residual_pde(&m.family, pt.b2, pt.s, cfg)?);
    put("pde2", residual_pde2(&m.family, pt.b2, pt.s, (kappa, mu, k_exp), cfg)?);
    let degenerate = m.regularity == Regularity::Degenerate;
    if !degenerate {
        let d = spray_direct(m, x, y, cfg)?;
        let f = spray_formula(m, x, y, cfg)?;
        put("spray", (&d - &f).amax() / (1.0 + d.amax()));
    }
    let r = riemann_tensor(m, x, y, cfg)?;
    let fit = fit_from_riemann(m, x, y, &r, cfg)?;
    let kp = projective_k(m, x, y, cfg)?;
    let ks = psi_k(m, x, y, cfg)?;
    put("k-tensor", fit.k - k_exp);
    put("k-fit-residual", fit_residual(m, &fit));
    put("k-projective", kp - k_exp);
    put("k-psi", ks - k_exp);
    put("route-agreement", (fit.k - kp).abs().max((kp - ks).abs()));
    if !degenerate {
        let g = fundamental_tensor(m, x, y, cfg)?;
        put("flag-spread", flag_spread(&r, &g, y, &p.u)?);
        if m.regularity == Regularity::Regular {
            put("positive-definite", (-definiteness_ratio(&g)).max(0.0));
        }
    }
    out.k_fit = fit.k;
    Ok(out)
}

/// Spread of the flag curvature over `u` and the coordinate directions.
fn flag_spread(r: &DMatrix<f64>, g: &DMatrix<f64>, y: &[f64], u: &[f64]) -> Result<f64> {
    let n = y.len();
    let mut ks = vec![flag_curvature_from(r, g, y, u)?];
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        // flags nearly containing y are ill-conditioned; the indefinite
        // region of singular metrics can also make a flag degenerate
        if y[k].abs() < 0.9 {
            if let Ok(v) = flag_curvature_from(r, g, y, &e) {
                ks.push(v);
            }
        }
    }
    let lo = ks.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo)
}

fn metric_tolerances(m: &MetricSpec, profile: TolProfile, overrides: &[(String, f64)]) -> Result<Tolerances> {
    let (eq, curv) = profile.tiers();
    let k_tol = match profile {
        TolProfile::Jet => m.k_tol,
        TolProfile::Fd => m.k_tol.max(curv),
    };
    let mut base = vec![("pde", eq), ("pde2", eq)];
    let degenerate = m.regularity == Regularity::Degenerate;
    if !degenerate {
        base.push(("spray", eq));
    }
    base.extend([
        ("k-tensor", k_tol),
        ("k-fit-residual", curv),
        ("k-projective", k_tol),
        ("k-psi", k_tol),
        ("route-agreement", curv),
    ]);
    if !degenerate {
        base.push(("flag-spread", curv));
        if m.regularity == Regularity::Regular {
            base.push(("positive-definite", 0.0));
        }
    }
    base.push(("evaluation-errors", 0.0));
    Tolerances::new(base, overrides)
}

fn admits(spec: &MetricSpec, m: &GeneralABMetric, x: &[f64], y: &[f64]) -> bool {
    m.point(x, y)
        .is_ok_and(|p| spec.chart.admits_direction(p.b2, p.s))
}

/// Runs every pointwise check of a metric entry at `opts.samples` points.
pub fn verify(entry: &CatalogEntry, opts: &Options) -> Result<VerificationReport> {
    let start = Instant::now();
    check_samples(opts.samples)?;
    let spec = metric_spec(entry)?;
    let m = entry.metric(opts.dim)?;
    let cfg = opts.profile.diff_config();
    let tol = metric_tolerances(spec, opts.profile, &opts.overrides)?;
    let k_exp = spec.expected_k;
    let outcomes = map_indexed(opts.samples, opts.execution, |i| {
        let p = draw(&spec.chart, &m.chart, opts.seed, i as u64, |x, y| admits(spec, &m, x, y))?;
        verify_sample(&m, k_exp, &p, &cfg)
    });
    let mut max = Maxima::new(tol.0.len());
    let errors = tol.index("evaluation-errors");
    let (mut sum, mut count, mut dev) = (0.0, 0usize, 0.0f64);
    for o in &outcomes {
        match o {
            Ok(o) => {
                for (name, v) in &o.residuals {
                    max.add(tol.index(name), *v);
                }
                sum += o.k_fit;
                count += 1;
                dev = dev.max((o.k_fit - k_exp).abs());
            }
            Err(_) => max.0[errors] += 1.0,
        }
    }
    let checks = max.finish(&tol);
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        schema: SCHEMA,
        metric: entry.name.clone(),
        n: opts.dim,
        samples: opts.samples,
        seed: opts.seed,
        rng: RNG_NAME,
        checks,
        k_expected: Some(k_exp),
        k_fit_mean: (count > 0).then(|| sum / count as f64),
        k_fit_max_dev: (count > 0).then_some(dev),
        pass,
        wall_time_ms: elapsed_ms(start),
    })
}

/// First error met while verifying, for diagnostics.
pub fn first_sample_error(entry: &CatalogEntry, opts: &Options) -> Result<Option<(u64, Error)>> {
    let spec = metric_spec(entry)?;
    let m = entry.metric(opts.dim)?;
    let cfg = opts.profile.diff_config();
    for i in 0..opts.samples as u64 {
        let r = draw(&spec.chart, &m.chart, opts.seed, i, |x, y| admits(spec, &m, x, y))
            .and_then(|p| verify_sample(&m, spec.expected_k, &p, &cfg));
        if let Err(e) = r {
            return Ok(Some((i, e)));
        }
    }
    Ok(None)
}

/// Range of `b` over the sampling ball, clipped to the entry's bounds.
pub fn b_range(spec: &ChartSpec, chart: &ProjectiveChart) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..B_PROBES as u64 {
        let p = draw(spec, chart, 0, i, |_, _| true)?;
        let b = chart.b_squared(&p.x).sqrt();
        lo = lo.min(b);
        hi = hi.max(b);
    }
    Ok((lo.max(spec.b_min), hi.min(spec.b_max)))
}

/// Residuals of every equation the entry's family must satisfy, on an
/// `nb x ns` grid of `(b^2, s)`, plus the (p, q) system for kappa = 0 pairs.
pub fn pde_scan(
    entry: &CatalogEntry,
    grid: (usize, usize),
    profile: TolProfile,
    overrides: &[(String, f64)],
) -> Result<ScanReport> {
    let start = Instant::now();
    let spec = metric_spec(entry)?;
    let (nb, ns) = grid;
    if nb < 2 || ns < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2x2 points".into()));
    }
    let chart = spec.chart.chart(spec.chart.native_dim())?;
    let (lo, hi) = b_range(&spec.chart, &chart)?;
    let cfg = profile.diff_config();
    let fam = &spec.family;
    let (kappa, mu, k) = (chart.kappa(), chart.mu, spec.expected_k);
    let kappa_zero = kappa.abs() <= 1e-12;
    let (eq, _) = profile.tiers();

    let mut base = vec![("pde", eq), ("pde2", eq), ("pde5", eq)];
    if kappa_zero && mu < 0.0 {
        base.push(("pde6", eq));
    }
    if mu == 0.0 && kappa > 0.0 {
        base.push(("pde-sigma", eq));
    }
    let pair = crate::catalog::pq_pair(fam);
    if pair.is_some() {
        base.extend([("ode-r1", eq), ("ode-r2", eq), ("ode-r3", eq)]);
    }
    if spec.regularity == Regularity::Regular {
        base.push(("regularity", 0.0));
    }
    base.push(("evaluation-errors", 0.0));
    let tol = Tolerances::new(base, overrides)?;
    let mut max = Maxima::new(tol.0.len());

    let pm_b = if spec.regularity == Regularity::SingularPmB { PM_B_MARGIN } else { 0.0 };
    let margin = pm_b.max(spec.chart.s_margin);
    let (mut points, mut skipped) = (0, 0);
    let (mut umin, mut umax) = (f64::INFINITY, 0.0f64);
    for ib in 0..nb {
        let b2 = lo * lo + (hi * hi - lo * lo) * (ib as f64 + 0.5) / nb as f64;
        let b = b2.sqrt();
        for is in 0..ns {
            let s = b * (1.0 - margin) * (-1.0 + 2.0 * (is as f64 + 0.5) / ns as f64);
            if crate::phi::eval_phi(fam, b2, s).is_err() {
                skipped += 1;
                continue;
            }
            points += 1;
            let u = b2 - s * s;
            umin = umin.min(u);
            umax = umax.max(u);
            let res = scan_point(fam, b2, s, u, (kappa, mu, k), kappa_zero, &cfg);
            match res {
                Ok(v) => {
                    for (name, r) in v {
                        if let Some(i) = tol.0.iter().position(|(n, _)| *n == name) {
                            max.add(i, r);
                        }
                    }
                }
                Err(_) => max.0[tol.index("evaluation-errors")] += 1.0,
            }
        }
    }
    // the system is checked on the u-interval the grid covers
    if let (Some(pair), true) = (pair, points > 0) {
        for i in 0..ODE_SAMPLES {
            let u = umin + (umax - umin) * i as f64 / (ODE_SAMPLES - 1) as f64;
            match residual_ode_system(pair, u) {
                Ok((r1, r2, r3)) => {
                    max.add(tol.index("ode-r1"), r1);
                    max.add(tol.index("ode-r2"), r2);
                    max.add(tol.index("ode-r3"), r3);
                }
                Err(Error::BranchUndefined(_)) => {}
                Err(_) => max.0[tol.index("evaluation-errors")] += 1.0,
            }
        }
    }
    if spec.regularity == Regularity::Regular {
        let rep = regularity_check(fam, (lo, hi), nb.max(ns), &cfg)?;
        max.add(tol.index("regularity"), (-rep.min_first.min(rep.min_second)).max(0.0));
    }
    if points == 0 {
        max.0[tol.index("evaluation-errors")] = f64::INFINITY;
    }
    let checks = max.finish(&tol);
    let pass = checks.iter().all(|c| c.pass);
    Ok(ScanReport {
        schema: SCHEMA,
        metric: entry.name.clone(),
        grid: [nb, ns],
        b_range: [lo, hi],
        points,
        skipped,
        checks,
        pass,
        wall_time_ms: elapsed_ms(start),
    })
}

fn scan_point(
    fam: &PhiFamily,
    b2: f64,
    s: f64,
    u: f64,
    (kappa, mu, k): (f64, f64, f64),
    kappa_zero: bool,
    cfg: &DiffConfig,
) -> Result<Vec<(&'static str, f64)>> {
    let mut v = vec![
        ("pde", residual_pde(fam, b2, s, cfg)?),
        ("pde2", residual_pde2(fam, b2, s, (kappa, mu, k), cfg)?),
        ("pde5", residual_pde5(fam, u, s, (kappa, mu, k), cfg)?),
    ];
    if kappa_zero && mu < 0.0 {
        v.push(("pde6", residual_pde6(fam, u, s, -k / mu, cfg)?));
    }
    if mu == 0.0 && kappa > 0.0 {
        v.push(("pde-sigma", eval_eqn01_residual(fam, u, s, k / kappa, cfg)?));
    }
    Ok(v)
}

/// Which certificate a deformation report carries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeformReport {
    pub schema: &'static str,
    pub metric: String,
    pub deformation: Deformation,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time_ms: u64,
}

impl DeformReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Certifies the outcome of the deformation of an entry's chart at
/// `opts.samples` points.
pub fn deform_check(entry: &CatalogEntry, opts: &Options) -> Result<DeformReport> {
    let start = Instant::now();
    check_samples(opts.samples)?;
    let pair = entry.deformation(opts.dim)?;
    let spec = entry.chart_spec();
    let cfg = opts.profile.diff_config();
    let fd = opts.profile == TolProfile::Fd;
    let covariant = match pair.kind {
        Deformation::Conformal => "conformal",
        Deformation::Parallel => "parallel",
    };
    let mut base = vec![
        ("flatness", if fd { 1e-4 } else { 1e-7 }),
        (covariant, if fd { 1e-6 } else { 1e-8 }),
        ("identity", 1e-10),
    ];
    if pair.kind == Deformation::Conformal {
        base.push(("round-trip", 1e-9));
    }
    base.push(("evaluation-errors", 0.0));
    let tol = Tolerances::new(base, &opts.overrides)?;
    let certs = map_indexed(opts.samples, opts.execution, |i| {
        let p = draw(spec, &pair.chart, opts.seed, i as u64, |x, y| pair.values(x, y).is_ok())?;
        certify(&pair, &p.x, &p.y, &cfg)
    });
    let mut max = Maxima::new(tol.0.len());
    for c in &certs {
        match c {
            Ok(c) => {
                max.add(0, c.curvature);
                max.add(1, c.covariant);
                max.add(2, c.identity);
                if let Some(rt) = c.round_trip {
                    max.add(3, rt);
                }
            }
            Err(_) => max.0[tol.index("evaluation-errors")] += 1.0,
        }
    }
    let checks = max.finish(&tol);
    let pass = checks.iter().all(|c| c.pass);
    Ok(DeformReport {
        schema: SCHEMA,
        metric: entry.name.clone(),
        deformation: pair.kind,
        n: opts.dim,
        samples: opts.samples,
        seed: opts.seed,
        rng: RNG_NAME,
        checks,
        pass,
        wall_time_ms: elapsed_ms(start),
    })
}

/// Every check name a report for this entry can carry, for `info`.
pub fn check_names(entry: &CatalogEntry) -> BTreeMap<&'static str, Vec<&'static str>> {
    let mut out = BTreeMap::new();
    if let EntryKind::Metric(m) = &entry.kind {
        if let Ok(t) = metric_tolerances(m, TolProfile::Jet, &[]) {
            out.insert("verify", t.0.iter().map(|(n, _)| *n).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    fn quick(samples: usize) -> Options {
        Options {
            samples,
            seed: 7,
            ..Options::default()
        }
    }

    #[test]
    fn funk_passes_and_is_deterministic() {
        let c = Catalog::builtin();
        let e = c.entry("funk").unwrap();
        let mut a = verify(e, &quick(8)).unwrap();
        assert!(a.pass, "{a:#?}");
        assert!((a.k_fit_mean.unwrap() + 0.25).abs() < 1e-8);
        let mut b = verify(
            e,
            &Options {
                execution: Execution::Sequential,
                ..quick(8)
            },
        )
        .unwrap();
        a.wall_time_ms = 0;
        b.wall_time_ms = 0;
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn overrides_must_name_a_check() {
        let c = Catalog::builtin();
        let e = c.entry("funk").unwrap();
        let mut o = quick(1);
        o.overrides = vec![("spray".into(), 0.0)];
        let r = verify(e, &o).unwrap();
        assert!(!r.pass && !r.check("spray").unwrap().pass);
        o.overrides = vec![("nonsense".into(), 1.0)];
        assert!(matches!(verify(e, &o), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn non_solution_fails_the_scan() {
        let mut c = Catalog::default();
        c.extend_from_str(
            r#"
            [metric.witness]
            mu = 0.0
            lambda = 1.0
            a = [0.2, 0.0, 0.0]
            expected_k = 0.0
            regularity = "regular"
            family = { kind = "custom", expr = "1 + s^2" }
            "#,
            "t",
        )
        .unwrap();
        let r = pde_scan(c.entry("witness").unwrap(), (6, 6), TolProfile::Jet, &[]).unwrap();
        assert!(!r.pass);
        assert!((r.check("pde").unwrap().max_residual - 2.0).abs() < 1e-9);
    }

    #[test]
    fn deform_entries_pass() {
        let c = Catalog::builtin();
        for name in ["conformal-mixed", "parallel-k0"] {
            let r = deform_check(c.entry(name).unwrap(), &quick(5)).unwrap();
            assert!(r.pass, "{r:#?}");
        }
    }
}
