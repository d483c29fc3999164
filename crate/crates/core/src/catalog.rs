//! Named metrics and deformation charts.
//!
//! The built-in entries live in `catalog.toml`; extra files listed in the
//! `FINSLER_LAB_CATALOG` environment variable (path-list syntax) are read
//! with the same loader, so new sign branches can be tried without
//! recompiling.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::deform::{deform_nonzero, deform_zero, Deformation, DeformedPair};
use crate::error::{Error, Result};
use crate::finsler::{GeneralABMetric, Regularity};
use crate::phi::{PhiFamily, PqPair};
use crate::riemann::ProjectiveChart;

pub const CATALOG_ENV: &str = "FINSLER_LAB_CATALOG";

const BUILTIN: &str = include_str!("catalog.toml");

/// Two curvature constants closer than this are considered equal when an
/// entry's `expected_k` is checked against its family.
const K_CONSISTENCY: f64 = 1e-12;

fn default_radius() -> f64 {
    0.3
}

fn default_k_tol() -> f64 {
    1e-6
}

fn default_b_max() -> f64 {
    f64::INFINITY
}

/// Chart parameters and the region sampled for `x`. `a` may be shorter or
/// longer than the working dimension: it is padded with zeros, and trailing
/// components may be dropped only if they vanish.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub mu: f64,
    pub lambda: f64,
    pub a: Vec<f64>,
    /// `x` is drawn from the Euclidean ball of this radius.
    #[serde(default = "default_radius")]
    pub x_radius: f64,
    #[serde(default)]
    pub b_min: f64,
    #[serde(default = "default_b_max", skip_serializing_if = "is_infinite")]
    pub b_max: f64,
    /// Directions are restricted to `|s| <= (1 - s_margin) b`.
    #[serde(default)]
    pub s_margin: f64,
}

fn is_infinite(v: &f64) -> bool {
    v.is_infinite()
}

impl ChartSpec {
    /// Whether `s = beta/alpha` lies inside the entry's direction margin.
    pub fn admits_direction(&self, b2: f64, s: f64) -> bool {
        s.abs() <= (1.0 - self.s_margin) * b2.sqrt()
    }

    pub fn chart(&self, n: usize) -> Result<ProjectiveChart> {
        let mut a = self.a.clone();
        if a.len() > n {
            if a[n..].iter().any(|v| *v != 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "a = {:?} has non-zero components beyond dimension {n}",
                    self.a
                )));
            }
            a.truncate(n);
        }
        a.resize(n, 0.0);
        ProjectiveChart::new(n, self.mu, self.lambda, a)
    }

    /// Dimension implied by `a`.
    pub fn native_dim(&self) -> usize {
        self.a.len()
    }

    pub fn kappa(&self) -> f64 {
        self.lambda * self.lambda + self.mu * self.a.iter().map(|v| v * v).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricSpec {
    pub description: String,
    #[serde(flatten)]
    pub chart: ChartSpec,
    pub family: PhiFamily,
    pub expected_k: f64,
    /// Tolerance on `|K - expected_k|` for every curvature route.
    pub k_tol: f64,
    pub regularity: Regularity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeformSpec {
    pub description: String,
    pub deformation: Deformation,
    #[serde(flatten)]
    pub chart: ChartSpec,
}

/// A table as written in a catalog file; `flatten` cannot be combined with
/// `deny_unknown_fields`, so every field is listed here.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    #[serde(default)]
    description: String,
    mu: f64,
    lambda: f64,
    a: Vec<f64>,
    #[serde(default = "default_radius")]
    x_radius: f64,
    #[serde(default)]
    b_min: f64,
    #[serde(default = "default_b_max")]
    b_max: f64,
    #[serde(default)]
    s_margin: f64,
    family: Option<PhiFamily>,
    expected_k: Option<f64>,
    #[serde(default = "default_k_tol")]
    k_tol: f64,
    regularity: Option<Regularity>,
    deformation: Option<Deformation>,
}

impl RawEntry {
    fn chart(&self) -> ChartSpec {
        ChartSpec {
            mu: self.mu,
            lambda: self.lambda,
            a: self.a.clone(),
            x_radius: self.x_radius,
            b_min: self.b_min,
            b_max: self.b_max,
            s_margin: self.s_margin,
        }
    }

    fn into_metric(self) -> std::result::Result<MetricSpec, String> {
        if self.deformation.is_some() {
            return Err("'deformation' belongs to deformation entries".into());
        }
        let chart = self.chart();
        Ok(MetricSpec {
            description: self.description,
            chart,
            family: self.family.ok_or("missing field 'family'")?,
            expected_k: self.expected_k.ok_or("missing field 'expected_k'")?,
            k_tol: self.k_tol,
            regularity: self.regularity.ok_or("missing field 'regularity'")?,
        })
    }

    fn into_deformation(self) -> std::result::Result<DeformSpec, String> {
        if self.family.is_some() || self.expected_k.is_some() || self.regularity.is_some() {
            return Err("deformation entries take no family, expected_k or regularity".into());
        }
        let chart = self.chart();
        Ok(DeformSpec {
            description: self.description,
            deformation: self.deformation.ok_or("missing field 'deformation'")?,
            chart,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EntryKind {
    Metric(MetricSpec),
    Deformation(DeformSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    #[serde(flatten)]
    pub kind: EntryKind,
}

/// One line of `list`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntrySummary {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub family: &'static str,
    pub expected_k: Option<f64>,
    pub regularity: Option<Regularity>,
    pub description: String,
}

impl CatalogEntry {
    pub fn chart_spec(&self) -> &ChartSpec {
        match &self.kind {
            EntryKind::Metric(m) => &m.chart,
            EntryKind::Deformation(d) => &d.chart,
        }
    }

    pub fn summary(&self) -> EntrySummary {
        match &self.kind {
            EntryKind::Metric(m) => EntrySummary {
                name: self.name.clone(),
                kind: "metric",
                family: m.family.label(),
                expected_k: Some(m.expected_k),
                regularity: Some(m.regularity),
                description: m.description.clone(),
            },
            EntryKind::Deformation(d) => EntrySummary {
                name: self.name.clone(),
                kind: "deformation",
                family: match d.deformation {
                    Deformation::Conformal => "conformal",
                    Deformation::Parallel => "parallel",
                },
                expected_k: None,
                regularity: None,
                description: d.description.clone(),
            },
        }
    }

    /// The metric in dimension `n`.
    pub fn metric(&self, n: usize) -> Result<GeneralABMetric> {
        match &self.kind {
            EntryKind::Metric(m) => Ok(GeneralABMetric::new(
                m.chart.chart(n)?,
                m.family.clone(),
                Some(m.expected_k),
                m.regularity,
            )),
            EntryKind::Deformation(_) => Err(Error::InvalidArgument(format!(
                "'{}' is a deformation entry, not a metric",
                self.name
            ))),
        }
    }

    /// The deformation of the entry's chart. Metric entries are routed by
    /// `kappa`; deformation entries must name the deformation matching their chart.
    pub fn deformation(&self, n: usize) -> Result<DeformedPair> {
        let chart = self.chart_spec().chart(n)?;
        let zero = chart.kappa().abs() <= 1e-12;
        let deformation = match &self.kind {
            EntryKind::Deformation(d) => d.deformation,
            EntryKind::Metric(_) if zero => Deformation::Parallel,
            EntryKind::Metric(_) => Deformation::Conformal,
        };
        match deformation {
            Deformation::Conformal => deform_nonzero(&chart),
            Deformation::Parallel => deform_zero(&chart),
        }
    }
}

/// The curvature a family yields on a chart, when the family determines it.
pub fn implied_k(family: &PhiFamily, mu: f64, kappa: f64) -> Option<f64> {
    match family {
        PhiFamily::Funk { sigma, .. } | PhiFamily::SolvedQ { sigma, .. } => Some(sigma * kappa),
        PhiFamily::Bryant => Some(kappa),
        PhiFamily::ShenEps { literal: false, .. } => Some(-kappa),
        PhiFamily::SquareB => Some(0.0),
        PhiFamily::KappaZero { pair, .. } => Some(-mu * pair.tau()),
        PhiFamily::Transfer { base, mu: m, .. } => implied_k(base, 0.0, 1.0).map(|k| k * m.abs()),
        _ => None,
    }
}

fn check_metric(name: &str, m: &MetricSpec) -> Result<()> {
    let bad = |msg: String| Err(Error::Config(format!("{name}: {msg}")));
    let (mu, kappa) = (m.chart.mu, m.chart.kappa());
    match &m.family {
        PhiFamily::Funk { .. }
        | PhiFamily::SolvedQ { .. }
        | PhiFamily::Bryant
        | PhiFamily::ShenEps { .. }
        | PhiFamily::InverseLinear { .. }
        | PhiFamily::InverseQuadratic { .. } => {
            if mu != 0.0 {
                return bad(format!("family '{}' needs a flat chart (mu = 0)", m.family.label()));
            }
        }
        PhiFamily::SquareB | PhiFamily::KappaZero { .. } => {
            if kappa.abs() > 1e-12 || mu >= 0.0 {
                return bad(format!(
                    "family '{}' needs lambda^2 + mu |a|^2 = 0 and mu < 0 (kappa = {kappa}, mu = {mu})",
                    m.family.label()
                ));
            }
        }
        PhiFamily::Transfer { mu: tm, kappa: tk, .. } => {
            if (tm - mu).abs() > 1e-12 || (tk - kappa).abs() > 1e-12 {
                return bad(format!(
                    "transfer parameters (mu, kappa) = ({tm}, {tk}) differ from the chart's ({mu}, {kappa})"
                ));
            }
        }
        PhiFamily::General { .. } | PhiFamily::Custom { .. } => {}
    }
    if let Some(k) = implied_k(&m.family, mu, kappa) {
        if (k - m.expected_k).abs() > K_CONSISTENCY {
            return bad(format!("expected_k = {} but the family yields {k}", m.expected_k));
        }
    }
    if !(m.k_tol > 0.0) {
        return bad("k_tol must be positive".into());
    }
    Ok(())
}

fn check_chart(name: &str, c: &ChartSpec) -> Result<()> {
    c.chart(c.native_dim())
        .map_err(|e| Error::Config(format!("{name}: {e}")))?;
    if !(c.x_radius > 0.0) || !(c.b_max > c.b_min) || !(0.0..1.0).contains(&c.s_margin) {
        return Err(Error::Config(format!("{name}: empty sampling domain")));
    }
    if c.mu > 0.0 && c.x_radius >= 1.0 {
        // keeps every sampled point inside the chart for any mu <= 1
        return Err(Error::Config(format!("{name}: x_radius must be < 1 when mu > 0")));
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn builtin() -> Self {
        let mut c = Catalog::default();
        c.extend_from_str(BUILTIN, "built-in catalog")
            .expect("built-in catalog is valid");
        c
    }

    /// Built-in entries plus every file in `FINSLER_LAB_CATALOG`.
    pub fn load() -> Result<Self> {
        let mut c = Self::builtin();
        if let Some(paths) = std::env::var_os(CATALOG_ENV) {
            for p in std::env::split_paths(&paths) {
                if !p.as_os_str().is_empty() {
                    c.extend_from_file(&p)?;
                }
            }
        }
        Ok(c)
    }

    pub fn extend_from_file(&mut self, path: &Path) -> Result<()> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.extend_from_str(&src, &path.display().to_string())
    }

    pub fn extend_from_str(&mut self, src: &str, origin: &str) -> Result<()> {
        let table: toml::Table =
            toml::from_str(src).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        for (section, body) in table {
            let body = match body {
                toml::Value::Table(t) => t,
                _ => return Err(Error::Config(format!("{origin}: '{section}' is not a table"))),
            };
            for (name, v) in body {
                let ctx = |e: String| Error::Config(format!("{origin}: {section}.{name}: {e}"));
                let raw: RawEntry = v.try_into().map_err(|e: toml::de::Error| ctx(e.to_string()))?;
                let kind = match section.as_str() {
                    "metric" => {
                        let mut m = raw.into_metric().map_err(ctx)?;
                        m.family
                            .prepare()
                            .map_err(|e| Error::Config(format!("{name}: {e}")))?;
                        check_chart(&name, &m.chart)?;
                        check_metric(&name, &m)?;
                        EntryKind::Metric(m)
                    }
                    "deformation" => {
                        let d = raw.into_deformation().map_err(ctx)?;
                        check_chart(&name, &d.chart)?;
                        EntryKind::Deformation(d)
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "{origin}: unknown section '{other}' (expected 'metric' or 'deformation')"
                        )))
                    }
                };
                if self.get(&name).is_some() {
                    return Err(Error::Config(format!("{origin}: duplicate entry '{name}'")));
                }
                self.entries.push(CatalogEntry { name, kind });
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn entry(&self, name: &str) -> Result<&CatalogEntry> {
        self.get(name)
            .ok_or_else(|| Error::UnknownMetric(name.to_string()))
    }

    pub fn metrics(&self) -> impl Iterator<Item = (&str, &MetricSpec)> {
        self.entries.iter().filter_map(|e| match &e.kind {
            EntryKind::Metric(m) => Some((e.name.as_str(), m)),
            _ => None,
        })
    }

    pub fn summaries(&self) -> Vec<EntrySummary> {
        self.entries.iter().map(CatalogEntry::summary).collect()
    }
}

/// The `(p, q)` pair of a kappa = 0 family, if any.
pub fn pq_pair(family: &PhiFamily) -> Option<&PqPair> {
    match family {
        PhiFamily::KappaZero { pair, .. } => Some(pair),
        _ => None,
    }
}
