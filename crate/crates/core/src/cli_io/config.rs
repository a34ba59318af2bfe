//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::dynamics::{sample_seeds, MapDescriptor, MapSpec, SemigroupSpec, DEFAULT_EXPM_TOL};
use crate::geometry::{vector, BodyDescriptor, ConvexBody, Location, Vector, DEFAULT_BOUNDARY_TOL};
use crate::horoballs::HoroballKind;
use crate::metrics::{MetricInstance, MetricKind, MetricSpace};
use crate::verify::VerifyParams;

/// Starting points: an explicit list, or `count` samples from the metric's
/// sampler under `rng_seed` (the run seed when absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SeedPolicy {
    Explicit { points: Vec<Vec<f64>> },
    Sampled { count: usize, rng_seed: Option<u64> },
}

impl Default for SeedPolicy {
    fn default() -> Self {
        SeedPolicy::Sampled { count: 10, rng_seed: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoroballConfig {
    /// Base point `z0`; the body's interior point when absent.
    pub pole: Option<Vec<f64>>,
    /// Boundary point `xi`.
    pub center: Vec<f64>,
    pub radius: f64,
    pub kind: HoroballKind,
    /// Grid cells per axis for the `horoball` grid.
    pub grid: usize,
}

impl Default for HoroballConfig {
    fn default() -> Self {
        Self { pole: None, center: Vec::new(), radius: 0.0, kind: HoroballKind::Big, grid: 20 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

/// Everything one run needs. Points are in the metric's own coordinates
/// (positive `(n + 1)`-vectors for `hilbert-cone`, `2k` reals for the
/// polydisc).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub body: Option<BodyDescriptor>,
    /// JSON body descriptor file, relative to the config file.
    pub body_file: Option<PathBuf>,
    pub metric: MetricKind,
    pub polydisc_dim: usize,
    pub kappa: f64,
    pub boundary_tol: f64,
    pub map: Option<MapDescriptor>,
    /// Semigroup generator rows.
    pub generator: Option<Vec<Vec<f64>>>,
    pub t0: f64,
    /// Sample times for semigroup orbits; `k * t0` for `k = 0..=n_steps`
    /// when absent.
    pub t_grid: Option<Vec<f64>>,
    pub expm_tol: f64,
    /// The two points of `dist`.
    pub points: Vec<Vec<f64>>,
    pub seeds: SeedPolicy,
    /// Bounded set for uniform convergence curves; the seeds when absent.
    pub test_set: Option<Vec<Vec<f64>>>,
    pub horoball: Option<HoroballConfig>,
    pub params: VerifyParams,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            body: None,
            body_file: None,
            metric: MetricKind::HilbertCrossRatio,
            polydisc_dim: 1,
            kappa: 0.0,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
            map: None,
            generator: None,
            t0: 1.0,
            t_grid: None,
            expm_tol: DEFAULT_EXPM_TOL,
            points: Vec::new(),
            seeds: SeedPolicy::default(),
            test_set: None,
            horoball: None,
            params: VerifyParams::default(),
            output: OutputConfig::default(),
        }
    }
}

fn config_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

impl ExperimentConfig {
    /// Parses a config file and inlines its body file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(rel) = cfg.body_file.take() {
            let full = path.parent().unwrap_or(Path::new(".")).join(rel);
            let text = std::fs::read_to_string(&full).map_err(|e| config_err(format!("{}: {e}", full.display())))?;
            let body = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", full.display())))?;
            if cfg.body.replace(body).is_some() {
                return Err(config_err("give either body or body_file, not both"));
            }
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(config_err)
    }

    /// SHA-256 of the canonical JSON of everything that affects results
    /// (the output location does not).
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        let canonical = serde_json::to_value(&c).expect("config serialises").to_string();
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn metric(&self) -> Result<MetricInstance, CliError> {
        let m = match self.metric {
            MetricKind::HilbertCrossRatio => {
                let desc = self.body.as_ref().ok_or_else(|| config_err("this command needs a body"))?;
                let body = ConvexBody::from_descriptor(desc).map_err(config_err)?;
                MetricInstance::hilbert(body.with_boundary_tol(self.boundary_tol))
            }
            MetricKind::HilbertCone => match self.body {
                Some(BodyDescriptor::Simplex { dimension }) => MetricInstance::hilbert_cone(dimension).map_err(config_err)?,
                _ => return Err(config_err("hilbert-cone needs a simplex body")),
            },
            MetricKind::PoincareDisc => MetricInstance::poincare_disc(),
            MetricKind::Polydisc => MetricInstance::polydisc(self.polydisc_dim),
        };
        Ok(m.with_kappa(self.kappa))
    }

    pub fn map_spec(&self) -> Result<MapSpec, CliError> {
        let d = self.map.as_ref().ok_or_else(|| config_err("this command needs a map"))?;
        MapSpec::from_descriptor(d).map_err(config_err)
    }

    pub fn semigroup(&self) -> Result<SemigroupSpec, CliError> {
        let rows = self.generator.as_ref().ok_or_else(|| config_err("this command needs a generator"))?;
        let mut sg = SemigroupSpec::from_rows(rows).map_err(config_err)?;
        sg.expm_tol = self.expm_tol;
        Ok(sg)
    }

    pub fn t_grid(&self) -> Result<Vec<f64>, CliError> {
        let grid = match &self.t_grid {
            Some(g) => g.clone(),
            None => (0..=self.params.dynamics.n_steps).map(|k| k as f64 * self.t0).collect(),
        };
        if grid.is_empty() || grid.iter().any(|t| !t.is_finite() || *t < 0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err("t_grid must be nonempty, nonnegative and increasing"));
        }
        Ok(grid)
    }

    pub fn seed_points(&self, metric: &MetricInstance, run_seed: u64) -> Result<Vec<Vector>, CliError> {
        match &self.seeds {
            SeedPolicy::Explicit { points } => interior_points(metric, points, "seeds"),
            SeedPolicy::Sampled { count: 0, .. } => Err(config_err("seed count must be positive")),
            SeedPolicy::Sampled { count, rng_seed } => Ok(sample_seeds(metric, *count, rng_seed.unwrap_or(run_seed))),
        }
    }

    pub fn test_points(&self, metric: &MetricInstance, seeds: &[Vector]) -> Result<Vec<Vector>, CliError> {
        match &self.test_set {
            Some(points) => interior_points(metric, points, "test_set"),
            None => Ok(seeds.to_vec()),
        }
    }
}

/// Parses `points` and requires each to lie in the open domain.
pub fn interior_points(metric: &MetricInstance, points: &[Vec<f64>], what: &str) -> Result<Vec<Vector>, CliError> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let v = point(metric, p, what)?;
            match metric.locate(&v).map_err(config_err)? {
                Location::Interior => Ok(v),
                loc => Err(config_err(format!("{what}[{i}] is not interior ({loc:?})"))),
            }
        })
        .collect()
}

/// Parses a point of the metric's coordinate dimension.
pub fn point(metric: &MetricInstance, p: &[f64], what: &str) -> Result<Vector, CliError> {
    if p.len() != metric.point_dim() {
        return Err(config_err(format!("{what}: expected {} coordinates, got {}", metric.point_dim(), p.len())));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(config_err(format!("{what}: non-finite coordinate")));
    }
    Ok(vector(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_unknown_keys() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert!(ExperimentConfig::from_json(r#"{"bodyy": null}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"params": {"dynamics": {"cluster_radiuss": 1}}}"#).is_err());
    }

    #[test]
    fn seed_policies_parse() {
        let c = ExperimentConfig::from_json(r#"{"seeds": {"points": [[0.5, 0.5]]}}"#).unwrap();
        assert_eq!(c.seeds, SeedPolicy::Explicit { points: vec![vec![0.5, 0.5]] });
        let c = ExperimentConfig::from_json(r#"{"seeds": {"count": 3, "rng_seed": 9}}"#).unwrap();
        assert_eq!(c.seeds, SeedPolicy::Sampled { count: 3, rng_seed: Some(9) });
        let c = ExperimentConfig::from_json(r#"{"seeds": {"count": 3}}"#).unwrap();
        assert_eq!(c.seeds, SeedPolicy::Sampled { count: 3, rng_seed: None });
    }

    #[test]
    fn digest_ignores_output_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.dir = Some("elsewhere".into());
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
        b.params.condc_tol = 1e-8;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn metric_construction() {
        let c = ExperimentConfig::from_json(r#"{"metric": "hilbert-cone", "body": {"type": "simplex", "dimension": 2}}"#).unwrap();
        assert_eq!(c.metric().unwrap().point_dim(), 3);
        let c = ExperimentConfig::from_json(r#"{"metric": "hilbert-cone", "body": {"type": "cube", "dimension": 2}}"#).unwrap();
        assert!(matches!(c.metric(), Err(CliError::Config(_))));
        assert!(matches!(ExperimentConfig::default().metric(), Err(CliError::Config(_))));
    }

    #[test]
    fn seeds_must_be_interior() {
        let c = ExperimentConfig::from_json(r#"{"body": {"type": "interval", "lo": -1, "hi": 1}, "seeds": {"points": [[0.0], [1.0]]}}"#)
            .unwrap();
        let m = c.metric().unwrap();
        assert!(c.seed_points(&m, 0).is_err());
    }
}
