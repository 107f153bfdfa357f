//! Run configuration, read from a TOML file.
//!
//! ```toml
//! manifold = "torus2"          # or "circle"
//! grid = [64, 64]              # quadrature nodes per coordinate
//! directions = 720             # support samples for polygon generators
//!
//! [[spaces]]
//! kind = "trig"
//! degrees = [2, 0]
//! constant = true
//! inner_product = "normalized_l2"
//!
//! [[spaces]]
//! kind = "tabulated"
//! path = "basis.json"          # relative to the config file
//!
//! [mc]
//! trials = 10000
//! seed = 7
//! resolution = [512, 512]
//!
//! [ring]
//! generators = [{ space = 0 }, { space = 0, scale = 2.0 }, { segment = [1.0, 0.5] }]
//!
//! [density]
//! degree = 2
//! coefficients = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::function_space::InnerProductRule;
use crate::manifold::Manifold;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: Manifold,
    #[serde(default)]
    pub grid: Option<Vec<usize>>,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default)]
    pub spaces: Vec<SpaceConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub ring: Option<RingConfig>,
    #[serde(default)]
    pub density: Option<DensityConfig>,
    #[serde(default)]
    pub verify: VerifyScale,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_directions() -> usize {
    crate::convex::DEFAULT_DIRECTIONS
}

fn default_true() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    Trig {
        degrees: Vec<u32>,
        #[serde(default = "default_true")]
        constant: bool,
        #[serde(default)]
        inner_product: InnerProductRule,
    },
    Tabulated {
        path: PathBuf,
    },
}

/// Circle-only degree sweep for the expected-zeros table.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub degrees: Vec<u32>,
    #[serde(default = "default_true")]
    pub constant: bool,
    #[serde(default)]
    pub inner_product: InnerProductRule,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "McConfig::default_trials")]
    pub trials: usize,
    #[serde(default = "McConfig::default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub resolution: Option<Vec<usize>>,
    #[serde(default = "McConfig::default_refine_tol")]
    pub refine_tol: f64,
    /// Half-open intervals `[lo, hi)`, one per coordinate.
    #[serde(default)]
    pub domain: Option<Vec<[f64; 2]>>,
}

impl McConfig {
    fn default_trials() -> usize {
        20_000
    }
    fn default_seed() -> u64 {
        1
    }
    fn default_refine_tol() -> f64 {
        crate::zeros::DEFAULT_REFINE_TOL
    }
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: Self::default_trials(),
            seed: Self::default_seed(),
            resolution: None,
            refine_tol: Self::default_refine_tol(),
            domain: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub generators: Vec<GeneratorConfig>,
    #[serde(default = "RingConfig::default_kernel_tol")]
    pub kernel_tol: f64,
    /// Defaults to ten times the kernel tolerance.
    #[serde(default)]
    pub ideal_tol: Option<f64>,
}

impl RingConfig {
    fn default_kernel_tol() -> f64 {
        crate::ring::DEFAULT_KERNEL_TOL
    }
}

/// One generator: exactly one of `space`, `segment`, `ellipsoid`, `polygon`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Ellipsoid field of a configured space.
    #[serde(default)]
    pub space: Option<usize>,
    /// Constant segment `[-a, a]`.
    #[serde(default)]
    pub segment: Option<Vec<f64>>,
    /// Constant ellipsoid `{a : aᵀM⁻¹a ≤ 1}`, rows of `M`.
    #[serde(default)]
    pub ellipsoid: Option<Vec<Vec<f64>>>,
    /// Constant symmetric polygon, sampled at `directions` support directions.
    #[serde(default)]
    pub polygon: Option<Vec<[f64; 2]>>,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub degree: usize,
    /// Over the degree-`k` monomials of the ring generators, lexicographic.
    pub coefficients: Vec<f64>,
    /// Defaults to every node.
    #[serde(default)]
    pub nodes: Option<Vec<usize>>,
    /// Defaults to the first `k` coordinate vectors.
    #[serde(default)]
    pub frames: Option<Vec<Vec<Vec<f64>>>>,
    /// Second element for a separation search.
    #[serde(default)]
    pub compare: Option<Vec<f64>>,
    #[serde(default = "DensityConfig::default_budget")]
    pub budget: usize,
}

impl DensityConfig {
    fn default_budget() -> usize {
        200
    }
}

/// Problem sizes for the verification suite.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyScale {
    pub seed: u64,
    pub circle_degrees: Vec<u32>,
    pub circle_trials: usize,
    pub circle_nodes: usize,
    pub shape_degrees: Vec<u32>,
    pub torus_degrees: Vec<[u32; 2]>,
    pub torus_nodes: usize,
    pub torus_mc_degrees: [u32; 2],
    pub torus_trials: usize,
    pub torus_cells: usize,
    pub bridge_fields: usize,
    pub polarization_samples: usize,
    pub square_directions: usize,
    pub ring_families: usize,
    pub density_frames: usize,
    pub determinism_trials: usize,
    pub determinism_threads: Vec<usize>,
}

impl Default for VerifyScale {
    fn default() -> Self {
        Self {
            seed: 2024,
            circle_degrees: (1..=5).collect(),
            circle_trials: 20_000,
            circle_nodes: 256,
            shape_degrees: (1..=8).collect(),
            torus_degrees: vec![[1, 1], [1, 3], [2, 2], [2, 3], [3, 1], [3, 3]],
            torus_nodes: 64,
            torus_mc_degrees: [2, 3],
            torus_trials: 10_000,
            torus_cells: 512,
            bridge_fields: 20,
            polarization_samples: 200,
            square_directions: 3600,
            ring_families: 100,
            density_frames: 1000,
            determinism_trials: 2000,
            determinism_threads: vec![1, 4, 16],
        }
    }
}

/// Pass thresholds; every one is multiplied by `--tol-scale`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Monte Carlo agreement, in standard errors.
    pub mc_sigmas: f64,
    pub circle_seconds: f64,
    pub shape_spread: f64,
    pub factorization: f64,
    pub bridge: f64,
    pub polarization: f64,
    pub disk_square: f64,
    pub kernel: f64,
    pub ideal_factor: f64,
    pub density: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mc_sigmas: 3.0,
            circle_seconds: 60.0,
            shape_spread: 1e-6,
            factorization: 1e-6,
            bridge: 1e-8,
            polarization: 1e-10,
            disk_square: 1e-4,
            kernel: 1e-8,
            ideal_factor: 10.0,
            density: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mc_sigmas: self.mc_sigmas * s,
            circle_seconds: self.circle_seconds * s,
            shape_spread: self.shape_spread * s,
            factorization: self.factorization * s,
            bridge: self.bridge * s,
            polarization: self.polarization * s,
            disk_square: self.disk_square * s,
            kernel: self.kernel * s,
            ideal_factor: self.ideal_factor,
            density: self.density * s,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "OutputConfig::default_dir")]
    pub dir: PathBuf,
}

impl OutputConfig {
    fn default_dir() -> PathBuf {
        PathBuf::from("out")
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: Self::default_dir() }
    }
}

/// A parsed config with its origin.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
    /// SHA-256 of the config text, hex.
    pub hash: String,
}

impl LoadedConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base_dir)
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(Self { config, base_dir, hash })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

impl RunConfig {
    pub fn grid_counts(&self) -> Vec<usize> {
        self.grid.clone().unwrap_or_else(|| match self.manifold {
            Manifold::Circle => vec![256],
            Manifold::Torus2 => vec![64, 64],
        })
    }

    /// Schema checks that need more than the parser.
    pub fn validate(&self) -> Result<()> {
        let n = self.manifold.dim();
        if self.grid_counts().len() != n || self.grid_counts().contains(&0) {
            return Err(Error::config(format!("grid needs {n} positive node counts")));
        }
        if self.directions < 4 || self.directions % 2 == 1 {
            return Err(Error::config("directions must be even and at least 4"));
        }
        for (i, s) in self.spaces.iter().enumerate() {
            if let SpaceConfig::Trig { degrees, .. } = s {
                if degrees.len() != n {
                    return Err(Error::config(format!("space {i}: {n} degrees expected, got {}", degrees.len())));
                }
            }
        }
        if self.sweep.is_some() && self.manifold != Manifold::Circle {
            return Err(Error::config("degree sweeps are only defined on the circle"));
        }
        if self.mc.trials == 0 {
            return Err(Error::config("mc.trials must be at least 1"));
        }
        if let Some(r) = &self.mc.resolution {
            if r.len() != n {
                return Err(Error::config(format!("mc.resolution needs {n} entries")));
            }
        }
        if let Some(d) = &self.mc.domain {
            if d.len() != n {
                return Err(Error::config(format!("mc.domain needs {n} intervals")));
            }
        }
        if let Some(ring) = &self.ring {
            if ring.generators.is_empty() {
                return Err(Error::config("ring.generators is empty"));
            }
            for (i, g) in ring.generators.iter().enumerate() {
                let kinds = [g.space.is_some(), g.segment.is_some(), g.ellipsoid.is_some(), g.polygon.is_some()];
                if kinds.iter().filter(|&&k| k).count() != 1 {
                    return Err(Error::config(format!(
                        "generator {i}: give exactly one of space, segment, ellipsoid, polygon"
                    )));
                }
                if let Some(s) = g.space {
                    if s >= self.spaces.len() {
                        return Err(Error::config(format!("generator {i}: no space {s}")));
                    }
                }
                if !(g.scale >= 0.0) {
                    return Err(Error::config(format!("generator {i}: scale must be nonnegative")));
                }
            }
        }
        if self.density.is_some() && self.ring.is_none() {
            return Err(Error::config("density needs a [ring] section for its generators"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c =
            LoadedConfig::parse("manifold = \"circle\"\n[[spaces]]\nkind = \"trig\"\ndegrees = [3]\n", PathBuf::new())
                .unwrap();
        assert_eq!(c.config.grid_counts(), vec![256]);
        assert_eq!(c.config.mc.trials, 20_000);
        assert_eq!(c.hash.len(), 64);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            "manifold = \"circle\"\nbogus = 1\n",
            "manifold = \"circle\"\n[mc]\ntrails = 5\n",
            "manifold = \"circle\"\n[[spaces]]\nkind = \"trig\"\ndegrees = [1]\ncolour = 2\n",
            "manifold = \"circle\"\n[tolerances]\nbridge = 1e-8\nbrigde = 1\n",
        ] {
            let e = LoadedConfig::parse(text, PathBuf::new()).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn semantic_checks() {
        assert!(LoadedConfig::parse("manifold = \"torus2\"\ngrid = [8]\n", PathBuf::new()).is_err());
        assert!(LoadedConfig::parse("manifold = \"circle\"\n[ring]\ngenerators = [{ space = 0 }]\n", PathBuf::new())
            .is_err());
        assert!(LoadedConfig::parse(
            "manifold = \"circle\"\n[ring]\ngenerators = [{ segment = [1.0], ellipsoid = [[1.0]] }]\n",
            PathBuf::new()
        )
        .is_err());
    }

    #[test]
    fn tolerance_scaling() {
        let t = Tolerances::default().scaled(2.0);
        assert_eq!(t.bridge, 2e-8);
        assert_eq!(t.mc_sigmas, 6.0);
    }
}
