//! Experiment configuration: a suite, a parameter grid and constants.

use std::path::{Path, PathBuf};

use ondemand_core::agnostic::AgnosticConfig;
use ondemand_core::oods::{AdversarialKind, LazyHedgeConfig, RegionKind};
use ondemand_core::realizable::RealizableConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Realizable,
    Agnostic,
    Oods,
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Suite::Realizable => "realizable",
            Suite::Agnostic => "agnostic",
            Suite::Oods => "oods",
        })
    }
}

/// Lists of values; each suite takes the product of the axes it reads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub k: Vec<usize>,
    pub r: Vec<usize>,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub m: Vec<usize>,
    pub region: Vec<RegionKind>,
    pub kind: Vec<AdversarialKind>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            k: vec![8],
            r: vec![1, 2, 3],
            eps: vec![0.1],
            delta: vec![0.1],
            c: vec![2.0],
            m: vec![4],
            region: vec![RegionKind::Box, RegionKind::Ellipsoid],
            kind: vec![AdversarialKind::LargeEps],
        }
    }
}

/// Instance family for the agnostic suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum AgnosticInstance {
    /// Planted linear instances; OPT is zero.
    Planted,
    /// Thresholds over `0..domain` with label noise; OPT by enumeration.
    Finite { domain: usize, noise: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Base difficulty of planted instances.
    pub d0: usize,
    /// Round parameter of the planted difficulty profile; defaults to
    /// `floor(log2 k)`.
    pub instance_r: Option<usize>,
    /// Ambient dimension; defaults to `ceil(dim_factor · d0 · ln k)`.
    pub dim: Option<usize>,
    pub dim_factor: f64,
    pub realizable: RealizableConfig,
    /// `lazy.c` is replaced by the grid's `C`.
    pub agnostic: AgnosticConfig,
    /// `c` is replaced by the grid's `C`.
    pub lazy: LazyHedgeConfig,
    pub instance: AgnosticInstance,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            d0: 16,
            instance_r: None,
            dim: None,
            dim_factor: ondemand_core::instances::DEFAULT_DIM_FACTOR,
            realizable: RealizableConfig::default(),
            agnostic: AgnosticConfig::default(),
            lazy: LazyHedgeConfig::default(),
            instance: AgnosticInstance::Planted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub grid: Grid,
    pub constants: Constants,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite: Suite::Realizable,
            trials: 10,
            seed: 0,
            grid: Grid::default(),
            constants: Constants::default(),
            out: None,
        }
    }
}

/// One cell of the grid, restricted to the axes its suite reads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "suite", rename_all = "snake_case")]
pub enum GridPoint {
    Realizable {
        k: usize,
        r: usize,
        eps: f64,
        delta: f64,
    },
    Agnostic {
        k: usize,
        eps: f64,
        c: f64,
        region: RegionKind,
    },
    Oods {
        k: usize,
        m: usize,
        kind: AdversarialKind,
        region: RegionKind,
        c: f64,
        eps: f64,
    },
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = None;
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        let g = &self.grid;
        let empty = |name: &str, n: usize| {
            if n == 0 {
                Err(HarnessError::Config(format!("grid axis `{name}` is empty")))
            } else {
                Ok(())
            }
        };
        empty("k", g.k.len())?;
        empty("eps", g.eps.len())?;
        match self.suite {
            Suite::Realizable => {
                empty("r", g.r.len())?;
                empty("delta", g.delta.len())?;
            }
            Suite::Agnostic => {
                empty("C", g.c.len())?;
                empty("region", g.region.len())?;
            }
            Suite::Oods => {
                empty("C", g.c.len())?;
                empty("m", g.m.len())?;
                empty("region", g.region.len())?;
                empty("kind", g.kind.len())?;
            }
        }
        Ok(())
    }

    /// Grid cells in row-major order of the suite's axes.
    pub fn points(&self) -> Vec<GridPoint> {
        let g = &self.grid;
        let mut out = Vec::new();
        match self.suite {
            Suite::Realizable => {
                for &k in &g.k {
                    for &r in &g.r {
                        for &eps in &g.eps {
                            for &delta in &g.delta {
                                out.push(GridPoint::Realizable { k, r, eps, delta });
                            }
                        }
                    }
                }
            }
            Suite::Agnostic => {
                for &k in &g.k {
                    for &eps in &g.eps {
                        for &c in &g.c {
                            for &region in &g.region {
                                out.push(GridPoint::Agnostic { k, eps, c, region });
                            }
                        }
                    }
                }
            }
            Suite::Oods => {
                for &k in &g.k {
                    for &m in &g.m {
                        for &kind in &g.kind {
                            for &region in &g.region {
                                for &c in &g.c {
                                    for &eps in &g.eps {
                                        out.push(GridPoint::Oods {
                                            k,
                                            m,
                                            kind,
                                            region,
                                            c,
                                            eps,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn instance_r(&self, k: usize) -> usize {
        self.constants
            .instance_r
            .unwrap_or_else(|| (usize::BITS - 1 - k.max(1).leading_zeros()) as usize)
            .max(1)
    }

    pub fn dimension(&self, k: usize) -> usize {
        self.constants.dim.unwrap_or_else(|| {
            ondemand_core::instances::default_dimension(self.constants.d0, k, self.constants.dim_factor)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml("suite = \"oods\"\ntrials = 3\n[grid]\nk = [16, 32]\nC = [2.0, 4.0]\n")
            .unwrap();
        assert_eq!(cfg.suite, Suite::Oods);
        assert_eq!(cfg.points().len(), 2 * 2 * 2);
        assert_eq!(cfg.grid.m, vec![4]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml("trials = 0").is_err());
        assert!(ExperimentConfig::from_toml("[grid]\nk = []").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("[grid]\nregion = [\"sphere\"]").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::default();
        cfg.constants.instance = AgnosticInstance::Finite { domain: 32, noise: 0.1 };
        cfg.constants.instance_r = Some(2);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn hash_ignores_output_path_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.out = Some("x.csv".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn instance_defaults() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.instance_r(8), 3);
        assert_eq!(cfg.instance_r(16), 4);
        assert_eq!(cfg.instance_r(12), 3);
        assert_eq!(cfg.dimension(8), 67);
        assert_eq!(cfg.dimension(16), 89);
    }
}
