//! JSON run configuration for the command-line front-end.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::grid::{BoundaryData, VoxelDomain};
use crate::io::read_boundary_csv;
use crate::mhd::{ExponentMode, MHDParams};
use crate::quaternion::Quaternion;
use crate::solvers::SolverConfig;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub origin: [f64; 3],
    pub extent: [f64; 3],
    pub n: [usize; 3],
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { origin: [0.0; 3], extent: [1.0; 3], n: [16; 3] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub re: f64,
    pub rm: f64,
    pub mu0: f64,
    pub exponent_mode: ExponentMode,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig { re: 1.0, rm: 1.0, mu0: 1.0, exponent_mode: ExponentMode::Linear }
    }
}

/// Wall values of the magnetic field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundaryConfig {
    #[default]
    Zero,
    /// `face,s,v1,v2,v3` CSV in the domain's face order.
    File { path: PathBuf },
    /// `h(x) = M x + c` (vector part only), evaluated at the face centres.
    Affine { matrix: [[f64; 3]; 3], offset: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    /// Random fields per sampled ratio.
    pub samples: usize,
    /// Fresh fields for the holdout check of `Cs`.
    pub holdout: usize,
    /// Norm budget `||u||_H1` at which the conditions are pre-evaluated.
    pub u_budget: f64,
    /// Norm budget `sup ||B||_H1` for the field-size conditions.
    pub b_budget: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig { samples: 20, holdout: 100, u_budget: 0.1, b_budget: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub params: ParamsConfig,
    pub boundary: BoundaryConfig,
    pub solver: SolverConfig,
    pub constants: ConstantsConfig,
    /// Directory of a previously exported state to start from; zero state when absent.
    pub init: Option<PathBuf>,
    pub output: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainConfig::default(),
            params: ParamsConfig::default(),
            boundary: BoundaryConfig::default(),
            solver: SolverConfig::default(),
            constants: ConstantsConfig::default(),
            init: None,
            output: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// Loads a config file; relative paths inside it are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let BoundaryConfig::File { path } = &mut cfg.boundary {
            fix(path);
        }
        if let Some(p) = &mut cfg.init {
            fix(p);
        }
        fix(&mut cfg.output);
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Every field with its default value.
    pub fn reference_json() -> String {
        RunConfig::default().to_json()
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.solver.validate()?;
        if self.constants.samples < 10 {
            return Err(Error::Precondition("constants.samples must be at least 10".into()));
        }
        if let BoundaryConfig::File { path } = &self.boundary {
            if !path.is_file() {
                return Err(Error::Precondition(format!("boundary file {} does not exist", path.display())));
            }
        }
        if let Some(p) = &self.init {
            if !p.join("state.manifest").is_file() {
                return Err(Error::Precondition(format!("initial state {} has no state.manifest", p.display())));
            }
        }
        Ok(())
    }

    pub fn build_domain(&self) -> Result<VoxelDomain, Error> {
        VoxelDomain::build(self.domain.origin, self.domain.extent, self.domain.n)
    }

    pub fn boundary_data(&self, domain: &VoxelDomain) -> Result<BoundaryData, Error> {
        match &self.boundary {
            BoundaryConfig::Zero => Ok(BoundaryData::zeros(domain)),
            BoundaryConfig::File { path } => read_boundary_csv(path, domain),
            BoundaryConfig::Affine { matrix, offset } => Ok(BoundaryData::from_fn(domain, |x| {
                let v = [0, 1, 2].map(|i| matrix[i][0] * x[0] + matrix[i][1] * x[1] + matrix[i][2] * x[2] + offset[i]);
                Quaternion::pure(v)
            })),
        }
    }

    pub fn build_params(&self, domain: &VoxelDomain) -> Result<MHDParams, Error> {
        let p = &self.params;
        MHDParams::new(p.re, p.rm, p.mu0, self.boundary_data(domain)?, p.exponent_mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let r = RunConfig::reference_json();
        assert_eq!(RunConfig::from_json(&r).unwrap(), RunConfig::default());
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
        assert!(RunConfig::from_json(r#"{"unknown": 1}"#).is_err());
    }

    #[test]
    fn partial_config() {
        let c = RunConfig::from_json(
            r#"{"domain": {"n": [8, 8, 8]}, "solver": {"method": "schauder_neumann"},
                "boundary": {"kind": "affine", "matrix": [[0,1,0],[0,0,1],[1,0,0]], "offset": [0,0,0]}}"#,
        )
        .unwrap();
        assert_eq!(c.domain.n, [8, 8, 8]);
        assert_eq!(c.domain.extent, [1.0; 3]);
        assert_eq!(c.solver.tol, 1e-8);
        let d = c.build_domain().unwrap();
        let h = c.boundary_data(&d).unwrap();
        let f = &d.boundary_faces[0];
        assert_eq!(h.values[0], Quaternion::pure([f.center[1], f.center[2], f.center[0]]));
    }
}
