//! Benchmark drivers: uniform convergence on the unit square and adaptive
//! refinement on the vessel, plus report emission.

mod fit;
mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adapt::{adaptive_loop_with, AdaptiveConfig, AdaptiveStep, Strategy};
use crate::eig::{solve_smallest, EigOptions};
use crate::mesh::{
    generate_hexagonal_mesh, generate_trapezoidal_mesh, generate_triangle_mesh,
    generate_vessel_mesh_with, PolyMesh, VesselDirichlet,
};
use crate::vem::{assemble_with, AssemblyOptions, Material, StabilizationScaling};
use crate::{Error, Result};

pub use fit::{fit_convergence, fit_rate, ConvergenceFit, RateFit};
pub use report::{emit_report, Format, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Square,
    Vessel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFamily {
    Trapezoid,
    Hexagon,
    Triangle,
}

impl MeshFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Trapezoid => "trapezoid",
            Self::Hexagon => "hexagon",
            Self::Triangle => "triangle",
        }
    }

    pub fn generate(self, n: usize) -> Result<PolyMesh> {
        match self {
            Self::Trapezoid => generate_trapezoidal_mesh(n),
            Self::Hexagon => generate_hexagonal_mesh(n),
            Self::Triangle => generate_triangle_mesh(n),
        }
    }
}

impl std::str::FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapezoid" => Ok(Self::Trapezoid),
            "hexagon" => Ok(Self::Hexagon),
            "triangle" => Ok(Self::Triangle),
            other => Err(Error::InvalidParameter(format!("unknown mesh family {other:?}"))),
        }
    }
}

/// Engineering constants as they appear in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub density: f64,
    pub young: f64,
    pub poisson: f64,
}

impl MaterialParams {
    pub const STEEL: Self = Self { density: 7.7e3, young: 1.44e11, poisson: 0.35 };
    pub const UNIT: Self = Self { density: 1.0, young: 1.0, poisson: 0.35 };

    pub fn material(&self) -> Result<Material> {
        Material::new(self.density, self.young, self.poisson)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub domain: Domain,
    /// Square runs only; the vessel always starts from its coarse
    /// triangulation.
    pub family: MeshFamily,
    /// Vessel runs only.
    pub refinement: Vec<Strategy>,
    pub material: MaterialParams,
    pub num_modes: usize,
    /// Elements per side for square runs.
    pub mesh_sizes: Vec<usize>,
    /// Degree-of-freedom cap for vessel runs.
    pub max_dofs: usize,
    pub mark_fraction: f64,
    /// Known frequencies, lowest first; errors and effectivity use the first.
    pub reference: Vec<f64>,
    pub output_dir: PathBuf,
    pub vessel_dirichlet: VesselDirichlet,
    pub stabilization: StabilizationScaling,
    pub eig_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::square(MeshFamily::Trapezoid)
    }
}

impl ExperimentConfig {
    /// The uniform study on the unit square, steel, six modes.
    pub fn square(family: MeshFamily) -> Self {
        Self {
            domain: Domain::Square,
            family,
            refinement: vec![Strategy::Uniform],
            material: MaterialParams::STEEL,
            num_modes: 6,
            mesh_sizes: vec![16, 32, 64, 128],
            max_dofs: 25_000,
            mark_fraction: 0.5,
            reference: Vec::new(),
            output_dir: PathBuf::from("out"),
            vessel_dirichlet: VesselDirichlet::default(),
            stabilization: StabilizationScaling::default(),
            eig_tol: EigOptions::default().tol,
        }
    }

    /// The adaptive study on the vessel with unit material and all three
    /// strategies.
    pub fn vessel() -> Self {
        Self {
            domain: Domain::Vessel,
            family: MeshFamily::Triangle,
            refinement: vec![Strategy::Uniform, Strategy::Fem, Strategy::Vem],
            material: MaterialParams::UNIT,
            num_modes: 1,
            mesh_sizes: Vec::new(),
            reference: vec![0.1538],
            ..Self::square(MeshFamily::Triangle)
        }
    }

    /// Keys missing from `text` take the preset of the chosen domain.
    pub fn from_json(text: &str) -> Result<Self> {
        let given: serde_json::Value = serde_json::from_str(text)?;
        let serde_json::Value::Object(given) = given else {
            return Err(Error::InvalidParameter("config must be a JSON object".into()));
        };
        let preset = match given.get("domain").and_then(|d| d.as_str()) {
            Some("vessel") => Self::vessel(),
            _ => Self::square(MeshFamily::Trapezoid),
        };
        let serde_json::Value::Object(mut merged) = serde_json::to_value(preset)? else {
            unreachable!("config serializes to an object")
        };
        merged.extend(given);
        let config: Self = serde_json::from_value(serde_json::Value::Object(merged))?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.material.material()?;
        if self.num_modes == 0 {
            return Err(Error::InvalidParameter("num_modes must be at least 1".into()));
        }
        if !(self.eig_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("eig_tol {} must be positive", self.eig_tol)));
        }
        match self.domain {
            Domain::Square => {
                if self.mesh_sizes.is_empty() || self.mesh_sizes.contains(&0) {
                    return Err(Error::InvalidParameter("mesh_sizes must be nonempty and positive".into()));
                }
            }
            Domain::Vessel => {
                if self.refinement.is_empty() {
                    return Err(Error::InvalidParameter("refinement list is empty".into()));
                }
                if !(0.0..=1.0).contains(&self.mark_fraction) {
                    return Err(Error::InvalidParameter(format!(
                        "mark_fraction {} outside [0, 1]",
                        self.mark_fraction
                    )));
                }
            }
        }
        Ok(())
    }

    fn eig_options(&self, material: &Material) -> EigOptions {
        EigOptions {
            tol: self.eig_tol,
            ..EigOptions::default()
        }
        .with_normalization(material.density)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshRun {
    pub n: usize,
    pub dofs: usize,
    pub frequencies: Vec<f64>,
}

/// Frequencies per mesh size and one fit per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Test1Result {
    pub family: MeshFamily,
    pub runs: Vec<MeshRun>,
    /// `None` where fewer than three sizes were run.
    pub fits: Vec<Option<ConvergenceFit>>,
}

/// Solves the square problem on `family` with `n` elements per side.
pub fn solve_square(config: &ExperimentConfig, n: usize) -> Result<MeshRun> {
    let material = config.material.material()?;
    let mesh = config.family.generate(n)?;
    let options = AssemblyOptions {
        scaling: config.stabilization,
        dump_dir: None,
    };
    let system = assemble_with(&mesh, &material, &options)?;
    let solution = solve_smallest(&system.stiffness, &system.mass, config.num_modes, &config.eig_options(&material))?;
    Ok(MeshRun {
        n,
        dofs: system.num_dofs(),
        frequencies: solution.frequencies()?,
    })
}

pub fn run_test1(config: &ExperimentConfig) -> Result<Test1Result> {
    config.validate()?;
    if config.domain != Domain::Square {
        return Err(Error::InvalidParameter("uniform study needs the square domain".into()));
    }
    let runs = config
        .mesh_sizes
        .iter()
        .map(|&n| solve_square(config, n))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = runs.iter().map(|r| 1.0 / r.n as f64).collect();
    let modes = runs.iter().map(|r| r.frequencies.len()).min().unwrap_or(0);
    let fits = (0..modes)
        .map(|i| {
            if runs.len() < 3 {
                return Ok(None);
            }
            let values: Vec<f64> = runs.iter().map(|r| r.frequencies[i]).collect();
            fit_convergence(&h, &values).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Test1Result {
        family: config.family,
        runs,
        fits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub strategy: Strategy,
    pub steps: Vec<AdaptiveStep>,
    /// Error-vs-N exponent over all steps, when a reference is known.
    pub rate: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Test2Result {
    pub reference: Option<f64>,
    pub runs: Vec<StrategyRun>,
}

impl Test2Result {
    pub fn run(&self, strategy: Strategy) -> Option<&StrategyRun> {
        self.runs.iter().find(|r| r.strategy == strategy)
    }
}

pub fn adaptive_config(config: &ExperimentConfig, strategy: Strategy) -> Result<AdaptiveConfig> {
    let material = config.material.material()?;
    let mut adaptive = AdaptiveConfig::new(strategy, material);
    adaptive.mark_fraction = config.mark_fraction;
    adaptive.max_dofs = config.max_dofs;
    adaptive.reference_omega = config.reference.first().copied();
    adaptive.scaling = config.stabilization;
    adaptive.eig = EigOptions {
        tol: config.eig_tol,
        ..EigOptions::default()
    };
    Ok(adaptive)
}

/// Runs one strategy on the vessel; `observe` sees every step as it finishes.
pub fn run_strategy(
    config: &ExperimentConfig,
    strategy: Strategy,
    observe: impl FnMut(&AdaptiveStep, &PolyMesh),
) -> Result<StrategyRun> {
    let adaptive = adaptive_config(config, strategy)?;
    let mesh = generate_vessel_mesh_with(config.vessel_dirichlet)?;
    let steps = adaptive_loop_with(mesh, &adaptive, observe)?;
    let rate = match steps.iter().map(|s| s.error).collect::<Option<Vec<f64>>>() {
        Some(errors) if steps.len() >= 2 && errors.iter().all(|&e| e > 0.0) => {
            let dofs: Vec<f64> = steps.iter().map(|s| s.dofs as f64).collect();
            Some(fit_rate(&dofs, &errors)?)
        }
        _ => None,
    };
    Ok(StrategyRun { strategy, steps, rate })
}

pub fn run_test2(config: &ExperimentConfig) -> Result<Test2Result> {
    config.validate()?;
    if config.domain != Domain::Vessel {
        return Err(Error::InvalidParameter("adaptive study needs the vessel domain".into()));
    }
    #[cfg(feature = "parallel")]
    let runs = {
        use rayon::prelude::*;
        config
            .refinement
            .par_iter()
            .map(|&s| run_strategy(config, s, |_, _| {}))
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let runs = config
        .refinement
        .iter()
        .map(|&s| run_strategy(config, s, |_, _| {}))
        .collect::<Result<Vec<_>>>()?;
    Ok(Test2Result {
        reference: config.reference.first().copied(),
        runs,
    })
}
