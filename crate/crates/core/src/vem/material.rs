use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lamé parameters `(λ, μ)` from Young's modulus and Poisson's ratio.
pub fn lame_from_engineering(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if !(young > 0.0) {
        return Err(Error::InvalidParameter(format!("Young modulus {young} must be positive")));
    }
    if !(poisson > 0.0 && poisson < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "Poisson ratio {poisson} outside (0, 0.5)"
        )));
    }
    let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mu = young / (2.0 * (1.0 + poisson));
    Ok((lambda, mu))
}

/// Homogeneous isotropic material in plane strain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub density: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl Material {
    pub fn new(density: f64, young: f64, poisson: f64) -> Result<Self> {
        let (lambda, mu) = lame_from_engineering(young, poisson)?;
        Self::from_lame(density, lambda, mu)
    }

    pub fn from_lame(density: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(density > 0.0) {
            return Err(Error::InvalidParameter(format!("density {density} must be positive")));
        }
        if !(mu > 0.0 && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Lamé pair ({lambda}, {mu}) not admissible"
            )));
        }
        Ok(Self {
            density,
            lambda,
            mu,
        })
    }

    /// Steel-like data of the square benchmark.
    pub fn steel() -> Self {
        Self::new(7.7e3, 1.44e11, 0.35).expect("valid constants")
    }

    /// Unit data of the vessel benchmark.
    pub fn unit() -> Self {
        Self::new(1.0, 1.0, 0.35).expect("valid constants")
    }

    /// Hooke tensor in Voigt form acting on `(ε_xx, ε_yy, γ_xy)`.
    pub fn voigt(&self) -> [[f64; 3]; 3] {
        let (l, m) = (self.lambda, self.mu);
        [[l + 2.0 * m, l, 0.0], [l, l + 2.0 * m, 0.0], [0.0, 0.0, m]]
    }

    /// Stress `(σ_xx, σ_yy, σ_xy)` of an engineering strain.
    pub fn stress(&self, strain: [f64; 3]) -> [f64; 3] {
        let c = self.voigt();
        std::array::from_fn(|i| (0..3).map(|j| c[i][j] * strain[j]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steel_lame() {
        let (l, m) = lame_from_engineering(1.44e11, 0.35).unwrap();
        // 1.44e11·0.35/(1.35·0.3) and 1.44e11/2.7
        assert!((l / 1.244_444_444_444e11 - 1.0).abs() < 1e-12);
        assert!((m / 5.333_333_333_333e10 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_lame() {
        let (l, m) = lame_from_engineering(1.0, 0.35).unwrap();
        assert!((l - 0.864_197_530_864).abs() < 1e-11);
        assert!((m - 0.370_370_370_370).abs() < 1e-11);
    }

    #[test]
    fn small_poisson_limit() {
        let (l, m) = lame_from_engineering(2.0, 1e-9).unwrap();
        assert!(l < 1e-8);
        assert!((m - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_incompressible() {
        assert!(lame_from_engineering(1.0, 0.5).is_err());
        assert!(lame_from_engineering(1.0, 0.7).is_err());
        assert!(lame_from_engineering(-1.0, 0.3).is_err());
        assert!(Material::new(0.0, 1.0, 0.3).is_err());
    }
}
