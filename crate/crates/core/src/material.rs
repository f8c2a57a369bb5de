//! Material and load parameters, and the closed-form scalar quantities
//! (bending rigidity, flexural wavenumber) derived from them.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} must be strictly positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("poisson ratio must lie in (0, 0.5), got {0}")]
    PoissonOutOfRange(f64),
}

/// Isotropic thin plate material and thickness. Validated on construction;
/// downstream code relies on the invariants without re-checking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateMaterial {
    youngs_modulus: f64,
    poisson_ratio: f64,
    density: f64,
    thickness: f64,
}

impl PlateMaterial {
    /// `youngs_modulus` in Pa, `density` in kg/m³, `thickness` in m.
    pub fn new(
        youngs_modulus: f64,
        poisson_ratio: f64,
        density: f64,
        thickness: f64,
    ) -> Result<Self, ModelError> {
        let positive = [
            ("youngs_modulus", youngs_modulus),
            ("density", density),
            ("thickness", thickness),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NotPositive { name, value });
            }
        }
        if !(poisson_ratio > 0.0 && poisson_ratio < 0.5) {
            return Err(ModelError::PoissonOutOfRange(poisson_ratio));
        }
        Ok(Self {
            youngs_modulus,
            poisson_ratio,
            density,
            thickness,
        })
    }

    /// Steel plate used throughout the bundled experiments:
    /// E = 210 GPa, ν = 0.3, ρ = 7800 kg/m³, H = 2 mm.
    pub fn steel_2mm() -> Self {
        Self::new(210e9, 0.3, 7800.0, 0.002).expect("valid reference material")
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.youngs_modulus
    }

    pub fn poisson_ratio(&self) -> f64 {
        self.poisson_ratio
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    /// Bending rigidity per unit width, D = EH³ / 12(1−ν²), in N·m.
    pub fn bending_rigidity(&self) -> f64 {
        let h = self.thickness;
        self.youngs_modulus * h * h * h / (12.0 * (1.0 - self.poisson_ratio * self.poisson_ratio))
    }

    /// Mass per unit of plate surface, ρH, in kg/m².
    pub fn mass_per_area(&self) -> f64 {
        self.density * self.thickness
    }

    /// Flexural wavenumber k = (ρHω²/D)^(1/4) in rad/m.
    pub fn flexural_wavenumber(&self, frequency: Frequency) -> f64 {
        let omega = frequency.rad_per_s();
        (self.mass_per_area() * omega * omega / self.bending_rigidity()).powf(0.25)
    }

    /// Bending wavelength λ_b = 2π/k in m.
    pub fn bending_wavelength(&self, frequency: Frequency) -> f64 {
        2.0 * std::f64::consts::PI / self.flexural_wavenumber(frequency)
    }
}

/// Circular excitation frequency ω > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Frequency(f64);

impl Frequency {
    pub fn from_rad_per_s(omega: f64) -> Result<Self, ModelError> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(ModelError::NotPositive {
                name: "circular_frequency",
                value: omega,
            });
        }
        Ok(Self(omega))
    }

    pub fn from_hz(f: f64) -> Result<Self, ModelError> {
        Self::from_rad_per_s(2.0 * std::f64::consts::PI * f)
    }

    pub fn rad_per_s(&self) -> f64 {
        self.0
    }

    pub fn hz(&self) -> f64 {
        self.0 / (2.0 * std::f64::consts::PI)
    }
}

/// Transverse harmonic load. Point magnitudes are in N, distributed
/// magnitudes in N/m² (N/m on a unit-width strip). Point positions are
/// checked against the mesh when the load vector is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadSpec {
    Point { magnitude: f64, position: [f64; 2] },
    Uniform { magnitude: f64 },
}
