//! System parameters shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical slack applied to the spacing and range constraints, in wavelengths.
pub const LAYOUT_TOLERANCE: f64 = 1e-9;

/// Physical parameters of the receiver and the jamming environment.
///
/// All lengths are expressed in wavelengths. `wavelength` only labels I/O;
/// the steering model depends on `x / λ` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub wavelength: f64,
    pub num_elements: usize,
    pub num_jammers: usize,
    pub region_size: f64,
    pub min_spacing: f64,
    pub noise_power: f64,
    /// Transmit power of the legitimate source (unit by default).
    pub source_power: f64,
    /// Transmit power of each jammer (unit by default).
    pub jammer_power: f64,
}

impl Default for SystemConfig {
    /// 8 elements, 3 jammers, a 7λ region with λ/2 minimum spacing, σ₀² = 0.1.
    fn default() -> Self {
        Self {
            wavelength: 1.0,
            num_elements: 8,
            num_jammers: 3,
            region_size: 7.0,
            min_spacing: 0.5,
            noise_power: 0.1,
            source_power: 1.0,
            jammer_power: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn with_elements(mut self, n: usize) -> Self {
        self.num_elements = n;
        self
    }

    pub fn with_jammers(mut self, k: usize) -> Self {
        self.num_jammers = k;
        self
    }

    pub fn with_region(mut self, l: f64) -> Self {
        self.region_size = l;
        self
    }

    pub fn with_noise_power(mut self, p: f64) -> Self {
        self.noise_power = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_elements == 0 {
            return bad("num_elements must be at least 1".into());
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return bad(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            ));
        }
        if !(self.min_spacing.is_finite() && self.min_spacing > 0.0) {
            return bad(format!(
                "min_spacing must be positive, got {}",
                self.min_spacing
            ));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return bad(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            ));
        }
        if !(self.source_power.is_finite() && self.source_power > 0.0)
            || !(self.jammer_power.is_finite() && self.jammer_power >= 0.0)
        {
            return bad("transmit powers must be finite and non-negative".into());
        }
        if !self.region_size.is_finite() {
            return bad("region_size must be finite".into());
        }
        let span = self.min_aperture();
        if span > self.region_size + LAYOUT_TOLERANCE {
            return bad(format!(
                "(N-1)*d_min = {span} exceeds region size {}",
                self.region_size
            ));
        }
        Ok(())
    }

    /// Aperture of the most compact feasible array, `(N-1)·d_min`.
    pub fn min_aperture(&self) -> f64 {
        (self.num_elements.saturating_sub(1)) as f64 * self.min_spacing
    }
}
