use serde::{Deserialize, Serialize};

use crate::error::ParamsError;

/// Run configuration shared by every stage.
///
/// Angles are given in degrees here and converted to radians where used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Neighbors per point in the initial graph (also used for normal estimation and smoothing).
    pub k: usize,
    /// Edges longer than `r` times the mean edge length are culled.
    pub r: f64,
    /// Maximum angle between endpoint normals of a graph edge, in degrees.
    pub theta: f64,
    /// Handle candidates whose endpoints are at most `n` mesh edges apart are rejected.
    pub n: usize,
    /// Per-component genus limit; `None` means unbounded.
    pub max_genus: Option<usize>,
    /// Smooth the cloud and use projection distances.
    pub noisy: bool,
    pub quality_min_deg: f64,
    pub quality_max_deg: f64,
    /// Smoothing passes in the noisy path.
    pub smoothing_iterations: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            k: 30,
            r: 20.0,
            theta: 60.0,
            n: 50,
            max_genus: None,
            noisy: false,
            quality_min_deg: 5.0,
            quality_max_deg: 175.0,
            smoothing_iterations: 1,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.k < 2 {
            return Err(ParamsError::K(self.k));
        }
        if self.r.is_nan() || self.r <= 0.0 {
            return Err(ParamsError::R(self.r));
        }
        if !(self.theta > 0.0 && self.theta <= 180.0) {
            return Err(ParamsError::Theta(self.theta));
        }
        if !matches!(self.quality_min_deg.partial_cmp(&self.quality_max_deg), Some(std::cmp::Ordering::Less)) {
            return Err(ParamsError::Quality(self.quality_min_deg, self.quality_max_deg));
        }
        Ok(())
    }

    /// Whether the handle stage (and the two-thirds queue rule) is active.
    pub fn handles_enabled(&self) -> bool {
        self.max_genus != Some(0)
    }

    pub fn cos_theta(&self) -> f64 {
        self.theta.to_radians().cos()
    }
}
