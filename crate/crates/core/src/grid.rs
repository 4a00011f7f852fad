//! Radial grids graded towards the ring `r = 1`.
//!
//! Nodes are stored as offsets `ρ = r − 1` so that spacings of order 1e-9
//! next to the ring are represented without cancellation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("outer radius must be at least 2, got {0}")]
    OuterRadius(f64),
    #[error("invalid grid spacing parameter {name} = {value}")]
    Spacing { name: &'static str, value: f64 },
    #[error("grid offsets must be strictly increasing and start at r = 0")]
    NotIncreasing,
}

/// Description of a graded grid: uniform spacing in a core around the ring,
/// geometric growth outside it, capped at `max_spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub r_out: f64,
    pub core_spacing: f64,
    pub core_halfwidth: f64,
    pub growth: f64,
    pub max_spacing: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_out: 4.0,
            core_spacing: 5e-9,
            core_halfwidth: 2.5e-7,
            growth: 1.01,
            max_spacing: 0.02,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.r_out >= 2.0) || !self.r_out.is_finite() {
            return Err(GridError::OuterRadius(self.r_out));
        }
        let checks = [
            ("core_spacing", self.core_spacing, self.core_spacing > 0.0 && self.core_spacing < 0.1),
            ("core_halfwidth", self.core_halfwidth, self.core_halfwidth >= 0.0 && self.core_halfwidth < 0.5),
            ("growth", self.growth, self.growth >= 1.0 && self.growth <= 1.5),
            ("max_spacing", self.max_spacing, self.max_spacing >= self.core_spacing && self.max_spacing <= 0.5),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(GridError::Spacing { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    offsets: Vec<f64>,
    spacing: Vec<f64>,
    spec: Option<GridSpec>,
}

impl RadialGrid {
    pub fn graded(spec: GridSpec) -> Result<Self, GridError> {
        spec.validate()?;
        let outward = |limit: f64| -> Vec<f64> {
            let mut pts = vec![0.0];
            let mut h = spec.core_spacing;
            let mut x = 0.0;
            loop {
                if x >= spec.core_halfwidth {
                    h = (h * spec.growth).min(spec.max_spacing);
                }
                let next = x + h;
                if next >= limit - 0.5 * h {
                    pts.push(limit);
                    break;
                }
                pts.push(next);
                x = next;
            }
            pts
        };
        let inner = outward(1.0);
        let outer = outward(spec.r_out - 1.0);
        let mut offsets: Vec<f64> = inner.iter().rev().map(|x| -x).collect();
        offsets.extend_from_slice(&outer[1..]);
        let mut grid = Self::from_offsets(offsets)?;
        grid.spec = Some(spec);
        Ok(grid)
    }

    /// Uniform grid with `cells` intervals on `[0, r_out]`.
    pub fn uniform(r_out: f64, cells: usize) -> Result<Self, GridError> {
        if !(r_out >= 2.0) {
            return Err(GridError::OuterRadius(r_out));
        }
        if cells < 4 {
            return Err(GridError::Spacing { name: "cells", value: cells as f64 });
        }
        let h = r_out / cells as f64;
        let offsets = (0..=cells).map(|i| i as f64 * h - 1.0).collect();
        Self::from_offsets(offsets)
    }

    /// Builds a grid from ring offsets `ρᵢ = rᵢ − 1`; `ρ₀` must be `−1`.
    pub fn from_offsets(offsets: Vec<f64>) -> Result<Self, GridError> {
        if offsets.len() < 5 || offsets[0] != -1.0 {
            return Err(GridError::NotIncreasing);
        }
        let spacing: Vec<f64> = offsets.windows(2).map(|w| w[1] - w[0]).collect();
        if spacing.iter().any(|h| !(*h > 0.0)) {
            return Err(GridError::NotIncreasing);
        }
        if offsets[offsets.len() - 1] + 1.0 < 2.0 {
            return Err(GridError::OuterRadius(offsets[offsets.len() - 1] + 1.0));
        }
        Ok(Self { offsets, spacing, spec: None })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Interval lengths, `spacing()[i] = ρᵢ₊₁ − ρᵢ`.
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        1.0 + self.offsets[i]
    }

    pub fn radii(&self) -> Vec<f64> {
        self.offsets.iter().map(|x| 1.0 + x).collect()
    }

    pub fn r_out(&self) -> f64 {
        self.r(self.len() - 1)
    }

    pub fn spec(&self) -> Option<&GridSpec> {
        self.spec.as_ref()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the node nearest to radius `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let rho = r - 1.0;
        let i = self.offsets.partition_point(|&x| x < rho);
        if i == 0 {
            0
        } else if i >= self.len() {
            self.len() - 1
        } else if rho - self.offsets[i - 1] <= self.offsets[i] - rho {
            i - 1
        } else {
            i
        }
    }

    /// Spacing of the cell containing the ring.
    pub fn ring_spacing(&self) -> f64 {
        let i = self.offsets.partition_point(|&x| x <= 0.0).clamp(1, self.len() - 1);
        self.spacing[i - 1]
    }

    /// Same nodes with the near-ring core spacing halved.
    pub fn refined(&self) -> Option<Result<Self, GridError>> {
        self.spec.map(|s| {
            Self::graded(GridSpec {
                core_spacing: s.core_spacing / 2.0,
                growth: 1.0 + (s.growth - 1.0) / 2.0,
                max_spacing: s.max_spacing / 2.0,
                ..s
            })
        })
    }
}
