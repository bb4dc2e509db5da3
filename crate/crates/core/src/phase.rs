//! Discrete phase alphabets, the phase quantizer and the constant-modulus
//! decision variables (BS transmit vector, IRS reflection vector).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Angles closer than this (in bin units) to a bin boundary count as on it.
const BOUNDARY_SNAP: f64 = 1e-9;

/// `amplitude * exp(j 2 pi k / levels)`.
pub fn alphabet_point(k: usize, levels: usize, amplitude: f64) -> Complex64 {
    Complex64::from_polar(amplitude, TAU * k as f64 / levels as f64)
}

pub fn alphabet(levels: usize, amplitude: f64) -> Vec<Complex64> {
    (0..levels)
        .map(|k| alphabet_point(k, levels, amplitude))
        .collect()
}

/// Index of the quantization bin containing `theta`.
///
/// Bin `k` is the half-open arc `[(2k-1) pi / N, (2k+1) pi / N)`, so an angle
/// exactly on a boundary goes to the upper bin.
pub fn quantize_angle(theta: f64, levels: usize) -> usize {
    let t = theta * levels as f64 / TAU + 0.5;
    let nearest = t.round();
    let bin = if (t - nearest).abs() < BOUNDARY_SNAP {
        nearest
    } else {
        t.floor()
    };
    (bin as i64).rem_euclid(levels as i64) as usize
}

/// Argument in `(-pi, pi]`, with `arg(0) = 0`.
pub fn angle_of(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        0.0
    } else {
        let a = z.arg();
        if a <= -PI {
            a + TAU
        } else {
            a
        }
    }
}

pub fn quantize_index(z: Complex64, levels: usize) -> usize {
    quantize_angle(angle_of(z), levels)
}

/// Maps `z` to the alphabet point whose bin contains `arg(z)`.
pub fn quantize_phase(z: Complex64, levels: usize, amplitude: f64) -> Complex64 {
    alphabet_point(quantize_index(z, levels), levels, amplitude)
}

/// Phases of a constant-modulus vector, either on a discrete alphabet or
/// unrestricted (continuous-phase benchmark).
#[derive(Debug, Clone, PartialEq)]
pub enum Phases {
    Discrete { levels: usize, index: Vec<usize> },
    Continuous(Vec<f64>),
}

impl Phases {
    pub fn discrete(levels: usize, index: Vec<usize>) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidArgument(format!(
                "alphabet size {levels} < 2"
            )));
        }
        if let Some(&bad) = index.iter().find(|&&k| k >= levels) {
            return Err(Error::IndexOutOfRange {
                what: "phase",
                index: bad,
                len: levels,
            });
        }
        Ok(Phases::Discrete { levels, index })
    }

    pub fn zeros(levels: usize, len: usize) -> Self {
        Phases::Discrete {
            levels,
            index: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Phases::Discrete { index, .. } => index.len(),
            Phases::Continuous(angles) => angles.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Phases::Discrete { .. })
    }

    pub fn values(&self, amplitude: f64) -> Vec<Complex64> {
        match self {
            Phases::Discrete { levels, index } => index
                .iter()
                .map(|&k| alphabet_point(k, *levels, amplitude))
                .collect(),
            Phases::Continuous(angles) => angles
                .iter()
                .map(|&t| Complex64::from_polar(amplitude, t))
                .collect(),
        }
    }
}

/// Constant-envelope BS transmit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CeVector {
    pub amplitude: f64,
    pub phases: Phases,
}

impl CeVector {
    pub fn discrete(levels: usize, index: Vec<usize>, amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "amplitude {amplitude} must be > 0"
            )));
        }
        Ok(CeVector {
            amplitude,
            phases: Phases::discrete(levels, index)?,
        })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.phases.values(self.amplitude)
    }
}

/// IRS reflection coefficients (unit modulus).
#[derive(Debug, Clone, PartialEq)]
pub struct IrsPhases {
    pub phases: Phases,
}

impl IrsPhases {
    pub fn discrete(levels: usize, index: Vec<usize>) -> Result<Self> {
        Ok(IrsPhases {
            phases: Phases::discrete(levels, index)?,
        })
    }

    pub fn identity(levels: usize, elements: usize) -> Self {
        IrsPhases {
            phases: Phases::zeros(levels, elements),
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.phases.values(1.0)
    }
}
