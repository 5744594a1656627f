use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::TwobodyError;
use crate::numerics::quad::tanh_sinh_pieces;
use crate::numerics::{RadialField, RadialGrid};

/// Gaussian shapes are treated as vanishing beyond this many widths
/// (`exp(-6.5^2)` is below `1e-18`).
pub const GAUSSIAN_CUT: f64 = 6.5;

/// Fewest grid nodes allowed inside the scaled support.
pub const MIN_SUPPORT_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    SquareWell { radius: f64 },
    Gaussian { sigma: f64 },
    /// Linear interpolation of `(radii, values)`, zero beyond the last radius and
    /// constant below the first.
    UserTable { radii: Vec<f64>, values: Vec<f64> },
}

impl Shape {
    pub fn validate(&self) -> Result<(), TwobodyError> {
        match self {
            Shape::SquareWell { radius } if !(radius.is_finite() && *radius > 0.0) => Err(
                TwobodyError::InvalidSpec(format!("square well radius must be positive, got {radius}")),
            ),
            Shape::Gaussian { sigma } if !(sigma.is_finite() && *sigma > 0.0) => Err(
                TwobodyError::InvalidSpec(format!("gaussian width must be positive, got {sigma}")),
            ),
            Shape::UserTable { radii, values } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return Err(TwobodyError::InvalidSpec(
                        "user table needs at least two (radius, value) pairs of equal length".into(),
                    ));
                }
                if radii[0] < 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(TwobodyError::InvalidSpec(
                        "user table radii must be nonnegative and strictly increasing".into(),
                    ));
                }
                if radii.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(TwobodyError::NonIntegrable);
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            Shape::SquareWell { radius } => {
                if s <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Gaussian { sigma } => {
                let x = s / sigma;
                if x > GAUSSIAN_CUT {
                    0.0
                } else {
                    (-x * x).exp()
                }
            }
            Shape::UserTable { radii, values } => {
                let last = radii.len() - 1;
                if s > radii[last] {
                    0.0
                } else if s <= radii[0] {
                    values[0]
                } else {
                    let j = radii.partition_point(|r| *r < s);
                    let (r0, r1) = (radii[j - 1], radii[j]);
                    let t = (s - r0) / (r1 - r0);
                    values[j - 1] + t * (values[j] - values[j - 1])
                }
            }
        }
    }

    /// One-sided limits at `s`, used for nodes sitting on a discontinuity.
    fn limits(&self, s: f64) -> (f64, f64) {
        match self {
            Shape::SquareWell { radius } if s == *radius => (1.0, 0.0),
            Shape::UserTable { radii, values } if s == radii[radii.len() - 1] => {
                (values[values.len() - 1], 0.0)
            }
            _ => (self.value(s), self.value(s)),
        }
    }

    /// Radius used for the resolution check.
    pub fn range(&self) -> f64 {
        match self {
            Shape::SquareWell { radius } => *radius,
            Shape::Gaussian { sigma } => *sigma,
            Shape::UserTable { radii, .. } => radii[radii.len() - 1],
        }
    }

    /// Radius beyond which the shape vanishes.
    pub fn support(&self) -> f64 {
        match self {
            Shape::Gaussian { sigma } => GAUSSIAN_CUT * sigma,
            _ => self.range(),
        }
    }

    /// Discontinuities of the shape (in unscaled units).
    pub fn jumps(&self) -> Vec<f64> {
        match self {
            Shape::SquareWell { radius } => vec![*radius],
            Shape::Gaussian { .. } => Vec::new(),
            Shape::UserTable { radii, values } => {
                if values[values.len() - 1] != 0.0 {
                    vec![radii[radii.len() - 1]]
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Points where the shape is not smooth; quadrature is split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Shape::UserTable { radii, .. } => radii.clone(),
            _ => vec![self.support()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingClass {
    /// `-g eps^-3 shape(r / eps)`
    Strong,
    /// `-g eps^-2 shape(r / eps)`
    Weak,
    /// `-g shape(r)`; epsilon is ignored.
    Unscaled,
}

/// An attractive radial potential `-g * amplitude(eps) * shape(r / eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub shape: Shape,
    pub coupling: f64,
    pub scaling_class: ScalingClass,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    1.0
}

impl PotentialSpec {
    pub fn new(
        shape: Shape,
        coupling: f64,
        scaling_class: ScalingClass,
        epsilon: f64,
    ) -> Result<Self, TwobodyError> {
        let spec = Self {
            shape,
            coupling,
            scaling_class,
            epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unscaled(shape: Shape, coupling: f64) -> Self {
        Self {
            shape,
            coupling,
            scaling_class: ScalingClass::Unscaled,
            epsilon: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), TwobodyError> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(TwobodyError::InvalidSpec(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(TwobodyError::InvalidSpec(format!(
                "coupling must be finite and nonnegative, got {}",
                self.coupling
            )));
        }
        self.shape.validate()
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self {
            coupling,
            ..self.clone()
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    /// Length scale applied to the shape argument.
    pub fn length_scale(&self) -> f64 {
        match self.scaling_class {
            ScalingClass::Unscaled => 1.0,
            _ => self.epsilon,
        }
    }

    /// Depth multiplier `g eps^-3`, `g eps^-2` or `g`.
    pub fn amplitude(&self) -> f64 {
        let e = self.epsilon;
        match self.scaling_class {
            ScalingClass::Strong => self.coupling / (e * e * e),
            ScalingClass::Weak => self.coupling / (e * e),
            ScalingClass::Unscaled => self.coupling,
        }
    }

    /// `V(r)`, negative inside the support.
    pub fn value(&self, r: f64) -> f64 {
        -self.amplitude() * self.shape.value(r / self.length_scale())
    }

    /// Discontinuities of `V` in physical units.
    pub fn jumps(&self) -> Vec<f64> {
        let s = self.length_scale();
        self.shape.jumps().into_iter().map(|j| j * s).collect()
    }

    /// Radius beyond which `V` vanishes.
    pub fn support(&self) -> f64 {
        self.shape.support() * self.length_scale()
    }

    /// Kinks and jumps of `V` in physical units, ending at the support.
    pub fn breakpoints(&self) -> Vec<f64> {
        let s = self.length_scale();
        self.shape.breakpoints().into_iter().map(|b| b * s).collect()
    }
}

/// Samples the scaled potential on the grid.
pub fn realize_potential(spec: &PotentialSpec, grid: &RadialGrid) -> Result<RadialField, TwobodyError> {
    spec.validate()?;
    let scale = spec.length_scale();
    let range = spec.shape.range() * scale;
    let inside = grid.nodes().iter().filter(|r| **r <= range).count();
    if inside < MIN_SUPPORT_NODES {
        return Err(TwobodyError::UnderResolved {
            range,
            nodes_inside: inside,
            needed: MIN_SUPPORT_NODES,
        });
    }
    let amp = spec.amplitude();
    let jumps = spec.jumps();
    let values = grid
        .nodes()
        .iter()
        .map(|&r| {
            let on_jump = jumps.iter().any(|j| (r - j).abs() <= 1e-12 * j);
            if on_jump {
                let (inner, outer) = spec.shape.limits(spec.shape.range());
                -amp * 0.5 * (inner + outer)
            } else {
                -amp * spec.shape.value(r / scale)
            }
        })
        .collect();
    Ok(RadialField::new(grid.clone(), values)?.with_jumps(jumps))
}

/// Norms that classify the contact limit of a scaled family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionNorms {
    /// `int |V| d^3x`
    pub l1: f64,
    /// `int int |V(x)| |V(y)| / |x - y|^2 d^3x d^3y`
    pub rollnik: f64,
}

/// `int_0^inf shape(s) s^2 ds`
fn shape_moment(shape: &Shape) -> f64 {
    let mut pts = vec![0.0];
    pts.extend(shape.breakpoints());
    tanh_sinh_pieces(|s| shape.value(s) * s * s, &pts, 1e-13)
}

/// `int int f(r) f(s) r s ln|(r+s)/(r-s)| dr ds`; the logarithmic singularity on the
/// diagonal is handled by splitting the inner integral at `s = r`.
fn shape_rollnik_kernel(shape: &Shape) -> f64 {
    let mut pts = vec![0.0];
    pts.extend(shape.breakpoints());
    let inner = |r: f64| -> f64 {
        let mut cuts = pts.clone();
        cuts.push(r);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let f = |s: f64| {
            let d = (r - s).abs();
            if d == 0.0 {
                return 0.0;
            }
            shape.value(s) * s * ((r + s) / d).ln()
        };
        tanh_sinh_pieces(f, &cuts, 1e-12)
    };
    tanh_sinh_pieces(|r| shape.value(r) * r * inner(r), &pts, 1e-11)
}

/// L1 and Rollnik norms by quadrature in the unscaled variable.
///
/// The scaled family only enters through prefactors: `l1 = 4 pi A e^3 M` and
/// `rollnik = 8 pi^2 A^2 e^4 K` with amplitude `A`, length scale `e` and shape
/// integrals `M`, `K`.
pub fn extension_norms(spec: &PotentialSpec) -> Result<ExtensionNorms, TwobodyError> {
    spec.validate()?;
    let amp = spec.amplitude();
    if amp == 0.0 {
        return Ok(ExtensionNorms { l1: 0.0, rollnik: 0.0 });
    }
    let e = spec.length_scale();
    let abs_shape = match &spec.shape {
        Shape::UserTable { radii, values } => Shape::UserTable {
            radii: radii.clone(),
            values: values.iter().map(|v| v.abs()).collect(),
        },
        s => s.clone(),
    };
    let m = shape_moment(&abs_shape);
    let k = shape_rollnik_kernel(&abs_shape);
    if !(m.is_finite() && k.is_finite()) {
        return Err(TwobodyError::NonIntegrable);
    }
    let l1 = match spec.scaling_class {
        // amplitude times e^3 is exactly g for the strong class
        ScalingClass::Strong => 4.0 * PI * spec.coupling * m,
        _ => 4.0 * PI * amp * e.powi(3) * m,
    };
    let rollnik = match spec.scaling_class {
        ScalingClass::Weak => 8.0 * PI * PI * spec.coupling * spec.coupling * k,
        _ => 8.0 * PI * PI * amp * amp * e.powi(4) * k,
    };
    Ok(ExtensionNorms { l1, rollnik })
}
