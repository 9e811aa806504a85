//! 2π-periodic boundary curves, their derivatives, and starlike radial curves.
//!
//! All curves are parametrized counterclockwise. The unit normal returned in
//! a [`CurveSample`] is `ν = (x₂′, −x₁′)/|x′|`, which points away from the
//! region enclosed by the curve.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Names accepted by [`make_shape`].
pub const SHAPE_NAMES: [&str; 6] = [
    "circle",
    "peanut",
    "apple",
    "rounded_rectangle",
    "kite1",
    "kite2",
];

/// Position and derivatives of a curve at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub point: Point,
    pub d1: Point,
    pub d2: Point,
    pub speed: f64,
    pub normal: Point,
}

impl CurveSample {
    fn from_derivatives(point: Point, d1: Point, d2: Point) -> Result<Self> {
        let speed = d1.norm();
        if !(speed > 0.0) || !speed.is_finite() {
            return Err(Error::DegenerateCurve(format!(
                "speed {speed} at point ({}, {})",
                point.x, point.y
            )));
        }
        let normal = Point::new(d1.y, -d1.x) / speed;
        Ok(Self {
            point,
            d1,
            d2,
            speed,
            normal,
        })
    }
}

/// Trigonometric basis `τⱼ`: `1, cos s, …, cos Js, sin s, …, sin Js`.
pub fn basis(j: usize, degree: usize, s: f64) -> f64 {
    if j == 0 {
        1.0
    } else if j <= degree {
        (j as f64 * s).cos()
    } else {
        ((j - degree) as f64 * s).sin()
    }
}

/// Starlike curve `r(s)(cos s, sin s)` with `r = Σ qⱼ τⱼ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCurve {
    pub coeffs: Vec<f64>,
}

impl RadialCurve {
    /// Builds a radial curve from `2J+1` coefficients.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::Shape {
                expected: 2 * (coeffs.len() / 2) + 1,
                got: coeffs.len(),
            });
        }
        Ok(Self { coeffs })
    }

    /// Circle of radius `r0` expressed in a degree-`J` basis.
    pub fn circle(r0: f64, degree: usize) -> Self {
        let mut coeffs = vec![0.0; 2 * degree + 1];
        coeffs[0] = r0;
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// `(r, r′, r″)` at `s`.
    pub fn radius_derivatives(&self, s: f64) -> (f64, f64, f64) {
        let degree = self.degree();
        let mut r = self.coeffs[0];
        let mut dr = 0.0;
        let mut ddr = 0.0;
        for k in 1..=degree {
            let kf = k as f64;
            let (sin, cos) = (kf * s).sin_cos();
            let a = self.coeffs[k];
            let b = self.coeffs[degree + k];
            r += a * cos + b * sin;
            dr += kf * (b * cos - a * sin);
            ddr -= kf * kf * (a * cos + b * sin);
        }
        (r, dr, ddr)
    }

    pub fn radius(&self, s: f64) -> f64 {
        self.radius_derivatives(s).0
    }
}

/// A closed boundary curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Curve {
    Circle { center: [f64; 2], radius: f64 },
    /// `r(s) = √((0.5 cos s)² + (0.25 sin s)²)`
    Peanut { center: [f64; 2] },
    /// `r(s) = (0.45 + 0.3 cos s − 0.1 sin 2s)/(1 + 0.7 cos s)`
    Apple { center: [f64; 2] },
    /// `r(s) = (cos¹⁰ s + sin¹⁰ s)^{-0.1}`
    RoundedRectangle { center: [f64; 2] },
    /// `scale·(cos s + bend·cos 2s − 0.5, stretch·sin s)`
    Kite {
        center: [f64; 2],
        scale: f64,
        bend: f64,
        stretch: f64,
    },
    Radial(RadialCurve),
}

/// Parameters shared by the built-in shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub center: [f64; 2],
    /// Only used by `circle`.
    pub radius: f64,
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }
}

/// Builds one of the named example shapes.
pub fn make_shape(name: &str, params: &ShapeParams) -> Result<Curve> {
    let center = params.center;
    let curve = match name {
        "circle" => {
            if !(params.radius > 0.0) {
                return Err(Error::Config(format!(
                    "circle radius must be positive, got {}",
                    params.radius
                )));
            }
            Curve::Circle {
                center,
                radius: params.radius,
            }
        }
        "peanut" => Curve::Peanut { center },
        "apple" => Curve::Apple { center },
        "rounded_rectangle" => Curve::RoundedRectangle { center },
        "kite1" => Curve::Kite {
            center,
            scale: 1.0 / 3.0,
            bend: 0.55,
            stretch: 1.2,
        },
        "kite2" => Curve::Kite {
            center,
            scale: 1.0,
            bend: 0.8,
            stretch: 1.5,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown curve '{other}' (expected one of {})",
                SHAPE_NAMES.join(", ")
            )))
        }
    };
    Ok(curve)
}

fn peanut_radius(s: f64) -> (f64, f64, f64) {
    let (sin, cos) = s.sin_cos();
    let p = 0.25 * cos * cos + 0.0625 * sin * sin;
    let dp = -0.375 * sin * cos;
    let ddp = -0.375 * (cos * cos - sin * sin);
    radius_from_square(p, dp, ddp)
}

/// `(r, r′, r″)` from `(r², (r²)′, (r²)″)`.
fn radius_from_square(p: f64, dp: f64, ddp: f64) -> (f64, f64, f64) {
    let r = p.sqrt();
    let dr = dp / (2.0 * r);
    let ddr = (0.5 * ddp - dr * dr) / r;
    (r, dr, ddr)
}

fn apple_radius(s: f64) -> (f64, f64, f64) {
    let (sin, cos) = s.sin_cos();
    let (sin2, cos2) = (2.0 * s).sin_cos();
    let num = 0.45 + 0.3 * cos - 0.1 * sin2;
    let dnum = -0.3 * sin - 0.2 * cos2;
    let ddnum = -0.3 * cos + 0.4 * sin2;
    let den = 1.0 + 0.7 * cos;
    let dden = -0.7 * sin;
    let ddden = -0.7 * cos;
    let r = num / den;
    let dr = (dnum - r * dden) / den;
    let ddr = (ddnum - 2.0 * dr * dden - r * ddden) / den;
    (r, dr, ddr)
}

fn rounded_rectangle_radius(s: f64) -> (f64, f64, f64) {
    let (sin, cos) = s.sin_cos();
    let (s2, c2) = (sin * sin, cos * cos);
    let (s6, c6) = (s2 * s2 * s2, c2 * c2 * c2);
    let (s8, c8) = (s6 * s2, c6 * c2);
    let p = c8 * c2 + s8 * s2;
    let dp = 10.0 * sin * cos * (s8 - c8);
    let ddp = 10.0 * ((c2 - s2) * (s8 - c8) + 8.0 * s2 * c2 * (s6 + c6));
    let r = p.powf(-0.1);
    let dr = -0.1 * r / p * dp;
    let ddr = 0.11 * r / (p * p) * dp * dp - 0.1 * r / p * ddp;
    (r, dr, ddr)
}

fn radial_sample(center: [f64; 2], s: f64, (r, dr, ddr): (f64, f64, f64)) -> Result<CurveSample> {
    let (sin, cos) = s.sin_cos();
    let e = Point::new(cos, sin);
    let e_perp = Point::new(-sin, cos);
    let point = Point::new(center[0], center[1]) + e * r;
    let d1 = e * dr + e_perp * r;
    let d2 = e * (ddr - r) + e_perp * (2.0 * dr);
    CurveSample::from_derivatives(point, d1, d2)
}

impl Curve {
    /// Point and derivatives at parameter `s`.
    pub fn eval(&self, s: f64) -> Result<CurveSample> {
        match self {
            Curve::Circle { center, radius } => radial_sample(*center, s, (*radius, 0.0, 0.0)),
            Curve::Peanut { center } => radial_sample(*center, s, peanut_radius(s)),
            Curve::Apple { center } => radial_sample(*center, s, apple_radius(s)),
            Curve::RoundedRectangle { center } => {
                radial_sample(*center, s, rounded_rectangle_radius(s))
            }
            Curve::Kite {
                center,
                scale,
                bend,
                stretch,
            } => {
                let (sin, cos) = s.sin_cos();
                let (sin2, cos2) = (2.0 * s).sin_cos();
                let point = Point::new(
                    center[0] + scale * (cos + bend * cos2 - 0.5),
                    center[1] + scale * stretch * sin,
                );
                let d1 = Point::new(scale * (-sin - 2.0 * bend * sin2), scale * stretch * cos);
                let d2 = Point::new(scale * (-cos - 4.0 * bend * cos2), -scale * stretch * sin);
                CurveSample::from_derivatives(point, d1, d2)
            }
            Curve::Radial(radial) => radial_sample([0.0, 0.0], s, radial.radius_derivatives(s)),
        }
    }

    /// Samples the curve at `s_k = kπ/M`, `k = 0..2M−1`.
    pub fn discretize(&self, m: usize) -> Result<NodalCurve> {
        let samples = (0..2 * m)
            .map(|k| self.eval(k as f64 * PI / m as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(NodalCurve { samples })
    }

    /// Distance from the origin to the curve along the ray of angle `θ`,
    /// for each `θ` in `thetas`.
    ///
    /// Fails if the curve is not starlike with respect to the origin.
    pub fn polar_radii(&self, thetas: &[f64]) -> Result<Vec<f64>> {
        match self {
            Curve::Circle { center, radius } if *center == [0.0, 0.0] => {
                return Ok(vec![*radius; thetas.len()])
            }
            Curve::Peanut { center } if *center == [0.0, 0.0] => {
                return Ok(thetas.iter().map(|&t| peanut_radius(t).0).collect())
            }
            Curve::Apple { center } if *center == [0.0, 0.0] => {
                return Ok(thetas.iter().map(|&t| apple_radius(t).0).collect())
            }
            Curve::RoundedRectangle { center } if *center == [0.0, 0.0] => {
                return Ok(thetas
                    .iter()
                    .map(|&t| rounded_rectangle_radius(t).0)
                    .collect())
            }
            Curve::Radial(radial) => return Ok(thetas.iter().map(|&t| radial.radius(t)).collect()),
            _ => {}
        }
        self.polar_radii_numeric(thetas)
    }

    /// Inverts the polar angle of a general parametrization numerically.
    fn polar_radii_numeric(&self, thetas: &[f64]) -> Result<Vec<f64>> {
        const SAMPLES: usize = 4096;
        let point = |s: f64| self.eval(s).map(|c| c.point);
        let mut angles = Vec::with_capacity(SAMPLES + 1);
        let mut prev = {
            let p = point(0.0)?;
            if p.norm() == 0.0 {
                return Err(Error::NotStarlike("curve passes through the origin".into()));
            }
            p.y.atan2(p.x)
        };
        angles.push(prev);
        for k in 1..=SAMPLES {
            let p = point(2.0 * PI * k as f64 / SAMPLES as f64)?;
            if p.norm() == 0.0 {
                return Err(Error::NotStarlike("curve passes through the origin".into()));
            }
            let raw = p.y.atan2(p.x);
            let last = *angles.last().unwrap();
            let mut step = raw - prev;
            step -= 2.0 * PI * (step / (2.0 * PI)).round();
            if step <= 0.0 {
                return Err(Error::NotStarlike(format!(
                    "polar angle is not increasing near s = {:.4}",
                    2.0 * PI * k as f64 / SAMPLES as f64
                )));
            }
            angles.push(last + step);
            prev = raw;
        }
        let total = angles[SAMPLES] - angles[0];
        if (total - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::NotStarlike(format!(
                "polar angle winds {total:.6} instead of 2π"
            )));
        }
        let base = angles[0];
        // Unwrapped polar angle as a continuous function of s near a bracket.
        let angle_at = |s: f64, reference: f64| -> Result<f64> {
            let p = point(s)?;
            let raw = p.y.atan2(p.x);
            Ok(raw - 2.0 * PI * ((raw - reference) / (2.0 * PI)).round())
        };
        thetas
            .iter()
            .map(|&theta| {
                let target = base + (theta - base).rem_euclid(2.0 * PI);
                let k = angles.partition_point(|&a| a <= target).clamp(1, SAMPLES);
                let mut lo = 2.0 * PI * (k - 1) as f64 / SAMPLES as f64;
                let mut hi = 2.0 * PI * k as f64 / SAMPLES as f64;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if angle_at(mid, target)? < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(point(0.5 * (lo + hi))?.norm())
            })
            .collect()
    }

    /// Writes `(s, x₁, x₂)` rows at `samples` equally spaced parameters.
    pub fn export_csv(&self, samples: usize, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["s", "x1", "x2"])?;
        for k in 0..samples {
            let s = 2.0 * PI * k as f64 / samples as f64;
            let p = self.eval(s)?.point;
            writer.write_record([fmt_f64(s), fmt_f64(p.x), fmt_f64(p.y)])?;
        }
        writer
            .flush()
            .map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A curve sampled at the `2M` quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalCurve {
    pub samples: Vec<CurveSample>,
}

impl NodalCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Whether `p` lies inside the polygon through the nodes (even–odd rule).
    pub fn encloses(&self, p: Point) -> bool {
        let n = self.samples.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.samples[i].point;
            let b = self.samples[(i + 1) % n].point;
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Smallest distance from `p` to any node.
    pub fn min_node_distance(&self, p: Point) -> f64 {
        self.samples
            .iter()
            .map(|c| (c.point - p).norm())
            .fold(f64::INFINITY, f64::min)
    }
}
