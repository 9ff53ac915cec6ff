use std::f64::consts::PI;
use std::fmt::Debug;

use super::{Point, Vector};

/// An interface curve given both implicitly (level set, negative on the minus side)
/// and explicitly (a parametrization). Root finding uses the level set; arc quadrature
/// and the arc midpoint use the parametrization.
pub trait InterfaceCurve: Debug + Send + Sync {
    fn level_set(&self, p: &Point) -> f64;

    fn level_set_gradient(&self, p: &Point) -> Vector;

    fn point_at(&self, t: f64) -> Point;

    /// Derivative of [`InterfaceCurve::point_at`] with respect to the parameter.
    fn derivative_at(&self, t: f64) -> Vector;

    /// Parameter of a point lying on the curve.
    fn parameter_of(&self, p: &Point) -> f64;

    /// Parameter period for closed curves.
    fn period(&self) -> Option<f64>;

    fn curvature_bound(&self) -> f64;

    /// Unit normal pointing from the minus side toward the plus side.
    fn normal_at(&self, p: &Point) -> Vector {
        self.level_set_gradient(p).normalize()
    }

    /// Number of transversal crossings of the open segment `a -> b`.
    ///
    /// The default samples the level set; curves with a closed form override it.
    fn crossings_on_segment(&self, a: &Point, b: &Point) -> usize {
        const SAMPLES: usize = 32;
        let mut count = 0;
        let mut prev = self.level_set(a);
        for k in 1..=SAMPLES {
            let t = k as f64 / SAMPLES as f64;
            let value = self.level_set(&(a + (b - a) * t));
            if (prev < 0.0) != (value < 0.0) {
                count += 1;
            }
            prev = value;
        }
        count
    }

    /// Parameter of `to` unwrapped to lie closest to `from` on periodic curves.
    fn unwrap_parameter(&self, from: f64, to: f64) -> f64 {
        match self.period() {
            Some(period) => {
                let shift = ((from - to) / period).round();
                to + shift * period
            }
            None => to,
        }
    }
}

/// Circle `|X - center| = radius`; the disk is the minus side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0, "circle radius must be positive");
        Self { center, radius }
    }

    pub fn centered(radius: f64) -> Self {
        Self::new(Point::origin(), radius)
    }
}

impl InterfaceCurve for Circle {
    fn level_set(&self, p: &Point) -> f64 {
        (p - self.center).norm_squared() - self.radius * self.radius
    }

    fn level_set_gradient(&self, p: &Point) -> Vector {
        2.0 * (p - self.center)
    }

    fn point_at(&self, t: f64) -> Point {
        self.center + self.radius * Vector::new(t.cos(), t.sin())
    }

    fn derivative_at(&self, t: f64) -> Vector {
        self.radius * Vector::new(-t.sin(), t.cos())
    }

    fn parameter_of(&self, p: &Point) -> f64 {
        let d = p - self.center;
        d.y.atan2(d.x)
    }

    fn period(&self) -> Option<f64> {
        Some(2.0 * PI)
    }

    fn curvature_bound(&self) -> f64 {
        1.0 / self.radius
    }

    fn normal_at(&self, p: &Point) -> Vector {
        (p - self.center).normalize()
    }

    fn crossings_on_segment(&self, a: &Point, b: &Point) -> usize {
        // |a - c + s (b - a)|^2 = r^2
        let d = b - a;
        let m = a - self.center;
        let qa = d.norm_squared();
        let qb = 2.0 * m.dot(&d);
        let qc = m.norm_squared() - self.radius * self.radius;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            return 0;
        }
        let sq = disc.sqrt();
        // numerically stable pair of roots
        let q = -0.5 * (qb + qb.signum() * sq);
        let (s1, s2) = if q != 0.0 { (q / qa, qc / q) } else { (0.0, 0.0) };
        [s1, s2].iter().filter(|s| **s > 0.0 && **s < 1.0).count()
    }
}

/// Straight line through `point` with unit normal `normal`; the minus side is
/// `normal · (X - point) < 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StraightLine {
    pub point: Point,
    pub normal: Vector,
}

impl StraightLine {
    pub fn new(point: Point, normal: Vector) -> Self {
        Self {
            point,
            normal: normal.normalize(),
        }
    }

    /// The line `y = c`, minus side below.
    pub fn horizontal(c: f64) -> Self {
        Self::new(Point::new(0.0, c), Vector::new(0.0, 1.0))
    }

    fn tangent(&self) -> Vector {
        Vector::new(-self.normal.y, self.normal.x)
    }
}

impl InterfaceCurve for StraightLine {
    fn level_set(&self, p: &Point) -> f64 {
        self.normal.dot(&(p - self.point))
    }

    fn level_set_gradient(&self, _p: &Point) -> Vector {
        self.normal
    }

    fn point_at(&self, t: f64) -> Point {
        self.point + t * self.tangent()
    }

    fn derivative_at(&self, _t: f64) -> Vector {
        self.tangent()
    }

    fn parameter_of(&self, p: &Point) -> f64 {
        self.tangent().dot(&(p - self.point))
    }

    fn period(&self) -> Option<f64> {
        None
    }

    fn curvature_bound(&self) -> f64 {
        0.0
    }

    fn normal_at(&self, _p: &Point) -> Vector {
        self.normal
    }

    fn crossings_on_segment(&self, a: &Point, b: &Point) -> usize {
        let fa = self.level_set(a);
        let fb = self.level_set(b);
        usize::from((fa < 0.0) != (fb < 0.0) && fa != 0.0 && fb != 0.0)
    }
}
