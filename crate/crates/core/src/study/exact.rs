use crate::geometry::{Beta, Circle, InterfaceCurve, Point, Side, StraightLine, Vector};

/// A piecewise smooth solution of `-∇·(β∇u) = f` with homogeneous jumps.
pub trait ExactSolution: Send + Sync {
    fn value(&self, p: &Point, side: Side) -> f64;
    fn gradient(&self, p: &Point, side: Side) -> Vector;
    /// `f = -∇·(β^s ∇u^s)`
    fn source(&self, p: &Point, side: Side) -> f64;
    /// Dirichlet trace on the outer boundary.
    fn boundary(&self, p: &Point) -> f64;
}

/// `u⁻ = r^α/β⁻` inside the circle `r = r0`, `u⁺ = r^α/β⁺ + (1/β⁻ - 1/β⁺) r0^α` outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleBenchmark {
    pub r0: f64,
    pub alpha: f64,
    pub beta: Beta,
}

impl CircleBenchmark {
    /// `π / 6.28`, the benchmark radius; 6.28 is the literal value, not τ.
    #[allow(clippy::approx_constant)]
    pub const DEFAULT_R0: f64 = std::f64::consts::PI / 6.28;

    pub fn new(r0: f64, beta: Beta) -> Self {
        Self { r0, alpha: 5.0, beta }
    }

    pub fn curve(&self) -> Circle {
        Circle::centered(self.r0)
    }

    pub fn side_of(&self, p: &Point) -> Side {
        Side::of_value(self.curve().level_set(p))
    }
}

impl ExactSolution for CircleBenchmark {
    fn value(&self, p: &Point, side: Side) -> f64 {
        let r = p.coords.norm();
        let base = r.powf(self.alpha) / self.beta.on(side);
        match side {
            Side::Minus => base,
            Side::Plus => {
                base + (1.0 / self.beta.minus - 1.0 / self.beta.plus) * self.r0.powf(self.alpha)
            }
        }
    }

    fn gradient(&self, p: &Point, side: Side) -> Vector {
        let r2 = p.coords.norm_squared();
        p.coords * (self.alpha * r2.powf(0.5 * self.alpha - 1.0) / self.beta.on(side))
    }

    fn source(&self, p: &Point, _side: Side) -> f64 {
        let r2 = p.coords.norm_squared();
        -self.alpha * self.alpha * r2.powf(0.5 * self.alpha - 1.0)
    }

    fn boundary(&self, p: &Point) -> f64 {
        self.value(p, self.side_of(p))
    }
}

/// Piecewise linear solution across a straight interface: the normal slopes
/// satisfy `β⁻ s⁻ = β⁺ s⁺`, so value and flux are continuous and `f = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayeredLinear {
    pub line: StraightLine,
    pub beta: Beta,
    pub offset: f64,
    /// Normal slope on the minus side.
    pub slope_minus: f64,
    /// Slope along the line, shared by both sides.
    pub slope_tangent: f64,
}

impl LayeredLinear {
    pub fn slope(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.slope_minus,
            Side::Plus => self.slope_minus * self.beta.minus / self.beta.plus,
        }
    }

    fn coordinates(&self, p: &Point) -> (f64, f64) {
        let n = self.line.normal;
        let d = p - self.line.point;
        (n.dot(&d), n.x * d.y - n.y * d.x)
    }
}

impl ExactSolution for LayeredLinear {
    fn value(&self, p: &Point, side: Side) -> f64 {
        let (normal, tangent) = self.coordinates(p);
        self.offset + self.slope(side) * normal + self.slope_tangent * tangent
    }

    fn gradient(&self, _p: &Point, side: Side) -> Vector {
        let n = self.line.normal;
        n * self.slope(side) + Vector::new(-n.y, n.x) * self.slope_tangent
    }

    fn source(&self, _p: &Point, _side: Side) -> f64 {
        0.0
    }

    fn boundary(&self, p: &Point) -> f64 {
        self.value(p, Side::of_value(self.line.level_set(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_satisfies_jump_conditions() {
        for beta in [Beta::new(1.0, 1e4), Beta::new(1e4, 1.0), Beta::new(3.0, 0.2)] {
            let u = CircleBenchmark::new(CircleBenchmark::DEFAULT_R0, beta);
            let c = u.curve();
            for k in 0..100 {
                let t = c.period().unwrap() * k as f64 / 100.0;
                let p = c.point_at(t);
                let n = c.normal_at(&p);
                let jump = u.value(&p, Side::Plus) - u.value(&p, Side::Minus);
                let flux = beta.plus * u.gradient(&p, Side::Plus).dot(&n)
                    - beta.minus * u.gradient(&p, Side::Minus).dot(&n);
                assert!(jump.abs() < 1e-10);
                assert!(flux.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn benchmark_source_matches_finite_differences() {
        let u = CircleBenchmark::new(CircleBenchmark::DEFAULT_R0, Beta::new(2.0, 7.0));
        let h = 1e-4;
        for p in [Point::new(0.1, 0.2), Point::new(-0.7, 0.4), Point::new(0.9, -0.95)] {
            let side = u.side_of(&p);
            let b = u.beta.on(side);
            let v = |q: Point| u.value(&q, side);
            let lap = (v(p + Vector::new(h, 0.0)) + v(p - Vector::new(h, 0.0))
                + v(p + Vector::new(0.0, h))
                + v(p - Vector::new(0.0, h))
                - 4.0 * v(p))
                / (h * h);
            let f = u.source(&p, side);
            assert!((-b * lap - f).abs() < 1e-5 * f.abs().max(1.0), "{} vs {}", -b * lap, f);
            let g = u.gradient(&p, side);
            let gx = (v(p + Vector::new(h, 0.0)) - v(p - Vector::new(h, 0.0))) / (2.0 * h);
            assert!((g.x - gx).abs() < 1e-6 * g.norm().max(1.0));
        }
    }

    #[test]
    fn layered_linear_is_continuous_with_continuous_flux() {
        let line = StraightLine::new(Point::new(0.1, -0.2), Vector::new(1.0, 2.0));
        let u = LayeredLinear {
            line,
            beta: Beta::new(1.0, 40.0),
            offset: 0.5,
            slope_minus: 3.0,
            slope_tangent: -1.2,
        };
        let p = line.point + Vector::new(-line.normal.y, line.normal.x) * 0.37;
        assert!((u.value(&p, Side::Minus) - u.value(&p, Side::Plus)).abs() < 1e-14);
        let n = line.normal;
        let flux = 1.0 * u.gradient(&p, Side::Minus).dot(&n) - 40.0 * u.gradient(&p, Side::Plus).dot(&n);
        assert!(flux.abs() < 1e-13);
    }
}
