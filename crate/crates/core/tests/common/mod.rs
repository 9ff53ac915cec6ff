#![allow(dead_code)]

use ife_lab::basis::{monomials, standard_shapes, Family, Frame, Poly, ShapeSet};
use ife_lab::geometry::{
    compute_cut, Beta, Circle, CutInfo, EdgeClass, Element, FluxPoint, InterfaceCurve, Partition,
    Point, Side, StraightLine, Vector,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// One interface element with everything needed to build its immersed space.
#[derive(Debug)]
pub struct Configuration {
    pub element: Element,
    pub curve: Box<dyn InterfaceCurve>,
    pub cut: CutInfo,
    pub shapes: ShapeSet,
    pub family: Family,
    pub beta: Beta,
}

pub fn element_of(family: Family, origin: Point, h: f64) -> Element {
    match family {
        Family::RotatedQ1 => Element::axis_rectangle(origin, h, h),
        Family::CrouzeixRaviart => {
            let o = origin;
            // lower triangle of a cell split along its diagonal
            Element::triangle(
                [o, o + Vector::new(h, 0.0), o + Vector::new(h, h)],
                [0, 1, 2],
            )
        }
    }
}

/// Uniform point of a triangle or an axis-aligned rectangle.
pub fn random_point_in(element: &Element, rng: &mut impl Rng) -> Point {
    let v = element.vertices();
    match v.len() {
        3 => {
            let (mut a, mut b): (f64, f64) = (rng.random(), rng.random());
            if a + b > 1.0 {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            v[0] + (v[1] - v[0]) * a + (v[2] - v[0]) * b
        }
        _ => {
            let (lo, hi) = element.bounding_box();
            Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y))
        }
    }
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random interface element: two distinct cut edges, cut points at fractions
/// in `(0.05, 0.95)` along them, and either the straight line through them or a
/// circle of radius `2h..20h` through them. Returns `None` for samples that do not
/// form a valid cut (the circle leaves through another edge, etc.).
pub fn random_configuration(
    rng: &mut impl Rng,
    family: Family,
    partition: Partition,
    flux: FluxPoint,
    beta: Beta,
) -> Option<Configuration> {
    random_configuration_sized(rng, family, partition, flux, beta, (1e-3, 0.5))
}

/// [`random_configuration`] with the element size drawn log-uniformly from `sizes`.
pub fn random_configuration_sized(
    rng: &mut impl Rng,
    family: Family,
    partition: Partition,
    flux: FluxPoint,
    beta: Beta,
    sizes: (f64, f64),
) -> Option<Configuration> {
    let h = log_uniform(rng, sizes.0, sizes.1);
    let origin = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let element = element_of(family, origin, h);
    let n = element.n_edges();
    let first = rng.random_range(0..n);
    let second = (first + rng.random_range(1..n)) % n;
    let point_on = |k: usize, s: f64| {
        let (a, b) = element.edge_endpoints(k);
        a + (b - a) * s
    };
    let d = point_on(first, rng.random_range(0.05..0.95));
    let e = point_on(second, rng.random_range(0.05..0.95));
    let chord = e - d;
    let normal = Vector::new(-chord.y, chord.x).normalize();
    let curve: Box<dyn InterfaceCurve> = match partition {
        Partition::Line => {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Box::new(StraightLine::new(d, normal * sign))
        }
        Partition::Curve => {
            let radius = rng.random_range(2.0..20.0) * h;
            let half = 0.5 * chord.norm();
            if radius <= half {
                return None;
            }
            let offset = (radius * radius - half * half).sqrt();
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let center = nalgebra::center(&d, &e) + normal * (sign * offset);
            Box::new(Circle::new(center, radius))
        }
    };
    // the curve must cross exactly the two chosen edges, once each
    for k in 0..n {
        let (a, b) = element.edge_endpoints(k);
        let expected = usize::from(k == first || k == second);
        if curve.crossings_on_segment(&a, &b) != expected {
            return None;
        }
    }
    let cut = compute_cut(&element, curve.as_ref(), partition, flux).ok()?;
    let shapes = standard_shapes(&element, family).ok()?;
    Some(Configuration { element, curve, cut, shapes, family, beta })
}

/// Solves the full constraint system of an immersed function directly: edge
/// averages `v` (split edges integrated piecewise), continuity at `D` and `E`,
/// the flux condition at `F`, and equal `x² - y²` coefficients for rotated Q1.
/// Unknowns are the monomial coefficients of both pieces.
pub fn dense_oracle(config: &Configuration, v: &[f64]) -> (Poly, Poly) {
    let m = config.family.dim();
    let frame: Frame = config.shapes.frame;
    let el = &config.element;
    let cut = &config.cut;
    let mut a = DMatrix::<f64>::zeros(2 * m, 2 * m);
    let mut b = DVector::<f64>::zeros(2 * m);
    let col = |side: Side, k: usize| side.index() * m + k;

    // average of monomial k over a -> b, by 3-point Gauss (exact for quadratics)
    let segment = |p: &Point, q: &Point| -> Vec<f64> {
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let mut out = vec![0.0; m];
        for (x, w) in nodes.iter().zip(weights) {
            let s = 0.5 * (x + 1.0);
            let mono = monomials(&frame, &(p + (q - p) * s));
            for k in 0..m {
                out[k] += w * mono[k];
            }
        }
        out
    };

    for j in 0..m {
        let (p, q) = el.edge_endpoints(j);
        let len = (q - p).norm();
        let mut add = |side: Side, from: &Point, to: &Point| {
            let frac = (to - from).norm() / len;
            for (k, val) in segment(from, to).into_iter().enumerate() {
                a[(j, col(side, k))] += frac * val;
            }
        };
        match cut.edge_classes[j] {
            EdgeClass::Minus => add(Side::Minus, &p, &q),
            EdgeClass::Plus => add(Side::Plus, &p, &q),
            EdgeClass::Split { point, start_side } => {
                add(start_side, &p, &point);
                add(start_side.opposite(), &point, &q);
            }
        }
        b[j] = v[j];
    }
    let mut row = m;
    for x in [cut.d, cut.e] {
        let mono = monomials(&frame, &x);
        for k in 0..m {
            a[(row, col(Side::Minus, k))] = mono[k];
            a[(row, col(Side::Plus, k))] = -mono[k];
        }
        row += 1;
    }
    // flux, scaled to O(1)
    let scale = config.beta.minus.max(config.beta.plus);
    for k in 0..m {
        let mut c = [0.0; 4];
        c[k] = 1.0;
        let g = Poly::new(frame, c).grad(&cut.f).dot(&cut.vf) * frame.scale;
        a[(row, col(Side::Minus, k))] = config.beta.minus / scale * g;
        a[(row, col(Side::Plus, k))] = -config.beta.plus / scale * g;
    }
    row += 1;
    if m == 4 {
        a[(row, col(Side::Minus, 3))] = 1.0;
        a[(row, col(Side::Plus, 3))] = -1.0;
        row += 1;
    }
    assert_eq!(row, 2 * m);
    let x = a.full_piv_lu().solve(&b).expect("constraint system is singular");
    let piece = |side: Side| {
        let mut c = [0.0; 4];
        for k in 0..m {
            c[k] = x[col(side, k)];
        }
        Poly::new(frame, c)
    };
    (piece(Side::Minus), piece(Side::Plus))
}

/// Largest coefficient difference relative to the largest coefficient.
pub fn relative_difference(a: (&Poly, &Poly), b: (&Poly, &Poly)) -> f64 {
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    for (p, q) in [(a.0, b.0), (a.1, b.1)] {
        for k in 0..4 {
            diff = diff.max((p.coeffs[k] - q.coeffs[k]).abs());
            size = size.max(p.coeffs[k].abs()).max(q.coeffs[k].abs());
        }
    }
    diff / size.max(f64::MIN_POSITIVE)
}

/// Edge average of a piecewise function on local edge `j`.
pub fn piecewise_edge_average(config: &Configuration, j: usize, minus: &Poly, plus: &Poly) -> f64 {
    let (a, b) = config.element.edge_endpoints(j);
    ife_lab::quad::integrate_edge_split(&a, &b, &config.cut.edge_classes[j], minus, plus)
        / (b - a).norm()
}
