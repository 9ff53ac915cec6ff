//! Quadrature on elements, split edges and curved subelements.
//!
//! Area integrals are reduced to boundary integrals with Green's theorem,
//! `∫∫_R f dA = ∮_∂R P dy` with `P(x, y) = ∫_{x_ref}^x f(s, y) ds`, where the inner
//! integral uses Gauss-Legendre on the horizontal segment and the outer one runs
//! along the boundary pieces. Straight pieces get a fixed Gauss rule; interface
//! arcs are integrated on their parametrization with adaptive composite Gauss.
//! For a rectangle the rule collapses to the tensor Gauss rule.

use std::sync::LazyLock;

use crate::basis::{segment_integral, Poly};
use crate::error::{Error, Result};
use crate::geometry::{CutInfo, EdgeClass, Element, InterfaceCurve, Partition, Point, Side};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const MAX_ORDER: usize = 24;

static GAUSS_RULES: LazyLock<Vec<GaussRule>> =
    LazyLock::new(|| (0..=MAX_ORDER).map(compute_gauss_rule).collect());

fn compute_gauss_rule(n: usize) -> GaussRule {
    if n == 0 {
        return GaussRule {
            nodes: vec![],
            weights: vec![],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            x = 0.0;
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// Gauss-Legendre rule with `n` points (exact for degree `2n - 1`).
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    assert!((1..=MAX_ORDER).contains(&n), "unsupported Gauss order {n}");
    &GAUSS_RULES[n]
}

/// `∫_a^b g` with an `n`-point Gauss rule.
pub fn gauss_integral(n: usize, a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let rule = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * g(mid + half * x))
        .sum::<f64>()
        * half
}

/// Order of the panel rule used on arcs.
pub const ARC_ORDER: usize = 7;
/// Relative change at which arc panel refinement stops.
pub const ARC_TOLERANCE: f64 = 1e-12;
/// Maximum bisection depth for arcs (at most 2^10 panels).
pub const ARC_MAX_DEPTH: u32 = 10;

/// Adaptive composite Gauss on `[a, b]`: a panel is accepted when its
/// `ARC_ORDER`-point value agrees with the sum over its two halves.
pub fn adaptive_integral(a: f64, b: f64, tol: f64, g: &impl Fn(f64) -> f64) -> f64 {
    let whole = gauss_integral(ARC_ORDER, a, b, g);
    let scale = whole.abs().max(f64::MIN_POSITIVE);
    adaptive_step(a, b, whole, tol, scale, ARC_MAX_DEPTH, g)
}

fn adaptive_step(
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    scale: f64,
    depth: u32,
    g: &impl Fn(f64) -> f64,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gauss_integral(ARC_ORDER, a, mid, g);
    let right = gauss_integral(ARC_ORDER, mid, b, g);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= tol * scale {
        return refined;
    }
    adaptive_step(a, mid, left, tol, scale, depth - 1, g)
        + adaptive_step(mid, b, right, tol, scale, depth - 1, g)
}

/// Arc panels `[t_k, t_{k+1}]` chosen so that the listed boundary functionals
/// converge to `tol`.
fn adaptive_panels(a: f64, b: f64, tol: f64, g: &impl Fn(f64) -> [f64; 2]) -> Vec<(f64, f64)> {
    let est = |a: f64, b: f64| {
        let mut acc = [0.0; 2];
        let rule = gauss_legendre(ARC_ORDER);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = g(mid + half * x);
            acc[0] += w * half * v[0];
            acc[1] += w * half * v[1];
        }
        acc
    };
    let whole = est(a, b);
    let scale = [whole[0].abs().max(1e-300), whole[1].abs().max(1e-300)];
    let mut panels = Vec::new();
    let mut stack = vec![(a, b, whole, ARC_MAX_DEPTH)];
    while let Some((lo, hi, value, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let l = est(lo, mid);
        let r = est(mid, hi);
        let converged = (0..2).all(|k| (l[k] + r[k] - value[k]).abs() <= tol * scale[k]);
        if converged || depth == 0 {
            panels.push((lo, mid));
            panels.push((mid, hi));
        } else {
            stack.push((mid, hi, r, depth - 1));
            stack.push((lo, mid, l, depth - 1));
        }
    }
    panels
}

/// One piece of a region boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Segment(Point, Point),
    /// Interface arc traversed from parameter `t0` to `t1`.
    Arc { t0: f64, t1: f64 },
}

/// A closed region bounded counterclockwise by segments and interface arcs.
#[derive(Clone, Debug)]
pub struct Region<'c> {
    pieces: Vec<Piece>,
    curve: Option<&'c dyn InterfaceCurve>,
    x_ref: f64,
}

/// Chaining tolerance between consecutive pieces, relative to the region size.
const CHAIN_TOLERANCE: f64 = 1e-12;

impl<'c> Region<'c> {
    pub fn new(pieces: Vec<Piece>, curve: Option<&'c dyn InterfaceCurve>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::OpenBoundary { piece: 0, gap: f64::INFINITY });
        }
        let mut region = Self {
            pieces,
            curve,
            x_ref: 0.0,
        };
        let ends: Vec<(Point, Point)> = (0..region.pieces.len())
            .map(|k| region.endpoints(k))
            .collect::<Result<_>>()?;
        let size = ends
            .iter()
            .map(|(a, b)| (b - a).norm())
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        for k in 0..ends.len() {
            let next = (k + 1) % ends.len();
            let gap = (ends[k].1 - ends[next].0).norm();
            if gap > CHAIN_TOLERANCE * size {
                return Err(Error::OpenBoundary { piece: k, gap });
            }
        }
        region.x_ref = ends.iter().map(|(a, _)| a.x).fold(f64::INFINITY, f64::min);
        if region.area() <= 0.0 {
            return Err(Error::DegenerateGeometry(
                "region is not counterclockwise or has no area".into(),
            ));
        }
        Ok(region)
    }

    /// Straight polygon with counterclockwise vertices.
    pub fn polygon(vertices: &[Point]) -> Result<Region<'static>> {
        let n = vertices.len();
        let pieces = (0..n)
            .map(|k| Piece::Segment(vertices[k], vertices[(k + 1) % n]))
            .collect();
        Region::new(pieces, None)
    }

    pub fn element(element: &Element) -> Result<Region<'static>> {
        Region::polygon(element.vertices())
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn has_arc(&self) -> bool {
        self.pieces.iter().any(|p| matches!(p, Piece::Arc { .. }))
    }

    fn curve(&self) -> Result<&'c dyn InterfaceCurve> {
        self.curve
            .ok_or_else(|| Error::DegenerateGeometry("arc piece without a curve".into()))
    }

    fn endpoints(&self, k: usize) -> Result<(Point, Point)> {
        Ok(match self.pieces[k] {
            Piece::Segment(a, b) => (a, b),
            Piece::Arc { t0, t1 } => {
                let c = self.curve()?;
                (c.point_at(t0), c.point_at(t1))
            }
        })
    }

    /// Signed area from `∮ x dy`.
    pub fn area(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// `∫∫ f dA`. Straight pieces use 8 × 8 Gauss points; arcs are refined
    /// adaptively on the boundary integrand.
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        const ORDER: usize = 8;
        let x_ref = self.x_ref;
        let inner = |p: &Point| {
            let len = p.x - x_ref;
            if len == 0.0 {
                return 0.0;
            }
            gauss_integral(ORDER, x_ref, p.x, |s| f(&Point::new(s, p.y)))
        };
        let mut total = 0.0;
        for piece in &self.pieces {
            total += match *piece {
                Piece::Segment(a, b) => {
                    let dy = b.y - a.y;
                    if dy == 0.0 {
                        0.0
                    } else {
                        gauss_integral(ORDER, 0.0, 1.0, |t| inner(&(a + (b - a) * t))) * dy
                    }
                }
                Piece::Arc { t0, t1 } => {
                    let curve = self.curve.expect("arc piece needs a curve");
                    let g = |t: f64| inner(&curve.point_at(t)) * curve.derivative_at(t).y;
                    adaptive_integral(t0, t1, ARC_TOLERANCE, &g)
                }
            };
        }
        total
    }

    /// Exact integral of a polynomial of the element space (degree ≤ 2, so the
    /// 8-point rules are exact on straight pieces).
    pub fn integrate_poly(&self, poly: &Poly) -> f64 {
        self.integrate(|p| poly.eval(p))
    }

    /// Cubature rule `(point, weight)` of the given order; weights may be negative
    /// (they come from the boundary reduction). Exact for polynomials of degree
    /// `2 order - 2` on straight regions.
    pub fn cubature(&self, order: usize) -> Vec<(Point, f64)> {
        let x_ref = self.x_ref;
        let inner = gauss_legendre(order);
        let mut rule = Vec::new();
        let mut emit = |p: Point, dy_weight: f64| {
            let len = p.x - x_ref;
            if len == 0.0 || dy_weight == 0.0 {
                return;
            }
            for (xi, wi) in inner.nodes.iter().zip(&inner.weights) {
                let s = x_ref + 0.5 * len * (1.0 + xi);
                rule.push((Point::new(s, p.y), dy_weight * 0.5 * len * wi));
            }
        };
        let outer = gauss_legendre(order);
        for piece in &self.pieces {
            match *piece {
                Piece::Segment(a, b) => {
                    let dy = b.y - a.y;
                    if dy == 0.0 {
                        continue;
                    }
                    for (x, w) in outer.nodes.iter().zip(&outer.weights) {
                        let t = 0.5 * (1.0 + x);
                        emit(a + (b - a) * t, 0.5 * w * dy);
                    }
                }
                Piece::Arc { t0, t1 } => {
                    let curve = self.curve.expect("arc piece needs a curve");
                    // panels resolved on geometric moments of the boundary
                    let g = |t: f64| {
                        let p = curve.point_at(t);
                        let dy = curve.derivative_at(t).y;
                        let dx = p.x - x_ref;
                        [dx * dy, dx * dx * dx * (1.0 + p.y * p.y) * dy]
                    };
                    let panels = adaptive_panels(t0, t1, ARC_TOLERANCE, &g);
                    let arc_rule = gauss_legendre(order.max(ARC_ORDER));
                    for (lo, hi) in panels {
                        let half = 0.5 * (hi - lo);
                        let mid = 0.5 * (lo + hi);
                        for (x, w) in arc_rule.nodes.iter().zip(&arc_rule.weights) {
                            let t = mid + half * x;
                            emit(curve.point_at(t), w * half * curve.derivative_at(t).y);
                        }
                    }
                }
            }
        }
        rule
    }
}

/// Splits an interface element into its (minus, plus) pieces, separated by the
/// interface arc (`Partition::Curve`) or by the chord `DE` (`Partition::Line`).
pub fn split_element<'c>(
    element: &Element,
    cut: &CutInfo,
    curve: &'c dyn InterfaceCurve,
    partition: Partition,
) -> Result<(Region<'c>, Region<'c>)> {
    let vs = element.vertices();
    let n = vs.len();
    let (t_d, t_e) = cut.arc;

    // boundary walk D -> ... -> E, then E -> ... -> D
    let chain = |from_edge: usize, to_edge: usize, start: Point, stop: Point| {
        let mut pts = vec![start];
        let mut k = (from_edge + 1) % n;
        loop {
            pts.push(vs[k]);
            if k == to_edge {
                break;
            }
            k = (k + 1) % n;
        }
        pts.push(stop);
        pts
    };
    let first = chain(cut.d_edge, cut.e_edge, cut.d, cut.e);
    let second = chain(cut.e_edge, cut.d_edge, cut.e, cut.d);

    let close = |pts: &[Point], from_t: f64, to_t: f64| {
        let mut pieces: Vec<Piece> = pts
            .windows(2)
            .filter(|w| w[0] != w[1])
            .map(|w| Piece::Segment(w[0], w[1]))
            .collect();
        let (a, b) = (pts[pts.len() - 1], pts[0]);
        pieces.push(match partition {
            Partition::Curve => Piece::Arc { t0: from_t, t1: to_t },
            Partition::Line => Piece::Segment(a, b),
        });
        pieces
    };
    let first_region = Region::new(close(&first, t_e, t_d), Some(curve))?;
    let second_region = Region::new(close(&second, t_d, t_e), Some(curve))?;
    let first_side = cut.vertex_sides[(cut.d_edge + 1) % n];
    Ok(match first_side {
        Side::Minus => (first_region, second_region),
        Side::Plus => (second_region, first_region),
    })
}

/// `∫_b φ ds` over the edge `a -> b`, split at the cut point when the edge is
/// cut; `class` must be expressed in the `a -> b` orientation.
pub fn integrate_edge_split(a: &Point, b: &Point, class: &EdgeClass, minus: &Poly, plus: &Poly) -> f64 {
    let pick = |side: Side| match side {
        Side::Minus => minus,
        Side::Plus => plus,
    };
    match *class {
        EdgeClass::Minus => segment_integral(minus, a, b),
        EdgeClass::Plus => segment_integral(plus, a, b),
        EdgeClass::Split { point, start_side } => {
            segment_integral(pick(start_side), a, &point)
                + segment_integral(pick(start_side.opposite()), &point, b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Frame;
    use crate::geometry::{compute_cut, Circle, FluxPoint, Vector};
    use std::f64::consts::PI;

    #[test]
    fn gauss_rules_integrate_monomials() {
        for n in 1..=12 {
            let rule = gauss_legendre(n);
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let approx: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                assert!((approx - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn constant_over_square() {
        let h = 0.125;
        let el = Element::axis_rectangle(Point::new(0.0, 0.0), h, h);
        let r = Region::element(&el).unwrap();
        assert!((r.area() - h * h).abs() < 1e-16);
        let rule = r.cubature(4);
        assert_eq!(rule.len(), 16);
        assert!((rule.iter().map(|(_, w)| w).sum::<f64>() - h * h).abs() < 1e-16);
    }

    #[test]
    fn quarter_disk_area() {
        let r = 0.3;
        let circle = Circle::centered(r);
        let region = Region::new(
            vec![
                Piece::Segment(Point::new(0.0, 0.0), Point::new(r, 0.0)),
                Piece::Arc { t0: 0.0, t1: PI / 2.0 },
                Piece::Segment(Point::new(0.0, r), Point::new(0.0, 0.0)),
            ],
            Some(&circle),
        )
        .unwrap();
        assert!((region.area() - PI * r * r / 4.0).abs() < 1e-12);
        let rule_area: f64 = region.cubature(8).iter().map(|(_, w)| w).sum();
        assert!((rule_area - PI * r * r / 4.0).abs() < 1e-12);
        // ∫∫ x² dA = r⁴ π / 16
        let m = region.integrate(|p| p.x * p.x);
        assert!((m - r.powi(4) * PI / 16.0).abs() < 1e-13);
    }

    #[test]
    fn open_boundary_is_rejected() {
        let res = Region::new(
            vec![
                Piece::Segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0)),
                Piece::Segment(Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
                Piece::Segment(Point::new(1.0, 1.0), Point::new(0.1, 0.0)),
            ],
            None,
        );
        assert!(matches!(res, Err(Error::OpenBoundary { .. })));
        // clockwise polygon
        let cw = Region::polygon(&[Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)]);
        assert!(cw.is_err());
    }

    fn cut_square() -> (Element, Circle) {
        let circle = Circle::centered(crate::study::CircleBenchmark::DEFAULT_R0);
        let h = 0.05;
        let el = Element::axis_rectangle(Point::new(0.45, 0.1), h, h);
        (el, circle)
    }

    #[test]
    fn split_areas_sum_to_element() {
        let (el, circle) = cut_square();
        for partition in [Partition::Curve, Partition::Line] {
            let cut = compute_cut(&el, &circle, partition, FluxPoint::CurveMidpoint).unwrap();
            let (minus, plus) = split_element(&el, &cut, &circle, partition).unwrap();
            assert!((minus.area() + plus.area() - el.area()).abs() < 1e-13);
            assert!(minus.area() > 0.0 && plus.area() > 0.0);
            let frame = Frame::for_element(&el);
            let p = Poly::new(frame, [0.3, -1.2, 0.7, 2.5]);
            let whole = Region::element(&el).unwrap().integrate(|x| p.eval(x) * p.eval(x));
            let parts = minus.integrate(|x| p.eval(x) * p.eval(x)) + plus.integrate(|x| p.eval(x) * p.eval(x));
            assert!((whole - parts).abs() < 1e-11 * whole.abs());
        }
    }

    #[test]
    fn curve_and_line_minus_areas_differ_by_sliver() {
        let (el, circle) = cut_square();
        let cut = compute_cut(&el, &circle, Partition::Curve, FluxPoint::CurveMidpoint).unwrap();
        let (curve_minus, _) = split_element(&el, &cut, &circle, Partition::Curve).unwrap();
        let (line_minus, _) = split_element(&el, &cut, &circle, Partition::Line).unwrap();
        // the disk is convex, so the arc bulges past the chord into the plus side
        let diff = curve_minus.area() - line_minus.area();
        assert!(diff > 0.0);
        let chord = cut.chord_length();
        let r = circle.radius;
        let theta = 2.0 * (chord / (2.0 * r)).asin();
        let segment_area = 0.5 * r * r * (theta - theta.sin());
        assert!((diff - segment_area).abs() < 1e-14);
    }

    #[test]
    fn cubature_matches_adaptive_on_curved_pieces() {
        let (el, circle) = cut_square();
        let cut = compute_cut(&el, &circle, Partition::Curve, FluxPoint::CurveMidpoint).unwrap();
        let (minus, plus) = split_element(&el, &cut, &circle, Partition::Curve).unwrap();
        let f = |p: &Point| (p.x * p.x + p.y * p.y).powf(2.5) + p.x * p.y;
        for region in [&minus, &plus] {
            let a = region.integrate(f);
            let b: f64 = region.cubature(8).iter().map(|(p, w)| w * f(p)).sum();
            assert!((a - b).abs() < 1e-12 * a.abs());
        }
    }

    #[test]
    fn edge_split_integration() {
        let frame = Frame::identity();
        let one = Poly::constant(frame, 1.0);
        let a = Point::new(0.0, 0.0);
        let b = Point::new(0.3, 0.4);
        let split = EdgeClass::Split { point: Point::new(0.12, 0.16), start_side: Side::Minus };
        assert!((integrate_edge_split(&a, &b, &split, &one, &one) - 0.5).abs() < 1e-15);

        // L restricted to the minus part matches the closed form
        let l = Poly::affine(frame, Vector::new(0.8, -0.6), Point::new(0.12, 0.16));
        let zero = Poly::zero(frame);
        let got = integrate_edge_split(&a, &b, &split, &l, &zero);
        let part = (Point::new(0.12, 0.16) - a).norm();
        let closed = part * 0.5 * (l.eval(&a) + 0.0);
        assert!((got - closed).abs() < 1e-15);

        // random quadratic against adaptive 1D quadrature
        let q = Poly::new(frame, [0.2, -1.0, 3.0, 1.7]);
        let q2 = Poly::new(frame, [-0.5, 0.4, 0.1, -2.0]);
        let got = integrate_edge_split(&a, &b, &split, &q, &q2);
        let len = 0.5;
        let split_t = 0.4;
        let oracle = adaptive_integral(0.0, split_t, 1e-14, &|t| q.eval(&(a + (b - a) * t)))
            * len
            + adaptive_integral(split_t, 1.0, 1e-14, &|t| q2.eval(&(a + (b - a) * t))) * len;
        assert!((got - oracle).abs() < 1e-12);
    }
}
