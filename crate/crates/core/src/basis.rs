//! Standard nonconforming elements with edge-average degrees of freedom:
//! Crouzeix-Raviart on triangles (`span{1, x, y}`) and rotated Q1 on rectangles
//! (`span{1, x, y, x² - y²}`).
//!
//! Polynomials are stored in physical coordinates relative to a [`Frame`]: the
//! monomials are taken in `ξ = (x - cx)/s`, `η = (y - cy)/s` with the element
//! centroid as center and the element width as scale. `ξ² - η²` spans the same
//! space as `x² - y²` modulo linear terms, so the space is unchanged while the
//! edge-average system stays well conditioned on fine meshes.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::geometry::{CellType, Element, Point, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    CrouzeixRaviart,
    RotatedQ1,
}

impl Family {
    pub fn dim(self) -> usize {
        match self {
            Family::CrouzeixRaviart => 3,
            Family::RotatedQ1 => 4,
        }
    }

    pub fn cell_type(self) -> CellType {
        match self {
            Family::CrouzeixRaviart => CellType::Triangular,
            Family::RotatedQ1 => CellType::Rectangular,
        }
    }
}

/// Local coordinate frame of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub center: Point,
    pub scale: f64,
}

impl Frame {
    /// Plain physical monomials `1, x, y, x² - y²`.
    pub fn identity() -> Self {
        Self {
            center: Point::origin(),
            scale: 1.0,
        }
    }

    pub fn for_element(element: &Element) -> Self {
        let (lo, hi) = element.bounding_box();
        let width = hi - lo;
        Self {
            center: element.centroid(),
            scale: width.x.max(width.y),
        }
    }

    #[inline]
    pub fn local(&self, p: &Point) -> (f64, f64) {
        (
            (p.x - self.center.x) / self.scale,
            (p.y - self.center.y) / self.scale,
        )
    }
}

/// Element of `span{1, ξ, η, ξ² - η²}`; Crouzeix-Raviart functions keep the last
/// coefficient at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly {
    pub frame: Frame,
    pub coeffs: [f64; 4],
}

impl Poly {
    pub fn new(frame: Frame, coeffs: [f64; 4]) -> Self {
        Self { frame, coeffs }
    }

    pub fn zero(frame: Frame) -> Self {
        Self::new(frame, [0.0; 4])
    }

    pub fn constant(frame: Frame, c: f64) -> Self {
        Self::new(frame, [c, 0.0, 0.0, 0.0])
    }

    /// Affine function `normal · (X - origin)`.
    pub fn affine(frame: Frame, normal: Vector, origin: Point) -> Self {
        let s = frame.scale;
        Self::new(
            frame,
            [
                normal.dot(&(frame.center - origin)),
                s * normal.x,
                s * normal.y,
                0.0,
            ],
        )
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        let (u, v) = self.frame.local(p);
        let c = &self.coeffs;
        c[0] + c[1] * u + c[2] * v + c[3] * (u * u - v * v)
    }

    #[inline]
    pub fn grad(&self, p: &Point) -> Vector {
        let (u, v) = self.frame.local(p);
        let c = &self.coeffs;
        Vector::new(c[1] + 2.0 * c[3] * u, c[2] - 2.0 * c[3] * v) / self.frame.scale
    }

    /// `∂xx`, constant over the element.
    pub fn dxx(&self) -> f64 {
        2.0 * self.coeffs[3] / (self.frame.scale * self.frame.scale)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.frame, self.coeffs.map(|c| c * factor))
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        debug_assert_eq!(self.frame, rhs.frame);
        let mut c = self.coeffs;
        for (a, b) in c.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
        Poly::new(self.frame, c)
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for Poly {
    type Output = Poly;
    fn mul(self, rhs: f64) -> Poly {
        self.scaled(rhs)
    }
}

/// Values of the frame monomials `1, ξ, η, ξ² - η²` at `p`.
#[inline]
pub fn monomials(frame: &Frame, p: &Point) -> [f64; 4] {
    let (u, v) = frame.local(p);
    [1.0, u, v, u * u - v * v]
}

/// Exact integral of a polynomial of `span{1, x, y, x² - y²}` along a segment
/// (Simpson's rule is exact up to cubics).
pub fn segment_integral(poly: &Poly, a: &Point, b: &Point) -> f64 {
    let m = nalgebra::center(a, b);
    (b - a).norm() * (poly.eval(a) + 4.0 * poly.eval(&m) + poly.eval(b)) / 6.0
}

/// `(1/|b|) ∫_b p ds` for the segment `b = [a, c]`.
pub fn edge_average(poly: &Poly, a: &Point, b: &Point) -> f64 {
    let m = nalgebra::center(a, b);
    (poly.eval(a) + 4.0 * poly.eval(&m) + poly.eval(b)) / 6.0
}

/// The standard shape functions `ψ_i` of one element: row `i` of `coeffs` holds the
/// frame-monomial coefficients of `ψ_i`, which has unit average on local edge `i`
/// and zero average on the others.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSet {
    pub family: Family,
    pub frame: Frame,
    coeffs: [[f64; 4]; 4],
}

impl ShapeSet {
    pub fn len(&self) -> usize {
        self.family.dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self, i: usize) -> [f64; 4] {
        self.coeffs[i]
    }

    pub fn shape(&self, i: usize) -> Poly {
        Poly::new(self.frame, self.coeffs[i])
    }

    pub fn shapes(&self) -> impl Iterator<Item = Poly> + '_ {
        (0..self.len()).map(move |i| self.shape(i))
    }

    /// `Σ_i v_i ψ_i`
    pub fn combine(&self, values: &[f64]) -> Poly {
        let mut c = [0.0; 4];
        for (i, v) in values.iter().enumerate().take(self.len()) {
            for (k, ck) in c.iter_mut().enumerate() {
                *ck += v * self.coeffs[i][k];
            }
        }
        Poly::new(self.frame, c)
    }
}

/// Solves the edge-average system for the standard shape functions of `element`.
pub fn standard_shapes(element: &Element, family: Family) -> Result<ShapeSet> {
    if element.cell_type != family.cell_type() {
        return Err(Error::Config(format!(
            "{family:?} elements need {:?} cells, got {:?}",
            family.cell_type(),
            element.cell_type
        )));
    }
    let frame = Frame::for_element(element);
    let n = family.dim();
    // V[j][k] = average of monomial k over edge j; padded to 4×4 for triangles
    let mut v = Matrix4::<f64>::identity();
    for j in 0..n {
        let (a, b) = element.edge_endpoints(j);
        for k in 0..n {
            let mut c = [0.0; 4];
            c[k] = 1.0;
            v[(j, k)] = edge_average(&Poly::new(frame, c), &a, &b);
        }
    }
    let lu = v.lu();
    if lu.determinant().abs() < 1e-12 {
        return Err(Error::SingularBasis);
    }
    // coefficient rows C satisfy C Vᵀ = I
    let inv = lu.try_inverse().ok_or(Error::SingularBasis)?;
    let c = inv.transpose();
    let mut coeffs = [[0.0; 4]; 4];
    for (i, row) in coeffs.iter_mut().enumerate().take(n) {
        for (k, ck) in row.iter_mut().enumerate().take(n) {
            *ck = c[(i, k)];
        }
    }
    Ok(ShapeSet {
        family,
        frame,
        coeffs,
    })
}
