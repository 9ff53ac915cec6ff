//! Immersed shape functions on interface elements.
//!
//! On an interface element the shape function is a pair of polynomials of the
//! element space glued by approximate jump conditions: value continuity on the
//! chord `l = DE` (plus equal `∂xx` for rotated Q1) and flux continuity
//! `β⁻ ∇φ⁻(F)·v = β⁺ ∇φ⁺(F)·v` at the flux point. Writing the piece on the side
//! that touches fewer edges as `φ_small = φ_other + c0 L` with `L = n̄·(X - D)`,
//! the edge-average conditions reduce to the rank-one system
//! `(I + k δ γᵀ) c = b`, solved in closed form by the Sherman-Morrison formula.

use nalgebra::Matrix2;

use crate::basis::{Poly, ShapeSet};
use crate::error::{Error, Result};
use crate::geometry::{Beta, CutInfo, EdgeClass, Element, InterfaceCurve, Point, Side, Vector};

/// Threshold on `|1 + k γᵀδ|` below which the construction is refused.
pub const NEAR_SINGULAR: f64 = 1e-10;

/// Jump matrices at the flux point: `m_*` built from the flux normal alone,
/// `mbar_*` mixing the chord normal with the flux normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpMatrices {
    pub m_minus: Matrix2<f64>,
    pub m_plus: Matrix2<f64>,
    pub mbar_minus: Matrix2<f64>,
    pub mbar_plus: Matrix2<f64>,
    pub rho: f64,
}

impl JumpMatrices {
    pub fn m(&self, side: Side) -> &Matrix2<f64> {
        match side {
            Side::Minus => &self.m_minus,
            Side::Plus => &self.m_plus,
        }
    }

    pub fn mbar(&self, side: Side) -> &Matrix2<f64> {
        match side {
            Side::Minus => &self.mbar_minus,
            Side::Plus => &self.mbar_plus,
        }
    }
}

/// Curve jump matrix for normal `n` and coefficient ratio `β^s/β^s'`.
pub fn curve_jump_matrix(n: &Vector, ratio: f64) -> Matrix2<f64> {
    let (nx, ny) = (n.x, n.y);
    Matrix2::new(
        ny * ny + ratio * nx * nx,
        (ratio - 1.0) * nx * ny,
        (ratio - 1.0) * nx * ny,
        nx * nx + ratio * ny * ny,
    )
}

/// Line jump matrix for chord normal `nbar`, flux normal `v` and ratio `β^s/β^s'`.
pub fn line_jump_matrix(nbar: &Vector, v: &Vector, ratio: f64) -> Result<Matrix2<f64>> {
    let alignment = nbar.dot(v);
    if alignment <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "n̄·v(F) = {alignment} is not positive"
        )));
    }
    let m = Matrix2::new(
        nbar.y * v.y + ratio * nbar.x * v.x,
        (ratio - 1.0) * nbar.x * v.y,
        (ratio - 1.0) * nbar.y * v.x,
        nbar.x * v.x + ratio * nbar.y * v.y,
    );
    Ok(m / alignment)
}

pub fn jump_matrices(cut: &CutInfo, beta: Beta) -> Result<JumpMatrices> {
    let to_plus = beta.minus / beta.plus;
    let to_minus = beta.plus / beta.minus;
    Ok(JumpMatrices {
        m_minus: curve_jump_matrix(&cut.vf, to_plus),
        m_plus: curve_jump_matrix(&cut.vf, to_minus),
        mbar_minus: line_jump_matrix(&cut.nbar, &cut.vf, to_plus)?,
        mbar_plus: line_jump_matrix(&cut.nbar, &cut.vf, to_minus)?,
        rho: beta.rho(),
    })
}

/// Side whose piece carries the `c0 L` correction: the one touching fewer
/// edges, ties going to the minus side.
pub fn small_side(cut: &CutInfo) -> Side {
    let minus = cut.edges_touching(Side::Minus).len();
    let plus = cut.edges_touching(Side::Plus).len();
    if minus <= plus {
        Side::Minus
    } else {
        Side::Plus
    }
}

/// The rank-one system `(I + k δ γᵀ) c = b` for the coefficients on the edges
/// touching the small side.
#[derive(Clone, Debug, PartialEq)]
pub struct SmSystem {
    pub small_side: Side,
    /// Local edges touching the small side (the unknowns).
    pub unknown_edges: Vec<usize>,
    /// Local edges lying entirely on the other side (coefficients fixed to `v`).
    pub known_edges: Vec<usize>,
    pub k: f64,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub b: Vec<f64>,
    /// Target averages on the unknown edges.
    pub v_unknown: Vec<f64>,
    /// `Σ_{j known} γ_j v_j`
    pub known_flux: f64,
}

impl SmSystem {
    pub fn gamma_dot_delta(&self) -> f64 {
        dot(&self.gamma, &self.delta)
    }

    /// `1 + k γᵀδ`
    pub fn denominator(&self) -> f64 {
        1.0 + self.k * self.gamma_dot_delta()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(1/|b_i|) ∫_{b_i ∩ T^side} L ds` in closed form (`L` is affine).
pub fn chord_distance_average(element: &Element, cut: &CutInfo, local_edge: usize, side: Side) -> f64 {
    let (a, b) = element.edge_endpoints(local_edge);
    let len = (b - a).norm();
    let l = |p: &Point| cut.chord_distance(p);
    let integral = match cut.edge_classes[local_edge] {
        EdgeClass::Split { point, start_side } => {
            let end = if start_side == side { a } else { b };
            (end - point).norm() * 0.5 * (l(&end) + l(&point))
        }
        class if class.lies_on(side) => len * 0.5 * (l(&a) + l(&b)),
        _ => 0.0,
    };
    integral / len
}

/// Assembles the Sherman-Morrison system for the target edge values `v`.
pub fn build_sm_system(
    element: &Element,
    cut: &CutInfo,
    shapes: &ShapeSet,
    beta: Beta,
    v: &[f64],
) -> SmSystem {
    let small = small_side(cut);
    let other = small.opposite();
    let unknown_edges = cut.edges_touching(small);
    let known_edges = cut.edges_on(other);
    let alignment = cut.nbar.dot(&cut.vf);
    // 1/ρ_eff - 1 with ρ_eff = β_small / β_other
    let k = (beta.on(other) / beta.on(small) - 1.0) / alignment;
    let gamma_of = |i: usize| shapes.shape(i).grad(&cut.f).dot(&cut.vf);
    let gamma: Vec<f64> = unknown_edges.iter().map(|&i| gamma_of(i)).collect();
    let delta: Vec<f64> = unknown_edges
        .iter()
        .map(|&i| chord_distance_average(element, cut, i, small))
        .collect();
    let known_flux: f64 = known_edges.iter().map(|&j| gamma_of(j) * v[j]).sum();
    let b = unknown_edges
        .iter()
        .zip(&delta)
        .map(|(&i, d)| v[i] - k * d * known_flux)
        .collect();
    SmSystem {
        small_side: small,
        b,
        v_unknown: unknown_edges.iter().map(|&i| v[i]).collect(),
        unknown_edges,
        known_edges,
        k,
        gamma,
        delta,
        known_flux,
    }
}

/// Solution of a [`SmSystem`].
#[derive(Clone, Debug, PartialEq)]
pub struct SmSolution {
    pub c: Vec<f64>,
    pub c0: f64,
    pub denominator: f64,
}

/// Solves the system: `c = b - k (γᵀb) δ / (1 + k γᵀδ)`, `c0 = k (γᵀc + Σ_known γ_j v_j)`.
///
/// Evaluated in the algebraically equal form `c0 = k (γᵀv_u + Σ_known γ_j v_j) / (1 + k γᵀδ)`,
/// `c = v_u - c0 δ`: `b` carries an `O(k)` term that cancels in `c`, and going through
/// it loses accuracy like `k²` for large coefficient contrast.
pub fn solve_sm(system: &SmSystem) -> Result<SmSolution> {
    let denominator = system.denominator();
    if denominator.abs() < NEAR_SINGULAR {
        return Err(Error::NearSingular { denominator });
    }
    let flux = dot(&system.gamma, &system.v_unknown) + system.known_flux;
    let c0 = system.k * flux / denominator;
    let c = system
        .v_unknown
        .iter()
        .zip(&system.delta)
        .map(|(v, d)| v - c0 * d)
        .collect();
    Ok(SmSolution { c, c0, denominator })
}

/// The textbook evaluation through `b`; kept for comparison.
pub fn solve_sm_direct(system: &SmSystem) -> Result<SmSolution> {
    let denominator = system.denominator();
    if denominator.abs() < NEAR_SINGULAR {
        return Err(Error::NearSingular { denominator });
    }
    let scale = system.k * dot(&system.gamma, &system.b) / denominator;
    let c: Vec<f64> = system
        .b
        .iter()
        .zip(&system.delta)
        .map(|(b, d)| b - scale * d)
        .collect();
    let c0 = system.k * (dot(&system.gamma, &c) + system.known_flux);
    Ok(SmSolution { c, c0, denominator })
}

/// A function of the local immersed space, one polynomial per side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiecewiseShape {
    pub minus: Poly,
    pub plus: Poly,
    /// The small-side piece equals the other piece plus `c0 L`.
    pub c0: f64,
    pub small_side: Side,
}

impl PiecewiseShape {
    pub fn piece(&self, side: Side) -> &Poly {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// Evaluates the piece selected by the cut's partition rule.
    pub fn eval(&self, cut: &CutInfo, curve: &dyn InterfaceCurve, p: &Point) -> f64 {
        self.piece(cut.side_of(curve, p)).eval(p)
    }

    pub fn grad(&self, cut: &CutInfo, curve: &dyn InterfaceCurve, p: &Point) -> Vector {
        self.piece(cut.side_of(curve, p)).grad(p)
    }
}

/// The immersed function with edge averages `v`.
pub fn construct_piecewise(
    element: &Element,
    cut: &CutInfo,
    shapes: &ShapeSet,
    beta: Beta,
    v: &[f64],
) -> Result<PiecewiseShape> {
    let system = build_sm_system(element, cut, shapes, beta, v);
    let solution = solve_sm(&system)?;
    let mut coefficients = v[..shapes.len()].to_vec();
    for (&i, c) in system.unknown_edges.iter().zip(&solution.c) {
        coefficients[i] = *c;
    }
    let other = shapes.combine(&coefficients);
    let small = other + Poly::affine(shapes.frame, cut.nbar, cut.d) * solution.c0;
    let (minus, plus) = match system.small_side {
        Side::Minus => (small, other),
        Side::Plus => (other, small),
    };
    Ok(PiecewiseShape {
        minus,
        plus,
        c0: solution.c0,
        small_side: system.small_side,
    })
}

/// Immersed shape functions `φ_i` with unit average on local edge `i`.
pub fn ife_shape_functions(
    element: &Element,
    cut: &CutInfo,
    shapes: &ShapeSet,
    beta: Beta,
) -> Result<Vec<PiecewiseShape>> {
    let n = shapes.len();
    (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            construct_piecewise(element, cut, shapes, beta, &v)
        })
        .collect()
}

/// Largest residuals of the vector identities satisfied by the immersed basis.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IdentityResiduals {
    /// Zeroth-order identity (values).
    pub values: f64,
    /// First-order identity (derivatives, both directions).
    pub derivatives: f64,
}

/// Sample points for identity checks on `side`: a 5 × 5 grid over the element's
/// bounding box restricted to that side, plus `D`, `E` and `F`.
pub fn identity_sample_points(
    element: &Element,
    cut: &CutInfo,
    curve: &dyn InterfaceCurve,
    side: Side,
) -> Vec<Point> {
    let (lo, hi) = element.bounding_box();
    let mut pts = Vec::new();
    for j in 0..5 {
        for i in 0..5 {
            let p = Point::new(
                lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / 5.0,
                lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / 5.0,
            );
            if element.contains(&p, 0.0) && cut.side_of(curve, &p) == side {
                pts.push(p);
            }
        }
    }
    pts.extend([cut.d, cut.e, cut.f]);
    pts
}

/// Evaluates the value and derivative identities of the immersed basis
/// `Σ_i (M_i - X) φ_i^s(X) + Σ_{i ⊂ T^s'} (M̄^s - I)ᵀ(M_i - X̄_i) φ_i^s(X)
///   + Σ_{i split} (1/|b_i|) ∫_{b_i ∩ T^s'} (M̄^s - I)ᵀ(P - X̄_i) ds φ_i^s(X) = 0`
/// and its gradient (which equals `e_d` after moving the `-X` term), with
/// `anchors[i]` the point `X̄_i` on the chord used for edge `i`.
pub fn check_identities(
    element: &Element,
    cut: &CutInfo,
    beta: Beta,
    phis: &[PiecewiseShape],
    curve: &dyn InterfaceCurve,
    anchors: &[Point],
) -> Result<IdentityResiduals> {
    let jumps = jump_matrices(cut, beta)?;
    let n = phis.len();
    let mut residuals = IdentityResiduals::default();
    for side in Side::BOTH {
        let other = side.opposite();
        let correction = (jumps.mbar(side) - Matrix2::identity()).transpose();
        // vector coefficient multiplying φ_i^s in the identity, minus the (M_i - X) part
        let shifts: Vec<Vector> = (0..n)
            .map(|i| {
                let midpoint = element.edge_midpoint(i);
                match cut.edge_classes[i] {
                    class if class.lies_on(other) => correction * (midpoint - anchors[i]),
                    EdgeClass::Split { point, start_side } => {
                        let (a, b) = element.edge_endpoints(i);
                        let end = if start_side == other { a } else { b };
                        let part = (end - point).norm();
                        let centre = nalgebra::center(&end, &point);
                        correction * (centre - anchors[i]) * (part / (b - a).norm())
                    }
                    _ => Vector::zeros(),
                }
            })
            .collect();
        for x in identity_sample_points(element, cut, curve, side) {
            let mut value = Vector::zeros();
            let mut dx = Vector::new(-1.0, 0.0);
            let mut dy = Vector::new(0.0, -1.0);
            for (i, phi) in phis.iter().enumerate() {
                let piece = phi.piece(side);
                let weight = element.edge_midpoint(i) - x + shifts[i];
                let g = piece.grad(&x);
                value += weight * piece.eval(&x);
                dx += weight * g.x;
                dy += weight * g.y;
            }
            residuals.values = residuals.values.max(value.norm());
            residuals.derivatives = residuals.derivatives.max(dx.norm()).max(dy.norm());
        }
    }
    Ok(residuals)
}
