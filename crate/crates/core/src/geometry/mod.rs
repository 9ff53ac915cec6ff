//! Cartesian meshes, interface curves and the cut geometry of interface elements.
//!
//! Orientation convention: the minus side is where the level set is negative, and
//! every normal (chord normal `n̄`, curve normal, flux normal) points from the
//! minus side toward the plus side.

mod curve;
mod cut;
mod mesh;

pub use curve::{Circle, InterfaceCurve, StraightLine};
pub use cut::{
    classify_elements, compute_cut, find_crossing, Classification, CutInfo, EdgeClass,
    ElementClass, FluxPoint, Partition, ROOT_TOLERANCE, VERTEX_TOLERANCE,
};
pub use mesh::{build_mesh, CellType, Domain, Edge, Element, Mesh};

pub type Point = nalgebra::Point2<f64>;
pub type Vector = nalgebra::Vector2<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Minus, Side::Plus];

    /// Side of a level-set value; zero belongs to the plus side.
    pub fn of_value(value: f64) -> Side {
        if value < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Minus => 0,
            Side::Plus => 1,
        }
    }
}

/// Piecewise constant diffusion coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Beta {
    pub minus: f64,
    pub plus: f64,
}

impl Beta {
    pub fn new(minus: f64, plus: f64) -> Self {
        assert!(minus > 0.0 && plus > 0.0, "coefficients must be positive");
        Self { minus, plus }
    }

    pub fn on(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.minus,
            Side::Plus => self.plus,
        }
    }

    /// `β⁻ / β⁺`
    pub fn rho(&self) -> f64 {
        self.minus / self.plus
    }
}
