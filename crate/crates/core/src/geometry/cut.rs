use crate::error::{Error, Result};

use super::curve::InterfaceCurve;
use super::mesh::{Element, Mesh};
use super::{Point, Side, Vector};

/// How an interface element is divided into its two pieces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Partition {
    /// Pieces separated by the interface arc.
    Curve,
    /// Pieces separated by the chord `DE`.
    Line,
}

/// Where the flux jump condition is enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FluxPoint {
    /// Parametric midpoint of the arc, with the curve normal.
    CurveMidpoint,
    /// Midpoint of the chord, with the chord normal.
    LineMidpoint,
}

/// Side assignment of one edge with respect to the interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeClass {
    Minus,
    Plus,
    /// Cut edge. `start_side` is the side of the edge's first endpoint.
    Split { point: Point, start_side: Side },
}

impl EdgeClass {
    pub fn is_split(&self) -> bool {
        matches!(self, EdgeClass::Split { .. })
    }

    /// Whether some part of the edge lies on `side`.
    pub fn touches(&self, side: Side) -> bool {
        match self {
            EdgeClass::Minus => side == Side::Minus,
            EdgeClass::Plus => side == Side::Plus,
            EdgeClass::Split { .. } => true,
        }
    }

    /// Whether the whole edge lies on `side`.
    pub fn lies_on(&self, side: Side) -> bool {
        match self {
            EdgeClass::Minus => side == Side::Minus,
            EdgeClass::Plus => side == Side::Plus,
            EdgeClass::Split { .. } => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementClass {
    Interface,
    NonInterface(Side),
}

/// Element and edge partition of a mesh with respect to an interface.
#[derive(Clone, Debug)]
pub struct Classification {
    pub elements: Vec<ElementClass>,
    /// Per global edge; split points are measured along the global edge orientation.
    pub edges: Vec<EdgeClass>,
}

impl Classification {
    pub fn interface_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == ElementClass::Interface)
            .map(|(t, _)| t)
    }

    pub fn n_interface_elements(&self) -> usize {
        self.interface_elements().count()
    }

    pub fn n_interface_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_split()).count()
    }
}

/// Geometry of the interface inside one interface element.
#[derive(Clone, Debug)]
pub struct CutInfo {
    /// First cut point met when walking the boundary counterclockwise from vertex 0.
    pub d: Point,
    /// Second cut point.
    pub e: Point,
    /// Local edges carrying `d` and `e`.
    pub d_edge: usize,
    pub e_edge: usize,
    /// Unit normal of the chord `DE`, pointing toward the plus side.
    pub nbar: Vector,
    /// Flux enforcement point.
    pub f: Point,
    /// Normal used for the flux condition at `f`.
    pub vf: Vector,
    pub edge_classes: Vec<EdgeClass>,
    pub vertex_sides: Vec<Side>,
    /// Curve parameters of `d` and `e`; the arc inside the element runs between them.
    pub arc: (f64, f64),
    pub partition: Partition,
    pub flux: FluxPoint,
}

impl CutInfo {
    /// `L(X) = n̄ · (X - D)`, zero on the chord and positive toward the plus side.
    pub fn chord_distance(&self, p: &Point) -> f64 {
        self.nbar.dot(&(p - self.d))
    }

    /// Side of `p` according to the partition rule; points on the dividing set go
    /// to the plus side.
    pub fn side_of(&self, curve: &dyn InterfaceCurve, p: &Point) -> Side {
        let value = match self.partition {
            Partition::Curve => curve.level_set(p),
            Partition::Line => self.chord_distance(p),
        };
        Side::of_value(value)
    }

    /// Local edges touching `side` (both whole and split edges).
    pub fn edges_touching(&self, side: Side) -> Vec<usize> {
        (0..self.edge_classes.len())
            .filter(|&k| self.edge_classes[k].touches(side))
            .collect()
    }

    /// Local edges lying entirely on `side`.
    pub fn edges_on(&self, side: Side) -> Vec<usize> {
        (0..self.edge_classes.len())
            .filter(|&k| self.edge_classes[k].lies_on(side))
            .collect()
    }

    pub fn split_edges(&self) -> Vec<usize> {
        (0..self.edge_classes.len())
            .filter(|&k| self.edge_classes[k].is_split())
            .collect()
    }

    pub fn chord_length(&self) -> f64 {
        (self.e - self.d).norm()
    }
}

/// Residual tolerance factor for cut points, relative to the element size.
pub const ROOT_TOLERANCE: f64 = 1e-13;
/// Distance factor below which a vertex counts as lying on the interface.
pub const VERTEX_TOLERANCE: f64 = 1e-12;

fn distance_estimate(curve: &dyn InterfaceCurve, p: &Point) -> f64 {
    let value = curve.level_set(p);
    let grad = curve.level_set_gradient(p).norm();
    if grad > 0.0 {
        value.abs() / grad
    } else {
        value.abs()
    }
}

fn check_vertex(curve: &dyn InterfaceCurve, p: &Point, h: f64) -> Result<Side> {
    if distance_estimate(curve, p) < VERTEX_TOLERANCE * h {
        return Err(Error::HypothesisViolation(format!(
            "interface passes through mesh vertex ({}, {})",
            p.x, p.y
        )));
    }
    Ok(Side::of_value(curve.level_set(p)))
}

/// Zero of the level set on the segment `a -> b`, whose endpoints must lie on
/// opposite sides. Bisection to a machine-level bracket, then one Newton step.
///
/// The endpoints are ordered canonically first so that an edge shared by two
/// elements yields the bitwise-same point from either side.
pub fn find_crossing(curve: &dyn InterfaceCurve, a: &Point, b: &Point) -> Result<Point> {
    let (a, b) = if (a.x, a.y) <= (b.x, b.y) { (*a, *b) } else { (*b, *a) };
    let dir = b - a;
    let g = |s: f64| curve.level_set(&(a + dir * s));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if (g_lo < 0.0) == (g_hi < 0.0) || g_lo == 0.0 || g_hi == 0.0 {
        return Err(Error::RootFindFailure {
            a: [a.x, a.y],
            b: [b.x, b.y],
        });
    }
    let lo_negative = g_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    let gs = g(s);
    let slope = curve.level_set_gradient(&(a + dir * s)).dot(&dir);
    if slope != 0.0 {
        let polished = s - gs / slope;
        if polished >= lo && polished <= hi && g(polished).abs() <= gs.abs() {
            s = polished;
        }
    }
    Ok(a + dir * s)
}

/// Splits a mesh into interface and non-interface elements and edges, and checks
/// that every cut element has exactly two cut points on two different edges.
pub fn classify_elements(mesh: &Mesh, curve: &dyn InterfaceCurve) -> Result<Classification> {
    let h = mesh.h;
    let mut edges = Vec::with_capacity(mesh.n_edges());
    for (id, edge) in mesh.edges.iter().enumerate() {
        let start_side = check_vertex(curve, &edge.start, h)?;
        let end_side = check_vertex(curve, &edge.end, h)?;
        let crossings = curve.crossings_on_segment(&edge.start, &edge.end);
        let class = if start_side != end_side {
            if crossings != 1 {
                return Err(Error::HypothesisViolation(format!(
                    "interface crosses edge {id} {crossings} times"
                )));
            }
            EdgeClass::Split {
                point: find_crossing(curve, &edge.start, &edge.end)?,
                start_side,
            }
        } else {
            if crossings != 0 {
                return Err(Error::HypothesisViolation(format!(
                    "interface enters and leaves through edge {id}"
                )));
            }
            match start_side {
                Side::Minus => EdgeClass::Minus,
                Side::Plus => EdgeClass::Plus,
            }
        };
        edges.push(class);
    }

    let mut elements = Vec::with_capacity(mesh.n_elements());
    for (t, el) in mesh.elements.iter().enumerate() {
        let cut = el.edges().iter().filter(|&&e| edges[e].is_split()).count();
        let class = match cut {
            0 => ElementClass::NonInterface(Side::of_value(curve.level_set(&el.centroid()))),
            2 => ElementClass::Interface,
            _ => {
                return Err(Error::HypothesisViolation(format!(
                    "interface cuts the boundary of element {t} at {cut} points"
                )))
            }
        };
        elements.push(class);
    }
    Ok(Classification { elements, edges })
}

/// Cut geometry of an interface element.
pub fn compute_cut(
    element: &Element,
    curve: &dyn InterfaceCurve,
    partition: Partition,
    flux: FluxPoint,
) -> Result<CutInfo> {
    let h = element.diameter();
    let vertex_sides = element
        .vertices()
        .iter()
        .map(|v| check_vertex(curve, v, h))
        .collect::<Result<Vec<_>>>()?;
    let n = element.n_edges();
    let cut_edges: Vec<usize> = (0..n)
        .filter(|&k| vertex_sides[k] != vertex_sides[(k + 1) % n])
        .collect();
    if cut_edges.len() != 2 {
        return Err(Error::HypothesisViolation(format!(
            "element boundary is cut on {} edges, expected 2",
            cut_edges.len()
        )));
    }

    let mut edge_classes = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(2);
    for k in 0..n {
        let (a, b) = element.edge_endpoints(k);
        if cut_edges.contains(&k) {
            let p = find_crossing(curve, &a, &b)?;
            if distance_estimate(curve, &p) > ROOT_TOLERANCE * h {
                return Err(Error::RootFindFailure {
                    a: [a.x, a.y],
                    b: [b.x, b.y],
                });
            }
            points.push(p);
            edge_classes.push(EdgeClass::Split {
                point: p,
                start_side: vertex_sides[k],
            });
        } else {
            edge_classes.push(match vertex_sides[k] {
                Side::Minus => EdgeClass::Minus,
                Side::Plus => EdgeClass::Plus,
            });
        }
    }
    let (d, e) = (points[0], points[1]);
    let chord = e - d;
    if chord.norm() <= f64::EPSILON * h {
        return Err(Error::DegenerateGeometry("cut points coincide".into()));
    }
    let mut nbar = Vector::new(-chord.y, chord.x).normalize();
    // orient toward the plus side using the vertex farthest from the chord
    let (far, _) = element
        .vertices()
        .iter()
        .enumerate()
        .map(|(k, v)| (k, nbar.dot(&(v - d)).abs()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let far_value = nbar.dot(&(element.vertices()[far] - d));
    if (far_value > 0.0) != (vertex_sides[far] == Side::Plus) {
        nbar = -nbar;
    }

    let t_d = curve.parameter_of(&d);
    let t_e = curve.unwrap_parameter(t_d, curve.parameter_of(&e));
    let (f, vf) = match flux {
        FluxPoint::CurveMidpoint => {
            let f = curve.point_at(0.5 * (t_d + t_e));
            (f, curve.normal_at(&f))
        }
        FluxPoint::LineMidpoint => (nalgebra::center(&d, &e), nbar),
    };
    if !element.contains(&f, 1e-9 * h) {
        return Err(Error::DegenerateGeometry(format!(
            "flux point ({}, {}) lies outside its element",
            f.x, f.y
        )));
    }
    if nbar.dot(&vf) <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "chord normal and flux normal are not aligned (n̄·v = {})",
            nbar.dot(&vf)
        )));
    }

    Ok(CutInfo {
        d,
        e,
        d_edge: cut_edges[0],
        e_edge: cut_edges[1],
        nbar,
        f,
        vf,
        edge_classes,
        vertex_sides,
        arc: (t_d, t_e),
        partition,
        flux,
    })
}
