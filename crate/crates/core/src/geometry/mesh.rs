use crate::error::{Error, Result};

use super::{Point, Vector};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lower: Point,
    pub upper: Point,
}

impl Domain {
    pub fn new(lower: Point, upper: Point) -> Self {
        Self { lower, upper }
    }

    pub fn unit_square() -> Self {
        Self::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0))
    }

    /// `(-a, a)²`
    pub fn symmetric(a: f64) -> Self {
        Self::new(Point::new(-a, -a), Point::new(a, a))
    }

    pub fn lengths(&self) -> Vector {
        self.upper - self.lower
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.lower.x && p.x <= self.upper.x && p.y >= self.lower.y && p.y <= self.upper.y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellType {
    Triangular,
    Rectangular,
}

impl CellType {
    pub fn edges_per_element(self) -> usize {
        match self {
            CellType::Triangular => 3,
            CellType::Rectangular => 4,
        }
    }
}

/// A mesh cell. Vertices are stored counterclockwise and local edge `k` joins
/// vertex `k` to vertex `k + 1`. Rectangles start at the lower-left corner, so
/// the edges are bottom, right, top, left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub cell_type: CellType,
    vertices: [Point; 4],
    edges: [usize; 4],
}

impl Element {
    pub fn triangle(vertices: [Point; 3], edges: [usize; 3]) -> Self {
        Self {
            cell_type: CellType::Triangular,
            vertices: [vertices[0], vertices[1], vertices[2], Point::origin()],
            edges: [edges[0], edges[1], edges[2], usize::MAX],
        }
    }

    pub fn rectangle(vertices: [Point; 4], edges: [usize; 4]) -> Self {
        Self {
            cell_type: CellType::Rectangular,
            vertices,
            edges,
        }
    }

    /// Axis-aligned rectangle with lower-left corner `origin`; edge ids are local.
    pub fn axis_rectangle(origin: Point, width: f64, height: f64) -> Self {
        let o = origin;
        Self::rectangle(
            [
                o,
                o + Vector::new(width, 0.0),
                o + Vector::new(width, height),
                o + Vector::new(0.0, height),
            ],
            [0, 1, 2, 3],
        )
    }

    pub fn n_edges(&self) -> usize {
        self.cell_type.edges_per_element()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices[..self.n_edges()]
    }

    /// Global ids of the local edges.
    pub fn edges(&self) -> &[usize] {
        &self.edges[..self.n_edges()]
    }

    pub fn edge_endpoints(&self, local: usize) -> (Point, Point) {
        let n = self.n_edges();
        (self.vertices[local], self.vertices[(local + 1) % n])
    }

    pub fn edge_length(&self, local: usize) -> f64 {
        let (a, b) = self.edge_endpoints(local);
        (b - a).norm()
    }

    pub fn edge_midpoint(&self, local: usize) -> Point {
        let (a, b) = self.edge_endpoints(local);
        nalgebra::center(&a, &b)
    }

    pub fn centroid(&self) -> Point {
        let vs = self.vertices();
        let sum = vs.iter().fold(Vector::zeros(), |acc, v| acc + v.coords);
        Point::from(sum / vs.len() as f64)
    }

    pub fn area(&self) -> f64 {
        let vs = self.vertices();
        let n = vs.len();
        0.5 * (0..n)
            .map(|k| {
                let a = vs[k];
                let b = vs[(k + 1) % n];
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
    }

    /// Longest edge.
    pub fn diameter(&self) -> f64 {
        (0..self.n_edges())
            .map(|k| self.edge_length(k))
            .fold(0.0, f64::max)
    }

    /// Smallest axis-aligned box `(lower, upper)` containing the element.
    pub fn bounding_box(&self) -> (Point, Point) {
        let vs = self.vertices();
        let mut lo = vs[0];
        let mut hi = vs[0];
        for v in &vs[1..] {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Whether `p` lies in the closed element (up to `tol`).
    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        let vs = self.vertices();
        let n = vs.len();
        (0..n).all(|k| {
            let a = vs[k];
            let b = vs[(k + 1) % n];
            let e = b - a;
            let w = p - a;
            e.x * w.y - e.y * w.x >= -tol * e.norm()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub start: Point,
    pub end: Point,
    pub boundary: bool,
}

impl Edge {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn midpoint(&self) -> Point {
        nalgebra::center(&self.start, &self.end)
    }
}

/// Uniform Cartesian mesh with one degree of freedom per edge.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub domain: Domain,
    pub n_per_side: usize,
    pub cell_type: CellType,
    pub elements: Vec<Element>,
    pub edges: Vec<Edge>,
    /// Elements sharing each edge; the second slot is empty on the boundary.
    pub edge_elements: Vec<[Option<usize>; 2]>,
    pub h: f64,
}

/// Builds a uniform `n × n` Cartesian mesh. Triangular meshes split every cell
/// along its lower-left to upper-right diagonal.
pub fn build_mesh(domain: Domain, n_per_side: usize, cell_type: CellType) -> Result<Mesh> {
    if n_per_side < 2 {
        return Err(Error::InvalidMesh(format!(
            "need at least 2 cells per side, got {n_per_side}"
        )));
    }
    let len = domain.lengths();
    if !(len.x > 0.0 && len.y > 0.0) || !len.x.is_finite() || !len.y.is_finite() {
        return Err(Error::InvalidMesh(format!("degenerate domain {domain:?}")));
    }
    let n = n_per_side;
    let dx = len.x / n as f64;
    let dy = len.y / n as f64;
    let node = |i: usize, j: usize| {
        Point::new(
            domain.lower.x + dx * i as f64,
            domain.lower.y + dy * j as f64,
        )
    };

    // horizontal edges, then vertical, then diagonals
    let horizontal = |i: usize, j: usize| j * n + i;
    let n_horizontal = n * (n + 1);
    let vertical = |i: usize, j: usize| n_horizontal + j * (n + 1) + i;
    let n_axis = 2 * n_horizontal;
    let diagonal = |i: usize, j: usize| n_axis + j * n + i;

    let mut edges = Vec::with_capacity(n_axis + n * n);
    for j in 0..=n {
        for i in 0..n {
            edges.push(Edge {
                start: node(i, j),
                end: node(i + 1, j),
                boundary: j == 0 || j == n,
            });
        }
    }
    for j in 0..n {
        for i in 0..=n {
            edges.push(Edge {
                start: node(i, j),
                end: node(i, j + 1),
                boundary: i == 0 || i == n,
            });
        }
    }
    if cell_type == CellType::Triangular {
        for j in 0..n {
            for i in 0..n {
                edges.push(Edge {
                    start: node(i, j),
                    end: node(i + 1, j + 1),
                    boundary: false,
                });
            }
        }
    }

    let mut elements = Vec::with_capacity(match cell_type {
        CellType::Rectangular => n * n,
        CellType::Triangular => 2 * n * n,
    });
    for j in 0..n {
        for i in 0..n {
            let (ll, lr, ur, ul) = (node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1));
            let bottom = horizontal(i, j);
            let top = horizontal(i, j + 1);
            let left = vertical(i, j);
            let right = vertical(i + 1, j);
            match cell_type {
                CellType::Rectangular => {
                    elements.push(Element::rectangle([ll, lr, ur, ul], [bottom, right, top, left]));
                }
                CellType::Triangular => {
                    let diag = diagonal(i, j);
                    elements.push(Element::triangle([ll, lr, ur], [bottom, right, diag]));
                    elements.push(Element::triangle([ll, ur, ul], [diag, top, left]));
                }
            }
        }
    }

    let mut edge_elements = vec![[None, None]; edges.len()];
    for (t, el) in elements.iter().enumerate() {
        for &e in el.edges() {
            let slot = &mut edge_elements[e];
            if slot[0].is_none() {
                slot[0] = Some(t);
            } else {
                debug_assert!(slot[1].is_none());
                slot[1] = Some(t);
            }
        }
    }

    let h = edges.iter().map(Edge::length).fold(0.0, f64::max);
    Ok(Mesh {
        domain,
        n_per_side,
        cell_type,
        elements,
        edges,
        edge_elements,
        h,
    })
}

impl Mesh {
    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Width of a grid cell.
    pub fn cell_size(&self) -> f64 {
        self.domain.lengths().x / self.n_per_side as f64
    }

    /// Element whose closure contains `p`, if `p` lies in the domain.
    pub fn locate(&self, p: &Point) -> Option<usize> {
        if !self.domain.contains(p) {
            return None;
        }
        let n = self.n_per_side;
        let len = self.domain.lengths();
        let fx = (p.x - self.domain.lower.x) / len.x * n as f64;
        let fy = (p.y - self.domain.lower.y) / len.y * n as f64;
        let i = (fx.floor() as usize).min(n - 1);
        let j = (fy.floor() as usize).min(n - 1);
        let cell = j * n + i;
        match self.cell_type {
            CellType::Rectangular => Some(cell),
            CellType::Triangular => {
                // lower-right triangle lies below the diagonal
                if fx - i as f64 >= fy - j as f64 {
                    Some(2 * cell)
                } else {
                    Some(2 * cell + 1)
                }
            }
        }
    }
}
