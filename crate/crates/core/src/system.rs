//! Global edge numbering, Galerkin assembly over the immersed space and the
//! sparse symmetric solve.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;

use crate::basis::{standard_shapes, Family, Poly, ShapeSet};
use crate::error::{Error, Result};
use crate::geometry::{
    classify_elements, compute_cut, Beta, Classification, CutInfo, Element, ElementClass,
    FluxPoint, InterfaceCurve, Mesh, Partition, Point, Side, Vector,
};
use crate::ife::{ife_shape_functions, PiecewiseShape};
use crate::quad::{adaptive_integral, split_element, Region, ARC_TOLERANCE};

/// Gauss order for stiffness, load and error integrals.
pub const CUBATURE_ORDER: usize = 8;
/// Relative residual at which conjugate gradients stop.
pub const CG_TOLERANCE: f64 = 1e-12;

/// Discretization choices shared by assembly, interpolation and error evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scheme {
    pub family: Family,
    pub partition: Partition,
    pub flux: FluxPoint,
    pub beta: Beta,
}

/// Shape functions of one element.
#[derive(Clone, Debug)]
pub enum LocalSpace {
    Standard { side: Side, shapes: ShapeSet },
    Immersed { cut: CutInfo, phis: Vec<PiecewiseShape> },
}

impl LocalSpace {
    pub fn len(&self) -> usize {
        match self {
            LocalSpace::Standard { shapes, .. } => shapes.len(),
            LocalSpace::Immersed { phis, .. } => phis.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cut(&self) -> Option<&CutInfo> {
        match self {
            LocalSpace::Standard { .. } => None,
            LocalSpace::Immersed { cut, .. } => Some(cut),
        }
    }

    /// Polynomial of basis function `i` used on `side`. Non-interface elements
    /// return the same polynomial for both sides.
    pub fn piece(&self, i: usize, side: Side) -> Poly {
        match self {
            LocalSpace::Standard { shapes, .. } => shapes.shape(i),
            LocalSpace::Immersed { phis, .. } => *phis[i].piece(side),
        }
    }

    /// `Σ_i u_i φ_i` on `side`.
    pub fn combine(&self, local: &[f64], side: Side) -> Poly {
        let mut iter = (0..self.len()).map(|i| self.piece(i, side) * local[i]);
        let first = iter.next().expect("local space is never empty");
        iter.fold(first, |acc, p| acc + p)
    }

    /// Side on which the element's partition places `p`.
    pub fn side_at(&self, curve: &dyn InterfaceCurve, p: &Point) -> Side {
        match self {
            LocalSpace::Standard { side, .. } => *side,
            LocalSpace::Immersed { cut, .. } => cut.side_of(curve, p),
        }
    }
}

/// Edge DOFs: global DOF `k` is edge `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub n_dofs: usize,
    pub element_dofs: Vec<Vec<usize>>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        Self {
            n_dofs: mesh.n_edges(),
            element_dofs: mesh.elements.iter().map(|e| e.edges().to_vec()).collect(),
        }
    }

    pub fn gather(&self, element: usize, global: &[f64]) -> Vec<f64> {
        self.element_dofs[element].iter().map(|&k| global[k]).collect()
    }
}

/// The immersed finite element space on a mesh.
#[derive(Debug)]
pub struct Discretization<'a> {
    pub mesh: &'a Mesh,
    pub curve: &'a dyn InterfaceCurve,
    pub scheme: Scheme,
    pub classification: Classification,
    pub dofs: DofMap,
    pub locals: Vec<LocalSpace>,
}

impl<'a> Discretization<'a> {
    pub fn new(mesh: &'a Mesh, curve: &'a dyn InterfaceCurve, scheme: Scheme) -> Result<Self> {
        let classification = classify_elements(mesh, curve)?;
        let locals = mesh
            .elements
            .par_iter()
            .zip(classification.elements.par_iter())
            .enumerate()
            .map(|(t, (element, class))| {
                local_space(element, *class, curve, scheme).map_err(|e| Error::Assembly {
                    element: t,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mesh,
            curve,
            scheme,
            classification,
            dofs: DofMap::new(mesh),
            locals,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    /// Value of the discrete function `u` at `p` inside element `t`.
    pub fn value(&self, u: &[f64], t: usize, p: &Point) -> f64 {
        let local = &self.locals[t];
        local
            .combine(&self.dofs.gather(t, u), local.side_at(self.curve, p))
            .eval(p)
    }

    pub fn gradient(&self, u: &[f64], t: usize, p: &Point) -> Vector {
        let local = &self.locals[t];
        local
            .combine(&self.dofs.gather(t, u), local.side_at(self.curve, p))
            .grad(p)
    }

    /// Quadrature rules of element `t`, one per side present, for the given partition.
    pub fn cubature(&self, t: usize, partition: Partition) -> Result<Vec<SideRule>> {
        let element = &self.mesh.elements[t];
        match &self.locals[t] {
            LocalSpace::Standard { side, .. } => {
                Ok(vec![(*side, Region::element(element)?.cubature(CUBATURE_ORDER))])
            }
            LocalSpace::Immersed { cut, .. } => {
                let (minus, plus) = split_element(element, cut, self.curve, partition)?;
                Ok(vec![
                    (Side::Minus, minus.cubature(CUBATURE_ORDER)),
                    (Side::Plus, plus.cubature(CUBATURE_ORDER)),
                ])
            }
        }
    }
}

fn local_space(
    element: &Element,
    class: ElementClass,
    curve: &dyn InterfaceCurve,
    scheme: Scheme,
) -> Result<LocalSpace> {
    let shapes = standard_shapes(element, scheme.family)?;
    Ok(match class {
        ElementClass::NonInterface(side) => LocalSpace::Standard { side, shapes },
        ElementClass::Interface => {
            let cut = compute_cut(element, curve, scheme.partition, scheme.flux)?;
            let phis = ife_shape_functions(element, &cut, &shapes, scheme.beta)?;
            LocalSpace::Immersed { cut, phis }
        }
    })
}

/// Element stiffness `Σ_s β^s ∫_{T^s} ∇φ_i·∇φ_j` and load `Σ_s ∫_{T^s} f φ_i`.
pub fn element_system(
    disc: &Discretization,
    t: usize,
    f: &(dyn Fn(&Point, Side) -> f64 + Sync),
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let local = &disc.locals[t];
    let n = local.len();
    let mut k = DMatrix::zeros(n, n);
    let mut load = DVector::zeros(n);
    for (side, rule) in disc.cubature(t, disc.scheme.partition)? {
        let beta = disc.scheme.beta.on(side);
        let pieces: Vec<Poly> = (0..n).map(|i| local.piece(i, side)).collect();
        for (p, w) in rule {
            let grads: Vec<Vector> = pieces.iter().map(|q| q.grad(&p)).collect();
            let fw = f(&p, side) * w;
            for i in 0..n {
                load[i] += fw * pieces[i].eval(&p);
                for j in i..n {
                    k[(i, j)] += beta * w * grads[i].dot(&grads[j]);
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            k[(i, j)] = k[(j, i)];
        }
    }
    Ok((k, load))
}

/// Assembled linear system with Dirichlet rows replaced by identity rows.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix<f64>,
    pub rhs: DVector<f64>,
    /// `(dof, value)` for every boundary edge.
    pub dirichlet: Vec<(usize, f64)>,
}

/// Average of `g` over the segment `a -> b`.
pub fn boundary_average(g: &(dyn Fn(&Point) -> f64 + Sync), a: &Point, b: &Point) -> f64 {
    adaptive_integral(0.0, 1.0, ARC_TOLERANCE, &|s| g(&(a + (b - a) * s)))
}

/// Galerkin system for `-∇·(β∇u) = f` with `u = g` on the outer boundary.
/// Dirichlet values are eliminated symmetrically: known columns move to the
/// right-hand side and the corresponding rows become identity rows.
pub fn assemble(
    disc: &Discretization,
    f: &(dyn Fn(&Point, Side) -> f64 + Sync),
    g: &(dyn Fn(&Point) -> f64 + Sync),
) -> Result<SparseSystem> {
    let mesh = disc.mesh;
    let n = disc.n_dofs();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    let dirichlet: Vec<(usize, f64)> = mesh
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.boundary)
        .map(|(k, e)| (k, boundary_average(g, &e.start, &e.end)))
        .collect();
    for &(k, v) in &dirichlet {
        fixed[k] = Some(v);
    }

    let locals: Vec<(DMatrix<f64>, DVector<f64>)> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|t| {
            element_system(disc, t, f).map_err(|e| Error::Assembly {
                element: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut coo = CooMatrix::new(n, n);
    let mut rhs = DVector::zeros(n);
    for (t, (k, load)) in locals.iter().enumerate() {
        let dofs = &disc.dofs.element_dofs[t];
        for (i, &gi) in dofs.iter().enumerate() {
            if fixed[gi].is_some() {
                continue;
            }
            rhs[gi] += load[i];
            for (j, &gj) in dofs.iter().enumerate() {
                match fixed[gj] {
                    Some(value) => rhs[gi] -= k[(i, j)] * value,
                    None => coo.push(gi, gj, k[(i, j)]),
                }
            }
        }
    }
    for &(k, v) in &dirichlet {
        coo.push(k, k, 1.0);
        rhs[k] = v;
    }
    Ok(SparseSystem {
        matrix: CsrMatrix::from(&coo),
        rhs,
        dirichlet,
    })
}

fn spmv(a: &CsrMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let vals = a.values();
    y.par_iter_mut().enumerate().for_each(|(r, yr)| {
        let range = offsets[r]..offsets[r + 1];
        *yr = cols[range.clone()]
            .iter()
            .zip(&vals[range])
            .map(|(&c, v)| v * x[c])
            .sum();
    });
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().zip(b.par_iter()).map(|(x, y)| x * y).sum()
}

/// Cubature points and weights of the part of an element on one side.
pub type SideRule = (Side, Vec<(Point, f64)>);

/// Outcome of a conjugate gradient run.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub dofs: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients to relative residual
/// [`CG_TOLERANCE`], at most `20 √N` iterations.
pub fn solve(system: &SparseSystem) -> Result<Solution> {
    let a = &system.matrix;
    let n = a.nrows();
    let b = system.rhs.as_slice();
    let max_iter = ((20.0 * (n as f64).sqrt()).ceil() as usize).max(1);
    let mut diag = vec![1.0; n];
    for (r, c, v) in a.triplet_iter() {
        if r == c && *v > 0.0 {
            diag[r] = *v;
        }
    }
    let norm_b = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        return Ok(Solution { dofs: x, iterations: 0, residual: 0.0 });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = 1.0;
    for it in 1..=max_iter {
        spmv(a, &p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        x.par_iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(&ap).for_each(|(r, ap)| *r -= alpha * ap);
        residual = dot(&r, &r).sqrt() / norm_b;
        if residual <= CG_TOLERANCE {
            // confirm against the true residual before accepting
            spmv(a, &x, &mut ap);
            let true_res = ap
                .iter()
                .zip(b)
                .map(|(ax, b)| (b - ax) * (b - ax))
                .sum::<f64>()
                .sqrt()
                / norm_b;
            if true_res <= CG_TOLERANCE {
                return Ok(Solution { dofs: x, iterations: it, residual: true_res });
            }
            r.iter_mut().zip(b).zip(&ap).for_each(|((r, b), ax)| *r = b - ax);
        }
        z.par_iter_mut()
            .zip(&r)
            .zip(&diag)
            .for_each(|((z, r), d)| *z = r / d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}
