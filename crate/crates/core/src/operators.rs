//! Frustration-free Hamiltonians `H_G = Σ_e P^{type(e)}_e`.
//!
//! Basis states are indexed by `Σ_k σ(x_k)·d^k` over the graph's vertex
//! order, so site 0 varies fastest. Each projector acts with its first
//! tensor factor on the edge tail.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{induced_subgraph, Edge, Family, Graph, Patch, PatchKind, Role};
use crate::linalg::Matrix;
use crate::sampler::ProjectorFrame;

/// Largest state-vector length accepted by [`assemble`].
pub const DEFAULT_STATE_CAP: usize = 1 << 24;
/// Largest dense matrix accepted by [`HamiltonianHandle::materialize_dense`].
pub const DEFAULT_DENSE_CAP: usize = 8192;

/// A symmetric operator applied without forming its matrix.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y ← A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for Matrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = crate::linalg::dot(self.row(i), x);
        }
    }
}

/// `H_G` for a graph, a local dimension and one frame per edge type.
#[derive(Clone, Debug)]
pub struct HamiltonianHandle {
    graph: Graph,
    d: usize,
    frames: Vec<ProjectorFrame>,
    dim: usize,
}

/// Builds `H_G`; `frames[j − 1]` is the prototype for edge type `j`.
pub fn assemble(g: &Graph, d: usize, frames: &[ProjectorFrame]) -> Result<HamiltonianHandle> {
    assemble_with_cap(g, d, frames, DEFAULT_STATE_CAP)
}

pub fn assemble_with_cap(g: &Graph, d: usize, frames: &[ProjectorFrame], cap: usize) -> Result<HamiltonianHandle> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("local dimension d={d} must be at least 2")));
    }
    for ty in g.present_types() {
        match frames.get(ty as usize - 1) {
            None => return Err(Error::MissingAssignment(ty)),
            Some(f) if f.d() != d => {
                return Err(Error::InvalidParameter(format!("frame for type {ty} has d={}, expected {d}", f.d())))
            }
            Some(_) => {}
        }
    }
    let dim = checked_dim(d, g.num_vertices(), cap)?;
    Ok(HamiltonianHandle { graph: g.clone(), d, frames: frames.to_vec(), dim })
}

fn checked_dim(d: usize, n: usize, cap: usize) -> Result<usize> {
    let mut dim: u128 = 1;
    for _ in 0..n {
        dim = dim.saturating_mul(d as u128);
        if dim > cap as u128 {
            return Err(Error::DimensionCap { dim: (d as u128).saturating_pow(n as u32), cap });
        }
    }
    Ok(dim as usize)
}

impl HamiltonianHandle {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn frames(&self) -> &[ProjectorFrame] {
        &self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn stride(&self, v: usize) -> usize {
        self.d.pow(v as u32)
    }

    fn frame_of(&self, e: &Edge) -> &ProjectorFrame {
        &self.frames[e.ty as usize - 1]
    }

    /// Offsets of the `d²` two-site states of an edge, in Kronecker order
    /// (tail digit most significant).
    fn pair_offsets(&self, e: &Edge) -> Vec<usize> {
        let (st, sh) = (self.stride(e.tail), self.stride(e.head));
        let mut off = Vec::with_capacity(self.d * self.d);
        for a in 0..self.d {
            for b in 0..self.d {
                off.push(a * st + b * sh);
            }
        }
        off
    }

    /// Basis indices whose digits on both edge endpoints are zero.
    fn pair_bases(&self, e: &Edge) -> Vec<usize> {
        let (st, sh) = (self.stride(e.tail), self.stride(e.head));
        (0..self.dim).filter(|&i| (i / st) % self.d == 0 && (i / sh) % self.d == 0).collect()
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: v.len() });
        }
        let mut out = vec![0.0; self.dim];
        self.apply(v, &mut out);
        Ok(out)
    }

    /// Dense matrix, limited to [`DEFAULT_DENSE_CAP`] rows.
    pub fn materialize_dense(&self) -> Result<Matrix> {
        self.materialize_dense_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn materialize_dense_with_cap(&self, cap: usize) -> Result<Matrix> {
        if self.dim > cap {
            return Err(Error::DimensionCap { dim: self.dim as u128, cap });
        }
        let mut m = Matrix::zeros(self.dim, self.dim);
        let n2 = self.d * self.d;
        for e in self.graph.edges() {
            let p = self.frame_of(e).projector();
            let off = self.pair_offsets(e);
            for base in self.pair_bases(e) {
                for a in 0..n2 {
                    let row = m.row_mut(base + off[a]);
                    let pa = p.row(a);
                    for b in 0..n2 {
                        row[base + off[b]] += pa[b];
                    }
                }
            }
        }
        Ok(m)
    }

    /// `H_S`: the edges of the induced subgraph on `vertices`, acting on
    /// `d^|S|` with the vertices renumbered in ascending order.
    pub fn restrict(&self, vertices: &[usize]) -> Result<HamiltonianHandle> {
        let sub = induced_subgraph(&self.graph, vertices)?;
        let dim = checked_dim(self.d, sub.graph.num_vertices(), DEFAULT_STATE_CAP)?;
        Ok(HamiltonianHandle { graph: sub.graph, d: self.d, frames: self.frames.clone(), dim })
    }

    /// Number of columns of the factor `B` with `H = B Bᵀ`.
    pub fn gram_dim(&self) -> usize {
        self.graph.edges().iter().map(|e| self.frame_of(e).rank()).sum::<usize>() * (self.dim / (self.d * self.d))
    }

    /// `BᵀB`, where the columns of `B` are `v ⊗ e_β` over edges, frame
    /// vectors `v` and configurations `β` of the other sites. Its nonzero
    /// spectrum equals that of `H`.
    pub fn gram_matrix(&self) -> Result<Matrix> {
        let m = self.gram_dim();
        if m > DEFAULT_DENSE_CAP {
            return Err(Error::DimensionCap { dim: m as u128, cap: DEFAULT_DENSE_CAP });
        }
        // entries of B grouped by row: (column, value)
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.dim];
        let mut col = 0;
        for e in self.graph.edges() {
            let off = self.pair_offsets(e);
            let bases = self.pair_bases(e);
            for v in self.frame_of(e).columns() {
                for &base in &bases {
                    for (a, &va) in v.iter().enumerate() {
                        if va != 0.0 {
                            rows[base + off[a]].push((col, va));
                        }
                    }
                    col += 1;
                }
            }
        }
        let mut g = Matrix::zeros(m, m);
        for entries in &rows {
            for &(i, vi) in entries {
                let row = g.row_mut(i);
                for &(j, vj) in entries {
                    row[j] += vi * vj;
                }
            }
        }
        Ok(g)
    }
}

impl LinearOperator for HamiltonianHandle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let n2 = self.d * self.d;
        let mut buf = vec![0.0; n2];
        for e in self.graph.edges() {
            let frame = self.frame_of(e);
            if frame.rank() == 0 {
                continue;
            }
            let off = self.pair_offsets(e);
            for base in self.pair_bases(e) {
                for (b, &o) in buf.iter_mut().zip(&off) {
                    *b = x[base + o];
                }
                for c in frame.columns() {
                    let s = crate::linalg::dot(c, &buf);
                    if s != 0.0 {
                        for (&ca, &o) in c.iter().zip(&off) {
                            y[base + o] += s * ca;
                        }
                    }
                }
            }
        }
    }
}

/// Three-site Hamiltonian of a patch of `g`, sites in the patch's
/// ascending vertex order.
pub fn patch_hamiltonian(g: &Graph, patch: &Patch, frames: &[ProjectorFrame], d: usize) -> Result<Matrix> {
    let local = |v: usize| patch.vertices.iter().position(|&w| w == v).expect("patch vertex");
    let edges = patch
        .edges
        .iter()
        .map(|&i| {
            let e = g.edges()[i];
            Edge { tail: local(e.tail), head: local(e.head), ty: e.ty }
        })
        .collect();
    three_site(edges, g.num_types(), frames, d)
}

/// Three-site Hamiltonian of a patch kind in the local layout
/// `[outer₁, centre, outer₂]`, the centre at position 1.
pub fn kind_hamiltonian(kind: PatchKind, frames: &[ProjectorFrame], d: usize) -> Result<Matrix> {
    let legs = kind.legs();
    let edges = legs
        .iter()
        .zip([0usize, 2])
        .map(|(&(role, ty), outer)| match role {
            Role::Out => Edge { tail: 1, head: outer, ty },
            Role::In => Edge { tail: outer, head: 1, ty },
        })
        .collect();
    let types = legs[0].1.max(legs[1].1);
    three_site(edges, types, frames, d)
}

fn three_site(edges: Vec<Edge>, num_types: u32, frames: &[ProjectorFrame], d: usize) -> Result<Matrix> {
    let coords = (0..3).map(|i| vec![i]).collect();
    let g = Graph::new(coords, edges, crate::lattice::Boundary::Open, Family::Custom, Some(num_types), None)?;
    assemble(&g, d, frames)?.materialize_dense()
}
