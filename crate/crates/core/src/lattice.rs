//! Lattice graphs with directed, type-labelled edges.
//!
//! Vertices are numbered in lexicographic order of their integer
//! coordinates; that numbering is the tensor-factor order used by
//! [`crate::operators`]. An edge `tail → head` of type `j` carries the
//! prototype `P^j` with its first tensor factor on the tail.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Which construction produced a graph. Determines the interaction count
/// and the degree bound used by the gap certificates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Family {
    /// Hypercubic box in `dim` dimensions.
    Box { dim: usize },
    Honeycomb,
    /// One-dimensional chain with a single prototype.
    Chain,
    /// Anything read from an edge list.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    /// Prototype index, `1..=num_types`.
    pub ty: u32,
}

impl Edge {
    #[inline]
    pub fn touches(&self, v: usize) -> bool {
        self.tail == v || self.head == v
    }

    #[inline]
    pub fn other(&self, v: usize) -> usize {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    coords: Vec<Vec<i64>>,
    edges: Vec<Edge>,
    boundary: Boundary,
    family: Family,
    num_types: u32,
    degree_bound: usize,
}

impl Graph {
    /// Validates and assembles a graph. `num_types` and `degree_bound`
    /// default to the values observed in the edge list.
    pub fn new(
        coords: Vec<Vec<i64>>,
        edges: Vec<Edge>,
        boundary: Boundary,
        family: Family,
        num_types: Option<u32>,
        degree_bound: Option<usize>,
    ) -> Result<Self> {
        let n = coords.len();
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidParameter(format!("edge {e:?} references a missing vertex")));
            }
            if e.tail == e.head {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {}", e.tail)));
            }
            if e.ty == 0 {
                return Err(Error::InvalidParameter("edge type labels start at 1".into()));
            }
            if !seen.insert(*e) {
                return Err(Error::InvalidParameter(format!("duplicate directed edge {e:?}")));
            }
        }
        let observed_types = edges.iter().map(|e| e.ty).max().unwrap_or(0);
        let num_types = num_types.unwrap_or(observed_types);
        if observed_types > num_types {
            return Err(Error::inequality("edge type labels", observed_types, "<=", num_types));
        }
        let mut g = Graph { coords, edges, boundary, family, num_types, degree_bound: 0 };
        let observed_degree = g.max_degree();
        let degree_bound = degree_bound.unwrap_or(observed_degree);
        if observed_degree > degree_bound {
            return Err(Error::inequality("vertex degree", observed_degree, "<=", degree_bound));
        }
        g.degree_bound = degree_bound;
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn coords(&self) -> &[Vec<i64>] {
        &self.coords
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Number of interaction prototypes `T`.
    pub fn num_types(&self) -> u32 {
        self.num_types
    }

    /// Declared degree bound `δ` (2D for boxes, 3 for the honeycomb).
    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Undirected degree of every vertex, counting parallel edges.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vertices()];
        for e in &self.edges {
            deg[e.tail] += 1;
            deg[e.head] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Edge indices incident to each vertex.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.num_vertices()];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.tail].push(i);
            inc[e.head].push(i);
        }
        inc
    }

    /// Simple undirected neighbour sets (parallel edges collapsed).
    pub fn neighbors(&self) -> Vec<BTreeSet<usize>> {
        let mut nb = vec![BTreeSet::new(); self.num_vertices()];
        for e in &self.edges {
            nb[e.tail].insert(e.head);
            nb[e.head].insert(e.tail);
        }
        nb
    }

    /// Edge types actually present.
    pub fn present_types(&self) -> BTreeSet<u32> {
        self.edges.iter().map(|e| e.ty).collect()
    }

    pub fn vertex_of(&self, coord: &[i64]) -> Option<usize> {
        self.coords.iter().position(|c| c.as_slice() == coord)
    }
}

/// `Λ_L = ((−L, L] ∩ ℤ)^D` with one edge `x → x + e_j` of type `j` per
/// vertex and direction.
pub fn build_box_lattice(dim: usize, half_side: usize, boundary: Boundary) -> Result<Graph> {
    if dim == 0 || half_side == 0 {
        return Err(Error::InvalidParameter(format!("box lattice needs D >= 1 and L >= 1, got D={dim}, L={half_side}")));
    }
    let sides = vec![2 * half_side; dim];
    let origin = vec![1 - half_side as i64; dim];
    build_rect(&sides, &origin, boundary)
}

/// Rectangular box with the given side lengths and coordinates starting at 0.
pub fn build_rect_lattice(sides: &[usize], boundary: Boundary) -> Result<Graph> {
    build_rect(sides, &vec![0; sides.len()], boundary)
}

fn build_rect(sides: &[usize], origin: &[i64], boundary: Boundary) -> Result<Graph> {
    let dim = sides.len();
    if dim == 0 || sides.contains(&0) {
        return Err(Error::InvalidParameter("box sides must be positive".into()));
    }
    if boundary == Boundary::Periodic && sides.iter().any(|&s| s < 2) {
        return Err(Error::InvalidParameter("periodic sides must have length >= 2".into()));
    }
    let n: usize = sides.iter().product();
    // mixed radix, first coordinate most significant → lexicographic order
    let mut strides = vec![1usize; dim];
    for j in (0..dim.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * sides[j + 1];
    }
    let digits = |v: usize| -> Vec<usize> { (0..dim).map(|j| (v / strides[j]) % sides[j]).collect() };
    let coords: Vec<Vec<i64>> =
        (0..n).map(|v| digits(v).iter().zip(origin).map(|(&x, &o)| x as i64 + o).collect()).collect();
    let mut edges = Vec::with_capacity(n * dim);
    for v in 0..n {
        let dv = digits(v);
        for j in 0..dim {
            let next = dv[j] + 1;
            let head_digit = if next < sides[j] {
                next
            } else if boundary == Boundary::Periodic {
                0
            } else {
                continue;
            };
            let head = v - dv[j] * strides[j] + head_digit * strides[j];
            edges.push(Edge { tail: v, head, ty: j as u32 + 1 });
        }
    }
    Graph::new(coords, edges, boundary, Family::Box { dim }, Some(dim as u32), Some(2 * dim))
}

/// Chain of `sites` vertices with a single prototype.
pub fn build_chain(sites: usize, boundary: Boundary) -> Result<Graph> {
    if sites < 2 {
        return Err(Error::InvalidParameter("a chain needs at least 2 sites".into()));
    }
    let coords = (0..sites as i64).map(|x| vec![x]).collect();
    let mut edges: Vec<Edge> = (0..sites - 1).map(|x| Edge { tail: x, head: x + 1, ty: 1 }).collect();
    if boundary == Boundary::Periodic {
        edges.push(Edge { tail: sites - 1, head: 0, ty: 1 });
    }
    Graph::new(coords, edges, boundary, Family::Chain, Some(1), Some(2))
}

/// Honeycomb lattice on an `L × L` torus in brick-wall cell coordinates
/// `[cx, cy, s]` with sublattice `s ∈ {0 (A), 1 (B)}`.
///
/// The A site of cell `R` bonds to the B sites of `R` (type 1, the
/// horizontal class), `R − a₁` (type 2) and `R − a₂` (type 3). Types 1 and
/// 2 point A → B, type 3 points B → A.
pub fn build_honeycomb(cells: usize) -> Result<Graph> {
    if cells == 0 {
        return Err(Error::InvalidParameter("honeycomb needs L >= 1".into()));
    }
    let l = cells;
    let id = |cx: usize, cy: usize, s: usize| (cx * l + cy) * 2 + s;
    let mut coords = Vec::with_capacity(2 * l * l);
    for cx in 0..l {
        for cy in 0..l {
            for s in 0..2 {
                coords.push(vec![cx as i64, cy as i64, s as i64]);
            }
        }
    }
    let mut edges = Vec::with_capacity(3 * l * l);
    for cx in 0..l {
        for cy in 0..l {
            let a = id(cx, cy, 0);
            edges.push(Edge { tail: a, head: id(cx, cy, 1), ty: 1 });
            edges.push(Edge { tail: a, head: id((cx + l - 1) % l, cy, 1), ty: 2 });
            edges.push(Edge { tail: id(cx, (cy + l - 1) % l, 1), head: a, ty: 3 });
        }
    }
    Graph::new(coords, edges, Boundary::Periodic, Family::Honeycomb, Some(3), Some(3))
}

/// Edge graph: one vertex per edge of `g`, adjacent iff the edges share an
/// endpoint. Vertex coordinates are `[tail, head, type]` of the source edge.
pub fn line_graph(g: &Graph) -> Graph {
    let coords = g.edges.iter().map(|e| vec![e.tail as i64, e.head as i64, e.ty as i64]).collect();
    let inc = g.incidence();
    let mut pairs = BTreeSet::new();
    for list in &inc {
        for (a, &e) in list.iter().enumerate() {
            for &f in &list[a + 1..] {
                if e != f {
                    pairs.insert((e.min(f), e.max(f)));
                }
            }
        }
    }
    let edges = pairs.into_iter().map(|(e, f)| Edge { tail: e, head: f, ty: 1 }).collect();
    Graph::new(coords, edges, g.boundary, Family::Custom, Some(1), None).expect("line graph is well formed")
}

/// How an edge meets the centre of a patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    /// The centre is the edge's tail.
    Out,
    /// The centre is the edge's head.
    In,
}

/// Geometry class of two edges meeting at one vertex, with their types.
/// `MinusPlus { j, k }` has the incoming edge of type `j` and the outgoing
/// edge of type `k`; `PlusPlus` and `MinusMinus` store `j <= k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatchKind {
    Collinear { j: u32 },
    PlusPlus { j: u32, k: u32 },
    MinusPlus { j: u32, k: u32 },
    MinusMinus { j: u32, k: u32 },
}

impl PatchKind {
    fn classify(first: (Role, u32), second: (Role, u32)) -> Self {
        match (first, second) {
            ((Role::Out, j), (Role::Out, k)) => PatchKind::PlusPlus { j: j.min(k), k: j.max(k) },
            ((Role::In, j), (Role::In, k)) => PatchKind::MinusMinus { j: j.min(k), k: j.max(k) },
            ((Role::In, j), (Role::Out, k)) | ((Role::Out, k), (Role::In, j)) => {
                if j == k {
                    PatchKind::Collinear { j }
                } else {
                    PatchKind::MinusPlus { j, k }
                }
            }
        }
    }

    /// The two (role, type) legs in canonical order.
    pub fn legs(&self) -> [(Role, u32); 2] {
        match *self {
            PatchKind::Collinear { j } => [(Role::In, j), (Role::Out, j)],
            PatchKind::PlusPlus { j, k } => [(Role::Out, j), (Role::Out, k)],
            PatchKind::MinusPlus { j, k } => [(Role::In, j), (Role::Out, k)],
            PatchKind::MinusMinus { j, k } => [(Role::In, j), (Role::In, k)],
        }
    }
}

/// Two edges sharing exactly one vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    /// The three vertices in ascending order.
    pub vertices: [usize; 3],
    pub center: usize,
    /// Edge indices, in the order matching [`PatchKind::legs`].
    pub edges: [usize; 2],
    pub kind: PatchKind,
}

/// Every unordered pair of distinct edges sharing exactly one vertex,
/// found once at the shared vertex.
pub fn enumerate_patches(g: &Graph) -> Vec<Patch> {
    let inc = g.incidence();
    let mut out = Vec::new();
    for (c, list) in inc.iter().enumerate() {
        for (a, &e) in list.iter().enumerate() {
            for &f in &list[a + 1..] {
                let (ee, ff) = (g.edges[e], g.edges[f]);
                let (oe, of) = (ee.other(c), ff.other(c));
                if oe == of {
                    continue;
                }
                let role = |edge: &Edge| if edge.tail == c { Role::Out } else { Role::In };
                let leg_e = (role(&ee), ee.ty);
                let leg_f = (role(&ff), ff.ty);
                let kind = PatchKind::classify(leg_e, leg_f);
                let edges = if kind.legs() == [leg_e, leg_f] { [e, f] } else { [f, e] };
                let mut vertices = [c, oe, of];
                vertices.sort_unstable();
                out.push(Patch { vertices, center: c, edges, kind });
            }
        }
    }
    out
}

/// Distinct patch kinds with their multiplicities.
pub fn patch_kinds(g: &Graph) -> BTreeMap<PatchKind, usize> {
    let mut m = BTreeMap::new();
    for p in enumerate_patches(g) {
        *m.entry(p.kind).or_insert(0) += 1;
    }
    m
}

/// Induced subgraph on a vertex set, with the map back to parent ids and
/// its connected components.
#[derive(Clone, Debug)]
pub struct Subgraph {
    pub graph: Graph,
    /// `parent_ids[new] = old`
    pub parent_ids: Vec<usize>,
    /// Components as lists of new vertex ids.
    pub components: Vec<Vec<usize>>,
}

pub fn induced_subgraph(g: &Graph, vertices: &[usize]) -> Result<Subgraph> {
    let set: BTreeSet<usize> = vertices.iter().copied().collect();
    if set.is_empty() {
        return Err(Error::InvalidParameter("induced subgraph needs a nonempty vertex set".into()));
    }
    if let Some(&bad) = set.iter().find(|&&v| v >= g.num_vertices()) {
        return Err(Error::InvalidParameter(format!("vertex {bad} is not in the graph")));
    }
    let parent_ids: Vec<usize> = set.iter().copied().collect();
    let mut new_id = vec![usize::MAX; g.num_vertices()];
    for (i, &v) in parent_ids.iter().enumerate() {
        new_id[v] = i;
    }
    let coords = parent_ids.iter().map(|&v| g.coords[v].clone()).collect();
    let edges = g
        .edges
        .iter()
        .filter(|e| new_id[e.tail] != usize::MAX && new_id[e.head] != usize::MAX)
        .map(|e| Edge { tail: new_id[e.tail], head: new_id[e.head], ty: e.ty })
        .collect();
    let graph = Graph::new(coords, edges, g.boundary, g.family, Some(g.num_types), Some(g.degree_bound))?;
    let components = connected_components(&graph);
    Ok(Subgraph { graph, parent_ids, components })
}

pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let nb = g.neighbors();
    let mut label = vec![usize::MAX; g.num_vertices()];
    let mut comps = Vec::new();
    for start in 0..g.num_vertices() {
        if label[start] != usize::MAX {
            continue;
        }
        let mut comp = vec![start];
        label[start] = comps.len();
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            for &w in &nb[v] {
                if label[w] == usize::MAX {
                    label[w] = comps.len();
                    comp.push(w);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// All connected vertex subsets with `min_size <= |S| <= max_size`, each as
/// an ascending id list, in ascending bitmask order. Limited to 64 vertices.
pub fn connected_subsets(g: &Graph, min_size: usize, max_size: usize) -> Result<Vec<Vec<usize>>> {
    let n = g.num_vertices();
    if n > 64 {
        return Err(Error::EnumerationBudget { vertices: n, budget: 64 });
    }
    let nb: Vec<u64> = g.neighbors().iter().map(|s| s.iter().fold(0u64, |m, &w| m | (1 << w))).collect();
    let mut found: BTreeSet<u64> = BTreeSet::new();
    let mut frontier: Vec<u64> = (0..n).map(|v| 1u64 << v).collect();
    for size in 1..=max_size.min(n) {
        if size >= min_size {
            found.extend(frontier.iter().copied());
        }
        if size == max_size.min(n) {
            break;
        }
        let mut next = BTreeSet::new();
        for &s in &frontier {
            let mut boundary = 0u64;
            let mut rest = s;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                boundary |= nb[v];
                rest &= rest - 1;
            }
            boundary &= !s;
            while boundary != 0 {
                let w = boundary.trailing_zeros();
                next.insert(s | (1 << w));
                boundary &= boundary - 1;
            }
        }
        frontier = next.into_iter().collect();
    }
    Ok(found
        .into_iter()
        .map(|m| (0..n).filter(|&v| m & (1 << v) != 0).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degree_pair_count(g: &Graph) -> usize {
        g.degrees().iter().map(|d| d * d.saturating_sub(1) / 2).sum()
    }

    #[test]
    fn one_dimensional_boxes() {
        let g = build_box_lattice(1, 1, Boundary::Periodic).unwrap();
        assert_eq!(g.coords(), &[vec![0], vec![1]]);
        assert_eq!(g.edges(), &[Edge { tail: 0, head: 1, ty: 1 }, Edge { tail: 1, head: 0, ty: 1 }]);
        let g = build_box_lattice(1, 2, Boundary::Open).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.num_edges(), 3);
        assert!(g.edges().iter().all(|e| e.ty == 1));
        assert_eq!(g.coords()[0], vec![-1]);
    }

    #[test]
    fn square_periodic_l1_counts() {
        let g = build_box_lattice(2, 1, Boundary::Periodic).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.num_edges(), 8);
        assert_eq!(g.edges().iter().filter(|e| e.ty == 1).count(), 4);
        assert_eq!(g.edges().iter().filter(|e| e.ty == 2).count(), 4);
        assert_eq!(g.max_degree(), 4);
    }

    #[test]
    fn periodic_edge_count_is_d_times_v() {
        for (dim, l) in [(1, 3), (2, 2), (3, 1)] {
            let g = build_box_lattice(dim, l, Boundary::Periodic).unwrap();
            assert_eq!(g.num_edges(), dim * g.num_vertices());
            assert_eq!(g.max_degree(), 2 * dim);
        }
    }

    #[test]
    fn honeycomb_shapes() {
        let g = build_honeycomb(1).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (2, 3));
        assert_eq!(g.present_types().len(), 3);
        for l in 2..5 {
            let g = build_honeycomb(l).unwrap();
            assert_eq!(g.num_vertices(), 2 * l * l);
            assert_eq!(g.num_edges(), 3 * l * l);
            assert!(g.degrees().iter().all(|&d| d == 3));
            assert_eq!(2 * g.num_edges(), 3 * g.num_vertices());
            for t in 1..=3 {
                assert_eq!(g.edges().iter().filter(|e| e.ty == t).count(), g.num_edges() / 3);
            }
        }
        let g = build_honeycomb(2).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (8, 12));
    }

    #[test]
    fn line_graph_examples() {
        let path3 = build_chain(3, Boundary::Open).unwrap();
        let lg = line_graph(&path3);
        assert_eq!((lg.num_vertices(), lg.num_edges()), (2, 1));
        for n in 3..=6 {
            let cycle = build_chain(n, Boundary::Periodic).unwrap();
            let lg = line_graph(&cycle);
            assert_eq!(lg.num_vertices(), n);
            assert_eq!(lg.num_edges(), n);
            assert!(lg.degrees().iter().all(|&d| d == 2));
            assert_eq!(connected_components(&lg).len(), 1);
        }
        let star = Graph::new(
            (0..4).map(|i| vec![i]).collect(),
            (1..4).map(|i| Edge { tail: 0, head: i, ty: 1 }).collect(),
            Boundary::Open,
            Family::Custom,
            None,
            None,
        )
        .unwrap();
        let lg = line_graph(&star);
        assert_eq!(lg.num_edges(), 3);
        assert!(lg.degrees().iter().all(|&d| d == 2));
    }

    #[test]
    fn line_graph_degree_bound() {
        for dim in 1..=3 {
            let g = build_box_lattice(dim, 2, Boundary::Periodic).unwrap();
            let lg = line_graph(&g);
            assert_eq!(lg.num_vertices(), g.num_edges());
            assert_eq!(lg.max_degree(), 4 * dim - 2);
        }
        let lg = line_graph(&build_honeycomb(3).unwrap());
        assert_eq!(lg.max_degree(), 4);
    }

    #[test]
    fn patches_on_short_chain_and_square() {
        let g = build_chain(3, Boundary::Open).unwrap();
        let p = enumerate_patches(&g);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].kind, PatchKind::Collinear { j: 1 });
        assert_eq!(p[0].center, 1);

        let g = build_box_lattice(2, 1, Boundary::Periodic).unwrap();
        let patches = enumerate_patches(&g);
        for v in 0..g.num_vertices() {
            let kinds: BTreeSet<PatchKind> = patches.iter().filter(|p| p.center == v).map(|p| p.kind).collect();
            assert!(kinds.contains(&PatchKind::PlusPlus { j: 1, k: 2 }));
            assert!(kinds.contains(&PatchKind::MinusMinus { j: 1, k: 2 }));
            assert!(kinds.contains(&PatchKind::MinusPlus { j: 1, k: 2 }));
            assert!(kinds.contains(&PatchKind::MinusPlus { j: 2, k: 1 }));
        }
    }

    #[test]
    fn patch_count_matches_degree_formula() {
        let graphs = [
            build_box_lattice(2, 2, Boundary::Periodic).unwrap(),
            build_box_lattice(3, 2, Boundary::Open).unwrap(),
            build_rect_lattice(&[2, 3], Boundary::Open).unwrap(),
            build_honeycomb(2).unwrap(),
            build_honeycomb(3).unwrap(),
        ];
        for g in &graphs {
            assert_eq!(enumerate_patches(g).len(), degree_pair_count(g));
        }
    }

    #[test]
    fn honeycomb_patches_pair_distinct_types() {
        let g = build_honeycomb(2).unwrap();
        for p in enumerate_patches(&g) {
            let [a, b] = p.edges;
            assert_ne!(g.edges()[a].ty, g.edges()[b].ty);
        }
        let kinds = patch_kinds(&g);
        assert!(kinds.keys().all(|k| !matches!(k, PatchKind::Collinear { .. })));
    }

    #[test]
    fn patch_legs_match_edges() {
        let g = build_box_lattice(2, 2, Boundary::Periodic).unwrap();
        for p in enumerate_patches(&g) {
            for (leg, &ei) in p.kind.legs().iter().zip(&p.edges) {
                let e = g.edges()[ei];
                let role = if e.tail == p.center { Role::Out } else { Role::In };
                assert_eq!(*leg, (role, e.ty));
            }
        }
    }

    #[test]
    fn induced_subgraphs() {
        let g = build_rect_lattice(&[3, 3], Boundary::Open).unwrap();
        let all: Vec<usize> = (0..9).collect();
        let s = induced_subgraph(&g, &all).unwrap();
        assert_eq!(s.graph.edges(), g.edges());
        let corner = [g.vertex_of(&[0, 0]).unwrap(), g.vertex_of(&[0, 1]).unwrap(), g.vertex_of(&[1, 0]).unwrap(), g.vertex_of(&[1, 1]).unwrap()];
        let s = induced_subgraph(&g, &corner).unwrap();
        assert_eq!(s.graph.num_edges(), 4);
        assert_eq!(s.components.len(), 1);
        let split = [0, 8];
        let s = induced_subgraph(&g, &split).unwrap();
        assert_eq!(s.components.len(), 2);
        assert_eq!(s.graph.num_edges(), 0);
    }

    #[test]
    fn connected_subsets_of_path() {
        let g = build_chain(4, Boundary::Open).unwrap();
        let subs = connected_subsets(&g, 2, 4).unwrap();
        // intervals of length 2..4 in a 4-path: 3 + 2 + 1
        assert_eq!(subs.len(), 6);
        assert!(subs.iter().all(|s| s.windows(2).all(|w| w[1] == w[0] + 1)));
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(build_honeycomb(3).unwrap(), build_honeycomb(3).unwrap());
        assert_eq!(
            build_box_lattice(2, 2, Boundary::Open).unwrap(),
            build_box_lattice(2, 2, Boundary::Open).unwrap()
        );
    }

    #[test]
    fn rejects_bad_graphs() {
        let coords = alloc::vec![alloc::vec![0], alloc::vec![1]];
        let self_loop = alloc::vec![Edge { tail: 0, head: 0, ty: 1 }];
        assert!(Graph::new(coords.clone(), self_loop, Boundary::Open, Family::Custom, None, None).is_err());
        let dup = alloc::vec![Edge { tail: 0, head: 1, ty: 1 }, Edge { tail: 0, head: 1, ty: 1 }];
        assert!(Graph::new(coords.clone(), dup, Boundary::Open, Family::Custom, None, None).is_err());
        let e = alloc::vec![Edge { tail: 0, head: 1, ty: 2 }];
        assert!(Graph::new(coords, e, Boundary::Open, Family::Custom, Some(1), None).is_err());
        assert!(build_box_lattice(0, 1, Boundary::Open).is_err());
    }
}
