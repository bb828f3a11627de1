//! Projector prototypes on the two-site space `C^d ⊗ C^d`.
//!
//! Two-site vectors use the Kronecker layout: `e_a ⊗ e_b` sits at index
//! `a·d + b` (0-based), the first factor being the edge tail.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::{asin, cos, pow, sin, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_patches, Graph, PatchKind};
use crate::linalg::{dot, gram_schmidt, householder_qr, norm, Matrix};

const RETRY_LIMIT: usize = 1000;

/// Reproducible random source addressed by `(seed, stream)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.gaussian()).collect()
    }

    /// Uniform point on the unit sphere in `R^n`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let mut v = self.gaussian_vec(n);
            let nv = norm(&v);
            if nv > 1e-300 {
                v.iter_mut().for_each(|x| *x /= nv);
                return v;
            }
        }
    }
}

/// Haar-random orthogonal matrix: QR of a Gaussian matrix with the
/// diagonal of `R` made positive.
pub fn haar_orthogonal(n: usize, rng: &mut RngStream) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("haar_orthogonal needs n >= 1".into()));
    }
    for _ in 0..RETRY_LIMIT {
        let g = Matrix::from_rows(n, n, rng.gaussian_vec(n * n));
        let (mut q, r) = householder_qr(&g);
        let diag: Vec<f64> = (0..n).map(|i| r[(i, i)]).collect();
        if diag.iter().any(|x| x.abs() < 1e-12) {
            continue;
        }
        for i in 0..n {
            let row = q.row_mut(i);
            for (x, &dj) in row.iter_mut().zip(&diag) {
                if dj < 0.0 {
                    *x = -*x;
                }
            }
        }
        return Ok(q);
    }
    Err(Error::RetryLimit("Gaussian draws were numerically singular".into()))
}

/// Orthonormal frame `v_1..v_r` in `R^{d²}` describing `P = Σ v_i v_iᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorFrame {
    d: usize,
    columns: Vec<Vec<f64>>,
}

impl ProjectorFrame {
    /// Checks lengths and orthonormality (Gram deviation below `1e-10`).
    /// An empty column list is the zero projector.
    pub fn new(d: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("local dimension d={d} must be at least 2")));
        }
        let n = d * d;
        if columns.len() > n {
            return Err(Error::inequality("frame rank", columns.len(), "<=", n));
        }
        for c in &columns {
            if c.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: c.len() });
            }
        }
        let frame = ProjectorFrame { d, columns };
        let dev = frame.gram_deviation();
        if dev.is_nan() || dev > 1e-10 {
            return Err(Error::InvalidParameter(format!("frame columns are not orthonormal (deviation {dev:e})")));
        }
        Ok(frame)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// `max |VᵀV − I|`.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.columns.iter().enumerate() {
            for (j, b) in self.columns.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }

    /// Dense `d² × d²` projector.
    pub fn projector(&self) -> Matrix {
        let n = self.d * self.d;
        let mut p = Matrix::zeros(n, n);
        for v in &self.columns {
            for a in 0..n {
                if v[a] == 0.0 {
                    continue;
                }
                let row = p.row_mut(a);
                for (x, &vb) in row.iter_mut().zip(v) {
                    *x += v[a] * vb;
                }
            }
        }
        p
    }

    /// `d² × r` matrix with the frame vectors as columns.
    pub fn basis(&self) -> Matrix {
        Matrix::from_columns(&self.columns)
    }
}

/// First `r` columns of a Haar orthogonal matrix on `R^{d²}`.
pub fn sample_projector(d: usize, r: usize, rng: &mut RngStream) -> Result<ProjectorFrame> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("local dimension d={d} must be at least 2")));
    }
    let n = d * d;
    if r == 0 || r > n {
        return Err(Error::inequality("projector rank", r, "in", format!("1..={n}")));
    }
    let q = haar_orthogonal(n, rng)?;
    let columns = (0..r).map(|j| q.column(j)).collect();
    Ok(ProjectorFrame { d, columns })
}

/// Index pairs `(i, j)` (1-based) of the good vectors `e_i ⊗ e_j`, `i` odd,
/// `j` even, in lexicographic order.
pub fn good_vector_indices(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in (1..=d).step_by(2) {
        for j in (2..=d).step_by(2) {
            out.push((i, j));
        }
    }
    out
}

fn basis_vector(d: usize, (i, j): (usize, usize)) -> Vec<f64> {
    let mut v = vec![0.0; d * d];
    v[(i - 1) * d + (j - 1)] = 1.0;
    v
}

/// The good vectors as dense two-site vectors; there are `⌊d²/4⌋`.
pub fn good_vectors(d: usize) -> Result<Vec<Vec<f64>>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("good vectors need d >= 2, got {d}")));
    }
    Ok(good_vector_indices(d).into_iter().map(|ij| basis_vector(d, ij)).collect())
}

/// `count` good projectors of rank `r`, the `j`-th spanning good vectors
/// `(j−1)r+1 ..= jr` of the lexicographic enumeration.
pub fn good_projectors(d: usize, r: usize, count: usize) -> Result<Vec<ProjectorFrame>> {
    let idx = good_vector_indices(d);
    check_good_budget(d, r, count, idx.len())?;
    Ok((0..count)
        .map(|j| ProjectorFrame { d, columns: idx[j * r..(j + 1) * r].iter().map(|&ij| basis_vector(d, ij)).collect() })
        .collect())
}

fn check_good_budget(d: usize, r: usize, count: usize, available: usize) -> Result<()> {
    if d < 2 || r == 0 || count == 0 {
        return Err(Error::InvalidParameter(format!("good projectors need d >= 2, r >= 1, count >= 1 (d={d}, r={r}, count={count})")));
    }
    if count * r > available {
        return Err(Error::inequality("count·r vs ⌊d²/4⌋", count * r, "<=", available));
    }
    Ok(())
}

/// Good projectors chosen per graph so that products of prototypes meeting
/// at a vertex vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodAssignment {
    /// Frame for type `j` at position `j − 1`.
    pub frames: Vec<ProjectorFrame>,
    /// Good-vector index pairs used by each frame.
    pub vectors: Vec<Vec<(usize, usize)>>,
    /// Whether every patch product `P̃^j P̃^k` vanishes on `g`.
    pub vanishing_guaranteed: bool,
}

/// Picks disjoint sets of good vectors so that, for every pair of types
/// sharing a tail somewhere in `g`, the first indices differ, and for every
/// pair sharing a head the second indices differ. Incoming/outgoing pairs
/// vanish by parity on their own. Falls back to the lexicographic blocks
/// when no such choice exists.
pub fn good_projectors_for(g: &Graph, d: usize, r: usize) -> Result<GoodAssignment> {
    let t = g.num_types() as usize;
    let idx = good_vector_indices(d);
    check_good_budget(d, r, t, idx.len())?;
    let mut tail_conflict = BTreeSet::new();
    let mut head_conflict = BTreeSet::new();
    let mut impossible = false;
    for p in enumerate_patches(g) {
        match p.kind {
            PatchKind::PlusPlus { j, k } => {
                impossible |= j == k;
                tail_conflict.insert((j as usize - 1, k as usize - 1));
            }
            PatchKind::MinusMinus { j, k } => {
                impossible |= j == k;
                head_conflict.insert((j as usize - 1, k as usize - 1));
            }
            _ => {}
        }
    }
    let fallback = || -> Result<GoodAssignment> {
        let frames = good_projectors(d, r, t)?;
        let vectors = (0..t).map(|j| idx[j * r..(j + 1) * r].to_vec()).collect();
        Ok(GoodAssignment { frames, vectors, vanishing_guaranteed: false })
    };
    if impossible {
        return fallback();
    }
    let mut search = Search {
        idx: &idx,
        r,
        t,
        tail_conflict: &tail_conflict,
        head_conflict: &head_conflict,
        chosen: Vec::new(),
        used: vec![false; idx.len()],
        nodes: 0,
    };
    if search.assign(0) {
        let vectors: Vec<Vec<(usize, usize)>> =
            search.chosen.iter().map(|set| set.iter().map(|&v| idx[v]).collect()).collect();
        let frames = vectors
            .iter()
            .map(|set| ProjectorFrame { d, columns: set.iter().map(|&ij| basis_vector(d, ij)).collect() })
            .collect();
        Ok(GoodAssignment { frames, vectors, vanishing_guaranteed: true })
    } else {
        fallback()
    }
}

struct Search<'a> {
    idx: &'a [(usize, usize)],
    r: usize,
    t: usize,
    tail_conflict: &'a BTreeSet<(usize, usize)>,
    head_conflict: &'a BTreeSet<(usize, usize)>,
    chosen: Vec<Vec<usize>>,
    used: Vec<bool>,
    nodes: usize,
}

impl Search<'_> {
    const NODE_BUDGET: usize = 200_000;

    fn compatible(&self, ty: usize, v: usize) -> bool {
        let (a, b) = self.idx[v];
        self.chosen.iter().enumerate().all(|(other, set)| {
            let key = (other.min(ty), other.max(ty));
            let tail = self.tail_conflict.contains(&key);
            let head = self.head_conflict.contains(&key);
            set.iter().all(|&w| {
                let (a2, b2) = self.idx[w];
                !(tail && a == a2) && !(head && b == b2)
            })
        })
    }

    fn assign(&mut self, ty: usize) -> bool {
        if ty == self.t {
            return true;
        }
        let candidates: Vec<usize> =
            (0..self.idx.len()).filter(|&v| !self.used[v] && self.compatible(ty, v)).collect();
        let mut current = Vec::with_capacity(self.r);
        self.choose(ty, &candidates, 0, &mut current)
    }

    fn choose(&mut self, ty: usize, cand: &[usize], start: usize, current: &mut Vec<usize>) -> bool {
        self.nodes += 1;
        if self.nodes > Self::NODE_BUDGET {
            return false;
        }
        if current.len() == self.r {
            for &v in current.iter() {
                self.used[v] = true;
            }
            self.chosen.push(current.clone());
            if self.assign(ty + 1) {
                return true;
            }
            self.chosen.pop();
            for &v in current.iter() {
                self.used[v] = false;
            }
            return false;
        }
        for pos in start..cand.len() {
            if cand.len() - pos < self.r - current.len() {
                break;
            }
            current.push(cand[pos]);
            if self.choose(ty, cand, pos + 1, current) {
                return true;
            }
            current.pop();
        }
        false
    }
}

/// Moves every column uniformly within a spherical cap of chordal radius
/// `eps/2`, re-orthonormalizes, and retries until each column moved by less
/// than `eps`.
pub fn cap_perturb(frame: &ProjectorFrame, eps: f64, rng: &mut RngStream) -> Result<ProjectorFrame> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("cap radius eps={eps} must lie in (0, 1/2)")));
    }
    cap_perturb_with_radius(frame, eps / 2.0, eps, rng)
}

/// [`cap_perturb`] with an explicit cap radius; `radius = 0` returns the
/// input frame.
pub fn cap_perturb_with_radius(
    frame: &ProjectorFrame,
    radius: f64,
    eps: f64,
    rng: &mut RngStream,
) -> Result<ProjectorFrame> {
    if !(0.0..2.0).contains(&radius) {
        return Err(Error::InvalidParameter(format!("cap radius {radius} must lie in [0, 2)")));
    }
    let n = frame.d * frame.d;
    // chordal radius c ↔ polar angle 2·asin(c/2)
    let theta_max = 2.0 * asin(radius / 2.0);
    for _ in 0..RETRY_LIMIT {
        let moved: Vec<Vec<f64>> =
            frame.columns.iter().map(|v| cap_sample(v, theta_max, n, rng)).collect();
        let ortho = gram_schmidt(&moved, 1e-8);
        if ortho.len() != moved.len() {
            continue;
        }
        let worst = frame
            .columns
            .iter()
            .zip(&ortho)
            .map(|(v, phi)| norm(&v.iter().zip(phi).map(|(a, b)| a - b).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        if worst < eps || radius == 0.0 {
            return Ok(ProjectorFrame { d: frame.d, columns: ortho });
        }
    }
    Err(Error::RetryLimit(format!("cap perturbation with eps={eps} kept exceeding the deviation bound")))
}

/// Uniform sample on `{φ : ‖φ‖ = 1, angle(φ, v) ≤ θmax}`.
fn cap_sample(v: &[f64], theta_max: f64, n: usize, rng: &mut RngStream) -> Vec<f64> {
    if theta_max == 0.0 {
        return v.to_vec();
    }
    // the polar angle has density ∝ sin^{n−2} θ on [0, θmax]
    let peak = pow(sin(theta_max.min(core::f64::consts::FRAC_PI_2)), (n - 2) as f64);
    let theta = loop {
        let th = rng.uniform() * theta_max;
        if n == 2 || rng.uniform() * peak <= pow(sin(th), (n - 2) as f64) {
            break th;
        }
    };
    // tangent direction: Gaussian projected off v
    let u = loop {
        let mut g = rng.gaussian_vec(n);
        let c = dot(&g, v);
        g.iter_mut().zip(v).for_each(|(x, &vi)| *x -= c * vi);
        let ng = norm(&g);
        if ng > 1e-12 {
            g.iter_mut().for_each(|x| *x /= ng);
            break g;
        }
    };
    let (c, s) = (cos(theta), sin(theta));
    let mut phi: Vec<f64> = v.iter().zip(&u).map(|(a, b)| c * a + s * b).collect();
    let nphi = sqrt(dot(&phi, &phi));
    phi.iter_mut().for_each(|x| *x /= nphi);
    phi
}

/// How prototypes are drawn for a trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleMode {
    /// Independent Haar frames per type.
    Haar,
    /// Good frames moved within caps of radius `eps`.
    Cap { eps: f64 },
    /// Exact good frames.
    Good,
}

/// One frame per edge type of `g`.
pub fn sample_assignment(
    g: &Graph,
    d: usize,
    r: usize,
    mode: SampleMode,
    rng: &mut RngStream,
) -> Result<Vec<ProjectorFrame>> {
    let t = g.num_types() as usize;
    match mode {
        SampleMode::Haar => (0..t).map(|_| sample_projector(d, r, rng)).collect(),
        SampleMode::Good => Ok(good_projectors_for(g, d, r)?.frames),
        SampleMode::Cap { eps } => {
            good_projectors_for(g, d, r)?.frames.iter().map(|f| cap_perturb(f, eps, rng)).collect()
        }
    }
}
