//! Projector-pair geometry, the three-site gap `γ₃`, the Knabe-type local
//! bound and the end-to-end gap certificate.
//!
//! Pair quantities are computed after compressing both projectors onto
//! `U = ran P + ran Q` (dimension at most `2rd`). Outside `U` both vanish, so
//! norms, meets and the spectrum of `P + Q` on `U⊥` (all zero) are exact.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::exp;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardcore::{ff_certificate, qsat_kernel_bound, FfCertificate, QsatBound};
use crate::lattice::{patch_kinds, Family, Graph, PatchKind, Role};
use crate::linalg::{dot, gram_schmidt, norm, symmetric_eigen, symmetric_eigenvalues, Matrix};
use crate::sampler::{good_vector_indices, ProjectorFrame, RngStream};
use crate::spectra::DEFAULT_KERNEL_TOL;

/// `‖PQ‖` by power iteration on `(PQ)ᵀ(PQ) = QPQ`, falling back to a dense
/// eigensolve when the iteration stalls.
pub fn product_norm(p: &Matrix, q: &Matrix) -> Result<f64> {
    check_pair(p, q)?;
    let n = p.rows();
    let mut x = RngStream::new(0x5eed, 0).gaussian_vec(n);
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    // σ = ‖PQx‖ for the dominant right singular vector x of PQ
    let mut sigma = 0.0;
    for _ in 0..10_000 {
        let y = p.matvec(&q.matvec(&x));
        let s = norm(&y);
        if s == 0.0 {
            return Ok(0.0);
        }
        let z = q.matvec(&p.matvec(&y));
        let nz = norm(&z);
        if nz == 0.0 {
            return Ok(s);
        }
        x = z.into_iter().map(|v| v / nz).collect();
        if (s - sigma).abs() <= 1e-13 * s {
            return Ok(s);
        }
        sigma = s;
    }
    Ok(p.matmul(q).operator_norm())
}

fn check_pair(p: &Matrix, q: &Matrix) -> Result<()> {
    if !p.is_square() || p.rows() != q.rows() || !q.is_square() {
        return Err(Error::InvalidParameter("projectors must be square and act on a common space".into()));
    }
    Ok(())
}

trait Symmetrized {
    fn symmetrized(&self) -> Matrix;
}

impl Symmetrized for Matrix {
    fn symmetrized(&self) -> Matrix {
        let mut m = self.clone();
        m.symmetrize();
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetRoute {
    AlternatingProjections,
    KernelOfSum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Meet {
    pub projector: Matrix,
    pub route: MeetRoute,
    /// Alternating products represented by the final iterate.
    pub products: u64,
    pub residual: f64,
}

/// `P ∧ Q` as the limit of `(QPQ)^n`, by repeated squaring of the
/// symmetrized iterate until successive iterates agree within `tol`. Falls
/// back to [`meet_kernel`] when `max_iter` products are not enough.
pub fn meet_projector(p: &Matrix, q: &Matrix, tol: f64, max_iter: u64) -> Result<Meet> {
    check_pair(p, q)?;
    let mut x = q.matmul(p).matmul(q).symmetrized();
    let mut products: u64 = 1;
    let mut residual = f64::INFINITY;
    while products <= max_iter / 2 {
        let next = x.matmul(&x).symmetrized();
        products *= 2;
        residual = next.sub(&x).max_abs();
        x = next;
        if residual < tol {
            return Ok(Meet { projector: x, route: MeetRoute::AlternatingProjections, products, residual });
        }
    }
    let projector = meet_kernel(p, q, DEFAULT_KERNEL_TOL)?;
    Ok(Meet { projector, route: MeetRoute::KernelOfSum, products, residual })
}

/// `P ∧ Q` as the projector onto `ker((I − P) + (I − Q))`, eigenvalues
/// below `tol` counted as kernel.
pub fn meet_kernel(p: &Matrix, q: &Matrix, tol: f64) -> Result<Matrix> {
    check_pair(p, q)?;
    let n = p.rows();
    let two = Matrix::identity(n).scale(2.0);
    let s = two.sub(p).sub(q).symmetrized();
    let eig = symmetric_eigen(&s)?;
    let vecs = eig.vectors.expect("eigenvectors requested");
    let mut m = Matrix::zeros(n, n);
    for (k, &val) in eig.values.iter().enumerate() {
        if val >= tol {
            break;
        }
        let v = vecs.column(k);
        for i in 0..n {
            let row = m.row_mut(i);
            for (x, &vj) in row.iter_mut().zip(&v) {
                *x += v[i] * vj;
            }
        }
    }
    Ok(m)
}

/// Geometry of one patch kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAnalysis {
    pub kind: PatchKind,
    /// Number of patches of this kind in the graph.
    pub multiplicity: usize,
    /// Dimension of `ran P + ran Q`.
    pub span_dim: usize,
    pub product_norm: f64,
    pub meet_rank: usize,
    /// `‖PQ − P∧Q‖`.
    pub pq_minus_meet: f64,
    /// `‖PQ‖ + lim ‖(PQ)^n‖`.
    pub pq_chain_bound: f64,
    /// Gap of `P + Q` above its kernel; `None` when frustrated or zero.
    pub gap: Option<f64>,
    pub ground_energy: f64,
    pub frustrated: bool,
}

/// Orthonormal columns spanning the range of a leg's projector embedded on
/// three sites `[outer₁, centre, outer₂]` (site 0 fastest).
fn leg_range(leg: (Role, u32), outer: usize, frames: &[ProjectorFrame], d: usize) -> Result<Vec<Vec<f64>>> {
    let (role, ty) = leg;
    let frame = frames.get(ty as usize - 1).ok_or(Error::MissingAssignment(ty))?;
    if frame.d() != d {
        return Err(Error::InvalidParameter(format!("frame for type {ty} has d={}, expected {d}", frame.d())));
    }
    let (tail, head) = match role {
        Role::Out => (1, outer),
        Role::In => (outer, 1),
    };
    let spectator = 2 - outer;
    let stride = |s: usize| d.pow(s as u32);
    let mut cols = Vec::with_capacity(frame.rank() * d);
    for v in frame.columns() {
        for c in 0..d {
            let mut x = vec![0.0; d * d * d];
            for a in 0..d {
                for b in 0..d {
                    x[a * stride(tail) + b * stride(head) + c * stride(spectator)] = v[a * d + b];
                }
            }
            cols.push(x);
        }
    }
    Ok(cols)
}

fn compress(cols: &[Vec<f64>], basis: &[Vec<f64>]) -> Matrix {
    // C = Uᵀ A, projector Uᵀ P U = C Cᵀ
    let m = basis.len();
    let mut c = Matrix::zeros(m, cols.len());
    for (i, u) in basis.iter().enumerate() {
        for (j, a) in cols.iter().enumerate() {
            c.row_mut(i)[j] = dot(u, a);
        }
    }
    c.matmul(&c.transpose()).symmetrized()
}

/// Pair analysis of one patch kind in the canonical local layout.
pub fn analyze_kind(kind: PatchKind, frames: &[ProjectorFrame], d: usize, kernel_tol: f64) -> Result<PairAnalysis> {
    let legs = kind.legs();
    let a = leg_range(legs[0], 0, frames, d)?;
    let b = leg_range(legs[1], 2, frames, d)?;
    let all: Vec<Vec<f64>> = a.iter().chain(&b).cloned().collect();
    let basis = gram_schmidt(&all, 1e-12);
    let m = basis.len();
    let full = d * d * d;
    if m == 0 {
        return Ok(PairAnalysis {
            kind,
            multiplicity: 0,
            span_dim: 0,
            product_norm: 0.0,
            meet_rank: 0,
            pq_minus_meet: 0.0,
            pq_chain_bound: 0.0,
            gap: None,
            ground_energy: 0.0,
            frustrated: false,
        });
    }
    let p = compress(&a, &basis);
    let q = compress(&b, &basis);
    let pn = product_norm(&p, &q)?;
    let meet = meet_kernel(&p, &q, kernel_tol)?;
    let meet_rank = libm::round(meet.trace()) as usize;
    let pq_minus_meet = p.matmul(&q).sub(&meet).operator_norm();
    let pq_chain_bound = pn + if meet_rank > 0 { 1.0 } else { 0.0 };
    let values = symmetric_eigenvalues(&p.add(&q))?;
    let (ground_energy, frustrated, gap) = if m < full {
        (0.0, false, values.iter().copied().find(|&x| x >= kernel_tol))
    } else if values[0] < kernel_tol {
        (values[0], false, values.iter().copied().find(|&x| x >= kernel_tol))
    } else {
        (values[0], true, None)
    };
    Ok(PairAnalysis {
        kind,
        multiplicity: 0,
        span_dim: m,
        product_norm: pn,
        meet_rank,
        pq_minus_meet,
        pq_chain_bound,
        gap,
        ground_energy,
        frustrated,
    })
}

/// All patch kinds of a graph, analysed once each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchReport {
    pub pairs: Vec<PairAnalysis>,
    /// Minimum patch gap; 0 when a patch is frustrated.
    pub gamma3: f64,
    pub frustrated: bool,
    pub pq_max: f64,
    pub pq_chain_max: f64,
    pub product_norm_max: f64,
}

impl PatchReport {
    /// `1 − max ‖PQ − P∧Q‖`.
    pub fn gamma3_lower(&self) -> f64 {
        1.0 - self.pq_max
    }
}

pub fn analyze_patches(frames: &[ProjectorFrame], d: usize, g: &Graph) -> Result<PatchReport> {
    analyze_kinds(&patch_kinds(g), frames, d)
}

fn analyze_kinds(kinds: &BTreeMap<PatchKind, usize>, frames: &[ProjectorFrame], d: usize) -> Result<PatchReport> {
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("graph has no pair of edges sharing exactly one vertex".into()));
    }
    let mut pairs = Vec::with_capacity(kinds.len());
    for (&kind, &count) in kinds {
        let mut a = analyze_kind(kind, frames, d, DEFAULT_KERNEL_TOL)?;
        a.multiplicity = count;
        pairs.push(a);
    }
    let frustrated = pairs.iter().any(|p| p.frustrated);
    let gamma3 = if frustrated {
        0.0
    } else {
        pairs.iter().filter_map(|p| p.gap).fold(f64::INFINITY, f64::min)
    };
    let gamma3 = if gamma3.is_finite() { gamma3 } else { 0.0 };
    let max = |f: fn(&PairAnalysis) -> f64| pairs.iter().map(f).fold(0.0, f64::max);
    Ok(PatchReport {
        gamma3,
        frustrated,
        pq_max: max(|p| p.pq_minus_meet),
        pq_chain_max: max(|p| p.pq_chain_bound),
        product_norm_max: max(|p| p.product_norm),
        pairs,
    })
}

/// Minimum gap over all three-site patches; 0 if a patch is frustrated.
pub fn gamma3(frames: &[ProjectorFrame], d: usize, g: &Graph) -> Result<f64> {
    Ok(analyze_patches(frames, d, g)?.gamma3)
}

/// `1 − max_𝒫 ‖PQ − P∧Q‖`.
pub fn gamma3_lower_via_pairs(frames: &[ProjectorFrame], d: usize, g: &Graph) -> Result<f64> {
    Ok(analyze_patches(frames, d, g)?.gamma3_lower())
}

/// `(2δ − 3)/(2δ − 2)`.
pub fn knabe_threshold(delta: usize) -> Result<f64> {
    if delta < 2 {
        return Err(Error::inequality("degree bound", delta, ">=", 2));
    }
    Ok((2 * delta - 3) as f64 / (2 * delta - 2) as f64)
}

/// `(2δ − 2)(γ₃ − (2δ − 3)/(2δ − 2))`.
pub fn knabe_local_bound(gamma3: f64, delta: usize) -> Result<f64> {
    let t = knabe_threshold(delta)?;
    Ok((2 * delta - 2) as f64 * (gamma3 - t))
}

/// One inequality with both sides and its margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub relation: String,
    pub rhs: f64,
    /// Positive exactly when the inequality holds strictly.
    pub margin: f64,
    /// `holds` means `margin ≥ −tolerance` for non-strict relations.
    #[serde(default)]
    pub tolerance: f64,
    pub holds: bool,
}

impl Condition {
    pub fn new(name: impl Into<String>, lhs: f64, relation: &str, rhs: f64) -> Self {
        let (holds, margin) = match relation {
            "<=" => (lhs <= rhs, rhs - lhs),
            "<" => (lhs < rhs, rhs - lhs),
            ">=" => (lhs >= rhs, lhs - rhs),
            ">" => (lhs > rhs, lhs - rhs),
            _ => panic!("unknown relation {relation}"),
        };
        Condition { name: name.into(), lhs, relation: relation.into(), rhs, margin, tolerance: 0.0, holds }
    }

    /// A non-strict inequality accepted up to `tolerance`.
    pub fn with_tolerance(name: impl Into<String>, lhs: f64, relation: &str, rhs: f64, tolerance: f64) -> Self {
        assert!(relation == "<=" || relation == ">=", "tolerance applies to non-strict relations");
        let mut c = Condition::new(name, lhs, relation, rhs);
        c.tolerance = tolerance;
        c.holds = c.margin >= -tolerance;
        c
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} {} {} (margin {:+}) [{}]",
            self.name,
            self.lhs,
            self.relation,
            self.rhs,
            self.margin,
            if self.holds { "holds" } else { "fails" }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedGapped,
    Inconclusive,
}

/// The chain identity `P̃_{12} P̃_{23} = 0` for the projector onto all good
/// vectors of one site pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainIdentity {
    pub rank: usize,
    /// `max |P̃_{12} P̃_{23}|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsatSummary {
    pub certified: bool,
    pub bound: Option<QsatBound>,
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub family: Family,
    pub d: usize,
    pub r: usize,
    pub degree_bound: usize,
    pub rank_condition: Condition,
    /// `r ≤ e^{−1} d²/(2δ − 1)`.
    pub ff_condition: Condition,
    /// Finite-graph route: `𝒵(G′; −p′) > 0` on `[0, r/d²]` proves
    /// `dim ker H_G > 0`.
    pub ff_qsat: QsatSummary,
    pub ff_established: bool,
    pub gamma3: f64,
    pub gamma3_frustrated: bool,
    pub threshold: f64,
    pub gamma3_condition: Condition,
    pub pq_max: f64,
    pub pq_chain_max: f64,
    pub product_norm_max: f64,
    /// `max ‖PQ − P∧Q‖ < 1/(2δ − 2)`.
    pub pq_condition: Condition,
    pub gamma3_lower: f64,
    pub knabe_lower_bound: f64,
    pub chain_identity: Option<ChainIdentity>,
    pub pairs: Vec<PairAnalysis>,
    pub verdict: Verdict,
}

impl GapCertificate {
    pub fn conditions(&self) -> [&Condition; 4] {
        [&self.rank_condition, &self.ff_condition, &self.gamma3_condition, &self.pq_condition]
    }

    /// One line per inequality, then the verdict.
    pub fn render_text(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        for c in self.conditions() {
            let _ = writeln!(s, "{c}");
        }
        let _ = writeln!(s, "qsat positivity on G: {}", if self.ff_qsat.certified { "certified" } else { "not certified" });
        let _ = writeln!(s, "knabe lower bound: {}", self.knabe_lower_bound);
        let _ = writeln!(
            s,
            "verdict: {}",
            match self.verdict {
                Verdict::CertifiedGapped => "certified-gapped",
                Verdict::Inconclusive => "inconclusive",
            }
        );
        s
    }
}

/// Rank condition of the gap theorem for the graph's family.
pub fn rank_condition(family: Family, num_types: u32, delta: usize, d: usize, r: usize) -> Condition {
    let good = (d * d / 4) as f64;
    let e1 = exp(-1.0);
    let d2 = (d * d) as f64;
    match family {
        Family::Box { dim } => Condition::new(
            "rank: r <= min(floor(d^2/4)/D, e^-1 d^2/(4D-1))",
            r as f64,
            "<=",
            (good / dim as f64).min(e1 * d2 / (4 * dim - 1) as f64),
        ),
        Family::Honeycomb => {
            Condition::new("rank: r <= min(floor(d^2/4)/3, e^-1 d^2/5)", r as f64, "<=", (good / 3.0).min(e1 * d2 / 5.0))
        }
        Family::Chain => {
            Condition::new("rank: r <= max(floor(d^2/4), d-1)", r as f64, "<=", good.max((d - 1) as f64))
        }
        Family::Custom => Condition::new(
            "rank: r <= min(floor(d^2/4)/T, e^-1 d^2/(2delta-1))",
            r as f64,
            "<=",
            (good / num_types.max(1) as f64).min(e1 * d2 / (2 * delta - 1) as f64),
        ),
    }
}

/// Graph-level data shared by every sample of one configuration.
#[derive(Clone, Debug)]
pub struct CertifyContext {
    pub family: Family,
    pub d: usize,
    pub r: usize,
    pub degree_bound: usize,
    pub kinds: BTreeMap<PatchKind, usize>,
    pub rank_condition: Condition,
    pub ff: FfCertificate,
    pub ff_condition: Condition,
    pub qsat: QsatSummary,
}

impl CertifyContext {
    pub fn new(g: &Graph, d: usize, r: usize) -> Result<Self> {
        let delta = g.degree_bound();
        if delta < 2 {
            return Err(Error::inequality("degree bound", delta, ">=", 2));
        }
        let ff = ff_certificate(delta, d, r)?;
        let ff_condition = Condition::new("ff: r <= e^-1 d^2/(2delta-1)", r as f64, "<=", ff.rhs);
        let qsat = match qsat_kernel_bound(g, d, r) {
            Ok(b) => QsatSummary { certified: b.bound > 0.0, bound: Some(b), diagnostic: None },
            Err(e) => QsatSummary { certified: false, bound: None, diagnostic: Some(format!("{e}")) },
        };
        Ok(CertifyContext {
            family: g.family(),
            d,
            r,
            degree_bound: delta,
            kinds: patch_kinds(g),
            rank_condition: rank_condition(g.family(), g.num_types(), delta, d, r),
            ff,
            ff_condition,
            qsat,
        })
    }

    /// Frustration-freeness is established by the degree condition, by exact
    /// positivity on this graph, or (for chains) by the rank condition.
    pub fn ff_established(&self) -> bool {
        self.ff.holds || self.qsat.certified || (self.family == Family::Chain && self.rank_condition.holds)
    }
}

/// Evaluates every condition for one assignment. Failures are verdicts.
pub fn certify(frames: &[ProjectorFrame], ctx: &CertifyContext) -> Result<GapCertificate> {
    let report = analyze_kinds(&ctx.kinds, frames, ctx.d)?;
    build_certificate(ctx, report, None)
}

fn build_certificate(ctx: &CertifyContext, report: PatchReport, chain_identity: Option<ChainIdentity>) -> Result<GapCertificate> {
    let delta = ctx.degree_bound;
    let threshold = knabe_threshold(delta)?;
    let gamma3_condition = Condition::new("gamma3 > (2delta-3)/(2delta-2)", report.gamma3, ">", threshold);
    let pq_condition = Condition::new("max |PQ - P^Q| < 1/(2delta-2)", report.pq_max, "<", 1.0 / (2 * delta - 2) as f64);
    let ff_established = ctx.ff_established();
    let verdict = if ff_established && !report.frustrated && gamma3_condition.holds {
        Verdict::CertifiedGapped
    } else {
        Verdict::Inconclusive
    };
    Ok(GapCertificate {
        family: ctx.family,
        d: ctx.d,
        r: ctx.r,
        degree_bound: delta,
        rank_condition: ctx.rank_condition.clone(),
        ff_condition: ctx.ff_condition.clone(),
        ff_qsat: ctx.qsat.clone(),
        ff_established,
        gamma3: report.gamma3,
        gamma3_frustrated: report.frustrated,
        threshold,
        gamma3_condition,
        pq_max: report.pq_max,
        pq_chain_max: report.pq_chain_max,
        product_norm_max: report.product_norm_max,
        pq_condition,
        gamma3_lower: report.gamma3_lower(),
        knabe_lower_bound: knabe_local_bound(report.gamma3, delta)?,
        chain_identity,
        pairs: report.pairs,
        verdict,
    })
}

/// Projector onto the first `r` good vectors (all of them when
/// `r = ⌊d²/4⌋`), the chain prototype.
pub fn chain_good_projector(d: usize, r: usize) -> Result<ProjectorFrame> {
    let idx = good_vector_indices(d);
    if r == 0 || r > idx.len() {
        return Err(Error::inequality("chain good rank", r, "<=", idx.len()));
    }
    let cols = idx[..r]
        .iter()
        .map(|&(i, j)| {
            let mut v = vec![0.0; d * d];
            v[(i - 1) * d + (j - 1)] = 1.0;
            v
        })
        .collect();
    ProjectorFrame::new(d, cols)
}

/// `max |P̃_{12} P̃_{23}|` on three sites for the full good projector.
pub fn chain_identity(d: usize) -> Result<ChainIdentity> {
    let rank = d * d / 4;
    let frames = [chain_good_projector(d, rank)?];
    // [0, 1, 2] with 0 → 1 and 1 → 2 is the collinear layout
    let a = leg_range((Role::In, 1), 0, &frames, d)?;
    let b = leg_range((Role::Out, 1), 2, &frames, d)?;
    let proj = |cols: &[Vec<f64>]| {
        let m = Matrix::from_columns(cols);
        m.matmul(&m.transpose())
    };
    let residual = proj(&a).matmul(&proj(&b)).max_abs();
    Ok(ChainIdentity { rank, residual })
}

/// One-dimensional certificate with threshold 1/2. Uses `frames` when given,
/// otherwise the chain good projector of rank `r`.
pub fn certify_1d_improved(d: usize, r: usize, frames: Option<&[ProjectorFrame]>) -> Result<GapCertificate> {
    let good = (d * d / 4).max(d - 1);
    if r == 0 || r > good {
        return Err(Error::inequality("chain rank r vs max(floor(d^2/4), d-1)", r, "<=", good));
    }
    let owned;
    let frames = match frames {
        Some(f) => f,
        None => {
            owned = [chain_good_projector(d, r.min(d * d / 4))?];
            &owned[..]
        }
    };
    let delta = 2;
    let ff = ff_certificate(delta, d, r)?;
    let rank_condition = rank_condition(Family::Chain, 1, delta, d, r);
    let ctx = CertifyContext {
        family: Family::Chain,
        d,
        r,
        degree_bound: delta,
        kinds: BTreeMap::from([(PatchKind::Collinear { j: 1 }, 1)]),
        ff_condition: Condition::new("ff: r <= e^-1 d^2/(2delta-1)", r as f64, "<=", ff.rhs),
        ff,
        rank_condition,
        qsat: QsatSummary { certified: false, bound: None, diagnostic: Some("not evaluated for the chain family".into()) },
    };
    let report = analyze_kinds(&ctx.kinds, frames, d)?;
    build_certificate(&ctx, report, Some(chain_identity(d)?))
}
