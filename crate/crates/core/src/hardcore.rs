//! Hard-core lattice gas on a graph: exact independence polynomials,
//! certified positivity at negative fugacity, the Kotecký–Preiss condition
//! and the kernel bound it implies for random projector Hamiltonians.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, fabs};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{line_graph, Graph};

/// Largest graph handled by exact enumeration.
pub const ENUMERATION_BUDGET: usize = 40;

const E: f64 = core::f64::consts::E;

/// `𝒵(G; z) = Σ_k c_k z^k`, `c_k` the number of independent `k`-sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependencePolynomial {
    pub coefficients: Vec<u64>,
    /// FNV-1a hash of the vertex count and the sorted simple edge list.
    pub fingerprint: u64,
}

impl IndependencePolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Total number of independent sets, `𝒵(1)`.
    pub fn count(&self) -> u128 {
        self.coefficients.iter().map(|&c| c as u128).sum()
    }

    /// Integer coefficients of `p ↦ 𝒵(−p)`.
    fn negated(&self) -> Vec<BigInt> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { BigInt::from(c) } else { -BigInt::from(c) })
            .collect()
    }
}

fn simple_adjacency(g: &Graph) -> Vec<u64> {
    g.neighbors().iter().map(|s| s.iter().fold(0u64, |m, &w| m | (1u64 << w))).collect()
}

pub fn graph_fingerprint(g: &Graph) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(g.num_vertices() as u64);
    for (v, nb) in g.neighbors().iter().enumerate() {
        for &w in nb.iter().filter(|&&w| w > v) {
            feed(v as u64);
            feed(w as u64);
        }
    }
    h
}

/// Exact independence polynomial by branching on a vertex of maximum
/// residual degree, splitting into components and memoizing on the residual
/// vertex set.
pub fn independence_polynomial(g: &Graph) -> Result<IndependencePolynomial> {
    let n = g.num_vertices();
    if n > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget { vertices: n, budget: ENUMERATION_BUDGET });
    }
    let adj = simple_adjacency(g);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut memo = BTreeMap::new();
    let coefficients = z_of(all, &adj, &mut memo);
    Ok(IndependencePolynomial { coefficients, fingerprint: graph_fingerprint(g) })
}

fn poly_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn component_of(start: u64, set: u64, adj: &[u64]) -> u64 {
    let mut comp = start;
    let mut frontier = start;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[v] & set & !comp;
        comp |= fresh;
        frontier |= fresh;
    }
    comp
}

fn z_of(set: u64, adj: &[u64], memo: &mut BTreeMap<u64, Vec<u64>>) -> Vec<u64> {
    if set == 0 {
        return vec![1];
    }
    if let Some(p) = memo.get(&set) {
        return p.clone();
    }
    let first = set & set.wrapping_neg();
    let comp = component_of(first, set, adj);
    let result = if comp != set {
        poly_mul(&z_of(comp, adj, memo), &z_of(set & !comp, adj, memo))
    } else {
        let mut best = first.trailing_zeros() as usize;
        let mut best_deg = 0;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let deg = (adj[v] & set).count_ones();
            if deg > best_deg {
                best = v;
                best_deg = deg;
            }
        }
        if best_deg == 0 {
            // isolated vertex
            vec![1, 1]
        } else {
            let without = z_of(set & !(1u64 << best), adj, memo);
            let with = z_of(set & !(1u64 << best) & !adj[best], adj, memo);
            let mut out = without;
            if out.len() < with.len() + 1 {
                out.resize(with.len() + 1, 0);
            }
            for (k, &c) in with.iter().enumerate() {
                out[k + 1] += c;
            }
            out
        }
    };
    memo.insert(set, result.clone());
    result
}

/// Horner evaluation in floating point.
pub fn evaluate_z(p: &IndependencePolynomial, z: f64) -> f64 {
    p.coefficients.iter().rev().fold(0.0, |acc, &c| acc * z + c as f64)
}

/// Exact evaluation at a rational fugacity.
pub fn evaluate_z_exact(p: &IndependencePolynomial, z: &BigRational) -> BigRational {
    p.coefficients.iter().rev().fold(BigRational::zero(), |acc, &c| acc * z + BigRational::from_integer(c.into()))
}

/// Renders a rational as `"n/d"` (or `"n"` when integral).
pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `num/den` as an exact rational.
pub fn rational_ratio(num: u64, den: u64) -> Result<BigRational> {
    if den == 0 {
        return Err(Error::InvalidParameter("zero denominator".into()));
    }
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub certified: bool,
    /// Upper end of the interval `[0, pmax]`, as `"n/d"`.
    pub pmax: String,
    /// Distinct roots of `𝒵(−p′)` in `(0, pmax]` by Sturm count.
    pub roots_in_interval: usize,
    /// A subinterval holding exactly one root when certification fails.
    pub isolating_interval: Option<(String, String)>,
}

/// Certifies `𝒵(−p′) > 0` on `[0, pmax]` by exact Sturm root counting.
pub fn certify_positivity(p: &IndependencePolynomial, pmax: f64) -> Result<PositivityCertificate> {
    if !(pmax > 0.0) {
        return Err(Error::InvalidParameter(format!("pmax={pmax} must be positive")));
    }
    Ok(certify_positivity_exact(p, &rational_from_f64(pmax)?))
}

pub fn certify_positivity_exact(p: &IndependencePolynomial, pmax: &BigRational) -> PositivityCertificate {
    let f = trim(p.negated());
    let chain = sturm_chain(&f);
    let roots = sturm_count(&chain, &BigRational::zero(), pmax);
    let at_end = eval_int(&f, pmax);
    let certified = roots == 0 && at_end.is_positive();
    let isolating_interval = if certified {
        None
    } else if at_end.is_zero() {
        Some((rational_string(pmax), rational_string(pmax)))
    } else {
        // shrink to the lowest root
        let (mut lo, mut hi) = (BigRational::zero(), pmax.clone());
        let two = BigRational::from_integer(2.into());
        for _ in 0..40 {
            let mid = (&lo + &hi) / &two;
            if eval_int(&f, &mid).is_zero() {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if sturm_count(&chain, &BigRational::zero(), &mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some((rational_string(&lo), rational_string(&hi)))
    };
    PositivityCertificate { certified, pmax: rational_string(pmax), roots_in_interval: roots, isolating_interval }
}

fn trim(mut f: Vec<BigInt>) -> Vec<BigInt> {
    while f.len() > 1 && f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    f
}

fn eval_int(f: &[BigInt], x: &BigRational) -> BigRational {
    f.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
}

/// Divides out the content, keeping the sign.
fn primitive(f: Vec<BigInt>) -> Vec<BigInt> {
    let g = f.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() || g.is_one() {
        return f;
    }
    f.into_iter().map(|c| c / &g).collect()
}

/// `a mod b` scaled by a positive integer so it stays integral.
fn pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r: Vec<BigInt> = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    let lead_abs = lead.abs();
    let lead_sign = if lead.sign() == Sign::Minus { -BigInt::one() } else { BigInt::one() };
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let top = r[dr].clone();
        // r ← |lead|·r − sign(lead)·top·x^{dr−db}·b
        for c in r.iter_mut() {
            *c *= &lead_abs;
        }
        for (i, bc) in b.iter().enumerate() {
            r[dr - db + i] -= &lead_sign * &top * bc;
        }
        r.pop();
        r = trim(r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    trim(r)
}

fn sturm_chain(f: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut chain = vec![primitive(f.to_vec())];
    let deriv: Vec<BigInt> = f.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect();
    if deriv.is_empty() {
        return chain;
    }
    chain.push(primitive(trim(deriv)));
    loop {
        let n = chain.len();
        let (a, b) = (&chain[n - 2], &chain[n - 1]);
        if b.len() == 1 {
            break;
        }
        let r = pseudo_remainder(a, b);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        chain.push(primitive(r.into_iter().map(|c| -c).collect()));
    }
    chain
}

fn sign_changes(chain: &[Vec<BigInt>], x: &BigRational) -> usize {
    let signs: Vec<i8> = chain
        .iter()
        .map(|p| {
            let v = eval_int(p, x);
            if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Distinct real roots in `(a, b]`.
fn sturm_count(chain: &[Vec<BigInt>], a: &BigRational, b: &BigRational) -> usize {
    sign_changes(chain, a).saturating_sub(sign_changes(chain, b))
}

/// Kotecký–Preiss condition for a hard-core gas whose closed neighbourhoods
/// have at most `delta` elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpCertificate {
    pub z: f64,
    pub delta: usize,
    /// Root of `a·e^{−a} = Δ|z|` on `[0, 1]`, when the condition holds.
    pub a: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
}

pub fn kp_certificate(delta: usize, z: f64) -> Result<KpCertificate> {
    if delta == 0 {
        return Err(Error::InvalidParameter("KP needs Delta >= 1".into()));
    }
    let threshold = exp(-1.0) / delta as f64;
    let pass = fabs(z) <= threshold;
    let a = pass.then(|| {
        let target = delta as f64 * fabs(z);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        // a·e^{−a} is increasing on [0, 1]
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if mid * exp(-mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    });
    Ok(KpCertificate { z, delta, a, threshold, pass })
}

/// `exp(−nK·e·Δ·p)`, the cluster-expansion lower bound on `𝒵(−p)`.
pub fn cluster_lower_bound(n_k: usize, delta: usize, p: f64) -> Result<f64> {
    check_kp_regime(delta, p)?;
    Ok(exp(-(n_k as f64) * E * delta as f64 * p))
}

/// Bound `|f| ≤ eΔp` on the specific free energy `−log 𝒵 / nK`.
pub fn free_energy_bound(delta: usize, p: f64) -> Result<f64> {
    check_kp_regime(delta, p)?;
    Ok(E * delta as f64 * p)
}

fn check_kp_regime(delta: usize, p: f64) -> Result<()> {
    if delta == 0 {
        return Err(Error::InvalidParameter("Delta must be at least 1".into()));
    }
    let limit = exp(-1.0) / delta as f64;
    if !(p >= 0.0 && p <= limit) {
        return Err(Error::inequality("Kotecký–Preiss regime", p, "<=", limit));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QsatRoute {
    /// Exact polynomial with Sturm-certified positivity.
    Exact,
    /// Cluster-expansion estimate under the KP condition.
    KoteckyPreiss,
}

/// `dim ker H_G ≥ 𝒵(G′; −p)·d^{|G|}` with `p = r/d²` and `G′` the line graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsatBound {
    pub route: QsatRoute,
    pub p: String,
    /// `𝒵(G′; −p)` as `"n/d"` on the exact route.
    pub z_value: Option<String>,
    /// The bound as `"n/d"` on the exact route.
    pub bound_exact: Option<String>,
    pub bound: f64,
    /// `⌈bound⌉` in decimal.
    pub kernel_lower_bound: String,
    pub positivity: Option<PositivityCertificate>,
    pub kp: Option<KpCertificate>,
    pub line_graph_vertices: usize,
}

impl QsatBound {
    pub fn kernel_lower_bound_u128(&self) -> Option<u128> {
        self.kernel_lower_bound.parse().ok()
    }
}

pub fn qsat_kernel_bound(g: &Graph, d: usize, r: usize) -> Result<QsatBound> {
    if d < 2 || r > d * d {
        return Err(Error::InvalidParameter(format!("need d >= 2 and r <= d², got d={d}, r={r}")));
    }
    let lg = line_graph(g);
    let p = BigRational::new(BigInt::from(r), BigInt::from(d * d));
    let states = BigInt::from(d).pow(g.num_vertices() as u32);
    let n_k = lg.num_vertices();
    if n_k <= ENUMERATION_BUDGET {
        let poly = independence_polynomial(&lg)?;
        let positivity = if r == 0 {
            PositivityCertificate { certified: true, pmax: "0".into(), roots_in_interval: 0, isolating_interval: None }
        } else {
            certify_positivity_exact(&poly, &p)
        };
        if !positivity.certified {
            return Err(Error::PositivityNotCertified(format!(
                "{} root(s) of Z(G′; −p′) in (0, {}], isolated in {:?}",
                positivity.roots_in_interval, positivity.pmax, positivity.isolating_interval
            )));
        }
        let z = evaluate_z_exact(&poly, &-p.clone());
        let bound = &z * BigRational::from_integer(states);
        Ok(QsatBound {
            route: QsatRoute::Exact,
            p: rational_string(&p),
            z_value: Some(rational_string(&z)),
            bound_exact: Some(rational_string(&bound)),
            bound: rational_to_f64(&bound),
            kernel_lower_bound: bound.ceil().to_integer().to_string(),
            positivity: Some(positivity),
            kp: None,
            line_graph_vertices: n_k,
        })
    } else {
        let delta = lg.max_degree() + 1;
        let pf = rational_to_f64(&p);
        let kp = kp_certificate(delta, -pf)?;
        if !kp.pass {
            return Err(Error::PositivityNotCertified(format!(
                "line graph has {n_k} vertices (over the enumeration budget) and p={pf} exceeds the KP threshold {}",
                kp.threshold
            )));
        }
        let log_bound = -(n_k as f64) * E * delta as f64 * pf + libm::log(states.to_f64().unwrap_or(f64::INFINITY));
        let bound = exp(log_bound);
        let ceiling = if bound.is_finite() { libm::ceil(bound) } else { bound };
        Ok(QsatBound {
            route: QsatRoute::KoteckyPreiss,
            p: rational_string(&p),
            z_value: None,
            bound_exact: None,
            bound,
            kernel_lower_bound: format!("{ceiling:.0}"),
            positivity: None,
            kp: Some(kp),
            line_graph_vertices: n_k,
        })
    }
}

/// The frustration-freeness condition `r ≤ e^{−1} d² / (2δ − 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfCertificate {
    pub holds: bool,
    pub delta: usize,
    pub r: usize,
    pub rhs: f64,
    /// `p = r/d²`
    pub p: f64,
    /// `e^{−1}/(2δ − 1)`, which bounds `e^{−1}/Δ` of the line graph since its
    /// degree is at most `2(δ − 1)`.
    pub kp_threshold: f64,
}

pub fn ff_certificate(delta: usize, d: usize, r: usize) -> Result<FfCertificate> {
    if delta == 0 || d == 0 {
        return Err(Error::InvalidParameter("need delta >= 1 and d >= 1".into()));
    }
    let denom = (2 * delta - 1) as f64;
    let rhs = exp(-1.0) * (d * d) as f64 / denom;
    Ok(FfCertificate {
        holds: r as f64 <= rhs,
        delta,
        r,
        rhs,
        p: r as f64 / (d * d) as f64,
        kp_threshold: exp(-1.0) / denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, build_rect_lattice, Boundary, Edge, Family};

    fn graph_from(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::new(
            (0..n as i64).map(|i| vec![i]).collect(),
            edges.iter().map(|&(a, b)| Edge { tail: a, head: b, ty: 1 }).collect(),
            Boundary::Open,
            Family::Custom,
            None,
            None,
        )
        .unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn small_polynomials() {
        let empty = build_rect_lattice(&[1], Boundary::Open).unwrap();
        let single = independence_polynomial(&empty).unwrap();
        assert_eq!(single.coefficients, [1, 1]);
        let none = graph_from(0, &[]);
        assert_eq!(independence_polynomial(&none).unwrap().coefficients, [1]);
        let p4 = line_graph(&build_chain(5, Boundary::Open).unwrap());
        assert_eq!(independence_polynomial(&p4).unwrap().coefficients, [1, 4, 3]);
        let c5 = graph_from(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert_eq!(independence_polynomial(&c5).unwrap().coefficients, [1, 5, 5]);
    }

    #[test]
    fn evaluation() {
        let p = IndependencePolynomial { coefficients: vec![1, 2], fingerprint: 0 };
        assert!((evaluate_z(&p, -0.25) - 0.5).abs() < 1e-15);
        let p = IndependencePolynomial { coefficients: vec![1, 4, 3], fingerprint: 0 };
        assert_eq!(evaluate_z_exact(&p, &q(-1, 9)), q(48, 81));
        assert_eq!(evaluate_z(&p, 0.0), 1.0);
    }

    #[test]
    fn positivity_examples() {
        let p = IndependencePolynomial { coefficients: vec![1, 2], fingerprint: 0 };
        assert!(certify_positivity(&p, 0.25).unwrap().certified);
        let c = certify_positivity(&p, 0.6).unwrap();
        assert!(!c.certified);
        assert_eq!(c.roots_in_interval, 1);
        let (lo, hi) = c.isolating_interval.unwrap();
        let parse = |s: &str| -> f64 {
            let mut it = s.split('/');
            let n: f64 = it.next().unwrap().parse().unwrap();
            it.next().map_or(n, |d| n / d.parse::<f64>().unwrap())
        };
        assert!(parse(&lo) <= 0.5 && 0.5 <= parse(&hi) && parse(&hi) - parse(&lo) < 1e-6);
        // root exactly at the end of the interval
        assert!(!certify_positivity(&p, 0.5).unwrap().certified);
        let one = IndependencePolynomial { coefficients: vec![1], fingerprint: 0 };
        assert!(certify_positivity(&one, 10.0).unwrap().certified);
    }

    #[test]
    fn positivity_with_double_root_free_quadratic() {
        // 1 − 4p + 3p² = (1 − p)(1 − 3p): roots 1/3 and 1
        let p = IndependencePolynomial { coefficients: vec![1, 4, 3], fingerprint: 0 };
        assert!(certify_positivity_exact(&p, &q(1, 4)).certified);
        let c = certify_positivity_exact(&p, &q(1, 2));
        assert_eq!(c.roots_in_interval, 1);
        assert_eq!(certify_positivity_exact(&p, &q(2, 1)).roots_in_interval, 2);
    }

    #[test]
    fn kp_examples() {
        let c = kp_certificate(2, -exp(-1.0) / 2.0).unwrap();
        assert!(c.pass);
        assert!((c.a.unwrap() - 1.0).abs() < 1e-7);
        let c = kp_certificate(2, -0.1).unwrap();
        let a = c.a.unwrap();
        assert!((a - 0.2592).abs() < 1e-4);
        assert!((a * exp(-a) - 0.2).abs() < 1e-13);
        assert!(2.0 * exp(a) * 0.1 <= a + 1e-12);
        assert!(!kp_certificate(7, -0.1).unwrap().pass);
        assert!(kp_certificate(0, 0.0).is_err());
    }

    #[test]
    fn cluster_bounds() {
        assert_eq!(cluster_lower_bound(5, 3, 0.0).unwrap(), 1.0);
        let b = cluster_lower_bound(2, 2, 0.1).unwrap();
        assert!((b - exp(-0.4 * E)).abs() < 1e-15 && (b - 0.337).abs() < 1e-3);
        let k2 = IndependencePolynomial { coefficients: vec![1, 2], fingerprint: 0 };
        assert!(evaluate_z(&k2, -0.1) >= b);
        let b = cluster_lower_bound(4, 3, exp(-1.0) / 3.0).unwrap();
        assert!((b - exp(-4.0)).abs() < 1e-15);
        assert!(cluster_lower_bound(4, 3, 0.2).is_err());
        assert!((free_energy_bound(2, 0.1).unwrap() - 0.2 * E).abs() < 1e-15);
    }

    #[test]
    fn qsat_examples() {
        let g = build_chain(5, Boundary::Open).unwrap();
        let b = qsat_kernel_bound(&g, 3, 1).unwrap();
        assert_eq!(b.bound_exact.as_deref(), Some("144"));
        assert_eq!(b.kernel_lower_bound_u128(), Some(144));
        let g = build_chain(3, Boundary::Open).unwrap();
        let b = qsat_kernel_bound(&g, 2, 1).unwrap();
        assert_eq!(b.z_value.as_deref(), Some("1/2"));
        assert_eq!(b.kernel_lower_bound_u128(), Some(4));
        let b = qsat_kernel_bound(&g, 2, 0).unwrap();
        assert_eq!(b.kernel_lower_bound_u128(), Some(8));
        // p = 1 is far beyond positivity
        assert!(matches!(qsat_kernel_bound(&g, 2, 4), Err(Error::PositivityNotCertified(_))));
    }

    #[test]
    fn ff_examples() {
        let c = ff_certificate(2, 3, 1).unwrap();
        assert!(c.holds && (c.rhs - 9.0 / (3.0 * E)).abs() < 1e-12);
        let c = ff_certificate(4, 4, 1).unwrap();
        assert!(!c.holds && (c.rhs - 0.841).abs() < 1e-3);
        let c = ff_certificate(3, 5, 1).unwrap();
        assert!(c.holds && (c.rhs - 25.0 / (5.0 * E)).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let g = build_chain(41, Boundary::Open).unwrap();
        assert!(matches!(independence_polynomial(&g), Err(Error::EnumerationBudget { .. })));
    }
}
