//! Bipartite entanglement entropy of a state vector.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use libm::log;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};

/// Von Neumann entropy (natural log) of the reduced state on `left`.
///
/// `state` uses the basis index `Σ_k σ(x_k) d^k` over `sites` vertices;
/// Schmidt weights below `1e-14` are dropped.
pub fn entanglement_entropy(state: &[f64], d: usize, sites: usize, left: &[usize]) -> Result<f64> {
    let dim = d.checked_pow(sites as u32).ok_or(Error::DimensionCap { dim: u128::MAX, cap: usize::MAX })?;
    if state.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, got: state.len() });
    }
    let nrm = libm::sqrt(state.iter().map(|x| x * x).sum::<f64>());
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized { norm: nrm });
    }
    let left: BTreeSet<usize> = left.iter().copied().collect();
    if left.iter().any(|&v| v >= sites) {
        return Err(Error::InvalidParameter(format!("cut vertex outside 0..{sites}")));
    }
    let right: Vec<usize> = (0..sites).filter(|v| !left.contains(v)).collect();
    let left: Vec<usize> = left.into_iter().collect();
    let (dl, dr) = (d.pow(left.len() as u32), d.pow(right.len() as u32));
    let mut m = Matrix::zeros(dl, dr);
    for (idx, &amp) in state.iter().enumerate() {
        let digit = |v: usize| (idx / d.pow(v as u32)) % d;
        let li = left.iter().enumerate().map(|(k, &v)| digit(v) * d.pow(k as u32)).sum::<usize>();
        let ri = right.iter().enumerate().map(|(k, &v)| digit(v) * d.pow(k as u32)).sum::<usize>();
        m.row_mut(li)[ri] = amp;
    }
    let rho = if dl <= dr { m.matmul(&m.transpose()) } else { m.transpose().matmul(&m) };
    let mut rho = rho;
    rho.symmetrize();
    let weights = symmetric_eigenvalues(&rho)?;
    Ok(weights.into_iter().filter(|&w| w >= 1e-14).map(|w| -w * log(w)).sum())
}
