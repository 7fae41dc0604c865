//! Exact conductance by subset enumeration and the normalized-Laplacian
//! spectral gap by power iteration.

use super::{Graph, GraphError};

/// How a [`ConductanceReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConductanceMethod {
    ExactEnumeration,
    SpectralLowerBound,
}

/// Conductance value together with the set that attains it (when known).
#[derive(Debug, Clone)]
pub struct ConductanceReport {
    pub phi: f64,
    /// Minimizing subset, sorted ascending; empty for spectral bounds.
    pub argmin_set: Vec<usize>,
    pub method: ConductanceMethod,
}

/// Largest vertex count accepted by [`conductance_exact`]; the subset
/// enumeration is `O(2^n · n)`.
pub const CONDUCTANCE_EXACT_MAX_N: usize = 24;

/// Exact conductance `min |boundary(S)| / vol(S)` over nonempty subsets
/// with `vol(S) <= vol(V)/2`, by enumerating all `2^n` subsets.
///
/// Ties break toward the first subset in mask order, so the report is
/// deterministic.
pub fn conductance_exact(g: &Graph) -> Result<ConductanceReport, GraphError> {
    let n = g.n();
    if n > CONDUCTANCE_EXACT_MAX_N {
        return Err(GraphError::TooLarge(format!(
            "conductance_exact enumerates subsets; n = {n} exceeds {CONDUCTANCE_EXACT_MAX_N}"
        )));
    }
    if n < 2 {
        return Err(GraphError::InvalidParams(
            "conductance needs at least 2 vertices".into(),
        ));
    }
    let adj_mask: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect();
    let degree: Vec<u32> = (0..n).map(|v| g.degree(v) as u32).collect();
    let half_volume = g.volume() as u32 / 2;

    let mut best_phi = f64::INFINITY;
    let mut best_mask = 0u32;
    for mask in 1u32..(1 << n) {
        let mut volume = 0u32;
        let mut cut = 0u32;
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            volume += degree[v];
            cut += (adj_mask[v] & !mask).count_ones();
        }
        if volume > half_volume {
            continue;
        }
        let phi = f64::from(cut) / f64::from(volume);
        if phi < best_phi {
            best_phi = phi;
            best_mask = mask;
        }
    }
    let argmin_set = (0..n).filter(|&v| best_mask >> v & 1 == 1).collect();
    Ok(ConductanceReport {
        phi: best_phi,
        argmin_set,
        method: ConductanceMethod::ExactEnumeration,
    })
}

/// Cheeger lower bound `nu_2 / 2 <= phi`, usable when `n` is beyond the
/// enumeration budget. The report carries no argmin set.
pub fn conductance_spectral_lower(g: &Graph, tol: f64) -> Result<ConductanceReport, GraphError> {
    let nu2 = spectral_gap(g, tol)?;
    Ok(ConductanceReport {
        phi: nu2 / 2.0,
        argmin_set: Vec::new(),
        method: ConductanceMethod::SpectralLowerBound,
    })
}

const POWER_ITERATION_CAP: usize = 2_000_000;

/// Second-smallest eigenvalue of the normalized Laplacian, to within
/// `tol`.
///
/// Works matrix-free on the symmetrized lazy walk operator
/// `W = (I + D^{-1/2} A D^{-1/2}) / 2`, whose spectrum lies in `[0, 1]`
/// with top eigenvector proportional to `sqrt(degree)`. Power iteration
/// with deflation against that known top eigenvector converges to the
/// second-largest eigenvalue `w`, and the gap is `nu_2 = 2 - 2w`.
pub fn spectral_gap(g: &Graph, tol: f64) -> Result<f64, GraphError> {
    let n = g.n();
    if n < 2 {
        return Err(GraphError::InvalidParams(
            "spectral gap needs at least 2 vertices".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(GraphError::InvalidParams("tol must be positive".into()));
    }
    let inv_sqrt_deg: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    // Top eigenvector of W in the symmetric basis, normalized.
    let mut top: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
    normalize(&mut top);

    // Fixed pseudo-random start vector (an LCG keeps this dependency-free
    // and deterministic), projected off the top eigenvector.
    let mut x: Vec<f64> = {
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    };
    project_off(&mut x, &top);
    if norm(&x) < 1e-300 {
        x[0] += 1.0;
        project_off(&mut x, &top);
    }
    normalize(&mut x);

    let mut y = vec![0.0; n];
    // Residual `||Wx - theta x|| <= tol/2` bounds the eigenvalue error of
    // theta by tol/2 (W is symmetric), hence nu_2 by tol.
    let target_residual = tol / 2.0;
    let mut theta = 0.0;
    for iteration in 0..POWER_ITERATION_CAP {
        apply_lazy_walk(g, &inv_sqrt_deg, &x, &mut y);
        project_off(&mut y, &top);
        theta = dot(&x, &y);
        let residual = {
            let mut r = 0.0;
            for i in 0..n {
                let d = y[i] - theta * x[i];
                r += d * d;
            }
            r.sqrt()
        };
        if residual <= target_residual {
            return Ok((2.0 - 2.0 * theta).clamp(0.0, 2.0));
        }
        let len = norm(&y);
        if len < 1e-300 {
            // The deflated operator annihilates x: remaining spectrum 0.
            return Ok(2.0);
        }
        for i in 0..n {
            x[i] = y[i] / len;
        }
        let _ = iteration;
    }
    Err(GraphError::NoConvergence {
        iterations: POWER_ITERATION_CAP,
        residual: theta,
    })
}

/// `y = (x + S x) / 2` where `S = D^{-1/2} A D^{-1/2}`.
fn apply_lazy_walk(g: &Graph, inv_sqrt_deg: &[f64], x: &[f64], y: &mut [f64]) {
    for v in 0..g.n() {
        let mut acc = 0.0;
        for &w in g.neighbors(v) {
            acc += x[w as usize] * inv_sqrt_deg[w as usize];
        }
        y[v] = 0.5 * (x[v] + acc * inv_sqrt_deg[v]);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let len = norm(a);
    for x in a.iter_mut() {
        *x /= len;
    }
}

fn project_off(a: &mut [f64], unit: &[f64]) {
    let c = dot(a, unit);
    for (x, u) in a.iter_mut().zip(unit) {
        *x -= c * u;
    }
}
