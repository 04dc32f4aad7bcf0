//! The spectral measure weighting the fractional orders, together with the
//! critical-order bookkeeping it induces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

/// A nonnegative finite measure on (0, 1), stored as weighted atoms
/// (order, weight). Continuous densities are reduced to atoms by
/// Gauss-Legendre quadrature before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    /// The zero measure (purely local case).
    pub fn zero() -> Self {
        SpectralMeasure { atoms: Vec::new() }
    }

    /// Build from raw (order, weight) pairs. Duplicated orders are merged by
    /// summing weights; the result is sorted by order.
    pub fn from_atoms(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for &(s, c) in pairs {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::Domain(format!(
                    "atom order {s} outside the open interval (0, 1)"
                )));
            }
            if !(c >= 0.0) {
                return Err(Error::Domain(format!("atom weight {c} is negative")));
            }
            match atoms.iter_mut().find(|(s0, _)| *s0 == s) {
                Some((_, c0)) => *c0 += c,
                None => atoms.push((s, c)),
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(SpectralMeasure { atoms })
    }

    /// Reduce the density `omega(s) ds` to atoms at the nodes of an
    /// `n_nodes`-point Gauss-Legendre rule on (0, 1).
    pub fn from_density<F: Fn(f64) -> f64>(omega: F, n_nodes: usize) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::Domain("from_density needs n_nodes >= 1".into()));
        }
        let (xs, ws) = gauss_legendre_on(n_nodes, 0.0, 1.0);
        let mut atoms = Vec::with_capacity(n_nodes);
        for (s, w) in xs.iter().zip(&ws) {
            let v = omega(*s);
            if v < 0.0 {
                return Err(Error::Domain(format!(
                    "density negative at quadrature node s = {s}: {v}"
                )));
            }
            atoms.push((*s, w * v));
        }
        if atoms.iter().all(|(_, c)| *c == 0.0) {
            return Err(Error::DegenerateMeasure(
                "density vanishes at every quadrature node".into(),
            ));
        }
        SpectralMeasure::from_atoms(&atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() || self.atoms.iter().all(|(_, c)| *c == 0.0)
    }

    /// Total mass of the measure.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|(_, c)| c).sum()
    }
}

/// Effective top order of the operator and the induced critical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderBookkeeping {
    pub s_sharp: f64,
    /// 2N/(N - 2 s_sharp) when N > 2 s_sharp, infinity otherwise.
    pub critical_exponent: f64,
    pub spatial_dim: usize,
}

/// Critical-order bookkeeping: the top order is 1 whenever the local part is
/// present, otherwise the largest atom order carrying positive weight.
pub fn s_sharp(measure: &SpectralMeasure, alpha: f64) -> Result<OrderBookkeeping> {
    let n = 1usize;
    let s = if alpha != 0.0 {
        1.0
    } else {
        measure
            .atoms()
            .iter()
            .filter(|(_, c)| *c > 0.0)
            .map(|(s, _)| *s)
            .fold(f64::NAN, f64::max)
    };
    if s.is_nan() {
        return Err(Error::DegenerateOperator);
    }
    let nf = n as f64;
    let critical_exponent = if nf > 2.0 * s {
        2.0 * nf / (nf - 2.0 * s)
    } else {
        f64::INFINITY
    };
    Ok(OrderBookkeeping {
        s_sharp: s,
        critical_exponent,
        spatial_dim: n,
    })
}

/// Normalizing constant of the fractional Laplacian,
/// c_{N,s} = s 4^s Gamma(N/2 + s) / (pi^{N/2} Gamma(1 - s)),
/// chosen so that the operator tends to -Laplace as s -> 1 and to the
/// identity as s -> 0.
pub fn cns_constant(n: usize, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("order {s} outside (0, 1)")));
    }
    let nf = n as f64;
    let g1 = statrs::function::gamma::gamma(nf / 2.0 + s);
    let g2 = statrs::function::gamma::gamma(1.0 - s);
    Ok(s * 4f64.powf(s) * g1 / (std::f64::consts::PI.powf(nf / 2.0) * g2))
}
