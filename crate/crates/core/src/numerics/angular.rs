//! Unit-sphere quadrature.
//!
//! Product rule: Gauss-Legendre in cos(theta) times a uniform, half-offset
//! grid in phi. The offset keeps every node away from phi = j*pi/2, and the
//! Gauss nodes are interior, so no node ever hits the k3-axis where the
//! transverse polarization frame degenerates.

use crate::error::{PfError, Result};
use crate::numerics::quadrature::gauss_legendre;

#[derive(Debug, Clone)]
pub struct AngularScheme {
    /// Unit vectors on S^2.
    pub nodes: Vec<[f64; 3]>,
    /// Weights summing to 1 (sphere average convention).
    pub weights: Vec<f64>,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Spherical polynomials up to this degree are integrated exactly.
    pub degree: usize,
}

impl AngularScheme {
    /// Product scheme with `n_theta` Gauss nodes in cos(theta) and `n_phi`
    /// uniform phi nodes. `n_phi` must be a multiple of 4 so the half-offset
    /// grid misses all multiples of pi/2.
    pub fn product(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 3 || n_phi < 8 || n_phi % 4 != 0 {
            return Err(PfError::InvalidInput(format!(
                "angular scheme needs n_theta >= 3 and n_phi >= 8 divisible by 4, got {n_theta} x {n_phi}"
            )));
        }
        let (ct, wt) = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let wphi = 1.0 / n_phi as f64;
        for (c, w) in ct.iter().zip(&wt) {
            let s = (1.0 - c * c).sqrt();
            for m in 0..n_phi {
                let phi = (m as f64 + 0.5) * std::f64::consts::TAU / n_phi as f64;
                nodes.push([s * phi.cos(), s * phi.sin(), *c]);
                // GL weights sum to 2 over cos(theta) in [-1,1]; divide by 2
                // for the sphere average.
                weights.push(0.5 * w * wphi);
            }
        }
        let degree = (2 * n_theta - 1).min(n_phi - 1);
        let scheme = AngularScheme {
            nodes,
            weights,
            n_theta,
            n_phi,
            degree,
        };
        debug_assert!(scheme.degree >= 4);
        Ok(scheme)
    }

    /// Default scheme used for reference-grid computations.
    pub fn reference() -> Self {
        Self::product(12, 24).expect("reference angular scheme")
    }

    /// Sphere average (1/4pi) * integral of g over S^2.
    pub fn average<G: Fn(&[f64; 3]) -> f64>(&self, g: G) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(n, w)| w * g(n))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
