//! Product grid over photon momentum space and densely sampled one-photon
//! amplitudes.
//!
//! A one-photon state of the spin-1/2 particle-field system is a 4-component
//! function xi(s, k, lambda) over spin x momentum x polarization. Amplitudes
//! are stored as samples on a radial Gauss-Legendre grid on [0, Lambda]
//! tensored with an angular product scheme; the full R^3 measure (including
//! the r^2 volume factor and 4 pi) is baked into per-node weights.

use crate::error::Result;
use crate::field::{polarization_pair, CutoffProfile};
use crate::numerics::{gauss_legendre, AngularScheme};
use num_complex::Complex64;
use std::sync::Arc;

/// Component ordering: (up, pol 1), (up, pol 2), (down, pol 1), (down, pol 2).
pub const N_COMP: usize = 4;

#[derive(Debug, Clone)]
pub struct GridNode {
    pub k: [f64; 3],
    pub k_norm: f64,
    /// Full measure weight: r^2 w_r * 4 pi w_ang.
    pub weight: f64,
    pub eps1: [f64; 3],
    pub eps2: [f64; 3],
    pub zeta: f64,
}

#[derive(Debug, Clone)]
pub struct PhotonGrid {
    pub cutoff: CutoffProfile,
    pub nodes: Vec<GridNode>,
    pub n_radial: usize,
    pub angular: AngularScheme,
}

impl PhotonGrid {
    pub fn new(cutoff: &CutoffProfile, n_radial: usize, angular: AngularScheme) -> Result<Self> {
        let top = cutoff.support_radius();
        let (xs, ws) = gauss_legendre(n_radial);
        let mut nodes = Vec::with_capacity(n_radial * angular.len());
        for (x, wr) in xs.iter().zip(&ws) {
            // map [-1,1] -> [0, top]
            let r = 0.5 * top * (x + 1.0);
            let wr = 0.5 * top * wr;
            let zeta = cutoff.value(r);
            for (dir, wa) in angular.nodes.iter().zip(&angular.weights) {
                let k = [r * dir[0], r * dir[1], r * dir[2]];
                let (eps1, eps2) = polarization_pair(&k)?;
                nodes.push(GridNode {
                    k,
                    k_norm: r,
                    weight: r * r * wr * 4.0 * std::f64::consts::PI * wa,
                    eps1,
                    eps2,
                    zeta,
                });
            }
        }
        Ok(PhotonGrid {
            cutoff: cutoff.clone(),
            nodes,
            n_radial,
            angular,
        })
    }

    /// Reference grid used by the acceptance suite.
    pub fn reference(cutoff: &CutoffProfile) -> Self {
        Self::new(cutoff, 40, AngularScheme::reference()).expect("reference grid")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// k^2 + |k| at a node.
    pub fn free_energy(&self, idx: usize) -> f64 {
        let n = &self.nodes[idx];
        n.k_norm * n.k_norm + n.k_norm
    }
}

/// Origin of an amplitude's samples; closed-form kinds can be re-evaluated
/// pointwise to validate the stored grid data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeKind {
    /// sqrt(alpha) i / (2 pi |k|(1+|k|)) Gamma_{a,b}
    MinimizerClosedForm,
    /// (k^2+|k|+C)^{-1} D*-created amplitude along one axis
    DressingClosedForm,
    /// sigma.K* applied to a vacuum spinor
    MagneticCoupling,
    Generic,
}

/// Dense 4-component one-photon amplitude on a shared grid.
#[derive(Clone)]
pub struct OnePhotonAmplitude {
    pub grid: Arc<PhotonGrid>,
    /// values[node][component]
    pub values: Vec<[Complex64; N_COMP]>,
    pub kind: AmplitudeKind,
}

impl OnePhotonAmplitude {
    pub fn from_fn<F>(grid: &Arc<PhotonGrid>, kind: AmplitudeKind, mut f: F) -> Self
    where
        F: FnMut(&GridNode) -> [Complex64; N_COMP],
    {
        let values = grid.nodes.iter().map(|n| f(n)).collect();
        OnePhotonAmplitude {
            grid: Arc::clone(grid),
            values,
            kind,
        }
    }

    pub fn zero(grid: &Arc<PhotonGrid>) -> Self {
        OnePhotonAmplitude {
            grid: Arc::clone(grid),
            values: vec![[Complex64::ZERO; N_COMP]; grid.len()],
            kind: AmplitudeKind::Generic,
        }
    }

    /// Plain inner product, conjugate-linear in self.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.inner_weighted(other, |_, _| 1.0)
    }

    /// Weighted inner product <w(node) self, other>.
    pub fn inner_weighted<W>(&self, other: &Self, w: W) -> Complex64
    where
        W: Fn(&PhotonGrid, usize) -> f64,
    {
        debug_assert_eq!(self.values.len(), other.values.len());
        let grid = &*self.grid;
        let mut acc = Complex64::ZERO;
        for (idx, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let wt = grid.nodes[idx].weight * w(grid, idx);
            let mut s = Complex64::ZERO;
            for c in 0..N_COMP {
                s += a[c].conj() * b[c];
            }
            acc += wt * s;
        }
        acc
    }

    /// Energy-weighted inner product <(k^2+|k|) self, other>.
    pub fn inner_energy(&self, other: &Self) -> Complex64 {
        self.inner_weighted(other, |g, i| g.free_energy(i))
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re
    }

    /// ||.||_1^2 with weight k^2 + |k|.
    pub fn norm1_sq(&self) -> f64 {
        self.inner_energy(self).re
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        OnePhotonAmplitude {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v.map(|x| c * x)).collect(),
            kind: AmplitudeKind::Generic,
        }
    }

    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let mut out = [Complex64::ZERO; N_COMP];
                for i in 0..N_COMP {
                    out[i] = a[i] + c * b[i];
                }
                out
            })
            .collect();
        OnePhotonAmplitude {
            grid: Arc::clone(&self.grid),
            values,
            kind: AmplitudeKind::Generic,
        }
    }

    /// Amplitude with every component multiplied by a real node function.
    pub fn pointwise_real<W>(&self, w: W) -> Self
    where
        W: Fn(&PhotonGrid, usize) -> f64,
    {
        let grid = &*self.grid;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v.map(|x| x * w(grid, i)))
            .collect();
        OnePhotonAmplitude {
            grid: Arc::clone(&self.grid),
            values,
            kind: AmplitudeKind::Generic,
        }
    }

    /// Spin contraction sum_lambda int conj(g_j) xi dk of a photon-removal
    /// kernel g (real per component) against this amplitude; returns the
    /// resulting vacuum spinor components (up, down).
    pub fn remove_photon(&self, kernel: &Self) -> [Complex64; 2] {
        let grid = &*self.grid;
        let mut up = Complex64::ZERO;
        let mut down = Complex64::ZERO;
        for (idx, (k, x)) in kernel.values.iter().zip(&self.values).enumerate() {
            let wt = grid.nodes[idx].weight;
            up += wt * (k[0].conj() * x[0] + k[1].conj() * x[1]);
            down += wt * (k[2].conj() * x[2] + k[3].conj() * x[3]);
        }
        [up, down]
    }
}
