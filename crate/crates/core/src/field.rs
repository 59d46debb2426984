//! Quantized-field ingredients at x = 0: ultraviolet cutoff, transverse
//! polarization frame, the A- and B-coupling kernels, Pauli-matrix action on
//! spinors, and the normal-ordering constant.
//!
//! Units: hbar = c = 1, particle mass 1/2, charge sqrt(alpha). The kernel
//! prefactor is zeta(|k|) / (2 pi |k|^{1/2}).

use crate::error::{PfError, Result};
use crate::numerics::{integrate_radial, RadialQuadrature};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];
pub type Spinor = [Complex64; 2];

/// Ultraviolet cutoff profile with compact support [0, Lambda].
#[derive(Debug, Clone, PartialEq)]
pub enum CutoffProfile {
    /// Indicator of [0, Lambda]. Not C^1, but every integral it enters is
    /// convergent and it admits closed-form cross-checks.
    SharpIndicator { lambda: f64 },
    /// C^1 bump: 1 on [0, Lambda - width], cubic smoothstep down to 0 at
    /// Lambda. Hypothesis-faithful variant.
    SmoothBump { lambda: f64, width: f64 },
}

impl CutoffProfile {
    pub fn sharp(lambda: f64) -> Self {
        assert!(lambda > 0.0);
        CutoffProfile::SharpIndicator { lambda }
    }

    pub fn smooth(lambda: f64, width: f64) -> Self {
        assert!(lambda > 0.0 && width > 0.0 && width < lambda);
        CutoffProfile::SmoothBump { lambda, width }
    }

    /// Support radius Lambda.
    pub fn support_radius(&self) -> f64 {
        match self {
            CutoffProfile::SharpIndicator { lambda } => *lambda,
            CutoffProfile::SmoothBump { lambda, .. } => *lambda,
        }
    }

    /// zeta(r), nonnegative, zero beyond the support radius.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            CutoffProfile::SharpIndicator { lambda } => {
                if r <= *lambda {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffProfile::SmoothBump { lambda, width } => {
                if r >= *lambda {
                    0.0
                } else if r <= lambda - width {
                    1.0
                } else {
                    let t = (r - (lambda - width)) / width;
                    1.0 - t * t * (3.0 - 2.0 * t)
                }
            }
        }
    }
}

/// Model parameters: fine structure constant and the spin flag g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    /// 1 = spin-coupled (sigma.B present), 0 = spinless.
    pub g: u8,
}

impl ModelParams {
    pub fn new(alpha: f64, g: u8) -> Result<Self> {
        if alpha < 0.0 {
            return Err(PfError::InvalidInput("alpha must be >= 0".into()));
        }
        if g > 1 {
            return Err(PfError::InvalidInput("spin flag g must be 0 or 1".into()));
        }
        Ok(ModelParams { alpha, g })
    }
}

/// The three Pauli matrices as constant complex entries.
pub struct PauliAction {
    pub sigma1: [[Complex64; 2]; 2],
    pub sigma2: [[Complex64; 2]; 2],
    pub sigma3: [[Complex64; 2]; 2],
}

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);
const CM1: Complex64 = Complex64::new(-1.0, 0.0);
const CMI: Complex64 = Complex64::new(0.0, -1.0);

pub const PAULI: PauliAction = PauliAction {
    sigma1: [[C0, C1], [C1, C0]],
    sigma2: [[C0, CMI], [CI, C0]],
    sigma3: [[C1, C0], [C0, CM1]],
};

/// Transverse polarization pair: eps1 = (k2, -k1, 0)/|k_perp|,
/// eps2 = k/|k| x eps1. {k/|k|, eps1, eps2} is a right-handed orthonormal
/// triad. Fails on the k3-axis.
pub fn polarization_pair(k: &Vec3) -> Result<(Vec3, Vec3)> {
    let perp2 = k[0] * k[0] + k[1] * k[1];
    if perp2 <= 0.0 {
        return Err(PfError::AxisSingularity);
    }
    let perp = perp2.sqrt();
    let norm = (perp2 + k[2] * k[2]).sqrt();
    let eps1 = [k[1] / perp, -k[0] / perp, 0.0];
    // k_hat x eps1, written out
    let kh = [k[0] / norm, k[1] / norm, k[2] / norm];
    let eps2 = [
        kh[1] * eps1[2] - kh[2] * eps1[1],
        kh[2] * eps1[0] - kh[0] * eps1[2],
        kh[0] * eps1[1] - kh[1] * eps1[0],
    ];
    Ok((eps1, eps2))
}

fn kernel_prefactor(k: &Vec3, cutoff: &CutoffProfile) -> f64 {
    let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    cutoff.value(norm) / (2.0 * PI * norm.sqrt())
}

/// Photon-creation kernel of the vector potential A(0):
/// zeta(|k|)/(2 pi |k|^{1/2}) eps_lambda(k). Real-valued; returned complex
/// for uniformity with the magnetic kernel.
pub fn vector_potential_kernel(k: &Vec3, pol: usize, cutoff: &CutoffProfile) -> Result<CVec3> {
    assert!(pol == 1 || pol == 2);
    let (e1, e2) = polarization_pair(k)?;
    let e = if pol == 1 { e1 } else { e2 };
    let c = kernel_prefactor(k, cutoff);
    Ok([
        Complex64::new(c * e[0], 0.0),
        Complex64::new(c * e[1], 0.0),
        Complex64::new(c * e[2], 0.0),
    ])
}

/// Magnetic coupling kernel of B(0) = curl A(0):
/// zeta(|k|)/(2 pi |k|^{1/2}) * (k x i eps_lambda(k)).
pub fn magnetic_field_kernel(k: &Vec3, pol: usize, cutoff: &CutoffProfile) -> Result<CVec3> {
    assert!(pol == 1 || pol == 2);
    let (e1, e2) = polarization_pair(k)?;
    let e = if pol == 1 { e1 } else { e2 };
    let c = kernel_prefactor(k, cutoff);
    let cross = [
        k[1] * e[2] - k[2] * e[1],
        k[2] * e[0] - k[0] * e[2],
        k[0] * e[1] - k[1] * e[0],
    ];
    Ok([
        Complex64::new(0.0, c * cross[0]),
        Complex64::new(0.0, c * cross[1]),
        Complex64::new(0.0, c * cross[2]),
    ])
}

/// (sigma . v) applied to a spinor, for complex v.
pub fn sigma_dot(v: &CVec3, spinor: &Spinor) -> Spinor {
    // sigma.v = [[v3, v1 - i v2], [v1 + i v2, -v3]]
    let (a, b) = (spinor[0], spinor[1]);
    [
        v[2] * a + (v[0] - CI * v[1]) * b,
        (v[0] + CI * v[1]) * a - v[2] * b,
    ]
}

/// Normal-ordering constant c_no = (2/pi) * int_0^inf r |zeta(r)|^2 dr.
pub fn normal_ordering_constant(cutoff: &CutoffProfile, quad: &RadialQuadrature) -> Result<f64> {
    let top = cutoff.support_radius();
    let r = integrate_radial(
        |r| {
            let z = cutoff.value(r);
            r * z * z
        },
        0.0,
        top,
        quad,
    )?;
    Ok(2.0 / PI * r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norm3(v: &Vec3) -> f64 {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    fn dot3(a: &Vec3, b: &Vec3) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[test]
    fn polarization_at_unit_x() {
        let (e1, e2) = polarization_pair(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(e1, [0.0, -1.0, 0.0]);
        assert_eq!(e2, [0.0, 0.0, -1.0]);
    }

    #[test]
    fn polarization_at_unit_y() {
        let (e1, e2) = polarization_pair(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(e1, [1.0, 0.0, 0.0]);
        assert_eq!(e2, [0.0, 0.0, -1.0]);
    }

    #[test]
    fn polarization_axis_error() {
        assert!(matches!(
            polarization_pair(&[0.0, 0.0, 2.0]),
            Err(PfError::AxisSingularity)
        ));
    }

    #[test]
    fn triad_orthonormal_and_right_handed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let k = [
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            ];
            if k[0] * k[0] + k[1] * k[1] < 1e-6 {
                continue;
            }
            let (e1, e2) = polarization_pair(&k).unwrap();
            assert!((norm3(&e1) - 1.0).abs() < 1e-13);
            assert!((norm3(&e2) - 1.0).abs() < 1e-13);
            assert!(dot3(&e1, &e2).abs() < 1e-13);
            assert!(dot3(&e1, &k).abs() < 1e-13 * norm3(&k));
            assert!(dot3(&e2, &k).abs() < 1e-13 * norm3(&k));
            // eps1 x eps2 = k_hat
            let cr = [
                e1[1] * e2[2] - e1[2] * e2[1],
                e1[2] * e2[0] - e1[0] * e2[2],
                e1[0] * e2[1] - e1[1] * e2[0],
            ];
            let n = norm3(&k);
            for i in 0..3 {
                assert!((cr[i] - k[i] / n).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transverse_completeness() {
        // sum_lambda eps_{lambda,i}^2 = 1 - k_i^2/|k|^2
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let k = [
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            ];
            if k[0] * k[0] + k[1] * k[1] < 1e-6 {
                continue;
            }
            let (e1, e2) = polarization_pair(&k).unwrap();
            let n2 = dot3(&k, &k);
            for i in 0..3 {
                let s = e1[i] * e1[i] + e2[i] * e2[i];
                assert!((s - (1.0 - k[i] * k[i] / n2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vector_kernel_magnitude_and_gauge() {
        let cut = CutoffProfile::sharp(1.0);
        let k = [0.3, -0.2, 0.4];
        let nk = norm3(&k);
        for pol in [1, 2] {
            let d = vector_potential_kernel(&k, pol, &cut).unwrap();
            let mag: f64 = d.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!((mag - cut.value(nk) / (2.0 * PI * nk.sqrt())).abs() < 1e-14);
            // Coulomb gauge: kernel transverse to k
            let dk: Complex64 = (0..3).map(|i| d[i] * k[i]).sum();
            assert!(dk.norm() < 1e-14);
        }
        // beyond the support radius the kernel vanishes
        let z = vector_potential_kernel(&[1.2, 0.5, 0.0], 1, &cut).unwrap();
        assert!(z.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn vector_kernel_unit_x_value() {
        let cut = CutoffProfile::sharp(1.0);
        let d = vector_potential_kernel(&[1.0, 0.0, 0.0], 1, &cut).unwrap();
        assert!((d[1].re + 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(d[0].norm() < 1e-15 && d[2].norm() < 1e-15);
    }

    #[test]
    fn magnetic_kernel_magnitude() {
        // |k x eps| = |k| by transversality, so |K| = |k|^{1/2} zeta/(2 pi)
        let cut = CutoffProfile::sharp(2.0);
        let k = [0.5, 0.1, -0.7];
        let nk = norm3(&k);
        for pol in [1, 2] {
            let kk = magnetic_field_kernel(&k, pol, &cut).unwrap();
            let mag: f64 = kk.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!((mag - nk.sqrt() * cut.value(nk) / (2.0 * PI)).abs() < 1e-14);
        }
        let z = magnetic_field_kernel(&[3.0, 0.1, 0.0], 2, &cut).unwrap();
        assert!(z.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn triad_cross_relations_at_unit_x() {
        // k_hat x eps1 = eps2 and k_hat x eps2 = -eps1
        let k = [1.0, 0.0, 0.0];
        let (e1, e2) = polarization_pair(&k).unwrap();
        let c1 = [
            k[1] * e1[2] - k[2] * e1[1],
            k[2] * e1[0] - k[0] * e1[2],
            k[0] * e1[1] - k[1] * e1[0],
        ];
        assert_eq!(c1, e2);
        let c2 = [
            k[1] * e2[2] - k[2] * e2[1],
            k[2] * e2[0] - k[0] * e2[2],
            k[0] * e2[1] - k[1] * e2[0],
        ];
        assert_eq!(c2, [-e1[0], -e1[1], -e1[2]]);
    }

    #[test]
    fn pauli_algebra() {
        // sigma_i^2 = 1 and sigma1 sigma2 = i sigma3
        let mats = [PAULI.sigma1, PAULI.sigma2, PAULI.sigma3];
        for m in &mats {
            for r in 0..2 {
                for c in 0..2 {
                    let mut s = C0;
                    for t in 0..2 {
                        s += m[r][t] * m[t][c];
                    }
                    let expect = if r == c { C1 } else { C0 };
                    assert!((s - expect).norm() < 1e-15);
                }
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                let mut s = C0;
                for t in 0..2 {
                    s += PAULI.sigma1[r][t] * PAULI.sigma2[t][c];
                }
                assert!((s - CI * PAULI.sigma3[r][c]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sigma_dot_eigen_and_flip() {
        let up: Spinor = [C1, C0];
        let ez = sigma_dot(&[C0, C0, C1], &up);
        assert!((ez[0] - C1).norm() < 1e-15 && ez[1].norm() < 1e-15);
        let ex = sigma_dot(&[C1, C0, C0], &up);
        assert!(ex[0].norm() < 1e-15 && (ex[1] - C1).norm() < 1e-15);
    }

    #[test]
    fn sigma_dot_preserves_norm_for_real_vectors() {
        // (sigma.u)^2 = |u|^2 for real u
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let u: CVec3 = [
                Complex64::new(rng.gen::<f64>() - 0.5, 0.0),
                Complex64::new(rng.gen::<f64>() - 0.5, 0.0),
                Complex64::new(rng.gen::<f64>() - 0.5, 0.0),
            ];
            let w: Spinor = [
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            ];
            let sw = sigma_dot(&u, &w);
            let lhs = sw[0].norm_sqr() + sw[1].norm_sqr();
            let u2: f64 = u.iter().map(|c| c.norm_sqr()).sum();
            let w2 = w[0].norm_sqr() + w[1].norm_sqr();
            assert!((lhs - u2 * w2).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_ordering_sharp_scaling() {
        let quad = RadialQuadrature::default();
        let c1 = normal_ordering_constant(&CutoffProfile::sharp(1.0), &quad).unwrap();
        assert!((c1 - 1.0 / PI).abs() < 1e-12);
        let c2 = normal_ordering_constant(&CutoffProfile::sharp(2.0), &quad).unwrap();
        assert!((c2 - 4.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn smooth_bump_is_c1_and_supported() {
        let cut = CutoffProfile::smooth(1.0, 0.2);
        assert_eq!(cut.value(1.1), 0.0);
        assert_eq!(cut.value(0.5), 1.0);
        assert!((cut.value(0.9) - 0.5).abs() < 1e-12);
        // one-sided slopes vanish at both ramp ends (FD error ~ zeta'' h / 2)
        let h = 1e-8;
        let d_in = (cut.value(0.8 + h) - cut.value(0.8)) / h;
        let d_out = (cut.value(1.0) - cut.value(1.0 - h)) / h;
        assert!(d_in.abs() < 1e-5 && d_out.abs() < 1e-5);
    }
}
