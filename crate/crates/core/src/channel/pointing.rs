use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Physical misalignment geometry behind a [`PointingParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    /// Beam width at the receiver (m).
    pub omega_z: f64,
    /// Jitter standard deviation (m).
    pub sigma_s: f64,
    /// Aperture radius (m).
    pub r1: f64,
    pub upsilon: f64,
    /// Equivalent beam width (m).
    pub omega_z_eq: f64,
}

/// Zero-boresight pointing-error parameters: `h_p ∈ [0, S₀]` with density
/// `φ² h^{φ²−1} / S₀^{φ²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointingParams {
    phi: f64,
    s0: f64,
    geometry: Option<BeamGeometry>,
}

impl PointingParams {
    /// Direct construction from the derived pair, as quoted in link setups.
    pub fn from_phi_s0(phi: f64, s0: f64) -> Result<Self> {
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("phi must be positive, got {phi}")));
        }
        if !(s0 > 0.0 && s0 <= 1.0) {
            return Err(Error::InvalidParameter(format!("S0 must lie in (0, 1], got {s0}")));
        }
        Ok(PointingParams {
            phi,
            s0,
            geometry: None,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn phi2(&self) -> f64 {
        self.phi * self.phi
    }

    /// `φ²/2`, the exponent shared by every SNR expression.
    pub fn half_phi2(&self) -> f64 {
        0.5 * self.phi * self.phi
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn geometry(&self) -> Option<&BeamGeometry> {
        self.geometry.as_ref()
    }

    pub fn with_phi(self, phi: f64) -> Result<Self> {
        PointingParams::from_phi_s0(phi, self.s0)
    }
}

fn upsilon(omega_z: f64, r1: f64) -> f64 {
    (PI / 2.0).sqrt() * r1 / omega_z
}

fn equivalent_beam_width(omega_z: f64, v: f64) -> f64 {
    let erf = libm::erf(v);
    (omega_z * omega_z * PI.sqrt() * erf / (2.0 * v * (-v * v).exp())).sqrt()
}

/// Pointing parameters from beam width `ω_z`, jitter `σ_s` and aperture `r₁`.
pub fn derive_pointing(omega_z: f64, sigma_s: f64, r1: f64) -> Result<PointingParams> {
    for (name, v) in [("beam width", omega_z), ("jitter", sigma_s), ("aperture radius", r1)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let v = upsilon(omega_z, r1);
    let erf = libm::erf(v);
    let s0 = erf * erf;
    let omega_z_eq = equivalent_beam_width(omega_z, v);
    if !omega_z_eq.is_finite() {
        return Err(Error::Domain(format!(
            "equivalent beam width overflows for r1/omega_z = {}",
            r1 / omega_z
        )));
    }
    Ok(PointingParams {
        phi: omega_z_eq / (2.0 * sigma_s),
        s0,
        geometry: Some(BeamGeometry {
            omega_z,
            sigma_s,
            r1,
            upsilon: v,
            omega_z_eq,
        }),
    })
}

/// Jitter standard deviation that yields a target `φ` for the given beam.
pub fn jitter_for_phi(omega_z: f64, r1: f64, phi: f64) -> Result<f64> {
    if !(omega_z > 0.0 && r1 > 0.0 && phi > 0.0) {
        return Err(Error::InvalidParameter("beam width, aperture and phi must be positive".into()));
    }
    Ok(equivalent_beam_width(omega_z, upsilon(omega_z, r1)) / (2.0 * phi))
}

/// Density of the pointing gain; zero outside `[0, S₀]`.
pub fn pointing_pdf(params: &PointingParams, h_p: f64) -> f64 {
    if !(0.0..=params.s0).contains(&h_p) {
        return 0.0;
    }
    let p2 = params.phi2();
    p2 / params.s0.powf(p2) * h_p.powf(p2 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::quad::integrate;

    #[test]
    fn recompute_and_compare() {
        let (wz, ss, r1) = (0.8, 0.12, 0.1);
        let p = derive_pointing(wz, ss, r1).unwrap();
        let g = p.geometry().unwrap();
        let v = (PI / 2.0).sqrt() * r1 / wz;
        assert_eq!(g.upsilon, v);
        let e = libm::erf(v);
        assert!((p.s0() - e * e).abs() < 1e-15);
        let weq2 = wz * wz * PI.sqrt() * e / (2.0 * v * (-v * v).exp());
        assert!((g.omega_z_eq.powi(2) - weq2).abs() < 1e-14 * weq2);
        assert!((p.phi() - weq2.sqrt() / (2.0 * ss)).abs() < 1e-14);
    }

    #[test]
    fn wide_aperture_saturates() {
        let p = derive_pointing(0.01, 0.01, 10.0);
        // equivalent width overflows long before S0 stops moving
        assert!(p.is_err() || p.unwrap().s0() > 0.999_999);
        let p = derive_pointing(0.05, 0.01, 0.5).unwrap();
        assert!(p.s0() > 0.999_999);
    }

    #[test]
    fn vanishing_jitter() {
        let a = derive_pointing(1.0, 1e-3, 0.1).unwrap().phi();
        let b = derive_pointing(1.0, 1e-6, 0.1).unwrap().phi();
        assert!(b > 999.0 * a);
    }

    #[test]
    fn phi_inversion() {
        for wz in [0.5, 1.0, 2.0] {
            for phi in [1.0, 2.5, 6.0] {
                let ss = jitter_for_phi(wz, 0.1, phi).unwrap();
                let p = derive_pointing(wz, ss, 0.1).unwrap();
                assert!((p.phi() - phi).abs() < 1e-12 * phi);
            }
        }
    }

    #[test]
    fn density_normalized() {
        for phi in [0.8, 1.0, 2.5, 6.0] {
            let p = PointingParams::from_phi_s0(phi, 0.054).unwrap();
            let r = integrate(|h| pointing_pdf(&p, h), 0.0, 0.054, 1e-12, 1e-10, 200).unwrap();
            assert!((r.value - 1.0).abs() < 1e-7, "phi={phi}: {}", r.value);
            assert_eq!(pointing_pdf(&p, 0.06), 0.0);
            assert_eq!(pointing_pdf(&p, -0.01), 0.0);
        }
    }

    #[test]
    fn linear_density_at_phi_sqrt2() {
        let p = PointingParams::from_phi_s0(2f64.sqrt(), 0.054).unwrap();
        for h in [0.01, 0.03, 0.05] {
            let expect = 2.0 * h / (0.054 * 0.054);
            assert!((pointing_pdf(&p, h) - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PointingParams::from_phi_s0(0.0, 0.5).is_err());
        assert!(PointingParams::from_phi_s0(1.0, 1.5).is_err());
        assert!(derive_pointing(-1.0, 0.1, 0.1).is_err());
    }
}
