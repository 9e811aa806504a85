//! Closed-form radial solutions of `Δu − γ²u = 0` in a concentric annulus,
//! used to validate the boundary-integral solvers.

use crate::error::Result;
use crate::specfun::bessel_set;

/// `u(x) = c₁ I₀(γ|x|) + c₂ K₀(γ|x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSolution {
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
}

impl AnnulusSolution {
    /// The solution with prescribed values `u(a) = ua`, `u(b) = ub`.
    pub fn from_dirichlet(gamma: f64, a: f64, ua: f64, b: f64, ub: f64) -> Result<Self> {
        let ba = bessel_set(gamma * a)?;
        let bb = bessel_set(gamma * b)?;
        let det = ba.i0 * bb.k0 - ba.k0 * bb.i0;
        Ok(Self {
            gamma,
            c1: (ua * bb.k0 - ub * ba.k0) / det,
            c2: (ub * ba.i0 - ua * bb.i0) / det,
        })
    }

    /// The solution with `u(a) = ua` and radial derivative `u′(b) = gb`.
    pub fn from_mixed(gamma: f64, a: f64, ua: f64, b: f64, gb: f64) -> Result<Self> {
        let ba = bessel_set(gamma * a)?;
        let bb = bessel_set(gamma * b)?;
        // c₁ I₀(γa) + c₂ K₀(γa) = ua ;  γ(c₁ I₁(γb) − c₂ K₁(γb)) = gb
        let det = ba.i0 * (-gamma * bb.k1) - ba.k0 * (gamma * bb.i1);
        Ok(Self {
            gamma,
            c1: (ua * (-gamma * bb.k1) - ba.k0 * gb) / det,
            c2: (ba.i0 * gb - gamma * bb.i1 * ua) / det,
        })
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        let b = bessel_set(self.gamma * r)?;
        Ok(self.c1 * b.i0 + self.c2 * b.k0)
    }

    /// `du/dr`.
    pub fn radial_derivative(&self, r: f64) -> Result<f64> {
        let b = bessel_set(self.gamma * r)?;
        Ok(self.gamma * (self.c1 * b.i1 - self.c2 * b.k1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_conditions_hold() {
        let d = AnnulusSolution::from_dirichlet(1.3, 0.5, 0.2, 1.0, -0.7).unwrap();
        assert!((d.value(0.5).unwrap() - 0.2).abs() < 1e-14);
        assert!((d.value(1.0).unwrap() + 0.7).abs() < 1e-14);
        let m = AnnulusSolution::from_mixed(1.0, 0.5, 0.0, 1.0, 0.3).unwrap();
        assert!(m.value(0.5).unwrap().abs() < 1e-14);
        assert!((m.radial_derivative(1.0).unwrap() - 0.3).abs() < 1e-14);
    }
}
