//! Fundamental kernels `h_m` and the Riesz normalization constants `c_m`.
//!
//! With these conventions `c_m * Δ h_m = δ_0` in the sense of distributions,
//! so the Riesz measure of a subharmonic `u` is `c_m Δu`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euclidean dimension of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(u32);

impl Dimension {
    pub const LINE: Dimension = Dimension(1);
    pub const PLANE: Dimension = Dimension(2);
    pub const SPACE: Dimension = Dimension(3);

    pub fn new(m: i64) -> Result<Self> {
        if m < 1 || m > u32::MAX as i64 {
            return Err(Error::InvalidDimension(m));
        }
        Ok(Dimension(m as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// The kernel `h_m` together with its Riesz constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    dim: Dimension,
    riesz: f64,
}

impl Kernel {
    pub fn new(dim: Dimension) -> Self {
        Kernel { dim, riesz: riesz_constant_for(dim) }
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn riesz_constant(&self) -> f64 {
        self.riesz
    }

    /// Kernel value as a function of the distance `r = |t| >= 0`.
    pub fn radial(&self, r: f64) -> f64 {
        let r = r.abs();
        match self.dim.0 {
            1 => r,
            2 => {
                if r == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    r.ln()
                }
            }
            m => {
                if r == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -r.powi(-(m as i32 - 2))
                }
            }
        }
    }

    /// Kernel value at a displacement vector of any length.
    pub fn eval(&self, displacement: &[f64]) -> f64 {
        let r = displacement.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.radial(r)
    }
}

/// `h_m(t)`: `|t|` for `m = 1`, `log|t|` for `m = 2`, `-|t|^{2-m}` for `m >= 3`.
///
/// At `t = 0` the value is `-inf` for `m >= 2` and `0` for `m = 1`.
pub fn kernel_h(m: i64, t: &[f64]) -> Result<f64> {
    Ok(Kernel::new(Dimension::new(m)?).eval(t))
}

/// `c_m = Γ(m/2) / (2 π^{m/2} max{1, m-2})`.
pub fn riesz_constant(m: i64) -> Result<f64> {
    Ok(riesz_constant_for(Dimension::new(m)?))
}

fn riesz_constant_for(dim: Dimension) -> f64 {
    let m = dim.0;
    let denom = 2.0 * PI.powf(m as f64 / 2.0) * (m.saturating_sub(2).max(1)) as f64;
    gamma_half_integer(m) / denom
}

/// `Γ(k/2)` for a positive integer `k`, via `Γ(1/2) = √π`, `Γ(1) = 1` and the
/// recurrence `Γ(x + 1) = x Γ(x)`.
pub(crate) fn gamma_half_integer(k: u32) -> f64 {
    debug_assert!(k >= 1);
    let (mut x, mut g) = if k % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = k as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_h(2, &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(kernel_h(1, &[-3.0]).unwrap(), 3.0);
        assert_relative_eq!(kernel_h(3, &[2.0, 0.0, 0.0]).unwrap(), -0.5);
    }

    #[test]
    fn kernel_at_origin() {
        assert_eq!(kernel_h(1, &[0.0]).unwrap(), 0.0);
        assert_eq!(kernel_h(2, &[0.0, 0.0]).unwrap(), f64::NEG_INFINITY);
        assert_eq!(kernel_h(3, &[0.0, 0.0, 0.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn invalid_dimension() {
        assert!(matches!(kernel_h(0, &[1.0]), Err(Error::InvalidDimension(0))));
        assert!(matches!(riesz_constant(-2), Err(Error::InvalidDimension(-2))));
    }

    #[test]
    fn riesz_constants_low_dimensions() {
        assert_relative_eq!(riesz_constant(1).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(riesz_constant(2).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(riesz_constant(3).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn gamma_matches_statrs() {
        for k in 1..=12u32 {
            let expected = statrs::function::gamma::gamma(k as f64 / 2.0);
            assert_relative_eq!(gamma_half_integer(k), expected, max_relative = 1e-12);
        }
    }

    // Independent check of c_m: the outward flux of ∇h_m through the unit
    // sphere is the total Laplacian mass at the origin, so c_m * flux = 1.
    #[test]
    fn riesz_constant_times_flux_is_one() {
        // m = 1: (|t|)'' = 2 δ, the jump of the derivative, seen by a second difference.
        let step = 1e-3;
        let k1 = Kernel::new(Dimension::LINE);
        let jump = (k1.radial(step) + k1.radial(-step) - 2.0 * k1.radial(0.0)) / step;
        assert_relative_eq!(riesz_constant(1).unwrap() * jump, 1.0, max_relative = 1e-12);

        // m = 2: radial derivative of log r is 1/r, circumference 2π r.
        let k2 = Kernel::new(Dimension::PLANE);
        let r = 0.7;
        let dr = 1e-6;
        let deriv = (k2.radial(r + dr) - k2.radial(r - dr)) / (2.0 * dr);
        let flux = deriv * 2.0 * PI * r;
        assert_relative_eq!(riesz_constant(2).unwrap() * flux, 1.0, max_relative = 1e-8);

        // m = 3: surface quadrature of ∂_r(-1/r) over a sphere of radius r.
        let k3 = Kernel::new(Dimension::SPACE);
        let n = 200;
        let mut flux = 0.0;
        for i in 0..n {
            let theta = PI * (i as f64 + 0.5) / n as f64;
            for j in 0..2 * n {
                let phi = PI * (j as f64 + 0.5) / n as f64;
                let dir = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                let outer: Vec<f64> = dir.iter().map(|d| d * (r + dr)).collect();
                let inner: Vec<f64> = dir.iter().map(|d| d * (r - dr)).collect();
                let dn = (k3.eval(&outer) - k3.eval(&inner)) / (2.0 * dr);
                let area = r * r * theta.sin() * (PI / n as f64) * (PI / n as f64);
                flux += dn * area;
            }
        }
        assert_relative_eq!(riesz_constant(3).unwrap() * flux, 1.0, max_relative = 1e-4);
    }

    #[test]
    fn kernels_are_nondecreasing_and_radial() {
        for m in 1..=4 {
            let k = Kernel::new(Dimension::new(m).unwrap());
            let mut prev = f64::NEG_INFINITY;
            for i in 1..200 {
                let r = i as f64 * 0.05;
                let v = k.radial(r);
                assert!(v >= prev);
                prev = v;
                let rotated = [r * 0.6, r * 0.8];
                if m == 2 {
                    assert_relative_eq!(k.eval(&rotated), v, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn far_field_limits() {
        let k3 = Kernel::new(Dimension::SPACE);
        assert!(k3.radial(1e8) < 0.0 && k3.radial(1e8) > -1e-7);
        let k2 = Kernel::new(Dimension::PLANE);
        assert!(k2.radial(1e8) > 18.0);
    }
}
