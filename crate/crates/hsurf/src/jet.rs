//! Second-order forward-mode jets in two variables.
//!
//! A [`Jet2`] carries a value together with its exact gradient and Hessian
//! with respect to the planar coordinates `(x, y)`. Arithmetic on jets
//! propagates derivatives exactly (up to rounding), which gives Laplacians
//! of explicit fields without finite-difference truncation error.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, first and second partial derivatives of a scalar function of `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet2 {
    /// A constant (all derivatives zero).
    pub fn constant(v: f64) -> Self {
        Self { v, ..Default::default() }
    }

    /// The coordinate function `x` evaluated at `x`.
    pub fn var_x(x: f64) -> Self {
        Self { v: x, dx: 1.0, ..Default::default() }
    }

    /// The coordinate function `y` evaluated at `y`.
    pub fn var_y(y: f64) -> Self {
        Self { v: y, dy: 1.0, ..Default::default() }
    }

    /// Laplacian `∂²/∂x² + ∂²/∂y²`.
    pub fn laplacian(&self) -> f64 {
        self.dxx + self.dyy
    }

    /// Multiplicative inverse.
    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        let r2 = r * r;
        let r3 = r2 * r;
        Self {
            v: r,
            dx: -self.dx * r2,
            dy: -self.dy * r2,
            dxx: 2.0 * self.dx * self.dx * r3 - self.dxx * r2,
            dxy: 2.0 * self.dx * self.dy * r3 - self.dxy * r2,
            dyy: 2.0 * self.dy * self.dy * r3 - self.dyy * r2,
        }
    }

    /// Scales value and derivatives by a constant.
    pub fn scale(self, c: f64) -> Self {
        Self {
            v: self.v * c,
            dx: self.dx * c,
            dy: self.dy * c,
            dxx: self.dxx * c,
            dxy: self.dxy * c,
            dyy: self.dyy * c,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        Jet2 { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, c: f64) -> Jet2 {
        Jet2 { v: self.v - c, ..self }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

/// A three-component vector of jets.
pub type JetVec3 = [Jet2; 3];

/// Cross product of the first-derivative vectors `u_x × u_y` of a jet vector.
pub fn first_derivatives(u: &JetVec3) -> ([f64; 3], [f64; 3]) {
    ([u[0].dx, u[1].dx, u[2].dx], [u[0].dy, u[1].dy, u[2].dy])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Jet2::var_x(0.3);
        let y = Jet2::var_y(-0.7);
        // f = x^2 y / (1 + x^2 + y^2)
        let s = x * x + y * y + 1.0;
        let f = x * x * y / s;
        let h = 1e-5;
        let g = |a: f64, b: f64| a * a * b / (1.0 + a * a + b * b);
        let fd_dx = (g(0.3 + h, -0.7) - g(0.3 - h, -0.7)) / (2.0 * h);
        let fd_lap = (g(0.3 + h, -0.7) + g(0.3 - h, -0.7) + g(0.3, -0.7 + h) + g(0.3, -0.7 - h)
            - 4.0 * g(0.3, -0.7))
            / (h * h);
        assert!((f.v - g(0.3, -0.7)).abs() < 1e-15);
        assert!((f.dx - fd_dx).abs() < 1e-9);
        assert!((f.laplacian() - fd_lap).abs() < 1e-4);
    }
}
