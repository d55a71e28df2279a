/// Value, gradient and Hessian of a scalar at a point.
///
/// The Hessian is stored dense and row-major. Every operation fills the upper
/// triangle and mirrors it, so `hess(i, j) == hess(j, i)` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(index: usize, value: f64, dim: usize) -> Self {
        let mut jet = Jet2::constant(value, dim);
        jet.grad[index] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite()) && self.hess.iter().all(|h| h.is_finite())
    }

    fn build(value: f64, dim: usize, grad: impl Fn(usize) -> f64, hess: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = Jet2::constant(value, dim);
        for i in 0..dim {
            out.grad[i] = grad(i);
            for j in i..dim {
                let h = hess(i, j);
                out.hess[i * dim + j] = h;
                out.hess[j * dim + i] = h;
            }
        }
        out
    }

    /// Compose with a scalar function given its value and first two
    /// derivatives at `self.value`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let n = self.dim();
        Jet2::build(
            f,
            n,
            |i| df * self.grad[i],
            |i, j| df * self.hess(i, j) + d2f * self.grad[i] * self.grad[j],
        )
    }

    pub fn add(&self, other: &Jet2) -> Self {
        let n = self.dim();
        Jet2::build(
            self.value + other.value,
            n,
            |i| self.grad[i] + other.grad[i],
            |i, j| self.hess(i, j) + other.hess(i, j),
        )
    }

    pub fn sub(&self, other: &Jet2) -> Self {
        let n = self.dim();
        Jet2::build(
            self.value - other.value,
            n,
            |i| self.grad[i] - other.grad[i],
            |i, j| self.hess(i, j) - other.hess(i, j),
        )
    }

    pub fn mul(&self, other: &Jet2) -> Self {
        let n = self.dim();
        let (u, w) = (self, other);
        Jet2::build(
            u.value * w.value,
            n,
            |i| u.grad[i] * w.value + u.value * w.grad[i],
            |i, j| u.hess(i, j) * w.value + u.value * w.hess(i, j) + (u.grad[i] * w.grad[j] + u.grad[j] * w.grad[i]),
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet2 {
            value: s * self.value,
            grad: self.grad.iter().map(|g| s * g).collect(),
            hess: self.hess.iter().map(|h| s * h).collect(),
        }
    }

    /// `1 / self`; the caller checks for a zero value.
    pub fn recip(&self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    /// `self ^ k` for an integer exponent; the caller checks for `0 ^ (k < 0)`.
    pub fn powi(&self, k: i32) -> Self {
        let u = self.value;
        let kf = k as f64;
        let d1 = if k == 0 { 0.0 } else { kf * u.powi(k - 1) };
        let d2 = if k == 0 || k == 1 {
            0.0
        } else {
            kf * (kf - 1.0) * u.powi(k - 2)
        };
        self.chain(u.powi(k), d1, d2)
    }

    /// `self ^ p` for a constant real exponent and a positive base.
    pub fn powf(&self, p: f64) -> Self {
        let u = self.value;
        self.chain(u.powf(p), p * u.powf(p - 1.0), p * (p - 1.0) * u.powf(p - 2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_coordinates() {
        let x = Jet2::variable(0, 2.0, 2);
        let y = Jet2::variable(1, 3.0, 2);
        let p = x.mul(&y);
        assert_eq!(p.value, 6.0);
        assert_eq!(p.grad, vec![3.0, 2.0]);
        assert_eq!(p.hess, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn reciprocal_second_derivative() {
        let x = Jet2::variable(0, 2.0, 1);
        let r = x.recip();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.grad[0], -0.25);
        assert_eq!(r.hess[0], 0.25);
    }

    #[test]
    fn integer_powers() {
        let x = Jet2::variable(0, 3.0, 1);
        let c = x.powi(3);
        assert_eq!((c.value, c.grad[0], c.hess[0]), (27.0, 27.0, 18.0));
        let one = x.powi(0);
        assert_eq!((one.value, one.grad[0], one.hess[0]), (1.0, 0.0, 0.0));
    }
}
