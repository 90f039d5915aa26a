use crate::error::{Error, Result};

/// Huber loss: quadratic inside `[-delta, delta]`, linear outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Huber {
    delta: f64,
}

impl Huber {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Parameter(format!("Huber delta must be positive, got {delta}")));
        }
        Ok(Huber { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn loss(&self, u: f64) -> f64 {
        let a = u.abs();
        if a <= self.delta {
            0.5 * u * u
        } else {
            self.delta * (a - 0.5 * self.delta)
        }
    }

    /// d loss / d u, clamped to `[-delta, delta]`.
    #[inline]
    pub fn grad(&self, u: f64) -> f64 {
        u.clamp(-self.delta, self.delta)
    }
}

impl Default for Huber {
    fn default() -> Self {
        Huber { delta: 1.0 }
    }
}

/// Free-function form returning `(loss, derivative)`.
pub fn huber_loss(residual: f64, delta: f64) -> Result<(f64, f64)> {
    let h = Huber::new(delta)?;
    Ok((h.loss(residual), h.grad(residual)))
}
