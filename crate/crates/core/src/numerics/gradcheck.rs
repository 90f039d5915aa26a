use super::ParameterSet;
use crate::error::{Error, Result};

/// Compares an analytic gradient with central differences.
///
/// `f` returns the objective and its analytic gradient at a point. Every
/// coordinate is perturbed by `±eps`; the result is
/// `max_i |fd_i − g_i| / max(1, |g_i|)`.
pub fn grad_check<F>(f: F, point: &ParameterSet, eps: f64) -> Result<f64>
where
    F: Fn(&ParameterSet) -> Result<(f64, ParameterSet)>,
{
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("finite-difference step must be positive, got {eps}")));
    }
    let (value, analytic) = f(point)?;
    if !value.is_finite() {
        return Err(Error::NonFinite("objective at the check point".into()));
    }
    point.check_same_shape(&analytic)?;
    let grads: Vec<f64> = analytic.values().copied().collect();
    let mut probe = point.clone();
    let mut worst = 0.0f64;
    for (i, g) in grads.iter().enumerate() {
        let orig = *probe.flat_mut(i);
        *probe.flat_mut(i) = orig + eps;
        let plus = f(&probe)?.0;
        *probe.flat_mut(i) = orig - eps;
        let minus = f(&probe)?.0;
        *probe.flat_mut(i) = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!("objective near coordinate {i}")));
        }
        let fd = (plus - minus) / (2.0 * eps);
        worst = worst.max((fd - g).abs() / g.abs().max(1.0));
    }
    Ok(worst)
}
