use crate::{Channel, Result, SignalError, TimeSeries};

/// Cumulative trapezoidal double integration of an acceleration record.
///
/// Returns a two-channel series (displacement, velocity):
/// `v[k+1] = v[k] + dt*(a[k] + a[k+1])/2`, `x[k+1] = x[k] + dt*(v[k] + v[k+1])/2`,
/// starting from `(x0, v0)`. Exact whenever the acceleration is linear in t.
pub fn double_integrate(accel: &TimeSeries, x0: f64, v0: f64) -> Result<TimeSeries> {
    let a = accel.require_single()?;
    if a.len() < 2 {
        return Err(SignalError::TooShort {
            len: a.len(),
            need: 2,
        });
    }
    crate::noise::ensure_finite(a, &accel.channels()[0].name)?;
    let dt = accel.dt();
    let mut v = Vec::with_capacity(a.len());
    let mut x = Vec::with_capacity(a.len());
    v.push(v0);
    x.push(x0);
    for k in 1..a.len() {
        let vk = v[k - 1] + dt * (a[k - 1] + a[k]) / 2.0;
        let xk = x[k - 1] + dt * (v[k - 1] + vk) / 2.0;
        v.push(vk);
        x.push(xk);
    }
    TimeSeries::new(
        accel.dt(),
        accel.t0(),
        vec![Channel::new("x", "m"), Channel::new("v", "m/s")],
        vec![x, v],
    )
}
