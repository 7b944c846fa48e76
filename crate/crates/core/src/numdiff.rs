//! Finite-difference calculus on scalar fields.
//!
//! Central stencils of order 2 or 4 per axis, with one optional Richardson
//! extrapolation step combining the `h` and `h/2` estimates. The bi-Laplacian
//! is the literal composition `lap_h(lap_h u)` of the discrete Laplacian with
//! itself, so a single tested kernel backs both operators.
//!
//! Step-size guidance: with the default `h = 1e-3` the second-order operators
//! (gradient, Laplacian) resolve smooth fields to ~1e-10. Operators that
//! difference a derived field (bi-Laplacian, gradient-of-Laplacian) amplify
//! evaluation noise by `h^-4` and want a wider step, around `1e-2`; the
//! [`crate::hp`] module evaluates the same stencils in double-double
//! arithmetic when tighter absolute accuracy is needed near singular fields.

use crate::fields::ScalarField;
use crate::{Error, Result};

/// Stencil configuration shared by every finite-difference operation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    /// Base step `h`.
    pub step: f64,
    /// Stencil order per axis: 2 or 4.
    pub order: usize,
    /// One Richardson extrapolation step combining `h` and `h/2`.
    pub richardson: bool,
    /// Keep-out distance from declared singular sets. Must be at least
    /// `4 * step` so the widest nested stencil never touches the set.
    pub singular_margin: f64,
}

impl FdConfig {
    /// Config with `singular_margin = 4 * step`.
    pub fn new(step: f64, order: usize, richardson: bool) -> Result<Self> {
        Self::with_margin(step, order, richardson, 4.0 * step)
    }

    pub fn with_margin(
        step: f64,
        order: usize,
        richardson: bool,
        singular_margin: f64,
    ) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step must be positive, got {step}"
            )));
        }
        if order != 2 && order != 4 {
            return Err(Error::InvalidConfig(format!(
                "stencil order must be 2 or 4, got {order}"
            )));
        }
        if singular_margin < 4.0 * step {
            return Err(Error::InvalidConfig(format!(
                "singular margin {singular_margin} is below 4 * step = {}",
                4.0 * step
            )));
        }
        Ok(Self {
            step,
            order,
            richardson,
            singular_margin,
        })
    }

    /// A step suited to operators built on fourth differences, where the
    /// default step sits below the double-precision noise floor.
    pub fn wide(step: f64) -> Self {
        Self::new(step, 2, true).expect("positive step")
    }
}

impl Default for FdConfig {
    fn default() -> Self {
        Self::new(1e-3, 2, true).expect("default config is valid")
    }
}

/// Closed-form radial Laplacian: `lap(|x|^alpha) = alpha (alpha - 2 + m) |x|^(alpha-2)`
/// on R^m. Requires `r > 0`.
pub fn radial_laplacian(alpha: f64, m: usize, r: f64) -> f64 {
    alpha * (alpha - 2.0 + m as f64) * r.powf(alpha - 2.0)
}

/// Central-difference gradient of `field` at `x`.
pub fn gradient(field: &ScalarField, x: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    check_dim(field, x)?;
    let mut out = Vec::with_capacity(x.len());
    for axis in 0..x.len() {
        out.push(extrapolate(cfg, |h| {
            d1_axis(&checked(field, cfg), x, axis, h, cfg.order)
        })?);
    }
    Ok(out)
}

/// Discrete Laplacian: per-axis second differences, summed.
pub fn laplacian(field: &ScalarField, x: &[f64], cfg: &FdConfig) -> Result<f64> {
    check_dim(field, x)?;
    extrapolate(cfg, |h| lap_plain(&checked(field, cfg), x, h, cfg.order))
}

/// Discrete bi-Laplacian `lap_h(lap_h u)` via nested stencils.
pub fn bilaplacian(field: &ScalarField, x: &[f64], cfg: &FdConfig) -> Result<f64> {
    check_dim(field, x)?;
    let eval = checked(field, cfg);
    extrapolate(cfg, |h| {
        lap_plain(
            &|y: &[f64]| lap_plain(&eval, y, h, cfg.order),
            x,
            h,
            cfg.order,
        )
    })
}

/// Gradient of the derived field `y -> lap_h u(y)`; the third-order piece of
/// the f-bitension.
pub fn gradient_of_laplacian(field: &ScalarField, x: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    check_dim(field, x)?;
    let eval = checked(field, cfg);
    let mut out = Vec::with_capacity(x.len());
    for axis in 0..x.len() {
        out.push(extrapolate(cfg, |h| {
            d1_axis(
                &|y: &[f64]| lap_plain(&eval, y, h, cfg.order),
                x,
                axis,
                h,
                cfg.order,
            )
        })?);
    }
    Ok(out)
}

fn check_dim(field: &ScalarField, x: &[f64]) -> Result<()> {
    if field.dim() != x.len() {
        return Err(Error::InvalidInput(format!(
            "point dimension {} does not match field dimension {}",
            x.len(),
            field.dim()
        )));
    }
    Ok(())
}

fn checked<'a>(field: &'a ScalarField, cfg: &'a FdConfig) -> impl Fn(&[f64]) -> Result<f64> + 'a {
    move |y: &[f64]| field.eval_checked(y, cfg.singular_margin)
}

fn extrapolate<F>(cfg: &FdConfig, op: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = op(cfg.step)?;
    if cfg.richardson {
        let fine = op(cfg.step / 2.0)?;
        let weight = if cfg.order == 2 { 4.0 } else { 16.0 };
        Ok((weight * fine - coarse) / (weight - 1.0))
    } else {
        Ok(coarse)
    }
}

fn shifted<E>(eval: &E, x: &[f64], axis: usize, delta: f64) -> Result<f64>
where
    E: Fn(&[f64]) -> Result<f64>,
{
    let mut y = x.to_vec();
    y[axis] += delta;
    eval(&y)
}

fn d1_axis<E>(eval: &E, x: &[f64], axis: usize, h: f64, order: usize) -> Result<f64>
where
    E: Fn(&[f64]) -> Result<f64>,
{
    if order == 2 {
        let p = shifted(eval, x, axis, h)?;
        let m = shifted(eval, x, axis, -h)?;
        Ok((p - m) / (2.0 * h))
    } else {
        let p2 = shifted(eval, x, axis, 2.0 * h)?;
        let p1 = shifted(eval, x, axis, h)?;
        let m1 = shifted(eval, x, axis, -h)?;
        let m2 = shifted(eval, x, axis, -2.0 * h)?;
        Ok((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h))
    }
}

fn d2_axis<E>(eval: &E, x: &[f64], axis: usize, h: f64, order: usize, center: f64) -> Result<f64>
where
    E: Fn(&[f64]) -> Result<f64>,
{
    if order == 2 {
        let p = shifted(eval, x, axis, h)?;
        let m = shifted(eval, x, axis, -h)?;
        Ok((p - 2.0 * center + m) / (h * h))
    } else {
        let p2 = shifted(eval, x, axis, 2.0 * h)?;
        let p1 = shifted(eval, x, axis, h)?;
        let m1 = shifted(eval, x, axis, -h)?;
        let m2 = shifted(eval, x, axis, -2.0 * h)?;
        Ok((-p2 + 16.0 * p1 - 30.0 * center + 16.0 * m1 - m2) / (12.0 * h * h))
    }
}

fn lap_plain<E>(eval: &E, x: &[f64], h: f64, order: usize) -> Result<f64>
where
    E: Fn(&[f64]) -> Result<f64>,
{
    let center = eval(x)?;
    let mut sum = 0.0;
    for axis in 0..x.len() {
        sum += d2_axis(eval, x, axis, h, order, center)?;
    }
    Ok(sum)
}

/// One-dimensional stencils on plain closures, generic over the value type so
/// curve modules can difference R^3-valued paths directly. No admissibility
/// checks are performed here; callers guard the domain.
pub mod one_dim {
    use super::FdConfig;
    use std::ops::{Add, Mul, Sub};

    pub trait Linear:
        Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
    {
    }
    impl<T> Linear for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

    fn extrapolate<T: Linear>(cfg: &FdConfig, op: impl Fn(f64) -> T) -> T {
        let coarse = op(cfg.step);
        if cfg.richardson {
            let fine = op(cfg.step / 2.0);
            let w = if cfg.order == 2 { 4.0 } else { 16.0 };
            (fine * w - coarse) * (1.0 / (w - 1.0))
        } else {
            coarse
        }
    }

    fn d1_plain<T: Linear>(f: &impl Fn(f64) -> T, s: f64, h: f64, order: usize) -> T {
        if order == 2 {
            (f(s + h) - f(s - h)) * (1.0 / (2.0 * h))
        } else {
            (f(s + h) * 8.0 - f(s - h) * 8.0 - f(s + 2.0 * h) + f(s - 2.0 * h)) * (1.0 / (12.0 * h))
        }
    }

    fn d2_plain<T: Linear>(f: &impl Fn(f64) -> T, s: f64, h: f64, order: usize) -> T {
        if order == 2 {
            (f(s + h) - f(s) * 2.0 + f(s - h)) * (1.0 / (h * h))
        } else {
            (f(s + h) * 16.0 + f(s - h) * 16.0 - f(s) * 30.0 - f(s + 2.0 * h) - f(s - 2.0 * h))
                * (1.0 / (12.0 * h * h))
        }
    }

    /// Expanded composition `d1(d2 f)`; five-point third difference at order 2.
    fn d3_plain<T: Linear>(f: &impl Fn(f64) -> T, s: f64, h: f64, order: usize) -> T {
        if order == 2 {
            (f(s + 2.0 * h) - f(s + h) * 2.0 + f(s - h) * 2.0 - f(s - 2.0 * h))
                * (1.0 / (2.0 * h * h * h))
        } else {
            d1_plain(&|t| d2_plain(f, t, h, order), s, h, order)
        }
    }

    /// Expanded composition `d2(d2 f)`; five-point fourth difference at order 2.
    fn d4_plain<T: Linear>(f: &impl Fn(f64) -> T, s: f64, h: f64, order: usize) -> T {
        if order == 2 {
            (f(s + 2.0 * h) - f(s + h) * 4.0 + f(s) * 6.0 - f(s - h) * 4.0 + f(s - 2.0 * h))
                * (1.0 / (h * h * h * h))
        } else {
            d2_plain(&|t| d2_plain(f, t, h, order), s, h, order)
        }
    }

    pub fn d1<T: Linear>(f: impl Fn(f64) -> T, s: f64, cfg: &FdConfig) -> T {
        extrapolate(cfg, |h| d1_plain(&f, s, h, cfg.order))
    }

    pub fn d2<T: Linear>(f: impl Fn(f64) -> T, s: f64, cfg: &FdConfig) -> T {
        extrapolate(cfg, |h| d2_plain(&f, s, h, cfg.order))
    }

    pub fn d3<T: Linear>(f: impl Fn(f64) -> T, s: f64, cfg: &FdConfig) -> T {
        extrapolate(cfg, |h| d3_plain(&f, s, h, cfg.order))
    }

    pub fn d4<T: Linear>(f: impl Fn(f64) -> T, s: f64, cfg: &FdConfig) -> T {
        extrapolate(cfg, |h| d4_plain(&f, s, h, cfg.order))
    }

    /// All four derivative estimates sharing one stencil family, together
    /// with the factored form `d2(f * d2 gamma)`; see
    /// [`crate::curves::euclidean_curve_residual`].
    pub(crate) fn d2_of_product<T: Linear>(
        gamma: &impl Fn(f64) -> T,
        weight: &impl Fn(f64) -> f64,
        s: f64,
        cfg: &FdConfig,
    ) -> T {
        extrapolate(cfg, |h| {
            let w = |t: f64| d2_plain(gamma, t, h, cfg.order) * weight(t);
            d2_plain(&w, s, h, cfg.order)
        })
    }
}
