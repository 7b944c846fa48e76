//! Finite-difference stencils evaluated in double-double arithmetic.
//!
//! Same stencil geometry as [`crate::numdiff`], same configuration type, but
//! fields are evaluated as [`Dd`] so the `h^-4` rounding amplification of
//! nested fourth differences lands at ~1e-28 instead of ~1e-12. Used where
//! residual gates sit below the `f64` noise floor: the inversion-family
//! sweeps and the singular scalar examples.

use std::sync::Arc;

use crate::dd::Dd;
use crate::numdiff::FdConfig;
use crate::{Error, Result};

type DdEvalFn = dyn Fn(&[Dd]) -> Dd + Send + Sync;
type SingularFn = dyn Fn(&[f64], f64) -> bool + Send + Sync;

/// Scalar field evaluated in double-double arithmetic.
#[derive(Clone)]
pub struct DdScalarField {
    dim: usize,
    eval: Arc<DdEvalFn>,
    singular: Arc<SingularFn>,
}

impl DdScalarField {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[Dd]) -> Dd + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
            singular: Arc::new(|_, _| false),
        }
    }

    pub fn with_singular_origin(mut self) -> Self {
        self.singular =
            Arc::new(|x: &[f64], margin: f64| x.iter().map(|v| v * v).sum::<f64>().sqrt() < margin);
        self
    }

    /// `x -> |x|^alpha` with the origin declared singular.
    pub fn radial_power(dim: usize, alpha: f64) -> Self {
        Self::new(dim, move |x: &[Dd]| radius(x).powf(alpha)).with_singular_origin()
    }

    /// `x -> x_i |x|^alpha` with the origin declared singular.
    pub fn coordinate_radial_power(dim: usize, i: usize, alpha: f64) -> Self {
        assert!(i < dim);
        Self::new(dim, move |x: &[Dd]| x[i] * radius(x).powf(alpha)).with_singular_origin()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn eval_checked(&self, x: &[Dd], margin: f64) -> Result<Dd> {
        let approx: Vec<f64> = x.iter().map(|v| v.to_f64()).collect();
        if (self.singular)(&approx, margin) {
            return Err(Error::SingularEvaluation {
                point: approx,
                margin,
            });
        }
        let value = (self.eval)(x);
        if !value.hi.is_finite() {
            return Err(Error::NonFinite { point: approx });
        }
        Ok(value)
    }
}

fn radius(x: &[Dd]) -> Dd {
    let mut sum = Dd::ZERO;
    for v in x {
        sum = sum + v.sqr();
    }
    sum.sqrt()
}

fn lift(x: &[f64]) -> Vec<Dd> {
    x.iter().map(|&v| Dd::from_f64(v)).collect()
}

fn shifted(field: &DdScalarField, x: &[Dd], axis: usize, delta: f64, margin: f64) -> Result<Dd> {
    let mut y = x.to_vec();
    y[axis] = y[axis] + Dd::from_f64(delta);
    field.eval_checked(&y, margin)
}

fn d1_axis(field: &DdScalarField, x: &[Dd], axis: usize, h: f64, cfg: &FdConfig) -> Result<Dd> {
    let margin = cfg.singular_margin;
    if cfg.order == 2 {
        let p = shifted(field, x, axis, h, margin)?;
        let m = shifted(field, x, axis, -h, margin)?;
        Ok((p - m) / Dd::from_f64(2.0 * h))
    } else {
        let p2 = shifted(field, x, axis, 2.0 * h, margin)?;
        let p1 = shifted(field, x, axis, h, margin)?;
        let m1 = shifted(field, x, axis, -h, margin)?;
        let m2 = shifted(field, x, axis, -2.0 * h, margin)?;
        Ok((-p2 + p1 * 8.0 - m1 * 8.0 + m2) / Dd::from_f64(12.0 * h))
    }
}

/// Per-axis second differences of an arbitrary `Result`-valued evaluation,
/// summed; backs both the direct Laplacian and the nested derived fields.
fn lap_of<E>(eval: &E, x: &[Dd], h: f64, order: usize) -> Result<Dd>
where
    E: Fn(&[Dd]) -> Result<Dd>,
{
    let at = |axis: usize, delta: f64| -> Result<Dd> {
        let mut y = x.to_vec();
        y[axis] = y[axis] + Dd::from_f64(delta);
        eval(&y)
    };
    let center = eval(x)?;
    let h2 = Dd::from_f64(h * h);
    let mut sum = Dd::ZERO;
    for axis in 0..x.len() {
        if order == 2 {
            let p = at(axis, h)?;
            let m = at(axis, -h)?;
            sum = sum + (p - center * 2.0 + m) / h2;
        } else {
            let p2 = at(axis, 2.0 * h)?;
            let p1 = at(axis, h)?;
            let m1 = at(axis, -h)?;
            let m2 = at(axis, -2.0 * h)?;
            sum = sum
                + (-p2 + p1 * 16.0 - center * 30.0 + m1 * 16.0 - m2) / (h2 * Dd::from_f64(12.0));
        }
    }
    Ok(sum)
}

fn d1_of<E>(eval: &E, x: &[Dd], axis: usize, h: f64, order: usize) -> Result<Dd>
where
    E: Fn(&[Dd]) -> Result<Dd>,
{
    let at = |delta: f64| -> Result<Dd> {
        let mut y = x.to_vec();
        y[axis] = y[axis] + Dd::from_f64(delta);
        eval(&y)
    };
    if order == 2 {
        Ok((at(h)? - at(-h)?) / Dd::from_f64(2.0 * h))
    } else {
        Ok((-at(2.0 * h)? + at(h)? * 8.0 - at(-h)? * 8.0 + at(-2.0 * h)?) / Dd::from_f64(12.0 * h))
    }
}

fn lap_plain(field: &DdScalarField, x: &[Dd], h: f64, cfg: &FdConfig) -> Result<Dd> {
    let margin = cfg.singular_margin;
    lap_of(&|y: &[Dd]| field.eval_checked(y, margin), x, h, cfg.order)
}

fn extrapolate(cfg: &FdConfig, op: impl Fn(f64) -> Result<Dd>) -> Result<Dd> {
    let coarse = op(cfg.step)?;
    if cfg.richardson {
        let fine = op(cfg.step / 2.0)?;
        let w = if cfg.order == 2 { 4.0 } else { 16.0 };
        Ok((fine * w - coarse) / Dd::from_f64(w - 1.0))
    } else {
        Ok(coarse)
    }
}

/// Discrete Laplacian, returned at double-double precision.
pub fn laplacian_value(field: &DdScalarField, x: &[f64], cfg: &FdConfig) -> Result<Dd> {
    let x = lift(x);
    extrapolate(cfg, |h| lap_plain(field, &x, h, cfg))
}

/// Nested bi-Laplacian `lap_h(lap_h u)`; both levels share the stencil order
/// and the pair extrapolates jointly.
pub fn bilaplacian_value(field: &DdScalarField, x: &[f64], cfg: &FdConfig) -> Result<Dd> {
    let x = lift(x);
    extrapolate(cfg, |h| {
        lap_of(&|y: &[Dd]| lap_plain(field, y, h, cfg), &x, h, cfg.order)
    })
}

/// Gradient components at double-double precision.
pub fn gradient_value(field: &DdScalarField, x: &[f64], cfg: &FdConfig) -> Result<Vec<Dd>> {
    let x = lift(x);
    (0..x.len())
        .map(|axis| extrapolate(cfg, |h| d1_axis(field, &x, axis, h, cfg)))
        .collect()
}

/// Gradient of the derived field `y -> lap_h u(y)`.
pub fn gradient_of_laplacian_value(
    field: &DdScalarField,
    x: &[f64],
    cfg: &FdConfig,
) -> Result<Vec<Dd>> {
    let x = lift(x);
    (0..x.len())
        .map(|axis| {
            extrapolate(cfg, |h| {
                d1_of(
                    &|y: &[Dd]| lap_plain(field, y, h, cfg),
                    &x,
                    axis,
                    h,
                    cfg.order,
                )
            })
        })
        .collect()
}

/// `lap_h(f * lap_h u)` with the inner product field formed at full precision.
pub fn nested_weighted_laplacian_value(
    u: &DdScalarField,
    f: &DdScalarField,
    x: &[f64],
    cfg: &FdConfig,
) -> Result<Dd> {
    let x = lift(x);
    extrapolate(cfg, |h| {
        let margin = cfg.singular_margin;
        let w =
            |y: &[Dd]| -> Result<Dd> { Ok(f.eval_checked(y, margin)? * lap_plain(u, y, h, cfg)?) };
        lap_of(&w, &x, h, cfg.order)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::radial_laplacian;

    #[test]
    fn laplacian_matches_radial_formula_tightly() {
        let cfg = FdConfig::new(1e-4, 2, true).unwrap();
        let field = DdScalarField::radial_power(3, -1.0);
        let x = [0.8, -0.3, 0.55];
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let got = laplacian_value(&field, &x, &cfg).unwrap().to_f64();
        let exact = radial_laplacian(-1.0, 3, r);
        assert!((got - exact).abs() < 1e-10, "got {got}, exact {exact}");
    }

    #[test]
    fn bilaplacian_of_fourth_power_is_sharp() {
        let cfg = FdConfig::new(1e-3, 2, true).unwrap();
        let field = DdScalarField::radial_power(3, 4.0);
        let got = bilaplacian_value(&field, &[1.0, 0.0, 0.0], &cfg)
            .unwrap()
            .to_f64();
        assert!((got - 120.0).abs() < 1e-8, "got {got}");
    }

    #[test]
    fn biharmonic_kelvin_component_vanishes() {
        // x^1 |x|^-1 is biharmonic on R^3 (p = m - 2).
        let cfg = FdConfig::new(1e-3, 2, true).unwrap();
        let field = DdScalarField::coordinate_radial_power(3, 0, -1.0);
        let got = bilaplacian_value(&field, &[1.0, 0.0, 0.0], &cfg)
            .unwrap()
            .to_f64();
        assert!(got.abs() < 1e-9, "got {got}");
    }

    #[test]
    fn margin_still_guards_the_origin() {
        let cfg = FdConfig::default();
        let field = DdScalarField::radial_power(3, -2.0);
        assert!(laplacian_value(&field, &[1e-4, 0.0, 0.0], &cfg).is_err());
    }
}
