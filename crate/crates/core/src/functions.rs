//! f-biharmonic functions: the product criterion `lap(f * lap u) = 0`, the
//! one-dimensional quadrature solver with its closed forms, and a discrete
//! compactness analogue on periodic grids.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::fields::ScalarField;
use crate::hp::{self, DdScalarField};
use crate::numdiff::{one_dim, FdConfig};
use crate::spline::CubicSpline;
use crate::{Error, Result};

/// Residual `|lap_h(f * lap_h u)(x)|`: zero exactly when `u` is f-biharmonic
/// near `x`. The inner product field is formed as a derived field at the same
/// step as the outer Laplacian, and Richardson extrapolation (when enabled)
/// is applied to the nested pair jointly.
pub fn f_biharmonic_residual(
    u: &ScalarField,
    f: &ScalarField,
    x: &[f64],
    cfg: &FdConfig,
) -> Result<f64> {
    let f_center = f.eval_checked(x, cfg.singular_margin)?;
    if f_center <= 0.0 {
        return Err(Error::NonPositiveWeight {
            point: x.to_vec(),
            value: f_center,
        });
    }
    let level = |h: f64| -> Result<f64> {
        let field = product_laplacian_field(u, f, h, cfg.order);
        let mut level_cfg = *cfg;
        level_cfg.step = h;
        level_cfg.richardson = false;
        crate::numdiff::laplacian(&field, x, &level_cfg)
    };
    let value = if cfg.richardson {
        (4.0 * level(cfg.step / 2.0)? - level(cfg.step)?) / 3.0
    } else {
        level(cfg.step)?
    };
    Ok(value.abs())
}

/// Same residual with every stencil evaluated in double-double arithmetic.
pub fn f_biharmonic_residual_hp(
    u: &DdScalarField,
    f: &DdScalarField,
    x: &[f64],
    cfg: &FdConfig,
) -> Result<f64> {
    Ok(hp::nested_weighted_laplacian_value(u, f, x, cfg)?
        .to_f64()
        .abs())
}

/// The product field `w(y) = f(y) * lap_h u(y)` at a fixed step,
/// materialized as a first-class scalar field. Positivity of `f` is enforced
/// wherever `w` is evaluated.
pub fn product_laplacian_field(
    u: &ScalarField,
    f: &ScalarField,
    step: f64,
    order: usize,
) -> ScalarField {
    let u = u.clone();
    let f = f.clone();
    let inner = FdConfig::new(step, order, false).expect("caller provides a valid step");
    let singular = u.singular_predicate();
    let f_singular = f.singular_predicate();
    ScalarField::new(u.dim(), move |y: &[f64]| {
        let fv = f.eval_unchecked(y);
        if fv <= 0.0 {
            return f64::NAN; // surfaced as NonFinite by the outer checks
        }
        match crate::numdiff::laplacian(&u, y, &inner) {
            Ok(l) => fv * l,
            Err(_) => f64::NAN,
        }
    })
    .with_singular_set(move |y, margin| singular(y, margin) || f_singular(y, margin))
}

/// Closed forms classified for the two printed weight families on R.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedFormWeight {
    /// `f(x) = 1 + x^2`
    Rational,
    /// `f(x) = e^{-x}`
    Exponential,
}

impl ClosedFormWeight {
    pub fn weight(&self) -> ScalarField {
        match self {
            ClosedFormWeight::Rational => {
                ScalarField::new(1, |x: &[f64]| 1.0 + x[0] * x[0]).require_positive()
            }
            ClosedFormWeight::Exponential => {
                ScalarField::new(1, |x: &[f64]| (-x[0]).exp()).require_positive()
            }
        }
    }
}

/// Evaluates the printed closed-form solution for the given weight family:
///
/// - rational: `u = (Ax - B) ln(1 + x^2) / 2 + (Bx + A) atan x + (C - A) x + D`
/// - exponential: `u = (Ax - 2A + B) e^x + Cx + D`
pub fn closed_form_1d(which: ClosedFormWeight, a: f64, b: f64, c: f64, d: f64, x: f64) -> f64 {
    match which {
        ClosedFormWeight::Rational => {
            0.5 * (a * x - b) * (1.0 + x * x).ln() + (b * x + a) * x.atan() + (c - a) * x + d
        }
        ClosedFormWeight::Exponential => (a * x - 2.0 * a + b) * x.exp() + c * x + d,
    }
}

/// Output of [`solve_1d`]: the solution `u` as a sampled-and-interpolated
/// field together with the weight and the data that produced it.
#[derive(Clone)]
pub struct OneDimSolution {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub interval: (f64, f64),
    pub quadrature_step: f64,
    f: ScalarField,
    u: ScalarField,
    spline: Arc<CubicSpline>,
}

impl OneDimSolution {
    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn weight(&self) -> &ScalarField {
        &self.f
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.spline.eval(x)
    }
}

/// Solves `(f u'')'' = 0` on the interval by double quadrature of
/// `(Ax + B) / f` plus the affine part `Cx + D`.
///
/// Integration constants are fixed by zero value and zero slope of the double
/// integral at the left endpoint; the constants `C`, `D` absorb any other
/// normalization. Composite Simpson quadrature runs on the given step (which
/// must divide the interval length), and the samples are interpolated by a
/// clamped cubic spline whose end slopes come from the first integral.
pub fn solve_1d(
    f: &ScalarField,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    interval: (f64, f64),
    quadrature_step: f64,
) -> Result<OneDimSolution> {
    let (x0, x1) = interval;
    if !(x1 > x0) || !quadrature_step.is_finite() || quadrature_step <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "bad interval [{x0}, {x1}] or quadrature step {quadrature_step}"
        )));
    }
    let len = x1 - x0;
    let n_real = len / quadrature_step;
    let n = n_real.round() as usize;
    if n == 0 || (n_real - n as f64).abs() > 1e-9 * n_real.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "quadrature step {quadrature_step} does not divide the interval length {len}"
        )));
    }

    // integrand sampled on the quarter lattice (Simpson needs midpoints of
    // both the full cells and their halves)
    let q = len / n as f64;
    let integrand = |x: f64| -> Result<f64> {
        let fv = f.eval_checked(&[x], 0.0)?;
        if fv <= 0.0 {
            return Err(Error::NonPositiveWeight {
                point: vec![x],
                value: fv,
            });
        }
        Ok((a * x + b) / fv)
    };
    let g: Vec<f64> = (0..=4 * n)
        .map(|j| integrand(x0 + q * j as f64 / 4.0))
        .collect::<Result<_>>()?;

    // first cumulative integral on the half lattice
    let mut i1 = vec![0.0; 2 * n + 1];
    for j in 0..2 * n {
        let half = q / 2.0;
        i1[j + 1] = i1[j] + half / 6.0 * (g[2 * j] + 4.0 * g[2 * j + 1] + g[2 * j + 2]);
    }
    // second cumulative integral on the full lattice
    let mut u = vec![0.0; n + 1];
    let mut i2 = 0.0;
    for j in 0..n {
        i2 += q / 6.0 * (i1[2 * j] + 4.0 * i1[2 * j + 1] + i1[2 * j + 2]);
        u[j + 1] = i2;
    }
    for (j, value) in u.iter_mut().enumerate() {
        *value += c * (x0 + q * j as f64) + d;
    }

    let d_start = i1[0] + c;
    let d_end = i1[2 * n] + c;
    let spline = Arc::new(CubicSpline::clamped(x0, q, u, d_start, d_end));
    let eval_spline = Arc::clone(&spline);
    let u_field = ScalarField::new(1, move |x: &[f64]| eval_spline.eval(x[0]));

    Ok(OneDimSolution {
        a,
        b,
        c,
        d,
        interval,
        quadrature_step: q,
        f: f.clone(),
        u: u_field,
        spline,
    })
}

/// One-dimensional residual `|(f u'')''|(x)`, nested like the m-dimensional
/// criterion. Errors if `f` is not positive across the stencil.
pub fn one_dim_residual(u: &ScalarField, f: &ScalarField, x: f64, cfg: &FdConfig) -> Result<f64> {
    for offset in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let xi = x + offset * cfg.step;
        let fv = f.eval_checked(&[xi], 0.0)?;
        if fv <= 0.0 {
            return Err(Error::NonPositiveWeight {
                point: vec![xi],
                value: fv,
            });
        }
    }
    let uc = u.clone();
    let fc = f.clone();
    let value = one_dim::d2_of_product(
        &move |s: f64| uc.eval_unchecked(&[s]),
        &move |s: f64| fc.eval_unchecked(&[s]),
        x,
        cfg,
    );
    if !value.is_finite() {
        return Err(Error::NonFinite { point: vec![x] });
    }
    Ok(value.abs())
}

/// Dense discrete operator `u -> lap_h(f * lap_h u)` on a periodic grid over
/// the unit torus (spacing `1/n` per axis). Dimension 1 or 2.
#[derive(Clone, Debug)]
pub struct TorusOperator {
    grid_sizes: Vec<usize>,
    f_samples: Vec<f64>,
    matrix: DMatrix<f64>,
}

/// Dense-solve cap on the total grid size.
pub const TORUS_MAX_POINTS: usize = 4096;

impl TorusOperator {
    /// Assembles `L * diag(f) * L` with `L` the periodic Laplacian matrix.
    /// All weight samples must be positive and the total size at most
    /// [`TORUS_MAX_POINTS`].
    pub fn new(grid_sizes: &[usize], f_samples: Vec<f64>) -> Result<Self> {
        if grid_sizes.is_empty() || grid_sizes.len() > 2 {
            return Err(Error::InvalidInput(
                "torus operator supports dimension 1 or 2".into(),
            ));
        }
        let total: usize = grid_sizes.iter().product();
        if total > TORUS_MAX_POINTS {
            return Err(Error::GridTooLarge {
                size: total,
                max: TORUS_MAX_POINTS,
            });
        }
        if f_samples.len() != total {
            return Err(Error::InvalidInput(format!(
                "expected {total} weight samples, got {}",
                f_samples.len()
            )));
        }
        if let Some((idx, &bad)) = f_samples
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > 0.0) || !v.is_finite())
        {
            return Err(Error::NonPositiveWeight {
                point: vec![idx as f64],
                value: bad,
            });
        }
        let lap = periodic_laplacian(grid_sizes);
        let mut weighted = lap.clone();
        for (j, &fv) in f_samples.iter().enumerate() {
            // scale column j of L by f_j, giving L * diag(f)
            for i in 0..total {
                weighted[(i, j)] *= fv;
            }
        }
        let matrix = &weighted * &lap;
        Ok(Self {
            grid_sizes: grid_sizes.to_vec(),
            f_samples,
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        self.grid_sizes.len()
    }

    pub fn grid_sizes(&self) -> &[usize] {
        &self.grid_sizes
    }

    pub fn f_samples(&self) -> &[f64] {
        &self.f_samples
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Periodic discrete Laplacian on the unit torus: second differences with
/// wrap-around, spacing `1/n` along each axis. Row-major indexing in 2-D.
pub fn periodic_laplacian(grid_sizes: &[usize]) -> DMatrix<f64> {
    let total: usize = grid_sizes.iter().product();
    let mut out = DMatrix::zeros(total, total);
    match grid_sizes {
        [n] => {
            let scale = (*n as f64) * (*n as f64);
            for i in 0..*n {
                out[(i, i)] -= 2.0 * scale;
                out[(i, (i + 1) % n)] += scale;
                out[(i, (i + n - 1) % n)] += scale;
            }
        }
        [n1, n2] => {
            let s1 = (*n1 as f64) * (*n1 as f64);
            let s2 = (*n2 as f64) * (*n2 as f64);
            let idx = |i: usize, j: usize| i * n2 + j;
            for i in 0..*n1 {
                for j in 0..*n2 {
                    let row = idx(i, j);
                    out[(row, row)] -= 2.0 * (s1 + s2);
                    out[(row, idx((i + 1) % n1, j))] += s1;
                    out[(row, idx((i + n1 - 1) % n1, j))] += s1;
                    out[(row, idx(i, (j + 1) % n2))] += s2;
                    out[(row, idx(i, (j + n2 - 1) % n2))] += s2;
                }
            }
        }
        _ => panic!("periodic_laplacian supports dimension 1 or 2"),
    }
    out
}

/// Number of singular values of the operator matrix below `tol` times the
/// largest one. The constant vector is always in the kernel; for positive
/// weights the kernel is exactly the constants.
pub fn torus_kernel_dimension(op: &TorusOperator, tol: f64) -> usize {
    let sv = op.matrix.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    sv.iter().filter(|&&s| s < tol * max).count()
}
