//! Codimension-one f-biharmonicity for parameterized surfaces in R^3:
//! fundamental forms, the shape operator, the two-equation residual system in
//! a constant-curvature ambient, and the circular-cylinder weight family.
//!
//! For a surface with mean curvature H, shape operator A, and unit normal xi,
//! the f-biharmonicity system in a space form of curvature C reads
//!
//! ```text
//! normal:  lap H - H |A|^2 + m C H + H (lap f)/f + 2 <grad ln f, grad H> = 0
//! tangent: 2 A(grad H) + (m/2) grad H^2 + 2 H A(grad ln f) = 0
//! ```
//!
//! with `lap` and `grad` taken in the induced metric. The normal sign
//! convention is the chart's `r_u x r_v` direction times `orientation`;
//! flipping the orientation negates H and the normal but leaves `|A|^2` and
//! both residuals unchanged, which pins the convention observationally.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::fields::ScalarField;
use crate::numdiff::{one_dim, FdConfig};
use crate::{Error, Result};

type ChartFn = dyn Fn(f64, f64) -> Vector3<f64> + Send + Sync;

const IMMERSION_FLOOR: f64 = 1e-10;
/// Hypersurface dimension: surface patches in R^3.
const M: f64 = 2.0;

/// A parameterized surface patch with an orientation sign for the normal.
#[derive(Clone)]
pub struct ParamSurface {
    chart: Arc<ChartFn>,
    domain: ((f64, f64), (f64, f64)),
    orientation: f64,
}

impl ParamSurface {
    /// Wraps a chart; validates the immersion condition on a 5 x 5 interior
    /// grid with a default stencil.
    pub fn new<C>(chart: C, domain: ((f64, f64), (f64, f64)), outward: bool) -> Result<Self>
    where
        C: Fn(f64, f64) -> Vector3<f64> + Send + Sync + 'static,
    {
        let ((u0, u1), (v0, v1)) = domain;
        if !(u1 > u0) || !(v1 > v0) {
            return Err(Error::InvalidInput("empty chart domain".into()));
        }
        let surface = Self {
            chart: Arc::new(chart),
            domain,
            orientation: if outward { 1.0 } else { -1.0 },
        };
        let cfg = FdConfig::default();
        for i in 1..=5 {
            for j in 1..=5 {
                let u = u0 + (u1 - u0) * i as f64 / 6.0;
                let v = v0 + (v1 - v0) * j as f64 / 6.0;
                surface.first_form(u, v, &cfg)?;
            }
        }
        Ok(surface)
    }

    /// Circular cylinder of the given radius: `(theta, z) -> (R cos, R sin, z)`
    /// with the inward normal (both principal curvatures nonnegative,
    /// `H = 1/(2R)`).
    pub fn cylinder(radius: f64, z_range: (f64, f64)) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Self::new(
            move |theta: f64, z: f64| Vector3::new(radius * theta.cos(), radius * theta.sin(), z),
            ((0.0, 2.0 * std::f64::consts::PI), z_range),
            false,
        )
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// The same patch with the opposite normal.
    pub fn flipped(&self) -> Self {
        Self {
            chart: Arc::clone(&self.chart),
            domain: self.domain,
            orientation: -self.orientation,
        }
    }

    pub fn chart_point(&self, u: f64, v: f64) -> Vector3<f64> {
        (self.chart)(u, v)
    }

    fn check_interior(&self, uv: (f64, f64), cfg: &FdConfig) -> Result<()> {
        let ((u0, u1), (v0, v1)) = self.domain;
        let margin = 4.0 * cfg.step;
        if uv.0 - margin < u0 || uv.0 + margin > u1 {
            return Err(Error::OutOfDomain {
                s: uv.0,
                lo: u0,
                hi: u1,
            });
        }
        if uv.1 - margin < v0 || uv.1 + margin > v1 {
            return Err(Error::OutOfDomain {
                s: uv.1,
                lo: v0,
                hi: v1,
            });
        }
        Ok(())
    }

    fn first_form(&self, u: f64, v: f64, cfg: &FdConfig) -> Result<(Matrix2<f64>, f64)> {
        let chart = &self.chart;
        let ru = one_dim::d1(|t| chart(t, v), u, cfg);
        let rv = one_dim::d1(|t| chart(u, t), v, cfg);
        let first = Matrix2::new(ru.dot(&ru), ru.dot(&rv), ru.dot(&rv), rv.dot(&rv));
        let det = first.determinant();
        if det < IMMERSION_FLOOR || !det.is_finite() {
            return Err(Error::DegenerateMetric { u, v, det });
        }
        Ok((first, det))
    }
}

/// Pointwise second-order data of a surface patch.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceGeometry {
    /// first fundamental form in the chart basis
    pub first: Matrix2<f64>,
    /// second fundamental form with respect to the oriented unit normal
    pub second: Matrix2<f64>,
    /// shape operator `A = I^-1 II`
    pub shape: Matrix2<f64>,
    /// `H = tr(A) / 2`
    pub mean_curvature: f64,
    /// `|A|^2 = tr(A^2)`, the sum of squared principal curvatures
    pub shape_norm_sq: f64,
    /// oriented unit normal
    pub normal: Vector3<f64>,
}

/// Fundamental forms, shape operator, mean curvature, and normal at a chart
/// point, from finite-difference partials of the chart.
pub fn surface_geometry(
    surface: &ParamSurface,
    uv: (f64, f64),
    cfg: &FdConfig,
) -> Result<SurfaceGeometry> {
    surface.check_interior(uv, cfg)?;
    geometry_unchecked(surface, uv, cfg)
}

fn geometry_unchecked(
    surface: &ParamSurface,
    uv: (f64, f64),
    cfg: &FdConfig,
) -> Result<SurfaceGeometry> {
    let (u, v) = uv;
    let chart = &surface.chart;
    let ru = one_dim::d1(|t| chart(t, v), u, cfg);
    let rv = one_dim::d1(|t| chart(u, t), v, cfg);
    let ruu = one_dim::d2(|t| chart(t, v), u, cfg);
    let rvv = one_dim::d2(|t| chart(u, t), v, cfg);
    let ruv = mixed_second(chart.as_ref(), u, v, cfg);

    let first = Matrix2::new(ru.dot(&ru), ru.dot(&rv), ru.dot(&rv), rv.dot(&rv));
    let det = first.determinant();
    if det < IMMERSION_FLOOR || !det.is_finite() {
        return Err(Error::DegenerateMetric { u, v, det });
    }
    let normal = ru.cross(&rv).normalize() * surface.orientation;
    let second = Matrix2::new(
        ruu.dot(&normal),
        ruv.dot(&normal),
        ruv.dot(&normal),
        rvv.dot(&normal),
    );
    let shape = first.try_inverse().expect("determinant checked above") * second;
    let mean_curvature = 0.5 * shape.trace();
    let shape_norm_sq = (shape * shape).trace();
    Ok(SurfaceGeometry {
        first,
        second,
        shape,
        mean_curvature,
        shape_norm_sq,
        normal,
    })
}

fn mixed_second(chart: &ChartFn, u: f64, v: f64, cfg: &FdConfig) -> Vector3<f64> {
    let level = |h: f64| {
        (chart(u + h, v + h) - chart(u + h, v - h) - chart(u - h, v + h) + chart(u - h, v - h))
            * (1.0 / (4.0 * h * h))
    };
    if cfg.richardson {
        (level(cfg.step / 2.0) * 4.0 - level(cfg.step)) * (1.0 / 3.0)
    } else {
        level(cfg.step)
    }
}

/// Laplace-Beltrami of a chart-domain function in divergence form, with the
/// metric resampled at every stencil point.
fn laplace_beltrami<G>(surface: &ParamSurface, g: &G, uv: (f64, f64), cfg: &FdConfig) -> Result<f64>
where
    G: Fn(f64, f64) -> Result<f64>,
{
    let (u0, v0) = uv;
    let level = |h: f64| -> Result<f64> {
        // contravariant flux sqrt(det) I^-1 dg, differenced componentwise
        let flux = |u: f64, v: f64| -> Result<Vector2<f64>> {
            let (first, det) = surface.first_form(u, v, cfg)?;
            let du = (g(u + h, v)? - g(u - h, v)?) / (2.0 * h);
            let dv = (g(u, v + h)? - g(u, v - h)?) / (2.0 * h);
            let inv = first.try_inverse().expect("determinant checked");
            Ok(inv * Vector2::new(du, dv) * det.sqrt())
        };
        let (_, det0) = surface.first_form(u0, v0, cfg)?;
        let div_u = (flux(u0 + h, v0)?.x - flux(u0 - h, v0)?.x) / (2.0 * h);
        let div_v = (flux(u0, v0 + h)?.y - flux(u0, v0 - h)?.y) / (2.0 * h);
        Ok((div_u + div_v) / det0.sqrt())
    };
    if cfg.richardson {
        Ok((4.0 * level(cfg.step / 2.0)? - level(cfg.step)?) / 3.0)
    } else {
        level(cfg.step)
    }
}

fn surface_gradient(
    surface: &ParamSurface,
    g: &dyn Fn(f64, f64) -> Result<f64>,
    uv: (f64, f64),
    cfg: &FdConfig,
) -> Result<Vector2<f64>> {
    let (u, v) = uv;
    let level = |h: f64| -> Result<Vector2<f64>> {
        let du = (g(u + h, v)? - g(u - h, v)?) / (2.0 * h);
        let dv = (g(u, v + h)? - g(u, v - h)?) / (2.0 * h);
        Ok(Vector2::new(du, dv))
    };
    let dg = if cfg.richardson {
        (level(cfg.step / 2.0)? * 4.0 - level(cfg.step)?) * (1.0 / 3.0)
    } else {
        level(cfg.step)?
    };
    let (first, _) = surface.first_form(u, v, cfg)?;
    Ok(first.try_inverse().expect("determinant checked") * dg)
}

/// Both residuals of the f-biharmonic hypersurface system at a chart point:
/// `(normal, tangent)` with the tangent part measured in the induced metric.
/// `ambient_c` is the sectional curvature of the ambient space form (zero for
/// charts realized in R^3; the formula accepts general values).
pub fn hypersurface_residual(
    surface: &ParamSurface,
    f: &ScalarField,
    uv: (f64, f64),
    ambient_c: f64,
    cfg: &FdConfig,
) -> Result<(f64, f64)> {
    surface.check_interior(uv, cfg)?;
    let (u, v) = uv;

    let weight = |uu: f64, vv: f64| -> Result<f64> {
        let value = f.eval_checked(&[uu, vv], 0.0)?;
        if value <= 0.0 {
            return Err(Error::NonPositiveWeight {
                point: vec![uu, vv],
                value,
            });
        }
        Ok(value)
    };
    let mean = |uu: f64, vv: f64| -> Result<f64> {
        Ok(geometry_unchecked(surface, (uu, vv), cfg)?.mean_curvature)
    };

    let geo = geometry_unchecked(surface, uv, cfg)?;
    let h0 = geo.mean_curvature;
    let f0 = weight(u, v)?;

    let lap_h = laplace_beltrami(surface, &mean, uv, cfg)?;
    let lap_f = laplace_beltrami(surface, &weight, uv, cfg)?;
    let grad_h = surface_gradient(surface, &mean, uv, cfg)?;
    let grad_f = surface_gradient(surface, &weight, uv, cfg)?;
    let grad_ln_f = grad_f / f0;

    // <grad ln f, grad H> in the induced metric (contravariant pairing)
    let pairing = (geo.first * grad_h).dot(&grad_ln_f);
    let normal =
        lap_h - h0 * geo.shape_norm_sq + M * ambient_c * h0 + h0 * lap_f / f0 + 2.0 * pairing;

    // 2 A(grad H) + (m/2) grad H^2 + 2 H A(grad ln f), with grad H^2 = 2 H grad H
    let tangent_vec =
        geo.shape * grad_h * 2.0 + grad_h * (M * h0) + geo.shape * grad_ln_f * (2.0 * h0);
    let tangent = (tangent_vec.dot(&(geo.first * tangent_vec)))
        .max(0.0)
        .sqrt();

    if !normal.is_finite() || !tangent.is_finite() {
        return Err(Error::NonFinite { point: vec![u, v] });
    }
    Ok((normal.abs(), tangent))
}

/// Induced-metric tension of the chart inclusion: the Laplace-Beltrami of
/// each ambient component. Equals `m H xi` for an isometric immersion.
pub fn induced_tension(
    surface: &ParamSurface,
    uv: (f64, f64),
    cfg: &FdConfig,
) -> Result<Vector3<f64>> {
    surface.check_interior(uv, cfg)?;
    let mut out = Vector3::zeros();
    for axis in 0..3 {
        let chart = Arc::clone(&surface.chart);
        let component = move |uu: f64, vv: f64| -> Result<f64> { Ok(chart(uu, vv)[axis]) };
        out[axis] = laplace_beltrami(surface, &component, uv, cfg)?;
    }
    Ok(out)
}

/// Normal sign for the cylinder weight family exponentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentSign {
    Plus,
    Minus,
}

/// The circular-cylinder weight family
/// `f(z) = (C2 e^(+-z/R) - C1 C2^-1 R^2 e^(-+z/R)) / 2`; any member makes the
/// radius-R cylinder f-biharmonic wherever f stays positive.
pub fn cylinder_f_family(radius: f64, c1: f64, c2: f64, sign: ExponentSign, z: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if c2 == 0.0 {
        return Err(Error::InvalidInput("C2 must be nonzero".into()));
    }
    let (e_plus, e_minus) = match sign {
        ExponentSign::Plus => ((z / radius).exp(), (-z / radius).exp()),
        ExponentSign::Minus => ((-z / radius).exp(), (z / radius).exp()),
    };
    let value = (c2 * e_plus - c1 / c2 * radius * radius * e_minus) / 2.0;
    if !(value > 0.0) {
        return Err(Error::NonPositiveWeight {
            point: vec![z],
            value,
        });
    }
    Ok(value)
}

/// Residuals of the reduced constant-mean-curvature system on a compact
/// hypersurface of a sphere:
///
/// ```text
/// (|lap f - (|A|^2 - m) f|,  |A| |grad ln f|)
/// ```
///
/// `H` and `|A|^2` are supplied analytically (the compact setting is not
/// chart-realized). The second component bounds `|A(grad ln f)|` by the
/// Frobenius norm of `A`, which is exact in the degenerate cases the system
/// forces (constant `f`, or the harmonic branch `|A|^2 = m`).
pub fn cmc_sphere_system_residual(
    mean_curvature: f64,
    shape_norm_sq: f64,
    f: &ScalarField,
    m: usize,
    x: &[f64],
    cfg: &FdConfig,
) -> Result<(f64, f64)> {
    if mean_curvature == 0.0 {
        return Err(Error::InvalidInput(
            "the reduced system assumes nonzero constant mean curvature".into(),
        ));
    }
    let value = f.eval_checked(x, cfg.singular_margin)?;
    if value <= 0.0 {
        return Err(Error::NonPositiveWeight {
            point: x.to_vec(),
            value,
        });
    }
    let lap_f = crate::numdiff::laplacian(f, x, cfg)?;
    let grad_f = crate::numdiff::gradient(f, x, cfg)?;
    let grad_ln_norm = grad_f
        .iter()
        .map(|g| (g / value) * (g / value))
        .sum::<f64>()
        .sqrt();
    let first = (lap_f - (shape_norm_sq - m as f64) * value).abs();
    let second = shape_norm_sq.max(0.0).sqrt() * grad_ln_norm;
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cyl(radius: f64) -> ParamSurface {
        ParamSurface::cylinder(radius, (-4.0, 4.0)).unwrap()
    }

    #[test]
    fn cylinder_geometry() {
        let geo = surface_geometry(&cyl(1.0), (1.0, 0.5), &FdConfig::default()).unwrap();
        assert_abs_diff_eq!(geo.mean_curvature, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(geo.shape_norm_sq, 1.0, epsilon = 1e-6);
        // inward normal points at the axis
        let expected = Vector3::new(-(1.0f64.cos()), -(1.0f64.sin()), 0.0);
        assert!((geo.normal - expected).norm() < 1e-8);

        let geo2 = surface_geometry(&cyl(2.0), (0.3, -1.0), &FdConfig::default()).unwrap();
        assert_abs_diff_eq!(geo2.mean_curvature, 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(geo2.shape_norm_sq, 0.25, epsilon = 1e-6);
    }

    #[test]
    fn shape_operator_is_metric_symmetric() {
        // I * A = II is symmetric, so A is self-adjoint with respect to the
        // first fundamental form
        let sphere = ParamSurface::new(
            |u: f64, v: f64| Vector3::new(u.sin() * v.cos(), u.sin() * v.sin(), u.cos()),
            (
                (0.2, std::f64::consts::PI - 0.2),
                (0.0, 2.0 * std::f64::consts::PI),
            ),
            true,
        )
        .unwrap();
        for &(u, v) in &[(0.8, 1.2), (1.4, 4.0)] {
            let geo = surface_geometry(&sphere, (u, v), &FdConfig::default()).unwrap();
            let ia = geo.first * geo.shape;
            assert!(
                (ia[(0, 1)] - ia[(1, 0)]).abs() < 1e-9,
                "IA not symmetric: {ia:?}"
            );
        }
    }

    #[test]
    fn ambient_curvature_term_shifts_the_normal_residual() {
        // on the cylinder with a family weight the residual is zero at C = 0;
        // a synthetic ambient curvature C adds exactly m C H = 2 C H = C
        let surface = cyl(1.0);
        let f = ScalarField::new(2, |x: &[f64]| x[1].exp() / 2.0);
        let cfg = FdConfig::wide(1e-2);
        let (normal, _) = hypersurface_residual(&surface, &f, (0.7, 0.3), 0.3, &cfg).unwrap();
        assert_abs_diff_eq!(normal, 0.3, epsilon = 1e-6);
    }

    #[test]
    fn plane_geometry_is_flat() {
        let plane = ParamSurface::new(
            |u: f64, v: f64| Vector3::new(u, v, 0.0),
            ((-2.0, 2.0), (-2.0, 2.0)),
            true,
        )
        .unwrap();
        let geo = surface_geometry(&plane, (0.3, -0.4), &FdConfig::default()).unwrap();
        assert_abs_diff_eq!(geo.mean_curvature, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(geo.shape_norm_sq, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn sphere_geometry_with_outward_normal() {
        // unit sphere: both principal curvatures -1 with the outward normal
        let sphere = ParamSurface::new(
            |u: f64, v: f64| Vector3::new(u.sin() * v.cos(), u.sin() * v.sin(), u.cos()),
            (
                (0.2, std::f64::consts::PI - 0.2),
                (0.0, 2.0 * std::f64::consts::PI),
            ),
            true,
        )
        .unwrap();
        let geo = surface_geometry(&sphere, (1.1, 2.0), &FdConfig::default()).unwrap();
        assert_abs_diff_eq!(geo.mean_curvature, -1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(geo.shape_norm_sq, 2.0, epsilon = 1e-5);
        // normal is radial
        let p = sphere.chart_point(1.1, 2.0);
        assert!((geo.normal - p.normalize()).norm() < 1e-6);
    }

    #[test]
    fn degenerate_chart_is_rejected() {
        let collapsed = ParamSurface::new(
            |u: f64, _v: f64| Vector3::new(u, 0.0, 0.0),
            ((-1.0, 1.0), (-1.0, 1.0)),
            true,
        );
        assert!(matches!(collapsed, Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn minimal_surface_residuals_vanish_for_any_weight() {
        let plane = ParamSurface::new(
            |u: f64, v: f64| Vector3::new(u, v, 0.0),
            ((-2.0, 2.0), (-2.0, 2.0)),
            true,
        )
        .unwrap();
        let f = ScalarField::new(2, |x: &[f64]| (x[0] - 0.5 * x[1]).exp());
        let (normal, tangent) =
            hypersurface_residual(&plane, &f, (0.2, 0.1), 0.0, &FdConfig::wide(1e-2)).unwrap();
        assert!(normal < 1e-9 && tangent < 1e-9, "({normal}, {tangent})");
    }

    #[test]
    fn cylinder_family_weight_is_f_biharmonic() {
        // R = 1, C1 = 0, C2 = 1, upper sign: f(z) = e^z / 2
        let surface = cyl(1.0);
        let f = ScalarField::new(2, |x: &[f64]| x[1].exp() / 2.0);
        let cfg = FdConfig::wide(1e-2);
        for &(theta, z) in &[(0.7, 0.3), (2.0, -1.0), (4.5, 2.0)] {
            let (normal, tangent) =
                hypersurface_residual(&surface, &f, (theta, z), 0.0, &cfg).unwrap();
            assert!(normal < 1e-5, "normal {normal} at ({theta}, {z})");
            assert!(tangent < 1e-5, "tangent {tangent} at ({theta}, {z})");
        }
    }

    #[test]
    fn cylinder_wrong_weight_has_unit_and_a_half_defect() {
        // f = e^{2z}: lap f / f = 4 on the unit cylinder, |A|^2 = 1, H = 1/2,
        // so the normal residual is |2 - 1/2| = 3/2 and the tangent vanishes.
        let surface = cyl(1.0);
        let f = ScalarField::new(2, |x: &[f64]| (2.0 * x[1]).exp());
        let (normal, tangent) =
            hypersurface_residual(&surface, &f, (1.2, 0.4), 0.0, &FdConfig::wide(1e-2)).unwrap();
        assert_abs_diff_eq!(normal, 1.5, epsilon = 1e-4);
        assert!(tangent < 1e-6);
    }

    #[test]
    fn orientation_flip_preserves_residuals() {
        let surface = cyl(1.0);
        let flipped = surface.flipped();
        let cfg = FdConfig::default();
        let geo = surface_geometry(&surface, (0.9, 0.2), &cfg).unwrap();
        let geo_f = surface_geometry(&flipped, (0.9, 0.2), &cfg).unwrap();
        assert_abs_diff_eq!(geo.mean_curvature, -geo_f.mean_curvature, epsilon = 1e-10);
        assert!((geo.normal + geo_f.normal).norm() < 1e-10);
        assert_abs_diff_eq!(geo.shape_norm_sq, geo_f.shape_norm_sq, epsilon = 1e-10);

        let f = ScalarField::new(2, |x: &[f64]| x[1].exp() / 2.0);
        let wide = FdConfig::wide(1e-2);
        let (n1, t1) = hypersurface_residual(&surface, &f, (0.9, 0.2), 0.0, &wide).unwrap();
        let (n2, t2) = hypersurface_residual(&flipped, &f, (0.9, 0.2), 0.0, &wide).unwrap();
        assert_abs_diff_eq!(n1, n2, epsilon = 1e-8);
        assert_abs_diff_eq!(t1, t2, epsilon = 1e-8);
    }

    #[test]
    fn induced_tension_is_m_h_normal() {
        let surface = cyl(1.0);
        let cfg = FdConfig::default();
        let uv = (0.8, -0.5);
        let tau = induced_tension(&surface, uv, &cfg).unwrap();
        let geo = surface_geometry(&surface, uv, &cfg).unwrap();
        let expected = geo.normal * (M * geo.mean_curvature);
        assert!(
            (tau - expected).norm() < 1e-5,
            "tension {tau:?} vs {expected:?}"
        );
    }

    #[test]
    fn family_values() {
        // R=1, C1=0, C2=2, upper: f(0) = 1, f(1) = e
        assert_abs_diff_eq!(
            cylinder_f_family(1.0, 0.0, 2.0, ExponentSign::Plus, 0.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            cylinder_f_family(1.0, 0.0, 2.0, ExponentSign::Plus, 1.0).unwrap(),
            std::f64::consts::E,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            cylinder_f_family(2.0, -1.0, 1.0, ExponentSign::Plus, 0.0).unwrap(),
            2.5,
            epsilon = 1e-15
        );
        // C1 > 0 with a large opposing exponential goes nonpositive
        assert!(matches!(
            cylinder_f_family(1.0, 4.0, 1.0, ExponentSign::Plus, 0.0),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(cylinder_f_family(1.0, 0.0, 0.0, ExponentSign::Plus, 0.0).is_err());
    }

    #[test]
    fn cmc_sphere_reduced_system() {
        let cfg = FdConfig::default();
        // |A|^2 = m with harmonic f: first equation vanishes.
        let harmonic = ScalarField::new(2, |x: &[f64]| x[0] * x[1]);
        let (first, _) =
            cmc_sphere_system_residual(1.0, 2.0, &harmonic, 2, &[0.4, 0.7], &cfg).unwrap();
        assert!(first < 1e-8, "got {first}");

        // constant f with |A|^2 = m + 1: first component equals |f|.
        let constant = ScalarField::constant(2, 3.0);
        let (first, second) =
            cmc_sphere_system_residual(1.0, 3.0, &constant, 2, &[0.4, 0.7], &cfg).unwrap();
        assert_abs_diff_eq!(first, 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(second, 0.0, epsilon = 1e-12);

        // constant f with |A|^2 = m: both vanish.
        let (first, second) =
            cmc_sphere_system_residual(1.0, 2.0, &constant, 2, &[0.4, 0.7], &cfg).unwrap();
        assert!(first < 1e-10 && second < 1e-12);
    }

    #[test]
    fn compact_degeneracy_forces_constant_weight() {
        // On a periodic grid the operator lap_h - (|A|^2 - m) has trivial
        // kernel when |A|^2 - m > 0: no nonconstant (indeed no nonzero)
        // weight solves the reduced system.
        use crate::functions::periodic_laplacian;
        let n = 24;
        let c = 1.5; // |A|^2 - m
        let lap = periodic_laplacian(&[n]);
        let shifted = lap - nalgebra::DMatrix::identity(n, n) * c;
        let sv = shifted.svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0f64, f64::max);
        let kernel = sv.iter().filter(|&&s| s < 1e-9 * max).count();
        assert_eq!(kernel, 0);
        // smallest singular value is exactly the shift c
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(min, c, epsilon = 1e-9);
    }
}
