//! f-biharmonic curves: Frenet-frame residual systems, the classified
//! curvature families in R^3, curvature/torsion estimation, and curve
//! reconstruction from prescribed curvature and torsion.
//!
//! Scope is the 3-frame (kappa_3 = 0 throughout). An arclength curve with
//! curvature kappa_1 and torsion kappa_2 is f-biharmonic in a space form of
//! curvature C exactly when the four coefficient equations returned by
//! [`frenet_system_residual`] vanish; for nonconstant curvature this forces
//! the weight `f = c_1 kappa_1^{-3/2}` and the curvature ODE checked by
//! [`classification_ode_residual`].

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use crate::numdiff::{one_dim, FdConfig};
use crate::spline::CubicSpline;
use crate::{Error, Result};

type Curve3Fn = dyn Fn(f64) -> Vector3<f64> + Send + Sync;
type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Below this curvature the Frenet normal, and with it torsion, is undefined.
pub const CURVATURE_FLOOR: f64 = 1e-8;
const ARCLENGTH_TOL: f64 = 1e-6;

/// Intrinsic curve data: curvature `kappa_1`, an optional constant torsion
/// ratio (`kappa_2 = ratio_c * kappa_1`), the ambient sectional curvature,
/// and the weight-family constant `c_1` for `f = c_1 kappa_1^(-3/2)`.
#[derive(Clone)]
pub struct CurvatureProfile {
    kappa1: Arc<ScalarFn>,
    ratio_c: Option<f64>,
    ambient_c: f64,
    interval: (f64, f64),
    f_constant_c1: f64,
}

impl CurvatureProfile {
    pub fn new<K>(
        kappa1: K,
        ratio_c: Option<f64>,
        ambient_c: f64,
        interval: (f64, f64),
        f_constant_c1: f64,
    ) -> Result<Self>
    where
        K: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(interval.1 > interval.0) {
            return Err(Error::InvalidInput(format!(
                "empty curvature interval [{}, {}]",
                interval.0, interval.1
            )));
        }
        if !(f_constant_c1 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "weight constant c1 must be positive, got {f_constant_c1}"
            )));
        }
        if ratio_c == Some(0.0) {
            // a vanishing ratio is the planar case; profiles where kappa_2
            // crosses zero are rejected rather than reinterpreted
            return Err(Error::InvalidInput(
                "ratio_c = 0 is the planar case; pass None instead".into(),
            ));
        }
        let profile = Self {
            kappa1: Arc::new(kappa1),
            ratio_c,
            ambient_c,
            interval,
            f_constant_c1,
        };
        for i in 0..=32 {
            let s = interval.0 + (interval.1 - interval.0) * i as f64 / 32.0;
            let k = profile.kappa1(s);
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::NonPositiveCurvature { s, value: k });
            }
        }
        Ok(profile)
    }

    pub fn kappa1(&self, s: f64) -> f64 {
        (self.kappa1)(s)
    }

    pub fn kappa2(&self, s: f64) -> f64 {
        self.ratio_c.map_or(0.0, |c| c * self.kappa1(s))
    }

    pub fn ratio_c(&self) -> Option<f64> {
        self.ratio_c
    }

    pub fn ambient_c(&self) -> f64 {
        self.ambient_c
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn f_constant_c1(&self) -> f64 {
        self.f_constant_c1
    }

    /// The weight family `f = c_1 kappa_1^(-3/2)` attached to the profile.
    pub fn canonical_weight(&self) -> impl Fn(f64) -> f64 + Send + Sync + '_ {
        let c1 = self.f_constant_c1;
        move |s: f64| c1 * self.kappa1(s).powf(-1.5)
    }

    fn check_interior(&self, s: f64, cfg: &FdConfig) -> Result<()> {
        let margin = 4.0 * cfg.step;
        if s - margin < self.interval.0 || s + margin > self.interval.1 {
            return Err(Error::OutOfDomain {
                s,
                lo: self.interval.0,
                hi: self.interval.1,
            });
        }
        Ok(())
    }
}

/// The four coefficient equations of the f-biharmonic curve system in a
/// space form, evaluated with finite differences in `s`:
///
/// ```text
/// r1 = -3 k1 k1' - 2 k1^2 f'/f
/// r2 =  k1'' - k1 k2^2 - k1^3 + k1 C + k1 f''/f + 2 k1' f'/f
/// r3 =  2 k1' k2 + k1 k2' + 2 k1 k2 f'/f
/// r4 =  k1 k2 k3                  (zero: kappa_3 = 0 in the 3-frame scope)
/// ```
///
/// All four near zero at every `s` is the f-biharmonicity criterion.
pub fn frenet_system_residual<F>(
    profile: &CurvatureProfile,
    f: F,
    s: f64,
    cfg: &FdConfig,
) -> Result<[f64; 4]>
where
    F: Fn(f64) -> f64,
{
    profile.check_interior(s, cfg)?;
    let k1 = profile.kappa1(s);
    if !(k1 > 0.0) {
        return Err(Error::NonPositiveCurvature { s, value: k1 });
    }
    let fv = f(s);
    if !(fv > 0.0) {
        return Err(Error::NonPositiveWeight {
            point: vec![s],
            value: fv,
        });
    }
    let k1p = one_dim::d1(|t| profile.kappa1(t), s, cfg);
    let k1pp = one_dim::d2(|t| profile.kappa1(t), s, cfg);
    let fp = one_dim::d1(&f, s, cfg);
    let fpp = one_dim::d2(&f, s, cfg);
    let ratio = profile.ratio_c.unwrap_or(0.0);
    let k2 = ratio * k1;
    let k2p = ratio * k1p;
    let c = profile.ambient_c;

    let r1 = -3.0 * k1 * k1p - 2.0 * k1 * k1 * fp / fv;
    let r2 = k1pp - k1 * k2 * k2 - k1.powi(3) + k1 * c + k1 * fpp / fv + 2.0 * k1p * fp / fv;
    let r3 = 2.0 * k1p * k2 + k1 * k2p + 2.0 * k1 * k2 * fp / fv;
    let r4 = 0.0;
    let out = [r1, r2, r3, r4];
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { point: vec![s] });
    }
    Ok(out)
}

/// Residual of the curvature ODE that classifies proper f-biharmonic curves:
/// `|3 k'^2 - 2 k k'' - 4 k^2 ((1 + c3^2) k^2 - C)|` with `c3` the torsion
/// ratio (zero in the planar case).
pub fn classification_ode_residual(
    profile: &CurvatureProfile,
    s: f64,
    cfg: &FdConfig,
) -> Result<f64> {
    profile.check_interior(s, cfg)?;
    let k = profile.kappa1(s);
    if !(k > 0.0) {
        return Err(Error::NonPositiveCurvature { s, value: k });
    }
    let kp = one_dim::d1(|t| profile.kappa1(t), s, cfg);
    let kpp = one_dim::d2(|t| profile.kappa1(t), s, cfg);
    let c3 = profile.ratio_c.unwrap_or(0.0);
    let value =
        3.0 * kp * kp - 2.0 * k * kpp - 4.0 * k * k * ((1.0 + c3 * c3) * k * k - profile.ambient_c);
    if !value.is_finite() {
        return Err(Error::NonFinite { point: vec![s] });
    }
    Ok(value.abs())
}

/// The two classified families of proper f-biharmonic curves in R^3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum R3Kind {
    /// torsion zero, `kappa = 4 c2 / (16 + (c2 s + c3)^2)`
    Planar,
    /// general helix, `kappa = 4 c2 / (16 (1 + c^2) + (c2 s + c3)^2)`, `tau = c kappa`
    Helix,
}

/// Parameters of an R^3 family member; `c` is the helix ratio `tau / kappa`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct R3Family {
    pub kind: R3Kind,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c: f64,
}

impl R3Family {
    pub fn planar(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        Self::validate(c1, c2)?;
        Ok(Self {
            kind: R3Kind::Planar,
            c1,
            c2,
            c3,
            c: 0.0,
        })
    }

    pub fn helix(c1: f64, c2: f64, c3: f64, c: f64) -> Result<Self> {
        Self::validate(c1, c2)?;
        if c == 0.0 {
            return Err(Error::InvalidInput(
                "helix family needs a nonzero torsion ratio c".into(),
            ));
        }
        Ok(Self {
            kind: R3Kind::Helix,
            c1,
            c2,
            c3,
            c,
        })
    }

    fn validate(c1: f64, c2: f64) -> Result<()> {
        if !(c1 > 0.0) || !(c2 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "family constants must satisfy c1 > 0 and c2 > 0, got c1 = {c1}, c2 = {c2}"
            )));
        }
        Ok(())
    }

    /// `(kappa, tau, f)` at arclength `s`.
    pub fn curvature(&self, s: f64) -> (f64, f64, f64) {
        let shift = self.c2 * s + self.c3;
        let kappa = match self.kind {
            R3Kind::Planar => 4.0 * self.c2 / (16.0 + shift * shift),
            R3Kind::Helix => 4.0 * self.c2 / (16.0 * (1.0 + self.c * self.c) + shift * shift),
        };
        let tau = match self.kind {
            R3Kind::Planar => 0.0,
            R3Kind::Helix => self.c * kappa,
        };
        (kappa, tau, self.c1 * kappa.powf(-1.5))
    }

    /// The family as a curvature profile on `interval` (ambient curvature 0).
    pub fn profile(&self, interval: (f64, f64)) -> Result<CurvatureProfile> {
        let me = *self;
        CurvatureProfile::new(
            move |s| me.curvature(s).0,
            match self.kind {
                R3Kind::Planar => None,
                R3Kind::Helix => Some(self.c),
            },
            0.0,
            interval,
            self.c1,
        )
    }
}

/// An arclength-parametrized curve in R^3.
#[derive(Clone)]
pub struct ParamCurve {
    gamma: Arc<Curve3Fn>,
    interval: (f64, f64),
}

impl ParamCurve {
    /// Wraps a closure, checking `|gamma'| = 1` at 33 interior samples.
    pub fn new<G>(gamma: G, interval: (f64, f64)) -> Result<Self>
    where
        G: Fn(f64) -> Vector3<f64> + Send + Sync + 'static,
    {
        if !(interval.1 > interval.0) {
            return Err(Error::InvalidInput(format!(
                "empty curve interval [{}, {}]",
                interval.0, interval.1
            )));
        }
        let curve = Self {
            gamma: Arc::new(gamma),
            interval,
        };
        curve.check_arclength()?;
        Ok(curve)
    }

    /// Interpolates uniformly spaced samples with clamped cubic splines; the
    /// end tangents fix the spline slopes.
    pub fn from_samples(
        start: f64,
        step: f64,
        points: &[Vector3<f64>],
        tangent_start: Vector3<f64>,
        tangent_end: Vector3<f64>,
    ) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidInput("need at least four samples".into()));
        }
        let splines: Vec<CubicSpline> = (0..3)
            .map(|axis| {
                CubicSpline::clamped(
                    start,
                    step,
                    points.iter().map(|p| p[axis]).collect(),
                    tangent_start[axis],
                    tangent_end[axis],
                )
            })
            .collect();
        let end = start + step * (points.len() - 1) as f64;
        Self::new(
            move |s| Vector3::new(splines[0].eval(s), splines[1].eval(s), splines[2].eval(s)),
            (start, end),
        )
    }

    pub fn point(&self, s: f64) -> Vector3<f64> {
        (self.gamma)(s)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn check_arclength(&self) -> Result<()> {
        let speed_cfg = FdConfig::new(1e-4, 2, true).expect("static config");
        let (lo, hi) = self.interval;
        let inset = 8.0 * speed_cfg.step;
        for i in 0..=32 {
            let s = (lo + inset) + (hi - lo - 2.0 * inset) * i as f64 / 32.0;
            let speed = one_dim::d1(|t| (self.gamma)(t), s, &speed_cfg).norm();
            if (speed - 1.0).abs() > ARCLENGTH_TOL {
                return Err(Error::NotArclength { s, speed });
            }
        }
        Ok(())
    }

    fn check_interior(&self, s: f64, cfg: &FdConfig) -> Result<()> {
        let margin = 4.0 * cfg.step;
        if s - margin < self.interval.0 || s + margin > self.interval.1 {
            return Err(Error::OutOfDomain {
                s,
                lo: self.interval.0,
                hi: self.interval.1,
            });
        }
        Ok(())
    }
}

/// Curvature `|gamma''|` and torsion `det(gamma', gamma'', gamma''') / |gamma''|^2`
/// from finite differences of the parametrization.
pub fn estimate_curvature_torsion(
    curve: &ParamCurve,
    s: f64,
    cfg: &FdConfig,
) -> Result<(f64, f64)> {
    curve.check_interior(s, cfg)?;
    let g = |t: f64| curve.point(t);
    let g1 = one_dim::d1(g, s, cfg);
    if (g1.norm() - 1.0).abs() > ARCLENGTH_TOL {
        return Err(Error::NotArclength {
            s,
            speed: g1.norm(),
        });
    }
    let g2 = one_dim::d2(g, s, cfg);
    let kappa = g2.norm();
    if kappa < CURVATURE_FLOOR {
        return Err(Error::VanishingCurvature {
            s,
            min: CURVATURE_FLOOR,
        });
    }
    let g3 = one_dim::d3(g, s, cfg);
    let det = Matrix3::from_columns(&[g1, g2, g3]).determinant();
    Ok((kappa, det / (kappa * kappa)))
}

/// Orthonormal Frenet data at a point: base point and (tangent, normal,
/// binormal).
#[derive(Clone, Copy, Debug)]
pub struct CurveFrame {
    pub point: Vector3<f64>,
    pub tangent: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub binormal: Vector3<f64>,
}

impl CurveFrame {
    /// Standard frame (e1, e2, e3) at `point`.
    pub fn standard(point: Vector3<f64>) -> Self {
        Self {
            point,
            tangent: Vector3::x(),
            normal: Vector3::y(),
            binormal: Vector3::z(),
        }
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = Matrix3::from_columns(&[self.tangent, self.normal, self.binormal]);
        let gram = m.transpose() * m;
        (gram - Matrix3::identity()).abs().max()
    }

    pub fn basis(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.tangent, self.normal, self.binormal])
    }
}

/// Output of [`reconstruct_curve`]: arclength samples, points, and frames.
#[derive(Clone, Debug)]
pub struct ReconstructedCurve {
    pub s: Vec<f64>,
    pub points: Vec<Vector3<f64>>,
    pub frames: Vec<[Vector3<f64>; 3]>,
    /// Largest orthonormality defect observed just before each
    /// re-orthonormalization.
    pub max_frame_drift: f64,
    step: f64,
}

impl ReconstructedCurve {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn frame_at(&self, index: usize) -> CurveFrame {
        CurveFrame {
            point: self.points[index],
            tangent: self.frames[index][0],
            normal: self.frames[index][1],
            binormal: self.frames[index][2],
        }
    }

    /// Spline-backed arclength curve over the sampled range.
    pub fn into_param_curve(&self) -> Result<ParamCurve> {
        ParamCurve::from_samples(
            self.s[0],
            self.step,
            &self.points,
            self.frames[0][0],
            self.frames[self.frames.len() - 1][0],
        )
    }
}

const REORTHONORMALIZE_EVERY: usize = 16;
const FRAME_TOL: f64 = 1e-10;

/// Integrates the Frenet system
///
/// ```text
/// gamma' = F1,  F1' = kappa F2,  F2' = -kappa F1 + tau F3,  F3' = -tau F2
/// ```
///
/// with classical fourth-order Runge-Kutta at fixed step, re-orthonormalizing
/// the frame by modified Gram-Schmidt every 16 steps. By the fundamental
/// theorem for space curves the result is the unique curve (up to rigid
/// motion) with the prescribed curvature and torsion.
pub fn reconstruct_curve<K, T>(
    kappa: K,
    tau: T,
    interval: (f64, f64),
    start: &CurveFrame,
    step: f64,
) -> Result<ReconstructedCurve>
where
    K: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    let (s0, s1) = interval;
    let span = s1 - s0;
    if !(span > 0.0) {
        return Err(Error::InvalidInput(format!("empty interval [{s0}, {s1}]")));
    }
    if step > span / 64.0 {
        return Err(Error::StepTooLarge {
            step,
            max: span / 64.0,
        });
    }
    let defect = start.orthonormality_defect();
    if defect > FRAME_TOL {
        return Err(Error::FrameNotOrthonormal { deviation: defect });
    }

    let n = (span / step).round().max(64.0) as usize;
    let h = span / n as f64;

    let kap = |s: f64| -> Result<f64> {
        let k = kappa(s);
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::NonPositiveCurvature { s, value: k });
        }
        Ok(k)
    };

    // state: [gamma, F1, F2, F3]
    let mut state = [start.point, start.tangent, start.normal, start.binormal];
    let deriv = |s: f64, y: &[Vector3<f64>; 4]| -> Result<[Vector3<f64>; 4]> {
        let k = kap(s)?;
        let t = tau(s);
        Ok([y[1], y[2] * k, y[1] * (-k) + y[3] * t, y[2] * (-t)])
    };

    let mut s_values = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    let mut frames = Vec::with_capacity(n + 1);
    let mut max_drift = 0.0f64;
    s_values.push(s0);
    points.push(state[0]);
    frames.push([state[1], state[2], state[3]]);

    for i in 0..n {
        let s = s0 + i as f64 * h;
        let k1 = deriv(s, &state)?;
        let k2 = deriv(s + h / 2.0, &advance(&state, &k1, h / 2.0))?;
        let k3 = deriv(s + h / 2.0, &advance(&state, &k2, h / 2.0))?;
        let k4 = deriv(s + h, &advance(&state, &k3, h))?;
        for j in 0..4 {
            state[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
        if (i + 1) % REORTHONORMALIZE_EVERY == 0 {
            let frame = CurveFrame {
                point: state[0],
                tangent: state[1],
                normal: state[2],
                binormal: state[3],
            };
            max_drift = max_drift.max(frame.orthonormality_defect());
            let [t, nrm, b] = gram_schmidt(state[1], state[2], state[3]);
            state[1] = t;
            state[2] = nrm;
            state[3] = b;
        }
        s_values.push(s0 + (i + 1) as f64 * h);
        points.push(state[0]);
        frames.push([state[1], state[2], state[3]]);
    }

    Ok(ReconstructedCurve {
        s: s_values,
        points,
        frames,
        max_frame_drift: max_drift,
        step: h,
    })
}

fn advance(y: &[Vector3<f64>; 4], dy: &[Vector3<f64>; 4], h: f64) -> [Vector3<f64>; 4] {
    [
        y[0] + dy[0] * h,
        y[1] + dy[1] * h,
        y[2] + dy[2] * h,
        y[3] + dy[3] * h,
    ]
}

fn gram_schmidt(a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>) -> [Vector3<f64>; 3] {
    let t = a.normalize();
    let n = (b - t * b.dot(&t)).normalize();
    let bn = (c - t * c.dot(&t) - n * c.dot(&n)).normalize();
    [t, n, bn]
}

/// The rigid motion `y -> R (y - from.point) + to.point` that carries the
/// frame `from` onto the frame `to`.
pub fn rigid_alignment(
    from: &CurveFrame,
    to: &CurveFrame,
) -> impl Fn(Vector3<f64>) -> Vector3<f64> {
    let rotation = to.basis() * from.basis().transpose();
    let from_point = from.point;
    let to_point = to.point;
    move |y: Vector3<f64>| rotation * (y - from_point) + to_point
}

/// Euclidean f-biharmonic curve residual `|f gamma'''' + 2 f' gamma''' + f'' gamma''|`.
///
/// Every curve derivative is built from the second-difference field
/// `g(t) = (gamma(t+h) - 2 gamma(t) + gamma(t-h)) / h^2`: the fourth
/// derivative is the nested second difference of `g`, the third the central
/// first difference of `g`. Differencing the common field keeps this route
/// and the factored form [`euclidean_curve_residual_factored`] on the same
/// summation tree, so the two agree to rounding level on the same samples
/// (their exact-arithmetic gap is the `O(h^2)`-smooth discrete Leibniz
/// correction, which the joint Richardson step removes).
pub fn euclidean_curve_residual<F>(curve: &ParamCurve, f: F, s: f64, cfg: &FdConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    curve.check_interior(s, cfg)?;
    check_weight_window(&f, s, cfg)?;
    let gamma = |t: f64| curve.point(t);
    let level = |h: f64| -> Vector3<f64> {
        let g = |t: f64| (gamma(t + h) - gamma(t) * 2.0 + gamma(t - h)) * (1.0 / (h * h));
        let gp = g(s + h);
        let g0 = g(s);
        let gm = g(s - h);
        let d4 = (gp - g0 * 2.0 + gm) * (1.0 / (h * h));
        let d3 = (gp - gm) * (1.0 / (2.0 * h));
        let f1 = (f(s + h) - f(s - h)) / (2.0 * h);
        let f2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
        d4 * f(s) + d3 * (2.0 * f1) + g0 * f2
    };
    let value = route_extrapolate(cfg, level);
    finite_norm(value, s)
}

/// The factored form `|(f gamma'')''|` of the same residual, nested like the
/// scalar criterion.
pub fn euclidean_curve_residual_factored<F>(
    curve: &ParamCurve,
    f: F,
    s: f64,
    cfg: &FdConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    curve.check_interior(s, cfg)?;
    check_weight_window(&f, s, cfg)?;
    let gamma = |t: f64| curve.point(t);
    let level = |h: f64| -> Vector3<f64> {
        let g = |t: f64| (gamma(t + h) - gamma(t) * 2.0 + gamma(t - h)) * (1.0 / (h * h));
        let w = |t: f64| g(t) * f(t);
        (w(s + h) - w(s) * 2.0 + w(s - h)) * (1.0 / (h * h))
    };
    let value = route_extrapolate(cfg, level);
    finite_norm(value, s)
}

fn route_extrapolate(cfg: &FdConfig, level: impl Fn(f64) -> Vector3<f64>) -> Vector3<f64> {
    if cfg.richardson {
        (level(cfg.step / 2.0) * 4.0 - level(cfg.step)) * (1.0 / 3.0)
    } else {
        level(cfg.step)
    }
}

fn finite_norm(value: Vector3<f64>, s: f64) -> Result<f64> {
    let norm = value.norm();
    if !norm.is_finite() {
        return Err(Error::NonFinite { point: vec![s] });
    }
    Ok(norm)
}

fn check_weight_window<F: Fn(f64) -> f64>(f: &F, s: f64, cfg: &FdConfig) -> Result<()> {
    for offset in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let t = s + offset * cfg.step;
        let v = f(t);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveWeight {
                point: vec![t],
                value: v,
            });
        }
    }
    Ok(())
}
