//! Tension, bitension, and f-bitension fields for maps into Euclidean space,
//! plus the inversion family `phi(x) = x / |x|^p` with weight `f(x) = |x|^k`
//! and its algebraic classification.
//!
//! For a map into R^n every covariant object reduces componentwise: the
//! tension field is the vector of Laplacians, the bitension field the vector
//! of bi-Laplacians, and the connection term along `grad f` becomes the flat
//! directional derivative of the tension field. The f-bitension of component
//! `a` is therefore
//!
//! ```text
//! f * lap^2 phi^a + (lap f) * lap phi^a + 2 <grad f, grad lap phi^a>
//! ```

use std::fmt;

use crate::fields::{MapField, ScalarField};
use crate::hp::{self, DdScalarField};
use crate::numdiff::{self, FdConfig};
use crate::{Error, Result};

/// Componentwise Laplacian vector: the tension field of `phi` at `x`.
pub fn tension(phi: &MapField, x: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    phi.components()
        .iter()
        .map(|c| numdiff::laplacian(c, x, cfg))
        .collect()
}

/// Componentwise bi-Laplacian vector: the bitension field of `phi` at `x`.
pub fn bitension(phi: &MapField, x: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    phi.components()
        .iter()
        .map(|c| numdiff::bilaplacian(c, x, cfg))
        .collect()
}

/// The f-bitension field of `phi` at `x` for the weight `f`.
///
/// Vanishing of this vector at every point is the f-biharmonicity criterion.
pub fn f_bitension(phi: &MapField, f: &ScalarField, x: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
    let f_x = weight_value(f, x, cfg)?;
    let lap_f = numdiff::laplacian(f, x, cfg)?;
    let grad_f = numdiff::gradient(f, x, cfg)?;
    phi.components()
        .iter()
        .map(|c| {
            let lap_c = numdiff::laplacian(c, x, cfg)?;
            let bilap_c = numdiff::bilaplacian(c, x, cfg)?;
            let grad_lap_c = numdiff::gradient_of_laplacian(c, x, cfg)?;
            let transport: f64 = grad_f.iter().zip(&grad_lap_c).map(|(a, b)| a * b).sum();
            Ok(f_x * bilap_c + lap_f * lap_c + 2.0 * transport)
        })
        .collect()
}

/// Residual of the Bochner-type identity along an f-biharmonic map into R^n:
///
/// ```text
/// lap(f |tau|^2 / 2)  =  f * sum_i |d_i tau|^2  -  (lap f) |tau|^2 / 2
/// ```
///
/// (the target curvature term is identically zero for Euclidean targets).
/// Near-zero output certifies the identity numerically; it is only meaningful
/// when `phi` is f-biharmonic for this `f`.
pub fn bochner_residual(phi: &MapField, f: &ScalarField, x: &[f64], cfg: &FdConfig) -> Result<f64> {
    weight_value(f, x, cfg)?;
    let m = phi.dim_in();

    // LHS: Laplacian of the derived density field y -> f(y) |tau_h(y)|^2 / 2.
    let margin = cfg.singular_margin;
    let density = {
        let phi = phi.clone();
        let f = f.clone();
        let inner = *cfg;
        move |y: &[f64], h: f64| -> Result<f64> {
            let mut sum = 0.0;
            for c in phi.components() {
                let mut cfg_h = inner;
                cfg_h.step = h;
                cfg_h.richardson = false;
                let t = numdiff::laplacian(c, y, &cfg_h)?;
                sum += t * t;
            }
            Ok(0.5 * f.eval_checked(y, margin)? * sum)
        }
    };
    let lhs = {
        let one_level = |h: f64| -> Result<f64> {
            let center = density(x, h)?;
            let mut sum = 0.0;
            for axis in 0..m {
                let mut yp = x.to_vec();
                yp[axis] += h;
                let mut ym = x.to_vec();
                ym[axis] -= h;
                sum += (density(&yp, h)? - 2.0 * center + density(&ym, h)?) / (h * h);
            }
            Ok(sum)
        };
        if cfg.richardson {
            (4.0 * one_level(cfg.step / 2.0)? - one_level(cfg.step)?) / 3.0
        } else {
            one_level(cfg.step)?
        }
    };

    // RHS: f |grad tau|^2 - (lap f) |tau|^2 / 2, all at the base point.
    let f_x = f.eval_checked(x, margin)?;
    let lap_f = numdiff::laplacian(f, x, cfg)?;
    let mut grad_tau_sq = 0.0;
    let mut tau_sq = 0.0;
    for c in phi.components() {
        let t = numdiff::laplacian(c, x, cfg)?;
        tau_sq += t * t;
        let g = numdiff::gradient_of_laplacian(c, x, cfg)?;
        grad_tau_sq += g.iter().map(|v| v * v).sum::<f64>();
    }
    let rhs = f_x * grad_tau_sq - 0.5 * lap_f * tau_sq;

    Ok((lhs - rhs).abs())
}

fn weight_value(f: &ScalarField, x: &[f64], cfg: &FdConfig) -> Result<f64> {
    let value = f.eval_checked(x, cfg.singular_margin)?;
    if value <= 0.0 {
        return Err(Error::NonPositiveWeight {
            point: x.to_vec(),
            value,
        });
    }
    Ok(value)
}

/// The family `phi(x) = x / |x|^p` on R^m minus the origin, weighted by
/// `f(x) = |x|^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionFamily {
    m: usize,
    p: f64,
    k: f64,
}

/// One satisfied branch of the product classification
/// `p (p - m) (k - p - 2) (k - p + m - 2) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InversionCase {
    /// (i) `p = 0`: the identity map, harmonic.
    PZero,
    /// (ii) `p = m`: the degree-`m` inversion, harmonic.
    PEqualsM,
    /// (iii) `k = p + 2`.
    KEqualsPPlusTwo,
    /// (iv) `k = p + 2 - m`.
    KEqualsPPlusTwoMinusM,
}

impl fmt::Display for InversionCase {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            InversionCase::PZero => "(i) p = 0",
            InversionCase::PEqualsM => "(ii) p = m",
            InversionCase::KEqualsPPlusTwo => "(iii) k = p + 2",
            InversionCase::KEqualsPPlusTwoMinusM => "(iv) k = p + 2 - m",
        };
        out.write_str(label)
    }
}

/// Outcome of the algebraic classification.
#[derive(Clone, Debug, PartialEq)]
pub struct InversionClassification {
    pub is_f_biharmonic: bool,
    pub cases: Vec<InversionCase>,
}

impl InversionFamily {
    pub fn new(m: usize, p: f64, k: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput(format!(
                "inversion family needs m >= 2, got {m}"
            )));
        }
        Ok(Self { m, p, k })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// The map `x -> x |x|^-p` as a component field list. The origin is
    /// always declared singular, matching the family's domain.
    pub fn map(&self) -> MapField {
        let components = (0..self.m)
            .map(|i| {
                ScalarField::coordinate_radial_power(self.m, i, -self.p).with_singular_origin()
            })
            .collect();
        MapField::new(components).expect("family components are consistent")
    }

    /// The weight `f(x) = |x|^k`, positivity-checked at sampling time.
    pub fn weight(&self) -> ScalarField {
        ScalarField::radial_power(self.m, self.k)
            .with_singular_origin()
            .require_positive()
    }

    /// Double-double f-bitension at `x`: the same three-term formula with
    /// every stencil evaluated in extended precision. This is the sweep
    /// backend; the `f64` path's `h^-4` rounding floor sits above the accept
    /// gate for the steeper family members.
    pub fn f_bitension_hp(&self, x: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
        let f = DdScalarField::radial_power(self.m, self.k);
        let lap_f = hp::laplacian_value(&f, x, cfg)?;
        let grad_f = hp::gradient_value(&f, x, cfg)?;
        let f_x = {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            crate::dd::Dd::from_f64(r).powf(self.k)
        };
        (0..self.m)
            .map(|i| {
                let u = DdScalarField::coordinate_radial_power(self.m, i, -self.p);
                let lap_u = hp::laplacian_value(&u, x, cfg)?;
                let bilap_u = hp::bilaplacian_value(&u, x, cfg)?;
                let grad_lap_u = hp::gradient_of_laplacian_value(&u, x, cfg)?;
                let mut transport = crate::dd::Dd::ZERO;
                for (a, b) in grad_f.iter().zip(&grad_lap_u) {
                    transport = transport + *a * *b;
                }
                Ok((f_x * bilap_u + lap_f * lap_u + transport * 2.0).to_f64())
            })
            .collect()
    }

    /// Double-double bitension (the `f = 1` special case).
    pub fn bitension_hp(&self, x: &[f64], cfg: &FdConfig) -> Result<Vec<f64>> {
        (0..self.m)
            .map(|i| {
                let u = DdScalarField::coordinate_radial_power(self.m, i, -self.p);
                Ok(hp::bilaplacian_value(&u, x, cfg)?.to_f64())
            })
            .collect()
    }

    /// Exact f-bitension component along the family:
    /// `p (p - m) (k - p - 2) (k - p + m - 2) x_i |x|^(k - p - 4)`.
    pub fn f_bitension_exact(&self, x: &[f64], i: usize) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.classification_product() * x[i] * r.powf(self.k - self.p - 4.0)
    }

    pub fn classification_product(&self) -> f64 {
        let m = self.m as f64;
        self.p * (self.p - m) * (self.k - self.p - 2.0) * (self.k - self.p + m - 2.0)
    }
}

/// Algebraic classification of the inversion family: the map is f-biharmonic
/// exactly when `p (p - m) (k - p - 2) (k - p + m - 2) = 0`. Each factor is
/// tested against a 1e-12 tolerance and every satisfied case is reported.
pub fn inversion_is_f_biharmonic(family: &InversionFamily) -> InversionClassification {
    const TOL: f64 = 1e-12;
    let m = family.m as f64;
    let mut cases = Vec::new();
    if family.p.abs() <= TOL {
        cases.push(InversionCase::PZero);
    }
    if (family.p - m).abs() <= TOL {
        cases.push(InversionCase::PEqualsM);
    }
    if (family.k - family.p - 2.0).abs() <= TOL {
        cases.push(InversionCase::KEqualsPPlusTwo);
    }
    if (family.k - family.p + m - 2.0).abs() <= TOL {
        cases.push(InversionCase::KEqualsPPlusTwoMinusM);
    }
    InversionClassification {
        is_f_biharmonic: !cases.is_empty(),
        cases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::annulus_points;
    use approx::assert_abs_diff_eq;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn wide(step: f64) -> FdConfig {
        FdConfig::wide(step)
    }

    #[test]
    fn tension_of_identity_vanishes() {
        let phi = MapField::identity(3);
        let t = tension(&phi, &[0.4, -1.2, 2.0], &FdConfig::default()).unwrap();
        assert!(norm(&t) < 1e-7, "got {t:?}");
    }

    #[test]
    fn tension_of_inversion_map() {
        // lap(x^i |x|^-2) = p(p - m) x^i |x|^(-p-2), p = 2, m = 3.
        let phi = InversionFamily::new(3, 2.0, 0.0).unwrap().map();
        let t = tension(&phi, &[1.0, 0.0, 0.0], &FdConfig::default()).unwrap();
        assert_abs_diff_eq!(t[0], -2.0, epsilon = 1e-6);
        assert!(t[1].abs() < 1e-6 && t[2].abs() < 1e-6);
    }

    #[test]
    fn tension_of_norm_square_pair() {
        let phi = MapField::new(vec![
            ScalarField::radial_power(3, 2.0),
            ScalarField::constant(3, 0.0),
        ])
        .unwrap();
        let t = tension(&phi, &[0.3, 0.8, -0.1], &FdConfig::default()).unwrap();
        assert_abs_diff_eq!(t[0], 6.0, epsilon = 1e-7);
        assert_eq!(t[1], 0.0);
    }

    #[test]
    fn bitension_of_quadratic_map_vanishes() {
        let phi = MapField::new(vec![
            ScalarField::new(3, |x: &[f64]| x[0] * x[0] - x[1] * x[2]),
            ScalarField::new(3, |x: &[f64]| x[1] * x[1] + 2.0 * x[0]),
        ])
        .unwrap();
        let b = bitension(&phi, &[0.5, -0.4, 0.8], &wide(1e-2)).unwrap();
        assert!(norm(&b) < 1e-5, "got {b:?}");
    }

    #[test]
    fn bitension_of_proper_biharmonic_inversion_m4() {
        // p = m - 2 = 2 makes x/|x|^2 biharmonic on R^4.
        let fam = InversionFamily::new(4, 2.0, 0.0).unwrap();
        let phi = fam.map();
        for x in annulus_points(4, 5, 1.5, 1.5, 411) {
            let b = bitension(&phi, &x, &wide(1e-2)).unwrap();
            assert!(norm(&b) < 1e-4, "residual {} at {x:?}", norm(&b));
        }
    }

    #[test]
    fn bitension_of_kelvin_component_m3() {
        // Oracle by the radial product rule: for u = x^1 g(r),
        // lap u = x^1 (g'' + (m+1) g'/r). With g = |x|^-1 and m = 3 this
        // gives lap u = -2 x^1 |x|^-3, and applying the rule once more the
        // bi-Laplacian cancels to zero exactly: x/|x| has biharmonic
        // components on R^3 (p = m - 2).
        let g_lap = |c: f64, alpha: f64, r: f64| {
            // lap(c x^1 r^alpha) = c x^1 [radial_laplacian-type term]
            c * (crate::numdiff::radial_laplacian(alpha, 3, r) / r.powf(alpha)
                + 2.0 * alpha * r.powf(alpha - 2.0) / r.powf(alpha))
        };
        // first application: coefficient of x^1 r^{-3}
        let r = 1.0;
        let after_one = g_lap(1.0, -1.0, r); // = -2
        assert_abs_diff_eq!(after_one, -2.0, epsilon = 1e-12);
        let after_two = g_lap(after_one, -3.0, r);
        assert_abs_diff_eq!(after_two, 0.0, epsilon = 1e-12);

        let u = ScalarField::coordinate_radial_power(3, 0, -1.0);
        let b = numdiff::bilaplacian(&u, &[1.0, 0.0, 0.0], &wide(1e-2)).unwrap();
        assert!(b.abs() < 1e-4, "got {b}");
    }

    #[test]
    fn f_bitension_of_affine_map_vanishes_for_any_weight() {
        let phi = MapField::new(vec![
            ScalarField::new(3, |x: &[f64]| 2.0 * x[0] - x[2] + 1.0),
            ScalarField::new(3, |x: &[f64]| x[1] + 4.0),
        ])
        .unwrap();
        let f = ScalarField::new(3, |x: &[f64]| (x[0] + 2.0 * x[1]).exp() + 1.0);
        let v = f_bitension(&phi, &f, &[0.2, -0.1, 0.66], &wide(3e-2)).unwrap();
        assert!(norm(&v) < 1e-6, "got {v:?}");
    }

    #[test]
    fn f_bitension_of_proper_family_member_vanishes() {
        // m = 3, p = 2, k = 4: a proper f-biharmonic map.
        let fam = InversionFamily::new(3, 2.0, 4.0).unwrap();
        let phi = fam.map();
        let f = fam.weight();
        let hp_cfg = FdConfig::new(1e-4, 2, true).unwrap();
        let f64_cfg = wide(1e-2);
        for x in annulus_points(3, 20, 0.5, 2.0, 42) {
            let v = fam.f_bitension_hp(&x, &hp_cfg).unwrap();
            assert!(norm(&v) < 1e-6, "hp residual {} at {x:?}", norm(&v));
            let v = f_bitension(&phi, &f, &x, &f64_cfg).unwrap();
            assert!(norm(&v) < 1e-4, "f64 residual {} at {x:?}", norm(&v));
        }
    }

    #[test]
    fn f_bitension_nonmember_matches_closed_form() {
        // (m, p, k) = (3, 1, 1): product = 4, first component 4 at (1,0,0).
        let fam = InversionFamily::new(3, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(fam.classification_product(), 4.0, epsilon = 1e-12);
        let x = [1.0, 0.0, 0.0];
        assert_abs_diff_eq!(fam.f_bitension_exact(&x, 0), 4.0, epsilon = 1e-12);

        let v = f_bitension(&fam.map(), &fam.weight(), &x, &wide(5e-3)).unwrap();
        assert_abs_diff_eq!(v[0], 4.0, epsilon = 1e-4);
        let v_hp = fam
            .f_bitension_hp(&x, &FdConfig::new(1e-4, 2, true).unwrap())
            .unwrap();
        assert_abs_diff_eq!(v_hp[0], 4.0, epsilon = 1e-8);
    }

    #[test]
    fn f_bitension_with_unit_weight_equals_bitension() {
        let phi = MapField::new(vec![
            ScalarField::new(3, |x: &[f64]| x[0].powi(3) * x[1] - x[2] * x[2]),
            ScalarField::new(3, |x: &[f64]| x[1] * x[1] * x[2]),
        ])
        .unwrap();
        let one = ScalarField::constant(3, 1.0);
        let cfg = wide(1e-2);
        let x = [0.7, -0.2, 0.4];
        let a = f_bitension(&phi, &one, &x, &cfg).unwrap();
        let b = bitension(&phi, &x, &cfg).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn f_bitension_is_linear_in_the_map() {
        let u = ScalarField::new(2, |x: &[f64]| x[0].powi(4) + x[1] * x[1] * x[0]);
        let v = ScalarField::new(2, |x: &[f64]| x[1].powi(4) - x[0] * x[0]);
        let combo = ScalarField::new(2, |x: &[f64]| {
            2.5 * (x[0].powi(4) + x[1] * x[1] * x[0]) - 1.5 * (x[1].powi(4) - x[0] * x[0])
        });
        let f = ScalarField::new(2, |x: &[f64]| 1.0 + x[0] * x[0] + x[1] * x[1]);
        let cfg = FdConfig::new(0.25, 2, false).unwrap();
        let x = [0.35, -0.6];
        let phi_u = MapField::new(vec![u]).unwrap();
        let phi_v = MapField::new(vec![v]).unwrap();
        let phi_c = MapField::new(vec![combo]).unwrap();
        let lhs = f_bitension(&phi_c, &f, &x, &cfg).unwrap()[0];
        let rhs = 2.5 * f_bitension(&phi_u, &f, &x, &cfg).unwrap()[0]
            - 1.5 * f_bitension(&phi_v, &f, &x, &cfg).unwrap()[0];
        assert!((lhs - rhs).abs() < 1e-9, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn remark_biharmonic_cases_k_zero() {
        // With f = 1, cases (iii) and (iv) collapse to p = -2 or p = m - 2.
        let cfg = FdConfig::new(1e-4, 2, true).unwrap();
        for m in [3usize, 4, 5] {
            let fam = InversionFamily::new(m, m as f64 - 2.0, 0.0).unwrap();
            for x in annulus_points(m, 4, 1.0, 2.0, 9 + m as u64) {
                let b = fam.bitension_hp(&x, &cfg).unwrap();
                assert!(norm(&b) < 1e-4, "m={m} residual {}", norm(&b));
            }
        }
        // p = -2: components are cubic polynomials.
        let fam = InversionFamily::new(3, -2.0, 0.0).unwrap();
        for x in annulus_points(3, 4, 1.0, 2.0, 77) {
            let b = fam.bitension_hp(&x, &cfg).unwrap();
            assert!(norm(&b) < 1e-4, "p=-2 residual {}", norm(&b));
        }
    }

    #[test]
    fn classification_cases() {
        let c = inversion_is_f_biharmonic(&InversionFamily::new(3, 2.0, 4.0).unwrap());
        assert!(c.is_f_biharmonic);
        assert_eq!(c.cases, vec![InversionCase::KEqualsPPlusTwo]);

        let c = inversion_is_f_biharmonic(&InversionFamily::new(3, 2.0, 1.0).unwrap());
        assert!(c.is_f_biharmonic);
        assert_eq!(c.cases, vec![InversionCase::KEqualsPPlusTwoMinusM]);

        let c = inversion_is_f_biharmonic(&InversionFamily::new(3, 1.0, 1.0).unwrap());
        assert!(!c.is_f_biharmonic);
        assert!(c.cases.is_empty());

        let c = inversion_is_f_biharmonic(&InversionFamily::new(3, 0.0, 7.0).unwrap());
        assert_eq!(c.cases, vec![InversionCase::PZero]);

        let c = inversion_is_f_biharmonic(&InversionFamily::new(4, 4.0, 0.0).unwrap());
        assert_eq!(c.cases, vec![InversionCase::PEqualsM]);
    }

    #[test]
    fn bochner_identity_for_harmonic_map() {
        let phi = MapField::new(vec![
            ScalarField::new(3, |x: &[f64]| x[0] + 2.0 * x[1]),
            ScalarField::new(3, |x: &[f64]| x[2] - x[0]),
        ])
        .unwrap();
        let f = ScalarField::new(3, |x: &[f64]| 1.0 + x[0] * x[0]);
        let r = bochner_residual(&phi, &f, &[0.3, 0.4, 0.5], &wide(1e-2)).unwrap();
        assert!(r < 1e-8, "got {r}");
    }

    #[test]
    fn bochner_identity_for_inversion_family() {
        let fam = InversionFamily::new(3, 2.0, 4.0).unwrap();
        let phi = fam.map();
        let f = fam.weight();
        let cfg = wide(1e-2);
        for x in annulus_points(3, 10, 0.8, 1.5, 42) {
            let r = bochner_residual(&phi, &f, &x, &cfg).unwrap();
            assert!(r < 1e-3, "residual {r} at {x:?}");
        }
    }

    #[test]
    fn bochner_check_rejects_wrong_weight() {
        // Substituting |x|^2 for the correct |x|^4 breaks the identity by
        // -8 |x|^-6 analytically, so some sampled point must exceed 1e-2.
        let fam = InversionFamily::new(3, 2.0, 4.0).unwrap();
        let phi = fam.map();
        let wrong = ScalarField::radial_power(3, 2.0).require_positive();
        let cfg = wide(1e-2);
        let worst = annulus_points(3, 10, 0.8, 1.5, 42)
            .iter()
            .map(|x| bochner_residual(&phi, &wrong, x, &cfg).unwrap())
            .fold(0.0f64, f64::max);
        assert!(worst > 1e-2, "wrong-weight residual only {worst}");
    }

    #[test]
    fn nonpositive_weight_is_rejected() {
        let phi = MapField::identity(2);
        let f = ScalarField::new(2, |x: &[f64]| x[0]); // not positive everywhere
        let err = f_bitension(&phi, &f, &[-1.0, 0.0], &FdConfig::default());
        assert!(matches!(err, Err(Error::NonPositiveWeight { .. })));
    }

    #[test]
    fn family_fields_declare_the_origin_singular() {
        // even the harmless exponents keep the family's domain R^m \ {0}
        for (p, k) in [(0.0, 0.0), (2.0, 4.0), (-2.0, 1.0)] {
            let fam = InversionFamily::new(3, p, k).unwrap();
            for component in fam.map().components() {
                assert!(component.singular_within(&[0.0; 3], 1e-6));
            }
            assert!(fam.weight().singular_within(&[0.0; 3], 1e-6));
        }
    }
}
