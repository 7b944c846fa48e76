//! Acceptance suite: one test per headline claim, each printing a pass/fail
//! line with its measured worst residual. Run with `--nocapture` to see the
//! lines for passing tests too.

use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fbiharm_core::curves::{
    classification_ode_residual, estimate_curvature_torsion, euclidean_curve_residual,
    euclidean_curve_residual_factored, reconstruct_curve, rigid_alignment, CurveFrame, ParamCurve,
    R3Family,
};
use fbiharm_core::functions::{
    closed_form_1d, f_biharmonic_residual, solve_1d, torus_kernel_dimension, ClosedFormWeight,
    TorusOperator,
};
use fbiharm_core::hypersurfaces::{
    cylinder_f_family, hypersurface_residual, ExponentSign, ParamSurface,
};
use fbiharm_core::maps::{bochner_residual, inversion_is_f_biharmonic, InversionFamily};
use fbiharm_core::numdiff::{self, one_dim};
use fbiharm_core::report::annulus_points;
use fbiharm_core::{FdConfig, ScalarField};

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("{criterion}: {verdict} — {detail}");
    assert!(pass, "{criterion} failed: {detail}");
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Criterion 1: over the full integer grid the numeric f-bitension verdict
/// agrees with the product predicate, with accept residuals below 1e-4 and
/// reject residuals above 1e-2 at every one of 10 fixed annulus samples.
#[test]
fn criterion_1_inversion_grid_agreement() {
    let started = Instant::now();
    let cfg = FdConfig::new(1e-4, 2, true).unwrap();
    let accept = 1e-4;
    let reject = 1e-2;

    let mut worst_accept = 0.0f64;
    let mut best_reject = f64::INFINITY;
    let mut combos = 0;
    for m in 2..=5usize {
        let points = annulus_points(m, 10, 0.5, 2.0, 42);
        for p in -2..=5i32 {
            for k in -3..=5i32 {
                let family = InversionFamily::new(m, p as f64, k as f64).unwrap();
                let predicted = inversion_is_f_biharmonic(&family).is_f_biharmonic;
                combos += 1;
                for x in &points {
                    let residual = vec_norm(&family.f_bitension_hp(x, &cfg).unwrap());
                    if predicted {
                        worst_accept = worst_accept.max(residual);
                        assert!(
                            residual < accept,
                            "accept combo (m={m}, p={p}, k={k}) residual {residual} at {x:?}"
                        );
                    } else {
                        best_reject = best_reject.min(residual);
                        assert!(
                            residual > reject,
                            "reject combo (m={m}, p={p}, k={k}) residual {residual} at {x:?}"
                        );
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "criterion 1 (inversion grid, predicate vs numeric)",
        worst_accept < accept && best_reject > reject && elapsed < 10.0,
        &format!(
            "{combos} combos; worst accept {worst_accept:.3e} < 1e-4, \
             best reject {best_reject:.3e} > 1e-2, runtime {elapsed:.2}s < 10s"
        ),
    );
}

/// Criterion 2: the two scalar examples stay below 1e-4 at 10 annulus points.
#[test]
fn criterion_2_scalar_function_examples() {
    let cfg = FdConfig::wide(1.5e-2);
    let points = annulus_points(3, 10, 0.7, 1.5, 42);

    // |x|^2 with weight 1/|x|
    let u1 = ScalarField::radial_power(3, 2.0);
    let f1 = ScalarField::radial_power(3, -1.0).require_positive();
    // x^1/|x|^2 with weight |x|
    let u2 = ScalarField::coordinate_radial_power(3, 0, -2.0);
    let f2 = ScalarField::radial_power(3, 1.0).require_positive();

    let mut worst = 0.0f64;
    for x in &points {
        worst = worst.max(f_biharmonic_residual(&u1, &f1, x, &cfg).unwrap());
        worst = worst.max(f_biharmonic_residual(&u2, &f2, x, &cfg).unwrap());
    }
    report(
        "criterion 2 (scalar f-biharmonic examples)",
        worst < 1e-4,
        &format!("worst residual {worst:.3e} < 1e-4 over 10 annulus points, both examples"),
    );
}

/// Criterion 3: solver output matches the printed closed forms up to an
/// affine function for 5 random (A, B) draws per weight family.
#[test]
fn criterion_3_one_dim_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cfg = FdConfig::default();
    let mut worst = 0.0f64;
    for which in [ClosedFormWeight::Exponential, ClosedFormWeight::Rational] {
        let f = which.weight();
        for _ in 0..5 {
            let a = rng.gen_range(-2.0..2.0);
            let b = rng.gen_range(-2.0..2.0);
            let solution = solve_1d(&f, a, b, 0.0, 0.0, (0.0, 1.0), 1.0 / 2048.0).unwrap();
            for i in 0..33 {
                let x = 0.1 + 0.8 * i as f64 / 32.0;
                let gap = one_dim::d2(
                    |t: f64| solution.eval(t) - closed_form_1d(which, a, b, 0.0, 0.0, t),
                    x,
                    &cfg,
                );
                worst = worst.max(gap.abs());
            }
        }
    }
    report(
        "criterion 3 (1-D solver vs closed forms)",
        worst < 1e-6,
        &format!("worst second-derivative gap {worst:.3e} < 1e-6, 5 draws per family"),
    );
}

/// Criterion 4: the discrete periodic operator lap(f lap .) has a
/// one-dimensional kernel for random positive weights in 1-D and 2-D.
#[test]
fn criterion_4_torus_kernel_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut all_one = true;
    for draw in 0..6 {
        let n = 32;
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
        let op = TorusOperator::new(&[n], f).unwrap();
        let dim = torus_kernel_dimension(&op, 1e-9);
        all_one &= dim == 1;
        assert_eq!(dim, 1, "1-D draw {draw}");

        let m = 16;
        let f2: Vec<f64> = (0..m * m).map(|_| rng.gen_range(0.3..3.0)).collect();
        let op2 = TorusOperator::new(&[m, m], f2).unwrap();
        let dim2 = torus_kernel_dimension(&op2, 1e-9);
        all_one &= dim2 == 1;
        assert_eq!(dim2, 1, "2-D draw {draw}");
    }
    report(
        "criterion 4 (periodic-grid kernel dimension)",
        all_one,
        "kernel dimension 1 for 6 positive weights on 32-point and 16x16 grids",
    );
}

/// Criterion 5: the classification ODE residual stays below 1e-7 for both
/// families across parameter draws, and reconstruction of the planar family
/// matches its explicit parametrization up to rigid motion within 1e-5.
#[test]
fn criterion_5_curve_classification_and_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cfg = FdConfig::default();
    let mut worst_ode = 0.0f64;
    for _ in 0..5 {
        let c2 = rng.gen_range(0.5..2.0);
        let c3 = rng.gen_range(-1.0..1.0);
        let c = rng.gen_range(0.5..2.0);
        for family in [
            R3Family::planar(1.0, c2, c3).unwrap(),
            R3Family::helix(1.0, c2, c3, c).unwrap(),
        ] {
            let profile = family.profile((-5.0, 5.0)).unwrap();
            for i in 0..50 {
                let s = -4.5 + 9.0 * i as f64 / 49.0;
                worst_ode = worst_ode.max(classification_ode_residual(&profile, s, &cfg).unwrap());
            }
        }
    }

    let family = R3Family::planar(1.0, 1.0, 0.0).unwrap();
    let rec = reconstruct_curve(
        |s| family.curvature(s).0,
        |s| family.curvature(s).1,
        (-5.0, 5.0),
        &CurveFrame::standard(Vector3::zeros()),
        1e-3,
    )
    .unwrap();
    let reference = |s: f64| {
        let r = (16.0 + s * s).sqrt();
        Vector3::new(4.0 * (r + s).ln(), r, 0.0)
    };
    let mid = rec.points.len() / 2;
    let align = rigid_alignment(&rec.frame_at(mid), &CurveFrame::standard(reference(0.0)));
    let mut sup = 0.0f64;
    for i in 0..rec.points.len() {
        sup = sup.max((align(rec.points[i]) - reference(rec.s[i])).norm());
    }

    report(
        "criterion 5 (curve ODE families + reconstruction)",
        worst_ode < 1e-7 && sup < 1e-5,
        &format!("worst ODE residual {worst_ode:.3e} < 1e-7; reconstruction sup {sup:.3e} < 1e-5"),
    );
}

/// Criterion 6: the square-root helix is measured correctly and rejected.
#[test]
fn criterion_6_negative_control_helix() {
    let curve = ParamCurve::new(
        |s: f64| {
            Vector3::new(
                (2.0 / 3.0) * (1.0 + s / 2.0).powf(1.5),
                (2.0 / 3.0) * (1.0 - s / 2.0).powf(1.5),
                s / std::f64::consts::SQRT_2,
            )
        },
        (-1.9, 1.9),
    )
    .unwrap();
    let expected = 1.0 / (4.0 * std::f64::consts::SQRT_2);
    let (kappa, tau) = estimate_curvature_torsion(&curve, 0.0, &FdConfig::wide(5e-3)).unwrap();
    let kappa_err = (kappa - expected).abs().max((tau - expected).abs());

    let helix_kappa = |s: f64| 1.0 / (2.0 * std::f64::consts::SQRT_2 * (4.0 - s * s).sqrt());
    let f = move |s: f64| helix_kappa(s).powf(-1.5);
    let residual = euclidean_curve_residual(&curve, f, 0.0, &FdConfig::wide(2e-2)).unwrap();

    report(
        "criterion 6 (square-root helix control)",
        kappa_err < 1e-6 && residual > 1e-3,
        &format!(
            "kappa/tau error {kappa_err:.3e} < 1e-6 against 1/(4 sqrt 2); \
             residual {residual:.3e} > 1e-3 rejects the curve"
        ),
    );
}

/// Criterion 7: the expanded and factored forms of the curve residual agree
/// to 1e-8 on 100 random arclength-reparametrized quintic curves.
#[test]
fn criterion_7_residual_route_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cfg = FdConfig::wide(5e-3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let coefficients: Vec<[f64; 6]> = (0..3)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-0.2..0.2)))
            .collect();
        let linear: [f64; 3] = std::array::from_fn(|_| rng.gen_range(1.2..2.0));
        let curve = reparametrized_quintic(coefficients, linear);
        let phase = rng.gen_range(0.0..6.0);
        let f = move |s: f64| 2.0 + 0.3 * (0.5 * s + phase).sin();
        for s in [-0.25, 0.0, 0.3] {
            let a = euclidean_curve_residual(&curve, f, s, &cfg).unwrap();
            let b = euclidean_curve_residual_factored(&curve, f, s, &cfg).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    report(
        "criterion 7 (expanded vs factored residual routes)",
        worst < 1e-8,
        &format!("worst route disagreement {worst:.3e} < 1e-8 over 100 random curves"),
    );
}

/// Unit-speed reparametrization of a quintic with dominant linear part:
/// arclength by fixed-panel composite Simpson, inverted with a fixed
/// Newton iteration count so the evaluation stays smooth in s.
struct Quintic {
    coefficients: Vec<[f64; 6]>,
    linear: [f64; 3],
}

impl Quintic {
    fn position(&self, t: f64) -> Vector3<f64> {
        let mut p = Vector3::zeros();
        for axis in 0..3 {
            let mut acc = 0.0;
            for c in self.coefficients[axis] {
                acc = acc * t + c;
            }
            p[axis] = acc + self.linear[axis] * t;
        }
        p
    }

    fn speed(&self, t: f64) -> f64 {
        let mut v = Vector3::zeros();
        for axis in 0..3 {
            // Horner on the derived coefficients of the quintic part
            let c = &self.coefficients[axis];
            let mut acc = 0.0;
            for (power, &coefficient) in c[..5].iter().enumerate() {
                let degree = (5 - power) as f64;
                acc = acc * t + degree * coefficient;
            }
            v[axis] = acc + self.linear[axis];
        }
        v.norm()
    }

    fn arclength(&self, t: f64) -> f64 {
        let panels = 48;
        let mut total = 0.0;
        let width = t / panels as f64;
        for i in 0..panels {
            let a = i as f64 * width;
            total += width / 6.0
                * (self.speed(a) + 4.0 * self.speed(a + width / 2.0) + self.speed(a + width));
        }
        total
    }

    fn t_of_s(&self, s: f64) -> f64 {
        let mut t = s / self.speed(0.0);
        for _ in 0..6 {
            t -= (self.arclength(t) - s) / self.speed(t);
        }
        t
    }
}

fn reparametrized_quintic(coefficients: Vec<[f64; 6]>, linear: [f64; 3]) -> ParamCurve {
    let quintic = Quintic {
        coefficients,
        linear,
    };
    ParamCurve::new(
        move |s: f64| quintic.position(quintic.t_of_s(s)),
        (-0.7, 0.7),
    )
    .expect("unit speed holds")
}

/// Criterion 8: the cylinder weight family keeps both residuals below 1e-5
/// across the parameter sweep, and the wrong weight leaves a 3/2 defect.
#[test]
fn criterion_8_cylinder_family_sweep() {
    let cfg = FdConfig::wide(1e-2);
    let mut worst = 0.0f64;
    let mut combos = 0;
    for &radius in &[0.5, 1.0, 2.0] {
        let surface = ParamSurface::cylinder(radius, (-3.0, 3.0)).unwrap();
        for &c1 in &[0.0, -1.0] {
            for &c2 in &[1.0, 2.0] {
                for sign in [ExponentSign::Plus, ExponentSign::Minus] {
                    combos += 1;
                    let f = ScalarField::new(2, move |x: &[f64]| {
                        cylinder_f_family(radius, c1, c2, sign, x[1]).unwrap_or(f64::NAN)
                    });
                    for &uv in &[(1.0, 0.4), (3.5, -1.2), (5.0, 2.0)] {
                        let (normal, tangent) =
                            hypersurface_residual(&surface, &f, uv, 0.0, &cfg).unwrap();
                        worst = worst.max(normal).max(tangent);
                    }
                }
            }
        }
    }

    let surface = ParamSurface::cylinder(1.0, (-3.0, 3.0)).unwrap();
    let wrong = ScalarField::new(2, |x: &[f64]| (2.0 * x[1]).exp());
    let (normal, _) = hypersurface_residual(&surface, &wrong, (1.2, 0.4), 0.0, &cfg).unwrap();
    let control = (normal - 1.5).abs();

    report(
        "criterion 8 (cylinder weight family)",
        worst < 1e-5 && control < 1e-3,
        &format!(
            "{combos}-combination sweep worst residual {worst:.3e} < 1e-5; \
             wrong-weight normal defect within {control:.3e} of 3/2"
        ),
    );
}

/// Criterion 9: the Bochner-type identity holds along the (3,2,4) inversion
/// and detects a substituted wrong weight.
#[test]
fn criterion_9_bochner_identity() {
    let family = InversionFamily::new(3, 2.0, 4.0).unwrap();
    let phi = family.map();
    let f = family.weight();
    let wrong = ScalarField::radial_power(3, 2.0).require_positive();
    let cfg = FdConfig::wide(1e-2);
    let mut worst = 0.0f64;
    let mut control = 0.0f64;
    for x in annulus_points(3, 10, 0.8, 1.5, 42) {
        worst = worst.max(bochner_residual(&phi, &f, &x, &cfg).unwrap());
        control = control.max(bochner_residual(&phi, &wrong, &x, &cfg).unwrap());
    }
    report(
        "criterion 9 (Bochner identity)",
        worst < 1e-3 && control > 1e-2,
        &format!("identity residual {worst:.3e} < 1e-3; wrong-weight control {control:.3e} > 1e-2"),
    );
}

/// Criterion 10: the Laplacian converges at second order on a transcendental
/// field under step halving.
#[test]
fn criterion_10_fd_convergence_order() {
    let u = ScalarField::new(2, |x: &[f64]| x[0].sin() * x[1].exp());
    let x = [0.7, 0.3];
    let err = |h: f64| {
        let cfg = FdConfig::new(h, 2, false).unwrap();
        numdiff::laplacian(&u, &x, &cfg).unwrap().abs()
    };
    let order = (err(0.1) / err(0.05)).log2();
    report(
        "criterion 10 (FD convergence order)",
        order >= 1.9,
        &format!("observed order {order:.3} >= 1.9"),
    );
}
