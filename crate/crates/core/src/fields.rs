//! Scalar and vector-valued fields on open subsets of R^m.
//!
//! Singular sets are declared, never detected: a field built from an
//! origin-singular expression such as `|x|^alpha` must register the origin so
//! that stencil evaluation can refuse points inside the configured margin.

use std::sync::Arc;

use crate::{Error, Result};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
/// Returns true when `point` lies within `margin` of the singular set.
type SingularFn = dyn Fn(&[f64], f64) -> bool + Send + Sync;

/// A real-valued function on an open subset of R^m with a declared singular
/// set and an optional positivity requirement (used for weights `f`).
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: Arc<EvalFn>,
    singular: Arc<SingularFn>,
    positivity_required: bool,
}

impl ScalarField {
    /// Field with no singular set.
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
            singular: Arc::new(|_, _| false),
            positivity_required: false,
        }
    }

    /// Declares a singular set through a margin-aware predicate.
    pub fn with_singular_set<S>(mut self, singular: S) -> Self
    where
        S: Fn(&[f64], f64) -> bool + Send + Sync + 'static,
    {
        self.singular = Arc::new(singular);
        self
    }

    /// Declares the origin as the singular set.
    pub fn with_singular_origin(self) -> Self {
        self.with_singular_set(|x, margin| norm(x) < margin)
    }

    /// Marks the field as a weight that must stay positive wherever sampled.
    pub fn require_positive(mut self) -> Self {
        self.positivity_required = true;
        self
    }

    /// The constant field `c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, move |_| c)
    }

    /// `x -> |x|^alpha`. Registers the origin unless the exponent makes the
    /// field polynomial (a nonnegative even integer).
    pub fn radial_power(dim: usize, alpha: f64) -> Self {
        let field = Self::new(dim, move |x: &[f64]| norm(x).powf(alpha));
        let polynomial = alpha >= 0.0 && alpha.fract() == 0.0 && (alpha as i64) % 2 == 0;
        if polynomial {
            field
        } else {
            field.with_singular_origin()
        }
    }

    /// `x -> x_i * |x|^alpha` (the building block of the inversion family).
    pub fn coordinate_radial_power(dim: usize, i: usize, alpha: f64) -> Self {
        assert!(i < dim, "coordinate index out of range");
        let field = Self::new(dim, move |x: &[f64]| x[i] * norm(x).powf(alpha));
        if alpha == 0.0 {
            field
        } else {
            field.with_singular_origin()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positivity_required(&self) -> bool {
        self.positivity_required
    }

    /// True when `x` lies within `margin` of the declared singular set.
    pub fn singular_within(&self, x: &[f64], margin: f64) -> bool {
        (self.singular)(x, margin)
    }

    /// Raw evaluation without any admissibility checks.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Evaluation with the margin, finiteness, and positivity checks applied.
    pub fn eval_checked(&self, x: &[f64], margin: f64) -> Result<f64> {
        debug_assert_eq!(x.len(), self.dim);
        if self.singular_within(x, margin) {
            return Err(Error::SingularEvaluation {
                point: x.to_vec(),
                margin,
            });
        }
        let value = (self.eval)(x);
        if !value.is_finite() {
            return Err(Error::NonFinite { point: x.to_vec() });
        }
        if self.positivity_required && value <= 0.0 {
            return Err(Error::NonPositiveWeight {
                point: x.to_vec(),
                value,
            });
        }
        Ok(value)
    }

    pub(crate) fn singular_predicate(&self) -> Arc<SingularFn> {
        Arc::clone(&self.singular)
    }
}

/// A map R^m -> R^n given componentwise. All components share the domain
/// dimension and the singular set.
#[derive(Clone)]
pub struct MapField {
    dim_in: usize,
    dim_out: usize,
    components: Vec<ScalarField>,
}

impl MapField {
    /// Builds a map from component fields, enforcing that every component has
    /// the same domain dimension. The first component's singular set is
    /// imposed on all of them.
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput(
                "map needs at least one component".into(),
            ));
        }
        let dim_in = components[0].dim;
        if components.iter().any(|c| c.dim != dim_in) {
            return Err(Error::InvalidInput(
                "map components must share the domain dimension".into(),
            ));
        }
        let singular = components[0].singular_predicate();
        let components = components
            .into_iter()
            .map(|mut c| {
                c.singular = Arc::clone(&singular);
                c
            })
            .collect::<Vec<_>>();
        Ok(Self {
            dim_in,
            dim_out: components.len(),
            components,
        })
    }

    /// The identity map on R^m.
    pub fn identity(m: usize) -> Self {
        let components = (0..m)
            .map(|i| ScalarField::new(m, move |x: &[f64]| x[i]))
            .collect();
        Self::new(components).expect("identity components are consistent")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, alpha: usize) -> &ScalarField {
        &self.components[alpha]
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_margin_respected() {
        let f = ScalarField::radial_power(3, -1.0);
        assert!(f.eval_checked(&[0.001, 0.0, 0.0], 0.01).is_err());
        let v = f.eval_checked(&[2.0, 0.0, 0.0], 0.01).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quadratic_radial_power_has_no_singular_set() {
        let f = ScalarField::radial_power(3, 2.0);
        assert!(!f.singular_within(&[0.0, 0.0, 0.0], 1.0));
        assert_eq!(f.eval_checked(&[0.0, 0.0, 0.0], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn positivity_enforced_for_weights() {
        let f = ScalarField::new(1, |x: &[f64]| x[0]).require_positive();
        assert!(f.eval_checked(&[-1.0], 0.0).is_err());
        assert!(f.eval_checked(&[1.0], 0.0).is_ok());
    }

    #[test]
    fn map_components_must_agree_on_dimension() {
        let a = ScalarField::new(2, |x: &[f64]| x[0]);
        let b = ScalarField::new(3, |x: &[f64]| x[1]);
        assert!(MapField::new(vec![a, b]).is_err());
    }
}
