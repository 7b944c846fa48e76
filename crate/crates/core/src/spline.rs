//! Cubic spline interpolation on a uniform grid.
//!
//! Used to turn quadrature tables and integrator output back into evaluable
//! fields. Clamped end conditions take exact end derivatives when the caller
//! knows them, which keeps the interpolation error at `O(step^4)` uniformly.

/// C^2 cubic spline through `values[i]` at `x = start + i * step`.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    start: f64,
    step: f64,
    values: Vec<f64>,
    /// second derivatives at the knots
    moments: Vec<f64>,
}

impl CubicSpline {
    /// Natural spline: zero second derivative at both ends.
    pub fn natural(start: f64, step: f64, values: Vec<f64>) -> Self {
        Self::build(start, step, values, None)
    }

    /// Clamped spline with prescribed end slopes.
    pub fn clamped(start: f64, step: f64, values: Vec<f64>, d_start: f64, d_end: f64) -> Self {
        Self::build(start, step, values, Some((d_start, d_end)))
    }

    fn build(start: f64, step: f64, values: Vec<f64>, slopes: Option<(f64, f64)>) -> Self {
        let n = values.len();
        assert!(n >= 3, "spline needs at least three samples");
        assert!(step > 0.0);
        let h = step;

        // Tridiagonal system for the knot second derivatives (moments).
        let mut diag = vec![2.0; n];
        let mut off = vec![0.0; n]; // sub/super coefficient per row (symmetric weights)
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            off[i] = 0.5;
            rhs[i] = 3.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
        }
        match slopes {
            Some((d0, dn)) => {
                off[0] = 1.0;
                rhs[0] = 6.0 / h * ((values[1] - values[0]) / h - d0);
                off[n - 1] = 1.0;
                rhs[n - 1] = 6.0 / h * (dn - (values[n - 1] - values[n - 2]) / h);
            }
            None => {
                // natural: moment = 0 at the ends
                diag[0] = 1.0;
                diag[n - 1] = 1.0;
            }
        }

        // Thomas algorithm. Row 0 couples to row 1 with weight off[0]; interior
        // rows couple both ways with weight off[i]; the last row couples back
        // with off[n-1].
        let mut c = vec![0.0; n]; // modified super-diagonal
        let mut d = vec![0.0; n]; // modified rhs
        c[0] = off[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let sub = off[i];
            let denom = diag[i] - sub * c[i - 1];
            let sup = if i + 1 < n { off[i] } else { 0.0 };
            c[i] = sup / denom;
            d[i] = (rhs[i] - sub * d[i - 1]) / denom;
        }
        let mut moments = vec![0.0; n];
        moments[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            moments[i] = d[i] - c[i] * moments[i + 1];
        }

        Self {
            start,
            step,
            values,
            moments,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    /// Evaluates the spline; the end cubics extend beyond the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (x - self.start) / self.step;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        let h = self.step;
        let a = x - (self.start + i as f64 * h);
        let b = h - a;
        // standard moment form over the cell [x_i, x_i+1]
        (self.moments[i] * b * b * b + self.moments[i + 1] * a * a * a) / (6.0 * h)
            + (self.values[i] / h - self.moments[i] * h / 6.0) * b
            + (self.values[i + 1] / h - self.moments[i + 1] * h / 6.0) * a
    }
}
