//! Analytic model of global depolarizing noise on echo-verified estimates.
//!
//! With errors arriving at rate q per unit physical time, the measured
//! expectation obeys
//!
//! ```text
//!   ⟨X⊗𝒪⟩ + i⟨Y⊗𝒪⟩ = e^{−qt}·λ·⟨0|𝒪e^{iHt}|0⟩
//!                    + λ·q·e^{−qt} ∫₀ᵗ dt₁ K_𝒪(t−t₁)·F(t₁) ,
//! ```
//!
//! where F solves the Volterra equation F(t) = g(t) + q∫₀ᵗ h(t−s)F(s) ds,
//! g(t) = ⟨0|e^{iHt}|0⟩, h(t) = Tr[e^{iHt}]/2^L, and the kernel K is h for
//! 𝒪 = I and g/2^L for 𝒪 = |0⟩⟨0|. The normalizing dimension is the true
//! register dimension 2^L (L = N/2 qubits), not 2^N.
//!
//! The solver marches the trapezoidal rule on a uniform grid; the kernel is
//! smooth, so the O(h²) quadrature error sits far below the statistical
//! errors of anything it is compared against.

use num_complex::Complex64;

use crate::error::CoreError;

/// The system observable entering the trace kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceObservable {
    Identity,
    ProjectZero,
}

/// Tabulated g(t) and h(t) for one instance (or an ensemble average) on a
/// uniform time grid starting at 0.
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    pub times: Vec<f64>,
    /// g(t) = ⟨0|e^{iHt}|0⟩.
    pub g: Vec<Complex64>,
    /// h(t) = Tr[e^{iHt}]/2^L.
    pub h: Vec<Complex64>,
    pub l_qubits: usize,
}

impl AmplitudeTable {
    pub fn step(&self) -> Result<f64, CoreError> {
        if self.times.len() < 2 {
            return Err(CoreError::invalid("times", "need at least two grid points"));
        }
        if self.times.len() != self.g.len() || self.times.len() != self.h.len() {
            return Err(CoreError::invalid("table", "g/h length mismatch"));
        }
        if self.times[0] != 0.0 {
            return Err(CoreError::invalid("times", "grid must start at 0"));
        }
        let step = self.times[1] - self.times[0];
        if step <= 0.0 {
            return Err(CoreError::invalid("times", "grid must increase"));
        }
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
                return Err(CoreError::invalid("times", "grid must be uniform"));
            }
        }
        if (self.g[0] - Complex64::new(1.0, 0.0)).norm() > 1e-9
            || (self.h[0] - Complex64::new(1.0, 0.0)).norm() > 1e-9
        {
            return Err(CoreError::invalid("table", "g(0) and h(0) must equal 1"));
        }
        Ok(step)
    }

    fn kernel(&self, observable: TraceObservable, idx: usize) -> Complex64 {
        match observable {
            TraceObservable::Identity => self.h[idx],
            TraceObservable::ProjectZero => self.g[idx] / (1u64 << self.l_qubits) as f64,
        }
    }
}

/// Inputs for one model evaluation.
#[derive(Debug, Clone)]
pub struct NoiseModelInputs {
    pub table: AmplitudeTable,
    /// Error rate q per unit physical time; constant within one evolution.
    pub rate: f64,
    /// TETRIS attenuation λ at the final time.
    pub lambda: f64,
    pub observable: TraceObservable,
}

impl NoiseModelInputs {
    /// Solve the Volterra equation for F on the whole grid.
    pub fn solve_f(&self) -> Result<Vec<Complex64>, CoreError> {
        solve_f(&self.table, self.rate)
    }

    /// ⟨X⊗𝒪⟩ + i⟨Y⊗𝒪⟩ at the final grid time.
    pub fn noisy_expectation(&self, f: &[Complex64]) -> Result<Complex64, CoreError> {
        Ok(*self
            .noisy_expectation_curve(f)?
            .last()
            .expect("grid is non-empty"))
    }

    /// The model value at every grid time.
    pub fn noisy_expectation_curve(&self, f: &[Complex64]) -> Result<Vec<Complex64>, CoreError> {
        let step = self.table.step()?;
        if f.len() != self.table.times.len() {
            return Err(CoreError::invalid("f", "length differs from the grid"));
        }
        let q = self.rate;
        let mut out = Vec::with_capacity(f.len());
        for (n, &t) in self.table.times.iter().enumerate() {
            let damp = (-q * t).exp() * self.lambda;
            // ⟨0|𝒪e^{iHt}|0⟩ = g(t) for both supported observables.
            let mut integral = Complex64::new(0.0, 0.0);
            if n > 0 {
                let mut acc = 0.5 * self.table.kernel(self.observable, n) * f[0];
                for j in 1..n {
                    acc += self.table.kernel(self.observable, n - j) * f[j];
                }
                acc += 0.5 * self.table.kernel(self.observable, 0) * f[n];
                integral = acc * step;
            }
            out.push(damp * (self.table.g[n] + q * integral));
        }
        Ok(out)
    }
}

/// Trapezoidal marching solution of F(t) = g(t) + q∫₀ᵗ h(t−s)F(s) ds.
pub fn solve_f(table: &AmplitudeTable, rate: f64) -> Result<Vec<Complex64>, CoreError> {
    let step = table.step()?;
    if rate < 0.0 {
        return Err(CoreError::invalid("rate", "negative noise rate"));
    }
    let n = table.times.len();
    let mut f = Vec::with_capacity(n);
    f.push(table.g[0]);
    let denom = Complex64::new(1.0, 0.0) - rate * step * 0.5 * table.h[0];
    for i in 1..n {
        let mut acc = 0.5 * table.h[i] * f[0];
        for j in 1..i {
            acc += table.h[i - j] * f[j];
        }
        let rhs = table.g[i] + rate * step * acc;
        f.push(rhs / denom);
    }
    Ok(f)
}

/// λ⁻¹-rescaled model value Re⟨X⊗𝒪⟩ at grid index `idx` for rate `q`.
///
/// This is what an attenuation-corrected estimate converges to, so it is
/// the regression target of [`fit_beta`].
pub fn rescaled_model_value(
    table: &AmplitudeTable,
    idx: usize,
    q: f64,
    observable: TraceObservable,
) -> Result<f64, CoreError> {
    if idx >= table.times.len() {
        return Err(CoreError::invalid("idx", "outside the grid"));
    }
    let truncated = AmplitudeTable {
        times: table.times[..=idx].to_vec(),
        g: table.g[..=idx].to_vec(),
        h: table.h[..=idx].to_vec(),
        l_qubits: table.l_qubits,
    };
    if idx == 0 {
        return Ok(1.0);
    }
    let inputs = NoiseModelInputs {
        table: truncated,
        rate: q,
        lambda: 1.0,
        observable,
    };
    let f = inputs.solve_f()?;
    Ok(inputs.noisy_expectation(&f)?.re)
}

/// One data point for the rate fit: a grid index and the λ⁻¹-rescaled
/// estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct BetaFitPoint {
    pub time_index: usize,
    pub y: f64,
    pub sigma: f64,
}

/// Result of fitting q = β·t to shallow-circuit data.
#[derive(Debug, Clone, Copy)]
pub struct BetaFit {
    /// Proportionality between the error rate and the final time (units J²).
    pub beta: f64,
    /// 1σ from the Gauss-Newton covariance at the minimum.
    pub sigma_beta: f64,
    /// Weighted sum of squared residuals at the minimum.
    pub weighted_sse: f64,
}

/// Weighted least squares of the shallow-circuit model over β, with the
/// per-experiment rate q = β·t (deep circuits use 3β·t; prediction of the
/// held-out settings is the caller's check via [`rescaled_model_value`]).
pub fn fit_beta(
    table: &AmplitudeTable,
    points: &[BetaFitPoint],
    observable: TraceObservable,
) -> Result<BetaFit, CoreError> {
    if points.len() < 3 {
        return Err(CoreError::Estimation("need ≥ 3 time points".into()));
    }
    for p in points {
        if !(p.sigma.is_finite() && p.sigma > 0.0) {
            return Err(CoreError::Estimation(format!(
                "degenerate weight at index {}: σ = {}",
                p.time_index, p.sigma
            )));
        }
    }
    let sse = |beta: f64| -> Result<f64, CoreError> {
        let mut acc = 0.0;
        for p in points {
            let t = table.times[p.time_index];
            let m = rescaled_model_value(table, p.time_index, beta * t, observable)?;
            let r = (p.y - m) / p.sigma;
            acc += r * r;
        }
        Ok(acc)
    };

    // Bracket by coarse scan, then golden-section refine.
    let t_max = points
        .iter()
        .map(|p| table.times[p.time_index])
        .fold(0.0f64, f64::max);
    let beta_max = 4.0 / (t_max * t_max); // keeps qt ≲ 4 over the scan
    let scan = 64;
    let mut best = (0.0, sse(0.0)?);
    for i in 1..=scan {
        let beta = beta_max * i as f64 / scan as f64;
        let v = sse(beta)?;
        if v < best.1 {
            best = (beta, v);
        }
    }
    let width = beta_max / scan as f64;
    let (mut lo, mut hi) = ((best.0 - width).max(0.0), best.0 + width);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if sse(m1)? < sse(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let beta = 0.5 * (lo + hi);
    let weighted_sse = sse(beta)?;

    // Gauss-Newton curvature: σ_β² = [Σ w·(∂m/∂β)²]⁻¹.
    let db = (beta.abs() * 1e-4).max(1e-6);
    let mut info = 0.0;
    for p in points {
        let t = table.times[p.time_index];
        let m_plus = rescaled_model_value(table, p.time_index, (beta + db) * t, observable)?;
        let m_minus =
            rescaled_model_value(table, p.time_index, (beta - db).max(0.0) * t, observable)?;
        let denom = if beta >= db { 2.0 * db } else { beta + db };
        let deriv = (m_plus - m_minus) / denom;
        info += deriv * deriv / (p.sigma * p.sigma);
    }
    if info <= 0.0 {
        return Err(CoreError::Estimation("flat model: no curvature".into()));
    }
    Ok(BetaFit {
        beta,
        sigma_beta: (1.0 / info).sqrt(),
        weighted_sse,
    })
}
