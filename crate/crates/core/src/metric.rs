/// A computed quantity with its numerical error estimate and diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricResult {
    pub value: f64,
    /// Absolute error estimate (truncation + quadrature + roundoff), never negative.
    pub abs_error: f64,
    /// Series terms retained (FTR index, multi-index count or residues).
    pub series_terms: usize,
    /// Integrand / kernel evaluations spent.
    pub evaluations: usize,
    pub refinements: usize,
    /// The raw value fell outside the codomain and was clamped.
    pub clamped: bool,
    pub converged: bool,
    /// Free-form diagnostics such as cross-check deltas.
    pub notes: Vec<String>,
}

impl MetricResult {
    pub fn exact(value: f64) -> Self {
        MetricResult {
            value,
            converged: true,
            ..Default::default()
        }
    }

    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_error
        } else {
            self.abs_error / self.value.abs()
        }
    }

    /// Clamp into `[lo, hi]`, recording whether clamping happened.
    pub fn clamp_to(mut self, lo: f64, hi: f64) -> Self {
        if self.value < lo || self.value > hi {
            let c = self.value.clamp(lo, hi);
            self.abs_error += (self.value - c).abs();
            self.notes.push(format!("clamped raw value {:e}", self.value));
            self.value = c;
            self.clamped = true;
        }
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}
