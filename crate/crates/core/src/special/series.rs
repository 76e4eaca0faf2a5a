use super::Scalar;
use crate::error::{Error, Result};

/// Value produced by a truncated series or a quadrature, with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult<T> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub terms_used: usize,
}

/// Stopping rule for slowly-starting series.
///
/// A sum is accepted once `consecutive` successive terms are below
/// `tol·|partial sum|` and the geometric tail bound `|t|·r/(1−r)` built
/// from the observed ratio `r < 1` is below the same threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRule {
    pub tol: f64,
    pub consecutive: usize,
    pub max_terms: usize,
}

impl Default for TailRule {
    fn default() -> Self {
        TailRule {
            tol: 1e-12,
            consecutive: 3,
            max_terms: 100_000,
        }
    }
}

impl TailRule {
    pub fn with_tol(tol: f64) -> Self {
        TailRule {
            tol,
            ..Self::default()
        }
    }
}

/// Running partial sum driven by a [`TailRule`].
#[derive(Debug, Clone)]
pub struct SeriesSum<T> {
    rule: TailRule,
    sum: T,
    abs_sum: f64,
    prev: f64,
    small_run: usize,
    terms: usize,
    tail_bound: f64,
}

impl<T: Scalar> SeriesSum<T> {
    pub fn new(rule: TailRule) -> Self {
        SeriesSum {
            rule,
            sum: T::default(),
            abs_sum: 0.0,
            prev: f64::NAN,
            small_run: 0,
            terms: 0,
            tail_bound: f64::INFINITY,
        }
    }

    /// Adds a term. Returns `true` once the stopping rule is satisfied.
    pub fn push(&mut self, term: T) -> bool {
        let a = term.norm();
        self.sum = self.sum + term;
        self.abs_sum += a;
        self.terms += 1;
        let scale = self.sum.norm();
        let threshold = self.rule.tol * scale;
        if a <= threshold {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        let ratio = if self.prev > 0.0 {
            a / self.prev
        } else {
            f64::NAN
        };
        self.prev = a;
        self.tail_bound = if a == 0.0 {
            0.0
        } else if ratio < 1.0 {
            a * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        self.small_run >= self.rule.consecutive && self.tail_bound <= threshold
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn value(&self) -> T {
        self.sum
    }

    pub fn exhausted(&self) -> bool {
        self.terms >= self.rule.max_terms
    }

    pub fn finish(self) -> EvalResult<T> {
        let roundoff = 4.0 * f64::EPSILON * self.abs_sum;
        let tail = if self.tail_bound.is_finite() {
            self.tail_bound
        } else {
            0.0
        };
        EvalResult {
            value: self.sum,
            abs_error_estimate: tail + roundoff,
            terms_used: self.terms,
        }
    }

    pub fn non_convergence(&self, func: &'static str) -> Error {
        Error::NoConvergence {
            func,
            terms: self.terms,
            estimate: self.tail_bound,
        }
    }
}

/// Sums `term(k)` for k = 0, 1, ... under the tail rule.
pub fn sum_series<T: Scalar>(
    func: &'static str,
    rule: TailRule,
    mut term: impl FnMut(usize) -> T,
) -> Result<EvalResult<T>> {
    let mut acc = SeriesSum::new(rule);
    let mut k = 0;
    loop {
        if acc.push(term(k)) {
            return Ok(acc.finish());
        }
        k += 1;
        if acc.exhausted() {
            return Err(acc.non_convergence(func));
        }
    }
}

/// Sum of positive terms supplied as logarithms, under the same stopping
/// rule as [`SeriesSum`]. Handles terms far outside the f64 range.
#[derive(Debug, Clone)]
pub struct LogSum {
    rule: TailRule,
    ln_scale: f64,
    rel: f64,
    prev_ln: f64,
    small_run: usize,
    terms: usize,
    tail_rel: f64,
}

impl LogSum {
    pub fn new(rule: TailRule) -> Self {
        LogSum {
            rule,
            ln_scale: f64::NEG_INFINITY,
            rel: 0.0,
            prev_ln: f64::NAN,
            small_run: 0,
            terms: 0,
            tail_rel: f64::INFINITY,
        }
    }

    /// Adds the term e^{ln_term}. Returns `true` once the rule is satisfied.
    pub fn push(&mut self, ln_term: f64) -> bool {
        self.terms += 1;
        if ln_term > self.ln_scale {
            self.rel = self.rel * (self.ln_scale - ln_term).exp() + 1.0;
            self.ln_scale = ln_term;
        } else if ln_term > f64::NEG_INFINITY {
            self.rel += (ln_term - self.ln_scale).exp();
        }
        let t = if ln_term == f64::NEG_INFINITY {
            0.0
        } else {
            (ln_term - self.ln_value()).exp()
        };
        if t <= self.rule.tol {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        let ratio = (ln_term - self.prev_ln).exp();
        self.prev_ln = ln_term;
        self.tail_rel = if t == 0.0 {
            0.0
        } else if ratio < 1.0 {
            t * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        self.small_run >= self.rule.consecutive && self.tail_rel <= self.rule.tol
    }

    /// ln of the partial sum (−∞ while every term has been zero).
    pub fn ln_value(&self) -> f64 {
        if self.rel == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.ln_scale + self.rel.ln()
        }
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn exhausted(&self) -> bool {
        self.terms >= self.rule.max_terms
    }

    /// Relative tail estimate from the last accepted term.
    pub fn tail_rel(&self) -> f64 {
        self.tail_rel
    }

    pub fn non_convergence(&self, func: &'static str) -> Error {
        Error::NoConvergence {
            func,
            terms: self.terms,
            estimate: self.tail_rel,
        }
    }
}

/// Sums e^{ln_term(k)} for k = 0, 1, ... and returns the logarithm of the sum.
pub fn ln_sum_series(
    func: &'static str,
    rule: TailRule,
    mut ln_term: impl FnMut(usize) -> Result<f64>,
) -> Result<f64> {
    let mut acc = LogSum::new(rule);
    let mut k = 0;
    loop {
        if acc.push(ln_term(k)?) {
            return Ok(acc.ln_value());
        }
        k += 1;
        if acc.exhausted() {
            return Err(acc.non_convergence(func));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn geometric_series() {
        let r = sum_series("geom", TailRule::default(), |k| 0.5f64.powi(k as i32)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
        assert!(r.abs_error_estimate < 1e-11);
    }

    #[test]
    fn late_peaking_terms_are_not_cut_early() {
        // e^{30}: terms grow for 30 steps before decaying
        let x: f64 = 30.0;
        let mut t = 1.0;
        let r = sum_series("exp", TailRule::default(), |k| {
            if k > 0 {
                t *= x / k as f64;
            }
            t
        })
        .unwrap();
        assert_relative_eq!(r.value, x.exp(), max_relative = 1e-12);
        assert!(r.terms_used > 60);
    }

    #[test]
    fn isolated_tiny_term_does_not_stop_the_sum() {
        // a single zero term between ordinary terms
        let terms = [1.0, 0.5, 0.0, 0.25, 0.125, 0.0625];
        let mut acc = SeriesSum::new(TailRule::default());
        let mut stopped_at = None;
        for (i, t) in terms.iter().enumerate() {
            if acc.push(*t) {
                stopped_at = Some(i);
                break;
            }
        }
        assert_eq!(stopped_at, None);
    }

    #[test]
    fn log_sum_handles_huge_terms() {
        // Σ_k 1000^k / k! = e^{1000}, far beyond f64
        let x: f64 = 1000.0;
        let mut lg = 0.0;
        let ln = ln_sum_series("exp", TailRule::with_tol(1e-15), |k| {
            if k > 0 {
                lg += (k as f64).ln();
            }
            Ok(k as f64 * x.ln() - lg)
        })
        .unwrap();
        assert_relative_eq!(ln, 1000.0, max_relative = 1e-13);
    }

    #[test]
    fn divergent_series_reports_failure() {
        let rule = TailRule {
            max_terms: 200,
            ..TailRule::default()
        };
        let err = sum_series("harmonic", rule, |k| 1.0 / (k as f64 + 1.0)).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
