use serde::{Deserialize, Serialize};

/// A reaction term `f` on `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ReactionFn {
    /// `u(1-u)`.
    #[default]
    Fisher,
    /// `u(1-u^γ)`, `γ > 0`.
    Power { gamma: f64 },
    /// `f ≡ 0`; turns the equation into the heat equation.
    Zero,
    /// Piecewise-linear interpolation of values on a uniform grid over `[0, 1]`.
    Sampled { values: Vec<f64> },
}

/// Grid used to check the standing hypotheses on `f`.
const VALIDATION_POINTS: usize = 1000;

impl ReactionFn {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ReactionFn::Fisher => u * (1.0 - u),
            ReactionFn::Power { gamma } => u * (1.0 - u.abs().powf(*gamma)),
            ReactionFn::Zero => 0.0,
            ReactionFn::Sampled { values } => {
                let n = values.len() - 1;
                let x = u.clamp(0.0, 1.0) * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let w = x - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReactionFn::Fisher => "fisher",
            ReactionFn::Power { .. } => "power",
            ReactionFn::Zero => "zero",
            ReactionFn::Sampled { .. } => "sampled",
        }
    }

    /// Tabulates `self` on `n + 1` uniform points.
    pub fn sampled(&self, n: usize) -> ReactionFn {
        ReactionFn::Sampled {
            values: (0..=n).map(|i| self.eval(i as f64 / n as f64)).collect(),
        }
    }

    /// Checks `f(0) = f(1) = 0`, `0 < f(u) ≤ u` on a grid over `(0,1)` and
    /// `f'(0) = 1` by a one-sided difference. Returns every failure.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if let ReactionFn::Sampled { values } = self {
            if values.len() < 2 {
                return Err(vec!["sampled reaction needs at least two values".into()]);
            }
        }
        if let ReactionFn::Power { gamma } = self {
            if !(*gamma > 0.0) {
                errs.push(format!("power exponent {gamma} must be positive"));
            }
        }
        let f0 = self.eval(0.0);
        let f1 = self.eval(1.0);
        if f0.abs() > 1e-12 {
            errs.push(format!("f(0) = {f0}"));
        }
        if f1.abs() > 1e-12 {
            errs.push(format!("f(1) = {f1}"));
        }
        for i in 1..VALIDATION_POINTS {
            let u = i as f64 / VALIDATION_POINTS as f64;
            let f = self.eval(u);
            if !(f > 0.0) {
                errs.push(format!("f({u}) = {f} is not positive"));
                break;
            }
            if f > u {
                errs.push(format!("f({u}) = {f} exceeds u"));
                break;
            }
        }
        let h = match self {
            ReactionFn::Sampled { values } => 1.0 / (values.len() - 1) as f64,
            _ => 1e-7,
        };
        let slope = (self.eval(h) - f0) / h;
        if (slope - 1.0).abs() > 1e-6 + h {
            errs.push(format!("f'(0) ≈ {slope}, expected 1"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fisher_and_power_are_admissible() {
        assert!(ReactionFn::Fisher.validate().is_ok());
        assert!(ReactionFn::Power { gamma: 2.0 }.validate().is_ok());
        assert!(ReactionFn::Fisher.sampled(4096).validate().is_ok());
    }

    #[test]
    fn zero_and_bistable_are_rejected() {
        assert!(ReactionFn::Zero.validate().is_err());
        let bistable = ReactionFn::Sampled {
            values: (0..=100)
                .map(|i| {
                    let u = i as f64 / 100.0;
                    u * (1.0 - u) * (u - 0.3)
                })
                .collect(),
        };
        assert!(bistable.validate().is_err());
    }
}
