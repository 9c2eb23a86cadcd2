use std::io::Write;

use crate::error::Result;

/// One row of an iteration log.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub outer: usize,
    pub inner_iters: usize,
    pub inner_residual: f64,
    pub linf_change: f64,
    /// Largest nodewise increase over the previous iterate (0 for a monotone step).
    pub mono_violation: f64,
    pub seconds: f64,
}

/// Per-iteration log of an envelope computation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SchemeReport {
    pub steps: Vec<StepRecord>,
    /// False when an iteration cap was hit before the stopping tolerance.
    pub converged: bool,
    /// Inner solves that stopped on their iteration cap.
    pub inner_capped: usize,
}

impl SchemeReport {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn max_mono_violation(&self) -> f64 {
        self.steps.iter().map(|s| s.mono_violation).fold(0.0, f64::max)
    }

    pub fn last_change(&self) -> Option<f64> {
        self.steps.last().map(|s| s.linf_change)
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "outer,inner_iters,inner_residual,linf_change,mono_violation,seconds")?;
        for s in &self.steps {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:.6}",
                s.outer, s.inner_iters, s.inner_residual, s.linf_change, s.mono_violation, s.seconds
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let r = SchemeReport {
            steps: vec![StepRecord {
                outer: 1,
                inner_iters: 4,
                inner_residual: 1e-9,
                linf_change: 0.5,
                mono_violation: 0.0,
                seconds: 0.25,
            }],
            converged: true,
            inner_capped: 0,
        };
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "outer,inner_iters,inner_residual,linf_change,mono_violation,seconds");
        assert_eq!(lines[1].split(',').count(), 6);
        assert_eq!(r.iterations(), 1);
        assert_eq!(r.max_mono_violation(), 0.0);
    }
}
