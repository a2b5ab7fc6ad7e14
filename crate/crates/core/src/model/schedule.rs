use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Switching function `f` on `[0, duration]` with `f(0) = 0`, `f(T) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub duration: f64,
    pub form: ScheduleForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScheduleForm {
    /// `f(t) = t / T`.
    Linear,
    /// Piecewise-linear through `(times[k], values[k])`, `times` running
    /// from 0 to the duration.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl Schedule {
    pub fn linear(duration: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(Self { duration, form: ScheduleForm::Linear })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated schedule needs at least two (t, f) pairs of equal length".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidArgument("tabulated schedule must start at t = 0".into()));
        }
        if values[0] != 0.0 || *values.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("tabulated schedule must satisfy f(0)=0, f(T)=1".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("schedule times must be strictly increasing".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("schedule values must be non-decreasing".into()));
        }
        let duration = *times.last().unwrap();
        check_duration(duration)?;
        Ok(Self { duration, form: ScheduleForm::Tabulated { times, values } })
    }

    /// Same shape stretched to a new duration.
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        check_duration(duration)?;
        let form = match &self.form {
            ScheduleForm::Linear => ScheduleForm::Linear,
            ScheduleForm::Tabulated { times, values } => {
                let scale = duration / self.duration;
                let mut times: Vec<f64> = times.iter().map(|t| t * scale).collect();
                *times.last_mut().unwrap() = duration;
                ScheduleForm::Tabulated { times, values: values.clone() }
            }
        };
        Ok(Self { duration, form })
    }

    /// `f(elapsed)`, clamped to `[0, 1]` outside the window.
    pub fn value(&self, elapsed: f64) -> f64 {
        if elapsed <= 0.0 {
            return 0.0;
        }
        if elapsed >= self.duration {
            return 1.0;
        }
        match &self.form {
            ScheduleForm::Linear => elapsed / self.duration,
            ScheduleForm::Tabulated { times, values } => {
                let k = times.partition_point(|&t| t <= elapsed).clamp(1, times.len() - 1);
                let (t0, t1) = (times[k - 1], times[k]);
                let w = (elapsed - t0) / (t1 - t0);
                values[k - 1] + w * (values[k] - values[k - 1])
            }
        }
    }

    /// `df/dt`, one-sided at table nodes.
    pub fn rate(&self, elapsed: f64) -> f64 {
        match &self.form {
            ScheduleForm::Linear => 1.0 / self.duration,
            ScheduleForm::Tabulated { times, values } => {
                let e = elapsed.clamp(0.0, self.duration);
                let k = times.partition_point(|&t| t <= e).clamp(1, times.len() - 1);
                (values[k] - values[k - 1]) / (times[k] - times[k - 1])
            }
        }
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be positive and finite, got {duration}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_endpoints() {
        let s = Schedule::linear(7.0).unwrap();
        assert_eq!(s.value(0.0), 0.0);
        assert_eq!(s.value(7.0), 1.0);
        assert!((s.value(3.5) - 0.5).abs() < 1e-15);
        assert!((s.rate(1.0) - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_interpolates_and_stretches() {
        let s = Schedule::tabulated(vec![0.0, 1.0, 3.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert!((s.value(0.5) - 0.25).abs() < 1e-15);
        assert!((s.value(2.0) - 0.75).abs() < 1e-15);
        assert_eq!(s.value(3.0), 1.0);
        let t = s.with_duration(6.0).unwrap();
        assert!((t.value(4.0) - 0.75).abs() < 1e-15);
        assert!((t.rate(4.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(Schedule::tabulated(vec![0.0, 1.0], vec![0.0, 0.9]).is_err());
        assert!(Schedule::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 0.6, 0.5]).is_err());
        assert!(Schedule::tabulated(vec![0.0, 0.0, 2.0], vec![0.0, 0.5, 1.0]).is_err());
        assert!(Schedule::linear(0.0).is_err());
    }
}
