//! Time-indexed families of spectral fields.
//!
//! A trajectory is either an exact heat flow (evaluated at arbitrary times
//! through the semigroup multiplier) or a list of stored samples (evaluated
//! between samples by linear interpolation of coefficients).

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::operators::heat_semigroup;

#[derive(Debug, Clone)]
enum Source {
    HeatFlow { initial: SpectralField },
    Samples { fields: Vec<SpectralField> },
}

/// Per-time scalar diagnostics recorded by a producer.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub time: f64,
    /// Squared L2 norm.
    pub energy: f64,
    /// Squared L2 norm of the gradient.
    pub enstrophy: f64,
    pub sup_norm: f64,
    pub div_residual: f64,
    /// Fitted spectral decay rate (NaN when too few shells resolve).
    pub analyticity_rate: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    source: Source,
    /// Running integral 2 * int_0^t |grad u|^2, aligned with `times`,
    /// when the producer tracks it.
    cumulative_dissipation: Option<Vec<f64>>,
    diagnostics: Option<Vec<DiagnosticsRow>>,
}

impl Trajectory {
    /// Exact heat flow of `initial`, sampled at `times`.
    pub fn heat_flow(initial: SpectralField, times: Vec<f64>) -> Result<Trajectory> {
        check_times(&times)?;
        // For a heat flow the dissipation integral telescopes:
        // 2 int_0^t |grad u|^2 = E(0) - E(t).
        let e0 = initial.energy();
        let cumulative = times
            .iter()
            .map(|&t| {
                let et = heat_semigroup(&initial, t).expect("t >= 0").energy();
                e0 - et
            })
            .collect();
        Ok(Trajectory {
            times,
            source: Source::HeatFlow { initial },
            cumulative_dissipation: Some(cumulative),
            diagnostics: None,
        })
    }

    /// Trajectory backed by stored samples.
    pub fn from_samples(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Trajectory> {
        check_times(&times)?;
        if times.len() != fields.len() {
            return Err(Error::MeshMismatch {
                reason: format!("{} times vs {} fields", times.len(), fields.len()),
            });
        }
        for pair in fields.windows(2) {
            pair[0].check_same_mesh(&pair[1])?;
        }
        Ok(Trajectory {
            times,
            source: Source::Samples { fields },
            cumulative_dissipation: None,
            diagnostics: None,
        })
    }

    pub fn set_cumulative_dissipation(&mut self, values: Vec<f64>) {
        assert_eq!(values.len(), self.times.len());
        self.cumulative_dissipation = Some(values);
    }

    pub fn cumulative_dissipation(&self) -> Option<&[f64]> {
        self.cumulative_dissipation.as_deref()
    }

    pub fn set_diagnostics(&mut self, rows: Vec<DiagnosticsRow>) {
        assert_eq!(rows.len(), self.times.len());
        self.diagnostics = Some(rows);
    }

    pub fn diagnostics(&self) -> Option<&[DiagnosticsRow]> {
        self.diagnostics.as_deref()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_heat_flow(&self) -> bool {
        matches!(self.source, Source::HeatFlow { .. })
    }

    /// Initial data of a heat-flow trajectory.
    pub fn heat_initial(&self) -> Option<&SpectralField> {
        match &self.source {
            Source::HeatFlow { initial } => Some(initial),
            Source::Samples { .. } => None,
        }
    }

    pub fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        Ok(())
    }

    pub fn first_time(&self) -> Result<f64> {
        self.require_nonempty()?;
        Ok(self.times[0])
    }

    pub fn last_time(&self) -> Result<f64> {
        self.require_nonempty()?;
        Ok(*self.times.last().unwrap())
    }

    /// Stored sample by index (heat flows evaluate on demand).
    pub fn sample(&self, i: usize) -> SpectralField {
        match &self.source {
            Source::HeatFlow { initial } => heat_semigroup(initial, self.times[i]).unwrap(),
            Source::Samples { fields } => fields[i].clone(),
        }
    }

    /// Field at an arbitrary time within the sampled span.
    ///
    /// Heat flows are exact; sampled trajectories interpolate coefficients
    /// linearly between neighbors.
    pub fn eval(&self, t: f64) -> Result<SpectralField> {
        self.require_nonempty()?;
        match &self.source {
            Source::HeatFlow { initial } => heat_semigroup(initial, t),
            Source::Samples { fields } => {
                let times = &self.times;
                if t < times[0] - 1e-12 || t > times[times.len() - 1] + 1e-12 {
                    return Err(Error::MeshMismatch {
                        reason: format!(
                            "time {t} outside sampled span [{}, {}]",
                            times[0],
                            times[times.len() - 1]
                        ),
                    });
                }
                let i = match times.iter().position(|&s| s >= t) {
                    Some(0) => return Ok(fields[0].clone()),
                    Some(i) => i,
                    None => return Ok(fields[fields.len() - 1].clone()),
                };
                let (t0, t1) = (times[i - 1], times[i]);
                if t1 - t0 <= 0.0 {
                    return Ok(fields[i].clone());
                }
                let w = (t - t0) / (t1 - t0);
                let mut out = fields[i - 1].clone();
                out.scale(1.0 - w);
                out.add_scaled(&fields[i], w);
                Ok(out)
            }
        }
    }

    /// Map every sample (materializes heat flows).
    pub fn map_samples<F>(&self, mut f: F) -> Result<Trajectory>
    where
        F: FnMut(f64, &SpectralField) -> SpectralField,
    {
        self.require_nonempty()?;
        let fields = (0..self.len())
            .map(|i| {
                let s = self.sample(i);
                f(self.times[i], &s)
            })
            .collect();
        Trajectory::from_samples(self.times.clone(), fields)
    }

    /// Pointwise difference of two trajectories on the same time mesh.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times != other.times {
            return Err(Error::MeshMismatch {
                reason: "trajectories on different time meshes".into(),
            });
        }
        let fields = (0..self.len())
            .map(|i| self.sample(i).sub(&other.sample(i)))
            .collect();
        Trajectory::from_samples(self.times.clone(), fields)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    for &t in times {
        if t < 0.0 {
            return Err(Error::NegativeTime { t });
        }
    }
    for pair in times.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::MeshMismatch {
                reason: format!("times out of order: {} after {}", pair[1], pair[0]),
            });
        }
    }
    Ok(())
}

/// Heat extension of initial data evaluated at the given times.
pub fn heat_extension(f: &SpectralField, times: &[f64]) -> Result<Trajectory> {
    Trajectory::heat_flow(f.clone(), times.to_vec())
}

/// Geometric time ladder on (t_min, horizon] with `per_level` samples per
/// dyadic level, ascending, endpoint included.
pub fn dyadic_times(t_min: f64, horizon: f64, per_level: usize) -> Vec<f64> {
    assert!(horizon > 0.0 && t_min > 0.0 && t_min <= horizon);
    assert!(per_level >= 1);
    let ratio = 0.5f64.powf(1.0 / per_level as f64);
    let mut times = vec![horizon];
    let mut t = horizon;
    while t * ratio >= t_min * 0.999 {
        t *= ratio;
        times.push(t);
    }
    times.reverse();
    times
}
