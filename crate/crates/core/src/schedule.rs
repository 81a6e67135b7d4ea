//! Piecewise-constant time dependence of the field and coupling vectors,
//! plus the supremum bounds the inequality checks need.
//!
//! Sampling is right-continuous: the value at a breakpoint belongs to the
//! segment that starts there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliVector;

/// One constant stretch of the drive, active on [t_start, next t_start).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub h0: PauliVector,
    pub v: PauliVector,
}

/// Ordered piecewise-constant schedule on [0, horizon].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    segments: Vec<Segment>,
    horizon: f64,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    segments: Vec<Segment>,
    horizon: f64,
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = Error;
    fn try_from(r: ScheduleRepr) -> Result<Self> {
        Schedule::new(r.segments, r.horizon)
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        ScheduleRepr {
            segments: s.segments,
            horizon: s.horizon,
        }
    }
}

/// Exact suprema of the schedule over its finite segment set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleBounds {
    /// Interaction energy scale sup_t 4√(Σ v_μ²) — an upper bound on
    /// sup_t ‖V(t)‖₁ that is tight for single-axis couplings. Error bounds
    /// stated in this scale only get looser, never invalid.
    pub v_m: f64,
    /// sup_{μ,t} |v_μ(t)|
    pub v_star: f64,
    /// sup_t ‖H⁰(t)‖₁ = sup_t 2√(Σ h_μ²)
    pub h0_m: f64,
}

impl ScheduleBounds {
    /// Default integrator step: 1e−3 / max(1, v_m + 4·h0_m), small against
    /// the fastest precession period of the drive.
    pub fn default_dt(&self) -> f64 {
        1e-3 / (self.v_m + 4.0 * self.h0_m).max(1.0)
    }
}

impl Schedule {
    pub fn new(segments: Vec<Segment>, horizon: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("schedule needs ≥ 1 segment".into()));
        }
        if segments[0].t_start != 0.0 {
            return Err(Error::InvalidInput(format!(
                "first segment must start at 0, got {}",
                segments[0].t_start
            )));
        }
        for w in segments.windows(2) {
            if w[1].t_start <= w[0].t_start {
                return Err(Error::InvalidInput(format!(
                    "segment starts must strictly increase ({} then {})",
                    w[0].t_start, w[1].t_start
                )));
            }
        }
        for seg in &segments {
            if !seg.t_start.is_finite() {
                return Err(Error::InvalidInput("non-finite segment start".into()));
            }
            seg.h0.validate()?;
            seg.v.validate()?;
        }
        let last = segments.last().unwrap().t_start;
        if !horizon.is_finite() || horizon < last {
            return Err(Error::InvalidInput(format!(
                "horizon {horizon} must be finite and ≥ last segment start {last}"
            )));
        }
        Ok(Self { segments, horizon })
    }

    /// Single-segment schedule with constant couplings.
    pub fn constant(h0: PauliVector, v: PauliVector, horizon: f64) -> Result<Self> {
        Self::new(
            vec![Segment {
                t_start: 0.0,
                h0,
                v,
            }],
            horizon,
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Rebuild with a (possibly larger) horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.segments.clone(), horizon)
    }

    fn segment_index(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        // Right-continuous: last segment whose start is ≤ t.
        let idx = self
            .segments
            .partition_point(|seg| seg.t_start <= t)
            .saturating_sub(1);
        Ok(idx)
    }

    /// Couplings (h0, v) active at time t.
    pub fn sample(&self, t: f64) -> Result<(PauliVector, PauliVector)> {
        let seg = &self.segments[self.segment_index(t)?];
        Ok((seg.h0, seg.v))
    }

    /// Couplings active at t together with the end of their constancy
    /// window (next breakpoint or the horizon).
    pub fn window(&self, t: f64) -> Result<(PauliVector, PauliVector, f64)> {
        let idx = self.segment_index(t)?;
        let end = self
            .segments
            .get(idx + 1)
            .map(|s| s.t_start)
            .unwrap_or(self.horizon);
        let seg = &self.segments[idx];
        Ok((seg.h0, seg.v, end))
    }

    /// True if (t0, t1) contains no breakpoint, i.e. the couplings are a
    /// single constant over the whole interval.
    pub fn constant_over(&self, t0: f64, t1: f64) -> Result<bool> {
        Ok(self.segment_index(t0)? == self.segment_index(t1)?)
    }

    pub fn bounds(&self) -> ScheduleBounds {
        let mut b = ScheduleBounds {
            v_m: 0.0,
            v_star: 0.0,
            h0_m: 0.0,
        };
        for seg in &self.segments {
            b.v_m = b.v_m.max(seg.v.pair_trace_norm_bound());
            b.h0_m = b.h0_m.max(seg.h0.single_qubit_trace_norm());
            for c in seg.v.components() {
                b.v_star = b.v_star.max(c.abs());
            }
        }
        b
    }
}
