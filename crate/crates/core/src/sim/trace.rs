//! Sawtooth age process: the age `t - σ(t)` grows with unit slope and drops
//! at each delivery to the delivered packet's system time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeRecord {
    pub delivery_time: f64,
    /// `delivery_time - generation_time` of the delivered packet.
    pub age_after_reset: f64,
    /// Age just before the delivery.
    pub age_before_reset: f64,
}

/// Deliveries at one receiver, starting from age `initial_age` at `origin`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AgeTrace {
    pub origin: f64,
    pub initial_age: f64,
    pub records: Vec<AgeRecord>,
}

impl AgeTrace {
    pub fn new(origin: f64, initial_age: f64) -> Self {
        Self {
            origin,
            initial_age,
            records: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.initial_age.is_nan() || self.initial_age < 0.0 {
            return Err(Error::domain("initial age must be non-negative"));
        }
        let mut prev = self.origin;
        for (i, r) in self.records.iter().enumerate() {
            let increasing = if i == 0 {
                r.delivery_time >= prev
            } else {
                r.delivery_time > prev
            };
            if !increasing {
                return Err(Error::domain(format!(
                    "delivery times must be strictly increasing (record {i})"
                )));
            }
            if !(r.age_after_reset >= 0.0 && r.age_before_reset >= r.age_after_reset) {
                return Err(Error::domain(format!("inconsistent ages in record {i}")));
            }
            prev = r.delivery_time;
        }
        Ok(())
    }
}

/// Area under the age curve of `trace` restricted to `[horizon_start, horizon_end]`.
///
/// Divide by the horizon length for the time-average age. A trace with no
/// records is a single growing ramp from the initial age.
pub fn age_integral(trace: &AgeTrace, horizon_start: f64, horizon_end: f64) -> Result<f64> {
    if horizon_start.is_nan() || horizon_end.is_nan() || horizon_start >= horizon_end {
        return Err(Error::domain(format!(
            "horizon start {horizon_start} must precede end {horizon_end}"
        )));
    }
    if horizon_start < trace.origin {
        return Err(Error::domain("horizon starts before the trace origin"));
    }
    trace.validate()?;

    let mut acc = AgeIntegrator::new(horizon_start, horizon_end, trace.origin, trace.initial_age);
    for r in &trace.records {
        acc.deliver(r.delivery_time, r.delivery_time - r.age_after_reset);
    }
    Ok(acc.finish().area)
}

/// Streaming form of [`age_integral`] fed with `(delivery_time,
/// generation_time)` pairs in time order.
#[derive(Debug, Clone)]
pub(crate) struct AgeIntegrator {
    window_start: f64,
    window_end: f64,
    /// Generation time of the freshest delivered packet.
    latest_generation: f64,
    last_event: f64,
    area: f64,
    deliveries_in_window: u64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AgeIntegral {
    pub area: f64,
    pub deliveries_in_window: u64,
}

impl AgeIntegrator {
    pub fn new(window_start: f64, window_end: f64, origin: f64, initial_age: f64) -> Self {
        Self {
            window_start,
            window_end,
            latest_generation: origin - initial_age,
            last_event: origin,
            area: 0.0,
            deliveries_in_window: 0,
        }
    }

    fn accumulate_until(&mut self, t: f64) {
        let l = self.last_event.max(self.window_start);
        let r = t.min(self.window_end);
        if r > l {
            let age_l = l - self.latest_generation;
            let age_r = r - self.latest_generation;
            self.area += 0.5 * (r - l) * (age_l + age_r);
        }
        self.last_event = t;
    }

    /// Returns the age just before the delivery.
    pub fn deliver(&mut self, time: f64, generation: f64) -> f64 {
        self.accumulate_until(time);
        let before = time - self.latest_generation;
        // stale packets do not reset the age
        if generation > self.latest_generation {
            self.latest_generation = generation;
        }
        if time > self.window_start && time <= self.window_end {
            self.deliveries_in_window += 1;
        }
        before
    }

    pub fn finish(mut self) -> AgeIntegral {
        let end = self.window_end;
        if end > self.last_event {
            self.accumulate_until(end);
        }
        AgeIntegral {
            area: self.area,
            deliveries_in_window: self.deliveries_in_window,
        }
    }
}
