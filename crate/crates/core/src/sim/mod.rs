//! Discrete-event simulation of the legitimate queue and the eavesdropper's
//! queue.
//!
//! Every packet of a Poisson(λ) stream is served FCFS at the receiver with
//! Exp(μ) service. Independently with probability β a copy is captured and
//! served by the eavesdropper's own FCFS Exp(μ) server. Both queues follow
//! the Lindley recursion `d_i = max(a_i, d_{i-1}) + s_i`, and the empirical
//! average AoI is the area under each sawtooth age curve divided by the
//! post-warmup horizon.
//!
//! Each replication draws from three ChaCha streams keyed by
//! `(seed, replication)`: interarrival times, receiver service times, and
//! eavesdropper coins + service times. Results are bit-identical for a given
//! seed whatever the [`Exec`] strategy.

mod events;
mod trace;

pub use events::{write_events_csv, Event, EventKind};
pub use trace::{age_integral, AgeRecord, AgeTrace};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::aoi::SystemParams;
use crate::error::{Error, Result};
use crate::par::Exec;
use trace::AgeIntegrator;

/// 95% two-sided normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// How the eavesdropper's service times relate to the receiver's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceCoupling {
    /// Independent server with its own draws (the model).
    #[default]
    Independent,
    /// Reuse the receiver's service time for each captured packet. Only
    /// useful for coupling checks.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SystemParams,
    /// Arrivals per replication.
    pub num_arrivals: u64,
    /// Fraction of each replication's horizon discarded as transient.
    pub warmup_fraction: f64,
    pub seed: u64,
    pub num_replications: u32,
    #[serde(default)]
    pub coupling: ServiceCoupling,
}

impl SimConfig {
    pub const DEFAULT_WARMUP: f64 = 0.1;
    pub const DEFAULT_REPLICATIONS: u32 = 10;

    pub fn new(params: SystemParams, num_arrivals: u64, seed: u64) -> Self {
        Self {
            params,
            num_arrivals,
            warmup_fraction: Self::DEFAULT_WARMUP,
            seed,
            num_replications: Self::DEFAULT_REPLICATIONS,
            coupling: ServiceCoupling::Independent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_arrivals < 1 {
            return Err(Error::domain("num_arrivals must be at least 1"));
        }
        if !(0.0..0.5).contains(&self.warmup_fraction) {
            return Err(Error::domain(format!(
                "warmup fraction must lie in [0, 0.5), got {}",
                self.warmup_fraction
            )));
        }
        if self.num_replications < 1 {
            return Err(Error::domain("num_replications must be at least 1"));
        }
        Ok(())
    }
}

/// Per-replication measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationStats {
    pub delta_b: f64,
    pub delta_e: Option<f64>,
    pub captured: u64,
    pub horizon_start: f64,
    pub horizon_end: f64,
    pub bob_deliveries: u64,
    pub eve_deliveries: u64,
    /// Mean time a packet spends in the receiver's queue.
    pub bob_mean_system_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub delta_b_hat: f64,
    /// `None` when the eavesdropper captured nothing.
    pub delta_e_hat: Option<f64>,
    /// 95% normal-approximation half-width across replications; `None` with
    /// a single replication.
    pub ci_halfwidth_b: Option<f64>,
    pub ci_halfwidth_e: Option<f64>,
    pub eavesdropped_fraction: f64,
    /// Mean post-warmup horizon length per replication.
    pub sim_horizon: f64,
    pub bob_mean_system_time: f64,
    pub replications: Vec<ReplicationStats>,
}

/// Receives every simulated event in generation order.
trait Observer {
    fn arrival(&mut self, _id: u64, _time: f64) {}
    fn bob_departure(&mut self, _id: u64, _time: f64, _generation: f64) {}
    fn eve_departure(&mut self, _id: u64, _time: f64, _generation: f64) {}
}

struct Quiet;
impl Observer for Quiet {}

struct Summary {
    last_bob_departure: f64,
    captured: u64,
    system_time_sum: f64,
}

struct Streams {
    arrivals: ChaCha8Rng,
    bob: ChaCha8Rng,
    eve: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64, replication: u32) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::from(replication) * 3 + k);
            rng
        };
        Self {
            arrivals: stream(0),
            bob: stream(1),
            eve: stream(2),
        }
    }
}

fn simulate<O: Observer>(config: &SimConfig, replication: u32, obs: &mut O) -> Summary {
    let p = &config.params;
    let interarrival = Exp::new(p.lambda()).expect("lambda validated positive");
    let service = Exp::new(p.mu()).expect("mu validated positive");
    let mut rng = Streams::new(config.seed, replication);

    let mut now = 0.0_f64;
    let mut bob_free = 0.0_f64;
    let mut eve_free = 0.0_f64;
    let mut captured = 0;
    let mut system_time_sum = 0.0;

    for id in 0..config.num_arrivals {
        now += interarrival.sample(&mut rng.arrivals);
        obs.arrival(id, now);

        let s_bob: f64 = service.sample(&mut rng.bob);
        bob_free = bob_free.max(now) + s_bob;
        system_time_sum += bob_free - now;
        obs.bob_departure(id, bob_free, now);

        if rng.eve.random_bool(p.beta()) {
            let s_eve = match config.coupling {
                ServiceCoupling::Independent => service.sample(&mut rng.eve),
                ServiceCoupling::Shared => s_bob,
            };
            eve_free = eve_free.max(now) + s_eve;
            captured += 1;
            obs.eve_departure(id, eve_free, now);
        }
    }

    Summary {
        last_bob_departure: bob_free,
        captured,
        system_time_sum,
    }
}

struct Integrators {
    bob: AgeIntegrator,
    eve: AgeIntegrator,
}

impl Observer for Integrators {
    fn bob_departure(&mut self, _id: u64, time: f64, generation: f64) {
        self.bob.deliver(time, generation);
    }

    fn eve_departure(&mut self, _id: u64, time: f64, generation: f64) {
        self.eve.deliver(time, generation);
    }
}

/// Horizon of one replication: warmup start to the receiver's last departure.
fn horizon(config: &SimConfig, replication: u32) -> (f64, f64) {
    let end = simulate(config, replication, &mut Quiet).last_bob_departure;
    (config.warmup_fraction * end, end)
}

fn replicate(config: &SimConfig, replication: u32) -> Result<ReplicationStats> {
    let (start, end) = horizon(config, replication);
    let mut obs = Integrators {
        bob: AgeIntegrator::new(start, end, 0.0, 0.0),
        eve: AgeIntegrator::new(start, end, 0.0, 0.0),
    };
    let summary = simulate(config, replication, &mut obs);
    let bob = obs.bob.finish();
    let eve = obs.eve.finish();
    let length = end - start;

    if bob.deliveries_in_window < 2 {
        return Err(Error::Degenerate {
            receiver: "bob",
            deliveries: bob.deliveries_in_window,
            replication,
        });
    }
    let delta_e = (summary.captured > 0).then_some(eve.area / length);

    Ok(ReplicationStats {
        delta_b: bob.area / length,
        delta_e,
        captured: summary.captured,
        horizon_start: start,
        horizon_end: end,
        bob_deliveries: bob.deliveries_in_window,
        eve_deliveries: eve.deliveries_in_window,
        bob_mean_system_time: summary.system_time_sum / config.num_arrivals as f64,
    })
}

/// `(mean, 95% half-width)`; the half-width is `None` for fewer than two samples.
fn mean_ci(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(Z_95 * (var / n).sqrt()))
}

/// Runs all replications with the default execution strategy.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    run_with(config, Exec::default())
}

pub fn run_with(config: &SimConfig, exec: Exec) -> Result<SimResult> {
    config.validate()?;
    let reps: Vec<ReplicationStats> = exec
        .map_range(config.num_replications as usize, |r| {
            replicate(config, r as u32)
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let total_captured: u64 = reps.iter().map(|r| r.captured).sum();
    let (delta_e_hat, ci_halfwidth_e) = if total_captured == 0 {
        (None, None)
    } else {
        let mut es = Vec::with_capacity(reps.len());
        for (i, r) in reps.iter().enumerate() {
            if r.eve_deliveries < 2 {
                return Err(Error::Degenerate {
                    receiver: "eve",
                    deliveries: r.eve_deliveries,
                    replication: i as u32,
                });
            }
            es.push(r.delta_e.expect("captured packets imply an estimate"));
        }
        let (m, ci) = mean_ci(&es);
        (Some(m), ci)
    };

    let bs: Vec<f64> = reps.iter().map(|r| r.delta_b).collect();
    let (delta_b_hat, ci_halfwidth_b) = mean_ci(&bs);
    let n = reps.len() as f64;

    Ok(SimResult {
        delta_b_hat,
        delta_e_hat,
        ci_halfwidth_b,
        ci_halfwidth_e,
        eavesdropped_fraction: total_captured as f64
            / (config.num_arrivals as f64 * config.num_replications as f64),
        sim_horizon: reps
            .iter()
            .map(|r| r.horizon_end - r.horizon_start)
            .sum::<f64>()
            / n,
        bob_mean_system_time: reps.iter().map(|r| r.bob_mean_system_time).sum::<f64>() / n,
        replications: reps,
    })
}

/// Full record of one replication: both age traces and the event log.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub bob: AgeTrace,
    pub eve: AgeTrace,
    pub events: Vec<Event>,
    pub horizon: (f64, f64),
}

struct Recorder {
    bob: AgeTrace,
    eve: AgeTrace,
    bob_latest: f64,
    eve_latest: f64,
    events: Vec<Event>,
}

fn push_record(trace: &mut AgeTrace, latest: &mut f64, time: f64, generation: f64) {
    trace.records.push(AgeRecord {
        delivery_time: time,
        age_after_reset: time - generation.max(*latest),
        age_before_reset: time - *latest,
    });
    *latest = latest.max(generation);
}

impl Observer for Recorder {
    fn arrival(&mut self, id: u64, time: f64) {
        self.events.push(Event {
            time,
            kind: EventKind::Arrival,
            packet_id: id,
            generation_time: time,
        });
    }

    fn bob_departure(&mut self, id: u64, time: f64, generation: f64) {
        push_record(&mut self.bob, &mut self.bob_latest, time, generation);
        self.events.push(Event {
            time,
            kind: EventKind::BobDeparture,
            packet_id: id,
            generation_time: generation,
        });
    }

    fn eve_departure(&mut self, id: u64, time: f64, generation: f64) {
        push_record(&mut self.eve, &mut self.eve_latest, time, generation);
        self.events.push(Event {
            time,
            kind: EventKind::EveDeparture,
            packet_id: id,
            generation_time: generation,
        });
    }
}

/// Replays one replication of `config` and keeps every event. Memory grows
/// linearly with `num_arrivals`.
pub fn record(config: &SimConfig, replication: u32) -> Result<Recording> {
    config.validate()?;
    let mut rec = Recorder {
        bob: AgeTrace::new(0.0, 0.0),
        eve: AgeTrace::new(0.0, 0.0),
        bob_latest: 0.0,
        eve_latest: 0.0,
        events: Vec::with_capacity(config.num_arrivals as usize * 2),
    };
    simulate(config, replication, &mut rec);
    rec.events.sort_by(|x, y| {
        x.time
            .total_cmp(&y.time)
            .then(x.kind.cmp(&y.kind))
            .then(x.packet_id.cmp(&y.packet_id))
    });
    Ok(Recording {
        bob: rec.bob,
        eve: rec.eve,
        events: rec.events,
        horizon: horizon(config, replication),
    })
}
