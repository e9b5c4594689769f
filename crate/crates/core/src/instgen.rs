//! Seeded synthetic batches.
//!
//! Riders, pickups and dropoffs are drawn uniformly inside a latitude/longitude
//! box. Distances are great-circle distances and travel times assume a constant
//! speed. Every entity draws from its own ChaCha stream, so adding a field to
//! one entity never shifts the draws of another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GeoPoint, Instance, Matrix, Order, PairCosts, Rider, Weights};
use crate::num::Real;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Offset separating order streams from rider streams.
const ORDER_STREAM: u64 = 1 << 32;

/// Great-circle distance in kilometres.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Default for BoundingBox {
    /// Roughly Bangalore.
    fn default() -> Self {
        Self {
            lat_min: 12.85,
            lat_max: 13.10,
            lon_min: 77.45,
            lon_max: 77.75,
        }
    }
}

impl BoundingBox {
    fn sample(&self, rng: &mut impl Rng) -> GeoPoint {
        GeoPoint::new(
            rng.gen_range(self.lat_min..=self.lat_max),
            rng.gen_range(self.lon_min..=self.lon_max),
        )
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.lat_min..=self.lat_max).contains(&p.lat) && (self.lon_min..=self.lon_max).contains(&p.lon)
    }
}

/// Inclusive range `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span<V> {
    pub lo: V,
    pub hi: V,
}

impl<V: PartialOrd + Copy> Span<V> {
    pub const fn new(lo: V, hi: V) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: V) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.lo <= self.hi {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{name} range is empty")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Number of orders; the batch has the same number of riders.
    pub size: usize,
    pub seed: u64,
    pub bbox: BoundingBox,
    pub speed_kmph: f64,
    pub capacity: Span<u32>,
    pub completed_orders: Span<u32>,
    pub order_size: Span<u32>,
    /// Minutes.
    pub prepare_time: Span<f64>,
    /// Minutes added to the prepare time to obtain the delivery promise.
    pub promised_slack: Span<f64>,
    /// Kilometres.
    pub geofence_km: f64,
    pub max_load: u32,
    pub weights: Weights<f64>,
}

impl GenConfig {
    pub fn new(size: usize, seed: u64) -> Self {
        Self {
            size,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.bbox;
        if !(b.lat_min < b.lat_max && b.lon_min < b.lon_max) {
            return Err(Error::InvalidConfig("bounding box is degenerate".into()));
        }
        if !(-90.0..=90.0).contains(&b.lat_min) || !(-90.0..=90.0).contains(&b.lat_max) {
            return Err(Error::InvalidConfig("latitude out of range".into()));
        }
        if self.size == 0 {
            return Err(Error::InvalidConfig("size must be positive".into()));
        }
        if !(self.speed_kmph > 0.0 && self.speed_kmph.is_finite()) {
            return Err(Error::InvalidConfig("speed must be positive".into()));
        }
        self.capacity.check("capacity")?;
        self.completed_orders.check("completed_orders")?;
        self.order_size.check("order size")?;
        self.prepare_time.check("prepare_time")?;
        self.promised_slack.check("promised_slack")?;
        if self.capacity.lo < 1 || self.order_size.lo < 1 {
            return Err(Error::InvalidConfig("capacities and sizes start at 1".into()));
        }
        if self.order_size.hi > self.capacity.lo {
            return Err(Error::InvalidConfig(
                "largest order must fit the smallest rider (order_size.hi <= capacity.lo)".into(),
            ));
        }
        if self.prepare_time.lo < 0.0 || self.promised_slack.lo <= 0.0 {
            return Err(Error::InvalidConfig("prepare_time >= 0 and promised_slack > 0 required".into()));
        }
        if self.max_load < 1 {
            return Err(Error::InvalidConfig("max_load must be at least 1".into()));
        }
        if !(self.geofence_km >= 0.0) {
            return Err(Error::InvalidConfig("geofence must be non-negative".into()));
        }
        let w = &self.weights;
        if [w.alpha, w.beta, w.gamma, w.delta].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConfig("weights must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            size: 10,
            seed: 0,
            bbox: BoundingBox::default(),
            speed_kmph: 20.0,
            capacity: Span::new(4, 8),
            completed_orders: Span::new(0, 5),
            order_size: Span::new(1, 3),
            prepare_time: Span::new(5.0, 25.0),
            promised_slack: Span::new(20.0, 50.0),
            geofence_km: 4.0,
            max_load: 2,
            weights: Weights {
                alpha: 1.0,
                beta: 1.0,
                gamma: 1.0,
                delta: 0.1,
            },
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Draws one batch. A pure function of `cfg`.
pub fn generate<T: Real>(cfg: &GenConfig) -> Result<Instance<T>> {
    cfg.validate()?;
    let n = cfg.size;

    let riders: Vec<Rider> = (0..n)
        .map(|i| {
            let mut rng = stream(cfg.seed, i as u64);
            let location = cfg.bbox.sample(&mut rng);
            Rider {
                id: i,
                location,
                capacity: rng.gen_range(cfg.capacity.lo..=cfg.capacity.hi),
                completed_orders: rng.gen_range(cfg.completed_orders.lo..=cfg.completed_orders.hi),
            }
        })
        .collect();

    let orders: Vec<Order<f64>> = (0..n)
        .map(|j| {
            let mut rng = stream(cfg.seed, ORDER_STREAM + j as u64);
            let pickup = cfg.bbox.sample(&mut rng);
            let dropoff = cfg.bbox.sample(&mut rng);
            let size = rng.gen_range(cfg.order_size.lo..=cfg.order_size.hi);
            let prepare = rng.gen_range(cfg.prepare_time.lo..=cfg.prepare_time.hi);
            let slack = rng.gen_range(cfg.promised_slack.lo..=cfg.promised_slack.hi);
            Order {
                id: j,
                pickup,
                dropoff,
                size,
                prepare_time: prepare,
                promised_time: prepare + slack,
            }
        })
        .collect();

    let minutes = |km: f64| km / cfg.speed_kmph * 60.0;
    let dist = Matrix::from_fn(n, n, |i, j| haversine_km(riders[i].location, orders[j].pickup));
    let to_pickup = dist.map(minutes);
    let deliver = Matrix::from_fn(n, n, |_, j| minutes(haversine_km(orders[j].pickup, orders[j].dropoff)));
    let wait = Matrix::from_fn(n, n, |i, j| (orders[j].prepare_time - to_pickup.get(i, j)).abs());

    let cast = |m: &Matrix<f64>| Matrix::from_fn(n, n, |i, j| T::lit(m.get(i, j)));
    let w = &cfg.weights;
    Ok(Instance {
        riders,
        orders: orders
            .into_iter()
            .map(|o| Order {
                id: o.id,
                pickup: o.pickup,
                dropoff: o.dropoff,
                size: o.size,
                prepare_time: T::lit(o.prepare_time),
                promised_time: T::lit(o.promised_time),
            })
            .collect(),
        costs: PairCosts {
            pickup_dist: cast(&dist),
            pickup_time: cast(&to_pickup),
            deliver_time: cast(&deliver),
            wait_time: cast(&wait),
        },
        geofence: T::lit(cfg.geofence_km),
        max_load: cfg.max_load,
        weights: Weights {
            alpha: T::lit(w.alpha),
            beta: T::lit(w.beta),
            gamma: T::lit(w.gamma),
            delta: T::lit(w.delta),
        },
        seed: cfg.seed,
        size: n,
    })
}

fn scale_of<T: Real>(m: &Matrix<T>) -> T {
    match m.max() {
        Some(v) if v > T::zero() => v,
        _ => T::one(),
    }
}

/// Rescales the cost data to `[0, 1]`.
///
/// Distances and the geofence share one factor. Every time quantity that
/// enters the SLA check (travel times, prepare and promise times) shares the
/// delivery-time factor, so which pairs violate a soft bound is unchanged.
/// Wait time has its own factor. An all-zero matrix keeps factor 1, which also
/// makes the operation idempotent.
pub fn normalize<T: Real>(inst: &Instance<T>) -> Instance<T> {
    let dist = scale_of(&inst.costs.pickup_dist);
    let time = scale_of(&inst.costs.deliver_time);
    let wait = scale_of(&inst.costs.wait_time);
    let mut out = inst.clone();
    out.costs = PairCosts {
        pickup_dist: inst.costs.pickup_dist.map(|v| v / dist),
        pickup_time: inst.costs.pickup_time.map(|v| v / time),
        deliver_time: inst.costs.deliver_time.map(|v| v / time),
        wait_time: inst.costs.wait_time.map(|v| v / wait),
    };
    out.geofence = inst.geofence / dist;
    for o in &mut out.orders {
        o.prepare_time /= time;
        o.promised_time /= time;
    }
    out
}

/// One generated instance per seed, with default settings.
pub fn generate_family<T: Real>(size: usize, seeds: impl IntoIterator<Item = u64>) -> Result<Vec<Instance<T>>> {
    seeds
        .into_iter()
        .map(|seed| generate(&GenConfig::new(size, seed)))
        .collect()
}
