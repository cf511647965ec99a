//! Synthetic pyranometer records with a realistic diurnal shape.
//!
//! For local fractional hour `h` and daylight factor `s(h) = max(0, sin(π(h−6)/12))`:
//!
//! * irradiance during `6 ≤ h ≤ 18` is `A·s(h)·cloud(t) + N(0, 5)`, where the
//!   daily peak `A` is uniform on [700, 1459] and `cloud(t)` combines a daily
//!   clearness level with short-lived per-sample dips;
//! * irradiance at night is a small non-positive sensor offset, never below −9;
//! * temperature is `296 + 6·s(h) + offset_day + N(0, 0.2)` Kelvin with
//!   `offset_day ~ N(0, 1)`.
//!
//! Samples are five minutes apart (288 per day) and every random draw comes
//! from one seeded generator, so equal seeds give identical records.

use std::f64::consts::PI;

use chrono::{Duration, NaiveDate};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::dataset::Record;
use crate::{rng, Error, Result};

pub const SAMPLES_PER_DAY: usize = 288;
pub const MIN_PEAK_WM2: f64 = 700.0;
pub const MAX_PEAK_WM2: f64 = 1459.0;
pub const NIGHT_FLOOR_WM2: f64 = -9.0;

/// First day produced by [`generate_synthetic`].
pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 5, 1).expect("valid date")
}

pub fn daylight_factor(hour: f64) -> f64 {
    (PI * (hour - 6.0) / 12.0).sin().max(0.0)
}

/// `days` days of records starting 2020-05-01.
pub fn generate_synthetic(days: usize, seed: u64) -> Result<Vec<Record>> {
    generate_synthetic_from(default_start(), days, seed)
}

pub fn generate_synthetic_from(start: NaiveDate, days: usize, seed: u64) -> Result<Vec<Record>> {
    if days == 0 {
        return Err(Error::invalid("days must be at least 1"));
    }
    let mut rng = rng::seeded(seed);
    let unit = Normal::<f64>::new(0.0, 1.0).expect("valid normal");
    let mut out = Vec::with_capacity(days * SAMPLES_PER_DAY);

    for d in 0..days {
        let date = start + Duration::days(d as i64);
        let midnight = date.and_hms_opt(0, 0, 0).expect("valid time");
        let peak = rng.random_range(MIN_PEAK_WM2..=MAX_PEAK_WM2);
        let clearness: f64 = rng.random_range(0.55..=1.0);
        let temp_offset = unit.sample(&mut rng);

        for i in 0..SAMPLES_PER_DAY {
            let minutes = (i * 5) as i64;
            let timestamp = midnight + Duration::minutes(minutes);
            let hour = minutes as f64 / 60.0;
            let s = daylight_factor(hour);

            let dip: f64 = if rng.random_bool(0.08) {
                rng.random_range(0.3..0.9)
            } else {
                1.0
            };
            let cloud = (clearness + 0.05 * unit.sample(&mut rng)).clamp(0.05, 1.0) * dip;
            let irradiance = if (6.0..=18.0).contains(&hour) {
                (peak * s * cloud + 5.0 * unit.sample(&mut rng)).clamp(NIGHT_FLOOR_WM2, MAX_PEAK_WM2)
            } else {
                (-1.0 + 1.5 * unit.sample(&mut rng)).clamp(NIGHT_FLOOR_WM2, 0.0)
            };
            let temperature = 296.0 + 6.0 * s + temp_offset + 0.2 * unit.sample(&mut rng);

            out.push(Record::new(
                timestamp,
                round2(irradiance),
                round2(temperature),
            ));
        }
    }
    Ok(out)
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0 + 0.0
}
