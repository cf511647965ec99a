//! Time source and local-time helpers.

use chrono::{DateTime, Duration, FixedOffset, NaiveDateTime, Timelike, Utc};

/// Seconds east of UTC for the site's local time (America/Guayaquil, no DST).
pub const LOCAL_OFFSET_SECS: i32 = -5 * 3600;

pub fn local_offset() -> FixedOffset {
    FixedOffset::east_opt(LOCAL_OFFSET_SECS).expect("valid offset")
}

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Always reports the same instant.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl FixedClock {
    /// Freezes time at the given local wall-clock time.
    pub fn at_local(local: NaiveDateTime) -> Self {
        FixedClock(from_local(local))
    }
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

pub fn to_local(t: DateTime<Utc>) -> NaiveDateTime {
    t.with_timezone(&local_offset()).naive_local()
}

pub fn from_local(local: NaiveDateTime) -> DateTime<Utc> {
    (local - Duration::seconds(i64::from(LOCAL_OFFSET_SECS))).and_utc()
}

/// The first whole local hour at or after `t`.
pub fn next_full_hour(t: NaiveDateTime) -> NaiveDateTime {
    let floor = t
        .with_minute(0)
        .and_then(|x| x.with_second(0))
        .and_then(|x| x.with_nanosecond(0))
        .expect("valid truncation");
    if floor == t {
        floor
    } else {
        floor + Duration::hours(1)
    }
}
