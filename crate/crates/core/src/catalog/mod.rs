//! Event catalogs: the data model, file formats, and the cleaning filters.

mod filters;
pub mod io;
pub mod projection;

use std::cmp::Ordering;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filters::{
    default_holidays, merge_duplicates, remove_holidays, HolidayWindow, DEFAULT_MERGE_KM,
    DEFAULT_MERGE_MINUTES,
};

/// One point event. `x`/`y` are planar kilometres, `t` is days since the
/// start of the observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Event {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        Event { x, y, t }
    }

    /// Total order on the `(t, x, y)` key.
    pub fn key_cmp(&self, other: &Event) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.x.total_cmp(&other.x))
            .then(self.y.total_cmp(&other.y))
    }

    pub fn distance(&self, other: &Event) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned spatial rectangle in kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let region = Region {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        region.validate()?;
        Ok(region)
    }

    /// Square `[0, side] x [0, side]`.
    pub fn square(side: f64) -> Result<Self> {
        Region::new(0.0, side, 0.0, side)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::InvalidArgument(format!(
                "region must have positive area, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    /// Smallest region containing every event. Fails when the points are
    /// collinear along an axis (zero area).
    pub fn bounding(events: &[Event]) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        let mut r = Region {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for e in events {
            r.x_min = r.x_min.min(e.x);
            r.x_max = r.x_max.max(e.x);
            r.y_min = r.y_min.min(e.y);
            r.y_max = r.y_max.max(e.y);
        }
        r.validate()?;
        Ok(r)
    }
}

/// Outcome of a catalog filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input_count: usize,
    pub removed_count: usize,
    pub removed_fraction: f64,
    pub rule: String,
}

impl FilterReport {
    pub fn new(input_count: usize, removed_count: usize, rule: impl Into<String>) -> Self {
        debug_assert!(removed_count <= input_count);
        let removed_fraction = if input_count == 0 {
            0.0
        } else {
            removed_count as f64 / input_count as f64
        };
        FilterReport {
            input_count,
            removed_count,
            removed_fraction,
            rule: rule.into(),
        }
    }
}

/// Events sorted by `(t, x, y)` together with the observation window
/// `region x [0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventCatalog {
    events: Vec<Event>,
    region: Region,
    window: f64,
    calendar_anchor: Option<NaiveDateTime>,
    provenance: String,
}

impl EventCatalog {
    /// Validates and sorts. Every event must be finite and lie inside
    /// `region x [0, window]`.
    pub fn new(
        mut events: Vec<Event>,
        region: Region,
        window: f64,
        calendar_anchor: Option<NaiveDateTime>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        region.validate()?;
        if !(window.is_finite() && window > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "window length must be positive, got {window}"
            )));
        }
        for (i, e) in events.iter().enumerate() {
            if !(e.x.is_finite() && e.y.is_finite() && e.t.is_finite()) {
                return Err(Error::InvalidArgument(format!("event {i} is not finite")));
            }
            if !region.contains(e.x, e.y) || e.t < 0.0 || e.t > window {
                return Err(Error::InvalidArgument(format!(
                    "event {i} ({}, {}, {}) lies outside region x [0, {window}]",
                    e.x, e.y, e.t
                )));
            }
        }
        events.sort_by(Event::key_cmp);
        Ok(EventCatalog {
            events,
            region,
            window,
            calendar_anchor,
            provenance: provenance.into(),
        })
    }

    /// A catalog with the same metadata and a different event set.
    pub fn with_events(&self, events: Vec<Event>) -> Result<Self> {
        EventCatalog::new(
            events,
            self.region,
            self.window,
            self.calendar_anchor,
            self.provenance.clone(),
        )
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn with_calendar_anchor(mut self, anchor: Option<NaiveDateTime>) -> Self {
        self.calendar_anchor = anchor;
        self
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Window length `T` in days.
    pub fn window(&self) -> f64 {
        self.window
    }

    /// Civil date-time of `t = 0`, when known.
    pub fn calendar_anchor(&self) -> Option<NaiveDateTime> {
        self.calendar_anchor
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Civil date of an elapsed time, given the calendar anchor.
    pub fn civil_date(&self, t: f64) -> Option<NaiveDate> {
        let anchor = self.calendar_anchor?;
        let micros = (t * 86_400_000_000.0).round() as i64;
        Some((anchor + TimeDelta::microseconds(micros)).date())
    }

    pub fn is_sorted(&self) -> bool {
        self.events
            .windows(2)
            .all(|w| w[0].key_cmp(&w[1]) != Ordering::Greater)
    }
}
