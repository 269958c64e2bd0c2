use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{Event, EventCatalog, FilterReport};
use crate::error::{Error, Result};

/// Default duplicate window: one minute.
pub const DEFAULT_MERGE_MINUTES: f64 = 1.0;
/// Default duplicate radius: 100 metres.
pub const DEFAULT_MERGE_KM: f64 = 0.1;

/// Removes near-duplicates with a greedy scan in time order.
///
/// An event is dropped when an earlier *retained* event lies strictly within
/// `t_merge` days and strictly within `s_merge` km. Removed events never
/// suppress later ones, so the first event of each group survives.
pub fn merge_duplicates(
    catalog: &EventCatalog,
    t_merge: f64,
    s_merge: f64,
) -> Result<(EventCatalog, FilterReport)> {
    if !(t_merge > 0.0 && s_merge > 0.0 && t_merge.is_finite() && s_merge.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "merge thresholds must be positive, got {t_merge} days / {s_merge} km"
        )));
    }
    let mut kept: Vec<Event> = Vec::with_capacity(catalog.len());
    for e in catalog.events() {
        let duplicate = kept
            .iter()
            .rev()
            .take_while(|k| e.t - k.t < t_merge)
            .any(|k| e.distance(k) < s_merge);
        if !duplicate {
            kept.push(*e);
        }
    }
    let removed = catalog.len() - kept.len();
    let rule = format!(
        "merge duplicates within {} s and {} m",
        t_merge * 86_400.0,
        s_merge * 1_000.0
    );
    Ok((
        catalog.with_events(kept)?,
        FilterReport::new(catalog.len(), removed, rule),
    ))
}

/// An inclusive month/day interval, repeated every year. Intervals whose end
/// precedes their start wrap across the new year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolidayWindow {
    pub start: (u32, u32),
    pub end: (u32, u32),
}

impl HolidayWindow {
    pub fn new(start: (u32, u32), end: (u32, u32)) -> Result<Self> {
        for (m, d) in [start, end] {
            // 2000 is a leap year, so Feb 29 is accepted
            if NaiveDate::from_ymd_opt(2000, m, d).is_none() {
                return Err(Error::InvalidArgument(format!("invalid month/day {m}/{d}")));
            }
        }
        Ok(HolidayWindow { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        let md = (date.month(), date.day());
        if self.start <= self.end {
            self.start <= md && md <= self.end
        } else {
            md >= self.start || md <= self.end
        }
    }

    /// Parses `MM-DD..MM-DD`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad =
            || Error::InvalidArgument(format!("holiday window must be MM-DD..MM-DD, got {text:?}"));
        let (a, b) = text.trim().split_once("..").ok_or_else(bad)?;
        let md = |s: &str| -> Result<(u32, u32)> {
            let (m, d) = s.trim().split_once('-').ok_or_else(bad)?;
            Ok((m.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?))
        };
        HolidayWindow::new(md(a)?, md(b)?)
    }
}

impl std::fmt::Display for HolidayWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:02}-{:02}..{:02}-{:02}",
            self.start.0, self.start.1, self.end.0, self.end.1
        )
    }
}

/// July 1-6 and December 29 - January 2.
pub fn default_holidays() -> Vec<HolidayWindow> {
    vec![
        HolidayWindow {
            start: (7, 1),
            end: (7, 6),
        },
        HolidayWindow {
            start: (12, 29),
            end: (1, 2),
        },
    ]
}

/// Drops every event whose civil date falls in any of `windows`.
pub fn remove_holidays(
    catalog: &EventCatalog,
    windows: &[HolidayWindow],
) -> Result<(EventCatalog, FilterReport)> {
    let rule = format!(
        "remove holidays [{}]",
        windows
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    if windows.is_empty() {
        return Ok((catalog.clone(), FilterReport::new(catalog.len(), 0, rule)));
    }
    if catalog.calendar_anchor().is_none() {
        return Err(Error::MissingCalendarAnchor);
    }
    let kept: Vec<Event> = catalog
        .events()
        .iter()
        .filter(|e| {
            let date = catalog.civil_date(e.t).expect("anchor checked above");
            !windows.iter().any(|w| w.contains(date))
        })
        .copied()
        .collect();
    let removed = catalog.len() - kept.len();
    Ok((
        catalog.with_events(kept)?,
        FilterReport::new(catalog.len(), removed, rule),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Region;

    const MINUTE: f64 = 1.0 / 1440.0;
    const SECOND: f64 = 1.0 / 86_400.0;

    fn catalog(events: Vec<Event>) -> EventCatalog {
        EventCatalog::new(events, Region::square(10.0).unwrap(), 400.0, None, "t").unwrap()
    }

    fn anchored(events: Vec<Event>, y: i32, m: u32, d: u32) -> EventCatalog {
        let anchor = NaiveDate::from_ymd_opt(y, m, d)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        catalog(events).with_calendar_anchor(Some(anchor))
    }

    #[test]
    fn close_pair_is_merged() {
        let c = catalog(vec![
            Event::new(5.0, 5.0, 1.0),
            Event::new(5.05, 5.0, 1.0 + 30.0 * SECOND),
        ]);
        let (out, report) = merge_duplicates(&c, MINUTE, 0.1).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(report.removed_count, 1);
        assert_eq!(out.events()[0].t, 1.0);
    }

    #[test]
    fn far_pair_is_kept() {
        let c = catalog(vec![
            Event::new(5.0, 5.0, 1.0),
            Event::new(5.15, 5.0, 1.0 + 30.0 * SECOND),
        ]);
        let (out, report) = merge_duplicates(&c, MINUTE, 0.1).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(report.removed_count, 0);
    }

    #[test]
    fn chain_compares_against_retained_only() {
        // A -> B: 45 s, 80 m; B -> C: 35 s, 80 m; A -> C: 80 s, 160 m
        let a = Event::new(5.0, 5.0, 0.0);
        let b = Event::new(5.08, 5.0, 45.0 * SECOND);
        let c = Event::new(5.16, 5.0, 80.0 * SECOND);
        let (out, report) = merge_duplicates(&catalog(vec![a, b, c]), MINUTE, 0.1).unwrap();
        assert_eq!(out.events(), &[a, c]);
        assert_eq!(report.removed_count, 1);
    }

    #[test]
    fn merge_rejects_non_positive_thresholds() {
        let c = catalog(vec![]);
        assert!(merge_duplicates(&c, 0.0, 0.1).is_err());
        assert!(merge_duplicates(&c, MINUTE, -1.0).is_err());
    }

    #[test]
    fn july_fourth_events_removed() {
        // anchor Jan 1 2011; July 4 is day 184
        let mut events = Vec::new();
        for i in 0..10 {
            events.push(Event::new(
                1.0 + i as f64 * 0.1,
                1.0,
                184.0 + 0.05 * i as f64,
            ));
        }
        for i in 0..20 {
            events.push(Event::new(
                2.0,
                1.0 + i as f64 * 0.1,
                10.0 + 10.0 * i as f64,
            ));
        }
        let c = anchored(events, 2011, 1, 1);
        let (out, report) = remove_holidays(&c, &default_holidays()).unwrap();
        assert_eq!(out.len(), 20);
        assert_eq!(report.removed_count, 10);
    }

    #[test]
    fn new_year_window_wraps() {
        // anchor Dec 30 2011: t=1.5 is Dec 31, t=2.5 is Jan 1, t=5.5 is Jan 4
        let c = anchored(
            vec![
                Event::new(1.0, 1.0, 1.5),
                Event::new(1.0, 1.0, 2.5),
                Event::new(1.0, 1.0, 5.5),
            ],
            2011,
            12,
            30,
        );
        let (out, report) = remove_holidays(&c, &default_holidays()).unwrap();
        assert_eq!(report.removed_count, 2);
        assert_eq!(out.events()[0].t, 5.5);
    }

    #[test]
    fn missing_anchor_is_an_error() {
        let c = catalog(vec![Event::new(1.0, 1.0, 1.0)]);
        assert!(matches!(
            remove_holidays(&c, &default_holidays()),
            Err(Error::MissingCalendarAnchor)
        ));
        // no windows: no anchor needed
        assert!(remove_holidays(&c, &[]).is_ok());
    }

    #[test]
    fn holiday_window_parse_and_display() {
        let w = HolidayWindow::parse("12-29..01-02").unwrap();
        assert_eq!(w, default_holidays()[1]);
        assert_eq!(w.to_string(), "12-29..01-02");
        assert!(HolidayWindow::parse("13-01..01-02").is_err());
        assert!(HolidayWindow::parse("garbage").is_err());
    }
}
