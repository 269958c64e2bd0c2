//! Catalog file formats.
//!
//! * planar CSV: header `x_km,y_km,t_days`
//! * lat/lon CSV: header `lat,lon,timestamp` with ISO-8601 timestamps
//! * canonical on-disk catalog: a planar CSV plus a JSON sidecar
//!   (`<name>.meta.json`) carrying region bounds, window length, calendar
//!   anchor and provenance.
//!
//! Planar values are written with Rust's shortest round-trip float
//! formatting, so write -> read reproduces every coordinate bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::projection::Projection;
use super::{Event, EventCatalog, Region};
use crate::error::{Error, Result};

pub const PLANAR_HEADER: [&str; 3] = ["x_km", "y_km", "t_days"];
pub const LATLON_HEADER: [&str; 3] = ["lat", "lon", "timestamp"];

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogFormat {
    PlanarCsv,
    LatLonCsv,
}

impl FromStr for CatalogFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv-planar" => Ok(CatalogFormat::PlanarCsv),
            "csv-latlon" => Ok(CatalogFormat::LatLonCsv),
            other => Err(Error::InvalidArgument(format!(
                "unknown catalog format {other:?} (expected csv-planar or csv-latlon)"
            ))),
        }
    }
}

impl std::fmt::Display for CatalogFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CatalogFormat::PlanarCsv => "csv-planar",
            CatalogFormat::LatLonCsv => "csv-latlon",
        })
    }
}

/// What to do with rows whose timestamp falls outside the configured window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutOfWindow {
    #[default]
    Fail,
    Skip,
}

/// Ingestion settings. Unset fields are inferred from the data: the region
/// from the bounding box, the window start from the first timestamp's date,
/// the window length from the last event, and the projection origin from the
/// centroid.
#[derive(Debug, Clone, Default)]
pub struct LoadConfig {
    pub region: Option<Region>,
    pub window_start: Option<NaiveDateTime>,
    pub window_days: Option<f64>,
    pub out_of_window: OutOfWindow,
    pub projection: Option<Projection>,
    pub provenance: Option<String>,
}

/// Sidecar metadata of the canonical catalog format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogMetadata {
    pub region: Region,
    pub window_days: f64,
    #[serde(default)]
    pub calendar_anchor: Option<String>,
    #[serde(default)]
    pub provenance: String,
}

impl CatalogMetadata {
    pub fn of(catalog: &EventCatalog) -> Self {
        CatalogMetadata {
            region: *catalog.region(),
            window_days: catalog.window(),
            calendar_anchor: catalog
                .calendar_anchor()
                .map(|a| a.format(TIMESTAMP_FORMAT).to_string()),
            provenance: catalog.provenance().to_string(),
        }
    }

    pub fn anchor(&self) -> Result<Option<NaiveDateTime>> {
        self.calendar_anchor
            .as_deref()
            .map(|s| {
                parse_timestamp(s)
                    .map_err(|_| Error::Metadata(format!("bad calendar_anchor {s:?}")))
            })
            .transpose()
    }
}

pub fn parse_metadata(text: &str) -> Result<CatalogMetadata> {
    let meta: CatalogMetadata =
        serde_json::from_str(text).map_err(|e| Error::Metadata(e.to_string()))?;
    meta.region
        .validate()
        .map_err(|e| Error::Metadata(e.to_string()))?;
    if !(meta.window_days.is_finite() && meta.window_days > 0.0) {
        return Err(Error::Metadata(format!(
            "window_days must be positive, got {}",
            meta.window_days
        )));
    }
    meta.anchor()?;
    Ok(meta)
}

/// Accepts RFC 3339 (the offset is dropped, keeping local civil time),
/// `YYYY-MM-DDTHH:MM:SS[.fff]`, the same with a space separator, or a bare
/// date (midnight).
pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.naive_local());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight exists"));
    }
    Err(Error::InvalidArgument(format!(
        "unparseable timestamp {s:?}"
    )))
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Reads rows of a three-column CSV, checking the header. Returns
/// `(line number, fields)` pairs.
fn read_rows(data: &[u8], header: [&str; 3]) -> Result<Vec<(usize, [String; 3])>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(data);
    let found = reader.headers().map_err(|e| Error::Parse {
        row: 1,
        message: e.to_string(),
    })?;
    if found.is_empty() || (found.len() == 1 && found[0].is_empty()) {
        return Err(Error::EmptyFile);
    }
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::Parse {
            row: 1,
            message: format!("expected header {}, found {:?}", header.join(","), found),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Parse {
                row: line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        rows.push((
            line,
            [
                record[0].to_string(),
                record[1].to_string(),
                record[2].to_string(),
            ],
        ));
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(rows)
}

fn parse_f64(row: usize, field: &str, name: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            message: format!("unparseable {name} {field:?}"),
        }),
    }
}

/// Applies the window policy to `(line, event)` rows and builds the catalog.
fn assemble(
    rows: Vec<(usize, Event)>,
    config: &LoadConfig,
    anchor: Option<NaiveDateTime>,
    default_provenance: &str,
) -> Result<EventCatalog> {
    let window = match config.window_days {
        Some(t) => t,
        None => rows.iter().map(|(_, e)| e.t).fold(0.0, f64::max),
    };
    let inside = |e: &Event| e.t >= 0.0 && e.t <= window;
    let outside = rows.iter().filter(|(_, e)| !inside(e)).count();
    if outside > 0 {
        match config.out_of_window {
            OutOfWindow::Fail => return Err(Error::OutOfWindow { count: outside }),
            OutOfWindow::Skip => log::warn!("skipping {outside} event(s) outside the window"),
        }
    }
    let rows: Vec<(usize, Event)> = rows.into_iter().filter(|(_, e)| inside(e)).collect();
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }
    let events: Vec<Event> = rows.iter().map(|(_, e)| *e).collect();
    let region = match config.region {
        Some(r) => {
            if let Some((line, _)) = rows.iter().find(|(_, e)| !r.contains(e.x, e.y)) {
                return Err(Error::Parse {
                    row: *line,
                    message: "coordinates outside the configured region".into(),
                });
            }
            r
        }
        None => Region::bounding(&events)?,
    };
    if !(window > 0.0) {
        return Err(Error::Degenerate(
            "window length is zero; configure window_days".into(),
        ));
    }
    let provenance = config
        .provenance
        .clone()
        .unwrap_or_else(|| default_provenance.to_string());
    EventCatalog::new(events, region, window, anchor, provenance)
}

/// Parses a planar CSV (`x_km,y_km,t_days`).
pub fn parse_planar_csv(data: &[u8], config: &LoadConfig) -> Result<EventCatalog> {
    let rows = read_rows(data, PLANAR_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok((
                line,
                Event::new(
                    parse_f64(line, &f[0], "x_km")?,
                    parse_f64(line, &f[1], "y_km")?,
                    parse_f64(line, &f[2], "t_days")?,
                ),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(rows, config, config.window_start, "csv-planar")
}

/// Parses a lat/lon CSV (`lat,lon,timestamp`), projecting to planar km and
/// converting timestamps to fractional days since the window start.
pub fn parse_latlon_csv(data: &[u8], config: &LoadConfig) -> Result<EventCatalog> {
    let raw = read_rows(data, LATLON_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let lat = parse_f64(line, &f[0], "lat")?;
            let lon = parse_f64(line, &f[1], "lon")?;
            if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                return Err(Error::Parse {
                    row: line,
                    message: format!("lat/lon ({lat}, {lon}) out of range"),
                });
            }
            let ts = parse_timestamp(&f[2]).map_err(|_| Error::Parse {
                row: line,
                message: format!("unparseable timestamp {:?}", f[2]),
            })?;
            Ok((line, lat, lon, ts))
        })
        .collect::<Result<Vec<_>>>()?;

    let start = match config.window_start {
        Some(s) => s,
        None => raw
            .iter()
            .map(|r| r.3)
            .min()
            .expect("rows nonempty")
            .date()
            .and_hms_opt(0, 0, 0)
            .expect("midnight exists"),
    };
    let projection = match config.projection {
        Some(p) => p,
        None => {
            let pts: Vec<(f64, f64)> = raw.iter().map(|r| (r.1, r.2)).collect();
            Projection::about_centroid(&pts).expect("rows nonempty")
        }
    };
    let rows = raw
        .into_iter()
        .map(|(line, lat, lon, ts)| {
            let (x, y) = projection.project(lat, lon);
            let micros = (ts - start)
                .num_microseconds()
                .ok_or_else(|| Error::Parse {
                    row: line,
                    message: "timestamp too far from window start".into(),
                })?;
            Ok((line, Event::new(x, y, micros as f64 / 86_400_000_000.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(rows, config, Some(start), "csv-latlon")
}

/// Reads a raw catalog file.
pub fn load_catalog(
    path: &Path,
    format: CatalogFormat,
    config: &LoadConfig,
) -> Result<EventCatalog> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        CatalogFormat::PlanarCsv => parse_planar_csv(&data, config),
        CatalogFormat::LatLonCsv => parse_latlon_csv(&data, config),
    }
}

pub fn planar_csv_string(catalog: &EventCatalog) -> String {
    let mut out = String::with_capacity(32 * (catalog.len() + 1));
    out.push_str(&PLANAR_HEADER.join(","));
    out.push('\n');
    for e in catalog.events() {
        writeln!(out, "{},{},{}", e.x, e.y, e.t).expect("writing to a String cannot fail");
    }
    out
}

/// Parses the canonical format from its two parts.
pub fn parse_canonical(csv: &[u8], metadata: &str) -> Result<EventCatalog> {
    let meta = parse_metadata(metadata)?;
    let config = LoadConfig {
        region: Some(meta.region),
        window_start: meta.anchor()?,
        window_days: Some(meta.window_days),
        out_of_window: OutOfWindow::Fail,
        projection: None,
        provenance: Some(meta.provenance.clone()),
    };
    match parse_planar_csv(csv, &config) {
        // a canonical catalog may legitimately hold zero events
        Err(Error::EmptyFile) if !csv.is_empty() => EventCatalog::new(
            vec![],
            meta.region,
            meta.window_days,
            meta.anchor()?,
            meta.provenance,
        ),
        other => other,
    }
}

/// Writes the canonical format: `path` (planar CSV) plus its sidecar.
pub fn write_catalog(catalog: &EventCatalog, path: &Path) -> Result<()> {
    std::fs::write(path, planar_csv_string(catalog)).map_err(|e| Error::io(path, e))?;
    let meta = serde_json::to_string_pretty(&CatalogMetadata::of(catalog))
        .map_err(|e| Error::Metadata(e.to_string()))?;
    let side = sidecar_path(path);
    std::fs::write(&side, meta + "\n").map_err(|e| Error::io(side, e))
}

/// Reads the canonical format written by [`write_catalog`].
pub fn read_catalog(path: &Path) -> Result<EventCatalog> {
    let csv = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let meta = std::fs::read_to_string(&side).map_err(|e| Error::io(side, e))?;
    parse_canonical(&csv, &meta)
}
