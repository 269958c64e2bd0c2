//! Endemic / triggered labelling by excitatory intensity.

use std::fmt::{self, Write as _};

use super::{decompose_events, HawkesParams, IntensityDecomposition};
use crate::background::BackgroundModel;
use crate::catalog::EventCatalog;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventLabel {
    Background,
    Triggered,
}

impl fmt::Display for EventLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventLabel::Background => "background",
            EventLabel::Triggered => "triggered",
        })
    }
}

/// Number of events labelled triggered: `theta * n` rounded to the nearest
/// integer, and at least one whenever `theta * n > 0`.
pub fn triggered_count(theta: f64, n: usize) -> usize {
    let expected = theta * n as f64;
    if expected <= 0.0 {
        0
    } else {
        (expected.round() as usize).clamp(1, n)
    }
}

/// Labels the `count` events with the largest excitatory intensity as
/// triggered. Ties go to the earlier event.
pub fn label_top_excitatory(
    decomposition: &[IntensityDecomposition],
    count: usize,
) -> Vec<EventLabel> {
    let mut order: Vec<usize> = (0..decomposition.len()).collect();
    order.sort_by(|&a, &b| {
        decomposition[b]
            .excitatory
            .total_cmp(&decomposition[a].excitatory)
            .then(a.cmp(&b))
    });
    let mut labels = vec![EventLabel::Background; decomposition.len()];
    for &i in order.iter().take(count) {
        labels[i] = EventLabel::Triggered;
    }
    labels
}

/// Decomposes every event and labels the top [`triggered_count`] by
/// excitatory intensity as triggered.
pub fn classify_triggered(
    catalog: &EventCatalog,
    params: &HawkesParams,
    bg: &BackgroundModel,
) -> Result<(Vec<IntensityDecomposition>, Vec<EventLabel>)> {
    if params.theta >= 1.0 {
        return Err(Error::Supercritical(params.theta));
    }
    let decomposition = decompose_events(catalog, params, bg)?;
    let labels = label_top_excitatory(&decomposition, triggered_count(params.theta, catalog.len()));
    Ok((decomposition, labels))
}

/// Per-event CSV with columns `x,y,t,endemic,excitatory,ratio_r,label`.
pub fn decomposition_csv(
    catalog: &EventCatalog,
    decomposition: &[IntensityDecomposition],
    labels: &[EventLabel],
) -> Result<String> {
    if decomposition.len() != catalog.len() || labels.len() != catalog.len() {
        return Err(Error::InvalidArgument(
            "decomposition and labels must have one entry per event".into(),
        ));
    }
    let mut out = String::from("x,y,t,endemic,excitatory,ratio_r,label\n");
    for ((e, d), l) in catalog.events().iter().zip(decomposition).zip(labels) {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.x, e.y, e.t, d.endemic, d.excitatory, d.ratio_r, l
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}
