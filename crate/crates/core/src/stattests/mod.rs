//! Space-time interaction tests: the Knox test and the space-time
//! K-function ratio, both calibrated by permuting event times against fixed
//! locations.

mod kfunction;
mod knox;
mod pairs;

pub use kfunction::{
    kfunction_csv, st_kfunction, st_kfunction_envelope, Envelope, KFunctionResult,
};
pub use knox::{knox_csv, knox_test, knox_test_with, KnoxResult};
pub use pairs::{for_each_pair, PairMethod};

use crate::catalog::Event;
use crate::error::{Error, Result};

fn check_not_degenerate(events: &[Event]) -> Result<()> {
    if events.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 events, got {}",
            events.len()
        )));
    }
    if events.iter().all(|e| *e == events[0]) {
        return Err(Error::Degenerate("all events coincide".into()));
    }
    Ok(())
}
