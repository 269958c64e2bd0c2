//! Long-form traceplot CSV: `chain,iteration,parameter,value`.
//!
//! Rows are ordered by chain, then kept-draw index, then parameter name in
//! alphabetical order (`m0`, `omega`, `sigma`, `theta`). Values use Rust's
//! shortest round-trip formatting, so reading a file back is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::PosteriorSamples;
use crate::error::{Error, Result};
use crate::hawkes::HawkesParams;

pub const TRACEPLOT_HEADER: &str = "chain,iteration,parameter,value";

/// `(name, index into HawkesParams::as_array)` in row order.
const ROW_ORDER: [(&str, usize); 4] = [("m0", 0), ("omega", 2), ("sigma", 3), ("theta", 1)];

pub fn traceplot_csv(samples: &PosteriorSamples) -> String {
    let mut out = String::with_capacity(32 * 4 * samples.total_draws() + 40);
    out.push_str(TRACEPLOT_HEADER);
    out.push('\n');
    for (c, chain) in samples.draws.iter().enumerate() {
        for (i, p) in chain.iter().enumerate() {
            let a = p.as_array();
            for (name, k) in ROW_ORDER {
                writeln!(out, "{c},{i},{name},{}", a[k]).expect("writing to a String cannot fail");
            }
        }
    }
    out
}

pub fn export_traceplots(samples: &PosteriorSamples, path: &Path) -> Result<()> {
    if samples.total_draws() == 0 {
        return Err(Error::Degenerate("no draws to export".into()));
    }
    std::fs::write(path, traceplot_csv(samples)).map_err(|e| Error::io(path, e))
}

/// Reads a traceplot CSV back into `draws[chain][iteration]`. Chains and
/// iterations must be contiguous from zero and every draw must list all four
/// parameters in row order.
pub fn parse_traceplot_csv(text: &str) -> Result<Vec<Vec<HawkesParams>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == TRACEPLOT_HEADER => {}
        Some(_) => {
            return Err(Error::Parse {
                row: 1,
                message: format!("expected header `{TRACEPLOT_HEADER}`"),
            })
        }
        None => return Err(Error::EmptyFile),
    }
    let mut chains: Vec<Vec<HawkesParams>> = Vec::new();
    let mut pending = [0.0; 4];
    let mut slot = 0;
    for (idx, raw) in lines {
        let row = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { row, message };
        let fields: Vec<&str> = line.split(',').collect();
        let [chain, iteration, name, value] = fields[..] else {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        };
        let chain: usize = chain
            .parse()
            .map_err(|_| err(format!("bad chain `{chain}`")))?;
        let iteration: usize = iteration
            .parse()
            .map_err(|_| err(format!("bad iteration `{iteration}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| err(format!("bad value `{value}`")))?;
        let (expected_name, k) = ROW_ORDER[slot];
        if name != expected_name {
            return Err(err(format!(
                "expected parameter `{expected_name}`, found `{name}`"
            )));
        }
        let (want_chain, want_iter) = if slot == 0 {
            match chains.last() {
                Some(_) if chain + 1 == chains.len() => (chain, chains[chain].len()),
                _ => (chains.len(), 0),
            }
        } else {
            (chains.len() - 1, chains[chains.len() - 1].len())
        };
        if slot == 0 && chain == chains.len() {
            chains.push(Vec::new());
        }
        if chain != want_chain || iteration != want_iter {
            return Err(err(format!(
                "expected chain {want_chain} iteration {want_iter}, found {chain} {iteration}"
            )));
        }
        pending[k] = value;
        slot += 1;
        if slot == 4 {
            let p = HawkesParams::from_array(pending);
            p.validate().map_err(|e| err(e.to_string()))?;
            chains[chain].push(p);
            slot = 0;
        }
    }
    if slot != 0 {
        return Err(Error::Parse {
            row: text.lines().count(),
            message: "truncated draw".into(),
        });
    }
    Ok(chains)
}
