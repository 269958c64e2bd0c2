//! Posterior summaries.

use std::fmt::Write as _;

use super::{ChainDiagnostics, PosteriorSamples};
use crate::error::{Error, Result};
use crate::hawkes::{HawkesParams, PARAM_NAMES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    /// 2.5% quantile.
    pub lower: f64,
    /// 97.5% quantile.
    pub upper: f64,
}

impl Summary {
    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Quantile of sorted data by linear interpolation between order statistics
/// at position `(n - 1) p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_values(values: &[f64]) -> Result<Summary> {
    if values.len() < 2 {
        return Err(Error::Degenerate(format!(
            "summaries need at least 2 draws, got {}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(Summary {
        mean,
        median: quantile(&sorted, 0.5),
        sd,
        lower: quantile(&sorted, 0.025),
        upper: quantile(&sorted, 0.975),
    })
}

/// Summary of every parameter over all chains, in `PARAM_NAMES` order.
pub fn summarize(samples: &PosteriorSamples) -> Result<[Summary; 4]> {
    let mut out = [Summary {
        mean: 0.0,
        median: 0.0,
        sd: 0.0,
        lower: 0.0,
        upper: 0.0,
    }; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let all: Vec<f64> = samples.series(k).into_iter().flatten().collect();
        *slot = summarize_values(&all)?;
    }
    Ok(out)
}

/// `parameter,mean,median,sd,lower,upper,rhat,ess`.
pub fn summary_csv(summaries: &[Summary; 4], diagnostics: &ChainDiagnostics) -> String {
    let mut out = String::from("parameter,mean,median,sd,lower,upper,rhat,ess\n");
    for (k, s) in summaries.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            PARAM_NAMES[k],
            s.mean,
            s.median,
            s.sd,
            s.lower,
            s.upper,
            diagnostics.rhat[k],
            diagnostics.ess[k]
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Reads the posterior means back from [`summary_csv`] output.
pub fn parse_summary_csv(text: &str) -> Result<HawkesParams> {
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) => h.trim_end_matches('\r'),
        None => return Err(Error::EmptyFile),
    };
    let columns: Vec<&str> = header.split(',').collect();
    let Some(mean_col) = columns.iter().position(|c| *c == "mean") else {
        return Err(Error::Parse {
            row: 1,
            message: "summary header has no `mean` column".into(),
        });
    };
    if columns.first() != Some(&"parameter") {
        return Err(Error::Parse {
            row: 1,
            message: "summary header must start with `parameter`".into(),
        });
    }
    let mut means = [None; 4];
    for (idx, raw) in lines {
        let row = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { row, message };
        let fields: Vec<&str> = line.split(',').collect();
        let name = fields[0];
        let k = PARAM_NAMES
            .iter()
            .position(|p| *p == name)
            .ok_or_else(|| err(format!("unknown parameter `{name}`")))?;
        let value: f64 = fields
            .get(mean_col)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(format!("missing or bad mean for `{name}`")))?;
        if means[k].replace(value).is_some() {
            return Err(err(format!("duplicate parameter `{name}`")));
        }
    }
    let mut a = [0.0; 4];
    for (k, m) in means.iter().enumerate() {
        a[k] = m.ok_or_else(|| Error::Parse {
            row: text.lines().count(),
            message: format!("summary lacks `{}`", PARAM_NAMES[k]),
        })?;
    }
    let params = HawkesParams::from_array(a);
    params.validate()?;
    Ok(params)
}

/// Fixed-width table for terminals.
pub fn summary_text(summaries: &[Summary; 4], diagnostics: &ChainDiagnostics) -> String {
    let mut out = format!(
        "{:<6} {:>12} {:>12} {:>25} {:>7} {:>8}\n",
        "param", "mean", "median", "95% interval", "rhat", "ess"
    );
    for (k, s) in summaries.iter().enumerate() {
        let interval = format!("[{:.5}, {:.5}]", s.lower, s.upper);
        writeln!(
            out,
            "{:<6} {:>12.6} {:>12.6} {:>25} {:>7.3} {:>8.1}",
            PARAM_NAMES[k], s.mean, s.median, interval, diagnostics.rhat[k], diagnostics.ess[k]
        )
        .expect("writing to a String cannot fail");
    }
    out
}
