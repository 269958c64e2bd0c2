//! Subcommand arguments and implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use sthawkes::background::{
    bandwidth_sweep, fit_background, DEFAULT_SPATIAL_BANDWIDTH_KM, DEFAULT_TEMPORAL_BANDWIDTH_DAYS,
};
use sthawkes::catalog::io::{
    load_catalog, parse_timestamp, read_catalog, write_catalog, CatalogFormat, LoadConfig,
    OutOfWindow,
};
use sthawkes::catalog::{
    default_holidays, merge_duplicates, remove_holidays, HolidayWindow, DEFAULT_MERGE_KM,
    DEFAULT_MERGE_MINUTES,
};
use sthawkes::hawkes::{
    classify_triggered, decomposition_csv, predict_grid, prediction_csv, CellShape, GridSpec,
    HistoryWindow,
};
use sthawkes::inference::{
    export_traceplots, parse_summary_csv, sample_hawkes_posterior, summarize, summary_csv,
    summary_text, ChainDiagnostics, HawkesPosterior, Method, PosteriorSamples, PriorSpec,
    SamplerConfig, Summary,
};
use sthawkes::simulate::{parentage_csv, simulate_ogata, BackgroundSpec, SimConfig, Snap};
use sthawkes::stattests::{kfunction_csv, knox_csv, knox_test, st_kfunction_envelope};
use sthawkes::{BackgroundModel, Error, EventCatalog, HawkesParams, Region, Result};

use crate::settings::Settings;

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("`{key}`: bad number `{v}`")))
        })
        .collect()
}

#[derive(Args, Debug, Default)]
pub struct BandwidthArgs {
    /// Spatial bandwidth of the background smoother (km) [default: 1.6].
    #[arg(long)]
    spatial_bandwidth_km: Option<f64>,
    /// Temporal bandwidth of the background smoother (days) [default: 14].
    #[arg(long)]
    temporal_bandwidth_days: Option<f64>,
}

impl BandwidthArgs {
    fn resolve(&self, s: &mut Settings) -> Result<(f64, f64)> {
        Ok((
            s.resolve(
                "spatial_bandwidth_km",
                self.spatial_bandwidth_km,
                DEFAULT_SPATIAL_BANDWIDTH_KM,
            )?,
            s.resolve(
                "temporal_bandwidth_days",
                self.temporal_bandwidth_days,
                DEFAULT_TEMPORAL_BANDWIDTH_DAYS,
            )?,
        ))
    }
}

#[derive(Args, Debug, Default)]
pub struct ParamArgs {
    /// `summary.csv` from `fit`; its posterior means are the defaults below.
    #[arg(long, value_name = "FILE")]
    summary: Option<PathBuf>,
    #[arg(long)]
    m0: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Temporal decay rate (1/day).
    #[arg(long)]
    omega: Option<f64>,
    /// Spatial lengthscale (km).
    #[arg(long)]
    sigma: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self, s: &mut Settings) -> Result<HawkesParams> {
        let summary = s.resolve_optional(
            "summary",
            self.summary.as_ref().map(|p| p.display().to_string()),
        )?;
        let base = match summary {
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                Some(parse_summary_csv(&text)?)
            }
            None => None,
        };
        let flags = [self.m0, self.theta, self.omega, self.sigma];
        let mut values = [0.0; 4];
        for (k, name) in sthawkes::hawkes::PARAM_NAMES.iter().enumerate() {
            let v = match (s.resolve_optional(name, flags[k])?, base) {
                (Some(v), _) => v,
                (None, Some(b)) => {
                    let v = b.as_array()[k];
                    s.record(name, v)?;
                    v
                }
                (None, None) => {
                    return Err(Error::InvalidArgument(format!(
                        "parameter `{name}` is not set; pass --summary or --{name}"
                    )))
                }
            };
            values[k] = v;
        }
        HawkesParams::new(values[0], values[1], values[2], values[3])
    }
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Raw catalog file.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// `csv-planar` (x_km,y_km,t_days) or `csv-latlon` (lat,lon,timestamp).
    #[arg(long)]
    format: Option<CatalogFormat>,
    /// Calendar time of t = 0; required for holiday removal on planar input.
    #[arg(long)]
    window_start: Option<String>,
    /// Window length in days [default: last event time].
    #[arg(long)]
    window_days: Option<f64>,
    /// Drop rows outside the window instead of failing.
    #[arg(long)]
    skip_out_of_window: bool,
    /// Duplicate time threshold in minutes [default: 1].
    #[arg(long)]
    merge_minutes: Option<f64>,
    /// Duplicate distance threshold in metres [default: 100].
    #[arg(long)]
    merge_meters: Option<f64>,
    /// Keep near-duplicate events.
    #[arg(long)]
    no_merge: bool,
    /// Keep events on holidays.
    #[arg(long)]
    no_holiday_filter: bool,
    /// Comma-separated `MM-DD..MM-DD` windows [default: 07-01..07-06,12-29..01-02].
    #[arg(long)]
    holidays: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn ingest(a: IngestArgs, config: Option<&Path>) -> Result<()> {
    let mut s = Settings::load("ingest", config)?;
    s.record("input", a.input.display())?;
    s.resolve("seed", a.seed, 0u64)?;
    let format = s.resolve("format", a.format, CatalogFormat::PlanarCsv)?;
    let window_start = s
        .resolve_optional("window_start", a.window_start)?
        .map(|v| parse_timestamp(&v))
        .transpose()?;
    let window_days = s.resolve_optional("window_days", a.window_days)?;
    let skip = s.resolve_switch("skip_out_of_window", a.skip_out_of_window, false)?;
    let merge = s.resolve("merge_filter", a.no_merge.then_some(false), true)?;
    let merge_minutes = s.resolve("merge_minutes", a.merge_minutes, DEFAULT_MERGE_MINUTES)?;
    let merge_meters = s.resolve("merge_meters", a.merge_meters, DEFAULT_MERGE_KM * 1000.0)?;
    let holiday_filter = s.resolve("holiday_filter", a.no_holiday_filter.then_some(false), true)?;
    let default_windows = default_holidays()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",");
    let holidays = s.resolve("holidays", a.holidays, default_windows)?;
    let windows = holidays
        .split(',')
        .map(|w| HolidayWindow::parse(w.trim()))
        .collect::<Result<Vec<_>>>()?;

    let load = LoadConfig {
        window_start,
        window_days,
        out_of_window: if skip {
            OutOfWindow::Skip
        } else {
            OutOfWindow::Fail
        },
        provenance: Some(a.input.display().to_string()),
        ..LoadConfig::default()
    };
    let mut catalog = load_catalog(&a.input, format, &load)?;
    log::info!("loaded {} events from {}", catalog.len(), a.input.display());
    let mut reports = Vec::new();
    if merge {
        let (merged, report) =
            merge_duplicates(&catalog, merge_minutes / 1440.0, merge_meters / 1000.0)?;
        catalog = merged;
        reports.push(report);
    }
    if holiday_filter {
        let (kept, report) = remove_holidays(&catalog, &windows).map_err(|e| match e {
            Error::MissingCalendarAnchor => Error::InvalidArgument(
                "holiday removal needs a calendar anchor: pass --window-start or --no-holiday-filter".into(),
            ),
            other => other,
        })?;
        catalog = kept;
        reports.push(report);
    }

    create_dir(&a.out)?;
    write_catalog(&catalog, &a.out.join("catalog.csv"))?;
    let json =
        serde_json::to_string_pretty(&reports).map_err(|e| Error::Metadata(e.to_string()))?;
    write(&a.out, "filter_report.json", json + "\n")?;
    for r in &reports {
        println!(
            "{}: removed {} of {} ({:.3}%)",
            r.rule,
            r.removed_count,
            r.input_count,
            100.0 * r.removed_fraction
        );
    }
    println!("{} events retained", catalog.len());
    s.write_manifest(&a.out)
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Canonical catalog written by `ingest` or `simulate`.
    #[arg(long, value_name = "FILE")]
    catalog: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    bandwidths: BandwidthArgs,
    /// Fit every bandwidth pair of the sensitivity grid and write `sweep.csv`.
    #[arg(long)]
    bandwidth_sweep: bool,
    #[arg(long)]
    chains: Option<usize>,
    /// Iterations per chain, warmup included [default: 200].
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    /// Path length of the fixed-path `hmc` sampler [default: 16].
    #[arg(long)]
    leapfrog_steps: Option<usize>,
    /// `hmc` (default), `nuts` or `random-walk`.
    #[arg(long)]
    sampler: Option<Method>,
    /// Tree depth limit of the `nuts` sampler [default: 10].
    #[arg(long)]
    max_tree_depth: Option<usize>,
    /// Sum over the whole history instead of truncating negligible pairs.
    #[arg(long)]
    exact_history: bool,
    #[arg(long)]
    seed: Option<u64>,
}

fn sampler_config(a: &FitArgs, s: &mut Settings) -> Result<SamplerConfig> {
    let d = SamplerConfig::default();
    Ok(SamplerConfig {
        seed: s.resolve("seed", a.seed, d.seed)?,
        chains: s.resolve("chains", a.chains, d.chains)?,
        iterations: s.resolve("iterations", a.iterations, d.iterations)?,
        warmup: s.resolve("warmup", a.warmup, d.warmup)?,
        leapfrog_steps: s.resolve("leapfrog_steps", a.leapfrog_steps, d.leapfrog_steps)?,
        method: s.resolve("sampler", a.sampler, d.method)?,
        max_tree_depth: s.resolve("max_tree_depth", a.max_tree_depth, d.max_tree_depth)?,
        ..d
    })
}

fn posterior_fit(
    catalog: &EventCatalog,
    bg: &BackgroundModel,
    history: HistoryWindow,
    config: &SamplerConfig,
) -> Result<(PosteriorSamples, ChainDiagnostics, [Summary; 4])> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let posterior = HawkesPosterior::new(catalog, bg, PriorSpec::default())?.with_history(history);
    let (samples, diagnostics) = sample_hawkes_posterior(&posterior, config)?;
    let summaries = summarize(&samples)?;
    Ok((samples, diagnostics, summaries))
}

pub fn fit(a: FitArgs, config: Option<&Path>) -> Result<()> {
    let mut s = Settings::load("fit", config)?;
    s.record("catalog", a.catalog.display())?;
    let catalog = read_catalog(&a.catalog)?;
    let sweep = s.resolve_switch("bandwidth_sweep", a.bandwidth_sweep, false)?;
    let exact = s.resolve_switch("exact_history", a.exact_history, false)?;
    let history = if exact {
        HistoryWindow::Exact
    } else {
        HistoryWindow::default()
    };
    let sampler = sampler_config(&a, &mut s)?;
    create_dir(&a.out)?;

    if sweep {
        let mut out = String::from("spatial_bandwidth_km,temporal_bandwidth_days");
        for name in sthawkes::hawkes::PARAM_NAMES {
            write!(out, ",{name}_mean,{name}_lower,{name}_upper")
                .expect("writing to a String cannot fail");
        }
        out.push_str(",max_rhat\n");
        for (hs, ht) in bandwidth_sweep() {
            log::info!("fitting with bandwidths {hs} km / {ht} days");
            let bg = fit_background(&catalog, hs, ht)?;
            let (_, diagnostics, summaries) = posterior_fit(&catalog, &bg, history, &sampler)?;
            write!(out, "{hs},{ht}").expect("writing to a String cannot fail");
            for m in &summaries {
                write!(out, ",{},{},{}", m.mean, m.lower, m.upper)
                    .expect("writing to a String cannot fail");
            }
            writeln!(out, ",{}", diagnostics.max_rhat()).expect("writing to a String cannot fail");
        }
        write(&a.out, "sweep.csv", &out)?;
        print!("{out}");
        return s.write_manifest(&a.out);
    }

    let (hs, ht) = a.bandwidths.resolve(&mut s)?;
    let bg = fit_background(&catalog, hs, ht)?;
    write(&a.out, "background_spatial.csv", bg.spatial_grid_csv())?;
    write(&a.out, "background_temporal.csv", bg.temporal_grid_csv())?;
    log::info!(
        "sampling {} chains x {} iterations on {} events",
        sampler.chains,
        sampler.iterations,
        catalog.len()
    );
    let (samples, diagnostics, summaries) = posterior_fit(&catalog, &bg, history, &sampler)?;
    export_traceplots(&samples, &a.out.join("traceplot.csv"))?;
    write(&a.out, "summary.csv", summary_csv(&summaries, &diagnostics))?;
    let text = summary_text(&summaries, &diagnostics);
    write(&a.out, "summary.txt", &text)?;
    let mut chains = String::from("chain,acceptance,divergences,max_depth_hits,step_size\n");
    for c in 0..diagnostics.acceptance.len() {
        writeln!(
            chains,
            "{c},{},{},{},{}",
            diagnostics.acceptance[c],
            diagnostics.divergences[c],
            diagnostics.max_depth_hits[c],
            diagnostics.step_sizes[c]
        )
        .expect("writing to a String cannot fail");
    }
    write(&a.out, "chains.csv", chains)?;
    print!("{text}");

    let mean = samples.mean()?;
    if mean.theta < 1.0 {
        let (decomposition, labels) = classify_triggered(&catalog, &mean, &bg)?;
        write(
            &a.out,
            "decomposition.csv",
            decomposition_csv(&catalog, &decomposition, &labels)?,
        )?;
    } else {
        log::warn!(
            "posterior mean theta {} >= 1; skipping classification",
            mean.theta
        );
    }
    s.write_manifest(&a.out)
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long)]
    m0: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Temporal decay rate (1/day) [default: 144, i.e. 10 minutes].
    #[arg(long)]
    omega: Option<f64>,
    /// Spatial lengthscale (km) [default: 0.126].
    #[arg(long)]
    sigma: Option<f64>,
    /// Side of the square region (km) [default: 10].
    #[arg(long)]
    side_km: Option<f64>,
    /// Window length (days) [default: 90].
    #[arg(long)]
    window_days: Option<f64>,
    /// Homogeneous background rate (events per km^2 per day) [default: 1].
    #[arg(long)]
    background_rate: Option<f64>,
    /// Use a background smoothed from this canonical catalog instead of a
    /// constant rate; region and window are taken from it.
    #[arg(long, value_name = "FILE")]
    background_catalog: Option<PathBuf>,
    #[command(flatten)]
    bandwidths: BandwidthArgs,
    /// Round coordinates to this many metres.
    #[arg(long)]
    snap_meters: Option<f64>,
    /// Round times to this many seconds.
    #[arg(long)]
    snap_seconds: Option<f64>,
    /// `cluster` (branching construction) or `thinning` (Ogata).
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn simulate(a: SimulateArgs, config: Option<&Path>) -> Result<()> {
    let mut s = Settings::load("simulate", config)?;
    let params = HawkesParams::new(
        s.resolve("m0", a.m0, 0.87)?,
        s.resolve("theta", a.theta, 0.13)?,
        s.resolve("omega", a.omega, 144.0)?,
        s.resolve("sigma", a.sigma, 0.126)?,
    )?;
    let seed = s.resolve("seed", a.seed, 0u64)?;
    let generator = s.resolve("generator", a.generator, "cluster".to_string())?;
    let background_catalog = s.resolve_optional(
        "background_catalog",
        a.background_catalog
            .as_ref()
            .map(|p| p.display().to_string()),
    )?;
    let (background, region, window) = match background_catalog {
        Some(path) => {
            let source = read_catalog(Path::new(&path))?;
            let (hs, ht) = a.bandwidths.resolve(&mut s)?;
            let bg = fit_background(&source, hs, ht)?;
            let (region, window) = (*bg.region(), bg.window());
            (BackgroundSpec::Model(bg), region, window)
        }
        None => {
            let side = s.resolve("side_km", a.side_km, 10.0)?;
            let window = s.resolve("window_days", a.window_days, 90.0)?;
            let rate = s.resolve("background_rate", a.background_rate, 1.0)?;
            (
                BackgroundSpec::Constant(rate),
                Region::square(side)?,
                window,
            )
        }
    };
    let mut sim = SimConfig::new(params, background, region, window, seed)?;
    let snap_m = s.resolve_optional("snap_meters", a.snap_meters)?;
    let snap_s = s.resolve_optional("snap_seconds", a.snap_seconds)?;
    match (snap_m, snap_s) {
        (Some(spatial_m), Some(temporal_s)) => {
            sim = sim.with_snap(Snap {
                spatial_m,
                temporal_s,
            })?
        }
        (None, None) => {}
        _ => {
            return Err(Error::InvalidArgument(
                "--snap-meters and --snap-seconds must be given together".into(),
            ))
        }
    }
    let labeled = match generator.as_str() {
        "cluster" => sthawkes::simulate::simulate(&sim)?,
        "thinning" => simulate_ogata(&sim)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown generator `{other}` (expected cluster or thinning)"
            )))
        }
    };
    create_dir(&a.out)?;
    write_catalog(&labeled.catalog, &a.out.join("catalog.csv"))?;
    write(&a.out, "parentage.csv", parentage_csv(&labeled))?;
    println!(
        "{} events ({} background, {} offspring)",
        labeled.len(),
        labeled.background_count(),
        labeled.len() - labeled.background_count()
    );
    s.write_manifest(&a.out)
}

#[derive(Args, Debug)]
pub struct KnoxArgs {
    #[arg(long, value_name = "FILE")]
    catalog: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Spatial cutoff (km) [default: 0.134].
    #[arg(long)]
    s_cut_km: Option<f64>,
    /// Temporal cutoff (days) [default: 11 minutes].
    #[arg(long)]
    t_cut_days: Option<f64>,
    /// Number of time permutations [default: 999].
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn knox(a: KnoxArgs, config: Option<&Path>) -> Result<()> {
    let mut s = Settings::load("knox", config)?;
    s.record("catalog", a.catalog.display())?;
    let s_cut = s.resolve("s_cut_km", a.s_cut_km, 0.134)?;
    let t_cut = s.resolve("t_cut_days", a.t_cut_days, 11.0 / 1440.0)?;
    let n_perm = s.resolve("permutations", a.permutations, 999usize)?;
    let seed = s.resolve("seed", a.seed, 0u64)?;
    let catalog = read_catalog(&a.catalog)?;
    let r = knox_test(&catalog, s_cut, t_cut, n_perm, seed)?;
    create_dir(&a.out)?;
    write(&a.out, "knox.csv", knox_csv(&r))?;
    let [[cc, cf], [fc, ff]] = r.contingency;
    println!("{:<14} {:>14} {:>14}", "", "close in time", "far in time");
    println!("{:<14} {cc:>14} {cf:>14}", "close in space");
    println!("{:<14} {fc:>14} {ff:>14}", "far in space");
    println!("p = {} ({} permutations)", r.p_value, r.n_perm);
    s.write_manifest(&a.out)
}

#[derive(Args, Debug)]
pub struct KfunArgs {
    #[arg(long, value_name = "FILE")]
    catalog: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Comma-separated distances (km).
    #[arg(long)]
    s_grid: Option<String>,
    /// Comma-separated lags (days).
    #[arg(long)]
    t_grid: Option<String>,
    /// Time-permuted replicates for the envelope [default: 39].
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn kfun(a: KfunArgs, config: Option<&Path>) -> Result<()> {
    let mut s = Settings::load("kfun", config)?;
    s.record("catalog", a.catalog.display())?;
    let s_grid = s.resolve("s_grid", a.s_grid, "0.05,0.1,0.126,0.2,0.5,1,2".to_string())?;
    let t_grid = s.resolve(
        "t_grid",
        a.t_grid,
        "0.006944444444444444,0.041666666666666664,0.25,1,7,14".to_string(),
    )?;
    let replicates = s.resolve("replicates", a.replicates, 39usize)?;
    let seed = s.resolve("seed", a.seed, 0u64)?;
    let catalog = read_catalog(&a.catalog)?;
    let result = st_kfunction_envelope(
        &catalog,
        &parse_list("s_grid", &s_grid)?,
        &parse_list("t_grid", &t_grid)?,
        replicates,
        seed,
    )?;
    create_dir(&a.out)?;
    let csv = kfunction_csv(&result);
    write(&a.out, "kfunction.csv", &csv)?;
    print!("{csv}");
    s.write_manifest(&a.out)
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, value_name = "FILE")]
    catalog: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    bandwidths: BandwidthArgs,
}

pub fn classify(a: ClassifyArgs, config: Option<&Path>) -> Result<()> {
    let mut s = Settings::load("classify", config)?;
    s.record("catalog", a.catalog.display())?;
    let params = a.params.resolve(&mut s)?;
    let (hs, ht) = a.bandwidths.resolve(&mut s)?;
    let catalog = read_catalog(&a.catalog)?;
    let bg = fit_background(&catalog, hs, ht)?;
    let (decomposition, labels) = classify_triggered(&catalog, &params, &bg)?;
    create_dir(&a.out)?;
    write(
        &a.out,
        "decomposition.csv",
        decomposition_csv(&catalog, &decomposition, &labels)?,
    )?;
    let triggered = labels
        .iter()
        .filter(|l| **l == sthawkes::hawkes::EventLabel::Triggered)
        .count();
    println!("{triggered} of {} events labelled triggered", catalog.len());
    s.write_manifest(&a.out)
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long, value_name = "FILE")]
    catalog: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    bandwidths: BandwidthArgs,
    /// Cell side (km) [default: 1].
    #[arg(long)]
    cell_km: Option<f64>,
    /// Cell duration (hours) [default: 1].
    #[arg(long)]
    step_hours: Option<f64>,
    /// Use discs of equal area centred on the grid instead of square cells.
    #[arg(long)]
    ball: bool,
}

pub fn predict(a: PredictArgs, config: Option<&Path>) -> Result<()> {
    let mut s = Settings::load("predict", config)?;
    s.record("catalog", a.catalog.display())?;
    let params = a.params.resolve(&mut s)?;
    let (hs, ht) = a.bandwidths.resolve(&mut s)?;
    let cell_km = s.resolve("cell_km", a.cell_km, 1.0)?;
    let step_hours = s.resolve("step_hours", a.step_hours, 1.0)?;
    let ball = s.resolve_switch("ball", a.ball, false)?;
    let catalog = read_catalog(&a.catalog)?;
    let bg = fit_background(&catalog, hs, ht)?;
    let mut grid = GridSpec::covering(
        catalog.region(),
        catalog.window(),
        cell_km,
        step_hours / 24.0,
    )?;
    if ball {
        grid = grid.with_shape(CellShape::Ball);
    }
    let prediction = predict_grid(&catalog, &params, &bg, &grid)?;
    create_dir(&a.out)?;
    write(&a.out, "prediction.csv", prediction_csv(&prediction))?;
    let line = format!(
        "correlation = {:.4} (background only {:.4}) over {} cells",
        prediction.correlation,
        prediction.background_correlation,
        prediction.cells.len()
    );
    write(&a.out, "prediction_summary.txt", format!("{line}\n"))?;
    println!("{line}");
    s.write_manifest(&a.out)
}
