//! Command-line front end: every pipeline stage as a scriptable,
//! deterministic subcommand.
//!
//! Exit codes: 1 for parse/data errors (bad logs, bad flag values, bad
//! detection files), 2 for calibration failures, 3 for file I/O
//! problems.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bathyscan::cloud::{export_ply, export_xyz};
use bathyscan::detect::{evaluate, parse_ground_truth, parse_predictions};
use bathyscan::geo::{PlanarPosition, Vec2};
use bathyscan::pipeline::{self, PipelineError, PipelineParams};
use bathyscan::sonarlog::{
    default_deadzone_halfwidth, parse_csv, parse_log, write_log, SensorConfig, SurveyLog,
    DEFAULT_ALPHA2_DEG, DEFAULT_INTENSITY_MAX, DEFAULT_SCANLINE_WIDTH,
};
use bathyscan::synth::{
    generate_log, generate_log_with_strays, lawnmower_path, line_path, DepthField, SpeckleParams,
    StrayParams,
};
use bathyscan::trajectory::calibrate_ppd;
use bathyscan::scanline::first_return_overlay;

#[derive(Parser)]
#[command(
    name = "bathyscan",
    version,
    about = "Sonar survey logs to sparse bathymetric point clouds, plus detection scoring"
)]
struct Cli {
    /// Worker threads; 0 means one per core. Output is identical for
    /// any value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a survey log and print its basic statistics.
    Parse {
        /// Input log (.bsl binary, or .csv)
        input: PathBuf,
        #[command(flatten)]
        sensor: SensorFlags,
    },
    /// Generate a synthetic survey log from a depth field and a path.
    Synth {
        /// Output log path (.bsl binary, or .csv)
        output: PathBuf,
        /// Depth field: const:DEPTH | slope:BASE,GRADE,DIR_DEG |
        /// bowl:CX,CY,DEPTH,CURVATURE
        #[arg(long, default_value = "const:4")]
        field: String,
        /// Boat path: line:X0,Y0,HEADING_DEG,STEP,COUNT |
        /// lawnmower:X0,Y0,PINGS_PER_LANE,LANES,STEP,SPACING
        #[arg(long, default_value = "line:0,0,90,0.055,500")]
        path: String,
        /// Calibration scale used to place first returns, pixels per
        /// meter of depth
        #[arg(long, default_value_t = 25.0)]
        ppd: f64,
        /// Multiplicative speckle scale (0 disables noise)
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        /// Noise seed; same seed, same bytes
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fraction of sides whose return is replaced by a far stray
        #[arg(long, default_value_t = 0.0)]
        stray_rate: f64,
        /// Stray pixel band LO:HI (default: outer fifth of the swath)
        #[arg(long)]
        stray_band: Option<String>,
        /// Scanline width in pixels
        #[arg(long, default_value_t = DEFAULT_SCANLINE_WIDTH)]
        width: u32,
        #[command(flatten)]
        sensor: SensorFlags,
    },
    /// Print the pixels-per-meter calibration a log would use.
    Calibrate {
        /// Input log (.bsl binary, or .csv)
        input: PathBuf,
        #[command(flatten)]
        sensor: SensorFlags,
        #[command(flatten)]
        tuning: TuningFlags,
    },
    /// Run the full pipeline and export the point cloud.
    Pointcloud {
        /// Input log (.bsl binary, or .csv)
        input: PathBuf,
        /// Write the cloud as ASCII XYZ
        #[arg(long)]
        xyz: Option<PathBuf>,
        /// Write the cloud as binary PLY
        #[arg(long)]
        ply: Option<PathBuf>,
        #[command(flatten)]
        sensor: SensorFlags,
        #[command(flatten)]
        tuning: TuningFlags,
        /// Outlier search radius in meters (default: 5 / ppd)
        #[arg(long)]
        radius: Option<f64>,
        /// Neighbors required within the radius to keep a point
        #[arg(long, default_value_t = 3)]
        min_neighbors: usize,
        /// ENU origin override as LAT,LON (default: first ping)
        #[arg(long)]
        origin: Option<String>,
    },
    /// Score a prediction file against a ground-truth file.
    EvalDetections {
        /// Predictions: image_id class_id confidence x_min y_min x_max y_max
        #[arg(long)]
        pred: PathBuf,
        /// Ground truth: image_id class_id x_min y_min x_max y_max
        #[arg(long)]
        truth: PathBuf,
        /// Minimum IoU for a prediction to match a truth box
        #[arg(long, default_value_t = 0.5)]
        iou_threshold: f64,
    },
}

/// Sensor geometry that travels out of band from the log bytes.
#[derive(Args)]
struct SensorFlags {
    /// Side-scan beam tilt from vertical, degrees
    #[arg(long, default_value_t = DEFAULT_ALPHA2_DEG)]
    alpha2_deg: f64,
    /// Half-width of the zeroed center band, pixels (default:
    /// min(10, (width-1)/2))
    #[arg(long)]
    deadzone: Option<u32>,
    /// Raw intensity that normalizes to 1.0
    #[arg(long, default_value_t = DEFAULT_INTENSITY_MAX)]
    intensity_max: f64,
}

#[derive(Args)]
struct TuningFlags {
    /// First-return threshold on the normalized scale
    #[arg(long, default_value_t = pipeline::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Relabel the scanline halves (sensor mounted reversed)
    #[arg(long)]
    swap_sides: bool,
    /// Calibration reference ping (default: automatic selection)
    #[arg(long)]
    ref_ping: Option<usize>,
}

// ---------------------------------------------------------------------------
// error handling
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    /// Exit 1: malformed inputs, bad flag values.
    Data(String),
    /// Exit 2: no usable calibration.
    Calibration(String),
    /// Exit 3: file system trouble.
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Data(_) => 1,
            CliError::Calibration(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Data(m) | CliError::Calibration(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Calibration(_) => CliError::Calibration(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// flag parsing helpers
// ---------------------------------------------------------------------------

fn parse_parts(spec: &str, what: &str) -> Result<(String, Vec<f64>), CliError> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Data(format!("{what} {spec:?} must look like kind:a,b,...")))?;
    let mut values = Vec::new();
    for raw in rest.split(',') {
        let v: f64 = raw.trim().parse().map_err(|_| {
            CliError::Data(format!("{what} {spec:?}: {raw:?} is not a number"))
        })?;
        values.push(v);
    }
    Ok((kind.to_string(), values))
}

fn parse_field_spec(spec: &str) -> Result<DepthField, CliError> {
    let (kind, v) = parse_parts(spec, "--field")?;
    let field = match (kind.as_str(), v.as_slice()) {
        ("const", [depth]) => DepthField::constant(*depth),
        ("slope", [base, grade, dir_deg]) => {
            let rad = dir_deg.to_radians();
            DepthField::slope(*base, *grade, Vec2::new(rad.cos(), rad.sin()))
        }
        ("bowl", [cx, cy, depth, curvature]) => {
            DepthField::bowl(PlanarPosition::new(*cx, *cy), *depth, *curvature)
        }
        _ => {
            return Err(CliError::Data(format!(
                "--field {spec:?} must be const:DEPTH, slope:BASE,GRADE,DIR_DEG, or bowl:CX,CY,DEPTH,CURVATURE"
            )))
        }
    };
    field.map_err(|e| CliError::Data(format!("--field {spec:?}: {e}")))
}

fn parse_path_spec(spec: &str) -> Result<Vec<PlanarPosition>, CliError> {
    let (kind, v) = parse_parts(spec, "--path")?;
    let path = match (kind.as_str(), v.as_slice()) {
        ("line", [x0, y0, heading_deg, step, count]) => {
            let rad = heading_deg.to_radians();
            line_path(
                PlanarPosition::new(*x0, *y0),
                Vec2::new(rad.cos(), rad.sin()),
                *step,
                *count as usize,
            )
        }
        ("lawnmower", [x0, y0, per_lane, lanes, step, spacing]) => lawnmower_path(
            PlanarPosition::new(*x0, *y0),
            *per_lane as usize,
            *lanes as usize,
            *step,
            *spacing,
        ),
        _ => {
            return Err(CliError::Data(format!(
                "--path {spec:?} must be line:X0,Y0,HEADING_DEG,STEP,COUNT or lawnmower:X0,Y0,PINGS_PER_LANE,LANES,STEP,SPACING"
            )))
        }
    };
    path.map_err(|e| CliError::Data(format!("--path {spec:?}: {e}")))
}

fn parse_origin_spec(spec: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Data(format!("--origin {spec:?} must be LAT,LON"));
    let (lat, lon) = spec.split_once(',').ok_or_else(bad)?;
    Ok((
        lat.trim().parse().map_err(|_| bad())?,
        lon.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_band_spec(spec: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Data(format!("--stray-band {spec:?} must be LO:HI in pixels"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

impl SensorFlags {
    fn config_for_width(&self, width: u32) -> Result<SensorConfig, CliError> {
        let deadzone = self
            .deadzone
            .unwrap_or_else(|| default_deadzone_halfwidth(width));
        SensorConfig::new(
            self.alpha2_deg.to_radians(),
            width,
            deadzone,
            self.intensity_max,
        )
        .map_err(|e| CliError::Data(format!("sensor configuration: {e}")))
    }
}

impl TuningFlags {
    fn pipeline_params(
        &self,
        radius: Option<f64>,
        min_neighbors: usize,
        origin: Option<(f64, f64)>,
    ) -> PipelineParams {
        PipelineParams {
            threshold: self.threshold,
            swap_sides: self.swap_sides,
            ref_ping: self.ref_ping,
            origin,
            radius,
            min_neighbors,
        }
    }
}

// ---------------------------------------------------------------------------
// log loading
// ---------------------------------------------------------------------------

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn load_log(path: &Path, sensor: &SensorFlags) -> Result<SurveyLog, CliError> {
    if is_csv(path) {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let width = sniff_csv_width(&text);
        let config = sensor.config_for_width(width)?;
        parse_csv(&text, config).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    } else {
        let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
        let log =
            parse_log(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let config = sensor.config_for_width(log.width())?;
        log.with_config(config)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

/// Column count of the header row decides the scanline width; a wrong
/// guess surfaces as the parser's header mismatch error.
fn sniff_csv_width(text: &str) -> u32 {
    let header = text.lines().next().unwrap_or("");
    header.split(',').count().saturating_sub(4) as u32
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

fn cmd_parse(input: &Path, sensor: &SensorFlags) -> Result<(), CliError> {
    let log = load_log(input, sensor)?;
    let encoding = if is_csv(input) { "csv" } else { "bsl" };
    println!("encoding={encoding}");
    println!("pings={}", log.ping_count());
    println!("width={}", log.width());
    if let (Some(first), Some(last)) = (log.pings().first(), log.pings().last()) {
        println!("t_first={}", first.t);
        println!("t_last={}", last.t);
        let (mut dmin, mut dmax) = (f32::INFINITY, f32::NEG_INFINITY);
        for p in log.pings() {
            dmin = dmin.min(p.depth);
            dmax = dmax.max(p.depth);
        }
        println!("depth_min={dmin}");
        println!("depth_max={dmax}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    output: &Path,
    field: &str,
    path: &str,
    ppd: f64,
    sigma: f64,
    seed: u64,
    stray_rate: f64,
    stray_band: Option<&str>,
    width: u32,
    sensor: &SensorFlags,
) -> Result<(), CliError> {
    let field = parse_field_spec(field)?;
    let path_points = parse_path_spec(path)?;
    let config = sensor.config_for_width(width)?;
    let speckle = SpeckleParams { sigma, seed };

    let log = if stray_rate > 0.0 || stray_band.is_some() {
        let (band_lo, band_hi) = match stray_band {
            Some(spec) => parse_band_spec(spec)?,
            None => default_stray_band(&config),
        };
        generate_log_with_strays(
            &field,
            &path_points,
            ppd,
            &config,
            &speckle,
            &StrayParams {
                rate: stray_rate,
                band_lo,
                band_hi,
            },
        )
    } else {
        generate_log(&field, &path_points, ppd, &config, &speckle)
    }
    .map_err(|e| CliError::Data(e.to_string()))?;

    let bytes = if is_csv(output) {
        bathyscan::sonarlog::write_csv(&log).into_bytes()
    } else {
        write_log(&log)
    };
    std::fs::write(output, bytes).map_err(|e| io_err(output, e))?;
    println!("pings={}", log.ping_count());
    println!("width={}", log.width());
    println!("output={}", output.display());
    Ok(())
}

/// Outer fifth of the scannable swath: far enough from any plausible
/// surface return to read as noise.
fn default_stray_band(config: &SensorConfig) -> (u32, u32) {
    let width = config.scanline_width as usize;
    let center = width / 2;
    let max = (width - 1 - center).min(center) as u32;
    let lo = ((max as f64) * 0.8) as u32;
    (lo.max(config.deadzone_halfwidth + 1), max)
}

fn cmd_calibrate(input: &Path, sensor: &SensorFlags, tuning: &TuningFlags) -> Result<(), CliError> {
    let log = load_log(input, sensor)?;
    if !(tuning.threshold.is_finite() && tuning.threshold > 0.0 && tuning.threshold <= 1.0) {
        return Err(CliError::Data(format!(
            "threshold must be within (0, 1], got {}",
            tuning.threshold
        )));
    }
    let mut overlay = first_return_overlay(&log, tuning.threshold);
    if tuning.swap_sides {
        overlay = overlay.swapped();
    }
    let cal = calibrate_ppd(&log, &overlay, tuning.ref_ping)
        .map_err(|e| CliError::Calibration(format!("no usable calibration ping: {e}")))?;
    println!("ppd={}", cal.ppd);
    println!("ref_ping={}", cal.ref_ping);
    println!("ref_depth={}", cal.ref_depth);
    println!("ref_pixels={}", cal.ref_pixels);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_pointcloud(
    input: &Path,
    xyz: Option<&Path>,
    ply: Option<&Path>,
    sensor: &SensorFlags,
    tuning: &TuningFlags,
    radius: Option<f64>,
    min_neighbors: usize,
    origin: Option<&str>,
) -> Result<(), CliError> {
    let log = load_log(input, sensor)?;
    let origin = origin.map(parse_origin_spec).transpose()?;
    let params = tuning.pipeline_params(radius, min_neighbors, origin);
    let out = pipeline::run(&log, &params)?;

    if let Some(path) = xyz {
        std::fs::write(path, export_xyz(&out.cloud)).map_err(|e| io_err(path, e))?;
    }
    if let Some(path) = ply {
        std::fs::write(path, export_ply(&out.cloud)).map_err(|e| io_err(path, e))?;
    }
    print!("{}", out.summary);
    Ok(())
}

fn cmd_eval(pred: &Path, truth: &Path, iou_threshold: f64) -> Result<(), CliError> {
    if !(iou_threshold.is_finite() && (0.0..=1.0).contains(&iou_threshold)) {
        return Err(CliError::Data(format!(
            "--iou-threshold must be within [0, 1], got {iou_threshold}"
        )));
    }
    let pred_text = std::fs::read_to_string(pred).map_err(|e| io_err(pred, e))?;
    let truth_text = std::fs::read_to_string(truth).map_err(|e| io_err(truth, e))?;
    let preds = parse_predictions(&pred_text)
        .map_err(|e| CliError::Data(format!("{}: {e}", pred.display())))?;
    let truths = parse_ground_truth(&truth_text)
        .map_err(|e| CliError::Data(format!("{}: {e}", truth.display())))?;
    let report = evaluate(&preds, &truths, iou_threshold);
    print!("{}", report.human_table());
    println!();
    print!("{}", report.machine_block());
    Ok(())
}

// ---------------------------------------------------------------------------

fn real_main(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        // Ignore the error when a pool already exists (repeat calls in
        // one process, e.g. under tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match &cli.command {
        Command::Parse { input, sensor } => cmd_parse(input, sensor),
        Command::Synth {
            output,
            field,
            path,
            ppd,
            sigma,
            seed,
            stray_rate,
            stray_band,
            width,
            sensor,
        } => cmd_synth(
            output,
            field,
            path,
            *ppd,
            *sigma,
            *seed,
            *stray_rate,
            stray_band.as_deref(),
            *width,
            sensor,
        ),
        Command::Calibrate {
            input,
            sensor,
            tuning,
        } => cmd_calibrate(input, sensor, tuning),
        Command::Pointcloud {
            input,
            xyz,
            ply,
            sensor,
            tuning,
            radius,
            min_neighbors,
            origin,
        } => cmd_pointcloud(
            input,
            xyz.as_deref(),
            ply.as_deref(),
            sensor,
            tuning,
            *radius,
            *min_neighbors,
            origin.as_deref(),
        ),
        Command::EvalDetections {
            pred,
            truth,
            iou_threshold,
        } => cmd_eval(pred, truth, *iou_threshold),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
