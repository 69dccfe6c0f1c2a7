//! Result files: CSV/JSON summaries, per-simulation audit records and an SVG
//! chart of mean endpoint fitness against K.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::experiment::{ExperimentConfig, KSummary, SimulationRecord};

pub const CSV_HEADER: [&str; 12] = [
    "k",
    "mean_fitness",
    "stddev",
    "stderr",
    "mean_moves",
    "simulations",
    "seed",
    "n",
    "weights",
    "pattern",
    "landscape_mode",
    "strategy",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Positional notation with 17 significant digits, enough to round-trip any
/// `f64`.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.16}", x);
    }
    // The decimal exponent after rounding to 17 digits, read off the scientific form.
    let sci = format!("{:.16e}", x);
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (16 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Run settings echoed next to every result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub n: usize,
    pub k_values: Vec<usize>,
    pub runs: usize,
    pub sims_per_run: usize,
    pub weights: String,
    pub pattern: String,
    pub landscape_mode: String,
    pub strategy: String,
    pub max_evaluations: usize,
    pub seed: u64,
    pub version: String,
}

impl RunInfo {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        RunInfo {
            n: config.n,
            k_values: config.k_values.clone(),
            runs: config.runs,
            sims_per_run: config.sims_per_run,
            weights: config.weights.label(),
            pattern: config.pattern.label().into(),
            landscape_mode: config.landscape_mode.label().into(),
            strategy: config.strategy.label(),
            max_evaluations: config.strategy.max_evaluations,
            seed: config.master_seed,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// One result row: a [`KSummary`] plus the settings that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub k: usize,
    pub mean_fitness: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub mean_moves: f64,
    pub simulations: usize,
    pub seed: u64,
    pub n: usize,
    pub weights: String,
    pub pattern: String,
    pub landscape_mode: String,
    pub strategy: String,
}

impl OutputRecord {
    pub fn new(summary: &KSummary, info: &RunInfo) -> Self {
        OutputRecord {
            k: summary.k,
            mean_fitness: summary.mean_endpoint_fitness,
            stddev: summary.stddev,
            stderr: summary.stderr,
            mean_moves: summary.mean_walk_moves,
            simulations: summary.simulations,
            seed: info.seed,
            n: info.n,
            weights: info.weights.clone(),
            pattern: info.pattern.clone(),
            landscape_mode: info.landscape_mode.clone(),
            strategy: info.strategy.clone(),
        }
    }

    pub fn summary(&self) -> KSummary {
        KSummary {
            k: self.k,
            mean_endpoint_fitness: self.mean_fitness,
            stddev: self.stddev,
            stderr: self.stderr,
            mean_walk_moves: self.mean_moves,
            simulations: self.simulations,
        }
    }

    fn csv_fields(&self) -> [String; 12] {
        [
            self.k.to_string(),
            format_sig17(self.mean_fitness),
            format_sig17(self.stddev),
            format_sig17(self.stderr),
            format_sig17(self.mean_moves),
            self.simulations.to_string(),
            self.seed.to_string(),
            self.n.to_string(),
            self.weights.clone(),
            self.pattern.clone(),
            self.landscape_mode.clone(),
            self.strategy.clone(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub config: RunInfo,
    pub results: Vec<OutputRecord>,
}

impl ResultsDocument {
    pub fn new(summaries: &[KSummary], info: RunInfo) -> Self {
        let results = summaries
            .iter()
            .map(|s| OutputRecord::new(s, &info))
            .collect();
        ResultsDocument {
            config: info,
            results,
        }
    }

    pub fn summaries(&self) -> Vec<KSummary> {
        self.results.iter().map(OutputRecord::summary).collect()
    }
}

fn csv_err(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_csv<W: Write>(writer: W, doc: &ResultsDocument) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &doc.results {
        w.write_record(r.csv_fields()).map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_json<W: Write>(mut writer: W, doc: &ResultsDocument) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut writer, doc)?;
    writer.write_all(b"\n")?;
    writer.flush()
}

pub fn read_csv<R: io::Read>(reader: R) -> io::Result<Vec<OutputRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    if header != CSV_HEADER {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "unexpected CSV header",
        ));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn read_json<R: io::Read>(reader: R) -> io::Result<ResultsDocument> {
    Ok(serde_json::from_reader(reader)?)
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Writes summaries to `path`, or to stdout when `path` is `None`.
pub fn write_results(
    summaries: &[KSummary],
    info: RunInfo,
    format: Format,
    path: Option<&Path>,
) -> io::Result<()> {
    if summaries.is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "no summaries to write",
        ));
    }
    let doc = ResultsDocument::new(summaries, info);
    match (format, path) {
        (Format::Csv, Some(p)) => write_csv(create(p)?, &doc),
        (Format::Json, Some(p)) => write_json(create(p)?, &doc),
        (Format::Csv, None) => write_csv(io::stdout().lock(), &doc),
        (Format::Json, None) => write_json(io::stdout().lock(), &doc),
    }
}

pub fn write_records<W: Write>(writer: W, records: &[SimulationRecord]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "k",
        "run",
        "sim",
        "start",
        "endpoint",
        "fitness",
        "moves",
        "evaluations",
        "terminated",
    ])
    .map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.run.to_string(),
            r.sim.to_string(),
            r.start.to_string(),
            r.endpoint.to_string(),
            format_sig17(r.fitness),
            r.moves.to_string(),
            r.evaluations.to_string(),
            r.terminated_at_local_optimum.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_records_file(path: &Path, records: &[SimulationRecord]) -> io::Result<()> {
    write_records(create(path)?, records)
}

/// `k<TAB>mean<TAB>stderr` per summary, no header.
pub fn plot_data(summaries: &[KSummary]) -> String {
    summaries
        .iter()
        .map(|s| {
            format!(
                "{}\t{}\t{}\n",
                s.k,
                format_sig17(s.mean_endpoint_fitness),
                format_sig17(s.stderr)
            )
        })
        .collect()
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

/// Line-and-marker chart of mean endpoint fitness per K with ±1 stderr bars.
/// The fittest K's marker carries the `peak` class; every marker carries
/// `data-k` and `data-mean` attributes.
pub fn render_svg(summaries: &[KSummary]) -> String {
    let k_min = summaries.iter().map(|s| s.k).min().unwrap_or(0) as f64;
    let k_max = summaries.iter().map(|s| s.k).max().unwrap_or(0) as f64;
    let (k_lo, k_hi) = if k_max > k_min {
        (k_min, k_max)
    } else {
        (k_min - 1.0, k_min + 1.0)
    };

    let lo = summaries
        .iter()
        .map(|s| s.mean_endpoint_fitness - s.stderr)
        .fold(f64::INFINITY, f64::min);
    let hi = summaries
        .iter()
        .map(|s| s.mean_endpoint_fitness + s.stderr)
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 0.02 };
    let (y_lo, y_hi) = (lo - 0.1 * span, hi + 0.1 * span);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |k: f64| LEFT + (k - k_lo) / (k_hi - k_lo) * plot_w;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let peak = summaries
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, s)| match best {
            Some((_, m)) if m >= s.mean_endpoint_fitness => best,
            _ => Some((i, s.mean_endpoint_fitness)),
        })
        .map(|(i, _)| i);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="15">Average fitness for different K-values</text>"#,
        WIDTH / 2.0
    );
    // axes
    let _ = writeln!(
        svg,
        r#"<path class="axis" d="M{LEFT} {TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    for s in summaries {
        let x = px(s.k as f64);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            s.k
        );
    }
    for i in 0..=4 {
        let y = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{LEFT}" y2="{:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y:.4}</text>"##,
            LEFT - 5.0,
            py(y),
            py(y),
            LEFT - 8.0,
            py(y) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">K</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">mean endpoint fitness</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    if summaries.len() > 1 {
        let points: Vec<String> = summaries
            .iter()
            .map(|s| format!("{:.2},{:.2}", px(s.k as f64), py(s.mean_endpoint_fitness)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            points.join(" ")
        );
    }
    for (i, s) in summaries.iter().enumerate() {
        let x = px(s.k as f64);
        let _ = writeln!(
            svg,
            r#"<line class="error-bar" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            py(s.mean_endpoint_fitness - s.stderr),
            py(s.mean_endpoint_fitness + s.stderr)
        );
        let class = if Some(i) == peak {
            "marker peak"
        } else {
            "marker"
        };
        let _ = writeln!(
            svg,
            r#"<circle class="{class}" data-k="{}" data-mean="{}" cx="{x:.2}" cy="{:.2}" r="5" fill="steelblue"/>"#,
            s.k,
            format_sig17(s.mean_endpoint_fitness),
            py(s.mean_endpoint_fitness)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Sidecar path for a plot: same stem, `.tsv` extension.
pub fn sidecar_path(plot: &Path) -> PathBuf {
    plot.with_extension("tsv")
}

/// Writes the SVG chart to `path` and the tab-separated data next to it.
/// Returns the sidecar's path.
pub fn emit_plot(summaries: &[KSummary], path: &Path) -> io::Result<PathBuf> {
    if summaries.is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "nothing to plot",
        ));
    }
    let mut f = create(path)?;
    f.write_all(render_svg(summaries).as_bytes())?;
    f.flush()?;
    let sidecar = sidecar_path(path);
    let mut d = create(&sidecar)?;
    d.write_all(plot_data(summaries).as_bytes())?;
    d.flush()?;
    Ok(sidecar)
}
