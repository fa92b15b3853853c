//! Run configuration, data specifications, and result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::experiments::{
    self, EndpointParams, Experiment, ExperimentError, InflationRecord, NonEndpointParams, ScanSpec,
};
use crate::field::{FieldError, TrigPolynomial};
use crate::picard::EquationId;
use crate::rate::Rate;
use crate::trees::DEFAULT_ENUMERATION_CAP;

/// Process exit codes shared by every subcommand.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

pub const CSV_HEADER: [&str; 13] = [
    "equation",
    "N",
    "K",
    "s",
    "eps",
    "delta",
    "t",
    "norm_u0_Cs",
    "p0_xi1_closed",
    "p0_xi1_pipeline",
    "tail_bound",
    "lower_bound",
    "wall_ms",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config error at `{key}`: {message}")]
    Schema { key: String, message: String },
    #[error(transparent)]
    Parameters(#[from] ExperimentError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Config file as written by the user; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    equation: Option<EquationId>,
    s: Option<f64>,
    eps: Option<f64>,
    delta: Option<f64>,
    dim: Option<usize>,
    #[serde(rename = "N_list")]
    n_list: Option<Vec<u64>>,
    #[serde(rename = "K_list")]
    k_list: Option<Vec<usize>>,
    #[serde(rename = "J_max")]
    j_max: Option<usize>,
    #[serde(rename = "C0")]
    c0: Option<f64>,
    generation_cap: Option<usize>,
    closed_form_rtol: Option<f64>,
    record_wall_time: Option<bool>,
}

/// Fully resolved configuration. Serializing it gives the effective config
/// that accompanies every result file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub equation: EquationId,
    pub s: f64,
    pub eps: f64,
    pub delta: f64,
    pub dim: usize,
    #[serde(rename = "N_list")]
    pub n_list: Vec<u64>,
    #[serde(rename = "K_list")]
    pub k_list: Vec<usize>,
    #[serde(rename = "J_max")]
    pub j_max: usize,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub generation_cap: usize,
    pub closed_form_rtol: f64,
    pub record_wall_time: bool,
}

impl RunConfig {
    /// Parses and validates JSON text. `experiment` overrides the file's
    /// `experiment` key when given.
    pub fn from_json(text: &str, experiment: Option<Experiment>) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
            key: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        Self::resolve(raw, experiment)
    }

    /// Defaults for an experiment with no config file.
    pub fn defaults(experiment: Experiment) -> Self {
        Self::resolve(RawConfig::default(), Some(experiment)).expect("defaults are valid")
    }

    fn resolve(raw: RawConfig, experiment: Option<Experiment>) -> Result<Self, ConfigError> {
        let experiment = experiment.or(raw.experiment).ok_or_else(|| ConfigError::Schema {
            key: "experiment".into(),
            message: "missing experiment".into(),
        })?;
        let default_n = if experiment.is_endpoint() {
            vec![1 << 8]
        } else {
            (6..=14).map(|k| 1u64 << k).collect()
        };
        let cfg = RunConfig {
            experiment,
            equation: raw.equation.unwrap_or_else(|| experiment.default_equation()),
            s: raw.s.unwrap_or(-0.8),
            eps: raw.eps.unwrap_or(0.01),
            delta: raw.delta.unwrap_or(0.1),
            dim: raw.dim.unwrap_or(1),
            n_list: raw.n_list.unwrap_or(default_n),
            k_list: raw.k_list.unwrap_or_else(|| vec![2, 3, 4]),
            j_max: raw.j_max.unwrap_or(4),
            c0: raw.c0.unwrap_or(27.0),
            generation_cap: raw.generation_cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
            closed_form_rtol: raw.closed_form_rtol.unwrap_or(1e-12),
            record_wall_time: raw.record_wall_time.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.n_list.is_empty() {
            return invalid("N_list is empty".into());
        }
        if self.experiment.is_endpoint() {
            if self.k_list.is_empty() {
                return invalid("K_list is empty".into());
            }
            if !matches!(self.equation, EquationId::Nlh | EquationId::NlhFocusing) {
                return Err(ExperimentError::UnsupportedEquation(self.equation).into());
            }
            for &k in &self.k_list {
                for &n in &self.n_list {
                    EndpointParams { n, k, delta: self.delta, dim: self.dim }.validate()?;
                }
            }
        } else {
            for &n in &self.n_list {
                NonEndpointParams { n, s: self.s, eps: self.eps, delta: self.delta, dim: self.dim }
                    .validate()?;
            }
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return invalid(format!("C0 must be positive, got {}", self.c0));
        }
        if self.closed_form_rtol.is_nan() || self.closed_form_rtol <= 0.0 {
            return invalid(format!("closed_form_rtol must be positive, got {}", self.closed_form_rtol));
        }
        if self.j_max > self.generation_cap {
            return invalid(format!(
                "J_max = {} exceeds generation_cap = {}",
                self.j_max, self.generation_cap
            ));
        }
        Ok(())
    }

    pub fn scan_spec(&self) -> ScanSpec {
        ScanSpec {
            experiment: self.experiment,
            equation: self.equation,
            s: self.s,
            eps: self.eps,
            delta: self.delta,
            dim: self.dim,
            n_list: self.n_list.clone(),
            k_list: self.k_list.clone(),
            c0: self.c0,
            j_max: self.j_max,
            generation_cap: self.generation_cap,
            record_wall_time: self.record_wall_time,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn parse_config(path: &Path, experiment: Option<Experiment>) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    RunConfig::from_json(&text, experiment)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataSpecError {
    #[error("data spec must look like `kind:body`, got `{0}`")]
    MissingKind(String),
    #[error("unknown data kind `{0}` (expected nonendpoint, endpoint, cos or field)")]
    UnknownKind(String),
    #[error("bad entry `{entry}`: {message}")]
    BadEntry { entry: String, message: String },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("cannot read field file {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Parameters(#[from] ExperimentError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn key_values(body: &str) -> Result<BTreeMap<String, String>, DataSpecError> {
    let mut out = BTreeMap::new();
    for entry in body.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (k, v) = entry.split_once('=').ok_or_else(|| DataSpecError::BadEntry {
            entry: entry.to_string(),
            message: "expected key=value".into(),
        })?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(DataSpecError::BadEntry {
                entry: entry.to_string(),
                message: "duplicate key".into(),
            });
        }
    }
    Ok(out)
}

fn take<T: std::str::FromStr>(
    kv: &mut BTreeMap<String, String>,
    key: &'static str,
) -> Result<Option<T>, DataSpecError> {
    match kv.remove(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| DataSpecError::BadEntry {
            entry: format!("{key}={v}"),
            message: "not a valid number".into(),
        }),
    }
}

fn reject_leftovers(kv: BTreeMap<String, String>) -> Result<(), DataSpecError> {
    match kv.into_iter().next() {
        None => Ok(()),
        Some((k, v)) => Err(DataSpecError::BadEntry {
            entry: format!("{k}={v}"),
            message: "unknown key".into(),
        }),
    }
}

/// Parses an initial-data specification:
///
/// * `nonendpoint:N=4,s=-0.8,eps=0.05[,delta=0.1][,d=1][,amp=1]`
/// * `endpoint:N=256,K=3[,delta=0.1][,d=1]`
/// * `cos:A@n1,n2;B@m1,m2` (sum of `A cos(n·x)`; every `n` has the same length)
/// * `field:<path>` (canonical text form)
///
/// `amp` multiplies the non-endpoint data after the window check.
pub fn parse_data_spec(spec: &str) -> Result<TrigPolynomial, DataSpecError> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| DataSpecError::MissingKind(spec.to_string()))?;
    match kind.trim() {
        "nonendpoint" => {
            let mut kv = key_values(body)?;
            let p = NonEndpointParams {
                n: take(&mut kv, "N")?.ok_or(DataSpecError::MissingKey("N"))?,
                s: take(&mut kv, "s")?.ok_or(DataSpecError::MissingKey("s"))?,
                eps: take(&mut kv, "eps")?.ok_or(DataSpecError::MissingKey("eps"))?,
                delta: take(&mut kv, "delta")?.unwrap_or(0.1),
                dim: take(&mut kv, "d")?.unwrap_or(1),
            };
            let amp: f64 = take(&mut kv, "amp")?.unwrap_or(1.0);
            reject_leftovers(kv)?;
            Ok(experiments::make_data_nonendpoint(&p)?.scale_by(amp))
        }
        "endpoint" => {
            let mut kv = key_values(body)?;
            let p = EndpointParams {
                n: take(&mut kv, "N")?.ok_or(DataSpecError::MissingKey("N"))?,
                k: take(&mut kv, "K")?.ok_or(DataSpecError::MissingKey("K"))?,
                delta: take(&mut kv, "delta")?.unwrap_or(0.1),
                dim: take(&mut kv, "d")?.unwrap_or(1),
            };
            reject_leftovers(kv)?;
            Ok(experiments::make_data_endpoint(&p)?)
        }
        "cos" => parse_cosines(body),
        "field" => {
            let path = body.trim();
            let text = std::fs::read_to_string(path).map_err(|e| DataSpecError::Io {
                path: path.to_string(),
                message: e.to_string(),
            })?;
            Ok(TrigPolynomial::parse_canonical(&text)?)
        }
        other => Err(DataSpecError::UnknownKind(other.to_string())),
    }
}

fn parse_cosines(body: &str) -> Result<TrigPolynomial, DataSpecError> {
    let mut acc: Option<TrigPolynomial> = None;
    for entry in body.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let bad = |message: &str| DataSpecError::BadEntry {
            entry: entry.to_string(),
            message: message.to_string(),
        };
        let (amp, freq) = entry.split_once('@').ok_or_else(|| bad("expected A@n1,…,nd"))?;
        let amp: f64 = amp.trim().parse().map_err(|_| bad("amplitude is not a number"))?;
        if !amp.is_finite() {
            return Err(bad("amplitude must be finite"));
        }
        let n = freq
            .split(',')
            .map(|c| c.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("frequency components must be integers"))?;
        if n.is_empty() || n.contains(&i64::MIN) {
            return Err(bad("frequency out of range"));
        }
        let term = TrigPolynomial::cosine(n.len(), Rate::ONE, &n, amp);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    acc.ok_or_else(|| DataSpecError::BadEntry {
        entry: body.to_string(),
        message: "no cosine terms".into(),
    })
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: row {row}: {message}")]
    Parse { path: PathBuf, row: usize, message: String },
}

/// Fixed 15-significant-digit scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        x.to_string()
    }
}

fn record_fields(r: &InflationRecord) -> [String; 13] {
    [
        r.equation.clone(),
        r.n.to_string(),
        r.k.map(|k| k.to_string()).unwrap_or_default(),
        format_float(r.s),
        format_float(r.eps),
        format_float(r.delta),
        format_float(r.t),
        format_float(r.norm_u0_cs),
        format_float(r.p0_xi1_closed),
        format_float(r.p0_xi1_pipeline),
        format_float(r.tail_bound),
        format_float(r.lower_bound),
        r.wall_ms.to_string(),
    ]
}

/// Writes records as CSV to any sink.
pub fn write_csv<W: std::io::Write>(records: &[InflationRecord], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(record_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(source: R) -> Result<Vec<InflationRecord>, String> {
    let mut rd = csv::Reader::from_reader(source);
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let f = |i: usize| -> Result<f64, String> {
            rec[i].parse().map_err(|_| format!("row {row}: bad number `{}`", &rec[i]))
        };
        let int = |i: usize| -> Result<u64, String> {
            rec[i].parse().map_err(|_| format!("row {row}: bad integer `{}`", &rec[i]))
        };
        out.push(InflationRecord {
            equation: rec[0].to_string(),
            n: int(1)?,
            k: if rec[2].is_empty() { None } else { Some(int(2)? as usize) },
            s: f(3)?,
            eps: f(4)?,
            delta: f(5)?,
            t: f(6)?,
            norm_u0_cs: f(7)?,
            p0_xi1_closed: f(8)?,
            p0_xi1_pipeline: f(9)?,
            tail_bound: f(10)?,
            lower_bound: f(11)?,
            wall_ms: int(12)?,
        });
    }
    Ok(out)
}

/// One JSON object per line.
pub fn jsonl_string(records: &[InflationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn emit_results(
    records: &[InflationRecord],
    csv_path: &Path,
    jsonl_path: Option<&Path>,
) -> Result<(), OutputError> {
    let file = std::fs::File::create(csv_path)
        .map_err(|source| OutputError::Io { path: csv_path.to_path_buf(), source })?;
    write_csv(records, std::io::BufWriter::new(file))
        .map_err(|source| OutputError::Csv { path: csv_path.to_path_buf(), source })?;
    if let Some(p) = jsonl_path {
        std::fs::write(p, jsonl_string(records))
            .map_err(|source| OutputError::Io { path: p.to_path_buf(), source })?;
    }
    Ok(())
}

/// Log-log scatter of `|P₀Ξ₁|` against `N` (or `K` for endpoint scans) with
/// the least-squares line and its slope.
pub fn render_svg(records: &[InflationRecord]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let use_k = records.iter().all(|r| r.k.is_some()) && !records.is_empty();
    let points: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (if use_k { r.k.unwrap() as f64 } else { r.n as f64 }, r.p0_xi1_pipeline))
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .collect();
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.log10(), y.log10())).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0, 1.0, 0.0, 1.0);
    if let Some(&(x, y)) = logs.first() {
        (x0, x1, y0, y1) = (x, x, y, y);
        for &(x, y) in &logs {
            x0 = f64::min(x0, x);
            x1 = f64::max(x1, x);
            y0 = f64::min(y0, y);
            y1 = f64::max(y1, y);
        }
    }
    let pad = |lo: f64, hi: f64| {
        let span = (hi - lo).max(1e-3);
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    let xlabel = if use_k { "K" } else { "N" };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">log10 {xlabel}</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 18 {})">log10 |P0 Xi1|</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (x, y) in [(x0, y0), (x1, y1)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{x:.2}</text>"#,
            px(x),
            H - M + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{y:.2}</text>"#,
            M - 6.0,
            py(y) + 4.0
        );
    }
    for &(x, y) in &logs {
        let _ = writeln!(
            svg,
            r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#,
            px(x),
            py(y)
        );
    }
    if let Ok(fit) = experiments::fit_scaling(&points) {
        let ya = fit.slope * x0 + fit.intercept / std::f64::consts::LN_10;
        let yb = fit.slope * x1 + fit.intercept / std::f64::consts::LN_10;
        let _ = writeln!(
            svg,
            r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5"/>"#,
            px(x0),
            py(ya),
            px(x1),
            py(yb)
        );
        let err = fit.stderr.map(|e| format!(" ± {e:.4}")).unwrap_or_default();
        let _ = writeln!(
            svg,
            r#"<text class="slope" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">slope = {:.4}{err}</text>"#,
            M + 10.0,
            M + 20.0,
            fit.slope
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_plot(records: &[InflationRecord], svg_path: &Path) -> Result<(), OutputError> {
    std::fs::write(svg_path, render_svg(records))
        .map_err(|source| OutputError::Io { path: svg_path.to_path_buf(), source })
}
