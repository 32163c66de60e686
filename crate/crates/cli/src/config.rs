//! Experiment configuration: a flat `key = value` format with `[section]`
//! headers.
//!
//! ```text
//! experiment = clt
//! sizes = 8, 16, 32
//! replicas = 10000
//! seed = 42
//! method = eigen          # or trace
//! truncation = auto       # or an explicit d
//! format = csv            # or json
//! output = results.csv
//!
//! [function]
//! family = trig
//! coefficients = (1, 1.0, 0.0), (2, 0.5, 0.0)
//!
//! [rate]
//! k = 4
//! ```
//!
//! `#` starts a comment, on its own line or after a value. Unknown keys and
//! sections are errors, as is a section belonging to a different experiment.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use haarclt::functions::{Decay, Smoothness, DEFAULT_POWER_TERMS};
use haarclt::{Complex64, Method, TestFunction};

pub const MAX_SIZE: usize = 1024;
pub const DEFAULT_REPLICAS: usize = 10_000;
pub const DEFAULT_MAX_POWER: usize = 10;
pub const DEFAULT_COEFF_COUNT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Clt,
    Rate,
    Ortho,
    Coeffs,
    Truncation,
    SamplerCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Clt,
        Experiment::Rate,
        Experiment::Ortho,
        Experiment::Coeffs,
        Experiment::Truncation,
        Experiment::SamplerCheck,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Clt => "clt",
            Experiment::Rate => "rate",
            Experiment::Ortho => "ortho",
            Experiment::Coeffs => "coeffs",
            Experiment::Truncation => "truncation",
            Experiment::SamplerCheck => "sampler-check",
        }
    }

    fn needs_function(self) -> bool {
        matches!(
            self,
            Experiment::Clt | Experiment::Rate | Experiment::Coeffs
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}', expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Auto,
    Explicit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `(index, re, im)` triples; index 0 is the real constant term.
    Trig {
        coefficients: Vec<(usize, f64, f64)>,
    },
    Power {
        kappa: f64,
        terms: usize,
        phases: Option<Vec<f64>>,
    },
    Analytic {
        rho: f64,
    },
}

/// A test function as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub name: Option<String>,
    pub family: Family,
    pub smoothness_k: Option<u32>,
    pub derivative_norm: Option<f64>,
    /// `(kappa, c_kappa)`.
    pub decay: Option<(f64, f64)>,
}

impl FunctionSpec {
    pub fn trig(coefficients: Vec<(usize, f64, f64)>) -> Self {
        Self::with_family(Family::Trig { coefficients })
    }

    pub fn power(kappa: f64, terms: usize) -> Self {
        Self::with_family(Family::Power {
            kappa,
            terms,
            phases: None,
        })
    }

    pub fn analytic(rho: f64) -> Self {
        Self::with_family(Family::Analytic { rho })
    }

    fn with_family(family: Family) -> Self {
        Self {
            name: None,
            family,
            smoothness_k: None,
            derivative_norm: None,
            decay: None,
        }
    }

    /// Smoothness index for rate predictions, known without building.
    pub fn rate_k(&self) -> Option<u32> {
        self.smoothness_k
            .or_else(|| self.decay.map(|(kappa, _)| kappa.floor() as u32))
            .or(match self.family {
                Family::Power { kappa, .. } => Some(kappa.floor() as u32),
                _ => None,
            })
    }

    pub fn build(&self) -> haarclt::Result<TestFunction> {
        let mut f = match &self.family {
            Family::Trig { coefficients } => {
                let constant = coefficients.iter().filter(|c| c.0 == 0).map(|c| c.1).sum();
                let terms: Vec<(usize, Complex64)> = coefficients
                    .iter()
                    .filter(|c| c.0 > 0)
                    .map(|&(j, re, im)| (j, Complex64::new(re, im)))
                    .collect();
                TestFunction::trigonometric("trig", constant, &terms)?
            }
            Family::Power {
                kappa,
                terms,
                phases,
            } => TestFunction::power_decay(*kappa, *terms, phases.as_deref())?,
            Family::Analytic { rho } => TestFunction::analytic(*rho)?,
        };
        if let Some((kappa, c_kappa)) = self.decay {
            f = f.with_decay(Decay { kappa, c_kappa })?;
        }
        if let Some(k) = self.smoothness_k {
            let derivative_norm = self.derivative_norm.unwrap_or_else(|| f.derivative_norm(k));
            f = f.with_smoothness(Smoothness { k, derivative_norm })?;
        }
        if let Some(name) = &self.name {
            f = f.with_name(name.clone());
        }
        Ok(f)
    }

    fn validate(&self, errors: &mut Vec<ConfigError>) {
        let mut err =
            |field: &str, message: String| errors.push(ConfigError::field(field, message));
        match &self.family {
            Family::Trig { coefficients } => {
                if coefficients.is_empty() {
                    err(
                        "coefficients",
                        "trig family needs at least one (index, re, im) triple".into(),
                    );
                }
                let mut seen = std::collections::BTreeSet::new();
                for &(j, re, im) in coefficients {
                    if !seen.insert(j) {
                        err("coefficients", format!("index {j} appears more than once"));
                    }
                    if j == 0 && im != 0.0 {
                        err(
                            "coefficients",
                            "the constant term (index 0) must be real".into(),
                        );
                    }
                    if !re.is_finite() || !im.is_finite() {
                        err("coefficients", format!("coefficient {j} is not finite"));
                    }
                }
            }
            Family::Power {
                kappa,
                terms,
                phases,
            } => {
                if !(*kappa > 1.0) {
                    err("kappa", format!("must exceed 1, got {kappa}"));
                }
                if *terms == 0 || *terms > 1 << 16 {
                    err("terms", format!("must lie in 1..=65536, got {terms}"));
                }
                if let Some(p) = phases {
                    if p.len() != *terms {
                        err(
                            "phases",
                            format!("expected {terms} phases, got {}", p.len()),
                        );
                    }
                }
            }
            Family::Analytic { rho } => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    err("rho", format!("must lie in (0, 1), got {rho}"));
                }
            }
        }
        if self.smoothness_k == Some(0) {
            err("smoothness_k", "must be at least 1".into());
        }
        if let Some(norm) = self.derivative_norm {
            if self.smoothness_k.is_none() {
                err("derivative_norm", "requires smoothness_k".into());
            }
            if !(norm >= 0.0) {
                err(
                    "derivative_norm",
                    format!("must be nonnegative, got {norm}"),
                );
            }
        }
        if let Some((kappa, c)) = self.decay {
            if !(kappa > 1.0) {
                err("decay_kappa", format!("must exceed 1, got {kappa}"));
            }
            if !(c > 0.0) {
                err("decay_c", format!("must be positive, got {c}"));
            }
        }
        if let Some(name) = &self.name {
            if name.trim().is_empty() || name.trim() != name || name.contains(['\n', '#']) {
                err(
                    "name",
                    "must be a nonempty single line without surrounding spaces or '#'".into(),
                );
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub function: Option<FunctionSpec>,
    pub sizes: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    pub method: Method,
    pub truncation: Truncation,
    pub output_path: Option<String>,
    pub format: OutputFormat,
    /// `[rate]` / `[truncation]`: smoothness index override.
    pub k: Option<u32>,
    /// `[ortho]`: largest power in the estimate table.
    pub max_power: usize,
    /// `[coeffs]`: number of coefficients, grid size, first index of the decay fit.
    pub coeff_count: usize,
    pub grid: Option<usize>,
    pub j_min: usize,
}

impl ExperimentConfig {
    /// Documented defaults for `experiment`.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            function: None,
            sizes: vec![16],
            replicas: DEFAULT_REPLICAS,
            seed: 0,
            method: Method::Eigen,
            truncation: Truncation::Auto,
            output_path: None,
            format: OutputFormat::Csv,
            k: None,
            max_power: DEFAULT_MAX_POWER,
            coeff_count: DEFAULT_COEFF_COUNT,
            grid: None,
            j_min: 1,
        }
    }

    /// The smoothness index for rate/truncation work: section override,
    /// then function metadata.
    pub fn resolved_k(&self) -> Option<u32> {
        self.k
            .or_else(|| self.function.as_ref().and_then(FunctionSpec::rate_k))
    }

    pub fn coeff_grid(&self) -> usize {
        self.grid.unwrap_or_else(|| {
            (haarclt::functions::OVERSAMPLING * self.coeff_count).next_power_of_two()
        })
    }

    /// Checks every constraint, reporting all violations at once.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errors = Vec::new();
        let mut err =
            |field: &str, message: String| errors.push(ConfigError::field(field, message));

        if let Some(path) = &self.output_path {
            if path.is_empty() || path.trim() != path || path.contains(['\n', '#']) {
                err(
                    "output",
                    "must be a nonempty path without surrounding spaces or '#'".into(),
                );
            }
        }
        if self.sizes.is_empty() {
            err("sizes", "must list at least one matrix size".into());
        }
        if self.sizes.windows(2).any(|w| w[1] <= w[0]) {
            err("sizes", "must be strictly ascending".into());
        }
        if let Some(&bad) = self.sizes.iter().find(|&&n| n == 0 || n > MAX_SIZE) {
            err(
                "sizes",
                format!("each size must lie in 1..={MAX_SIZE}, got {bad}"),
            );
        }
        let needs_stats = matches!(
            self.experiment,
            Experiment::Clt | Experiment::Rate | Experiment::Ortho | Experiment::SamplerCheck
        );
        if self.replicas == 0 {
            err("replicas", "must be at least 1".into());
        } else if needs_stats && self.replicas < 2 {
            err(
                "replicas",
                format!("{} needs at least 2 replicas", self.experiment),
            );
        }
        if let Truncation::Explicit(d) = self.truncation {
            if d == 0 {
                err("truncation", "explicit d must be at least 1".into());
            }
            if let Some(&n) = self.sizes.first() {
                if self.method == Method::Trace && 2 * d > n {
                    err(
                        "truncation",
                        format!("d = {d} violates the trace-CLT requirement n >= 2d for n = {n}"),
                    );
                }
            }
        }
        match (&self.function, self.experiment.needs_function()) {
            (None, true) => err(
                "function",
                format!("{} needs a [function] section", self.experiment),
            ),
            (Some(f), _) => f.validate(&mut errors),
            _ => {}
        }
        let k = self.resolved_k();
        let mut err =
            |field: &str, message: String| errors.push(ConfigError::field(field, message));
        let k_needed = matches!(self.experiment, Experiment::Rate | Experiment::Truncation)
            || (self.method == Method::Trace
                && self.truncation == Truncation::Auto
                && matches!(self.experiment, Experiment::Clt | Experiment::Rate));
        if k_needed {
            match k {
                None => err(
                    "k",
                    "no smoothness index: set k or the function's smoothness metadata".into(),
                ),
                Some(k) if k < 2 => err("k", format!("rates need k >= 2, got {k}")),
                _ => {}
            }
        }
        if self.experiment == Experiment::Rate && self.sizes.len() < 3 {
            err("sizes", "rate fits need at least 3 sizes".into());
        }
        if self.experiment == Experiment::Ortho && self.max_power == 0 {
            err("max_power", "must be at least 1".into());
        }
        if self.experiment == Experiment::Coeffs {
            if self.coeff_count == 0 {
                err("count", "must be at least 1".into());
            }
            let grid = self.coeff_grid();
            if !grid.is_power_of_two() || grid < 2 * self.coeff_count + 1 {
                err(
                    "grid",
                    format!("must be a power of two >= 2*count+1, got {grid}"),
                );
            }
            if self.j_min == 0 {
                err("j_min", "must be at least 1".into());
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errors))
        }
    }

    /// Renders the config in the file format; parsing the result yields an
    /// identical config.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let sizes: Vec<String> = self.sizes.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "sizes = {}", sizes.join(", "));
        let _ = writeln!(out, "replicas = {}", self.replicas);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "method = {}", self.method);
        match self.truncation {
            Truncation::Auto => out.push_str("truncation = auto\n"),
            Truncation::Explicit(d) => {
                let _ = writeln!(out, "truncation = {d}");
            }
        }
        let _ = writeln!(out, "format = {}", self.format);
        if let Some(p) = &self.output_path {
            let _ = writeln!(out, "output = {p}");
        }
        if let Some(f) = &self.function {
            out.push_str("\n[function]\n");
            if let Some(name) = &f.name {
                let _ = writeln!(out, "name = {name}");
            }
            match &f.family {
                Family::Trig { coefficients } => {
                    out.push_str("family = trig\n");
                    let triples: Vec<String> = coefficients
                        .iter()
                        .map(|(j, re, im)| format!("({j}, {re:?}, {im:?})"))
                        .collect();
                    let _ = writeln!(out, "coefficients = {}", triples.join(", "));
                }
                Family::Power {
                    kappa,
                    terms,
                    phases,
                } => {
                    out.push_str("family = power\n");
                    let _ = writeln!(out, "kappa = {kappa:?}");
                    let _ = writeln!(out, "terms = {terms}");
                    if let Some(p) = phases {
                        let list: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
                        let _ = writeln!(out, "phases = {}", list.join(", "));
                    }
                }
                Family::Analytic { rho } => {
                    out.push_str("family = analytic\n");
                    let _ = writeln!(out, "rho = {rho:?}");
                }
            }
            if let Some(k) = f.smoothness_k {
                let _ = writeln!(out, "smoothness_k = {k}");
            }
            if let Some(n) = f.derivative_norm {
                let _ = writeln!(out, "derivative_norm = {n:?}");
            }
            if let Some((kappa, c)) = f.decay {
                let _ = writeln!(out, "decay_kappa = {kappa:?}");
                let _ = writeln!(out, "decay_c = {c:?}");
            }
        }
        let section = match self.experiment {
            Experiment::Rate | Experiment::Truncation => self.k.map(|k| format!("k = {k}\n")),
            Experiment::Ortho => Some(format!("max_power = {}\n", self.max_power)),
            Experiment::Coeffs => {
                let mut s = format!("count = {}\n", self.coeff_count);
                if let Some(g) = self.grid {
                    let _ = writeln!(s, "grid = {g}");
                }
                let _ = writeln!(s, "j_min = {}", self.j_min);
                Some(s)
            }
            _ => None,
        };
        if let Some(body) = section {
            let _ = write!(out, "\n[{}]\n{body}", self.experiment);
        }
        out
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config_string())
    }
}

/// One parse or validation problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, field: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            field: field.map(str::to_owned),
            message: message.into(),
        }
    }

    fn field(field: &str, message: String) -> Self {
        Self {
            line: None,
            field: Some(field.to_owned()),
            message,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        f.write_str(&self.message)
    }
}

/// Every problem found in a config.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl ConfigErrors {
    pub fn mentions(&self, field: &str) -> bool {
        self.0.iter().any(|e| e.field.as_deref() == Some(field))
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

const TOP_KEYS: &[&str] = &[
    "experiment",
    "sizes",
    "replicas",
    "seed",
    "method",
    "truncation",
    "output",
    "format",
];
const FUNCTION_KEYS: &[&str] = &[
    "name",
    "family",
    "coefficients",
    "kappa",
    "terms",
    "phases",
    "rho",
    "smoothness_k",
    "derivative_norm",
    "decay_kappa",
    "decay_c",
];

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    Some(match section {
        "" => TOP_KEYS,
        "function" => FUNCTION_KEYS,
        "clt" | "sampler-check" => &[],
        "rate" | "truncation" => &["k"],
        "ortho" => &["max_power"],
        "coeffs" => &["count", "grid", "j_min"],
        _ => return None,
    })
}

type Entries = BTreeMap<(String, String), (usize, String)>;

/// Typed lookup over the raw entries, collecting errors as it goes.
struct Reader<'a> {
    entries: &'a Entries,
    errors: Vec<ConfigError>,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<(usize, &str)> {
        self.entries
            .get(&(section.to_owned(), key.to_owned()))
            .map(|(line, v)| (*line, v.as_str()))
    }

    fn get<T>(
        &mut self,
        section: &str,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Option<T> {
        let (line, value) = self.raw(section, key)?;
        match parse(value) {
            Ok(v) => Some(v),
            Err(message) => {
                self.errors.push(ConfigError::at(line, Some(key), message));
                None
            }
        }
    }

    fn num<T: FromStr>(&mut self, section: &str, key: &str) -> Option<T> {
        self.get(section, key, |v| {
            v.parse::<T>()
                .map_err(|_| format!("cannot parse '{v}' as {}", std::any::type_name::<T>()))
        })
    }
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| format!("cannot parse list element '{}'", s.trim()))
        })
        .collect()
}

fn parse_triples(v: &str) -> Result<Vec<(usize, f64, f64)>, String> {
    let mut out = Vec::new();
    let mut rest = v.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| format!("expected '(' at '{rest}'"))?;
        let close = open.find(')').ok_or("unclosed '(' in coefficient list")?;
        let parts: Vec<&str> = open[..close].split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!(
                "expected (index, re, im), got ({})",
                &open[..close]
            ));
        }
        let j = parts[0]
            .parse::<usize>()
            .map_err(|_| format!("bad index '{}'", parts[0]))?;
        let re = parts[1]
            .parse::<f64>()
            .map_err(|_| format!("bad real part '{}'", parts[1]))?;
        let im = parts[2]
            .parse::<f64>()
            .map_err(|_| format!("bad imaginary part '{}'", parts[2]))?;
        out.push((j, re, im));
        rest = open[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(format!("expected ',' between triples at '{rest}'"));
        }
    }
    Ok(out)
}

fn parse_method(v: &str) -> Result<Method, String> {
    match v {
        "eigen" => Ok(Method::Eigen),
        "trace" => Ok(Method::Trace),
        other => Err(format!("unknown method '{other}', expected eigen or trace")),
    }
}

fn parse_truncation(v: &str) -> Result<Truncation, String> {
    if v == "auto" {
        return Ok(Truncation::Auto);
    }
    v.parse::<usize>()
        .map(Truncation::Explicit)
        .map_err(|_| format!("expected 'auto' or a positive integer, got '{v}'"))
}

/// Parses and validates a config, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut entries: Entries = BTreeMap::new();
    let mut section_lines: BTreeMap<String, usize> = BTreeMap::new();
    let mut section = String::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                errors.push(ConfigError::at(
                    line_no,
                    None,
                    format!("malformed section header '{line}'"),
                ));
                continue;
            };
            let name = name.trim().to_owned();
            if section_keys(&name).is_none() || name.is_empty() {
                errors.push(ConfigError::at(
                    line_no,
                    None,
                    format!("unknown section [{name}]"),
                ));
            } else if section_lines.insert(name.clone(), line_no).is_some() {
                errors.push(ConfigError::at(
                    line_no,
                    None,
                    format!("duplicate section [{name}]"),
                ));
            }
            section = name;
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(ConfigError::at(
                line_no,
                None,
                format!("expected 'key = value', got '{line}'"),
            ));
            continue;
        };
        let value = value.split_once('#').map_or(value, |(v, _)| v);
        let (key, value) = (key.trim(), value.trim());
        match section_keys(&section) {
            Some(allowed) if !allowed.contains(&key) => {
                let place = if section.is_empty() {
                    "top level".to_owned()
                } else {
                    format!("[{section}]")
                };
                errors.push(ConfigError::at(
                    line_no,
                    Some(key),
                    format!("unknown key in {place}"),
                ));
                continue;
            }
            None => continue, // already reported the section
            _ => {}
        }
        if entries
            .insert(
                (section.clone(), key.to_owned()),
                (line_no, value.to_owned()),
            )
            .is_some()
        {
            errors.push(ConfigError::at(line_no, Some(key), "duplicate key"));
        }
    }

    let mut r = Reader {
        entries: &entries,
        errors,
    };
    let experiment = match r.raw("", "experiment") {
        None => {
            r.errors.push(ConfigError::field(
                "experiment",
                "missing required field".into(),
            ));
            None
        }
        Some(_) => r.get("", "experiment", Experiment::from_str),
    };
    let Some(experiment) = experiment else {
        return Err(ConfigErrors(r.errors));
    };
    for (name, &line) in &section_lines {
        let belongs = name == "function" || name == experiment.tag();
        if !belongs && section_keys(name).is_some() {
            r.errors.push(ConfigError::at(
                line,
                None,
                format!("section [{name}] does not apply to experiment {experiment}"),
            ));
        }
    }

    let mut cfg = ExperimentConfig::new(experiment);
    if let Some(v) = r.get("", "sizes", parse_list::<usize>) {
        cfg.sizes = v;
    }
    if let Some(v) = r.num("", "replicas") {
        cfg.replicas = v;
    }
    if let Some(v) = r.num("", "seed") {
        cfg.seed = v;
    }
    if let Some(v) = r.get("", "method", parse_method) {
        cfg.method = v;
    }
    if let Some(v) = r.get("", "truncation", parse_truncation) {
        cfg.truncation = v;
    }
    if let Some(v) = r.get("", "format", OutputFormat::from_str) {
        cfg.format = v;
    }
    cfg.output_path = r.raw("", "output").map(|(_, v)| v.to_owned());

    if section_lines.contains_key("function") {
        cfg.function = read_function(&mut r, section_lines["function"]);
    }
    let tag = experiment.tag();
    match experiment {
        Experiment::Rate | Experiment::Truncation => cfg.k = r.num(tag, "k"),
        Experiment::Ortho => {
            if let Some(v) = r.num(tag, "max_power") {
                cfg.max_power = v;
            }
        }
        Experiment::Coeffs => {
            if let Some(v) = r.num(tag, "count") {
                cfg.coeff_count = v;
            }
            cfg.grid = r.num(tag, "grid");
            if let Some(v) = r.num(tag, "j_min") {
                cfg.j_min = v;
            }
        }
        _ => {}
    }

    let mut errors = r.errors;
    if let Err(ConfigErrors(more)) = cfg.validate() {
        errors.extend(more);
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errors))
    }
}

fn read_function(r: &mut Reader<'_>, header_line: usize) -> Option<FunctionSpec> {
    const S: &str = "function";
    let family_tag = r.raw(S, "family").map(|(_, v)| v.to_owned());
    let allowed: &[&str] = match family_tag.as_deref() {
        Some("trig") => &["coefficients"],
        Some("power") => &["kappa", "terms", "phases"],
        Some("analytic") => &["rho"],
        Some(other) => {
            let line = r.raw(S, "family").map_or(header_line, |x| x.0);
            r.errors.push(ConfigError::at(
                line,
                Some("family"),
                format!("unknown family '{other}', expected trig, power or analytic"),
            ));
            return None;
        }
        None => {
            r.errors.push(ConfigError::at(
                header_line,
                Some("family"),
                "missing required field",
            ));
            return None;
        }
    };
    for key in ["coefficients", "kappa", "terms", "phases", "rho"] {
        if !allowed.contains(&key) {
            if let Some((line, _)) = r.raw(S, key) {
                r.errors.push(ConfigError::at(
                    line,
                    Some(key),
                    format!(
                        "not a parameter of family {}",
                        family_tag.as_deref().unwrap_or("")
                    ),
                ));
            }
        }
    }
    let missing = |r: &mut Reader<'_>, key: &str| {
        r.errors.push(ConfigError::at(
            header_line,
            Some(key),
            "missing required field",
        ));
    };
    let family = match family_tag.as_deref() {
        Some("trig") => {
            let coefficients = r.get(S, "coefficients", parse_triples);
            if r.raw(S, "coefficients").is_none() {
                missing(r, "coefficients");
            }
            Family::Trig {
                coefficients: coefficients?,
            }
        }
        Some("power") => {
            let kappa = r.num::<f64>(S, "kappa");
            if r.raw(S, "kappa").is_none() {
                missing(r, "kappa");
            }
            let terms = r.num::<usize>(S, "terms").unwrap_or(DEFAULT_POWER_TERMS);
            let phases = r.get(S, "phases", parse_list::<f64>);
            Family::Power {
                kappa: kappa?,
                terms,
                phases,
            }
        }
        _ => {
            let rho = r.num::<f64>(S, "rho");
            if r.raw(S, "rho").is_none() {
                missing(r, "rho");
            }
            Family::Analytic { rho: rho? }
        }
    };
    let decay_kappa = r.num::<f64>(S, "decay_kappa");
    let decay_c = r.num::<f64>(S, "decay_c");
    let decay = match (decay_kappa, decay_c) {
        (Some(k), Some(c)) => Some((k, c)),
        (None, None) => None,
        _ => {
            r.errors.push(ConfigError::at(
                header_line,
                Some("decay_kappa"),
                "decay_kappa and decay_c must be given together",
            ));
            None
        }
    };
    Some(FunctionSpec {
        name: r.raw(S, "name").map(|(_, v)| v.to_owned()),
        family,
        smoothness_k: r.num(S, "smoothness_k"),
        derivative_norm: r.num(S, "derivative_norm"),
        decay,
    })
}
