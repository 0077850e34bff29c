//! Scenario documents.
//!
//! A document is a sequence of `[section]` headers and `key = value` lines.
//! `#` starts a comment; blank lines are ignored. Keys are case-sensitive and
//! may appear once per section, except `point` in `[initial]`.
//!
//! ```text
//! [scenario]
//! name = example2            # required; used in output file names
//! alpha = 0.8                # required, strictly inside (0, 1)
//! horizon = 1000             # required, T > 0
//! steps = 16384              # default 4096
//! seed = 0                   # default 0; shifts the sampling point set
//! K = 2                      # default 2; factor in delta(eps)
//! samples = 4000             # default 4000, at least 1000
//! output_dir = out           # default "out"
//!
//! [field]
//! dim = 1                    # required
//! f0 = -x0^3                 # one line per component, or
//! matrix = -2 -1; -1 -2      # f(x) = M x, rows separated by ';'
//!
//! [initial]
//! point = 1                  # one or more; components separated by
//! point = -0.8               # spaces or commas
//!
//! [lyapunov]
//! kind = quadratic           # quadratic | even-power | linear
//! P = 1                      # quadratic: rows separated by ';'
//! weights = 1                # even-power
//! powers = 4                 # even-power, even integers >= 2
//! w = 1                      # linear
//!
//! [constants]
//! C1 = 1
//! C2 = 1
//! C3 = 2
//! a = 2
//! b = 2
//! c = 4
//! r = 1
//!
//! [probe]                    # optional
//! eps = 0.1
//! points = 8                 # default 8
//! ```
//!
//! Component polynomials are sums of terms `coeff*x<j>^<e>*...`, for
//! example `-x0^3 + 0.5*x0*x1 - 2e-1*x1`. Every term needs at least one
//! variable, so `f(0) = 0`. A component may be `0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fdesolve::{Term, VectorField, VectorFieldSpec};
use crate::fracops::FractionalOrder;
use crate::lyapcheck::{EnvelopeConstants, LyapunovCandidate, MIN_SAMPLES};

pub const DEFAULT_STEPS: usize = 4096;
pub const DEFAULT_K: f64 = 2.0;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 4000;
pub const DEFAULT_PROBE_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub eps: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub alpha: FractionalOrder,
    pub field: VectorFieldSpec,
    pub initial_points: Vec<Vec<f64>>,
    pub horizon: f64,
    pub steps: usize,
    pub lyapunov: LyapunovCandidate,
    pub constants: EnvelopeConstants,
    pub probe: Option<ProbeConfig>,
    pub big_k: f64,
    pub seed: u64,
    pub samples: usize,
    pub output_dir: PathBuf,
    /// Keys that were filled from defaults, as `key = value`.
    pub defaults_applied: Vec<String>,
}

impl ScenarioConfig {
    /// `key: value` lines describing the configuration.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.name);
        let _ = writeln!(s, "alpha: {}", self.alpha);
        let _ = writeln!(s, "field: {}", self.field);
        let _ = writeln!(s, "lyapunov: {}", self.lyapunov);
        let _ = writeln!(s, "horizon: {}", self.horizon);
        let _ = writeln!(s, "steps: {}", self.steps);
        let _ = writeln!(s, "dt: {}", self.horizon / self.steps as f64);
        let _ = writeln!(s, "K: {}", self.big_k);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "samples: {}", self.samples);
        for (i, p) in self.initial_points.iter().enumerate() {
            let _ = writeln!(s, "initial_point_{i}: {}", join(p));
        }
        if let Some(p) = &self.probe {
            let _ = writeln!(s, "probe_eps: {}", p.eps);
            let _ = writeln!(s, "probe_points: {}", p.points);
        }
        let defaults = if self.defaults_applied.is_empty() {
            "none".to_string()
        } else {
            self.defaults_applied.join(", ")
        };
        let _ = writeln!(s, "defaults_applied: {defaults}");
        s
    }
}

pub(crate) fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

const SECTIONS: [&str; 6] = ["scenario", "field", "initial", "lyapunov", "constants", "probe"];

#[derive(Debug, Default)]
struct Section {
    header_line: usize,
    entries: BTreeMap<String, (usize, String)>,
    points: Vec<(usize, String)>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "scenario" => &["name", "alpha", "horizon", "steps", "seed", "K", "samples", "output_dir"],
        "field" => &["dim", "matrix"],
        "initial" => &["point"],
        "lyapunov" => &["kind", "P", "weights", "powers", "w"],
        "constants" => &["C1", "C2", "C3", "a", "b", "c", "r"],
        "probe" => &["eps", "points"],
        _ => &[],
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, "section header must end with ']'"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(err(line_no, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(err(line_no, format!("section [{name}] appears twice")));
            }
            sections.insert(name.to_string(), Section { header_line: line_no, ..Section::default() });
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        let section_name = current
            .as_deref()
            .ok_or_else(|| err(line_no, "key outside of any section"))?;
        let section = sections.get_mut(section_name).expect("current section exists");
        let is_component = section_name == "field" && component_index(key).is_some();
        if !allowed_keys(section_name).contains(&key) && !is_component {
            return Err(err(line_no, format!("unknown key '{key}' in [{section_name}]")));
        }
        if value.is_empty() {
            return Err(err(line_no, format!("key '{key}' has no value")));
        }
        if section_name == "initial" {
            section.points.push((line_no, value.to_string()));
        } else if section.entries.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(err(line_no, format!("key '{key}' repeated in [{section_name}]")));
        }
    }
    Ok(sections)
}

fn component_index(key: &str) -> Option<usize> {
    key.strip_prefix('f').and_then(|d| d.parse().ok())
}

struct Reader<'a> {
    name: &'a str,
    section: Option<&'a Section>,
    defaults: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn line(&self) -> usize {
        self.section.map_or(0, |s| s.header_line)
    }

    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.section
            .and_then(|s| s.entries.get(key))
            .map(|(l, v)| (*l, v.as_str()))
    }

    fn required(&self, key: &str) -> Result<(usize, &str)> {
        self.raw(key)
            .ok_or_else(|| err(self.line(), format!("missing required key '{key}' in [{}]", self.name)))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((l, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| err(l, format!("'{key}' must be {what}, got '{v}'"))),
        }
    }

    fn required_f64(&self, key: &str) -> Result<(usize, f64)> {
        let (l, _) = self.required(key)?;
        let v: f64 = self.parse(key, "a number")?.expect("present");
        if !v.is_finite() {
            return Err(err(l, format!("'{key}' must be finite")));
        }
        Ok((l, v))
    }

    fn with_default<T: std::str::FromStr + ToString>(&mut self, key: &str, what: &str, default: T) -> Result<T> {
        match self.parse(key, what)? {
            Some(v) => Ok(v),
            None => {
                self.defaults.push(format!("{key} = {}", default.to_string()));
                Ok(default)
            }
        }
    }
}

fn parse_vector(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("'{s}' is not a finite number")))
        })
        .collect()
}

fn parse_matrix(line: usize, text: &str) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = text.split(';').map(|r| parse_vector(line, r)).collect::<Result<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(err(line, format!("matrix must be square, got {n} rows of unequal or wrong length")));
    }
    Ok(rows)
}

/// Parses one polynomial component such as `-x0^3 + 0.5*x0*x1`.
pub fn parse_polynomial(text: &str, dim: usize, target: usize) -> std::result::Result<Vec<Term>, String> {
    let s: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.iter().collect::<String>() == "0" {
        return Ok(Vec::new());
    }
    let mut pos = 0;
    let mut terms = Vec::new();
    while pos < s.len() {
        let mut coeff = 1.0;
        if s[pos] == '+' || s[pos] == '-' {
            if s[pos] == '-' {
                coeff = -1.0;
            }
            pos += 1;
        } else if !terms.is_empty() {
            return Err(format!("expected '+' or '-' at position {pos}"));
        }
        let mut exponents = vec![0u32; dim];
        let mut factors = 0;
        loop {
            if pos >= s.len() {
                return Err("expression ends where a factor is expected".into());
            }
            if s[pos] == 'x' {
                pos += 1;
                let start = pos;
                while pos < s.len() && s[pos].is_ascii_digit() {
                    pos += 1;
                }
                let j: usize = s[start..pos]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| "variable needs an index, as in x0".to_string())?;
                if j >= dim {
                    return Err(format!("variable x{j} out of range for dimension {dim}"));
                }
                let mut e = 1;
                if pos < s.len() && s[pos] == '^' {
                    pos += 1;
                    let start = pos;
                    while pos < s.len() && s[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    e = s[start..pos]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| "exponent must be a non-negative integer".to_string())?;
                }
                exponents[j] += e;
            } else {
                let start = pos;
                while pos < s.len() && (s[pos].is_ascii_digit() || s[pos] == '.') {
                    pos += 1;
                }
                if pos < s.len() && (s[pos] == 'e' || s[pos] == 'E') {
                    pos += 1;
                    if pos < s.len() && (s[pos] == '+' || s[pos] == '-') {
                        pos += 1;
                    }
                    while pos < s.len() && s[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
                let num: String = s[start..pos].iter().collect();
                let v: f64 = num.parse().map_err(|_| format!("cannot read a factor at position {start}"))?;
                coeff *= v;
            }
            factors += 1;
            if pos < s.len() && s[pos] == '*' {
                pos += 1;
            } else {
                break;
            }
        }
        debug_assert!(factors > 0);
        if exponents.iter().all(|&e| e == 0) {
            return Err("degree-0 monomial: every term needs a variable so that f(0) = 0".into());
        }
        terms.push(Term { target, coeff, exponents });
    }
    Ok(terms)
}

fn parse_field(section: Option<&Section>, defaults: &mut Vec<String>) -> Result<VectorFieldSpec> {
    let r = Reader { name: "field", section, defaults };
    let (dim_line, _) = r.required("dim")?;
    let dim: usize = r.parse("dim", "a positive integer")?.expect("present");
    if dim == 0 {
        return Err(err(dim_line, "'dim' must be at least 1"));
    }
    let section = section.expect("dim present");
    if let Some((l, m)) = r.raw("matrix") {
        if section.entries.keys().any(|k| component_index(k).is_some()) {
            return Err(err(l, "give either 'matrix' or component lines f<i>, not both"));
        }
        let rows = parse_matrix(l, m)?;
        if rows.len() != dim {
            return Err(err(l, format!("matrix has {} rows, dim is {dim}", rows.len())));
        }
        return VectorFieldSpec::linear(&rows).map_err(|e| err(l, e.to_string()));
    }
    let mut terms = Vec::new();
    for i in 0..dim {
        let (l, text) = r.required(&format!("f{i}"))?;
        terms.extend(parse_polynomial(text, dim, i).map_err(|m| err(l, format!("f{i}: {m}")))?);
    }
    if let Some((k, (l, _))) = section
        .entries
        .iter()
        .find(|(k, _)| component_index(k).is_some_and(|i| i >= dim))
    {
        return Err(err(*l, format!("component '{k}' out of range for dimension {dim}")));
    }
    VectorFieldSpec::new(dim, terms).map_err(|e| err(dim_line, e.to_string()))
}

fn parse_lyapunov(section: Option<&Section>, dim: usize, defaults: &mut Vec<String>) -> Result<LyapunovCandidate> {
    let r = Reader { name: "lyapunov", section, defaults };
    let (kind_line, kind) = r.required("kind")?;
    let candidate = match kind {
        "quadratic" => {
            let (l, p) = r.required("P")?;
            let rows = parse_matrix(l, p)?;
            LyapunovCandidate::quadratic(&rows).map_err(|e| err(l, e.to_string()))?
        }
        "even-power" => {
            let (lw, w) = r.required("weights")?;
            let (lp, p) = r.required("powers")?;
            let weights = parse_vector(lw, w)?;
            let powers = p
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u32>().map_err(|_| err(lp, format!("power '{s}' is not an integer"))))
                .collect::<Result<Vec<_>>>()?;
            LyapunovCandidate::even_power_sum(weights, powers).map_err(|e| err(lp, e.to_string()))?
        }
        "linear" => {
            let (l, w) = r.required("w")?;
            LyapunovCandidate::linear(parse_vector(l, w)?).map_err(|e| err(l, e.to_string()))?
        }
        other => {
            return Err(err(
                kind_line,
                format!("unknown lyapunov kind '{other}' (quadratic, even-power or linear)"),
            ))
        }
    };
    if candidate.dim() != dim {
        return Err(err(
            kind_line,
            format!("candidate has dimension {}, field has {dim}", candidate.dim()),
        ));
    }
    Ok(candidate)
}

fn parse_constants(section: Option<&Section>, defaults: &mut Vec<String>) -> Result<EnvelopeConstants> {
    let r = Reader { name: "constants", section, defaults };
    let k = EnvelopeConstants {
        c1: r.required_f64("C1")?.1,
        c2: r.required_f64("C2")?.1,
        c3: r.required_f64("C3")?.1,
        a: r.required_f64("a")?.1,
        b: r.required_f64("b")?.1,
        c: r.required_f64("c")?.1,
        r: r.required_f64("r")?.1,
    };
    k.validate().map_err(|e| err(r.line(), e.to_string()))?;
    Ok(k)
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let sections = tokenize(text)?;
    let mut defaults = Vec::new();
    for required in ["scenario", "field", "initial", "lyapunov", "constants"] {
        if !sections.contains_key(required) {
            return Err(err(0, format!("missing required section [{required}]")));
        }
    }

    let mut sc = Reader { name: "scenario", section: sections.get("scenario"), defaults: &mut defaults };
    let name = sc.required("name")?.1.to_string();
    if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(err(sc.required("name")?.0, "name may only contain letters, digits, '-' and '_'"));
    }
    let (alpha_line, alpha_value) = sc.required_f64("alpha")?;
    let alpha = FractionalOrder::new(alpha_value).map_err(|_| {
        err(alpha_line, format!("alpha must lie strictly inside (0, 1), got {alpha_value}"))
    })?;
    let (horizon_line, horizon) = sc.required_f64("horizon")?;
    if horizon <= 0.0 {
        return Err(err(horizon_line, "horizon must be positive"));
    }
    let steps: usize = sc.with_default("steps", "a positive integer", DEFAULT_STEPS)?;
    if steps < 8 {
        return Err(err(sc.raw("steps").map_or(0, |x| x.0), "steps must be at least 8"));
    }
    let seed: u64 = sc.with_default("seed", "a non-negative integer", DEFAULT_SEED)?;
    let big_k: f64 = sc.with_default("K", "a number", DEFAULT_K)?;
    if !(big_k.is_finite() && big_k > 1.0) {
        return Err(err(sc.raw("K").map_or(0, |x| x.0), "K must exceed 1"));
    }
    let samples: usize = sc.with_default("samples", "a positive integer", DEFAULT_SAMPLES)?;
    if samples < MIN_SAMPLES {
        return Err(err(
            sc.raw("samples").map_or(0, |x| x.0),
            format!("samples must be at least {MIN_SAMPLES}"),
        ));
    }
    let output_dir = PathBuf::from(sc.with_default("output_dir", "a path", "out".to_string())?);

    let field = parse_field(sections.get("field"), &mut defaults)?;
    let dim = field.dim();

    let initial = sections.get("initial").expect("checked");
    if initial.points.is_empty() {
        return Err(err(initial.header_line, "at least one 'point' is required in [initial]"));
    }
    let initial_points = initial
        .points
        .iter()
        .map(|(l, text)| {
            let p = parse_vector(*l, text)?;
            if p.len() != dim {
                return Err(err(*l, format!("point has {} components, dim is {dim}", p.len())));
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;

    let lyapunov = parse_lyapunov(sections.get("lyapunov"), dim, &mut defaults)?;
    let constants = parse_constants(sections.get("constants"), &mut defaults)?;

    let probe = match sections.get("probe") {
        None => None,
        Some(section) => {
            let mut pr = Reader { name: "probe", section: Some(section), defaults: &mut defaults };
            let (eps_line, eps) = pr.required_f64("eps")?;
            if eps <= 0.0 {
                return Err(err(eps_line, "probe eps must be positive"));
            }
            if eps > constants.r {
                return Err(err(
                    eps_line,
                    format!("probe eps {eps} exceeds the ball radius r = {}", constants.r),
                ));
            }
            let points: usize = pr.with_default("points", "a positive integer", DEFAULT_PROBE_POINTS)?;
            if points == 0 {
                return Err(err(pr.raw("points").map_or(0, |x| x.0), "probe needs at least one point"));
            }
            Some(ProbeConfig { eps, points })
        }
    };

    Ok(ScenarioConfig {
        name,
        alpha,
        field,
        initial_points,
        horizon,
        steps,
        lyapunov,
        constants,
        probe,
        big_k,
        seed,
        samples,
        output_dir,
        defaults_applied: defaults,
    })
}

/// Names accepted by [`builtin_document`].
pub const BUILTIN_SCENARIOS: [&str; 3] = ["example1", "example1-identity", "example2"];

/// Scenario documents shipped with the tool.
pub fn builtin_document(name: &str) -> Option<&'static str> {
    match name {
        "example1" => Some(EXAMPLE1),
        "example1-identity" => Some(EXAMPLE1_IDENTITY),
        "example2" => Some(EXAMPLE2),
        _ => None,
    }
}

const EXAMPLE1: &str = "\
# D^a x = -A x with A = [[2, 1], [1, 2]], V(x) = <x, x>
[scenario]
name = example1
alpha = 0.7
horizon = 20
steps = 4096

[field]
dim = 2
matrix = -2 -1; -1 -2

[initial]
point = 1 0
point = 0.5 -0.5
point = -0.6 0.8

[lyapunov]
kind = quadratic
P = 1 0; 0 1

[constants]
# <grad V, f> = -2 x'Ax <= -2 |x|^2
C1 = 1
C2 = 1
C3 = 2
a = 2
b = 2
c = 2
r = 1

[probe]
eps = 0.5
points = 8
";

const EXAMPLE1_IDENTITY: &str = "\
# D^a x = -x in two dimensions; each coordinate is x0_i E_a(-t^a)
[scenario]
name = example1-identity
alpha = 0.7
horizon = 20
steps = 4096

[field]
dim = 2
matrix = -1 0; 0 -1

[initial]
point = 1 0
point = 0.5 -0.5
point = -0.6 0.8

[lyapunov]
kind = quadratic
P = 1 0; 0 1

[constants]
C1 = 1
C2 = 1
C3 = 2
a = 2
b = 2
c = 2
r = 1
";

const EXAMPLE2: &str = "\
# D^a x = -x^3, V(x) = x^2
[scenario]
name = example2
alpha = 0.8
horizon = 1000
steps = 16384

[field]
dim = 1
f0 = -x0^3

[initial]
point = 1
point = 0.6
point = -0.8

[lyapunov]
kind = quadratic
P = 1

[constants]
C1 = 1
C2 = 1
C3 = 2
a = 2
b = 2
c = 4
r = 1

[probe]
eps = 0.1
points = 2
";
