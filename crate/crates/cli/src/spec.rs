//! JSON channel specifications.
//!
//! A spec is one of
//!
//! ```text
//! {"family": NAME, "params": {...}}
//! {"compose": [A, B, C]}      A o B o C, so C acts first
//! {"tensor": [A, B]}
//! ```
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows.

use std::fmt;
use std::path::Path;

use channel_purity::linalg::{ComplexMatrix, ComplexVector};
use channel_purity::zoo::{self, QubitChannelParams, ShiftedDepolarisingParams};
use channel_purity::{compose, tensor_channels, Channel, PureState};
use num_complex::Complex64;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    /// Location inside the document, such as `compose[1].params.lambda`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at {}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for SpecError {}

fn err<T>(path: &str, message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError { path: path.to_string(), message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Family { name: String, params: Map<String, Value> },
    Compose(Vec<ChannelSpec>),
    Tensor(Box<ChannelSpec>, Box<ChannelSpec>),
}

/// Parses a spec document; family names and the spec structure are checked
/// here, parameter values when the spec is resolved.
pub fn parse_spec(text: &str) -> Result<ChannelSpec, SpecError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| SpecError { path: format!("line {}, column {}", e.line(), e.column()), message: format!("malformed JSON: {e}") })?;
    from_value(&value, "")
}

/// Inline JSON when the argument starts with `{`, a file path otherwise.
pub fn load_spec_text(arg: &str) -> Result<String, SpecError> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| SpecError { path: arg.to_string(), message: format!("cannot read spec file: {e}") })
}

/// Parses and resolves a spec given inline or as a file path.
pub fn load_channel(arg: &str) -> Result<Channel, SpecError> {
    let spec = parse_spec(&load_spec_text(arg)?)?;
    resolve(&spec)
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn from_value(value: &Value, path: &str) -> Result<ChannelSpec, SpecError> {
    let Some(obj) = value.as_object() else {
        return err(path, "channel spec must be a JSON object");
    };
    let present: Vec<&str> = ["family", "compose", "tensor"].into_iter().filter(|k| obj.contains_key(*k)).collect();
    if present.len() != 1 {
        return err(path, format!("exactly one of family, compose, tensor is required; found {present:?}"));
    }
    match present[0] {
        "family" => {
            let Some(name) = obj["family"].as_str() else {
                return err(&join(path, "family"), "family must be a string");
            };
            if !zoo::FAMILIES.iter().any(|(n, _)| *n == name) {
                return err(&join(path, "family"), format!("unknown family {name:?}"));
            }
            let params = match obj.get("params") {
                None => Map::new(),
                Some(Value::Object(m)) => m.clone(),
                Some(_) => return err(&join(path, "params"), "params must be an object"),
            };
            if let Some(extra) = obj.keys().find(|k| *k != "family" && *k != "params") {
                return err(path, format!("unexpected key {extra:?}"));
            }
            Ok(ChannelSpec::Family { name: name.to_string(), params })
        }
        "compose" => {
            let Some(items) = obj["compose"].as_array().filter(|a| !a.is_empty()) else {
                return err(&join(path, "compose"), "compose must be a non-empty array");
            };
            let parts = items
                .iter()
                .enumerate()
                .map(|(k, v)| from_value(v, &format!("{}[{k}]", join(path, "compose"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ChannelSpec::Compose(parts))
        }
        _ => {
            let items = obj["tensor"].as_array().filter(|a| a.len() == 2);
            let Some(items) = items else {
                return err(&join(path, "tensor"), "tensor must be an array of two specs");
            };
            let a = from_value(&items[0], &format!("{}[0]", join(path, "tensor")))?;
            let b = from_value(&items[1], &format!("{}[1]", join(path, "tensor")))?;
            Ok(ChannelSpec::Tensor(Box::new(a), Box::new(b)))
        }
    }
}

/// Builds the channel described by a spec.
pub fn resolve(spec: &ChannelSpec) -> Result<Channel, SpecError> {
    resolve_at(spec, "")
}

fn resolve_at(spec: &ChannelSpec, path: &str) -> Result<Channel, SpecError> {
    match spec {
        ChannelSpec::Family { name, params } => build_family(name, &Params { map: params, path: join(path, "params") }),
        ChannelSpec::Compose(parts) => {
            let base = join(path, "compose");
            let last = parts.len() - 1;
            let mut acc = resolve_at(&parts[last], &format!("{base}[{last}]"))?;
            for k in (0..last).rev() {
                let outer = resolve_at(&parts[k], &format!("{base}[{k}]"))?;
                acc = compose(&outer, &acc).map_err(|e| SpecError { path: format!("{base}[{k}]"), message: e.to_string() })?;
            }
            Ok(acc)
        }
        ChannelSpec::Tensor(a, b) => {
            let base = join(path, "tensor");
            let a = resolve_at(a, &format!("{base}[0]"))?;
            let b = resolve_at(b, &format!("{base}[1]"))?;
            Ok(tensor_channels(&a, &b))
        }
    }
}

struct Params<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl Params<'_> {
    fn at(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn raw(&self, key: &str) -> Result<&Value, SpecError> {
        match self.map.get(key) {
            Some(v) => Ok(v),
            None => err(&self.path, format!("missing parameter {key:?}")),
        }
    }

    fn f64(&self, key: &str) -> Result<f64, SpecError> {
        match self.raw(key)?.as_f64() {
            Some(v) => Ok(v),
            None => err(&self.at(key), "expected a number"),
        }
    }

    fn usize(&self, key: &str) -> Result<usize, SpecError> {
        match self.raw(key)?.as_u64() {
            Some(v) if v > 0 => Ok(v as usize),
            _ => err(&self.at(key), "expected a positive integer"),
        }
    }

    fn opt_usize(&self, key: &str) -> Result<Option<usize>, SpecError> {
        if self.map.contains_key(key) {
            self.usize(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn matrix(&self, key: &str) -> Result<ComplexMatrix, SpecError> {
        parse_matrix(self.raw(key)?, &self.at(key))
    }

    fn opt_state(&self, key: &str) -> Result<Option<PureState>, SpecError> {
        let Some(v) = self.map.get(key) else { return Ok(None) };
        let amps = parse_vector(v, &self.at(key))?;
        PureState::normalized(amps).map(Some).map_err(|e| SpecError { path: self.at(key), message: e.to_string() })
    }
}

fn parse_complex(v: &Value, path: &str) -> Result<Complex64, SpecError> {
    if let Some(re) = v.as_f64() {
        return Ok(Complex64::new(re, 0.0));
    }
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => err(path, "complex entry must be [re, im] with numeric parts"),
        },
        _ => err(path, "complex entry must be [re, im]"),
    }
}

fn parse_vector(v: &Value, path: &str) -> Result<ComplexVector, SpecError> {
    let Some(items) = v.as_array().filter(|a| !a.is_empty()) else {
        return err(path, "expected a non-empty array of [re, im] entries");
    };
    let entries = items.iter().enumerate().map(|(k, x)| parse_complex(x, &format!("{path}[{k}]"))).collect::<Result<Vec<_>, _>>()?;
    Ok(ComplexVector::from_vec(entries))
}

fn parse_matrix(v: &Value, path: &str) -> Result<ComplexMatrix, SpecError> {
    let Some(rows) = v.as_array().filter(|a| !a.is_empty()) else {
        return err(path, "matrix must be a non-empty array of rows");
    };
    let parsed = rows.iter().enumerate().map(|(r, row)| parse_vector(row, &format!("{path}[{r}]"))).collect::<Result<Vec<_>, _>>()?;
    let ncols = parsed[0].len();
    if let Some(r) = parsed.iter().position(|row| row.len() != ncols) {
        return err(&format!("{path}[{r}]"), format!("row has {} entries, expected {ncols}", parsed[r].len()));
    }
    Ok(ComplexMatrix::from_fn(parsed.len(), ncols, |i, j| parsed[i][j]))
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

fn build_family(name: &str, p: &Params) -> Result<Channel, SpecError> {
    let lib = |e: channel_purity::PurityError| SpecError { path: p.path.clone(), message: e.to_string() };
    let qubit = |q: QubitChannelParams| zoo::upsilon(&q);
    match name {
        "identity" => Ok(Channel::identity(p.usize("d")?)),
        "depolarising" => zoo::depolarising(p.usize("d")?, p.f64("lambda")?).map_err(lib),
        "transpose_depolarising" => zoo::transpose_depolarising(p.usize("d")?, p.f64("lambda")?).map_err(lib),
        "werner_holevo" => zoo::werner_holevo(p.usize("d")?).map_err(lib),
        "shifted_depolarising" => {
            let params =
                ShiftedDepolarisingParams::new(p.usize("d")?, p.f64("a")?, p.f64("b")?, p.f64("c")?, p.opt_state("phi")?).map_err(lib)?;
            zoo::shifted_depolarising(&params).map_err(lib)
        }
        "shift" => {
            let phi = match (p.opt_state("phi")?, p.opt_usize("d")?) {
                (Some(phi), Some(d)) if phi.dim() != d => return err(&p.at("phi"), format!("phi has dimension {}, d = {d}", phi.dim())),
                (Some(phi), _) => phi,
                (None, d) => PureState::basis(d.unwrap_or(2), 0),
            };
            zoo::shift_channel(p.f64("a")?, p.f64("b")?, &phi).map_err(lib)
        }
        "unitary_mixture" => {
            let weights = match p.raw("weights")?.as_array() {
                Some(ws) => ws
                    .iter()
                    .enumerate()
                    .map(|(k, w)| {
                        w.as_f64()
                            .ok_or_else(|| SpecError { path: format!("{}[{k}]", p.at("weights")), message: "expected a number".into() })
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                None => return err(&p.at("weights"), "expected an array of numbers"),
            };
            let unitaries = match p.raw("unitaries")?.as_array() {
                Some(us) => us
                    .iter()
                    .enumerate()
                    .map(|(k, u)| parse_matrix(u, &format!("{}[{k}]", p.at("unitaries"))))
                    .collect::<Result<Vec<_>, _>>()?,
                None => return err(&p.at("unitaries"), "expected an array of matrices"),
            };
            let d = unitaries.first().map(|u| u.nrows()).unwrap_or(0);
            zoo::unitary_mixture_channel(&weights, &unitaries, d).map_err(lib)
        }
        "upsilon" => Ok(qubit(QubitChannelParams::new(p.f64("x1")?, p.f64("x2")?, p.f64("x3")?, p.f64("t")?))),
        "extreme" => Ok(qubit(zoo::extreme_point_channel(p.f64("x1")?, p.f64("x2")?, p.f64("sign")?).map_err(lib)?)),
        "example_d" => Ok(qubit(zoo::example_d_channel(p.f64("x1")?, p.f64("x3")?).map_err(lib)?)),
        "example_e" => {
            let x1 = p.f64("x1")?;
            let lambdas = [p.f64("l1")?, p.f64("l2")?, p.f64("l3")?];
            let params = zoo::example_e_params(lambdas, x1, x1 * x1).map_err(lib)?;
            Ok(qubit(params).with_label(format!("example_e(l={lambdas:?}, x1={x1})")))
        }
        "amplitude_damping" => zoo::amplitude_damping(p.f64("gamma")?).map_err(lib),
        "kraus" => {
            let Some(list) = p.raw("list")?.as_array().filter(|a| !a.is_empty()) else {
                return err(&p.at("list"), "expected a non-empty array of matrices");
            };
            let ops =
                list.iter().enumerate().map(|(k, m)| parse_matrix(m, &format!("{}[{k}]", p.at("list")))).collect::<Result<Vec<_>, _>>()?;
            Channel::from_kraus(&ops, format!("kraus(k={})", ops.len())).map_err(lib)
        }
        "superop" => {
            let m = p.matrix("matrix")?;
            let dim_in = match p.opt_usize("dim_in")? {
                Some(d) => d,
                None => exact_sqrt(m.ncols()).ok_or_else(|| SpecError {
                    path: p.at("matrix"),
                    message: format!("{} columns is not a square dimension", m.ncols()),
                })?,
            };
            let dim_out = match p.opt_usize("dim_out")? {
                Some(d) => d,
                None => exact_sqrt(m.nrows())
                    .ok_or_else(|| SpecError { path: p.at("matrix"), message: format!("{} rows is not a square dimension", m.nrows()) })?,
            };
            Channel::from_superop(dim_in, dim_out, m, "superop").map_err(lib)
        }
        other => err(&p.path, format!("unknown family {other:?}")),
    }
}
