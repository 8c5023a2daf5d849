//! JSON instance files: `{"version": 1, "kind": ..., "payload": {...}}`.
//!
//! Rationals travel as `"num/den"` strings (or bare integers), surds as
//! `{"p", "q", "r", "d"}` objects. Parsing rejects anything that is not already
//! in lowest terms, so that every accepted number has exactly one spelling.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use verikit::heap::{HeapOp, HeapTrace, TraceError};
use verikit::scalar::{is_square_free, Rational, Surd};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub message: String,
    /// JSON path of the offending value, e.g. `payload.y[2]`.
    pub location: Option<String>,
}

impl InputError {
    pub fn new(message: impl Into<String>) -> Self {
        InputError {
            message: message.into(),
            location: None,
        }
    }

    pub fn at(location: impl Into<String>, message: impl Into<String>) -> Self {
        InputError {
            message: message.into(),
            location: Some(location.into()),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{loc}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Kkos,
    Wilber,
    Heap,
    Partition,
    Tiling,
    Cce,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Kkos => "kkos",
            Kind::Wilber => "wilber",
            Kind::Heap => "heap",
            Kind::Partition => "partition",
            Kind::Tiling => "tiling",
            Kind::Cce => "cce",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    version: u32,
    kind: Kind,
    payload: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Kkos(KkosPayload),
    Wilber(WilberPayload),
    Heap(HeapPayload),
    Partition(PartitionPayload),
    Tiling(TilingPayload),
    Cce(CcePayload),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub payload: Payload,
}

impl InstanceFile {
    pub fn kind(&self) -> Kind {
        match self.payload {
            Payload::Kkos(_) => Kind::Kkos,
            Payload::Wilber(_) => Kind::Wilber,
            Payload::Heap(_) => Kind::Heap,
            Payload::Partition(_) => Kind::Partition,
            Payload::Tiling(_) => Kind::Tiling,
            Payload::Cce(_) => Kind::Cce,
        }
    }

    pub fn to_value(&self) -> Value {
        let payload = match &self.payload {
            Payload::Kkos(p) => serde_json::to_value(p),
            Payload::Wilber(p) => serde_json::to_value(p),
            Payload::Heap(p) => serde_json::to_value(p),
            Payload::Partition(p) => serde_json::to_value(p),
            Payload::Tiling(p) => serde_json::to_value(p),
            Payload::Cce(p) => serde_json::to_value(p),
        }
        .expect("payloads serialise");
        serde_json::to_value(Envelope {
            version: FORMAT_VERSION,
            kind: self.kind(),
            payload,
        })
        .expect("envelope serialises")
    }

    /// Canonical text: pretty JSON with a trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("serialises");
        s.push('\n');
        s
    }
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, InputError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let location = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        InputError::at(location, e.into_inner().to_string())
    })
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, InputError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| InputError::new(format!("malformed JSON: {e}")))?;
    let env: Envelope = typed(value, "$")?;
    if env.version != FORMAT_VERSION {
        return Err(InputError::at(
            "$.version",
            format!("unsupported format version {} (expected {FORMAT_VERSION})", env.version),
        ));
    }
    let payload = match env.kind {
        Kind::Kkos => Payload::Kkos(typed(env.payload, "$.payload")?),
        Kind::Wilber => Payload::Wilber(typed(env.payload, "$.payload")?),
        Kind::Heap => Payload::Heap(typed(env.payload, "$.payload")?),
        Kind::Partition => Payload::Partition(typed(env.payload, "$.payload")?),
        Kind::Tiling => Payload::Tiling(typed(env.payload, "$.payload")?),
        Kind::Cce => Payload::Cce(typed(env.payload, "$.payload")?),
    };
    let file = InstanceFile { payload };
    validate(&file)?;
    Ok(file)
}

// ---------------------------------------------------------------- numbers

/// An exact rational in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rat(pub Rational);

impl Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Rat(Rational::from_integer(BigInt::from(v)))),
            Raw::Text(s) => parse_rational(&s).map(Rat).map_err(serde::de::Error::custom),
        }
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| format!("bad rational numerator in {s:?}"))?;
    let den: BigInt = den.parse().map_err(|_| format!("bad rational denominator in {s:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    if den.is_negative() {
        return Err(format!("negative denominator in {s:?}"));
    }
    let r = Rational::new(num.clone(), den.clone());
    if r.numer() != &num || r.denom() != &den {
        return Err(format!("rational {s:?} is not reduced (expected {:?})", format_rational(&r)));
    }
    Ok(r)
}

/// Integer that may be a JSON number or a decimal string (for big values).
#[derive(Debug, Clone, PartialEq, Eq)]
struct BigInteger(BigInt);

impl Serialize for BigInteger {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for BigInteger {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(BigInteger(BigInt::from(v))),
            Raw::Text(s) => s
                .trim()
                .parse()
                .map(BigInteger)
                .map_err(|_| serde::de::Error::custom(format!("bad integer {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurdRaw {
    p: BigInteger,
    q: BigInteger,
    r: BigInteger,
    d: u64,
}

/// `(p + q·√d) / r` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SurdRaw", into = "SurdRaw")]
pub struct SurdWire(pub Surd);

impl TryFrom<SurdRaw> for SurdWire {
    type Error = String;

    fn try_from(raw: SurdRaw) -> Result<Self, String> {
        if !is_square_free(raw.d) {
            return Err(format!("radicand d = {} is not square-free", raw.d));
        }
        if raw.r.0.is_zero() {
            return Err("surd denominator r is zero".into());
        }
        Surd::new(raw.p.0, raw.q.0, raw.r.0, raw.d)
            .map(SurdWire)
            .map_err(|e| e.to_string())
    }
}

impl From<SurdWire> for SurdRaw {
    fn from(w: SurdWire) -> Self {
        SurdRaw {
            p: BigInteger(w.0.p().clone()),
            q: BigInteger(w.0.q().clone()),
            r: BigInteger(w.0.r().clone()),
            d: w.0.d(),
        }
    }
}

pub fn surd_json(s: &Surd) -> Value {
    serde_json::to_value(SurdWire(s.clone())).expect("surd serialises")
}

pub fn rat_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

// ---------------------------------------------------------------- payloads

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphWire {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KkosPayload {
    pub graph: GraphWire,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Rat>,
    /// Support to certify (`kkos certify`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    /// Clique size for the reduction (`kkos reduce`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorWire {
    Red,
    Blue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterleaveWire {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WilberPayload {
    pub n: u32,
    /// `[key, colour]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<(u32, ColorWire)>>,
    /// Two equal-length sequences merged as `x₁ y₁ x₂ y₂ …` (x red, y blue).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interleave: Option<InterleaveWire>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpWire {
    Insert(u32),
    Extract(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeapPayload {
    pub ops: Vec<OpWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeWire {
    Original,
    Pairwise,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemWire {
    pub size_e: usize,
    pub size_f: usize,
    pub functions: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftWire {
    pub m: usize,
    #[serde(default = "three")]
    pub k: usize,
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclicWire {
    pub k: usize,
}

/// Exactly one of `system`, `shift`, `cyclic`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<CyclicWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeWire>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberWire {
    pub h: i64,
    /// Real half-open intervals `[a, b)`, taken mod 1.
    pub intervals: Vec<(SurdWire, SurdWire)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecWire {
    pub q: u64,
    pub beta: Vec<SurdWire>,
    pub alpha: Vec<SurdWire>,
}

/// Either `epsilon` (the three-fibre construction) or an explicit `tile` + `spec`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<SurdWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tile: Option<Vec<FiberWire>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecWire>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcePayload {
    pub s: usize,
    /// Profiles of ±1 actions, players in lexicographic `(i, j)` order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
}

// ---------------------------------------------------------------- semantic checks

fn exactly_one(location: &str, names: &[(&str, bool)]) -> Result<(), InputError> {
    let present: Vec<&str> = names.iter().filter(|(_, p)| *p).map(|(n, _)| *n).collect();
    if present.len() == 1 {
        Ok(())
    } else {
        let all: Vec<&str> = names.iter().map(|(n, _)| *n).collect();
        Err(InputError::at(
            location,
            format!("expected exactly one of {all:?}, found {present:?}"),
        ))
    }
}

fn validate(file: &InstanceFile) -> Result<(), InputError> {
    match &file.payload {
        Payload::Kkos(p) => {
            let n = p.graph.n;
            if let Some(y) = &p.y {
                if y.len() != n {
                    return Err(InputError::at("$.payload.y", format!("expected {n} entries, got {}", y.len())));
                }
                if let Some(i) = y.iter().position(|v| v.0.is_negative()) {
                    return Err(InputError::at(format!("$.payload.y[{i}]"), "negative entry"));
                }
                let sum: Rational = y.iter().map(|v| v.0.clone()).sum();
                if !sum.is_one() {
                    return Err(InputError::at(
                        "$.payload.y",
                        format!("entries sum to {}, expected 1", format_rational(&sum)),
                    ));
                }
            }
            if let Some(c) = &p.c {
                if c.len() != n {
                    return Err(InputError::at("$.payload.c", format!("expected {n} entries, got {}", c.len())));
                }
                if let Some(i) = c.iter().position(|v| v.0.is_negative()) {
                    return Err(InputError::at(format!("$.payload.c[{i}]"), "negative cost"));
                }
            }
            let mut seen = BTreeSet::new();
            for (i, &(u, v)) in p.graph.edges.iter().enumerate() {
                let loc = format!("$.payload.graph.edges[{i}]");
                if u >= n || v >= n {
                    return Err(InputError::at(loc, format!("vertex out of range for n = {n}")));
                }
                if u == v {
                    return Err(InputError::at(loc, "self-loop"));
                }
                if !seen.insert((u.min(v), u.max(v))) {
                    return Err(InputError::at(loc, "duplicate edge"));
                }
            }
            if let Some(s) = &p.support {
                if let Some(i) = s.iter().position(|&v| v >= n) {
                    return Err(InputError::at(format!("$.payload.support[{i}]"), "vertex out of range"));
                }
            }
            Ok(())
        }
        Payload::Wilber(p) => {
            exactly_one("$.payload", &[("sequence", p.sequence.is_some()), ("interleave", p.interleave.is_some())])?;
            if p.n == 0 {
                return Err(InputError::at("$.payload.n", "n must be at least 1"));
            }
            let keys: Vec<(String, u32)> = match (&p.sequence, &p.interleave) {
                (Some(seq), _) => seq
                    .iter()
                    .enumerate()
                    .map(|(i, (k, _))| (format!("$.payload.sequence[{i}][0]"), *k))
                    .collect(),
                (_, Some(il)) => {
                    if il.x.len() != il.y.len() {
                        return Err(InputError::at(
                            "$.payload.interleave",
                            format!("x has {} keys, y has {}", il.x.len(), il.y.len()),
                        ));
                    }
                    il.x.iter()
                        .enumerate()
                        .map(|(i, k)| (format!("$.payload.interleave.x[{i}]"), *k))
                        .chain(il.y.iter().enumerate().map(|(i, k)| (format!("$.payload.interleave.y[{i}]"), *k)))
                        .collect()
                }
                _ => unreachable!(),
            };
            match keys.into_iter().find(|(_, k)| *k == 0 || *k > p.n) {
                Some((loc, k)) => Err(InputError::at(loc, format!("key {k} outside [1, {}]", p.n))),
                None => Ok(()),
            }
        }
        Payload::Heap(p) => {
            let ops = p
                .ops
                .iter()
                .map(|op| match *op {
                    OpWire::Insert(id) => HeapOp::Insert(id),
                    OpWire::Extract(id) => HeapOp::Extract(id),
                })
                .collect();
            if let Err(e) = HeapTrace::new(ops) {
                let time = match e {
                    TraceError::DoubleInsert { time, .. } | TraceError::ExtractAbsent { time, .. } => time - 1,
                    TraceError::EpsilonOutOfRange(_) => 0,
                };
                return Err(InputError::at(format!("$.payload.ops[{time}]"), e.to_string()));
            }
            if let Some(e) = &p.epsilon {
                if !e.0.is_positive() || e.0 > Rational::one() {
                    return Err(InputError::at("$.payload.epsilon", "epsilon must lie in (0, 1]"));
                }
            }
            Ok(())
        }
        Payload::Partition(p) => {
            exactly_one(
                "$.payload",
                &[("system", p.system.is_some()), ("shift", p.shift.is_some()), ("cyclic", p.cyclic.is_some())],
            )?;
            if let Some(sys) = &p.system {
                for (i, f) in sys.functions.iter().enumerate() {
                    if f.len() != sys.size_e {
                        return Err(InputError::at(
                            format!("$.payload.system.functions[{i}]"),
                            format!("expected {} values, got {}", sys.size_e, f.len()),
                        ));
                    }
                    if let Some(x) = f.iter().position(|&v| v >= sys.size_f) {
                        return Err(InputError::at(
                            format!("$.payload.system.functions[{i}][{x}]"),
                            format!("value outside [0, {})", sys.size_f),
                        ));
                    }
                }
            }
            Ok(())
        }
        Payload::Tiling(p) => {
            let explicit = p.tile.is_some() || p.spec.is_some();
            exactly_one("$.payload", &[("epsilon", p.epsilon.is_some()), ("tile+spec", explicit)])?;
            if explicit && (p.tile.is_none() || p.spec.is_none()) {
                return Err(InputError::at("$.payload", "tile and spec must be given together"));
            }
            Ok(())
        }
        Payload::Cce(p) => {
            if let Some(profiles) = &p.profiles {
                let n = p.s * p.s.saturating_sub(1);
                for (t, a) in profiles.iter().enumerate() {
                    if a.len() != n {
                        return Err(InputError::at(
                            format!("$.payload.profiles[{t}]"),
                            format!("expected {n} actions, got {}", a.len()),
                        ));
                    }
                    if let Some(i) = a.iter().position(|&v| v != 1 && v != -1) {
                        return Err(InputError::at(format!("$.payload.profiles[{t}][{i}]"), "action must be 1 or -1"));
                    }
                }
            }
            if let Some(e) = &p.epsilon {
                if e.0.is_negative() {
                    return Err(InputError::at("$.payload.epsilon", "epsilon must be non-negative"));
                }
            }
            Ok(())
        }
    }
}
