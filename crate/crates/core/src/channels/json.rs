//! JSON channel-spec documents.
//!
//! One document describes a channel of type `"kraus"`, `"measurement"`, or
//! `"random_parameter"`, with an optional channel-state source. Complex
//! amplitudes are `[re, im]` pairs; matrices are row-major arrays of rows;
//! probabilities are plain numbers. The emitter produces a canonical key
//! order, and finite values round-trip bit-exactly.
//!
//! A source given as a density `matrix` (rather than a pure `vector`) is
//! folded into pure form at parse time: it is purified with an ancilla `G`,
//! the channel state system becomes `Ẽ = (G, E)`, and the channel is wrapped
//! to discard `G`.

use super::{
    purify_source, Channel, MeasurementChannel, RandomParameterChannel, StateDependentChannel,
    StateSource,
};
use crate::error::{Error, Result};
use crate::linalg::{mat_from_rows, mat_to_rows, CVec};
use crate::qstate::{DensityOperator, Povm, Validate};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelDoc {
    #[serde(rename = "type")]
    kind: String,
    dims: DimsDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    kraus: Option<Vec<JsonMatrix>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    povm: Option<PovmDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branches: Option<Vec<Vec<JsonMatrix>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<SourceDoc>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct DimsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    e: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PovmDoc {
    elements: Vec<PovmElementDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PovmElementDoc {
    label: String,
    matrix: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SourceDoc {
    dims: SourceDimsDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    vector: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SourceDimsDoc {
    e0: usize,
    e: usize,
    c: usize,
}

/// A parsed channel-spec document.
#[derive(Debug, Clone)]
pub enum ParsedChannel {
    Kraus { channel: StateDependentChannel, source: Option<StateSource> },
    Measurement { channel: MeasurementChannel, source: Option<StateSource> },
    RandomParameter(RandomParameterChannel),
}

impl ParsedChannel {
    /// The (channel, source) pair in the general form, lifting
    /// random-parameter channels and defaulting absent sources to the
    /// trivial one.
    pub fn into_pair(self) -> Result<(Channel, StateSource)> {
        match self {
            ParsedChannel::Kraus { channel, source } => Ok((
                Channel::Kraus(channel),
                source.unwrap_or_else(StateSource::trivial),
            )),
            ParsedChannel::Measurement { channel, source } => Ok((
                Channel::Measurement(channel),
                source.unwrap_or_else(StateSource::trivial),
            )),
            ParsedChannel::RandomParameter(rpc) => {
                let (channel, source) = rpc.lift()?;
                Ok((Channel::Kraus(channel), source))
            }
        }
    }

    pub fn validate(&self) -> crate::qstate::ValidationReport {
        match self {
            ParsedChannel::Kraus { channel, source } => {
                let mut report = channel.validate();
                if let Some(s) = source {
                    report.merge("source", s.validate());
                }
                report
            }
            ParsedChannel::Measurement { channel, source } => {
                let mut report = channel.validate();
                if let Some(s) = source {
                    report.merge("source", s.validate());
                }
                report
            }
            ParsedChannel::RandomParameter(rpc) => rpc.validate(),
        }
    }
}

fn parse_matrix(rows: &JsonMatrix, what: &str) -> Result<crate::linalg::CMat> {
    mat_from_rows(rows).ok_or_else(|| Error::Schema(format!("{what}: empty or ragged matrix")))
}

fn require<T>(field: Option<T>, name: &str) -> Result<T> {
    field.ok_or_else(|| Error::Schema(format!("missing field `{name}`")))
}

fn check_valid(report: crate::qstate::ValidationReport) -> Result<()> {
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::Invariant(report.to_string().trim_end().to_string()))
    }
}

fn parse_source(doc: &SourceDoc) -> Result<SourceParse> {
    let dims = (doc.dims.e0, doc.dims.e, doc.dims.c);
    match (&doc.vector, &doc.matrix) {
        (Some(v), None) => {
            let vec = CVec::from_vec(v.iter().map(|c| Complex64::new(c[0], c[1])).collect());
            let source = StateSource::new(dims.0, dims.1, dims.2, vec)
                .map_err(|e| Error::Invariant(format!("source: {e}")))?;
            Ok(SourceParse::Pure(source))
        }
        (None, Some(m)) => {
            let mat = parse_matrix(m, "source matrix")?;
            let op = DensityOperator::new(mat).map_err(|e| Error::Invariant(format!("source: {e}")))?;
            Ok(SourceParse::Mixed { varphi: op, dims })
        }
        (Some(_), Some(_)) => Err(Error::Schema(
            "source must have either `vector` or `matrix`, not both".into(),
        )),
        (None, None) => Err(Error::Schema("source must have `vector` or `matrix`".into())),
    }
}

enum SourceParse {
    Pure(StateSource),
    Mixed { varphi: DensityOperator, dims: (usize, usize, usize) },
}

/// Parse a channel-spec document, validating every invariant.
pub fn parse_channel_spec(text: &str) -> Result<ParsedChannel> {
    let doc: ChannelDoc = serde_json::from_str(text)
        .map_err(|e| Error::Schema(format!("malformed channel spec: {e}")))?;
    match doc.kind.as_str() {
        "kraus" => {
            let dim_e = require(doc.dims.e, "dims.e")?;
            let dim_a = require(doc.dims.a, "dims.a")?;
            let dim_b = require(doc.dims.b, "dims.b")?;
            let rows = require(doc.kraus.as_ref(), "kraus")?;
            let kraus: Vec<_> = rows
                .iter()
                .enumerate()
                .map(|(i, m)| parse_matrix(m, &format!("kraus[{i}]")))
                .collect::<Result<_>>()?;
            let channel = StateDependentChannel::new(dim_e, dim_a, dim_b, kraus)
                .map_err(|e| Error::Invariant(e.to_string()))?;
            match doc.source.as_ref().map(parse_source).transpose()? {
                None => Ok(ParsedChannel::Kraus { channel, source: None }),
                Some(SourceParse::Pure(source)) => {
                    if source.dim_e() != dim_e {
                        return Err(Error::Schema(format!(
                            "source dimE {} does not match channel dimE {dim_e}",
                            source.dim_e()
                        )));
                    }
                    Ok(ParsedChannel::Kraus { channel, source: Some(source) })
                }
                Some(SourceParse::Mixed { varphi, dims }) => {
                    let (channel, source) =
                        purify_source(&varphi, dims.0, dims.1, dims.2, Channel::Kraus(channel))?;
                    let Channel::Kraus(channel) = channel else { unreachable!() };
                    Ok(ParsedChannel::Kraus { channel, source: Some(source) })
                }
            }
        }
        "measurement" => {
            let dim_e = require(doc.dims.e, "dims.e")?;
            let dim_a = require(doc.dims.a, "dims.a")?;
            let povm_doc = require(doc.povm.as_ref(), "povm")?;
            let elements: Vec<_> = povm_doc
                .elements
                .iter()
                .map(|e| Ok((e.label.clone(), parse_matrix(&e.matrix, &format!("povm element `{}`", e.label))?)))
                .collect::<Result<_>>()?;
            let povm = Povm::new_unchecked(elements);
            check_valid(povm.validate())?;
            let channel = MeasurementChannel::new(dim_e, dim_a, povm)
                .map_err(|e| Error::Invariant(e.to_string()))?;
            match doc.source.as_ref().map(parse_source).transpose()? {
                None => Ok(ParsedChannel::Measurement { channel, source: None }),
                Some(SourceParse::Pure(source)) => {
                    if source.dim_e() != dim_e {
                        return Err(Error::Schema(format!(
                            "source dimE {} does not match channel dimE {dim_e}",
                            source.dim_e()
                        )));
                    }
                    Ok(ParsedChannel::Measurement { channel, source: Some(source) })
                }
                Some(SourceParse::Mixed { varphi, dims }) => {
                    let (channel, source) = purify_source(
                        &varphi,
                        dims.0,
                        dims.1,
                        dims.2,
                        Channel::Measurement(channel),
                    )?;
                    let Channel::Measurement(channel) = channel else { unreachable!() };
                    Ok(ParsedChannel::Measurement { channel, source: Some(source) })
                }
            }
        }
        "random_parameter" => {
            let dim_a = require(doc.dims.a, "dims.a")?;
            let dim_b = require(doc.dims.b, "dims.b")?;
            let alphabet = require(doc.alphabet, "alphabet")?;
            let q = require(doc.q, "q")?;
            let branch_rows = require(doc.branches.as_ref(), "branches")?;
            if doc.source.is_some() {
                return Err(Error::Schema(
                    "random_parameter channels define their source implicitly; remove `source`".into(),
                ));
            }
            let branches: Vec<Vec<_>> = branch_rows
                .iter()
                .enumerate()
                .map(|(s, ks)| {
                    ks.iter()
                        .enumerate()
                        .map(|(i, m)| parse_matrix(m, &format!("branches[{s}][{i}]")))
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?;
            let rpc = RandomParameterChannel::new(alphabet, q, branches, dim_a, dim_b)
                .map_err(|e| Error::Invariant(e.to_string()))?;
            Ok(ParsedChannel::RandomParameter(rpc))
        }
        other => Err(Error::Schema(format!(
            "unknown channel type `{other}` (expected kraus | measurement | random_parameter)"
        ))),
    }
}

/// Emit a channel-spec document with canonical key order.
pub fn emit_channel_spec(parsed: &ParsedChannel) -> String {
    let doc = match parsed {
        ParsedChannel::Kraus { channel, source } => ChannelDoc {
            kind: "kraus".into(),
            dims: DimsDoc {
                e: Some(channel.dim_e()),
                a: Some(channel.dim_a()),
                b: Some(channel.dim_b()),
            },
            kraus: Some(channel.kraus().iter().map(mat_to_rows).collect()),
            povm: None,
            alphabet: None,
            q: None,
            branches: None,
            source: source.as_ref().map(emit_source),
        },
        ParsedChannel::Measurement { channel, source } => ChannelDoc {
            kind: "measurement".into(),
            dims: DimsDoc {
                e: Some(channel.dim_e()),
                a: Some(channel.dim_a()),
                b: None,
            },
            kraus: None,
            povm: Some(PovmDoc {
                elements: channel
                    .povm()
                    .elements()
                    .iter()
                    .map(|(label, m)| PovmElementDoc {
                        label: label.clone(),
                        matrix: mat_to_rows(m),
                    })
                    .collect(),
            }),
            alphabet: None,
            q: None,
            branches: None,
            source: source.as_ref().map(emit_source),
        },
        ParsedChannel::RandomParameter(rpc) => ChannelDoc {
            kind: "random_parameter".into(),
            dims: DimsDoc {
                e: None,
                a: Some(rpc.dim_a()),
                b: Some(rpc.dim_b()),
            },
            kraus: None,
            povm: None,
            alphabet: Some(rpc.labels().to_vec()),
            q: Some(rpc.q().to_vec()),
            branches: Some(
                (0..rpc.num_states())
                    .map(|s| rpc.branch_kraus(s).iter().map(mat_to_rows).collect())
                    .collect(),
            ),
            source: None,
        },
    };
    serde_json::to_string_pretty(&doc).expect("channel doc serializes")
}

fn emit_source(source: &StateSource) -> SourceDoc {
    SourceDoc {
        dims: SourceDimsDoc {
            e0: source.dim_e0(),
            e: source.dim_e(),
            c: source.dim_c(),
        },
        vector: Some(source.vector().iter().map(|z| [z.re, z.im]).collect()),
        matrix: None,
    }
}
