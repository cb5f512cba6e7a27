//! Messages exchanged between routers and consumers, and their canonical
//! single-line record form used in trace files.
//!
//! ```text
//! INT  name=/p3/o17 h=4 dart=12
//! INT  name=/p3/o17 h=- dart=-            (consumer to access router)
//! NINT name=/p3/o17 nonce=9912            (NDN baseline)
//! DATA name=/p3/o17 dart=12 sp=<hex> payload=<hex>
//! NACK name=/p3/o17 code=loop dart=12
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::ids::Dart;
use crate::name::{Name, NameError};

pub type Bytes = Arc<[u8]>;

/// Hop count and dart carried together by router-to-router Interests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RouteLabel {
    pub hop_count: u32,
    pub dart: Dart,
}

/// `I[n(j), h, dart]`. A consumer-issued Interest carries no label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interest {
    pub name: Name,
    pub label: Option<RouteLabel>,
}

impl Interest {
    pub fn local(name: Name) -> Self {
        Interest { name, label: None }
    }

    pub fn labeled(name: Name, hop_count: u32, dart: Dart) -> Self {
        Interest { name, label: Some(RouteLabel { hop_count, dart }) }
    }

    pub fn hop_count(&self) -> Option<u32> {
        self.label.map(|l| l.hop_count)
    }

    pub fn dart(&self) -> Option<Dart> {
        self.label.map(|l| l.dart)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NdnInterest {
    pub name: Name,
    pub nonce: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataPacket {
    pub name: Name,
    pub security_payload: Bytes,
    pub dart: Option<Dart>,
    pub payload: Bytes,
}

impl DataPacket {
    pub fn with_dart(&self, dart: Option<Dart>) -> Self {
        DataPacket { dart, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NackCode {
    NoContent,
    NoRoute,
    Loop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nack {
    pub name: Name,
    pub code: NackCode,
    pub dart: Option<Dart>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Packet {
    Interest(Interest),
    NdnInterest(NdnInterest),
    Data(DataPacket),
    Nack(Nack),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PacketKind {
    Interest,
    Data,
    Nack,
}

impl Packet {
    pub fn name(&self) -> &Name {
        match self {
            Packet::Interest(i) => &i.name,
            Packet::NdnInterest(i) => &i.name,
            Packet::Data(d) => &d.name,
            Packet::Nack(n) => &n.name,
        }
    }

    pub fn kind(&self) -> PacketKind {
        match self {
            Packet::Interest(_) | Packet::NdnInterest(_) => PacketKind::Interest,
            Packet::Data(_) => PacketKind::Data,
            Packet::Nack(_) => PacketKind::Nack,
        }
    }

    pub fn dart(&self) -> Option<Dart> {
        match self {
            Packet::Interest(i) => i.dart(),
            Packet::NdnInterest(_) => None,
            Packet::Data(d) => d.dart,
            Packet::Nack(n) => n.dart,
        }
    }

    pub fn hop_count(&self) -> Option<u32> {
        match self {
            Packet::Interest(i) => i.hop_count(),
            _ => None,
        }
    }
}

impl PacketKind {
    pub fn tag(self) -> &'static str {
        match self {
            PacketKind::Interest => "INT",
            PacketKind::Data => "DATA",
            PacketKind::Nack => "NACK",
        }
    }
}

impl NackCode {
    pub fn as_str(self) -> &'static str {
        match self {
            NackCode::NoContent => "no-content",
            NackCode::NoRoute => "no-route",
            NackCode::Loop => "loop",
        }
    }
}

impl fmt::Display for NackCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NackCode {
    type Err = RecordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no-content" => Ok(NackCode::NoContent),
            "no-route" => Ok(NackCode::NoRoute),
            "loop" => Ok(NackCode::Loop),
            other => Err(RecordError::BadValue("code", other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("unknown record tag {0:?}")]
    UnknownTag(String),
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("bad value for {0}: {1:?}")]
    BadValue(&'static str, String),
    #[error("unexpected token {0:?}")]
    Unexpected(String),
    #[error(transparent)]
    Name(#[from] NameError),
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| v.to_string())
}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Packet::Interest(i) => write!(
                f,
                "INT name={} h={} dart={}",
                i.name,
                opt(i.hop_count()),
                opt(i.dart())
            ),
            Packet::NdnInterest(i) => write!(f, "NINT name={} nonce={}", i.name, i.nonce),
            Packet::Data(d) => write!(
                f,
                "DATA name={} dart={} sp={} payload={}",
                d.name,
                opt(d.dart),
                hex::encode(&d.security_payload),
                hex::encode(&d.payload)
            ),
            Packet::Nack(n) => {
                write!(f, "NACK name={} code={} dart={}", n.name, n.code, opt(n.dart))
            }
        }
    }
}

struct Fields<'a> {
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn parse(tokens: std::str::SplitWhitespace<'a>) -> Result<Self, RecordError> {
        let pairs = tokens
            .map(|t| t.split_once('=').ok_or_else(|| RecordError::Unexpected(t.to_owned())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Fields { pairs })
    }

    fn get(&self, key: &'static str) -> Result<&'a str, RecordError> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or(RecordError::MissingField(key))
    }

    fn optional<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, RecordError> {
        match self.get(key)? {
            "-" => Ok(None),
            v => v.parse().map(Some).map_err(|_| RecordError::BadValue(key, v.to_owned())),
        }
    }

    fn bytes(&self, key: &'static str) -> Result<Bytes, RecordError> {
        let v = self.get(key)?;
        hex::decode(v)
            .map(Bytes::from)
            .map_err(|_| RecordError::BadValue(key, v.to_owned()))
    }
}

impl FromStr for Dart {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(Dart)
    }
}

impl FromStr for Packet {
    type Err = RecordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut tokens = s.split_whitespace();
        let tag = tokens.next().ok_or(RecordError::MissingField("tag"))?;
        let fields = Fields::parse(tokens)?;
        let name: Name = fields.get("name")?.parse()?;
        match tag {
            "INT" => {
                let h: Option<u32> = fields.optional("h")?;
                let dart: Option<Dart> = fields.optional("dart")?;
                let label = match (h, dart) {
                    (Some(hop_count), Some(dart)) => Some(RouteLabel { hop_count, dart }),
                    (None, None) => None,
                    _ => return Err(RecordError::BadValue("h/dart", s.to_owned())),
                };
                Ok(Packet::Interest(Interest { name, label }))
            }
            "NINT" => {
                let raw = fields.get("nonce")?;
                let nonce = raw
                    .parse()
                    .map_err(|_| RecordError::BadValue("nonce", raw.to_owned()))?;
                Ok(Packet::NdnInterest(NdnInterest { name, nonce }))
            }
            "DATA" => Ok(Packet::Data(DataPacket {
                name,
                dart: fields.optional("dart")?,
                security_payload: fields.bytes("sp")?,
                payload: fields.bytes("payload")?,
            })),
            "NACK" => Ok(Packet::Nack(Nack {
                name,
                code: fields.get("code")?.parse()?,
                dart: fields.optional("dart")?,
            })),
            other => Err(RecordError::UnknownTag(other.to_owned())),
        }
    }
}

/// Stand-in for security payload validation; every payload is accepted.
pub fn verify_security_payload(_data: &DataPacket) -> bool {
    true
}
