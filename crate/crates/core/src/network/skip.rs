use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A side path that taps the field after layer `from` (0 is the input
/// plane), diffracts it over `(to - from)` layer distances, and merges it
/// into the input of layer `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SkipChannel {
    pub from: usize,
    pub to: usize,
}

impl SkipChannel {
    pub fn new(from: usize, to: usize) -> Result<Self> {
        if from >= to {
            return Err(Error::invalid(format!(
                "skip {from}->{to}: source must precede destination"
            )));
        }
        Ok(SkipChannel { from, to })
    }

    pub fn hops(&self) -> usize {
        self.to - self.from
    }
}

impl fmt::Display for SkipChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

/// Named skip topologies for a six-layer network, or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipSetup {
    None,
    Numbered(u8),
    Explicit(Vec<SkipChannel>),
}

impl SkipSetup {
    pub fn channels(&self) -> Result<Vec<SkipChannel>> {
        build_setup(self)
    }

    /// Short label for CSV column names.
    pub fn label(&self) -> String {
        match self {
            SkipSetup::None => "none".to_string(),
            SkipSetup::Numbered(i) => format!("setup{i}"),
            SkipSetup::Explicit(list) => list
                .iter()
                .map(|s| format!("{}-{}", s.from, s.to))
                .collect::<Vec<_>>()
                .join("_"),
        }
    }
}

impl FromStr for SkipSetup {
    type Err = Error;

    /// Accepts `none`, a setup number `1`..`6` (optionally prefixed with
    /// `setup`), or a comma list such as `0-4,1-5` / `0->4,1->5`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("none") {
            return Ok(SkipSetup::None);
        }
        let numeric = t.strip_prefix("setup").unwrap_or(t);
        if let Ok(id) = numeric.parse::<u8>() {
            let setup = SkipSetup::Numbered(id);
            build_setup(&setup)?;
            return Ok(setup);
        }
        let mut list = Vec::new();
        for part in t.split(',') {
            let part = part.trim();
            let (a, b) = part
                .split_once("->")
                .or_else(|| part.split_once('-'))
                .ok_or_else(|| Error::invalid(format!("cannot parse skip channel '{part}'")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("cannot parse skip channel '{part}'")))
            };
            list.push(SkipChannel::new(parse(a)?, parse(b)?)?);
        }
        Ok(SkipSetup::Explicit(list))
    }
}

impl fmt::Display for SkipSetup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipSetup::None => write!(f, "none"),
            SkipSetup::Numbered(i) => write!(f, "{i}"),
            SkipSetup::Explicit(list) => {
                let parts: Vec<String> = list.iter().map(|s| format!("{}-{}", s.from, s.to)).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl Default for SkipSetup {
    /// Input-plane skips into layers 4, 5 and 6.
    fn default() -> Self {
        SkipSetup::Numbered(2)
    }
}

impl Serialize for SkipSetup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SkipSetup {
    /// Accepts the string forms of [`FromStr`] or a bare setup number.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(u8),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Id(i) => i.to_string(),
            Raw::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

pub fn build_setup(setup: &SkipSetup) -> Result<Vec<SkipChannel>> {
    let pairs: &[(usize, usize)] = match setup {
        SkipSetup::None => &[],
        SkipSetup::Explicit(list) => return Ok(list.clone()),
        SkipSetup::Numbered(1) => &[(0, 2), (0, 3)],
        SkipSetup::Numbered(2) => &[(0, 4), (0, 5), (0, 6)],
        SkipSetup::Numbered(3) => &[(1, 4), (2, 4)],
        SkipSetup::Numbered(4) => &[(3, 5), (3, 6)],
        SkipSetup::Numbered(5) => &[(0, 4), (1, 4), (2, 4)],
        SkipSetup::Numbered(6) => &[(0, 4), (1, 5), (2, 6)],
        SkipSetup::Numbered(other) => {
            return Err(Error::invalid(format!(
                "unknown skip setup {other}; expected 1..6 or none"
            )))
        }
    };
    Ok(pairs.iter().map(|&(from, to)| SkipChannel { from, to }).collect())
}
