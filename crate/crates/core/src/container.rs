//! Versioned on-disk container for built indexes.
//!
//! Layout: 8-byte magic, little-endian `u32` format version, then the
//! bincode encoding of [`IndexContainer`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::approx::LinkIndex;
use crate::error::{Error, Result};
use crate::listing::{ListingIndex, Metric};
use crate::model::DocumentCollection;
use crate::qindex::{IndexConfig, SubstringIndex};

pub const MAGIC: &[u8; 8] = b"USTRIDX\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub tau_min: f64,
    /// Builds the approximate index when set.
    pub epsilon: Option<f64>,
    /// Builds the listing index when set; collections of more than one
    /// document always get one (`Max` unless given).
    pub metric: Option<Metric>,
    pub config: IndexConfig,
}

impl BuildOptions {
    pub fn new(tau_min: f64) -> Self {
        BuildOptions {
            tau_min,
            epsilon: None,
            metric: None,
            config: IndexConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexContainer {
    pub format_version: u32,
    pub tau_min: f64,
    pub epsilon: Option<f64>,
    pub metric: Option<Metric>,
    pub docs: DocumentCollection,
    /// Present for single-document inputs.
    pub substring: Option<SubstringIndex>,
    pub listing: Option<ListingIndex>,
    pub approx: Option<LinkIndex>,
}

impl IndexContainer {
    pub fn build(docs: DocumentCollection, opts: &BuildOptions) -> Result<Self> {
        let single = docs.len() == 1;
        if opts.epsilon.is_some() && !single {
            return Err(Error::Argument(
                "the approximate index needs a single uncertain string".into(),
            ));
        }
        let substring = if single {
            Some(SubstringIndex::build(&docs.docs()[0], opts.tau_min, &opts.config)?)
        } else {
            None
        };
        let metric = opts.metric.or((!single).then_some(Metric::Max));
        let listing = match metric {
            Some(m) => Some(ListingIndex::build(&docs, opts.tau_min, m, &opts.config)?),
            None => None,
        };
        let approx = match opts.epsilon {
            Some(eps) => Some(LinkIndex::build(&docs.docs()[0], opts.tau_min, eps, &opts.config)?),
            None => None,
        };
        Ok(IndexContainer {
            format_version: FORMAT_VERSION,
            tau_min: opts.tau_min,
            epsilon: opts.epsilon,
            metric,
            docs,
            substring,
            listing,
            approx,
        })
    }

    pub fn substring(&self) -> Result<&SubstringIndex> {
        self.substring
            .as_ref()
            .ok_or_else(|| Error::Argument("container has no substring index (built from a collection)".into()))
    }

    pub fn listing(&self) -> Result<&ListingIndex> {
        self.listing
            .as_ref()
            .ok_or_else(|| Error::Argument("container has no listing index (build with --metric)".into()))
    }

    pub fn approx(&self) -> Result<&LinkIndex> {
        self.approx
            .as_ref()
            .ok_or_else(|| Error::Argument("container has no approximate index (build with --epsilon)".into()))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(1 << 16);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        bincode::serialize_into(&mut out, self).map_err(|e| Error::Container(e.to_string()))?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(Error::Container("not an index container (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Container(format!(
                "format version {version} not supported (expected {FORMAT_VERSION})"
            )));
        }
        let c: IndexContainer = bincode::deserialize(&bytes[12..]).map_err(|e| Error::Container(e.to_string()))?;
        if c.format_version != version {
            return Err(Error::Container("header and payload versions disagree".into()));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
