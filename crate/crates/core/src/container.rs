// SPDX-License-Identifier: Apache-2.0

//! Weight container: one JSON header line followed by one decimal value per
//! line, row-major. Values are written in shortest round-trip form, so a
//! write/read cycle is bit-exact.
//!
//! ```text
//! {"layout_version":1,"shape":[2,2],"B":6,"scale":0.03225806451612903,"seed":7}
//! 0.5
//! -1
//! 0
//! 0.25
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LAYOUT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerHeader {
    pub layout_version: u32,
    pub shape: Vec<usize>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightContainer {
    pub header: ContainerHeader,
    pub values: Vec<f64>,
}

impl WeightContainer {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let c = WeightContainer {
            header: ContainerHeader {
                layout_version: LAYOUT_VERSION,
                shape,
                bits: None,
                scale: None,
                seed: None,
                provenance: None,
            },
            values,
        };
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        if self.header.layout_version != LAYOUT_VERSION {
            return Err(Error::Container(format!(
                "unsupported layout_version {}",
                self.header.layout_version
            )));
        }
        let count: usize = self.header.shape.iter().product();
        if count != self.values.len() {
            return Err(Error::Container(format!(
                "shape {:?} holds {count} values, found {}",
                self.header.shape,
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        self.check()?;
        let mut s = serde_json::to_string(&self.header)
            .map_err(|e| Error::Container(e.to_string()))?;
        s.push('\n');
        for v in &self.values {
            let _ = writeln!(s, "{v:?}");
        }
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let head = lines
            .next()
            .ok_or_else(|| Error::Container("missing header line".into()))?;
        let header: ContainerHeader =
            serde_json::from_str(head).map_err(|e| Error::Container(format!("header: {e}")))?;
        let values = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Container(format!("line {}: bad value '{l}'", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        let c = WeightContainer { header, values };
        c.check()?;
        Ok(c)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()?).map_err(|e| Error::unwritable(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
