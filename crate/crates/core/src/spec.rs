//! JSON channel descriptions.
//!
//! ```json
//! {"dim": 2, "form": "kraus", "matrices": [[[1,0],[0,0],[0,0],[1,0]]]}
//! {"dim": 2, "form": "family", "family": {"name": "depolarizing", "params": {"alpha": 0.5}}}
//! ```
//!
//! Complex entries are `[re, im]` pairs. A matrix is either a flat row-major
//! list of entries or a list of rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channels::{Channel, ChoiMatrix, KrausSet};
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, C64};
use crate::zoo::{Family, FamilySpec, Param};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Kraus,
    Superoperator,
    Choi,
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixJson::Rows(
            (0..m.nrows())
                .map(|r| {
                    (0..m.ncols())
                        .map(|c| [m[(r, c)].re, m[(r, c)].im])
                        .collect()
                })
                .collect(),
        )
    }

    /// Square matrix from either layout.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let (side, entries): (usize, Vec<[f64; 2]>) = match self {
            MatrixJson::Rows(rows) => {
                let side = rows.len();
                if let Some(bad) = rows.iter().position(|r| r.len() != side) {
                    return Err(Error::Parse(format!(
                        "row {bad} has {} entries, expected {side}",
                        rows[bad].len()
                    )));
                }
                (side, rows.concat())
            }
            MatrixJson::Flat(flat) => {
                let side = (flat.len() as f64).sqrt().round() as usize;
                if side * side != flat.len() {
                    return Err(Error::Parse(format!(
                        "flat matrix has {} entries, not a perfect square",
                        flat.len()
                    )));
                }
                (side, flat.clone())
            }
        };
        if side == 0 {
            return Err(Error::Parse("empty matrix".into()));
        }
        let m = ComplexMatrix::from_row_iterator(
            side,
            side,
            entries.iter().map(|[re, im]| C64::new(*re, *im)),
        );
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, Param>,
}

/// Serialised channel: explicit matrices or a named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub dim: usize,
    pub form: Form,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyJson>,
}

impl ChannelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel spec serialises")
    }

    fn matrices(&self) -> Result<Vec<ComplexMatrix>> {
        self.matrices
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.to_matrix()
                    .map_err(|e| Error::Parse(format!("matrices[{i}]: {e}")))
            })
            .collect()
    }

    fn expect_side(&self, ms: &[ComplexMatrix], side: usize) -> Result<()> {
        if ms.is_empty() {
            return Err(Error::Parse(
                format!("form `{:?}` needs `matrices`", self.form).to_lowercase(),
            ));
        }
        for (i, m) in ms.iter().enumerate() {
            if m.nrows() != side {
                return Err(Error::dimension(format!(
                    "matrices[{i}] is {0}x{0}, expected {side}x{side} for dim {1}",
                    m.nrows(),
                    self.dim
                )));
            }
        }
        Ok(())
    }

    pub fn family_spec(&self) -> Result<FamilySpec> {
        let fam = self
            .family
            .as_ref()
            .ok_or_else(|| Error::Parse("form `family` needs a `family` object".into()))?;
        let name: Family = fam.name.parse()?;
        Ok(FamilySpec {
            name,
            dim: self.dim,
            params: fam.params.clone(),
            matrices: self.matrices()?,
        })
    }

    pub fn build(&self) -> Result<Channel> {
        let n = self.dim;
        if n < 2 {
            return Err(Error::domain(format!("dim must be ≥ 2, got {n}")));
        }
        if self.form != Form::Family && self.family.is_some() {
            return Err(Error::Parse(
                "`family` is only allowed with form `family`".into(),
            ));
        }
        match self.form {
            Form::Kraus => {
                let ms = self.matrices()?;
                self.expect_side(&ms, n)?;
                Ok(Channel::from_kraus(&KrausSet::new(ms)?)?.with_label("kraus"))
            }
            Form::Superoperator => {
                let ms = self.matrices()?;
                self.expect_side(&ms, n * n)?;
                single(ms, "superoperator")
                    .and_then(|m| Channel::from_superoperator(m, n))
                    .map(|c| c.with_label("superoperator"))
            }
            Form::Choi => {
                let ms = self.matrices()?;
                self.expect_side(&ms, n * n)?;
                single(ms, "choi")
                    .and_then(|m| Channel::from_choi(&ChoiMatrix::new(m, n)?))
                    .map(|c| c.with_label("choi"))
            }
            Form::Family => self.family_spec()?.build(),
        }
    }
}

fn single(mut ms: Vec<ComplexMatrix>, form: &str) -> Result<ComplexMatrix> {
    if ms.len() != 1 {
        return Err(Error::Parse(format!(
            "form `{form}` takes exactly one matrix, got {}",
            ms.len()
        )));
    }
    Ok(ms.remove(0))
}
