//! JSON formats for channels, states and compounds.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major nested
//! arrays. Doubles are written in shortest round-trip form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::qcore::{Channel, DensityOperator, DimLayout, PureState};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &JsonMatrix, field: &str) -> Result<CMat> {
    let nr = rows.len();
    let nc = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Parse { field: field.into(), message: "ragged matrix rows".into() });
    }
    Ok(CMat::from_fn(nr, nc, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub mod cmat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = JsonMatrix::deserialize(d)?;
        matrix_from_json(&rows, "matrix").map_err(serde::de::Error::custom)
    }
}

pub mod cmat_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        let all = Vec::<JsonMatrix>::deserialize(d)?;
        all.iter().map(|m| matrix_from_json(m, "matrix").map_err(serde::de::Error::custom)).collect()
    }
}

pub mod cmat_opt {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_to_json).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMat>, D::Error> {
        let rows = Option::<JsonMatrix>::deserialize(d)?;
        rows.map(|r| matrix_from_json(&r, "matrix").map_err(serde::de::Error::custom)).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<JsonMatrix>,
}

impl ChannelFile {
    pub fn from_channel(ch: &Channel) -> Self {
        ChannelFile { d_in: ch.d_in(), d_out: ch.d_out(), kraus: ch.kraus().iter().map(matrix_to_json).collect() }
    }

    pub fn to_channel(&self) -> Result<Channel> {
        if self.kraus.is_empty() {
            return Err(Error::Parse { field: "kraus".into(), message: "empty Kraus list".into() });
        }
        let mut ks = Vec::with_capacity(self.kraus.len());
        for (i, k) in self.kraus.iter().enumerate() {
            let m = matrix_from_json(k, &format!("kraus[{i}]"))?;
            if m.nrows() != self.d_out || m.ncols() != self.d_in {
                return Err(Error::Parse {
                    field: format!("kraus[{i}]"),
                    message: format!("shape {}x{} but d_out x d_in = {}x{}", m.nrows(), m.ncols(), self.d_out, self.d_in),
                });
            }
            ks.push(m);
        }
        Channel::new(ks)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityOperator) -> Self {
        StateFile { dims: Some(rho.dims().to_vec()), matrix: Some(matrix_to_json(rho.matrix())), vector: None }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        StateFile {
            dims: Some(psi.dims().to_vec()),
            matrix: None,
            vector: Some(psi.vector().iter().map(|z| [z.re, z.im]).collect()),
        }
    }

    /// Density operator, accepting either representation. Sub-normalized
    /// matrices are accepted and flagged.
    pub fn to_density(&self) -> Result<DensityOperator> {
        match (&self.matrix, &self.vector) {
            (Some(m), None) => {
                let mat = matrix_from_json(m, "matrix")?;
                let layout = self.layout(mat.nrows())?;
                let t = mat.trace().re;
                if (t - 1.0).abs() <= crate::qcore::psd_tol(mat.nrows()) {
                    DensityOperator::new(mat, layout)
                } else {
                    DensityOperator::new_subnormalized(mat, layout)
                }
            }
            (None, Some(_)) => Ok(self.to_pure()?.density()),
            _ => Err(Error::Parse { field: "matrix".into(), message: "exactly one of `matrix` or `vector` is required".into() }),
        }
    }

    pub fn to_pure(&self) -> Result<PureState> {
        let v = self
            .vector
            .as_ref()
            .ok_or_else(|| Error::Parse { field: "vector".into(), message: "missing".into() })?;
        let vec = CVec::from_iterator(v.len(), v.iter().map(|p| c(p[0], p[1])));
        let layout = self.layout(vec.len())?;
        PureState::new(vec, layout)
    }

    fn layout(&self, n: usize) -> Result<DimLayout> {
        let dims = self.dims.clone().unwrap_or_else(|| vec![n]);
        let layout = DimLayout::new(dims).map_err(|e| Error::Parse { field: "dims".into(), message: e.to_string() })?;
        if layout.total() != n {
            return Err(Error::Parse { field: "dims".into(), message: format!("product {} != size {n}", layout.total()) });
        }
        Ok(layout)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundEntry {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub channel: Option<ChannelFile>,
    #[serde(default)]
    pub file: Option<String>,
}

pub fn read_channel(path: &Path) -> Result<Channel> {
    let text = read(path)?;
    let f: ChannelFile = parse(&text, "channel")?;
    f.to_channel()
}

pub fn read_state(path: &Path) -> Result<StateFile> {
    let text = read(path)?;
    parse(&text, "state")
}

/// Members and labels of a compound file; `file` entries are resolved
/// relative to the compound file's directory.
pub fn read_compound(path: &Path) -> Result<(Vec<Channel>, Vec<String>)> {
    let text = read(path)?;
    let entries: Vec<CompoundEntry> = parse(&text, "compound")?;
    if entries.is_empty() {
        return Err(Error::Parse { field: "compound".into(), message: "no members".into() });
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut chans = Vec::with_capacity(entries.len());
    let mut labels = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let ch = match (&e.channel, &e.file) {
            (Some(c), None) => c.to_channel()?,
            (None, Some(f)) => read_channel(&base.join(f))?,
            _ => {
                return Err(Error::Parse {
                    field: format!("compound[{i}]"),
                    message: "exactly one of `channel` or `file` is required".into(),
                })
            }
        };
        chans.push(ch);
        labels.push(e.label.clone().unwrap_or_else(|| i.to_string()));
    }
    Ok((chans, labels))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse { field: path.display().to_string(), message: e.to_string() })
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse { field: what.into(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn channel_round_trip_is_bit_exact() {
        let ch = Channel::random(2, 2, 3, &mut SeedStream::new(12).rng()).unwrap();
        let text = serde_json::to_string(&ChannelFile::from_channel(&ch)).unwrap();
        let back: ChannelFile = serde_json::from_str(&text).unwrap();
        let ch2 = back.to_channel().unwrap();
        for (a, b) in ch.kraus().iter().zip(ch2.kraus()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn non_tp_file_rejected() {
        let text = r#"{"d_in":2,"d_out":2,"kraus":[[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
        let f: ChannelFile = serde_json::from_str(text).unwrap();
        let err = f.to_channel().unwrap_err();
        assert!(err.to_string().contains("kraus completeness violated"));
    }

    #[test]
    fn state_vector_and_matrix_forms() {
        let f: StateFile = serde_json::from_str(r#"{"dims":[2,2],"vector":[[0.7071067811865476,0],[0,0],[0,0],[0.7071067811865476,0]]}"#).unwrap();
        let rho = f.to_density().unwrap();
        assert_eq!(rho.dims(), &[2, 2]);
        let back = StateFile::from_density(&rho).to_density().unwrap();
        assert_eq!(back.matrix(), rho.matrix());
    }
}
