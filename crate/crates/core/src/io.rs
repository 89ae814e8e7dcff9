//! JSON file formats for states and channels.
//!
//! Complex entries are `[re, im]` pairs. Floats are written with 17
//! significant digits so a write/read cycle reproduces every `f64` exactly.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, Serializer};

use crate::channels::{depolarizing_extension, erasure_extension, GioChannel, KrausChannel};
use crate::error::Error;
use crate::matrix::{ComplexMatrix, DensityMatrix, C64};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

pub type Entry = [f64; 2];
pub type MatrixRows = Vec<Vec<Entry>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim: usize,
    pub matrix: MatrixRows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> MatrixRows {
    m.rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Checks the declared dimension against the array shape, then builds the matrix.
pub fn rows_to_matrix(dim: usize, rows: &MatrixRows) -> Result<ComplexMatrix, IoError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(IoError::Parse(format!("matrix shape does not match dim = {dim}")));
    }
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    Ok(ComplexMatrix::from_rows(&rows)?)
}

impl StateFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.nrows(),
            matrix: matrix_to_rows(m),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, IoError> {
        rows_to_matrix(self.dim, &self.matrix)
    }

    pub fn to_state(&self) -> Result<DensityMatrix, IoError> {
        Ok(DensityMatrix::new(&self.to_matrix()?)?)
    }
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim: ch.dim(),
            kraus: ch.kraus_ops().iter().map(matrix_to_rows).collect(),
            label: ch.label().map(str::to_owned),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel, IoError> {
        if self.kraus.is_empty() {
            return Err(IoError::Parse("kraus list is empty".into()));
        }
        let ops = self
            .kraus
            .iter()
            .map(|k| rows_to_matrix(self.dim, k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KrausChannel::new(ops, self.label.clone())?)
    }
}

pub fn parse_state(json: &str) -> Result<DensityMatrix, IoError> {
    let file: StateFile = serde_json::from_str(json).map_err(|e| IoError::Parse(e.to_string()))?;
    file.to_state()
}

pub fn parse_channel(json: &str) -> Result<KrausChannel, IoError> {
    let file: ChannelFile = serde_json::from_str(json).map_err(|e| IoError::Parse(e.to_string()))?;
    file.to_channel()
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_state(path: &Path) -> Result<DensityMatrix, IoError> {
    parse_state(&read(path)?)
}

/// Loads a channel from a built-in name (`depol-ext:d`, `erase-ext:d`, `dephase:d`) or a file.
pub fn load_channel(spec: &str) -> Result<KrausChannel, IoError> {
    if let Some(channel) = builtin_channel(spec)? {
        return Ok(channel);
    }
    parse_channel(&read(Path::new(spec))?)
}

/// `Ok(None)` when `spec` is not a built-in name.
pub fn builtin_channel(spec: &str) -> Result<Option<KrausChannel>, IoError> {
    let Some((name, arg)) = spec.split_once(':') else {
        return Ok(None);
    };
    let build: fn(usize) -> Result<KrausChannel, Error> = match name {
        "depol-ext" => depolarizing_extension,
        "erase-ext" => erasure_extension,
        "dephase" => |d| Ok(GioChannel::dephasing(d).into_channel()),
        _ => return Ok(None),
    };
    let d: usize = arg
        .parse()
        .map_err(|_| IoError::Parse(format!("bad dimension in channel name `{spec}`")))?;
    if d == 0 {
        return Err(IoError::Parse(format!("bad dimension in channel name `{spec}`")));
    }
    Ok(Some(build(d)?))
}

/// Writes finite floats as `d.ddddddddddddddddde±x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactFloatFormatter;

impl Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

/// Single-line JSON with 17 significant digits for every float.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, ExactFloatFormatter);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    to_json(&StateFile::from_matrix(rho.matrix()))
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    to_json(&ChannelFile::from_channel(ch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_gio;
    use crate::random::random_density;
    use proptest::prelude::*;

    #[test]
    fn state_round_trip() {
        let rho = random_density(3, 2, 1).unwrap();
        let back = parse_state(&state_to_json(&rho)).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn channel_round_trip() {
        let ch = random_gio(3, 2, 4).unwrap().into_channel();
        let back = parse_channel(&channel_to_json(&ch)).unwrap();
        assert_eq!(back, ch);
        let ch = depolarizing_extension(2).unwrap();
        assert_eq!(parse_channel(&channel_to_json(&ch)).unwrap(), ch);
    }

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(to_json(&[0.5f64]), "[5.0000000000000000e-1]");
        assert_eq!(to_json(&0.1f64), "1.0000000000000001e-1");
        assert_eq!(to_json(&f64::INFINITY), "null");
        assert_eq!(to_json(&3usize), "3");
    }

    #[test]
    fn parse_and_validation_errors_are_distinct() {
        assert!(matches!(parse_state("{"), Err(IoError::Parse(_))));
        assert!(matches!(parse_state(r#"{"dim": 2, "matrix": [[[1,0]]]}"#), Err(IoError::Parse(_))));
        assert!(matches!(
            parse_state(r#"{"dim": 1, "matrix": [[[1,0]]], "extra": 1}"#),
            Err(IoError::Parse(_))
        ));
        let bad_trace = r#"{"dim": 2, "matrix": [[[0.6,0],[0,0]],[[0,0],[0.5,0]]]}"#;
        assert!(matches!(
            parse_state(bad_trace),
            Err(IoError::Invalid(Error::TraceNotOne { .. }))
        ));
        let incomplete = r#"{"dim": 1, "kraus": [[[[0.5,0]]]]}"#;
        assert!(matches!(
            parse_channel(incomplete),
            Err(IoError::Invalid(Error::NotTracePreserving { .. }))
        ));
        assert!(matches!(parse_channel(r#"{"dim": 1, "kraus": []}"#), Err(IoError::Parse(_))));
    }

    #[test]
    fn builtin_names() {
        assert_eq!(builtin_channel("depol-ext:2").unwrap().unwrap().dim(), 4);
        assert_eq!(builtin_channel("erase-ext:3").unwrap().unwrap().dim(), 9);
        assert_eq!(builtin_channel("dephase:3").unwrap().unwrap().kraus_ops().len(), 3);
        assert!(builtin_channel("channel.json").unwrap().is_none());
        assert!(builtin_channel("depol-ext:x").is_err());
        assert!(builtin_channel("depol-ext:1").is_err());
        assert!(matches!(load_channel("/nonexistent/file.json"), Err(IoError::Read { .. })));
    }

    proptest! {
        #[test]
        fn arbitrary_floats_round_trip_bit_exactly(
            entries in proptest::collection::vec((any::<f64>(), any::<f64>()), 9)
        ) {
            let rows: MatrixRows = entries
                .chunks(3)
                .map(|c| c.iter().map(|&(re, im)| [re, im]).collect())
                .collect();
            prop_assume!(rows.iter().flatten().flatten().all(|x| x.is_finite()));
            let file = StateFile { dim: 3, matrix: rows };
            let back: StateFile = serde_json::from_str(&to_json(&file)).unwrap();
            for (a, b) in file.matrix.iter().flatten().zip(back.matrix.iter().flatten()) {
                prop_assert_eq!(a[0].to_bits(), b[0].to_bits());
                prop_assert_eq!(a[1].to_bits(), b[1].to_bits());
            }
        }
    }
}
