//! Weight file format, all integers and floats little-endian:
//!
//! ```text
//! offset  size       field
//! 0       4          magic "QBRN"
//! 4       4          u32 format version (1)
//! 8       4 × 8      u32 δL, δC, τ, h1, h2, λV, λC, λG
//! 40      8 × 5      f64 global-state offsets
//! 80      8 × 5      f64 global-state divisors
//! 120     8 × k      f64 W_L, B_L, W_C, B_C, W1, b1, W2, b2, W3, b3, matrices row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{FeatureScaling, Hyper, NeuralError, PolicyParams, BLOCK_NAMES};
use crate::featurize::{CLAUSE_LABELS, GLOBAL_FEATURES, LITERAL_LABELS};

pub const MAGIC: [u8; 4] = *b"QBRN";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_params(p: &PolicyParams, mut out: impl Write) -> Result<(), NeuralError> {
    out.write_all(&MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let h = p.hyper;
    for x in [
        h.delta_l,
        h.delta_c,
        h.tau,
        h.h1,
        h.h2,
        LITERAL_LABELS,
        CLAUSE_LABELS,
        GLOBAL_FEATURES,
    ] {
        out.write_all(&(x as u32).to_le_bytes())?;
    }
    for x in p.scaling.offset.iter().chain(&p.scaling.divisor) {
        out.write_all(&x.to_le_bytes())?;
    }
    for (_, block) in p.blocks() {
        // Standard layout iteration is row-major.
        for x in block.iter() {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_params(p: &PolicyParams, path: impl AsRef<Path>) -> Result<(), NeuralError> {
    write_params(p, BufWriter::new(File::create(path)?))
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], NeuralError> {
        if self.bytes.len() < N {
            return Err(NeuralError::Truncated);
        }
        let (head, rest) = self.bytes.split_at(N);
        self.bytes = rest;
        Ok(head.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, NeuralError> {
        self.take::<4>().map(u32::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64, NeuralError> {
        self.take::<8>().map(f64::from_le_bytes)
    }
}

pub fn read_params(mut input: impl Read) -> Result<PolicyParams, NeuralError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes };
    let magic = cur.take::<4>().map_err(|_| NeuralError::Format {
        magic: [0; 4],
        version: 0,
    })?;
    let version = cur.u32().unwrap_or(0);
    if magic != MAGIC || version != FORMAT_VERSION {
        return Err(NeuralError::Format { magic, version });
    }
    let mut dims = [0usize; 8];
    for d in &mut dims {
        *d = cur.u32()? as usize;
    }
    let [delta_l, delta_c, tau, h1, h2, lv, lc, lg] = dims;
    if (lv, lc, lg) != (LITERAL_LABELS, CLAUSE_LABELS, GLOBAL_FEATURES) {
        return Err(NeuralError::Hyper(format!(
            "label widths {lv}/{lc}/{lg}, expected {LITERAL_LABELS}/{CLAUSE_LABELS}/{GLOBAL_FEATURES}"
        )));
    }
    let hyper = Hyper {
        delta_l,
        delta_c,
        tau,
        h1,
        h2,
    };
    hyper.validate()?;
    let mut scaling = FeatureScaling::default();
    for x in scaling.offset.iter_mut().chain(scaling.divisor.iter_mut()) {
        *x = cur.f64()?;
    }
    if !scaling.offset.iter().chain(&scaling.divisor).all(|x| x.is_finite()) {
        return Err(NeuralError::NonFinite("feature scaling"));
    }
    let mut p = PolicyParams::zeros(hyper);
    p.scaling = scaling;
    let expected: usize = p.num_params() * 8;
    if cur.bytes.len() < expected {
        return Err(NeuralError::Truncated);
    }
    for (i, (_, mut block)) in p.blocks_mut().enumerate() {
        for x in block.iter_mut() {
            *x = cur.f64()?;
            if !x.is_finite() {
                return Err(NeuralError::NonFinite(BLOCK_NAMES[i]));
            }
        }
    }
    if !cur.bytes.is_empty() {
        return Err(NeuralError::Trailing(cur.bytes.len()));
    }
    Ok(p)
}

pub fn load_params(path: impl AsRef<Path>) -> Result<PolicyParams, NeuralError> {
    read_params(BufReader::new(File::open(path)?))
}
