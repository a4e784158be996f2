use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Layer, NetworkConfig, NetworkParams};
use crate::binio::{expect_eof, read_f64s_into, read_header, write_f64s, write_header};
use crate::error::{Error, Result};

const FORMAT: &str = "tomonet-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    config: NetworkConfig,
    epochs_trained: usize,
}

/// Writes the header line, then per layer `W`, `b`, `G_W`, `G_b` as
/// little-endian `f64` (matrices row-major).
pub fn write_checkpoint<W: Write>(params: &NetworkParams, w: &mut W) -> Result<()> {
    let header = Header {
        format: FORMAT.into(),
        version: CHECKPOINT_VERSION,
        config: params.config.clone(),
        epochs_trained: params.epochs_trained,
    };
    write_header(w, &header)?;
    for l in &params.layers {
        write_f64s(w, &l.w.iter().copied().collect::<Vec<_>>())?;
        write_f64s(w, l.b.as_slice().unwrap())?;
        write_f64s(w, &l.g_w.iter().copied().collect::<Vec<_>>())?;
        write_f64s(w, l.g_b.as_slice().unwrap())?;
    }
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(r: &mut R) -> Result<NetworkParams> {
    let header: Header = read_header(r)?;
    if header.format != FORMAT {
        return Err(Error::Format(format!("not a checkpoint: {}", header.format)));
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(Error::Version { found: header.version, expected: CHECKPOINT_VERSION });
    }
    header.config.validate()?;
    let mut layers = Vec::new();
    for io in header.config.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (io[0], io[1]);
        let mut w = Array2::zeros((fan_out, fan_in));
        let mut b = Array1::zeros(fan_out);
        let mut g_w = Array2::zeros((fan_out, fan_in));
        let mut g_b = Array1::zeros(fan_out);
        read_f64s_into(r, w.as_slice_mut().unwrap())?;
        read_f64s_into(r, b.as_slice_mut().unwrap())?;
        read_f64s_into(r, g_w.as_slice_mut().unwrap())?;
        read_f64s_into(r, g_b.as_slice_mut().unwrap())?;
        layers.push(Layer { w, b, g_w, g_b });
    }
    expect_eof(r)?;
    Ok(NetworkParams { config: header.config, layers, epochs_trained: header.epochs_trained })
}

pub fn save_checkpoint(params: &NetworkParams, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(params, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<NetworkParams> {
    read_checkpoint(&mut BufReader::new(File::open(path)?))
}
