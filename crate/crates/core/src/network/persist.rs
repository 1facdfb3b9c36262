//! Little-endian model container.
//!
//! Layout: `b"CENC"`, `u32` version, `u32` width count, the widths as `u32`,
//! `u32` bottleneck index, one activation code byte per layer, one byte
//! flagging a stored standardizer. Then each layer's weights (row-major,
//! `fan_in x fan_out`) and bias as `f64`, and finally the standardizer's
//! mean and std vectors when the flag is set.

use std::fs;
use std::path::Path;

use super::{Activation, Layer, ModelParams, NetworkSpec};
use crate::dataset::Standardizer;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

const MAGIC: &[u8; 4] = b"CENC";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct SavedModel {
    pub spec: NetworkSpec,
    pub params: ModelParams,
    /// Input normalization fitted at training time, if any.
    pub standardizer: Option<Standardizer>,
}

pub fn encode_model(model: &SavedModel) -> Result<Vec<u8>> {
    let spec = &model.spec;
    model.params.check_shapes(spec)?;
    if let Some(st) = &model.standardizer {
        if st.mean.len() != spec.input_dim() || st.std.len() != spec.input_dim() {
            return Err(Error::contract("standardizer width does not match the input"));
        }
    }
    let mut out = Vec::with_capacity(64 + 8 * spec.parameter_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(spec.widths().len() as u32).to_le_bytes());
    for &w in spec.widths() {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    out.extend_from_slice(&(spec.bottleneck_index() as u32).to_le_bytes());
    out.extend(spec.activations().iter().map(|a| a.code()));
    out.push(u8::from(model.standardizer.is_some()));
    let mut put = |values: &[f64]| {
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    for layer in &model.params.layers {
        put(layer.weights.as_slice());
        put(&layer.bias);
    }
    if let Some(st) = &model.standardizer {
        put(&st.mean);
        put(&st.std);
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let chunk = self.bytes.get(self.pos..end).ok_or_else(|| Error::Truncated {
            path: self.path.to_path_buf(),
            expected: end,
            actual: self.bytes.len(),
        })?;
        self.pos = end;
        Ok(chunk)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode_model(bytes: &[u8], path: &Path) -> Result<SavedModel> {
    let mut r = Reader { bytes, pos: 0, path };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: u32::from_be_bytes(*MAGIC),
            found: u32::from_be_bytes(magic.try_into().unwrap()),
        });
    }
    let version = r.u32()?;
    if version != VERSION as usize {
        return Err(Error::Data(format!("{}: unsupported model version {version}", path.display())));
    }
    let n_widths = r.u32()?;
    if !(2..=1024).contains(&n_widths) {
        return Err(Error::Data(format!("{}: implausible layer count", path.display())));
    }
    let widths = (0..n_widths).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let bottleneck = r.u32()?;
    let activations = (0..n_widths - 1)
        .map(|_| {
            let code = r.u8()?;
            Activation::from_code(code)
                .ok_or_else(|| Error::Data(format!("{}: unknown activation code {code}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let has_std = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(Error::Data(format!("{}: bad standardizer flag {other}", path.display()))),
    };
    let spec = NetworkSpec::new(widths, activations, bottleneck)
        .map_err(|e| Error::Data(format!("{}: inconsistent architecture: {e}", path.display())))?;
    // Check the declared payload before allocating it.
    let mut floats = spec.parameter_count();
    if has_std {
        floats += 2 * spec.input_dim();
    }
    if bytes.len() - r.pos != 8 * floats {
        let expected = r.pos + 8 * floats;
        if bytes.len() < expected {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                expected,
                actual: bytes.len(),
            });
        }
        return Err(Error::Data(format!("{}: trailing bytes after the model", path.display())));
    }
    let mut layers = Vec::with_capacity(spec.n_layers());
    for w in spec.widths().windows(2) {
        let weights = Matrix::new(w[0], w[1], r.f64s(w[0] * w[1])?)?;
        let bias = r.f64s(w[1])?;
        layers.push(Layer {
            weights,
            bias,
            frozen: false,
        });
    }
    let standardizer = if has_std {
        let mean = r.f64s(spec.input_dim())?;
        let std = r.f64s(spec.input_dim())?;
        Some(Standardizer { mean, std })
    } else {
        None
    };
    Ok(SavedModel {
        spec,
        params: ModelParams { layers },
        standardizer,
    })
}

pub fn save_model(path: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_model(model)?;
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_model(&bytes, path)
}
