//! Binary checkpoint: for each network, the magic `EAE1`, a little-endian
//! `u32` count of layer widths, the widths as `u32`, then every parameter as
//! a little-endian `f64` in layer order (weights row-major, then bias).
//!
//! An autoencoder file holds the encoder record followed by the decoder
//! record. Activations are not stored; loading rebuilds the standard
//! encoder (leaky-ReLU hidden, linear output) and decoder (leaky-ReLU
//! hidden, sigmoid output).

use std::io::{Read, Write};
use std::path::Path;

use super::model::Autoencoder;
use super::net::{DenseNet, DenseNetSpec};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EAE1";

pub fn write_net<W: Write>(w: &mut W, net: &DenseNet) -> Result<()> {
    let widths = &net.spec().layer_widths;
    w.write_all(MAGIC)?;
    w.write_all(&(widths.len() as u32).to_le_bytes())?;
    for &width in widths {
        w.write_all(&(width as u32).to_le_bytes())?;
    }
    for &p in net.params() {
        w.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let out = self.bytes.get(self.pos..self.pos + n).ok_or(Error::Format {
            offset: self.pos,
            message: format!("truncated checkpoint: needed {n} more bytes"),
        })?;
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Reads one record; `make_spec` turns the stored widths into a spec.
fn read_record(
    cur: &mut Cursor<'_>,
    make_spec: fn(Vec<usize>) -> Result<DenseNetSpec>,
) -> Result<DenseNet> {
    let start = cur.pos;
    if cur.take(4)? != MAGIC {
        return Err(Error::Format {
            offset: start,
            message: "bad checkpoint magic, expected EAE1".into(),
        });
    }
    let count = cur.u32()? as usize;
    let widths = (0..count)
        .map(|_| cur.u32().map(|w| w as usize))
        .collect::<Result<Vec<_>>>()?;
    let spec = make_spec(widths)?;
    let params = (0..spec.parameter_count())
        .map(|_| {
            let b = cur.take(8)?;
            Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
        })
        .collect::<Result<Vec<_>>>()?;
    DenseNet::from_params(spec, params)
}

pub fn encode_autoencoder(model: &Autoencoder) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_net(&mut out, &model.encoder)?;
    write_net(&mut out, &model.decoder)?;
    Ok(out)
}

pub fn decode_autoencoder(bytes: &[u8]) -> Result<Autoencoder> {
    let mut cur = Cursor { bytes, pos: 0 };
    let encoder = read_record(&mut cur, DenseNetSpec::encoder)?;
    let decoder = read_record(&mut cur, DenseNetSpec::decoder)?;
    if cur.pos != bytes.len() {
        return Err(Error::Format {
            offset: cur.pos,
            message: "trailing bytes after decoder record".into(),
        });
    }
    Autoencoder::new(encoder, decoder)
}

pub fn save_autoencoder(path: &Path, model: &Autoencoder) -> Result<()> {
    std::fs::write(path, encode_autoencoder(model)?)?;
    Ok(())
}

pub fn load_autoencoder(path: &Path) -> Result<Autoencoder> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_autoencoder(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> Autoencoder {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let enc = DenseNet::init(DenseNetSpec::encoder(vec![5, 4, 2]).unwrap(), &mut rng).unwrap();
        let dec = DenseNet::init(DenseNetSpec::decoder(vec![2, 4, 5]).unwrap(), &mut rng).unwrap();
        Autoencoder::new(enc, dec).unwrap()
    }

    #[test]
    fn layout() {
        let bytes = encode_autoencoder(&model()).unwrap();
        assert_eq!(&bytes[..4], b"EAE1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 5);
        let enc_len = 4 + 4 + 12 + 8 * (5 * 4 + 4 + 4 * 2 + 2);
        assert_eq!(&bytes[enc_len..enc_len + 4], b"EAE1");
        let first = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
        assert_eq!(first, model().encoder.params()[0]);
    }

    #[test]
    fn round_trip() {
        let m = model();
        assert_eq!(decode_autoencoder(&encode_autoencoder(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn rejects_damage() {
        let mut bytes = encode_autoencoder(&model()).unwrap();
        assert!(decode_autoencoder(&bytes[..bytes.len() - 3]).is_err());
        bytes.push(0);
        assert!(decode_autoencoder(&bytes).is_err());
        bytes[0] = b'X';
        assert!(matches!(decode_autoencoder(&bytes), Err(Error::Format { offset: 0, .. })));
    }
}
