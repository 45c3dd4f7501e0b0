use std::io::{Read, Write};

use nmcap_core::Waveform;

use super::{FormatError, Result};

/// First eight bytes of a waveform dump.
pub const WAVEFORM_MAGIC: &[u8; 8] = b"NMCAPWAV";

/// Writes the 16-byte header (magic, sample rate as little-endian `f64`)
/// followed by the samples as little-endian `f64`.
pub fn write_waveform<W: Write>(w: &Waveform, mut out: W) -> Result<()> {
    out.write_all(WAVEFORM_MAGIC)?;
    out.write_all(&w.sample_rate_hz().to_le_bytes())?;
    let mut buf = Vec::with_capacity(w.len() * 8);
    for s in w.samples() {
        buf.extend_from_slice(&s.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_waveform<R: Read>(mut input: R) -> Result<Waveform> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..8] != WAVEFORM_MAGIC {
        return Err(FormatError::BadMagic);
    }
    let rate = f64::from_le_bytes(header[8..].try_into().expect("8 bytes"));
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() % 8 != 0 {
        return Err(FormatError::Syntax {
            line: 0,
            message: format!("trailing {} bytes after last sample", body.len() % 8),
        });
    }
    let samples = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Waveform::new(samples, rate)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_bit_exact() {
        let w = Waveform::new(vec![1.0, -0.5], 6e6).unwrap();
        let mut bytes = Vec::new();
        write_waveform(&w, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 16);
        assert_eq!(&bytes[..8], b"NMCAPWAV");
        assert_eq!(&bytes[8..16], &6e6f64.to_le_bytes());
        assert_eq!(&bytes[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &(-0.5f64).to_le_bytes());
        assert_eq!(read_waveform(&bytes[..]).unwrap(), w);
    }

    #[test]
    fn rejects_bad_input() {
        let mut bytes = b"NOTAWAVE".to_vec();
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(
            read_waveform(&bytes[..]),
            Err(FormatError::BadMagic)
        ));
        let mut bytes = WAVEFORM_MAGIC.to_vec();
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        bytes.extend_from_slice(&[0, 1, 2]);
        assert!(read_waveform(&bytes[..]).is_err());
        assert!(read_waveform(&b"NMCAP"[..]).is_err());
    }
}
