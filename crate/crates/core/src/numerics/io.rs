//! FKMX binary container and CSV text form for [`Matrix`].
//!
//! FKMX layout: the four bytes `FKMX`, `u32` rows, `u32` cols (little
//! endian), then `rows × cols` little-endian `f64` values in row-major order.

use std::io::{Read, Write};

use super::{Matrix, NumericsError};

pub const FKMX_MAGIC: &[u8; 4] = b"FKMX";

pub fn write_fkmx<W: Write>(m: &Matrix, mut w: W) -> Result<(), NumericsError> {
    let rows = u32::try_from(m.rows()).map_err(|_| NumericsError::Format("too many rows for FKMX".into()))?;
    let cols = u32::try_from(m.cols()).map_err(|_| NumericsError::Format("too many columns for FKMX".into()))?;
    let mut buf = Vec::with_capacity(12 + 8 * m.data().len());
    buf.extend_from_slice(FKMX_MAGIC);
    buf.extend_from_slice(&rows.to_le_bytes());
    buf.extend_from_slice(&cols.to_le_bytes());
    for v in m.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_fkmx<R: Read>(mut r: R) -> Result<Matrix, NumericsError> {
    let mut header = [0u8; 12];
    r.read_exact(&mut header)
        .map_err(|_| NumericsError::Format("truncated FKMX header".into()))?;
    if &header[..4] != FKMX_MAGIC {
        return Err(NumericsError::Format(format!("bad magic {:?}", &header[..4])));
    }
    let rows = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != rows * cols * 8 {
        return Err(NumericsError::Format(format!(
            "payload has {} bytes, expected {} for {rows}x{cols}",
            payload.len(),
            rows * cols * 8
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Matrix::new(rows, cols, data)
}

/// Comma-separated rows, values in shortest round-trip form.
pub fn to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn from_csv(text: &str) -> Result<Matrix, NumericsError> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| NumericsError::Format(format!("line {}: {e}", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_fkmx(&m, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"FKMX");
        assert_eq!(&buf[4..12], &[1, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(&buf[12..20], &1.0f64.to_le_bytes());
        assert_eq!(buf.len(), 12 + 24);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let mut buf = Vec::new();
        write_fkmx(&Matrix::identity(2), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_fkmx(&bad[..]), Err(NumericsError::Format(_))));
        assert!(read_fkmx(&buf[..buf.len() - 1]).is_err());
        assert!(read_fkmx(&buf[..5]).is_err());
    }

    proptest! {
        #[test]
        fn fkmx_and_csv_round_trip(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
            let data: Vec<f64> = (0..rows * cols)
                .map(|i| ((seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 11) as f64) * 1e-9 - 4.0)
                .collect();
            let m = Matrix::new(rows, cols, data).unwrap();
            let mut buf = Vec::new();
            write_fkmx(&m, &mut buf).unwrap();
            prop_assert_eq!(read_fkmx(&buf[..]).unwrap(), m.clone());
            prop_assert_eq!(from_csv(&to_csv(&m)).unwrap(), m);
        }
    }
}
