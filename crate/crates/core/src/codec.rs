//! Little-endian binary primitives for the `TWSF` model-file format.
//! All integers are little-endian, all floats are 64-bit, strings and
//! sections are length-prefixed. Encoding is canonical: the same value
//! always produces the same bytes.

use crate::data::ModelFileError;

pub fn put_u8(buf: &mut Vec<u8>, v: u8) {
    buf.push(v);
}

pub fn put_u16(buf: &mut Vec<u8>, v: u16) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub fn put_usize(buf: &mut Vec<u8>, v: usize) {
    put_u64(buf, v as u64);
}

pub fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub fn put_bool(buf: &mut Vec<u8>, v: bool) {
    buf.push(v as u8);
}

pub fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}

pub fn put_f64_slice(buf: &mut Vec<u8>, values: &[f64]) {
    put_usize(buf, values.len());
    for &v in values {
        put_f64(buf, v);
    }
}

/// Cursor over a byte slice; every read checks remaining length.
pub struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub fn is_at_end(&self) -> bool {
        self.pos == self.bytes.len()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        if self.pos + n > self.bytes.len() {
            return Err(ModelFileError::Truncated);
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    pub fn u8(&mut self) -> Result<u8, ModelFileError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, ModelFileError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, ModelFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, ModelFileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize, ModelFileError> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| ModelFileError::Malformed("length overflows usize".into()))
    }

    pub fn f64(&mut self) -> Result<f64, ModelFileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bool(&mut self) -> Result<bool, ModelFileError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(ModelFileError::Malformed(format!("invalid bool byte {other}"))),
        }
    }

    pub fn str(&mut self) -> Result<String, ModelFileError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| ModelFileError::Malformed("invalid utf-8 string".into()))
    }

    pub fn f64_vec(&mut self) -> Result<Vec<f64>, ModelFileError> {
        let len = self.usize()?;
        if len > self.bytes.len().saturating_sub(self.pos) / 8 {
            return Err(ModelFileError::Truncated);
        }
        (0..len).map(|_| self.f64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_primitives() {
        let mut buf = Vec::new();
        put_u16(&mut buf, 0xBEEF);
        put_bool(&mut buf, true);
        put_str(&mut buf, "héllo");
        put_f64_slice(&mut buf, &[1.5, -0.0, f64::MIN_POSITIVE]);
        let mut r = Reader::new(&buf);
        assert_eq!(r.u16().unwrap(), 0xBEEF);
        assert!(r.bool().unwrap());
        assert_eq!(r.str().unwrap(), "héllo");
        assert_eq!(r.f64_vec().unwrap(), vec![1.5, -0.0, f64::MIN_POSITIVE]);
        assert!(r.is_at_end());
    }

    #[test]
    fn truncated_reads_error() {
        let mut buf = Vec::new();
        put_str(&mut buf, "hello");
        buf.truncate(buf.len() - 1);
        let mut r = Reader::new(&buf);
        assert!(matches!(r.str(), Err(ModelFileError::Truncated)));
    }
}
