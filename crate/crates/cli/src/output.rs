//! JSON report envelope. Floats are written with 17 significant digits so
//! that reruns are byte-identical and values round-trip exactly.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, Default)]
pub struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize, D: Serialize> {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub config_echo: C,
    pub results: R,
    pub diagnostics: D,
}

pub fn to_bytes<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}
