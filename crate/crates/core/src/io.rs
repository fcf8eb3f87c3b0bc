//! JSON emission with every float written at 17 significant digits, so that
//! parsing the output back reproduces the exact bits.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

/// Wraps a formatter and overrides float output.
pub struct Precise<F>(pub F);

fn write_float<W: ?Sized + io::Write>(w: &mut W, v: f64) -> io::Result<()> {
    if v.is_finite() {
        write!(w, "{}", format_f64(v))
    } else {
        w.write_all(b"null")
    }
}

/// `{:.16e}` rendering used in every text output.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl<F: Formatter> Formatter for Precise<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_float(w, v)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_float(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn serialize_with<T: Serialize + ?Sized, F: Formatter>(value: &T, fmt: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(fmt));
    value
        .serialize(&mut ser)
        .expect("serializing plain data into memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn to_json_compact<T: Serialize + ?Sized>(value: &T) -> String {
    serialize_with(value, CompactFormatter)
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    serialize_with(value, PrettyFormatter::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(to_json_compact(&[f64::NAN, 1.0]), "[null,1.0000000000000000e0]");
    }

    #[test]
    fn pretty_layout_is_kept() {
        let s = to_json_pretty(&serde_json::json!({"a": [0.5]}));
        assert!(s.contains("\n  \"a\": [\n    5.0000000000000000e-1\n  ]"));
    }

    proptest! {
        #[test]
        fn floats_round_trip_bit_exactly(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let s = to_json_compact(&vec![v]);
            let back: Vec<f64> = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back[0].to_bits(), v.to_bits());
        }
    }
}
