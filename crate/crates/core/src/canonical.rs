//! Canonical float formatting for reproducible files.
//!
//! Floats written to scene and report documents are rounded to nine
//! significant digits before serialization. Rounding is idempotent, so a
//! document that is loaded and saved again is byte-identical.

use serde::{Serialize, Serializer};

pub const SIGNIFICANT_DIGITS: usize = 9;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        // folds -0.0 into 0.0
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let y: f64 = s.parse().expect("formatted float parses");
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

pub fn f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    round_sig(*x).serialize(s)
}

pub fn array3<S: Serializer>(x: &[f64; 3], s: S) -> Result<S::Ok, S::Error> {
    x.map(round_sig).serialize(s)
}

pub fn array4<S: Serializer>(x: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
    x.map(round_sig).serialize(s)
}

pub fn array2<S: Serializer>(x: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
    x.map(round_sig).serialize(s)
}

pub fn vec<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
    x.iter().copied().map(round_sig).collect::<Vec<_>>().serialize(s)
}
