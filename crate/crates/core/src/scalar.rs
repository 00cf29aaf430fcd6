//! Scalar abstraction shared by the generic parts of the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating scalar usable by the generic estimators (`f32`, `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + rustfft::FftNum
    + 'static
{
    /// Converts an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 value converts to every Real")
    }

    /// Converts an index or count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize value converts to every Real")
    }

    /// Lossy conversion back to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln k!` for `k = 0..=n`, accumulated by summation.
pub fn ln_factorials<T: Real>(n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    out.push(acc);
    for k in 1..=n {
        acc = acc + T::of_usize(k).ln();
        out.push(acc);
    }
    out
}

/// `floor(n^e)` for integer `n`, corrected against rounding in `powf`.
pub fn floor_pow(n: u64, e: f64) -> u64 {
    let x = n as f64;
    let mut k = x.powf(e).floor().max(0.0) as u64;
    while exact_le(k + 1, n, e) {
        k += 1;
    }
    while k > 0 && !exact_le(k, n, e) {
        k -= 1;
    }
    k
}

/// Decides `k <= n^e` in a way that is exact whenever `1/e` is an integer.
fn exact_le(k: u64, n: u64, e: f64) -> bool {
    let inv = 1.0 / e;
    if (inv - inv.round()).abs() < 1e-12 && inv.round() >= 1.0 {
        let p = inv.round() as u32;
        match (k as u128).checked_pow(p) {
            Some(v) => v <= n as u128,
            None => false,
        }
    } else {
        (k as f64) <= (n as f64).powf(e)
    }
}
