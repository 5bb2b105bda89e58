//! Complex numbers in scenario files: a bare number or an `[re, im]` pair.

use nullpass_core::C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CNum(pub C64);

impl CNum {
    pub fn real(re: f64) -> Self {
        Self(C64::new(re, 0.0))
    }
}

impl From<C64> for CNum {
    fn from(z: C64) -> Self {
        Self(z)
    }
}

impl From<CNum> for C64 {
    fn from(z: CNum) -> Self {
        z.0
    }
}

impl Serialize for CNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Real(f64),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for CNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Repr::deserialize(d) {
            Ok(Repr::Real(re)) => Ok(Self::real(re)),
            Ok(Repr::Pair([re, im])) => Ok(Self(C64::new(re, im))),
            Err(_) => Err(serde::de::Error::custom("expected a number or an [re, im] pair")),
        }
    }
}

pub fn vec_of(v: &[CNum]) -> Vec<C64> {
    v.iter().map(|z| z.0).collect()
}

pub fn from_slice<'a>(v: impl IntoIterator<Item = &'a C64>) -> Vec<CNum> {
    v.into_iter().map(|&z| CNum(z)).collect()
}
