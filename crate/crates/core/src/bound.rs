//! Extended integers for truncation windows.
//!
//! Window edges are integers extended with `-inf`/`+inf`. An infinite edge
//! means the value is exact in that direction (the stored support is the
//! whole support), a finite edge is a genuine truncation boundary.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Integer extended with both infinities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ext {
    NegInf,
    Fin(i64),
    PosInf,
}

pub use Ext::{Fin, NegInf, PosInf};

impl Ext {
    pub fn is_finite(self) -> bool {
        matches!(self, Fin(_))
    }

    /// Finite value, panicking on infinities.
    pub fn finite(self) -> i64 {
        match self {
            Fin(v) => v,
            _ => panic!("expected finite bound, got {self}"),
        }
    }

    pub fn finite_or(self, default: i64) -> i64 {
        match self {
            Fin(v) => v,
            _ => default,
        }
    }

    pub fn min(self, other: Ext) -> Ext {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Ext) -> Ext {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Fin(a), Fin(b)) => a.cmp(b),
        }
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        match (self, rhs) {
            (Fin(a), Fin(b)) => Fin(a + b),
            (NegInf, PosInf) | (PosInf, NegInf) => {
                panic!("indeterminate bound arithmetic: -inf + inf")
            }
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
        }
    }
}

impl Add<i64> for Ext {
    type Output = Ext;
    fn add(self, rhs: i64) -> Ext {
        self + Fin(rhs)
    }
}

impl Sub<i64> for Ext {
    type Output = Ext;
    fn sub(self, rhs: i64) -> Ext {
        self + Fin(-rhs)
    }
}

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            Fin(v) => Fin(-v),
        }
    }
}

impl From<i64> for Ext {
    fn from(v: i64) -> Ext {
        Fin(v)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            PosInf => write!(f, "inf"),
            Fin(v) => write!(f, "{v}"),
        }
    }
}
