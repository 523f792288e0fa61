//! The Gauss map `T0(x) = 1/x - ⌊1/x⌋` and the Rényi map
//! `T1(x) = 1/(1-x) - ⌊1/(1-x)⌋`, their inverse branches, and the
//! derivative formulas for two-step compositions of inverse branches.
//!
//! Branch cells follow the half-open convention: Gauss digit `a` on
//! `(1/(a+1), 1/a]`, Rényi digit `a` on `[1 - 1/a, 1 - 1/(a+1))`. Digit
//! extraction decides cell membership exactly in floating point: the sign of
//! `a·x - b` for integers `a, b` is computed with a single fused
//! multiply-add, so points sitting next to a cell boundary are never
//! misassigned.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapKind {
    Gauss,
    Renyi,
}

impl MapKind {
    /// Map selected by the random bit: 0 is Gauss, 1 is Rényi.
    pub fn from_bit(bit: u8) -> MapKind {
        if bit == 0 {
            MapKind::Gauss
        } else {
            MapKind::Renyi
        }
    }

    /// Endpoint at which the inverse branches accumulate.
    pub fn accumulation_point(self) -> f64 {
        match self {
            MapKind::Gauss => 0.0,
            MapKind::Renyi => 1.0,
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Gauss => f.write_str("gauss"),
            MapKind::Renyi => f.write_str("renyi"),
        }
    }
}

/// Branch label `a ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BranchId(u64);

impl BranchId {
    pub fn new(a: u64) -> Result<Self> {
        if a == 0 {
            Err(Error::Domain("branch labels start at 1".into()))
        } else {
            Ok(BranchId(a))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// Sign of `a·x - b`, exact for integer `a, b < 2^53`.
#[inline]
fn sign_of_affine(a: f64, x: f64, b: f64) -> f64 {
    a.mul_add(x, -b)
}

/// Above this, consecutive digits are no longer distinct doubles and the
/// digit is returned as `⌊1/x⌋` (saturating) without boundary adjustment.
const EXACT_DIGIT_LIMIT: f64 = 4_503_599_627_370_496.0; // 2^52

/// Gauss digit of `x ∈ (0,1]`: the `a` with `1/(a+1) < x ≤ 1/a`.
pub fn gauss_digit(x: f64) -> u64 {
    debug_assert!(x > 0.0 && x <= 1.0);
    let r = 1.0 / x;
    if r >= EXACT_DIGIT_LIMIT {
        return r as u64;
    }
    let mut a = r.floor().max(1.0);
    // a·x ≤ 1
    while a > 1.0 && sign_of_affine(a, x, 1.0) > 0.0 {
        a -= 1.0;
    }
    // (a+1)·x > 1
    while sign_of_affine(a + 1.0, x, 1.0) <= 0.0 {
        a += 1.0;
    }
    a as u64
}

/// Rényi digit of `x ∈ [0,1)`: the `a` with `1 - 1/a ≤ x < 1 - 1/(a+1)`.
pub fn renyi_digit(x: f64) -> u64 {
    debug_assert!((0.0..1.0).contains(&x));
    let r = 1.0 / (1.0 - x);
    if r >= EXACT_DIGIT_LIMIT {
        return r as u64;
    }
    let mut a = r.floor().max(1.0);
    // a·x - (a-1) ≥ 0
    while a > 1.0 && sign_of_affine(a, x, a - 1.0) < 0.0 {
        a -= 1.0;
    }
    // (a+1)·x - a < 0
    while sign_of_affine(a + 1.0, x, a) >= 0.0 {
        a += 1.0;
    }
    a as u64
}

/// Image and digit of one forward step. The digit is `None` at the fixed-point
/// conventions `T0(0) = 0` and `T1(1) = 0`.
pub fn forward(kind: MapKind, x: f64) -> (f64, Option<BranchId>) {
    match kind {
        MapKind::Gauss => {
            if x <= 0.0 {
                return (0.0, None);
            }
            let a = gauss_digit(x);
            let af = a as f64;
            // 1/x - a = (1 - a x)/x
            let y = (-af).mul_add(x, 1.0) / x;
            (y.clamp(0.0, 1.0), Some(BranchId(a)))
        }
        MapKind::Renyi => {
            if x >= 1.0 {
                return (0.0, None);
            }
            let a = renyi_digit(x);
            let af = a as f64;
            // 1/(1-x) - a = (a x - (a-1))/(1-x)
            let y = af.mul_add(x, 1.0 - af) / (1.0 - x);
            (y.clamp(0.0, 1.0), Some(BranchId(a)))
        }
    }
}

/// `V_a(y)`: Gauss `1/(a+y)`, Rényi `1 - 1/(a+y)`.
pub fn inverse_branch(kind: MapKind, a: BranchId, y: f64) -> f64 {
    let w = 1.0 / (a.as_f64() + y);
    match kind {
        MapKind::Gauss => w,
        MapKind::Renyi => 1.0 - w,
    }
}

/// `|V_a'(y)| = 1/(a+y)²` for both maps.
pub fn branch_derivative(_kind: MapKind, a: BranchId, y: f64) -> f64 {
    let t = a.as_f64() + y;
    1.0 / (t * t)
}

/// Magnitude of the `order`-th derivative of the two-step inverse branch
/// `V^{p,q}_{(n,k)} = V^p_n ∘ V^q_k`, with `p, q ∈ {0, 1}` selecting Gauss (0)
/// or Rényi (1).
///
/// ```text
/// (0,0), (1,0):  i! n^{i-1}     / (n(k+x) + 1)^{i+1}
/// (1,1), (0,1):  i! (n+1)^{i-1} / ((n+1)(k+x) - 1)^{i+1}
/// ```
///
/// The mixed pairs differ from the pure ones only by sign.
pub fn two_step_derivative(p: u8, q: u8, n: BranchId, k: BranchId, x: f64, order: u32) -> Result<f64> {
    if p > 1 || q > 1 {
        return Err(Error::Domain(format!("map bits must be 0 or 1, got ({p},{q})")));
    }
    if order == 0 {
        return Err(Error::Domain("derivative order starts at 1".into()));
    }
    let i = order as i32;
    let factorial: f64 = (1..=order).map(f64::from).product();
    let kx = k.as_f64() + x;
    let value = if q == 0 {
        let nf = n.as_f64();
        factorial * nf.powi(i - 1) / (nf * kx + 1.0).powi(i + 1)
    } else {
        let m = n.as_f64() + 1.0;
        factorial * m.powi(i - 1) / (m * kx - 1.0).powi(i + 1)
    };
    Ok(value)
}
