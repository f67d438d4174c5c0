use std::fmt;

use num_bigint::BigUint;

/// A spacer count that may depend on the current column height `h` and on the
/// accumulator `A` (the running total of last-column spacers that a
/// normalized presentation has pushed into later stages).
///
/// The value at a stage is `height * h + acc * A + constant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SpacerExpr {
    pub height: u64,
    pub acc: u64,
    pub constant: u64,
}

impl SpacerExpr {
    pub const ZERO: SpacerExpr = SpacerExpr { height: 0, acc: 0, constant: 0 };

    pub const fn constant(value: u64) -> Self {
        SpacerExpr { height: 0, acc: 0, constant: value }
    }

    pub const fn new(height: u64, acc: u64, constant: u64) -> Self {
        SpacerExpr { height, acc, constant }
    }

    pub fn eval(&self, h: &BigUint, acc: &BigUint) -> BigUint {
        let mut v = BigUint::from(self.constant);
        if self.height != 0 {
            v += h * self.height;
        }
        if self.acc != 0 {
            v += acc * self.acc;
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// Does the value stay fixed as `h` grows?
    pub fn is_height_free(&self) -> bool {
        self.height == 0
    }
}

impl fmt::Display for SpacerExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::with_capacity(3);
        match self.height {
            0 => {}
            1 => parts.push("h".into()),
            k => parts.push(format!("{k}h")),
        }
        match self.acc {
            0 => {}
            1 => parts.push("A".into()),
            k => parts.push(format!("{k}A")),
        }
        if self.constant != 0 || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        f.write_str(&parts.join("+"))
    }
}
