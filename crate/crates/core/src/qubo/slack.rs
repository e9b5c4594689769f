use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::num::Real;

/// Bits encoding one bounded integer slack in `[0, max]`.
///
/// Place values are `1, 2, 4, ...` with the top one clipped so that the
/// largest representable value is exactly `max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlackGroup {
    pub start: usize,
    pub place_values: Vec<u32>,
}

impl SlackGroup {
    pub fn new(start: usize, max: u32) -> Self {
        Self {
            start,
            place_values: bounded_place_values(max),
        }
    }

    pub fn len(&self) -> usize {
        self.place_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.place_values.is_empty()
    }

    pub fn max(&self) -> u32 {
        self.place_values.iter().sum()
    }

    /// `(variable index, place value)` for each bit.
    pub fn vars(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.place_values.iter().enumerate().map(move |(b, &p)| (self.start + b, p))
    }

    /// Bit pattern for `value`, lowest place first.
    pub fn encode(&self, value: u32) -> Result<Vec<bool>> {
        if value > self.max() {
            return Err(Error::InvalidInput(format!(
                "slack value {value} exceeds group maximum {}",
                self.max()
            )));
        }
        let mut bits = vec![false; self.len()];
        let Some((&top, lower)) = self.place_values.split_last() else {
            return Ok(bits);
        };
        let lower_max: u32 = lower.iter().sum();
        let mut rest = value;
        if rest > lower_max {
            bits[self.len() - 1] = true;
            rest -= top;
        }
        for (b, bit) in bits.iter_mut().enumerate().take(lower.len()) {
            *bit = (rest >> b) & 1 == 1;
        }
        Ok(bits)
    }

    pub fn decode(&self, bits: &[bool]) -> u32 {
        self.vars()
            .filter(|&(v, _)| bits[v])
            .map(|(_, p)| p)
            .sum()
    }
}

/// Place values `1, 2, ..., 2^(b-2), max - (2^(b-1) - 1)` with `b = ceil(log2(max + 1))`.
pub fn bounded_place_values(max: u32) -> Vec<u32> {
    if max == 0 {
        return Vec::new();
    }
    let bits = u32::BITS - max.leading_zeros();
    let mut out: Vec<u32> = (0..bits - 1).map(|b| 1 << b).collect();
    out.push(max - ((1u32 << (bits - 1)) - 1));
    out
}

/// Variable layout: the assignment block followed by per-rider load slacks
/// and per-rider capacity slacks, each contiguous.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarLayout {
    pub riders: usize,
    pub orders: usize,
    pub load_slack: Vec<SlackGroup>,
    pub capacity_slack: Vec<SlackGroup>,
    pub total_bits: usize,
}

impl VarLayout {
    pub fn new<T: Real>(inst: &Instance<T>) -> Self {
        let (m, n) = (inst.num_riders(), inst.num_orders());
        let mut next = m * n;
        let mut groups = |max: &dyn Fn(usize) -> u32| {
            (0..m)
                .map(|i| {
                    let g = SlackGroup::new(next, max(i));
                    next += g.len();
                    g
                })
                .collect::<Vec<_>>()
        };
        let load_slack = groups(&|_| inst.max_load);
        let capacity_slack = groups(&|i| inst.riders[i].capacity);
        Self {
            riders: m,
            orders: n,
            load_slack,
            capacity_slack,
            total_bits: next,
        }
    }

    /// Index of `x[i][j]`.
    #[inline]
    pub fn x(&self, i: usize, j: usize) -> usize {
        i * self.orders + j
    }

    pub fn assignment_bits(&self) -> usize {
        self.riders * self.orders
    }

    /// Qubits of order `j`'s one-hot register, one per rider.
    pub fn order_register(&self, j: usize) -> Vec<usize> {
        (0..self.riders).map(|i| self.x(i, j)).collect()
    }

    /// All slack variable indices.
    pub fn slack_vars(&self) -> std::ops::Range<usize> {
        self.assignment_bits()..self.total_bits
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let mut next = self.assignment_bits();
        for g in self.load_slack.iter().chain(&self.capacity_slack) {
            if g.start != next {
                return Err(Error::InvalidInput("slack groups are not contiguous".into()));
            }
            next += g.len();
        }
        if next != self.total_bits || self.load_slack.len() != self.riders || self.capacity_slack.len() != self.riders {
            return Err(Error::InvalidInput("layout does not add up".into()));
        }
        Ok(())
    }
}
