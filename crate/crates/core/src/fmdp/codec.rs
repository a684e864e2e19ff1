use crate::error::{Error, Result};

/// Mixed-radix codec over a list of factor sizes, least-significant factor first.
///
/// The value tuple `(v_0, .., v_{k-1})` maps to `v_0 + s_0 * (v_1 + s_1 * (..))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radix {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    cardinality: usize,
}

impl Radix {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        let mut strides = Vec::with_capacity(sizes.len());
        let mut card: u64 = 1;
        for &s in &sizes {
            if s == 0 {
                return Err(Error::Structure("factor sizes must be positive".into()));
            }
            strides.push(card as usize);
            card = card
                .checked_mul(s as u64)
                .ok_or_else(|| Error::Structure("factor product overflows 64 bits".into()))?;
        }
        Ok(Radix {
            sizes,
            strides,
            cardinality: card as usize,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Number of distinct tuples.
    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn encode(&self, values: &[usize]) -> Result<usize> {
        if values.len() != self.sizes.len() {
            return Err(Error::Structure(format!(
                "expected {} components, got {}",
                self.sizes.len(),
                values.len()
            )));
        }
        let mut index = 0;
        for ((&v, &s), &stride) in values.iter().zip(&self.sizes).zip(&self.strides) {
            if v >= s {
                return Err(Error::OutOfRange {
                    what: "factor value",
                    index: v,
                    size: s,
                });
            }
            index += v * stride;
        }
        Ok(index)
    }

    pub fn decode(&self, index: usize) -> Result<Vec<usize>> {
        let mut out = vec![0; self.sizes.len()];
        self.decode_into(index, &mut out)?;
        Ok(out)
    }

    pub fn decode_into(&self, mut index: usize, out: &mut [usize]) -> Result<()> {
        if index >= self.cardinality {
            return Err(Error::OutOfRange {
                what: "joint index",
                index,
                size: self.cardinality,
            });
        }
        for (slot, &s) in out.iter_mut().zip(&self.sizes) {
            *slot = index % s;
            index /= s;
        }
        Ok(())
    }
}
