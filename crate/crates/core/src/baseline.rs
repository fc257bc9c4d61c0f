//! Greedy bit loading with uniform power, used as the comparison scheme.
//!
//! Every subcarrier transmits at the same power. Loading starts with all
//! subcarriers at the top level and repeatedly steps down the subcarrier with
//! the worst BER until the mean BER meets its target. Each step is a linear
//! scan, so the worst case is quadratic in the number of subcarriers.

use crate::allocator::Allocation;
use crate::error::{Error, Result};
use crate::model::{ber_unchecked, BerTarget, Cinr};

/// Default top constellation of the baseline, in bits.
pub const DEFAULT_MAX_BITS: u32 = 12;

/// Admissible bit loads: `0` plus an ascending set of values `≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitLevelSet {
    levels: Vec<u32>,
}

impl BitLevelSet {
    /// `{0, 2, 3, …, b_max}`.
    pub fn up_to(b_max: u32) -> Result<Self> {
        if b_max < 2 {
            return Err(Error::InvalidInput(format!(
                "top bit level must be at least 2, got {b_max}"
            )));
        }
        Ok(Self {
            levels: std::iter::once(0).chain(2..=b_max).collect(),
        })
    }

    pub fn new(mut levels: Vec<u32>) -> Result<Self> {
        levels.sort_unstable();
        levels.dedup();
        if levels.first() != Some(&0) {
            return Err(Error::InvalidInput("bit levels must include 0".into()));
        }
        if levels.contains(&1) {
            return Err(Error::InvalidInput(
                "bit levels cannot include 1 (M-QAM needs at least 2 bits)".into(),
            ));
        }
        if levels.len() < 2 {
            return Err(Error::InvalidInput(
                "bit levels need at least one non-zero value".into(),
            ));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn b_max(&self) -> u32 {
        *self.levels.last().expect("non-empty")
    }

    fn top_index(&self) -> usize {
        self.levels.len() - 1
    }
}

impl Default for BitLevelSet {
    fn default() -> Self {
        Self::up_to(DEFAULT_MAX_BITS).expect("default level set is valid")
    }
}

/// How per-subcarrier BERs are combined into the mean constrained by the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanBer {
    /// Errored bits over transmitted bits.
    #[default]
    Weighted,
    /// Plain average over loaded subcarriers.
    Unweighted,
}

/// Equal split of a total power budget over all subcarriers.
pub fn uniform_power(avg_total_power: f64, n_subcarriers: usize) -> f64 {
    assert!(n_subcarriers > 0, "no subcarriers to share power over");
    avg_total_power / n_subcarriers as f64
}

/// Throughput-weighted mean BER at a uniform power; zero when nothing is loaded.
pub fn weighted_mean_ber(bits: &[u32], power: f64, cinrs: &[Cinr]) -> f64 {
    mean_ber(MeanBer::Weighted, bits, power, cinrs)
}

/// Mean BER of a loading under the chosen averaging rule.
pub fn mean_ber(kind: MeanBer, bits: &[u32], power: f64, cinrs: &[Cinr]) -> f64 {
    assert_eq!(bits.len(), cinrs.len(), "bits and CINRs differ in length");
    let (num, den) =
        bits.iter()
            .zip(cinrs)
            .filter(|(&b, _)| b > 0)
            .fold((0.0, 0.0), |(num, den), (&b, c)| {
                let ber = ber_unchecked(power, f64::from(b), c.get());
                match kind {
                    MeanBer::Weighted => (num + f64::from(b) * ber, den + f64::from(b)),
                    MeanBer::Unweighted => (num + ber, den + 1.0),
                }
            });
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Greedy decremental loader.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GreedyBaseline {
    pub levels: BitLevelSet,
    pub mean: MeanBer,
}

impl GreedyBaseline {
    pub fn new(levels: BitLevelSet, mean: MeanBer) -> Self {
        Self { levels, mean }
    }

    /// Loads `cinrs` at uniform `power` so the mean BER is at most `target`.
    pub fn allocate(&self, cinrs: &[Cinr], power: f64, target: BerTarget) -> Allocation {
        assert!(
            power >= 0.0 && power.is_finite(),
            "power must be finite and non-negative"
        );
        let n = cinrs.len();
        let levels = self.levels.levels();
        let mut level_idx = vec![self.levels.top_index(); n];
        let weight_of = |bits: u32| match self.mean {
            MeanBer::Weighted => f64::from(bits),
            MeanBer::Unweighted => {
                if bits > 0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        let top = self.levels.b_max();
        let mut ber: Vec<f64> = cinrs
            .iter()
            .map(|c| ber_unchecked(power, f64::from(top), c.get()))
            .collect();
        let mut num: f64 = ber.iter().map(|&e| weight_of(top) * e).sum();
        let mut den = weight_of(top) * n as f64;
        let limit = target.get();

        loop {
            if den == 0.0 || num / den <= limit {
                // running sums drift; confirm against a fresh evaluation before stopping
                let bits: Vec<u32> = level_idx.iter().map(|&k| levels[k]).collect();
                if mean_ber(self.mean, &bits, power, cinrs) <= limit {
                    break;
                }
                (num, den) = self.sums(&bits, &ber);
            }
            let Some(worst) = argmax_loaded(&level_idx, &ber) else {
                break;
            };
            let old_bits = levels[level_idx[worst]];
            num -= weight_of(old_bits) * ber[worst];
            den -= weight_of(old_bits);
            level_idx[worst] -= 1;
            let new_bits = levels[level_idx[worst]];
            ber[worst] = if new_bits > 0 {
                ber_unchecked(power, f64::from(new_bits), cinrs[worst].get())
            } else {
                0.0
            };
            num += weight_of(new_bits) * ber[worst];
            den += weight_of(new_bits);
        }

        let bits: Vec<u32> = level_idx.iter().map(|&k| levels[k]).collect();
        let power_vec = bits
            .iter()
            .map(|&b| if b > 0 { power } else { 0.0 })
            .collect();
        let ber = bits
            .iter()
            .zip(&ber)
            .map(|(&b, &e)| if b > 0 { e } else { 0.0 })
            .collect();
        Allocation::from_parts(bits, power_vec, ber)
    }

    fn sums(&self, bits: &[u32], ber: &[f64]) -> (f64, f64) {
        bits.iter()
            .zip(ber)
            .filter(|(&b, _)| b > 0)
            .fold((0.0, 0.0), |(num, den), (&b, &e)| match self.mean {
                MeanBer::Weighted => (num + f64::from(b) * e, den + f64::from(b)),
                MeanBer::Unweighted => (num + e, den + 1.0),
            })
    }
}

/// Loaded subcarrier with the largest BER, lowest index on ties.
fn argmax_loaded(level_idx: &[usize], ber: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (&k, &e)) in level_idx.iter().zip(ber).enumerate() {
        if k == 0 {
            continue;
        }
        match best {
            Some(j) if ber[j] >= e => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Greedy allocation with the throughput-weighted mean.
pub fn greedy_allocate(
    cinrs: &[Cinr],
    power: f64,
    target: BerTarget,
    levels: &BitLevelSet,
) -> Allocation {
    GreedyBaseline::new(levels.clone(), MeanBer::Weighted).allocate(cinrs, power, target)
}
