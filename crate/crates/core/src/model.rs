//! Physical-layer math shared by the allocators.
//!
//! The per-subcarrier bit error rate of M-QAM is approximated by
//!
//! ```text
//!   BER(P, b, C) = 0.2 · exp(−1.6 · P · C / (2^b − 1))
//! ```
//!
//! where `C = |H|² / (σ²_n + σ²_u)` is the channel-to-interference-plus-noise
//! ratio (CINR). The approximation is tight within about 1 dB for BER ≤ 1e-3.
//!
//! All powers are linear µW. dB conversion belongs to the reporting layer.

use crate::error::{Error, Result};

/// Prefactor of the exponential BER approximation.
pub const BER_PREFACTOR: f64 = 0.2;
/// Exponent coefficient of the exponential BER approximation.
pub const BER_EXPONENT: f64 = 1.6;
/// Targets above this value fall outside the range where the approximation is tight.
pub const BER_TIGHT_LIMIT: f64 = 1e-3;

/// Channel state of a single subcarrier.
///
/// An interference variance of `+inf` marks a jammed subcarrier: it yields a
/// CINR of exactly zero, so the subcarrier is always nulled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcarrierChannelState {
    /// |H_i|², dimensionless.
    pub gain_sq: f64,
    /// σ²_n in µW.
    pub noise_var: f64,
    /// σ²_u,i in µW, zero when the subcarrier is not affected.
    pub interf_var: f64,
}

impl SubcarrierChannelState {
    pub fn new(gain_sq: f64, noise_var: f64, interf_var: f64) -> Self {
        Self {
            gain_sq,
            noise_var,
            interf_var,
        }
    }
}

/// Channel-to-interference-plus-noise ratio of one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Cinr(f64);

impl Cinr {
    pub const ZERO: Cinr = Cinr(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidInput(format!(
                "CINR must be finite and non-negative, got {value}"
            )));
        }
        Ok(Cinr(value))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Per-subcarrier BER threshold, restricted to the open interval (0, 0.2).
///
/// At 0.2 and above `ln(5·t)` is non-negative and no power can meet the
/// target, so those values are rejected outright.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BerTarget(f64);

impl BerTarget {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value < BER_PREFACTOR) {
            return Err(Error::Domain(format!(
                "BER target must lie in (0, 0.2), got {value}"
            )));
        }
        if value > BER_TIGHT_LIMIT {
            log::warn!(
                "BER target {value:e} exceeds {BER_TIGHT_LIMIT:e}; the exponential \
                 BER approximation is loose in this range"
            );
        }
        Ok(BerTarget(value))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `−ln(5·t)`, strictly positive for every valid target.
    #[inline]
    pub fn neg_log_term(self) -> f64 {
        -(5.0 * self.0).ln()
    }
}

/// CINR of a subcarrier, `|H|² / (σ²_n + σ²_u)`.
pub fn cinr(state: SubcarrierChannelState) -> Result<Cinr> {
    let SubcarrierChannelState {
        gain_sq,
        noise_var,
        interf_var,
    } = state;
    if !gain_sq.is_finite() || !noise_var.is_finite() || interf_var.is_nan() {
        return Err(Error::InvalidInput(format!(
            "non-finite channel state: gain_sq={gain_sq}, noise_var={noise_var}, \
             interf_var={interf_var}"
        )));
    }
    if gain_sq < 0.0 || noise_var <= 0.0 || interf_var < 0.0 {
        return Err(Error::InvalidInput(format!(
            "channel state out of range: gain_sq={gain_sq}, noise_var={noise_var}, \
             interf_var={interf_var}"
        )));
    }
    if interf_var == f64::INFINITY {
        return Ok(Cinr::ZERO);
    }
    Cinr::new(gain_sq / (noise_var + interf_var))
}

/// Approximate M-QAM bit error rate at the given power, bit load and CINR.
///
/// `bits` is real-valued so that the continuous optimum can be evaluated
/// before rounding.
pub fn ber_mqam(power: f64, bits: f64, cinr: Cinr) -> Result<f64> {
    if !(bits.is_finite() && bits > 0.0) {
        return Err(Error::Domain(format!(
            "bits must be positive and finite, got {bits}"
        )));
    }
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "power must be finite and non-negative, got {power}"
        )));
    }
    Ok(ber_unchecked(power, bits, cinr.get()))
}

#[inline]
pub(crate) fn ber_unchecked(power: f64, bits: f64, cinr: f64) -> f64 {
    BER_PREFACTOR * (-BER_EXPONENT * power * cinr / (bits.exp2() - 1.0)).exp()
}

/// Power (µW) that makes an integer `bits` load meet `target` exactly.
///
/// Inverts the BER approximation:
/// `P = −(2^b − 1) · ln(5·t) / (1.6 · C)`.
pub fn power_for_target_ber(bits: u32, cinr: Cinr, target: BerTarget) -> Result<f64> {
    if bits < 2 {
        return Err(Error::InvalidInput(format!(
            "M-QAM needs at least 2 bits, got {bits}"
        )));
    }
    if cinr.get() == 0.0 {
        return Err(Error::Infeasible(
            "zero CINR: no finite power meets the BER target".into(),
        ));
    }
    Ok(power_unchecked(f64::from(bits), cinr.get(), target))
}

#[inline]
pub(crate) fn power_unchecked(bits: f64, cinr: f64, target: BerTarget) -> f64 {
    (bits.exp2() - 1.0) * target.neg_log_term() / (BER_EXPONENT * cinr)
}

/// Linear power ratio to dB. Zero maps to `-inf`.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// dB to linear power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
