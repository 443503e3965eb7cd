//! Physical link parameters, unit conversion, and derived simulation constants.
//!
//! All derived quantities live in a single internal unit system: watts,
//! seconds, kilometers. Dispersion is converted from ps²/km to s²/km and the
//! symbol time from ps to s, so that products like γPΔz and Δz·f(l) come out
//! dimensionless with no hidden factors. dB/km attenuation is converted to
//! linear 1/km with ln(10)/10.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw fiber/link constants in the units they are usually quoted in.
///
/// The JSON parameter file uses exactly these field names; the unit is part
/// of the name so a config cannot be silently misread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Link length Z in km.
    pub fiber_length_km: f64,
    /// Attenuation in dB/km.
    pub attenuation_db_per_km: f64,
    /// Group-velocity dispersion β₂ in ps²/km (negative for anomalous).
    pub dispersion_ps2_per_km: f64,
    /// Kerr coefficient γ in 1/(W·km).
    pub nonlinearity_per_w_km: f64,
    /// Symbol (sample) time Δt in ps.
    pub symbol_time_ps: f64,
    /// Photon energy hν in J.
    pub photon_energy_j: f64,
    /// Spontaneous emission factor n_sp (≥ 1).
    pub spontaneous_emission: f64,
    /// Receiver filter bandwidth B_n in Hz.
    pub filter_bandwidth_hz: f64,
}

impl Default for PhysicalParams {
    /// Standard single-mode 850 km link used throughout the tests.
    fn default() -> Self {
        PhysicalParams {
            fiber_length_km: 850.0,
            attenuation_db_per_km: 0.2,
            dispersion_ps2_per_km: -21.7,
            nonlinearity_per_w_km: 1.27,
            symbol_time_ps: 100.0,
            photon_energy_j: 1.3e-19,
            spontaneous_emission: 4.0,
            filter_bandwidth_hz: 200e9,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        fn finite_positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite and > 0"))
            }
        }
        fn finite_at_least(name: &'static str, v: f64, min: f64) -> Result<()> {
            if v.is_finite() && v >= min {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and >= {min}")))
            }
        }
        finite_positive("fiber_length_km", self.fiber_length_km)?;
        finite_positive("symbol_time_ps", self.symbol_time_ps)?;
        finite_at_least("nonlinearity_per_w_km", self.nonlinearity_per_w_km, 0.0)?;
        finite_positive("filter_bandwidth_hz", self.filter_bandwidth_hz)?;
        finite_at_least("spontaneous_emission", self.spontaneous_emission, 1.0)?;
        finite_at_least("attenuation_db_per_km", self.attenuation_db_per_km, 0.0)?;
        finite_positive("photon_energy_j", self.photon_energy_j)?;
        if !self.dispersion_ps2_per_km.is_finite() {
            return Err(Error::invalid("dispersion_ps2_per_km", "must be finite"));
        }
        Ok(())
    }

    /// Load from a flat JSON document with exactly the eight fields above.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Input(format!("{}: {e}", path.as_ref().display())))?;
        let params: PhysicalParams =
            serde_json::from_str(&text).map_err(|e| Error::Input(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    /// Attenuation converted to linear 1/km.
    pub fn attenuation_linear(&self) -> f64 {
        self.attenuation_db_per_km * std::f64::consts::LN_10 / 10.0
    }

    /// Accumulated amplifier noise power P_n = hν · Z · α · n_sp · B_n in W,
    /// with α in linear 1/km.
    pub fn noise_power(&self) -> f64 {
        self.photon_energy_j
            * self.fiber_length_km
            * self.attenuation_linear()
            * self.spontaneous_emission
            * self.filter_bandwidth_hz
    }

    /// Derive the normalized simulation parameters for a link split into
    /// `segments` pieces acting on blocks of `block_len` samples.
    pub fn build_channel(&self, segments: usize, block_len: usize) -> Result<ChannelParams> {
        self.validate()?;
        if segments < 1 {
            return Err(Error::invalid("segments", "must be >= 1"));
        }
        if block_len < 2 {
            return Err(Error::invalid("block_len", "must be >= 2"));
        }
        let noise_power = self.noise_power();
        Ok(ChannelParams {
            gamma: self.nonlinearity_per_w_km,
            beta2: self.dispersion_ps2_per_km * 1e-24,
            z_total: self.fiber_length_km,
            segments,
            dz: self.fiber_length_km / segments as f64,
            dt: self.symbol_time_ps * 1e-12,
            block_len,
            noise_power,
            segment_noise_var: noise_power / segments as f64,
        })
    }
}

/// Normalized simulation parameters in the internal unit system (W, s, km).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Kerr coefficient γ, 1/(W·km).
    pub gamma: f64,
    /// Dispersion β₂, s²/km.
    pub beta2: f64,
    /// Link length Z, km.
    pub z_total: f64,
    /// Number of segments K.
    pub segments: usize,
    /// Segment length Δz = Z/K, km.
    pub dz: f64,
    /// Sample time Δt, s.
    pub dt: f64,
    /// Samples per block L.
    pub block_len: usize,
    /// Total noise power P_n, W.
    pub noise_power: f64,
    /// Per-segment noise variance σ_n² = P_n/K, W.
    pub segment_noise_var: f64,
}

impl ChannelParams {
    /// Block duration T = L·Δt in s.
    pub fn block_duration(&self) -> f64 {
        self.block_len as f64 * self.dt
    }
}

/// Smallest segment count for which the closed-form chain of bounds that
/// needs `K > max(|β₂|Zπ²/(2√2 Δt²), √c1)` is proven. Callers must stay
/// strictly above the returned value.
pub fn k_validity_threshold(c: &ChannelParams, c1: f64) -> f64 {
    assert!(c1 >= 0.0, "c1 must be nonnegative");
    let pi = std::f64::consts::PI;
    let first = c.beta2.abs() * c.z_total * pi * pi / (2.0 * 2.0_f64.sqrt() * c.dt * c.dt);
    first.max(c1.sqrt())
}

/// dBm → W.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    1e-3 * 10f64.powf(p_dbm / 10.0)
}

/// W → dBm. Rejects non-positive power.
pub fn watts_to_dbm(p_watts: f64) -> Result<f64> {
    if !p_watts.is_finite() || p_watts <= 0.0 {
        return Err(Error::invalid("p_watts", "must be > 0 to express in dBm"));
    }
    Ok(10.0 * (p_watts / 1e-3).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_power_matches_reference_link() {
        let p = PhysicalParams::default();
        let pn = p.noise_power();
        // 4.1 µW quoted for this link; exact arithmetic gives 4.0710e-6 W.
        assert!((pn - 4.1e-6).abs() / 4.1e-6 < 0.02, "pn = {pn}");
        assert!((pn - 4.070970444413474e-6).abs() / pn < 1e-12);
    }

    #[test]
    fn noise_power_zero_attenuation() {
        let p = PhysicalParams {
            attenuation_db_per_km: 0.0,
            ..Default::default()
        };
        assert_eq!(p.noise_power(), 0.0);
    }

    #[test]
    fn noise_power_linear_in_bandwidth() {
        let p = PhysicalParams::default();
        let double = PhysicalParams {
            filter_bandwidth_hz: 2.0 * p.filter_bandwidth_hz,
            ..p.clone()
        };
        assert!((double.noise_power() - 2.0 * p.noise_power()).abs() / p.noise_power() < 1e-12);
    }

    #[test]
    fn build_channel_derived_fields() {
        let p = PhysicalParams::default();
        let c = p.build_channel(64, 2000).unwrap();
        assert!((c.dz - 13.28125).abs() < 1e-9); // 850/64
        assert!((c.dz - 13.3).abs() < 0.1);
        assert!((c.segment_noise_var * 64.0 - c.noise_power).abs() / c.noise_power < 1e-15);
        // dz·K reproduces Z to within one ulp
        assert!((c.dz * c.segments as f64 - c.z_total).abs() <= c.z_total * f64::EPSILON);
        assert!((c.block_duration() - 2e-7).abs() < 1e-20);
    }

    #[test]
    fn build_channel_sigma_division() {
        let p = PhysicalParams::default();
        let c = p.build_channel(64, 16).unwrap();
        let expect = p.noise_power() / 64.0;
        assert!((c.segment_noise_var - expect).abs() / expect < 1e-15);
        // spot value with the quoted 4.1 µW rounding
        let sigma: f64 = 4.1e-6 / 64.0;
        assert!((sigma - 6.40625e-8).abs() < 1e-15);
    }

    #[test]
    fn build_channel_single_segment() {
        let p = PhysicalParams::default();
        let c = p.build_channel(1, 4).unwrap();
        assert_eq!(c.dz, c.z_total);
    }

    #[test]
    fn build_channel_rejects_degenerate() {
        let p = PhysicalParams::default();
        assert!(p.build_channel(0, 16).is_err());
        assert!(p.build_channel(4, 1).is_err());
    }

    #[test]
    fn segment_count_rescaling_keeps_total_noise() {
        let p = PhysicalParams::default();
        let a = p.build_channel(64, 64).unwrap();
        let b = p.build_channel(256, 64).unwrap();
        assert_eq!(a.noise_power, b.noise_power);
        let ratio = a.segment_noise_var / b.segment_noise_var;
        assert!((ratio - 256.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn validity_threshold_reference_value() {
        let p = PhysicalParams::default();
        let c = p.build_channel(64, 2000).unwrap();
        let thr = k_validity_threshold(&c, 0.0);
        // |β₂|Zπ²/(2√2Δt²) with the reference link constants
        assert!((thr - 6.436257508116956).abs() < 1e-9, "thr = {thr}");
    }

    #[test]
    fn validity_threshold_zero_dispersion() {
        let p = PhysicalParams {
            dispersion_ps2_per_km: 0.0,
            ..Default::default()
        };
        let c = p.build_channel(8, 16).unwrap();
        assert_eq!(k_validity_threshold(&c, 0.0), 0.0);
    }

    #[test]
    fn validity_threshold_symbol_time_scaling() {
        let p = PhysicalParams::default();
        let c = p.build_channel(8, 16).unwrap();
        let slow = PhysicalParams {
            symbol_time_ps: 400.0,
            ..Default::default()
        }
        .build_channel(8, 16)
        .unwrap();
        let ratio = k_validity_threshold(&c, 0.0) / k_validity_threshold(&slow, 0.0);
        assert!((ratio - 16.0).abs() < 1e-9);
    }

    #[test]
    fn validity_threshold_takes_larger_term() {
        let p = PhysicalParams::default();
        let c = p.build_channel(8, 16).unwrap();
        assert_eq!(k_validity_threshold(&c, 1e6), 1000.0);
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
        assert!((dbm_to_watts(-3.0103) - 5.0e-4).abs() < 1e-8);
        for &dbm in &[-27.0, -3.5, 0.0, 12.25, 30.0] {
            let w = dbm_to_watts(dbm);
            let back = watts_to_dbm(w).unwrap();
            assert!((back - dbm).abs() < 1e-12 * dbm.abs().max(1.0));
        }
        assert!(watts_to_dbm(0.0).is_err());
        assert!(watts_to_dbm(-1.0).is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_field() {
        let p = PhysicalParams::default();
        let text = serde_json::to_string(&p).unwrap();
        let back: PhysicalParams = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
        let bad = r#"{"fiber_length_km":1.0,"bogus":2.0}"#;
        assert!(serde_json::from_str::<PhysicalParams>(bad).is_err());
    }

    #[test]
    fn validate_rejects_bad_fields() {
        let cases = [
            PhysicalParams { spontaneous_emission: 0.5, ..Default::default() },
            PhysicalParams { fiber_length_km: -1.0, ..Default::default() },
            PhysicalParams { nonlinearity_per_w_km: -0.1, ..Default::default() },
            PhysicalParams { fiber_length_km: f64::INFINITY, ..Default::default() },
            PhysicalParams { symbol_time_ps: f64::NAN, ..Default::default() },
        ];
        for p in cases {
            assert!(p.validate().is_err(), "{p:?} should be rejected");
        }
    }
}
