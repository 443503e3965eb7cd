//! Bound-sweep driver: load link parameters, evaluate the requested bounds
//! over a (power, segment-count) grid, and render CSV.
//!
//! Per-point failures (a bound requested outside its validity region, an
//! estimator artifact, a non-finite value) flag the row and the sweep keeps
//! going; the caller maps flagged rows to exit code 2.

use std::collections::BTreeMap;

use ssfc::bounds::{self, BoundConstants};
use ssfc::mc::{self, MonteCarloConfig};
use ssfc::params::{dbm_to_watts, ChannelParams, PhysicalParams};

pub const CSV_HEADER: &str = "power_dbm,K,bound,value_bits,stderr_bits,n_outer,n_inner,seed";

/// The fixed bound enumeration used in CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    L1,
    L2,
    L3,
    L2Asym,
    L3Asym,
    AwgnUb,
    Lp,
}

impl BoundKind {
    pub fn parse(name: &str) -> Result<Self, String> {
        match name.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(BoundKind::L1),
            "l2" => Ok(BoundKind::L2),
            "l3" => Ok(BoundKind::L3),
            "l2-asym" | "l2_asym" => Ok(BoundKind::L2Asym),
            "l3-asym" | "l3_asym" => Ok(BoundKind::L3Asym),
            "awgn" => Ok(BoundKind::AwgnUb),
            "lp" => Ok(BoundKind::Lp),
            other => Err(format!(
                "unknown bound `{other}` (expected l1, l2, l3, l2-asym, l3-asym, awgn, lp)"
            )),
        }
    }

    pub fn csv_name(self) -> &'static str {
        match self {
            BoundKind::L1 => "L1",
            BoundKind::L2 => "L2",
            BoundKind::L3 => "L3",
            BoundKind::L2Asym => "L2_asym",
            BoundKind::L3Asym => "L3_asym",
            BoundKind::AwgnUb => "AWGN_UB",
            BoundKind::Lp => "LP",
        }
    }

    fn is_monte_carlo(self) -> bool {
        matches!(self, BoundKind::L1)
    }
}

pub fn parse_bounds(list: &str) -> Result<Vec<BoundKind>, String> {
    let bounds: Vec<BoundKind> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(BoundKind::parse)
        .collect::<Result<_, _>>()?;
    if bounds.is_empty() {
        return Err("no bounds requested".into());
    }
    Ok(bounds)
}

/// Parse a power grid in dBm: either a single value or "start:stop:step"
/// with step > 0, inclusive of both endpoints to within half a step.
pub fn parse_power_range(range: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = range.split(':').collect();
    let bad = |s: &str| format!("invalid power value `{s}`");
    match parts.as_slice() {
        [single] => {
            let v: f64 = single.trim().parse().map_err(|_| bad(single))?;
            if !v.is_finite() {
                return Err(bad(single));
            }
            Ok(vec![v])
        }
        [start, stop, step] => {
            let start: f64 = start.trim().parse().map_err(|_| bad(start))?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad(stop))?;
            let step: f64 = step.trim().parse().map_err(|_| bad(step))?;
            if !start.is_finite() || !stop.is_finite() || !step.is_finite() || step <= 0.0 {
                return Err("power range needs finite start/stop and step > 0".into());
            }
            let mut points = Vec::new();
            let mut i = 0usize;
            loop {
                let p = start + i as f64 * step;
                if p > stop + step / 2.0 {
                    break;
                }
                points.push(p);
                i += 1;
            }
            if points.is_empty() {
                return Err(format!("power range `{range}` is empty"));
            }
            Ok(points)
        }
        _ => Err(format!("power range `{range}` is not start:stop:step")),
    }
}

pub fn parse_segments(list: &str) -> Result<Vec<usize>, String> {
    let ks: Vec<usize> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| format!("invalid segment count `{s}`"))
        })
        .collect::<Result<_, _>>()?;
    if ks.is_empty() {
        return Err("no segment counts given".into());
    }
    Ok(ks)
}

/// Monte Carlo preset sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Profile {
    pub n_outer: usize,
    pub n_inner: usize,
    pub block_len: usize,
}

/// "desk" is a fast configuration for tests and exploration; "paper"
/// matches the full published run (200 input draws, 1000 noise draws,
/// blocks of 2000 samples).
pub fn profile(name: &str) -> Result<Profile, String> {
    match name.trim().to_ascii_lowercase().as_str() {
        "desk" => Ok(Profile {
            n_outer: 20,
            n_inner: 200,
            block_len: 256,
        }),
        "paper" => Ok(Profile {
            n_outer: 200,
            n_inner: 1000,
            block_len: 2000,
        }),
        other => Err(format!("unknown profile `{other}` (expected desk or paper)")),
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub params: PhysicalParams,
    pub bounds: Vec<BoundKind>,
    pub powers_dbm: Vec<f64>,
    pub segments: Vec<usize>,
    pub block_len: usize,
    pub n_outer: usize,
    pub n_inner: usize,
    pub seed: u64,
    pub bias_correction: bool,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub power_dbm: f64,
    pub segments: usize,
    pub bound: BoundKind,
    pub value_bits: f64,
    pub stderr_bits: f64,
    pub n_outer: usize,
    pub n_inner: usize,
    pub seed: u64,
    pub failure: Option<String>,
}

pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub failures: usize,
}

struct PointValue {
    value: f64,
    stderr: f64,
    failure: Option<String>,
}

impl PointValue {
    fn ok(value: f64, stderr: f64) -> Self {
        if value.is_finite() {
            PointValue {
                value,
                stderr,
                failure: None,
            }
        } else if value.is_infinite() {
            // the value is a legitimate sentinel (degenerate asymptote) but
            // the row is still flagged as non-finite
            PointValue {
                value,
                stderr: 0.0,
                failure: Some("value is not finite".into()),
            }
        } else {
            PointValue {
                value: f64::NAN,
                stderr: 0.0,
                failure: Some("value is not finite".into()),
            }
        }
    }

    fn fail(message: impl Into<String>) -> Self {
        PointValue {
            value: f64::NAN,
            stderr: 0.0,
            failure: Some(message.into()),
        }
    }
}

/// Evaluate every requested bound over the full (power, K) grid. Rows come
/// out in powers-outer, segments-middle, bounds-inner order, one row per
/// combination.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput, String> {
    cfg.params.validate().map_err(|e| e.to_string())?;
    if cfg.powers_dbm.is_empty() {
        return Err("power grid is empty".into());
    }
    if cfg.segments.is_empty() {
        return Err("segment grid is empty".into());
    }
    if cfg.bounds.is_empty() {
        return Err("no bounds requested".into());
    }
    let needs_mc = cfg.bounds.iter().any(|b| b.is_monte_carlo());
    if needs_mc && (cfg.n_outer < 2 || cfg.n_inner < 2) {
        return Err("Monte Carlo bounds need n_outer >= 2 and n_inner >= 2".into());
    }

    let pn = cfg.params.noise_power();
    let mut channels: BTreeMap<usize, ChannelParams> = BTreeMap::new();
    for &k in &cfg.segments {
        let c = cfg
            .params
            .build_channel(k, cfg.block_len)
            .map_err(|e| e.to_string())?;
        channels.insert(k, c);
    }

    // closed-form constants per K, built once and only if needed
    let needs_constants = cfg
        .bounds
        .iter()
        .any(|b| matches!(b, BoundKind::L2 | BoundKind::L3));
    let mut constants: BTreeMap<usize, Result<BoundConstants, String>> = BTreeMap::new();
    if needs_constants {
        for (&k, c) in &channels {
            constants.insert(k, BoundConstants::new(c).map_err(|e| e.to_string()));
        }
    }

    // Monte Carlo estimates per grid point, stream id fixed by grid position
    let mut l1: BTreeMap<(usize, usize), PointValue> = BTreeMap::new();
    if needs_mc {
        for (pi, &dbm) in cfg.powers_dbm.iter().enumerate() {
            for (ki, &k) in cfg.segments.iter().enumerate() {
                let c = &channels[&k];
                let mc_cfg = MonteCarloConfig {
                    n_outer: cfg.n_outer,
                    n_inner: cfg.n_inner,
                    seed: cfg.seed,
                    input_power: dbm_to_watts(dbm),
                    bias_correction: cfg.bias_correction,
                };
                let stream = (pi * cfg.segments.len() + ki) as u64;
                let point = mc::estimate_moments_with_stream(c, &mc_cfg, stream)
                    .and_then(|m| mc::lower_bound_l1_estimate(&m, c, mc_cfg.input_power));
                l1.insert(
                    (pi, ki),
                    match point {
                        Ok((v, s)) => PointValue::ok(v, s),
                        Err(e) => PointValue::fail(e.to_string()),
                    },
                );
            }
        }
    }

    let mut rows = Vec::with_capacity(cfg.powers_dbm.len() * cfg.segments.len() * cfg.bounds.len());
    let mut failures = 0usize;
    for (pi, &dbm) in cfg.powers_dbm.iter().enumerate() {
        let p = dbm_to_watts(dbm);
        for (ki, &k) in cfg.segments.iter().enumerate() {
            let c = &channels[&k];
            for &bound in &cfg.bounds {
                let point = match bound {
                    BoundKind::L1 => {
                        let pv = &l1[&(pi, ki)];
                        PointValue {
                            value: pv.value,
                            stderr: pv.stderr,
                            failure: pv.failure.clone(),
                        }
                    }
                    BoundKind::L2 => match &constants[&k] {
                        Ok(bc) => match bc.lower_bound_l2(p) {
                            Ok(v) => PointValue::ok(v, 0.0),
                            Err(e) => PointValue::fail(e.to_string()),
                        },
                        Err(e) => PointValue::fail(e.clone()),
                    },
                    BoundKind::L3 => match &constants[&k] {
                        Ok(bc) => match bc.lower_bound_l3(p) {
                            Ok(v) => PointValue::ok(v, 0.0),
                            Err(e) => PointValue::fail(e.to_string()),
                        },
                        Err(e) => PointValue::fail(e.clone()),
                    },
                    BoundKind::L2Asym => PointValue::ok(bounds::asymptote_l2(c), 0.0),
                    BoundKind::L3Asym => match bounds::asymptote_l3(c) {
                        Ok(v) => PointValue::ok(v, 0.0),
                        Err(e) => PointValue::fail(e.to_string()),
                    },
                    BoundKind::AwgnUb => match bounds::awgn_upper(p, pn) {
                        Ok(v) => PointValue::ok(v, 0.0),
                        Err(e) => PointValue::fail(e.to_string()),
                    },
                    BoundKind::Lp => match bounds::low_power_approx(p, pn) {
                        Ok(v) => PointValue::ok(v, 0.0),
                        Err(e) => PointValue::fail(e.to_string()),
                    },
                };
                if point.failure.is_some() {
                    failures += 1;
                }
                let is_mc = bound.is_monte_carlo();
                rows.push(Row {
                    power_dbm: dbm,
                    segments: k,
                    bound,
                    value_bits: point.value,
                    stderr_bits: point.stderr,
                    n_outer: if is_mc { cfg.n_outer } else { 0 },
                    n_inner: if is_mc { cfg.n_inner } else { 0 },
                    seed: cfg.seed,
                    failure: point.failure,
                });
            }
        }
    }
    Ok(SweepOutput { rows, failures })
}

fn fmt_bits(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.12e}")
    }
}

pub fn render_csv(out: &SweepOutput) -> String {
    let mut text = String::with_capacity(64 * (out.rows.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for row in &out.rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.power_dbm,
            row.segments,
            row.bound.csv_name(),
            fmt_bits(row.value_bits),
            fmt_bits(row.stderr_bits),
            row.n_outer,
            row.n_inner,
            row.seed
        ));
    }
    text
}
