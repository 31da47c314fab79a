//! Plain-text scenario configuration.
//!
//! Line-oriented `key = value` format with `#` comments. Dimensioned
//! quantities (lengths) must carry an explicit SI unit suffix so a config
//! file is auditable without consulting the code:
//!
//! ```text
//! w0 = 0.1 m
//! lambda = 600 nm
//! photons_per_source = 100
//! misalignment = fixed
//! delta_x = 1 cm
//! sweep ell log 1e3 1e7 200
//! ```
//!
//! Sweep bounds are bare numbers in the parameter's canonical unit
//! (meters for lengths). Later assignments override earlier ones. An
//! empty file yields the reference setup documented on
//! [`ScenarioConfig`](super::ScenarioConfig).

use std::fs;
use std::path::Path;

use super::{MisalignmentKind, ScenarioConfig, Spacing, SweepAxis, SweepParam};
use crate::error::{Error, Result};
use crate::mcsim::VacuumModel;

/// Decimal exponent of a length unit relative to meters.
fn length_unit_exponent(unit: &str) -> Option<i32> {
    Some(match unit {
        "m" => 0,
        "km" => 3,
        "cm" => -2,
        "mm" => -3,
        "um" | "µm" => -6,
        "nm" => -9,
        _ => return None,
    })
}

/// Fold a power-of-ten unit into the number text itself, so `600 nm`
/// parses as the correctly rounded `600e-9` rather than picking up a
/// rounding step from a float multiply.
fn shift_decimal(number: &str, exp: i32) -> String {
    if exp == 0 {
        return number.to_string();
    }
    match number.find(['e', 'E']) {
        Some(pos) => match number[pos + 1..].parse::<i32>() {
            Ok(old) => format!("{}e{}", &number[..pos], old + exp),
            // malformed exponent: leave it for parse_number to reject
            Err(_) => number.to_string(),
        },
        None => format!("{number}e{exp}"),
    }
}

fn parse_number(raw: &str, line: usize, key: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| {
        Error::parse(line, key, format!("expected a number, got `{raw}`"))
    })
}

/// A length value: `<number> <unit>`. The unit is mandatory.
fn parse_length(raw: &str, line: usize, key: &str) -> Result<f64> {
    let mut parts = raw.split_whitespace();
    let number = parts
        .next()
        .ok_or_else(|| Error::parse(line, key, "missing value".to_string()))?;
    let unit = parts.next().ok_or_else(|| {
        Error::parse(
            line,
            key,
            format!("length requires an explicit unit, e.g. `{key} = {number} m`"),
        )
    })?;
    if parts.next().is_some() {
        return Err(Error::parse(line, key, format!("trailing input after `{unit}`")));
    }
    let exp = length_unit_exponent(unit).ok_or_else(|| {
        Error::parse(
            line,
            key,
            format!("unknown length unit `{unit}` (use m, km, cm, mm, um, nm)"),
        )
    })?;
    let value: f64 = shift_decimal(number, exp)
        .parse()
        .map_err(|_| Error::parse(line, key, format!("expected a number, got `{number}`")))?;
    if !value.is_finite() {
        return Err(Error::parse(line, key, format!("non-finite value `{number}`")));
    }
    Ok(value)
}

/// A bare (dimensionless or radian) value: exactly one number token.
fn parse_bare(raw: &str, line: usize, key: &str) -> Result<f64> {
    let mut parts = raw.split_whitespace();
    let number = parts
        .next()
        .ok_or_else(|| Error::parse(line, key, "missing value".to_string()))?;
    if let Some(extra) = parts.next() {
        return Err(Error::parse(
            line,
            key,
            format!("`{key}` takes a bare number, got trailing `{extra}`"),
        ));
    }
    let value = parse_number(number, line, key)?;
    if !value.is_finite() {
        return Err(Error::parse(line, key, format!("non-finite value `{number}`")));
    }
    Ok(value)
}

fn check_positive(value: f64, line: usize, key: &str) -> Result<f64> {
    if value <= 0.0 {
        return Err(Error::parse(line, key, format!("must be > 0, got {value}")));
    }
    Ok(value)
}

fn check_non_negative(value: f64, line: usize, key: &str) -> Result<f64> {
    if value < 0.0 {
        return Err(Error::parse(line, key, format!("must be >= 0, got {value}")));
    }
    Ok(value)
}

fn parse_sweep(rest: &str, line: usize) -> Result<SweepAxis> {
    let parts: Vec<&str> = rest.split_whitespace().collect();
    if parts.len() != 5 {
        return Err(Error::parse(
            line,
            "sweep",
            format!(
                "expected `sweep <param> <lin|log> <min> <max> <points>`, got {} fields",
                parts.len() + 1
            ),
        ));
    }
    let param = SweepParam::parse(parts[0]).ok_or_else(|| {
        Error::parse(
            line,
            "sweep",
            format!(
                "`{}` is not sweepable (choose ell, n_plus, n_minus, eta, sigma_d, delta_x, r)",
                parts[0]
            ),
        )
    })?;
    let spacing = match parts[1] {
        "lin" => Spacing::Linear,
        "log" => Spacing::Log,
        other => {
            return Err(Error::parse(
                line,
                "sweep",
                format!("spacing must be `lin` or `log`, got `{other}`"),
            ))
        }
    };
    let min = parse_number(parts[2], line, "sweep")?;
    let max = parse_number(parts[3], line, "sweep")?;
    let points: usize = parts[4].parse().map_err(|_| {
        Error::parse(
            line,
            "sweep",
            format!("point count must be a positive integer, got `{}`", parts[4]),
        )
    })?;
    SweepAxis::new(param, spacing, min, max, points)
        .map_err(|e| Error::parse(line, "sweep", e.to_string()))
}

/// Parse configuration text. Line numbers in errors are 1-based.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }

        if let Some(rest) = content.strip_prefix("sweep ") {
            let axis = parse_sweep(rest, line)?;
            if cfg.axes.iter().any(|a| a.param == axis.param) {
                return Err(Error::parse(
                    line,
                    "sweep",
                    format!("axis `{}` declared more than once", axis.param.name()),
                ));
            }
            cfg.axes.push(axis);
            continue;
        }

        let (key, value) = match content.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => {
                return Err(Error::parse(
                    line,
                    content.split_whitespace().next().unwrap_or(""),
                    "expected `key = value` or a `sweep` line".to_string(),
                ))
            }
        };

        match key {
            "lambda" => {
                cfg.lambda = check_positive(parse_length(value, line, key)?, line, key)?
            }
            "w0" => cfg.w0 = check_positive(parse_length(value, line, key)?, line, key)?,
            "r" => cfg.r = check_positive(parse_length(value, line, key)?, line, key)?,
            "ell" => {
                let v = check_positive(parse_length(value, line, key)?, line, key)?;
                cfg.ell_plus = v;
                cfg.ell_minus = v;
            }
            "ell_plus" => {
                cfg.ell_plus = check_positive(parse_length(value, line, key)?, line, key)?
            }
            "ell_minus" => {
                cfg.ell_minus = check_positive(parse_length(value, line, key)?, line, key)?
            }
            "d" => cfg.d = check_non_negative(parse_length(value, line, key)?, line, key)?,
            "sigma_d" => {
                cfg.sigma_d = check_non_negative(parse_length(value, line, key)?, line, key)?
            }
            "delta_x" => {
                cfg.delta_x = check_non_negative(parse_length(value, line, key)?, line, key)?
            }
            "eta" => {
                let v = parse_bare(value, line, key)?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::parse(
                        line,
                        key,
                        format!("detection efficiency must lie in (0, 1], got {v}"),
                    ));
                }
                cfg.eta = v;
            }
            "n_lo" => cfg.n_lo = check_positive(parse_bare(value, line, key)?, line, key)?,
            "n_plus" => {
                cfg.n_plus = check_non_negative(parse_bare(value, line, key)?, line, key)?
            }
            "n_minus" => {
                cfg.n_minus = check_non_negative(parse_bare(value, line, key)?, line, key)?
            }
            "photons_per_source" => {
                let v = check_non_negative(parse_bare(value, line, key)?, line, key)?;
                cfg.n_plus = v;
                cfg.n_minus = v;
            }
            "phi_lo" => cfg.phi_lo = parse_bare(value, line, key)?,
            "phi_plus" => cfg.phi_plus = parse_bare(value, line, key)?,
            "phi_minus" => cfg.phi_minus = parse_bare(value, line, key)?,
            "theta_d" => cfg.theta_d = parse_bare(value, line, key)?,
            "misalignment" => {
                cfg.misalignment = match value {
                    "none" => MisalignmentKind::None,
                    "fluctuating" => MisalignmentKind::Fluctuating,
                    "fixed" => MisalignmentKind::Fixed,
                    other => {
                        return Err(Error::parse(
                            line,
                            key,
                            format!(
                                "expected none, fluctuating, or fixed, got `{other}`"
                            ),
                        ))
                    }
                }
            }
            "vacuum_model" => {
                cfg.vacuum = match value {
                    "lumped" => VacuumModel::Lumped,
                    "independent" => VacuumModel::Independent,
                    other => {
                        return Err(Error::parse(
                            line,
                            key,
                            format!("expected lumped or independent, got `{other}`"),
                        ))
                    }
                }
            }
            other => {
                return Err(Error::parse(
                    line,
                    other,
                    "unknown configuration key".to_string(),
                ))
            }
        }
    }
    Ok(cfg)
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}
