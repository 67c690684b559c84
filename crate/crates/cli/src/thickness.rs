//! Thickness arguments: decimal radians or rational multiples of π
//! (`pi`, `pi/8`, `3*pi/8`, `3pi/8`).

use std::f64::consts::PI;

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = s.to_ascii_lowercase();
    let Some(at) = lower.find("pi") else {
        return lower
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("cannot read '{text}' as radians or a fraction of pi"));
    };
    let bad = || format!("cannot read '{text}' as a fraction of pi (try pi/8 or 3*pi/8)");
    let head = lower[..at].trim_end_matches('*');
    let tail = &lower[at + 2..];
    let p: f64 = if head.is_empty() {
        1.0
    } else {
        head.parse::<u64>().map_err(|_| bad())? as f64
    };
    let q: f64 = match tail.strip_prefix('/') {
        Some(den) => den.parse::<u64>().map_err(|_| bad())? as f64,
        None if tail.is_empty() => 1.0,
        None => return Err(bad()),
    };
    if q == 0.0 {
        return Err(bad());
    }
    Ok(p * PI / q)
}

/// Thickness flag value inside the open interval `(0, π/2)`.
pub fn parse_thickness(text: &str) -> Result<f64, String> {
    let omega = parse_angle(text)?;
    if omega > 0.0 && omega < PI / 2.0 {
        Ok(omega)
    } else {
        Err(format!(
            "thickness {text} = {omega} lies outside the open interval (0, pi/2)"
        ))
    }
}
