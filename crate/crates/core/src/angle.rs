//! Radian values that may be written as multiples of π in config files,
//! e.g. `"pi/2"`, `"-pi/4"`, `"3pi/4"`, `"0.25*pi"` or a plain number.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer};

pub fn parse(text: &str) -> Option<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let s = s.replace('π', "pi");
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
    };
    let (numer, denom) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let idx = numer.find("pi")?;
    let (coef, rest) = numer.split_at(idx);
    if rest != "pi" {
        return None;
    }
    let coef = coef.trim_end_matches('*');
    let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
    Some(sign * coef * PI / denom)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Number(f64),
    Text(String),
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
    match Raw::deserialize(deserializer)? {
        Raw::Number(v) => Ok(v),
        Raw::Text(s) => parse(&s).ok_or_else(|| serde::de::Error::custom(format!("cannot read angle {s:?}"))),
    }
}
