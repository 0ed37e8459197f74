use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, Context as _};
use clap::Args;
use num_bigint::BigInt;
use num_traits::{One, Pow};
use phs_core::model::{builtin_model, default_params, parse_model, physical_params, validate_model};
use phs_core::rational::parse_fraction;
use phs_core::{KinematicModel, Rational};

use crate::commands::CliError;

/// Where a model comes from: a builtin with parameter overrides, or a file.
#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// Builtin model name (see list-models).
    #[arg(long, visible_alias = "model", value_name = "NAME", required_unless_present = "file", conflicts_with = "file")]
    pub builtin: Option<String>,
    /// Parameter override K=V with V an integer, fraction, decimal or
    /// scientific literal, all read exactly. Repeatable.
    #[arg(long = "param", value_name = "K=V", requires = "builtin")]
    pub params: Vec<String>,
    /// Start from steel-like SI parameters instead of unit values.
    #[arg(long, requires = "builtin")]
    pub physical: bool,
    /// Model file in the text format.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
}

/// Exact value of `3`, `-7/2`, `0.3` or `2e11`.
pub fn parse_exact(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some(r) = parse_fraction(t) {
        return Some(r);
    }
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (int_part, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) || (int_part.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = match int_part {
        "" | "-" | "+" => format!("{int_part}0{frac}"),
        _ => format!("{int_part}{frac}"),
    };
    let n: BigInt = digits.parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let scale = if shift >= 0 {
        Pow::pow(&ten, shift as u32)
    } else {
        Rational::one() / Pow::pow(&ten, (-shift) as u32)
    };
    Some(Rational::from_integer(n) * scale)
}

impl SourceArgs {
    fn overrides(&self) -> Result<BTreeMap<String, Rational>, CliError> {
        let mut out = BTreeMap::new();
        for p in &self.params {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::invalid(anyhow!("expected K=V, got `{p}`")))?;
            let v = parse_exact(v).ok_or_else(|| CliError::invalid(anyhow!("`{}` is not an exact number", v.trim())))?;
            out.insert(k.trim().to_string(), v);
        }
        Ok(out)
    }

    /// Resolves and validates the model.
    pub fn load(&self) -> Result<KinematicModel, CliError> {
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(CliError::invalid)?;
            let m = parse_model(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(CliError::invalid)?;
            let report = validate_model(&m);
            if !report.passed() {
                return Err(CliError::invalid(anyhow!("model `{}` failed validation:\n{report}", m.name)));
            }
            return Ok(m);
        }
        let name = self.builtin.as_deref().expect("clap requires a source");
        let base = if self.physical { physical_params(name) } else { default_params(name) };
        let mut params = base.map_err(|e| CliError::invalid(e.into()))?;
        params.extend(self.overrides()?);
        builtin_model(name, &params).map_err(|e| CliError::invalid(e.into()))
    }
}
