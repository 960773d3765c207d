use std::fmt;
use std::io::Read;

use entangle_core::ket::{parse_amplitude_table_raw, parse_ket_expression_raw, RawState};
use entangle_core::{Limits, PureState, Tolerances};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Ket,
    Table,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Ket => "ket",
            Format::Table => "table",
        })
    }
}

/// A parsed input with its provenance.
pub struct Loaded {
    pub state: PureState,
    /// True when the input norm differed from 1 by more than `norm_eps` and
    /// the amplitudes were rescaled.
    pub normalized: bool,
}

pub fn read_source(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::usage(format!("cannot read stdin: {e}")))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))
    }
}

/// Table files open with a bare `dims:` line; ket expressions either carry
/// the header inline (`dims: 3 2; ...`) or start with a ket, a number, a
/// parenthesis, a sign or a function name.
pub fn detect_format(text: &str) -> Result<Format, Failure> {
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty());
    let Some(first) = first else {
        return Err(Failure::usage("input is empty".to_string()));
    };
    if let Some(rest) = first.strip_prefix("dims:") {
        return Ok(if rest.contains(';') {
            Format::Ket
        } else {
            Format::Table
        });
    }
    let c = first.chars().next().unwrap_or(' ');
    if c == '|' || c == '(' || c == '-' || c == '+' || c == '.' || c.is_ascii_digit() {
        return Ok(Format::Ket);
    }
    if first.starts_with("sqrt") || c == 'i' {
        return Ok(Format::Ket);
    }
    Err(Failure::usage(
        "cannot tell whether the input is a ket expression or an amplitude table; pass --format"
            .to_string(),
    ))
}

pub fn parse(
    text: &str,
    format: Option<Format>,
    limits: Limits,
    tol: &Tolerances,
    require_normalized: bool,
) -> Result<Loaded, Failure> {
    let format = match format {
        Some(f) => f,
        None => detect_format(text)?,
    };
    let raw: RawState = match format {
        Format::Ket => parse_ket_expression_raw(text, limits)?,
        Format::Table => parse_amplitude_table_raw(text, limits)?,
    };
    if require_normalized {
        let state = PureState::from_normalized(raw.shape, raw.amplitudes, tol)?;
        return Ok(Loaded {
            state,
            normalized: false,
        });
    }
    let (state, norm) = raw.normalize()?;
    Ok(Loaded {
        state,
        normalized: (norm - 1.0).abs() > tol.norm_eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection() {
        assert_eq!(detect_format("dims: 2 2\n0 0 1 0").unwrap(), Format::Table);
        assert_eq!(detect_format("# c\n\ndims: 2\n").unwrap(), Format::Table);
        assert_eq!(detect_format("dims: 3 2; |20>").unwrap(), Format::Ket);
        for ket in [
            "|0>",
            "(|00>+|11>)",
            "1/2*|0>",
            "-|1>",
            "sqrt(2)*|0>",
            "i*|1>",
        ] {
            assert_eq!(detect_format(ket).unwrap(), Format::Ket, "{ket}");
        }
        assert!(detect_format("hello").is_err());
        assert!(detect_format("  \n# only a comment\n").is_err());
    }
}
