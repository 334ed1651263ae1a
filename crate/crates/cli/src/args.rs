use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "widths", version, about = "Widths, best approximations and spline certificates for analytic convolution classes")]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Used when no subcommand is given, as for `widths widths`.
    #[command(flatten)]
    pub widths: GridArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Best approximation and width values with their validity flags.
    Widths(GridArgs),
    /// Validity thresholds and classical-range flags.
    Thresholds(ThresholdArgs),
    /// Check the midpoint sign condition of the fundamental spline at the maximizer.
    Verify(GridArgs),
    /// Coefficients and derivative values of a fundamental spline.
    Spline(SplineArgs),
    /// Widths and certification over a parameter grid, in parallel.
    Sweep(GridArgs),
    /// Run the consistency checks against the reference computations.
    Selfcheck(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Absolute series tolerance.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Value or `start:stop:step`.
    #[arg(long = "h", default_value = "1", allow_hyphen_values = true)]
    pub h: RealRange,

    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub beta: RealRange,

    #[arg(long = "n", default_value = "9")]
    pub n: IntRange,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long = "h", default_value = "1", allow_hyphen_values = true)]
    pub h: RealRange,

    /// Selects the integer or non-integer classical range.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub beta: RealRange,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SplineArgs {
    #[command(flatten)]
    pub grid: GridArgs,

    /// Grid shift in `[0, π/n)`; the maximizer `θπ/n` when absent.
    #[arg(long)]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Inclusive arithmetic progression of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealRange(pub Vec<f64>);

impl FromStr for RealRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                if !v.is_finite() {
                    return Err(format!("not finite: {v}"));
                }
                Ok(Self(vec![v]))
            }
            [a, b, c] => {
                let (a, b, c) = (num(a)?, num(b)?, num(c)?);
                if !(c > 0.0) || !a.is_finite() || !b.is_finite() || !c.is_finite() {
                    return Err("range step must be positive and bounds finite".into());
                }
                if b < a {
                    return Err(format!("empty range {a}:{b}:{c}"));
                }
                let count = ((b - a) / c + 1e-9).floor() as usize + 1;
                if count > 1_000_000 {
                    return Err(format!("range has {count} points"));
                }
                Ok(Self((0..count).map(|i| a + i as f64 * c).collect()))
            }
            _ => Err(format!("expected value or start:stop:step, got {s:?}")),
        }
    }
}

/// Inclusive arithmetic progression of positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntRange(pub Vec<u64>);

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("not a positive integer: {t:?}"));
        let out = match parts.as_slice() {
            [v] => vec![num(v)?],
            [a, b, c] => {
                let (a, b, c) = (num(a)?, num(b)?, num(c)?);
                if c == 0 {
                    return Err("range step must be positive".into());
                }
                if b < a {
                    return Err(format!("empty range {a}:{b}:{c}"));
                }
                if (b - a) / c >= 1_000_000 {
                    return Err("range too long".into());
                }
                (a..=b).step_by(c as usize).collect()
            }
            _ => return Err(format!("expected value or start:stop:step, got {s:?}")),
        };
        if out.contains(&0) {
            return Err("n must be at least 1".into());
        }
        Ok(Self(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_expand_inclusively() {
        assert_eq!("0.5:1:0.25".parse::<RealRange>().unwrap().0, vec![0.5, 0.75, 1.0]);
        assert_eq!("0:1:0.1".parse::<RealRange>().unwrap().0.len(), 11);
        assert_eq!("3:9:3".parse::<IntRange>().unwrap().0, vec![3, 6, 9]);
        assert_eq!("4".parse::<IntRange>().unwrap().0, vec![4]);
        assert!("2:1:1".parse::<IntRange>().is_err());
        assert!("0".parse::<IntRange>().is_err());
        assert!("1:2:0".parse::<RealRange>().is_err());
        assert!("a".parse::<RealRange>().is_err());
        assert_eq!("-1".parse::<RealRange>().unwrap().0, vec![-1.0]);
    }
}
