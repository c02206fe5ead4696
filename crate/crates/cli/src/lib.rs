//! Command-line front end for `gridcross-core`: argument helpers, the
//! experiment harness and report emission.

pub mod error;
pub mod experiment;
pub mod report;

pub use error::{CliError, ErrorKind};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentKind};
pub use report::{emit_report, Format, Record};

/// Parses `"2..6"`, `"1,4,9"` or a mix such as `"0..3,10"`. Ranges are
/// inclusive.
pub fn parse_list(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("not a number: {t:?}"))
        };
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::parse_list;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("2..6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_list("0..=2,9").unwrap(), vec![0, 1, 2, 9]);
        assert_eq!(parse_list("7").unwrap(), vec![7]);
        assert!(parse_list("5..2").is_err());
        assert!(parse_list("").is_err());
        assert!(parse_list("a").is_err());
    }
}
