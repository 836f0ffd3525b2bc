//! `--config` files: flat `key = value` lines using the flag names.
//!
//! Blank lines and lines starting with `#` are ignored. Underscores in keys
//! are accepted in place of dashes. Values from the file are injected ahead
//! of the command line so explicit flags win.

use std::path::Path;

use super::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value, got `{line}`", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("config line {}: invalid key `{key}`", lineno + 1)));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

/// `--key value` arguments for the pairs.
pub fn as_args(pairs: &[(String, String)]) -> Vec<String> {
    pairs
        .iter()
        .flat_map(|(k, v)| [format!("--{k}"), v.clone()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let pairs = parse("# sweep\nfamily = pareto\n\ngrid_min=0.5\n--n = 4\n").unwrap();
        assert_eq!(
            pairs,
            vec![
                ("family".into(), "pareto".into()),
                ("grid-min".into(), "0.5".into()),
                ("n".into(), "4".into())
            ]
        );
        assert_eq!(as_args(&pairs[..1]), vec!["--family", "pareto"]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("family pareto").is_err());
        assert!(parse("config = x").is_err());
        assert!(parse(" = 3").is_err());
    }
}
