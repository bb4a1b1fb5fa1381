//! Std companion of `riscc-core`: JSON scenario files, parallel Monte Carlo sweeps,
//! CSV/JSON result files and the pieces of the `riscc` command line.

pub mod experiments;
pub mod output;
pub mod scenario_file;
pub mod validate;

/// Environment variable that overrides the scenario file's seed; `--seed` overrides both.
pub const SEED_ENV: &str = "RISCC_SEED";

/// Seed precedence: command-line flag, then environment, then the scenario file.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, file: u64) -> anyhow::Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v.trim().parse().map_err(|_| anyhow::anyhow!("{SEED_ENV}={v:?} is not a 64-bit unsigned integer")),
        None => Ok(file),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(3), Some("5"), 7).unwrap(), 3);
        assert_eq!(resolve_seed(None, Some("5"), 7).unwrap(), 5);
        assert_eq!(resolve_seed(None, None, 7).unwrap(), 7);
        assert!(resolve_seed(None, Some("x"), 7).is_err());
    }
}
