use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

/// Search limits. Every answer obtained from a truncated search is stamped
/// with the budget it was obtained under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Cylinder depth for pieces and for cylinder-level hypothesis checks.
    pub depth: usize,
    /// Maximal word length of semigroup elements on path spaces.
    pub len: usize,
    /// Multiplicity bound used by the exhaustive oracle.
    pub mult: u64,
    /// Largest `n` tried in `(n+1)F ≼ nF` searches.
    pub nmax: u64,
    /// Node limit of a single depth-first search.
    pub nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            depth: 2,
            len: 3,
            mult: 4,
            nmax: 8,
            nodes: 200_000,
        }
    }
}

pub const BUDGET_ENV: &str = "DYNCU_BUDGET";

impl Budget {
    /// The built-in defaults overridden by `DYNCU_BUDGET`, if set.
    pub fn from_env() -> Result<Budget, Error> {
        match std::env::var(BUDGET_ENV) {
            Ok(s) => Budget::default().with_overrides(&s),
            Err(_) => Ok(Budget::default()),
        }
    }

    /// Apply `key=value` overrides separated by commas.
    pub fn with_overrides(mut self, spec: &str) -> Result<Budget, Error> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::schema("budget", format!("expected key=value, got {part:?}")))?;
            let bad = || Error::schema(format!("budget.{k}"), format!("not a positive integer: {v:?}"));
            let n: u64 = v.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            match k.trim() {
                "depth" => self.depth = n as usize,
                "len" => self.len = n as usize,
                "mult" => self.mult = n,
                "nmax" => self.nmax = n,
                "nodes" => self.nodes = n as usize,
                other => return Err(Error::schema("budget", format!("unknown key {other:?}"))),
            }
        }
        Ok(self)
    }
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Budget::default().with_overrides(s)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "depth={},len={},mult={},nmax={},nodes={}",
            self.depth, self.len, self.mult, self.nmax, self.nodes
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides() {
        let b: Budget = "depth=3, len=4,nmax=2".parse().unwrap();
        assert_eq!((b.depth, b.len, b.mult, b.nmax), (3, 4, 4, 2));
        assert!("depth=0".parse::<Budget>().is_err());
        assert!("width=2".parse::<Budget>().is_err());
        assert_eq!(b.to_string().parse::<Budget>().unwrap(), b);
    }
}
