//! Resource limits for graph construction and model enumeration.

/// Hard bounds applied while expanding configuration graphs, reachable state
/// sets, and initial-model enumerations. Exceeding a bound is reported as a
/// capacity error, never as silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of program configurations per graph.
    pub max_configs: usize,
    /// Maximum number of open initial atoms (models enumerated are 2^k).
    pub max_open_atoms: usize,
    /// Depth bound for checks quantifying over plain executable traces.
    pub depth: usize,
}

pub const DEFAULT_MAX_CONFIGS: usize = 100_000;
pub const DEFAULT_MAX_OPEN_ATOMS: usize = 16;
pub const DEFAULT_DEPTH: usize = 6;

/// Environment variable overriding the default configuration limit.
pub const MAX_CONFIGS_ENV: &str = "NDAX_MAX_CONFIGS";

impl Default for Limits {
    fn default() -> Self {
        let max_configs = std::env::var(MAX_CONFIGS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_MAX_CONFIGS);
        Limits {
            max_configs,
            max_open_atoms: DEFAULT_MAX_OPEN_ATOMS,
            depth: DEFAULT_DEPTH,
        }
    }
}

impl Limits {
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_max_configs(mut self, max_configs: usize) -> Self {
        self.max_configs = max_configs;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_limits_without_env() {
        let limits = Limits {
            max_configs: DEFAULT_MAX_CONFIGS,
            max_open_atoms: DEFAULT_MAX_OPEN_ATOMS,
            depth: DEFAULT_DEPTH,
        };
        assert_eq!(limits.max_configs, 100_000);
        assert_eq!(limits.max_open_atoms, 16);
        assert_eq!(limits.depth, 6);
    }

    #[test]
    fn builders_override_fields() {
        let limits = Limits::default().with_depth(4).with_max_configs(10);
        assert_eq!(limits.depth, 4);
        assert_eq!(limits.max_configs, 10);
    }
}
