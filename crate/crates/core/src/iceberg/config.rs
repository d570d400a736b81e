use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collector::check_target;
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::montecarlo::DEFAULT_DRAW_GUARD;
use crate::scalar::{parse_rational, Rational};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterConfig {
    pub name: String,
    pub p: DrawDistribution,
    pub c: usize,
    /// Items read before an epoch is abandoned.
    pub stream_cap: u64,
}

impl RouterConfig {
    pub fn new(name: impl Into<String>, p: DrawDistribution, c: usize) -> Result<RouterConfig> {
        check_target(p.len(), c)?;
        Ok(RouterConfig {
            name: name.into(),
            p,
            c,
            stream_cap: DEFAULT_DRAW_GUARD,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcebergConfig {
    pub rounds: u64,
    pub seed: u64,
    pub routers: Vec<RouterConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    rounds: u64,
    seed: u64,
    router: Vec<RawRouter>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRouter {
    name: String,
    c: usize,
    weights: Vec<toml::Value>,
    stream_cap: Option<u64>,
}

fn weight(router: &str, index: usize, value: &toml::Value) -> Result<Rational> {
    let text = match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        // shortest round-trip form, so 0.3 reads as 3/10
        toml::Value::Float(f) => f.to_string(),
        other => {
            return Err(Error::Config(format!(
                "router {router:?}, weight {}: expected a number or \"a/b\" string, got {}",
                index + 1,
                other.type_str()
            )))
        }
    };
    parse_rational(&text).map_err(|e| Error::Config(format!("router {router:?}, weight {}: {e}", index + 1)))
}

impl IcebergConfig {
    /// Parses the TOML experiment description:
    ///
    /// ```toml
    /// version = 1
    /// rounds = 100000
    /// seed = 7
    ///
    /// [[router]]
    /// name = "edge-a"
    /// c = 3
    /// weights = ["1/5", "1/5", 0.2, "1/5", "1/5"]
    /// stream_cap = 1000000   # optional
    /// ```
    pub fn from_toml_str(text: &str) -> Result<IcebergConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if raw.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                raw.version
            )));
        }
        if raw.rounds == 0 {
            return Err(Error::Config("rounds must be >= 1".into()));
        }
        if raw.router.is_empty() {
            return Err(Error::Config("at least one [[router]] required".into()));
        }
        let routers = raw
            .router
            .iter()
            .map(|r| {
                let weights = r
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(i, v)| weight(&r.name, i, v))
                    .collect::<Result<Vec<_>>>()?;
                let p = DrawDistribution::new(weights).map_err(|e| Error::Config(format!("router {:?}: {e}", r.name)))?;
                let mut router = RouterConfig::new(r.name.clone(), p, r.c)
                    .map_err(|e| Error::Config(format!("router {:?}: {e}", r.name)))?;
                if let Some(cap) = r.stream_cap {
                    if cap == 0 {
                        return Err(Error::Config(format!("router {:?}: stream_cap must be >= 1", r.name)));
                    }
                    router.stream_cap = cap;
                }
                Ok(router)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IcebergConfig {
            rounds: raw.rounds,
            seed: raw.seed,
            routers,
        })
    }

    pub fn from_path(path: &Path) -> Result<IcebergConfig> {
        let text = std::fs::read_to_string(path)?;
        IcebergConfig::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    const SAMPLE: &str = r#"
version = 1
rounds = 10
seed = 3

[[router]]
name = "flat"
c = 2
weights = ["1/4", "1/4", 0.25]

[[router]]
name = "skewed"
c = 2
weights = [0.1, "3/10", 0.35]
stream_cap = 500
"#;

    #[test]
    fn parses_mixed_weights() {
        let cfg = IcebergConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.routers.len(), 2);
        assert_eq!(cfg.routers[1].p.weights()[0], rational(1, 10));
        assert_eq!(cfg.routers[1].p.weights()[2], rational(7, 20));
        assert_eq!(cfg.routers[1].stream_cap, 500);
        assert_eq!(cfg.routers[0].stream_cap, DEFAULT_DRAW_GUARD);
        assert_eq!(cfg.routers[0].p.null_mass(), rational(1, 4));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(IcebergConfig::from_toml_str(&SAMPLE.replace("version = 1", "version = 2")).is_err());
        assert!(IcebergConfig::from_toml_str(&SAMPLE.replace("c = 2\nweights = [0.1", "c = 4\nweights = [0.1")).is_err());
        assert!(IcebergConfig::from_toml_str(&SAMPLE.replace("\"3/10\"", "\"3/x\"")).is_err());
        assert!(IcebergConfig::from_toml_str(&SAMPLE.replace("0.35", "0.95")).is_err());
        assert!(IcebergConfig::from_toml_str(&SAMPLE.replace("rounds = 10", "rounds = 0")).is_err());
        assert!(IcebergConfig::from_toml_str("version = 1\nrounds = 1\nseed = 1\nrouter = []").is_err());
    }
}
