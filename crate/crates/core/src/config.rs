//! JSON construction of maps and potentials.
//!
//! These are the wire formats consumed by the command-line front-end;
//! unknown keys are rejected so configuration typos fail loudly.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::maps::MapSpec;
use crate::potential::PotentialSpec;

/// Map construction: `{"family":"farey"|"lsv"|"pm"|"custom", "alpha": ...}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub family: String,
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl MapConfig {
    pub fn build(&self) -> Result<MapSpec> {
        match self.family.as_str() {
            "farey" => Ok(MapSpec::farey()),
            "lsv" => MapSpec::lsv(
                self.alpha
                    .ok_or_else(|| Error::Config("lsv needs \"alpha\"".into()))?,
            ),
            "pm" => MapSpec::pomeau_manneville(
                self.alpha
                    .ok_or_else(|| Error::Config("pm needs \"alpha\"".into()))?,
            ),
            "custom" => Err(Error::Config(
                "custom maps carry branch closures and are only constructible \
                 through the library API"
                    .into(),
            )),
            other => Err(Error::Config(format!("unknown map family \"{other}\""))),
        }
    }
}

/// Potential construction:
/// `{"kind":"mql","q":1.0,"shift":-1.0}` | `{"kind":"const","v0":-1.0}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: String,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub v0: Option<f64>,
    #[serde(default)]
    pub shift: Option<f64>,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec> {
        match self.kind.as_str() {
            "mql" => {
                let q = self
                    .q
                    .ok_or_else(|| Error::Config("mql potential needs \"q\"".into()))?;
                Ok(match self.shift {
                    Some(shift) => PotentialSpec::log_deriv_shifted(q, shift),
                    None => PotentialSpec::log_deriv(q),
                })
            }
            "const" => Ok(PotentialSpec::constant(self.v0.ok_or_else(|| {
                Error::Config("const potential needs \"v0\"".into())
            })?)),
            "custom" => Err(Error::Config(
                "custom potentials carry closures and are only constructible \
                 through the library API"
                    .into(),
            )),
            other => Err(Error::Config(format!("unknown potential kind \"{other}\""))),
        }
    }
}

pub fn map_from_json(json: &str) -> Result<MapSpec> {
    let cfg: MapConfig =
        serde_json::from_str(json).map_err(|e| Error::Config(format!("map config: {e}")))?;
    cfg.build()
}

pub fn potential_from_json(json: &str) -> Result<PotentialSpec> {
    let cfg: PotentialConfig =
        serde_json::from_str(json).map_err(|e| Error::Config(format!("potential config: {e}")))?;
    cfg.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_known_families() {
        assert!(map_from_json(r#"{"family":"farey"}"#).is_ok());
        assert!(map_from_json(r#"{"family":"lsv","alpha":0.5}"#).is_ok());
        assert!(map_from_json(r#"{"family":"pm","alpha":1.0}"#).is_ok());
        assert!(map_from_json(r#"{"family":"lsv"}"#).is_err());
        assert!(map_from_json(r#"{"family":"doubling"}"#).is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(map_from_json(r#"{"family":"farey","alfa":1.0}"#).is_err());
        assert!(potential_from_json(r#"{"kind":"const","v0":-1.0,"w":2}"#).is_err());
    }

    #[test]
    fn builds_potentials() {
        let p = potential_from_json(r#"{"kind":"mql","q":1.0}"#).unwrap();
        assert_eq!(p.v_at_zero(), 0.0);
        let p = potential_from_json(r#"{"kind":"mql","q":1.0,"shift":-1.0}"#).unwrap();
        assert_eq!(p.v_at_zero(), -1.0);
        let p = potential_from_json(r#"{"kind":"const","v0":-0.25}"#).unwrap();
        assert_eq!(p.v_at_zero(), -0.25);
        assert!(potential_from_json(r#"{"kind":"custom"}"#).is_err());
    }
}
