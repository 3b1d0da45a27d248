use serde::{Deserialize, Serialize};
use tte3o_core::{DesignSpec, Error, GsSpec, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn default_ratio() -> f64 {
    1.0
}

fn default_round() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub hr0: f64,
    pub hr1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub pi: f64,
    pub eta: f64,
    #[serde(default = "default_ratio")]
    pub r: f64,
    #[serde(default = "default_round")]
    pub round_events: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterimSection {
    pub t1: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

/// Structured description of a fixed or group-sequential design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRequest {
    pub schema_version: u32,
    pub design: DesignSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interim: Option<InterimSection>,
}

impl DesignRequest {
    pub fn spec(&self) -> DesignSpec {
        let d = &self.design;
        DesignSpec::new(d.hr0, d.hr1, d.alpha, d.beta, d.pi, d.eta, d.r)
    }

    pub fn gs_spec(&self) -> Option<GsSpec> {
        self.interim
            .map(|i| GsSpec::new(self.spec(), i.t1, i.alpha1, i.beta1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParameter {
                name: "schema_version",
                reason: format!(
                    "unsupported schema version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            });
        }
        match self.gs_spec() {
            Some(gs) => gs.validate(),
            None => self.spec().validate(),
        }
    }

    pub fn parse(text: &str) -> Result<DesignRequest> {
        let req: DesignRequest =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter {
                name: "request",
                reason: e.to_string(),
            })?;
        req.validate()?;
        Ok(req)
    }

    /// Reads a request file, or the echoed request of a result document.
    pub fn from_path(path: &std::path::Path) -> Result<DesignRequest> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::InvalidParameter {
                name: "request",
                reason: format!("{}: {e}", path.display()),
            })?;
        match value.get("inputs").and_then(|i| i.get("request")) {
            Some(echoed) => DesignRequest::parse(&echoed.to_string()),
            None => DesignRequest::parse(&text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_STAGE_REQUEST: &str = r#"{"schema_version":1,
        "design":{"hr0":1,"hr1":0.65,"alpha":0.15,"beta":0.15,"pi":0.75,"eta":0.75},
        "interim":{"t1":0.5,"alpha1":0,"beta1":0.05}}"#;

    #[test]
    fn parses_with_defaults() {
        let r = DesignRequest::parse(TWO_STAGE_REQUEST).unwrap();
        assert_eq!(r.design.r, 1.0);
        assert!(r.design.round_events);
        assert_eq!(r.gs_spec().unwrap().beta1, 0.05);
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let extra = TWO_STAGE_REQUEST.replace("\"t1\"", "\"gamma\":1,\"t1\"");
        assert_eq!(
            DesignRequest::parse(&extra).unwrap_err().code(),
            "invalid-parameter"
        );
        let v2 = TWO_STAGE_REQUEST.replace("\"schema_version\":1", "\"schema_version\":2");
        assert_eq!(
            DesignRequest::parse(&v2).unwrap_err().code(),
            "invalid-parameter"
        );
    }

    #[test]
    fn validates_numbers() {
        let bad = TWO_STAGE_REQUEST.replace("\"alpha1\":0", "\"alpha1\":0.2");
        assert_eq!(
            DesignRequest::parse(&bad).unwrap_err().code(),
            "spending-exceeds-total"
        );
    }
}
