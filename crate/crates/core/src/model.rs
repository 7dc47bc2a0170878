//! Model files.
//!
//! A model is either a jump matrix, `{"d": 2, "p": [[...], ...]}`, or a
//! tandem, `{"tandem": {"lambda": 0.1, "mu": [0.4, 0.5]}}`. Either form may
//! carry `"normalize": true` to divide the rates by their total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::JacksonNetwork;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TandemSpec {
    pub lambda: f64,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Matrix {
        d: usize,
        p: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        normalize: bool,
    },
    Tandem {
        tandem: TandemSpec,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        normalize: bool,
    },
}

impl ModelSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("bad model: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialises")
    }

    pub fn build(&self) -> Result<JacksonNetwork> {
        match self {
            ModelSpec::Matrix { d, p, normalize: false } => JacksonNetwork::from_matrix(*d, p.clone()),
            ModelSpec::Matrix { d, p, normalize: true } => JacksonNetwork::from_matrix_normalized(*d, p.clone()),
            ModelSpec::Tandem { tandem, normalize: false } => JacksonNetwork::tandem(tandem.lambda, &tandem.mu),
            ModelSpec::Tandem { tandem, normalize: true } => JacksonNetwork::tandem_normalized(tandem.lambda, &tandem.mu),
        }
    }

    /// `lambda,mu_1,...,mu_d`; entries may be fractions such as `3/18`.
    pub fn parse_tandem(s: &str) -> Result<Self> {
        let v = s.split(',').map(|t| parse_number(t.trim())).collect::<Result<Vec<_>>>()?;
        if v.len() < 2 {
            return Err(Error::Config(format!("tandem '{s}' needs lambda and at least one mu")));
        }
        Ok(ModelSpec::Tandem { tandem: TandemSpec { lambda: v[0], mu: v[1..].to_vec() }, normalize: false })
    }
}

/// A decimal number or a fraction `a/b`.
pub fn parse_number(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("'{s}' is not a number"));
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0.0 {
                return Err(bad());
            }
            Ok(a / b)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

/// Comma separated integers.
pub fn parse_point(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Config(format!("'{s}' is not a lattice point"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_forms_parse() {
        let m = ModelSpec::from_json(r#"{"d":1,"p":[[0,0.4],[0.6,0]]}"#).unwrap();
        assert_eq!(m.build().unwrap().d(), 1);
        let t = ModelSpec::from_json(r#"{"tandem":{"lambda":0.1,"mu":[0.4,0.5]}}"#).unwrap();
        assert_eq!(t, ModelSpec::parse_tandem("0.1,0.4,0.5").unwrap());
    }

    #[test]
    fn fractions() {
        let t = ModelSpec::parse_tandem("1/18,3/18,7/18,2/18,5/18").unwrap();
        let net = t.build().unwrap();
        assert!((net.lambda(1) - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn bad_matrix_is_config_error() {
        let m = ModelSpec::from_json(r#"{"d":1,"p":[[0,0.5],[0.6,0]]}"#).unwrap();
        let e = m.build().unwrap_err();
        assert!(matches!(e, Error::NotStochastic { .. }) && e.is_config());
    }
}
