//! JSON state files.
//!
//! Real coefficients are plain numbers and complex ones are `[re, im]` pairs.
//! serde_json writes the shortest decimal that parses back to the same
//! double, so a saved state reloads bit for bit.

use std::path::Path;
use std::sync::Arc;

use grf_core::{parse_group_spec, Complex64, Ensemble, Error, FieldMode, FiniteGroup, Result, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEnvelope {
    pub group_spec: String,
    pub field_mode: FieldMode,
    pub kappa: f64,
    pub agents: Vec<Vec<Value>>,
    #[serde(default)]
    pub meta: Meta,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renormalize: Option<bool>,
}

/// Coefficient types that have a JSON form in the envelope.
pub trait EnvelopeScalar: Scalar<Real = f64> {
    fn to_json(self) -> Value;
    fn from_json(v: &Value) -> Option<Self>;
}

impl EnvelopeScalar for f64 {
    fn to_json(self) -> Value {
        Value::from(self)
    }

    fn from_json(v: &Value) -> Option<Self> {
        v.as_f64()
    }
}

impl EnvelopeScalar for Complex64 {
    fn to_json(self) -> Value {
        Value::Array(vec![Value::from(self.re), Value::from(self.im)])
    }

    fn from_json(v: &Value) -> Option<Self> {
        match v.as_array()?.as_slice() {
            [re, im] => Some(Complex64::new(re.as_f64()?, im.as_f64()?)),
            _ => None,
        }
    }
}

/// An ensemble in whichever field the state file names.
#[derive(Debug, Clone)]
pub enum AnyEnsemble {
    Real(Ensemble<f64>),
    Complex(Ensemble<Complex64>),
}

impl AnyEnsemble {
    pub fn field_mode(&self) -> FieldMode {
        match self {
            AnyEnsemble::Real(_) => FieldMode::Real,
            AnyEnsemble::Complex(_) => FieldMode::Complex,
        }
    }

    pub fn random(group: &Arc<FiniteGroup>, field: FieldMode, n: usize, kappa: f64, seed: u64) -> Result<Self> {
        Ok(match field {
            FieldMode::Real => AnyEnsemble::Real(Ensemble::random_unit(group, n, kappa, seed)?),
            FieldMode::Complex => AnyEnsemble::Complex(Ensemble::random_unit(group, n, kappa, seed)?),
        })
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Ok(match self {
            AnyEnsemble::Real(e) => AnyEnsemble::Real(e.with_kappa(kappa)?),
            AnyEnsemble::Complex(e) => AnyEnsemble::Complex(e.with_kappa(kappa)?),
        })
    }
}

pub fn to_envelope<T: EnvelopeScalar>(ens: &Ensemble<T>, group_spec: &str, meta: Meta) -> StateEnvelope {
    StateEnvelope {
        group_spec: group_spec.to_string(),
        field_mode: T::FIELD,
        kappa: ens.kappa(),
        agents: ens
            .agents()
            .iter()
            .map(|a| a.coeffs().iter().map(|&c| c.to_json()).collect())
            .collect(),
        meta,
    }
}

fn decode<T: EnvelopeScalar>(env: &StateEnvelope, group: &Arc<FiniteGroup>) -> Result<Ensemble<T>> {
    let rows = env
        .agents
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .map(|v| {
                    T::from_json(v).ok_or_else(|| {
                        Error::Syntax(format!(
                            "agent {i}: coefficient {v} is not a {} scalar",
                            T::FIELD.as_str()
                        ))
                    })
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::from_coeffs(group, rows, env.kappa)
}

impl StateEnvelope {
    pub fn group(&self) -> Result<Arc<FiniteGroup>> {
        Ok(Arc::new(parse_group_spec(&self.group_spec)?))
    }

    pub fn ensemble(&self) -> Result<AnyEnsemble> {
        let group = self.group()?;
        if self.agents.is_empty() {
            return Err(Error::InvalidParameter("state has no agents".into()));
        }
        Ok(match self.field_mode {
            FieldMode::Real => AnyEnsemble::Real(decode(self, &group)?),
            FieldMode::Complex => AnyEnsemble::Complex(decode(self, &group)?),
        })
    }

    pub fn from_any(ens: &AnyEnsemble, group_spec: &str, meta: Meta) -> Self {
        match ens {
            AnyEnsemble::Real(e) => to_envelope(e, group_spec, meta),
            AnyEnsemble::Complex(e) => to_envelope(e, group_spec, meta),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Syntax(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Syntax(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
    }
}
