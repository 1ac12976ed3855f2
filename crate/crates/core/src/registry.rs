//! Registry of swappable primitives.
//!
//! Every encoder, distribution, storage, reward module, augmentation, and
//! agent declares a [`PrimitiveSpec`]: its registry identifier plus the full
//! hyperparameter schema with defaults. Compositions are validated against
//! the registry before any training starts, so a bad identifier or unknown
//! key fails fast with the valid options spelled out.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{CoreError, Result};

/// The kinds of swappable primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimitiveKind {
    Encoder,
    Distribution,
    Storage,
    RewardModule,
    Augmentation,
    Agent,
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PrimitiveKind::Encoder => "encoder",
            PrimitiveKind::Distribution => "distribution",
            PrimitiveKind::Storage => "storage",
            PrimitiveKind::RewardModule => "reward module",
            PrimitiveKind::Augmentation => "augmentation",
            PrimitiveKind::Agent => "agent",
        };
        f.write_str(s)
    }
}

/// A configuration value. Config files and CLI overrides are parsed into
/// these; schemas carry them as defaults.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    IntList(Vec<i64>),
}

impl ConfigValue {
    pub fn kind(&self) -> ConfigKind {
        match self {
            ConfigValue::Int(_) => ConfigKind::Int,
            ConfigValue::Float(_) => ConfigKind::Float,
            ConfigValue::Bool(_) => ConfigKind::Bool,
            ConfigValue::Str(_) => ConfigKind::Str,
            ConfigValue::IntList(_) => ConfigKind::IntList,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            ConfigValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    /// Float accessor; integers coerce losslessly.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ConfigValue::Float(v) => Some(*v),
            ConfigValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ConfigValue::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ConfigValue::Str(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_int_list(&self) -> Option<&[i64]> {
        match self {
            ConfigValue::IntList(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for ConfigValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigValue::Int(v) => write!(f, "{v}"),
            ConfigValue::Float(v) => write!(f, "{v}"),
            ConfigValue::Bool(v) => write!(f, "{v}"),
            ConfigValue::Str(v) => write!(f, "{v}"),
            ConfigValue::IntList(v) => write!(f, "{v:?}"),
        }
    }
}

/// The type tag of a config parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigKind {
    Int,
    Float,
    Bool,
    Str,
    IntList,
}

/// One named hyperparameter with its default.
#[derive(Debug, Clone)]
pub struct ConfigParam {
    pub name: &'static str,
    pub default: ConfigValue,
    pub doc: &'static str,
}

impl ConfigParam {
    pub fn new(name: &'static str, default: ConfigValue, doc: &'static str) -> Self {
        ConfigParam { name, default, doc }
    }
}

/// Declared interface of one primitive implementation.
#[derive(Debug, Clone)]
pub struct PrimitiveSpec {
    pub kind: PrimitiveKind,
    pub identifier: &'static str,
    pub params: Vec<ConfigParam>,
}

impl PrimitiveSpec {
    pub fn new(kind: PrimitiveKind, identifier: &'static str, params: Vec<ConfigParam>) -> Self {
        PrimitiveSpec {
            kind,
            identifier,
            params,
        }
    }
}

/// A parsed configuration section: key -> value.
pub type ConfigMap = BTreeMap<String, ConfigValue>;

/// Registry of primitive specs, addressed by `(kind, identifier)`.
#[derive(Debug, Default)]
pub struct Registry {
    specs: BTreeMap<(PrimitiveKind, String), PrimitiveSpec>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// Register a primitive. Identifiers must be unique within a kind.
    pub fn register(&mut self, spec: PrimitiveSpec) -> Result<()> {
        let key = (spec.kind, spec.identifier.to_string());
        if self.specs.contains_key(&key) {
            return Err(CoreError::InvalidConfig(format!(
                "duplicate {} identifier '{}'",
                spec.kind, spec.identifier
            )));
        }
        self.specs.insert(key, spec);
        Ok(())
    }

    /// Identifiers registered for a kind, sorted.
    pub fn identifiers(&self, kind: PrimitiveKind) -> Vec<&str> {
        self.specs
            .iter()
            .filter(|((k, _), _)| *k == kind)
            .map(|((_, id), _)| id.as_str())
            .collect()
    }

    /// Resolve `(kind, identifier)`; failure names the valid options.
    pub fn resolve(&self, kind: PrimitiveKind, identifier: &str) -> Result<&PrimitiveSpec> {
        self.specs
            .get(&(kind, identifier.to_string()))
            .ok_or_else(|| CoreError::UnknownIdentifier {
                kind: kind.to_string(),
                name: identifier.to_string(),
                options: self.identifiers(kind).join(", "),
            })
    }

    /// Fill defaults, then overlay the user-provided map. Unknown keys and
    /// type mismatches are rejected with the schema's valid options.
    pub fn resolve_config(
        &self,
        kind: PrimitiveKind,
        identifier: &str,
        user: &ConfigMap,
    ) -> Result<ConfigMap> {
        let spec = self.resolve(kind, identifier)?;
        let mut out: ConfigMap = spec
            .params
            .iter()
            .map(|p| (p.name.to_string(), p.default.clone()))
            .collect();
        for (key, value) in user {
            let param = spec.params.iter().find(|p| p.name == key).ok_or_else(|| {
                CoreError::InvalidConfig(format!(
                    "unknown key '{key}' for {kind} '{identifier}'; valid keys: {}",
                    spec.params
                        .iter()
                        .map(|p| p.name)
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?;
            let coerced = coerce(value, param.default.kind()).ok_or_else(|| {
                CoreError::InvalidConfig(format!(
                    "key '{key}' for {kind} '{identifier}' expects {:?}, got {:?}",
                    param.default.kind(),
                    value.kind()
                ))
            })?;
            out.insert(key.clone(), coerced);
        }
        Ok(out)
    }
}

/// Lossless coercions between config value kinds (Int -> Float only).
fn coerce(value: &ConfigValue, want: ConfigKind) -> Option<ConfigValue> {
    if value.kind() == want {
        return Some(value.clone());
    }
    match (value, want) {
        (ConfigValue::Int(v), ConfigKind::Float) => Some(ConfigValue::Float(*v as f64)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_registry() -> Registry {
        let mut r = Registry::new();
        r.register(PrimitiveSpec::new(
            PrimitiveKind::Encoder,
            "mlp",
            vec![
                ConfigParam::new("hidden", ConfigValue::IntList(vec![64, 64]), "hidden widths"),
                ConfigParam::new("activation", ConfigValue::Str("tanh".into()), "nonlinearity"),
            ],
        ))
        .unwrap();
        r.register(PrimitiveSpec::new(
            PrimitiveKind::RewardModule,
            "rnd",
            vec![ConfigParam::new("lr", ConfigValue::Float(1e-3), "predictor lr")],
        ))
        .unwrap();
        r
    }

    #[test]
    fn lookup_is_total_over_declared_identifiers() {
        let r = sample_registry();
        for kind in [PrimitiveKind::Encoder, PrimitiveKind::RewardModule] {
            for id in r.identifiers(kind) {
                assert!(r.resolve(kind, id).is_ok());
            }
        }
    }

    #[test]
    fn unknown_identifier_names_valid_options() {
        let r = sample_registry();
        let err = r.resolve(PrimitiveKind::Encoder, "cnn").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cnn") && msg.contains("mlp"), "{msg}");
    }

    #[test]
    fn duplicate_identifiers_within_a_kind_are_rejected() {
        let mut r = sample_registry();
        let dup = PrimitiveSpec::new(PrimitiveKind::Encoder, "mlp", vec![]);
        assert!(r.register(dup).is_err());
    }

    #[test]
    fn config_defaults_fill_and_unknown_keys_fail() {
        let r = sample_registry();
        let user: ConfigMap =
            [("lr".to_string(), ConfigValue::Float(5e-4))].into_iter().collect();
        let resolved = r
            .resolve_config(PrimitiveKind::RewardModule, "rnd", &user)
            .unwrap();
        assert_eq!(resolved["lr"], ConfigValue::Float(5e-4));

        let bad: ConfigMap =
            [("nope".to_string(), ConfigValue::Int(1))].into_iter().collect();
        let err = r
            .resolve_config(PrimitiveKind::RewardModule, "rnd", &bad)
            .unwrap_err();
        assert!(err.to_string().contains("valid keys"));
    }

    #[test]
    fn ints_coerce_to_floats_in_configs() {
        let r = sample_registry();
        let user: ConfigMap = [("lr".to_string(), ConfigValue::Int(1))].into_iter().collect();
        let resolved = r
            .resolve_config(PrimitiveKind::RewardModule, "rnd", &user)
            .unwrap();
        assert_eq!(resolved["lr"], ConfigValue::Float(1.0));
    }
}
