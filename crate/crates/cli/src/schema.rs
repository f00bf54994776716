//! Published JSON Schemas of the config files.

pub const EXPERIMENT: &str = include_str!("../schema/experiment.schema.json");
pub const SWEEP: &str = include_str!("../schema/sweep.schema.json");

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{
        CombinationConfig, ExperimentConfig, FieldConfig, GeneratorConfig, OutputConfig, SystemConfig,
        TolerancesConfig, WindowConfig,
    };
    use std::collections::BTreeSet;

    fn keys(v: &serde_json::Value) -> BTreeSet<String> {
        v.as_object().unwrap().keys().cloned().collect()
    }

    #[test]
    fn schemas_are_json() {
        for s in [EXPERIMENT, SWEEP] {
            serde_json::from_str::<serde_json::Value>(s).unwrap();
        }
    }

    #[test]
    fn experiment_schema_lists_every_config_key() {
        let cfg = ExperimentConfig {
            schema_version: 1,
            seed: 0,
            field: FieldConfig { p: 2, c: 1, modulus: Some(vec![1, 1]) },
            window: WindowConfig { m: 1, n: 1, exponent_window: Some([-8, 8]) },
            generator: GeneratorConfig::default(),
            system: SystemConfig { a: "1".into(), b: "1".into(), j_range: [0, 0], k_count: 1, m_count: 1 },
            combination: CombinationConfig::None,
            checks: vec![],
            tolerances: TolerancesConfig::default(),
            output: OutputConfig::default(),
        };
        let actual = serde_json::to_value(&cfg).unwrap();
        let schema: serde_json::Value = serde_json::from_str(EXPERIMENT).unwrap();
        let props = &schema["properties"];
        assert_eq!(keys(props), keys(&actual));
        for section in ["field", "window", "system"] {
            assert_eq!(keys(&props[section]["properties"]), keys(&actual[section]), "{section}");
        }
    }
}
