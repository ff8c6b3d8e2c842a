use std::path::Path;

use levyx::config::ExperimentConfig;
use levyx::experiments::is_registered;
use levyx::functional::FunctionalSpec;

const MINIMAL: &str = r#"
experiment_name = "duality"
n_paths = 1000
grid_step = 1e-3
seed = 1

[triplet]
drift = 0.0
gaussian = 0.5
"#;

#[test]
fn minimal_toml() {
    let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
    assert_eq!(c.experiment_name, "duality");
    assert_eq!(c.n_paths, 1000);
    assert!(c.functionals.is_empty());
    assert_eq!(c.t_or(1.0), 1.0);
    let t = c.triplet.to_triplet().unwrap();
    assert_eq!(t.gaussian_b(), 0.5);
    assert_eq!(t.jump_rate(), 0.0);
}

#[test]
fn unknown_keys_are_rejected() {
    let text = MINIMAL.replace("seed = 1", "seed = 1\nhorizn = 2.0");
    let e = ExperimentConfig::from_toml(&text).unwrap_err();
    assert!(format!("{e:#}").contains("horizn"), "{e:#}");
    let text = MINIMAL.replace("gaussian = 0.5", "gaussian = 0.5\nsigma = 1.0");
    assert!(ExperimentConfig::from_toml(&text).is_err());
}

#[test]
fn invariants_are_enforced() {
    assert!(ExperimentConfig::from_toml(&MINIMAL.replace("n_paths = 1000", "n_paths = 99")).is_err());
    assert!(ExperimentConfig::from_toml(&MINIMAL.replace("grid_step = 1e-3", "grid_step = 0.0")).is_err());
    assert!(ExperimentConfig::from_toml(&MINIMAL.replace("\"duality\"", "\"nope\"")).is_err());
    assert!(ExperimentConfig::from_toml(&MINIMAL.replace("seed = 1", "seed = 1\nx = -1.0")).is_err());
    assert!(ExperimentConfig::from_toml(&MINIMAL.replace("gaussian = 0.5", "gaussian = -0.5")).is_err());
    let bad_q = MINIMAL.replace("seed = 1", "seed = 1\nfunctionals = [{ ValueAtFraction = 1.5 }]");
    assert!(ExperimentConfig::from_toml(&bad_q).is_err());
}

#[test]
fn json_is_accepted() {
    let text = r#"{
        "experiment_name": "wiener_hopf", "n_paths": 500, "grid_step": 0.01, "seed": 3, "alpha": 2.0,
        "functionals": ["SupValue", {"ValueAtFraction": 0.5}],
        "triplet": {"drift": 0.1, "gaussian": 0.0,
                    "jumps": {"kind": "compound_poisson", "rate": 2.0, "law": {"kind": "normal", "mean": 0.0, "sd": 1.0}}}
    }"#;
    let c = ExperimentConfig::from_json(text).unwrap();
    assert_eq!(c.alpha, Some(2.0));
    assert_eq!(c.functionals, vec![FunctionalSpec::SupValue, FunctionalSpec::ValueAtFraction(0.5)]);
    assert_eq!(c.triplet.to_triplet().unwrap().jump_rate(), 2.0);
}

#[test]
fn round_trips_through_toml() {
    let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
    let back = ExperimentConfig::from_toml(&toml::to_string(&c).unwrap()).unwrap();
    assert_eq!(c, back);
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let c = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        assert!(is_registered(&c.experiment_name));
        seen += 1;
    }
    assert!(seen >= 13);
}

#[test]
fn missing_file_is_an_error() {
    assert!(ExperimentConfig::load(Path::new("/nonexistent/levyx.toml")).is_err());
}
