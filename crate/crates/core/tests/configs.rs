//! Every committed configuration parses into valid plans.

use std::path::PathBuf;

use matchlaw::harness::ConfigFile;

fn configs() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

#[test]
fn all_committed_configs_are_valid() {
    let files = configs();
    assert!(files.len() >= 10);
    for f in files {
        let cfg = ConfigFile::load(&f).unwrap_or_else(|e| panic!("{e}"));
        let plans = cfg.plans(None).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        for c in &cfg.comparisons {
            assert!(plans.iter().any(|p| p.name == c.numerator), "{}", f.display());
            assert!(plans.iter().any(|p| p.name == c.denominator), "{}", f.display());
        }
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let text = "[[experiment]]\nname = \"a\"\nkind = \"lcs_law\"\ntrails = 3\nsource = { type = \"iid\", probs = [0.5, 0.5] }\n";
    assert!(ConfigFile::from_toml(text).is_err());
}

#[test]
fn seed_precedence() {
    let text = "master_seed = 3\n[[experiment]]\nname = \"a\"\nkind = \"lcs_law\"\nsource = { type = \"iid\", probs = [0.5, 0.5] }\n";
    let cfg = ConfigFile::from_toml(text).unwrap();
    assert_eq!(cfg.plans(None).unwrap()[0].master_seed, 3);
    assert_eq!(cfg.plans(Some(9)).unwrap()[0].master_seed, 9);
    assert_eq!(
        cfg.plans(None).unwrap()[0].schedule,
        (8..=16).map(|e| 1usize << e).collect::<Vec<_>>()
    );
}

#[test]
fn missing_parameters_are_reported() {
    let text = "[[experiment]]\nname = \"a\"\nkind = \"orbit_law\"\n";
    let err = ConfigFile::from_toml(text)
        .unwrap()
        .plans(None)
        .unwrap_err()
        .to_string();
    assert!(err.contains("map"), "{err}");
}
