use std::path::PathBuf;

use rp3kh::rules::{builtin_table, load_rule_file, Theory};

fn rules_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("rules")
}

#[test]
fn shipped_files_match_builtins() {
    for (file, theory) in [
        ("kh0.rules", Theory::Kh0),
        ("kh-class1.rules", Theory::KhClass1),
        ("kh1-class1.rules", Theory::Kh1Class1),
        ("inst0.rules", Theory::Inst0),
        ("inst1.rules", Theory::Inst1),
    ] {
        let loaded =
            load_rule_file(rules_dir().join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        assert_eq!(loaded, builtin_table(theory), "{file}");
    }
}

#[test]
fn missing_file_is_an_error() {
    assert!(load_rule_file(rules_dir().join("absent.rules")).is_err());
}
