use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const METRICS: [&str; 10] = ["spec", "impl", "deleg", "dit", "noc", "loc", "lcom", "wmc", "rfc", "cbo"];

/// One fixture bundle: Java sources plus hand-computed expectations.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub files: Vec<(String, String)>,
    /// Class name → values in [`METRICS`] order.
    pub expected: BTreeMap<String, [usize; 10]>,
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/metrics")
}

pub fn parse_fixture(name: &str, text: &str) -> Fixture {
    let mut files: Vec<(String, String)> = Vec::new();
    let mut expected = BTreeMap::new();
    for line in text.lines() {
        if let Some(path) = line.strip_prefix("// file:") {
            files.push((path.trim().to_string(), String::new()));
            continue;
        }
        if let Some((_, body)) = files.last_mut() {
            body.push_str(line);
            body.push('\n');
            continue;
        }
        if let Some(rest) = line.strip_prefix("// expect ") {
            let (class, values) = rest.split_once(':').expect("expect line has a colon");
            let mut row = [usize::MAX; 10];
            for kv in values.split_whitespace() {
                let (k, v) = kv.split_once('=').expect("key=value");
                let i = METRICS.iter().position(|m| *m == k).unwrap_or_else(|| panic!("{name}: unknown metric {k}"));
                row[i] = v.parse().expect("integer value");
            }
            assert!(row.iter().all(|&v| v != usize::MAX), "{name}: incomplete expectation for {class}");
            expected.insert(class.trim().to_string(), row);
        }
    }
    Fixture { name: name.to_string(), files, expected }
}

pub fn load_fixtures() -> Vec<Fixture> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .expect("fixture dir")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "fixture"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            parse_fixture(&name, &std::fs::read_to_string(p).expect("readable fixture"))
        })
        .collect()
}

pub fn write_fixture(fixture: &Fixture, root: &Path) {
    for (path, body) in &fixture.files {
        let p = root.join(path);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, body).unwrap();
    }
}
