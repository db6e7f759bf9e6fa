//! On-disk artifacts: prediction files, provenance sidecars and the stage cache.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mulr::dataset::EntityRecord;
use mulr::eval::TypeSet;
use mulr::{Error, Result};
use sha2::{Digest, Sha256};

/// Config hash and seed, recorded with every output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    /// `# config_hash=<hex> seed=<n>` header line for text outputs.
    pub fn header(&self) -> String {
        format!("# config_hash={} seed={}", self.config_hash, self.seed)
    }

    /// Writes `<path>.meta` for formats that cannot carry a header.
    pub fn write_sidecar(&self, path: &Path, what: &str) -> Result<()> {
        let p = meta_path(path);
        let text = format!("config_hash\t{}\nseed\t{}\nartifact\t{what}\n", self.config_hash, self.seed);
        write(&p, &text)
    }
}

/// Provenance from the first line of a text output, if it has a header.
pub fn parse_header(text: &str) -> Option<Provenance> {
    let line = text.lines().next()?.strip_prefix("# ")?;
    let mut hash = None;
    let mut seed = None;
    for kv in line.split_whitespace() {
        match kv.split_once('=')? {
            ("config_hash", v) => hash = Some(v.to_string()),
            ("seed", v) => seed = v.parse().ok(),
            _ => {}
        }
    }
    Some(Provenance {
        config_hash: hash?,
        seed: seed?,
    })
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Creates the directory `path` will be written into.
pub fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Hex SHA-256 of the parts, each length-prefixed so boundaries count.
pub fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Predicted types with their probabilities, one row per entity.
pub type PredictionRow = (String, Vec<(String, f64)>);

/// Rows `entity_id<TAB>type:score,...` listing the predicted types, most
/// probable first, after a provenance header.
pub fn format_predictions(prov: &Provenance, rows: &[PredictionRow]) -> String {
    let mut out = prov.header();
    out.push('\n');
    for (id, types) in rows {
        let cells: Vec<String> = types.iter().map(|(t, p)| format!("{t}:{p:.6}")).collect();
        writeln!(out, "{id}\t{}", cells.join(",")).unwrap();
    }
    out
}

pub fn parse_predictions(text: &str, origin: &str) -> Result<HashMap<String, TypeSet>> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(origin, i + 1, "expected `entity_id<TAB>type:score,...`"))?;
        let mut set = BTreeSet::new();
        for cell in rest.split(',').filter(|c| !c.trim().is_empty()) {
            let (t, p) = cell
                .rsplit_once(':')
                .ok_or_else(|| Error::parse(origin, i + 1, format!("bad cell `{cell}`")))?;
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad score in `{cell}`")))?;
            set.insert(t.trim().to_string());
        }
        if map.insert(id.trim().to_string(), set).is_some() {
            return Err(Error::parse(origin, i + 1, format!("duplicate entity `{id}`")));
        }
    }
    Ok(map)
}

pub fn load_predictions(path: &Path) -> Result<HashMap<String, TypeSet>> {
    parse_predictions(&read(path)?, &path.display().to_string())
}

/// Predictions aligned with `entities`; every entity must be present.
pub fn align_predictions(map: &HashMap<String, TypeSet>, entities: &[EntityRecord]) -> Result<Vec<(String, TypeSet)>> {
    entities
        .iter()
        .map(|e| {
            map.get(&e.id)
                .map(|s| (e.id.clone(), s.clone()))
                .ok_or_else(|| Error::Validation(format!("no prediction for test entity `{}`", e.id)))
        })
        .collect()
}

/// Skips a stage when all its outputs exist and its key matches the one
/// recorded by the last successful run.
pub struct StageCache {
    dir: PathBuf,
    /// Stages that actually ran, in order.
    pub ran: Vec<String>,
}

impl StageCache {
    pub fn new(out: &Path) -> Self {
        StageCache {
            dir: out.join(".cache"),
            ran: Vec::new(),
        }
    }

    fn key_path(&self, stage: &str) -> PathBuf {
        self.dir.join(format!("{}.key", stage.replace('/', "__")))
    }

    pub fn is_fresh(&self, stage: &str, key: &str, outputs: &[PathBuf]) -> bool {
        outputs.iter().all(|p| p.exists()) && std::fs::read_to_string(self.key_path(stage)).is_ok_and(|k| k == key)
    }

    pub fn run<F: FnOnce() -> Result<()>>(&mut self, stage: &str, key: &str, outputs: &[PathBuf], f: F) -> Result<()> {
        if self.is_fresh(stage, key, outputs) {
            return Ok(());
        }
        // Forget the old key first so an interrupted run is never mistaken for a finished one.
        let kp = self.key_path(stage);
        let _ = std::fs::remove_file(&kp);
        f().map_err(|e| Error::stage(stage, e))?;
        if let Some(p) = outputs.iter().find(|p| !p.exists()) {
            return Err(Error::stage(stage, Error::Validation(format!("did not produce {}", p.display()))));
        }
        write(&kp, key).map_err(|e| Error::stage(stage, e))?;
        self.ran.push(stage.to_string());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions_round_trip() {
        let prov = Provenance {
            config_hash: "ab".into(),
            seed: 3,
        };
        let rows = vec![
            ("e1".to_string(), vec![("city".to_string(), 0.9), ("location".to_string(), 0.75)]),
            ("e2".to_string(), vec![]),
        ];
        let text = format_predictions(&prov, &rows);
        assert!(text.starts_with("# config_hash=ab seed=3\n"));
        assert!(text.contains("e1\tcity:0.900000,location:0.750000\n"));
        let back = parse_predictions(&text, "p").unwrap();
        assert_eq!(back["e1"], BTreeSet::from(["city".to_string(), "location".to_string()]));
        assert!(back["e2"].is_empty());
        assert_eq!(parse_header(&text), Some(prov));
        assert_eq!(parse_header("e1\tcity:0.5\n"), None);
        assert!(parse_predictions("e1\tcity", "p").is_err());
        assert!(parse_predictions("e1\t\ne1\t\n", "p").is_err());
    }

    proptest::proptest! {
        #[test]
        fn predictions_parse_back_to_their_type_sets(
            rows in proptest::collection::btree_map(
                "[a-z][a-z0-9_]{0,6}",
                proptest::collection::btree_map("[a-z/][a-z_/]{0,8}", 0.0f64..1.0, 0..4),
                0..6,
            ),
            seed in 0u64..1000,
        ) {
            let prov = Provenance { config_hash: "f0".into(), seed };
            let rows: Vec<PredictionRow> = rows
                .into_iter()
                .map(|(id, ts)| (id, ts.into_iter().collect()))
                .collect();
            let text = format_predictions(&prov, &rows);
            let back = parse_predictions(&text, "p").unwrap();
            proptest::prop_assert_eq!(back.len(), rows.len());
            for (id, ts) in &rows {
                let want: BTreeSet<String> = ts.iter().map(|t| t.0.clone()).collect();
                proptest::prop_assert_eq!(&back[id], &want);
            }
            proptest::prop_assert_eq!(parse_header(&text), Some(prov));
        }
    }

    #[test]
    fn digest_separates_parts() {
        assert_ne!(digest(&["ab", "c"]), digest(&["a", "bc"]));
        assert_eq!(digest(&["x"]), digest(&["x"]));
    }

    #[test]
    fn cache_skips_fresh_stages_and_reruns_failed_ones() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("a.txt");
        let mut cache = StageCache::new(dir.path());
        cache.run("s", "k1", &[out.clone()], || write(&out, "1")).unwrap();
        cache.run("s", "k1", &[out.clone()], || panic!("should be cached")).unwrap();
        assert_eq!(cache.ran, ["s"]);
        let err = cache
            .run("s", "k2", &[out.clone()], || Err(Error::Validation("boom".into())))
            .unwrap_err();
        assert!(err.to_string().contains("stage `s` failed"));
        assert!(!cache.is_fresh("s", "k1", &[out.clone()]));
    }
}
