//! Advisory constant cache: a versioned tab-separated text file. Damaged
//! headers or lines are reported to stderr and dropped, never fatal;
//! every record can be recomputed from scratch.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

const HEADER: &str = "#isocalc-cache v1";

/// One cached constant: kind, k-or-epsilon parameter, digits, decimal
/// value, error bound, method tag, timestamp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub kind: String,
    pub param: String,
    pub digits: u32,
    pub value: String,
    pub bound: String,
    pub method: String,
    pub stamp: String,
}

pub struct Cache {
    path: PathBuf,
    entries: BTreeMap<(String, String, u32), CacheEntry>,
    dirty: bool,
}

impl Cache {
    /// Loads `path` if it exists; a missing file is an empty cache.
    pub fn open(path: &Path) -> Self {
        let mut cache = Cache {
            path: path.to_path_buf(),
            entries: BTreeMap::new(),
            dirty: false,
        };
        let Ok(text) = std::fs::read_to_string(path) else {
            return cache;
        };
        let mut lines = text.lines();
        if lines.next() != Some(HEADER) {
            eprintln!(
                "isocalc: ignoring cache {}: missing `{HEADER}` header",
                path.display()
            );
            return cache;
        }
        let mut dropped = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            match parse_line(line) {
                Some(e) => {
                    cache
                        .entries
                        .insert((e.kind.clone(), e.param.clone(), e.digits), e);
                }
                None => dropped += 1,
            }
        }
        if dropped > 0 {
            eprintln!(
                "isocalc: dropped {dropped} damaged line(s) from cache {}",
                path.display()
            );
            // Rewrite clean on the next save.
            cache.dirty = true;
        }
        cache
    }

    pub fn get(&self, kind: &str, param: &str, digits: u32) -> Option<&CacheEntry> {
        self.entries
            .get(&(kind.to_string(), param.to_string(), digits))
    }

    pub fn put(&mut self, entry: CacheEntry) {
        self.entries.insert(
            (entry.kind.clone(), entry.param.clone(), entry.digits),
            entry,
        );
        self.dirty = true;
    }

    /// Rewrites the whole file with entries sorted by key, so saves are
    /// deterministic. No write happens unless something changed.
    pub fn save(&self) -> std::io::Result<()> {
        if !self.dirty {
            return Ok(());
        }
        let mut out = String::from(HEADER);
        out.push('\n');
        for e in self.entries.values() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                e.kind, e.param, e.digits, e.value, e.bound, e.method, e.stamp
            ));
        }
        let tmp = self.path.with_extension("tmp");
        std::fs::write(&tmp, out)?;
        std::fs::rename(&tmp, &self.path)
    }
}

fn parse_line(line: &str) -> Option<CacheEntry> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [kind, param, digits, value, bound, method, stamp] = fields[..] else {
        return None;
    };
    let digits: u32 = digits.parse().ok().filter(|d| *d >= 1)?;
    if kind.is_empty() || param.is_empty() || value.is_empty() {
        return None;
    }
    Some(CacheEntry {
        kind: kind.into(),
        param: param.into(),
        digits,
        value: value.into(),
        bound: bound.into(),
        method: method.into(),
        stamp: stamp.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(kind: &str, param: &str, digits: u32, value: &str) -> CacheEntry {
        CacheEntry {
            kind: kind.into(),
            param: param.into(),
            digits,
            value: value.into(),
            bound: "1e-30".into(),
            method: "composite".into(),
            stamp: "2026-01-01T00:00:00Z".into(),
        }
    }

    #[test]
    fn round_trips_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.tsv");
        let mut cache = Cache::open(&path);
        cache.put(entry("gamma", "2", 30, "1.499302375880"));
        cache.put(entry("lambda1", "-", 30, "0.187355237052"));
        cache.save().unwrap();

        let reloaded = Cache::open(&path);
        assert_eq!(
            reloaded.get("gamma", "2", 30).unwrap().value,
            "1.499302375880"
        );
        assert_eq!(
            reloaded.get("lambda1", "-", 30).unwrap().method,
            "composite"
        );
        assert!(reloaded.get("gamma", "2", 12).is_none());
    }

    #[test]
    fn damaged_lines_are_dropped_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.tsv");
        std::fs::write(
            &path,
            format!("{HEADER}\ngarbage line\ngamma\t1\t12\t0.577215664901\t1e-12\tcomposite\tnow\nshort\tline\n"),
        )
        .unwrap();
        let cache = Cache::open(&path);
        assert_eq!(cache.entries.len(), 1);
        assert!(cache.get("gamma", "1", 12).is_some());
    }

    #[test]
    fn wrong_header_means_empty_cache() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.tsv");
        std::fs::write(&path, "#isocalc-cache v999\ngamma\t1\t12\tx\ty\tz\tw\n").unwrap();
        let cache = Cache::open(&path);
        assert!(cache.entries.is_empty());
    }

    #[test]
    fn save_is_sorted_and_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.tsv");
        let mut cache = Cache::open(&path);
        cache.put(entry("gamma_prime", "3", 12, "2.6396589493"));
        cache.put(entry("gamma", "3", 12, "3.9856305765"));
        cache.save().unwrap();
        let first = std::fs::read_to_string(&path).unwrap();

        let mut again = Cache::open(&path);
        again.put(entry("gamma", "3", 12, "3.9856305765"));
        again.save().unwrap();
        let second = std::fs::read_to_string(&path).unwrap();
        assert_eq!(first, second);
        assert!(first.find("gamma\t").unwrap() < first.find("gamma_prime\t").unwrap());
    }
}
