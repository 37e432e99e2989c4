//! Running a directory of problem files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::parse::{parse_problem, Expectation, Expected};
use crate::solver::{solve, Config, Stats, Verdict};

#[derive(Debug, Clone)]
pub struct Row {
    pub id: String,
    pub verdict: Verdict,
    pub stats: Stats,
    pub expected: Option<Expectation>,
}

impl Row {
    /// Whether the verdict agrees with the annotation, if there is one.
    pub fn matches(&self) -> Option<bool> {
        let e = self.expected?;
        Some(match e.verdict {
            Expected::Proved => self.verdict == Verdict::Proved,
            Expected::Unknown => self.verdict.is_unknown(),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    pub rows: Vec<Row>,
}

impl CorpusReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("id,verdict,rounds,splits,time_ms\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.id,
                r.verdict,
                r.stats.rounds,
                r.stats.splits,
                r.stats.elapsed.as_millis()
            );
        }
        out
    }

    pub fn mismatches(&self) -> Vec<&Row> {
        self.rows
            .iter()
            .filter(|r| r.matches() == Some(false))
            .collect()
    }

    pub fn summary(&self) -> String {
        let checked = self.rows.iter().filter(|r| r.matches().is_some()).count();
        let bad = self.mismatches();
        let mut s = format!(
            "{} problems, {} annotated, {} as expected",
            self.rows.len(),
            checked,
            checked - bad.len()
        );
        for r in bad {
            let _ = write!(s, "\nmismatch: {} ({})", r.id, r.verdict);
        }
        s
    }
}

/// Solve one file. An annotated depth overrides the configured one.
pub fn run_file(path: &Path, cfg: &Config) -> Row {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let parsed = std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|t| parse_problem(&t).map_err(|e| e.to_string()));
    let p = match parsed {
        Ok(p) => p,
        Err(_) => {
            return Row {
                id,
                verdict: Verdict::InputError,
                stats: Stats::default(),
                expected: None,
            }
        }
    };
    let mut cfg = *cfg;
    if let Some(d) = p.expect.and_then(|e| e.depth) {
        cfg.split_depth = d;
    }
    let r = solve(&p, &cfg);
    Row {
        id,
        verdict: r.verdict,
        stats: r.stats,
        expected: p.expect,
    }
}

/// The `.poly` files of `dir`, sorted by name.
pub fn problem_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "poly") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

pub fn run_corpus(dir: &Path, cfg: &Config) -> std::io::Result<CorpusReport> {
    Ok(CorpusReport {
        rows: problem_files(dir)?
            .iter()
            .map(|f| run_file(f, cfg))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_directory() {
        let dir = std::env::temp_dir().join(format!("ineq-empty-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let r = run_corpus(&dir, &Config::default()).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.csv(), "id,verdict,rounds,splits,time_ms\n");
        assert!(r.mismatches().is_empty());
        std::fs::remove_dir(&dir).unwrap();
    }

    #[test]
    fn bad_file_is_a_row() {
        let dir = std::env::temp_dir().join(format!("ineq-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("a.poly"), "hyp x >\n").unwrap();
        std::fs::write(
            dir.join("b.poly"),
            "# expect: proved\nhyp x > 0\nconclude x > 0\n",
        )
        .unwrap();
        let r = run_corpus(&dir, &Config::default()).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].verdict, Verdict::InputError);
        assert_eq!(r.rows[1].matches(), Some(true));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
