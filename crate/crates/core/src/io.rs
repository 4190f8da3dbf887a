//! On-disk formats.
//!
//! * `stats.json`: versioned [`StatsDocument`] describing an [`EvolutionStats`].
//! * `histogram.csv`: `k,count` rows for every occupied degree, ascending.
//! * pmf files: `k,prob` rows (header optional, `#` comments allowed).
//!
//! The exact layouts are documented in `docs/formats.md`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InitialDegreeModel;
use crate::pa_sim::{Arrivals, Attachment, EvolutionStats, SimMeta};

pub const STATS_FORMAT: &str = "affine-pa/evolution-stats";
pub const STATS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsKind {
    Full,
    Snapshot,
}

/// JSON form of [`EvolutionStats`]. Tail counts, `R_{>k}` and `M_t` are
/// derived on load and not stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsDocument {
    pub format: String,
    pub version: u32,
    pub kind: StatsKind,
    pub n: usize,
    pub total_edges: u64,
    pub meta: Option<SimMeta>,
    /// `[k, N_k]` for occupied degrees.
    pub degree_hist: Vec<(usize, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_seq: Option<Vec<u32>>,
    /// `[t, i, target, degree]` per placed edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<[u32; 4]>>,
}

impl StatsDocument {
    pub fn from_stats(stats: &EvolutionStats) -> Self {
        Self {
            format: STATS_FORMAT.to_string(),
            version: STATS_VERSION,
            kind: if stats.is_snapshot() { StatsKind::Snapshot } else { StatsKind::Full },
            n: stats.n(),
            total_edges: stats.total_edges(),
            meta: stats.meta().cloned(),
            degree_hist: stats.occupied().collect(),
            m_seq: stats.arrivals().map(|a| a.m_seq().to_vec()),
            history: stats
                .history()
                .map(|h| h.iter().map(|a| [a.t, a.i, a.target, a.degree]).collect()),
        }
    }

    pub fn into_stats(self) -> Result<EvolutionStats> {
        if self.format != STATS_FORMAT {
            return Err(Error::Format(format!("unexpected format tag '{}'", self.format)));
        }
        if self.version != STATS_VERSION {
            return Err(Error::Format(format!("unsupported stats version {}", self.version)));
        }
        let max = self.degree_hist.iter().map(|(k, _)| *k).max().unwrap_or(0);
        let mut hist = vec![0u64; max + 1];
        for (k, c) in self.degree_hist {
            hist[k] += c;
        }
        let arrivals = match (self.kind, self.m_seq) {
            (StatsKind::Full, Some(m_seq)) => Some(Arrivals::from_m_seq(m_seq)?),
            (StatsKind::Full, None) => {
                return Err(Error::Format("full stats document without m_seq".into()));
            }
            (StatsKind::Snapshot, _) => None,
        };
        let history = self.history.map(|h| {
            h.into_iter()
                .map(|[t, i, target, degree]| Attachment { t, i, target, degree })
                .collect()
        });
        let stats = EvolutionStats::from_histogram(self.n, hist, arrivals, history, self.meta)?;
        if stats.total_edges() != self.total_edges {
            return Err(Error::Format(format!(
                "total_edges = {} disagrees with the histogram ({})",
                self.total_edges,
                stats.total_edges()
            )));
        }
        Ok(stats)
    }
}

pub fn write_stats_json(stats: &EvolutionStats, path: &Path) -> Result<()> {
    let doc = StatsDocument::from_stats(stats);
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(&mut file, &doc)?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}

pub fn read_stats_json(path: &Path) -> Result<EvolutionStats> {
    let file = BufReader::new(fs::File::open(path)?);
    let doc: StatsDocument = serde_json::from_reader(file)?;
    doc.into_stats()
}

pub fn write_histogram_csv<W: Write>(stats: &EvolutionStats, mut w: W) -> std::io::Result<()> {
    writeln!(w, "k,count")?;
    for (k, c) in stats.occupied() {
        writeln!(w, "{k},{c}")?;
    }
    Ok(())
}

/// Reads a `k,count` histogram as a snapshot; `n` is the vertex count minus one.
pub fn read_histogram_csv<R: BufRead>(reader: R) -> Result<EvolutionStats> {
    let mut pairs = Vec::new();
    for (line_no, k, v) in data_rows(reader)? {
        let k: usize = k.parse().map_err(|_| bad_row(line_no, "degree"))?;
        let c: u64 = v.parse().map_err(|_| bad_row(line_no, "count"))?;
        pairs.push((k, c));
    }
    let max = pairs.iter().map(|(k, _)| *k).max().unwrap_or(0);
    let mut hist = vec![0u64; max + 1];
    for (k, c) in pairs {
        hist[k] += c;
    }
    let vertices: u64 = hist.iter().sum();
    if vertices < 3 {
        return Err(Error::Validation(format!("histogram has only {vertices} vertices")));
    }
    EvolutionStats::from_histogram(vertices as usize - 1, hist, None, None, None)
}

/// Reads a `k,prob` initial-degree pmf.
pub fn read_pmf_csv<R: BufRead>(reader: R) -> Result<InitialDegreeModel> {
    let mut pairs = Vec::new();
    for (line_no, k, v) in data_rows(reader)? {
        let k: u32 = k.parse().map_err(|_| bad_row(line_no, "degree"))?;
        let p: f64 = v.parse().map_err(|_| bad_row(line_no, "probability"))?;
        pairs.push((k, p));
    }
    InitialDegreeModel::from_pairs(&pairs)
}

pub fn read_pmf_file(path: &Path) -> Result<InitialDegreeModel> {
    read_pmf_csv(BufReader::new(fs::File::open(path)?))
}

fn bad_row(line_no: usize, what: &str) -> Error {
    Error::Format(format!("line {line_no}: cannot parse {what}"))
}

/// Two-column rows, skipping blanks, `#` comments and a non-numeric header.
fn data_rows<R: BufRead>(reader: R) -> Result<Vec<(usize, String, String)>> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split([',', ' ', '\t']).filter(|f| !f.is_empty());
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Format(format!("line {}: expected two columns", idx + 1)));
        };
        if rows.is_empty() && a.parse::<f64>().is_err() {
            continue;
        }
        rows.push((idx + 1, a.to_string(), b.to_string()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pa_sim::{simulate, snapshot_stats, SimConfig};

    #[test]
    fn stats_json_round_trip() {
        let mut cfg = SimConfig::fixed(200, 0.3, 2, 11);
        cfg.record_history = true;
        let stats = simulate(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stats.json");
        write_stats_json(&stats, &path).unwrap();
        assert_eq!(read_stats_json(&path).unwrap(), stats);

        let snap = snapshot_stats(&stats);
        write_stats_json(&snap, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(!text.contains("m_seq") && !text.contains("history"));
        assert_eq!(read_stats_json(&path).unwrap(), snap);
    }

    #[test]
    fn histogram_csv_round_trip() {
        let stats = simulate(&SimConfig::fixed(500, 0.0, 3, 2)).unwrap();
        let mut buf = Vec::new();
        write_histogram_csv(&stats, &mut buf).unwrap();
        assert!(buf.starts_with(b"k,count\n3,"));
        let back = read_histogram_csv(&buf[..]).unwrap();
        assert!(back.is_snapshot());
        assert_eq!(back.n(), stats.n());
        assert_eq!(back.degree_hist(), stats.degree_hist());
    }

    #[test]
    fn pmf_parsing() {
        let text = "# degrees\nk,prob\n1,0.25\n2 0.25\n4,0.5\n";
        let r = read_pmf_csv(text.as_bytes()).unwrap();
        assert_eq!(r.mu(), 2.75);
        assert!(read_pmf_csv("1,0.5\n2,0.4\n".as_bytes()).is_err());
        assert!(read_pmf_csv("1,abc\n".as_bytes()).is_err());
        assert!(read_pmf_csv("1,0.5,3\n".as_bytes()).is_err());
    }
}
