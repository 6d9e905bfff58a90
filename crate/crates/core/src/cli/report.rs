use std::fmt::Write;

use serde::{Deserialize, Serialize};

/// Training outcome written by the trainer, one file per architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub arch_id: String,
    pub dataset: String,
    pub epochs: u32,
    pub train_acc: Vec<f64>,
    pub test_acc: Vec<f64>,
    pub size: u64,
    pub duration_s: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl MetricsRecord {
    /// Problems that make the record unusable for ranking.
    pub fn check(&self) -> Result<(), String> {
        if let Some(e) = &self.error {
            return Err(format!("trainer reported: {e}"));
        }
        let n = self.epochs as usize;
        if self.train_acc.len() != n || self.test_acc.len() != n {
            return Err(format!(
                "{} epochs but {} train and {} test accuracies",
                n,
                self.train_acc.len(),
                self.test_acc.len()
            ));
        }
        if self.train_acc.iter().chain(&self.test_acc).any(|a| !(0.0..=1.0).contains(a)) {
            return Err("accuracy outside [0, 1]".into());
        }
        Ok(())
    }

    /// Test accuracy after the last epoch.
    pub fn final_accuracy(&self) -> Option<f64> {
        self.test_acc.last().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RankKey {
    Accuracy,
    Efficiency,
}

/// Accuracy (a fraction) per million weights.
pub fn efficiency(accuracy: f64, size: u64) -> f64 {
    accuracy * 1e6 / size as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderboardEntry {
    pub arch_id: String,
    pub accuracy: f64,
    pub size: u64,
    pub efficiency: f64,
}

impl LeaderboardEntry {
    pub fn new(arch_id: impl Into<String>, accuracy: f64, size: u64) -> Self {
        LeaderboardEntry { arch_id: arch_id.into(), accuracy, size, efficiency: efficiency(accuracy, size) }
    }
}

/// Entries sorted by `key`, best first; ties keep arch id order. Records
/// without a final accuracy or with zero size are left out.
pub fn leaderboard(records: &[MetricsRecord], key: RankKey) -> Vec<LeaderboardEntry> {
    let mut rows: Vec<LeaderboardEntry> = records
        .iter()
        .filter(|r| r.size > 0)
        .filter_map(|r| r.final_accuracy().map(|a| LeaderboardEntry::new(r.arch_id.clone(), a, r.size)))
        .collect();
    rows.sort_by(|a, b| {
        let (x, y) = match key {
            RankKey::Accuracy => (a.accuracy, b.accuracy),
            RankKey::Efficiency => (a.efficiency, b.efficiency),
        };
        y.total_cmp(&x).then_with(|| a.arch_id.cmp(&b.arch_id))
    });
    rows
}

/// `(p, n)` for p in 0..=100: number of architectures whose accuracy is
/// below p percent.
pub fn accuracy_distribution(rows: &[LeaderboardEntry]) -> Vec<(u32, usize)> {
    (0..=100).map(|p| (p, rows.iter().filter(|r| r.accuracy * 100.0 < p as f64).count())).collect()
}

pub fn leaderboard_text(rows: &[LeaderboardEntry]) -> String {
    let width = rows.iter().map(|r| r.arch_id.len()).max().unwrap_or(0).max(4);
    let mut out = format!("{:>4}  {:<width$}  {:>9}  {:>12}  {:>10}\n", "rank", "arch", "accuracy", "size", "efficiency");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>8.2}%  {:>12}  {:>10.2}",
            i + 1,
            r.arch_id,
            r.accuracy * 100.0,
            r.size,
            r.efficiency
        );
    }
    out
}

pub fn leaderboard_csv(rows: &[LeaderboardEntry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "arch_id", "accuracy", "size", "efficiency"]).expect("in-memory write");
    for (i, r) in rows.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            r.arch_id.clone(),
            r.accuracy.to_string(),
            r.size.to_string(),
            r.efficiency.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn distribution_csv(dist: &[(u32, usize)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["accuracy_pct", "architectures_below"]).expect("in-memory write");
    for (p, n) in dist {
        w.write_record([p.to_string(), n.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, acc: &[f64], size: u64) -> MetricsRecord {
        MetricsRecord {
            arch_id: id.into(),
            dataset: "mnist".into(),
            epochs: acc.len() as u32,
            train_acc: acc.to_vec(),
            test_acc: acc.to_vec(),
            size,
            duration_s: 1.0,
            seed: 0,
            error: None,
        }
    }

    #[test]
    fn ranking() {
        let rs = [rec("a", &[0.5, 0.9], 1000), rec("b", &[0.95], 100_000), rec("c", &[], 10)];
        let by_acc = leaderboard(&rs, RankKey::Accuracy);
        assert_eq!(by_acc.iter().map(|r| r.arch_id.as_str()).collect::<Vec<_>>(), ["b", "a"]);
        let by_eff = leaderboard(&rs, RankKey::Efficiency);
        assert_eq!(by_eff[0].arch_id, "a");
        assert!((by_eff[0].efficiency - 900.0).abs() < 1e-9);
    }

    #[test]
    fn distribution_counts() {
        let rows = [LeaderboardEntry::new("a", 0.3, 1), LeaderboardEntry::new("b", 0.75, 1)];
        let d = accuracy_distribution(&rows);
        assert_eq!(d.len(), 101);
        assert_eq!(d[30], (30, 0));
        assert_eq!(d[31], (31, 1));
        assert_eq!(d[76], (76, 2));
        assert_eq!(d[100], (100, 2));
    }

    #[test]
    fn record_checks() {
        assert!(rec("a", &[0.1, 0.2], 5).check().is_ok());
        let mut r = rec("a", &[0.1], 5);
        r.epochs = 2;
        assert!(r.check().is_err());
        assert!(rec("a", &[1.5], 5).check().is_err());
    }
}
