//! Comma-separated reports. The first line of every report is a comment of
//! the form `# schema_version: 1, kind: <kind>`; the CSV header follows.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::costing::{CostRow, TrashRow, TRASH_THRESHOLD};
use crate::selection::{Calibration, ComparisonTable};
use crate::survival::AftModel;
use crate::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Column headers of the family comparison table.
pub const COMPARE_HEADER: [&str; 9] = ["model", "AIC", "BIC", "Conc", "Test Conc", "ICI", "Test ICI", "E50", "Test E50"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Compare,
    Cost,
    CalibrationCurve,
    Coefficients,
    Trash,
}

impl ReportKind {
    pub const ALL: [ReportKind; 5] = [
        ReportKind::Compare,
        ReportKind::Cost,
        ReportKind::CalibrationCurve,
        ReportKind::Coefficients,
        ReportKind::Trash,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Compare => "compare",
            ReportKind::Cost => "cost",
            ReportKind::CalibrationCurve => "calibration_curve",
            ReportKind::Coefficients => "coefficients",
            ReportKind::Trash => "trash",
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "calibration" => Ok(ReportKind::CalibrationCurve),
            _ => ReportKind::ALL
                .into_iter()
                .find(|k| k.name() == s)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown report kind {s:?}"))),
        }
    }
}

/// The data behind one report.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Compare(&'a ComparisonTable),
    Cost(&'a [CostRow]),
    CalibrationCurve(&'a Calibration),
    Coefficients(&'a [AftModel]),
    Trash(&'a [TrashRow]),
}

impl Report<'_> {
    pub fn kind(&self) -> ReportKind {
        match self {
            Report::Compare(_) => ReportKind::Compare,
            Report::Cost(_) => ReportKind::Cost,
            Report::CalibrationCurve(_) => ReportKind::CalibrationCurve,
            Report::Coefficients(_) => ReportKind::Coefficients,
            Report::Trash(_) => ReportKind::Trash,
        }
    }

    fn rows(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let num = |v: f64| v.to_string();
        match self {
            Report::Compare(table) => {
                let rows = table
                    .rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.family.display_name().to_string()];
                        match &r.metrics {
                            Some(m) => row.extend(
                                [m.aic, m.bic, m.concordance, m.test_concordance, m.ici, m.test_ici, m.e50, m.test_e50]
                                    .map(num),
                            ),
                            None => row.extend(std::iter::repeat_n("NA".to_string(), 8)),
                        }
                        row
                    })
                    .collect();
                (COMPARE_HEADER.to_vec(), rows)
            }
            Report::Cost(rows) => {
                let header = vec![
                    "trial_id",
                    "profile",
                    "t_train_per_sample",
                    "t_predict_per_sample",
                    "t_attack_per_sample",
                    "train_cost_usd",
                    "train_energy_joules",
                    "predict_cost_usd",
                    "predict_energy_joules",
                    "attack_cost_usd",
                    "attack_energy_joules",
                    "expected_survival_time",
                    "trash_score",
                    "verdict",
                ];
                let rows = rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.trial_id.to_string(), r.profile.clone()];
                        row.extend(
                            [
                                r.t_train_per_sample,
                                r.t_predict_per_sample,
                                r.t_attack_per_sample,
                                r.train_cost_usd,
                                r.train_energy_joules,
                                r.predict_cost_usd,
                                r.predict_energy_joules,
                                r.attack_cost_usd,
                                r.attack_energy_joules,
                                r.expected_survival_time,
                                r.trash_score,
                            ]
                            .map(num),
                        );
                        row.push(r.verdict.to_string());
                        row
                    })
                    .collect();
                (header, rows)
            }
            Report::CalibrationCurve(cal) => {
                let rows = cal
                    .curve
                    .iter()
                    .map(|&(p, c)| vec![num(cal.t0), num(p), num(c)])
                    .collect();
                (vec!["t0", "predicted", "calibrated"], rows)
            }
            Report::Coefficients(models) => {
                let mut rows = Vec::new();
                for m in *models {
                    let (_, raw) = m.raw_coefficients();
                    for ((name, theta), raw) in m.schema.iter().zip(&m.coefficients).zip(raw) {
                        rows.push(vec![m.family.to_string(), name.clone(), num(*theta), num(raw)]);
                    }
                }
                (vec!["model", "covariate", "coefficient", "raw_coefficient"], rows)
            }
            Report::Trash(rows) => {
                let rows = rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.trial_id.to_string(),
                            num(r.t_train_per_sample),
                            num(r.expected_survival_time),
                            num(r.trash_score),
                            num(TRASH_THRESHOLD),
                            r.verdict.to_string(),
                        ]
                    })
                    .collect();
                let header = vec![
                    "trial_id",
                    "t_train_per_sample",
                    "expected_survival_time",
                    "trash_score",
                    "threshold",
                    "verdict",
                ];
                (header, rows)
            }
        }
    }
}

/// Write `report` as CSV, preceded by its schema comment line.
pub fn write_report(report: &Report, out: &mut dyn Write) -> Result<()> {
    let (header, rows) = report.rows();
    let mut buf = format!("# schema_version: {REPORT_SCHEMA_VERSION}, kind: {}\n", report.kind()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&header)?;
        for row in &rows {
            w.write_record(row)?;
        }
        w.flush().map_err(csv::Error::from)?;
    }
    out.write_all(&buf).map_err(csv::Error::from)?;
    Ok(())
}

/// Write `report` to `path`, replacing any previous file.
pub fn render_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_report(report, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costing::trash_report;
    use crate::selection::compare_families;
    use crate::survival::{build_survival_dataset, fit_aft, Family, FitOptions};
    use crate::types::tests::valid_record;
    use crate::types::TrialRecord;

    fn trials(n: u64) -> Vec<TrialRecord> {
        (0..n)
            .map(|i| {
                let mut t = valid_record();
                t.trial_id = i;
                t.random_state = i % 4;
                t.epsilon = [0.2, 0.4, 0.6, 0.8, 1.0][(i % 5) as usize];
                t.acc_adv = ((i * 7) % 60) as f64 / 100.0;
                t.t_attack_total = 0.01 + 0.003 * ((i * 3) % 11) as f64;
                t.t_train_total = 1.0 + (i % 6) as f64;
                t.acc_benign = 0.9 + ((i * 5) % 10) as f64 / 100.0;
                t.hyperparams.batch_size = 8 << (i % 4);
                t.hyperparams.epochs = 1 + i % 7;
                t.hyperparams.learning_rate = 0.001 * (1 + i % 9) as f64;
                t
            })
            .collect()
    }

    fn render(report: &Report) -> String {
        let mut out = Vec::new();
        write_report(report, &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn compare_report_has_the_table_header() {
        let table = compare_families(&trials(40), 0.75, 7).unwrap();
        let text = render(&Report::Compare(&table));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema_version: 1, kind: compare");
        assert_eq!(lines[1], "model,AIC,BIC,Conc,Test Conc,ICI,Test ICI,E50,Test E50");
        assert_eq!(lines.len(), 2 + 3);
        assert!(lines[2].starts_with("Weibull,"));
    }

    #[test]
    fn coefficients_include_random_state() {
        let data = build_survival_dataset(&trials(30)).unwrap();
        let model = fit_aft(&data, Family::LogLogistic, &FitOptions::default()).unwrap();
        let text = render(&Report::Coefficients(std::slice::from_ref(&model)));
        assert!(text.lines().any(|l| l.starts_with("log_logistic,random_state,")));
        assert_eq!(text.lines().count(), 2 + model.schema.len());
    }

    #[test]
    fn trash_report_has_threshold_column() {
        let t = trials(30);
        let data = build_survival_dataset(&t).unwrap();
        let model = fit_aft(&data, Family::Weibull, &FitOptions::default()).unwrap();
        let rows = trash_report(&t, &model).unwrap();
        let text = render(&Report::Trash(&rows));
        let lines: Vec<&str> = text.lines().collect();
        let header: Vec<&str> = lines[1].split(',').collect();
        let col = header.iter().position(|h| *h == "threshold").unwrap();
        assert_eq!(lines.len(), 2 + 30);
        assert!(lines[2..].iter().all(|l| l.split(',').nth(col) == Some("1")));
    }

    #[test]
    fn calibration_curve_and_file_output() {
        let cal = Calibration {
            t0: 2.0,
            ici: 0.1,
            e50: 0.05,
            curve: vec![(0.1, 0.12), (0.5, 0.45)],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cal.csv");
        render_report(&Report::CalibrationCurve(&cal), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# schema_version: 1, kind: calibration_curve\nt0,predicted,calibrated\n2,0.1,0.12\n2,0.5,0.45\n");
    }

    #[test]
    fn kinds_parse() {
        for k in ReportKind::ALL {
            assert_eq!(k.name().parse::<ReportKind>().unwrap(), k);
        }
        assert_eq!("calibration".parse::<ReportKind>().unwrap(), ReportKind::CalibrationCurve);
        assert!(matches!("histogram".parse::<ReportKind>(), Err(Error::InvalidArgument(_))));
    }
}
