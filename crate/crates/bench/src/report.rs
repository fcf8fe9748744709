//! Report emission: traces, rank curves, significance and a summary, all a
//! pure function of the records.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{io_err, Result};
use crate::ranks::{cell_values, rank_curves, Facet, RankTable, FACETS};
use crate::records::{write_atomic, RunRecord};
use crate::stats::{friedman_test, holm, wilcoxon_signed_rank, FriedmanResult};
use crate::svg::line_plot;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub alpha: f64,
    /// Apply the Holm correction across Wilcoxon pairs.
    pub holm: bool,
    pub svg: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            holm: true,
            svg: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    pub a: String,
    pub b: String,
    pub n_nonzero: usize,
    pub w_plus: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub significant: bool,
    pub too_few: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Significance {
    pub step: usize,
    pub friedman: Option<FriedmanResult>,
    pub pairs: Vec<PairTest>,
}

/// Friedman over cells and pairwise Wilcoxon tests on best-so-far at a
/// 0-based `step`, for the optimizer facet.
pub fn significance(records: &[RunRecord], step: usize, options: &ReportOptions) -> Result<Significance> {
    let (groups, _, values) = cell_values(records, Facet::Optimizer)?;
    let at: Vec<Vec<f64>> = values.iter().map(|c| c.iter().map(|g| g[step]).collect()).collect();
    let friedman = if at.len() >= 2 && groups.len() >= 2 {
        Some(friedman_test(&at)?)
    } else {
        None
    };
    let mut pairs = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let xa: Vec<f64> = at.iter().map(|c| c[i]).collect();
            let xb: Vec<f64> = at.iter().map(|c| c[j]).collect();
            let w = wilcoxon_signed_rank(&xa, &xb)?;
            pairs.push(PairTest {
                a: groups[i].clone(),
                b: groups[j].clone(),
                n_nonzero: w.n_nonzero,
                w_plus: w.w_plus,
                p_value: w.p_value,
                p_adjusted: w.p_value,
                significant: false,
                too_few: w.too_few,
            });
        }
    }
    let adjusted = if options.holm {
        holm(&pairs.iter().map(|p| p.p_value).collect::<Vec<_>>())
    } else {
        pairs.iter().map(|p| p.p_value).collect()
    };
    for (p, a) in pairs.iter_mut().zip(adjusted) {
        p.p_adjusted = a;
        p.significant = !p.too_few && a < options.alpha;
    }
    Ok(Significance {
        step,
        friedman,
        pairs,
    })
}

fn rank_csv(t: &RankTable) -> String {
    let mut s = String::from("step,group,mean_rank,se\n");
    for step in 0..t.n_steps() {
        for (g, name) in t.groups.iter().enumerate() {
            writeln!(s, "{},{},{},{}", step + 1, csv_field(name), t.mean[step][g], t.se[step][g]).unwrap();
        }
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sorted_records(records: &[RunRecord]) -> Vec<&RunRecord> {
    let mut v: Vec<&RunRecord> = records.iter().collect();
    v.sort_by(|a, b| {
        let (x, y) = (a.spec(), b.spec());
        (&x.task, &x.label, x.seed).cmp(&(&y.task, &y.label, y.seed))
    });
    v
}

/// Writes `traces.csv`, `ranks_<facet>.csv`, `significance.csv`,
/// `summary.txt` and, optionally, `ranks_<facet>.svg` into `out_dir`.
/// Returns the written paths.
pub fn emit_report(records: &[RunRecord], out_dir: &Path, options: &ReportOptions) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: &str| -> Result<()> {
        let p = out_dir.join(name);
        write_atomic(&p, body.as_bytes())?;
        written.push(p);
        Ok(())
    };

    let mut traces = String::from("task,optimizer,seed,iter,y,best_y\n");
    for r in sorted_records(records) {
        let s = r.spec();
        for it in &r.iterations {
            writeln!(
                traces,
                "{},{},{},{},{},{}",
                csv_field(&s.task),
                csv_field(&s.label),
                s.seed,
                it.iter,
                it.y,
                it.best_y
            )
            .unwrap();
        }
    }
    put("traces.csv", &traces)?;

    let mut tables = Vec::new();
    for facet in FACETS {
        let t = rank_curves(records, *facet)?;
        // A facet with a single group carries no ranking information.
        if *facet != Facet::Optimizer && t.groups.len() < 2 {
            continue;
        }
        put(&format!("ranks_{}.csv", facet.id()), &rank_csv(&t))?;
        if options.svg {
            let series: Vec<(String, Vec<f64>)> = t
                .groups
                .iter()
                .enumerate()
                .map(|(g, name)| (name.clone(), t.mean.iter().map(|m| m[g]).collect()))
                .collect();
            let svg = line_plot(&format!("Mean rank by {}", facet.id()), "evaluations", "mean rank", &series);
            put(&format!("ranks_{}.svg", facet.id()), &svg)?;
        }
        tables.push(t);
    }

    let opt_table = &tables[0];
    let last = opt_table.n_steps() - 1;
    let sig = significance(records, last, options)?;
    let mut csv = String::from("a,b,n_nonzero,w_plus,p_value,p_adjusted,significant,too_few\n");
    for p in &sig.pairs {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            csv_field(&p.a),
            csv_field(&p.b),
            p.n_nonzero,
            p.w_plus,
            p.p_value,
            p.p_adjusted,
            p.significant,
            p.too_few
        )
        .unwrap();
    }
    put("significance.csv", &csv)?;

    let mut summary = String::new();
    writeln!(
        summary,
        "{} runs, {} cells, {} steps",
        records.len(),
        opt_table.cells.len(),
        opt_table.n_steps()
    )
    .unwrap();
    match &sig.friedman {
        Some(f) => writeln!(
            summary,
            "Friedman at step {}: statistic {:.4}, df {}, p {:.4e}{}",
            last + 1,
            f.statistic,
            f.df,
            f.p_value,
            f.p_exact.map(|p| format!(" (exact {p:.4e})")).unwrap_or_default()
        )
        .unwrap(),
        None => writeln!(summary, "Friedman: not enough cells or optimizers").unwrap(),
    }
    writeln!(summary).unwrap();
    let mut order: Vec<usize> = (0..opt_table.groups.len()).collect();
    order.sort_by(|&a, &b| {
        opt_table.final_mean()[a]
            .total_cmp(&opt_table.final_mean()[b])
            .then_with(|| opt_table.groups[a].cmp(&opt_table.groups[b]))
    });
    let width = opt_table.groups.iter().map(|g| g.len()).max().unwrap_or(9).max(9);
    writeln!(summary, "{:<width$}  mean rank     se", "optimizer").unwrap();
    for g in order {
        writeln!(
            summary,
            "{:<width$}  {:>9.3}  {:>5.3}",
            opt_table.groups[g],
            opt_table.final_mean()[g],
            opt_table.se[last][g]
        )
        .unwrap();
    }
    let connected: Vec<String> = sig
        .pairs
        .iter()
        .filter(|p| !p.significant)
        .map(|p| format!("{} ~ {}", p.a, p.b))
        .collect();
    if !connected.is_empty() {
        writeln!(summary, "\nnot significantly different (alpha {}):", options.alpha).unwrap();
        for c in connected {
            writeln!(summary, "  {c}").unwrap();
        }
    }
    put("summary.txt", &summary)?;
    Ok(written)
}
