//! File formats: episode CSV, JSON summaries, Pareto plot data and the
//! ablation table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::HarnessError;
use crate::harness::{AblationRow, EpisodeResult, ParetoPoint, ParetoSweep, PlannerSummary};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(io_err(path))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// One row per episode: planner, problem, seed, episode, V_R, V_C_1..K,
/// steps, wall_ms.
pub fn episodes_csv(results: &[EpisodeResult]) -> Result<String, HarnessError> {
    let k = results.iter().map(|r| r.cost_returns.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "planner".to_string(),
        "problem".into(),
        "seed".into(),
        "episode".into(),
        "V_R".into(),
    ];
    header.extend((1..=k).map(|j| format!("V_C_{j}")));
    header.extend(["steps".to_string(), "wall_ms".into()]);
    w.write_record(&header)?;
    for r in results {
        let mut row = vec![
            r.planner.clone(),
            r.problem.clone(),
            r.seed.to_string(),
            r.episode.to_string(),
            r.reward_return.to_string(),
        ];
        row.extend((0..k).map(|j| r.cost_returns.get(j).map_or(String::new(), f64::to_string)));
        row.extend([r.steps.to_string(), r.wall_ms.to_string()]);
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_episodes_csv(path: &Path, results: &[EpisodeResult]) -> Result<(), HarnessError> {
    write_text(path, &episodes_csv(results)?)
}

pub fn write_summary_json(path: &Path, table: &[PlannerSummary]) -> Result<(), HarnessError> {
    write_json(path, table)
}

/// Human-readable `mean ± SEM` grid.
pub fn format_table(table: &[PlannerSummary]) -> String {
    let mut out = String::new();
    let k = table.iter().map(|s| s.stats.costs.len()).max().unwrap_or(0);
    let _ = write!(out, "{:<12} {:<10} {:>5} {:>22}", "planner", "problem", "n", "V_R");
    for j in 1..=k {
        let _ = write!(out, " {:>22}", format!("V_C_{j}"));
    }
    out.push('\n');
    for s in table {
        let _ = write!(
            out,
            "{:<12} {:<10} {:>5} {:>22}",
            s.planner,
            s.problem,
            s.stats.count,
            format!("{:.3} ± {:.3}", s.stats.reward.mean, s.stats.reward.sem)
        );
        for c in &s.stats.costs {
            let _ = write!(out, " {:>22}", format!("{:.4} ± {:.4}", c.mean, c.sem));
        }
        out.push('\n');
    }
    out
}

fn point_dat(p: &ParetoPoint) -> String {
    let mut out = String::from("# cost_return reward_return\n");
    for (c, r) in &p.episodes {
        let _ = writeln!(out, "{c} {r}");
    }
    out
}

fn summary_line(p: &ParetoPoint) -> String {
    let lambda = p.lambda.map_or("constrained".to_string(), |l| l.to_string());
    format!(
        "{lambda} {} {} {} {}",
        p.stats.costs[0].mean, p.stats.costs[0].sem, p.stats.reward.mean, p.stats.reward.sem
    )
}

const GNUPLOT: &str = "\
set xlabel 'mean discounted cost'
set ylabel 'mean discounted reward'
set key bottom right
plot 'summary.dat' using 2:4:3:5 with xyerrorbars title 'scalarized sweep', \\
     'constrained.dat' index 0 using 2:4:3:5 with xyerrorbars pointtype 7 title 'constrained'
";

/// Writes `lambda_<λ>.dat` per sweep point, `constrained.dat`,
/// `summary.dat` and a gnuplot script into `dir`. Returns written paths.
pub fn write_pareto(dir: &Path, sweep: &ParetoSweep) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let mut summary = String::from("# lambda mean_cost sem_cost mean_reward sem_reward\n");
    for p in &sweep.sweep {
        let path = dir.join(format!("lambda_{}.dat", p.lambda.unwrap_or(f64::NAN)));
        write_text(&path, &point_dat(p))?;
        written.push(path);
        summary.push_str(&summary_line(p));
        summary.push('\n');
    }
    let path = dir.join("summary.dat");
    write_text(&path, &summary)?;
    written.push(path);
    let path = dir.join("constrained.dat");
    let text = format!(
        "# lambda mean_cost sem_cost mean_reward sem_reward\n{}\n# cost_return reward_return\n\n\n{}",
        summary_line(&sweep.constrained),
        point_dat(&sweep.constrained).trim_start_matches("# cost_return reward_return\n")
    );
    write_text(&path, &text)?;
    written.push(path);
    let path = dir.join("pareto.gp");
    write_text(&path, GNUPLOT)?;
    written.push(path);
    let path = dir.join("pareto.json");
    write_json(&path, sweep)?;
    written.push(path);
    Ok(written)
}

/// Three-row table with the (visit fraction, Q_C, ΔQ_λ) triple per action.
pub fn format_ablation(rows: &[AblationRow]) -> String {
    let mut out = String::new();
    let Some(first) = rows.first() else {
        return out;
    };
    let _ = write!(out, "{:<14}", "mode");
    for metric in ["N/N0", "Q_c", "dQ_lambda"] {
        for a in &first.actions {
            let _ = write!(out, " {:>12}", format!("{metric}({a:+})"));
        }
    }
    let _ = write!(out, " {:>7} {:>8}", "action", "lambda");
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{:<14}", r.mode.name());
        for v in r.visit_fraction.iter().chain(&r.cost_value).chain(&r.lagrangian_gap) {
            let _ = write!(out, " {v:>12.3}");
        }
        let _ = writeln!(out, " {:>7} {:>8.3}", format!("{:+}", r.modal_action), r.mean_lambda);
    }
    out
}

/// Line-oriented dump of root statistics:
/// `mode search action visits Q Q_C c_bar Q_lambda`.
pub fn format_tree_dump(rows: &[AblationRow]) -> String {
    let mut out = String::from("# mode search action visits Q Q_C c_bar Q_lambda\n");
    for r in rows {
        for d in &r.dump {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {}",
                r.mode.name(),
                d.search,
                d.action,
                d.visits,
                d.reward_value,
                d.cost_value,
                d.immediate_cost,
                d.lagrangian_value
            );
        }
    }
    out
}

pub fn write_ablation(dir: &Path, rows: &[AblationRow]) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(dir)?;
    let table = dir.join("ablation.txt");
    write_text(&table, &format_ablation(rows))?;
    let json = dir.join("ablation.json");
    #[derive(Serialize)]
    struct Row<'a> {
        mode: &'static str,
        actions: &'a [i32],
        visit_fraction: &'a [f64],
        cost_value: &'a [f64],
        lagrangian_gap: &'a [f64],
        chosen: &'a [(i32, usize)],
        modal_action: i32,
        mean_lambda: f64,
    }
    let summary: Vec<Row<'_>> = rows
        .iter()
        .map(|r| Row {
            mode: r.mode.name(),
            actions: &r.actions,
            visit_fraction: &r.visit_fraction,
            cost_value: &r.cost_value,
            lagrangian_gap: &r.lagrangian_gap,
            chosen: &r.chosen,
            modal_action: r.modal_action,
            mean_lambda: r.mean_lambda,
        })
        .collect();
    write_json(&json, &summary)?;
    let dump = dir.join("tree_dump.txt");
    write_text(&dump, &format_tree_dump(rows))?;
    Ok(vec![table, json, dump])
}
