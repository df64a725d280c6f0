//! CSV datasets for the four figures, the sweep summary, and gnuplot
//! scripts that read them.
//!
//! Floats are written with 17 significant digits in scientific notation,
//! rows are `\n` terminated and ordered by realization, then partition,
//! then `βλ`, so identical sweeps produce identical bytes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::invalid;
use crate::experiments::{decay_dataset, SweepOutcome, SweepSummary};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FigureId {
    pub const ALL: [FigureId; 4] = [FigureId::Fig1, FigureId::Fig2, FigureId::Fig3, FigureId::Fig4];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid(format!("unknown figure `{s}` (expected fig1, fig2, fig3 or fig4)")))
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

/// The dataset behind one figure. `fig2` is recomputed for the configured
/// realization, superposing every partition.
pub fn emit_figure_data(outcome: &SweepOutcome, which: FigureId) -> Result<Table> {
    if outcome.realizations.is_empty() {
        return Err(invalid("no realizations to report"));
    }
    let table = match which {
        FigureId::Fig1 => {
            let mut t = Table::new(&["realization", "N", "ratio", "reference_inv_sqrtN"]);
            for r in &outcome.realizations {
                for p in &r.partitions {
                    t.push(vec![
                        r.index.to_string(),
                        p.group_size.to_string(),
                        format_float(p.ratio),
                        format_float(p.scaling_bound()),
                    ]);
                }
            }
            t
        }
        FigureId::Fig2 => {
            let mut t = Table::new(&["j_index", "x", "weighted_density", "envelope"]);
            for point in decay_dataset(&outcome.config, outcome.config.fig2_realization)? {
                t.push(vec![
                    point.j_index.to_string(),
                    format_float(point.x),
                    format_float(point.weighted_density),
                    format_float(point.envelope),
                ]);
            }
            t
        }
        FigureId::Fig3 | FigureId::Fig4 => {
            let last = if which == FigureId::Fig3 { "dist" } else { "beta_spec_over_beta" };
            let mut t = Table::new(&["realization", "N", "beta_lambda", last]);
            for r in &outcome.realizations {
                for p in &r.partitions {
                    for c in &p.cells {
                        let value = if which == FigureId::Fig3 { c.distance } else { c.beta_spec_ratio };
                        t.push(vec![
                            r.index.to_string(),
                            p.group_size.to_string(),
                            format_float(c.beta_lambda),
                            format_float(value),
                        ]);
                    }
                }
            }
            t
        }
    };
    Ok(table)
}

/// One row per aggregate: `quantity,N,beta_lambda,value`, with empty
/// `N`/`beta_lambda` where the aggregate is global.
pub fn summary_table(summary: &SweepSummary) -> Table {
    let mut t = Table::new(&["quantity", "N", "beta_lambda", "value"]);
    let global = |t: &mut Table, name: &str, value: String| {
        t.push(vec![name.to_string(), String::new(), String::new(), value]);
    };
    global(&mut t, "realizations", summary.realizations.to_string());
    global(&mut t, "level_width_over_lambda_mean", format_float(summary.level_width_mean));
    global(&mut t, "level_width_over_lambda_std", format_float(summary.level_width_std));
    for &(n, ratio) in &summary.mean_ratio {
        t.push(vec!["mean_ratio".into(), n.to_string(), String::new(), format_float(ratio)]);
    }
    for c in &summary.cells {
        for (name, value) in [
            ("mean_dist", c.mean_distance),
            ("mean_beta_spec_over_beta", c.mean_beta_spec_ratio),
            ("max_beta_spec_over_beta", c.max_beta_spec_ratio),
        ] {
            t.push(vec![
                name.into(),
                c.group_size.to_string(),
                format_float(c.beta_lambda),
                format_float(value),
            ]);
        }
    }
    global(&mut t, "scaling_violations", summary.scaling_violations.to_string());
    global(&mut t, "beta_spec_exceedances", summary.beta_spec_exceedances.to_string());
    global(&mut t, "dist_monotone_fraction", format_float(summary.distance_monotone_fraction()));
    global(&mut t, "decay_passes", summary.decay_passes.to_string());
    global(&mut t, "max_second_moment_residual", format_float(summary.max_second_moment_residual));
    global(&mut t, "max_dual_path_residual", format_float(summary.max_dual_path_residual));
    t
}

fn plot_script(which: FigureId) -> &'static str {
    match which {
        FigureId::Fig1 => {
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set xlabel 'N'\n\
             set ylabel 'I/dE'\n\
             set xrange [0.5:4.5]\n\
             set terminal pngcairo size 800,600\n\
             set output 'fig1.png'\n\
             plot 'fig1.csv' using 2:3 with points pt 7 ps 0.5 title 'realizations', \\\n     \
             1/sqrt(x) with lines title '1/sqrt(N)'\n"
        }
        FigureId::Fig2 => {
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set xlabel 'x'\n\
             set ylabel 'w eta'\n\
             set xrange [-4:4]\n\
             set terminal pngcairo size 800,600\n\
             set output 'fig2.png'\n\
             plot 'fig2.csv' using 2:3 with dots title 'w_j(mu) eta', \\\n     \
             (abs(x) > 1 ? 0.25*exp(-0.5*abs(x)) : 1/0) with lines title '0.25 exp(-0.5|x|)'\n"
        }
        FigureId::Fig3 => {
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set xlabel 'beta lambda'\n\
             set ylabel 'dist'\n\
             set terminal pngcairo size 800,600\n\
             set output 'fig3.png'\n\
             plot for [n in '1 2 4'] 'fig3.csv' using 3:($2 == n+0 ? $4 : 1/0) with points title 'N = '.n\n"
        }
        FigureId::Fig4 => {
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set xlabel 'beta lambda'\n\
             set ylabel 'beta_spec / beta'\n\
             set terminal pngcairo size 800,600\n\
             set output 'fig4.png'\n\
             plot for [n in '1 2 4'] 'fig4.csv' using 3:($2 == n+0 ? $4 : 1/0) with points title 'N = '.n\n"
        }
    }
}

/// Writes `fig1..fig4.csv`, `summary.csv` and `fig1..fig4.gp` into `dir`,
/// returning the paths written.
pub fn write_outputs(outcome: &SweepOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for which in FigureId::ALL {
        let path = dir.join(format!("{which}.csv"));
        emit_figure_data(outcome, which)?.write_csv(&path)?;
        written.push(path);
    }
    let path = dir.join("summary.csv");
    summary_table(&outcome.summary).write_csv(&path)?;
    written.push(path);
    for which in FigureId::ALL {
        let path = dir.join(format!("{which}.gp"));
        fs::write(&path, plot_script(which))?;
        written.push(path);
    }
    Ok(written)
}
