//! Parameter sweeps over `(rho, beta, a)` producing CSV or JSON-lines tables.
//!
//! Every table keeps one row per input cell in grid order; a cell that fails
//! is still emitted, with empty values and a non-`ok` status.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aoi::{log_objective_normalized, TradeoffWeight};
use crate::error::{Error, Result};
use crate::optimize::{asymptotic_root, maximize_objective, OptimResult, KAUL_YATES_RHO};
use crate::par::Exec;

/// Slack allowed above the AoI-minimizing load before a cell is flagged.
pub const CEILING_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    ObjectiveCurve,
    RhoStarVsBeta,
    FStarVsA,
    RhoStarVsA,
    AsymptoteCurve,
}

impl OutputKind {
    pub fn figure_id(self) -> &'static str {
        match self {
            OutputKind::ObjectiveCurve => "fig1",
            OutputKind::RhoStarVsBeta => "fig2",
            OutputKind::FStarVsA => "fig3",
            OutputKind::RhoStarVsA => "fig4",
            OutputKind::AsymptoteCurve => "asymptote",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub rho_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub a_values: Vec<f64>,
    pub mu: f64,
    pub output_kind: OutputKind,
}

/// `min, min + step, ...` up to `max` inclusive, rounded to 12 decimals so
/// that e.g. `0.15` prints as `0.15`.
pub fn stepped(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !min.is_finite() || !max.is_finite() || step.is_nan() || step <= 0.0 || max < min {
        return Err(Error::domain(format!(
            "bad axis min={min} max={max} step={step}"
        )));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((min + step * i as f64) * 1e12).round() / 1e12)
        .collect())
}

/// `n` log-spaced points from `min` to `max` inclusive.
pub fn log_spaced(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) || n == 0 {
        return Err(Error::domain(format!(
            "bad log axis min={min} max={max} n={n}"
        )));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    let (l0, l1) = (min.log10(), max.log10());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                max
            } else {
                10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64)
            }
        })
        .collect())
}

impl SweepGrid {
    /// The default grids: ρ ∈ [0.01, 0.99] step 0.005, β ∈ {0.05, …, 1}
    /// step 0.05, a log-spaced in [1e-4, 1e2] with 50 points (`a = 1` for the
    /// objective curves).
    pub fn default_for(kind: OutputKind) -> Self {
        let a_values = match kind {
            OutputKind::ObjectiveCurve => vec![1.0],
            _ => log_spaced(1e-4, 1e2, 50).expect("valid default"),
        };
        Self {
            rho_values: stepped(0.01, 0.99, 0.005).expect("valid default"),
            beta_values: stepped(0.05, 1.0, 0.05).expect("valid default"),
            a_values,
            mu: 1.0,
            output_kind: kind,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn axis(name: &str, xs: &[f64], ok: impl Fn(f64) -> bool) -> Result<()> {
            if xs.is_empty() {
                return Err(Error::domain(format!("{name} grid is empty")));
            }
            if let Some(x) = xs.iter().find(|x| !ok(**x)) {
                return Err(Error::domain(format!("{name} value {x} out of range")));
            }
            if xs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::domain(format!(
                    "{name} grid must be strictly increasing"
                )));
            }
            Ok(())
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::domain(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        axis("a", &self.a_values, |a| a > 0.0 && a.is_finite())?;
        if self.output_kind != OutputKind::AsymptoteCurve {
            axis("beta", &self.beta_values, |b| b > 0.0 && b <= 1.0)?;
        }
        if self.output_kind == OutputKind::ObjectiveCurve {
            axis("rho", &self.rho_values, |r| r > 0.0 && r < 1.0)?;
        }
        Ok(())
    }

    /// First 16 hex digits of SHA-256 over the grid's JSON form.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_vec(self).expect("grid serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    /// `<figure_id>_<hash>` plus the format extension.
    pub fn file_name(&self, part: &str, format: Format) -> String {
        let ext = match format {
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
        };
        format!("{}_{}.{ext}", part, self.hash_hex())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table<R> {
    pub rows: Vec<R>,
}

/// Object-safe table writer so sweeps of different shapes share one output path.
pub trait TableWrite {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()>;
    fn write_jsonl(&self, out: &mut dyn Write) -> Result<()>;

    fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::JsonLines => self.write_jsonl(out),
        }
    }
}

impl<R: Serialize> TableWrite for Table<R> {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_jsonl(&self, out: &mut dyn Write) -> Result<()> {
        for r in &self.rows {
            serde_json::to_writer(&mut *out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

const OK: &str = "ok";

fn status_of(r: &Result<OptimResult>) -> String {
    match r {
        Ok(o) if o.converged => OK.to_string(),
        Ok(_) => "not_converged".to_string(),
        Err(e) => e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub beta: f64,
    pub a: f64,
    pub rho: f64,
    pub f: Option<f64>,
    pub status: String,
}

/// Maximum of one objective curve: the best grid point and the refined optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMaximumRow {
    pub beta: f64,
    pub a: f64,
    pub rho_argmax_grid: Option<f64>,
    pub f_max_grid: Option<f64>,
    pub rho_star: Option<f64>,
    pub f_star: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveCurves {
    pub curves: Table<CurveRow>,
    pub maxima: Table<CurveMaximumRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoStarBetaRow {
    pub a: f64,
    pub beta: f64,
    pub rho_star: Option<f64>,
    /// `rho_star <= 0.531 + 1e-3`.
    pub below_ceiling: Option<bool>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FStarRow {
    pub beta: f64,
    pub a: f64,
    pub f_star: Option<f64>,
    pub rho_star: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoStarARow {
    pub beta: f64,
    pub a: f64,
    pub rho_star: Option<f64>,
    /// Limit of `rho_star` as `beta → 0⁺` for this `a`.
    pub rho_tilde: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteRow {
    pub a: f64,
    pub rho_tilde: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutput {
    ObjectiveCurves(ObjectiveCurves),
    RhoStarVsBeta(Table<RhoStarBetaRow>),
    FStarVsA(Table<FStarRow>),
    RhoStarVsA(Table<RhoStarARow>),
    Asymptote(Table<AsymptoteRow>),
}

impl SweepOutput {
    /// `(file-name prefix, table)` pairs.
    pub fn parts(&self) -> Vec<(String, &dyn TableWrite)> {
        match self {
            SweepOutput::ObjectiveCurves(t) => vec![
                (
                    OutputKind::ObjectiveCurve.figure_id().into(),
                    &t.curves as &dyn TableWrite,
                ),
                ("fig1_argmax".to_string(), &t.maxima),
            ],
            SweepOutput::RhoStarVsBeta(t) => {
                vec![(OutputKind::RhoStarVsBeta.figure_id().into(), t)]
            }
            SweepOutput::FStarVsA(t) => vec![(OutputKind::FStarVsA.figure_id().into(), t)],
            SweepOutput::RhoStarVsA(t) => vec![(OutputKind::RhoStarVsA.figure_id().into(), t)],
            SweepOutput::Asymptote(t) => vec![(OutputKind::AsymptoteCurve.figure_id().into(), t)],
        }
    }
}

fn weight(a: f64) -> Result<TradeoffWeight> {
    TradeoffWeight::new(a)
}

/// Sweep driver: service rate and execution strategy.
#[derive(Debug, Clone, Copy)]
pub struct Sweep {
    pub mu: f64,
    pub exec: Exec,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            mu: 1.0,
            exec: Exec::default(),
        }
    }
}

impl Sweep {
    pub fn new(mu: f64) -> Self {
        Self {
            mu,
            ..Self::default()
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn optimum(&self, beta: f64, a: f64) -> Result<OptimResult> {
        maximize_objective(beta, weight(a)?, self.mu)
    }

    /// Objective `f(ρ)` over `rho_grid` for each β, and the maximizer of each curve.
    pub fn fig1_objective_curves(
        &self,
        betas: &[f64],
        a: TradeoffWeight,
        rho_grid: &[f64],
    ) -> Result<ObjectiveCurves> {
        self.objective_curves(betas, &[a.get()], rho_grid)
    }

    fn objective_curves(
        &self,
        betas: &[f64],
        a_values: &[f64],
        rho_grid: &[f64],
    ) -> Result<ObjectiveCurves> {
        let cells: Vec<(f64, f64, f64)> = a_values
            .iter()
            .flat_map(|&a| {
                betas
                    .iter()
                    .flat_map(move |&b| rho_grid.iter().map(move |&r| (a, b, r)))
            })
            .collect();
        let log_mu = self.mu.ln();
        let curves: Vec<CurveRow> = self.exec.map(&cells, |&(a, beta, rho)| {
            let valid = rho > 0.0 && rho < 1.0 && beta > 0.0 && beta <= 1.0 && a > 0.0;
            CurveRow {
                beta,
                a,
                rho,
                f: valid.then(|| (log_objective_normalized(rho, beta, a) + a * log_mu).exp()),
                status: if valid {
                    OK.to_string()
                } else {
                    "domain error".to_string()
                },
            }
        });

        let pairs: Vec<(f64, f64)> = a_values
            .iter()
            .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
            .collect();
        let maxima = self.exec.map(&pairs, |&(a, beta)| {
            let rows = curves.iter().filter(|c| c.a == a && c.beta == beta);
            let best = rows.filter_map(|c| c.f.map(|f| (c.rho, f))).fold(
                None,
                |acc: Option<(f64, f64)>, (r, f)| match acc {
                    Some((_, bf)) if bf >= f => acc,
                    _ => Some((r, f)),
                },
            );
            let opt = self.optimum(beta, a);
            CurveMaximumRow {
                beta,
                a,
                rho_argmax_grid: best.map(|b| b.0),
                f_max_grid: best.map(|b| b.1),
                rho_star: opt.as_ref().ok().map(|o| o.rho_star),
                f_star: opt.as_ref().ok().map(|o| o.objective_at_star),
                status: status_of(&opt),
            }
        });

        Ok(ObjectiveCurves {
            curves: Table { rows: curves },
            maxima: Table { rows: maxima },
        })
    }

    /// Optimal load against β for each `a`.
    pub fn fig2_rho_star_vs_beta(
        &self,
        a_list: &[f64],
        beta_grid: &[f64],
    ) -> Table<RhoStarBetaRow> {
        let cells: Vec<(f64, f64)> = a_list
            .iter()
            .flat_map(|&a| beta_grid.iter().map(move |&b| (a, b)))
            .collect();
        let rows = self.exec.map(&cells, |&(a, beta)| {
            let opt = self.optimum(beta, a);
            let rho_star = opt.as_ref().ok().map(|o| o.rho_star);
            RhoStarBetaRow {
                a,
                beta,
                rho_star,
                below_ceiling: rho_star.map(|r| r <= KAUL_YATES_RHO + CEILING_SLACK),
                status: status_of(&opt),
            }
        });
        Table { rows }
    }

    /// Objective value at the optimum against `a` for each β.
    pub fn fig3_f_star_vs_a(&self, beta_list: &[f64], a_grid: &[f64]) -> Table<FStarRow> {
        let cells: Vec<(f64, f64)> = beta_list
            .iter()
            .flat_map(|&b| a_grid.iter().map(move |&a| (b, a)))
            .collect();
        let rows = self.exec.map(&cells, |&(beta, a)| {
            let opt = self.optimum(beta, a);
            FStarRow {
                beta,
                a,
                f_star: opt.as_ref().ok().map(|o| o.objective_at_star),
                rho_star: opt.as_ref().ok().map(|o| o.rho_star),
                status: status_of(&opt),
            }
        });
        Table { rows }
    }

    /// Optimal load against `a` for each β, next to the small-β limit.
    pub fn fig4_rho_star_vs_a(
        &self,
        beta_list: &[f64],
        a_grid: &[f64],
    ) -> Result<Table<RhoStarARow>> {
        let tildes = self
            .asymptote_curve(a_grid)?
            .rows
            .into_iter()
            .map(|r| r.rho_tilde)
            .collect::<Vec<_>>();
        let cells: Vec<(f64, usize)> = beta_list
            .iter()
            .flat_map(|&b| (0..a_grid.len()).map(move |i| (b, i)))
            .collect();
        let rows = self.exec.map(&cells, |&(beta, i)| {
            let opt = self.optimum(beta, a_grid[i]);
            RhoStarARow {
                beta,
                a: a_grid[i],
                rho_star: opt.as_ref().ok().map(|o| o.rho_star),
                rho_tilde: tildes[i],
                status: status_of(&opt),
            }
        });
        Ok(Table { rows })
    }

    /// Small-β limit of the optimal load for each `a`.
    pub fn asymptote_curve(&self, a_grid: &[f64]) -> Result<Table<AsymptoteRow>> {
        let rows = a_grid
            .iter()
            .map(|&a| {
                let r = asymptotic_root(weight(a)?);
                Ok(AsymptoteRow {
                    a,
                    rho_tilde: r.rho_tilde,
                    residual: r.residual,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Table { rows })
    }

    /// Runs the sweep selected by `grid.output_kind`.
    pub fn run(&self, grid: &SweepGrid) -> Result<SweepOutput> {
        grid.validate()?;
        let sweep = Sweep {
            mu: grid.mu,
            ..*self
        };
        Ok(match grid.output_kind {
            OutputKind::ObjectiveCurve => SweepOutput::ObjectiveCurves(sweep.objective_curves(
                &grid.beta_values,
                &grid.a_values,
                &grid.rho_values,
            )?),
            OutputKind::RhoStarVsBeta => SweepOutput::RhoStarVsBeta(
                sweep.fig2_rho_star_vs_beta(&grid.a_values, &grid.beta_values),
            ),
            OutputKind::FStarVsA => {
                SweepOutput::FStarVsA(sweep.fig3_f_star_vs_a(&grid.beta_values, &grid.a_values))
            }
            OutputKind::RhoStarVsA => SweepOutput::RhoStarVsA(
                sweep.fig4_rho_star_vs_a(&grid.beta_values, &grid.a_values)?,
            ),
            OutputKind::AsymptoteCurve => {
                SweepOutput::Asymptote(sweep.asymptote_curve(&grid.a_values)?)
            }
        })
    }
}
