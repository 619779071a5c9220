//! Experiment configuration, sweep execution, caching, and CSV artifacts.
//!
//! `run_example` solves (or loads) the full-order model once, then walks the
//! configured (q̂, ŝ) sweep: projection, bound, reduced solve, and report per
//! point. Sweep points are independent and run on a worker pool when the
//! `parallel` feature is enabled; CSV output is written by a single writer
//! in point order, so repeated runs are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{
    c_rho_t, effective_c_stability, sigma_bound_from_composite, singular_value_decays,
    verify_bounds, BoundCheck, ErrorReport, ReportFlags, EFFECTIVE_C_STABILITY_FACTOR,
    ILL_CONDITIONED_THRESHOLD, SIGMA_FLOOR_FACTOR,
};
use crate::error::{rho_errors, theta_and_total};
use crate::field::CoefficientField;
use crate::grid::{BoundaryMode, GramianSet, Grid1D};
use crate::pod::{
    project_composite, weighted_svd, write_space_basis_csv, write_time_basis_csv, ProjectionOrder,
};
use crate::solver::{assemble_rhs, assemble_rom, project_initial, solve_fom_with, solve_rom,
    ProblemSpec, QuadratureSpec};
use crate::{Result, StpodError};

/// Which built-in problem a run reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    /// Manufactured smooth solution, μ = 0.4.
    Example1,
    /// Ring-indicator forcing with zero initial state, μ = 1.
    Example2,
    /// Unforced decay of the first Fourier mode.
    Custom,
}

impl ExampleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExampleKind::Example1 => "1",
            ExampleKind::Example2 => "2",
            ExampleKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(ExampleKind::Example1),
            "2" => Ok(ExampleKind::Example2),
            "custom" => Ok(ExampleKind::Custom),
            other => Err(StpodError::Config(format!(
                "unknown example `{other}` (expected 1, 2, or custom)"
            ))),
        }
    }
}

/// Option-valued configuration layer; later layers override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub example: Option<ExampleKind>,
    pub n_time: Option<usize>,
    pub n_space: Option<usize>,
    pub mu: Option<f64>,
    pub order: Option<ProjectionOrder>,
    pub q_hat: Option<usize>,
    pub s_hat: Option<usize>,
    pub sweep_diagonal: Option<(usize, usize, usize)>,
    pub full_sweep: Option<bool>,
    pub quad_order: Option<usize>,
    pub subdivision: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub no_cache: Option<bool>,
}

impl PartialConfig {
    /// Overlay `self` on top of `base`.
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            example: self.example.or(base.example),
            n_time: self.n_time.or(base.n_time),
            n_space: self.n_space.or(base.n_space),
            mu: self.mu.or(base.mu),
            order: self.order.or(base.order),
            q_hat: self.q_hat.or(base.q_hat),
            s_hat: self.s_hat.or(base.s_hat),
            sweep_diagonal: self.sweep_diagonal.or(base.sweep_diagonal),
            full_sweep: self.full_sweep.or(base.full_sweep),
            quad_order: self.quad_order.or(base.quad_order),
            subdivision: self.subdivision.or(base.subdivision),
            out_dir: self.out_dir.or(base.out_dir),
            no_cache: self.no_cache.or(base.no_cache),
        }
    }

    /// Parse the flat `key = value` config-file format; keys mirror the
    /// long flag names.
    pub fn from_file_text(text: &str) -> Result<PartialConfig> {
        let mut cfg = PartialConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                StpodError::Config(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                StpodError::Config(format!("config line {}: bad {what} `{value}`", lineno + 1))
            };
            match key {
                "example" => cfg.example = Some(ExampleKind::parse(value)?),
                "n-time" => cfg.n_time = Some(value.parse().map_err(|_| bad("n-time"))?),
                "n-space" => cfg.n_space = Some(value.parse().map_err(|_| bad("n-space"))?),
                "mu" => cfg.mu = Some(value.parse().map_err(|_| bad("mu"))?),
                "order" => cfg.order = Some(ProjectionOrder::parse(value)?),
                "q-hat" => cfg.q_hat = Some(value.parse().map_err(|_| bad("q-hat"))?),
                "s-hat" => cfg.s_hat = Some(value.parse().map_err(|_| bad("s-hat"))?),
                "sweep-diagonal" => cfg.sweep_diagonal = Some(parse_sweep_spec(value)?),
                "full-sweep" => cfg.full_sweep = Some(value.parse().map_err(|_| bad("full-sweep"))?),
                "quad-order" => cfg.quad_order = Some(value.parse().map_err(|_| bad("quad-order"))?),
                "subdivide" => cfg.subdivision = Some(value.parse().map_err(|_| bad("subdivide"))?),
                "out" => cfg.out_dir = Some(PathBuf::from(value)),
                "no-cache" => cfg.no_cache = Some(value.parse().map_err(|_| bad("no-cache"))?),
                other => {
                    return Err(StpodError::Config(format!(
                        "config line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }
}

/// Parse `A:B` or `A:B:STEP`; the step defaults to 2, matching the default
/// diagonal sweep of example 2.
pub fn parse_sweep_spec(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || StpodError::Config(format!("bad sweep range `{s}` (expected A:B or A:B:STEP)"));
    let (a, b, step) = match parts.as_slice() {
        [a, b] => (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?, 2),
        [a, b, st] => (
            a.parse().map_err(|_| bad())?,
            b.parse().map_err(|_| bad())?,
            st.parse().map_err(|_| bad())?,
        ),
        _ => return Err(bad()),
    };
    if a < 1 || b < a || step < 1 {
        return Err(bad());
    }
    Ok((a, b, step))
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub example: ExampleKind,
    pub n_time: usize,
    pub n_space: usize,
    pub mu: f64,
    pub order: ProjectionOrder,
    pub q_hat: usize,
    pub s_hat: usize,
    pub sweep_diagonal: Option<(usize, usize, usize)>,
    pub full_sweep: bool,
    pub quad_order: usize,
    pub subdivision: usize,
    pub out_dir: PathBuf,
    pub cache: bool,
}

impl ExperimentConfig {
    /// Apply precedence: flags override file values override example defaults.
    pub fn resolve(cli: PartialConfig, file: Option<PartialConfig>) -> Result<ExperimentConfig> {
        let merged = cli.over(file.unwrap_or_default());
        let example = merged.example.unwrap_or(ExampleKind::Custom);
        let mu_default = match example {
            ExampleKind::Example1 => 0.4,
            ExampleKind::Example2 | ExampleKind::Custom => 1.0,
        };
        let subdivision_default = match example {
            ExampleKind::Example2 => 4,
            _ => 1,
        };
        let n_time = merged.n_time.unwrap_or(101);
        let n_space = merged.n_space.unwrap_or(101);
        // default reduced dimensions and sweep clamp to what the grid
        // offers; explicit values are validated as given
        let q_cap = n_space.saturating_sub(2).max(1);
        let sweep_cap = q_cap.min(n_time);
        let sweep_default = match example {
            ExampleKind::Example2 if sweep_cap >= 2 => Some((2, 60.min(sweep_cap), 2)),
            _ => None,
        };
        let cfg = ExperimentConfig {
            example,
            n_time,
            n_space,
            mu: merged.mu.unwrap_or(mu_default),
            order: merged.order.unwrap_or(ProjectionOrder::SpaceFirst),
            q_hat: merged.q_hat.unwrap_or_else(|| 20.min(q_cap)),
            s_hat: merged.s_hat.unwrap_or_else(|| 20.min(n_time)),
            sweep_diagonal: merged.sweep_diagonal.or(sweep_default),
            full_sweep: merged.full_sweep.unwrap_or(false),
            quad_order: merged.quad_order.unwrap_or(3),
            subdivision: merged.subdivision.unwrap_or(subdivision_default),
            out_dir: merged.out_dir.unwrap_or_else(|| PathBuf::from("stpod_out")),
            cache: !merged.no_cache.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_time < 2 {
            return Err(StpodError::Config("n-time must be at least 2".into()));
        }
        if self.n_space < 3 {
            return Err(StpodError::Config("n-space must be at least 3".into()));
        }
        if self.mu.is_nan() || self.mu <= 0.0 {
            return Err(StpodError::Config(format!("mu must be positive, got {}", self.mu)));
        }
        let (q, s) = self.dims();
        if self.q_hat < 1 || self.q_hat > q {
            return Err(StpodError::Config(format!(
                "q-hat must lie in 1..={q}, got {}",
                self.q_hat
            )));
        }
        if self.s_hat < 1 || self.s_hat > s {
            return Err(StpodError::Config(format!(
                "s-hat must lie in 1..={s}, got {}",
                self.s_hat
            )));
        }
        if let Some((a, b, _)) = self.sweep_diagonal {
            let cap = q.min(s);
            if a < 1 || b > cap {
                return Err(StpodError::Config(format!(
                    "sweep range {a}:{b} outside 1..={cap}"
                )));
            }
        }
        if self.quad_order < 2 {
            return Err(StpodError::Config("quad-order must be at least 2".into()));
        }
        if self.subdivision < 1 {
            return Err(StpodError::Config("subdivide must be at least 1".into()));
        }
        Ok(())
    }

    /// Active basis counts (q, s).
    pub fn dims(&self) -> (usize, usize) {
        (self.n_space - 2, self.n_time)
    }

    pub fn problem(&self) -> ProblemSpec {
        match self.example {
            ExampleKind::Example1 => ProblemSpec::example1(self.mu),
            ExampleKind::Example2 => ProblemSpec::example2(self.mu),
            ExampleKind::Custom => ProblemSpec::decay_mode(self.mu),
        }
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec { order: self.quad_order, subdivision: self.subdivision }
    }

    /// The sweep points in deterministic order: the diagonal, then the
    /// rectangle points a full sweep adds; a single configured point when no
    /// sweep is set.
    pub fn sweep_points(&self) -> Vec<(usize, usize)> {
        let (q, s) = self.dims();
        let mut points = Vec::new();
        match self.sweep_diagonal {
            None => points.push((self.q_hat, self.s_hat)),
            Some((a, b, step)) => {
                let mut k = a;
                while k <= b {
                    points.push((k, k));
                    k += step;
                }
            }
        }
        if self.full_sweep {
            let mut k = 5;
            let mut grid_vals = Vec::new();
            while k <= 60 {
                grid_vals.push(k);
                k += 5;
            }
            for &qh in &grid_vals {
                for &sh in &grid_vals {
                    let p = (qh, sh);
                    if qh <= q && sh <= s && !points.contains(&p) {
                        points.push(p);
                    }
                }
            }
        }
        points
    }

    /// Key for the cached full-order solution: parameters that influence it.
    pub fn fom_cache_key(&self) -> String {
        let canon = format!(
            "example={};mu={:.17e};n_time={};n_space={};quad_order={};subdivision={}",
            self.example.as_str(),
            self.mu,
            self.n_time,
            self.n_space,
            self.quad_order,
            self.subdivision
        );
        let digest = Sha256::digest(canon.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}

/// Shared inputs of every sweep point.
pub struct SweepContext<'a> {
    pub g: &'a GramianSet,
    pub fom: &'a CoefficientField,
    pub f_mat: &'a DMatrix<f64>,
    pub ic: &'a DVector<f64>,
    pub sigma_full: &'a DVector<f64>,
    pub c_rho_t: f64,
    pub order: ProjectionOrder,
}

/// Project, bound, and solve the reduced model at one (q̂, ŝ) point.
pub fn evaluate_sweep_point(
    ctx: &SweepContext<'_>,
    q_hat: usize,
    s_hat: usize,
) -> Result<ErrorReport> {
    let composite = project_composite(ctx.fom, ctx.order, q_hat, s_hat, ctx.g)?;
    let sigma = sigma_bound_from_composite(ctx.sigma_full, &composite, ctx.g);
    let (rho, rho_t) = rho_errors(ctx.fom, &composite.field, ctx.g)?;

    let sys = assemble_rom(ctx.g, &composite.space_basis, &composite.time_basis, ctx.f_mat, ctx.ic)?;
    let rom = solve_rom(&sys, &composite.space_basis, &composite.time_basis, ctx.g)?;
    let (theta, total) = theta_and_total(ctx.fom, &composite.field, &rom.lifted, ctx.g)?;

    let ic_projected = &composite.space_basis.transform * &sys.ic_reduced;
    let ic_gap = ctx.g.l_y.tr_mul(&(ctx.ic - ic_projected)).norm();

    let sigma1 = ctx.sigma_full.get(0).copied().unwrap_or(0.0);
    let flags = ReportFlags {
        degenerate: composite.time_basis.degenerate,
        ill_conditioned: rom.cond_estimate > ILL_CONDITIONED_THRESHOLD,
        sigma_floor: sigma.total < SIGMA_FLOOR_FACTOR * sigma1,
    };
    let effective_c = if sigma.total > 0.0 { Some(total / sigma.total) } else { None };
    log::info!(
        "point q_hat={q_hat} s_hat={s_hat} rho={rho:.3e} total={total:.3e} sigma={:.3e} cond={:.3e} flags={flags}",
        sigma.total,
        rom.cond_estimate
    );
    Ok(ErrorReport {
        order: ctx.order,
        q_hat,
        s_hat,
        rho,
        rho_t,
        theta: Some(theta),
        total: Some(total),
        sigma,
        c_rho_t: ctx.c_rho_t,
        effective_c,
        ic_gap,
        cond_estimate: Some(rom.cond_estimate),
        flags,
    })
}

/// Evaluate all sweep points, on the worker pool when built with `parallel`.
pub fn run_sweep(ctx: &SweepContext<'_>, points: &[(usize, usize)]) -> Result<Vec<ErrorReport>> {
    #[cfg(feature = "parallel")]
    {
        points
            .par_iter()
            .map(|&(q_hat, s_hat)| evaluate_sweep_point(ctx, q_hat, s_hat))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sweep_sequential(ctx, points)
    }
}

/// Sequential fallback; also the baseline the benchmark compares against.
pub fn run_sweep_sequential(
    ctx: &SweepContext<'_>,
    points: &[(usize, usize)],
) -> Result<Vec<ErrorReport>> {
    points
        .iter()
        .map(|&(q_hat, s_hat)| evaluate_sweep_point(ctx, q_hat, s_hat))
        .collect()
}

/// Everything a finished run reports back.
#[derive(Debug)]
pub struct RunSummary {
    pub reports: Vec<ErrorReport>,
    /// Count of failed hard inequality checks across all reports.
    pub bound_failures: usize,
    pub stability: BoundCheck,
    pub out_dir: PathBuf,
    pub fom_norm: f64,
    pub fom_was_cached: bool,
}

/// Solve or load the full-order model for a configuration.
pub fn prepare_fom(
    config: &ExperimentConfig,
    g: &GramianSet,
) -> Result<(CoefficientField, DMatrix<f64>, DVector<f64>, bool)> {
    let problem = config.problem();
    let quad = config.quadrature();
    let f_mat = assemble_rhs(&problem.forcing, &g.time_grid, &g.space_grid, &quad)?;
    let ic = project_initial(&problem.initial, &g.space_grid, g, &quad)?;
    let cache_path = config
        .out_dir
        .join("cache")
        .join(format!("fom_{}.csv", config.fom_cache_key()));
    if config.cache && cache_path.is_file() {
        let file = fs::File::open(&cache_path)?;
        let field = CoefficientField::read_csv(file, &cache_path.display().to_string())?;
        if field.time_grid == g.time_grid && field.space_grid == g.space_grid {
            log::info!("fom_cache=hit path={}", cache_path.display());
            return Ok((field, f_mat, ic, true));
        }
        return Err(StpodError::Malformed {
            path: cache_path.display().to_string(),
            reason: "cached grids do not match the configuration".into(),
        });
    }
    let field = solve_fom_with(&f_mat, &ic, g)?;
    if config.cache {
        fs::create_dir_all(cache_path.parent().expect("cache path has a parent"))?;
        let mut w = BufWriter::new(fs::File::create(&cache_path)?);
        field.write_csv(&mut w)?;
        w.flush()?;
        log::info!("fom_cache=write path={}", cache_path.display());
    }
    Ok((field, f_mat, ic, false))
}

/// Run one experiment end to end and write all CSV artifacts.
pub fn run_example(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let time_grid = Grid1D::uniform(0.0, 1.0, config.n_time, BoundaryMode::AllNodes)?;
    let space_grid = Grid1D::uniform(0.0, 1.0, config.n_space, BoundaryMode::ZeroDirichlet)?;
    let g = GramianSet::assemble(&time_grid, &space_grid, config.mu)?;
    fs::create_dir_all(&config.out_dir)?;

    let (fom, f_mat, ic, fom_was_cached) = prepare_fom(config, &g)?;
    let sigma_full = weighted_svd(&fom, &g)?.sigma;
    let crt = c_rho_t(&g);
    let fom_norm = fom.sty_norm(&g)?;
    log::info!(
        "run example={} dims=({}, {}) fom_norm={fom_norm:.6e} c_rho_t={crt:.6e}",
        config.example.as_str(),
        config.n_space - 2,
        config.n_time
    );

    write_singular_values_csv(config, &fom, &g)?;

    // figure-style artifacts at the configured single point
    let configured = project_composite(&fom, config.order, config.q_hat, config.s_hat, &g)?;
    {
        let mut w = BufWriter::new(fs::File::create(config.out_dir.join("bases_time.csv"))?);
        write_time_basis_csv(&configured.time_basis, &g.time_grid, &mut w)?;
        w.flush()?;
        let mut w = BufWriter::new(fs::File::create(config.out_dir.join("bases_space.csv"))?);
        write_space_basis_csv(&configured.space_basis, &g.space_grid, &mut w)?;
        w.flush()?;
    }
    let sys = assemble_rom(&g, &configured.space_basis, &configured.time_basis, &f_mat, &ic)?;
    let rom = solve_rom(&sys, &configured.space_basis, &configured.time_basis, &g)?;
    write_fields_csv(config, &fom, &configured.field, &rom.lifted)?;

    let ctx = SweepContext {
        g: &g,
        fom: &fom,
        f_mat: &f_mat,
        ic: &ic,
        sigma_full: &sigma_full,
        c_rho_t: crt,
        order: config.order,
    };
    let points = config.sweep_points();
    let reports = run_sweep(&ctx, &points)?;

    let mut bound_failures = 0;
    for report in &reports {
        for check in verify_bounds(report) {
            if check.hard && !check.passed {
                bound_failures += 1;
                log::warn!(
                    "bound_violation name={} q_hat={} s_hat={} {}",
                    check.name,
                    report.q_hat,
                    report.s_hat,
                    check.detail
                );
            }
        }
    }
    let stability = effective_c_stability(&reports, EFFECTIVE_C_STABILITY_FACTOR);
    log::info!("effective_c_stability passed={} {}", stability.passed, stability.detail);

    let mut w = BufWriter::new(fs::File::create(config.out_dir.join("errors.csv"))?);
    writeln!(w, "{}", ErrorReport::csv_header())?;
    for report in &reports {
        writeln!(w, "{}", report.csv_row())?;
    }
    w.flush()?;

    Ok(RunSummary {
        reports,
        bound_failures,
        stability,
        out_dir: config.out_dir.clone(),
        fom_norm,
        fom_was_cached,
    })
}

fn write_singular_values_csv(
    config: &ExperimentConfig,
    fom: &CoefficientField,
    g: &GramianSet,
) -> Result<()> {
    let decays = singular_value_decays(fom, config.q_hat, config.s_hat, g)?;
    let path = config.out_dir.join("singular_values.csv");
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "index,sigma_full,sigma_space_projected_zeroed,sigma_zeroed,sigma_time_projected_zeroed"
    )?;
    for i in 0..decays.full.len() {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            i + 1,
            decays.full[i],
            decays.space_projected_zeroed[i],
            decays.zeroed[i],
            decays.time_projected_zeroed[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_fields_csv(
    config: &ExperimentConfig,
    fom: &CoefficientField,
    projected: &CoefficientField,
    rom_lifted: &CoefficientField,
) -> Result<()> {
    let path = config.out_dir.join("fields.csv");
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "tau,xi,fom,abs_projection_error,abs_rom_error")?;
    let tg = &fom.time_grid;
    let xg = &fom.space_grid;
    for j in 0..tg.n_nodes {
        for m in 0..xg.n_nodes {
            let (value, perr, rerr) = if m == 0 || m == xg.n_nodes - 1 {
                (0.0, 0.0, 0.0)
            } else {
                let i = m - 1;
                (
                    fom.x[(i, j)],
                    (fom.x[(i, j)] - projected.x[(i, j)]).abs(),
                    (fom.x[(i, j)] - rom_lifted.x[(i, j)]).abs(),
                )
            };
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                tg.node(j),
                xg.node(m),
                value,
                perr,
                rerr
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_defaults_are_the_reference_setup() {
        let cfg = ExperimentConfig::resolve(
            PartialConfig { example: Some(ExampleKind::Example1), ..Default::default() },
            None,
        )
        .unwrap();
        assert_eq!(cfg.mu, 0.4);
        assert_eq!(cfg.n_time, 101);
        assert_eq!(cfg.n_space, 101);
        assert_eq!(cfg.subdivision, 1);
        assert!(cfg.sweep_diagonal.is_none());

        let cfg2 = ExperimentConfig::resolve(
            PartialConfig { example: Some(ExampleKind::Example2), ..Default::default() },
            None,
        )
        .unwrap();
        assert_eq!(cfg2.mu, 1.0);
        assert_eq!(cfg2.subdivision, 4);
        assert_eq!(cfg2.sweep_diagonal, Some((2, 60, 2)));
    }

    #[test]
    fn flags_override_file_values_override_defaults() {
        let file = PartialConfig::from_file_text("example = 1\nmu = 0.7\nn-time = 51\n").unwrap();
        let cli = PartialConfig { mu: Some(0.9), ..Default::default() };
        let cfg = ExperimentConfig::resolve(cli, Some(file)).unwrap();
        assert_eq!(cfg.example, ExampleKind::Example1);
        assert_eq!(cfg.mu, 0.9); // flag wins
        assert_eq!(cfg.n_time, 51); // file wins over default
        assert_eq!(cfg.n_space, 101); // default
    }

    #[test]
    fn config_file_rejects_unknown_keys_and_garbage() {
        assert!(PartialConfig::from_file_text("bogus = 1\n").is_err());
        assert!(PartialConfig::from_file_text("just some text\n").is_err());
        assert!(PartialConfig::from_file_text("mu = not_a_number\n").is_err());
        let ok = PartialConfig::from_file_text("# comment\n\nmu = 0.5\norder = time-first\n").unwrap();
        assert_eq!(ok.mu, Some(0.5));
        assert_eq!(ok.order, Some(ProjectionOrder::TimeFirst));
    }

    #[test]
    fn invalid_reduction_dimensions_are_config_errors() {
        let cli = PartialConfig { s_hat: Some(0), ..Default::default() };
        assert!(ExperimentConfig::resolve(cli, None).is_err());
        let cli = PartialConfig { q_hat: Some(1000), ..Default::default() };
        assert!(ExperimentConfig::resolve(cli, None).is_err());
        let cli = PartialConfig {
            sweep_diagonal: Some((2, 1000, 2)),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(cli, None).is_err());
    }

    #[test]
    fn sweep_spec_parsing() {
        assert_eq!(parse_sweep_spec("2:60").unwrap(), (2, 60, 2));
        assert_eq!(parse_sweep_spec("5:30:5").unwrap(), (5, 30, 5));
        assert!(parse_sweep_spec("0:10").is_err());
        assert!(parse_sweep_spec("10:2").is_err());
        assert!(parse_sweep_spec("abc").is_err());
    }

    #[test]
    fn sweep_points_diagonal_then_rectangle() {
        let cfg = ExperimentConfig::resolve(
            PartialConfig {
                example: Some(ExampleKind::Example2),
                full_sweep: Some(true),
                ..Default::default()
            },
            None,
        )
        .unwrap();
        let points = cfg.sweep_points();
        assert_eq!(&points[..3], &[(2, 2), (4, 4), (6, 6)]);
        assert!(points.contains(&(5, 60)));
        assert!(points.contains(&(60, 5)));
        // no duplicates
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), points.len());
    }

    #[test]
    fn cache_key_tracks_parameters() {
        let base = ExperimentConfig::resolve(
            PartialConfig { example: Some(ExampleKind::Example1), ..Default::default() },
            None,
        )
        .unwrap();
        let mut other = base.clone();
        other.mu = 0.5;
        assert_ne!(base.fom_cache_key(), other.fom_cache_key());
        let mut quad = base.clone();
        quad.subdivision = 2;
        assert_ne!(base.fom_cache_key(), quad.fom_cache_key());
        assert_eq!(base.fom_cache_key(), base.fom_cache_key());
    }
}
