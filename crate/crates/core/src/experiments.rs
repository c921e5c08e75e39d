//! GHZ-family sweep over entanglement angles, and its CSV/JSON/SVG exports.
//!
//! The family is `alpha|000> + beta|111> + gamma|222>` with
//! `alpha = sin(theta) cos(phi)`, `beta = sin(theta) sin(phi)`,
//! `gamma = cos(theta)`. Grid cell `(M, N)` sits at `phi = pi M / 40`,
//! `theta = pi N / 40`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{build_partition, ClassMasses, GameSpec, OutcomePartition};
use crate::optimize::{nash_gap, optimize_symmetric, restart_seed, OptimizerConfig};
use crate::qstate::PureState;
use crate::scalar::Real;

/// Angular spacing of the sweep grid.
pub const GRID_STEP: f64 = std::f64::consts::PI / 40.0;

/// Color-map endpoints: the classical uniform payoff and the GHZ optimum.
pub const COLD_PAYOFF: f64 = 4.0 / 9.0;
pub const HOT_PAYOFF: f64 = 2.0 / 3.0;

/// Environment variable bounding the sweep worker count (0 = automatic).
pub const THREADS_ENV: &str = "QKOLKATA_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GhzFamilyPoint {
    #[serde(rename = "M")]
    pub m_index: usize,
    #[serde(rename = "N")]
    pub n_index: usize,
    pub phi: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl GhzFamilyPoint {
    /// Point at arbitrary angles; grid indices are left at 0.
    pub fn at(theta: f64, phi: f64) -> Self {
        Self {
            m_index: 0,
            n_index: 0,
            phi,
            theta,
            alpha: theta.sin() * phi.cos(),
            beta: theta.sin() * phi.sin(),
            gamma: theta.cos(),
        }
    }

    pub fn grid(m_index: usize, n_index: usize) -> Self {
        Self {
            m_index,
            n_index,
            ..Self::at(GRID_STEP * n_index as f64, GRID_STEP * m_index as f64)
        }
    }

    pub fn state<T: Real>(&self) -> PureState<T> {
        ghz_family(T::lit(self.theta), T::lit(self.phi))
    }
}

/// `sin(theta)cos(phi)|000> + sin(theta)sin(phi)|111> + cos(theta)|222>`.
pub fn ghz_family<T: Real>(theta: T, phi: T) -> PureState<T> {
    let weights = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let terms: Vec<_> = weights
        .iter()
        .enumerate()
        .map(|(c, &w)| (vec![c; 3], Complex::new(w, T::zero())))
        .collect();
    // The weights have unit norm, so superpose cannot fail.
    PureState::superpose(3, &terms).expect("trig weights are never all zero")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: GhzFamilyPoint,
    pub payoff: f64,
    pub nash_gap: Option<f64>,
    pub converged: bool,
    pub class_masses: ClassMasses<f64>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub m_max: usize,
    pub n_max: usize,
    pub optimizer: OptimizerConfig,
    /// Also compute the Nash gap of each cell's optimum (roughly triples cost).
    pub nash: bool,
    /// Worker count; 0 picks one per core.
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { m_max: 20, n_max: 20, optimizer: OptimizerConfig::default(), nash: false, threads: 0 }
    }
}

/// Reads [`THREADS_ENV`]; unset or unparsable means automatic.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Seed of grid cell `(M, N)` under base seed `base`.
pub fn cell_seed(base: u64, m_index: usize, n_index: usize) -> u64 {
    restart_seed(base, ((m_index as u64) << 32) | n_index as u64)
}

pub fn run_cell(
    point: GhzFamilyPoint,
    partition: &OutcomePartition,
    optimizer: &OptimizerConfig,
    nash: bool,
) -> Result<SweepRow> {
    let started = Instant::now();
    let config = optimizer.with_seed(cell_seed(optimizer.seed, point.m_index, point.n_index));
    let initial = point.state::<f64>();
    let result = optimize_symmetric(&initial, partition, &config)?;
    let final_state = initial.apply_local(&vec![result.best_unitary.clone(); 3])?;
    let class_masses = partition.class_probabilities(&final_state)?;
    let gap = if nash {
        Some(nash_gap(&initial, &result.best_unitary, partition, &config)?)
    } else {
        None
    };
    Ok(SweepRow {
        point,
        payoff: result.payoff,
        nash_gap: gap,
        converged: result.converged,
        class_masses,
        wall_time: started.elapsed(),
    })
}

/// Optimizes every cell `(M, N)` in `1..=m_max x 1..=n_max`; rows come back ordered by `(M, N)`.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.m_max == 0 || config.n_max == 0 {
        return Err(Error::input("sweep grid must have at least one cell"));
    }
    config.optimizer.validate()?;
    let partition = build_partition(GameSpec::three_qutrits())?;
    let points: Vec<_> = (1..=config.m_max)
        .flat_map(|m| (1..=config.n_max).map(move |n| GhzFamilyPoint::grid(m, n)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        points
            .into_par_iter()
            .map(|p| run_cell(p, &partition, &config.optimizer, config.nash))
            .collect()
    })
}

/// `%g`-style formatting with 12 significant digits.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

pub const CSV_HEADER: &str = "M,N,phi,theta,alpha,beta,gamma,payoff,nash_gap,converged";

pub fn export_csv(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("no sweep rows to export".into()));
    }
    let mut out = String::with_capacity(128 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let p = &r.point;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.m_index,
            p.n_index,
            format_sig12(p.phi),
            format_sig12(p.theta),
            format_sig12(p.alpha),
            format_sig12(p.beta),
            format_sig12(p.gamma),
            format_sig12(r.payoff),
            r.nash_gap.map(format_sig12).unwrap_or_default(),
            r.converged,
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
struct JsonRow {
    #[serde(flatten)]
    point: GhzFamilyPoint,
    payoff: f64,
    nash_gap: Option<f64>,
    converged: bool,
    class_masses: ClassMasses<f64>,
    wall_time_ms: f64,
}

/// JSON array with the CSV columns plus class masses and timing.
pub fn export_json(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("no sweep rows to export".into()));
    }
    let json: Vec<_> = rows
        .iter()
        .map(|r| JsonRow {
            point: r.point,
            payoff: r.payoff,
            nash_gap: r.nash_gap,
            converged: r.converged,
            class_masses: r.class_masses,
            wall_time_ms: r.wall_time.as_secs_f64() * 1e3,
        })
        .collect();
    serde_json::to_string_pretty(&json).map_err(|e| Error::input(format!("cannot encode rows: {e}")))
}

/// Writes `contents` to `path`, attaching the path to I/O errors.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

const COLOR_STOPS: [(f64, [f64; 3]); 3] = [
    (0.0, [49.0, 54.0, 149.0]),
    (0.5, [255.0, 255.0, 191.0]),
    (1.0, [165.0, 0.0, 38.0]),
];

/// Fill color for `payoff`, linear in the payoff between [`COLD_PAYOFF`] and [`HOT_PAYOFF`].
pub fn heat_color(payoff: f64) -> String {
    let t = ((payoff - COLD_PAYOFF) / (HOT_PAYOFF - COLD_PAYOFF)).clamp(0.0, 1.0);
    let (lo, hi) = if t <= COLOR_STOPS[1].0 {
        (COLOR_STOPS[0], COLOR_STOPS[1])
    } else {
        (COLOR_STOPS[1], COLOR_STOPS[2])
    };
    let s = (t - lo.0) / (hi.0 - lo.0);
    let c: Vec<u8> = (0..3).map(|i| (lo.1[i] + s * (hi.1[i] - lo.1[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

const CELL: usize = 24;
const MARGIN_LEFT: usize = 70;
const MARGIN_TOP: usize = 30;
const LEGEND_WIDTH: usize = 90;

/// SVG 1.1 heatmap of a complete `m_max x n_max` sweep; phi on x, theta on y (growing upward).
pub fn export_svg_heatmap(rows: &[SweepRow], m_max: usize, n_max: usize) -> Result<String> {
    if m_max == 0 || n_max == 0 {
        return Err(Error::input("heatmap grid must have at least one cell"));
    }
    let mut grid: Vec<Option<f64>> = vec![None; m_max * n_max];
    for r in rows {
        let (m, n) = (r.point.m_index, r.point.n_index);
        if !(1..=m_max).contains(&m) || !(1..=n_max).contains(&n) {
            return Err(Error::input(format!("row (M={m}, N={n}) is outside the {m_max}x{n_max} grid")));
        }
        let slot = &mut grid[(m - 1) * n_max + (n - 1)];
        if slot.is_some() {
            return Err(Error::input(format!("duplicate row for (M={m}, N={n})")));
        }
        *slot = Some(r.payoff);
    }
    let missing = grid.iter().filter(|c| c.is_none()).count();
    if missing > 0 {
        return Err(Error::input(format!("{missing} grid cells have no sweep row")));
    }

    let plot_w = m_max * CELL;
    let plot_h = n_max * CELL;
    let width = MARGIN_LEFT + plot_w + LEGEND_WIDTH;
    let height = MARGIN_TOP + plot_h + 50;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, "  <defs>");
    let _ = writeln!(svg, r#"    <linearGradient id="legend" x1="0" y1="1" x2="0" y2="0">"#);
    for (offset, _) in COLOR_STOPS {
        let payoff = COLD_PAYOFF + offset * (HOT_PAYOFF - COLD_PAYOFF);
        let _ = writeln!(
            svg,
            r#"      <stop offset="{offset}" stop-color="{}"/>"#,
            heat_color(payoff)
        );
    }
    let _ = writeln!(svg, "    </linearGradient>");
    let _ = writeln!(svg, "  </defs>");
    let _ = writeln!(
        svg,
        r#"  <text x="{}" y="18" font-family="sans-serif" font-size="13" text-anchor="middle">Optimal symmetric payoff E($)</text>"#,
        MARGIN_LEFT + plot_w / 2
    );

    let _ = writeln!(svg, r#"  <g id="cells" shape-rendering="crispEdges">"#);
    for m in 1..=m_max {
        for n in 1..=n_max {
            let payoff = grid[(m - 1) * n_max + (n - 1)].unwrap_or(f64::NAN);
            let x = MARGIN_LEFT + (m - 1) * CELL;
            let y = MARGIN_TOP + (n_max - n) * CELL;
            let _ = writeln!(
                svg,
                r#"    <rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"><title>M={m} N={n} E={}</title></rect>"#,
                heat_color(payoff),
                format_sig12(payoff)
            );
        }
    }
    let _ = writeln!(svg, "  </g>");

    let axis_y = MARGIN_TOP + plot_h;
    for m in (1..=m_max).filter(|m| m % 5 == 0 || *m == 1) {
        let _ = writeln!(
            svg,
            r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{m}</text>"#,
            MARGIN_LEFT + (m - 1) * CELL + CELL / 2,
            axis_y + 14
        );
    }
    for n in (1..=n_max).filter(|n| n % 5 == 0 || *n == 1) {
        let _ = writeln!(
            svg,
            r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{n}</text>"#,
            MARGIN_LEFT - 6,
            MARGIN_TOP + (n_max - n) * CELL + CELL / 2 + 4
        );
    }
    let _ = writeln!(
        svg,
        r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">φ = πM/40</text>"#,
        MARGIN_LEFT + plot_w / 2,
        axis_y + 34
    );
    let _ = writeln!(
        svg,
        r#"  <text x="20" y="{0}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 20 {0})">ϑ = πN/40</text>"#,
        MARGIN_TOP + plot_h / 2
    );

    let lx = MARGIN_LEFT + plot_w + 20;
    let _ = writeln!(
        svg,
        r#"  <rect id="legend-bar" x="{lx}" y="{MARGIN_TOP}" width="16" height="{plot_h}" fill="url(#legend)" stroke="black" stroke-width="0.5"/>"#
    );
    for (label, y) in [("2/3", MARGIN_TOP + 4), ("4/9", MARGIN_TOP + plot_h)] {
        let _ = writeln!(
            svg,
            r#"  <text x="{}" y="{y}" font-family="sans-serif" font-size="10">{label}</text>"#,
            lx + 22
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
