//! Parameter sweeps: CSV emission over a grid plus bisected detector
//! thresholds.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use gmedet::gme::{min_eig_detect, GmeMap};
use gmedet::moments::{compute_moments, hankel_report};
use gmedet::threshold::{scan, GridSpec, ThresholdScan};
use gmedet::{DensityOperator, Verdict};

use crate::report::{fmt_sig, map_verdict_str, verdict_str};
use crate::spec::StateFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DetectorKind {
    MapEig,
    Hankel(usize),
}

impl DetectorKind {
    pub fn label(&self) -> String {
        match self {
            DetectorKind::MapEig => "map-eig".into(),
            DetectorKind::Hankel(l) => format!("H{l}"),
        }
    }
}

/// Parses `map-eig,H1,H2,H3` (any subset, any order; output is canonical).
pub fn parse_detectors(spec: &str) -> Result<Vec<DetectorKind>> {
    let mut detectors = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let d = if part == "map-eig" {
            DetectorKind::MapEig
        } else if let Some(l) = part.strip_prefix('H') {
            let l: usize = l
                .parse()
                .map_err(|_| anyhow::anyhow!("bad Hankel order in `{part}`"))?;
            if l == 0 {
                bail!("Hankel orders start at H1");
            }
            DetectorKind::Hankel(l)
        } else {
            bail!("unknown detector `{part}`; known: map-eig, H1, H2, ...");
        };
        if !detectors.contains(&d) {
            detectors.push(d);
        }
    }
    if detectors.is_empty() {
        bail!("empty detector list");
    }
    detectors.sort();
    Ok(detectors)
}

pub struct SweepConfig {
    pub family: StateFamily,
    pub map: GmeMap,
    pub detectors: Vec<DetectorKind>,
    pub grid: GridSpec,
    pub bisect_tol: f64,
    pub tol: f64,
    pub seed: u64,
}

pub struct SweepOutcome {
    pub csv: String,
    pub thresholds: Vec<(DetectorKind, ThresholdScan)>,
}

fn max_hankel_order(detectors: &[DetectorKind]) -> usize {
    detectors
        .iter()
        .filter_map(|d| match d {
            DetectorKind::Hankel(l) => Some(*l),
            DetectorKind::MapEig => None,
        })
        .max()
        .unwrap_or(0)
}

fn detector_fires(
    cfg: &SweepConfig,
    rho: &DensityOperator,
    detector: DetectorKind,
) -> Result<bool> {
    Ok(match detector {
        DetectorKind::MapEig => min_eig_detect(&cfg.map, rho, Some(cfg.tol))?.detected,
        DetectorKind::Hankel(l) => {
            let m = compute_moments(&cfg.map, rho, 2 * l + 1)?;
            hankel_report(&m, l, Some(cfg.tol))?.verdict(l) == Verdict::Violated
        }
    })
}

/// Evaluates every grid point into CSV rows and bisects each detector's
/// verdict flips. Grid points are independent; rows are emitted in grid
/// order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    let max_order = max_hankel_order(&cfg.detectors);
    let n_moments = 2 * max_order + 1;
    let hankel_orders: Vec<usize> = cfg
        .detectors
        .iter()
        .filter_map(|d| match d {
            DetectorKind::Hankel(l) => Some(*l),
            DetectorKind::MapEig => None,
        })
        .collect();
    let with_map_eig = cfg.detectors.contains(&DetectorKind::MapEig);

    let mut csv = String::new();
    csv.push_str("mu");
    if max_order > 0 {
        for k in 1..=n_moments {
            csv.push_str(&format!(",s{k}"));
        }
        for l in &hankel_orders {
            csv.push_str(&format!(",detH{l}"));
        }
    }
    if with_map_eig {
        csv.push_str(",min_eig");
    }
    for d in &cfg.detectors {
        match d {
            DetectorKind::MapEig => csv.push_str(",verdict_map"),
            DetectorKind::Hankel(l) => csv.push_str(&format!(",verdict_H{l}")),
        }
    }
    csv.push('\n');

    for mu in cfg.grid.values() {
        let rho = cfg.family.generate(mu)?;
        csv.push_str(&fmt_sig(mu));
        let report = if max_order > 0 {
            let m = compute_moments(&cfg.map, &rho, n_moments)?;
            let report = hankel_report(&m, max_order, Some(cfg.tol))?;
            for s in m.values() {
                csv.push(',');
                csv.push_str(&fmt_sig(*s));
            }
            for l in &hankel_orders {
                csv.push(',');
                csv.push_str(&fmt_sig(report.det(*l)));
            }
            Some(report)
        } else {
            None
        };
        let detection = if with_map_eig {
            let det = min_eig_detect(&cfg.map, &rho, Some(cfg.tol))?;
            csv.push(',');
            csv.push_str(&fmt_sig(det.min_eigenvalue));
            Some(det)
        } else {
            None
        };
        for d in &cfg.detectors {
            csv.push(',');
            match d {
                DetectorKind::MapEig => csv.push_str(map_verdict_str(
                    detection.as_ref().expect("map-eig evaluated").detected,
                )),
                DetectorKind::Hankel(l) => csv.push_str(verdict_str(
                    report.as_ref().expect("moments evaluated").verdict(*l),
                )),
            }
        }
        csv.push('\n');
    }

    let mut thresholds = Vec::new();
    for &d in &cfg.detectors {
        let result = scan(
            |mu| {
                let rho = cfg.family.generate(mu).expect("parameter within range");
                detector_fires(cfg, &rho, d).expect("detector evaluation")
            },
            &cfg.grid,
            cfg.bisect_tol,
        );
        thresholds.push((d, result));
    }
    Ok(SweepOutcome { csv, thresholds })
}

pub fn write_outcome(outcome: &SweepOutcome, path: &Path, rows: usize, seed: u64) -> Result<String> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating output file {}", path.display()))?;
    file.write_all(outcome.csv.as_bytes())?;
    let mut summary = format!("wrote {} ({rows} rows, seed {seed})\n", path.display());
    for (d, scan) in &outcome.thresholds {
        summary.push_str(&format!("detector {}:", d.label()));
        if scan.regions.is_empty() {
            summary.push_str(" never fires\n");
            continue;
        }
        let regions: Vec<String> = scan
            .regions
            .iter()
            .map(|(a, b)| format!("[{a:.6}, {b:.6}]"))
            .collect();
        summary.push_str(&format!(" fires in {}", regions.join(" and ")));
        if !scan.crossings.is_empty() {
            let ts: Vec<String> = scan
                .crossings
                .iter()
                .map(|c| format!("{:.6}", c.threshold))
                .collect();
            summary.push_str(&format!("; thresholds: {}", ts.join(", ")));
        }
        summary.push('\n');
    }
    Ok(summary)
}
