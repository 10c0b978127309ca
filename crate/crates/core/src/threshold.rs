//! Grid-then-bisect location of detector sign changes over a swept parameter.
//!
//! Detector statistics need not be monotone in the parameter, so sign changes
//! are first enumerated on a grid and each bracket is then bisected.

/// An inclusive parameter grid with at least two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        assert!(points >= 2, "grid needs at least two points");
        assert!(hi > lo, "grid range must be increasing");
        Self { lo, hi, points }
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.hi
                } else {
                    self.lo + step * k as f64
                }
            })
            .collect()
    }
}

/// A refined verdict flip: the detector disagrees at `mu_low` and `mu_high`,
/// which are within the bisection tolerance of each other.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub mu_low: f64,
    pub mu_high: f64,
    pub threshold: f64,
}

/// Grid verdicts, refined crossings, and the detection regions they bound.
#[derive(Debug, Clone)]
pub struct ThresholdScan {
    pub grid_verdicts: Vec<bool>,
    pub crossings: Vec<Crossing>,
    pub regions: Vec<(f64, f64)>,
}

impl ThresholdScan {
    pub fn fires_anywhere(&self) -> bool {
        self.grid_verdicts.iter().any(|&v| v)
    }
}

/// Evaluates the detector on the grid, bisects every verdict flip to
/// `bisect_tol`, and assembles the detection regions (grid-edge boundaries
/// stay at the edge).
pub fn scan(fire: impl Fn(f64) -> bool, grid: &GridSpec, bisect_tol: f64) -> ThresholdScan {
    let mus = grid.values();
    let grid_verdicts: Vec<bool> = mus.iter().map(|&mu| fire(mu)).collect();
    let mut crossings = Vec::new();
    for w in 0..mus.len() - 1 {
        if grid_verdicts[w] != grid_verdicts[w + 1] {
            let (mut lo, mut hi) = (mus[w], mus[w + 1]);
            let lo_verdict = grid_verdicts[w];
            while hi - lo > bisect_tol {
                let mid = 0.5 * (lo + hi);
                if fire(mid) == lo_verdict {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push(Crossing {
                mu_low: lo,
                mu_high: hi,
                threshold: 0.5 * (lo + hi),
            });
        }
    }
    let mut regions = Vec::new();
    let mut start: Option<f64> = if grid_verdicts[0] { Some(grid.lo) } else { None };
    let mut crossing_iter = crossings.iter();
    for w in 0..mus.len() - 1 {
        if grid_verdicts[w] != grid_verdicts[w + 1] {
            let x = crossing_iter.next().expect("one crossing per flip");
            if grid_verdicts[w] {
                regions.push((start.take().expect("open region"), x.threshold));
            } else {
                start = Some(x.threshold);
            }
        }
    }
    if let Some(s) = start {
        regions.push((s, grid.hi));
    }
    ThresholdScan {
        grid_verdicts,
        crossings,
        regions,
    }
}
