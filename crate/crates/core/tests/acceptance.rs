//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values once its assertions hold.
//!
//! Thresholds are located on a 101-point grid with bisection to 5e-4 and
//! compared against their reference values within 0.002.

use gmedet::gme::{estimate_nu, min_eig_detect, GmeMap};
use gmedet::maps::{pauli, LindbladSpec, SingleSiteMap};
use gmedet::moments::{
    compute_moments, hankel_report, order_tolerance, p3_ppt_check, pt_moments, PptVerdict,
};
use gmedet::qcore::{max_abs_diff, partial_transpose_matrix, SystemShape};
use gmedet::realization::{
    build_term_observable, expectation_complex, sample_expectation, second_moment_via_operators,
    third_moment_via_operators, MultiCopyObservable, TermIndexString,
};
use gmedet::states;
use gmedet::threshold::{scan, GridSpec, ThresholdScan};
use gmedet::DensityOperator;

const BISECT_TOL: f64 = 5e-4;
const THRESHOLD_TOL: f64 = 2e-3;

fn plain_transposition_map(n: usize) -> GmeMap {
    GmeMap::build(n, SingleSiteMap::transposition(2), None, None).unwrap()
}

fn modified_transposition_map(n: usize) -> GmeMap {
    let base = SingleSiteMap::transposition(2)
        .compose_unitary_after(&pauli(0))
        .unwrap()
        .with_label("modified-transposition");
    GmeMap::build(n, base, None, None).unwrap()
}

fn reduction_map(n: usize) -> GmeMap {
    GmeMap::build(n, SingleSiteMap::reduction(2), None, None).unwrap()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Detector {
    MapEig,
    Hankel(usize),
}

/// The detector verdict at one value of the swept parameter.
fn fires(g: &GmeMap, rho: &DensityOperator, detector: Detector) -> bool {
    match detector {
        Detector::MapEig => min_eig_detect(g, rho, None).unwrap().detected,
        Detector::Hankel(l) => {
            let m = compute_moments(g, rho, 2 * l + 1).unwrap();
            let report = hankel_report(&m, l, None).unwrap();
            report.verdict(l) == gmedet::Verdict::Violated
        }
    }
}

fn scan_family(
    g: &GmeMap,
    family: impl Fn(f64) -> DensityOperator,
    detector: Detector,
) -> ThresholdScan {
    let grid = GridSpec::new(0.0, 1.0, 101);
    scan(|mu| fires(g, &family(mu), detector), &grid, BISECT_TOL)
}

/// The single lower detection boundary of a one-region family.
fn single_threshold(
    g: &GmeMap,
    family: impl Fn(f64) -> DensityOperator,
    detector: Detector,
) -> f64 {
    let scan = scan_family(g, family, detector);
    assert_eq!(
        scan.regions.len(),
        1,
        "expected one detection region, found {:?}",
        scan.regions
    );
    assert_eq!(scan.regions[0].1, 1.0, "region should extend to mu = 1");
    scan.regions[0].0
}

#[test]
fn criterion_01_ghz3_pure_detection() {
    let g = modified_transposition_map(3);
    let m = compute_moments(&g, &states::ghz(3), 3).unwrap();
    let report = hankel_report(&m, 1, None).unwrap();
    assert!(report.det(1) < 0.0, "det H1 = {}", report.det(1));
    println!("PASS criterion 1: GHZ3 modified map, det H1 = {:.3} < 0", report.det(1));
}

#[test]
fn criterion_02_w3_pure_detection() {
    let g = plain_transposition_map(3);
    let m = compute_moments(&g, &states::w3(), 5).unwrap();
    let report = hankel_report(&m, 2, None).unwrap();
    assert!(report.det(1) >= 0.0, "det H1 = {}", report.det(1));
    assert!(report.det(2) < 0.0, "det H2 = {}", report.det(2));
    println!(
        "PASS criterion 2: W3 plain map, det H1 = {:.3} >= 0, det H2 = {:.3} < 0",
        report.det(1),
        report.det(2)
    );
}

#[test]
fn criterion_03_noisy_ghz3_thresholds() {
    let g = modified_transposition_map(3);
    let family = |mu: f64| states::white_noise_mix(&states::ghz(3), mu).unwrap();
    let map_t = single_threshold(&g, family, Detector::MapEig);
    let h1_t = single_threshold(&g, family, Detector::Hankel(1));
    let h2_t = single_threshold(&g, family, Detector::Hankel(2));
    assert!((map_t - 0.733).abs() <= THRESHOLD_TOL, "map-eig {map_t}");
    assert!((h1_t - 0.934).abs() <= THRESHOLD_TOL, "H1 {h1_t}");
    assert!((h2_t - 0.733).abs() <= THRESHOLD_TOL, "H2 {h2_t}");
    println!(
        "PASS criterion 3: noisy GHZ3 thresholds map {map_t:.4} / H1 {h1_t:.4} / H2 {h2_t:.4}"
    );
}

#[test]
fn criterion_04_noisy_w3_thresholds() {
    let g = plain_transposition_map(3);
    let family = |mu: f64| states::white_noise_mix(&states::w3(), mu).unwrap();
    let map_t = single_threshold(&g, family, Detector::MapEig);
    let h2_t = single_threshold(&g, family, Detector::Hankel(2));
    let h3_t = single_threshold(&g, family, Detector::Hankel(3));
    assert!((map_t - 0.899).abs() <= THRESHOLD_TOL, "map-eig {map_t}");
    assert!((h2_t - 0.953).abs() <= THRESHOLD_TOL, "H2 {h2_t}");
    assert!((h3_t - 0.899).abs() <= THRESHOLD_TOL, "H3 {h3_t}");
    println!(
        "PASS criterion 4: noisy W3 thresholds map {map_t:.4} / H2 {h2_t:.4} / H3 {h3_t:.4}"
    );
}

#[test]
fn criterion_05_ghz_w_mixture_thresholds() {
    let g = modified_transposition_map(3);
    let ghz = states::ghz(3);
    let w = states::w3();
    let family = |mu: f64| states::convex_mix(&ghz, &w, mu).unwrap();
    let map_t = single_threshold(&g, family, Detector::MapEig);
    let h1_t = single_threshold(&g, family, Detector::Hankel(1));
    let h2_t = single_threshold(&g, family, Detector::Hankel(2));
    let h3_scan = scan_family(&g, family, Detector::Hankel(3));
    // H3 detects the same region as the map detector
    assert_eq!(h3_scan.regions.len(), 1);
    let h3_t = h3_scan.regions[0].0;
    assert!((map_t - 0.746).abs() <= THRESHOLD_TOL, "map-eig {map_t}");
    assert!((h1_t - 0.945).abs() <= THRESHOLD_TOL, "H1 {h1_t}");
    assert!((h2_t - 0.755).abs() <= THRESHOLD_TOL, "H2 {h2_t}");
    assert!((h3_t - map_t).abs() <= THRESHOLD_TOL, "H3 {h3_t} vs map {map_t}");
    println!(
        "PASS criterion 5: GHZ/W mixture thresholds map {map_t:.4} / H1 {h1_t:.4} / H2 {h2_t:.4} / H3 {h3_t:.4}"
    );
}

#[test]
fn criterion_06_ghz4_pure_detection() {
    let g = modified_transposition_map(4);
    assert!((g.c() - 3.0).abs() < 1e-12);
    let m = compute_moments(&g, &states::ghz(4), 5).unwrap();
    let report = hankel_report(&m, 2, None).unwrap();
    assert!(report.det(1) > 0.0, "det H1 = {}", report.det(1));
    assert!(report.det(2) < 0.0, "det H2 = {}", report.det(2));
    println!(
        "PASS criterion 6: GHZ4 modified map, det H1 = {:.1} > 0, det H2 = {:.1} < 0",
        report.det(1),
        report.det(2)
    );
}

#[test]
fn criterion_07_noisy_ghz4_thresholds() {
    let g = modified_transposition_map(4);
    let family = |mu: f64| states::white_noise_mix(&states::ghz(4), mu).unwrap();
    let map_t = single_threshold(&g, family, Detector::MapEig);
    let h2_t = single_threshold(&g, family, Detector::Hankel(2));
    let h1_scan = scan_family(&g, family, Detector::Hankel(1));
    assert!((map_t - 0.873).abs() <= THRESHOLD_TOL, "map-eig {map_t}");
    assert!((h2_t - 0.873).abs() <= THRESHOLD_TOL, "H2 {h2_t}");
    assert!(!h1_scan.fires_anywhere(), "H1 fired in {:?}", h1_scan.regions);
    println!(
        "PASS criterion 7: noisy GHZ4 thresholds map {map_t:.4} / H2 {h2_t:.4}, H1 never fires"
    );
}

#[test]
fn criterion_08_reduction_map_detection() {
    let g = reduction_map(3);
    assert!((g.c() - 1.0).abs() < 1e-12);

    let m = compute_moments(&g, &states::ghz(3), 5).unwrap();
    let report = hankel_report(&m, 2, None).unwrap();
    assert!(report.det(1) < 0.0, "det H1 = {}", report.det(1));
    assert!(report.det(2) < 0.0, "det H2 = {}", report.det(2));

    let noisy = |mu: f64| states::white_noise_mix(&states::ghz(3), mu).unwrap();
    let map_t = single_threshold(&g, noisy, Detector::MapEig);
    let h1_t = single_threshold(&g, noisy, Detector::Hankel(1));
    let h2_t = single_threshold(&g, noisy, Detector::Hankel(2));
    assert!((map_t - 0.733).abs() <= THRESHOLD_TOL, "map-eig {map_t}");
    assert!((h1_t - 0.934).abs() <= THRESHOLD_TOL, "H1 {h1_t}");
    assert!((h2_t - 0.733).abs() <= THRESHOLD_TOL, "H2 {h2_t}");

    // the GHZ/W mixture has two detection regions under the reduction map
    let ghz = states::ghz(3);
    let w = states::w3();
    let mixture = |mu: f64| states::convex_mix(&ghz, &w, mu).unwrap();
    let map_scan = scan_family(&g, mixture, Detector::MapEig);
    assert_eq!(map_scan.regions.len(), 2, "map regions {:?}", map_scan.regions);
    assert_eq!(map_scan.regions[0].0, 0.0);
    assert!((map_scan.regions[0].1 - 0.182).abs() <= THRESHOLD_TOL);
    assert!((map_scan.regions[1].0 - 0.746).abs() <= THRESHOLD_TOL);
    assert_eq!(map_scan.regions[1].1, 1.0);

    let h2_scan = scan_family(&g, mixture, Detector::Hankel(2));
    assert_eq!(h2_scan.regions.len(), 2, "H2 regions {:?}", h2_scan.regions);
    assert!((h2_scan.regions[0].1 - 0.162).abs() <= THRESHOLD_TOL);
    assert!((h2_scan.regions[1].0 - 0.758).abs() <= THRESHOLD_TOL);

    let h3_scan = scan_family(&g, mixture, Detector::Hankel(3));
    assert_eq!(h3_scan.regions.len(), 2, "H3 regions {:?}", h3_scan.regions);
    assert!((h3_scan.regions[0].1 - map_scan.regions[0].1).abs() <= THRESHOLD_TOL);
    assert!((h3_scan.regions[1].0 - map_scan.regions[1].0).abs() <= THRESHOLD_TOL);

    println!(
        "PASS criterion 8: reduction map; noisy GHZ3 {map_t:.4}/{h1_t:.4}/{h2_t:.4}; mixture regions map {:?} H2 {:?} H3 {:?}",
        map_scan.regions, h2_scan.regions, h3_scan.regions
    );
}

#[test]
fn criterion_09_lindblad_equivalences() {
    let t = SingleSiteMap::from_lindblad(LindbladSpec::new(0.5, -0.5, 0.5).unwrap());
    let dev_t = max_abs_diff(
        t.superoperator(),
        SingleSiteMap::transposition(2).superoperator(),
    );
    let r = SingleSiteMap::from_lindblad(LindbladSpec::new(0.5, 0.5, 0.5).unwrap());
    let dev_r = max_abs_diff(
        r.superoperator(),
        SingleSiteMap::reduction(2).superoperator(),
    );
    assert!(dev_t < 1e-12, "transposition deviation {dev_t}");
    assert!(dev_r < 1e-12, "reduction deviation {dev_r}");
    println!(
        "PASS criterion 9: Lindblad superoperator deviations {dev_t:.2e} (transposition), {dev_r:.2e} (reduction)"
    );
}

#[test]
fn criterion_10_nu_values() {
    let t = estimate_nu(&SingleSiteMap::transposition(2), 500, 2024);
    assert!((t.value - 0.5).abs() <= 1e-6, "nu(T) = {}", t.value);
    let r = estimate_nu(&SingleSiteMap::reduction(2), 500, 2025);
    assert!((r.value - 0.5).abs() <= 1e-6, "nu(R) = {}", r.value);
    println!(
        "PASS criterion 10: nu(transposition) = {:.9}, nu(reduction) = {:.9}",
        t.value, r.value
    );
}

#[test]
fn criterion_11_realization_equivalence() {
    let g = plain_transposition_map(3);
    let t = SingleSiteMap::transposition(2);

    let mut worst_s2 = 0.0_f64;
    let mut worst_s3 = 0.0_f64;
    for seed in 0..20u64 {
        let rho = states::random_density(SystemShape::qubits(3), 1000 + seed).unwrap();
        let direct = compute_moments(&g, &rho, 3).unwrap();
        worst_s2 = worst_s2.max((second_moment_via_operators(&rho, &g).unwrap() - direct.s(2)).abs());
        worst_s3 = worst_s3.max((third_moment_via_operators(&rho, &g).unwrap() - direct.s(3)).abs());
    }
    assert!(worst_s2 < 1e-9, "max |ds2| = {worst_s2}");
    assert!(worst_s3 < 1e-8, "max |ds3| = {worst_s3}");

    let mut worst_term = 0.0_f64;
    for seed in 0..5u64 {
        let rho = states::random_density(SystemShape::qubits(3), 2000 + seed).unwrap();
        let phis: Vec<_> = (0..3)
            .map(|s| t.apply_on_sites(&[s], &rho).unwrap().matrix().clone())
            .collect();
        for i in 0..3usize {
            for j in 0..3usize {
                for k in 0..3usize {
                    let obs = build_term_observable(&TermIndexString(vec![i, j, k]), &g).unwrap();
                    let via_ops = expectation_complex(&obs, &rho).unwrap();
                    let direct: gmedet::Complex64 =
                        (&phis[i] * &phis[j] * &phis[k]).diagonal().iter().sum();
                    worst_term = worst_term.max((via_ops - direct).norm());
                }
            }
        }
    }
    assert!(worst_term < 1e-9, "max term deviation = {worst_term}");
    println!(
        "PASS criterion 11: |ds2| <= {worst_s2:.2e}, |ds3| <= {worst_s3:.2e}, 27-string deviation <= {worst_term:.2e}"
    );
}

#[test]
fn criterion_12_soundness_on_biseparable_states() {
    let mut checked = 0usize;
    for n in [3usize, 4] {
        let maps = [plain_transposition_map(n), reduction_map(n)];
        for seed in 0..200u64 {
            let rho = states::random_biseparable(n, 3, 10_000 + seed + 1000 * n as u64);
            for g in &maps {
                let det = min_eig_detect(g, &rho, None).unwrap();
                assert!(
                    det.min_eigenvalue >= -1e-9,
                    "N={n} seed {seed} map {}: min eig {}",
                    g.base().label(),
                    det.min_eigenvalue
                );
                let m = compute_moments(g, &rho, 7).unwrap();
                let report = hankel_report(&m, 3, None).unwrap();
                for l in 1..=3 {
                    assert!(
                        report.det(l) >= -order_tolerance(1e-9, m.s(1), l),
                        "N={n} seed {seed} map {}: det H{l} = {}",
                        g.base().label(),
                        report.det(l)
                    );
                }
                checked += 1;
            }
        }
    }
    println!("PASS criterion 12: zero violations over {checked} biseparable map applications");
}

#[test]
fn criterion_13_verdict_scale_invariance() {
    let g = modified_transposition_map(3);
    for seed in 0..20u64 {
        let rho = states::random_density(SystemShape::qubits(3), 3000 + seed).unwrap();
        let m = compute_moments(&g, &rho, 7).unwrap();
        let base = hankel_report(&m, 3, None).unwrap();
        for alpha in [0.5, 2.0] {
            let scaled = hankel_report(&m.scaled(alpha), 3, None).unwrap();
            assert_eq!(
                base.per_order, scaled.per_order,
                "seed {seed} alpha {alpha}"
            );
            assert_eq!(base.gme_detected, scaled.gme_detected);
        }
    }
    println!("PASS criterion 13: verdicts invariant under output scaling by 0.5 and 2");
}

#[test]
fn criterion_14_werner_p3_ppt() {
    let split = gmedet::gme::canonical_bipartitions(2).unwrap().remove(0);
    let p3_fires = |w: f64| {
        let rho = states::werner_2qubit(w).unwrap();
        p3_ppt_check(&pt_moments(&rho, &split, 3).unwrap()).unwrap() == PptVerdict::NptDetected
    };
    let full_ppt_fires = |w: f64| {
        let rho = states::werner_2qubit(w).unwrap();
        let pt = partial_transpose_matrix(rho.matrix(), &[0], rho.shape()).unwrap();
        gmedet::qcore::eigvalsh(&pt).unwrap()[0] < -1e-12
    };
    let grid = GridSpec::new(0.0, 1.0, 101);
    let p3_scan = scan(p3_fires, &grid, BISECT_TOL);
    let ppt_scan = scan(full_ppt_fires, &grid, BISECT_TOL);
    assert_eq!(p3_scan.regions.len(), 1);
    assert_eq!(ppt_scan.regions.len(), 1);
    let p3_threshold = p3_scan.regions[0].0;
    let ppt_threshold = ppt_scan.regions[0].0;
    assert!((p3_threshold - 1.0 / 3.0).abs() <= THRESHOLD_TOL, "p3 {p3_threshold}");
    assert!((p3_threshold - ppt_threshold).abs() <= THRESHOLD_TOL);
    println!(
        "PASS criterion 14: Werner p3-PPT threshold {p3_threshold:.4} matches full PPT {ppt_threshold:.4}"
    );
}

#[test]
fn criterion_15_shot_simulator() {
    let rho = states::random_density(SystemShape::qubits(3), 555).unwrap();
    let swap = gmedet::realization::swap_op(2);
    let obs = MultiCopyObservable::new(2, 2, vec![swap.clone(), swap.clone(), swap]).unwrap();
    let exact = gmedet::realization::expectation(&obs, &rho).unwrap();

    let big = sample_expectation(&obs, &rho, 1_000_000, 42).unwrap();
    assert!(
        (big.mean - exact).abs() < 5.0 * big.std_error,
        "bias {} vs stderr {}",
        (big.mean - exact).abs(),
        big.std_error
    );

    let se3 = sample_expectation(&obs, &rho, 1_000, 43).unwrap().std_error;
    let se4 = sample_expectation(&obs, &rho, 10_000, 44).unwrap().std_error;
    let se5 = sample_expectation(&obs, &rho, 100_000, 45).unwrap().std_error;
    let sqrt10 = 10f64.sqrt();
    for (lo, hi, label) in [(se3, se4, "1e3/1e4"), (se4, se5, "1e4/1e5")] {
        let ratio = lo / hi;
        assert!(
            ratio > sqrt10 / 2.0 && ratio < sqrt10 * 2.0,
            "{label} stderr ratio {ratio}"
        );
    }
    println!(
        "PASS criterion 15: 1e6-shot bias {:.2e} < 5 stderr, stderr scaling ratios {:.2} and {:.2}",
        (big.mean - exact).abs(),
        se3 / se4,
        se4 / se5
    );
}
