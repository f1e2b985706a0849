//! Independent oracles: a quadrature normal CDF, brute-force cell sums and a
//! grid scan for the persistence solve.

use phack_core::rates::EXACT_TOL;
use phack_core::{
    fpr_bound, fpr_hacked, fpr_regime, power_at_new_cutoff, rr_hacked, rr_ratio, rr_regime,
    solve_psi_for_rr_ratio, table_regime, table_sound, TestDesign,
};

const PHI: f64 = 10.0 / 11.0;

/// Phi(x) = 1/2 + integral_0^x of the density, composite Simpson.
fn oracle_cdf(x: f64) -> f64 {
    let n = 20_000;
    let h = x / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = pdf(0.0) + pdf(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * pdf(i as f64 * h);
    }
    0.5 + sum * h / 3.0
}

fn oracle_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if oracle_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn oracle_power(power: f64, alpha: f64, new_alpha: f64) -> f64 {
    let delta = oracle_quantile(power) + oracle_quantile(1.0 - alpha);
    oracle_cdf(delta - oracle_quantile(1.0 - new_alpha))
}

#[test]
fn power_transfer_matches_quadrature() {
    for (power, alpha, new_alpha) in [
        (0.8, 0.05, 0.005),
        (0.999, 0.05, 0.005),
        (0.5, 0.05, 0.01),
        (0.9, 0.1, 0.001),
        (0.3, 0.05, 0.049),
    ] {
        let got = power_at_new_cutoff(power, alpha, new_alpha).unwrap();
        let want = oracle_power(power, alpha, new_alpha);
        assert!((got - want).abs() < 1e-6, "{power} {alpha} {new_alpha}: {got} vs {want}");
    }
    // Frozen from the quadrature oracle (and scipy.stats.norm).
    let p = power_at_new_cutoff(0.8, 0.05, 0.005).unwrap();
    assert!((p - 0.464400).abs() < 1e-6);
    let p = power_at_new_cutoff(0.999, 0.05, 0.005).unwrap();
    assert!((p - 0.984585).abs() < 1e-6);
}

#[test]
fn power_transfer_decreases_with_the_new_cutoff() {
    let cutoffs: Vec<f64> = (1..=50).map(|k| k as f64 / 1000.0).collect();
    let powers: Vec<f64> = cutoffs
        .iter()
        .map(|&c| power_at_new_cutoff(0.8, 0.05, c).unwrap())
        .collect();
    assert!(powers.windows(2).all(|w| w[0] < w[1]));
    assert!(powers.iter().all(|&p| p <= 0.8));
}

#[test]
fn sound_table_products() {
    let t = table_sound(&TestDesign::new(0.05, 0.2, PHI).unwrap());
    // 0.05 * 10/11 and 0.8 * 1/11
    assert!((t.sound_true_reject - 0.0454545454545).abs() < 1e-12);
    assert!((t.sound_false_reject - 0.0727272727273).abs() < 1e-12);
    assert!((t.sound_true_reject / (t.sound_true_reject + t.sound_false_reject) - 0.5 / 1.3).abs() < EXACT_TOL);
}

/// Rates rebuilt from raw products, not from the library tables.
fn brute_rates(alpha: f64, beta: f64, phi: f64, h: f64, psi: f64) -> (f64, f64) {
    let cells = [
        alpha * phi * (1.0 - h),
        h * psi,
        (1.0 - beta) * (1.0 - phi) * (1.0 - h),
    ];
    let total: f64 = cells.iter().sum();
    ((cells[0] + cells[1]) / total, cells[2] / total)
}

#[test]
fn closed_forms_match_cell_sums() {
    for (alpha, beta, h, psi) in [
        (0.05, 0.2, 0.0722, 1.0),
        (0.005, 0.2, 0.15, 0.5),
        (0.005, 0.5, 0.05, 0.75),
        (0.005, 0.2, 0.05, 0.0),
    ] {
        let d = TestDesign::new(alpha, beta, PHI).unwrap();
        let (fpr, rr) = brute_rates(alpha, beta, PHI, h, psi);
        assert!((fpr_regime(&d, h, psi).unwrap() - fpr).abs() < EXACT_TOL);
        assert!((rr_regime(&d, h, psi).unwrap() - rr).abs() < EXACT_TOL);
        let t = table_regime(&d, h, psi).unwrap();
        let r = t.rates().unwrap();
        assert!((r.fpr - fpr).abs() < EXACT_TOL);
    }
    let d = TestDesign::new(0.05, 0.2, PHI).unwrap();
    assert!((rr_hacked(&d, 0.0722).unwrap() - 0.3711).abs() < 1e-4);
    let d = TestDesign::new(0.005, 0.2, PHI).unwrap();
    assert!((fpr_bound(&d, 0.05, 0.0).unwrap() - 0.0588235).abs() < 1e-7);
    assert!((fpr_hacked(&TestDesign::new(0.05, 0.2, PHI).unwrap(), 0.15).unwrap()
        - brute_rates(0.05, 0.2, PHI, 0.15, 1.0).0)
        .abs()
        < EXACT_TOL);
}

/// Scans ψ on a fine grid of table-derived ratios and returns the crossing.
fn scan_psi(target: f64, h: f64) -> f64 {
    let old = TestDesign::new(0.05, 0.2, PHI).unwrap();
    let new = TestDesign::new(0.005, 0.2, PHI).unwrap();
    let old_rr = table_regime(&old, h, 1.0).unwrap().rates().unwrap().rr;
    let n = 1_000_000;
    let ratio = |k: usize| {
        let psi = k as f64 / n as f64;
        table_regime(&new, h, psi).unwrap().rates().unwrap().rr / old_rr
    };
    let k = (0..n).find(|&k| ratio(k + 1) < target).unwrap();
    (k as f64 + 0.5) / n as f64
}

#[test]
fn doubling_thresholds_match_grid_scan() {
    let old = TestDesign::new(0.05, 0.2, PHI).unwrap();
    let new = TestDesign::new(0.005, 0.2, PHI).unwrap();
    for (h, frozen) in [(0.05, 0.154545), (0.15, 0.396970)] {
        let solved = solve_psi_for_rr_ratio(2.0, &new, &old, h).unwrap();
        let scanned = scan_psi(2.0, h);
        assert!((solved - scanned).abs() < 1e-6, "h {h}: {solved} vs {scanned}");
        assert!((solved - frozen).abs() < 1e-6, "h {h}: {solved}");
        assert!((rr_ratio(&new, &old, h, solved).unwrap() - 2.0).abs() < 1e-8);
    }
}
