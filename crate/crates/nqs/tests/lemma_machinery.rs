//! Brute-force verification of the ratio-bound machinery against full
//! enumeration: the (R₁, R₂, Θ) wedge, the near-1 localization of the
//! full/truncated amplitude ratio, and the Cauchy behaviour of the
//! level-truncation sequence.

use nqs::bounds;
use nqs::exact;
use nqs::lrfd::build_perturbed_cluster;
use nqs::presets::{fig2a_profile, fig2b_profile};
use nqs::rbm::{log_psi, truncate};
use nqs::spinspace::enumerate_basis;

/// Ratios ψ_full/ψ_tr over the whole basis, with the "infinite" side
/// approximated by `proxy_levels` profile levels.
fn all_ratios(l: usize, pert_levels_kept: usize, proxy_levels: usize) -> Vec<num_complex::Complex64> {
    let profile = fig2b_profile();
    let full = build_perturbed_cluster(l, &profile, proxy_levels).unwrap();
    let tr = truncate(&full, (1 + pert_levels_kept) * l).unwrap();
    enumerate_basis(l)
        .unwrap()
        .map(|s| {
            let lf = log_psi(&full, &s);
            let lt = log_psi(&tr, &s);
            lf.ratio_to(&lt)
        })
        .collect()
}

#[test]
fn ratio_bounds_enclose_enumerated_ratios() {
    // fig2b at L = 9, Nh = 2L profile nodes kept, 60-level proxy
    let l = 9;
    let n = 2;
    let profile = fig2b_profile();
    let (r1, r2, theta) = bounds::ratio_bounds(&profile, l, n * l).unwrap();
    // the proxy itself sits inside the same wedge at m = 60, so widen by it
    let (p1, p2, ptheta) = bounds::ratio_bounds(&profile, l, 60 * l).unwrap();

    let ratios = all_ratios(l, n, 60);
    assert_eq!(ratios.len(), 512);
    let mut max_sq: f64 = 0.0;
    let mut min_sq = f64::INFINITY;
    let mut max_arg: f64 = 0.0;
    for z in &ratios {
        max_sq = max_sq.max(z.norm_sqr());
        min_sq = min_sq.min(z.norm_sqr());
        max_arg = max_arg.max(z.arg().abs());
    }
    assert!(max_sq <= r1 * p1, "max |ratio|² = {max_sq} above R1 = {r1}");
    assert!(min_sq >= r2 * p2, "min |ratio|² = {min_sq} below R2 = {r2}");
    assert!(max_arg <= theta + ptheta, "max |arg| = {max_arg} above Θ = {theta}");
    // the wedge is non-trivial and the sandwich holds
    assert!(r2 < 1.0 && 1.0 < r1 && theta > 0.0);
}

#[test]
fn truncation_to_one_level_stays_near_unity() {
    // keeping only the cluster level: every full/truncated ratio stays inside
    // the wedge drawn from the full profile tail P(0)
    let l = 9;
    let profile = fig2b_profile();
    let k = bounds::BoundConstants::standard();
    let x = l as f64 * bounds::q_val(&profile, l) * bounds::p_tail(&profile, 0).unwrap();
    let r1 = (4.0 * x).exp();
    let r2 = (-4.0 * k.beta1 * k.beta1 * x).exp();
    let theta = 4.0 * k.beta2 * x;

    // the wedge's farthest point from z = 1 sits at a corner (max/min
    // modulus at max angle)
    let corner = |msq: f64| (msq - 2.0 * msq.sqrt() * theta.cos() + 1.0).sqrt();
    let envelope = corner(r1).max(corner(r2));

    let ratios = all_ratios(l, 0, 60);
    for z in &ratios {
        assert!(z.norm_sqr() <= r1 * 1.001);
        assert!(z.norm_sqr() >= r2 * 0.999);
        assert!(z.arg().abs() <= theta * 1.001);
        assert!((z - num_complex::Complex64::new(1.0, 0.0)).norm() <= envelope);
    }
}

#[test]
fn level_sequence_is_cauchy_with_decreasing_increments() {
    // numerical Cauchy property: max_σ |ψ^{((n+1)L)} − ψ^{(nL)}| decreases
    // and the sequence settles to its limit within the theoretical envelope
    let l = 7;
    let profile = fig2a_profile();
    let levels = 24;
    let full = build_perturbed_cluster(l, &profile, levels).unwrap();
    let states: Vec<Vec<num_complex::Complex64>> = (0..=levels)
        .map(|n| {
            let tr = truncate(&full, (1 + n) * l).unwrap();
            enumerate_basis(l)
                .unwrap()
                .map(|s| log_psi(&tr, &s).amplitude())
                .collect()
        })
        .collect();
    let deltas: Vec<f64> = (0..levels)
        .map(|n| {
            states[n]
                .iter()
                .zip(&states[n + 1])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max)
        })
        .collect();
    let nt = bounds::n_theta(&profile, l).unwrap();
    for w in deltas.windows(2).skip(nt) {
        assert!(w[1] < w[0], "increments must decrease beyond n_theta: {deltas:?}");
    }
    assert!(deltas[levels - 1] < 1e-9, "geometric tail must be tiny by 24 levels");
}

#[test]
fn dominance_spot_checks_away_from_the_acceptance_grid() {
    // L values the acceptance suite does not cover
    for l in [7usize, 9] {
        let profile = fig2a_profile();
        let proxy = 60;
        let full = build_perturbed_cluster(l, &profile, proxy).unwrap();
        let full_sv = exact::build_state(&full).unwrap();
        let nt = bounds::n_theta(&profile, l).unwrap();
        for n in [nt + 1, nt + 4, nt + 9] {
            let tr_sv = exact::build_state(&truncate(&full, (1 + n) * l).unwrap()).unwrap();
            let e1 = exact::error_l2(&full_sv, &tr_sv).unwrap();
            let (b1, _) = bounds::truncation_error_bounds(&profile, l, n * l).unwrap();
            let (p1, _) = bounds::truncation_error_bounds(&profile, l, proxy * l).unwrap();
            let budget = (b1.sqrt() + p1.sqrt()).powi(2);
            assert!(e1 <= budget, "L={l} n={n}: {e1} > {budget}");
        }
    }
}
