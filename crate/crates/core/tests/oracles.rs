//! Exact small-population oracles.

use commsir::reedfrost::{rf_brute_pmf, rf_pmf};
use commsir::replicate::run_replicates;
use commsir::sim::run_single;
use commsir::stats::discrete_tv;
use commsir::InfectiousPeriod;

/// Final-size law of the Reed-Frost epidemic by enumerating every directed
/// contact graph on `m + 1` individuals; individual 0 is the initial case.
fn digraph_law(m: usize, p: f64) -> Vec<f64> {
    let v = m + 1;
    let arcs: Vec<(usize, usize)> = (0..v).flat_map(|i| (0..v).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut law = vec![0.0; v + 1];
    for mask in 0u64..(1 << arcs.len()) {
        let mut out = vec![0u32; v];
        for (b, &(i, j)) in arcs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                out[i] |= 1 << j;
            }
        }
        let mut reached = 1u32;
        loop {
            let next = (0..v).filter(|&i| reached >> i & 1 == 1).fold(reached, |r, i| r | out[i]);
            if next == reached {
                break;
            }
            reached = next;
        }
        let e = mask.count_ones() as i32;
        law[reached.count_ones() as usize] += p.powi(e) * (1.0 - p).powi(arcs.len() as i32 - e);
    }
    law
}

#[test]
fn reed_frost_matches_digraph_enumeration() {
    for m in 1..=3 {
        for p in [0.05, 0.3, 0.7] {
            let law = digraph_law(m, p);
            let exact = rf_pmf(m, p).unwrap();
            let brute = rf_brute_pmf(m, p).unwrap();
            for k in 1..=m + 1 {
                assert!((law[k] - exact.prob(k)).abs() < 1e-12, "m={m} p={p} k={k}");
                assert!((law[k] - brute.prob(k)).abs() < 1e-12);
            }
        }
    }
}

/// Constant infectious period 1 makes the within-community epidemic a
/// Reed-Frost epidemic with `p = 1 - e^{-β}`.
#[test]
fn constant_period_single_community_is_reed_frost() {
    let beta = 0.25;
    let n_sus = 6;
    let period = InfectiousPeriod::constant(1.0).unwrap();
    let sizes = run_replicates(3, 200_000, 0, |_, rng| run_single(n_sus, 1, beta, &period, rng).0 as usize).unwrap();
    let pmf: Vec<f64> =
        std::iter::once(0.0).chain(rf_pmf(n_sus, -(-beta).exp_m1()).unwrap().iter().map(|(_, w)| w)).collect();
    let tv = discrete_tv(&sizes, &pmf).unwrap();
    assert!(tv < 0.005, "tv={tv}");
}

/// One susceptible, one infective: infection happens with probability
/// `E[1 - e^{-βI}] = 1 - L(β)`.
#[test]
fn two_person_epidemic_matches_laplace_transform() {
    for period in [
        InfectiousPeriod::exponential(1.5).unwrap(),
        InfectiousPeriod::gamma(3.0, 2.0).unwrap(),
        InfectiousPeriod::constant(0.7).unwrap(),
    ] {
        let beta = 0.8;
        let reps = 200_000u64;
        let hits = run_replicates(4, reps, 0, |_, rng| run_single(1, 1, beta, &period, rng).0 == 2)
            .unwrap()
            .into_iter()
            .filter(|&h| h)
            .count() as f64;
        let p = 1.0 - period.laplace(beta).unwrap();
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((hits / reps as f64 - p).abs() < 4.0 * se, "{period}: {} vs {p}", hits / reps as f64);
    }
}
