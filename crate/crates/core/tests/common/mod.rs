//! Shared oracle helpers for the integration suites. Everything here
//! recomputes expected values from first principles — integer factorials,
//! explicit trigonometry on hand-rolled complex pairs, accumulated product
//! forms — without touching the library kernels under test.

// Not every test target uses every helper.
#![allow(dead_code)]

use spinpair::spin::JointAmplitudes;

/// Complex number as a bare (re, im) pair, multiplied by hand.
pub type Cx = (f64, f64);

pub fn cx_mul(a: Cx, b: Cx) -> Cx {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

pub fn cx_norm_sqr(a: Cx) -> f64 {
    a.0 * a.0 + a.1 * a.1
}

pub fn factorial_u128(n: u64) -> u128 {
    (1..=n as u128).product::<u128>().max(1)
}

/// Exact single-sample binomial amplitudes `2^{-N/2} sqrt(C(N, k))`,
/// indexed by `k = J + M`, via integer arithmetic (valid through N = 20).
pub fn exact_binomial_amplitudes(n: u64) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let choose = factorial_u128(n) / (factorial_u128(k) * factorial_u128(n - k));
            (choose as f64).sqrt() / 2f64.powf(n as f64 / 2.0)
        })
        .collect()
}

/// Detection amplitude factor for anti-diagonal `m12`, recomputed with
/// explicit trigonometry: `(1 ± e^{-iθ})/2`, `θ = (N_tot/2 - m12) χτ`.
pub fn oracle_factor(total_atoms: u32, m12: f64, chi_tau: f64, plus: bool) -> Cx {
    let theta = (f64::from(total_atoms) / 2.0 - m12) * chi_tau;
    let (c, s) = (theta.cos(), -theta.sin());
    if plus {
        ((1.0 + c) / 2.0, s / 2.0)
    } else {
        ((1.0 - c) / 2.0, -s / 2.0)
    }
}

/// Per-port probabilities of the next click, from the oracle grid alone.
pub fn oracle_click_probabilities(grid: &[Vec<Cx>], n1: u32, n2: u32, chi_tau: f64) -> (f64, f64) {
    let (j1, j2) = (f64::from(n1) / 2.0, f64::from(n2) / 2.0);
    let norm: f64 = grid
        .iter()
        .flat_map(|row| row.iter())
        .map(|&a| cx_norm_sqr(a))
        .sum();
    let mut plus = 0.0;
    for (i, row) in grid.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            let m12 = (i as f64 - j1) + (j as f64 - j2);
            let half = (j1 + j2 - m12) * chi_tau / 2.0;
            plus += cx_norm_sqr(a) / norm * half.cos().powi(2);
        }
    }
    (plus, 1.0 - plus)
}

/// The state after a whole detection record, in one accumulated product:
/// exact binomial start, every amplitude multiplied by the product of its
/// anti-diagonal's factors (order provably irrelevant). Returns the
/// unnormalized grid and its squared norm — the record's total probability.
pub fn oracle_record_grid(
    n1: u32,
    n2: u32,
    chi_tau: f64,
    record: &[bool], // true = '+'
) -> (Vec<Vec<Cx>>, f64) {
    let a1 = exact_binomial_amplitudes(u64::from(n1));
    let a2 = exact_binomial_amplitudes(u64::from(n2));
    let (j1, j2) = (f64::from(n1) / 2.0, f64::from(n2) / 2.0);
    let total_atoms = n1 + n2;
    let mut norm_sq = 0.0;
    let grid: Vec<Vec<Cx>> = (0..=n1 as usize)
        .map(|i| {
            (0..=n2 as usize)
                .map(|j| {
                    let m12 = (i as f64 - j1) + (j as f64 - j2);
                    let mut amp: Cx = (a1[i] * a2[j], 0.0);
                    for &plus in record {
                        amp = cx_mul(amp, oracle_factor(total_atoms, m12, chi_tau, plus));
                    }
                    norm_sq += cx_norm_sqr(amp);
                    amp
                })
                .collect()
        })
        .collect();
    (grid, norm_sq)
}

/// Largest cell-wise distance between a library state and an oracle grid,
/// after normalizing the oracle side (the library keeps itself normalized).
pub fn max_cell_distance(state: &JointAmplitudes, oracle: &[Vec<Cx>], oracle_norm_sq: f64) -> f64 {
    let scale = oracle_norm_sq.sqrt();
    let mut worst: f64 = 0.0;
    for (i, row) in oracle.iter().enumerate() {
        for (j, &(re, im)) in row.iter().enumerate() {
            let got = state.amp(i, j);
            let dre = got.re - re / scale;
            let dim = got.im - im / scale;
            worst = worst.max((dre * dre + dim * dim).sqrt());
        }
    }
    worst
}
