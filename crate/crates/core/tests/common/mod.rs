//! Independent reference computations shared by the integration tests.
//! Written directly from the definitions, without going through the crate.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

/// `I(X;Y)` in nats of a joint given as nested rows.
pub fn mi_double_loop(p: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
    let ncols = p[0].len();
    let cols: Vec<f64> = (0..ncols).map(|j| p.iter().map(|r| r[j]).sum()).collect();
    let mut acc = 0.0;
    for (i, row) in p.iter().enumerate() {
        for (j, &pij) in row.iter().enumerate() {
            if pij > 0.0 {
                acc += pij * (pij / (rows[i] * cols[j])).ln();
            }
        }
    }
    acc
}

/// `I(V;E) − β·I(E;C)` of a deterministic assignment `v ↦ e`.
pub fn hard_objective(p: &[Vec<f64>], assign: &[usize], k: usize, beta: f64) -> f64 {
    let nc = p[0].len();
    let mut p_ve = vec![vec![0.0; k]; p.len()];
    let mut p_ec = vec![vec![0.0; nc]; k];
    for (v, row) in p.iter().enumerate() {
        p_ve[v][assign[v]] = row.iter().sum();
        for (c, &x) in row.iter().enumerate() {
            p_ec[assign[v]][c] += x;
        }
    }
    mi_double_loop(&p_ve) - beta * mi_double_loop(&p_ec)
}

/// All assignments of `n` items to two non-empty blocks, item 0 always in
/// block 0.
pub fn two_partitions(n: usize) -> Vec<Vec<usize>> {
    (1..(1u32 << (n - 1)))
        .map(|mask| {
            (0..n)
                .map(|i| {
                    if i == 0 {
                        0
                    } else {
                        ((mask >> (i - 1)) & 1) as usize
                    }
                })
                .collect()
        })
        .collect()
}

/// Maps labels to first-appearance order.
pub fn canonical(assign: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    assign
        .iter()
        .map(|e| match seen.iter().position(|s| s == e) {
            Some(i) => i,
            None => {
                seen.push(*e);
                seen.len() - 1
            }
        })
        .collect()
}

pub fn random_joint(rng: &mut ChaCha8Rng, nv: usize, nc: usize) -> Vec<Vec<f64>> {
    let raw: Vec<Vec<f64>> = (0..nv)
        .map(|_| (0..nc).map(|_| rng.gen_range(0.01..1.0)).collect())
        .collect();
    let total: f64 = raw.iter().flatten().sum();
    raw.into_iter()
        .map(|r| r.into_iter().map(|x| x / total).collect())
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Naive `HSV → RGB` used as a cross-check for the lamp colours.
pub fn hsv_reference(h: f64, s: f64, v: f64) -> [u8; 3] {
    let (s, v) = (s / 100.0, v / 100.0);
    let c = v * s;
    let hp = (h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let to8 = |u: f64| ((u + m) * 255.0).round() as u8;
    [to8(r), to8(g), to8(b)]
}
