#![allow(dead_code)]

use std::sync::Arc;

use grf_core::{parse_group_spec, Complex64, FiniteGroup, GroupRingElement, IntMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS: &[&str] = &[
    "Z2", "Z3", "Z4", "Z5", "Z6", "Z7", "Z8", "Z9", "Z10", "Z11", "Z12", "Z2xZ2", "Z2xZ4", "D3", "D4", "S3", "S4",
];

pub fn group(spec: &str) -> Arc<FiniteGroup> {
    Arc::new(parse_group_spec(spec).expect("corpus spec parses"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_real(g: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng) -> GroupRingElement<f64> {
    let c = (0..g.order()).map(|_| rng.random_range(-1.0..1.0)).collect();
    GroupRingElement::from_coeffs(g, c).unwrap()
}

pub fn random_complex(g: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng) -> GroupRingElement<Complex64> {
    let c = (0..g.order())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    GroupRingElement::from_coeffs(g, c).unwrap()
}

/// (x y)_g through the permutation matrices: with y' = y†, (x y'†)_g = x · A^g · conj(y')ᵀ.
/// Shares nothing with the convolution loop beyond the Cayley table.
#[allow(clippy::needless_range_loop)]
pub fn product_via_amat(x: &[Complex64], y: &[Complex64], g: &FiniteGroup) -> Vec<Complex64> {
    let n = g.order();
    let mut y_dag = vec![Complex64::new(0.0, 0.0); n];
    for h in g.elements() {
        y_dag[g.inverse(h).index()] = y[h.index()].conj();
    }
    g.elements()
        .map(|a| {
            let m: IntMatrix = grf_core::amat(g, a).unwrap();
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    if m.get(i, j) != 0 {
                        s += x[i] * y_dag[j].conj() * m.get(i, j) as f64;
                    }
                }
            }
            s
        })
        .collect()
}

/// Coefficientwise sup-norm difference of two complex vectors.
pub fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Classical RK4 on the phase system θᵢ' = (2κ/N) Σₖ sin(θₖ − θᵢ), written out independently.
pub fn phase_oracle(theta0: &[f64], kappa: f64, dt: f64, steps: usize) -> Vec<f64> {
    let n = theta0.len();
    let f = |th: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 2.0 * kappa / n as f64 * th.iter().map(|tk| (tk - th[i]).sin()).sum::<f64>())
            .collect()
    };
    let mut th = theta0.to_vec();
    for _ in 0..steps {
        let k1 = f(&th);
        let a: Vec<f64> = th.iter().zip(&k1).map(|(t, k)| t + 0.5 * dt * k).collect();
        let k2 = f(&a);
        let b: Vec<f64> = th.iter().zip(&k2).map(|(t, k)| t + 0.5 * dt * k).collect();
        let k3 = f(&b);
        let c: Vec<f64> = th.iter().zip(&k3).map(|(t, k)| t + dt * k).collect();
        let k4 = f(&c);
        for i in 0..n {
            th[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    th
}

/// Smallest signed angle between two phases.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Unit vectors on the ℤ₃ coefficient sphere whose φ-images lie on a great
/// circle through (1,1,1)/√3, so that (1,1,1)×φ(x^c) is a common normal.
pub fn z3_great_circle_agents(angles: &[f64], tilt: f64) -> Vec<[f64; 3]> {
    let s = 1.0 / 3f64.sqrt();
    let d = [s, s, s];
    let u0 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let u1 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    let u: Vec<f64> = (0..3).map(|k| tilt.cos() * u0[k] + tilt.sin() * u1[k]).collect();
    angles
        .iter()
        .map(|t| {
            let mut p = [0.0; 3];
            for k in 0..3 {
                p[k] = t.cos() * d[k] + t.sin() * u[k];
            }
            p
        })
        .collect()
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
