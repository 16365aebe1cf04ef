#![allow(dead_code)]

use std::collections::BTreeSet;

use alasso_core::DesignMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Gaussian design with unit-norm columns.
pub fn unit_gaussian_design(n: usize, p: usize, seed: u64) -> DesignMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    let mut x0 = DesignMatrix::from_column_major(n, p, data).unwrap();
    x0.normalize_columns();
    x0
}

/// The twenty small designs shared by the oracle, face-count and
/// lambda-invariance checks: n alternates 2, 3 and p cycles through 2..=5.
pub fn small_instances() -> Vec<(u64, DesignMatrix)> {
    (0..20u64)
        .map(|i| {
            let n = 2 + (i % 2) as usize;
            let p = 2 + ((i / 2) % 4) as usize;
            (i, unit_gaussian_design(n, p, i))
        })
        .collect()
}

/// Three unit columns at 15, 90 and 160 degrees.
pub fn hexagon() -> DesignMatrix {
    let cols: Vec<Vec<f64>> = [15.0_f64, 90.0, 160.0]
        .iter()
        .map(|deg| {
            let r = deg.to_radians();
            vec![r.cos(), r.sin()]
        })
        .collect();
    DesignMatrix::from_columns(&cols).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Exact determinant of a small integer matrix (fraction-free elimination).
pub fn bareiss_det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

fn combinations(v: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, v: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..v {
            cur.push(i);
            rec(i + 1, v, size, cur, out);
            cur.pop();
        }
    }
    rec(0, v, size, &mut cur, &mut out);
    out
}

/// f-vector of the hull of `t = 1..=v` on the moment curve in dimension `d`,
/// by brute force: a `d`-subset is a facet when every other point lies
/// strictly on one side of its hyperplane, and since the polytope is
/// simplicial every `k`-face is a `(k+1)`-subset of some facet.
pub fn moment_curve_f_vector(d: usize, v: usize) -> Vec<u64> {
    let point = |t: usize| -> Vec<i128> { (1..=d as u32).map(|e| (t as i128 + 1).pow(e)).collect() };
    let pts: Vec<Vec<i128>> = (0..v).map(point).collect();
    let mut faces: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); d];
    for facet in combinations(v, d) {
        let side = |q: usize| -> i128 {
            let mut m: Vec<Vec<i128>> = facet
                .iter()
                .map(|&i| std::iter::once(1).chain(pts[i].iter().copied()).collect())
                .collect();
            m.push(std::iter::once(1).chain(pts[q].iter().copied()).collect());
            bareiss_det(m).signum()
        };
        let signs: BTreeSet<i128> = (0..v).filter(|q| !facet.contains(q)).map(side).collect();
        assert!(!signs.contains(&0), "moment-curve points are in general position");
        if signs.len() == 1 {
            for k in 0..d {
                for sub in combinations(d, k + 1) {
                    faces[k].insert(sub.iter().map(|&a| facet[a]).collect());
                }
            }
        }
    }
    faces.iter().map(|f| f.len() as u64).collect()
}
