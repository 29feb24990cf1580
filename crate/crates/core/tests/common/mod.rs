//! Independent reference implementations used as test oracles.
//!
//! These are deliberately naive: dense vectors, explicit weight matrices,
//! pair enumeration and factorial sums. They share no code with the crate.

#![allow(dead_code)]

use rand::Rng;

/// Straight-line ART1 over dense 0/1 vectors with explicit bottom-up and
/// top-down weights. Returns per-sample assignments and final templates.
pub fn reference_fit(xs: &[Vec<u8>], rho: f64, l: f64) -> (Vec<usize>, Vec<Vec<u8>>) {
    let mut td: Vec<Vec<u8>> = Vec::new();
    let mut bu: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::new();
    for x in xs {
        let x_norm: u32 = x.iter().map(|&b| b as u32).sum();
        assert!(x_norm > 0);
        // activations T_j = sum_i bu_j[i] * x[i]
        let t: Vec<f64> = bu
            .iter()
            .map(|w| w.iter().zip(x).map(|(wi, &xi)| wi * xi as f64).sum())
            .collect();
        // candidate order: activation descending, equal (within 1e-9) by id
        let mut order: Vec<usize> = (0..td.len()).collect();
        order.sort_by(|&a, &b| {
            if (t[a] - t[b]).abs() <= 1e-9 {
                a.cmp(&b)
            } else {
                t[b].partial_cmp(&t[a]).unwrap()
            }
        });
        let mut chosen = None;
        for j in order {
            let z: Vec<u8> = x.iter().zip(&td[j]).map(|(&a, &b)| a & b).collect();
            let z_norm: u32 = z.iter().map(|&b| b as u32).sum();
            let m = z_norm as f64 / x_norm as f64;
            if m >= rho {
                chosen = Some((j, z));
                break;
            }
        }
        let (j, template) = match chosen {
            Some((j, z)) => (j, z),
            None => {
                td.push(vec![0; x.len()]);
                bu.push(vec![0.0; x.len()]);
                (td.len() - 1, x.clone())
            }
        };
        let norm: u32 = template.iter().map(|&b| b as u32).sum();
        bu[j] = template.iter().map(|&b| l * b as f64 / (l - 1.0 + norm as f64)).collect();
        td[j] = template;
        out.push(j);
    }
    (out, td)
}

/// ARI from the four pair counts (both-same, only-a, only-b, both-different)
/// gathered by enumerating every pair.
pub fn brute_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0.0 {
        return if same_partition(a, b) { 1.0 } else { 0.0 };
    }
    2.0 * (n00 * n11 - n01 * n10) / den
}

/// True when `a` and `b` induce the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn labels(x: &[usize]) -> Vec<usize> {
    let mut v = x.to_vec();
    v.sort();
    v.dedup();
    v
}

/// AMI with arithmetic-mean normalisation, every term summed directly.
pub fn direct_ami(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let nf = n as f64;
    let la = labels(a);
    let lb = labels(b);
    let count = |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&i| pred(i)).count();
    let ai: Vec<usize> = la.iter().map(|&u| count(&|i| a[i] == u)).collect();
    let bj: Vec<usize> = lb.iter().map(|&v| count(&|i| b[i] == v)).collect();

    let mut mi = 0.0;
    for (&u, &au) in la.iter().zip(&ai) {
        for (&v, &bv) in lb.iter().zip(&bj) {
            let nij = count(&|i| a[i] == u && b[i] == v);
            if nij > 0 {
                let p = nij as f64 / nf;
                mi += p * (nf * nij as f64 / (au as f64 * bv as f64)).ln();
            }
        }
    }
    let h = |c: &[usize]| -> f64 {
        c.iter()
            .map(|&k| {
                let p = k as f64 / nf;
                -p * p.ln()
            })
            .sum()
    };
    let (ha, hb) = (h(&ai), h(&bj));

    let mut emi = 0.0;
    for &x in &ai {
        for &y in &bj {
            let lo = (x + y).saturating_sub(n).max(1);
            for nij in lo..=x.min(y) {
                let prob = fact(x) * fact(y) * fact(n - x) * fact(n - y)
                    / (fact(n) * fact(nij) * fact(x - nij) * fact(y - nij) * fact(n + nij - x - y));
                emi += nij as f64 / nf * (nf * nij as f64 / (x as f64 * y as f64)).ln() * prob;
            }
        }
    }
    let den = (ha + hb) / 2.0 - emi;
    if same_partition(a, b) {
        return 1.0;
    }
    if den.abs() < 1e-12 {
        return 0.0;
    }
    (mi - emi) / den
}

/// Random labels in `0..k`.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// Random non-zero 0/1 vector.
pub fn random_bits<R: Rng>(rng: &mut R, width: usize, density: f64) -> Vec<u8> {
    loop {
        let v: Vec<u8> = (0..width).map(|_| rng.gen_bool(density) as u8).collect();
        if v.contains(&1) {
            return v;
        }
    }
}
