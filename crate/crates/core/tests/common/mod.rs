//! Independent reference computations shared by the integration suites.
//! Nothing here calls into the library's learners.

#![allow(dead_code)]

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact multinomial Naive Bayes posterior by direct product-form Bayes
/// rule in rational arithmetic: prior n_c / n times the product of
/// `((N_cj + alpha) / (N_c + alpha V))^x_j`, normalized.
pub fn exact_nb_posterior(
    docs: &[Vec<u32>],
    labels: &[usize],
    n_classes: usize,
    alpha: f64,
    query: &[u32],
) -> Vec<f64> {
    let alpha = BigRational::from_float(alpha).expect("finite alpha");
    let v = query.len();
    let n = docs.len() as u64;
    let mut joint = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let members: Vec<&Vec<u32>> = docs
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(d, _)| d)
            .collect();
        let prior = rat(members.len() as u64) / rat(n);
        let per_word: Vec<u64> = (0..v)
            .map(|j| members.iter().map(|d| d[j] as u64).sum())
            .collect();
        let total: u64 = per_word.iter().sum();
        let denom = rat(total) + alpha.clone() * rat(v as u64);
        let mut p = prior;
        for j in 0..v {
            let theta = (rat(per_word[j]) + alpha.clone()) / denom.clone();
            for _ in 0..query[j] {
                p *= theta.clone();
            }
        }
        joint.push(p);
    }
    let z = joint
        .iter()
        .fold(BigRational::zero(), |acc, p| acc + p.clone());
    joint
        .into_iter()
        .map(|p| (p / z.clone()).to_f64().expect("representable"))
        .collect()
}

/// Weighted Gini impurity `sum_side n_side/n * (1 - sum p^2)`.
pub fn weighted_gini(left: &[u64], right: &[u64]) -> f64 {
    let gini = |c: &[u64]| -> (f64, f64) {
        let n: u64 = c.iter().sum();
        if n == 0 {
            return (0.0, 0.0);
        }
        let nf = n as f64;
        (
            nf,
            1.0 - c.iter().map(|&k| (k as f64 / nf).powi(2)).sum::<f64>(),
        )
    };
    let (nl, gl) = gini(left);
    let (nr, gr) = gini(right);
    (nl * gl + nr * gr) / (nl + nr)
}

/// Best axis-aligned split of a bootstrap multiset by exhaustive search over
/// every feature and every midpoint between consecutive distinct values.
/// Returns `(impurity, feature, threshold)`; the first minimum in
/// (feature, threshold) order wins.
pub fn brute_force_best_split(
    rows: &[Vec<u32>],
    labels: &[usize],
    n_classes: usize,
    sample: &[u32],
) -> Option<(f64, usize, f64)> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..dim {
        let mut values: Vec<u32> = sample.iter().map(|&s| rows[s as usize][f]).collect();
        values.sort_unstable();
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] as f64 + w[1] as f64) / 2.0;
            let mut left = vec![0u64; n_classes];
            let mut right = vec![0u64; n_classes];
            for &s in sample {
                let s = s as usize;
                if (rows[s][f] as f64) <= t {
                    left[labels[s]] += 1;
                } else {
                    right[labels[s]] += 1;
                }
            }
            let g = weighted_gini(&left, &right);
            if best.map_or(true, |b| g < b.0 - 1e-12) {
                best = Some((g, f, t));
            }
        }
    }
    best
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    if sx == 0.0 || sy == 0.0 {
        0.0
    } else {
        cov / (sx * sy)
    }
}

/// Generated corpora for the Naive Bayes comparison: every vocabulary size
/// 1..=5, every corpus size 2..=10, two- and three-class labelings and
/// several smoothing values, with counts drawn from a fixed generator.
pub struct NbCase {
    pub docs: Vec<Vec<u32>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub alpha: f64,
    pub queries: Vec<Vec<u32>>,
}

pub fn nb_cases(reps: u64) -> Vec<NbCase> {
    // SplitMix64, kept local so the suite does not share the library's RNG.
    struct Mix(u64);
    impl Mix {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }
        fn below(&mut self, n: u64) -> u64 {
            self.next() % n
        }
    }
    let mut out = Vec::new();
    let mut rng = Mix(20_240_611);
    for v in 1..=5usize {
        for d in 2..=10usize {
            for n_classes in 2..=3usize {
                if d < n_classes {
                    continue;
                }
                for &alpha in &[1.0, 0.5, 0.1] {
                    for _ in 0..reps {
                        let docs: Vec<Vec<u32>> = (0..d)
                            .map(|_| (0..v).map(|_| rng.below(4) as u32).collect())
                            .collect();
                        // Every class present: the first n_classes docs seat them.
                        let labels: Vec<usize> = (0..d)
                            .map(|i| {
                                if i < n_classes {
                                    i
                                } else {
                                    rng.below(n_classes as u64) as usize
                                }
                            })
                            .collect();
                        let mut queries = docs.clone();
                        queries.push(vec![0; v]);
                        queries.push((0..v).map(|_| rng.below(6) as u32).collect());
                        out.push(NbCase {
                            docs,
                            labels,
                            n_classes,
                            alpha,
                            queries,
                        });
                    }
                }
            }
        }
    }
    out
}
