//! Naive metric definitions used as independent oracles.

use densepara::metrics::Clusters;

/// Every set partition of `0..n`, as cluster-index vectors (restricted growth strings).
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            cur.push(c);
            rec(i + 1, n, max.max(c), cur, out);
            cur.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut cur = vec![0];
    rec(1, n, 0, &mut cur, &mut out);
    out
}

pub fn clusters(rgs: &[usize]) -> Clusters {
    let k = rgs.iter().max().map_or(0, |m| m + 1);
    let mut out: Clusters = vec![Vec::new(); k];
    for (i, &c) in rgs.iter().enumerate() {
        out[c].push(format!("m{i}"));
    }
    out
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn ratio(n: f64, d: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        n / d
    }
}

/// Link-based MUC from the definition: links of each key entity minus those cut by the response.
pub fn naive_muc(key: &[usize], resp: &[usize]) -> (f64, f64) {
    let side = |a: &[usize], b: &[usize]| {
        let k = a.iter().max().map_or(0, |m| m + 1);
        let (mut num, mut den) = (0.0, 0.0);
        for c in 0..k {
            let members: Vec<usize> = (0..a.len()).filter(|&i| a[i] == c).collect();
            let mut parts: Vec<usize> = members.iter().map(|&i| b[i]).collect();
            parts.sort();
            parts.dedup();
            num += (members.len() - parts.len()) as f64;
            den += (members.len() - 1) as f64;
        }
        ratio(num, den)
    };
    (side(resp, key), side(key, resp))
}

pub fn naive_b3(key: &[usize], resp: &[usize]) -> (f64, f64) {
    let n = key.len();
    let side = |a: &[usize], b: &[usize]| {
        let mut total = 0.0;
        for i in 0..n {
            let same_a = (0..n).filter(|&j| a[j] == a[i]).count() as f64;
            let both = (0..n).filter(|&j| a[j] == a[i] && b[j] == b[i]).count() as f64;
            total += both / same_a;
        }
        total / n as f64
    };
    (side(resp, key), side(key, resp))
}

/// Best one-to-one alignment by enumerating every injection of the smaller side.
pub fn naive_ceaf(key: &[usize], resp: &[usize]) -> (f64, f64) {
    let kn = key.iter().max().map_or(0, |m| m + 1);
    let rn = resp.iter().max().map_or(0, |m| m + 1);
    let phi = |a: usize, b: usize| {
        let ka = key.iter().filter(|&&x| x == a).count();
        let rb = resp.iter().filter(|&&x| x == b).count();
        let both = (0..key.len())
            .filter(|&i| key[i] == a && resp[i] == b)
            .count();
        2.0 * both as f64 / (ka + rb) as f64
    };
    let m: Vec<Vec<f64>> = (0..kn)
        .map(|a| (0..rn).map(|b| phi(a, b)).collect())
        .collect();
    fn best(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == m.len() {
            return 0.0;
        }
        // a row may also stay unmatched when there are more rows than columns
        let mut top = if m.len() > used.len() {
            best(m, row + 1, used)
        } else {
            f64::MIN
        };
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                top = top.max(m[row][c] + best(m, row + 1, used));
                used[c] = false;
            }
        }
        if top == f64::MIN {
            best(m, row + 1, used)
        } else {
            top
        }
    }
    let sim = best(&m, 0, &mut vec![false; rn]);
    (ratio(sim, rn as f64), ratio(sim, kn as f64))
}
