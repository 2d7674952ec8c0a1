//! Structure of finite abelian groups given by elements and a group law.

use std::collections::HashMap;
use std::hash::Hash;

use num_integer::Integer;

/// Diagonalises an integer relation matrix and returns the invariant factors
/// `d_1 | d_2 | …` greater than one.
pub fn invariant_factors(mut m: Vec<Vec<i128>>) -> Vec<u64> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut diag = vec![];
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = m[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = Integer::div_floor(&m[i][t], &p);
                if q != 0 {
                    for j in t..cols {
                        m[i][j] -= q * m[t][j];
                    }
                }
                if m[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = Integer::div_floor(&m[t][j], &p);
                if q != 0 {
                    for row in m.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                if m[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
            // move the smallest remainder in row/column t onto the pivot
            let mut best = (t, t);
            for i in t..rows {
                if m[i][t] != 0 && m[i][t].abs() < m[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if m[t][j] != 0 && m[t][j].abs() < m[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            m.swap(t, best.0);
            for row in m.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(m[t][t].unsigned_abs() as u64);
        t += 1;
    }
    // unrelated generators would give infinite factors; callers only pass full-rank systems
    divisor_chain(diag)
}

/// Rewrites a list of cyclic orders as an invariant-factor chain, dropping 1s.
pub fn divisor_chain(mut d: Vec<u64>) -> Vec<u64> {
    let n = d.len();
    for i in 0..n {
        for j in i + 1..n {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d.retain(|&x| x != 1);
    d
}

/// Invariant factors of the group generated by `elements` (which must be closed
/// under `op`). Builds the group one cyclic extension at a time, recording the
/// relation `g^k = h` for each new generator `g`.
pub fn group_structure<T, F>(elements: &[T], identity: T, op: F) -> Vec<u64>
where
    T: Clone + Eq + Hash,
    F: Fn(&T, &T) -> T,
{
    let mut known: HashMap<T, Vec<i128>> = HashMap::new();
    known.insert(identity.clone(), vec![]);
    let mut relations: Vec<Vec<i128>> = vec![];
    let mut ngens = 0usize;
    for g in elements {
        if known.contains_key(g) {
            continue;
        }
        let mut k = 1i128;
        let mut acc = g.clone();
        let target = loop {
            acc = op(&acc, g);
            k += 1;
            if let Some(v) = known.get(&acc) {
                break v.clone();
            }
        };
        ngens += 1;
        let mut rel: Vec<i128> = target.iter().map(|x| -x).collect();
        rel.resize(ngens, 0);
        rel[ngens - 1] = k;
        for r in relations.iter_mut() {
            r.resize(ngens, 0);
        }
        relations.push(rel);
        let old: Vec<(T, Vec<i128>)> = known.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
        let mut power = identity.clone();
        for j in 0..k {
            if j > 0 {
                power = op(&power, g);
                for (h, v) in &old {
                    let mut w = v.clone();
                    w.resize(ngens, 0);
                    w[ngens - 1] = j;
                    known.entry(op(h, &power)).or_insert(w);
                }
            } else {
                for v in known.values_mut() {
                    v.resize(ngens, 0);
                }
            }
        }
    }
    invariant_factors(relations)
}

/// Order of `g` under `op`.
pub fn element_order<T: Clone + Eq, F: Fn(&T, &T) -> T>(g: &T, identity: &T, op: F) -> u64 {
    let mut acc = g.clone();
    let mut k = 1;
    while &acc != identity {
        acc = op(&acc, g);
        k += 1;
    }
    k
}
