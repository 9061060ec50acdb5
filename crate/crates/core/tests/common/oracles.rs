//! Independent answers for the corpus benchmarks, computed without the compiler.

use std::collections::BTreeSet;

/// Digits for S,E,N,D,M,O,R,Y with distinct values, leading digits nonzero.
pub fn send_oracle() -> Vec<[i64; 8]> {
    let mut out = Vec::new();
    let mut d = [0i64; 8];
    fn go(k: usize, used: u16, d: &mut [i64; 8], out: &mut Vec<[i64; 8]>) {
        if k == 8 {
            let [s, e, n, dd, m, o, r, y] = *d;
            let send = 1000 * s + 100 * e + 10 * n + dd;
            let more = 1000 * m + 100 * o + 10 * r + e;
            let money = 10000 * m + 1000 * o + 100 * n + 10 * e + y;
            if s != 0 && m != 0 && send + more == money {
                out.push(*d);
            }
            return;
        }
        for v in 0..10 {
            if used & (1 << v) == 0 {
                d[k] = v;
                go(k + 1, used | (1 << v), d, out);
            }
        }
    }
    go(0, 0, &mut d, &mut out);
    out
}

/// Queen placements found by trying every permutation of columns.
pub fn queens_oracle(n: usize) -> BTreeSet<Vec<i64>> {
    fn permute(k: usize, cols: &mut Vec<i64>, out: &mut BTreeSet<Vec<i64>>) {
        if k == cols.len() {
            let ok = (0..cols.len()).all(|i| {
                (i + 1..cols.len()).all(|j| (cols[i] - cols[j]).abs() != (j - i) as i64)
            });
            if ok {
                out.insert(cols.clone());
            }
            return;
        }
        for i in k..cols.len() {
            cols.swap(k, i);
            permute(k + 1, cols, out);
            cols.swap(k, i);
        }
    }
    let mut out = BTreeSet::new();
    permute(0, &mut (1..=n as i64).collect(), &mut out);
    out
}

/// Stable matchings among all 120 perfect matchings of the preference tables.
pub fn stable_oracle(fm: &scomma_core::FlatModel) -> BTreeSet<Vec<i64>> {
    let table = |name: &str| -> Vec<i64> {
        fm.table(name).unwrap().values.iter().map(|v| v.as_int().unwrap()).collect()
    };
    let men: Vec<Vec<i64>> = (1..=5).map(|m| table(&format!("man_{m}_rank"))).collect();
    let women: Vec<Vec<i64>> = (1..=5).map(|w| table(&format!("woman_{w}_rank"))).collect();
    let mut out = BTreeSet::new();
    let mut wife: Vec<i64> = (1..=5).collect();
    fn permute(k: usize, wife: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
        if k == wife.len() {
            return f(wife);
        }
        for i in k..wife.len() {
            wife.swap(k, i);
            permute(k + 1, wife, f);
            wife.swap(k, i);
        }
    }
    permute(0, &mut wife, &mut |wife| {
        let husband = |w: i64| wife.iter().position(|&x| x == w).unwrap() as i64 + 1;
        let blocking = (1..=5i64).any(|m| {
            (1..=5i64).any(|w| {
                let mr = &men[m as usize - 1];
                let wr = &women[w as usize - 1];
                mr[w as usize - 1] < mr[wife[m as usize - 1] as usize - 1]
                    && wr[m as usize - 1] < wr[husband(w) as usize - 1]
            })
        });
        if !blocking {
            out.insert(wife.to_vec());
        }
    });
    out
}
