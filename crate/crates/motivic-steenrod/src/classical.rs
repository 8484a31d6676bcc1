//! The classical mod 2 Steenrod algebra on `Sq` sequences, used as an
//! independent reference for specialization at `t = 1`, `r = 0`.

use std::collections::BTreeMap;

/// Parity of binomial coefficients from Pascal's triangle.
pub struct BinomialTable {
    rows: Vec<Vec<bool>>,
}

impl BinomialTable {
    pub fn new(max: usize) -> BinomialTable {
        let mut rows: Vec<Vec<bool>> = Vec::with_capacity(max + 1);
        for n in 0..=max {
            let mut row = vec![false; n + 1];
            row[0] = true;
            row[n] = true;
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] ^ rows[n - 1][k];
            }
            rows.push(row);
        }
        BinomialTable { rows }
    }

    /// `C(n, k) mod 2`, zero outside `0 <= k <= n`.
    pub fn odd(&self, n: i64, k: i64) -> bool {
        if n < 0 || k < 0 || k > n {
            return false;
        }
        self.rows[n as usize][k as usize]
    }
}

/// A sum of `Sq` sequences with coefficients in `F_2`.
pub type SqSum = BTreeMap<Vec<u32>, ()>;

fn toggle(sum: &mut SqSum, seq: Vec<u32>) {
    if sum.remove(&seq).is_none() {
        sum.insert(seq, ());
    }
}

/// Rewrites `Sq^{a_1} ... Sq^{a_n}` into admissible sequences.
pub struct ClassicalAdem {
    table: BinomialTable,
}

impl ClassicalAdem {
    pub fn new(max_degree: usize) -> ClassicalAdem {
        ClassicalAdem {
            table: BinomialTable::new(max_degree),
        }
    }

    /// `Sq^a Sq^b` for `0 < a < 2b`.
    pub fn relation(&self, a: u32, b: u32) -> Vec<Vec<u32>> {
        let (ai, bi) = (a as i64, b as i64);
        (0..=a / 2)
            .filter(|&j| self.table.odd(bi - 1 - j as i64, ai - 2 * j as i64))
            .map(|j| {
                if j == 0 {
                    vec![a + b]
                } else {
                    vec![a + b - j, j]
                }
            })
            .collect()
    }

    pub fn normalize(&self, seq: &[u32]) -> SqSum {
        let mut done = SqSum::new();
        let mut todo = vec![seq.iter().copied().filter(|&a| a > 0).collect::<Vec<_>>()];
        while let Some(s) = todo.pop() {
            match (0..s.len().saturating_sub(1)).find(|&i| s[i] < 2 * s[i + 1]) {
                None => toggle(&mut done, s),
                Some(i) => {
                    for mid in self.relation(s[i], s[i + 1]) {
                        let mut t = s[..i].to_vec();
                        t.extend(mid);
                        t.extend_from_slice(&s[i + 2..]);
                        todo.push(t);
                    }
                }
            }
        }
        done
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_relations() {
        let c = ClassicalAdem::new(64);
        let names = |s: SqSum| s.into_keys().collect::<Vec<_>>();
        assert_eq!(names(c.normalize(&[1, 1])), Vec::<Vec<u32>>::new());
        assert_eq!(names(c.normalize(&[2, 2])), vec![vec![3, 1]]);
        assert_eq!(names(c.normalize(&[1, 2])), vec![vec![3]]);
        assert_eq!(names(c.normalize(&[2, 3])), vec![vec![4, 1], vec![5]]);
        assert_eq!(names(c.normalize(&[3, 2])), Vec::<Vec<u32>>::new());
    }
}
