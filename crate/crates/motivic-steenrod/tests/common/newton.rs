//! Power sums from Newton's identities, as polynomials in `e_1..e_d`.

use std::collections::BTreeMap;

pub type Poly = BTreeMap<Vec<u32>, i64>;

pub fn poly_mul(a: &Poly, b: &Poly, l: i64) -> Poly {
    let mut out = Poly::new();
    for (x, c) in a {
        for (y, d) in b {
            let e: Vec<u32> = x.iter().zip(y).map(|(i, j)| i + j).collect();
            *out.entry(e).or_insert(0) += c * d;
        }
    }
    out.retain(|_, c| {
        *c = c.rem_euclid(l);
        *c != 0
    });
    out
}

pub fn poly_add(a: &mut Poly, b: &Poly, scale: i64, l: i64) {
    for (e, c) in b {
        *a.entry(e.clone()).or_insert(0) += scale * c;
    }
    a.retain(|_, c| {
        *c = c.rem_euclid(l);
        *c != 0
    });
}

/// Power sums in the elementary symmetric polynomials by Newton's identities.
pub fn newton_power_sums(d: usize, up_to: usize, l: i64) -> Vec<Poly> {
    let e = |i: usize| -> Poly {
        let mut v = vec![0; d];
        if i == 0 || i > d {
            return Poly::new();
        }
        v[i - 1] = 1;
        Poly::from([(v, 1)])
    };
    let mut p: Vec<Poly> = vec![Poly::new()];
    for k in 1..=up_to {
        let mut pk = Poly::new();
        for i in 1..k {
            let sign = if i % 2 == 1 { 1 } else { -1 };
            poly_add(&mut pk, &poly_mul(&e(i), &p[k - i], l), sign, l);
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        poly_add(&mut pk, &e(k), sign * k as i64, l);
        p.push(pk);
    }
    p
}
