//! Exact sums of roots of unity via reduction modulo cyclotomic polynomials.
//!
//! A sum `Σ_t n_t ζ^t` with `ζ = e^{2πi/L}` is the polynomial
//! `Σ_t n_t x^t` evaluated at `ζ`. Since `Φ_L` is the minimal polynomial of
//! `ζ` over the rationals, the sum is an integer `r` exactly when the
//! remainder of the polynomial modulo `Φ_L` is the constant `r`.

/// Coefficients of the `n`-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_polynomial(n: usize) -> Vec<i64> {
    assert!(n > 0, "cyclotomic index must be positive");
    // x^n - 1 = Π_{d | n} Φ_d(x)
    let mut poly = vec![0i64; n + 1];
    poly[0] = -1;
    poly[n] = 1;
    for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
        poly = divide_exact(&poly, &cyclotomic_polynomial(d));
    }
    poly
}

/// Quotient of an exact division by a monic polynomial.
fn divide_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let (q, r) = div_rem(num, den);
    debug_assert!(r.iter().all(|&c| c == 0), "inexact cyclotomic division");
    q
}

fn div_rem(num: &[i64], den: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let dd = den.len() - 1;
    debug_assert_eq!(den[dd], 1, "divisor must be monic");
    let mut rem = num.to_vec();
    if rem.len() <= dd {
        rem.resize(dd.max(1), 0);
        return (vec![0], rem);
    }
    let mut quot = vec![0i64; rem.len() - dd];
    for shift in (0..quot.len()).rev() {
        let lead = rem[shift + dd];
        if lead == 0 {
            continue;
        }
        quot[shift] = lead;
        for (i, &c) in den.iter().enumerate() {
            rem[shift + i] -= lead * c;
        }
    }
    rem.truncate(dd.max(1));
    (quot, rem)
}

/// Exact value of `Σ_t counts[t]·ζ_L^t` when it is an integer.
///
/// `modulus` must be `cyclotomic_polynomial(L)` and `counts` has length `L`.
pub fn integer_root_sum(counts: &[i64], modulus: &[i64]) -> Option<i64> {
    let (_, rem) = div_rem(counts, modulus);
    if rem.iter().skip(1).all(|&c| c == 0) {
        Some(rem[0])
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::root_of_unity;

    #[test]
    fn known_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn root_sums() {
        let phi = cyclotomic_polynomial(4);
        // 1 + i + -1 + -i
        assert_eq!(integer_root_sum(&[1, 1, 1, 1], &phi), Some(0));
        // 3·1 + (-1)
        assert_eq!(integer_root_sum(&[3, 0, 1, 0], &phi), Some(2));
        // 1 + i is not an integer
        assert_eq!(integer_root_sum(&[1, 1, 0, 0], &phi), None);
        assert_eq!(integer_root_sum(&[5], &cyclotomic_polynomial(1)), Some(5));
    }

    #[test]
    fn agrees_with_floating_point_sums() {
        for order in 1..=12usize {
            let phi = cyclotomic_polynomial(order);
            for mask in 0u32..(1 << order.min(10)) {
                let counts: Vec<i64> = (0..order)
                    .map(|t| ((mask >> (t % 10)) & 1) as i64 * (t as i64 % 3 + 1))
                    .collect();
                let float: num_complex::Complex64 = counts
                    .iter()
                    .enumerate()
                    .map(|(t, &n)| root_of_unity(t, order) * n as f64)
                    .sum();
                let is_int = float.im.abs() < 1e-9 && (float.re - float.re.round()).abs() < 1e-9;
                match integer_root_sum(&counts, &phi) {
                    Some(v) => assert!(is_int && (float.re - v as f64).abs() < 1e-9),
                    None => assert!(!is_int, "order {order} counts {counts:?} sum {float}"),
                }
            }
        }
    }
}
