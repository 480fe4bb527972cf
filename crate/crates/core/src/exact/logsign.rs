//! Exact sign decisions for linear combinations of logarithms of rationals.
//!
//! The almost-sure check needs the sign of `sum_i c_i * ln(r_i)` with exact
//! rational `c_i` and positive rational `r_i`. Three routes compose into a
//! total decision procedure:
//!
//! 1. exact zero detection by factor refinement: the sum is zero iff the
//!    product `prod r_i^{c_i}` is 1, decidable over a pairwise-coprime base
//!    of all numerators and denominators without factoring into primes;
//! 2. a fast outward-widened f64 interval, accepted only away from the
//!    boundary;
//! 3. arbitrary-precision rational enclosures of each logarithm from the
//!    atanh series with explicit tail bounds, at escalating precision.
//!
//! Once route 1 has ruled out zero, route 3 terminates with the true sign.

use super::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Sign of `sum (c, r) of c * ln(r)` versus zero. `None` only when every
/// route is exhausted, which does not happen for inputs whose zero-ness is
/// decidable by factor refinement (all of ours).
pub fn log_linear_sign(terms: &[(Rat, Rat)]) -> Option<Ordering> {
    let terms: Vec<(Rat, Rat)> = terms
        .iter()
        .filter(|(c, r)| !c.is_zero() && !r.is_one())
        .cloned()
        .collect();
    for (_, r) in &terms {
        assert!(r.is_positive(), "log of non-positive ratio");
    }
    if terms.is_empty() {
        return Some(Ordering::Equal);
    }

    if product_is_one(&terms) {
        return Some(Ordering::Equal);
    }

    // Fast path: f64 with generous widening, accepted away from zero.
    let mut sum = 0.0f64;
    let mut magnitude = 0.0f64;
    for (c, r) in &terms {
        let term = c.to_f64() * r.ln_f64();
        sum += term;
        magnitude += term.abs();
    }
    let slack = 1e-9 * (1.0 + magnitude);
    if sum.is_finite() && sum.abs() > slack {
        return Some(if sum > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        });
    }

    // Rigorous route: rational enclosures at escalating precision. The sum
    // is known nonzero, so some precision separates it from zero.
    let mut bits = 96u32;
    while bits <= 24_576 {
        let mut lo = Rat::zero();
        let mut hi = Rat::zero();
        for (c, r) in &terms {
            let (llo, lhi) = ln_enclosure(r, bits);
            let (tlo, thi) = if c.is_negative() {
                (c * &lhi, c * &llo)
            } else {
                (c * &llo, c * &lhi)
            };
            lo = &lo + &tlo;
            hi = &hi + &thi;
        }
        if lo.is_positive() {
            return Some(Ordering::Greater);
        }
        if hi.is_negative() {
            return Some(Ordering::Less);
        }
        bits *= 2;
    }
    None
}

/// Whether `prod r^c = 1` exactly, via a coprime base of all numerators and
/// denominators. Sound and complete without integer factorization.
fn product_is_one(terms: &[(Rat, Rat)]) -> bool {
    // map: positive integer value > 1  ->  accumulated rational exponent
    let mut values: BTreeMap<BigInt, Rat> = BTreeMap::new();
    let mut push = |v: &BigInt, c: Rat| {
        let v = v.abs();
        if v.is_one() {
            return;
        }
        let entry = values.entry(v).or_insert_with(Rat::zero);
        let sum = &*entry + &c;
        *entry = sum;
    };
    for (c, r) in terms {
        push(r.numer(), c.clone());
        push(r.denom(), -c.clone());
    }
    values.retain(|_, c| !c.is_zero());

    // Factor refinement: split entries on shared gcds until pairwise
    // coprime. The invariant `prod value^exp` never changes.
    loop {
        let keys: Vec<BigInt> = values.keys().cloned().collect();
        let mut split = None;
        'outer: for i in 0..keys.len() {
            for j in i + 1..keys.len() {
                let g = keys[i].gcd(&keys[j]);
                if !g.is_one() {
                    split = Some((keys[i].clone(), keys[j].clone(), g));
                    break 'outer;
                }
            }
        }
        let Some((a, b, g)) = split else { break };
        let ea = values.remove(&a).unwrap();
        let eb = values.remove(&b).unwrap();
        let mut add = |v: BigInt, c: Rat| {
            if v.is_one() || c.is_zero() {
                return;
            }
            let entry = values.entry(v).or_insert_with(Rat::zero);
            let sum = &*entry + &c;
            if sum.is_zero() {
                // removing the key keeps the loop shrinking
                *entry = Rat::zero();
            } else {
                *entry = sum;
            }
        };
        add(g.clone(), &ea + &eb);
        add(&a / &g, ea);
        add(&b / &g, eb);
        values.retain(|_, c| !c.is_zero());
    }

    values.is_empty()
}

/// Rigorous enclosure of `ln(x)` for positive rational `x`: returns
/// `(lo, hi)` with `lo <= ln(x) <= hi` and width at most `2^-bits`-ish.
pub fn ln_enclosure(x: &Rat, bits: u32) -> (Rat, Rat) {
    assert!(x.is_positive(), "ln of non-positive rational");
    if x.is_one() {
        return (Rat::zero(), Rat::zero());
    }
    // x = 2^e * m with m in [1, 2)
    let mut e: i64 = x.numer().bits() as i64 - x.denom().bits() as i64;
    let two = Rat::int(2);
    let mut m = if e >= 0 {
        x / &two.pow(e).unwrap()
    } else {
        x * &two.pow(-e).unwrap()
    };
    if m < Rat::one() {
        e -= 1;
        m = &m * &two;
    }
    debug_assert!(m >= Rat::one() && m < two);

    let (mlo, mhi) = atanh_ln(&m, bits);
    if e == 0 {
        return (mlo, mhi);
    }
    let (l2lo, l2hi) = ln2_enclosure(bits);
    let er = Rat::int(e);
    let (elo, ehi) = if e > 0 {
        (&er * &l2lo, &er * &l2hi)
    } else {
        (&er * &l2hi, &er * &l2lo)
    };
    (&elo + &mlo, &ehi + &mhi)
}

/// ln(m) for m in [1, 2) via ln(m) = 2*atanh(t), t = (m-1)/(m+1) in [0, 1/3).
fn atanh_ln(m: &Rat, bits: u32) -> (Rat, Rat) {
    let t = &(m - &Rat::one()) / &(m + &Rat::one());
    atanh_series(&t, bits)
}

fn ln2_enclosure(bits: u32) -> (Rat, Rat) {
    atanh_series(&Rat::of(1, 3), bits)
}

/// 2*atanh(t) for 0 <= t < 1/2, with the alternating-free series
/// 2*sum t^(2k+1)/(2k+1) and tail bound 2*t^(2K+1)/((2K+1)(1-t^2)).
fn atanh_series(t: &Rat, bits: u32) -> (Rat, Rat) {
    if t.is_zero() {
        return (Rat::zero(), Rat::zero());
    }
    let eps = Rat::one() / Rat::int(BigInt::one() << (bits as usize + 2));
    let t2 = t * t;
    let one_minus_t2 = &Rat::one() - &t2;
    let mut sum = Rat::zero();
    let mut power = t.clone(); // t^(2k+1)
    let mut k: i64 = 0;
    loop {
        sum = &sum + &(&power / &Rat::int(2 * k + 1));
        power = &power * &t2;
        k += 1;
        let tail = &(&power / &Rat::int(2 * k + 1)) / &one_minus_t2;
        if tail < eps {
            let lo = &sum + &sum; // 2*sum
            let hi = &lo + &(&tail + &tail);
            return (lo, hi);
        }
    }
}
