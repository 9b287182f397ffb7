//! Arbitrary-precision combinatorial primitives shared by the exact counters.
//!
//! The alternating surjection sum is evaluated in signed arithmetic and
//! asserted nonnegative at the boundary. `binom` and `surj` memoize per
//! thread, since the nested sums of the exact counters reuse the same small
//! arguments heavily.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

/// Arbitrary-precision nonnegative integer; every counter returns this.
pub type Count = BigUint;

thread_local! {
    static BINOM_MEMO: RefCell<HashMap<(u64, u64), Count>> = RefCell::new(HashMap::new());
    static SURJ_MEMO: RefCell<HashMap<(u64, u64), Count>> = RefCell::new(HashMap::new());
}

/// Binomial coefficient; 0 when `k > n`.
pub fn binom(n: u64, k: u64) -> Count {
    if k > n {
        return Count::zero();
    }
    let k = k.min(n - k);
    if k == 0 {
        return Count::one();
    }
    BINOM_MEMO.with(|memo| {
        if let Some(v) = memo.borrow().get(&(n, k)) {
            return v.clone();
        }
        let mut res = Count::one();
        for i in 0..k {
            res = res * Count::from(n - i) / Count::from(i + 1);
        }
        memo.borrow_mut().insert((n, k), res.clone());
        res
    })
}

/// Number of surjective functions from an `n`-set onto an `m`-set.
///
/// Evaluates `sum_{i=0}^{m-1} (-1)^i binom(m,i) (m-i)^n`; in particular 0
/// whenever `m > n`, and 1 for `n = m = 0` (the empty function).
pub fn surj(n: u64, m: u64) -> Count {
    if m == 0 {
        return if n == 0 { Count::one() } else { Count::zero() };
    }
    if m > n {
        return Count::zero();
    }
    SURJ_MEMO.with(|memo| {
        if let Some(v) = memo.borrow().get(&(n, m)) {
            return v.clone();
        }
        let mut acc = BigInt::zero();
        for i in 0..m {
            let term = BigInt::from(binom(m, i)) * BigInt::from(pow(m - i, n));
            if i % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        assert_ne!(acc.sign(), Sign::Minus, "surjection sum went negative");
        let res = acc.to_biguint().expect("nonnegative");
        memo.borrow_mut().insert((n, m), res.clone());
        res
    })
}

/// Exact exponentiation, with `0^0 = 1` (empty product).
pub fn pow(base: u64, exp: u64) -> Count {
    pow_count(&Count::from(base), exp)
}

/// Exact exponentiation of an arbitrary-precision base.
pub fn pow_count(base: &Count, exp: u64) -> Count {
    let mut result = Count::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    result
}

pub fn factorial(n: u64) -> Count {
    (1..=n).fold(Count::one(), |acc, i| acc * Count::from(i))
}
