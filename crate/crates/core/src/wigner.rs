//! Wigner 3-j symbols for integer angular momenta.

/// Factorials up to 34! are exactly the range needed for j ≤ 8 couplings;
/// the table goes further so larger couplings stay usable.
const FACTORIAL_TABLE_LEN: usize = 64;

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0 && (n as usize) < FACTORIAL_TABLE_LEN);
    static TABLE: std::sync::OnceLock<[f64; FACTORIAL_TABLE_LEN]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [1.0; FACTORIAL_TABLE_LEN];
        for k in 1..FACTORIAL_TABLE_LEN {
            t[k] = t[k - 1] * k as f64;
        }
        t
    });
    table[n as usize]
}

fn triangle_ok(j1: i32, j2: i32, j3: i32) -> bool {
    j3 >= (j1 - j2).abs() && j3 <= j1 + j2
}

/// Wigner 3-j symbol ( j1 j2 j3 ; m1 m2 m3 ) for integer quantum numbers.
///
/// Returns 0 whenever a selection rule (triangle condition, m-sum, |m| ≤ j)
/// is violated. Negative `j` is a caller bug and panics.
pub fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    assert!(j1 >= 0 && j2 >= 0 && j3 >= 0, "negative angular momentum");
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if m1 + m2 + m3 != 0 || !triangle_ok(j1, j2, j3) {
        return 0.0;
    }

    let delta = factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3)
        / factorial(j1 + j2 + j3 + 1);
    let norm = delta
        * factorial(j1 + m1)
        * factorial(j1 - m1)
        * factorial(j2 + m2)
        * factorial(j2 - m2)
        * factorial(j3 + m3)
        * factorial(j3 - m3);

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(j1 + j2 - j3 - k)
            * factorial(j1 - m1 - k)
            * factorial(j2 + m2 - k)
            * factorial(j3 - j2 + m1 + k)
            * factorial(j3 - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }

    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * norm.sqrt() * sum
}
