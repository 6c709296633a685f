//! Clebsch-Gordan coefficients from the Racah formula. Angular momenta are
//! passed doubled so half-integers stay exact.

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// ⟨j1 m1; j2 m2 | J M⟩ with every argument doubled (2j1, 2m1, ...).
pub fn clebsch_gordan(tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
    if tm1 + tm2 != tm
        || tm1.abs() > tj1
        || tm2.abs() > tj2
        || tm.abs() > tj
        || tj < (tj1 - tj2).abs()
        || tj > tj1 + tj2
        || (tj1 + tm1) % 2 != 0
        || (tj2 + tm2) % 2 != 0
        || (tj + tm) % 2 != 0
        || (tj1 + tj2 + tj) % 2 != 0
    {
        return 0.0;
    }
    let h = |x: i32| x / 2;
    let (a, b, c) = (h(tj1 + tj2 - tj), h(tj1 - tj2 + tj), h(-tj1 + tj2 + tj));
    let pre = ((tj + 1) as f64 * factorial(a) * factorial(b) * factorial(c) / factorial(h(tj1 + tj2 + tj) + 1)).sqrt();
    let norm = (factorial(h(tj + tm))
        * factorial(h(tj - tm))
        * factorial(h(tj1 - tm1))
        * factorial(h(tj1 + tm1))
        * factorial(h(tj2 - tm2))
        * factorial(h(tj2 + tm2)))
    .sqrt();
    let mut sum = 0.0;
    for k in 0..=a {
        let d = [
            a - k,
            h(tj1 - tm1) - k,
            h(tj2 + tm2) - k,
            h(tj - tj2 + tm1) + k,
            h(tj - tj1 - tm2) + k,
        ];
        if d.iter().any(|&x| x < 0) {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / (factorial(k) * d.iter().map(|&x| factorial(x)).product::<f64>());
    }
    pre * norm * sum
}

/// ⟨j m; 1 q | j′ m+q⟩ for integer angular momenta.
pub fn dipole_cg(j: i32, m: i32, q: i32, j_prime: i32) -> f64 {
    clebsch_gordan(2 * j, 2 * m, 2, 2 * q, 2 * j_prime, 2 * (m + q))
}
