#![allow(dead_code)]

/// Principal eigenvalue of `u'' + V u` for the prototype with `b = 0.5`,
/// from two-sided shooting on `[0, 200]` at tolerance 1e-13.
pub const LAMBDA_INF_STAR: f64 = 0.714_666_251_904_625;

/// Even bound state of the unit square well of half-width one.
pub const SQUARE_WELL_ROOT: f64 = 0.453_753_165_860_328_2;

fn rk4(lam: f64, pot: &impl Fn(f64) -> f64, mut x: f64, mut y: [f64; 2], to: f64, steps: usize) -> [f64; 2] {
    let h = (to - x) / steps as f64;
    let f = |x: f64, y: [f64; 2]| [y[1], (lam - pot(x)) * y[0]];
    for _ in 0..steps {
        let k1 = f(x, y);
        let k2 = f(x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        x += h;
    }
    y
}

/// Even ground state of `u'' + pot u = lambda u` by shooting from the origin
/// and from `x = 100` (decaying data) and matching log-derivatives at `x = 3`.
/// The mismatch is increasing on `[lo, hi]`, which must bracket the root.
pub fn shoot_principal(pot: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mismatch = |lam: f64| {
        let a = rk4(lam, &pot, 0.0, [1.0, 0.0], 3.0, 3000);
        let b = rk4(lam, &pot, 100.0, [1.0, -lam.sqrt()], 3.0, 97_000);
        a[1] / a[0] - b[1] / b[0]
    };
    let (mut lo, mut hi) = (lo, hi);
    assert!(mismatch(lo) < 0.0 && mismatch(hi) > 0.0, "root not bracketed");
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
