//! Bounded scalar maximization: dense grid scan, then golden-section
//! refinement of the best grid bracket.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes `f` on `[lo, hi]`.
///
/// The grid (`grid_points` samples, endpoints included) guards against
/// multiple local maxima; golden-section search then shrinks the bracket
/// around the best sample until it is narrower than `tol`. Returns the
/// maximizer and its value. Ties on the grid go to the smaller abscissa.
pub fn maximize_bounded<F>(f: F, lo: f64, hi: f64, grid_points: usize, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo <= hi);
    if hi - lo <= tol {
        return (lo, f(lo));
    }
    let n = grid_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let at = |i: usize| if i == n - 1 { hi } else { lo + step * i as f64 };

    let (mut best_i, mut best_f) = (0, f(lo));
    for i in 1..n {
        let v = f(at(i));
        if v > best_f {
            best_i = i;
            best_f = v;
        }
    }
    let best_x = at(best_i);

    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(n - 1));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx > best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}
