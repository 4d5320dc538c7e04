//! Grid scanning and one-dimensional refinement helpers shared by the
//! crossing locators.

/// Golden-section minimization of `f` on [a, b] to the requested x-tolerance.
/// Returns (x_min, f(x_min)).
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Indices of interior local minima of `values` whose value is below
/// `threshold`; plateau-tolerant on the left.
pub fn local_minima_below(values: &[f64], threshold: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if values[i] <= values[i - 1] && values[i] <= values[i + 1] && values[i] < threshold {
            // Skip duplicate plateau hits.
            if values[i] == values[i - 1] && out.last().is_some_and(|&j: &usize| j + 1 == i) {
                continue;
            }
            out.push(i);
        }
    }
    out
}

/// Locates every zero of a nonnegative dip indicator inside a grid bracket,
/// resolving clusters of nearby zeros (such as delta-split crossings) by two
/// levels of 257-point subdivision before golden-section polishing. `accept`
/// is the largest refined value still counted as a zero.
pub fn resolve_dip<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, accept: f64) -> Vec<f64> {
    let mut out = Vec::new();
    subdivide(f, lo, hi, accept, 2, &mut out);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}

fn subdivide<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, accept: f64, depth: u32, out: &mut Vec<f64>) {
    let polish = |out: &mut Vec<f64>| {
        let (x0, v0) = golden_section_min(|x| f(x), lo, hi, 1e-11);
        if v0 <= accept {
            out.push(x0);
        }
    };
    if depth == 0 || hi - lo < 1e-8 {
        polish(out);
        return;
    }
    let ts = grid(lo, hi, 257);
    let vals: Vec<f64> = ts.iter().map(|t| f(*t)).collect();
    let vmax = vals.iter().copied().fold(0.0f64, f64::max);
    let dips = local_minima_below(&vals, 0.5 * vmax);
    if dips.is_empty() {
        polish(out);
        return;
    }
    for i in &dips {
        subdivide(f, ts[i - 1], ts[i + 1], accept, depth - 1, out);
    }
    // A zero sitting against a bracket edge shows no interior minimum there.
    if vals[0] < vals[1] && vals[0] < 0.5 * vmax && !dips.contains(&1) {
        subdivide(f, ts[0], ts[1], accept, depth - 1, out);
    }
    let last = vals.len() - 1;
    if vals[last] < vals[last - 1] && vals[last] < 0.5 * vmax && !dips.contains(&(last - 1)) {
        subdivide(f, ts[last - 1], ts[last], accept, depth - 1, out);
    }
}

/// Bisects [a, b] down to `xtol` on an integer-valued function, assuming a
/// single jump: returns the jump location (midpoint of the final bracket).
pub fn bisect_integer_jump<F: FnMut(f64) -> i64>(mut f: F, a: f64, b: f64, xtol: f64) -> f64 {
    let fa = f(a);
    let (mut lo, mut hi) = (a, b);
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if f(mid) == fa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Evenly spaced grid of `count` points over [a, b], endpoints included.
pub fn grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}
