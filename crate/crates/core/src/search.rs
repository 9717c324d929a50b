//! One-dimensional search helpers shared by the outer optimizers.

/// `n` points spaced logarithmically on `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|j| {
            if j == n - 1 {
                hi
            } else {
                (a + (b - a) * j as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Result of a golden-section run.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenResult<T> {
    pub x: f64,
    pub value: f64,
    pub payload: Option<T>,
    pub iterations: usize,
    /// Every evaluated `(x, value)` pair in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Maximizes `f` over `[lo, hi]` by golden-section search in `ln x`,
/// stopping once `hi / lo - 1 <= rel_tol`. `f` returns a value (possibly
/// `-inf`) and an optional payload kept for the best point.
pub fn golden_max_log<T, F>(mut f: F, lo: f64, hi: f64, rel_tol: f64, max_iter: usize) -> GoldenResult<T>
where
    F: FnMut(f64) -> (f64, Option<T>),
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut evaluations = Vec::new();
    let mut best: (f64, f64, Option<T>) = (lo, f64::NEG_INFINITY, None);
    let mut eval = |t: f64, evaluations: &mut Vec<(f64, f64)>, best: &mut (f64, f64, Option<T>)| {
        let x = t.exp();
        let (v, p) = f(x);
        evaluations.push((x, v));
        if v > best.1 {
            *best = (x, v, p);
        }
        v
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut evaluations, &mut best);
    let mut fd = eval(d, &mut evaluations, &mut best);
    let mut iterations = 0;
    while (b - a).exp_m1() > rel_tol && iterations < max_iter {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut evaluations, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut evaluations, &mut best);
        }
    }
    GoldenResult {
        x: best.0,
        value: best.1,
        payload: best.2,
        iterations,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = log_grid(0.5, 40.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[6], 40.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn golden_finds_unimodal_peak() {
        let r = golden_max_log(|x: f64| (-(x.ln() - 1.0).powi(2), Some(x)), 0.1, 100.0, 1e-8, 200);
        assert!((r.x - 1f64.exp()).abs() < 1e-6);
        assert_eq!(r.payload, Some(r.x));
    }

    #[test]
    fn golden_tolerates_infeasible_region() {
        let r = golden_max_log(
            |x: f64| if x > 5.0 { (f64::NEG_INFINITY, None) } else { (x, Some(())) },
            1.0,
            10.0,
            1e-6,
            200,
        );
        assert!(r.x <= 5.0 && r.x > 4.99);
    }
}
