//! OSPA miss distance between finite point sets and the gain-ratio summary.

use std::cmp::Ordering;

use crate::assignment;
use crate::error::{Error, Result};

/// Cut-off `c` and order `p` of the OSPA metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaParams {
    pub cutoff: f64,
    pub order: f64,
}

impl Default for OspaParams {
    fn default() -> Self {
        Self { cutoff: 100.0, order: 2.0 }
    }
}

impl OspaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidParameter("OSPA cutoff must be > 0".into()));
        }
        if !(self.order >= 1.0 && self.order.is_finite()) {
            return Err(Error::InvalidParameter("OSPA order must be >= 1".into()));
        }
        Ok(())
    }

    fn cut_cost<const D: usize>(&self, a: &[f64; D], b: &[f64; D]) -> f64 {
        let d = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        d.min(self.cutoff).powf(self.order)
    }
}

/// Largest set size accepted by [`ospa_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 8;

fn lex<const D: usize>(a: &[f64; D], b: &[f64; D]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

fn check_finite<const D: usize>(points: &[[f64; D]]) -> Result<()> {
    if points.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("OSPA input"))
    }
}

/// Sorted inputs with the smaller set first; equal-size sets are ordered
/// lexicographically, so the result is exactly symmetric.
fn canonical<const D: usize>(x: &[[f64; D]], y: &[[f64; D]]) -> (Vec<[f64; D]>, Vec<[f64; D]>) {
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(lex);
    b.sort_by(lex);
    let swap = match a.len().cmp(&b.len()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.iter().zip(&b).map(|(p, q)| lex(p, q)).find(|o| o.is_ne()) == Some(Ordering::Greater),
    };
    if swap {
        (b, a)
    } else {
        (a, b)
    }
}

fn finish(mut matched: Vec<f64>, m: usize, n: usize, params: &OspaParams) -> f64 {
    if n == 0 {
        return 0.0;
    }
    matched.sort_by(f64::total_cmp);
    let localisation: f64 = matched.iter().sum();
    let cardinality = params.cutoff.powf(params.order) * (n - m) as f64;
    ((localisation + cardinality) / n as f64).powf(1.0 / params.order)
}

/// OSPA distance, solving the optimal assignment exactly.
///
/// Both empty gives 0; exactly one empty gives `c`.
pub fn ospa<const D: usize>(x: &[[f64; D]], y: &[[f64; D]], params: &OspaParams) -> Result<f64> {
    params.validate()?;
    check_finite(x)?;
    check_finite(y)?;
    let (small, large) = canonical(x, y);
    let (m, n) = (small.len(), large.len());
    let costs: Vec<f64> = small.iter().flat_map(|a| large.iter().map(|b| params.cut_cost(a, b))).collect();
    let (assign, _) = assignment::solve(&costs, m, n);
    let matched = assign.iter().enumerate().map(|(i, &j)| costs[i * n + j]).collect();
    Ok(finish(matched, m, n, params))
}

/// OSPA by exhaustive enumeration of injections. Test oracle only.
pub fn ospa_bruteforce<const D: usize>(x: &[[f64; D]], y: &[[f64; D]], params: &OspaParams) -> Result<f64> {
    params.validate()?;
    let size = x.len().max(y.len());
    if size > BRUTEFORCE_LIMIT {
        return Err(Error::SizeLimit { size, limit: BRUTEFORCE_LIMIT });
    }
    check_finite(x)?;
    check_finite(y)?;
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return Ok(0.0);
    }

    fn search<const D: usize>(
        i: usize,
        small: &[[f64; D]],
        large: &[[f64; D]],
        used: &mut [bool],
        acc: f64,
        best: &mut f64,
        params: &OspaParams,
    ) {
        if i == small.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..large.len() {
            if !used[j] {
                used[j] = true;
                search(i + 1, small, large, used, acc + params.cut_cost(&small[i], &large[j]), best, params);
                used[j] = false;
            }
        }
    }

    let mut best = f64::INFINITY;
    search(0, small, large, &mut vec![false; n], 0.0, &mut best, params);
    let cardinality = params.cutoff.powf(params.order) * (n - m) as f64;
    Ok(((best + cardinality) / n as f64).powf(1.0 / params.order))
}

/// Position-space OSPA between two state lists.
pub fn ospa_positions(x: &[crate::models::StateVector], y: &[crate::models::StateVector], params: &OspaParams) -> Result<f64> {
    let a: Vec<[f64; 2]> = x.iter().map(|s| s.position()).collect();
    let b: Vec<[f64; 2]> = y.iter().map(|s| s.position()).collect();
    ospa(&a, &b, params)
}

/// Full-state OSPA between two state lists.
pub fn ospa_states(x: &[crate::models::StateVector], y: &[crate::models::StateVector], params: &OspaParams) -> Result<f64> {
    let a: Vec<[f64; 4]> = x.iter().map(|s| s.0).collect();
    let b: Vec<[f64; 4]> = y.iter().map(|s| s.0).collect();
    ospa(&a, &b, params)
}

/// Fractional OSPA reduction `(basic - roughening) / basic`.
pub fn gain_ratio(mean_ospa_basic: f64, mean_ospa_roughening: f64) -> Result<f64> {
    if !(mean_ospa_basic > 0.0) {
        return Err(Error::UndefinedGainRatio);
    }
    Ok((mean_ospa_basic - mean_ospa_roughening) / mean_ospa_basic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use proptest::prelude::*;
    use rand::Rng;

    const P: OspaParams = OspaParams { cutoff: 100.0, order: 2.0 };

    #[test]
    fn examples() {
        let x = [[0.0, 0.0], [10.0, -4.0]];
        assert_eq!(ospa(&x, &x, &P).unwrap(), 0.0);
        assert_eq!(ospa(&[], &x, &P).unwrap(), 100.0);
        assert_eq!(ospa::<2>(&[], &[], &P).unwrap(), 0.0);
        let d = ospa(&[[0.0, 0.0]], &[[0.0, 0.0], [30.0, 40.0]], &P).unwrap();
        assert!((d - 100.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((d - 70.7107).abs() < 1e-4);
        assert!((ospa(&[[0.0, 0.0]], &[[3.0, 4.0]], &P).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_limits_and_examples() {
        let big = [[0.0, 0.0]; 9];
        assert!(matches!(ospa_bruteforce(&big, &big, &P), Err(Error::SizeLimit { .. })));
        let x = [[1.0, 2.0], [3.0, -1.0]];
        assert_eq!(ospa_bruteforce(&x, &x, &P).unwrap(), 0.0);
        let y = [[5.0, 5.0]];
        assert_eq!(ospa_bruteforce(&x, &y, &P).unwrap(), ospa_bruteforce(&y, &x, &P).unwrap());
    }

    #[test]
    fn rejects_non_finite_and_bad_params() {
        assert!(ospa(&[[f64::NAN, 0.0]], &[[0.0, 0.0]], &P).is_err());
        assert!(ospa::<2>(&[], &[], &OspaParams { cutoff: 0.0, order: 2.0 }).is_err());
        assert!(ospa::<2>(&[], &[], &OspaParams { cutoff: 1.0, order: 0.5 }).is_err());
    }

    #[test]
    fn gain_ratio_examples() {
        assert!((gain_ratio(10.0, 8.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(gain_ratio(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(gain_ratio(0.0, 1.0), Err(Error::UndefinedGainRatio));
    }

    #[test]
    fn matches_bruteforce_on_random_instances() {
        let mut rng = stream(42, Stream::Truth);
        for _ in 0..2000 {
            let m = rng.random_range(0..=6);
            let n = rng.random_range(0..=6);
            let gen = |k: usize, rng: &mut crate::rng::StreamRng| -> Vec<[f64; 2]> {
                (0..k).map(|_| [rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0)]).collect()
            };
            let x = gen(m, &mut rng);
            let y = gen(n, &mut rng);
            let fast = ospa(&x, &y, &P).unwrap();
            let slow = ospa_bruteforce(&x, &y, &P).unwrap();
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }

    fn point() -> impl Strategy<Value = [f64; 2]> {
        [-150.0f64..150.0, -150.0f64..150.0]
    }

    proptest! {
        #[test]
        fn symmetric_bounded_and_order_free(
            x in prop::collection::vec(point(), 0..6),
            y in prop::collection::vec(point(), 0..6),
            order in 1.0f64..4.0,
        ) {
            let p = OspaParams { cutoff: 100.0, order };
            let d = ospa(&x, &y, &p).unwrap();
            prop_assert_eq!(d, ospa(&y, &x, &p).unwrap());
            prop_assert!((0.0..=100.0 + 1e-9).contains(&d));
            let mut xr = x.clone();
            xr.reverse();
            prop_assert_eq!(d, ospa(&xr, &y, &p).unwrap());
        }
    }
}
