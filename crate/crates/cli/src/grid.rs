//! `lo:hi:n` β grids.

use ibcurve_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

pub fn parse_grid(spec: &str, spacing: Spacing) -> Result<Vec<f64>, Error> {
    let bad = |why: &str| Error::InvalidInput(format!("beta grid '{spec}': {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad("expected lo:hi:n"));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad("lo is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad("hi is not a number"))?;
    let n: usize = n.trim().parse().map_err(|_| bad("n is not a non-negative integer"))?;
    if n == 0 {
        return Err(bad("grid is empty"));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
        return Err(bad("need 0 <= lo <= hi"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if n > 1 && hi == lo {
        return Err(bad("lo == hi with more than one point"));
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    let mut grid: Vec<f64> = match spacing {
        Spacing::Linear => (0..n).map(|i| lo + (hi - lo) * step(i)).collect(),
        Spacing::Log => {
            if lo <= 0.0 {
                return Err(bad("log spacing needs lo > 0"));
            }
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * step(i)).exp()).collect()
        }
    };
    // pin the endpoints so they read back exactly as given
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

pub fn parse_list(spec: &str, what: &str) -> Result<Vec<f64>, Error> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("{what}: '{s}' is not a number"))))
        .collect()
}
