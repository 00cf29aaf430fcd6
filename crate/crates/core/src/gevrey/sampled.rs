use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// How derivative values are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    TaylorRecurrence,
    CauchyCircle,
    Spectral,
    Tabulated,
    /// Quadrature against a tabulated kernel.
    Convolution,
}

/// Source of `f^{(α)}(x)` for `α = 0..=max_order`.
pub trait DerivativeOracle<T: Real>: Send + Sync {
    /// Returns `[f(x), f'(x), …, f^{(max_order)}(x)]`.
    fn derivatives(&self, x: T, max_order: usize) -> Result<Vec<T>>;
    fn provenance(&self) -> Provenance;
    fn label(&self) -> String;
}

/// A function on a uniform grid over `[-μ, μ]` with derivatives up to `s_max`.
///
/// The derivative table is filled on first use and shared by clones.
#[derive(Clone)]
pub struct SampledFunction<T: Real> {
    mu: T,
    points: usize,
    s_max: usize,
    oracle: Arc<dyn DerivativeOracle<T>>,
    table: Arc<OnceLock<std::result::Result<Vec<Vec<T>>, (usize, f64)>>>,
}

impl<T: Real> fmt::Debug for SampledFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("oracle", &self.oracle.label())
            .field("mu", &self.mu)
            .field("points", &self.points)
            .field("s_max", &self.s_max)
            .finish()
    }
}

/// Default number of grid intervals.
pub const DEFAULT_INTERVALS: usize = 2048;
/// Default derivative cap.
pub const DEFAULT_S_MAX: usize = 30;

impl<T: Real> SampledFunction<T> {
    /// Grid with `intervals + 1` points on `[-mu, mu]`.
    pub fn new(oracle: Arc<dyn DerivativeOracle<T>>, mu: T, intervals: usize, s_max: usize) -> Result<Self> {
        if !(mu > T::zero()) || intervals < 1 || s_max < 1 {
            return Err(Error::InvalidParameter(format!(
                "sampled function needs mu > 0, intervals >= 1, s_max >= 1 (got {mu}, {intervals}, {s_max})"
            )));
        }
        Ok(Self { mu, points: intervals + 1, s_max, oracle, table: Arc::new(OnceLock::new()) })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> T {
        (self.mu + self.mu) / T::of_usize(self.points - 1)
    }

    pub fn x(&self, i: usize) -> T {
        if i + 1 == self.points {
            self.mu
        } else {
            -self.mu + self.dx() * T::of_usize(i)
        }
    }

    pub fn grid(&self) -> Vec<T> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    pub fn oracle(&self) -> &Arc<dyn DerivativeOracle<T>> {
        &self.oracle
    }

    pub fn provenance(&self) -> Provenance {
        self.oracle.provenance()
    }

    /// Rows `[f(x_i), …, f^{(s_max)}(x_i)]` for every grid point.
    pub fn table(&self) -> Result<&[Vec<T>]> {
        let t = self.table.get_or_init(|| {
            let mut rows = Vec::with_capacity(self.points);
            for i in 0..self.points {
                let x = self.x(i);
                match self.oracle.derivatives(x, self.s_max) {
                    Ok(row) => {
                        if let Some(a) = row.iter().position(|v| !v.is_finite()) {
                            return Err((a, x.as_f64()));
                        }
                        if row.len() <= self.s_max {
                            return Err((row.len(), x.as_f64()));
                        }
                        rows.push(row);
                    }
                    Err(Error::OracleGap { alpha, .. }) => return Err((alpha, x.as_f64())),
                    Err(_) => return Err((0, x.as_f64())),
                }
            }
            Ok(rows)
        });
        match t {
            Ok(rows) => Ok(rows.as_slice()),
            Err((alpha, x)) => Err(Error::OracleGap { alpha: *alpha, x: *x }),
        }
    }

    /// Writes columns `x, d0, d1, …, d{s_max}`.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let rows = self.table()?;
        let mut wtr = csv::Writer::from_path(path)?;
        let mut header = vec!["x".to_string()];
        header.extend((0..=self.s_max).map(|a| format!("d{a}")));
        wtr.write_record(&header)?;
        for (i, row) in rows.iter().enumerate() {
            let mut rec = vec![format!("{}", self.x(i).as_f64())];
            rec.extend(row.iter().map(|v| format!("{}", v.as_f64())));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a table written by [`write_csv`](Self::write_csv); the grid must be uniform and symmetric.
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let s_max = rdr.headers()?.len().saturating_sub(2);
        let mut xs = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| Error::GridMismatch(format!("unparsable value: {e}")))?;
            xs.push(vals[0]);
            rows.push(vals[1..].iter().map(|&v| T::of(v)).collect::<Vec<T>>());
        }
        if xs.len() < 2 {
            return Err(Error::GridMismatch("table needs at least two rows".into()));
        }
        let mu = xs[xs.len() - 1];
        let dx = 2.0 * mu / (xs.len() - 1) as f64;
        for (i, &x) in xs.iter().enumerate() {
            if (x - (-mu + dx * i as f64)).abs() > 1e-9 * mu.max(1.0) {
                return Err(Error::GridMismatch(format!("row {i} off the uniform grid")));
            }
        }
        let oracle = Tabulated { mu: T::of(mu), dx: T::of(dx), rows };
        Self::new(Arc::new(oracle), T::of(mu), xs.len() - 1, s_max)
    }
}

/// Oracle answering only at the grid points of an imported table.
struct Tabulated<T> {
    mu: T,
    dx: T,
    rows: Vec<Vec<T>>,
}

impl<T: Real> DerivativeOracle<T> for Tabulated<T> {
    fn derivatives(&self, x: T, max_order: usize) -> Result<Vec<T>> {
        let pos = (x + self.mu) / self.dx;
        let i = pos.round().to_usize().unwrap_or(usize::MAX);
        let off_grid = (pos - pos.round()).abs() > T::of(1e-6);
        match self.rows.get(i) {
            Some(row) if !off_grid && row.len() > max_order => Ok(row[..=max_order].to_vec()),
            Some(row) if !off_grid => Err(Error::OracleGap { alpha: row.len(), x: x.as_f64() }),
            _ => Err(Error::OracleGap { alpha: 0, x: x.as_f64() }),
        }
    }

    fn provenance(&self) -> Provenance {
        Provenance::Tabulated
    }

    fn label(&self) -> String {
        "tabulated".into()
    }
}
