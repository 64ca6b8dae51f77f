use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Strictly increasing list of times in `[0, 1]` starting at 0 and ending at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "a grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points[0] != 0.0 || *points.last().unwrap() != 1.0 {
            return Err(Error::InvalidGrid(format!(
                "endpoints must be exactly 0 and 1, got {} and {}",
                points[0],
                points.last().unwrap()
            )));
        }
        if let Some(w) = points.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing (violated at index {})",
                w + 1
            )));
        }
        Ok(Self { points })
    }

    /// `steps + 1` equally spaced points.
    pub fn uniform(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidGrid("uniform grid needs at least one step".into()));
        }
        let n = steps as f64;
        let points = (0..=steps).map(|i| i as f64 / n).collect();
        Self::new(points)
    }

    /// Uniform grid with `2^level` steps.
    pub fn dyadic(level: u32) -> Self {
        Self::uniform(1usize << level).expect("dyadic grids are valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn dt(&self, i: usize) -> f64 {
        self.points[i + 1] - self.points[i]
    }

    /// Index of a grid point equal to `t` up to `1e-12`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = self.points.partition_point(|&x| x < t - 1e-12);
        (pos < self.points.len() && (self.points[pos] - t).abs() <= 1e-12).then_some(pos)
    }

    /// Returns `m` when the grid is the uniform grid with `2^m` steps.
    pub fn dyadic_level(&self) -> Option<u32> {
        let steps = self.steps();
        if !steps.is_power_of_two() {
            return None;
        }
        let n = steps as f64;
        let uniform = self
            .points
            .iter()
            .enumerate()
            .all(|(i, &t)| (t - i as f64 / n).abs() <= 1e-14);
        uniform.then(|| steps.trailing_zeros())
    }

    /// Index of the last grid point `≤ t` (clamped to a valid step start).
    pub fn bracket(&self, t: f64) -> usize {
        let pos = self.points.partition_point(|&x| x <= t);
        pos.saturating_sub(1).min(self.points.len() - 2)
    }
}

/// Values of an `ℝ^dim`-valued path on a [`TimeGrid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: Arc<TimeGrid>,
    dim: usize,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: Arc<TimeGrid>, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPath("dimension must be positive".into()));
        }
        if values.len() != dim * grid.len() {
            return Err(Error::InvalidPath(format!(
                "expected {} values ({} points of dimension {}), got {}",
                dim * grid.len(),
                grid.len(),
                dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPath("values must be finite".into()));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn zeros(grid: Arc<TimeGrid>, dim: usize) -> Self {
        let n = grid.len();
        Self { grid, dim, values: vec![0.0; n * dim] }
    }

    /// Samples `f(t, out)` at every grid point.
    pub fn from_fn(grid: Arc<TimeGrid>, dim: usize, mut f: impl FnMut(f64, &mut [f64])) -> Self {
        let mut values = vec![0.0; grid.len() * dim];
        for (i, &t) in grid.points().iter().enumerate() {
            f(t, &mut values[i * dim..(i + 1) * dim]);
        }
        Self { grid, dim, values }
    }

    /// Scalar path from a function of time.
    pub fn scalar(grid: Arc<TimeGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, 1, |t, out| out[0] = f(t))
    }

    /// Scalar path from explicit values.
    pub fn from_scalars(grid: Arc<TimeGrid>, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, 1, values)
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    /// Values of coordinate `c` at every grid point.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.dim).copied().collect()
    }

    /// `x_j − x_i`.
    pub fn increment(&self, i: usize, j: usize) -> Vec<f64> {
        self.point(j).iter().zip(self.point(i)).map(|(b, a)| b - a).collect()
    }

    /// Euclidean norm of `x_j − x_i`; the plain absolute value for scalar paths.
    pub fn increment_norm(&self, i: usize, j: usize) -> f64 {
        if self.dim == 1 {
            (self.values[j] - self.values[i]).abs()
        } else {
            self.point(j)
                .iter()
                .zip(self.point(i))
                .map(|(b, a)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt()
        }
    }

    /// Piecewise-linear interpolation at an arbitrary time in `[0, 1]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let i = self.grid.bracket(t);
        let (t0, t1) = (self.grid.points()[i], self.grid.points()[i + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        if w == 0.0 {
            return self.point(i).to_vec();
        }
        if w == 1.0 {
            return self.point(i + 1).to_vec();
        }
        self.point(i)
            .iter()
            .zip(self.point(i + 1))
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    pub fn same_grid(&self, other: &SampledPath) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    pub(crate) fn check_same_grid(&self, other: &SampledPath, what: &str) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{what}: paths live on different grids")))
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self + c·other` on a common grid and dimension.
    pub fn axpy(&self, c: f64, other: &SampledPath) -> Result<Self> {
        self.check_same_grid(other, "axpy")?;
        if self.dim != other.dim {
            return Err(Error::InvalidPath(format!(
                "dimension mismatch {} vs {}",
                self.dim, other.dim
            )));
        }
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += c * b);
        Ok(out)
    }

    pub fn add(&self, other: &SampledPath) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SampledPath) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Stacks the coordinates of `self` and `other` into one path.
    pub fn concat(&self, other: &SampledPath) -> Result<Self> {
        self.check_same_grid(other, "concat")?;
        let dim = self.dim + other.dim;
        let mut values = Vec::with_capacity(dim * self.len());
        for i in 0..self.len() {
            values.extend_from_slice(self.point(i));
            values.extend_from_slice(other.point(i));
        }
        Ok(Self { grid: self.grid.clone(), dim, values })
    }

    /// Sup norm over grid points of the Euclidean norm.
    pub fn sup_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| self.point(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Path restricted to the given grid indices, carried over to `grid`.
    pub fn restrict(&self, indices: &[usize], grid: Arc<TimeGrid>) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.point(i));
        }
        Self::new(grid, self.dim, values)
    }

    /// CSV with header `t,x1,...,xdim`, 17 significant digits per number.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![fmt17(self.grid.points()[i])];
            row.extend(self.point(i).iter().map(|&v| fmt17(v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let dim = r
            .headers()?
            .len()
            .checked_sub(1)
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::InvalidPath("CSV needs a time column and at least one value column".into()))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidPath(format!("bad number {s:?}: {e}")))
            };
            times.push(parse(&rec[0])?);
            for k in 1..=dim {
                values.push(parse(&rec[k])?);
            }
        }
        Self::new(Arc::new(TimeGrid::new(times)?), dim, values)
    }
}

/// Shortest round-trip formatting with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.1, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.3, 1.0]).is_ok());
        assert_eq!(TimeGrid::dyadic(3).dyadic_level(), Some(3));
        assert_eq!(TimeGrid::uniform(6).unwrap().dyadic_level(), None);
        assert_eq!(TimeGrid::dyadic(2).index_of(0.75), Some(3));
        assert_eq!(TimeGrid::dyadic(2).index_of(0.7), None);
    }

    #[test]
    fn path_shape_checks() {
        let g = Arc::new(TimeGrid::dyadic(2));
        assert!(SampledPath::new(g.clone(), 2, vec![0.0; 9]).is_err());
        assert!(SampledPath::new(g.clone(), 1, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        let p = SampledPath::scalar(g, |t| 2.0 * t);
        assert_eq!(p.eval(0.3), vec![0.6]);
        assert_eq!(p.increment(1, 3), vec![1.0]);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let g = Arc::new(TimeGrid::uniform(7).unwrap());
        let p = SampledPath::from_fn(g, 2, |t, o| {
            o[0] = (3.0 * t).sin() / 7.0;
            o[1] = t.exp() * 1e-9;
        });
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x1,x2\n"));
        let q = SampledPath::read_csv(&buf[..]).unwrap();
        assert_eq!(p, q);
    }
}
