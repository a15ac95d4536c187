//! Uniform lattices over a subset of the spacetime coordinates and the
//! complex amplitudes sampled on them.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::foundation::{FourVector, C64};
use crate::par;
use crate::wavepackets::Representation;

/// One uniformly spaced axis. `coord` is the spacetime index (0 = t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub coord: usize,
    pub n: usize,
    pub origin: f64,
    pub spacing: f64,
    /// Origin of the reciprocal axis; a Fourier transform lands there and
    /// the inverse transform returns to `origin`.
    pub dual_origin: f64,
}

impl GridAxis {
    /// `n` points from `min` to `max` inclusive.
    pub fn new(coord: usize, min: f64, max: f64, n: usize) -> Result<Self> {
        if coord > 3 {
            return Err(Error::Grid(format!("coordinate index {coord} out of range")));
        }
        if n < 2 {
            return Err(Error::Grid("an axis needs at least two points".into()));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::Grid(format!("axis bounds [{min}, {max}] are not increasing")));
        }
        Ok(Self::raw(coord, min, (max - min) / (n - 1) as f64, n))
    }

    /// Axis with explicit origin and spacing.
    pub fn with_spacing(coord: usize, origin: f64, spacing: f64, n: usize) -> Result<Self> {
        if coord > 3 || n < 2 || !(spacing > 0.0) || !origin.is_finite() {
            return Err(Error::Grid("invalid axis specification".into()));
        }
        Ok(Self::raw(coord, origin, spacing, n))
    }

    fn raw(coord: usize, origin: f64, spacing: f64, n: usize) -> Self {
        let d = 2.0 * PI / (n as f64 * spacing);
        Self { coord, n, origin, spacing, dual_origin: -((n / 2) as f64) * d }
    }

    /// Axis of `n` points with spacing `h` centered on `center`.
    pub fn centered(coord: usize, center: f64, h: f64, n: usize) -> Result<Self> {
        Self::with_spacing(coord, center - 0.5 * h * (n - 1) as f64, h, n)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.origin + self.spacing * i as f64
    }

    pub fn max(&self) -> f64 {
        self.value(self.n - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    /// The reciprocal axis reached by a Fourier transform.
    pub fn reciprocal(&self) -> GridAxis {
        let d = 2.0 * PI / (self.n as f64 * self.spacing);
        GridAxis { coord: self.coord, n: self.n, origin: self.dual_origin, spacing: d, dual_origin: self.origin }
    }
}

/// Complex amplitudes on a lattice over some of `(t, x, y, z)`.
///
/// Coordinates that have no axis are treated as fixed at zero. In the
/// energy/momentum and hybrid representations the axis values are energies
/// or momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWaveFunction {
    pub axes: Vec<GridAxis>,
    pub data: Vec<C64>,
    pub rep: Representation,
    /// Laboratory time of the snapshot.
    pub tau: f64,
}

fn check_axes(axes: &[GridAxis]) -> Result<()> {
    if axes.is_empty() || axes.len() > 4 {
        return Err(Error::Grid("a grid needs between one and four axes".into()));
    }
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.coord == a.coord) {
            return Err(Error::Grid(format!("coordinate {} appears twice", a.coord)));
        }
    }
    Ok(())
}

impl GridWaveFunction {
    pub fn zeros(axes: Vec<GridAxis>, rep: Representation) -> Result<Self> {
        check_axes(&axes)?;
        let len = axes.iter().map(|a| a.n).product();
        Ok(Self { axes, data: vec![C64::new(0.0, 0.0); len], rep, tau: 0.0 })
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn<F>(axes: Vec<GridAxis>, rep: Representation, f: F) -> Result<Self>
    where
        F: Fn(FourVector) -> C64 + Sync + Send,
    {
        let mut g = Self::zeros(axes, rep)?;
        let shape = g.clone_shape();
        par::fill_indexed(&mut g.data, |i| f(shape.point(i)));
        Ok(g)
    }

    pub fn from_data(axes: Vec<GridAxis>, rep: Representation, data: Vec<C64>) -> Result<Self> {
        check_axes(&axes)?;
        let len: usize = axes.iter().map(|a| a.n).product();
        if data.len() != len {
            return Err(Error::Grid(format!("expected {len} samples, got {}", data.len())));
        }
        Ok(Self { axes, data, rep, tau: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub(crate) fn clone_shape(&self) -> Shape {
        Shape { axes: self.axes.clone() }
    }

    /// Position of coordinate `coord` among the axes.
    pub fn axis_position(&self, coord: usize) -> Option<usize> {
        self.axes.iter().position(|a| a.coord == coord)
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.axes[pos + 1..].iter().map(|a| a.n).product()
    }

    /// Lattice point of a flat index.
    pub fn point(&self, i: usize) -> FourVector {
        self.clone_shape().point(i)
    }

    /// Volume element `∏ spacing`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    /// `∫|ψ|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let s = 1.0 / n;
            self.data.iter_mut().for_each(|z| *z *= s);
        }
        n
    }

    /// `⟨a|b⟩ = ∫ a* b`.
    pub fn inner(&self, other: &GridWaveFunction) -> C64 {
        let s: C64 = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum();
        s * self.cell_volume()
    }

    /// `‖a − b‖₂`.
    pub fn l2_distance(&self, other: &GridWaveFunction) -> f64 {
        let s: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum();
        (s * self.cell_volume()).sqrt()
    }

    /// `∫ f(x)|ψ|² / ∫|ψ|²`.
    pub fn expectation<F: Fn(FourVector) -> f64>(&self, f: F) -> f64 {
        let shape = self.clone_shape();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, z) in self.data.iter().enumerate() {
            let w = z.norm_sqr();
            num += w * f(shape.point(i));
            den += w;
        }
        num / den
    }

    /// Mean and variance of one coordinate under `|ψ|²`.
    pub fn moments(&self, coord: usize) -> (f64, f64) {
        let mean = self.expectation(|p| p.get(coord));
        let var = self.expectation(|p| (p.get(coord) - mean).powi(2));
        (mean, var)
    }

    /// Probability within `width` points of any boundary.
    pub fn edge_probability(&self, width: usize) -> f64 {
        let shape = self.shape();
        let mut edge = 0.0;
        for (i, z) in self.data.iter().enumerate() {
            let mut rem = i;
            let mut near = false;
            for pos in (0..shape.len()).rev() {
                let k = rem % shape[pos];
                rem /= shape[pos];
                if k < width || k + width >= shape[pos] {
                    near = true;
                }
            }
            if near {
                edge += z.norm_sqr();
            }
        }
        edge * self.cell_volume()
    }

    /// Applies `f(line, values)` to every one-dimensional line along axis `pos`.
    ///
    /// Lines are numbered by the remaining axes in their original order.
    pub fn for_each_line<F>(&mut self, pos: usize, f: F)
    where
        F: Fn(usize, &mut [C64]) + Sync + Send,
    {
        let n = self.axes[pos].n;
        let s = self.stride(pos);
        if s == 1 {
            par::for_each_chunk_mut(&mut self.data, n, f);
            return;
        }
        let src = &self.data;
        let mut lines = vec![C64::new(0.0, 0.0); src.len()];
        par::for_each_chunk_mut(&mut lines, n, |line, chunk| {
            let (high, low) = (line / s, line % s);
            let base = high * n * s + low;
            for (k, v) in chunk.iter_mut().enumerate() {
                *v = src[base + k * s];
            }
            f(line, chunk);
        });
        par::fill_indexed(&mut self.data, |i| {
            let low = i % s;
            let k = (i / s) % n;
            let high = i / (s * n);
            lines[(high * s + low) * n + k]
        });
    }

    /// Lattice point at index 0 of line `line` along axis `pos`.
    pub fn line_origin(&self, pos: usize, line: usize) -> FourVector {
        let n = self.axes[pos].n;
        let s = self.stride(pos);
        let (high, low) = (line / s, line % s);
        self.point(high * n * s + low)
    }

    /// Fourier transform along axis `pos` with phase `e^{sign·i k x}` and
    /// factor `spacing/√(2π)`. The result axis is `target`, which must be
    /// reciprocal to the current axis.
    pub(crate) fn fourier_axis(&mut self, pos: usize, sign: f64, target: GridAxis) {
        let a = self.axes[pos];
        let n = a.n;
        let (a0, h) = (a.origin, a.spacing);
        let (b0, d) = (target.origin, target.spacing);
        let dir = if sign > 0.0 { FftDirection::Inverse } else { FftDirection::Forward };
        let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft(n, dir);
        let pre: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, sign * b0 * j as f64 * h)).collect();
        let scale = h / (2.0 * PI).sqrt();
        let post: Vec<C64> = (0..n).map(|m| C64::from_polar(scale, sign * (b0 * a0 + m as f64 * d * a0))).collect();
        self.for_each_line(pos, |_, line| {
            for (v, p) in line.iter_mut().zip(&pre) {
                *v *= p;
            }
            fft.process(line);
            for (v, p) in line.iter_mut().zip(&post) {
                *v *= p;
            }
        });
        self.axes[pos] = target;
    }

    /// Resamples the time axis so that the value at `t` becomes `ψ(t + shift)`,
    /// using an exact band-limited shift (periodic wrap).
    pub fn shift_time(&mut self, shift: f64) -> Result<()> {
        let pos = self.axis_position(0).ok_or_else(|| Error::Unsupported("grid has no time axis".into()))?;
        self.shift_axis(pos, shift);
        Ok(())
    }

    pub(crate) fn shift_axis(&mut self, pos: usize, shift: f64) {
        let a = self.axes[pos];
        let n = a.n;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let phase: Vec<C64> = (0..n)
            .map(|k| {
                let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                let w = 2.0 * PI * kk / (n as f64 * a.spacing);
                if n % 2 == 0 && k == n / 2 {
                    C64::new((w * shift).cos() / n as f64, 0.0)
                } else {
                    C64::from_polar(1.0 / n as f64, w * shift)
                }
            })
            .collect();
        self.for_each_line(pos, |_, line| {
            fwd.process(line);
            for (v, p) in line.iter_mut().zip(&phase) {
                *v *= p;
            }
            inv.process(line);
        });
    }
}

/// Shape-only view used to decode flat indices without borrowing data.
#[derive(Debug, Clone)]
pub(crate) struct Shape {
    pub axes: Vec<GridAxis>,
}

impl Shape {
    pub fn point(&self, i: usize) -> FourVector {
        let mut c = [0.0; 4];
        let mut rem = i;
        for a in self.axes.iter().rev() {
            let k = rem % a.n;
            rem /= a.n;
            c[a.coord] = a.value(k);
        }
        FourVector::from_array(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss2d() -> GridWaveFunction {
        let ax = vec![GridAxis::new(0, -8.0, 8.0, 64).unwrap(), GridAxis::new(1, -6.0, 6.0, 48).unwrap()];
        GridWaveFunction::from_fn(ax, Representation::Block, |p| {
            C64::from_polar((-(p.t * p.t) / 2.0 - (p.x - 0.5).powi(2)).exp(), 0.3 * p.x)
        })
        .unwrap()
    }

    #[test]
    fn line_iteration_round_trip() {
        let g = gauss2d();
        for pos in 0..2 {
            let mut h = g.clone();
            h.for_each_line(pos, |_, line| line.iter_mut().for_each(|v| *v *= 2.0));
            for (a, b) in h.data.iter().zip(&g.data) {
                assert!((a - 2.0 * b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn line_origin_matches_line_content() {
        let mut g = gauss2d();
        let expect = g.clone();
        g.for_each_line(0, |_, _| {});
        assert_eq!(g, expect);
        let o = g.line_origin(0, 5);
        assert_eq!(o.x, g.axes[1].value(5));
        assert_eq!(o.t, g.axes[0].value(0));
    }

    #[test]
    fn shift_moves_mean() {
        let mut g = gauss2d();
        let (m0, _) = g.moments(0);
        g.shift_time(1.25).unwrap();
        let (m1, _) = g.moments(0);
        assert!((m0 - m1 - 1.25).abs() < 1e-9);
    }

    #[test]
    fn duplicate_axes_rejected() {
        let a = GridAxis::new(1, -1.0, 1.0, 8).unwrap();
        assert!(GridWaveFunction::zeros(vec![a, a], Representation::Block).is_err());
        assert!(GridAxis::new(0, 1.0, -1.0, 8).is_err());
    }
}
