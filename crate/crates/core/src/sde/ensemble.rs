//! Seeded collections of discretized sample paths, with CSV and binary
//! export.

use crate::error::{Error, Result};
use std::io::Write;

/// A path dropped by the `RejectPath` wall policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectedPath {
    pub path_index: usize,
    pub time: f64,
}

/// Discretized sample paths on a common time grid.
///
/// `values` is laid out `[path][time][coordinate]`; paths dropped by the
/// reject policy are excluded from `values` but listed in `rejected` so
/// that wall events are never silently lost.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub dim: usize,
    pub times: Vec<f64>,
    pub dt: f64,
    pub master_seed: u64,
    pub label: String,
    pub n_paths: usize,
    values: Vec<f64>,
    /// Paths on which the substep fallback fired at least once.
    pub substep_paths: usize,
    /// Total substep recursions over the whole ensemble.
    pub substep_events: u64,
    pub rejected: Vec<RejectedPath>,
}

impl PathEnsemble {
    pub fn new(
        dim: usize,
        times: Vec<f64>,
        dt: f64,
        master_seed: u64,
        label: String,
        values: Vec<f64>,
    ) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::Grid("time grid must start at 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("time grid must be strictly increasing".into()));
        }
        let per_path = times.len() * dim;
        if per_path == 0 || values.len() % per_path != 0 {
            return Err(Error::Grid("value buffer does not tile the grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFault { path: 0, time: 0.0 });
        }
        let n_paths = values.len() / per_path;
        Ok(PathEnsemble {
            dim,
            times,
            dt,
            master_seed,
            label,
            n_paths,
            values,
            substep_paths: 0,
            substep_events: 0,
            rejected: Vec::new(),
        })
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// State of `path` at stored time index `k`.
    #[inline]
    pub fn state(&self, path: usize, k: usize) -> &[f64] {
        let start = (path * self.times.len() + k) * self.dim;
        &self.values[start..start + self.dim]
    }

    /// Index of a stored time, within absolute tolerance 1e-9.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|x| (x - t).abs() <= 1e-9)
            .ok_or(Error::TimeNotOnGrid(t))
    }

    /// All paths' coordinate `coord` at stored index `k`.
    pub fn column(&self, k: usize, coord: usize) -> Vec<f64> {
        (0..self.n_paths)
            .map(|p| self.state(p, k)[coord])
            .collect()
    }

    pub fn terminal_index(&self) -> usize {
        self.times.len() - 1
    }

    /// Map every stored state through `f`, producing an ensemble of the new
    /// dimension on the same grid. `f` receives (path, time index, state).
    pub fn map_states(
        &self,
        new_dim: usize,
        label: String,
        mut f: impl FnMut(usize, usize, &[f64]) -> Result<Vec<f64>>,
    ) -> Result<PathEnsemble> {
        let mut values = Vec::with_capacity(self.n_paths * self.times.len() * new_dim);
        for p in 0..self.n_paths {
            for k in 0..self.times.len() {
                let out = f(p, k, self.state(p, k))?;
                if out.len() != new_dim {
                    return Err(Error::DimensionMismatch {
                        expected: new_dim,
                        got: out.len(),
                    });
                }
                values.extend_from_slice(&out);
            }
        }
        let mut out = PathEnsemble::new(
            new_dim,
            self.times.clone(),
            self.dt,
            self.master_seed,
            label,
            values,
        )?;
        out.substep_paths = self.substep_paths;
        out.substep_events = self.substep_events;
        out.rejected = self.rejected.clone();
        Ok(out)
    }

    /// Reverse every stored path in time (the grid is unchanged).
    pub fn reversed_paths(&self) -> PathEnsemble {
        let nt = self.times.len();
        let mut values = Vec::with_capacity(self.values.len());
        for p in 0..self.n_paths {
            for k in 0..nt {
                values.extend_from_slice(self.state(p, nt - 1 - k));
            }
        }
        PathEnsemble {
            dim: self.dim,
            times: self.times.clone(),
            dt: self.dt,
            master_seed: self.master_seed,
            label: format!("{}(reversed)", self.label),
            n_paths: self.n_paths,
            values,
            substep_paths: self.substep_paths,
            substep_events: self.substep_events,
            rejected: self.rejected.clone(),
        }
    }

    /// CSV export: `path,step,time,x_1..x_dim`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        write!(w, "path,step,time")?;
        for i in 1..=self.dim {
            write!(w, ",x_{i}")?;
        }
        writeln!(w)?;
        for p in 0..self.n_paths {
            for (k, t) in self.times.iter().enumerate() {
                write!(w, "{p},{k},{t}")?;
                for v in self.state(p, k) {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    /// Compact binary dump, all numbers little-endian:
    /// magic "WDEN", u32 version, u32 dim, u64 n_paths, u64 n_times,
    /// u64 master_seed, f64 dt, times, then values path-major.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(b"WDEN")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.n_paths as u64).to_le_bytes())?;
        w.write_all(&(self.times.len() as u64).to_le_bytes())?;
        w.write_all(&self.master_seed.to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        for t in &self.times {
            w.write_all(&t.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl std::io::Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"WDEN" {
            return Err(Error::Grid("bad magic in binary ensemble".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != 1 {
            return Err(Error::Grid(format!("unsupported ensemble version {version}")));
        }
        r.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let n_paths = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let n_times = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let master_seed = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let dt = f64::from_le_bytes(b8);
        let mut times = Vec::with_capacity(n_times);
        for _ in 0..n_times {
            r.read_exact(&mut b8)?;
            times.push(f64::from_le_bytes(b8));
        }
        let mut values = Vec::with_capacity(n_paths * n_times * dim);
        for _ in 0..n_paths * n_times * dim {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        PathEnsemble::new(dim, times, dt, master_seed, "binary".into(), values)
    }

    /// Bitwise equality of the stored numbers (grid and values).
    pub fn bit_identical(&self, other: &PathEnsemble) -> bool {
        self.dim == other.dim
            && self.n_paths == other.n_paths
            && self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub(crate) fn set_wall_stats(
        &mut self,
        substep_paths: usize,
        substep_events: u64,
        rejected: Vec<RejectedPath>,
    ) {
        self.substep_paths = substep_paths;
        self.substep_events = substep_events;
        self.rejected = rejected;
    }
}
