//! EQT1 trajectory container: one JSON header line followed by `m` blocks of
//! `nt * nx` little-endian f64 values, time-major.

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use eqod_core::solvers::Pde;
use eqod_core::{Error, Grid1D, Result, Trajectory, TrajectorySet};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MAGIC: &str = "EQT1";
const MAX_HEADER: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqtHeader {
    pub magic: String,
    pub pde: Pde,
    pub x0: f64,
    pub length: f64,
    pub nx: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub nt: usize,
    pub m: usize,
    pub sigma: f64,
    pub seed: u64,
    pub created_by: String,
}

impl EqtHeader {
    pub fn new(pde: Pde, grid: &Grid1D, m: usize, sigma: f64, seed: u64) -> Self {
        EqtHeader {
            magic: MAGIC.to_string(),
            pde,
            x0: grid.x0,
            length: grid.length,
            nx: grid.nx,
            t_start: grid.t_start,
            t_end: grid.t_end,
            nt: grid.nt,
            m,
            sigma,
            seed,
            created_by: format!("eqod {}", env!("CARGO_PKG_VERSION")),
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.x0, self.length, self.nx, self.t_start, self.t_end, self.nt)
    }

    fn payload_len(&self) -> Option<usize> {
        self.m.checked_mul(self.nt)?.checked_mul(self.nx)?.checked_mul(8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqtContainer {
    pub header: EqtHeader,
    pub set: TrajectorySet,
}

impl EqtContainer {
    pub fn new(header: EqtHeader, set: TrajectorySet) -> Result<Self> {
        if header.magic != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", header.magic)));
        }
        if header.grid()? != *set.grid() || header.m != set.len() {
            return Err(Error::Format("header does not describe the trajectory set".into()));
        }
        Ok(EqtContainer { header, set })
    }

    fn payload(&self) -> Vec<u8> {
        let g = self.set.grid();
        let mut out = Vec::with_capacity(self.set.len() * g.nt * g.nx * 8);
        for tr in self.set.iter() {
            for v in tr.values().iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Hex SHA-256 of the payload bytes.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.payload()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(&self.header).expect("header serializes");
        out.push(b'\n');
        out.extend(self.payload());
        out
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut r = BufReader::new(reader);
        let mut line = Vec::new();
        (&mut r).take(MAX_HEADER).read_until(b'\n', &mut line)?;
        if line.last() != Some(&b'\n') {
            return Err(Error::Format("missing header line".into()));
        }
        line.pop();
        let header: EqtHeader =
            serde_json::from_slice(&line).map_err(|e| Error::Format(format!("header: {e}")))?;
        if header.magic != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", header.magic)));
        }
        let grid = header.grid()?;
        let expected = header
            .payload_len()
            .filter(|_| header.m > 0)
            .ok_or_else(|| Error::Format("invalid trajectory count".into()))?;
        let mut payload = Vec::with_capacity(expected);
        r.take(expected as u64 + 1).read_to_end(&mut payload)?;
        if payload.len() != expected {
            return Err(Error::Format(format!(
                "payload has {} bytes beyond the header, expected {expected}",
                payload.len()
            )));
        }
        let block = header.nt * header.nx;
        let trajectories = payload
            .chunks_exact(block * 8)
            .map(|chunk| {
                let values = chunk
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                    .collect();
                let values = Array2::from_shape_vec((header.nt, header.nx), values)
                    .map_err(|e| Error::Format(e.to_string()))?;
                Trajectory::new(grid, values)
            })
            .collect::<Result<Vec<_>>>()?;
        EqtContainer::new(header, TrajectorySet::new(trajectories)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_reader(fs::File::open(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }
}
