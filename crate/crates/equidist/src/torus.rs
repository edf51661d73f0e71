//! The projected point multiset on the torus `T^n = (R/Z)^n` and its
//! normalized counting measure.
//!
//! Every value vector `G(x)` lands on the grid `(Z/p)^n / p`, so cloud points
//! are stored as integer residue tuples with multiplicities; fractional
//! coordinates are formed by a single division when needed. Distances between
//! grid points are computed from integers and divided once, which makes
//! multiplicity grouping and radius comparisons reproducible.
//!
//! Geodesic balls use the coordinate-wise wraparound Euclidean metric and are
//! closed (`distance <= R`); radii are restricted to `(0, 1/2)` where the
//! ball embeds injectively.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::ffpoly::{enumerate_domain, PolynomialSystem};
use crate::kernels::gamma;
use crate::{Error, Result};

/// A point on `T^n` with coordinates in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        for &c in &coords {
            if !(0.0..1.0).contains(&c) {
                return Err(Error::InvalidArgument(format!(
                    "torus coordinate {} not in [0, 1)",
                    c
                )));
            }
        }
        Ok(TorusPoint { coords })
    }

    /// Exact grid point `residues / p`.
    pub fn from_residues(residues: &[u64], p: u64) -> Self {
        TorusPoint {
            coords: residues.iter().map(|&r| r as f64 / p as f64).collect(),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Wraparound Euclidean distance: per coordinate the minimal representative
/// `min(|x_i - y_i|, 1 - |x_i - y_i|)`.
pub fn torus_distance(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(dist_coords(x.coords(), y.coords()))
}

#[inline]
pub(crate) fn dist_coords(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let d = (a - b).abs();
        let d = d.min(1.0 - d);
        acc += d * d;
    }
    acc.sqrt()
}

/// Volume of the Euclidean n-ball: `pi^(n/2) R^n / Gamma(n/2 + 1)`.
pub fn ball_volume(n: usize, radius: f64) -> f64 {
    assert!(radius >= 0.0, "radius must be nonnegative");
    let half = n as f64 / 2.0;
    std::f64::consts::PI.powf(half) * radius.powi(n as i32)
        / gamma(half + 1.0).expect("gamma of a positive half-integer")
}

/// A geodesic ball with radius in `(0, 1/2)`, where it is injective.
#[derive(Debug, Clone)]
pub struct BallSpec {
    center: TorusPoint,
    radius: f64,
}

impl BallSpec {
    pub fn new(center: TorusPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "ball radius {} not in (0, 1/2)",
                radius
            )));
        }
        Ok(BallSpec { center, radius })
    }

    pub fn center(&self) -> &TorusPoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Measure of a set under the normalized counting measure, kept as the exact
/// pair (count, total).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallMeasure {
    pub count: u64,
    pub total: u64,
}

impl BallMeasure {
    pub fn value(&self) -> f64 {
        self.count as f64 / self.total as f64
    }
}

/// One distinct cloud point: a residue tuple and how many domain points map
/// onto it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloudEntry {
    pub residues: Vec<u64>,
    pub multiplicity: u64,
}

/// A center for distance queries: either an exact grid point given by
/// residues, or an arbitrary real point.
#[derive(Debug, Clone, Copy)]
pub enum CenterRef<'a> {
    Residues(&'a [u64]),
    Coords(&'a [f64]),
}

/// The multiset `{ G(x)/p : x in F_p^m }` with multiplicities; total mass is
/// `p^m`. Entries are sorted by residue tuple, so iteration order is
/// canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusCloud {
    p: u64,
    m: usize,
    n: usize,
    entries: Vec<CloudEntry>,
    total: u64,
}

impl TorusCloud {
    /// Project a polynomial system: evaluate over the whole domain and group
    /// equal value vectors.
    pub fn from_system(system: &PolynomialSystem) -> Result<Self> {
        let domain = enumerate_domain(system.modulus(), system.var_count())?;
        let mut map: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        let mut g = vec![0u64; system.poly_count()];
        domain.for_each_point(|_, x| {
            system.eval_into(x, &mut g);
            *map.entry(g.clone()).or_insert(0) += 1;
        });
        let entries: Vec<CloudEntry> = map
            .into_iter()
            .map(|(residues, multiplicity)| CloudEntry {
                residues,
                multiplicity,
            })
            .collect();
        Ok(TorusCloud {
            p: system.p(),
            m: system.var_count(),
            n: system.poly_count(),
            entries,
            total: domain.size(),
        })
    }

    /// Assemble a cloud from raw parts, checking that the multiplicities sum
    /// to `p^m`. `m = 0` is allowed for synthetic single-mass clouds.
    pub fn from_entries(p: u64, m: usize, n: usize, entries: Vec<CloudEntry>) -> Result<Self> {
        let mut expected: u64 = 1;
        for _ in 0..m {
            expected = expected
                .checked_mul(p)
                .ok_or(Error::DomainTooLarge { p, m })?;
        }
        let total: u64 = entries.iter().map(|e| e.multiplicity).sum();
        if total != expected {
            return Err(Error::InvalidArgument(format!(
                "multiplicities sum to {}, expected p^m = {}",
                total, expected
            )));
        }
        for e in &entries {
            if e.residues.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: e.residues.len(),
                });
            }
            for &r in &e.residues {
                if r >= p {
                    return Err(Error::CoordinateOutOfRange {
                        index: 0,
                        value: r,
                        p,
                    });
                }
            }
        }
        let mut entries = entries;
        entries.sort_by(|a, b| a.residues.cmp(&b.residues));
        Ok(TorusCloud {
            p,
            m,
            n,
            entries,
            total,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn var_count(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total mass `p^m` (with multiplicities).
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn entries(&self) -> &[CloudEntry] {
        &self.entries
    }

    /// Distance from one entry to a center, honoring the integer fast path
    /// for grid centers.
    pub(crate) fn entry_distance(&self, entry: &CloudEntry, center: CenterRef<'_>) -> f64 {
        match center {
            CenterRef::Residues(res) => {
                (self.entry_dist_sq_int(entry, res) as f64).sqrt() / self.p as f64
            }
            CenterRef::Coords(coords) => {
                let p = self.p as f64;
                let mut acc = 0.0;
                for (&r, &c) in entry.residues.iter().zip(coords) {
                    let d = (r as f64 / p - c).abs();
                    let d = d.min(1.0 - d);
                    acc += d * d;
                }
                acc.sqrt()
            }
        }
    }

    /// Squared wraparound distance between residue tuples, times `p^2`.
    #[inline]
    fn entry_dist_sq_int(&self, entry: &CloudEntry, center: &[u64]) -> u128 {
        let p = self.p;
        let mut acc: u128 = 0;
        for (&a, &b) in entry.residues.iter().zip(center) {
            let d = a.abs_diff(b);
            let d = d.min(p - d);
            acc += d as u128 * d as u128;
        }
        acc
    }

    /// Mass inside the closed ball of radius `r` around a center.
    pub fn count_within(&self, center: CenterRef<'_>, r: f64) -> u64 {
        match center {
            CenterRef::Residues(res) => {
                // d <= r  <=>  (p d)^2 <= (p r)^2, compared on the integer side
                let bound = (self.p as f64 * r).powi(2);
                self.entries
                    .iter()
                    .filter(|e| (self.entry_dist_sq_int(e, res) as f64) <= bound)
                    .map(|e| e.multiplicity)
                    .sum()
            }
            CenterRef::Coords(_) => self
                .entries
                .iter()
                .filter(|e| self.entry_distance(e, center) <= r)
                .map(|e| e.multiplicity)
                .sum(),
        }
    }

    /// Exact measure of a closed geodesic ball: `count / p^m`.
    pub fn measure_ball(&self, ball: &BallSpec) -> BallMeasure {
        let count = self.count_within(CenterRef::Coords(ball.center().coords()), ball.radius());
        BallMeasure {
            count,
            total: self.total,
        }
    }

    /// `(1/p^m) sum f(d)` over the cloud with multiplicities.
    pub fn integrate<F: FnMut(&[f64]) -> Complex64>(&self, mut f: F) -> Complex64 {
        let p = self.p as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut coords = vec![0.0f64; self.n];
        for e in &self.entries {
            for (c, &r) in coords.iter_mut().zip(&e.residues) {
                *c = r as f64 / p;
            }
            acc += f(&coords) * e.multiplicity as f64;
        }
        acc / self.total as f64
    }

    /// All (distance, multiplicity) pairs from a center, sorted ascending
    /// with equal distances merged. Grid centers group exactly via integer
    /// distances.
    pub fn sorted_distances(&self, center: CenterRef<'_>) -> Vec<(f64, u64)> {
        match center {
            CenterRef::Residues(res) => {
                let mut by_sq: BTreeMap<u128, u64> = BTreeMap::new();
                for e in &self.entries {
                    *by_sq.entry(self.entry_dist_sq_int(e, res)).or_insert(0) +=
                        e.multiplicity;
                }
                let p = self.p as f64;
                by_sq
                    .into_iter()
                    .map(|(sq, mult)| ((sq as f64).sqrt() / p, mult))
                    .collect()
            }
            CenterRef::Coords(_) => {
                let mut pairs: Vec<(f64, u64)> = self
                    .entries
                    .iter()
                    .map(|e| (self.entry_distance(e, center), e.multiplicity))
                    .collect();
                pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut merged: Vec<(f64, u64)> = Vec::with_capacity(pairs.len());
                for (d, mult) in pairs {
                    match merged.last_mut() {
                        Some((last, m)) if *last == d => *m += mult,
                        _ => merged.push((d, mult)),
                    }
                }
                merged
            }
        }
    }

    /// CSV export with columns `x_1..x_n, multiplicity`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        for j in 0..self.n {
            write!(w, "x_{},", j + 1)?;
        }
        writeln!(w, "multiplicity")?;
        let p = self.p as f64;
        for e in &self.entries {
            for &r in &e.residues {
                write!(w, "{},", r as f64 / p)?;
            }
            writeln!(w, "{}", e.multiplicity)?;
        }
        Ok(())
    }

    /// Compact binary form for caching, little-endian throughout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + self.entries.len() * (8 * self.n + 8));
        out.extend_from_slice(CLOUD_MAGIC);
        out.extend_from_slice(&self.p.to_le_bytes());
        out.extend_from_slice(&(self.m as u64).to_le_bytes());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for e in &self.entries {
            for &r in &e.residues {
                out.extend_from_slice(&r.to_le_bytes());
            }
            out.extend_from_slice(&e.multiplicity.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.take(CLOUD_MAGIC.len())?;
        if magic != CLOUD_MAGIC {
            return Err(Error::MalformedCache("bad cloud magic".into()));
        }
        let p = cur.u64()?;
        let m = cur.u64()? as usize;
        let n = cur.u64()? as usize;
        let count = cur.u64()? as usize;
        if n == 0 || n > 64 {
            return Err(Error::MalformedCache(format!("implausible n = {}", n)));
        }
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let mut residues = Vec::with_capacity(n);
            for _ in 0..n {
                residues.push(cur.u64()?);
            }
            let multiplicity = cur.u64()?;
            entries.push(CloudEntry {
                residues,
                multiplicity,
            });
        }
        if cur.pos != bytes.len() {
            return Err(Error::MalformedCache("trailing bytes".into()));
        }
        TorusCloud::from_entries(p, m, n, entries)
    }
}

const CLOUD_MAGIC: &[u8] = b"EQDCLOUD";

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::MalformedCache("truncated blob".into()));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        let s = self.take(8)?;
        Ok(u64::from_le_bytes(s.try_into().unwrap()))
    }
}

// ---------------------------------------------------------------------------
// Uniform-grid spatial index
// ---------------------------------------------------------------------------

/// Clouds at or above this many distinct points get a grid index in the
/// counting-heavy analysis loops.
pub const INDEX_THRESHOLD: usize = 100_000;

/// Uniform grid over `T^n` with cell width `>= max_radius`, so any closed
/// ball of radius up to `max_radius` is covered by the 3^n neighborhood of
/// its center cell. Pure acceleration: the per-point distance test is the
/// same as the naive scan.
pub struct CloudIndex<'a> {
    cloud: &'a TorusCloud,
    cells_per_dim: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> CloudIndex<'a> {
    pub fn build(cloud: &'a TorusCloud, max_radius: f64) -> Self {
        assert!(max_radius > 0.0 && max_radius < 0.5);
        let k = ((1.0 / max_radius).floor() as usize).max(1);
        let n = cloud.n();
        let total_cells = k.pow(n as u32);
        let mut buckets = vec![Vec::new(); total_cells];
        for (i, e) in cloud.entries().iter().enumerate() {
            let mut idx = 0usize;
            for &r in &e.residues {
                // floor(r/p * k) computed exactly in integers
                let c = (r as u128 * k as u128 / cloud.p() as u128) as usize;
                idx = idx * k + c.min(k - 1);
            }
            buckets[idx].push(i as u32);
        }
        CloudIndex {
            cloud,
            cells_per_dim: k,
            buckets,
        }
    }

    pub fn count_within(&self, center: CenterRef<'_>, r: f64) -> u64 {
        let k = self.cells_per_dim;
        let n = self.cloud.n();
        debug_assert!(r * k as f64 <= 1.0 + 1e-12);
        let center_cell: Vec<usize> = match center {
            CenterRef::Residues(res) => res
                .iter()
                .map(|&ri| ((ri as u128 * k as u128 / self.cloud.p() as u128) as usize).min(k - 1))
                .collect(),
            CenterRef::Coords(coords) => coords
                .iter()
                .map(|&c| ((c * k as f64).floor() as usize).min(k - 1))
                .collect(),
        };
        // Per-dimension neighbor cells, deduplicated for tiny k.
        let neighbor_sets: Vec<Vec<usize>> = center_cell
            .iter()
            .map(|&c| {
                let mut v = vec![
                    (c + k - 1) % k,
                    c,
                    (c + 1) % k,
                ];
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let mut count = 0u64;
        let mut pick = vec![0usize; n];
        loop {
            let mut cell = 0usize;
            for (j, &pi) in pick.iter().enumerate() {
                cell = cell * k + neighbor_sets[j][pi];
            }
            for &entry_idx in &self.buckets[cell] {
                let e = &self.cloud.entries()[entry_idx as usize];
                if self.cloud.entry_distance(e, center) <= r {
                    count += e.multiplicity;
                }
            }
            // advance the mixed-radix pick
            let mut j = n;
            loop {
                if j == 0 {
                    return count;
                }
                j -= 1;
                pick[j] += 1;
                if pick[j] < neighbor_sets[j].len() {
                    break;
                }
                pick[j] = 0;
            }
        }
    }
}
