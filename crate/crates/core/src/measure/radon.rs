use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// Constant density `density` on `[a, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    pub density: f64,
}

impl DensityPiece {
    pub fn mass(&self) -> f64 {
        self.density * (self.b - self.a)
    }
}

/// Finite nonnegative measure on the line: atoms plus a piecewise-constant density.
#[derive(Clone, Debug, PartialEq)]
pub struct RadonMeasure {
    atoms: Vec<Atom>,
    density: Vec<DensityPiece>,
    total_mass: f64,
}

impl RadonMeasure {
    /// Validates and normalizes: zero masses dropped, atoms sorted and merged
    /// when closer than [`tol::ATOM_MERGE`], density pieces sorted and checked
    /// for overlap.
    pub fn new(mut atoms: Vec<Atom>, mut density: Vec<DensityPiece>) -> Result<Self> {
        for a in &atoms {
            if !a.x.is_finite() || !a.mass.is_finite() || a.mass < 0.0 {
                return Err(Error::InvalidMeasure(format!("bad atom ({}, {})", a.x, a.mass)));
            }
        }
        for p in &density {
            if !(p.a.is_finite() && p.b.is_finite() && p.a <= p.b) {
                return Err(Error::InvalidMeasure(format!("bad interval [{}, {})", p.a, p.b)));
            }
            if !p.density.is_finite() || p.density < 0.0 {
                return Err(Error::InvalidMeasure(format!("bad density {} on [{}, {})", p.density, p.a, p.b)));
            }
        }
        atoms.retain(|a| a.mass > 0.0);
        atoms.sort_by(|p, q| p.x.total_cmp(&q.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if a.x - last.x <= tol::scaled(tol::ATOM_MERGE, last.x) => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        density.retain(|p| p.density > 0.0 && p.b > p.a);
        density.sort_by(|p, q| p.a.total_cmp(&q.a));
        for w in density.windows(2) {
            if w[1].a < w[0].b {
                return Err(Error::InvalidMeasure(format!(
                    "density pieces [{}, {}) and [{}, {}) overlap",
                    w[0].a, w[0].b, w[1].a, w[1].b
                )));
            }
        }
        let mut m = Self { atoms: merged, density, total_mass: 0.0 };
        m.total_mass = m.sweep().last().map_or(0.0, |k| k.2);
        Ok(m)
    }

    pub fn zero() -> Self {
        Self { atoms: Vec::new(), density: Vec::new(), total_mass: 0.0 }
    }

    pub fn dirac(x: f64, mass: f64) -> Result<Self> {
        Self::new(vec![Atom { x, mass }], Vec::new())
    }

    /// Lebesgue measure restricted to `[a, b)` times `density`.
    pub fn uniform(a: f64, b: f64, density: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![DensityPiece { a, b, density }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &[DensityPiece] {
        &self.density
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_empty()
    }

    /// Density value on the open gap right of `x` (0 outside every piece).
    pub fn density_at(&self, x: f64) -> f64 {
        let i = self.density.partition_point(|p| p.b <= x);
        match self.density.get(i) {
            Some(p) if p.a <= x => p.density,
            _ => 0.0,
        }
    }

    /// Sorted locations of all atoms and density endpoints.
    pub fn support_points(&self) -> Vec<f64> {
        let mut xs: Vec<f64> =
            self.atoms.iter().map(|a| a.x).chain(self.density.iter().flat_map(|p| [p.a, p.b])).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// `(x, F(x), F(x+))` at every support point, accumulated with a compensated sum.
    pub(crate) fn sweep(&self) -> Vec<(f64, f64, f64)> {
        let xs = self.support_points();
        let mut out = Vec::with_capacity(xs.len());
        let mut acc = CompensatedSum::new();
        let mut ai = 0;
        let mut di = 0;
        for (k, &x) in xs.iter().enumerate() {
            if k > 0 {
                let prev = xs[k - 1];
                while di < self.density.len() && self.density[di].b <= prev {
                    di += 1;
                }
                if let Some(p) = self.density.get(di) {
                    if p.a <= prev && x <= p.b {
                        acc.add(p.density * (x - prev));
                    }
                }
            }
            let left = acc.value();
            while ai < self.atoms.len() && self.atoms[ai].x <= x {
                acc.add(self.atoms[ai].mass);
                ai += 1;
            }
            out.push((x, left, acc.value()));
        }
        out
    }

    /// Image under `x -> x + h`.
    pub fn translate(&self, h: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| Atom { x: a.x + h, mass: a.mass }).collect(),
            density: self.density.iter().map(|p| DensityPiece { a: p.a + h, b: p.b + h, density: p.density }).collect(),
            total_mass: self.total_mass,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureRecord {
    atoms: Vec<[f64; 2]>,
    density: Vec<[f64; 3]>,
}

impl Serialize for RadonMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureRecord {
            atoms: self.atoms.iter().map(|a| [a.x, a.mass]).collect(),
            density: self.density.iter().map(|p| [p.a, p.b, p.density]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RadonMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MeasureRecord::deserialize(d)?;
        RadonMeasure::new(
            r.atoms.iter().map(|&[x, mass]| Atom { x, mass }).collect(),
            r.density.iter().map(|&[a, b, density]| DensityPiece { a, b, density }).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_mass_sums_atoms_and_density() {
        let m = RadonMeasure::new(
            vec![Atom { x: 0.0, mass: 1.0 }, Atom { x: 1.0, mass: 2.0 }],
            vec![DensityPiece { a: -1.0, b: 1.0, density: 0.25 }],
        )
        .unwrap();
        assert_eq!(m.total_mass(), 3.5);
    }

    #[test]
    fn nearby_atoms_merge_and_zero_masses_vanish() {
        let m = RadonMeasure::new(
            vec![Atom { x: 0.5, mass: 1.0 }, Atom { x: 0.5 + 1e-16, mass: 0.5 }, Atom { x: 3.0, mass: 0.0 }],
            vec![],
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(m.atoms()[0].mass, 1.5);
    }

    #[test]
    fn rejects_negative_and_overlapping_pieces() {
        assert!(RadonMeasure::dirac(0.0, -1.0).is_err());
        let overlap = RadonMeasure::new(
            vec![],
            vec![DensityPiece { a: 0.0, b: 1.0, density: 1.0 }, DensityPiece { a: 0.5, b: 2.0, density: 1.0 }],
        );
        assert!(overlap.is_err());
    }

    #[test]
    fn json_shape() {
        let m =
            RadonMeasure::new(vec![Atom { x: 0.0, mass: 1.0 }], vec![DensityPiece { a: 1.0, b: 2.0, density: 0.5 }])
                .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"atoms":[[0.0,1.0]],"density":[[1.0,2.0,0.5]]}"#);
        let back: RadonMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
