//! Small numeric helpers.

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Exact integral of `|f|` over an interval of width `w` where `f` is affine with end values `a`, `b`.
pub fn abs_affine_integral(a: f64, b: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if (a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0) {
        0.5 * (a.abs() + b.abs()) * w
    } else {
        // sign change inside: two triangles
        0.5 * w * (a * a + b * b) / (a.abs() + b.abs())
    }
}

/// Sorted union of two sorted slices, exact duplicates removed.
pub fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}
