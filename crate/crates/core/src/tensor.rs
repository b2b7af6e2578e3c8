//! Dense rank-3 array used for third derivatives, metric derivatives and
//! Christoffel symbols.

/// A dim x dim x dim array of `f64`, indexed as `t[(i, j, k)]`.
///
/// For Christoffel symbols the convention is `gamma[(i, j, k)] = gamma^i_{jk}`;
/// for metric derivatives `dg[(i, j, k)] = d g_{ij} / d x_k`; for energy third
/// derivatives the entries are fully symmetric so the layout does not matter.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank3 {
    dim: usize,
    data: Vec<f64>,
}

impl Rank3 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    out[(i, j, k)] = f(i, j, k);
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.data.iter()
    }

    /// Largest absolute asymmetry |t_ijk - t_ikj| over the last two indices.
    pub fn max_lower_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    worst = worst.max((self[(i, j, k)] - self[(i, k, j)]).abs());
                }
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize, usize)> for Rank3 {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[(i * self.dim + j) * self.dim + k]
    }
}

impl std::ops::IndexMut<(usize, usize, usize)> for Rank3 {
    #[inline]
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(i * self.dim + j) * self.dim + k]
    }
}
